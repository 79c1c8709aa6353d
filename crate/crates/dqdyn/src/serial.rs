//! Dual quaternion Newton–Euler for a single serial chain.
//!
//! The forward recursion propagates world-relative twists and their
//! derivatives to each link CoM (expressed in the CoM frame); the backward
//! recursion turns them into joint wrenches, optionally injecting an
//! external wrench at the tip. A chain mounted on a moving connection seeds
//! the forward recursion with the connection twist instead of zero.
//!
//! All functions are pure: frames are derived from the configuration at
//! construction of [`ChainDynamics`] and nothing is cached across calls.

use thiserror::Error;

use crate::dq::{DualQuaternion, Pose, Quaternion, Twist, Wrench, PURITY_TOL};
use crate::model::{com_pose, link_pose, JointKind, Link, ModelError};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("state dimension mismatch: chain has {expected} DoF, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("seed twist must be pure (real parts {primary:.3e}, {dual:.3e})")]
    SeedNotPure { primary: f64, dual: f64 },
}

/// Joint configuration, velocity, and acceleration of one chain. The vector
/// dimension is the sum of the joint DoF counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    pub qddot: Vec<f64>,
}

impl ChainState {
    pub fn new(q: Vec<f64>, qdot: Vec<f64>, qddot: Vec<f64>) -> Self {
        Self { q, qdot, qddot }
    }

    pub fn zero(dof: usize) -> Self {
        Self::new(vec![0.0; dof], vec![0.0; dof], vec![0.0; dof])
    }

    /// Same configuration, zero rates.
    pub fn hold_configuration(&self) -> Self {
        Self::new(self.q.clone(), vec![0.0; self.q.len()], vec![0.0; self.q.len()])
    }
}

/// Twists and twist derivatives at the link CoMs, world-relative, expressed
/// in CoM-frame coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistState {
    pub twists: Vec<Twist>,
    pub derivatives: Vec<Twist>,
}

impl TwistState {
    pub fn zero(n: usize) -> Self {
        Self {
            twists: vec![DualQuaternion::ZERO; n],
            derivatives: vec![DualQuaternion::ZERO; n],
        }
    }

    pub fn len(&self) -> usize {
        self.twists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.twists.is_empty()
    }

    /// Element-wise sum; used to combine own-motion and connection-induced
    /// twist vectors.
    pub fn sum(&self, other: &TwistState) -> TwistState {
        assert_eq!(self.len(), other.len());
        TwistState {
            twists: self
                .twists
                .iter()
                .zip(&other.twists)
                .map(|(a, b)| *a + *b)
                .collect(),
            derivatives: self
                .derivatives
                .iter()
                .zip(&other.derivatives)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}

/// Per-link frame data for one chain configuration. Indices are 0-based for
/// links 1..k; the base frame (frame 0) is the chain's mount frame.
#[derive(Clone, Debug)]
pub struct ChainFrames {
    /// `x_i^{i−1}`: link frame in the preceding link frame.
    pub link_in_prev: Vec<Pose>,
    /// `x_{c_i}^{i}`: CoM frame in the link frame (pure translation).
    pub com_in_link: Vec<Pose>,
    /// `x_{c_i}^{i−1}`.
    pub com_in_prev: Vec<Pose>,
    /// `x_i^{0}`: link frame in the chain base frame.
    pub link_in_base: Vec<Pose>,
    /// `x_{c_i}^{0}`.
    pub com_in_base: Vec<Pose>,
}

pub fn chain_frames(links: &[Link], q: &[f64]) -> Result<ChainFrames, DynamicsError> {
    let dof: usize = links.iter().map(|l| l.joint.dof()).sum();
    if q.len() != dof {
        return Err(DynamicsError::DimensionMismatch {
            expected: dof,
            got: q.len(),
        });
    }
    let n = links.len();
    let mut frames = ChainFrames {
        link_in_prev: Vec::with_capacity(n),
        com_in_link: Vec::with_capacity(n),
        com_in_prev: Vec::with_capacity(n),
        link_in_base: Vec::with_capacity(n),
        com_in_base: Vec::with_capacity(n),
    };
    let mut offset = 0;
    let mut base = Pose::identity();
    for link in links {
        let d = link.joint.dof();
        let x = link_pose(&link.joint, &link.params, &q[offset..offset + d])?;
        offset += d;
        let com = com_pose(&Pose::identity(), &link.params);
        base = (base * x).renormalized();
        frames.link_in_prev.push(x);
        frames.com_in_prev.push(x * com);
        frames.com_in_base.push(base * com);
        frames.com_in_link.push(com);
        frames.link_in_base.push(base);
    }
    Ok(frames)
}

/// Twist and twist derivative contributed by joint `i` between frames `i−1`
/// and `c_i`, expressed in frame `i−1`. The single-axis kinds (revolute,
/// prismatic, cylindrical, helical) act about `axis`; the planar and 6-DoF
/// parameterizations use the frame axes directly.
pub fn joint_twist(
    kind: &JointKind,
    qdot: &[f64],
    qddot: &[f64],
    axis: Quaternion,
) -> Result<(Twist, Twist), DynamicsError> {
    let dof = kind.dof();
    if qdot.len() != dof || qddot.len() != dof {
        return Err(DynamicsError::DimensionMismatch {
            expected: dof,
            got: qdot.len().max(qddot.len()),
        });
    }
    let pure = |q: Quaternion| DualQuaternion::new(q, Quaternion::ZERO);
    let dual = |q: Quaternion| DualQuaternion::new(Quaternion::ZERO, q);
    Ok(match kind {
        JointKind::Revolute => (pure(axis * qdot[0]), pure(axis * qddot[0])),
        JointKind::Prismatic => (dual(axis * qdot[0]), dual(axis * qddot[0])),
        JointKind::Spherical => (
            pure(Quaternion::pure(qdot[0], qdot[1], qdot[2])),
            pure(Quaternion::pure(qddot[0], qddot[1], qddot[2])),
        ),
        JointKind::Planar => (
            DualQuaternion::new(
                Quaternion::K * qdot[2],
                Quaternion::pure(qdot[0], qdot[1], 0.0),
            ),
            DualQuaternion::new(
                Quaternion::K * qddot[2],
                Quaternion::pure(qddot[0], qddot[1], 0.0),
            ),
        ),
        JointKind::Cylindrical => (
            DualQuaternion::new(axis * qdot[0], axis * qdot[1]),
            DualQuaternion::new(axis * qddot[0], axis * qddot[1]),
        ),
        JointKind::Helical { pitch } => (
            DualQuaternion::new(axis * qdot[0], axis * (pitch * qdot[0])),
            DualQuaternion::new(axis * qddot[0], axis * (pitch * qddot[0])),
        ),
        JointKind::SixDof => (
            DualQuaternion::new(
                Quaternion::pure(qdot[3], qdot[4], qdot[5]),
                Quaternion::pure(qdot[0], qdot[1], qdot[2]),
            ),
            DualQuaternion::new(
                Quaternion::pure(qddot[3], qddot[4], qddot[5]),
                Quaternion::pure(qddot[0], qddot[1], qddot[2]),
            ),
        ),
    })
}

/// Serial-chain dynamics at a fixed configuration. Holds the chain frames
/// and the gravity vector expressed in the chain base frame.
pub struct ChainDynamics<'a> {
    links: &'a [Link],
    frames: ChainFrames,
    gravity_base: Quaternion,
}

impl<'a> ChainDynamics<'a> {
    pub fn new(
        links: &'a [Link],
        q: &[f64],
        gravity_base: Quaternion,
    ) -> Result<Self, DynamicsError> {
        Ok(Self {
            links,
            frames: chain_frames(links, q)?,
            gravity_base,
        })
    }

    pub fn frames(&self) -> &ChainFrames {
        &self.frames
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn dof(&self) -> usize {
        self.links.iter().map(|l| l.joint.dof()).sum()
    }

    fn check_state(&self, state: &ChainState) -> Result<(), DynamicsError> {
        let dof = self.dof();
        for v in [&state.q, &state.qdot, &state.qddot] {
            if v.len() != dof {
                return Err(DynamicsError::DimensionMismatch {
                    expected: dof,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    /// Forward recursion with zero base twist.
    pub fn forward_recursion(&self, state: &ChainState) -> Result<TwistState, DynamicsError> {
        self.forward_recursion_seeded(state, &DualQuaternion::ZERO, &DualQuaternion::ZERO)
    }

    /// Forward recursion starting from a nonzero base twist
    /// `ξ_{0,c₀}` / `ξ̇_{0,c₀}` (a chain mounted on a moving connection).
    pub fn forward_recursion_seeded(
        &self,
        state: &ChainState,
        seed_twist: &Twist,
        seed_derivative: &Twist,
    ) -> Result<TwistState, DynamicsError> {
        self.check_state(state)?;
        for seed in [seed_twist, seed_derivative] {
            if !seed.is_pure(PURITY_TOL) {
                return Err(DynamicsError::SeedNotPure {
                    primary: seed.primary.w,
                    dual: seed.dual.w,
                });
            }
        }
        let n = self.links.len();
        let mut out = TwistState {
            twists: Vec::with_capacity(n),
            derivatives: Vec::with_capacity(n),
        };
        let mut prev_twist = *seed_twist;
        let mut prev_deriv = *seed_derivative;
        let mut offset = 0;
        for (i, link) in self.links.iter().enumerate() {
            let d = link.joint.dof();
            let (jt, jt_dot) = joint_twist(
                &link.joint,
                &state.qdot[offset..offset + d],
                &state.qddot[offset..offset + d],
                Quaternion::K,
            )?;
            offset += d;

            let prev_link_in_com = self.frames.com_in_prev[i].conj();
            // x_{c_{i−1}}^{c_i}; c₀ is the base frame itself.
            let prev_com_in_com = if i == 0 {
                prev_link_in_com
            } else {
                prev_link_in_com * self.frames.com_in_link[i - 1]
            };

            let transported = prev_com_in_com.adjoint(&prev_twist);
            let joint_in_com = prev_link_in_com.adjoint(&jt);
            let twist = transported + joint_in_com;
            // ξ_{c_i,c_{i−1}}^{c_i} = −Ad(x_{i−1}^{c_i}) ξ_{i−1,c_i}^{i−1}
            let relative = -joint_in_com;
            let derivative = prev_com_in_com.adjoint(&prev_deriv)
                + prev_link_in_com.adjoint(&jt_dot)
                + relative.cross(&transported);

            out.twists.push(twist);
            out.derivatives.push(derivative);
            prev_twist = twist;
            prev_deriv = derivative;
        }
        Ok(out)
    }

    /// Backward recursion: the wrench function `𝒲` mapping CoM twists and
    /// derivatives to the joint wrenches `Γ[i] = ζ_{0,c_i}^{i−1}`. The tip
    /// wrench is expressed in the last link frame.
    pub fn wrench_function(
        &self,
        xi: &TwistState,
        tip_wrench: &Wrench,
    ) -> Result<Vec<Wrench>, DynamicsError> {
        let n = self.links.len();
        if xi.len() != n {
            return Err(DynamicsError::DimensionMismatch {
                expected: n,
                got: xi.len(),
            });
        }
        let mut gamma = vec![DualQuaternion::ZERO; n];
        let mut downstream = *tip_wrench;
        for i in (0..n).rev() {
            let link = &self.links[i];
            let twist = &xi.twists[i];
            let deriv = &xi.derivatives[i];

            let f = (deriv.dual() + twist.primary().cross(&twist.dual())) * link.params.mass;
            let iw_dot = link.params.apply_inertia(&deriv.primary());
            let iw = link.params.apply_inertia(&twist.primary());
            let tau = iw_dot + twist.primary().cross(&iw);

            let r_com = self.frames.com_in_base[i].rotation();
            let g_com = r_com.conj().rotate(&self.gravity_base);
            let zeta = DualQuaternion::new(f - g_com * link.params.mass, tau);

            gamma[i] = self.frames.com_in_prev[i].adjoint(&zeta)
                + self.frames.link_in_prev[i].adjoint(&downstream);
            downstream = gamma[i];
        }
        Ok(gamma)
    }

    /// Inverse dynamics: forward recursion then backward recursion with zero
    /// tip wrench.
    pub fn newton_euler(&self, state: &ChainState) -> Result<Vec<Wrench>, DynamicsError> {
        let xi = self.forward_recursion(state)?;
        self.wrench_function(&xi, &DualQuaternion::ZERO)
    }
}
