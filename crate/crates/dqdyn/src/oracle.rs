//! Independent ground truth for the composed dynamics: a single-pass
//! recursive Newton–Euler over the flattened kinematic tree, plus a plain
//! 3D statics oracle.
//!
//! This module shares the per-link physics (Newton and Euler equations,
//! identical joint parameterizations) with the dual quaternion path but
//! nothing else: frames are homogeneous `(R, p)` pairs built from rotation
//! matrices, velocities and wrenches are accumulated as world-origin spatial
//! vectors, and the traversal works on the flattened link list rather than
//! the subsystem graph. Agreement between the two paths is therefore a
//! meaningful check.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::model::{JointKind, Link, RobotTree, SubsystemId, SubsystemKind};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("subsystem {0} is a black box; the monolithic oracle needs full knowledge")]
    BlackBoxPresent(SubsystemId),
    #[error("state dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Homogeneous transform as an explicit rotation matrix and translation.
#[derive(Clone, Copy, Debug)]
pub struct Hom {
    pub r: Matrix3<f64>,
    pub p: Vector3<f64>,
}

impl Hom {
    pub fn identity() -> Self {
        Self {
            r: Matrix3::identity(),
            p: Vector3::zeros(),
        }
    }

    pub fn compose(&self, other: &Hom) -> Hom {
        Hom {
            r: self.r * other.r,
            p: self.r * other.p + self.p,
        }
    }
}

fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rodrigues rotation from a rotation vector.
fn rot_vec(v: Vector3<f64>) -> Matrix3<f64> {
    let angle = v.norm();
    if angle < 1e-300 {
        return Matrix3::identity();
    }
    let k = v / angle;
    let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    Matrix3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos())
}

fn dh_hom(theta: f64, d: f64, a: f64, alpha: f64) -> Hom {
    Hom {
        r: rot_z(theta),
        p: Vector3::zeros(),
    }
    .compose(&Hom {
        r: Matrix3::identity(),
        p: Vector3::new(a, 0.0, d),
    })
    .compose(&Hom {
        r: rot_x(alpha),
        p: Vector3::zeros(),
    })
}

fn joint_hom(link: &Link, q: &[f64]) -> Hom {
    let p = &link.params;
    match link.joint {
        JointKind::Revolute => dh_hom(p.dh_theta + q[0], p.dh_d, p.dh_a, p.dh_alpha),
        JointKind::Prismatic => dh_hom(p.dh_theta, p.dh_d + q[0], p.dh_a, p.dh_alpha),
        JointKind::Helical { pitch } => {
            dh_hom(p.dh_theta + q[0], p.dh_d + pitch * q[0], p.dh_a, p.dh_alpha)
        }
        JointKind::Spherical => Hom {
            r: rot_vec(Vector3::new(q[0], q[1], q[2])),
            p: Vector3::zeros(),
        }
        .compose(&dh_hom(0.0, p.dh_d, p.dh_a, p.dh_alpha)),
        JointKind::Planar => Hom {
            r: rot_z(q[2]),
            p: Vector3::new(q[0], q[1], 0.0),
        }
        .compose(&dh_hom(0.0, p.dh_d, p.dh_a, p.dh_alpha)),
        JointKind::Cylindrical => dh_hom(q[0], q[1], p.dh_a, p.dh_alpha),
        JointKind::SixDof => Hom {
            r: rot_vec(Vector3::new(q[3], q[4], q[5])),
            p: Vector3::new(q[0], q[1], q[2]),
        }
        .compose(&dh_hom(0.0, 0.0, p.dh_a, p.dh_alpha)),
    }
}

/// Joint twist `(ω, v)` in the parent joint frame; same parameterization as
/// the dual quaternion path.
fn joint_rates(link: &Link, qd: &[f64]) -> (Vector3<f64>, Vector3<f64>) {
    match link.joint {
        JointKind::Revolute => (Vector3::new(0.0, 0.0, qd[0]), Vector3::zeros()),
        JointKind::Prismatic => (Vector3::zeros(), Vector3::new(0.0, 0.0, qd[0])),
        JointKind::Spherical => (Vector3::new(qd[0], qd[1], qd[2]), Vector3::zeros()),
        JointKind::Planar => (
            Vector3::new(0.0, 0.0, qd[2]),
            Vector3::new(qd[0], qd[1], 0.0),
        ),
        JointKind::Cylindrical => (
            Vector3::new(0.0, 0.0, qd[0]),
            Vector3::new(0.0, 0.0, qd[1]),
        ),
        JointKind::Helical { pitch } => (
            Vector3::new(0.0, 0.0, qd[0]),
            Vector3::new(0.0, 0.0, pitch * qd[0]),
        ),
        JointKind::SixDof => (
            Vector3::new(qd[3], qd[4], qd[5]),
            Vector3::new(qd[0], qd[1], qd[2]),
        ),
    }
}

/// One link of the flattened tree.
#[derive(Clone, Debug)]
pub struct FlatLink {
    /// Global index of the parent link; `None` for links mounted on the
    /// world frame.
    pub parent: Option<usize>,
    /// Fixed transform from the parent link frame to this link's joint
    /// frame (the folded connection offset; identity inside a subsystem).
    pub mount: Hom,
    pub link: Link,
    pub subsystem: SubsystemId,
    /// 1-based index within the original subsystem.
    pub link_index: usize,
}

/// The kinematic tree with subsystem boundaries erased. Links are stored in
/// breadth-first subsystem order, so every parent precedes its children.
#[derive(Clone, Debug)]
pub struct FlatTree {
    pub links: Vec<FlatLink>,
    pub gravity: Vector3<f64>,
}

impl FlatTree {
    pub fn dof(&self) -> usize {
        self.links.iter().map(|l| l.link.joint.dof()).sum()
    }

    /// Link indices ordered by ascending subsystem id (the order used when
    /// concatenating per-subsystem results).
    pub fn id_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.links.len()).collect();
        idx.sort_by_key(|&i| (self.links[i].subsystem, self.links[i].link_index));
        idx
    }

    /// Per-DoF slices aligned with the link order.
    fn dof_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.links.len());
        let mut acc = 0;
        for l in &self.links {
            offsets.push(acc);
            acc += l.link.joint.dof();
        }
        offsets
    }
}

/// Flattens a fully modeled tree: links renumbered globally, connection
/// offsets folded into the child's first-link mount transform.
pub fn flatten(tree: &RobotTree) -> Result<FlatTree, OracleError> {
    let mut links = Vec::with_capacity(tree.total_links());
    let mut first_global: BTreeMap<SubsystemId, usize> = BTreeMap::new();
    for id in tree.bfs_order() {
        let sub = tree.subsystem(id).unwrap();
        let chain = match &sub.kind {
            SubsystemKind::Modeled { links } => links,
            SubsystemKind::BlackBox { .. } => return Err(OracleError::BlackBoxPresent(id)),
        };
        first_global.insert(id, links.len());
        for (k, link) in chain.iter().enumerate() {
            let (parent, mount) = if k > 0 {
                (Some(links.len() - 1), Hom::identity())
            } else {
                match (&sub.parent, &sub.base_connection) {
                    (Some(p), Some(conn)) => {
                        let host = first_global[p] + conn.host_link - 1;
                        let r = conn.offset.rotation();
                        let t = conn.offset.translation();
                        let mount = Hom {
                            r: quat_matrix(r.w, r.x, r.y, r.z),
                            p: Vector3::new(t.x, t.y, t.z),
                        };
                        (Some(host), mount)
                    }
                    _ => (None, Hom::identity()),
                }
            };
            links.push(FlatLink {
                parent,
                mount,
                link: link.clone(),
                subsystem: id,
                link_index: k + 1,
            });
        }
    }
    Ok(FlatTree {
        links,
        gravity: Vector3::new(tree.gravity.x, tree.gravity.y, tree.gravity.z),
    })
}

fn quat_matrix(w: f64, x: f64, y: f64, z: f64) -> Matrix3<f64> {
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

struct ForwardPass {
    /// Joint frame (frame i−1 of the link) in the world.
    joint_frame: Vec<Hom>,
    /// Link frame in the world.
    link_frame: Vec<Hom>,
    /// World CoM positions.
    com: Vec<Vector3<f64>>,
    /// World-origin spatial velocity (ω, v@origin) and its derivative.
    omega: Vec<Vector3<f64>>,
    v0: Vec<Vector3<f64>>,
    alpha: Vec<Vector3<f64>>,
    a0: Vec<Vector3<f64>>,
}

fn forward(flat: &FlatTree, q: &[f64], qd: &[f64], qdd: &[f64]) -> ForwardPass {
    let n = flat.links.len();
    let offsets = flat.dof_offsets();
    let mut fp = ForwardPass {
        joint_frame: Vec::with_capacity(n),
        link_frame: Vec::with_capacity(n),
        com: Vec::with_capacity(n),
        omega: vec![Vector3::zeros(); n],
        v0: vec![Vector3::zeros(); n],
        alpha: vec![Vector3::zeros(); n],
        a0: vec![Vector3::zeros(); n],
    };
    for (i, fl) in flat.links.iter().enumerate() {
        let o = offsets[i];
        let d = fl.link.joint.dof();
        let qs = &q[o..o + d];

        let (parent_frame, w_p, v_p, al_p, a_p) = match fl.parent {
            Some(p) => (fp.link_frame[p], fp.omega[p], fp.v0[p], fp.alpha[p], fp.a0[p]),
            None => (
                Hom::identity(),
                Vector3::zeros(),
                Vector3::zeros(),
                Vector3::zeros(),
                Vector3::zeros(),
            ),
        };
        let jf = parent_frame.compose(&fl.mount);
        let lf = jf.compose(&joint_hom(&fl.link, qs));

        let (wj, vj) = joint_rates(&fl.link, &qd[o..o + d]);
        let (wj_dot, vj_dot) = joint_rates(&fl.link, &qdd[o..o + d]);
        let rwj = jf.r * wj;
        let rvj = jf.r * vj;
        let rwj_dot = jf.r * wj_dot;
        let rvj_dot = jf.r * vj_dot;
        // Joint-frame origin velocity (the frame rides the parent body).
        let pf_dot = v_p + w_p.cross(&jf.p);

        fp.omega[i] = w_p + rwj;
        fp.v0[i] = v_p + rvj + jf.p.cross(&rwj);
        fp.alpha[i] = al_p + rwj_dot + w_p.cross(&rwj);
        fp.a0[i] = a_p
            + rvj_dot
            + w_p.cross(&rvj)
            + pf_dot.cross(&rwj)
            + jf.p.cross(&(rwj_dot + w_p.cross(&rwj)));

        let com_local = fl.link.params.com_offset;
        fp.com
            .push(lf.p + lf.r * Vector3::new(com_local.x, com_local.y, com_local.z));
        fp.joint_frame.push(jf);
        fp.link_frame.push(lf);
    }
    fp
}

fn check_dims(flat: &FlatTree, v: &[f64]) -> Result<(), OracleError> {
    if v.len() != flat.dof() {
        return Err(OracleError::DimensionMismatch {
            expected: flat.dof(),
            got: v.len(),
        });
    }
    Ok(())
}

/// Monolithic inverse dynamics. Returns one wrench per link as
/// `(force, moment)` about the joint-frame origin, expressed in the joint
/// frame, the same quantity the composed algorithm produces. `tip_wrenches`
/// maps global link indices to external wrenches expressed in that link's
/// frame.
pub fn monolithic_ne(
    flat: &FlatTree,
    q: &[f64],
    qd: &[f64],
    qdd: &[f64],
    tip_wrenches: &BTreeMap<usize, [f64; 6]>,
) -> Result<Vec<[f64; 6]>, OracleError> {
    check_dims(flat, q)?;
    check_dims(flat, qd)?;
    check_dims(flat, qdd)?;
    let n = flat.links.len();
    let fp = forward(flat, q, qd, qdd);

    // World-origin wrench accumulators (f, m@origin).
    let mut f_acc = vec![Vector3::zeros(); n];
    let mut m_acc = vec![Vector3::zeros(); n];
    for i in 0..n {
        let fl = &flat.links[i];
        let m = fl.link.params.mass;
        let x_c = fp.com[i];
        let v_c = fp.v0[i] + fp.omega[i].cross(&x_c);
        let a_c = fp.a0[i] + fp.alpha[i].cross(&x_c) + fp.omega[i].cross(&v_c);

        let im = fl.link.params.inertia_matrix();
        let i_local = Matrix3::new(
            im[0][0], im[0][1], im[0][2], im[1][0], im[1][1], im[1][2], im[2][0], im[2][1],
            im[2][2],
        );
        let r_c = fp.link_frame[i].r;
        let i_world = r_c * i_local * r_c.transpose();

        let force = m * (a_c - flat.gravity);
        let torque_com = i_world * fp.alpha[i] + fp.omega[i].cross(&(i_world * fp.omega[i]));
        f_acc[i] = force;
        m_acc[i] = torque_com + x_c.cross(&force);

        if let Some(tip) = tip_wrenches.get(&i) {
            let f_loc = Vector3::new(tip[0], tip[1], tip[2]);
            let m_loc = Vector3::new(tip[3], tip[4], tip[5]);
            let f0 = fp.link_frame[i].r * f_loc;
            let m0 = fp.link_frame[i].r * m_loc + fp.link_frame[i].p.cross(&f0);
            f_acc[i] += f0;
            m_acc[i] += m0;
        }
    }
    for i in (0..n).rev() {
        if let Some(p) = flat.links[i].parent {
            let (fi, mi) = (f_acc[i], m_acc[i]);
            f_acc[p] += fi;
            m_acc[p] += mi;
        }
    }

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let jf = &fp.joint_frame[i];
        let f_loc = jf.r.transpose() * f_acc[i];
        let m_loc = jf.r.transpose() * (m_acc[i] - jf.p.cross(&f_acc[i]));
        out.push([f_loc.x, f_loc.y, f_loc.z, m_loc.x, m_loc.y, m_loc.z]);
    }
    Ok(out)
}

/// Per-DoF projection directions of a joint, as unit vectors in the joint
/// frame paired with a flag for force (true) vs moment (false) projection,
/// plus an extra force term for helical joints.
fn project_wrench(link: &Link, f: &Vector3<f64>, m: &Vector3<f64>) -> Vec<f64> {
    let x = Vector3::x();
    let y = Vector3::y();
    let z = Vector3::z();
    match link.joint {
        JointKind::Revolute => vec![m.dot(&z)],
        JointKind::Prismatic => vec![f.dot(&z)],
        JointKind::Helical { pitch } => vec![m.dot(&z) + pitch * f.dot(&z)],
        JointKind::Cylindrical => vec![m.dot(&z), f.dot(&z)],
        JointKind::Spherical => vec![m.dot(&x), m.dot(&y), m.dot(&z)],
        JointKind::Planar => vec![f.dot(&x), f.dot(&y), m.dot(&z)],
        JointKind::SixDof => vec![
            f.dot(&x),
            f.dot(&y),
            f.dot(&z),
            m.dot(&x),
            m.dot(&y),
            m.dot(&z),
        ],
    }
}

/// Generalized gravity forces in the actuation convention (the load the
/// actuators must supply to hold the configuration), computed with plain
/// vector statics: for each joint, the transported weight of all descendant
/// links projected onto the joint's motion directions.
pub fn statics_oracle(flat: &FlatTree, q: &[f64]) -> Result<Vec<f64>, OracleError> {
    check_dims(flat, q)?;
    let zeros = vec![0.0; q.len()];
    let fp = forward(flat, q, &zeros, &zeros);
    let n = flat.links.len();

    // descendants[i] includes i itself.
    let mut descendants: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        let mut cur = Some(j);
        while let Some(i) = cur {
            descendants[i].push(j);
            cur = flat.links[i].parent;
        }
    }

    let mut out = Vec::with_capacity(flat.dof());
    for (i, desc) in descendants.iter().enumerate() {
        let jf = &fp.joint_frame[i];
        let mut f = Vector3::zeros();
        let mut m = Vector3::zeros();
        for &j in desc {
            let weight = flat.links[j].link.params.mass * flat.gravity;
            f -= weight;
            m -= (fp.com[j] - jf.p).cross(&weight);
        }
        let f_loc = jf.r.transpose() * f;
        let m_loc = jf.r.transpose() * m;
        out.extend(project_wrench(&flat.links[i].link, &f_loc, &m_loc));
    }
    Ok(out)
}

/// Total kinetic energy at a state; used by energy-balance tests.
pub fn kinetic_energy(flat: &FlatTree, q: &[f64], qd: &[f64]) -> Result<f64, OracleError> {
    check_dims(flat, q)?;
    check_dims(flat, qd)?;
    let zeros = vec![0.0; q.len()];
    let fp = forward(flat, q, qd, &zeros);
    let mut ke = 0.0;
    for (i, fl) in flat.links.iter().enumerate() {
        let v_c = fp.v0[i] + fp.omega[i].cross(&fp.com[i]);
        let im = fl.link.params.inertia_matrix();
        let i_local = Matrix3::new(
            im[0][0], im[0][1], im[0][2], im[1][0], im[1][1], im[1][2], im[2][0], im[2][1],
            im[2][2],
        );
        let r = fp.link_frame[i].r;
        let i_world = r * i_local * r.transpose();
        ke += 0.5 * fl.link.params.mass * v_c.dot(&v_c)
            + 0.5 * fp.omega[i].dot(&(i_world * fp.omega[i]));
    }
    Ok(ke)
}
