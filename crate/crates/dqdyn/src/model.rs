//! Robot description data model, file parsing, and frame kinematics.
//!
//! A robot is a tree of *subsystems*. Each subsystem is either a modeled
//! open serial chain (per-link DH and inertial parameters) or a black box
//! known only through readings at its connection points. Non-root subsystems
//! attach to a *connection point* on their predecessor: a host link index
//! plus a fixed offset pose from that link's frame to the connection frame.
//! The connection frame is the child subsystem's base frame.
//!
//! # Description file format
//!
//! TOML with the following normative sections and field names:
//!
//! ```toml
//! [world]
//! gravity = [0.0, 0.0, -9.81]          # optional, m/s² in the root frame
//!
//! [subsystem.1]
//! kind = "modeled"                     # or "blackbox" (+ optional dof_hint)
//! links = [
//!   { joint = "revolute", a = 0.0, alpha = 1.5707963267948966, d = 0.187,
//!     theta = 1.5707963267948966, mass = 0.8, com = [0.0, -0.187, 0.0],
//!     inertia_diag = [0.8, 0.8, 0.8] },
//! ]
//!
//! [tree]
//! root = 1
//! edges = [
//!   { parent = 1, child = 2, host_link = 2,
//!     offset_pose = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0] },
//! ]
//!
//! [control]                            # optional controller scenario
//! kp = 4.0
//! kv = 4.0
//! dt = 0.001
//! duration = 10.0
//! targets = [ { leaf = 2, pose = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0] } ]
//! ```
//!
//! `joint` is one of `revolute`, `prismatic`, `spherical`, `planar`,
//! `cylindrical`, `helical` (requires `pitch`, m/rad), `six_dof`. Inertia is
//! given either as `inertia_diag = [ixx, iyy, izz]` or as `inertia_full`
//! with the three tensor columns. `offset_pose` and `pose` are eight reals
//! in the canonical layout (primary w,x,y,z, dual w,x,y,z).
//!
//! Joint variables: `q` adds to `theta` (revolute, helical) or `d`
//! (prismatic); multi-DoF joints ignore the actuated DH offsets and apply
//! their own parameterization about the joint frame: planar `(x, y, φ)`,
//! cylindrical `(θ, d)`, spherical and the rotational half of `six_dof` as a
//! rotation vector. Velocity components of multi-DoF joints are the screw
//! coordinates of the joint twist in the parent joint frame.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dq::{DualQuaternion, Pose, Quaternion};

pub type SubsystemId = u32;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("dimension mismatch: expected {expected} joint values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Joint model; degree-of-freedom counts are 1, 1, 3, 3, 2, 1, 6.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JointKind {
    Revolute,
    Prismatic,
    Spherical,
    /// `(x, y, φ)` in the joint plane.
    Planar,
    /// `(θ, d)` about/along the joint axis.
    Cylindrical,
    /// Coupled rotation/translation with pitch in m/rad.
    Helical { pitch: f64 },
    /// `(x, y, z, rx, ry, rz)`; translation then rotation vector.
    SixDof,
}

impl JointKind {
    pub fn dof(&self) -> usize {
        match self {
            JointKind::Revolute | JointKind::Prismatic | JointKind::Helical { .. } => 1,
            JointKind::Cylindrical => 2,
            JointKind::Spherical | JointKind::Planar => 3,
            JointKind::SixDof => 6,
        }
    }
}

/// DH geometry and inertial parameters of one link.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkParams {
    pub dh_a: f64,
    pub dh_alpha: f64,
    pub dh_d: f64,
    pub dh_theta: f64,
    pub mass: f64,
    /// Center of mass offset, pure quaternion in the link frame (m).
    pub com_offset: Quaternion,
    /// Inertia tensor columns `(i_x, i_y, i_z)` in the CoM frame (kg·m²).
    pub inertia: [Quaternion; 3],
}

impl LinkParams {
    /// `𝓛₃(𝕀) ω`: applies the inertia tensor (columns `i_x, i_y, i_z`) to a
    /// pure quaternion.
    pub fn apply_inertia(&self, w: &Quaternion) -> Quaternion {
        self.inertia[0] * w.x + self.inertia[1] * w.y + self.inertia[2] * w.z
    }

    pub fn inertia_matrix(&self) -> [[f64; 3]; 3] {
        let c = &self.inertia;
        [
            [c[0].x, c[1].x, c[2].x],
            [c[0].y, c[1].y, c[2].y],
            [c[0].z, c[1].z, c[2].z],
        ]
    }

    fn validate(&self, ctx: &str) -> Result<(), ModelError> {
        let mass_ok = self.mass.is_finite() && self.mass > 0.0;
        if !mass_ok {
            return Err(ModelError::Validation(format!(
                "{ctx}: mass must be positive, got {}",
                self.mass
            )));
        }
        let m = self.inertia_matrix();
        let sym_defect = (m[0][1] - m[1][0])
            .abs()
            .max((m[0][2] - m[2][0]).abs())
            .max((m[1][2] - m[2][1]).abs());
        if sym_defect > 1e-9 {
            return Err(ModelError::Validation(format!(
                "{ctx}: inertia tensor is not symmetric (defect {sym_defect:.3e})"
            )));
        }
        // Sylvester's criterion on the leading principal minors.
        let m1 = m[0][0];
        let m2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let m3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        if m1 <= 0.0 || m2 <= 0.0 || m3 <= 0.0 {
            return Err(ModelError::Validation(format!(
                "{ctx}: inertia tensor is not positive definite"
            )));
        }
        Ok(())
    }
}

/// One joint/link pair of a modeled chain.
#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub joint: JointKind,
    pub params: LinkParams,
}

/// Where a subsystem attaches to its predecessor: the 1-based index of the
/// host link carrying the point (this index is the number of predecessor
/// joints preceding the point) plus the fixed pose from that link's frame to
/// the connection frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionPoint {
    pub host_link: usize,
    pub offset: Pose,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SubsystemKind {
    Modeled { links: Vec<Link> },
    BlackBox { dof_hint: Option<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subsystem {
    pub id: SubsystemId,
    pub kind: SubsystemKind,
    /// `None` for the root subsystem.
    pub parent: Option<SubsystemId>,
    /// Connection point on the predecessor; `None` for the root.
    pub base_connection: Option<ConnectionPoint>,
}

impl Subsystem {
    pub fn is_black_box(&self) -> bool {
        matches!(self.kind, SubsystemKind::BlackBox { .. })
    }

    pub fn links(&self) -> Option<&[Link]> {
        match &self.kind {
            SubsystemKind::Modeled { links } => Some(links),
            SubsystemKind::BlackBox { .. } => None,
        }
    }

    pub fn link_count(&self) -> usize {
        self.links().map_or(0, <[Link]>::len)
    }

    pub fn dof(&self) -> usize {
        self.links()
            .map_or(0, |l| l.iter().map(|l| l.joint.dof()).sum())
    }
}

/// The subsystem tree: predecessor/successor structure, connection points,
/// and the world gravity vector. Immutable after construction; all
/// invariants (single root, acyclic, reachable, valid host links, positive
/// masses, SPD inertias, unit offset poses) are checked by [`RobotTree::new`].
#[derive(Clone, Debug, PartialEq)]
pub struct RobotTree {
    subsystems: BTreeMap<SubsystemId, Subsystem>,
    children: BTreeMap<SubsystemId, Vec<SubsystemId>>,
    root: SubsystemId,
    /// Gravity as a pure quaternion in the root inertial frame (m/s²).
    pub gravity: Quaternion,
}

pub const DEFAULT_GRAVITY: [f64; 3] = [0.0, 0.0, -9.81];

impl RobotTree {
    pub fn new(subsystems: Vec<Subsystem>, gravity: [f64; 3]) -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        for s in subsystems {
            if s.parent.is_some() != s.base_connection.is_some() {
                return Err(ModelError::Validation(format!(
                    "subsystem {}: parent and base connection must be given together",
                    s.id
                )));
            }
            if let Some(p) = s.parent {
                if p == s.id {
                    return Err(ModelError::Validation(format!(
                        "subsystem {} is its own predecessor (cycle)",
                        s.id
                    )));
                }
            }
            if let SubsystemKind::Modeled { links } = &s.kind {
                if links.is_empty() {
                    return Err(ModelError::Validation(format!(
                        "subsystem {}: modeled subsystems need at least one link",
                        s.id
                    )));
                }
                for (k, link) in links.iter().enumerate() {
                    link.params
                        .validate(&format!("subsystem {} link {}", s.id, k + 1))?;
                }
            }
            if map.insert(s.id, s).is_some() {
                return Err(ModelError::Validation("duplicate subsystem id".into()));
            }
        }

        let mut roots = map.values().filter(|s| s.parent.is_none());
        let root = roots
            .next()
            .ok_or_else(|| ModelError::Validation("no root subsystem".into()))?
            .id;
        if let Some(extra) = roots.next() {
            return Err(ModelError::Validation(format!(
                "multiple roots: {} and {}",
                root, extra.id
            )));
        }

        let mut children: BTreeMap<SubsystemId, Vec<SubsystemId>> =
            map.keys().map(|&id| (id, Vec::new())).collect();
        for s in map.values() {
            let Some(p) = s.parent else { continue };
            let conn = s.base_connection.as_ref().unwrap();
            let parent = map.get(&p).ok_or_else(|| {
                ModelError::Validation(format!(
                    "subsystem {} has dangling predecessor {}",
                    s.id, p
                ))
            })?;
            if let SubsystemKind::Modeled { links } = &parent.kind {
                if conn.host_link == 0 || conn.host_link > links.len() {
                    return Err(ModelError::Validation(format!(
                        "subsystem {}: host link {} out of range 1..={} on subsystem {}",
                        s.id,
                        conn.host_link,
                        links.len(),
                        p
                    )));
                }
            }
            children.get_mut(&p).unwrap().push(s.id);
        }
        // Ascending child order makes traversal (and every output derived
        // from it) deterministic.
        for c in children.values_mut() {
            c.sort_unstable();
        }

        let tree = Self {
            subsystems: map,
            children,
            root,
            gravity: Quaternion::pure(gravity[0], gravity[1], gravity[2]),
        };
        let reached = tree.bfs_order();
        if reached.len() != tree.subsystems.len() {
            return Err(ModelError::Validation(
                "tree has unreachable subsystems (cycle or disconnected)".into(),
            ));
        }
        Ok(tree)
    }

    pub fn root(&self) -> SubsystemId {
        self.root
    }

    pub fn ids(&self) -> impl Iterator<Item = SubsystemId> + '_ {
        self.subsystems.keys().copied()
    }

    pub fn subsystem(&self, id: SubsystemId) -> Option<&Subsystem> {
        self.subsystems.get(&id)
    }

    pub fn parent_of(&self, id: SubsystemId) -> Option<SubsystemId> {
        self.subsystems.get(&id).and_then(|s| s.parent)
    }

    pub fn children_of(&self, id: SubsystemId) -> &[SubsystemId] {
        self.children.get(&id).map_or(&[], Vec::as_slice)
    }

    pub fn is_leaf(&self, id: SubsystemId) -> bool {
        self.children_of(id).is_empty()
    }

    pub fn leaves(&self) -> Vec<SubsystemId> {
        self.ids().filter(|&id| self.is_leaf(id)).collect()
    }

    pub fn subsystem_count(&self) -> usize {
        self.subsystems.len()
    }

    /// Total number of links over modeled subsystems.
    pub fn total_links(&self) -> usize {
        self.subsystems.values().map(Subsystem::link_count).sum()
    }

    /// Breadth-first order from the root, successors in ascending id order.
    pub fn bfs_order(&self) -> Vec<SubsystemId> {
        let mut order = Vec::with_capacity(self.subsystems.len());
        let mut queue = std::collections::VecDeque::from([self.root]);
        let mut visited = std::collections::BTreeSet::from([self.root]);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            for &j in self.children_of(i) {
                if visited.insert(j) {
                    queue.push_back(j);
                }
            }
        }
        order
    }

    /// Returns a copy of the tree with one subsystem replaced by a black box
    /// (its link data dropped, DoF kept as a hint).
    pub fn with_black_box(&self, id: SubsystemId) -> Result<Self, ModelError> {
        let mut subsystems: Vec<Subsystem> = self.subsystems.values().cloned().collect();
        let s = subsystems
            .iter_mut()
            .find(|s| s.id == id)
            .ok_or_else(|| ModelError::Validation(format!("no subsystem {id}")))?;
        let hint = match &s.kind {
            SubsystemKind::Modeled { .. } => Some(s.dof()),
            SubsystemKind::BlackBox { dof_hint } => *dof_hint,
        };
        s.kind = SubsystemKind::BlackBox { dof_hint: hint };
        Self::new(subsystems, [self.gravity.x, self.gravity.y, self.gravity.z])
    }
}

// ---------------------------------------------------------------------------
// Frame kinematics
// ---------------------------------------------------------------------------

/// Standard (distal) DH transform `RotZ(θ)·TransZ(d)·TransX(a)·RotX(α)`.
pub fn dh_pose(theta: f64, d: f64, a: f64, alpha: f64) -> Pose {
    Pose::from_rotation_z(theta)
        * Pose::from_translation(0.0, 0.0, d)
        * Pose::from_translation(a, 0.0, 0.0)
        * Pose::from_rotation_x(alpha)
}

/// Pose of link frame `i` relative to frame `i−1` at joint configuration `q`.
pub fn link_pose(kind: &JointKind, params: &LinkParams, q: &[f64]) -> Result<Pose, ModelError> {
    if q.len() != kind.dof() {
        return Err(ModelError::DimensionMismatch {
            expected: kind.dof(),
            got: q.len(),
        });
    }
    let p = params;
    Ok(match kind {
        JointKind::Revolute => dh_pose(p.dh_theta + q[0], p.dh_d, p.dh_a, p.dh_alpha),
        JointKind::Prismatic => dh_pose(p.dh_theta, p.dh_d + q[0], p.dh_a, p.dh_alpha),
        JointKind::Helical { pitch } => {
            dh_pose(p.dh_theta + q[0], p.dh_d + pitch * q[0], p.dh_a, p.dh_alpha)
        }
        JointKind::Spherical => {
            let rot = Pose::from_rotation_translation(
                Quaternion::from_rotation_vector([q[0], q[1], q[2]]),
                Quaternion::ZERO,
            );
            rot * dh_pose(0.0, p.dh_d, p.dh_a, p.dh_alpha)
        }
        JointKind::Planar => {
            Pose::from_translation(q[0], q[1], 0.0)
                * Pose::from_rotation_z(q[2])
                * dh_pose(0.0, p.dh_d, p.dh_a, p.dh_alpha)
        }
        JointKind::Cylindrical => dh_pose(q[0], q[1], p.dh_a, p.dh_alpha),
        JointKind::SixDof => {
            Pose::from_translation(q[0], q[1], q[2])
                * Pose::from_rotation_translation(
                    Quaternion::from_rotation_vector([q[3], q[4], q[5]]),
                    Quaternion::ZERO,
                )
                * dh_pose(0.0, 0.0, p.dh_a, p.dh_alpha)
        }
    })
}

/// Pose of the CoM frame: the link frame translated by the CoM offset,
/// orientation unchanged.
pub fn com_pose(link_frame: &Pose, params: &LinkParams) -> Pose {
    *link_frame
        * Pose::from_rotation_translation(Quaternion::ONE, params.com_offset)
}

// ---------------------------------------------------------------------------
// Description file (TOML)
// ---------------------------------------------------------------------------

/// Controller scenario from the optional `[control]` section.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlScenario {
    pub kp: f64,
    pub kv: f64,
    pub dt: f64,
    pub duration: f64,
    pub targets: Vec<ScenarioTarget>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioTarget {
    pub leaf: SubsystemId,
    pub pose: Pose,
    pub twist: DualQuaternion,
    pub twist_derivative: DualQuaternion,
}

/// A parsed robot description: the subsystem tree plus the optional
/// controller scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotDescription {
    pub tree: RobotTree,
    pub control: Option<ControlScenario>,
}

#[derive(Serialize, Deserialize)]
struct FileRoot {
    #[serde(skip_serializing_if = "Option::is_none")]
    world: Option<FileWorld>,
    subsystem: BTreeMap<String, FileSubsystem>,
    tree: FileTree,
    #[serde(skip_serializing_if = "Option::is_none")]
    control: Option<FileControl>,
}

#[derive(Serialize, Deserialize)]
struct FileWorld {
    gravity: [f64; 3],
}

#[derive(Serialize, Deserialize)]
struct FileSubsystem {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    links: Option<Vec<FileLink>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dof_hint: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct FileLink {
    joint: String,
    #[serde(default)]
    a: f64,
    #[serde(default)]
    alpha: f64,
    #[serde(default)]
    d: f64,
    #[serde(default)]
    theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pitch: Option<f64>,
    mass: f64,
    com: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    inertia_diag: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inertia_full: Option<[[f64; 3]; 3]>,
}

#[derive(Serialize, Deserialize)]
struct FileTree {
    root: SubsystemId,
    #[serde(default)]
    edges: Vec<FileEdge>,
}

#[derive(Serialize, Deserialize)]
struct FileEdge {
    parent: SubsystemId,
    child: SubsystemId,
    host_link: usize,
    offset_pose: [f64; 8],
}

#[derive(Serialize, Deserialize)]
struct FileControl {
    kp: f64,
    kv: f64,
    dt: f64,
    duration: f64,
    targets: Vec<FileTarget>,
}

#[derive(Serialize, Deserialize)]
struct FileTarget {
    leaf: SubsystemId,
    pose: [f64; 8],
    #[serde(skip_serializing_if = "Option::is_none")]
    twist: Option<[f64; 6]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    twist_derivative: Option<[f64; 6]>,
}

fn parse_joint(link: &FileLink, ctx: &str) -> Result<JointKind, ModelError> {
    Ok(match link.joint.as_str() {
        "revolute" => JointKind::Revolute,
        "prismatic" => JointKind::Prismatic,
        "spherical" => JointKind::Spherical,
        "planar" => JointKind::Planar,
        "cylindrical" => JointKind::Cylindrical,
        "helical" => JointKind::Helical {
            pitch: link.pitch.ok_or_else(|| {
                ModelError::Parse(format!("{ctx}: helical joint requires a pitch"))
            })?,
        },
        "six_dof" => JointKind::SixDof,
        other => {
            return Err(ModelError::Parse(format!(
                "{ctx}: unknown joint kind {other:?}"
            )))
        }
    })
}

fn parse_link(link: &FileLink, ctx: &str) -> Result<Link, ModelError> {
    let joint = parse_joint(link, ctx)?;
    let inertia = match (&link.inertia_diag, &link.inertia_full) {
        (Some(d), None) => [
            Quaternion::pure(d[0], 0.0, 0.0),
            Quaternion::pure(0.0, d[1], 0.0),
            Quaternion::pure(0.0, 0.0, d[2]),
        ],
        (None, Some(cols)) => [
            Quaternion::pure(cols[0][0], cols[0][1], cols[0][2]),
            Quaternion::pure(cols[1][0], cols[1][1], cols[1][2]),
            Quaternion::pure(cols[2][0], cols[2][1], cols[2][2]),
        ],
        _ => {
            return Err(ModelError::Parse(format!(
                "{ctx}: exactly one of inertia_diag / inertia_full is required"
            )))
        }
    };
    Ok(Link {
        joint,
        params: LinkParams {
            dh_a: link.a,
            dh_alpha: link.alpha,
            dh_d: link.d,
            dh_theta: link.theta,
            mass: link.mass,
            com_offset: Quaternion::pure(link.com[0], link.com[1], link.com[2]),
            inertia,
        },
    })
}

/// Parses and fully validates a robot description file.
pub fn parse_robot_description(text: &str) -> Result<RobotDescription, ModelError> {
    let file: FileRoot = toml::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;

    let mut edge_of: BTreeMap<SubsystemId, &FileEdge> = BTreeMap::new();
    for e in &file.tree.edges {
        if edge_of.insert(e.child, e).is_some() {
            return Err(ModelError::Validation(format!(
                "subsystem {} has more than one predecessor",
                e.child
            )));
        }
    }

    let mut subsystems = Vec::new();
    for (key, sub) in &file.subsystem {
        let id: SubsystemId = key
            .parse()
            .map_err(|_| ModelError::Parse(format!("subsystem id {key:?} is not an integer")))?;
        let ctx = format!("subsystem {id}");
        let kind = match sub.kind.as_str() {
            "modeled" => {
                let links = sub
                    .links
                    .as_ref()
                    .ok_or_else(|| ModelError::Parse(format!("{ctx}: modeled without links")))?;
                let links = links
                    .iter()
                    .enumerate()
                    .map(|(k, l)| parse_link(l, &format!("{ctx} link {}", k + 1)))
                    .collect::<Result<Vec<_>, _>>()?;
                SubsystemKind::Modeled { links }
            }
            "blackbox" => SubsystemKind::BlackBox {
                dof_hint: sub.dof_hint,
            },
            other => {
                return Err(ModelError::Parse(format!(
                    "{ctx}: unknown kind {other:?}"
                )))
            }
        };
        let (parent, base_connection) = match edge_of.get(&id) {
            Some(e) => {
                let offset = Pose::from_coeffs(e.offset_pose).map_err(|err| {
                    ModelError::Validation(format!("{ctx}: offset pose is not unit ({err})"))
                })?;
                (
                    Some(e.parent),
                    Some(ConnectionPoint {
                        host_link: e.host_link,
                        offset,
                    }),
                )
            }
            None => (None, None),
        };
        if parent.is_none() && id != file.tree.root {
            return Err(ModelError::Validation(format!(
                "{ctx}: not the declared root {} and has no incoming edge",
                file.tree.root
            )));
        }
        subsystems.push(Subsystem {
            id,
            kind,
            parent,
            base_connection,
        });
    }
    for e in &file.tree.edges {
        for id in [e.parent, e.child] {
            if !file.subsystem.contains_key(&id.to_string()) {
                return Err(ModelError::Validation(format!(
                    "edge references unknown subsystem {id}"
                )));
            }
        }
    }
    if !file.subsystem.contains_key(&file.tree.root.to_string()) {
        return Err(ModelError::Validation(format!(
            "declared root {} does not exist",
            file.tree.root
        )));
    }

    let gravity = file.world.as_ref().map_or(DEFAULT_GRAVITY, |w| w.gravity);
    let tree = RobotTree::new(subsystems, gravity)?;

    let control = match &file.control {
        None => None,
        Some(c) => {
            if !(c.dt > 0.0 && c.duration > 0.0) {
                return Err(ModelError::Validation(
                    "control: dt and duration must be positive".into(),
                ));
            }
            if !(c.kp > 0.0 && c.kv > 0.0) {
                return Err(ModelError::Validation(
                    "control: gains must be positive".into(),
                ));
            }
            let mut targets = Vec::new();
            for t in &c.targets {
                if !tree.is_leaf(t.leaf) || tree.subsystem(t.leaf).is_none() {
                    return Err(ModelError::Validation(format!(
                        "control target {} is not a leaf subsystem",
                        t.leaf
                    )));
                }
                targets.push(ScenarioTarget {
                    leaf: t.leaf,
                    pose: Pose::from_coeffs(t.pose).map_err(|err| {
                        ModelError::Validation(format!(
                            "control target {}: pose is not unit ({err})",
                            t.leaf
                        ))
                    })?,
                    twist: t.twist.map_or(DualQuaternion::ZERO, DualQuaternion::from_vec6),
                    twist_derivative: t
                        .twist_derivative
                        .map_or(DualQuaternion::ZERO, DualQuaternion::from_vec6),
                });
            }
            Some(ControlScenario {
                kp: c.kp,
                kv: c.kv,
                dt: c.dt,
                duration: c.duration,
                targets,
            })
        }
    };

    Ok(RobotDescription { tree, control })
}

/// Serializes a description back to the file format; parsing the result
/// reproduces the description field by field.
pub fn serialize_robot_description(desc: &RobotDescription) -> String {
    let tree = &desc.tree;
    let mut subsystem = BTreeMap::new();
    let mut edges = Vec::new();
    for id in tree.ids() {
        let s = tree.subsystem(id).unwrap();
        let (kind, links, dof_hint) = match &s.kind {
            SubsystemKind::Modeled { links } => (
                "modeled".to_string(),
                Some(
                    links
                        .iter()
                        .map(|l| {
                            let (joint, pitch) = match l.joint {
                                JointKind::Revolute => ("revolute", None),
                                JointKind::Prismatic => ("prismatic", None),
                                JointKind::Spherical => ("spherical", None),
                                JointKind::Planar => ("planar", None),
                                JointKind::Cylindrical => ("cylindrical", None),
                                JointKind::Helical { pitch } => ("helical", Some(pitch)),
                                JointKind::SixDof => ("six_dof", None),
                            };
                            let m = l.params.inertia_matrix();
                            let diag = m[0][1] == 0.0
                                && m[0][2] == 0.0
                                && m[1][0] == 0.0
                                && m[1][2] == 0.0
                                && m[2][0] == 0.0
                                && m[2][1] == 0.0;
                            FileLink {
                                joint: joint.to_string(),
                                a: l.params.dh_a,
                                alpha: l.params.dh_alpha,
                                d: l.params.dh_d,
                                theta: l.params.dh_theta,
                                pitch,
                                mass: l.params.mass,
                                com: [
                                    l.params.com_offset.x,
                                    l.params.com_offset.y,
                                    l.params.com_offset.z,
                                ],
                                inertia_diag: diag.then(|| [m[0][0], m[1][1], m[2][2]]),
                                inertia_full: (!diag).then(|| {
                                    [
                                        [l.params.inertia[0].x, l.params.inertia[0].y, l.params.inertia[0].z],
                                        [l.params.inertia[1].x, l.params.inertia[1].y, l.params.inertia[1].z],
                                        [l.params.inertia[2].x, l.params.inertia[2].y, l.params.inertia[2].z],
                                    ]
                                }),
                            }
                        })
                        .collect(),
                ),
                None,
            ),
            SubsystemKind::BlackBox { dof_hint } => ("blackbox".to_string(), None, *dof_hint),
        };
        subsystem.insert(
            id.to_string(),
            FileSubsystem {
                kind,
                links,
                dof_hint,
            },
        );
        if let (Some(p), Some(conn)) = (s.parent, &s.base_connection) {
            edges.push(FileEdge {
                parent: p,
                child: id,
                host_link: conn.host_link,
                offset_pose: conn.offset.coeffs(),
            });
        }
    }
    let control = desc.control.as_ref().map(|c| FileControl {
        kp: c.kp,
        kv: c.kv,
        dt: c.dt,
        duration: c.duration,
        targets: c
            .targets
            .iter()
            .map(|t| FileTarget {
                leaf: t.leaf,
                pose: t.pose.coeffs(),
                twist: (t.twist != DualQuaternion::ZERO).then(|| t.twist.vec6().unwrap()),
                twist_derivative: (t.twist_derivative != DualQuaternion::ZERO)
                    .then(|| t.twist_derivative.vec6().unwrap()),
            })
            .collect(),
    });
    let file = FileRoot {
        world: Some(FileWorld {
            gravity: [tree.gravity.x, tree.gravity.y, tree.gravity.z],
        }),
        subsystem,
        tree: FileTree {
            root: tree.root(),
            edges,
        },
        control,
    };
    toml::to_string(&file).expect("description serialization cannot fail")
}
