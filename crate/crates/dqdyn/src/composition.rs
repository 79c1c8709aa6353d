//! Modular composition of subsystem dynamics over the robot tree.
//!
//! The forward pass walks the tree breadth-first, computing each modeled
//! subsystem's own CoM twists plus the twists induced by its predecessor
//! through the connection point. The backward pass accumulates joint
//! wrenches from the leaves toward the root, transporting each subsystem's
//! base reaction onto the predecessor joints that precede the connection
//! point. Black-box subsystems take part through [`SensorSource`] readings
//! at their connection points instead of joint states.
//!
//! Alongside the total wrenches, the backward pass records every evaluated
//! block of the wrench interconnection matrix; summing its rows reproduces
//! the composed result addition-for-addition.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dq::{DualQuaternion, Pose, Quaternion, Twist, Wrench, PURITY_TOL};
use crate::model::{RobotTree, SubsystemId};
use crate::serial::{ChainDynamics, ChainState, DynamicsError, TwistState};

#[derive(Debug, Error)]
pub enum CompositionError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("no sensor reading for black box {black_box}, connection {connection}")]
    MissingSensor {
        black_box: SubsystemId,
        connection: SubsystemId,
    },
    #[error("sensor reading for black box {black_box}, connection {connection} is not pure")]
    ImpureReading {
        black_box: SubsystemId,
        connection: SubsystemId,
    },
    #[error("no joint state for modeled subsystem {0}")]
    MissingState(SubsystemId),
    #[error("external wrench on subsystem {0}, which is not a leaf")]
    NotALeaf(SubsystemId),
    #[error("sensor replay: {0}")]
    Replay(String),
}

/// Joint states of the modeled subsystems (the sets Q, Q̇, Q̈).
pub type SubsystemStates = BTreeMap<SubsystemId, ChainState>;

/// External wrenches at leaf-subsystem end effectors, expressed in the
/// leaf's last link frame.
pub type ExternalWrenches = BTreeMap<SubsystemId, Wrench>;

// ---------------------------------------------------------------------------
// Sensor interface
// ---------------------------------------------------------------------------

/// Everything a black-box boundary exposes: the twist and twist derivative
/// at the connection (consumed by the successor), the wrench transmitted
/// through the connection (consumed by the predecessor), and the world pose
/// of the connection frame (needed to express gravity below the black box).
/// All screws are expressed in the connection frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionReading {
    pub twist: Twist,
    pub twist_derivative: Twist,
    pub wrench: Wrench,
    pub frame: Pose,
}

/// Callback contract answering for every black-box boundary the tree
/// declares. `connection` identifies the edge by the id of the child
/// subsystem attached at that connection point; readings about the black
/// box's own base connection use `connection == black_box`.
pub trait SensorSource {
    fn read(
        &self,
        black_box: SubsystemId,
        connection: SubsystemId,
    ) -> Result<ConnectionReading, CompositionError>;
}

/// Sensor source for fully modeled trees; any read is an error.
pub struct NoSensors;

impl SensorSource for NoSensors {
    fn read(
        &self,
        black_box: SubsystemId,
        connection: SubsystemId,
    ) -> Result<ConnectionReading, CompositionError> {
        Err(CompositionError::MissingSensor {
            black_box,
            connection,
        })
    }
}

/// In-memory sensor source keyed by `(black_box, connection)`.
#[derive(Default)]
pub struct MapSensors {
    readings: BTreeMap<(SubsystemId, SubsystemId), ConnectionReading>,
}

impl MapSensors {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        black_box: SubsystemId,
        connection: SubsystemId,
        reading: ConnectionReading,
    ) {
        self.readings.insert((black_box, connection), reading);
    }
}

impl SensorSource for MapSensors {
    fn read(
        &self,
        black_box: SubsystemId,
        connection: SubsystemId,
    ) -> Result<ConnectionReading, CompositionError> {
        self.readings
            .get(&(black_box, connection))
            .cloned()
            .ok_or(CompositionError::MissingSensor {
                black_box,
                connection,
            })
    }
}

// ---------------------------------------------------------------------------
// Connection propagation (the algebra-level operations)
// ---------------------------------------------------------------------------

/// Propagates the connection twist and its derivative to each CoM of the
/// successor subsystem. `conn_to_coms[k]` is the pose of the connection
/// frame expressed in CoM frame `k`; `local` holds the subsystem's
/// own-motion twists, whose negation is the relative twist entering the
/// derivative's cross term.
pub fn propagate_connection_twist(
    conn_to_coms: &[Pose],
    twist: &Twist,
    twist_derivative: &Twist,
    local: &TwistState,
) -> Result<TwistState, CompositionError> {
    if conn_to_coms.len() != local.len() {
        return Err(CompositionError::Dynamics(
            DynamicsError::DimensionMismatch {
                expected: conn_to_coms.len(),
                got: local.len(),
            },
        ));
    }
    let mut out = TwistState {
        twists: Vec::with_capacity(conn_to_coms.len()),
        derivatives: Vec::with_capacity(conn_to_coms.len()),
    };
    for (k, x) in conn_to_coms.iter().enumerate() {
        let transported = x.adjoint(twist);
        let relative = -local.twists[k];
        out.derivatives
            .push(x.adjoint(twist_derivative) + relative.cross(&transported));
        out.twists.push(transported);
    }
    Ok(out)
}

/// Propagates a connection-point wrench onto the `η` predecessor joints
/// preceding the point. `conn_to_joints[k]` is the pose of the connection
/// frame expressed in joint frame `k` (frames `0..η-1`); the remaining
/// `n − η` entries of the result are exact zeros.
pub fn propagate_connection_wrench(
    conn_to_joints: &[Pose],
    wrench: &Wrench,
    n: usize,
) -> Vec<Wrench> {
    let mut out = Vec::with_capacity(n);
    for x in conn_to_joints {
        out.push(x.adjoint(wrench));
    }
    out.resize(n, DualQuaternion::ZERO);
    out
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

/// Per-subsystem results of the forward pass.
#[derive(Clone, Debug)]
pub struct SubsystemForward {
    /// Own-motion twists at the CoMs (zero base seed).
    pub local: TwistState,
    /// Connection-induced twists at the CoMs (zeros for the root).
    pub propagated: TwistState,
    /// Total twists: the chain recursion seeded with the connection twist.
    pub total: TwistState,
    /// Poses of the connection frame expressed in each CoM frame.
    pub conn_to_coms: Vec<Pose>,
    /// World pose of the subsystem base (= its connection frame).
    pub base_world: Pose,
    /// Connection twist and derivative seeding the chain.
    pub seed_twist: Twist,
    pub seed_derivative: Twist,
}

/// Output of [`dmc_forward_recursion`]; owns per-subsystem chain contexts
/// borrowed from the tree.
pub struct ForwardPass<'a> {
    chains: BTreeMap<SubsystemId, ChainDynamics<'a>>,
    pub per: BTreeMap<SubsystemId, SubsystemForward>,
    order: Vec<SubsystemId>,
}

impl ForwardPass<'_> {
    pub fn order(&self) -> &[SubsystemId] {
        &self.order
    }

    /// World pose of a modeled subsystem's last link frame (its end
    /// effector).
    pub fn end_effector_world(&self, id: SubsystemId) -> Option<Pose> {
        let per = self.per.get(&id)?;
        let last = self.chains.get(&id)?.frames().link_in_base.last()?;
        Some(per.base_world * *last)
    }
}

fn rotate_into(frame: &Pose, v: &Quaternion) -> Quaternion {
    let r = frame.rotation();
    r.conj().rotate(v)
}

/// Breadth-first forward propagation of twists and twist derivatives to the
/// CoMs of all modeled subsystems. Connection twists come from the
/// predecessor's computed state, or from `sensors` when the predecessor is
/// a black box.
pub fn dmc_forward_recursion<'a>(
    tree: &'a RobotTree,
    states: &SubsystemStates,
    sensors: &dyn SensorSource,
) -> Result<ForwardPass<'a>, CompositionError> {
    let order = tree.bfs_order();
    let mut chains = BTreeMap::new();
    let mut per: BTreeMap<SubsystemId, SubsystemForward> = BTreeMap::new();
    // Seeds pending for subsystems not yet dequeued, produced while
    // processing their predecessor.
    let mut pending: BTreeMap<SubsystemId, (Twist, Twist, Pose)> = BTreeMap::new();
    pending.insert(
        tree.root(),
        (DualQuaternion::ZERO, DualQuaternion::ZERO, Pose::identity()),
    );

    for &i in &order {
        let sub = tree.subsystem(i).unwrap();
        if let Some(links) = sub.links() {
            let state = states
                .get(&i)
                .ok_or(CompositionError::MissingState(i))?;
            let (seed_twist, seed_derivative, base_world) = pending
                .remove(&i)
                .expect("BFS processes parents before children");
            let gravity_base = rotate_into(&base_world, &tree.gravity);
            let chain = ChainDynamics::new(links, &state.q, gravity_base)?;
            let local = chain.forward_recursion(state)?;
            let total = chain.forward_recursion_seeded(state, &seed_twist, &seed_derivative)?;
            let conn_to_coms: Vec<Pose> = chain
                .frames()
                .com_in_base
                .iter()
                .map(Pose::conj)
                .collect();
            let propagated = if tree.parent_of(i).is_some() {
                propagate_connection_twist(&conn_to_coms, &seed_twist, &seed_derivative, &local)?
            } else {
                TwistState::zero(links.len())
            };
            per.insert(
                i,
                SubsystemForward {
                    local,
                    propagated,
                    total,
                    conn_to_coms,
                    base_world,
                    seed_twist,
                    seed_derivative,
                },
            );
            chains.insert(i, chain);
        }

        for &j in tree.children_of(i) {
            let child = tree.subsystem(j).unwrap();
            if child.is_black_box() {
                continue;
            }
            let seed = if sub.is_black_box() {
                let reading = sensors.read(i, j)?;
                for s in [&reading.twist, &reading.twist_derivative] {
                    if !s.is_pure(PURITY_TOL) {
                        return Err(CompositionError::ImpureReading {
                            black_box: i,
                            connection: j,
                        });
                    }
                }
                (reading.twist, reading.twist_derivative, reading.frame)
            } else {
                let conn = child.base_connection.as_ref().unwrap();
                let fwd = &per[&i];
                let frames = chains[&i].frames();
                let host = conn.host_link - 1;
                // Pose of the host CoM in the connection frame: rigid on the
                // same link, so the transport needs no cross term.
                let com_in_conn = conn.offset.conj() * frames.com_in_link[host];
                let twist = com_in_conn.adjoint(&fwd.total.twists[host]);
                let derivative = com_in_conn.adjoint(&fwd.total.derivatives[host]);
                let base_world =
                    (fwd.base_world * frames.link_in_base[host] * conn.offset).renormalized();
                (twist, derivative, base_world)
            };
            pending.insert(j, seed);
        }
    }

    Ok(ForwardPass {
        chains,
        per,
        order,
    })
}

// ---------------------------------------------------------------------------
// Interconnection matrix
// ---------------------------------------------------------------------------

/// The wrench interconnection matrix: block `(i, i)` holds subsystem `i`'s
/// own wrench evaluation, block `(i, j)` for a successor `j` holds the
/// wrench vector `j` imposes on `i`; everything else is zero. Black boxes
/// contribute columns (their transmitted wrench) but no rows.
#[derive(Clone, Debug)]
pub struct InterconnectionMatrix {
    ids: Vec<SubsystemId>,
    row_len: BTreeMap<SubsystemId, usize>,
    blocks: BTreeMap<(SubsystemId, SubsystemId), Vec<Wrench>>,
    /// Column order reproducing the backward pass's accumulation sequence
    /// (successors in reverse traversal order, own evaluation last).
    row_order: BTreeMap<SubsystemId, Vec<SubsystemId>>,
}

impl InterconnectionMatrix {
    /// Places recorded per-subsystem wrench evaluations (diagonal) and
    /// per-connection couplings (off-diagonal) into the block structure.
    pub fn assemble(
        tree: &RobotTree,
        w_evals: &BTreeMap<SubsystemId, Vec<Wrench>>,
        couplings: &BTreeMap<(SubsystemId, SubsystemId), Vec<Wrench>>,
    ) -> Self {
        let ids: Vec<SubsystemId> = tree.ids().collect();
        let mut blocks = BTreeMap::new();
        let mut row_len = BTreeMap::new();
        let mut row_order: BTreeMap<SubsystemId, Vec<SubsystemId>> = BTreeMap::new();
        for &i in &ids {
            if let Some(w) = w_evals.get(&i) {
                row_len.insert(i, w.len());
                blocks.insert((i, i), w.clone());
            }
        }
        for (&(p, j), g) in couplings {
            blocks.insert((p, j), g.clone());
        }
        for &j in tree.bfs_order().iter().rev() {
            if let Some(p) = tree.parent_of(j) {
                if couplings.contains_key(&(p, j)) {
                    row_order.entry(p).or_default().push(j);
                }
            }
        }
        for &i in &ids {
            if w_evals.contains_key(&i) {
                row_order.entry(i).or_default().push(i);
            }
        }
        Self {
            ids,
            row_len,
            blocks,
            row_order,
        }
    }

    pub fn ids(&self) -> &[SubsystemId] {
        &self.ids
    }

    pub fn block(&self, i: SubsystemId, j: SubsystemId) -> Option<&[Wrench]> {
        self.blocks.get(&(i, j)).map(Vec::as_slice)
    }

    /// Structurally nonzero blocks (diagonal evaluations and successor
    /// couplings).
    pub fn nonzero_pattern(&self) -> Vec<(SubsystemId, SubsystemId)> {
        self.blocks.keys().copied().collect()
    }

    /// `Γ_total = A·1̲`: per-row block sums, added in the same order the
    /// backward pass used, so the result reproduces it exactly.
    pub fn total_wrenches(&self) -> BTreeMap<SubsystemId, Vec<Wrench>> {
        let mut out = BTreeMap::new();
        for (&i, &n) in &self.row_len {
            let mut sum = vec![DualQuaternion::ZERO; n];
            for j in self.row_order.get(&i).map_or(&[][..], Vec::as_slice) {
                let block = &self.blocks[&(i, *j)];
                for (acc, w) in sum.iter_mut().zip(block) {
                    *acc = *acc + *w;
                }
            }
            out.insert(i, sum);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Backward pass and the composed algorithm
// ---------------------------------------------------------------------------

/// Result of the composed inverse dynamics.
pub struct CompositionResult {
    /// Traversal order used (breadth-first from the root).
    pub order: Vec<SubsystemId>,
    /// Total joint wrenches per modeled subsystem.
    pub gamma: BTreeMap<SubsystemId, Vec<Wrench>>,
    /// Concatenation of the per-subsystem wrenches in ascending subsystem
    /// id order.
    pub gamma_total: Vec<Wrench>,
    pub matrix: InterconnectionMatrix,
    /// Forward-pass data (total/own/propagated twists, connection frames).
    pub forward: BTreeMap<SubsystemId, SubsystemForward>,
}

impl CompositionResult {
    /// Assembles the reading a sensor at `child`'s base connection would
    /// report in this state: the connection twist pair, the wrench the
    /// child transmits through its base joint, and the connection frame
    /// world pose. This is what replaces the child's subtree knowledge when
    /// a neighbor is black-boxed.
    pub fn connection_reading(&self, child: SubsystemId) -> Option<ConnectionReading> {
        let fwd = self.forward.get(&child)?;
        let wrench = self.gamma.get(&child)?.first().copied()?;
        Some(ConnectionReading {
            twist: fwd.seed_twist,
            twist_derivative: fwd.seed_derivative,
            wrench,
            frame: fwd.base_world,
        })
    }
}

/// Backward accumulation of the total joint wrenches over the subsystem
/// graph, recording the interconnection-matrix blocks as it goes.
/// `external` holds optional wrenches at leaf end effectors.
pub fn n_backward(
    tree: &RobotTree,
    fwd: ForwardPass<'_>,
    sensors: &dyn SensorSource,
    external: &ExternalWrenches,
) -> Result<CompositionResult, CompositionError> {
    for (&leaf, wrench) in external {
        if !tree.is_leaf(leaf) {
            return Err(CompositionError::NotALeaf(leaf));
        }
        if !wrench.is_pure(PURITY_TOL) {
            return Err(CompositionError::Dynamics(DynamicsError::SeedNotPure {
                primary: wrench.primary.w,
                dual: wrench.dual.w,
            }));
        }
    }

    let mut gamma: BTreeMap<SubsystemId, Vec<Wrench>> = fwd
        .per
        .keys()
        .map(|&i| (i, vec![DualQuaternion::ZERO; fwd.per[&i].local.len()]))
        .collect();
    let mut w_evals: BTreeMap<SubsystemId, Vec<Wrench>> = BTreeMap::new();
    let mut couplings: BTreeMap<(SubsystemId, SubsystemId), Vec<Wrench>> = BTreeMap::new();

    for &i in fwd.order.iter().rev() {
        let sub = tree.subsystem(i).unwrap();

        if !sub.is_black_box() {
            let tip = external.get(&i).copied().unwrap_or(DualQuaternion::ZERO);
            let w = fwd.chains[&i].wrench_function(&fwd.per[&i].total, &tip)?;
            let acc = gamma.get_mut(&i).unwrap();
            for (a, b) in acc.iter_mut().zip(&w) {
                *a = *a + *b;
            }
            w_evals.insert(i, w);
        }

        let Some(p) = tree.parent_of(i) else { continue };
        let parent = tree.subsystem(p).unwrap();
        if parent.is_black_box() {
            continue;
        }

        let conn = sub.base_connection.as_ref().unwrap();
        let zeta = if sub.is_black_box() {
            let reading = sensors.read(i, i)?;
            if !reading.wrench.is_pure(PURITY_TOL) {
                return Err(CompositionError::ImpureReading {
                    black_box: i,
                    connection: i,
                });
            }
            reading.wrench
        } else {
            // The wrench the subsystem transmits through its base joint,
            // already expressed in the connection frame (= its frame 0).
            gamma[&i][0]
        };

        let frames = fwd.chains[&p].frames();
        let eta = conn.host_link;
        // Poses of the connection frame in the parent joint frames 0..η−1.
        let conn_in_parent_base = frames.link_in_base[eta - 1] * conn.offset;
        let mut conn_to_joints = Vec::with_capacity(eta);
        conn_to_joints.push(conn_in_parent_base);
        for k in 1..eta {
            conn_to_joints.push(frames.link_in_base[k - 1].conj() * conn_in_parent_base);
        }
        let coupling =
            propagate_connection_wrench(&conn_to_joints, &zeta, parent.link_count());

        let acc = gamma.get_mut(&p).unwrap();
        for (a, b) in acc.iter_mut().zip(&coupling) {
            *a = *a + *b;
        }
        couplings.insert((p, i), coupling);
    }

    let matrix = InterconnectionMatrix::assemble(tree, &w_evals, &couplings);
    let gamma_total = gamma.values().flatten().copied().collect();
    Ok(CompositionResult {
        order: fwd.order,
        gamma,
        gamma_total,
        matrix,
        forward: fwd.per,
    })
}

/// The composed inverse dynamics: forward twist propagation, backward
/// wrench accumulation, and interconnection-matrix assembly.
pub fn dmc(
    tree: &RobotTree,
    states: &SubsystemStates,
    sensors: &dyn SensorSource,
) -> Result<CompositionResult, CompositionError> {
    let fwd = dmc_forward_recursion(tree, states, sensors)?;
    n_backward(tree, fwd, sensors, &ExternalWrenches::new())
}

/// Like [`dmc`] but with external wrenches injected at leaf end effectors.
pub fn dmc_with_external(
    tree: &RobotTree,
    states: &SubsystemStates,
    sensors: &dyn SensorSource,
    external: &ExternalWrenches,
) -> Result<CompositionResult, CompositionError> {
    let fwd = dmc_forward_recursion(tree, states, sensors)?;
    n_backward(tree, fwd, sensors, external)
}

// ---------------------------------------------------------------------------
// Graph export
// ---------------------------------------------------------------------------

/// Renders the subsystem graph as DOT: dashed edges carry twists (self-loop
/// per modeled vertex plus predecessor → successor), solid edges carry
/// wrenches (self-loop per modeled vertex plus successor → predecessor).
/// Black boxes are drawn as boxes and have no self-loops, since their own
/// quantities are unknown; their connection-point outputs still appear as
/// outgoing edges.
pub fn export_graph_dot(tree: &RobotTree) -> String {
    let mut out = String::from("digraph robot {\n");
    for id in tree.ids() {
        let shape = if tree.subsystem(id).unwrap().is_black_box() {
            "box"
        } else {
            "circle"
        };
        out.push_str(&format!("    {id} [shape={shape}];\n"));
    }
    for id in tree.ids() {
        if !tree.subsystem(id).unwrap().is_black_box() {
            out.push_str(&format!("    {id} -> {id} [style=dashed];\n"));
            out.push_str(&format!("    {id} -> {id} [style=solid];\n"));
        }
        if let Some(p) = tree.parent_of(id) {
            out.push_str(&format!("    {p} -> {id} [style=dashed];\n"));
            out.push_str(&format!("    {id} -> {p} [style=solid];\n"));
        }
    }
    out.push_str("}\n");
    out
}

// ---------------------------------------------------------------------------
// Sensor replay log (CSV)
// ---------------------------------------------------------------------------

/// Time-stamped connection readings, serializable to CSV for replaying a
/// recorded run against a black-boxed tree.
///
/// Columns: `time, subsystem_id, connection_id`, six twist reals, six
/// twist-derivative reals, six wrench reals, and the eight reals of the
/// connection frame pose (without the frame pose, gravity could not be
/// expressed in subsystems mounted below a black box).
#[derive(Clone, Debug, Default)]
pub struct SensorLog {
    rows: Vec<SensorRow>,
}

#[derive(Clone, Debug)]
struct SensorRow {
    time: f64,
    black_box: SubsystemId,
    connection: SubsystemId,
    reading: ConnectionReading,
}

impl SensorLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(
        &mut self,
        time: f64,
        black_box: SubsystemId,
        connection: SubsystemId,
        reading: ConnectionReading,
    ) {
        self.rows.push(SensorRow {
            time,
            black_box,
            connection,
            reading,
        });
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "time,subsystem_id,connection_id,\
             xi_1,xi_2,xi_3,xi_4,xi_5,xi_6,\
             dxi_1,dxi_2,dxi_3,dxi_4,dxi_5,dxi_6,\
             zeta_1,zeta_2,zeta_3,zeta_4,zeta_5,zeta_6,\
             frame_1,frame_2,frame_3,frame_4,frame_5,frame_6,frame_7,frame_8\n",
        );
        for row in &self.rows {
            let mut fields = vec![
                format!("{:.16e}", row.time),
                row.black_box.to_string(),
                row.connection.to_string(),
            ];
            let r = &row.reading;
            for v in r
                .twist
                .vec6()
                .into_iter()
                .chain(r.twist_derivative.vec6())
                .chain(r.wrench.vec6())
                .flatten()
            {
                fields.push(format!("{v:.16e}"));
            }
            for v in r.frame.coeffs() {
                fields.push(format!("{v:.16e}"));
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, CompositionError> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 29 {
                return Err(CompositionError::Replay(format!(
                    "line {}: expected 29 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let num = |s: &str| -> Result<f64, CompositionError> {
                s.trim()
                    .parse()
                    .map_err(|_| CompositionError::Replay(format!("line {}: bad number {s:?}", lineno + 1)))
            };
            let id = |s: &str| -> Result<SubsystemId, CompositionError> {
                s.trim()
                    .parse()
                    .map_err(|_| CompositionError::Replay(format!("line {}: bad id {s:?}", lineno + 1)))
            };
            let vec6 = |offset: usize| -> Result<[f64; 6], CompositionError> {
                let mut v = [0.0; 6];
                for (k, slot) in v.iter_mut().enumerate() {
                    *slot = num(fields[offset + k])?;
                }
                Ok(v)
            };
            let twist = DualQuaternion::from_vec6(vec6(3)?);
            let twist_derivative = DualQuaternion::from_vec6(vec6(9)?);
            let wrench = DualQuaternion::from_vec6(vec6(15)?);
            let mut coeffs = [0.0; 8];
            for (k, slot) in coeffs.iter_mut().enumerate() {
                *slot = num(fields[21 + k])?;
            }
            let frame = Pose::from_coeffs(coeffs)
                .map_err(|e| CompositionError::Replay(format!("line {}: {e}", lineno + 1)))?;
            rows.push(SensorRow {
                time: num(fields[0])?,
                black_box: id(fields[1])?,
                connection: id(fields[2])?,
                reading: ConnectionReading {
                    twist,
                    twist_derivative,
                    wrench,
                    frame,
                },
            });
        }
        Ok(Self { rows })
    }

    /// Sensor view at one sample time (readings whose timestamp is within
    /// `tol` of `time`).
    pub fn at_time(&self, time: f64, tol: f64) -> MapSensors {
        let mut sensors = MapSensors::new();
        for row in &self.rows {
            if (row.time - time).abs() <= tol {
                sensors.insert(row.black_box, row.connection, row.reading.clone());
            }
        }
        sensors
    }
}
