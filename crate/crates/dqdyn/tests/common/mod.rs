//! Shared helpers for the integration test suites.

// Each test target compiles this module separately and uses a subset.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;

use dqdyn::composition::{CompositionResult, SubsystemStates};
use dqdyn::dq::Pose;
use dqdyn::model::{
    parse_robot_description, ConnectionPoint, Link, RobotDescription, RobotTree, Subsystem,
    SubsystemKind,
};
use dqdyn::oracle::FlatTree;
use dqdyn::serial::ChainState;

/// The Table-style 3-DoF revolute chain used across the suites.
pub const CHAIN: &str = r#"
[subsystem.1]
kind = "modeled"
links = [
  { joint = "revolute", a = 0.0, alpha = 1.5707963267948966, d = 0.187, theta = 1.5707963267948966, mass = 0.8, com = [0.0, -0.187, 0.0], inertia_diag = [0.8, 0.8, 0.8] },
  { joint = "revolute", a = 0.0, alpha = 1.5707963267948966, d = 0.43, theta = 1.5707963267948966, mass = 0.5, com = [0.0, -0.195, 0.0], inertia_diag = [0.5, 0.5, 0.5] },
  { joint = "revolute", a = 0.0, alpha = 0.0, d = 0.0, theta = 0.0, mass = 0.1, com = [0.0, 0.0, 0.235], inertia_diag = [0.1, 0.1, 0.1] },
]

[tree]
root = 1
"#;

pub fn table_chain_links() -> Vec<Link> {
    parse_robot_description(CHAIN)
        .unwrap()
        .tree
        .subsystem(1)
        .unwrap()
        .links()
        .unwrap()
        .to_vec()
}

/// A serial 6-link robot partitioned into the given piece sizes, each piece
/// one subsystem connected at the previous piece's last link.
pub fn partitioned_chain(pieces: &[usize]) -> RobotTree {
    let links = table_chain_links();
    let six: Vec<Link> = links.iter().cycle().take(6).cloned().collect();
    let mut subsystems = Vec::new();
    let mut taken = 0;
    for (k, &n) in pieces.iter().enumerate() {
        let id = (k + 1) as u32;
        let chunk = six[taken..taken + n].to_vec();
        let (parent, base_connection) = if k == 0 {
            (None, None)
        } else {
            (
                Some(k as u32),
                Some(ConnectionPoint {
                    host_link: pieces[k - 1],
                    offset: Pose::identity(),
                }),
            )
        };
        subsystems.push(Subsystem {
            id,
            kind: SubsystemKind::Modeled { links: chunk },
            parent,
            base_connection,
        });
        taken += n;
    }
    RobotTree::new(subsystems, [0.0, 0.0, -9.81]).unwrap()
}

pub fn partitioned_states(
    pieces: &[usize],
    q: &[f64],
    qd: &[f64],
    qdd: &[f64],
) -> SubsystemStates {
    let mut states = SubsystemStates::new();
    let mut taken = 0;
    for (k, &n) in pieces.iter().enumerate() {
        states.insert(
            (k + 1) as u32,
            ChainState::new(
                q[taken..taken + n].to_vec(),
                qd[taken..taken + n].to_vec(),
                qdd[taken..taken + n].to_vec(),
            ),
        );
        taken += n;
    }
    states
}

pub fn golden_path(name: &str) -> String {
    format!("{}/../../robots/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn load_description(name: &str) -> RobotDescription {
    let text = std::fs::read_to_string(golden_path(name)).expect("golden robot file");
    parse_robot_description(&text).expect("golden robot file parses")
}

pub fn load_tree(name: &str) -> RobotTree {
    load_description(name).tree
}

/// Random joint states for every modeled subsystem.
pub fn random_states<R: Rng>(tree: &RobotTree, rng: &mut R, scale: f64) -> SubsystemStates {
    tree.ids()
        .filter_map(|id| {
            let sub = tree.subsystem(id)?;
            if sub.is_black_box() {
                return None;
            }
            let dof = sub.dof();
            let mut draw = |s: f64| -> Vec<f64> {
                (0..dof).map(|_| rng.gen_range(-s..s)).collect()
            };
            Some((id, ChainState::new(draw(scale), draw(scale), draw(scale))))
        })
        .collect()
}

/// Flattens per-subsystem states into the oracle's global layout.
pub fn flat_state(flat: &FlatTree, states: &SubsystemStates) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut offsets: BTreeMap<u32, usize> = BTreeMap::new();
    let (mut q, mut qd, mut qdd) = (Vec::new(), Vec::new(), Vec::new());
    for link in &flat.links {
        let st = &states[&link.subsystem];
        let off = offsets.entry(link.subsystem).or_insert(0);
        let d = link.link.joint.dof();
        q.extend_from_slice(&st.q[*off..*off + d]);
        qd.extend_from_slice(&st.qdot[*off..*off + d]);
        qdd.extend_from_slice(&st.qddot[*off..*off + d]);
        *off += d;
    }
    (q, qd, qdd)
}

/// Composed result as vec6 rows, ascending subsystem id order.
pub fn gamma_vec6(result: &CompositionResult) -> Vec<[f64; 6]> {
    result
        .gamma_total
        .iter()
        .map(|w| w.vec6().expect("wrenches are pure"))
        .collect()
}

/// Oracle output rearranged into ascending subsystem id order.
pub fn oracle_vec6(flat: &FlatTree, wrenches: &[[f64; 6]]) -> Vec<[f64; 6]> {
    flat.id_order().iter().map(|&i| wrenches[i]).collect()
}

pub fn max_abs_diff(a: &[[f64; 6]], b: &[[f64; 6]]) -> f64 {
    assert_eq!(a.len(), b.len(), "wrench vector lengths differ");
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}
