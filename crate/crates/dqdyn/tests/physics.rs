//! Cross-module physics checks: the composed dynamics against the
//! monolithic oracle, energy balance, frame independence, partition
//! invariance, and black-box equivalence.

mod common;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use dqdyn::composition::{dmc, MapSensors, NoSensors, SubsystemStates};
use dqdyn::control::project_generalized;
use dqdyn::dq::{Pose, Quaternion};
use dqdyn::model::{
    parse_robot_description, ConnectionPoint, Link, RobotTree, Subsystem, SubsystemKind,
};
use dqdyn::oracle::{flatten, kinetic_energy, monolithic_ne, statics_oracle};
use dqdyn::serial::ChainState;

#[test]
fn serial_chain_matches_oracle_tightly() {
    let tree = parse_robot_description(CHAIN).unwrap().tree;
    let flat = flatten(&tree).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let states = random_states(&tree, &mut rng, 1.5);
        let composed = dmc(&tree, &states, &NoSensors).unwrap();
        let (q, qd, qdd) = flat_state(&flat, &states);
        let oracle = monolithic_ne(&flat, &q, &qd, &qdd, &BTreeMap::new()).unwrap();
        let diff = max_abs_diff(&gamma_vec6(&composed), &oracle_vec6(&flat, &oracle));
        assert!(diff < 1e-12, "diff {diff:.3e}");
    }
}

#[test]
fn branched_golden_robot_matches_oracle() {
    let tree = load_tree("bm.toml");
    assert_eq!(tree.subsystem_count(), 8);
    assert_eq!(tree.total_links(), 24);
    let flat = flatten(&tree).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let states = random_states(&tree, &mut rng, 1.0);
        let composed = dmc(&tree, &states, &NoSensors).unwrap();
        let (q, qd, qdd) = flat_state(&flat, &states);
        let oracle = monolithic_ne(&flat, &q, &qd, &qdd, &BTreeMap::new()).unwrap();
        worst = worst.max(max_abs_diff(
            &gamma_vec6(&composed),
            &oracle_vec6(&flat, &oracle),
        ));
    }
    assert!(worst < 1e-10, "worst deviation {worst:.3e}");
}

#[test]
fn mobile_golden_robot_matches_oracle() {
    let tree = load_tree("mbm.toml");
    assert_eq!(tree.subsystem_count(), 3);
    let flat = flatten(&tree).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..50 {
        let states = random_states(&tree, &mut rng, 0.8);
        let composed = dmc(&tree, &states, &NoSensors).unwrap();
        let (q, qd, qdd) = flat_state(&flat, &states);
        let oracle = monolithic_ne(&flat, &q, &qd, &qdd, &BTreeMap::new()).unwrap();
        let diff = max_abs_diff(&gamma_vec6(&composed), &oracle_vec6(&flat, &oracle));
        assert!(diff < 1e-10, "diff {diff:.3e}");
    }
}

#[test]
fn black_box_replacement_is_transparent() {
    // Replacing any single non-root subsystem with a black box whose sensor
    // readings come from the full-knowledge run leaves the remaining
    // subsystems' wrenches unchanged.
    let tree = load_tree("bm.toml");
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let states = random_states(&tree, &mut rng, 0.9);
    let full = dmc(&tree, &states, &NoSensors).unwrap();

    for boxed_id in tree.ids().filter(|&id| id != tree.root()) {
        let boxed_tree = tree.with_black_box(boxed_id).unwrap();
        let mut sensors = MapSensors::new();
        // The box's own transmitted wrench (read by its predecessor).
        sensors.insert(boxed_id, boxed_id, full.connection_reading(boxed_id).unwrap());
        // Connection twists for the box's successors.
        for &child in tree.children_of(boxed_id) {
            sensors.insert(boxed_id, child, full.connection_reading(child).unwrap());
        }
        let mut boxed_states = states.clone();
        boxed_states.remove(&boxed_id);
        let partial = dmc(&boxed_tree, &boxed_states, &sensors).unwrap();

        for id in tree.ids().filter(|&id| id != boxed_id) {
            let a = &full.gamma[&id];
            let b = &partial.gamma[&id];
            for (x, y) in a.iter().zip(b) {
                for (u, v) in x.coeffs().iter().zip(y.coeffs()) {
                    assert!(
                        (u - v).abs() <= 1e-9,
                        "subsystem {id} with {boxed_id} boxed: {u} vs {v}"
                    );
                }
            }
        }
    }
}

#[test]
fn partition_invariance_of_composition() {
    let partitions: [&[usize]; 4] = [&[6], &[3, 3], &[2, 4], &[1, 5]];
    let trees: Vec<RobotTree> = partitions.iter().map(|p| partitioned_chain(p)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..100 {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..6)
                .map(|_| rand::Rng::gen_range(rng, -1.2..1.2))
                .collect()
        };
        let (q, qd, qdd) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let mut results = Vec::new();
        for (piece, tree) in partitions.iter().zip(&trees) {
            let states = partitioned_states(piece, &q, &qd, &qdd);
            let out = dmc(tree, &states, &NoSensors).unwrap();
            results.push(gamma_vec6(&out));
        }
        for other in &results[1..] {
            let diff = max_abs_diff(&results[0], other);
            assert!(diff < 1e-10, "partition disagreement {diff:.3e}");
        }
    }
}

#[test]
fn statics_match_vector_oracle() {
    let tree = load_tree("bm.toml");
    let flat = flatten(&tree).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..20 {
        let mut states = random_states(&tree, &mut rng, 1.0);
        for st in states.values_mut() {
            *st = st.hold_configuration();
        }
        let composed = dmc(&tree, &states, &NoSensors).unwrap();
        let mut projected = Vec::new();
        for id in tree.ids() {
            let links = tree.subsystem(id).unwrap().links().unwrap();
            projected.extend(project_generalized(&composed.gamma[&id], links).unwrap());
        }
        let (q, _, _) = flat_state(&flat, &states);
        let oracle_tau = statics_oracle(&flat, &q).unwrap();
        // Reorder oracle DoFs into ascending-id order (both are per-link
        // scalars here since all BM joints are 1-DoF).
        let oracle_by_id: Vec<f64> = flat.id_order().iter().map(|&i| oracle_tau[i]).collect();
        for (a, b) in projected.iter().zip(&oracle_by_id) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn energy_balance_without_gravity() {
    // With gravity off, joint power Σ τ q̇ equals the finite-difference
    // derivative of the oracle's kinetic energy.
    let text = CHAIN.replace(
        "[subsystem.1]",
        "[world]\ngravity = [0.0, 0.0, 0.0]\n\n[subsystem.1]",
    );
    let tree = parse_robot_description(&text).unwrap().tree;
    let flat = flatten(&tree).unwrap();
    let links = tree.subsystem(1).unwrap().links().unwrap();

    // A smooth trajectory through state space.
    let traj = |t: f64| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let q = vec![
            0.4 * (1.3 * t).sin(),
            -0.7 * (0.9 * t).cos(),
            0.5 * (1.7 * t).sin(),
        ];
        let qd = vec![
            0.4 * 1.3 * (1.3 * t).cos(),
            0.7 * 0.9 * (0.9 * t).sin(),
            0.5 * 1.7 * (1.7 * t).cos(),
        ];
        let qdd = vec![
            -0.4 * 1.3 * 1.3 * (1.3 * t).sin(),
            0.7 * 0.9 * 0.9 * (0.9 * t).cos(),
            -0.5 * 1.7 * 1.7 * (1.7 * t).sin(),
        ];
        (q, qd, qdd)
    };

    for k in 1..8 {
        let t = 0.37 * k as f64;
        let (q, qd, qdd) = traj(t);
        let states = SubsystemStates::from([(1, ChainState::new(q.clone(), qd.clone(), qdd))]);
        let out = dmc(&tree, &states, &NoSensors).unwrap();
        let tau = project_generalized(&out.gamma[&1], links).unwrap();
        let power: f64 = tau.iter().zip(&qd).map(|(t, v)| t * v).sum();

        let h = 1e-5;
        let (qp, qdp, _) = traj(t + h);
        let (qm, qdm, _) = traj(t - h);
        let ke_p = kinetic_energy(&flat, &qp, &qdp).unwrap();
        let ke_m = kinetic_energy(&flat, &qm, &qdm).unwrap();
        let dke = (ke_p - ke_m) / (2.0 * h);
        let rel = (power - dke).abs() / power.abs().max(1e-9);
        assert!(rel < 1e-6, "t={t}: power {power} vs dKE/dt {dke} (rel {rel:.3e})");
    }
}

#[test]
fn frame_independence_of_generalized_forces() {
    // Mount the same arm on a plate with the mount rotated by R while the
    // gravity vector is rotated accordingly: the arm's generalized forces
    // are unchanged even though every intermediate frame differs.
    let arm = table_chain_links();
    let plate = Link {
        joint: dqdyn::model::JointKind::Revolute,
        params: dqdyn::model::LinkParams {
            dh_a: 0.0,
            dh_alpha: 0.0,
            dh_d: 0.05,
            dh_theta: 0.0,
            mass: 5.0,
            com_offset: Quaternion::ZERO,
            inertia: [
                Quaternion::pure(2.0, 0.0, 0.0),
                Quaternion::pure(0.0, 2.0, 0.0),
                Quaternion::pure(0.0, 0.0, 2.0),
            ],
        },
    };
    let build = |mount: Pose, gravity: [f64; 3]| -> RobotTree {
        RobotTree::new(
            vec![
                Subsystem {
                    id: 1,
                    kind: SubsystemKind::Modeled { links: vec![plate.clone()] },
                    parent: None,
                    base_connection: None,
                },
                Subsystem {
                    id: 2,
                    kind: SubsystemKind::Modeled { links: arm.clone() },
                    parent: Some(1),
                    base_connection: Some(ConnectionPoint {
                        host_link: 1,
                        offset: mount,
                    }),
                },
            ],
            gravity,
        )
        .unwrap()
    };

    let r = Quaternion::from_axis_angle([0.267261241912424, 0.534522483824849, 0.801783725737273], 1.1);
    let g0 = Quaternion::pure(0.0, 0.0, -9.81);
    let g1 = r.rotate(&g0);
    let tree_a = build(Pose::from_translation(0.2, 0.0, 0.1), [g0.x, g0.y, g0.z]);
    let rotated_mount = Pose::from_rotation_translation(r, Quaternion::ZERO)
        * Pose::from_translation(0.2, 0.0, 0.1);
    let tree_b = build(rotated_mount, [g1.x, g1.y, g1.z]);

    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..30 {
        // The plate stands in for the (re-oriented) world frame and stays
        // frozen; only the arm moves.
        let mut states = random_states(&tree_a, &mut rng, 1.0);
        states.insert(1, ChainState::zero(1));
        let out_a = dmc(&tree_a, &states, &NoSensors).unwrap();
        let out_b = dmc(&tree_b, &states, &NoSensors).unwrap();
        let tau_a = project_generalized(&out_a.gamma[&2], &arm).unwrap();
        let tau_b = project_generalized(&out_b.gamma[&2], &arm).unwrap();
        for (a, b) in tau_a.iter().zip(&tau_b) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn composed_outputs_stay_pure() {
    let tree = load_tree("bm.toml");
    let mut rng = ChaCha8Rng::seed_from_u64(83);
    let states = random_states(&tree, &mut rng, 1.2);
    let out = dmc(&tree, &states, &NoSensors).unwrap();
    for w in &out.gamma_total {
        assert!(w.purity_defect() <= 1e-10);
    }
    for per in out.forward.values() {
        for t in per.total.twists.iter().chain(per.total.derivatives.iter()) {
            assert!(t.purity_defect() <= 1e-10);
        }
    }
}

#[test]
fn black_boxed_mobile_robot_matrix_pattern() {
    // With subsystem 2 black-boxed, only its transmitted-wrench column
    // survives next to the modeled diagonal blocks.
    let tree = load_tree("mbm.toml");
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let states = random_states(&tree, &mut rng, 0.5);
    let full = dmc(&tree, &states, &NoSensors).unwrap();

    let boxed = tree.with_black_box(2).unwrap();
    let mut sensors = MapSensors::new();
    sensors.insert(2, 2, full.connection_reading(2).unwrap());
    sensors.insert(2, 3, full.connection_reading(3).unwrap());
    let mut boxed_states = states.clone();
    boxed_states.remove(&2);
    let partial = dmc(&boxed, &boxed_states, &sensors).unwrap();

    assert_eq!(partial.matrix.nonzero_pattern(), vec![(1, 1), (1, 2), (3, 3)]);
    assert_eq!(partial.matrix.block(1, 2).unwrap().len(), 1);
    assert!(!partial.gamma.contains_key(&2));
}

#[test]
fn black_box_root_feeds_children_from_sensors() {
    let tree = load_tree("mbm.toml");
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    let states = random_states(&tree, &mut rng, 0.5);
    let full = dmc(&tree, &states, &NoSensors).unwrap();

    let boxed = tree.with_black_box(1).unwrap();
    let mut sensors = MapSensors::new();
    sensors.insert(1, 2, full.connection_reading(2).unwrap());
    let mut boxed_states = states.clone();
    boxed_states.remove(&1);
    let partial = dmc(&boxed, &boxed_states, &sensors).unwrap();

    for id in [2u32, 3] {
        for (a, b) in full.gamma[&id].iter().zip(&partial.gamma[&id]) {
            for (u, v) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((u - v).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn injected_wrench_response_is_linear() {
    // At fixed poses the backward pass is linear in the injected leaf
    // wrenches: Γ_Z(αZ) = αΓ_Z(Z) and Γ_Z(Z₁+Z₂) = Γ_Z(Z₁) + Γ_Z(Z₂).
    use dqdyn::composition::ExternalWrenches;
    use dqdyn::control::joint_wrench_input;
    use dqdyn::dq::DualQuaternion;

    let tree = load_tree("bm.toml");
    let mut rng = ChaCha8Rng::seed_from_u64(139);
    let states = random_states(&tree, &mut rng, 0.8);

    let gamma_z = |z: &ExternalWrenches| -> Vec<DualQuaternion> {
        let with = joint_wrench_input(&tree, &states, &NoSensors, z).unwrap();
        let without = joint_wrench_input(&tree, &states, &NoSensors, &ExternalWrenches::new())
            .unwrap();
        with.gamma_total
            .iter()
            .zip(&without.gamma_total)
            .map(|(a, b)| *a - *b)
            .collect()
    };

    let z1 = ExternalWrenches::from([
        (3, DualQuaternion::from_imag([0.4, -0.2, 0.9], [0.1, 0.3, -0.5])),
        (6, DualQuaternion::from_imag([-0.7, 0.5, 0.2], [0.6, -0.1, 0.4])),
    ]);
    let z2 = ExternalWrenches::from([
        (3, DualQuaternion::from_imag([0.2, 0.8, -0.3], [-0.4, 0.0, 0.7])),
        (8, DualQuaternion::from_imag([0.1, -0.6, 0.5], [0.2, 0.9, -0.2])),
    ]);
    let alpha = -2.5;
    let z1_scaled: ExternalWrenches =
        z1.iter().map(|(&k, w)| (k, *w * alpha)).collect();
    let mut z_sum = z1.clone();
    for (&k, w) in &z2 {
        let entry = z_sum.entry(k).or_insert(DualQuaternion::ZERO);
        *entry = *entry + *w;
    }

    let g1 = gamma_z(&z1);
    let g2 = gamma_z(&z2);
    let g_scaled = gamma_z(&z1_scaled);
    let g_sum = gamma_z(&z_sum);
    for i in 0..g1.len() {
        let scale_dev = g_scaled[i] - g1[i] * alpha;
        let sum_dev = g_sum[i] - (g1[i] + g2[i]);
        for c in scale_dev.coeffs().iter().chain(sum_dev.coeffs().iter()) {
            assert!(c.abs() < 1e-10, "{c}");
        }
    }
}

#[test]
fn error_dynamics_converges_across_gains() {
    // For every tested initial error with ‖log x̃₀‖ ≤ 0.5 and gain setting,
    // the integrated loop satisfies ‖ỹ(T)‖ < ‖ỹ(0)‖ and ‖ỹ(T)‖ < 1e-3 at
    // T = 20 / min(k_p, k_v).
    use dqdyn::control::{integrate_error_dynamics, ControlGains, LeafTarget};
    use dqdyn::dq::DualQuaternion;

    let errors0 = [
        Pose::from_rotation_translation(
            Quaternion::from_axis_angle([0.0, 0.0, 1.0], 0.8),
            Quaternion::pure(0.6, 0.0, 0.0),
        ),
        Pose::from_rotation_translation(
            Quaternion::from_axis_angle([1.0, 0.0, 0.0], 0.2),
            Quaternion::pure(-0.1, 0.3, 0.2),
        ),
        Pose::from_translation(0.0, -0.5, 0.3),
    ];
    // Balanced gains; heavily overdamped settings (k_v ≫ k_p) slow the
    // dominant mode below what this horizon covers.
    for (kp, kv) in [(1.0, 1.0), (2.0, 2.0), (4.0, 4.0), (4.0, 3.0)] {
        let gains = ControlGains::new(kp, kv).unwrap();
        let horizon = 20.0 / kp.min(kv);
        for e0 in &errors0 {
            let traj = integrate_error_dynamics(
                &[(*e0, DualQuaternion::ZERO)],
                &[LeafTarget::regulation(1, Pose::identity())],
                &gains,
                1e-3,
                horizon,
            )
            .unwrap();
            let first = traj.total[0];
            let last = *traj.total.last().unwrap();
            assert!(first <= 0.5 + 1e-12);
            assert!(last < first, "kp={kp} kv={kv}: {last} !< {first}");
            assert!(last < 1e-3, "kp={kp} kv={kv}: final {last:.3e}");
        }
    }
}
