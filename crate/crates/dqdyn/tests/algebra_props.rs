//! Property-based invariants of the dual quaternion algebra.

use proptest::prelude::*;

use dqdyn::dq::{DualQuaternion, Pose, Quaternion};

fn angle() -> impl Strategy<Value = f64> {
    -3.0f64..3.0
}

fn coord() -> impl Strategy<Value = f64> {
    -2.0f64..2.0
}

prop_compose! {
    fn arb_axis()(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) -> [f64; 3] {
        let n = (x * x + y * y + z * z).sqrt();
        if n < 1e-3 { [1.0, 0.0, 0.0] } else { [x / n, y / n, z / n] }
    }
}

prop_compose! {
    fn arb_pose()(axis in arb_axis(), phi in angle(),
                  px in coord(), py in coord(), pz in coord()) -> Pose {
        Pose::from_rotation_translation(
            Quaternion::from_axis_angle(axis, phi),
            Quaternion::pure(px, py, pz),
        )
    }
}

prop_compose! {
    fn arb_pure()(a in coord(), b in coord(), c in coord(),
                  d in coord(), e in coord(), f in coord()) -> DualQuaternion {
        DualQuaternion::from_imag([a, b, c], [d, e, f])
    }
}

fn max_coeff(h: &DualQuaternion) -> f64 {
    h.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()))
}

proptest! {
    #[test]
    fn unit_norm_closure(x in arb_pose()) {
        let prod = x.as_dual_quaternion() * x.conj().as_dual_quaternion();
        prop_assert!(max_coeff(&(prod - DualQuaternion::ONE)) <= 1e-10);
        let n = x.as_dual_quaternion().norm().unwrap();
        prop_assert!((n.real - 1.0).abs() <= 1e-10 && n.dual.abs() <= 1e-10);
    }

    #[test]
    fn product_of_poses_is_a_pose(x in arb_pose(), y in arb_pose()) {
        prop_assert!((x * y).unit_defect() <= 1e-10);
    }

    #[test]
    fn adjoint_preserves_purity_and_norm(x in arb_pose(), a in arb_pure()) {
        let out = x.adjoint(&a);
        prop_assert!(out.purity_defect() <= 1e-10);
        prop_assert!((out.primary.norm() - a.primary.norm()).abs() <= 1e-10);
    }

    #[test]
    fn adjoint_is_a_group_action(x1 in arb_pose(), x2 in arb_pose(), a in arb_pure()) {
        let once = (x1 * x2).adjoint(&a);
        let twice = x1.adjoint(&x2.adjoint(&a));
        prop_assert!(max_coeff(&(once - twice)) <= 1e-10);
    }

    #[test]
    fn log_recovers_pose_parameters(axis in arb_axis(), phi in 1e-3f64..3.0,
                                    px in coord(), py in coord(), pz in coord()) {
        let p = Quaternion::pure(px, py, pz);
        let x = Pose::from_rotation_translation(Quaternion::from_axis_angle(axis, phi), p);
        let l = x.log();
        // Rebuild the pose from the extracted parameters.
        let rebuilt = Pose::from_log(l);
        for (a, b) in rebuilt.coeffs().iter().zip(x.coeffs()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        // And the parameters themselves.
        let rot = l.primary() * 2.0;
        prop_assert!((rot.norm() - phi).abs() <= 1e-9);
        let trans = l.dual() * 2.0;
        for (a, b) in trans.imag().iter().zip(p.imag()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn cross_is_antisymmetric(a in arb_pure(), b in arb_pure()) {
        prop_assert!(max_coeff(&(a.cross(&b) + b.cross(&a))) <= 1e-12);
        prop_assert!(max_coeff(&a.cross(&a)) <= 1e-12);
    }

    #[test]
    fn cross_matches_vector_cross(ax in coord(), ay in coord(), az in coord(),
                                  bx in coord(), by in coord(), bz in coord()) {
        let a = DualQuaternion::from_imag([ax, ay, az], [0.0; 3]);
        let b = DualQuaternion::from_imag([bx, by, bz], [0.0; 3]);
        let c = a.cross(&b).vec6().unwrap();
        let expect = [
            ay * bz - az * by,
            az * bx - ax * bz,
            ax * by - ay * bx,
        ];
        for (got, want) in c[..3].iter().zip(expect) {
            prop_assert!((got - want).abs() <= 1e-12);
        }
        prop_assert!(c[3..].iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn swap_involution_and_vec6_roundtrip(a in arb_pure()) {
        prop_assert_eq!(a.swap().swap(), a);
        prop_assert_eq!(DualQuaternion::from_vec6(a.vec6().unwrap()), a);
    }

    #[test]
    fn quaternion_norm_multiplicative(w1 in coord(), x1 in coord(), y1 in coord(), z1 in coord(),
                                      w2 in coord(), x2 in coord(), y2 in coord(), z2 in coord()) {
        let a = Quaternion::new(w1, x1, y1, z1);
        let b = Quaternion::new(w2, x2, y2, z2);
        prop_assert!(((a * b).norm() - a.norm() * b.norm()).abs() <= 1e-12);
    }

    #[test]
    fn renormalized_poses_are_tightly_unit(x in arb_pose(), y in arb_pose(), z in arb_pose()) {
        // Products drift; renormalization projects back.
        let mut acc = x;
        for _ in 0..40 {
            acc = acc * y * z * y.conj() * z.conj();
        }
        prop_assert!(acc.renormalized().unit_defect() <= 1e-12);
    }
}
