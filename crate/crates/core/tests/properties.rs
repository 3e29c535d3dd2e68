mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use qvar_core::gaussian::wick_fourth;
use qvar_core::inequalities::{
    applicable_suite, eval_false5, eval_gen3, eval_gen4, eval_pair_bound, eval_prod3, eval_prod4,
    eval_prod4_star, eval_robertson_pair, eval_schrodinger_pair, eval_sum3, eval_sum3_power,
    eval_sum3_robertson, eval_sum4, eval_zero_comm, four_derived, lambda_pfaffian_identity,
};
use qvar_core::moments::moment_set;
use qvar_core::operator::psd_check;
use qvar_core::states::fock_pair;
use qvar_core::{MomentOptions, Tolerances};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn f_matrix_is_psd(seed in any::<u64>(), dim in 2usize..=12, n in 2usize..=5, mixed in any::<bool>()) {
        let ms = random_moments(&mut rng(seed), dim, n, mixed);
        let r = psd_check(&ms.f_matrix(), Tolerances::PSD).unwrap();
        prop_assert!(r.is_psd, "min eigenvalue {}", r.min_eigenvalue);
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn pair_bounds_hold_and_nest(seed in any::<u64>(), dim in 2usize..=10, mixed in any::<bool>()) {
        let ms = random_moments(&mut rng(seed), dim, 2, mixed);
        let rob = eval_robertson_pair(&ms, 0, 1).unwrap();
        let sch = eval_schrodinger_pair(&ms, 0, 1).unwrap();
        prop_assert!(sch.satisfied && rob.satisfied);
        prop_assert!(sch.rhs >= rob.rhs);
        prop_assert_eq!(sch.lhs, rob.lhs);
    }

    #[test]
    fn every_correct_relation_holds(seed in any::<u64>(), dim in 2usize..=10, n in 2usize..=4, mixed in any::<bool>()) {
        let ms = random_moments(&mut rng(seed), dim, n, mixed);
        for r in applicable_suite(&ms).unwrap() {
            if !r.known_incorrect {
                prop_assert!(r.margin >= -Tolerances::INEQ, "{} margin {}", r.id, r.margin);
            }
        }
    }

    #[test]
    fn covariance_free_bounds_are_ordered(seed in any::<u64>(), dim in 2usize..=10) {
        let ms = random_moments(&mut rng(seed), dim, 3, false);
        prop_assert!(eval_sum3(&ms).unwrap().rhs >= eval_sum3_robertson(&ms).unwrap().rhs);
        prop_assert!(eval_false5(&ms).unwrap().rhs >= eval_prod3(&ms).unwrap().rhs);
        prop_assert!(eval_pair_bound(&ms).unwrap().rhs >= eval_zero_comm(&ms).unwrap().rhs);
    }

    #[test]
    fn four_tuple_quantities(seed in any::<u64>(), dim in 2usize..=10) {
        let ms = random_moments(&mut rng(seed), dim, 4, false);
        let d = four_derived(&ms).unwrap();
        prop_assert!(d.psi >= d.psi_star * (1.0 - 1e-12));
        prop_assert!(eval_prod4(&ms).unwrap().rhs >= eval_prod4_star(&ms).unwrap().rhs * (1.0 - 1e-12));
    }

    #[test]
    fn weighted_forms_reduce(seed in any::<u64>(), dim in 2usize..=8) {
        let ms3 = random_moments(&mut rng(seed), dim, 3, false);
        let g = eval_gen3(&ms3, [1.0; 3]).unwrap();
        let s = eval_sum3(&ms3).unwrap();
        prop_assert_eq!((g.lhs, g.rhs, g.margin, g.satisfied), (s.lhs, s.rhs, s.margin, s.satisfied));
        let p = eval_sum3_power(&ms3, 0.0).unwrap();
        prop_assert_eq!((p.lhs, p.rhs, p.margin), (s.lhs, s.rhs, s.margin));

        let ms4 = random_moments(&mut rng(seed ^ 1), dim, 4, false);
        let g4 = eval_gen4(&ms4, [1.0; 4]).unwrap();
        let s4 = eval_sum4(&ms4).unwrap();
        prop_assert!(rel_close(g4.lhs, s4.lhs * s4.lhs, 1e-12));
        prop_assert!(rel_close(g4.rhs, s4.rhs * s4.rhs, 1e-12));
    }

    #[test]
    fn weighted_forms_are_homogeneous(seed in any::<u64>(), dim in 2usize..=8, t in 0.1f64..3.0) {
        let ms = random_moments(&mut rng(seed), dim, 3, false);
        let a = [0.3, -1.2, 0.8];
        let r1 = eval_gen3(&ms, a).unwrap();
        let r2 = eval_gen3(&ms, a.map(|v| v * t)).unwrap();
        prop_assert!(rel_close(r2.lhs, t * t * r1.lhs, 1e-12));
        prop_assert!(rel_close(r2.rhs, t * t * r1.rhs, 1e-12));
    }

    #[test]
    fn centering_removes_shifts(seed in any::<u64>(), dim in 2usize..=8, c in -5.0f64..5.0) {
        let mut g = rng(seed);
        let state = random_pure(&mut g, dim, 1.0);
        let ops: Vec<_> = (0..3).map(|_| random_hermitian(&mut g, dim)).collect();
        let shifted: Vec<_> = ops.iter().map(|o| o.shifted(c)).collect();
        let opts = MomentOptions::default();
        let a = moment_set(&state, &ops, &opts).unwrap();
        let b = moment_set(&state, &shifted, &opts).unwrap();
        prop_assert!((&a.x - &b.x).amax() < 1e-10 * (1.0 + c * c));
        prop_assert!((&a.y - &b.y).amax() < 1e-10 * (1.0 + c * c));
    }

    #[test]
    fn scaling_matches_scaled_operators(seed in any::<u64>(), dim in 2usize..=8, l in prop::array::uniform3(-3.0f64..3.0)) {
        let mut g = rng(seed);
        let state = random_mixed(&mut g, dim, 1.0);
        let ops: Vec<_> = (0..3).map(|_| random_hermitian(&mut g, dim)).collect();
        let scaled: Vec<_> = ops.iter().zip(l).map(|(o, s)| o.scaled(s)).collect();
        let opts = MomentOptions::default();
        let a = moment_set(&state, &ops, &opts).unwrap().scaled(&l).unwrap();
        let b = moment_set(&state, &scaled, &opts).unwrap();
        prop_assert!((&a.x - &b.x).amax() < 1e-10);
        prop_assert!((&a.y - &b.y).amax() < 1e-10);
    }

    #[test]
    fn xi_is_linear(seed in any::<u64>(), dim in 4usize..=16) {
        let state = random_pure(&mut rng(seed), dim, 1.0);
        let ops = fock_pair(dim, 1.0).unwrap().xpxi().unwrap();
        let ms = moment_set(&state, &ops, &MomentOptions::default()).unwrap();
        let want = ms.variance(0) + ms.variance(1) + 2.0 * ms.cov(0, 1);
        prop_assert!((ms.variance(2) - want).abs() < 1e-10 * want.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn pfaffian_identity(seed in any::<u64>()) {
        let ms = algebraic_moments(random_antisymmetric(&mut rng(seed), 4));
        let (det, lambda2) = lambda_pfaffian_identity(&ms).unwrap();
        prop_assert!((det - lambda2).abs() <= 1e-9 * lambda2.max(1e-12), "{det} vs {lambda2}");
    }

    #[test]
    fn sum3_rhs_dominates_pairwise(seed in any::<u64>()) {
        let ms = algebraic_moments(random_antisymmetric(&mut rng(seed), 3));
        prop_assert!(eval_sum3(&ms).unwrap().rhs >= eval_sum3_robertson(&ms).unwrap().rhs);
    }

    #[test]
    fn wick_is_pairing_symmetric(m in prop::array::uniform4(-2.0f64..2.0), cov_seed in any::<u64>()) {
        // pair moments of four linear combinations of a random 2x2 covariance
        let mut g = rng(cov_seed);
        let a = DMatrix::from_fn(2, 2, |_, _| g.random_range(-1.0..1.0));
        let cov = &a * a.transpose() + DMatrix::identity(2, 2) * 0.1;
        let rows: Vec<[f64; 2]> = (0..4).map(|k| [m[k], 1.0 - m[k]]).collect();
        let pm = |i: usize, j: usize| {
            let (u, v) = (rows[i], rows[j]);
            u[0] * (cov[(0, 0)] * v[0] + cov[(0, 1)] * v[1]) + u[1] * (cov[(1, 0)] * v[0] + cov[(1, 1)] * v[1])
        };
        let w = |p: [usize; 4]| wick_fourth(pm(p[0], p[1]), pm(p[2], p[3]), pm(p[0], p[2]), pm(p[1], p[3]), pm(p[0], p[3]), pm(p[1], p[2]));
        let base = w([0, 1, 2, 3]);
        for p in [[1, 0, 2, 3], [2, 3, 0, 1], [3, 1, 2, 0], [0, 2, 1, 3]] {
            prop_assert!((w(p) - base).abs() < 1e-12 * base.abs().max(1.0));
        }
    }
}

