//! Randomized algebraic invariants of the public surface.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use liouville_core::bloch::bloch_matrix;
use liouville_core::fermi::{torus_dist, wrap_angle};
use liouville_core::model::{adjoint, binomial, q_dim, PeriodicOperator, Term};
use liouville_core::polyalg::{dim_formula, dim_formula_mixed, mono_count};

fn arb_operator() -> impl Strategy<Value = PeriodicOperator> {
    (1usize..=2, 1usize..=2)
        .prop_flat_map(|(rank, m)| {
            let term =
                (0..m, 0..m, prop::collection::vec(-2i64..=2, rank), -1.0f64..1.0, -1.0f64..1.0)
                    .prop_map(|(from, to, shift, re, im)| Term {
                        from,
                        to,
                        shift,
                        weight: Complex64::new(re, im),
                    });
            (Just(rank), Just(m), prop::collection::vec(term, 1..=5), -2.0f64..2.0)
        })
        .prop_map(|(rank, m, terms, shift)| {
            let vertices = (0..m).map(|v| format!("v{v}")).collect();
            PeriodicOperator::new(rank, vertices, terms, shift).unwrap()
        })
}

proptest! {
    #[test]
    fn json_round_trip_is_exact(op in arb_operator()) {
        let s = op.to_json_string();
        let back = PeriodicOperator::from_json_str(&s).unwrap();
        prop_assert_eq!(&back, &op);
        prop_assert_eq!(back.to_json_string(), s);
    }

    #[test]
    fn adjoint_is_an_involution(op in arb_operator()) {
        prop_assert_eq!(adjoint(&adjoint(&op)), op);
    }

    #[test]
    fn adjoint_bloch_matrix_is_the_dagger(
        op in arb_operator(),
        raw in prop::collection::vec(-PI..PI, 2),
    ) {
        let k = &raw[..op.rank];
        let a = bloch_matrix(&adjoint(&op), k);
        let b = bloch_matrix(&op, k).dagger();
        let scale = 1.0 + b.data.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (x, y) in a.data.iter().zip(&b.data) {
            prop_assert!((x - y).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn wrap_angle_is_idempotent_and_periodic(x in -50.0f64..50.0) {
        let w = wrap_angle(x);
        prop_assert!(-PI < w && w <= PI);
        prop_assert_eq!(wrap_angle(w), w);
        prop_assert!(torus_dist(&[wrap_angle(x + 2.0 * PI)], &[w]) <= 1e-9);
    }

    #[test]
    fn torus_dist_is_symmetric_and_periodic(
        a in prop::collection::vec(-10.0f64..10.0, 2),
        delta in prop::collection::vec(-10.0f64..10.0, 2),
        winding in -3i32..=3,
    ) {
        let b: Vec<f64> = a.iter().zip(&delta).map(|(x, d)| x + d).collect();
        prop_assert_eq!(torus_dist(&a, &b), torus_dist(&b, &a));
        prop_assert_eq!(torus_dist(&a, &a), 0.0);
        let mut c = b.clone();
        c[0] += 2.0 * PI * f64::from(winding);
        prop_assert!((torus_dist(&a, &c) - torus_dist(&a, &b)).abs() <= 1e-9);
    }

    #[test]
    fn dimension_formula_matches_binomials(
        n in 1usize..=4,
        max_degree in 0usize..=6,
        r in 1usize..=3,
        l0 in 1usize..=4,
    ) {
        let whole = binomial((n + max_degree) as i64, max_degree as i64) as usize;
        let removed = binomial(
            n as i64 + max_degree as i64 - l0 as i64,
            max_degree as i64 - l0 as i64,
        ) as usize;
        prop_assert_eq!(dim_formula(n, max_degree, r, l0), r * (whole - removed));
        prop_assert!(dim_formula(n, max_degree + 1, r, l0) >= dim_formula(n, max_degree, r, l0));
    }

    #[test]
    fn mixed_formula_collapses_to_the_uniform_one(
        n in 1usize..=3,
        max_degree in 0usize..=5,
        r in 1usize..=3,
        l0 in 1usize..=3,
    ) {
        let orders = vec![l0; r];
        prop_assert_eq!(
            dim_formula_mixed(n, max_degree, &orders),
            dim_formula(n, max_degree, r, l0)
        );
    }

    #[test]
    fn q_dim_accumulates_homogeneous_layers(n in 1usize..=4, cap in 0i64..=8) {
        let total: usize = (0..=cap).map(|l| mono_count(n, l as usize)).sum();
        prop_assert_eq!(q_dim(n, cap), total);
        prop_assert_eq!(q_dim(n, -1), 0);
    }
}
