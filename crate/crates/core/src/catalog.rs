//! Bundled example operators. These are the reference models exercised by the
//! test suite and shipped with the CLI; keeping the constructors here makes
//! the expected values in tests reproducible from one place.

use num_complex::Complex64;

use crate::model::{PeriodicOperator, Term};

fn real_term(from: usize, to: usize, shift: Vec<i64>, w: f64) -> Term {
    Term { from, to, shift, weight: Complex64::new(w, 0.0) }
}

/// 1D lattice Laplacian 2 - S - S^{-1}, analyzed at energy level `shift`.
pub fn z1_laplacian(shift: f64) -> PeriodicOperator {
    PeriodicOperator::new(
        1,
        vec!["a".into()],
        vec![
            real_term(0, 0, vec![0], 2.0),
            real_term(0, 0, vec![1], -1.0),
            real_term(0, 0, vec![-1], -1.0),
        ],
        shift,
    )
    .expect("catalog operator is valid")
}

/// 2D lattice Laplacian 4 - sum of the four unit shifts.
pub fn z2_laplacian(shift: f64) -> PeriodicOperator {
    PeriodicOperator::new(
        2,
        vec!["a".into()],
        vec![
            real_term(0, 0, vec![0, 0], 4.0),
            real_term(0, 0, vec![1, 0], -1.0),
            real_term(0, 0, vec![-1, 0], -1.0),
            real_term(0, 0, vec![0, 1], -1.0),
            real_term(0, 0, vec![0, -1], -1.0),
        ],
        shift,
    )
    .expect("catalog operator is valid")
}

/// Symmetric shift average (S + S^{-1})/2 with Bloch symbol cos k.
pub fn cos_band(shift: f64) -> PeriodicOperator {
    PeriodicOperator::new(
        1,
        vec!["a".into()],
        vec![real_term(0, 0, vec![1], 0.5), real_term(0, 0, vec![-1], 0.5)],
        shift,
    )
    .expect("catalog operator is valid")
}

/// Square of the 1D Laplacian, (2 - S - S^{-1})^2, symbol (2 - 2 cos k)^2.
pub fn biharmonic_chain(shift: f64) -> PeriodicOperator {
    PeriodicOperator::new(
        1,
        vec!["a".into()],
        vec![
            real_term(0, 0, vec![0], 6.0),
            real_term(0, 0, vec![1], -4.0),
            real_term(0, 0, vec![-1], -4.0),
            real_term(0, 0, vec![2], 1.0),
            real_term(0, 0, vec![-2], 1.0),
        ],
        shift,
    )
    .expect("catalog operator is valid")
}

/// Two-site chain with alternating bond weights. With `intra == inter` the
/// Bloch matrix is [[0, 1 + e^{-ik}], [1 + e^{ik}, 0]] and the gap closes at
/// k = pi with a two-dimensional kernel.
pub fn ssh_dimer(intra: f64, inter: f64, shift: f64) -> PeriodicOperator {
    PeriodicOperator::new(
        1,
        vec!["a".into(), "b".into()],
        vec![
            real_term(0, 1, vec![0], intra),
            real_term(1, 0, vec![0], intra),
            real_term(0, 1, vec![-1], inter),
            real_term(1, 0, vec![1], inter),
        ],
        shift,
    )
    .expect("catalog operator is valid")
}

/// Drift generator I - p S - q S^{-1} of the biased nearest-neighbor walk.
/// Not selfadjoint for p != q, but carries the positivity structure.
pub fn drifted_walk(p: f64, q: f64) -> PeriodicOperator {
    PeriodicOperator::new(
        1,
        vec!["a".into()],
        vec![
            real_term(0, 0, vec![0], 1.0),
            real_term(0, 0, vec![1], -p),
            real_term(0, 0, vec![-1], -q),
        ],
        0.0,
    )
    .expect("catalog operator is valid")
}

/// Constant nilpotent coupling a -> b. Its Bloch matrix is the 2x2 Jordan
/// block at every k: geometric multiplicity 1, algebraic multiplicity 2.
pub fn jordan_cell() -> PeriodicOperator {
    PeriodicOperator::new(1, vec!["a".into(), "b".into()], vec![real_term(0, 1, vec![0], 1.0)], 0.0)
        .expect("catalog operator is valid")
}

/// The six bundled examples under their CLI names, at their default levels.
pub fn bundled() -> Vec<(&'static str, PeriodicOperator)> {
    vec![
        ("z1_laplacian", z1_laplacian(0.0)),
        ("z2_laplacian", z2_laplacian(0.0)),
        ("cos_band", cos_band(0.0)),
        ("biharmonic_chain", biharmonic_chain(0.0)),
        ("ssh_dimer", ssh_dimer(1.0, 1.0, 0.0)),
        ("drifted_walk", drifted_walk(0.25, 0.75)),
    ]
}
