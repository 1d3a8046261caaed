//! Counting and constructing polynomial-growth kernel elements.
//!
//! A solution of order N at quasimomentum k is u(g, v) = e^{i k.g} times a
//! vector polynomial in the deck coordinate g of degree at most N. Two
//! independent routes count them:
//!
//!  * the dispatch route walks the Fermi set, expands the dispersion at each
//!    point, and applies the polynomial-space dimension count (closed
//!    formula when the leading part is nondegenerate, an explicit truncated
//!    block kernel otherwise);
//!  * the ansatz route substitutes the polynomial ansatz into the operator
//!    directly and reads the kernel dimension of the resulting finite system.
//!
//! The ansatz route never looks at the dispersion and is the ground truth
//! the dispatch route is checked against. Membership of a concrete window
//! function in the order-N solution space is also testable without any
//! coefficients, through iterated twisted differences.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::json;

use crate::fermi::{real_fermi_surface, real_fermi_surface_at, FermiVerdict};
use crate::linalg::svd;
use crate::localdata::taylor_expand_seeded;
use crate::model::{apply_operator, binomial, validate_operator, PeriodicOperator, WindowFunction};
use crate::polyalg::{dim_formula, lambda_n_kernel, PolySpaceBasis};
use crate::tol;
use crate::{Error, Result};

type C = Complex64;

/// e^{i k.g}, with exact signs when every active component of k is 0 or pi.
/// Integer-weight operators at those quasimomenta then produce residuals
/// that are exactly zero in floating point, not merely small.
fn phase(k: &[f64], g: &[i64]) -> C {
    let mut acc = C::new(1.0, 0.0);
    for (&ki, &gi) in k.iter().zip(g) {
        if ki == 0.0 || gi == 0 {
            continue;
        }
        if ki.abs() == std::f64::consts::PI {
            if gi % 2 != 0 {
                acc = -acc;
            }
        } else {
            acc *= C::from_polar(1.0, ki * gi as f64);
        }
    }
    acc
}

fn int_pow(base: i64, exp: usize) -> f64 {
    (base as f64).powi(exp as i32)
}

fn multi_binomial(upper: &[usize], lower: &[usize]) -> f64 {
    upper.iter().zip(lower).map(|(&u, &l)| binomial(u as i64, l as i64) as f64).product()
}

/// One polynomial-growth solution: coefficients of the deck polynomial,
/// keyed by monomial, one complex value per vertex.
#[derive(Debug, Clone)]
pub struct FloquetSolution {
    pub k: Vec<f64>,
    pub order: usize,
    pub coeffs: BTreeMap<Vec<usize>, Vec<C>>,
}

impl FloquetSolution {
    pub fn evaluate(&self, g: &[i64], v: usize) -> C {
        let mut poly = C::new(0.0, 0.0);
        for (mono, values) in &self.coeffs {
            let w: f64 = mono.iter().zip(g).map(|(&e, &gi)| int_pow(gi, e)).product();
            poly += values[v] * w;
        }
        poly * phase(&self.k, g)
    }

    pub fn materialize(&self, radius: i64, vertices: usize) -> WindowFunction {
        let n = self.k.len();
        let mut u = WindowFunction::centered(n, radius, vertices);
        for g in u.points() {
            for v in 0..vertices {
                u.set(&g, v, self.evaluate(&g, v));
            }
        }
        u
    }

    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: Vec<serde_json::Value> = self
            .coeffs
            .iter()
            .map(|(mono, values)| {
                let vals: Vec<[f64; 2]> = values.iter().map(|c| [c.re, c.im]).collect();
                json!({ "mono": mono, "values": vals })
            })
            .collect();
        json!({ "k": self.k, "order": self.order, "coeffs": coeffs })
    }
}

/// All order-N solutions at one quasimomentum, by direct substitution.
///
/// Writing u = e^{i k.g} sum_j g^j p_j and shifting through a term with
/// offset s expands (g + s)^j by the binomial theorem, so the operator
/// becomes a square system on the coefficient stack: entry at output
/// (beta, v), input (j, v') is
///
/// ```text
/// sum over terms (v -> v', s, w) of  w e^{i k.s} C(j, beta) s^{j - beta}
///   minus  shift when (beta, v) == (j, v').
/// ```
///
/// The kernel of that system is exactly the order-N solution space.
pub fn build_floquet_solutions(
    op: &PeriodicOperator,
    k: &[f64],
    order: usize,
) -> Result<Vec<FloquetSolution>> {
    let report = validate_operator(op);
    if !report.valid {
        return Err(Error::InvalidOperator(report.errors.join("; ")));
    }
    if k.len() != op.rank {
        return Err(Error::ShapeMismatch(format!(
            "quasimomentum has rank {}, operator has rank {}",
            k.len(),
            op.rank
        )));
    }
    let m = op.cell_size();
    let basis = PolySpaceBasis::new(op.rank, m, order);
    let size = basis.len();
    let mut sys = crate::linalg::CMat::zeros(size, size);
    for (row, (beta, v)) in basis.items.iter().enumerate() {
        for (col, (j, vp)) in basis.items.iter().enumerate() {
            let mut acc = C::new(0.0, 0.0);
            if j.iter().zip(beta).all(|(a, b)| a >= b) {
                let comb = multi_binomial(j, beta);
                for t in &op.terms {
                    if t.from != *v || t.to != *vp {
                        continue;
                    }
                    let spow: f64 = t
                        .shift
                        .iter()
                        .zip(j.iter().zip(beta))
                        .map(|(&si, (&ji, &bi))| int_pow(si, ji - bi))
                        .product();
                    acc += t.weight * phase(k, &t.shift) * comb * spow;
                }
            }
            if beta == j && v == vp {
                acc -= C::new(op.energy_shift, 0.0);
            }
            sys[(row, col)] = acc;
        }
    }

    // At a refined (not exact) Fermi point the would-be kernel singular
    // values sit at the refinement error, far below this absolute cut, while
    // genuine constraints stay at the scale of the weights. Demand a decade
    // of separation so an ambiguous split fails loudly instead of silently.
    let (_, s, vmat) = svd(&sys);
    let smax = s.first().copied().unwrap_or(0.0);
    let cut = 1e-6 * smax.max(1.0);
    if s.iter().any(|&x| x > cut && x < 10.0 * cut) {
        return Err(Error::Numerical(format!(
            "ansatz system rank is ambiguous near cut {cut:.2e}"
        )));
    }
    let kernel_dim = s.iter().filter(|&&x| x <= cut).count() + (vmat.cols - s.len());
    let mut out = Vec::with_capacity(kernel_dim);
    for col in vmat.cols - kernel_dim..vmat.cols {
        let mut coeffs: BTreeMap<Vec<usize>, Vec<C>> = BTreeMap::new();
        for (i, (mono, comp)) in basis.items.iter().enumerate() {
            let val = vmat[(i, col)];
            if val.norm() != 0.0 {
                coeffs.entry(mono.clone()).or_insert_with(|| vec![C::new(0.0, 0.0); m])[*comp] =
                    val;
            }
        }
        out.push(FloquetSolution { k: k.to_vec(), order, coeffs });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct SolutionCheck {
    pub residual: f64,
    pub growth_exponent: f64,
}

/// Apply the operator to the materialized solution and measure the largest
/// residual entry, plus an empirical growth order read off dyadic shells.
pub fn verify_solution(
    op: &PeriodicOperator,
    sol: &FloquetSolution,
    radius: i64,
) -> Result<SolutionCheck> {
    let u = sol.materialize(radius, op.cell_size());
    let pu = apply_operator(op, &u)?;
    let residual = pu.max_abs();

    let shell_sup = |r: i64| -> f64 {
        let mut sup = 0.0f64;
        for g in u.points() {
            if g.iter().map(|x| x.abs()).max().unwrap_or(0) == r {
                for v in 0..op.cell_size() {
                    sup = sup.max(u.get(&g, v).norm());
                }
            }
        }
        sup
    };
    let outer = shell_sup(radius);
    let inner = shell_sup(radius / 2);
    let growth_exponent = if outer > 0.0 && inner > 0.0 {
        (outer / inner).log2() / (radius as f64 / (radius / 2) as f64).log2()
    } else {
        0.0
    };
    Ok(SolutionCheck { residual, growth_exponent })
}

/// e^{-i k.step} u(x + step) - u(x), on the largest window where x + step
/// stays inside.
pub fn twisted_difference(u: &WindowFunction, k: &[f64], step: &[i64]) -> Result<WindowFunction> {
    let n = u.lo.len();
    if k.len() != n || step.len() != n {
        return Err(Error::ShapeMismatch(
            "twist step and quasimomentum must match the window rank".into(),
        ));
    }
    let mut lo = u.lo.clone();
    let mut hi = u.hi.clone();
    for i in 0..n {
        lo[i] = lo[i].max(u.lo[i] - step[i]);
        hi[i] = hi[i].min(u.hi[i] - step[i]);
    }
    let twist = phase(k, step).conj();
    let mut out = WindowFunction::new(lo, hi, u.m)?;
    for g in out.points() {
        let shifted: Vec<i64> = g.iter().zip(step).map(|(a, b)| a + b).collect();
        for v in 0..u.m {
            out.set(&g, v, twist * u.get(&shifted, v) - u.get(&g, v));
        }
    }
    Ok(out)
}

/// Compose twisted differences along the listed steps, left to right.
pub fn iterated_difference(
    u: &WindowFunction,
    k: &[f64],
    steps: &[Vec<i64>],
) -> Result<WindowFunction> {
    let mut cur = u.clone();
    for step in steps {
        cur = twisted_difference(&cur, k, step)?;
    }
    Ok(cur)
}

fn axis_multisets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, n: usize, size: usize, from: usize) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for axis in from..n {
            cur.push(axis);
            rec(out, cur, n, size, axis);
            cur.pop();
        }
    }
    rec(&mut out, &mut cur, n, size, 0);
    out
}

/// Is u an order-N solution shape at quasimomentum k? True exactly when
/// every iterated twisted difference of order N + 1 along generator
/// directions vanishes on the shrunken window.
pub fn floquet_order_test(u: &WindowFunction, k: &[f64], order: usize) -> Result<bool> {
    let n = u.lo.len();
    let tol_abs = tol::TOL_RESIDUAL * u.max_abs().max(1.0);
    for multiset in axis_multisets(n, order + 1) {
        let steps: Vec<Vec<i64>> = multiset
            .iter()
            .map(|&axis| {
                let mut e = vec![0i64; n];
                e[axis] = 1;
                e
            })
            .collect();
        let diff = iterated_difference(u, k, &steps)?;
        if diff.max_abs() > tol_abs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiouvilleVerdict {
    /// Empty real Fermi set: only the zero solution at any order.
    Vacuous,
    /// Finite Fermi set, dimensions computed point by point.
    Computed,
    /// The finiteness hypothesis looks violated; no dimension is reported.
    HypothesesFail,
}

#[derive(Debug, Clone)]
pub struct PointBreakdown {
    pub k: Vec<f64>,
    pub r_geom: usize,
    pub r_alg: usize,
    pub l0: Option<usize>,
    /// Which counting path produced the contributions: "formula" when the
    /// leading part is nondegenerate, "kernel" for the explicit truncated
    /// block system, "ansatz" when the point itself is degenerate.
    pub method: &'static str,
    pub contributions: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct LiouvilleReport {
    pub verdict: LiouvilleVerdict,
    pub n_max: usize,
    pub d: Vec<usize>,
    pub oracle_d: Vec<usize>,
    pub points: Vec<PointBreakdown>,
    pub note: Option<String>,
}

impl LiouvilleReport {
    pub fn to_json(&self) -> serde_json::Value {
        let verdict = match self.verdict {
            LiouvilleVerdict::Vacuous => "vacuous",
            LiouvilleVerdict::Computed => "computed",
            LiouvilleVerdict::HypothesesFail => "hypotheses_fail",
        };
        let points: Vec<serde_json::Value> = self
            .points
            .iter()
            .map(|p| {
                json!({
                    "k": p.k,
                    "r_geom": p.r_geom,
                    "r_alg": p.r_alg,
                    "l0": p.l0,
                    "method": p.method,
                    "contributions": p.contributions,
                })
            })
            .collect();
        json!({
            "verdict": verdict,
            "n_max": self.n_max,
            "d": self.d,
            "oracle_d": self.oracle_d,
            "points": points,
            "note": self.note,
        })
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        match self.verdict {
            LiouvilleVerdict::Vacuous => {
                out.push_str("verdict: vacuous (empty real Fermi set)\n");
            }
            LiouvilleVerdict::Computed => out.push_str("verdict: computed\n"),
            LiouvilleVerdict::HypothesesFail => {
                out.push_str("verdict: hypotheses fail\n");
                if let Some(note) = &self.note {
                    out.push_str(&format!("  {note}\n"));
                }
                return out;
            }
        }
        out.push_str("order   dimension   ansatz\n");
        for n in 0..=self.n_max {
            out.push_str(&format!("{:<7} {:<11} {}\n", n, self.d[n], self.oracle_d[n]));
        }
        for p in &self.points {
            out.push_str(&format!(
                "point k = {:?}: r_geom = {}, r_alg = {}, l0 = {}, method = {}\n",
                p.k,
                p.r_geom,
                p.r_alg,
                p.l0.map_or("-".to_string(), |l| l.to_string()),
                p.method
            ));
        }
        out
    }
}

/// Dimension table of the order-N solution spaces for N = 0..=n_max, with
/// the independent ansatz count alongside.
pub fn liouville_dimension(op: &PeriodicOperator, n_max: usize) -> Result<LiouvilleReport> {
    liouville_dimension_seeded(op, n_max, 0)
}

/// [`liouville_dimension`] with an explicit seed for the nondegeneracy
/// sampling inside the Taylor step.
pub fn liouville_dimension_seeded(
    op: &PeriodicOperator,
    n_max: usize,
    seed: u64,
) -> Result<LiouvilleReport> {
    liouville_dimension_at(op, n_max, seed, None)
}

/// [`liouville_dimension_seeded`] with an explicit Fermi scan resolution
/// (`None` picks the rank-dependent default).
pub fn liouville_dimension_at(
    op: &PeriodicOperator,
    n_max: usize,
    seed: u64,
    grid_res: Option<usize>,
) -> Result<LiouvilleReport> {
    let fermi = match grid_res {
        Some(res) => real_fermi_surface_at(op, res)?,
        None => real_fermi_surface(op)?,
    };
    match fermi.verdict {
        FermiVerdict::Empty { .. } => Ok(LiouvilleReport {
            verdict: LiouvilleVerdict::Vacuous,
            n_max,
            d: vec![0; n_max + 1],
            oracle_d: vec![0; n_max + 1],
            points: Vec::new(),
            note: None,
        }),
        FermiVerdict::LikelyPositiveDimensional { diagnostics } => Ok(LiouvilleReport {
            verdict: LiouvilleVerdict::HypothesesFail,
            n_max,
            d: Vec::new(),
            oracle_d: Vec::new(),
            points: Vec::new(),
            note: Some(diagnostics),
        }),
        FermiVerdict::Finite { points } => {
            let mut breakdowns = Vec::with_capacity(points.len());
            let mut d = vec![0usize; n_max + 1];
            let mut oracle_d = vec![0usize; n_max + 1];
            for p in &points {
                let oracle: Vec<usize> = (0..=n_max)
                    .map(|order| build_floquet_solutions(op, &p.k, order).map(|s| s.len()))
                    .collect::<Result<_>>()?;
                for (acc, v) in oracle_d.iter_mut().zip(&oracle) {
                    *acc += v;
                }
                let breakdown = if p.r_geom != p.r_alg {
                    PointBreakdown {
                        k: p.k.clone(),
                        r_geom: p.r_geom,
                        r_alg: p.r_alg,
                        l0: None,
                        method: "ansatz",
                        contributions: oracle,
                    }
                } else {
                    let data =
                        taylor_expand_seeded(op, &p.k, tol::L_MAX, tol::TOL_TAYLOR_ZERO, seed)?;
                    if data.nondegenerate {
                        let contributions = (0..=n_max)
                            .map(|order| dim_formula(op.rank, order, data.r, data.l0))
                            .collect();
                        PointBreakdown {
                            k: p.k.clone(),
                            r_geom: p.r_geom,
                            r_alg: p.r_alg,
                            l0: Some(data.l0),
                            method: "formula",
                            contributions,
                        }
                    } else {
                        let contributions = (0..=n_max)
                            .map(|order| lambda_n_kernel(&data.taylor, order).map(|(dim, _)| dim))
                            .collect::<Result<_>>()?;
                        PointBreakdown {
                            k: p.k.clone(),
                            r_geom: p.r_geom,
                            r_alg: p.r_alg,
                            l0: Some(data.l0),
                            method: "kernel",
                            contributions,
                        }
                    }
                };
                for (acc, v) in d.iter_mut().zip(&breakdown.contributions) {
                    *acc += v;
                }
                breakdowns.push(breakdown);
            }
            Ok(LiouvilleReport {
                verdict: LiouvilleVerdict::Computed,
                n_max,
                d,
                oracle_d,
                points: breakdowns,
                note: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::*;
    use crate::model::{q_dim, Term};
    use crate::polyalg::mono_degree;
    use std::f64::consts::PI;

    fn solution_from(k: Vec<f64>, order: usize, entries: &[(&[usize], &[f64])]) -> FloquetSolution {
        let coeffs = entries
            .iter()
            .map(|(mono, vals)| {
                (mono.to_vec(), vals.iter().map(|&v| C::new(v, 0.0)).collect::<Vec<_>>())
            })
            .collect();
        FloquetSolution { k, order, coeffs }
    }

    #[test]
    fn bundled_dimension_tables_match_both_routes() {
        let expected: &[(&str, Vec<usize>)] = &[
            ("z1_laplacian", vec![1, 2, 2, 2, 2]),
            ("z2_laplacian", vec![1, 3, 5, 7, 9]),
            ("cos_band", vec![2, 2, 2, 2, 2]),
            ("biharmonic_chain", vec![1, 2, 3, 4, 4]),
            ("ssh_dimer", vec![2, 2, 2, 2, 2]),
            ("drifted_walk", vec![1, 1, 1, 1, 1]),
        ];
        for (name, op) in bundled() {
            let want = &expected.iter().find(|(n, _)| *n == name).unwrap().1;
            let report = liouville_dimension(&op, 4).unwrap();
            assert_eq!(report.verdict, LiouvilleVerdict::Computed, "{name}");
            assert_eq!(&report.d, want, "{name} dimension table");
            assert_eq!(&report.oracle_d, want, "{name} ansatz table");
            // Monotone in the order, and bounded by multiplicity times the
            // full polynomial dimension.
            for n in 1..report.d.len() {
                assert!(report.d[n] >= report.d[n - 1], "{name} monotone");
            }
            let d0 = report.d[0];
            for (n, &dn) in report.d.iter().enumerate() {
                assert!(dn <= d0 * q_dim(op.rank, n as i64), "{name} bound");
            }
        }
    }

    #[test]
    fn chain_solutions_are_exact_in_floating_point() {
        let op = z1_laplacian(0.0);
        for sol in [
            solution_from(vec![0.0], 0, &[(&[0], &[1.0])]),
            solution_from(vec![0.0], 1, &[(&[1], &[1.0])]),
        ] {
            let check = verify_solution(&op, &sol, 10).unwrap();
            assert_eq!(check.residual, 0.0);
        }
    }

    #[test]
    fn biharmonic_cubic_family_is_exact() {
        let op = biharmonic_chain(0.0);
        for (order, mono) in [(0usize, [0usize]), (1, [1]), (2, [2]), (3, [3])] {
            let sol = solution_from(vec![0.0], order, &[(&mono, &[1.0])]);
            let check = verify_solution(&op, &sol, 10).unwrap();
            assert_eq!(check.residual, 0.0, "g^{}", mono[0]);
        }
    }

    #[test]
    fn dimer_cell_vectors_at_pi_are_exact() {
        let op = ssh_dimer(1.0, 1.0, 0.0);
        for vals in [[1.0, 0.0], [0.0, 1.0]] {
            let sol = solution_from(vec![PI], 0, &[(&[0], &vals)]);
            let check = verify_solution(&op, &sol, 10).unwrap();
            assert_eq!(check.residual, 0.0);
        }
    }

    #[test]
    fn plane_quadratic_space_has_dimension_five() {
        let op = z2_laplacian(0.0);
        let sols = build_floquet_solutions(&op, &[0.0, 0.0], 2).unwrap();
        assert_eq!(sols.len(), 5);
        for sol in &sols {
            let check = verify_solution(&op, sol, 10).unwrap();
            assert!(check.residual <= tol::TOL_RESIDUAL);
        }
    }

    #[test]
    fn quadratic_misses_the_chain_kernel_by_two() {
        let op = z1_laplacian(0.0);
        let sol = solution_from(vec![0.0], 2, &[(&[2], &[1.0])]);
        let check = verify_solution(&op, &sol, 10).unwrap();
        assert_eq!(check.residual, 2.0);
    }

    #[test]
    fn order_test_passes_at_the_exact_order_and_fails_below() {
        let sol = solution_from(vec![0.0], 2, &[(&[2], &[1.0])]);
        let u = sol.materialize(12, 1);
        assert!(floquet_order_test(&u, &[0.0], 2).unwrap());
        assert!(!floquet_order_test(&u, &[0.0], 1).unwrap());
        assert!(floquet_order_test(&u, &[0.0], 3).unwrap());
    }

    #[test]
    fn exponential_growth_fails_every_order() {
        let mut u = WindowFunction::centered(1, 10, 1);
        for g in u.points() {
            u.set(&g, 0, C::new(2.0f64.powi(g[0] as i32), 0.0));
        }
        for order in 0..=4 {
            assert!(!floquet_order_test(&u, &[0.0], order).unwrap());
        }
    }

    #[test]
    fn twist_annihilates_its_own_plane_wave() {
        let k = [0.7];
        let mut u = WindowFunction::centered(1, 8, 1);
        for g in u.points() {
            u.set(&g, 0, C::from_polar(1.0, 0.7 * g[0] as f64));
        }
        let d = twisted_difference(&u, &k, &[1]).unwrap();
        assert!(d.max_abs() < 1e-14);
        // And with the wrong twist it does not vanish.
        let d_wrong = twisted_difference(&u, &[0.2], &[1]).unwrap();
        assert!(d_wrong.max_abs() > 0.1);
    }

    #[test]
    fn growth_exponent_tracks_the_degree() {
        let op = biharmonic_chain(0.0);
        let cubic = solution_from(vec![0.0], 3, &[(&[3], &[1.0])]);
        let check = verify_solution(&op, &cubic, 16).unwrap();
        assert!((check.growth_exponent - 3.0).abs() < 0.05);
        let flat = solution_from(vec![0.0], 0, &[(&[0], &[1.0])]);
        let check = verify_solution(&op, &flat, 16).unwrap();
        assert_eq!(check.growth_exponent, 0.0);
    }

    #[test]
    fn shifted_chain_is_vacuous() {
        let report = liouville_dimension(&z1_laplacian(-5.0), 3).unwrap();
        assert_eq!(report.verdict, LiouvilleVerdict::Vacuous);
        assert_eq!(report.d, vec![0, 0, 0, 0]);
        assert_eq!(report.oracle_d, vec![0, 0, 0, 0]);
    }

    #[test]
    fn curve_spectrum_reports_failed_hypotheses() {
        let report = liouville_dimension(&z2_laplacian(2.0), 2).unwrap();
        assert_eq!(report.verdict, LiouvilleVerdict::HypothesesFail);
        assert!(report.d.is_empty());
        assert!(report.note.is_some());
    }

    #[test]
    fn upper_triangular_coupling_uses_ansatz_route() {
        // Two decoupled chains with a one-way constant coupling: the Bloch
        // matrix at k = 0 is a Jordan block on top of an isolated Fermi
        // point, so the dispatch must fall back to the ansatz count.
        let op = PeriodicOperator::new(
            1,
            vec!["a".into(), "b".into()],
            vec![
                Term { from: 0, to: 0, shift: vec![0], weight: C::new(2.0, 0.0) },
                Term { from: 0, to: 0, shift: vec![1], weight: C::new(-1.0, 0.0) },
                Term { from: 0, to: 0, shift: vec![-1], weight: C::new(-1.0, 0.0) },
                Term { from: 1, to: 1, shift: vec![0], weight: C::new(2.0, 0.0) },
                Term { from: 1, to: 1, shift: vec![1], weight: C::new(-1.0, 0.0) },
                Term { from: 1, to: 1, shift: vec![-1], weight: C::new(-1.0, 0.0) },
                Term { from: 0, to: 1, shift: vec![0], weight: C::new(1.0, 0.0) },
            ],
            0.0,
        )
        .unwrap();
        let report = liouville_dimension(&op, 4).unwrap();
        assert_eq!(report.verdict, LiouvilleVerdict::Computed);
        assert_eq!(report.points.len(), 1);
        assert_eq!(report.points[0].method, "ansatz");
        assert_eq!((report.points[0].r_geom, report.points[0].r_alg), (1, 2));
        assert_eq!(report.d, vec![1, 2, 3, 4, 4]);
        assert_eq!(report.oracle_d, report.d);
    }

    #[test]
    fn ansatz_solutions_satisfy_the_order_test() {
        let op = z2_laplacian(0.0);
        let sols = build_floquet_solutions(&op, &[0.0, 0.0], 2).unwrap();
        for sol in &sols {
            let u = sol.materialize(10, 1);
            assert!(floquet_order_test(&u, &sol.k, 2).unwrap());
        }
    }

    #[test]
    fn report_json_shape() {
        let report = liouville_dimension(&z1_laplacian(0.0), 2).unwrap();
        let v = report.to_json();
        assert_eq!(v["verdict"], "computed");
        assert_eq!(v["d"], json!([1, 2, 2]));
        assert_eq!(v["oracle_d"], json!([1, 2, 2]));
        let pts = v["points"].as_array().unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0]["method"], "formula");
        assert_eq!(pts[0]["l0"], 2);
        let table = report.to_table();
        assert!(table.contains("verdict: computed"));
        assert!(table.contains("order"));
    }

    #[test]
    fn degree_helper_consistency() {
        // The basis the ansatz runs over matches the generic dimension count
        // entering the dispatch.
        for n in 1..=3usize {
            for order in 0..=4usize {
                let basis = PolySpaceBasis::new(n, 1, order);
                assert_eq!(basis.len(), q_dim(n, order as i64));
                assert!(basis.items.iter().all(|(mono, _)| mono_degree(mono) <= order));
            }
        }
    }
}
