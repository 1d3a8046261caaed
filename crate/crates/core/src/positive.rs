//! Principal eigenvalue analysis over real exponential twists.
//!
//! For operators with the sign structure L = D - W (real weights, every
//! moving or coupling weight nonpositive), substituting the exponential
//! ansatz u(g, v) = e^{xi.g} phi(v) yields the real matrix family
//!
//! ```text
//! L(xi)[v, v'] = sum over terms (v -> v', s, w) of w e^{xi.s}  -  shift * I,
//! ```
//!
//! whose eigenvalue with a positive eigenvector, Lambda(xi), is concave in
//! xi. Its value at zero and its supremum Lambda_0 split the positive-weight
//! Liouville problem into the vacuous, noncritical, and critical cases, each
//! with a closed-form dimension count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{char_poly, poly_roots, CMat};
use crate::model::{h_dim, q_dim, validate_operator, PeriodicOperator};
use crate::tol;
use crate::{Error, Result};

type C = Complex64;

/// L(xi) as a real matrix (stored complex for the shared linear algebra;
/// imaginary parts are zero by the positivity validation).
pub fn twisted_matrix(op: &PeriodicOperator, xi: &[f64]) -> CMat {
    assert_eq!(xi.len(), op.rank, "twist of wrong rank");
    let m = op.cell_size();
    let mut l = CMat::zeros(m, m);
    for t in &op.terms {
        let arg: f64 = xi.iter().zip(&t.shift).map(|(x, &s)| x * s as f64).sum();
        l[(t.from, t.to)] += t.weight * arg.exp();
    }
    for v in 0..m {
        l[(v, v)] -= C::new(op.energy_shift, 0.0);
    }
    l
}

fn ensure_positive_form(op: &PeriodicOperator) -> Result<()> {
    let report = validate_operator(op);
    if !report.valid {
        return Err(Error::InvalidOperator(report.errors.join("; ")));
    }
    if !report.positivity_structure {
        return Err(Error::NotPositiveForm(
            "off-diagonal weights must be real and nonpositive".into(),
        ));
    }
    if !strongly_connected(op) {
        return Err(Error::Reducible);
    }
    Ok(())
}

/// The coupling graph must be strongly connected for the principal pair to
/// be simple and strictly positive.
fn strongly_connected(op: &PeriodicOperator) -> bool {
    let m = op.cell_size();
    if m <= 1 {
        return true;
    }
    let mut fwd = vec![vec![false; m]; m];
    let mut bwd = vec![vec![false; m]; m];
    for t in &op.terms {
        if t.from != t.to && t.weight.norm() > 0.0 {
            fwd[t.from][t.to] = true;
            bwd[t.to][t.from] = true;
        }
    }
    let reach_all = |adj: &Vec<Vec<bool>>| -> bool {
        let mut seen = vec![false; m];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in 0..m {
                if adj[v][w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach_all(&fwd) && reach_all(&bwd)
}

#[derive(Debug, Clone)]
pub struct PrincipalPair {
    pub lambda: f64,
    /// Strictly positive, unit-norm eigenvector of L(xi).
    pub eigenvector: Vec<f64>,
    /// Distance from the dominant eigenvalue of the nonnegative companion
    /// matrix to the rest of its spectrum; positive means the pair is simple.
    pub spectral_gap: f64,
}

/// Lambda(xi) and its eigenvector, by power iteration on the entrywise
/// nonnegative companion B = d_max I - L(xi). The diagonal of B is at least
/// one by construction, so the iteration cannot cycle.
pub fn principal_eigenvalue(op: &PeriodicOperator, xi: &[f64]) -> Result<PrincipalPair> {
    ensure_positive_form(op)?;
    if xi.len() != op.rank {
        return Err(Error::ShapeMismatch(format!(
            "twist has rank {}, operator has rank {}",
            xi.len(),
            op.rank
        )));
    }
    let l = twisted_matrix(op, xi);
    let m = l.rows;
    let d_max = (0..m).map(|v| l[(v, v)].re).fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let b: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let d = if i == j { d_max } else { 0.0 };
                    d - l[(i, j)].re
                })
                .collect()
        })
        .collect();

    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    let mut rho = 0.0;
    let mut converged = false;
    for _ in 0..200_000 {
        let mut bv = vec![0.0f64; m];
        for i in 0..m {
            for j in 0..m {
                bv[i] += b[i][j] * v[j];
            }
        }
        let num: f64 = bv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|x| x * x).sum();
        rho = num / den;
        let resid = bv.iter().zip(&v).map(|(a, b)| (a - rho * b).abs()).fold(0.0, f64::max);
        let norm = bv.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Numerical("companion matrix annihilated the iterate".into()));
        }
        for (vi, bvi) in v.iter_mut().zip(&bv) {
            *vi = bvi / norm;
        }
        if resid <= tol::TOL_POWER * (rho.abs() + 1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("power iteration on the companion matrix stalled".into()));
    }
    if v.iter().sum::<f64>() < 0.0 {
        for vi in v.iter_mut() {
            *vi = -*vi;
        }
    }
    if v.iter().any(|&x| x <= 0.0) {
        return Err(Error::Numerical("principal eigenvector is not strictly positive".into()));
    }

    let bc = CMat::from_fn(m, m, |i, j| C::new(b[i][j], 0.0));
    let mut moduli: Vec<f64> = poly_roots(&char_poly(&bc)).iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let spectral_gap = if moduli.len() > 1 { moduli[0] - moduli[1] } else { moduli[0] };

    Ok(PrincipalPair { lambda: d_max - rho, eigenvector: v, spectral_gap })
}

#[derive(Debug, Clone)]
pub struct LambdaMax {
    pub xi_star: Vec<f64>,
    pub lambda0: f64,
    pub gradient_norm: f64,
    pub concavity_certified: bool,
}

pub fn maximize_lambda(op: &PeriodicOperator) -> Result<LambdaMax> {
    maximize_lambda_from(op, &vec![0.0; op.rank])
}

pub fn maximize_lambda_from(op: &PeriodicOperator, start: &[f64]) -> Result<LambdaMax> {
    maximize_lambda_seeded(op, start, 0)
}

/// Coordinate-wise golden-section ascent of Lambda. Concavity makes each
/// line search global; the expanding bracket walking past the box limit is
/// the signature of a supremum at infinity. `seed` drives the concavity
/// certificate's sample points.
pub fn maximize_lambda_seeded(
    op: &PeriodicOperator,
    start: &[f64],
    seed: u64,
) -> Result<LambdaMax> {
    ensure_positive_form(op)?;
    let n = op.rank;
    if start.len() != n {
        return Err(Error::ShapeMismatch("start twist has the wrong rank".into()));
    }
    let lambda = |xi: &[f64]| -> Result<f64> { Ok(principal_eigenvalue(op, xi)?.lambda) };

    let mut xi = start.to_vec();
    let mut val = lambda(&xi)?;
    for _sweep in 0..200 {
        let before = val;
        for axis in 0..n {
            let (x, v) = line_max(&lambda, &xi, axis)?;
            xi[axis] = x;
            val = v;
        }
        if (val - before).abs() >= 1e-13 * (1.0 + val.abs()) {
            continue;
        }
        // The line searches are value-driven, so they stall on the roundoff
        // plateau around a flat maximum, where the true gradient can still
        // exceed the stopping tolerance. The difference-quotient gradient is
        // accurate far below that plateau, so a few Newton steps on it close
        // the rest of the distance.
        let mut gnorm = grad_norm(&lambda, &xi)?;
        for _polish in 0..30 {
            if gnorm < tol::TOL_ASCENT {
                break;
            }
            let Some(candidate) = newton_step(&lambda, &xi)? else { break };
            let cnorm = grad_norm(&lambda, &candidate)?;
            if cnorm >= gnorm {
                break;
            }
            xi = candidate;
            gnorm = cnorm;
        }
        if gnorm < tol::TOL_ASCENT {
            val = lambda(&xi)?;
            let concavity_certified = midpoint_concavity(&lambda, &xi, seed)?;
            return Ok(LambdaMax {
                xi_star: xi,
                lambda0: val,
                gradient_norm: gnorm,
                concavity_certified,
            });
        }
    }
    Err(Error::NoConvergence("coordinate ascent did not settle".into()))
}

fn grad_norm(f: &impl Fn(&[f64]) -> Result<f64>, x: &[f64]) -> Result<f64> {
    let g = gradient(f, x)?;
    Ok(g.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// One ascent step xi - H^{-1} g from difference-quotient derivatives; None
/// when the Hessian is too degenerate to invert.
fn newton_step(f: &impl Fn(&[f64]) -> Result<f64>, x: &[f64]) -> Result<Option<Vec<f64>>> {
    let n = x.len();
    let g = gradient(f, x)?;
    let h = 1e-4;
    let f0 = f(x)?;
    let mut hess = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        let mut xp = x.to_vec();
        xp[i] += h;
        let mut xm = x.to_vec();
        xm[i] -= h;
        hess[i][i] = (f(&xp)? - 2.0 * f0 + f(&xm)?) / (h * h);
        for j in i + 1..n {
            let mut pp = x.to_vec();
            pp[i] += h;
            pp[j] += h;
            let mut pm = x.to_vec();
            pm[i] += h;
            pm[j] -= h;
            let mut mp = x.to_vec();
            mp[i] -= h;
            mp[j] += h;
            let mut mm = x.to_vec();
            mm[i] -= h;
            mm[j] -= h;
            let v = (f(&pp)? - f(&pm)? - f(&mp)? + f(&mm)?) / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    let hc = CMat::from_fn(n, n, |i, j| C::new(hess[i][j], 0.0));
    let gc: Vec<C> = g.iter().map(|&v| C::new(v, 0.0)).collect();
    let Some(step) = crate::linalg::lu_factor(&hc).solve_vec(&gc) else {
        return Ok(None);
    };
    Ok(Some(x.iter().zip(&step).map(|(xi, s)| xi - s.re).collect()))
}

fn gradient(f: &impl Fn(&[f64]) -> Result<f64>, x: &[f64]) -> Result<Vec<f64>> {
    let h = 1e-6;
    let mut g = Vec::with_capacity(x.len());
    for axis in 0..x.len() {
        let mut xp = x.to_vec();
        xp[axis] += h;
        let mut xm = x.to_vec();
        xm[axis] -= h;
        g.push((f(&xp)? - f(&xm)?) / (2.0 * h));
    }
    Ok(g)
}

/// Global maximum of a concave section: expand the bracket until the middle
/// dominates both ends, then contract by golden section.
fn line_max(f: &impl Fn(&[f64]) -> Result<f64>, xi: &[f64], axis: usize) -> Result<(f64, f64)> {
    let eval = |t: f64| -> Result<f64> {
        let mut p = xi.to_vec();
        p[axis] = t;
        f(&p)
    };
    let x0 = xi[axis];
    let mut h = 1.0;
    let (mut a, mut b) = (x0 - h, x0 + h);
    loop {
        let fm = eval(x0)?;
        if eval(a)? <= fm && eval(b)? <= fm {
            break;
        }
        h *= 2.0;
        a = x0 - h;
        b = x0 + h;
        if a.abs() > tol::ASCENT_BRACKET_LIMIT || b.abs() > tol::ASCENT_BRACKET_LIMIT {
            return Err(Error::NoMaximum { limit: tol::ASCENT_BRACKET_LIMIT });
        }
    }
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > 1e-12 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, eval(x)?))
}

/// Fifty midpoint checks in a unit box around the maximizer; a concave
/// function passes them all up to roundoff.
fn midpoint_concavity(
    f: &impl Fn(&[f64]) -> Result<f64>,
    center: &[f64],
    seed: u64,
) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = center.len();
    for _ in 0..tol::RANDOM_SAMPLES {
        let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..n).map(|i| center[i] + 2.0 * (rng.random::<f64>() - 0.5)).collect()
        };
        let x = sample(&mut rng);
        let y = sample(&mut rng);
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        if f(&mid)? < 0.5 * (f(&x)? + f(&y)?) - 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiouvilleCase {
    Vacuous,
    Noncritical,
    Critical,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub case: LiouvilleCase,
    pub lambda_at_zero: f64,
    pub lambda_max: f64,
    pub xi_star: Vec<f64>,
    /// Dimension table the classification predicts for orders 0..=n_max.
    pub expected_d: Vec<usize>,
    pub note: Option<String>,
}

/// Sort the operator into the three positive-form regimes by the signs of
/// Lambda(0) and Lambda_0, and attach the dimension table each one forces.
pub fn classify_liouville_case(op: &PeriodicOperator, n_max: usize) -> Result<Classification> {
    classify_liouville_case_seeded(op, n_max, 0)
}

/// [`classify_liouville_case`] with an explicit seed for the concavity
/// certificate.
pub fn classify_liouville_case_seeded(
    op: &PeriodicOperator,
    n_max: usize,
    seed: u64,
) -> Result<Classification> {
    let at_zero = principal_eigenvalue(op, &vec![0.0; op.rank])?.lambda;
    let max = maximize_lambda_seeded(op, &vec![0.0; op.rank], seed)?;
    let tol_c = tol::TOL_CLASSIFY * (1.0 + at_zero.abs().max(max.lambda0.abs()));
    if max.lambda0 < -tol_c {
        return Err(Error::NotPositiveForm(format!(
            "the twisted family tops out below zero (Lambda_0 = {:.3e})",
            max.lambda0
        )));
    }
    let n = op.rank;
    let (case, expected_d, note) = if at_zero > tol_c {
        (
            LiouvilleCase::Vacuous,
            vec![0; n_max + 1],
            Some("Lambda(0) > 0: no polynomial-growth solutions at all".to_string()),
        )
    } else if at_zero < -tol_c {
        (
            LiouvilleCase::Vacuous,
            vec![0; n_max + 1],
            Some(
                "Lambda(0) < 0 <= Lambda_0: nothing with positive-form growth; \
                 oscillatory solutions are the Fermi machinery's department"
                    .to_string(),
            ),
        )
    } else if max.lambda0 > tol_c {
        let d = (0..=n_max).map(|o| q_dim(n - 1, o as i64)).collect();
        (LiouvilleCase::Noncritical, d, None)
    } else {
        let d = (0..=n_max).map(|o| h_dim(n, o as i64)).collect();
        (LiouvilleCase::Critical, d, None)
    };
    Ok(Classification {
        case,
        lambda_at_zero: at_zero,
        lambda_max: max.lambda0,
        xi_star: max.xi_star,
        expected_d,
        note,
    })
}

#[derive(Debug, Clone)]
pub struct LambdaProfile {
    /// Sampled rows (xi, Lambda(xi)) along each coordinate axis through the
    /// maximizer.
    pub rows: Vec<(Vec<f64>, f64)>,
    pub lambda0: f64,
    pub xi_star: Vec<f64>,
    pub concavity_certified: bool,
}

pub fn lambda_profile(
    op: &PeriodicOperator,
    range: f64,
    samples_per_axis: usize,
) -> Result<LambdaProfile> {
    lambda_profile_seeded(op, range, samples_per_axis, 0)
}

/// [`lambda_profile`] with an explicit seed for the concavity certificate.
pub fn lambda_profile_seeded(
    op: &PeriodicOperator,
    range: f64,
    samples_per_axis: usize,
    seed: u64,
) -> Result<LambdaProfile> {
    if samples_per_axis < 2 || range.is_nan() || range <= 0.0 {
        return Err(Error::ShapeMismatch(
            "profile needs a positive range and at least two samples".into(),
        ));
    }
    let max = maximize_lambda_seeded(op, &vec![0.0; op.rank], seed)?;
    let mut rows = Vec::new();
    for axis in 0..op.rank {
        for i in 0..samples_per_axis {
            let t = -range + 2.0 * range * i as f64 / (samples_per_axis - 1) as f64;
            let mut xi = max.xi_star.clone();
            xi[axis] += t;
            let lam = principal_eigenvalue(op, &xi)?.lambda;
            rows.push((xi, lam));
        }
    }
    Ok(LambdaProfile {
        rows,
        lambda0: max.lambda0,
        xi_star: max.xi_star,
        concavity_certified: max.concavity_certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::*;
    use crate::liouville::{liouville_dimension, LiouvilleVerdict};
    use crate::model::Term;

    #[test]
    fn chain_profile_is_hyperbolic_cosine() {
        let op = z1_laplacian(0.3);
        for xi in [0.0, 0.5, -0.5, 1.2] {
            let pair = principal_eigenvalue(&op, &[xi]).unwrap();
            let expect = 2.0 - 2.0 * xi.cosh() - 0.3;
            assert!((pair.lambda - expect).abs() < 1e-10, "xi = {xi}");
            assert!(pair.spectral_gap > 0.0);
        }
    }

    #[test]
    fn drifted_walk_maximum_in_closed_form() {
        let op = drifted_walk(0.25, 0.75);
        let max = maximize_lambda(&op).unwrap();
        let lambda0 = 1.0 - 3.0f64.sqrt() / 2.0;
        let xi_star = 0.5 * 3.0f64.ln();
        assert!((max.lambda0 - lambda0).abs() < 1e-6);
        assert!((max.xi_star[0] - xi_star).abs() < 1e-6);
        assert!(max.concavity_certified);
        assert!(max.gradient_norm < tol::TOL_ASCENT);
    }

    #[test]
    fn laplacian_maximum_sits_at_zero() {
        let op = z1_laplacian(0.0);
        let max = maximize_lambda(&op).unwrap();
        assert!(max.lambda0.abs() < 1e-8);
        assert!(max.xi_star[0].abs() < 1e-6);
        let op2 = z2_laplacian(0.0);
        let max2 = maximize_lambda(&op2).unwrap();
        assert!(max2.lambda0.abs() < 1e-8);
    }

    #[test]
    fn classification_trio_with_matching_dimensions() {
        // Vacuous: strictly positive symbol.
        let vac = classify_liouville_case(&z1_laplacian(-1.0), 3).unwrap();
        assert_eq!(vac.case, LiouvilleCase::Vacuous);
        assert!((vac.lambda_at_zero - 1.0).abs() < 1e-9);
        assert_eq!(vac.expected_d, vec![0, 0, 0, 0]);
        let report = liouville_dimension(&z1_laplacian(-1.0), 3).unwrap();
        assert_eq!(report.verdict, LiouvilleVerdict::Vacuous);
        assert_eq!(report.d, vac.expected_d);

        // Noncritical: drift pushes the maximum off zero.
        let non = classify_liouville_case(&drifted_walk(0.25, 0.75), 3).unwrap();
        assert_eq!(non.case, LiouvilleCase::Noncritical);
        assert_eq!(non.expected_d, vec![1, 1, 1, 1]);
        let report = liouville_dimension(&drifted_walk(0.25, 0.75), 3).unwrap();
        assert_eq!(report.d, non.expected_d);

        // Critical: the symmetric chain at exact band edge.
        let crit = classify_liouville_case(&z1_laplacian(0.0), 3).unwrap();
        assert_eq!(crit.case, LiouvilleCase::Critical);
        assert_eq!(crit.expected_d, vec![1, 2, 2, 2]);
        let report = liouville_dimension(&z1_laplacian(0.0), 3).unwrap();
        assert_eq!(report.d, crit.expected_d);
    }

    #[test]
    fn plane_critical_dimensions_are_odd_numbers() {
        let c = classify_liouville_case(&z2_laplacian(0.0), 4).unwrap();
        assert_eq!(c.case, LiouvilleCase::Critical);
        assert_eq!(c.expected_d, vec![1, 3, 5, 7, 9]);
    }

    #[test]
    fn submerged_zero_points_at_the_oscillatory_regime() {
        // Lambda(0) < 0 < Lambda_0: a drift with a small absorbing shift.
        let mut op = drifted_walk(0.25, 0.75);
        op.energy_shift = 0.05;
        let c = classify_liouville_case(&op, 2).unwrap();
        assert_eq!(c.case, LiouvilleCase::Vacuous);
        assert!(c.lambda_at_zero < -1e-3);
        assert!(c.lambda_max > 1e-3);
        assert!(c.note.as_deref().unwrap_or("").contains("Fermi"));
    }

    #[test]
    fn negative_supremum_is_refused() {
        let mut op = drifted_walk(0.25, 0.75);
        op.energy_shift = 0.5;
        let err = classify_liouville_case(&op, 2).unwrap_err();
        assert!(matches!(err, Error::NotPositiveForm(_)));
    }

    #[test]
    fn positive_coupling_weights_are_refused() {
        assert!(matches!(
            principal_eigenvalue(&cos_band(0.0), &[0.0]),
            Err(Error::NotPositiveForm(_))
        ));
        assert!(matches!(
            maximize_lambda(&ssh_dimer(1.0, 1.0, 0.0)),
            Err(Error::NotPositiveForm(_))
        ));
    }

    #[test]
    fn disconnected_cells_are_refused() {
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
            ],
            0.0,
        )
        .unwrap();
        assert!(matches!(principal_eigenvalue(&op, &[0.0]), Err(Error::Reducible)));
    }

    #[test]
    fn one_sided_walk_has_no_maximum() {
        let op = PeriodicOperator::new(
            1,
            vec!["a".into()],
            vec![
                Term { from: 0, to: 0, shift: vec![0], weight: C::new(1.0, 0.0) },
                Term { from: 0, to: 0, shift: vec![1], weight: C::new(-1.0, 0.0) },
            ],
            0.0,
        )
        .unwrap();
        assert!(matches!(maximize_lambda(&op), Err(Error::NoMaximum { .. })));
    }

    #[test]
    fn random_starts_agree_on_the_maximum() {
        let op = drifted_walk(0.25, 0.75);
        let reference = maximize_lambda(&op).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let start = vec![4.0 * (rng.random::<f64>() - 0.5)];
            let max = maximize_lambda_from(&op, &start).unwrap();
            assert!((max.lambda0 - reference.lambda0).abs() < 1e-10);
        }
    }

    #[test]
    fn twist_reversal_preserves_lambda_for_symmetric_ops() {
        let op = z2_laplacian(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let xi: Vec<f64> = (0..2).map(|_| 2.0 * (rng.random::<f64>() - 0.5)).collect();
            let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
            let a = principal_eigenvalue(&op, &xi).unwrap().lambda;
            let b = principal_eigenvalue(&op, &neg).unwrap().lambda;
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn coupled_chain_principal_pair_is_simple_and_positive() {
        // Symmetric two-vertex ladder: eigenvalues of L(0) are 1 and 3, and
        // the positive eigenvector belongs to the smaller one.
        let op = PeriodicOperator::new(
            1,
            vec!["a".into(), "b".into()],
            vec![
                Term { from: 0, to: 0, shift: vec![0], weight: C::new(3.0, 0.0) },
                Term { from: 0, to: 0, shift: vec![1], weight: C::new(-0.5, 0.0) },
                Term { from: 0, to: 0, shift: vec![-1], weight: C::new(-0.5, 0.0) },
                Term { from: 1, to: 1, shift: vec![0], weight: C::new(3.0, 0.0) },
                Term { from: 1, to: 1, shift: vec![1], weight: C::new(-0.5, 0.0) },
                Term { from: 1, to: 1, shift: vec![-1], weight: C::new(-0.5, 0.0) },
                Term { from: 0, to: 1, shift: vec![0], weight: C::new(-1.0, 0.0) },
                Term { from: 1, to: 0, shift: vec![0], weight: C::new(-1.0, 0.0) },
            ],
            0.0,
        )
        .unwrap();
        let pair = principal_eigenvalue(&op, &[0.0]).unwrap();
        assert!((pair.lambda - 1.0).abs() < 1e-9);
        assert!(pair.spectral_gap > 1.0);
        assert!(pair.eigenvector.iter().all(|&x| x > 0.0));
        assert!((pair.eigenvector[0] - pair.eigenvector[1]).abs() < 1e-9);
    }

    #[test]
    fn profile_rows_cover_each_axis() {
        let profile = lambda_profile(&drifted_walk(0.25, 0.75), 1.0, 11).unwrap();
        assert_eq!(profile.rows.len(), 11);
        assert!(profile.concavity_certified);
        // The sampled maximum cannot beat the optimizer's.
        for (_, lam) in &profile.rows {
            assert!(*lam <= profile.lambda0 + 1e-9);
        }
    }
}
