//! Local spectral data of the dispersion at a Fermi point.
//!
//! All of it is built from the dual symbol A(k), the Bloch matrix of the
//! adjoint operator evaluated at -k. For real weights A(k) is the transpose
//! of P(k), and it extends entire in complex quasimomentum, which is what the
//! Taylor machinery below exploits. At a Fermi point k0 the zero eigenvalue
//! cluster of A(k0) carries a Riesz projector Pi(k), a frozen orthonormal
//! frame E for its range, and the r x r family
//!
//! ```text
//! lambda(k) = ( E^H A(k) Pi(k) E )^T,     lambda(k0) = 0,
//! ```
//!
//! whose homogeneous Taylor parts lambda_l at k0 are the input to the
//! polynomial-space dimension counts. Taylor coefficients come from Cauchy
//! quadrature over a small polydisc rather than difference quotients: the
//! integrand is analytic, so every order up to the cap is resolved near
//! machine precision, where real-axis differencing loses the high orders to
//! roundoff. A real-axis difference quotient cross-check survives in the
//! tests as an independent route.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::bloch::bloch_matrix_complex;
use crate::linalg::{char_poly, det, lu_factor, poly_roots, sigma_min, svd, CMat};
use crate::model::{adjoint, validate_operator, PeriodicOperator};
use crate::polyalg::{random_unit_direction, HomogeneousMatrixPoly};
use crate::tol;
use crate::{Error, Result};

type C = Complex64;

/// Riesz projector of the dual symbol onto the eigenvalue cluster inside the
/// origin-centered contour.
#[derive(Debug, Clone)]
pub struct SpectralProjector {
    pub k: Vec<f64>,
    pub matrix: CMat,
    pub contour_radius: f64,
    pub rank: usize,
}

/// Everything order-by-order about the dispersion at one Fermi point.
#[derive(Debug, Clone)]
pub struct LocalSpectralData {
    pub k0: Vec<f64>,
    pub r: usize,
    pub l0: usize,
    pub lambda_l0: HomogeneousMatrixPoly,
    /// Cleaned homogeneous parts of degrees 0..=l_max; part 0 is zero by the
    /// degeneracy check, parts below l0 are zero by construction.
    pub taylor: Vec<HomogeneousMatrixPoly>,
    pub nondegenerate: bool,
}

impl LocalSpectralData {
    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: Vec<serde_json::Value> = self
            .lambda_l0
            .monos()
            .iter()
            .map(|mono| {
                let c = self.lambda_l0.coeff(mono).expect("mono of own degree");
                let matrix: Vec<Vec<[f64; 2]>> = (0..c.rows)
                    .map(|i| (0..c.cols).map(|j| [c[(i, j)].re, c[(i, j)].im]).collect())
                    .collect();
                json!({ "mono": mono, "matrix": matrix })
            })
            .collect();
        json!({
            "k0": self.k0,
            "r": self.r,
            "l0": self.l0,
            "nondegenerate": self.nondegenerate,
            "lambda_l0": { "degree": self.l0, "coeffs": coeffs },
        })
    }
}

fn negate(z: &[C]) -> Vec<C> {
    z.iter().map(|v| -v).collect()
}

fn to_complex(k: &[f64]) -> Vec<C> {
    k.iter().map(|&v| C::new(v, 0.0)).collect()
}

/// Working state for one Fermi point: the dual operator, the contour, and
/// the frozen range frame.
struct Frame {
    dual: PeriodicOperator,
    radius: f64,
    e: CMat,
    r: usize,
    /// Smallest nonzero eigenvalue magnitude of A(k0); None when the whole
    /// spectrum sits in the zero cluster and the contour encloses everything.
    gap: Option<f64>,
    /// Sum of |w| over moving terms and the largest |s|_1, for excursion
    /// bounds when the quasimomentum goes complex.
    moving_weight: f64,
    max_shift: f64,
}

impl Frame {
    fn a_matrix(&self, z: &[C]) -> CMat {
        bloch_matrix_complex(&self.dual, &negate(z))
    }

    fn projector_of(&self, a: &CMat) -> Result<CMat> {
        contour_projector(a, self.radius)
    }

    /// lambda(z) with a cluster-containment check: if the trace of the
    /// projector drifts off the integer r, eigenvalues crossed the contour.
    fn lambda(&self, z: &[C]) -> Result<CMat> {
        let a = self.a_matrix(z);
        let pi = self.projector_of(&a)?;
        let tr = trace(&pi);
        if (tr.re - self.r as f64).abs() > 0.1 || tr.im.abs() > 0.1 {
            return Err(Error::ContourBreach(format!(
                "projector trace {:.3}{:+.3}i, expected {}",
                tr.re, tr.im, self.r
            )));
        }
        let ap = a.mul(&pi);
        let m = self.e.rows;
        let small = CMat::from_fn(self.r, self.r, |i, j| {
            let mut acc = C::new(0.0, 0.0);
            for p in 0..m {
                for q in 0..m {
                    acc += self.e[(p, i)].conj() * ap[(p, q)] * self.e[(q, j)];
                }
            }
            acc
        });
        // (i, j) entry of the result is small[(j, i)]: the transpose.
        Ok(CMat::from_fn(self.r, self.r, |i, j| small[(j, i)]))
    }

    fn excursion_bound(&self, rho: f64) -> f64 {
        self.moving_weight * ((rho * self.max_shift).exp() - 1.0)
    }

    /// Polydisc radius keeping the zero cluster strictly inside the contour:
    /// the excursion of A over the polydisc stays under a quarter of the gap.
    fn polydisc_radius(&self) -> f64 {
        let cap = 0.1;
        match self.gap {
            None => cap,
            Some(gap) => {
                if self.moving_weight == 0.0 || self.max_shift == 0.0 {
                    return cap;
                }
                let safe = (1.0 + gap / (4.0 * self.moving_weight)).ln() / self.max_shift;
                cap.min(safe)
            }
        }
    }
}

fn trace(m: &CMat) -> C {
    (0..m.rows).map(|i| m[(i, i)]).sum()
}

/// Trapezoid discretization of the Riesz integral over the circle |zeta| =
/// radius; exact up to the exponential accuracy of the trapezoid rule on
/// periodic analytic integrands.
fn contour_projector(a: &CMat, radius: f64) -> Result<CMat> {
    let m = a.rows;
    let q = tol::CONTOUR_NODES;
    let mut pi = CMat::zeros(m, m);
    for node in 0..q {
        let theta = 2.0 * std::f64::consts::PI * node as f64 / q as f64;
        let zeta = C::from_polar(radius, theta);
        let shifted = CMat::from_fn(m, m, |i, j| {
            let d = if i == j { zeta } else { C::new(0.0, 0.0) };
            d - a[(i, j)]
        });
        let inv = lu_factor(&shifted).solve_mat(&CMat::identity(m)).ok_or_else(|| {
            Error::ContourBreach(format!(
                "resolvent singular on the contour at radius {radius:.3e}"
            ))
        })?;
        for i in 0..m {
            for j in 0..m {
                pi[(i, j)] += zeta * inv[(i, j)] / q as f64;
            }
        }
    }
    Ok(pi)
}

fn cluster_split(a: &CMat) -> (usize, Option<f64>) {
    let eigs = poly_roots(&char_poly(a));
    let cluster_tol = tol::CLUSTER_RADIUS_REL * (1.0 + a.frobenius());
    let r = eigs.iter().filter(|z| z.norm() <= cluster_tol).count();
    let gap = eigs
        .iter()
        .map(|z| z.norm())
        .filter(|&n| n > cluster_tol)
        .fold(None, |acc: Option<f64>, n| Some(acc.map_or(n, |a| a.min(n))));
    (r, gap)
}

fn build_frame(op: &PeriodicOperator, k0: &[f64]) -> Result<Frame> {
    let report = validate_operator(op);
    if !report.valid {
        return Err(Error::InvalidOperator(report.errors.join("; ")));
    }
    if k0.len() != op.rank {
        return Err(Error::ShapeMismatch(format!(
            "base point has rank {}, operator has rank {}",
            k0.len(),
            op.rank
        )));
    }
    let dual = adjoint(op);
    let mut moving_weight = 0.0f64;
    let mut max_shift = 0.0f64;
    for t in &op.terms {
        let l1: i64 = t.shift.iter().map(|s| s.abs()).sum();
        if l1 > 0 {
            moving_weight += t.weight.norm();
            max_shift = max_shift.max(l1 as f64);
        }
    }
    let mut frame = Frame {
        dual,
        radius: 0.0,
        e: CMat::zeros(0, 0),
        r: 0,
        gap: None,
        moving_weight,
        max_shift,
    };
    let a0 = frame.a_matrix(&to_complex(k0));
    let (r, gap) = cluster_split(&a0);
    if r == 0 {
        return Err(Error::NotFermiPoint { k: k0.to_vec(), sigma_min: sigma_min(&a0) });
    }
    frame.r = r;
    frame.gap = gap;
    frame.radius = match gap {
        Some(g) => g / 2.0,
        // Whole spectrum in the cluster: any circle beyond every eigenvalue
        // works, padded for the later complex excursions.
        None => a0.frobenius() + 1.0 + frame.excursion_bound(0.1),
    };

    // Contract the contour until the trace locks onto the cluster count.
    let mut pi0 = frame.projector_of(&a0)?;
    for _ in 0..3 {
        let tr = trace(&pi0);
        if (tr.re - r as f64).abs() <= 0.1 && tr.im.abs() <= 0.1 {
            break;
        }
        frame.radius /= 2.0;
        pi0 = frame.projector_of(&a0)?;
    }
    let tr = trace(&pi0);
    if (tr.re - r as f64).abs() > 0.1 || tr.im.abs() > 0.1 {
        return Err(Error::ContourBreach(format!(
            "projector trace {:.3}{:+.3}i never settled on cluster size {}",
            tr.re, tr.im, r
        )));
    }
    let sq = pi0.mul(&pi0);
    let dev = (0..pi0.rows)
        .flat_map(|i| (0..pi0.cols).map(move |j| (i, j)))
        .map(|(i, j)| (sq[(i, j)] - pi0[(i, j)]).norm())
        .fold(0.0, f64::max);
    if dev > 1e-8 * (1.0 + pi0.max_abs()) {
        return Err(Error::Numerical(format!("projector idempotency defect {dev:.2e}")));
    }

    // Nonzero singular values of an idempotent are >= 1; numerical zeros sit
    // many orders below, so 1/2 is an unambiguous range/null split.
    let (u, s, _) = svd(&pi0);
    let range_dim = s.iter().filter(|&&x| x > 0.5).count();
    if range_dim != r {
        return Err(Error::Numerical(format!(
            "projector range dimension {range_dim} vs cluster size {r}"
        )));
    }
    frame.e = CMat::from_fn(pi0.rows, r, |i, j| u[(i, j)]);
    Ok(frame)
}

/// Riesz projector of the dual symbol at a real quasimomentum. With no
/// explicit radius the contour encloses the zero cluster of A(k) and nothing
/// else; an explicit radius selects whatever cluster it encircles.
pub fn spectral_projector(
    op: &PeriodicOperator,
    k: &[f64],
    radius: Option<f64>,
) -> Result<SpectralProjector> {
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
    let dual = adjoint(op);
    let a = bloch_matrix_complex(&dual, &negate(&to_complex(k)));
    let radius = match radius {
        Some(r) => {
            if r.is_nan() || r <= 0.0 {
                return Err(Error::ShapeMismatch("contour radius must be positive".into()));
            }
            r
        }
        None => {
            let (r_alg, gap) = cluster_split(&a);
            if r_alg == 0 {
                return Err(Error::NotFermiPoint { k: k.to_vec(), sigma_min: sigma_min(&a) });
            }
            match gap {
                Some(g) => g / 2.0,
                None => a.frobenius() + 1.0,
            }
        }
    };
    let matrix = contour_projector(&a, radius)?;
    let tr = trace(&matrix);
    let rank = tr.re.round() as usize;
    if (tr.re - rank as f64).abs() > 0.1 || tr.im.abs() > 0.1 {
        return Err(Error::ContourBreach(format!(
            "projector trace {:.3}{:+.3}i is not near an integer",
            tr.re, tr.im
        )));
    }
    Ok(SpectralProjector { k: k.to_vec(), matrix, contour_radius: radius, rank })
}

/// The r x r dispersion family at real quasimomentum k, in the frame frozen
/// at the Fermi point k0.
pub fn lambda_matrix(op: &PeriodicOperator, k0: &[f64], k: &[f64]) -> Result<CMat> {
    let frame = build_frame(op, k0)?;
    frame.lambda(&to_complex(k))
}

/// Homogeneous Taylor parts of lambda at k0 through degree `l_max`, by
/// Cauchy quadrature on a polydisc around k0.
///
/// `tol_zero` is the relative snap-to-zero threshold for cleaned
/// coefficients; rank decisions downstream assume exact zeros where the
/// dispersion has structural zeros.
pub fn taylor_expand(
    op: &PeriodicOperator,
    k0: &[f64],
    l_max: usize,
    tol_zero: f64,
) -> Result<LocalSpectralData> {
    taylor_expand_seeded(op, k0, l_max, tol_zero, 0)
}

/// [`taylor_expand`] with an explicit seed for the nondegeneracy sampling.
pub fn taylor_expand_seeded(
    op: &PeriodicOperator,
    k0: &[f64],
    l_max: usize,
    tol_zero: f64,
    seed: u64,
) -> Result<LocalSpectralData> {
    if !(1..=tol::L_MAX).contains(&l_max) {
        return Err(Error::ShapeMismatch(format!(
            "expansion order must be in 1..={}, got {l_max}",
            tol::L_MAX
        )));
    }
    let frame = build_frame(op, k0)?;
    let n = op.rank;
    let r = frame.r;
    let q1: usize = if n <= 2 { 24 } else { 16 };

    let mut rho = frame.polydisc_radius();
    let mut parts: Option<Vec<HomogeneousMatrixPoly>> = None;
    let mut last_err = None;
    for _attempt in 0..3 {
        match polydisc_coefficients(&frame, k0, n, r, q1, rho, l_max) {
            Ok(p) => {
                parts = Some(p);
                break;
            }
            Err(e @ Error::ContourBreach(_)) => {
                last_err = Some(e);
                rho /= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
    let mut parts = match parts {
        Some(p) => p,
        None => return Err(last_err.expect("retry loop failed without an error")),
    };

    let scale_ref = parts.iter().map(|p| p.max_norm()).fold(0.0, f64::max);
    let cut = tol_zero * scale_ref;
    for part in &mut parts {
        for coeff in &mut part.coeffs {
            for i in 0..coeff.rows {
                for j in 0..coeff.cols {
                    if coeff[(i, j)].norm() < cut {
                        coeff[(i, j)] = C::new(0.0, 0.0);
                    }
                }
            }
        }
    }

    if parts[0].max_norm() > 0.0 {
        // lambda(k0) != 0 on the cluster frame: the zero eigenvalue has a
        // nontrivial Jordan part and no leading order exists.
        return Err(Error::DegenerateSymbol);
    }
    let l0 = match parts.iter().find(|p| p.degree >= 1 && p.max_norm() > 0.0) {
        Some(p) => p.degree,
        None => return Err(Error::FlatToOrder { l_max }),
    };
    let lambda_l0 = parts[l0].clone();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = lambda_l0.max_norm();
    let mut nondegenerate = false;
    for _ in 0..tol::RANDOM_SAMPLES {
        let x = random_unit_direction(&mut rng, n);
        let xc: Vec<C> = x.iter().map(|&v| C::new(v, 0.0)).collect();
        if det(&lambda_l0.eval(&xc)).norm() > tol::NONDEG_THRESHOLD * scale.powi(r as i32) {
            nondegenerate = true;
            break;
        }
    }

    Ok(LocalSpectralData { k0: k0.to_vec(), r, l0, lambda_l0, taylor: parts, nondegenerate })
}

fn polydisc_coefficients(
    frame: &Frame,
    k0: &[f64],
    n: usize,
    r: usize,
    q1: usize,
    rho: f64,
    l_max: usize,
) -> Result<Vec<HomogeneousMatrixPoly>> {
    let total = q1.pow(n as u32);
    let omega: Vec<C> = (0..q1)
        .map(|j| C::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / q1 as f64))
        .collect();
    let mut samples: Vec<CMat> = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    for idx in 0..total {
        let mut rem = idx;
        for d in digits.iter_mut() {
            *d = rem % q1;
            rem /= q1;
        }
        let z: Vec<C> =
            (0..n).map(|axis| C::new(k0[axis], 0.0) + omega[digits[axis]] * rho).collect();
        samples.push(frame.lambda(&z)?);
    }

    let mut parts = Vec::with_capacity(l_max + 1);
    for l in 0..=l_max {
        let mut part = HomogeneousMatrixPoly::zero(n, l, r, r);
        let monos = part.monos().to_vec();
        let rho_pow = rho.powi(l as i32);
        for mono in &monos {
            let mut acc = CMat::zeros(r, r);
            let mut rem_digits = vec![0usize; n];
            for (idx, sample) in samples.iter().enumerate() {
                let mut rem = idx;
                for d in rem_digits.iter_mut() {
                    *d = rem % q1;
                    rem /= q1;
                }
                // conj(omega^{j.alpha}) rotates the sample back; summing over
                // the full polydisc grid isolates the alpha coefficient.
                let mut twist = C::new(1.0, 0.0);
                for axis in 0..n {
                    let e = (rem_digits[axis] * mono[axis]) % q1;
                    twist *= omega[e].conj();
                }
                for a in 0..r {
                    for b in 0..r {
                        acc[(a, b)] += sample[(a, b)] * twist;
                    }
                }
            }
            let norm = C::new(1.0 / (total as f64 * rho_pow), 0.0);
            for a in 0..r {
                for b in 0..r {
                    acc[(a, b)] *= norm;
                }
            }
            part.set_coeff(mono, acc);
        }
        parts.push(part);
    }
    Ok(parts)
}
