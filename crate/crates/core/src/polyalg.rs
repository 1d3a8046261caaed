//! Linear algebra on spaces of vector-valued polynomials.
//!
//! Everything here is exact up to f64 arithmetic on small integers: monomial
//! bases are enumerated in a fixed graded order, differential and
//! multiplication operators become explicit matrices, and dimensions fall out
//! of rank computations. The differential convention is the plain one,
//! D^beta x^alpha = alpha!/(alpha-beta)! x^(alpha-beta), with no factorial
//! absorbed into the symbol coefficients.
//!
//! The central objects are the operator Q(D) attached to a homogeneous matrix
//! symbol Q, its Q-harmonic kernel, a homogeneity-preserving right inverse R,
//! the block-triangular system Lambda_N built from the Taylor family of a
//! dispersion symbol, and the back-substitution map that exhibits the
//! cokernel data of Lambda_N as Q-harmonic tuples.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{det, kernel_basis, svd, CMat};
use crate::model::q_dim;
use crate::tol;
use crate::{Error, Result};

type C = Complex64;

pub type MultiIndex = Vec<usize>;

pub fn mono_degree(alpha: &[usize]) -> usize {
    alpha.iter().sum()
}

/// Monomials of exact total degree `degree` in `n` variables,
/// lexicographically descending: (d,0,..), .., (0,..,d).
pub fn multi_indices(n: usize, degree: usize) -> Vec<MultiIndex> {
    assert!(n >= 1);
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fill_indices(&mut out, &mut cur, 0, degree);
    out
}

fn fill_indices(out: &mut Vec<MultiIndex>, cur: &mut MultiIndex, pos: usize, left: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v;
        fill_indices(out, cur, pos + 1, left - v);
        cur[pos] = 0;
    }
}

/// Number of monomials of exact degree `degree` in `n` variables.
pub fn mono_count(n: usize, degree: usize) -> usize {
    multi_pick(n - 1 + degree, degree)
}

fn multi_pick(n: usize, k: usize) -> usize {
    crate::model::binomial(n as i64, k as i64) as usize
}

/// alpha!/gamma! for gamma <= alpha componentwise; exact in f64 for the
/// degrees this crate touches.
fn factorial_ratio(alpha: &[usize], gamma: &[usize]) -> f64 {
    let mut acc = 1.0f64;
    for (&a, &g) in alpha.iter().zip(gamma) {
        debug_assert!(g <= a);
        for v in g + 1..=a {
            acc *= v as f64;
        }
    }
    acc
}

fn mono_sub(alpha: &[usize], gamma: &[usize]) -> Option<MultiIndex> {
    let mut out = Vec::with_capacity(alpha.len());
    for (&a, &g) in alpha.iter().zip(gamma) {
        if g > a {
            return None;
        }
        out.push(a - g);
    }
    Some(out)
}

fn mono_pow(x: &[C], alpha: &[usize]) -> C {
    let mut acc = C::new(1.0, 0.0);
    for (xi, &ai) in x.iter().zip(alpha) {
        acc *= xi.powu(ai as u32);
    }
    acc
}

/// Homogeneous matrix-valued polynomial: a rows x cols matrix for every
/// monomial of the fixed degree, stored in the canonical monomial order.
#[derive(Debug, Clone)]
pub struct HomogeneousMatrixPoly {
    pub n: usize,
    pub degree: usize,
    pub rows: usize,
    pub cols: usize,
    monos: Vec<MultiIndex>,
    pub coeffs: Vec<CMat>,
}

impl HomogeneousMatrixPoly {
    pub fn zero(n: usize, degree: usize, rows: usize, cols: usize) -> Self {
        let monos = multi_indices(n, degree);
        let coeffs = monos.iter().map(|_| CMat::zeros(rows, cols)).collect();
        HomogeneousMatrixPoly { n, degree, rows, cols, monos, coeffs }
    }

    pub fn monos(&self) -> &[MultiIndex] {
        &self.monos
    }

    fn position(&self, mono: &[usize]) -> Option<usize> {
        self.monos.iter().position(|m| m == mono)
    }

    pub fn coeff(&self, mono: &[usize]) -> Option<&CMat> {
        self.position(mono).map(|i| &self.coeffs[i])
    }

    pub fn set_coeff(&mut self, mono: &[usize], value: CMat) {
        let i = self.position(mono).expect("monomial of wrong degree");
        assert_eq!((value.rows, value.cols), (self.rows, self.cols));
        self.coeffs[i] = value;
    }

    /// Scalar convenience: 1x1 coefficient from a complex number.
    pub fn set_scalar(&mut self, mono: &[usize], value: C) {
        let mut m = CMat::zeros(self.rows, self.cols);
        m[(0, 0)] = value;
        self.set_coeff(mono, m);
    }

    pub fn eval(&self, x: &[C]) -> CMat {
        let mut acc = CMat::zeros(self.rows, self.cols);
        for (mono, c) in self.monos.iter().zip(&self.coeffs) {
            let w = mono_pow(x, mono);
            for i in 0..self.rows {
                for j in 0..self.cols {
                    acc[(i, j)] += c[(i, j)] * w;
                }
            }
        }
        acc
    }

    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol_abs: f64) -> bool {
        self.max_norm() <= tol_abs
    }
}

/// Basis of P_N^r: all (monomial, component) pairs with |mono| <= N, graded
/// by degree, lex-descending within a degree, component varying fastest.
#[derive(Debug, Clone)]
pub struct PolySpaceBasis {
    pub n: usize,
    pub r: usize,
    pub max_degree: usize,
    pub items: Vec<(MultiIndex, usize)>,
    index: BTreeMap<(MultiIndex, usize), usize>,
}

impl PolySpaceBasis {
    pub fn new(n: usize, r: usize, max_degree: usize) -> Self {
        let mut items = Vec::new();
        for d in 0..=max_degree {
            for mono in multi_indices(n, d) {
                for comp in 0..r {
                    items.push((mono.clone(), comp));
                }
            }
        }
        let index = items.iter().enumerate().map(|(i, it)| (it.clone(), i)).collect();
        PolySpaceBasis { n, r, max_degree, items, index }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn position(&self, mono: &[usize], comp: usize) -> Option<usize> {
        self.index.get(&(mono.to_vec(), comp)).copied()
    }
}

/// Vector-valued polynomial in n variables with `comps` components.
#[derive(Debug, Clone)]
pub struct VectorPoly {
    pub n: usize,
    pub comps: usize,
    pub terms: BTreeMap<MultiIndex, Vec<C>>,
}

impl VectorPoly {
    pub fn zero(n: usize, comps: usize) -> Self {
        VectorPoly { n, comps, terms: BTreeMap::new() }
    }

    pub fn from_flat(basis: &PolySpaceBasis, flat: &[C]) -> Self {
        assert_eq!(flat.len(), basis.len());
        let mut p = VectorPoly::zero(basis.n, basis.r);
        for (i, (mono, comp)) in basis.items.iter().enumerate() {
            if flat[i].norm() != 0.0 {
                p.terms.entry(mono.clone()).or_insert_with(|| vec![C::new(0.0, 0.0); basis.r])
                    [*comp] = flat[i];
            }
        }
        p
    }

    pub fn to_flat(&self, basis: &PolySpaceBasis) -> Vec<C> {
        let mut flat = vec![C::new(0.0, 0.0); basis.len()];
        for (mono, vec) in &self.terms {
            for (comp, &c) in vec.iter().enumerate() {
                if c.norm() != 0.0 {
                    let i = basis.position(mono, comp).expect("polynomial degree exceeds basis");
                    flat[i] = c;
                }
            }
        }
        flat
    }

    pub fn coeff(&self, mono: &[usize], comp: usize) -> C {
        self.terms.get(mono).map_or(C::new(0.0, 0.0), |v| v[comp])
    }

    pub fn add_term(&mut self, mono: &[usize], comp: usize, value: C) {
        self.terms.entry(mono.to_vec()).or_insert_with(|| vec![C::new(0.0, 0.0); self.comps])
            [comp] += value;
    }

    pub fn add_scaled(&mut self, other: &VectorPoly, factor: C) {
        for (mono, vec) in &other.terms {
            for (comp, &c) in vec.iter().enumerate() {
                if c.norm() != 0.0 {
                    self.add_term(mono, comp, c * factor);
                }
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, v)| v.iter().any(|c| c.norm() != 0.0))
            .map(|(m, _)| mono_degree(m))
            .max()
            .unwrap_or(0)
    }

    /// Terms of exact total degree d, as a standalone polynomial.
    pub fn homogeneous_part(&self, d: usize) -> VectorPoly {
        let mut p = VectorPoly::zero(self.n, self.comps);
        for (mono, vec) in &self.terms {
            if mono_degree(mono) == d {
                p.terms.insert(mono.clone(), vec.clone());
            }
        }
        p
    }

    pub fn eval(&self, x: &[C]) -> Vec<C> {
        let mut acc = vec![C::new(0.0, 0.0); self.comps];
        for (mono, vec) in &self.terms {
            let w = mono_pow(x, mono);
            for (a, &c) in acc.iter_mut().zip(vec) {
                *a += c * w;
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().flat_map(|v| v.iter().map(|c| c.norm())).fold(0.0, f64::max)
    }
}

/// Apply Q(D) to a vector polynomial: each symbol monomial beta acts as the
/// partial derivative D^beta with the factorial convention.
pub fn qd_apply(q: &HomogeneousMatrixPoly, p: &VectorPoly) -> VectorPoly {
    assert_eq!(q.cols, p.comps);
    let mut out = VectorPoly::zero(p.n, q.rows);
    for (beta, coeff) in q.monos.iter().zip(&q.coeffs) {
        if coeff.max_abs() == 0.0 {
            continue;
        }
        for (alpha, vec) in &p.terms {
            let Some(gamma) = mono_sub(alpha, beta) else { continue };
            let factor = factorial_ratio(alpha, &gamma);
            for a in 0..q.rows {
                let mut acc = C::new(0.0, 0.0);
                for b in 0..q.cols {
                    acc += coeff[(a, b)] * vec[b];
                }
                if acc.norm() != 0.0 {
                    out.add_term(&gamma, a, acc * factor);
                }
            }
        }
    }
    out
}

/// Matrix of Q(D): P_{l+s}^cols -> P_l^rows in the canonical monomial bases
/// (s = deg Q). Entry at output (gamma, a), input (alpha, b) is
/// Q_{alpha-gamma}[a][b] * alpha!/gamma!.
pub fn qd_operator_matrix(q: &HomogeneousMatrixPoly, l: usize) -> CMat {
    let out_monos = multi_indices(q.n, l);
    let in_monos = multi_indices(q.n, l + q.degree);
    let mut m = CMat::zeros(out_monos.len() * q.rows, in_monos.len() * q.cols);
    for (oi, gamma) in out_monos.iter().enumerate() {
        for (ii, alpha) in in_monos.iter().enumerate() {
            let Some(beta) = mono_sub(alpha, gamma) else { continue };
            let Some(coeff) = q.coeff(&beta) else { continue };
            let factor = factorial_ratio(alpha, gamma);
            for a in 0..q.rows {
                for b in 0..q.cols {
                    m[(oi * q.rows + a, ii * q.cols + b)] = coeff[(a, b)] * C::new(factor, 0.0);
                }
            }
        }
    }
    m
}

/// Matrix of multiplication by Q: P_j^cols -> P_{j+s}^rows. Entry at output
/// (gamma, a), input (alpha, b) is Q_{gamma-alpha}[a][b].
pub fn mult_operator_matrix(q: &HomogeneousMatrixPoly, j: usize) -> CMat {
    let in_monos = multi_indices(q.n, j);
    let out_monos = multi_indices(q.n, j + q.degree);
    let mut m = CMat::zeros(out_monos.len() * q.rows, in_monos.len() * q.cols);
    for (oi, gamma) in out_monos.iter().enumerate() {
        for (ii, alpha) in in_monos.iter().enumerate() {
            let Some(beta) = mono_sub(gamma, alpha) else { continue };
            let Some(coeff) = q.coeff(&beta) else { continue };
            for a in 0..q.rows {
                for b in 0..q.cols {
                    m[(oi * q.rows + a, ii * q.cols + b)] = coeff[(a, b)];
                }
            }
        }
    }
    m
}

/// Basis of the Q-harmonic polynomials {p in P_N^cols : Q(D)p = 0}.
/// The kernel respects the grading, so it is assembled degree by degree.
pub fn q_harmonic_basis(q: &HomogeneousMatrixPoly, max_degree: usize) -> (usize, Vec<VectorPoly>) {
    let mut basis = Vec::new();
    for d in 0..=max_degree {
        let deg_basis = PolySpaceBasis::new(q.n, q.cols, d)
            .items
            .into_iter()
            .filter(|(m, _)| mono_degree(m) == d)
            .collect::<Vec<_>>();
        if d < q.degree {
            // Q(D) maps into negative degree: everything is harmonic.
            for (mono, comp) in &deg_basis {
                let mut p = VectorPoly::zero(q.n, q.cols);
                p.add_term(mono, *comp, C::new(1.0, 0.0));
                basis.push(p);
            }
            continue;
        }
        let m = qd_operator_matrix(q, d - q.degree);
        for vec in kernel_basis(&m, tol::TOL_RANK) {
            let mut p = VectorPoly::zero(q.n, q.cols);
            for (i, (mono, comp)) in deg_basis.iter().enumerate() {
                // kernel vector layout matches the degree-d monomial block,
                // component innermost.
                let _ = i;
                let v = vec[i];
                if v.norm() != 0.0 {
                    p.add_term(mono, *comp, v);
                }
            }
            basis.push(p);
        }
    }
    (basis.len(), basis)
}

/// r [ C(n+N, N) - C(n+N-l0, N-l0) ], the generic dimension of order-N data
/// at a point with r-dimensional zero cluster and leading order l0;
/// binomials with a negative lower index count as zero.
pub fn dim_formula(n: usize, max_degree: usize, r: usize, l0: usize) -> usize {
    let full = q_dim(n, max_degree as i64);
    let reduced = q_dim(n, max_degree as i64 - l0 as i64);
    r * (full - reduced)
}

/// Diagonal symbols with per-component leading orders l_j.
pub fn dim_formula_mixed(n: usize, max_degree: usize, orders: &[usize]) -> usize {
    orders.iter().map(|&l| dim_formula(n, max_degree, 1, l)).sum()
}

/// Decide det Q != 0 (as a polynomial) by sampling on the real unit sphere.
pub fn det_not_identically_zero(q: &HomogeneousMatrixPoly, seed: u64) -> bool {
    assert_eq!(q.rows, q.cols);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = q.max_norm().max(1.0).powi(q.rows as i32);
    for _ in 0..tol::RANDOM_SAMPLES {
        let x = random_unit_direction(&mut rng, q.n);
        let xc: Vec<C> = x.iter().map(|&v| C::new(v, 0.0)).collect();
        if det(&q.eval(&xc)).norm() > tol::DET_NONZERO * scale {
            return true;
        }
    }
    false
}

pub fn random_unit_direction<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller on open-interval uniforms.
    let u: f64 = rng.random::<f64>().max(1e-300);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Homogeneity-preserving right inverse of Q(D): on each P_l it is the
/// minimum-norm pseudoinverse of the exact operator matrix, so
/// Q(D) . R = identity on P_l whenever Q(D) is onto (det Q != 0).
pub struct RightInverse {
    q: HomogeneousMatrixPoly,
}

impl RightInverse {
    pub fn new(q: HomogeneousMatrixPoly, seed: u64) -> Result<Self> {
        if q.rows != q.cols {
            return Err(Error::ShapeMismatch("right inverse needs a square symbol".into()));
        }
        if !det_not_identically_zero(&q, seed) {
            return Err(Error::DegenerateSymbol);
        }
        Ok(RightInverse { q })
    }

    pub fn symbol(&self) -> &HomogeneousMatrixPoly {
        &self.q
    }

    /// Matrix of R on P_l (mapping P_l -> P_{l+s}).
    pub fn matrix_on_degree(&self, l: usize) -> CMat {
        pseudo_inverse(&qd_operator_matrix(&self.q, l))
    }

    /// Apply R to a polynomial, degree part by degree part.
    pub fn apply(&self, p: &VectorPoly) -> VectorPoly {
        let mut out = VectorPoly::zero(p.n, p.comps);
        if p.terms.is_empty() {
            return out;
        }
        for d in 0..=p.degree() {
            let part = p.homogeneous_part(d);
            if part.terms.is_empty() {
                continue;
            }
            let in_monos = multi_indices(p.n, d);
            let out_monos = multi_indices(p.n, d + self.q.degree);
            let mut flat = vec![C::new(0.0, 0.0); in_monos.len() * p.comps];
            for (i, mono) in in_monos.iter().enumerate() {
                for comp in 0..p.comps {
                    flat[i * p.comps + comp] = part.coeff(mono, comp);
                }
            }
            let r = self.matrix_on_degree(d);
            let lifted = r.matvec(&flat);
            for (i, mono) in out_monos.iter().enumerate() {
                for comp in 0..p.comps {
                    let v = lifted[i * p.comps + comp];
                    if v.norm() != 0.0 {
                        out.add_term(mono, comp, v);
                    }
                }
            }
        }
        out
    }
}

/// Minimum-norm pseudoinverse via SVD, with a relative spectral cutoff.
fn pseudo_inverse(m: &CMat) -> CMat {
    let (u, s, v) = svd(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let cut = 1e-12 * smax;
    let k = s.len();
    let mut out = CMat::zeros(m.cols, m.rows);
    for j in 0..k {
        if s[j] <= cut || s[j] == 0.0 {
            continue;
        }
        let inv = 1.0 / s[j];
        for a in 0..m.cols {
            for b in 0..m.rows {
                out[(a, b)] += v[(a, j)] * C::new(inv, 0.0) * u[(b, j)].conj();
            }
        }
    }
    out
}

fn leading_order(taylor: &[HomogeneousMatrixPoly]) -> Result<usize> {
    let scale = taylor.iter().map(|p| p.max_norm()).fold(0.0, f64::max);
    taylor
        .iter()
        .filter(|p| p.degree >= 1 && p.max_norm() > tol::TOL_TAYLOR_ZERO * scale)
        .map(|p| p.degree)
        .min()
        .ok_or(Error::DegenerateSymbol)
}

fn part_of_degree(taylor: &[HomogeneousMatrixPoly], d: usize) -> Option<&HomogeneousMatrixPoly> {
    taylor.iter().find(|p| p.degree == d && p.max_norm() > 0.0)
}

/// Assemble the block system Lambda_N and return (kernel dimension, basis).
///
/// Lambda_N takes p in P_N^r to the degree-(l0..N) part of lambda(k) p(k):
/// block (i, j) is multiplication by lambda_{i-j} from P_j into P_i whenever
/// i - j >= l0. Its kernel dimension is the order-N solution count that the
/// dimension formula predicts in the nondegenerate case.
pub fn lambda_n_kernel(
    taylor: &[HomogeneousMatrixPoly],
    max_degree: usize,
) -> Result<(usize, Vec<VectorPoly>)> {
    let l0 = leading_order(taylor)?;
    let r = taylor[0].cols;
    let n = taylor[0].n;
    let source = PolySpaceBasis::new(n, r, max_degree);
    if max_degree < l0 {
        let basis = (0..source.len())
            .map(|i| {
                let mut flat = vec![C::new(0.0, 0.0); source.len()];
                flat[i] = C::new(1.0, 0.0);
                VectorPoly::from_flat(&source, &flat)
            })
            .collect::<Vec<_>>();
        return Ok((basis.len(), basis));
    }

    // Row layout: degrees l0..=N of P^r, each degree a contiguous block.
    let mut row_offsets = Vec::new();
    let mut rows = 0usize;
    for i in l0..=max_degree {
        row_offsets.push((i, rows));
        rows += mono_count(n, i) * r;
    }
    let mut m = CMat::zeros(rows, source.len());
    let mut col_offset = 0usize;
    for j in 0..=max_degree {
        let width = mono_count(n, j) * r;
        for (i, row_off) in &row_offsets {
            if i < &(j + l0) {
                continue;
            }
            let Some(part) = part_of_degree(taylor, i - j) else { continue };
            let block = mult_operator_matrix(part, j);
            for br in 0..block.rows {
                for bc in 0..block.cols {
                    m[(row_off + br, col_offset + bc)] = block[(br, bc)];
                }
            }
        }
        col_offset += width;
    }

    let kernel = kernel_basis(&m, tol::TOL_RANK);
    let basis: Vec<VectorPoly> = kernel.iter().map(|v| VectorPoly::from_flat(&source, v)).collect();
    Ok((basis.len(), basis))
}

/// Kernel of the dual obstruction system and its back-substituted image.
///
/// Unknowns psi_hat_j in P_j^r for j <= N; for every output degree
/// i <= N - l0 the equation sum_{j >= i+l0} lambda_{j-i}(D) psi_hat_j = 0.
/// Each kernel element maps to phi = sum_j phi_j with
/// phi_j = psi_hat_j + R( sum_{i > j} lambda_{i-j+l0}(D) psi_hat_i ),
/// which lands exactly in the lambda_{l0}-harmonic tuples of degree <= N:
/// the equation at output degree j - l0 says the correction's image under
/// lambda_{l0}(D) cancels lambda_{l0}(D) psi_hat_j.
pub struct CokernelData {
    pub kernel: Vec<VectorPoly>,
    pub image: Vec<VectorPoly>,
}

pub fn cokernel_isomorphism(
    taylor: &[HomogeneousMatrixPoly],
    max_degree: usize,
    rinv: &RightInverse,
) -> Result<CokernelData> {
    let l0 = leading_order(taylor)?;
    if rinv.symbol().degree != l0 {
        return Err(Error::ShapeMismatch(
            "right inverse is for a symbol of a different order".into(),
        ));
    }
    let r = taylor[0].cols;
    let n = taylor[0].n;
    let source = PolySpaceBasis::new(n, r, max_degree);

    let mut rows = 0usize;
    let mut row_offsets = Vec::new();
    if max_degree >= l0 {
        for i in 0..=max_degree - l0 {
            row_offsets.push((i, rows));
            rows += mono_count(n, i) * r;
        }
    }
    let mut b = CMat::zeros(rows, source.len());
    let mut col_offset = 0usize;
    for j in 0..=max_degree {
        let width = mono_count(n, j) * r;
        for (i, row_off) in &row_offsets {
            if j < i + l0 {
                continue;
            }
            let Some(part) = part_of_degree(taylor, j - i) else { continue };
            let block = qd_operator_matrix(part, *i);
            for br in 0..block.rows {
                for bc in 0..block.cols {
                    b[(row_off + br, col_offset + bc)] = block[(br, bc)];
                }
            }
        }
        col_offset += width;
    }

    let kernel_vecs = kernel_basis(&b, tol::TOL_RANK);
    let mut kernel = Vec::with_capacity(kernel_vecs.len());
    let mut image = Vec::with_capacity(kernel_vecs.len());
    for v in kernel_vecs {
        let psi = VectorPoly::from_flat(&source, &v);
        let mut phi = VectorPoly::zero(n, r);
        for j in 0..=max_degree {
            let mut phi_j = psi.homogeneous_part(j);
            if j >= l0 {
                // Correction from higher components, pulled back through R.
                let mut pushed = VectorPoly::zero(n, r);
                for i in j + 1..=max_degree {
                    let Some(part) = part_of_degree(taylor, i - j + l0) else { continue };
                    pushed.add_scaled(&qd_apply(part, &psi.homogeneous_part(i)), C::new(1.0, 0.0));
                }
                if !pushed.terms.is_empty() {
                    phi_j.add_scaled(&rinv.apply(&pushed), C::new(1.0, 0.0));
                }
            }
            phi.add_scaled(&phi_j, C::new(1.0, 0.0));
        }
        kernel.push(psi);
        image.push(phi);
    }
    Ok(CokernelData { kernel, image })
}

/// Dimension of the span of a polynomial family, by rank of the stacked
/// coefficient matrix over the common basis.
pub fn span_dimension(polys: &[VectorPoly], max_degree: usize) -> usize {
    if polys.is_empty() {
        return 0;
    }
    let basis = PolySpaceBasis::new(polys[0].n, polys[0].comps, max_degree);
    let m = CMat::from_fn(polys.len(), basis.len(), |i, j| {
        let (mono, comp) = &basis.items[j];
        polys[i].coeff(mono, *comp)
    });
    crate::linalg::rank(&m, tol::TOL_RANK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    fn scalar_symbol(
        n: usize,
        degree: usize,
        entries: &[(&[usize], f64)],
    ) -> HomogeneousMatrixPoly {
        let mut q = HomogeneousMatrixPoly::zero(n, degree, 1, 1);
        for (mono, v) in entries {
            q.set_scalar(mono, c(*v));
        }
        q
    }

    fn laplace_symbol() -> HomogeneousMatrixPoly {
        scalar_symbol(2, 2, &[(&[2, 0], 1.0), (&[0, 2], 1.0)])
    }

    fn diag_symbol() -> HomogeneousMatrixPoly {
        // diag(k1, k2)
        let mut q = HomogeneousMatrixPoly::zero(2, 1, 2, 2);
        let mut m1 = CMat::zeros(2, 2);
        m1[(0, 0)] = c(1.0);
        q.set_coeff(&[1, 0], m1);
        let mut m2 = CMat::zeros(2, 2);
        m2[(1, 1)] = c(1.0);
        q.set_coeff(&[0, 1], m2);
        q
    }

    fn random_symbol<R: Rng>(
        rng: &mut R,
        n: usize,
        r: usize,
        degree: usize,
    ) -> HomogeneousMatrixPoly {
        loop {
            let mut q = HomogeneousMatrixPoly::zero(n, degree, r, r);
            for i in 0..q.coeffs.len() {
                q.coeffs[i] = CMat::from_fn(r, r, |_, _| C::new(gaussian(rng), gaussian(rng)));
            }
            if det_not_identically_zero(&q, 7) {
                return q;
            }
        }
    }

    #[test]
    fn graded_order_is_lex_descending() {
        assert_eq!(multi_indices(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multi_indices(1, 3), vec![vec![3]]);
        assert_eq!(mono_count(3, 2), 6);
    }

    #[test]
    fn laplacian_matrix_on_quadratics() {
        let m = qd_operator_matrix(&laplace_symbol(), 0);
        // P_2 basis (2,0),(1,1),(0,2) -> P_0.
        assert_eq!((m.rows, m.cols), (1, 3));
        assert_eq!(m[(0, 0)], c(2.0));
        assert_eq!(m[(0, 1)], c(0.0));
        assert_eq!(m[(0, 2)], c(2.0));
    }

    #[test]
    fn d1_matrix_lowers_x1() {
        let q = scalar_symbol(2, 1, &[(&[1, 0], 1.0)]);
        let m = qd_operator_matrix(&q, 1);
        // P_2 -> P_1: x1^2 -> 2 x1, x1 x2 -> x2, x2^2 -> 0.
        assert_eq!((m.rows, m.cols), (2, 3));
        assert_eq!(m[(0, 0)], c(2.0));
        assert_eq!(m[(1, 1)], c(1.0));
        assert_eq!(m[(0, 2)], c(0.0));
        assert_eq!(m[(1, 2)], c(0.0));
    }

    #[test]
    fn diag_symbol_acts_componentwise() {
        let q = diag_symbol();
        let mut p = VectorPoly::zero(2, 2);
        p.add_term(&[2, 0], 0, c(1.0));
        p.add_term(&[0, 2], 1, c(1.0));
        let dp = qd_apply(&q, &p);
        assert_eq!(dp.coeff(&[1, 0], 0), c(2.0));
        assert_eq!(dp.coeff(&[0, 1], 1), c(2.0));
        assert_eq!(dp.coeff(&[0, 1], 0), c(0.0));
    }

    #[test]
    fn harmonic_dimensions_match_closed_forms() {
        let (d, _) = q_harmonic_basis(&laplace_symbol(), 3);
        assert_eq!(d, 7);
        for max_degree in 0..=5usize {
            let q1 = scalar_symbol(2, 1, &[(&[1, 0], 1.0)]);
            assert_eq!(q_harmonic_basis(&q1, max_degree).0, max_degree + 1);
            let q2 = scalar_symbol(2, 2, &[(&[2, 0], 1.0)]);
            assert_eq!(q_harmonic_basis(&q2, max_degree).0, 2 * max_degree + 1);
            assert_eq!(q_harmonic_basis(&diag_symbol(), max_degree).0, 2 * (max_degree + 1));
        }
    }

    #[test]
    fn harmonics_are_annihilated() {
        let q = laplace_symbol();
        let (_, basis) = q_harmonic_basis(&q, 4);
        for p in &basis {
            assert!(qd_apply(&q, p).max_abs() <= 1e-10);
        }
    }

    #[test]
    fn dim_formula_closed_forms() {
        for max_degree in 0..=6 {
            assert_eq!(dim_formula(2, max_degree, 1, 2), 2 * max_degree + 1);
            assert_eq!(dim_formula(1, max_degree, 1, 1), 1);
        }
        assert_eq!(dim_formula(1, 3, 1, 4), 4);
        assert_eq!(dim_formula(1, 4, 1, 4), 4);
        for max_degree in 0..=4 {
            assert_eq!(dim_formula_mixed(2, max_degree, &[1, 2]), 3 * max_degree + 2);
            assert_eq!(dim_formula_mixed(2, max_degree, &[2, 2]), dim_formula(2, max_degree, 2, 2));
        }
        assert_eq!(dim_formula_mixed(1, 5, &[1]), 1);
    }

    #[test]
    fn order_only_dependence_of_harmonic_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _case in 0..8 {
            let n = 1 + (rng.random::<u32>() % 3) as usize;
            let r = 1 + (rng.random::<u32>() % 2) as usize;
            let degree = 1 + (rng.random::<u32>() % 3) as usize;
            let max_degree = (rng.random::<u32>() % 5) as usize;
            let q = random_symbol(&mut rng, n, r, degree);
            let (dim, basis) = q_harmonic_basis(&q, max_degree);
            assert_eq!(
                dim,
                dim_formula(n, max_degree, r, degree),
                "n={n} r={r} deg={degree} N={max_degree}"
            );
            for p in &basis {
                assert!(qd_apply(&q, p).max_abs() <= 1e-8 * (1.0 + q.max_norm()));
            }
        }
    }

    #[test]
    fn qd_surjective_when_nondegenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let q = random_symbol(&mut rng, 2, 2, 2);
            for l in 0..3usize {
                let m = qd_operator_matrix(&q, l);
                assert_eq!(crate::linalg::rank(&m, tol::TOL_RANK), m.rows);
            }
        }
    }

    #[test]
    fn antiderivative_right_inverse() {
        let q = scalar_symbol(1, 1, &[(&[1], 1.0)]);
        let rinv = RightInverse::new(q, 0).unwrap();
        for l in 0..5usize {
            let mut p = VectorPoly::zero(1, 1);
            p.add_term(&[l], 0, c(1.0));
            let rp = rinv.apply(&p);
            let expect = 1.0 / (l as f64 + 1.0);
            assert!((rp.coeff(&[l + 1], 0) - c(expect)).norm() < 1e-12);
        }
    }

    #[test]
    fn right_inverse_composition_is_identity() {
        let q = laplace_symbol();
        let rinv = RightInverse::new(q.clone(), 0).unwrap();
        for degree in 0..=4usize {
            for mono in multi_indices(2, degree) {
                let mut p = VectorPoly::zero(2, 1);
                p.add_term(&mono, 0, c(1.0));
                let back = qd_apply(&q, &rinv.apply(&p));
                let mut diff = back;
                diff.add_scaled(&p, c(-1.0));
                assert!(diff.max_abs() <= 1e-12, "mono {mono:?}");
            }
        }
    }

    #[test]
    fn degenerate_symbol_refused() {
        // Rows are proportional: det == 0 identically.
        let mut q = HomogeneousMatrixPoly::zero(2, 1, 2, 2);
        let mut m1 = CMat::zeros(2, 2);
        m1[(0, 0)] = c(1.0);
        m1[(1, 0)] = c(1.0);
        q.set_coeff(&[1, 0], m1);
        let mut m2 = CMat::zeros(2, 2);
        m2[(0, 1)] = c(1.0);
        m2[(1, 1)] = c(1.0);
        q.set_coeff(&[0, 1], m2);
        assert!(matches!(RightInverse::new(q, 0), Err(Error::DegenerateSymbol)));
    }

    #[test]
    fn lambda_kernel_quadratic_line() {
        let taylor = vec![scalar_symbol(1, 2, &[(&[2], 1.0)])];
        let (dim, basis) = lambda_n_kernel(&taylor, 3).unwrap();
        assert_eq!(dim, 2);
        for p in &basis {
            // Only the top two degrees survive truncation.
            assert!(p.coeff(&[0], 0).norm() < 1e-12);
            assert!(p.coeff(&[1], 0).norm() < 1e-12);
        }
    }

    #[test]
    fn lambda_kernel_below_leading_order_is_everything() {
        let taylor = vec![scalar_symbol(2, 3, &[(&[3, 0], 1.0), (&[0, 3], 0.5)])];
        let (dim, _) = lambda_n_kernel(&taylor, 2).unwrap();
        assert_eq!(dim, q_dim(2, 2i64));
    }

    #[test]
    fn lambda_kernel_matches_formula_for_random_symbols() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _case in 0..10 {
            let n = 1 + (rng.random::<u32>() % 2) as usize;
            let r = 1 + (rng.random::<u32>() % 2) as usize;
            let l0 = 1 + (rng.random::<u32>() % 2) as usize;
            let max_degree = 1 + (rng.random::<u32>() % 3) as usize;
            let lead = random_symbol(&mut rng, n, r, l0);
            let mut next = HomogeneousMatrixPoly::zero(n, l0 + 1, r, r);
            for i in 0..next.coeffs.len() {
                next.coeffs[i] =
                    CMat::from_fn(r, r, |_, _| C::new(gaussian(&mut rng), gaussian(&mut rng)));
            }
            let taylor = vec![lead, next];
            let (dim, _) = lambda_n_kernel(&taylor, max_degree).unwrap();
            assert_eq!(
                dim,
                dim_formula(n, max_degree, r, l0),
                "n={n} r={r} l0={l0} N={max_degree}"
            );
        }
    }

    #[test]
    fn lambda_kernel_dim_invariant_under_left_right_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _case in 0..6 {
            let n = 1 + (rng.random::<u32>() % 2) as usize;
            let r = 2usize;
            let lead = random_symbol(&mut rng, n, r, 1);
            let mut next = HomogeneousMatrixPoly::zero(n, 2, r, r);
            for i in 0..next.coeffs.len() {
                next.coeffs[i] =
                    CMat::from_fn(r, r, |_, _| C::new(gaussian(&mut rng), gaussian(&mut rng)));
            }
            let a = loop {
                let m = CMat::from_fn(r, r, |_, _| C::new(gaussian(&mut rng), gaussian(&mut rng)));
                if det(&m).norm() > 0.1 {
                    break m;
                }
            };
            let bmat = loop {
                let m = CMat::from_fn(r, r, |_, _| C::new(gaussian(&mut rng), gaussian(&mut rng)));
                if det(&m).norm() > 0.1 {
                    break m;
                }
            };
            let transform = |p: &HomogeneousMatrixPoly| {
                let mut q = p.clone();
                for i in 0..q.coeffs.len() {
                    q.coeffs[i] = a.mul(&q.coeffs[i]).mul(&bmat);
                }
                q
            };
            let taylor = vec![lead.clone(), next.clone()];
            let transformed = vec![transform(&lead), transform(&next)];
            let d1 = lambda_n_kernel(&taylor, 3).unwrap().0;
            let d2 = lambda_n_kernel(&transformed, 3).unwrap().0;
            assert_eq!(d1, d2);
        }
    }

    #[test]
    fn cokernel_identity_for_single_term() {
        let q = laplace_symbol();
        let rinv = RightInverse::new(q.clone(), 0).unwrap();
        let data = cokernel_isomorphism(std::slice::from_ref(&q), 3, &rinv).unwrap();
        assert_eq!(data.kernel.len(), data.image.len());
        for (psi, phi) in data.kernel.iter().zip(&data.image) {
            let mut diff = phi.clone();
            diff.add_scaled(psi, c(-1.0));
            assert!(diff.max_abs() <= 1e-10);
        }
        assert_eq!(span_dimension(&data.image, 3), q_harmonic_basis(&q, 3).0);
    }

    #[test]
    fn cokernel_worked_example_one_back_substitution() {
        // lambda = k^2 + k^3 in one variable, N = 3.
        let taylor = vec![scalar_symbol(1, 2, &[(&[2], 1.0)]), scalar_symbol(1, 3, &[(&[3], 1.0)])];
        let rinv = RightInverse::new(taylor[0].clone(), 0).unwrap();
        let data = cokernel_isomorphism(&taylor, 3, &rinv).unwrap();
        assert_eq!(data.kernel.len(), 2);
        let lead = &taylor[0];
        for phi in &data.image {
            assert!(phi.degree() <= 1);
            assert!(qd_apply(lead, phi).max_abs() <= 1e-10);
        }
        assert_eq!(span_dimension(&data.image, 3), 2);
    }

    #[test]
    fn cokernel_random_families_land_in_harmonics() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _case in 0..6 {
            let n = 1 + (rng.random::<u32>() % 2) as usize;
            let r = 1 + (rng.random::<u32>() % 2) as usize;
            let l0 = 1 + (rng.random::<u32>() % 2) as usize;
            let max_degree = 2 + (rng.random::<u32>() % 2) as usize;
            let lead = random_symbol(&mut rng, n, r, l0);
            let mut next = HomogeneousMatrixPoly::zero(n, l0 + 1, r, r);
            for i in 0..next.coeffs.len() {
                next.coeffs[i] =
                    CMat::from_fn(r, r, |_, _| C::new(gaussian(&mut rng), gaussian(&mut rng)));
            }
            let taylor = vec![lead.clone(), next];
            let rinv = RightInverse::new(lead.clone(), 0).unwrap();
            let data = cokernel_isomorphism(&taylor, max_degree, &rinv).unwrap();
            let scale = 1.0 + lead.max_norm();
            for phi in &data.image {
                let residual = qd_apply(&lead, phi).max_abs();
                let size = phi.max_abs().max(1e-30);
                assert!(residual <= 1e-8 * scale * size, "harmonicity residual {residual:.2e}");
            }
            assert_eq!(span_dimension(&data.image, max_degree), dim_formula(n, max_degree, r, l0));
            assert_eq!(data.kernel.len(), dim_formula(n, max_degree, r, l0));
        }
    }

    #[test]
    fn harmonic_kernel_is_graded() {
        let q = laplace_symbol();
        let (total, basis) = q_harmonic_basis(&q, 4);
        let mut by_degree = vec![0usize; 5];
        for p in &basis {
            by_degree[p.degree()] += 1;
        }
        assert_eq!(total, by_degree.iter().sum::<usize>());
        // Classical harmonic counts in two variables: 1, 2, 2, 2, 2.
        assert_eq!(by_degree, vec![1, 2, 2, 2, 2]);
    }
}
