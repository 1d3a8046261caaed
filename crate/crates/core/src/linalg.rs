//! Small dense complex linear algebra.
//!
//! Everything in this crate works on matrices of side at most a dozen or so,
//! which keeps the classical dependency-free algorithms (cyclic Jacobi,
//! one-sided Jacobi SVD, Faddeev-LeVerrier, Durand-Kerner) both adequate and
//! predictable. Jacobi methods were chosen deliberately: they compute tiny
//! singular values with absolute accuracy near machine epsilon times the
//! matrix norm, which the Fermi-surface thresholds rely on.

use num_complex::Complex64;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[C]) -> Vec<C> {
        assert_eq!(self.cols, x.len());
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)] * x[j]).sum()).collect()
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: C) -> CMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn column(&self, j: usize) -> Vec<C> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(x: &[C], y: &[C]) -> C {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(x: &[C]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// LU factorization with partial pivoting.
pub struct Lu {
    lu: CMat,
    perm: Vec<usize>,
    sign_swaps: usize,
    singular: bool,
}

pub fn lu_factor(a: &CMat) -> Lu {
    assert!(a.is_square());
    let n = a.rows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    let mut singular = false;
    for col in 0..n {
        let (mut imax, mut vmax) = (col, lu[(col, col)].norm());
        for i in col + 1..n {
            let v = lu[(i, col)].norm();
            if v > vmax {
                imax = i;
                vmax = v;
            }
        }
        if vmax == 0.0 {
            singular = true;
            continue;
        }
        if imax != col {
            for j in 0..n {
                lu.data.swap(col * n + j, imax * n + j);
            }
            perm.swap(col, imax);
            swaps += 1;
        }
        let piv = lu[(col, col)];
        for i in col + 1..n {
            let f = lu[(i, col)] / piv;
            lu[(i, col)] = f;
            for j in col + 1..n {
                let upd = lu[(col, j)];
                lu[(i, j)] -= f * upd;
            }
        }
    }
    Lu { lu, perm, sign_swaps: swaps, singular }
}

impl Lu {
    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> C {
        if self.singular {
            return ZERO;
        }
        let n = self.lu.rows;
        let mut d = if self.sign_swaps.is_multiple_of(2) { ONE } else { -ONE };
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        d
    }

    pub fn solve_vec(&self, b: &[C]) -> Option<Vec<C>> {
        if self.singular {
            return None;
        }
        let n = self.lu.rows;
        let mut y: Vec<C> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let yj = y[j];
                y[i] -= self.lu[(i, j)] * yj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let yj = y[j];
                y[i] -= self.lu[(i, j)] * yj;
            }
            y[i] /= self.lu[(i, i)];
        }
        Some(y)
    }

    pub fn solve_mat(&self, b: &CMat) -> Option<CMat> {
        let mut out = CMat::zeros(b.rows, b.cols);
        for j in 0..b.cols {
            let col = self.solve_vec(&b.column(j))?;
            for i in 0..b.rows {
                out[(i, j)] = col[i];
            }
        }
        Some(out)
    }
}

pub fn det(a: &CMat) -> C {
    lu_factor(a).det()
}

pub fn inverse(a: &CMat) -> Option<CMat> {
    lu_factor(a).solve_mat(&CMat::identity(a.rows))
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations with a
/// deterministic sweep order. Returns eigenvalues ascending and a unitary
/// matrix of column eigenvectors. The input is symmetrized first, so feeding
/// a slightly non-Hermitian matrix quietly analyzes its Hermitian part.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    assert!(a.is_square());
    let n = a.rows;
    let mut m = a.add(&a.dagger()).scale(C::new(0.5, 0.0));
    let mut v = CMat::identity(n);
    let eps = 1e-14 * m.frobenius().max(f64::MIN_POSITIVE);

    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(m[(p, q)].norm());
            }
        }
        if off <= eps {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let upq = apq.norm();
                if upq <= eps {
                    continue;
                }
                let phase = apq / upq;
                let alpha = m[(p, p)].re;
                let beta = m[(q, q)].re;
                let tau = (beta - alpha) / (2.0 * upq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                // Unitary J: J[p][p]=c, J[p][q]=s*phase, J[q][p]=-s*conj(phase), J[q][q]=c.
                let c = C::new(cth, 0.0);
                let s_pq = phase * sth;
                let s_qp = -phase.conj() * sth;
                // m <- J^H m J, applied as column then row updates.
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * c + miq * s_qp;
                    m[(i, q)] = mip * s_pq + miq * c;
                }
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = c * mpj + s_qp.conj() * mqj;
                    m[(q, j)] = s_pq.conj() * mpj + c * mqj;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * s_qp;
                    v[(i, q)] = vip * s_pq + viq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
    let vecs = CMat::from_fn(n, n, |i, j| v[(i, order[j])]);
    (sorted, vecs)
}

/// Thin SVD via one-sided Jacobi. Returns (U, sigma, V) with singular values
/// descending and A = U diag(sigma) V^H. Columns of U belonging to zero
/// singular values are left as zero vectors; V is always unitary, so kernel
/// and least-squares uses are unaffected.
pub fn svd(a: &CMat) -> (CMat, Vec<f64>, CMat) {
    if a.rows >= a.cols {
        svd_tall(a)
    } else {
        // Pad with zero rows to square so V comes back complete (the padded
        // rows of U are dropped again); a wide matrix keeps its full kernel.
        let padded =
            CMat::from_fn(a.cols, a.cols, |i, j| if i < a.rows { a[(i, j)] } else { ZERO });
        let (up, s, v) = svd_tall(&padded);
        (CMat::from_fn(a.rows, up.cols, |i, j| up[(i, j)]), s, v)
    }
}

fn svd_tall(a: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (rows, cols) = (a.rows, a.cols);
    let mut b = a.clone();
    let mut v = CMat::identity(cols);

    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = ZERO;
                for i in 0..rows {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    app += bp.norm_sqr();
                    aqq += bq.norm_sqr();
                    apq += bp.conj() * bq;
                }
                let upq = apq.norm();
                if upq <= 1e-15 * (app * aqq).sqrt() || upq == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = apq / upq;
                let tau = (aqq - app) / (2.0 * upq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                let c = C::new(cth, 0.0);
                let s_pq = phase * sth;
                let s_qp = -phase.conj() * sth;
                for i in 0..rows {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    b[(i, p)] = bp * c + bq * s_qp;
                    b[(i, q)] = bp * s_pq + bq * c;
                }
                for i in 0..cols {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c + vq * s_qp;
                    v[(i, q)] = vp * s_pq + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> =
        (0..cols).map(|j| (0..rows).map(|i| b[(i, j)].norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    sigma = order.iter().map(|&j| sigma[j]).collect();
    let mut u = CMat::zeros(rows, cols);
    for (jj, &j) in order.iter().enumerate() {
        if sigma[jj] > 0.0 {
            for i in 0..rows {
                u[(i, jj)] = b[(i, j)] / sigma[jj];
            }
        }
    }
    let vs = CMat::from_fn(cols, cols, |i, j| v[(i, order[j])]);
    (u, sigma, vs)
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    svd(a).1
}

pub fn sigma_min(a: &CMat) -> f64 {
    let s = singular_values(a);
    s.last().copied().unwrap_or(0.0)
}

pub fn sigma_max(a: &CMat) -> f64 {
    let s = singular_values(a);
    s.first().copied().unwrap_or(0.0)
}

/// Orthonormal basis of the right null space: columns of V whose singular
/// values fall below rel_tol times the largest one.
pub fn null_space(a: &CMat, rel_tol: f64) -> Vec<Vec<C>> {
    let (_, sigma, v) = svd(a);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let cut = rel_tol * smax;
    let mut out = Vec::new();
    for (j, &s) in sigma.iter().enumerate() {
        if s <= cut {
            out.push(v.column(j));
        }
    }
    out
}

/// Numerical rank by column-pivoted elimination: pivots below rel_tol times
/// the largest pivot do not count.
pub fn rank(a: &CMat, rel_tol: f64) -> usize {
    let (r, _) = eliminate(a, rel_tol);
    r
}

/// Kernel basis from column-pivoted Gaussian elimination. One basis vector
/// per free column; not orthonormal, but exactly reproduces the pivot
/// structure, which the polynomial modules key their dimensions on.
pub fn kernel_basis(a: &CMat, rel_tol: f64) -> Vec<Vec<C>> {
    let (_, kernel) = eliminate(a, rel_tol);
    kernel
}

fn eliminate(a: &CMat, rel_tol: f64) -> (usize, Vec<Vec<C>>) {
    let (rows, cols) = (a.rows, a.cols);
    let mut m = a.clone();
    let mut col_perm: Vec<usize> = (0..cols).collect();
    let mut rank = 0usize;
    let mut first_pivot = 0.0f64;

    for step in 0..rows.min(cols) {
        // Full pivot search over the active block; column pivoting decides
        // which variables become dependent.
        let (mut bi, mut bj, mut best) = (step, step, 0.0f64);
        for i in step..rows {
            for j in step..cols {
                let v = m[(i, j)].norm();
                if v > best {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if step == 0 {
            first_pivot = best;
        }
        if best == 0.0 || best <= rel_tol * first_pivot {
            break;
        }
        if bi != step {
            for j in 0..cols {
                m.data.swap(step * cols + j, bi * cols + j);
            }
        }
        if bj != step {
            for i in 0..rows {
                m.data.swap(i * cols + step, i * cols + bj);
            }
            col_perm.swap(step, bj);
        }
        let piv = m[(step, step)];
        for i in step + 1..rows {
            let f = m[(i, step)] / piv;
            m[(i, step)] = ZERO;
            for j in step + 1..cols {
                let upd = m[(step, j)];
                m[(i, j)] -= f * upd;
            }
        }
        rank += 1;
    }

    // Back substitution expresses the rank pivot variables through each free
    // variable in turn.
    let mut kernel = Vec::with_capacity(cols - rank);
    for free in rank..cols {
        let mut x = vec![ZERO; cols];
        x[free] = ONE;
        for i in (0..rank).rev() {
            let mut acc = m[(i, free)];
            for j in i + 1..rank {
                acc += m[(i, j)] * x[j];
            }
            x[i] = -acc / m[(i, i)];
        }
        let mut out = vec![ZERO; cols];
        for (pos, &orig) in col_perm.iter().enumerate() {
            out[orig] = x[pos];
        }
        kernel.push(out);
    }
    (rank, kernel)
}

/// Monic characteristic polynomial coefficients of a square matrix,
/// descending powers: [1, c1, ..., cn] with p(x) = x^n + c1 x^{n-1} + ... + cn.
/// Faddeev-LeVerrier; exactly right for the small matrices this crate sees.
pub fn char_poly(a: &CMat) -> Vec<C> {
    assert!(a.is_square());
    let n = a.rows;
    let mut coeffs = vec![ONE];
    let mut m = CMat::identity(n);
    for k in 1..=n {
        m = a.mul(&m);
        let c = -m.trace() / C::new(k as f64, 0.0);
        for i in 0..n {
            m[(i, i)] += c;
        }
        coeffs.push(c);
    }
    coeffs
}

pub fn poly_eval(coeffs: &[C], z: C) -> C {
    coeffs.iter().fold(ZERO, |acc, &c| acc * z + c)
}

/// All complex roots of a polynomial given by descending coefficients.
/// Durand-Kerner with a deterministic start; clustered (multiple) roots come
/// back as tight groups whose centroid is accurate even when the individual
/// roots are smeared by the usual multiplicity splitting.
pub fn poly_roots(coeffs: &[C]) -> Vec<C> {
    // Strip leading zeros.
    let lead = coeffs.iter().position(|c| c.norm() != 0.0);
    let coeffs = match lead {
        Some(i) => &coeffs[i..],
        None => return Vec::new(),
    };
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let monic: Vec<C> = coeffs.iter().map(|&c| c / coeffs[0]).collect();
    if deg == 1 {
        return vec![-monic[1]];
    }

    let radius = 1.0 + monic.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max);
    let seed_angle = C::new(0.4, 0.9) / C::new(0.4, 0.9).norm();
    let mut z: Vec<C> = (0..deg).map(|j| seed_angle.powu(j as u32 + 1) * radius).collect();

    for _iter in 0..1000 {
        let mut max_step = 0.0f64;
        for j in 0..deg {
            let mut denom = ONE;
            for i in 0..deg {
                if i != j {
                    let mut d = z[j] - z[i];
                    if d.norm() < 1e-300 {
                        d = C::new(1e-300, 0.0);
                    }
                    denom *= d;
                }
            }
            let step = poly_eval(&monic, z[j]) / denom;
            z[j] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step <= 1e-14 * (radius + 1.0) {
            break;
        }
    }
    z
}

/// Derivative coefficients, descending powers in and out.
pub fn poly_derivative(coeffs: &[C]) -> Vec<C> {
    let deg = coeffs.len().saturating_sub(1);
    (0..deg).map(|i| coeffs[i] * C::new((deg - i) as f64, 0.0)).collect()
}

/// Refine a root cluster of `p` by contour power sums: on a circle around
/// `center` that encloses the cluster and nothing else,
/// count = (1/2 pi i) contour integral of p'/p and first moment likewise with
/// an extra factor z. Returns (multiplicity, centroid). The centroid is
/// accurate at the coefficient level even when the individual roots of a
/// multiple cluster are smeared by eps^(1/multiplicity).
pub fn root_cluster_refine(coeffs: &[C], center: C, radius: f64) -> (usize, C) {
    let dp = poly_derivative(coeffs);
    let nodes = 256usize;
    let mut count = ZERO;
    let mut moment = ZERO;
    for j in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / nodes as f64;
        let dz = C::from_polar(radius, theta); // also z - center
        let z = center + dz;
        let ratio = poly_eval(&dp, z) / poly_eval(coeffs, z);
        // (1/2 pi i) * f(z) dz with dz = i * dzvec * dtheta collapses to the
        // plain average of f(z) * (z - center) plus the center shift.
        count += ratio * dz;
        moment += ratio * dz * z;
    }
    let n = C::new(nodes as f64, 0.0);
    count /= n;
    moment /= n;
    let mu = count.re.round().max(0.0) as usize;
    if mu == 0 {
        return (0, center);
    }
    (mu, moment / C::new(mu as f64, 0.0))
}

/// Laurent polynomial in one variable with complex coefficients;
/// `coeffs[i]` multiplies z^(min_deg + i).
#[derive(Debug, Clone)]
pub struct LaurentPoly {
    pub min_deg: i64,
    pub coeffs: Vec<C>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly { min_deg: 0, coeffs: Vec::new() }
    }

    pub fn monomial(deg: i64, w: C) -> Self {
        LaurentPoly { min_deg: deg, coeffs: vec![w] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn trim(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            self.coeffs.pop();
        }
        let lead_zeros = self.coeffs.iter().take_while(|c| c.norm() == 0.0).count();
        if lead_zeros > 0 {
            self.coeffs.drain(..lead_zeros);
            self.min_deg += lead_zeros as i64;
        }
        if self.coeffs.is_empty() {
            self.min_deg = 0;
        }
        self
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let lo = self.min_deg.min(other.min_deg);
        let hi = (self.min_deg + self.coeffs.len() as i64)
            .max(other.min_deg + other.coeffs.len() as i64);
        let mut coeffs = vec![ZERO; (hi - lo) as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[(self.min_deg - lo) as usize + i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            coeffs[(other.min_deg - lo) as usize + i] += c;
        }
        LaurentPoly { min_deg: lo, coeffs }.trim()
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || other.is_zero() {
            return LaurentPoly::zero();
        }
        let mut coeffs = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        LaurentPoly { min_deg: self.min_deg + other.min_deg, coeffs }.trim()
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly { min_deg: self.min_deg, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn eval(&self, z: C) -> C {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * z.powi((self.min_deg + i as i64) as i32))
            .sum()
    }

    /// Roots away from z = 0, via the associated ordinary polynomial.
    pub fn nonzero_roots(&self) -> Vec<C> {
        if self.is_zero() {
            return Vec::new();
        }
        let descending: Vec<C> = self.coeffs.iter().rev().copied().collect();
        poly_roots(&descending)
    }
}

/// Determinant of a matrix of Laurent polynomials by cofactor expansion.
/// Exponential in the matrix side, which is fine for fundamental cells.
pub fn laurent_det(entries: &[Vec<LaurentPoly>]) -> LaurentPoly {
    let n = entries.len();
    assert!(entries.iter().all(|row| row.len() == n));
    let cols: Vec<usize> = (0..n).collect();
    laurent_det_rec(entries, 0, &cols)
}

fn laurent_det_rec(entries: &[Vec<LaurentPoly>], row: usize, cols: &[usize]) -> LaurentPoly {
    if cols.is_empty() {
        return LaurentPoly::monomial(0, ONE);
    }
    let mut acc = LaurentPoly::zero();
    for (pos, &j) in cols.iter().enumerate() {
        let a = &entries[row][j];
        if a.is_zero() {
            continue;
        }
        let rest: Vec<usize> =
            cols.iter().enumerate().filter(|&(p, _)| p != pos).map(|(_, &c)| c).collect();
        let minor = laurent_det_rec(entries, row + 1, &rest);
        let signed = if pos % 2 == 0 { a.mul(&minor) } else { a.mul(&minor).neg() };
        acc = acc.add(&signed);
    }
    acc
}
