//! Operator representation and the function windows it acts on.
//!
//! A `PeriodicOperator` encodes a Z^n-periodic difference operator on an
//! abelian cover of a finite graph with `m` cell vertices. Its action is
//!
//! ```text
//! (Pu)(g, v) = sum over terms t with t.from == v of
//!                 w_t * u(g + t.shift, t.to)
//!              - energy_shift * u(g, v)
//! ```
//!
//! so a stored `energy_shift` of `x` analyzes the bare operator at energy
//! level `x`. All Fermi-surface and solution-space machinery in this crate
//! works at the zero level of the shifted operator.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One hopping term of a periodic operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    /// Index of the source vertex in the fundamental cell.
    pub from: usize,
    /// Index of the target vertex.
    pub to: usize,
    /// Deck translation applied to the argument, one entry per lattice axis.
    pub shift: Vec<i64>,
    pub weight: Complex64,
}

/// A Z^n-periodic difference operator on a graph cover.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOperator {
    /// Deck rank n (number of independent lattice directions).
    pub rank: usize,
    /// Vertex labels of the fundamental cell; indices into this list are the
    /// `from`/`to` fields of [`Term`].
    pub vertices: Vec<String>,
    pub terms: Vec<Term>,
    /// Energy level subtracted from the diagonal before any analysis.
    pub energy_shift: f64,
}

/// Outcome of structural validation.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub errors: Vec<String>,
    /// Term multiset is closed under (from,to,s,w) -> (to,from,-s,conj w).
    pub selfadjoint: bool,
    /// All off-diagonal weights are real and nonpositive, diagonal real.
    pub positivity_structure: bool,
    pub rank: usize,
    pub vertex_count: usize,
}

// Wire format. Field order here fixes the JSON key order on output.

#[derive(Serialize, Deserialize)]
struct TermJson {
    from: String,
    to: String,
    shift: Vec<i64>,
    w_re: f64,
    w_im: f64,
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    rank: usize,
    energy_shift: f64,
    vertices: Vec<String>,
    terms: Vec<TermJson>,
}

impl PeriodicOperator {
    pub fn new(
        rank: usize,
        vertices: Vec<String>,
        terms: Vec<Term>,
        energy_shift: f64,
    ) -> Result<Self> {
        let op = PeriodicOperator { rank, vertices, terms, energy_shift };
        let report = validate_operator(&op);
        if !report.valid {
            return Err(Error::InvalidOperator(report.errors.join("; ")));
        }
        Ok(op)
    }

    /// Number of vertices in the fundamental cell.
    pub fn cell_size(&self) -> usize {
        self.vertices.len()
    }

    /// Terms aggregated by (from, to, shift) with weights summed; zero rows dropped.
    pub fn canonical_terms(&self) -> BTreeMap<(usize, usize, Vec<i64>), Complex64> {
        let mut map: BTreeMap<(usize, usize, Vec<i64>), Complex64> = BTreeMap::new();
        for t in &self.terms {
            *map.entry((t.from, t.to, t.shift.clone())).or_insert(Complex64::new(0.0, 0.0)) +=
                t.weight;
        }
        map.retain(|_, w| w.norm() != 0.0);
        map
    }

    /// Sum over terms of |w| * |shift|_1. Dominates the operator-norm change of
    /// the Bloch matrix per unit sup-norm change of k, which makes it the
    /// Lipschitz constant used by grid certificates.
    pub fn lipschitz_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight.norm() * t.shift.iter().map(|s| s.unsigned_abs() as f64).sum::<f64>())
            .sum()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let (op, report) = Self::from_json_str_with_report(s)?;
        if !report.valid {
            return Err(Error::InvalidOperator(report.errors.join("; ")));
        }
        Ok(op)
    }

    /// Parse without the validity gate, returning the operator as written
    /// plus its validation report. JSON shape and vertex-label errors still
    /// fail; structural problems are left to the caller to report.
    pub fn from_json_str_with_report(s: &str) -> Result<(Self, ValidationReport)> {
        let wire: OperatorJson =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let mut index = BTreeMap::new();
        for (i, v) in wire.vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::Parse(format!("duplicate vertex label {v:?}")));
            }
        }
        let mut terms = Vec::with_capacity(wire.terms.len());
        for t in &wire.terms {
            let from = *index.get(&t.from).ok_or_else(|| {
                Error::Parse(format!("unknown vertex label {:?} in term", t.from))
            })?;
            let to = *index
                .get(&t.to)
                .ok_or_else(|| Error::Parse(format!("unknown vertex label {:?} in term", t.to)))?;
            terms.push(Term {
                from,
                to,
                shift: t.shift.clone(),
                weight: Complex64::new(t.w_re, t.w_im),
            });
        }
        let op = PeriodicOperator {
            rank: wire.rank,
            vertices: wire.vertices,
            terms,
            energy_shift: wire.energy_shift,
        };
        let report = validate_operator(&op);
        Ok((op, report))
    }

    pub fn to_json_string(&self) -> String {
        let wire = OperatorJson {
            rank: self.rank,
            energy_shift: self.energy_shift,
            vertices: self.vertices.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    from: self.vertices[t.from].clone(),
                    to: self.vertices[t.to].clone(),
                    shift: t.shift.clone(),
                    w_re: t.weight.re,
                    w_im: t.weight.im,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&wire).expect("operator serialization cannot fail")
    }
}

/// Structural validation; never panics on malformed input.
pub fn validate_operator(op: &PeriodicOperator) -> ValidationReport {
    let mut errors = Vec::new();
    if op.rank == 0 {
        errors.push("rank must be at least 1".to_string());
    }
    if op.vertices.is_empty() {
        errors.push("vertex list is empty".to_string());
    }
    {
        let mut seen = BTreeMap::new();
        for (i, v) in op.vertices.iter().enumerate() {
            if let Some(j) = seen.insert(v, i) {
                errors.push(format!("vertex label {v:?} duplicated at positions {j} and {i}"));
            }
        }
    }
    if !op.energy_shift.is_finite() {
        errors.push("energy_shift is not finite".to_string());
    }
    for (i, t) in op.terms.iter().enumerate() {
        if t.from >= op.vertices.len() || t.to >= op.vertices.len() {
            errors.push(format!("term {i} references a vertex index out of range"));
        }
        if t.shift.len() != op.rank {
            errors.push(format!(
                "term {i} has shift of length {} but rank is {}",
                t.shift.len(),
                op.rank
            ));
        }
        if !t.weight.re.is_finite() || !t.weight.im.is_finite() {
            errors.push(format!("term {i} has a non-finite weight"));
        }
    }

    let valid = errors.is_empty();
    let (selfadjoint, positivity) =
        if valid { (is_selfadjoint(op), has_positivity_structure(op)) } else { (false, false) };
    ValidationReport {
        valid,
        errors,
        selfadjoint,
        positivity_structure: positivity,
        rank: op.rank,
        vertex_count: op.vertices.len(),
    }
}

fn is_selfadjoint(op: &PeriodicOperator) -> bool {
    let canon = op.canonical_terms();
    canon.iter().all(|((from, to, shift), w)| {
        let rev: Vec<i64> = shift.iter().map(|s| -s).collect();
        match canon.get(&(*to, *from, rev)) {
            Some(wr) => (wr - w.conj()).norm() == 0.0,
            None => false,
        }
    })
}

fn has_positivity_structure(op: &PeriodicOperator) -> bool {
    op.canonical_terms().iter().all(|((from, to, shift), w)| {
        if w.im != 0.0 {
            return false;
        }
        let diagonal = from == to && shift.iter().all(|&s| s == 0);
        diagonal || w.re <= 0.0
    })
}

/// The adjoint operator: every term (from, to, s, w) becomes (to, from, -s, conj w).
/// The Bloch matrix of the result at real k is the conjugate transpose of the
/// original one; applying `adjoint` twice returns the original operator.
pub fn adjoint(op: &PeriodicOperator) -> PeriodicOperator {
    PeriodicOperator {
        rank: op.rank,
        vertices: op.vertices.clone(),
        terms: op
            .terms
            .iter()
            .map(|t| Term {
                from: t.to,
                to: t.from,
                shift: t.shift.iter().map(|s| -s).collect(),
                weight: t.weight.conj(),
            })
            .collect(),
        energy_shift: op.energy_shift,
    }
}

/// Exact binomial coefficient, 0 when k < 0 or k > n.
pub fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || k > n || n < 0 {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Dimension of the space of polynomials of degree <= N in n variables:
/// q(n, N) = C(n + N, N). Zero for N < 0.
pub fn q_dim(n: usize, cap: i64) -> usize {
    binomial(n as i64 + cap, cap) as usize
}

/// Dimension of the harmonic-polynomial space for a nondegenerate quadratic:
/// h(n, N) = q(n, N) - q(n, N - 2).
pub fn h_dim(n: usize, cap: i64) -> usize {
    q_dim(n, cap) - q_dim(n, cap - 2)
}

/// Dimension of the homogeneous degree-l slice, C(n + l - 1, l).
pub fn q_dim_homogeneous(n: usize, l: i64) -> usize {
    if l < 0 {
        return 0;
    }
    binomial(n as i64 + l - 1, l) as usize
}

/// Monomial g^j = prod_i g_i^(j_i) evaluated as f64; 0^0 = 1.
pub fn deck_monomial(g: &[i64], j: &[usize]) -> f64 {
    g.iter().zip(j).map(|(&gi, &ji)| (gi as f64).powi(ji as i32)).product()
}

/// A finitely supported function on the cover, stored on an axis-aligned box
/// of deck indices with `m` complex values per lattice point (one per cell
/// vertex). The box bounds are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFunction {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    pub m: usize,
    pub values: Vec<Complex64>,
}

impl WindowFunction {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>, m: usize) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::ShapeMismatch("window bounds of different rank".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::EmptyWindow(format!("lo {lo:?} exceeds hi {hi:?}")));
        }
        let cells: usize = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as usize).product();
        Ok(WindowFunction { lo, hi, m, values: vec![Complex64::new(0.0, 0.0); cells * m] })
    }

    /// Symmetric box [-radius, radius]^n.
    pub fn centered(n: usize, radius: i64, m: usize) -> Self {
        WindowFunction::new(vec![-radius; n], vec![radius; n], m)
            .expect("centered window is never empty")
    }

    pub fn rank(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, g: &[i64]) -> bool {
        g.iter().zip(self.lo.iter().zip(&self.hi)).all(|(gi, (lo, hi))| lo <= gi && gi <= hi)
    }

    fn offset(&self, g: &[i64], v: usize) -> usize {
        debug_assert!(self.contains(g));
        debug_assert!(v < self.m);
        let mut idx = 0usize;
        for (i, gi) in g.iter().enumerate() {
            let extent = (self.hi[i] - self.lo[i] + 1) as usize;
            idx = idx * extent + (gi - self.lo[i]) as usize;
        }
        idx * self.m + v
    }

    pub fn get(&self, g: &[i64], v: usize) -> Complex64 {
        self.values[self.offset(g, v)]
    }

    pub fn set(&mut self, g: &[i64], v: usize, value: Complex64) {
        let at = self.offset(g, v);
        self.values[at] = value;
    }

    /// Lattice points of the box in row-major order.
    pub fn points(&self) -> Vec<Vec<i64>> {
        let n = self.rank();
        let mut out = Vec::new();
        let mut g = self.lo.clone();
        loop {
            out.push(g.clone());
            let mut axis = n;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if g[axis] < self.hi[axis] {
                    g[axis] += 1;
                    break;
                }
                g[axis] = self.lo[axis];
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Sum of |u|^2 over the whole window.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Apply the operator to a window function. The result lives on the largest
/// box where every term's source point is available, so the box shrinks by
/// the term shifts; an empty result box is an error.
pub fn apply_operator(op: &PeriodicOperator, u: &WindowFunction) -> Result<WindowFunction> {
    if u.rank() != op.rank {
        return Err(Error::ShapeMismatch(format!(
            "window rank {} does not match operator rank {}",
            u.rank(),
            op.rank
        )));
    }
    if u.m != op.cell_size() {
        return Err(Error::ShapeMismatch(format!(
            "window carries {} values per point but the cell has {} vertices",
            u.m,
            op.cell_size()
        )));
    }
    let n = op.rank;
    let mut lo = u.lo.clone();
    let mut hi = u.hi.clone();
    for t in &op.terms {
        for i in 0..n {
            // g + shift must stay inside the input box.
            lo[i] = lo[i].max(u.lo[i] - t.shift[i].min(0));
            hi[i] = hi[i].min(u.hi[i] - t.shift[i].max(0));
        }
    }
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return Err(Error::EmptyWindow(
            "term shifts exceed the window extent; enlarge the window".into(),
        ));
    }
    let mut out = WindowFunction::new(lo, hi, u.m)?;
    let shift = Complex64::new(op.energy_shift, 0.0);
    for g in out.points() {
        for v in 0..u.m {
            let mut acc = -shift * u.get(&g, v);
            for t in &op.terms {
                if t.from != v {
                    continue;
                }
                let src: Vec<i64> = g.iter().zip(&t.shift).map(|(a, b)| a + b).collect();
                acc += t.weight * u.get(&src, t.to);
            }
            out.set(&g, v, acc);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn laplacian_validates_selfadjoint() {
        let op = catalog::z1_laplacian(0.0);
        let report = validate_operator(&op);
        assert!(report.valid);
        assert!(report.selfadjoint);
        assert!(report.positivity_structure);
    }

    #[test]
    fn dangling_vertex_label_rejected() {
        let text = r#"{"rank":1,"energy_shift":0.0,"vertices":["a"],
            "terms":[{"from":"a","to":"b","shift":[0],"w_re":1.0,"w_im":0.0}]}"#;
        match PeriodicOperator::from_json_str(text) {
            Err(Error::Parse(msg)) => assert!(msg.contains("unknown vertex")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn drifted_walk_flags() {
        let op = catalog::drifted_walk(0.25, 0.75);
        let report = validate_operator(&op);
        assert!(report.valid);
        assert!(!report.selfadjoint);
        assert!(report.positivity_structure);
    }

    #[test]
    fn apply_laplacian_to_square() {
        // (2 - S - S^{-1}) g^2 = -2 everywhere.
        let op = catalog::z1_laplacian(0.0);
        let mut u = WindowFunction::centered(1, 5, 1);
        for g in u.points() {
            u.set(&g, 0, c((g[0] * g[0]) as f64, 0.0));
        }
        let pu = apply_operator(&op, &u).unwrap();
        assert_eq!(pu.lo, vec![-4]);
        assert_eq!(pu.hi, vec![4]);
        for g in pu.points() {
            assert!((pu.get(&g, 0) - c(-2.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_average_kills_alternating_phase() {
        // (S + S^{-1})/2 applied to i^g vanishes identically.
        let op = catalog::cos_band(0.0);
        let mut u = WindowFunction::centered(1, 6, 1);
        let i = c(0.0, 1.0);
        for g in u.points() {
            u.set(&g, 0, i.powi(g[0] as i32));
        }
        let pu = apply_operator(&op, &u).unwrap();
        for g in pu.points() {
            assert!(pu.get(&g, 0).norm() < 1e-14);
        }
    }

    #[test]
    fn empty_window_detected() {
        let op = catalog::biharmonic_chain(0.0);
        let u = WindowFunction::centered(1, 1, 1);
        match apply_operator(&op, &u) {
            Err(Error::EmptyWindow(_)) => {}
            other => panic!("expected EmptyWindow, got {other:?}"),
        }
    }

    #[test]
    fn adjoint_reverses_single_term() {
        let op = PeriodicOperator::new(
            1,
            vec!["a".into()],
            vec![Term { from: 0, to: 0, shift: vec![1], weight: c(2.0, 3.0) }],
            0.0,
        )
        .unwrap();
        let dual = adjoint(&op);
        assert_eq!(dual.terms.len(), 1);
        assert_eq!(dual.terms[0].shift, vec![-1]);
        assert_eq!(dual.terms[0].weight, c(2.0, -3.0));
        assert_eq!(adjoint(&dual), op);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let op = catalog::ssh_dimer(1.0, 1.0, 0.0);
        let text = op.to_json_string();
        let back = PeriodicOperator::from_json_str(&text).unwrap();
        assert_eq!(back, op);
        assert_eq!(back.to_json_string(), text);
    }

    #[test]
    fn combinatorial_dimensions() {
        assert_eq!(q_dim(2, 3), 10);
        assert_eq!(h_dim(2, 3), 7);
        assert_eq!(q_dim(3, 0), 1);
        assert_eq!(q_dim(1, 4), 5);
        assert_eq!(h_dim(1, 0), 1);
        assert_eq!(h_dim(1, 1), 2);
    }

    #[test]
    fn harmonic_dimension_identity() {
        // h(n, N) = q(n-1, N-1) + q(n-1, N) for all small n, N.
        for n in 1..=6usize {
            for cap in 0..=10i64 {
                assert_eq!(
                    h_dim(n, cap),
                    q_dim(n - 1, cap - 1) + q_dim(n - 1, cap),
                    "n={n} N={cap}"
                );
            }
        }
    }

    #[test]
    fn window_indexing_round_trip() {
        let mut u = WindowFunction::new(vec![-2, 1], vec![1, 3], 2).unwrap();
        let mut expected = Vec::new();
        for (i, g) in u.points().into_iter().enumerate() {
            for v in 0..2 {
                let z = c(i as f64, v as f64);
                u.set(&g, v, z);
                expected.push((g.clone(), v, z));
            }
        }
        for (g, v, z) in expected {
            assert_eq!(u.get(&g, v), z);
        }
    }
}
