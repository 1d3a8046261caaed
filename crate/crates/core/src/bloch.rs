//! Bloch matrices, band structure, and the unitary transform between cover
//! functions and their quasimomentum fibers.
//!
//! With the action convention of [`crate::model`], substituting the plane-wave
//! ansatz u(g, v) = e^{i k.g} phi(v) turns the operator into the m x m matrix
//!
//! ```text
//! P(k)[v, v'] = sum over terms (v -> v', s, w) of w e^{i k.s}  -  shift * I
//! ```
//!
//! acting on phi. Band functions are its sorted eigenvalues (selfadjoint
//! operators only); the transform pair below realizes the direct-integral
//! decomposition on a finite quasimomentum grid.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::linalg::{hermitian_eigen, CMat};
use crate::model::{validate_operator, PeriodicOperator, WindowFunction};
use crate::{Error, Result};

type C = Complex64;

/// Assemble P(k) including the stored energy shift on the diagonal.
pub fn bloch_matrix(op: &PeriodicOperator, k: &[f64]) -> CMat {
    assert_eq!(k.len(), op.rank, "quasimomentum of wrong rank");
    let m = op.cell_size();
    let mut p = CMat::zeros(m, m);
    for t in &op.terms {
        let phase: f64 = k.iter().zip(&t.shift).map(|(ki, &si)| ki * si as f64).sum();
        p[(t.from, t.to)] += t.weight * C::from_polar(1.0, phase);
    }
    let shift = C::new(op.energy_shift, 0.0);
    for v in 0..m {
        p[(v, v)] -= shift;
    }
    p
}

/// P(z) for complex quasimomentum: each entry of `bloch_matrix` is a finite
/// sum of exponentials in k, so it extends entire in every variable.
pub fn bloch_matrix_complex(op: &PeriodicOperator, z: &[C]) -> CMat {
    assert_eq!(z.len(), op.rank, "quasimomentum of wrong rank");
    let m = op.cell_size();
    let mut p = CMat::zeros(m, m);
    let i = C::new(0.0, 1.0);
    for t in &op.terms {
        let mut phase = C::new(0.0, 0.0);
        for (zi, &si) in z.iter().zip(&t.shift) {
            phase += zi * si as f64;
        }
        p[(t.from, t.to)] += t.weight * (i * phase).exp();
    }
    let shift = C::new(op.energy_shift, 0.0);
    for v in 0..m {
        p[(v, v)] -= shift;
    }
    p
}

/// Largest Bloch-matrix norm over the scan grid; the reference scale for all
/// relative tolerances in the Fermi machinery.
pub fn grid_scale(op: &PeriodicOperator, res: usize) -> f64 {
    let grid = KGrid::new(op.rank, res);
    let mut scale: f64 = 0.0;
    for idx in 0..grid.len() {
        let k = grid.node(idx);
        scale = scale.max(bloch_matrix(op, &k).frobenius());
    }
    scale.max(f64::MIN_POSITIVE)
}

/// Sorted eigenvalues of P(k). Refuses non-selfadjoint operators, for which
/// eigenvalues stop being real and "bands" stop meaning anything.
pub fn band_functions(op: &PeriodicOperator, k: &[f64]) -> Result<Vec<f64>> {
    let report = validate_operator(op);
    if !report.selfadjoint {
        return Err(Error::NotSelfadjoint(
            "band functions are defined for selfadjoint operators".into(),
        ));
    }
    let (vals, _) = hermitian_eigen(&bloch_matrix(op, k));
    Ok(vals)
}

/// Bands sampled along a piecewise-linear path in the Brillouin zone.
pub struct BandPath {
    /// Cumulative Euclidean path length at each sample.
    pub t: Vec<f64>,
    pub k: Vec<Vec<f64>>,
    /// bands[i][j] = j-th band at sample i, ascending in j.
    pub bands: Vec<Vec<f64>>,
}

/// Sample band functions along the polyline through `waypoints`. Each segment
/// carries `samples_per_segment` evenly spaced samples including both ends
/// (values below 2 are clamped to endpoints only); shared junction points are
/// emitted once.
pub fn band_path(
    op: &PeriodicOperator,
    waypoints: &[Vec<f64>],
    samples_per_segment: usize,
) -> Result<BandPath> {
    if waypoints.len() < 2 {
        return Err(Error::ShapeMismatch("a band path needs at least two waypoints".into()));
    }
    for w in waypoints {
        if w.len() != op.rank {
            return Err(Error::ShapeMismatch(format!(
                "waypoint {w:?} does not match operator rank {}",
                op.rank
            )));
        }
    }
    let per = samples_per_segment.max(2);
    let mut out = BandPath { t: Vec::new(), k: Vec::new(), bands: Vec::new() };
    let mut t_acc = 0.0f64;
    for (seg, pair) in waypoints.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        let seg_len: f64 = a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum::<f64>().sqrt();
        let start = if seg == 0 { 0 } else { 1 };
        for j in start..per {
            let s = j as f64 / (per - 1) as f64;
            let k: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect();
            out.t.push(t_acc + s * seg_len);
            out.bands.push(band_functions(op, &k)?);
            out.k.push(k);
        }
        t_acc += seg_len;
    }
    Ok(out)
}

impl BandPath {
    /// CSV rows `t,k1..kn,band1..bandm` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.k.first().map_or(0, |k| k.len());
        let m = self.bands.first().map_or(0, |b| b.len());
        let mut s = String::from("t");
        for i in 1..=n {
            s.push_str(&format!(",k{i}"));
        }
        for j in 1..=m {
            s.push_str(&format!(",band{j}"));
        }
        s.push('\n');
        for i in 0..self.t.len() {
            s.push_str(&format!("{:.16e}", self.t[i]));
            for v in &self.k[i] {
                s.push_str(&format!(",{v:.16e}"));
            }
            for v in &self.bands[i] {
                s.push_str(&format!(",{v:.16e}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Uniform quasimomentum grid: `res` nodes per axis at k_j = -pi + 2 pi j / res.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KGrid {
    pub rank: usize,
    pub res: usize,
}

impl KGrid {
    pub fn new(rank: usize, res: usize) -> Self {
        assert!(res >= 1);
        KGrid { rank, res }
    }

    pub fn len(&self) -> usize {
        self.res.pow(self.rank as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.rank];
        let mut rem = flat;
        for ax in (0..self.rank).rev() {
            idx[ax] = rem % self.res;
            rem /= self.res;
        }
        idx
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .map(|&j| -PI + 2.0 * PI * j as f64 / self.res as f64)
            .collect()
    }

    /// Inclusive per-axis bounds of the deck box this grid can represent
    /// without aliasing: [-floor(res/2), ceil(res/2) - 1].
    pub fn nyquist_box(&self) -> (i64, i64) {
        let res = self.res as i64;
        (-(res / 2), (res + 1) / 2 - 1)
    }
}

/// Fiber samples of a transformed function: one complex value per grid node
/// and cell vertex.
#[derive(Debug, Clone)]
pub struct FloquetSamples {
    pub grid: KGrid,
    pub m: usize,
    /// Row-major over flat grid index, innermost vertex index.
    pub values: Vec<C>,
}

impl FloquetSamples {
    pub fn get(&self, flat: usize, v: usize) -> C {
        self.values[flat * self.m + v]
    }

    /// Mean over nodes of the squared fiber norm; equals the squared l2 norm
    /// of the original function (discrete Plancherel identity).
    pub fn mean_norm_sq(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.grid.len() as f64
    }
}

/// Forward transform (Uu)(k, v) = sum_g u(g, v) e^{-i k.g} on the grid nodes.
/// The support of u must fit the grid's Nyquist box on every axis.
pub fn floquet_transform(u: &WindowFunction, grid: &KGrid) -> Result<FloquetSamples> {
    if u.rank() != grid.rank {
        return Err(Error::ShapeMismatch("window rank differs from grid rank".into()));
    }
    let (lo, hi) = grid.nyquist_box();
    let mut support = Vec::new();
    for g in u.points() {
        if (0..u.m).any(|v| u.get(&g, v).norm() != 0.0) {
            if g.iter().any(|&gi| gi < lo || gi > hi) {
                return Err(Error::Aliasing(format!(
                    "support point {g:?} falls outside the Nyquist box [{lo}, {hi}]^n of a {} node grid",
                    grid.res
                )));
            }
            support.push(g);
        }
    }
    let mut values = vec![C::new(0.0, 0.0); grid.len() * u.m];
    for flat in 0..grid.len() {
        let k = grid.node(flat);
        for g in &support {
            let phase: f64 = k.iter().zip(g).map(|(ki, &gi)| ki * gi as f64).sum();
            let w = C::from_polar(1.0, -phase);
            for v in 0..u.m {
                values[flat * u.m + v] += u.get(g, v) * w;
            }
        }
    }
    Ok(FloquetSamples { grid: grid.clone(), m: u.m, values })
}

/// Inverse transform: u(g, v) = mean over nodes of samples e^{+i k.g},
/// reconstructed on the full Nyquist box.
pub fn inverse_floquet_transform(samples: &FloquetSamples) -> Result<WindowFunction> {
    let grid = &samples.grid;
    let (lo, hi) = grid.nyquist_box();
    let mut u = WindowFunction::new(vec![lo; grid.rank], vec![hi; grid.rank], samples.m)?;
    let count = grid.len() as f64;
    for g in u.points() {
        for v in 0..samples.m {
            let mut acc = C::new(0.0, 0.0);
            for flat in 0..grid.len() {
                let k = grid.node(flat);
                let phase: f64 = k.iter().zip(&g).map(|(ki, &gi)| ki * gi as f64).sum();
                acc += samples.get(flat, v) * C::from_polar(1.0, phase);
            }
            u.set(&g, v, acc / count);
        }
    }
    Ok(u)
}
