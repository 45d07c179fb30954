//! Two-dimensional DFT helpers and trigonometric interpolation on the
//! periodic lattice grid.
//!
//! Samples live at lattice coordinates `(i/n, j/m)`, row-major with the `s`
//! index outermost. Coefficients are normalized so that
//! `f(s, t) = sum c[k1, k2] exp(2 pi i (k1 s + k2 t))`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Coefficients below this fraction of the largest one are rounding noise and
/// are skipped by the interpolant.
const PRUNE_REL: f64 = 1e-16;

/// Signed wave number of DFT bin `idx` out of `n`; the Nyquist bin maps to `-n/2`.
pub(crate) fn wavenumber(idx: usize, n: usize) -> i64 {
    if idx < n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

pub(crate) fn is_nyquist(idx: usize, n: usize) -> bool {
    n.is_multiple_of(2) && idx == n / 2
}

fn transform(data: &mut [Complex64], n: usize, m: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let (row_fft, col_fft) = if inverse {
        (planner.plan_fft_inverse(m), planner.plan_fft_inverse(n))
    } else {
        (planner.plan_fft_forward(m), planner.plan_fft_forward(n))
    };
    for row in data.chunks_exact_mut(m) {
        row_fft.process(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..m {
        for i in 0..n {
            column[i] = data[i * m + j];
        }
        col_fft.process(&mut column);
        for i in 0..n {
            data[i * m + j] = column[i];
        }
    }
}

/// Normalized Fourier coefficients of real samples.
pub(crate) fn forward(values: &[f64], n: usize, m: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&mut data, n, m, false);
    let norm = 1.0 / (n * m) as f64;
    data.iter_mut().for_each(|c| *c *= norm);
    data
}

/// Real part of the synthesis `sum c exp(...)` at the grid nodes.
pub(crate) fn inverse(coeffs: &[Complex64], n: usize, m: usize) -> Vec<f64> {
    let mut data = coeffs.to_vec();
    transform(&mut data, n, m, true);
    data.iter().map(|c| c.re).collect()
}

/// One-dimensional basis function for bin `idx`: `exp(2 pi i k s)`, or
/// `cos(pi n s)` for the Nyquist bin so that real data stay real off-grid.
/// Returns the value and its `s`-derivative.
fn basis(idx: usize, n: usize, s: f64) -> (Complex64, Complex64) {
    if is_nyquist(idx, n) {
        let w = PI * n as f64;
        let (sn, cs) = (w * s).sin_cos();
        (Complex64::new(cs, 0.0), Complex64::new(-w * sn, 0.0))
    } else {
        let w = 2.0 * PI * wavenumber(idx, n) as f64;
        let (sn, cs) = (w * s).sin_cos();
        let e = Complex64::new(cs, sn);
        (e, Complex64::new(0.0, w) * e)
    }
}

/// Sparse trigonometric interpolant of a real grid function.
#[derive(Debug, Clone)]
pub(crate) struct Interpolant {
    n: usize,
    m: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    /// (position in `rows`, position in `cols`, coefficient)
    entries: Vec<(usize, usize, Complex64)>,
}

impl Interpolant {
    pub(crate) fn from_coeffs(coeffs: &[Complex64], n: usize, m: usize) -> Self {
        let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cutoff = max * PRUNE_REL;
        let mut row_pos = vec![usize::MAX; n];
        let mut col_pos = vec![usize::MAX; m];
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..m {
                let c = coeffs[i * m + j];
                if c.norm() <= cutoff || c.norm() == 0.0 {
                    continue;
                }
                if row_pos[i] == usize::MAX {
                    row_pos[i] = rows.len();
                    rows.push(i);
                }
                if col_pos[j] == usize::MAX {
                    col_pos[j] = cols.len();
                    cols.push(j);
                }
                entries.push((row_pos[i], col_pos[j], c));
            }
        }
        Self {
            n,
            m,
            rows,
            cols,
            entries,
        }
    }

    pub(crate) fn from_values(values: &[f64], n: usize, m: usize) -> Self {
        // constant data: skip the transform so no rounding noise leaks in
        if let Some(&first) = values.first() {
            if values.iter().all(|&v| v == first) {
                let mut coeffs = vec![Complex64::new(0.0, 0.0); n * m];
                coeffs[0] = Complex64::new(first, 0.0);
                return Self::from_coeffs(&coeffs, n, m);
            }
        }
        Self::from_coeffs(&forward(values, n, m), n, m)
    }

    pub(crate) fn eval(&self, s: f64, t: f64) -> f64 {
        let es: Vec<Complex64> = self.rows.iter().map(|&i| basis(i, self.n, s).0).collect();
        let et: Vec<Complex64> = self.cols.iter().map(|&j| basis(j, self.m, t).0).collect();
        self.entries
            .iter()
            .map(|&(r, c, coef)| (coef * es[r] * et[c]).re)
            .sum()
    }

    /// Value and lattice-coordinate derivatives `(f, df/ds, df/dt)`.
    pub(crate) fn eval_with_gradient(&self, s: f64, t: f64) -> (f64, f64, f64) {
        let es: Vec<(Complex64, Complex64)> = self.rows.iter().map(|&i| basis(i, self.n, s)).collect();
        let et: Vec<(Complex64, Complex64)> = self.cols.iter().map(|&j| basis(j, self.m, t)).collect();
        let mut acc = (0.0, 0.0, 0.0);
        for &(r, c, coef) in &self.entries {
            let (fs, dfs) = es[r];
            let (ft, dft) = et[c];
            acc.0 += (coef * fs * ft).re;
            acc.1 += (coef * dfs * ft).re;
            acc.2 += (coef * fs * dft).re;
        }
        acc
    }
}
