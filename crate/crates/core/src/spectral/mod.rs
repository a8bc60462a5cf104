//! Fourier representation, collocation grid and the matrices of the
//! collocation-based harmonic balance framework.
//!
//! Coefficients are always ordered `[x0, cos1, sin1, cos2, sin2, ..., cosN, sinN]`.
//! The grid is `t_i = (i-1) T / M` for `i = 1..M`, so `ω t_i = 2π (i-1) / M`
//! does not depend on `ω`.

mod alias;
mod convolution;

pub use alias::{
    conditional_identity_gap, fold_wavenumber, predict_alias_entries, AliasEntry, AliasPrediction,
    IdentityGap,
};
pub use convolution::{exact_field_harmonics, exact_poly_harmonics, Spectrum};

use crate::error::{HbError, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Truncation order and fundamental angular frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicBasis {
    order: usize,
    omega: f64,
}

impl HarmonicBasis {
    pub fn new(order: usize, omega: f64) -> Result<Self> {
        if order == 0 {
            return Err(HbError::InvalidInput(
                "truncation order N must be >= 1".into(),
            ));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(HbError::InvalidInput(format!(
                "omega must be positive, got {omega}"
            )));
        }
        Ok(Self { order, omega })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Number of real coefficients per state component, `2N+1`.
    pub fn size(&self) -> usize {
        2 * self.order + 1
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(self.order, omega)
    }
}

/// Real Fourier coefficients of a `dim`-dimensional periodic signal, stored
/// component-major: component `k` occupies `data[k*(2N+1)..(k+1)*(2N+1)]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierCoeffs {
    dim: usize,
    order: usize,
    data: Vec<f64>,
}

impl FourierCoeffs {
    pub fn zeros(dim: usize, order: usize) -> Self {
        Self {
            dim,
            order,
            data: vec![0.0; dim * (2 * order + 1)],
        }
    }

    pub fn from_vec(dim: usize, order: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || order == 0 {
            return Err(HbError::InvalidInput(
                "dimension and order must be positive".into(),
            ));
        }
        if data.len() != dim * (2 * order + 1) {
            return Err(HbError::InvalidInput(format!(
                "expected {} coefficients for dim {dim}, N {order}; got {}",
                dim * (2 * order + 1),
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(HbError::NonFinite(format!("coefficient {i}")));
        }
        Ok(Self { dim, order, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn component(&self, k: usize) -> &[f64] {
        let n = 2 * self.order + 1;
        &self.data[k * n..(k + 1) * n]
    }

    pub fn component_mut(&mut self, k: usize) -> &mut [f64] {
        let n = 2 * self.order + 1;
        &mut self.data[k * n..(k + 1) * n]
    }

    /// Zero-pads or truncates to a new order.
    pub fn resized(&self, order: usize) -> Self {
        let mut out = Self::zeros(self.dim, order);
        let keep = 2 * order.min(self.order) + 1;
        for k in 0..self.dim {
            out.component_mut(k)[..keep].copy_from_slice(&self.component(k)[..keep]);
        }
        out
    }

    /// Amplitude `sqrt(cos_n^2 + sin_n^2)` of harmonic `n` in component `k`.
    pub fn harmonic_amplitude(&self, k: usize, n: usize) -> f64 {
        let c = self.component(k);
        c[2 * n - 1].hypot(c[2 * n])
    }
}

/// Equispaced collocation nodes over one period.
#[derive(Clone, Debug, PartialEq)]
pub struct CollocationGrid {
    node_count: usize,
    omega: f64,
    nodes: Vec<f64>,
}

impl CollocationGrid {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `ω t_i` for node `i` (zero-based), reduced exactly for harmonic `n`.
    fn angle(&self, n: usize, i: usize) -> f64 {
        harmonic_angle(n, i, self.node_count)
    }
}

/// `2π ((n·i) mod M) / M`, the reduced phase of harmonic `n` at node `i`.
pub(crate) fn harmonic_angle(n: usize, i: usize, m: usize) -> f64 {
    let r = (n as u128 * i as u128 % m as u128) as f64;
    2.0 * PI * r / m as f64
}

pub fn build_grid(basis: &HarmonicBasis, m: usize) -> Result<CollocationGrid> {
    if m < basis.size() {
        return Err(HbError::RankDeficient {
            m,
            required: basis.size(),
        });
    }
    let t_period = basis.period();
    let nodes = (0..m).map(|i| i as f64 * t_period / m as f64).collect();
    Ok(CollocationGrid {
        node_count: m,
        omega: basis.omega(),
        nodes,
    })
}

/// E, E⁺, A, E1 and the aliasing matrix `E_A = E⁺ E1` for one `(N, M, φ)`.
#[derive(Clone, Debug)]
pub struct SpectralOperators {
    pub order: usize,
    pub node_count: usize,
    pub degree: u32,
    pub omega: f64,
    /// M × (2N+1) collocation matrix.
    pub e: DMatrix<f64>,
    /// (2N+1) × M explicit Moore-Penrose inverse.
    pub e_plus: DMatrix<f64>,
    /// (2N+1) × (2N+1) block-diagonal derivative operator.
    pub a: DMatrix<f64>,
    /// M × 2N(φ-1) matrix of harmonics N+1..φN at the nodes.
    pub e1: DMatrix<f64>,
    /// (2N+1) × 2N(φ-1) aliasing matrix.
    pub e_alias: DMatrix<f64>,
}

pub fn build_operators(
    basis: &HarmonicBasis,
    grid: &CollocationGrid,
    degree: u32,
) -> Result<SpectralOperators> {
    if degree == 0 {
        return Err(HbError::InvalidInput(
            "degree of nonlinearity must be >= 1".into(),
        ));
    }
    if (grid.omega - basis.omega()).abs() > 1e-14 * basis.omega() {
        return Err(HbError::InvalidInput(
            "grid and basis frequencies differ".into(),
        ));
    }
    let n = basis.order();
    let m = grid.node_count();
    if m < basis.size() {
        return Err(HbError::RankDeficient {
            m,
            required: basis.size(),
        });
    }
    let size = basis.size();
    let e = DMatrix::from_fn(m, size, |i, j| trig_column(grid, i, j));
    let scale = 2.0 / m as f64;
    let e_plus = DMatrix::from_fn(size, m, |j, i| {
        let v = scale * trig_column(grid, i, j);
        if j == 0 {
            0.5 * v
        } else {
            v
        }
    });
    let a = derivative_operator(n);
    let high = 2 * n * (degree as usize - 1);
    let e1 = DMatrix::from_fn(m, high, |i, j| {
        let harmonic = n + 1 + j / 2;
        let angle = grid.angle(harmonic, i);
        if j % 2 == 0 {
            angle.cos()
        } else {
            angle.sin()
        }
    });
    let e_alias = &e_plus * &e1;
    Ok(SpectralOperators {
        order: n,
        node_count: m,
        degree,
        omega: basis.omega(),
        e,
        e_plus,
        a,
        e1,
        e_alias,
    })
}

fn trig_column(grid: &CollocationGrid, i: usize, j: usize) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let harmonic = j.div_ceil(2);
    let angle = grid.angle(harmonic, i);
    if j % 2 == 1 {
        angle.cos()
    } else {
        angle.sin()
    }
}

/// Block-diagonal `A` with `J_n = n [[0, 1], [-1, 0]]`.
pub fn derivative_operator(order: usize) -> DMatrix<f64> {
    let size = 2 * order + 1;
    let mut a = DMatrix::zeros(size, size);
    for h in 1..=order {
        a[(2 * h - 1, 2 * h)] = h as f64;
        a[(2 * h, 2 * h - 1)] = -(h as f64);
    }
    a
}

/// Applies `ωA` to one component's coefficients.
pub fn apply_derivative(coeffs: &[f64], omega: f64, out: &mut [f64]) {
    out[0] = 0.0;
    let order = (coeffs.len() - 1) / 2;
    for h in 1..=order {
        let w = omega * h as f64;
        out[2 * h - 1] = w * coeffs[2 * h];
        out[2 * h] = -w * coeffs[2 * h - 1];
    }
}

/// Evaluates the truncated series at time `t`.
pub fn eval_series(coeffs: &FourierCoeffs, basis: &HarmonicBasis, t: f64) -> Vec<f64> {
    let (cs, sn) = harmonic_table(coeffs.order(), basis.omega() * t);
    (0..coeffs.dim())
        .map(|k| {
            let c = coeffs.component(k);
            let mut v = c[0];
            for h in 1..=coeffs.order() {
                v += c[2 * h - 1] * cs[h] + c[2 * h] * sn[h];
            }
            v
        })
        .collect()
}

/// Evaluates the time derivative of the truncated series at time `t`.
pub fn eval_series_derivative(coeffs: &FourierCoeffs, basis: &HarmonicBasis, t: f64) -> Vec<f64> {
    let w = basis.omega();
    let (cs, sn) = harmonic_table(coeffs.order(), w * t);
    (0..coeffs.dim())
        .map(|k| {
            let c = coeffs.component(k);
            let mut v = 0.0;
            for h in 1..=coeffs.order() {
                let hw = h as f64 * w;
                v += hw * (c[2 * h] * cs[h] - c[2 * h - 1] * sn[h]);
            }
            v
        })
        .collect()
}

/// `cos(hθ)`, `sin(hθ)` for `h = 0..=order`.
fn harmonic_table(order: usize, theta: f64) -> (Vec<f64>, Vec<f64>) {
    let mut cs = Vec::with_capacity(order + 1);
    let mut sn = Vec::with_capacity(order + 1);
    for h in 0..=order {
        let (s, c) = (h as f64 * theta).sin_cos();
        cs.push(c);
        sn.push(s);
    }
    (cs, sn)
}

/// Peak deviation from the mean of every component: the best of `samples`
/// equispaced points, refined by golden-section search between its neighbours.
pub fn peak_amplitudes(coeffs: &FourierCoeffs, basis: &HarmonicBasis, samples: usize) -> Vec<f64> {
    let samples = samples.max(4);
    let t_period = basis.period();
    let dt = t_period / samples as f64;
    let mut best = vec![(0.0f64, 0.0f64); coeffs.dim()];
    for s in 0..samples {
        let t = s as f64 * dt;
        let x = eval_series(coeffs, basis, t);
        for k in 0..coeffs.dim() {
            let dev = (x[k] - coeffs.component(k)[0]).abs();
            if dev > best[k].1 {
                best[k] = (t, dev);
            }
        }
    }
    best.iter()
        .enumerate()
        .map(|(k, &(t, dev))| {
            let mean = coeffs.component(k)[0];
            let g = |t: f64| (eval_series(coeffs, basis, t)[k] - mean).abs();
            let ratio = 0.5 * (5f64.sqrt() - 1.0);
            let (mut a, mut b) = (t - dt, t + dt);
            let mut c = b - ratio * (b - a);
            let mut d = a + ratio * (b - a);
            let (mut gc, mut gd) = (g(c), g(d));
            for _ in 0..80 {
                if gc > gd {
                    b = d;
                    d = c;
                    gd = gc;
                    c = b - ratio * (b - a);
                    gc = g(c);
                } else {
                    a = c;
                    c = d;
                    gc = gd;
                    d = a + ratio * (b - a);
                    gd = g(d);
                }
            }
            dev.max(gc).max(gd)
        })
        .collect()
}

/// Projects samples of a `dim`-vector signal taken on a grid of `M` equispaced
/// nodes onto the truncated basis with `E⁺`.
pub fn project_samples(samples: &[Vec<f64>], order: usize) -> FourierCoeffs {
    let m = samples.len();
    let dim = samples[0].len();
    let mut out = FourierCoeffs::zeros(dim, order);
    for k in 0..dim {
        let c = out.component_mut(k);
        for (i, s) in samples.iter().enumerate() {
            c[0] += s[k] / m as f64;
            for h in 1..=order {
                let angle = harmonic_angle(h, i, m);
                c[2 * h - 1] += 2.0 / m as f64 * s[k] * angle.cos();
                c[2 * h] += 2.0 / m as f64 * s[k] * angle.sin();
            }
        }
    }
    out
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Induced ∞-norm (maximum absolute row sum).
pub fn matrix_inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
