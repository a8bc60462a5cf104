//! Nonlinear algebraic residuals of the collocation framework.
//!
//! Unknowns are always the `d·(2N+1)` Fourier coefficients (minus a pinned
//! phase coefficient for autonomous systems). The time-domain residual is
//! `ωA x̂ − E⁺ f̃(E x̂)`; the frequency-domain residual replaces the projection
//! with the exact harmonics of the polynomial field. Invariant constraints of
//! recast systems add one row each (the mean of `g(x(t))`).

use crate::error::{HbError, Result};
use crate::spectral::{
    apply_derivative, build_grid, build_operators, exact_field_harmonics, exact_poly_harmonics,
    FourierCoeffs, HarmonicBasis, SpectralOperators,
};
use crate::systems::{Degree, SystemDef};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodMode {
    /// `M = (φ+1)N + 1`.
    Rhb,
    /// `M = 2N + 1`.
    Hdhb,
    /// `M = 2φN + 1`.
    Aft,
    /// Explicit `M ≥ 2N + 1`.
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub mode: MethodMode,
    pub order: usize,
    pub omega: f64,
    /// Required for [`MethodMode::Custom`], ignored otherwise.
    pub node_count: Option<usize>,
}

impl MethodConfig {
    pub fn new(mode: MethodMode, order: usize, omega: f64) -> Self {
        Self {
            mode,
            order,
            omega,
            node_count: None,
        }
    }

    pub fn custom(order: usize, omega: f64, node_count: usize) -> Self {
        Self {
            mode: MethodMode::Custom,
            order,
            omega,
            node_count: Some(node_count),
        }
    }

    pub fn basis(&self) -> Result<HarmonicBasis> {
        HarmonicBasis::new(self.order, self.omega)
    }

    /// Collocation count implied by the mode for a field of the given degree.
    pub fn collocation_count(&self, degree: Degree, system: &str) -> Result<usize> {
        let n = self.order;
        let m = match (self.mode, degree) {
            (MethodMode::Hdhb, _) => 2 * n + 1,
            (MethodMode::Rhb, Degree::Finite(phi)) => (phi as usize + 1) * n + 1,
            (MethodMode::Aft, Degree::Finite(phi)) => 2 * phi as usize * n + 1,
            (MethodMode::Rhb | MethodMode::Aft, Degree::NonPolynomial) => {
                return Err(HbError::NonPolynomial(system.to_string()))
            }
            (MethodMode::Custom, _) => self
                .node_count
                .ok_or_else(|| HbError::InvalidInput("custom mode needs an explicit M".into()))?,
        };
        if m < 2 * n + 1 {
            return Err(HbError::RankDeficient {
                m,
                required: 2 * n + 1,
            });
        }
        Ok(m)
    }
}

#[derive(Clone, Debug)]
pub enum Formulation {
    TimeDomain(Arc<SpectralOperators>),
    /// Exact harmonic balance through trigonometric convolution.
    Frequency {
        degree: u32,
    },
}

/// A square-or-tall nonlinear system `r(u) = 0` in the reduced unknowns `u`.
#[derive(Clone, Debug)]
pub struct ResidualSystem {
    system: SystemDef,
    basis: HarmonicBasis,
    formulation: Formulation,
    anchor: Option<usize>,
    invariant_rows: bool,
    keep_anchor_row: bool,
}

pub fn build_time_domain_residual(sys: &SystemDef, cfg: &MethodConfig) -> Result<ResidualSystem> {
    let basis = cfg.basis()?;
    let m = cfg.collocation_count(sys.degree(), sys.name())?;
    let grid = build_grid(&basis, m)?;
    let degree = sys.degree_phi().unwrap_or(1);
    let ops = build_operators(&basis, &grid, degree)?;
    Ok(ResidualSystem {
        system: sys.clone(),
        basis,
        formulation: Formulation::TimeDomain(Arc::new(ops)),
        anchor: if sys.is_autonomous() {
            sys.phase_anchor()
        } else {
            None
        },
        invariant_rows: true,
        keep_anchor_row: true,
    })
}

pub fn build_hb_residual(sys: &SystemDef, basis: &HarmonicBasis) -> Result<ResidualSystem> {
    let degree = sys
        .degree_phi()
        .ok_or_else(|| HbError::NonPolynomial(sys.name().to_string()))?;
    Ok(ResidualSystem {
        system: sys.clone(),
        basis: *basis,
        formulation: Formulation::Frequency { degree },
        anchor: if sys.is_autonomous() {
            sys.phase_anchor()
        } else {
            None
        },
        invariant_rows: true,
        keep_anchor_row: true,
    })
}

impl ResidualSystem {
    pub fn system(&self) -> &SystemDef {
        &self.system
    }

    pub fn basis(&self) -> &HarmonicBasis {
        &self.basis
    }

    pub fn formulation(&self) -> &Formulation {
        &self.formulation
    }

    pub fn anchor(&self) -> Option<usize> {
        self.anchor
    }

    /// Collocation count, or `None` for the frequency-domain formulation.
    pub fn node_count(&self) -> Option<usize> {
        match &self.formulation {
            Formulation::TimeDomain(ops) => Some(ops.node_count),
            Formulation::Frequency { .. } => None,
        }
    }

    /// Pins the first-harmonic sine coefficient of `coordinate` (or nothing).
    pub fn with_anchor(mut self, coordinate: Option<usize>) -> Self {
        if let Some(c) = coordinate {
            assert!(c < self.system.dim(), "anchor coordinate out of range");
        }
        self.anchor = coordinate;
        self
    }

    /// Same system and collocation grid at another fundamental frequency.
    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        let mut out = self.clone();
        out.basis = self.basis.with_omega(omega)?;
        Ok(out)
    }

    pub fn with_invariant_rows(mut self, on: bool) -> Self {
        self.invariant_rows = on;
        self
    }

    pub fn with_anchor_row(mut self, keep: bool) -> Self {
        self.keep_anchor_row = keep;
        self
    }

    fn block(&self) -> usize {
        self.basis.size()
    }

    fn anchor_index(&self) -> Option<usize> {
        self.anchor.map(|c| c * self.block() + 2)
    }

    pub fn unknown_count(&self) -> usize {
        self.system.dim() * self.block() - usize::from(self.anchor.is_some())
    }

    pub fn equation_count(&self) -> usize {
        self.system.dim() * self.block()
            - usize::from(self.anchor.is_some() && !self.keep_anchor_row)
            + self.invariant_count()
            - self.replaced_rows().len()
    }

    /// Pairs `(invariant, coordinate)` where the coordinate enters no
    /// component of the field. Its mean is then fixed only by the invariant,
    /// and its constant-term balance row is overwritten by the invariant mean.
    pub fn replaced_rows(&self) -> Vec<(usize, usize)> {
        let Some(polys) = self.system.polynomials() else {
            return Vec::new();
        };
        (0..self.system.dim())
            .filter(|&k| polys.iter().all(|p| p.max_power(k) == 0))
            .take(self.invariant_count())
            .enumerate()
            .collect()
    }

    fn invariant_count(&self) -> usize {
        if self.invariant_rows {
            self.system.invariants().len()
        } else {
            0
        }
    }

    /// Full coefficient set from reduced unknowns.
    pub fn expand(&self, unknowns: &[f64]) -> FourierCoeffs {
        let mut data = unknowns.to_vec();
        if let Some(i) = self.anchor_index() {
            data.insert(i, 0.0);
        }
        FourierCoeffs::from_vec(self.system.dim(), self.basis.order(), data)
            .unwrap_or_else(|_| FourierCoeffs::zeros(self.system.dim(), self.basis.order()))
    }

    /// Reduced unknowns from a coefficient set; anchored systems are first
    /// shifted in time so that the pinned coefficient vanishes.
    pub fn reduce(&self, coeffs: &FourierCoeffs) -> Vec<f64> {
        let coeffs = coeffs.resized(self.basis.order());
        let mut data = match self.anchor {
            Some(c) => align_phase(&coeffs, c).into_vec(),
            None => coeffs.into_vec(),
        };
        if let Some(i) = self.anchor_index() {
            data.remove(i);
        }
        data
    }

    pub fn residual(&self, unknowns: &[f64]) -> Result<Vec<f64>> {
        if unknowns.len() != self.unknown_count() {
            return Err(HbError::InvalidInput(format!(
                "expected {} unknowns, got {}",
                self.unknown_count(),
                unknowns.len()
            )));
        }
        let mut data = unknowns.to_vec();
        if let Some(i) = self.anchor_index() {
            data.insert(i, 0.0);
        }
        let dim = self.system.dim();
        let n = self.block();
        let omega = self.basis.omega();
        let mut out = vec![0.0; dim * n + self.invariant_count()];
        for k in 0..dim {
            apply_derivative(
                &data[k * n..(k + 1) * n],
                omega,
                &mut out[k * n..(k + 1) * n],
            );
        }
        match &self.formulation {
            Formulation::TimeDomain(ops) => self.subtract_projected(ops, &data, &mut out),
            Formulation::Frequency { degree } => self.subtract_exact(*degree, data, &mut out)?,
        }
        let replaced = self.replaced_rows();
        for &(g, k) in &replaced {
            out[k * n] = out[dim * n + g];
        }
        for &(g, _) in replaced.iter().rev() {
            out.remove(dim * n + g);
        }
        if let (Some(i), false) = (self.anchor_index(), self.keep_anchor_row) {
            out.remove(i);
        }
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            return Err(HbError::NonFinite(format!("residual entry {i}")));
        }
        Ok(out)
    }

    fn subtract_projected(&self, ops: &SpectralOperators, data: &[f64], out: &mut [f64]) {
        let dim = self.system.dim();
        let n = self.block();
        let m = ops.node_count;
        let omega = self.basis.omega();
        let coeffs = DMatrix::from_column_slice(n, dim, data);
        let states = &ops.e * &coeffs;
        let t_period = self.basis.period();
        let mut forces = DMatrix::zeros(m, dim);
        let mut x = vec![0.0; dim];
        let mut f = vec![0.0; dim];
        let invariants = &self.system.invariants()[..self.invariant_count()];
        let mut g_mean = vec![0.0; invariants.len()];
        for i in 0..m {
            for k in 0..dim {
                x[k] = states[(i, k)];
            }
            let t = i as f64 * t_period / m as f64;
            self.system.eval(&x, t, omega, &mut f);
            for k in 0..dim {
                forces[(i, k)] = f[k];
            }
            for (acc, g) in g_mean.iter_mut().zip(invariants) {
                *acc += g.eval(&x, omega * t) / m as f64;
            }
        }
        let projected = &ops.e_plus * forces;
        for k in 0..dim {
            for j in 0..n {
                out[k * n + j] -= projected[(j, k)];
            }
        }
        out[dim * n..].copy_from_slice(&g_mean);
    }

    fn subtract_exact(&self, degree: u32, data: Vec<f64>, out: &mut [f64]) -> Result<()> {
        let dim = self.system.dim();
        let n = self.block();
        let polys = self
            .system
            .polynomials()
            .ok_or_else(|| HbError::NonPolynomial(self.system.name().to_string()))?;
        let coeffs = FourierCoeffs::from_vec(dim, self.basis.order(), data)?;
        for (k, (h, _)) in exact_field_harmonics(&coeffs, polys, &self.basis, degree)?
            .into_iter()
            .enumerate()
        {
            for j in 0..n {
                out[k * n + j] -= h[j];
            }
        }
        for (row, g) in self.system.invariants()[..self.invariant_count()]
            .iter()
            .enumerate()
        {
            let (h, _) = exact_poly_harmonics(&coeffs, g, &self.basis, g.degree().max(1))?;
            out[dim * n + row] = h[0];
        }
        Ok(())
    }
}

/// Shifts the time origin so that the first-harmonic sine coefficient of
/// `coordinate` is zero and its cosine coefficient is non-negative.
pub fn align_phase(coeffs: &FourierCoeffs, coordinate: usize) -> FourierCoeffs {
    let c = coeffs.component(coordinate);
    let theta = c[2].atan2(c[1]);
    time_shift(coeffs, theta)
}

/// Coefficients of `x(t + θ/ω)`.
pub fn time_shift(coeffs: &FourierCoeffs, theta: f64) -> FourierCoeffs {
    let mut out = coeffs.clone();
    for k in 0..coeffs.dim() {
        let src = coeffs.component(k);
        let dst = out.component_mut(k);
        for h in 1..=coeffs.order() {
            let (s, c) = (h as f64 * theta).sin_cos();
            let (a, b) = (src[2 * h - 1], src[2 * h]);
            dst[2 * h - 1] = a * c + b * s;
            dst[2 * h] = b * c - a * s;
        }
    }
    out
}

/// Central-difference Jacobian with step `1e-6 · max(1, |x_j|)`.
pub fn jacobian(res: &ResidualSystem, x: &[f64]) -> Result<DMatrix<f64>> {
    let rows = res.equation_count();
    let columns: Vec<Result<Vec<f64>>> = (0..x.len())
        .into_par_iter()
        .map(|j| {
            let h = 1e-6 * x[j].abs().max(1.0);
            let mut xp = x.to_vec();
            xp[j] += h;
            let fp = res.residual(&xp)?;
            xp[j] = x[j] - h;
            let fm = res.residual(&xp)?;
            Ok(fp
                .iter()
                .zip(&fm)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect())
        })
        .collect();
    let mut jac = DMatrix::zeros(rows, x.len());
    for (j, col) in columns.into_iter().enumerate() {
        jac.set_column(j, &DVector::from_vec(col?));
    }
    Ok(jac)
}

/// Per-component `‖E_A ĥ′‖∞` at `coeffs`: how much the collocation grid of
/// `res` folds super-truncation harmonics into the retained ones.
pub fn aliasing_norms(res: &ResidualSystem, coeffs: &FourierCoeffs) -> Result<Vec<f64>> {
    let (Formulation::TimeDomain(ops), Some(polys)) = (&res.formulation, res.system.polynomials())
    else {
        return Ok(Vec::new());
    };
    let degree = res.system.degree_phi().unwrap_or(1);
    if degree < 2 {
        return Ok(vec![0.0; res.system.dim()]);
    }
    let parts = exact_field_harmonics(coeffs, polys, &res.basis, degree)?;
    Ok(parts
        .iter()
        .map(|(_, high)| {
            let v = &ops.e_alias * DVector::from_column_slice(high);
            v.amax()
        })
        .collect())
}
