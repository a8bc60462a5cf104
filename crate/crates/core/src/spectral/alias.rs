//! Aliasing analysis: wavenumber folding, the closed-form aliasing matrix
//! and the conditional identity `E⁺ f̃ = ĥ + E_A ĥ′`.

use super::{
    build_grid, build_operators, exact_poly_harmonics, inf_norm, FourierCoeffs, HarmonicBasis,
};
use crate::error::{HbError, Result};
use crate::poly::Polynomial;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Folds wavenumber `n` onto the grid of `M` equispaced nodes.
///
/// The aliasing limit is `L = M/2`; the result is `n - mM` in `[-L, L]`.
/// When `M` is even and `n ≡ M/2`, `+L` is returned.
pub fn fold_wavenumber(n: i64, m: usize) -> i64 {
    assert!(m >= 2, "fold_wavenumber needs at least two nodes");
    let m = m as i64;
    let r = n.rem_euclid(m);
    if 2 * r > m {
        r - m
    } else {
        r
    }
}

/// One predicted nonzero of the aliasing matrix (zero-based row and column).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AliasEntry {
    pub row: usize,
    pub col: usize,
    pub value: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AliasPrediction {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<AliasEntry>,
}

impl AliasPrediction {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for e in &self.entries {
            out[(e.row, e.col)] += e.value as f64;
        }
        out
    }

    pub fn nonzeros(&self) -> usize {
        self.entries.len()
    }
}

/// Closed-form entries of `E_A` for the grid `t_i = (i-1)T/M`.
///
/// With one-based row `i` and column `j`, column `j` carries harmonic
/// `N + (j+1)/2` (cos, odd `j`) or `N + j/2` (sin, even `j`); row 1 is the
/// mean, even rows are `cos(i/2)` and odd rows `sin((i-1)/2)`. For
/// `k = 1..=⌊(φ+1)N/M⌋`:
///
/// * mean row, cos column: `1` when `j = 2(kM-N) - 1`;
/// * cos row, cos column: `1` when `i + j = 2(kM-N) - 1` or `j - i = 2(kM-N) - 1`;
/// * sin row, sin column: `-1` when `i + j = 2(kM-N) + 1`, `1` when `j - i = 2(kM-N) - 1`;
/// * every other pairing is zero.
pub fn predict_alias_entries(order: usize, degree: u32, m: usize) -> Result<AliasPrediction> {
    let n = order as i64;
    if m < 2 * order + 1 {
        return Err(HbError::RankDeficient {
            m,
            required: 2 * order + 1,
        });
    }
    if degree < 2 {
        return Err(HbError::InvalidInput(
            "aliasing needs a degree of nonlinearity >= 2".into(),
        ));
    }
    let rows = 2 * order + 1;
    let cols = 2 * order * (degree as usize - 1);
    let k_max = ((degree as usize + 1) * order / m) as i64;
    let mut entries = Vec::new();
    for i in 1..=rows as i64 {
        for j in 1..=cols as i64 {
            let mut value = 0i8;
            for k in 1..=k_max {
                let s = 2 * (k * m as i64 - n);
                value += match (i, i % 2 == 0, j % 2 == 1) {
                    (1, _, true) => (j == s - 1) as i8,
                    (1, _, false) => 0,
                    (_, true, true) => (i + j == s - 1) as i8 + (j - i == s - 1) as i8,
                    (_, false, false) => (j - i == s - 1) as i8 - (i + j == s + 1) as i8,
                    _ => 0,
                };
            }
            if value != 0 {
                entries.push(AliasEntry {
                    row: (i - 1) as usize,
                    col: (j - 1) as usize,
                    value,
                });
            }
        }
    }
    Ok(AliasPrediction {
        rows,
        cols,
        entries,
    })
}

/// Outcome of comparing the time-domain projection with exact harmonics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityGap {
    /// `‖E⁺ f̃ − ĥ‖∞`.
    pub gap: f64,
    /// `‖E⁺ f̃ − ĥ − E_A ĥ′‖∞`; zero up to rounding for every `M ≥ 2N+1`.
    pub decomposition_error: f64,
    /// `‖E_A ĥ′‖∞`.
    pub alias_term: f64,
    /// `‖ĥ‖∞`, for relative tolerances.
    pub exact_norm: f64,
}

/// Samples `poly` along the truncated series at `M` nodes, projects with
/// `E⁺` and compares with the exact harmonics.
pub fn conditional_identity_gap(
    coeffs: &FourierCoeffs,
    poly: &Polynomial,
    basis: &HarmonicBasis,
    m: usize,
) -> Result<IdentityGap> {
    let degree = poly.degree().max(1);
    let grid = build_grid(basis, m)?;
    let ops = build_operators(basis, &grid, degree)?;
    let (h, hp) = exact_poly_harmonics(coeffs, poly, basis, degree)?;

    let xt: Vec<DVector<f64>> = (0..coeffs.dim())
        .map(|k| &ops.e * DVector::from_column_slice(coeffs.component(k)))
        .collect();
    let ft = DVector::from_fn(m, |i, _| {
        let x: Vec<f64> = xt.iter().map(|c| c[i]).collect();
        poly.eval(&x, super::harmonic_angle(1, i, m))
    });
    let projected = &ops.e_plus * ft;
    let alias = if hp.is_empty() {
        DVector::zeros(h.len())
    } else {
        &ops.e_alias * DVector::from_column_slice(&hp)
    };
    let diff: Vec<f64> = projected.iter().zip(&h).map(|(p, e)| p - e).collect();
    let resid: Vec<f64> = diff.iter().zip(alias.iter()).map(|(d, a)| d - a).collect();
    Ok(IdentityGap {
        gap: inf_norm(&diff),
        decomposition_error: inf_norm(&resid),
        alias_term: inf_norm(alias.as_slice()),
        exact_norm: inf_norm(&h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::matrix_inf_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn numeric_alias(order: usize, degree: u32, m: usize) -> DMatrix<f64> {
        let b = HarmonicBasis::new(order, 1.0).unwrap();
        let g = build_grid(&b, m).unwrap();
        build_operators(&b, &g, degree).unwrap().e_alias
    }

    #[test]
    fn fold_examples_and_grid_identity() {
        assert_eq!(fold_wavenumber(2, 5), 2);
        assert_eq!(fold_wavenumber(-2, 5), -2);
        assert_eq!(fold_wavenumber(4, 5), -1);
        assert_eq!(fold_wavenumber(9, 13), -4);
        assert_eq!(fold_wavenumber(3, 6), 3);
        for m in 2..20usize {
            for n in -40i64..40 {
                let na = fold_wavenumber(n, m);
                assert!(2 * na.abs() <= m as i64);
                assert_eq!((n - na).rem_euclid(m as i64), 0);
                for i in 0..m {
                    let th = 2.0 * PI * i as f64 / m as f64;
                    assert!(((n as f64 * th).cos() - (na as f64 * th).cos()).abs() < 1e-11);
                    assert!(((n as f64 * th).sin() - (na as f64 * th).sin()).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn prediction_matches_hdhb_product() {
        let p = predict_alias_entries(2, 3, 5).unwrap();
        assert!(p.nonzeros() > 0);
        let diff = (p.to_dense() - numeric_alias(2, 3, 5)).abs().max();
        assert!(diff < 1e-10);
    }

    #[test]
    fn prediction_small_quadratic_case() {
        let p = predict_alias_entries(1, 2, 3).unwrap();
        let diff = (p.to_dense() - numeric_alias(1, 2, 3)).abs().max();
        assert!(diff < 1e-10);
        // cos2 folds to cos1 and sin2 folds to -sin1 on three nodes
        assert_eq!(
            p.entries,
            vec![
                AliasEntry {
                    row: 1,
                    col: 0,
                    value: 1
                },
                AliasEntry {
                    row: 2,
                    col: 1,
                    value: -1
                }
            ]
        );
    }

    #[test]
    fn prediction_is_empty_past_threshold() {
        for (n, phi) in [(1, 2), (3, 3), (4, 5)] {
            let m = (phi as usize + 1) * n + 1;
            assert_eq!(predict_alias_entries(n, phi, m).unwrap().nonzeros(), 0);
        }
    }

    #[test]
    fn prediction_matches_numeric_sweep() {
        for phi in 2..=5u32 {
            for n in 1..=6usize {
                for m in (2 * n + 1)..=((phi as usize + 1) * n + 4) {
                    let p = predict_alias_entries(n, phi, m).unwrap();
                    let num = numeric_alias(n, phi, m);
                    assert!(
                        (p.to_dense() - &num).abs().max() < 1e-10,
                        "phi {phi} N {n} M {m}"
                    );
                    let zero = m > (phi as usize + 1) * n;
                    assert_eq!(matrix_inf_norm(&num) < 1e-12, zero);
                }
            }
        }
    }

    #[test]
    fn identity_holds_past_threshold_and_decomposes_below() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = HarmonicBasis::new(3, 1.0).unwrap();
        let data: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = FourierCoeffs::from_vec(1, 3, data).unwrap();
        let cubic = Polynomial::zero(1)
            .with(1.0, &[(0, 3)])
            .with(-0.5, &[(0, 1)]);
        let g = conditional_identity_gap(&c, &cubic, &b, 13).unwrap();
        assert!(g.gap < 1e-10);
        let g = conditional_identity_gap(&c, &cubic, &b, 7).unwrap();
        assert!(g.gap > 1e-3);
        assert!((g.gap - g.alias_term).abs() < 1e-10);
        assert!(g.decomposition_error < 1e-10);
        let linear = Polynomial::zero(1).with(2.0, &[(0, 1)]).with(0.3, &[]);
        for m in 7..20 {
            assert!(conditional_identity_gap(&c, &linear, &b, m).unwrap().gap < 1e-13);
        }
    }
}
