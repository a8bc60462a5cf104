//! Exact harmonics of polynomial nonlinearities by trigonometric convolution.
//!
//! A real periodic signal with harmonics up to `K` is held as complex
//! coefficients `c_n`, `n = -K..=K`, with `c_{-n} = conj(c_n)`. Products are
//! full linear convolutions, so no harmonic is ever folded back.

use super::{FourierCoeffs, HarmonicBasis};
use crate::error::{HbError, Result};
use crate::poly::{Forcing, Polynomial};
use num_complex::Complex64;

/// Two-sided spectrum indexed by signed harmonic.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    max_harmonic: usize,
    c: Vec<Complex64>,
}

impl Spectrum {
    pub fn constant(v: f64) -> Self {
        Self {
            max_harmonic: 0,
            c: vec![Complex64::new(v, 0.0)],
        }
    }

    pub fn zeros(max_harmonic: usize) -> Self {
        Self {
            max_harmonic,
            c: vec![Complex64::new(0.0, 0.0); 2 * max_harmonic + 1],
        }
    }

    /// From real coefficients `[x0, cos1, sin1, ...]`.
    pub fn from_real(coeffs: &[f64]) -> Self {
        let k = (coeffs.len() - 1) / 2;
        let mut s = Self::zeros(k);
        s.c[k] = Complex64::new(coeffs[0], 0.0);
        for n in 1..=k {
            let cn = Complex64::new(0.5 * coeffs[2 * n - 1], -0.5 * coeffs[2 * n]);
            s.c[k + n] = cn;
            s.c[k - n] = cn.conj();
        }
        s
    }

    pub fn forcing(kind: Forcing) -> Self {
        match kind {
            Forcing::None => Self::constant(1.0),
            Forcing::Cos => Self::from_real(&[0.0, 1.0, 0.0]),
            Forcing::Sin => Self::from_real(&[0.0, 0.0, 1.0]),
        }
    }

    pub fn max_harmonic(&self) -> usize {
        self.max_harmonic
    }

    /// Coefficient of `e^{i n θ}`.
    pub fn get(&self, n: i64) -> Complex64 {
        let k = self.max_harmonic as i64;
        if n.abs() > k {
            Complex64::new(0.0, 0.0)
        } else {
            self.c[(n + k) as usize]
        }
    }

    /// Real coefficients up to harmonic `order` (zero beyond `max_harmonic`).
    pub fn to_real(&self, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; 2 * order + 1];
        out[0] = self.get(0).re;
        for n in 1..=order {
            let cn = self.get(n as i64);
            out[2 * n - 1] = 2.0 * cn.re;
            out[2 * n] = -2.0 * cn.im;
        }
        out
    }

    pub fn mul(&self, other: &Spectrum) -> Spectrum {
        let (ka, kb) = (self.max_harmonic, other.max_harmonic);
        let mut out = Spectrum::zeros(ka + kb);
        for (i, a) in self.c.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                out.c[i + j] += a * b;
            }
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Spectrum, scale: f64) {
        if other.max_harmonic > self.max_harmonic {
            let mut grown = Spectrum::zeros(other.max_harmonic);
            let shift = other.max_harmonic - self.max_harmonic;
            grown.c[shift..shift + self.c.len()].copy_from_slice(&self.c);
            *self = grown;
        }
        let shift = self.max_harmonic - other.max_harmonic;
        for (j, b) in other.c.iter().enumerate() {
            self.c[shift + j] += b * scale;
        }
    }
}

/// Powers `x_k^p` of every state component, computed once per call.
struct PowerCache {
    base: Vec<Spectrum>,
    powers: Vec<Vec<Spectrum>>,
}

impl PowerCache {
    fn new(coeffs: &FourierCoeffs) -> Self {
        let base: Vec<Spectrum> = (0..coeffs.dim())
            .map(|k| Spectrum::from_real(coeffs.component(k)))
            .collect();
        let powers = vec![vec![Spectrum::constant(1.0)]; coeffs.dim()];
        Self { base, powers }
    }

    fn power(&mut self, k: usize, p: u32) -> &Spectrum {
        while self.powers[k].len() <= p as usize {
            let last = self.powers[k].last().unwrap().mul(&self.base[k]);
            self.powers[k].push(last);
        }
        &self.powers[k][p as usize]
    }

    fn eval(&mut self, poly: &Polynomial) -> Spectrum {
        let mut total = Spectrum::constant(0.0);
        for term in poly.terms() {
            let mut prod = Spectrum::forcing(term.forcing);
            for (k, &p) in term.powers.iter().enumerate() {
                if p > 0 {
                    prod = prod.mul(self.power(k, p));
                }
            }
            total.add_scaled(&prod, term.coeff);
        }
        total
    }
}

fn split_harmonics(spec: &Spectrum, order: usize, degree: u32) -> (Vec<f64>, Vec<f64>) {
    let full = spec.to_real(order * degree as usize);
    let low = full[..2 * order + 1].to_vec();
    let high = full[2 * order + 1..].to_vec();
    (low, high)
}

/// Exact Fourier coefficients of `poly(x(t))` for the truncated series `x`.
///
/// Returns `(ĥ, ĥ′)`: harmonics `0..=N` in the usual real ordering, and the
/// `2N(φ-1)` coefficients of harmonics `N+1..=φN`.
pub fn exact_poly_harmonics(
    coeffs: &FourierCoeffs,
    poly: &Polynomial,
    basis: &HarmonicBasis,
    degree: u32,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_inputs(coeffs, basis, std::slice::from_ref(poly), degree)?;
    let mut cache = PowerCache::new(coeffs);
    let spec = cache.eval(poly);
    Ok(split_harmonics(&spec, basis.order(), degree))
}

/// [`exact_poly_harmonics`] for every component of a polynomial vector field,
/// sharing the power cache.
pub fn exact_field_harmonics(
    coeffs: &FourierCoeffs,
    field: &[Polynomial],
    basis: &HarmonicBasis,
    degree: u32,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    check_inputs(coeffs, basis, field, degree)?;
    let mut cache = PowerCache::new(coeffs);
    Ok(field
        .iter()
        .map(|p| split_harmonics(&cache.eval(p), basis.order(), degree))
        .collect())
}

fn check_inputs(
    coeffs: &FourierCoeffs,
    basis: &HarmonicBasis,
    polys: &[Polynomial],
    degree: u32,
) -> Result<()> {
    if coeffs.order() != basis.order() {
        return Err(HbError::InvalidInput(format!(
            "coefficients have order {}, basis has order {}",
            coeffs.order(),
            basis.order()
        )));
    }
    if degree == 0 {
        return Err(HbError::InvalidInput(
            "degree of nonlinearity must be >= 1".into(),
        ));
    }
    for p in polys {
        if p.dim() != coeffs.dim() {
            return Err(HbError::InvalidInput(format!(
                "polynomial in {} variables applied to a {}-dimensional state",
                p.dim(),
                coeffs.dim()
            )));
        }
        if p.degree() > degree {
            return Err(HbError::DegreeExceeded {
                found: p.degree(),
                declared: degree,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Trapezoid-rule Fourier coefficients of `g` over one period.
    fn quadrature(g: impl Fn(f64) -> f64, highest: usize, points: usize) -> Vec<f64> {
        let mut out = vec![0.0; 2 * highest + 1];
        for s in 0..points {
            let th = 2.0 * PI * s as f64 / points as f64;
            let v = g(th);
            out[0] += v / points as f64;
            for n in 1..=highest {
                out[2 * n - 1] += 2.0 * v * (n as f64 * th).cos() / points as f64;
                out[2 * n] += 2.0 * v * (n as f64 * th).sin() / points as f64;
            }
        }
        out
    }

    #[test]
    fn identity_polynomial_returns_input() {
        let b = HarmonicBasis::new(2, 1.0).unwrap();
        let c = FourierCoeffs::from_vec(1, 2, vec![0.3, -1.0, 0.5, 0.2, 0.1]).unwrap();
        let p = Polynomial::zero(1).with(1.0, &[(0, 1)]);
        let (h, hp) = exact_poly_harmonics(&c, &p, &b, 1).unwrap();
        assert_eq!(h, c.component(0));
        assert!(hp.is_empty());
    }

    #[test]
    fn square_of_cosine() {
        let b = HarmonicBasis::new(1, 1.0).unwrap();
        let c = FourierCoeffs::from_vec(1, 1, vec![0.0, 1.0, 0.0]).unwrap();
        let p = Polynomial::zero(1).with(1.0, &[(0, 2)]);
        let (h, hp) = exact_poly_harmonics(&c, &p, &b, 2).unwrap();
        assert!((h[0] - 0.5).abs() < 1e-15 && h[1].abs() < 1e-15 && h[2].abs() < 1e-15);
        assert!((hp[0] - 0.5).abs() < 1e-15 && hp[1].abs() < 1e-15);
    }

    #[test]
    fn cubic_matches_quadrature() {
        let b = HarmonicBasis::new(3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let data: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = FourierCoeffs::from_vec(1, 3, data).unwrap();
        let p = Polynomial::zero(1).with(1.0, &[(0, 3)]);
        let (h, hp) = exact_poly_harmonics(&c, &p, &b, 3).unwrap();
        let x = |th: f64| crate::spectral::eval_series(&c, &b, th)[0];
        let q = quadrature(|th| x(th).powi(3), 9, 10_000);
        let all: Vec<f64> = h.iter().chain(hp.iter()).copied().collect();
        for (a, w) in all.iter().zip(&q) {
            assert!((a - w).abs() < 1e-9, "{a} vs {w}");
        }
    }

    #[test]
    fn forcing_and_cross_terms_match_quadrature() {
        let b = HarmonicBasis::new(2, 1.0).unwrap();
        let c = FourierCoeffs::from_vec(
            2,
            2,
            vec![0.1, 0.4, -0.3, 0.2, 0.05, -0.2, 0.1, 0.7, -0.1, 0.3],
        )
        .unwrap();
        let p = Polynomial::zero(2)
            .with(2.0, &[(0, 1), (1, 2)])
            .with_forcing(-1.5, &[(1, 1)], Forcing::Cos)
            .with_forcing(0.7, &[], Forcing::Sin);
        let (h, hp) = exact_poly_harmonics(&c, &p, &b, 3).unwrap();
        let q = quadrature(
            |th| {
                let x = crate::spectral::eval_series(&c, &b, th);
                p.eval(&x, th)
            },
            6,
            4096,
        );
        let all: Vec<f64> = h.iter().chain(hp.iter()).copied().collect();
        for (a, w) in all.iter().zip(&q) {
            assert!((a - w).abs() < 1e-12, "{a} vs {w}");
        }
    }

    #[test]
    fn degree_above_declared_is_rejected() {
        let b = HarmonicBasis::new(1, 1.0).unwrap();
        let c = FourierCoeffs::zeros(1, 1);
        let p = Polynomial::zero(1).with(1.0, &[(0, 4)]);
        assert!(matches!(
            exact_poly_harmonics(&c, &p, &b, 3),
            Err(HbError::DegreeExceeded {
                found: 4,
                declared: 3
            })
        ));
    }
}
