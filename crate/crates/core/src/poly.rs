//! Sparse multivariate polynomials in the state variables, optionally
//! multiplied by a single `cos(ωt)` or `sin(ωt)` forcing factor.
//!
//! The forcing factor counts as degree one when computing the degree of
//! nonlinearity: it contributes exactly one harmonic to the product.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Forcing {
    None,
    Cos,
    Sin,
}

impl Forcing {
    fn degree(self) -> u32 {
        match self {
            Forcing::None => 0,
            _ => 1,
        }
    }

    fn eval(self, phase: f64) -> f64 {
        match self {
            Forcing::None => 1.0,
            Forcing::Cos => phase.cos(),
            Forcing::Sin => phase.sin(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    /// Exponent of every state variable; length equals the state dimension.
    pub powers: Vec<u32>,
    pub forcing: Forcing,
}

impl Monomial {
    pub fn state_degree(&self) -> u32 {
        self.powers.iter().sum()
    }

    pub fn degree(&self) -> u32 {
        self.state_degree() + self.forcing.degree()
    }

    pub fn eval(&self, x: &[f64], phase: f64) -> f64 {
        let mut v = self.coeff * self.forcing.eval(phase);
        for (xi, &p) in x.iter().zip(&self.powers) {
            if p > 0 {
                v *= xi.powi(p as i32);
            }
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    /// Appends `coeff · Π x_k^p` for the sparse `(k, p)` list.
    pub fn with(self, coeff: f64, factors: &[(usize, u32)]) -> Self {
        self.with_forcing(coeff, factors, Forcing::None)
    }

    pub fn with_forcing(mut self, coeff: f64, factors: &[(usize, u32)], forcing: Forcing) -> Self {
        let mut powers = vec![0u32; self.dim];
        for &(k, p) in factors {
            assert!(
                k < self.dim,
                "variable index {k} out of range for dimension {}",
                self.dim
            );
            powers[k] += p;
        }
        if coeff != 0.0 {
            self.terms.push(Monomial {
                coeff,
                powers,
                forcing,
            });
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    /// Total degree, counting a forcing factor as degree one.
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Degree in the state variables alone.
    pub fn state_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(Monomial::state_degree)
            .max()
            .unwrap_or(0)
    }

    /// Evaluates at state `x` with forcing phase `ωt`.
    pub fn eval(&self, x: &[f64], phase: f64) -> f64 {
        self.terms.iter().map(|m| m.eval(x, phase)).sum()
    }

    /// Largest exponent of variable `k` over all terms.
    pub fn max_power(&self, k: usize) -> u32 {
        self.terms.iter().map(|m| m.powers[k]).max().unwrap_or(0)
    }
}
