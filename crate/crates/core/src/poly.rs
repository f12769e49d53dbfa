//! Dense univariate polynomials in the monomial basis.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Highest degree a [`PolyCoeffs`] may carry.
pub const MAX_DEGREE: usize = 64;

/// Polynomial `Σ c_k z^k` stored by power. Trailing zeros are trimmed so the
/// last coefficient is nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolyCoeffs {
    coeffs: Vec<f64>,
}

impl PolyCoeffs {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        assert!(
            coeffs.len() <= MAX_DEGREE + 1,
            "polynomial degree {} exceeds cap {MAX_DEGREE}",
            coeffs.len().saturating_sub(1)
        );
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Multiplication by `z`.
    pub fn shift(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(0.0);
        c.extend_from_slice(&self.coeffs);
        Self::new(c)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for &PolyCoeffs {
    type Output = PolyCoeffs;

    fn add(self, rhs: &PolyCoeffs) -> PolyCoeffs {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        PolyCoeffs::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &PolyCoeffs {
    type Output = PolyCoeffs;

    fn sub(self, rhs: &PolyCoeffs) -> PolyCoeffs {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        PolyCoeffs::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &PolyCoeffs {
    type Output = PolyCoeffs;

    fn mul(self, rhs: &PolyCoeffs) -> PolyCoeffs {
        if self.is_zero() || rhs.is_zero() {
            return PolyCoeffs::zero();
        }
        let mut c = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        PolyCoeffs::new(c)
    }
}

impl Neg for &PolyCoeffs {
    type Output = PolyCoeffs;

    fn neg(self) -> PolyCoeffs {
        self.scale(-1.0)
    }
}
