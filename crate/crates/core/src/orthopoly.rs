//! Orthonormal polynomial families of the Normal, Beta and Gamma laws.
//!
//! Every family is handled through its three-term recurrence in orthonormal
//! scaling,
//!
//! ```text
//! z h_k(z) = b_{k+1} h_{k+1}(z) + a_k h_k(z) + b_k h_{k-1}(z),   h_0 = 1,
//! ```
//!
//! with respect to the *probability* measure of the law, so that
//! `E[h_j h_k] = δ_jk`. Gauss rules come from the eigenvalues of the
//! truncated Jacobi matrix; weights use the Christoffel function so that tiny
//! tail weights keep full relative accuracy.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::PolyCoeffs;

/// A univariate orthogonal polynomial family together with its law.
///
/// * `Hermite`: standard normal law.
/// * `Jacobi { alpha, beta }`: density ∝ `(1-z)^alpha (1+z)^beta` on `(-1, 1)`.
/// * `Laguerre { alpha }`: Gamma law with shape `alpha + 1` and rate 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawFamily")]
pub enum PolyFamily {
    Hermite,
    Jacobi { alpha: f64, beta: f64 },
    Laguerre { alpha: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawFamily {
    Hermite,
    Jacobi { alpha: f64, beta: f64 },
    Laguerre { alpha: f64 },
}

impl TryFrom<RawFamily> for PolyFamily {
    type Error = Error;

    fn try_from(raw: RawFamily) -> Result<Self> {
        let family = match raw {
            RawFamily::Hermite => PolyFamily::Hermite,
            RawFamily::Jacobi { alpha, beta } => PolyFamily::Jacobi { alpha, beta },
            RawFamily::Laguerre { alpha } => PolyFamily::Laguerre { alpha },
        };
        family.validate()?;
        Ok(family)
    }
}

/// Nodes and nonnegative weights of a rule for a probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }
}

fn check_param(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > -1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and > -1, got {value}"
        )))
    }
}

impl PolyFamily {
    pub fn hermite() -> Self {
        PolyFamily::Hermite
    }

    pub fn jacobi(alpha: f64, beta: f64) -> Result<Self> {
        let family = PolyFamily::Jacobi { alpha, beta };
        family.validate()?;
        Ok(family)
    }

    /// Uniform law on `(-1, 1)`.
    pub fn legendre() -> Self {
        PolyFamily::Jacobi {
            alpha: 0.0,
            beta: 0.0,
        }
    }

    pub fn laguerre(alpha: f64) -> Result<Self> {
        let family = PolyFamily::Laguerre { alpha };
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PolyFamily::Hermite => Ok(()),
            PolyFamily::Jacobi { alpha, beta } => {
                check_param("jacobi alpha", alpha)?;
                check_param("jacobi beta", beta)
            }
            PolyFamily::Laguerre { alpha } => check_param("laguerre alpha", alpha),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            PolyFamily::Hermite => "hermite".to_string(),
            PolyFamily::Jacobi { alpha, beta } => format!("jacobi({alpha},{beta})"),
            PolyFamily::Laguerre { alpha } => format!("laguerre({alpha})"),
        }
    }

    /// Closed support of the law.
    pub fn support(&self) -> (f64, f64) {
        match self {
            PolyFamily::Hermite => (f64::NEG_INFINITY, f64::INFINITY),
            PolyFamily::Jacobi { .. } => (-1.0, 1.0),
            PolyFamily::Laguerre { .. } => (0.0, f64::INFINITY),
        }
    }

    /// Mean of the law (the single node of the one-point Gauss rule).
    pub fn mean(&self) -> f64 {
        self.monic_recurrence(0).0
    }

    /// Weight `ρ(z)` of the weighted Sobolev norm: `z` for Gamma laws, 1 otherwise.
    pub fn sobolev_weight(&self, z: f64) -> f64 {
        match self {
            PolyFamily::Laguerre { .. } => z,
            _ => 1.0,
        }
    }

    /// Monic recurrence pair `(a_k, β_k)` with `p_{k+1} = (z - a_k) p_k - β_k p_{k-1}`.
    fn monic_recurrence(&self, k: usize) -> (f64, f64) {
        let kf = k as f64;
        match *self {
            PolyFamily::Hermite => (0.0, kf),
            PolyFamily::Laguerre { alpha } => (2.0 * kf + alpha + 1.0, kf * (kf + alpha)),
            PolyFamily::Jacobi { alpha, beta } => {
                let s = alpha + beta;
                let a = if k == 0 {
                    (beta - alpha) / (s + 2.0)
                } else {
                    (beta * beta - alpha * alpha) / ((2.0 * kf + s) * (2.0 * kf + s + 2.0))
                };
                let b = match k {
                    0 => 0.0,
                    1 => 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + s).powi(2) * (3.0 + s)),
                    _ => {
                        let t = 2.0 * kf + s;
                        4.0 * kf * (kf + alpha) * (kf + beta) * (kf + s)
                            / (t * t * (t + 1.0) * (t - 1.0))
                    }
                };
                (a, b)
            }
        }
    }

    /// Orthonormal recurrence coefficients `(a_k, b_k)` for `k = 0..=k_max`,
    /// with `b_0 = 0`.
    pub fn recurrence_coeffs(&self, k_max: usize) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        Ok((0..=k_max)
            .map(|k| {
                let (a, b) = self.monic_recurrence(k);
                (a, b.sqrt())
            })
            .collect())
    }

    /// `(h_0(z), …, h_n(z))`.
    pub fn eval_orthonormal(&self, n: usize, z: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(1.0);
        if n == 0 {
            return out;
        }
        let mut prev = 0.0;
        let mut cur = 1.0;
        for k in 0..n {
            let (a, _) = self.monic_recurrence(k);
            let b_k = self.monic_recurrence(k).1.sqrt();
            let b_next = self.monic_recurrence(k + 1).1.sqrt();
            let next = ((z - a) * cur - b_k * prev) / b_next;
            prev = cur;
            cur = next;
            out.push(cur);
        }
        out
    }

    /// The orthonormal polynomials `h_0, …, h_n` in monomial form.
    pub fn orthonormal_polys(&self, n: usize) -> Vec<PolyCoeffs> {
        let mut polys = vec![PolyCoeffs::constant(1.0)];
        let mut prev = PolyCoeffs::zero();
        for k in 0..n {
            let (a, _) = self.monic_recurrence(k);
            let b_k = self.monic_recurrence(k).1.sqrt();
            let b_next = self.monic_recurrence(k + 1).1.sqrt();
            let cur = polys[k].clone();
            let next = (&(&cur.shift() - &cur.scale(a)) - &prev.scale(b_k)).scale(1.0 / b_next);
            prev = cur;
            polys.push(next);
        }
        polys
    }

    /// `q`-point Gauss rule of the law, exact for polynomials of degree `2q - 1`.
    pub fn gauss_rule(&self, q: usize) -> Result<QuadratureRule> {
        self.validate()?;
        if q == 0 {
            return Err(Error::InvalidParameter(
                "a Gauss rule needs at least one node".into(),
            ));
        }
        let mut jacobi = DMatrix::<f64>::zeros(q, q);
        for k in 0..q {
            let (a, _) = self.monic_recurrence(k);
            jacobi[(k, k)] = a;
            if k + 1 < q {
                let b = self.monic_recurrence(k + 1).1.sqrt();
                jacobi[(k, k + 1)] = b;
                jacobi[(k + 1, k)] = b;
            }
        }
        let eig = SymmetricEigen::try_new(jacobi, f64::EPSILON, 0).ok_or_else(|| {
            Error::Numerical(format!("Jacobi matrix eigen-solve failed for q = {q}"))
        })?;
        let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        if nodes.iter().any(|z| !z.is_finite()) {
            return Err(Error::Numerical("non-finite Gauss node".into()));
        }
        nodes.sort_by(|a, b| a.total_cmp(b));

        let (lo, hi) = self.support();
        for z in nodes.iter_mut() {
            // Two Newton corrections on h_q polish the eigenvalues.
            for _ in 0..2 {
                let (_, ratio) = self.christoffel_and_newton(q, *z);
                let candidate = *z - ratio;
                if candidate.is_finite() && candidate > lo && candidate < hi {
                    *z = candidate;
                }
            }
        }
        let mut weights: Vec<f64> = nodes
            .iter()
            .map(|&z| self.christoffel_and_newton(q, z).0)
            .collect();
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Numerical(format!(
                "Gauss weights do not sum to a positive number ({total})"
            )));
        }
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(QuadratureRule { nodes, weights })
    }

    /// Returns `(1 / Σ_{k<q} h_k(z)², h_q(z) / h_q'(z))`, rescaling on the fly
    /// so large nodes of unbounded laws do not overflow.
    fn christoffel_and_newton(&self, q: usize, z: f64) -> (f64, f64) {
        const BIG: f64 = 1e150;
        let mut h_prev = 0.0;
        let mut h = 1.0;
        let mut d_prev = 0.0;
        let mut d = 0.0;
        let mut sum = 1.0;
        // log of the factor the stored values have been divided by
        let mut log_scale = 0.0f64;
        for k in 0..q {
            let (a, _) = self.monic_recurrence(k);
            let b_k = self.monic_recurrence(k).1.sqrt();
            let b_next = self.monic_recurrence(k + 1).1.sqrt();
            let h_next = ((z - a) * h - b_k * h_prev) / b_next;
            let d_next = ((z - a) * d + h - b_k * d_prev) / b_next;
            h_prev = h;
            h = h_next;
            d_prev = d;
            d = d_next;
            if k + 1 < q {
                sum += h * h;
            }
            if h.abs() > BIG || d.abs() > BIG {
                h /= BIG;
                h_prev /= BIG;
                d /= BIG;
                d_prev /= BIG;
                sum /= BIG * BIG;
                log_scale += BIG.ln();
            }
        }
        let weight = (-(sum.ln() + 2.0 * log_scale)).exp();
        (weight, h / d)
    }

    /// Sturm–Liouville operator whose eigenfunctions are the family's
    /// polynomials, applied exactly on monomial coefficients.
    ///
    /// * Hermite: `-p'' + z p'`
    /// * Jacobi: `-(1 - z²) p'' + (α - β + (α + β + 2) z) p'`
    /// * Laguerre: `-z p'' + (z - α - 1) p'`
    pub fn apply_q(&self, p: &PolyCoeffs) -> PolyCoeffs {
        let d1 = p.derivative();
        let d2 = d1.derivative();
        match *self {
            PolyFamily::Hermite => &d1.shift() - &d2,
            PolyFamily::Jacobi { alpha, beta } => {
                let second = &d2 - &d2.shift().shift();
                let first = &d1.scale(alpha - beta) + &d1.shift().scale(alpha + beta + 2.0);
                &first - &second
            }
            PolyFamily::Laguerre { alpha } => {
                let first = &d1.shift() - &d1.scale(alpha + 1.0);
                &first - &d2.shift()
            }
        }
    }

    /// Eigenvalue `λ_k` of [`apply_q`](Self::apply_q) on the degree-`k` polynomial.
    pub fn sl_eigenvalue(&self, k: usize) -> f64 {
        let kf = k as f64;
        match *self {
            PolyFamily::Hermite | PolyFamily::Laguerre { .. } => kf,
            PolyFamily::Jacobi { alpha, beta } => kf * (kf + alpha + beta + 1.0),
        }
    }

    /// Constant `C(ℓ)` in `‖Qf‖_{H^ℓ_ρ} ≤ C(ℓ) ‖f‖_{H^{ℓ+2}_ρ}`.
    pub fn q_bound_constant(&self, ell: usize) -> f64 {
        let l = ell as f64;
        match *self {
            PolyFamily::Hermite => (21.0 + 3.0 * l * l).sqrt(),
            PolyFamily::Laguerre { alpha } => (24.0 * alpha + 87.0 + 24.0 * l + 3.0 * l * l).sqrt(),
            PolyFamily::Jacobi { alpha, beta } => {
                let c = alpha + beta + 1.0;
                let m = alpha.max(beta);
                (3.0 * (1.0 + 4.0 * (l + 1.0 + m).powi(2) + l * l * (l + c).powi(2))).sqrt()
            }
        }
    }
}
