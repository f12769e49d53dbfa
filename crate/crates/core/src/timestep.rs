//! A-stable rational time stepping for `M u' + K u = 0`.

use std::collections::HashMap;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::fit_rate;
use crate::linalg::{norm2, Factorization, SymSparseMatrix};

/// Relative residual accepted from a linear solve inside a step.
pub const STEP_RESIDUAL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RationalScheme {
    ImplicitEuler,
    CrankNicolson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AStabilityReport {
    pub samples: usize,
    /// `max |r(w)|` over samples with `Re w = 0`
    pub max_on_axis: f64,
    /// `max |r(w)|` over samples with `Re w < 0`
    pub max_interior: f64,
}

impl AStabilityReport {
    pub fn ok(&self) -> bool {
        self.max_on_axis <= 1.0 + 1e-12 && self.max_interior < 1.0
    }
}

impl RationalScheme {
    /// Classical order of convergence.
    pub fn order(self) -> usize {
        match self {
            RationalScheme::ImplicitEuler => 1,
            RationalScheme::CrankNicolson => 2,
        }
    }

    /// Numerator and denominator coefficients of `r(w) = p(w)/q(w)` in
    /// ascending powers; the step is `u⁺ = r(-τ M⁻¹K) u`.
    pub fn symbol(self) -> (Vec<f64>, Vec<f64>) {
        match self {
            RationalScheme::ImplicitEuler => (vec![1.0], vec![1.0, -1.0]),
            RationalScheme::CrankNicolson => (vec![1.0, 0.5], vec![1.0, -0.5]),
        }
    }

    pub fn eval_symbol(self, w: Complex<f64>) -> Complex<f64> {
        let (p, q) = self.symbol();
        let horner = |c: &[f64]| c.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &a| acc * w + a);
        horner(&p) / horner(&q)
    }

    /// Samples `|r|` on 100 points of the imaginary axis and 100 points of the
    /// open left half-plane.
    pub fn a_stability_probe(self) -> AStabilityReport {
        let mut max_on_axis = 0.0f64;
        let mut max_interior = 0.0f64;
        for k in 0..100 {
            let mag = 10f64.powf(-3.0 + 6.0 * k as f64 / 99.0);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            max_on_axis = max_on_axis.max(self.eval_symbol(Complex::new(0.0, sign * mag)).norm());
            let angle = std::f64::consts::PI * (0.5 + (k % 10) as f64 / 10.0 + 0.05);
            let w = Complex::from_polar(mag, angle);
            max_interior = max_interior.max(self.eval_symbol(w).norm());
        }
        AStabilityReport {
            samples: 200,
            max_on_axis,
            max_interior,
        }
    }
}

/// Step sizes `τ^i > 0` summing to `T̄`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_bar: f64,
    steps: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t_bar: f64, steps: Vec<f64>) -> Result<Self> {
        if !(t_bar > 0.0) || steps.is_empty() || steps.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::InvalidParameter("time grid needs T > 0 and positive steps".into()));
        }
        let total: f64 = steps.iter().sum();
        if (total - t_bar).abs() > 1e-12 * t_bar.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "steps sum to {total}, expected {t_bar}"
            )));
        }
        Ok(Self { t_bar, steps })
    }

    pub fn uniform(t_bar: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("time grid needs at least one step".into()));
        }
        if !(t_bar > 0.0) {
            return Err(Error::InvalidParameter(format!("final time must be positive, got {t_bar}")));
        }
        Ok(Self {
            t_bar,
            steps: vec![t_bar / n as f64; n],
        })
    }

    pub fn t_bar(&self) -> f64 {
        self.t_bar
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn tau_max(&self) -> f64 {
        self.steps.iter().copied().fold(0.0, f64::max)
    }

    /// Grid points `0 = t_0 < … < t_N = T̄`. Uniform grids use `i·T̄/N`.
    pub fn points(&self) -> Vec<f64> {
        let n = self.steps.len();
        let uniform = self.steps.iter().all(|&t| t == self.steps[0]);
        if uniform {
            return (0..=n).map(|i| i as f64 * self.t_bar / n as f64).collect();
        }
        let mut out = Vec::with_capacity(n + 1);
        let mut t = 0.0;
        out.push(t);
        for s in &self.steps {
            t += s;
            out.push(t);
        }
        out
    }
}

/// Factorized one-step map for a fixed `τ`.
#[derive(Debug, Clone)]
pub struct Stepper {
    scheme: RationalScheme,
    tau: f64,
    lhs: SymSparseMatrix,
    factor: Factorization,
    rhs: SymSparseMatrix,
}

impl Stepper {
    pub fn new(scheme: RationalScheme, tau: f64, mass: &SymSparseMatrix, stiff: &SymSparseMatrix) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {tau}")));
        }
        if mass.dim() != stiff.dim() {
            return Err(Error::DimensionMismatch {
                expected: mass.dim(),
                got: stiff.dim(),
            });
        }
        let (lhs, rhs) = match scheme {
            RationalScheme::ImplicitEuler => (mass.lin_comb(1.0, stiff, tau), mass.clone()),
            RationalScheme::CrankNicolson => (
                mass.lin_comb(1.0, stiff, 0.5 * tau),
                mass.lin_comb(1.0, stiff, -0.5 * tau),
            ),
        };
        let factor = Factorization::new(&lhs)?;
        Ok(Self {
            scheme,
            tau,
            lhs,
            factor,
            rhs,
        })
    }

    pub fn scheme(&self) -> RationalScheme {
        self.scheme
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        let b = self.rhs.matvec(u);
        let mut x = self.factor.solve(&b)?;
        let mut res = self.residual(&b, &x);
        if res > STEP_RESIDUAL_TOL {
            let r: Vec<f64> = b.iter().zip(self.lhs.matvec(&x)).map(|(p, q)| p - q).collect();
            let dx = self.factor.solve(&r)?;
            x.iter_mut().zip(dx).for_each(|(a, d)| *a += d);
            res = self.residual(&b, &x);
            if res > STEP_RESIDUAL_TOL {
                return Err(Error::SolverNotConverged {
                    residual: res,
                    iterations: 2,
                });
            }
        }
        Ok(x)
    }

    /// `‖b - A x‖ / max(‖b‖, ‖|A| |x|‖)`, zero for a zero right-hand side
    /// solved exactly.
    fn residual(&self, b: &[f64], x: &[f64]) -> f64 {
        let ax = self.lhs.matvec(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let scale = norm2(b).max(norm2(&self.lhs.abs_matvec(x)));
        if scale == 0.0 {
            0.0
        } else {
            norm2(&r) / scale
        }
    }
}

/// One step of `scheme` with step `tau`.
pub fn step(
    scheme: RationalScheme,
    tau: f64,
    mass: &SymSparseMatrix,
    stiff: &SymSparseMatrix,
    u: &[f64],
) -> Result<Vec<f64>> {
    Stepper::new(scheme, tau, mass, stiff)?.apply(u)
}

fn stepper_cache<'a>(
    cache: &'a mut HashMap<u64, Stepper>,
    scheme: RationalScheme,
    tau: f64,
    mass: &SymSparseMatrix,
    stiff: &SymSparseMatrix,
) -> Result<&'a Stepper> {
    let key = tau.to_bits();
    if !cache.contains_key(&key) {
        cache.insert(key, Stepper::new(scheme, tau, mass, stiff)?);
    }
    Ok(&cache[&key])
}

/// Trajectory at every grid point, starting with `u0`.
pub fn evolve(
    scheme: RationalScheme,
    grid: &TimeGrid,
    mass: &SymSparseMatrix,
    stiff: &SymSparseMatrix,
    u0: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let mut cache = HashMap::new();
    let mut out = Vec::with_capacity(grid.len() + 1);
    out.push(u0.to_vec());
    for &tau in grid.steps() {
        let s = stepper_cache(&mut cache, scheme, tau, mass, stiff)?;
        let next = s.apply(out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

/// Final state only.
pub fn evolve_final(
    scheme: RationalScheme,
    grid: &TimeGrid,
    mass: &SymSparseMatrix,
    stiff: &SymSparseMatrix,
    u0: &[f64],
) -> Result<Vec<f64>> {
    let mut cache = HashMap::new();
    let mut u = u0.to_vec();
    for &tau in grid.steps() {
        u = stepper_cache(&mut cache, scheme, tau, mass, stiff)?.apply(&u)?;
    }
    Ok(u)
}

/// Exact propagator `exp(-t M⁻¹K)` of a small system via the symmetric
/// generalized eigendecomposition.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    /// `L⁻ᵀ V`
    left: DMatrix<f64>,
    /// `Vᵀ Lᵀ`
    right: DMatrix<f64>,
    eigenvalues: DVector<f64>,
}

impl ExactPropagator {
    pub fn new(mass: &SymSparseMatrix, stiff: &SymSparseMatrix) -> Result<Self> {
        let m = mass.to_dense();
        let k = stiff.to_dense();
        let l = m
            .cholesky()
            .ok_or_else(|| Error::Numerical("mass matrix is not positive definite".into()))?
            .l();
        let l_inv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
        let c = &l_inv * k * l_inv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let eig = c.symmetric_eigen();
        Ok(Self {
            left: l_inv.transpose() * &eig.eigenvectors,
            right: eig.eigenvectors.transpose() * l.transpose(),
            eigenvalues: eig.eigenvalues,
        })
    }

    pub fn apply(&self, t: f64, u: &[f64]) -> Vec<f64> {
        let mut y = &self.right * DVector::from_column_slice(u);
        for (v, lam) in y.iter_mut().zip(self.eigenvalues.iter()) {
            *v *= (-t * lam).exp();
        }
        (&self.left * y).iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub taus: Vec<f64>,
    /// one-step errors in the mass norm
    pub errors: Vec<f64>,
    /// log-log slope of the errors, `None` when fewer than three errors lie
    /// above the round-off floor
    pub slope: Option<f64>,
    /// all errors at round-off level
    pub exact: bool,
}

/// One-step error `‖F(τ)u0 - exp(-τ M⁻¹K)u0‖_M` for each `τ` and its
/// observed order.
pub fn consistency_probe(
    scheme: RationalScheme,
    mass: &SymSparseMatrix,
    stiff: &SymSparseMatrix,
    u0: &[f64],
    taus: &[f64],
) -> Result<ConsistencyReport> {
    let exact = ExactPropagator::new(mass, stiff)?;
    let mut errors = Vec::with_capacity(taus.len());
    for &tau in taus {
        let approx = step(scheme, tau, mass, stiff, u0)?;
        let reference = exact.apply(tau, u0);
        let diff: Vec<f64> = approx.iter().zip(&reference).map(|(a, b)| a - b).collect();
        errors.push(mass.bilinear(&diff, &diff).max(0.0).sqrt());
    }
    let scale = mass.bilinear(u0, u0).max(0.0).sqrt();
    let floor = 100.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let all_zero = errors.iter().all(|&e| e <= floor);
    let points: Vec<(f64, f64)> = taus
        .iter()
        .zip(&errors)
        .filter(|(_, &e)| e > floor)
        .map(|(&t, &e)| (t, e))
        .collect();
    let slope = if points.len() >= 3 {
        fit_rate(&points).ok().map(|f| f.slope)
    } else {
        None
    };
    Ok(ConsistencyReport {
        taus: taus.to_vec(),
        errors,
        slope,
        exact: all_zero,
    })
}
