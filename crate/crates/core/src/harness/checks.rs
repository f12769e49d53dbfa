//! Invariant suite run by the `check` command.

use serde::{Deserialize, Serialize};

use crate::coeffs::{builtin_separable, eval_bounds_check, SpatialProfile, ZFactor};
use crate::error::Result;
use crate::linalg::generalized_eigenvalues;
use crate::orthopoly::PolyFamily;
use crate::pce::{tensor_basis_eval, DistributionSpec, TripleProductTensor};
use crate::sgsystem::{initial_coefficients, SgOperator, Truncation};
use crate::coeffs::InitialDatum;
use crate::spatial::{FeOrder, FeSpace, Mesh};
use crate::timestep::{RationalScheme, Stepper};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &str, r: Result<(bool, String)>) -> CheckResult {
    match r {
        Ok((passed, detail)) => CheckResult {
            name: name.into(),
            passed,
            detail,
        },
        Err(e) => CheckResult {
            name: name.into(),
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn families() -> Vec<PolyFamily> {
    vec![
        PolyFamily::hermite(),
        PolyFamily::legendre(),
        PolyFamily::Jacobi { alpha: 1.5, beta: 0.5 },
        PolyFamily::Laguerre { alpha: 0.0 },
        PolyFamily::Laguerre { alpha: 2.0 },
    ]
}

fn eigenrelation() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for f in families() {
        for (k, h) in f.orthonormal_polys(8).iter().enumerate() {
            let lhs = f.apply_q(h);
            let rhs = h.scale(f.sl_eigenvalue(k));
            worst = worst.max((&lhs - &rhs).max_abs() / h.max_abs());
        }
    }
    Ok((worst <= 1e-10, format!("max relative defect {worst:.2e}")))
}

fn gauss_exactness() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for f in families() {
        let reference = f.gauss_rule(40)?;
        for q in 1..=20 {
            let rule = f.gauss_rule(q)?;
            for p in 0..2 * q {
                let exact = reference.integrate(|z| z.powi(p as i32));
                let approx = rule.integrate(|z| z.powi(p as i32));
                // odd moments may cancel to zero; measure against E|z|^p
                let scale = reference.integrate(|z| z.abs().powi(p as i32));
                worst = worst.max((approx - exact).abs() / scale);
            }
        }
    }
    Ok((worst <= 1e-10, format!("max relative moment error {worst:.2e}")))
}

fn triple_symmetry() -> Result<(bool, String)> {
    let dist = DistributionSpec::new(vec![PolyFamily::hermite(), PolyFamily::Laguerre { alpha: 1.0 }])?;
    let eps = TripleProductTensor::new(&dist, 2)?;
    let inner = eps.inner();
    let mut ok = true;
    for b in 0..inner.len() {
        for c in 0..inner.len() {
            if eps.pair(b, c) != eps.pair(c, b) {
                ok = false;
            }
            // permuting α into an inner slot
            for &(a, v) in eps.pair(b, c) {
                if let Some(pa) = inner.position(eps.outer().get(a)) {
                    let pb = eps.outer().position(inner.get(b)).unwrap();
                    if eps.get(pb, pa, c) != v {
                        ok = false;
                    }
                }
            }
        }
    }
    Ok((ok, format!("{} stored entries", eps.nnz())))
}

fn block_operator() -> Result<(bool, String)> {
    let dist = DistributionSpec::iid(PolyFamily::hermite(), 1)?;
    let space = FeSpace::new(Mesh::interval(6)?, FeOrder::P2);
    let field = builtin_separable(
        ZFactor::Logistic { component: 0 },
        SpatialProfile::AnisotropicQuadratic,
        &dist,
        1,
    )?;
    let (op, _) = SgOperator::build(&dist, 2, &space, &field, 30, Truncation::Full)?;
    let a = op.stiffness().to_dense();
    let sym = (&a - a.transpose()).abs().max();
    let gram = space.h1_gram().kron_identity(op.modes()).to_dense();
    let coercive = generalized_eigenvalues(&a, &gram)?[0];
    let contract = generalized_eigenvalues(&a, &op.mass().to_dense())?[0];
    let ok = sym == 0.0 && coercive >= 1.0 - 1e-6 && contract >= -1e-10;
    Ok((
        ok,
        format!("asymmetry {sym:e}, coercivity {coercive:.6}, min eigenvalue {contract:.4}"),
    ))
}

fn parseval() -> Result<(bool, String)> {
    let dist = DistributionSpec::iid(PolyFamily::hermite(), 1)?;
    let space = FeSpace::new(Mesh::interval(8)?, FeOrder::P1);
    let mis = crate::pce::MultiIndexSet::new(1, 3)?;
    let u0 = InitialDatum::sine().with_z_terms(vec![(vec![3], 1.0), (vec![1], -2.0)]);
    let st = initial_coefficients(&dist, &mis, &u0, &space, 6)?;
    let mass = space.assemble_mass();
    let block = st.mass_norm(&mass);
    let rule = dist.tensor_rule(10)?;
    let quad: f64 = rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(z, w)| {
            let phi = tensor_basis_eval(&dist, &mis, z);
            let u: Vec<f64> = (0..space.ndof())
                .map(|i| st.coefficients.iter().zip(&phi).map(|(c, p)| c[i] * p).sum())
                .collect();
            w * mass.bilinear(&u, &u)
        })
        .sum::<f64>()
        .sqrt();
    let dev = (block - quad).abs();
    Ok((dev <= 1e-10, format!("deviation {dev:.2e}")))
}

fn a_stability() -> Result<(bool, String)> {
    let reports: Vec<_> = [RationalScheme::ImplicitEuler, RationalScheme::CrankNicolson]
        .iter()
        .map(|s| s.a_stability_probe())
        .collect();
    let ok = reports.iter().all(|r| r.ok());
    Ok((
        ok,
        format!(
            "max |r| on axis {:.3e} / {:.3e}",
            reports[0].max_on_axis, reports[1].max_on_axis
        ),
    ))
}

fn energy_decay() -> Result<(bool, String)> {
    let space = FeSpace::new(Mesh::interval(16)?, FeOrder::P2);
    let mass = space.assemble_mass();
    let k = space.assemble_stiffness(|x| SpatialProfile::Quadratic.eval(x))?;
    let mut ok = true;
    for tau in [10.0, 1.0, 0.01] {
        let s = Stepper::new(RationalScheme::ImplicitEuler, tau, &mass, &k)?;
        let mut u: Vec<f64> = (0..space.ndof()).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let mut energy = mass.bilinear(&u, &u);
        for _ in 0..20 {
            u = s.apply(&u)?;
            let e = mass.bilinear(&u, &u);
            if e > energy + 1e-10 {
                ok = false;
            }
            energy = e;
        }
    }
    Ok((ok, "tau in {10, 1, 0.01}".into()))
}

fn coefficient_bounds() -> Result<(bool, String)> {
    let dist = DistributionSpec::iid(PolyFamily::hermite(), 1)?;
    let field = builtin_separable(
        ZFactor::Logistic { component: 0 },
        SpatialProfile::AnisotropicQuadratic,
        &dist,
        2,
    )?;
    let zs: Vec<Vec<f64>> = (0..10).map(|i| vec![-10.0 + 20.0 * i as f64 / 9.0]).collect();
    let g: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
    let xs: Vec<Vec<f64>> = g.iter().flat_map(|&a| g.iter().map(move |&b| vec![a, b])).collect();
    let r = eval_bounds_check(&field, &zs, &xs);
    Ok((r.ok(), format!("{} samples, {} violations", r.samples, r.violations.len())))
}

/// Runs all invariant checks; each reports independently.
pub fn run_invariant_suite() -> Vec<CheckResult> {
    vec![
        result("Sturm-Liouville eigenrelation", eigenrelation()),
        result("Gauss rule exactness", gauss_exactness()),
        result("triple product symmetry", triple_symmetry()),
        result("block operator structure", block_operator()),
        result("Parseval consistency", parseval()),
        result("A-stability", a_stability()),
        result("energy decay", energy_decay()),
        result("coefficient bounds", coefficient_bounds()),
    ]
}
