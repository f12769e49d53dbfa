//! Convergence experiments: configuration, sweeps along the three
//! discretization axes, rate fits and reports.

mod checks;
mod fit;
mod reference;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use checks::{run_invariant_suite, CheckResult};
pub use fit::{fit_rate, local_slopes, RateFit};
pub use reference::{analytic_error, collocation_reference, AnalyticSolution, CollocationReference};

use crate::coeffs::{builtin_separable, eval_bounds_check, CoefficientField, InitialDatum, SeparableField, SpatialProfile, ZFactor};
use crate::error::{Error, Result};
use crate::pce::{DistributionSpec, MultiIndexSet, TensorRule};
use crate::sgsystem::{initial_coefficients, min_quadrature_nodes, SgOperator, SgState, Truncation};
use crate::spatial::{FeOrder, FeSpace, Mesh};
use crate::timestep::{evolve_final, RationalScheme, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// chaos order `n`
    N,
    /// cells per direction `m`
    M,
    /// number of time steps `N_k`
    TimeSteps,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::N => "n",
            Axis::M => "m",
            Axis::TimeSteps => "time_steps",
        }
    }

    pub const ALL: [Axis; 3] = [Axis::N, Axis::M, Axis::TimeSteps];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub factor: ZFactor,
    pub profile: SpatialProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub dim: usize,
    pub fe_order: FeOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub time_steps: Vec<usize>,
    /// also refine all three lists together; the `i`-th finest entries of
    /// each list form one joint point
    #[serde(default)]
    pub joint: bool,
}

impl SweepAxes {
    fn list(&self, axis: Axis) -> &[usize] {
        match axis {
            Axis::N => &self.n,
            Axis::M => &self.m,
            Axis::TimeSteps => &self.time_steps,
        }
    }

    fn finest(&self, axis: Axis) -> usize {
        self.list(axis).iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// nodes per dimension for the coefficient expansion; automatic if absent
    #[serde(default)]
    pub sg: Option<usize>,
    /// nodes per dimension for analytic-reference errors (default 40)
    #[serde(default)]
    pub error: Option<usize>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSpec {
    Analytic,
    Collocation {
        m_ref: usize,
        n_ref: usize,
        q_ref: usize,
        /// require `m_ref ≥ 4 max m` and `n_ref ≥ 4 max N_k`
        #[serde(default = "default_true")]
        strict_resolution: bool,
    },
}

fn default_floor_factor() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloorSpec {
    /// points with error below `factor × floor` are left out of fits
    #[serde(default = "default_floor_factor")]
    pub factor: f64,
    /// include the all-finest error in the floor of every axis
    #[serde(default)]
    pub include_finest: bool,
}

impl Default for FloorSpec {
    fn default() -> Self {
        Self {
            factor: default_floor_factor(),
            include_finest: false,
        }
    }
}

/// A requirement on one axis; the run succeeds iff all hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub axis: Axis,
    #[serde(default)]
    pub slope_min: Option<f64>,
    #[serde(default)]
    pub slope_max: Option<f64>,
    /// local slopes over 3-point windows increase strictly
    #[serde(default)]
    pub increasing_local_slopes: bool,
    /// errors decrease strictly along the whole axis
    #[serde(default)]
    pub strictly_decreasing: bool,
    /// error at the finest point stays below this value
    #[serde(default)]
    pub max_final_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub distribution: DistributionSpec,
    pub field: FieldSpec,
    #[serde(default)]
    pub initial: InitialDatum,
    pub geometry: Geometry,
    pub scheme: RationalScheme,
    pub t_bar: f64,
    pub sweep: SweepAxes,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    pub reference: ReferenceSpec,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default)]
    pub floor: FloorSpec,
    #[serde(default)]
    pub expectations: Vec<Expectation>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn field(&self) -> Result<SeparableField> {
        builtin_separable(
            self.field.factor.clone(),
            self.field.profile,
            &self.distribution,
            self.geometry.dim,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.t_bar > 0.0) {
            return bad(format!("t_bar must be positive, got {}", self.t_bar));
        }
        for axis in Axis::ALL {
            if self.sweep.list(axis).is_empty() {
                return bad(format!("sweep list '{}' is empty", axis.name()));
            }
        }
        if self.sweep.m.contains(&0) || self.sweep.time_steps.contains(&0) {
            return bad("m and time_steps entries must be positive".into());
        }
        Mesh::new(self.geometry.dim, 1)?;
        let field = self.field()?;
        if !field.is_elliptic() {
            return bad("the coefficient field is not uniformly elliptic on the parameter support".into());
        }
        match self.reference {
            ReferenceSpec::Analytic => {
                AnalyticSolution::new(self.field.factor.clone(), self.field.profile, self.initial.clone())?;
            }
            ReferenceSpec::Collocation {
                m_ref,
                n_ref,
                q_ref,
                strict_resolution,
            } => {
                if q_ref == 0 || m_ref == 0 || n_ref == 0 {
                    return bad("reference resolutions must be positive".into());
                }
                if let Some(m) = self.sweep.m.iter().find(|&&m| m_ref % m != 0) {
                    return bad(format!("m_ref = {m_ref} is not a refinement of m = {m}"));
                }
                let (mm, nn) = (self.sweep.finest(Axis::M), self.sweep.finest(Axis::TimeSteps));
                if strict_resolution && (m_ref < 4 * mm || n_ref < 4 * nn) {
                    return bad(format!(
                        "reference ({m_ref}, {n_ref}) must be at least 4x finer than ({mm}, {nn})"
                    ));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Nodes per dimension used for the coefficient expansion at order `n`.
    pub fn sg_nodes(&self, n: usize, field: &SeparableField) -> usize {
        let min = min_quadrature_nodes(n, field);
        match self.quadrature.sg {
            Some(q) => q.max(min),
            None if field.z_degree().is_some() => min,
            None => min.max(4 * n + 10),
        }
    }
}

enum Reference {
    Analytic(AnalyticSolution, TensorRule),
    Collocation(CollocationReference),
}

/// Everything shared by the points of one experiment.
pub struct Experiment {
    config: ExperimentConfig,
    field: SeparableField,
    reference: Reference,
    reference_error: f64,
}

/// Final state of one discretization together with its error.
#[derive(Debug, Clone)]
pub struct PointSolution {
    pub n: usize,
    pub m: usize,
    pub time_steps: usize,
    pub state: SgState,
    pub space: FeSpace,
    pub mis: MultiIndexSet,
    pub error: f64,
    pub aliasing_probe: f64,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let field = config.field()?;
        let dist = &config.distribution;
        let (reference, reference_error) = match config.reference {
            ReferenceSpec::Analytic => {
                let sol = AnalyticSolution::new(config.field.factor.clone(), config.field.profile, config.initial.clone())?;
                let rule = dist.tensor_rule(config.quadrature.error.unwrap_or(40))?;
                (Reference::Analytic(sol, rule), 0.0)
            }
            ReferenceSpec::Collocation { m_ref, n_ref, q_ref, .. } => {
                let fine = FeSpace::new(Mesh::new(config.geometry.dim, m_ref)?, config.geometry.fe_order);
                let grid = TimeGrid::uniform(config.t_bar, n_ref)?;
                let r = collocation_reference(dist, q_ref, &fine, &grid, &field, &config.initial)?;
                // a half-resolution reference bounds the error of the fine one
                let estimate = if m_ref % 2 == 0 && n_ref % 2 == 0 {
                    let half = FeSpace::new(Mesh::new(config.geometry.dim, m_ref / 2)?, config.geometry.fe_order);
                    let hgrid = TimeGrid::uniform(config.t_bar, n_ref / 2)?;
                    let h = collocation_reference(dist, q_ref, &half, &hgrid, &field, &config.initial)?;
                    r.error_of_samples(&half, &h.samples)?
                } else {
                    0.0
                };
                (Reference::Collocation(r), estimate)
            }
        };
        Ok(Self {
            config,
            field,
            reference,
            reference_error,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn field(&self) -> &SeparableField {
        &self.field
    }

    pub fn reference_error(&self) -> f64 {
        self.reference_error
    }

    /// Stochastic Galerkin solution at `(n, m, N_k)` and its error.
    pub fn solve(&self, n: usize, m: usize, time_steps: usize) -> Result<PointSolution> {
        let cfg = &self.config;
        let dist = &cfg.distribution;
        let space = FeSpace::new(Mesh::new(cfg.geometry.dim, m)?, cfg.geometry.fe_order);
        let q = cfg.sg_nodes(n, &self.field);
        let (op, mats) = SgOperator::build(dist, n, &space, &self.field, q, cfg.truncation)?;
        let start = initial_coefficients(dist, op.mis(), &cfg.initial, &space, q)?;
        let grid = TimeGrid::uniform(cfg.t_bar, time_steps)?;
        let end = evolve_final(cfg.scheme, &grid, op.mass(), op.stiffness(), &start.to_global())?;
        let state = SgState::from_global(cfg.t_bar, op.modes(), &end)?;
        let error = match &self.reference {
            Reference::Analytic(sol, rule) => analytic_error(dist, op.mis(), &state, &space, sol, rule),
            Reference::Collocation(r) => r.error(dist, op.mis(), &state, &space)?,
        };
        Ok(PointSolution {
            n,
            m,
            time_steps,
            state,
            space,
            mis: op.mis().clone(),
            error,
            aliasing_probe: mats.aliasing_probe,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisPoint {
    pub value: usize,
    pub h: f64,
    pub error: Option<f64>,
    pub runtime_s: f64,
    pub used_in_fit: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub aliasing_probe: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisReport {
    pub axis: Axis,
    pub fixed: BTreeMap<String, usize>,
    pub floor: f64,
    pub points: Vec<AxisPoint>,
    pub fit: Option<RateFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_note: Option<String>,
    pub local_slopes: Vec<f64>,
}

impl AxisReport {
    /// Errors of successful points in refinement order.
    pub fn errors(&self) -> Vec<f64> {
        self.points.iter().filter_map(|p| p.error).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPoint {
    pub n: usize,
    pub m: usize,
    pub time_steps: usize,
    pub error: Option<f64>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationOutcome {
    pub expectation: Expectation,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub name: String,
    pub config_hash: String,
    pub tool_version: String,
    pub reference_error_estimate: f64,
    pub finest_error: Option<f64>,
    pub axes: Vec<AxisReport>,
    pub joint: Vec<JointPoint>,
    pub invariants: Vec<CheckResult>,
    pub expectations: Vec<ExpectationOutcome>,
    pub passed: bool,
}

type Triple = (usize, usize, usize);

struct Outcome {
    error: std::result::Result<(f64, f64), String>,
    runtime_s: f64,
}

fn h_of(axis: Axis, value: usize, t_bar: f64) -> f64 {
    match axis {
        Axis::N | Axis::M => {
            if value == 0 {
                f64::INFINITY
            } else {
                1.0 / value as f64
            }
        }
        Axis::TimeSteps => t_bar / value as f64,
    }
}

fn triple_for(axis: Axis, value: usize, sweep: &SweepAxes) -> Triple {
    let (n, m, k) = (
        sweep.finest(Axis::N),
        sweep.finest(Axis::M),
        sweep.finest(Axis::TimeSteps),
    );
    match axis {
        Axis::N => (value, m, k),
        Axis::M => (n, value, k),
        Axis::TimeSteps => (n, m, value),
    }
}

/// Picks the fit points of one axis: admissible errors (above `100 ε` and
/// `factor × floor`), then the longest strictly decreasing run among them.
fn select_fit_points(points: &mut [AxisPoint], floor: f64, factor: f64) -> Vec<usize> {
    let mut admissible = Vec::new();
    for (i, p) in points.iter_mut().enumerate() {
        let Some(e) = p.error else { continue };
        if !p.h.is_finite() {
            p.note = Some("no finite step size".into());
        } else if e <= 100.0 * f64::EPSILON {
            p.note = Some("at machine precision".into());
        } else if floor > 0.0 && e <= factor * floor {
            p.note = Some(format!("within {factor}x of the error floor"));
        } else {
            admissible.push(i);
        }
    }
    let mut best: &[usize] = &[];
    let mut start = 0;
    for k in 1..=admissible.len() {
        let run_ends = k == admissible.len()
            || points[admissible[k]].error >= points[admissible[k - 1]].error;
        if run_ends {
            if k - start > best.len() {
                best = &admissible[start..k];
            }
            start = k;
        }
    }
    let best = best.to_vec();
    for &i in &admissible {
        if !best.contains(&i) {
            points[i].note = Some("outside the decreasing segment".into());
        }
    }
    for &i in &best {
        points[i].used_in_fit = true;
    }
    best
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn evaluate(exp: &Expectation, axis: &AxisReport) -> ExpectationOutcome {
    let mut failures = Vec::new();
    let mut facts = Vec::new();
    if exp.slope_min.is_some() || exp.slope_max.is_some() {
        match &axis.fit {
            Some(f) => {
                facts.push(format!("slope {:.3}", f.slope));
                if exp.slope_min.is_some_and(|lo| f.slope < lo) || exp.slope_max.is_some_and(|hi| f.slope > hi) {
                    failures.push(format!(
                        "slope {:.3} outside [{}, {}]",
                        f.slope,
                        exp.slope_min.map_or("-inf".into(), |v| v.to_string()),
                        exp.slope_max.map_or("inf".into(), |v| v.to_string())
                    ));
                }
            }
            None => failures.push(format!(
                "no fit ({})",
                axis.fit_note.clone().unwrap_or_default()
            )),
        }
    }
    if exp.increasing_local_slopes {
        let s = &axis.local_slopes;
        facts.push(format!("local slopes {s:.3?}"));
        let mags: Vec<f64> = s.iter().map(|v| v.abs()).collect();
        if s.len() < 2 || !strictly_increasing(&mags) {
            failures.push("local slopes do not increase".into());
        }
    }
    let errors = axis.errors();
    if exp.strictly_decreasing {
        let ok = errors.len() == axis.points.len() && errors.windows(2).all(|w| w[1] < w[0]);
        if ok {
            facts.push(format!("errors strictly decreasing over {} points", errors.len()));
        } else {
            failures.push(format!("errors not strictly decreasing: {errors:?}"));
        }
    }
    if let Some(limit) = exp.max_final_error {
        match axis.points.last().and_then(|p| p.error) {
            Some(e) if e < limit => facts.push(format!("final error {e:.3e}")),
            Some(e) => failures.push(format!("final error {e:.3e} not below {limit:e}")),
            None => failures.push("finest point failed".into()),
        }
    }
    let passed = failures.is_empty();
    let detail = if passed { facts.join("; ") } else { failures.join("; ") };
    ExpectationOutcome {
        expectation: exp.clone(),
        passed,
        detail,
    }
}

/// Cheap checks attached to every report.
fn report_invariants(exp: &Experiment) -> Vec<CheckResult> {
    let cfg = exp.config();
    let dim = cfg.geometry.dim;
    let zs: Vec<Vec<f64>> = cfg
        .distribution
        .tensor_rule(10)
        .map(|r| r.points)
        .unwrap_or_default();
    let grid: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
    let xs: Vec<Vec<f64>> = if dim == 1 {
        grid.iter().map(|&a| vec![a]).collect()
    } else {
        grid.iter().flat_map(|&a| grid.iter().map(move |&b| vec![a, b])).collect()
    };
    let bounds = eval_bounds_check(exp.field(), &zs, &xs);
    let stab = cfg.scheme.a_stability_probe();
    vec![
        CheckResult {
            name: "coefficient bounds".into(),
            passed: bounds.ok(),
            detail: format!(
                "{} samples, eigenvalues in [{:.4}, {:.4}], declared {:?}",
                bounds.samples, bounds.min_eigenvalue, bounds.max_eigenvalue, bounds.declared
            ),
        },
        CheckResult {
            name: "A-stability".into(),
            passed: stab.ok(),
            detail: format!("max |r| {:.3e} on axis, {:.3e} inside", stab.max_on_axis, stab.max_interior),
        },
    ]
}

/// Runs every sweep point of `config` and assembles the report.
pub fn sweep(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let exp = Experiment::new(config.clone())?;
    let sw = &config.sweep;
    let mut wanted: Vec<Triple> = Vec::new();
    for axis in Axis::ALL {
        for &v in sw.list(axis) {
            wanted.push(triple_for(axis, v, sw));
        }
    }
    let joint_triples: Vec<Triple> = if sw.joint {
        let sorted = |v: &[usize]| {
            let mut v = v.to_vec();
            v.sort_unstable();
            v.dedup();
            v
        };
        let (n, m, k) = (sorted(&sw.n), sorted(&sw.m), sorted(&sw.time_steps));
        let len = n.len().min(m.len()).min(k.len());
        (0..len)
            .map(|i| (n[n.len() - len + i], m[m.len() - len + i], k[k.len() - len + i]))
            .collect()
    } else {
        Vec::new()
    };
    wanted.extend(&joint_triples);
    wanted.sort_unstable();
    wanted.dedup();

    let outcomes: Vec<Outcome> = wanted
        .par_iter()
        .map(|&(n, m, k)| {
            let t0 = Instant::now();
            let error = exp
                .solve(n, m, k)
                .map(|s| (s.error, s.aliasing_probe))
                .map_err(|e| e.to_string());
            Outcome {
                error,
                runtime_s: t0.elapsed().as_secs_f64(),
            }
        })
        .collect();
    let results: BTreeMap<Triple, Outcome> = wanted.into_iter().zip(outcomes).collect();

    let finest = triple_for(Axis::N, sw.finest(Axis::N), sw);
    let finest_error = results[&finest].error.as_ref().ok().map(|e| e.0);
    let mut axes = Vec::new();
    for axis in Axis::ALL {
        let mut values = sw.list(axis).to_vec();
        values.sort_unstable();
        values.dedup();
        let mut points: Vec<AxisPoint> = values
            .iter()
            .map(|&v| {
                let o = &results[&triple_for(axis, v, sw)];
                AxisPoint {
                    value: v,
                    h: h_of(axis, v, config.t_bar),
                    error: o.error.as_ref().ok().map(|e| e.0),
                    runtime_s: o.runtime_s,
                    used_in_fit: false,
                    note: o.error.as_ref().err().cloned(),
                    aliasing_probe: o.error.as_ref().ok().map(|e| e.1),
                }
            })
            .collect();
        let floor = if config.floor.include_finest {
            exp.reference_error().max(finest_error.unwrap_or(0.0))
        } else {
            exp.reference_error()
        };
        let chosen = select_fit_points(&mut points, floor, config.floor.factor);
        let pairs: Vec<(f64, f64)> = chosen
            .iter()
            .map(|&i| (points[i].h, points[i].error.unwrap()))
            .collect();
        let (fit, fit_note) = match fit_rate(&pairs) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let local = local_slopes(&pairs, 3);
        let (n, m, k) = triple_for(axis, 0, sw);
        let mut fixed = BTreeMap::new();
        if axis != Axis::N {
            fixed.insert("n".to_string(), n);
        }
        if axis != Axis::M {
            fixed.insert("m".to_string(), m);
        }
        if axis != Axis::TimeSteps {
            fixed.insert("time_steps".to_string(), k);
        }
        axes.push(AxisReport {
            axis,
            fixed,
            floor,
            points,
            fit,
            fit_note,
            local_slopes: local,
        });
    }
    let joint = joint_triples
        .iter()
        .map(|t| {
            let o = &results[t];
            JointPoint {
                n: t.0,
                m: t.1,
                time_steps: t.2,
                error: o.error.as_ref().ok().map(|e| e.0),
                runtime_s: o.runtime_s,
            }
        })
        .collect();
    let expectations: Vec<ExpectationOutcome> = config
        .expectations
        .iter()
        .map(|e| {
            let axis = axes.iter().find(|a| a.axis == e.axis).expect("all axes present");
            evaluate(e, axis)
        })
        .collect();
    let passed = expectations.iter().all(|e| e.passed);
    Ok(ConvergenceReport {
        name: config.name.clone(),
        config_hash: config.hash(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        reference_error_estimate: exp.reference_error(),
        finest_error,
        axes,
        joint,
        invariants: report_invariants(&exp),
        expectations,
        passed,
    })
}

impl ConvergenceReport {
    /// `axis,value,error,runtime_s` rows; joint rows use the position in the
    /// joint sequence as value. Failed points have an empty error.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis,value,error,runtime_s\n");
        let fmt = |e: Option<f64>| e.map_or(String::new(), |v| format!("{v:.10e}"));
        for a in &self.axes {
            for p in &a.points {
                let _ = writeln!(out, "{},{},{},{:.6}", a.axis.name(), p.value, fmt(p.error), p.runtime_s);
            }
        }
        for (i, p) in self.joint.iter().enumerate() {
            let _ = writeln!(out, "joint,{},{},{:.6}", i, fmt(p.error), p.runtime_s);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn axis(&self, axis: Axis) -> &AxisReport {
        self.axes.iter().find(|a| a.axis == axis).expect("all axes present")
    }

    /// The report with all runtimes zeroed, for reproducibility comparisons.
    pub fn without_runtimes(&self) -> Self {
        let mut r = self.clone();
        for a in &mut r.axes {
            for p in &mut a.points {
                p.runtime_s = 0.0;
            }
        }
        for p in &mut r.joint {
            p.runtime_s = 0.0;
        }
        r
    }

    /// Writes CSV and JSON to the paths named in `output`.
    pub fn write_outputs(&self, output: &OutputSpec) -> Result<()> {
        if let Some(p) = &output.csv {
            std::fs::write(p, self.to_csv())?;
        }
        if let Some(p) = &output.json {
            std::fs::write(p, self.to_json())?;
        }
        Ok(())
    }
}

/// Result of a single discretization at the finest sweep values.
#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub n: usize,
    pub m: usize,
    pub time_steps: usize,
    pub error: f64,
    pub runtime_s: f64,
    pub aliasing_probe: f64,
    pub state: SgState,
}

pub fn solve_finest(config: &ExperimentConfig) -> Result<SolveSummary> {
    let t0 = Instant::now();
    let exp = Experiment::new(config.clone())?;
    let sw = &config.sweep;
    let s = exp.solve(sw.finest(Axis::N), sw.finest(Axis::M), sw.finest(Axis::TimeSteps))?;
    Ok(SolveSummary {
        n: s.n,
        m: s.m,
        time_steps: s.time_steps,
        error: s.error,
        runtime_s: t0.elapsed().as_secs_f64(),
        aliasing_probe: s.aliasing_probe,
        state: s.state,
    })
}
