//! Batch driver: configuration, scenario runs with CSV output, convergence
//! tables and the randomized property suite.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dgsem::{Discretization, MeshState, SchemeConfig, ShockCapture, SourceTerm, SpectralOperators};
use crate::diagnostics::{
    analysis_l2_error, convergence_rates, entropy_dissipation_rate, l2_error, lake_at_rest_error, total_entropy,
    total_mass, TimeSeries,
};
use crate::error::{Error, Result};
use crate::fluxes::{ec_condition_residual, FluxMode};
use crate::model::{to_primitive_into, ConservedState, Friction, Model, ModelKind, PhysicsParams};
use crate::moment_basis::{build_tensors, MomentTensors};
use crate::scenarios::{example3, Scenario, ScenarioKind};
use crate::time::{integrate, Event, TimeControls};

/// Per-run parameter overrides. Unset fields keep the scenario defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moments: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux_mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub friction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shock_capture: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_count: Option<usize>,
}

impl Overrides {
    /// Fields set in `other` replace those in `self`.
    pub fn merged_with(&self, other: &Overrides) -> Overrides {
        macro_rules! pick {
            ($($f:ident),*) => { Overrides { $($f: other.$f.clone().or_else(|| self.$f.clone())),* } };
        }
        pick!(moments, degree, elements, cfl, dt, t_end, flux_mode, friction, nu, shock_capture, output_dir, snapshot_count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub overrides: Overrides,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { scenario: "example1".into(), seed: 0, overrides: Overrides::default() }
    }
}

impl RunConfig {
    pub fn new(scenario: &str) -> Self {
        RunConfig { scenario: scenario.into(), ..Default::default() }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    /// Resolve the scenario and apply every override, validating ranges.
    pub fn scenario(&self) -> Result<Scenario> {
        let mut s = Scenario::by_name(&self.scenario)?;
        apply_overrides(&mut s, &self.overrides)?;
        s.validate()?;
        Ok(s)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.overrides
            .output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("output").join(&self.scenario))
    }

    pub fn snapshot_count(&self) -> usize {
        self.overrides.snapshot_count.unwrap_or(5)
    }
}

fn positive<T: PartialOrd + Default + fmt::Display + Copy>(name: &str, v: T) -> Result<T> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

fn apply_overrides(s: &mut Scenario, o: &Overrides) -> Result<()> {
    if let Some(n) = o.moments {
        s.n_moments = positive("moments", n)?;
    }
    if let Some(p) = o.degree {
        s.degree = positive("degree", p)?;
    }
    if let Some(k) = o.elements {
        s.elements = positive("elements", k)?;
    }
    if let Some(c) = o.cfl {
        s.controls.cfl = positive("cfl", c)?;
    }
    if let Some(dt) = o.dt {
        s.controls.dt_fixed = Some(positive("dt", dt)?);
    }
    if let Some(t) = o.t_end {
        if !(t >= 0.0) {
            return Err(Error::Config(format!("t_end must be non-negative, got {t}")));
        }
        s.controls.t_end = t;
    }
    if let Some(mode) = &o.flux_mode {
        s.scheme.flux_mode = mode.parse()?;
    }
    if let Some(f) = &o.friction {
        let nu = o.nu.unwrap_or(match s.physics.friction {
            Friction::Slip { nu, .. } | Friction::Manning { nu, .. } => nu,
            Friction::None => 0.1,
        });
        let friction = match f.as_str() {
            "none" => Friction::None,
            "slip" => Friction::Slip { nu, slip_length: 0.1 },
            "manning" => Friction::Manning { nu, n: 0.0165, rho: 1000.0 },
            other => return Err(Error::Config(format!("unknown friction law '{other}'"))),
        };
        s.physics.friction = friction;
    } else if let Some(nu_new) = o.nu {
        match &mut s.physics.friction {
            Friction::Slip { nu, .. } | Friction::Manning { nu, .. } => *nu = nu_new,
            Friction::None => return Err(Error::Config("--nu given but friction is off".into())),
        }
    }
    s.scheme.source = match (&s.scheme.source, s.physics.friction) {
        (SourceTerm::Manufactured(m), _) => SourceTerm::Manufactured(m.clone()),
        (_, Friction::None) => SourceTerm::None,
        _ => SourceTerm::Friction,
    };
    if let Some(on) = o.shock_capture {
        s.scheme.shock_capture = on.then(ShockCapture::default);
    }
    if o.snapshot_count == Some(0) {
        return Err(Error::Config("snapshot count must be at least 1".into()));
    }
    Ok(())
}

/// Output times for `count` equispaced snapshots, the first at t = 0.
pub fn snapshot_times(t_end: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![t_end];
    }
    (0..count).map(|i| t_end * i as f64 / (count - 1) as f64).collect()
}

/// CSV of primitive variables `x,h,u_m,alpha_1..alpha_N,b`.
pub fn write_snapshot<W: Write>(state: &MeshState, mut out: W) -> Result<()> {
    let n = state.n_moments();
    let mut header = String::from("x,h,u_m");
    for i in 1..=n {
        header.push_str(&format!(",alpha_{i}"));
    }
    header.push_str(",b");
    writeln!(out, "{header}")?;
    let mut prim = vec![0.0; state.n_vars()];
    for (_, _, x, u) in state.iter_nodes() {
        to_primitive_into(u, &mut prim);
        write!(out, "{x:.16e}")?;
        for v in &prim {
            write!(out, ",{v:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub scenario: String,
    pub t_final: f64,
    pub steps: usize,
    pub total_entropy: f64,
    pub total_mass: f64,
    pub dissipation_rate: f64,
    pub lake_at_rest_error: Option<f64>,
    pub errors: Option<Vec<f64>>,
    pub files: Vec<PathBuf>,
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: t = {} after {} steps, entropy = {:.12e}, mass = {:.12e}, dissipation = {:.6e}",
            self.scenario, self.t_final, self.steps, self.total_entropy, self.total_mass, self.dissipation_rate
        )?;
        if let Some(e) = self.lake_at_rest_error {
            write!(f, ", lake_at_rest_error = {e:.6e}")?;
        }
        if let Some(errs) = &self.errors {
            let parts: Vec<String> = errs.iter().map(|e| format!("{e:.6e}")).collect();
            write!(f, ", L2 errors = [{}]", parts.join(", "))?;
        }
        Ok(())
    }
}

/// Run one scenario, writing snapshot CSVs and `timeseries.csv` into the
/// output directory.
pub fn run_scenario(cfg: &RunConfig) -> Result<RunSummary> {
    let scenario = cfg.scenario()?;
    let disc = scenario.discretization()?;
    let mut state = scenario.initial_state(&disc)?;
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir)?;

    let times = snapshot_times(scenario.controls.t_end, cfg.snapshot_count());
    let controls = TimeControls { snapshot_times: times.clone(), ..scenario.controls.clone() };
    let level = scenario.rest_level();
    let mut series = TimeSeries::new();
    let sample_every = scenario.controls.t_end / 1000.0;
    let mut next_sample = 0.0;
    let mut files = Vec::new();
    let mut snap_index = 0usize;

    let write_snap = |st: &MeshState, files: &mut Vec<PathBuf>, idx: &mut usize| -> Result<()> {
        let path = dir.join(format!("snapshot_{:03}.csv", *idx));
        write_snapshot(st, BufWriter::new(fs::File::create(&path)?))?;
        files.push(path);
        *idx += 1;
        Ok(())
    };

    let stats = integrate(&disc, &mut state, &controls, |st, ev| {
        match ev {
            Event::Start => {
                series.record(st, &disc, level);
                next_sample += sample_every;
                if times.first() == Some(&0.0) {
                    write_snap(st, &mut files, &mut snap_index)?;
                }
            }
            Event::Step { .. } => {
                if st.t >= next_sample {
                    series.record(st, &disc, level);
                    while next_sample <= st.t {
                        next_sample += sample_every.max(f64::MIN_POSITIVE);
                    }
                }
            }
            Event::Snapshot { .. } => {
                series.record(st, &disc, level);
                write_snap(st, &mut files, &mut snap_index)?;
            }
        }
        Ok(())
    })?;

    let ts_path = dir.join("timeseries.csv");
    series.write_csv(BufWriter::new(fs::File::create(&ts_path)?))?;
    files.push(ts_path);

    let t = state.t;
    let errors = scenario
        .exact_solution(0.0, t)
        .map(|_| l2_error(&state, disc.ops(), &|x| scenario.exact_solution(x, t).unwrap()));
    Ok(RunSummary {
        scenario: scenario.name.clone(),
        t_final: stats.t_final,
        steps: stats.steps,
        total_entropy: total_entropy(&state, disc.ops(), disc.model()),
        total_mass: total_mass(&state, disc.ops()),
        dissipation_rate: entropy_dissipation_rate(&state, disc.ops(), disc.model()),
        lake_at_rest_error: level.map(|l| lake_at_rest_error(&state, l)),
        errors,
        files,
    })
}

/// How discrete errors are measured in a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorNorm {
    /// LGL quadrature of nodal differences.
    #[default]
    Nodal,
    /// Root-mean-square over an LGL grid of degree 2P in every element.
    Oversampled,
}

impl std::str::FromStr for ErrorNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nodal" => Ok(ErrorNorm::Nodal),
            "oversampled" => Ok(ErrorNorm::Oversampled),
            other => Err(Error::Config(format!("unknown error norm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub elements: Vec<usize>,
    pub errors: Vec<Vec<f64>>,
    /// One row fewer than `errors`.
    pub rates: Vec<Vec<f64>>,
}

impl ConvergenceTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let nv = self.errors.first().map_or(0, Vec::len);
        let names = component_names(nv.saturating_sub(3));
        let mut header = vec!["K".to_string()];
        for n in &names {
            header.push(format!("e_{n}"));
            header.push(format!("rate_{n}"));
        }
        writeln!(out, "{}", header.join(","))?;
        for (row, k) in self.elements.iter().enumerate() {
            let mut cols = vec![k.to_string()];
            for c in 0..nv {
                cols.push(format!("{:.6e}", self.errors[row][c]));
                cols.push(if row == 0 { String::new() } else { format!("{:.4}", self.rates[row - 1][c]) });
            }
            writeln!(out, "{}", cols.join(","))?;
        }
        Ok(())
    }
}

fn component_names(n: usize) -> Vec<String> {
    let mut v = vec!["h".to_string(), "hu_m".to_string()];
    v.extend((1..=n).map(|i| format!("halpha_{i}")));
    v.push("b".into());
    v
}

/// Manufactured-solution errors for each element count of the ladder.
pub fn run_convergence(cfg: &RunConfig, ladder: &[usize], norm: ErrorNorm) -> Result<ConvergenceTable> {
    if ladder.is_empty() {
        return Err(Error::Config("empty element ladder".into()));
    }
    if ladder.iter().any(|k| !k.is_power_of_two()) || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("element counts must be strictly increasing powers of two".into()));
    }
    let base = cfg.scenario()?;
    if base.kind != ScenarioKind::Manufactured {
        return Err(Error::Config(format!("scenario '{}' has no exact solution", cfg.scenario)));
    }
    let mut errors = Vec::with_capacity(ladder.len());
    for &k in ladder {
        let mut s = example3(base.physics.model, k)?;
        s.n_moments = base.n_moments;
        s.degree = base.degree;
        s.physics = base.physics;
        s.scheme = base.scheme.clone();
        s.controls = base.controls.clone();
        let disc = s.discretization()?;
        let mut state = s.initial_state(&disc)?;
        integrate(&disc, &mut state, &s.controls, |_, _| Ok(()))?;
        let t = state.t;
        let exact = |x: f64| s.exact_solution(x, t).unwrap();
        errors.push(match norm {
            ErrorNorm::Nodal => l2_error(&state, disc.ops(), &exact),
            ErrorNorm::Oversampled => analysis_l2_error(&state, disc.ops(), &exact, 2 * s.degree)?,
        });
    }
    let rates = if errors.len() > 1 { convergence_rates(&errors)? } else { Vec::new() };
    Ok(ConvergenceTable { elements: ladder.to_vec(), errors, rates })
}

/// Outcome of one randomized invariant check.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub worst: f64,
    pub first_failure: Option<String>,
}

impl PropertyResult {
    fn new(name: &'static str) -> Self {
        PropertyResult { name, cases: 0, failures: 0, worst: 0.0, first_failure: None }
    }

    fn check(&mut self, value: f64, limit: f64, context: impl FnOnce() -> String) {
        self.cases += 1;
        self.worst = self.worst.max(value);
        if !(value <= limit) {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(format!("{} (value {value:.3e} > {limit:.1e})", context()));
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {:<22} {:>6} cases, {:>4} failures, worst {:.3e}",
            self.name, self.cases, self.failures, self.worst
        )?;
        if let Some(s) = &self.first_failure {
            write!(f, "\n     first failure: {s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(PropertyResult::passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &PropertyResult> {
        self.results.iter().filter(|r| !r.passed())
    }
}

/// Size of the randomized property suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertySuite {
    pub seed: u64,
    /// State pairs per (N, model) combination.
    pub samples: usize,
}

impl Default for PropertySuite {
    fn default() -> Self {
        PropertySuite { seed: 0, samples: 1000 }
    }
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ConservedState::from_primitive(rng.gen_range(0.05..4.0), rng.gen_range(-2.0..2.0), &alpha, rng.gen_range(-1.0..1.0)).0
}

/// Randomized invariant checks with the built-in moment tensors.
pub fn run_property_suite(suite: &PropertySuite) -> Result<PropertyReport> {
    run_property_suite_with(suite, &build_tensors)
}

/// Randomized invariant checks using `tensors(n)` for the moment tensors.
pub fn run_property_suite_with(
    suite: &PropertySuite,
    tensors: &dyn Fn(usize) -> Result<MomentTensors>,
) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(suite.seed);
    let mut results = Vec::new();
    let kinds = [ModelKind::Swme, ModelKind::Swlme];
    let models = |n: usize, params: PhysicsParams| -> Result<Model> {
        Model::with_tensors(Arc::new(tensors(n)?), params)
    };

    let mut tensor_id = PropertyResult::new("tensor_identity");
    for n in 1..=8 {
        let t = tensors(n)?;
        tensor_id.check(t.antisymmetry_residual(), 1e-13, || format!("N = {n}"));
    }
    results.push(tensor_id);

    let mut ec = PropertyResult::new("ec_flux_condition");
    for kind in kinds {
        for n in 1..=4 {
            let g = rng.gen_range(0.5..20.0);
            let model = models(n, PhysicsParams::new(g, kind))?;
            for _ in 0..suite.samples {
                let ul = random_state(&mut rng, n);
                let ur = random_state(&mut rng, n);
                let (res, scale) = ec_condition_residual(&model, &ul, &ur)?;
                ec.check(res.abs() / (scale + 1.0), 1e-12, || format!("{kind:?} N={n} g={g} uL={ul:?} uR={ur:?}"));
            }
        }
    }
    results.push(ec);

    let mut fr = PropertyResult::new("friction_dissipation");
    for kind in kinds {
        for n in 1..=4 {
            for law in 0..2 {
                let nu = 10f64.powf(rng.gen_range(-2.0..0.0));
                let friction = if law == 0 {
                    Friction::Slip { nu, slip_length: rng.gen_range(0.01..1.0) }
                } else {
                    Friction::Manning { nu, n: 0.0165, rho: 1000.0 }
                };
                let model = models(n, PhysicsParams::new(9.81, kind).with_friction(friction))?;
                for _ in 0..suite.samples / 4 + 1 {
                    let u = random_state(&mut rng, n);
                    let w = model.entropy_vars(&u)?.0;
                    let s = model.friction_source(&u)?;
                    let dot: f64 = w.iter().zip(&s).map(|(a, b)| a * b).sum();
                    let scale: f64 = w.iter().zip(&s).map(|(a, b)| (a * b).abs()).sum::<f64>() + 1.0;
                    fr.check(dot / scale, 1e-12, || format!("{kind:?} N={n} {friction:?} u={u:?}"));
                }
            }
        }
    }
    results.push(fr);

    let mut sbp = PropertyResult::new("sbp");
    for p in 1..=8 {
        sbp.check(SpectralOperators::new(p)?.sbp_residual(), 1e-13, || format!("P = {p}"));
    }
    results.push(sbp);

    let mut wb = PropertyResult::new("well_balanced");
    for case in 0..8 {
        let n = 1 + case % 4;
        let kind = kinds[case % 2];
        let p = rng.gen_range(1..=4);
        let k = rng.gen_range(4..=24);
        let level = rng.gen_range(2.0..4.0);
        let amp = rng.gen_range(0.1..1.0);
        let freq = rng.gen_range(1..4) as f64;
        let mode = if case % 3 == 0 { FluxMode::Ec } else { FluxMode::Es };
        let model = models(n, PhysicsParams::new(rng.gen_range(1.0..10.0), kind))?;
        let cfg = SchemeConfig { flux_mode: mode, shock_capture: Some(ShockCapture::default()), ..Default::default() };
        let disc = Discretization::new(model, p, cfg)?;
        let ic = move |x: f64| {
            let b = amp * (freq * std::f64::consts::PI * x).sin();
            let mut u = vec![0.0; n + 3];
            u[0] = level - b;
            u[n + 2] = b;
            u
        };
        let state = disc.project(&ic, (-1.0, 1.0), k)?;
        let mut rhs = vec![0.0; state.u.len()];
        disc.rhs(&state, &mut rhs)?;
        let worst = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        // h = level − b is rounded, so h + b recovers the level only to ε
        let ops = disc.ops();
        let row_sum = (0..=p).map(|i| (0..=p).map(|m| ops.d(i, m).abs()).sum::<f64>()).fold(0.0, f64::max);
        let scale = disc.model().g() * level * row_sum / (0.5 * state.dx());
        wb.check(worst / scale, 1e-14, || format!("{kind:?} N={n} P={p} K={k} {mode}"));
    }
    results.push(wb);

    Ok(PropertyReport { seed: suite.seed, results })
}

/// Cap the worker pool from `SWME_DG_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SWME_DG_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Config(format!("SWME_DG_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(Error::Config("SWME_DG_THREADS must be at least 1".into()));
        }
        // a second initialization attempt is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
