//! Built-in test problems: a travelling wave with slip friction, friction
//! dissipation, a manufactured smooth solution and a perturbed lake at rest.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use crate::dgsem::{Discretization, MeshState, PointSource, SchemeConfig, ShockCapture, SourceTerm};
use crate::error::{Error, Result};
use crate::fluxes::FluxMode;
use crate::model::{moment, Friction, Model, ModelKind, PhysicsParams};
use crate::time::TimeControls;

/// Gravity used for the manufactured-solution study.
pub const MANUFACTURED_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioKind {
    /// Smooth hump advected with a fixed vertical velocity profile.
    TravellingWave,
    /// Closed-form solution driven by a source term.
    Manufactured,
    /// Gaussian bump under still water, optionally with a small velocity kick.
    LakeAtRest { perturbed: bool },
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    pub domain: (f64, f64),
    pub n_moments: usize,
    pub degree: usize,
    pub elements: usize,
    pub physics: PhysicsParams,
    pub scheme: SchemeConfig,
    pub controls: TimeControls,
}

/// Still-water level of the lake-at-rest problem.
pub const LAKE_LEVEL: f64 = 1.75;

impl Scenario {
    pub fn initial_condition(&self, x: f64) -> Vec<f64> {
        let n = self.n_moments;
        let mut u = vec![0.0; n + 3];
        match self.kind {
            ScenarioKind::TravellingWave => {
                let h = 1.0 + (3.0 * (PI * (x + 0.5)).cos() - 4.0).exp();
                u[0] = h;
                u[1] = 0.25 * h;
                if n >= 2 {
                    u[moment(1)] = -0.25 * h;
                }
            }
            ScenarioKind::Manufactured => return manufactured_state(n, x, 0.0),
            ScenarioKind::LakeAtRest { perturbed } => {
                let b = lake_bottom(x);
                let h = LAKE_LEVEL - b;
                u[0] = h;
                u[n + 2] = b;
                if perturbed {
                    let v = if (-1.0..0.0).contains(&x) {
                        -1e-3
                    } else if (0.0..=1.0).contains(&x) {
                        1e-3
                    } else {
                        0.0
                    };
                    u[1] = h * v;
                    for i in 0..n.min(2) {
                        u[moment(i)] = h * v;
                    }
                }
            }
        }
        u
    }

    pub fn bathymetry(&self, x: f64) -> f64 {
        match self.kind {
            ScenarioKind::TravellingWave => 0.0,
            ScenarioKind::Manufactured => manufactured_bottom(x),
            ScenarioKind::LakeAtRest { .. } => lake_bottom(x),
        }
    }

    pub fn exact_solution(&self, x: f64, t: f64) -> Option<Vec<f64>> {
        match self.kind {
            ScenarioKind::Manufactured => Some(manufactured_state(self.n_moments, x, t)),
            _ => None,
        }
    }

    /// Reference total height for the lake-at-rest error, if meaningful.
    pub fn rest_level(&self) -> Option<f64> {
        match self.kind {
            ScenarioKind::LakeAtRest { .. } => Some(LAKE_LEVEL),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.domain.0 < self.domain.1) {
            return Err(Error::arg("scenario domain is empty"));
        }
        if self.n_moments == 0 || self.degree == 0 || self.elements == 0 {
            return Err(Error::arg("moments, degree and elements must all be positive"));
        }
        self.physics.validate()?;
        self.scheme.validate()?;
        self.controls.validate()
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(self.n_moments, self.physics)
    }

    pub fn discretization(&self) -> Result<Discretization> {
        self.validate()?;
        Discretization::new(self.model()?, self.degree, self.scheme.clone())
    }

    pub fn initial_state(&self, disc: &Discretization) -> Result<MeshState> {
        disc.project(&|x| self.initial_condition(x), self.domain, self.elements)
    }

    /// Look up a scenario by its name.
    pub fn by_name(name: &str) -> Result<Scenario> {
        match name {
            "example1" | "travelling-wave" => Ok(example1()),
            "example2" | "example2-slip" => example2(Friction::Slip { nu: 0.1, slip_length: 0.1 }),
            "example2-manning" => example2(Friction::Manning { nu: 0.1, n: 0.0165, rho: 1000.0 }),
            "example3" | "manufactured" => example3(ModelKind::Swme, 64),
            "example3-linear" => example3(ModelKind::Swlme, 64),
            "example4" | "lake-at-rest" => Ok(example4(true)),
            "example4-rusanov" => Ok(example4(false)),
            "lake-at-rest-exact" => Ok(lake_at_rest(false, FluxMode::Es)),
            other => Err(Error::Config(format!("unknown scenario '{other}'"))),
        }
    }

    pub fn names() -> &'static [&'static str] {
        &[
            "example1",
            "example2-slip",
            "example2-manning",
            "example3",
            "example3-linear",
            "example4",
            "example4-rusanov",
            "lake-at-rest-exact",
        ]
    }
}

/// Travelling wave with Newtonian slip friction, g = 1.
pub fn example1() -> Scenario {
    let physics = PhysicsParams::new(1.0, ModelKind::Swme).with_friction(Friction::Slip { nu: 0.1, slip_length: 0.1 });
    Scenario {
        name: "example1".into(),
        kind: ScenarioKind::TravellingWave,
        domain: (-1.0, 1.0),
        n_moments: 2,
        degree: 2,
        elements: 256,
        physics,
        scheme: SchemeConfig {
            flux_mode: FluxMode::Es,
            shock_capture: Some(ShockCapture::default()),
            source: SourceTerm::Friction,
        },
        controls: TimeControls::new(2.0).equispaced(4),
    }
}

/// Travelling-wave data for the linearized model with the given friction law.
pub fn example2(friction: Friction) -> Result<Scenario> {
    match friction {
        Friction::None => return Err(Error::arg("friction dissipation study needs a friction law")),
        Friction::Slip { nu, .. } | Friction::Manning { nu, .. } if !(nu > 0.0) => {
            return Err(Error::arg(format!("viscosity must be positive, got {nu}")))
        }
        _ => {}
    }
    let label = match friction {
        Friction::Slip { .. } => "example2-slip",
        _ => "example2-manning",
    };
    let mut s = example1();
    s.name = label.into();
    s.physics = PhysicsParams::new(9.81, ModelKind::Swlme).with_friction(friction);
    Ok(s)
}

/// Manufactured smooth solution on [0, √2] with K elements, P = 3, N = 2.
pub fn example3(model: ModelKind, elements: usize) -> Result<Scenario> {
    if elements == 0 || !elements.is_power_of_two() {
        return Err(Error::arg(format!("element count {elements} is not a power of two")));
    }
    Ok(Scenario {
        name: match model {
            ModelKind::Swme => "example3".into(),
            ModelKind::Swlme => "example3-linear".into(),
        },
        kind: ScenarioKind::Manufactured,
        domain: (0.0, SQRT_2),
        n_moments: 2,
        degree: 3,
        elements,
        physics: PhysicsParams::new(MANUFACTURED_GRAVITY, model),
        scheme: SchemeConfig {
            flux_mode: FluxMode::Es,
            shock_capture: None,
            source: SourceTerm::Manufactured(Arc::new(ManufacturedSource)),
        },
        controls: TimeControls { dt_fixed: Some(1e-5), ..TimeControls::new(0.05) },
    })
}

/// Perturbed lake at rest, K = 64, P = 1. `well_balanced` selects the
/// entropy-stable interface dissipation, otherwise plain Rusanov.
pub fn example4(well_balanced: bool) -> Scenario {
    let mode = if well_balanced { FluxMode::Es } else { FluxMode::Rusanov };
    let mut s = lake_at_rest(true, mode);
    s.name = if well_balanced { "example4".into() } else { "example4-rusanov".into() };
    s
}

/// Lake at rest over a Gaussian bump, with or without the velocity kick.
pub fn lake_at_rest(perturbed: bool, flux_mode: FluxMode) -> Scenario {
    Scenario {
        name: "lake-at-rest".into(),
        kind: ScenarioKind::LakeAtRest { perturbed },
        domain: (-4.0, 4.0),
        n_moments: 2,
        degree: 1,
        elements: 64,
        physics: PhysicsParams::new(9.812, ModelKind::Swme),
        scheme: SchemeConfig { flux_mode, shock_capture: Some(ShockCapture::default()), source: SourceTerm::None },
        controls: TimeControls::new(8000.0).equispaced(8),
    }
}

fn lake_bottom(x: f64) -> f64 {
    (-0.5 * x * x).exp()
}

fn manufactured_bottom(x: f64) -> f64 {
    2.0 + 0.5 * (SQRT_2 * PI * x).sin()
}

fn manufactured_height(x: f64, t: f64) -> f64 {
    7.0 + (2.0 * SQRT_2 * PI * x).cos() * (2.0 * PI * t).cos() - manufactured_bottom(x)
}

/// Exact conserved state of the manufactured solution: u_m = α_i = ½.
pub fn manufactured_state(n: usize, x: f64, t: f64) -> Vec<f64> {
    let h = manufactured_height(x, t);
    let mut u = vec![0.5 * h; n + 3];
    u[0] = h;
    u[n + 2] = manufactured_bottom(x);
    u
}

/// Source that makes [`manufactured_state`] an exact solution.
#[derive(Debug, Clone, Copy, Default)]
pub struct ManufacturedSource;

impl ManufacturedSource {
    pub fn evaluate(model: &Model, x: f64, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; model.n_vars()];
        manufactured_source_into(model, x, t, &mut out);
        out
    }
}

impl PointSource for ManufacturedSource {
    fn source_into(&self, model: &Model, x: f64, t: f64, out: &mut [f64]) {
        manufactured_source_into(model, x, t, out);
    }
}

/// Closed form of ∂t u + ∂x f(u) + B(u) ∂x u at the manufactured solution.
pub fn manufactured_source(model: &Model, x: f64, t: f64) -> Vec<f64> {
    ManufacturedSource::evaluate(model, x, t)
}

fn manufactured_source_into(model: &Model, x: f64, t: f64, out: &mut [f64]) {
    let n = model.n_moments();
    let g = model.g();
    let k = SQRT_2 * PI;
    let h = manufactured_height(x, t);
    let h_t = -2.0 * PI * (2.0 * k * x).cos() * (2.0 * PI * t).sin();
    let eta_x = -2.0 * k * (2.0 * k * x).sin() * (2.0 * PI * t).cos();
    let b_x = 0.5 * k * (k * x).cos();
    let h_x = eta_x - b_x;

    let inv_r: f64 = (1..=n).map(|i| 1.0 / (2.0 * i as f64 + 1.0)).sum();
    out[0] = h_t + 0.5 * h_x;
    out[1] = 0.5 * h_t + h_x * 0.25 * (1.0 + inv_r) + g * h * eta_x;
    let t3 = model.tensors();
    for i in 0..n {
        let mut s = 0.0;
        if !model.is_linearized() {
            for j in 0..n {
                for l in 0..n {
                    s += t3.a(i, j, l) + t3.b_flat()[(i * n + j) * n + l];
                }
            }
        }
        out[moment(i)] = 0.5 * h_t + h_x * 0.25 * (1.0 + s);
    }
    out[n + 2] = 0.0;
}
