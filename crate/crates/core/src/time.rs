//! Five-stage, fourth-order, low-storage (2N) Runge–Kutta stepping.

use serde::{Deserialize, Serialize};

use crate::dgsem::{Discretization, MeshState};
use crate::error::{Error, Result};
use crate::model::to_primitive_into;

/// Five-stage fourth-order 2N-storage coefficients.
pub const RK_A: [f64; 5] = [
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
];
pub const RK_B: [f64; 5] = [
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
];
pub const RK_C: [f64; 5] = [
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeControls {
    pub cfl: f64,
    pub t_end: f64,
    /// Overrides the CFL step when set.
    pub dt_fixed: Option<f64>,
    /// Output times; `t_end` is always reported as well.
    pub snapshot_times: Vec<f64>,
}

impl Default for TimeControls {
    fn default() -> Self {
        TimeControls { cfl: 0.9, t_end: 1.0, dt_fixed: None, snapshot_times: Vec::new() }
    }
}

impl TimeControls {
    pub fn new(t_end: f64) -> Self {
        TimeControls { t_end, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0) || !self.cfl.is_finite() {
            return Err(Error::arg(format!("cfl must be positive, got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::arg(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if let Some(dt) = self.dt_fixed {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::arg(format!("fixed dt must be positive, got {dt}")));
            }
        }
        Ok(())
    }

    /// `count` equispaced output times in (0, t_end], ending at t_end.
    pub fn equispaced(mut self, count: usize) -> Self {
        self.snapshot_times = (1..=count).map(|i| self.t_end * i as f64 / count as f64).collect();
        self
    }
}

/// Largest wave-speed bound over all nodes.
pub fn max_wave_speed(disc: &Discretization, state: &MeshState) -> Result<f64> {
    let nv = state.n_vars();
    let mut prim = vec![0.0; nv];
    let mut lam: f64 = 0.0;
    for (k, i, _, u) in state.iter_nodes() {
        disc.model().check_state(u).map_err(|e| e.at(k, i).at_time(state.t, None))?;
        to_primitive_into(u, &mut prim);
        lam = lam.max(disc.model().max_abs_eigenvalue_prim(&prim));
    }
    Ok(lam)
}

/// dt = cfl·Δx / ((2P+1)·λ_max).
pub fn cfl_dt(disc: &Discretization, state: &MeshState, cfl: f64) -> Result<f64> {
    let lam = max_wave_speed(disc, state)?;
    if !(lam > 0.0) {
        return Err(Error::Invariant("zero wave speed; CFL step undefined".into()));
    }
    let p = disc.ops().degree() as f64;
    Ok(cfl * state.dx() / ((2.0 * p + 1.0) * lam))
}

/// Reusable 2N-storage integrator for a flat state vector.
#[derive(Debug, Clone, Default)]
pub struct LowStorageRk {
    du: Vec<f64>,
    k: Vec<f64>,
}

impl LowStorageRk {
    pub fn new() -> Self {
        Self::default()
    }

    /// Advance `u` from `t` by `dt` for u' = f(t, u).
    pub fn step<F>(&mut self, u: &mut [f64], t: f64, dt: f64, mut f: F) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        self.du.clear();
        self.du.resize(u.len(), 0.0);
        self.k.resize(u.len(), 0.0);
        for s in 0..5 {
            f(t + RK_C[s] * dt, u, &mut self.k).map_err(|e| e.at_time(t + RK_C[s] * dt, Some(s)))?;
            for ((d, k), v) in self.du.iter_mut().zip(&self.k).zip(u.iter_mut()) {
                *d = RK_A[s] * *d + dt * k;
                *v += RK_B[s] * *d;
            }
        }
        Ok(())
    }

    /// Advance a mesh state by `dt` with the discretization's right-hand side.
    pub fn step_mesh(&mut self, disc: &Discretization, state: &mut MeshState, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::arg(format!("time step must be positive, got {dt}")));
        }
        let t0 = state.t;
        let n = state.u.len();
        self.du.clear();
        self.du.resize(n, 0.0);
        self.k.resize(n, 0.0);
        for s in 0..5 {
            state.t = t0 + RK_C[s] * dt;
            if let Err(e) = disc.rhs(state, &mut self.k) {
                state.t = t0;
                return Err(e.at_time(t0 + RK_C[s] * dt, Some(s)));
            }
            for ((d, k), v) in self.du.iter_mut().zip(&self.k).zip(state.u.iter_mut()) {
                *d = RK_A[s] * *d + dt * k;
                *v += RK_B[s] * *d;
            }
        }
        state.t = t0 + dt;
        Ok(())
    }
}

/// Single step with a fresh integrator.
pub fn rk_step(disc: &Discretization, state: &mut MeshState, dt: f64) -> Result<()> {
    LowStorageRk::new().step_mesh(disc, state, dt)
}

/// What the run loop reports to an observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    /// Before the first step.
    Start,
    /// After every step.
    Step { dt: f64 },
    /// After a step that landed on an output time (index into the sorted list).
    Snapshot { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub t_final: f64,
}

/// Integrate `state` up to `controls.t_end`, landing exactly on each output
/// time. The observer sees the state after every event.
pub fn integrate<O>(
    disc: &Discretization,
    state: &mut MeshState,
    controls: &TimeControls,
    mut observer: O,
) -> Result<RunStats>
where
    O: FnMut(&MeshState, Event) -> Result<()>,
{
    controls.validate()?;
    let mut targets: Vec<f64> = controls
        .snapshot_times
        .iter()
        .copied()
        .filter(|&s| s > state.t && s <= controls.t_end)
        .collect();
    targets.push(controls.t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let mut rk = LowStorageRk::new();
    let mut steps = 0;
    observer(state, Event::Start)?;
    for (index, &target) in targets.iter().enumerate() {
        while state.t < target {
            let mut dt = match controls.dt_fixed {
                Some(dt) => dt,
                None => cfl_dt(disc, state, controls.cfl)?,
            };
            let landing = target - (state.t + dt) <= 1e-9 * dt;
            if landing {
                dt = target - state.t;
            }
            rk.step_mesh(disc, state, dt)?;
            if landing {
                state.t = target;
            }
            steps += 1;
            observer(state, Event::Step { dt })?;
        }
        observer(state, Event::Snapshot { index })?;
    }
    Ok(RunStats { steps, t_final: state.t })
}
