//! The outer fixed-point iteration.
//!
//! Starting from the null hypothesis `z₀ = 1 - χ_Q` (every pixel outside the
//! inducers belongs to the shape), each step solves the linearized elliptic
//! problem around the current iterate. The energy is non-increasing along the
//! iterates and every iterate stays in `[0, 1]`; both facts are recorded per
//! step so callers can check them.

use serde::{Deserialize, Serialize};

use crate::canyon::ConfigurationMask;
use crate::elliptic::{apply_operator, cg_solve, linearize, CgParams};
use crate::energy::{total_energy, ModelParams, PhaseField};
use crate::error::{Error, Result};
use crate::grid::{rms_diff, GridField};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub model: ModelParams,
    pub cg: CgParams,
    /// Outer tolerance on the RMS update.
    pub delta: f64,
    pub max_outer: usize,
    pub presmooth_steps: usize,
    /// Emit a snapshot every this many steps; 0 disables snapshots.
    pub snapshot_every: usize,
}

impl SolverConfig {
    pub fn new(model: ModelParams) -> Self {
        Self {
            model,
            cg: CgParams::default(),
            delta: 1e-6,
            max_outer: 5000,
            presmooth_steps: 0,
            snapshot_every: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cg.validate()?;
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidParameter("max_outer must be positive".into()));
        }
        Ok(())
    }

    /// Largest post-solve excursion outside `[0, 1]` that is attributed to
    /// inner-solver round-off.
    pub fn clamp_allowance(&self) -> f64 {
        10.0 * self.cg.rel_tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub cg_iters: usize,
    pub cg_residual: f64,
    /// Extremes of the inner solution before clamping.
    pub pre_clamp_min: f64,
    pub pre_clamp_max: f64,
}

impl StepStats {
    /// Distance of the unclamped solution from `[0, 1]`.
    pub fn clamp_excursion(&self) -> f64 {
        (-self.pre_clamp_min).max(self.pre_clamp_max - 1.0).max(0.0)
    }
}

/// One row of the iteration log: the step from `z_n` to `z_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub iter: usize,
    /// `E[z_n]`
    pub energy: f64,
    /// `E[z_n] - E[z_{n+1}]`
    pub rho: f64,
    /// RMS of `z_{n+1} - z_n`.
    pub rms_update: f64,
    pub cg_iters: usize,
    pub cg_residual: f64,
    pub pre_clamp_min: f64,
    pub pre_clamp_max: f64,
    /// Guaranteed lower bound on `rho`, see [`decrease_lower_bound`].
    pub rho_lower_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxOuterReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub steps: Vec<StepRecord>,
    pub status: RunStatus,
    /// `E` of the returned field.
    pub final_energy: f64,
    pub final_rms_update: f64,
    /// RMS over interior cells of the nonlinear Euler-Lagrange residual at the
    /// returned field.
    pub euler_lagrange_residual: f64,
}

impl IterationReport {
    pub fn outer_iterations(&self) -> usize {
        self.steps.len()
    }

    /// Partial sums of `√ρ_n`. Bounded partial sums indicate the improvements
    /// decay fast enough for the iterates themselves to settle.
    pub fn sqrt_rho_partial_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.steps
            .iter()
            .map(|s| {
                acc += s.rho.max(0.0).sqrt();
                acc
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub field: PhaseField,
    pub report: IterationReport,
}

/// `z₀ = 1 - χ_Q`, with the boundary ring forced to zero.
pub fn null_hypothesis(mask: &ConfigurationMask) -> PhaseField {
    PhaseField::from_fn(*mask.geometry(), |i, j| {
        if mask.contains(i, j) {
            0.0
        } else {
            1.0
        }
    })
}

/// Explicit heat steps of size `h²/4` with zero boundary values.
pub fn presmooth(z0: &PhaseField, steps: usize) -> PhaseField {
    let geo = *z0.geometry();
    let (w, ht) = (geo.width(), geo.height());
    let mut u = z0.values().to_vec();
    let mut next = u.clone();
    for _ in 0..steps {
        for j in 1..ht - 1 {
            for i in 1..w - 1 {
                let c = j * w + i;
                next[c] = 0.25 * (u[c - 1] + u[c + 1] + u[c - w] + u[c + w]);
            }
        }
        std::mem::swap(&mut u, &mut next);
    }
    PhaseField::with_zero_boundary(GridField::new(geo, u).expect("heat steps keep values finite"))
}

/// One linearize-and-solve step, warm-started from `z_n`.
pub fn step(z_n: &PhaseField, cfg: &SolverConfig) -> Result<(PhaseField, StepStats)> {
    let data = linearize(z_n, &cfg.model)?;
    let solution = cg_solve(&data, &cfg.model, &cfg.cg, z_n.field())?;
    let raw = solution.field;
    let stats = StepStats {
        cg_iters: solution.iterations,
        cg_residual: solution.relative_residual,
        pre_clamp_min: raw.min(),
        pre_clamp_max: raw.max(),
    };
    let excursion = stats.clamp_excursion();
    if excursion > cfg.clamp_allowance() {
        return Err(Error::ClampExceeded {
            step: 0,
            excursion,
            allowed: cfg.clamp_allowance(),
        });
    }
    let clamped = raw.map(|v| v.clamp(0.0, 1.0));
    Ok((PhaseField::with_zero_boundary(clamped), stats))
}

/// `∑ (G / 2ε) (z_{n+1} - z_n)² (2z_n + 4m(1 - m)) h²` with `m` the midpoint
/// of the two iterates. The energy drop of a step from a `[0, 1]` field is at
/// least this much.
pub fn decrease_lower_bound(z_n: &PhaseField, z_next: &PhaseField, p: &ModelParams) -> Result<f64> {
    p.check(z_n.field(), "decrease_lower_bound: z_n")?;
    p.check(z_next.field(), "decrease_lower_bound: z_next")?;
    let h = p.geometry().h();
    let g = p.canyon.values();
    let mut sum = 0.0;
    for ((&a, &b), &gi) in z_n.values().iter().zip(z_next.values()).zip(g) {
        let d = b - a;
        let m = 0.5 * (a + b);
        sum += gi * d * d * (2.0 * a + 4.0 * m * (1.0 - m));
    }
    Ok(sum * h * h / (2.0 * p.epsilon))
}

/// RMS over interior cells of `-∇·(ε²G∇z) + (G(1 + 2z²) + λχ_Q) z - 3Gz²`.
pub fn euler_lagrange_residual(z: &PhaseField, p: &ModelParams) -> Result<f64> {
    let data = linearize(z, p)?;
    let az = apply_operator(z.field(), &data, p)?;
    let geo = *p.geometry();
    let mut sum = 0.0;
    for idx in 0..geo.len() {
        let (i, j) = geo.coords(idx);
        if !geo.is_boundary(i, j) {
            let r = az.values()[idx] - data.f_n.values()[idx];
            sum += r * r;
        }
    }
    Ok((sum / geo.interior_count() as f64).sqrt())
}

pub type SnapshotSink<'a> = &'a mut dyn FnMut(usize, &PhaseField);

/// Runs the iteration from the (optionally presmoothed) null hypothesis.
pub fn run(cfg: &SolverConfig, sink: Option<SnapshotSink<'_>>) -> Result<RunOutcome> {
    let z0 = presmooth(&null_hypothesis(&cfg.model.mask), cfg.presmooth_steps);
    run_from(z0, cfg, sink)
}

/// Runs the iteration from an arbitrary zero-boundary starting field.
pub fn run_from(
    initial: PhaseField,
    cfg: &SolverConfig,
    mut sink: Option<SnapshotSink<'_>>,
) -> Result<RunOutcome> {
    cfg.validate()?;
    let p = &cfg.model;
    let mut z = initial;
    let mut energy = total_energy(&z, p)?;
    let mut steps = Vec::new();
    let mut status = RunStatus::MaxOuterReached;
    let mut last_rms = f64::NAN;

    if let Some(sink) = sink.as_mut() {
        if cfg.snapshot_every > 0 {
            sink(0, &z);
        }
    }

    for n in 0..cfg.max_outer {
        let (next, stats) = step(&z, cfg).map_err(|e| match e {
            Error::ClampExceeded {
                excursion, allowed, ..
            } => Error::ClampExceeded {
                step: n,
                excursion,
                allowed,
            },
            other => other,
        })?;
        let next_energy = total_energy(&next, p)?;
        let rms = rms_diff(next.field(), z.field())?;
        steps.push(StepRecord {
            iter: n,
            energy,
            rho: energy - next_energy,
            rms_update: rms,
            cg_iters: stats.cg_iters,
            cg_residual: stats.cg_residual,
            pre_clamp_min: stats.pre_clamp_min,
            pre_clamp_max: stats.pre_clamp_max,
            rho_lower_bound: decrease_lower_bound(&z, &next, p)?,
        });
        z = next;
        energy = next_energy;
        last_rms = rms;

        if let Some(sink) = sink.as_mut() {
            if cfg.snapshot_every > 0 && (n + 1) % cfg.snapshot_every == 0 {
                sink(n + 1, &z);
            }
        }
        if rms <= cfg.delta {
            status = RunStatus::Converged;
            break;
        }
    }

    let euler_lagrange_residual = euler_lagrange_residual(&z, p)?;
    Ok(RunOutcome {
        field: z,
        report: IterationReport {
            steps,
            status,
            final_energy: energy,
            final_rms_update: last_rms,
            euler_lagrange_residual,
        },
    })
}
