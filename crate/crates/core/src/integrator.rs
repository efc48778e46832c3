//! Strang splitting for both models and the Duhamel residual.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::exec;
use crate::lattice::Field;
use crate::operators::{model_rhs, nonlinear_potential, FreePropagator, NonlinearContext};

/// Time-dependent factor multiplying the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Unit,
    /// t^ρ
    PowerLaw(f64),
}

impl Coefficient {
    pub fn at(&self, t: f64) -> Result<f64> {
        match *self {
            Coefficient::Unit => Ok(1.0),
            Coefficient::PowerLaw(rho) => {
                if t <= 0.0 && rho < 0.0 {
                    Err(Error::CoefficientSingularity { t, rho })
                } else {
                    Ok(t.powf(rho))
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionSpec {
    pub ctx: Arc<NonlinearContext>,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub coefficient: Coefficient,
    /// Extra capture times in (t0, t1); t0 and t1 are always captured.
    pub snapshot_times: Vec<f64>,
    /// Record step statistics every `stats_stride` steps (0 disables them).
    pub stats_stride: usize,
}

impl EvolutionSpec {
    pub fn new(ctx: Arc<NonlinearContext>, t0: f64, t1: f64, dt: f64) -> Self {
        Self {
            ctx,
            t0,
            t1,
            dt,
            coefficient: Coefficient::Unit,
            snapshot_times: Vec::new(),
            stats_stride: 1,
        }
    }

    pub fn with_coefficient(mut self, c: Coefficient) -> Self {
        self.coefficient = c;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    /// Evenly spaced captures every `interval` from t0.
    pub fn with_snapshot_interval(mut self, interval: f64) -> Self {
        let count = ((self.t1 - self.t0) / interval).round() as usize;
        self.snapshot_times = (1..count).map(|j| self.t0 + j as f64 * interval).collect();
        self
    }

    pub fn with_stats_stride(mut self, stride: usize) -> Self {
        self.stats_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.t0, self.t1, self.dt].iter().all(|v| v.is_finite());
        if !finite || !(self.t1 > self.t0) || self.t0 < 0.0 || !(self.dt > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "need 0 <= t0 < t1 and dt > 0 (t0 = {}, t1 = {}, dt = {})",
                self.t0, self.t1, self.dt
            )));
        }
        if let Coefficient::PowerLaw(rho) = self.coefficient {
            if rho < 0.0 && self.t0 <= 0.0 {
                return Err(Error::CoefficientSingularity { t: self.t0, rho });
            }
        }
        let mut prev = self.t0;
        for &t in &self.snapshot_times {
            if !(t > prev && t <= self.t1) {
                return Err(Error::InvalidSpec(format!(
                    "snapshot times must increase strictly inside ({}, {}]",
                    self.t0, self.t1
                )));
            }
            prev = t;
        }
        Ok(())
    }

    /// All capture times, t0 first and t1 last.
    pub fn capture_times(&self) -> Vec<f64> {
        let mut out = vec![self.t0];
        out.extend(self.snapshot_times.iter().copied().filter(|&t| t < self.t1));
        out.push(self.t1);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    pub energy: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: EvolutionSpec,
    pub snapshots: Vec<(f64, Field)>,
    pub stats: Vec<StepRecord>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|(t, _)| *t).collect()
    }

    /// Snapshot whose time matches `t` to relative precision 1e−9.
    pub fn snapshot_at(&self, t: f64) -> Option<&Field> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.snapshots
            .iter()
            .find(|(s, _)| (s - t).abs() <= tol)
            .map(|(_, f)| f)
    }

    pub fn initial(&self) -> &Field {
        &self.snapshots[0].1
    }

    pub fn final_state(&self) -> &Field {
        &self.snapshots.last().expect("trajectory has snapshots").1
    }

    /// Largest relative deviation of the recorded masses from the first one.
    pub fn mass_drift(&self) -> f64 {
        let masses: Vec<f64> = if self.stats.is_empty() {
            self.snapshots.iter().map(|(_, f)| f.norm_sq()).collect()
        } else {
            self.stats.iter().map(|r| r.mass).collect()
        };
        let m0 = masses[0];
        masses
            .iter()
            .map(|m| ((m - m0) / m0).abs())
            .fold(0.0, f64::max)
    }
}

/// One splitting step with its half-step propagator cached.
struct Stepper<'a> {
    ctx: &'a NonlinearContext,
    coefficient: Coefficient,
    half: FreePropagator,
    dt: f64,
}

impl<'a> Stepper<'a> {
    fn new(ctx: &'a NonlinearContext, coefficient: Coefficient, dt: f64) -> Self {
        Self {
            ctx,
            coefficient,
            half: FreePropagator::new(ctx.lattice(), 0.5 * dt),
            dt,
        }
    }

    fn step(&self, f: &mut Field, t: f64) -> Result<()> {
        self.half.apply_in_place(f.values_mut());
        let c = self.coefficient.at(t + 0.5 * self.dt)?;
        let w = nonlinear_potential(f, self.ctx)?;
        let scale = -self.dt * c;
        let w = w.values();
        exec::for_each_indexed(f.values_mut(), |i, z| {
            *z *= Complex64::from_polar(1.0, scale * w[i])
        });
        self.half.apply_in_place(f.values_mut());
        Ok(())
    }
}

/// Half free step, exact nonlinear phase with the coefficient at t+dt/2,
/// half free step.
pub fn strang_step(f: &Field, t: f64, dt: f64, spec: &EvolutionSpec) -> Result<Field> {
    if !(dt > 0.0) {
        return Err(Error::InvalidSpec(format!("dt = {dt} must be positive")));
    }
    if f.lattice() != spec.ctx.lattice() {
        return Err(Error::LatticeMismatch);
    }
    let mut out = f.clone();
    Stepper::new(&spec.ctx, spec.coefficient, dt).step(&mut out, t)?;
    Ok(out)
}

fn record(f: &Field, t: f64, dt: f64, ctx: &NonlinearContext) -> Result<StepRecord> {
    let parts = diagnostics::energy(f, ctx)?;
    Ok(StepRecord {
        t,
        dt,
        mass: f.norm_sq(),
        energy: parts.total,
        grad_norm: parts.kinetic.sqrt(),
    })
}

/// Fixed-step march from t0 to t1. Each interval between capture times is
/// split into the smallest number of equal steps not exceeding dt, so
/// captures land exactly on step boundaries.
pub fn evolve(spec: &EvolutionSpec, initial: &Field) -> Result<Trajectory> {
    spec.validate()?;
    if initial.lattice() != spec.ctx.lattice() {
        return Err(Error::LatticeMismatch);
    }
    if !initial.is_finite() {
        return Err(Error::NonFinite { t: spec.t0 });
    }
    let captures = spec.capture_times();
    let mut state = initial.clone();
    let mut snapshots = vec![(spec.t0, state.clone())];
    let mut stats = Vec::new();
    if spec.stats_stride > 0 {
        stats.push(record(&state, spec.t0, 0.0, &spec.ctx)?);
    }
    let mut stepper: Option<Stepper> = None;
    let mut step_count = 0usize;
    for pair in captures.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let steps = ((b - a) / spec.dt - 1e-9).ceil().max(1.0) as usize;
        let h = (b - a) / steps as f64;
        if stepper.as_ref().is_none_or(|s| s.dt != h) {
            stepper = Some(Stepper::new(&spec.ctx, spec.coefficient, h));
        }
        let st = stepper.as_ref().expect("stepper initialised");
        for j in 0..steps {
            let t = a + j as f64 * h;
            st.step(&mut state, t)?;
            step_count += 1;
            let t_next = if j + 1 == steps {
                b
            } else {
                a + (j + 1) as f64 * h
            };
            let mass = state.norm_sq();
            if !mass.is_finite() {
                return Err(Error::NonFinite { t: t_next });
            }
            if spec.stats_stride > 0 && step_count.is_multiple_of(spec.stats_stride) {
                stats.push(record(&state, t_next, h, &spec.ctx)?);
            }
        }
        if !state.is_finite() {
            return Err(Error::NonFinite { t: b });
        }
        snapshots.push((b, state.clone()));
    }
    Ok(Trajectory {
        spec: spec.clone(),
        snapshots,
        stats,
    })
}

/// max_m ‖u(t_m) − e^{i(t_m−t0)Δ}u(t0) + i∫_{t0}^{t_m} e^{i(t_m−s)Δ} c(s)Θ(u(s)) ds‖ / ‖u(t_m)‖
/// with trapezoidal quadrature over the snapshots.
pub fn duhamel_residual(tr: &Trajectory) -> Result<f64> {
    let n = tr.snapshots.len();
    if n < 3 {
        return Err(Error::InsufficientSnapshots {
            needed: 3,
            found: n,
        });
    }
    let ctx = &tr.spec.ctx;
    let t0 = tr.snapshots[0].0;
    let u0 = &tr.snapshots[0].1;
    // Work in the interaction picture: pull everything back by e^{−i(s−t0)Δ}.
    let pulled: Vec<Field> =
        exec::map_jobs(tr.snapshots.iter().collect(), |(s, u)| -> Result<Field> {
            let c = tr.spec.coefficient.at(*s)?;
            let g = model_rhs(u, ctx)?.scaled(Complex64::new(c, 0.0));
            FreePropagator::new(u.lattice(), -(s - t0)).apply(&g)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let mut integral = Field::zeros(u0.lattice());
    let mut worst: f64 = 0.0;
    for m in 1..n {
        let (sa, sb) = (tr.snapshots[m - 1].0, tr.snapshots[m].0);
        let w = 0.5 * (sb - sa);
        integral = integral
            .zip_map(&pulled[m - 1], |acc, g| acc + g * w)?
            .zip_map(&pulled[m], |acc, g| acc + g * w)?;
        let (t, u) = (&tr.snapshots[m].0, &tr.snapshots[m].1);
        let back = FreePropagator::new(u.lattice(), -(t - t0)).apply(u)?;
        let resid = back
            .zip_map(u0, |a, b| a - b)?
            .zip_map(&integral, |a, g| a + Complex64::i() * g)?;
        let norm = u.norm();
        if norm > 0.0 {
            worst = worst.max(resid.norm() / norm);
        }
    }
    Ok(worst)
}
