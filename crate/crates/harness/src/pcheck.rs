//! Dual-run check of the pseudoconformal equivalence for 1D INLS.
//!
//! For each τ the direct run evolves Gaussian data from t = 1 to 1/τ on a
//! box of extent L_v/τ and maps the result with the transform into the
//! v-frame (extent L_v). The native run integrates the transformed equation
//! with coefficient t^ρ from τ₀ to 1 starting at the transformed state of
//! the longest direct run. The two must agree at every τ, and the monotone
//! quantity must not decrease along the native run.

use std::sync::Arc;
use std::time::Instant;

use dlab_core::conformal::{
    check_integrability, extrapolate_to_zero, monotone_quantity, pc_exponent, pc_transform, PCFrame,
};
use dlab_core::integrator::{evolve, Coefficient, EvolutionSpec};
use dlab_core::lattice::{make_lattice, Field};
use dlab_core::operators::{free_propagate, NonlinearContext};
use dlab_core::regime::{fraction_string, int, ratio, ModelParams, Rational};
use serde::Serialize;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone)]
pub struct PcheckConfig {
    pub b: Rational,
    pub q: Rational,
    pub points: usize,
    pub extent_v: f64,
    pub sigma: f64,
    pub amplitude: f64,
    /// Matched times, increasing; the first is τ₀ and the last must be 1.
    pub taus: Vec<f64>,
    pub dt_u: f64,
    pub dt_v: f64,
    /// Spacing of the monotone-quantity samples along the native run.
    pub monotone_spacing: f64,
}

impl Default for PcheckConfig {
    fn default() -> Self {
        Self {
            b: ratio(1, 4),
            q: int(3),
            points: 32768,
            extent_v: 40.0,
            sigma: 1.0,
            amplitude: 0.3,
            taus: vec![0.05, 0.1, 0.2, 0.5, 1.0],
            dt_u: 2e-3,
            dt_v: 2e-4,
            monotone_spacing: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchedTime {
    pub tau: f64,
    /// ‖v(τ) − T u(1/τ)‖ / ‖T u(1/τ)‖.
    pub residual: f64,
    /// Relative distance of the transformed nonlinear state from the
    /// transformed linear evolution: the size of the effect being checked.
    pub nonlinear_effect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PcheckReport {
    pub params: String,
    pub rho: String,
    pub points: usize,
    pub amplitude: f64,
    pub matched: Vec<MatchedTime>,
    pub max_residual: f64,
    /// ‖v(τ_{j+1}) − v(τ_j)‖ over consecutive matched times.
    pub increments: Vec<f64>,
    /// (t, monotone quantity) along the native run.
    pub monotone: Vec<(f64, f64)>,
    /// Largest relative decrease between consecutive monotone samples (≤ 0 when nondecreasing).
    pub monotone_worst_drop: f64,
    /// Richardson estimate uncertainty of v(0) from v(2τ₀) and v(τ₀); present
    /// when the second matched time is 2τ₀.
    pub v0_uncertainty: Option<f64>,
    pub seconds: f64,
}

pub fn pcheck(cfg: &PcheckConfig) -> Result<PcheckReport> {
    let start = Instant::now();
    let p = ModelParams::inls(1, cfg.b.clone(), cfg.q.clone());
    check_integrability(&p)?;
    let taus = &cfg.taus;
    if taus.len() < 2
        || taus.windows(2).any(|w| w[1] <= w[0])
        || *taus.last().unwrap_or(&0.0) != 1.0
        || taus[0] <= 0.0
    {
        return Err(HarnessError::Invalid(
            "taus must increase strictly from a positive value up to 1".into(),
        ));
    }
    let lat_v = make_lattice(1, cfg.extent_v, cfg.points, true)?;

    let mut references = Vec::with_capacity(taus.len());
    let mut linear = Vec::with_capacity(taus.len());
    for &tau in taus {
        let lat_u = make_lattice(1, cfg.extent_v / tau, cfg.points, true)?;
        let u1 = Field::gaussian(&lat_u, cfg.sigma, cfg.amplitude, 0.0);
        let frame = PCFrame::new(tau, &lat_u)?;
        let horizon = 1.0 / tau;
        let u_end = if horizon > 1.0 {
            let ctx = Arc::new(NonlinearContext::new(&p, &lat_u)?);
            let spec = EvolutionSpec::new(ctx, 1.0, horizon, cfg.dt_u).with_stats_stride(0);
            evolve(&spec, &u1)?.final_state().clone()
        } else {
            u1.clone()
        };
        let lin = free_propagate(&u1, horizon - 1.0);
        references.push(pc_transform(&u_end, &frame)?.relabel(lat_v.clone())?);
        linear.push(pc_transform(&lin, &frame)?.relabel(lat_v.clone())?);
    }

    let rho = pc_exponent(&p);
    let ctx = Arc::new(NonlinearContext::new(&p, &lat_v)?);
    let tau0 = taus[0];
    let mut captures: Vec<f64> = taus[1..taus.len() - 1].to_vec();
    let steps = ((1.0 - tau0) / cfg.monotone_spacing).round() as usize;
    captures.extend((1..steps).map(|j| tau0 + j as f64 * cfg.monotone_spacing));
    captures.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    captures.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let spec = EvolutionSpec::new(ctx.clone(), tau0, 1.0, cfg.dt_v)
        .with_coefficient(Coefficient::PowerLaw(rho))
        .with_snapshots(captures)
        .with_stats_stride(0);
    let v = evolve(&spec, &references[0])?;

    let mut matched = Vec::with_capacity(taus.len());
    let mut states = Vec::with_capacity(taus.len());
    for (j, &tau) in taus.iter().enumerate() {
        let vt = v
            .snapshot_at(tau)
            .ok_or(dlab_core::Error::MissingSnapshot(tau))?;
        matched.push(MatchedTime {
            tau,
            residual: vt.relative_distance(&references[j])?,
            nonlinear_effect: linear[j].relative_distance(&references[j])?,
        });
        states.push(vt.clone());
    }
    let increments = states
        .windows(2)
        .map(|w| w[1].distance(&w[0]))
        .collect::<Result<Vec<_>, _>>()?;
    let monotone = v
        .snapshots
        .iter()
        .map(|(t, f)| monotone_quantity(f, *t, &ctx).map(|g| (*t, g)))
        .collect::<Result<Vec<_>, _>>()?;
    let monotone_worst_drop = monotone
        .windows(2)
        .map(|w| (w[0].1 - w[1].1) / w[0].1.abs().max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max);
    let v0_uncertainty = if (taus[1] - 2.0 * tau0).abs() < 1e-12 {
        Some(extrapolate_to_zero(&states[1], &states[0])?.1)
    } else {
        None
    };
    Ok(PcheckReport {
        params: p.to_string(),
        rho: fraction_string(&dlab_core::regime::pseudoconformal_exponent(&p)),
        points: cfg.points,
        amplitude: cfg.amplitude,
        max_residual: matched.iter().map(|m| m.residual).fold(0.0, f64::max),
        matched,
        increments,
        monotone,
        monotone_worst_drop,
        v0_uncertainty,
        seconds: start.elapsed().as_secs_f64(),
    })
}
