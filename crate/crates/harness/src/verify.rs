//! Verification suites. Each `*_study` function runs a fixed fixture and
//! returns raw measurements; [`run_suite`] applies the pass thresholds.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use dlab_core::conformal::{cauchy_increments, free_trajectory};
use dlab_core::diagnostics::{
    lightcone_mass, upsilon, upsilon_rate_terms, virial_residual,
    weighted_potential_lower_bound_check, DecayCheck,
};
use dlab_core::integrator::{evolve, EvolutionSpec, Trajectory};
use dlab_core::lattice::{make_lattice, riesz_multiplier, Field, RealField};
use dlab_core::operators::{free_propagate, riesz_apply, riesz_convolve_oracle, NonlinearContext};
use dlab_core::regime::{int, mass_critical_q, ratio, virial_numerator, ModelParams, Rational};
use dlab_core::Complex64;
use serde::Serialize;
use statrs::function::erf::erf;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Mass,
    EnergyOrder,
    Virial,
    Lightcone,
    Upsilon,
    Decay,
    Riesz,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Mass,
        Suite::EnergyOrder,
        Suite::Virial,
        Suite::Lightcone,
        Suite::Upsilon,
        Suite::Decay,
        Suite::Riesz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Mass => "mass",
            Suite::EnergyOrder => "energy-order",
            Suite::Virial => "virial",
            Suite::Lightcone => "lightcone",
            Suite::Upsilon => "upsilon",
            Suite::Decay => "decay",
            Suite::Riesz => "riesz",
        }
    }
}

impl FromStr for Suite {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
                HarnessError::Invalid(format!(
                    "unknown suite {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    pub details: Vec<String>,
    pub seconds: f64,
}

#[allow(clippy::too_many_arguments)]
fn gaussian_run(
    p: &ModelParams,
    extent: f64,
    n: usize,
    sigma: f64,
    amp: f64,
    t1: f64,
    dt: f64,
    snapshot_interval: Option<f64>,
    stats_stride: usize,
) -> Result<Trajectory> {
    let lat = make_lattice(p.dim as usize, extent, n, true)?;
    let ctx = Arc::new(NonlinearContext::new(p, &lat)?);
    let mut spec = EvolutionSpec::new(ctx, 0.0, t1, dt).with_stats_stride(stats_stride);
    if let Some(s) = snapshot_interval {
        spec = spec.with_snapshot_interval(s);
    }
    Ok(evolve(&spec, &Field::gaussian(&lat, sigma, amp, 0.0))?)
}

/// Energy and mass drift of one fixture at several step sizes.
#[derive(Debug, Clone, Serialize)]
pub struct ConservationMeasure {
    pub label: String,
    pub dts: Vec<f64>,
    pub steps: Vec<usize>,
    /// max_t |E(t) − E(0)| / |E(0)| per step size.
    pub energy_drift: Vec<f64>,
    pub mass_drift: Vec<f64>,
}

impl ConservationMeasure {
    /// Consecutive drift ratios under dt halving.
    pub fn ratios(&self) -> Vec<f64> {
        self.energy_drift.windows(2).map(|w| w[0] / w[1]).collect()
    }
}

pub const CONSERVATION_DTS: [f64; 3] = [2e-3, 1e-3, 5e-4];

/// 1D INLS (b=1/4, q=3) and 2D INLH (α=1, b=1/4, q=2) over t ∈ [0, 1/2].
pub fn conservation_study(dts: &[f64]) -> Result<Vec<ConservationMeasure>> {
    let fixtures = [
        (
            "INLS N=1 b=1/4 q=3",
            ModelParams::inls(1, ratio(1, 4), int(3)),
            40.0,
            512,
            1.0,
            1.0,
        ),
        (
            "INLH N=2 alpha=1 b=1/4 q=2",
            ModelParams::inlh(2, int(1), ratio(1, 4), int(2)),
            16.0,
            128,
            0.5,
            2.0,
        ),
    ];
    let t1 = 0.5;
    fixtures
        .into_iter()
        .map(|(label, p, extent, n, sigma, amp)| {
            let mut m = ConservationMeasure {
                label: label.into(),
                dts: dts.to_vec(),
                steps: Vec::new(),
                energy_drift: Vec::new(),
                mass_drift: Vec::new(),
            };
            for &dt in dts {
                let tr = gaussian_run(&p, extent, n, sigma, amp, t1, dt, None, 1)?;
                let e0 = tr.stats[0].energy;
                let drift = tr
                    .stats
                    .iter()
                    .map(|r| ((r.energy - e0) / e0).abs())
                    .fold(0.0, f64::max);
                m.steps.push(tr.stats.len() - 1);
                m.energy_drift.push(drift);
                m.mass_drift.push(tr.mass_drift());
            }
            Ok(m)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct VirialMeasure {
    /// 1D INLS residual at spacing 1e−2.
    pub inls_1d: f64,
    /// 2D INLS residual at spacing 1e−2 and 5e−3 (same run, subsampled).
    pub inls_2d_coarse: f64,
    pub inls_2d_fine: f64,
    /// 2D INLH residual at spacing 1e−2.
    pub inlh_2d: f64,
    /// Every mass-critical INLS tuple tried has coefficient numerator 0.
    pub critical_numerator_zero: bool,
}

impl VirialMeasure {
    pub fn order_ratio(&self) -> f64 {
        self.inls_2d_coarse / self.inls_2d_fine
    }
}

fn subsample(tr: &Trajectory, every: usize) -> Trajectory {
    Trajectory {
        spec: tr.spec.clone(),
        snapshots: tr.snapshots.iter().step_by(every).cloned().collect(),
        stats: Vec::new(),
    }
}

pub fn virial_study() -> Result<VirialMeasure> {
    let one = gaussian_run(
        &ModelParams::inls(1, ratio(1, 4), int(3)),
        40.0,
        2048,
        0.5,
        3.0,
        0.5,
        1e-4,
        Some(1e-2),
        0,
    )?;
    let two = gaussian_run(
        &ModelParams::inls(2, ratio(1, 4), int(2)),
        12.0,
        512,
        0.3,
        8.0,
        0.12,
        1e-4,
        Some(5e-3),
        0,
    )?;
    let hartree = gaussian_run(
        &ModelParams::inlh(2, int(1), ratio(1, 4), int(2)),
        24.0,
        384,
        0.5,
        2.0,
        0.2,
        2e-4,
        Some(1e-2),
        0,
    )?;
    let mut critical_numerator_zero = true;
    for dim in 1..=3u32 {
        for (bn, bd) in [(1, 4), (1, 2), (1, 3), (3, 4)] {
            let mut p = ModelParams::inls(dim, ratio(bn, bd), int(2));
            p.q = mass_critical_q(&p);
            critical_numerator_zero &= virial_numerator(&p) == int(0);
        }
    }
    Ok(VirialMeasure {
        inls_1d: virial_residual(&one)?,
        inls_2d_coarse: virial_residual(&subsample(&two, 2))?,
        inls_2d_fine: virial_residual(&two)?,
        inlh_2d: virial_residual(&hartree)?,
        critical_numerator_zero,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LightconeMeasure {
    /// Speed α with erf(α/2) = 0.99: Ω_{α/2} holds 99% of the spectral mass.
    pub alpha: f64,
    /// Spectral mass fraction of the lattice profile inside |k| ≤ α/2.
    pub spectral_fraction: f64,
    /// (t, measured ratio, closed form erf(αt/√(1+4t²))).
    pub samples: Vec<(f64, f64, f64)>,
}

/// Root of erf(x) = target on [0, 10] by bisection.
pub fn erf_inverse(target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 10.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if erf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// u₊ = e^{−x²/2} in 1D; ratio ‖e^{itΔ}u₊‖²_{Ω_{αt}} / ‖u₊‖².
pub fn lightcone_study() -> Result<LightconeMeasure> {
    let lat = make_lattice(1, 800.0, 2048, true)?;
    let profile = Field::gaussian(&lat, 1.0, 1.0, 0.0);
    let alpha = 2.0 * erf_inverse(0.99);
    let spectrum = profile.forward();
    let k = lat.wavenumbers(0);
    let total: f64 = spectrum.values().iter().map(|z| z.norm_sqr()).sum();
    let inside: f64 = spectrum
        .values()
        .iter()
        .zip(&k)
        .filter(|(_, k)| k.abs() <= 0.5 * alpha)
        .map(|(z, _)| z.norm_sqr())
        .sum();
    let mass = profile.norm_sq();
    let samples = [20.0, 25.0, 30.0, 35.0, 40.0]
        .into_iter()
        .map(|t: f64| {
            let u = free_propagate(&profile, t);
            let expect = erf(alpha * t / (1.0 + 4.0 * t * t).sqrt());
            (t, lightcone_mass(&u, alpha * t) / mass, expect)
        })
        .collect();
    Ok(LightconeMeasure {
        alpha,
        spectral_fraction: inside / total,
        samples,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UpsilonMeasure {
    /// max over snapshot pairs of (|Υ(u_i, v_j)| − ‖u_i‖‖v_j‖)/(‖u_i‖‖v_j‖); ≤ 0 when the bound holds.
    pub cauchy_schwarz_excess: f64,
    /// Per model: max |central difference of Υ − (main + cross)| / max |main + cross|.
    pub rate_mismatch: Vec<(String, f64)>,
}

pub fn upsilon_study() -> Result<UpsilonMeasure> {
    let lat = make_lattice(1, 40.0, 512, true)?;
    let mut excess = f64::NEG_INFINITY;
    let mut rate_mismatch = Vec::new();
    for p in [
        ModelParams::inls(1, ratio(1, 4), int(3)),
        ModelParams::inlh(1, ratio(1, 2), ratio(1, 8), int(2)),
    ] {
        let ctx = Arc::new(NonlinearContext::new(&p, &lat)?);
        let u0 = Field::gaussian(&lat, 1.0, 1.5, 0.0);
        let profile = Field::gaussian(&lat, 1.2, 1.0, 0.1);
        let delta = 1e-2;
        let spec = EvolutionSpec::new(ctx.clone(), 0.0, 0.3, 2.5e-4)
            .with_snapshot_interval(delta)
            .with_stats_stride(0);
        let tr = evolve(&spec, &u0)?;
        let frees: Vec<Field> = tr
            .snapshots
            .iter()
            .map(|(t, _)| free_propagate(&profile, *t))
            .collect();
        for (_, u) in &tr.snapshots {
            for v in &frees {
                let bound = u.norm() * v.norm();
                excess = excess.max((upsilon(u, v)?.abs() - bound) / bound);
            }
        }
        let ups: Vec<f64> = tr
            .snapshots
            .iter()
            .zip(&frees)
            .map(|((_, u), v)| upsilon(u, v))
            .collect::<Result<_, _>>()?;
        let (mut worst, mut scale) = (0.0_f64, 0.0_f64);
        for j in 1..ups.len() - 1 {
            let fd = (ups[j + 1] - ups[j - 1]) / (2.0 * delta);
            let (main, cross) = upsilon_rate_terms(&tr.snapshots[j].1, &frees[j], &ctx)?;
            worst = worst.max((fd - (main + cross)).abs());
            scale = scale.max((main + cross).abs());
        }
        rate_mismatch.push((p.model.to_string(), worst / scale));
    }
    Ok(UpsilonMeasure {
        cauchy_schwarz_excess: excess,
        rate_mismatch,
    })
}

/// Weighted potential of a free Gaussian (N=1, b=1/4, q=3/2) over t ∈ [8, 64].
pub fn decay_study() -> Result<DecayCheck> {
    let p = ModelParams::inls(1, ratio(1, 4), ratio(3, 2));
    let lat = make_lattice(1, 1600.0, 4096, true)?;
    let ctx = Arc::new(NonlinearContext::new(&p, &lat)?);
    let profile = Field::gaussian(&lat, 1.0, 1.0, 0.0);
    let times: Vec<f64> = (0..=12).map(|j| 8.0 * 2f64.powf(j as f64 / 4.0)).collect();
    let tr = free_trajectory(&profile, ctx, &times)?;
    Ok(weighted_potential_lower_bound_check(&tr, &p, (8.0, 64.0))?)
}

#[derive(Debug, Clone, Serialize)]
pub struct RieszMeasure {
    /// 2D, n=32, α=1: max |spectral − direct sum| / max |direct sum|.
    pub oracle_2d: f64,
    /// 3D, n=64, α=2: relative L² error against the periodic Coulomb reference on |x| ≤ L/4.
    pub coulomb_3d: f64,
    /// Same, against the bare free-space potential (no periodic corrections).
    pub coulomb_3d_free_space: f64,
}

pub fn riesz_study() -> Result<RieszMeasure> {
    let lat = make_lattice(2, 8.0, 32, true)?;
    let rho = RealField::new(
        lat.clone(),
        Field::from_fn(&lat, |x| {
            let a = (x[0] - 0.7).powi(2) + (x[1] + 0.3).powi(2);
            let b = (x[0] + 1.1).powi(2) + 2.0 * (x[1] - 0.9).powi(2);
            Complex64::new((-a).exp() + 0.5 * (-b / 0.5).exp(), 0.0)
        })
        .values()
        .iter()
        .map(|z| z.re)
        .collect(),
    )?;
    let spectral = riesz_apply(&rho, &riesz_multiplier(&lat, 1.0)?)?;
    let oracle = riesz_convolve_oracle(&rho.to_field(), 1.0)?;
    let scale = oracle.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let err = spectral
        .values()
        .iter()
        .zip(oracle.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let (extent, n, sigma) = (16.0, 64, 0.6);
    let lat3 = make_lattice(3, extent, n, true)?;
    let norm = (2.0 * PI * sigma * sigma).powf(-1.5);
    let dens = Field::gaussian(&lat3, sigma, norm, 0.0);
    let mass = dens.values().iter().map(|z| z.re).sum::<f64>() * lat3.cell_volume();
    let rho3 = RealField::new(lat3.clone(), dens.values().iter().map(|z| z.re).collect())?;
    let phi = riesz_apply(&rho3, &riesz_multiplier(&lat3, 2.0)?)?;
    // Madelung-type constant of the simple cubic lattice for the neutralised
    // periodic Coulomb potential.
    let xi = 2.837297;
    let (mut num, mut num_free, mut den) = (0.0, 0.0, 0.0);
    for (r2, z) in lat3.radius_sq().into_iter().zip(phi.values()) {
        let r = r2.sqrt();
        if r > 0.25 * extent {
            continue;
        }
        let free = mass * erf(r / (sigma * 2f64.sqrt())) / (4.0 * PI * r);
        let periodic = free + mass * r2 / (6.0 * extent.powi(3)) - xi * mass / (4.0 * PI * extent);
        num += (z.re - periodic).powi(2);
        num_free += (z.re - free).powi(2);
        den += periodic * periodic;
    }
    Ok(RieszMeasure {
        oracle_2d: err / scale,
        coulomb_3d: (num / den).sqrt(),
        coulomb_3d_free_space: (num_free / den).sqrt(),
    })
}

pub const DICHOTOMY_TIMES: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// Dyadic Cauchy increments d_j = ‖ψ(2^{j+1}) − ψ(2^j)‖ for the 1D INLS
/// fixture (b=1/4, Gaussian σ=1, amplitude 1, L=1600, n=8192, dt=5e−3).
pub fn dichotomy_study(q: Rational) -> Result<Vec<f64>> {
    let p = ModelParams::inls(1, ratio(1, 4), q);
    let lat = make_lattice(1, 1600.0, 8192, true)?;
    let ctx = Arc::new(NonlinearContext::new(&p, &lat)?);
    let spec = EvolutionSpec::new(ctx, 0.0, 64.0, 5e-3)
        .with_snapshots(DICHOTOMY_TIMES[..6].to_vec())
        .with_stats_stride(0);
    let tr = evolve(&spec, &Field::gaussian(&lat, 1.0, 1.0, 0.0))?;
    Ok(cauchy_increments(&tr, &DICHOTOMY_TIMES)?)
}

/// Runs one suite and applies its thresholds.
pub fn run_suite(suite: Suite) -> Result<CheckReport> {
    let start = Instant::now();
    let mut metrics = BTreeMap::new();
    let mut details = Vec::new();
    let passed = match suite {
        Suite::Mass => {
            let study = conservation_study(&CONSERVATION_DTS[2..])?;
            let mut ok = true;
            for m in &study {
                metrics.insert(format!("{} mass_drift", m.label), m.mass_drift[0]);
                details.push(format!(
                    "{}: {} steps, mass drift {:.3e} (bound 1e-10)",
                    m.label, m.steps[0], m.mass_drift[0]
                ));
                ok &= m.mass_drift[0] <= 1e-10 && m.steps[0] >= 1000;
            }
            ok
        }
        Suite::EnergyOrder => {
            let study = conservation_study(&CONSERVATION_DTS)?;
            let mut ok = true;
            for m in &study {
                for (j, r) in m.ratios().iter().enumerate() {
                    metrics.insert(format!("{} ratio_{j}", m.label), *r);
                    ok &= (3.2..=4.8).contains(r);
                }
                details.push(format!(
                    "{}: energy drifts {:?}, ratios {:?} (band [3.2, 4.8])",
                    m.label,
                    m.energy_drift
                        .iter()
                        .map(|d| format!("{d:.3e}"))
                        .collect::<Vec<_>>(),
                    m.ratios()
                        .iter()
                        .map(|r| format!("{r:.3}"))
                        .collect::<Vec<_>>()
                ));
            }
            ok
        }
        Suite::Virial => {
            let v = virial_study()?;
            metrics.insert("inls_1d".into(), v.inls_1d);
            metrics.insert("inls_2d_spacing_1e-2".into(), v.inls_2d_coarse);
            metrics.insert("inls_2d_spacing_5e-3".into(), v.inls_2d_fine);
            metrics.insert("order_ratio".into(), v.order_ratio());
            metrics.insert("inlh_2d".into(), v.inlh_2d);
            details.push(format!(
                "mass-critical numerator exactly zero: {}",
                v.critical_numerator_zero
            ));
            v.inls_1d <= 1e-2
                && v.inls_2d_coarse <= 1e-2
                && v.inlh_2d <= 1e-2
                && (3.2..=4.8).contains(&v.order_ratio())
                && v.critical_numerator_zero
        }
        Suite::Lightcone => {
            let m = lightcone_study()?;
            metrics.insert("alpha".into(), m.alpha);
            metrics.insert("spectral_fraction".into(), m.spectral_fraction);
            let mut ok = true;
            for (t, r, e) in &m.samples {
                metrics.insert(format!("ratio_t{t}"), *r);
                details.push(format!("t = {t}: ratio {r:.6} (closed form {e:.6})"));
                ok &= (0.95..=1.0).contains(r);
            }
            ok
        }
        Suite::Upsilon => {
            let m = upsilon_study()?;
            metrics.insert("cauchy_schwarz_excess".into(), m.cauchy_schwarz_excess);
            let mut ok = m.cauchy_schwarz_excess <= 1e-12;
            for (model, r) in &m.rate_mismatch {
                metrics.insert(format!("rate_mismatch_{}", model.to_lowercase()), *r);
                ok &= *r <= 1e-3;
            }
            ok
        }
        Suite::Decay => {
            let d = decay_study()?;
            metrics.insert("fitted_slope".into(), d.fitted_slope);
            metrics.insert("theoretical_slope".into(), d.theoretical_value);
            metrics.insert("r2".into(), d.r2);
            details.push(format!("theoretical slope {}", d.theoretical));
            (d.fitted_slope - d.theoretical_value).abs() <= 0.1
        }
        Suite::Riesz => {
            let m = riesz_study()?;
            metrics.insert("oracle_2d".into(), m.oracle_2d);
            metrics.insert("coulomb_3d".into(), m.coulomb_3d);
            metrics.insert("coulomb_3d_free_space".into(), m.coulomb_3d_free_space);
            details.push(format!(
                "periodic reference adds M r^2/(6L^3) and the cubic-lattice constant; free-space error {:.3e}",
                m.coulomb_3d_free_space
            ));
            m.oracle_2d <= 1e-10 && m.coulomb_3d <= 1e-2
        }
    };
    Ok(CheckReport {
        suite: suite.name().into(),
        passed,
        metrics,
        details,
        seconds: start.elapsed().as_secs_f64(),
    })
}
