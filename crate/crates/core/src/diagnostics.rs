//! Conserved quantities, the virial identity, the Υ functional, light-cone
//! mass and log–log decay fits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::integrator::Trajectory;
use crate::lattice::{ball_mask, Field, RealField};
use crate::operators::{
    free_propagate, hartree_potential, modulus_pow, weighted_potential, NonlinearContext,
};
use crate::regime::{self, to_f64, Model, ModelParams, Rational};

pub fn mass(f: &Field) -> f64 {
    f.norm_sq()
}

/// ‖∇f‖² = L^{−N} Σ_k |k|²|F(k)|².
pub fn grad_norm_sq(f: &Field) -> f64 {
    let spec = f.forward();
    let k2 = f.lattice().k_sq();
    let s = spec.values();
    exec::sum(s.len(), |i| k2[i] * s[i].norm_sqr()) / f.lattice().volume()
}

/// ∫|x|²|f|².
pub fn variance(f: &Field) -> f64 {
    let r2 = f.lattice().radius_sq();
    let v = f.values();
    exec::sum(v.len(), |i| r2[i] * v[i].norm_sqr()) * f.lattice().cell_volume()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

/// Kinetic ‖∇f‖² plus 2/(1+q)·P (INLS) or P/q (INLH).
pub fn energy(f: &Field, ctx: &NonlinearContext) -> Result<EnergyParts> {
    let kinetic = grad_norm_sq(f);
    let q = ctx.solver().q;
    let p = weighted_potential(f, ctx)?;
    let potential = match ctx.model() {
        Model::Inls => 2.0 / (1.0 + q) * p,
        Model::Inlh => p / q,
    };
    Ok(EnergyParts {
        kinetic,
        potential,
        total: kinetic + potential,
    })
}

/// Right-hand side of the virial identity at state `f`: 8E(u₀) + c·P(f) for
/// INLS, 8‖∇f‖² + c·P(f) for INLH, with c from [`regime::virial_coefficient`].
pub fn virial_rhs(f: &Field, ctx: &NonlinearContext, e0: f64) -> Result<f64> {
    let c = to_f64(&regime::virial_coefficient(ctx.params()));
    let p = weighted_potential(f, ctx)?;
    Ok(match ctx.model() {
        Model::Inls => 8.0 * e0 + c * p,
        Model::Inlh => 8.0 * grad_norm_sq(f) + c * p,
    })
}

fn check_equispaced(times: &[f64]) -> Result<f64> {
    let step = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1e-300) {
            return Err(Error::InvalidSpec(
                "virial check needs equispaced snapshots".into(),
            ));
        }
    }
    Ok(step)
}

/// Per-snapshot virial data: (t, central second difference of the variance, rhs).
pub fn virial_series(tr: &Trajectory) -> Result<Vec<(f64, f64, f64)>> {
    let n = tr.snapshots.len();
    if n < 3 {
        return Err(Error::InsufficientSnapshots {
            needed: 3,
            found: n,
        });
    }
    let times = tr.times();
    let step = check_equispaced(&times)?;
    let ctx = &tr.spec.ctx;
    let e0 = energy(tr.initial(), ctx)?.total;
    let var: Vec<f64> = tr.snapshots.iter().map(|(_, f)| variance(f)).collect();
    let mut out = Vec::with_capacity(n - 2);
    for j in 1..n - 1 {
        let d2 = (var[j + 1] - 2.0 * var[j] + var[j - 1]) / (step * step);
        out.push((times[j], d2, virial_rhs(&tr.snapshots[j].1, ctx, e0)?));
    }
    Ok(out)
}

/// max_j |D²V(t_j) − RHS(t_j)| / max_j |RHS(t_j)|.
///
/// Normalising by the largest |RHS| over the run (rather than pointwise)
/// keeps the ratio meaningful where the right-hand side passes near zero.
pub fn virial_residual(tr: &Trajectory) -> Result<f64> {
    let series = virial_series(tr)?;
    let scale = series.iter().map(|s| s.2.abs()).fold(0.0, f64::max);
    let worst = series.iter().map(|s| (s.1 - s.2).abs()).fold(0.0, f64::max);
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Im ⟨u, v⟩.
pub fn upsilon(u: &Field, v: &Field) -> Result<f64> {
    Ok(u.inner(v)?.im)
}

/// (leading weighted term, cross term) of dΥ/dt.
///
/// INLS: (∫|x|^{−b}|v|^{1+q}, Re∫|x|^{−b}(|u|^{q−1}u − |v|^{q−1}v)v̄).
/// INLH: ((A), (B)+(C)) with (A) = ∫(J∗|·|^{−b}|v|^q)|x|^{−b}|v|^q.
pub fn upsilon_rate_terms(u: &Field, v: &Field, ctx: &NonlinearContext) -> Result<(f64, f64)> {
    u.same_lattice(v)?;
    if u.lattice() != ctx.lattice() {
        return Err(Error::LatticeMismatch);
    }
    let q = ctx.solver().q;
    let h = ctx.lattice().cell_volume();
    let w = ctx.weight_b().values();
    let (uu, vv) = (u.values(), v.values());
    match ctx.model() {
        Model::Inls => {
            let main = exec::sum(vv.len(), |i| w[i] * modulus_pow(vv[i].norm(), 1.0 + q)) * h;
            let cross = exec::sum(vv.len(), |i| {
                let du = uu[i] * modulus_pow(uu[i].norm(), q - 1.0);
                let dv = vv[i] * modulus_pow(vv[i].norm(), q - 1.0);
                w[i] * ((du - dv) * vv[i].conj()).re
            }) * h;
            Ok((main, cross))
        }
        Model::Inlh => {
            let phi_u = hartree_potential(u, ctx)?;
            let phi_v = hartree_potential(v, ctx)?;
            let (pu, pv) = (phi_u.values(), phi_v.values());
            let main = exec::sum(vv.len(), |i| pv[i] * w[i] * modulus_pow(vv[i].norm(), q)) * h;
            let cross = exec::sum(vv.len(), |i| {
                let vq = modulus_pow(vv[i].norm(), q);
                let b = (pu[i] - pv[i]) * w[i] * vq;
                let du = uu[i] * modulus_pow(uu[i].norm(), q - 2.0);
                let dv = vv[i] * modulus_pow(vv[i].norm(), q - 2.0);
                b + pu[i] * w[i] * ((du - dv) * vv[i].conj()).re
            }) * h;
            Ok((main, cross))
        }
    }
}

/// Mass inside the ball |x| ≤ R.
pub fn lightcone_mass(f: &Field, radius: f64) -> f64 {
    let mask: RealField = ball_mask(f.lattice(), radius);
    let (m, v) = (mask.values(), f.values());
    exec::sum(v.len(), |i| m[i] * v[i].norm_sqr()) * f.lattice().cell_volume()
}

/// Ordinary least squares of log(value) against log(t): (slope, r²).
pub fn decay_fit(series: &[(f64, f64)]) -> Result<(f64, f64)> {
    if series.len() < 4 {
        return Err(Error::InsufficientSnapshots {
            needed: 4,
            found: series.len(),
        });
    }
    for &(t, value) in series {
        if !(value > 0.0) || !(t > 0.0) {
            return Err(Error::NonPositiveSample { t, value });
        }
    }
    let n = series.len() as f64;
    let xs: Vec<f64> = series.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidSpec("decay fit needs distinct times".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy <= f64::EPSILON * f64::EPSILON * n {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok((slope, r2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCheck {
    pub fitted_slope: f64,
    pub r2: f64,
    /// Exact theoretical slope as a fraction string.
    pub theoretical: String,
    pub theoretical_value: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Fits the decay of the weighted potential of a free trajectory over
/// snapshots with t in [t_lo, t_hi], against −(N(q−1)+2b)/2 (INLS) or
/// −(N(q−1)−α)−2b (Hartree term).
pub fn weighted_potential_lower_bound_check(
    tr: &Trajectory,
    p: &ModelParams,
    window: (f64, f64),
) -> Result<DecayCheck> {
    let lat = tr.initial().lattice();
    let ctx = NonlinearContext::new(p, lat)?;
    let eps = 1e-9 * window.1.abs().max(1.0);
    let samples: Vec<(f64, f64)> = tr
        .snapshots
        .iter()
        .filter(|(t, _)| *t >= window.0 - eps && *t <= window.1 + eps)
        .map(|(t, f)| weighted_potential(f, &ctx).map(|w| (*t, w)))
        .collect::<Result<_>>()?;
    let (fitted_slope, r2) = decay_fit(&samples)?;
    let theo: Rational = regime::weighted_potential_slope(p);
    Ok(DecayCheck {
        fitted_slope,
        r2,
        theoretical: regime::fraction_string(&theo),
        theoretical_value: to_f64(&theo),
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub grad_norm_sq: f64,
    pub variance: f64,
    pub upsilon: Option<f64>,
    pub lightcone_mass: Option<f64>,
    pub weighted_potential: Option<f64>,
}

/// Which optional columns to evaluate.
#[derive(Debug, Clone, Default)]
pub struct SeriesOptions {
    /// Profile u₊: Υ is evaluated against e^{itΔ}u₊.
    pub upsilon_profile: Option<Field>,
    /// Light-cone speed α: mass in Ω_{αt}.
    pub lightcone_speed: Option<f64>,
    pub weighted_potential: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticSeries {
    pub records: Vec<DiagnosticRecord>,
}

impl DiagnosticSeries {
    pub fn from_trajectory(tr: &Trajectory, opts: &SeriesOptions) -> Result<Self> {
        let ctx = &tr.spec.ctx;
        let records = tr
            .snapshots
            .iter()
            .map(|(t, f)| -> Result<DiagnosticRecord> {
                let e = energy(f, ctx)?;
                let upsilon = match &opts.upsilon_profile {
                    Some(profile) => Some(upsilon(f, &free_propagate(profile, *t))?),
                    None => None,
                };
                Ok(DiagnosticRecord {
                    t: *t,
                    mass: mass(f),
                    energy: e.total,
                    grad_norm_sq: e.kinetic,
                    variance: variance(f),
                    upsilon,
                    lightcone_mass: opts.lightcone_speed.map(|a| lightcone_mass(f, a * t)),
                    weighted_potential: if opts.weighted_potential {
                        Some(weighted_potential(f, ctx)?)
                    } else {
                        None
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { records })
    }

    /// Largest relative mass deviation from the first record.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.records.first().map_or(0.0, |r| r.mass);
        self.records
            .iter()
            .map(|r| ((r.mass - m0) / m0).abs())
            .fold(0.0, f64::max)
    }
}
