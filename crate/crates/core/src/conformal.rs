//! Pseudoconformal transform, the transformed-equation residual, the
//! monotone quantity, scaling covariance and scattering-state estimates.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::diagnostics::grad_norm_sq;
use crate::error::{Error, Result};
use crate::exec;
use crate::integrator::{evolve, EvolutionSpec, Trajectory};
use crate::lattice::SpectralMultiplier;
use crate::lattice::{Field, Lattice};
use crate::operators::{
    free_propagate, model_rhs, weighted_potential, FreePropagator, NonlinearContext,
};
use crate::regime::{self, int, to_f64, Model, ModelParams, Rational};

/// Frame of the map u(1/t, ·) ↦ v(t, ·). The target lattice has extent
/// t·(source extent) and the same point counts, so x/t maps target cell
/// centres onto source cell centres exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PCFrame {
    t: f64,
    source: Lattice,
    target: Lattice,
}

impl PCFrame {
    pub fn new(t: f64, source: &Lattice) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "frame time {t} must be positive"
            )));
        }
        Ok(Self {
            t,
            source: source.clone(),
            target: source.scaled(t)?,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn source(&self) -> &Lattice {
        &self.source
    }

    pub fn target(&self) -> &Lattice {
        &self.target
    }

    /// (it)^{−N/2} e^{i|x|²/(4t)} on the target lattice.
    fn factor(&self) -> Vec<Complex64> {
        let n = self.target.dim() as f64;
        let pre = Complex64::from_polar(self.t.powf(-0.5 * n), -0.25 * PI * n);
        let inv4t = 0.25 / self.t;
        self.target
            .radius_sq()
            .into_iter()
            .map(|r2| pre * Complex64::from_polar(1.0, r2 * inv4t))
            .collect()
    }
}

/// v(x) = (it)^{−N/2} e^{i|x|²/(4t)} conj(u(x/t)).
pub fn pc_transform(u_at_inv_t: &Field, frame: &PCFrame) -> Result<Field> {
    if u_at_inv_t.lattice() != &frame.source {
        return Err(Error::FrameMismatch);
    }
    let factor = frame.factor();
    let u = u_at_inv_t.values();
    Field::new(
        frame.target.clone(),
        exec::collect(u.len(), |i| factor[i] * u[i].conj()),
    )
}

/// Inverse of [`pc_transform`]: recovers u(1/t) on the source lattice.
pub fn pc_inverse(v: &Field, frame: &PCFrame) -> Result<Field> {
    if v.lattice() != &frame.target {
        return Err(Error::FrameMismatch);
    }
    let factor = frame.factor();
    let vv = v.values();
    Field::new(
        frame.source.clone(),
        exec::collect(vv.len(), |i| (vv[i] / factor[i]).conj()),
    )
}

/// Exponent ρ of t^ρ in the transformed equation, as f64.
pub fn pc_exponent(p: &ModelParams) -> f64 {
    to_f64(&regime::pseudoconformal_exponent(p))
}

/// Asserts the integrability condition ρ > −1 needed before integrating the
/// transformed equation down towards t = 0.
pub fn check_integrability(p: &ModelParams) -> Result<()> {
    let rho = regime::pseudoconformal_exponent(p);
    if rho > -int(1) {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "transformed coefficient exponent {} must exceed -1",
            regime::fraction_string(&rho)
        )))
    }
}

fn laplacian(f: &Field) -> Field {
    let k2 = f.lattice().k_sq();
    let m = SpectralMultiplier::from_real(f.lattice(), k2.into_iter().map(|k| -k).collect());
    m.apply(f).expect("multiplier built on the field's lattice")
}

/// max over interior snapshots of ‖i∂_t v + Δv − t^ρ Θ(v)‖/‖v‖ with a central
/// time difference; ρ from `p`, Θ from the trajectory's context.
pub fn pc_equation_residual(v_traj: &Trajectory, p: &ModelParams) -> Result<f64> {
    let snaps = &v_traj.snapshots;
    if snaps.len() < 3 {
        return Err(Error::InsufficientSnapshots {
            needed: 3,
            found: snaps.len(),
        });
    }
    let rho = pc_exponent(p);
    let ctx = &v_traj.spec.ctx;
    let mut worst: f64 = 0.0;
    for j in 1..snaps.len() - 1 {
        let (ta, va) = (&snaps[j - 1].0, &snaps[j - 1].1);
        let (t, v) = (&snaps[j].0, &snaps[j].1);
        let (tb, vb) = (&snaps[j + 1].0, &snaps[j + 1].1);
        let inv = 1.0 / (tb - ta);
        let c = t.powf(rho);
        let lap = laplacian(v);
        let theta = model_rhs(v, ctx)?;
        let dt_v = vb.zip_map(va, |b, a| (b - a) * inv)?;
        let resid = dt_v
            .zip_map(&lap, |d, l| Complex64::i() * d + l)?
            .zip_map(&theta, |r, th| r - th * c)?;
        let norm = v.norm();
        if norm > 0.0 {
            worst = worst.max(resid.norm() / norm);
        }
    }
    Ok(worst)
}

/// t^{−ρ}‖∇v‖² + (2/(1+q))∫|x|^{−b}|v|^{1+q} (INLS) or
/// t^{−ρ}‖∇v‖² + (1/q)∫(J_α∗|·|^{−b}|v|^q)|x|^{−b}|v|^q (INLH).
pub fn monotone_quantity(v: &Field, t: f64, ctx: &NonlinearContext) -> Result<f64> {
    let p = ctx.params();
    let rho = pc_exponent(p);
    let q = ctx.solver().q;
    let pot = weighted_potential(v, ctx)?;
    let factor = match ctx.model() {
        Model::Inls => 2.0 / (1.0 + q),
        Model::Inlh => 1.0 / q,
    };
    Ok(t.powf(-rho) * grad_norm_sq(v) + factor * pot)
}

/// sup over snapshots with t ≤ 1 of t^{−ρ}‖∇v(t)‖².
pub fn apriori_sup(v_traj: &Trajectory) -> f64 {
    let rho = pc_exponent(v_traj.spec.ctx.params());
    v_traj
        .snapshots
        .iter()
        .filter(|(t, _)| *t <= 1.0 + 1e-12)
        .map(|(t, v)| t.powf(-rho) * grad_norm_sq(v))
        .fold(0.0, f64::max)
}

/// ψ(t) = e^{−itΔ}u(t).
pub fn back_propagated_profile(u: &Field, t: f64) -> Field {
    free_propagate(u, -t)
}

/// d_j = ‖ψ(t_{j+1}) − ψ(t_j)‖ over consecutive requested times.
pub fn cauchy_increments(tr: &Trajectory, times: &[f64]) -> Result<Vec<f64>> {
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec(
            "increment times must increase strictly".into(),
        ));
    }
    let profiles: Vec<Field> = times
        .iter()
        .map(|&t| {
            tr.snapshot_at(t)
                .map(|u| back_propagated_profile(u, t))
                .ok_or(Error::MissingSnapshot(t))
        })
        .collect::<Result<_>>()?;
    profiles.windows(2).map(|w| w[1].distance(&w[0])).collect()
}

/// Numerical scattering state ψ(t_final) with the last increment over the
/// final two snapshots as its error proxy.
#[derive(Debug, Clone)]
pub struct ScatteringEstimate {
    pub state: Field,
    pub error_proxy: f64,
}

pub fn scattering_state(tr: &Trajectory) -> Result<ScatteringEstimate> {
    let n = tr.snapshots.len();
    let (t_last, u_last) = &tr.snapshots[n - 1];
    let state = back_propagated_profile(u_last, *t_last);
    let error_proxy = if n >= 2 {
        let (t_prev, u_prev) = &tr.snapshots[n - 2];
        state.distance(&back_propagated_profile(u_prev, *t_prev))?
    } else {
        0.0
    };
    Ok(ScatteringEstimate { state, error_proxy })
}

/// Linear Richardson extrapolation of v(0) from v(τ₀) and v(τ₀/2), both on
/// one lattice: estimate 2v(τ₀/2) − v(τ₀), uncertainty ‖estimate − v(τ₀/2)‖.
pub fn extrapolate_to_zero(v_tau0: &Field, v_half: &Field) -> Result<(Field, f64)> {
    let est = v_half.zip_map(v_tau0, |b, a| 2.0 * b - a)?;
    let unc = est.distance(v_half)?;
    Ok((est, unc))
}

/// Scaling exponent μ in u_κ(t, x) = κ^μ u(κ²t, κx).
pub fn scaling_exponent(p: &ModelParams) -> Rational {
    let qm1 = &p.q - int(1);
    match p.model {
        Model::Inls => (int(2) - &p.b) / qm1,
        Model::Inlh => (int(2) - int(2) * &p.b + &p.alpha) / (int(2) * qm1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingReport {
    pub kappa: f64,
    pub exponent: f64,
    pub relative_error: f64,
}

/// Evolves `initial` on its lattice to t1 and the κ-rescaled datum
/// κ^μ u₀(κ·) on the lattice of extent L/κ to t1/κ² (step dt/κ²), then
/// compares after rescaling back.
pub fn scaling_residual(
    p: &ModelParams,
    initial: &Field,
    kappa: f64,
    t1: f64,
    dt: f64,
) -> Result<ScalingReport> {
    let lat = initial.lattice();
    let mu = to_f64(&scaling_exponent(p));
    let ctx = Arc::new(NonlinearContext::new(p, lat)?);
    let base = evolve(
        &EvolutionSpec::new(ctx, 0.0, t1, dt).with_stats_stride(0),
        initial,
    )?;
    let small = lat.scaled(1.0 / kappa)?;
    let ctx_k = Arc::new(NonlinearContext::new(p, &small)?);
    let amp = kappa.powf(mu);
    let scaled_init = initial.scaled(Complex64::new(amp, 0.0)).relabel(small)?;
    let k2 = kappa * kappa;
    let scaled = evolve(
        &EvolutionSpec::new(ctx_k, 0.0, t1 / k2, dt / k2).with_stats_stride(0),
        &scaled_init,
    )?;
    let back = scaled
        .final_state()
        .scaled(Complex64::new(1.0 / amp, 0.0))
        .relabel(lat.clone())?;
    Ok(ScalingReport {
        kappa,
        exponent: mu,
        relative_error: back.relative_distance(base.final_state())?,
    })
}

/// Free Schrödinger flow as a trajectory (linear context), handy for
/// diagnostics that need e^{itΔ}u₊ at many times.
pub fn free_trajectory(
    u_plus: &Field,
    ctx: Arc<NonlinearContext>,
    times: &[f64],
) -> Result<Trajectory> {
    let mut snapshots = Vec::with_capacity(times.len());
    for &t in times {
        snapshots.push((t, FreePropagator::new(u_plus.lattice(), t).apply(u_plus)?));
    }
    if snapshots.is_empty() {
        return Err(Error::InsufficientSnapshots {
            needed: 1,
            found: 0,
        });
    }
    let t0 = times[0];
    let t1 = *times.last().expect("non-empty");
    let spec = EvolutionSpec {
        ctx,
        t0,
        t1: if t1 > t0 { t1 } else { t0 + 1.0 },
        dt: 1.0,
        coefficient: crate::integrator::Coefficient::Unit,
        snapshot_times: times[1..].to_vec(),
        stats_stride: 0,
    };
    Ok(Trajectory {
        spec,
        snapshots,
        stats: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_lattice;
    use crate::regime::ratio;

    #[test]
    fn frame_checks() {
        let lat = make_lattice(1, 10.0, 32, true).unwrap();
        assert!(PCFrame::new(0.0, &lat).is_err());
        let frame = PCFrame::new(0.5, &lat).unwrap();
        assert_eq!(frame.target().extent(0), 5.0);
        let wrong = Field::zeros(&make_lattice(1, 11.0, 32, true).unwrap());
        assert!(matches!(
            pc_transform(&wrong, &frame),
            Err(Error::FrameMismatch)
        ));
    }

    #[test]
    fn integrability_condition() {
        assert!(check_integrability(&ModelParams::inls(1, ratio(1, 4), int(3))).is_ok());
        // ρ = (1/2)(1/2) + 1/4 − 2 = −3/2
        assert!(check_integrability(&ModelParams::inls(1, ratio(1, 4), ratio(3, 2))).is_err());
    }
}
