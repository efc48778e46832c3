//! Free propagator, the two nonlinearities, and the Riesz/estimate checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::exec;
use crate::lattice::{
    riesz_multiplier, weight_field, Field, Lattice, RealField, SpectralMultiplier,
};
use crate::regime::{to_f64, Model, ModelParams};

/// Floating-point copy of the parameters for the solver side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub model: Model,
    pub dim: usize,
    pub b: f64,
    pub q: f64,
    pub alpha: f64,
}

impl From<&ModelParams> for SolverParams {
    fn from(p: &ModelParams) -> Self {
        Self {
            model: p.model,
            dim: p.dim as usize,
            b: to_f64(&p.b),
            q: to_f64(&p.q),
            alpha: to_f64(&p.alpha),
        }
    }
}

/// Precomputed tables for one parameter set on one lattice.
#[derive(Debug, Clone)]
pub struct NonlinearContext {
    params: ModelParams,
    solver: SolverParams,
    lattice: Lattice,
    weight_b: RealField,
    weight_b_frac: RealField,
    riesz: Option<SpectralMultiplier>,
}

impl NonlinearContext {
    pub fn new(params: &ModelParams, lattice: &Lattice) -> Result<Self> {
        let solver = SolverParams::from(params);
        if solver.dim != lattice.dim() {
            return Err(Error::BadGeometry(format!(
                "parameters are {}-dimensional, lattice is {}-dimensional",
                solver.dim,
                lattice.dim()
            )));
        }
        let weight_b = weight_field(lattice, solver.b)?;
        let weight_b_frac = weight_field(lattice, solver.b / (1.0 + solver.q))?;
        let riesz = match solver.model {
            Model::Inls => None,
            Model::Inlh => Some(riesz_multiplier(lattice, solver.alpha)?),
        };
        Ok(Self {
            params: params.clone(),
            solver,
            lattice: lattice.clone(),
            weight_b,
            weight_b_frac,
            riesz,
        })
    }

    /// Same context with the weights replaced by 0: the flow becomes linear.
    pub fn linear(params: &ModelParams, lattice: &Lattice) -> Result<Self> {
        let mut ctx = Self::new(params, lattice)?;
        let zeros = RealField::new(lattice.clone(), vec![0.0; lattice.len()])?;
        ctx.weight_b = zeros.clone();
        ctx.weight_b_frac = zeros;
        Ok(ctx)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn solver(&self) -> SolverParams {
        self.solver
    }

    pub fn model(&self) -> Model {
        self.solver.model
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn weight_b(&self) -> &RealField {
        &self.weight_b
    }

    pub fn weight_b_frac(&self) -> &RealField {
        &self.weight_b_frac
    }

    pub fn riesz(&self) -> Option<&SpectralMultiplier> {
        self.riesz.as_ref()
    }

    fn expect(&self, model: Model) -> Result<()> {
        if self.solver.model == model {
            Ok(())
        } else {
            Err(Error::ModelMismatch {
                expected: model,
                found: self.solver.model,
            })
        }
    }

    fn check_field(&self, f: &Field) -> Result<()> {
        if f.lattice() == &self.lattice {
            Ok(())
        } else {
            Err(Error::LatticeMismatch)
        }
    }
}

/// |z|^e with the whole-term convention |0|^e := 0 (and |z|⁰ := 1).
#[inline]
pub(crate) fn modulus_pow(abs: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if abs == 0.0 {
        0.0
    } else {
        abs.powf(e)
    }
}

/// e^{−it|k|²} as a reusable multiplier.
#[derive(Debug, Clone)]
pub struct FreePropagator {
    multiplier: SpectralMultiplier,
    time: f64,
}

impl FreePropagator {
    pub fn new(lattice: &Lattice, t: f64) -> Self {
        let k2 = lattice.k_sq();
        let values = k2
            .into_iter()
            .map(|k| Complex64::from_polar(1.0, -t * k))
            .collect();
        Self {
            multiplier: SpectralMultiplier::new(lattice.clone(), values)
                .expect("table matches lattice"),
            time: t,
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn apply_in_place(&self, data: &mut [Complex64]) {
        if self.time != 0.0 {
            self.multiplier.apply_in_place(data);
        }
    }

    pub fn apply(&self, f: &Field) -> Result<Field> {
        let mut out = f.clone();
        if f.lattice() != self.multiplier.lattice() {
            return Err(Error::LatticeMismatch);
        }
        self.apply_in_place(out.values_mut());
        Ok(out)
    }
}

/// F^{−1}(e^{−it|k|²} F f): the free Schrödinger flow e^{itΔ} at time t.
pub fn free_propagate(f: &Field, t: f64) -> Field {
    FreePropagator::new(f.lattice(), t)
        .apply(f)
        .expect("propagator built on the field's lattice")
}

/// J_α∗ρ through the multiplier, complex output.
pub fn riesz_apply(density: &RealField, multiplier: &SpectralMultiplier) -> Result<Field> {
    if density.lattice() != multiplier.lattice() {
        return Err(Error::LatticeMismatch);
    }
    let mut data: Vec<Complex64> = density
        .values()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    multiplier.apply_in_place(&mut data);
    Field::new(density.lattice().clone(), data)
}

/// |x|^{−b}|f|^q.
fn hartree_density(f: &Field, ctx: &NonlinearContext) -> RealField {
    let q = ctx.solver.q;
    let (v, w) = (f.values(), ctx.weight_b.values());
    RealField {
        lattice: ctx.lattice.clone(),
        values: exec::collect(v.len(), |i| w[i] * modulus_pow(v[i].norm(), q)),
    }
}

/// φ = J_α∗(|x|^{−b}|f|^q), real part of the spectral evaluation.
pub fn hartree_potential(f: &Field, ctx: &NonlinearContext) -> Result<RealField> {
    ctx.expect(Model::Inlh)?;
    ctx.check_field(f)?;
    let full = riesz_apply(
        &hartree_density(f, ctx),
        ctx.riesz.as_ref().expect("INLH context has a multiplier"),
    )?;
    Ok(RealField {
        lattice: ctx.lattice.clone(),
        values: full.values().iter().map(|z| z.re).collect(),
    })
}

/// Real potential W with rhs = W·f: |x|^{−b}|f|^{q−1} (INLS) or
/// φ|x|^{−b}|f|^{q−2} (INLH).
pub fn nonlinear_potential(f: &Field, ctx: &NonlinearContext) -> Result<RealField> {
    ctx.check_field(f)?;
    let q = ctx.solver.q;
    let (v, w) = (f.values(), ctx.weight_b.values());
    let values = match ctx.solver.model {
        Model::Inls => exec::collect(v.len(), |i| w[i] * modulus_pow(v[i].norm(), q - 1.0)),
        Model::Inlh => {
            let phi = hartree_potential(f, ctx)?;
            let phi = phi.values();
            exec::collect(v.len(), |i| {
                phi[i] * w[i] * modulus_pow(v[i].norm(), q - 2.0)
            })
        }
    };
    Ok(RealField {
        lattice: ctx.lattice.clone(),
        values,
    })
}

/// |x|^{−b}|f|^{q−1}f.
pub fn inls_rhs(f: &Field, ctx: &NonlinearContext) -> Result<Field> {
    ctx.expect(Model::Inls)?;
    f.weighted(&nonlinear_potential(f, ctx)?)
}

/// (J_α∗|·|^{−b}|f|^q)|x|^{−b}|f|^{q−2}f.
pub fn inlh_rhs(f: &Field, ctx: &NonlinearContext) -> Result<Field> {
    ctx.expect(Model::Inlh)?;
    f.weighted(&nonlinear_potential(f, ctx)?)
}

/// Nonlinear term of whichever model the context carries.
pub fn model_rhs(f: &Field, ctx: &NonlinearContext) -> Result<Field> {
    f.weighted(&nonlinear_potential(f, ctx)?)
}

/// Weighted potential P: ∫|f|^{1+q}|x|^{−b} (INLS, as ‖|x|^{−b/(1+q)}f‖_{1+q}^{1+q})
/// or ∫(J_α∗|·|^{−b}|f|^q)|x|^{−b}|f|^q (INLH).
pub fn weighted_potential(f: &Field, ctx: &NonlinearContext) -> Result<f64> {
    ctx.check_field(f)?;
    let q = ctx.solver.q;
    let h = ctx.lattice.cell_volume();
    let v = f.values();
    Ok(match ctx.solver.model {
        Model::Inls => {
            let w = ctx.weight_b_frac.values();
            exec::sum(v.len(), |i| (w[i] * v[i].norm()).powf(1.0 + q)) * h
        }
        Model::Inlh => {
            let rho = hartree_density(f, ctx);
            let phi = riesz_apply(
                &rho,
                ctx.riesz.as_ref().expect("INLH context has a multiplier"),
            )?;
            let (rho, phi) = (rho.values(), phi.values());
            exec::sum(v.len(), |i| phi[i].re * rho[i]) * h
        }
    })
}

/// C_{N,α} = Γ((N−α)/2) / (Γ(α/2) π^{N/2} 2^α).
pub fn riesz_constant(dim: usize, alpha: f64) -> f64 {
    let n = dim as f64;
    gamma((n - alpha) / 2.0) / (gamma(alpha / 2.0) * PI.powf(n / 2.0) * 2f64.powf(alpha))
}

/// Cost guard for the dense oracles.
pub const ORACLE_LIMIT: usize = 1 << 16;

fn check_oracle_size(lat: &Lattice) -> Result<()> {
    if lat.len() > ORACLE_LIMIT {
        Err(Error::TooLarge {
            points: lat.len(),
            limit: ORACLE_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// Flat index of the periodic difference of two multi-indices.
fn periodic_difference(lat: &Lattice, a: &[usize; 3], b: &[usize; 3]) -> usize {
    let mut idx = 0;
    for axis in 0..lat.dim() {
        let n = lat.points(axis);
        idx = idx * n + (a[axis] + n - b[axis]) % n;
    }
    idx
}

/// Direct-summation Riesz potential with the lattice-periodic kernel
/// K(Δ) = L^{−N} Σ_{k≠0} |k|^{−α} e^{ik·Δ}, tabulated by an explicit
/// frequency sum (no FFT), followed by a dense h^N Σ_y K(x−y) f(y).
/// The excluded k = 0 term is the zero-mode rule: the mean of f drops out.
pub fn riesz_convolve_oracle(f: &Field, alpha: f64) -> Result<Field> {
    let lat = f.lattice().clone();
    check_oracle_size(&lat)?;
    let dim = lat.dim();
    if !(alpha > 0.0 && alpha < dim as f64) {
        return Err(Error::BadOrder { alpha, dim });
    }
    let len = lat.len();
    let ks: Vec<Vec<f64>> = (0..dim).map(|a| lat.wavenumbers(a)).collect();
    let modes: Vec<([f64; 3], f64)> = (0..len)
        .filter_map(|m| {
            let idx = lat.unravel(m);
            let mut k = [0.0; 3];
            for a in 0..dim {
                k[a] = ks[a][idx[a]];
            }
            let k2: f64 = k.iter().map(|v| v * v).sum();
            (k2 > 0.0).then(|| (k, k2.powf(-0.5 * alpha)))
        })
        .collect();
    let volume = lat.volume();
    // Kernel at separation Δ = (index difference)·h.
    let kernel: Vec<f64> = exec::collect(len, |d| {
        let idx = lat.unravel(d);
        let mut delta = [0.0; 3];
        for a in 0..dim {
            delta[a] = idx[a] as f64 * lat.spacing(a);
        }
        let mut acc = 0.0;
        for (k, m) in &modes {
            let phase = k[0] * delta[0] + k[1] * delta[1] + k[2] * delta[2];
            acc += m * phase.cos();
        }
        acc / volume
    });
    let h = lat.cell_volume();
    let v = f.values();
    let out = exec::collect(len, |x| {
        let xi = lat.unravel(x);
        let mut acc = Complex64::default();
        for (y, fy) in v.iter().enumerate() {
            let yi = lat.unravel(y);
            acc += kernel[periodic_difference(&lat, &xi, &yi)] * fy;
        }
        acc * h
    });
    Field::new(lat, out)
}

/// Continuum-kernel quadrature h^N Σ_y C_{N,α}|x−y|^{α−N}(f(y) − mean f)
/// with minimum-image separations inside the primary cell; the singular
/// self-cell is integrated over the ball of volume h^N. Differs from the
/// spectral operator by periodic-image and discretisation effects, which
/// the tests quantify.
pub fn riesz_quadrature(f: &Field, alpha: f64) -> Result<Field> {
    let lat = f.lattice().clone();
    check_oracle_size(&lat)?;
    let dim = lat.dim();
    if !(alpha > 0.0 && alpha < dim as f64) {
        return Err(Error::BadOrder { alpha, dim });
    }
    let n = dim as f64;
    let c = riesz_constant(dim, alpha);
    let h = lat.cell_volume();
    // Ball of volume h^N: radius ρ, ∫_{|z|<ρ} |z|^{α−N} dz = S_N ρ^α / α.
    let unit_ball = PI.powf(n / 2.0) / gamma(n / 2.0 + 1.0);
    let rho = (h / unit_ball).powf(1.0 / n);
    let sphere = n * unit_ball;
    let self_term = c * sphere * rho.powf(alpha) / alpha;
    let mean = {
        let s: Complex64 = f.values().iter().sum();
        s / lat.len() as f64
    };
    let v = f.values();
    let out = exec::collect(lat.len(), |x| {
        let xi = lat.unravel(x);
        let mut acc = Complex64::default();
        for (y, fy) in v.iter().enumerate() {
            let g = fy - mean;
            if y == x {
                acc += g * self_term;
                continue;
            }
            let yi = lat.unravel(y);
            let mut r2 = 0.0;
            for a in 0..dim {
                let np = lat.points(a) as i64;
                let mut d = xi[a] as i64 - yi[a] as i64;
                if d > np / 2 {
                    d -= np;
                } else if d < -np / 2 {
                    d += np;
                }
                let dx = d as f64 * lat.spacing(a);
                r2 += dx * dx;
            }
            acc += g * (c * r2.powf(0.5 * (alpha - n)) * h);
        }
        acc
    });
    Field::new(lat, out)
}

/// ‖e^{itΔ}f‖_r · t^{N(1/2−1/r)} / ‖f‖_{r'}.
pub fn dispersive_ratio(f: &Field, t: f64, r: f64) -> f64 {
    let n = f.lattice().dim() as f64;
    let inv_r = if r.is_infinite() { 0.0 } else { 1.0 / r };
    let r_dual = if r.is_infinite() { 1.0 } else { r / (r - 1.0) };
    let evolved = free_propagate(f, t);
    let denom = f.lp_norm(r_dual);
    if denom == 0.0 {
        return 0.0;
    }
    evolved.lp_norm(r) * t.powf(n * (0.5 - inv_r)) / denom
}

/// ‖J_α∗g‖_s / ‖g‖_r, requiring 1/r = 1/s + α/N and s > 1.
pub fn hls_ratio(g: &Field, alpha: f64, s: f64, r: f64) -> Result<f64> {
    let lat = g.lattice();
    let n = lat.dim() as f64;
    let mismatch = (1.0 / r - 1.0 / s - alpha / n).abs();
    if !(s > 1.0) || !(r >= 1.0) || mismatch > 1e-12 {
        return Err(Error::ExponentMismatch(format!(
            "r = {r}, s = {s}, alpha = {alpha}, N = {n}"
        )));
    }
    let m = riesz_multiplier(lat, alpha)?;
    let denom = g.lp_norm(r);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(m.apply(g)?.lp_norm(s) / denom)
}
