//! Periodic grids, fields, the transform pair and precomputed tables.
//!
//! Transform convention: F f(k) = h^N Σ_j f(x_j) e^{−ik·x_j} with k = 2πm/L,
//! so Σ_j |f_j|² h^N = L^{−N} Σ_k |F(k)|² and continuum symbols such as
//! e^{−it|k|²} or |k|^{−α} apply verbatim. Spectra are stored in FFT order
//! (m = 0, 1, …, n/2−1, −n/2, …, −1 per axis).

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{exec, fft};

pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    dim: usize,
    extent: [f64; MAX_DIM],
    points: [usize; MAX_DIM],
    offset: bool,
}

impl Lattice {
    /// Per-axis constructor. Box is [−L/2, L/2) on every axis.
    pub fn new(extent: &[f64], points: &[usize], offset: bool) -> Result<Self> {
        let dim = extent.len();
        if dim == 0 || dim > MAX_DIM || points.len() != dim {
            return Err(Error::BadGeometry(format!(
                "dimension must be 1..=3 with one extent and one point count per axis (got {} and {})",
                extent.len(),
                points.len()
            )));
        }
        let mut e = [1.0; MAX_DIM];
        let mut p = [1; MAX_DIM];
        for axis in 0..dim {
            if !(extent[axis].is_finite() && extent[axis] > 0.0) {
                return Err(Error::BadGeometry(format!(
                    "extent {} must be positive",
                    extent[axis]
                )));
            }
            if points[axis] < 4 || !points[axis].is_multiple_of(2) {
                return Err(Error::BadGeometry(format!(
                    "point count {} must be even and at least 4",
                    points[axis]
                )));
            }
            e[axis] = extent[axis];
            p[axis] = points[axis];
        }
        Ok(Self {
            dim,
            extent: e,
            points: p,
            offset,
        })
    }

    /// Same extent and point count on every axis.
    pub fn cubic(dim: usize, extent: f64, points: usize, offset: bool) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::BadGeometry(format!("dimension {dim} not in 1..=3")));
        }
        Self::new(&vec![extent; dim], &vec![points; dim], offset)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extent[axis]
    }

    pub fn points(&self, axis: usize) -> usize {
        self.points[axis]
    }

    pub fn offset(&self) -> bool {
        self.offset
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent[axis] / self.points[axis] as f64
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.points[..self.dim].iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight h^N.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Box volume L^N.
    pub fn volume(&self) -> f64 {
        self.extent[..self.dim].iter().product()
    }

    /// Sample coordinate j on `axis`.
    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        let shift = if self.offset { 0.5 } else { 0.0 };
        -0.5 * self.extent[axis] + (j as f64 + shift) * self.spacing(axis)
    }

    pub fn coordinates(&self, axis: usize) -> Vec<f64> {
        (0..self.points[axis])
            .map(|j| self.coordinate(axis, j))
            .collect()
    }

    /// Signed frequency index of FFT slot `m`.
    pub fn frequency_index(&self, axis: usize, m: usize) -> i64 {
        let n = self.points[axis];
        if m < n / 2 {
            m as i64
        } else {
            m as i64 - n as i64
        }
    }

    /// Wavenumber 2π m/L of FFT slot `m`.
    pub fn wavenumber(&self, axis: usize, m: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.extent[axis] * self.frequency_index(axis, m) as f64
    }

    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        (0..self.points[axis])
            .map(|m| self.wavenumber(axis, m))
            .collect()
    }

    /// Largest |k| component magnitude, π/h, on the finest axis.
    pub fn k_max(&self) -> f64 {
        (0..self.dim)
            .map(|a| std::f64::consts::PI / self.spacing(a))
            .fold(0.0, f64::max)
    }

    /// Row-major multi-index of a flat index (axis 0 slowest).
    pub fn unravel(&self, mut index: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for axis in (0..self.dim).rev() {
            out[axis] = index % self.points[axis];
            index /= self.points[axis];
        }
        out
    }

    /// Table of f(coordinate vector) at every sample.
    pub fn spatial_table<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let coords: Vec<Vec<f64>> = (0..self.dim).map(|a| self.coordinates(a)).collect();
        exec::collect(self.len(), |i| {
            let idx = self.unravel(i);
            let mut x = [0.0; MAX_DIM];
            for a in 0..self.dim {
                x[a] = coords[a][idx[a]];
            }
            f(&x[..self.dim])
        })
    }

    /// Table of f(wavevector) in FFT order.
    pub fn spectral_table<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let ks: Vec<Vec<f64>> = (0..self.dim).map(|a| self.wavenumbers(a)).collect();
        exec::collect(self.len(), |i| {
            let idx = self.unravel(i);
            let mut k = [0.0; MAX_DIM];
            for a in 0..self.dim {
                k[a] = ks[a][idx[a]];
            }
            f(&k[..self.dim])
        })
    }

    /// |x|² at every sample.
    pub fn radius_sq(&self) -> Vec<f64> {
        self.spatial_table(|x| x.iter().map(|v| v * v).sum())
    }

    /// |k|² in FFT order.
    pub fn k_sq(&self) -> Vec<f64> {
        self.spectral_table(|k| k.iter().map(|v| v * v).sum())
    }

    /// The lattice with every extent multiplied by `factor` (same point counts).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let ext: Vec<f64> = (0..self.dim).map(|a| self.extent[a] * factor).collect();
        Self::new(&ext, &self.points[..self.dim], self.offset)
    }

    fn axis_phases(&self, sign: f64) -> Vec<Vec<Complex64>> {
        (0..self.dim)
            .map(|a| {
                let x0 = self.coordinate(a, 0);
                self.wavenumbers(a)
                    .into_iter()
                    .map(|k| Complex64::from_polar(1.0, sign * k * x0))
                    .collect()
            })
            .collect()
    }
}

/// Cubic lattice with the point count and extent on every axis.
pub fn make_lattice(dim: usize, extent: f64, points: usize, offset: bool) -> Result<Lattice> {
    Lattice::cubic(dim, extent, points, offset)
}

/// Complex state sampled on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    lattice: Lattice,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(lattice: Lattice, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::BadGeometry(format!(
                "{} values for a lattice of {} points",
                values.len(),
                lattice.len()
            )));
        }
        Ok(Self { lattice, values })
    }

    pub fn zeros(lattice: &Lattice) -> Self {
        Self {
            values: vec![Complex64::default(); lattice.len()],
            lattice: lattice.clone(),
        }
    }

    pub fn from_fn<F>(lattice: &Lattice, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync + Send,
    {
        let coords: Vec<Vec<f64>> = (0..lattice.dim()).map(|a| lattice.coordinates(a)).collect();
        let values = exec::collect(lattice.len(), |i| {
            let idx = lattice.unravel(i);
            let mut x = [0.0; MAX_DIM];
            for a in 0..lattice.dim() {
                x[a] = coords[a][idx[a]];
            }
            f(&x[..lattice.dim()])
        });
        Self {
            lattice: lattice.clone(),
            values,
        }
    }

    /// Isotropic Gaussian amplitude·e^{−|x|²/(2σ²)}·e^{i·chirp·|x|²}.
    pub fn gaussian(lattice: &Lattice, sigma: f64, amplitude: f64, chirp: f64) -> Self {
        Self::from_fn(lattice, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex64::from_polar(amplitude * (-r2 / (2.0 * sigma * sigma)).exp(), chirp * r2)
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn same_lattice(&self, other: &Field) -> Result<()> {
        if self.lattice == other.lattice {
            Ok(())
        } else {
            Err(Error::LatticeMismatch)
        }
    }

    /// Quadrature-weighted squared L² norm.
    pub fn norm_sq(&self) -> f64 {
        let v = &self.values;
        exec::sum(v.len(), |i| v[i].norm_sqr()) * self.lattice.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Discrete L^r norm with weights h^N; r = ∞ is the max norm.
    pub fn lp_norm(&self, r: f64) -> f64 {
        let v = &self.values;
        if r.is_infinite() {
            return exec::max(v.len(), |i| v[i].norm());
        }
        if r == 2.0 {
            return self.norm();
        }
        (exec::sum(v.len(), |i| v[i].norm().powf(r)) * self.lattice.cell_volume()).powf(1.0 / r)
    }

    /// ⟨self, other⟩ = h^N Σ conj(self)·other.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.same_lattice(other)?;
        let (a, b) = (&self.values, &other.values);
        let h = self.lattice.cell_volume();
        let re = exec::sum(a.len(), |i| (a[i].conj() * b[i]).re);
        let im = exec::sum(a.len(), |i| (a[i].conj() * b[i]).im);
        Ok(Complex64::new(re * h, im * h))
    }

    /// ‖self − other‖.
    pub fn distance(&self, other: &Field) -> Result<f64> {
        self.same_lattice(other)?;
        let (a, b) = (&self.values, &other.values);
        Ok((exec::sum(a.len(), |i| (a[i] - b[i]).norm_sqr()) * self.lattice.cell_volume()).sqrt())
    }

    /// ‖self − other‖ / ‖other‖ (0 when both vanish).
    pub fn relative_distance(&self, other: &Field) -> Result<f64> {
        let d = self.distance(other)?;
        let n = other.norm();
        Ok(if n == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / n
        })
    }

    pub fn zip_map<F>(&self, other: &Field, f: F) -> Result<Field>
    where
        F: Fn(Complex64, Complex64) -> Complex64 + Sync + Send,
    {
        self.same_lattice(other)?;
        let (a, b) = (&self.values, &other.values);
        Ok(Field {
            lattice: self.lattice.clone(),
            values: exec::collect(a.len(), |i| f(a[i], b[i])),
        })
    }

    pub fn map<F>(&self, f: F) -> Field
    where
        F: Fn(Complex64) -> Complex64 + Sync + Send,
    {
        let a = &self.values;
        Field {
            lattice: self.lattice.clone(),
            values: exec::collect(a.len(), |i| f(a[i])),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        self.map(|z| z * c)
    }

    pub fn conj(&self) -> Field {
        self.map(|z| z.conj())
    }

    /// Pointwise product with a real table on the same lattice.
    pub fn weighted(&self, w: &RealField) -> Result<Field> {
        if w.lattice != self.lattice {
            return Err(Error::LatticeMismatch);
        }
        let (a, b) = (&self.values, &w.values);
        Ok(Field {
            lattice: self.lattice.clone(),
            values: exec::collect(a.len(), |i| a[i] * b[i]),
        })
    }

    /// Reinterprets the samples on another lattice with the same point counts.
    pub fn relabel(self, lattice: Lattice) -> Result<Field> {
        if lattice.dim() != self.lattice.dim()
            || (0..lattice.dim()).any(|a| lattice.points(a) != self.lattice.points(a))
        {
            return Err(Error::LatticeMismatch);
        }
        Ok(Field {
            lattice,
            values: self.values,
        })
    }

    pub fn forward(&self) -> Spectrum {
        forward_transform(self)
    }
}

/// Real-valued table (weights, masks, potentials).
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    pub(crate) lattice: Lattice,
    pub(crate) values: Vec<f64>,
}

impl RealField {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::BadGeometry(format!(
                "{} values for a lattice of {} points",
                values.len(),
                lattice.len()
            )));
        }
        Ok(Self { lattice, values })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// h^N Σ values.
    pub fn integral(&self) -> f64 {
        let v = &self.values;
        exec::sum(v.len(), |i| v[i]) * self.lattice.cell_volume()
    }

    pub fn to_field(&self) -> Field {
        Field {
            lattice: self.lattice.clone(),
            values: self
                .values
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect(),
        }
    }

    /// Discrete L^r norm of the table.
    pub fn lp_norm(&self, r: f64) -> f64 {
        self.to_field().lp_norm(r)
    }
}

/// Spectral samples F(k) in FFT order under the quadrature convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    lattice: Lattice,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// L^{−N} Σ_k |F(k)|², equal to the spatial squared norm by Parseval.
    pub fn norm_sq(&self) -> f64 {
        let v = &self.values;
        exec::sum(v.len(), |i| v[i].norm_sqr()) / self.lattice.volume()
    }

    pub fn inverse(&self) -> Field {
        inverse_transform(self)
    }
}

pub fn forward_transform(f: &Field) -> Spectrum {
    let lat = f.lattice.clone();
    let mut data = f.values.clone();
    fft::forward(&lat, &mut data);
    let phases = lat.axis_phases(-1.0);
    let h = lat.cell_volume();
    exec::for_each_indexed(&mut data, |i, z| {
        let idx = lat.unravel(i);
        let mut p = Complex64::new(h, 0.0);
        for (a, ph) in phases.iter().enumerate() {
            p *= ph[idx[a]];
        }
        *z *= p;
    });
    Spectrum {
        lattice: lat,
        values: data,
    }
}

pub fn inverse_transform(s: &Spectrum) -> Field {
    let lat = s.lattice.clone();
    let phases = lat.axis_phases(1.0);
    let inv_h = 1.0 / lat.cell_volume();
    let mut data = s.values.clone();
    exec::for_each_indexed(&mut data, |i, z| {
        let idx = lat.unravel(i);
        let mut p = Complex64::new(inv_h, 0.0);
        for (a, ph) in phases.iter().enumerate() {
            p *= ph[idx[a]];
        }
        *z *= p;
    });
    fft::inverse(&lat, &mut data);
    Field {
        lattice: lat,
        values: data,
    }
}

/// Fourier multiplier m(k) stored in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMultiplier {
    lattice: Lattice,
    values: Vec<Complex64>,
}

impl SpectralMultiplier {
    pub fn new(lattice: Lattice, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::BadGeometry("multiplier length mismatch".into()));
        }
        Ok(Self { lattice, values })
    }

    pub fn from_real(lattice: &Lattice, values: Vec<f64>) -> Self {
        Self {
            lattice: lattice.clone(),
            values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// F^{−1}(m·F data) in place. The quadrature phases of the transform pair
    /// cancel, so the raw DFT suffices.
    pub fn apply_in_place(&self, data: &mut [Complex64]) {
        fft::forward(&self.lattice, data);
        let m = &self.values;
        exec::for_each_indexed(data, |i, z| *z *= m[i]);
        fft::inverse(&self.lattice, data);
    }

    pub fn apply(&self, f: &Field) -> Result<Field> {
        if f.lattice != self.lattice {
            return Err(Error::LatticeMismatch);
        }
        let mut data = f.values.clone();
        self.apply_in_place(&mut data);
        Ok(Field {
            lattice: f.lattice.clone(),
            values: data,
        })
    }
}

/// |x_j|^{−p} at every sample.
pub fn weight_field(lat: &Lattice, p: f64) -> Result<RealField> {
    if p < 0.0 || !p.is_finite() {
        return Err(Error::BadGeometry(format!(
            "weight exponent {p} must be finite and nonnegative"
        )));
    }
    if p == 0.0 {
        return Ok(RealField {
            lattice: lat.clone(),
            values: vec![1.0; lat.len()],
        });
    }
    if !lat.offset() {
        return Err(Error::OriginOnGrid(p));
    }
    let values = lat.spatial_table(|x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        r2.powf(-0.5 * p)
    });
    Ok(RealField {
        lattice: lat.clone(),
        values,
    })
}

/// |k|^{−α} with the zero mode set to 0.
pub fn riesz_multiplier(lat: &Lattice, alpha: f64) -> Result<SpectralMultiplier> {
    let dim = lat.dim();
    if !(alpha > 0.0 && alpha < dim as f64) {
        return Err(Error::BadOrder { alpha, dim });
    }
    let values = lat.spectral_table(|k| {
        let k2: f64 = k.iter().map(|v| v * v).sum();
        if k2 == 0.0 {
            0.0
        } else {
            k2.powf(-0.5 * alpha)
        }
    });
    Ok(SpectralMultiplier::from_real(lat, values))
}

/// Indicator of |x_j| ≤ R.
pub fn ball_mask(lat: &Lattice, radius: f64) -> RealField {
    let r2 = radius * radius;
    let values = lat.spatial_table(|x| {
        let d: f64 = x.iter().map(|v| v * v).sum();
        if d <= r2 {
            1.0
        } else {
            0.0
        }
    });
    RealField {
        lattice: lat.clone(),
        values,
    }
}

/// Free-flight horizon before content of `f` reaches the boundary layer.
///
/// R is the radius holding all but `tol` of the mass, k_eff the wavenumber
/// holding all but `tol` of the spectral mass; the result is
/// (L_min/2 − 10h − R) / (2 k_eff), clamped at 0.
pub fn safe_horizon(f: &Field, tol: f64) -> f64 {
    let lat = f.lattice();
    let h = lat.cell_volume();
    let r2 = lat.radius_sq();
    let mut spatial: Vec<(f64, f64)> = f
        .values()
        .iter()
        .zip(&r2)
        .map(|(z, &r)| (r, z.norm_sqr() * h))
        .collect();
    let radius = tail_cut(&mut spatial, tol).sqrt();
    let spec = f.forward();
    let k2 = lat.k_sq();
    let vol = lat.volume();
    let mut spectral: Vec<(f64, f64)> = spec
        .values()
        .iter()
        .zip(&k2)
        .map(|(z, &k)| (k, z.norm_sqr() / vol))
        .collect();
    let k_eff = tail_cut(&mut spectral, tol).sqrt().max(1e-300);
    let half_box = (0..lat.dim())
        .map(|a| 0.5 * lat.extent(a) - 10.0 * lat.spacing(a))
        .fold(f64::INFINITY, f64::min);
    ((half_box - radius) / (2.0 * k_eff)).max(0.0)
}

/// Smallest key such that the weights above it sum to at most `tol` of the total.
fn tail_cut(pairs: &mut [(f64, f64)], tol: f64) -> f64 {
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for &(key, w) in pairs.iter() {
        acc += w;
        if acc > tol * total {
            return key;
        }
    }
    0.0
}

/// Minimal box extent for a Gaussian of initial width σ (|u|² ∝ e^{−x²/σ²})
/// at time t: 2(4.6·σ(t) + 10h) with σ(t)² = σ² + 4t²/σ², leaving ≤ 1e−10
/// of the mass within 10h of the boundary.
pub fn gaussian_min_extent(sigma: f64, t: f64, h: f64) -> f64 {
    let width = (sigma * sigma + 4.0 * t * t / (sigma * sigma)).sqrt();
    2.0 * (4.6 * width + 10.0 * h)
}

const MAGIC: &[u8; 4] = b"DLAB";
const VERSION: u16 = 1;

/// Writes the binary snapshot layout: magic, version, dim, per-axis n (u32),
/// per-axis L (f64), offset flag, then (re, im) pairs, all little-endian.
pub fn write_snapshot<W: Write>(f: &Field, mut w: W) -> Result<()> {
    let lat = f.lattice();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[lat.dim() as u8])?;
    for a in 0..lat.dim() {
        w.write_all(&(lat.points(a) as u32).to_le_bytes())?;
    }
    for a in 0..lat.dim() {
        w.write_all(&lat.extent(a).to_le_bytes())?;
    }
    w.write_all(&[lat.offset() as u8])?;
    let mut buf = Vec::with_capacity(16 * f.len());
    for z in f.values() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Field> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut two = [0u8; 2];
    r.read_exact(&mut two)?;
    let version = u16::from_le_bytes(two);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut one = [0u8; 1];
    r.read_exact(&mut one)?;
    let dim = one[0] as usize;
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Format(format!("dimension {dim}")));
    }
    let mut points = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        points.push(u32::from_le_bytes(b) as usize);
    }
    let mut extent = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        extent.push(f64::from_le_bytes(b));
    }
    r.read_exact(&mut one)?;
    let lattice = Lattice::new(&extent, &points, one[0] != 0)?;
    let mut raw = vec![0u8; 16 * lattice.len()];
    r.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    Field::new(lattice, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_examples() {
        let lat = make_lattice(1, 80.0, 1024, true).unwrap();
        assert_eq!(lat.spacing(0), 0.078125);
        let lat = make_lattice(2, 40.0, 4, true).unwrap();
        assert_eq!(lat.coordinates(0), vec![-15.0, -5.0, 5.0, 15.0]);
        assert_eq!(lat.coordinates(1), vec![-15.0, -5.0, 5.0, 15.0]);
        assert!(matches!(
            make_lattice(1, 10.0, 7, true),
            Err(Error::BadGeometry(_))
        ));
        assert!(matches!(
            make_lattice(1, -1.0, 8, true),
            Err(Error::BadGeometry(_))
        ));
        assert!(matches!(
            make_lattice(4, 1.0, 8, true),
            Err(Error::BadGeometry(_))
        ));
    }

    #[test]
    fn weight_and_mask_examples() {
        let lat = make_lattice(1, 4.0, 4, true).unwrap();
        let w = weight_field(&lat, 1.0).unwrap();
        assert_eq!(w.values(), &[1.0 / 1.5, 2.0, 2.0, 1.0 / 1.5]);
        assert_eq!(weight_field(&lat, 0.0).unwrap().values(), &[1.0; 4]);
        let m = ball_mask(&lat, 1.0);
        assert_eq!(m.values(), &[0.0, 1.0, 1.0, 0.0]);
        let grid = make_lattice(1, 4.0, 4, false).unwrap();
        assert!(matches!(
            weight_field(&grid, 0.5),
            Err(Error::OriginOnGrid(_))
        ));
    }

    #[test]
    fn dc_mode_and_wavenumbers() {
        let lat = make_lattice(2, 6.0, 8, true).unwrap();
        let f = Field::from_fn(&lat, |_| Complex64::new(1.0, 0.0));
        let s = f.forward();
        let total: f64 = s.values().iter().map(|z| z.norm()).sum();
        assert!((s.values()[0].norm() - 36.0).abs() < 1e-12);
        assert!((total - 36.0).abs() < 1e-10);
        let k = lat.wavenumbers(0);
        assert_eq!(lat.frequency_index(0, 4), -4);
        assert!((k[1] - 2.0 * std::f64::consts::PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn riesz_multiplier_rules() {
        let lat = make_lattice(1, 2.0 * std::f64::consts::PI, 16, true).unwrap();
        let m = riesz_multiplier(&lat, 0.5).unwrap();
        assert_eq!(m.values()[0].re, 0.0);
        assert!((m.values()[1].re - 1.0).abs() < 1e-15);
        assert!(matches!(
            riesz_multiplier(&lat, 1.0),
            Err(Error::BadOrder { .. })
        ));
        assert!(matches!(
            riesz_multiplier(&lat, 0.0),
            Err(Error::BadOrder { .. })
        ));
    }

    #[test]
    fn horizon_is_positive_for_centred_gaussian() {
        let lat = make_lattice(1, 80.0, 1024, true).unwrap();
        let f = Field::gaussian(&lat, 1.0, 1.0, 0.0);
        let t = safe_horizon(&f, 1e-12);
        assert!(t > 1.0 && t < 100.0, "{t}");
        assert!(gaussian_min_extent(1.0, 4.0, 0.078) < 80.0);
    }
}
