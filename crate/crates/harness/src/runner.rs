//! Single-run orchestration: build the lattice and initial data, evolve,
//! evaluate diagnostics and persist everything under a hashed manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use dlab_core::conformal::{cauchy_increments, scattering_state};
use dlab_core::diagnostics::{
    decay_fit, virial_residual, virial_series, DiagnosticSeries, SeriesOptions,
};
use dlab_core::integrator::{evolve, Coefficient, EvolutionSpec, Trajectory};
use dlab_core::lattice::{read_snapshot, write_snapshot, Field, Lattice};
use dlab_core::operators::NonlinearContext;
use dlab_core::regime::to_f64;
use dlab_core::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{InitialCondition, RunConfig};
use crate::error::{HarnessError, Result};
use crate::report::regime_json;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Complete,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the run directory, with `/` separators.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps_recorded: usize,
    pub snapshots: usize,
    pub mass_drift: f64,
    pub final_increment: Option<f64>,
    pub virial_residual: Option<f64>,
    pub upsilon_slope: Option<f64>,
    pub potential_slope: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub code_version: String,
    pub config_digest: String,
    pub config: Value,
    pub regime: Value,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub status: RunStatus,
    pub error: Option<String>,
    pub summary: Option<RunSummary>,
    pub files: Vec<FileEntry>,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> Result<(String, u64)> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        total += n as u64;
    }
    Ok((format!("{:x}", hasher.finalize()), total))
}

/// Digest of the canonical config JSON.
pub fn config_digest(cfg: &RunConfig) -> String {
    sha256_hex(cfg.to_json().to_string().as_bytes())
}

pub fn build_lattice(cfg: &RunConfig) -> Result<Lattice> {
    let dim = cfg.params.dim as usize;
    let extent = to_f64(&cfg.lattice.extent);
    Ok(Lattice::new(
        &vec![extent; dim],
        &vec![cfg.lattice.points; dim],
        cfg.lattice.offset,
    )?)
}

pub fn build_initial(cfg: &RunConfig, lattice: &Lattice) -> Result<Field> {
    let gauss = |x: &[f64], sigma: f64, amp: f64| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        amp * (-r2 / (2.0 * sigma * sigma)).exp()
    };
    Ok(match &cfg.initial {
        InitialCondition::Gaussian {
            sigma,
            amplitude,
            chirp,
        } => Field::gaussian(lattice, to_f64(sigma), to_f64(amplitude), to_f64(chirp)),
        InitialCondition::ModulatedGaussian {
            sigma,
            amplitude,
            k0,
        } => {
            let (s, a, k) = (to_f64(sigma), to_f64(amplitude), to_f64(k0));
            Field::from_fn(lattice, |x| Complex64::from_polar(gauss(x, s, a), k * x[0]))
        }
        InitialCondition::NoisyGaussian {
            sigma,
            amplitude,
            noise,
        } => {
            let envelope = Field::gaussian(lattice, to_f64(sigma), to_f64(amplitude), 0.0);
            let eps = to_f64(noise);
            let mut rng = StdRng::seed_from_u64(cfg.seed);
            let values = envelope
                .values()
                .iter()
                .map(|z| {
                    let xi = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    z * (Complex64::new(1.0, 0.0) + eps * xi)
                })
                .collect();
            Field::new(lattice.clone(), values)?
        }
        InitialCondition::File { path } => {
            let field = read_snapshot(std::io::BufReader::new(File::open(path)?))?;
            if field.lattice() != lattice {
                return Err(HarnessError::Invalid(format!(
                    "{} was written on a different lattice than the configured one",
                    path.display()
                )));
            }
            field
        }
    })
}

pub fn build_spec(cfg: &RunConfig, ctx: Arc<NonlinearContext>) -> EvolutionSpec {
    let coefficient = match cfg.coefficient_exponent() {
        Some(rho) => Coefficient::PowerLaw(to_f64(&rho)),
        None => Coefficient::Unit,
    };
    EvolutionSpec::new(
        ctx,
        to_f64(&cfg.time.t0),
        to_f64(&cfg.time.t1),
        to_f64(&cfg.time.dt),
    )
    .with_coefficient(coefficient)
    .with_snapshots(cfg.time.interior_times())
    .with_stats_stride(cfg.time.stats_stride)
}

pub fn build_context(cfg: &RunConfig, lattice: &Lattice) -> Result<NonlinearContext> {
    Ok(if cfg.linear {
        NonlinearContext::linear(&cfg.params, lattice)?
    } else {
        NonlinearContext::new(&cfg.params, lattice)?
    })
}

/// Builds everything and evolves; no files are touched.
pub fn simulate(cfg: &RunConfig) -> Result<Trajectory> {
    let lattice = build_lattice(cfg)?;
    let ctx = Arc::new(build_context(cfg, &lattice)?);
    let initial = build_initial(cfg, &lattice)?;
    Ok(evolve(&build_spec(cfg, ctx), &initial)?)
}

/// Diagnostics derived from a finished trajectory.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub series: DiagnosticSeries,
    pub increments: Option<Vec<(f64, f64, f64)>>,
    pub virial: Option<Vec<(f64, f64, f64)>>,
    pub summary: RunSummary,
}

fn fit(samples: Vec<(f64, f64)>, what: &str, notes: &mut Vec<String>) -> Option<f64> {
    match decay_fit(&samples) {
        Ok((slope, _)) => Some(slope),
        Err(e) => {
            notes.push(format!("{what} slope not fitted: {e}"));
            None
        }
    }
}

pub fn analyze(cfg: &RunConfig, tr: &Trajectory) -> Result<Analysis> {
    let d = &cfg.diagnostics;
    let mut notes = Vec::new();
    let profile = if d.upsilon {
        Some(scattering_state(tr)?.state)
    } else {
        None
    };
    let opts = SeriesOptions {
        upsilon_profile: profile,
        lightcone_speed: d.lightcone_speed.as_ref().map(to_f64),
        weighted_potential: d.weighted_potential,
    };
    let series = DiagnosticSeries::from_trajectory(tr, &opts)?;

    let times = tr.times();
    let increments = if d.cauchy && times.len() >= 2 {
        let inc = cauchy_increments(tr, &times)?;
        Some(
            times
                .windows(2)
                .zip(inc)
                .map(|(w, v)| (w[0], w[1], v))
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };

    let (virial, virial_res) = if d.virial {
        match (virial_series(tr), virial_residual(tr)) {
            (Ok(s), Ok(r)) => (Some(s), Some(r)),
            (Err(e), _) | (_, Err(e)) => {
                notes.push(format!("virial check skipped: {e}"));
                (None, None)
            }
        }
    } else {
        (None, None)
    };

    let from = d.fit_from.as_ref().map_or(0.0, to_f64);
    let window = |r: &&dlab_core::diagnostics::DiagnosticRecord| r.t > 0.0 && r.t >= from - 1e-12;
    let upsilon_slope = if d.upsilon {
        // The profile is the back-propagated final state, so Υ vanishes at t1 by
        // construction; only the first half of the window is fitted.
        let half = 0.5 * to_f64(&cfg.time.t1);
        let samples = series
            .records
            .iter()
            .filter(window)
            .filter(|r| r.t <= half + 1e-12)
            .filter_map(|r| r.upsilon.map(|u| (r.t, u.abs())))
            .collect();
        fit(samples, "upsilon", &mut notes)
    } else {
        None
    };
    let potential_slope = if d.weighted_potential {
        let samples = series
            .records
            .iter()
            .filter(window)
            .filter_map(|r| r.weighted_potential.map(|w| (r.t, w)))
            .collect();
        fit(samples, "weighted potential", &mut notes)
    } else {
        None
    };

    let summary = RunSummary {
        steps_recorded: tr.stats.len(),
        snapshots: tr.snapshots.len(),
        mass_drift: tr.mass_drift(),
        final_increment: increments.as_ref().and_then(|v| v.last().map(|x| x.2)),
        virial_residual: virial_res,
        upsilon_slope,
        potential_slope,
        notes,
    };
    Ok(Analysis {
        series,
        increments,
        virial,
        summary,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)?)
}

fn write_jsonl<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut w, &row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn write_outputs(dir: &Path, tr: &Trajectory, analysis: &Analysis) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let snap_dir = dir.join("snapshots");
    fs::create_dir_all(&snap_dir)?;
    for (j, (_, field)) in tr.snapshots.iter().enumerate() {
        let rel = PathBuf::from("snapshots").join(format!("snap_{j:05}.dlab"));
        let mut w = BufWriter::new(File::create(dir.join(&rel))?);
        write_snapshot(field, &mut w)?;
        w.flush()?;
        written.push(rel);
    }
    let times: Vec<Value> = tr.times().into_iter().map(Value::from).collect();
    fs::write(
        dir.join("snapshots/times.json"),
        serde_json::to_vec(&times)?,
    )?;
    written.push(PathBuf::from("snapshots/times.json"));

    if !tr.stats.is_empty() {
        #[derive(Serialize)]
        struct Stat {
            t: f64,
            mass: f64,
            energy: f64,
            grad_norm: f64,
        }
        let rows = tr.stats.iter().map(|s| Stat {
            t: s.t,
            mass: s.mass,
            energy: s.energy,
            grad_norm: s.grad_norm,
        });
        write_jsonl(&dir.join("stats.jsonl"), rows)?;
        written.push(PathBuf::from("stats.jsonl"));
    }
    write_jsonl(&dir.join("diagnostics.jsonl"), &analysis.series.records)?;
    written.push(PathBuf::from("diagnostics.jsonl"));

    if let Some(inc) = &analysis.increments {
        let mut w = csv_writer(&dir.join("cauchy.csv"))?;
        w.write_record(["index", "t_start", "t_end", "increment"])?;
        for (j, (a, b, v)) in inc.iter().enumerate() {
            w.write_record([j.to_string(), a.to_string(), b.to_string(), v.to_string()])?;
        }
        w.flush()?;
        written.push(PathBuf::from("cauchy.csv"));
    }
    if let Some(vir) = &analysis.virial {
        let mut w = csv_writer(&dir.join("virial.csv"))?;
        w.write_record(["t", "d2_variance", "rhs"])?;
        for (t, d2, rhs) in vir {
            w.write_record([t.to_string(), d2.to_string(), rhs.to_string()])?;
        }
        w.flush()?;
        written.push(PathBuf::from("virial.csv"));
    }
    Ok(written)
}

fn index(dir: &Path, paths: &[PathBuf]) -> Result<Vec<FileEntry>> {
    paths
        .iter()
        .map(|rel| {
            let (sha256, bytes) = hash_file(&dir.join(rel))?;
            let path = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            Ok(FileEntry {
                path,
                sha256,
                bytes,
            })
        })
        .collect()
}

/// Runs `cfg` into `dir` (created if needed) and writes `manifest.json`.
/// A failed evolution still leaves a manifest flagged `partial`.
pub fn run_in(cfg: &RunConfig, dir: &Path) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    let started_unix = now();
    let mut manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config_digest: config_digest(cfg),
        config: cfg.to_json(),
        regime: cfg.regime.as_ref().map_or(Value::Null, regime_json),
        started_unix,
        finished_unix: started_unix,
        status: RunStatus::Partial,
        error: None,
        summary: None,
        files: Vec::new(),
    };
    let outcome = simulate(cfg).and_then(|tr| {
        let analysis = analyze(cfg, &tr)?;
        let written = write_outputs(dir, &tr, &analysis)?;
        Ok((analysis.summary, written))
    });
    let manifest_path = dir.join(MANIFEST_FILE);
    match outcome {
        Ok((summary, written)) => {
            manifest.files = index(dir, &written)?;
            manifest.summary = Some(summary);
            manifest.status = RunStatus::Complete;
            manifest.finished_unix = now();
            fs::write(&manifest_path, serde_json::to_vec_pretty(&manifest)?)?;
            Ok(manifest)
        }
        Err(err) => {
            manifest.error = Some(err.to_string());
            manifest.finished_unix = now();
            fs::write(&manifest_path, serde_json::to_vec_pretty(&manifest)?)?;
            match err {
                HarnessError::Core(source) => Err(HarnessError::RunFailed {
                    manifest: manifest_path,
                    source,
                }),
                other => Err(other),
            }
        }
    }
}

/// [`run_in`] using the configured output directory.
pub fn run(cfg: &RunConfig) -> Result<RunManifest> {
    run_in(cfg, &cfg.output_dir)
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE))?)?)
}

/// Paths of listed files that are missing or whose content no longer
/// matches the recorded hash.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let manifest = read_manifest(dir)?;
    let mut bad = Vec::new();
    for entry in &manifest.files {
        match hash_file(&dir.join(&entry.path)) {
            Ok((sha, bytes)) if sha == entry.sha256 && bytes == entry.bytes => {}
            _ => bad.push(entry.path.clone()),
        }
    }
    Ok(bad)
}
