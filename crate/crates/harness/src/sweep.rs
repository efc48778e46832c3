//! Parameter sweeps over q: classify every value exactly, then dispatch the
//! runs to a worker pool. A failing run only marks its own row.

use std::path::Path;

use dlab_core::regime::{
    classify, fraction_string, int, parse_rational, to_f64, Rational, RegimeError,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::runner::run_in;

/// Worker-count variable read by [`workers_from_env`].
pub const WORKERS_ENV: &str = "DLAB_WORKERS";

/// Parses `DLAB_WORKERS`; unset means one worker per available core.
pub fn workers_from_env() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(HarnessError::Invalid(format!(
                "{WORKERS_ENV}={v:?} is not a positive integer"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Comma- or whitespace-separated list of decimal-or-fraction values.
pub fn parse_q_list(text: &str) -> Result<Vec<Rational>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            parse_rational(s).map_err(|e| HarnessError::Invalid(format!("q list entry {s:?}: {e}")))
        })
        .collect()
}

/// `start:stop:step`, inclusive of `stop` when it lies on the grid.
pub fn parse_q_range(text: &str) -> Result<Vec<Rational>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(HarnessError::Invalid(format!(
            "q range {text:?} must be start:stop:step"
        )));
    }
    let p = |s: &str| {
        parse_rational(s).map_err(|e| HarnessError::Invalid(format!("q range {text:?}: {e}")))
    };
    let (start, stop, step) = (p(parts[0])?, p(parts[1])?, p(parts[2])?);
    if step <= int(0) {
        return Err(HarnessError::Invalid(
            "q range step must be positive".into(),
        ));
    }
    let mut out = Vec::new();
    let mut q = start;
    while q <= stop {
        out.push(q.clone());
        q += &step;
        if out.len() > 100_000 {
            return Err(HarnessError::Invalid(
                "q range has more than 100000 points".into(),
            ));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    /// The tuple failed the condition check and was not run.
    Invalid,
    Failed,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Invalid => "invalid",
            RowStatus::Failed => "failed",
        }
    }
}

impl std::str::FromStr for RowStatus {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ok" => Ok(RowStatus::Ok),
            "invalid" => Ok(RowStatus::Invalid),
            "failed" => Ok(RowStatus::Failed),
            other => Err(format!("unknown status {other:?}")),
        }
    }
}

/// One row of the aggregated sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Exact q as a fraction string.
    pub q: String,
    pub q_float: f64,
    pub label: Option<String>,
    pub mass_class: Option<String>,
    pub status: RowStatus,
    pub error: Option<String>,
    pub final_increment: Option<f64>,
    pub upsilon_slope: Option<f64>,
    pub potential_slope: Option<f64>,
    pub mass_drift: Option<f64>,
    /// Output directory relative to the sweep directory.
    pub run_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

/// Removes repeated values (exact comparison), keeping first occurrences.
pub fn dedup_qs(qs: &[Rational]) -> (Vec<Rational>, Vec<String>) {
    let mut seen: Vec<Rational> = Vec::new();
    let mut warnings = Vec::new();
    for q in qs {
        if seen.contains(q) {
            let w = format!("duplicate q = {} dropped", fraction_string(q));
            log::warn!("{w}");
            warnings.push(w);
        } else {
            seen.push(q.clone());
        }
    }
    (seen, warnings)
}

fn run_dir_name(q: &Rational) -> String {
    format!(
        "q_{}",
        fraction_string(q).replace('/', "_").replace('-', "m")
    )
}

/// Runs one job per distinct q on a pool of `workers` threads. With
/// `only_classify` the rows carry classification only (no evolution, no files).
pub fn sweep(
    base: &RunConfig,
    qs: &[Rational],
    out_dir: &Path,
    workers: usize,
    force: bool,
    only_classify: bool,
) -> Result<SweepReport> {
    let (qs, warnings) = dedup_qs(qs);
    // Classification first, sequentially and exactly.
    let jobs: Vec<(Rational, std::result::Result<RunConfig, String>)> = qs
        .into_iter()
        .map(|q| {
            let cfg = base.with_q(q.clone(), force).map_err(|e| e.to_string());
            (q, cfg)
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Invalid(format!("worker pool: {e}")))?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|(q, cfg)| {
                let mut row = SweepRow {
                    q: fraction_string(q),
                    q_float: to_f64(q),
                    label: None,
                    mass_class: None,
                    status: RowStatus::Ok,
                    error: None,
                    final_increment: None,
                    upsilon_slope: None,
                    potential_slope: None,
                    mass_drift: None,
                    run_dir: None,
                };
                let cfg = match cfg {
                    Ok(c) => c,
                    Err(e) => {
                        row.status = RowStatus::Invalid;
                        row.error = Some(e.clone());
                        return row;
                    }
                };
                if let Some(r) = &cfg.regime {
                    row.label = Some(r.theorem_label.to_string());
                    row.mass_class = Some(format!("{:?}", r.mass_class));
                } else if let Err(RegimeError::InvalidParams(msg)) = classify(&cfg.params) {
                    row.error = Some(msg);
                }
                if only_classify {
                    return row;
                }
                let name = run_dir_name(q);
                row.run_dir = Some(name.clone());
                match run_in(cfg, &out_dir.join(&name)) {
                    Ok(m) => {
                        let s = m.summary.unwrap_or_default();
                        row.final_increment = s.final_increment;
                        row.upsilon_slope = s.upsilon_slope;
                        row.potential_slope = s.potential_slope;
                        row.mass_drift = Some(s.mass_drift);
                    }
                    Err(e) => {
                        log::warn!("q = {}: {e}", row.q);
                        row.status = RowStatus::Failed;
                        row.error = Some(e.to_string());
                    }
                }
                row
            })
            .collect::<Vec<_>>()
    });
    Ok(SweepReport { rows, warnings })
}
