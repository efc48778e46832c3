//! Run configuration: a small TOML schema whose numeric values are exact
//! decimal-or-fraction strings.
//!
//! | section         | key                | default        | meaning                                        |
//! |-----------------|--------------------|----------------|------------------------------------------------|
//! | `[model]`       | `kind`             | required       | `"inls"` or `"inlh"`                           |
//! |                 | `N`                | `1`            | spatial dimension (1..=3)                      |
//! |                 | `b`, `q`           | required       | weight exponent and power                      |
//! |                 | `alpha`            | required (inlh)| Riesz order                                    |
//! |                 | `linear`           | `false`        | drop the nonlinearity (weights set to 0)       |
//! | `[lattice]`     | `L`                | `"40"`         | box extent per axis                            |
//! |                 | `n`                | `512`          | points per axis (even)                         |
//! |                 | `offset`           | `true`         | cell-centred grid (never samples the origin)   |
//! | `[time]`        | `t0`, `t1`         | `"0"`, `"1"`   | time window                                    |
//! |                 | `dt`               | `"1/1000"`     | maximal step                                   |
//! |                 | `coeff_exponent`   | `"0"`          | ρ in c(t)=t^ρ, or `"pseudoconformal"`          |
//! |                 | `snapshots`        | `11`           | equispaced capture count (endpoints included)  |
//! |                 | `snapshot_times`   | none           | explicit capture list, overrides `snapshots`   |
//! |                 | `stats_stride`     | `1`            | steps between stats records (0 disables)       |
//! | `[initial]`     | `kind`             | `"gaussian"`   | `gaussian`, `modulated-gaussian`, `noisy-gaussian`, `file` |
//! |                 | `sigma`            | `"1"`          | width                                          |
//! |                 | `amplitude`        | `"1"`          | peak value                                     |
//! |                 | `chirp`            | `"0"`          | phase e^{i·chirp·|x|²} (gaussian)              |
//! |                 | `k0`               | `"1"`          | carrier e^{i·k0·x₁} (modulated-gaussian)       |
//! |                 | `noise`            | `"1/10"`       | relative noise level (noisy-gaussian)          |
//! |                 | `path`             | required (file)| DLAB snapshot to start from                    |
//! | `[diagnostics]` | `virial`           | `false`        | virial series and residual                     |
//! |                 | `upsilon`          | `false`        | Υ against the free flow of the final profile   |
//! |                 | `weighted_potential`| `true`        | weighted potential per snapshot                |
//! |                 | `cauchy`           | `true`         | Cauchy increments between snapshots            |
//! |                 | `lightcone_speed`  | none           | mass in the ball of radius speed·t             |
//! |                 | `fit_from`         | none           | lower time bound of the slope fits             |
//! | `[output]`      | `dir`              | `"dlab-out"`   | output directory                               |
//! | top level       | `seed`             | `0`            | RNG seed (noisy-gaussian only)                 |
//!
//! Decimal values must be quoted (`b = "0.25"`) so they are read exactly;
//! bare integers are accepted, bare floats are rejected.

use std::path::PathBuf;

use dlab_core::regime::{
    classify, fraction_string, int, parse_rational, to_f64, Model, ModelParams, Rational,
    RegimeError, RegimeReport,
};
use serde_json::{json, Value};
use toml::Table;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub extent: Rational,
    pub points: usize,
    pub offset: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientSpec {
    Unit,
    PowerLaw(Rational),
    /// The exponent of the pseudoconformally transformed equation.
    Pseudoconformal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotSpec {
    Count(usize),
    Times(Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSpec {
    pub t0: Rational,
    pub t1: Rational,
    pub dt: Rational,
    pub coefficient: CoefficientSpec,
    pub snapshots: SnapshotSpec,
    pub stats_stride: usize,
}

impl TimeSpec {
    /// Interior capture times as floats (t0 and t1 are implicit).
    pub fn interior_times(&self) -> Vec<f64> {
        match &self.snapshots {
            SnapshotSpec::Count(count) => {
                let span = &self.t1 - &self.t0;
                let m = (*count - 1) as i64;
                (1..m)
                    .map(|j| to_f64(&(&self.t0 + &span * int(j) / int(m))))
                    .collect()
            }
            SnapshotSpec::Times(times) => times
                .iter()
                .filter(|t| **t > self.t0 && **t < self.t1)
                .map(to_f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Gaussian {
        sigma: Rational,
        amplitude: Rational,
        chirp: Rational,
    },
    ModulatedGaussian {
        sigma: Rational,
        amplitude: Rational,
        k0: Rational,
    },
    NoisyGaussian {
        sigma: Rational,
        amplitude: Rational,
        noise: Rational,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsSpec {
    pub virial: bool,
    pub upsilon: bool,
    pub weighted_potential: bool,
    pub cauchy: bool,
    pub lightcone_speed: Option<Rational>,
    pub fit_from: Option<Rational>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub lattice: LatticeSpec,
    pub time: TimeSpec,
    pub initial: InitialCondition,
    pub diagnostics: DiagnosticsSpec,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Evolve the free flow only (sanity runs).
    pub linear: bool,
    /// Classification computed at parse time; `None` only for a forced
    /// invalid tuple.
    pub regime: Option<RegimeReport>,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("model", &["kind", "N", "b", "q", "alpha", "linear"]),
    ("lattice", &["L", "n", "offset"]),
    (
        "time",
        &[
            "t0",
            "t1",
            "dt",
            "coeff_exponent",
            "snapshots",
            "snapshot_times",
            "stats_stride",
        ],
    ),
    (
        "initial",
        &["kind", "sigma", "amplitude", "chirp", "k0", "noise", "path"],
    ),
    (
        "diagnostics",
        &[
            "virial",
            "upsilon",
            "weighted_potential",
            "cauchy",
            "lightcone_speed",
            "fit_from",
        ],
    ),
    ("output", &["dir"]),
];

/// A value set from outside the file (command-line flags).
#[derive(Debug, Clone)]
pub struct Override {
    pub section: &'static str,
    pub key: &'static str,
    pub value: toml::Value,
}

impl Override {
    pub fn text(section: &'static str, key: &'static str, value: impl Into<String>) -> Self {
        Self {
            section,
            key,
            value: toml::Value::String(value.into()),
        }
    }

    pub fn integer(section: &'static str, key: &'static str, value: i64) -> Self {
        Self {
            section,
            key,
            value: toml::Value::Integer(value),
        }
    }
}

/// 1-based line of `key` inside `[section]` (top level when empty); 0 when
/// the key does not appear in the text (defaults and overrides).
fn key_line(text: &str, section: &str, key: &str) -> usize {
    let mut current = "";
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim();
            continue;
        }
        if current == section {
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return i + 1;
                }
            }
        }
    }
    0
}

fn span_line(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Doc<'a> {
    text: &'a str,
    table: Table,
}

impl<'a> Doc<'a> {
    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> HarnessError {
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        HarnessError::Parse {
            line: key_line(self.text, section, key),
            key: full,
            message: message.into(),
        }
    }

    fn get(&self, section: &str, key: &str) -> Option<&toml::Value> {
        if section.is_empty() {
            return self.table.get(key);
        }
        self.table.get(section)?.as_table()?.get(key)
    }

    fn rational(&self, section: &str, key: &str) -> Result<Option<Rational>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => {
                parse_rational(s).map(Some).map_err(|e| self.err(section, key, e.to_string()))
            }
            Some(toml::Value::Integer(i)) => Ok(Some(int(*i))),
            Some(toml::Value::Float(_)) => Err(self.err(
                section,
                key,
                "bare floats are inexact; quote the value as a decimal or fraction string, e.g. \"0.25\"",
            )),
            Some(other) => Err(self.err(section, key, format!("expected a number string, found {}", other.type_str()))),
        }
    }

    fn rational_or(&self, section: &str, key: &str, default: &str) -> Result<Rational> {
        Ok(self
            .rational(section, key)?
            .unwrap_or_else(|| parse_rational(default).expect("valid default")))
    }

    fn required_rational(&self, section: &str, key: &str) -> Result<Rational> {
        self.rational(section, key)?
            .ok_or_else(|| self.err(section, key, "missing required value"))
    }

    fn integer(&self, section: &str, key: &str, default: i64) -> Result<i64> {
        match self.get(section, key) {
            None => Ok(default),
            Some(toml::Value::Integer(i)) => Ok(*i),
            Some(toml::Value::String(s)) => s
                .trim()
                .parse()
                .map_err(|_| self.err(section, key, "expected an integer")),
            Some(other) => Err(self.err(
                section,
                key,
                format!("expected an integer, found {}", other.type_str()),
            )),
        }
    }

    fn boolean(&self, section: &str, key: &str, default: bool) -> Result<bool> {
        match self.get(section, key) {
            None => Ok(default),
            Some(toml::Value::Boolean(b)) => Ok(*b),
            Some(other) => Err(self.err(
                section,
                key,
                format!("expected true or false, found {}", other.type_str()),
            )),
        }
    }

    fn string(&self, section: &str, key: &str) -> Result<Option<String>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(self.err(
                section,
                key,
                format!("expected a string, found {}", other.type_str()),
            )),
        }
    }

    fn check_keys(&self) -> Result<()> {
        for (name, value) in &self.table {
            match SECTIONS.iter().find(|(s, _)| s == name) {
                Some((section, keys)) => {
                    let table = value
                        .as_table()
                        .ok_or_else(|| self.err("", name, "expected a [section] table"))?;
                    for key in table.keys() {
                        if !keys.contains(&key.as_str()) {
                            return Err(self.err(section, key, "unknown key"));
                        }
                    }
                }
                None if name == "seed" => {}
                None => return Err(self.err("", name, "unknown section or key")),
            }
        }
        Ok(())
    }
}

/// Parses a config; with `force` an invalid parameter tuple is accepted
/// (its regime report is then absent).
pub fn parse_config(text: &str, force: bool) -> Result<RunConfig> {
    parse_config_with(text, &[], force)
}

/// [`parse_config`] with values layered over the file.
pub fn parse_config_with(text: &str, overrides: &[Override], force: bool) -> Result<RunConfig> {
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| HarnessError::Parse {
            line: e.span().map_or(0, |s| span_line(text, s.start)),
            key: String::new(),
            message: e.message().to_string(),
        })?;
    for o in overrides {
        let section = table
            .entry(o.section.to_string())
            .or_insert_with(|| toml::Value::Table(Table::new()));
        match section.as_table_mut() {
            Some(t) => {
                t.insert(o.key.to_string(), o.value.clone());
            }
            None => {
                return Err(HarnessError::Parse {
                    line: 0,
                    key: o.section.to_string(),
                    message: "expected a [section] table".into(),
                })
            }
        }
    }
    let doc = Doc { text, table };
    doc.check_keys()?;
    build(&doc, force)
}

fn positive(doc: &Doc, section: &str, key: &str, value: &Rational) -> Result<()> {
    if *value > int(0) {
        Ok(())
    } else {
        Err(doc.err(
            section,
            key,
            format!("must be positive, got {}", fraction_string(value)),
        ))
    }
}

fn build(doc: &Doc, force: bool) -> Result<RunConfig> {
    let kind = doc
        .string("model", "kind")?
        .ok_or_else(|| doc.err("model", "kind", "missing required value"))?;
    let model: Model = kind
        .parse()
        .map_err(|e: RegimeError| doc.err("model", "kind", e.to_string()))?;
    let dim = doc.integer("model", "N", 1)?;
    let linear = doc.boolean("model", "linear", false)?;
    if !(1..=3).contains(&dim) {
        return Err(doc.err(
            "model",
            "N",
            format!("dimension must be 1, 2 or 3, got {dim}"),
        ));
    }
    let b = doc.required_rational("model", "b")?;
    let q = doc.required_rational("model", "q")?;
    let params = match model {
        Model::Inls => {
            if doc.get("model", "alpha").is_some() {
                return Err(doc.err("model", "alpha", "alpha only applies to inlh"));
            }
            ModelParams::inls(dim as u32, b, q)
        }
        Model::Inlh => {
            ModelParams::inlh(dim as u32, doc.required_rational("model", "alpha")?, b, q)
        }
    };

    let extent = doc.rational_or("lattice", "L", "40")?;
    positive(doc, "lattice", "L", &extent)?;
    let points = doc.integer("lattice", "n", 512)?;
    if points < 4 || points % 2 != 0 {
        return Err(doc.err(
            "lattice",
            "n",
            format!("points per axis must be even and at least 4, got {points}"),
        ));
    }
    let lattice = LatticeSpec {
        extent,
        points: points as usize,
        offset: doc.boolean("lattice", "offset", true)?,
    };

    let t0 = doc.rational_or("time", "t0", "0")?;
    let t1 = doc.rational_or("time", "t1", "1")?;
    if t0 < int(0) {
        return Err(doc.err("time", "t0", "must be nonnegative"));
    }
    if t1 <= t0 {
        return Err(doc.err("time", "t1", "must exceed t0"));
    }
    let dt = doc.rational_or("time", "dt", "1/1000")?;
    positive(doc, "time", "dt", &dt)?;
    let coefficient = match doc.get("time", "coeff_exponent") {
        Some(toml::Value::String(s)) if s.trim() == "pseudoconformal" => {
            CoefficientSpec::Pseudoconformal
        }
        _ => match doc.rational("time", "coeff_exponent")? {
            Some(r) if r != int(0) => CoefficientSpec::PowerLaw(r),
            _ => CoefficientSpec::Unit,
        },
    };
    let rho = match &coefficient {
        CoefficientSpec::Unit => None,
        CoefficientSpec::PowerLaw(r) => Some(r.clone()),
        CoefficientSpec::Pseudoconformal => {
            Some(dlab_core::regime::pseudoconformal_exponent(&params))
        }
    };
    if let Some(r) = rho {
        if r < int(0) && t0 == int(0) {
            return Err(doc.err(
                "time",
                "coeff_exponent",
                format!(
                    "t^{} is singular at t0 = 0; start later",
                    fraction_string(&r)
                ),
            ));
        }
    }
    let snapshots = match doc.get("time", "snapshot_times") {
        Some(toml::Value::Array(items)) => {
            let mut times = Vec::with_capacity(items.len());
            for item in items {
                let t = match item {
                    toml::Value::String(s) => parse_rational(s)
                        .map_err(|e| doc.err("time", "snapshot_times", e.to_string()))?,
                    toml::Value::Integer(i) => int(*i),
                    _ => {
                        return Err(doc.err(
                            "time",
                            "snapshot_times",
                            "entries must be number strings",
                        ))
                    }
                };
                if t <= t0 || t >= t1 {
                    return Err(doc.err(
                        "time",
                        "snapshot_times",
                        format!("{} lies outside (t0, t1)", fraction_string(&t)),
                    ));
                }
                if times.last().is_some_and(|p: &Rational| *p >= t) {
                    return Err(doc.err("time", "snapshot_times", "times must increase strictly"));
                }
                times.push(t);
            }
            SnapshotSpec::Times(times)
        }
        Some(_) => return Err(doc.err("time", "snapshot_times", "expected an array")),
        None => {
            let count = doc.integer("time", "snapshots", 11)?;
            if count < 2 {
                return Err(doc.err("time", "snapshots", "need at least the two endpoints"));
            }
            SnapshotSpec::Count(count as usize)
        }
    };
    let stride = doc.integer("time", "stats_stride", 1)?;
    if stride < 0 {
        return Err(doc.err("time", "stats_stride", "must be nonnegative"));
    }
    let time = TimeSpec {
        t0,
        t1,
        dt,
        coefficient,
        snapshots,
        stats_stride: stride as usize,
    };

    let ic_kind = doc
        .string("initial", "kind")?
        .unwrap_or_else(|| "gaussian".into());
    let sigma = doc.rational_or("initial", "sigma", "1")?;
    positive(doc, "initial", "sigma", &sigma)?;
    let amplitude = doc.rational_or("initial", "amplitude", "1")?;
    let initial = match ic_kind.as_str() {
        "gaussian" => InitialCondition::Gaussian {
            sigma,
            amplitude,
            chirp: doc.rational_or("initial", "chirp", "0")?,
        },
        "modulated-gaussian" => InitialCondition::ModulatedGaussian {
            sigma,
            amplitude,
            k0: doc.rational_or("initial", "k0", "1")?,
        },
        "noisy-gaussian" => InitialCondition::NoisyGaussian {
            sigma,
            amplitude,
            noise: doc.rational_or("initial", "noise", "1/10")?,
        },
        "file" => InitialCondition::File {
            path: doc
                .string("initial", "path")?
                .ok_or_else(|| doc.err("initial", "path", "file initial data needs a path"))?
                .into(),
        },
        other => {
            return Err(doc.err(
                "initial",
                "kind",
                format!("unknown initial condition '{other}'"),
            ))
        }
    };

    let diagnostics = DiagnosticsSpec {
        virial: doc.boolean("diagnostics", "virial", false)?,
        upsilon: doc.boolean("diagnostics", "upsilon", false)?,
        weighted_potential: doc.boolean("diagnostics", "weighted_potential", true)?,
        cauchy: doc.boolean("diagnostics", "cauchy", true)?,
        lightcone_speed: doc.rational("diagnostics", "lightcone_speed")?,
        fit_from: doc.rational("diagnostics", "fit_from")?,
    };
    let output_dir = doc
        .string("output", "dir")?
        .unwrap_or_else(|| "dlab-out".into())
        .into();
    let seed = doc.integer("", "seed", 0)?;
    if seed < 0 {
        return Err(doc.err("", "seed", "must be nonnegative"));
    }

    let regime = match classify(&params) {
        Ok(report) => Some(report),
        Err(e @ RegimeError::InvalidParams(_)) if !force => return Err(e.into()),
        Err(RegimeError::InvalidParams(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(RunConfig {
        params,
        lattice,
        time,
        initial,
        diagnostics,
        output_dir,
        seed: seed as u64,
        linear,
        regime,
    })
}

fn exact(r: &Rational) -> Value {
    json!({ "exact": fraction_string(r), "float": to_f64(r) })
}

fn opt_exact(r: &Option<Rational>) -> Value {
    r.as_ref().map_or(Value::Null, exact)
}

impl RunConfig {
    /// Same configuration with a different power, reclassified.
    pub fn with_q(&self, q: Rational, force: bool) -> Result<RunConfig> {
        let mut next = self.clone();
        next.params.q = q;
        next.regime = match classify(&next.params) {
            Ok(report) => Some(report),
            Err(e @ RegimeError::InvalidParams(_)) if !force => return Err(e.into()),
            Err(RegimeError::InvalidParams(_)) => None,
            Err(e) => return Err(e.into()),
        };
        Ok(next)
    }

    /// Exponent ρ of the coefficient t^ρ, if any.
    pub fn coefficient_exponent(&self) -> Option<Rational> {
        match &self.time.coefficient {
            CoefficientSpec::Unit => None,
            CoefficientSpec::PowerLaw(r) => Some(r.clone()),
            CoefficientSpec::Pseudoconformal => {
                Some(dlab_core::regime::pseudoconformal_exponent(&self.params))
            }
        }
    }

    /// Canonical JSON form with every number in both exact and float form.
    /// The output directory is excluded so that relocated runs share a digest.
    pub fn to_json(&self) -> Value {
        let p = &self.params;
        let initial = match &self.initial {
            InitialCondition::Gaussian {
                sigma,
                amplitude,
                chirp,
            } => json!({
                "kind": "gaussian", "sigma": exact(sigma), "amplitude": exact(amplitude), "chirp": exact(chirp)
            }),
            InitialCondition::ModulatedGaussian {
                sigma,
                amplitude,
                k0,
            } => json!({
                "kind": "modulated-gaussian", "sigma": exact(sigma), "amplitude": exact(amplitude), "k0": exact(k0)
            }),
            InitialCondition::NoisyGaussian {
                sigma,
                amplitude,
                noise,
            } => json!({
                "kind": "noisy-gaussian", "sigma": exact(sigma), "amplitude": exact(amplitude), "noise": exact(noise)
            }),
            InitialCondition::File { path } => {
                json!({ "kind": "file", "path": path.display().to_string() })
            }
        };
        let snapshots = match &self.time.snapshots {
            SnapshotSpec::Count(c) => json!({ "count": c }),
            SnapshotSpec::Times(ts) => json!({ "times": ts.iter().map(exact).collect::<Vec<_>>() }),
        };
        let coefficient = match &self.time.coefficient {
            CoefficientSpec::Unit => json!("unit"),
            CoefficientSpec::PowerLaw(r) => json!({ "power_law": exact(r) }),
            CoefficientSpec::Pseudoconformal => {
                json!({ "pseudoconformal": exact(&dlab_core::regime::pseudoconformal_exponent(p)) })
            }
        };
        json!({
            "model": {
                "kind": p.model.to_string(),
                "N": p.dim,
                "b": exact(&p.b),
                "q": exact(&p.q),
                "alpha": if p.model == Model::Inlh { exact(&p.alpha) } else { Value::Null },
                "linear": self.linear,
            },
            "lattice": {
                "L": exact(&self.lattice.extent),
                "n": self.lattice.points,
                "offset": self.lattice.offset,
            },
            "time": {
                "t0": exact(&self.time.t0),
                "t1": exact(&self.time.t1),
                "dt": exact(&self.time.dt),
                "coefficient": coefficient,
                "snapshots": snapshots,
                "stats_stride": self.time.stats_stride,
            },
            "initial": initial,
            "diagnostics": {
                "virial": self.diagnostics.virial,
                "upsilon": self.diagnostics.upsilon,
                "weighted_potential": self.diagnostics.weighted_potential,
                "cauchy": self.diagnostics.cauchy,
                "lightcone_speed": opt_exact(&self.diagnostics.lightcone_speed),
                "fit_from": opt_exact(&self.diagnostics.fit_from),
            },
            "seed": self.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dlab_core::regime::ratio;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg =
            parse_config("[model]\nkind = \"inls\"\nb = \"0.25\"\nq = \"3\"\n", false).unwrap();
        assert_eq!(cfg.params.b, ratio(1, 4));
        assert_eq!(cfg.params.dim, 1);
        assert_eq!(
            cfg.lattice,
            LatticeSpec {
                extent: int(40),
                points: 512,
                offset: true
            }
        );
        assert_eq!(cfg.time.dt, ratio(1, 1000));
        assert_eq!(cfg.time.snapshots, SnapshotSpec::Count(11));
        assert_eq!(cfg.time.coefficient, CoefficientSpec::Unit);
        assert!(
            cfg.diagnostics.cauchy && cfg.diagnostics.weighted_potential && !cfg.diagnostics.virial
        );
        assert_eq!(cfg.output_dir, PathBuf::from("dlab-out"));
        assert!(cfg.regime.is_some());
        assert_eq!(cfg.to_json()["model"]["b"]["float"], json!(0.25));
    }

    #[test]
    fn errors_carry_line_and_key() {
        let text = "[model]\nkind = \"inls\"\nb = 0.25\nq = \"3\"\n";
        match parse_config(text, false) {
            Err(HarnessError::Parse { line, key, .. }) => {
                assert_eq!((line, key.as_str()), (3, "model.b"))
            }
            other => panic!("{other:?}"),
        }
        match parse_config(
            "[model]\nkind = \"inls\"\nb = \"1/4\"\nq = \"3\"\n[time]\nd t = 1\n",
            false,
        ) {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        match parse_config(
            "[model]\nkind = \"inls\"\nb = \"1/4\"\nq = \"3\"\nbogus = 1\n",
            false,
        ) {
            Err(HarnessError::Parse { line, key, .. }) => {
                assert_eq!((line, key.as_str()), (5, "model.bogus"))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn interior_times_are_exact_fractions() {
        let cfg = parse_config(
            "[model]\nkind = \"inls\"\nb = \"1/4\"\nq = \"3\"\n[time]\nt1 = \"1\"\nsnapshots = 4\n",
            false,
        )
        .unwrap();
        assert_eq!(cfg.time.interior_times(), vec![1.0 / 3.0, 2.0 / 3.0]);
    }
}
