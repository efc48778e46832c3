use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dlab_core::regime::{classify_with, parse_rational, ClassifyOptions, ModelParams, RegimeError};
use dlab_harness::config::{parse_config_with, Override};
use dlab_harness::error::{exit, HarnessError, Result};
use dlab_harness::pcheck::{pcheck, PcheckConfig};
use dlab_harness::report::{invalid_json, regime_json, regime_text};
use dlab_harness::runner::run;
use dlab_harness::sweep::{parse_q_list, parse_q_range, sweep, workers_from_env, RowStatus};
use dlab_harness::table::{export_table, TableFormat};
use dlab_harness::verify::{run_suite, Suite};

/// Simulation and verification harness for inhomogeneous NLS and Hartree equations.
#[derive(Parser)]
#[command(name = "dlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify parameter tuples exactly and print exponent certificates.
    Classify(ClassifyArgs),
    /// Evolve one configuration and write snapshots, tables and a manifest.
    Run(RunArgs),
    /// Run a base configuration over a list or range of q values.
    Sweep(SweepArgs),
    /// Run a verification suite (or `all`).
    Verify {
        /// mass, energy-order, virial, lightcone, upsilon, decay, riesz or all
        suite: String,
    },
    /// Dual-run pseudoconformal equivalence check; prints a JSON report.
    Pcheck(PcheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
    Both,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, default_value = "inls")]
    model: String,
    #[arg(long = "N", default_value_t = 1)]
    dim: u32,
    #[arg(long)]
    b: String,
    /// One value or a comma-separated list.
    #[arg(long)]
    q: String,
    #[arg(long)]
    alpha: Option<String>,
    /// Apply the extra one-dimensional Hartree condition.
    #[arg(long)]
    one_dim_extension: bool,
    #[arg(long, value_enum, default_value = "both")]
    format: OutputFormat,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long = "N")]
    dim: Option<i64>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long = "L")]
    extent: Option<String>,
    #[arg(long)]
    n: Option<i64>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    t0: Option<String>,
    #[arg(long)]
    t1: Option<String>,
    /// ρ in c(t) = t^ρ, or `pseudoconformal`.
    #[arg(long)]
    coeff_exponent: Option<String>,
    /// Number of equispaced snapshots including both endpoints.
    #[arg(long)]
    snapshots: Option<i64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run even when the parameters fail the condition check.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated q values.
    #[arg(long, conflicts_with = "q_range")]
    q_list: Option<String>,
    /// start:stop:step
    #[arg(long)]
    q_range: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Classify only; no runs.
    #[arg(long)]
    classify_only: bool,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct PcheckArgs {
    #[arg(long, default_value_t = 32768)]
    n: usize,
    #[arg(long, default_value_t = 0.3)]
    amplitude: f64,
    #[arg(long, default_value = "1/4")]
    b: String,
    #[arg(long, default_value = "3")]
    q: String,
    /// Write the report here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn classify_cmd(a: ClassifyArgs) -> Result<i32> {
    let b = parse_rational(&a.b)?;
    let alpha = a.alpha.as_deref().map(parse_rational).transpose()?;
    let model: dlab_core::regime::Model = a.model.parse()?;
    let opts = ClassifyOptions {
        inlh_one_dim_extension: a.one_dim_extension,
    };
    let mut code = exit::SUCCESS;
    for q in parse_q_list(&a.q)? {
        let p = match model {
            dlab_core::regime::Model::Inls => ModelParams::inls(a.dim, b.clone(), q),
            dlab_core::regime::Model::Inlh => ModelParams::inlh(
                a.dim,
                alpha
                    .clone()
                    .ok_or_else(|| HarnessError::Invalid("inlh needs --alpha".into()))?,
                b.clone(),
                q,
            ),
        };
        match classify_with(&p, opts) {
            Ok(r) => {
                if matches!(a.format, OutputFormat::Text | OutputFormat::Both) {
                    print!("{}", regime_text(&r));
                }
                if matches!(a.format, OutputFormat::Json | OutputFormat::Both) {
                    println!("{}", regime_json(&r));
                }
            }
            Err(RegimeError::InvalidParams(msg)) => {
                eprintln!("{msg}");
                if matches!(a.format, OutputFormat::Json | OutputFormat::Both) {
                    println!("{}", invalid_json(&p, &msg));
                }
                code = exit::VALIDATION;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(code)
}

fn run_cmd(a: RunArgs) -> Result<i32> {
    let text = match &a.config {
        Some(path) => fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut o = Vec::new();
    let texts: [(&'static str, &'static str, &Option<String>); 9] = [
        ("model", "kind", &a.model),
        ("model", "b", &a.b),
        ("model", "q", &a.q),
        ("model", "alpha", &a.alpha),
        ("lattice", "L", &a.extent),
        ("time", "dt", &a.dt),
        ("time", "t0", &a.t0),
        ("time", "t1", &a.t1),
        ("time", "coeff_exponent", &a.coeff_exponent),
    ];
    for (section, key, value) in texts {
        if let Some(v) = value {
            o.push(Override::text(section, key, v.clone()));
        }
    }
    for (section, key, value) in [
        ("model", "N", a.dim),
        ("lattice", "n", a.n),
        ("time", "snapshots", a.snapshots),
    ] {
        if let Some(v) = value {
            o.push(Override::integer(section, key, v));
        }
    }
    if let Some(out) = &a.out {
        o.push(Override::text("output", "dir", out.display().to_string()));
    }
    let cfg = parse_config_with(&text, &o, a.force)?;
    let manifest = run(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&manifest)?);
    Ok(exit::SUCCESS)
}

fn sweep_cmd(a: SweepArgs) -> Result<i32> {
    let text = fs::read_to_string(&a.config)?;
    let base = parse_config_with(&text, &[], true)?;
    let qs = match (&a.q_list, &a.q_range) {
        (Some(list), None) => parse_q_list(list)?,
        (None, Some(range)) => parse_q_range(range)?,
        _ => {
            return Err(HarnessError::Invalid(
                "give exactly one of --q-list or --q-range".into(),
            ))
        }
    };
    let format: TableFormat = a.format.parse()?;
    let out = a.out.unwrap_or_else(|| base.output_dir.clone());
    fs::create_dir_all(&out)?;
    let report = sweep(
        &base,
        &qs,
        &out,
        workers_from_env()?,
        a.force,
        a.classify_only,
    )?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let name = match format {
        TableFormat::Csv => "sweep.csv",
        TableFormat::Jsonl => "sweep.jsonl",
    };
    export_table(&report, format, &out.join(name))?;
    let failed = report
        .rows
        .iter()
        .filter(|r| r.status != RowStatus::Ok)
        .count();
    eprintln!(
        "{} rows ({} not ok) -> {}",
        report.rows.len(),
        failed,
        out.join(name).display()
    );
    Ok(exit::SUCCESS)
}

fn verify_cmd(suite: &str) -> Result<i32> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse()?]
    };
    let mut all_ok = true;
    for s in suites {
        let report = run_suite(s)?;
        println!("{}", serde_json::to_string(&report)?);
        eprintln!(
            "{} {} ({:.1} s)",
            if report.passed { "PASS" } else { "FAIL" },
            report.suite,
            report.seconds
        );
        all_ok &= report.passed;
    }
    Ok(if all_ok {
        exit::SUCCESS
    } else {
        exit::ACCEPTANCE
    })
}

fn pcheck_cmd(a: PcheckArgs) -> Result<i32> {
    let cfg = PcheckConfig {
        points: a.n,
        amplitude: a.amplitude,
        b: parse_rational(&a.b)?,
        q: parse_rational(&a.q)?,
        ..PcheckConfig::default()
    };
    let report = pcheck(&cfg)?;
    let text = serde_json::to_string_pretty(&report)?;
    if let Some(path) = &a.out {
        fs::write(path, &text)?;
    }
    println!("{text}");
    let ok = report.max_residual <= 1e-3 && report.monotone_worst_drop <= 1e-4;
    Ok(if ok { exit::SUCCESS } else { exit::ACCEPTANCE })
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify(a) => classify_cmd(a),
        Command::Run(a) => run_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Verify { suite } => verify_cmd(&suite),
        Command::Pcheck(a) => pcheck_cmd(a),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
