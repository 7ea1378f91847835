//! `octnorm`: evaluate the tower norm, export unit-ball cross sections,
//! run the verification battery and inspect schedules.
//!
//! Exit codes are a stable contract: 0 success (for `verify`: every check
//! passed), 1 verification failure, 2 usage or parse errors, 3 numerical
//! failure.

mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{Config, OutputFormat};
use octnorm_core::calculus::{directional_derivative, StepSchedule};
use octnorm_core::slice::{comparison_slice, unit_sphere_slice};
use octnorm_core::verify::{run_check, VerifyOptions};
use octnorm_core::{
    equivalence_constants, level_norm, minkowski_oracle, TowerSpace, TowerVector,
};

#[derive(Parser)]
#[command(name = "octnorm", version, about = "Octahedral Gateaux-smooth norm tower toolkit")]
struct Cli {
    /// JSON configuration file (schedule, base dimension, tolerances, seed).
    #[arg(long, global = true)]
    config: Option<String>,

    /// Override the configured sampling seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,

    /// Output format where both are supported.
    #[arg(long, value_enum, global = true)]
    format: Option<OutputFormat>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the tower norm of a vector file (JSON, or CSV for bulk rows).
    Eval {
        /// Vector file: JSON {"base": [...], "coords": [...]} or .csv rows.
        file: String,
        /// Evaluate at this level (default: the vector's degree).
        #[arg(long)]
        level: Option<usize>,
    },
    /// Export a planar cross section of the unit ball as a polyline.
    Slice {
        /// First plane vector: a file path, or a token like b1 / e3.
        #[arg(long)]
        u: String,
        /// Second plane vector.
        #[arg(long)]
        v: String,
        /// Ball level to slice (default: the span of u and v).
        #[arg(long)]
        level: Option<usize>,
        /// Points around the circle.
        #[arg(long, default_value_t = 720)]
        res: usize,
        /// Slice the comparison ball (sum norm at the level) instead.
        #[arg(long, default_value_t = false)]
        comparison: bool,
    },
    /// Run one verification check, or `all`.
    Verify {
        /// shape | structure | equivalence | octahedral | case1 | case2 | smoothness | all
        check: String,
        /// Samples per check (default: per-check).
        #[arg(long)]
        samples: Option<usize>,
        /// Override the check's headline tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Octahedrality defect bound.
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Print the materialized schedule with derived constants.
    Schedule,
    /// Estimate both one-sided directional derivatives with the full trail.
    Derivative {
        /// Point vector file or token.
        x: String,
        /// Direction vector file or token.
        h: String,
        /// Largest step.
        #[arg(long, default_value_t = 0.0625)]
        t0: f64,
        /// Number of halvings.
        #[arg(long, default_value_t = 30)]
        halvings: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

struct Failure {
    message: String,
    code: ExitCode,
}

fn usage_error(message: impl Into<String>) -> Failure {
    Failure {
        message: message.into(),
        code: ExitCode::from(2),
    }
}

fn core_error(err: octnorm_core::Error) -> Failure {
    use octnorm_core::Error as E;
    // 3 = numerical failure, 2 = bad inputs or configuration
    let code = match err {
        E::NoConvergence { .. } | E::NotSmooth { .. } | E::SampleConstruction { .. } => 3,
        _ => 2,
    };
    Failure {
        message: err.to_string(),
        code: ExitCode::from(code),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let mut config = Config::load(cli.config.as_deref()).map_err(usage_error)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(format) = cli.format {
        config.output.format = format;
    }
    if let Some(out) = cli.out.clone() {
        config.output.path = Some(out);
    }
    let space = config.space().map_err(core_error)?;

    match cli.command {
        Command::Eval { file, level } => cmd_eval(&config, &space, &file, level),
        Command::Slice {
            u,
            v,
            level,
            res,
            comparison,
        } => cmd_slice(&config, &space, &u, &v, level, res, comparison),
        Command::Verify {
            check,
            samples,
            tol,
            epsilon,
        } => cmd_verify(&config, &space, &check, samples, tol, epsilon),
        Command::Schedule => cmd_schedule(&config, &space),
        Command::Derivative { x, h, t0, halvings } => {
            cmd_derivative(&config, &space, &x, &h, t0, halvings)
        }
    }
}

fn emit(config: &Config, text: &str) -> Result<(), Failure> {
    match &config.output.path {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| usage_error(format!("cannot write {path}: {e}"))),
    }
}

/// Parses a vector argument: `b<i>` (base basis), `e<j>` (coordinate basis)
/// or a path to a JSON vector file.
fn parse_vector(space: &TowerSpace, spec: &str) -> Result<TowerVector, Failure> {
    let dim = space.base.dim;
    if let Some(rest) = spec.strip_prefix('e') {
        if let Ok(j) = rest.parse::<usize>() {
            if j >= 1 && j <= space.max_level() {
                return Ok(TowerVector::basis_coord(dim, j));
            }
            return Err(usage_error(format!(
                "coordinate index {j} outside 1..={}",
                space.max_level()
            )));
        }
    }
    if let Some(rest) = spec.strip_prefix('b') {
        if let Ok(i) = rest.parse::<usize>() {
            if i >= 1 && i <= dim {
                return Ok(TowerVector::basis_base(dim, i));
            }
            return Err(usage_error(format!("base index {i} outside 1..={dim}")));
        }
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| usage_error(format!("cannot read vector {spec}: {e}")))?;
    let x: TowerVector =
        serde_json::from_str(&text).map_err(|e| usage_error(format!("vector {spec}: {e}")))?;
    if x.base.len() != dim {
        return Err(usage_error(format!(
            "vector {spec} has base dimension {}, config says {dim}",
            x.base.len()
        )));
    }
    Ok(x)
}

fn eval_one(
    space: &TowerSpace,
    x: &TowerVector,
    level: Option<usize>,
) -> Result<serde_json::Value, Failure> {
    let n = level.unwrap_or_else(|| x.degree());
    let result = level_norm(space, x, n).map_err(core_error)?;
    let oracle = minkowski_oracle(space, x, n, &space.tol).map_err(core_error)?;
    Ok(json!({
        "value": result.value,
        "per_level": result.per_level,
        "oracle": oracle,
        "tail_bound": x.ell1_tail(n),
    }))
}

fn cmd_eval(
    config: &Config,
    space: &TowerSpace,
    file: &str,
    level: Option<usize>,
) -> Result<ExitCode, Failure> {
    let value = if file.ends_with(".csv") {
        let text = std::fs::read_to_string(file)
            .map_err(|e| usage_error(format!("cannot read {file}: {e}")))?;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let x = TowerVector::from_csv_row(line, space.base.dim)
                .map_err(|e| usage_error(format!("{file}:{}: {e}", i + 1)))?;
            rows.push(eval_one(space, &x, level)?);
        }
        serde_json::Value::Array(rows)
    } else {
        let x = parse_vector(space, file)?;
        eval_one(space, &x, level)?
    };
    emit(config, &serde_json::to_string_pretty(&value).expect("json"))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_slice(
    config: &Config,
    space: &TowerSpace,
    u_spec: &str,
    v_spec: &str,
    level: Option<usize>,
    res: usize,
    comparison: bool,
) -> Result<ExitCode, Failure> {
    let u = parse_vector(space, u_spec)?;
    let v = parse_vector(space, v_spec)?;
    let level = level.unwrap_or_else(|| u.trimmed().degree().max(v.trimmed().degree()).max(1));
    let polyline = if comparison {
        comparison_slice(space, &u, &v, level, res)
    } else {
        unit_sphere_slice(space, &u, &v, level, res)
    }
    .map_err(core_error)?;
    let text = match config.output.format {
        OutputFormat::Csv => polyline.to_csv().trim_end().to_string(),
        OutputFormat::Json => serde_json::to_string_pretty(&polyline).expect("json"),
    };
    emit(config, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    config: &Config,
    space: &TowerSpace,
    check: &str,
    samples: Option<usize>,
    tol: Option<f64>,
    epsilon: f64,
) -> Result<ExitCode, Failure> {
    let opts = VerifyOptions {
        samples,
        seed: config.seed,
        tol,
        epsilon,
    };
    let reports = run_check(space, check, &opts).map_err(core_error)?;
    let text = serde_json::to_string_pretty(&reports).expect("json");
    emit(config, &text)?;
    for report in &reports {
        eprintln!(
            "{:<12} samples={:<5} violations={:<3} worst={:+.3e} {}",
            report.check_name,
            report.samples,
            report.violations,
            report.worst_violation,
            if report.passed { "PASS" } else { "FAIL" }
        );
    }
    if reports.iter().all(|r| r.passed) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_schedule(config: &Config, space: &TowerSpace) -> Result<ExitCode, Failure> {
    let schedule = &space.schedule;
    match config.output.format {
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = (1..=schedule.levels)
                .map(|n| schedule_row(space, n))
                .collect();
            emit(config, &serde_json::to_string_pretty(&rows).expect("json"))?;
        }
        OutputFormat::Csv => {
            let mut text =
                String::from("level,z,l,s,m,v,alpha,c,product_prefix,octahedral_ratio\n");
            for n in 1..=schedule.levels {
                let r = schedule_row(space, n);
                text.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    r["level"],
                    r["z"],
                    r["l"],
                    r["s"],
                    r["m"],
                    r["v"],
                    r["alpha"],
                    r["c"],
                    r["product_prefix"],
                    r["octahedral_ratio"]
                ));
            }
            emit(config, text.trim_end())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn schedule_row(space: &TowerSpace, n: usize) -> serde_json::Value {
    let f = space.schedule.shape_fn(n).expect("level in range");
    let constants = equivalence_constants(space, n).expect("level in range");
    let zl = f.z + f.l;
    json!({
        "level": n,
        "z": f.z,
        "l": f.l,
        "s": f.s,
        "m": f.m,
        "v": f.v,
        "alpha": f.alpha,
        "c": f.c,
        "product_prefix": constants.product,
        "octahedral_ratio": zl / (zl + 2.0),
    })
}

fn cmd_derivative(
    config: &Config,
    space: &TowerSpace,
    x_spec: &str,
    h_spec: &str,
    t0: f64,
    halvings: usize,
) -> Result<ExitCode, Failure> {
    let x = parse_vector(space, x_spec)?;
    let h = parse_vector(space, h_spec)?;
    let schedule = StepSchedule { t0, halvings };
    let estimate =
        directional_derivative(space, &x, &h, &schedule, 1e-6).map_err(core_error)?;
    emit(config, &serde_json::to_string_pretty(&estimate).expect("json"))?;
    Ok(ExitCode::SUCCESS)
}
