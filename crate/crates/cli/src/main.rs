use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sgpc_core::harness::{run_invariant_suite, solve_finest, sweep, ExperimentConfig};
use sgpc_core::pce::DistributionSpec;
use sgpc_core::{PolyFamily, TripleProductTensor};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] sgpc_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser)]
#[command(name = "sgpc", version, about = "Stochastic Galerkin convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print recurrence coefficients, Gauss rules and triple products.
    Tables {
        /// hermite | legendre | jacobi:ALPHA,BETA | laguerre:ALPHA
        #[arg(long, default_value = "hermite")]
        family: String,
        /// highest recurrence index
        #[arg(long, default_value_t = 8)]
        degree: usize,
        /// Gauss rule size
        #[arg(long, default_value_t = 5)]
        nodes: usize,
        /// chaos order of the triple-product table
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// number of i.i.d. components for the triple-product table
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// write recurrence.csv, gauss.csv and triple.txt here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve at the finest sweep values and print the error as JSON.
    Solve {
        config: PathBuf,
        /// also write the final chaos state as JSON
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Run the full convergence sweep of a config.
    Converge {
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Check,
}

fn parse_family(s: &str) -> Result<PolyFamily, CliError> {
    let (name, args) = s.split_once(':').unwrap_or((s, ""));
    let nums = || -> Result<Vec<f64>, CliError> {
        args.split(',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::Usage(format!("bad parameter '{t}': {e}")))
            })
            .collect()
    };
    let fam = match (name, nums()?.as_slice()) {
        ("hermite", []) => PolyFamily::hermite(),
        ("legendre", []) => PolyFamily::legendre(),
        ("jacobi", [a, b]) => PolyFamily::jacobi(*a, *b)?,
        ("laguerre", []) => PolyFamily::laguerre(0.0)?,
        ("laguerre", [a]) => PolyFamily::laguerre(*a)?,
        _ => return Err(CliError::Usage(format!("unknown family '{s}'"))),
    };
    Ok(fam)
}

fn read_config(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn write(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

fn tables(family: &str, degree: usize, nodes: usize, order: usize, dim: usize, out: Option<PathBuf>) -> Result<bool, CliError> {
    let fam = parse_family(family)?;
    let mut rec = String::from("k,a,b\n");
    for (k, (a, b)) in fam.recurrence_coeffs(degree)?.iter().enumerate() {
        let _ = writeln!(rec, "{k},{a:.17e},{b:.17e}");
    }
    let rule = fam.gauss_rule(nodes)?;
    let mut gauss = String::from("node,weight\n");
    for (z, w) in rule.nodes.iter().zip(&rule.weights) {
        let _ = writeln!(gauss, "{z:.17e},{w:.17e}");
    }
    let dist = DistributionSpec::iid(fam, dim)?;
    let triple = TripleProductTensor::new(&dist, order)?.to_text();
    match out {
        Some(dir) => {
            std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                path: dir.clone(),
                source,
            })?;
            write(&dir.join("recurrence.csv"), &rec)?;
            write(&dir.join("gauss.csv"), &gauss)?;
            write(&dir.join("triple.txt"), &triple)?;
        }
        None => {
            println!("# recurrence\n{rec}\n# gauss\n{gauss}\n# triple\n{triple}");
        }
    }
    Ok(true)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Tables {
            family,
            degree,
            nodes,
            order,
            dim,
            out,
        } => tables(&family, degree, nodes, order, dim, out),
        Command::Solve { config, state } => {
            let cfg = read_config(&config)?;
            let summary = solve_finest(&cfg)?;
            if let Some(p) = state {
                write(&p, &serde_json::to_string_pretty(&summary.state)?)?;
            }
            let brief = serde_json::json!({
                "n": summary.n,
                "m": summary.m,
                "time_steps": summary.time_steps,
                "error": summary.error,
                "runtime_s": summary.runtime_s,
                "aliasing_probe": summary.aliasing_probe,
            });
            println!("{}", serde_json::to_string_pretty(&brief)?);
            Ok(true)
        }
        Command::Converge { config, csv, json } => {
            let mut cfg = read_config(&config)?;
            if csv.is_some() {
                cfg.output.csv = csv;
            }
            if json.is_some() {
                cfg.output.json = json;
            }
            let report = sweep(&cfg)?;
            report.write_outputs(&cfg.output)?;
            for axis in &report.axes {
                let slope = axis.fit.map_or("-".to_string(), |f| format!("{:.3} ± {:.3}", f.slope, f.slope_ci95));
                println!("axis {:<10} slope {slope}", axis.axis.name());
            }
            for e in &report.expectations {
                let tag = if e.passed { "PASS" } else { "FAIL" };
                println!("{tag} {}: {}", e.expectation.axis.name(), e.detail);
            }
            if cfg.output.csv.is_none() && cfg.output.json.is_none() {
                print!("{}", report.to_csv());
            }
            Ok(report.passed)
        }
        Command::Check => {
            let results = run_invariant_suite();
            for r in &results {
                let tag = if r.passed { "PASS" } else { "FAIL" };
                println!("{tag} {}: {}", r.name, r.detail);
            }
            Ok(results.iter().all(|r| r.passed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
