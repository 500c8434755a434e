use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use vecprox::bench::{self, DEFAULT_CERTIFY_TOL};
use vecprox::oracle;
use vecprox::ppa::{LambdaSchedule, PpaConfig, Termination};
use vecprox::problem::{self, ProblemFile, CORPUS_ENV};

/// Vector proximal point runs, certificates and oracles.
///
/// Exit codes: 0 success, 1 negative verdict, 2 error.
#[derive(Parser)]
#[command(name = "vecprox", version)]
struct Cli {
    /// Directory searched for problem names such as `P2`.
    #[arg(long, global = true, env = CORPUS_ENV, default_value = "corpus")]
    corpus: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the method and write trajectory, certificate and manifest files.
    Run {
        problem: String,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Test a point for criticality; exits 0 iff it is critical.
    Certify {
        problem: String,
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_CERTIFY_TOL)]
        tol: f64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Grid weak-Pareto front as CSV (`x_1..x_n, f_1..f_m`).
    Oracle {
        problem: String,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Write `<name>.front.csv` here instead of printing to stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Multi-start runs with coverage against the oracle front; exits 0 iff
    /// every run is certified.
    Sweep {
        problem: String,
        #[arg(long, default_value_t = 20)]
        starts: usize,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Rerun a manifest and compare its trajectory CSV byte for byte.
    Replay { manifest: PathBuf },
}

#[derive(Args)]
struct RunFlags {
    /// JSON file with (part of) a run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "runs")]
    out_dir: PathBuf,
    #[arg(long)]
    step_tol: Option<f64>,
    /// Constant proximal parameter.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

impl RunFlags {
    fn config(&self) -> Result<PpaConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => PpaConfig::default(),
        };
        if let Some(t) = self.step_tol {
            cfg.step_tol = t;
        }
        if let Some(l) = self.lambda {
            cfg.lambda = LambdaSchedule::Constant { value: l };
        }
        if let Some(m) = self.max_iters {
            cfg.max_iters = m;
        }
        Ok(cfg)
    }
}

fn termination_label(t: &Termination) -> String {
    match t {
        Termination::CriticalPoint => "critical".into(),
        Termination::StepTol => "step_tol".into(),
        Termination::MaxIters => "max_iters".into(),
        Termination::SubsolverFailure { message } => format!("subsolver_failure ({message})"),
    }
}

fn load(reference: &str, corpus: &Path) -> Result<(PathBuf, ProblemFile)> {
    let path = problem::resolve(reference, corpus);
    let p = ProblemFile::load(&path)?;
    Ok((path, p))
}

fn write_json<T: serde::Serialize>(path: &Path, v: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(v)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { problem, flags } => {
            let path = problem::resolve(&problem, &cli.corpus);
            let cfg = flags.config()?;
            let (manifest, traj) = bench::cmd_run(&path, &cfg, flags.seed, &flags.out_dir)?;
            let last = traj.last();
            let verdict = traj
                .final_criticality
                .as_ref()
                .map_or("unknown".to_string(), |c| format!("{:?}", c.verdict).to_lowercase());
            println!(
                "{}: terminated by {} after {} iterations at x = {:?} (final point: {verdict})",
                manifest.problem.name,
                termination_label(&traj.termination),
                manifest.iterations,
                last.x
            );
            println!(
                "manifest: {}",
                bench::manifest_path(&flags.out_dir, &format!("{}-seed{}", manifest.problem.name, flags.seed)).display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify {
            problem,
            point,
            tol,
            out_dir,
        } => {
            let (_, p) = load(&problem, &cli.corpus)?;
            let report = bench::cmd_certify(&p, &point, tol)?;
            println!(
                "{} at {:?}: {} (residual {:e}, Fritz-John residual {})",
                p.name,
                point,
                if report.critical { "critical" } else { "not critical" },
                report.criticality.residual,
                report.fritz_john.as_ref().map_or("n/a".to_string(), |c| format!("{:e}", c.residual))
            );
            if let Some(dir) = out_dir {
                write_json(&dir.join(format!("{}.certify.json", p.name)), &report)?;
            }
            Ok(if report.critical { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Oracle { problem, points, out_dir } => {
            let (_, p) = load(&problem, &cli.corpus)?;
            let front = bench::cmd_oracle(&p, points)?;
            let csv = oracle::front_csv(&front, p.dimension, p.objectives.m());
            match out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let path = dir.join(format!("{}.front.csv", p.name));
                    std::fs::write(&path, csv)?;
                    println!("{} front points written to {}", front.len(), path.display());
                }
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            problem,
            starts,
            points,
            flags,
        } => {
            let (_, p) = load(&problem, &cli.corpus)?;
            let cfg = flags.config()?;
            let report = bench::cmd_sweep(&p, &cfg, starts, flags.seed, points)?;
            let path = flags.out_dir.join(format!("{}-seed{}.sweep.json", p.name, flags.seed));
            write_json(&path, &report)?;
            let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |d| format!("{d:.6}"));
            println!(
                "{}: {} runs, certificate pass rate {:.3}, critical rate {:.3}, coverage distance {}, front gap {}",
                p.name,
                report.runs.len(),
                report.certificate_pass_rate,
                report.critical_rate,
                fmt(report.coverage_distance),
                fmt(report.front_gap)
            );
            println!("report: {}", path.display());
            Ok(if report.certificate_pass_rate == 1.0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Replay { manifest } => {
            let r = bench::replay(&manifest)?;
            if r.identical {
                println!("identical ({} bytes)", r.recorded_bytes);
                Ok(ExitCode::SUCCESS)
            } else {
                println!(
                    "differs: recorded {} bytes, replayed {} bytes, first difference on line {}",
                    r.recorded_bytes,
                    r.replayed_bytes,
                    r.first_difference.unwrap_or(0)
                );
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
