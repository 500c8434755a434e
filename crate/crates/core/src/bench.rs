//! Experiment runs and their artifacts: trajectories, certificates, fronts,
//! multi-start sweeps and replayable manifests.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::criticality::{self, CritError, CriticalityCertificate, FritzJohnCertificate, Verdict, CERTIFICATE_TOL};
use crate::linalg;
use crate::oracle::{self, GridPoint, GridSpec, OracleError};
use crate::ppa::{self, PpaConfig, PpaError, Termination, Trajectory};
use crate::problem::{ProblemError, ProblemFile};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Fritz–John residual accepted as a passing certificate.
pub const FJ_PASS_TOL: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Ppa(#[from] PpaError),
    #[error(transparent)]
    Crit(#[from] CritError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("subsolver failure: {0}")]
    Subsolver(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: &Path, contents: &str) -> Result<(), BenchError> {
    std::fs::write(path, contents).map_err(io_err(path))
}

/// Per-iteration CSV: `k, x_1..x_n, f_1..f_m, step_norm, dominance_defect,
/// fj_residual`. Floats use the shortest representation that round-trips.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let first = &traj.iterates[0];
    let mut header = vec!["k".to_string()];
    header.extend((1..=first.x.len()).map(|i| format!("x_{i}")));
    header.extend((1..=first.f_values.len()).map(|i| format!("f_{i}")));
    header.extend(["step_norm", "dominance_defect", "fj_residual"].map(String::from));
    let mut out = header.join(",");
    out.push('\n');
    for it in &traj.iterates {
        let mut row = vec![it.k.to_string()];
        row.extend(it.x.iter().chain(&it.f_values).map(|v| format!("{v:?}")));
        row.extend([it.step_norm, it.dominance_defect, it.fj_residual].map(|v| format!("{v:?}")));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemRef {
    pub name: String,
    pub path: PathBuf,
}

/// Artifact file names, relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub trajectory_json: String,
    pub trajectory_csv: String,
    pub certificate_json: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub problem: ProblemRef,
    pub config: PpaConfig,
    pub seed: u64,
    pub x0: Vec<f64>,
    pub artifacts: Artifacts,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub termination: Termination,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunCertificates {
    pub point: Vec<f64>,
    pub criticality: Option<CriticalityCertificate>,
    pub fritz_john: Option<FritzJohnCertificate>,
    pub hull_stationarity: Option<criticality::HullStationarity>,
}

/// Runs the method on a problem. The seed drives the subsolver's random
/// starts; `x0` defaults to the problem's starting point.
pub fn execute(problem: &ProblemFile, cfg: &PpaConfig, seed: u64, x0: Option<&[f64]>) -> Result<Trajectory, BenchError> {
    let mut cfg = cfg.clone();
    cfg.subsolver.seed = seed;
    let x0 = x0.unwrap_or(&problem.x0);
    Ok(ppa::run(&problem.objectives, &problem.feasible_set, x0, &cfg)?)
}

/// Runs and writes `<name>-seed<seed>.{trajectory.json, csv, certificate.json,
/// manifest.json}` into `out_dir`.
pub fn cmd_run(
    problem_path: &Path,
    cfg: &PpaConfig,
    seed: u64,
    out_dir: &Path,
) -> Result<(RunManifest, Trajectory), BenchError> {
    let problem = ProblemFile::load(problem_path)?;
    let traj = execute(&problem, cfg, seed, None)?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let stem = format!("{}-seed{seed}", problem.name);
    let artifacts = Artifacts {
        trajectory_json: format!("{stem}.trajectory.json"),
        trajectory_csv: format!("{stem}.csv"),
        certificate_json: format!("{stem}.certificate.json"),
    };
    write(&out_dir.join(&artifacts.trajectory_json), &to_json(&traj))?;
    write(&out_dir.join(&artifacts.trajectory_csv), &trajectory_csv(&traj))?;
    let certs = RunCertificates {
        point: traj.last().x.clone(),
        criticality: traj.final_criticality.clone(),
        fritz_john: traj.final_fritz_john.clone(),
        hull_stationarity: traj.final_hull_stationarity.clone(),
    };
    write(&out_dir.join(&artifacts.certificate_json), &to_json(&certs))?;
    let manifest = RunManifest {
        problem: ProblemRef {
            name: problem.name.clone(),
            path: std::fs::canonicalize(problem_path).map_err(io_err(problem_path))?,
        },
        config: traj.config_echo.clone(),
        seed,
        x0: problem.x0.clone(),
        artifacts,
        version: VERSION.to_string(),
        timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        termination: traj.termination.clone(),
        iterations: traj.iterates.len() - 1,
    };
    write(&manifest_path(out_dir, &stem), &to_json(&manifest))?;
    if let Termination::SubsolverFailure { message } = &traj.termination {
        return Err(BenchError::Subsolver(message.clone()));
    }
    Ok((manifest, traj))
}

pub fn manifest_path(out_dir: &Path, stem: &str) -> PathBuf {
    out_dir.join(format!("{stem}.manifest.json"))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifacts serialize");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub identical: bool,
    pub recorded_bytes: usize,
    pub replayed_bytes: usize,
    /// First differing line, one-based.
    pub first_difference: Option<usize>,
}

/// Reruns a manifest and compares the trajectory CSV byte for byte.
pub fn replay(manifest_file: &Path) -> Result<ReplayReport, BenchError> {
    let text = std::fs::read_to_string(manifest_file).map_err(io_err(manifest_file))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| BenchError::Parse {
        path: manifest_file.to_path_buf(),
        message: e.to_string(),
    })?;
    let dir = manifest_file.parent().unwrap_or(Path::new("."));
    let csv_path = dir.join(&manifest.artifacts.trajectory_csv);
    let recorded = std::fs::read(&csv_path).map_err(io_err(&csv_path))?;
    let problem = ProblemFile::load(&manifest.problem.path)?;
    let traj = execute(&problem, &manifest.config, manifest.seed, Some(&manifest.x0))?;
    let replayed = trajectory_csv(&traj).into_bytes();
    let first_difference = (recorded != replayed).then(|| {
        let a = String::from_utf8_lossy(&recorded).lines().map(String::from).collect::<Vec<_>>();
        let b = String::from_utf8_lossy(&replayed).lines().map(String::from).collect::<Vec<_>>();
        (0..a.len().max(b.len())).find(|&i| a.get(i) != b.get(i)).unwrap_or(0) + 1
    });
    Ok(ReplayReport {
        identical: recorded == replayed,
        recorded_bytes: recorded.len(),
        replayed_bytes: replayed.len(),
        first_difference,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub point: Vec<f64>,
    pub tol: f64,
    pub critical: bool,
    pub criticality: CriticalityCertificate,
    pub fritz_john: Option<FritzJohnCertificate>,
    pub fritz_john_error: Option<String>,
}

/// Criticality and Fritz–John certificates at `point`.
pub fn cmd_certify(problem: &ProblemFile, point: &[f64], tol: f64) -> Result<CertifyReport, BenchError> {
    let f = &problem.objectives;
    let s = &problem.feasible_set;
    let criticality = criticality::is_pareto_critical(f, s, point, tol)?;
    let (fritz_john, fritz_john_error) = match criticality::fritz_john_residual(f, &[], s, point) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(CertifyReport {
        point: point.to_vec(),
        tol,
        critical: criticality.verdict == Verdict::Critical,
        criticality,
        fritz_john,
        fritz_john_error,
    })
}

/// Grid over the set's bounding box.
pub fn problem_grid(problem: &ProblemFile, points_per_axis: usize) -> Result<GridSpec, OracleError> {
    let (lo, hi) = problem.feasible_set.bounding_box(&problem.x0);
    GridSpec::new(lo, hi, points_per_axis)
}

pub fn cmd_oracle(problem: &ProblemFile, points_per_axis: usize) -> Result<Vec<GridPoint>, BenchError> {
    let grid = problem_grid(problem, points_per_axis)?;
    Ok(oracle::grid_weak_pareto(&problem.objectives, &grid, Some(&problem.feasible_set))?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub start_index: usize,
    pub x0: Vec<f64>,
    pub terminal: Option<Vec<f64>>,
    pub termination: Option<Termination>,
    pub iterations: usize,
    pub fj_residual: Option<f64>,
    pub certified: bool,
    pub pareto_critical: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub problem: String,
    pub seed: u64,
    pub runs: Vec<SweepRun>,
    /// Share of runs whose final Fritz–John residual is within
    /// [`FJ_PASS_TOL`].
    pub certificate_pass_rate: f64,
    /// Share of terminals that pass the criticality test at
    /// [`CERTIFICATE_TOL`].
    pub critical_rate: f64,
    pub oracle_points: Option<usize>,
    /// Largest distance from a terminal point to the oracle front.
    pub coverage_distance: Option<f64>,
    /// Largest distance from an oracle point to the terminal set.
    pub front_gap: Option<f64>,
}

/// Runs the method from `starts` points drawn uniformly over the feasible
/// box, concurrently, and compares the terminals with the grid oracle when
/// `n <= 3`.
pub fn cmd_sweep(
    problem: &ProblemFile,
    cfg: &PpaConfig,
    starts: usize,
    seed: u64,
    oracle_points_per_axis: usize,
) -> Result<SweepReport, BenchError> {
    let s = &problem.feasible_set;
    let (lo, hi) = s.bounding_box(&problem.x0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0s: Vec<Vec<f64>> = (0..starts).map(|_| s.sample(&lo, &hi, &mut rng)).collect();
    let runs: Vec<SweepRun> = x0s
        .into_par_iter()
        .enumerate()
        .map(|(i, x0)| match execute(problem, cfg, seed.wrapping_add(i as u64), Some(&x0)) {
            Ok(t) => {
                let fj = t.final_fritz_john.as_ref().map(|c| c.residual);
                SweepRun {
                    start_index: i,
                    terminal: Some(t.last().x.clone()),
                    termination: Some(t.termination.clone()),
                    iterations: t.iterates.len() - 1,
                    fj_residual: fj,
                    certified: fj.is_some_and(|r| r <= FJ_PASS_TOL)
                        && !matches!(t.termination, Termination::SubsolverFailure { .. }),
                    pareto_critical: t
                        .final_criticality
                        .as_ref()
                        .is_some_and(|c| c.verdict == Verdict::Critical),
                    error: None,
                    x0,
                }
            }
            Err(e) => SweepRun {
                start_index: i,
                x0,
                terminal: None,
                termination: None,
                iterations: 0,
                fj_residual: None,
                certified: false,
                pareto_critical: false,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let total = runs.len().max(1) as f64;
    let certificate_pass_rate = runs.iter().filter(|r| r.certified).count() as f64 / total;
    let critical_rate = runs.iter().filter(|r| r.pareto_critical).count() as f64 / total;
    let terminals: Vec<&Vec<f64>> = runs.iter().filter_map(|r| r.terminal.as_ref()).collect();
    let (oracle_points, coverage_distance, front_gap) = if problem.dimension <= oracle::MAX_DIM {
        let front = cmd_oracle(problem, oracle_points_per_axis)?;
        let nearest = |p: &[f64], set: &mut dyn Iterator<Item = &[f64]>| set.map(|q| linalg::dist(p, q)).fold(f64::INFINITY, f64::min);
        let coverage = terminals
            .iter()
            .map(|t| nearest(t, &mut front.iter().map(|g| g.x.as_slice())))
            .fold(0.0, f64::max);
        let gap = front
            .iter()
            .map(|g| nearest(&g.x, &mut terminals.iter().map(|t| t.as_slice())))
            .fold(0.0, f64::max);
        (Some(front.len()), Some(coverage), Some(gap))
    } else {
        (None, None, None)
    };
    Ok(SweepReport {
        problem: problem.name.clone(),
        seed,
        runs,
        certificate_pass_rate,
        critical_rate,
        oracle_points,
        coverage_distance,
        front_gap,
    })
}

/// Default certificate tolerance for `certify`.
pub const DEFAULT_CERTIFY_TOL: f64 = CERTIFICATE_TOL;
