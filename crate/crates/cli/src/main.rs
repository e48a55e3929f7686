mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use euler_semiflow::check::{check_trajectory, diagnostics, diagnostics_csv, CheckSuite};
use euler_semiflow::equilibrium::{equilibrium_state, maximizer_audit};
use euler_semiflow::io::{read_trajectory, to_json, write_atomic, IoError};
use euler_semiflow::selection::{order_dafermos, order_sigma, sieve_select, Alpha, OrderParams, SelectionError};
use euler_semiflow::solver::{generate_riemann_candidates, riemann_exact, simulate, SolutionSet};
use euler_semiflow::{GasConstants, Trajectory};
use serde::Serialize;
use thiserror::Error;

use manifest::RunManifest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Select(String),
    #[error("{0}")]
    Corrupt(String),
    #[error("{0}")]
    Io(String),
    #[error("{0} check(s) failed")]
    CheckFailed(usize),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Select(_) => 4,
            CliError::Corrupt(_) => 5,
            CliError::Io(_) => 6,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Corrupt(_) => CliError::Corrupt(e.to_string()),
            IoError::Io { .. } => CliError::Io(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "euler-semiflow", version, about = "Dissipative Euler solutions and semiflow selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scheme of the config and write trajectories and diagnostics.
    Simulate {
        config: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Scheme candidates plus the exact and expansion-shock solutions of a
    /// Riemann preset.
    Riemann {
        config: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run the Laplace sieve on a directory of `*.traj.json` files.
    Select {
        candidates: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        lambda0: Option<f64>,
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long = "n")]
        n_funcs: Option<usize>,
        #[arg(long)]
        x_scale: Option<f64>,
        #[arg(long)]
        tie_tol: Option<f64>,
        /// tanh or atan
        #[arg(long)]
        alpha: Option<String>,
        /// Number of cosine modes in the stage weights.
        #[arg(long)]
        modes: Option<usize>,
    },
    /// Check the invariants of a stored trajectory.
    Check {
        trajectory: PathBuf,
        /// all, ledger, entropy or defects
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Closed-form equilibrium and, optionally, the sampling audit.
    Equilibrium {
        #[arg(long)]
        mass: f64,
        #[arg(long)]
        energy: f64,
        #[arg(long)]
        length: f64,
        #[arg(long, default_value_t = 1.4)]
        gamma: f64,
        #[arg(long)]
        audit: Option<usize>,
        #[arg(long, default_value_t = 32)]
        cells: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate { config, out } => cmd_simulate(&config, &out),
        Command::Riemann { config, out } => cmd_riemann(&config, &out),
        Command::Select { candidates, out, lambda0, zeta, n_funcs, x_scale, tie_tol, alpha, modes } => {
            let d = config::SelectionSection::default();
            let alpha = match alpha.as_deref() {
                None => d.alpha,
                Some("tanh") => Alpha::Tanh,
                Some("atan") => Alpha::Atan,
                Some(other) => return Err(CliError::Parse(format!("unknown alpha `{other}`"))),
            };
            let section = config::SelectionSection {
                lambda0: lambda0.unwrap_or(d.lambda0),
                zeta: zeta.unwrap_or(d.zeta),
                n_funcs: n_funcs.unwrap_or(d.n_funcs),
                alpha,
                x_scale: x_scale.unwrap_or(d.x_scale),
                modes: modes.unwrap_or(d.modes),
                tie_tol: tie_tol.unwrap_or(d.tie_tol),
            };
            cmd_select(&candidates, &out, &section)
        }
        Command::Check { trajectory, suite } => cmd_check(&trajectory, &suite),
        Command::Equilibrium { mass, energy, length, gamma, audit, cells, seed } => {
            cmd_equilibrium(mass, energy, length, gamma, audit, cells, seed)
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes()).map_err(CliError::from)
}

fn traj_name(id: &str) -> String {
    format!("{id}.traj.json")
}

fn diag_name(id: &str) -> String {
    format!("{id}.diag.csv")
}

fn write_members(out: &Path, members: &[Trajectory<f64>]) -> Result<(), CliError> {
    for t in members {
        write_text(&out.join(traj_name(t.id())), &to_json(t))?;
        write_text(&out.join(diag_name(t.id())), &diagnostics_csv(&diagnostics(t)))?;
        println!("{}", out.join(traj_name(t.id())).display());
    }
    Ok(())
}

fn cmd_simulate(config_path: &Path, out: &Path) -> Result<(), CliError> {
    let (config, bytes) = config::read(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let gas = config.gas()?;
    let datum = config.datum(base)?;
    let suite = config.suite()?;
    let seed = manifest::seed(config.run.seed)?;
    let outputs = suite.iter().flat_map(|c| [traj_name(&c.id()), diag_name(&c.id())]).collect();
    create_dir(out)?;
    RunManifest::new("simulate", &bytes, seed, vec![config_path.display().to_string()], outputs).write(out)?;
    let mut members = Vec::with_capacity(suite.len());
    for cfg in &suite {
        members.push(simulate(&datum, cfg, &gas).map_err(|e| CliError::Solver(format!("{}: {e}", cfg.id())))?);
    }
    write_members(out, &members)
}

fn cmd_riemann(config_path: &Path, out: &Path) -> Result<(), CliError> {
    let (config, bytes) = config::read(config_path)?;
    let gas = config.gas()?;
    let problem = config
        .riemann_problem()?
        .ok_or_else(|| CliError::Parse("riemann needs a `sod` or `riemann` datum preset".into()))?;
    let suite = config.suite()?;
    let seed = manifest::seed(config.run.seed)?;
    let exact = riemann_exact(&problem.datum, &gas).map_err(|e| CliError::Solver(e.to_string()))?;
    eprintln!("p* = {:e}, u* = {:e}", exact.p_star, exact.u_star);
    create_dir(out)?;
    RunManifest::new("riemann", &bytes, seed, vec![config_path.display().to_string()], vec!["*.traj.json".into(), "*.diag.csv".into()])
        .write(out)?;
    let set = generate_riemann_candidates(&problem, &suite, &gas).map_err(|e| CliError::Solver(e.to_string()))?;
    for (id, err) in &set.failures {
        eprintln!("candidate {id} failed: {err}");
    }
    write_members(out, set.members())
}

#[derive(Serialize)]
struct SelectReport {
    chosen: String,
    params: config::SelectionSection,
    selection: euler_semiflow::selection::SelectionReport<f64>,
    /// `[a, b, order_sigma(a, b), order_dafermos(a, b)]` for every ordered pair.
    orders: Vec<(String, String, String, String)>,
}

fn relation_name<T: Serialize>(r: &T) -> String {
    serde_json::to_value(r).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn cmd_select(dir: &Path, out: &Path, section: &config::SelectionSection) -> Result<(), CliError> {
    let params = section.params();
    params.validate().map_err(|e| CliError::Parse(e.to_string()))?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".traj.json")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Select(format!("no *.traj.json files in {}", dir.display())));
    }
    let mut members = Vec::with_capacity(files.len());
    for f in &files {
        members.push(read_trajectory::<f64>(f)?);
    }
    let set = SolutionSet::new(members).map_err(|e| CliError::Select(e.to_string()))?;
    let (chosen, report) = sieve_select(&set, &params).map_err(|e: SelectionError| CliError::Select(e.to_string()))?;
    let order_params = OrderParams::default().with_tol(params.tie_tol);
    let mut orders = Vec::new();
    for a in set.members() {
        for b in set.members() {
            if a.id() == b.id() {
                continue;
            }
            let s = order_sigma(a, b, params.tie_tol).map_err(|e| CliError::Select(e.to_string()))?;
            let d = order_dafermos(a, b, &order_params).map_err(|e| CliError::Select(e.to_string()))?;
            orders.push((a.id().into(), b.id().into(), relation_name(&s.relation), relation_name(&d.relation)));
        }
    }
    let report = SelectReport { chosen: chosen.id().into(), params: section.clone(), selection: report, orders };
    create_dir(out)?;
    write_text(&out.join("report.json"), &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    write_text(&out.join("selected.json"), &to_json(chosen))?;
    println!("{}", chosen.id());
    Ok(())
}

fn cmd_check(path: &Path, suite: &str) -> Result<(), CliError> {
    let suite = CheckSuite::parse(suite).ok_or_else(|| CliError::Parse(format!("unknown check suite `{suite}`")))?;
    let traj = read_trajectory::<f64>(path)?;
    let results = check_trajectory(&traj, suite);
    println!("{}", serde_json::to_string_pretty(&results).expect("results serialize"));
    let failed = results.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::CheckFailed(failed));
    }
    Ok(())
}

#[derive(Serialize)]
struct EquilibriumOutput {
    state: euler_semiflow::EquilibriumState<f64>,
    audit: Option<euler_semiflow::equilibrium::MaximizerAudit<f64>>,
    seed: u64,
}

fn cmd_equilibrium(mass: f64, energy: f64, length: f64, gamma: f64, audit: Option<usize>, cells: usize, seed: u64) -> Result<(), CliError> {
    let gas = GasConstants::new(gamma).map_err(|e| CliError::Parse(e.to_string()))?;
    let state = equilibrium_state(mass, energy, length, &gas).map_err(|e| CliError::Parse(e.to_string()))?;
    let seed = manifest::seed(seed)?;
    let audit = audit
        .map(|n| maximizer_audit(&state, n, cells, seed, &gas))
        .transpose()
        .map_err(|e| CliError::Solver(e.to_string()))?;
    let violations = audit.as_ref().map_or(0, |a| a.violations);
    println!("{}", serde_json::to_string_pretty(&EquilibriumOutput { state, audit, seed }).expect("output serializes"));
    if violations > 0 {
        return Err(CliError::CheckFailed(violations));
    }
    Ok(())
}
