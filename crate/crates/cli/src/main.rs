use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use chronocorr::bases::{gellmann_basis, pauli_basis, wigner_qutrit_basis};
use chronocorr::dynamics::{Channel, ChannelKind};
use chronocorr::optmeas::SearchOptions;
use chronocorr::qmat::matrix_to_json;
use chronocorr::robustness::{mub_pvms, Measure};
use chronocorr::sot::{nsit_check, Construction};
use chronocorr::HermitianOperator;
use chronocorr_cli::config::{Column, ExperimentConfig, Grid, InitialState};
use chronocorr_cli::output::{format_number, write_csvs, write_file};
use chronocorr_cli::plot::emit_plots;
use chronocorr_cli::sweep::{evaluate_column, run_sweep, state_over_time};
use chronocorr_cli::CliError;

const THREADS_VAR: &str = "CHRONOCORR_THREADS";

#[derive(Parser)]
#[command(
    name = "chronocorr",
    version,
    about = "States over time and temporal correlation robustness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a γt sweep from a configuration file and write CSV and SVG output.
    Sweep {
        config: PathBuf,
        /// Write CSV only.
        #[arg(long)]
        no_plots: bool,
    },
    /// Print or write the state over time as a JSON matrix.
    Pdo {
        /// vacuum, balanced_superposition, maximally_mixed, or a JSON matrix file.
        state: String,
        /// amplitude_damping, phase_damping, depolarizing or identity.
        channel: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.0)]
        gamma_t: f64,
        /// pdo or wigner (qutrit only).
        #[arg(long, default_value = "pdo")]
        construction: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one measure at one point.
    Measure {
        /// f, ter, er, tsr, tnr, lhv-tnr or g.
        measure: String,
        #[command(flatten)]
        point: PointArgs,
        /// pdo or wigner (qutrit only).
        #[arg(long, default_value = "pdo")]
        construction: String,
        /// Maximize TSR or TNR over measurement bases.
        #[arg(long)]
        optimize: bool,
        #[arg(long, default_value_t = SearchOptions::default().restarts)]
        restarts: usize,
        #[arg(long, default_value_t = SearchOptions::default().max_evaluations)]
        max_evaluations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check no-signaling in time for mutually unbiased measurements.
    Nsit {
        #[command(flatten)]
        point: PointArgs,
    },
    /// Print operator bases as JSON.
    Bases {
        /// Print every element matrix.
        #[arg(long)]
        dump: bool,
        /// Restrict to one dimension.
        #[arg(long)]
        dim: Option<usize>,
    },
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// vacuum, balanced_superposition, maximally_mixed, or a JSON matrix file.
    #[arg(long, default_value = "maximally_mixed")]
    state: String,
    #[arg(long, default_value = "depolarizing")]
    channel: String,
    #[arg(long, default_value_t = 0.0)]
    gamma_t: f64,
    /// Number of mutually unbiased measurement settings.
    #[arg(long, default_value_t = 2)]
    settings: usize,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_state(s: &str) -> InitialState {
    InitialState::parse_name(s).unwrap_or_else(|| InitialState::File(PathBuf::from(s)))
}

fn parse_channel(s: &str) -> Result<ChannelKind, CliError> {
    s.parse().map_err(CliError::from)
}

fn parse_construction(s: &str, dim: usize) -> Result<Construction, CliError> {
    match s {
        "pdo" => Ok(Construction::Pdo),
        "wigner" if dim == 3 => Ok(Construction::Wigner),
        "wigner" => Err(config_err("construction wigner needs dim = 3")),
        other => Err(config_err(format!("unknown construction '{other}'"))),
    }
}

fn check_dim(dim: usize) -> Result<(), CliError> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(config_err(format!("dim must be 2 or 3, got {dim}")))
    }
}

fn check_gamma_t(gamma_t: f64) -> Result<(), CliError> {
    if gamma_t.is_finite() && gamma_t >= 0.0 {
        Ok(())
    } else {
        Err(config_err(format!(
            "gamma_t must be finite and non-negative, got {gamma_t}"
        )))
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| config_err(format!("{THREADS_VAR} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| config_err(format!("cannot build thread pool: {e}")))
}

fn sweep(config: &Path, no_plots: bool) -> Result<(), CliError> {
    let cfg = ExperimentConfig::from_file(config)?;
    let tables = run_sweep(&cfg)?;
    for path in write_csvs(&tables, &cfg.output)? {
        println!("wrote {}", path.display());
    }
    if !no_plots {
        let report = emit_plots(&tables, &cfg.output)?;
        if let Some(notice) = report.notice {
            eprintln!("{notice}");
        }
        for path in report.written {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn pdo(
    state: &str,
    channel: &str,
    dim: usize,
    gamma_t: f64,
    construction: &str,
    out: Option<&Path>,
) -> Result<(), CliError> {
    check_dim(dim)?;
    check_gamma_t(gamma_t)?;
    let rho = parse_state(state).resolve(dim)?;
    let ch = Channel::new(dim, parse_channel(channel)?, gamma_t)?;
    let r = state_over_time(&rho, &ch, parse_construction(construction, dim)?)?;
    let text = serde_json::to_string_pretty(&matrix_to_json(r.operator().matrix()))
        .map_err(|e| CliError::Numerical(e.to_string()))?
        + "\n";
    match out {
        Some(path) => {
            write_file(path, &text)?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn point_config(
    p: &PointArgs,
    construction: Construction,
    columns: Vec<Column>,
) -> Result<(ExperimentConfig, HermitianOperator), CliError> {
    check_dim(p.dim)?;
    check_gamma_t(p.gamma_t)?;
    if p.settings == 0 || p.settings > p.dim + 1 {
        return Err(config_err(format!("settings must be between 1 and {}", p.dim + 1)));
    }
    let state = parse_state(&p.state);
    let rho = state.resolve(p.dim)?;
    let cfg = ExperimentConfig {
        dim: p.dim,
        states: vec![state],
        channel: parse_channel(&p.channel)?,
        grid: Grid::default(),
        columns,
        settings_count: p.settings,
        construction,
        optimize: false,
        search: SearchOptions::default(),
        output: PathBuf::new(),
    };
    Ok((cfg, rho))
}

fn measure(
    name: &str,
    p: &PointArgs,
    construction: &str,
    optimize: bool,
    search: SearchOptions,
) -> Result<(), CliError> {
    let m = Measure::from_label(name).ok_or_else(|| config_err(format!("unknown measure '{name}'")))?;
    if m == Measure::G && p.dim != 3 {
        return Err(config_err("measure g is defined for dim = 3 only"));
    }
    if optimize && !matches!(m, Measure::Tsr | Measure::Tnr) {
        return Err(config_err("--optimize applies to TSR and TNR only"));
    }
    let construction = parse_construction(construction, p.dim)?;
    let (mut cfg, rho) = point_config(p, construction, vec![Column::Measure(m)])?;
    cfg.optimize = optimize;
    cfg.search = search;
    let (value, flags) = evaluate_column(&cfg, &rho, Column::Measure(m), p.gamma_t)?;
    println!("{} {}", m.label(), format_number(value));
    if !flags.is_empty() {
        println!("flags {}", flags.join(";"));
    }
    Ok(())
}

fn nsit(p: &PointArgs) -> Result<(), CliError> {
    let (cfg, rho) = point_config(p, Construction::Pdo, vec![Column::Nsit])?;
    let pvms = mub_pvms(cfg.dim, cfg.settings_count)?;
    let ch = Channel::new(cfg.dim, cfg.channel, p.gamma_t)?;
    let report = nsit_check(&rho, &ch, &pvms)?;
    println!("max_violation {}", format_number(report.max_violation));
    println!("satisfied {}", report.satisfied);
    if report.single_setting {
        println!("note a single setting cannot signal");
    }
    Ok(())
}

fn bases(dump: bool, dim: Option<usize>) -> Result<(), CliError> {
    if let Some(d) = dim {
        check_dim(d)?;
    }
    let mut list = Vec::new();
    if dim.is_none_or(|d| d == 2) {
        list.push(("pauli", pauli_basis()));
        list.push(("gellmann_2", gellmann_basis(2)?));
    }
    if dim.is_none_or(|d| d == 3) {
        list.push(("qutrit_wigner", wigner_qutrit_basis()));
        list.push(("gellmann_3", gellmann_basis(3)?));
    }
    let entries: Vec<_> = list
        .iter()
        .map(|(name, b)| {
            let mut e = json!({
                "name": name,
                "dim": b.dim(),
                "elements": b.len(),
                "norm_sq": b.norm_sq(),
            });
            if dump {
                e["matrices"] = b.elements().iter().map(|k| matrix_to_json(k.matrix())).collect();
            }
            e
        })
        .collect();
    let text = serde_json::to_string_pretty(&entries).map_err(|e| CliError::Numerical(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Sweep { config, no_plots } => sweep(&config, no_plots),
        Command::Pdo {
            state,
            channel,
            dim,
            gamma_t,
            construction,
            out,
        } => pdo(&state, &channel, dim, gamma_t, &construction, out.as_deref()),
        Command::Measure {
            measure: name,
            point,
            construction,
            optimize,
            restarts,
            max_evaluations,
            seed,
        } => {
            if max_evaluations == 0 {
                return Err(config_err("max_evaluations must be positive"));
            }
            let search = SearchOptions {
                restarts,
                max_evaluations,
                seed,
                ..SearchOptions::default()
            };
            measure(&name, &point, &construction, optimize, search)
        }
        Command::Nsit { point } => nsit(&point),
        Command::Bases { dump, dim } => bases(dump, dim),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
