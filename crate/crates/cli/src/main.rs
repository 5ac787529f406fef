use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entasym_cli::commands;
use entasym_cli::config::ConfigBuilder;
use entasym_cli::CliError;

#[derive(Parser, Debug)]
#[command(name = "entasym", version, about = "Entanglement asymmetry of spin-chain eigenstates and U(1)-symmetric random states")]
struct Cli {
    /// Base RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; stdout when omitted or "-".
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override any configuration key, e.g. --set ell_a=[3,8].
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// mfim, nnn-ising or xxz-fields.
    #[arg(long)]
    model: Option<String>,
    /// Chain length L.
    #[arg(long, short = 'L')]
    sites: Option<usize>,
    /// Charge axis: x, y, z, theta*, theta:<rad>, phi:<rad> or nx,ny,nz.
    #[arg(long)]
    charge: Option<String>,
    /// Subsystem sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    ell_a: Option<Vec<usize>>,
    #[arg(long)]
    samples: Option<usize>,
    /// Directory for cached spectra.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Asymmetry of every eigenstate, with U(1) and Haar predictions.
    SpectrumScan(Common),
    /// Full-system asymmetry of a mid-spectrum window versus θ.
    ThetaSweep(Common),
    /// Same, along the arc from Q_θ* to Q_y.
    PhiSweep(Common),
    /// Window averages at several rescaled energies.
    WindowAverage(Common),
    /// Monte Carlo asymmetry of U(1)-Haar states against the closed form.
    EnsembleValidate(Common),
    /// Gaussian fit of the density of states (JSON).
    DosFit(Common),
}

fn list_value(v: &[usize]) -> toml::Value {
    toml::Value::Array(v.iter().map(|&x| toml::Value::Integer(x as i64)).collect())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let common = match &cli.command {
        Command::SpectrumScan(c)
        | Command::ThetaSweep(c)
        | Command::PhiSweep(c)
        | Command::WindowAverage(c)
        | Command::EnsembleValidate(c)
        | Command::DosFit(c) => c,
    };
    let mut b = ConfigBuilder::new();
    if let Some(path) = &cli.config {
        b = b.file(path)?;
    }
    for pair in &cli.set {
        b = b.assignment(pair)?;
    }
    let cfg = b
        .set_opt("seed", cli.seed.map(|s| toml::Value::Integer(s as i64)))
        .set_opt("model", common.model.clone())
        .set_opt("sites", common.sites.map(|v| v as i64))
        .set_opt("charge", common.charge.clone())
        .set_opt("ell_a", common.ell_a.as_deref().map(list_value))
        .set_opt("samples", common.samples.map(|v| v as i64))
        .set_opt("cache_dir", common.cache_dir.as_ref().map(|p| p.display().to_string()))
        .build()?;

    let text = match cli.command {
        Command::SpectrumScan(_) => commands::scan_table(&cfg, &commands::spectrum_scan(&cfg)?).to_string_lossy(),
        Command::ThetaSweep(_) => commands::theta_sweep_table(&cfg)?.to_string_lossy(),
        Command::PhiSweep(_) => commands::phi_sweep_table(&cfg)?.to_string_lossy(),
        Command::WindowAverage(_) => commands::window_average_table(&cfg)?.to_string_lossy(),
        Command::EnsembleValidate(_) => {
            commands::validation_table(&cfg, &commands::ensemble_validate(&cfg)?).to_string_lossy()
        }
        Command::DosFit(_) => {
            let report = commands::dos_fit_report(&cfg)?;
            let mut s = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    match cli.out.as_deref() {
        Some(p) if p.as_os_str() != "-" => std::fs::write(p, text)?,
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("entasym: {e}");
            e.exit_code()
        }
    }
}
