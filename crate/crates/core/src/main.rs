use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fft_homog::cli_io::{self, run::MEAN_TOLERANCE, Overrides, EXIT_CONFIG, EXIT_IO};
use fft_homog::projection::NyquistMode;

/// Finite-strain FFT homogenization of periodic cells.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration. Flags take precedence over the file.
    Run {
        config: PathBuf,
        /// Output directory (the run writes into `<output>/<name>/`).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        eta_newton: Option<f64>,
        #[arg(long)]
        eta_cg: Option<f64>,
        #[arg(long)]
        max_newton: Option<usize>,
        /// Number of increments of a ramped loading.
        #[arg(long)]
        increments: Option<usize>,
        #[arg(long, value_enum)]
        nyquist: Option<Nyquist>,
    },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
    /// Summarise the snapshots of a run directory and check `⟨F⟩ = F̄`.
    Info { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Nyquist {
    ZeroCompatible,
    IdentityEquilibrium,
}

impl From<Nyquist> for NyquistMode {
    fn from(n: Nyquist) -> Self {
        match n {
            Nyquist::ZeroCompatible => NyquistMode::ZeroCompatible,
            Nyquist::IdentityEquilibrium => NyquistMode::IdentityEquilibrium,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let code = match Cli::parse().command {
        Command::Run { config, output, eta_newton, eta_cg, max_newton, increments, nyquist } => {
            let overrides =
                Overrides { output, eta_newton, eta_cg, max_newton, increments, nyquist: nyquist.map(Into::into) };
            run(&config, &overrides)
        }
        Command::Validate { config } => validate(&config),
        Command::Info { dir } => info(&dir),
    };
    ExitCode::from(code as u8)
}

fn run(path: &std::path::Path, overrides: &Overrides) -> i32 {
    let config = match cli_io::load_config(path, overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    match cli_io::run(&config) {
        Ok(out) => {
            let s = &out.summary;
            println!(
                "{}: {} increments, {} Newton / {} CG iterations, {:.0} ms; results in {}",
                s.name,
                s.increments,
                s.newton_iterations,
                s.cg_iterations,
                s.wall_ms,
                out.run_dir.display()
            );
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn validate(path: &std::path::Path) -> i32 {
    match cli_io::load_config(path, &Overrides::default()) {
        Ok(c) => {
            println!(
                "{}: valid ({:?} model, {} phases, {} increments, output {})",
                c.name,
                c.model,
                c.phases.len(),
                c.increments.len(),
                c.run_dir().display()
            );
            0
        }
        Err(e) => {
            eprintln!("{e}");
            EXIT_CONFIG
        }
    }
}

fn info(dir: &std::path::Path) -> i32 {
    let checks = match cli_io::inspect(dir) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("cannot read snapshots in {}: {e}", dir.display());
            return EXIT_IO;
        }
    };
    if checks.is_empty() {
        println!("no snapshots in {}", dir.display());
        return 0;
    }
    let mut ok = true;
    for c in &checks {
        let status = match c.mean_error {
            Some(e) if e <= MEAN_TOLERANCE => format!("mean(F) = Fbar (max deviation {e:.1e})"),
            Some(e) => {
                ok = false;
                format!("MISMATCH: mean(F) deviates from Fbar by {e:.3e}")
            }
            None => "no F field".to_string(),
        };
        println!("increment {:4}  grid {:?}  fields [{}]  {status}", c.increment, c.points, c.fields.join(", "));
    }
    if ok {
        0
    } else {
        1
    }
}
