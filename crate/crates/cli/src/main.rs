use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdlab::spectra::{StringKind, CAP_ENV};
use qdlab_cli::commands;
use qdlab_cli::config::{Overrides, RunConfig};
use qdlab_cli::report::Report;
use qdlab_cli::CliError;

/// Exact numerics for quantum double models with matter on small tori.
///
/// Exit status: 0 on success, 1 when a numerical check fails, 2 on a
/// configuration error.
#[derive(Parser)]
#[command(name = "qdlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the couplings Z_K -> Z_N with their class.
    Enumerate(ModelArgs),
    /// Check that all Hamiltonian terms are commuting projectors.
    Verify(ModelArgs),
    /// Ground-space dimension from the exact trace, against the closed form.
    Gsd(ModelArgs),
    /// Energy of open string excitations as a function of length.
    Confine {
        #[command(flatten)]
        model: ModelArgs,
        /// Gauge charge carried by the string.
        #[arg(long, default_value_t = 1)]
        charge: usize,
        /// Lengths 1..=max are measured.
        #[arg(long, default_value_t = 3)]
        max_length: usize,
        #[arg(long, value_enum, default_value_t = Kind::Z)]
        kind: Kind,
    },
    /// Low-lying levels from dense diagonalization (dimension <= 4096).
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of distinct levels to list.
        #[arg(long, default_value_t = 5)]
        levels: usize,
    },
    /// Face operators that map between projector labels.
    Wops(ModelArgs),
    /// Edge terms in the character basis.
    Fourier {
        #[command(flatten)]
        model: ModelArgs,
        /// Restrict to one edge; all edges by default.
        #[arg(long)]
        edge: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// Primal path of clock operators.
    Z,
    /// Dual path of shift operators.
    X,
}

#[derive(Args)]
struct ModelArgs {
    /// key = value file; flags take precedence over its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// double, dual or vertex.
    #[arg(long)]
    family: Option<String>,
    /// Order N of the gauge group.
    #[arg(long)]
    gauge: Option<usize>,
    /// Matter dimension: K for face matter, M for vertex matter.
    #[arg(long)]
    matter: Option<usize>,
    /// Coupling multiplier n, f(1) = n.
    #[arg(long)]
    hom: Option<usize>,
    /// Vertex-matter action: trivial, regular or block:B:F.
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Only genus 1 is supported.
    #[arg(long)]
    genus: Option<u32>,
    /// json, csv or table.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// Largest Hilbert-space dimension to sweep; overrides the environment.
    #[arg(long)]
    cap: Option<usize>,
    /// Which face of an edge is p1: left or right.
    #[arg(long)]
    face_order: Option<String>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => Overrides::from_file(path)?,
            None => Overrides::default(),
        };
        let flags = Overrides {
            family: self.family.clone(),
            gauge: self.gauge,
            matter: self.matter,
            hom: self.hom,
            theta: self.theta.clone(),
            rows: self.rows,
            cols: self.cols,
            genus: self.genus,
            format: self.format.clone(),
            tol: self.tol,
            cap: self.cap,
            face_order: self.face_order.clone(),
        };
        let env = std::env::var(CAP_ENV).ok();
        RunConfig::resolve(flags, file, env.as_deref())
    }
}

fn run(cli: Cli) -> Result<(Report, RunConfig), CliError> {
    let (report, cfg) = match cli.command {
        Command::Enumerate(m) => {
            let cfg = m.resolve()?;
            (commands::enumerate(cfg.spec.gauge, cfg.spec.matter)?, cfg)
        }
        Command::Verify(m) => {
            let cfg = m.resolve()?;
            (commands::verify(&cfg)?, cfg)
        }
        Command::Gsd(m) => {
            let cfg = m.resolve()?;
            (commands::gsd(&cfg)?, cfg)
        }
        Command::Confine {
            model,
            charge,
            max_length,
            kind,
        } => {
            let cfg = model.resolve()?;
            let kind = match kind {
                Kind::Z => StringKind::Z,
                Kind::X => StringKind::X,
            };
            (commands::confine(&cfg, kind, charge, max_length)?, cfg)
        }
        Command::Spectrum { model, levels } => {
            let cfg = model.resolve()?;
            (commands::spectrum(&cfg, levels)?, cfg)
        }
        Command::Wops(m) => {
            let cfg = m.resolve()?;
            (commands::wops(&cfg)?, cfg)
        }
        Command::Fourier { model, edge } => {
            let cfg = model.resolve()?;
            (commands::fourier(&cfg, edge)?, cfg)
        }
    };
    Ok((report, cfg))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(cli).and_then(|(report, cfg)| {
        let text = report.render(cfg.format)?;
        Ok((text, report.ok))
    });
    match outcome {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("qdlab: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
