//! `homog`: homogenised tensors, cell spectra, band gaps and convergence
//! studies for thin-framework composites.

mod commands;
mod config;
mod svg;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "homog", version, about = "Two-scale homogenisation of thin-framework composites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Homogenised tensor of the framework -> ahom.json
    Ahom(Flags),
    /// Cell eigenvalues and averages -> micro.json
    Micro(Flags),
    /// Zeros, poles, bands and gaps of the limit operator -> bands.json, bands.svg
    Bands(Flags),
    /// Homogenised source problem -> solve.json
    Solve(Flags),
    /// Lowest eigenvalues of one ε-problem (`--modes` counts direct modes) -> direct.json
    Direct(Flags),
    /// Direct solves along the ε ladder against the limit -> converge.csv
    Converge(Flags),
    /// Everything above in one file -> report.json
    Report(Flags),
}

#[derive(Args)]
struct Flags {
    /// key=value file applied before the flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset name (grid, grid-diag) or framework file
    #[arg(long)]
    framework: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    lame0: Option<f64>,
    #[arg(long)]
    shear0: Option<f64>,
    #[arg(long)]
    lame1: Option<f64>,
    #[arg(long)]
    shear1: Option<f64>,
    /// Cell mesh subdivisions per side
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long = "macro-k")]
    macro_k: Option<usize>,
    #[arg(long = "macro-n")]
    macro_n: Option<usize>,
    /// File of macroscopic eigenvalues used instead of the A^hom problem
    #[arg(long = "macro-spectrum")]
    macro_spectrum: Option<String>,
    /// Comma-separated list such as 1/2,1/4,1/8
    #[arg(long)]
    ladder: Option<String>,
    /// Period 1/k of a single direct run
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    nfine: Option<usize>,
    /// plain or stiff
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long = "direct-modes")]
    direct_modes: Option<usize>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

impl Flags {
    fn resolve(&self, direct: bool) -> Result<RunConfig, config::ConfigError> {
        let mut c = RunConfig::default();
        if let Some(p) = &self.config {
            c.apply_file(p)?;
        }
        let modes_key = if direct { "direct_modes" } else { "modes" };
        let pairs: [(&str, Option<String>); 17] = [
            ("framework", self.framework.clone()),
            ("theta", self.theta.map(|v| v.to_string())),
            ("lame0", self.lame0.map(|v| v.to_string())),
            ("shear0", self.shear0.map(|v| v.to_string())),
            ("lame1", self.lame1.map(|v| v.to_string())),
            ("shear1", self.shear1.map(|v| v.to_string())),
            ("n", self.n.map(|v| v.to_string())),
            (modes_key, self.modes.map(|v| v.to_string())),
            ("macro_k", self.macro_k.map(|v| v.to_string())),
            ("macro_n", self.macro_n.map(|v| v.to_string())),
            ("macro_spectrum", self.macro_spectrum.clone()),
            ("ladder", self.ladder.clone()),
            ("eps", self.eps.clone()),
            ("nfine", self.nfine.map(|v| v.to_string())),
            ("boundary", self.boundary.clone()),
            ("direct_modes", self.direct_modes.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                c.set(k, &v)?;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (flags, run): (&Flags, fn(&RunConfig) -> commands::Result<()>) = match &cli.command {
        Command::Ahom(f) => (f, commands::ahom),
        Command::Micro(f) => (f, commands::micro),
        Command::Bands(f) => (f, commands::bands),
        Command::Solve(f) => (f, commands::solve),
        Command::Direct(f) => (f, commands::direct),
        Command::Converge(f) => (f, commands::converge),
        Command::Report(f) => (f, commands::report),
    };
    let result = flags
        .resolve(matches!(cli.command, Command::Direct(_)))
        .map_err(commands::RunError::from)
        .and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
