//! `korn`: identity suites, kernel scans, Korn constant studies and the baby Korn check.

mod commands;
mod config;
mod svg;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{default_variants_for, EXIT_USAGE};
use config::{resolve, ConfigError, ConfigFile, Defaults, Overrides};

#[derive(Parser)]
#[command(name = "korn", version, about = "Trace-free incompatible Korn inequalities: exact identities and numerical constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the randomized exact identity suites.
    Identities {
        #[command(flatten)]
        common: Common,
        /// Comma-separated identity groups to run.
        #[arg(long)]
        only: Option<String>,
        /// Flip the sign of one identity to check that failures are detected.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Count kernel eigenvalues of each variant without boundary conditions.
    Kernels {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate constants under the tangential boundary condition over a list of h.
    Constant {
        #[command(flatten)]
        common: Common,
    },
    /// Ratio ‖Du‖²/‖dev sym Du‖² on random fields vanishing on the boundary.
    Babykorn {
        #[command(flatten)]
        common: Common,
        /// Number of random fields (the first is a polynomial bump).
        #[arg(long)]
        fields: Option<usize>,
        /// Largest admissible ratio.
        #[arg(long)]
        bound: Option<f64>,
    },
}

#[derive(Args, Default)]
struct Common {
    /// Configuration file (`key = value` lines under `[section]` headers).
    #[arg(long)]
    config: Option<String>,
    /// cube | lshape | slab | boxes "x0,y0,z0:x1,y1,z1;..."
    #[arg(long)]
    domain: Option<String>,
    /// Comma-separated grid spacings, e.g. 1/4,1/8.
    #[arg(long)]
    h: Option<String>,
    /// Comma-separated variants: dS_C, S_dC, dS_dC, S_C, devCurl_vs_Curl.
    #[arg(long)]
    variant: Option<String>,
    /// none | full | partial
    #[arg(long)]
    bc: Option<String>,
    /// Faces carrying the boundary condition, e.g. z-,x+.
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; CSV goes to stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// csv | svg | both
    #[arg(long)]
    format: Option<String>,
    /// Machine-readable report path (identities).
    #[arg(long)]
    report: Option<String>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            domain: self.domain.clone(),
            h: self.h.clone(),
            variant: self.variant.clone(),
            bc: self.bc.clone(),
            gamma: self.gamma.clone(),
            seed: self.seed,
            out: self.out.clone(),
            format: self.format.clone(),
            report: self.report.clone(),
            ..Overrides::default()
        }
    }

    fn file(&self) -> Result<ConfigFile, ConfigError> {
        match &self.config {
            None => Ok(ConfigFile::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError(format!("cannot read config '{path}': {e}")))?;
                ConfigFile::parse(&text)
            }
        }
    }
}

fn run(cli: Cli) -> Result<u8, ConfigError> {
    match cli.command {
        Command::Identities { common, only, inject_fault } => {
            let over = Overrides { only, ..common.overrides() };
            let d = Defaults { h: "1/4", variants: default_variants_for("identities"), bc: "none", fields: 0 };
            commands::identities(&resolve(&common.file()?, &over, &d)?, inject_fault)
        }
        Command::Kernels { common } => {
            let d = Defaults { h: "1/8", variants: default_variants_for("kernels"), bc: "none", fields: 0 };
            commands::kernels(&resolve(&common.file()?, &common.overrides(), &d)?)
        }
        Command::Constant { common } => {
            let d = Defaults { h: "1/4,1/8", variants: default_variants_for("constant"), bc: "full", fields: 0 };
            commands::constant(&resolve(&common.file()?, &common.overrides(), &d)?)
        }
        Command::Babykorn { common, fields, bound } => {
            let over = Overrides { fields, bound, ..common.overrides() };
            let d = Defaults { h: "1/16", variants: default_variants_for("babykorn"), bc: "none", fields: 50 };
            commands::babykorn(&resolve(&common.file()?, &over, &d)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
