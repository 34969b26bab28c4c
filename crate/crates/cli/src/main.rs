//! `h1geom`: run the Heisenberg integral-geometry estimators from the shell.
//!
//! Exit status: 0 success, 2 configuration error, 3 capability error (the
//! request cannot be carried out for this input, e.g. a containment run whose
//! inner body is not inside the outer one), 4 tolerance failure (the report is
//! still written).

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use h1geom::config::OutputFormat;

#[derive(Parser, Debug)]
#[command(
    name = "h1geom",
    version,
    about = "Integral geometry experiments in the Heisenberg group"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Body file (TOML) or a built-in name: unit-ball, unit-cube.
    #[arg(long)]
    pub body: Option<String>,
    /// Experiment file (TOML); flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Monte Carlo samples.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Segment length.
    #[arg(long)]
    pub ell: Option<f64>,
    /// Grid resolution for quadrature oracles.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Quadrature tolerance for `p-area`; relative-error bound elsewhere.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub format: Option<OutputFormat>,
    /// Output file; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Stratify the line angle; optional stratum count.
    #[arg(long, num_args = 0..=1, default_missing_value = "64")]
    pub stratify: Option<u32>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lebesgue volume.
    Volume {
        /// Use the voxel-counting oracle.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        common: Common,
    },
    /// p-Area of the boundary.
    PArea {
        /// Use the triangulation oracle instead of adaptive quadrature.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Measure of horizontal lines meeting the body, against 2·p-Area.
    Crofton {
        #[command(flatten)]
        common: Common,
    },
    /// Integral of chord lengths, against 2π·V.
    ChordIntegral {
        #[command(flatten)]
        common: Common,
    },
    /// Mean chord length of lines meeting the body.
    MeanChord {
        #[command(flatten)]
        common: Common,
    },
    /// Measures of segments of length --ell meeting and inside the body.
    Kinematic {
        #[command(flatten)]
        common: Common,
    },
    /// Probability that a segment meeting --outer also meets --inner.
    Containment {
        #[arg(long)]
        inner: Option<String>,
        #[arg(long)]
        outer: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Paired estimates before and after a motion "a,b,c,alpha".
    Invariance {
        #[arg(long)]
        motion: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Segment-hit measure over a list of lengths, with a linear fit.
    Sweep {
        #[arg(long)]
        ell_list: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common, extra) = match cli.command {
        Command::Volume { oracle, common } => ("volume", common, commands::Extra::oracle(oracle)),
        Command::PArea { oracle, common } => ("p-area", common, commands::Extra::oracle(oracle)),
        Command::Crofton { common } => ("crofton", common, commands::Extra::default()),
        Command::ChordIntegral { common } => ("chord-integral", common, commands::Extra::default()),
        Command::MeanChord { common } => ("mean-chord", common, commands::Extra::default()),
        Command::Kinematic { common } => ("kinematic", common, commands::Extra::default()),
        Command::Containment {
            inner,
            outer,
            common,
        } => (
            "containment",
            common,
            commands::Extra {
                inner,
                outer,
                ..Default::default()
            },
        ),
        Command::Invariance { motion, common } => (
            "invariance",
            common,
            commands::Extra {
                motion,
                ..Default::default()
            },
        ),
        Command::Sweep { ell_list, common } => (
            "sweep",
            common,
            commands::Extra {
                ell_list,
                ..Default::default()
            },
        ),
    };
    match commands::execute(name, &common, &extra) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("h1geom: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
