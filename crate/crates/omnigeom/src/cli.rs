use std::ffi::OsString;

use clap::{Parser, Subcommand};

use crate::commands::camtensor::{self, CamtensorArgs};
use crate::commands::losses_check::{self, LossesCheckArgs};
use crate::commands::repr_eval::{self, ReprEvalArgs};
use crate::commands::warp_demo::{self, WarpDemoArgs};
use crate::commands::weights_sim::{self, WeightsSimArgs};
use crate::error::Result;

/// Fisheye geometry tools: camera tensors, view synthesis, shape
/// representations, task weighting and loss checks.
///
/// OMNIGEOM_THREADS caps the worker threads (0 or unset = one per core).
#[derive(Debug, Parser)]
#[command(name = "omnigeom", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the six-channel camera geometry tensor of a calibration as CGT1
    Camtensor(CamtensorArgs),
    /// Render a textured plane from two poses, warp one view into the other and report the error
    #[command(allow_negative_numbers = true)]
    WarpDemo(WarpDemoArgs),
    /// Fit shape representations to instance masks and report mean IoU per family
    ReprEval(ReprEvalArgs),
    /// Simulate multi-task loss curves and a weighting scheduler
    #[command(allow_negative_numbers = true)]
    WeightsSim(WeightsSimArgs),
    /// Evaluate the losses on image, distance and segmentation files
    #[command(allow_negative_numbers = true)]
    LossesCheck(LossesCheckArgs),
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Camtensor(a) => camtensor::run(a),
        Command::WarpDemo(a) => warp_demo::run(a),
        Command::ReprEval(a) => repr_eval::run(a),
        Command::WeightsSim(a) => weights_sim::run(a),
        Command::LossesCheck(a) => losses_check::run(a),
    }
}

/// Parses `args` (including the program name) and runs the subcommand;
/// returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
