use std::path::PathBuf;

use clap::Args;
use omnigeom_core::camera_tensor::{assemble_tensor, CameraTensor};

use crate::calib::read_calibration;
use crate::cgt::tensor_container;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Args)]
pub struct CamtensorArgs {
    /// Calibration file (key=value: a1..a4, cx, cy, width, height, optional theta_max)
    #[arg(long)]
    pub calib: PathBuf,
    /// Output CGT1 file
    #[arg(long)]
    pub out: PathBuf,
    /// Resize the tensor to this width (bilinear, corner aligned); needs --height
    #[arg(long, requires = "height")]
    pub width: Option<usize>,
    /// Resize the tensor to this height; needs --width
    #[arg(long, requires = "width")]
    pub height: Option<usize>,
}

pub fn build(args: &CamtensorArgs) -> Result<CameraTensor> {
    let cam = read_calibration(&args.calib)?;
    let tensor = assemble_tensor(&cam)?;
    match (args.width, args.height) {
        (Some(w), Some(h)) => {
            if w == 0 || h == 0 {
                return Err(CliError::input("resize dimensions must be positive"));
            }
            Ok(tensor.resize(w, h)?)
        }
        _ => Ok(tensor),
    }
}

pub fn run(args: &CamtensorArgs) -> Result<()> {
    let tensor = build(args)?;
    tensor_container(&tensor).write(&args.out)
}
