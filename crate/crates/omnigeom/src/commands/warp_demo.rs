use std::path::PathBuf;

use clap::Args;
use nalgebra::Vector3;
use omnigeom_core::camera_model::FisheyeCamera;
use omnigeom_core::geometry_warp::{warp_frame, Pose};
use omnigeom_core::scene::{RenderedView, TexturedPlane};
use omnigeom_core::Grid;

use crate::calib::{demo_params, read_calibration};
use crate::cgt::distance_container;
use crate::error::{CliError, Result};
use crate::pnm::{write_pgm, write_ppm};
use crate::table::{fmt_num, Table};

#[derive(Debug, Clone, Args)]
pub struct WarpDemoArgs {
    /// Calibration file; defaults to a built-in 640x480 fisheye
    #[arg(long)]
    pub calib: Option<PathBuf>,
    /// Axis-angle rotation of the target-to-source pose, x component (rad)
    #[arg(long, default_value_t = 0.01)]
    pub rx: f64,
    #[arg(long, default_value_t = -0.02)]
    pub ry: f64,
    #[arg(long, default_value_t = 0.005)]
    pub rz: f64,
    /// Translation of the target-to-source pose, x component (m)
    #[arg(long, default_value_t = 0.05)]
    pub tx: f64,
    #[arg(long, default_value_t = 0.02)]
    pub ty: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tz: f64,
    /// Distance of the textured plane from the target camera (m)
    #[arg(long, default_value_t = 2.0)]
    pub depth: f64,
    /// Texture period on the plane (m)
    #[arg(long, default_value_t = 1.2)]
    pub period: f64,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpDemoReport {
    pub source: RenderedView,
    pub target: RenderedView,
    pub reconstruction: Vec<Grid>,
    /// Pixels where the reconstruction is compared with the target.
    pub valid: Grid,
    pub mae: f64,
    /// Source reconstructed back from the reconstruction with the inverse pose.
    pub roundtrip_mae: f64,
    pub roundtrip_valid: Grid,
}

fn masked_mae(a: &[Grid], b: &[Grid], mask: &Grid) -> f64 {
    let count = mask.data().iter().filter(|&&m| m == 1.0).count();
    if count == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for (ca, cb) in a.iter().zip(b) {
        for ((x, y), m) in ca.data().iter().zip(cb.data()).zip(mask.data()) {
            if *m == 1.0 {
                total += (x - y).abs();
            }
        }
    }
    total / (count * a.len()) as f64
}

fn and(grids: &[&Grid]) -> Grid {
    let (w, h) = grids[0].dims();
    Grid::from_fn(w, h, |x, y| {
        if grids.iter().all(|g| g.get(x, y) == 1.0) {
            1.0
        } else {
            0.0
        }
    })
}

pub fn camera(args: &WarpDemoArgs) -> Result<FisheyeCamera> {
    match &args.calib {
        Some(p) => read_calibration(p),
        None => Ok(FisheyeCamera::new(demo_params())?),
    }
}

pub fn pose(args: &WarpDemoArgs) -> Result<Pose> {
    let values = [args.rx, args.ry, args.rz, args.tx, args.ty, args.tz];
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::input("pose components must be finite"));
    }
    Ok(Pose::from_axis_angle(
        Vector3::new(args.rx, args.ry, args.rz),
        Vector3::new(args.tx, args.ty, args.tz),
    )?)
}

/// Renders the plane from both cameras, reconstructs the target from the
/// source and then the source back from the reconstruction.
pub fn simulate(cam: &FisheyeCamera, pose: &Pose, plane: &TexturedPlane) -> Result<WarpDemoReport> {
    let target = plane.render(cam, &Pose::identity())?;
    let source = plane.render(cam, pose)?;

    let mut channels = source.image.clone();
    channels.push(source.hit.clone());
    let mut warped = warp_frame(&channels, &target.distance, pose, cam, cam)?;
    let source_hit = warped.image.pop().expect("hit channel");
    let valid = and(&[&warped.validity, &target.hit, &source_hit]);
    let reconstruction = warped.image;
    let mae = masked_mae(&reconstruction, &target.image, &valid);

    let inverse = pose.inverse();
    let mut back_channels = reconstruction.clone();
    back_channels.push(valid.clone());
    let mut back = warp_frame(&back_channels, &source.distance, &inverse, cam, cam)?;
    let back_valid = back.image.pop().expect("validity channel");
    let roundtrip_valid = and(&[&back.validity, &source.hit, &back_valid]);
    let roundtrip_mae = masked_mae(&back.image, &source.image, &roundtrip_valid);

    Ok(WarpDemoReport {
        source,
        target,
        reconstruction,
        valid,
        mae,
        roundtrip_mae,
        roundtrip_valid,
    })
}

pub fn report(args: &WarpDemoArgs) -> Result<WarpDemoReport> {
    if !(args.depth > 0.0 && args.depth.is_finite() && args.period > 0.0 && args.period.is_finite())
    {
        return Err(CliError::input("--depth and --period must be positive"));
    }
    let plane = TexturedPlane {
        depth: args.depth,
        period: args.period,
        channels: 3,
    };
    simulate(&camera(args)?, &pose(args)?, &plane)
}

pub fn run(args: &WarpDemoArgs) -> Result<()> {
    let r = report(args)?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    write_ppm(&args.out.join("source.ppm"), &r.source.image)?;
    write_ppm(&args.out.join("target.ppm"), &r.target.image)?;
    write_ppm(&args.out.join("reconstruction.ppm"), &r.reconstruction)?;
    write_pgm(&args.out.join("validity.pgm"), &r.valid)?;
    distance_container(&r.target.distance).write(&args.out.join("target_distance.cgt"))?;

    let pixels = r.valid.len() as f64;
    let mut t = Table::new(&["metric", "value"]);
    t.push(vec!["mae".into(), fmt_num(r.mae)]);
    t.push(vec![
        "valid_fraction".into(),
        fmt_num(r.valid.sum() / pixels),
    ]);
    t.push(vec!["roundtrip_mae".into(), fmt_num(r.roundtrip_mae)]);
    t.push(vec![
        "roundtrip_valid_fraction".into(),
        fmt_num(r.roundtrip_valid.sum() / pixels),
    ]);
    t.write(&args.out.join("errors.csv"))
}
