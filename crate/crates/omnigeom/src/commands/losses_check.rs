use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use omnigeom_core::geometry_warp::DistanceMap;
use omnigeom_core::losses::{
    cross_entropy, focal_loss, lovasz_softmax, mean_ssim, reconstruction_loss, smoothness_loss,
    ReconstructionParams, SSIM_WEIGHT,
};
use omnigeom_core::pac::{pac_conv, KernelKind, PacParams};
use omnigeom_core::{FeatureMap, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cgt::{container_distance, Container};
use crate::error::{CliError, Result};
use crate::pnm::{read_image, read_labels, read_mask};
use crate::table::{fmt_num, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelName {
    Gaussian,
    Constant,
}

#[derive(Debug, Clone, Args)]
pub struct LossesCheckArgs {
    /// Target image (PPM or PGM)
    #[arg(long, requires = "recon")]
    pub target: Option<PathBuf>,
    /// Reconstructed image, same size and channel count as --target
    #[arg(long, requires = "target")]
    pub recon: Option<PathBuf>,
    /// Optional PGM validity mask for the reconstruction loss (nonzero = valid)
    #[arg(long, requires = "target")]
    pub mask: Option<PathBuf>,
    /// CGT1 distance map ('dst') for the edge-aware smoothness loss against --target
    #[arg(long, requires = "target")]
    pub distance: Option<PathBuf>,
    /// CGT1 container with one class-probability channel per class
    #[arg(long, requires = "labels")]
    pub probs: Option<PathBuf>,
    /// PGM label map (gray level = class id)
    #[arg(long, requires = "probs")]
    pub labels: Option<PathBuf>,
    /// Focal loss focusing parameter
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    /// Weight of the SSIM term in the reconstruction loss
    #[arg(long, default_value_t = SSIM_WEIGHT)]
    pub ssim_weight: f64,
    /// Shape parameter of the robust loss
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Scale parameter of the robust loss
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Run the pixel-adaptive convolution demo on seeded random inputs
    #[arg(long)]
    pub pac: bool,
    /// Guidance kernel of the PAC demo
    #[arg(long, value_enum, default_value_t = KernelName::Gaussian, requires = "pac")]
    pub kernel: KernelName,
    /// Seed of the PAC demo inputs
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV (loss, value); stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn same_dims(a: (&Path, (usize, usize)), b: (&Path, (usize, usize))) -> Result<()> {
    if a.1 != b.1 {
        return Err(CliError::input(format!(
            "dimension mismatch: {} is {}x{}, {} is {}x{}",
            a.0.display(),
            a.1 .0,
            a.1 .1,
            b.0.display(),
            b.1 .0,
            b.1 .1
        )));
    }
    Ok(())
}

fn luminance(channels: &[Grid]) -> Grid {
    let (w, h) = channels[0].dims();
    Grid::from_fn(w, h, |x, y| {
        channels.iter().map(|c| c.get(x, y)).sum::<f64>() / channels.len() as f64
    })
}

/// Plain zero-padded convolution with the `[dy][dx][c_in][c_out]` layout.
pub fn direct_convolution(x: &FeatureMap, weights: &[f64], bias: &[f64], k: usize) -> Vec<Grid> {
    let (w, h) = x.dims();
    let cin = x.num_channels();
    let cout = bias.len();
    let half = (k / 2) as isize;
    (0..cout)
        .map(|co| {
            Grid::from_fn(w, h, |j, i| {
                let mut acc = bias[co];
                for dy in 0..k {
                    for dx in 0..k {
                        let (a, b) = (
                            i as isize + dy as isize - half,
                            j as isize + dx as isize - half,
                        );
                        if a < 0 || b < 0 || a >= h as isize || b >= w as isize {
                            continue;
                        }
                        for ci in 0..cin {
                            acc += weights[((dy * k + dx) * cin + ci) * cout + co]
                                * x.channels()[ci].get(b as usize, a as usize);
                        }
                    }
                }
                acc
            })
        })
        .collect()
}

/// Largest deviation of PAC from a plain convolution on seeded random inputs.
pub fn pac_demo(kernel: KernelKind, seed: u64) -> Result<f64> {
    let (w, h, k, cin, cout, guide) = (16, 12, 3, 2, 3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_map = |n: usize, rng: &mut ChaCha8Rng| -> Result<FeatureMap> {
        let channels = (0..n)
            .map(|_| {
                Grid::from_vec(
                    w,
                    h,
                    (0..w * h).map(|_| rng.random_range(-1.0..1.0)).collect(),
                )
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(FeatureMap::new(channels)?)
    };
    let x = random_map(cin, &mut rng)?;
    let f = random_map(guide, &mut rng)?;
    let weights: Vec<f64> = (0..k * k * cin * cout)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let bias: Vec<f64> = (0..cout).map(|_| rng.random_range(-0.5..0.5)).collect();
    let params = PacParams::new(k, cin, cout, weights.clone(), bias.clone(), kernel)?;
    let out = pac_conv(&x, &f, &params)?;
    let reference = direct_convolution(&x, &weights, &bias, k);
    Ok(out
        .channels()
        .iter()
        .zip(&reference)
        .flat_map(|(a, b)| a.data().iter().zip(b.data()).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max))
}

pub fn rows(args: &LossesCheckArgs) -> Result<Vec<(String, f64)>> {
    let mut rows = Vec::new();
    if let (Some(tp), Some(rp)) = (&args.target, &args.recon) {
        let target = read_image(tp)?;
        let recon = read_image(rp)?;
        same_dims((tp, target[0].dims()), (rp, recon[0].dims()))?;
        if target.len() != recon.len() {
            return Err(CliError::input(format!(
                "channel mismatch: {} has {}, {} has {}",
                tp.display(),
                target.len(),
                rp.display(),
                recon.len()
            )));
        }
        let mask = match &args.mask {
            Some(mp) => {
                let m = read_mask(mp)?;
                same_dims((tp, target[0].dims()), (mp, m.dims()))?;
                m.to_grid()
            }
            None => {
                let (w, h) = target[0].dims();
                Grid::filled(w, h, 1.0)
            }
        };
        let params = ReconstructionParams {
            ssim_weight: args.ssim_weight,
            alpha: args.alpha,
            scale: args.scale,
        };
        let ssim: f64 = target
            .iter()
            .zip(&recon)
            .map(|(a, b)| mean_ssim(a, b))
            .sum::<omnigeom_core::Result<f64>>()?;
        rows.push(("mean_ssim".into(), ssim / target.len() as f64));
        let rec = reconstruction_loss(&target, &recon, &mask, &params)?;
        rows.push(("reconstruction".into(), rec.value));

        if let Some(dp) = &args.distance {
            let d: DistanceMap = container_distance(&Container::read(dp)?)?;
            same_dims((tp, target[0].dims()), (dp, d.dims()))?;
            rows.push((
                "smoothness".into(),
                smoothness_loss(&d, &luminance(&target))?,
            ));
        }
    }
    if let (Some(pp), Some(lp)) = (&args.probs, &args.labels) {
        let c = Container::read(pp)?;
        let probs = FeatureMap::new(
            (0..c.channels.len())
                .map(|i| c.grid(i))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let labels = read_labels(lp)?;
        same_dims((pp, probs.dims()), (lp, labels.dims()))?;
        rows.push(("cross_entropy".into(), cross_entropy(&probs, &labels)?));
        rows.push(("focal".into(), focal_loss(&probs, &labels, args.gamma)?));
        rows.push(("focal_gamma0".into(), focal_loss(&probs, &labels, 0.0)?));
        rows.push(("lovasz_softmax".into(), lovasz_softmax(&probs, &labels)?));
    }
    if args.pac {
        let kind = match args.kernel {
            KernelName::Gaussian => KernelKind::Gaussian,
            KernelName::Constant => KernelKind::Constant,
        };
        rows.push((
            "pac_max_abs_diff_vs_conv".into(),
            pac_demo(kind, args.seed)?,
        ));
    }
    if rows.is_empty() {
        return Err(CliError::input(
            "nothing to check: give --target/--recon, --probs/--labels or --pac",
        ));
    }
    Ok(rows)
}

pub fn run(args: &LossesCheckArgs) -> Result<()> {
    let mut t = Table::new(&["loss", "value"]);
    for (name, v) in rows(args)? {
        t.push(vec![name, fmt_num(v)]);
    }
    match &args.out {
        Some(p) => t.write(p),
        None => std::io::stdout()
            .lock()
            .write_all(&t.to_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}
