//! Binary PPM (P6) and PGM (P5) images, 8 bits per sample.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use image::codecs::pnm::{PnmDecoder, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};
use omnigeom_core::polygon_repr::InstanceMask;
use omnigeom_core::{Grid, LabelMap};

use crate::error::{CliError, Result};

/// `[0, 1] → 0..=255`, clamping and rounding half away from zero.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn write_pnm(
    path: &Path,
    width: usize,
    height: usize,
    pixels: &[u8],
    color: ExtendedColorType,
) -> Result<()> {
    let subtype = match color {
        ExtendedColorType::Rgb8 => PnmSubtype::Pixmap(SampleEncoding::Binary),
        _ => PnmSubtype::Graymap(SampleEncoding::Binary),
    };
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    PnmEncoder::new(&mut out)
        .with_subtype(subtype)
        .write_image(pixels, width as u32, height as u32, color)
        .map_err(|e| CliError::io(path, std::io::Error::other(e)))
}

/// Writes three `[0, 1]` channels as a P6 image.
pub fn write_ppm(path: &Path, rgb: &[Grid]) -> Result<()> {
    if rgb.len() != 3 {
        return Err(CliError::input(format!(
            "PPM needs 3 channels, got {}",
            rgb.len()
        )));
    }
    let (w, h) = rgb[0].dims();
    if rgb.iter().any(|c| c.dims() != (w, h)) {
        return Err(CliError::input("PPM channels differ in size"));
    }
    let mut pixels = Vec::with_capacity(3 * w * h);
    for i in 0..w * h {
        for c in rgb {
            pixels.push(quantize(c.data()[i]));
        }
    }
    write_pnm(path, w, h, &pixels, ExtendedColorType::Rgb8)
}

/// Writes one `[0, 1]` channel as a P5 image.
pub fn write_pgm(path: &Path, gray: &Grid) -> Result<()> {
    let (w, h) = gray.dims();
    let pixels: Vec<u8> = gray.data().iter().map(|&v| quantize(v)).collect();
    write_pnm(path, w, h, &pixels, ExtendedColorType::L8)
}

pub fn write_mask(path: &Path, mask: &InstanceMask) -> Result<()> {
    write_pgm(path, &mask.to_grid())
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let bad = |e: &dyn std::fmt::Display| CliError::input(format!("{}: {e}", path.display()));
    let file = File::open(path).map_err(|e| bad(&e))?;
    let decoder = PnmDecoder::new(BufReader::new(file)).map_err(|e| bad(&e))?;
    DynamicImage::from_decoder(decoder).map_err(|e| bad(&e))
}

/// Reads a P5 or P6 image as channels scaled to `[0, 1]`: one for gray, three for color.
pub fn read_image(path: &Path) -> Result<Vec<Grid>> {
    let img = decode(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (samples, channels) = if img.color().has_color() {
        (img.to_rgb8().into_raw(), 3)
    } else {
        (img.to_luma8().into_raw(), 1)
    };
    (0..channels)
        .map(|c| {
            let data = (0..w * h)
                .map(|i| samples[i * channels + c] as f64 / 255.0)
                .collect();
            Grid::from_vec(w, h, data).map_err(CliError::from)
        })
        .collect()
}

fn read_gray(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let img = decode(path)?;
    if img.color().has_color() {
        return Err(CliError::input(format!(
            "{}: expected a grayscale (P5) image",
            path.display()
        )));
    }
    Ok((
        img.width() as usize,
        img.height() as usize,
        img.to_luma8().into_raw(),
    ))
}

/// Nonzero pixels are foreground.
pub fn read_mask(path: &Path) -> Result<InstanceMask> {
    let (w, h, data) = read_gray(path)?;
    Ok(InstanceMask::from_fn(w, h, |x, y| data[y * w + x] != 0))
}

/// Gray levels are class ids.
pub fn read_labels(path: &Path) -> Result<LabelMap> {
    let (w, h, data) = read_gray(path)?;
    Ok(LabelMap::from_vec(
        w,
        h,
        data.into_iter().map(u32::from).collect(),
    )?)
}
