//! Six-channel camera geometry tensor: centered coordinates, incidence angle
//! maps and normalized coordinates, all at sensor resolution.

use alloc::vec::Vec;

use crate::camera_model::AxisAngleModel;
use crate::error::{Error, Result};
use crate::grid::{ensure_same_dims, Grid};

/// Channel identity, in the fixed tensor order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    CenteredX,
    CenteredY,
    AngleX,
    AngleY,
    NormalizedX,
    NormalizedY,
}

impl Channel {
    pub const ALL: [Channel; 6] = [
        Channel::CenteredX,
        Channel::CenteredY,
        Channel::AngleX,
        Channel::AngleY,
        Channel::NormalizedX,
        Channel::NormalizedY,
    ];

    /// Three-letter tag used by the tensor container format.
    pub fn tag(self) -> &'static str {
        match self {
            Channel::CenteredX => "ccx",
            Channel::CenteredY => "ccy",
            Channel::AngleX => "anx",
            Channel::AngleY => "any",
            Channel::NormalizedX => "ncx",
            Channel::NormalizedY => "ncy",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.tag() == tag)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraTensor {
    channels: [Grid; 6],
}

impl CameraTensor {
    /// Channels must be given in [`Channel::ALL`] order and share dimensions.
    pub fn from_channels(channels: [Grid; 6]) -> Result<Self> {
        let dims = channels[0].dims();
        for c in &channels[1..] {
            ensure_same_dims(dims, c.dims())?;
        }
        Ok(Self { channels })
    }

    pub fn channels(&self) -> &[Grid; 6] {
        &self.channels
    }

    pub fn channel(&self, which: Channel) -> &Grid {
        &self.channels[which.index()]
    }

    pub fn dims(&self) -> (usize, usize) {
        self.channels[0].dims()
    }

    pub fn into_channels(self) -> [Grid; 6] {
        self.channels
    }

    pub fn resize(&self, width: usize, height: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(6);
        for c in &self.channels {
            out.push(resize_bilinear(c, width, height)?);
        }
        let channels: [Grid; 6] = out.try_into().expect("six channels");
        Ok(Self { channels })
    }
}

/// `cc_x[i, j] = j − cx` and `cc_y[i, j] = i − cy` over pixel indices.
pub fn centered_coords<C: AxisAngleModel + ?Sized>(cam: &C) -> (Grid, Grid) {
    let (cx, cy) = cam.principal_point();
    let (w, h) = cam.sensor_size();
    (
        Grid::from_fn(w, h, |x, _| x as f64 - cx),
        Grid::from_fn(w, h, |_, y| y as f64 - cy),
    )
}

/// Incidence angle maps along each image axis.
///
/// Each column (row) shares one centered offset, so the angle is evaluated
/// once per column (row) and broadcast.
pub fn angle_maps<C: AxisAngleModel + ?Sized>(cam: &C) -> Result<(Grid, Grid)> {
    let (cx, cy) = cam.principal_point();
    let (w, h) = cam.sensor_size();
    let limit = cam.max_axis_offset();
    let angle_at = |x: usize, y: usize, offset: f64| {
        if offset.abs() > limit {
            Err(Error::PixelOutOfRange {
                x,
                y,
                radius: offset.abs(),
                max_radius: limit,
            })
        } else {
            cam.axis_angle(offset)
        }
    };
    let column_angles = (0..w)
        .map(|x| angle_at(x, 0, x as f64 - cx))
        .collect::<Result<Vec<_>>>()?;
    let row_angles = (0..h)
        .map(|y| angle_at(0, y, y as f64 - cy))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        Grid::from_fn(w, h, |x, _| column_angles[x]),
        Grid::from_fn(w, h, |_, y| row_angles[y]),
    ))
}

/// Coordinates varying linearly from −1 (first column/row) to +1 (last).
pub fn normalized_coords(width: usize, height: usize) -> Result<(Grid, Grid)> {
    if width < 2 || height < 2 {
        return Err(Error::InvalidParameter(
            "normalized coordinates need at least 2 pixels per axis",
        ));
    }
    let ramp = |i: usize, n: usize| {
        if i == n - 1 {
            1.0
        } else {
            2.0 * i as f64 / (n - 1) as f64 - 1.0
        }
    };
    Ok((
        Grid::from_fn(width, height, |x, _| ramp(x, width)),
        Grid::from_fn(width, height, |_, y| ramp(y, height)),
    ))
}

pub fn assemble_tensor<C: AxisAngleModel + ?Sized>(cam: &C) -> Result<CameraTensor> {
    let (w, h) = cam.sensor_size();
    let (cc_x, cc_y) = centered_coords(cam);
    let (a_x, a_y) = angle_maps(cam)?;
    let (nc_x, nc_y) = normalized_coords(w, h)?;
    Ok(CameraTensor {
        channels: [cc_x, cc_y, a_x, a_y, nc_x, nc_y],
    })
}

/// Corner-aligned bilinear resampling: output corners sample input corners.
pub fn resize_bilinear(src: &Grid, width: usize, height: usize) -> Result<Grid> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(
            "resize target must be at least 1x1",
        ));
    }
    if src.dims() == (width, height) {
        return Ok(src.clone());
    }
    let (sw, sh) = src.dims();
    // Per-axis (lower index, upper index, weight) tables. Positions are
    // i·(n_in−1)/(n_out−1) with the product taken in integers so corners land
    // exactly on input corners.
    let taps = |n_out: usize, n_in: usize| -> Vec<(usize, usize, f64)> {
        (0..n_out)
            .map(|i| {
                let pos = if n_out > 1 {
                    (i * (n_in - 1)) as f64 / (n_out - 1) as f64
                } else {
                    0.0
                };
                let lo = (libm::floor(pos) as usize).min(n_in - 1);
                let hi = (lo + 1).min(n_in - 1);
                (lo, hi, pos - lo as f64)
            })
            .collect()
    };
    let xs = taps(width, sw);
    let ys = taps(height, sh);

    Ok(Grid::from_fn(width, height, |x, y| {
        let (x0, x1, fx) = xs[x];
        let (y0, y1, fy) = ys[y];
        let top = lerp(src.get(x0, y0), src.get(x1, y0), fx);
        let bottom = lerp(src.get(x0, y1), src.get(x1, y1), fx);
        lerp(top, bottom, fy)
    }))
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else {
        a + t * (b - a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera_model::{FisheyeCamera, FisheyeParams, PinholeCamera};
    use core::f64::consts::FRAC_PI_4;

    fn fisheye(cx: f64, cy: f64, w: usize, h: usize) -> FisheyeCamera {
        FisheyeCamera::new(FisheyeParams {
            coeffs: [330.0, -12.0, 4.0, -1.0],
            cx,
            cy,
            width: w,
            height: h,
            theta_max: None,
        })
        .unwrap()
    }

    #[test]
    fn centered_coordinates_enumerate_offsets() {
        let cam = PinholeCamera::new(10.0, 1.5, 0.5, 4, 2).unwrap();
        let (cc_x, cc_y) = centered_coords(&cam);
        for y in 0..2 {
            assert_eq!(cc_x.row(y), &[-1.5, -0.5, 0.5, 1.5]);
        }
        assert_eq!(cc_y.row(0), &[-0.5; 4]);
        assert_eq!(cc_y.row(1), &[0.5; 4]);

        let cam = fisheye(3.0, 2.0, 8, 6);
        let (cc_x, cc_y) = centered_coords(&cam);
        assert_eq!(cc_x.get(0, 0), -3.0);
        assert_eq!((cc_x.get(3, 2), cc_y.get(3, 2)), (0.0, 0.0));
    }

    #[test]
    fn angle_map_examples() {
        let pin = PinholeCamera::new(100.0, 0.0, 0.0, 101, 1).unwrap();
        let (a_x, _) = angle_maps(&pin).unwrap();
        assert_eq!(a_x.get(0, 0), 0.0);
        assert!((a_x.get(100, 0) - FRAC_PI_4).abs() < 1e-15);

        let lin = FisheyeCamera::new(FisheyeParams {
            coeffs: [10.0, 0.0, 0.0, 0.0],
            cx: 0.0,
            cy: 0.0,
            width: 4,
            height: 2,
            theta_max: None,
        })
        .unwrap();
        let (a_x, a_y) = angle_maps(&lin).unwrap();
        assert!((a_x.get(3, 0) - 0.3).abs() < 1e-15);
        assert!((a_y.get(0, 1) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn angle_maps_report_offending_pixel() {
        // r(π/2) = 1.5708 px for this camera, far smaller than the sensor.
        let cam = FisheyeCamera::new(FisheyeParams {
            coeffs: [1.0, 0.0, 0.0, 0.0],
            cx: 0.0,
            cy: 0.0,
            width: 5,
            height: 1,
            theta_max: None,
        })
        .unwrap();
        assert!(matches!(
            angle_maps(&cam),
            Err(Error::PixelOutOfRange { x: 2, y: 0, .. })
        ));
    }

    #[test]
    fn angle_maps_are_antisymmetric() {
        let cam = fisheye(50.0, 40.0, 101, 81);
        let (a_x, a_y) = angle_maps(&cam).unwrap();
        for d in 0..=50 {
            assert_eq!(a_x.get(50 + d, 0), -a_x.get(50 - d, 0));
        }
        for d in 0..=40 {
            assert_eq!(a_y.get(0, 40 + d), -a_y.get(0, 40 - d));
        }
    }

    #[test]
    fn normalized_coordinates() {
        let (nc_x, nc_y) = normalized_coords(5, 3).unwrap();
        assert_eq!(nc_x.row(0), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(nc_y.get(2, 1), 0.0);
        assert_eq!((nc_y.get(0, 0), nc_y.get(0, 2)), (-1.0, 1.0));
        let (nc_x, _) = normalized_coords(7, 2).unwrap();
        assert_eq!((nc_x.get(0, 0), nc_x.get(6, 1)), (-1.0, 1.0));
        assert!(normalized_coords(1, 5).is_err());
    }

    #[test]
    fn tensor_has_six_channels_in_order() {
        let cam = fisheye(31.5, 23.5, 64, 48);
        let t = assemble_tensor(&cam).unwrap();
        assert_eq!(t.channels().len(), 6);
        assert_eq!(t.dims(), (64, 48));
        let other = assemble_tensor(&fisheye(30.0, 23.5, 64, 48)).unwrap();
        assert_eq!(
            t.channel(Channel::NormalizedX),
            other.channel(Channel::NormalizedX)
        );
        assert_eq!(
            t.channel(Channel::NormalizedY),
            other.channel(Channel::NormalizedY)
        );
        assert_ne!(
            t.channel(Channel::CenteredX),
            other.channel(Channel::CenteredX)
        );
        assert_ne!(t.channel(Channel::AngleX), other.channel(Channel::AngleX));
        let a_x = t.channel(Channel::AngleX);
        let cc_x = t.channel(Channel::CenteredX);
        for x in 0..64 {
            let c = cc_x.get(x, 7);
            let expected = libm::copysign(cam.unproject_radius(c.abs()).unwrap(), c);
            assert_eq!(a_x.get(x, 7), expected);
        }
    }

    #[test]
    fn integer_principal_shift_is_equivariant() {
        let a = assemble_tensor(&fisheye(30.0, 20.0, 64, 48)).unwrap();
        let b = assemble_tensor(&fisheye(33.0, 20.0, 64, 48)).unwrap();
        for x in 3..64 {
            let ch = [Channel::CenteredX, Channel::AngleX];
            for c in ch {
                assert_eq!(b.channel(c).get(x, 5), a.channel(c).get(x - 3, 5));
            }
        }
    }

    #[test]
    fn bilinear_resize_examples() {
        let g = Grid::from_vec(2, 2, alloc::vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let up = resize_bilinear(&g, 3, 3).unwrap();
        assert_eq!(up.get(1, 1), 1.5);
        assert_eq!(up.row(0), &[0.0, 0.5, 1.0]);
        assert_eq!(up.get(2, 2), 3.0);
        assert_eq!(resize_bilinear(&g, 2, 2).unwrap(), g);
        let c = Grid::filled(5, 4, 0.25);
        assert_eq!(resize_bilinear(&c, 9, 2).unwrap(), Grid::filled(9, 2, 0.25));
        assert!(resize_bilinear(&g, 0, 2).is_err());
        let one = resize_bilinear(&g, 1, 1).unwrap();
        assert_eq!(one.get(0, 0), 0.0);
    }

    #[test]
    fn resize_keeps_normalized_corners() {
        let t = assemble_tensor(&fisheye(31.5, 23.5, 64, 48)).unwrap();
        let r = t.resize(17, 9).unwrap();
        let nc_x = r.channel(Channel::NormalizedX);
        assert_eq!((nc_x.get(0, 0), nc_x.get(16, 8)), (-1.0, 1.0));
    }
}
