//! Analytic renderer for a textured plane, used by the view-synthesis demo
//! and as ground truth for warping.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use libm::{cos, sin};

use crate::camera_model::FisheyeCamera;
use crate::error::Result;
use crate::geometry_warp::{DistanceMap, Pose, MAX_DISTANCE, MIN_DISTANCE};
use crate::grid::Grid;

/// The plane `z = depth` of a reference frame, carrying a smooth periodic
/// texture in its `(x, y)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TexturedPlane {
    pub depth: f64,
    /// Texture period in meters.
    pub period: f64,
    pub channels: usize,
}

impl Default for TexturedPlane {
    fn default() -> Self {
        Self {
            depth: 2.0,
            period: 1.2,
            channels: 3,
        }
    }
}

/// One rendered view: image channels, ray lengths and a {0,1} hit mask.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedView {
    pub image: Vec<Grid>,
    pub distance: DistanceMap,
    pub hit: Grid,
}

impl TexturedPlane {
    /// Texture value of channel `c` at plane coordinates `(x, y)`, in `[0.15, 0.85]`.
    pub fn texture(&self, x: f64, y: f64, c: usize) -> f64 {
        let phase = c as f64;
        0.5 + 0.35
            * sin(TAU * x / self.period + 1.3 * phase)
            * cos(0.8 * TAU * y / self.period + 0.7 * phase)
    }

    /// Renders the plane seen by `cam`, where `frame` maps reference-frame
    /// points into the camera frame.
    ///
    /// Rays that miss the plane, or hit it outside the distance range, get
    /// texture 0, distance `MAX_DISTANCE` and hit 0.
    pub fn render(&self, cam: &FisheyeCamera, frame: &Pose) -> Result<RenderedView> {
        let (w, h) = (cam.width(), cam.height());
        let normal = frame.rotation().column(2).into_owned();
        let offset = self.depth + normal.dot(frame.translation());
        let inverse = frame.inverse();

        let mut image: Vec<Vec<f64>> = (0..self.channels)
            .map(|_| Vec::with_capacity(w * h))
            .collect();
        let mut distance = Vec::with_capacity(w * h);
        let mut hit = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let sample = cam.pixel_ray(x as f64, y as f64).ok().and_then(|ray| {
                    let cos_incidence = normal.dot(&ray);
                    if cos_incidence <= 1e-9 {
                        return None;
                    }
                    let s = offset / cos_incidence;
                    (MIN_DISTANCE..=MAX_DISTANCE)
                        .contains(&s)
                        .then(|| (s, inverse.transform(&(ray * s))))
                });
                match sample {
                    Some((s, p)) => {
                        for (c, channel) in image.iter_mut().enumerate() {
                            channel.push(self.texture(p.x, p.y, c));
                        }
                        distance.push(s);
                        hit.push(1.0);
                    }
                    None => {
                        for channel in image.iter_mut() {
                            channel.push(0.0);
                        }
                        distance.push(MAX_DISTANCE);
                        hit.push(0.0);
                    }
                }
            }
        }
        Ok(RenderedView {
            image: image
                .into_iter()
                .map(|c| Grid::from_vec(w, h, c))
                .collect::<Result<_>>()?,
            distance: DistanceMap::new(Grid::from_vec(w, h, distance)?)?,
            hit: Grid::from_vec(w, h, hit)?,
        })
    }
}
