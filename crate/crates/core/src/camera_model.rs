//! Polynomial fisheye camera and a reference pinhole camera.
//!
//! The fisheye model maps the incidence angle `θ` of a ray (measured from the
//! optical axis) to an image radius `r(θ) = a1·θ + a2·θ² + a3·θ³ + a4·θ⁴` in
//! pixels around the principal point. The polynomial has no closed-form
//! inverse worth using, so [`FisheyeCamera::unproject_radius`] runs a
//! bracketed Newton iteration seeded from a small table built at construction.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use libm::{atan, atan2, cos, hypot, sin};
use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};

/// Samples used to verify monotonicity of `r(θ)` on `[0, theta_max]`.
const MONOTONICITY_SAMPLES: usize = 8192;
/// Entries of the bracket table used to seed the Newton inversion.
const SEED_ENTRIES: usize = 65;
const RESIDUAL_TOLERANCE: f64 = 1e-12;
const MAX_NEWTON_ITERATIONS: usize = 100;

/// Raw calibration values for a [`FisheyeCamera`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisheyeParams {
    /// Distortion coefficients `a1..a4`, pixels per rad^k.
    pub coeffs: [f64; 4],
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    /// Maximum supported incidence angle; `None` means π/2.
    pub theta_max: Option<f64>,
}

/// A validated polynomial fisheye camera. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FisheyeCamera {
    coeffs: [f64; 4],
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
    theta_max: f64,
    max_radius: f64,
    seed_radii: Vec<f64>,
}

impl FisheyeCamera {
    pub fn new(params: FisheyeParams) -> Result<Self> {
        let FisheyeParams {
            coeffs,
            cx,
            cy,
            width,
            height,
            theta_max,
        } = params;
        let theta_max = theta_max.unwrap_or(FRAC_PI_2);

        if coeffs.iter().any(|c| !c.is_finite()) || !cx.is_finite() || !cy.is_finite() {
            return Err(Error::NonFinite("camera parameters"));
        }
        if !(theta_max.is_finite() && theta_max > 0.0) {
            return Err(Error::InvalidCamera("theta_max must be positive"));
        }
        if coeffs[0] <= 0.0 {
            return Err(Error::InvalidCamera("a1 must be positive"));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("sensor dimensions must be at least 1"));
        }
        if !(0.0..=width as f64).contains(&cx) || !(0.0..=height as f64).contains(&cy) {
            return Err(Error::InvalidCamera("principal point outside the sensor"));
        }

        let mut cam = Self {
            coeffs,
            cx,
            cy,
            width,
            height,
            theta_max,
            max_radius: 0.0,
            seed_radii: Vec::new(),
        };

        let mut previous = 0.0;
        for k in 0..=MONOTONICITY_SAMPLES {
            let theta = theta_max * k as f64 / MONOTONICITY_SAMPLES as f64;
            let r = cam.radius_unchecked(theta);
            if cam.slope(theta) <= 0.0 || (k > 0 && r <= previous) {
                return Err(Error::NonMonotone { theta, theta_max });
            }
            previous = r;
        }

        cam.max_radius = cam.radius_unchecked(theta_max);
        cam.seed_radii = (0..SEED_ENTRIES)
            .map(|k| cam.radius_unchecked(cam.seed_theta(k)))
            .collect();
        Ok(cam)
    }

    pub fn coeffs(&self) -> [f64; 4] {
        self.coeffs
    }

    pub fn principal_point(&self) -> (f64, f64) {
        (self.cx, self.cy)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    /// `r(theta_max)`: the largest radius that can be unprojected.
    pub fn max_radius(&self) -> f64 {
        self.max_radius
    }

    pub fn params(&self) -> FisheyeParams {
        FisheyeParams {
            coeffs: self.coeffs,
            cx: self.cx,
            cy: self.cy,
            width: self.width,
            height: self.height,
            theta_max: Some(self.theta_max),
        }
    }

    /// Same intrinsics with a different principal point.
    pub fn with_principal_point(&self, cx: f64, cy: f64) -> Result<Self> {
        Self::new(FisheyeParams {
            cx,
            cy,
            ..self.params()
        })
    }

    #[inline]
    fn seed_theta(&self, k: usize) -> f64 {
        self.theta_max * k as f64 / (SEED_ENTRIES - 1) as f64
    }

    #[inline]
    fn radius_unchecked(&self, theta: f64) -> f64 {
        let [a1, a2, a3, a4] = self.coeffs;
        theta * (a1 + theta * (a2 + theta * (a3 + theta * a4)))
    }

    /// `dr/dθ`.
    #[inline]
    pub fn slope(&self, theta: f64) -> f64 {
        let [a1, a2, a3, a4] = self.coeffs;
        a1 + theta * (2.0 * a2 + theta * (3.0 * a3 + theta * 4.0 * a4))
    }

    /// Image radius in pixels for incidence angle `theta`.
    pub fn project_angle(&self, theta: f64) -> Result<f64> {
        if !(0.0..=self.theta_max).contains(&theta) {
            return Err(Error::Domain {
                what: "theta",
                value: theta,
            });
        }
        Ok(self.radius_unchecked(theta))
    }

    /// Incidence angle whose projection is `radius`.
    ///
    /// The result satisfies `|r(θ) − radius| ≤ 1e-12·max(1, radius)` unless the
    /// bracket collapses to adjacent floats first.
    pub fn unproject_radius(&self, radius: f64) -> Result<f64> {
        if !(0.0..=self.max_radius).contains(&radius) {
            return Err(Error::Domain {
                what: "radius",
                value: radius,
            });
        }
        if radius == 0.0 {
            return Ok(0.0);
        }

        // seed_radii[0] == 0 < radius, so the bracket index is at least 1.
        let upper = self
            .seed_radii
            .partition_point(|&r| r < radius)
            .min(SEED_ENTRIES - 1);
        let (r_lo, r_hi) = (self.seed_radii[upper - 1], self.seed_radii[upper]);
        let mut lo = self.seed_theta(upper - 1);
        let mut hi = self.seed_theta(upper);
        if r_hi == radius {
            return Ok(hi);
        }

        let tolerance = RESIDUAL_TOLERANCE * radius.max(1.0);
        let mut theta = lo + (hi - lo) * (radius - r_lo) / (r_hi - r_lo);
        for _ in 0..MAX_NEWTON_ITERATIONS {
            let residual = self.radius_unchecked(theta) - radius;
            if residual.abs() <= tolerance {
                break;
            }
            if residual < 0.0 {
                lo = theta;
            } else {
                hi = theta;
            }
            let mut next = theta - residual / self.slope(theta);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if next == theta {
                break;
            }
            theta = next;
        }
        Ok(theta.clamp(0.0, self.theta_max))
    }

    /// Projects a camera-frame point (z forward) to pixel coordinates `(u, v)`.
    pub fn project_point(&self, p: &Vector3<f64>) -> Result<Vector2<f64>> {
        let planar = hypot(p.x, p.y);
        if planar == 0.0 && p.z == 0.0 {
            return Err(Error::Domain {
                what: "point norm",
                value: 0.0,
            });
        }
        let theta = atan2(planar, p.z);
        if theta > self.theta_max {
            return Err(Error::OutsideFieldOfView {
                theta,
                theta_max: self.theta_max,
            });
        }
        let r = self.radius_unchecked(theta);
        if planar == 0.0 {
            return Ok(Vector2::new(self.cx, self.cy));
        }
        // cos φ = x / planar, sin φ = y / planar
        Ok(Vector2::new(
            self.cx + r * p.x / planar,
            self.cy + r * p.y / planar,
        ))
    }

    /// Unit ray through pixel `(u, v)`.
    pub fn pixel_ray(&self, u: f64, v: f64) -> Result<Vector3<f64>> {
        let (dx, dy) = (u - self.cx, v - self.cy);
        let rho = hypot(dx, dy);
        let theta = self.unproject_radius(rho)?;
        let phi = if rho == 0.0 { 0.0 } else { atan2(dy, dx) };
        let s = sin(theta);
        Ok(Vector3::new(s * cos(phi), s * sin(phi), cos(theta)))
    }

    /// 3D point at Euclidean range `distance` along the ray through `(u, v)`.
    pub fn unproject_pixel(&self, u: f64, v: f64, distance: f64) -> Result<Vector3<f64>> {
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::Domain {
                what: "distance",
                value: distance,
            });
        }
        Ok(self.pixel_ray(u, v)? * distance)
    }
}

/// Reference rectilinear camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinholeCamera {
    f: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
}

impl PinholeCamera {
    pub fn new(f: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::InvalidCamera("focal length must be positive"));
        }
        if !cx.is_finite() || !cy.is_finite() {
            return Err(Error::NonFinite("camera parameters"));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("sensor dimensions must be at least 1"));
        }
        Ok(Self {
            f,
            cx,
            cy,
            width,
            height,
        })
    }

    pub fn focal_length(&self) -> f64 {
        self.f
    }
}

/// What the camera tensor needs from a camera: geometry of the sensor and
/// the incidence angle along one image axis.
pub trait AxisAngleModel {
    fn principal_point(&self) -> (f64, f64);
    fn sensor_size(&self) -> (usize, usize);
    /// Incidence angle of a pixel displaced by `offset` pixels along a single
    /// axis from the principal point. Odd in `offset`.
    fn axis_angle(&self, offset: f64) -> Result<f64>;
    /// Largest `|offset|` accepted by [`AxisAngleModel::axis_angle`].
    fn max_axis_offset(&self) -> f64;
}

impl AxisAngleModel for FisheyeCamera {
    fn principal_point(&self) -> (f64, f64) {
        (self.cx, self.cy)
    }

    fn sensor_size(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn axis_angle(&self, offset: f64) -> Result<f64> {
        let theta = self.unproject_radius(offset.abs())?;
        Ok(if offset < 0.0 { -theta } else { theta })
    }

    fn max_axis_offset(&self) -> f64 {
        self.max_radius
    }
}

impl AxisAngleModel for PinholeCamera {
    fn principal_point(&self) -> (f64, f64) {
        (self.cx, self.cy)
    }

    fn sensor_size(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn axis_angle(&self, offset: f64) -> Result<f64> {
        Ok(atan(offset / self.f))
    }

    fn max_axis_offset(&self) -> f64 {
        f64::INFINITY
    }
}

/// Precomputed radius → θ table with linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaLut {
    radii: Vec<f64>,
    thetas: Vec<f64>,
}

impl ThetaLut {
    /// Tabulates `resolution` radii spaced evenly over `[0, r(theta_max)]`.
    pub fn build(cam: &FisheyeCamera, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidParameter("LUT resolution must be at least 2"));
        }
        let max_radius = cam.max_radius();
        let last = (resolution - 1) as f64;
        let mut radii = Vec::with_capacity(resolution);
        let mut thetas = Vec::with_capacity(resolution);
        for i in 0..resolution {
            let r = if i == resolution - 1 {
                max_radius
            } else {
                max_radius * i as f64 / last
            };
            radii.push(r);
            thetas.push(if i == resolution - 1 {
                cam.theta_max()
            } else {
                cam.unproject_radius(r)?
            });
        }
        Ok(Self { radii, thetas })
    }

    pub fn resolution(&self) -> usize {
        self.radii.len()
    }

    pub fn max_radius(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }

    /// `(radius, θ)` pairs in increasing order.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.radii.iter().copied().zip(self.thetas.iter().copied())
    }

    pub fn lookup(&self, radius: f64) -> Result<f64> {
        if !(0.0..=self.max_radius()).contains(&radius) {
            return Err(Error::Domain {
                what: "radius",
                value: radius,
            });
        }
        let upper = self.radii.partition_point(|&r| r < radius);
        if self.radii[upper] == radius {
            return Ok(self.thetas[upper]);
        }
        let lower = upper - 1;
        let t = (radius - self.radii[lower]) / (self.radii[upper] - self.radii[lower]);
        Ok(self.thetas[lower] + t * (self.thetas[upper] - self.thetas[lower]))
    }
}
