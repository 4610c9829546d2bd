//! Inverse warping between fisheye frames and dynamic-object masking.
//!
//! A target pixel is unprojected with its predicted Euclidean distance,
//! moved into the source frame by the stored pose, projected with the source
//! camera and used to sample the source image. Pixels whose reprojection
//! falls outside the source image or field of view are marked invalid rather
//! than clamped.

use alloc::vec::Vec;

use libm::{floor, round};
use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::camera_model::FisheyeCamera;
use crate::error::{Error, Result};
use crate::grid::{ensure_same_dims, pairwise_sum, Grid, LabelMap};

/// Lower end of the predicted distance range, meters.
pub const MIN_DISTANCE: f64 = 0.1;
/// Upper end of the predicted distance range, meters.
pub const MAX_DISTANCE: f64 = 100.0;
/// Slope `m` of `D = m·σ + n`.
pub const DISTANCE_SCALE: f64 = MAX_DISTANCE - MIN_DISTANCE;
/// Offset `n` of `D = m·σ + n`.
pub const DISTANCE_OFFSET: f64 = MIN_DISTANCE;

/// Reprojected coordinates closer than this to an integer are snapped to it,
/// so identity warps sample pixel centers exactly.
const SNAP_TOLERANCE: f64 = 1e-9;
const ROTATION_TOLERANCE: f64 = 1e-9;

/// Rigid transform mapping target-frame points into the source frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if rotation
            .iter()
            .chain(translation.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("pose"));
        }
        let orthogonality = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        if orthogonality > ROTATION_TOLERANCE
            || (rotation.determinant() - 1.0).abs() > ROTATION_TOLERANCE
        {
            return Err(Error::InvalidRotation);
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Rotation given as axis · angle (radians), plus a translation in meters.
    pub fn from_axis_angle(axis_angle: Vector3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let rotation = *Rotation3::from_scaled_axis(axis_angle).matrix();
        Self::new(rotation, translation)
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    #[inline]
    pub fn transform(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Pose) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }
}

/// Euclidean ray lengths, constrained to `[MIN_DISTANCE, MAX_DISTANCE]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap(Grid);

impl DistanceMap {
    pub fn new(grid: Grid) -> Result<Self> {
        if let Some(&bad) = grid
            .data()
            .iter()
            .find(|d| !(MIN_DISTANCE..=MAX_DISTANCE).contains(*d))
        {
            return Err(Error::Domain {
                what: "distance",
                value: bad,
            });
        }
        Ok(Self(grid))
    }

    pub fn grid(&self) -> &Grid {
        &self.0
    }

    pub fn into_grid(self) -> Grid {
        self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    /// Multiplies every distance by `factor`, re-checking the range.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.map(|d| d * factor))
    }
}

/// `D = 99.9·σ + 0.1` for a sigmoid output `σ ∈ [0, 1]`.
pub fn distance_from_sigmoid(sigma: &Grid) -> Result<DistanceMap> {
    if let Some(&bad) = sigma.data().iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::Domain {
            what: "sigmoid",
            value: bad,
        });
    }
    DistanceMap::new(sigma.map(|s| DISTANCE_SCALE * s + DISTANCE_OFFSET))
}

/// Inverse of [`distance_from_sigmoid`].
pub fn sigmoid_from_distance(distance: &DistanceMap) -> Grid {
    distance
        .grid()
        .map(|d| (d - DISTANCE_OFFSET) / DISTANCE_SCALE)
}

/// Per-pixel 3D points on the image lattice; `None` where the pixel lies
/// beyond the camera's invertible radius.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    width: usize,
    height: usize,
    points: Vec<Option<Vector3<f64>>>,
}

impl PointCloud {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> Option<Vector3<f64>> {
        self.points[y * self.width + x]
    }

    pub fn points(&self) -> &[Option<Vector3<f64>>] {
        &self.points
    }
}

pub fn unproject_map(cam: &FisheyeCamera, distance: &DistanceMap) -> Result<PointCloud> {
    ensure_same_dims((cam.width(), cam.height()), distance.dims())?;
    let (width, height) = distance.dims();
    let mut points = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let d = distance.grid().get(x, y);
            points.push(cam.unproject_pixel(x as f64, y as f64, d).ok());
        }
    }
    Ok(PointCloud {
        width,
        height,
        points,
    })
}

#[inline]
fn snap(v: f64) -> f64 {
    let r = round(v);
    if (v - r).abs() < SNAP_TOLERANCE {
        r
    } else {
        v
    }
}

/// Continuous source-image coordinates for every target pixel, or `None`
/// where the reprojection is unusable.
pub fn reprojection_coords(
    distance: &DistanceMap,
    pose: &Pose,
    cam_tgt: &FisheyeCamera,
    cam_src: &FisheyeCamera,
) -> Result<Vec<Option<(f64, f64)>>> {
    let cloud = unproject_map(cam_tgt, distance)?;
    let max_u = (cam_src.width() - 1) as f64;
    let max_v = (cam_src.height() - 1) as f64;
    Ok(cloud
        .points()
        .iter()
        .map(|p| {
            let p = pose.transform(p.as_ref()?);
            let uv = cam_src.project_point(&p).ok()?;
            let (u, v) = (snap(uv.x), snap(uv.y));
            ((0.0..=max_u).contains(&u) && (0.0..=max_v).contains(&v)).then_some((u, v))
        })
        .collect())
}

/// Bilinear sample at continuous coordinates inside `[0, w−1] × [0, h−1]`.
#[inline]
pub fn sample_bilinear(img: &Grid, u: f64, v: f64) -> f64 {
    let (w, h) = img.dims();
    let x0 = (floor(u) as usize).min(w - 1);
    let y0 = (floor(v) as usize).min(h - 1);
    let (fx, fy) = (u - x0 as f64, v - y0 as f64);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let lerp = |a: f64, b: f64, t: f64| if t == 0.0 { a } else { a + t * (b - a) };
    let top = lerp(img.get(x0, y0), img.get(x1, y0), fx);
    let bottom = lerp(img.get(x0, y1), img.get(x1, y1), fx);
    lerp(top, bottom, fy)
}

/// Result of [`warp_frame`]: reconstructed channels and a {0,1} validity grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Warped {
    pub image: Vec<Grid>,
    pub validity: Grid,
}

/// Reconstructs the target view from source channels `src`.
///
/// Invalid pixels are 0 in every output channel.
pub fn warp_frame(
    src: &[Grid],
    distance: &DistanceMap,
    pose: &Pose,
    cam_tgt: &FisheyeCamera,
    cam_src: &FisheyeCamera,
) -> Result<Warped> {
    for c in src {
        ensure_same_dims((cam_src.width(), cam_src.height()), c.dims())?;
    }
    let coords = reprojection_coords(distance, pose, cam_tgt, cam_src)?;
    let (w, h) = distance.dims();
    let validity = Grid::from_vec(
        w,
        h,
        coords
            .iter()
            .map(|c| if c.is_some() { 1.0 } else { 0.0 })
            .collect(),
    )?;
    let image = src
        .iter()
        .map(|channel| {
            let data = coords
                .iter()
                .map(|c| c.map_or(0.0, |(u, v)| sample_bilinear(channel, u, v)))
                .collect();
            Grid::from_vec(w, h, data)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Warped { image, validity })
}

/// Nearest-neighbour warp of a label map; unusable pixels get [`LabelMap::UNKNOWN`].
pub fn warp_mask_nn(
    mask: &LabelMap,
    distance: &DistanceMap,
    pose: &Pose,
    cam_tgt: &FisheyeCamera,
    cam_src: &FisheyeCamera,
) -> Result<LabelMap> {
    ensure_same_dims((cam_src.width(), cam_src.height()), mask.dims())?;
    let coords = reprojection_coords(distance, pose, cam_tgt, cam_src)?;
    let (w, h) = distance.dims();
    let labels = coords
        .iter()
        .map(|c| match c {
            Some((u, v)) => mask.get(round(*u) as usize, round(*v) as usize),
            None => LabelMap::UNKNOWN,
        })
        .collect();
    LabelMap::from_vec(w, h, labels)
}

/// 1 where neither the target labels nor the projected labels are dynamic.
pub fn dynamic_mask(target: &LabelMap, projected: &LabelMap, dynamic: &[u32]) -> Result<Grid> {
    ensure_same_dims(target.dims(), projected.dims())?;
    let (w, h) = target.dims();
    let data = target
        .data()
        .iter()
        .zip(projected.data())
        .map(|(a, b)| {
            if dynamic.contains(a) || dynamic.contains(b) {
                0.0
            } else {
                1.0
            }
        })
        .collect();
    Grid::from_vec(w, h, data)
}

/// A masked mean and whether the mask selected nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskedMean {
    pub value: f64,
    pub degenerate: bool,
}

/// `Σ(loss·μ) / Σμ`, or 0 flagged degenerate when `Σμ = 0`.
pub fn apply_mask(loss: &Grid, mask: &Grid) -> Result<MaskedMean> {
    ensure_same_dims(loss.dims(), mask.dims())?;
    let weighted: Vec<f64> = loss
        .data()
        .iter()
        .zip(mask.data())
        .map(|(l, m)| l * m)
        .collect();
    let total = pairwise_sum(mask.data());
    if total == 0.0 {
        return Ok(MaskedMean {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(MaskedMean {
        value: pairwise_sum(&weighted) / total,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera_model::FisheyeParams;
    use alloc::vec;

    /// Monotone on [0, π/2] with every pixel inside the image circle.
    fn cam(w: usize, h: usize) -> FisheyeCamera {
        let s = 0.5 * w as f64;
        FisheyeCamera::new(FisheyeParams {
            coeffs: [s, -0.1 * s, 0.02 * s, -0.005 * s],
            cx: (w as f64 - 1.0) / 2.0,
            cy: (h as f64 - 1.0) / 2.0,
            width: w,
            height: h,
            theta_max: None,
        })
        .unwrap()
    }

    fn texture(w: usize, h: usize) -> Grid {
        Grid::from_fn(w, h, |x, y| {
            0.5 + 0.3 * libm::sin(x as f64 * 0.31) * libm::cos(y as f64 * 0.17)
        })
    }

    #[test]
    fn sigmoid_mapping() {
        let s = Grid::from_vec(3, 1, vec![0.0, 0.5, 1.0]).unwrap();
        let d = distance_from_sigmoid(&s).unwrap();
        assert_eq!(d.grid().get(0, 0), 0.1);
        assert!((d.grid().get(1, 0) - 50.05).abs() < 1e-12);
        assert_eq!(d.grid().get(2, 0), 100.0);
        let back = sigmoid_from_distance(&d);
        for (a, b) in back.data().iter().zip(s.data()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(distance_from_sigmoid(&Grid::filled(1, 1, 1.5)).is_err());
        assert!(DistanceMap::new(Grid::filled(1, 1, 0.05)).is_err());
    }

    #[test]
    fn pose_validation_and_inverse() {
        let mut bad = Matrix3::identity();
        bad[(0, 0)] = 2.0;
        assert_eq!(
            Pose::new(bad, Vector3::zeros()),
            Err(Error::InvalidRotation)
        );
        let reflection = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(Pose::new(reflection, Vector3::zeros()).is_err());
        let pose = Pose::from_axis_angle(Vector3::new(0.1, -0.2, 0.3), Vector3::new(1.0, 2.0, 3.0))
            .unwrap();
        let p = Vector3::new(0.3, -0.7, 4.0);
        let round_trip = pose.inverse().transform(&pose.transform(&p));
        assert!((round_trip - p).norm() < 1e-12);
    }

    #[test]
    fn unproject_map_examples() {
        let c = cam(9, 9);
        let d = DistanceMap::new(Grid::filled(9, 9, 3.0)).unwrap();
        let cloud = unproject_map(&c, &d).unwrap();
        let axis = cloud.get(4, 4).unwrap();
        assert_eq!((axis.x, axis.y, axis.z), (0.0, 0.0, 3.0));
        let doubled = unproject_map(&c, &d.scaled(2.0).unwrap()).unwrap();
        for (a, b) in cloud.points().iter().zip(doubled.points()) {
            assert!((a.unwrap() * 2.0 - b.unwrap()).norm() < 1e-12);
        }
        for (x, y) in [(0, 0), (1, 7), (8, 3)] {
            let direct = c.unproject_pixel(x as f64, y as f64, 3.0).unwrap();
            assert_eq!(cloud.get(x, y).unwrap(), direct);
        }
    }

    #[test]
    fn pixels_beyond_radius_are_marked_invalid() {
        let c = FisheyeCamera::new(FisheyeParams {
            coeffs: [3.0, 0.0, 0.0, 0.0],
            cx: 4.0,
            cy: 4.0,
            width: 9,
            height: 9,
            theta_max: Some(1.0),
        })
        .unwrap();
        let d = DistanceMap::new(Grid::filled(9, 9, 1.0)).unwrap();
        let cloud = unproject_map(&c, &d).unwrap();
        assert!(cloud.get(0, 0).is_none());
        assert!(cloud.get(4, 4).is_some());
    }

    #[test]
    fn identity_warp_is_exact() {
        let c = cam(48, 32);
        let img = texture(48, 32);
        let d = DistanceMap::new(Grid::filled(48, 32, 7.0)).unwrap();
        let warped =
            warp_frame(core::slice::from_ref(&img), &d, &Pose::identity(), &c, &c).unwrap();
        assert_eq!(warped.validity, Grid::filled(48, 32, 1.0));
        assert_eq!(warped.image[0], img);
    }

    #[test]
    fn constant_image_survives_translation() {
        let c = cam(32, 24);
        let img = Grid::filled(32, 24, 0.37);
        let d = DistanceMap::new(Grid::filled(32, 24, 5.0)).unwrap();
        let pose = Pose::new(Matrix3::identity(), Vector3::new(0.0, 0.0, -0.5)).unwrap();
        let warped = warp_frame(&[img], &d, &pose, &c, &c).unwrap();
        for (v, m) in warped.image[0].data().iter().zip(warped.validity.data()) {
            if *m == 1.0 {
                assert!((v - 0.37).abs() < 1e-15);
            }
        }
        assert!(warped.validity.sum() > 0.0);
    }

    #[test]
    fn out_of_view_is_invalid_not_clamped() {
        let c = cam(16, 16);
        let d = DistanceMap::new(Grid::filled(16, 16, 1.0)).unwrap();
        // Everything ends up behind the camera.
        let pose = Pose::new(Matrix3::identity(), Vector3::new(0.0, 0.0, -50.0)).unwrap();
        let warped = warp_frame(&[Grid::filled(16, 16, 1.0)], &d, &pose, &c, &c).unwrap();
        assert_eq!(warped.validity.sum(), 0.0);
        assert_eq!(warped.image[0].sum(), 0.0);
    }

    #[test]
    fn mask_warp_examples() {
        let c = cam(20, 16);
        let d = DistanceMap::new(Grid::filled(20, 16, 4.0)).unwrap();
        let labels = LabelMap::from_fn(20, 16, |x, y| ((x / 3 + y / 5) % 4) as u32);
        let same = warp_mask_nn(&labels, &d, &Pose::identity(), &c, &c).unwrap();
        assert_eq!(same, labels);

        let uniform = LabelMap::filled(20, 16, 7);
        let pose = Pose::from_axis_angle(Vector3::new(0.0, 0.05, 0.0), Vector3::new(0.2, 0.0, 0.1))
            .unwrap();
        let moved = warp_mask_nn(&uniform, &d, &pose, &c, &c).unwrap();
        assert!(moved
            .data()
            .iter()
            .all(|&l| l == 7 || l == LabelMap::UNKNOWN));
    }

    #[test]
    fn dynamic_mask_examples() {
        let a = LabelMap::from_vec(3, 1, vec![0, 1, 2]).unwrap();
        let b = LabelMap::from_vec(3, 1, vec![0, 0, 1]).unwrap();
        assert_eq!(dynamic_mask(&a, &b, &[]).unwrap(), Grid::filled(3, 1, 1.0));
        let mu = dynamic_mask(&a, &b, &[1]).unwrap();
        assert_eq!(mu.data(), &[1.0, 0.0, 0.0]);
        let unknown = LabelMap::filled(3, 1, LabelMap::UNKNOWN);
        assert_eq!(
            dynamic_mask(&unknown, &b, &[2]).unwrap().data(),
            &[1.0, 1.0, 1.0]
        );
        assert!(dynamic_mask(&a, &LabelMap::filled(2, 1, 0), &[]).is_err());
    }

    #[test]
    fn masked_mean_examples() {
        let loss = Grid::from_fn(4, 4, |x, y| (x + 4 * y) as f64);
        let all = apply_mask(&loss, &Grid::filled(4, 4, 1.0)).unwrap();
        assert_eq!(
            all,
            MaskedMean {
                value: 7.5,
                degenerate: false
            }
        );
        let none = apply_mask(&loss, &Grid::zeros(4, 4)).unwrap();
        assert_eq!(
            none,
            MaskedMean {
                value: 0.0,
                degenerate: true
            }
        );
        let checker = Grid::from_fn(4, 4, |x, y| ((x + y) % 2) as f64);
        let manual: f64 = (0..16)
            .filter(|i| (i % 4 + i / 4) % 2 == 1)
            .map(|i| i as f64)
            .sum::<f64>()
            / 8.0;
        assert_eq!(apply_mask(&loss, &checker).unwrap().value, manual);
    }
}
