//! Object shape representations fitted to instance masks.
//!
//! Geometry uses continuous pixel coordinates: pixel `(col j, row i)` covers
//! `[j, j+1] × [i, i+1]` and its center is `(j + 0.5, i + 0.5)`. Contours pass
//! through the centers of boundary pixels.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;

use libm::{atan2, cos, floor, hypot, sin, sqrt};
use nalgebra::Point2;

use crate::error::{Error, Result};
use crate::grid::Grid;

pub type Point = Point2<f64>;

/// Douglas-Peucker tolerance used by adaptive sampling, pixels.
pub const DEFAULT_SIMPLIFY_EPSILON: f64 = 1.5;
/// Vertex count of the polygon representation.
pub const DEFAULT_POLYGON_VERTICES: usize = 24;
const CURVATURE_FLOOR: f64 = 1e-9;
const ON_EDGE_TOLERANCE: f64 = 1e-9;

/// Binary foreground mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl InstanceMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Foreground wherever the grid value is nonzero.
    pub fn from_grid(grid: &Grid) -> Self {
        Self::from_fn(grid.width(), grid.height(), |x, y| grid.get(x, y) != 0.0)
    }

    pub fn to_grid(&self) -> Grid {
        Grid::from_fn(self.width, self.height, |x, y| {
            if self.get(x, y) {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.get(x as usize, y as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn area(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    /// Mean of foreground pixel centers.
    pub fn centroid(&self) -> Result<Point> {
        let n = self.area();
        if n == 0 {
            return Err(Error::EmptyMask);
        }
        let (mut sx, mut sy) = (0.0, 0.0);
        for (x, y) in self.foreground() {
            sx += x as f64 + 0.5;
            sy += y as f64 + 0.5;
        }
        Ok(Point::new(sx / n as f64, sy / n as f64))
    }

    /// 4-connected components, each as a list of pixels, in raster order of
    /// their first pixel.
    pub fn components(&self) -> Vec<Vec<(usize, usize)>> {
        let mut seen = vec![false; self.data.len()];
        let mut out = Vec::new();
        for start in 0..self.data.len() {
            if !self.data[start] || seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(i) = queue.pop_front() {
                let (x, y) = (i % self.width, i / self.width);
                comp.push((x, y));
                let mut visit = |nx: usize, ny: usize| {
                    let j = ny * self.width + nx;
                    if self.data[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                };
                if x > 0 {
                    visit(x - 1, y);
                }
                if x + 1 < self.width {
                    visit(x + 1, y);
                }
                if y > 0 {
                    visit(x, y - 1);
                }
                if y + 1 < self.height {
                    visit(x, y + 1);
                }
            }
            out.push(comp);
        }
        out
    }

    /// The largest 4-connected component as its own mask.
    pub fn largest_component(&self) -> Self {
        let mut out = Self::empty(self.width, self.height);
        if let Some(best) = self.components().into_iter().max_by_key(|c| c.len()) {
            for (x, y) in best {
                out.set(x, y, true);
            }
        }
        out
    }

    fn is_boundary(&self, x: usize, y: usize) -> bool {
        let (x, y) = (x as isize, y as isize);
        !(self.get_signed(x - 1, y)
            && self.get_signed(x + 1, y)
            && self.get_signed(x, y - 1)
            && self.get_signed(x, y + 1))
    }

    /// Lattice corners of every foreground pixel on the mask boundary.
    fn boundary_corners(&self) -> Vec<Point> {
        let mut pts = Vec::new();
        for (x, y) in self.foreground() {
            if self.is_boundary(x, y) {
                let (x, y) = (x as f64, y as f64);
                pts.extend_from_slice(&[
                    Point::new(x, y),
                    Point::new(x + 1.0, y),
                    Point::new(x, y + 1.0),
                    Point::new(x + 1.0, y + 1.0),
                ]);
            }
        }
        pts
    }
}

/// A closed boundary: an ordered cycle of points.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    points: Vec<Point>,
}

impl Contour {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::ContourTooShort(points.len(), 3));
        }
        let n = points.len();
        if (0..n).any(|i| points[i] == points[(i + 1) % n]) {
            return Err(Error::InvalidParameter(
                "contour has consecutive duplicate points",
            ));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    fn at(&self, i: isize) -> Point {
        let n = self.points.len() as isize;
        self.points[i.rem_euclid(n) as usize]
    }

    /// Closed-polygon perimeter.
    pub fn length(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| (self.points[(i + 1) % n] - self.points[i]).norm())
            .sum()
    }
}

/// Clockwise 8-neighbourhood (image y grows downward), starting north.
const NEIGHBOURS: [(isize, isize); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];
const WEST: usize = 6;

fn neighbour_index(dx: isize, dy: isize) -> usize {
    NEIGHBOURS
        .iter()
        .position(|&d| d == (dx, dy))
        .expect("unit offset")
}

/// Moore-neighbour boundary trace (clockwise) with Jacob's stopping rule.
pub fn extract_contour(mask: &InstanceMask) -> Result<Contour> {
    let components = mask.components();
    match components.len() {
        0 => return Err(Error::EmptyMask),
        1 => {}
        n => return Err(Error::MultipleComponents(n)),
    }
    // The raster-first pixel has background to its west.
    let (sx, sy) = components[0][0];
    let start = (sx as isize, sy as isize);
    let mut current = start;
    let mut backtrack = WEST;
    let mut pixels = vec![start];
    let limit = 4 * mask.width * mask.height + 8;

    for _ in 0..limit {
        let mut next = None;
        for step in 1..=8 {
            let d = (backtrack + step) % 8;
            let (dx, dy) = NEIGHBOURS[d];
            let candidate = (current.0 + dx, current.1 + dy);
            if mask.get_signed(candidate.0, candidate.1) {
                let (px, py) = NEIGHBOURS[(d + 7) % 8];
                let previous = (current.0 + px, current.1 + py);
                next = Some((
                    candidate,
                    neighbour_index(previous.0 - candidate.0, previous.1 - candidate.1),
                ));
                break;
            }
        }
        let Some((pixel, bt)) = next else {
            break;
        };
        if pixel == start && bt == WEST {
            break;
        }
        current = pixel;
        backtrack = bt;
        pixels.push(pixel);
    }

    Contour::new(
        pixels
            .into_iter()
            .map(|(x, y)| Point::new(x as f64 + 0.5, y as f64 + 0.5))
            .collect(),
    )
}

/// `π − ∠(p_{i−k} − p_i, p_{i+k} − p_i)`: 0 on straight runs, large at corners.
#[inline]
fn k_cosine_curvature(c: &Contour, i: usize, k: usize) -> f64 {
    let p = c.points[i];
    let a = c.at(i as isize - k as isize) - p;
    let b = c.at(i as isize + k as isize) - p;
    let cross = a.x * b.y - a.y * b.x;
    PI - atan2(cross.abs(), a.dot(&b))
}

/// Fixed-support curvature at every contour point.
pub fn curvature(c: &Contour, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "curvature support must be at least 1",
        ));
    }
    if 2 * k + 1 > c.len() {
        return Err(Error::ContourTooShort(c.len(), 2 * k + 1));
    }
    Ok((0..c.len()).map(|i| k_cosine_curvature(c, i, k)).collect())
}

/// A dominant point: contour index, region-of-support size and its curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominantPoint {
    pub index: usize,
    pub support: usize,
    pub curvature: f64,
}

fn chord_and_deviation(c: &Contour, i: usize, k: usize) -> (f64, f64) {
    let p = c.points[i];
    let a = c.at(i as isize - k as isize);
    let b = c.at(i as isize + k as isize);
    let chord = b - a;
    let l = chord.norm();
    if l == 0.0 {
        return (0.0, (p - a).norm());
    }
    let ap = p - a;
    (l, (chord.x * ap.y - chord.y * ap.x).abs() / l)
}

/// Region of support: the smallest `k` at which the chord stops growing or
/// the deviation-to-chord ratio stops increasing, capped at `max_support`.
fn region_of_support(c: &Contour, i: usize, max_support: usize) -> usize {
    let mut k = 1;
    while k < max_support {
        let (l0, d0) = chord_and_deviation(c, i, k);
        let (l1, d1) = chord_and_deviation(c, i, k + 1);
        if l0 == 0.0 || l1 == 0.0 || l0 >= l1 || d0 / l0 >= d1 / l1 {
            break;
        }
        k += 1;
    }
    k
}

/// Teh-Chin dominant point detection, in contour order.
///
/// Each point gets an adaptive region of support `k_i ∈ [1, n/8]` and a
/// k-cosine curvature over it. Points with zero curvature are dropped, then
/// non-maximum suppression keeps a point only if no point within `k_i / 2`
/// has larger curvature. Among adjacent survivors with `k = 1` only the
/// stronger one is kept.
pub fn dominant_points(c: &Contour) -> Vec<DominantPoint> {
    let n = c.len();
    let max_support = (n / 8).max(1);
    let support: Vec<usize> = (0..n)
        .map(|i| region_of_support(c, i, max_support))
        .collect();
    let curv: Vec<f64> = (0..n)
        .map(|i| k_cosine_curvature(c, i, support[i].min((n - 1) / 2).max(1)))
        .collect();

    let wins = |i: usize, j: usize| curv[i] > curv[j] || (curv[i] == curv[j] && i < j);
    let mut keep: Vec<bool> = (0..n)
        .map(|i| {
            if curv[i] <= CURVATURE_FLOOR {
                return false;
            }
            let half = (support[i] / 2) as isize;
            (-half..=half).filter(|&o| o != 0).all(|o| {
                let j = (i as isize + o).rem_euclid(n as isize) as usize;
                j == i || wins(i, j) || curv[j] < curv[i]
            })
        })
        .collect();

    for i in 0..n {
        let j = (i + 1) % n;
        if keep[i] && keep[j] && support[i] == 1 && support[j] == 1 && i != j {
            if wins(i, j) {
                keep[j] = false;
            } else {
                keep[i] = false;
            }
        }
    }

    (0..n)
        .filter(|&i| keep[i])
        .map(|i| DominantPoint {
            index: i,
            support: support[i],
            curvature: curv[i],
        })
        .collect()
}

fn segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Douglas-Peucker on an open polyline; returns indices of kept points
/// (always including both endpoints).
pub fn simplify_indices(points: &[Point], epsilon: f64) -> Vec<usize> {
    let n = points.len();
    if n <= 2 || epsilon <= 0.0 {
        return (0..n).collect();
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0usize, n - 1)];
    while let Some((first, last)) = stack.pop() {
        let mut worst = (0.0, first);
        for i in first + 1..last {
            let d = segment_distance(&points[i], &points[first], &points[last]);
            if d > worst.0 {
                worst = (d, i);
            }
        }
        if worst.0 > epsilon {
            keep[worst.1] = true;
            stack.push((first, worst.1));
            stack.push((worst.1, last));
        }
    }
    (0..n).filter(|&i| keep[i]).collect()
}

/// Douglas-Peucker simplification with tolerance `epsilon` pixels.
pub fn simplify(points: &[Point], epsilon: f64) -> Vec<Point> {
    simplify_indices(points, epsilon)
        .into_iter()
        .map(|i| points[i])
        .collect()
}

/// Douglas-Peucker on a closed ring: split at point 0 and the point farthest
/// from it, then simplify both halves.
pub fn simplify_closed_indices(points: &[Point], epsilon: f64) -> Vec<usize> {
    let n = points.len();
    if n <= 3 || epsilon <= 0.0 {
        return (0..n).collect();
    }
    let far = (1..n)
        .max_by(|&a, &b| {
            (points[a] - points[0])
                .norm_squared()
                .total_cmp(&(points[b] - points[0]).norm_squared())
        })
        .expect("n > 3");
    let first: Vec<Point> = points[..=far].to_vec();
    let mut second: Vec<Point> = points[far..].to_vec();
    second.push(points[0]);
    let mut out = simplify_indices(&first, epsilon);
    out.extend(
        simplify_indices(&second, epsilon)
            .into_iter()
            .map(|i| i + far)
            .filter(|&i| i != far && i != n),
    );
    out
}

/// Star-shaped polygon about a centroid: `(angle, radius)` vertices with
/// strictly increasing angles in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPolygon {
    centroid: Point,
    vertices: Vec<(f64, f64)>,
}

impl PolarPolygon {
    pub fn new(centroid: Point, vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidParameter(
                "polar polygon needs at least 3 vertices",
            ));
        }
        if vertices
            .iter()
            .any(|&(a, r)| !(a.is_finite() && r.is_finite() && r >= 0.0 && (0.0..TAU).contains(&a)))
        {
            return Err(Error::InvalidParameter("polar vertex out of range"));
        }
        if vertices.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter(
                "polar angles must strictly increase",
            ));
        }
        Ok(Self { centroid, vertices })
    }

    pub fn centroid(&self) -> Point {
        self.centroid
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn param_count(&self) -> usize {
        2 * self.vertices.len()
    }

    pub fn to_points(&self) -> Vec<Point> {
        self.vertices
            .iter()
            .map(|&(a, r)| Point::new(self.centroid.x + r * cos(a), self.centroid.y + r * sin(a)))
            .collect()
    }
}

/// Number of degenerate cases resolved during sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SampleFlags {
    /// Rays that missed the contour and used the nearest bearing instead.
    pub ray_misses: usize,
    /// Rays with several contour crossings (shape not star-shaped about the
    /// centroid); the farthest crossing was used.
    pub multiple_crossings: usize,
    /// Colliding vertex angles that were separated.
    pub angle_collisions: usize,
    /// Adaptive vertices whose angular order disagreed with contour order.
    pub reordered: bool,
}

impl SampleFlags {
    pub fn any(&self) -> bool {
        self.ray_misses + self.multiple_crossings + self.angle_collisions > 0 || self.reordered
    }
}

/// Wraps an angle into `[0, 2π)`.
#[inline]
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = libm::fmod(a, TAU);
    if r < 0.0 {
        r += TAU;
    }
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `N` rays at angles `2πk/N` from `centroid`; radius is the distance to the
/// farthest crossing with the closed contour.
pub fn sample_uniform(
    c: &Contour,
    centroid: Point,
    n: usize,
) -> Result<(PolarPolygon, SampleFlags)> {
    if n < 3 {
        return Err(Error::InvalidParameter("need at least 3 vertices"));
    }
    let pts = c.points();
    let m = pts.len();
    let mut flags = SampleFlags::default();
    let mut vertices = Vec::with_capacity(n);
    for k in 0..n {
        let angle = TAU * k as f64 / n as f64;
        let dir = nalgebra::Vector2::new(cos(angle), sin(angle));
        let mut hits: Vec<f64> = Vec::new();
        for i in 0..m {
            let (a, b) = (pts[i], pts[(i + 1) % m]);
            let e = b - a;
            let denom = dir.x * e.y - dir.y * e.x;
            if denom.abs() < 1e-15 {
                continue;
            }
            let w = a - centroid;
            let t = (w.x * e.y - w.y * e.x) / denom;
            let s = (w.x * dir.y - w.y * dir.x) / denom;
            if t >= 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
                hits.push(t);
            }
        }
        let radius = if hits.is_empty() {
            flags.ray_misses += 1;
            let nearest = pts
                .iter()
                .min_by(|p, q| {
                    let da = angle_gap(atan2(p.y - centroid.y, p.x - centroid.x), angle);
                    let db = angle_gap(atan2(q.y - centroid.y, q.x - centroid.x), angle);
                    da.total_cmp(&db)
                })
                .expect("contour is nonempty");
            (nearest - centroid).norm()
        } else {
            let far = hits.iter().copied().fold(0.0, f64::max);
            let near = hits.iter().copied().fold(f64::INFINITY, f64::min);
            if far - near > 1e-9 {
                flags.multiple_crossings += 1;
            }
            far
        };
        vertices.push((angle, radius));
    }
    Ok((PolarPolygon::new(centroid, vertices)?, flags))
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    d.min(TAU - d)
}

/// Cumulative arc length at each contour point, plus the total length.
fn arc_lengths(c: &Contour) -> (Vec<f64>, f64) {
    let pts = c.points();
    let m = pts.len();
    let mut acc = Vec::with_capacity(m);
    let mut s = 0.0;
    for i in 0..m {
        acc.push(s);
        s += (pts[(i + 1) % m] - pts[i]).norm();
    }
    (acc, s)
}

fn point_at_arc(c: &Contour, cumulative: &[f64], s: f64) -> Point {
    let pts = c.points();
    let m = pts.len();
    let i = cumulative.partition_point(|&v| v <= s).saturating_sub(1);
    let (a, b) = (pts[i], pts[(i + 1) % m]);
    let seg = (b - a).norm();
    let t = if seg > 0.0 {
        (s - cumulative[i]) / seg
    } else {
        0.0
    };
    a + (b - a) * t
}

/// Curvature-driven sampling of exactly `n` vertices.
///
/// Dominant points are reduced with Douglas-Peucker (ε = 1.5 px). Surplus
/// vertices are dropped lowest curvature first; missing ones are added at the
/// arc-length midpoint of the longest remaining contour arc.
pub fn sample_adaptive(
    c: &Contour,
    centroid: Point,
    n: usize,
) -> Result<(PolarPolygon, SampleFlags)> {
    sample_adaptive_with(c, centroid, n, DEFAULT_SIMPLIFY_EPSILON)
}

pub fn sample_adaptive_with(
    c: &Contour,
    centroid: Point,
    n: usize,
    epsilon: f64,
) -> Result<(PolarPolygon, SampleFlags)> {
    if n < 3 {
        return Err(Error::InvalidParameter("need at least 3 vertices"));
    }
    let dominant = dominant_points(c);
    let ring: Vec<Point> = dominant.iter().map(|d| c.points()[d.index]).collect();
    let mut chosen: Vec<DominantPoint> = simplify_closed_indices(&ring, epsilon)
        .into_iter()
        .map(|i| dominant[i])
        .collect();

    if chosen.len() > n {
        chosen.sort_by(|a, b| {
            b.curvature
                .total_cmp(&a.curvature)
                .then(a.index.cmp(&b.index))
        });
        chosen.truncate(n);
        chosen.sort_by_key(|d| d.index);
    }

    let (cumulative, total) = arc_lengths(c);
    // Arc-length positions of the vertices, in contour order.
    let mut positions: Vec<f64> = chosen.iter().map(|d| cumulative[d.index]).collect();
    if positions.is_empty() {
        positions.push(0.0);
    }
    while positions.len() < n {
        let m = positions.len();
        let (gap_at, _) = (0..m)
            .map(|i| {
                let next = if i + 1 < m {
                    positions[i + 1]
                } else {
                    positions[0] + total
                };
                (i, next - positions[i])
            })
            .fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
        let next = if gap_at + 1 < m {
            positions[gap_at + 1]
        } else {
            positions[0] + total
        };
        let mid = 0.5 * (positions[gap_at] + next);
        let mid = if mid >= total { mid - total } else { mid };
        positions.push(mid);
        positions.sort_by(|a, b| a.total_cmp(b));
    }

    let mut flags = SampleFlags::default();
    let mut polar: Vec<(f64, f64)> = positions
        .iter()
        .map(|&s| {
            let p = point_at_arc(c, &cumulative, s);
            let d = p - centroid;
            (normalize_angle(atan2(d.y, d.x)), hypot(d.x, d.y))
        })
        .collect();

    // Star-shaped contours traced clockwise (y down) have increasing angle.
    let rotations = (0..polar.len())
        .filter(|&i| polar[(i + 1) % polar.len()].0 < polar[i].0)
        .count();
    flags.reordered = rotations > 1;
    polar.sort_by(|a, b| a.0.total_cmp(&b.0));
    separate_collisions(&mut polar, &mut flags);
    Ok((PolarPolygon::new(centroid, polar)?, flags))
}

/// Moves vertices with non-increasing angles forward by half the smallest
/// positive angular gap.
fn separate_collisions(polar: &mut [(f64, f64)], flags: &mut SampleFlags) {
    let n = polar.len();
    let min_gap = (0..n)
        .map(|i| {
            let next = if i + 1 < n {
                polar[i + 1].0
            } else {
                polar[0].0 + TAU
            };
            next - polar[i].0
        })
        .filter(|g| *g > 0.0)
        .fold(TAU / n as f64, f64::min);
    for i in 1..n {
        if polar[i].0 <= polar[i - 1].0 {
            polar[i].0 = polar[i - 1].0 + 0.5 * min_gap;
            flags.angle_collisions += 1;
        }
    }
    // Wrap-around overflow after repeated shifts.
    if polar[n - 1].0 >= TAU {
        let last = polar[n - 1];
        for i in (1..n).rev() {
            polar[i] = polar[i - 1];
        }
        polar[0] = (last.0 - TAU, last.1);
        polar.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
}

/// A fitted shape.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeRepr {
    /// Top-left corner and size.
    AxisBox {
        x: f64,
        y: f64,
        w: f64,
        h: f64,
    },
    /// Center, size (`w` along `angle`) and orientation.
    OrientedBox {
        cx: f64,
        cy: f64,
        w: f64,
        h: f64,
        angle: f64,
    },
    /// Center, semi-axes (`a` along `angle`) and orientation.
    Ellipse {
        cx: f64,
        cy: f64,
        a: f64,
        b: f64,
        angle: f64,
    },
    /// Oriented box whose long edges bow along circular arcs of signed
    /// curvature `curvature` (1/px).
    CurvedBox {
        cx: f64,
        cy: f64,
        w: f64,
        h: f64,
        angle: f64,
        curvature: f64,
    },
    Polygon(PolarPolygon),
}

impl ShapeRepr {
    pub fn param_count(&self) -> usize {
        match self {
            ShapeRepr::AxisBox { .. } => 4,
            ShapeRepr::OrientedBox { .. } => 5,
            ShapeRepr::Ellipse { .. } => 5,
            ShapeRepr::CurvedBox { .. } => 6,
            ShapeRepr::Polygon(p) => p.param_count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolygonSampling {
    Adaptive,
    Uniform,
}

/// Representation family to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReprKind {
    AxisBox,
    OrientedBox,
    Ellipse,
    CurvedBox,
    Polygon {
        vertices: usize,
        sampling: PolygonSampling,
    },
}

impl ReprKind {
    pub const POLYGON: ReprKind = ReprKind::Polygon {
        vertices: DEFAULT_POLYGON_VERTICES,
        sampling: PolygonSampling::Adaptive,
    };

    /// The five families in increasing order of flexibility.
    pub const STANDARD: [ReprKind; 5] = [
        ReprKind::AxisBox,
        ReprKind::CurvedBox,
        ReprKind::OrientedBox,
        ReprKind::Ellipse,
        ReprKind::POLYGON,
    ];

    pub fn param_count(&self) -> usize {
        match self {
            ReprKind::AxisBox => 4,
            ReprKind::OrientedBox | ReprKind::Ellipse => 5,
            ReprKind::CurvedBox => 6,
            ReprKind::Polygon { vertices, .. } => 2 * vertices,
        }
    }

    /// Parses `axis_box`, `oriented_box`, `ellipse`, `curved_box`,
    /// `polygon[:N]` and `polygon_uniform[:N]`.
    pub fn parse(s: &str) -> Option<Self> {
        let (name, count) = match s.split_once(':') {
            Some((n, c)) => (n, Some(c.parse::<usize>().ok().filter(|&v| v >= 3)?)),
            None => (s, None),
        };
        let vertices = count.unwrap_or(DEFAULT_POLYGON_VERTICES);
        let kind = match name {
            "axis_box" => ReprKind::AxisBox,
            "oriented_box" => ReprKind::OrientedBox,
            "ellipse" => ReprKind::Ellipse,
            "curved_box" => ReprKind::CurvedBox,
            "polygon" => ReprKind::Polygon {
                vertices,
                sampling: PolygonSampling::Adaptive,
            },
            "polygon_uniform" => ReprKind::Polygon {
                vertices,
                sampling: PolygonSampling::Uniform,
            },
            _ => return None,
        };
        if count.is_some() && !matches!(kind, ReprKind::Polygon { .. }) {
            return None;
        }
        Some(kind)
    }

    pub fn label(&self) -> String {
        match self {
            ReprKind::AxisBox => "axis_box".into(),
            ReprKind::OrientedBox => "oriented_box".into(),
            ReprKind::Ellipse => "ellipse".into(),
            ReprKind::CurvedBox => "curved_box".into(),
            ReprKind::Polygon { vertices, sampling } => {
                let base = match sampling {
                    PolygonSampling::Adaptive => "polygon",
                    PolygonSampling::Uniform => "polygon_uniform",
                };
                if *vertices == DEFAULT_POLYGON_VERTICES {
                    base.into()
                } else {
                    alloc::format!("{base}:{vertices}")
                }
            }
        }
    }
}

impl fmt::Display for ReprKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A fitted representation with any sampling flags raised on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub repr: ShapeRepr,
    pub flags: SampleFlags,
}

/// Andrew's monotone chain; counter-clockwise in a y-up frame, no collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross =
        |o: &Point, a: &Point, b: &Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for p in &pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

/// `(cx, cy, w, h, angle)`.
pub type RotatedRect = (f64, f64, f64, f64, f64);

/// Minimum-area enclosing rectangle by rotating calipers over the hull edges.
/// Returns `(cx, cy, w, h, angle)` with `w ≥ h`, `w` measured along `angle`.
pub fn min_area_rect(points: &[Point]) -> Option<RotatedRect> {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return None;
    }
    let m = hull.len();
    let mut best: Option<(f64, RotatedRect)> = None;
    for i in 0..m {
        let e = hull[(i + 1) % m] - hull[i];
        let len = e.norm();
        if len == 0.0 {
            continue;
        }
        let u = e / len;
        let v = nalgebra::Vector2::new(-u.y, u.x);
        let (mut u0, mut u1, mut v0, mut v1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for p in &hull {
            let q = p.coords;
            let (pu, pv) = (q.dot(&u), q.dot(&v));
            u0 = u0.min(pu);
            u1 = u1.max(pu);
            v0 = v0.min(pv);
            v1 = v1.max(pv);
        }
        let area = (u1 - u0) * (v1 - v0);
        if best.as_ref().is_none_or(|b| area < b.0) {
            let (cu, cv) = (0.5 * (u0 + u1), 0.5 * (v0 + v1));
            let center = u * cu + v * cv;
            let (w, h) = (u1 - u0, v1 - v0);
            let rect = if w >= h {
                (center.x, center.y, w, h, atan2(u.y, u.x))
            } else {
                (center.x, center.y, h, w, atan2(v.y, v.x))
            };
            best = Some((area, rect));
        }
    }
    best.map(|b| b.1)
}

fn fit_axis_box(mask: &InstanceMask) -> Result<ShapeRepr> {
    let mut it = mask.foreground();
    let (x0, y0) = it.next().ok_or(Error::EmptyMask)?;
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (x0, x0, y0, y0);
    for (x, y) in it {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    Ok(ShapeRepr::AxisBox {
        x: xmin as f64,
        y: ymin as f64,
        w: (xmax + 1 - xmin) as f64,
        h: (ymax + 1 - ymin) as f64,
    })
}

fn fit_oriented_box(mask: &InstanceMask) -> Result<ShapeRepr> {
    let corners = mask.boundary_corners();
    if corners.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (cx, cy, w, h, angle) = min_area_rect(&corners).ok_or(Error::EmptyMask)?;
    Ok(ShapeRepr::OrientedBox {
        cx,
        cy,
        w,
        h,
        angle,
    })
}

/// Second-moment ellipse, rescaled so its area equals the pixel count.
fn fit_ellipse(mask: &InstanceMask) -> Result<ShapeRepr> {
    let c = mask.centroid()?;
    let n = mask.area() as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in mask.foreground() {
        let dx = x as f64 + 0.5 - c.x;
        let dy = y as f64 + 0.5 - c.y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    // Each pixel is a unit square, contributing 1/12 variance per axis.
    let (sxx, syy, sxy) = (sxx / n + 1.0 / 12.0, syy / n + 1.0 / 12.0, sxy / n);
    let mean = 0.5 * (sxx + syy);
    let diff = hypot(0.5 * (sxx - syy), sxy);
    let (l1, l2) = (mean + diff, (mean - diff).max(1e-12));
    let angle = 0.5 * atan2(2.0 * sxy, sxx - syy);
    let (a, b) = (2.0 * sqrt(l1), 2.0 * sqrt(l2));
    let s = sqrt(n / (PI * a * b));
    Ok(ShapeRepr::Ellipse {
        cx: c.x,
        cy: c.y,
        a: a * s,
        b: b * s,
        angle,
    })
}

/// Offset of a circular arc of curvature `k` from its tangent at distance `u`.
#[inline]
fn sagitta(k: f64, u: f64) -> Option<f64> {
    if k == 0.0 {
        return Some(0.0);
    }
    let q = 1.0 - k * k * u * u;
    (q >= 0.0).then(|| (1.0 - sqrt(q)) / k)
}

/// Tightest curved box of curvature `k` around `corners`, in the frame of an
/// oriented box `(cx, cy, angle)`.
fn curved_box_for(corners: &[Point], cx: f64, cy: f64, w: f64, angle: f64, k: f64) -> ShapeRepr {
    let (ca, sa) = (cos(angle), sin(angle));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in corners {
        let (dx, dy) = (p.x - cx, p.y - cy);
        let u = dx * ca + dy * sa;
        let v = -dx * sa + dy * ca;
        let r = v - sagitta(k, u).unwrap_or(0.0);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let shift = 0.5 * (lo + hi);
    ShapeRepr::CurvedBox {
        cx: cx - shift * sa,
        cy: cy + shift * ca,
        w,
        h: hi - lo,
        angle,
        curvature: k,
    }
}

fn fit_curved_box(mask: &InstanceMask) -> Result<ShapeRepr> {
    let ShapeRepr::OrientedBox {
        cx, cy, w, angle, ..
    } = fit_oriented_box(mask)?
    else {
        unreachable!()
    };
    let corners = mask.boundary_corners();
    let (width, height) = mask.dims();
    let score = |k: f64| {
        let repr = curved_box_for(&corners, cx, cy, w, angle, k);
        iou(mask, &rasterize(&repr, width, height)).unwrap_or(0.0)
    };
    let k_max = 1.5 / w.max(1.0);
    let k = golden_section_max(&score, -k_max, k_max, 40);
    let best = if score(k) >= score(0.0) { k } else { 0.0 };
    Ok(curved_box_for(&corners, cx, cy, w, angle, best))
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
pub fn golden_section_max(
    f: &dyn Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    iterations: usize,
) -> f64 {
    let ratio = 0.5 * (sqrt(5.0) - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iterations {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

/// Fits one representation family to a mask.
pub fn fit_repr(mask: &InstanceMask, kind: ReprKind) -> Result<Fit> {
    if mask.area() == 0 {
        return Err(Error::EmptyMask);
    }
    let no_flags = SampleFlags::default();
    let (repr, flags) = match kind {
        ReprKind::AxisBox => (fit_axis_box(mask)?, no_flags),
        ReprKind::OrientedBox => (fit_oriented_box(mask)?, no_flags),
        ReprKind::Ellipse => (fit_ellipse(mask)?, no_flags),
        ReprKind::CurvedBox => (fit_curved_box(mask)?, no_flags),
        ReprKind::Polygon { vertices, sampling } => {
            let contour = extract_contour(mask)?;
            let centroid = mask.centroid()?;
            let (poly, flags) = match sampling {
                PolygonSampling::Adaptive => sample_adaptive(&contour, centroid, vertices)?,
                PolygonSampling::Uniform => sample_uniform(&contour, centroid, vertices)?,
            };
            (ShapeRepr::Polygon(poly), flags)
        }
    };
    Ok(Fit { repr, flags })
}

/// Even-odd fill of a closed polygon over pixel centers; centers lying on an
/// edge count as inside.
pub fn rasterize_polygon(points: &[Point], width: usize, height: usize) -> InstanceMask {
    let mut mask = InstanceMask::empty(width, height);
    let m = points.len();
    if m < 3 {
        return mask;
    }
    let mut crossings: Vec<f64> = Vec::new();
    for row in 0..height {
        let yc = row as f64 + 0.5;
        crossings.clear();
        for i in 0..m {
            let (a, b) = (points[i], points[(i + 1) % m]);
            if (a.y <= yc && yc < b.y) || (b.y <= yc && yc < a.y) {
                crossings.push(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        crossings.sort_by(|p, q| p.total_cmp(q));
        for pair in crossings.chunks_exact(2) {
            fill_span(&mut mask, row, pair[0], pair[1]);
        }
    }
    // Boundary pixels whose centers sit exactly on an edge.
    for i in 0..m {
        let (a, b) = (points[i], points[(i + 1) % m]);
        let (y0, y1) = (a.y.min(b.y), a.y.max(b.y));
        let first = libm::ceil(y0 - 0.5 - ON_EDGE_TOLERANCE).max(0.0) as usize;
        let mut row = first;
        while row < height && (row as f64 + 0.5) <= y1 + ON_EDGE_TOLERANCE {
            let yc = row as f64 + 0.5;
            if (b.y - a.y).abs() < ON_EDGE_TOLERANCE {
                if (yc - a.y).abs() < ON_EDGE_TOLERANCE {
                    fill_span(&mut mask, row, a.x.min(b.x), a.x.max(b.x));
                }
            } else {
                let x = a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y);
                let center = floor(x) + 0.5;
                if (x - center).abs() < ON_EDGE_TOLERANCE && x >= 0.0 && (x as usize) < width {
                    mask.set(x as usize, row, true);
                }
            }
            row += 1;
        }
    }
    mask
}

/// Marks pixels of `row` whose centers lie in `[x0, x1]`.
fn fill_span(mask: &mut InstanceMask, row: usize, x0: f64, x1: f64) {
    let start = libm::ceil(x0 - 0.5 - ON_EDGE_TOLERANCE).max(0.0);
    let end = floor(x1 - 0.5 + ON_EDGE_TOLERANCE);
    if end < start {
        return;
    }
    let end = (end as usize).min(mask.width.saturating_sub(1));
    for x in start as usize..=end {
        mask.set(x, row, true);
    }
}

/// Pixel-center inside test for any representation.
pub fn rasterize(repr: &ShapeRepr, width: usize, height: usize) -> InstanceMask {
    match repr {
        ShapeRepr::AxisBox { x, y, w, h } => InstanceMask::from_fn(width, height, |i, j| {
            let (px, py) = (i as f64 + 0.5, j as f64 + 0.5);
            px >= *x && px <= x + w && py >= *y && py <= y + h
        }),
        ShapeRepr::OrientedBox {
            cx,
            cy,
            w,
            h,
            angle,
        } => {
            let (ca, sa) = (cos(*angle), sin(*angle));
            InstanceMask::from_fn(width, height, |i, j| {
                let (dx, dy) = (i as f64 + 0.5 - cx, j as f64 + 0.5 - cy);
                let u = dx * ca + dy * sa;
                let v = -dx * sa + dy * ca;
                u.abs() <= 0.5 * w && v.abs() <= 0.5 * h
            })
        }
        ShapeRepr::Ellipse {
            cx,
            cy,
            a,
            b,
            angle,
        } => {
            let (ca, sa) = (cos(*angle), sin(*angle));
            InstanceMask::from_fn(width, height, |i, j| {
                let (dx, dy) = (i as f64 + 0.5 - cx, j as f64 + 0.5 - cy);
                let u = (dx * ca + dy * sa) / a;
                let v = (-dx * sa + dy * ca) / b;
                u * u + v * v <= 1.0
            })
        }
        ShapeRepr::CurvedBox {
            cx,
            cy,
            w,
            h,
            angle,
            curvature,
        } => {
            let (ca, sa) = (cos(*angle), sin(*angle));
            InstanceMask::from_fn(width, height, |i, j| {
                let (dx, dy) = (i as f64 + 0.5 - cx, j as f64 + 0.5 - cy);
                let u = dx * ca + dy * sa;
                let v = -dx * sa + dy * ca;
                u.abs() <= 0.5 * w
                    && sagitta(*curvature, u).is_some_and(|s| (v - s).abs() <= 0.5 * h)
            })
        }
        ShapeRepr::Polygon(p) => rasterize_polygon(&p.to_points(), width, height),
    }
}

/// `|a ∩ b| / |a ∪ b|`; 1 when both are empty.
pub fn iou(a: &InstanceMask, b: &InstanceMask) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            found: b.dims(),
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &q) in a.data.iter().zip(&b.data) {
        inter += (p && q) as usize;
        union += (p || q) as usize;
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

/// IoU between a mask and the rasterized fit of one family.
pub fn instance_iou(mask: &InstanceMask, kind: ReprKind) -> Result<f64> {
    let fit = fit_repr(mask, kind)?;
    let (w, h) = mask.dims();
    iou(mask, &rasterize(&fit.repr, w, h))
}

/// One row of a corpus evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct KindSummary {
    pub kind: ReprKind,
    pub mean_iou: f64,
    pub params: usize,
    pub n_instances: usize,
    /// Indices of masks the family could not be fitted to.
    pub skipped: Vec<usize>,
}

/// Aggregates per-instance results for one family.
pub fn summarize(kind: ReprKind, results: &[Result<f64>]) -> KindSummary {
    let mut ious = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok(v) => ious.push(*v),
            Err(_) => skipped.push(i),
        }
    }
    KindSummary {
        kind,
        mean_iou: crate::grid::mean_of(&ious),
        params: kind.param_count(),
        n_instances: ious.len(),
        skipped,
    }
}

/// Mean IoU of each family over a corpus of masks.
pub fn evaluate_corpus(masks: &[InstanceMask], kinds: &[ReprKind]) -> Result<Vec<KindSummary>> {
    if masks.is_empty() {
        return Err(Error::InvalidParameter("empty corpus"));
    }
    Ok(kinds
        .iter()
        .map(|&kind| {
            let results: Vec<Result<f64>> = masks.iter().map(|m| instance_iou(m, kind)).collect();
            summarize(kind, &results)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect_mask(w: usize, h: usize, x0: usize, y0: usize, rw: usize, rh: usize) -> InstanceMask {
        InstanceMask::from_fn(w, h, |x, y| {
            x >= x0 && x < x0 + rw && y >= y0 && y < y0 + rh
        })
    }

    fn disk(size: usize, r: f64) -> InstanceMask {
        let c = size as f64 / 2.0;
        InstanceMask::from_fn(size, size, |x, y| {
            hypot(x as f64 + 0.5 - c, y as f64 + 0.5 - c) <= r
        })
    }

    #[test]
    fn contour_of_small_square() {
        let m = rect_mask(5, 5, 1, 1, 3, 3);
        let c = extract_contour(&m).unwrap();
        assert_eq!(c.len(), 8);
        let expected = [
            (1, 1),
            (2, 1),
            (3, 1),
            (3, 2),
            (3, 3),
            (2, 3),
            (1, 3),
            (1, 2),
        ];
        for (p, (x, y)) in c.points().iter().zip(expected) {
            assert_eq!((p.x, p.y), (x as f64 + 0.5, y as f64 + 0.5));
        }
    }

    #[test]
    fn contour_errors() {
        assert_eq!(
            extract_contour(&InstanceMask::empty(3, 3)),
            Err(Error::EmptyMask)
        );
        let single = InstanceMask::from_fn(3, 3, |x, y| x == 1 && y == 1);
        assert!(matches!(
            extract_contour(&single),
            Err(Error::ContourTooShort(1, 3))
        ));
        let two = InstanceMask::from_fn(5, 1, |x, _| x == 0 || x == 2);
        assert_eq!(extract_contour(&two), Err(Error::MultipleComponents(2)));
    }

    #[test]
    fn disk_contour_length_near_circumference() {
        let c = extract_contour(&disk(40, 10.0)).unwrap();
        let expected = TAU * 10.0;
        assert!(
            (c.length() - expected).abs() < 0.1 * expected,
            "{}",
            c.length()
        );
    }

    #[test]
    fn curvature_examples() {
        let line: Vec<Point> = (0..10)
            .map(|i| Point::new(i as f64, 2.0 * i as f64))
            .collect();
        let mut ring = line.clone();
        ring.push(Point::new(4.0, 30.0));
        let c = Contour::new(ring).unwrap();
        let k = curvature(&c, 1).unwrap();
        for v in &k[1..9] {
            assert!(v.abs() < 1e-12);
        }

        let square = Contour::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        for v in curvature(&square, 1).unwrap() {
            assert!((v - PI / 2.0).abs() < 1e-12);
        }

        let n = 11;
        let gon: Vec<Point> = (0..n)
            .map(|i| {
                let a = TAU * i as f64 / n as f64;
                Point::new(5.0 * cos(a), 5.0 * sin(a))
            })
            .collect();
        for v in curvature(&Contour::new(gon).unwrap(), 1).unwrap() {
            assert!((v - TAU / n as f64).abs() < 1e-12);
        }
        assert!(curvature(&square, 2).is_err());
        assert!(curvature(&square, 0).is_err());
    }

    #[test]
    fn rectangle_dominant_points_are_its_corners() {
        for (rw, rh) in [(12, 7), (20, 20), (30, 9)] {
            let m = rect_mask(40, 40, 3, 4, rw, rh);
            let c = extract_contour(&m).unwrap();
            let dp = dominant_points(&c);
            let pts: Vec<(f64, f64)> = dp
                .iter()
                .map(|d| (c.points()[d.index].x, c.points()[d.index].y))
                .collect();
            let (x0, y0) = (3.5, 4.5);
            let (x1, y1) = (x0 + (rw - 1) as f64, y0 + (rh - 1) as f64);
            assert_eq!(
                pts,
                vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)],
                "{rw}x{rh}"
            );
        }
    }

    #[test]
    fn dominant_points_are_an_ordered_subset() {
        let m = disk(50, 18.0);
        let c = extract_contour(&m).unwrap();
        let dp = dominant_points(&c);
        assert!(!dp.is_empty());
        assert!(dp.windows(2).all(|w| w[0].index < w[1].index));
        assert!(dp.iter().all(|d| d.index < c.len()));
    }

    #[test]
    fn simplify_examples() {
        let line: Vec<Point> = (0..8)
            .map(|i| Point::new(i as f64, 0.5 * i as f64))
            .collect();
        assert_eq!(simplify(&line, 0.1), vec![line[0], line[7]]);
        assert_eq!(simplify(&line, 0.0), line);
        let wiggle = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.2),
            Point::new(2.0, 3.0),
            Point::new(3.0, 0.1),
            Point::new(4.0, 0.0),
        ];
        assert_eq!(
            simplify(&wiggle, 1.0),
            vec![wiggle[0], wiggle[2], wiggle[4]]
        );
    }

    #[test]
    fn uniform_sampling_of_disk_and_square() {
        let m = disk(60, 20.5);
        let c = extract_contour(&m).unwrap();
        let (poly, flags) = sample_uniform(&c, m.centroid().unwrap(), 16).unwrap();
        assert!(!flags.any());
        for &(_, r) in poly.vertices() {
            assert!((r - 20.0).abs() <= 0.5, "{r}");
        }

        // Square of side 2s around the centroid: ray at angle a hits at s / max(|cos a|, |sin a|).
        let contour = Contour::new(vec![
            Point::new(-3.0, -3.0),
            Point::new(3.0, -3.0),
            Point::new(3.0, 3.0),
            Point::new(-3.0, 3.0),
        ])
        .unwrap();
        let (poly, _) = sample_uniform(&contour, Point::origin(), 8).unwrap();
        for (k, &(a, r)) in poly.vertices().iter().enumerate() {
            assert!((a - TAU * k as f64 / 8.0).abs() < 1e-15);
            let expected = 3.0 / cos(a).abs().max(sin(a).abs());
            assert!((r - expected).abs() < 1e-12);
        }
        assert_eq!(poly.len(), 8);
    }

    #[test]
    fn adaptive_keeps_rectangle_corners() {
        let m = rect_mask(40, 40, 5, 8, 25, 14);
        let c = extract_contour(&m).unwrap();
        let (poly, _) = sample_adaptive(&c, m.centroid().unwrap(), 24).unwrap();
        assert_eq!(poly.len(), 24);
        assert_eq!(poly.param_count(), 48);
        let pts = poly.to_points();
        for corner in [(5.5, 8.5), (29.5, 8.5), (29.5, 21.5), (5.5, 21.5)] {
            assert!(
                pts.iter()
                    .any(|p| (p.x - corner.0).abs() < 1e-9 && (p.y - corner.1).abs() < 1e-9),
                "{corner:?}"
            );
        }
        assert!(poly.vertices().windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn hull_and_min_area_rect() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        assert_eq!(convex_hull(&pts).len(), 4);
        let diamond = [
            Point::new(0.0, -2.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 2.0),
            Point::new(-1.0, 0.0),
        ];
        let (_, _, w, h, _) = min_area_rect(&diamond).unwrap();
        // Edge-aligned: extents 8/√5 along the edge and 4/√5 across it.
        assert!((w * h - 6.4).abs() < 1e-12 && w >= h);
    }

    #[test]
    fn axis_box_fits_rectangles_exactly() {
        let m = rect_mask(30, 20, 4, 6, 11, 5);
        let fit = fit_repr(&m, ReprKind::AxisBox).unwrap();
        assert_eq!(
            fit.repr,
            ShapeRepr::AxisBox {
                x: 4.0,
                y: 6.0,
                w: 11.0,
                h: 5.0
            }
        );
        assert_eq!(rasterize(&fit.repr, 30, 20), m);
        for kind in [
            ReprKind::OrientedBox,
            ReprKind::CurvedBox,
            ReprKind::POLYGON,
        ] {
            assert_eq!(instance_iou(&m, kind).unwrap(), 1.0, "{kind}");
        }
        assert!(fit_repr(&InstanceMask::empty(3, 3), ReprKind::Ellipse).is_err());
    }

    #[test]
    fn rotated_square_box_comparison() {
        let (s, c) = (16.0, 32.0);
        let m = InstanceMask::from_fn(64, 64, |x, y| {
            let (dx, dy) = (x as f64 + 0.5 - c, y as f64 + 0.5 - c);
            dx.abs() + dy.abs() <= s * core::f64::consts::SQRT_2
        });
        let axis = instance_iou(&m, ReprKind::AxisBox).unwrap();
        let oriented = instance_iou(&m, ReprKind::OrientedBox).unwrap();
        assert!((axis - 0.5).abs() < 0.03, "{axis}");
        assert!(oriented > 0.9, "{oriented}");
    }

    #[test]
    fn disk_prefers_ellipse_over_box() {
        let m = disk(64, 20.0);
        let ellipse = instance_iou(&m, ReprKind::Ellipse).unwrap();
        let axis = instance_iou(&m, ReprKind::AxisBox).unwrap();
        assert!(ellipse > 0.95 && ellipse > axis);
        assert!((axis - PI / 4.0).abs() < 0.02, "{axis}");
    }

    #[test]
    fn curved_box_bends_toward_arcs() {
        // A thick circular arc band.
        let m = InstanceMask::from_fn(80, 60, |x, y| {
            let r = hypot(x as f64 + 0.5 - 40.0, y as f64 + 0.5 - 70.0);
            (45.0..=55.0).contains(&r) && (y as f64) < 40.0
        })
        .largest_component();
        let fit = fit_repr(&m, ReprKind::CurvedBox).unwrap();
        let ShapeRepr::CurvedBox { curvature, .. } = fit.repr else {
            panic!()
        };
        assert!(curvature.abs() > 0.005, "{curvature}");
        let curved = instance_iou(&m, ReprKind::CurvedBox).unwrap();
        let oriented = instance_iou(&m, ReprKind::OrientedBox).unwrap();
        assert!(curved > oriented + 0.1, "{curved} vs {oriented}");
    }

    #[test]
    fn rasterize_examples() {
        let b = ShapeRepr::AxisBox {
            x: 2.0,
            y: 1.0,
            w: 3.0,
            h: 2.0,
        };
        assert_eq!(rasterize(&b, 8, 5), rect_mask(8, 5, 2, 1, 3, 2));
        let r = 25.0;
        let e = ShapeRepr::Ellipse {
            cx: 40.0,
            cy: 40.0,
            a: r,
            b: r,
            angle: 0.3,
        };
        let area = rasterize(&e, 80, 80).area() as f64;
        assert!((area - PI * r * r).abs() < 0.02 * PI * r * r);
    }

    #[test]
    fn iou_examples() {
        let a = rect_mask(10, 10, 0, 0, 4, 4);
        let b = rect_mask(10, 10, 2, 0, 4, 4);
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        assert_eq!(iou(&a, &rect_mask(10, 10, 5, 5, 3, 3)).unwrap(), 0.0);
        assert!((iou(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            iou(&InstanceMask::empty(2, 2), &InstanceMask::empty(2, 2)).unwrap(),
            1.0
        );
        assert_eq!(iou(&a, &InstanceMask::empty(10, 10)).unwrap(), 0.0);
        assert!(iou(&a, &InstanceMask::empty(9, 10)).is_err());
    }

    #[test]
    fn param_counts() {
        let counts: Vec<usize> = ReprKind::STANDARD.iter().map(|k| k.param_count()).collect();
        assert_eq!(counts, vec![4, 6, 5, 5, 48]);
        assert_eq!(ReprKind::parse("polygon:12").unwrap().param_count(), 24);
        assert_eq!(ReprKind::parse("polygon").unwrap(), ReprKind::POLYGON);
        assert!(ReprKind::parse("ellipse:3").is_none());
        assert!(ReprKind::parse("blob").is_none());
        for k in ReprKind::STANDARD {
            assert_eq!(ReprKind::parse(&k.label()), Some(k));
        }
    }

    #[test]
    fn rectangle_corpus_scores_one() {
        let masks: Vec<InstanceMask> = (0..4)
            .map(|i| rect_mask(40, 40, 2 + i, 3, 10 + 3 * i, 8 + i))
            .collect();
        let report = evaluate_corpus(&masks, &ReprKind::STANDARD).unwrap();
        for row in &report {
            if row.kind != ReprKind::Ellipse {
                assert_eq!(row.mean_iou, 1.0, "{}", row.kind);
            }
            assert_eq!(row.n_instances, 4);
        }
        assert!(evaluate_corpus(&[], &[ReprKind::AxisBox]).is_err());
    }
}
