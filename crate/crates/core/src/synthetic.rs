//! Seeded corpus of synthetic instance masks.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use libm::{atan2, cos, hypot, sin};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::polygon_repr::{normalize_angle, rasterize_polygon, InstanceMask, Point};

pub const CANVAS: usize = 80;
pub const MIN_EXTENT: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlobFamily {
    /// Smooth radial blob with low-order harmonics.
    Smooth,
    /// Polygonal star with sharp spikes.
    Spiky,
    /// Convex polygon inscribed in a rotated ellipse.
    Convex,
    /// Rotated rectangle.
    Rectangle,
}

impl BlobFamily {
    /// Families whose masks are star-shaped about their centroid.
    pub fn is_star_shaped(&self) -> bool {
        matches!(self, BlobFamily::Smooth | BlobFamily::Spiky)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub family: BlobFamily,
    pub mask: InstanceMask,
}

fn extent(mask: &InstanceMask) -> (usize, usize) {
    let (mut x0, mut x1, mut y0, mut y1) = (usize::MAX, 0, usize::MAX, 0);
    for (x, y) in mask.foreground() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 == usize::MAX {
        (0, 0)
    } else {
        (x1 + 1 - x0, y1 + 1 - y0)
    }
}

fn radial(center: Point, n: usize, radius: impl Fn(f64) -> f64) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            let r = radius(a);
            Point::new(center.x + r * cos(a), center.y + r * sin(a))
        })
        .collect()
}

fn outline(family: BlobFamily, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let half = CANVAS as f64 / 2.0;
    let center = Point::new(
        half + rng.random_range(-2.0..2.0),
        half + rng.random_range(-2.0..2.0),
    );
    match family {
        BlobFamily::Smooth => {
            let base = rng.random_range(20.0..27.0);
            let harmonics: Vec<(f64, f64, f64)> = (2..=4)
                .map(|k| {
                    (
                        k as f64,
                        rng.random_range(-0.12..0.12),
                        rng.random_range(0.0..TAU),
                    )
                })
                .collect();
            radial(center, 256, |a| {
                base * (1.0
                    + harmonics
                        .iter()
                        .map(|&(k, amp, ph)| amp * cos(k * a + ph))
                        .sum::<f64>())
            })
        }
        BlobFamily::Spiky => {
            let spikes = rng.random_range(5..=12);
            let outer = rng.random_range(26.0..34.0);
            let inner = outer * rng.random_range(0.45..0.75);
            let rot = rng.random_range(0.0..TAU);
            (0..2 * spikes)
                .map(|i| {
                    let a = rot + TAU * i as f64 / (2 * spikes) as f64;
                    let r = if i % 2 == 0 { outer } else { inner };
                    Point::new(center.x + r * cos(a), center.y + r * sin(a))
                })
                .collect()
        }
        BlobFamily::Convex => {
            let (a, b) = (rng.random_range(24.0..34.0), rng.random_range(14.0..30.0));
            let rot = rng.random_range(0.0..TAU);
            let n = rng.random_range(5..=8);
            let mut angles: Vec<f64> = (0..n)
                .map(|i| (i as f64 + rng.random_range(0.1..0.9)) * TAU / n as f64)
                .collect();
            angles.sort_by(|p, q| p.total_cmp(q));
            angles
                .into_iter()
                .map(|t| {
                    let (u, v) = (a * cos(t), b * sin(t));
                    Point::new(
                        center.x + u * cos(rot) - v * sin(rot),
                        center.y + u * sin(rot) + v * cos(rot),
                    )
                })
                .collect()
        }
        BlobFamily::Rectangle => {
            let (w, h) = (rng.random_range(44.0..60.0), rng.random_range(14.0..34.0));
            let rot = rng.random_range(0.0..TAU);
            [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]
                .into_iter()
                .map(|(su, sv)| {
                    let (u, v) = (su * w, sv * h);
                    Point::new(
                        center.x + u * cos(rot) - v * sin(rot),
                        center.y + u * sin(rot) + v * cos(rot),
                    )
                })
                .collect()
        }
    }
}

/// Generates `count` blobs cycling through the four families. Each mask is a
/// single 4-connected component at least `MIN_EXTENT` pixels across.
pub fn blob_corpus(count: usize, seed: u64) -> Vec<Blob> {
    const FAMILIES: [BlobFamily; 4] = [
        BlobFamily::Smooth,
        BlobFamily::Spiky,
        BlobFamily::Convex,
        BlobFamily::Rectangle,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let family = FAMILIES[out.len() % FAMILIES.len()];
        let mask =
            rasterize_polygon(&outline(family, &mut rng), CANVAS, CANVAS).largest_component();
        let (w, h) = extent(&mask);
        if w.max(h) >= MIN_EXTENT && w.min(h) >= 8 {
            out.push(Blob { family, mask });
        }
    }
    out
}

/// Polar angle of `p` about `c`, in `[0, 2π)`.
pub fn bearing(c: Point, p: Point) -> f64 {
    normalize_angle(atan2(p.y - c.y, p.x - c.x))
}

/// Distance of `p` from `c`.
pub fn range(c: Point, p: Point) -> f64 {
    hypot(p.x - c.x, p.y - c.y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic_and_valid() {
        let a = blob_corpus(24, 7);
        assert_eq!(a, blob_corpus(24, 7));
        assert_ne!(a, blob_corpus(24, 8));
        for blob in &a {
            assert_eq!(blob.mask.components().len(), 1);
            let (w, h) = extent(&blob.mask);
            assert!(w.max(h) >= MIN_EXTENT);
            assert!(w < CANVAS && h < CANVAS);
        }
        assert_eq!(
            a.iter().filter(|b| b.family == BlobFamily::Spiky).count(),
            6
        );
    }
}
