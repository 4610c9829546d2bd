//! Scalar losses for self-supervised distance estimation and segmentation.
//!
//! All reductions use fixed-order pairwise summation, so results are
//! reproducible bit-for-bit.

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, expm1, log, log1p, pow};

use crate::error::{Error, Result};
use crate::geometry_warp::{apply_mask, DistanceMap, MaskedMean};
use crate::grid::{ensure_same_dims, mean_of, FeatureMap, Grid, LabelMap};

pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;
/// Weight of the SSIM term in the photometric reconstruction loss.
pub const SSIM_WEIGHT: f64 = 0.85;
/// Probabilities are clamped to this before taking logarithms.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
const PROBABILITY_SUM_TOLERANCE: f64 = 1e-6;

#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let r = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    r as usize
}

/// 3×3 box mean with reflection padding.
fn box_mean3(g: &Grid) -> Grid {
    let (w, h) = g.dims();
    Grid::from_fn(w, h, |x, y| {
        let mut acc = 0.0;
        for dy in -1..=1isize {
            for dx in -1..=1isize {
                acc += g.get(reflect(x as isize + dx, w), reflect(y as isize + dy, h));
            }
        }
        acc / 9.0
    })
}

/// Per-pixel SSIM over 3×3 reflection-padded windows.
pub fn ssim(a: &Grid, b: &Grid) -> Result<Grid> {
    ensure_same_dims(a.dims(), b.dims())?;
    let mu_a = box_mean3(a);
    let mu_b = box_mean3(b);
    let aa = box_mean3(&a.map(|v| v * v));
    let bb = box_mean3(&b.map(|v| v * v));
    let ab = box_mean3(&a.zip_map(b, |p, q| p * q)?);
    let (w, h) = a.dims();
    Ok(Grid::from_fn(w, h, |x, y| {
        let (ma, mb) = (mu_a.get(x, y), mu_b.get(x, y));
        let var_a = aa.get(x, y) - ma * ma;
        let var_b = bb.get(x, y) - mb * mb;
        let cov = ab.get(x, y) - ma * mb;
        let num = (2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2);
        let den = (ma * ma + mb * mb + SSIM_C1) * (var_a + var_b + SSIM_C2);
        num / den
    }))
}

/// General robust loss `ρ(x, α, c)` with its limits at α = 0, 2 and −∞.
pub fn robust_loss(x: f64, alpha: f64, scale: f64) -> f64 {
    let z2 = (x / scale) * (x / scale);
    if alpha == 2.0 {
        0.5 * z2
    } else if alpha == 0.0 {
        log1p(0.5 * z2)
    } else if alpha == f64::NEG_INFINITY {
        -expm1(-0.5 * z2)
    } else {
        let b = (alpha - 2.0).abs();
        (b / alpha) * (pow(z2 / b + 1.0, 0.5 * alpha) - 1.0)
    }
}

/// Settings of the photometric reconstruction loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionParams {
    pub ssim_weight: f64,
    pub alpha: f64,
    pub scale: f64,
}

impl Default for ReconstructionParams {
    fn default() -> Self {
        Self {
            ssim_weight: SSIM_WEIGHT,
            alpha: 1.0,
            scale: 1.0,
        }
    }
}

/// Per-pixel `λ·(1−SSIM)/2 + (1−λ)·ρ(I − Î)`, averaged over channels.
pub fn reconstruction_loss_map(
    target: &[Grid],
    recon: &[Grid],
    params: &ReconstructionParams,
) -> Result<Grid> {
    if target.is_empty() || target.len() != recon.len() {
        return Err(Error::InvalidParameter(
            "target and reconstruction need the same nonzero channel count",
        ));
    }
    let (w, h) = target[0].dims();
    let mut acc = Grid::zeros(w, h);
    for (t, r) in target.iter().zip(recon) {
        ensure_same_dims((w, h), t.dims())?;
        let s = ssim(t, r)?;
        let lambda = params.ssim_weight;
        for (i, out) in acc.data_mut().iter_mut().enumerate() {
            let dssim = ((1.0 - s.data()[i]) / 2.0).clamp(0.0, 1.0);
            let residual = t.data()[i] - r.data()[i];
            *out +=
                lambda * dssim + (1.0 - lambda) * robust_loss(residual, params.alpha, params.scale);
        }
    }
    let n = target.len() as f64;
    Ok(acc.map(|v| v / n))
}

/// Reconstruction loss averaged over pixels where `validity` is nonzero.
pub fn reconstruction_loss(
    target: &[Grid],
    recon: &[Grid],
    validity: &Grid,
    params: &ReconstructionParams,
) -> Result<MaskedMean> {
    let map = reconstruction_loss_map(target, recon, params)?;
    apply_mask(&map, validity)
}

/// Forward differences `g[x+1] − g[x]` (or along y), as a flat vector.
fn diff_x(g: &Grid) -> Vec<f64> {
    let (w, h) = g.dims();
    let mut out = Vec::with_capacity(w.saturating_sub(1) * h);
    for y in 0..h {
        let row = g.row(y);
        out.extend(row.windows(2).map(|p| p[1] - p[0]));
    }
    out
}

fn diff_y(g: &Grid) -> Vec<f64> {
    let (w, h) = g.dims();
    let mut out = Vec::with_capacity(w * h.saturating_sub(1));
    for y in 1..h {
        out.extend(g.row(y).iter().zip(g.row(y - 1)).map(|(b, a)| b - a));
    }
    out
}

fn second_diff_x(g: &Grid) -> Vec<f64> {
    let (w, h) = g.dims();
    let mut out = Vec::with_capacity(w.saturating_sub(2) * h);
    for y in 0..h {
        out.extend(g.row(y).windows(3).map(|p| p[2] - 2.0 * p[1] + p[0]));
    }
    out
}

fn second_diff_y(g: &Grid) -> Vec<f64> {
    let (w, h) = g.dims();
    let mut out = Vec::with_capacity(w * h.saturating_sub(2));
    for y in 2..h {
        let (r0, r1, r2) = (g.row(y - 2), g.row(y - 1), g.row(y));
        out.extend((0..w).map(|x| r2[x] - 2.0 * r1[x] + r0[x]));
    }
    out
}

/// `Σ_axis mean(|∂f| · e^{−|∂I|})` over forward differences.
fn edge_weighted_gradient(f: &Grid, image: &Grid) -> f64 {
    let weighted = |df: Vec<f64>, di: Vec<f64>| -> f64 {
        let terms: Vec<f64> = df
            .iter()
            .zip(&di)
            .map(|(a, b)| a.abs() * exp(-b.abs()))
            .collect();
        mean_of(&terms)
    };
    weighted(diff_x(f), diff_x(image)) + weighted(diff_y(f), diff_y(image))
}

/// Edge-aware smoothness of the mean-normalized distance map.
pub fn smoothness_loss(distance: &DistanceMap, image: &Grid) -> Result<f64> {
    let d = distance.grid();
    ensure_same_dims(d.dims(), image.dims())?;
    let mean = d.mean();
    let normalized = d.map(|v| v / mean);
    Ok(edge_weighted_gradient(&normalized, image))
}

/// Rewards feature slopes in low-texture image regions; always ≤ 0.
pub fn discriminative_loss(features: &FeatureMap, image: &Grid) -> Result<f64> {
    ensure_same_dims(features.dims(), image.dims())?;
    let total: Vec<f64> = features
        .channels()
        .iter()
        .map(|c| edge_weighted_gradient(c, image))
        .collect();
    Ok(-total.iter().sum::<f64>())
}

/// Mean absolute second-order feature difference over both axes, averaged
/// over channels.
pub fn convergent_loss(features: &FeatureMap) -> Result<f64> {
    let (w, h) = features.dims();
    if w * h < 2 {
        return Err(Error::InvalidParameter(
            "convergent loss needs at least 2 pixels",
        ));
    }
    let per_channel: Vec<f64> = features
        .channels()
        .iter()
        .map(|c| {
            let xx: Vec<f64> = second_diff_x(c).iter().map(|v| v.abs()).collect();
            let yy: Vec<f64> = second_diff_y(c).iter().map(|v| v.abs()).collect();
            mean_of(&xx) + mean_of(&yy)
        })
        .collect();
    Ok(mean_of(&per_channel))
}

/// Masked mean of `|D_t − D_w| / (D_t + D_w)`.
pub fn distance_consistency(
    target: &DistanceMap,
    warped: &DistanceMap,
    validity: &Grid,
) -> Result<MaskedMean> {
    let rel = target
        .grid()
        .zip_map(warped.grid(), |a, b| (a - b).abs() / (a + b))?;
    apply_mask(&rel, validity)
}

fn check_probabilities(probs: &FeatureMap, labels: &LabelMap) -> Result<()> {
    ensure_same_dims(probs.dims(), labels.dims())?;
    let k = probs.num_channels();
    if labels.data().iter().any(|&l| l as usize >= k) {
        return Err(Error::InvalidParameter("label outside the class set"));
    }
    let (w, h) = probs.dims();
    let mut p = vec![0.0; k];
    for y in 0..h {
        for x in 0..w {
            probs.pixel_into(x, y, &mut p);
            if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Domain {
                    what: "probability",
                    value: p
                        .iter()
                        .copied()
                        .find(|v| !(0.0..=1.0).contains(v))
                        .unwrap(),
                });
            }
            let s: f64 = p.iter().sum();
            if (s - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
                return Err(Error::Domain {
                    what: "probability sum",
                    value: s,
                });
            }
        }
    }
    Ok(())
}

fn true_class_probabilities(probs: &FeatureMap, labels: &LabelMap) -> Vec<f64> {
    let channels = probs.channels();
    labels
        .data()
        .iter()
        .enumerate()
        .map(|(i, &l)| channels[l as usize].data()[i].max(PROBABILITY_FLOOR))
        .collect()
}

/// Mean of `−(1 − p_true)^γ · ln p_true`.
pub fn focal_loss(probs: &FeatureMap, labels: &LabelMap, gamma: f64) -> Result<f64> {
    check_probabilities(probs, labels)?;
    let terms: Vec<f64> = true_class_probabilities(probs, labels)
        .into_iter()
        .map(|p| -pow(1.0 - p, gamma) * log(p))
        .collect();
    Ok(mean_of(&terms))
}

pub fn cross_entropy(probs: &FeatureMap, labels: &LabelMap) -> Result<f64> {
    check_probabilities(probs, labels)?;
    let terms: Vec<f64> = true_class_probabilities(probs, labels)
        .into_iter()
        .map(|p| -log(p))
        .collect();
    Ok(mean_of(&terms))
}

/// Gradient of the Lovász extension of the Jaccard loss at errors sorted in
/// decreasing order; `fg_sorted[i]` says whether the i-th pixel belongs to
/// the class.
pub fn lovasz_grad(fg_sorted: &[bool]) -> Vec<f64> {
    let total_fg = fg_sorted.iter().filter(|&&f| f).count();
    let mut grad = Vec::with_capacity(fg_sorted.len());
    let (mut fg_seen, mut bg_seen) = (0usize, 0usize);
    let mut previous = 0.0;
    for &fg in fg_sorted {
        if fg {
            fg_seen += 1;
        } else {
            bg_seen += 1;
        }
        let intersection = (total_fg - fg_seen) as f64;
        let union = (total_fg + bg_seen) as f64;
        let jaccard = 1.0 - intersection / union;
        grad.push(jaccard - previous);
        previous = jaccard;
    }
    grad
}

/// Lovász-Softmax loss averaged over classes that appear in the labels or
/// win the argmax at some pixel.
pub fn lovasz_softmax(probs: &FeatureMap, labels: &LabelMap) -> Result<f64> {
    check_probabilities(probs, labels)?;
    let k = probs.num_channels();
    let n = labels.data().len();
    let mut predicted = vec![false; k];
    let mut p = vec![0.0; k];
    let (w, _) = probs.dims();
    for i in 0..n {
        probs.pixel_into(i % w, i / w, &mut p);
        let best = (0..k).fold(0, |best, c| if p[c] > p[best] { c } else { best });
        predicted[best] = true;
    }

    let mut per_class = Vec::new();
    for (c, channel) in probs.channels().iter().enumerate() {
        let present = labels.data().contains(&(c as u32));
        if !present && !predicted[c] {
            continue;
        }
        let mut errors: Vec<(f64, bool)> = labels
            .data()
            .iter()
            .zip(channel.data())
            .map(|(&l, &pc)| {
                let fg = l as usize == c;
                (if fg { 1.0 - pc } else { pc }, fg)
            })
            .collect();
        errors.sort_by(|a, b| b.0.total_cmp(&a.0));
        let fg_sorted: Vec<bool> = errors.iter().map(|e| e.1).collect();
        let grad = lovasz_grad(&fg_sorted);
        per_class.push(errors.iter().zip(&grad).map(|(e, g)| e.0 * g).sum::<f64>());
    }
    Ok(mean_of(&per_class))
}

/// Weights of the regularization terms in the total distance loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub beta: f64,
    pub gamma: f64,
    pub omega: f64,
    pub mu: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            beta: 1e-3,
            gamma: 1e-3,
            omega: 1e-3,
            mu: 1e-3,
        }
    }
}

impl LossWeights {
    pub fn new(beta: f64, gamma: f64, omega: f64, mu: f64) -> Result<Self> {
        if [beta, gamma, omega, mu]
            .iter()
            .any(|w| !(*w >= 0.0 && w.is_finite()))
        {
            return Err(Error::InvalidParameter("loss weights must be non-negative"));
        }
        Ok(Self {
            beta,
            gamma,
            omega,
            mu,
        })
    }
}

/// Precomputed components of the total distance loss.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DistanceLossTerms {
    pub image_reconstruction: f64,
    pub smoothness: f64,
    pub consistency: f64,
    pub feature_reconstruction: f64,
    pub discriminative: f64,
    pub convergent: f64,
}

/// `L_r(img) + β·L_s + γ·L_dc + L_r(feat) + ω·L_dis + μ·L_cvt`.
pub fn total_distance_loss(terms: &DistanceLossTerms, weights: &LossWeights) -> Result<f64> {
    let named = [
        ("image_reconstruction", terms.image_reconstruction),
        ("smoothness", terms.smoothness),
        ("consistency", terms.consistency),
        ("feature_reconstruction", terms.feature_reconstruction),
        ("discriminative", terms.discriminative),
        ("convergent", terms.convergent),
    ];
    if let Some((name, _)) = named.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite(name));
    }
    Ok(terms.image_reconstruction
        + weights.beta * terms.smoothness
        + weights.gamma * terms.consistency
        + terms.feature_reconstruction
        + weights.omega * terms.discriminative
        + weights.mu * terms.convergent)
}

/// SSIM averaged over the map, for reporting.
pub fn mean_ssim(a: &Grid, b: &Grid) -> Result<f64> {
    Ok(ssim(a, b)?.mean())
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::LN_2;
    use libm::sqrt;

    fn grid(w: usize, h: usize, v: &[f64]) -> Grid {
        Grid::from_vec(w, h, v.to_vec()).unwrap()
    }

    fn dist(w: usize, h: usize, v: &[f64]) -> DistanceMap {
        DistanceMap::new(grid(w, h, v)).unwrap()
    }

    #[test]
    fn ssim_examples() {
        let a = Grid::from_fn(5, 4, |x, y| (x * 3 + y) as f64 / 20.0);
        let b = Grid::from_fn(5, 4, |x, y| ((x * 7 + y * 3) % 11) as f64 / 11.0);
        for v in ssim(&a, &a).unwrap().data() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let ab = ssim(&a, &b).unwrap();
        let ba = ssim(&b, &a).unwrap();
        assert_eq!(ab, ba);
        assert!(ab.data().iter().all(|v| (-1.0..=1.0).contains(v)));

        // Constant 0 vs constant 1: zero variances, so SSIM = C1 / (1 + C1).
        let s = ssim(&Grid::zeros(3, 3), &Grid::filled(3, 3, 1.0)).unwrap();
        let expected = SSIM_C1 * SSIM_C2 / ((1.0 + SSIM_C1) * SSIM_C2);
        for v in s.data() {
            assert!((v - expected).abs() < 1e-15);
        }
        assert!(ssim(&a, &Grid::zeros(4, 4)).is_err());
    }

    #[test]
    fn robust_loss_examples() {
        for alpha in [-3.0, 0.0, 0.5, 1.0, 2.0, 4.0, f64::NEG_INFINITY] {
            assert_eq!(robust_loss(0.0, alpha, 0.7), 0.0);
        }
        assert_eq!(robust_loss(2.0, 2.0, 1.0), 2.0);
        assert!((robust_loss(3.0, 1.0, 1.0) - (sqrt(10.0) - 1.0)).abs() < 1e-15);
        // The general form approaches the special cases continuously.
        for x in [0.3, 1.0, 2.5] {
            assert!((robust_loss(x, 1e-7, 1.0) - robust_loss(x, 0.0, 1.0)).abs() < 1e-6);
            assert!((robust_loss(x, 2.0 + 1e-9, 1.0) - robust_loss(x, 2.0, 1.0)).abs() < 1e-6);
            assert!(
                (robust_loss(x, -1e7, 1.0) - robust_loss(x, f64::NEG_INFINITY, 1.0)).abs() < 1e-5
            );
        }
    }

    #[test]
    fn reconstruction_examples() {
        let img = Grid::from_fn(6, 5, |x, y| ((x * 5 + y * 3) % 7) as f64 / 7.0);
        let ones = Grid::filled(6, 5, 1.0);
        let p = ReconstructionParams::default();
        let same = reconstruction_loss(
            core::slice::from_ref(&img),
            core::slice::from_ref(&img),
            &ones,
            &p,
        )
        .unwrap();
        assert!(same.value.abs() < 1e-12 && !same.degenerate);
        let other = img.map(|v| 1.0 - v);
        let diff = reconstruction_loss(core::slice::from_ref(&img), &[other], &ones, &p).unwrap();
        assert!(diff.value > 0.0);
        let none = reconstruction_loss(
            core::slice::from_ref(&img),
            core::slice::from_ref(&img),
            &Grid::zeros(6, 5),
            &p,
        )
        .unwrap();
        assert!(none.degenerate);
    }

    /// Independent scalar evaluation on a 2×2 pair. With reflection padding
    /// every 3×3 window of a 2×2 image holds the pixel itself 4 times and each
    /// of the other three pixels in fixed multiplicities.
    #[test]
    fn reconstruction_hand_computed_2x2() {
        let a = [0.2, 0.4, 0.6, 0.8];
        let b = [0.25, 0.35, 0.7, 0.8];
        // Window multiplicities for pixel (0,0): itself 4, right 2, below 2, diagonal 1.
        let window = |p: usize| -> [(usize, f64); 4] {
            let (x, y) = (p % 2, p / 2);
            let idx = |x: usize, y: usize| y * 2 + x;
            [
                (idx(x, y), 4.0),
                (idx(1 - x, y), 2.0),
                (idx(x, 1 - y), 2.0),
                (idx(1 - x, 1 - y), 1.0),
            ]
        };
        let mut expected = 0.0;
        for p in 0..4 {
            let m = |f: &dyn Fn(usize) -> f64| {
                window(p).iter().map(|(i, w)| w * f(*i)).sum::<f64>() / 9.0
            };
            let (ma, mb) = (m(&|i| a[i]), m(&|i| b[i]));
            let va = m(&|i| a[i] * a[i]) - ma * ma;
            let vb = m(&|i| b[i] * b[i]) - mb * mb;
            let cov = m(&|i| a[i] * b[i]) - ma * mb;
            let s = ((2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2))
                / ((ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2));
            let x: f64 = a[p] - b[p];
            expected += 0.85 * (1.0 - s) / 2.0 + 0.15 * (sqrt(x * x + 1.0) - 1.0);
        }
        expected /= 4.0;
        let got = reconstruction_loss(
            &[grid(2, 2, &a)],
            &[grid(2, 2, &b)],
            &Grid::filled(2, 2, 1.0),
            &ReconstructionParams::default(),
        )
        .unwrap();
        assert!(
            (got.value - expected).abs() < 1e-14,
            "{} vs {}",
            got.value,
            expected
        );
    }

    #[test]
    fn smoothness_examples() {
        let img = Grid::from_fn(4, 3, |x, y| (x * y) as f64 * 0.1);
        assert_eq!(smoothness_loss(&dist(4, 3, &[5.0; 12]), &img).unwrap(), 0.0);
        let ramp = smoothness_loss(&dist(4, 1, &[1.0, 2.0, 3.0, 4.0]), &Grid::zeros(4, 1)).unwrap();
        assert!((ramp - 1.0 / 2.5).abs() < 1e-15);
        let d = dist(
            4,
            3,
            &[1.0, 3.0, 2.0, 5.0, 4.0, 4.5, 1.5, 2.5, 3.5, 6.0, 1.2, 0.9],
        );
        let base = smoothness_loss(&d, &img).unwrap();
        for k in [0.25, 2.0, 8.0] {
            assert_eq!(smoothness_loss(&d.scaled(k).unwrap(), &img).unwrap(), base);
        }
        let k3 = smoothness_loss(&d.scaled(3.0).unwrap(), &img).unwrap();
        assert!((k3 - base).abs() < 1e-14 * base);
    }

    #[test]
    fn discriminative_examples() {
        let img = Grid::from_fn(6, 6, |x, _| if x < 3 { 0.0 } else { (x * x) as f64 });
        let flat = FeatureMap::single(Grid::filled(6, 6, 0.3));
        assert_eq!(discriminative_loss(&flat, &img).unwrap(), 0.0);
        let mut last = 0.0;
        for slope in [0.1, 0.2, 0.4] {
            // Feature ramp confined to the flat image half.
            let f = FeatureMap::single(Grid::from_fn(6, 6, |x, _| slope * x.min(2) as f64));
            let l = discriminative_loss(&f, &img).unwrap();
            assert!(l <= 0.0 && l < last);
            last = l;
        }
    }

    #[test]
    fn convergent_examples() {
        let ramp = FeatureMap::single(Grid::from_fn(5, 4, |x, y| 2.0 * x as f64 - y as f64));
        assert_eq!(convergent_loss(&ramp).unwrap(), 0.0);
        assert_eq!(
            convergent_loss(&FeatureMap::single(Grid::filled(3, 3, 1.0))).unwrap(),
            0.0
        );
        let quad = FeatureMap::single(grid(5, 1, &[0.0, 1.0, 4.0, 9.0, 16.0]));
        assert_eq!(convergent_loss(&quad).unwrap(), 2.0);
        assert!(convergent_loss(&FeatureMap::single(Grid::zeros(1, 1))).is_err());
    }

    #[test]
    fn consistency_examples() {
        let ones = Grid::filled(1, 1, 1.0);
        let d = dist(1, 1, &[2.0]);
        assert_eq!(distance_consistency(&d, &d, &ones).unwrap().value, 0.0);
        let c = distance_consistency(&d, &dist(1, 1, &[4.0]), &ones).unwrap();
        assert!((c.value - 1.0 / 3.0).abs() < 1e-15);
        let far = distance_consistency(&dist(1, 1, &[0.1]), &dist(1, 1, &[100.0]), &ones).unwrap();
        assert!(far.value < 1.0);
        assert!(
            distance_consistency(&d, &d, &Grid::zeros(1, 1))
                .unwrap()
                .degenerate
        );
    }

    fn two_class(p1: &[f64]) -> FeatureMap {
        let n = p1.len();
        FeatureMap::new(vec![
            Grid::from_vec(n, 1, p1.iter().map(|p| 1.0 - p).collect()).unwrap(),
            Grid::from_vec(n, 1, p1.to_vec()).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn focal_examples() {
        let probs = two_class(&[0.5, 0.9, 0.2, 1.0]);
        let labels = LabelMap::from_vec(4, 1, vec![1, 1, 0, 1]).unwrap();
        let ce = cross_entropy(&probs, &labels).unwrap();
        assert!((focal_loss(&probs, &labels, 0.0).unwrap() - ce).abs() < 1e-15);
        let half = focal_loss(&two_class(&[0.5]), &LabelMap::filled(1, 1, 1), 2.0).unwrap();
        assert!((half - 0.25 * LN_2).abs() < 1e-15);
        assert_eq!(
            focal_loss(&two_class(&[1.0]), &LabelMap::filled(1, 1, 1), 2.0).unwrap(),
            0.0
        );
        let zero = focal_loss(&two_class(&[0.0]), &LabelMap::filled(1, 1, 1), 0.0).unwrap();
        assert!((zero + log(PROBABILITY_FLOOR)).abs() < 1e-9);
        assert!(focal_loss(&two_class(&[0.5]), &LabelMap::filled(1, 1, 2), 2.0).is_err());
        let unnormalized =
            FeatureMap::new(vec![Grid::filled(1, 1, 0.5), Grid::filled(1, 1, 0.6)]).unwrap();
        assert!(cross_entropy(&unnormalized, &LabelMap::filled(1, 1, 0)).is_err());
    }

    #[test]
    fn lovasz_examples() {
        let labels = LabelMap::from_vec(4, 1, vec![0, 1, 1, 0]).unwrap();
        let perfect = two_class(&[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(lovasz_softmax(&perfect, &labels).unwrap(), 0.0);
        let worst = two_class(&[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(lovasz_softmax(&worst, &labels).unwrap(), 1.0);
        let mid = lovasz_softmax(&two_class(&[0.3, 0.6, 0.8, 0.1]), &labels).unwrap();
        assert!((0.0..=1.0).contains(&mid));
        assert_eq!(lovasz_grad(&[true, false, true]).iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn lovasz_skips_classes_absent_everywhere() {
        // Class 2 never labelled and never the argmax.
        let probs = FeatureMap::new(vec![
            grid(2, 1, &[0.8, 0.1]),
            grid(2, 1, &[0.1, 0.8]),
            grid(2, 1, &[0.1, 0.1]),
        ])
        .unwrap();
        let labels = LabelMap::from_vec(2, 1, vec![0, 1]).unwrap();
        // Classes 0 and 1 each see sorted errors [0.2 (fg), 0.1 (bg)] with
        // Jaccard gradient [1, 0].
        let l3 = lovasz_softmax(&probs, &labels).unwrap();
        assert!((l3 - 0.2).abs() < 1e-15);
    }

    #[test]
    fn total_loss_examples() {
        let w = LossWeights::default();
        assert_eq!((w.beta, w.gamma, w.omega, w.mu), (1e-3, 1e-3, 1e-3, 1e-3));
        assert_eq!(
            total_distance_loss(&DistanceLossTerms::default(), &w).unwrap(),
            0.0
        );
        let t = DistanceLossTerms {
            image_reconstruction: 0.2,
            smoothness: 3.0,
            consistency: 1.0,
            feature_reconstruction: 0.1,
            discriminative: -2.0,
            convergent: 4.0,
        };
        let base = total_distance_loss(&t, &w).unwrap();
        assert!((base - (0.3 + 1e-3 * (3.0 + 1.0 - 2.0 + 4.0))).abs() < 1e-15);
        let bumped = total_distance_loss(
            &DistanceLossTerms {
                smoothness: 5.0,
                ..t
            },
            &w,
        )
        .unwrap();
        assert!((bumped - base - 2e-3).abs() < 1e-15);
        let bad = DistanceLossTerms {
            consistency: f64::NAN,
            ..t
        };
        assert_eq!(
            total_distance_loss(&bad, &w),
            Err(Error::NonFinite("consistency"))
        );
        assert!(LossWeights::new(-1.0, 0.0, 0.0, 0.0).is_err());
    }
}
