//! Pixel-adaptive convolution.
//!
//! Every filter tap is modulated by a kernel `K(F_ij, F_ab)` comparing the
//! guidance features at the output pixel and at the tap. Taps that fall in
//! the zero padding contribute nothing, regardless of the kernel.

use alloc::vec;
use alloc::vec::Vec;

use libm::exp;

use crate::error::{Error, Result};
use crate::grid::{ensure_same_dims, FeatureMap, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `exp(−½‖f − g‖²)`.
    Gaussian,
    /// `K ≡ 1`; reduces to a plain convolution.
    Constant,
}

/// `exp(−½‖f − g‖²)`.
pub fn gaussian_kernel(f: &[f64], g: &[f64]) -> f64 {
    debug_assert_eq!(f.len(), g.len());
    let sq: f64 = f.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum();
    exp(-0.5 * sq)
}

/// Filter weights, bias and kernel choice.
///
/// `weights` is laid out as `[dy][dx][c_in][c_out]` with `dy, dx ∈ 0..k`
/// indexing the offset `(dy − k/2, dx − k/2)` from the output pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct PacParams {
    k: usize,
    in_channels: usize,
    out_channels: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    pub kernel: KernelKind,
}

impl PacParams {
    pub fn new(
        k: usize,
        in_channels: usize,
        out_channels: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        kernel: KernelKind,
    ) -> Result<Self> {
        if k.is_multiple_of(2) {
            return Err(Error::InvalidParameter("window size must be odd"));
        }
        if in_channels == 0 || out_channels == 0 {
            return Err(Error::InvalidParameter("channel counts must be positive"));
        }
        if weights.len() != k * k * in_channels * out_channels || bias.len() != out_channels {
            return Err(Error::InvalidParameter(
                "weight or bias length does not match k and channels",
            ));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("PAC parameters"));
        }
        Ok(Self {
            k,
            in_channels,
            out_channels,
            weights,
            bias,
            kernel,
        })
    }

    pub fn window(&self) -> usize {
        self.k
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    #[inline]
    pub fn weight(&self, dy: usize, dx: usize, ci: usize, co: usize) -> f64 {
        self.weights[((dy * self.k + dx) * self.in_channels + ci) * self.out_channels + co]
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }
}

/// `x'_ij = Σ_{ab ∈ N_k(ij)} K(F_ij, F_ab) · W[a−i, b−j] · x_ab + B`.
pub fn pac_conv(x: &FeatureMap, guidance: &FeatureMap, params: &PacParams) -> Result<FeatureMap> {
    ensure_same_dims(x.dims(), guidance.dims())?;
    if x.num_channels() != params.in_channels {
        return Err(Error::InvalidParameter(
            "input channel count does not match the weights",
        ));
    }
    let (w, h) = x.dims();
    let k = params.k;
    let half = (k / 2) as isize;
    let d = guidance.num_channels();
    let mut center = vec![0.0; d];
    let mut other = vec![0.0; d];
    let mut out: Vec<Vec<f64>> = (0..params.out_channels)
        .map(|_| Vec::with_capacity(w * h))
        .collect();
    let mut acc = vec![0.0; params.out_channels];

    for i in 0..h {
        for j in 0..w {
            guidance.pixel_into(j, i, &mut center);
            acc.copy_from_slice(&params.bias);
            for dy in 0..k {
                let a = i as isize + dy as isize - half;
                if a < 0 || a >= h as isize {
                    continue;
                }
                for dx in 0..k {
                    let b = j as isize + dx as isize - half;
                    if b < 0 || b >= w as isize {
                        continue;
                    }
                    let (a, b) = (a as usize, b as usize);
                    let kv = match params.kernel {
                        KernelKind::Constant => 1.0,
                        KernelKind::Gaussian => {
                            guidance.pixel_into(b, a, &mut other);
                            gaussian_kernel(&center, &other)
                        }
                    };
                    for (ci, channel) in x.channels().iter().enumerate() {
                        let xv = kv * channel.get(b, a);
                        for (co, slot) in acc.iter_mut().enumerate() {
                            *slot += params.weight(dy, dx, ci, co) * xv;
                        }
                    }
                }
            }
            for (o, v) in out.iter_mut().zip(&acc) {
                o.push(*v);
            }
        }
    }
    FeatureMap::new(
        out.into_iter()
            .map(|c| Grid::from_vec(w, h, c))
            .collect::<Result<_>>()?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_kernel_examples() {
        assert_eq!(gaussian_kernel(&[0.3, -1.0], &[0.3, -1.0]), 1.0);
        let (f, g) = ([0.1, 0.7, 2.0], [1.0, -0.2, 0.4]);
        assert_eq!(gaussian_kernel(&f, &g), gaussian_kernel(&g, &f));
        assert!((gaussian_kernel(&[0.6, 0.0], &[0.0, 0.8]) - libm::exp(-0.5)).abs() < 1e-15);
        assert!(gaussian_kernel(&f, &g) < 1.0);
    }

    #[test]
    fn parameter_validation() {
        assert!(PacParams::new(2, 1, 1, vec![0.0; 4], vec![0.0], KernelKind::Constant).is_err());
        assert!(PacParams::new(3, 1, 1, vec![0.0; 8], vec![0.0], KernelKind::Constant).is_err());
        assert!(PacParams::new(3, 1, 2, vec![0.0; 18], vec![0.0], KernelKind::Constant).is_err());
        let p = PacParams::new(3, 1, 1, vec![0.0; 9], vec![0.0], KernelKind::Gaussian).unwrap();
        let x = FeatureMap::single(Grid::zeros(3, 3));
        let f = FeatureMap::single(Grid::zeros(4, 3));
        assert!(pac_conv(&x, &f, &p).is_err());
    }

    /// 3×3 single-channel input with guidance taking two values: the left
    /// column is 0, the rest is 1. At the centre pixel (guidance 1) the left
    /// taps are scaled by e^{-1/2}.
    #[test]
    fn hand_computed_center_pixel() {
        let x = FeatureMap::single(Grid::from_fn(3, 3, |c, r| (1 + c + 3 * r) as f64));
        let f = FeatureMap::single(Grid::from_fn(3, 3, |c, _| if c == 0 { 0.0 } else { 1.0 }));
        let w: Vec<f64> = (0..9).map(|t| 0.1 * (t + 1) as f64).collect();
        let p = PacParams::new(3, 1, 1, w.clone(), vec![0.5], KernelKind::Gaussian).unwrap();
        let out = pac_conv(&x, &f, &p).unwrap();
        let e = libm::exp(-0.5);
        let mut expected = 0.5;
        for dy in 0..3 {
            for dx in 0..3 {
                let xv = (1 + dx + 3 * dy) as f64;
                let kv = if dx == 0 { e } else { 1.0 };
                expected += kv * w[dy * 3 + dx] * xv;
            }
        }
        assert!((out.channels()[0].get(1, 1) - expected).abs() < 1e-12);

        // Corner (0,0): guidance 0, only the 2×2 in-bounds block contributes.
        let corner = 0.5 + w[4] * 1.0 + e * w[5] * 2.0 + w[7] * 4.0 + e * w[8] * 5.0;
        assert!((out.channels()[0].get(0, 0) - corner).abs() < 1e-12);
    }

    #[test]
    fn constant_guidance_matches_constant_kernel() {
        let x = FeatureMap::single(Grid::from_fn(5, 4, |c, r| libm::sin((c * 7 + r) as f64)));
        let f = FeatureMap::single(Grid::filled(5, 4, 0.42));
        let w: Vec<f64> = (0..9).map(|t| libm::cos(t as f64)).collect();
        let g = PacParams::new(3, 1, 1, w.clone(), vec![0.0], KernelKind::Gaussian).unwrap();
        let c = PacParams::new(3, 1, 1, w, vec![0.0], KernelKind::Constant).unwrap();
        assert_eq!(pac_conv(&x, &f, &g).unwrap(), pac_conv(&x, &f, &c).unwrap());
    }
}
