//! Gaussian-windowed structural similarity with an optional pixel mask.
//!
//! Local statistics at a pixel use only in-bounds, masked pixels of its
//! window with the Gaussian weights renormalized over them. Values are
//! shifted by the window's center pixel before accumulating, so windows of
//! constant value produce zero variance exactly.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SsimError {
    #[error("image sizes differ: {a:?} vs {b:?}")]
    Dimensions { a: (u32, u32), b: (u32, u32) },
    #[error("mask size {mask} does not match {pixels} pixels")]
    MaskSize { mask: usize, pixels: usize },
    #[error("mask selects no pixels")]
    EmptyMask,
    #[error("invalid ssim parameters: {0}")]
    Params(&'static str),
    #[error("image buffer holds {len} values, expected {width}×{height}")]
    Buffer { width: u32, height: u32, len: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsimParams {
    /// Window side in pixels; odd and at least 3.
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<(), SsimError> {
        if self.window < 3 || self.window % 2 == 0 {
            return Err(SsimError::Params("window must be odd and at least 3"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(SsimError::Params("sigma must be positive"));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0 && self.dynamic_range > 0.0) {
            return Err(SsimError::Params("k1, k2 and dynamic range must be positive"));
        }
        Ok(())
    }

    fn kernel(&self) -> Vec<f64> {
        let r = (self.window / 2) as isize;
        let g: Vec<f64> = (-r..=r)
            .map(|d| (-((d * d) as f64) / (2.0 * self.sigma * self.sigma)).exp())
            .collect();
        let s: f64 = g.iter().sum();
        g.into_iter().map(|v| v / s).collect()
    }
}

/// Single-channel image, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<f64>) -> Result<Self, SsimError> {
        if data.len() != width as usize * height as usize {
            return Err(SsimError::Buffer {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> f64) -> Self {
        let data = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        Self { width, height, data }
    }
}

/// Local SSIM at every pixel; `None` outside the mask.
pub fn ssim_map(a: &GrayImage, b: &GrayImage, mask: Option<&[bool]>, params: &SsimParams) -> Result<Vec<Option<f64>>, SsimError> {
    params.validate()?;
    if (a.width, a.height) != (b.width, b.height) {
        return Err(SsimError::Dimensions {
            a: (a.width, a.height),
            b: (b.width, b.height),
        });
    }
    let (w, h) = (a.width as usize, a.height as usize);
    if let Some(m) = mask {
        if m.len() != w * h {
            return Err(SsimError::MaskSize {
                mask: m.len(),
                pixels: w * h,
            });
        }
    }
    let inside = |k: usize| mask.map_or(true, |m| m[k]);
    let g = params.kernel();
    let r = params.window / 2;
    let c1 = (params.k1 * params.dynamic_range).powi(2);
    let c2 = (params.k2 * params.dynamic_range).powi(2);

    let mut out = vec![None; w * h];
    for y in 0..h {
        for x in 0..w {
            let k0 = y * w + x;
            if !inside(k0) {
                continue;
            }
            let (ca, cb) = (a.data[k0], b.data[k0]);
            let (mut sw, mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for wy in 0..params.window {
                let Some(yy) = (y + wy).checked_sub(r).filter(|v| *v < h) else {
                    continue;
                };
                for wx in 0..params.window {
                    let Some(xx) = (x + wx).checked_sub(r).filter(|v| *v < w) else {
                        continue;
                    };
                    let k = yy * w + xx;
                    if !inside(k) {
                        continue;
                    }
                    let wt = g[wy] * g[wx];
                    let (da, db) = (a.data[k] - ca, b.data[k] - cb);
                    sw += wt;
                    sa += wt * da;
                    sb += wt * db;
                    saa += wt * da * da;
                    sbb += wt * db * db;
                    sab += wt * da * db;
                }
            }
            let (ma, mb) = (sa / sw, sb / sw);
            let va = saa / sw - ma * ma;
            let vb = sbb / sw - mb * mb;
            let cov = sab / sw - ma * mb;
            let (mua, mub) = (ca + ma, cb + mb);
            let luminance = (2.0 * mua * mub + c1) / (mua * mua + mub * mub + c1);
            let structure = (2.0 * cov + c2) / (va + vb + c2);
            out[k0] = Some(luminance * structure);
        }
    }
    Ok(out)
}

/// Mean local SSIM over the masked pixels.
pub fn ssim(a: &GrayImage, b: &GrayImage, mask: Option<&[bool]>, params: &SsimParams) -> Result<f64, SsimError> {
    let map = ssim_map(a, b, mask, params)?;
    let mut values = map.iter().flatten();
    let first = *values.next().ok_or(SsimError::EmptyMask)?;
    // Offsets from the first value keep uniform maps exact.
    let (sum, count) = values.fold((0.0, 1usize), |(s, c), v| (s + (v - first), c + 1));
    Ok(first + sum / count as f64)
}
