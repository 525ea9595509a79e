//! Masked image comparison reports.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{DisplayImage, LinearImage};
use crate::render::FrameResult;
use crate::ssim::{ssim, GrayImage, SsimError, SsimParams};

#[derive(Debug, Error, PartialEq)]
pub enum CompareError {
    #[error("image sizes differ: {a:?} vs {b:?}")]
    Dimensions { a: (u32, u32), b: (u32, u32) },
    #[error("no covered pixels to compare")]
    NoCoverage,
    #[error(transparent)]
    Ssim(#[from] SsimError),
}

/// Metrics over covered pixels, computed on display-encoded (sRGB) values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    /// Mean local SSIM of Rec. 709 luma.
    pub ssim: f64,
    pub masked_pixels: usize,
    /// Mean absolute RGB difference, channels in [0, 1].
    pub mae: f64,
    /// Reserved; always null.
    pub cwssim: Option<f64>,
}

pub fn compare_display(a: &DisplayImage, b: &DisplayImage, mask: &[bool], params: &SsimParams) -> Result<CompareReport, CompareError> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(CompareError::Dimensions {
            a: (a.width, a.height),
            b: (b.width, b.height),
        });
    }
    let masked = mask.iter().filter(|m| **m).count();
    if masked == 0 {
        return Err(CompareError::NoCoverage);
    }
    let ga = GrayImage::new(a.width, a.height, a.luma())?;
    let gb = GrayImage::new(b.width, b.height, b.luma())?;
    let s = ssim(&ga, &gb, Some(mask), params)?;
    let mut abs = 0.0;
    for (k, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
        for c in 0..3 {
            abs += (a.rgb[k][c] as f64 - b.rgb[k][c] as f64).abs();
        }
    }
    Ok(CompareReport {
        ssim: s,
        masked_pixels: masked,
        mae: abs / (3 * masked) as f64,
        cwssim: None,
    })
}

/// Compares a light-field frame against a reference over the frame's coverage.
pub fn compare(frame: &FrameResult, reference: &LinearImage, params: &SsimParams) -> Result<CompareReport, CompareError> {
    compare_display(
        &DisplayImage::from_linear(&frame.image()),
        &DisplayImage::from_linear(reference),
        &frame.coverage,
        params,
    )
}

/// Mask from the alpha channel of `img` (alpha above one half).
pub fn alpha_mask(img: &DisplayImage) -> Vec<bool> {
    img.alpha.iter().map(|a| *a > 0.5).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Rgb;

    fn frame(pixels: Vec<Rgb>, coverage: Vec<bool>, w: u32) -> FrameResult {
        let h = pixels.len() as u32 / w;
        FrameResult {
            width: w,
            height: h,
            fetches: vec![1; pixels.len()],
            pixels,
            coverage,
            eye_inside: false,
        }
    }

    #[test]
    fn self_comparison() {
        let px: Vec<Rgb> = (0..144).map(|k| Rgb::new((k % 12) as f32 / 12.0, 0.3, (k / 12) as f32 / 12.0)).collect();
        let f = frame(px, vec![true; 144], 12);
        let r = compare(&f, &f.image(), &SsimParams::default()).unwrap();
        assert_eq!(r.ssim, 1.0);
        assert_eq!(r.mae, 0.0);
        assert_eq!(r.masked_pixels, 144);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"cwssim\":null"));
    }

    #[test]
    fn constant_frames() {
        let c = Rgb::new(0.4, 0.4, 0.4);
        let f = frame(vec![c; 100], vec![true; 100], 10);
        let r = compare(&f, &f.image(), &SsimParams::default()).unwrap();
        assert_eq!(r.ssim, 1.0);
    }

    #[test]
    fn uncovered_frame_is_an_error() {
        let f = frame(vec![Rgb::zero(); 16], vec![false; 16], 4);
        assert_eq!(compare(&f, &f.image(), &SsimParams::default()), Err(CompareError::NoCoverage));
    }
}
