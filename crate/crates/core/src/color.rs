//! Transfer functions and 8-bit image encoding.

use image::{ImageBuffer, ImageEncoder, Rgba};
use thiserror::Error;

use crate::sampling::Rgb;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error(transparent)]
    Png(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("image size {width}×{height} does not match {pixels} pixels")]
    Size { width: u32, height: u32, pixels: usize },
}

/// sRGB encoding of a linear value in [0, 1].
#[inline]
pub fn linear_to_srgb(v: f32) -> f32 {
    let v = v.clamp(0.0, 1.0);
    if v <= 0.003_130_8 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

#[inline]
pub fn srgb_to_linear(v: f32) -> f32 {
    if v <= 0.040_45 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

#[inline]
pub fn encode_srgb8(v: f32) -> u8 {
    (linear_to_srgb(v) * 255.0).round() as u8
}

/// Rec. 709 luma of display-encoded RGB.
#[inline]
pub fn luma(rgb: [f32; 3]) -> f32 {
    0.2126 * rgb[0] + 0.7152 * rgb[1] + 0.0722 * rgb[2]
}

/// Linear RGB image, row-major from the top-left pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
}

impl LinearImage {
    pub fn new(width: u32, height: u32, pixels: Vec<Rgb>) -> Result<Self, ImageError> {
        if pixels.len() != width as usize * height as usize {
            return Err(ImageError::Size {
                width,
                height,
                pixels: pixels.len(),
            });
        }
        Ok(Self { width, height, pixels })
    }

    /// PNG with sRGB-encoded color and alpha from `coverage` (opaque when `None`).
    pub fn to_png(&self, coverage: Option<&[bool]>) -> Result<Vec<u8>, ImageError> {
        encode_png(self.width, self.height, &self.pixels, coverage)
    }
}

/// Encodes linear RGB pixels as an 8-bit sRGB RGBA PNG.
pub fn encode_png(width: u32, height: u32, pixels: &[Rgb], coverage: Option<&[bool]>) -> Result<Vec<u8>, ImageError> {
    let count = width as usize * height as usize;
    if pixels.len() != count || coverage.is_some_and(|c| c.len() != count) {
        return Err(ImageError::Size {
            width,
            height,
            pixels: pixels.len(),
        });
    }
    let mut raw = Vec::with_capacity(count * 4);
    for (k, p) in pixels.iter().enumerate() {
        let alpha = match coverage {
            Some(c) if !c[k] => 0,
            _ => 255,
        };
        raw.extend_from_slice(&[encode_srgb8(p.x), encode_srgb8(p.y), encode_srgb8(p.z), alpha]);
    }
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out).write_image(&raw, width, height, image::ExtendedColorType::Rgba8)?;
    Ok(out)
}

/// 8-bit grayscale PNG of a boolean mask (255 = set).
pub fn encode_mask_png(width: u32, height: u32, mask: &[bool]) -> Result<Vec<u8>, ImageError> {
    if mask.len() != width as usize * height as usize {
        return Err(ImageError::Size {
            width,
            height,
            pixels: mask.len(),
        });
    }
    let raw: Vec<u8> = mask.iter().map(|m| if *m { 255 } else { 0 }).collect();
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out).write_image(&raw, width, height, image::ExtendedColorType::L8)?;
    Ok(out)
}

/// Display-encoded RGBA image with channels in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct DisplayImage {
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<[f32; 3]>,
    pub alpha: Vec<f32>,
}

impl DisplayImage {
    pub fn decode_png(bytes: &[u8]) -> Result<Self, ImageError> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?.to_rgba8();
        Ok(Self::from_rgba8(&img))
    }

    pub fn open(path: impl AsRef<std::path::Path>) -> Result<Self, ImageError> {
        Self::decode_png(&std::fs::read(path)?)
    }

    fn from_rgba8(img: &ImageBuffer<Rgba<u8>, Vec<u8>>) -> Self {
        let (width, height) = img.dimensions();
        let mut rgb = Vec::with_capacity(width as usize * height as usize);
        let mut alpha = Vec::with_capacity(rgb.capacity());
        for p in img.pixels() {
            rgb.push([p[0] as f32 / 255.0, p[1] as f32 / 255.0, p[2] as f32 / 255.0]);
            alpha.push(p[3] as f32 / 255.0);
        }
        Self { width, height, rgb, alpha }
    }

    /// Unquantized display encoding of a linear image.
    pub fn from_linear(img: &LinearImage) -> Self {
        Self {
            width: img.width,
            height: img.height,
            rgb: img
                .pixels
                .iter()
                .map(|p| [linear_to_srgb(p.x), linear_to_srgb(p.y), linear_to_srgb(p.z)])
                .collect(),
            alpha: vec![1.0; img.pixels.len()],
        }
    }

    pub fn luma(&self) -> Vec<f64> {
        self.rgb.iter().map(|p| luma(*p) as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn srgb_round_trip() {
        for k in 0..=100 {
            let v = k as f32 / 100.0;
            assert!((srgb_to_linear(linear_to_srgb(v)) - v).abs() < 1e-5);
        }
        assert_eq!(encode_srgb8(0.0), 0);
        assert_eq!(encode_srgb8(1.0), 255);
        assert_eq!(encode_srgb8(0.214_041_14), 128);
    }

    #[test]
    fn png_round_trip_keeps_alpha() {
        let px = vec![Rgb::new(0.0, 0.5, 1.0), Rgb::new(0.2, 0.2, 0.2)];
        let png = encode_png(2, 1, &px, Some(&[true, false])).unwrap();
        let back = DisplayImage::decode_png(&png).unwrap();
        assert_eq!((back.width, back.height), (2, 1));
        assert_eq!(back.alpha, vec![1.0, 0.0]);
        assert_eq!(back.rgb[0][0], 0.0);
        assert_eq!(back.rgb[0][2], 1.0);
        assert!(encode_png(3, 1, &px, None).is_err());
    }
}
