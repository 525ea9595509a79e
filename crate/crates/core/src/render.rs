//! Frame synthesis from a baked light field: one pinhole ray per pixel,
//! sphere crossing, texel lookup. Per-pixel work is two lattice queries and
//! at most 25 texel fetches, independent of the lattice sizes.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::camera::{Camera, CameraError};
use crate::color::{encode_png, ImageError, LinearImage};
use crate::lightfield::LightField;
use crate::sampling::{sample_filtered, sample_nearest, Rgb, Sample};
use crate::sphere::intersect_sphere;
use crate::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    Nearest,
    Filtered,
}

impl FromStr for SamplingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nearest" => Ok(Self::Nearest),
            "filtered" => Ok(Self::Filtered),
            other => Err(format!("unknown sampling mode `{other}` (expected nearest or filtered)")),
        }
    }
}

impl std::fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Nearest => "nearest",
            Self::Filtered => "filtered",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameResult {
    pub width: u32,
    pub height: u32,
    /// Linear RGB; black where not covered.
    pub pixels: Vec<Rgb>,
    pub coverage: Vec<bool>,
    /// Texel fetches made for each pixel.
    pub fetches: Vec<u8>,
    /// The eye was inside the bounding sphere.
    pub eye_inside: bool,
}

impl FrameResult {
    pub fn covered(&self) -> usize {
        self.coverage.iter().filter(|c| **c).count()
    }

    pub fn coverage_percent(&self) -> f64 {
        100.0 * self.covered() as f64 / self.coverage.len() as f64
    }

    /// 8-bit sRGB PNG, alpha = coverage.
    pub fn to_png(&self) -> Result<Vec<u8>, ImageError> {
        encode_png(self.width, self.height, &self.pixels, Some(&self.coverage))
    }

    pub fn image(&self) -> LinearImage {
        LinearImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.clone(),
        }
    }
}

/// Color, coverage and fetch count for one pixel.
pub fn render_pixel(lf: &LightField, cam: &Camera<f64>, mode: SamplingMode, x: u32, y: u32) -> (Sample, bool) {
    let g = lf.geometry();
    let ray = cam.pixel_center_ray(x, y);
    let Some(hits) = intersect_sphere(&ray, g.radius, g.center) else {
        return (
            Sample {
                color: Rgb::zero(),
                valid: false,
                fetches: 0,
            },
            false,
        );
    };
    let s = match mode {
        SamplingMode::Nearest => sample_nearest(lf, hits.front, hits.back),
        SamplingMode::Filtered => sample_filtered(lf, hits.front, hits.back),
    };
    (s, hits.eye_inside)
}

pub fn render_frame(lf: &LightField, cam: &Camera<f64>, mode: SamplingMode) -> FrameResult {
    let (w, h) = (cam.width, cam.height);
    let rows: Vec<Vec<(Sample, bool)>> = (0..h)
        .into_par_iter()
        .map(|y| (0..w).map(|x| render_pixel(lf, cam, mode, x, y)).collect())
        .collect();
    let count = w as usize * h as usize;
    let mut frame = FrameResult {
        width: w,
        height: h,
        pixels: Vec::with_capacity(count),
        coverage: Vec::with_capacity(count),
        fetches: Vec::with_capacity(count),
        eye_inside: false,
    };
    for (s, inside) in rows.into_iter().flatten() {
        frame.pixels.push(if s.valid { s.color } else { Rgb::zero() });
        frame.coverage.push(s.valid);
        frame.fetches.push(s.fetches as u8);
        frame.eye_inside |= inside;
    }
    frame
}

/// Everything that determines a rendered frame besides the field itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameRequest {
    pub eye: [f64; 3],
    pub look_at: [f64; 3],
    pub up: [f64; 3],
    pub fov_deg: f64,
    pub width: u32,
    pub height: u32,
    pub mode: SamplingMode,
}

impl FrameRequest {
    pub fn camera(&self) -> Result<Camera<f64>, CameraError> {
        Camera::from_degrees(
            Vector::from(self.eye),
            Vector::from(self.look_at),
            Vector::from(self.up),
            self.fov_deg,
            self.width,
            self.height,
        )
    }
}

/// Renders `req` and encodes the PNG. The CLI and the HTTP server both go
/// through here, which keeps their output byte-identical.
pub fn render_png(lf: &LightField, req: &FrameRequest) -> Result<(Vec<u8>, FrameResult), RenderError> {
    let cam = req.camera()?;
    let frame = render_frame(lf, &cam, req.mode);
    let png = frame.to_png()?;
    Ok((png, frame))
}

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Image(#[from] ImageError),
}
