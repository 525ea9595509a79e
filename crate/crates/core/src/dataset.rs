//! Paired frames for training an image post-filter: a light-field render,
//! a path-traced target with uncovered pixels zeroed, and the coverage mask,
//! plus a JSON manifest of poses.
//!
//! Layout of the output directory:
//!
//! ```text
//! manifest.json
//! view_0000_input.png    filtered light-field frame, alpha = coverage
//! view_0000_target.png   reference frame, black and transparent outside coverage
//! view_0000_mask.png     8-bit gray, 255 = covered
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{encode_mask_png, encode_png, ImageError};
use crate::lightfield::LightField;
use crate::render::{render_png, FrameRequest, RenderError, SamplingMode};
use crate::sampling::Rgb;
use crate::tracer::{domain, sample_rng, PreparedScene};
use crate::truth::render_ground_truth;
use crate::Vector;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot write {path}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("invalid dataset option: {0}")]
    Option(&'static str),
}

/// Pose sampling ranges and render settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetOptions {
    pub views: u32,
    pub seed: u64,
    /// Eye distance from the field center in multiples of the radius.
    pub distance: (f64, f64),
    /// Eye elevation above the center's horizontal plane, degrees.
    pub elevation_deg: (f64, f64),
    pub fov_deg: f64,
    pub width: u32,
    pub height: u32,
    /// World up; also the axis elevation is measured from.
    pub up: [f64; 3],
    pub spp: u32,
    pub max_depth: u32,
    pub mode: SamplingMode,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self {
            views: 10,
            seed: 0,
            distance: (2.0, 3.5),
            elevation_deg: (10.0, 60.0),
            fov_deg: 40.0,
            width: 256,
            height: 256,
            up: [0.0, 0.0, 1.0],
            spp: 1024,
            max_depth: 5,
            mode: SamplingMode::Filtered,
        }
    }
}

impl DatasetOptions {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let (d0, d1) = self.distance;
        if !(d0 > 1.0 && d1 >= d0 && d1.is_finite()) {
            return Err(DatasetError::Option("distance range must lie outside the sphere"));
        }
        let (e0, e1) = self.elevation_deg;
        if !(e0 > -90.0 && e1 < 90.0 && e1 >= e0) {
            return Err(DatasetError::Option("elevation range must lie within (-90, 90)"));
        }
        if Vector::from(self.up).try_normalize().is_none() {
            return Err(DatasetError::Option("up vector is zero"));
        }
        Ok(())
    }

    /// Pose of view `index`, a pure function of the seed and index.
    pub fn pose(&self, index: u32, radius: f64, center: Vector) -> FrameRequest {
        let mut rng = sample_rng(self.seed, domain::POSE, index as u64, 0, 0);
        let dist = radius * lerp(self.distance, rng.gen());
        let elevation = lerp(self.elevation_deg, rng.gen()).to_radians();
        let azimuth = rng.gen::<f64>() * std::f64::consts::TAU;
        let up = Vector::from(self.up).normalize();
        let (t, s) = up.orthonormal_basis();
        let dir = (t * azimuth.cos() + s * azimuth.sin()) * elevation.cos() + up * elevation.sin();
        FrameRequest {
            eye: (center + dir * dist).to_array(),
            look_at: center.to_array(),
            up: self.up,
            fov_deg: self.fov_deg,
            width: self.width,
            height: self.height,
            mode: self.mode,
        }
    }
}

fn lerp((a, b): (f64, f64), u: f64) -> f64 {
    a + (b - a) * u
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub index: u32,
    pub pose: FrameRequest,
    pub input: String,
    pub target: String,
    pub mask: String,
    pub coverage_percent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub options: DatasetOptions,
    pub radius: f64,
    pub center: [f64; 3],
    pub views: Vec<ViewEntry>,
}

pub fn view_name(index: u32, kind: &str) -> String {
    format!("view_{index:04}_{kind}.png")
}

/// Renders every view and writes the directory; returns the manifest written.
pub fn write_dataset(
    scene: &PreparedScene,
    lf: &LightField,
    opts: &DatasetOptions,
    out: &Path,
    mut progress: impl FnMut(u32),
) -> Result<Manifest, DatasetError> {
    opts.validate()?;
    fs::create_dir_all(out).map_err(|source| io_err(out, source))?;
    let g = lf.geometry();
    let mut views = Vec::with_capacity(opts.views as usize);
    for index in 0..opts.views {
        let pose = opts.pose(index, g.radius, g.center);
        let (input, frame) = render_png(lf, &pose)?;
        let cam = pose.camera().map_err(RenderError::from)?;
        let mut target = render_ground_truth(scene, &cam, opts.spp, opts.max_depth, opts.seed ^ index as u64);
        for (p, covered) in target.pixels.iter_mut().zip(&frame.coverage) {
            if !covered {
                *p = Rgb::zero();
            }
        }
        let target_png = encode_png(target.width, target.height, &target.pixels, Some(&frame.coverage))?;
        let mask_png = encode_mask_png(frame.width, frame.height, &frame.coverage)?;
        let entry = ViewEntry {
            index,
            pose,
            input: view_name(index, "input"),
            target: view_name(index, "target"),
            mask: view_name(index, "mask"),
            coverage_percent: frame.coverage_percent(),
        };
        for (name, bytes) in [(&entry.input, &input), (&entry.target, &target_png), (&entry.mask, &mask_png)] {
            let path = out.join(name);
            fs::write(&path, bytes).map_err(|source| io_err(&path, source))?;
        }
        views.push(entry);
        progress(index + 1);
    }
    let manifest = Manifest {
        options: opts.clone(),
        radius: g.radius,
        center: g.center.to_array(),
        views,
    };
    let path = out.join(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json).map_err(|source| io_err(&path, source))?;
    Ok(manifest)
}

fn io_err(path: &Path, source: std::io::Error) -> DatasetError {
    DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poses_stay_in_range() {
        let opts = DatasetOptions::default();
        let c = Vector::new(0.5, -0.5, 1.0);
        for i in 0..200 {
            let p = opts.pose(i, 2.0, c);
            let d = Vector::from(p.eye) - c;
            let r = d.length();
            assert!((4.0..=7.0).contains(&r));
            let elev = (d.z / r).asin().to_degrees();
            assert!((10.0 - 1e-9..=60.0 + 1e-9).contains(&elev));
            assert_eq!(p.look_at, c.to_array());
            assert_eq!(p, opts.pose(i, 2.0, c));
        }
    }

    #[test]
    fn rejects_eye_inside() {
        let opts = DatasetOptions {
            distance: (0.5, 2.0),
            ..Default::default()
        };
        assert!(opts.validate().is_err());
    }
}
