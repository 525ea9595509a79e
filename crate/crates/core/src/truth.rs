//! Reference images by direct path tracing from the camera.

use rand::Rng;
use rayon::prelude::*;

use crate::camera::Camera;
use crate::color::LinearImage;
use crate::sampling::Rgb;
use crate::tracer::{domain, sample_rng, PreparedScene};
use crate::Vector;

/// Per-pixel mean of `spp` jittered primary-ray traces. Every sample has its
/// own counter-based stream, so output depends only on the arguments.
pub fn render_ground_truth(scene: &PreparedScene, cam: &Camera<f64>, spp: u32, max_depth: u32, seed: u64) -> LinearImage {
    let (w, h) = (cam.width, cam.height);
    let rows: Vec<Vec<Rgb>> = (0..h)
        .into_par_iter()
        .map(|y| (0..w).map(|x| pixel(scene, cam, x, y, spp, max_depth, seed)).collect())
        .collect();
    LinearImage {
        width: w,
        height: h,
        pixels: rows.into_iter().flatten().collect(),
    }
}

fn pixel(scene: &PreparedScene, cam: &Camera<f64>, x: u32, y: u32, spp: u32, max_depth: u32, seed: u64) -> Rgb {
    if spp == 0 {
        return Rgb::zero();
    }
    let mut sum = Vector::zero();
    for s in 0..spp {
        let mut rng = sample_rng(seed, domain::TRUTH, x as u64, y as u64, s as u64);
        let ray = cam.ray(x, y, rng.gen(), rng.gen());
        sum += scene.trace(&ray, &mut rng, max_depth).radiance;
    }
    (sum / spp as f64).cast()
}
