//! Light field precomputation.
//!
//! Texel `(i, j)` holds the radiance arriving at origin lattice point `p_i`
//! (scaled onto the bounding sphere) from the direction of the chord toward
//! direction lattice point `p_j`. Each sample jitters the ray origin
//! uniformly over a disk of area `4πR²/M`, tangent to the sphere at `p_i`.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::lightfield::{allocate, quantize, FieldError, FieldGeometry, LightField, TEXEL_BYTES};
use crate::ray::Ray;
use crate::scene::Scene;
use crate::tracer::{disk_sample, domain, sample_rng, PreparedScene};
use crate::Vector;

#[derive(Debug, Error)]
pub enum BakeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("samples per texel must be at least 1")]
    NoSamples,
    #[error("max depth must be at least 1")]
    NoDepth,
    #[error("origin {origin} lies in the lower hemisphere, which a hemisphere bake does not store")]
    Hemisphere { origin: u32 },
    #[error("texel ({origin}, {direction}) out of range")]
    OutOfRange { origin: u32, direction: u32 },
    #[error("scene reaches {distance} from the sphere center, outside radius {radius}")]
    SceneOutside { distance: f64, radius: f64 },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BakeConfig {
    pub geometry: FieldGeometry,
    /// Samples per texel.
    pub spp: u32,
    /// Maximum number of diffuse vertices per path.
    pub max_depth: u32,
    pub seed: u64,
}

impl BakeConfig {
    pub const DEFAULT_SPP: u32 = 64;
    pub const DEFAULT_DEPTH: u32 = 5;

    pub fn new(geometry: FieldGeometry) -> Self {
        Self {
            geometry,
            spp: Self::DEFAULT_SPP,
            max_depth: Self::DEFAULT_DEPTH,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), BakeError> {
        self.geometry.validate()?;
        if self.spp == 0 {
            return Err(BakeError::NoSamples);
        }
        if self.max_depth == 0 {
            return Err(BakeError::NoDepth);
        }
        Ok(())
    }

    /// Radius of the jitter disk, `sqrt(A / π)` for `A = 4πR² / M`.
    pub fn jitter_radius(&self) -> f64 {
        2.0 * self.geometry.radius / (self.geometry.origins as f64).sqrt()
    }
}

/// Receives row completion counts from bake workers (concurrently).
pub trait Progress: Sync {
    fn rows_done(&self, rows: u64);
}

/// Ignores progress.
pub struct Silent;

impl Progress for Silent {
    fn rows_done(&self, _rows: u64) {}
}

/// Counts completed rows.
#[derive(Default)]
pub struct RowCounter(pub AtomicU64);

impl Progress for RowCounter {
    fn rows_done(&self, rows: u64) {
        self.0.fetch_add(rows, Ordering::Relaxed);
    }
}

impl<F: Fn(u64) + Sync> Progress for F {
    fn rows_done(&self, rows: u64) {
        self(rows)
    }
}

/// Diagnostics gathered while baking.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BakeReport {
    pub texels: u64,
    /// Texels whose origin and direction points coincide (written as zero, alpha 0).
    pub degenerate_texels: u64,
    /// Samples whose estimate was NaN/infinite and counted as zero.
    pub clamped_samples: u64,
}

/// Ray for texel `(i, j)` with a jitter sample in the unit disk; `None` when the
/// two lattice points coincide and no direction exists.
pub fn ray_for(
    origin: u32,
    direction: u32,
    cfg: &BakeConfig,
    jitter: (f64, f64),
) -> Result<Option<Ray<f64>>, BakeError> {
    let g = &cfg.geometry;
    if origin >= g.origins || direction >= g.directions {
        return Err(BakeError::OutOfRange { origin, direction });
    }
    if g.hemisphere_only && !g.row_stored(origin) {
        return Err(BakeError::Hemisphere { origin });
    }
    let po = g.origin_lattice().point_unchecked(origin);
    let pd = g.direction_lattice().point_unchecked(direction);
    let chord = pd - po;
    if chord.length() < 1e-12 {
        return Ok(None);
    }
    let dir = chord.normalize();
    let (t, s) = po.orthonormal_basis();
    let r = cfg.jitter_radius();
    let start = g.center + po * g.radius + (t * jitter.0 + s * jitter.1) * r;
    Ok(Some(Ray::new(start, dir)))
}

/// Bakes with rayon's global pool.
pub fn bake(scene: &Scene, cfg: &BakeConfig, progress: &dyn Progress) -> Result<(LightField, BakeReport), BakeError> {
    bake_with_threads(scene, cfg, progress, None)
}

/// Bakes on a dedicated pool of `threads` workers (`None`: rayon's default).
/// Output is bit-identical for every thread count.
pub fn bake_with_threads(
    scene: &Scene,
    cfg: &BakeConfig,
    progress: &dyn Progress,
    threads: Option<usize>,
) -> Result<(LightField, BakeReport), BakeError> {
    cfg.validate()?;
    let g = cfg.geometry;
    let reach = scene.max_distance_from(g.center);
    if reach > g.radius {
        return Err(BakeError::SceneOutside {
            distance: reach,
            radius: g.radius,
        });
    }
    let prepared = PreparedScene::new(scene.clone());
    let mut texels = allocate(g.payload_len())?;
    let row_bytes = g.directions as usize * TEXEL_BYTES;

    let run = |texels: &mut Vec<u8>| -> BakeReport {
        texels
            .par_chunks_mut(row_bytes)
            .enumerate()
            .map(|(row, out)| {
                let report = bake_row(&prepared, cfg, row as u32, out);
                progress.rows_done(1);
                report
            })
            .reduce(BakeReport::default, |a, b| BakeReport {
                texels: a.texels + b.texels,
                degenerate_texels: a.degenerate_texels + b.degenerate_texels,
                clamped_samples: a.clamped_samples + b.clamped_samples,
            })
    };
    let report = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| BakeError::ThreadPool(e.to_string()))?
            .install(|| run(&mut texels)),
        None => run(&mut texels),
    };
    Ok((LightField::new(g, texels)?, report))
}

fn bake_row(scene: &PreparedScene, cfg: &BakeConfig, origin: u32, out: &mut [u8]) -> BakeReport {
    let mut report = BakeReport::default();
    for (direction, texel) in out.chunks_exact_mut(TEXEL_BYTES).enumerate() {
        report.texels += 1;
        let direction = direction as u32;
        let mut sum = Vector::zero();
        let mut degenerate = false;
        for s in 0..cfg.spp {
            let mut rng = sample_rng(cfg.seed, domain::BAKE, origin as u64, direction as u64, s as u64);
            let jitter = disk_sample(rng.gen(), rng.gen());
            match ray_for(origin, direction, cfg, jitter).expect("indices in range") {
                Some(ray) => {
                    let traced = scene.trace(&ray, &mut rng, cfg.max_depth);
                    report.clamped_samples += traced.clamped as u64;
                    sum += traced.radiance;
                }
                None => {
                    degenerate = true;
                    break;
                }
            }
        }
        if degenerate {
            report.degenerate_texels += 1;
            texel.copy_from_slice(&[0, 0, 0, 0]);
        } else {
            let mean = sum / cfg.spp as f64;
            texel.copy_from_slice(&[quantize(mean.x), quantize(mean.y), quantize(mean.z), 255]);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenes;

    fn geometry(m: u32, n: u32, hemisphere: bool) -> FieldGeometry {
        FieldGeometry::new(m, n, 1.0, Vector::zero(), hemisphere)
    }

    #[test]
    fn zero_jitter_starts_on_sphere() {
        let mut cfg = BakeConfig::new(FieldGeometry::new(64, 128, 2.0, Vector::new(1.0, 2.0, 3.0), false));
        cfg.seed = 1;
        let ray = ray_for(5, 9, &cfg, (0.0, 0.0)).unwrap().unwrap();
        let po = cfg.geometry.origin_lattice().point_unchecked(5);
        assert_eq!(ray.origin, Vector::new(1.0, 2.0, 3.0) + po * 2.0);
    }

    #[test]
    fn jitter_stays_in_tangent_plane() {
        let cfg = BakeConfig::new(geometry(12288, 64, false));
        assert!((cfg.jitter_radius() - 0.018_042_195_912_175_805).abs() < 1e-15);
        let po = cfg.geometry.origin_lattice().point_unchecked(100);
        let ray = ray_for(100, 3, &cfg, (0.6, -0.8)).unwrap().unwrap();
        let offset = ray.origin - po;
        assert!(offset.dot(po).abs() < 1e-15);
        assert!((offset.length() - cfg.jitter_radius()).abs() < 1e-12);
    }

    #[test]
    fn antipodal_direction() {
        // With M = N = 1 the points would be the poles, but sets need 2 points;
        // a 2-point set has its points at z = ±0.5, so build the pair directly.
        let cfg = BakeConfig::new(geometry(2, 2, false));
        let ray = ray_for(0, 1, &cfg, (0.0, 0.0)).unwrap().unwrap();
        let po = cfg.geometry.origin_lattice().point_unchecked(0);
        let pd = cfg.geometry.direction_lattice().point_unchecked(1);
        assert!((ray.direction - (pd - po).normalize()).length() < 1e-15);
        // For exactly antipodal endpoints the chord points through the center.
        let north = Vector::new(0.0, 0.0, 1.0);
        let south = Vector::new(0.0, 0.0, -1.0);
        assert_eq!((south - north).normalize(), south);
    }

    #[test]
    fn identical_points_signal_skip() {
        let cfg = BakeConfig::new(geometry(16, 16, false));
        assert_eq!(ray_for(3, 3, &cfg, (0.0, 0.0)).unwrap(), None);
    }

    #[test]
    fn hemisphere_and_range_violations() {
        let cfg = BakeConfig::new(geometry(16, 16, true));
        assert!(ray_for(7, 0, &cfg, (0.0, 0.0)).is_ok());
        assert!(matches!(ray_for(8, 0, &cfg, (0.0, 0.0)), Err(BakeError::Hemisphere { origin: 8 })));
        assert!(matches!(ray_for(0, 16, &cfg, (0.0, 0.0)), Err(BakeError::OutOfRange { .. })));
    }

    #[test]
    fn constant_environment_bake() {
        let mut cfg = BakeConfig::new(geometry(32, 64, false));
        cfg.spp = 4;
        let env = Vector::new(0.25, 0.5, 0.75);
        let (lf, report) = bake(&Scene::empty(env), &cfg, &Silent).unwrap();
        assert_eq!(report.degenerate_texels, 0);
        for t in lf.payload().chunks_exact(4) {
            assert_eq!(t, [64, 128, 191, 255]);
        }
    }

    #[test]
    fn degenerate_texels_are_flagged() {
        let mut cfg = BakeConfig::new(geometry(8, 8, false));
        cfg.spp = 2;
        let (lf, report) = bake(&Scene::empty(Vector::splat(0.5)), &cfg, &Silent).unwrap();
        assert_eq!(report.degenerate_texels, 8);
        assert_eq!(lf.texel(3, 3), Some([0, 0, 0, 0]));
        assert_eq!(lf.texel(3, 4), Some([128, 128, 128, 255]));
    }

    #[test]
    fn hemisphere_bake_stores_half() {
        let mut cfg = BakeConfig::new(geometry(10, 6, true));
        cfg.spp = 1;
        let (lf, report) = bake(&Scene::empty(Vector::splat(0.1)), &cfg, &Silent).unwrap();
        assert_eq!(lf.payload().len(), 5 * 6 * 4);
        assert_eq!(report.texels, 30);
    }

    #[test]
    fn refuses_scene_outside_sphere() {
        let cfg = BakeConfig::new(FieldGeometry::new(8, 8, 0.5, Vector::zero(), false));
        let err = bake(&scenes::desk(), &cfg, &Silent).unwrap_err();
        assert!(matches!(err, BakeError::SceneOutside { .. }));
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let mut cfg = BakeConfig::new(geometry(24, 40, false));
        cfg.spp = 2;
        cfg.seed = 42;
        let counter = RowCounter::default();
        let (a, _) = bake_with_threads(&scenes::desk(), &cfg, &counter, Some(1)).unwrap();
        let (b, _) = bake_with_threads(&scenes::desk(), &cfg, &Silent, Some(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(counter.0.load(Ordering::Relaxed), 24);
    }

    #[test]
    fn rejects_invalid_config() {
        let mut cfg = BakeConfig::new(geometry(8, 8, false));
        cfg.spp = 0;
        assert!(matches!(cfg.validate(), Err(BakeError::NoSamples)));
        cfg.spp = 1;
        cfg.max_depth = 0;
        assert!(matches!(cfg.validate(), Err(BakeError::NoDepth)));
    }
}
