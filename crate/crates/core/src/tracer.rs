//! Unidirectional path tracing with next-event estimation toward emissive
//! triangles and cosine-weighted diffuse bounces.
//!
//! At every diffuse vertex emitters are reached two ways, by sampling a point
//! on them and by the cosine-sampled bounce ray hitting one; the two are
//! combined with power-heuristic weights. Rays that leave the scene pick up
//! the environment. Paths stop after `max_depth` diffuse vertices (no Russian
//! roulette), so the estimator is the exact expectation of the
//! `max_depth`-bounce truncation.

use rand::Rng;
use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

use crate::bvh::Bvh;
use crate::ray::Ray;
use crate::scene::Scene;
use crate::Vector;

/// Random stream used for one Monte-Carlo sample.
pub type SampleRng = Pcg64Mcg;

/// Stream domains keep independent consumers of the same seed apart.
pub mod domain {
    pub const BAKE: u64 = 0x4241_4b45;
    pub const TRUTH: u64 = 0x5452_5554;
    pub const POSE: u64 = 0x504f_5345;
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based stream for sample `sample` of cell `(a, b)`: the same key
/// always yields the same numbers, whatever thread asks for it.
pub fn sample_rng(seed: u64, domain: u64, a: u64, b: u64, sample: u64) -> SampleRng {
    let mut h = splitmix(seed ^ domain.rotate_left(17));
    for part in [a, b, sample] {
        h = splitmix(h ^ part);
    }
    Pcg64Mcg::seed_from_u64(h)
}

/// Uniform point in the unit disk.
#[inline]
pub fn disk_sample(u1: f64, u2: f64) -> (f64, f64) {
    let r = u1.sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

struct EmissiveTriangle {
    triangle: u32,
    cumulative: f64,
}

/// Scene plus acceleration structure and light table; immutable, shared
/// between threads.
pub struct PreparedScene {
    pub scene: Scene,
    bvh: Bvh,
    emitters: Vec<EmissiveTriangle>,
    emissive_area: f64,
    epsilon: f64,
}

/// Outcome of tracing one ray.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Traced {
    /// Non-negative, finite radiance.
    pub radiance: Vector,
    /// The raw estimate was NaN or infinite and has been replaced by zero.
    pub clamped: bool,
}

impl PreparedScene {
    pub fn new(scene: Scene) -> Self {
        let bvh = Bvh::build(&scene.triangles);
        let mut emitters = Vec::new();
        let mut total = 0.0;
        for (idx, t) in scene.triangles.iter().enumerate() {
            if scene.material(t).is_emissive() {
                let area = t.area();
                if area > 0.0 {
                    total += area;
                    emitters.push(EmissiveTriangle {
                        triangle: idx as u32,
                        cumulative: total,
                    });
                }
            }
        }
        let extent = scene.max_distance_from(Vector::zero()).max(1.0);
        Self {
            scene,
            bvh,
            emitters,
            emissive_area: total,
            epsilon: 1e-7 * extent,
        }
    }

    pub fn environment(&self) -> Vector {
        self.scene.environment
    }

    /// Traces `ray` and returns the incoming radiance estimate along it.
    pub fn trace(&self, ray: &Ray<f64>, rng: &mut SampleRng, max_depth: u32) -> Traced {
        let raw = self.trace_raw(ray, rng, max_depth);
        if raw.is_finite() {
            Traced {
                radiance: raw.max_elem(Vector::zero()),
                clamped: false,
            }
        } else {
            Traced {
                radiance: Vector::zero(),
                clamped: true,
            }
        }
    }

    fn trace_raw(&self, ray: &Ray<f64>, rng: &mut SampleRng, max_depth: u32) -> Vector {
        let env = self.scene.environment;
        let mut radiance = Vector::zero();
        let mut throughput = Vector::splat(1.0);
        let mut ray = *ray;
        let mut vertex = 0u32;
        // Solid-angle density of the cosine sample that produced `ray`, if any.
        let mut bounce_pdf: Option<f64> = None;
        loop {
            let Some(hit) = self.bvh.intersect(&ray, self.epsilon, f64::INFINITY) else {
                radiance += throughput.mul_elem(env);
                return radiance;
            };
            let tri = &self.scene.triangles[hit.triangle as usize];
            let material = self.scene.material(tri);
            let mut normal = hit.normal.normalize();
            let cos_y = -normal.dot(ray.direction);
            if let Some(pdf) = bounce_pdf {
                if material.is_emissive() {
                    let light_pdf = hit.t * hit.t / (cos_y.abs() * self.emissive_area);
                    radiance += throughput.mul_elem(material.emission) * power_heuristic(pdf, light_pdf);
                }
            } else {
                radiance += throughput.mul_elem(material.emission);
            }
            if vertex == max_depth {
                return radiance;
            }
            vertex += 1;
            if cos_y < 0.0 {
                normal = -normal;
            }
            let position = ray.at(hit.t) + normal * self.epsilon;
            let reflect = throughput.mul_elem(material.albedo);
            if reflect.max_component() <= 0.0 {
                return radiance;
            }
            radiance += reflect.mul_elem(self.direct_light(position, normal, rng)) / std::f64::consts::PI;

            let (t, s) = normal.orthonormal_basis();
            let (dx, dy) = disk_sample(rng.gen(), rng.gen());
            let dz = (1.0 - dx * dx - dy * dy).max(0.0).sqrt();
            let direction = (t * dx + s * dy + normal * dz).normalize();
            bounce_pdf = Some(dz / std::f64::consts::PI);
            throughput = reflect;
            ray = Ray::new(position, direction);
        }
    }

    /// One-sample light-sampling estimate of `∫ L_e cosθ_x cosθ_y / d² V dA`
    /// over emitters, weighted against cosine sampling of the same directions.
    fn direct_light(&self, position: Vector, normal: Vector, rng: &mut SampleRng) -> Vector {
        if self.emitters.is_empty() {
            return Vector::zero();
        }
        let pick = rng.gen::<f64>() * self.emissive_area;
        let slot = self
            .emitters
            .partition_point(|e| e.cumulative <= pick)
            .min(self.emitters.len() - 1);
        let tri = &self.scene.triangles[self.emitters[slot].triangle as usize];
        let [a, b, c] = tri.vertices;
        let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        let point = a + (b - a) * u + (c - a) * v;
        let to_light = point - position;
        let dist2 = to_light.length_squared();
        if dist2 <= 0.0 {
            return Vector::zero();
        }
        let dist = dist2.sqrt();
        let wi = to_light / dist;
        let cos_x = normal.dot(wi);
        let light_normal = (b - a).cross(c - a).normalize();
        let cos_y = light_normal.dot(wi).abs();
        if cos_x <= 0.0 || cos_y <= 0.0 {
            return Vector::zero();
        }
        let shadow = Ray::new(position, wi);
        if self.bvh.occluded(&shadow, self.epsilon, dist * (1.0 - 1e-6) - self.epsilon) {
            return Vector::zero();
        }
        let light_pdf = dist2 / (cos_y * self.emissive_area);
        let weight = power_heuristic(light_pdf, cos_x / std::f64::consts::PI);
        self.scene.material(tri).emission * (cos_x * cos_y / dist2 * self.emissive_area * weight)
    }
}

/// Power-heuristic weight of a sample drawn with density `a` against `b`.
#[inline]
fn power_heuristic(a: f64, b: f64) -> f64 {
    let (a2, b2) = (a * a, b * b);
    if a2.is_infinite() {
        1.0
    } else if a2 + b2 > 0.0 {
        a2 / (a2 + b2)
    } else {
        0.0
    }
}
