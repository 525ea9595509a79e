//! Texel lookup for a pair of sphere crossings `(h_o, h_d)`.
//!
//! Nearest sampling fetches the texel of the two nearest lattice points.
//! Filtered sampling takes five lattice neighbors of each crossing and
//! weights the 25 texel pairs by the product of per-point tent weights, with
//! support radii `kernel_radius(M)` and `kernel_radius(N)` measured on the
//! unit sphere.

use arrayvec::ArrayVec;

use crate::lightfield::{dequantize, LightField};
use crate::sf::kernel_radius;
use crate::vector::Vec3;
use crate::{kernel_weight, Vector};

/// Neighbors per crossing in filtered mode.
pub const FILTER_NEIGHBORS: usize = 5;
/// Texel fetches per filtered sample.
pub const FILTER_TAPS: usize = FILTER_NEIGHBORS * FILTER_NEIGHBORS;

pub type Rgb = Vec3<f32>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub color: Rgb,
    /// False when the nearest origin row is not stored (outside a hemisphere bake).
    pub valid: bool,
    /// Texel fetches made.
    pub fetches: u32,
}

impl Sample {
    fn invalid(fetches: u32) -> Self {
        Self {
            color: Rgb::zero(),
            valid: false,
            fetches,
        }
    }
}

#[inline]
fn texel_rgb(t: [u8; 4]) -> Rgb {
    Rgb::new(dequantize(t[0]), dequantize(t[1]), dequantize(t[2]))
}

pub fn sample_nearest(lf: &LightField, h_o: Vector, h_d: Vector) -> Sample {
    let g = lf.geometry();
    let i = g.origin_lattice().search(h_o, 1)[0].index;
    if !g.row_stored(i) {
        return Sample::invalid(0);
    }
    let j = g.direction_lattice().search(h_d, 1)[0].index;
    match lf.texel(i, j) {
        Some(t) => Sample {
            color: texel_rgb(t),
            valid: true,
            fetches: 1,
        },
        None => Sample::invalid(1),
    }
}

/// One texel pair considered by the filter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tap {
    pub origin: u32,
    pub direction: u32,
    /// Unnormalized product weight.
    pub weight: f64,
    /// `None` when the row is not stored.
    pub texel: Option<[u8; 4]>,
}

/// The filter footprint of `(h_o, h_d)`: every fetched texel with its weight.
/// `None` when the nearest origin row is not stored (no texels are fetched).
pub fn filter_taps(lf: &LightField, h_o: Vector, h_d: Vector) -> Option<ArrayVec<Tap, FILTER_TAPS>> {
    let g = lf.geometry();
    let origins = g.origin_lattice().search(h_o, FILTER_NEIGHBORS);
    if !g.row_stored(origins[0].index) {
        return None;
    }
    let directions = g.direction_lattice().search(h_d, FILTER_NEIGHBORS);
    let h_m = kernel_radius(g.origins, g.radius) / g.radius;
    let h_n = kernel_radius(g.directions, g.radius) / g.radius;
    let mut taps = ArrayVec::new();
    for o in &origins {
        let w_o = kernel_weight(o.distance, h_m);
        for d in &directions {
            let w_d = kernel_weight(d.distance, h_n);
            taps.push(Tap {
                origin: o.index,
                direction: d.index,
                weight: w_o * w_d,
                texel: lf.texel(o.index, d.index),
            });
        }
    }
    Some(taps)
}

/// Taps that contribute (stored, traced, positive weight) with weights summing to 1.
pub fn normalized_weights(taps: &[Tap]) -> Vec<(Tap, f64)> {
    let usable: Vec<&Tap> = taps.iter().filter(|t| contributes(t)).collect();
    let total: f64 = usable.iter().map(|t| t.weight).sum();
    if total <= 0.0 {
        return Vec::new();
    }
    usable.into_iter().map(|t| (*t, t.weight / total)).collect()
}

#[inline]
fn contributes(t: &Tap) -> bool {
    t.weight > 0.0 && matches!(t.texel, Some(x) if x[3] != 0)
}

pub fn sample_filtered(lf: &LightField, h_o: Vector, h_d: Vector) -> Sample {
    let Some(taps) = filter_taps(lf, h_o, h_d) else {
        return Sample::invalid(0);
    };
    let fetches = taps.len() as u32;
    // The first tap pairs the two nearest lattice points: the nearest sample.
    let base = texel_rgb(taps[0].texel.expect("nearest row is stored"));
    let base64: Vector = base.cast();

    // Accumulate offsets from the nearest texel so equal inputs reproduce it exactly.
    let mut total = 0.0;
    let mut acc = Vector::zero();
    let mut lo = base;
    let mut hi = base;
    for tap in taps.iter().filter(|t| contributes(t)) {
        let c = texel_rgb(tap.texel.expect("contributing tap"));
        total += tap.weight;
        acc += (c.cast::<f64>() - base64) * tap.weight;
        lo = lo.min_elem(c);
        hi = hi.max_elem(c);
    }
    if total <= 0.0 {
        return Sample {
            color: base,
            valid: true,
            fetches,
        };
    }
    let blended = base64 + acc / total;
    let color = Rgb::new(
        (blended.x as f32).clamp(lo.x, hi.x),
        (blended.y as f32).clamp(lo.y, hi.y),
        (blended.z as f32).clamp(lo.z, hi.z),
    );
    Sample {
        color,
        valid: true,
        fetches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lightfield::FieldGeometry;

    fn patterned(m: u32, n: u32, hemisphere: bool) -> LightField {
        let g = FieldGeometry::new(m, n, 2.0, Vector::new(0.1, 0.2, 0.3), hemisphere);
        let texels = (0..g.payload_len() as usize)
            .map(|b| if b % 4 == 3 { 255 } else { ((b * 37 + b / 4 * 11) % 256) as u8 })
            .collect();
        LightField::new(g, texels).unwrap()
    }

    #[test]
    fn lattice_aligned_nearest() {
        let lf = patterned(64, 128, false);
        let g = lf.geometry();
        for (k, l) in [(0, 0), (10, 99), (63, 127)] {
            let h_o = g.origin_lattice().point_unchecked(k);
            let h_d = g.direction_lattice().point_unchecked(l);
            let s = sample_nearest(&lf, h_o, h_d);
            assert!(s.valid);
            assert_eq!(s.fetches, 1);
            assert_eq!(s.color, texel_rgb(lf.texel(k, l).unwrap()));
        }
    }

    #[test]
    fn lower_hemisphere_is_invalid() {
        let lf = patterned(64, 128, true);
        let h = Vector::new(0.0, 0.6, -0.8);
        assert!(!sample_nearest(&lf, h, h).valid);
        assert!(!sample_filtered(&lf, h, h).valid);
        assert_eq!(sample_filtered(&lf, h, h).fetches, 0);
        let up = Vector::new(0.0, 0.6, 0.8);
        assert!(sample_filtered(&lf, up, h).valid);
        assert_eq!(sample_filtered(&lf, up, h).fetches, 25);
    }

    #[test]
    fn constant_field_is_reproduced_exactly() {
        let g = FieldGeometry::new(50, 70, 1.0, Vector::zero(), false);
        let lf = LightField::filled(g, [10, 200, 33, 255]).unwrap();
        let want = texel_rgb([10, 200, 33, 255]);
        for k in 0..40 {
            let a = Vector::new((k as f64).sin(), (k as f64 * 1.3).cos(), 0.3).normalize();
            let b = Vector::new(-(k as f64 * 0.7).cos(), 0.2, (k as f64).sin()).normalize();
            assert_eq!(sample_filtered(&lf, a, b).color, want);
            assert_eq!(sample_nearest(&lf, a, b).color, want);
        }
    }

    #[test]
    fn lattice_aligned_filtered_is_dominated_by_center() {
        let lf = patterned(200, 300, false);
        let g = lf.geometry();
        let h_o = g.origin_lattice().point_unchecked(77);
        let h_d = g.direction_lattice().point_unchecked(150);
        let taps = filter_taps(&lf, h_o, h_d).unwrap();
        assert_eq!((taps[0].origin, taps[0].direction), (77, 150));
        assert_eq!(taps[0].weight, 1.0);
        assert!(taps[1..].iter().all(|t| t.weight < 1.0));
    }
}
