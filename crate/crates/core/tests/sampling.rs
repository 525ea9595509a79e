use proptest::prelude::*;

use sflight::lightfield::{dequantize, FieldGeometry, LightField};
use sflight::sampling::{filter_taps, normalized_weights, sample_filtered, sample_nearest, FILTER_TAPS};
use sflight::sf::chordal_squared;
use sflight::{kernel_radius, Vector};

fn patterned(m: u32, n: u32, hemisphere: bool) -> LightField {
    let g = FieldGeometry::new(m, n, 1.5, Vector::new(0.0, 0.3, -0.2), hemisphere);
    let texels = (0..g.payload_len() as usize)
        .map(|b| if b % 4 == 3 { 255 } else { ((b * 131 + (b / 4) * 17) % 256) as u8 })
        .collect();
    LightField::new(g, texels).unwrap()
}

fn unit(theta: f64, phi: f64) -> Vector {
    Vector::new(phi.cos() * theta.sin(), phi.sin() * theta.sin(), theta.cos())
}

/// Five nearest indices and chordal distances by exhaustive scan.
fn scan5(n: u32, p: Vector) -> Vec<(u32, f64)> {
    let set = sflight::Lattice::new(n).unwrap();
    let mut all: Vec<(f64, u32)> = (0..n).map(|i| (chordal_squared(p, set.point_unchecked(i)), i)).collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    all.into_iter().take(5).map(|(d, i)| (i, d.sqrt())).collect()
}

/// Straightforward weighted mean over the 25 texel pairs.
fn oracle(lf: &LightField, h_o: Vector, h_d: Vector) -> Option<[f64; 3]> {
    let g = lf.geometry();
    let os = scan5(g.origins, h_o);
    if !g.row_stored(os[0].0) {
        return None;
    }
    let ds = scan5(g.directions, h_d);
    let hm = kernel_radius(g.origins, 1.0);
    let hn = kernel_radius(g.directions, 1.0);
    let (mut acc, mut total) = ([0.0; 3], 0.0);
    for (i, di) in &os {
        for (j, dj) in &ds {
            let w = (1.0 - di / hm).max(0.0) * (1.0 - dj / hn).max(0.0);
            let Some(t) = lf.texel(*i, *j) else { continue };
            if w <= 0.0 || t[3] == 0 {
                continue;
            }
            total += w;
            for c in 0..3 {
                acc[c] += w * dequantize(t[c]) as f64;
            }
        }
    }
    if total == 0.0 {
        let t = lf.texel(os[0].0, ds[0].0).unwrap();
        return Some([0, 1, 2].map(|c| dequantize(t[c]) as f64));
    }
    Some(acc.map(|a| a / total))
}

#[test]
fn filtered_matches_exhaustive_oracle() {
    for (m, n, hemi) in [(64, 128, false), (300, 200, true), (1024, 2048, false)] {
        let lf = patterned(m, n, hemi);
        for k in 0..300 {
            let h_o = unit((k as f64 * 0.731).rem_euclid(std::f64::consts::PI), k as f64 * 2.17);
            let h_d = unit((k as f64 * 1.37 + 0.4).rem_euclid(std::f64::consts::PI), k as f64 * 0.53);
            let s = sample_filtered(&lf, h_o, h_d);
            match oracle(&lf, h_o, h_d) {
                None => assert!(!s.valid && s.fetches == 0),
                Some(expect) => {
                    assert!(s.valid);
                    assert_eq!(s.fetches as usize, FILTER_TAPS);
                    for (c, e) in [s.color.x, s.color.y, s.color.z].into_iter().zip(expect) {
                        assert!((c as f64 - e).abs() < 1e-5, "m={m} n={n} k={k}: {c} vs {e}");
                    }
                }
            }
        }
    }
}

#[test]
fn nearest_matches_exhaustive_oracle() {
    let lf = patterned(200, 300, true);
    let g = *lf.geometry();
    for k in 0..300 {
        let h_o = unit((k as f64 * 0.377).rem_euclid(std::f64::consts::PI), k as f64 * 1.1);
        let h_d = unit((k as f64 * 0.91).rem_euclid(std::f64::consts::PI), k as f64 * 0.7);
        let s = sample_nearest(&lf, h_o, h_d);
        let i = scan5(g.origins, h_o)[0].0;
        let j = scan5(g.directions, h_d)[0].0;
        if g.row_stored(i) {
            let t = lf.texel(i, j).unwrap();
            assert_eq!(s.color.x, dequantize(t[0]));
            assert_eq!(s.fetches, 1);
        } else {
            assert!(!s.valid);
            assert_eq!(s.fetches, 0);
        }
    }
}

#[test]
fn lattice_aligned_query_is_dominated_by_its_texel() {
    let lf = patterned(128, 256, false);
    let g = *lf.geometry();
    let h_o = g.origin_lattice().point_unchecked(40);
    let h_d = g.direction_lattice().point_unchecked(99);
    let taps = filter_taps(&lf, h_o, h_d).unwrap();
    assert_eq!((taps[0].origin, taps[0].direction), (40, 99));
    assert_eq!(taps[0].weight, 1.0);
    assert!(taps[1..].iter().all(|t| t.weight < 1.0));
}

#[test]
fn fetch_count_is_independent_of_lattice_size() {
    for (m, n) in [(16, 16), (64, 4096), (4096, 64), (2048, 2048)] {
        let lf = LightField::filled(FieldGeometry::new(m, n, 1.0, Vector::zero(), false), [10, 20, 30, 255]).unwrap();
        for k in 0..50 {
            let h_o = unit(0.1 + k as f64 * 0.05, k as f64);
            let h_d = unit(2.9 - k as f64 * 0.05, -(k as f64));
            assert_eq!(sample_filtered(&lf, h_o, h_d).fetches as usize, FILTER_TAPS);
            assert_eq!(sample_nearest(&lf, h_o, h_d).fetches, 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weights_are_a_partition_of_unity(
        a in 0.0f64..3.14, b in 0.0f64..6.28, c in 0.0f64..3.14, d in 0.0f64..6.28,
        m in 8u32..3000, n in 8u32..3000,
    ) {
        let lf = patterned(m, n, false);
        let taps = filter_taps(&lf, unit(a, b), unit(c, d)).unwrap();
        let w = normalized_weights(&taps);
        prop_assert!(!w.is_empty());
        let sum: f64 = w.iter().map(|(_, w)| w).sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|(_, w)| *w > 0.0 && *w <= 1.0));
    }

    #[test]
    fn filtered_color_is_a_convex_combination(
        a in 0.0f64..3.14, b in 0.0f64..6.28, c in 0.0f64..3.14, d in 0.0f64..6.28,
        m in 8u32..3000, n in 8u32..3000,
    ) {
        let lf = patterned(m, n, true);
        let (h_o, h_d) = (unit(a, b), unit(c, d));
        let s = sample_filtered(&lf, h_o, h_d);
        if let Some(taps) = filter_taps(&lf, h_o, h_d) {
            let used: Vec<[u8; 4]> = normalized_weights(&taps).iter().map(|(t, _)| t.texel.unwrap()).collect();
            let fallback = [taps[0].texel.unwrap()];
            let used = if used.is_empty() { &fallback[..] } else { &used[..] };
            for (ch, v) in [s.color.x, s.color.y, s.color.z].into_iter().enumerate() {
                let lo = used.iter().map(|t| dequantize(t[ch])).fold(f32::INFINITY, f32::min);
                let hi = used.iter().map(|t| dequantize(t[ch])).fold(f32::NEG_INFINITY, f32::max);
                prop_assert!(v >= lo && v <= hi);
            }
        } else {
            prop_assert!(!s.valid);
        }
    }

    #[test]
    fn constant_field_samples_exactly(
        a in 0.0f64..3.14, b in 0.0f64..6.28, c in 0.0f64..3.14, d in 0.0f64..6.28,
        rgb in proptest::array::uniform3(0u8..=255),
    ) {
        let lf = LightField::filled(FieldGeometry::new(500, 700, 1.0, Vector::zero(), false), [rgb[0], rgb[1], rgb[2], 255]).unwrap();
        let s = sample_filtered(&lf, unit(a, b), unit(c, d));
        prop_assert_eq!([s.color.x, s.color.y, s.color.z], rgb.map(dequantize));
    }
}
