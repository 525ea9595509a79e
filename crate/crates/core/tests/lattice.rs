use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

use sflight::sf::{chordal_squared, sf_height, MAX_NEIGHBORS};
use sflight::{sf_point, Real, SphericalFibonacci, Vec3};

fn brute<T: Real>(set: &SphericalFibonacci<T>, p: Vec3<T>, k: usize) -> Vec<u32> {
    let mut all: Vec<(T, u32)> = (0..set.len()).map(|i| (chordal_squared(p, set.point_unchecked(i)), i)).collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|e| e.1).collect()
}

fn random_unit<T: Real>(rng: &mut Pcg64Mcg) -> Vec3<T> {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let l: f64 = Vec3::<f64>::length(v);
        if l > 0.1 && l < 1.0 {
            return (v / l).cast();
        }
    }
}

fn check_against_scan<T: Real>(n: u32, queries: usize, seed: u64) {
    let set = SphericalFibonacci::<T>::new(n).unwrap();
    let mut rng = Pcg64Mcg::seed_from_u64(seed);
    let poles = [Vec3::new(T::zero(), T::zero(), T::one()), Vec3::new(T::zero(), T::zero(), -T::one())];
    let randoms = (0..queries).map(|_| random_unit::<T>(&mut rng));
    for p in poles.into_iter().chain(randoms) {
        let expect = brute(&set, p, 5);
        assert_eq!(set.nearest(p).unwrap(), expect[0], "n={n} p={p:?}");
        let got: Vec<u32> = set.neighbors(p, 5).unwrap().iter().map(|e| e.index).collect();
        assert_eq!(got, expect, "n={n} p={p:?}");
    }
}

#[test]
fn matches_linear_scan_f64() {
    for n in [1, 2, 3, 100, 129, 1000, 4096, 20_000] {
        check_against_scan::<f64>(n, 1000, n as u64);
    }
}

#[test]
fn matches_linear_scan_f32() {
    for n in [100, 4096, 30_000] {
        check_against_scan::<f32>(n, 500, 99 + n as u64);
    }
}

#[test]
fn every_lattice_point_maps_to_itself() {
    for n in [1, 2, 10, 1024, 12288] {
        let set = SphericalFibonacci::<f64>::new(n).unwrap();
        for i in 0..n {
            assert_eq!(set.nearest(set.point_unchecked(i)).unwrap(), i, "n={n}");
        }
    }
}

#[test]
fn heights_are_evenly_spaced() {
    let n = 37;
    for i in 0..n - 1 {
        let dz: f64 = sf_height::<f64>(i, n) - sf_height::<f64>(i + 1, n);
        assert!((dz - 2.0 / n as f64).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn neighbors_are_sorted_unique_and_start_with_nearest(
        n in 1u32..2_000_000,
        k in 1usize..=MAX_NEIGHBORS,
        theta in 0.0f64..std::f64::consts::PI,
        phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let set = SphericalFibonacci::<f64>::new(n).unwrap();
        let p = Vec3::new(phi.cos() * theta.sin(), phi.sin() * theta.sin(), theta.cos());
        let nb = set.neighbors(p, k).unwrap();
        prop_assert_eq!(nb.len(), k.min(n as usize));
        prop_assert_eq!(nb[0].index, set.nearest(p).unwrap());
        for w in nb.windows(2) {
            prop_assert!((w[0].distance, w[0].index) < (w[1].distance, w[1].index));
        }
        for e in &nb {
            let d = chordal_squared(p, set.point_unchecked(e.index)).sqrt();
            prop_assert_eq!(e.distance, d);
        }
    }

    #[test]
    fn lattice_points_are_unit(n in 1u32..u32::MAX, frac in 0.0f64..1.0) {
        let i = ((n as f64 * frac) as u32).min(n - 1);
        let p = sf_point::<f64>(i, n).unwrap();
        prop_assert!((p.length() - 1.0).abs() < 1e-12);
        prop_assert!(sf_point::<f64>(n, n).is_err());
    }

    #[test]
    fn round_trip_random_sets(n in 1u32..5_000_000, frac in 0.0f64..1.0) {
        let i = ((n as f64 * frac) as u32).min(n - 1);
        let set = SphericalFibonacci::<f64>::new(n).unwrap();
        prop_assert_eq!(set.nearest(set.point_unchecked(i)).unwrap(), i);
    }
}
