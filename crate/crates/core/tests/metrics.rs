use proptest::prelude::*;

use sflight::color::LinearImage;
use sflight::compare::compare;
use sflight::render::FrameResult;
use sflight::sampling::Rgb;
use sflight::ssim::{ssim, ssim_map, GrayImage, SsimParams};

const W: u32 = 32;

fn fixture(f: impl Fn(f64, f64) -> f64) -> GrayImage {
    GrayImage::from_fn(W, W, |x, y| f(x as f64, y as f64))
}

/// Mean of the map over pixels whose full window lies inside the image,
/// which is what a reference implementation that crops borders reports.
fn interior_mean(a: &GrayImage, b: &GrayImage) -> f64 {
    let map = ssim_map(a, b, None, &SsimParams::default()).unwrap();
    let mut sum = 0.0;
    let mut count = 0;
    for y in 5..W - 5 {
        for x in 5..W - 5 {
            sum += map[(y * W + x) as usize].unwrap();
            count += 1;
        }
    }
    sum / count as f64
}

// Reference values from scikit-image 0.x `structural_similarity` with
// gaussian_weights=True, sigma=1.5, use_sample_covariance=False, data_range=1.
#[test]
fn agrees_with_reference_implementation() {
    let wave = fixture(|x, y| 0.5 + 0.4 * (0.7 * x).sin() * (0.45 * y).cos());
    let inverted = GrayImage::new(W, W, wave.data.iter().map(|v| 1.0 - v).collect()).unwrap();
    let got = interior_mean(&wave, &inverted);
    assert!((got - -0.908_875_978_196_382_9).abs() < 1e-9, "{got}");
    assert!(got < 0.0);

    let a = fixture(|x, y| ((x as u32 * y as u32) % 17) as f64 / 16.0);
    let b = fixture(|x, y| (((x as u32 + 3) * y as u32) % 13) as f64 / 12.0);
    let got = interior_mean(&a, &b);
    assert!((got - -0.045_251_913_711_732_21).abs() < 1e-9, "{got}");

    let a = fixture(|x, y| ((x as u32 / 4 + y as u32 / 4) % 2) as f64 * 0.6 + 0.2 + 0.01 * x);
    let b = GrayImage::from_fn(W, W, |x, y| {
        let n = ((x * 7919 + y * 104_729) % 101) as f64 / 1000.0 - 0.05;
        (a.data[(y * W + x) as usize] + n).clamp(0.0, 1.0)
    });
    let got = interior_mean(&a, &b);
    assert!((got - 0.994_868_963_912_630_9).abs() < 1e-9, "{got}");
}

fn frame(pixels: Vec<Rgb>, coverage: Vec<bool>, width: u32) -> FrameResult {
    FrameResult {
        width,
        height: pixels.len() as u32 / width,
        fetches: vec![25; pixels.len()],
        pixels,
        coverage,
        eye_inside: false,
    }
}

fn image(w: u32, h: u32) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..=1.0, (w * h) as usize)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetric(a in image(14, 11), b in image(14, 11), mask in proptest::collection::vec(any::<bool>(), 154)) {
        let a = GrayImage::new(14, 11, a).unwrap();
        let b = GrayImage::new(14, 11, b).unwrap();
        let p = SsimParams::default();
        let m = if mask.iter().any(|m| *m) { Some(&mask[..]) } else { None };
        let ab = ssim(&a, &b, m, &p).unwrap();
        let ba = ssim(&b, &a, m, &p).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-9);
        prop_assert!((-1.0..=1.0).contains(&ab));
    }

    #[test]
    fn self_similarity_is_exactly_one(a in image(13, 9), mask in proptest::collection::vec(any::<bool>(), 117)) {
        let a = GrayImage::new(13, 9, a).unwrap();
        let m = if mask.iter().any(|m| *m) { Some(&mask[..]) } else { None };
        prop_assert_eq!(ssim(&a, &a, m, &SsimParams::default()).unwrap(), 1.0);
    }

    #[test]
    fn compare_ignores_uncovered_pixels(
        base in proptest::collection::vec(0.0f32..=1.0, 3 * 144),
        noise in proptest::collection::vec(0.0f32..=1.0, 3 * 144),
        coverage in proptest::collection::vec(any::<bool>(), 144),
    ) {
        prop_assume!(coverage.iter().any(|c| *c));
        let px: Vec<Rgb> = base.chunks(3).map(|c| Rgb::new(c[0], c[1], c[2])).collect();
        let reference = LinearImage::new(12, 12, px.iter().map(|p| *p * 0.8).collect()).unwrap();
        let f1 = frame(px.clone(), coverage.clone(), 12);
        let mutated: Vec<Rgb> = px.iter().zip(noise.chunks(3)).zip(&coverage)
            .map(|((p, n), c)| if *c { *p } else { Rgb::new(n[0], n[1], n[2]) })
            .collect();
        let f2 = frame(mutated, coverage.clone(), 12);
        let mut ref2 = reference.clone();
        for (p, c) in ref2.pixels.iter_mut().zip(&coverage) {
            if !c {
                *p = Rgb::new(1.0, 0.0, 1.0);
            }
        }
        let p = SsimParams::default();
        prop_assert_eq!(compare(&f1, &reference, &p).unwrap(), compare(&f2, &ref2, &p).unwrap());
    }
}
