//! Spherical Fibonacci point sets.
//!
//! Point `i` of an `n`-point set has height `z_i = 1 - (2i + 1) / n` and
//! azimuth `2π·frac(i / Φ)`. Points are never stored: every query recomputes
//! the handful of lattice points it needs from `(i, n)`.
//!
//! Nearest-neighbor queries follow the inverse Fibonacci mapping: the set is a
//! 2D lattice in `(azimuth, z)` space, and near height `z` two consecutive
//! Fibonacci numbers `F_k`, `F_{k+1}` give an almost reduced basis for it.
//! Solving for the query's lattice coordinates and visiting a fixed window of
//! cells around them yields a candidate set whose size does not depend on `n`.
//! Queries within a few lattice rows of a pole, where the azimuthal lattice
//! wraps onto itself, scan a fixed number of polar indices instead.

use std::marker::PhantomData;

use arrayvec::ArrayVec;
use thiserror::Error;

use crate::num::Real;
use crate::vector::Vec3;

/// Largest `k` accepted by [`SphericalFibonacci::neighbors`].
pub const MAX_NEIGHBORS: usize = 9;

/// Sets up to this size are answered by scanning every point.
const SCAN_ALL_LIMIT: u32 = 128;
/// Queries whose fractional lattice row is closer than this to either pole
/// use the polar scan.
const POLE_BAND: f64 = 12.0;
/// Number of indices examined next to a pole.
const POLE_SCAN: u32 = 80;
/// Lattice cells visited around the query cell: the 6×6 window from -2 to +3
/// in both basis directions, nearest cells first so pruning starts early.
const WINDOW: [(i64, i64); 36] = [
    (0, 0), (0, 1), (1, 0), (1, 1), (-1, 0), (-1, 1), (0, -1), (0, 2), (1, -1), (1, 2), (2, 0), (2, 1),
    (-1, -1), (-1, 2), (2, -1), (2, 2), (-2, 0), (-2, 1), (0, -2), (0, 3), (1, -2), (1, 3), (3, 0), (3, 1),
    (-2, -1), (-2, 2), (-1, -2), (-1, 3), (2, -2), (2, 3), (3, -1), (3, 2), (-2, -2), (-2, 3), (3, -2), (3, 3),
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SfError {
    #[error("point set must contain at least one point")]
    EmptySet,
    #[error("index {index} out of range for a set of {n} points")]
    IndexOutOfRange { index: u64, n: u32 },
    #[error("query vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },
    #[error("neighbor count {k} outside 1..={MAX_NEIGHBORS}")]
    NeighborCount { k: usize },
}

/// One entry of a neighbor query: lattice index and chordal distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor<T> {
    pub index: u32,
    pub distance: T,
}

pub type Neighbors<T> = ArrayVec<Neighbor<T>, MAX_NEIGHBORS>;

/// Implicit spherical Fibonacci point set of cardinality `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SphericalFibonacci<T> {
    n: u32,
    _scalar: PhantomData<T>,
}

/// Height of point `i` in an `n`-point set.
#[inline]
pub fn sf_height<T: Real>(i: u32, n: u32) -> T {
    T::one() - T::from_index(2 * i as u64 + 1) / T::from_index(n as u64)
}

/// Azimuth of point `i`, in `[0, 2π)`.
#[inline]
pub fn sf_azimuth<T: Real>(i: u32) -> T {
    // frac(i / Φ) in 0.64 fixed point: exact up to the constant's rounding,
    // where the floating-point product loses low bits for large i.
    const INV_GOLDEN_FIXED: u64 = 0x9e37_79b9_7f4a_7c15;
    let frac = (i as u64).wrapping_mul(INV_GOLDEN_FIXED) >> 11;
    T::TAU() * T::lit(frac as f64 * (1.0 / (1u64 << 53) as f64))
}

/// Converts polar angle `theta` (from +z) and azimuth `phi` to a unit vector.
#[inline]
pub fn polar_to_cartesian<T: Real>(theta: T, phi: T) -> Vec3<T> {
    let (sin_t, cos_t) = theta.sin_cos();
    let (sin_p, cos_p) = phi.sin_cos();
    Vec3::new(cos_p * sin_t, sin_p * sin_t, cos_t)
}

#[inline]
fn point_from_height<T: Real>(i: u32, z: T) -> Vec3<T> {
    let sin_t = (T::one() - z * z).max(T::zero()).sqrt();
    let (sin_p, cos_p) = sf_azimuth::<T>(i).sin_cos();
    Vec3::new(cos_p * sin_t, sin_p * sin_t, z)
}

/// Point `i` of the `n`-point set.
pub fn sf_point<T: Real>(i: u32, n: u32) -> Result<Vec3<T>, SfError> {
    SphericalFibonacci::new(n)?.point(i)
}

/// Squared chordal distance; the single metric used for ordering neighbors.
#[inline]
pub fn chordal_squared<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a.distance_squared(b)
}

impl<T: Real> SphericalFibonacci<T> {
    pub fn new(n: u32) -> Result<Self, SfError> {
        if n == 0 {
            return Err(SfError::EmptySet);
        }
        Ok(Self {
            n,
            _scalar: PhantomData,
        })
    }

    #[inline]
    pub fn len(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: u32) -> Result<Vec3<T>, SfError> {
        if i >= self.n {
            return Err(SfError::IndexOutOfRange {
                index: i as u64,
                n: self.n,
            });
        }
        Ok(self.point_unchecked(i))
    }

    /// Point `i` without the range check. Out-of-range indices produce points
    /// off the sphere, so callers must guarantee `i < n`.
    #[inline]
    pub fn point_unchecked(&self, i: u32) -> Vec3<T> {
        point_from_height(i, sf_height::<T>(i, self.n))
    }

    #[inline]
    pub fn height(&self, i: u32) -> T {
        sf_height(i, self.n)
    }

    /// Index of the nearest lattice point; ties go to the smaller index.
    pub fn nearest(&self, p: Vec3<T>) -> Result<u32, SfError> {
        self.check_unit(p)?;
        Ok(self.search(p, 1)[0].index)
    }

    /// The `k` nearest lattice points in ascending `(distance, index)` order.
    pub fn neighbors(&self, p: Vec3<T>, k: usize) -> Result<Neighbors<T>, SfError> {
        if !(1..=MAX_NEIGHBORS).contains(&k) {
            return Err(SfError::NeighborCount { k });
        }
        self.check_unit(p)?;
        Ok(self.search(p, k))
    }

    fn check_unit(&self, p: Vec3<T>) -> Result<(), SfError> {
        if p.is_finite() && p.is_unit() {
            Ok(())
        } else {
            Err(SfError::NotUnit {
                norm: p.length().to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// Candidate enumeration shared by `nearest` and `neighbors`. `p` must be unit.
    pub(crate) fn search(&self, p: Vec3<T>, k: usize) -> Neighbors<T> {
        let mut best = Best::new(k);
        let n = self.n;
        let q = Query::new(p);
        if n <= SCAN_ALL_LIMIT {
            for i in 0..n {
                self.offer(&mut best, &q, i);
            }
            return best.finish();
        }

        let z = p.z.max(-T::one()).min(T::one());
        let nf = T::from_index(n as u64);
        let two = T::lit(2.0);
        // Fractional index at which the lattice height equals z.
        let row = ((T::one() - z) * nf - T::one()) / two;
        let band = T::lit(POLE_BAND);
        let scan = POLE_SCAN.min(n);
        if row < band {
            for i in 0..scan {
                self.offer(&mut best, &q, i);
            }
            return best.finish();
        }
        if row > nf - T::one() - band {
            for i in (n - scan)..n {
                self.offer(&mut best, &q, i);
            }
            return best.finish();
        }

        let sin2 = T::one() - z * z;
        let golden_sq_ln = (T::GOLDEN * T::GOLDEN).ln();
        let level_f = (nf * T::PI() * T::lit(5.0).sqrt() * sin2).ln() / golden_sq_ln;
        let level = level_f.floor().to_i64().unwrap_or(2).clamp(2, FIB.len() as i64 - 2) as usize;
        let (f0, f1) = (FIB[level], FIB[level + 1]);

        // Azimuth offset of lattice step F_k: -(-1/Φ)^k.
        let eps = |k: usize| -> T {
            let mag = T::GOLDEN.powi(-(k as i32));
            if k % 2 == 0 {
                -mag
            } else {
                mag
            }
        };
        let b00 = T::TAU() * eps(level);
        let b01 = T::TAU() * eps(level + 1);
        let b10 = -two * T::from_index(f0) / nf;
        let b11 = -two * T::from_index(f1) / nf;
        let det = b00 * b11 - b01 * b10;

        let phi = q.phi;
        let dz = z - (T::one() - T::one() / nf);
        let c0 = (b11 * phi - b01 * dz) / det;
        let c1 = (b00 * dz - b10 * phi) / det;
        let a0 = c0.floor().to_i64().unwrap_or(0);
        let b0 = c1.floor().to_i64().unwrap_or(0);

        let (f0, f1) = (f0 as i64, f1 as i64);
        for (da, db) in WINDOW {
            let i = (a0 + da) * f0 + (b0 + db) * f1;
            if (0..n as i64).contains(&i) {
                self.offer(&mut best, &q, i as u32);
            }
        }
        best.finish()
    }

    #[inline]
    fn offer(&self, best: &mut Best<T>, q: &Query<T>, i: u32) {
        let z = self.height(i);
        if let Some(worst) = best.worst() {
            let dz = z - q.p.z;
            let dz2 = dz * dz;
            if dz2 > worst {
                return;
            }
            // Lower bound without trigonometry, using 1 - cos x >= 2x²/π² on [-π, π]:
            // |p - q|² = dz² + (r - r_i)² + 2 r r_i (1 - cos Δφ).
            let r_i = (T::one() - z * z).max(T::zero()).sqrt();
            let mut dphi = (sf_azimuth::<T>(i) - q.phi).abs();
            if dphi > T::PI() {
                dphi = (T::TAU() - dphi).abs();
            }
            let dr = q.r - r_i;
            let t = dphi / T::PI();
            let bound = dz2 + dr * dr + T::lit(4.0) * q.r * r_i * t * t;
            let slack = worst * T::lit(1e-6) + T::epsilon() * T::lit(64.0);
            if bound > worst + slack {
                return;
            }
        }
        let point = point_from_height(i, z);
        best.insert(i, chordal_squared(q.p, point));
    }
}

struct Query<T> {
    p: Vec3<T>,
    /// Distance from the z axis.
    r: T,
    /// Azimuth in (-π, π].
    phi: T,
}

impl<T: Real> Query<T> {
    fn new(p: Vec3<T>) -> Self {
        Self {
            p,
            r: (p.x * p.x + p.y * p.y).sqrt(),
            phi: p.y.atan2(p.x),
        }
    }
}

/// Fixed-capacity sorted list of the best candidates seen so far, keyed by
/// `(squared distance, index)`.
struct Best<T> {
    k: usize,
    items: ArrayVec<(T, u32), MAX_NEIGHBORS>,
}

impl<T: Real> Best<T> {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: ArrayVec::new(),
        }
    }

    #[inline]
    fn worst(&self) -> Option<T> {
        if self.items.len() == self.k {
            self.items.last().map(|e| e.0)
        } else {
            None
        }
    }

    #[inline]
    fn insert(&mut self, index: u32, d2: T) {
        let key_lt = |a: (T, u32), b: (T, u32)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
        if self.items.len() == self.k {
            let last = *self.items.last().expect("k >= 1");
            if !key_lt((d2, index), last) {
                return;
            }
        }
        if self.items.iter().any(|e| e.1 == index) {
            return;
        }
        let pos = self
            .items
            .iter()
            .position(|&e| key_lt((d2, index), e))
            .unwrap_or(self.items.len());
        if self.items.len() == self.k {
            self.items.pop();
        }
        self.items.insert(pos, (d2, index));
    }

    fn finish(self) -> Neighbors<T> {
        self.items
            .into_iter()
            .map(|(d2, index)| Neighbor {
                index,
                distance: d2.sqrt(),
            })
            .collect()
    }
}

const FIB: [u64; 64] = {
    let mut f = [0u64; 64];
    f[1] = 1;
    let mut i = 2;
    while i < 64 {
        f[i] = f[i - 1] + f[i - 2];
        i += 1;
    }
    f
};

/// Filter support radius for an `n`-point set on a sphere of radius `radius`:
/// `R · 5^(1/4) · sqrt(4π / (sqrt(5) · n))`.
pub fn kernel_radius<T: Real>(n: u32, radius: T) -> T {
    let five = T::lit(5.0);
    radius * five.sqrt().sqrt() * (T::lit(4.0) * T::PI() / (five.sqrt() * T::from_index(n as u64))).sqrt()
}

/// Tent kernel `max(0, 1 - d/h)`.
#[inline]
pub fn kernel_weight<T: Real>(distance: T, radius: T) -> T {
    (T::one() - distance / radius).max(T::zero())
}
