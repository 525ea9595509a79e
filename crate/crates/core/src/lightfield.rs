//! The baked two-index light field `L̂(i, j)`.
//!
//! A ray in a transparent medium outside a bounding sphere keeps its radiance,
//! so the five-dimensional plenoptic function reduces to radiance on rays that
//! enter the sphere. Entry points are quantized to an `M`-point spherical
//! Fibonacci set (origins) and exit points to an `N`-point set (directions),
//! giving a texture indexed by the two lattice indices.

use thiserror::Error;

use crate::sf::SphericalFibonacci;
use crate::{Lattice, Vector};

/// Bytes per stored texel (RGBA8).
pub const TEXEL_BYTES: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("origin count must be at least 2 (got {0})")]
    TooFewOrigins(u32),
    #[error("direction count must be at least 2 (got {0})")]
    TooFewDirections(u32),
    #[error("sphere radius must be positive and finite (got {0})")]
    BadRadius(f64),
    #[error("sphere center must be finite")]
    BadCenter,
    #[error("texel payload has {actual} bytes, expected {expected}")]
    PayloadSize { expected: u64, actual: u64 },
    #[error("cannot allocate {bytes} bytes for the texel payload")]
    Allocation { bytes: u64 },
}

/// Sphere and lattice parameters shared by the baker, the file header and
/// the sampler.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldGeometry {
    /// M: origin lattice size.
    pub origins: u32,
    /// N: direction lattice size.
    pub directions: u32,
    /// R
    pub radius: f64,
    /// O
    pub center: Vector,
    /// Store only origins with positive height.
    pub hemisphere_only: bool,
}

impl FieldGeometry {
    pub fn new(origins: u32, directions: u32, radius: f64, center: Vector, hemisphere_only: bool) -> Self {
        Self {
            origins,
            directions,
            radius,
            center,
            hemisphere_only,
        }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if self.origins < 2 {
            return Err(FieldError::TooFewOrigins(self.origins));
        }
        if self.directions < 2 {
            return Err(FieldError::TooFewDirections(self.directions));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(FieldError::BadRadius(self.radius));
        }
        if !self.center.is_finite() {
            return Err(FieldError::BadCenter);
        }
        Ok(())
    }

    /// Origin rows kept in the texture. Heights `1 - (2i+1)/M` decrease with
    /// `i`, so the positive ones are exactly the first `⌊M/2⌋`.
    pub fn stored_rows(&self) -> u32 {
        if self.hemisphere_only {
            self.origins / 2
        } else {
            self.origins
        }
    }

    pub fn payload_len(&self) -> u64 {
        self.stored_rows() as u64 * self.directions as u64 * TEXEL_BYTES as u64
    }

    pub fn origin_lattice(&self) -> Lattice {
        SphericalFibonacci::new(self.origins).expect("validated origin count")
    }

    pub fn direction_lattice(&self) -> Lattice {
        SphericalFibonacci::new(self.directions).expect("validated direction count")
    }

    #[inline]
    pub fn row_stored(&self, origin: u32) -> bool {
        origin < self.stored_rows()
    }
}

/// Immutable baked light field: geometry plus row-major RGBA8 texels
/// (origin index major). RGB is linear radiance clamped to [0, 1]; alpha is
/// 255 for valid texels and 0 for texels that could not be traced.
#[derive(Clone, Debug, PartialEq)]
pub struct LightField {
    geometry: FieldGeometry,
    texels: Vec<u8>,
}

impl LightField {
    pub fn new(geometry: FieldGeometry, texels: Vec<u8>) -> Result<Self, FieldError> {
        geometry.validate()?;
        let expected = geometry.payload_len();
        if texels.len() as u64 != expected {
            return Err(FieldError::PayloadSize {
                expected,
                actual: texels.len() as u64,
            });
        }
        Ok(Self { geometry, texels })
    }

    /// Field whose every texel is `rgba`.
    pub fn filled(geometry: FieldGeometry, rgba: [u8; 4]) -> Result<Self, FieldError> {
        geometry.validate()?;
        let mut texels = allocate(geometry.payload_len())?;
        for chunk in texels.chunks_exact_mut(TEXEL_BYTES) {
            chunk.copy_from_slice(&rgba);
        }
        Self::new(geometry, texels)
    }

    #[inline]
    pub fn geometry(&self) -> &FieldGeometry {
        &self.geometry
    }

    #[inline]
    pub fn payload(&self) -> &[u8] {
        &self.texels
    }

    /// Texel `(i, j)`, or `None` if origin row `i` is not stored.
    #[inline]
    pub fn texel(&self, origin: u32, direction: u32) -> Option<[u8; 4]> {
        if origin >= self.geometry.stored_rows() || direction >= self.geometry.directions {
            return None;
        }
        let at = (origin as usize * self.geometry.directions as usize + direction as usize) * TEXEL_BYTES;
        let t = &self.texels[at..at + TEXEL_BYTES];
        Some([t[0], t[1], t[2], t[3]])
    }
}

/// Zeroed payload buffer; reports the byte count if the allocation fails.
pub(crate) fn allocate(bytes: u64) -> Result<Vec<u8>, FieldError> {
    let len = usize::try_from(bytes).map_err(|_| FieldError::Allocation { bytes })?;
    let mut v = Vec::new();
    v.try_reserve_exact(len).map_err(|_| FieldError::Allocation { bytes })?;
    v.resize(len, 0);
    Ok(v)
}

/// Linear radiance to an 8-bit channel value.
#[inline]
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// 8-bit channel value back to linear radiance.
#[inline]
pub fn dequantize(v: u8) -> f32 {
    v as f32 / 255.0
}
