use thiserror::Error;

use crate::num::Real;
use crate::ray::Ray;
use crate::vector::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CameraError {
    #[error("eye and look-at point coincide")]
    DegenerateView,
    #[error("up vector is zero or parallel to the view direction")]
    DegenerateUp,
    #[error("vertical field of view must lie in (0, π) radians")]
    FieldOfView,
    #[error("image size must be at least 1×1")]
    EmptyImage,
    #[error("camera parameters must be finite")]
    NonFinite,
}

/// Pinhole camera. Pixel `(0, 0)` is the top-left corner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera<T> {
    pub eye: Vec3<T>,
    pub look_at: Vec3<T>,
    pub up: Vec3<T>,
    /// Vertical field of view in radians.
    pub fov_y: T,
    pub width: u32,
    pub height: u32,
    forward: Vec3<T>,
    right: Vec3<T>,
    true_up: Vec3<T>,
}

impl<T: Real> Camera<T> {
    pub fn new(eye: Vec3<T>, look_at: Vec3<T>, up: Vec3<T>, fov_y: T, width: u32, height: u32) -> Result<Self, CameraError> {
        if !(eye.is_finite() && look_at.is_finite() && up.is_finite() && fov_y.is_finite()) {
            return Err(CameraError::NonFinite);
        }
        if !(fov_y > T::zero() && fov_y < T::PI()) {
            return Err(CameraError::FieldOfView);
        }
        if width == 0 || height == 0 {
            return Err(CameraError::EmptyImage);
        }
        let forward = (look_at - eye).try_normalize().ok_or(CameraError::DegenerateView)?;
        let right = forward.cross(up).try_normalize().ok_or(CameraError::DegenerateUp)?;
        if forward.cross(up.normalize()).length() < T::lit(1e-9) {
            return Err(CameraError::DegenerateUp);
        }
        let true_up = right.cross(forward);
        Ok(Self {
            eye,
            look_at,
            up,
            fov_y,
            width,
            height,
            forward,
            right,
            true_up,
        })
    }

    /// Same as [`Camera::new`] with the field of view in degrees.
    pub fn from_degrees(eye: Vec3<T>, look_at: Vec3<T>, up: Vec3<T>, fov_deg: T, width: u32, height: u32) -> Result<Self, CameraError> {
        Self::new(eye, look_at, up, fov_deg.to_radians(), width, height)
    }

    /// Ray through image position `(x + dx, y + dy)`; `(0.5, 0.5)` is the pixel center.
    pub fn ray(&self, x: u32, y: u32, dx: T, dy: T) -> Ray<T> {
        let w = T::from_index(self.width as u64);
        let h = T::from_index(self.height as u64);
        let two = T::lit(2.0);
        let tan = (self.fov_y / two).tan();
        let u = ((T::from_index(x as u64) + dx) / w * two - T::one()) * tan * (w / h);
        let v = (T::one() - (T::from_index(y as u64) + dy) / h * two) * tan;
        let dir = (self.forward + self.right * u + self.true_up * v).normalize();
        Ray::new(self.eye, dir)
    }

    pub fn pixel_center_ray(&self, x: u32, y: u32) -> Ray<T> {
        let half = T::lit(0.5);
        self.ray(x, y, half, half)
    }

    pub fn forward(&self) -> Vec3<T> {
        self.forward
    }
}
