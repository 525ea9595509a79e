use crate::num::Real;
use crate::ray::Ray;
use crate::vector::Vec3;

/// Where a view ray crosses the bounding sphere, as unit directions from its center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereHits<T> {
    /// Entry point `h_o`.
    pub front: Vec3<T>,
    /// Exit point `h_d`.
    pub back: Vec3<T>,
    /// The ray starts inside the sphere; `front` is then the eye direction
    /// from the center, projected onto the sphere.
    pub eye_inside: bool,
}

/// Intersects `ray` with the sphere of `radius` about `center`.
///
/// Works in unit-sphere coordinates. Misses, tangential rays (discriminant
/// within `1e-12` of zero) and spheres entirely behind the ray give `None`.
pub fn intersect_sphere<T: Real>(ray: &Ray<T>, radius: T, center: Vec3<T>) -> Option<SphereHits<T>> {
    let o = (ray.origin - center) / radius;
    let d = ray.direction;
    let b = o.dot(d);
    let c = o.length_squared() - T::one();
    let disc = b * b - c;
    if disc <= T::lit(1e-12) {
        return None;
    }
    let root = disc.sqrt();
    let (t0, t1) = (-b - root, -b + root);
    if t1 <= T::zero() {
        return None;
    }
    let back = (o + d * t1).normalize();
    if t0 > T::zero() {
        let front = (o + d * t0).normalize();
        return Some(SphereHits {
            front,
            back,
            eye_inside: false,
        });
    }
    // Inside the sphere. At the exact center fall back to the backward hit.
    let front = o.try_normalize().unwrap_or_else(|| (o + d * t0).normalize());
    Some(SphereHits {
        front,
        back,
        eye_inside: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vector;

    fn quadratic_oracle(o: Vector, d: Vector, r: f64, c: Vector) -> Option<(f64, f64)> {
        // a t² + b t + c = 0 with unnormalized coefficients.
        let oc = o - c;
        let qa = d.dot(d);
        let qb = 2.0 * oc.dot(d);
        let qc = oc.dot(oc) - r * r;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return None;
        }
        Some(((-qb - disc.sqrt()) / (2.0 * qa), (-qb + disc.sqrt()) / (2.0 * qa)))
    }

    #[test]
    fn central_ray_gives_antipodes() {
        let c = Vector::new(1.0, 1.0, 1.0);
        let ray = Ray::new(Vector::new(1.0, 1.0, -4.0), Vector::new(0.0, 0.0, 1.0));
        let h = intersect_sphere(&ray, 2.0, c).unwrap();
        assert_eq!(h.front, Vector::new(0.0, 0.0, -1.0));
        assert_eq!(h.back, Vector::new(0.0, 0.0, 1.0));
        assert!(!h.eye_inside);
    }

    #[test]
    fn miss_and_behind() {
        let ray = Ray::new(Vector::new(2.0, 0.0, -4.0), Vector::new(0.0, 0.0, 1.0));
        assert!(intersect_sphere(&ray, 1.5, Vector::zero()).is_none());
        let away = Ray::new(Vector::new(0.0, 0.0, -4.0), Vector::new(0.0, 0.0, -1.0));
        assert!(intersect_sphere(&away, 1.0, Vector::zero()).is_none());
    }

    #[test]
    fn tangent_ray_is_discarded() {
        let ray = Ray::new(Vector::new(1.0, 0.0, -4.0), Vector::new(0.0, 0.0, 1.0));
        assert!(intersect_sphere(&ray, 1.0, Vector::zero()).is_none());
    }

    #[test]
    fn agrees_with_quadratic_formula() {
        let c = Vector::new(0.3, -0.2, 0.1);
        let r = 1.7;
        let o = Vector::new(-3.0, 1.0, 2.0);
        for k in 0..50 {
            let target = Vector::new((k as f64 * 0.37).sin(), (k as f64 * 0.91).cos(), (k as f64 * 0.13).sin()) * 0.9 + c;
            let d = (target - o).normalize();
            let (t0, t1) = quadratic_oracle(o, d, r, c).unwrap();
            let h = intersect_sphere(&Ray::new(o, d), r, c).unwrap();
            assert!((h.front - ((o + d * t0 - c) / r)).length() < 1e-12);
            assert!((h.back - ((o + d * t1 - c) / r)).length() < 1e-12);
        }
    }

    #[test]
    fn eye_inside() {
        let c = Vector::zero();
        let eye = Vector::new(0.0, 0.5, 0.0);
        let d = Vector::new(1.0, 0.0, 0.0);
        let h = intersect_sphere(&Ray::new(eye, d), 1.0, c).unwrap();
        assert!(h.eye_inside);
        assert_eq!(h.front, Vector::new(0.0, 1.0, 0.0));
        let (_, t1) = quadratic_oracle(eye, d, 1.0, c).unwrap();
        assert!((h.back - (eye + d * t1)).length() < 1e-12);
        // Exactly at the center: the backward crossing.
        let h = intersect_sphere(&Ray::new(c, d), 1.0, c).unwrap();
        assert_eq!(h.front, -d);
    }
}
