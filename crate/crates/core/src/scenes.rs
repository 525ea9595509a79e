//! Procedural test scenes.

use std::collections::HashMap;

use crate::scene::{Material, Scene, Triangle};
use crate::Vector;

/// Geodesic sphere from a subdivided icosahedron (`20 · 4^subdivisions` faces).
pub fn icosphere(center: Vector, radius: f64, subdivisions: u32, material: u32) -> Vec<Triangle> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vector::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vector>| {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    faces
        .iter()
        .map(|f| {
            let p = |i: usize| center + verts[i] * radius;
            Triangle::new(p(f[0]), p(f[1]), p(f[2]), material)
        })
        .collect()
}

/// Axis-aligned box as 12 triangles.
pub fn cuboid(min: Vector, max: Vector, material: u32) -> Vec<Triangle> {
    let c = |x: bool, y: bool, z: bool| {
        Vector::new(
            if x { max.x } else { min.x },
            if y { max.y } else { min.y },
            if z { max.z } else { min.z },
        )
    };
    let quads = [
        [c(false, false, false), c(true, false, false), c(true, true, false), c(false, true, false)],
        [c(false, false, true), c(false, true, true), c(true, true, true), c(true, false, true)],
        [c(false, false, false), c(false, false, true), c(true, false, true), c(true, false, false)],
        [c(false, true, false), c(true, true, false), c(true, true, true), c(false, true, true)],
        [c(false, false, false), c(false, true, false), c(false, true, true), c(false, false, true)],
        [c(true, false, false), c(true, false, true), c(true, true, true), c(true, true, false)],
    ];
    quads.iter().flat_map(|q| quad(*q, material)).collect()
}

/// Planar quad as two triangles.
pub fn quad(corners: [Vector; 4], material: u32) -> [Triangle; 2] {
    let [a, b, c, d] = corners;
    [Triangle::new(a, b, c, material), Triangle::new(a, c, d, material)]
}

/// Desk-scale test scene inside the unit sphere, z up: a slab, a sphere and a
/// block under a small area light, with a dim sky.
pub fn desk() -> Scene {
    let mut triangles = cuboid(Vector::new(-0.55, -0.4, -0.3), Vector::new(0.55, 0.4, -0.25), 0);
    triangles.extend(icosphere(Vector::new(-0.15, 0.0, -0.03), 0.22, 3, 1));
    triangles.extend(cuboid(Vector::new(0.12, -0.05, -0.25), Vector::new(0.38, 0.2, 0.0), 2));
    let s = 0.15;
    let h = 0.6;
    triangles.extend(quad(
        [
            Vector::new(-s, -s, h),
            Vector::new(s, -s, h),
            Vector::new(s, s, h),
            Vector::new(-s, s, h),
        ],
        3,
    ));
    Scene {
        triangles,
        materials: vec![
            Material::diffuse(Vector::new(0.6, 0.5, 0.4)),
            Material::diffuse(Vector::new(0.7, 0.3, 0.25)),
            Material::diffuse(Vector::new(0.3, 0.5, 0.7)),
            Material::emitter(Vector::new(14.0, 13.0, 11.0)),
        ],
        environment: Vector::new(0.2, 0.22, 0.28),
    }
}

/// Generalized furnace: every surface has albedo `albedo` and emission
/// `emission`, and the environment radiates `emission / (1 - albedo)`, the
/// equilibrium radiance of such an enclosure. Radiance is then that value
/// along every ray, whatever the geometry; the open box makes paths bounce
/// several times before leaving.
pub fn furnace(albedo: f64, emission: f64) -> Scene {
    let mut triangles = icosphere(Vector::new(0.0, 0.0, 0.35), 0.25, 2, 0);
    // Open-top box: floor and four walls.
    let (lo, hi) = (-0.5, 0.5);
    let (zb, zt) = (-0.6, 0.0);
    let p = Vector::new;
    triangles.extend(quad([p(lo, lo, zb), p(hi, lo, zb), p(hi, hi, zb), p(lo, hi, zb)], 0));
    triangles.extend(quad([p(lo, lo, zb), p(lo, lo, zt), p(hi, lo, zt), p(hi, lo, zb)], 0));
    triangles.extend(quad([p(lo, hi, zb), p(hi, hi, zb), p(hi, hi, zt), p(lo, hi, zt)], 0));
    triangles.extend(quad([p(lo, lo, zb), p(lo, hi, zb), p(lo, hi, zt), p(lo, lo, zt)], 0));
    triangles.extend(quad([p(hi, lo, zb), p(hi, lo, zt), p(hi, hi, zt), p(hi, hi, zb)], 0));
    Scene {
        triangles,
        materials: vec![Material {
            albedo: Vector::splat(albedo),
            emission: Vector::splat(emission),
        }],
        environment: Vector::splat(emission / (1.0 - albedo)),
    }
}
