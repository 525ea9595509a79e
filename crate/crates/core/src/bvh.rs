//! Bounding volume hierarchy over scene triangles (binned SAH build,
//! stack-based traversal).

use crate::ray::Ray;
use crate::scene::Triangle;
use crate::Vector;

const LEAF_SIZE: usize = 4;
const BINS: usize = 12;

#[derive(Clone, Copy, Debug)]
struct Aabb {
    min: Vector,
    max: Vector,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            min: Vector::splat(f64::INFINITY),
            max: Vector::splat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: Vector) {
        self.min = self.min.min_elem(p);
        self.max = self.max.max_elem(p);
    }

    fn merge(&mut self, o: &Aabb) {
        self.min = self.min.min_elem(o.min);
        self.max = self.max.max_elem(o.max);
    }

    fn half_area(&self) -> f64 {
        let d = self.max - self.min;
        if d.x < 0.0 {
            return 0.0;
        }
        d.x * d.y + d.y * d.z + d.z * d.x
    }

    /// Slab test; returns entry distance when the box overlaps `[0, t_max]`.
    #[inline]
    fn hit(&self, origin: Vector, inv_dir: Vector, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for axis in 0..3 {
            let a = (self.min[axis] - origin[axis]) * inv_dir[axis];
            let b = (self.max[axis] - origin[axis]) * inv_dir[axis];
            let (near, far) = if a < b { (a, b) } else { (b, a) };
            // NaN (0 * inf) leaves the bounds untouched.
            t0 = if near > t0 { near } else { t0 };
            t1 = if far < t1 { far } else { t1 };
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    bounds: Aabb,
    /// Leaf: first primitive. Interior: index of the second child (first child follows the node).
    offset: u32,
    /// Primitive count; 0 marks an interior node.
    count: u32,
    axis: u8,
}

/// Precomputed triangle for Möller–Trumbore intersection.
#[derive(Clone, Copy, Debug)]
struct Prim {
    v0: Vector,
    e1: Vector,
    e2: Vector,
    index: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub triangle: u32,
    /// Unnormalized geometric normal `e1 × e2`.
    pub normal: Vector,
}

#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    prims: Vec<Prim>,
}

impl Bvh {
    pub fn build(triangles: &[Triangle]) -> Self {
        let mut prims: Vec<Prim> = triangles
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let [a, b, c] = t.vertices;
                Prim {
                    v0: a,
                    e1: b - a,
                    e2: c - a,
                    index: i as u32,
                }
            })
            .collect();
        let mut nodes = Vec::with_capacity(2 * prims.len().max(1));
        if !prims.is_empty() {
            let n = prims.len();
            build_node(&mut prims, 0, n, &mut nodes);
        }
        Self { nodes, prims }
    }

    pub fn is_empty(&self) -> bool {
        self.prims.is_empty()
    }

    /// Closest hit with `t` in `(t_min, t_max)`.
    pub fn intersect(&self, ray: &Ray<f64>, t_min: f64, t_max: f64) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        let mut closest = t_max;
        self.traverse(ray, t_max, |prim, _| {
            if let Some(t) = intersect_prim(prim, ray, t_min, closest) {
                closest = t;
                best = Some(Hit {
                    t,
                    triangle: prim.index,
                    normal: prim.e1.cross(prim.e2),
                });
            }
            (false, closest)
        });
        best
    }

    /// True if anything lies on the ray within `(t_min, t_max)`.
    pub fn occluded(&self, ray: &Ray<f64>, t_min: f64, t_max: f64) -> bool {
        let mut found = false;
        self.traverse(ray, t_max, |prim, limit| {
            if intersect_prim(prim, ray, t_min, limit).is_some() {
                found = true;
                return (true, limit);
            }
            (false, limit)
        });
        found
    }

    /// Visits leaf primitives front to back. The visitor returns
    /// `(stop, new t_max)`.
    #[inline]
    fn traverse(&self, ray: &Ray<f64>, t_max: f64, mut visit: impl FnMut(&Prim, f64) -> (bool, f64)) {
        if self.nodes.is_empty() {
            return;
        }
        let d = ray.direction;
        let inv = Vector::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
        let neg = [d.x < 0.0, d.y < 0.0, d.z < 0.0];
        let mut limit = t_max;
        let mut stack = [0u32; 64];
        let mut sp = 0usize;
        let mut current = 0u32;
        loop {
            let node = &self.nodes[current as usize];
            if node.bounds.hit(ray.origin, inv, limit).is_some() {
                if node.count > 0 {
                    let start = node.offset as usize;
                    for prim in &self.prims[start..start + node.count as usize] {
                        let (stop, l) = visit(prim, limit);
                        limit = l;
                        if stop {
                            return;
                        }
                    }
                } else {
                    let (first, second) = if neg[node.axis as usize] {
                        (node.offset, current + 1)
                    } else {
                        (current + 1, node.offset)
                    };
                    stack[sp] = second;
                    sp += 1;
                    current = first;
                    continue;
                }
            }
            if sp == 0 {
                return;
            }
            sp -= 1;
            current = stack[sp];
        }
    }
}

#[inline]
fn intersect_prim(p: &Prim, ray: &Ray<f64>, t_min: f64, t_max: f64) -> Option<f64> {
    let pvec = ray.direction.cross(p.e2);
    let det = p.e1.dot(pvec);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = ray.origin - p.v0;
    let u = tvec.dot(pvec) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(p.e1);
    let v = ray.direction.dot(qvec) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = p.e2.dot(qvec) * inv_det;
    (t > t_min && t < t_max).then_some(t)
}

fn prim_bounds(p: &Prim) -> Aabb {
    let mut b = Aabb::empty();
    b.grow(p.v0);
    b.grow(p.v0 + p.e1);
    b.grow(p.v0 + p.e2);
    b
}

fn centroid(p: &Prim) -> Vector {
    p.v0 + (p.e1 + p.e2) / 3.0
}

fn build_node(prims: &mut [Prim], start: usize, end: usize, nodes: &mut Vec<Node>) -> u32 {
    let me = nodes.len() as u32;
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for p in &prims[start..end] {
        bounds.merge(&prim_bounds(p));
        cbounds.grow(centroid(p));
    }
    nodes.push(Node {
        bounds,
        offset: start as u32,
        count: (end - start) as u32,
        axis: 0,
    });
    let count = end - start;
    if count <= LEAF_SIZE {
        return me;
    }

    let extent = cbounds.max - cbounds.min;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    if extent[axis] <= 0.0 {
        return me;
    }

    let bin_of = |p: &Prim| -> usize {
        let rel = (centroid(p)[axis] - cbounds.min[axis]) / extent[axis];
        ((rel * BINS as f64) as usize).min(BINS - 1)
    };
    let mut bin_bounds = [Aabb::empty(); BINS];
    let mut bin_counts = [0usize; BINS];
    for p in &prims[start..end] {
        let b = bin_of(p);
        bin_counts[b] += 1;
        bin_bounds[b].merge(&prim_bounds(p));
    }
    let mut best_cost = f64::INFINITY;
    let mut best_split = 0;
    for split in 1..BINS {
        let (mut lb, mut rb) = (Aabb::empty(), Aabb::empty());
        let (mut lc, mut rc) = (0, 0);
        for b in 0..split {
            lb.merge(&bin_bounds[b]);
            lc += bin_counts[b];
        }
        for b in split..BINS {
            rb.merge(&bin_bounds[b]);
            rc += bin_counts[b];
        }
        if lc == 0 || rc == 0 {
            continue;
        }
        let cost = lb.half_area() * lc as f64 + rb.half_area() * rc as f64;
        if cost < best_cost {
            best_cost = cost;
            best_split = split;
        }
    }

    let leaf_cost = bounds.half_area() * count as f64;
    let mid = if best_split == 0 {
        // All centroids fell into one bin: split by median.
        prims[start..end].sort_by(|a, b| centroid(a)[axis].total_cmp(&centroid(b)[axis]));
        start + count / 2
    } else if best_cost >= leaf_cost && count <= 2 * LEAF_SIZE {
        return me;
    } else {
        let slice = &mut prims[start..end];
        let mut left = 0;
        for i in 0..slice.len() {
            if bin_of(&slice[i]) < best_split {
                slice.swap(i, left);
                left += 1;
            }
        }
        start + left
    };

    build_node(prims, start, mid, nodes);
    let second = build_node(prims, mid, end, nodes);
    let node = &mut nodes[me as usize];
    node.offset = second;
    node.count = 0;
    node.axis = axis as u8;
    me
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn brute(tris: &[Triangle], ray: &Ray<f64>) -> Option<(f64, u32)> {
        let bvh_single: Vec<Prim> = tris
            .iter()
            .enumerate()
            .map(|(i, t)| Prim {
                v0: t.vertices[0],
                e1: t.vertices[1] - t.vertices[0],
                e2: t.vertices[2] - t.vertices[0],
                index: i as u32,
            })
            .collect();
        let mut best: Option<(f64, u32)> = None;
        for p in &bvh_single {
            if let Some(t) = intersect_prim(p, ray, 1e-9, f64::INFINITY) {
                if best.map_or(true, |b| t < b.0) {
                    best = Some((t, p.index));
                }
            }
        }
        best
    }

    #[test]
    fn matches_linear_scan() {
        let mut rng = rand_pcg::Pcg64Mcg::seed_from_u64(3);
        let rv = |rng: &mut rand_pcg::Pcg64Mcg| {
            Vector::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        };
        let tris: Vec<Triangle> = (0..500)
            .map(|_| {
                let c = rv(&mut rng);
                Triangle::new(c, c + rv(&mut rng) * 0.1, c + rv(&mut rng) * 0.1, 0)
            })
            .collect();
        let bvh = Bvh::build(&tris);
        let mut hits = 0;
        for _ in 0..2000 {
            let o = rv(&mut rng) * 2.0;
            let d = (rv(&mut rng) - o * 0.3).normalize();
            let ray = Ray::new(o, d);
            let got = bvh.intersect(&ray, 1e-9, f64::INFINITY).map(|h| (h.t, h.triangle));
            let want = brute(&tris, &ray);
            assert_eq!(got, want);
            assert_eq!(bvh.occluded(&ray, 1e-9, f64::INFINITY), want.is_some());
            hits += want.is_some() as usize;
        }
        assert!(hits > 100);
    }

    #[test]
    fn empty_bvh_never_hits() {
        let bvh = Bvh::build(&[]);
        let ray = Ray::new(Vector::zero(), Vector::new(0.0, 0.0, 1.0));
        assert!(bvh.intersect(&ray, 0.0, f64::INFINITY).is_none());
        assert!(!bvh.occluded(&ray, 0.0, f64::INFINITY));
    }
}
