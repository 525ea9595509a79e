//! Triangle scenes: geometry, Lambertian/emissive materials and a constant
//! environment.
//!
//! Geometry is read from a wavefront-style text file (`v`, `f`, `usemtl <index>`)
//! and materials from a line-oriented sidecar:
//!
//! ```text
//! # comment
//! material 0 albedo 0.8 0.8 0.8 emission 0 0 0
//! material 1 albedo 0 0 0 emission 10 10 10
//! environment 0.1 0.1 0.1
//! ```
//!
//! Faces with more than three vertices are fan-triangulated. Faces before the
//! first `usemtl` use material 0.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::Vector;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file} line {line}: {message}")]
    Parse {
        file: &'static str,
        line: usize,
        message: String,
    },
    #[error("triangle {triangle} references missing material {material}")]
    MissingMaterial { triangle: usize, material: u32 },
    #[error("triangle {triangle} has a non-finite vertex")]
    NonFiniteVertex { triangle: usize },
    #[error("material {material}: {message}")]
    InvalidMaterial { material: usize, message: String },
    #[error("environment radiance must be finite and non-negative")]
    InvalidEnvironment,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    /// Diffuse reflectance, linear RGB in [0, 1].
    pub albedo: Vector,
    /// Emitted radiance, linear RGB, two-sided.
    pub emission: Vector,
}

impl Material {
    pub fn diffuse(albedo: Vector) -> Self {
        Self {
            albedo,
            emission: Vector::zero(),
        }
    }

    pub fn emitter(emission: Vector) -> Self {
        Self {
            albedo: Vector::zero(),
            emission,
        }
    }

    pub fn is_emissive(&self) -> bool {
        self.emission.max_component() > 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle {
    pub vertices: [Vector; 3],
    pub material: u32,
}

impl Triangle {
    pub fn new(a: Vector, b: Vector, c: Vector, material: u32) -> Self {
        Self {
            vertices: [a, b, c],
            material,
        }
    }

    pub fn area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        0.5 * (b - a).cross(c - a).length()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scene {
    pub triangles: Vec<Triangle>,
    pub materials: Vec<Material>,
    /// Radiance returned by rays that leave the scene.
    pub environment: Vector,
}

impl Scene {
    /// A scene without geometry that only returns `environment`.
    pub fn empty(environment: Vector) -> Self {
        Self {
            triangles: Vec::new(),
            materials: Vec::new(),
            environment,
        }
    }

    /// Loads `path` and the material table next to it (same stem, `.mat` extension).
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SceneError> {
        let path = path.as_ref();
        Self::load_with_materials(path, &material_path(path))
    }

    pub fn load_with_materials(geometry: &Path, materials: &Path) -> Result<Self, SceneError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|source| SceneError::Io {
                path: p.to_path_buf(),
                source,
            })
        };
        Self::parse(&read(geometry)?, &read(materials)?)
    }

    pub fn parse(geometry: &str, materials: &str) -> Result<Self, SceneError> {
        let (materials, environment) = parse_materials(materials)?;
        let triangles = parse_geometry(geometry)?;
        let scene = Self {
            triangles,
            materials,
            environment,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if !self.environment.is_finite() || self.environment.min_elem(Vector::zero()) != Vector::zero() {
            return Err(SceneError::InvalidEnvironment);
        }
        for (idx, m) in self.materials.iter().enumerate() {
            let albedo_ok = m.albedo.is_finite()
                && [m.albedo.x, m.albedo.y, m.albedo.z].iter().all(|c| (0.0..=1.0).contains(c));
            if !albedo_ok {
                return Err(SceneError::InvalidMaterial {
                    material: idx,
                    message: "albedo must lie in [0, 1]".into(),
                });
            }
            let emission_ok =
                m.emission.is_finite() && [m.emission.x, m.emission.y, m.emission.z].iter().all(|c| *c >= 0.0);
            if !emission_ok {
                return Err(SceneError::InvalidMaterial {
                    material: idx,
                    message: "emission must be finite and non-negative".into(),
                });
            }
        }
        for (idx, t) in self.triangles.iter().enumerate() {
            if !t.vertices.iter().all(|v| v.is_finite()) {
                return Err(SceneError::NonFiniteVertex { triangle: idx });
            }
            if t.material as usize >= self.materials.len() {
                return Err(SceneError::MissingMaterial {
                    triangle: idx,
                    material: t.material,
                });
            }
        }
        Ok(())
    }

    /// True if a render can be anything but black.
    pub fn has_light(&self) -> bool {
        self.environment.max_component() > 0.0
            || self
                .triangles
                .iter()
                .any(|t| self.materials[t.material as usize].is_emissive())
    }

    /// Largest distance from `center` to any vertex (0 for an empty scene).
    pub fn max_distance_from(&self, center: Vector) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| t.vertices.iter())
            .map(|v| (*v - center).length())
            .fold(0.0, f64::max)
    }

    pub fn material(&self, triangle: &Triangle) -> &Material {
        &self.materials[triangle.material as usize]
    }

    /// Geometry as wavefront-style text (one vertex triple per triangle).
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        let mut current = None;
        for (idx, t) in self.triangles.iter().enumerate() {
            if current != Some(t.material) {
                let _ = writeln!(out, "usemtl {}", t.material);
                current = Some(t.material);
            }
            for v in &t.vertices {
                let _ = writeln!(out, "v {:?} {:?} {:?}", v.x, v.y, v.z);
            }
            let base = 3 * idx + 1;
            let _ = writeln!(out, "f {} {} {}", base, base + 1, base + 2);
        }
        out
    }

    /// Material table in the sidecar format.
    pub fn to_material_table(&self) -> String {
        let mut out = String::new();
        for (idx, m) in self.materials.iter().enumerate() {
            let _ = writeln!(
                out,
                "material {idx} albedo {:?} {:?} {:?} emission {:?} {:?} {:?}",
                m.albedo.x, m.albedo.y, m.albedo.z, m.emission.x, m.emission.y, m.emission.z
            );
        }
        let e = self.environment;
        let _ = writeln!(out, "environment {:?} {:?} {:?}", e.x, e.y, e.z);
        out
    }

    /// Writes `path` and its `.mat` sidecar.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SceneError> {
        let path = path.as_ref();
        let write = |p: &Path, text: String| {
            std::fs::write(p, text).map_err(|source| SceneError::Io {
                path: p.to_path_buf(),
                source,
            })
        };
        write(path, self.to_obj())?;
        write(&material_path(path), self.to_material_table())
    }
}

/// Sidecar material table location for a geometry file.
pub fn material_path(geometry: &Path) -> PathBuf {
    geometry.with_extension("mat")
}

fn parse_error(file: &'static str, line: usize, message: impl Into<String>) -> SceneError {
    SceneError::Parse {
        file,
        line,
        message: message.into(),
    }
}

fn parse_floats<'a>(
    file: &'static str,
    line: usize,
    tokens: &mut impl Iterator<Item = &'a str>,
    what: &str,
) -> Result<Vector, SceneError> {
    let mut v = [0.0; 3];
    for c in &mut v {
        let tok = tokens
            .next()
            .ok_or_else(|| parse_error(file, line, format!("{what}: expected 3 numbers")))?;
        *c = tok
            .parse()
            .map_err(|_| parse_error(file, line, format!("{what}: invalid number `{tok}`")))?;
    }
    Ok(Vector::from(v))
}

fn parse_materials(text: &str) -> Result<(Vec<Material>, Vector), SceneError> {
    const FILE: &str = "materials";
    let mut slots: Vec<Option<Material>> = Vec::new();
    let mut environment = Vector::zero();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("material") => {
                let idx: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_error(FILE, line, "material: expected an index"))?;
                if tokens.next() != Some("albedo") {
                    return Err(parse_error(FILE, line, "material: expected `albedo`"));
                }
                let albedo = parse_floats(FILE, line, &mut tokens, "albedo")?;
                if tokens.next() != Some("emission") {
                    return Err(parse_error(FILE, line, "material: expected `emission`"));
                }
                let emission = parse_floats(FILE, line, &mut tokens, "emission")?;
                if tokens.next().is_some() {
                    return Err(parse_error(FILE, line, "material: trailing tokens"));
                }
                if slots.len() <= idx {
                    slots.resize(idx + 1, None);
                }
                if slots[idx].is_some() {
                    return Err(parse_error(FILE, line, format!("material {idx} defined twice")));
                }
                slots[idx] = Some(Material { albedo, emission });
            }
            Some("environment") => {
                environment = parse_floats(FILE, line, &mut tokens, "environment")?;
            }
            Some(other) => return Err(parse_error(FILE, line, format!("unknown directive `{other}`"))),
            None => {}
        }
    }
    let materials = slots
        .into_iter()
        .enumerate()
        .map(|(idx, m)| {
            m.ok_or_else(|| SceneError::InvalidMaterial {
                material: idx,
                message: "index skipped in material table".into(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((materials, environment))
}

fn parse_geometry(text: &str) -> Result<Vec<Triangle>, SceneError> {
    const FILE: &str = "geometry";
    let mut vertices: Vec<Vector> = Vec::new();
    let mut triangles = Vec::new();
    let mut material = 0u32;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => vertices.push(parse_floats(FILE, line, &mut tokens, "vertex")?),
            Some("f") => {
                let mut idx = Vec::with_capacity(4);
                for tok in tokens {
                    let first = tok.split('/').next().unwrap_or("");
                    let raw: i64 = first
                        .parse()
                        .map_err(|_| parse_error(FILE, line, format!("invalid face index `{tok}`")))?;
                    let resolved = match raw {
                        0 => None,
                        r if r > 0 => Some(r - 1),
                        r => Some(vertices.len() as i64 + r),
                    };
                    match resolved {
                        Some(i) if (0..vertices.len() as i64).contains(&i) => idx.push(i as usize),
                        _ => return Err(parse_error(FILE, line, format!("face index `{tok}` out of range"))),
                    }
                }
                if idx.len() < 3 {
                    return Err(parse_error(FILE, line, "face needs at least 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push(Triangle::new(
                        vertices[idx[0]],
                        vertices[idx[k]],
                        vertices[idx[k + 1]],
                        material,
                    ));
                }
            }
            Some("usemtl") => {
                material = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_error(FILE, line, "usemtl: expected a material index"))?;
            }
            // Normals, texture coordinates, groups and the like carry nothing we use.
            Some(_) | None => {}
        }
    }
    Ok(triangles)
}
