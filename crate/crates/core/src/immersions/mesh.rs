//! Triangle meshes in ℝ³ and the cotangent Laplace–Beltrami operator.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::model_manifold::WarpingFunction;

use super::{Chart, MAX_INTRINSIC};

type Vec3 = [f64; 3];

fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

/// Faces with area below this (relative to the squared mean edge) are degenerate.
const AREA_EPSILON: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    vertex_areas: Vec<f64>,
    boundary: Vec<bool>,
}

impl TriangleMesh {
    /// Builds the mesh and validates the face and edge invariants.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::InvalidInput("mesh has no faces".into()));
        }
        if let Some(f) = faces.iter().find(|f| f.iter().any(|&i| i >= vertices.len())) {
            return Err(Error::InvalidInput(format!("face {f:?} references a missing vertex")));
        }
        let mean_edge_sq = faces
            .iter()
            .map(|f| {
                let e = sub(&vertices[f[1]], &vertices[f[0]]);
                dot3(&e, &e)
            })
            .sum::<f64>()
            / faces.len() as f64;
        let mut vertex_areas = vec![0.0; vertices.len()];
        for f in &faces {
            let area = face_area(&vertices, f);
            if !(area > AREA_EPSILON * mean_edge_sq) {
                return Err(Error::Degenerate(format!("face {f:?} has area {area:e}")));
            }
            for &v in f {
                vertex_areas[v] += area / 3.0;
            }
        }

        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &faces {
            for k in 0..3 {
                let e = (f[k], f[(k + 1) % 3]);
                if directed.insert(e, 1).is_some() {
                    return Err(Error::Degenerate(format!(
                        "edge {e:?} appears twice with the same orientation"
                    )));
                }
            }
        }
        let mut boundary = vec![false; vertices.len()];
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                boundary[a] = true;
                boundary[b] = true;
            }
        }
        Ok(TriangleMesh { vertices, faces, vertex_areas, boundary })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Barycentric areas: one third of the incident face areas.
    pub fn vertex_areas(&self) -> &[f64] {
        &self.vertex_areas
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(move |&v| !self.boundary[v])
    }

    pub fn total_area(&self) -> f64 {
        self.faces.iter().map(|f| face_area(&self.vertices, f)).sum()
    }

    /// Every undirected edge borders one (boundary) or two (interior) faces.
    pub fn is_edge_manifold(&self) -> bool {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        count.values().all(|&c| c == 1 || c == 2)
    }

    pub fn extrinsic_distance(&self, v: usize) -> f64 {
        norm(&self.vertices[v])
    }

    /// Symmetric cotangent weights `w_ij = (cot α_ij + cot β_ij) / 2`.
    pub fn cotangent_weights(&self) -> HashMap<(usize, usize), f64> {
        let mut w: HashMap<(usize, usize), f64> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (i, j, o) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
                let a = sub(&self.vertices[i], &self.vertices[o]);
                let b = sub(&self.vertices[j], &self.vertices[o]);
                let cot = dot3(&a, &b) / norm(&cross(&a, &b));
                *w.entry((i.min(j), i.max(j))).or_default() += 0.5 * cot;
            }
        }
        w
    }

    /// Pointwise cotangent Laplacian `(Δ f)(v) = A_v⁻¹ Σ_j w_vj (f_j - f_v)`
    /// of a scalar vertex field.
    pub fn laplacian(&self, field: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.vertices.len()];
        for ((i, j), w) in self.cotangent_weights() {
            let d = field[j] - field[i];
            acc[i] += w * d;
            acc[j] -= w * d;
        }
        acc.iter().zip(&self.vertex_areas).map(|(a, area)| a / area).collect()
    }

    fn coordinate_laplacian(&self) -> Vec<Vec3> {
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|k| self.laplacian(&self.vertices.iter().map(|x| x[k]).collect::<Vec<_>>()))
            .collect();
        (0..self.vertices.len()).map(|v| [cols[0][v], cols[1][v], cols[2][v]]).collect()
    }

    fn require_interior(&self) -> Result<()> {
        if self.interior_vertices().next().is_none() {
            return Err(Error::InvalidInput("mesh has no interior vertices".into()));
        }
        Ok(())
    }

    /// `max_v ‖Δξ(v)‖` over interior vertices. For an immersion the discrete
    /// Laplacian of the coordinates approximates the mean-curvature vector, so
    /// this tends to zero under refinement exactly when the surface is minimal
    /// (a round sphere of radius R gives `2/R`).
    pub fn minimality_residual(&self) -> Result<f64> {
        self.require_interior()?;
        let lap = self.coordinate_laplacian();
        Ok(self.interior_vertices().map(|v| norm(&lap[v])).fold(0.0, f64::max))
    }

    /// `max_v |Δ(φ∘t)(v) - m h'(t(v))|` over interior vertices with `t > 0`.
    /// On a minimal surface in ℝⁿ with `h(s) = s` the smooth identity is
    /// `Δ ‖ξ‖²/2 = m`.
    pub fn laplacian_comparison_residual(&self, warping: &WarpingFunction) -> Result<f64> {
        self.require_interior()?;
        let m = 2.0;
        let phi = self
            .vertices
            .iter()
            .map(|x| warping.phi(norm(x)))
            .collect::<Result<Vec<_>>>()?;
        let lap = self.laplacian(&phi);
        let mut worst: f64 = 0.0;
        for v in self.interior_vertices() {
            let t = self.extrinsic_distance(v);
            if t <= 1e-12 {
                continue;
            }
            worst = worst.max((lap[v] - m * warping.dh(t)?).abs());
        }
        Ok(worst)
    }

    /// Structured triangulation of a two-dimensional chart in ℝ³.
    pub fn from_chart(chart: &Chart, resolution: usize) -> Result<Self> {
        triangulate(chart, resolution)
    }
}

fn face_area(vertices: &[Vec3], f: &[usize; 3]) -> f64 {
    let a = sub(&vertices[f[1]], &vertices[f[0]]);
    let b = sub(&vertices[f[2]], &vertices[f[0]]);
    0.5 * norm(&cross(&a, &b))
}

/// Maps a `resolution x resolution` grid over the chart's parameter box through
/// the immersion, two triangles per cell, periodic axes stitched.
pub fn triangulate(chart: &Chart, resolution: usize) -> Result<TriangleMesh> {
    if chart.intrinsic_dim() != 2 || chart.ambient_dim() != 3 {
        return Err(Error::NotApplicable(
            "triangle meshes are built for surfaces in ℝ³ only".into(),
        ));
    }
    if resolution == 0 {
        return Err(Error::InvalidInput("resolution must be positive".into()));
    }
    let d = chart.domain();
    let n = resolution;
    let counts: Vec<usize> = (0..2).map(|a| if d.periodic[a] { n } else { n + 1 }).collect();
    let index = |i: usize, j: usize| (i % counts[0]) + counts[0] * (j % counts[1]);
    let mut params = Vec::with_capacity(counts[0] * counts[1]);
    let mut vertices = Vec::with_capacity(counts[0] * counts[1]);
    for j in 0..counts[1] {
        for i in 0..counts[0] {
            let mut p = [0.0; MAX_INTRINSIC];
            p[0] = d.lo[0] + (d.hi[0] - d.lo[0]) * i as f64 / n as f64;
            p[1] = d.lo[1] + (d.hi[1] - d.lo[1]) * j as f64 / n as f64;
            let x = chart.position(&p);
            params.push(p);
            vertices.push([x[0], x[1], x[2]]);
        }
    }
    let mut faces = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, e) = (index(i, j), index(i + 1, j), index(i + 1, j + 1), index(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, e]);
        }
    }
    TriangleMesh::new(vertices, faces).map_err(|err| match err {
        Error::Degenerate(msg) => Error::Degenerate(format!(
            "{msg} after mapping the parameter grid (domain {:?}..{:?})",
            &d.lo[..2],
            &d.hi[..2]
        )),
        other => other,
    })
}

/// Round sphere of the given radius from a subdivided icosahedron; the
/// non-minimal control surface.
pub fn icosphere(radius: f64, subdivisions: usize) -> Result<TriangleMesh> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput("sphere radius must be positive".into()));
    }
    let g = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = vec![
        [-1.0, g, 0.0],
        [1.0, g, 0.0],
        [-1.0, -g, 0.0],
        [1.0, -g, 0.0],
        [0.0, -1.0, g],
        [0.0, 1.0, g],
        [0.0, -1.0, -g],
        [0.0, 1.0, -g],
        [g, 0.0, -1.0],
        [g, 0.0, 1.0],
        [-g, 0.0, -1.0],
        [-g, 0.0, 1.0],
    ];
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
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]);
                vertices.len() - 1
            })
        };
        for f in &faces {
            let ab = mid(f[0], f[1], &mut vertices);
            let bc = mid(f[1], f[2], &mut vertices);
            let ca = mid(f[2], f[0], &mut vertices);
            next.extend_from_slice(&[[f[0], ab, ca], [f[1], bc, ab], [f[2], ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    for v in vertices.iter_mut() {
        let s = radius / norm(v);
        for x in v.iter_mut() {
            *x *= s;
        }
    }
    TriangleMesh::new(vertices, faces)
}

/// Writes `v x y z` and 1-based `f i j k` lines.
pub fn write_obj<W: Write>(mesh: &TriangleMesh, mut out: W) -> std::io::Result<()> {
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v[0], v[1], v[2])?;
    }
    for f in &mesh.faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

/// Reads the subset of the OBJ format produced by [`write_obj`]; face entries
/// of the form `i/j/k` use the vertex index only.
pub fn read_obj<R: BufRead>(input: R) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::InvalidInput(e.to_string()))?;
        let mut it = line.split_whitespace();
        let bad = || Error::InvalidInput(format!("malformed mesh line {}: {line}", lineno + 1));
        match it.next() {
            Some("v") => {
                let xs: Vec<f64> = it
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad())?;
                if xs.len() != 3 {
                    return Err(bad());
                }
                vertices.push([xs[0], xs[1], xs[2]]);
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|s| s.split('/').next().unwrap_or("").parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad())?;
                if idx.len() != 3 || idx.contains(&0) {
                    return Err(bad());
                }
                faces.push([idx[0] - 1, idx[1] - 1, idx[2] - 1]);
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}
