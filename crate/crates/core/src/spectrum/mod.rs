//! Discrete Dirichlet eigenvalues of the Laplace–Beltrami operator on
//! extrinsic balls, used as an independent oracle for the growth bounds.
//!
//! Chart path: linear elements on the Kuhn grid clipped to `Ω_r`, with the
//! pulled-back metric. The clipped mesh is conforming: crossing nodes are
//! shared through their grid edge and every quadrilateral face is split by the
//! same rule on both sides. Crossing nodes sit on `∂Ω_r` and carry the
//! Dirichlet condition. Mesh path: cotangent stiffness with barycentric lumped
//! mass, nodes with `t ≥ r` eliminated.
//!
//! The oracle bounds `inf σ(M)`, which is at most `inf σ_ess(M)`, so every
//! "oracle ≤ bound" comparison stays sound.

mod sparse;

pub use sparse::{reverse_cuthill_mckee, CsrMatrix, EnvelopeCholesky};

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::immersions::{invert_small, Chart, Param, SurfaceId, TriangleMesh, MAX_INTRINSIC};
use crate::quadrature::{clip_pattern, crossing, lerp, rule, simplex_volume, Label, SimplexGrid};

pub const MIN_RESOLUTION: usize = 32;
pub const MIN_INTERIOR_NODES: usize = 10;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 10_000;
/// Crossings closer than this fraction of an edge to a grid node are moved
/// onto that node, which keeps slivers out of the clipped mesh.
const SNAP: f64 = 0.05;
/// Width of the subspace iterated alongside the lowest mode.
const BLOCK: usize = 4;

/// Stiffness and mass on the retained (interior) nodes.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// Retained unknown `k` is node `interior_index[k]` of the full node set.
    pub interior_index: Vec<usize>,
    pub r: f64,
    pub resolution: usize,
    /// Stiffness before elimination, for the constant-null-space check.
    pub full_stiffness: CsrMatrix,
}

impl DiscreteOperator {
    pub fn len(&self) -> usize {
        self.interior_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior_index.is_empty()
    }

    /// `max_i |Σ_j K_ij| / max |K_ij|` over the full stiffness.
    pub fn row_sum_defect(&self) -> f64 {
        let scale = self.full_stiffness.max_abs().max(f64::MIN_POSITIVE);
        self.full_stiffness.row_sums().iter().fold(0.0, |a: f64, s| a.max(s.abs())) / scale
    }

    pub fn asymmetry(&self) -> f64 {
        self.stiffness.asymmetry().max(self.mass.asymmetry())
    }

    /// `xᵀKx / xᵀMx`.
    pub fn rayleigh(&self, x: &[f64]) -> f64 {
        dot(x, &self.stiffness.mul_vec(x)) / dot(x, &self.mass.mul_vec(x))
    }

    fn checked(self) -> Result<Self> {
        if self.len() < MIN_INTERIOR_NODES {
            return Err(Error::Degenerate(format!(
                "only {} interior nodes in the ball of radius {}; refine the grid",
                self.len(),
                self.r
            )));
        }
        Ok(self)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Element matrices of a linear simplex with the chart metric, by quadrature.
fn element_matrices(chart: &Chart, m: usize, v: &[Param]) -> Option<(Vec<f64>, Vec<f64>)> {
    let vol = simplex_volume(m, v).abs();
    if !(vol > 0.0) {
        return None;
    }
    // J = [v1 - v0, ..., vm - v0]; ∇λ_k = J⁻ᵀ e_k for k ≥ 1
    let mut jac = [[0.0; MAX_INTRINSIC]; MAX_INTRINSIC];
    for (k, col) in (1..=m).enumerate() {
        for a in 0..m {
            jac[a][k] = v[col][a] - v[0][a];
        }
    }
    let mut jt = [[0.0; MAX_INTRINSIC]; MAX_INTRINSIC];
    for a in 0..m {
        for b in 0..m {
            jt[a][b] = jac[b][a];
        }
    }
    let (_, jt_inv) = invert_small_signed(&jt, m)?;
    let mut grads = vec![[0.0; MAX_INTRINSIC]; m + 1];
    for k in 1..=m {
        for a in 0..m {
            grads[k][a] = jt_inv[a][k - 1];
        }
    }
    for a in 0..m {
        grads[0][a] = -(1..=m).map(|k| grads[k][a]).sum::<f64>();
    }
    let nv = m + 1;
    let mut stiff = vec![0.0; nv * nv];
    let mut mass = vec![0.0; nv * nv];
    for (bary, w) in rule(m) {
        let mut p = [0.0; MAX_INTRINSIC];
        for (k, &l) in bary.iter().enumerate() {
            for a in 0..m {
                p[a] += l * v[k][a];
            }
        }
        let frame = chart.frame(&p);
        let (det, ginv) = frame.metric_inverse()?;
        let wt = w * vol * det.sqrt();
        for i in 0..nv {
            for j in 0..nv {
                let mut s = 0.0;
                for a in 0..m {
                    for b in 0..m {
                        s += grads[i][a] * ginv[a][b] * grads[j][b];
                    }
                }
                stiff[i * nv + j] += wt * s;
                mass[i * nv + j] += wt * bary[i] * bary[j];
            }
        }
    }
    Some((stiff, mass))
}

/// Inverse of a possibly non-SPD small matrix (the Jacobian may have either sign).
fn invert_small_signed(
    a: &[[f64; MAX_INTRINSIC]; MAX_INTRINSIC],
    m: usize,
) -> Option<(f64, [[f64; MAX_INTRINSIC]; MAX_INTRINSIC])> {
    let mut neg = *a;
    let (det, inv) = match invert_small(a, m) {
        Some(x) => x,
        None => {
            // flip one row to make the determinant positive, then undo
            for x in neg[0].iter_mut() {
                *x = -*x;
            }
            let (d, mut inv) = invert_small(&neg, m)?;
            for row in inv.iter_mut() {
                row[0] = -row[0];
            }
            (-d, inv)
        }
    };
    Some((det, inv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum NodeKey {
    Grid(usize),
    Crossing(usize),
}

/// Linear elements on `Ω_r` of a chart with `resolution` cells per axis.
pub fn assemble_chart(chart: &Chart, r: f64, resolution: usize) -> Result<DiscreteOperator> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::InvalidInput(format!(
            "spectrum resolution must be >= {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    chart.require_covered(r)?;
    chart.require_nonempty(r)?;
    let grid = SimplexGrid::new(chart, resolution)?;
    let m = grid.m;
    let node_t: Vec<f64> = (0..grid.node_count())
        .into_par_iter()
        .map(|id| chart.extrinsic_distance(&grid.node_param(id)))
        .collect();
    let touching: Vec<usize> = (0..grid.simplex_count())
        .into_par_iter()
        .filter(|&s| {
            let (ids, _) = grid.simplex(s);
            ids[..=m].iter().any(|&i| node_t[i] < r)
        })
        .collect();

    // crossing fraction per cut edge, measured from the smaller node id
    let mut cut_edges: Vec<(usize, usize, Param, Param)> = Vec::new();
    for &s in &touching {
        let (ids, params) = grid.simplex(s);
        for i in 0..=m {
            for j in 0..=m {
                if ids[i] < ids[j] && (node_t[ids[i]] < r) != (node_t[ids[j]] < r) {
                    cut_edges.push((ids[i], ids[j], params[i], params[j]));
                }
            }
        }
    }
    cut_edges.sort_by_key(|e| (e.0, e.1));
    cut_edges.dedup_by_key(|e| (e.0, e.1));
    let fractions: Vec<f64> = cut_edges
        .par_iter()
        .map(|(a, _, pa, pb)| {
            if node_t[*a] < r {
                crossing(chart, pa, pb, r)
            } else {
                1.0 - crossing(chart, pb, pa, r)
            }
        })
        .collect();
    let edge_index: HashMap<(usize, usize), (usize, f64)> = cut_edges
        .iter()
        .zip(&fractions)
        .enumerate()
        .map(|(k, (e, &s))| ((e.0, e.1), (k, s)))
        .collect();

    let elements: Vec<(Vec<NodeKey>, Vec<f64>, Vec<f64>)> = touching
        .par_iter()
        .flat_map_iter(|&s| {
            let (ids, params) = grid.simplex(s);
            let inside: Vec<bool> = (0..=m).map(|k| node_t[ids[k]] < r).collect();
            let edge_of = |i: usize, j: usize| {
                let (a, b) = (ids[i].min(ids[j]), ids[i].max(ids[j]));
                edge_index[&(a, b)]
            };
            let key = |l: Label| match l {
                Label::Vertex(i) => 2 * ids[i] as u64,
                Label::Cross(i, j) => 2 * edge_of(i, j).0 as u64 + 1,
            };
            let resolve = |l: Label| -> (NodeKey, Param) {
                match l {
                    Label::Vertex(i) => (NodeKey::Grid(ids[i]), params[i]),
                    Label::Cross(i, j) => {
                        let (k, s_lo) = edge_of(i, j);
                        let s = if ids[i] < ids[j] { s_lo } else { 1.0 - s_lo };
                        if s < SNAP {
                            (NodeKey::Grid(ids[i]), params[i])
                        } else if s > 1.0 - SNAP {
                            (NodeKey::Grid(ids[j]), params[j])
                        } else {
                            (NodeKey::Crossing(k), lerp(&params[i], &params[j], s))
                        }
                    }
                }
            };
            let mut out = Vec::new();
            for piece in clip_pattern(&inside, &key) {
                let nodes: Vec<(NodeKey, Param)> = piece.iter().map(|&l| resolve(l)).collect();
                let mut keys: Vec<NodeKey> = nodes.iter().map(|n| n.0).collect();
                keys.sort();
                keys.dedup();
                if keys.len() != m + 1 {
                    continue;
                }
                let verts: Vec<Param> = nodes.iter().map(|n| n.1).collect();
                if let Some((k, mm)) = element_matrices(chart, m, &verts) {
                    out.push((nodes.iter().map(|n| n.0).collect(), k, mm));
                }
            }
            out
        })
        .collect();

    // Dirichlet nodes: crossing nodes and grid nodes with t ≥ r or absorbing a crossing
    let mut all_keys: Vec<NodeKey> = elements.iter().flat_map(|e| e.0.iter().copied()).collect();
    all_keys.sort();
    all_keys.dedup();
    let index: HashMap<NodeKey, usize> = all_keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut boundary = vec![false; all_keys.len()];
    for (i, k) in all_keys.iter().enumerate() {
        boundary[i] = match k {
            NodeKey::Crossing(_) => true,
            NodeKey::Grid(g) => node_t[*g] >= r,
        };
    }
    for ((a, b), &(_, s)) in &edge_index {
        if s < SNAP {
            if let Some(&i) = index.get(&NodeKey::Grid(*a)) {
                boundary[i] = true;
            }
        } else if s > 1.0 - SNAP {
            if let Some(&i) = index.get(&NodeKey::Grid(*b)) {
                boundary[i] = true;
            }
        }
    }
    let interior: Vec<usize> = (0..all_keys.len()).filter(|&i| !boundary[i]).collect();
    finish_assembly(all_keys.len(), &elements, &index, interior, r, resolution, m)
}

fn finish_assembly(
    n: usize,
    elements: &[(Vec<NodeKey>, Vec<f64>, Vec<f64>)],
    index: &HashMap<NodeKey, usize>,
    interior: Vec<usize>,
    r: f64,
    resolution: usize,
    m: usize,
) -> Result<DiscreteOperator> {
    let nv = m + 1;
    let mut kt = Vec::with_capacity(elements.len() * nv * nv);
    let mut mt = Vec::with_capacity(elements.len() * nv * nv);
    for (keys, k, mm) in elements {
        let ids: Vec<usize> = keys.iter().map(|key| index[key]).collect();
        for a in 0..nv {
            for b in 0..nv {
                kt.push((ids[a], ids[b], k[a * nv + b]));
                mt.push((ids[a], ids[b], mm[a * nv + b]));
            }
        }
    }
    let full_k = CsrMatrix::from_triplets(n, kt);
    let full_m = CsrMatrix::from_triplets(n, mt);
    DiscreteOperator {
        stiffness: full_k.restrict(&interior),
        mass: full_m.restrict(&interior),
        interior_index: interior,
        r,
        resolution,
        full_stiffness: full_k,
    }
    .checked()
}

/// Cotangent stiffness and barycentric lumped mass on a triangle mesh;
/// vertices with `t ≥ r` carry the Dirichlet condition.
pub fn assemble_mesh(mesh: &TriangleMesh, r: f64) -> Result<DiscreteOperator> {
    let n = mesh.vertices().len();
    let mut kt = Vec::new();
    for ((i, j), w) in mesh.cotangent_weights() {
        kt.push((i, j, -w));
        kt.push((j, i, -w));
        kt.push((i, i, w));
        kt.push((j, j, w));
    }
    // HashMap iteration order is not fixed; sorting inside from_triplets
    // groups entries, but the summation order must be fixed as well
    kt.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
    let full_k = CsrMatrix::from_triplets(n, kt);
    let mass = CsrMatrix::from_triplets(
        n,
        mesh.vertex_areas().iter().enumerate().map(|(i, &a)| (i, i, a)).collect(),
    );
    let interior: Vec<usize> = (0..n)
        .filter(|&v| mesh.extrinsic_distance(v) < r && !mesh.is_boundary(v))
        .collect();
    if interior.is_empty() {
        let min_t = (0..n).map(|v| mesh.extrinsic_distance(v)).fold(f64::INFINITY, f64::min);
        return Err(Error::EmptyBall { r, min_t });
    }
    DiscreteOperator {
        stiffness: full_k.restrict(&interior),
        mass: mass.restrict(&interior),
        interior_index: interior,
        r,
        resolution: 0,
        full_stiffness: full_k,
    }
    .checked()
}

/// Result of the eigen solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambda1 {
    pub r: f64,
    pub value: f64,
    pub resolution: usize,
    /// `‖Kx - λMx‖ / ‖λMx‖` for the returned vector.
    pub residual: f64,
    pub iterations: usize,
}

/// Eigenpair of the lowest mode with diagnostics.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda: Lambda1,
    pub vector: Vec<f64>,
}

/// Smallest eigenvalue of `K x = λ M x` by shift-invert subspace iteration.
pub fn dirichlet_lambda1(op: &DiscreteOperator, tol: f64) -> Result<Lambda1> {
    Ok(dirichlet_eigenpair(op, tol, None)?.lambda)
}

/// The start block is the constant vector plus, when `seed` is given,
/// random perturbations from that seed; otherwise fixed smooth vectors.
pub fn dirichlet_eigenpair(op: &DiscreteOperator, tol: f64, seed: Option<u64>) -> Result<Eigenpair> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let n = op.len();
    let perm = reverse_cuthill_mckee(&op.stiffness);
    let k = op.stiffness.permute(&perm);
    let mass = op.mass.permute(&perm);
    let chol = EnvelopeCholesky::factor(&k)?;
    let block = BLOCK.min(n);

    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|b| {
            if b == 0 {
                return vec![1.0; n];
            }
            match seed {
                Some(s) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(s.wrapping_add(b as u64));
                    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
                }
                None => (0..n).map(|i| ((i + 1) as f64 * (b as f64) * 0.618_033_988_75).sin()).collect(),
            }
        })
        .collect();
    if let Some(s) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        for v in x[0].iter_mut() {
            *v += 1e-3 * rng.random_range(-1.0..1.0);
        }
    }

    let mut prev = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for iter in 1..=MAX_ITERATIONS {
        let y: Vec<Vec<f64>> = x.par_iter().map(|v| chol.solve(&mass.mul_vec(v))).collect();
        let ky: Vec<Vec<f64>> = y.par_iter().map(|v| k.mul_vec(v)).collect();
        let my: Vec<Vec<f64>> = y.par_iter().map(|v| mass.mul_vec(v)).collect();
        let a = DMatrix::from_fn(block, block, |i, j| dot(&y[i], &ky[j]));
        let b = DMatrix::from_fn(block, block, |i, j| dot(&y[i], &my[j]));
        let a = (&a + a.transpose()) * 0.5;
        let b = (&b + b.transpose()) * 0.5;
        let chol_b = b.cholesky().ok_or_else(|| {
            Error::Degenerate("iteration subspace collapsed (mass Gram matrix singular)".into())
        })?;
        let l_inv = chol_b.l().try_inverse().ok_or_else(|| {
            Error::Degenerate("iteration subspace collapsed".into())
        })?;
        let c = &l_inv * a * l_inv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let coeffs = l_inv.transpose() * &eig.eigenvectors;
        let combine = |vs: &[Vec<f64>], col: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (j, v) in vs.iter().enumerate() {
                let cj = coeffs[(j, col)];
                for (o, vi) in out.iter_mut().zip(v) {
                    *o += cj * vi;
                }
            }
            out
        };
        x = order.iter().map(|&col| combine(&y, col)).collect();
        let lambda = eig.eigenvalues[order[0]];
        let kx = combine(&ky, order[0]);
        let mx = combine(&my, order[0]);
        let res: f64 = kx.iter().zip(&mx).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
        residual = res / (lambda.abs() * dot(&mx, &mx).sqrt()).max(f64::MIN_POSITIVE);
        let change = (lambda - prev).abs() / lambda.abs();
        prev = lambda;
        if change < tol && residual < tol.sqrt() {
            // Ritz vectors are M-orthonormal; fix the sign for reproducibility
            let mut v0 = x.swap_remove(0);
            if v0.iter().sum::<f64>() < 0.0 {
                v0.iter_mut().for_each(|v| *v = -*v);
            }
            let mut vector = vec![0.0; n];
            for (new, &old) in perm.iter().enumerate() {
                vector[old] = v0[new];
            }
            return Ok(Eigenpair {
                lambda: Lambda1 { r: op.r, value: lambda, resolution: op.resolution, residual, iterations: iter },
                vector,
            });
        }
    }
    Err(Error::NonConvergence { iterations: MAX_ITERATIONS, residual })
}

/// `λ₁(Ω_r)` along increasing radii with the tail (last) value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub lambda1: Vec<Lambda1>,
    pub tail: f64,
    /// Non-increasing within 1% relative noise.
    pub monotone: bool,
}

/// Relative noise allowed in the domain-monotonicity check.
pub const MONOTONE_NOISE: f64 = 0.01;

pub fn summarize(lambda1: Vec<Lambda1>) -> Result<SpectrumEstimate> {
    let tail = lambda1.last().map(|l| l.value).ok_or_else(|| {
        Error::InvalidInput("radius list is empty".into())
    })?;
    let monotone = lambda1.windows(2).all(|w| w[1].value <= w[0].value * (1.0 + MONOTONE_NOISE));
    Ok(SpectrumEstimate { lambda1, tail, monotone })
}

/// `λ₁` on catalog balls, each chart sized to its own radius.
pub fn spectrum_bottom_estimate(
    surface: SurfaceId,
    r_list: &[f64],
    resolution: usize,
    seed: Option<u64>,
) -> Result<SpectrumEstimate> {
    if r_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("radius list must be increasing".into()));
    }
    let rows = r_list
        .par_iter()
        .map(|&r| {
            let chart = crate::immersions::catalog(surface, r, resolution.max(16))?;
            let op = assemble_chart(&chart, r, resolution)?;
            Ok(dirichlet_eigenpair(&op, DEFAULT_TOLERANCE, seed)?.lambda)
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersions::{catalog, triangulate};

    const J01_SQ: f64 = 5.783_185_962_946_784;

    fn disk(r: f64, res: usize) -> f64 {
        let chart = catalog(SurfaceId::Plane, r, 16).unwrap();
        let op = assemble_chart(&chart, r, res).unwrap();
        dirichlet_lambda1(&op, DEFAULT_TOLERANCE).unwrap().value
    }

    #[test]
    fn structural_invariants() {
        let chart = catalog(SurfaceId::Plane, 1.0, 64).unwrap();
        let op = assemble_chart(&chart, 1.0, 64).unwrap();
        assert!(op.row_sum_defect() < 1e-10);
        assert!(op.asymmetry() < 1e-12);
        assert!(op.mass.diagonal().iter().all(|&d| d > 0.0));
        // roughly the lattice points of the disk
        let expected = std::f64::consts::PI * (64.0 / 2.1_f64).powi(2);
        assert!((op.len() as f64 - expected).abs() / expected < 0.1);
        let ones = vec![1.0; op.len()];
        assert!(op.rayleigh(&ones) >= 0.0);
    }

    #[test]
    fn unit_disk_matches_bessel_zero() {
        let l = disk(1.0, 128);
        assert!((l - J01_SQ).abs() / J01_SQ < 0.01, "λ₁ = {l}");
    }

    #[test]
    fn disk_error_converges_at_second_order() {
        // boundary clipping adds non-monotone noise, so fit over a wide span
        let errs: Vec<f64> = [32, 192].iter().map(|&n| (disk(1.0, n) - J01_SQ).abs()).collect();
        let order = (errs[0] / errs[1]).ln() / 6f64.ln();
        assert!(order > 1.5, "errors {errs:?}");
        assert!(errs.iter().all(|&e| e > 0.0));
    }

    #[test]
    fn dirichlet_values_decrease_with_radius() {
        let est = spectrum_bottom_estimate(SurfaceId::Catenoid { neck: 1.0 }, &[3.0, 6.0, 12.0], 64, None).unwrap();
        assert!(est.monotone);
        assert!(est.lambda1[2].value < est.lambda1[0].value);
    }

    #[test]
    fn plane_scaling_law() {
        let est = spectrum_bottom_estimate(SurfaceId::Plane, &[5.0, 10.0, 20.0, 40.0], 64, None).unwrap();
        let scaled: Vec<f64> = est.lambda1.iter().map(|l| l.value * l.r * l.r).collect();
        for s in &scaled {
            assert!((s - J01_SQ).abs() / J01_SQ < 0.01, "{scaled:?}");
        }
        assert_eq!(est.tail, est.lambda1[3].value);
    }

    #[test]
    fn catenoid_assembly_is_spd() {
        let chart = catalog(SurfaceId::Catenoid { neck: 1.0 }, 5.0, 64).unwrap();
        let op = assemble_chart(&chart, 5.0, 64).unwrap();
        assert!(op.mass.diagonal().iter().all(|&d| d > 0.0));
        assert!(op.row_sum_defect() < 1e-10);
        assert!(EnvelopeCholesky::factor(&op.mass).is_ok());
    }

    #[test]
    fn empty_ball_is_an_error() {
        let chart = catalog(SurfaceId::Catenoid { neck: 1.0 }, 5.0, 64).unwrap();
        assert!(matches!(assemble_chart(&chart, 1.0, 64), Err(Error::EmptyBall { .. })));
        assert!(assemble_chart(&chart, 5.0, 8).is_err());
    }

    #[test]
    fn mesh_path_agrees_with_chart_path() {
        let chart = catalog(SurfaceId::Plane, 1.0, 64).unwrap();
        let mesh = triangulate(&chart, 128).unwrap();
        let op = assemble_mesh(&mesh, 1.0).unwrap();
        let l = dirichlet_lambda1(&op, DEFAULT_TOLERANCE).unwrap().value;
        // support reaches the first outside vertex, so the value sits below
        assert!(l < J01_SQ && (J01_SQ - l) / J01_SQ < 0.05, "λ₁ = {l}");
    }

    #[test]
    fn seeded_start_reaches_the_same_value() {
        let chart = catalog(SurfaceId::Helicoid, 4.0, 48).unwrap();
        let op = assemble_chart(&chart, 4.0, 48).unwrap();
        let a = dirichlet_eigenpair(&op, DEFAULT_TOLERANCE, None).unwrap().lambda.value;
        let b = dirichlet_eigenpair(&op, DEFAULT_TOLERANCE, Some(7)).unwrap().lambda.value;
        assert!((a - b).abs() / a < 1e-7);
        let c = dirichlet_eigenpair(&op, DEFAULT_TOLERANCE, Some(7)).unwrap().lambda.value;
        assert_eq!(b, c);
    }
}
