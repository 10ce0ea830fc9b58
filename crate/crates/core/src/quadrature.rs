//! Integration over extrinsic balls `Ω_r = {t < r}` of a chart.
//!
//! The parameter box is cut into a Kuhn (Freudenthal) simplex grid. Simplices
//! that straddle the level set `t = r` are clipped: the crossing point on each
//! cut edge is a root of the true `t` along that edge, and the retained piece
//! is split into sub-simplices integrated with a fixed symmetric rule. The
//! boundary is therefore resolved to second order in the grid step rather than
//! by counting corners.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::immersions::{Chart, Param, MAX_INTRINSIC};

/// Pointwise data handed to integrands.
#[derive(Debug, Clone, Copy)]
pub struct PointData {
    pub param: Param,
    pub t: f64,
    pub grad_t_sq: f64,
    pub area_element: f64,
    pub curvature: Option<f64>,
}

pub(crate) fn point_data(chart: &Chart, p: &Param) -> PointData {
    let g = chart.frame(p).local();
    PointData {
        param: *p,
        t: g.t,
        grad_t_sq: g.grad_t_sq,
        area_element: g.area_element,
        curvature: chart.gaussian_curvature(p),
    }
}

// Degree-5 seven-point rule on the triangle (barycentric, weights sum to 1).
const TRI_A1: f64 = 0.059_715_871_789_770;
const TRI_B1: f64 = 0.470_142_064_105_115;
const TRI_W1: f64 = 0.132_394_152_788_506;
const TRI_A2: f64 = 0.797_426_985_353_087;
const TRI_B2: f64 = 0.101_286_507_323_456;
const TRI_W2: f64 = 0.125_939_180_544_827;
const TRI_RULE: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    ([TRI_A1, TRI_B1, TRI_B1], TRI_W1),
    ([TRI_B1, TRI_A1, TRI_B1], TRI_W1),
    ([TRI_B1, TRI_B1, TRI_A1], TRI_W1),
    ([TRI_A2, TRI_B2, TRI_B2], TRI_W2),
    ([TRI_B2, TRI_A2, TRI_B2], TRI_W2),
    ([TRI_B2, TRI_B2, TRI_A2], TRI_W2),
];

// Degree-2 four-point rule on the tetrahedron.
const TET_A: f64 = 0.585_410_196_624_968_5;
const TET_B: f64 = 0.138_196_601_125_010_5;
const TET_RULE: [([f64; 4], f64); 4] = [
    ([TET_A, TET_B, TET_B, TET_B], 0.25),
    ([TET_B, TET_A, TET_B, TET_B], 0.25),
    ([TET_B, TET_B, TET_A, TET_B], 0.25),
    ([TET_B, TET_B, TET_B, TET_A], 0.25),
];

/// Quadrature nodes `(barycentric, weight)` for an `m`-simplex; weights sum to 1.
pub(crate) fn rule(m: usize) -> Vec<(Vec<f64>, f64)> {
    match m {
        2 => TRI_RULE.iter().map(|(b, w)| (b.to_vec(), *w)).collect(),
        _ => TET_RULE.iter().map(|(b, w)| (b.to_vec(), *w)).collect(),
    }
}

/// Signed parameter-space volume of a simplex.
pub(crate) fn simplex_volume(m: usize, v: &[Param]) -> f64 {
    let e = |k: usize, a: usize| v[k][a] - v[0][a];
    match m {
        2 => 0.5 * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0)),
        3 => {
            let det = e(1, 0) * (e(2, 1) * e(3, 2) - e(2, 2) * e(3, 1))
                - e(1, 1) * (e(2, 0) * e(3, 2) - e(2, 2) * e(3, 0))
                + e(1, 2) * (e(2, 0) * e(3, 1) - e(2, 1) * e(3, 0));
            det / 6.0
        }
        _ => 0.0,
    }
}

/// A vertex of a clipped piece: an original vertex or the crossing point on
/// the edge from an inside vertex to an outside one (local indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Label {
    Vertex(usize),
    Cross(usize, usize),
}

fn split_quad(q: [Label; 4], key: &dyn Fn(Label) -> u64) -> Vec<Vec<Label>> {
    let i = (0..4).min_by_key(|&i| key(q[i])).unwrap_or(0);
    let at = |k: usize| q[(i + k) % 4];
    vec![vec![at(0), at(1), at(2)], vec![at(0), at(2), at(3)]]
}

/// Splits a triangular prism (`bottom[i]` joined to `top[i]`) into three
/// tetrahedra. Every quadrilateral face is cut along the diagonal through its
/// smallest-key vertex, so neighbouring pieces agree on shared faces.
fn split_prism(bottom: [Label; 3], top: [Label; 3], key: &dyn Fn(Label) -> u64) -> Vec<Vec<Label>> {
    let all = [bottom[0], bottom[1], bottom[2], top[0], top[1], top[2]];
    let v = (0..6).min_by_key(|&i| key(all[i])).unwrap_or(0);
    let (base, other) = if v < 3 { (0, 3) } else { (3, 0) };
    let s = v % 3;
    let q: Vec<Label> = (0..6)
        .map(|i| if i < 3 { all[base + (s + i) % 3] } else { all[other + (s + i - 3) % 3] })
        .collect();
    let k = |i: usize| key(q[i]);
    let tets: [[usize; 4]; 3] = if k(1).min(k(5)) < k(2).min(k(4)) {
        [[0, 1, 2, 5], [0, 1, 5, 4], [0, 4, 5, 3]]
    } else {
        [[0, 1, 2, 4], [0, 4, 2, 5], [0, 4, 5, 3]]
    };
    tets.iter().map(|t| t.iter().map(|&i| q[i]).collect()).collect()
}

/// Decomposition of `{inside}` of a triangle or tetrahedron into simplices.
pub(crate) fn clip_pattern(inside: &[bool], key: &dyn Fn(Label) -> u64) -> Vec<Vec<Label>> {
    use Label::{Cross as X, Vertex as V};
    let m = inside.len() - 1;
    let ins: Vec<usize> = (0..=m).filter(|&i| inside[i]).collect();
    let outs: Vec<usize> = (0..=m).filter(|&i| !inside[i]).collect();
    if ins.is_empty() {
        return Vec::new();
    }
    if outs.is_empty() {
        return vec![(0..=m).map(V).collect()];
    }
    match (m, ins.len()) {
        (2, 1) => {
            let a = ins[0];
            vec![vec![V(a), X(a, outs[0]), X(a, outs[1])]]
        }
        (2, 2) => {
            let (a, b, c) = (ins[0], ins[1], outs[0]);
            split_quad([V(a), V(b), X(b, c), X(a, c)], key)
        }
        (3, 1) => {
            let a = ins[0];
            vec![vec![V(a), X(a, outs[0]), X(a, outs[1]), X(a, outs[2])]]
        }
        (3, 2) => {
            let (a, b, c, d) = (ins[0], ins[1], outs[0], outs[1]);
            split_prism([V(a), X(a, c), X(a, d)], [V(b), X(b, c), X(b, d)], key)
        }
        (3, 3) => {
            let (a, b, c, d) = (ins[0], ins[1], ins[2], outs[0]);
            split_prism([V(a), V(b), V(c)], [X(a, d), X(b, d), X(c, d)], key)
        }
        _ => Vec::new(),
    }
}

/// Iteration cap for edge crossings; false position usually needs under ten.
const CROSSING_ITERATIONS: usize = 100;

/// Fraction `s ∈ (0, 1)` along `a → b` where `t` reaches `r`, given
/// `t(a) < r ≤ t(b)`. Illinois false position keeps a bracket, so the result
/// stays in the interval even where `t` is not monotone along the edge.
pub(crate) fn crossing(chart: &Chart, a: &Param, b: &Param, r: f64) -> f64 {
    let g = |s: f64| chart.extrinsic_distance(&lerp(a, b, s)) - r;
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut g_lo, mut g_hi) = (g(lo), g(hi));
    if !(g_lo < 0.0 && g_hi >= 0.0) {
        return 0.5;
    }
    let tol = 1e-14 * r.max(1.0);
    let mut side = 0i8;
    for _ in 0..CROSSING_ITERATIONS {
        let s = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        let gs = g(s);
        if gs.abs() <= tol || hi - lo < 1e-15 {
            return s;
        }
        if gs < 0.0 {
            lo = s;
            g_lo = gs;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = s;
            g_hi = gs;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (lo + hi)
}

pub(crate) fn lerp(a: &Param, b: &Param, s: f64) -> Param {
    let mut p = [0.0; MAX_INTRINSIC];
    for k in 0..MAX_INTRINSIC {
        p[k] = a[k] + s * (b[k] - a[k]);
    }
    p
}

/// Structured Kuhn triangulation of a chart's parameter box.
#[derive(Debug, Clone)]
pub(crate) struct SimplexGrid {
    pub m: usize,
    pub n: usize,
    lo: Param,
    step: Param,
    periodic: [bool; MAX_INTRINSIC],
    /// Distinct nodes per axis (`n` on periodic axes, `n + 1` otherwise).
    counts: [usize; MAX_INTRINSIC],
    perms: Vec<[usize; MAX_INTRINSIC]>,
}

impl SimplexGrid {
    pub fn new(chart: &Chart, n: usize) -> Result<Self> {
        let m = chart.intrinsic_dim();
        if !(2..=3).contains(&m) {
            return Err(Error::NotApplicable(format!(
                "ball integration supports intrinsic dimension 2 or 3, got {m}"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!("grid resolution must be >= 2, got {n}")));
        }
        let d = chart.domain();
        let mut lo = [0.0; MAX_INTRINSIC];
        let mut step = [0.0; MAX_INTRINSIC];
        let mut periodic = [false; MAX_INTRINSIC];
        let mut counts = [1; MAX_INTRINSIC];
        for a in 0..m {
            lo[a] = d.lo[a];
            step[a] = (d.hi[a] - d.lo[a]) / n as f64;
            periodic[a] = d.periodic[a];
            counts[a] = if periodic[a] { n } else { n + 1 };
        }
        let perms = if m == 2 {
            vec![[0, 1, 2], [1, 0, 2]]
        } else {
            vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
        };
        Ok(SimplexGrid { m, n, lo, step, periodic, counts, perms })
    }

    pub fn node_count(&self) -> usize {
        self.counts[..self.m].iter().product()
    }

    pub fn simplex_count(&self) -> usize {
        self.n.pow(self.m as u32) * self.perms.len()
    }

    fn node_multi(&self, id: usize) -> [usize; MAX_INTRINSIC] {
        let mut idx = [0; MAX_INTRINSIC];
        let mut rest = id;
        for a in 0..self.m {
            idx[a] = rest % self.counts[a];
            rest /= self.counts[a];
        }
        idx
    }

    pub fn node_param(&self, id: usize) -> Param {
        self.param(&self.node_multi(id))
    }

    fn param(&self, idx: &[usize; MAX_INTRINSIC]) -> Param {
        let mut p = [0.0; MAX_INTRINSIC];
        for a in 0..self.m {
            p[a] = self.lo[a] + self.step[a] * idx[a] as f64;
        }
        p
    }

    fn node_id(&self, idx: &[usize; MAX_INTRINSIC]) -> usize {
        let mut id = 0;
        for a in (0..self.m).rev() {
            let i = if self.periodic[a] { idx[a] % self.counts[a] } else { idx[a] };
            id = id * self.counts[a] + i;
        }
        id
    }

    /// Vertex ids and (unwrapped) parameters of simplex `s`.
    pub fn simplex(&self, s: usize) -> ([usize; 4], [Param; 4]) {
        let np = self.perms.len();
        let (mut cell, perm) = (s / np, &self.perms[s % np]);
        let mut idx = [0; MAX_INTRINSIC];
        for a in 0..self.m {
            idx[a] = cell % self.n;
            cell /= self.n;
        }
        let mut ids = [0; 4];
        let mut params = [[0.0; MAX_INTRINSIC]; 4];
        ids[0] = self.node_id(&idx);
        params[0] = self.param(&idx);
        for k in 0..self.m {
            idx[perm[k]] += 1;
            ids[k + 1] = self.node_id(&idx);
            params[k + 1] = self.param(&idx);
        }
        (ids, params)
    }
}

/// Integrates `f · dμ` over one simplex (parameter vertices `v`).
fn integrate_simplex<const C: usize, F>(chart: &Chart, m: usize, v: &[Param], f: &F) -> [f64; C]
where
    F: Fn(&PointData) -> [f64; C],
{
    let vol = simplex_volume(m, v).abs();
    let mut acc = [0.0; C];
    if vol == 0.0 {
        return acc;
    }
    let mut eval = |bary: &[f64], w: f64| {
        let mut p = [0.0; MAX_INTRINSIC];
        for (k, &l) in bary.iter().enumerate() {
            for a in 0..m {
                p[a] += l * v[k][a];
            }
        }
        let pd = point_data(chart, &p);
        let vals = f(&pd);
        let wt = w * vol * pd.area_element;
        for c in 0..C {
            acc[c] += wt * vals[c];
        }
    };
    if m == 2 {
        TRI_RULE.iter().for_each(|(b, w)| eval(b, *w));
    } else {
        TET_RULE.iter().for_each(|(b, w)| eval(b, *w));
    }
    acc
}

#[derive(Debug, Clone, Copy)]
struct SimplexInfo {
    index: usize,
    t_min: f64,
    t_max: f64,
}

const CHUNK: usize = 512;

/// Integrals over extrinsic balls of one chart.
#[derive(Debug, Clone)]
pub struct BallIntegrator {
    chart: Chart,
    grid: SimplexGrid,
    node_t: Vec<f64>,
    /// Sorted by `t_max`.
    simplices: Vec<SimplexInfo>,
    max_spread: f64,
}

impl BallIntegrator {
    /// Grid with `resolution` cells per parameter axis.
    pub fn new(chart: &Chart, resolution: usize) -> Result<Self> {
        let grid = SimplexGrid::new(chart, resolution)?;
        let node_t: Vec<f64> = (0..grid.node_count())
            .into_par_iter()
            .map(|id| chart.extrinsic_distance(&grid.node_param(id)))
            .collect();
        let mut simplices: Vec<SimplexInfo> = (0..grid.simplex_count())
            .map(|s| {
                let (ids, _) = grid.simplex(s);
                let ts = ids[..=grid.m].iter().map(|&i| node_t[i]);
                let (t_min, t_max) =
                    ts.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(t), b.max(t)));
                SimplexInfo { index: s, t_min, t_max }
            })
            .collect();
        simplices.sort_by(|a, b| a.t_max.total_cmp(&b.t_max).then(a.index.cmp(&b.index)));
        let max_spread = simplices.iter().map(|s| s.t_max - s.t_min).fold(0.0, f64::max);
        Ok(BallIntegrator { chart: chart.clone(), grid, node_t, simplices, max_spread })
    }

    /// Uses the chart's own resolution.
    pub fn for_chart(chart: &Chart) -> Result<Self> {
        Self::new(chart, chart.resolution())
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.grid.m
    }

    pub fn resolution(&self) -> usize {
        self.grid.n
    }

    /// Smallest `t` over the grid nodes.
    pub fn min_node_t(&self) -> f64 {
        self.node_t.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
        }
        self.chart.require_covered(r)
    }

    /// Number of leading (sorted) simplices lying entirely inside `Ω_r`.
    fn full_count(&self, r: f64) -> usize {
        self.simplices.partition_point(|s| s.t_max < r)
    }

    fn cut_simplices(&self, r: f64) -> Vec<usize> {
        let start = self.full_count(r);
        self.simplices[start..]
            .iter()
            .take_while(|s| s.t_max < r + self.max_spread + 1e-12)
            .filter(|s| s.t_min < r)
            .map(|s| s.index)
            .collect()
    }

    /// Integral of `f` over the part of simplex `s` with `t < r`.
    fn clipped<const C: usize, F>(&self, s: usize, r: f64, f: &F) -> [f64; C]
    where
        F: Fn(&PointData) -> [f64; C],
    {
        let m = self.grid.m;
        let (ids, params) = self.grid.simplex(s);
        let inside: Vec<bool> = (0..=m).map(|k| self.node_t[ids[k]] < r).collect();
        let key = |l: Label| match l {
            Label::Vertex(i) => i as u64,
            Label::Cross(i, j) => 8 + 4 * i as u64 + j as u64,
        };
        let mut acc = [0.0; C];
        let mut cache: Vec<(Label, Param)> = Vec::new();
        for piece in clip_pattern(&inside, &key) {
            let verts: Vec<Param> = piece
                .iter()
                .map(|&l| match l {
                    Label::Vertex(i) => params[i],
                    Label::Cross(i, j) => {
                        if let Some((_, p)) = cache.iter().find(|(k, _)| *k == l) {
                            return *p;
                        }
                        let s = crossing(&self.chart, &params[i], &params[j], r);
                        let p = lerp(&params[i], &params[j], s);
                        cache.push((l, p));
                        p
                    }
                })
                .collect();
            let part = integrate_simplex(&self.chart, m, &verts, f);
            for c in 0..C {
                acc[c] += part[c];
            }
        }
        acc
    }

    fn full<const C: usize, F>(&self, s: usize, f: &F) -> [f64; C]
    where
        F: Fn(&PointData) -> [f64; C],
    {
        let (_, params) = self.grid.simplex(s);
        integrate_simplex(&self.chart, self.grid.m, &params[..=self.grid.m], f)
    }

    /// `∫_{Ω_r} f dμ`, channel by channel.
    pub fn integrate<const C: usize, F>(&self, r: f64, f: F) -> Result<[f64; C]>
    where
        F: Fn(&PointData) -> [f64; C] + Sync,
    {
        self.check_radius(r)?;
        let full = &self.simplices[..self.full_count(r)];
        let partials: Vec<[f64; C]> = full
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = [0.0; C];
                for s in chunk {
                    add(&mut acc, &self.full(s.index, &f));
                }
                acc
            })
            .collect();
        let cut = self.cut_simplices(r);
        let cut_parts: Vec<[f64; C]> =
            cut.par_iter().map(|&s| self.clipped(s, r, &f)).collect();
        let mut total = [0.0; C];
        for p in partials.iter().chain(&cut_parts) {
            add(&mut total, p);
        }
        Ok(total)
    }

    /// `∫_{Ω_r} f dμ` for every radius in `radii` (any order), sharing the
    /// work on simplices that are inside all of the smaller balls.
    pub fn profile<const C: usize, F>(&self, radii: &[f64], f: F) -> Result<Vec<[f64; C]>>
    where
        F: Fn(&PointData) -> [f64; C] + Sync,
    {
        let Some(r_top) = radii.iter().copied().reduce(f64::max) else {
            return Ok(Vec::new());
        };
        for &r in radii {
            self.check_radius(r)?;
        }
        let needed = self.full_count(r_top);
        let per_simplex: Vec<[f64; C]> =
            self.simplices[..needed].par_iter().map(|s| self.full(s.index, &f)).collect();
        let mut prefix = Vec::with_capacity(needed + 1);
        prefix.push([0.0; C]);
        for v in &per_simplex {
            let mut next = *prefix.last().unwrap_or(&[0.0; C]);
            add(&mut next, v);
            prefix.push(next);
        }
        radii
            .par_iter()
            .map(|&r| {
                let mut total = prefix[self.full_count(r)];
                for s in self.cut_simplices(r) {
                    add(&mut total, &self.clipped(s, r, &f));
                }
                Ok(total)
            })
            .collect()
    }

    /// `vol(Ω_r)`.
    pub fn volume(&self, r: f64) -> Result<f64> {
        Ok(self.integrate(r, |_| [1.0])?[0])
    }

    pub fn volumes(&self, radii: &[f64]) -> Result<Vec<f64>> {
        Ok(self.profile(radii, |_| [1.0])?.into_iter().map(|v| v[0]).collect())
    }

    /// Minimum of `g` over the quadrature nodes of simplices inside `Ω_r`
    /// and over the grid nodes inside `Ω_r`.
    pub fn min_over_ball<G>(&self, r: f64, g: G) -> Result<Option<f64>>
    where
        G: Fn(&PointData) -> Option<f64> + Sync,
    {
        Ok(self.argmin_over_ball(r, g)?.map(|(v, _)| v))
    }

    /// As [`Self::min_over_ball`], with the parameter point of the minimum.
    pub fn argmin_over_ball<G>(&self, r: f64, g: G) -> Result<Option<(f64, Param)>>
    where
        G: Fn(&PointData) -> Option<f64> + Sync,
    {
        self.check_radius(r)?;
        let pick = |a: (f64, Param), b: (f64, Param)| if b.0 < a.0 { b } else { a };
        let none = (f64::INFINITY, [0.0; MAX_INTRINSIC]);
        let node_min = (0..self.node_t.len())
            .into_par_iter()
            .filter(|&i| self.node_t[i] < r)
            .filter_map(|i| {
                let p = self.grid.node_param(i);
                g(&point_data(&self.chart, &p)).map(|v| (v, p))
            })
            .reduce(|| none, pick);
        let full = &self.simplices[..self.full_count(r)];
        let quad_min = full
            .par_iter()
            .map(|s| min_over_nodes(&self.chart, self.grid.m, &self.grid.simplex(s.index).1, &g))
            .reduce(|| none, pick);
        let best = pick(node_min, quad_min);
        Ok(if best.0.is_finite() { Some(best) } else { None })
    }
}

fn min_over_nodes<G>(chart: &Chart, m: usize, v: &[Param], g: &G) -> (f64, Param)
where
    G: Fn(&PointData) -> Option<f64>,
{
    rule(m)
        .iter()
        .map(|(bary, _)| {
            let mut p = [0.0; MAX_INTRINSIC];
            for (k, &l) in bary.iter().enumerate() {
                for a in 0..m {
                    p[a] += l * v[k][a];
                }
            }
            (g(&point_data(chart, &p)).unwrap_or(f64::INFINITY), p)
        })
        .fold((f64::INFINITY, [0.0; MAX_INTRINSIC]), |a, b| if b.0 < a.0 { b } else { a })
}

fn add<const C: usize>(acc: &mut [f64; C], v: &[f64; C]) {
    for c in 0..C {
        acc[c] += v[c];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersions::{catalog, SurfaceId};
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn rules_integrate_polynomials() {
        // ∫ x² y over the unit right triangle = 1/60, x³ = 1/20
        let mut s = [0.0; 2];
        for (b, w) in rule(2) {
            let (x, y) = (b[1], b[2]);
            s[0] += w * 0.5 * x * x * y;
            s[1] += w * 0.5 * x.powi(3);
        }
        assert!((s[0] - 1.0 / 60.0).abs() < 1e-14);
        assert!((s[1] - 1.0 / 20.0).abs() < 1e-14);
        // ∫ x y over the unit tetrahedron = 1/120
        let t: f64 = rule(3).iter().map(|(b, w)| w * b[1] * b[2] / 6.0).sum();
        assert!((t - 1.0 / 120.0).abs() < 1e-14);
    }

    fn prism_volume(key_order: [u64; 6]) -> f64 {
        // unit right prism over the triangle (0,0),(1,0),(0,1), height 1
        let coords: [Param; 6] = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0],
            [0.0, 1.0, 1.0],
        ];
        let lab = |i: usize| Label::Vertex(i);
        let key = |l: Label| match l {
            Label::Vertex(i) => key_order[i],
            Label::Cross(..) => 0,
        };
        split_prism([lab(0), lab(1), lab(2)], [lab(3), lab(4), lab(5)], &key)
            .iter()
            .map(|t| {
                let v: Vec<Param> = t
                    .iter()
                    .map(|l| match l {
                        Label::Vertex(i) => coords[*i],
                        Label::Cross(..) => unreachable!(),
                    })
                    .collect();
                simplex_volume(3, &v).abs()
            })
            .sum()
    }

    #[test]
    fn prism_split_tiles_the_prism() {
        for order in [[0, 1, 2, 3, 4, 5], [5, 4, 3, 2, 1, 0], [3, 0, 4, 1, 5, 2], [2, 5, 0, 4, 1, 3]] {
            assert!((prism_volume(order) - 0.5).abs() < 1e-14, "{order:?}");
        }
    }

    #[test]
    fn clip_patterns_tile_the_tetrahedron() {
        // inside = {x + y + z < c} of the unit tetrahedron, linear level set
        let coords: [Param; 4] =
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let level = |p: &Param| p[0] + p[1] + p[2] + 0.3 * p[1];
        for c in [0.2, 0.7, 1.1, 1.25] {
            let inside: Vec<bool> = coords.iter().map(|p| level(p) < c).collect();
            let key = |l: Label| match l {
                Label::Vertex(i) => i as u64,
                Label::Cross(i, j) => 8 + 4 * i as u64 + j as u64,
            };
            let vol: f64 = clip_pattern(&inside, &key)
                .iter()
                .map(|piece| {
                    let v: Vec<Param> = piece
                        .iter()
                        .map(|&l| match l {
                            Label::Vertex(i) => coords[i],
                            Label::Cross(i, j) => {
                                let s = (c - level(&coords[i])) / (level(&coords[j]) - level(&coords[i]));
                                lerp(&coords[i], &coords[j], s)
                            }
                        })
                        .collect();
                    simplex_volume(3, &v).abs()
                })
                .sum();
            // complement volume by Monte Carlo-free exact count: sample a fine lattice
            let n = 200;
            let mut count = 0usize;
            let mut total = 0usize;
            for i in 0..n {
                for j in 0..n - i {
                    for k in 0..n - i - j {
                        let p = [
                            (i as f64 + 0.25) / n as f64,
                            (j as f64 + 0.25) / n as f64,
                            (k as f64 + 0.25) / n as f64,
                        ];
                        total += 1;
                        if level(&p) < c {
                            count += 1;
                        }
                    }
                }
            }
            let lattice = count as f64 / total as f64 / 6.0;
            assert!((vol - lattice).abs() < 0.01 / 6.0, "c={c}: {vol} vs {lattice}");
        }
    }

    #[test]
    fn plane_disk_area() {
        for r in [1.0, 5.0, 50.0] {
            let chart = catalog(SurfaceId::Plane, r, 64).unwrap();
            let q = BallIntegrator::for_chart(&chart).unwrap();
            let v = q.volume(r).unwrap();
            assert!(rel(v, PI * r * r) < 2e-4, "r={r} vol={v}");
        }
    }

    #[test]
    fn plane_moments_match_closed_forms() {
        let r = 3.0;
        let chart = catalog(SurfaceId::Plane, r, 64).unwrap();
        let q = BallIntegrator::for_chart(&chart).unwrap();
        let [g, t2] = q.integrate(r, |p| [p.grad_t_sq, p.t * p.t]).unwrap();
        assert!(rel(g, PI * r * r) < 2e-4);
        assert!(rel(t2, PI * r.powi(4) / 2.0) < 2e-4);
    }

    #[test]
    fn profile_agrees_with_direct_integration() {
        let chart = catalog(SurfaceId::Helicoid, 6.0, 48).unwrap();
        let q = BallIntegrator::for_chart(&chart).unwrap();
        let radii = [5.5, 1.3, 3.0, 6.0];
        let prof = q.profile(&radii, |p| [1.0, p.t]).unwrap();
        for (r, v) in radii.iter().zip(&prof) {
            let d = q.integrate(*r, |p| [1.0, p.t]).unwrap();
            assert!(rel(v[0], d[0]) < 1e-12 && rel(v[1], d[1]) < 1e-12);
        }
    }

    fn catenoid_area_oracle(r: f64) -> f64 {
        // t² = cosh² v + v² for neck 1, independent of u
        let (mut lo, mut hi) = (0.0_f64, r);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.cosh().powi(2) + mid * mid < r * r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v = 0.5 * (lo + hi);
        2.0 * PI * (v + (2.0 * v).sinh() / 2.0)
    }

    #[test]
    fn catenoid_area_matches_oracle() {
        let chart = catalog(SurfaceId::Catenoid { neck: 1.0 }, 20.0, 96).unwrap();
        let q = BallIntegrator::for_chart(&chart).unwrap();
        for r in [2.0, 10.0, 20.0] {
            let v = q.volume(r).unwrap();
            assert!(rel(v, catenoid_area_oracle(r)) < 1e-4, "r={r}");
        }
        assert!((q.min_node_t() - 1.0).abs() < 1e-12);
        assert_eq!(q.volume(0.9).unwrap(), 0.0);
    }

    #[test]
    fn helicoid_area_matches_oracle() {
        // ∫_{u²+v²<r²} √(1+v²) with v = r sin θ, composite Simpson in θ
        let oracle = |r: f64| {
            let n = 20_000;
            let h = PI / n as f64;
            let f = |th: f64| {
                let v = r * th.sin();
                2.0 * r * th.cos() * (1.0 + v * v).sqrt() * r * th.cos()
            };
            let mut s = f(-PI / 2.0) + f(PI / 2.0);
            for i in 1..n {
                let th = -PI / 2.0 + i as f64 * h;
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(th);
            }
            s * h / 3.0
        };
        for r in [2.0, 10.0] {
            let chart = catalog(SurfaceId::Helicoid, r, 96).unwrap();
            let q = BallIntegrator::for_chart(&chart).unwrap();
            let v = q.volume(r).unwrap();
            assert!(rel(v, oracle(r)) < 1e-4, "r={r}: {v} vs {}", oracle(r));
        }
    }

    #[test]
    fn catenoid_x_line_volume() {
        // t² = cosh² v + v² + w²; vol = 2π ∫∫_{cosh²v+v²+w²<r²} cosh² v dv dw
        let r = 3.0;
        let chart = catalog(SurfaceId::CatenoidXLine { neck: 1.0 }, r, 24).unwrap();
        let q = BallIntegrator::for_chart(&chart).unwrap();
        let n = 4000;
        let vmax = 2.0;
        let h = 2.0 * vmax / n as f64;
        let mut oracle = 0.0;
        for i in 0..n {
            let v: f64 = -vmax + (i as f64 + 0.5) * h;
            let w2 = r * r - v.cosh().powi(2) - v * v;
            if w2 > 0.0 {
                oracle += 2.0 * PI * v.cosh().powi(2) * 2.0 * w2.sqrt() * h;
            }
        }
        let v = q.volume(r).unwrap();
        assert!(rel(v, oracle) < 5e-3, "{v} vs {oracle}");
    }

    #[test]
    fn uncovered_radius_is_rejected() {
        let chart = catalog(SurfaceId::Plane, 2.0, 16).unwrap();
        let q = BallIntegrator::for_chart(&chart).unwrap();
        assert!(q.volume(5.0).is_err());
    }
}
