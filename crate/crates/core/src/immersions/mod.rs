//! Exact minimal immersions `ξ: M → ℝⁿ` given by parameter charts.
//!
//! Every chart carries a coverage certificate: the smallest extrinsic distance
//! `t = ‖ξ‖` found on the non-periodic faces of its parameter box. Extrinsic
//! balls `Ω_r = {t < r}` with `r` below that radius lie entirely inside the
//! chart.
//!
//! The catenoid and catenoid × ℝ do not pass through the origin (`min t = c`).
//! That is permitted: nothing downstream evaluates anything at a preimage of
//! the origin, it only needs `t` as the distance to it.

mod mesh;

pub use mesh::{icosphere, read_obj, triangulate, write_obj, TriangleMesh};

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_INTRINSIC: usize = 3;
pub const MAX_AMBIENT: usize = 4;

/// Relative margin between the requested radius and the coverage radius.
pub const COVERAGE_MARGIN: f64 = 0.05;

/// Chart parameters; entries past the intrinsic dimension are ignored.
pub type Param = [f64; MAX_INTRINSIC];

/// Position and tangent vectors `∂ξ/∂x^a` at a parameter point.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub intrinsic_dim: usize,
    pub ambient_dim: usize,
    pub position: [f64; MAX_AMBIENT],
    pub tangents: [[f64; MAX_AMBIENT]; MAX_INTRINSIC],
}

/// Pointwise quantities used by every integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalGeometry {
    /// Extrinsic distance `t = ‖ξ‖`.
    pub t: f64,
    /// Area element `√det g`.
    pub area_element: f64,
    /// `|grad t|² = g^{ab} ∂_a t ∂_b t`; zero where `t = 0`.
    pub grad_t_sq: f64,
}

fn dot(a: &[f64; MAX_AMBIENT], b: &[f64; MAX_AMBIENT]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Frame {
    pub fn distance(&self) -> f64 {
        dot(&self.position, &self.position).sqrt()
    }

    /// Induced metric `g_ab = ⟨∂_a ξ, ∂_b ξ⟩`.
    pub fn metric(&self) -> [[f64; MAX_INTRINSIC]; MAX_INTRINSIC] {
        let mut g = [[0.0; MAX_INTRINSIC]; MAX_INTRINSIC];
        for a in 0..self.intrinsic_dim {
            for b in a..self.intrinsic_dim {
                let v = dot(&self.tangents[a], &self.tangents[b]);
                g[a][b] = v;
                g[b][a] = v;
            }
        }
        g
    }

    /// `(det g, g⁻¹)`; `None` when the metric is singular.
    pub fn metric_inverse(&self) -> Option<(f64, [[f64; MAX_INTRINSIC]; MAX_INTRINSIC])> {
        invert_small(&self.metric(), self.intrinsic_dim)
    }

    pub fn local(&self) -> LocalGeometry {
        let t = self.distance();
        let (det, inv) = match self.metric_inverse() {
            Some(x) => x,
            None => {
                return LocalGeometry { t, area_element: 0.0, grad_t_sq: 0.0 };
            }
        };
        let grad_t_sq = if t > 0.0 {
            let mut dt = [0.0; MAX_INTRINSIC];
            for (a, d) in dt.iter_mut().enumerate().take(self.intrinsic_dim) {
                *d = dot(&self.position, &self.tangents[a]) / t;
            }
            let mut s = 0.0;
            for a in 0..self.intrinsic_dim {
                for b in 0..self.intrinsic_dim {
                    s += inv[a][b] * dt[a] * dt[b];
                }
            }
            s
        } else {
            0.0
        };
        LocalGeometry { t, area_element: det.max(0.0).sqrt(), grad_t_sq }
    }
}

/// Determinant and inverse of the leading `m x m` block.
pub(crate) fn invert_small(
    g: &[[f64; MAX_INTRINSIC]; MAX_INTRINSIC],
    m: usize,
) -> Option<(f64, [[f64; MAX_INTRINSIC]; MAX_INTRINSIC])> {
    let mut inv = [[0.0; MAX_INTRINSIC]; MAX_INTRINSIC];
    let det = match m {
        1 => {
            let d = g[0][0];
            inv[0][0] = 1.0 / d;
            d
        }
        2 => {
            let d = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            inv[0][0] = g[1][1] / d;
            inv[1][1] = g[0][0] / d;
            inv[0][1] = -g[0][1] / d;
            inv[1][0] = -g[1][0] / d;
            d
        }
        3 => {
            let c00 = g[1][1] * g[2][2] - g[1][2] * g[2][1];
            let c01 = g[1][2] * g[2][0] - g[1][0] * g[2][2];
            let c02 = g[1][0] * g[2][1] - g[1][1] * g[2][0];
            let d = g[0][0] * c00 + g[0][1] * c01 + g[0][2] * c02;
            inv[0][0] = c00 / d;
            inv[1][0] = c01 / d;
            inv[2][0] = c02 / d;
            inv[0][1] = (g[0][2] * g[2][1] - g[0][1] * g[2][2]) / d;
            inv[1][1] = (g[0][0] * g[2][2] - g[0][2] * g[2][0]) / d;
            inv[2][1] = (g[0][1] * g[2][0] - g[0][0] * g[2][1]) / d;
            inv[0][2] = (g[0][1] * g[1][2] - g[0][2] * g[1][1]) / d;
            inv[1][2] = (g[0][2] * g[1][0] - g[0][0] * g[1][2]) / d;
            inv[2][2] = (g[0][0] * g[1][1] - g[0][1] * g[1][0]) / d;
            d
        }
        _ => return None,
    };
    if det > 0.0 && det.is_finite() {
        Some((det, inv))
    } else {
        None
    }
}

/// A smooth map from a parameter box into `ℝⁿ`.
pub trait Immersion: Send + Sync + fmt::Debug {
    fn intrinsic_dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    fn position(&self, p: &Param) -> [f64; MAX_AMBIENT];

    /// Central finite differences unless overridden with a closed form.
    fn frame(&self, p: &Param) -> Frame {
        finite_difference_frame(self, p, 1e-5)
    }

    /// Gaussian curvature for surfaces in ℝ³ when known in closed form.
    fn gaussian_curvature(&self, _p: &Param) -> Option<f64> {
        None
    }
}

fn finite_difference_frame<I: Immersion + ?Sized>(imm: &I, p: &Param, step: f64) -> Frame {
    let m = imm.intrinsic_dim();
    let mut tangents = [[0.0; MAX_AMBIENT]; MAX_INTRINSIC];
    for (a, tangent) in tangents.iter_mut().enumerate().take(m) {
        let mut lo = *p;
        let mut hi = *p;
        lo[a] -= step;
        hi[a] += step;
        let (xl, xh) = (imm.position(&lo), imm.position(&hi));
        for k in 0..MAX_AMBIENT {
            tangent[k] = (xh[k] - xl[k]) / (2.0 * step);
        }
    }
    Frame {
        intrinsic_dim: m,
        ambient_dim: imm.ambient_dim(),
        position: imm.position(p),
        tangents,
    }
}

/// The catalog of exact minimal immersions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum SurfaceId {
    /// `(u, v, 0)`.
    Plane,
    /// `neck · (cosh v cos u, cosh v sin u, v)`.
    Catenoid { neck: f64 },
    /// `(v cos u, v sin u, u)`.
    Helicoid,
    /// `(u - u³/3 + uv², -v + v³/3 - u²v, u² - v²)`; immersed, not embedded.
    Enneper,
    /// `(neck · (cosh v cos u, cosh v sin u, v), w)` in ℝ⁴.
    CatenoidXLine { neck: f64 },
}

impl SurfaceId {
    /// Catalog with default shape parameters.
    pub fn all() -> [SurfaceId; 5] {
        [
            SurfaceId::Plane,
            SurfaceId::Catenoid { neck: 1.0 },
            SurfaceId::Helicoid,
            SurfaceId::Enneper,
            SurfaceId::CatenoidXLine { neck: 1.0 },
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            SurfaceId::Plane => "plane",
            SurfaceId::Catenoid { .. } => "catenoid",
            SurfaceId::Helicoid => "helicoid",
            SurfaceId::Enneper => "enneper",
            SurfaceId::CatenoidXLine { .. } => "catenoid_x_line",
        }
    }

    /// Parse a catalog name, using `neck` for the catenoid family.
    pub fn from_name(name: &str, neck: f64) -> Result<Self> {
        if !(neck > 0.0 && neck.is_finite()) {
            return Err(Error::InvalidInput(format!("neck scale must be positive, got {neck}")));
        }
        match name {
            "plane" => Ok(SurfaceId::Plane),
            "catenoid" => Ok(SurfaceId::Catenoid { neck }),
            "helicoid" => Ok(SurfaceId::Helicoid),
            "enneper" => Ok(SurfaceId::Enneper),
            "catenoid_x_line" | "catenoid-x-line" => Ok(SurfaceId::CatenoidXLine { neck }),
            other => Err(Error::InvalidInput(format!(
                "unknown surface '{other}' (expected plane, catenoid, helicoid, enneper, catenoid_x_line)"
            ))),
        }
    }

    /// `min ‖ξ‖` over the whole immersion.
    pub fn min_distance(&self) -> f64 {
        match self {
            SurfaceId::Catenoid { neck } | SurfaceId::CatenoidXLine { neck } => *neck,
            _ => 0.0,
        }
    }

    pub fn is_embedded(&self) -> bool {
        !matches!(self, SurfaceId::Enneper)
    }

    fn periodic_axes(&self) -> [bool; MAX_INTRINSIC] {
        match self {
            SurfaceId::Catenoid { .. } | SurfaceId::CatenoidXLine { .. } => [true, false, false],
            _ => [false; MAX_INTRINSIC],
        }
    }
}

impl Immersion for SurfaceId {
    fn intrinsic_dim(&self) -> usize {
        match self {
            SurfaceId::CatenoidXLine { .. } => 3,
            _ => 2,
        }
    }

    fn ambient_dim(&self) -> usize {
        match self {
            SurfaceId::CatenoidXLine { .. } => 4,
            _ => 3,
        }
    }

    fn position(&self, p: &Param) -> [f64; MAX_AMBIENT] {
        let (u, v) = (p[0], p[1]);
        match *self {
            SurfaceId::Plane => [u, v, 0.0, 0.0],
            SurfaceId::Catenoid { neck: c } => {
                [c * v.cosh() * u.cos(), c * v.cosh() * u.sin(), c * v, 0.0]
            }
            SurfaceId::Helicoid => [v * u.cos(), v * u.sin(), u, 0.0],
            SurfaceId::Enneper => [
                u - u * u * u / 3.0 + u * v * v,
                -v + v * v * v / 3.0 - u * u * v,
                u * u - v * v,
                0.0,
            ],
            SurfaceId::CatenoidXLine { neck: c } => {
                [c * v.cosh() * u.cos(), c * v.cosh() * u.sin(), c * v, p[2]]
            }
        }
    }

    fn frame(&self, p: &Param) -> Frame {
        let (u, v) = (p[0], p[1]);
        let mut tangents = [[0.0; MAX_AMBIENT]; MAX_INTRINSIC];
        match *self {
            SurfaceId::Plane => {
                tangents[0] = [1.0, 0.0, 0.0, 0.0];
                tangents[1] = [0.0, 1.0, 0.0, 0.0];
            }
            SurfaceId::Catenoid { neck: c } | SurfaceId::CatenoidXLine { neck: c } => {
                let (ch, sh) = (v.cosh(), v.sinh());
                let (cu, su) = (u.cos(), u.sin());
                tangents[0] = [-c * ch * su, c * ch * cu, 0.0, 0.0];
                tangents[1] = [c * sh * cu, c * sh * su, c, 0.0];
                tangents[2] = [0.0, 0.0, 0.0, 1.0];
            }
            SurfaceId::Helicoid => {
                tangents[0] = [-v * u.sin(), v * u.cos(), 1.0, 0.0];
                tangents[1] = [u.cos(), u.sin(), 0.0, 0.0];
            }
            SurfaceId::Enneper => {
                tangents[0] = [1.0 - u * u + v * v, -2.0 * u * v, 2.0 * u, 0.0];
                tangents[1] = [2.0 * u * v, -1.0 + v * v - u * u, -2.0 * v, 0.0];
            }
        }
        Frame {
            intrinsic_dim: self.intrinsic_dim(),
            ambient_dim: self.ambient_dim(),
            position: self.position(p),
            tangents,
        }
    }

    fn gaussian_curvature(&self, p: &Param) -> Option<f64> {
        let (u, v) = (p[0], p[1]);
        match *self {
            SurfaceId::Plane => Some(0.0),
            SurfaceId::Catenoid { neck: c } => Some(-1.0 / (c * c * v.cosh().powi(4))),
            SurfaceId::Helicoid => Some(-1.0 / (1.0 + v * v).powi(2)),
            SurfaceId::Enneper => Some(-4.0 / (1.0 + u * u + v * v).powi(4)),
            SurfaceId::CatenoidXLine { .. } => None,
        }
    }
}

/// User-supplied immersion with a finite-difference Jacobian.
pub struct CustomImmersion {
    intrinsic_dim: usize,
    ambient_dim: usize,
    fd_step: f64,
    map: Box<dyn Fn(&Param) -> [f64; MAX_AMBIENT] + Send + Sync>,
}

impl fmt::Debug for CustomImmersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomImmersion")
            .field("intrinsic_dim", &self.intrinsic_dim)
            .field("ambient_dim", &self.ambient_dim)
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl CustomImmersion {
    /// `fd_step` should be about `1e-5` times the parameter domain scale.
    pub fn new(
        intrinsic_dim: usize,
        ambient_dim: usize,
        fd_step: f64,
        map: impl Fn(&Param) -> [f64; MAX_AMBIENT] + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(2..=MAX_INTRINSIC).contains(&intrinsic_dim)
            || ambient_dim > MAX_AMBIENT
            || ambient_dim <= intrinsic_dim
        {
            return Err(Error::InvalidInput(format!(
                "unsupported dimensions m={intrinsic_dim}, n={ambient_dim}"
            )));
        }
        if !(fd_step > 0.0) {
            return Err(Error::InvalidInput("finite-difference step must be positive".into()));
        }
        Ok(CustomImmersion { intrinsic_dim, ambient_dim, fd_step, map: Box::new(map) })
    }
}

impl Immersion for CustomImmersion {
    fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }
    fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }
    fn position(&self, p: &Param) -> [f64; MAX_AMBIENT] {
        (self.map)(p)
    }
    fn frame(&self, p: &Param) -> Frame {
        finite_difference_frame(self, p, self.fd_step)
    }
}

/// Axis-aligned parameter box; periodic axes are identified modulo their length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamDomain {
    pub dim: usize,
    pub lo: Param,
    pub hi: Param,
    pub periodic: [bool; MAX_INTRINSIC],
}

impl ParamDomain {
    pub fn new(lo: &[f64], hi: &[f64], periodic: &[bool]) -> Result<Self> {
        let dim = lo.len();
        if dim != hi.len() || dim != periodic.len() || !(1..=MAX_INTRINSIC).contains(&dim) {
            return Err(Error::InvalidInput("parameter domain dimensions disagree".into()));
        }
        let mut d = ParamDomain {
            dim,
            lo: [0.0; MAX_INTRINSIC],
            hi: [0.0; MAX_INTRINSIC],
            periodic: [false; MAX_INTRINSIC],
        };
        for a in 0..dim {
            if !(hi[a] > lo[a]) {
                return Err(Error::InvalidInput(format!("empty parameter interval on axis {a}")));
            }
            d.lo[a] = lo[a];
            d.hi[a] = hi[a];
            d.periodic[a] = periodic[a];
        }
        Ok(d)
    }

    pub fn contains(&self, p: &Param) -> bool {
        (0..self.dim).all(|a| self.periodic[a] || (p[a] >= self.lo[a] && p[a] <= self.hi[a]))
    }
}

/// An immersion restricted to a parameter box, with its coverage certificate.
#[derive(Clone)]
pub struct Chart {
    immersion: Arc<dyn Immersion>,
    surface: Option<SurfaceId>,
    domain: ParamDomain,
    resolution: usize,
    covered_radius: f64,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("surface", &self.surface)
            .field("domain", &self.domain)
            .field("resolution", &self.resolution)
            .field("covered_radius", &self.covered_radius)
            .finish()
    }
}

/// Minimum of `t` on the non-periodic faces of the box, sampled on a grid
/// four times finer than the chart resolution.
fn boundary_min_distance(imm: &dyn Immersion, domain: &ParamDomain, resolution: usize) -> f64 {
    let m = domain.dim;
    let samples = 4 * resolution.max(64) + 1;
    let mut best = f64::INFINITY;
    for axis in 0..m {
        if domain.periodic[axis] {
            continue;
        }
        let others: Vec<usize> = (0..m).filter(|&a| a != axis).collect();
        let count = samples.pow(others.len() as u32);
        for side in [domain.lo[axis], domain.hi[axis]] {
            for idx in 0..count {
                let mut p = [0.0; MAX_INTRINSIC];
                p[axis] = side;
                let mut rem = idx;
                for &a in &others {
                    let k = rem % samples;
                    rem /= samples;
                    let frac = k as f64 / (samples - 1) as f64;
                    p[a] = domain.lo[a] + frac * (domain.hi[a] - domain.lo[a]);
                }
                let x = imm.position(&p);
                best = best.min(dot(&x, &x).sqrt());
            }
        }
    }
    best
}

/// Smallest `V > 0` with `neck · √(cosh²V + V²) >= target`.
fn catenoid_half_height(neck: f64, target: f64) -> f64 {
    let f = |v: f64| neck * (v.cosh().powi(2) + v * v).sqrt() - target;
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    while f(b) < 0.0 {
        b *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if f(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    b
}

/// Chart for a catalog surface whose box covers `{t <= r_max}` with
/// [`COVERAGE_MARGIN`] to spare. `resolution` is the number of grid cells per
/// parameter axis used by downstream quadrature.
pub fn catalog(surface: SurfaceId, r_max: f64, resolution: usize) -> Result<Chart> {
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::InvalidInput(format!("r_max must be positive, got {r_max}")));
    }
    if resolution < 16 {
        return Err(Error::InvalidInput(format!("resolution must be >= 16, got {resolution}")));
    }
    let min_t = surface.min_distance();
    if r_max <= min_t {
        return Err(Error::EmptyBall { r: r_max, min_t });
    }
    let target = r_max * (1.0 + COVERAGE_MARGIN);
    let periodic = surface.periodic_axes();
    let domain = match surface {
        SurfaceId::Plane | SurfaceId::Helicoid => {
            ParamDomain::new(&[-target, -target], &[target, target], &periodic[..2])?
        }
        SurfaceId::Catenoid { neck } => {
            let v = catenoid_half_height(neck, target);
            ParamDomain::new(&[0.0, -v], &[2.0 * PI, v], &periodic[..2])?
        }
        SurfaceId::CatenoidXLine { neck } => {
            let v = catenoid_half_height(neck, target);
            ParamDomain::new(&[0.0, -v, -target], &[2.0 * PI, v, target], &periodic[..3])?
        }
        SurfaceId::Enneper => {
            let scan = |p: f64| {
                let d = ParamDomain::new(&[-p, -p], &[p, p], &[false, false]).expect("valid box");
                boundary_min_distance(&surface, &d, resolution)
            };
            let mut hi = 1.0;
            while scan(hi) < target {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if scan(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            ParamDomain::new(&[-hi, -hi], &[hi, hi], &[false, false])?
        }
    };
    let covered_radius = boundary_min_distance(&surface, &domain, resolution);
    if covered_radius < r_max {
        return Err(Error::Coverage(format!(
            "{} chart boundary reaches t={covered_radius} < r_max={r_max}",
            surface.name()
        )));
    }
    Ok(Chart {
        immersion: Arc::new(surface),
        surface: Some(surface),
        domain,
        resolution,
        covered_radius,
    })
}

impl Chart {
    /// Chart for a user-supplied immersion; the coverage radius comes from a
    /// boundary scan.
    pub fn custom(immersion: Arc<dyn Immersion>, domain: ParamDomain, resolution: usize) -> Result<Self> {
        if domain.dim != immersion.intrinsic_dim() {
            return Err(Error::InvalidInput("domain and immersion dimensions disagree".into()));
        }
        if resolution < 2 {
            return Err(Error::InvalidInput(format!("resolution must be >= 2, got {resolution}")));
        }
        let covered_radius = boundary_min_distance(immersion.as_ref(), &domain, resolution);
        Ok(Chart { immersion, surface: None, domain, resolution, covered_radius })
    }

    /// Same chart with a different grid resolution.
    pub fn with_resolution(&self, resolution: usize) -> Self {
        Chart { resolution, ..self.clone() }
    }

    pub fn immersion(&self) -> &dyn Immersion {
        self.immersion.as_ref()
    }

    pub fn surface(&self) -> Option<SurfaceId> {
        self.surface
    }

    pub fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.domain.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.immersion.ambient_dim()
    }

    /// Every `Ω_r` with `r <= covered_radius` lies inside the chart.
    pub fn covered_radius(&self) -> f64 {
        self.covered_radius
    }

    /// Known lower bound for `t` over the chart (exact for catalog surfaces,
    /// grid-sampled otherwise).
    pub fn min_distance(&self) -> f64 {
        match self.surface {
            Some(s) => s.min_distance(),
            None => self.sampled_min_distance(),
        }
    }

    /// `min t` over the chart grid nodes.
    pub fn sampled_min_distance(&self) -> f64 {
        let n = self.resolution;
        let m = self.domain.dim;
        let per_axis = n + 1;
        let mut best = f64::INFINITY;
        for idx in 0..per_axis.pow(m as u32) {
            let mut p = [0.0; MAX_INTRINSIC];
            let mut rem = idx;
            for (a, pa) in p.iter_mut().enumerate().take(m) {
                let k = rem % per_axis;
                rem /= per_axis;
                *pa = self.domain.lo[a] + (self.domain.hi[a] - self.domain.lo[a]) * k as f64 / n as f64;
            }
            best = best.min(self.extrinsic_distance(&p));
        }
        best
    }

    pub fn frame(&self, p: &Param) -> Frame {
        self.immersion.frame(p)
    }

    pub fn position(&self, p: &Param) -> [f64; MAX_AMBIENT] {
        self.immersion.position(p)
    }

    /// `t(x) = ‖ξ(x)‖`.
    pub fn extrinsic_distance(&self, p: &Param) -> f64 {
        let x = self.immersion.position(p);
        dot(&x, &x).sqrt()
    }

    /// `|grad t|²` at a parameter point; at most 1 since it is the squared
    /// length of the tangential projection of the unit radial vector.
    pub fn grad_t_norm_sq(&self, p: &Param) -> Result<f64> {
        let frame = self.immersion.frame(p);
        if frame.distance() == 0.0 {
            return Err(Error::UndefinedGradient);
        }
        if frame.metric_inverse().is_none() {
            return Err(Error::Degenerate(format!("singular induced metric at {p:?}")));
        }
        Ok(frame.local().grad_t_sq)
    }

    pub fn gaussian_curvature(&self, p: &Param) -> Option<f64> {
        self.immersion.gaussian_curvature(p)
    }

    /// Check that `{t <= r}` is covered with room for a differencing window.
    pub fn require_covered(&self, r: f64) -> Result<()> {
        if r > self.covered_radius {
            return Err(Error::Coverage(format!(
                "radius {r} exceeds chart coverage radius {}",
                self.covered_radius
            )));
        }
        Ok(())
    }

    /// Check that `Ω_r` is not empty.
    pub fn require_nonempty(&self, r: f64) -> Result<()> {
        let min_t = self.min_distance();
        if r <= min_t {
            return Err(Error::EmptyBall { r, min_t });
        }
        Ok(())
    }
}
