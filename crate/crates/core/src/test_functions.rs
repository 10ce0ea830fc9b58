//! Test functions `u_r = φ(r) - φ(t)` on `Ω_r`, their Rayleigh quotients, the
//! functional `F`, the flux inequality and the weak-convergence estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::GrowthProfile;
use crate::model_manifold::WarpingFunction;
use crate::quadrature::{BallIntegrator, PointData};

/// Default relative slack for the chain and flux inequalities.
pub const DEFAULT_SLACK: f64 = 0.02;
/// Half-width of the co-area difference window, relative to `r`.
pub const FLUX_WINDOW: f64 = 0.02;

/// Per-radius Rayleigh data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionProfile {
    pub r: f64,
    /// `∫ |grad u_r|² = ∫_{Ω_r} h(t)² |grad t|²`.
    pub dirichlet_energy: f64,
    /// `∫ u_r²`.
    pub l2_mass: f64,
    pub rayleigh: f64,
    #[serde(rename = "F")]
    pub f_value: f64,
    #[serde(rename = "Fprime")]
    pub f_derivative: f64,
    /// `(m/2)(h'/h)(F'/F)`.
    pub bound_value: f64,
}

/// Energy and mass of `u_r` only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayleighData {
    pub r: f64,
    pub dirichlet_energy: f64,
    pub l2_mass: f64,
    pub rayleigh: f64,
}

fn eval_or_nan(x: Result<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

fn finish(r: f64, energy: f64, mass: f64) -> Result<RayleighData> {
    if !(energy.is_finite() && mass.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "warping function not solved far enough for r={r}"
        )));
    }
    if !(mass > 0.0) {
        return Err(Error::Degenerate(format!("test function at r={r} has zero L² mass")));
    }
    Ok(RayleighData { r, dirichlet_energy: energy, l2_mass: mass, rayleigh: energy / mass })
}

/// `𝓡(u_r)` by quadrature over `Ω_r`.
pub fn rayleigh_quotient(q: &BallIntegrator, w: &WarpingFunction, r: f64) -> Result<RayleighData> {
    q.chart().require_nonempty(r)?;
    let phi_r = w.phi(r)?;
    let [energy, mass] = q.integrate(r, |p: &PointData| {
        let h = eval_or_nan(w.h(p.t));
        let u = phi_r - eval_or_nan(w.phi(p.t));
        [h * h * p.grad_t_sq, u * u]
    })?;
    finish(r, energy, mass)
}

/// `𝓡(u_r)` for many radii from one pass over the grid. The mass is expanded
/// in moments of `φ(t)`, so it loses about one digit against
/// [`rayleigh_quotient`].
pub fn rayleigh_profile(q: &BallIntegrator, w: &WarpingFunction, radii: &[f64]) -> Result<Vec<RayleighData>> {
    for &r in radii {
        q.chart().require_nonempty(r)?;
    }
    let moments = q.profile(radii, |p: &PointData| {
        let h = eval_or_nan(w.h(p.t));
        let phi = eval_or_nan(w.phi(p.t));
        [h * h * p.grad_t_sq, 1.0, phi, phi * phi]
    })?;
    radii
        .iter()
        .zip(moments)
        .map(|(&r, [energy, m0, m1, m2])| {
            let pr = w.phi(r)?;
            finish(r, energy, pr * pr * m0 - 2.0 * pr * m1 + m2)
        })
        .collect()
}

// Three-point Gauss–Legendre on [0, 1].
const GAUSS: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// `(F(r), F'(r))` with `F(r) = ∫_0^r (φ(r) - φ(s)) h(s) vol(Ω_s) ds` and
/// `F'(r) = h(r) ∫_0^r h(s) vol(Ω_s) ds`. The volume is the piecewise-linear
/// interpolant of the profile; each grid interval is integrated by Gauss.
pub fn f_functional(profile: &GrowthProfile, w: &WarpingFunction, r: f64) -> Result<(f64, f64)> {
    if r < profile.r_grid[0] {
        return Err(Error::OutOfRange { value: r, max: profile.r_max() });
    }
    let nodes = profile.nodes_up_to(r)?;
    let phi_r = w.phi(r)?;
    let (mut f, mut g) = (0.0, 0.0);
    for pair in nodes.windows(2) {
        let ((s0, v0), (s1, v1)) = (pair[0], pair[1]);
        let len = s1 - s0;
        if len <= 0.0 {
            continue;
        }
        for (x, wt) in GAUSS {
            let s = s0 + x * len;
            let vol = v0 + x * (v1 - v0);
            let hv = w.h(s)? * vol * wt * len;
            f += (phi_r - w.phi(s)?) * hv;
            g += hv;
        }
    }
    Ok((f, w.h(r)? * g))
}

/// `(m/2)(h'(r)/h(r))(F'(r)/F(r))`.
pub fn rayleigh_bound(profile: &GrowthProfile, w: &WarpingFunction, r: f64) -> Result<f64> {
    let (f, fp) = f_functional(profile, w, r)?;
    if !(f > 0.0) {
        return Err(Error::Degenerate(format!("F({r}) vanishes; the ball is empty")));
    }
    Ok(profile.m as f64 / 2.0 * w.dh(r)? / w.h(r)? * fp / f)
}

/// Full per-radius record: quadrature energies plus the profile-based bound.
pub fn test_function_profile(
    q: &BallIntegrator,
    profile: &GrowthProfile,
    w: &WarpingFunction,
    r: f64,
) -> Result<TestFunctionProfile> {
    let ray = rayleigh_quotient(q, w, r)?;
    let (f, fp) = f_functional(profile, w, r)?;
    Ok(TestFunctionProfile {
        r,
        dirichlet_energy: ray.dirichlet_energy,
        l2_mass: ray.l2_mass,
        rayleigh: ray.rayleigh,
        f_value: f,
        f_derivative: fp,
        bound_value: rayleigh_bound(profile, w, r)?,
    })
}

/// Sides of `∫_{∂Ω_r} |grad t| ≤ m (h'/h)(r) vol(Ω_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxCheck {
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs - 1`; positive values consume slack.
    pub excess: f64,
    pub pass: bool,
}

/// The boundary flux comes from the co-area identity
/// `d/dr ∫_{Ω_r} |grad t|² = ∫_{∂Ω_r} |grad t|`, differenced over `r ± 0.02 r`.
pub fn flux_check(q: &BallIntegrator, w: &WarpingFunction, r: f64, slack: f64) -> Result<FluxCheck> {
    q.chart().require_nonempty(r)?;
    let delta = FLUX_WINDOW * r;
    let covered = q.chart().covered_radius();
    if r + delta > covered {
        return Err(Error::Coverage(format!(
            "flux difference window [{}, {}] leaves the chart (covered to {covered})",
            r - delta,
            r + delta
        )));
    }
    let radii = [r - delta, r, r + delta];
    let ints = q.profile(&radii, |p: &PointData| [p.grad_t_sq, 1.0])?;
    let lhs = (ints[2][0] - ints[0][0]) / (2.0 * delta);
    let m = q.intrinsic_dim() as f64;
    let rhs = m * w.dh(r)? / w.h(r)? * ints[1][1];
    let excess = lhs / rhs - 1.0;
    Ok(FluxCheck { r, lhs, rhs, excess, pass: excess <= slack })
}

/// `∫_{Ω_c} v_r²` against `16 vol(Ω_c) / (9 vol(Ω_{r/2}))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakConvergenceRow {
    pub r: f64,
    pub mass_in_ball: f64,
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakConvergenceReport {
    pub c: f64,
    pub rows: Vec<WeakConvergenceRow>,
    /// Whether `∫_{Ω_c} v_r²` strictly decreases along the radius list.
    pub monotone: bool,
}

/// `inner` must resolve `Ω_c`, `outer` every `Ω_r`. Both may be the same
/// integrator; separate ones let the small ball be resolved finely.
pub fn weak_convergence_check(
    inner: &BallIntegrator,
    outer: &BallIntegrator,
    w: &WarpingFunction,
    c: f64,
    r_list: &[f64],
) -> Result<WeakConvergenceReport> {
    let r_min = r_list.iter().copied().fold(f64::INFINITY, f64::min);
    if !(c < r_min / 2.0) {
        return Err(Error::InvalidInput(format!(
            "inner radius c={c} must be below half the smallest radius ({r_min})"
        )));
    }
    inner.chart().require_nonempty(c)?;
    let vol_c = inner.volume(c)?;
    if !(vol_c > 0.0) {
        return Err(Error::EmptyBall { r: c, min_t: inner.min_node_t() });
    }
    let half: Vec<f64> = r_list.iter().map(|r| r / 2.0).collect();
    let half_vols = outer.volumes(&half)?;
    let mut rows = Vec::with_capacity(r_list.len());
    for (&r, &vol_half) in r_list.iter().zip(&half_vols) {
        let phi_r = w.phi(r)?;
        let u2 = |p: &PointData| {
            let u = phi_r - eval_or_nan(w.phi(p.t));
            [u * u]
        };
        let [num] = inner.integrate(c, u2)?;
        let [den] = outer.integrate(r, u2)?;
        if !(den > 0.0) {
            return Err(Error::Degenerate(format!("test function at r={r} has zero L² mass")));
        }
        let mass = num / den;
        let bound = 16.0 * vol_c / (9.0 * vol_half);
        rows.push(WeakConvergenceRow { r, mass_in_ball: mass, bound, within_bound: mass <= bound });
    }
    let monotone = rows.windows(2).all(|p| p[1].mass_in_ball < p[0].mass_in_ball);
    Ok(WeakConvergenceReport { c, rows, monotone })
}
