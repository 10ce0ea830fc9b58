//! Rotationally symmetric model manifolds `[0, R_h) x S^{n-1}` with metric
//! `dρ² + h(ρ)² dθ²`.
//!
//! The warping function solves `h'' = G h`, `h(0) = 0`, `h'(0) = 1` where `G`
//! is the (negated) radial sectional curvature. `G ≡ 0` gives Euclidean space,
//! `G ≡ 1` the hyperbolic space of curvature -1 and `G ≡ -1` the round sphere
//! (with `R_h = π`).
//!
//! The ODE is integrated with classical fixed-step RK4; all integrals of `h`
//! use the composite trapezoid rule on the solver grid.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Default RK4 step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Documented bound on `max |h_num - h_exact| / max(1, |h_exact|)` for the
/// closed-form profiles at the default step.
pub const SOLVER_TOLERANCE: f64 = 1e-8;

/// The radial curvature function `G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurvatureProfile {
    Zero,
    Constant { value: f64 },
    /// Samples of `G` on `s >= 0`, linearly interpolated. `s` must be strictly
    /// increasing and start at 0.
    Table { s: Vec<f64>, g: Vec<f64> },
}

impl CurvatureProfile {
    pub fn euclidean() -> Self {
        CurvatureProfile::Zero
    }

    pub fn hyperbolic() -> Self {
        CurvatureProfile::Constant { value: 1.0 }
    }

    pub fn spherical() -> Self {
        CurvatureProfile::Constant { value: -1.0 }
    }

    pub fn tag(&self) -> String {
        match self {
            CurvatureProfile::Zero => "zero".to_string(),
            CurvatureProfile::Constant { value } => format!("constant:{value}"),
            CurvatureProfile::Table { s, .. } => format!("table:{}", s.len()),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CurvatureProfile::Zero => Ok(()),
            CurvatureProfile::Constant { value } => {
                if value.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidInput(format!("non-finite curvature constant {value}")))
                }
            }
            CurvatureProfile::Table { s, g } => {
                if s.len() != g.len() || s.len() < 2 {
                    return Err(Error::InvalidInput(
                        "curvature table needs at least two (s, G) pairs of equal length".into(),
                    ));
                }
                if s[0] != 0.0 {
                    return Err(Error::InvalidInput("curvature table must start at s=0".into()));
                }
                if s.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidInput(
                        "curvature table abscissae must be strictly increasing".into(),
                    ));
                }
                if let Some(bad) = g.iter().chain(s.iter()).find(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput(format!("non-finite curvature sample {bad}")));
                }
                Ok(())
            }
        }
    }

    /// `G(s)` for `s >= 0`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        match self {
            CurvatureProfile::Zero => Ok(0.0),
            CurvatureProfile::Constant { value } => Ok(*value),
            CurvatureProfile::Table { s: xs, g } => {
                let s = s.abs();
                let last = *xs.last().expect("validated table");
                if s > last * (1.0 + 1e-12) {
                    return Err(Error::OutOfRange { value: s, max: last });
                }
                let i = xs.partition_point(|&x| x <= s).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let tau = ((s - x0) / (x1 - x0)).clamp(0.0, 1.0);
                Ok(g[i - 1] + tau * (g[i] - g[i - 1]))
            }
        }
    }
}

/// Outcome of the completeness criterion `G₋ ∈ L¹(ℝ⁺)` and
/// `∫_t^∞ G₋(s) ds <= 1/(4t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletenessReport {
    /// `None` when the criterion cannot be decided from the representation.
    pub complete: Option<bool>,
    pub diagnostic: String,
}

pub fn completeness_check(curvature: &CurvatureProfile) -> CompletenessReport {
    match curvature {
        CurvatureProfile::Zero => CompletenessReport {
            complete: Some(true),
            diagnostic: "negative part of G vanishes identically".into(),
        },
        CurvatureProfile::Constant { value } if *value >= 0.0 => CompletenessReport {
            complete: Some(true),
            diagnostic: "negative part of G vanishes identically".into(),
        },
        CurvatureProfile::Constant { value } => CompletenessReport {
            complete: Some(false),
            diagnostic: format!(
                "G₋ ≡ {} is not integrable on ℝ⁺ (∫_0^∞ G₋ diverges)",
                -value
            ),
        },
        CurvatureProfile::Table { .. } => CompletenessReport {
            complete: None,
            diagnostic: "undecidable: tabulated G carries no tail information".into(),
        },
    }
}

/// Volume of the unit sphere `S^{n-1} ⊂ ℝⁿ`, i.e. `ω_n = 2 π^{n/2} / Γ(n/2)`.
/// The unit `n`-ball has volume `ω_n / n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma(half)
}

/// Solved warping function sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct WarpingFunction {
    curvature: CurvatureProfile,
    step: f64,
    h: Vec<f64>,
    dh: Vec<f64>,
    ddh: Vec<f64>,
    phi_cum: Vec<f64>,
    r_max_solved: f64,
    blowdown_radius: Option<f64>,
    truncated: bool,
}

impl Serialize for WarpingFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let grid: Vec<[f64; 3]> = (0..self.h.len())
            .map(|i| [self.abscissa(i), self.h[i], self.dh[i]])
            .collect();
        let mut st = serializer.serialize_struct("WarpingFunction", 5)?;
        st.serialize_field("G_tag", &self.curvature.tag())?;
        st.serialize_field("h_grid", &grid)?;
        st.serialize_field("r_max", &self.r_max_solved)?;
        st.serialize_field("blowdown", &self.blowdown_radius)?;
        st.serialize_field("truncated", &self.truncated)?;
        st.end()
    }
}

/// Integrates `h'' = G h`, `h(0) = 0`, `h'(0) = 1` on `[0, r_max]`.
///
/// If `h` reaches zero before `r_max` the result is truncated at the last
/// positive sample and `blowdown_radius` records the bisection-refined root.
pub fn solve_warping(curvature: &CurvatureProfile, r_max: f64, step: f64) -> Result<WarpingFunction> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidInput(format!("r_max must be positive, got {r_max}")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
    }
    curvature.validate()?;

    let n = (r_max / step).ceil().max(1.0) as usize;
    let dt = r_max / n as f64;
    let mut h = Vec::with_capacity(n + 1);
    let mut dh = Vec::with_capacity(n + 1);
    let mut ddh = Vec::with_capacity(n + 1);
    h.push(0.0);
    dh.push(1.0);
    ddh.push(0.0);

    let mut blowdown = None;
    let (mut y, mut dy) = (0.0_f64, 1.0_f64);
    for i in 0..n {
        let s = i as f64 * dt;
        let g0 = curvature.eval(s)?;
        let gm = curvature.eval(s + 0.5 * dt)?;
        let g1 = curvature.eval(s + dt)?;
        let k1 = (dy, g0 * y);
        let k2 = (dy + 0.5 * dt * k1.1, gm * (y + 0.5 * dt * k1.0));
        let k3 = (dy + 0.5 * dt * k2.1, gm * (y + 0.5 * dt * k2.0));
        let k4 = (dy + dt * k3.1, g1 * (y + dt * k3.0));
        let y_next = y + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        let dy_next = dy + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !(y_next.is_finite() && dy_next.is_finite()) {
            return Err(Error::InvalidInput(format!("warping function overflowed near s={s}")));
        }
        if y_next <= 0.0 {
            let root = bisect_hermite(s, dt, (y, dy), (y_next, dy_next), dt * 1e-3);
            blowdown = Some(root);
            break;
        }
        y = y_next;
        dy = dy_next;
        h.push(y);
        dh.push(dy);
        ddh.push(g1 * y);
    }

    let truncated = blowdown.is_some();
    let r_max_solved = (h.len() - 1) as f64 * dt;
    let mut phi_cum = Vec::with_capacity(h.len());
    phi_cum.push(0.0);
    for i in 1..h.len() {
        let prev = phi_cum[i - 1];
        phi_cum.push(prev + 0.5 * dt * (h[i - 1] + h[i]));
    }

    Ok(WarpingFunction {
        curvature: curvature.clone(),
        step: dt,
        h,
        dh,
        ddh,
        phi_cum,
        r_max_solved,
        blowdown_radius: blowdown,
        truncated,
    })
}

fn hermite(tau: f64, w: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> f64 {
    let t2 = tau * tau;
    let t3 = t2 * tau;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + tau) * w * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * w * d1
}

fn bisect_hermite(s0: f64, w: f64, left: (f64, f64), right: (f64, f64), tol: f64) -> f64 {
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    while (b - a) * w > tol {
        let mid = 0.5 * (a + b);
        if hermite(mid, w, left.0, left.1, right.0, right.1) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    s0 + 0.5 * (a + b) * w
}

impl WarpingFunction {
    /// Euclidean warping `h(s) = s` solved on `[0, r_max]`.
    pub fn euclidean(r_max: f64) -> Result<Self> {
        solve_warping(&CurvatureProfile::Zero, r_max, DEFAULT_STEP)
    }

    pub fn curvature(&self) -> &CurvatureProfile {
        &self.curvature
    }

    pub fn r_max_solved(&self) -> f64 {
        self.r_max_solved
    }

    pub fn blowdown_radius(&self) -> Option<f64> {
        self.blowdown_radius
    }

    /// True when the requested range was cut short by a zero of `h`.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    /// `(s, h(s), h'(s))` at grid index `i`.
    pub fn sample(&self, i: usize) -> (f64, f64, f64) {
        (self.abscissa(i), self.h[i], self.dh[i])
    }

    pub fn h_samples(&self) -> &[f64] {
        &self.h
    }

    pub fn dh_samples(&self) -> &[f64] {
        &self.dh
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        if !(t >= 0.0) || t > self.r_max_solved * (1.0 + 1e-12) + 1e-14 {
            return Err(Error::OutOfRange { value: t, max: self.r_max_solved });
        }
        let last = self.h.len() - 1;
        if last == 0 {
            return Ok((0, 0.0));
        }
        let i = ((t / self.step).floor() as usize).min(last - 1);
        let tau = ((t - self.abscissa(i)) / self.step).clamp(0.0, 1.0);
        Ok((i, tau))
    }

    /// `h(t)` by cubic Hermite interpolation of the solver samples.
    pub fn h(&self, t: f64) -> Result<f64> {
        let (i, tau) = self.locate(t)?;
        if self.h.len() == 1 {
            return Ok(0.0);
        }
        Ok(hermite(tau, self.step, self.h[i], self.dh[i], self.h[i + 1], self.dh[i + 1]))
    }

    /// `h'(t)`, interpolated with `h'' = G h` as the derivative data.
    pub fn dh(&self, t: f64) -> Result<f64> {
        let (i, tau) = self.locate(t)?;
        if self.h.len() == 1 {
            return Ok(1.0);
        }
        Ok(hermite(tau, self.step, self.dh[i], self.ddh[i], self.dh[i + 1], self.ddh[i + 1]))
    }

    /// `φ(t) = ∫_0^t h(s) ds`.
    pub fn phi(&self, t: f64) -> Result<f64> {
        let (i, tau) = self.locate(t)?;
        if self.h.len() == 1 {
            return Ok(0.0);
        }
        let ht = hermite(tau, self.step, self.h[i], self.dh[i], self.h[i + 1], self.dh[i + 1]);
        let dt = tau * self.step;
        Ok(self.phi_cum[i] + 0.5 * dt * (self.h[i] + ht))
    }

    fn check_below_blowdown(&self, r: f64) -> Result<()> {
        match self.blowdown_radius {
            Some(rh) if r >= rh => Err(Error::OutOfRange { value: r, max: rh }),
            _ => Ok(()),
        }
    }

    /// Geodesic ball volume `V(r) = ω_n ∫_0^r h^{n-1}(s) ds` in the model
    /// `𝕄ⁿ_h`, with `ω_n = vol(S^{n-1})`.
    pub fn ball_volume(&self, n: usize, r: f64) -> Result<f64> {
        Ok(self.ball_volumes(n, &[r])?[0])
    }

    /// `V(r)` for several radii at the cost of a single pass over the grid.
    pub fn ball_volumes(&self, n: usize, radii: &[f64]) -> Result<Vec<f64>> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("model dimension must be >= 2, got {n}")));
        }
        if !radii.iter().all(|&r| r > 0.0) {
            return Err(Error::InvalidInput("ball radius must be positive".into()));
        }
        let power = (n - 1) as i32;
        let mut cum = Vec::with_capacity(self.h.len());
        cum.push(0.0);
        for i in 1..self.h.len() {
            let prev = cum[i - 1];
            cum.push(prev + 0.5 * self.step * (self.h[i - 1].powi(power) + self.h[i].powi(power)));
        }
        let omega = unit_sphere_area(n);
        radii
            .iter()
            .map(|&r| {
                self.check_below_blowdown(r)?;
                let (i, tau) = self.locate(r)?;
                let hr = self.h(r)?;
                let partial = 0.5 * tau * self.step * (self.h[i].powi(power) + hr.powi(power));
                Ok(omega * (cum[i] + partial))
            })
            .collect()
    }

    /// Boundary area `S(r) = ω_n h^{n-1}(r)` of the geodesic ball.
    pub fn sphere_area(&self, n: usize, r: f64) -> Result<f64> {
        self.check_below_blowdown(r)?;
        Ok(unit_sphere_area(n) * self.h(r)?.powi(n as i32 - 1))
    }
}
