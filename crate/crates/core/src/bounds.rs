//! Upper bounds for `inf σ_ess`: the `m β` growth bound, the INS and Brooks
//! exponential-growth bounds, and the density, curvature and Gaussian-moment
//! corollaries.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::growth::{euclidean_ball_volume, tail_start, GrowthProfile};
use crate::immersions::{Chart, Param, MAX_AMBIENT, MAX_INTRINSIC};
use crate::model_manifold::{completeness_check, WarpingFunction};
use crate::quadrature::BallIntegrator;

/// Exponents at or below this count as zero when deciding whether a
/// corollary's "then `inf σ_ess = 0`" conclusion fires.
pub const ZERO_EXPONENT: f64 = 1e-3;
pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_SIGMAS: [f64; 3] = [0.05, 0.1, 1.0];
/// The tube radius is capped at this fraction of the estimated reach.
pub const REACH_FRACTION: f64 = 0.1;
/// Grid nodes per axis for the reach estimate.
pub const REACH_SAMPLES: usize = 48;
/// Points used for the local growth rate past the last radius.
const EXTRAPOLATION_POINTS: usize = 8;

/// A bound value with the finite-range sequence it was taken from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthBound {
    pub value: f64,
    pub r: Vec<f64>,
    /// Per-radius estimates; `None` where the ball is empty.
    pub sequence: Vec<Option<f64>>,
    pub tail_start: usize,
}

impl GrowthBound {
    /// `max - min` of the sequence over the tail window.
    pub fn tail_spread(&self) -> f64 {
        let tail = self.sequence[self.tail_start..].iter().flatten();
        let (lo, hi) = tail.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        if hi >= lo {
            hi - lo
        } else {
            0.0
        }
    }
}

/// `m · liminf log vol(Ω_r) / r²`, the liminf read as the tail minimum.
/// Negative values (volumes below 1) are returned as they are.
pub fn theorem1_bound(profile: &GrowthProfile, tail_fraction: f64) -> Result<GrowthBound> {
    let exps = profile.growth_exponents(tail_fraction)?;
    let m = profile.m as f64;
    Ok(GrowthBound {
        value: m * exps.beta_tail,
        r: profile.r_grid.clone(),
        sequence: exps.beta.iter().map(|b| b.map(|b| m * b)).collect(),
        tail_start: exps.tail_start,
    })
}

/// `(liminf log vol(Ω_r) / r)² / 4`, with a negative rate read as zero.
pub fn ins_bound(profile: &GrowthProfile, tail_fraction: f64) -> Result<GrowthBound> {
    let exps = profile.growth_exponents(tail_fraction)?;
    let sq = |mu: f64| mu.max(0.0).powi(2) / 4.0;
    Ok(GrowthBound {
        value: sq(exps.mu_tail),
        r: profile.r_grid.clone(),
        sequence: exps.mu.iter().map(|m| m.map(sq)).collect(),
        tail_start: exps.tail_start,
    })
}

/// Points on which the Brooks rate is sampled.
pub const BROOKS_POINTS: usize = 200;

/// `μ² / 4` with `μ = liminf log V(r) / r` for geodesic balls of the model `𝕄ⁿ_h`.
pub fn brooks_intrinsic_bound(w: &WarpingFunction, n: usize, tail_fraction: f64) -> Result<GrowthBound> {
    let report = completeness_check(w.curvature());
    if report.complete == Some(false) {
        return Err(Error::NotApplicable(format!("model is not complete: {}", report.diagnostic)));
    }
    if w.truncated() {
        return Err(Error::NotApplicable(format!(
            "warping function vanishes at r={:?}; the model closes up",
            w.blowdown_radius()
        )));
    }
    let r_max = w.r_max_solved();
    let radii: Vec<f64> = (1..=BROOKS_POINTS).map(|i| r_max * i as f64 / BROOKS_POINTS as f64).collect();
    let vols = w.ball_volumes(n, &radii)?;
    let start = tail_start(radii.len(), tail_fraction)?;
    let mu: Vec<Option<f64>> = radii.iter().zip(&vols).map(|(r, v)| Some(v.ln() / r)).collect();
    let mu_tail = mu[start..].iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let sq = |m: f64| m.max(0.0).powi(2) / 4.0;
    Ok(GrowthBound {
        value: sq(mu_tail),
        r: radii,
        sequence: mu.iter().map(|m| m.map(sq)).collect(),
        tail_start: start,
    })
}

/// Density exponent `log Θ(r) / r²` and the bound `m ·` its tail minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corollary1 {
    pub exponents: Vec<Option<f64>>,
    pub exponent_tail: f64,
    pub implied_bound: f64,
    /// The tail exponent is numerically zero, so `inf σ_ess = 0`.
    pub conclusion_fires: bool,
}

pub fn corollary1_check(profile: &GrowthProfile, tail_fraction: f64) -> Result<Corollary1> {
    let start = tail_start(profile.len(), tail_fraction)?;
    // log Θ straight from log vol, so synthetic profiles cancel exactly
    let exponents: Vec<Option<f64>> = (0..profile.len())
        .map(|i| {
            let r = profile.r_grid[i];
            (!profile.empty[i]).then(|| {
                (profile.log_volumes[i] - euclidean_ball_volume(profile.m, r).ln()) / (r * r)
            })
        })
        .collect();
    if exponents[start..].iter().any(Option::is_none) {
        return Err(Error::InvalidInput("empty extrinsic ball inside the tail window".into()));
    }
    let exponent_tail = exponents[start..].iter().flatten().copied().fold(f64::INFINITY, f64::min);
    Ok(Corollary1 {
        exponents,
        exponent_tail,
        implied_bound: profile.m as f64 * exponent_tail,
        conclusion_fires: exponent_tail <= ZERO_EXPONENT,
    })
}

fn require_surface_in_r3(chart: &Chart) -> Result<()> {
    if chart.intrinsic_dim() != 2 || chart.ambient_dim() != 3 {
        return Err(Error::NotApplicable(format!(
            "not a surface in R^3 (dimension {} in R^{})",
            chart.intrinsic_dim(),
            chart.ambient_dim()
        )));
    }
    Ok(())
}

/// Compass search for a local minimum of `f` inside the chart box, starting
/// from a sampled minimizer `p` with initial step `step`.
fn polish_min<F: Fn(&Param) -> Option<f64>>(chart: &Chart, f: F, mut p: Param, mut best: f64, mut step: f64) -> f64 {
    let m = chart.intrinsic_dim();
    let d = chart.domain();
    while step > 1e-10 {
        let mut improved = false;
        for a in 0..m {
            for sign in [-1.0, 1.0] {
                let mut q = p;
                q[a] += sign * step;
                if !d.periodic[a] && !(q[a] >= d.lo[a] && q[a] <= d.hi[a]) {
                    continue;
                }
                if let Some(v) = f(&q) {
                    if v < best {
                        best = v;
                        p = q;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// `κ(r) = inf_{Ω_r} K` at each radius: the sampled minimum refined by a
/// local search, then made non-increasing in `r`.
pub fn kappa_profile(q: &BallIntegrator, radii: &[f64]) -> Result<Vec<f64>> {
    let chart = q.chart();
    require_surface_in_r3(chart)?;
    if chart.gaussian_curvature(&[0.0; MAX_INTRINSIC]).is_none() {
        return Err(Error::NotApplicable("Gaussian curvature not available for this chart".into()));
    }
    let d = chart.domain();
    let cell = (0..2).map(|a| (d.hi[a] - d.lo[a]) / q.resolution() as f64).fold(0.0, f64::max);
    let mut out = Vec::with_capacity(radii.len());
    let mut running = f64::INFINITY;
    for &r in radii {
        chart.require_nonempty(r)?;
        let (v, p) = q
            .argmin_over_ball(r, |pd| pd.curvature)?
            .ok_or_else(|| Error::EmptyBall { r, min_t: chart.min_distance() })?;
        let inside = |x: &Param| {
            if chart.extrinsic_distance(x) < r {
                chart.gaussian_curvature(x)
            } else {
                None
            }
        };
        running = running.min(polish_min(chart, inside, p, v, cell));
        out.push(running);
    }
    Ok(out)
}

fn unit_normal(chart: &Chart, p: &Param) -> [f64; 3] {
    let f = chart.frame(p);
    let (a, b) = (f.tangents[0], f.tangents[1]);
    let n = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    [n[0] / len, n[1] / len, n[2] / len]
}

/// Reach of `ξ(Ω_r)` from sampled pairs, `inf |q - p|² / (2 |⟨q - p, ν(p)⟩|)`.
/// Infinite for planar samples.
pub fn reach_estimate(chart: &Chart, r: f64, samples: usize) -> Result<f64> {
    require_surface_in_r3(chart)?;
    let d = chart.domain();
    let mut pts: Vec<([f64; MAX_AMBIENT], [f64; 3])> = Vec::new();
    for i in 0..samples {
        for j in 0..samples {
            let mut p = [0.0; MAX_INTRINSIC];
            for (a, k) in [(0, i), (1, j)] {
                // half-open on periodic axes so the seam is not sampled twice
                let denom = if d.periodic[a] { samples } else { samples - 1 } as f64;
                p[a] = d.lo[a] + (d.hi[a] - d.lo[a]) * k as f64 / denom;
            }
            if chart.extrinsic_distance(&p) < r {
                pts.push((chart.position(&p), unit_normal(chart, &p)));
            }
        }
    }
    let mut reach = f64::INFINITY;
    for (x, nu) in &pts {
        for (y, _) in &pts {
            let dv = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
            let dist2 = dv[0] * dv[0] + dv[1] * dv[1] + dv[2] * dv[2];
            let normal = (dv[0] * nu[0] + dv[1] * nu[1] + dv[2] * nu[2]).abs();
            if dist2 > 0.0 && normal > 1e-12 * dist2.sqrt() {
                reach = reach.min(dist2 / (2.0 * normal));
            }
        }
    }
    Ok(reach)
}

/// Tube-volume and derived volume inequalities at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubularRow {
    pub r: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub volume: f64,
    pub total_curvature: f64,
    /// `2ε vol + (2ε²/3) ∫K`.
    pub tube_volume: f64,
    /// `(4π/3)(ε + r)³`.
    pub ball_volume: f64,
    pub tube_ok: bool,
    /// `4π/(18α(1-α)) (r - 3α/κ)³ (-κ)`.
    pub volume_bound: f64,
    pub volume_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corollary2 {
    pub alpha: f64,
    pub reach: f64,
    /// `κ ≡ 0`: the surface is flat and the conclusion is immediate.
    pub trivial: bool,
    pub tail_r: Vec<f64>,
    pub tail_kappa: Vec<f64>,
    /// `log |κ(r)| / r²` on the tail window.
    pub exponents: Vec<f64>,
    pub exponent_tail: Option<f64>,
    pub conclusion_fires: bool,
    /// `m · min log(volume_bound(r)) / r²` over the tail.
    pub implied_bound: Option<f64>,
    pub rows: Vec<TubularRow>,
    pub pass: bool,
}

fn derived_volume_bound(alpha: f64, r: f64, kappa: f64) -> f64 {
    4.0 * std::f64::consts::PI / (18.0 * alpha * (1.0 - alpha)) * (r - 3.0 * alpha / kappa).powi(3) * (-kappa)
}

/// Curvature corollary on an embedded surface: `κ` exponent on the profile's
/// tail and the tube inequalities at `radii`.
pub fn corollary2_bound(
    q: &BallIntegrator,
    profile: &GrowthProfile,
    alpha: f64,
    radii: &[f64],
    tail_fraction: f64,
) -> Result<Corollary2> {
    let chart = q.chart();
    require_surface_in_r3(chart)?;
    if chart.surface().is_some_and(|s| !s.is_embedded()) {
        return Err(Error::NotApplicable("not embedded".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let start = tail_start(profile.len(), tail_fraction)?;
    let tail_r = profile.r_grid[start..].to_vec();
    let tail_kappa = kappa_profile(q, &tail_r)?;
    let trivial = tail_kappa.iter().all(|k| k.abs() < 1e-14);
    if trivial {
        return Ok(Corollary2 {
            alpha,
            reach: f64::INFINITY,
            trivial,
            tail_r,
            tail_kappa,
            exponents: Vec::new(),
            exponent_tail: None,
            conclusion_fires: true,
            implied_bound: None,
            rows: Vec::new(),
            pass: true,
        });
    }
    let exponents: Vec<f64> = tail_r.iter().zip(&tail_kappa).map(|(r, k)| k.abs().ln() / (r * r)).collect();
    let exponent_tail = exponents.iter().copied().fold(f64::INFINITY, f64::min);
    let m = profile.m as f64;
    let implied = tail_r
        .iter()
        .zip(&tail_kappa)
        .map(|(&r, &k)| m * derived_volume_bound(alpha, r, k).ln() / (r * r))
        .fold(f64::INFINITY, f64::min);

    let r_top = radii.iter().copied().fold(0.0, f64::max);
    let reach = reach_estimate(chart, r_top, REACH_SAMPLES)?;
    let kappas = kappa_profile(q, radii)?;
    let vk = q.profile(radii, |pd| [1.0, pd.curvature.unwrap_or(f64::NAN)])?;
    let mut rows = Vec::with_capacity(radii.len());
    for ((&r, &kappa), [volume, total_curvature]) in radii.iter().zip(&kappas).zip(vk) {
        let eps_alpha = if kappa < 0.0 { -3.0 * alpha / kappa } else { f64::INFINITY };
        let epsilon = eps_alpha.min(REACH_FRACTION * reach);
        let tube_volume = 2.0 * epsilon * volume + 2.0 * epsilon * epsilon / 3.0 * total_curvature;
        let ball_volume = 4.0 * std::f64::consts::PI / 3.0 * (epsilon + r).powi(3);
        let volume_bound = if kappa < 0.0 { derived_volume_bound(alpha, r, kappa) } else { f64::INFINITY };
        rows.push(TubularRow {
            r,
            kappa,
            epsilon,
            volume,
            total_curvature,
            tube_volume,
            ball_volume,
            tube_ok: tube_volume <= ball_volume,
            volume_bound,
            volume_ok: volume <= volume_bound,
        });
    }
    let pass = rows.iter().all(|r| r.tube_ok && r.volume_ok);
    Ok(Corollary2 {
        alpha,
        reach,
        trivial,
        tail_r,
        tail_kappa,
        exponents,
        exponent_tail: Some(exponent_tail),
        conclusion_fires: exponent_tail <= ZERO_EXPONENT,
        implied_bound: Some(implied),
        rows,
        pass,
    })
}

/// `vol(Ω_r) ≤ e^{σr²} C` at one radius, compared as `e^{-σr²} vol / C - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub r: f64,
    pub weighted_volume: f64,
    pub excess: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corollary3 {
    pub sigma: f64,
    /// `∫_{Ω_R} e^{-σt²}` by quadrature, `R` the last profile radius.
    pub moment_covered: f64,
    /// `Σ e^{-σ r_k²} (vol(Ω_{r_{k+1}}) - vol(Ω_{r_k}))` on the profile grid,
    /// an upper sum for the same integral.
    pub stieltjes_upper: f64,
    /// Power-law extrapolation of `∫_{M∖Ω_R} e^{-σt²}`.
    pub tail_estimate: Option<f64>,
    /// `moment_covered + tail_estimate`.
    pub moment: Option<f64>,
    pub local_exponent: f64,
    /// Local `d log vol / d(r²)` at the end of the profile.
    pub local_rate: f64,
    /// The measured growth is too fast for the weight: finiteness is not decided.
    pub finiteness_undecided: bool,
    /// `m σ`.
    pub bound: f64,
    pub rows: Vec<MomentRow>,
    pub pass: bool,
}

/// Gaussian moment `∫ e^{-σ‖ξ‖²}` with its tail estimate, the bound `m σ`
/// and the pointwise inequality `vol(Ω_r) ≤ e^{σr²} C` on `radii`.
pub fn gaussian_moment(
    q: &BallIntegrator,
    profile: &GrowthProfile,
    sigma: f64,
    radii: &[f64],
    slack: f64,
) -> Result<Corollary3> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")));
    }
    let big_r = profile.r_max();
    let [moment_covered] = q.integrate(big_r, |pd| [(-sigma * pd.t * pd.t).exp()])?;

    let mut stieltjes_upper = 0.0;
    let mut prev = (profile.t_min, 0.0);
    for (&r, &v) in profile.r_grid.iter().zip(&profile.volumes) {
        stieltjes_upper += (-sigma * prev.0 * prev.0).exp() * (v - prev.1);
        prev = (r, v);
    }

    let n = profile.len();
    let k = n.saturating_sub(EXTRAPOLATION_POINTS);
    let (r0, r1) = (profile.r_grid[k], profile.r_grid[n - 1]);
    let (l0, l1) = (profile.log_volumes[k], profile.log_volumes[n - 1]);
    let local_exponent = (l1 - l0) / (r1.ln() - r0.ln());
    let local_rate = (l1 - l0) / (r1 * r1 - r0 * r0);
    let finiteness_undecided = !(local_rate < sigma) || !local_exponent.is_finite();
    let tail_estimate = (!finiteness_undecided).then(|| {
        let p = local_exponent.max(0.0);
        if p == 0.0 {
            return 0.0;
        }
        // vol(Ω_R) (s/R)^p beyond R: ∫_R^∞ e^{-σs²} dV = V p/2 (σR²)^{-p/2} Γ(p/2, σR²)
        let x = sigma * big_r * big_r;
        let a = p / 2.0;
        let q = gamma_ur(a, x);
        if q == 0.0 {
            return 0.0;
        }
        (l1 + (p / 2.0).ln() - a * x.ln() + ln_gamma(a) + q.ln()).exp()
    });
    let moment = tail_estimate.map(|t| moment_covered + t);

    let mut rows = Vec::with_capacity(radii.len());
    if let Some(c) = moment {
        let vols = q.volumes(radii)?;
        for (&r, &v) in radii.iter().zip(&vols) {
            let weighted_volume = (-sigma * r * r).exp() * v;
            let excess = weighted_volume / c - 1.0;
            rows.push(MomentRow { r, weighted_volume, excess, pass: excess <= slack });
        }
    }
    let pass = !finiteness_undecided && rows.iter().all(|r| r.pass);
    Ok(Corollary3 {
        sigma,
        moment_covered,
        stieltjes_upper,
        tail_estimate,
        moment,
        local_exponent,
        local_rate,
        finiteness_undecided,
        bound: profile.m as f64 * sigma,
        rows,
        pass,
    })
}
