//! The cross-checked bound report for one catalog surface.

use serde::{Deserialize, Serialize};

use crate::bounds::{
    corollary1_check, corollary2_bound, gaussian_moment, ins_bound, theorem1_bound, Corollary1, Corollary2,
    Corollary3, GrowthBound, DEFAULT_ALPHA, DEFAULT_SIGMAS,
};
use crate::error::{Error, Result};
use crate::growth::{
    default_r_grid, volume_profile, GrowthExponents, GrowthProfile, DEFAULT_GRID_POINTS, DEFAULT_TAIL_FRACTION,
};
use crate::immersions::{catalog, Immersion, SurfaceId};
use crate::model_manifold::WarpingFunction;
use crate::quadrature::BallIntegrator;
use crate::spectrum::{
    assemble_chart, dirichlet_eigenpair, spectrum_bottom_estimate, Lambda1, DEFAULT_TOLERANCE, MIN_RESOLUTION,
};
use crate::test_functions::{
    flux_check, rayleigh_profile, test_function_profile, FluxCheck, TestFunctionProfile, DEFAULT_SLACK,
    FLUX_WINDOW,
};

pub const SCHEMA: &str = "bound_report/v1";
pub const DEFAULT_R_MAX: f64 = 50.0;
pub const DEFAULT_SAMPLE_RADII: [f64; 5] = [2.0, 5.0, 10.0, 20.0, 50.0];
/// Quadrature consistency allowed when comparing `λ₁(Ω_r)` with `𝓡(u_r)`.
pub const RAYLEIGH_CONSISTENCY: f64 = 0.01;

const ORACLE_NOTE: &str = "lambda1 is a Dirichlet eigenvalue on a bounded ball: it bounds inf sigma(M) from above, \
and inf sigma(M) <= inf sigma_ess(M); comparisons against the essential-spectrum bounds are therefore one-sided";

/// Everything `verify` needs; the CLI fills it from flags and config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub surface: SurfaceId,
    pub r_max: f64,
    pub grid_points: usize,
    /// Cells per axis of the growth-profile quadrature.
    pub resolution: usize,
    /// Cells per axis of the per-radius charts for the inequality suite.
    pub suite_resolution: usize,
    pub spectrum_resolution: usize,
    pub tail_fraction: f64,
    pub slack: f64,
    pub sample_radii: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub alpha: f64,
    pub seed: Option<u64>,
}

impl VerifyConfig {
    pub fn defaults(surface: SurfaceId) -> Self {
        let three = surface.intrinsic_dim() == 3;
        VerifyConfig {
            surface,
            r_max: DEFAULT_R_MAX,
            grid_points: if three { 120 } else { DEFAULT_GRID_POINTS },
            resolution: if three { 48 } else { 200 },
            suite_resolution: if three { 32 } else { 128 },
            spectrum_resolution: if three { 32 } else { 64 },
            tail_fraction: DEFAULT_TAIL_FRACTION,
            slack: DEFAULT_SLACK,
            sample_radii: DEFAULT_SAMPLE_RADII.to_vec(),
            sigmas: DEFAULT_SIGMAS.to_vec(),
            alpha: DEFAULT_ALPHA,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let min_t = self.surface.min_distance();
        if !(self.r_max.is_finite() && self.r_max > min_t) {
            return Err(Error::EmptyBall { r: self.r_max, min_t });
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 0.5) {
            return Err(Error::InvalidInput(format!(
                "tail fraction must lie in (0, 0.5], got {}",
                self.tail_fraction
            )));
        }
        if self.grid_points < 8 {
            return Err(Error::InvalidInput(format!("grid needs at least 8 points, got {}", self.grid_points)));
        }
        if self.resolution < 16 || self.suite_resolution < 16 {
            return Err(Error::InvalidInput("quadrature resolutions must be >= 16".into()));
        }
        if self.spectrum_resolution < MIN_RESOLUTION {
            return Err(Error::InvalidInput(format!(
                "spectrum resolution must be >= {MIN_RESOLUTION}, got {}",
                self.spectrum_resolution
            )));
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return Err(Error::InvalidInput(format!("slack must be non-negative, got {}", self.slack)));
        }
        if self.sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidInput("sigma values must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.sample_radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidInput("sample radii must be positive".into()));
        }
        Ok(())
    }

    /// Sample radii strictly inside `(min t, r_max]`, sorted, with `r_max` appended.
    pub fn radii(&self) -> Vec<f64> {
        let min_t = self.surface.min_distance();
        let mut out: Vec<f64> =
            self.sample_radii.iter().copied().filter(|&r| r > min_t && r < self.r_max).collect();
        out.push(self.r_max);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// A section that may be refused for the surface at hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Section<T> {
    Computed(T),
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSection {
    #[serde(flatten)]
    pub profile: GrowthProfile,
    pub exponents: GrowthExponents,
}

/// `lhs ≤ rhs (1 + slack)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyFlag {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Additive for bound comparisons, relative for the inequality suite.
    pub slack: f64,
    pub pass: bool,
}

/// One-sided inequality with its relative excess.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs - 1`.
    pub excess: f64,
    pub pass: bool,
}

impl Inequality {
    pub fn new(lhs: f64, rhs: f64, slack: f64) -> Self {
        let excess = lhs / rhs - 1.0;
        Inequality { lhs, rhs, excess, pass: excess <= slack }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub r: f64,
    /// `vol(Ω_r)` on the chart sized for this radius.
    pub volume: f64,
    pub flux: FluxCheck,
    /// `𝓡(u_r) ≤ (m/2)(h'/h)(F'/F)`.
    pub chain: Inequality,
    /// `F(r) ≤ vol(Ω_r) φ(r)² / 2`.
    pub f_volume: Inequality,
}

/// Error terms added to the finite bounds before comparing with `λ₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Richardson estimate of the eigenvalue error at `r_max`.
    pub discretization: f64,
    pub comparison_resolution: usize,
    pub comparison_value: f64,
    /// `λ₁(Ω_{r_max})` minus its `L + A/r²` extrapolation over the two largest radii.
    pub finite_r_gap: f64,
    pub extrapolated_limit: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub schema: String,
    pub surface: SurfaceId,
    pub name: String,
    pub m: usize,
    pub n: usize,
    pub config: VerifyConfig,
    pub growth_profile: GrowthSection,
    pub theorem1: GrowthBound,
    pub ins: GrowthBound,
    /// Only defined for model manifolds.
    pub brooks_intrinsic: Option<f64>,
    pub corollary1: Corollary1,
    pub corollary2: Section<Corollary2>,
    pub corollary3: Vec<Corollary3>,
    pub test_functions: Vec<TestFunctionProfile>,
    pub inequality_suite: Vec<SuiteRow>,
    pub lambda1: Vec<Lambda1>,
    pub lambda1_monotone: bool,
    pub oracle_lambda1_tail: f64,
    pub error_budget: ErrorBudget,
    pub consistency_flags: Vec<ConsistencyFlag>,
    pub pass: bool,
    pub note: String,
}

impl BoundReport {
    pub fn failed_flags(&self) -> impl Iterator<Item = &ConsistencyFlag> {
        self.consistency_flags.iter().filter(|f| !f.pass)
    }
}

/// Growth profile on the default grid of `[min t, r_max]`.
pub fn growth_for(config: &VerifyConfig) -> Result<(BallIntegrator, GrowthProfile)> {
    config.validate()?;
    let chart = catalog(config.surface, config.r_max, config.resolution)?;
    let q = BallIntegrator::for_chart(&chart)?;
    let grid = default_r_grid(config.surface.min_distance(), config.r_max, config.grid_points)?;
    let profile = volume_profile(&q, &grid)?;
    Ok((q, profile))
}

/// Chart sized for the flux window around `r`, with a local growth profile.
fn suite_integrator(config: &VerifyConfig, r: f64) -> Result<(BallIntegrator, GrowthProfile)> {
    let chart = catalog(config.surface, r * (1.0 + 1.5 * FLUX_WINDOW), config.suite_resolution)?;
    let q = BallIntegrator::for_chart(&chart)?;
    let grid = default_r_grid(config.surface.min_distance(), r, config.grid_points)?;
    let profile = volume_profile(&q, &grid)?;
    Ok((q, profile))
}

fn suite_row(config: &VerifyConfig, w: &WarpingFunction, r: f64) -> Result<(SuiteRow, TestFunctionProfile)> {
    let (q, profile) = suite_integrator(config, r)?;
    let flux = flux_check(&q, w, r, config.slack)?;
    let tf = test_function_profile(&q, &profile, w, r)?;
    let chain = Inequality::new(tf.rayleigh, tf.bound_value, config.slack);
    let phi = w.phi(r)?;
    let volume = q.volume(r)?;
    let f_volume = Inequality::new(tf.f_value, volume * phi * phi / 2.0, config.slack);
    Ok((SuiteRow { r, volume, flux, chain, f_volume }, tf))
}

/// Eigenvalue at `r` with the given resolution.
fn lambda_at(config: &VerifyConfig, r: f64, resolution: usize) -> Result<Lambda1> {
    let chart = catalog(config.surface, r, resolution.max(16))?;
    let op = assemble_chart(&chart, r, resolution)?;
    Ok(dirichlet_eigenpair(&op, DEFAULT_TOLERANCE, config.seed)?.lambda)
}

/// Resolution compared against the reported one: half when that stays
/// admissible, otherwise one eighth finer.
pub fn comparison_resolution(resolution: usize) -> usize {
    if resolution / 2 >= MIN_RESOLUTION {
        resolution / 2
    } else {
        resolution + resolution.div_ceil(8)
    }
}

/// Second-order Richardson estimate of the error at `a` from values at `a` and `c`.
pub fn richardson_error(a: usize, value_a: f64, c: usize, value_c: f64) -> f64 {
    let (a2, c2) = ((a * a) as f64, (c * c) as f64);
    (value_a - value_c).abs() * c2 / (a2 - c2).abs()
}

/// `L` in `λ₁(Ω_r) ≈ L + A/r²` through the two largest radii, clamped at 0.
pub fn extrapolated_limit(lambda1: &[Lambda1]) -> f64 {
    match lambda1 {
        [.., a, b] => {
            let (ra, rb) = (a.r * a.r, b.r * b.r);
            ((b.value * rb - a.value * ra) / (rb - ra)).max(0.0)
        }
        _ => 0.0,
    }
}

/// Bounds that need only the growth profile and the chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub theorem1: GrowthBound,
    pub ins: GrowthBound,
    pub corollary1: Corollary1,
    pub corollary2: Section<Corollary2>,
    pub corollary3: Vec<Corollary3>,
}

pub fn bound_set(config: &VerifyConfig, q: &BallIntegrator, profile: &GrowthProfile) -> Result<BoundSet> {
    let radii = config.radii();
    let corollary2 = match corollary2_bound(q, profile, config.alpha, &radii, config.tail_fraction) {
        Ok(c) => Section::Computed(c),
        Err(Error::NotApplicable(reason)) => Section::Skipped { reason },
        Err(e) => return Err(e),
    };
    Ok(BoundSet {
        theorem1: theorem1_bound(profile, config.tail_fraction)?,
        ins: ins_bound(profile, config.tail_fraction)?,
        corollary1: corollary1_check(profile, config.tail_fraction)?,
        corollary2,
        corollary3: config
            .sigmas
            .iter()
            .map(|&s| gaussian_moment(q, profile, s, &radii, config.slack))
            .collect::<Result<Vec<_>>>()?,
    })
}

/// Flux, chain and `F` inequalities with the test-function data at each radius.
pub fn inequality_suite(config: &VerifyConfig) -> Result<(Vec<SuiteRow>, Vec<TestFunctionProfile>)> {
    config.validate()?;
    let w = WarpingFunction::euclidean(config.r_max * 1.1)?;
    let mut suite = Vec::new();
    let mut test_functions = Vec::new();
    for r in config.radii() {
        let (row, tf) = suite_row(config, &w, r)?;
        suite.push(row);
        test_functions.push(tf);
    }
    Ok((suite, test_functions))
}

/// Runs every module on one surface and records each comparison.
pub fn verify(config: &VerifyConfig) -> Result<BoundReport> {
    config.validate()?;
    let surface = config.surface;
    let radii = config.radii();
    let (q, profile) = growth_for(config)?;
    let exponents = profile.growth_exponents(config.tail_fraction)?;
    let BoundSet { theorem1, ins, corollary1, corollary2, corollary3 } = bound_set(config, &q, &profile)?;
    let (suite, test_functions) = inequality_suite(config)?;

    let spectrum = spectrum_bottom_estimate(surface, &radii, config.spectrum_resolution, config.seed)?;
    let tail = spectrum.tail;
    let cmp_res = comparison_resolution(config.spectrum_resolution);
    let cmp = lambda_at(config, config.r_max, cmp_res)?;
    let discretization = richardson_error(config.spectrum_resolution, tail, cmp_res, cmp.value);
    let limit = extrapolated_limit(&spectrum.lambda1);
    let finite_r_gap = (tail - limit).max(0.0);
    let budget = ErrorBudget {
        discretization,
        comparison_resolution: cmp_res,
        comparison_value: cmp.value,
        finite_r_gap,
        extrapolated_limit: limit,
        total: discretization + finite_r_gap,
    };

    let mut flags = Vec::new();
    flags.push(ConsistencyFlag {
        name: "theorem1 without finite-r allowance".into(),
        lhs: tail,
        rhs: theorem1.value,
        slack: discretization,
        pass: tail <= theorem1.value + discretization,
    });
    let eps = budget.total;
    let mut against = |name: String, bound: f64| {
        flags.push(ConsistencyFlag { name, lhs: tail, rhs: bound, slack: eps, pass: tail <= bound + eps });
    };
    against("theorem1".into(), theorem1.value);
    if ins.value.is_finite() {
        against("ins".into(), ins.value);
    }
    against("corollary1".into(), corollary1.implied_bound);
    if let Section::Computed(c2) = &corollary2 {
        if let Some(b) = c2.implied_bound {
            against("corollary2".into(), b);
        }
    }
    for c3 in &corollary3 {
        against(format!("corollary3 sigma={}", c3.sigma), c3.bound);
    }
    let mut push = |name: String, lhs: f64, rhs: f64, slack: f64, pass: bool| {
        flags.push(ConsistencyFlag { name, lhs, rhs, slack, pass });
    };
    for c3 in &corollary3 {
        push(
            format!("corollary3 sigma={} moment finite", c3.sigma),
            c3.local_rate,
            c3.sigma,
            0.0,
            !c3.finiteness_undecided,
        );
        for row in &c3.rows {
            push(
                format!("corollary3 sigma={} proof inequality r={}", c3.sigma, row.r),
                row.weighted_volume,
                c3.moment.unwrap_or(f64::NAN),
                config.slack,
                row.pass,
            );
        }
    }
    if let Section::Computed(c2) = &corollary2 {
        for row in &c2.rows {
            push(format!("corollary2 tube r={}", row.r), row.tube_volume, row.ball_volume, 0.0, row.tube_ok);
            push(format!("corollary2 volume r={}", row.r), row.volume, row.volume_bound, 0.0, row.volume_ok);
        }
    }
    for row in &suite {
        push(format!("flux r={}", row.r), row.flux.lhs, row.flux.rhs, config.slack, row.flux.pass);
        push(format!("chain r={}", row.r), row.chain.lhs, row.chain.rhs, config.slack, row.chain.pass);
        push(format!("f_volume r={}", row.r), row.f_volume.lhs, row.f_volume.rhs, config.slack, row.f_volume.pass);
    }
    for (l, tf) in spectrum.lambda1.iter().zip(&test_functions) {
        push(
            format!("rayleigh dominance r={}", l.r),
            l.value,
            tf.rayleigh,
            RAYLEIGH_CONSISTENCY,
            l.value <= tf.rayleigh * (1.0 + RAYLEIGH_CONSISTENCY),
        );
    }
    push("lambda1 monotone".into(), 0.0, 0.0, crate::spectrum::MONOTONE_NOISE, spectrum.monotone);
    let pass = flags.iter().all(|f| f.pass);

    Ok(BoundReport {
        schema: SCHEMA.into(),
        surface,
        name: surface.name().into(),
        m: surface.intrinsic_dim(),
        n: surface.ambient_dim(),
        config: config.clone(),
        growth_profile: GrowthSection { profile, exponents },
        theorem1,
        ins,
        brooks_intrinsic: None,
        corollary1,
        corollary2,
        corollary3,
        test_functions,
        inequality_suite: suite,
        oracle_lambda1_tail: tail,
        lambda1: spectrum.lambda1,
        lambda1_monotone: spectrum.monotone,
        error_budget: budget,
        consistency_flags: flags,
        pass,
        note: ORACLE_NOTE.into(),
    })
}

/// Series for plotting: `β̂`, `μ̂`, `𝓡(u_r)` and its bound on a thinned grid,
/// `λ₁` where it was computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub r: f64,
    pub beta_hat: Option<f64>,
    pub mu_hat: Option<f64>,
    pub rayleigh: Option<f64>,
    pub rayleigh_bound: Option<f64>,
    pub lambda1: Option<f64>,
}

/// Every `stride`-th point of the growth grid, plus the spectrum radii.
pub fn plot_series(config: &VerifyConfig, stride: usize, with_spectrum: bool) -> Result<Vec<PlotRow>> {
    let (q, profile) = growth_for(config)?;
    let exps = profile.growth_exponents(config.tail_fraction)?;
    let w = WarpingFunction::euclidean(config.r_max * 1.1)?;
    let idx: Vec<usize> = (0..profile.len()).filter(|i| (i + 1) % stride.max(1) == 0 || *i + 1 == profile.len()).collect();
    let radii: Vec<f64> = idx.iter().map(|&i| profile.r_grid[i]).collect();
    let ray = rayleigh_profile(&q, &w, &radii)?;
    let mut rows: Vec<PlotRow> = idx
        .iter()
        .zip(&ray)
        .map(|(&i, rd)| {
            let r = profile.r_grid[i];
            Ok(PlotRow {
                r,
                beta_hat: exps.beta[i],
                mu_hat: exps.mu[i],
                rayleigh: Some(rd.rayleigh),
                rayleigh_bound: Some(crate::test_functions::rayleigh_bound(&profile, &w, r)?),
                lambda1: None,
            })
        })
        .collect::<Result<_>>()?;
    if with_spectrum {
        let spectrum = spectrum_bottom_estimate(config.surface, &config.radii(), config.spectrum_resolution, config.seed)?;
        for l in spectrum.lambda1 {
            rows.push(PlotRow { r: l.r, beta_hat: None, mu_hat: None, rayleigh: None, rayleigh_bound: None, lambda1: Some(l.value) });
        }
        rows.sort_by(|a, b| a.r.total_cmp(&b.r));
    }
    Ok(rows)
}
