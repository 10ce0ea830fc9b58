//! Extrinsic-ball volume profiles, the density `Θ(r)`, and finite-range
//! estimators of the exponential growth rates.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_manifold::unit_sphere_area;
use crate::quadrature::BallIntegrator;

/// Radii are nudged by this much to avoid landing exactly on critical values of `t`.
pub const GRID_JITTER: f64 = 1e-9;
pub const DEFAULT_GRID_POINTS: usize = 200;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;
/// Offset of the first default radius above the minimum of `t`.
pub const GRID_START_OFFSET: f64 = 0.1;

/// Sampled `vol(Ω_r)` along an increasing radius grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub m: usize,
    /// Lower end of the support of `vol(Ω_s)`: it vanishes for `s ≤ t_min`.
    pub t_min: f64,
    pub r_grid: Vec<f64>,
    pub volumes: Vec<f64>,
    /// `log vol(Ω_r)`, kept separately so synthetic profiles never overflow.
    pub log_volumes: Vec<f64>,
    pub empty: Vec<bool>,
    pub dvol_dr: Vec<f64>,
    pub theta: Vec<f64>,
}

/// Growth-rate sequences and their tail minima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthExponents {
    /// `μ̂(r) = log vol(Ω_r) / r`; `None` where the ball is empty.
    pub mu: Vec<Option<f64>>,
    /// `β̂(r) = log vol(Ω_r) / r²`.
    pub beta: Vec<Option<f64>>,
    pub mu_tail: f64,
    pub beta_tail: f64,
    /// Index of the first grid point of the tail window.
    pub tail_start: usize,
}

/// Volume of the Euclidean `m`-ball, `ω_m rᵐ / m` with `ω_m = vol(S^{m-1})`.
pub fn euclidean_ball_volume(m: usize, r: f64) -> f64 {
    unit_sphere_area(m) / m as f64 * r.powi(m as i32)
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.len() < 2 {
        return Err(Error::InvalidInput("radius grid needs at least two points".into()));
    }
    if r_grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidInput("radius grid entries must be positive and finite".into()));
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("radius grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Default grid: half the points geometric on the first quarter of the range,
/// the rest uniform up to `r_max`, all shifted by [`GRID_JITTER`].
pub fn default_r_grid(t_min: f64, r_max: f64, points: usize) -> Result<Vec<f64>> {
    let start = t_min + GRID_START_OFFSET;
    if !(r_max > start) {
        return Err(Error::EmptyBall { r: r_max, min_t: t_min });
    }
    if points < 4 {
        return Err(Error::InvalidInput(format!("grid needs at least 4 points, got {points}")));
    }
    let split = start + 0.25 * (r_max - start);
    let n_geo = points / 2;
    let n_lin = points - n_geo;
    let ratio = (split / start).powf(1.0 / n_geo as f64);
    let mut grid: Vec<f64> = (0..n_geo).map(|i| start * ratio.powi(i as i32)).collect();
    grid.extend((0..n_lin).map(|i| split + (r_max - split) * i as f64 / (n_lin - 1) as f64));
    Ok(grid.into_iter().map(|r| r + GRID_JITTER).collect())
}

fn centered_differences(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (y[b] - y[a]) / (x[b] - x[a])
        })
        .collect()
}

impl GrowthProfile {
    fn assemble(m: usize, t_min: f64, r_grid: Vec<f64>, volumes: Vec<f64>, log_volumes: Vec<f64>) -> Self {
        let empty: Vec<bool> = volumes.iter().map(|&v| !(v > 0.0)).collect();
        let dvol_dr = centered_differences(&r_grid, &volumes);
        let theta = r_grid
            .iter()
            .zip(&log_volumes)
            .map(|(&r, &lv)| (lv - euclidean_ball_volume(m, r).ln()).exp())
            .collect();
        GrowthProfile { m, t_min, r_grid, volumes, log_volumes, empty, dvol_dr, theta }
    }

    /// Profile from measured volumes; zero entries are flagged as empty balls.
    pub fn from_volumes(m: usize, t_min: f64, r_grid: Vec<f64>, volumes: Vec<f64>) -> Result<Self> {
        check_grid(&r_grid)?;
        if volumes.len() != r_grid.len() {
            return Err(Error::InvalidInput("one volume per radius required".into()));
        }
        if volumes.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("volumes must be finite and non-negative".into()));
        }
        let logs = volumes.iter().map(|v| if *v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect();
        Ok(Self::assemble(m, t_min, r_grid, volumes, logs))
    }

    /// Synthetic profile given by `log vol(Ω_r)`; used to exercise the
    /// exponent arithmetic without geometry.
    pub fn from_log_volumes(m: usize, r_grid: Vec<f64>, log_volumes: Vec<f64>) -> Result<Self> {
        check_grid(&r_grid)?;
        if log_volumes.len() != r_grid.len() || log_volumes.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidInput("one finite log-volume per radius required".into()));
        }
        let volumes = log_volumes.iter().map(|l| l.exp()).collect();
        Ok(Self::assemble(m, 0.0, r_grid, volumes, log_volumes))
    }

    /// Reads a synthetic profile from CSV with columns `r,vol` (header
    /// required, further columns ignored).
    pub fn read_csv<R: Read>(m: usize, input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let headers = reader.headers().map_err(|e| Error::InvalidInput(e.to_string()))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::InvalidInput(format!("profile CSV lacks a '{name}' column")))
        };
        let (ir, iv) = (col("r")?, col("vol")?);
        let (mut radii, mut logs) = (Vec::new(), Vec::new());
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::InvalidInput(e.to_string()))?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i).unwrap_or("").trim().parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!("profile CSV row {}: bad number", line + 2))
                })
            };
            let (r, v) = (parse(ir)?, parse(iv)?);
            if !(v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "profile CSV row {}: volume must be positive",
                    line + 2
                )));
            }
            radii.push(r);
            logs.push(v.ln());
        }
        Self::from_log_volumes(m, radii, logs)
    }

    pub fn len(&self) -> usize {
        self.r_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_grid.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r_grid.last().unwrap_or(&0.0)
    }

    /// `vol(Ω_s)` by linear interpolation, zero at and below `t_min`.
    pub fn volume_at(&self, s: f64) -> Result<f64> {
        if s > self.r_max() * (1.0 + 1e-12) {
            return Err(Error::OutOfRange { value: s, max: self.r_max() });
        }
        if s <= self.t_min {
            return Ok(0.0);
        }
        let i = self.r_grid.partition_point(|&r| r < s);
        if i == 0 {
            let r0 = self.r_grid[0];
            return Ok(self.volumes[0] * (s - self.t_min) / (r0 - self.t_min));
        }
        let i = i.min(self.len() - 1);
        let (r0, r1) = (self.r_grid[i - 1], self.r_grid[i]);
        let tau = ((s - r0) / (r1 - r0)).clamp(0.0, 1.0);
        Ok(self.volumes[i - 1] + tau * (self.volumes[i] - self.volumes[i - 1]))
    }

    /// Nodes `(s, vol(Ω_s))` of the piecewise-linear volume model on `[t_min, r]`.
    pub(crate) fn nodes_up_to(&self, r: f64) -> Result<Vec<(f64, f64)>> {
        let mut nodes = vec![(self.t_min, 0.0)];
        for (&s, &v) in self.r_grid.iter().zip(&self.volumes) {
            if s >= r {
                break;
            }
            if s > self.t_min {
                nodes.push((s, v));
            }
        }
        if r > self.t_min {
            nodes.push((r, self.volume_at(r)?));
        }
        Ok(nodes)
    }

    /// `Θ(r) = vol(Ω_r) / vol(Bᵐ(r))`.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `μ̂`, `β̂` and their minima over the last `tail_fraction` of the grid.
    pub fn growth_exponents(&self, tail_fraction: f64) -> Result<GrowthExponents> {
        let tail_start = tail_start(self.len(), tail_fraction)?;
        let mut mu = Vec::with_capacity(self.len());
        let mut beta = Vec::with_capacity(self.len());
        for (i, (&r, &lv)) in self.r_grid.iter().zip(&self.log_volumes).enumerate() {
            if self.empty[i] {
                if i >= tail_start {
                    return Err(Error::InvalidInput(format!(
                        "empty extrinsic ball at r={r} inside the tail window"
                    )));
                }
                mu.push(None);
                beta.push(None);
            } else {
                mu.push(Some(lv / r));
                beta.push(Some(lv / (r * r)));
            }
        }
        let tail_min = |seq: &[Option<f64>]| {
            seq[tail_start..].iter().flatten().copied().fold(f64::INFINITY, f64::min)
        };
        Ok(GrowthExponents {
            mu_tail: tail_min(&mu),
            beta_tail: tail_min(&beta),
            mu,
            beta,
            tail_start,
        })
    }

    /// CSV with columns `r,vol,dvol_dr,theta,mu_hat,beta_hat`.
    pub fn write_csv<W: Write>(&self, exps: &GrowthExponents, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidInput(format!("writing CSV: {e}"));
        w.write_record(["r", "vol", "dvol_dr", "theta", "mu_hat", "beta_hat"]).map_err(io)?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for i in 0..self.len() {
            w.write_record([
                self.r_grid[i].to_string(),
                self.volumes[i].to_string(),
                self.dvol_dr[i].to_string(),
                self.theta[i].to_string(),
                opt(exps.mu[i]),
                opt(exps.beta[i]),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(format!("writing CSV: {e}")))
    }
}

/// First index of the trailing window holding `tail_fraction` of the points.
pub fn tail_start(len: usize, tail_fraction: f64) -> Result<usize> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(Error::InvalidInput(format!(
            "tail fraction must lie in (0, 0.5], got {tail_fraction}"
        )));
    }
    if len == 0 {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let count = ((len as f64 * tail_fraction).ceil() as usize).clamp(1, len);
    Ok(len - count)
}

/// Measures `vol(Ω_r)` on every grid radius.
pub fn volume_profile(integrator: &BallIntegrator, r_grid: &[f64]) -> Result<GrowthProfile> {
    check_grid(r_grid)?;
    let volumes = integrator.volumes(r_grid)?;
    let chart = integrator.chart();
    GrowthProfile::from_volumes(
        integrator.intrinsic_dim(),
        chart.min_distance(),
        r_grid.to_vec(),
        volumes,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersions::{catalog, SurfaceId};
    use std::f64::consts::PI;

    #[test]
    fn plane_profile_is_a_disk() {
        let chart = catalog(SurfaceId::Plane, 10.0, 128).unwrap();
        let q = BallIntegrator::for_chart(&chart).unwrap();
        let grid = default_r_grid(0.0, 10.0, 60).unwrap();
        let p = volume_profile(&q, &grid).unwrap();
        let i5 = p.r_grid.iter().position(|&r| r > 5.0).unwrap();
        let r = p.r_grid[i5];
        assert!((p.volumes[i5] - PI * r * r).abs() / (PI * r * r) < 1e-3);
        assert!(p.theta[p.len() - 1] > 0.999 && p.theta[p.len() - 1] < 1.001);
        assert!(p.volumes.windows(2).all(|w| w[1] > w[0]));
        assert!(p.dvol_dr.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn coarea_reintegration_reproduces_volumes() {
        let chart = catalog(SurfaceId::Catenoid { neck: 1.0 }, 20.0, 128).unwrap();
        let q = BallIntegrator::for_chart(&chart).unwrap();
        let grid = default_r_grid(1.0, 20.0, 200).unwrap();
        let p = volume_profile(&q, &grid).unwrap();
        let mut acc = p.volumes[0];
        for i in 1..p.len() {
            acc += 0.5 * (p.dvol_dr[i] + p.dvol_dr[i - 1]) * (p.r_grid[i] - p.r_grid[i - 1]);
            if p.r_grid[i] > 3.0 {
                assert!((acc - p.volumes[i]).abs() / p.volumes[i] < 5e-3, "r={}", p.r_grid[i]);
            }
        }
    }

    #[test]
    fn plane_beta_at_fifty() {
        let r: f64 = 50.0;
        let p = GrowthProfile::from_volumes(2, 0.0, vec![49.0, r], vec![PI * 49.0 * 49.0, PI * r * r]).unwrap();
        let e = p.growth_exponents(0.5).unwrap();
        let expected = (2500.0 * PI).ln() / 2500.0;
        assert!((e.beta[1].unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.003_588).abs() < 1e-6);
        assert!(e.beta.iter().zip(&e.mu).zip(&p.r_grid).all(|((b, m), r)| {
            (b.unwrap() - m.unwrap() / r).abs() <= 1e-15
        }));
    }

    #[test]
    fn synthetic_gaussian_profile_has_constant_beta() {
        let a = 0.3;
        let grid: Vec<f64> = (1..=40).map(|i| i as f64).collect();
        let logs = grid.iter().map(|r| a * r * r).collect();
        let p = GrowthProfile::from_log_volumes(2, grid, logs).unwrap();
        let e = p.growth_exponents(0.25).unwrap();
        assert!(e.beta.iter().all(|b| (b.unwrap() - a).abs() <= 1e-15));
        assert!((e.beta_tail - a).abs() <= 4.0 * f64::EPSILON * a);
    }

    #[test]
    fn empty_leading_balls_are_flagged() {
        let p = GrowthProfile::from_volumes(2, 1.0, vec![0.5, 2.0, 3.0, 4.0], vec![0.0, 5.0, 9.0, 20.0])
            .unwrap();
        assert_eq!(p.empty, vec![true, false, false, false]);
        let e = p.growth_exponents(0.5).unwrap();
        assert_eq!(e.mu[0], None);
        let bad = GrowthProfile::from_volumes(2, 1.0, vec![0.5, 2.0], vec![0.0, 0.0]).unwrap();
        assert!(bad.growth_exponents(0.5).is_err());
    }

    #[test]
    fn default_grid_shape() {
        let g = default_r_grid(1.0, 50.0, 200).unwrap();
        assert_eq!(g.len(), 200);
        assert!((g[0] - 1.1).abs() < 1e-8);
        assert!((g[199] - 50.0).abs() < 1e-8);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(default_r_grid(1.0, 0.5, 200).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let text = "r,vol\n1,2\n2,5\n3,11\n";
        let p = GrowthProfile::read_csv(2, text.as_bytes()).unwrap();
        assert_eq!(p.volumes.len(), 3);
        assert!((p.volumes[1] - 5.0).abs() < 1e-12);
        let e = p.growth_exponents(0.5).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&e, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("r,vol,dvol_dr,theta,mu_hat,beta_hat\n"));
        assert!(GrowthProfile::read_csv(2, "x,y\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn volume_interpolation() {
        let p = GrowthProfile::from_volumes(2, 1.0, vec![2.0, 3.0], vec![4.0, 6.0]).unwrap();
        assert_eq!(p.volume_at(0.5).unwrap(), 0.0);
        assert!((p.volume_at(1.5).unwrap() - 2.0).abs() < 1e-12);
        assert!((p.volume_at(2.5).unwrap() - 5.0).abs() < 1e-12);
        assert!(p.volume_at(4.0).is_err());
    }
}
