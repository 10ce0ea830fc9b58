//! `essbound`: growth bounds for the bottom of the essential spectrum of
//! minimal submanifolds, with quadrature and eigenvalue cross-checks.
//!
//! Exit codes: 0 success, 1 a consistency check failed, 2 configuration
//! error, 3 numerical failure. Failures print one line to stderr,
//! `error[<kind>]: <reason>`.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{Common, ConfigError, Format, RunConfig};
use essbound_core::bounds::{brooks_intrinsic_bound, corollary1_check, ins_bound, theorem1_bound};
use essbound_core::growth::GrowthProfile;
use essbound_core::model_manifold::{completeness_check, solve_warping, CurvatureProfile, DEFAULT_STEP};
use essbound_core::report::{self, BoundReport, Section};
use essbound_core::spectrum::spectrum_bottom_estimate;
use essbound_core::SurfaceId;

#[derive(Debug, Parser)]
#[command(name = "essbound", version, about = "Volume-growth bounds for the essential spectrum of minimal submanifolds")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extrinsic-ball volumes, density and growth exponents
    Growth,
    /// Rayleigh quotients of the radial test functions and their bound
    Rayleigh,
    /// Boundary flux, chain and F inequalities
    Flux,
    /// Dirichlet eigenvalues on extrinsic balls
    Spectrum,
    /// Growth, density, curvature and Gaussian-moment bounds
    Bounds,
    /// Full cross-checked report; exits 1 if any check fails
    Verify {
        /// Every catalog surface
        #[arg(long)]
        all: bool,
    },
    /// CSV series for plotting
    Plotdata {
        /// Keep every n-th grid radius
        #[arg(long, default_value_t = 10)]
        stride: usize,
        /// Skip the eigenvalue series
        #[arg(long)]
        no_spectrum: bool,
    },
    /// Rotationally symmetric model manifolds
    Model {
        /// zero, hyperbolic, spherical or constant:<G>
        #[arg(long, default_value = "zero")]
        curvature: String,
        /// Dimension of the model
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
        /// Include the full warping-function samples
        #[arg(long)]
        full: bool,
    },
}

enum Outcome {
    Ok,
    ChecksFailed(Vec<String>),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[config]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed(names)) => {
            eprintln!("error[consistency]: {} check(s) failed: {}", names.len(), names.join("; "));
            ExitCode::from(1)
        }
        Err(e) => {
            let (kind, code) = classify(&e);
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error[{kind}]: {msg}");
            ExitCode::from(code)
        }
    }
}

fn classify(e: &anyhow::Error) -> (&'static str, u8) {
    if e.downcast_ref::<ConfigError>().is_some() {
        return ("config", 2);
    }
    if let Some(core) = e.downcast_ref::<essbound_core::Error>() {
        return if core.is_config_error() { ("config", 2) } else { ("numerical", 3) };
    }
    if e.downcast_ref::<io::Error>().is_some() {
        return ("io", 2);
    }
    ("numerical", 3)
}

fn run(cli: Cli) -> Result<Outcome> {
    let cfg = RunConfig::resolve(&cli.common)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Growth => cmd_growth(&cfg),
        Command::Rayleigh => cmd_rayleigh(&cfg),
        Command::Flux => cmd_flux(&cfg),
        Command::Spectrum => cmd_spectrum(&cfg),
        Command::Bounds => cmd_bounds(&cfg),
        Command::Verify { all } => cmd_verify(&cfg, all),
        Command::Plotdata { stride, no_spectrum } => cmd_plotdata(&cfg, stride, no_spectrum),
        Command::Model { curvature, n, step, full } => cmd_model(&cfg, &curvature, n, step, full),
    }
}

fn output(cfg: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| ConfigError(format!("cannot write {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(cfg: &RunConfig, value: &T) -> Result<()> {
    let mut out = output(cfg)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_csv(cfg: &RunConfig, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(output(cfg)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn synthetic_profile(cfg: &RunConfig) -> Result<Option<GrowthProfile>> {
    let Some(path) = &cfg.profile else { return Ok(None) };
    let file = File::open(path).map_err(|e| ConfigError(format!("cannot read profile {}: {e}", path.display())))?;
    Ok(Some(GrowthProfile::read_csv(cfg.dim, file)?))
}

fn profile_for(cfg: &RunConfig) -> Result<GrowthProfile> {
    match synthetic_profile(cfg)? {
        Some(p) => Ok(p),
        None => Ok(report::growth_for(&cfg.verify)?.1),
    }
}

fn cmd_growth(cfg: &RunConfig) -> Result<Outcome> {
    let profile = profile_for(cfg)?;
    let exps = profile.growth_exponents(cfg.verify.tail_fraction)?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            profile.write_csv(&exps, output(cfg)?)?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                schema: &'static str,
                growth_profile: &'a GrowthProfile,
                exponents: &'a essbound_core::GrowthExponents,
            }
            write_json(cfg, &Out { schema: report::SCHEMA, growth_profile: &profile, exponents: &exps })?;
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_rayleigh(cfg: &RunConfig) -> Result<Outcome> {
    let (_, tfs) = report::inequality_suite(&cfg.verify)?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(cfg, &tfs)?,
        Format::Csv => write_csv(
            cfg,
            &["r", "dirichlet_energy", "l2_mass", "rayleigh", "F", "Fprime", "bound"],
            tfs.iter()
                .map(|t| {
                    [t.r, t.dirichlet_energy, t.l2_mass, t.rayleigh, t.f_value, t.f_derivative, t.bound_value]
                        .iter()
                        .map(f64::to_string)
                        .collect()
                })
                .collect(),
        )?,
    }
    Ok(Outcome::Ok)
}

fn cmd_flux(cfg: &RunConfig) -> Result<Outcome> {
    let (suite, _) = report::inequality_suite(&cfg.verify)?;
    let failed: Vec<String> = suite
        .iter()
        .flat_map(|row| {
            [("flux", row.flux.pass), ("chain", row.chain.pass), ("f_volume", row.f_volume.pass)]
                .into_iter()
                .filter(|(_, p)| !p)
                .map(move |(n, _)| format!("{n} r={}", row.r))
        })
        .collect();
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(cfg, &suite)?,
        Format::Csv => write_csv(
            cfg,
            &["r", "check", "lhs", "rhs", "excess", "pass"],
            suite
                .iter()
                .flat_map(|row| {
                    let f = &row.flux;
                    [
                        ("flux", f.lhs, f.rhs, f.excess, f.pass),
                        ("chain", row.chain.lhs, row.chain.rhs, row.chain.excess, row.chain.pass),
                        ("f_volume", row.f_volume.lhs, row.f_volume.rhs, row.f_volume.excess, row.f_volume.pass),
                    ]
                    .into_iter()
                    .map(|(n, l, r, e, p)| {
                        vec![row.r.to_string(), n.into(), l.to_string(), r.to_string(), e.to_string(), p.to_string()]
                    })
                })
                .collect(),
        )?,
    }
    Ok(if failed.is_empty() { Outcome::Ok } else { Outcome::ChecksFailed(failed) })
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let v = &cfg.verify;
    let est = spectrum_bottom_estimate(v.surface, &v.radii(), v.spectrum_resolution, v.seed)?;
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => write_json(cfg, &est)?,
        Format::Csv => write_csv(
            cfg,
            &["r", "value", "resolution", "residual", "iterations"],
            est.lambda1
                .iter()
                .map(|l| {
                    vec![
                        l.r.to_string(),
                        l.value.to_string(),
                        l.resolution.to_string(),
                        l.residual.to_string(),
                        l.iterations.to_string(),
                    ]
                })
                .collect(),
        )?,
    }
    Ok(Outcome::Ok)
}

fn cmd_bounds(cfg: &RunConfig) -> Result<Outcome> {
    let tf = cfg.verify.tail_fraction;
    let (summary, rows): (serde_json::Value, Vec<(String, f64)>) = match synthetic_profile(cfg)? {
        Some(p) => {
            let t1 = theorem1_bound(&p, tf)?;
            let ins = ins_bound(&p, tf)?;
            let c1 = corollary1_check(&p, tf)?;
            let rows = vec![
                ("theorem1".to_string(), t1.value),
                ("ins".to_string(), ins.value),
                ("corollary1".to_string(), c1.implied_bound),
            ];
            let json = serde_json::json!({
                "schema": report::SCHEMA, "theorem1": t1, "ins": ins, "corollary1": c1,
            });
            (json, rows)
        }
        None => {
            let (q, p) = report::growth_for(&cfg.verify)?;
            let set = report::bound_set(&cfg.verify, &q, &p)?;
            let mut rows = vec![
                ("theorem1".to_string(), set.theorem1.value),
                ("ins".to_string(), set.ins.value),
                ("corollary1".to_string(), set.corollary1.implied_bound),
            ];
            if let Section::Computed(c2) = &set.corollary2 {
                if let Some(b) = c2.implied_bound {
                    rows.push(("corollary2".into(), b));
                }
            }
            for c3 in &set.corollary3 {
                rows.push((format!("corollary3 sigma={}", c3.sigma), c3.bound));
            }
            let json = serde_json::json!({
                "schema": report::SCHEMA,
                "surface": cfg.verify.surface,
                "bounds": set,
            });
            (json, rows)
        }
    };
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => write_json(cfg, &summary)?,
        Format::Csv => write_csv(cfg, &["bound", "value"], rows.into_iter().map(|(n, v)| vec![n, v.to_string()]).collect())?,
    }
    Ok(Outcome::Ok)
}

fn cmd_verify(cfg: &RunConfig, all: bool) -> Result<Outcome> {
    if cfg.profile.is_some() {
        return Err(ConfigError("verify needs a surface, not a profile file".into()).into());
    }
    let surfaces: Vec<SurfaceId> = if all {
        SurfaceId::all()
            .into_iter()
            .map(|s| match s {
                SurfaceId::Catenoid { .. } => SurfaceId::Catenoid { neck: neck_of(cfg) },
                SurfaceId::CatenoidXLine { .. } => SurfaceId::CatenoidXLine { neck: neck_of(cfg) },
                other => other,
            })
            .collect()
    } else {
        vec![cfg.verify.surface]
    };
    let reports: Vec<BoundReport> = surfaces
        .iter()
        .map(|&s| report::verify(&cfg.for_surface(s)))
        .collect::<essbound_core::Result<_>>()?;
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json if all => write_json(cfg, &reports)?,
        Format::Json => write_json(cfg, &reports[0])?,
        Format::Csv => write_csv(
            cfg,
            &["surface", "check", "lhs", "rhs", "slack", "pass"],
            reports
                .iter()
                .flat_map(|r| {
                    r.consistency_flags.iter().map(move |f| {
                        vec![
                            r.name.clone(),
                            f.name.clone(),
                            f.lhs.to_string(),
                            f.rhs.to_string(),
                            f.slack.to_string(),
                            f.pass.to_string(),
                        ]
                    })
                })
                .collect(),
        )?,
    }
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.failed_flags().map(move |f| format!("{}: {}", r.name, f.name)))
        .collect();
    Ok(if failed.is_empty() { Outcome::Ok } else { Outcome::ChecksFailed(failed) })
}

fn neck_of(cfg: &RunConfig) -> f64 {
    match cfg.verify.surface {
        SurfaceId::Catenoid { neck } | SurfaceId::CatenoidXLine { neck } => neck,
        _ => 1.0,
    }
}

fn cmd_plotdata(cfg: &RunConfig, stride: usize, no_spectrum: bool) -> Result<Outcome> {
    let header = ["r", "beta_hat", "mu_hat", "rayleigh", "rayleigh_bound", "lambda1"];
    let rows: Vec<Vec<String>> = match synthetic_profile(cfg)? {
        Some(p) => {
            let exps = p.growth_exponents(cfg.verify.tail_fraction)?;
            (0..p.len())
                .filter(|i| (i + 1) % stride.max(1) == 0 || i + 1 == p.len())
                .map(|i| {
                    vec![p.r_grid[i].to_string(), opt(exps.beta[i]), opt(exps.mu[i]), String::new(), String::new(), String::new()]
                })
                .collect()
        }
        None => report::plot_series(&cfg.verify, stride, !no_spectrum)?
            .into_iter()
            .map(|r| {
                vec![r.r.to_string(), opt(r.beta_hat), opt(r.mu_hat), opt(r.rayleigh), opt(r.rayleigh_bound), opt(r.lambda1)]
            })
            .collect(),
    };
    if cfg.format == Some(Format::Json) {
        let objs: Vec<serde_json::Value> = rows
            .iter()
            .map(|row| {
                let map = header
                    .iter()
                    .zip(row)
                    .map(|(k, v)| (k.to_string(), v.parse::<f64>().map(serde_json::Value::from).unwrap_or(serde_json::Value::Null)))
                    .collect();
                serde_json::Value::Object(map)
            })
            .collect();
        write_json(cfg, &objs)?;
    } else {
        write_csv(cfg, &header, rows)?;
    }
    Ok(Outcome::Ok)
}

fn parse_curvature(text: &str) -> Result<CurvatureProfile> {
    Ok(match text {
        "zero" | "euclidean" => CurvatureProfile::euclidean(),
        "hyperbolic" => CurvatureProfile::hyperbolic(),
        "spherical" => CurvatureProfile::spherical(),
        other => match other.strip_prefix("constant:").map(str::parse::<f64>) {
            Some(Ok(value)) => CurvatureProfile::Constant { value },
            _ => {
                return Err(ConfigError(format!(
                    "unknown curvature '{other}' (expected zero, hyperbolic, spherical or constant:<G>)"
                ))
                .into())
            }
        },
    })
}

fn cmd_model(cfg: &RunConfig, curvature: &str, n: usize, step: f64, full: bool) -> Result<Outcome> {
    let g = parse_curvature(curvature)?;
    let r_max = cfg.verify.r_max;
    let w = solve_warping(&g, r_max, step)?;
    let completeness = completeness_check(&g);
    let top = w.r_max_solved();
    let radii: Vec<f64> = if cfg.radii_given {
        cfg.verify.sample_radii.iter().copied().filter(|&r| r <= top).collect()
    } else {
        (1..=10).map(|i| top * i as f64 / 10.0).collect()
    };
    let rows: Vec<[f64; 4]> = radii
        .iter()
        .map(|&r| Ok([r, w.h(r)?, w.dh(r)?, w.ball_volume(n, r)?]))
        .collect::<essbound_core::Result<_>>()?;
    let brooks = match brooks_intrinsic_bound(&w, n, cfg.verify.tail_fraction) {
        Ok(b) => Some(b.value),
        Err(essbound_core::Error::NotApplicable(_)) => None,
        Err(e) => return Err(e.into()),
    };
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut json = serde_json::json!({
                "schema": report::SCHEMA,
                "G_tag": g.tag(),
                "n": n,
                "r_max": top,
                "blowdown": w.blowdown_radius(),
                "completeness": completeness,
                "brooks_intrinsic": brooks,
                "samples": rows.iter().map(|r| serde_json::json!({"r": r[0], "h": r[1], "dh": r[2], "ball_volume": r[3]})).collect::<Vec<_>>(),
            });
            if full {
                json["warping"] = serde_json::to_value(&w)?;
            }
            write_json(cfg, &json)?;
        }
        Format::Csv => write_csv(
            cfg,
            &["r", "h", "dh", "ball_volume"],
            rows.iter().map(|r| r.iter().map(f64::to_string).collect()).collect(),
        )?,
    }
    Ok(Outcome::Ok)
}
