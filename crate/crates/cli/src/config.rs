//! Run configuration: flags over a flat `key = value` file over defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use essbound_core::report::VerifyConfig;
use essbound_core::SurfaceId;

/// Failure that maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// plane, catenoid, helicoid, enneper or catenoid_x_line
    #[arg(long, global = true)]
    pub surface: Option<String>,
    /// Neck radius of the catenoid family
    #[arg(long, global = true)]
    pub neck: Option<f64>,
    /// Largest extrinsic radius
    #[arg(long, global = true)]
    pub r_max: Option<f64>,
    /// Number of radii in the growth grid
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Quadrature cells per parameter axis
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Quadrature cells per axis for the per-radius inequality checks
    #[arg(long, global = true)]
    pub suite_resolution: Option<usize>,
    /// Cells per axis for the eigenvalue oracle (at least 32)
    #[arg(long, global = true)]
    pub spectrum_resolution: Option<usize>,
    /// Fraction of the grid used for tail minima, in (0, 0.5]
    #[arg(long, global = true)]
    pub tail_fraction: Option<f64>,
    /// Relative slack for the one-sided inequalities
    #[arg(long, global = true)]
    pub slack: Option<f64>,
    /// Comma-separated sample radii
    #[arg(long, global = true, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Comma-separated Gaussian weights
    #[arg(long, global = true, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
    /// Curvature-decay exponent for the tubular-neighbourhood bound
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Seed for the eigensolver start block
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Flat key = value file; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Volume profile CSV (columns r,vol) used instead of a surface
    #[arg(long, global = true)]
    pub profile: Option<PathBuf>,
    /// Intrinsic dimension of a profile read from CSV
    #[arg(long, global = true)]
    pub dim: Option<usize>,
}

const KEYS: &[&str] = &[
    "surface",
    "neck",
    "r-max",
    "grid",
    "resolution",
    "suite-resolution",
    "spectrum-resolution",
    "tail-fraction",
    "slack",
    "radii",
    "sigma",
    "alpha",
    "seed",
    "out",
    "format",
    "threads",
    "profile",
    "dim",
];

/// Parsed `key = value` lines; `#` starts a comment, `_` and `-` are interchangeable.
#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(config_err(format!("config line {}: expected key = value", n + 1)));
            };
            let key = k.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(config_err(format!("config line {}: unknown key '{}'", n + 1, k.trim())));
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn get<T: FromStr>(&self, key: &str) -> anyhow::Result<Option<T>> {
        self.entries
            .get(key)
            .map(|v| v.parse::<T>().map_err(|_| config_err(format!("config key '{key}': cannot parse '{v}'"))))
            .transpose()
    }

    fn get_list(&self, key: &str) -> anyhow::Result<Option<Vec<f64>>> {
        self.entries
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| config_err(format!("config key '{key}': cannot parse list '{v}'")))
            })
            .transpose()
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub verify: VerifyConfig,
    pub radii_given: bool,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub profile: Option<PathBuf>,
    pub dim: usize,
}

impl RunConfig {
    pub fn resolve(flags: &Common) -> anyhow::Result<Self> {
        let file = match &flags.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        macro_rules! pick {
            ($flag:expr, $key:literal) => {
                match $flag.clone() {
                    Some(v) => Some(v),
                    None => file.get($key)?,
                }
            };
        }
        let name: String = pick!(flags.surface, "surface").unwrap_or_else(|| "plane".into());
        let neck: f64 = pick!(flags.neck, "neck").unwrap_or(1.0);
        let surface = SurfaceId::from_name(&name, neck).map_err(|e| config_err(e.to_string()))?;
        let mut v = VerifyConfig::defaults(surface);
        if let Some(x) = pick!(flags.r_max, "r-max") {
            v.r_max = x;
        }
        if let Some(x) = pick!(flags.grid, "grid") {
            v.grid_points = x;
        }
        if let Some(x) = pick!(flags.resolution, "resolution") {
            v.resolution = x;
        }
        if let Some(x) = pick!(flags.suite_resolution, "suite-resolution") {
            v.suite_resolution = x;
        }
        if let Some(x) = pick!(flags.spectrum_resolution, "spectrum-resolution") {
            v.spectrum_resolution = x;
        }
        if let Some(x) = pick!(flags.tail_fraction, "tail-fraction") {
            v.tail_fraction = x;
        }
        if let Some(x) = pick!(flags.slack, "slack") {
            v.slack = x;
        }
        if let Some(x) = pick!(flags.alpha, "alpha") {
            v.alpha = x;
        }
        if let Some(x) = pick!(flags.seed, "seed") {
            v.seed = Some(x);
        }
        let radii = match flags.radii.clone() {
            Some(r) => Some(r),
            None => file.get_list("radii")?,
        };
        let radii_given = radii.is_some();
        if let Some(r) = radii {
            v.sample_radii = r;
        }
        if let Some(s) = flags.sigma.clone().map(Some).unwrap_or(file.get_list("sigma")?) {
            v.sigmas = s;
        }
        let profile: Option<PathBuf> = pick!(flags.profile, "profile");
        // a synthetic profile carries no surface, so only generic checks apply
        if profile.is_none() {
            v.validate().map_err(|e| config_err(e.to_string()))?;
        }
        let threads: Option<usize> = pick!(flags.threads, "threads");
        if threads == Some(0) {
            return Err(config_err("threads must be at least 1"));
        }
        let dim: usize = pick!(flags.dim, "dim").unwrap_or(2);
        if dim < 1 {
            return Err(config_err("dim must be at least 1"));
        }
        Ok(RunConfig {
            verify: v,
            radii_given,
            out: pick!(flags.out, "out"),
            format: pick!(flags.format, "format"),
            threads,
            profile,
            dim,
        })
    }

    /// The same settings for another catalog surface.
    pub fn for_surface(&self, surface: SurfaceId) -> VerifyConfig {
        let defaults = VerifyConfig::defaults(self.verify.surface);
        let target = VerifyConfig::defaults(surface);
        let keep = |mine: usize, base: usize, theirs: usize| if mine == base { theirs } else { mine };
        VerifyConfig {
            surface,
            grid_points: keep(self.verify.grid_points, defaults.grid_points, target.grid_points),
            resolution: keep(self.verify.resolution, defaults.resolution, target.resolution),
            suite_resolution: keep(self.verify.suite_resolution, defaults.suite_resolution, target.suite_resolution),
            spectrum_resolution: keep(
                self.verify.spectrum_resolution,
                defaults.spectrum_resolution,
                target.spectrum_resolution,
            ),
            ..self.verify.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_separators() {
        let f = ConfigFile::parse("# header\nr_max = 20 # inline\nsurface=catenoid\n\nradii = 2, 5\n").unwrap();
        assert_eq!(f.get::<f64>("r-max").unwrap(), Some(20.0));
        assert_eq!(f.get::<String>("surface").unwrap().as_deref(), Some("catenoid"));
        assert_eq!(f.get_list("radii").unwrap(), Some(vec![2.0, 5.0]));
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        let e = ConfigFile::parse("colour = red").unwrap_err();
        assert!(e.downcast_ref::<ConfigError>().is_some());
        let f = ConfigFile::parse("grid = many").unwrap();
        assert!(f.get::<usize>("grid").is_err());
    }
}
