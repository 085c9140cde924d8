//! Run configuration: a flat TOML file whose keys can each be overridden by a
//! command-line flag of the same name.

use std::path::{Path, PathBuf};

use clap::Args;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bell_analysis::{standard_setting, ChSetting};
use crate::detection_rates::{check_d, Convention, EfficiencyPair};
use crate::error::{Error, Result};
use crate::gaussian_modes::SamplerConfig;
use crate::spdc_evolution::{map_c_to_d, SpdcParams};

/// One value or a list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Keys accepted in a config file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_c: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<OneOrMany>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<OneOrMany>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degrees: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_batches: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ode_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamp_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi2: Option<f64>,
}

/// Command-line flags; each mirrors the config key of the same name.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Config file (flat TOML key = value); flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write CSV here instead of stdout; the resolved config goes to <out>.config.toml
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Real part of the down-conversion parameter D
    #[arg(long = "d_re", visible_alias = "d-re")]
    pub d_re: Option<f64>,
    /// Imaginary part of D
    #[arg(long = "d_im", visible_alias = "d-im")]
    pub d_im: Option<f64>,
    /// Real part of the pump coupling C = A T
    #[arg(long = "c_re", visible_alias = "c-re")]
    pub c_re: Option<f64>,
    /// Imaginary part of C
    #[arg(long = "c_im", visible_alias = "c-im")]
    pub c_im: Option<f64>,
    /// Derive D from C through D = C / (1 + |C|^2 / 2)
    #[arg(long = "map_c", visible_alias = "map-c", num_args = 0..=1, default_missing_value = "true")]
    pub map_c: Option<bool>,
    /// Alice analyzer angle(s); repeat the flag for several values
    #[arg(long)]
    pub theta: Vec<f64>,
    /// Bob analyzer angle(s); repeat the flag for several values
    #[arg(long)]
    pub phi: Vec<f64>,
    /// Interpret every angle as degrees instead of radians
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub degrees: Option<bool>,
    #[arg(long = "n_samples", visible_alias = "n-samples")]
    pub n_samples: Option<usize>,
    /// Batches used for standard errors
    #[arg(long = "n_batches", visible_alias = "n-batches")]
    pub n_batches: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// hilbert_normalized or stochastic_model
    #[arg(long)]
    pub convention: Option<String>,
    /// Alice detector efficiency in [0, 1]
    #[arg(long = "eta_a", visible_alias = "eta-a")]
    pub eta_a: Option<f64>,
    /// Bob detector efficiency in [0, 1]
    #[arg(long = "eta_b", visible_alias = "eta-b")]
    pub eta_b: Option<f64>,
    /// Maximum quanta per mode of the number-basis oracle
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// RK4 steps for the coupled-mode integration
    #[arg(long = "ode_steps", visible_alias = "ode-steps")]
    pub ode_steps: Option<usize>,
    /// Points of the angle-difference scan
    #[arg(long = "n_points", visible_alias = "n-points")]
    pub n_points: Option<usize>,
    /// Worker threads (results do not depend on this)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Exploratory: constant background for the clamped single rate
    #[arg(long = "clamp_floor", visible_alias = "clamp-floor")]
    pub clamp_floor: Option<f64>,
    /// Clauser-Horne angles (default pi/4, 0, pi/8, 3pi/8)
    #[arg(long)]
    pub theta1: Option<f64>,
    #[arg(long)]
    pub theta2: Option<f64>,
    #[arg(long)]
    pub phi1: Option<f64>,
    #[arg(long)]
    pub phi2: Option<f64>,
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub d_re: f64,
    pub d_im: f64,
    pub c_re: Option<f64>,
    pub c_im: Option<f64>,
    pub map_c: bool,
    /// Angles in radians, after unit conversion.
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub degrees: bool,
    pub n_samples: usize,
    pub n_batches: usize,
    pub seed: u64,
    pub convention: Convention,
    pub eta_a: f64,
    pub eta_b: f64,
    pub cutoff: usize,
    pub ode_steps: usize,
    pub n_points: usize,
    pub threads: Option<usize>,
    pub clamp_floor: Option<f64>,
    pub theta1: f64,
    pub theta2: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ch = standard_setting();
        RunConfig {
            d_re: 0.1,
            d_im: 0.0,
            c_re: None,
            c_im: None,
            map_c: false,
            theta: vec![0.0],
            phi: vec![0.0],
            degrees: false,
            n_samples: 1_000_000,
            n_batches: SamplerConfig::DEFAULT_BATCHES,
            seed: 1,
            convention: Convention::StochasticModel,
            eta_a: 1.0,
            eta_b: 1.0,
            cutoff: 3,
            ode_steps: 10_000,
            n_points: 8,
            threads: None,
            clamp_floor: None,
            theta1: ch.theta1,
            theta2: ch.theta2,
            phi1: ch.phi1,
            phi2: ch.phi2,
        }
    }
}

fn key_error(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("invalid value for key `{key}`: {msg}"))
}

impl FileConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("{}: {}", origin.display(), e)))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        FileConfig::parse(&text, path)
    }

    /// Applies command-line overrides; flags win.
    pub fn overlay(mut self, args: &ConfigArgs) -> Self {
        macro_rules! over {
            ($($k:ident),*) => {$( if args.$k.is_some() { self.$k = args.$k.clone(); } )*};
        }
        over!(
            d_re, d_im, c_re, c_im, map_c, degrees, n_samples, n_batches, seed, convention, eta_a, eta_b, cutoff,
            ode_steps, n_points, threads, clamp_floor, theta1, theta2, phi1, phi2
        );
        if !args.theta.is_empty() {
            self.theta = Some(OneOrMany::Many(args.theta.clone()));
        }
        if !args.phi.is_empty() {
            self.phi = Some(OneOrMany::Many(args.phi.clone()));
        }
        self
    }

    /// Fills defaults and validates.
    pub fn resolve(self) -> Result<RunConfig> {
        let def = RunConfig::default();
        let degrees = self.degrees.unwrap_or(false);
        let unit = |x: f64| if degrees { x.to_radians() } else { x };
        let map_c = self.map_c.unwrap_or(false);

        let (d_re, d_im) = if map_c {
            if self.d_re.is_some() || self.d_im.is_some() {
                return Err(key_error("map_c", "cannot be combined with d_re/d_im"));
            }
            if self.c_re.is_none() && self.c_im.is_none() {
                return Err(key_error("map_c", "requires c_re and/or c_im"));
            }
            let d = map_c_to_d(Complex64::new(self.c_re.unwrap_or(0.0), self.c_im.unwrap_or(0.0)));
            (d.re, d.im)
        } else {
            (self.d_re.unwrap_or(def.d_re), self.d_im.unwrap_or(def.d_im))
        };
        if !(d_re.is_finite() && d_im.is_finite()) {
            return Err(key_error("d_re", "D must be finite"));
        }
        check_d(Complex64::new(d_re, d_im)).map_err(|e| key_error("d_re", e))?;

        let angles = |key: &str, v: Option<OneOrMany>, default: &[f64]| -> Result<Vec<f64>> {
            let vals = v.map(OneOrMany::into_vec).unwrap_or_else(|| default.to_vec());
            if vals.is_empty() {
                return Err(key_error(key, "at least one angle is required"));
            }
            if vals.iter().any(|x| !x.is_finite()) {
                return Err(key_error(key, "angles must be finite"));
            }
            Ok(if degrees { vals.into_iter().map(f64::to_radians).collect() } else { vals })
        };
        let theta = angles("theta", self.theta, &def.theta)?;
        let phi = angles("phi", self.phi, &def.phi)?;

        let convention = match self.convention {
            Some(s) => s.parse::<Convention>().map_err(|e| key_error("convention", e))?,
            None => def.convention,
        };

        let n_samples = self.n_samples.unwrap_or(def.n_samples);
        let n_batches = self.n_batches.unwrap_or(def.n_batches);
        let seed = self.seed.unwrap_or(def.seed);
        SamplerConfig { seed, n_samples, n_batches }.validate().map_err(|e| {
            let key = if n_samples == 0 { "n_samples" } else { "n_batches" };
            key_error(key, e)
        })?;

        let eta_a = self.eta_a.unwrap_or(def.eta_a);
        let eta_b = self.eta_b.unwrap_or(def.eta_b);
        EfficiencyPair::new(eta_a, eta_b).map_err(|e| key_error(if (0.0..=1.0).contains(&eta_a) { "eta_b" } else { "eta_a" }, e))?;

        let cutoff = self.cutoff.unwrap_or(def.cutoff);
        if cutoff < 2 {
            return Err(key_error("cutoff", format!("must be at least 2, got {cutoff}")));
        }
        let ode_steps = self.ode_steps.unwrap_or(def.ode_steps);
        if ode_steps == 0 {
            return Err(key_error("ode_steps", "must be at least 1"));
        }
        let n_points = self.n_points.unwrap_or(def.n_points);
        if n_points < 2 {
            return Err(key_error("n_points", format!("must be at least 2, got {n_points}")));
        }
        if self.threads == Some(0) {
            return Err(key_error("threads", "must be at least 1"));
        }
        if let Some(f) = self.clamp_floor {
            if !f.is_finite() {
                return Err(key_error("clamp_floor", "must be finite"));
            }
        }
        let mut ch = [
            ("theta1", self.theta1, def.theta1),
            ("theta2", self.theta2, def.theta2),
            ("phi1", self.phi1, def.phi1),
            ("phi2", self.phi2, def.phi2),
        ]
        .into_iter()
        .map(|(key, v, d)| match v {
            Some(x) if !x.is_finite() => Err(key_error(key, "angles must be finite")),
            Some(x) => Ok(unit(x)),
            None => Ok(d),
        });
        let theta1 = ch.next().unwrap()?;
        let theta2 = ch.next().unwrap()?;
        let phi1 = ch.next().unwrap()?;
        let phi2 = ch.next().unwrap()?;

        Ok(RunConfig {
            d_re,
            d_im,
            c_re: self.c_re,
            c_im: self.c_im,
            map_c,
            theta,
            phi,
            degrees,
            n_samples,
            n_batches,
            seed,
            convention,
            eta_a,
            eta_b,
            cutoff,
            ode_steps,
            n_points,
            threads: self.threads,
            clamp_floor: self.clamp_floor,
            theta1,
            theta2,
            phi1,
            phi2,
        })
    }
}

impl RunConfig {
    /// Loads the optional config file, applies flag overrides and validates.
    pub fn from_args(args: &ConfigArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        file.overlay(args).resolve()
    }

    pub fn d(&self) -> Complex64 {
        Complex64::new(self.d_re, self.d_im)
    }

    /// Pump coupling used by the integrator check: the configured C, or the
    /// C that maps onto the configured D.
    pub fn coupling_c(&self) -> Result<Complex64> {
        match (self.c_re, self.c_im) {
            (None, None) => Ok(SpdcParams::from_d(self.d())?.coupling_c()),
            (re, im) => Ok(Complex64::new(re.unwrap_or(0.0), im.unwrap_or(0.0))),
        }
    }

    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig { seed: self.seed, n_samples: self.n_samples, n_batches: self.n_batches }
    }

    pub fn efficiencies(&self) -> EfficiencyPair {
        EfficiencyPair::new(self.eta_a, self.eta_b).expect("validated on load")
    }

    pub fn ch_setting(&self) -> ChSetting {
        ChSetting::new(self.theta1, self.theta2, self.phi1, self.phi2)
    }

    /// The resolved configuration as a config file that loads back to itself.
    /// Angles are written in the configured unit.
    pub fn to_toml(&self) -> String {
        let unit = |x: f64| if self.degrees { x.to_degrees() } else { x };
        let list = |v: &[f64]| Some(OneOrMany::Many(v.iter().map(|&x| unit(x)).collect()));
        let (d_re, d_im) = if self.map_c { (None, None) } else { (Some(self.d_re), Some(self.d_im)) };
        let file = FileConfig {
            d_re,
            d_im,
            c_re: self.c_re,
            c_im: self.c_im,
            map_c: Some(self.map_c),
            theta: list(&self.theta),
            phi: list(&self.phi),
            degrees: Some(self.degrees),
            n_samples: Some(self.n_samples),
            n_batches: Some(self.n_batches),
            seed: Some(self.seed),
            convention: Some(self.convention.tag().to_string()),
            eta_a: Some(self.eta_a),
            eta_b: Some(self.eta_b),
            cutoff: Some(self.cutoff),
            ode_steps: Some(self.ode_steps),
            n_points: Some(self.n_points),
            threads: self.threads,
            clamp_floor: self.clamp_floor,
            theta1: Some(unit(self.theta1)),
            theta2: Some(unit(self.theta2)),
            phi1: Some(unit(self.phi1)),
            phi2: Some(unit(self.phi2)),
        };
        toml::to_string(&file).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        FileConfig::parse(text, Path::new("test.toml"))?.resolve()
    }

    #[test]
    fn defaults() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn flags_override_file() {
        let file = FileConfig::parse("seed = 5\nd_re = 0.05\ntheta = [0.1, 0.2]", Path::new("x")).unwrap();
        let args = ConfigArgs { seed: Some(9), theta: vec![0.3], ..Default::default() };
        let cfg = file.overlay(&args).resolve().unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.d_re, 0.05);
        assert_eq!(cfg.theta, vec![0.3]);
    }

    #[test]
    fn degrees_convert_all_angles() {
        let cfg = parse("degrees = true\ntheta = 45\nphi = [90]\ntheta1 = 180").unwrap();
        assert!((cfg.theta[0] - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((cfg.phi[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((cfg.theta1 - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn map_c_derives_d() {
        let cfg = parse("map_c = true\nc_re = 0.1").unwrap();
        assert!((cfg.d_re - 0.1 / 1.005).abs() < 1e-15);
        assert!(parse("map_c = true").is_err());
        assert!(parse("map_c = true\nc_re = 0.1\nd_re = 0.1").is_err());
    }

    #[test]
    fn diagnostics_name_the_key() {
        let err = parse("n_batches = 1").unwrap_err().to_string();
        assert!(err.contains("`n_batches`"), "{err}");
        let err = parse("eta_b = 1.5").unwrap_err().to_string();
        assert!(err.contains("`eta_b`"), "{err}");
        let err = parse("convention = \"quantum\"").unwrap_err().to_string();
        assert!(err.contains("`convention`"), "{err}");
        let err = parse("d_re = 1.2").unwrap_err().to_string();
        assert!(err.contains("`d_re`"), "{err}");
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = parse("seed = 1\nbogus = 3\n").unwrap_err().to_string();
        assert!(err.contains("bogus") && err.contains("line 2"), "{err}");
        let err = parse("seed = \"x\"").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn resolved_config_round_trips_as_toml() {
        for text in ["theta = [0.1, 0.2]\nclamp_floor = 0.3", "map_c = true\nc_re = 0.2\nthreads = 2", "degrees = true\nphi = 30"] {
            let cfg = parse(text).unwrap();
            let echo = cfg.to_toml();
            assert!(echo.contains("convention = \"stochastic_model\""));
            let again = parse(&echo).unwrap();
            assert_eq!(again.to_toml(), echo);
            assert!((again.phi[0] - cfg.phi[0]).abs() < 1e-15);
        }
    }
}
