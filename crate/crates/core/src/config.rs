//! Flat, sectioned key-value configuration.
//!
//! Documents are TOML. Every leaf is addressed by its dotted path
//! (`params.nu`, `control.segments`, ...), unknown paths are rejected, and
//! real numbers may be written as literals or as simple multiples of `pi`
//! (`"pi"`, `"2*pi"`, `"pi/2"`, `"0.5*pi"`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::params::{ChannelParams, TolerancePolicy};

/// Every key accepted in a configuration document.
pub const KNOWN_KEYS: &[&str] = &[
    "params.nu",
    "params.alpha",
    "params.L",
    "tol.root_abs_tol",
    "tol.residual_rel_tol",
    "tol.svd_null_ratio",
    "tol.bracket_grid_step",
    "tol.sep_tol",
    "spectra.k_list",
    "spectra.count_stokes",
    "spectra.count_dirichlet",
    "spectra.search_ceiling",
    "scan.alpha_lo",
    "scan.alpha_hi",
    "scan.grid_step",
    "scan.k_list",
    "scan.j_list",
    "verdict.two_control",
    "verdict.export_eigenfunctions",
    "verdict.samples",
    "control.k",
    "control.n_u",
    "control.n_theta",
    "control.segments",
    "control.T",
    "control.dt",
    "control.seed",
    "control.eps_bound",
    "control.grid_n",
    "control.ridge",
    "control.x0",
    "control.target_file",
    "detcheck.samples",
    "detcheck.seed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraOptions {
    pub k_list: Vec<i32>,
    pub count_stokes: usize,
    pub count_dirichlet: usize,
    /// Upper end of the dispersion search grid; derived from the counts when absent.
    pub search_ceiling: Option<f64>,
}

impl Default for SpectraOptions {
    fn default() -> Self {
        Self {
            k_list: vec![1],
            count_stokes: 5,
            count_dirichlet: 5,
            search_ceiling: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Absolute bounds; defaults are `0.05 nu` and `0.95 nu`.
    pub alpha_lo: Option<f64>,
    pub alpha_hi: Option<f64>,
    pub grid_step: f64,
    pub k_list: Vec<i32>,
    pub j_list: Vec<usize>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            alpha_lo: None,
            alpha_hi: None,
            grid_step: 1e-5,
            k_list: vec![1],
            j_list: vec![1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictOptions {
    pub two_control: bool,
    pub export_eigenfunctions: bool,
    pub samples: usize,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self {
            two_control: true,
            export_eigenfunctions: false,
            samples: 1025,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    Zero,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlOptions {
    pub k: i32,
    pub n_u: usize,
    pub n_theta: usize,
    pub segments: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Time step; `T / 512` when absent.
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub eps_bound: f64,
    pub grid_n: usize,
    pub ridge: f64,
    pub x0: InitialState,
    pub target_file: Option<String>,
}

impl Default for ControlOptions {
    fn default() -> Self {
        Self {
            k: 1,
            n_u: 8,
            n_theta: 8,
            segments: 32,
            horizon: 1.0,
            dt: None,
            seed: None,
            eps_bound: 0.1,
            grid_n: 64,
            ridge: 0.0,
            x0: InitialState::Zero,
            target_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetcheckOptions {
    pub samples: usize,
    pub seed: Option<u64>,
}

impl Default for DetcheckOptions {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub spectra: SpectraOptions,
    pub scan: ScanOptions,
    pub verdict: VerdictOptions,
    pub control: ControlOptions,
    pub detcheck: DetcheckOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub params: ChannelParams,
    pub tol: TolerancePolicy,
    pub options: RunOptions,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
    let mut flat = BTreeMap::new();
    flatten("", &toml::Value::Table(table), &mut flat);

    let unknown: Vec<String> = flat
        .keys()
        .filter(|k| !KNOWN_KEYS.contains(&k.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(ConfigError::UnknownKeys(unknown));
    }

    let doc = Flat(flat);
    let nu = doc.required_real("params.nu")?;
    let alpha = doc.required_real("params.alpha")?;
    let l = doc.required_real("params.L")?;

    let defaults = TolerancePolicy::default();
    let tol = TolerancePolicy {
        root_abs_tol: doc.real_or("tol.root_abs_tol", defaults.root_abs_tol)?,
        residual_rel_tol: doc.real_or("tol.residual_rel_tol", defaults.residual_rel_tol)?,
        svd_null_ratio: doc.real_or("tol.svd_null_ratio", defaults.svd_null_ratio)?,
        bracket_grid_step: doc.real_or("tol.bracket_grid_step", defaults.bracket_grid_step)?,
        sep_tol: doc.real_or("tol.sep_tol", defaults.sep_tol)?,
    }
    .validate()?;
    let params = ChannelParams::with_sep_tol(nu, alpha, l, tol.sep_tol)?;

    let d = RunOptions::default();
    let spectra = SpectraOptions {
        k_list: doc.int_list_or("spectra.k_list", d.spectra.k_list)?,
        count_stokes: doc.count_or("spectra.count_stokes", d.spectra.count_stokes)?,
        count_dirichlet: doc.count_or("spectra.count_dirichlet", d.spectra.count_dirichlet)?,
        search_ceiling: doc.optional_real("spectra.search_ceiling")?,
    };
    let scan = ScanOptions {
        alpha_lo: doc.optional_real("scan.alpha_lo")?,
        alpha_hi: doc.optional_real("scan.alpha_hi")?,
        grid_step: doc.real_or("scan.grid_step", d.scan.grid_step)?,
        k_list: doc.int_list_or("scan.k_list", d.scan.k_list)?,
        j_list: doc
            .int_list_or("scan.j_list", d.scan.j_list.iter().map(|&j| j as i32).collect())?
            .into_iter()
            .map(|j| {
                usize::try_from(j).ok().filter(|&j| j >= 1).ok_or_else(|| {
                    ConfigError::InvalidValue {
                        key: "scan.j_list".into(),
                        message: format!("indices must be >= 1, got {j}"),
                    }
                })
            })
            .collect::<Result<_, _>>()?,
    };
    let verdict = VerdictOptions {
        two_control: doc.bool_or("verdict.two_control", d.verdict.two_control)?,
        export_eigenfunctions: doc
            .bool_or("verdict.export_eigenfunctions", d.verdict.export_eigenfunctions)?,
        samples: doc.count_or("verdict.samples", d.verdict.samples)?,
    };
    let control = ControlOptions {
        k: doc.int_or("control.k", i64::from(d.control.k))? as i32,
        n_u: doc.count_or("control.n_u", d.control.n_u)?,
        n_theta: doc.count_or("control.n_theta", d.control.n_theta)?,
        segments: doc.count_or("control.segments", d.control.segments)?,
        horizon: doc.real_or("control.T", d.control.horizon)?,
        dt: doc.optional_real("control.dt")?,
        seed: doc.optional_seed("control.seed")?,
        eps_bound: doc.real_or("control.eps_bound", d.control.eps_bound)?,
        grid_n: doc.count_or("control.grid_n", d.control.grid_n)?,
        ridge: doc.real_or("control.ridge", d.control.ridge)?,
        x0: match doc.string("control.x0")?.as_deref() {
            None | Some("zero") => InitialState::Zero,
            Some("random") => InitialState::Random,
            Some(other) => {
                return Err(ConfigError::InvalidValue {
                    key: "control.x0".into(),
                    message: format!("expected \"zero\" or \"random\", got {other:?}"),
                })
            }
        },
        target_file: doc.string("control.target_file")?,
    };
    if control.ridge < 0.0 {
        return Err(ConfigError::InvalidValue {
            key: "control.ridge".into(),
            message: "must be >= 0".into(),
        });
    }
    let detcheck = DetcheckOptions {
        samples: doc.count_or("detcheck.samples", d.detcheck.samples)?,
        seed: doc.optional_seed("detcheck.seed")?,
    };

    Ok(Config {
        params,
        tol,
        options: RunOptions {
            spectra,
            scan,
            verdict,
            control,
            detcheck,
        },
    })
}

/// Renders parameters and tolerances as a document accepted by [`parse_config`].
///
/// Floats are written in shortest round-trip form, so parsing the output
/// recovers the same bits.
pub fn render_params(params: &ChannelParams, tol: &TolerancePolicy) -> String {
    format!(
        "[params]\nnu = {:?}\nalpha = {:?}\nL = {:?}\n\n[tol]\nroot_abs_tol = {:?}\nresidual_rel_tol = {:?}\nsvd_null_ratio = {:?}\nbracket_grid_step = {:?}\nsep_tol = {:?}\n",
        params.nu(),
        params.alpha(),
        params.l(),
        tol.root_abs_tol,
        tol.residual_rel_tol,
        tol.svd_null_ratio,
        tol.bracket_grid_step,
        tol.sep_tol,
    )
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut BTreeMap<String, toml::Value>) {
    match value {
        toml::Value::Table(table) => {
            for (key, v) in table {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten(&path, v, out);
            }
        }
        leaf => {
            out.insert(prefix.to_string(), leaf.clone());
        }
    }
}

struct Flat(BTreeMap<String, toml::Value>);

impl Flat {
    fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::InvalidValue {
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn required_real(&self, key: &str) -> Result<f64, ConfigError> {
        self.optional_real(key)?.ok_or_else(|| {
            let short = key.rsplit('.').next().unwrap_or(key);
            ConfigError::MissingKey(format!("{short} ({key})"))
        })
    }

    fn optional_real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(toml::Value::String(s)) => parse_real_expr(s)
                .map(Some)
                .ok_or_else(|| Self::invalid(key, format!("cannot parse {s:?} as a real number"))),
            Some(other) => Err(Self::invalid(key, format!("expected a number, got {other}"))),
        }
    }

    fn real_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.optional_real(key)?.unwrap_or(default))
    }

    fn int_or(&self, key: &str, default: i64) -> Result<i64, ConfigError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(i)) => Ok(*i),
            Some(other) => Err(Self::invalid(key, format!("expected an integer, got {other}"))),
        }
    }

    fn count_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        let v = self.int_or(key, default as i64)?;
        usize::try_from(v)
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Self::invalid(key, format!("expected a positive integer, got {v}")))
    }

    fn optional_seed(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(other) => Err(Self::invalid(
                key,
                format!("expected a non-negative integer, got {other}"),
            )),
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(toml::Value::Boolean(b)) => Ok(*b),
            Some(other) => Err(Self::invalid(key, format!("expected a boolean, got {other}"))),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(Self::invalid(key, format!("expected a string, got {other}"))),
        }
    }

    fn int_list_or(&self, key: &str, default: Vec<i32>) -> Result<Vec<i32>, ConfigError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(i)) => Ok(vec![*i as i32]),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    toml::Value::Integer(i) => Ok(*i as i32),
                    other => Err(Self::invalid(key, format!("expected integers, got {other}"))),
                })
                .collect(),
            Some(other) => Err(Self::invalid(key, format!("expected a list of integers, got {other}"))),
        }
    }
}

/// Parses `x`, `pi`, `x*pi`, `pi/x` or `x*pi/y`.
fn parse_real_expr(s: &str) -> Option<f64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.to_ascii_lowercase();
    if let Ok(x) = s.parse::<f64>() {
        return Some(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d.parse::<f64>().ok()?)),
        None => (s.as_str(), None),
    };
    let factor = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(prefix) => prefix.strip_suffix('*')?.parse::<f64>().ok()?,
        None => return None,
    };
    let value = factor * std::f64::consts::PI;
    Some(match den {
        Some(d) => value / d,
        None => value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_document() {
        let cfg = parse_config("[params]\nnu = 1\nalpha = 0.5\nL = 3.14159\n").unwrap();
        assert_eq!(cfg.params.nu(), 1.0);
        assert_eq!(cfg.params.alpha(), 0.5);
        assert_eq!(cfg.params.l(), 3.14159);
        assert_eq!(cfg.options, RunOptions::default());
    }

    #[test]
    fn alpha_equal_nu_rejected() {
        let err = parse_config("[params]\nnu = 1\nalpha = 1\nL = 1\n").unwrap_err();
        assert!(err.to_string().contains("alpha equals nu"), "{err}");
    }

    #[test]
    fn missing_height_rejected() {
        let err = parse_config("[params]\nnu = 1\nalpha = 0.5\n").unwrap_err();
        assert_eq!(err, ConfigError::MissingKey("L (params.L)".into()));
        assert!(err.to_string().starts_with("missing key L"));
    }

    #[test]
    fn unknown_keys_are_listed() {
        let err = parse_config(
            "[params]\nnu = 1\nalpha = 0.5\nL = 1\nfoo = 2\n[control]\nsegmnets = 3\n",
        )
        .unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKeys(vec!["control.segmnets".into(), "params.foo".into()])
        );
    }

    #[test]
    fn pi_expressions() {
        use std::f64::consts::PI;
        assert_eq!(parse_real_expr("pi"), Some(PI));
        assert_eq!(parse_real_expr("2*pi"), Some(2.0 * PI));
        assert_eq!(parse_real_expr("pi/2"), Some(PI / 2.0));
        assert_eq!(parse_real_expr(" 0.5 * pi / 4"), Some(0.5 * PI / 4.0));
        assert_eq!(parse_real_expr("pie"), None);
        let cfg = parse_config("[params]\nnu = 1\nalpha = 0.4\nL = \"pi\"\n").unwrap();
        assert_eq!(cfg.params.l(), PI);
    }

    #[test]
    fn sections_parsed() {
        let cfg = parse_config(
            r#"
            [params]
            nu = 1
            alpha = 0.4
            L = "pi"
            [spectra]
            k_list = [1, -2, 3]
            count_stokes = 4
            [control]
            segments = 64
            seed = 7
            x0 = "random"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.options.spectra.k_list, vec![1, -2, 3]);
        assert_eq!(cfg.options.spectra.count_stokes, 4);
        assert_eq!(cfg.options.control.segments, 64);
        assert_eq!(cfg.options.control.seed, Some(7));
        assert_eq!(cfg.options.control.x0, InitialState::Random);
    }

    #[test]
    fn bad_tolerance_rejected() {
        let err = parse_config("[params]\nnu=1\nalpha=0.4\nL=1\n[tol]\nsvd_null_ratio = 2.0\n")
            .unwrap_err();
        assert!(matches!(err, ConfigError::Param(_)));
    }

    #[test]
    fn rejection_is_deterministic() {
        let doc = "[params]\nnu = 1\nalpha = 1\nL = -1\nzz = 1\naa = 2\n";
        let a = parse_config(doc).unwrap_err().to_string();
        let b = parse_config(doc).unwrap_err().to_string();
        assert_eq!(a, b);
        assert_eq!(a, "unknown keys: params.aa, params.zz");
    }

    proptest! {
        #[test]
        fn params_round_trip_bit_exact(
            nu in 1e-6f64..1e6,
            alpha in 1e-6f64..1e6,
            l in 1e-6f64..1e6,
        ) {
            prop_assume!((alpha - nu).abs() > 1e-6);
            let params = ChannelParams::new(nu, alpha, l).unwrap();
            let tol = TolerancePolicy::default();
            let cfg = parse_config(&render_params(&params, &tol)).unwrap();
            prop_assert_eq!(cfg.params.nu().to_bits(), nu.to_bits());
            prop_assert_eq!(cfg.params.alpha().to_bits(), alpha.to_bits());
            prop_assert_eq!(cfg.params.l().to_bits(), l.to_bits());
            prop_assert_eq!(cfg.tol, tol);
        }
    }
}
