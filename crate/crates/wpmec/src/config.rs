//! Flat key-value configuration.
//!
//! A config file is TOML with top-level scalar entries only, e.g.
//!
//! ```toml
//! p0 = 3.0
//! d_20 = 12
//! mode = "comm_only"
//! ```
//!
//! Keys `p0_db`, `n0_db`, `gamma_db` and `ga_db` take decibels
//! (dBW for the powers) and are converted on the spot.

use std::path::Path;

use wpmec_core::{CooperationMode, GoldenSectionConfig, Instance, PathLossModel, SolveOptions, SystemParams};

use crate::error::{Error, Result};

/// Every accepted key, in file order of the documentation.
pub const KEYS: [&str; 25] = [
    "p0",
    "mu",
    "n0",
    "gamma",
    "bandwidth",
    "nu",
    "phi",
    "k1",
    "k2",
    "k2c",
    "f1max",
    "f2max",
    "frame",
    "w1",
    "ga",
    "fc",
    "lambda",
    "d_e1",
    "d_e2",
    "d_12",
    "d_20",
    "mode",
    "gs_epsilon",
    "gs_sigma",
    "prescan",
];

/// Keys that also accept a `_db` form.
pub const DB_KEYS: [&str; 4] = ["p0", "n0", "gamma", "ga"];

/// Pre-scan grid size used unless the config says otherwise.
pub const DEFAULT_PRESCAN: usize = 21;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: SystemParams,
    pub path_loss: PathLossModel,
    pub mode: CooperationMode,
    pub golden: GoldenSectionConfig,
    /// Keys assigned so far, after stripping `_db`.
    seen: Vec<&'static str>,
    k2c_explicit: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            params: SystemParams::default(),
            path_loss: PathLossModel::default(),
            mode: CooperationMode::Full,
            golden: GoldenSectionConfig::default().with_prescan(DEFAULT_PRESCAN),
            seen: Vec::new(),
            k2c_explicit: false,
        }
    }
}

fn number(key: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| Error::BadValue { key: key.into(), reason: format!("`{raw}` is not a number") })?;
    if !v.is_finite() {
        return Err(Error::BadValue { key: key.into(), reason: format!("`{raw}` is not finite") });
    }
    Ok(v)
}

fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl Config {
    /// Reads a config file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        let table: toml::Table = text.parse().map_err(|source| Error::Toml { path: path.into(), source })?;
        let mut cfg = Self::default();
        cfg.merge_table(&table)?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|source| Error::Toml { path: "<inline>".into(), source })?;
        let mut cfg = Self::default();
        cfg.merge_table(&table)?;
        Ok(cfg)
    }

    fn merge_table(&mut self, table: &toml::Table) -> Result<()> {
        for k in DB_KEYS {
            let db = format!("{k}_db");
            if table.contains_key(k) && table.contains_key(&db) {
                return Err(Error::Conflict(k.into(), db));
            }
        }
        for (key, value) in table {
            let raw = match value {
                toml::Value::String(s) => s.clone(),
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(f) => f.to_string(),
                _ => {
                    return Err(Error::BadValue {
                        key: key.clone(),
                        reason: format!("expected a number or a string, got {}", value.type_str()),
                    })
                }
            };
            self.set(key, &raw)?;
        }
        Ok(())
    }

    /// Applies a `KEY=VALUE` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) =
            pair.split_once('=').ok_or_else(|| Error::Usage(format!("override `{pair}` is not KEY=VALUE")))?;
        self.set(key.trim(), value)
    }

    /// Assigns one key; a later assignment of the same key wins.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let (base, db) = match key.strip_suffix("_db") {
            Some(b) if DB_KEYS.contains(&b) => (b, true),
            _ => (key, false),
        };
        let Some(&name) = KEYS.iter().find(|k| **k == base) else {
            return Err(Error::UnknownKey(key.into()));
        };
        self.seen.push(name);
        if name == "mode" {
            self.mode = CooperationMode::from_name(raw.trim()).ok_or_else(|| Error::BadValue {
                key: key.into(),
                reason: format!("`{raw}` is not one of full, comm_only, comp_only"),
            })?;
            return Ok(());
        }
        if name == "prescan" {
            self.golden.prescan_points = raw
                .trim()
                .parse()
                .map_err(|_| Error::BadValue { key: key.into(), reason: format!("`{raw}` is not a point count") })?;
            return Ok(());
        }
        let mut v = number(key, raw)?;
        if db {
            v = from_db(v);
        }
        let (p, pl) = (&mut self.params, &mut self.path_loss);
        match name {
            "p0" => p.p0 = v,
            "mu" => p.mu = v,
            "n0" => p.n0 = v,
            "gamma" => p.gamma = v,
            "bandwidth" => p.bandwidth = v,
            "nu" => p.nu = v,
            "phi" => p.phi = v,
            "k1" => p.k1 = v,
            "k2" => p.k2 = v,
            "k2c" => {
                p.k2c = v;
                self.k2c_explicit = true;
            }
            "f1max" => p.f1_max = v,
            "f2max" => p.f2_max = v,
            "frame" => p.frame = v,
            "w1" => *p = p.with_w1(v),
            "ga" => pl.antenna_gain = v,
            "fc" => pl.carrier_hz = v,
            "lambda" => pl.exponent = v,
            "d_e1" => pl.d_e1 = v,
            "d_e2" => pl.d_e2 = v,
            "d_12" => pl.d_12 = v,
            "d_20" => pl.d_20 = v,
            "gs_epsilon" => self.golden.epsilon = v,
            "gs_sigma" => self.golden.sigma = v,
            _ => unreachable!("key list and match arms disagree on `{name}`"),
        }
        if name == "k2" && !self.k2c_explicit {
            p.k2c = v;
        }
        Ok(())
    }

    /// Keys assigned so far.
    pub fn assigned(&self) -> &[&'static str] {
        &self.seen
    }

    /// Validated instance; violations name the config key.
    pub fn instance(&self) -> Result<Instance> {
        Ok(Instance::from_path_loss(self.params, &self.path_loss)?)
    }

    pub fn solve_options(&self) -> Result<SolveOptions> {
        let golden = GoldenSectionConfig { upper: self.params.frame, ..self.golden };
        golden
            .validate(self.params.frame)
            .map_err(|e| Error::BadValue { key: search_key(&golden).into(), reason: e.to_string() })?;
        Ok(SolveOptions { golden, ..SolveOptions::default() })
    }

    /// Instance and options together, so that nothing runs on a bad file.
    pub fn checked(&self) -> Result<(Instance, SolveOptions)> {
        let inst = self.instance()?;
        Ok((inst, self.solve_options()?))
    }
}

fn search_key(g: &GoldenSectionConfig) -> &'static str {
    if !(g.sigma > 0.5 && g.sigma < 1.0) {
        "gs_sigma"
    } else if !(g.epsilon > 0.0) {
        "gs_epsilon"
    } else if g.prescan_points != 0 && g.prescan_points < 3 {
        "prescan"
    } else {
        "frame"
    }
}

/// Reads `path` if given, then applies the overrides in order.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config> {
    let mut cfg = match path {
        Some(p) => Config::from_file(p)?,
        None => Config::default(),
    };
    for pair in overrides {
        cfg.set_pair(pair)?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = Config::default();
        let (inst, opts) = cfg.checked().unwrap();
        assert_eq!(inst, Instance::reference());
        assert_eq!(opts.golden.prescan_points, DEFAULT_PRESCAN);
    }

    #[test]
    fn every_key_is_accepted() {
        let mut cfg = Config::default();
        for key in KEYS {
            let v = match key {
                "mode" => "comp_only",
                "prescan" => "5",
                _ => "0.5",
            };
            cfg.set(key, v).unwrap();
        }
        assert_eq!(cfg.assigned().len(), KEYS.len());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Config::from_toml_str("mu = 0.5\nfreq = 2").unwrap_err();
        assert!(matches!(err, Error::UnknownKey(ref k) if k == "freq"));
        assert!(matches!(Config::default().set("mu_db", "1"), Err(Error::UnknownKey(_))));
    }

    #[test]
    fn bad_mu_is_named() {
        let cfg = Config::from_toml_str("mu = 1.5").unwrap();
        let msg = cfg.instance().unwrap_err().to_string();
        assert!(msg.contains("`mu`"), "{msg}");
    }

    #[test]
    fn decibels_convert() {
        let cfg = Config::from_toml_str("p0_db = 10\nn0_db = -100\ngamma_db = 0").unwrap();
        assert!((cfg.params.p0 - 10.0).abs() < 1e-12);
        assert!((cfg.params.n0 - 1e-10).abs() < 1e-22);
        assert_eq!(cfg.params.gamma, 1.0);
    }

    #[test]
    fn both_forms_conflict() {
        assert!(matches!(Config::from_toml_str("p0 = 3\np0_db = 4"), Err(Error::Conflict(..))));
    }

    #[test]
    fn k2c_follows_k2_unless_set() {
        let cfg = Config::from_toml_str("k2 = 2e-26").unwrap();
        assert_eq!(cfg.params.k2c, 2e-26);
        let cfg = Config::from_toml_str("k2c = 5e-27\nk2 = 2e-26").unwrap();
        assert_eq!(cfg.params.k2c, 5e-27);
    }

    #[test]
    fn w1_sets_w2() {
        let cfg = Config::from_toml_str("w1 = 0.25").unwrap();
        assert_eq!(cfg.params.w2, 0.75);
    }

    #[test]
    fn overrides_win() {
        let mut cfg = Config::from_toml_str("d_20 = 12\nmode = \"comm_only\"").unwrap();
        cfg.set_pair("d_20=7").unwrap();
        cfg.set_pair("mode=full").unwrap();
        assert_eq!(cfg.path_loss.d_20, 7.0);
        assert_eq!(cfg.mode, CooperationMode::Full);
        assert!(matches!(cfg.set_pair("d_20"), Err(Error::Usage(_))));
    }

    #[test]
    fn bad_values_name_the_key() {
        let e = Config::from_toml_str("phi = \"many\"").unwrap_err().to_string();
        assert!(e.contains("`phi`"), "{e}");
        let e = Config::from_toml_str("mode = \"both\"").unwrap_err().to_string();
        assert!(e.contains("`mode`"), "{e}");
        let e = Config::from_toml_str("gs_sigma = 0.3").unwrap().solve_options().unwrap_err().to_string();
        assert!(e.contains("`gs_sigma`"), "{e}");
        let e = Config::from_toml_str("d_12 = [1, 2]").unwrap_err().to_string();
        assert!(e.contains("`d_12`"), "{e}");
    }
}
