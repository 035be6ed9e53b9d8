//! JSON configuration file for the command-line tool.
//!
//! ```json
//! {
//!   "sensing": { "r_db": 5, "n_in": 1000, "lambda0_nm": 815 },
//!   "channel": { "eta1": 0.7, "eta2": 0.6, "policy": "shared" },
//!   "link": { "path1": { "eta_detector": 0.8, "geometry": { ... } } },
//!   "sweep": { "variable": "eta_symmetric", "start": 0.01, "stop": 1, "steps": 100 }
//! }
//! ```
//!
//! Every field is optional. Explicit `channel` transmissivities win over
//! those derived from `link` budgets; command-line flags win over both.

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gaussian::VacuumPolicy;
use crate::link::{compose_eta, LinkBudget, LinkGeometry};
use crate::sensing::{omega_from_wavelength, ChannelPair, SensingConfig};
use crate::sweep::{SweepScheme, SweepVariable};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub sensing: SensingSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingSection {
    pub r_db: Option<f64>,
    pub n_in: Option<f64>,
    pub n_lo: Option<f64>,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    pub theta_lo: Option<f64>,
    pub lambda0_nm: Option<f64>,
    pub omega0: Option<f64>,
    pub delta_omega: Option<f64>,
    pub split: Option<f64>,
    pub snr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Shared,
    Independent,
}

impl PolicyName {
    pub fn policy(self) -> VacuumPolicy {
        match self {
            PolicyName::Shared => VacuumPolicy::Shared(0),
            PolicyName::Independent => VacuumPolicy::Independent,
        }
    }
}

impl FromStr for PolicyName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shared" => Ok(PolicyName::Shared),
            "independent" => Ok(PolicyName::Independent),
            other => Err(Error::param("policy", format!("unknown vacuum policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub policy: Option<PolicyName>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub eta_diffraction: Option<f64>,
    pub eta_pointing: Option<f64>,
    pub eta_detector: Option<f64>,
    /// When present, diffraction and pointing factors are computed from it
    /// unless given explicitly.
    pub geometry: Option<LinkGeometry>,
}

impl BudgetSection {
    pub fn budget(&self) -> Result<LinkBudget> {
        let base = match self.geometry {
            Some(g) => LinkBudget::from_geometry(g, self.eta_detector.unwrap_or(1.0))?,
            None => LinkBudget::default(),
        };
        Ok(LinkBudget {
            eta_diffraction: self.eta_diffraction.unwrap_or(base.eta_diffraction),
            eta_pointing: self.eta_pointing.unwrap_or(base.eta_pointing),
            eta_detector: self.eta_detector.unwrap_or(base.eta_detector),
            geometry: self.geometry,
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub path1: Option<BudgetSection>,
    pub path2: Option<BudgetSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: Option<SweepVariable>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<usize>,
    pub log: Option<bool>,
    pub schemes: Option<Vec<SweepScheme>>,
    pub levels_db: Option<Vec<f64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Config {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn apply_sensing(&self, cfg: &mut SensingConfig) {
        let s = &self.sensing;
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut cfg.r_db, s.r_db);
        set(&mut cfg.n_in, s.n_in);
        set(&mut cfg.n_lo, s.n_lo);
        set(&mut cfg.theta1, s.theta1);
        set(&mut cfg.theta2, s.theta2);
        set(&mut cfg.theta_lo, s.theta_lo);
        set(&mut cfg.omega0, s.lambda0_nm.map(|nm| omega_from_wavelength(nm * 1e-9)));
        set(&mut cfg.omega0, s.omega0);
        set(&mut cfg.delta_omega, s.delta_omega);
        set(&mut cfg.split, s.split);
        set(&mut cfg.snr, s.snr);
    }

    /// Starts from lossless shared-vacuum channels, then applies link
    /// budgets, then explicit channel values.
    pub fn apply_channel(&self, ch: &mut ChannelPair) -> Result<()> {
        if let Some(b) = &self.link.path1 {
            ch.eta1 = compose_eta(&b.budget()?)?;
        }
        if let Some(b) = &self.link.path2 {
            ch.eta2 = compose_eta(&b.budget()?)?;
        }
        if let Some(e) = self.channel.eta1 {
            ch.eta1 = e;
        }
        if let Some(e) = self.channel.eta2 {
            ch.eta2 = e;
        }
        if let Some(p) = self.channel.policy {
            ch.policy = p.policy();
        }
        ch.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Write;

    fn parse(s: &str) -> FileConfig {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn empty_config_keeps_defaults() {
        let c = parse("{}");
        let mut s = SensingConfig::default();
        c.apply_sensing(&mut s);
        assert_eq!(s, SensingConfig::default());
        let mut ch = ChannelPair::lossless();
        c.apply_channel(&mut ch).unwrap();
        assert_eq!(ch, ChannelPair::lossless());
    }

    #[test]
    fn sections_apply() {
        let c = parse(
            r#"{
                "sensing": {"r_db": 5, "n_in": 2000, "lambda0_nm": 1550},
                "channel": {"eta2": 0.4, "policy": "independent"},
                "link": {"path1": {"eta_diffraction": 0.8, "eta_detector": 0.9},
                         "path2": {"eta_detector": 0.1}},
                "sweep": {"variable": "eta1", "steps": 10, "schemes": ["tmsv", "sql"]}
            }"#,
        );
        let mut s = SensingConfig::default();
        c.apply_sensing(&mut s);
        assert_eq!(s.r_db, 5.0);
        assert_eq!(s.n_in, 2000.0);
        assert_relative_eq!(s.omega0, omega_from_wavelength(1550e-9));
        let mut ch = ChannelPair::lossless();
        c.apply_channel(&mut ch).unwrap();
        assert_relative_eq!(ch.eta1, 0.72, max_relative = 1e-15);
        assert_eq!(ch.eta2, 0.4);
        assert_eq!(ch.policy, VacuumPolicy::Independent);
        assert_eq!(c.sweep.variable, Some(SweepVariable::Eta1));
        assert_eq!(c.sweep.schemes.as_deref(), Some(&[SweepScheme::Tmsv, SweepScheme::Sql][..]));
    }

    #[test]
    fn geometry_budget() {
        let c = parse(
            r#"{"link": {"path1": {"eta_detector": 0.5, "geometry": {
                "range_m": 1000.0, "tx_waist_m": 0.05, "rx_aperture_m": 0.5,
                "wavelength_m": 8.15e-7}}}}"#,
        );
        let mut ch = ChannelPair::lossless();
        c.apply_channel(&mut ch).unwrap();
        assert!(ch.eta1 > 0.49 && ch.eta1 <= 0.5);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"sensng": {}}"#).is_err());
        let c = parse(r#"{"channel": {"eta1": 1.5}}"#);
        assert!(c.apply_channel(&mut ChannelPair::lossless()).is_err());
    }

    #[test]
    fn load_reports_path() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "{{ not json").unwrap();
        let err = FileConfig::load(f.path()).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        assert!(matches!(
            FileConfig::load(Path::new("/does/not/exist.json")),
            Err(Error::Io { .. })
        ));
    }
}
