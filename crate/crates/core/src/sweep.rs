//! Parameter sweeps over the closed-form offsets.
//!
//! Every evaluation is a pure function of its inputs, so grids can be
//! evaluated in parallel and reassembled in index order without changing a
//! single output byte.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::VacuumPolicy;
use crate::sensing::{
    delta_u_smsv_real, delta_u_sql, delta_u_tmsv_real, quantum_advantage, ChannelPair, SensingConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    EtaSymmetric,
    Eta1,
    Eta2,
    RDb,
    NIn,
}

impl SweepVariable {
    pub fn column(&self) -> &'static str {
        match self {
            SweepVariable::EtaSymmetric => "eta",
            SweepVariable::Eta1 => "eta1",
            SweepVariable::Eta2 => "eta2",
            SweepVariable::RDb => "r_db",
            SweepVariable::NIn => "n_in",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    /// Space the points logarithmically instead of linearly.
    #[serde(default)]
    pub log: bool,
}

impl Range {
    pub fn linear(start: f64, stop: f64, steps: usize) -> Self {
        Self {
            start,
            stop,
            steps,
            log: false,
        }
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::param(name, format!("{} steps; need at least 2", self.steps)));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::param(
                name,
                format!("start {} must be below stop {}", self.start, self.stop),
            ));
        }
        if self.log && self.start <= 0.0 {
            return Err(Error::param(name, "log spacing needs a positive start"));
        }
        Ok(())
    }

    /// Grid points; the last one equals `stop` exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    return self.stop;
                }
                let f = k as f64 / last;
                if self.log {
                    self.start * (self.stop / self.start).powf(f)
                } else {
                    self.start + (self.stop - self.start) * f
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepScheme {
    Tmsv,
    Sql,
    Smsv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub range: Range,
    pub sensing: SensingConfig,
    pub channel: ChannelPair,
    pub schemes: Vec<SweepScheme>,
    /// Squeezing levels for the TMSV and SMSV columns. Empty means use
    /// `sensing.r_db`. Ignored when sweeping `r_db` itself.
    #[serde(default)]
    pub levels_db: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridQuantity {
    DeltaU,
    Advantage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub eta1: Range,
    pub eta2: Range,
    pub sensing: SensingConfig,
    pub policy: VacuumPolicy,
    pub quantity: GridQuantity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

/// Tabulated sweep output plus an echo of the spec that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// `(rows along eta1, rows along eta2)` for grid results; row
    /// `i * n2 + j` holds point `(i, j)`.
    pub shape: Option<(usize, usize)>,
    pub config: serde_json::Value,
}

impl SweepResult {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    fn check_finite(self) -> Result<Self> {
        if let Some((i, row)) = self.rows.iter().enumerate().find(|(_, r)| r.iter().any(|v| !v.is_finite())) {
            return Err(Error::Divergent(format!("row {i} has a non-finite value: {row:?}")));
        }
        Ok(self)
    }
}

fn level_label(db: f64) -> String {
    format!("{db}db")
}

fn check_eta_range(range: &Range, name: &'static str) -> Result<()> {
    range.validate(name)?;
    if range.start <= 0.0 || range.stop > 1.0 {
        return Err(Error::param(
            name,
            format!("[{}, {}] must lie inside (0, 1]", range.start, range.stop),
        ));
    }
    Ok(())
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.sensing.validate()?;
        self.channel.validate()?;
        if self.schemes.is_empty() {
            return Err(Error::param("schemes", "select at least one scheme"));
        }
        match self.variable {
            SweepVariable::EtaSymmetric | SweepVariable::Eta1 | SweepVariable::Eta2 => {
                check_eta_range(&self.range, "range")?
            }
            SweepVariable::RDb => {
                self.range.validate("range")?;
                if self.range.start < 0.0 {
                    return Err(Error::param("range", "squeezing must be non-negative"));
                }
            }
            SweepVariable::NIn => {
                self.range.validate("range")?;
                if self.range.start <= 0.0 {
                    return Err(Error::param("range", "photon number must be positive"));
                }
            }
        }
        for db in &self.levels_db {
            crate::sensing::r_from_db(*db)?;
        }
        Ok(())
    }

    fn point(&self, x: f64) -> (SensingConfig, ChannelPair) {
        let mut cfg = self.sensing;
        let mut ch = self.channel;
        match self.variable {
            SweepVariable::EtaSymmetric => {
                ch.eta1 = x;
                ch.eta2 = x;
            }
            SweepVariable::Eta1 => ch.eta1 = x,
            SweepVariable::Eta2 => ch.eta2 = x,
            SweepVariable::RDb => cfg.r_db = x,
            SweepVariable::NIn => cfg.n_in = x,
        }
        (cfg, ch)
    }

    /// Squeezing levels to tabulate; `None` means the config's own level.
    fn levels(&self) -> Vec<Option<f64>> {
        if self.variable == SweepVariable::RDb || self.levels_db.is_empty() {
            vec![None]
        } else {
            self.levels_db.iter().copied().map(Some).collect()
        }
    }

    fn columns(&self) -> Vec<String> {
        let mut cols = vec![self.variable.column().to_string()];
        for scheme in &self.schemes {
            let stem = match scheme {
                SweepScheme::Sql => {
                    cols.push("du_sql".into());
                    continue;
                }
                SweepScheme::Tmsv => "du_tmsv",
                SweepScheme::Smsv => "du_smsv",
            };
            for level in self.levels() {
                cols.push(match level {
                    Some(db) => format!("{stem}_{}", level_label(db)),
                    None => stem.to_string(),
                });
            }
        }
        cols
    }
}

/// Evaluates the requested schemes at each point of a one-dimensional sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.range.steps);
    for x in spec.range.values() {
        let (cfg, ch) = spec.point(x);
        let mut row = vec![x];
        for scheme in &spec.schemes {
            match scheme {
                SweepScheme::Sql => row.push(delta_u_sql(&cfg, &ch)?.delta_u),
                SweepScheme::Tmsv | SweepScheme::Smsv => {
                    for level in spec.levels() {
                        let cfg = level.map_or(cfg, |db| cfg.with_r_db(db));
                        row.push(match scheme {
                            SweepScheme::Tmsv => delta_u_tmsv_real(&cfg, &ch)?.delta_u,
                            _ => delta_u_smsv_real(&cfg, ch.eta1)?.delta_u,
                        });
                    }
                }
            }
        }
        rows.push(row);
    }
    SweepResult {
        title: format!("minimum measurable offset vs {}", spec.variable.column()),
        columns: spec.columns(),
        rows,
        shape: None,
        config: serde_json::to_value(spec).expect("spec serializes"),
    }
    .check_finite()
}

/// Symmetric-transmissivity comparison of TMSV, SMSV and the SQL, with the
/// SMSV/TMSV offset ratio.
pub fn run_compare_smsv(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.variable != SweepVariable::EtaSymmetric {
        return Err(Error::param(
            "variable",
            "the TMSV/SMSV comparison sweeps symmetric transmissivity",
        ));
    }
    spec.validate()?;
    let rows = spec
        .range
        .values()
        .into_iter()
        .map(|eta| {
            let (cfg, ch) = spec.point(eta);
            let tmsv = delta_u_tmsv_real(&cfg, &ch)?.delta_u;
            let smsv = delta_u_smsv_real(&cfg, eta)?.delta_u;
            let sql = delta_u_sql(&cfg, &ch)?.delta_u;
            Ok(vec![eta, tmsv, smsv, sql, smsv / tmsv])
        })
        .collect::<Result<Vec<_>>>()?;
    SweepResult {
        title: format!("TMSV vs SMSV at {} dB", spec.sensing.r_db),
        columns: ["eta", "du_tmsv", "du_smsv", "du_sql", "ratio"].map(String::from).to_vec(),
        rows,
        shape: None,
        config: serde_json::to_value(spec).expect("spec serializes"),
    }
    .check_finite()
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        self.sensing.validate()?;
        check_eta_range(&self.eta1, "eta1")?;
        check_eta_range(&self.eta2, "eta2")?;
        Ok(())
    }

    fn columns(&self) -> Vec<String> {
        let cols: &[&str] = match self.quantity {
            GridQuantity::Advantage => &["eta1", "eta2", "advantage", "sign"],
            GridQuantity::DeltaU => &["eta1", "eta2", "du_tmsv", "du_sql"],
        };
        cols.iter().map(|c| c.to_string()).collect()
    }

    fn evaluate(&self, eta1: f64, eta2: f64) -> Result<Vec<f64>> {
        let ch = ChannelPair::with_policy(eta1, eta2, self.policy)?;
        Ok(match self.quantity {
            GridQuantity::Advantage => {
                let adv = quantum_advantage(&self.sensing, &ch)?;
                let sign = if adv > 0.0 {
                    1.0
                } else if adv < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                vec![eta1, eta2, adv, sign]
            }
            GridQuantity::DeltaU => vec![
                eta1,
                eta2,
                delta_u_tmsv_real(&self.sensing, &ch)?.delta_u,
                delta_u_sql(&self.sensing, &ch)?.delta_u,
            ],
        })
    }
}

pub fn run_grid(spec: &GridSpec) -> Result<SweepResult> {
    run_grid_with(spec, Execution::Parallel)
}

/// Two-dimensional `(η₁, η₂)` surface. Negative advantages are kept, with a
/// sign column for region extraction.
pub fn run_grid_with(spec: &GridSpec, execution: Execution) -> Result<SweepResult> {
    spec.validate()?;
    let e1 = spec.eta1.values();
    let e2 = spec.eta2.values();
    let n2 = e2.len();
    let eval = |idx: usize| spec.evaluate(e1[idx / n2], e2[idx % n2]);
    let total = e1.len() * n2;
    let rows = match execution {
        Execution::Serial => (0..total).map(eval).collect::<Result<Vec<_>>>()?,
        Execution::Parallel => (0..total).into_par_iter().map(eval).collect::<Result<Vec<_>>>()?,
    };
    let title = match spec.quantity {
        GridQuantity::Advantage => format!("quantum advantage at {} dB", spec.sensing.r_db),
        GridQuantity::DeltaU => format!("minimum measurable offset at {} dB", spec.sensing.r_db),
    };
    SweepResult {
        title,
        columns: spec.columns(),
        rows,
        shape: Some((e1.len(), n2)),
        config: serde_json::to_value(spec).expect("spec serializes"),
    }
    .check_finite()
}

/// Ready-made specs for the standard low-orbit link scenarios.
pub mod presets {
    use super::*;

    pub const FIG2_LEVELS_DB: [f64; 4] = [3.0, 7.0, 11.0, 15.0];
    pub const FIG3_R_DB: f64 = 5.0;
    pub const FIG4_R_DB: f64 = 5.0;
    /// Advantage contour levels in seconds.
    pub const FIG3_CONTOURS: [f64; 4] = [0.5e-18, 1.0e-18, 1.5e-18, 1.9e-18];
    pub const DEFAULT_STEPS: usize = 100;
    pub const ETA_MIN: f64 = 0.01;

    pub fn fig2(sensing: SensingConfig, steps: usize) -> SweepSpec {
        SweepSpec {
            variable: SweepVariable::EtaSymmetric,
            range: Range::linear(ETA_MIN, 1.0, steps),
            sensing,
            channel: ChannelPair::lossless(),
            schemes: vec![SweepScheme::Sql, SweepScheme::Tmsv],
            levels_db: FIG2_LEVELS_DB.to_vec(),
        }
    }

    pub fn fig3(sensing: SensingConfig, steps: usize) -> GridSpec {
        GridSpec {
            eta1: Range::linear(ETA_MIN, 1.0, steps),
            eta2: Range::linear(ETA_MIN, 1.0, steps),
            sensing,
            policy: VacuumPolicy::Shared(0),
            quantity: GridQuantity::Advantage,
        }
    }

    pub fn fig4(sensing: SensingConfig, steps: usize) -> SweepSpec {
        SweepSpec {
            variable: SweepVariable::EtaSymmetric,
            range: Range::linear(ETA_MIN, 1.0, steps),
            sensing,
            channel: ChannelPair::lossless(),
            schemes: vec![SweepScheme::Tmsv, SweepScheme::Smsv, SweepScheme::Sql],
            levels_db: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sensing(r_db: f64) -> SensingConfig {
        SensingConfig::default().with_r_db(r_db)
    }

    #[test]
    fn range_values() {
        let v = Range::linear(0.01, 1.0, 100).values();
        assert_eq!(v.len(), 100);
        assert_eq!(v[0], 0.01);
        assert_eq!(v[99], 1.0);
        assert!((v[49] - 0.5).abs() < 1e-15);
        let l = Range { start: 1.0, stop: 100.0, steps: 3, log: true }.values();
        assert_relative_eq!(l[1], 10.0, max_relative = 1e-15);
    }

    #[test]
    fn range_validation() {
        assert!(Range::linear(0.5, 0.5, 10).validate("r").is_err());
        assert!(Range::linear(0.1, 1.0, 1).validate("r").is_err());
        assert!(Range { start: 0.0, stop: 1.0, steps: 3, log: true }.validate("r").is_err());
    }

    #[test]
    fn fig2_shape_and_values() {
        let res = run_sweep(&presets::fig2(SensingConfig::default(), 100)).unwrap();
        assert_eq!(res.rows.len(), 100);
        assert_eq!(
            res.columns,
            ["eta", "du_sql", "du_tmsv_3db", "du_tmsv_7db", "du_tmsv_11db", "du_tmsv_15db"]
        );
        let last = res.rows.last().unwrap();
        assert_relative_eq!(last[5], 1.2164e-18, max_relative = 2e-4);
    }

    #[test]
    fn zero_squeezing_tmsv_equals_sql() {
        let mut spec = presets::fig2(sensing(0.0), 20);
        spec.levels_db.clear();
        let res = run_sweep(&spec).unwrap();
        for row in &res.rows {
            assert_eq!(row[1], row[2]);
        }
    }

    #[test]
    fn n_in_sweep_scales() {
        let spec = SweepSpec {
            variable: SweepVariable::NIn,
            range: Range::linear(1e3, 1e5, 2),
            sensing: sensing(5.0),
            channel: ChannelPair::symmetric(0.7).unwrap(),
            schemes: vec![SweepScheme::Tmsv, SweepScheme::Sql, SweepScheme::Smsv],
            levels_db: vec![],
        };
        let res = run_sweep(&spec).unwrap();
        for k in 1..4 {
            assert_relative_eq!(res.rows[1][k], res.rows[0][k] / 10.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn r_db_sweep_ignores_levels() {
        let spec = SweepSpec {
            variable: SweepVariable::RDb,
            range: Range::linear(0.0, 15.0, 4),
            sensing: sensing(0.0),
            channel: ChannelPair::lossless(),
            schemes: vec![SweepScheme::Tmsv],
            levels_db: vec![3.0],
        };
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.columns, ["r_db", "du_tmsv"]);
    }

    #[test]
    fn sweep_rejects_bad_specs() {
        let mut spec = presets::fig2(sensing(0.0), 10);
        spec.range.start = 0.0;
        assert!(run_sweep(&spec).is_err());
        let mut spec = presets::fig2(sensing(0.0), 10);
        spec.schemes.clear();
        assert!(run_sweep(&spec).is_err());
        let mut spec = presets::fig4(sensing(5.0), 10);
        spec.variable = SweepVariable::Eta1;
        assert!(run_compare_smsv(&spec).is_err());
    }

    #[test]
    fn compare_rows() {
        let res = run_compare_smsv(&presets::fig4(sensing(5.0), 100)).unwrap();
        let last = res.rows.last().unwrap();
        assert_relative_eq!(last[1], 3.847e-18, max_relative = 1e-4);
        assert_relative_eq!(last[1], last[2], max_relative = 1e-12);
        let mid = &res.rows[49];
        assert_relative_eq!(mid[2], 7.848e-18, max_relative = 1e-4);
        assert_relative_eq!(mid[1], 1.0412e-17, max_relative = 1e-4);
        assert!((mid[4] - 0.7538).abs() < 1e-3);
        for row in &res.rows[..99] {
            assert!(row[2] < row[1]);
        }
    }

    #[test]
    fn grid_points() {
        let spec = GridSpec {
            eta1: Range::linear(0.585, 0.695, 2),
            eta2: Range::linear(0.695, 0.825, 2),
            sensing: sensing(5.0),
            policy: VacuumPolicy::Shared(0),
            quantity: GridQuantity::Advantage,
        };
        let res = run_grid(&spec).unwrap();
        assert_eq!(res.shape, Some((2, 2)));
        // (0.585, 0.825) and (0.695, 0.695)
        assert_relative_eq!(res.rows[1][2], 1.890e-18, max_relative = 1e-3);
        assert_relative_eq!(res.rows[2][2], 1.900e-18, max_relative = 1e-3);

        let spec = GridSpec {
            eta1: Range::linear(0.02, 0.5, 2),
            eta2: Range::linear(0.5, 0.6, 2),
            ..spec
        };
        let res = run_grid(&spec).unwrap();
        assert!(res.rows[0][2] < 0.0);
        assert_eq!(res.rows[0][3], -1.0);
    }

    #[test]
    fn grid_serial_and_parallel_agree() {
        let spec = presets::fig3(sensing(5.0), 40);
        let a = run_grid_with(&spec, Execution::Serial).unwrap();
        let b = run_grid_with(&spec, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 1600);
    }

    #[test]
    fn delta_u_grid_columns() {
        let spec = GridSpec {
            quantity: GridQuantity::DeltaU,
            ..presets::fig3(sensing(5.0), 3)
        };
        let res = run_grid(&spec).unwrap();
        assert_eq!(res.columns, ["eta1", "eta2", "du_tmsv", "du_sql"]);
    }
}
