//! Run configuration and Bloch-matrix evaluation by the selected method.
//!
//! ```toml
//! method = "sturm-laplace"
//! grid = "auto"
//!
//! [potential]
//! family = "harmonic"
//! omega = 1.0
//!
//! [query]
//! x_a = 0.0
//! x_b = [0.0, 1.0]
//! beta = [0.5, 1.0, 2.0]
//!
//! [mc]            # required for method = "mc"
//! paths = 100000
//! slices = 2048
//! seed = 1
//! ```

use std::path::PathBuf;

use ltk_core::bridge::{feynman_kac, MCConfig};
use ltk_core::config::{GridConfig, PhysicsConfig, PotentialConfig, SystemConfig};
use ltk_core::diagnostics::Diagnosed;
use ltk_core::laplace::{gaver_stehfest_invert, GreenTransform, DEFAULT_ORDER};
use ltk_core::physics::{BlochQuery, GridSpec, System};
use ltk_core::radial::RadialTransform;
use ltk_core::spectral::{bloch_spectral, discretize, eigendecompose, heat_propagate, DiscreteHamiltonian};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, fmt_opt, Csv};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Spectral,
    Heat,
    SturmLaplace,
    Radial,
    Mc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Heat => "heat",
            Method::SturmLaplace => "sturm-laplace",
            Method::Radial => "radial",
            Method::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Cartesian sweep over x_a × x_b × β, β varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryConfig {
    pub x_a: OneOrMany,
    pub x_b: OneOrMany,
    pub beta: OneOrMany,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Eigenpairs kept by the spectral route (default: enough for e^{−βE} < 1e-15).
    pub n_states: Option<usize>,
    /// Crank–Nicolson steps per unit β (default 2000).
    pub heat_steps_per_beta: Option<usize>,
    /// Gaver–Stehfest order (default 14).
    pub laplace_order: Option<usize>,
}

impl Numerics {
    pub fn order(&self) -> usize {
        self.laplace_order.unwrap_or(DEFAULT_ORDER)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub paths: usize,
    pub slices: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocaltimeSection {
    /// Measurement point X = x_a = x_b (default: first x_a of the query, else 0).
    pub x: Option<f64>,
    /// Default: first β of the query, else 1.
    pub beta: Option<f64>,
    /// Largest L in the table (default 8 √(βM)/ħ).
    pub l_max: Option<f64>,
    /// Rows (default 401).
    pub n_points: Option<usize>,
    /// Histogram bin width of the Monte Carlo column (default l_max/160).
    pub bin_width: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub method: Method,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub grid: GridConfig,
    pub query: Option<QueryConfig>,
    #[serde(default)]
    pub numerics: Numerics,
    pub mc: Option<McSection>,
    pub localtime: Option<LocaltimeSection>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Free particle, M = ħ = 1, automatic grid.
    pub fn free() -> Self {
        Self {
            method: Method::default(),
            potential: PotentialConfig::Free,
            physics: PhysicsConfig::default(),
            grid: GridConfig::default(),
            query: None,
            numerics: Numerics::default(),
            mc: None,
            localtime: None,
            output: OutputConfig::default(),
        }
    }

    pub fn system_config(&self) -> SystemConfig {
        SystemConfig {
            potential: self.potential.clone(),
            physics: self.physics,
            grid: self.grid,
        }
    }

    pub fn system(&self) -> CliResult<System<f64>> {
        Ok(self.system_config().system()?)
    }

    pub fn queries(&self) -> CliResult<Vec<BlochQuery<f64>>> {
        let q = self
            .query
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [query] section".into()))?;
        let mut out = Vec::new();
        for xa in q.x_a.values() {
            for xb in q.x_b.values() {
                for beta in q.beta.values() {
                    out.push(BlochQuery::new(xa, xb, beta)?);
                }
            }
        }
        if out.is_empty() {
            return Err(CliError::Config("query sweep is empty".into()));
        }
        Ok(out)
    }

    pub fn grid_for(&self, system: &System<f64>, beta_max: f64, centers: &[f64]) -> CliResult<GridSpec<f64>> {
        Ok(self.system_config().grid(system, beta_max, centers)?)
    }

    pub fn mc_config(&self, beta: f64) -> CliResult<MCConfig<f64>> {
        let mc = self
            .mc
            .ok_or_else(|| CliError::Config("method mc needs an [mc] section with paths, slices and seed".into()))?;
        Ok(MCConfig::new(mc.paths, mc.slices, mc.seed, beta)?)
    }
}

/// One evaluated Bloch-matrix element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoRow {
    pub x_a: f64,
    pub x_b: f64,
    pub beta: f64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn row<V>(q: &BlochQuery<f64>, d: Diagnosed<V>, f: impl Fn(&V) -> (f64, Option<f64>)) -> RhoRow {
    let (value, std_error) = f(&d.value);
    RhoRow {
        x_a: q.x_a,
        x_b: q.x_b,
        beta: q.beta,
        value,
        std_error,
        warnings: d.warnings.iter().map(|w| w.to_string()).collect(),
    }
}

/// Eigenpairs needed so that the dropped tail is below e^{−36} at β_min.
pub fn auto_state_count(h: &DiscreteHamiltonian<f64>, beta_min: f64) -> usize {
    let v_min = h.diagonal.iter().copied().fold(f64::INFINITY, f64::min) + 2.0 * h.off_diagonal.first().copied().unwrap_or(0.0);
    (h.count_below(v_min + 36.0 / beta_min) + 1).clamp(1, h.dim())
}

pub fn heat_steps(numerics: &Numerics, beta: f64) -> usize {
    ((numerics.heat_steps_per_beta.unwrap_or(2000) as f64 * beta).ceil() as usize).max(50)
}

/// Evaluates every query of the sweep with `method`; rows keep query order.
pub fn compute_rho(cfg: &RunConfig) -> CliResult<Vec<RhoRow>> {
    let system = cfg.system()?;
    let queries = cfg.queries()?;
    let beta_max = queries.iter().map(|q| q.beta).fold(0.0, f64::max);
    let beta_min = queries.iter().map(|q| q.beta).fold(f64::INFINITY, f64::min);
    let centers: Vec<f64> = queries.iter().flat_map(|q| [q.x_a, q.x_b]).collect();
    let grid = cfg.grid_for(&system, beta_max, &centers)?;
    for q in &queries {
        q.check_inside(&grid)?;
    }
    let order = cfg.numerics.order();
    match cfg.method {
        Method::Spectral => {
            let h = discretize(&system, &grid);
            let n = cfg.numerics.n_states.unwrap_or_else(|| auto_state_count(&h, beta_min));
            let dec = eigendecompose(&h, n)?;
            Ok(queries
                .par_iter()
                .map(|q| row(q, bloch_spectral(&dec, q), |v| (*v, None)))
                .collect())
        }
        Method::Heat => {
            let h = discretize(&system, &grid);
            queries
                .par_iter()
                .map(|q| {
                    let column = heat_propagate(&h, q.x_a, q.beta, heat_steps(&cfg.numerics, q.beta))?;
                    Ok(row(q, Diagnosed::clean(grid.interpolate(&column, q.x_b)), |v| (*v, None)))
                })
                .collect()
        }
        Method::SturmLaplace => queries
            .par_iter()
            .map(|q| {
                let t = GreenTransform {
                    system: &system,
                    grid: &grid,
                    x_a: q.x_a,
                    x_b: q.x_b,
                };
                Ok(row(q, Diagnosed::clean(gaver_stehfest_invert(&t, q.beta, order)?), |v| (*v, None)))
            })
            .collect(),
        Method::Radial => queries
            .par_iter()
            .map(|q| {
                let t = RadialTransform {
                    system: &system,
                    grid: &grid,
                    x_a: q.x_a,
                    x_b: q.x_b,
                };
                Ok(row(q, Diagnosed::clean(gaver_stehfest_invert(&t, q.beta, order)?), |v| (*v, None)))
            })
            .collect(),
        Method::Mc => queries
            .iter()
            .map(|q| {
                let est = feynman_kac(&system, q, &cfg.mc_config(q.beta)?)?;
                Ok(row(q, est, |e| (e.mean, Some(e.std_error))))
            })
            .collect(),
    }
}

pub fn rho_csv(rows: &[RhoRow], with_error: bool) -> Csv {
    let mut header = vec!["x_a", "x_b", "beta", "value"];
    if with_error {
        header.push("std_error");
    }
    let mut csv = Csv::new(&header);
    for r in rows {
        let mut fields = vec![fmt_f64(r.x_a), fmt_f64(r.x_b), fmt_f64(r.beta), fmt_f64(r.value)];
        if with_error {
            fields.push(fmt_opt(r.std_error));
        }
        csv.row(&fields);
    }
    csv
}

#[derive(Serialize)]
pub struct RhoDocument<'a> {
    pub schema_version: u32,
    pub method: &'static str,
    pub rows: &'a [RhoRow],
}

pub fn rho_document(method: Method, rows: &[RhoRow]) -> RhoDocument<'_> {
    RhoDocument {
        schema_version: SCHEMA_VERSION,
        method: method.name(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(method: &str, potential: &str, query: &str) -> RunConfig {
        RunConfig::from_toml_str(&format!(
            "method = \"{method}\"\n[potential]\n{potential}\n[query]\n{query}\n[mc]\npaths = 500\nslices = 64\nseed = 9\n"
        ))
        .unwrap()
    }

    #[test]
    fn spectral_harmonic_example() {
        let mut c = cfg("spectral", "family = \"harmonic\"\nomega = 1.0", "x_a = 0.0\nx_b = 0.0\nbeta = 1.0");
        // the automatic spacing (λ/50) leaves ~7e-5 relative lattice error
        let auto = compute_rho(&c).unwrap()[0].value;
        assert!((auto - 0.368006).abs() < 5e-5, "{auto}");
        c.grid = GridConfig::Explicit {
            x_minus: -10.0,
            x_plus: 10.0,
            n_points: 16001,
        };
        let rows = compute_rho(&c).unwrap();
        assert!((rows[0].value - 0.368006).abs() < 1e-6, "{}", rows[0].value);
    }

    #[test]
    fn mc_free_example() {
        let c = cfg("mc", "family = \"free\"", "x_a = 0.0\nx_b = 0.0\nbeta = 1.0");
        let rows = compute_rho(&c).unwrap();
        assert!((rows[0].value - 0.398942).abs() < 1e-6);
        assert_eq!(rows[0].std_error, Some(0.0));
    }

    #[test]
    fn sturm_laplace_free_example() {
        let c = cfg("sturm-laplace", "family = \"free\"", "x_a = 0.0\nx_b = 1.0\nbeta = 1.0");
        let rows = compute_rho(&c).unwrap();
        assert!((rows[0].value - 0.241971).abs() < 1e-5, "{}", rows[0].value);
    }

    #[test]
    fn methods_agree_on_a_sweep() {
        let q = "x_a = [0.0, -0.5]\nx_b = [0.5]\nbeta = [0.5, 1.0]";
        let pot = "family = \"harmonic\"\nomega = 1.0";
        let base = compute_rho(&cfg("spectral", pot, q)).unwrap();
        assert_eq!(base.len(), 4);
        assert_eq!((base[1].x_a, base[1].beta), (0.0, 1.0));
        for m in ["heat", "sturm-laplace", "radial"] {
            let rows = compute_rho(&cfg(m, pot, q)).unwrap();
            for (a, b) in base.iter().zip(&rows) {
                assert!(((a.value - b.value) / a.value).abs() < 1e-3, "{m}: {} vs {}", a.value, b.value);
            }
        }
    }

    #[test]
    fn config_errors() {
        assert!(matches!(RunConfig::from_toml_str("method = \"nope\"\n[potential]\nfamily = \"free\"\n"), Err(CliError::Config(_))));
        let c = RunConfig::from_toml_str("method = \"mc\"\n[potential]\nfamily = \"free\"\n[query]\nx_a = 0.0\nx_b = 0.0\nbeta = 1.0\n").unwrap();
        assert!(matches!(compute_rho(&c), Err(CliError::Config(_))));
        // mc section without a seed is rejected
        assert!(RunConfig::from_toml_str("[potential]\nfamily = \"free\"\n[mc]\npaths = 1\nslices = 4\n").is_err());
        let c = cfg("spectral", "family = \"free\"", "x_a = 0.0\nx_b = 0.0\nbeta = -1.0");
        assert_eq!(compute_rho(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn csv_and_json_shapes() {
        let c = cfg("spectral", "family = \"free\"", "x_a = 0.0\nx_b = [0.0, 1.0]\nbeta = 1.0");
        let rows = compute_rho(&c).unwrap();
        let csv = rho_csv(&rows, false);
        assert!(csv.as_str().starts_with("x_a,x_b,beta,value\n"));
        assert_eq!(csv.as_str().lines().count(), 3);
        let json = serde_json::to_value(rho_document(Method::Spectral, &rows)).unwrap();
        assert_eq!(json["schema_version"], 1);
        assert_eq!(json["rows"].as_array().unwrap().len(), 2);
    }
}
