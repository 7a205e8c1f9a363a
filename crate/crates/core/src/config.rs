//! Serializable description of a system: potential, physical constants, grid.
//!
//! ```toml
//! grid = "auto"
//!
//! [potential]
//! family = "harmonic"
//! omega = 1.0
//!
//! [physics]
//! mass = 1.0
//! hbar = 1.0
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{auto_box, GridSpec, PhysicalParams, Potential, System, TabulatedPotential};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    Free,
    Harmonic { omega: f64 },
    DoubleWell { barrier: f64, minima_separation: f64 },
    Linear { slope: f64 },
    Constant { value: f64 },
    Tabulated { nodes: Vec<f64>, values: Vec<f64> },
}

impl PotentialConfig {
    pub fn build(&self) -> Result<Potential<f64>> {
        let p = match self {
            PotentialConfig::Free => Potential::Free,
            PotentialConfig::Harmonic { omega } => Potential::Harmonic { omega: *omega },
            PotentialConfig::DoubleWell {
                barrier,
                minima_separation,
            } => Potential::DoubleWell {
                barrier: *barrier,
                minima_separation: *minima_separation,
            },
            PotentialConfig::Linear { slope } => Potential::Linear { slope: *slope },
            PotentialConfig::Constant { value } => Potential::Constant { value: *value },
            PotentialConfig::Tabulated { nodes, values } => {
                Potential::Tabulated(TabulatedPotential::new(nodes.clone(), values.clone())?)
            }
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self { mass: 1.0, hbar: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKeyword {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Auto(GridKeyword),
    Explicit { x_minus: f64, x_plus: f64, n_points: usize },
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig::Auto(GridKeyword::Auto)
    }
}

/// The `potential`, `physics` and `grid` sections of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub potential: PotentialConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub grid: GridConfig,
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    pub fn system(&self) -> Result<System<f64>> {
        let params = PhysicalParams::new(self.physics.mass, self.physics.hbar)?;
        System::new(self.potential.build()?, params)
    }

    /// Explicit grid, or the automatic box sized for `beta_max` around `centers`.
    pub fn grid(&self, system: &System<f64>, beta_max: f64, centers: &[f64]) -> Result<GridSpec<f64>> {
        match self.grid {
            GridConfig::Auto(_) => auto_box(system, beta_max, centers),
            GridConfig::Explicit {
                x_minus,
                x_plus,
                n_points,
            } => GridSpec::new(x_minus, x_plus, n_points),
        }
    }
}
