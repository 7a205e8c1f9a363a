//! Non-fatal numerical warnings attached to results.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Truncated spectral tail e^{−βE_last} is not negligible against the value.
    SpectralTail { bound: f64, value: f64 },
    /// Quadrature range did not reach the requested tail bound.
    Truncation { tail: f64, accumulated: f64 },
    /// Monte Carlo relative standard error above 5 %.
    Variance { relative_error: f64 },
    /// More than 1 % of histogram mass landed in the top bin.
    Binning { top_bin_fraction: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::SpectralTail { bound, value } => {
                write!(f, "spectral tail bound {bound:e} not negligible against {value:e}")
            }
            Warning::Truncation { tail, accumulated } => {
                write!(f, "Laplace quadrature tail {tail:e} against accumulated {accumulated:e}")
            }
            Warning::Variance { relative_error } => {
                write!(f, "Monte Carlo relative standard error {relative_error:.3e} exceeds 5%")
            }
            Warning::Binning { top_bin_fraction } => {
                write!(f, "{:.2}% of histogram mass in the top bin", 100.0 * top_bin_fraction)
            }
        }
    }
}

/// A value with the warnings raised while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnosed<V> {
    pub value: V,
    pub warnings: Vec<Warning>,
}

impl<V> Diagnosed<V> {
    pub fn clean(value: V) -> Self {
        Self {
            value,
            warnings: Vec::new(),
        }
    }

    pub(crate) fn with(value: V, warning: Option<Warning>) -> Self {
        if let Some(w) = &warning {
            log::warn!("{w}");
        }
        Self {
            value,
            warnings: warning.into_iter().collect(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}
