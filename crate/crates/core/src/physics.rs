//! Physical parameters, potential families, confinement grids and queries.

use crate::error::{Error, Result};
use crate::scalar::{c, cu, Real};

/// Particle mass and Planck's constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams<T> {
    pub mass: T,
    pub hbar: T,
}

impl<T: Real> PhysicalParams<T> {
    pub fn new(mass: T, hbar: T) -> Result<Self> {
        if !(mass > T::zero() && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        if !(hbar > T::zero() && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { mass, hbar })
    }

    /// The ODE coefficient 2M/ħ² of y'' = (2M/ħ²)(V + E) y.
    #[inline]
    pub fn two_m_over_hbar2(&self) -> T {
        c::<T>(2.0) * self.mass / (self.hbar * self.hbar)
    }

    /// ħ²/M, the "mass" of the radial amplitude field.
    #[inline]
    pub fn hbar2_over_m(&self) -> T {
        self.hbar * self.hbar / self.mass
    }
}

impl<T: Real> Default for PhysicalParams<T> {
    fn default() -> Self {
        Self {
            mass: T::one(),
            hbar: T::one(),
        }
    }
}

/// Thermal de Broglie wavelength λ = sqrt(β ħ² / M).
pub fn thermal_wavelength<T: Real>(params: &PhysicalParams<T>, beta: T) -> T {
    (beta * params.hbar * params.hbar / params.mass).sqrt()
}

/// Potential sampled at ascending nodes, linearly interpolated in between and
/// held constant beyond the end nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPotential<T> {
    nodes: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> TabulatedPotential<T> {
    pub fn new(nodes: Vec<T>, values: Vec<T>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::InvalidParameter(
                "tabulated potential needs equally many (>= 1) nodes and values".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("tabulated nodes must be strictly ascending".into()));
        }
        if nodes.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("tabulated potential must be finite".into()));
        }
        Ok(Self { nodes, values })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return self.values[0];
        }
        if x >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        // first node strictly greater than x
        let hi = self.nodes.partition_point(|&node| node <= x);
        let lo = hi - 1;
        if x == self.nodes[lo] {
            return self.values[lo];
        }
        let t = (x - self.nodes[lo]) / (self.nodes[hi] - self.nodes[lo]);
        self.values[lo] + t * (self.values[hi] - self.values[lo])
    }
}

/// One-dimensional potential V(x).
#[derive(Debug, Clone, PartialEq)]
pub enum Potential<T> {
    Free,
    /// ½ M ω² x²
    Harmonic { omega: T },
    /// barrier · ((x/a)² − 1)² with minima at ±a, a = minima_separation / 2.
    DoubleWell { barrier: T, minima_separation: T },
    /// V(x) = slope · x. Used where exact Gaussian path integrals are needed.
    Linear { slope: T },
    /// V(x) = value.
    Constant { value: T },
    Tabulated(TabulatedPotential<T>),
}

impl<T: Real> Potential<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        match self {
            Potential::Harmonic { omega } if !(*omega > T::zero()) => bad("omega must be positive"),
            Potential::DoubleWell {
                barrier,
                minima_separation,
            } if !(*barrier > T::zero() && *minima_separation > T::zero()) => {
                bad("double-well barrier and separation must be positive")
            }
            Potential::Linear { slope } if !slope.is_finite() => bad("slope must be finite"),
            Potential::Constant { value } if !value.is_finite() => bad("value must be finite"),
            _ => Ok(()),
        }
    }

    /// V(x) for a particle of the given mass.
    pub fn eval(&self, x: T, mass: T) -> T {
        match self {
            Potential::Free => T::zero(),
            Potential::Harmonic { omega } => c::<T>(0.5) * mass * *omega * *omega * x * x,
            Potential::DoubleWell {
                barrier,
                minima_separation,
            } => {
                let a = c::<T>(0.5) * *minima_separation;
                let s = (x / a) * (x / a) - T::one();
                *barrier * s * s
            }
            Potential::Linear { slope } => *slope * x,
            Potential::Constant { value } => *value,
            Potential::Tabulated(t) => t.eval(x),
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self, Potential::Free)
    }
}

/// A potential together with the particle's physical constants.
#[derive(Debug, Clone, PartialEq)]
pub struct System<T> {
    pub potential: Potential<T>,
    pub params: PhysicalParams<T>,
}

impl<T: Real> System<T> {
    pub fn new(potential: Potential<T>, params: PhysicalParams<T>) -> Result<Self> {
        potential.validate()?;
        Ok(Self { potential, params })
    }

    /// Free particle with M = ħ = 1.
    pub fn free() -> Self {
        Self {
            potential: Potential::Free,
            params: PhysicalParams::default(),
        }
    }

    /// Harmonic oscillator of frequency ω with M = ħ = 1.
    pub fn harmonic(omega: T) -> Self {
        Self {
            potential: Potential::Harmonic { omega },
            params: PhysicalParams::default(),
        }
    }

    #[inline]
    pub fn v(&self, x: T) -> T {
        self.potential.eval(x, self.params.mass)
    }
}

/// V(x) for the given potential and unit-free mass convention.
pub fn eval_potential<T: Real>(spec: &Potential<T>, params: &PhysicalParams<T>, x: T) -> T {
    spec.eval(x, params.mass)
}

/// Uniform grid on the confinement box [x_minus, x_plus].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub x_minus: T,
    pub x_plus: T,
    pub n_points: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(x_minus: T, x_plus: T, n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(Error::InvalidParameter(format!("grid needs at least 3 points, got {n_points}")));
        }
        if !(x_minus < x_plus) || !x_minus.is_finite() || !x_plus.is_finite() {
            return Err(Error::InvalidParameter(format!("grid box [{x_minus}, {x_plus}] is empty")));
        }
        Ok(Self {
            x_minus,
            x_plus,
            n_points,
        })
    }

    #[inline]
    pub fn spacing(&self) -> T {
        (self.x_plus - self.x_minus) / cu::<T>(self.n_points - 1)
    }

    #[inline]
    pub fn length(&self) -> T {
        self.x_plus - self.x_minus
    }

    /// Number of slices N = n_points − 1.
    #[inline]
    pub fn n_slices(&self) -> usize {
        self.n_points - 1
    }

    #[inline]
    pub fn node(&self, i: usize) -> T {
        if i + 1 == self.n_points {
            self.x_plus
        } else {
            self.x_minus + cu::<T>(i) * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.x_minus && x <= self.x_plus
    }

    pub fn contains_strictly(&self, x: T) -> bool {
        x > self.x_minus && x < self.x_plus
    }

    /// Index of the node nearest to x (clamped to the grid).
    pub fn nearest(&self, x: T) -> usize {
        let u = ((x - self.x_minus) / self.spacing()).round();
        let u = u.max(T::zero()).min(cu::<T>(self.n_points - 1));
        u.to_usize().unwrap_or(0)
    }

    /// Cell containing x: returns (i, t) with x = node(i) + t·h, 0 ≤ t ≤ 1 and
    /// i ≤ n_points − 2.
    pub fn locate(&self, x: T) -> (usize, T) {
        let h = self.spacing();
        let u = ((x - self.x_minus) / h).max(T::zero());
        let i = u.floor().to_usize().unwrap_or(0).min(self.n_points - 2);
        let t = ((x - self.node(i)) / h).max(T::zero()).min(T::one());
        (i, t)
    }

    /// Linear interpolation of nodal values at x.
    pub fn interpolate(&self, values: &[T], x: T) -> T {
        debug_assert_eq!(values.len(), self.n_points);
        let (i, t) = self.locate(x);
        values[i] + t * (values[i + 1] - values[i])
    }
}

/// Bloch matrix element request ⟨x_b| e^{−βH} |x_a⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochQuery<T> {
    pub x_a: T,
    pub x_b: T,
    pub beta: T,
}

impl<T: Real> BlochQuery<T> {
    pub fn new(x_a: T, x_b: T, beta: T) -> Result<Self> {
        if !(beta > T::zero() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if !x_a.is_finite() || !x_b.is_finite() {
            return Err(Error::InvalidParameter("query points must be finite".into()));
        }
        Ok(Self { x_a, x_b, beta })
    }

    pub fn check_inside(&self, grid: &GridSpec<T>) -> Result<()> {
        if grid.contains_strictly(self.x_a) && grid.contains_strictly(self.x_b) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "query points ({}, {}) not strictly inside [{}, {}]",
                self.x_a, self.x_b, grid.x_minus, grid.x_plus
            )))
        }
    }
}

/// Padding of the automatic box in thermal wavelengths.
pub const AUTO_BOX_PADDING: f64 = 10.0;
/// Points per thermal wavelength of the automatic box.
pub const AUTO_BOX_POINTS_PER_WAVELENGTH: f64 = 50.0;

/// Box containing every center padded by 10 λ(β_max) on each side, with
/// spacing at most λ(β_max)/50.
pub fn auto_box<T: Real>(system: &System<T>, beta_max: T, centers: &[T]) -> Result<GridSpec<T>> {
    if !(beta_max > T::zero()) {
        return Err(Error::InvalidParameter("beta_max must be positive".into()));
    }
    if centers.is_empty() {
        return Err(Error::InvalidParameter("auto_box needs at least one center".into()));
    }
    let lambda = thermal_wavelength(&system.params, beta_max);
    let pad = c::<T>(AUTO_BOX_PADDING) * lambda;
    let lo = centers.iter().copied().fold(T::infinity(), T::min) - pad;
    let hi = centers.iter().copied().fold(T::neg_infinity(), T::max) + pad;
    let max_h = lambda / c::<T>(AUTO_BOX_POINTS_PER_WAVELENGTH);
    let cells = ((hi - lo) / max_h).ceil().to_usize().unwrap_or(2).max(2);
    GridSpec::new(lo, hi, cells + 1)
}
