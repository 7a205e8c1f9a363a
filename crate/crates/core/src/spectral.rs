//! Finite-difference Hamiltonian on a Dirichlet box, its low-lying spectrum,
//! and the two reference Bloch-matrix evaluations built on it: the spectral
//! sum and Crank–Nicolson propagation of a lattice delta.

use std::io::{self, Write};

use crate::diagnostics::{Diagnosed, Warning};
use crate::error::{Error, Result};
use crate::physics::{BlochQuery, GridSpec, PhysicalParams, System};
use crate::scalar::{c, cu, to_f64, Real};

/// Symmetric tridiagonal second-difference Hamiltonian on the interior nodes
/// of a grid. Interior index `i` corresponds to grid node `i + 1`.
#[derive(Debug, Clone)]
pub struct DiscreteHamiltonian<T> {
    pub grid: GridSpec<T>,
    pub diagonal: Vec<T>,
    pub off_diagonal: Vec<T>,
    pub params: PhysicalParams<T>,
}

impl<T: Real> DiscreteHamiltonian<T> {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// y = H x for an interior vector.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut v = self.diagonal[i] * x[i];
                if i > 0 {
                    v += self.off_diagonal[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off_diagonal[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub(crate) fn gershgorin(&self) -> (T, T) {
        let n = self.dim();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r += self.off_diagonal[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off_diagonal[i].abs();
            }
            lo = lo.min(self.diagonal[i] - r);
            hi = hi.max(self.diagonal[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `lambda` (Sturm sequence count).
    pub fn count_below(&self, lambda: T) -> usize {
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut q = self.diagonal[0] - lambda;
        if q < T::zero() {
            count += 1;
        }
        for i in 1..self.dim() {
            if q.abs() < tiny {
                q = tiny;
            }
            let b = self.off_diagonal[i - 1];
            q = self.diagonal[i] - lambda - b * b / q;
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }
}

/// Second-difference discretization of H = −(ħ²/2M) d²/dx² + V on the
/// interior nodes with Dirichlet walls at the box ends.
pub fn discretize<T: Real>(system: &System<T>, grid: &GridSpec<T>) -> DiscreteHamiltonian<T> {
    let h = grid.spacing();
    let p = &system.params;
    let kinetic = p.hbar * p.hbar / (p.mass * h * h);
    let interior = grid.n_points - 2;
    let diagonal = (1..=interior).map(|i| kinetic + system.v(grid.node(i))).collect();
    let off_diagonal = vec![-c::<T>(0.5) * kinetic; interior.saturating_sub(1)];
    DiscreteHamiltonian {
        grid: *grid,
        diagonal,
        off_diagonal,
        params: system.params,
    }
}

/// Lowest eigenpairs of a [`DiscreteHamiltonian`]. Eigenfunctions are stored
/// on every grid node (zero at the walls), normalized to Σ ψ² h = 1 and signed
/// so that the first non-negligible component after X− is positive.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<T> {
    pub grid: GridSpec<T>,
    pub energies: Vec<T>,
    pub eigenfunctions: Vec<Vec<T>>,
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// ψ_n(x) by linear interpolation between nodes.
    pub fn eigenfunction_at(&self, n: usize, x: T) -> T {
        self.grid.interpolate(&self.eigenfunctions[n], x)
    }

    pub fn write_spectrum_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n,E_n")?;
        for (n, e) in self.energies.iter().enumerate() {
            writeln!(out, "{n},{:.16e}", to_f64(*e))?;
        }
        Ok(())
    }

    /// Columns x, ψ_0(x), …, ψ_{k−1}(x) for the lowest `k` states.
    pub fn write_eigenfunctions_csv<W: Write>(&self, k: usize, mut out: W) -> io::Result<()> {
        let k = k.min(self.len());
        let header: Vec<String> = std::iter::once("x".to_string())
            .chain((0..k).map(|n| format!("psi_{n}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.grid.n_points {
            write!(out, "{:.16e}", to_f64(self.grid.node(i)))?;
            for psi in &self.eigenfunctions[..k] {
                write!(out, ",{:.16e}", to_f64(psi[i]))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

const BISECTION_MAX_ITER: usize = 200;
const INVERSE_ITERATIONS: usize = 4;

/// Lowest `n_states` eigenpairs by Sturm-count bisection followed by inverse
/// iteration, with reorthogonalization inside near-degenerate clusters.
pub fn eigendecompose<T: Real>(h: &DiscreteHamiltonian<T>, n_states: usize) -> Result<SpectralDecomposition<T>> {
    let dim = h.dim();
    if n_states == 0 || n_states > dim {
        return Err(Error::InvalidParameter(format!(
            "n_states must be in 1..={dim}, got {n_states}"
        )));
    }
    let (lo, hi) = h.gershgorin();
    let norm = lo.abs().max(hi.abs());
    let tol = c::<T>(4.0) * T::epsilon() * norm;
    let cluster = c::<T>(1e-3) * norm.max(T::one());
    let grid_h = h.grid.spacing();

    let mut energies: Vec<T> = Vec::with_capacity(n_states);
    let mut interior_vectors: Vec<Vec<T>> = Vec::with_capacity(n_states);
    let mut left = lo;
    for k in 0..n_states {
        // k-th eigenvalue: smallest λ with count_below(λ) > k
        let mut a = left;
        let mut b = hi;
        let mut it = 0;
        while b - a > tol {
            let m = c::<T>(0.5) * (a + b);
            if m <= a || m >= b {
                break;
            }
            if h.count_below(m) > k {
                b = m;
            } else {
                a = m;
            }
            it += 1;
            if it > BISECTION_MAX_ITER {
                return Err(Error::Convergence {
                    what: "eigenvalue bisection",
                    index: k,
                    iterations: it,
                });
            }
        }
        let lambda = c::<T>(0.5) * (a + b);
        left = a;

        let neighbours: Vec<usize> = (0..k).filter(|&j| (energies[j] - lambda).abs() < cluster).collect();
        let mut v = inverse_iteration(h, lambda, k, &neighbours, &interior_vectors)?;
        // Rayleigh quotient refinement of the eigenvalue
        let hv = h.apply(&v);
        let rq: T = v.iter().zip(&hv).map(|(a, b)| *a * *b).sum::<T>() / v.iter().map(|a| *a * *a).sum::<T>();
        let energy = if (rq - lambda).abs() <= c::<T>(10.0) * tol { rq } else { lambda };

        let scale = (grid_h * v.iter().map(|a| *a * *a).sum::<T>()).sqrt();
        let peak = v.iter().fold(T::zero(), |m, a| m.max(a.abs()));
        let first = v.iter().find(|a| a.abs() > c::<T>(1e-8) * peak).copied().unwrap_or(T::one());
        let sign = if first < T::zero() { -T::one() } else { T::one() };
        for a in v.iter_mut() {
            *a = *a * sign / scale;
        }
        energies.push(energy);
        interior_vectors.push(v);
    }

    let eigenfunctions = interior_vectors
        .into_iter()
        .map(|v| {
            let mut full = Vec::with_capacity(dim + 2);
            full.push(T::zero());
            full.extend(v);
            full.push(T::zero());
            full
        })
        .collect();
    Ok(SpectralDecomposition {
        grid: h.grid,
        energies,
        eigenfunctions,
    })
}

fn inverse_iteration<T: Real>(
    h: &DiscreteHamiltonian<T>,
    lambda: T,
    index: usize,
    neighbours: &[usize],
    previous: &[Vec<T>],
) -> Result<Vec<T>> {
    let n = h.dim();
    // deterministic, non-symmetric start vector
    let mut v: Vec<T> = (0..n)
        .map(|i| T::one() + c::<T>(0.37) * (cu::<T>(i) * c(0.6180339887)).sin())
        .collect();
    let solver = ShiftedTridiagonal::new(h, lambda);
    for _ in 0..INVERSE_ITERATIONS {
        for &j in neighbours {
            project_out(&mut v, &previous[j]);
        }
        v = solver.solve(&v);
        let norm = v.iter().map(|a| *a * *a).sum::<T>().sqrt();
        if !norm.is_finite() || norm == T::zero() {
            return Err(Error::Convergence {
                what: "inverse iteration",
                index,
                iterations: INVERSE_ITERATIONS,
            });
        }
        for a in v.iter_mut() {
            *a /= norm;
        }
    }
    for &j in neighbours {
        project_out(&mut v, &previous[j]);
    }
    let norm = v.iter().map(|a| *a * *a).sum::<T>().sqrt();
    for a in v.iter_mut() {
        *a /= norm;
    }
    Ok(v)
}

fn project_out<T: Real>(v: &mut [T], u: &[T]) {
    let uu: T = u.iter().map(|a| *a * *a).sum();
    let vu: T = v.iter().zip(u).map(|(a, b)| *a * *b).sum();
    let f = vu / uu;
    for (a, b) in v.iter_mut().zip(u) {
        *a -= f * *b;
    }
}

/// LU factorization of (H − σ I) with tiny-pivot replacement.
pub(crate) struct ShiftedTridiagonal<T> {
    lower: Vec<T>,
    pivots: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> ShiftedTridiagonal<T> {
    pub(crate) fn new(h: &DiscreteHamiltonian<T>, sigma: T) -> Self {
        let n = h.dim();
        let (lo, hi) = h.gershgorin();
        let tiny = T::epsilon() * lo.abs().max(hi.abs()).max(T::one());
        let mut pivots = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n.saturating_sub(1));
        let mut d = h.diagonal[0] - sigma;
        if d.abs() < tiny {
            d = tiny;
        }
        pivots.push(d);
        for i in 1..n {
            let l = h.off_diagonal[i - 1] / pivots[i - 1];
            lower.push(l);
            let mut d = h.diagonal[i] - sigma - l * h.off_diagonal[i - 1];
            if d.abs() < tiny {
                d = tiny;
            }
            pivots.push(d);
        }
        Self {
            lower,
            pivots,
            upper: h.off_diagonal.clone(),
        }
    }

    pub(crate) fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for i in 1..n {
            let l = self.lower[i - 1];
            let prev = y[i - 1];
            y[i] -= l * prev;
        }
        y[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            let next = y[i + 1];
            y[i] = (y[i] - self.upper[i] * next) / self.pivots[i];
        }
        y
    }
}

fn tail_warning<T: Real>(dec: &SpectralDecomposition<T>, beta: T, value: T) -> Option<Warning> {
    let last = *dec.energies.last()?;
    let bound = (-beta * last).exp();
    (bound > c::<T>(1e-12) * value.abs()).then(|| Warning::SpectralTail {
        bound: to_f64(bound),
        value: to_f64(value),
    })
}

/// Σ_n e^{−βE_n} ψ_n(x_a) ψ_n(x_b) over the available states.
pub fn bloch_spectral<T: Real>(dec: &SpectralDecomposition<T>, q: &BlochQuery<T>) -> Diagnosed<T> {
    let mut value = T::zero();
    for n in 0..dec.len() {
        let w = (-q.beta * dec.energies[n]).exp();
        // product taken symmetrically so swapping x_a and x_b is bit-identical
        let pa = dec.eigenfunction_at(n, q.x_a);
        let pb = dec.eigenfunction_at(n, q.x_b);
        value += w * (pa * pb);
    }
    let warning = tail_warning(dec, q.beta, value);
    Diagnosed::with(value, warning)
}

/// Z(β) = Σ_n e^{−βE_n}.
pub fn partition_function<T: Real>(dec: &SpectralDecomposition<T>, beta: T) -> Diagnosed<T> {
    let value: T = dec.energies.iter().map(|e| (-beta * *e).exp()).sum();
    let warning = tail_warning(dec, beta, value);
    Diagnosed::with(value, warning)
}

/// Column ρ(x_a, ·, β) obtained by Crank–Nicolson evolution of a lattice delta
/// (height 1/h at the node nearest x_a) under ∂ρ/∂β = −Hρ. The returned
/// vector lives on every grid node and vanishes at the walls.
pub fn heat_propagate<T: Real>(h: &DiscreteHamiltonian<T>, x_a: T, beta: T, n_steps: usize) -> Result<Vec<T>> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
    }
    if !(beta > T::zero()) {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    let grid = &h.grid;
    let node = grid.nearest(x_a);
    if node == 0 || node + 1 == grid.n_points {
        return Err(Error::InvalidParameter("x_a must be inside the box".into()));
    }
    let n = h.dim();
    let dt = beta / cu::<T>(n_steps);
    let half = c::<T>(0.5) * dt;

    // (I + dt/2 H) factorization; the matrix is diagonally dominant
    let implicit = DiscreteHamiltonian {
        grid: h.grid,
        diagonal: h.diagonal.iter().map(|d| T::one() + half * *d).collect(),
        off_diagonal: h.off_diagonal.iter().map(|o| half * *o).collect(),
        params: h.params,
    };
    let solver = ShiftedTridiagonal::new(&implicit, T::zero());

    let mut u = vec![T::zero(); n];
    u[node - 1] = T::one() / grid.spacing();
    for _ in 0..n_steps {
        let hu = h.apply(&u);
        let rhs: Vec<T> = u.iter().zip(&hu).map(|(a, b)| *a - half * *b).collect();
        u = solver.solve(&rhs);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("heat_propagate"));
        }
    }
    let mut full = Vec::with_capacity(n + 2);
    full.push(T::zero());
    full.extend(u);
    full.push(T::zero());
    Ok(full)
}
