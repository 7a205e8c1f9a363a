//! Low- and high-temperature limits of the Bloch matrix: lattice ground
//! state and the leading large-β law, Gelfand–Yaglom determinants with their
//! lattice counterparts, Laplace's method, and the leading small-β term.

use crate::error::{Error, Result};
use crate::physics::{BlochQuery, GridSpec, System};
use crate::quadrature::cumulative_corrected_trapezoid;
use crate::scalar::{c, cu, to_f64, Real};
use crate::spectral::{DiscreteHamiltonian, ShiftedTridiagonal, SpectralDecomposition};
use crate::sturm::{solve_cauchy, CauchySolution};

const GROUND_STATE_MAX_ITERATIONS: usize = 500;

/// Lattice ground state, normalized Σ ψ² h = 1 and positive inside the box.
#[derive(Debug, Clone)]
pub struct GroundState<T> {
    pub grid: GridSpec<T>,
    pub energy: T,
    /// Values on every grid node (zero at the walls).
    pub wavefunction: Vec<T>,
}

impl<T: Real> GroundState<T> {
    pub fn at(&self, x: T) -> T {
        self.grid.interpolate(&self.wavefunction, x)
    }
}

fn rayleigh<T: Real>(h: &DiscreteHamiltonian<T>, v: &[T]) -> (T, T) {
    let hv = h.apply(v);
    let vv: T = v.iter().map(|a| *a * *a).sum();
    let mu = v.iter().zip(&hv).map(|(a, b)| *a * *b).sum::<T>() / vv;
    let res = hv
        .iter()
        .zip(v)
        .map(|(a, b)| (*a - mu * *b) * (*a - mu * *b))
        .sum::<T>()
        .sqrt()
        / vv.sqrt();
    (mu, res)
}

/// Shifted inverse iteration from below the Gershgorin bound, switching to
/// Rayleigh-quotient shifts once the quotient has settled.
pub fn ground_state<T: Real>(h: &DiscreteHamiltonian<T>) -> Result<GroundState<T>> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("Hamiltonian has no interior nodes".into()));
    }
    let (lo, hi) = h.gershgorin();
    let scale = lo.abs().max(hi.abs()).max(T::one());
    let tol = c::<T>(64.0) * T::epsilon() * scale;
    let mut v = vec![T::one(); n];
    let mut sigma = lo - c::<T>(1e-3) * scale;
    let (mut mu, _) = rayleigh(h, &v);
    let mut rqi = false;
    for _ in 0..GROUND_STATE_MAX_ITERATIONS {
        v = ShiftedTridiagonal::new(h, sigma).solve(&v);
        let norm = v.iter().map(|a| *a * *a).sum::<T>().sqrt();
        if !norm.is_finite() || norm == T::zero() {
            break;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        let (next, res) = rayleigh(h, &v);
        if res <= tol {
            mu = next;
            // the quotient must sit below exactly one lattice eigenvalue
            if h.count_below(mu + tol) == 1 || n == 1 {
                return Ok(finish(h, mu, v));
            }
            break;
        }
        if !rqi && (next - mu).abs() < c::<T>(1e-4) * (next.abs() + T::one()) {
            rqi = true;
        }
        mu = next;
        if rqi {
            sigma = mu;
        }
    }
    Err(Error::Convergence {
        what: "ground-state inverse iteration",
        index: 0,
        iterations: GROUND_STATE_MAX_ITERATIONS,
    })
}

fn finish<T: Real>(h: &DiscreteHamiltonian<T>, energy: T, v: Vec<T>) -> GroundState<T> {
    let step = h.grid.spacing();
    let sign = if v.iter().copied().sum::<T>() < T::zero() { -T::one() } else { T::one() };
    let norm = (v.iter().map(|a| *a * *a).sum::<T>() * step).sqrt();
    let mut wavefunction = Vec::with_capacity(v.len() + 2);
    wavefunction.push(T::zero());
    wavefunction.extend(v.iter().map(|a| sign * *a / norm));
    wavefunction.push(T::zero());
    GroundState {
        grid: h.grid,
        energy,
        wavefunction,
    }
}

/// Rayleigh quotient ⟨v|H|v⟩/⟨v|v⟩ of an interior vector.
pub fn rayleigh_quotient<T: Real>(h: &DiscreteHamiltonian<T>, v: &[T]) -> T {
    rayleigh(h, v).0
}

/// e^{−βE₀} ψ₀(x_a) ψ₀(x_b).
pub fn low_temperature_leading<T: Real>(gs: &GroundState<T>, q: &BlochQuery<T>) -> Result<T> {
    q.check_inside(&gs.grid)?;
    Ok((-q.beta * gs.energy).exp() * gs.at(q.x_a) * gs.at(q.x_b))
}

/// ρ/ρ_leading − 1 = Σ_{n≥1} e^{−β(E_n−E₀)} ψ_n(x_a)ψ_n(x_b) / (ψ₀(x_a)ψ₀(x_b)),
/// summed directly so that it stays accurate when it is far below roundoff
/// of ρ itself.
pub fn leading_excess<T: Real>(dec: &SpectralDecomposition<T>, q: &BlochQuery<T>) -> Result<T> {
    q.check_inside(&dec.grid)?;
    let e0 = dec.energies[0];
    let p0 = dec.eigenfunction_at(0, q.x_a) * dec.eigenfunction_at(0, q.x_b);
    Ok((1..dec.len())
        .map(|n| (-q.beta * (dec.energies[n] - e0)).exp() * dec.eigenfunction_at(n, q.x_a) * dec.eigenfunction_at(n, q.x_b))
        .fold(T::zero(), |a, t| a + t)
        / p0)
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> Result<(T, T)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Fit("need at least two matching points".into()));
    }
    let n = cu::<T>(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let sxx: T = x.iter().map(|a| (*a - mx) * (*a - mx)).sum();
    let sxy: T = x.iter().zip(y).map(|(a, b)| (*a - mx) * (*b - my)).sum();
    if sxx == T::zero() {
        return Err(Error::Fit("abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    if !slope.is_finite() {
        return Err(Error::NonFinite("linear fit"));
    }
    Ok((slope, my - slope * mx))
}

/// Fitted rate r in log(ρ/ρ_leading) ∝ e^{rβ} over the given β values.
pub fn low_temperature_decay_rate<T: Real>(dec: &SpectralDecomposition<T>, x_a: T, x_b: T, betas: &[T]) -> Result<T> {
    let logs = betas
        .iter()
        .map(|b| {
            let excess = leading_excess(dec, &BlochQuery::new(x_a, x_b, *b)?)?;
            let l = excess.ln_1p();
            if !(l > T::zero()) {
                return Err(Error::Fit(format!("log ratio {l} not positive at beta {b}")));
            }
            Ok(l.ln())
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(linear_fit(betas, &logs)?.0)
}

/// D(X+) from the Gelfand–Yaglom initial-value problem and ε·det of the
/// lattice operator on the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminantResult<T> {
    /// D(X+) (infinite only if it overflows; see `log_scale`).
    pub d_value: T,
    pub lattice_det_times_eps: T,
    /// ln |D(X+)|, finite even when D itself would overflow.
    pub log_scale: T,
    /// ln |ε·det|.
    pub lattice_log_scale: T,
    /// D(X+) from d'Alembert's reduction when a nodeless amplitude is supplied.
    pub d_alembert: Option<T>,
}

/// ε·det of −ε²∇∇̄ + ε²(2M/ħ²)(V − E₀) on the interior nodes, by the
/// three-term recursion with running rescaling. Returns (value, ln |value|).
pub fn lattice_determinant<T: Real>(system: &System<T>, e0: T, grid: &GridSpec<T>) -> (T, T) {
    let eps = grid.spacing();
    let k = system.params.two_m_over_hbar2();
    let two = c::<T>(2.0);
    let (mut prev, mut cur) = (T::zero(), T::one());
    let mut log = T::zero();
    for i in 1..grid.n_points - 1 {
        let a = two + eps * eps * k * (system.v(grid.node(i)) - e0);
        let next = a * cur - prev;
        prev = cur;
        cur = next;
        let m = cur.abs().max(prev.abs());
        if m > T::RESCALE_THRESHOLD {
            prev = prev / m;
            cur = cur / m;
            log += m.ln();
        }
    }
    let ln_abs = log + cur.abs().ln() + eps.ln();
    let value = if log == T::zero() { eps * cur } else { cur.signum() * ln_abs.exp() };
    (value, ln_abs)
}

/// D'' = (2M/ħ²)(V − E₀) D, D(X−) = 0, D'(X−) = 1, integrated to X+, plus the
/// lattice determinant and, if `eta0` is given, d'Alembert's form
/// D(x) = η₀(x) η₀(X−) ∫_{X−}^x dξ/η₀².
pub fn gelfand_yaglom<T: Real>(
    system: &System<T>,
    e0: T,
    grid: &GridSpec<T>,
    eta0: Option<&CauchySolution<T>>,
) -> Result<DeterminantResult<T>> {
    let sol = solve_cauchy(system, -e0, grid.x_minus, T::zero(), T::one(), grid)?;
    let end = sol.at_node(grid.n_points - 1);
    let (lattice_det_times_eps, lattice_log_scale) = lattice_determinant(system, e0, grid);
    let d_alembert = eta0.map(|eta| d_alembert(eta, grid)).transpose()?;
    Ok(DeterminantResult {
        d_value: end.value(),
        lattice_det_times_eps,
        log_scale: end.ln_abs(),
        lattice_log_scale,
        d_alembert,
    })
}

fn d_alembert<T: Real>(eta: &CauchySolution<T>, grid: &GridSpec<T>) -> Result<T> {
    let values = eta.values();
    let derivs: Vec<T> = (0..grid.n_points).map(|i| eta.at_node(i).derivative()).collect();
    let sign = values[0].signum();
    for (i, w) in values.windows(2).enumerate() {
        if !(w[0] * sign > T::zero()) || !(w[1] * sign > T::zero()) {
            return Err(Error::Node {
                x: to_f64(grid.node(i)),
            });
        }
    }
    let inv2: Vec<T> = values.iter().map(|y| T::one() / (*y * *y)).collect();
    let dinv2: Vec<T> = values
        .iter()
        .zip(&derivs)
        .map(|(y, d)| -c::<T>(2.0) * *d / (*y * *y * *y))
        .collect();
    let integral = *cumulative_corrected_trapezoid(&inv2, &dinv2, grid.spacing())
        .last()
        .expect("grid has nodes");
    let out = values[grid.n_points - 1] * values[0] * integral;
    if !out.is_finite() {
        return Err(Error::NonFinite("d'Alembert determinant"));
    }
    Ok(out)
}

/// Forward and backward lattice derivatives of nodal values with spacing ε.
/// `forward[i]` is ∇f at node i (i < n−1); `backward[i]` is ∇̄f at node i+1.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDerivatives<T> {
    pub forward: Vec<T>,
    pub backward: Vec<T>,
}

pub fn lattice_derivatives<T: Real>(f: &[T], eps: T) -> LatticeDerivatives<T> {
    let d: Vec<T> = f.windows(2).map(|w| (w[1] - w[0]) / eps).collect();
    LatticeDerivatives {
        forward: d.clone(),
        backward: d,
    }
}

/// ∇∇̄f at the interior nodes.
pub fn lattice_laplacian<T: Real>(f: &[T], eps: T) -> Vec<T> {
    f.windows(3)
        .map(|w| ((w[2] - w[1]) - (w[1] - w[0])) / (eps * eps))
        .collect()
}

fn derivative<T: Real>(g: &impl Fn(T) -> T, t: T) -> T {
    let h = T::epsilon().cbrt() * t.abs().max(T::one());
    (g(t + h) - g(t - h)) / (c::<T>(2.0) * h)
}

fn second_derivative<T: Real>(g: &impl Fn(T) -> T, t: T) -> T {
    let h = T::epsilon().powf(c(0.25)) * t.abs().max(T::one());
    (g(t + h) - c::<T>(2.0) * g(t) + g(t - h)) / (h * h)
}

/// Laplace's formula √(2π/(βg″(t₀))) f(t₀) e^{−βg(t₀)} for ∫ f e^{−βg},
/// with t₀ found by bisection on g′ inside `bracket`.
pub fn laplace_method<T: Real>(f: impl Fn(T) -> T, g: impl Fn(T) -> T, beta: T, bracket: (T, T)) -> Result<T> {
    let (mut lo, mut hi) = bracket;
    let bracket_err = || Error::Bracket {
        lo: to_f64(bracket.0),
        hi: to_f64(bracket.1),
    };
    if !(lo < hi) || !(derivative(&g, lo) < T::zero()) || !(derivative(&g, hi) > T::zero()) {
        return Err(bracket_err());
    }
    for _ in 0..200 {
        let mid = c::<T>(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if derivative(&g, mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t0 = c::<T>(0.5) * (lo + hi);
    let g2 = second_derivative(&g, t0);
    if !(g2 > T::zero()) {
        return Err(bracket_err());
    }
    Ok((c::<T>(2.0) * T::PI() / (beta * g2)).sqrt() * f(t0) * (-beta * g(t0)).exp())
}

/// Leading small-β diagonal e^{−βV(x)} / λ_th with λ_th = √(2πβħ²/M).
pub fn high_temperature_leading<T: Real>(system: &System<T>, x: T, beta: T) -> T {
    let p = &system.params;
    let lambda = (c::<T>(2.0) * T::PI() * beta * p.hbar * p.hbar / p.mass).sqrt();
    (-beta * system.v(x)).exp() / lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::PhysicalParams;
    use crate::quadrature::GaussLegendre;
    use crate::spectral::{discretize, eigendecompose};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn mehler(x: f64, y: f64, beta: f64) -> f64 {
        let s = beta.sinh();
        (1.0 / (2.0 * PI * s)).sqrt() * (-((x * x + y * y) * beta.cosh() - 2.0 * x * y) / (2.0 * s)).exp()
    }

    fn oscillator(n: usize) -> DiscreteHamiltonian<f64> {
        discretize(&System::harmonic(1.0), &GridSpec::new(-10.0, 10.0, n).unwrap())
    }

    #[test]
    fn oscillator_ground_state() {
        let h = oscillator(4001);
        let gs = ground_state(&h).unwrap();
        assert_relative_eq!(gs.energy, 0.5, epsilon = 1e-6);
        assert_relative_eq!(gs.at(0.0), PI.powf(-0.25), epsilon = 1e-4);
        assert!(gs.wavefunction[1..4000].iter().all(|p| *p > 0.0));
        let norm: f64 = gs.wavefunction.iter().map(|p| p * p).sum::<f64>() * h.grid.spacing();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
        let dec = eigendecompose(&h, 2).unwrap();
        assert_relative_eq!(gs.energy, dec.energies[0], epsilon = 1e-10);
        let interior = &gs.wavefunction[1..4000];
        assert_relative_eq!(rayleigh_quotient(&h, interior), gs.energy, epsilon = 1e-10);
    }

    #[test]
    fn box_ground_state() {
        let h = discretize(&System::free(), &GridSpec::new(0.0, 1.0, 2001).unwrap());
        let gs = ground_state(&h).unwrap();
        assert_relative_eq!(gs.energy, PI * PI / 2.0, max_relative = 1e-6);
        for x in [0.1, 0.25, 0.5, 0.8] {
            assert_relative_eq!(gs.at(x), 2f64.sqrt() * (PI * x).sin(), epsilon = 1e-5);
        }
    }

    #[test]
    fn trial_quotients_bound_the_ground_state() {
        let h = oscillator(801);
        let gs = ground_state(&h).unwrap();
        let xs: Vec<f64> = (1..800).map(|i| h.grid.node(i)).collect();
        for w in [0.3, 0.7, 1.0, 1.5, 3.0] {
            for shift in [0.0, 0.4, -1.2] {
                let trial: Vec<f64> = xs.iter().map(|x| (-(x - shift) * (x - shift) / (2.0 * w)).exp()).collect();
                assert!(rayleigh_quotient(&h, &trial) >= gs.energy - 1e-12);
            }
        }
    }

    #[test]
    fn low_temperature_leading_term() {
        let h = oscillator(4001);
        let gs = ground_state(&h).unwrap();
        let q = BlochQuery::new(0.0, 0.0, 10.0).unwrap();
        let lead = low_temperature_leading(&gs, &q).unwrap();
        assert_relative_eq!(lead, (-5.0f64).exp() / PI.sqrt(), max_relative = 1e-5);
        assert_relative_eq!(lead / mehler(0.0, 0.0, 10.0), 1.0, epsilon = 2e-4);
        let q2 = BlochQuery::new(0.3, -1.1, 2.0).unwrap();
        let q3 = BlochQuery::new(-1.1, 0.3, 2.0).unwrap();
        assert_eq!(low_temperature_leading(&gs, &q2).unwrap(), low_temperature_leading(&gs, &q3).unwrap());
    }

    #[test]
    fn gap_law() {
        let dec = eigendecompose(&oscillator(2001), 12).unwrap();
        let betas: Vec<f64> = (0..11).map(|i| 5.0 + i as f64).collect();
        // off the symmetry point the first excited state contributes: rate −(E₁−E₀)
        let rate = low_temperature_decay_rate(&dec, 0.5, 0.5, &betas).unwrap();
        assert_relative_eq!(rate, -(dec.energies[1] - dec.energies[0]), max_relative = 0.05);
        // at the origin ψ₁ vanishes and the next even state sets the rate
        let rate0 = low_temperature_decay_rate(&dec, 0.0, 0.0, &betas).unwrap();
        assert_relative_eq!(rate0, -(dec.energies[2] - dec.energies[0]), max_relative = 0.01);
        // ratio − 1 bounded by C e^{−β(E₁−E₀)} with C stable over the sweep
        let cs: Vec<f64> = betas
            .iter()
            .map(|b| {
                let e = leading_excess(&dec, &BlochQuery::new(0.5, 0.5, *b).unwrap()).unwrap();
                assert!(e >= 0.0);
                e * (b * (dec.energies[1] - dec.energies[0])).exp()
            })
            .collect();
        assert_relative_eq!(cs[0], cs[10], max_relative = 0.05);
    }

    #[test]
    fn free_determinant_is_box_length() {
        for (a, b, n) in [(0.0, 1.0, 101), (-2.0, 3.0, 2001), (0.5, 4.5, 64)] {
            let grid = GridSpec::new(a, b, n).unwrap();
            let r = gelfand_yaglom(&System::free(), 0.0, &grid, None).unwrap();
            assert_relative_eq!(r.d_value, b - a, max_relative = 1e-12);
            assert_relative_eq!(r.lattice_det_times_eps, b - a, max_relative = 1e-12);
        }
    }

    #[test]
    fn harmonic_determinant_lattice_agreement() {
        let sys = System::harmonic(1.0);
        let diff = |n: usize| {
            let r = gelfand_yaglom(&sys, 0.0, &GridSpec::new(-3.0f64, 3.0, n + 1).unwrap(), None).unwrap();
            (r.d_value - r.lattice_det_times_eps).abs() / r.d_value
        };
        let d2000 = diff(2000);
        assert!(d2000 < 1e-4, "{d2000}");
        assert!(diff(1000) / d2000 > 2.0);
    }

    #[test]
    fn lattice_determinant_diverges_linearly() {
        let sys = System::harmonic(1.0);
        let ns = [250usize, 500, 1000, 2000, 4000];
        let (x, y): (Vec<f64>, Vec<f64>) = ns
            .iter()
            .map(|n| {
                let g = GridSpec::new(-3.0f64, 3.0, n + 1).unwrap();
                let (_, ln_eps_det) = lattice_determinant(&sys, 0.0, &g);
                ((*n as f64).ln(), ln_eps_det - g.spacing().ln())
            })
            .unzip();
        let (slope, _) = linear_fit(&x, &y).unwrap();
        assert_relative_eq!(slope, 1.0, epsilon = 0.02);
    }

    #[test]
    fn d_alembert_matches_direct() {
        let sys = System::harmonic(1.0);
        let grid = GridSpec::new(-3.0, 3.0, 2001).unwrap();
        let eta = solve_cauchy(&sys, 0.0, 0.0, 1.0, 0.0, &grid).unwrap();
        let r = gelfand_yaglom(&sys, 0.0, &grid, Some(&eta)).unwrap();
        assert_relative_eq!(r.d_alembert.unwrap(), r.d_value, max_relative = 1e-8);
        // an amplitude with a node is rejected
        let odd = solve_cauchy(&sys, 0.0, 0.0, 0.0, 1.0, &grid).unwrap();
        assert!(matches!(gelfand_yaglom(&sys, 0.0, &grid, Some(&odd)), Err(Error::Node { .. })));
    }

    #[test]
    fn huge_box_determinant_stays_finite_in_log() {
        let sys = System::harmonic(1.0);
        let grid = GridSpec::new(-40.0f64, 40.0, 16001).unwrap();
        let r = gelfand_yaglom(&sys, 0.0, &grid, None).unwrap();
        assert!(r.log_scale.is_finite() && r.lattice_log_scale.is_finite());
        assert!(r.log_scale > 700.0);
        assert_relative_eq!(r.log_scale, r.lattice_log_scale, max_relative = 1e-3);
    }

    #[test]
    fn lattice_derivative_identities() {
        let eps = 0.01f64;
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 * eps).collect();
        let lin: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let d = lattice_derivatives(&lin, eps);
        assert!(d.forward.iter().chain(&d.backward).all(|v| (v - 3.0).abs() < 1e-12));

        let f: Vec<f64> = xs.iter().map(|x| (x * (1.0 - x)).powi(2) * (3.0 * x).cos()).collect();
        let g: Vec<f64> = xs.iter().map(|x| (PI * x).sin() * (1.0 + x)).collect();
        let df = lattice_derivatives(&f, eps);
        let dg = lattice_derivatives(&g, eps);
        // Σ g∇f = −Σ (∇̄g) f over nodes 0..n−1, with f, g vanishing at the ends
        let lhs: f64 = (0..100).map(|i| g[i] * df.forward[i]).sum();
        let rhs: f64 = -(1..=100).map(|i| dg.backward[i - 1] * f[i]).sum::<f64>();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-12);

        let len = 1.0;
        for k in 1..5 {
            let s: Vec<f64> = xs.iter().map(|x| (PI * k as f64 * x / len).sin()).collect();
            let lap = lattice_laplacian(&s, eps);
            let lam = -(4.0 / (eps * eps)) * (PI * k as f64 * eps / (2.0 * len)).sin().powi(2);
            for (i, v) in lap.iter().enumerate() {
                assert!((v - lam * s[i + 1]).abs() < 1e-12 * lam.abs(), "k={k} i={i}");
            }
        }
    }

    fn quad(f: impl Fn(f64) -> f64) -> f64 {
        GaussLegendre::<f64>::new(20).integrate_composite(-8.0, 8.0, 400, f)
    }

    #[test]
    fn laplace_gaussian_exact() {
        for beta in [0.5, 3.0, 40.0] {
            let v = laplace_method(|_| 1.0, |t: f64| t * t / 2.0, beta, (-1.0, 2.0)).unwrap();
            assert_relative_eq!(v, (2.0 * PI / beta).sqrt(), max_relative = 1e-8);
        }
    }

    #[test]
    fn laplace_quartic_error_order() {
        let g = |t: f64| t * t / 2.0 + t.powi(4) / 4.0;
        let betas = [50.0f64, 100.0, 200.0, 400.0];
        let errs: Vec<f64> = betas
            .iter()
            .map(|b| {
                let exact = quad(|t| (-b * g(t)).exp());
                ((laplace_method(|_| 1.0, g, *b, (-1.0, 1.0)).unwrap() - exact) / exact).abs()
            })
            .collect();
        assert!(errs[0] < 0.02, "{}", errs[0]);
        for w in errs.windows(2) {
            assert_relative_eq!(w[0] / w[1], 2.0, max_relative = 0.1);
        }
        let lx: Vec<f64> = betas.iter().map(|b| b.ln()).collect();
        let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        assert!(linear_fit(&lx, &ly).unwrap().0 <= -1.0 + 0.05);
    }

    #[test]
    fn laplace_cosine() {
        let v = laplace_method(|t: f64| t.cos(), |t: f64| t * t / 2.0, 100.0, (-0.5, 0.5)).unwrap();
        assert_relative_eq!(v, (2.0 * PI / 100.0).sqrt(), max_relative = 1e-12);
        let exact = quad(|t| t.cos() * (-50.0 * t * t).exp());
        assert_relative_eq!(v, exact, max_relative = 0.01);
    }

    #[test]
    fn laplace_bracket_error() {
        let r = laplace_method(|_| 1.0, |t: f64| t * t, 1.0, (0.5, 2.0));
        assert!(matches!(r, Err(Error::Bracket { .. })));
    }

    #[test]
    fn high_temperature_term() {
        assert_relative_eq!(
            high_temperature_leading(&System::free(), 1.7, 0.01),
            1.0 / (2.0 * PI * 0.01f64).sqrt(),
            max_relative = 1e-14
        );
        let sys = System::harmonic(1.0);
        assert_relative_eq!(mehler(0.0, 0.0, 0.01) / high_temperature_leading(&sys, 0.0, 0.01), 1.0, epsilon = 0.005);
        // leading correction −β²V″/12 + β³V′²/24: deviation scales as β²
        for x in [0.0, 1.0] {
            let dev = |b: f64| (mehler(x, x, b) / high_temperature_leading(&sys, x, b) - 1.0).abs();
            let r = dev(0.02) / dev(0.01);
            assert_relative_eq!(r, 4.0, max_relative = 0.05);
        }
    }

    #[test]
    fn single_precision_ground_state() {
        let h = discretize(&System::<f32>::harmonic(1.0), &GridSpec::new(-8.0f32, 8.0, 401).unwrap());
        let gs = ground_state(&h).unwrap();
        assert!((gs.energy - 0.5).abs() < 1e-3);
        let _ = PhysicalParams::<f32>::default();
    }
}
