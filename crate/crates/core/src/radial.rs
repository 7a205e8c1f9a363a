//! Local-time machinery on top of the radial harmonic-oscillator kernel:
//! the kernel itself, its D → 0 boundary limits, the two-amplitude route to
//! the off-diagonal resolvent, angular-momentum suppression, and the
//! one-point local-time laws.

use crate::error::{Error, Result};
use crate::laplace::{gaver_stehfest_invert, FnTransform, LaplaceEvaluable};
use crate::physics::{GridSpec, PhysicalParams, System};
use crate::quadrature::GaussLegendre;
use crate::scalar::{c, cu, to_f64, Real};
use crate::special::bessel_i_scaled;
use crate::sturm::{compose_solution, solve_cauchy, CauchySolution, GreenSolver, ScaledPoint};

/// Amplitudes and end points of one radial kernel (η₂ x₂ | η₁ x₁)_D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialKernelArgs<T> {
    pub eta1: T,
    pub eta2: T,
    pub x1: T,
    pub x2: T,
    pub dim: T,
    pub energy: T,
}

impl<T: Real> RadialKernelArgs<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta1 >= T::zero() && self.eta2 >= T::zero()) {
            return Err(Error::InvalidParameter("amplitudes must be non-negative".into()));
        }
        if !(self.x1 < self.x2) {
            return Err(Error::InvalidParameter(format!("need x1 < x2, got {} and {}", self.x1, self.x2)));
        }
        if !(self.dim >= T::zero()) {
            return Err(Error::InvalidParameter(format!("dimension must be >= 0, got {}", self.dim)));
        }
        Ok(())
    }
}

/// One-point local-time request with coincident end points x_a = x_b = X.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTimeDensityQuery<T> {
    pub local_time: T,
    pub beta: T,
    pub x: T,
}

impl<T: Real> LocalTimeDensityQuery<T> {
    pub fn new(local_time: T, beta: T, x: T) -> Result<Self> {
        if !(local_time >= T::zero()) {
            return Err(Error::InvalidParameter(format!("local time must be >= 0, got {local_time}")));
        }
        if !(beta > T::zero()) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { local_time, beta, x })
    }
}

fn vanishing<T: Real>(p: &ScaledPoint<T>, length: T) -> bool {
    !(p.y.abs() > c::<T>(1e-12) * p.y_prime.abs() * length)
}

/// The x-dependent part of the kernel between two fixed points: F anchored
/// at x₁ (F = 0, F' = 1), G anchored at x₂ (G = 0, G' = −1).
#[derive(Debug, Clone)]
pub struct RadialKernel<T> {
    params: PhysicalParams<T>,
    /// G(x₁) = F(x₂)
    g_at_x1: T,
    f_logder_x2: T,
    g_logder_x1: T,
}

impl<T: Real> RadialKernel<T> {
    pub fn new(system: &System<T>, energy: T, x1: T, x2: T, grid: &GridSpec<T>) -> Result<Self> {
        if !(x1 < x2) {
            return Err(Error::InvalidParameter(format!("need x1 < x2, got {x1} and {x2}")));
        }
        let f = solve_cauchy(system, energy, x1, T::zero(), T::one(), grid)?;
        let g = solve_cauchy(system, energy, x2, T::zero(), -T::one(), grid)?;
        let f2 = f.eval(x2);
        let g1 = g.eval(x1);
        let length = x2 - x1;
        if vanishing(&f2, length) || vanishing(&g1, length) {
            return Err(Error::Pole {
                energy: to_f64(energy),
                wronskian: to_f64(g1.value().abs()),
                threshold: 1e-12,
            });
        }
        let g_at_x1 = g1.value();
        if !(g_at_x1 > T::zero()) || !g_at_x1.is_finite() {
            return Err(Error::Domain {
                arg: to_f64(g_at_x1),
                reason: "G(x1) must be positive and finite for the Bessel argument",
            });
        }
        Ok(Self {
            params: system.params,
            g_at_x1,
            f_logder_x2: f2.log_derivative(),
            g_logder_x1: g1.log_derivative(),
        })
    }

    /// ln (η₂ x₂ | η₁ x₁)_D.
    pub fn ln_eval(&self, eta1: T, eta2: T, dim: T) -> Result<T> {
        let s = self.params.hbar2_over_m();
        let z = s * eta1 * eta2 / self.g_at_x1;
        let nu = c::<T>(0.5) * dim - T::one();
        let ln_i = bessel_i_scaled(nu, z)?.ln() + z;
        let gauss = -c::<T>(0.5) * s * (self.f_logder_x2 * eta2 * eta2 - self.g_logder_x1 * eta1 * eta1);
        Ok(s.ln() + c::<T>(0.5) * (eta1 * eta2).ln() - self.g_at_x1.ln() + ln_i + gauss)
    }

    pub fn eval(&self, eta1: T, eta2: T, dim: T) -> Result<T> {
        Ok(self.ln_eval(eta1, eta2, dim)?.exp())
    }

    /// G(x₁), which by the endpoint identity also equals F(x₂).
    pub fn g_at_x1(&self) -> T {
        self.g_at_x1
    }
}

/// (η₂ x₂ | η₁ x₁)_D = (ħ²/M) √(η₁η₂)/G(x₁) · I_{D/2−1}((ħ²/M) η₁η₂/G(x₁))
///   · exp[−(ħ²/2M)(F'(x₂)/F(x₂) η₂² − G'(x₁)/G(x₁) η₁²)].
pub fn radial_ho_kernel<T: Real>(system: &System<T>, args: &RadialKernelArgs<T>, grid: &GridSpec<T>) -> Result<T> {
    args.validate()?;
    RadialKernel::new(system, args.energy, args.x1, args.x2, grid)?.eval(args.eta1, args.eta2, args.dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// The η± → 0, D → 0 limits of the end kernels:
/// left  η^{−1/2} exp(−(ħ²/2M) F₁'(x)/F₁(x) η²),
/// right η^{−1/2} exp(+(ħ²/2M) G₃'(x)/G₃(x) η²).
pub fn boundary_limit<T: Real>(side: Side, sol: &CauchySolution<T>, eta: T, x: T) -> Result<T> {
    let expected = match side {
        Side::Left => sol.grid.x_minus,
        Side::Right => sol.grid.x_plus,
    };
    if sol.anchor.0 != expected {
        return Err(Error::InvalidParameter(format!(
            "{side:?} limit needs a solution anchored at {expected}"
        )));
    }
    if !(eta > T::zero()) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    let p = sol.eval(x);
    if vanishing(&p, sol.grid.length()) {
        return Err(Error::Pole {
            energy: to_f64(sol.energy_shift),
            wronskian: to_f64(p.value().abs()),
            threshold: 1e-12,
        });
    }
    let s = c::<T>(0.5) * sol.system().params.hbar2_over_m();
    let exponent = match side {
        Side::Left => -s * p.log_derivative() * eta * eta,
        Side::Right => s * p.log_derivative() * eta * eta,
    };
    Ok(exponent.exp() / eta.sqrt())
}

/// ∫₀^∞ z I₀(bz) e^{−az²/2} dz by quadrature (a > 0, b ≥ 0).
pub fn gaussian_bessel_quadrature<T: Real>(a: T, b: T) -> Result<T> {
    if !(a > T::zero()) || !(b >= T::zero()) {
        return Err(Error::InvalidParameter("need a > 0 and b >= 0".into()));
    }
    // integrand peaks near z = b/a with width 1/√a
    let centre = b / a;
    let width = T::one() / a.sqrt();
    let hi = centre + c::<T>(14.0) * width;
    let gl = GaussLegendre::<T>::new(24);
    let mut err = None;
    let value = gl.integrate_composite(T::zero(), hi, 64, |z| match bessel_i_scaled(T::zero(), b * z) {
        Ok(i0) => z * i0 * (b * z - c::<T>(0.5) * a * z * z).exp(),
        Err(e) => {
            err = Some(e);
            T::zero()
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// e^{b²/2a}/a.
pub fn gaussian_bessel_closed<T: Real>(a: T, b: T) -> T {
    (b * b / (c::<T>(2.0) * a)).exp() / a
}

/// Data of the two-amplitude integral for one (x_a < x_b, E).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoAmplitudeForm<T> {
    /// G₂(x_a), G₂ anchored at x_b
    pub g2_at_xa: T,
    /// F₁(x_b)/F₁(x_a)
    pub ratio_f: T,
    /// G₃(x_a)/G₃(x_b)
    pub ratio_g: T,
}

impl<T: Real> TwoAmplitudeForm<T> {
    pub fn new(system: &System<T>, energy: T, x_a: T, x_b: T, grid: &GridSpec<T>) -> Result<Self> {
        if !(x_a < x_b) {
            return Err(Error::InvalidParameter(format!("need x_a < x_b, got {x_a} and {x_b}")));
        }
        if !grid.contains_strictly(x_a) || !grid.contains_strictly(x_b) {
            return Err(Error::InvalidParameter("x_a and x_b must be interior points".into()));
        }
        let solver = GreenSolver::new(system, energy, grid)?;
        let g2 = compose_solution(&solver.f1, &solver.g3, x_b)?;
        let fa = solver.f1.eval(x_a);
        let fb = solver.f1.eval(x_b);
        let ga = solver.g3.eval(x_a);
        let gb = solver.g3.eval(x_b);
        let ratio_f = fb.y / fa.y * (fb.log_scale - fa.log_scale).exp();
        let ratio_g = ga.y / gb.y * (ga.log_scale - gb.log_scale).exp();
        Ok(Self {
            g2_at_xa: g2.value(x_a),
            ratio_f,
            ratio_g,
        })
    }

    /// Closed form of the integral after the Gaussian–Bessel reductions:
    /// (2M/ħ²) G₂(x_a) / (c_f c_g − 1).
    pub fn closed_form(&self, params: &PhysicalParams<T>) -> T {
        params.two_m_over_hbar2() * self.g2_at_xa / (self.ratio_f * self.ratio_g - T::one())
    }
}

/// Panels per axis and nodes per panel of the two-amplitude quadrature.
const AMPLITUDE_PANELS: usize = 24;
const AMPLITUDE_NODES: usize = 16;
/// Cut-off in marginal standard deviations.
const AMPLITUDE_CUTOFF: f64 = 12.0;

/// ρ̃(x_a, x_b, E) for x_a < x_b from the two-amplitude integral
/// (2ħ²/M) ∫∫ dη_a dη_b (η_aη_b/G₂(x_a)) I₀((ħ²/M) η_aη_b/G₂(x_a))
///   · exp[−(ħ²/2M)(F₁(x_b)/(F₁(x_a)G₂(x_a)) η_a² + G₃(x_a)/(G₂(x_a)G₃(x_b)) η_b²)]
/// evaluated by tensor Gauss–Legendre quadrature.
pub fn offdiag_green_via_radial<T: Real>(
    system: &System<T>,
    energy: T,
    x_a: T,
    x_b: T,
    grid: &GridSpec<T>,
) -> Result<T> {
    let form = TwoAmplitudeForm::new(system, energy, x_a, x_b, grid)?;
    two_amplitude_quadrature(&form, &system.params)
}

pub fn two_amplitude_quadrature<T: Real>(form: &TwoAmplitudeForm<T>, params: &PhysicalParams<T>) -> Result<T> {
    let g = form.g2_at_xa;
    let alpha = form.ratio_f / g;
    let gamma = form.ratio_g / g;
    let coupling = T::one() / g;
    let det = alpha * gamma - coupling * coupling;
    if !(g > T::zero()) || !(alpha > T::zero()) || !(gamma > T::zero()) || !(det > T::zero()) {
        return Err(Error::Divergent {
            a: to_f64(form.ratio_f),
            b: to_f64(form.ratio_g),
        });
    }
    let s = params.hbar2_over_m();
    let half = c::<T>(0.5);
    let cut = c::<T>(AMPLITUDE_CUTOFF);
    // marginals of exp(−(s/2) ηᵀAη), A = [[α, −1/g], [−1/g, γ]]
    let sigma_a = (gamma / (s * det)).sqrt();
    let sigma_b = (alpha / (s * det)).sqrt();
    let gl = GaussLegendre::<T>::new(AMPLITUDE_NODES);
    let axis = |sigma: T| -> Vec<(T, T)> {
        let width = cut * sigma / cu::<T>(AMPLITUDE_PANELS);
        (0..AMPLITUDE_PANELS)
            .flat_map(|k| {
                let lo = cu::<T>(k) * width;
                gl.mapped(lo, lo + width).collect::<Vec<_>>()
            })
            .collect()
    };
    let ea = axis(sigma_a);
    let eb = axis(sigma_b);
    let mut total = T::zero();
    for &(a, wa) in &ea {
        let mut row = T::zero();
        for &(b, wb) in &eb {
            let z = s * a * b * coupling;
            let i0 = bessel_i_scaled(T::zero(), z)?;
            let q = alpha * a * a + gamma * b * b - c::<T>(2.0) * coupling * a * b;
            row += wb * a * b * coupling * i0 * (-half * s * q).exp();
        }
        total += wa * row;
    }
    Ok(c::<T>(2.0) * s * total)
}

/// Result of [`angular_momentum_scaling`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub exponent: f64,
    /// Largest deviation of a consecutive-pair slope from the fitted exponent.
    pub max_local_deviation: f64,
}

/// Tolerated spread of local log–log slopes before the sweep is declared to
/// have left the power-law regime.
pub const SCALING_SLOPE_SPREAD: f64 = 0.05;

/// Fits the power of η₋ in η₋^{(1−D)/2} (η_a x_a | η₋ X₋)_{D+2ℓ} for a small
/// replica dimension `dim`; the expected exponent is ℓ.
#[allow(clippy::too_many_arguments)]
pub fn angular_momentum_scaling<T: Real>(
    system: &System<T>,
    energy: T,
    ell: u32,
    eta_minus: &[T],
    eta_a: T,
    x_a: T,
    dim: T,
    grid: &GridSpec<T>,
) -> Result<ScalingFit> {
    if eta_minus.len() < 2 || eta_minus.iter().any(|e| !(*e > T::zero())) {
        return Err(Error::Fit("need at least two positive eta_minus values".into()));
    }
    if !(dim > T::zero()) {
        return Err(Error::InvalidParameter("replica dimension must be positive".into()));
    }
    let kernel = RadialKernel::new(system, energy, grid.x_minus, x_a, grid)?;
    let d_ell = dim + c::<T>(2.0 * ell as f64);
    let points: Vec<(f64, f64)> = eta_minus
        .iter()
        .map(|&em| {
            let ln_k = kernel.ln_eval(em, eta_a, d_ell)?;
            let y = c::<T>(0.5) * (T::one() - dim) * em.ln() + ln_k;
            Ok((to_f64(em.ln()), to_f64(y)))
        })
        .collect::<Result<_>>()?;
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("eta_minus values must not all coincide".into()));
    }
    let slope = sxy / sxx;
    let max_dev = points
        .windows(2)
        .filter(|w| w[1].0 != w[0].0)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0) - slope).abs())
        .fold(0.0f64, f64::max);
    if !slope.is_finite() || max_dev > SCALING_SLOPE_SPREAD {
        return Err(Error::Fit(format!(
            "sweep left the power-law regime: local slopes deviate by {max_dev:.3e} from {slope:.4}"
        )));
    }
    Ok(ScalingFit {
        exponent: slope,
        max_local_deviation: max_dev,
    })
}

/// Laplace-domain one-point law for x_a = x_b = X for all L at once:
/// p̃(L; E) = exp[−(Lħ²/2M)(F₁'(X)/F₁(X) − G₃'(X)/G₃(X))].
#[derive(Debug, Clone, Copy)]
pub struct OnePointLaplace<T> {
    /// (ħ²/2M)(F₁'/F₁ − G₃'/G₃) at X
    pub rate: T,
}

impl<T: Real> OnePointLaplace<T> {
    pub fn new(system: &System<T>, energy: T, x: T, grid: &GridSpec<T>) -> Result<Self> {
        let solver = GreenSolver::new(system, energy, grid)?;
        let f = solver.f1.eval(x);
        let g = solver.g3.eval(x);
        let length = grid.length();
        if vanishing(&f, length) || vanishing(&g, length) {
            return Err(Error::Pole {
                energy: to_f64(energy),
                wronskian: to_f64(f.value().abs().min(g.value().abs())),
                threshold: 1e-12,
            });
        }
        let rate = c::<T>(0.5) * system.params.hbar2_over_m() * (f.log_derivative() - g.log_derivative());
        Ok(Self { rate })
    }

    pub fn eval(&self, local_time: T) -> T {
        (-local_time * self.rate).exp()
    }
}

pub fn localtime_onepoint_laplace<T: Real>(
    system: &System<T>,
    energy: T,
    local_time: T,
    x: T,
    grid: &GridSpec<T>,
) -> Result<T> {
    if !(local_time >= T::zero()) {
        return Err(Error::InvalidParameter(format!("local time must be >= 0, got {local_time}")));
    }
    Ok(OnePointLaplace::new(system, energy, x, grid)?.eval(local_time))
}

/// ρ̃(x_a, x_b, E) by the radial route: the two-amplitude integral off the
/// diagonal (end points ordered), 1/rate of the one-point law on it.
pub fn green_via_radial<T: Real>(system: &System<T>, energy: T, x_a: T, x_b: T, grid: &GridSpec<T>) -> Result<T> {
    if x_a == x_b {
        let rate = OnePointLaplace::new(system, energy, x_a, grid)?.rate;
        return Ok(T::one() / rate);
    }
    offdiag_green_via_radial(system, energy, x_a.min(x_b), x_a.max(x_b), grid)
}

/// [`green_via_radial`] as a Laplace-domain function of E.
pub struct RadialTransform<'a, T> {
    pub system: &'a System<T>,
    pub grid: &'a GridSpec<T>,
    pub x_a: T,
    pub x_b: T,
}

impl<T: Real> LaplaceEvaluable<T> for RadialTransform<'_, T> {
    fn e_min(&self) -> T {
        -self
            .grid
            .nodes()
            .into_iter()
            .map(|x| self.system.v(x))
            .fold(T::infinity(), T::min)
    }

    fn eval(&self, energy: T) -> Result<T> {
        green_via_radial(self.system, energy, self.x_a, self.x_b, self.grid)
    }
}

/// Joint density p(L; β) by Gaver–Stehfest inversion of
/// [`localtime_onepoint_laplace`].
pub fn localtime_onepoint_density<T: Real>(
    system: &System<T>,
    query: &LocalTimeDensityQuery<T>,
    grid: &GridSpec<T>,
    order: usize,
) -> Result<T> {
    if query.local_time == T::zero() {
        return Ok(T::zero());
    }
    let e_min = -grid
        .nodes()
        .into_iter()
        .map(|x| system.v(x))
        .fold(T::infinity(), T::min);
    let transform = OnePointTransform {
        system,
        grid,
        x: query.x,
        local_time: query.local_time,
        e_min,
    };
    gaver_stehfest_invert(&transform, query.beta, order)
}

struct OnePointTransform<'a, T> {
    system: &'a System<T>,
    grid: &'a GridSpec<T>,
    x: T,
    local_time: T,
    e_min: T,
}

impl<T: Real> LaplaceEvaluable<T> for OnePointTransform<'_, T> {
    fn e_min(&self) -> T {
        self.e_min
    }

    fn eval(&self, energy: T) -> Result<T> {
        Ok(OnePointLaplace::new(self.system, energy, self.x, self.grid)?.eval(self.local_time))
    }
}

/// Whole-line free joint density L e^{−L²ħ²/(2βM)} / √(2πMβ³/ħ²).
pub fn localtime_joint_density_free<T: Real>(params: &PhysicalParams<T>, beta: T, local_time: T) -> T {
    let s = params.hbar2_over_m();
    let two = c::<T>(2.0);
    local_time * (-local_time * local_time * s / (two * beta)).exp() / (two * T::PI() * beta * beta * beta / s).sqrt()
}

/// Conditional density of the local time at the bridge end point,
/// ħ²L e^{−L²ħ²/(2βM)}/(βM).
pub fn localtime_conditional_density<T: Real>(params: &PhysicalParams<T>, beta: T, local_time: T) -> T {
    let s = params.hbar2_over_m();
    s * local_time * (-local_time * local_time * s / (c::<T>(2.0) * beta)).exp() / beta
}

/// Closed-form conditional CDF 1 − e^{−L²ħ²/(2βM)}.
pub fn localtime_conditional_cdf<T: Real>(params: &PhysicalParams<T>, beta: T, local_time: T) -> T {
    let s = params.hbar2_over_m();
    -(-local_time * local_time * s / (c::<T>(2.0) * beta)).exp_m1()
}

/// Free-particle transform e^{−√(2ħ²E/M) L} wrapped for the inverter.
pub fn free_onepoint_transform<T: Real>(
    params: PhysicalParams<T>,
    local_time: T,
) -> FnTransform<impl Fn(T) -> T + Sync, T> {
    FnTransform {
        f: move |e: T| (-(c::<T>(2.0) * params.hbar2_over_m() * e).sqrt() * local_time).exp(),
        e_min: T::zero(),
    }
}

/// Inputs of [`weight_factor_diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFactorArgs<T> {
    pub x_a: T,
    pub x_b: T,
    pub dim: T,
    pub eta_minus: T,
    pub eta_plus: T,
}

/// ln 𝒲_D = ln(2/D²) + ((1−D)/2) ln(η₋η₊) + ln η(x_a)η(x_b)
///   − ∫ [ħ²/(2M) η'² + (M/ħ²) Δ(x)/(8η²)] dx,
/// Δ = −1 on [x_a, x_b] and (D−1)(D−3) elsewhere. `eta_path` holds η on
/// every grid node; its end values are replaced by η₋ and η₊.
pub fn weight_factor_diagnostic<T: Real>(
    eta_path: &[T],
    params: &PhysicalParams<T>,
    args: &WeightFactorArgs<T>,
    grid: &GridSpec<T>,
) -> Result<T> {
    let n = grid.n_points;
    if eta_path.len() != n {
        return Err(Error::InvalidParameter(format!(
            "eta path has {} values for {n} grid nodes",
            eta_path.len()
        )));
    }
    if !(args.dim > T::zero()) || !(args.eta_minus > T::zero()) || !(args.eta_plus > T::zero()) {
        return Err(Error::InvalidParameter("need D > 0 and positive end amplitudes".into()));
    }
    let mut eta = eta_path.to_vec();
    eta[0] = args.eta_minus;
    eta[n - 1] = args.eta_plus;
    if let Some(i) = (1..n - 1).find(|&i| !(eta[i] > T::zero())) {
        return Err(Error::Singularity { x: to_f64(grid.node(i)) });
    }
    let (lo, hi) = if args.x_a <= args.x_b {
        (args.x_a, args.x_b)
    } else {
        (args.x_b, args.x_a)
    };
    let h = grid.spacing();
    let s = params.hbar2_over_m();
    let outside = (args.dim - T::one()) * (args.dim - c::<T>(3.0));
    let centrifugal = |i: usize| {
        let x = grid.node(i);
        let delta = if x >= lo && x <= hi { -T::one() } else { outside };
        delta / (c::<T>(8.0) * s * eta[i] * eta[i])
    };
    let mut action = T::zero();
    for i in 0..n - 1 {
        let d = (eta[i + 1] - eta[i]) / h;
        action += h * c::<T>(0.5) * s * d * d;
    }
    let inner: T = (1..n - 1).map(centrifugal).sum();
    action += h * (inner + c::<T>(0.5) * (centrifugal(0) + centrifugal(n - 1)));
    let ea = grid.interpolate(&eta, args.x_a);
    let eb = grid.interpolate(&eta, args.x_b);
    Ok((c::<T>(2.0) / (args.dim * args.dim)).ln()
        + c::<T>(0.5) * (T::one() - args.dim) * (args.eta_minus * args.eta_plus).ln()
        + (ea * eb).ln()
        - action)
}
