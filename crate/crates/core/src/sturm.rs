//! Initial-value solutions of (H + E) y = 0, i.e. y'' = (2M/ħ²)(V + E) y,
//! their Wronskians, and the resolvent kernel ρ̃(x_a, x_b, E) built from a
//! left-anchored and a right-anchored solution.

use crate::error::{Error, Result};
use crate::physics::{GridSpec, System};
use crate::scalar::{c, to_f64, Real};

/// Relative Wronskian size below which the energy is treated as a pole.
pub const POLE_THRESHOLD: f64 = 1e-12;

/// Value and derivative of a solution at one point, stored as a mantissa
/// pair times e^{log_scale}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPoint<T> {
    pub y: T,
    pub y_prime: T,
    pub log_scale: T,
}

impl<T: Real> ScaledPoint<T> {
    pub fn value(&self) -> T {
        self.y * self.log_scale.exp()
    }

    pub fn derivative(&self) -> T {
        self.y_prime * self.log_scale.exp()
    }

    /// y'/y, independent of the scale.
    pub fn log_derivative(&self) -> T {
        self.y_prime / self.y
    }

    /// ln |y|.
    pub fn ln_abs(&self) -> T {
        self.y.abs().ln() + self.log_scale
    }
}

#[derive(Debug, Clone)]
enum Origin<T> {
    Integrated,
    /// [F₁(x)G₃(x_b) − F₁(x_b)G₃(x)] / W(F₁, G₃), evaluated algebraically
    Composed {
        f1: Box<CauchySolution<T>>,
        g3: Box<CauchySolution<T>>,
        x_b: T,
    },
}

/// A solution of y'' = (2M/ħ²)(V + E) y tabulated on every grid node.
///
/// Actual values are `y[i]·exp(log_scale[i])`; the scale only moves when the
/// mantissa would exceed [`Real::RESCALE_THRESHOLD`].
#[derive(Debug, Clone)]
pub struct CauchySolution<T> {
    pub grid: GridSpec<T>,
    pub y: Vec<T>,
    pub y_prime: Vec<T>,
    pub log_scale: Vec<T>,
    pub energy_shift: T,
    /// (x₀, y₀, y₀')
    pub anchor: (T, T, T),
    pub rescaled: bool,
    system: System<T>,
    origin: Origin<T>,
}

impl<T: Real> CauchySolution<T> {
    pub fn at_node(&self, i: usize) -> ScaledPoint<T> {
        ScaledPoint {
            y: self.y[i],
            y_prime: self.y_prime[i],
            log_scale: self.log_scale[i],
        }
    }

    /// Solution at an arbitrary point of the box: a partial integration step
    /// from the nearest node, or the exact linear combination for composed
    /// solutions.
    pub fn eval(&self, x: T) -> ScaledPoint<T> {
        match &self.origin {
            Origin::Composed { f1, g3, x_b } => composed_point(f1, g3, *x_b, x),
            Origin::Integrated => {
                let i = self.grid.nearest(x);
                let xi = self.grid.node(i);
                if x == xi {
                    return self.at_node(i);
                }
                let q = self.coefficient();
                let (y, yp) = rk4_step(self.y[i], self.y_prime[i], xi, x - xi, &q);
                ScaledPoint {
                    y,
                    y_prime: yp,
                    log_scale: self.log_scale[i],
                }
            }
        }
    }

    pub fn value(&self, x: T) -> T {
        self.eval(x).value()
    }

    pub fn derivative(&self, x: T) -> T {
        self.eval(x).derivative()
    }

    /// Nodal values with the scale folded in (may overflow for wide boxes).
    pub fn values(&self) -> Vec<T> {
        self.y
            .iter()
            .zip(&self.log_scale)
            .map(|(y, s)| *y * s.exp())
            .collect()
    }

    pub fn system(&self) -> &System<T> {
        &self.system
    }

    fn coefficient(&self) -> impl Fn(T) -> T + '_ {
        let k = self.system.params.two_m_over_hbar2();
        let e = self.energy_shift;
        move |x| k * (self.system.v(x) + e)
    }
}

fn rk4_step<T: Real, Q: Fn(T) -> T>(y: T, p: T, x: T, h: T, q: &Q) -> (T, T) {
    let half = c::<T>(0.5);
    let sixth = c::<T>(1.0 / 6.0);
    let q0 = q(x);
    let qm = q(x + half * h);
    let q1 = q(x + h);
    let k1y = p;
    let k1p = q0 * y;
    let k2y = p + half * h * k1p;
    let k2p = qm * (y + half * h * k1y);
    let k3y = p + half * h * k2p;
    let k3p = qm * (y + half * h * k2y);
    let k4y = p + h * k3p;
    let k4p = q1 * (y + h * k3y);
    let two = c::<T>(2.0);
    (
        y + h * sixth * (k1y + two * k2y + two * k3y + k4y),
        p + h * sixth * (k1p + two * k2p + two * k3p + k4p),
    )
}

/// Integrates y'' = (2M/ħ²)(V(x) + E) y from (x0, y0, y0') to both ends of
/// the grid with fixed-step RK4 on the grid nodes.
pub fn solve_cauchy<T: Real>(
    system: &System<T>,
    energy: T,
    x0: T,
    y0: T,
    y0p: T,
    grid: &GridSpec<T>,
) -> Result<CauchySolution<T>> {
    if !grid.contains(x0) {
        return Err(Error::InvalidParameter(format!(
            "anchor {x0} outside [{}, {}]",
            grid.x_minus, grid.x_plus
        )));
    }
    if !energy.is_finite() || !y0.is_finite() || !y0p.is_finite() {
        return Err(Error::InvalidParameter("non-finite initial data".into()));
    }
    let k = system.params.two_m_over_hbar2();
    let q = |x: T| k * (system.v(x) + energy);
    let n = grid.n_points;
    let mut y = vec![T::zero(); n];
    let mut yp = vec![T::zero(); n];
    let mut ls = vec![T::zero(); n];
    let mut rescaled = false;

    let i0 = grid.nearest(x0);
    let x_start = grid.node(i0);
    let (a, b) = if x_start == x0 {
        (y0, y0p)
    } else {
        rk4_step(y0, y0p, x0, x_start - x0, &q)
    };
    y[i0] = a;
    yp[i0] = b;

    let limit = T::RESCALE_THRESHOLD;
    let mut renormalize = |a: &mut T, b: &mut T, s: &mut T| {
        let m = a.abs().max(b.abs());
        if m > limit {
            *a /= m;
            *b /= m;
            *s += m.ln();
            rescaled = true;
        }
    };

    for dir in [1isize, -1] {
        let (mut a, mut b, mut s) = (y[i0], yp[i0], T::zero());
        let mut i = i0 as isize;
        loop {
            let j = i + dir;
            if j < 0 || j >= n as isize {
                break;
            }
            let xi = grid.node(i as usize);
            let step = grid.node(j as usize) - xi;
            let (na, nb) = rk4_step(a, b, xi, step, &q);
            a = na;
            b = nb;
            renormalize(&mut a, &mut b, &mut s);
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFinite("solve_cauchy"));
            }
            y[j as usize] = a;
            yp[j as usize] = b;
            ls[j as usize] = s;
            i = j;
        }
    }

    Ok(CauchySolution {
        grid: *grid,
        y,
        y_prime: yp,
        log_scale: ls,
        energy_shift: energy,
        anchor: (x0, y0, y0p),
        rescaled,
        system: system.clone(),
        origin: Origin::Integrated,
    })
}

/// F-type solution: F(X−) = 0, F'(X−) = 1.
pub fn left_anchored<T: Real>(system: &System<T>, energy: T, grid: &GridSpec<T>) -> Result<CauchySolution<T>> {
    solve_cauchy(system, energy, grid.x_minus, T::zero(), T::one(), grid)
}

/// G-type solution: G(X+) = 0, G'(X+) = −1.
pub fn right_anchored<T: Real>(system: &System<T>, energy: T, grid: &GridSpec<T>) -> Result<CauchySolution<T>> {
    solve_cauchy(system, energy, grid.x_plus, T::zero(), -T::one(), grid)
}

/// Mantissa Wronskian (scale e^{log_scale} stripped) and the pole measure
/// |f||g'| + |f'||g| of the same mantissas.
fn scaled_wronskian<T: Real>(f: &ScaledPoint<T>, g: &ScaledPoint<T>) -> (T, T, T) {
    let w = f.y * g.y_prime - f.y_prime * g.y;
    let size = (f.y * g.y_prime).abs() + (f.y_prime * g.y).abs();
    (w, size, f.log_scale + g.log_scale)
}

/// W(f, g)(x) = f(x) g'(x) − f'(x) g(x).
pub fn wronskian<T: Real>(f: &CauchySolution<T>, g: &CauchySolution<T>, x: T) -> T {
    let (w, _, s) = scaled_wronskian(&f.eval(x), &g.eval(x));
    w * s.exp()
}

/// Smallest |W|/(|f||g'| + |f'||g|) over the grid nodes. The measure
/// degenerates where both solutions have a stationary point, so a single
/// evaluation point is not enough.
fn pole_ratio<T: Real>(f: &CauchySolution<T>, g: &CauchySolution<T>) -> (T, T, T) {
    let mut best = (T::infinity(), T::zero(), T::zero());
    for i in 0..f.grid.n_points {
        let (w, size, _) = scaled_wronskian(&f.at_node(i), &g.at_node(i));
        if size > T::zero() && w.abs() / size < best.0 {
            best = (w.abs() / size, w, size);
        }
    }
    best
}

fn check_pole<T: Real>(f: &CauchySolution<T>, g: &CauchySolution<T>) -> Result<()> {
    let (ratio, w, size) = pole_ratio(f, g);
    if !(ratio >= c::<T>(POLE_THRESHOLD)) {
        return Err(Error::Pole {
            energy: to_f64(f.energy_shift),
            wronskian: to_f64(w.abs()),
            threshold: to_f64(c::<T>(POLE_THRESHOLD) * size),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenValue<T> {
    pub x_a: T,
    pub x_b: T,
    pub energy: T,
    pub value: T,
}

/// F₁ and G₃ at one energy; evaluates the resolvent kernel at many point
/// pairs without re-integrating.
#[derive(Debug, Clone)]
pub struct GreenSolver<T> {
    pub f1: CauchySolution<T>,
    pub g3: CauchySolution<T>,
}

impl<T: Real> GreenSolver<T> {
    /// Fails with [`Error::Pole`] when E sits on a negated Dirichlet eigenvalue.
    pub fn new(system: &System<T>, energy: T, grid: &GridSpec<T>) -> Result<Self> {
        let f1 = left_anchored(system, energy, grid)?;
        let g3 = right_anchored(system, energy, grid)?;
        check_pole(&f1, &g3)?;
        Ok(Self { f1, g3 })
    }

    pub fn energy(&self) -> T {
        self.f1.energy_shift
    }

    /// ρ̃(x_a, x_b, E) = −(2M/ħ²) F₁(x_<) G₃(x_>) / W(F₁, G₃).
    pub fn green(&self, x_a: T, x_b: T) -> Result<GreenValue<T>> {
        let grid = &self.f1.grid;
        if !grid.contains(x_a) || !grid.contains(x_b) {
            return Err(Error::InvalidParameter(format!("points ({x_a}, {x_b}) outside the box")));
        }
        let (lo, hi) = if x_a <= x_b { (x_a, x_b) } else { (x_b, x_a) };
        let f_lo = self.f1.eval(lo);
        let g_lo = self.g3.eval(lo);
        let g_hi = if hi == lo { g_lo } else { self.g3.eval(hi) };
        let (w, _, _) = scaled_wronskian(&f_lo, &g_lo);
        let k = self.f1.system.params.two_m_over_hbar2();
        let value = -k * f_lo.y * g_hi.y / w * (g_hi.log_scale - g_lo.log_scale).exp();
        if !value.is_finite() {
            return Err(Error::NonFinite("green_function"));
        }
        Ok(GreenValue {
            x_a,
            x_b,
            energy: self.energy(),
            value,
        })
    }
}

/// Resolvent kernel ρ̃(x_a, x_b, E) with Dirichlet walls at the box ends.
pub fn green_function<T: Real>(
    system: &System<T>,
    energy: T,
    x_a: T,
    x_b: T,
    grid: &GridSpec<T>,
) -> Result<GreenValue<T>> {
    GreenSolver::new(system, energy, grid)?.green(x_a, x_b)
}

fn composed_point<T: Real>(f1: &CauchySolution<T>, g3: &CauchySolution<T>, x_b: T, x: T) -> ScaledPoint<T> {
    let fb = f1.eval(x_b);
    let gb = g3.eval(x_b);
    let fx = f1.eval(x);
    let gx = g3.eval(x);
    let (w, _, sw) = scaled_wronskian(&fb, &gb);
    // both products carry scales; bring them to a common one
    let s1 = fx.log_scale + gb.log_scale;
    let s2 = fb.log_scale + gx.log_scale;
    let s = s1.max(s2);
    let e1 = (s1 - s).exp();
    let e2 = (s2 - s).exp();
    ScaledPoint {
        y: (fx.y * gb.y * e1 - fb.y * gx.y * e2) / w,
        y_prime: (fx.y_prime * gb.y * e1 - fb.y * gx.y_prime * e2) / w,
        log_scale: s - sw,
    }
}

/// G₂(x) = [F₁(x) G₃(x_b) − F₁(x_b) G₃(x)] / W(F₁, G₃): the solution with
/// G₂(x_b) = 0 and G₂'(x_b) = −1.
pub fn compose_solution<T: Real>(
    f1: &CauchySolution<T>,
    g3: &CauchySolution<T>,
    x_b: T,
) -> Result<CauchySolution<T>> {
    if f1.grid != g3.grid || f1.energy_shift != g3.energy_shift {
        return Err(Error::InvalidParameter(
            "solutions must share grid and energy shift".into(),
        ));
    }
    if !f1.grid.contains(x_b) {
        return Err(Error::InvalidParameter(format!("x_b = {x_b} outside the box")));
    }
    check_pole(f1, g3)?;
    let n = f1.grid.n_points;
    let mut y = Vec::with_capacity(n);
    let mut yp = Vec::with_capacity(n);
    let mut ls = Vec::with_capacity(n);
    for i in 0..n {
        let p = composed_point(f1, g3, x_b, f1.grid.node(i));
        y.push(p.y);
        yp.push(p.y_prime);
        ls.push(p.log_scale);
    }
    Ok(CauchySolution {
        grid: f1.grid,
        y,
        y_prime: yp,
        log_scale: ls,
        energy_shift: f1.energy_shift,
        anchor: (x_b, T::zero(), -T::one()),
        rescaled: f1.rescaled || g3.rescaled,
        system: f1.system.clone(),
        origin: Origin::Composed {
            f1: Box::new(f1.clone()),
            g3: Box::new(g3.clone()),
            x_b,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{discretize, eigendecompose};
    use crate::special::gamma;
    use approx::assert_relative_eq;

    fn free_grid(l: f64, n: usize) -> GridSpec<f64> {
        GridSpec::new(-l, l, n).unwrap()
    }

    /// ρ̃(0, 0, E) of the unit oscillator on the whole line.
    fn oscillator_origin(e: f64) -> f64 {
        gamma((2.0 * e + 1.0) / 4.0) / (2.0 * gamma((2.0 * e + 3.0) / 4.0))
    }

    #[test]
    fn free_anchored_solutions_are_sinh() {
        let g = free_grid(10.0, 2001);
        let sys = System::free();
        let f = left_anchored(&sys, 0.5, &g).unwrap();
        let gg = right_anchored(&sys, 0.5, &g).unwrap();
        assert_eq!(f.y[0], 0.0);
        assert_eq!(f.y_prime[0], 1.0);
        assert_eq!(gg.y[2000], 0.0);
        assert_eq!(gg.y_prime[2000], -1.0);
        assert_relative_eq!(f.value(-9.0), 1f64.sinh(), max_relative = 1e-9);
        assert_relative_eq!(gg.value(9.0), 1f64.sinh(), max_relative = 1e-9);
        assert_relative_eq!(f.value(-9.0), 1.175201, max_relative = 1e-6);
    }

    #[test]
    fn anchors_reproduced_off_grid() {
        let g = free_grid(3.0, 61);
        let sys = System::harmonic(1.0);
        let s = solve_cauchy(&sys, 1.0, 0.123, 0.7, -0.2, &g).unwrap();
        let p = s.eval(0.123);
        assert_relative_eq!(p.value(), 0.7, max_relative = 1e-10);
        assert_relative_eq!(p.derivative(), -0.2, max_relative = 1e-9);
        assert!(solve_cauchy(&sys, 1.0, 3.5, 0.0, 1.0, &g).is_err());
    }

    #[test]
    fn wronskian_free_box_of_length_two() {
        let g = GridSpec::new(-1.0, 1.0, 401).unwrap();
        let sys = System::free();
        let f = left_anchored(&sys, 0.5, &g).unwrap();
        let gg = right_anchored(&sys, 0.5, &g).unwrap();
        for x in [-1.0, -0.3, 0.0, 0.77, 1.0] {
            assert_relative_eq!(wronskian(&f, &gg, x), -(2f64.sinh()), max_relative = 1e-9);
            assert_eq!(wronskian(&f, &gg, x), -wronskian(&gg, &f, x));
        }
    }

    #[test]
    fn wronskian_constant_for_oscillator() {
        let g = free_grid(8.0, 3201);
        let sys = System::harmonic(1.0);
        let f = left_anchored(&sys, 1.0, &g).unwrap();
        let gg = right_anchored(&sys, 1.0, &g).unwrap();
        let ws: Vec<f64> = (0..g.n_points)
            .map(|i| {
                let (w, _, s) = scaled_wronskian(&f.at_node(i), &gg.at_node(i));
                w * s.exp()
            })
            .collect();
        let mean = ws.iter().sum::<f64>() / ws.len() as f64;
        let var = ws.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / ws.len() as f64;
        assert!(var.sqrt() / mean.abs() <= 1e-9, "rel sd {}", var.sqrt() / mean.abs());
    }

    #[test]
    fn free_green_function_examples() {
        let g = free_grid(20.0, 8001);
        let sys = System::free();
        let d = green_function(&sys, 0.5, 0.0, 0.0, &g).unwrap();
        assert_relative_eq!(d.value, 1.0, max_relative = 1e-8);
        let o = green_function(&sys, 0.5, 0.0, 1.0, &g).unwrap();
        assert_relative_eq!(o.value, (-1f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn oscillator_green_function_closed_form() {
        let g = free_grid(12.0, 4801);
        let sys = System::harmonic(1.0);
        for e in [0.3, 1.0, 4.0] {
            let v = green_function(&sys, e, 0.0, 0.0, &g).unwrap().value;
            assert_relative_eq!(v, oscillator_origin(e), max_relative = 1e-8);
        }
    }

    #[test]
    fn green_symmetry() {
        let g = free_grid(8.0, 1601);
        let sys = System::new(
            crate::physics::Potential::DoubleWell {
                barrier: 2.0,
                minima_separation: 2.0,
            },
            Default::default(),
        )
        .unwrap();
        let solver = GreenSolver::new(&sys, 0.7, &g).unwrap();
        for (a, b) in [(0.3, -1.2), (0.05, 2.5), (-3.3, -3.1)] {
            let u = solver.green(a, b).unwrap().value;
            let v = solver.green(b, a).unwrap().value;
            assert!((u - v).abs() <= 1e-12 * u.abs());
        }
    }

    #[test]
    fn defining_property_discrete_delta() {
        let g = free_grid(10.0, 10001);
        let sys = System::harmonic(1.0);
        let e = 0.8;
        let solver = GreenSolver::new(&sys, e, &g).unwrap();
        let src = 5000;
        let xa = g.node(src);
        let col: Vec<f64> = (0..g.n_points).map(|i| solver.green(xa, g.node(i)).unwrap().value).collect();
        let h = g.spacing();
        let scale = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst: f64 = 0.0;
        let mut at_source = 0.0;
        for i in 1..g.n_points - 1 {
            let x = g.node(i);
            let r = -0.5 * (col[i + 1] - 2.0 * col[i] + col[i - 1]) / (h * h) + (sys.v(x) + e) * col[i];
            if i == src {
                at_source = r;
            } else {
                worst = worst.max(r.abs());
            }
        }
        assert!(worst / scale <= 1e-6, "off-source residual {}", worst / scale);
        assert_relative_eq!(at_source * h, 1.0, max_relative = 1e-4);
    }

    #[test]
    fn ode_residual_small() {
        let g = free_grid(3.0, 6001);
        let sys = System::harmonic(1.0);
        let s = left_anchored(&sys, 1.3, &g).unwrap();
        let vals = s.values();
        let h = g.spacing();
        let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 1..g.n_points - 1 {
            let ypp = (s.y_prime[i + 1] * s.log_scale[i + 1].exp() - s.y_prime[i - 1] * s.log_scale[i - 1].exp())
                / (2.0 * h);
            let r = ypp - 2.0 * (sys.v(g.node(i)) + 1.3) * vals[i];
            assert!(r.abs() <= 1e-4 * max, "node {i}: {r}");
        }
    }

    #[test]
    fn rescaling_keeps_green_function_finite() {
        let g = free_grid(400.0, 160001);
        let sys = System::free();
        let solver = GreenSolver::new(&sys, 2.0, &g).unwrap();
        assert!(solver.f1.rescaled && solver.g3.rescaled);
        let v = solver.green(0.0, 0.5).unwrap().value;
        let k = 2.0f64;
        assert_relative_eq!(v, (-k * 0.5).exp() / k, max_relative = 1e-8);
    }

    #[test]
    fn composed_g2_anchors_and_direct_solve() {
        let g = free_grid(10.0, 2001);
        let sys = System::free();
        let f1 = left_anchored(&sys, 0.5, &g).unwrap();
        let g3 = right_anchored(&sys, 0.5, &g).unwrap();
        for xb in [1.0, 0.4321] {
            let g2 = compose_solution(&f1, &g3, xb).unwrap();
            assert_eq!(g2.value(xb), 0.0);
            assert_relative_eq!(g2.derivative(xb), -1.0, max_relative = 1e-9);
            let direct = solve_cauchy(&sys, 0.5, xb, 0.0, -1.0, &g).unwrap();
            for x in [-5.0, -1.0, 0.0, 3.0] {
                let a = g2.value(x);
                let b = direct.value(x);
                assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "x={x}: {a} vs {b}");
            }
            // W(G₂, F₁) = F₁(x_b)
            for x in [-3.0, 0.2, 2.0] {
                assert_relative_eq!(wronskian(&g2, &f1, x), f1.value(xb), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn composed_f2_wronskian_identity() {
        // F₂ anchored at x_a: F₂(x_a) = 0, F₂'(x_a) = 1; W(G₃, F₂) = G₃(x_a)
        let g = free_grid(6.0, 2401);
        let sys = System::harmonic(1.0);
        let xa = -0.7;
        let g3 = right_anchored(&sys, 0.9, &g).unwrap();
        let f2 = solve_cauchy(&sys, 0.9, xa, 0.0, 1.0, &g).unwrap();
        for x in [-2.0, 0.0, 1.5] {
            assert_relative_eq!(wronskian(&g3, &f2, x), g3.value(xa), max_relative = 1e-9);
        }
    }

    #[test]
    fn endpoint_identity() {
        // F anchored at x1 evaluated at x2 equals G anchored at x2 evaluated at x1
        let g = free_grid(5.0, 2001);
        let sys = System::harmonic(1.3);
        let (x1, x2) = (-0.8, 1.1);
        let f = solve_cauchy(&sys, 0.6, x1, 0.0, 1.0, &g).unwrap();
        let gg = solve_cauchy(&sys, 0.6, x2, 0.0, -1.0, &g).unwrap();
        assert_relative_eq!(f.value(x2), gg.value(x1), max_relative = 1e-9);
    }

    #[test]
    fn pole_at_negated_eigenvalue() {
        let g = free_grid(8.0, 1601);
        let sys = System::harmonic(1.0);
        let w_of = |e: f64| {
            let f = left_anchored(&sys, e, &g).unwrap();
            let gg = right_anchored(&sys, e, &g).unwrap();
            wronskian(&f, &gg, 1.0)
        };
        // bisect the sign change of W around E = −1/2
        let (mut a, mut b) = (-0.6, -0.4);
        assert!(w_of(a).signum() != w_of(b).signum());
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if w_of(m).signum() == w_of(a).signum() {
                a = m;
            } else {
                b = m;
            }
        }
        let e_star = if w_of(a).abs() < w_of(b).abs() { a } else { b };
        assert!(matches!(
            green_function(&sys, e_star, 0.0, 0.0, &g),
            Err(Error::Pole { .. })
        ));
        let fd = eigendecompose(&discretize(&sys, &g), 1).unwrap();
        assert!((e_star + fd.energies[0]).abs() < 2.0 * g.spacing().powi(2));
        assert!(green_function(&sys, e_star + 1e-3, 0.0, 0.0, &g).is_ok());
    }

    #[test]
    fn mismatched_solutions_rejected() {
        let g = free_grid(3.0, 301);
        let sys = System::free();
        let f1 = left_anchored(&sys, 0.5, &g).unwrap();
        let g3 = right_anchored(&sys, 0.6, &g).unwrap();
        assert!(compose_solution(&f1, &g3, 0.0).is_err());
    }

    #[test]
    fn single_precision_green() {
        let g = GridSpec::<f32>::new(-10.0, 10.0, 2001).unwrap();
        let v = green_function(&System::free(), 0.5f32, 0.0, 0.0, &g).unwrap().value;
        assert_relative_eq!(v, 1.0f32, max_relative = 1e-4);
    }
}
