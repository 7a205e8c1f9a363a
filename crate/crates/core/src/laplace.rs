//! β ↔ E Laplace bridge: Gaver–Stehfest inversion on the real axis and a
//! forward log-β quadrature used as an independent check.

use rayon::prelude::*;

use crate::diagnostics::{Diagnosed, Warning};
use crate::error::{Error, Result};
use crate::physics::{GridSpec, System};
use crate::scalar::{c, cu, to_f64, Real};
use crate::sturm::green_function;

/// Default Gaver–Stehfest order; about as far as double precision allows.
pub const DEFAULT_ORDER: usize = 14;

/// A Laplace-domain function usable only strictly above its abscissa `e_min`.
pub trait LaplaceEvaluable<T>: Sync {
    fn e_min(&self) -> T;
    fn eval(&self, energy: T) -> Result<T>;
}

/// Closure adapter.
pub struct FnTransform<F, T> {
    pub f: F,
    pub e_min: T,
}

impl<T, F> LaplaceEvaluable<T> for FnTransform<F, T>
where
    T: Real,
    F: Fn(T) -> T + Sync,
{
    fn e_min(&self) -> T {
        self.e_min
    }

    fn eval(&self, energy: T) -> Result<T> {
        Ok((self.f)(energy))
    }
}

/// ρ̃(x_a, x_b, E) from the Sturm–Liouville solver. The abscissa is −min V on
/// the grid: the lowest Dirichlet level lies above min V.
pub struct GreenTransform<'a, T> {
    pub system: &'a System<T>,
    pub grid: &'a GridSpec<T>,
    pub x_a: T,
    pub x_b: T,
}

impl<T: Real> LaplaceEvaluable<T> for GreenTransform<'_, T> {
    fn e_min(&self) -> T {
        let v_min = self
            .grid
            .nodes()
            .into_iter()
            .map(|x| self.system.v(x))
            .fold(T::infinity(), T::min);
        -v_min
    }

    fn eval(&self, energy: T) -> Result<T> {
        Ok(green_function(self.system, energy, self.x_a, self.x_b, self.grid)?.value)
    }
}

/// Stehfest weights V_1..V_N for even N.
pub fn stehfest_weights(order: usize) -> Vec<f64> {
    let half = order / 2;
    let fact = |n: usize| (1..=n).fold(1.0f64, |a, k| a * k as f64);
    (1..=order)
        .map(|k| {
            let mut s = 0.0;
            for j in k.div_ceil(2)..=k.min(half) {
                s += (j as f64).powi(half as i32) * fact(2 * j)
                    / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
            }
            if (k + half) % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect()
}

/// f(β) ≈ (ln2/β) Σ_k V_k F(k ln2/β).
pub fn gaver_stehfest_invert<T: Real, F: LaplaceEvaluable<T> + ?Sized>(f: &F, beta: T, order: usize) -> Result<T> {
    if !(8..=16).contains(&order) || order % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "Gaver-Stehfest order must be an even number in 8..=16, got {order}"
        )));
    }
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let a = T::LN_2() / beta;
    let e_min = f.e_min();
    if a <= e_min {
        return Err(Error::Abscissa {
            node: to_f64(a),
            e_min: to_f64(e_min),
        });
    }
    let weights = stehfest_weights(order);
    let terms: Vec<T> = (1..=order)
        .into_par_iter()
        .map(|k| f.eval(cu::<T>(k) * a))
        .collect::<Result<_>>()?;
    let sum = terms
        .iter()
        .zip(&weights)
        .fold(T::zero(), |acc, (t, w)| acc + c::<T>(*w) * *t);
    Ok(a * sum)
}

/// `n` log-spaced β values in [b_min, b_max].
pub fn log_spaced<T: Real>(b_min: T, b_max: T, n: usize) -> Vec<T> {
    let (l0, l1) = (b_min.ln(), b_max.ln());
    (0..n)
        .map(|i| (l0 + (l1 - l0) * cu::<T>(i) / cu::<T>(n - 1)).exp())
        .collect()
}

/// ∫₀^∞ e^{−βE} ρ(β) dβ from samples (β_i, ρ_i) sorted by β.
///
/// Integrates β e^{−βE} ρ in u = ln β with non-uniform Simpson panels; the
/// [0, β_0] piece is taken as 2 β_0 ρ(β_0), exact for ρ ∝ β^{−1/2}. Warns when
/// the last integrand sample is above 1e-12 of the accumulated value.
pub fn forward_laplace<T: Real>(samples: &[(T, T)], energy: T) -> Result<Diagnosed<T>> {
    if samples.len() < 3 {
        return Err(Error::InvalidParameter("forward_laplace needs at least 3 samples".into()));
    }
    if samples.iter().any(|(b, _)| !(*b > T::zero())) || samples.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::InvalidParameter(
            "beta samples must be positive and strictly increasing".into(),
        ));
    }
    let u: Vec<T> = samples.iter().map(|(b, _)| b.ln()).collect();
    let g: Vec<T> = samples.iter().map(|(b, r)| *b * (-*b * energy).exp() * *r).collect();
    let mut total = simpson_nonuniform(&u, &g);
    let (b0, r0) = samples[0];
    total += c::<T>(2.0) * b0 * r0;

    let (bl, rl) = samples[samples.len() - 1];
    let tail = (-bl * energy).exp() * rl;
    let warning = (tail.abs() > c::<T>(1e-12) * total.abs()).then(|| Warning::Truncation {
        tail: to_f64(tail),
        accumulated: to_f64(total),
    });
    Ok(Diagnosed::with(total, warning))
}

/// Composite Simpson on arbitrary abscissae; a trailing odd interval gets the
/// three-point end correction.
fn simpson_nonuniform<T: Real>(x: &[T], f: &[T]) -> T {
    let n = x.len() - 1;
    let six = c::<T>(6.0);
    let two = c::<T>(2.0);
    let mut s = T::zero();
    let mut i = 0;
    while i + 2 <= n {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let hs = h0 + h1;
        s += hs / six
            * ((two - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] + (two - h0 / h1) * f[i + 2]);
        i += 2;
    }
    if n % 2 == 1 {
        let h0 = x[n - 1] - x[n - 2];
        let h1 = x[n] - x[n - 1];
        let alpha = (two * h1 * h1 + c::<T>(3.0) * h0 * h1) / (six * (h0 + h1));
        let beta = (h1 * h1 + c::<T>(3.0) * h0 * h1) / (six * h0);
        let eta = h1 * h1 * h1 / (six * h0 * (h0 + h1));
        s += alpha * f[n] + beta * f[n - 1] - eta * f[n - 2];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn mehler_diag(beta: f64) -> f64 {
        1.0 / (2.0 * PI * beta.sinh()).sqrt()
    }

    fn oscillator_origin(e: f64) -> f64 {
        gamma((2.0 * e + 1.0) / 4.0) / (2.0 * gamma((2.0 * e + 3.0) / 4.0))
    }

    fn transform<F: Fn(f64) -> f64 + Sync>(f: F) -> FnTransform<F, f64> {
        FnTransform { f, e_min: 0.0 }
    }

    #[test]
    fn weights_sum_to_zero() {
        for order in [8, 10, 12, 14, 16] {
            let w = stehfest_weights(order);
            let s: f64 = w.iter().sum();
            assert!(s.abs() < 1e-6 * w.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
        assert_eq!(stehfest_weights(8)[0], -1.0 / 3.0);
    }

    // Relative truncation errors of the order-14 sums evaluated in 50-digit
    // arithmetic; the f64 implementation must reproduce them.
    const GS14_EXP_AT_2: f64 = 7.511913975747982e-05;
    const GS14_LOCAL_TIME: f64 = -4.730919829392486e-4;
    const GS14_OSC_DIAG_AT_5: f64 = 3.723215825197357e-4;

    #[test]
    fn textbook_pairs() {
        let f = transform(|e| 1.0 / (e + 1.0));
        let r = gaver_stehfest_invert(&f, 2.0, 14).unwrap();
        assert_relative_eq!(r, (-2f64).exp() * (1.0 + GS14_EXP_AT_2), max_relative = 1e-8);
        assert_relative_eq!(r, 0.135335, max_relative = 1e-4);
        let f = transform(|e| 1.0 / (2.0 * e).sqrt());
        assert_relative_eq!(
            gaver_stehfest_invert(&f, 1.0, 14).unwrap(),
            1.0 / (2.0 * PI).sqrt(),
            max_relative = 1e-6
        );
        let f = transform(|e| (-(2.0 * e).sqrt()).exp());
        let expected = (-0.5f64).exp() / (2.0 * PI).sqrt();
        assert_relative_eq!(expected, 0.241971, max_relative = 1e-5);
        let r = gaver_stehfest_invert(&f, 1.0, 14).unwrap();
        assert_relative_eq!(r, expected * (1.0 + GS14_LOCAL_TIME), max_relative = 1e-8);
    }

    #[test]
    fn order_convergence_on_exponential() {
        let f = transform(|e| 1.0 / (e + 1.0));
        let errs: Vec<f64> = [8, 10, 12, 14]
            .iter()
            .map(|&o| (gaver_stehfest_invert(&f, 1.0, o).unwrap() - (-1f64).exp()).abs())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn rejects_bad_order_and_abscissa() {
        let f = transform(|e| 1.0 / e);
        assert!(gaver_stehfest_invert(&f, 1.0, 7).is_err());
        assert!(gaver_stehfest_invert(&f, 1.0, 18).is_err());
        assert!(gaver_stehfest_invert(&f, 0.0, 14).is_err());
        let shifted = FnTransform {
            f: |e: f64| 1.0 / (e - 2.0),
            e_min: 2.0,
        };
        assert!(matches!(
            gaver_stehfest_invert(&shifted, 1.0, 14),
            Err(Error::Abscissa { .. })
        ));
    }

    #[test]
    fn forward_examples() {
        let betas = log_spaced(1e-9f64, 60.0, 2001);
        let s: Vec<(f64, f64)> = betas.iter().map(|&b| (b, (-b).exp())).collect();
        let v = forward_laplace(&s, 1.0).unwrap();
        assert!(v.is_clean());
        assert_relative_eq!(v.value, 0.5, max_relative = 1e-8);

        let betas = log_spaced(1e-12, 200.0, 3001);
        let s: Vec<(f64, f64)> = betas.iter().map(|&b| (b, 1.0 / (2.0 * PI * b).sqrt())).collect();
        let v = forward_laplace(&s, 0.5).unwrap();
        assert_relative_eq!(v.value, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn forward_mehler_matches_green_function() {
        let betas = log_spaced(1e-12, 40.0, 3001);
        let s: Vec<(f64, f64)> = betas.iter().map(|&b| (b, mehler_diag(b))).collect();
        let v = forward_laplace(&s, 1.0).unwrap().value;
        assert_relative_eq!(v, oscillator_origin(1.0), max_relative = 1e-6);
        let g = GridSpec::new(-12.0, 12.0, 4801).unwrap();
        let green = green_function(&System::harmonic(1.0), 1.0, 0.0, 0.0, &g).unwrap().value;
        assert_relative_eq!(v, green, max_relative = 1e-6);
    }

    #[test]
    fn truncated_samples_warn() {
        let betas = log_spaced(1e-6f64, 5.0, 201);
        let s: Vec<(f64, f64)> = betas.iter().map(|&b| (b, (-b).exp())).collect();
        let v = forward_laplace(&s, 1.0).unwrap();
        assert!(matches!(v.warnings[0], Warning::Truncation { .. }));
    }

    #[test]
    fn round_trip_oscillator_diagonal() {
        let betas = log_spaced(1e-12, 60.0, 4001);
        let s: Vec<(f64, f64)> = betas.iter().map(|&b| (b, mehler_diag(b))).collect();
        let f = transform(|e| forward_laplace(&s, e).unwrap().value);
        for beta in [0.2, 0.5, 1.0, 2.0] {
            let r = gaver_stehfest_invert(&f, beta, 14).unwrap();
            assert_relative_eq!(r, mehler_diag(beta), max_relative = 1e-4);
        }
        // beyond β ≈ 3 the order-14 truncation error itself exceeds 1e-4
        let r = gaver_stehfest_invert(&f, 5.0, 14).unwrap();
        assert_relative_eq!(r / mehler_diag(5.0) - 1.0, GS14_OSC_DIAG_AT_5, max_relative = 1e-2);
    }

    #[test]
    fn green_inversion_gives_bloch_matrix() {
        let g = GridSpec::new(-12.0, 12.0, 4801).unwrap();
        let sys = System::harmonic(1.0);
        let t = GreenTransform {
            system: &sys,
            grid: &g,
            x_a: 0.0,
            x_b: 0.0,
        };
        assert_eq!(t.e_min(), -0.0);
        let r = gaver_stehfest_invert(&t, 1.0, 14).unwrap();
        assert_relative_eq!(r, mehler_diag(1.0), max_relative = 1e-5);
    }

    #[test]
    fn simpson_exact_on_quadratics() {
        let x = [0.0, 0.3, 0.5, 1.1, 1.2, 2.0];
        let f: Vec<f64> = x.iter().map(|t| 3.0 * t * t - t).collect();
        assert_relative_eq!(simpson_nonuniform(&x, &f), 8.0 - 2.0, max_relative = 1e-13);
        let f: Vec<f64> = x[..5].iter().map(|t| 3.0 * t * t - t).collect();
        assert_relative_eq!(simpson_nonuniform(&x[..5], &f), 1.728 - 0.72, max_relative = 1e-13);
    }
}
