//! Gauss–Legendre rules and small integration helpers.

use crate::scalar::{c, Real};

/// Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// n-point rule, exact for polynomials of degree 2n − 1.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Newton on P_n from the Tricomi initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = c(-x);
            nodes[n - 1 - i] = c(x);
            weights[i] = c(w);
            weights[n - 1 - i] = c(w);
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = c::<T>(0.5) * (b - a);
        let mid = c::<T>(0.5) * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `panels` equal panels of [a, b].
    pub fn integrate_composite<F: FnMut(T) -> T>(&self, a: T, b: T, panels: usize, mut f: F) -> T {
        let width = (b - a) / T::from_usize(panels).unwrap();
        (0..panels)
            .map(|k| {
                let lo = a + T::from_usize(k).unwrap() * width;
                self.integrate(lo, lo + width, &mut f)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite trapezoid sum of uniformly spaced samples.
pub fn trapezoid<T: Real>(values: &[T], h: T) -> T {
    match values.len() {
        0 | 1 => T::zero(),
        n => {
            let inner: T = values[1..n - 1].iter().copied().sum();
            h * (inner + c::<T>(0.5) * (values[0] + values[n - 1]))
        }
    }
}

/// Running integral of f on a uniform grid using the end-corrected trapezoid
/// rule, which needs f' at the nodes and is fourth-order accurate.
pub fn cumulative_corrected_trapezoid<T: Real>(f: &[T], df: &[T], h: T) -> Vec<T> {
    assert_eq!(f.len(), df.len());
    let mut out = Vec::with_capacity(f.len());
    let mut acc = T::zero();
    out.push(acc);
    let half = c::<T>(0.5);
    let twelfth = c::<T>(1.0 / 12.0);
    for i in 1..f.len() {
        acc += h * half * (f[i - 1] + f[i]) + h * h * twelfth * (df[i - 1] - df[i]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_exact_on_polynomials() {
        for n in [1usize, 2, 5, 16, 40] {
            let gl = GaussLegendre::<f64>::new(n);
            let w: f64 = gl.weights().iter().sum();
            assert_relative_eq!(w, 2.0, max_relative = 1e-14);
            let deg = 2 * n - 1;
            let integral = gl.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert_relative_eq!(integral, 1.0 / (deg as f64 + 1.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn composite_gaussian() {
        let gl = GaussLegendre::<f64>::new(20);
        let v = gl.integrate_composite(-10.0, 10.0, 8, |x| (-x * x / 2.0).exp());
        assert_relative_eq!(v, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn corrected_trapezoid_is_fourth_order() {
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let xs: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
            let f: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
            let cum = cumulative_corrected_trapezoid(&f, &f, h);
            (cum[n] - (1f64.exp() - 1.0)).abs()
        };
        let ratio = err(20) / err(40);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }
}
