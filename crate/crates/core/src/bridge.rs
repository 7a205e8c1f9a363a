//! Brownian-bridge Monte Carlo: exact bridge sampling, Feynman–Kac estimates
//! of the Bloch matrix, local-time profiles and local-time functionals.
//!
//! Every path draws from its own ChaCha8 stream keyed by (seed, path index),
//! and reductions run in path order, so results do not depend on the number
//! of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diagnostics::{Diagnosed, Warning};
use crate::error::{Error, Result};
use crate::physics::{BlochQuery, PhysicalParams, System};
use crate::scalar::{c, cu, to_f64, Real};

/// Relative standard error above which estimates carry a variance warning.
pub const VARIANCE_WARNING_LEVEL: f64 = 0.05;
/// Fraction of histogram mass in the top bin above which a warning is raised.
pub const TOP_BIN_WARNING_LEVEL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCConfig<T> {
    pub n_paths: usize,
    pub n_slices: usize,
    pub seed: u64,
    pub beta: T,
}

impl<T: Real> MCConfig<T> {
    pub fn new(n_paths: usize, n_slices: usize, seed: u64, beta: T) -> Result<Self> {
        let cfg = Self {
            n_paths,
            n_slices,
            seed,
            beta,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 1 {
            return Err(Error::InvalidParameter("n_paths must be >= 1".into()));
        }
        if self.n_slices < 2 {
            return Err(Error::InvalidParameter("n_slices must be >= 2".into()));
        }
        if !(self.beta > T::zero()) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    /// ε = βħ / n_slices.
    pub fn epsilon(&self, params: &PhysicalParams<T>) -> T {
        self.beta * params.hbar / cu::<T>(self.n_slices)
    }
}

/// Positions at τ_k = kε plus the exact bridge values at the slice
/// midpoints (k + ½)ε.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgePath<T> {
    pub times: Vec<T>,
    pub positions: Vec<T>,
    pub midpoints: Vec<T>,
}

fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Fills `half` (length 2n + 1) with a bridge on the half-slice lattice:
/// a free Wiener path of variance (ε/2)ħ/M per half step, pinned by the
/// linear correction.
fn fill_half_lattice<T: Real>(rng: &mut ChaCha8Rng, params: &PhysicalParams<T>, x_a: T, x_b: T, eps: T, half: &mut [T]) {
    let m = half.len() - 1;
    let sd = (c::<T>(0.5) * eps * params.hbar / params.mass).sqrt();
    let mut w = T::zero();
    half[0] = T::zero();
    for h in half.iter_mut().skip(1) {
        w += sd * T::sample_normal(rng);
        *h = w;
    }
    let end = w;
    let span = x_b - x_a;
    let mf = cu::<T>(m);
    for (j, h) in half.iter_mut().enumerate() {
        let f = cu::<T>(j) / mf;
        *h = x_a + (*h - f * end) + f * span;
    }
    half[0] = x_a;
    half[m] = x_b;
}

/// Exact Brownian bridge from x_a to x_b over βħ, deterministic in
/// (cfg.seed, path_index).
pub fn sample_bridge<T: Real>(
    params: &PhysicalParams<T>,
    x_a: T,
    x_b: T,
    cfg: &MCConfig<T>,
    path_index: u64,
) -> BridgePath<T> {
    let n = cfg.n_slices;
    let eps = cfg.epsilon(params);
    let mut half = vec![T::zero(); 2 * n + 1];
    let mut rng = path_rng(cfg.seed, 2 * path_index);
    fill_half_lattice(&mut rng, params, x_a, x_b, eps, &mut half);
    BridgePath {
        times: (0..=n).map(|k| cu::<T>(k) * eps).collect(),
        positions: half.iter().step_by(2).copied().collect(),
        midpoints: half.iter().skip(1).step_by(2).copied().collect(),
    }
}

/// Mean of a per-path quantity with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate<T> {
    pub mean: T,
    pub std_error: T,
    pub n_paths: usize,
    pub seed: u64,
}

/// Fixed-shape pairwise summation.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        return values.iter().fold(T::zero(), |a, v| a + *v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn estimate<T: Real>(samples: &[T], scale: T, seed: u64) -> Diagnosed<MCEstimate<T>> {
    let n = samples.len();
    let nf = cu::<T>(n);
    let mean = pairwise_sum(samples) / nf;
    let std_error = if n > 1 {
        let dev: Vec<T> = samples.iter().map(|s| (*s - mean) * (*s - mean)).collect();
        (pairwise_sum(&dev) / cu::<T>(n - 1)).sqrt() / nf.sqrt()
    } else {
        T::zero()
    };
    let est = MCEstimate {
        mean: scale * mean,
        std_error: scale.abs() * std_error,
        n_paths: n,
        seed,
    };
    let rel = est.std_error / est.mean.abs();
    let warning = (rel > c::<T>(VARIANCE_WARNING_LEVEL)).then(|| Warning::Variance {
        relative_error: to_f64(rel),
    });
    Diagnosed::with(est, warning)
}

/// √(M/(2πβħ²)) exp(−M(x_b − x_a)²/(2βħ²)).
pub fn free_kernel<T: Real>(params: &PhysicalParams<T>, x_a: T, x_b: T, beta: T) -> T {
    let s = params.mass / (beta * params.hbar * params.hbar);
    let d = x_b - x_a;
    (s / (c::<T>(2.0) * T::PI())).sqrt() * (-c::<T>(0.5) * s * d * d).exp()
}

/// Midpoint-rule Euclidean action (1/ħ) Σ_k ε V(x((k + ½)ε)).
fn midpoint_action<T: Real>(system: &System<T>, midpoints: impl Iterator<Item = T>, eps: T) -> T {
    let sum = midpoints.fold(T::zero(), |a, m| a + system.v(m));
    eps * sum / system.params.hbar
}

fn check_query<T: Real>(q: &BlochQuery<T>, cfg: &MCConfig<T>) -> Result<()> {
    cfg.validate()?;
    if q.beta != cfg.beta {
        return Err(Error::InvalidParameter(format!(
            "query beta {} differs from Monte Carlo beta {}",
            q.beta, cfg.beta
        )));
    }
    Ok(())
}

/// ρ(x_a, x_b, β) ≈ free kernel × E[exp(−(1/ħ) Σ ε V(midpoints))] over exact
/// bridges.
pub fn feynman_kac<T: Real>(
    system: &System<T>,
    q: &BlochQuery<T>,
    cfg: &MCConfig<T>,
) -> Result<Diagnosed<MCEstimate<T>>> {
    check_query(q, cfg)?;
    let params = system.params;
    let eps = cfg.epsilon(&params);
    let n = cfg.n_slices;
    let weights: Vec<T> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map_init(
            || vec![T::zero(); 2 * n + 1],
            |half, i| {
                let mut rng = path_rng(cfg.seed, 2 * i);
                fill_half_lattice(&mut rng, &params, q.x_a, q.x_b, eps, half);
                (-midpoint_action(system, half.iter().skip(1).step_by(2).copied(), eps)).exp()
            },
        )
        .collect();
    Ok(estimate(&weights, free_kernel(&params, q.x_a, q.x_b, q.beta), cfg.seed))
}

/// Occupation-time histogram of one path with left-point slice counting:
/// bin j = [jw, (j+1)w) receives ε per slice start x_k, k < n, inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeProfile<T> {
    pub bin_edges: Vec<T>,
    pub values: Vec<T>,
    pub counts: Vec<u64>,
    pub epsilon: T,
    pub bin_width: T,
}

impl<T: Real> LocalTimeProfile<T> {
    /// ∫ L dX by counting: (Σ counts)·ε. Equals βħ bit-exactly whenever
    /// n_slices is a power of two.
    pub fn integral(&self) -> T {
        cu::<T>(self.counts.iter().sum::<u64>() as usize) * self.epsilon
    }

    /// Σ values_j · (edge_{j+1} − edge_j) in floating point.
    pub fn riemann_integral(&self) -> T {
        self.values
            .iter()
            .zip(self.bin_edges.windows(2))
            .fold(T::zero(), |a, (v, e)| a + *v * (e[1] - e[0]))
    }

    pub fn centers(&self) -> Vec<T> {
        self.bin_edges
            .windows(2)
            .map(|e| c::<T>(0.5) * (e[0] + e[1]))
            .collect()
    }

    /// L at x (zero outside the support).
    pub fn value_at(&self, x: T) -> T {
        let first = self.bin_edges[0];
        if x < first {
            return T::zero();
        }
        let j = ((x - first) / self.bin_width).floor().to_usize().unwrap_or(usize::MAX);
        self.values.get(j).copied().unwrap_or(T::zero())
    }
}

pub fn local_time_profile<T: Real>(path: &BridgePath<T>, bin_width: T) -> Result<LocalTimeProfile<T>> {
    if !(bin_width > T::zero()) || !bin_width.is_finite() {
        return Err(Error::InvalidParameter(format!("bin width must be positive, got {bin_width}")));
    }
    let n = path.positions.len() - 1;
    let eps = path.times[1] - path.times[0];
    Ok(profile_from_starts(&path.positions[..n], eps, bin_width))
}

fn profile_from_starts<T: Real>(starts: &[T], eps: T, w: T) -> LocalTimeProfile<T> {
    let bin = |x: T| (x / w).floor().to_i64().expect("bin index in range");
    let (lo, hi) = starts
        .iter()
        .fold((i64::MAX, i64::MIN), |(lo, hi), x| (lo.min(bin(*x)), hi.max(bin(*x))));
    let nb = (hi - lo + 1) as usize;
    let mut counts = vec![0u64; nb];
    for x in starts {
        counts[(bin(*x) - lo) as usize] += 1;
    }
    let bin_edges = (0..=nb).map(|j| c::<T>((lo + j as i64) as f64) * w).collect();
    let values = counts.iter().map(|k| cu::<T>(*k as usize) * eps / w).collect();
    LocalTimeProfile {
        bin_edges,
        values,
        counts,
        epsilon: eps,
        bin_width: w,
    }
}

/// ∫ L(X) V(X) dX = Σ_j counts_j ε V(center_j).
pub fn potential_via_localtime<T: Real>(profile: &LocalTimeProfile<T>, potential: impl Fn(T) -> T) -> T {
    profile
        .counts
        .iter()
        .zip(profile.centers())
        .fold(T::zero(), |a, (k, x)| a + cu::<T>(*k as usize) * profile.epsilon * potential(x))
}

/// Time-domain left-point sum Σ_{k<n} ε V(x_k).
pub fn potential_time_sum<T: Real>(path: &BridgePath<T>, potential: impl Fn(T) -> T) -> T {
    let n = path.positions.len() - 1;
    let eps = path.times[1] - path.times[0];
    path.positions[..n].iter().fold(T::zero(), |a, x| a + eps * potential(*x))
}

/// Per-slice exact local time at `x` of a bridge segment from a to b lasting
/// `duration`, with diffusion constant σ² (variance per unit time), drawn by
/// inverting P(L > ℓ) = exp(−[(|a|+|b|+σ²ℓ)² − (a−b)²]/(2σ²t)), a, b
/// relative to x.
pub fn segment_local_time<T: Real>(a: T, b: T, duration: T, sigma2: T, u: T) -> T {
    let d = a - b;
    let r = (d * d - c::<T>(2.0) * sigma2 * duration * u.ln()).sqrt();
    ((r - a.abs() - b.abs()) / sigma2).max(T::zero())
}

/// Exactly distributed local time at `x` of the bridge through the given
/// half-lattice skeleton (spacing ε/2), one uniform per segment.
fn exact_local_time<T: Real>(
    half: &[T],
    x: T,
    eps: T,
    sigma2: T,
    rng: &mut ChaCha8Rng,
) -> T {
    let dt = c::<T>(0.5) * eps;
    let mut total = T::zero();
    for w in half.windows(2) {
        let u = T::sample_open01(rng);
        total += segment_local_time(w[0] - x, w[1] - x, dt, sigma2, u);
    }
    total
}

/// A functional of the local-time field. `probes` lists points where the
/// exactly sampled local time is wanted; `eval` receives those values in
/// the same order together with the binned profile.
pub trait LocalTimeFunctional<T>: Sync {
    fn probes(&self) -> Vec<T> {
        Vec::new()
    }

    fn eval(&self, profile: &LocalTimeProfile<T>, probe_values: &[T]) -> T;
}

/// F ≡ 1.
pub struct Unit;

impl<T: Real> LocalTimeFunctional<T> for Unit {
    fn eval(&self, _: &LocalTimeProfile<T>, _: &[T]) -> T {
        T::one()
    }
}

/// F[L] = ∫ L V dX.
pub struct PotentialEnergy<'a, T>(pub &'a System<T>);

impl<T: Real> LocalTimeFunctional<T> for PotentialEnergy<'_, T> {
    fn eval(&self, profile: &LocalTimeProfile<T>, _: &[T]) -> T {
        potential_via_localtime(profile, |x| self.0.v(x))
    }
}

/// Indicator of L^X ∈ [lo, hi) with L^X sampled exactly.
pub struct LocalTimeWindow<T> {
    pub x: T,
    pub lo: T,
    pub hi: T,
}

impl<T: Real> LocalTimeFunctional<T> for LocalTimeWindow<T> {
    fn probes(&self) -> Vec<T> {
        vec![self.x]
    }

    fn eval(&self, _: &LocalTimeProfile<T>, probe_values: &[T]) -> T {
        let l = probe_values[0];
        if l >= self.lo && l < self.hi {
            T::one()
        } else {
            T::zero()
        }
    }
}

struct PathRecord<T> {
    weight: T,
    value: T,
}

/// Free kernel × mean of F[L]·exp(−(1/ħ) Σ ε V(midpoints)). The weight is
/// the same slice action as in [`feynman_kac`], so F ≡ 1 reproduces it bit
/// for bit.
pub fn functional_expectation<T: Real, F: LocalTimeFunctional<T>>(
    functional: &F,
    system: &System<T>,
    q: &BlochQuery<T>,
    cfg: &MCConfig<T>,
    bin_width: T,
) -> Result<Diagnosed<MCEstimate<T>>> {
    check_query(q, cfg)?;
    if !(bin_width > T::zero()) {
        return Err(Error::InvalidParameter(format!("bin width must be positive, got {bin_width}")));
    }
    let params = system.params;
    let eps = cfg.epsilon(&params);
    let sigma2 = params.hbar / params.mass;
    let n = cfg.n_slices;
    let probes = functional.probes();
    let records: Vec<PathRecord<T>> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map_init(
            || (vec![T::zero(); 2 * n + 1], Vec::with_capacity(probes.len())),
            |(half, probe_values), i| {
                let mut rng = path_rng(cfg.seed, 2 * i);
                fill_half_lattice(&mut rng, &params, q.x_a, q.x_b, eps, half);
                let weight = (-midpoint_action(system, half.iter().skip(1).step_by(2).copied(), eps)).exp();
                let starts: Vec<T> = half.iter().step_by(2).take(n).copied().collect();
                let profile = profile_from_starts(&starts, eps, bin_width);
                probe_values.clear();
                if !probes.is_empty() {
                    let mut lrng = path_rng(cfg.seed, 2 * i + 1);
                    for x in &probes {
                        probe_values.push(exact_local_time(half, *x, eps, sigma2, &mut lrng));
                    }
                }
                PathRecord {
                    weight,
                    value: functional.eval(&profile, probe_values),
                }
            },
        )
        .collect();
    let samples: Vec<T> = records.iter().map(|r| r.value * r.weight).collect();
    Ok(estimate(&samples, free_kernel(&params, q.x_a, q.x_b, q.beta), cfg.seed))
}

/// How the local time at the measurement point is obtained per path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalTimeEstimator<T> {
    /// Exact conditional sampling of every bridge segment.
    Exact,
    /// Slice counting in the bin [X − w/2, X + w/2).
    Binned { width: T },
}

/// Layout of a local-time histogram: `n_bins` bins of width `bin_width`
/// starting at L = 0; larger samples are clamped into the top bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec<T> {
    pub bin_width: T,
    pub n_bins: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeHistogram<T> {
    pub bin_edges: Vec<T>,
    /// Estimates p(L; β): weighted counts × free kernel / (N · bin width).
    pub joint: Vec<T>,
    /// Normalized conditional density given the bridge end points.
    pub conditional: Vec<T>,
    /// Per-path local times and Feynman–Kac weights in path order.
    pub samples: Vec<T>,
    pub weights: Vec<T>,
    /// ρ(x_a, x_b, β) from the same paths.
    pub rho: MCEstimate<T>,
}

impl<T: Real> LocalTimeHistogram<T> {
    /// sup |F_n − F| of the weighted empirical CDF of the samples.
    pub fn ks_statistic(&self, cdf: impl Fn(T) -> T) -> T {
        ks_statistic(&self.samples, &self.weights, cdf)
    }
}

/// Weighted Kolmogorov–Smirnov distance.
pub fn ks_statistic<T: Real>(samples: &[T], weights: &[T], cdf: impl Fn(T) -> T) -> T {
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&i, &j| samples[i].partial_cmp(&samples[j]).expect("finite samples"));
    let total = pairwise_sum(weights);
    let mut acc = T::zero();
    let mut d = T::zero();
    let mut k = 0;
    while k < order.len() {
        let x = samples[order[k]];
        let f = cdf(x);
        let before = acc / total;
        // ties share one step
        while k < order.len() && samples[order[k]] == x {
            acc += weights[order[k]];
            k += 1;
        }
        let after = acc / total;
        d = d.max((f - before).abs()).max((after - f).abs());
    }
    d
}

/// Histogram of the local time at X over bridges x_a → x_b.
#[allow(clippy::too_many_arguments)]
pub fn onepoint_histogram<T: Real>(
    system: &System<T>,
    x: T,
    x_a: T,
    x_b: T,
    cfg: &MCConfig<T>,
    layout: &HistogramSpec<T>,
    estimator: LocalTimeEstimator<T>,
) -> Result<Diagnosed<LocalTimeHistogram<T>>> {
    cfg.validate()?;
    if !(layout.bin_width > T::zero()) || layout.n_bins == 0 {
        return Err(Error::InvalidParameter("histogram needs a positive bin width and >= 1 bin".into()));
    }
    if let LocalTimeEstimator::Binned { width } = estimator {
        if !(width > T::zero()) {
            return Err(Error::InvalidParameter("binned estimator needs a positive width".into()));
        }
    }
    let params = system.params;
    let eps = cfg.epsilon(&params);
    let sigma2 = params.hbar / params.mass;
    let n = cfg.n_slices;
    let pairs: Vec<(T, T)> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map_init(
            || vec![T::zero(); 2 * n + 1],
            |half, i| {
                let mut rng = path_rng(cfg.seed, 2 * i);
                fill_half_lattice(&mut rng, &params, x_a, x_b, eps, half);
                let weight = (-midpoint_action(system, half.iter().skip(1).step_by(2).copied(), eps)).exp();
                let l = match estimator {
                    LocalTimeEstimator::Exact => {
                        let mut lrng = path_rng(cfg.seed, 2 * i + 1);
                        exact_local_time(half, x, eps, sigma2, &mut lrng)
                    }
                    LocalTimeEstimator::Binned { width } => {
                        let lo = x - c::<T>(0.5) * width;
                        let hi = x + c::<T>(0.5) * width;
                        let count = half
                            .iter()
                            .step_by(2)
                            .take(n)
                            .filter(|p| **p >= lo && **p < hi)
                            .count();
                        cu::<T>(count) * eps / width
                    }
                };
                (l, weight)
            },
        )
        .collect();
    let (samples, weights): (Vec<T>, Vec<T>) = pairs.into_iter().unzip();

    let rho = estimate(&weights, free_kernel(&params, x_a, x_b, cfg.beta), cfg.seed);
    let nb = layout.n_bins;
    let w = layout.bin_width;
    let mut binned = vec![T::zero(); nb];
    for (l, wt) in samples.iter().zip(&weights) {
        let j = (*l / w).floor().to_usize().unwrap_or(nb - 1).min(nb - 1);
        binned[j] += *wt;
    }
    let total = pairwise_sum(&weights);
    let kernel = free_kernel(&params, x_a, x_b, cfg.beta);
    let nf = cu::<T>(cfg.n_paths);
    let conditional = binned.iter().map(|b| *b / (total * w)).collect();
    let joint = binned.iter().map(|b| kernel * *b / (nf * w)).collect();
    let top = binned[nb - 1] / total;
    let mut warnings = rho.warnings;
    if top > c::<T>(TOP_BIN_WARNING_LEVEL) {
        let warning = Warning::Binning {
            top_bin_fraction: to_f64(top),
        };
        log::warn!("{warning}");
        warnings.push(warning);
    }
    Ok(Diagnosed {
        value: LocalTimeHistogram {
            bin_edges: (0..=nb).map(|j| cu::<T>(j) * w).collect(),
            joint,
            conditional,
            samples,
            weights,
            rho: rho.value,
        },
        warnings,
    })
}
