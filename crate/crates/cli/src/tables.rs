//! Tables behind the `localtime-dist`, `asymptotics`, `mc` and `bench`
//! subcommands.

use std::time::Instant;

use ltk_core::asymptotics::{ground_state, high_temperature_leading, low_temperature_leading};
use ltk_core::bridge::{
    feynman_kac, local_time_profile, onepoint_histogram, sample_bridge, HistogramSpec, LocalTimeEstimator,
    MCConfig,
};
use ltk_core::laplace::{gaver_stehfest_invert, GreenTransform};
use ltk_core::physics::{BlochQuery, System};
use ltk_core::radial::{
    localtime_conditional_density, localtime_joint_density_free, localtime_onepoint_density, LocalTimeDensityQuery,
};
use ltk_core::spectral::{bloch_spectral, discretize, eigendecompose};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, fmt_opt, Csv};
use crate::run::{auto_state_count, compute_rho, McSection, Method, QueryConfig, OneOrMany, RunConfig};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeRow {
    pub local_time: f64,
    pub p_joint: f64,
    pub p_conditional: f64,
    pub p_mc: Option<f64>,
    pub mc_err: Option<f64>,
}

/// Resolved local-time table settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocaltimeSetup {
    pub x: f64,
    pub beta: f64,
    pub l_max: f64,
    pub n_points: usize,
    pub bin_width: f64,
}

pub fn localtime_setup(cfg: &RunConfig, system: &System<f64>) -> CliResult<LocaltimeSetup> {
    let sec = cfg.localtime.unwrap_or_default();
    let first = |f: fn(&QueryConfig) -> &OneOrMany| cfg.query.as_ref().and_then(|q| f(q).values().first().copied());
    let x = sec.x.or_else(|| first(|q| &q.x_a)).unwrap_or(0.0);
    let beta = sec.beta.or_else(|| first(|q| &q.beta)).unwrap_or(1.0);
    if !(beta > 0.0) {
        return Err(CliError::Config(format!("beta must be positive, got {beta}")));
    }
    let p = system.params;
    let l_max = sec.l_max.unwrap_or(8.0 * (beta * p.mass).sqrt() / p.hbar);
    let n_points = sec.n_points.unwrap_or(401);
    let bin_width = sec.bin_width.unwrap_or(l_max / 160.0);
    if !(l_max > 0.0) || n_points < 2 || !(bin_width > 0.0) {
        return Err(CliError::Config("localtime needs l_max > 0, n_points >= 2, bin_width > 0".into()));
    }
    Ok(LocaltimeSetup {
        x,
        beta,
        l_max,
        n_points,
        bin_width,
    })
}

/// p(L; β), its conditional normalization by ρ(X, X, β), and optionally the
/// Monte Carlo histogram with per-bin standard errors.
pub fn localtime_dist(cfg: &RunConfig) -> CliResult<Vec<LocalTimeRow>> {
    let system = cfg.system()?;
    let s = localtime_setup(cfg, &system)?;
    let ls: Vec<f64> = (0..s.n_points)
        .map(|i| s.l_max * i as f64 / (s.n_points - 1) as f64)
        .collect();
    let (joint, conditional): (Vec<f64>, Vec<f64>) = if system.potential.is_free() {
        ls.iter()
            .map(|l| {
                (
                    localtime_joint_density_free(&system.params, s.beta, *l),
                    localtime_conditional_density(&system.params, s.beta, *l),
                )
            })
            .unzip()
    } else {
        let grid = cfg.grid_for(&system, s.beta, &[s.x])?;
        let order = cfg.numerics.order();
        let rho = gaver_stehfest_invert(
            &GreenTransform {
                system: &system,
                grid: &grid,
                x_a: s.x,
                x_b: s.x,
            },
            s.beta,
            order,
        )?;
        let joint = ls
            .par_iter()
            .map(|l| localtime_onepoint_density(&system, &LocalTimeDensityQuery::new(*l, s.beta, s.x)?, &grid, order))
            .collect::<Result<Vec<f64>, _>>()?;
        let conditional = joint.iter().map(|p| p / rho).collect();
        (joint, conditional)
    };

    let mc_columns = match cfg.mc {
        Some(mc) => Some(mc_histogram(&system, &s, mc, &ls)?),
        None => None,
    };
    Ok(ls
        .iter()
        .enumerate()
        .map(|(i, l)| LocalTimeRow {
            local_time: *l,
            p_joint: joint[i],
            p_conditional: conditional[i],
            p_mc: mc_columns.as_ref().map(|c| c[i].0),
            mc_err: mc_columns.as_ref().map(|c| c[i].1),
        })
        .collect())
}

fn mc_histogram(system: &System<f64>, s: &LocaltimeSetup, mc: McSection, ls: &[f64]) -> CliResult<Vec<(f64, f64)>> {
    let cfg = MCConfig::new(mc.paths, mc.slices, mc.seed, s.beta)?;
    let n_bins = (s.l_max / s.bin_width).ceil() as usize + 1;
    let layout = HistogramSpec {
        bin_width: s.bin_width,
        n_bins,
    };
    let h = onepoint_histogram(system, s.x, s.x, s.x, &cfg, &layout, LocalTimeEstimator::Exact)?.value;
    // per-bin standard error of the joint-density estimator
    let n = h.samples.len() as f64;
    let kernel = h.rho.mean / (h.weights.iter().sum::<f64>() / n);
    let mut sum2 = vec![0.0; n_bins];
    for (l, w) in h.samples.iter().zip(&h.weights) {
        let j = ((l / s.bin_width).floor() as usize).min(n_bins - 1);
        sum2[j] += w * w;
    }
    let scale = kernel / s.bin_width;
    let err: Vec<f64> = sum2
        .iter()
        .zip(&h.joint)
        .map(|(s2, p)| {
            let m = p / scale;
            (((s2 / n) - m * m).max(0.0) / (n - 1.0).max(1.0)).sqrt() * scale
        })
        .collect();
    Ok(ls
        .iter()
        .map(|l| {
            let j = ((l / s.bin_width).floor() as usize).min(n_bins - 1);
            (h.joint[j], err[j])
        })
        .collect())
}

pub fn localtime_csv(rows: &[LocalTimeRow]) -> Csv {
    let mut csv = Csv::new(&["L", "p_joint", "p_conditional", "p_mc", "mc_err"]);
    for r in rows {
        csv.row(&[
            fmt_f64(r.local_time),
            fmt_f64(r.p_joint),
            fmt_f64(r.p_conditional),
            fmt_opt(r.p_mc),
            fmt_opt(r.mc_err),
        ]);
    }
    csv
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Regime {
    Low,
    High,
}

/// `start:stop:count`, inclusive, linearly spaced.
pub fn parse_sweep(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Config(format!("beta sweep must be start:stop:count, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !(start > 0.0) || !(stop > 0.0) {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticsRow {
    pub beta: f64,
    pub rho_exact: f64,
    pub rho_leading: f64,
}

/// Spectral Bloch matrix against the low-temperature (ground-state) or
/// high-temperature (e^{−βV}/λ) leading term, at the query's first (x_a, x_b).
pub fn asymptotics_table(cfg: &RunConfig, regime: Regime, betas: &[f64]) -> CliResult<Vec<AsymptoticsRow>> {
    let system = cfg.system()?;
    let (x_a, x_b) = match &cfg.query {
        Some(q) => (
            q.x_a.values().first().copied().unwrap_or(0.0),
            q.x_b.values().first().copied().unwrap_or(0.0),
        ),
        None => (0.0, 0.0),
    };
    if regime == Regime::High && x_a != x_b {
        return Err(CliError::Config("the high-temperature term is diagonal: need x_a = x_b".into()));
    }
    let beta_max = betas.iter().copied().fold(0.0, f64::max);
    let beta_min = betas.iter().copied().fold(f64::INFINITY, f64::min);
    let grid = cfg.grid_for(&system, beta_max, &[x_a, x_b])?;
    let h = discretize(&system, &grid);
    let n = cfg.numerics.n_states.unwrap_or_else(|| auto_state_count(&h, beta_min));
    let dec = eigendecompose(&h, n)?;
    let gs = match regime {
        Regime::Low => Some(ground_state(&h)?),
        Regime::High => None,
    };
    betas
        .iter()
        .map(|b| {
            let q = BlochQuery::new(x_a, x_b, *b)?;
            let rho_exact = bloch_spectral(&dec, &q).value;
            let rho_leading = match &gs {
                Some(gs) => low_temperature_leading(gs, &q)?,
                None => high_temperature_leading(&system, x_a, *b),
            };
            Ok(AsymptoticsRow {
                beta: *b,
                rho_exact,
                rho_leading,
            })
        })
        .collect()
}

pub fn asymptotics_csv(rows: &[AsymptoticsRow]) -> Csv {
    let mut csv = Csv::new(&["beta", "rho_exact", "rho_leading", "ratio"]);
    for r in rows {
        csv.row(&[
            fmt_f64(r.beta),
            fmt_f64(r.rho_exact),
            fmt_f64(r.rho_leading),
            fmt_f64(r.rho_exact / r.rho_leading),
        ]);
    }
    csv
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McDocument {
    pub schema_version: u32,
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn mc_estimate(system: &System<f64>, q: &BlochQuery<f64>, cfg: &MCConfig<f64>) -> CliResult<McDocument> {
    let est = feynman_kac(system, q, cfg)?;
    Ok(McDocument {
        schema_version: SCHEMA_VERSION,
        mean: est.value.mean,
        std_error: est.value.std_error,
        n_paths: est.value.n_paths,
        seed: est.value.seed,
        warnings: est.warnings.iter().map(|w| w.to_string()).collect(),
    })
}

/// Binned local-time profiles (path, bin_left, bin_right, L) of the first
/// `n_paths` bridges of the run.
pub fn localtime_profiles_csv(
    system: &System<f64>,
    q: &BlochQuery<f64>,
    cfg: &MCConfig<f64>,
    n_paths: usize,
    bin_width: f64,
) -> CliResult<Csv> {
    let mut csv = Csv::new(&["path", "bin_left", "bin_right", "L"]);
    for i in 0..n_paths.min(cfg.n_paths) {
        let path = sample_bridge(&system.params, q.x_a, q.x_b, cfg, i as u64);
        let prof = local_time_profile(&path, bin_width)?;
        for (j, v) in prof.values.iter().enumerate() {
            csv.row(&[
                i.to_string(),
                fmt_f64(prof.bin_edges[j]),
                fmt_f64(prof.bin_edges[j + 1]),
                fmt_f64(*v),
            ]);
        }
    }
    Ok(csv)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchEntry {
    pub method: &'static str,
    pub value: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchDocument {
    pub schema_version: u32,
    pub threads: usize,
    pub results: Vec<BenchEntry>,
}

/// Wall-clock timing of every method on the first query of `cfg`.
pub fn bench(cfg: &RunConfig) -> CliResult<BenchDocument> {
    let mut results = Vec::new();
    for method in [Method::Spectral, Method::Heat, Method::SturmLaplace, Method::Radial, Method::Mc] {
        let mut c = cfg.clone();
        c.method = method;
        if method == Method::Mc && c.mc.is_none() {
            c.mc = Some(McSection {
                paths: 10_000,
                slices: 1024,
                seed: 1,
            });
        }
        let start = Instant::now();
        let rows = compute_rho(&c)?;
        results.push(BenchEntry {
            method: method.name(),
            value: rows[0].value,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(BenchDocument {
        schema_version: SCHEMA_VERSION,
        threads: rayon::current_num_threads(),
        results,
    })
}
