//! Cross-method and invariant validation suite.
//!
//! Each criterion collects named checks of the form "measured vs tolerance".
//! The report is deterministic: it carries no timings, and every Monte Carlo
//! input is seeded, so two runs of the same profile serialize to identical
//! bytes at any thread count (criterion 9 replays the suite to confirm).

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use ltk_core::asymptotics::{
    gelfand_yaglom, ground_state, high_temperature_leading, lattice_determinant, linear_fit, low_temperature_decay_rate,
    low_temperature_leading,
};
use ltk_core::bridge::{
    feynman_kac, local_time_profile, onepoint_histogram, potential_time_sum, potential_via_localtime, sample_bridge,
    HistogramSpec, LocalTimeEstimator, MCConfig,
};
use ltk_core::laplace::{gaver_stehfest_invert, GreenTransform};
use ltk_core::physics::{auto_box, BlochQuery, GridSpec, PhysicalParams, System};
use ltk_core::quadrature::GaussLegendre;
use ltk_core::radial::{
    angular_momentum_scaling, gaussian_bessel_closed, gaussian_bessel_quadrature, localtime_conditional_cdf,
    localtime_conditional_density, localtime_onepoint_laplace, offdiag_green_via_radial,
};
use ltk_core::special::{psi_p, psi_p_iform};
use ltk_core::spectral::{bloch_spectral, discretize, eigendecompose, heat_propagate};
use ltk_core::sturm::green_function;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::SCHEMA_VERSION;

/// Sizes and seeds of the suite. Defaults reproduce the published settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateProfile {
    /// Half width of the symmetric box used for the oscillator references.
    pub box_half_width: f64,
    pub grid_points: usize,
    pub n_states: usize,
    pub heat_steps_per_beta: usize,
    pub laplace_order: usize,
    pub mc_paths: usize,
    pub mc_slices: usize,
    pub mc_seed: u64,
    pub localtime_bridges: usize,
    pub localtime_slices: usize,
    pub localtime_seed: u64,
    pub invariant_bridges: usize,
    pub invariant_slices: usize,
    pub invariant_seed: u64,
    pub determinant_points: usize,
}

impl Default for ValidateProfile {
    fn default() -> Self {
        Self {
            box_half_width: 10.0,
            grid_points: 4001,
            n_states: 120,
            heat_steps_per_beta: 2000,
            laplace_order: 14,
            mc_paths: 100_000,
            mc_slices: 2048,
            mc_seed: 1,
            localtime_bridges: 100_000,
            localtime_slices: 4096,
            localtime_seed: 2,
            invariant_bridges: 10_000,
            invariant_slices: 4096,
            invariant_seed: 3,
            determinant_points: 2000,
        }
    }
}

impl ValidateProfile {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        Ok(toml::from_str(text)?)
    }

    fn oscillator_grid(&self) -> ltk_core::Result<GridSpec<f64>> {
        GridSpec::new(-self.box_half_width, self.box_half_width, self.grid_points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// passes when measured ≤ tolerance
    AtMost,
    /// passes when measured ≥ tolerance
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            bound: Bound::AtMost,
            passed: measured <= tolerance,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            bound: Bound::AtLeast,
            passed: measured >= tolerance,
        }
    }

    /// A computation that errored counts as a failed check.
    pub fn error(name: impl Into<String>, err: &dyn std::fmt::Display) -> Self {
        Self {
            name: format!("{}: {err}", name.into()),
            measured: f64::NAN,
            tolerance: 0.0,
            bound: Bound::AtMost,
            passed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Wall-clock time; kept out of the serialized report.
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub schema_version: u32,
    pub profile: ValidateProfile,
    pub criteria: Vec<CriterionReport>,
    pub passed: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn mehler(x: f64, y: f64, beta: f64) -> f64 {
    let s = beta.sinh();
    (1.0 / (2.0 * PI * s)).sqrt() * (-((x * x + y * y) * beta.cosh() - 2.0 * x * y) / (2.0 * s)).exp()
}

fn criterion(id: u32, title: &'static str, body: impl FnOnce(&mut Vec<Check>) -> ltk_core::Result<()>) -> CriterionReport {
    let start = Instant::now();
    let mut checks = Vec::new();
    if let Err(e) = body(&mut checks) {
        checks.push(Check::error("computation failed", &e));
    }
    let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
    CriterionReport {
        id,
        title,
        passed,
        checks,
        elapsed: start.elapsed(),
    }
}

pub const PAIRS: [(f64, f64); 3] = [(0.0, 0.0), (0.0, 1.0), (-0.5, 0.5)];
pub const BETAS: [f64; 3] = [0.5, 1.0, 2.0];

/// Spectral, heat, Sturm–Laplace and Mehler agree; Monte Carlo sits within
/// 3 standard errors of the spectral value.
pub fn cross_representation(p: &ValidateProfile) -> CriterionReport {
    criterion(1, "cross-representation agreement", |checks| {
        let sys = System::harmonic(1.0);
        let grid = p.oscillator_grid()?;
        let h = discretize(&sys, &grid);
        let dec = eigendecompose(&h, p.n_states.min(h.dim()))?;
        let cases: Vec<(f64, f64, f64)> = PAIRS
            .iter()
            .flat_map(|&(a, b)| BETAS.iter().map(move |&beta| (a, b, beta)))
            .collect();
        let deterministic = cases
            .par_iter()
            .map(|&(a, b, beta)| {
                let q = BlochQuery::new(a, b, beta)?;
                let spectral = bloch_spectral(&dec, &q).value;
                let steps = (p.heat_steps_per_beta as f64 * beta).ceil() as usize;
                let heat = grid.interpolate(&heat_propagate(&h, a, beta, steps)?, b);
                let t = GreenTransform {
                    system: &sys,
                    grid: &grid,
                    x_a: a,
                    x_b: b,
                };
                let laplace = gaver_stehfest_invert(&t, beta, p.laplace_order)?;
                Ok([spectral, heat, laplace, mehler(a, b, beta)])
            })
            .collect::<ltk_core::Result<Vec<[f64; 4]>>>()?;
        let names = ["spectral", "heat", "sturm-laplace", "mehler"];
        for (&(a, b, beta), v) in cases.iter().zip(&deterministic) {
            let label = format!("({a}, {b}, beta={beta})");
            for i in 0..4 {
                for j in i + 1..4 {
                    checks.push(Check::at_most(
                        format!("{label} {} vs {}: relative difference", names[i], names[j]),
                        rel(v[i], v[j]),
                        1e-3,
                    ));
                }
            }
        }
        for (&(a, b, beta), v) in cases.iter().zip(&deterministic) {
            let q = BlochQuery::new(a, b, beta)?;
            let cfg = MCConfig::new(p.mc_paths, p.mc_slices, p.mc_seed, beta)?;
            let est = feynman_kac(&sys, &q, &cfg)?.value;
            checks.push(Check::at_most(
                format!("({a}, {b}, beta={beta}) monte carlo vs spectral: |difference| / std_error"),
                (est.mean - v[0]).abs() / est.std_error,
                3.0,
            ));
        }
        Ok(())
    })
}

/// Two-amplitude radial integral ≡ Sturm–Liouville Green function.
pub fn radial_equivalence(p: &ValidateProfile) -> CriterionReport {
    criterion(2, "two-amplitude integral equals the Green function", |checks| {
        let grid = p.oscillator_grid()?;
        let xs_a = [-1.0, -0.25, 0.5];
        let xs_b = [0.75, 1.25, 2.0];
        for (name, sys) in [("free", System::free()), ("harmonic", System::harmonic(1.0))] {
            let mut cases = Vec::new();
            for e in [0.5, 1.0, 2.0] {
                for a in xs_a {
                    for b in xs_b {
                        cases.push((e, a, b));
                    }
                }
            }
            let worst = cases
                .par_iter()
                .map(|&(e, a, b)| {
                    let radial = offdiag_green_via_radial(&sys, e, a, b, &grid)?;
                    let direct = green_function(&sys, e, a, b, &grid)?.value;
                    Ok(rel(radial, direct))
                })
                .collect::<ltk_core::Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            checks.push(Check::at_most(format!("{name}: max relative difference over 27 cases"), worst, 1e-6));
        }
        Ok(())
    })
}

/// Monte Carlo local-time law at the end point of a free bridge, and the
/// closed-form transform.
pub fn localtime_law(p: &ValidateProfile) -> CriterionReport {
    criterion(3, "one-point local-time law", |checks| {
        let sys = System::free();
        let params = PhysicalParams::default();
        let cfg = MCConfig::new(p.localtime_bridges, p.localtime_slices, p.localtime_seed, 1.0)?;
        let layout = HistogramSpec {
            bin_width: 0.05,
            n_bins: 200,
        };
        let h = onepoint_histogram(&sys, 0.0, 0.0, 0.0, &cfg, &layout, LocalTimeEstimator::Exact)?.value;
        let ks = h.ks_statistic(|l| localtime_conditional_cdf(&params, 1.0, l));
        checks.push(Check::at_most("Kolmogorov-Smirnov distance to the conditional law", ks, 0.01));
        let hist_mass: f64 = h.conditional.iter().map(|v| v * layout.bin_width).sum();
        checks.push(Check::at_most("histogram conditional mass minus one", (hist_mass - 1.0).abs(), 1e-9));

        let gl = GaussLegendre::<f64>::new(20);
        let norm = gl.integrate_composite(0.0, 40.0, 200, |l| localtime_conditional_density(&params, 1.0, l));
        checks.push(Check::at_most("conditional density quadrature normalization error", (norm - 1.0).abs(), 1e-6));

        let auto = auto_box(&sys, 1.0, &[0.0])?;
        let grid = GridSpec::new(auto.x_minus, auto.x_plus, (auto.n_points - 1) * 4 + 1)?;
        let mut worst = 0.0f64;
        for e in [0.5, 1.0, 2.0] {
            for l in [0.5, 1.0, 2.0] {
                let v = localtime_onepoint_laplace(&sys, e, l, 0.0, &grid)?;
                worst = worst.max((v - (-(2.0 * e).sqrt() * l).exp()).abs());
            }
        }
        checks.push(Check::at_most("Laplace-domain law vs exp(-sqrt(2E) L): max abs error", worst, 1e-8));
        Ok(())
    })
}

/// Positivity, exact normalization, compact support and the potential recast
/// on sampled bridges.
pub fn localtime_invariants(p: &ValidateProfile) -> CriterionReport {
    criterion(4, "local-time invariants", |checks| {
        let params = PhysicalParams::default();
        let beta = 1.0;
        let width = 0.05;
        let cfg = MCConfig::new(p.invariant_bridges, p.invariant_slices, p.invariant_seed, beta)?;
        let step = |x: f64| ((x / width).floor() as i64).rem_euclid(7) as f64 - 3.0;
        let failures = (0..p.invariant_bridges as u64)
            .into_par_iter()
            .map(|i| {
                let path = sample_bridge(&params, 0.0, 0.5, &cfg, i);
                let prof = local_time_profile(&path, width)?;
                let n = path.positions.len() - 1;
                let lo = path.positions[..n].iter().copied().fold(f64::INFINITY, f64::min);
                let hi = path.positions[..n].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let first = prof.bin_edges[0];
                let last = *prof.bin_edges.last().expect("edges");
                Ok([
                    prof.values.iter().any(|v| !(*v >= 0.0)) as u32,
                    (prof.integral() != beta * params.hbar) as u32,
                    !(first <= lo && first > lo - width && last > hi && last <= hi + width) as u32,
                    (potential_via_localtime(&prof, step) != potential_time_sum(&path, step)) as u32,
                ])
            })
            .collect::<ltk_core::Result<Vec<[u32; 4]>>>()?
            .into_iter()
            .fold([0u32; 4], |mut acc, f| {
                for k in 0..4 {
                    acc[k] += f[k];
                }
                acc
            });
        let names = [
            "bridges with a negative local time",
            "bridges whose local-time integral differs from beta*hbar in any bit",
            "bridges with support outside [min, max] plus one bin",
            "bridges where the binned potential action differs from the time sum",
        ];
        for (name, f) in names.iter().zip(failures) {
            checks.push(Check::at_most(*name, f as f64, 0.0));
        }
        Ok(())
    })
}

/// Gelfand–Yaglom determinants against the lattice recursion.
pub fn gelfand_yaglom_checks(p: &ValidateProfile) -> CriterionReport {
    criterion(5, "Gelfand-Yaglom determinants", |checks| {
        let free = System::free();
        let mut worst: f64 = 0.0;
        for (a, b, n) in [(0.0, 1.0, 101), (-2.0, 3.0, 2001), (-7.5, 7.5, 4001)] {
            let r = gelfand_yaglom(&free, 0.0, &GridSpec::new(a, b, n)?, None)?;
            worst = worst.max(rel(r.d_value, b - a)).max(rel(r.lattice_det_times_eps, b - a));
        }
        checks.push(Check::at_most("free: D(X+) and eps*det vs box length, max relative error", worst, 1e-12));

        let osc = System::harmonic(1.0);
        let n = p.determinant_points;
        let diff = |n: usize| -> ltk_core::Result<f64> {
            let r = gelfand_yaglom(&osc, 0.0, &GridSpec::new(-3.0, 3.0, n + 1)?, None)?;
            Ok(rel(r.lattice_det_times_eps, r.d_value))
        };
        let (d1, d2) = (diff(n)?, diff(n / 2)?);
        checks.push(Check::at_most(format!("harmonic N={n}: ODE vs lattice relative difference"), d1, 1e-4));
        checks.push(Check::at_least("harmonic: difference reduction factor under N doubling", d2 / d1, 2.0));

        let ns = [n / 8, n / 4, n / 2, n, 2 * n];
        let (x, y): (Vec<f64>, Vec<f64>) = ns
            .iter()
            .map(|&m| {
                let g = GridSpec::new(-3.0, 3.0, m + 1)?;
                let (_, ln) = lattice_determinant(&osc, 0.0, &g);
                Ok(((m as f64).ln(), ln - g.spacing().ln()))
            })
            .collect::<ltk_core::Result<Vec<(f64, f64)>>>()?
            .into_iter()
            .unzip();
        let (slope, _) = linear_fit(&x, &y)?;
        checks.push(Check::at_most("lattice determinant growth exponent in N, |slope - 1|", (slope - 1.0).abs(), 0.02));
        Ok(())
    })
}

/// Ground-state dominance at large β.
pub fn low_temperature(p: &ValidateProfile) -> CriterionReport {
    criterion(6, "low-temperature leading law", |checks| {
        let sys = System::harmonic(1.0);
        let grid = p.oscillator_grid()?;
        let h = discretize(&sys, &grid);
        let dec = eigendecompose(&h, 40.min(h.dim()))?;
        let gs = ground_state(&h)?;
        let betas: Vec<f64> = (0..11).map(|i| 5.0 + i as f64).collect();
        let rate = low_temperature_decay_rate(&dec, 0.0, 0.0, &betas)?;
        let gap = dec.energies[1] - dec.energies[0];
        checks.push(Check::at_most(
            format!("(0,0): fitted decay rate {rate:.6} vs -(E1-E0) = {:.6}, relative deviation", -gap),
            rel(rate, -gap),
            0.05,
        ));
        let lead = low_temperature_leading(&gs, &BlochQuery::new(0.0, 0.0, 10.0)?)?;
        checks.push(Check::at_most(
            format!("beta=10: leading term {lead:.7e} vs Mehler, |ratio - 1|"),
            (lead / mehler(0.0, 0.0, 10.0) - 1.0).abs(),
            2e-4,
        ));
        Ok(())
    })
}

/// e^{−βV}/λ against the exact diagonal at small β.
pub fn high_temperature(_: &ValidateProfile) -> CriterionReport {
    criterion(7, "high-temperature leading term", |checks| {
        let sys = System::harmonic(1.0);
        let betas = [0.02, 0.01, 0.005];
        for x in [0.0, 1.0] {
            let dev: Vec<f64> = betas
                .iter()
                .map(|&b| mehler(x, x, b) / high_temperature_leading(&sys, x, b) - 1.0)
                .collect();
            for (b, d) in betas.iter().zip(&dev) {
                checks.push(Check::at_most(format!("x={x}, beta={b}: |ratio - 1|"), d.abs(), 0.01));
            }
            for k in 0..2 {
                let factor = dev[k] / dev[k + 1];
                checks.push(Check::at_most(
                    format!(
                        "x={x}: deviation shrink factor {factor:.4} from beta={} to {} vs 2, relative deviation",
                        betas[k],
                        betas[k + 1]
                    ),
                    (factor / 2.0 - 1.0).abs(),
                    0.2,
                ));
            }
        }
        Ok(())
    })
}

/// Bessel-function identities and the angular-momentum power law.
pub fn special_functions(_: &ValidateProfile) -> CriterionReport {
    criterion(8, "special-function identities", |checks| {
        let set = [0.5, 1.0, 2.0];
        let mut worst = 0.0f64;
        for a in set {
            for b in set {
                worst = worst.max(rel(gaussian_bessel_quadrature(a, b)?, gaussian_bessel_closed(a, b)));
            }
        }
        checks.push(Check::at_most("Gaussian-Bessel integral vs closed form, max relative error", worst, 1e-10));

        let xs: Vec<f64> = (0..41).map(|i| 0.1 * 200f64.powf(i as f64 / 40.0)).collect();
        let mut worst_k = 0.0f64;
        let mut worst_half = 0.0f64;
        for &x in &xs {
            for pp in [0.1, 0.25, 0.4] {
                worst_k = worst_k.max(rel(psi_p(pp, x)?, psi_p_iform(pp, x)?));
            }
            worst_half = worst_half.max((psi_p(0.5, x)? - 1.0).abs());
        }
        checks.push(Check::at_most("psi_p K-form vs I-form on [0.1, 20], max relative difference", worst_k, 1e-10));
        checks.push(Check::at_most("psi_1/2 - 1, max abs", worst_half, 1e-12));

        let grid = GridSpec::new(-8.0, 8.0, 1601)?;
        let sys = System::harmonic(1.0);
        let sweep: Vec<f64> = (0..6).map(|k| 1e-6 * 2f64.powi(k)).collect();
        for (ell, tol) in [(0u32, 0.01), (1, 0.01), (2, 0.02)] {
            let fit = angular_momentum_scaling(&sys, 1.0, ell, &sweep, 1.0, 0.0, 1e-3, &grid)?;
            checks.push(Check::at_most(
                format!("angular momentum {ell}: |exponent - {ell}|"),
                (fit.exponent - ell as f64).abs(),
                tol,
            ));
        }
        Ok(())
    })
}

/// Criteria 1–8 in order.
pub fn run_criteria(p: &ValidateProfile) -> Vec<CriterionReport> {
    let all: [fn(&ValidateProfile) -> CriterionReport; 8] = [
        cross_representation,
        radial_equivalence,
        localtime_law,
        localtime_invariants,
        gelfand_yaglom_checks,
        low_temperature,
        high_temperature,
        special_functions,
    ];
    all.iter().map(|f| f(p)).collect()
}

/// Thread count for the determinism replay: different from the ambient pool.
pub fn replay_threads() -> usize {
    if rayon::current_num_threads() == 1 {
        3
    } else {
        1
    }
}

/// Replays criteria 1–8 on a pool of `threads` workers and compares the
/// serialized reports byte for byte.
pub fn determinism(p: &ValidateProfile, reference: &[CriterionReport], threads: usize) -> CriterionReport {
    criterion(9, "determinism", |checks| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| ltk_core::Error::InvalidParameter(e.to_string()))?;
        let replay = pool.install(|| run_criteria(p));
        let a = serde_json::to_vec(reference).expect("report serializes");
        let b = serde_json::to_vec(&replay).expect("report serializes");
        let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
        checks.push(Check::at_most(
            format!("differing bytes of the report replayed on {threads} thread(s)"),
            differing as f64,
            0.0,
        ));
        Ok(())
    })
}

pub fn run_suite(p: &ValidateProfile, check_determinism: bool) -> ValidationReport {
    let mut criteria = run_criteria(p);
    if check_determinism {
        let det = determinism(p, &criteria, replay_threads());
        criteria.push(det);
    }
    let passed = criteria.iter().all(|c| c.passed);
    ValidationReport {
        schema_version: SCHEMA_VERSION,
        profile: p.clone(),
        criteria,
        passed,
    }
}

pub fn load_profile(path: Option<&std::path::Path>) -> CliResult<ValidateProfile> {
    match path {
        None => Ok(ValidateProfile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            ValidateProfile::from_toml_str(&text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ValidateProfile {
        ValidateProfile {
            grid_points: 2001,
            n_states: 80,
            mc_paths: 2000,
            mc_slices: 128,
            localtime_bridges: 2000,
            localtime_slices: 256,
            invariant_bridges: 200,
            invariant_slices: 1024,
            ..ValidateProfile::default()
        }
    }

    #[test]
    fn checks_compare_in_the_stated_direction() {
        assert!(Check::at_most("a", 1.0, 1.0).passed);
        assert!(!Check::at_most("a", f64::NAN, 1.0).passed);
        assert!(Check::at_least("a", 3.0, 2.0).passed);
        assert!(!Check::at_least("a", 1.0, 2.0).passed);
    }

    #[test]
    fn coarse_grid_fails_cross_check() {
        let coarse = ValidateProfile {
            grid_points: 41,
            n_states: 20,
            mc_paths: 200,
            mc_slices: 16,
            ..ValidateProfile::default()
        };
        let r = cross_representation(&coarse);
        assert!(!r.passed);
        let worst = r
            .checks
            .iter()
            .filter(|c| c.name.contains("spectral vs mehler"))
            .map(|c| c.measured)
            .fold(0.0, f64::max);
        assert!(worst > 1e-3, "{worst}");
    }

    #[test]
    fn invariants_hold_on_a_small_profile() {
        let r = localtime_invariants(&small());
        assert!(r.passed, "{:?}", r.checks);
        assert_eq!(r.checks.len(), 4);
    }

    #[test]
    fn profile_parsing() {
        let p = ValidateProfile::from_toml_str("grid_points = 41\nmc_seed = 5\n").unwrap();
        assert_eq!(p.grid_points, 41);
        assert_eq!(p.mc_seed, 5);
        assert_eq!(p.mc_paths, 100_000);
        assert!(ValidateProfile::from_toml_str("bogus = 1\n").is_err());
    }

    #[test]
    fn report_serializes_without_timings() {
        let r = special_functions(&small());
        let v = serde_json::to_value(&r).unwrap();
        assert!(v.get("elapsed").is_none());
        assert_eq!(v["id"], 8);
    }
}
