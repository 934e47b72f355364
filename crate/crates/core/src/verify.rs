//! Seeded identity suites for the stereographic compactification.
//!
//! Each suite draws its inputs from a fixed-seed generator, evaluates both
//! sides of an exact identity and records the largest deviation. Inputs are
//! generated sequentially and evaluated with [`map_indexed`], so reports do
//! not depend on the thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{
    kernel_planar, kernel_sphere, log_density, log_density_sphere, measure_energy, measure_energy_sphere,
    DiagonalPolicy,
};
use crate::geometry::{chordal_distance, compactified_potential, project, pushforward, unproject};
use crate::model::{Configuration, DiscreteMeasure, GasModel, PotentialSpec, Support};
use crate::numerics::map_indexed;
use crate::{Execution, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random points or pairs per pointwise suite.
    pub cases: usize,
    /// Random configurations per model in the density suite.
    pub configurations: usize,
    /// Random measures per model in the energy suite.
    pub measures: usize,
    pub atoms: usize,
    pub exec: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            cases: 100_000,
            configurations: 100_000,
            measures: 1_000,
            atoms: 100,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

/// `|a - b| / max(1, |a|)`; zero when both sides are the same infinity.
pub fn deviation(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let d = (a - b).abs() / a.abs().max(1.0);
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

/// Point with modulus log-uniform in `[lo, hi]`, on the real line or in the plane.
fn random_point(rng: &mut ChaCha8Rng, support: Support, lo: f64, hi: f64) -> Complex64 {
    let r = (lo.ln() + rng.random::<f64>() * (hi / lo).ln()).exp();
    if support.is_real() {
        if rng.random::<bool>() {
            Complex64::new(r, 0.0)
        } else {
            Complex64::new(-r, 0.0)
        }
    } else {
        Complex64::from_polar(r, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
    }
}

fn models() -> Vec<(GasModel, f64, f64)> {
    let cauchy_low_beta =
        GasModel::new(Support::RealLine, 1.0, PotentialSpec::cauchy(), 2).expect("valid built-in model");
    vec![
        (GasModel::cauchy(2), 1e-6, 1e6),
        (cauchy_low_beta, 1e-6, 1e6),
        (GasModel::spherical(2), 1e-6, 1e6),
        (GasModel::quadratic(2), 1e-3, 1e2),
    ]
}

fn suite(name: &str, deviations: Vec<f64>, tolerance: f64) -> SuiteResult {
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    SuiteResult {
        name: name.to_owned(),
        cases: deviations.len(),
        max_deviation,
        tolerance,
        passed: max_deviation <= tolerance,
    }
}

fn pointwise(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Vec<SuiteResult> {
    let pts: Vec<Complex64> = (0..opts.cases)
        .map(|_| random_point(rng, Support::ComplexPlane, 1e-6, 1e6))
        .collect();
    let pairs: Vec<(Complex64, Complex64)> = (0..opts.cases)
        .map(|_| {
            (
                random_point(rng, Support::ComplexPlane, 1e-6, 1e6),
                random_point(rng, Support::ComplexPlane, 1e-6, 1e6),
            )
        })
        .collect();
    let exec = opts.exec;
    let membership = map_indexed(pts.len(), exec, |k| project(pts[k]).sphere_residual().abs());
    let pole = map_indexed(pts.len(), exec, |k| {
        let [a, b, c] = project(pts[k]).coords();
        let lhs = 1.0 - (a * a + b * b + c * c);
        (lhs - 1.0 / (1.0 + pts[k].norm_sqr())).abs()
    });
    let round_trip = map_indexed(pts.len(), exec, |k| {
        let x = pts[k];
        match unproject(project(x)) {
            Ok(y) => (y - x).norm() / x.norm(),
            Err(_) => f64::INFINITY,
        }
    });
    let metric = map_indexed(pairs.len(), exec, |k| {
        let (x, y) = pairs[k];
        let (p, q) = (project(x).coords(), project(y).coords());
        let euclid = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
        let chordal = chordal_distance(x, y);
        if chordal > 1.0 {
            f64::INFINITY
        } else {
            (euclid - chordal).abs()
        }
    });
    vec![
        suite("sphere_membership", membership, 1e-12),
        suite("pole_identity", pole, 1e-12),
        suite("round_trip", round_trip, 1e-12),
        suite("metric_identity", metric, 1e-12),
    ]
}

fn kernel_transport(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut all = Vec::new();
    for (model, lo, hi) in models() {
        let cpot = compactified_potential(&model)?;
        let support = model.support();
        let pairs: Vec<(Complex64, Complex64)> = (0..opts.cases)
            .map(|_| {
                (
                    random_point(rng, support, lo, hi),
                    random_point(rng, support, lo, hi),
                )
            })
            .collect();
        all.extend(map_indexed(pairs.len(), opts.exec, |k| {
            let (x, y) = pairs[k];
            deviation(
                kernel_planar(x, y, &model),
                kernel_sphere(project(x), project(y), &cpot),
            )
        }));
    }
    Ok(suite("kernel_transport", all, 1e-12))
}

fn density_transport(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut all = Vec::new();
    let per_model = opts.configurations / models().len();
    for (template, lo, hi) in models() {
        let support = template.support();
        let configs: Vec<(GasModel, Configuration)> = (0..per_model)
            .map(|_| {
                let n = rng.random_range(2..=8);
                let model = template.with_n(n).expect("n >= 1");
                let pts = (0..n).map(|_| random_point(rng, support, lo, hi)).collect();
                (model, Configuration::from_points_unchecked(pts))
            })
            .collect();
        all.extend(map_indexed(configs.len(), opts.exec, |k| {
            let (model, config) = &configs[k];
            match compactified_potential(model) {
                Ok(cpot) => deviation(log_density(config, model), log_density_sphere(config, &cpot)),
                Err(_) => f64::INFINITY,
            }
        }));
    }
    Ok(suite("density_transport", all, 1e-10))
}

fn energy_transport(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut all = Vec::new();
    let per_model = opts.measures / models().len();
    for (model, lo, hi) in models() {
        let cpot = compactified_potential(&model)?;
        let support = model.support();
        let measures: Vec<DiscreteMeasure<Complex64>> = (0..per_model)
            .map(|_| {
                let raw: Vec<f64> = (0..opts.atoms).map(|_| rng.random::<f64>() + 1e-3).collect();
                let total: f64 = raw.iter().sum();
                let atoms = raw
                    .iter()
                    .map(|w| (random_point(rng, support, lo, hi), w / total))
                    .collect();
                DiscreteMeasure::new(atoms).expect("weights are normalized")
            })
            .collect();
        all.extend(map_indexed(measures.len(), opts.exec, |k| {
            let mu = &measures[k];
            let plane = measure_energy(mu, &model, DiagonalPolicy::OffDiagonalOnly, Execution::Sequential);
            let sphere = measure_energy_sphere(
                &pushforward(mu),
                &cpot,
                DiagonalPolicy::OffDiagonalOnly,
                Execution::Sequential,
            );
            match (plane, sphere) {
                (Ok(a), Ok(b)) => deviation(a.value, b.value),
                _ => f64::INFINITY,
            }
        }));
    }
    Ok(suite("energy_transport", all, 1e-10))
}

/// Runs every suite.
pub fn run_identity_suites(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut suites = pointwise(opts, &mut rng);
    suites.push(kernel_transport(opts, &mut rng)?);
    suites.push(density_transport(opts, &mut rng)?);
    suites.push(energy_transport(opts, &mut rng)?);
    let passed = suites.iter().all(|s| s.passed);
    Ok(VerifyReport {
        seed: opts.seed,
        suites,
        passed,
    })
}
