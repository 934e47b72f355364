//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::f64::consts::LN_2;
use std::process::Command;
use std::time::{Duration, Instant};

use coulomb_gas::analysis::{angular_distance, fit_against};
use coulomb_gas::energy::{signed_log_energy, DiagonalPolicy};
use coulomb_gas::equilibrium::{
    el_residual, fekete_descent, grid_minimize, Candidate, ClosedFormLaw, DescentOptions, GridSpec, Init,
    SolverOptions, Spacing,
};
use coulomb_gas::geometry::pushforward;
use coulomb_gas::model::{
    admissibility_check, initial_configuration, Configuration, CustomParams, DiscreteMeasure, GasModel,
    GrowthClass, PolyVariable, PotentialSpec, Support,
};
use coulomb_gas::sampler::{mh_chain, run_chains, ChainParams};
use coulomb_gas::verify::{run_identity_suites, VerifyOptions};
use coulomb_gas::{Complex64, Execution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check<'a> = Box<dyn FnOnce() -> Verdict + 'a>;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

/// Cauchy chain shared by criteria 2 and 4.
fn cauchy_chain() -> (Vec<Complex64>, Duration) {
    let model = GasModel::cauchy(128);
    let mut params = ChainParams::new(3000, 2024);
    params.burn_in = 1000;
    let t = Instant::now();
    let out = mh_chain(&model, &initial_configuration(&model), &params).expect("admissible model");
    (out.pooled(), t.elapsed())
}

fn identity_suite() -> Verdict {
    let t = Instant::now();
    let opts = VerifyOptions {
        exec: Execution::Sequential,
        ..VerifyOptions::default()
    };
    let report = run_identity_suites(&opts).expect("built-in models");
    let elapsed = t.elapsed();
    let worst: Vec<String> = report
        .suites
        .iter()
        .map(|s| format!("{}={:.1e}/{:.0e}", s.name, s.max_deviation, s.tolerance))
        .collect();
    verdict(
        report.passed && elapsed < Duration::from_secs(5),
        format!("{} in {}", worst.join(" "), secs(elapsed)),
    )
}

fn cauchy_law(samples: &[Complex64], elapsed: Duration) -> Verdict {
    let fit = fit_against(ClosedFormLaw::Cauchy, samples).unwrap();
    verdict(
        fit.statistic <= 0.05 && elapsed < Duration::from_secs(60),
        format!(
            "KS {:.4} <= 0.05 over {} samples, {} single-threaded",
            fit.statistic,
            fit.sample_size,
            secs(elapsed)
        ),
    )
}

fn spherical_law() -> Verdict {
    let model = GasModel::spherical(128);
    let mut params = ChainParams::new(3000, 2025);
    params.burn_in = 1000;
    let t = Instant::now();
    let out = mh_chain(&model, &initial_configuration(&model), &params).unwrap();
    let elapsed = t.elapsed();
    let pooled = out.pooled();
    let radial = fit_against(ClosedFormLaw::Spherical, &pooled).unwrap();
    let angular = angular_distance(&pooled).unwrap();
    verdict(
        radial.statistic <= 0.05 && angular.statistic <= 0.05 && elapsed < Duration::from_secs(90),
        format!(
            "radial {:.4}, angular {:.4} (both <= 0.05), Metropolis in {}",
            radial.statistic,
            angular.statistic,
            secs(elapsed)
        ),
    )
}

fn pushforward_uniformity(samples: &[Complex64]) -> Verdict {
    let fit = fit_against(ClosedFormLaw::CircleUniform, samples).unwrap();
    verdict(
        fit.statistic <= 0.05,
        format!("equator-angle KS {:.4} <= 0.05", fit.statistic),
    )
}

fn golden_energies() -> Verdict {
    let opts = SolverOptions {
        tol: 1e-4,
        ..SolverOptions::default()
    };
    let cases = [
        (
            GasModel::cauchy(1),
            GridSpec::new(100.0, 400, Spacing::Compactified).unwrap(),
            LN_2,
        ),
        (
            GasModel::spherical(1),
            GridSpec::new(100.0, 20, Spacing::Compactified).unwrap(),
            0.5,
        ),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (model, spec, target) in cases {
        let r = grid_minimize(&model, &spec, &opts).unwrap();
        let l1 = r.density_l1.expect("closed form exists");
        ok &= r.converged && r.gap <= 1e-4 && (r.energy - target).abs() <= 0.05 && l1 <= 0.05;
        parts.push(format!(
            "{}: {} atoms, gap {:.1e}, energy {:.4} vs {:.4}, L1 {:.4}",
            model.potential().name(),
            r.grid.len(),
            r.gap,
            r.energy,
            target,
            l1
        ));
    }
    verdict(ok, parts.join("; "))
}

fn euler_lagrange() -> Verdict {
    let real = |xs: &[f64]| xs.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
    let cauchy = el_residual(
        Candidate::Law(ClosedFormLaw::Cauchy),
        &GasModel::cauchy(1),
        &real(&[0.0, 1.0, 5.0, 20.0]),
    )
    .unwrap();
    let cauchy_dev = cauchy.iter().map(|u| u.abs()).fold(0.0, f64::max);
    let spherical = el_residual(
        Candidate::Law(ClosedFormLaw::Spherical),
        &GasModel::spherical(1),
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-3.0, 0.0),
        ],
    )
    .unwrap();
    let lo = spherical.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = spherical.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    verdict(
        cauchy_dev <= 1e-6 && hi - lo <= 1e-5,
        format!(
            "cauchy max |U| {:.1e} <= 1e-6; spherical spread {:.1e} <= 1e-5",
            cauchy_dev,
            hi - lo
        ),
    )
}

fn mode_descent() -> Verdict {
    let model = GasModel::quadratic(2);
    let init = Configuration::from_real(&model, &[-1.0, 1.0]).unwrap();
    let r = fekete_descent(&model, &init, &DescentOptions::default()).unwrap();
    let mut xs: Vec<f64> = r.config.points().iter().map(|p| p.re).collect();
    xs.sort_by(f64::total_cmp);
    let err = (xs[0] + 0.5).abs().max((xs[1] - 0.5).abs());
    verdict(
        err <= 1e-6,
        format!("{{{:.9}, {:.9}}}, error {:.1e} <= 1e-6", xs[0], xs[1], err),
    )
}

fn convexity() -> Verdict {
    let grid = GridSpec::new(10.0, 16, Spacing::Compactified)
        .unwrap()
        .build(Support::ComplexPlane)
        .unwrap();
    let atoms = grid.atoms();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let random_measure = |rng: &mut ChaCha8Rng| {
        let raw: Vec<f64> = atoms.iter().map(|_| -rng.random::<f64>().ln()).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        pushforward(&DiscreteMeasure::from_parts(atoms, &w).unwrap())
    };
    let mut min_pair = f64::INFINITY;
    let mut self_max = 0.0f64;
    for _ in 0..100 {
        let mu = random_measure(&mut rng);
        let nu = random_measure(&mut rng);
        let policy = DiagonalPolicy::RegularizedSelfEnergy;
        min_pair = min_pair.min(signed_log_energy(&mu, &nu, policy, Execution::Parallel).unwrap());
        self_max = self_max.max(
            signed_log_energy(&mu, &mu, policy, Execution::Parallel)
                .unwrap()
                .abs(),
        );
    }

    let tol = 1e-6;
    let spec = GridSpec::new(100.0, 400, Spacing::Compactified).unwrap();
    let energies: Vec<f64> = (0..5)
        .map(|seed| {
            let opts = SolverOptions {
                tol,
                init: Init::Random(seed),
                ..SolverOptions::default()
            };
            grid_minimize(&GasModel::cauchy(1), &spec, &opts).unwrap().energy
        })
        .collect();
    let spread = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - energies.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        min_pair >= -1e-10 && self_max == 0.0 && spread <= 2.0 * tol,
        format!(
            "min signed energy {:.3e} >= -1e-10, mu = nu gives {:.1e}; 5 random starts spread {:.1e} <= {:.0e}",
            min_pair,
            self_max,
            spread,
            2.0 * tol
        ),
    )
}

fn convergence_trend() -> Verdict {
    let mut medians = Vec::new();
    for n in [16, 64, 256] {
        let model = GasModel::cauchy(n);
        let mut params = ChainParams::new(2000, 99);
        params.burn_in = 1000;
        let chains = run_chains(&model, None, &params, 5, Execution::Parallel).unwrap();
        let mut ks: Vec<f64> = chains
            .iter()
            .map(|c| fit_against(ClosedFormLaw::Cauchy, &c.pooled()).unwrap().statistic)
            .collect();
        ks.sort_by(f64::total_cmp);
        medians.push(ks[2]);
    }
    verdict(
        medians.windows(2).all(|w| w[1] <= w[0]),
        format!(
            "median KS at N = 16, 64, 256: {:.4}, {:.4}, {:.4}",
            medians[0], medians[1], medians[2]
        ),
    )
}

fn growth_classes() -> Verdict {
    let half_log = PotentialSpec::custom(
        "half_log",
        CustomParams {
            poly: vec![],
            log_coeff: 0.5,
            variable: PolyVariable::Abs2,
        },
        Some(2.0),
        None,
    )
    .unwrap();
    let classes = [
        admissibility_check(&GasModel::quadratic(8)).unwrap().class,
        admissibility_check(&GasModel::cauchy(8)).unwrap().class,
        admissibility_check(&GasModel::new(Support::RealLine, 2.0, half_log, 8).unwrap())
            .unwrap()
            .class,
    ];
    verdict(
        classes
            == [
                GrowthClass::Strong,
                GrowthClass::WeakOnly,
                GrowthClass::Inadmissible,
            ],
        format!(
            "quadratic {:?}, cauchy {:?}, half_log {:?}",
            classes[0], classes[1], classes[2]
        ),
    )
}

fn reproducibility() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "command = \"sample\"\nseed = 5\n[model]\npotential = \"cauchy\"\nn = 64\n[chain]\nsweeps = 1000\n",
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_coulomb-gas");
    let sample = |out: &str| {
        Command::new(bin)
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(dir.path().join(out))
            .status()
            .unwrap()
    };
    let (a, b) = (sample("a"), sample("b"));
    let csv = |out: &str| std::fs::read(dir.path().join(out).join("samples.csv")).unwrap_or_default();
    let identical = a.success() && b.success() && !csv("a").is_empty() && csv("a") == csv("b");
    let verify = Command::new(bin)
        .args(["verify", "--out"])
        .arg(dir.path().join("v"))
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    verdict(
        identical && verify.code() == Some(0),
        format!(
            "sample CSVs identical: {identical}; verify exit code {}",
            verify.code().unwrap_or(-1)
        ),
    )
}

fn main() {
    let (cauchy_samples, cauchy_time) = cauchy_chain();
    let criteria: Vec<(&str, Check)> = vec![
        ("exact identity suite", Box::new(identity_suite)),
        (
            "cauchy limit law",
            Box::new(|| cauchy_law(&cauchy_samples, cauchy_time)),
        ),
        ("spherical limit law", Box::new(spherical_law)),
        (
            "push-forward uniformity",
            Box::new(|| pushforward_uniformity(&cauchy_samples)),
        ),
        ("equilibrium golden energies", Box::new(golden_energies)),
        ("euler-lagrange residual", Box::new(euler_lagrange)),
        ("mode descent", Box::new(mode_descent)),
        ("convexity and uniqueness", Box::new(convexity)),
        ("convergence trend", Box::new(convergence_trend)),
        ("growth classification", Box::new(growth_classes)),
        ("reproducibility", Box::new(reproducibility)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let v = check();
        if !v.passed {
            failures += 1;
        }
        println!(
            "{} [{:>2}] {name}: {}",
            if v.passed { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    println!("{} of 11 criteria passed", 11 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
