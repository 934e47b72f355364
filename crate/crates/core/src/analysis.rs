//! Goodness-of-fit statistics and rate-function gaps.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energy::{measure_energy, DiagonalPolicy};
use crate::equilibrium::{closed_form, ClosedFormLaw, EquilibriumResult};
use crate::geometry::project;
use crate::model::{DiscreteMeasure, GasModel};
use crate::{Error, Execution, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub statistic: f64,
    pub sample_size: usize,
    pub reference: String,
}

/// Kolmogorov–Smirnov statistic
/// `max_i max(|i/n - F(x_(i))|, |(i-1)/n - F(x_(i))|)`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64, reference: &str) -> Result<FitReport> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let hi = (i + 1) as f64 / n;
            let lo = i as f64 / n;
            (hi - f).abs().max((lo - f).abs())
        })
        .fold(0.0, f64::max);
    Ok(FitReport {
        statistic,
        sample_size: sorted.len(),
        reference: reference.to_owned(),
    })
}

/// KS statistic of the moduli `|x_k|` against a radial distribution function.
pub fn radial_cdf_distance(
    samples: &[Complex64],
    radial_cdf: impl Fn(f64) -> f64,
    reference: &str,
) -> Result<FitReport> {
    let radii: Vec<f64> = samples.iter().map(|z| z.norm()).collect();
    ks_distance(&radii, radial_cdf, reference)
}

/// KS statistic of the arguments `arg x_k ∈ (-π, π]` against the uniform law.
pub fn angular_distance(samples: &[Complex64]) -> Result<FitReport> {
    let angles: Vec<f64> = samples.iter().map(|z| z.arg()).collect();
    ks_distance(&angles, |t| ClosedFormLaw::CircleUniform.cdf(t), "angle_uniform")
}

/// Angles `2 atan x` of the projected real samples on the great circle `T(ℝ ∪ {∞})`.
pub fn equator_angles(samples: &[f64]) -> Vec<f64> {
    samples
        .iter()
        .map(|&x| project(Complex64::new(x, 0.0)).equator_angle())
        .collect()
}

/// Fit of real samples against the Cauchy law, complex samples against the
/// spherical law (radially), or projected real samples against the uniform
/// law on the circle.
pub fn fit_against(law: ClosedFormLaw, samples: &[Complex64]) -> Result<FitReport> {
    match law {
        ClosedFormLaw::Cauchy => {
            let xs: Vec<f64> = samples.iter().map(|z| z.re).collect();
            ks_distance(&xs, |t| law.cdf(t), law.name())
        }
        ClosedFormLaw::Spherical => radial_cdf_distance(samples, |t| law.cdf(t), law.name()),
        ClosedFormLaw::CircleUniform => {
            let xs: Vec<f64> = samples.iter().map(|z| z.re).collect();
            ks_distance(&equator_angles(&xs), |t| law.cdf(t), law.name())
        }
        ClosedFormLaw::SphereUniform => {
            let heights: Vec<f64> = samples.iter().map(|&z| project(z).coords()[2]).collect();
            ks_distance(&heights, |t| law.cdf(t), law.name())
        }
    }
}

/// The minimal energy a rate gap is measured from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RateReference {
    /// The minimal energy of the model's closed-form law.
    ClosedForm,
    /// A precomputed minimal energy, typically from [`grid_minimize`](crate::equilibrium::grid_minimize).
    Energy(f64),
}

impl RateReference {
    /// The closed form when one exists, else the energy of `minimizer`.
    pub fn for_model(model: &GasModel, minimizer: Option<&EquilibriumResult>) -> Result<Self> {
        if closed_form(model).is_ok() {
            return Ok(RateReference::ClosedForm);
        }
        match minimizer {
            Some(m) if m.converged => Ok(RateReference::Energy(m.energy)),
            _ => Err(Error::NoReference(format!(
                "potential `{}` has no closed form and no converged minimizer was given",
                model.potential().name()
            ))),
        }
    }
}

impl From<&EquilibriumResult> for RateReference {
    fn from(r: &EquilibriumResult) -> Self {
        RateReference::Energy(r.energy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateGap {
    pub gap: f64,
    pub energy: f64,
    pub reference_energy: f64,
    /// The diagonal policy of `energy`. With `OffDiagonalOnly` an atomic
    /// measure can sit below the minimal energy.
    pub policy: DiagonalPolicy,
}

/// `I(μ) - I(μ*)` with the discrete energy of `mu` under `policy`.
pub fn rate_gap(
    mu: &DiscreteMeasure<Complex64>,
    model: &GasModel,
    reference: RateReference,
    policy: DiagonalPolicy,
) -> Result<RateGap> {
    let reference_energy = match reference {
        RateReference::ClosedForm => closed_form(model)
            .map_err(|_| Error::NoReference(format!("potential `{}`", model.potential().name())))?
            .energy(),
        RateReference::Energy(e) => e,
    };
    let energy = measure_energy(mu, model, policy, Execution::default())?.value;
    Ok(RateGap {
        gap: energy - reference_energy,
        energy,
        reference_energy,
        policy,
    })
}
