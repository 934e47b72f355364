use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{GasModel, PotentialKind, Support};
use crate::{Error, Result};

/// Known equilibrium measures and their images on the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormLaw {
    /// `dx / (π(1 + x²))` on `ℝ`.
    Cauchy,
    /// `dA / (π(1 + |x|²)²)` on `ℂ`.
    Spherical,
    /// Uniform on a great circle of the sphere, parametrized by angle.
    CircleUniform,
    /// Uniform surface measure on the sphere.
    SphereUniform,
}

impl ClosedFormLaw {
    pub fn name(self) -> &'static str {
        match self {
            ClosedFormLaw::Cauchy => "cauchy",
            ClosedFormLaw::Spherical => "spherical",
            ClosedFormLaw::CircleUniform => "circle_uniform",
            ClosedFormLaw::SphereUniform => "sphere_uniform",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "cauchy" => Some(ClosedFormLaw::Cauchy),
            "spherical" => Some(ClosedFormLaw::Spherical),
            "circle_uniform" => Some(ClosedFormLaw::CircleUniform),
            "sphere_uniform" => Some(ClosedFormLaw::SphereUniform),
            _ => None,
        }
    }

    /// Density with respect to length on `ℝ`, area on `ℂ`, arc length on
    /// the circle of radius 1/2 and surface area on the sphere (the last two
    /// are constant and ignore `x`).
    pub fn density(self, x: Complex64) -> f64 {
        match self {
            ClosedFormLaw::Cauchy => 1.0 / (PI * (1.0 + x.re * x.re)),
            ClosedFormLaw::Spherical => {
                let d = 1.0 + x.norm_sqr();
                1.0 / (PI * d * d)
            }
            ClosedFormLaw::CircleUniform | ClosedFormLaw::SphereUniform => 1.0 / PI,
        }
    }

    /// Distribution function of the one-dimensional reduction: `x` for the
    /// Cauchy law, the modulus for the spherical law, the angle in `(-π, π]`
    /// for the circle and the height `x3` for the sphere.
    pub fn cdf(self, t: f64) -> f64 {
        match self {
            ClosedFormLaw::Cauchy => 0.5 + t.atan() / PI,
            ClosedFormLaw::Spherical => {
                if t <= 0.0 {
                    0.0
                } else if t > 1e8 {
                    1.0 / (1.0 + 1.0 / (t * t))
                } else {
                    t * t / (1.0 + t * t)
                }
            }
            ClosedFormLaw::CircleUniform => ((t + PI) / TAU).clamp(0.0, 1.0),
            ClosedFormLaw::SphereUniform => t.clamp(0.0, 1.0),
        }
    }

    /// Inverse of [`ClosedFormLaw::cdf`] on `(0, 1)`.
    pub fn quantile(self, u: f64) -> f64 {
        match self {
            ClosedFormLaw::Cauchy => (PI * (u - 0.5)).tan(),
            ClosedFormLaw::Spherical => (u / (1.0 - u)).sqrt(),
            ClosedFormLaw::CircleUniform => TAU * u - PI,
            ClosedFormLaw::SphereUniform => u,
        }
    }

    /// Minimal value of the weighted energy, attained by this law.
    pub fn energy(self) -> f64 {
        match self {
            ClosedFormLaw::Cauchy | ClosedFormLaw::CircleUniform => LN_2,
            ClosedFormLaw::Spherical | ClosedFormLaw::SphereUniform => 0.5,
        }
    }

    /// The image law under the inverse stereographic projection.
    pub fn pushforward(self) -> Option<ClosedFormLaw> {
        match self {
            ClosedFormLaw::Cauchy => Some(ClosedFormLaw::CircleUniform),
            ClosedFormLaw::Spherical => Some(ClosedFormLaw::SphereUniform),
            _ => None,
        }
    }

    pub fn is_planar(self) -> bool {
        matches!(self, ClosedFormLaw::Cauchy | ClosedFormLaw::Spherical)
    }
}

/// The equilibrium measure of `model` when it is one of the closed-form cases:
/// `β = 2` with `V = log(1 + |x|²)` on `ℝ` or on `ℂ`.
pub fn closed_form(model: &GasModel) -> Result<ClosedFormLaw> {
    let log_potential = matches!(
        model.potential().kind(),
        PotentialKind::Cauchy | PotentialKind::Spherical
    );
    if log_potential && model.beta() == 2.0 {
        match model.support() {
            Support::RealLine => return Ok(ClosedFormLaw::Cauchy),
            Support::ComplexPlane => return Ok(ClosedFormLaw::Spherical),
            _ => {}
        }
    }
    Err(Error::NoClosedForm(format!(
        "potential `{}` on {} at beta = {}",
        model.potential().name(),
        model.support(),
        model.beta()
    )))
}
