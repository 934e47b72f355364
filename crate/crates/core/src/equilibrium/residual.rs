use num_complex::Complex64;

use super::ClosedFormLaw;
use crate::energy::COINCIDENCE;
use crate::model::{DiscreteMeasure, GasModel};
use crate::numerics::{integrate, integrate_to_infinity, Quadrature};
use crate::{Error, Result};

/// A candidate equilibrium measure.
#[derive(Clone, Copy, Debug)]
pub enum Candidate<'a> {
    Law(ClosedFormLaw),
    Measure(&'a DiscreteMeasure<Complex64>),
}

/// `∫ log|x - y| dμ(y)` for the Cauchy law, written with `u = y - Re x` as
/// `∫_0^∞ ½ log(u² + b²) (f(a + u) + f(a - u)) du`, `x = a + ib`. The part
/// on `[0, 1]` uses `u = t²` to soften the logarithm at the origin.
fn cauchy_log_potential(x: Complex64, q: Quadrature) -> Result<f64> {
    let (a, b) = (x.re, x.im.abs());
    let f = |y: f64| 1.0 / (std::f64::consts::PI * (1.0 + y * y));
    let pair = |u: f64| f(a + u) + f(a - u);
    let log_dist = |u: f64| 0.5 * (u * u + b * b).ln();
    let head = integrate(
        |t: f64| {
            let u = t * t;
            if u == 0.0 && b == 0.0 {
                return 0.0;
            }
            2.0 * t * log_dist(u) * pair(u)
        },
        0.0,
        1.0,
        q,
    )?;
    // Split once more where the mirrored density peaks.
    let mid = a.abs().max(1.0);
    let body = if mid > 1.0 {
        integrate(|u| log_dist(u) * pair(u), 1.0, mid, q)?
    } else {
        0.0
    };
    let tail = integrate_to_infinity(|u| log_dist(u) * pair(u), mid, q)?;
    Ok(head + body + tail)
}

/// `∫ log|x - y| dμ(y)` for the spherical law via the circle average
/// `(1/2π) ∫ log|x - r e^{iφ}| dφ = log max(|x|, r)`:
/// `log|x| · F(|x|) + ∫_{|x|}^∞ log r · F'(r) dr`, `F(r) = r²/(1 + r²)`.
fn spherical_log_potential(x: Complex64, q: Quadrature) -> Result<f64> {
    let s = x.norm();
    let radial = |r: f64| {
        let d = 1.0 + r * r;
        2.0 * r / (d * d)
    };
    let inner = if s == 0.0 {
        0.0
    } else {
        s.ln() * ClosedFormLaw::Spherical.cdf(s)
    };
    let outer = if s < 1.0 {
        let near = integrate(
            |r: f64| if r == 0.0 { 0.0 } else { r.ln() * radial(r) },
            s,
            1.0,
            q,
        )?;
        near + integrate_to_infinity(|r: f64| r.ln() * radial(r), 1.0, q)?
    } else {
        integrate_to_infinity(|r: f64| r.ln() * radial(r), s, q)?
    };
    Ok(inner + outer)
}

/// Effective potential `U(x) = β ∫ log(1/|x - y|) dμ(y) + V(x)` at each probe.
/// For the equilibrium measure `U` is constant on its support.
pub fn el_residual(candidate: Candidate<'_>, model: &GasModel, probes: &[Complex64]) -> Result<Vec<f64>> {
    let beta = model.beta();
    let q = Quadrature::default();
    probes
        .iter()
        .map(|&x| {
            let log_potential = match candidate {
                Candidate::Law(ClosedFormLaw::Cauchy) => cauchy_log_potential(x, q)?,
                Candidate::Law(ClosedFormLaw::Spherical) => spherical_log_potential(x, q)?,
                Candidate::Law(other) => {
                    return Err(Error::Unsupported(format!(
                        "law {} lives on the sphere",
                        other.name()
                    )))
                }
                Candidate::Measure(mu) => {
                    let mut acc = crate::numerics::NeumaierSum::new();
                    for &(y, w) in mu.atoms() {
                        if w == 0.0 {
                            continue;
                        }
                        let d = (x - y).norm();
                        if d < COINCIDENCE {
                            return Ok(f64::INFINITY);
                        }
                        acc.add(w * d.ln());
                    }
                    acc.value()
                }
            };
            Ok(-beta * log_potential + model.v(x))
        })
        .collect()
}
