use num_complex::Complex64;

use crate::energy::log_density;
use crate::model::{Configuration, GasModel, Support};
use crate::{Error, Result};

/// Sufficient-increase constant of the Armijo test.
const ARMIJO: f64 = 1e-4;
/// Relative size of a change in log-density that counts as rounding.
const ROUNDING: f64 = 1e-13;
const BACKTRACK: f64 = 0.5;
const MAX_HALVINGS: usize = 80;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DescentOptions {
    /// Initial step; `None` means `0.1 / N`.
    pub step: Option<f64>,
    pub max_iter: usize,
    /// Stop once the gradient norm falls below this.
    pub grad_tol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            step: None,
            max_iter: 20_000,
            grad_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescentResult {
    pub config: Configuration,
    pub log_density: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-density after each accepted step, starting with the initial value.
    pub trace: Vec<f64>,
}

/// Gradient of the log-density with respect to each particle, as
/// `∂_re + i ∂_im`: `β Σ_{j≠i} (x_i - x_j)/|x_i - x_j|² - N ∇V(x_i)`.
/// Imaginary parts are zero on real supports.
pub fn log_density_gradient(points: &[Complex64], model: &GasModel) -> Vec<Complex64> {
    let n = points.len() as f64;
    let beta = model.beta();
    let real = model.support().is_real();
    points
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let mut force = Complex64::new(0.0, 0.0);
            for (j, &xj) in points.iter().enumerate() {
                if j != i {
                    let d = xi - xj;
                    force += d / d.norm_sqr();
                }
            }
            let g = force * beta - model.potential().gradient(xi) * n;
            if real {
                Complex64::new(g.re, 0.0)
            } else {
                g
            }
        })
        .collect()
}

fn norm(g: &[Complex64]) -> f64 {
    g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Ascent direction `(1 + |x_i|²) g_i` and its slope `Σ (1 + |x_i|²)|g_i|²`.
/// The weights follow the chordal metric, so far particles move at a pace
/// comparable to the bulk.
fn precondition(x: &[Complex64], g: &[Complex64]) -> (Vec<Complex64>, f64) {
    let d: Vec<Complex64> = x
        .iter()
        .zip(g)
        .map(|(xi, &gi)| gi * (1.0 + xi.norm_sqr()))
        .collect();
    let slope = d
        .iter()
        .zip(g)
        .map(|(di, gi)| di.re * gi.re + di.im * gi.im)
        .sum();
    (d, slope)
}

/// Preconditioned gradient ascent on the log-density with Armijo backtracking. The step
/// halves until the sufficient-increase test passes, then doubles for the
/// next iteration.
pub fn fekete_descent(
    model: &GasModel,
    init: &Configuration,
    options: &DescentOptions,
) -> Result<DescentResult> {
    if !matches!(model.support(), Support::RealLine | Support::ComplexPlane) {
        return Err(Error::Unsupported(format!(
            "mode descent needs the real line or the complex plane, not {}",
            model.support()
        )));
    }
    if init.len() != model.n() {
        return Err(Error::InvalidConfiguration(format!(
            "expected {} points, got {}",
            model.n(),
            init.len()
        )));
    }
    if let Some((i, j)) = init.coincident_pair() {
        return Err(Error::CoincidentPoints(i, j));
    }
    let mut step = options.step.unwrap_or(0.1 / model.n() as f64);
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidModel(format!(
            "descent step must be positive, got {step}"
        )));
    }
    let mut x = init.points().to_vec();
    let mut value = log_density(init, model);
    let mut trace = vec![value];
    let mut g = log_density_gradient(&x, model);
    let mut gn = norm(&g);
    let (mut d, mut slope) = precondition(&x, &g);
    let mut iterations = 0;
    while iterations < options.max_iter && gn > options.grad_tol {
        let mut accepted = None;
        let mut s = step;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<Complex64> = x.iter().zip(&d).map(|(&xi, &di)| xi + di * s).collect();
            let v = log_density(&Configuration::from_points_unchecked(trial.clone()), model);
            if !v.is_finite() {
                s *= BACKTRACK;
                continue;
            }
            let gain = ARMIJO * s * slope;
            if gain > ROUNDING * value.abs().max(1.0) {
                if v >= value + gain {
                    accepted = Some((trial, v, None));
                    break;
                }
            } else if (v - value).abs() <= ROUNDING * value.abs().max(1.0) {
                // Below the resolution of the objective, fall back to
                // requiring a smaller gradient.
                let gt = log_density_gradient(&trial, model);
                if norm(&gt) < gn {
                    accepted = Some((trial, v, Some(gt)));
                    break;
                }
            } else if v > value {
                accepted = Some((trial, v, None));
                break;
            }
            s *= BACKTRACK;
        }
        match accepted {
            Some((trial, v, gt)) => {
                x = trial;
                value = v;
                trace.push(v);
                step = 2.0 * s;
                g = gt.unwrap_or_else(|| log_density_gradient(&x, model));
                gn = norm(&g);
                (d, slope) = precondition(&x, &g);
                iterations += 1;
            }
            None => break,
        }
    }
    Ok(DescentResult {
        config: Configuration::from_points_unchecked(x),
        log_density: value,
        grad_norm: gn,
        iterations,
        converged: gn <= options.grad_tol,
        trace,
    })
}
