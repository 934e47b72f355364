//! Weighted logarithmic kernels and discrete energies on the plane and on
//! the sphere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{project, sphere_distance, CompactifiedPotential, SpherePoint};
use crate::model::{empirical_measure, Configuration, DiscreteMeasure, GasModel};
use crate::numerics::{chunked_sum, map_indexed};
use crate::{Error, Execution, Result};

/// Separations below this are treated as coincident.
pub const COINCIDENCE: f64 = 1e-300;

#[inline]
fn log_inv(d: f64) -> f64 {
    if d < COINCIDENCE {
        f64::INFINITY
    } else {
        -d.ln()
    }
}

/// How the diagonal `a = b` of a discrete energy is treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagonalPolicy {
    /// Only pairs of distinct atoms contribute.
    #[default]
    OffDiagonalOnly,
    /// Each atom also contributes `w_a² K_aa` with the log singularity
    /// replaced by `log(1/(h_a/2))`, `h_a` the distance to its nearest
    /// neighbouring atom.
    RegularizedSelfEnergy,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    #[serde(with = "crate::model::ext_real")]
    pub value: f64,
    pub diagonal_policy: DiagonalPolicy,
    /// Ordered pairs of distinct atoms summed over.
    pub pair_count: usize,
}

/// `(β/2) log(1/|x - y|) + V(x)/2 + V(y)/2`.
pub fn kernel_planar(x: Complex64, y: Complex64, model: &GasModel) -> f64 {
    0.5 * model.beta() * log_inv((x - y).norm()) + 0.5 * model.v(x) + 0.5 * model.v(y)
}

/// `(β/2) log(1/|z - w|) + 𝒱(z)/2 + 𝒱(w)/2`.
pub fn kernel_sphere(z: SpherePoint, w: SpherePoint, cpot: &CompactifiedPotential) -> f64 {
    0.5 * cpot.model().beta() * log_inv(sphere_distance(z, w))
        + 0.5 * cpot.evaluate(z)
        + 0.5 * cpot.evaluate(w)
}

/// Regularized diagonal kernel value `(β/2) log(2/h) + U` for an atom with
/// nearest-neighbour distance `h` and one-body potential value `U`.
#[inline]
pub fn self_kernel(beta: f64, h: f64, potential: f64) -> f64 {
    0.5 * beta * (2.0 / h).ln() + potential
}

/// Distance from each point to its nearest other point.
pub fn nearest_neighbor_distances<P, D>(points: &[P], dist: D, exec: Execution) -> Vec<f64>
where
    P: Sync,
    D: Fn(&P, &P) -> f64 + Sync + Send,
{
    map_indexed(points.len(), exec, |a| {
        points
            .iter()
            .enumerate()
            .filter(|&(b, _)| b != a)
            .map(|(_, q)| dist(&points[a], q))
            .fold(f64::INFINITY, f64::min)
    })
}

fn discrete_energy<P, K, S>(
    atoms: &[(P, f64)],
    policy: DiagonalPolicy,
    exec: Execution,
    kernel: K,
    self_term: S,
) -> Result<EnergyReport>
where
    P: Copy + Sync,
    K: Fn(P, P) -> f64 + Sync + Send,
    S: Fn(usize) -> f64 + Sync + Send,
{
    let m = atoms.len();
    let off = chunked_sum(m, exec, |a| {
        let (pa, wa) = atoms[a];
        if wa == 0.0 {
            return 0.0;
        }
        let mut acc = crate::numerics::NeumaierSum::new();
        for (b, &(pb, wb)) in atoms.iter().enumerate() {
            if b != a && wb != 0.0 {
                acc.add(wb * kernel(pa, pb));
            }
        }
        wa * acc.value()
    });
    let value = match policy {
        DiagonalPolicy::OffDiagonalOnly => off,
        DiagonalPolicy::RegularizedSelfEnergy => {
            if m < 2 {
                return Err(Error::InvalidMeasure(
                    "regularized self-energy needs at least two atoms".into(),
                ));
            }
            let diag = chunked_sum(m, exec, |a| {
                let w = atoms[a].1;
                if w == 0.0 {
                    0.0
                } else {
                    w * w * self_term(a)
                }
            });
            off + diag
        }
    };
    Ok(EnergyReport {
        value,
        diagonal_policy: policy,
        pair_count: m * (m - 1),
    })
}

/// Discrete surrogate of the weighted energy `I_V(μ)` for a measure on the plane.
pub fn measure_energy(
    mu: &DiscreteMeasure<Complex64>,
    model: &GasModel,
    policy: DiagonalPolicy,
    exec: Execution,
) -> Result<EnergyReport> {
    let atoms = mu.atoms();
    let h = match policy {
        DiagonalPolicy::RegularizedSelfEnergy => {
            let pts = mu.positions();
            nearest_neighbor_distances(&pts, |a, b| (a - b).norm(), exec)
        }
        DiagonalPolicy::OffDiagonalOnly => Vec::new(),
    };
    let beta = model.beta();
    discrete_energy(
        atoms,
        policy,
        exec,
        |x, y| kernel_planar(x, y, model),
        |a| self_kernel(beta, h[a], model.v(atoms[a].0)),
    )
}

/// Discrete surrogate of `I_𝒱(ν)` for a measure on the sphere.
pub fn measure_energy_sphere(
    nu: &DiscreteMeasure<SpherePoint>,
    cpot: &CompactifiedPotential,
    policy: DiagonalPolicy,
    exec: Execution,
) -> Result<EnergyReport> {
    let atoms = nu.atoms();
    let h = match policy {
        DiagonalPolicy::RegularizedSelfEnergy => {
            let pts = nu.positions();
            nearest_neighbor_distances(&pts, |a, b| sphere_distance(*a, *b), exec)
        }
        DiagonalPolicy::OffDiagonalOnly => Vec::new(),
    };
    let beta = cpot.model().beta();
    discrete_energy(
        atoms,
        policy,
        exec,
        |z, w| kernel_sphere(z, w, cpot),
        |a| self_kernel(beta, h[a], cpot.evaluate(atoms[a].0)),
    )
}

/// `(1/N²) Σ_{i≠j} F_V(x_i, x_j)`.
pub fn config_energy(config: &Configuration, model: &GasModel, exec: Execution) -> Result<f64> {
    if let Some((i, j)) = config.coincident_pair() {
        return Err(Error::CoincidentPoints(i, j));
    }
    let mu = empirical_measure(config);
    Ok(measure_energy(&mu, model, DiagonalPolicy::OffDiagonalOnly, exec)?.value)
}

fn pair_log_sum<P, D>(points: &[P], dist: D) -> f64
where
    P: Sync,
    D: Fn(&P, &P) -> f64 + Sync + Send,
{
    let n = points.len();
    let rows = map_indexed(n, Execution::default(), |i| {
        let mut acc = crate::numerics::NeumaierSum::new();
        for j in (i + 1)..n {
            let d = dist(&points[i], &points[j]);
            if d < COINCIDENCE {
                return f64::NEG_INFINITY;
            }
            acc.add(d.ln());
        }
        acc.value()
    });
    if rows.contains(&f64::NEG_INFINITY) {
        return f64::NEG_INFINITY;
    }
    crate::numerics::compensated_sum(rows)
}

/// Unnormalized log-density `β Σ_{i<j} log|x_i - x_j| - N Σ_i V(x_i)`;
/// `-∞` on coincident points.
pub fn log_density(config: &Configuration, model: &GasModel) -> f64 {
    let pts = config.points();
    let pairs = pair_log_sum(pts, |a, b| (a - b).norm());
    if pairs == f64::NEG_INFINITY {
        return pairs;
    }
    let n = pts.len() as f64;
    let one_body = crate::numerics::compensated_sum(pts.iter().map(|&x| model.v(x)));
    model.beta() * pairs - n * one_body
}

/// The same log-density written on the sphere:
/// `β Σ_{i<j} log|z_i - z_j| + (β/2) Σ_i log(1 - |z_i|²) - N Σ_i 𝒱(z_i)`
/// with `z_i = T(x_i)`.
pub fn log_density_sphere(config: &Configuration, cpot: &CompactifiedPotential) -> f64 {
    let zs: Vec<SpherePoint> = config.points().iter().map(|&x| project(x)).collect();
    let pairs = pair_log_sum(&zs, |a, b| sphere_distance(*a, *b));
    if pairs == f64::NEG_INFINITY {
        return pairs;
    }
    let beta = cpot.model().beta();
    let n = zs.len() as f64;
    let jacobian = crate::numerics::compensated_sum(zs.iter().map(|z| z.pole_gap().ln()));
    let one_body = crate::numerics::compensated_sum(zs.iter().map(|&z| cpot.evaluate(z)));
    beta * pairs + 0.5 * beta * jacobian - n * one_body
}

/// Logarithmic energy of the signed measure `μ - ν` on the sphere, with the
/// diagonal handled according to `policy`. Both measures must list the same
/// atom positions (in any order).
pub fn signed_log_energy(
    mu: &DiscreteMeasure<SpherePoint>,
    nu: &DiscreteMeasure<SpherePoint>,
    policy: DiagonalPolicy,
    exec: Execution,
) -> Result<f64> {
    use crate::model::AtomPosition;
    use std::collections::HashMap;

    if mu.len() != nu.len() {
        return Err(Error::MismatchedSupports);
    }
    let index: HashMap<_, usize> = nu
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, (p, _))| (p.key(), i))
        .collect();
    let mut atoms = Vec::with_capacity(mu.len());
    for &(p, w) in mu.atoms() {
        let j = *index.get(&p.key()).ok_or(Error::MismatchedSupports)?;
        atoms.push((p, w - nu.atoms()[j].1));
    }
    let m = atoms.len();
    let off = chunked_sum(m, exec, |a| {
        let (pa, da) = atoms[a];
        if da == 0.0 {
            return 0.0;
        }
        let mut acc = crate::numerics::NeumaierSum::new();
        for (b, &(pb, db)) in atoms.iter().enumerate() {
            if b != a && db != 0.0 {
                acc.add(db * log_inv(sphere_distance(pa, pb)));
            }
        }
        da * acc.value()
    });
    match policy {
        DiagonalPolicy::OffDiagonalOnly => Ok(off),
        DiagonalPolicy::RegularizedSelfEnergy => {
            if m < 2 {
                return Err(Error::InvalidMeasure(
                    "regularized self-energy needs at least two atoms".into(),
                ));
            }
            let pts: Vec<SpherePoint> = atoms.iter().map(|a| a.0).collect();
            let h = nearest_neighbor_distances(&pts, |a, b| sphere_distance(*a, *b), exec);
            let diag = chunked_sum(m, exec, |a| {
                let d = atoms[a].1;
                d * d * (2.0 / h[a]).ln()
            });
            Ok(off + diag)
        }
    }
}
