use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::{closed_form, Grid, GridSpec};
use crate::energy::{nearest_neighbor_distances, self_kernel, DiagonalPolicy, EnergyReport};
use crate::model::{DiscreteMeasure, GasModel};
use crate::numerics::{compensated_sum, map_indexed, NeumaierSum};
use crate::{Error, Execution, Result};

/// Above this many atoms the kernel matrix is not stored.
const DENSE_LIMIT: usize = 4096;
/// Frank–Wolfe iterations between exact gradient refreshes.
const REFRESH: usize = 256;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Pairwise Frank–Wolfe with exact line search.
    #[default]
    PairwiseFrankWolfe,
    /// Accelerated projected gradient with adaptive restart.
    ProjectedGradient,
}

/// Starting weight vector.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    #[default]
    Uniform,
    /// Dirichlet(1, …, 1) weights from the given seed.
    Random(u64),
    Weights(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Target duality gap.
    pub tol: f64,
    pub max_iter: usize,
    pub method: Method,
    pub init: Init,
    pub exec: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 200_000,
            method: Method::default(),
            init: Init::Uniform,
            exec: Execution::default(),
        }
    }
}

/// Summary written next to a minimizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub energy: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub captured_mass: Option<f64>,
    pub density_l1: Option<f64>,
    pub method: Method,
    pub atoms: usize,
}

#[derive(Clone, Debug)]
pub struct EquilibriumResult {
    pub grid: Grid,
    pub weights: Vec<f64>,
    /// Regularized discrete energy of `weights`.
    pub energy: f64,
    /// Frank–Wolfe duality gap at `weights`.
    pub gap: f64,
    pub iterations: usize,
    /// Whether the gap reached the tolerance. When false, `weights` is the
    /// best iterate found.
    pub converged: bool,
    pub energy_trace: Vec<f64>,
    /// Closed-form mass captured by the window, when a closed form exists.
    pub captured_mass: Option<f64>,
    /// L1 distance between cell weights and the window-renormalized closed form.
    pub density_l1: Option<f64>,
    pub method: Method,
}

impl EquilibriumResult {
    pub fn measure(&self) -> DiscreteMeasure<Complex64> {
        let total = compensated_sum(self.weights.iter().copied());
        DiscreteMeasure::from_atoms_unchecked(
            self.grid
                .atoms()
                .iter()
                .zip(&self.weights)
                .map(|(&p, &w)| (p, w / total))
                .collect(),
        )
    }

    pub fn energy_report(&self) -> EnergyReport {
        let m = self.grid.len();
        EnergyReport {
            value: self.energy,
            diagonal_policy: DiagonalPolicy::RegularizedSelfEnergy,
            pair_count: m * (m - 1),
        }
    }

    pub fn report(&self) -> SolverReport {
        SolverReport {
            energy: self.energy,
            gap: self.gap,
            iterations: self.iterations,
            converged: self.converged,
            captured_mass: self.captured_mass,
            density_l1: self.density_l1,
            method: self.method,
            atoms: self.grid.len(),
        }
    }
}

/// The quadratic form `E(w) = Σ_ab w_a w_b K_ab` of the regularized energy.
struct Kernel<'a> {
    atoms: &'a [Complex64],
    potential: Vec<f64>,
    diag: Vec<f64>,
    half_beta: f64,
    dense: Option<Vec<f64>>,
    exec: Execution,
}

impl<'a> Kernel<'a> {
    fn new(model: &GasModel, atoms: &'a [Complex64], exec: Execution) -> Self {
        let m = atoms.len();
        let potential: Vec<f64> = atoms.iter().map(|&x| model.v(x)).collect();
        let h = nearest_neighbor_distances(atoms, |a, b| (a - b).norm(), exec);
        let beta = model.beta();
        let diag = (0..m).map(|a| self_kernel(beta, h[a], potential[a])).collect();
        let mut k = Self {
            atoms,
            potential,
            diag,
            half_beta: 0.5 * beta,
            dense: None,
            exec,
        };
        if m <= DENSE_LIMIT {
            let rows = map_indexed(m, exec, |a| (0..m).map(|b| k.entry(a, b)).collect::<Vec<_>>());
            k.dense = Some(rows.concat());
        }
        k
    }

    fn len(&self) -> usize {
        self.atoms.len()
    }

    #[inline]
    fn entry(&self, a: usize, b: usize) -> f64 {
        if let Some(d) = &self.dense {
            return d[a * self.len() + b];
        }
        if a == b {
            self.diag[a]
        } else {
            -self.half_beta * (self.atoms[a] - self.atoms[b]).norm().ln()
                + 0.5 * (self.potential[a] + self.potential[b])
        }
    }

    fn column(&self, s: usize, out: &mut [f64]) {
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.entry(a, s);
        }
    }

    /// `2 K w`, each row summed in index order.
    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let m = self.len();
        map_indexed(m, self.exec, |a| {
            let mut acc = NeumaierSum::new();
            for (b, &wb) in w.iter().enumerate() {
                if wb != 0.0 {
                    acc.add(self.entry(a, b) * wb);
                }
            }
            2.0 * acc.value()
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

fn argmin(g: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in g.iter().enumerate() {
        if v < g[best] {
            best = i;
        }
    }
    best
}

/// `⟨g, w⟩ - min g`, the Frank–Wolfe gap (`g` is the gradient at `w`).
fn fw_gap(g: &[f64], w: &[f64]) -> f64 {
    (dot(g, w) - g[argmin(g)]).max(0.0)
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumulative += uj;
        let t = (cumulative - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn initial_weights(init: &Init, m: usize) -> Result<Vec<f64>> {
    match init {
        Init::Uniform => Ok(vec![1.0 / m as f64; m]),
        Init::Random(seed) => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let raw: Vec<f64> = (0..m).map(|_| Exp1.sample(&mut rng)).collect();
            let total: f64 = raw.iter().sum();
            Ok(raw.into_iter().map(|x| x / total).collect())
        }
        Init::Weights(w) => {
            if w.len() != m {
                return Err(Error::InvalidMeasure(format!(
                    "initial weights have length {}, grid has {m} atoms",
                    w.len()
                )));
            }
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidMeasure(
                    "initial weights must be nonnegative".into(),
                ));
            }
            let total = compensated_sum(w.iter().copied());
            if (total - 1.0).abs() > crate::model::MASS_TOL {
                return Err(Error::InvalidMeasure(format!("initial weights sum to {total}")));
            }
            Ok(w.clone())
        }
    }
}

struct Outcome {
    weights: Vec<f64>,
    iterations: usize,
    trace: Vec<f64>,
}

fn pairwise_frank_wolfe(k: &Kernel, mut w: Vec<f64>, tol: f64, max_iter: usize) -> Outcome {
    let m = k.len();
    let mut g = k.gradient(&w);
    let mut energy = 0.5 * dot(&g, &w);
    let mut trace = vec![energy];
    let mut col_s = vec![0.0; m];
    let mut col_a = vec![0.0; m];
    let mut iterations = 0;
    while iterations < max_iter {
        if iterations > 0 && iterations % REFRESH == 0 {
            g = k.gradient(&w);
            energy = 0.5 * dot(&g, &w);
        }
        let s = argmin(&g);
        if fw_gap(&g, &w) <= tol {
            break;
        }
        let mut a = s;
        for (i, (&gi, &wi)) in g.iter().zip(&w).enumerate() {
            if wi > 0.0 && (a == s || gi > g[a]) {
                a = i;
            }
        }
        if a == s {
            break;
        }
        k.column(s, &mut col_s);
        k.column(a, &mut col_a);
        let slope = g[s] - g[a];
        let curvature = col_s[s] + col_a[a] - 2.0 * col_s[a];
        let gamma = if curvature > 0.0 {
            (-slope / (2.0 * curvature)).min(w[a])
        } else {
            w[a]
        };
        w[s] += gamma;
        if gamma >= w[a] {
            w[a] = 0.0;
        } else {
            w[a] -= gamma;
        }
        for i in 0..m {
            g[i] += 2.0 * gamma * (col_s[i] - col_a[i]);
        }
        energy += gamma * slope + gamma * gamma * curvature;
        trace.push(energy);
        iterations += 1;
    }
    Outcome {
        weights: w,
        iterations,
        trace,
    }
}

/// Largest eigenvalue of `K` restricted to zero-sum vectors, by power iteration.
fn restricted_norm(k: &Kernel) -> f64 {
    let m = k.len();
    let center = |v: &mut Vec<f64>| {
        let mean = v.iter().sum::<f64>() / m as f64;
        v.iter_mut().for_each(|x| *x -= mean);
    };
    let mut v: Vec<f64> = (0..m)
        .map(|i| ((i * 7919) % 104729) as f64 / 104729.0 - 0.5)
        .collect();
    center(&mut v);
    let mut lambda = 0.0;
    for _ in 0..100 {
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let mut kv: Vec<f64> = k.gradient(&v).into_iter().map(|x| 0.5 * x).collect();
        center(&mut kv);
        lambda = dot(&v, &kv).abs();
        v = kv;
    }
    lambda
}

fn projected_gradient(k: &Kernel, mut w: Vec<f64>, tol: f64, max_iter: usize) -> Outcome {
    let lipschitz = 2.0 * restricted_norm(k) * 1.1;
    let step = 1.0 / lipschitz.max(f64::MIN_POSITIVE);
    let mut y = w.clone();
    let mut t = 1.0f64;
    let mut g_w = k.gradient(&w);
    let mut trace = vec![0.5 * dot(&g_w, &w)];
    let mut iterations = 0;
    while iterations < max_iter && fw_gap(&g_w, &w) > tol {
        let g_y = k.gradient(&y);
        let next = project_simplex(&y.iter().zip(&g_y).map(|(a, b)| a - step * b).collect::<Vec<_>>());
        let g_next = k.gradient(&next);
        let e_next = 0.5 * dot(&g_next, &next);
        let increased = e_next > *trace.last().expect("trace is never empty");
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        if increased && t > 1.0 {
            // Restart momentum from the last iterate. A plain projected step
            // (t = 1) is accepted regardless, since any increase is rounding.
            y = w.clone();
            t = 1.0;
            iterations += 1;
            continue;
        }
        let beta = (t - 1.0) / t_next;
        y = next.iter().zip(&w).map(|(a, b)| a + beta * (a - b)).collect();
        t = t_next;
        w = next;
        g_w = g_next;
        trace.push(e_next);
        iterations += 1;
    }
    Outcome {
        weights: w,
        iterations,
        trace,
    }
}

/// Minimizes the regularized discrete energy over weights on the grid atoms.
pub fn grid_minimize(
    model: &GasModel,
    grid: &GridSpec,
    options: &SolverOptions,
) -> Result<EquilibriumResult> {
    model.require_admissible()?;
    if !model.support().admits_solver() {
        return Err(Error::Unsupported(format!(
            "the equilibrium solver needs the real line or the complex plane, not {}",
            model.support()
        )));
    }
    if !(options.tol.is_finite() && options.tol >= 0.0) {
        return Err(Error::InvalidModel(format!(
            "tolerance {} is invalid",
            options.tol
        )));
    }
    minimize_on_grid(model, grid.build(model.support())?, options)
}

/// [`grid_minimize`] on a prebuilt grid, for example a relabeled one.
pub fn minimize_on_grid(model: &GasModel, grid: Grid, options: &SolverOptions) -> Result<EquilibriumResult> {
    model.require_admissible()?;
    if grid.support() != model.support() {
        return Err(Error::MismatchedSupports);
    }
    if !(options.tol.is_finite() && options.tol >= 0.0) {
        return Err(Error::InvalidModel(format!(
            "tolerance {} is invalid",
            options.tol
        )));
    }
    let m = grid.len();
    let w0 = initial_weights(&options.init, m)?;
    let kernel = Kernel::new(model, grid.atoms(), options.exec);
    let method = if m > DENSE_LIMIT {
        Method::PairwiseFrankWolfe
    } else {
        options.method
    };
    let outcome = match method {
        Method::PairwiseFrankWolfe => pairwise_frank_wolfe(&kernel, w0, options.tol, options.max_iter),
        Method::ProjectedGradient => projected_gradient(&kernel, w0, options.tol, options.max_iter),
    };
    let g = kernel.gradient(&outcome.weights);
    let energy = 0.5 * dot(&g, &outcome.weights);
    let gap = fw_gap(&g, &outcome.weights);
    let (captured_mass, density_l1) = match closed_form(model) {
        Ok(law) => {
            let (c, l1) = grid.compare(&outcome.weights, law)?;
            (Some(c), Some(l1))
        }
        Err(_) => (None, None),
    };
    Ok(EquilibriumResult {
        grid,
        weights: outcome.weights,
        energy,
        gap,
        iterations: outcome.iterations,
        converged: gap <= options.tol,
        energy_trace: outcome.trace,
        captured_mass,
        density_l1,
        method,
    })
}
