use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::energy::{log_density, COINCIDENCE};
use crate::model::{
    admissibility_check, initial_configuration, Configuration, GasModel, GrowthClass, Support,
};
use crate::numerics::map_indexed;
use crate::{Error, Execution, Result};

/// Acceptance rate the step scale is tuned toward during burn-in.
pub const TARGET_ACCEPTANCE: f64 = 0.3;
/// Exponent of the Robbins–Monro gain `(k + 1)^-0.6`.
const GAIN_DECAY: f64 = 0.6;
/// Share of Cauchy-distributed steps used for weakly confined models.
const DEFAULT_HEAVY_TAIL: f64 = 0.1;
/// Sweeps between exact recomputations of the tracked log-density.
const RESYNC: usize = 100;

/// Mixture of Cauchy-distributed steps into the Gaussian proposal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeavyTail {
    /// 10% Cauchy steps when the model's growth is classified `WeakOnly`,
    /// none otherwise.
    #[default]
    Auto,
    Off,
    Fraction(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    /// Total sweeps, burn-in included.
    pub sweeps: usize,
    pub burn_in: usize,
    /// Initial random-walk step.
    pub step_scale: f64,
    /// Tune the step toward the target acceptance during burn-in.
    pub adapt: bool,
    pub seed: u64,
    /// Record every `thin`-th sweep after burn-in.
    pub thin: usize,
    #[serde(default)]
    pub heavy_tail: HeavyTail,
}

impl ChainParams {
    /// Defaults: burn-in `min(1000, sweeps / 2)`, step 0.1, adaptation on,
    /// no thinning.
    pub fn new(sweeps: usize, seed: u64) -> Self {
        Self {
            sweeps,
            burn_in: (sweeps / 2).min(1000),
            step_scale: 0.1,
            adapt: true,
            seed,
            thin: 1,
            heavy_tail: HeavyTail::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.sweeps == 0 {
            return bad("sweeps must be >= 1".into());
        }
        if self.burn_in >= self.sweeps {
            return bad(format!(
                "burn_in ({}) must be smaller than sweeps ({})",
                self.burn_in, self.sweeps
            ));
        }
        if !(self.step_scale.is_finite() && self.step_scale > 0.0) {
            return bad(format!("step_scale must be > 0, got {}", self.step_scale));
        }
        if self.thin == 0 {
            return bad("thin must be >= 1".into());
        }
        if let HeavyTail::Fraction(p) = self.heavy_tail {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("heavy-tail fraction must be in [0, 1], got {p}"));
            }
        }
        Ok(())
    }

    pub fn recorded_sweeps(&self) -> usize {
        (self.sweeps - self.burn_in).div_ceil(self.thin)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub len: usize,
    pub first: f64,
    pub last: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    /// Accepted over proposed single-particle moves after burn-in.
    pub acceptance_rate: f64,
    pub burn_in_acceptance_rate: f64,
    pub final_step_scale: f64,
    pub heavy_tail_fraction: f64,
    /// `-log_density / N²` after every sweep.
    pub energy_trace: Vec<f64>,
}

impl ChainStats {
    pub fn trace_summary(&self) -> TraceSummary {
        let t = &self.energy_trace;
        let len = t.len();
        TraceSummary {
            len,
            first: t.first().copied().unwrap_or(f64::NAN),
            last: t.last().copied().unwrap_or(f64::NAN),
            mean: crate::numerics::compensated_sum(t.iter().copied()) / len.max(1) as f64,
            min: t.iter().copied().fold(f64::INFINITY, f64::min),
            max: t.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recorded {
    pub sweep: usize,
    pub config: Configuration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainOutput {
    pub chain: usize,
    pub samples: Vec<Recorded>,
    pub stats: ChainStats,
}

impl ChainOutput {
    /// All recorded particle positions, in sweep then particle order.
    pub fn pooled(&self) -> Vec<Complex64> {
        self.samples
            .iter()
            .flat_map(|r| r.config.points().iter().copied())
            .collect()
    }
}

/// The generator of chain `chain`: one ChaCha8 stream per chain index.
pub fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

/// `log_density(x with x_i replaced) - log_density(x)`, in `O(N)`.
pub fn log_acceptance_ratio(model: &GasModel, points: &[Complex64], i: usize, proposal: Complex64) -> f64 {
    let current = points[i];
    let mut acc = 0.0;
    for (j, &xj) in points.iter().enumerate() {
        if j == i {
            continue;
        }
        let d_new = (proposal - xj).norm_sqr();
        if d_new.sqrt() < COINCIDENCE {
            return f64::NEG_INFINITY;
        }
        acc += (d_new / (current - xj).norm_sqr()).ln();
    }
    let n = points.len() as f64;
    0.5 * model.beta() * acc - n * (model.v(proposal) - model.v(current))
}

fn heavy_tail_fraction(model: &GasModel, h: HeavyTail) -> f64 {
    match h {
        HeavyTail::Off => 0.0,
        HeavyTail::Fraction(p) => p,
        HeavyTail::Auto => match admissibility_check(model) {
            Ok(a) if a.class == GrowthClass::WeakOnly => DEFAULT_HEAVY_TAIL,
            _ => 0.0,
        },
    }
}

fn propose<R: Rng>(rng: &mut R, support: Support, x: Complex64, step: f64, heavy: f64) -> Complex64 {
    let draw = |rng: &mut R| -> f64 {
        if heavy > 0.0 && rng.random::<f64>() < heavy {
            Cauchy::new(0.0, 1.0).expect("unit scale").sample(rng)
        } else {
            StandardNormal.sample(rng)
        }
    };
    match support {
        Support::ComplexPlane => {
            let a = draw(rng);
            let b = draw(rng);
            x + Complex64::new(a, b) * step
        }
        Support::UnitCircle => Complex64::from_polar(1.0, x.arg() + step * draw(rng)),
        _ => Complex64::new(x.re + step * draw(rng), 0.0),
    }
}

fn run_chain(
    model: &GasModel,
    init: &Configuration,
    params: &ChainParams,
    chain: usize,
) -> Result<ChainOutput> {
    params.validate()?;
    model.require_admissible()?;
    let init = Configuration::new(model, init.points().to_vec())?;
    if let Some((i, j)) = init.coincident_pair() {
        return Err(Error::CoincidentPoints(i, j));
    }
    let n = model.n();
    let support = model.support();
    let heavy = heavy_tail_fraction(model, params.heavy_tail);
    let mut rng = chain_rng(params.seed, chain);
    let mut x = init.into_points();
    let mut step = params.step_scale;
    let mut current = log_density(&Configuration::from_points_unchecked(x.clone()), model);
    let scale = 1.0 / (n * n) as f64;

    let mut samples = Vec::with_capacity(params.recorded_sweeps());
    let mut trace = Vec::with_capacity(params.sweeps);
    let (mut acc_burn, mut acc_main) = (0usize, 0usize);

    for sweep in 0..params.sweeps {
        let mut accepted = 0usize;
        for i in 0..n {
            let y = propose(&mut rng, support, x[i], step, heavy);
            let u: f64 = rng.random();
            if !support.contains(y) {
                continue;
            }
            let y = if support.is_real() {
                Complex64::new(y.re, 0.0)
            } else {
                y
            };
            let ratio = log_acceptance_ratio(model, &x, i, y);
            if ratio > f64::NEG_INFINITY && u.ln() < ratio {
                x[i] = y;
                current += ratio;
                accepted += 1;
            }
        }
        if sweep % RESYNC == RESYNC - 1 {
            current = log_density(&Configuration::from_points_unchecked(x.clone()), model);
        }
        trace.push(-current * scale);
        if sweep < params.burn_in {
            acc_burn += accepted;
            if params.adapt {
                let rate = accepted as f64 / n as f64;
                step *= ((rate - TARGET_ACCEPTANCE) / ((sweep + 1) as f64).powf(GAIN_DECAY)).exp();
            }
        } else {
            acc_main += accepted;
            if (sweep - params.burn_in).is_multiple_of(params.thin) {
                samples.push(Recorded {
                    sweep,
                    config: Configuration::from_points_unchecked(x.clone()),
                });
            }
        }
    }
    let main_moves = (params.sweeps - params.burn_in) * n;
    let burn_moves = params.burn_in * n;
    Ok(ChainOutput {
        chain,
        samples,
        stats: ChainStats {
            acceptance_rate: acc_main as f64 / main_moves as f64,
            burn_in_acceptance_rate: if burn_moves == 0 {
                0.0
            } else {
                acc_burn as f64 / burn_moves as f64
            },
            final_step_scale: step,
            heavy_tail_fraction: heavy,
            energy_trace: trace,
        },
    })
}

/// Single-particle random-walk Metropolis chain targeting the Gibbs
/// density. Runs on stream 0 of `params.seed`.
pub fn mh_chain(model: &GasModel, init: &Configuration, params: &ChainParams) -> Result<ChainOutput> {
    run_chain(model, init, params, 0)
}

/// Runs `chains` independent chains, chain `k` on stream `k`, in parallel
/// when `exec` allows. Results are ordered by chain index. Without `init`
/// every chain starts from [`initial_configuration`].
pub fn run_chains(
    model: &GasModel,
    init: Option<&Configuration>,
    params: &ChainParams,
    chains: usize,
    exec: Execution,
) -> Result<Vec<ChainOutput>> {
    let start = match init {
        Some(c) => c.clone(),
        None => initial_configuration(model),
    };
    map_indexed(chains, exec, |k| run_chain(model, &start, params, k))
        .into_iter()
        .collect()
}
