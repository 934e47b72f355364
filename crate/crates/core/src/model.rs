//! Gas models, potentials, configurations and discrete measures.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on the imaginary part (and on `|x| = 1` for the circle) used by
/// support membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Closed subsets of `ℂ` a gas may live on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    RealLine,
    ComplexPlane,
    HalfLine,
    UnitSegment,
    UnitCircle,
}

impl Support {
    pub fn contains(self, x: Complex64) -> bool {
        if !(x.re.is_finite() && x.im.is_finite()) {
            return false;
        }
        let on_axis = x.im.abs() <= MEMBERSHIP_TOL;
        match self {
            Support::RealLine => on_axis,
            Support::ComplexPlane => true,
            Support::HalfLine => on_axis && x.re >= 0.0,
            Support::UnitSegment => on_axis && (0.0..=1.0).contains(&x.re),
            Support::UnitCircle => (x.norm() - 1.0).abs() <= MEMBERSHIP_TOL,
        }
    }

    /// Supports contained in the real axis.
    pub fn is_real(self) -> bool {
        matches!(self, Support::RealLine | Support::HalfLine | Support::UnitSegment)
    }

    pub fn is_bounded(self) -> bool {
        matches!(self, Support::UnitSegment | Support::UnitCircle)
    }

    /// Supports the equilibrium solvers accept.
    pub fn admits_solver(self) -> bool {
        matches!(self, Support::RealLine | Support::ComplexPlane)
    }

    /// Unit directions along which the support is unbounded.
    pub(crate) fn probe_directions(self) -> Vec<Complex64> {
        match self {
            Support::RealLine => vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            Support::HalfLine => vec![Complex64::new(1.0, 0.0)],
            Support::ComplexPlane => (0..8)
                .map(|k| Complex64::from_polar(1.0, k as f64 * std::f64::consts::FRAC_PI_4))
                .collect(),
            Support::UnitSegment | Support::UnitCircle => Vec::new(),
        }
    }

    /// Maps a point within membership tolerance onto the support exactly.
    fn canonicalize(self, x: Complex64) -> Complex64 {
        if self.is_real() {
            Complex64::new(x.re, 0.0)
        } else {
            x
        }
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Support::RealLine => "real_line",
            Support::ComplexPlane => "complex_plane",
            Support::HalfLine => "half_line",
            Support::UnitSegment => "unit_segment",
            Support::UnitCircle => "unit_circle",
        };
        f.write_str(s)
    }
}

/// `log(1 + |x|²)` without overflow for large `|x|`.
pub fn log1p_abs2(x: Complex64) -> f64 {
    let r = x.norm();
    if r > 1e8 {
        2.0 * r.ln() + (1.0 / (r * r)).ln_1p()
    } else {
        x.norm_sqr().ln_1p()
    }
}

/// Variable a custom polynomial is evaluated in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyVariable {
    /// The real coordinate `x`; only meaningful on real supports.
    X,
    /// The squared modulus `|x|²`.
    #[default]
    Abs2,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    /// `log(1 + x²)`.
    Cauchy,
    /// `log(1 + |x|²)`.
    Spherical,
    /// `|x|²`.
    Quadratic,
    /// `Σ_k poly[k] t^k + log_coeff · log(1 + |x|²)` with `t` given by `variable`.
    Custom {
        poly: Vec<f64>,
        log_coeff: f64,
        variable: PolyVariable,
    },
}

/// A potential together with its growth metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialDecl", into = "PotentialDecl")]
pub struct PotentialSpec {
    name: String,
    kind: PotentialKind,
    beta_prime: Option<f64>,
    v_infinity: Option<f64>,
}

/// Parameters of a custom potential as they appear in structured text.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomParams {
    #[serde(default)]
    pub poly: Vec<f64>,
    #[serde(default)]
    pub log_coeff: f64,
    #[serde(default)]
    pub variable: PolyVariable,
}

/// Serialized form `{name, params, beta_prime, v_infinity}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<CustomParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "ext_real::option")]
    pub v_infinity: Option<f64>,
}

impl TryFrom<PotentialDecl> for PotentialSpec {
    type Error = Error;

    fn try_from(d: PotentialDecl) -> Result<Self> {
        let builtin = match d.name.as_str() {
            "cauchy" => Some(PotentialSpec::cauchy()),
            "spherical" => Some(PotentialSpec::spherical()),
            "quadratic" => Some(PotentialSpec::quadratic()),
            _ => None,
        };
        match builtin {
            Some(mut spec) => {
                if d.params.is_some() {
                    return Err(Error::InvalidModel(format!(
                        "built-in potential `{}` takes no params",
                        d.name
                    )));
                }
                if d.v_infinity.is_some() {
                    return Err(Error::InvalidModel(format!(
                        "v_infinity of built-in potential `{}` is fixed",
                        d.name
                    )));
                }
                if let Some(bp) = d.beta_prime {
                    spec.beta_prime = Some(bp);
                }
                Ok(spec)
            }
            None => {
                let params = d.params.ok_or_else(|| {
                    Error::InvalidModel(format!(
                        "unknown potential `{}` (custom potentials need params)",
                        d.name
                    ))
                })?;
                PotentialSpec::custom(d.name, params, d.beta_prime, d.v_infinity)
            }
        }
    }
}

impl From<PotentialSpec> for PotentialDecl {
    fn from(p: PotentialSpec) -> Self {
        let builtin = !matches!(p.kind, PotentialKind::Custom { .. });
        let params = match p.kind {
            PotentialKind::Custom {
                poly,
                log_coeff,
                variable,
            } => Some(CustomParams {
                poly,
                log_coeff,
                variable,
            }),
            _ => None,
        };
        PotentialDecl {
            name: p.name,
            params,
            beta_prime: p.beta_prime,
            v_infinity: if builtin { None } else { p.v_infinity },
        }
    }
}

impl PotentialSpec {
    pub fn cauchy() -> Self {
        Self {
            name: "cauchy".into(),
            kind: PotentialKind::Cauchy,
            beta_prime: Some(2.0),
            v_infinity: Some(0.0),
        }
    }

    pub fn spherical() -> Self {
        Self {
            name: "spherical".into(),
            kind: PotentialKind::Spherical,
            beta_prime: Some(2.0),
            v_infinity: Some(0.0),
        }
    }

    pub fn quadratic() -> Self {
        Self {
            name: "quadratic".into(),
            kind: PotentialKind::Quadratic,
            beta_prime: Some(2.0),
            v_infinity: Some(f64::INFINITY),
        }
    }

    pub fn custom(
        name: impl Into<String>,
        params: CustomParams,
        beta_prime: Option<f64>,
        v_infinity: Option<f64>,
    ) -> Result<Self> {
        let name = name.into();
        if params.poly.iter().any(|c| !c.is_finite()) || !params.log_coeff.is_finite() {
            return Err(Error::InvalidModel(format!(
                "potential `{name}` has non-finite coefficients"
            )));
        }
        if let Some(bp) = beta_prime {
            if !bp.is_finite() {
                return Err(Error::InvalidModel("beta_prime must be finite".into()));
            }
        }
        if v_infinity.is_some_and(f64::is_nan) {
            return Err(Error::InvalidModel("v_infinity is NaN".into()));
        }
        Ok(Self {
            name,
            kind: PotentialKind::Custom {
                poly: params.poly,
                log_coeff: params.log_coeff,
                variable: params.variable,
            },
            beta_prime,
            v_infinity,
        })
    }

    /// Overrides the declared growth witness.
    pub fn with_beta_prime(mut self, beta_prime: Option<f64>) -> Self {
        self.beta_prime = beta_prime;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn beta_prime(&self) -> Option<f64> {
        self.beta_prime
    }

    /// The declared `V(∞)` metadata. For built-ins this is the value at `β = 2`;
    /// use [`PotentialSpec::v_infinity_at`] for other inverse temperatures.
    pub fn v_infinity(&self) -> Option<f64> {
        self.v_infinity
    }

    /// `liminf_{|x|→∞} V(x) - (β/2) log(1 + |x|²)` when known in closed form.
    pub fn v_infinity_at(&self, beta: f64) -> Option<f64> {
        match self.kind {
            PotentialKind::Cauchy | PotentialKind::Spherical => Some(if beta < 2.0 {
                f64::INFINITY
            } else if beta == 2.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }),
            PotentialKind::Quadratic => Some(f64::INFINITY),
            PotentialKind::Custom { .. } => self.v_infinity,
        }
    }

    pub fn evaluate(&self, x: Complex64) -> f64 {
        match &self.kind {
            PotentialKind::Cauchy | PotentialKind::Spherical => log1p_abs2(x),
            PotentialKind::Quadratic => x.norm_sqr(),
            PotentialKind::Custom {
                poly,
                log_coeff,
                variable,
            } => {
                let t = match variable {
                    PolyVariable::X => x.re,
                    PolyVariable::Abs2 => x.norm_sqr(),
                };
                let p = poly.iter().rev().fold(0.0, |acc, &c| acc * t + c);
                let l = if *log_coeff == 0.0 {
                    0.0
                } else {
                    log_coeff * log1p_abs2(x)
                };
                let v = p + l;
                if v.is_nan() {
                    f64::INFINITY
                } else {
                    v
                }
            }
        }
    }

    /// Gradient of `V` viewed as a function on `ℝ²`, packed as `∂_re + i ∂_im`.
    pub fn gradient(&self, x: Complex64) -> Complex64 {
        let log_grad = |x: Complex64| x * (2.0 / (1.0 + x.norm_sqr()));
        match &self.kind {
            PotentialKind::Cauchy | PotentialKind::Spherical => log_grad(x),
            PotentialKind::Quadratic => x * 2.0,
            PotentialKind::Custom {
                poly,
                log_coeff,
                variable,
            } => {
                let t = match variable {
                    PolyVariable::X => x.re,
                    PolyVariable::Abs2 => x.norm_sqr(),
                };
                let dp = poly
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (k, &c)| acc * t + k as f64 * c);
                let poly_part = match variable {
                    PolyVariable::X => Complex64::new(dp, 0.0),
                    PolyVariable::Abs2 => x * (2.0 * dp),
                };
                poly_part + log_grad(x) * *log_coeff
            }
        }
    }
}

/// Serde helper for extended reals: finite numbers as numbers, infinities as
/// the strings `"inf"` / `"-inf"` (JSON has no infinity literal).
pub mod ext_real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn encode(x: f64) -> Repr {
        if x.is_finite() {
            Repr::Num(x)
        } else if x > 0.0 {
            Repr::Text("inf".into())
        } else if x < 0.0 {
            Repr::Text("-inf".into())
        } else {
            Repr::Text("nan".into())
        }
    }

    fn decode<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.trim() {
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!(
                    "expected a number or \"inf\", found {other:?}"
                ))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        encode(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        decode(Repr::deserialize(d)?)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            v.map(encode).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<Repr>::deserialize(d)?.map(decode).transpose()
        }
    }
}

/// Support, inverse temperature, potential and particle count.
#[derive(Clone, Debug, PartialEq)]
pub struct GasModel {
    support: Support,
    beta: f64,
    potential: PotentialSpec,
    n: usize,
    weak_growth: bool,
}

impl GasModel {
    pub fn new(support: Support, beta: f64, potential: PotentialSpec, n: usize) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidModel(format!("beta must be > 0, got {beta}")));
        }
        if n == 0 {
            return Err(Error::InvalidModel("particle count must be >= 1".into()));
        }
        if let PotentialKind::Custom {
            variable: PolyVariable::X,
            ..
        } = potential.kind
        {
            if !support.is_real() {
                return Err(Error::InvalidModel(format!(
                    "polynomial in x needs a real support, got {support}"
                )));
            }
        }
        let weak_growth = potential.beta_prime.is_some_and(|bp| bp > 1.0 && bp >= beta);
        Ok(Self {
            support,
            beta,
            potential,
            n,
            weak_growth,
        })
    }

    /// `(cauchy, β = 2)` on the real line.
    pub fn cauchy(n: usize) -> Self {
        Self::new(Support::RealLine, 2.0, PotentialSpec::cauchy(), n).expect("valid built-in")
    }

    /// `(spherical, β = 2)` on the complex plane.
    pub fn spherical(n: usize) -> Self {
        Self::new(Support::ComplexPlane, 2.0, PotentialSpec::spherical(), n).expect("valid built-in")
    }

    /// `(quadratic, β = 2)` on the real line.
    pub fn quadratic(n: usize) -> Self {
        Self::new(Support::RealLine, 2.0, PotentialSpec::quadratic(), n).expect("valid built-in")
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether the declared `β'` witnesses the weak growth condition
    /// (`β' > 1` and `β' ≥ β`).
    pub fn weak_growth(&self) -> bool {
        self.weak_growth
    }

    /// Bounded supports need no growth condition.
    pub fn is_admissible(&self) -> bool {
        self.support.is_bounded() || self.weak_growth
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.support, self.beta, self.potential.clone(), n)
    }

    #[inline]
    pub fn v(&self, x: Complex64) -> f64 {
        self.potential.evaluate(x)
    }

    pub(crate) fn require_admissible(&self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(Error::InadmissibleModel(format!(
                "potential `{}` at beta = {} declares beta_prime = {:?}",
                self.potential.name, self.beta, self.potential.beta_prime
            )))
        }
    }
}

/// An ordered list of particle positions lying in the model's support.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    points: Vec<Complex64>,
}

impl Configuration {
    pub fn new(model: &GasModel, points: Vec<Complex64>) -> Result<Self> {
        if points.len() != model.n() {
            return Err(Error::InvalidConfiguration(format!(
                "expected {} points, got {}",
                model.n(),
                points.len()
            )));
        }
        Self::on_support(model.support(), points)
    }

    /// Builds a configuration checking only support membership.
    pub fn on_support(support: Support, points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConfiguration("no points".into()));
        }
        let mut canonical = Vec::with_capacity(points.len());
        for (i, &p) in points.iter().enumerate() {
            if !support.contains(p) {
                return Err(Error::InvalidConfiguration(format!(
                    "point {i} = {p} is not in {support}"
                )));
            }
            canonical.push(support.canonicalize(p));
        }
        Ok(Self { points: canonical })
    }

    pub fn from_real(model: &GasModel, xs: &[f64]) -> Result<Self> {
        Self::new(model, xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub(crate) fn from_points_unchecked(points: Vec<Complex64>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Complex64> {
        self.points
    }

    /// First pair of coincident points, if any.
    pub fn coincident_pair(&self) -> Option<(usize, usize)> {
        let mut seen: HashMap<_, usize> = HashMap::with_capacity(self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            if let Some(&j) = seen.get(&p.key()) {
                return Some((j, i));
            }
            seen.insert(p.key(), i);
        }
        None
    }
}

/// A deterministic, well-spread starting configuration for `model`.
pub fn initial_configuration(model: &GasModel) -> Configuration {
    let n = model.n();
    let nf = n as f64;
    let points: Vec<Complex64> = (0..n)
        .map(|k| {
            let kf = k as f64;
            match model.support() {
                Support::RealLine => {
                    if n == 1 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(-1.0 + 2.0 * kf / (nf - 1.0), 0.0)
                    }
                }
                Support::HalfLine => Complex64::new((kf + 1.0) / nf, 0.0),
                Support::UnitSegment => Complex64::new((kf + 0.5) / nf, 0.0),
                Support::UnitCircle => Complex64::from_polar(1.0, std::f64::consts::TAU * kf / nf),
                Support::ComplexPlane => {
                    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
                    Complex64::from_polar(((kf + 0.5) / nf).sqrt(), golden * kf)
                }
            }
        })
        .collect();
    Configuration::from_points_unchecked(points)
}

/// Positions usable as measure atoms. `key` identifies positions exactly,
/// with `-0.0` and `0.0` identified.
pub trait AtomPosition: Copy + PartialEq + fmt::Debug {
    type Key: Eq + std::hash::Hash;
    fn key(&self) -> Self::Key;
}

#[inline]
pub(crate) fn canonical_bits(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

impl AtomPosition for Complex64 {
    type Key = (u64, u64);

    fn key(&self) -> Self::Key {
        (canonical_bits(self.re), canonical_bits(self.im))
    }
}

/// Finitely many weighted atoms with total mass 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<P> {
    atoms: Vec<(P, f64)>,
}

/// Tolerance on the total mass of a probability measure.
pub const MASS_TOL: f64 = 1e-12;

impl<P: AtomPosition> DiscreteMeasure<P> {
    /// Merges duplicate positions (summing weights, keeping first-occurrence
    /// order) and checks that the weights form a probability vector.
    /// Zero-weight atoms are kept.
    pub fn new(atoms: Vec<(P, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let mut index: HashMap<P::Key, usize> = HashMap::with_capacity(atoms.len());
        let mut merged: Vec<(P, f64)> = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidMeasure(format!("weight {w} at {p:?}")));
            }
            match index.get(&p.key()) {
                Some(&i) => merged[i].1 += w,
                None => {
                    index.insert(p.key(), merged.len());
                    merged.push((p, w));
                }
            }
        }
        let total: f64 = crate::numerics::compensated_sum(merged.iter().map(|a| a.1));
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms: merged })
    }

    pub fn from_parts(positions: &[P], weights: &[f64]) -> Result<Self> {
        if positions.len() != weights.len() {
            return Err(Error::InvalidMeasure(
                "positions and weights differ in length".into(),
            ));
        }
        Self::new(positions.iter().copied().zip(weights.iter().copied()).collect())
    }

    /// Uniform weights on distinct positions.
    pub fn uniform(positions: &[P]) -> Result<Self> {
        let w = 1.0 / positions.len() as f64;
        let weights = vec![w; positions.len()];
        Self::from_parts(positions, &weights)
    }

    pub(crate) fn from_atoms_unchecked(atoms: Vec<(P, f64)>) -> Self {
        Self { atoms }
    }

    pub fn atoms(&self) -> &[(P, f64)] {
        &self.atoms
    }

    pub fn positions(&self) -> Vec<P> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.1).collect()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        crate::numerics::compensated_sum(self.atoms.iter().map(|a| a.1))
    }

    pub fn map_positions<Q: AtomPosition>(&self, f: impl Fn(P) -> Q) -> DiscreteMeasure<Q> {
        DiscreteMeasure {
            atoms: self.atoms.iter().map(|&(p, w)| (f(p), w)).collect(),
        }
    }
}

/// `μ^N = (1/N) Σ δ_{x_i}`, with coincident points merged into one atom of
/// weight `multiplicity / N`.
pub fn empirical_measure(config: &Configuration) -> DiscreteMeasure<Complex64> {
    let n = config.len();
    let mut index: HashMap<(u64, u64), usize> = HashMap::with_capacity(n);
    let mut counts: Vec<(Complex64, usize)> = Vec::with_capacity(n);
    for p in config.points() {
        match index.get(&p.key()) {
            Some(&i) => counts[i].1 += 1,
            None => {
                index.insert(p.key(), counts.len());
                counts.push((*p, 1));
            }
        }
    }
    DiscreteMeasure::from_atoms_unchecked(
        counts
            .into_iter()
            .map(|(p, k)| (p, k as f64 / n as f64))
            .collect(),
    )
}

/// Growth classification of a potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthClass {
    /// `liminf V / (β' log|x|) > 1`.
    Strong,
    /// `V - β' log|x|` bounded below, strong growth fails.
    WeakOnly,
    /// `V - β' log|x|` decreases without bound.
    Inadmissible,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub radius: f64,
    /// Minimum of `V` over the probe directions at this radius.
    pub potential: f64,
    /// `V / (β' log r)`.
    pub ratio: f64,
    /// `V - β' log r`.
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub class: GrowthClass,
    pub beta_prime: f64,
    pub probes: Vec<Probe>,
}

/// Dyadic probe exponents: radii `2^k` for `k = 4..=40`.
pub const PROBE_EXPONENTS: std::ops::RangeInclusive<i32> = 4..=40;
/// Number of trailing probe scales inspected for unbounded decrease.
pub const PROBE_TAIL: usize = 8;
/// A trailing excess below this value counts as divergence to `-∞`.
pub const PROBE_FLOOR: f64 = -50.0;
/// Minimum per-scale drop of the excess that counts as sustained decrease.
pub const PROBE_MIN_DROP: f64 = 0.01;
/// Slack on the strict inequality of the strong growth ratio.
pub const STRONG_SLACK: f64 = 1e-9;

/// Probe-grid classification of the growth of `V` at infinity relative to
/// the declared `β'`.
///
/// The liminf conditions are not decidable numerically, so this is a
/// heuristic over the radii `2^4 … 2^40`, taking at each radius the worst
/// direction along which the support is unbounded:
///
/// - `Strong` if every ratio `V / (β' log r)` exceeds `1` (by more than
///   [`STRONG_SLACK`]);
/// - `Inadmissible` if the excess `V - β' log r` is strictly decreasing over
///   the last [`PROBE_TAIL`] scales and either ends below [`PROBE_FLOOR`] or
///   drops by at least [`PROBE_MIN_DROP`] at every one of those scales;
/// - `WeakOnly` otherwise.
///
/// Bounded supports are trivially `Strong`, with no probes.
pub fn admissibility_check(model: &GasModel) -> Result<Admissibility> {
    let beta_prime = model
        .potential()
        .beta_prime()
        .ok_or_else(|| Error::MissingBetaPrime(model.potential().name().to_owned()))?;
    let directions = model.support().probe_directions();
    if directions.is_empty() {
        return Ok(Admissibility {
            class: GrowthClass::Strong,
            beta_prime,
            probes: Vec::new(),
        });
    }
    let probes: Vec<Probe> = PROBE_EXPONENTS
        .map(|k| {
            let radius = 2f64.powi(k);
            let potential = directions
                .iter()
                .map(|d| model.v(d * radius))
                .fold(f64::INFINITY, f64::min);
            let log_r = radius.ln();
            Probe {
                radius,
                potential,
                ratio: potential / (beta_prime * log_r),
                excess: potential - beta_prime * log_r,
            }
        })
        .collect();

    let tail = &probes[probes.len() - PROBE_TAIL..];
    let drops: Vec<f64> = tail.windows(2).map(|w| w[0].excess - w[1].excess).collect();
    let decreasing = drops.iter().all(|&d| d > 0.0);
    let last = tail[tail.len() - 1].excess;
    let sustained = drops.iter().all(|&d| d >= PROBE_MIN_DROP);
    let min_ratio = probes.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);

    let class = if decreasing && (last < PROBE_FLOOR || sustained) {
        GrowthClass::Inadmissible
    } else if min_ratio > 1.0 + STRONG_SLACK {
        GrowthClass::Strong
    } else {
        GrowthClass::WeakOnly
    };
    Ok(Admissibility {
        class,
        beta_prime,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn empirical_measure_of_three_points() {
        let model = GasModel::new(Support::ComplexPlane, 2.0, PotentialSpec::spherical(), 3).unwrap();
        let config = Configuration::new(&model, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let mu = empirical_measure(&config);
        assert_eq!(mu.len(), 3);
        for (_, w) in mu.atoms() {
            assert_abs_diff_eq!(*w, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn empirical_measure_merges_duplicates() {
        let model = GasModel::cauchy(2);
        let mu = empirical_measure(&Configuration::from_real(&model, &[1.0, 1.0]).unwrap());
        assert_eq!(mu.atoms(), &[(c(1.0, 0.0), 1.0)]);

        let model = GasModel::cauchy(4);
        let mu = empirical_measure(&Configuration::from_real(&model, &[-1.0, 0.0, 1.0, 0.0]).unwrap());
        assert_eq!(
            mu.atoms(),
            &[(c(-1.0, 0.0), 0.25), (c(0.0, 0.0), 0.5), (c(1.0, 0.0), 0.25)]
        );
    }

    #[test]
    fn negative_zero_is_the_same_atom() {
        let mu = DiscreteMeasure::new(vec![(c(0.0, 0.0), 0.5), (c(-0.0, 0.0), 0.5)]).unwrap();
        assert_eq!(mu.len(), 1);
    }

    #[test]
    fn measure_rejects_bad_weights() {
        assert!(DiscreteMeasure::new(vec![(c(0.0, 0.0), 0.5)]).is_err());
        assert!(DiscreteMeasure::new(vec![(c(0.0, 0.0), -0.5), (c(1.0, 0.0), 1.5)]).is_err());
        assert!(DiscreteMeasure::<Complex64>::new(vec![]).is_err());
    }

    #[test]
    fn configuration_checks_support_and_length() {
        let model = GasModel::cauchy(2);
        assert!(Configuration::new(&model, vec![c(0.0, 0.0), c(1.0, 1e-3)]).is_err());
        assert!(Configuration::new(&model, vec![c(0.0, 0.0)]).is_err());
        let ok = Configuration::new(&model, vec![c(0.0, 0.0), c(1.0, 1e-13)]).unwrap();
        assert_eq!(ok.points()[1].im, 0.0);

        let half = GasModel::new(Support::HalfLine, 1.0, PotentialSpec::quadratic(), 1).unwrap();
        assert!(Configuration::new(&half, vec![c(-1.0, 0.0)]).is_err());
        let circle = GasModel::new(Support::UnitCircle, 1.0, PotentialSpec::quadratic(), 1).unwrap();
        assert!(Configuration::new(&circle, vec![c(0.6, 0.8)]).is_ok());
        assert!(Configuration::new(&circle, vec![c(0.6, 0.7)]).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(GasModel::new(Support::RealLine, -1.0, PotentialSpec::cauchy(), 4).is_err());
        assert!(GasModel::new(Support::RealLine, 2.0, PotentialSpec::cauchy(), 0).is_err());
        let odd = PotentialSpec::custom(
            "odd",
            CustomParams {
                poly: vec![0.0, 1.0, 0.0, 0.0, 1.0],
                log_coeff: 0.0,
                variable: PolyVariable::X,
            },
            Some(2.0),
            None,
        )
        .unwrap();
        assert!(GasModel::new(Support::ComplexPlane, 2.0, odd.clone(), 4).is_err());
        assert!(GasModel::new(Support::RealLine, 2.0, odd, 4).is_ok());
    }

    #[test]
    fn weak_growth_flag_follows_declared_beta_prime() {
        assert!(GasModel::cauchy(3).weak_growth());
        let hot = GasModel::new(Support::RealLine, 3.0, PotentialSpec::cauchy(), 3).unwrap();
        assert!(!hot.weak_growth());
        let none = GasModel::new(
            Support::RealLine,
            2.0,
            PotentialSpec::cauchy().with_beta_prime(None),
            3,
        )
        .unwrap();
        assert!(!none.weak_growth());
        let circle = GasModel::new(
            Support::UnitCircle,
            2.0,
            PotentialSpec::cauchy().with_beta_prime(None),
            3,
        )
        .unwrap();
        assert!(circle.is_admissible());
    }

    #[test]
    fn potentials_and_gradients() {
        let p = PotentialSpec::cauchy();
        assert_abs_diff_eq!(p.evaluate(c(1.0, 0.0)), 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.evaluate(c(1e200, 0.0)), 2.0 * 1e200f64.ln(), epsilon = 1e-9);
        let q = PotentialSpec::quadratic();
        assert_eq!(q.evaluate(c(3.0, 0.0)), 9.0);
        assert_eq!(q.gradient(c(3.0, 0.0)), c(6.0, 0.0));

        let custom = PotentialSpec::custom(
            "mix",
            CustomParams {
                poly: vec![1.0, 2.0, 3.0],
                log_coeff: 0.5,
                variable: PolyVariable::Abs2,
            },
            Some(2.0),
            None,
        )
        .unwrap();
        let x = c(0.3, -0.7);
        let h = 1e-6;
        let fd_re = (custom.evaluate(x + h) - custom.evaluate(x - h)) / (2.0 * h);
        let fd_im = (custom.evaluate(x + c(0.0, h)) - custom.evaluate(x - c(0.0, h))) / (2.0 * h);
        let g = custom.gradient(x);
        assert_abs_diff_eq!(g.re, fd_re, epsilon = 1e-7);
        assert_abs_diff_eq!(g.im, fd_im, epsilon = 1e-7);
    }

    #[test]
    fn v_infinity_depends_on_beta_for_log_potentials() {
        let p = PotentialSpec::cauchy();
        assert_eq!(p.v_infinity_at(2.0), Some(0.0));
        assert_eq!(p.v_infinity_at(1.0), Some(f64::INFINITY));
        assert_eq!(p.v_infinity_at(3.0), Some(f64::NEG_INFINITY));
        assert_eq!(PotentialSpec::quadratic().v_infinity_at(2.0), Some(f64::INFINITY));
    }

    fn half_log() -> PotentialSpec {
        PotentialSpec::custom(
            "half_log",
            CustomParams {
                poly: vec![],
                log_coeff: 0.5,
                variable: PolyVariable::Abs2,
            },
            Some(2.0),
            None,
        )
        .unwrap()
    }

    #[test]
    fn growth_classification_examples() {
        let q = admissibility_check(&GasModel::quadratic(8)).unwrap();
        assert_eq!(q.class, GrowthClass::Strong);
        assert_eq!(q.probes.len(), 37);

        let c = admissibility_check(&GasModel::cauchy(8)).unwrap();
        assert_eq!(c.class, GrowthClass::WeakOnly);

        let model = GasModel::new(Support::RealLine, 2.0, half_log(), 8).unwrap();
        assert_eq!(
            admissibility_check(&model).unwrap().class,
            GrowthClass::Inadmissible
        );
    }

    #[test]
    fn growth_probe_oracle() {
        // Independent recomputation of the witnesses at the first and last radius.
        let c = admissibility_check(&GasModel::cauchy(8)).unwrap();
        let first = c.probes[0];
        assert_eq!(first.radius, 16.0);
        assert_abs_diff_eq!(first.excess, 257f64.ln() - 2.0 * 16f64.ln(), epsilon = 1e-14);
        let model = GasModel::new(Support::RealLine, 2.0, half_log(), 8).unwrap();
        let h = admissibility_check(&model).unwrap();
        let last = h.probes.last().unwrap();
        assert_abs_diff_eq!(last.excess, -40.0 * 2f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn cauchy_is_never_strong_for_admissible_beta_prime() {
        for bp in [2.0, 2.5, 3.0, 8.0] {
            let model = GasModel::new(
                Support::RealLine,
                2.0,
                PotentialSpec::cauchy().with_beta_prime(Some(bp)),
                4,
            )
            .unwrap();
            assert_ne!(admissibility_check(&model).unwrap().class, GrowthClass::Strong);
        }
    }

    #[test]
    fn missing_beta_prime_is_an_error() {
        let model = GasModel::new(
            Support::RealLine,
            2.0,
            PotentialSpec::cauchy().with_beta_prime(None),
            4,
        )
        .unwrap();
        assert!(matches!(
            admissibility_check(&model),
            Err(Error::MissingBetaPrime(_))
        ));
    }

    #[test]
    fn bounded_support_is_trivially_strong() {
        let model = GasModel::new(Support::UnitSegment, 2.0, PotentialSpec::quadratic(), 4).unwrap();
        let a = admissibility_check(&model).unwrap();
        assert_eq!(a.class, GrowthClass::Strong);
        assert!(a.probes.is_empty());
    }

    #[test]
    fn potential_decl_round_trips_through_json() {
        let spec = PotentialSpec::custom(
            "tail",
            CustomParams {
                poly: vec![0.0, 0.0, 1.0],
                log_coeff: 1.0,
                variable: PolyVariable::Abs2,
            },
            Some(2.0),
            Some(f64::INFINITY),
        )
        .unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"v_infinity\":\"inf\""));
        let back: PotentialSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);

        let builtin: PotentialSpec = serde_json::from_str(r#"{"name":"cauchy"}"#).unwrap();
        assert_eq!(builtin, PotentialSpec::cauchy());
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"name":"mystery"}"#).is_err());
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"name":"cauchy","v_infinity":1.0}"#).is_err());
    }

    #[test]
    fn initial_configurations_are_valid_and_distinct() {
        let models = [
            GasModel::cauchy(17),
            GasModel::spherical(17),
            GasModel::new(Support::HalfLine, 1.0, PotentialSpec::quadratic(), 17).unwrap(),
            GasModel::new(Support::UnitSegment, 1.0, PotentialSpec::quadratic(), 17).unwrap(),
            GasModel::new(Support::UnitCircle, 1.0, PotentialSpec::quadratic(), 17).unwrap(),
        ];
        for m in &models {
            let init = initial_configuration(m);
            let checked = Configuration::new(m, init.points().to_vec()).unwrap();
            assert!(checked.coincident_pair().is_none());
        }
    }
}
