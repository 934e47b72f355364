//! Inverse stereographic projection onto the Riemann sphere
//! `{x ∈ ℝ³ : x1² + x2² + (x3 - 1/2)² = 1/4}` and related maps.

use num_complex::Complex64;

use crate::model::{canonical_bits, log1p_abs2, AtomPosition, DiscreteMeasure, GasModel, PotentialKind};
use crate::{Error, Result};

/// Beyond this modulus `project` switches to the `1/|x|²` form.
const LARGE_MODULUS: f64 = 1e8;

/// A point of the Riemann sphere. The north pole is a distinct variant so
/// that mass at `∞` is never produced by rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpherePoint {
    Finite([f64; 3]),
    Infinity,
}

pub const NORTH_POLE: [f64; 3] = [0.0, 0.0, 1.0];

impl SpherePoint {
    /// Builds a point from coordinates; `(0, 0, 1)` becomes [`SpherePoint::Infinity`].
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        if [x1, x2, x3] == NORTH_POLE {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite([x1, x2, x3])
        }
    }

    pub fn coords(&self) -> [f64; 3] {
        match self {
            SpherePoint::Finite(c) => *c,
            SpherePoint::Infinity => NORTH_POLE,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    /// `x1² + x2² + (x3 - 1/2)² - 1/4`.
    pub fn sphere_residual(&self) -> f64 {
        let [a, b, c] = self.coords();
        a * a + b * b + (c - 0.5) * (c - 0.5) - 0.25
    }

    /// `1 - x3`, computed without cancellation near the pole. On the sphere
    /// this equals `1 - |z|²` and, for `z = T(x)`, `1 / (1 + |x|²)`.
    pub fn pole_gap(&self) -> f64 {
        match self {
            SpherePoint::Infinity => 0.0,
            SpherePoint::Finite([a, b, c]) => {
                if *c >= 0.5 {
                    (a * a + b * b) / c
                } else {
                    1.0 - c
                }
            }
        }
    }

    /// Angle on the great circle through `0` and `∞` in the `x1 x3` plane,
    /// measured from the south pole: `T(x)` for real `x` has angle `2 atan x`.
    pub fn equator_angle(&self) -> f64 {
        let [a, _, c] = self.coords();
        a.atan2(0.5 - c)
    }
}

impl AtomPosition for SpherePoint {
    type Key = Option<(u64, u64, u64)>;

    fn key(&self) -> Self::Key {
        match self {
            SpherePoint::Infinity => None,
            SpherePoint::Finite([a, b, c]) => {
                Some((canonical_bits(*a), canonical_bits(*b), canonical_bits(*c)))
            }
        }
    }
}

/// `T(x) = (Re x, Im x, |x|²) / (1 + |x|²)`.
pub fn project(x: Complex64) -> SpherePoint {
    let r = x.norm();
    if r > LARGE_MODULUS {
        // T(x) = (x / |x|², 1) / (1 + |x|⁻²)
        let u = x / (r * r);
        let eps = 1.0 / (r * r);
        let s = 1.0 / (1.0 + eps);
        SpherePoint::Finite([u.re * s, u.im * s, s])
    } else {
        let d = 1.0 + r * r;
        SpherePoint::Finite([x.re / d, x.im / d, r * r / d])
    }
}

/// Inverse of [`project`]: `(x1 + i x2) / (1 - x3)`.
pub fn unproject(z: SpherePoint) -> Result<Complex64> {
    match z {
        SpherePoint::Infinity => Err(Error::PoleNotInvertible),
        SpherePoint::Finite([a, b, c]) => {
            if a == 0.0 && b == 0.0 && c >= 0.5 {
                return Err(Error::PoleNotInvertible);
            }
            let w = Complex64::new(a, b);
            if c >= 0.5 {
                // On the sphere (x1 + i x2)/(1 - x3) = x3 / conj(x1 + i x2).
                Ok(c / w.conj())
            } else {
                Ok(w / (1.0 - c))
            }
        }
    }
}

/// `|x - y| / (√(1 + |x|²) √(1 + |y|²))`, the Euclidean distance between
/// `T(x)` and `T(y)`.
pub fn chordal_distance(x: Complex64, y: Complex64) -> f64 {
    let d = (x - y).norm();
    if d == 0.0 {
        return 0.0;
    }
    let (nx, ny) = (x.norm(), y.norm());
    let v = if nx < 1e150 && ny < 1e150 {
        d / ((1.0 + nx * nx) * (1.0 + ny * ny)).sqrt()
    } else {
        d / (1.0 + nx * nx).sqrt() / (1.0 + ny * ny).sqrt()
    };
    v.min(1.0)
}

/// Euclidean distance in `ℝ³`. The third coordinate difference goes through
/// [`SpherePoint::pole_gap`] when both points are in the northern hemisphere.
pub fn sphere_distance(z: SpherePoint, w: SpherePoint) -> f64 {
    let [a1, a2, a3] = z.coords();
    let [b1, b2, b3] = w.coords();
    let d3 = if a3 >= 0.5 && b3 >= 0.5 {
        w.pole_gap() - z.pole_gap()
    } else {
        a3 - b3
    };
    let d1 = a1 - b1;
    let d2 = a2 - b2;
    (d1 * d1 + d2 * d2 + d3 * d3).sqrt().min(1.0)
}

/// The compactified potential `𝒱` of a model: `𝒱(T x) = V(x) - (β/2) log(1 + |x|²)`
/// on finite points and `𝒱(∞) = liminf_{|x|→∞}` of the same expression.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactifiedPotential {
    model: GasModel,
    v_infinity: f64,
    approximate: bool,
}

impl CompactifiedPotential {
    pub fn model(&self) -> &GasModel {
        &self.model
    }

    /// `𝒱(∞)`.
    pub fn v_infinity(&self) -> f64 {
        self.v_infinity
    }

    /// Whether `𝒱(∞)` was estimated from probe radii rather than declared.
    pub fn is_approximate(&self) -> bool {
        self.approximate
    }

    pub fn evaluate(&self, z: SpherePoint) -> f64 {
        let half_beta = 0.5 * self.model.beta();
        let gap = z.pole_gap();
        match z {
            SpherePoint::Infinity => self.v_infinity,
            SpherePoint::Finite([_, _, x3]) => match self.model.potential().kind() {
                PotentialKind::Cauchy | PotentialKind::Spherical => {
                    if half_beta == 1.0 {
                        0.0
                    } else {
                        (half_beta - 1.0) * gap.ln()
                    }
                }
                PotentialKind::Quadratic => x3 / gap + half_beta * gap.ln(),
                PotentialKind::Custom { .. } => match unproject(z) {
                    Ok(x) => self.at_plane(x),
                    Err(_) => self.v_infinity,
                },
            },
        }
    }

    /// `𝒱(T x)` computed from the planar point.
    pub fn at_plane(&self, x: Complex64) -> f64 {
        let v = self.model.v(x);
        if v == f64::INFINITY {
            return v;
        }
        let beta = self.model.beta();
        if beta == 2.0
            && matches!(
                self.model.potential().kind(),
                PotentialKind::Cauchy | PotentialKind::Spherical
            )
        {
            return 0.0;
        }
        v - 0.5 * beta * log1p_abs2(x)
    }
}

/// Radii used to estimate `𝒱(∞)` when the potential declares none: the two
/// largest dyadic probe scales.
const ESTIMATE_EXPONENTS: [i32; 2] = [39, 40];

/// Builds `𝒱` for an admissible model.
pub fn compactified_potential(model: &GasModel) -> Result<CompactifiedPotential> {
    model.require_admissible()?;
    let declared = model.potential().v_infinity_at(model.beta());
    let (v_infinity, approximate) = match declared {
        Some(v) => (v, false),
        None => {
            let directions = model.support().probe_directions();
            if directions.is_empty() {
                // Bounded support: ∞ lies outside the closure of T(Δ).
                (f64::INFINITY, false)
            } else {
                let beta = model.beta();
                let est = ESTIMATE_EXPONENTS
                    .iter()
                    .flat_map(|&k| {
                        let r = 2f64.powi(k);
                        directions.iter().map(move |d| d * r).collect::<Vec<_>>()
                    })
                    .map(|x| model.v(x) - 0.5 * beta * log1p_abs2(x))
                    .fold(f64::INFINITY, f64::min);
                (est, true)
            }
        }
    };
    Ok(CompactifiedPotential {
        model: model.clone(),
        v_infinity,
        approximate,
    })
}

/// `T_* μ`: atoms mapped by [`project`], weights unchanged.
pub fn pushforward(mu: &DiscreteMeasure<Complex64>) -> DiscreteMeasure<SpherePoint> {
    mu.map_positions(project)
}
