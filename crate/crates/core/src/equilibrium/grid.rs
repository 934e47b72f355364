use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ClosedFormLaw;
use crate::model::Support;
use crate::numerics::{integrate, Quadrature};
use crate::{Error, Result};

/// Minimum atoms per axis.
pub const MIN_RESOLUTION: usize = 16;

/// Placement of grid cells inside the window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    /// Equal-width intervals on `ℝ`, equal squares on `ℂ`.
    Uniform,
    /// Cells of equal size after projection to the sphere: equal angle
    /// `2 atan x` on `ℝ`; on `ℂ`, equal-height bands (hence equal area on
    /// the sphere) split into equal sectors.
    #[default]
    Compactified,
}

/// Window `[-W, W]` (or the disc/square of half-width `W`) and resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub window: f64,
    pub resolution: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn new(window: f64, resolution: usize, spacing: Spacing) -> Result<Self> {
        let spec = Self {
            window,
            resolution,
            spacing,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window.is_finite() && self.window > 0.0) {
            return Err(Error::InvalidModel(format!(
                "grid window must be positive and finite, got {}",
                self.window
            )));
        }
        if self.resolution < MIN_RESOLUTION {
            return Err(Error::InvalidModel(format!(
                "grid resolution must be >= {MIN_RESOLUTION}, got {}",
                self.resolution
            )));
        }
        Ok(())
    }

    /// Lays out the grid on `ℝ` (`resolution` atoms) or `ℂ` (`resolution²` atoms).
    pub fn build(&self, support: Support) -> Result<Grid> {
        self.validate()?;
        let r = self.resolution;
        let w = self.window;
        let mut atoms = Vec::new();
        let mut cells = Vec::new();
        match (support, self.spacing) {
            (Support::RealLine, Spacing::Uniform) => {
                let dx = 2.0 * w / r as f64;
                for j in 0..r {
                    let lo = -w + j as f64 * dx;
                    let hi = if j + 1 == r { w } else { lo + dx };
                    atoms.push(Complex64::new(lo + 0.5 * dx, 0.0));
                    cells.push(Cell::Interval { lo, hi });
                }
            }
            (Support::RealLine, Spacing::Compactified) => {
                let theta0 = 2.0 * w.atan();
                let dt = 2.0 * theta0 / r as f64;
                let x = |t: f64| (0.5 * t).tan();
                for j in 0..r {
                    let t_lo = -theta0 + j as f64 * dt;
                    let t_hi = if j + 1 == r { theta0 } else { t_lo + dt };
                    let hi = if j + 1 == r { w } else { x(t_hi) };
                    let lo = if j == 0 { -w } else { x(t_lo) };
                    atoms.push(Complex64::new(x(t_lo + 0.5 * dt), 0.0));
                    cells.push(Cell::Interval { lo, hi });
                }
            }
            (Support::ComplexPlane, Spacing::Uniform) => {
                let dx = 2.0 * w / r as f64;
                for jy in 0..r {
                    for jx in 0..r {
                        let x_lo = -w + jx as f64 * dx;
                        let y_lo = -w + jy as f64 * dx;
                        atoms.push(Complex64::new(x_lo + 0.5 * dx, y_lo + 0.5 * dx));
                        cells.push(Cell::Square {
                            x_lo,
                            x_hi: x_lo + dx,
                            y_lo,
                            y_hi: y_lo + dx,
                        });
                    }
                }
            }
            (Support::ComplexPlane, Spacing::Compactified) => {
                let h_max = w * w / (1.0 + w * w);
                let dh = h_max / r as f64;
                let radius = |h: f64| (h / (1.0 - h)).sqrt();
                let dphi = TAU / r as f64;
                for band in 0..r {
                    let h_lo = band as f64 * dh;
                    let r_lo = radius(h_lo);
                    let r_hi = if band + 1 == r { w } else { radius(h_lo + dh) };
                    let r_mid = radius(h_lo + 0.5 * dh);
                    let offset = if band % 2 == 1 { 0.5 } else { 0.0 };
                    for k in 0..r {
                        let phi = (k as f64 + offset) * dphi;
                        atoms.push(Complex64::from_polar(r_mid, phi));
                        cells.push(Cell::Sector {
                            r_lo,
                            r_hi,
                            phi_lo: phi - 0.5 * dphi,
                            phi_hi: phi + 0.5 * dphi,
                        });
                    }
                }
            }
            (other, _) => {
                return Err(Error::Unsupported(format!(
                    "grids are only available on the real line and the complex plane, not {other}"
                )))
            }
        }
        Ok(Grid {
            spec: *self,
            support,
            atoms,
            cells,
        })
    }
}

/// The region of the window an atom stands for.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Interval {
        lo: f64,
        hi: f64,
    },
    Square {
        x_lo: f64,
        x_hi: f64,
        y_lo: f64,
        y_hi: f64,
    },
    Sector {
        r_lo: f64,
        r_hi: f64,
        phi_lo: f64,
        phi_hi: f64,
    },
}

/// `∫ dy / (a + y²)²`.
fn inv_square_antiderivative(a: f64, y: f64) -> f64 {
    let s = a.sqrt();
    y / (2.0 * a * (a + y * y)) + (y / s).atan() / (2.0 * a * s)
}

impl Cell {
    /// Length or area.
    pub fn size(&self) -> f64 {
        match *self {
            Cell::Interval { lo, hi } => hi - lo,
            Cell::Square {
                x_lo,
                x_hi,
                y_lo,
                y_hi,
            } => (x_hi - x_lo) * (y_hi - y_lo),
            Cell::Sector {
                r_lo,
                r_hi,
                phi_lo,
                phi_hi,
            } => 0.5 * (r_hi * r_hi - r_lo * r_lo) * (phi_hi - phi_lo),
        }
    }

    /// Mass the planar law gives this cell.
    pub fn law_mass(&self, law: ClosedFormLaw) -> Result<f64> {
        match (law, *self) {
            (ClosedFormLaw::Cauchy, Cell::Interval { lo, hi }) => Ok((hi.atan() - lo.atan()) / PI),
            (
                ClosedFormLaw::Spherical,
                Cell::Sector {
                    r_lo,
                    r_hi,
                    phi_lo,
                    phi_hi,
                },
            ) => Ok((law.cdf(r_hi) - law.cdf(r_lo)) * (phi_hi - phi_lo) / TAU),
            (
                ClosedFormLaw::Spherical,
                Cell::Square {
                    x_lo,
                    x_hi,
                    y_lo,
                    y_hi,
                },
            ) => integrate(
                |x| {
                    let a = 1.0 + x * x;
                    inv_square_antiderivative(a, y_hi) - inv_square_antiderivative(a, y_lo)
                },
                x_lo,
                x_hi,
                Quadrature::default(),
            )
            .map(|v| v / PI),
            _ => Err(Error::Unsupported(format!(
                "law {} has no mass on cell {self:?}",
                law.name()
            ))),
        }
    }
}

/// Atoms and cells of a laid-out [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    spec: GridSpec,
    support: Support,
    atoms: Vec<Complex64>,
    cells: Vec<Cell>,
}

impl Grid {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn atoms(&self) -> &[Complex64] {
        &self.atoms
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// The same grid relabeled: atom `k` of the result is atom `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Grid> {
        let m = self.len();
        let mut seen = vec![false; m];
        if perm.len() != m
            || perm
                .iter()
                .any(|&p| p >= m || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidMeasure(format!("not a permutation of 0..{m}")));
        }
        Ok(Grid {
            spec: self.spec,
            support: self.support,
            atoms: perm.iter().map(|&p| self.atoms[p]).collect(),
            cells: perm.iter().map(|&p| self.cells[p]).collect(),
        })
    }

    /// Cell masses of `law`.
    pub fn law_masses(&self, law: ClosedFormLaw) -> Result<Vec<f64>> {
        self.cells.iter().map(|c| c.law_mass(law)).collect()
    }

    /// Mass `law` gives the window, and the L1 distance between `weights`
    /// and the cell masses of `law` restricted to the window and renormalized.
    pub fn compare(&self, weights: &[f64], law: ClosedFormLaw) -> Result<(f64, f64)> {
        let masses = self.law_masses(law)?;
        let captured = crate::numerics::compensated_sum(masses.iter().copied());
        let l1 = crate::numerics::compensated_sum(
            weights.iter().zip(&masses).map(|(w, m)| (w - m / captured).abs()),
        );
        Ok((captured, l1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn resolution_floor() {
        assert!(GridSpec::new(10.0, 15, Spacing::Uniform).is_err());
        assert!(GridSpec::new(-1.0, 64, Spacing::Uniform).is_err());
    }

    #[test]
    fn cells_tile_the_window() {
        for spacing in [Spacing::Uniform, Spacing::Compactified] {
            let g = GridSpec::new(10.0, 40, spacing)
                .unwrap()
                .build(Support::RealLine)
                .unwrap();
            let total: f64 = g.cells().iter().map(Cell::size).sum();
            assert_abs_diff_eq!(total, 20.0, epsilon = 1e-10);
            let masses = g.law_masses(ClosedFormLaw::Cauchy).unwrap();
            assert_abs_diff_eq!(
                masses.iter().sum::<f64>(),
                2.0 * 10f64.atan() / PI,
                epsilon = 1e-12
            );
            for (a, c) in g.atoms().iter().zip(g.cells()) {
                if let Cell::Interval { lo, hi } = c {
                    assert!(*lo < a.re && a.re < *hi);
                }
            }
        }
    }

    #[test]
    fn compactified_plane_cells_have_equal_spherical_mass() {
        let g = GridSpec::new(100.0, 20, Spacing::Compactified)
            .unwrap()
            .build(Support::ComplexPlane)
            .unwrap();
        assert_eq!(g.len(), 400);
        let masses = g.law_masses(ClosedFormLaw::Spherical).unwrap();
        let captured: f64 = masses.iter().sum();
        assert_abs_diff_eq!(captured, 1e4 / (1.0 + 1e4), epsilon = 1e-12);
        for m in &masses {
            assert_abs_diff_eq!(*m, captured / 400.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn square_cell_mass_matches_polar_quadrature() {
        let cell = Cell::Square {
            x_lo: 0.2,
            x_hi: 1.1,
            y_lo: -0.4,
            y_hi: 0.7,
        };
        let direct = integrate(
            |x| {
                integrate(
                    |y| ClosedFormLaw::Spherical.density(Complex64::new(x, y)),
                    -0.4,
                    0.7,
                    Quadrature::default(),
                )
                .unwrap()
            },
            0.2,
            1.1,
            Quadrature::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(
            cell.law_mass(ClosedFormLaw::Spherical).unwrap(),
            direct,
            epsilon = 1e-12
        );
    }

    #[test]
    fn grids_are_symmetric() {
        let g = GridSpec::new(5.0, 33, Spacing::Compactified)
            .unwrap()
            .build(Support::RealLine)
            .unwrap();
        let n = g.len();
        for j in 0..n {
            assert_abs_diff_eq!(g.atoms()[j].re, -g.atoms()[n - 1 - j].re, epsilon = 1e-12);
        }
    }

    #[test]
    fn other_supports_are_rejected() {
        let spec = GridSpec::new(1.0, 16, Spacing::Uniform).unwrap();
        assert!(matches!(
            spec.build(Support::UnitCircle),
            Err(Error::Unsupported(_))
        ));
    }
}
