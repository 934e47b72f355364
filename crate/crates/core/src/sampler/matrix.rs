use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{Configuration, GasModel};
use crate::{Error, Result};

/// Largest matrix dimension accepted by the matrix-model samplers.
pub const MAX_MATRIX_SIZE: usize = 512;
/// Fresh draws attempted when `B` comes out singular.
const SINGULAR_RETRIES: usize = 8;

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    /// Independent standard complex Gaussian entries (`E|z|² = 1`).
    pub fn gaussian<R: Rng>(n: usize, rng: &mut R) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_fn(n, |_, _| {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            Complex64::new(a * s, b * s)
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// `‖M* M - I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += self.get(k, i).conj() * self.get(k, j);
                }
                if i == j {
                    s -= 1.0;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }
}

/// Dense eigenvalue capability used by the matrix-model samplers.
pub trait EigenBackend: Send + Sync {
    fn eigenvalues(&self, m: &ComplexMatrix) -> Result<Vec<Complex64>>;

    /// Eigenvalues of `B⁻¹ A`, i.e. the roots of `det(A - z B)`. Returns
    /// [`Error::SingularB`] when `B` is numerically singular.
    fn generalized_eigenvalues(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Vec<Complex64>>;
}

/// Haar-distributed unitary: Gram–Schmidt on the columns of a complex
/// Gaussian matrix. The resulting `R` factor has a positive diagonal, which
/// fixes the phases so that `Q` is exactly Haar.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let z = ComplexMatrix::gaussian(n, rng);
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| z.get(i, j)).collect()).collect();
    for j in 0..n {
        // Two passes of modified Gram–Schmidt keep the columns orthogonal to
        // working precision.
        for _ in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let qk = &done[k];
                let v = &mut rest[0];
                let proj: Complex64 = qk.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(qk) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = cols[j].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(n, |i, j| cols[j][i])
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_MATRIX_SIZE {
        Err(Error::InvalidModel(format!(
            "matrix samplers need 1 <= n <= {MAX_MATRIX_SIZE}, got {n}"
        )))
    } else {
        Ok(())
    }
}

/// The bundled backend, if compiled in.
pub fn default_backend() -> Result<Box<dyn EigenBackend>> {
    #[cfg(feature = "matrix")]
    {
        Ok(Box::new(NalgebraBackend::default()))
    }
    #[cfg(not(feature = "matrix"))]
    {
        Err(Error::BackendUnavailable)
    }
}

/// Exact sample of the `β = 2` Cauchy ensemble on `ℝ`: eigenphases `θ_j` of a
/// Haar unitary mapped by `x = tan(θ/2)`.
pub fn sample_cauchy_ensemble(n: usize, seed: u64) -> Result<Configuration> {
    sample_cauchy_ensemble_with(default_backend()?.as_ref(), n, seed)
}

pub fn sample_cauchy_ensemble_with(backend: &dyn EigenBackend, n: usize, seed: u64) -> Result<Configuration> {
    check_size(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_unitary(n, &mut rng);
    let xs: Vec<Complex64> = backend
        .eigenvalues(&u)?
        .into_iter()
        .map(|z| Complex64::new((0.5 * z.arg()).tan(), 0.0))
        .collect();
    Configuration::new(&GasModel::cauchy(n), xs)
}

/// Sample of the spherical ensemble: roots of `det(A - z B)` for independent
/// complex Ginibre matrices `A`, `B`.
pub fn sample_spherical_ensemble(n: usize, seed: u64) -> Result<Configuration> {
    sample_spherical_ensemble_with(default_backend()?.as_ref(), n, seed)
}

pub fn sample_spherical_ensemble_with(
    backend: &dyn EigenBackend,
    n: usize,
    seed: u64,
) -> Result<Configuration> {
    check_size(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SINGULAR_RETRIES {
        let a = ComplexMatrix::gaussian(n, &mut rng);
        let b = ComplexMatrix::gaussian(n, &mut rng);
        match backend.generalized_eigenvalues(&a, &b) {
            Ok(z) => return Configuration::new(&GasModel::spherical(n), z),
            Err(Error::SingularB) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SingularB)
}

#[cfg(feature = "matrix")]
pub use backend::NalgebraBackend;

#[cfg(feature = "matrix")]
mod backend {
    use super::*;
    use nalgebra::DMatrix;

    /// Complex Schur decomposition from `nalgebra`.
    #[derive(Clone, Copy, Debug)]
    pub struct NalgebraBackend {
        pub eps: f64,
        pub max_iter: usize,
        /// `B` counts as singular when its smallest LU pivot is below this
        /// fraction of the largest.
        pub pivot_ratio: f64,
    }

    impl Default for NalgebraBackend {
        fn default() -> Self {
            Self {
                eps: 1e-14,
                max_iter: 100_000,
                pivot_ratio: 1e-13,
            }
        }
    }

    fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(m.n(), m.n(), m.as_slice())
    }

    impl NalgebraBackend {
        fn schur_eigenvalues(&self, m: DMatrix<Complex64>) -> Result<Vec<Complex64>> {
            let n = m.nrows();
            let schur = nalgebra::linalg::Schur::try_new(m, self.eps, self.max_iter)
                .ok_or_else(|| Error::Unsupported("Schur iteration did not converge".into()))?;
            let (_, t) = schur.unpack();
            Ok((0..n).map(|i| t[(i, i)]).collect())
        }
    }

    impl EigenBackend for NalgebraBackend {
        fn eigenvalues(&self, m: &ComplexMatrix) -> Result<Vec<Complex64>> {
            self.schur_eigenvalues(to_nalgebra(m))
        }

        fn generalized_eigenvalues(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Vec<Complex64>> {
            let lu = to_nalgebra(b).lu();
            let u = lu.u();
            let pivots: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
            let largest = pivots.iter().copied().fold(0.0, f64::max);
            let smallest = pivots.iter().copied().fold(f64::INFINITY, f64::min);
            if largest.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
                || smallest <= self.pivot_ratio * largest
            {
                return Err(Error::SingularB);
            }
            let m = lu.solve(&to_nalgebra(a)).ok_or(Error::SingularB)?;
            self.schur_eigenvalues(m)
        }
    }
}
