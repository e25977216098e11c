//! Gaussian states in the `vacuum = I/2` convention: preparation,
//! propagation, reduction, photon number, fidelity and homodyne sampling.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seeds;
use crate::symplectic::{symplectic_form, SymplecticMatrix};

const SYMMETRY_TOL: f64 = 1e-12;
const UNCERTAINTY_TOL: f64 = 1e-9;

/// Named quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Q,
    P,
}

/// Squeezing direction: a named quadrature or a squeezing phase `phi`
/// (radians), which squeezes the quadrature at angle `phi / 2`. `q` is
/// `phi = 0` and `p` is `phi = pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Quadrature(Quadrature),
    Phase(f64),
}

impl Axis {
    pub fn phase(&self) -> f64 {
        match self {
            Axis::Quadrature(Quadrature::Q) => 0.0,
            Axis::Quadrature(Quadrature::P) => std::f64::consts::PI,
            Axis::Phase(phi) => *phi,
        }
    }
}

/// Single-mode squeezed state given by its variances in dB relative to vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezedSpec {
    pub squeeze_db: f64,
    pub antisqueeze_db: f64,
    pub axis: Axis,
}

impl SqueezedSpec {
    pub fn new(squeeze_db: f64, antisqueeze_db: f64, axis: Axis) -> Self {
        SqueezedSpec {
            squeeze_db,
            antisqueeze_db,
            axis,
        }
    }

    /// Pure state with squeezing `r` at phase `phi`.
    pub fn pure(r: f64, phi: f64) -> Self {
        let db = 10.0 * (-2.0 * r).exp().log10();
        SqueezedSpec::new(db, -db, Axis::Phase(phi))
    }
}

/// Variance ratio to vacuum in dB.
pub fn db_to_variance(db: f64) -> f64 {
    0.5 * 10f64.powf(db / 10.0)
}

pub fn variance_to_db(variance: f64) -> f64 {
    10.0 * (2.0 * variance).log10()
}

/// Mean vector and covariance matrix of `M` modes, ordered `(q.., p..)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Validates symmetry and the uncertainty principle.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = cov.nrows();
        if cov.ncols() != n || !n.is_multiple_of(2) || n == 0 {
            return invalid(format!("covariance must be square with even size, got {}x{}", n, cov.ncols()));
        }
        if mean.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: mean.len(),
            });
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > SYMMETRY_TOL * cov.amax().max(1.0) {
            return invalid(format!("covariance is not symmetric (max deviation {asym:.3e})"));
        }
        let state = GaussianState { mean, cov };
        let nu = state.min_symplectic_eigenvalue();
        if nu < 0.5 - UNCERTAINTY_TOL {
            return Err(Error::Uncertainty { nu });
        }
        Ok(state)
    }

    pub fn vacuum(modes: usize) -> Self {
        GaussianState {
            mean: DVector::zeros(2 * modes),
            cov: DMatrix::identity(2 * modes, 2 * modes) * 0.5,
        }
    }

    /// Thermal state with occupancy `nbar` in every mode.
    pub fn thermal(modes: usize, nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return invalid(format!("thermal occupancy must be >= 0, got {nbar}"));
        }
        Ok(GaussianState {
            mean: DVector::zeros(2 * modes),
            cov: DMatrix::identity(2 * modes, 2 * modes) * (nbar + 0.5),
        })
    }

    pub fn squeezed(spec: &SqueezedSpec) -> Result<Self> {
        if !(spec.squeeze_db <= 0.0 && spec.antisqueeze_db >= 0.0) {
            return invalid(format!(
                "need squeeze_db <= 0 <= antisqueeze_db, got {} / {}",
                spec.squeeze_db, spec.antisqueeze_db
            ));
        }
        let a = db_to_variance(spec.squeeze_db);
        let b = db_to_variance(spec.antisqueeze_db);
        let (s, c) = (spec.axis.phase() / 2.0).sin_cos();
        let cov = DMatrix::from_row_slice(
            2,
            2,
            &[
                a * c * c + b * s * s,
                (a - b) * c * s,
                (a - b) * c * s,
                a * s * s + b * c * c,
            ],
        );
        GaussianState::new(DVector::zeros(2), cov)
    }

    /// Same covariance, new mean.
    pub fn displaced(mut self, mean: &[f64]) -> Result<Self> {
        if mean.len() != self.mean.len() {
            return Err(Error::Dimension {
                expected: self.mean.len(),
                got: mean.len(),
            });
        }
        self.mean = DVector::from_column_slice(mean);
        Ok(self)
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// `mean -> S mean`, `cov -> S cov S^T`.
    pub fn propagate(&self, s: &SymplecticMatrix) -> Result<Self> {
        if s.modes() != self.modes() {
            return Err(Error::Dimension {
                expected: 2 * self.modes(),
                got: 2 * s.modes(),
            });
        }
        let sm = s.matrix();
        let cov = sm * &self.cov * sm.transpose();
        Ok(GaussianState {
            mean: sm * &self.mean,
            cov: (&cov + cov.transpose()) * 0.5,
        })
    }

    /// Product state with `self` on the leading modes and `other` after them.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (a, b) = (self.modes(), other.modes());
        let m = a + b;
        // quadrature index of mode `j` of a block, in the (q.., p..) layout
        let place = |j: usize, n: usize, offset: usize| if j < n { offset + j } else { m + offset + j - n };
        let mut mean = DVector::zeros(2 * m);
        let mut cov = DMatrix::zeros(2 * m, 2 * m);
        for (state, n, offset) in [(self, a, 0), (other, b, a)] {
            for i in 0..2 * n {
                mean[place(i, n, offset)] = state.mean[i];
                for j in 0..2 * n {
                    cov[(place(i, n, offset), place(j, n, offset))] = state.cov[(i, j)];
                }
            }
        }
        GaussianState { mean, cov }
    }

    /// Marginal state of `mode`.
    pub fn reduce(&self, mode: usize) -> Result<Self> {
        let m = self.modes();
        if mode >= m {
            return invalid(format!("mode {mode} outside 0..{m}"));
        }
        let idx = [mode, m + mode];
        Ok(GaussianState {
            mean: DVector::from_fn(2, |i, _| self.mean[idx[i]]),
            cov: DMatrix::from_fn(2, 2, |i, j| self.cov[(idx[i], idx[j])]),
        })
    }

    fn require_single(&self) -> Result<()> {
        if self.modes() != 1 {
            return Err(Error::Dimension {
                expected: 2,
                got: self.mean.len(),
            });
        }
        Ok(())
    }

    /// `(<q^2> + <p^2> - 1) / 2` including the displacement.
    pub fn mean_photon(&self) -> Result<f64> {
        self.require_single()?;
        Ok((self.cov[(0, 0)] + self.cov[(1, 1)] + self.mean.norm_squared() - 1.0) / 2.0)
    }

    /// `1 / (2 sqrt(det cov))` of a single mode.
    pub fn purity(&self) -> Result<f64> {
        self.require_single()?;
        Ok(1.0 / (2.0 * self.cov.determinant().sqrt()))
    }

    /// Symplectic eigenvalues, ascending. Each is at least `1/2` for a
    /// physical state.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let Some(chol) = self.cov.clone().cholesky() else {
            return vec![0.0; self.modes()];
        };
        let l = chol.l();
        // L^T Omega L is antisymmetric with eigenvalues +-i nu
        let a = l.transpose() * symplectic_form(self.modes()) * &l;
        let b = a.transpose() * &a;
        let mut nu2: Vec<f64> = SymmetricEigen::new((&b + b.transpose()) * 0.5)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        nu2.sort_by(f64::total_cmp);
        nu2.iter().step_by(2).map(|x| x.max(0.0).sqrt()).collect()
    }

    fn min_symplectic_eigenvalue(&self) -> f64 {
        self.symplectic_eigenvalues()[0]
    }

    pub fn is_physical(&self) -> bool {
        self.min_symplectic_eigenvalue() >= 0.5 - UNCERTAINTY_TOL
    }

    /// `<x^T H x> / 2` for a quadratic Hamiltonian matrix `H`.
    pub fn energy(&self, h: &DMatrix<f64>) -> f64 {
        0.5 * ((h * &self.cov).trace() + self.mean.dot(&(h * &self.mean)))
    }
}

/// Single-mode Gaussian fidelity,
/// `F = exp(-du^T (S1+S2)^-1 du / 2) / (sqrt(L + d) - sqrt(d))` with
/// `L = det(S1+S2)` and `d = 4 (det S1 - 1/4)(det S2 - 1/4)`.
/// Pure states give `|<psi1|psi2>|^2`.
pub fn fidelity(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    a.require_single()?;
    b.require_single()?;
    let sum = a.cov() + b.cov();
    let lambda = sum.determinant();
    if !(lambda > 0.0) {
        return invalid("sum of covariances is not positive definite");
    }
    let inv = sum
        .try_inverse()
        .ok_or_else(|| Error::Invalid("sum of covariances is singular".into()))?;
    let du = a.mean() - b.mean();
    let exponent = -0.5 * du.dot(&(inv * &du));
    let delta = 4.0 * impurity(a.cov()) * impurity(b.cov());
    // 1 / (sqrt(L + d) - sqrt(d)) without the cancellation
    let denom_inv = ((lambda + delta).sqrt() + delta.sqrt()) / lambda;
    Ok((exponent.exp() * denom_inv).min(1.0))
}

/// `det V - 1/4`, snapped to zero at roundoff level. F depends on its square
/// root, so determinant roundoff of a propagated pure state would otherwise
/// show up as ~1e-8 in the fidelity.
fn impurity(cov: &DMatrix<f64>) -> f64 {
    let excess = cov.determinant() - 0.25;
    let scale = cov.trace().powi(2);
    if excess <= 64.0 * f64::EPSILON * scale {
        0.0
    } else {
        excess
    }
}

/// `2 / sqrt(2 (1 + cosh 2r1 cosh 2r2 - cos phi0 sinh 2r1 sinh 2r2))`,
/// the fidelity of two pure squeezed vacua with relative squeezing phase `phi0`.
pub fn pure_fidelity_reference(r1: f64, r2: f64, phi0: f64) -> f64 {
    let x = 1.0 + (2.0 * r1).cosh() * (2.0 * r2).cosh()
        - phi0.cos() * (2.0 * r1).sinh() * (2.0 * r2).sinh();
    2.0 / (2.0 * x).sqrt()
}

/// Quadrature read by the homodyne detector: `cos(theta) q + sin(theta) p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Readout {
    Q,
    P,
    Theta(f64),
}

impl Readout {
    fn weights(&self) -> (f64, f64) {
        match self {
            Readout::Q => (1.0, 0.0),
            Readout::P => (0.0, 1.0),
            Readout::Theta(theta) => (theta.cos(), theta.sin()),
        }
    }
}

/// `samples` draws from the exact marginal of `readout` on a single-mode state.
pub fn homodyne_sample(
    state: &GaussianState,
    readout: Readout,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    state.require_single()?;
    if samples < 2 {
        return invalid(format!("need at least 2 samples, got {samples}"));
    }
    let (a, b) = readout.weights();
    let mean = a * state.mean()[0] + b * state.mean()[1];
    let c = state.cov();
    let var = a * a * c[(0, 0)] + 2.0 * a * b * c[(0, 1)] + b * b * c[(1, 1)];
    let normal = Normal::new(mean, var.max(0.0).sqrt())
        .map_err(|e| Error::Invalid(format!("bad quadrature distribution: {e}")))?;
    let mut rng = seeds::rng(seed);
    Ok((0..samples).map(|_| normal.sample(&mut rng)).collect())
}

/// Sample mean of `x^2` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

pub fn estimate_second_moment(samples: &[f64]) -> Result<MomentEstimate> {
    let n = samples.len();
    if n < 2 {
        return invalid(format!("need at least 2 samples, got {n}"));
    }
    let sq: Vec<f64> = samples.iter().map(|x| x * x).collect();
    let estimate = sq.iter().sum::<f64>() / n as f64;
    let var = sq.iter().map(|s| (s - estimate).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(MomentEstimate {
        estimate,
        stderr: (var / n as f64).sqrt(),
    })
}
