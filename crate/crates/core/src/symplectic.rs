//! Symplectic matrices on the quadrature vector `x = (q_1..q_M, p_1..p_M)`
//! and their Bloch-Messiah factorization `S = R1 * Delta * R2`.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Residual tolerance used when a matrix is *required* to be symplectic.
pub const SYMPLECTIC_TOL: f64 = 1e-8;

/// `Omega = [[0, I], [-I, 0]]` for `m` modes.
pub fn symplectic_form(m: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        omega[(i, m + i)] = 1.0;
        omega[(m + i, i)] = -1.0;
    }
    omega
}

/// `||S^T Omega S - Omega||_F`.
pub fn symplectic_residual(s: &DMatrix<f64>) -> Result<f64> {
    let n = s.nrows();
    if n != s.ncols() {
        return Err(Error::Invalid(format!("matrix is {}x{}, not square", n, s.ncols())));
    }
    if !n.is_multiple_of(2) {
        return Err(Error::Invalid(format!("symplectic matrices need even dimension, got {n}")));
    }
    let omega = symplectic_form(n / 2);
    Ok((s.transpose() * &omega * s - omega).norm())
}

/// Returns whether `s` is symplectic within `tol`, together with the residual.
pub fn is_symplectic(s: &DMatrix<f64>, tol: f64) -> Result<(bool, f64)> {
    let r = symplectic_residual(s)?;
    Ok((r <= tol, r))
}

/// `||A^T A - I||_F`.
pub fn orthogonality_residual(a: &DMatrix<f64>) -> f64 {
    (a.transpose() * a - DMatrix::identity(a.nrows(), a.ncols())).norm()
}

/// A real `2M x 2M` matrix known to preserve the symplectic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix(DMatrix<f64>);

impl SymplecticMatrix {
    /// Wraps `m` after checking the symplectic condition against `tol`.
    pub fn new(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        let residual = symplectic_residual(&m)?;
        if residual > tol {
            return Err(Error::NotSymplectic {
                residual,
                tolerance: tol,
            });
        }
        Ok(SymplecticMatrix(m))
    }

    /// Callers guarantee the matrix is symplectic by construction.
    pub(crate) fn from_raw(m: DMatrix<f64>) -> Self {
        debug_assert!(m.nrows() == m.ncols() && m.nrows().is_multiple_of(2));
        SymplecticMatrix(m)
    }

    pub fn identity(modes: usize) -> Self {
        SymplecticMatrix(DMatrix::identity(2 * modes, 2 * modes))
    }

    pub fn modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.0).expect("square even matrix")
    }

    pub fn compose(&self, rhs: &SymplecticMatrix) -> SymplecticMatrix {
        SymplecticMatrix(&self.0 * &rhs.0)
    }

    pub fn transpose(&self) -> SymplecticMatrix {
        SymplecticMatrix(self.0.transpose())
    }

    /// Inverse via `S^-1 = -Omega S^T Omega`.
    pub fn inverse(&self) -> SymplecticMatrix {
        let omega = symplectic_form(self.modes());
        SymplecticMatrix(-(&omega * self.0.transpose() * &omega))
    }
}

/// Passive (orthogonal symplectic) matrix of the mode unitary `u`, acting as
/// `a -> U a` with `a = (q + i p) / sqrt(2)`.
pub fn passive_from_unitary(u: &DMatrix<Complex<f64>>) -> SymplecticMatrix {
    let m = u.nrows();
    let mut r = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let z = u[(i, j)];
            r[(i, j)] = z.re;
            r[(i, m + j)] = -z.im;
            r[(m + i, j)] = z.im;
            r[(m + i, m + j)] = z.re;
        }
    }
    SymplecticMatrix(r)
}

/// Squeezer on `mode` of an `m`-mode system: the quadrature at angle
/// `phi / 2` is scaled by `e^-r`, its conjugate by `e^r`. `phi = 0`
/// squeezes `q`.
pub fn single_mode_squeezer(m: usize, mode: usize, r: f64, phi: f64) -> SymplecticMatrix {
    let mut s = DMatrix::identity(2 * m, 2 * m);
    let block = squeezer_block(r, phi);
    s[(mode, mode)] = block[0][0];
    s[(mode, m + mode)] = block[0][1];
    s[(m + mode, mode)] = block[1][0];
    s[(m + mode, m + mode)] = block[1][1];
    SymplecticMatrix(s)
}

pub(crate) fn squeezer_block(r: f64, phi: f64) -> [[f64; 2]; 2] {
    let (s, c) = (phi / 2.0).sin_cos();
    let (a, b) = ((-r).exp(), r.exp());
    // R(theta) diag(a, b) R(theta)^T
    [
        [a * c * c + b * s * s, (a - b) * c * s],
        [(a - b) * c * s, a * s * s + b * c * c],
    ]
}

/// Factors of `S = R1 * Delta * R2`.
#[derive(Debug, Clone)]
pub struct BlochMessiahFactors {
    pub r1: SymplecticMatrix,
    /// `d_1 >= ... >= d_M >= 1`; `Delta = diag(d, 1/d)`.
    pub singular: Vec<f64>,
    pub r2: SymplecticMatrix,
}

impl BlochMessiahFactors {
    pub fn modes(&self) -> usize {
        self.singular.len()
    }

    /// Squeezing parameters `r_i = ln d_i`.
    pub fn squeezing(&self) -> Vec<f64> {
        self.singular.iter().map(|d| d.ln()).collect()
    }

    pub fn delta(&self) -> DMatrix<f64> {
        let m = self.modes();
        let mut d = DMatrix::zeros(2 * m, 2 * m);
        for (i, &s) in self.singular.iter().enumerate() {
            d[(i, i)] = s;
            d[(m + i, m + i)] = 1.0 / s;
        }
        d
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.r1.matrix() * self.delta() * self.r2.matrix()
    }

    /// Covariance reached from vacuum, `R1 Delta (I/2) Delta R1^T`. The
    /// passive factor `R2` leaves the vacuum unchanged and drops out.
    pub fn discard_passive(&self) -> DMatrix<f64> {
        let m = self.modes();
        let mut half_delta_sq = DMatrix::zeros(2 * m, 2 * m);
        for (i, &s) in self.singular.iter().enumerate() {
            half_delta_sq[(i, i)] = 0.5 * s * s;
            half_delta_sq[(m + i, m + i)] = 0.5 / (s * s);
        }
        let r1 = self.r1.matrix();
        let cov = r1 * half_delta_sq * r1.transpose();
        (&cov + cov.transpose()) * 0.5
    }
}

/// Bloch-Messiah decomposition using the default input tolerance.
pub fn bloch_messiah(s: &SymplecticMatrix) -> Result<BlochMessiahFactors> {
    bloch_messiah_with_tol(s, SYMPLECTIC_TOL)
}

/// Bloch-Messiah decomposition.
///
/// With the polar form `S = P O`, `P = (S S^T)^{1/2}` is symmetric positive
/// and symplectic, so its eigenvalues pair as `(d, 1/d)` with `Omega v`
/// spanning the `1/d` eigenspace whenever `v` spans the `d` one. `R1` is
/// assembled from an orthonormal isotropic set `U` of eigenvectors with
/// `d >= 1` as `R1 = [U | -Omega U]`, giving `P = R1 Delta R1^T`, and
/// `R2 = Delta^-1 R1^T S` is the remaining passive factor (`R1^T O`).
///
/// In degenerate eigenspaces the basis comes out of a symplectic
/// Gram-Schmidt pass; each first-half column of `R1` is then signed so its
/// leading nonzero entry is positive.
pub fn bloch_messiah_with_tol(s: &SymplecticMatrix, tol: f64) -> Result<BlochMessiahFactors> {
    let residual = s.residual();
    if residual > tol {
        return Err(Error::NotSymplectic {
            residual,
            tolerance: tol,
        });
    }
    let m = s.modes();
    let sm = s.matrix();
    let a = sm * sm.transpose();
    let a = (&a + a.transpose()) * 0.5;

    // Passive input: no squeezing, the whole matrix is R1.
    if (&a - DMatrix::<f64>::identity(2 * m, 2 * m)).norm() < 1e-12 * (2 * m) as f64 {
        return Ok(BlochMessiahFactors {
            r1: s.clone(),
            singular: vec![1.0; m],
            r2: SymplecticMatrix::identity(m),
        });
    }

    let omega = symplectic_form(m);
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..2 * m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let cluster_tol = 1e-8 * eig.eigenvalues.amax().max(1.0);
    let mut used = vec![false; 2 * m];
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut partners: Vec<DVector<f64>> = Vec::with_capacity(m);

    while basis.len() < m {
        let lead = order
            .iter()
            .copied()
            .find(|&i| !used[i])
            .expect("eigenvectors remain while basis is incomplete");
        let lead_value = eig.eigenvalues[lead];
        // candidates: remaining eigenvectors degenerate with the lead
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for &i in order.iter().filter(|&&i| !used[i]) {
            if lead_value - eig.eigenvalues[i] > cluster_tol {
                break;
            }
            let mut v = eig.eigenvectors.column(i).into_owned();
            for _ in 0..2 {
                for (u, w) in basis.iter().zip(&partners) {
                    let cu = u.dot(&v);
                    v.axpy(-cu, u, 1.0);
                    let cw = w.dot(&v);
                    v.axpy(-cw, w, 1.0);
                }
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|b| norm > b.2) {
                best = Some((i, v, norm));
            }
        }
        let (idx, v, norm) = best.expect("at least the lead candidate exists");
        if norm < 1e-3 {
            return Err(Error::Invalid(
                "Bloch-Messiah: could not complete an isotropic eigenbasis".into(),
            ));
        }
        used[idx] = true;
        let mut u = v / norm;
        if let Some(first) = u.iter().find(|x| x.abs() > 1e-10) {
            if *first < 0.0 {
                u.neg_mut();
            }
        }
        let partner = -(&omega * &u);
        // the partner spans the reciprocal eigenspace; retire one vector there
        let mut best_match = None;
        let mut best_overlap = 0.0;
        for i in (0..2 * m).filter(|&i| !used[i]) {
            let overlap = eig.eigenvectors.column(i).dot(&partner).abs();
            if overlap > best_overlap {
                best_overlap = overlap;
                best_match = Some(i);
            }
        }
        if let Some(i) = best_match {
            used[i] = true;
        }
        basis.push(u);
        partners.push(partner);
    }

    let mut r1 = DMatrix::zeros(2 * m, 2 * m);
    let mut singular = Vec::with_capacity(m);
    for (j, (u, w)) in basis.iter().zip(&partners).enumerate() {
        r1.set_column(j, u);
        r1.set_column(m + j, w);
        let rayleigh = u.dot(&(&a * u));
        singular.push(rayleigh.max(1.0).sqrt());
    }
    // keep the descending order explicit after Rayleigh refinement
    let mut perm: Vec<usize> = (0..m).collect();
    perm.sort_by(|&i, &j| singular[j].total_cmp(&singular[i]));
    let r1_sorted = {
        let mut out = DMatrix::zeros(2 * m, 2 * m);
        for (dst, &src) in perm.iter().enumerate() {
            out.set_column(dst, &r1.column(src));
            out.set_column(m + dst, &r1.column(m + src));
        }
        out
    };
    let singular: Vec<f64> = perm.iter().map(|&i| singular[i]).collect();

    let mut delta_inv = DMatrix::zeros(2 * m, 2 * m);
    for (i, &d) in singular.iter().enumerate() {
        delta_inv[(i, i)] = 1.0 / d;
        delta_inv[(m + i, m + i)] = d;
    }
    let r2 = delta_inv * r1_sorted.transpose() * sm;
    Ok(BlochMessiahFactors {
        r1: SymplecticMatrix::from_raw(r1_sorted),
        singular,
        r2: SymplecticMatrix::from_raw(r2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn identity_is_symplectic() {
        let (ok, r) = is_symplectic(&DMatrix::identity(4, 4), 1e-12).unwrap();
        assert!(ok);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn uniform_scaling_is_not_symplectic() {
        let (ok, _) = is_symplectic(&dmatrix![2.0, 0.0; 0.0, 2.0], 1e-10).unwrap();
        assert!(!ok);
    }

    #[test]
    fn squeezer_is_symplectic() {
        let (ok, r) = is_symplectic(&dmatrix![2.0, 0.0; 0.0, 0.5], 1e-12).unwrap();
        assert!(ok);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn odd_dimension_is_an_error() {
        assert!(is_symplectic(&DMatrix::identity(3, 3), 1e-10).is_err());
        assert!(SymplecticMatrix::new(DMatrix::identity(3, 3), 1e-10).is_err());
    }

    #[test]
    fn identity_decomposes_trivially() {
        let f = bloch_messiah(&SymplecticMatrix::identity(3)).unwrap();
        assert_eq!(f.singular, vec![1.0; 3]);
        assert_eq!(f.r1.matrix(), &DMatrix::identity(6, 6));
        assert_eq!(f.r2.matrix(), &DMatrix::identity(6, 6));
    }

    #[test]
    fn single_mode_squeezer_decomposes_to_itself() {
        let r: f64 = 0.7;
        let s = SymplecticMatrix::new(dmatrix![r.exp(), 0.0; 0.0, (-r).exp()], 1e-12).unwrap();
        let f = bloch_messiah(&s).unwrap();
        assert_relative_eq!(f.singular[0], r.exp(), epsilon = 1e-12);
        assert_relative_eq!(f.r1.matrix(), &DMatrix::identity(2, 2), epsilon = 1e-12);
        assert_relative_eq!(f.r2.matrix(), &DMatrix::identity(2, 2), epsilon = 1e-12);
        assert_relative_eq!(f.delta(), s.matrix().clone(), epsilon = 1e-12);
    }

    #[test]
    fn rotated_squeezer_block() {
        // phi = pi squeezes p
        let b = squeezer_block(0.5, std::f64::consts::PI);
        assert_relative_eq!(b[0][0], 0.5f64.exp(), epsilon = 1e-12);
        assert_relative_eq!(b[1][1], (-0.5f64).exp(), epsilon = 1e-12);
        assert!(b[0][1].abs() < 1e-12);
        let s = single_mode_squeezer(3, 1, 0.4, 0.9);
        assert!(s.residual() < 1e-14);
    }

    #[test]
    fn inverse_undoes() {
        let s = single_mode_squeezer(2, 0, 0.3, 0.2).compose(&single_mode_squeezer(2, 1, 0.6, 1.1));
        let prod = s.compose(&s.inverse());
        assert_relative_eq!(prod.matrix(), &DMatrix::identity(4, 4), epsilon = 1e-12);
    }

    #[test]
    fn degenerate_squeezing_keeps_factors_valid() {
        // two modes squeezed equally plus one untouched mode, mixed by a passive map
        let u = DMatrix::from_fn(3, 3, |i, j| {
            let th = 0.3 * (i as f64 + 1.0) * (j as f64 + 2.0);
            Complex::new(th.cos(), th.sin()) / 3f64.sqrt()
        });
        let (q, _) = u.qr().unpack();
        let passive = passive_from_unitary(&q);
        let sq = single_mode_squeezer(3, 0, 0.5, 0.0).compose(&single_mode_squeezer(3, 1, 0.5, 0.0));
        let s = passive.compose(&sq).compose(&passive.transpose());
        let f = bloch_messiah(&s).unwrap();
        assert_relative_eq!(f.singular[0], 0.5f64.exp(), epsilon = 1e-10);
        assert_relative_eq!(f.singular[1], 0.5f64.exp(), epsilon = 1e-10);
        assert_relative_eq!(f.singular[2], 1.0, epsilon = 1e-10);
        assert!(f.r1.residual() < 1e-10);
        assert!(f.r2.residual() < 1e-10);
        assert!(orthogonality_residual(f.r1.matrix()) < 1e-10);
        assert!(orthogonality_residual(f.r2.matrix()) < 1e-10);
        assert!((f.reconstruct() - s.matrix()).norm() < 1e-10);
    }
}
