//! Quadratic Hamiltonian of probe plus network, its exact symplectic
//! propagator, the renormalized-quadrature frame and measurement masks.
//!
//! `H = 1/2 p^T p + 1/2 q^T V q` with `q = (q_S, q_1..q_N)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::netmodel::CouplingGraph;
use crate::symplectic::{bloch_messiah, squeezer_block, symplectic_form, SymplecticMatrix};

/// How network couplings enter the potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingConvention {
    /// `g_ij (q_i - q_j)^2 / 2`: `V_ii = omega_i^2 + sum_j g_ij`, `V_ij = -g_ij`.
    #[default]
    Spring,
    /// `g_ij q_i q_j`: `V_ii = omega_i^2`, `V_ij = g_ij`.
    Bilinear,
}

/// Symmetric eigendecomposition `A = O diag(lambda) O^T` with eigenvalues ascending.
#[derive(Debug, Clone)]
struct SortedEigen {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl SortedEigen {
    fn new(a: &DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(a.clone());
        let mut order: Vec<usize> = (0..a.nrows()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = DMatrix::zeros(a.nrows(), a.ncols());
        for (dst, &src) in order.iter().enumerate() {
            let mut col = eig.eigenvectors.column(src).into_owned();
            if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    col.neg_mut();
                }
            }
            vectors.set_column(dst, &col);
        }
        SortedEigen { values, vectors }
    }
}

/// Potential matrix of the `M = N + 1` oscillators and its normal modes.
#[derive(Debug, Clone)]
pub struct QuadraticModel {
    v: DMatrix<f64>,
    frequencies: Vec<f64>,
    site: usize,
    coupling: f64,
    normal_freqs: Vec<f64>,
    normal_modes: DMatrix<f64>,
    env_freqs: Vec<f64>,
    env_modes: DMatrix<f64>,
}

impl QuadraticModel {
    /// Builds the model with spring couplings inside the network.
    pub fn assemble(graph: &CouplingGraph) -> Result<Self> {
        Self::assemble_with(graph, CouplingConvention::Spring)
    }

    pub fn assemble_with(graph: &CouplingGraph, convention: CouplingConvention) -> Result<Self> {
        graph.validate()?;
        let probe = graph
            .probe()
            .ok_or_else(|| Error::Invalid("no probe attached to the network".into()))?;
        let n = graph.n_nodes();
        let m = n + 1;

        let mut ve = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            graph.omega().iter().map(|w| w * w),
        ));
        for (i, j, g) in graph.edges() {
            match convention {
                CouplingConvention::Spring => {
                    ve[(i, i)] += g;
                    ve[(j, j)] += g;
                    ve[(i, j)] -= g;
                    ve[(j, i)] -= g;
                }
                CouplingConvention::Bilinear => {
                    ve[(i, j)] += g;
                    ve[(j, i)] += g;
                }
            }
        }

        let mut v = DMatrix::zeros(m, m);
        v.view_mut((1, 1), (n, n)).copy_from(&ve);
        v[(0, 0)] = probe.omega * probe.omega;
        v[(0, probe.site + 1)] = probe.coupling;
        v[(probe.site + 1, 0)] = probe.coupling;

        let full = SortedEigen::new(&v);
        if full.values[0] <= 0.0 {
            return Err(Error::Unstable {
                eigenvalue: full.values[0],
            });
        }
        let env = SortedEigen::new(&ve);
        if env.values[0] <= 0.0 {
            return Err(Error::Unstable {
                eigenvalue: env.values[0],
            });
        }

        let mut frequencies = Vec::with_capacity(m);
        frequencies.push(probe.omega);
        frequencies.extend_from_slice(graph.omega());

        Ok(QuadraticModel {
            v,
            frequencies,
            site: probe.site,
            coupling: probe.coupling,
            normal_freqs: full.values.iter().map(|x| x.sqrt()).collect(),
            normal_modes: full.vectors,
            env_freqs: env.values.iter().map(|x| x.sqrt()).collect(),
            env_modes: env.vectors,
        })
    }

    /// Number of modes `M` (probe included).
    pub fn modes(&self) -> usize {
        self.v.nrows()
    }

    pub fn potential(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Bare frequencies `(omega_S, omega_1..omega_N)` used by the
    /// renormalized frame.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// 0-based network node the probe couples to.
    pub fn probe_site(&self) -> usize {
        self.site
    }

    pub fn probe_coupling(&self) -> f64 {
        self.coupling
    }

    pub fn probe_omega(&self) -> f64 {
        self.frequencies[0]
    }

    /// Normal-mode frequencies of the whole system, ascending.
    pub fn normal_frequencies(&self) -> &[f64] {
        &self.normal_freqs
    }

    /// Columns are the normal modes matching [`Self::normal_frequencies`].
    pub fn normal_modes(&self) -> &DMatrix<f64> {
        &self.normal_modes
    }

    /// Normal-mode frequencies `Omega_n` of the network alone, ascending.
    pub fn env_frequencies(&self) -> &[f64] {
        &self.env_freqs
    }

    /// `O` with `V_E = O diag(Omega_n^2) O^T`.
    pub fn env_modes(&self) -> &DMatrix<f64> {
        &self.env_modes
    }

    /// `H_mat = diag(V, I)` so that the energy is `x^T H_mat x / 2`.
    pub fn hamiltonian_matrix(&self) -> DMatrix<f64> {
        let m = self.modes();
        let mut h = DMatrix::identity(2 * m, 2 * m);
        h.view_mut((0, 0), (m, m)).copy_from(&self.v);
        h
    }

    /// Exact propagator in bare quadratures,
    /// `[[cos Wt, W^-1 sin Wt], [-W sin Wt, cos Wt]]` with `W = V^{1/2}`.
    pub fn evolve_bare(&self, t: f64) -> Result<SymplecticMatrix> {
        if !(t >= 0.0 && t.is_finite()) {
            return invalid(format!("evolution time must be finite and >= 0, got {t}"));
        }
        let m = self.modes();
        if t == 0.0 {
            return Ok(SymplecticMatrix::identity(m));
        }
        let o = &self.normal_modes;
        let ot = o.transpose();
        let spectral = |f: &dyn Fn(f64) -> f64| {
            let mut scaled = o.clone();
            for (j, &w) in self.normal_freqs.iter().enumerate() {
                scaled.column_mut(j).scale_mut(f(w));
            }
            &scaled * &ot
        };
        let c = spectral(&|w| (w * t).cos());
        let s_over = spectral(&|w| (w * t).sin() / w);
        let s_times = spectral(&|w| -(w * t).sin() * w);

        let mut s = DMatrix::zeros(2 * m, 2 * m);
        s.view_mut((0, 0), (m, m)).copy_from(&c);
        s.view_mut((0, m), (m, m)).copy_from(&s_over);
        s.view_mut((m, 0), (m, m)).copy_from(&s_times);
        s.view_mut((m, m), (m, m)).copy_from(&c);
        Ok(SymplecticMatrix::from_raw(s))
    }

    /// Diagonal of `T = diag(sqrt(omega), 1/sqrt(omega))`.
    pub fn renormalization(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.frequencies.iter().map(|w| w.sqrt()).collect();
        t.extend(self.frequencies.iter().map(|w| 1.0 / w.sqrt()));
        t
    }

    /// `T S T^-1`: in this frame each uncoupled oscillator has vacuum `I/2`
    /// and rotates freely.
    pub fn renormalize(&self, s: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        let m = self.modes();
        if s.modes() != m {
            return Err(Error::Dimension {
                expected: 2 * m,
                got: 2 * s.modes(),
            });
        }
        let t = self.renormalization();
        let out = DMatrix::from_fn(2 * m, 2 * m, |a, b| t[a] * s.matrix()[(a, b)] / t[b]);
        Ok(SymplecticMatrix::from_raw(out))
    }

    /// Renormalized propagator `S~(t)`.
    pub fn evolve(&self, t: f64) -> Result<SymplecticMatrix> {
        self.renormalize(&self.evolve_bare(t)?)
    }

    /// `S_eff = S~ S_in` with `S_in` the product of the single-mode squeezers in `prep`.
    pub fn compose_preparation(
        &self,
        s_tilde: &SymplecticMatrix,
        prep: &[ModeSqueeze],
    ) -> Result<SymplecticMatrix> {
        let m = self.modes();
        if prep.len() != m {
            return Err(Error::Dimension {
                expected: m,
                got: prep.len(),
            });
        }
        if s_tilde.modes() != m {
            return Err(Error::Dimension {
                expected: 2 * m,
                got: 2 * s_tilde.modes(),
            });
        }
        Ok(s_tilde.compose(&preparation_matrix(prep)))
    }
}

/// Squeezing `r` of one mode along the quadrature at angle `phi / 2`
/// (`phi = 0` squeezes `q`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeSqueeze {
    pub r: f64,
    #[serde(default)]
    pub phi: f64,
}

impl ModeSqueeze {
    pub const NONE: ModeSqueeze = ModeSqueeze { r: 0.0, phi: 0.0 };

    pub fn new(r: f64, phi: f64) -> Self {
        ModeSqueeze { r, phi }
    }
}

/// Block-diagonal product of single-mode squeezers.
pub fn preparation_matrix(prep: &[ModeSqueeze]) -> SymplecticMatrix {
    let m = prep.len();
    let mut s = DMatrix::identity(2 * m, 2 * m);
    for (i, sq) in prep.iter().enumerate() {
        let b = squeezer_block(sq.r, sq.phi);
        s[(i, i)] = b[0][0];
        s[(i, m + i)] = b[0][1];
        s[(m + i, i)] = b[1][0];
        s[(m + i, m + i)] = b[1][1];
    }
    SymplecticMatrix::from_raw(s)
}

/// Row pair of the passive factor `R1` that reads out the probe quadratures.
///
/// `q_row[j]` and `q_row[M + j]` weight `q_j` and `p_j` in the detected
/// probe `q`. The `p` row follows from the orthogonal-symplectic structure.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeMask {
    pub q_row: Vec<f64>,
    pub p_row: Vec<f64>,
}

impl ProbeMask {
    pub fn from_passive(r1: &SymplecticMatrix) -> Self {
        let m = r1.modes();
        let mat = r1.matrix();
        ProbeMask {
            q_row: mat.row(0).iter().copied().collect(),
            p_row: mat.row(m).iter().copied().collect(),
        }
    }

    pub fn modes(&self) -> usize {
        self.q_row.len() / 2
    }

    /// `(q coefficient, p coefficient)` per mode.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let m = self.modes();
        (0..m).map(move |j| (self.q_row[j], self.q_row[m + j]))
    }

    /// `max(| |q_row| - 1 |, | |p_row| - 1 |)`.
    pub fn norm_residual(&self) -> f64 {
        let nq = self.q_row.iter().map(|x| x * x).sum::<f64>().sqrt();
        let np = self.p_row.iter().map(|x| x * x).sum::<f64>().sqrt();
        (nq - 1.0).abs().max((np - 1.0).abs())
    }

    /// `q_row Omega p_row^T`, equal to 1 for a canonical pair.
    pub fn pairing(&self) -> f64 {
        let omega = symplectic_form(self.modes());
        let r = DVector::from_column_slice(&self.q_row);
        let s = DVector::from_column_slice(&self.p_row);
        r.dot(&(omega * s))
    }
}

/// Measurement mask for `S_eff`, taken from its Bloch-Messiah `R1`.
pub fn probe_mask(s_eff: &SymplecticMatrix) -> Result<ProbeMask> {
    Ok(ProbeMask::from_passive(&bloch_messiah(s_eff)?.r1))
}
