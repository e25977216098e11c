#![allow(dead_code)]

use std::collections::BTreeMap;

use cvnet_core::dynamics::QuadraticModel;
use cvnet_core::netmodel::{CouplingGraph, ProbeAttachment};
use cvnet_core::symplectic::{passive_from_unitary, SymplecticMatrix};
use cvnet_core::Error;
use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    cvnet_core::seeds::rng(seed)
}

/// Matrix exponential by Pade-13 scaling and squaring.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(s);
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * B[13] + &a4 * B[11] + &a2 * B[9]) + &a6 * B[7] + &a4 * B[5] + &a2 * B[3] + &id * B[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * B[12] + &a4 * B[10] + &a2 * B[8]) + &a6 * B[6] + &a4 * B[4] + &a2 * B[2] + &id * B[0];
    let mut r = (&v - &u).lu().solve(&(&v + &u)).expect("Pade denominator is invertible");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Generator `[[0, I], [-V, 0]]` of the bare dynamics.
pub fn generator(v: &DMatrix<f64>) -> DMatrix<f64> {
    let m = v.nrows();
    let mut g = DMatrix::zeros(2 * m, 2 * m);
    g.view_mut((0, m), (m, m)).copy_from(&DMatrix::identity(m, m));
    g.view_mut((m, 0), (m, m)).copy_from(&(-v));
    g
}

/// Random connected graph on `n` nodes with a stable probe attachment.
pub fn random_stable_graph(rng: &mut ChaCha8Rng, n: usize) -> CouplingGraph {
    loop {
        let omega: Vec<f64> = (0..n).map(|_| rng.random_range(0.15..0.6)).collect();
        let mut edges = BTreeMap::new();
        // spanning path in random order keeps it connected
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        for w in order.windows(2) {
            edges.insert((w[0].min(w[1]), w[0].max(w[1])), rng.random_range(0.01..0.15));
        }
        for _ in 0..n {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            if i != j {
                edges.insert((i.min(j), i.max(j)), rng.random_range(0.01..0.15));
            }
        }
        let mut g = CouplingGraph::new(omega, edges).expect("valid random graph");
        let omega_s = rng.random_range(0.15..1.0);
        let site = rng.random_range(0..n);
        let k = rng.random_range(0.0..0.05);
        g.attach_probe(ProbeAttachment {
            site,
            coupling: k,
            omega: omega_s,
        })
        .unwrap();
        match QuadraticModel::assemble(&g) {
            Ok(m) if m.normal_frequencies()[0] > 0.05 => return g,
            Ok(_) | Err(Error::Unstable { .. }) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

pub fn random_stable_model(rng: &mut ChaCha8Rng, n: usize) -> QuadraticModel {
    QuadraticModel::assemble(&random_stable_graph(rng, n)).unwrap()
}

/// Haar-random unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<Complex<f64>> {
    let z = DMatrix::from_fn(m, m, |_, _| {
        Complex::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let (q, r) = z.qr().unpack();
    let phases = DMatrix::from_diagonal(&r.diagonal().map(|x| if x.norm() > 0.0 { x / x.norm() } else { Complex::new(1.0, 0.0) }));
    q * phases
}

pub fn random_passive(rng: &mut ChaCha8Rng, m: usize) -> SymplecticMatrix {
    passive_from_unitary(&random_unitary(rng, m))
}

/// `diag(e^r, e^-r)` with the given squeezings.
pub fn squeeze_diag(r: &[f64]) -> SymplecticMatrix {
    let m = r.len();
    let mut d = DMatrix::zeros(2 * m, 2 * m);
    for (i, &x) in r.iter().enumerate() {
        d[(i, i)] = x.exp();
        d[(m + i, m + i)] = (-x).exp();
    }
    SymplecticMatrix::new(d, 1e-12).unwrap()
}

/// `R_a Delta R_c` with Haar-random passive factors; returns the matrix
/// and the squeezings sorted descending.
pub fn random_symplectic(rng: &mut ChaCha8Rng, m: usize, r_max: f64) -> (SymplecticMatrix, Vec<f64>) {
    let mut r: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..r_max)).collect();
    let s = random_passive(rng, m)
        .compose(&squeeze_diag(&r))
        .compose(&random_passive(rng, m));
    r.sort_by(|a, b| b.total_cmp(a));
    (s, r)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}
