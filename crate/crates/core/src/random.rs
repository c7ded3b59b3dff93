//! Random instances for property sweeps: Haar unitaries, eigenvalue-random
//! states, isometry-dilated channels and rank-one qubit POVMs.
//!
//! Everything takes an explicit RNG so sweeps stay reproducible. Use
//! [`stream_rng`] to derive independent per-item generators from a seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::qlin::{psd_sqrt_inv, CMatrix, CVector, C64};
use crate::states::{BellDiagonal, TwoQubitState};

/// Generator for item `index` of a seeded sweep. Each index gets its own
/// ChaCha stream, so results do not depend on scheduling.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Haar-random unit vector in `C^dim`.
pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::new((0..dim).map(|_| gaussian(rng)).collect()).expect("finite");
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

/// Haar-random unitary by Gram-Schmidt on a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let mut cols: Vec<CVector> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = CVector::new((0..n).map(|_| gaussian(rng)).collect()).expect("finite");
        for u in &cols {
            let proj = u.inner(&v);
            v = v.add(&u.scale(-proj));
        }
        if let Some(u) = v.normalized().filter(|_| v.norm() > 1e-8) {
            cols.push(u);
        }
    }
    let mut m = CMatrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            m[(i, j)] = c[i];
        }
    }
    m
}

/// Uniform point on the probability simplex of dimension `k`.
pub fn random_simplex<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// `U diag(p) U†` with `U` Haar and `p` uniform on the simplex.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    let u = random_unitary(4, rng);
    let p = random_simplex(4, rng);
    let rho = u.sandwich(&CMatrix::diag_real(&p)).hermitian_part();
    TwoQubitState::new(rho).expect("valid by construction")
}

/// Uniform Bell-diagonal weights, canonicalized.
pub fn random_bell_diagonal<R: Rng + ?Sized>(rng: &mut R) -> BellDiagonal {
    let p = random_simplex(4, rng);
    let sum: f64 = p[..3].iter().sum();
    let raw = [p[0], p[1], p[2], (1.0 - sum).max(0.0)];
    BellDiagonal::new(raw).expect("simplex point")
}

/// Kraus operators of a random qubit channel with `env_dim` Kraus operators,
/// obtained from a Haar-random isometry `C² → C² ⊗ C^env_dim`.
pub fn random_kraus<R: Rng + ?Sized>(env_dim: usize, rng: &mut R) -> Vec<CMatrix> {
    let u = random_unitary(2 * env_dim, rng);
    (0..env_dim)
        .map(|e| {
            let mut k = CMatrix::zeros(2, 2);
            for out in 0..2 {
                for input in 0..2 {
                    k[(out, input)] = u[(out * env_dim + e, input)];
                }
            }
            k
        })
        .collect()
}

/// Random rank-one qubit POVM with `m` outcomes, as `(weight, unit vector)`
/// pairs. Random vectors `vᵢ` are made complete by `S^{-1/2}` with
/// `S = Σ vᵢvᵢ†`.
pub fn random_rank_one_povm<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<(f64, CVector)> {
    assert!(m >= 2, "a complete rank-one qubit POVM needs two outcomes");
    loop {
        let vs: Vec<CVector> = (0..m)
            .map(|_| CVector::new(vec![gaussian(rng), gaussian(rng)]).expect("finite"))
            .collect();
        let mut s = CMatrix::zeros(2, 2);
        for v in &vs {
            s = &s + &v.projector();
        }
        let Ok(w) = psd_sqrt_inv(&s.hermitian_part(), 1e-9) else {
            continue;
        };
        if s.hermitian_part().spectral_norm() < 1e-6 {
            continue;
        }
        let out: Vec<(f64, CVector)> = vs
            .iter()
            .filter_map(|v| {
                let m = w.matvec(v);
                let c = m.norm_sqr();
                m.normalized().map(|d| (c, d))
            })
            .collect();
        if out.len() == m {
            return out;
        }
    }
}
