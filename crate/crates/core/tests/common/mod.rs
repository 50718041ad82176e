#![allow(dead_code)]

//! Shared helpers for the integration suites: deterministic random matrices,
//! systems and solutions built on the crate's seeded generator.

use gspp_core::matrix::{CMat, RMat};
use gspp_core::problems::SplitMix64;
use gspp_core::system::{CandidateSolution, GsppSystem, StructureCase};
use gspp_core::vecops::{skew_from_generator, skew_len, sym_from_generator, sym_len};
use num_complex::Complex64;

pub fn random_vec(rng: &mut SplitMix64, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.next_normal()).collect()
}

pub fn random_cvec(rng: &mut SplitMix64, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.next_normal(), rng.next_normal()))
        .collect()
}

pub fn random_rmat(rng: &mut SplitMix64, rows: usize, cols: usize) -> RMat {
    let mut m = RMat::zeros(rows, cols);
    for v in m.data_mut() {
        *v = rng.next_normal();
    }
    m
}

/// Exactly symmetric random matrix, built through its generator vector.
pub fn random_symmetric(rng: &mut SplitMix64, order: usize) -> RMat {
    let gen = random_vec(rng, sym_len(order));
    sym_from_generator(&gen, order)
}

/// Exactly skew-symmetric random matrix.
pub fn random_skew(rng: &mut SplitMix64, order: usize) -> RMat {
    let gen = random_vec(rng, skew_len(order));
    skew_from_generator(&gen, order)
}

/// Random symmetric 0/1 mask with roughly the given fill ratio.
pub fn random_symmetric_mask(rng: &mut SplitMix64, order: usize, fill: f64) -> RMat {
    let mut m = RMat::zeros(order, order);
    for j in 0..order {
        for i in j..order {
            if rng.next_f64() < fill {
                m[(i, j)] = 1.0;
                m[(j, i)] = 1.0;
            }
        }
    }
    m
}

pub fn random_mask(rng: &mut SplitMix64, rows: usize, cols: usize, fill: f64) -> RMat {
    let mut m = RMat::zeros(rows, cols);
    for v in m.data_mut() {
        if rng.next_f64() < fill {
            *v = 1.0;
        }
    }
    m
}

/// Strips imaginary parts from every block and the right-hand sides, keeping
/// case invariants intact (a Hermitian block becomes exactly symmetric).
pub fn realify_system(sys: &GsppSystem) -> GsppSystem {
    let re = |m: &CMat| CMat::from_parts(&m.re(), &RMat::zeros(m.nrows(), m.ncols()));
    let rev = |v: &[Complex64]| -> Vec<Complex64> {
        v.iter().map(|z| Complex64::new(z.re, 0.0)).collect()
    };
    GsppSystem::new(
        sys.case(),
        re(sys.e()),
        re(sys.f()),
        re(sys.h()),
        re(sys.g()),
        rev(sys.q()),
        rev(sys.r()),
    )
    .expect("realified system keeps its invariants")
}

pub fn random_solution(rng: &mut SplitMix64, n: usize, m: usize) -> CandidateSolution {
    CandidateSolution::new(random_cvec(rng, n), random_cvec(rng, m))
}

pub fn random_real_solution(rng: &mut SplitMix64, n: usize, m: usize) -> CandidateSolution {
    let real = |rng: &mut SplitMix64, len: usize| -> Vec<Complex64> {
        (0..len)
            .map(|_| Complex64::new(rng.next_normal(), 0.0))
            .collect()
    };
    CandidateSolution::new(real(rng, n), real(rng, m))
}

/// Independent minimum-norm oracle: one-sided Jacobi SVD of Aᵀ, then
/// z = Σ_k u_k (v_kᵀ rhs) / σ_k. A completely different route from the
/// Householder factorization in the crate (Hestenes rotations, explicit
/// singular subspaces), and accurate to near machine precision on the
/// well-conditioned instances the sweeps generate.
pub fn svd_min_norm_oracle(a: &RMat, rhs: &[f64]) -> Vec<f64> {
    let mut w = a.transpose(); // becomes U·Σ (cols of length `long`)
    let long = w.nrows();
    let short = w.ncols();
    let mut v = RMat::identity(short);
    for _sweep in 0..100 {
        let mut converged = true;
        for p in 0..short {
            for q in (p + 1)..short {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..long {
                    app += w[(i, p)] * w[(i, p)];
                    aqq += w[(i, q)] * w[(i, q)];
                    apq += w[(i, p)] * w[(i, q)];
                }
                if apq.abs() <= 1e-15 * (app * aqq).sqrt() {
                    continue;
                }
                converged = false;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..long {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
                for i in 0..short {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if converged {
            break;
        }
    }
    let mut s2 = vec![0.0; short];
    for (k, s) in s2.iter_mut().enumerate() {
        for i in 0..long {
            *s += w[(i, k)] * w[(i, k)];
        }
    }
    let max_s2 = s2.iter().cloned().fold(0.0f64, f64::max);
    let mut z = vec![0.0; long];
    for k in 0..short {
        if s2[k] <= 1e-26 * max_s2 {
            continue;
        }
        let mut proj = 0.0;
        for i in 0..short {
            proj += v[(i, k)] * rhs[i];
        }
        let fac = proj / s2[k];
        for i in 0..long {
            z[i] += fac * w[(i, k)];
        }
    }
    z
}

/// Instance sizes for the randomized optimality sweeps: n + m <= 12.
pub fn sweep_dims(k: usize) -> (usize, usize) {
    let n = 2 + (k % 7);
    let m = 1 + (k % 4);
    (n, m)
}

pub fn sweep_density(k: usize) -> f64 {
    [0.3, 0.6, 1.0][k % 3]
}

pub const CASES: [StructureCase; 3] = [
    StructureCase::CaseI,
    StructureCase::CaseII,
    StructureCase::CaseIII,
];
