//! Property tests for the vectorization identities, norm bookkeeping and the
//! minimum-norm solver, plus the randomized invariants the domain types
//! promise.

mod common;

use common::*;
use gspp_core::matrix::{norm2, CMat, RMat};
use gspp_core::problems::SplitMix64;
use gspp_core::structured::MinNormSolver;
use gspp_core::system::{
    default_relative_weights, derive_pattern, weighted_norm, PerturbationSet, StructureCase,
    Weight, Weights,
};
use gspp_core::unstructured::rigal_gaches;
use gspp_core::vecops::{
    build_mask_diagonals, build_scalings, build_skew_basis, build_sym_basis, kron, vec, vec_skew,
    vec_sym, MaskKind, SkewBasis, SymBasis,
};
use gspp_core::{gen_random_sparse, CandidateSolution};
use num_complex::Complex64;
use proptest::prelude::*;

fn hadamard(m: &RMat, mask: &RMat) -> RMat {
    let mut out = m.clone();
    for (v, t) in out.data_mut().iter_mut().zip(mask.data()) {
        *v *= t;
    }
    out
}

proptest! {
    #[test]
    fn sym_reconstruction_is_exact(seed in 0u64..-1i32 as u64, order in 1usize..=8) {
        let mut rng = SplitMix64::new(seed);
        let m = random_symmetric(&mut rng, order);
        let g = vec_sym(&m).unwrap();
        prop_assert_eq!(SymBasis::new(order).apply(&g.data), vec(&m).data);
    }

    #[test]
    fn skew_reconstruction_is_exact(seed in 0u64..-1i32 as u64, order in 1usize..=8) {
        let mut rng = SplitMix64::new(seed);
        let m = random_skew(&mut rng, order);
        let g = vec_skew(&m).unwrap();
        prop_assert_eq!(SkewBasis::new(order).apply(&g.data), vec(&m).data);
    }

    #[test]
    fn scalings_are_frobenius_isometries(seed in 0u64..1u64 << 48, order in 1usize..=8) {
        let mut rng = SplitMix64::new(seed);
        let (d_s, d_sk) = build_scalings(order);

        let m = random_symmetric(&mut rng, order);
        let g = vec_sym(&m).unwrap();
        let scaled: Vec<f64> = g.data.iter().zip(&d_s).map(|(v, d)| v * d).collect();
        prop_assert!((norm2(&scaled) - m.frobenius()).abs() <= 1e-14 * m.frobenius().max(1.0));

        let k = random_skew(&mut rng, order);
        let gk = vec_skew(&k).unwrap();
        let scaled_k: Vec<f64> = gk.data.iter().zip(&d_sk).map(|(v, d)| v * d).collect();
        prop_assert!((norm2(&scaled_k) - k.frobenius()).abs() <= 1e-14 * k.frobenius().max(1.0));
    }

    #[test]
    fn mask_identities_hold_exactly(seed in 0u64..1u64 << 48, order in 1usize..=8) {
        let mut rng = SplitMix64::new(seed);
        let theta = random_symmetric_mask(&mut rng, order, 0.6);

        let m = random_symmetric(&mut rng, order);
        let masked = hadamard(&m, &theta);
        let phi = build_mask_diagonals(&theta, MaskKind::SymLower).unwrap();
        let gen = vec_sym(&masked).unwrap();
        let phi_gen: Vec<f64> = gen.data.iter().zip(&phi).map(|(v, p)| v * p).collect();
        prop_assert_eq!(SymBasis::new(order).apply(&phi_gen), vec(&masked).data);

        let k = random_skew(&mut rng, order);
        let masked_k = hadamard(&k, &theta);
        let psi = build_mask_diagonals(&theta, MaskKind::SkewStrictLower).unwrap();
        let gen_k = vec_skew(&masked_k).unwrap();
        let psi_gen: Vec<f64> = gen_k.data.iter().zip(&psi).map(|(v, p)| v * p).collect();
        prop_assert_eq!(SkewBasis::new(order).apply(&psi_gen), vec(&masked_k).data);

        // Full-vec form: Sigma applied to an already-masked matrix fixes it.
        let full = random_rmat(&mut rng, order, order);
        let masked_full = hadamard(&full, &theta);
        let sigma = build_mask_diagonals(&theta, MaskKind::Full).unwrap();
        let v = vec(&masked_full).data;
        let sv: Vec<f64> = v.iter().zip(&sigma).map(|(x, s)| x * s).collect();
        prop_assert_eq!(sv, v);
    }

    #[test]
    fn kron_vec_identities(seed in 0u64..1u64 << 48, p in 1usize..=5, q in 1usize..=5) {
        let mut rng = SplitMix64::new(seed);
        let a = random_rmat(&mut rng, p, q);
        let u = random_vec(&mut rng, q);
        let v = random_vec(&mut rng, p);

        let direct = a.matvec(&u);
        let ut = RMat::from_rows(&[&u]);
        let lifted = kron(&ut, &RMat::identity(p)).matvec(&vec(&a).data);
        let scale = norm2(&direct).max(1.0);
        for (d, l) in direct.iter().zip(&lifted) {
            prop_assert!((d - l).abs() <= 1e-13 * scale);
        }

        let direct_t = a.matvec_t(&v);
        let vt = RMat::from_rows(&[&v]);
        let lifted_t = kron(&RMat::identity(q), &vt).matvec(&vec(&a).data);
        let scale_t = norm2(&direct_t).max(1.0);
        for (d, l) in direct_t.iter().zip(&lifted_t) {
            prop_assert!((d - l).abs() <= 1e-13 * scale_t);
        }
    }

    #[test]
    fn weighted_norm_is_absolutely_homogeneous(seed in 0u64..1u64 << 48, t in 0.0f64..8.0) {
        let mut rng = SplitMix64::new(seed);
        let (n, m) = (3, 2);
        let p = PerturbationSet {
            de: CMat::from_parts(&random_rmat(&mut rng, n, n), &random_rmat(&mut rng, n, n)),
            df: CMat::from_parts(&random_rmat(&mut rng, m, n), &random_rmat(&mut rng, m, n)),
            dh: CMat::from_parts(&random_rmat(&mut rng, m, n), &random_rmat(&mut rng, m, n)),
            dg: CMat::from_parts(&random_rmat(&mut rng, m, m), &random_rmat(&mut rng, m, m)),
            dq: random_cvec(&mut rng, n),
            dr: random_cvec(&mut rng, m),
        };
        let w = Weights {
            alpha1: Weight::Finite(0.5),
            alpha2: Weight::Finite(2.0),
            alpha3: Weight::Finite(1.0),
            alpha4: Some(Weight::Finite(3.0)),
            beta1: Weight::Finite(1.5),
            beta2: Weight::Finite(0.25),
        };
        let scale_set = |p: &PerturbationSet, t: f64| {
            let sc = |m: &CMat| {
                let mut out = m.clone();
                for v in out.data_mut() {
                    *v *= t;
                }
                out
            };
            PerturbationSet {
                de: sc(&p.de),
                df: sc(&p.df),
                dh: sc(&p.dh),
                dg: sc(&p.dg),
                dq: p.dq.iter().map(|v| v * t).collect(),
                dr: p.dr.iter().map(|v| v * t).collect(),
            }
        };
        let base = weighted_norm(&p, &w, StructureCase::CaseIII).unwrap();
        let scaled = weighted_norm(&scale_set(&p, t), &w, StructureCase::CaseIII).unwrap();
        prop_assert!((scaled - t * base).abs() <= 1e-12 * (t * base).max(1e-12));
    }

    #[test]
    fn pattern_respects_masking(seed in 0u64..1u64 << 48) {
        // sgn of a masked block equals the mask restricted to the block's
        // original nonzeros.
        let mut rng = SplitMix64::new(seed);
        let sys = gen_random_sparse(rng.next_u64(), 4, 3, 0.7, StructureCase::CaseI).unwrap();
        let pattern = derive_pattern(&sys);
        let mask = random_mask(&mut rng, 3, 4, 0.5);
        let mut masked_f = sys.f().clone();
        for j in 0..4 {
            for i in 0..3 {
                if mask[(i, j)] == 0.0 {
                    masked_f[(i, j)] = Complex64::ZERO;
                }
            }
        }
        let sys2 = gspp_core::GsppSystem::with_shared_f(
            StructureCase::CaseI,
            sys.e().clone(),
            masked_f,
            sys.g().clone(),
            sys.q().to_vec(),
            sys.r().to_vec(),
        )
        .unwrap();
        let masked_pattern = derive_pattern(&sys2);
        for j in 0..4 {
            for i in 0..3 {
                prop_assert_eq!(
                    masked_pattern.theta_f[(i, j)],
                    mask[(i, j)] * pattern.theta_f[(i, j)]
                );
            }
        }
        // Hermitian block: the derived mask is symmetric.
        prop_assert!(pattern.theta_e.is_symmetric());
    }

    #[test]
    fn rigal_gaches_is_scale_invariant(seed in 0u64..1u64 << 48, t in 0.01f64..100.0) {
        let mut rng = SplitMix64::new(seed);
        let sys = gen_random_sparse(rng.next_u64(), 3, 2, 0.8, StructureCase::CaseII).unwrap();
        let sol = random_solution(&mut rng, 3, 2);
        let be = rigal_gaches(&sys, &sol).unwrap();
        let sc = |m: &CMat| {
            let mut out = m.clone();
            for v in out.data_mut() {
                *v *= t;
            }
            out
        };
        let scaled = gspp_core::GsppSystem::with_shared_f(
            StructureCase::CaseII,
            sc(sys.e()),
            sc(sys.f()),
            sc(sys.g()),
            sys.q().iter().map(|v| v * t).collect(),
            sys.r().iter().map(|v| v * t).collect(),
        )
        .unwrap();
        let be_scaled = rigal_gaches(&scaled, &sol).unwrap();
        prop_assert!((be - be_scaled).abs() <= 1e-12 * be.max(1e-300));
    }

    #[test]
    fn min_norm_matches_normal_equations_oracle(seed in 0u64..1u64 << 48) {
        // Random full-row-rank 6 x 20 system: an identity block guarantees
        // the rank, the oracle solves A Aᵀ y = rhs by Gaussian elimination.
        let mut rng = SplitMix64::new(seed);
        let rows = 6;
        let cols = 20;
        let mut a = RMat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                a[(i, j)] = if j >= cols - rows {
                    if j - (cols - rows) == i { 1.0 } else { 0.0 }
                } else {
                    rng.next_normal()
                };
            }
        }
        let rhs = random_vec(&mut rng, rows);
        let z = MinNormSolver::new(&a).unwrap().solve(&rhs);

        // Oracle: z = Aᵀ (A Aᵀ)⁻¹ rhs.
        let at = a.transpose();
        let aat = a.matmul(&at);
        let mut aug = aat.clone();
        let mut y = rhs.clone();
        for k in 0..rows {
            let mut piv = k;
            for i in (k + 1)..rows {
                if aug[(i, k)].abs() > aug[(piv, k)].abs() {
                    piv = i;
                }
            }
            for j in 0..rows {
                let t = aug[(k, j)];
                aug[(k, j)] = aug[(piv, j)];
                aug[(piv, j)] = t;
            }
            y.swap(k, piv);
            for i in (k + 1)..rows {
                let f = aug[(i, k)] / aug[(k, k)];
                for j in k..rows {
                    aug[(i, j)] -= f * aug[(k, j)];
                }
                y[i] -= f * y[k];
            }
        }
        for k in (0..rows).rev() {
            for j in (k + 1)..rows {
                y[k] -= aug[(k, j)] * y[j];
            }
            y[k] /= aug[(k, k)];
        }
        let z_oracle = at.matvec(&y);
        let scale = norm2(&z_oracle).max(1e-30);
        for (za, zb) in z.iter().zip(&z_oracle) {
            prop_assert!((za - zb).abs() <= 1e-10 * scale);
        }
    }
}

#[test]
fn basis_columns_are_orthogonal() {
    for order in 1..=8 {
        let j_s = build_sym_basis(order);
        let gram = j_s.transpose().matmul(&j_s);
        for j in 0..gram.ncols() {
            for i in 0..gram.nrows() {
                let expected = if i == j {
                    // One entry for diagonal coordinates, two otherwise.
                    if gram[(i, j)] == 1.0 { 1.0 } else { 2.0 }
                } else {
                    0.0
                };
                assert_eq!(gram[(i, j)], expected, "J_S gram at ({}, {})", i, j);
            }
        }

        let j_sk = build_skew_basis(order);
        let gram_k = j_sk.transpose().matmul(&j_sk);
        for j in 0..gram_k.ncols() {
            for i in 0..gram_k.nrows() {
                assert_eq!(gram_k[(i, j)], if i == j { 2.0 } else { 0.0 });
            }
        }
    }
}

#[test]
fn relative_weights_match_reciprocal_norms() {
    let mut rng = SplitMix64::new(11);
    let sys = gen_random_sparse(rng.next_u64(), 4, 3, 0.9, StructureCase::CaseIII).unwrap();
    let w = default_relative_weights(&sys, false).unwrap();
    assert!((w.alpha1.value().unwrap() - 1.0 / sys.e().frobenius()).abs() < 1e-15);
    assert!((w.alpha3.value().unwrap() - 1.0 / sys.h().frobenius()).abs() < 1e-15);
    assert!(
        (w.alpha4.unwrap().value().unwrap() - 1.0 / sys.g().frobenius()).abs() < 1e-15
    );
}

#[test]
fn zero_solution_rigal_gaches_is_one() {
    let sys = gen_random_sparse(3, 3, 2, 1.0, StructureCase::CaseI).unwrap();
    let sol = CandidateSolution::new(
        vec![Complex64::ZERO; 3],
        vec![Complex64::ZERO; 2],
    );
    let be = rigal_gaches(&sys, &sol).unwrap();
    assert!((be - 1.0).abs() < 1e-14);
}
