//! Domain types for the generalized saddle point problem
//!
//! ```text
//! [ E  F* ] [ u ]   [ q ]
//! [ H  G  ] [ p ] = [ r ]
//! ```
//!
//! with E n×n, F and H m×n, G m×m, together with the structure-case metadata,
//! sparsity patterns, weight vectors, perturbation sets and the report type
//! produced by the backward-error computations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{cnorm2, CMat, RMat};

/// Which blocks carry Hermitian structure.
///
/// Case (i): E Hermitian, H = F. Case (ii): G Hermitian, H = F.
/// Case (iii): E and G Hermitian, F and H independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureCase {
    CaseI,
    CaseII,
    CaseIII,
}

impl StructureCase {
    pub fn shares_f(self) -> bool {
        matches!(self, StructureCase::CaseI | StructureCase::CaseII)
    }

    pub fn hermitian_e(self) -> bool {
        matches!(self, StructureCase::CaseI | StructureCase::CaseIII)
    }

    pub fn hermitian_g(self) -> bool {
        matches!(self, StructureCase::CaseII | StructureCase::CaseIII)
    }
}

impl std::fmt::Display for StructureCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StructureCase::CaseI => write!(f, "i"),
            StructureCase::CaseII => write!(f, "ii"),
            StructureCase::CaseIII => write!(f, "iii"),
        }
    }
}

/// The block system together with its structure case. Immutable after
/// construction; all invariants are checked exactly in `new`.
#[derive(Debug, Clone)]
pub struct GsppSystem {
    case: StructureCase,
    e: CMat,
    f: CMat,
    h: CMat,
    g: CMat,
    q: Vec<Complex64>,
    r: Vec<Complex64>,
}

impl GsppSystem {
    pub fn new(
        case: StructureCase,
        e: CMat,
        f: CMat,
        h: CMat,
        g: CMat,
        q: Vec<Complex64>,
        r: Vec<Complex64>,
    ) -> Result<Self> {
        let n = e.nrows();
        let m = f.nrows();
        if n == 0 || m == 0 {
            return Err(Error::DimensionMismatch(
                "both blocks must be nonempty (n >= 1 and m >= 1)".into(),
            ));
        }
        if e.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "E must be square, got {}x{}",
                e.nrows(),
                e.ncols()
            )));
        }
        for (name, b) in [("F", &f), ("H", &h)] {
            if b.nrows() != m || b.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{} must be {}x{}, got {}x{}",
                    name,
                    m,
                    n,
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        if g.nrows() != m || g.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "G must be {}x{}, got {}x{}",
                m,
                m,
                g.nrows(),
                g.ncols()
            )));
        }
        if q.len() != n || r.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "right-hand sides must have lengths {} and {}, got {} and {}",
                n,
                m,
                q.len(),
                r.len()
            )));
        }
        if case.hermitian_e() {
            if let Some((i, j)) = e.hermitian_defect() {
                return Err(Error::NotHermitian { block: "E", i, j });
            }
        }
        if case.hermitian_g() {
            if let Some((i, j)) = g.hermitian_defect() {
                return Err(Error::NotHermitian { block: "G", i, j });
            }
        }
        if case.shares_f() && !h.entrywise_eq(&f) {
            return Err(Error::BlocksDiffer {
                first: "H",
                second: "F",
            });
        }
        Ok(Self {
            case,
            e,
            f,
            h,
            g,
            q,
            r,
        })
    }

    /// Convenience constructor for cases (i) and (ii), where H aliases F.
    pub fn with_shared_f(
        case: StructureCase,
        e: CMat,
        f: CMat,
        g: CMat,
        q: Vec<Complex64>,
        r: Vec<Complex64>,
    ) -> Result<Self> {
        if !case.shares_f() {
            return Err(Error::InvalidParameter(
                "with_shared_f applies to cases (i) and (ii) only".into(),
            ));
        }
        let h = f.clone();
        Self::new(case, e, f, h, g, q, r)
    }

    pub fn case(&self) -> StructureCase {
        self.case
    }

    pub fn n(&self) -> usize {
        self.e.nrows()
    }

    pub fn m(&self) -> usize {
        self.g.nrows()
    }

    pub fn e(&self) -> &CMat {
        &self.e
    }

    pub fn f(&self) -> &CMat {
        &self.f
    }

    pub fn h(&self) -> &CMat {
        &self.h
    }

    pub fn g(&self) -> &CMat {
        &self.g
    }

    pub fn q(&self) -> &[Complex64] {
        &self.q
    }

    pub fn r(&self) -> &[Complex64] {
        &self.r
    }

    /// Frobenius norm of the full coefficient matrix, accumulated from the
    /// four stored blocks without materializing it.
    pub fn block_frobenius(&self) -> f64 {
        let s = self.e.frobenius().powi(2)
            + self.f.frobenius().powi(2)
            + self.h.frobenius().powi(2)
            + self.g.frobenius().powi(2);
        s.sqrt()
    }

    /// Applies the block matrix: returns (E u + F* p, H u + G p).
    pub fn matvec(&self, u: &[Complex64], p: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut top = self.e.matvec(u);
        for (t, v) in top.iter_mut().zip(self.f.conj_t_matvec(p)) {
            *t += v;
        }
        let mut bottom = self.h.matvec(u);
        for (b, v) in bottom.iter_mut().zip(self.g.matvec(p)) {
            *b += v;
        }
        (top, bottom)
    }

    /// Applies the block matrix to a stacked vector [u; p].
    pub fn matvec_flat(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n() + self.m());
        let (top, bottom) = self.matvec(&x[..self.n()], &x[self.n()..]);
        let mut out = top;
        out.extend(bottom);
        out
    }

    /// The stacked right-hand side [q; r].
    pub fn rhs_flat(&self) -> Vec<Complex64> {
        let mut out = self.q.clone();
        out.extend_from_slice(&self.r);
        out
    }
}

/// A computed solution pair whose backward error is sought.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSolution {
    pub u: Vec<Complex64>,
    pub p: Vec<Complex64>,
}

impl CandidateSolution {
    pub fn new(u: Vec<Complex64>, p: Vec<Complex64>) -> Self {
        Self { u, p }
    }

    pub fn from_flat(x: &[Complex64], n: usize) -> Self {
        Self {
            u: x[..n].to_vec(),
            p: x[n..].to_vec(),
        }
    }

    pub fn flat(&self) -> Vec<Complex64> {
        let mut out = self.u.clone();
        out.extend_from_slice(&self.p);
        out
    }

    pub fn norm2(&self) -> f64 {
        (cnorm2(&self.u).powi(2) + cnorm2(&self.p).powi(2)).sqrt()
    }

    pub fn check_dims(&self, system: &GsppSystem) -> Result<()> {
        if self.u.len() != system.n() || self.p.len() != system.m() {
            return Err(Error::DimensionMismatch(format!(
                "candidate solution has lengths {}/{}, system expects {}/{}",
                self.u.len(),
                self.p.len(),
                system.n(),
                system.m()
            )));
        }
        Ok(())
    }
}

/// Binary masks recording the nonzero pattern of each block.
#[derive(Debug, Clone)]
pub struct SparsityPattern {
    pub theta_e: RMat,
    pub theta_f: RMat,
    pub theta_h: RMat,
    pub theta_g: RMat,
}

impl SparsityPattern {
    /// The trivial pattern that masks nothing.
    pub fn all_ones(n: usize, m: usize) -> Self {
        let ones = |r: usize, c: usize| {
            let mut mat = RMat::zeros(r, c);
            mat.data_mut().fill(1.0);
            mat
        };
        Self {
            theta_e: ones(n, n),
            theta_f: ones(m, n),
            theta_h: ones(m, n),
            theta_g: ones(m, m),
        }
    }
}

fn sign_pattern(block: &CMat) -> RMat {
    let mut mask = RMat::zeros(block.nrows(), block.ncols());
    for j in 0..block.ncols() {
        for i in 0..block.nrows() {
            let v = block[(i, j)];
            // Exact zero test on both parts; the pattern is combinatorial.
            if v.re != 0.0 || v.im != 0.0 {
                mask[(i, j)] = 1.0;
            }
        }
    }
    mask
}

/// Masks Θ of every block: entry 1 iff the block entry is nonzero.
pub fn derive_pattern(system: &GsppSystem) -> SparsityPattern {
    SparsityPattern {
        theta_e: sign_pattern(system.e()),
        theta_f: sign_pattern(system.f()),
        theta_h: sign_pattern(system.h()),
        theta_g: sign_pattern(system.g()),
    }
}

/// A positive weight, or the limit in which the corresponding block admits no
/// perturbation at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Finite(f64),
    Excluded,
}

impl Weight {
    pub fn is_excluded(self) -> bool {
        matches!(self, Weight::Excluded)
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Weight::Finite(v) => Some(v),
            Weight::Excluded => None,
        }
    }

    fn validate(self, name: &'static str) -> Result<()> {
        match self {
            Weight::Finite(v) if v.is_finite() && v > 0.0 => Ok(()),
            Weight::Excluded => Ok(()),
            _ => Err(Error::InvalidWeight { name }),
        }
    }
}

/// Weight vector for the weighted Frobenius norm. Cases (i) and (ii) use
/// [α1, α2, α3, β1, β2] with α3 on G; case (iii) adds α4 so that α3 weighs H
/// and α4 weighs G.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub alpha1: Weight,
    pub alpha2: Weight,
    pub alpha3: Weight,
    pub alpha4: Option<Weight>,
    pub beta1: Weight,
    pub beta2: Weight,
}

impl Weights {
    pub fn validate(&self, case: StructureCase) -> Result<()> {
        self.alpha1.validate("alpha1")?;
        self.alpha2.validate("alpha2")?;
        self.alpha3.validate("alpha3")?;
        self.beta1.validate("beta1")?;
        self.beta2.validate("beta2")?;
        match (case, self.alpha4) {
            (StructureCase::CaseIII, Some(w)) => w.validate("alpha4"),
            (StructureCase::CaseIII, None) => Err(Error::MissingWeight { name: "alpha4" }),
            (_, Some(_)) => Err(Error::UnexpectedWeight { name: "alpha4" }),
            (_, None) => Ok(()),
        }
    }

    /// Weight on the G block: α3 for cases (i)/(ii), α4 for case (iii).
    pub fn g_weight(&self, case: StructureCase) -> Weight {
        match case {
            StructureCase::CaseIII => self.alpha4.unwrap_or(Weight::Excluded),
            _ => self.alpha3,
        }
    }
}

fn reciprocal_or_excluded(norm: f64) -> Weight {
    if norm == 0.0 {
        Weight::Excluded
    } else {
        Weight::Finite(1.0 / norm)
    }
}

/// Relative weights: each weight is the reciprocal of its block norm, with
/// zero-norm blocks excluded from perturbation. A zero-norm right-hand side is
/// an error unless the caller explicitly asks for its exclusion, because β1
/// and β2 appear inverted in the assembled identity blocks.
pub fn default_relative_weights(system: &GsppSystem, exclude_zero_rhs: bool) -> Result<Weights> {
    let nq = cnorm2(system.q());
    let nr = cnorm2(system.r());
    if nq == 0.0 && !exclude_zero_rhs {
        return Err(Error::ZeroRhsNorm { which: "q" });
    }
    if nr == 0.0 && !exclude_zero_rhs {
        return Err(Error::ZeroRhsNorm { which: "r" });
    }
    let (alpha3, alpha4) = match system.case() {
        StructureCase::CaseIII => (
            reciprocal_or_excluded(system.h().frobenius()),
            Some(reciprocal_or_excluded(system.g().frobenius())),
        ),
        _ => (reciprocal_or_excluded(system.g().frobenius()), None),
    };
    Ok(Weights {
        alpha1: reciprocal_or_excluded(system.e().frobenius()),
        alpha2: reciprocal_or_excluded(system.f().frobenius()),
        alpha3,
        alpha4,
        beta1: reciprocal_or_excluded(nq),
        beta2: reciprocal_or_excluded(nr),
    })
}

/// Candidate perturbations of every block. For cases (i)/(ii) the H entry
/// mirrors the F entry; excluded blocks must be identically zero.
#[derive(Debug, Clone)]
pub struct PerturbationSet {
    pub de: CMat,
    pub df: CMat,
    pub dh: CMat,
    pub dg: CMat,
    pub dq: Vec<Complex64>,
    pub dr: Vec<Complex64>,
}

impl PerturbationSet {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            de: CMat::zeros(n, n),
            df: CMat::zeros(m, n),
            dh: CMat::zeros(m, n),
            dg: CMat::zeros(m, m),
            dq: vec![Complex64::ZERO; n],
            dr: vec![Complex64::ZERO; m],
        }
    }

    pub fn check_dims(&self, n: usize, m: usize) -> Result<()> {
        let ok = self.de.nrows() == n
            && self.de.ncols() == n
            && self.df.nrows() == m
            && self.df.ncols() == n
            && self.dh.nrows() == m
            && self.dh.ncols() == n
            && self.dg.nrows() == m
            && self.dg.ncols() == m
            && self.dq.len() == n
            && self.dr.len() == m;
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                "perturbation set does not match system dimensions".into(),
            ))
        }
    }
}

/// Weighted Frobenius norm of a perturbation set: the square root of the
/// weighted sum of squared block norms. Excluded blocks must be zero and
/// contribute nothing.
pub fn weighted_norm(p: &PerturbationSet, w: &Weights, case: StructureCase) -> Result<f64> {
    w.validate(case)?;
    let mut acc = 0.0;
    let mut add = |weight: Weight, norm: f64, block: &'static str| -> Result<()> {
        match weight {
            Weight::Finite(a) => {
                acc += (a * norm).powi(2);
                Ok(())
            }
            Weight::Excluded => {
                if norm != 0.0 {
                    Err(Error::ExcludedBlockNonzero { block })
                } else {
                    Ok(())
                }
            }
        }
    };
    add(w.alpha1, p.de.frobenius(), "E")?;
    add(w.alpha2, p.df.frobenius(), "F")?;
    match case {
        StructureCase::CaseIII => {
            add(w.alpha3, p.dh.frobenius(), "H")?;
            add(w.alpha4.unwrap(), p.dg.frobenius(), "G")?;
        }
        _ => {
            add(w.alpha3, p.dg.frobenius(), "G")?;
        }
    }
    add(w.beta1, cnorm2(&p.dq), "q")?;
    add(w.beta2, cnorm2(&p.dr), "r")?;
    Ok(acc.sqrt())
}

/// Result of a structured backward-error computation: the error value, the
/// optimal perturbations attaining it, and the diagnostics used to verify
/// both optimality bookkeeping and feasibility.
#[derive(Debug, Clone)]
pub struct BackwardErrorReport {
    pub xi: f64,
    pub case: StructureCase,
    pub sparsity_preserved: bool,
    pub perturbations: PerturbationSet,
    pub perturbed_residual_norm: f64,
    pub weighted_norm_of_perturbations: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small_case_i() -> GsppSystem {
        let e = CMat::from_rows(&[&[c(2.0, 0.0), c(1.0, 1.0)], &[c(1.0, -1.0), c(3.0, 0.0)]]);
        let f = CMat::from_rows(&[&[c(1.0, 0.0), c(0.0, 2.0)]]);
        let g = CMat::from_rows(&[&[c(0.5, 0.5)]]);
        GsppSystem::with_shared_f(
            StructureCase::CaseI,
            e,
            f,
            g,
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(3.0, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn construction_validates_hermitian_e() {
        let e = CMat::from_rows(&[&[c(2.0, 0.0), c(1.0, 1.0)], &[c(1.0, 1.0), c(3.0, 0.0)]]);
        let f = CMat::from_rows(&[&[c(1.0, 0.0), c(0.0, 2.0)]]);
        let g = CMat::from_rows(&[&[c(0.5, 0.5)]]);
        let err = GsppSystem::with_shared_f(
            StructureCase::CaseI,
            e,
            f,
            g,
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(3.0, 0.0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotHermitian { block: "E", .. }));
    }

    #[test]
    fn construction_requires_shared_f_for_case_ii() {
        let e = CMat::from_rows(&[&[c(2.0, 1.0)]]);
        let f = CMat::from_rows(&[&[c(1.0, 0.0)]]);
        let h = CMat::from_rows(&[&[c(1.5, 0.0)]]);
        let g = CMat::from_rows(&[&[c(1.0, 0.0)]]);
        let err = GsppSystem::new(
            StructureCase::CaseII,
            e,
            f,
            h,
            g,
            vec![c(1.0, 0.0)],
            vec![c(1.0, 0.0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::BlocksDiffer { .. }));
    }

    #[test]
    fn derive_pattern_matches_sign_example() {
        // The order-3 illustrative Hermitian block and its mask.
        let x = CMat::from_rows(&[
            &[c(7.0, 0.0), c(8.0, 1.0), c(0.0, 0.0)],
            &[c(8.0, -1.0), c(9.0, 0.0), c(10.0, 2.0)],
            &[c(0.0, 0.0), c(10.0, -2.0), c(0.0, 0.0)],
        ]);
        let mask = sign_pattern(&x);
        let expected =
            RMat::from_rows(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 1.0], &[0.0, 1.0, 0.0]]);
        assert_eq!(mask, expected);
        assert!(mask.is_symmetric());

        assert_eq!(sign_pattern(&CMat::zeros(2, 3)), RMat::zeros(2, 3));
        let dense = CMat::from_rows(&[&[c(1.0, 0.0), c(0.0, -2.0)]]);
        let all_ones = sign_pattern(&dense);
        assert!(all_ones.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn relative_weights_basics() {
        let sys = small_case_i();
        let w = default_relative_weights(&sys, false).unwrap();
        let a1 = w.alpha1.value().unwrap();
        assert!((a1 - 1.0 / sys.e().frobenius()).abs() < 1e-15);
        assert_eq!(w.alpha4, None);
        assert!(w.validate(StructureCase::CaseI).is_ok());
    }

    #[test]
    fn zero_g_block_is_excluded() {
        let e = CMat::identity(2);
        let f = CMat::from_rows(&[&[c(1.0, 0.0), c(1.0, 0.0)]]);
        let g = CMat::zeros(1, 1);
        let sys = GsppSystem::with_shared_f(
            StructureCase::CaseI,
            e,
            f,
            g,
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0)],
        )
        .unwrap();
        let w = default_relative_weights(&sys, false).unwrap();
        assert_eq!(w.alpha3, Weight::Excluded);
    }

    #[test]
    fn zero_rhs_norm_errors_without_exclusion() {
        let e = CMat::identity(1);
        let f = CMat::from_rows(&[&[c(1.0, 0.0)]]);
        let g = CMat::identity(1);
        let sys = GsppSystem::with_shared_f(
            StructureCase::CaseII,
            e,
            f,
            g,
            vec![c(0.0, 0.0)],
            vec![c(1.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            default_relative_weights(&sys, false),
            Err(Error::ZeroRhsNorm { which: "q" })
        ));
        let w = default_relative_weights(&sys, true).unwrap();
        assert_eq!(w.beta1, Weight::Excluded);
    }

    #[test]
    fn weighted_norm_examples() {
        let w = Weights {
            alpha1: Weight::Finite(1.0),
            alpha2: Weight::Finite(1.0),
            alpha3: Weight::Finite(1.0),
            alpha4: None,
            beta1: Weight::Finite(2.0),
            beta2: Weight::Finite(1.0),
        };
        let mut p = PerturbationSet::zeros(2, 1);
        assert_eq!(weighted_norm(&p, &w, StructureCase::CaseI).unwrap(), 0.0);

        // Only dq nonzero with norm 3 and beta1 = 2 gives 6.
        p.dq = vec![c(3.0, 0.0), c(0.0, 0.0)];
        assert!((weighted_norm(&p, &w, StructureCase::CaseI).unwrap() - 6.0).abs() < 1e-14);

        // dE = I2 with alpha1 = 1 gives sqrt(2).
        p.dq = vec![Complex64::ZERO; 2];
        p.de = CMat::identity(2);
        let v = weighted_norm(&p, &w, StructureCase::CaseI).unwrap();
        assert!((v - 2.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn weighted_norm_rejects_nonzero_excluded_block() {
        let w = Weights {
            alpha1: Weight::Excluded,
            alpha2: Weight::Finite(1.0),
            alpha3: Weight::Finite(1.0),
            alpha4: None,
            beta1: Weight::Finite(1.0),
            beta2: Weight::Finite(1.0),
        };
        let mut p = PerturbationSet::zeros(2, 1);
        p.de = CMat::identity(2);
        assert!(matches!(
            weighted_norm(&p, &w, StructureCase::CaseI),
            Err(Error::ExcludedBlockNonzero { block: "E" })
        ));
    }
}
