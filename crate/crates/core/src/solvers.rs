//! Reference solvers used to produce candidate solutions for stability
//! studies: unrestarted GMRES with modified Gram-Schmidt, and Gaussian
//! elimination with partial pivoting on the materialized block matrix. Both
//! work in complex arithmetic directly; only the backward-error machinery
//! realifies.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{cnorm2, smith_div, CMat};
use crate::structured::compute_structured_be;
use crate::system::{CandidateSolution, GsppSystem, Weights};
use crate::unstructured::rigal_gaches;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Gmres,
    Gepp,
}

/// Outcome of an iterative or direct solve, with enough history to audit the
/// stopping behaviour.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub solution: CandidateSolution,
    pub iterations: usize,
    pub relative_residual_history: Vec<f64>,
    pub method: SolveMethod,
    pub converged: bool,
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Unrestarted GMRES from the zero initial guess; stops once the relative
/// residual estimate drops below `tol` or after `maxit` Krylov steps.
/// Non-convergence is reported in the trace, not as an error.
pub fn gmres(system: &GsppSystem, f: &[Complex64], tol: f64, maxit: usize) -> Result<SolveTrace> {
    let size = system.n() + system.m();
    if f.len() != size {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, system size is {}",
            f.len(),
            size
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter("gmres tolerance must be > 0".into()));
    }
    let f_norm = cnorm2(f);
    if f_norm == 0.0 {
        return Ok(SolveTrace {
            solution: CandidateSolution::from_flat(&vec![Complex64::ZERO; size], system.n()),
            iterations: 0,
            relative_residual_history: vec![0.0],
            method: SolveMethod::Gmres,
            converged: true,
        });
    }

    // Zero initial guess: the first relative residual is exactly 1.
    let mut history = vec![1.0];
    if 1.0 < tol {
        return Ok(SolveTrace {
            solution: CandidateSolution::from_flat(&vec![Complex64::ZERO; size], system.n()),
            iterations: 0,
            relative_residual_history: history,
            method: SolveMethod::Gmres,
            converged: true,
        });
    }

    let maxit = maxit.min(size).max(1);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(maxit + 1);
    basis.push(f.iter().map(|v| v / f_norm).collect());
    // Hessenberg columns after the Givens updates, plus the rotations.
    let mut h_cols: Vec<Vec<Complex64>> = Vec::with_capacity(maxit);
    let mut cos: Vec<f64> = Vec::with_capacity(maxit);
    let mut sin: Vec<Complex64> = Vec::with_capacity(maxit);
    let mut g = vec![Complex64::ZERO; maxit + 1];
    g[0] = Complex64::new(f_norm, 0.0);

    let mut iterations = 0;
    let mut converged = false;

    for k in 0..maxit {
        iterations = k + 1;
        let mut w = system.matvec_flat(&basis[k]);
        let mut h = vec![Complex64::ZERO; k + 2];
        for (i, v) in basis.iter().enumerate().take(k + 1) {
            let hik = cdot(v, &w);
            h[i] = hik;
            for (wj, vj) in w.iter_mut().zip(v) {
                *wj -= hik * vj;
            }
        }
        let wnorm = cnorm2(&w);
        h[k + 1] = Complex64::new(wnorm, 0.0);

        // Apply the accumulated rotations, then the new one.
        for i in 0..k {
            let t = cos[i] * h[i] + sin[i] * h[i + 1];
            h[i + 1] = -sin[i].conj() * h[i] + cos[i] * h[i + 1];
            h[i] = t;
        }
        let (c_new, s_new) = {
            let a = h[k];
            let b = h[k + 1];
            let an = a.norm();
            let bn = b.norm();
            if bn == 0.0 {
                (1.0, Complex64::ZERO)
            } else if an == 0.0 {
                (0.0, b.conj() / bn)
            } else {
                let t = (an * an + bn * bn).sqrt();
                ((an / t), (a / an) * b.conj() / t)
            }
        };
        let r = c_new * h[k] + s_new * h[k + 1];
        h[k] = r;
        h[k + 1] = Complex64::ZERO;
        cos.push(c_new);
        sin.push(s_new);
        let gk = g[k];
        g[k] = c_new * gk;
        g[k + 1] = -s_new.conj() * gk;
        h_cols.push(h);

        let rel = g[k + 1].norm() / f_norm;
        history.push(rel);
        if rel < tol {
            converged = true;
            break;
        }
        if wnorm == 0.0 {
            // Happy breakdown: the Krylov space is invariant and the current
            // least-squares solve is exact.
            converged = true;
            break;
        }
        basis.push(w.iter().map(|v| v / wnorm).collect());
    }

    // Back-substitute the triangularized Hessenberg system.
    let k = iterations;
    let mut y = vec![Complex64::ZERO; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in (i + 1)..k {
            s -= h_cols[j][i] * y[j];
        }
        y[i] = smith_div(s, h_cols[i][i]);
    }
    let mut x = vec![Complex64::ZERO; size];
    for (j, yj) in y.iter().enumerate() {
        for (xi, vi) in x.iter_mut().zip(&basis[j]) {
            *xi += yj * vi;
        }
    }

    Ok(SolveTrace {
        solution: CandidateSolution::from_flat(&x, system.n()),
        iterations,
        relative_residual_history: history,
        method: SolveMethod::Gmres,
        converged,
    })
}

fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Direct solve of the assembled complex system by Gaussian elimination with
/// row partial pivoting. Pivot selection and update order follow the
/// conventional unblocked right-looking factorization.
pub fn gepp_solve(system: &GsppSystem, f: &[Complex64]) -> Result<CandidateSolution> {
    let size = system.n() + system.m();
    if f.len() != size {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, system size is {}",
            f.len(),
            size
        )));
    }

    // Materialize B = [E F*; H G].
    let mut b = CMat::zeros(size, size);
    let n = system.n();
    let fh = system.f().conj_transpose();
    for j in 0..size {
        for i in 0..size {
            b[(i, j)] = match (i < n, j < n) {
                (true, true) => system.e()[(i, j)],
                (true, false) => fh[(i, j - n)],
                (false, true) => system.h()[(i - n, j)],
                (false, false) => system.g()[(i - n, j - n)],
            };
        }
    }

    let mut piv = vec![0usize; size];
    for k in 0..size {
        // Pivot on |re| + |im|, first maximal entry wins.
        let mut p = k;
        let mut best = cabs1(b[(k, k)]);
        for i in (k + 1)..size {
            let v = cabs1(b[(i, k)]);
            if v > best {
                best = v;
                p = i;
            }
        }
        if best < 1e-300 {
            return Err(Error::SingularPivot { index: k });
        }
        piv[k] = p;
        if p != k {
            for j in 0..size {
                let t = b[(k, j)];
                b[(k, j)] = b[(p, j)];
                b[(p, j)] = t;
            }
        }
        let inv = smith_div(Complex64::ONE, b[(k, k)]);
        for i in (k + 1)..size {
            b[(i, k)] *= inv;
        }
        for j in (k + 1)..size {
            let bkj = b[(k, j)];
            if bkj != Complex64::ZERO {
                for i in (k + 1)..size {
                    let lik = b[(i, k)];
                    b[(i, j)] -= lik * bkj;
                }
            }
        }
    }

    let mut x = f.to_vec();
    for (k, &p) in piv.iter().enumerate() {
        x.swap(k, p);
    }
    // Forward substitution with the unit lower factor.
    for k in 0..size {
        let xk = x[k];
        if xk != Complex64::ZERO {
            for i in (k + 1)..size {
                let lik = b[(i, k)];
                x[i] -= lik * xk;
            }
        }
    }
    // Back substitution with the upper factor.
    for k in (0..size).rev() {
        x[k] = smith_div(x[k], b[(k, k)]);
        let xk = x[k];
        if xk != Complex64::ZERO {
            for i in 0..k {
                let uik = b[(i, k)];
                x[i] -= uik * xk;
            }
        }
    }

    Ok(CandidateSolution::from_flat(&x, system.n()))
}

/// Backward-stability classification of a computed solution: backward stable
/// when the unstructured error is below the threshold, strongly backward
/// stable when the sparsity-preserving structured error is too.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub unstructured: f64,
    pub structured_sparse: f64,
    pub structured_plain: f64,
    pub threshold: f64,
    pub backward_stable: bool,
    pub strongly_backward_stable: bool,
}

pub fn stability_report(
    system: &GsppSystem,
    sol: &CandidateSolution,
    w: &Weights,
    threshold: f64,
) -> Result<StabilityReport> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::InvalidParameter(
            "stability threshold must be > 0".into(),
        ));
    }
    let unstructured = rigal_gaches(system, sol)?;
    let sparse = compute_structured_be(system, sol, w, true)?;
    let plain = compute_structured_be(system, sol, w, false)?;
    Ok(StabilityReport {
        unstructured,
        structured_sparse: sparse.xi,
        structured_plain: plain.xi,
        threshold,
        backward_stable: unstructured <= threshold,
        strongly_backward_stable: sparse.xi <= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{default_relative_weights, StructureCase};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn identity_system() -> GsppSystem {
        GsppSystem::with_shared_f(
            StructureCase::CaseI,
            CMat::identity(2),
            CMat::zeros(1, 2),
            CMat::identity(1),
            vec![c(1.0, -2.0), c(0.5, 0.0)],
            vec![c(3.0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn gmres_identity_converges_in_one_step() {
        let sys = identity_system();
        let f = sys.rhs_flat();
        let trace = gmres(&sys, &f, 1e-12, 10).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations, 1);
        for (xi, fi) in trace.solution.flat().iter().zip(&f) {
            assert!((xi - fi).norm() < 1e-12);
        }
    }

    #[test]
    fn gmres_loose_tolerance_returns_zero_iterate() {
        let sys = identity_system();
        let f = sys.rhs_flat();
        let trace = gmres(&sys, &f, 2.0, 10).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations, 0);
        assert!(trace.solution.flat().iter().all(|v| *v == Complex64::ZERO));
        assert_eq!(trace.relative_residual_history, vec![1.0]);
    }

    #[test]
    fn gmres_history_is_nonincreasing() {
        // A small nontrivial Hermitian-E system.
        let e = CMat::from_rows(&[
            &[c(4.0, 0.0), c(1.0, 1.0), c(0.0, 0.0)],
            &[c(1.0, -1.0), c(3.0, 0.0), c(0.5, 0.0)],
            &[c(0.0, 0.0), c(0.5, 0.0), c(5.0, 0.0)],
        ]);
        let f = CMat::from_rows(&[&[c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0)]]);
        let g = CMat::from_rows(&[&[c(1.0, 0.0)]]);
        let sys = GsppSystem::with_shared_f(
            StructureCase::CaseI,
            e,
            f,
            g,
            vec![c(1.0, 1.0), c(-2.0, 0.0), c(0.0, 3.0)],
            vec![c(1.0, -1.0)],
        )
        .unwrap();
        let rhs = sys.rhs_flat();
        let trace = gmres(&sys, &rhs, 1e-13, 50).unwrap();
        assert!(trace.converged);
        let h = &trace.relative_residual_history;
        for w in h.windows(2) {
            assert!(w[1] <= w[0] + 1e-13, "history not monotone: {:?}", h);
        }
        assert!(*h.last().unwrap() <= 1e-13);
    }

    #[test]
    fn gepp_identity_and_decoupled_scalars() {
        let sys = identity_system();
        let f = sys.rhs_flat();
        let sol = gepp_solve(&sys, &f).unwrap();
        for (xi, fi) in sol.flat().iter().zip(&f) {
            assert!((xi - fi).norm() < 1e-15);
        }

        // E = [2], G = [1], F = H = [0]: the scalars decouple.
        let sys = GsppSystem::with_shared_f(
            StructureCase::CaseI,
            CMat::from_rows(&[&[c(2.0, 0.0)]]),
            CMat::zeros(1, 1),
            CMat::from_rows(&[&[c(1.0, 0.0)]]),
            vec![c(4.0, 0.0)],
            vec![c(3.0, 0.0)],
        )
        .unwrap();
        let sol = gepp_solve(&sys, &sys.rhs_flat()).unwrap();
        assert!((sol.u[0] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((sol.p[0] - c(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gepp_solves_the_ill_scaled_fixture_accurately() {
        let fx = crate::problems::load_fixture(crate::problems::FixtureId::Example3).unwrap();
        let sys = fx.system;
        let f = sys.rhs_flat();
        let sol = gepp_solve(&sys, &f).unwrap();
        let res = crate::unstructured::residuals(&sys, &sol).unwrap().norm2();
        let scale = sys.block_frobenius() * sol.norm2() + cnorm2(&f);
        assert!(res <= 1e-12 * scale, "residual {} vs scale {}", res, scale);
    }

    #[test]
    fn gepp_rejects_singular_matrix() {
        let sys = GsppSystem::with_shared_f(
            StructureCase::CaseI,
            CMat::zeros(1, 1),
            CMat::zeros(1, 1),
            CMat::zeros(1, 1),
            vec![c(1.0, 0.0)],
            vec![c(1.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            gepp_solve(&sys, &sys.rhs_flat()),
            Err(Error::SingularPivot { .. })
        ));
    }

    #[test]
    fn gepp_agrees_with_gmres_on_well_conditioned_system() {
        let e = CMat::from_rows(&[
            &[c(5.0, 0.0), c(1.0, 2.0)],
            &[c(1.0, -2.0), c(6.0, 0.0)],
        ]);
        let f = CMat::from_rows(&[&[c(1.0, 0.5), c(-0.5, 0.0)]]);
        let g = CMat::from_rows(&[&[c(4.0, 0.0)]]);
        let sys = GsppSystem::with_shared_f(
            StructureCase::CaseI,
            e,
            f,
            g,
            vec![c(1.0, 1.0), c(2.0, -1.0)],
            vec![c(-1.0, 0.5)],
        )
        .unwrap();
        let rhs = sys.rhs_flat();
        let direct = gepp_solve(&sys, &rhs).unwrap();
        let iterative = gmres(&sys, &rhs, 1e-14, 20).unwrap();
        assert!(iterative.converged);
        let scale = direct.norm2();
        for (a, b) in direct.flat().iter().zip(iterative.solution.flat()) {
            assert!((a - b).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn stability_report_exact_solution() {
        let sys = identity_system();
        let sol = CandidateSolution::new(sys.q().to_vec(), sys.r().to_vec());
        let w = default_relative_weights(&sys, false).unwrap();
        let report = stability_report(&sys, &sol, &w, 1e-12).unwrap();
        assert!(report.backward_stable);
        assert!(report.strongly_backward_stable);
        assert!(report.unstructured <= 1e-14);
        assert!(report.structured_sparse <= 1e-14);
    }
}
