//! Embedded fixtures and parametric generators for tests and benchmarks.
//!
//! The fixed examples carry their block data as exact decimal literals; the
//! candidate solutions are stored to the same printed precision. Random
//! systems come from a seeded counter-based generator with a documented
//! algorithm so independent implementations reproduce identical fixtures.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CMat;
use crate::system::{CandidateSolution, GsppSystem, StructureCase};
use crate::vecops::kron;
use crate::matrix::RMat;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Identifier of a loadable problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixtureId {
    /// 5+4 complex system with Hermitian E and a stored approximate solution.
    Example1,
    /// 4+3 complex system with Hermitian G, ill-scaled blocks, and a stored
    /// approximate solution from a direct solve.
    Example3,
    /// Stokes-like real system of size 3t² with G = 0 and known exact
    /// all-ones solution.
    Example4 { t: usize },
    /// Seeded sparse random system satisfying the case invariants by
    /// construction.
    RandomSparse {
        seed: u64,
        n: usize,
        m: usize,
        density: f64,
        case: StructureCase,
    },
}

/// A loaded problem: the system, an approximate solution when the fixture
/// carries one, and the exact solution when it is known in closed form.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub system: GsppSystem,
    pub solution: Option<CandidateSolution>,
    pub exact_solution: Option<Vec<Complex64>>,
}

pub fn load_fixture(id: FixtureId) -> Result<Fixture> {
    match id {
        FixtureId::Example1 => example1(),
        FixtureId::Example3 => example3(),
        FixtureId::Example4 { t } => {
            let system = gen_stokes_like(t)?;
            let size = system.n() + system.m();
            Ok(Fixture {
                system,
                solution: None,
                exact_solution: Some(vec![Complex64::ONE; size]),
            })
        }
        FixtureId::RandomSparse {
            seed,
            n,
            m,
            density,
            case,
        } => Ok(Fixture {
            system: gen_random_sparse(seed, n, m, density, case)?,
            solution: None,
            exact_solution: None,
        }),
    }
}

fn example1() -> Result<Fixture> {
    let e = CMat::from_rows(&[
        &[
            c(-0.7073, 0.0),
            c(0.0, -0.2258),
            c(-0.3326, 0.4370),
            c(-0.3111, -0.1089),
            c(0.0, -0.2558),
        ],
        &[
            c(0.0, 0.2258),
            c(1.6606, 0.0),
            c(1.0022, 0.0),
            c(-0.0749, 0.0),
            c(0.0, 0.2357),
        ],
        &[
            c(-0.3326, -0.4370),
            c(1.0022, 0.0),
            c(0.0, 0.0),
            c(-1.5009, 0.0),
            c(-0.1383, -0.0928),
        ],
        &[
            c(-0.3111, 0.1089),
            c(-0.0749, 0.0),
            c(-1.5009, 0.0),
            c(0.0, 0.0),
            c(0.0, -0.1),
        ],
        &[
            c(0.0, 0.2558),
            c(0.0, -0.2357),
            c(-0.1383, 0.0928),
            c(0.0, 0.1),
            c(0.0, 0.0),
        ],
    ]);
    let f = CMat::from_rows(&[
        &[
            c(-0.0753, 1.3412),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(-1.3057, 0.0),
            c(0.0, 0.0),
        ],
        &[
            c(-0.1974, 0.0),
            c(0.0, 0.0),
            c(2.9371, 0.0),
            c(0.0, 0.3806),
            c(0.0, 0.0),
        ],
        &[
            c(0.2232, 1.4354),
            c(0.0, 0.7996),
            c(0.3985, 0.0),
            c(0.0, 0.0),
            c(1.6102, 0.0),
        ],
        &[
            c(0.3862, 0.0),
            c(0.0097, 0.0),
            c(0.0, 0.0),
            c(0.0, 1.6286),
            c(0.0, 0.1291),
        ],
    ]);
    // G(0,1) and the real part of u[1] are reconstructed values: the source
    // prints them inconsistently with its own solution and optimal
    // perturbations, and both are recovered here from the feasibility
    // identity those perturbations satisfy.
    let g = CMat::from_rows(&[
        &[
            c(1.5246, -0.1337),
            c(-0.251762, -0.067446),
            c(-0.6924, 0.0),
            c(0.0, -0.0408),
        ],
        &[
            c(0.0, 0.0),
            c(-0.9025, 0.0),
            c(0.0, 0.0),
            c(0.0704, 0.0),
        ],
        &[
            c(0.0, 0.0),
            c(-0.6885, 0.6028),
            c(0.0, 0.7823),
            c(1.2309, 0.0),
        ],
        &[c(0.0, 0.2146), c(0.0, 0.0), c(0.0, 0.0), c(-0.2746, 0.0)],
    ]);
    let q = vec![
        c(-0.8098, -0.3969),
        c(-1.3853, 0.5947),
        c(0.0909, 0.2202),
        c(-0.2140, -0.7165),
        c(0.1509, 0.0117),
    ];
    let r = vec![
        c(-2.3554, -0.9550),
        c(0.6201, -0.7783),
        c(0.3106, 1.5288),
        c(-0.0908, -1.8683),
    ];
    let u = vec![
        c(0.9249, 1.6011),
        c(-0.529968, 0.2407),
        c(0.0189, 0.2151),
        c(-1.5819, 0.1480),
        c(0.5443, 1.2113),
    ];
    let p = vec![
        c(-1.2670, -1.2768),
        c(-0.7997, 0.4628),
        c(0.4206, -0.0082),
        c(1.1641, -1.0531),
    ];
    Ok(Fixture {
        system: GsppSystem::with_shared_f(StructureCase::CaseI, e, f, g, q, r)?,
        solution: Some(CandidateSolution::new(u, p)),
        exact_solution: None,
    })
}

fn example3() -> Result<Fixture> {
    let e = CMat::from_rows(&[
        &[c(0.0, 0.01), c(1e7, 1e7), c(-30.0, 30.0), c(0.0, 0.0)],
        &[c(100.0, 100.0), c(0.0, 0.0), c(0.0, 0.0), c(-1e5, 1e5)],
        &[c(50.0, 50.0), c(100.0, 100.0), c(0.0, 0.0), c(0.0, 0.0)],
        &[c(0.0, 0.0), c(200.0, -200.0), c(1e5, 1e5), c(0.01, 0.01)],
    ]);
    let f = CMat::from_rows(&[
        &[c(1e-5, 1e-5), c(1e7, 1e7), c(0.0, 0.0), c(0.0, 0.0)],
        &[c(1e8, -1e8), c(1e-5, 1e-5), c(-1e-6, -1e-6), c(0.0, 0.0)],
        &[c(0.0, 0.0), c(1e5, 1e5), c(1e-5, -1e-5), c(1e6, 1e6)],
    ]);
    let g = CMat::from_rows(&[
        &[c(1e5, 0.0), c(0.0, 0.0), c(100.0, 0.01)],
        &[c(0.0, 0.0), c(1e-6, 0.0), c(0.0, 0.0)],
        &[c(100.0, -0.01), c(0.0, 0.0), c(-1.0, 0.0)],
    ]);
    let q = vec![
        c(1e4, 1e4),
        c(10.0, 10.0),
        c(0.0, 0.0),
        c(1e-6, 1e-6),
    ];
    let r = vec![c(0.01, -0.01), c(0.0, 0.0), c(0.0, 0.0)];
    let u = vec![
        c(-0.0995, -0.9904),
        c(0.0005, 0.0003),
        c(-99.0353, 9.9509),
        c(0.0, 0.0),
    ];
    let p = vec![c(-0.01, -0.099), c(0.0, 0.0), c(0.9951, 9.9035)];
    Ok(Fixture {
        system: GsppSystem::with_shared_f(StructureCase::CaseII, e, f, g, q, r)?,
        solution: Some(CandidateSolution::new(u, p)),
        exact_solution: None,
    })
}

fn tridiag(t: usize, sub: f64, diag: f64, sup: f64) -> RMat {
    let mut m = RMat::zeros(t, t);
    for i in 0..t {
        m[(i, i)] = diag;
        if i + 1 < t {
            m[(i + 1, i)] = sub;
            m[(i, i + 1)] = sup;
        }
    }
    m
}

fn real_to_cmat(m: &RMat) -> CMat {
    CMat::from_parts(m, &RMat::zeros(m.nrows(), m.ncols()))
}

/// Stokes-like real system: E = blockdiag(I⊗J + J⊗I, I⊗J + J⊗I),
/// F = [I⊗X, X⊗I], H = [Y⊗X, X⊗Y], G = 0, with J the scaled second-difference
/// matrix, X the scaled forward-difference matrix and Y a diagonal stretch.
/// The right-hand side makes the all-ones vector the exact solution.
pub fn gen_stokes_like(t: usize) -> Result<GsppSystem> {
    if t < 2 {
        return Err(Error::InvalidParameter(format!(
            "stokes-like generator requires t >= 2, got {}",
            t
        )));
    }
    let h2 = ((t + 1) * (t + 1)) as f64;
    let j = tridiag(t, -1.0 / h2, 2.0 / h2, -1.0 / h2);
    let x = tridiag(t, 0.0, 1.0 / (t + 1) as f64, -1.0 / (t + 1) as f64);
    let mut y = RMat::zeros(t, t);
    for i in 0..t {
        y[(i, i)] = 1.0 + (i * t) as f64;
    }
    let eye = RMat::identity(t);

    let lap = {
        let mut a = kron(&eye, &j);
        let b = kron(&j, &eye);
        for (u, v) in a.data_mut().iter_mut().zip(b.data()) {
            *u += v;
        }
        a
    };
    let n = 2 * t * t;
    let m = t * t;
    let mut e = RMat::zeros(n, n);
    for jj in 0..m {
        for ii in 0..m {
            let v = lap[(ii, jj)];
            e[(ii, jj)] = v;
            e[(m + ii, m + jj)] = v;
        }
    }
    let fx1 = kron(&eye, &x);
    let fx2 = kron(&x, &eye);
    let hx1 = kron(&y, &x);
    let hx2 = kron(&x, &y);
    let mut f = RMat::zeros(m, n);
    let mut h = RMat::zeros(m, n);
    for jj in 0..m {
        for ii in 0..m {
            f[(ii, jj)] = fx1[(ii, jj)];
            f[(ii, m + jj)] = fx2[(ii, jj)];
            h[(ii, jj)] = hx1[(ii, jj)];
            h[(ii, m + jj)] = hx2[(ii, jj)];
        }
    }

    let e = real_to_cmat(&e);
    let f = real_to_cmat(&f);
    let h = real_to_cmat(&h);
    let g = CMat::zeros(m, m);

    let ones_n = vec![Complex64::ONE; n];
    let ones_m = vec![Complex64::ONE; m];
    let q = {
        let mut top = e.matvec(&ones_n);
        for (ti, v) in top.iter_mut().zip(f.conj_t_matvec(&ones_m)) {
            *ti += v;
        }
        top
    };
    let r = {
        let mut bottom = h.matvec(&ones_n);
        for (bi, v) in bottom.iter_mut().zip(g.matvec(&ones_m)) {
            *bi += v;
        }
        bottom
    };
    GsppSystem::new(StructureCase::CaseIII, e, f, h, g, q, r)
}

/// Counter-based deterministic generator (splitmix64): the state advances by
/// 0x9E3779B97F4A7C15 per draw and each output is the finalizer
/// `z ^= z>>30, z *= 0xBF58476D1CE4E5B9, z ^= z>>27, z *= 0x94D049BB133111EB,
/// z ^= z>>31` applied to the state. Uniform doubles take the top 53 bits;
/// normal deviates use the Box-Muller transform on consecutive uniform pairs
/// (cosine branch first, sine branch second).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare_normal: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller on ((0,1], [0,1)) uniform pairs.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(v) = self.spare_normal.take() {
            return v;
        }
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

fn sparse_random_complex(rng: &mut SplitMix64, rows: usize, cols: usize, density: f64) -> CMat {
    let mut m = CMat::zeros(rows, cols);
    for jj in 0..cols {
        for ii in 0..rows {
            if rng.next_f64() < density {
                let re = rng.next_normal();
                let im = rng.next_normal();
                m[(ii, jj)] = c(re, im);
            }
        }
    }
    m
}

fn dense_random_cvec(rng: &mut SplitMix64, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| {
            let re = rng.next_normal();
            let im = rng.next_normal();
            c(re, im)
        })
        .collect()
}

fn hermitian_from_sparse(rng: &mut SplitMix64, order: usize, density: f64) -> CMat {
    // S + S*: Hermitian with a symmetric sparsity pattern by construction.
    let s = sparse_random_complex(rng, order, order, density);
    let mut m = CMat::zeros(order, order);
    for jj in 0..order {
        for ii in 0..order {
            m[(ii, jj)] = s[(ii, jj)] + s[(jj, ii)].conj();
        }
    }
    m
}

/// Deterministic sparse random system for the given case. Blocks are drawn in
/// the order E, F, H (case iii only), G, q, r; Hermitian blocks are built as
/// S + S* from a sparse draw, so structure and pattern symmetry hold exactly.
pub fn gen_random_sparse(
    seed: u64,
    n: usize,
    m: usize,
    density: f64,
    case: StructureCase,
) -> Result<GsppSystem> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "density must lie in (0, 1], got {}",
            density
        )));
    }
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "generator requires n >= 1 and m >= 1".into(),
        ));
    }
    let mut rng = SplitMix64::new(seed);
    let e = if case.hermitian_e() {
        hermitian_from_sparse(&mut rng, n, density)
    } else {
        sparse_random_complex(&mut rng, n, n, density)
    };
    let f = sparse_random_complex(&mut rng, m, n, density);
    let h = if case.shares_f() {
        f.clone()
    } else {
        sparse_random_complex(&mut rng, m, n, density)
    };
    let g = if case.hermitian_g() {
        hermitian_from_sparse(&mut rng, m, density)
    } else {
        sparse_random_complex(&mut rng, m, m, density)
    };
    let q = dense_random_cvec(&mut rng, n);
    let r = dense_random_cvec(&mut rng, m);
    GsppSystem::new(case, e, f, h, g, q, r)
}
