//! Structured backward errors: assembly of the realified constraint system,
//! its minimum-norm solution, reconstruction of the optimal perturbations,
//! feasibility verification, and the half-size reductions for real data.
//!
//! The constraint system collects, per structure case, the linearized
//! feasibility equations of the perturbed system in scaled generator
//! coordinates. Hermitian blocks contribute a symmetric generator for the
//! real part and a skew generator for the imaginary part; unstructured blocks
//! contribute plain column-stacked coordinates; the right-hand side
//! perturbations contribute negated identity blocks scaled by 1/β. Columns
//! whose mask entry is zero are dropped outright — the minimum-norm solution
//! is zero there anyway — as are all columns of excluded blocks.

use crate::error::{Error, Result};
use crate::matrix::{all_real, cnorm2, im_part, mat_all_real, norm2, re_part, CMat, RMat};
use crate::qr::QrFactor;
use crate::system::{
    derive_pattern, BackwardErrorReport, CandidateSolution, GsppSystem, PerturbationSet,
    SparsityPattern, StructureCase, Weight, Weights,
};
use crate::unstructured::residuals;
use crate::vecops::{
    skew_from_generator, skew_index, skew_len, sym_from_generator, sym_index, sym_len, SQRT_2,
};

/// Relative tolerance of the full-row-rank check on the factor diagonal.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Which perturbation block and coordinate system a column segment encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentId {
    ESym,
    ESkew,
    ERe,
    EIm,
    FRe,
    FIm,
    HRe,
    HIm,
    GSym,
    GSkew,
    GRe,
    GIm,
    QRe,
    QIm,
    RRe,
    RIm,
}

/// One contiguous run of columns: the retained generator coordinates of a
/// block, together with the factor (inverse weight times inverse scaling)
/// that converts a solution coordinate back into a matrix entry.
#[derive(Debug, Clone)]
pub struct ColumnSegment {
    pub id: SegmentId,
    pub offset: usize,
    pub indices: Vec<usize>,
    pub factors: Vec<f64>,
    pub full_len: usize,
    pub deleted: bool,
}

impl ColumnSegment {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Ordered segment map of the assembled columns.
#[derive(Debug, Clone)]
pub struct ColumnLayout {
    pub case: StructureCase,
    pub n: usize,
    pub m: usize,
    pub ncols: usize,
    pub sparsity_preserved: bool,
    pub real_mode: bool,
    pub segments: Vec<ColumnSegment>,
}

/// The realified constraint system A z = rhs.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub a: RMat,
    pub rhs: Vec<f64>,
    pub layout: ColumnLayout,
}

struct SegmentSpec<'a> {
    id: SegmentId,
    weight: Weight,
    mask: Option<&'a RMat>,
    rows: usize,
    cols: usize,
}

fn segment_plan<'a>(
    case: StructureCase,
    pattern: &'a SparsityPattern,
    w: &Weights,
    n: usize,
    m: usize,
    real_mode: bool,
) -> Vec<SegmentSpec<'a>> {
    let mut plan = Vec::new();
    match case {
        StructureCase::CaseI => {
            plan.push(SegmentSpec {
                id: SegmentId::ESym,
                weight: w.alpha1,
                mask: Some(&pattern.theta_e),
                rows: n,
                cols: n,
            });
            if !real_mode {
                plan.push(SegmentSpec {
                    id: SegmentId::ESkew,
                    weight: w.alpha1,
                    mask: Some(&pattern.theta_e),
                    rows: n,
                    cols: n,
                });
            }
        }
        StructureCase::CaseII => {
            plan.push(SegmentSpec {
                id: SegmentId::ERe,
                weight: w.alpha1,
                mask: Some(&pattern.theta_e),
                rows: n,
                cols: n,
            });
            if !real_mode {
                plan.push(SegmentSpec {
                    id: SegmentId::EIm,
                    weight: w.alpha1,
                    mask: Some(&pattern.theta_e),
                    rows: n,
                    cols: n,
                });
            }
        }
        StructureCase::CaseIII => {
            plan.push(SegmentSpec {
                id: SegmentId::ESym,
                weight: w.alpha1,
                mask: Some(&pattern.theta_e),
                rows: n,
                cols: n,
            });
            if !real_mode {
                plan.push(SegmentSpec {
                    id: SegmentId::ESkew,
                    weight: w.alpha1,
                    mask: Some(&pattern.theta_e),
                    rows: n,
                    cols: n,
                });
            }
        }
    }
    plan.push(SegmentSpec {
        id: SegmentId::FRe,
        weight: w.alpha2,
        mask: Some(&pattern.theta_f),
        rows: m,
        cols: n,
    });
    if !real_mode {
        plan.push(SegmentSpec {
            id: SegmentId::FIm,
            weight: w.alpha2,
            mask: Some(&pattern.theta_f),
            rows: m,
            cols: n,
        });
    }
    if case == StructureCase::CaseIII {
        plan.push(SegmentSpec {
            id: SegmentId::HRe,
            weight: w.alpha3,
            mask: Some(&pattern.theta_h),
            rows: m,
            cols: n,
        });
        if !real_mode {
            plan.push(SegmentSpec {
                id: SegmentId::HIm,
                weight: w.alpha3,
                mask: Some(&pattern.theta_h),
                rows: m,
                cols: n,
            });
        }
    }
    let g_weight = w.g_weight(case);
    match case {
        StructureCase::CaseI => {
            plan.push(SegmentSpec {
                id: SegmentId::GRe,
                weight: g_weight,
                mask: Some(&pattern.theta_g),
                rows: m,
                cols: m,
            });
            if !real_mode {
                plan.push(SegmentSpec {
                    id: SegmentId::GIm,
                    weight: g_weight,
                    mask: Some(&pattern.theta_g),
                    rows: m,
                    cols: m,
                });
            }
        }
        StructureCase::CaseII | StructureCase::CaseIII => {
            plan.push(SegmentSpec {
                id: SegmentId::GSym,
                weight: g_weight,
                mask: Some(&pattern.theta_g),
                rows: m,
                cols: m,
            });
            if !real_mode {
                plan.push(SegmentSpec {
                    id: SegmentId::GSkew,
                    weight: g_weight,
                    mask: Some(&pattern.theta_g),
                    rows: m,
                    cols: m,
                });
            }
        }
    }
    plan.push(SegmentSpec {
        id: SegmentId::QRe,
        weight: w.beta1,
        mask: None,
        rows: n,
        cols: 1,
    });
    if !real_mode {
        plan.push(SegmentSpec {
            id: SegmentId::QIm,
            weight: w.beta1,
            mask: None,
            rows: n,
            cols: 1,
        });
    }
    plan.push(SegmentSpec {
        id: SegmentId::RRe,
        weight: w.beta2,
        mask: None,
        rows: m,
        cols: 1,
    });
    if !real_mode {
        plan.push(SegmentSpec {
            id: SegmentId::RIm,
            weight: w.beta2,
            mask: None,
            rows: m,
            cols: 1,
        });
    }
    plan
}

fn kind_of(id: SegmentId) -> &'static str {
    match id {
        SegmentId::ESym | SegmentId::GSym => "sym",
        SegmentId::ESkew | SegmentId::GSkew => "skew",
        SegmentId::QRe | SegmentId::QIm | SegmentId::RRe | SegmentId::RIm => "rhs",
        _ => "full",
    }
}

fn enumerate_segment(spec: &SegmentSpec<'_>, offset: usize) -> Result<ColumnSegment> {
    let kind = kind_of(spec.id);
    let full_len = match kind {
        "sym" => sym_len(spec.rows),
        "skew" => skew_len(spec.rows),
        "rhs" => spec.rows,
        _ => spec.rows * spec.cols,
    };
    let weight = match spec.weight {
        Weight::Excluded => {
            return Ok(ColumnSegment {
                id: spec.id,
                offset,
                indices: Vec::new(),
                factors: Vec::new(),
                full_len,
                deleted: true,
            });
        }
        Weight::Finite(v) => v,
    };
    let winv = 1.0 / weight;
    let mut indices = Vec::new();
    let mut factors = Vec::new();
    match kind {
        "sym" => {
            let mask = spec.mask.unwrap();
            if let Some((i, j)) = mask.symmetry_defect() {
                return Err(Error::NotSymmetric { i, j });
            }
            let order = spec.rows;
            for j in 0..order {
                for i in j..order {
                    if mask[(i, j)] != 0.0 {
                        indices.push(sym_index(order, i, j));
                        factors.push(if i == j { winv } else { winv / SQRT_2 });
                    }
                }
            }
        }
        "skew" => {
            let mask = spec.mask.unwrap();
            let order = spec.rows;
            for j in 0..order {
                for i in (j + 1)..order {
                    if mask[(i, j)] != 0.0 {
                        indices.push(skew_index(order, i, j));
                        factors.push(winv / SQRT_2);
                    }
                }
            }
        }
        "rhs" => {
            for k in 0..spec.rows {
                indices.push(k);
                factors.push(winv);
            }
        }
        _ => {
            let mask = spec.mask.unwrap();
            for b in 0..spec.cols {
                for a in 0..spec.rows {
                    if mask[(a, b)] != 0.0 {
                        indices.push(b * spec.rows + a);
                        factors.push(winv);
                    }
                }
            }
        }
    }
    Ok(ColumnSegment {
        id: spec.id,
        offset,
        indices,
        factors,
        full_len,
        deleted: false,
    })
}

/// Decodes a symmetric generator index back to (i, j), i >= j.
fn sym_coords(order: usize, idx: usize) -> (usize, usize) {
    let mut j = 0;
    let mut base = 0;
    loop {
        let seg = order - j;
        if idx < base + seg {
            return (j + (idx - base), j);
        }
        base += seg;
        j += 1;
    }
}

/// Decodes a skew generator index back to (i, j), i > j.
fn skew_coords(order: usize, idx: usize) -> (usize, usize) {
    let mut j = 0;
    let mut base = 0;
    loop {
        let seg = order - 1 - j;
        if idx < base + seg {
            return (j + 1 + (idx - base), j);
        }
        base += seg;
        j += 1;
    }
}

struct RowMap {
    rq: usize,
    iq: usize,
    rr: usize,
    ir: usize,
}

#[allow(clippy::too_many_arguments)]
fn fill_column(
    a: &mut RMat,
    col: usize,
    seg: &ColumnSegment,
    k: usize,
    case: StructureCase,
    real_mode: bool,
    rows: &RowMap,
    n: usize,
    m: usize,
    ru: &[f64],
    iu: &[f64],
    rp: &[f64],
    ip: &[f64],
) {
    let c = seg.factors[k];
    let idx = seg.indices[k];
    match seg.id {
        SegmentId::ESym => {
            let (i, j) = sym_coords(n, idx);
            a[(rows.rq + i, col)] += c * ru[j];
            if !real_mode {
                a[(rows.iq + i, col)] += c * iu[j];
            }
            if i != j {
                a[(rows.rq + j, col)] += c * ru[i];
                if !real_mode {
                    a[(rows.iq + j, col)] += c * iu[i];
                }
            }
        }
        SegmentId::ESkew => {
            let (i, j) = skew_coords(n, idx);
            a[(rows.rq + i, col)] -= c * iu[j];
            a[(rows.rq + j, col)] += c * iu[i];
            a[(rows.iq + i, col)] += c * ru[j];
            a[(rows.iq + j, col)] -= c * ru[i];
        }
        SegmentId::ERe => {
            let (i, j) = (idx % n, idx / n);
            a[(rows.rq + i, col)] += c * ru[j];
            if !real_mode {
                a[(rows.iq + i, col)] += c * iu[j];
            }
        }
        SegmentId::EIm => {
            let (i, j) = (idx % n, idx / n);
            a[(rows.rq + i, col)] -= c * iu[j];
            a[(rows.iq + i, col)] += c * ru[j];
        }
        SegmentId::FRe => {
            let (i, j) = (idx % m, idx / m);
            a[(rows.rq + j, col)] += c * rp[i];
            if !real_mode {
                a[(rows.iq + j, col)] += c * ip[i];
            }
            if case != StructureCase::CaseIII {
                a[(rows.rr + i, col)] += c * ru[j];
                if !real_mode {
                    a[(rows.ir + i, col)] += c * iu[j];
                }
            }
        }
        SegmentId::FIm => {
            let (i, j) = (idx % m, idx / m);
            a[(rows.rq + j, col)] += c * ip[i];
            a[(rows.iq + j, col)] -= c * rp[i];
            if case != StructureCase::CaseIII {
                a[(rows.rr + i, col)] -= c * iu[j];
                a[(rows.ir + i, col)] += c * ru[j];
            }
        }
        SegmentId::HRe => {
            let (i, j) = (idx % m, idx / m);
            a[(rows.rr + i, col)] += c * ru[j];
            if !real_mode {
                a[(rows.ir + i, col)] += c * iu[j];
            }
        }
        SegmentId::HIm => {
            let (i, j) = (idx % m, idx / m);
            a[(rows.rr + i, col)] -= c * iu[j];
            a[(rows.ir + i, col)] += c * ru[j];
        }
        SegmentId::GRe => {
            let (i, j) = (idx % m, idx / m);
            a[(rows.rr + i, col)] += c * rp[j];
            if !real_mode {
                a[(rows.ir + i, col)] += c * ip[j];
            }
        }
        SegmentId::GIm => {
            let (i, j) = (idx % m, idx / m);
            a[(rows.rr + i, col)] -= c * ip[j];
            a[(rows.ir + i, col)] += c * rp[j];
        }
        SegmentId::GSym => {
            let (i, j) = sym_coords(m, idx);
            a[(rows.rr + i, col)] += c * rp[j];
            if !real_mode {
                a[(rows.ir + i, col)] += c * ip[j];
            }
            if i != j {
                a[(rows.rr + j, col)] += c * rp[i];
                if !real_mode {
                    a[(rows.ir + j, col)] += c * ip[i];
                }
            }
        }
        SegmentId::GSkew => {
            let (i, j) = skew_coords(m, idx);
            a[(rows.rr + i, col)] -= c * ip[j];
            a[(rows.rr + j, col)] += c * ip[i];
            a[(rows.ir + i, col)] += c * rp[j];
            a[(rows.ir + j, col)] -= c * rp[i];
        }
        SegmentId::QRe => a[(rows.rq + idx, col)] = -c,
        SegmentId::QIm => a[(rows.iq + idx, col)] = -c,
        SegmentId::RRe => a[(rows.rr + idx, col)] = -c,
        SegmentId::RIm => a[(rows.ir + idx, col)] = -c,
    }
}

fn assemble_impl(
    system: &GsppSystem,
    sol: &CandidateSolution,
    pattern: &SparsityPattern,
    w: &Weights,
    sparsity_preserved: bool,
    real_mode: bool,
) -> Result<AssembledSystem> {
    sol.check_dims(system)?;
    let case = system.case();
    w.validate(case)?;
    let n = system.n();
    let m = system.m();
    for (name, mask, rows, cols) in [
        ("theta_E", &pattern.theta_e, n, n),
        ("theta_F", &pattern.theta_f, m, n),
        ("theta_H", &pattern.theta_h, m, n),
        ("theta_G", &pattern.theta_g, m, m),
    ] {
        if mask.nrows() != rows || mask.ncols() != cols {
            return Err(Error::DimensionMismatch(format!(
                "{} must be {}x{}, got {}x{}",
                name,
                rows,
                cols,
                mask.nrows(),
                mask.ncols()
            )));
        }
    }

    let plan = segment_plan(case, pattern, w, n, m, real_mode);
    let mut segments = Vec::with_capacity(plan.len());
    let mut offset = 0;
    for spec in &plan {
        let seg = enumerate_segment(spec, offset)?;
        offset += seg.len();
        segments.push(seg);
    }
    let ncols = offset;

    let res = residuals(system, sol)?;
    let (nrows, rhs, rows) = if real_mode {
        let mut rhs = re_part(&res.q_res);
        rhs.extend(re_part(&res.r_res));
        (
            n + m,
            rhs,
            RowMap {
                rq: 0,
                iq: 0,
                rr: n,
                ir: n,
            },
        )
    } else {
        let mut rhs = re_part(&res.q_res);
        rhs.extend(im_part(&res.q_res));
        rhs.extend(re_part(&res.r_res));
        rhs.extend(im_part(&res.r_res));
        (
            2 * (n + m),
            rhs,
            RowMap {
                rq: 0,
                iq: n,
                rr: 2 * n,
                ir: 2 * n + m,
            },
        )
    };

    let ru = re_part(&sol.u);
    let iu = im_part(&sol.u);
    let rp = re_part(&sol.p);
    let ip = im_part(&sol.p);

    let mut a = RMat::zeros(nrows, ncols);
    for seg in &segments {
        for k in 0..seg.len() {
            fill_column(
                &mut a,
                seg.offset + k,
                seg,
                k,
                case,
                real_mode,
                &rows,
                n,
                m,
                &ru,
                &iu,
                &rp,
                &ip,
            );
        }
    }

    // A residual row with no columns acting on it cannot be absorbed by any
    // admissible perturbation; with a zero residual entry the row is merely
    // redundant and is dropped to keep the factor full rank.
    let mut keep = Vec::with_capacity(nrows);
    for i in 0..nrows {
        let zero_row = (0..ncols).all(|j| a[(i, j)] == 0.0);
        if zero_row {
            if rhs[i] != 0.0 {
                return Err(Error::Infeasible { row: i });
            }
            keep.push(false);
        } else {
            keep.push(true);
        }
    }
    let (a, rhs) = if keep.iter().all(|&k| k) {
        (a, rhs)
    } else {
        let kept: Vec<usize> = (0..nrows).filter(|&i| keep[i]).collect();
        let mut a2 = RMat::zeros(kept.len(), ncols);
        let mut rhs2 = Vec::with_capacity(kept.len());
        for (new_i, &old_i) in kept.iter().enumerate() {
            for j in 0..ncols {
                a2[(new_i, j)] = a[(old_i, j)];
            }
            rhs2.push(rhs[old_i]);
        }
        (a2, rhs2)
    };

    Ok(AssembledSystem {
        a,
        rhs,
        layout: ColumnLayout {
            case,
            n,
            m,
            ncols,
            sparsity_preserved,
            real_mode,
            segments,
        },
    })
}

/// Assembles the realified constraint system for the case carried by the
/// system. The mask decides which columns exist; pass an all-ones pattern to
/// ignore sparsity.
pub fn assemble(
    system: &GsppSystem,
    sol: &CandidateSolution,
    pattern: &SparsityPattern,
    w: &Weights,
) -> Result<AssembledSystem> {
    let sparsity = !pattern_is_all_ones(pattern);
    assemble_impl(system, sol, pattern, w, sparsity, false)
}

fn pattern_is_all_ones(pattern: &SparsityPattern) -> bool {
    [
        &pattern.theta_e,
        &pattern.theta_f,
        &pattern.theta_h,
        &pattern.theta_g,
    ]
    .iter()
    .all(|m| m.data().iter().all(|&v| v == 1.0))
}

/// Minimum-norm solver for a consistent full-row-rank system A z = rhs,
/// backed by a Householder factorization of Aᵀ. The explicit
/// Aᵀ(AAᵀ)⁻¹ rhs form is reserved for test oracles.
pub struct MinNormSolver {
    factor: QrFactor,
    rank: usize,
}

impl MinNormSolver {
    pub fn new(a: &RMat) -> Result<Self> {
        let at = a.transpose();
        let factor = QrFactor::factor(&at);
        let need = a.nrows();
        let diag = factor.r_diag();
        let max = diag.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
        let min = if diag.len() < need {
            0.0
        } else {
            diag[..need]
                .iter()
                .fold(f64::INFINITY, |acc, d| acc.min(d.abs()))
        };
        if diag.is_empty() || min <= RANK_TOLERANCE * max {
            return Err(Error::RankDeficient {
                min_diag: if min.is_finite() { min } else { 0.0 },
                max_diag: max,
            });
        }
        Ok(Self { factor, rank: need })
    }

    /// The unique minimum-2-norm z with A z = rhs.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(rhs.len(), self.rank);
        let y = self.factor.solve_rt(rhs);
        let mut z = vec![0.0; self.factor.nrows()];
        z[..self.rank].copy_from_slice(&y);
        self.factor.apply_q(&mut z);
        z
    }

    /// Orthogonal projection of `w` onto the null space of A.
    pub fn project_onto_nullspace(&self, w: &[f64]) -> Vec<f64> {
        let mut t = w.to_vec();
        self.factor.apply_qt(&mut t);
        for v in t.iter_mut().take(self.rank) {
            *v = 0.0;
        }
        self.factor.apply_q(&mut t);
        t
    }
}

/// Minimum-norm solution of the assembled system.
pub fn min_norm_solve(sys: &AssembledSystem) -> Result<Vec<f64>> {
    Ok(MinNormSolver::new(&sys.a)?.solve(&sys.rhs))
}

fn fill_full(nrows: usize, ncols: usize, seg: &ColumnSegment, z: &[f64]) -> RMat {
    let mut m = RMat::zeros(nrows, ncols);
    for k in 0..seg.len() {
        let idx = seg.indices[k];
        m.data_mut()[idx] = seg.factors[k] * z[seg.offset + k];
    }
    m
}

fn fill_generator(seg: &ColumnSegment, z: &[f64]) -> Vec<f64> {
    let mut gen = vec![0.0; seg.full_len];
    for k in 0..seg.len() {
        gen[seg.indices[k]] = seg.factors[k] * z[seg.offset + k];
    }
    gen
}

/// Maps a minimum-norm solution back to the perturbation blocks: slices by
/// segment, un-scales, and rebuilds matrices through the generator maps, so
/// Hermitian structure and mask zeros hold by construction.
pub fn reconstruct_perturbations(z: &[f64], layout: &ColumnLayout) -> Result<PerturbationSet> {
    if z.len() != layout.ncols {
        return Err(Error::DimensionMismatch(format!(
            "solution length {} does not match layout column count {}",
            z.len(),
            layout.ncols
        )));
    }
    let n = layout.n;
    let m = layout.m;
    let mut e_re = RMat::zeros(n, n);
    let mut e_im = RMat::zeros(n, n);
    let mut f_re = RMat::zeros(m, n);
    let mut f_im = RMat::zeros(m, n);
    let mut h_re: Option<RMat> = None;
    let mut h_im: Option<RMat> = None;
    let mut g_re = RMat::zeros(m, m);
    let mut g_im = RMat::zeros(m, m);
    let mut dq_re = vec![0.0; n];
    let mut dq_im = vec![0.0; n];
    let mut dr_re = vec![0.0; m];
    let mut dr_im = vec![0.0; m];

    for seg in &layout.segments {
        if seg.deleted {
            continue;
        }
        match seg.id {
            SegmentId::ESym => e_re = sym_from_generator(&fill_generator(seg, z), n),
            SegmentId::ESkew => e_im = skew_from_generator(&fill_generator(seg, z), n),
            SegmentId::ERe => e_re = fill_full(n, n, seg, z),
            SegmentId::EIm => e_im = fill_full(n, n, seg, z),
            SegmentId::FRe => f_re = fill_full(m, n, seg, z),
            SegmentId::FIm => f_im = fill_full(m, n, seg, z),
            SegmentId::HRe => h_re = Some(fill_full(m, n, seg, z)),
            SegmentId::HIm => h_im = Some(fill_full(m, n, seg, z)),
            SegmentId::GSym => g_re = sym_from_generator(&fill_generator(seg, z), m),
            SegmentId::GSkew => g_im = skew_from_generator(&fill_generator(seg, z), m),
            SegmentId::GRe => g_re = fill_full(m, m, seg, z),
            SegmentId::GIm => g_im = fill_full(m, m, seg, z),
            SegmentId::QRe => {
                for k in 0..seg.len() {
                    dq_re[seg.indices[k]] = seg.factors[k] * z[seg.offset + k];
                }
            }
            SegmentId::QIm => {
                for k in 0..seg.len() {
                    dq_im[seg.indices[k]] = seg.factors[k] * z[seg.offset + k];
                }
            }
            SegmentId::RRe => {
                for k in 0..seg.len() {
                    dr_re[seg.indices[k]] = seg.factors[k] * z[seg.offset + k];
                }
            }
            SegmentId::RIm => {
                for k in 0..seg.len() {
                    dr_im[seg.indices[k]] = seg.factors[k] * z[seg.offset + k];
                }
            }
        }
    }

    let de = CMat::from_parts(&e_re, &e_im);
    let df = CMat::from_parts(&f_re, &f_im);
    let dh = match layout.case {
        StructureCase::CaseIII => CMat::from_parts(
            &h_re.unwrap_or_else(|| RMat::zeros(m, n)),
            &h_im.unwrap_or_else(|| RMat::zeros(m, n)),
        ),
        // Cases (i)/(ii): the single-F representation, H mirrors F.
        _ => df.clone(),
    };
    let dg = CMat::from_parts(&g_re, &g_im);
    Ok(PerturbationSet {
        de,
        df,
        dh,
        dg,
        dq: crate::matrix::cvec_from_parts(&dq_re, &dq_im),
        dr: crate::matrix::cvec_from_parts(&dr_re, &dr_im),
    })
}

/// Feasibility and structure diagnostics of a candidate perturbation set.
#[derive(Debug, Clone)]
pub struct PerturbationDiagnostics {
    /// ‖(B + ΔB) x̂ − (f + Δf)‖₂.
    pub residual_norm: f64,
    pub herm_deviation_e: f64,
    pub herm_deviation_g: f64,
    /// Entries of dE/dF/dH/dG that are nonzero outside the system's pattern.
    pub mask_violations: usize,
    /// Nonzero blocks whose weight is excluded.
    pub excluded_violations: usize,
    /// Weighted Frobenius norm over the finite-weight blocks.
    pub weighted_norm: f64,
}

fn count_mask_violations(block: &CMat, mask: &RMat) -> usize {
    let mut count = 0;
    for j in 0..block.ncols() {
        for i in 0..block.nrows() {
            let v = block[(i, j)];
            if mask[(i, j)] == 0.0 && (v.re != 0.0 || v.im != 0.0) {
                count += 1;
            }
        }
    }
    count
}

/// Checks a perturbation set against the feasible-set equations and the
/// system's structure: perturbed residual, Hermitian deviations, mask
/// violations and the weighted norm. Always returns diagnostics.
pub fn verify_perturbation(
    system: &GsppSystem,
    sol: &CandidateSolution,
    p: &PerturbationSet,
    w: &Weights,
) -> Result<PerturbationDiagnostics> {
    sol.check_dims(system)?;
    p.check_dims(system.n(), system.m())?;

    let add = |a: &CMat, b: &CMat| {
        let mut out = a.clone();
        for (x, y) in out.data_mut().iter_mut().zip(b.data()) {
            *x += *y;
        }
        out
    };
    let perturbed = GsppSystem::new(
        // Residual evaluation only; bypass structure checks by using the most
        // permissive case and the stored H.
        StructureCase::CaseIII,
        add(system.e(), &p.de),
        add(system.f(), &p.df),
        add(system.h(), &p.dh),
        add(system.g(), &p.dg),
        system
            .q()
            .iter()
            .zip(&p.dq)
            .map(|(a, b)| a + b)
            .collect(),
        system
            .r()
            .iter()
            .zip(&p.dr)
            .map(|(a, b)| a + b)
            .collect(),
    );
    // CaseIII imposes Hermitian E and G; fall back to raw arithmetic when the
    // perturbed blocks do not satisfy it (that is what the deviations report).
    let residual_norm = match perturbed {
        Ok(ps) => residuals(&ps, sol)?.norm2(),
        Err(_) => {
            let e = add(system.e(), &p.de);
            let f = add(system.f(), &p.df);
            let h = add(system.h(), &p.dh);
            let g = add(system.g(), &p.dg);
            let mut top = e.matvec(&sol.u);
            for (t, v) in top.iter_mut().zip(f.conj_t_matvec(&sol.p)) {
                *t += v;
            }
            let mut bottom = h.matvec(&sol.u);
            for (b, v) in bottom.iter_mut().zip(g.matvec(&sol.p)) {
                *b += v;
            }
            let mut s = 0.0;
            for (i, t) in top.iter().enumerate() {
                s += (t - (system.q()[i] + p.dq[i])).norm_sqr();
            }
            for (i, b) in bottom.iter().enumerate() {
                s += (b - (system.r()[i] + p.dr[i])).norm_sqr();
            }
            s.sqrt()
        }
    };

    let pattern = derive_pattern(system);
    let mask_violations = count_mask_violations(&p.de, &pattern.theta_e)
        + count_mask_violations(&p.df, &pattern.theta_f)
        + count_mask_violations(&p.dh, &pattern.theta_h)
        + count_mask_violations(&p.dg, &pattern.theta_g);

    let case = system.case();
    let mut excluded_violations = 0;
    let mut acc = 0.0;
    let mut add_norm = |weight: Weight, norm: f64| match weight {
        Weight::Finite(a) => acc += (a * norm).powi(2),
        Weight::Excluded => {
            if norm != 0.0 {
                excluded_violations += 1;
            }
        }
    };
    add_norm(w.alpha1, p.de.frobenius());
    add_norm(w.alpha2, p.df.frobenius());
    if case == StructureCase::CaseIII {
        add_norm(w.alpha3, p.dh.frobenius());
    }
    add_norm(w.g_weight(case), p.dg.frobenius());
    add_norm(w.beta1, cnorm2(&p.dq));
    add_norm(w.beta2, cnorm2(&p.dr));

    Ok(PerturbationDiagnostics {
        residual_norm,
        herm_deviation_e: p.de.hermitian_deviation(),
        herm_deviation_g: p.dg.hermitian_deviation(),
        mask_violations,
        excluded_violations,
        weighted_norm: acc.sqrt(),
    })
}

fn run_analysis(
    system: &GsppSystem,
    sol: &CandidateSolution,
    w: &Weights,
    preserve_sparsity: bool,
    real_mode: bool,
) -> Result<BackwardErrorReport> {
    let pattern = if preserve_sparsity {
        derive_pattern(system)
    } else {
        SparsityPattern::all_ones(system.n(), system.m())
    };
    let assembled = assemble_impl(system, sol, &pattern, w, preserve_sparsity, real_mode)?;
    let z = min_norm_solve(&assembled)?;
    let xi = norm2(&z);
    let perturbations = reconstruct_perturbations(&z, &assembled.layout)?;
    let diag = verify_perturbation(system, sol, &perturbations, w)?;
    Ok(BackwardErrorReport {
        xi,
        case: system.case(),
        sparsity_preserved: preserve_sparsity,
        perturbations,
        perturbed_residual_norm: diag.residual_norm,
        weighted_norm_of_perturbations: diag.weighted_norm,
    })
}

/// Structured backward error of a computed solution for the system's case,
/// with or without sparsity preservation, along with the optimal
/// perturbations attaining it.
pub fn compute_structured_be(
    system: &GsppSystem,
    sol: &CandidateSolution,
    w: &Weights,
    preserve_sparsity: bool,
) -> Result<BackwardErrorReport> {
    run_analysis(system, sol, w, preserve_sparsity, false)
}

/// Half-size path for exactly real data: solves the real reductions instead
/// of the full realified system. Errors if any imaginary part is nonzero.
pub fn reduce_real(
    system: &GsppSystem,
    sol: &CandidateSolution,
    w: &Weights,
    preserve_sparsity: bool,
) -> Result<BackwardErrorReport> {
    for (what, mat) in [
        ("E", system.e()),
        ("F", system.f()),
        ("H", system.h()),
        ("G", system.g()),
    ] {
        if !mat_all_real(mat) {
            return Err(Error::NonzeroImaginaryPart { what });
        }
    }
    for (what, v) in [
        ("q", system.q()),
        ("r", system.r()),
        ("u_hat", sol.u.as_slice()),
        ("p_hat", sol.p.as_slice()),
    ] {
        if !all_real(v) {
            return Err(Error::NonzeroImaginaryPart { what });
        }
    }
    run_analysis(system, sol, w, preserve_sparsity, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CMat;
    use crate::system::{default_relative_weights, weighted_norm};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn toy_case_i() -> (GsppSystem, CandidateSolution) {
        let e = CMat::from_rows(&[&[c(2.0, 0.0), c(1.0, 1.0)], &[c(1.0, -1.0), c(-0.5, 0.0)]]);
        let f = CMat::from_rows(&[&[c(1.0, 2.0), c(0.0, 0.0)]]);
        let g = CMat::from_rows(&[&[c(0.75, -0.25)]]);
        let sys = GsppSystem::with_shared_f(
            StructureCase::CaseI,
            e,
            f,
            g,
            vec![c(1.0, -1.0), c(0.5, 2.0)],
            vec![c(-1.0, 0.25)],
        )
        .unwrap();
        let sol = CandidateSolution::new(vec![c(0.3, 0.7), c(-1.1, 0.2)], vec![c(0.9, -0.4)]);
        (sys, sol)
    }

    #[test]
    fn min_norm_solver_trivial_cases() {
        let a = RMat::from_rows(&[&[1.0, 0.0]]);
        let z = MinNormSolver::new(&a).unwrap().solve(&[2.0]);
        assert!((z[0] - 2.0).abs() < 1e-14 && z[1].abs() < 1e-14);

        let a = RMat::from_rows(&[&[1.0, 1.0]]);
        let z = MinNormSolver::new(&a).unwrap().solve(&[2.0]);
        assert!((z[0] - 1.0).abs() < 1e-14 && (z[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn min_norm_solver_rejects_rank_deficiency() {
        let a = RMat::from_rows(&[&[1.0, 0.0], &[2.0, 0.0]]);
        assert!(matches!(
            MinNormSolver::new(&a),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn nullspace_projection_is_orthogonal_to_rows() {
        let a = RMat::from_rows(&[&[1.0, 2.0, 0.0, -1.0], &[0.0, 1.0, 1.0, 1.0]]);
        let solver = MinNormSolver::new(&a).unwrap();
        let w = vec![0.5, -1.0, 2.0, 0.25];
        let null = solver.project_onto_nullspace(&w);
        let az = a.matvec(&null);
        assert!(norm2(&az) < 1e-13);
    }

    #[test]
    fn assembled_shape_without_sparsity_case_i() {
        // n = 5, m = 4: s = 25 + 40 + 32 = 97 structural columns plus
        // 2(n+m) = 18 right-hand-side columns; 18 rows.
        let n = 5;
        let m = 4;
        let mut e = CMat::zeros(n, n);
        for i in 0..n {
            e[(i, i)] = c(1.0 + i as f64, 0.0);
        }
        let mut f = CMat::zeros(m, n);
        for i in 0..m {
            f[(i, i)] = c(1.0, -1.0);
        }
        let mut g = CMat::zeros(m, m);
        for i in 0..m {
            g[(i, i)] = c(0.5, 0.5);
        }
        let sys = GsppSystem::with_shared_f(
            StructureCase::CaseI,
            e,
            f,
            g,
            vec![c(1.0, 0.0); n],
            vec![c(1.0, 0.0); m],
        )
        .unwrap();
        let sol = CandidateSolution::new(vec![c(0.1, 0.2); n], vec![c(-0.3, 0.1); m]);
        let w = default_relative_weights(&sys, false).unwrap();
        let pattern = SparsityPattern::all_ones(n, m);
        let asm = assemble(&sys, &sol, &pattern, &w).unwrap();
        assert_eq!(asm.a.nrows(), 18);
        assert_eq!(asm.a.ncols(), 115);
        assert!(!asm.layout.sparsity_preserved);
    }

    #[test]
    fn assembled_shape_case_iii() {
        let n = 5;
        let m = 4;
        let e = CMat::identity(n);
        let mut f = CMat::zeros(m, n);
        let mut h = CMat::zeros(m, n);
        for i in 0..m {
            f[(i, i)] = c(1.0, 0.0);
            h[(i, i + 1)] = c(2.0, 0.0);
        }
        let g = CMat::identity(m);
        let sys = GsppSystem::new(
            StructureCase::CaseIII,
            e,
            f,
            h,
            g,
            vec![c(1.0, 0.0); n],
            vec![c(1.0, 0.0); m],
        )
        .unwrap();
        let sol = CandidateSolution::new(vec![c(0.1, 0.0); n], vec![c(0.2, 0.0); m]);
        let w = default_relative_weights(&sys, false).unwrap();
        let pattern = SparsityPattern::all_ones(n, m);
        let asm = assemble(&sys, &sol, &pattern, &w).unwrap();
        // k = n^2 + 4mn + m^2 = 25 + 80 + 16 = 121 plus 18 rhs columns.
        assert_eq!(asm.a.ncols(), 139);
    }

    #[test]
    fn exact_solution_gives_zero_rhs_and_zero_xi() {
        let (sys, _) = toy_case_i();
        // Manufacture an exact solution: pick x, recompute q and r.
        let u = vec![c(0.4, -0.2), c(1.0, 0.5)];
        let p = vec![c(-0.7, 0.1)];
        let (q, r) = sys.matvec(&u, &p);
        let sys = GsppSystem::with_shared_f(
            StructureCase::CaseI,
            sys.e().clone(),
            sys.f().clone(),
            sys.g().clone(),
            q,
            r,
        )
        .unwrap();
        let sol = CandidateSolution::new(u, p);
        let w = default_relative_weights(&sys, false).unwrap();
        let pattern = SparsityPattern::all_ones(2, 1);
        let asm = assemble(&sys, &sol, &pattern, &w).unwrap();
        assert!(norm2(&asm.rhs) < 1e-15);
        let report = compute_structured_be(&sys, &sol, &w, true).unwrap();
        assert!(report.xi < 1e-15);
        assert!(report.perturbations.de.frobenius() < 1e-15);
    }

    #[test]
    fn reconstruction_bookkeeping_matches_solution_norm() {
        let (sys, sol) = toy_case_i();
        let w = default_relative_weights(&sys, false).unwrap();
        for sparsity in [true, false] {
            let report = compute_structured_be(&sys, &sol, &w, sparsity).unwrap();
            let zeta = weighted_norm(&report.perturbations, &w, sys.case()).unwrap();
            assert!(
                (zeta - report.xi).abs() <= 1e-10 * report.xi.max(1e-300),
                "weighted norm {} vs xi {}",
                zeta,
                report.xi
            );
        }
    }

    #[test]
    fn infeasible_when_all_columns_of_a_row_are_excluded() {
        // beta1 excluded and E, F masked to nothing: the Q rows go empty
        // while the residual there is nonzero.
        let e = CMat::zeros(1, 1);
        let f = CMat::zeros(1, 1);
        let g = CMat::identity(1);
        let sys = GsppSystem::with_shared_f(
            StructureCase::CaseII,
            e,
            f,
            g,
            vec![c(1.0, 0.0)],
            vec![c(1.0, 0.0)],
        )
        .unwrap();
        let sol = CandidateSolution::new(vec![c(0.0, 0.0)], vec![c(0.0, 0.0)]);
        let w = Weights {
            alpha1: Weight::Excluded,
            alpha2: Weight::Excluded,
            alpha3: Weight::Finite(1.0),
            alpha4: None,
            beta1: Weight::Excluded,
            beta2: Weight::Finite(1.0),
        };
        let pattern = derive_pattern(&sys);
        let err = assemble(&sys, &sol, &pattern, &w).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }
}
