//! Vectorization machinery: the column-stacking `vec` operator, generator
//! vectors of symmetric and skew-symmetric matrices, the 0/±1 basis matrices
//! reconstructing `vec` from a generator, the diagonal scalings that turn a
//! generator 2-norm into a Frobenius norm, diagonal sparsity masks, and the
//! Kronecker product.
//!
//! Ordering contract (frozen): generator vectors follow column-major,
//! lower-triangular segments. For a symmetric matrix of order m the segments
//! are columns `M[j..m, j]` for j = 0..m; for a skew-symmetric matrix they are
//! the strict-lower parts `M[j+1..m, j]`. Reconstruction, scaling, masking and
//! the constraint-system assembly all rely on this order.

use crate::error::{Error, Result};
use crate::matrix::{check_binary, RMat};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Length of the symmetric generator of an order-m matrix.
pub fn sym_len(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Length of the skew generator of an order-m matrix.
pub fn skew_len(m: usize) -> usize {
    m * (m - 1) / 2
}

/// Generator index of entry (i, j) with i >= j, 0-based, for order m.
pub fn sym_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j && i < m);
    j * m - j * (j + 1) / 2 + i
}

/// Generator index of entry (i, j) with i > j, 0-based, for order m.
pub fn skew_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i > j && i < m);
    j * (m - 1) - j * (j + 1) / 2 + i - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Column-stacked full matrix of the given shape.
    Full { rows: usize, cols: usize },
    /// Lower triangle (with diagonal) of a symmetric matrix of the given order.
    SymLower { order: usize },
    /// Strict lower triangle of a skew-symmetric matrix of the given order.
    SkewStrictLower { order: usize },
}

impl GeneratorKind {
    pub fn len(&self) -> usize {
        match *self {
            GeneratorKind::Full { rows, cols } => rows * cols,
            GeneratorKind::SymLower { order } => sym_len(order),
            GeneratorKind::SkewStrictLower { order } => skew_len(order),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A matrix encoded as the vector of its free entries.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorVector {
    pub kind: GeneratorKind,
    pub data: Vec<f64>,
}

impl GeneratorVector {
    fn new(kind: GeneratorKind, data: Vec<f64>) -> Self {
        debug_assert_eq!(kind.len(), data.len());
        Self { kind, data }
    }
}

/// Column-stacking operator.
pub fn vec(m: &RMat) -> GeneratorVector {
    GeneratorVector::new(
        GeneratorKind::Full {
            rows: m.nrows(),
            cols: m.ncols(),
        },
        m.data().to_vec(),
    )
}

/// Generator vector of a symmetric matrix: lower-triangular column segments
/// including the diagonal. Symmetry is required exactly.
pub fn vec_sym(m: &RMat) -> Result<GeneratorVector> {
    if let Some((i, j)) = m.symmetry_defect() {
        return Err(Error::NotSymmetric { i, j });
    }
    let n = m.nrows();
    let mut data = Vec::with_capacity(sym_len(n));
    for j in 0..n {
        for i in j..n {
            data.push(m[(i, j)]);
        }
    }
    Ok(GeneratorVector::new(GeneratorKind::SymLower { order: n }, data))
}

/// Generator vector of a skew-symmetric matrix: strict-lower column segments.
pub fn vec_skew(m: &RMat) -> Result<GeneratorVector> {
    if let Some((i, j)) = m.skew_defect() {
        return Err(Error::NotSkewSymmetric { i, j });
    }
    let n = m.nrows();
    let mut data = Vec::with_capacity(skew_len(n));
    for j in 0..n {
        for i in (j + 1)..n {
            data.push(m[(i, j)]);
        }
    }
    Ok(GeneratorVector::new(
        GeneratorKind::SkewStrictLower { order: n },
        data,
    ))
}

/// Rebuilds the symmetric matrix whose generator vector is `gen`.
pub fn sym_from_generator(gen: &[f64], order: usize) -> RMat {
    assert_eq!(gen.len(), sym_len(order));
    let mut m = RMat::zeros(order, order);
    for j in 0..order {
        for i in j..order {
            let v = gen[sym_index(order, i, j)];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Rebuilds the skew-symmetric matrix whose generator vector is `gen`.
pub fn skew_from_generator(gen: &[f64], order: usize) -> RMat {
    assert_eq!(gen.len(), skew_len(order));
    let mut m = RMat::zeros(order, order);
    for j in 0..order {
        for i in (j + 1)..order {
            let v = gen[skew_index(order, i, j)];
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

/// The 0/1 basis mapping a symmetric generator to the full `vec`, applied
/// without materializing the m²-row matrix.
#[derive(Debug, Clone, Copy)]
pub struct SymBasis {
    order: usize,
}

impl SymBasis {
    pub fn new(order: usize) -> Self {
        Self { order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// J_S · gen, i.e. vec of the symmetric matrix encoded by `gen`.
    pub fn apply(&self, gen: &[f64]) -> Vec<f64> {
        let m = self.order;
        assert_eq!(gen.len(), sym_len(m));
        let mut out = vec![0.0; m * m];
        for j in 0..m {
            for i in j..m {
                let v = gen[sym_index(m, i, j)];
                out[j * m + i] = v;
                out[i * m + j] = v;
            }
        }
        out
    }

    /// J_Sᵀ · v for a full vec v; diagonal coordinates pick up one entry,
    /// off-diagonal coordinates the sum of the two mirrored entries.
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        let m = self.order;
        assert_eq!(v.len(), m * m);
        let mut out = vec![0.0; sym_len(m)];
        for j in 0..m {
            for i in j..m {
                let idx = sym_index(m, i, j);
                out[idx] = if i == j {
                    v[j * m + i]
                } else {
                    v[j * m + i] + v[i * m + j]
                };
            }
        }
        out
    }

    /// Dense m² × m(m+1)/2 materialization.
    pub fn to_dense(&self) -> RMat {
        let m = self.order;
        let mut mat = RMat::zeros(m * m, sym_len(m));
        for j in 0..m {
            for i in j..m {
                let c = sym_index(m, i, j);
                mat[(j * m + i, c)] = 1.0;
                mat[(i * m + j, c)] = 1.0;
            }
        }
        mat
    }
}

/// The 0/±1 basis mapping a skew generator to the full `vec`.
#[derive(Debug, Clone, Copy)]
pub struct SkewBasis {
    order: usize,
}

impl SkewBasis {
    pub fn new(order: usize) -> Self {
        Self { order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn apply(&self, gen: &[f64]) -> Vec<f64> {
        let m = self.order;
        assert_eq!(gen.len(), skew_len(m));
        let mut out = vec![0.0; m * m];
        for j in 0..m {
            for i in (j + 1)..m {
                let v = gen[skew_index(m, i, j)];
                out[j * m + i] = v;
                out[i * m + j] = -v;
            }
        }
        out
    }

    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        let m = self.order;
        assert_eq!(v.len(), m * m);
        let mut out = vec![0.0; skew_len(m)];
        for j in 0..m {
            for i in (j + 1)..m {
                out[skew_index(m, i, j)] = v[j * m + i] - v[i * m + j];
            }
        }
        out
    }

    /// Dense m² × m(m−1)/2 materialization; 1×0 for order 1.
    pub fn to_dense(&self) -> RMat {
        let m = self.order;
        let mut mat = RMat::zeros(m * m, skew_len(m));
        for j in 0..m {
            for i in (j + 1)..m {
                let c = skew_index(m, i, j);
                mat[(j * m + i, c)] = 1.0;
                mat[(i * m + j, c)] = -1.0;
            }
        }
        mat
    }
}

pub fn build_sym_basis(m: usize) -> RMat {
    SymBasis::new(m).to_dense()
}

pub fn build_skew_basis(m: usize) -> RMat {
    SkewBasis::new(m).to_dense()
}

/// Diagonal scalings turning generator 2-norms into Frobenius norms: the
/// symmetric scaling is 1 on diagonal positions and √2 elsewhere, the skew
/// scaling is √2 everywhere. Returned as diagonal vectors.
pub fn build_scalings(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d_s = vec![SQRT_2; sym_len(m)];
    for j in 0..m {
        d_s[sym_index(m, j, j)] = 1.0;
    }
    let d_sk = vec![SQRT_2; skew_len(m)];
    (d_s, d_sk)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    Full,
    SymLower,
    SkewStrictLower,
}

/// Diagonal 0/1 mask in generator coordinates: `Full` reads the whole mask
/// column-stacked, `SymLower` its lower triangle, `SkewStrictLower` its strict
/// lower triangle. The triangular kinds require a symmetric mask.
pub fn build_mask_diagonals(theta: &RMat, kind: MaskKind) -> Result<Vec<f64>> {
    check_binary(theta)?;
    match kind {
        MaskKind::Full => Ok(theta.data().to_vec()),
        MaskKind::SymLower => {
            if let Some((i, j)) = theta.symmetry_defect() {
                return Err(Error::NotSymmetric { i, j });
            }
            let m = theta.nrows();
            let mut out = Vec::with_capacity(sym_len(m));
            for j in 0..m {
                for i in j..m {
                    out.push(theta[(i, j)]);
                }
            }
            Ok(out)
        }
        MaskKind::SkewStrictLower => {
            if let Some((i, j)) = theta.symmetry_defect() {
                return Err(Error::NotSymmetric { i, j });
            }
            let m = theta.nrows();
            let mut out = Vec::with_capacity(skew_len(m));
            for j in 0..m {
                for i in (j + 1)..m {
                    out.push(theta[(i, j)]);
                }
            }
            Ok(out)
        }
    }
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &RMat, b: &RMat) -> RMat {
    let (p, q) = (a.nrows(), a.ncols());
    let (s, t) = (b.nrows(), b.ncols());
    let mut out = RMat::zeros(p * s, q * t);
    for ja in 0..q {
        for ia in 0..p {
            let av = a[(ia, ja)];
            if av == 0.0 {
                continue;
            }
            for jb in 0..t {
                for ib in 0..s {
                    out[(ia * s + ib, ja * t + jb)] = av * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Everything the constraint assembly needs for one square symmetric mask:
/// the two bases, the Frobenius scalings, and the mask diagonals in symmetric,
/// skew and full coordinates.
#[derive(Debug, Clone)]
pub struct SelectorBundle {
    pub order: usize,
    pub j_s: SymBasis,
    pub j_sk: SkewBasis,
    pub d_s: Vec<f64>,
    pub d_sk: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl SelectorBundle {
    pub fn for_pattern(theta: &RMat) -> Result<Self> {
        let order = theta.nrows();
        if theta.ncols() != order {
            return Err(Error::DimensionMismatch(format!(
                "selector bundle requires a square mask, got {}x{}",
                theta.nrows(),
                theta.ncols()
            )));
        }
        let (d_s, d_sk) = build_scalings(order);
        Ok(Self {
            order,
            j_s: SymBasis::new(order),
            j_sk: SkewBasis::new(order),
            d_s,
            d_sk,
            phi: build_mask_diagonals(theta, MaskKind::SymLower)?,
            psi: build_mask_diagonals(theta, MaskKind::SkewStrictLower)?,
            sigma: build_mask_diagonals(theta, MaskKind::Full)?,
        })
    }
}
