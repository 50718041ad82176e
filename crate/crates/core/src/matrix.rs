//! Dense column-major matrices over `f64` and `Complex64`, plus the small
//! vector helpers the rest of the crate leans on.
//!
//! Column-major storage keeps the column-stacking `vec(·)` operator a plain
//! slice view of the data.

use num_complex::Complex64;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense real matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RMat {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl RMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds from row slices (row-major input, stored column-major).
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let nrows = rows.len();
        let ncols = if nrows == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged row in RMat::from_rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Column-major backing slice; entry (i, j) lives at `j * nrows + i`.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for j in 0..self.ncols {
            for i in 0..self.nrows {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.nrows];
        for j in 0..self.ncols {
            let xj = x[j];
            if xj != 0.0 {
                let col = self.col(j);
                for i in 0..self.nrows {
                    y[i] += col[i] * xj;
                }
            }
        }
        y
    }

    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "matvec_t dimension mismatch");
        let mut y = vec![0.0; self.ncols];
        for j in 0..self.ncols {
            let col = self.col(j);
            let mut s = 0.0;
            for i in 0..self.nrows {
                s += col[i] * x[i];
            }
            y[j] = s;
        }
        y
    }

    pub fn matmul(&self, other: &RMat) -> RMat {
        assert_eq!(self.ncols, other.nrows, "matmul dimension mismatch");
        let mut out = RMat::zeros(self.nrows, other.ncols);
        for j in 0..other.ncols {
            for k in 0..self.ncols {
                let b = other[(k, j)];
                if b != 0.0 {
                    let col = self.col(k);
                    let out_col = out.col_mut(j);
                    for i in 0..col.len() {
                        out_col[i] += col[i] * b;
                    }
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetry_defect().is_none()
    }

    /// First (i, j) with `m[i,j] != m[j,i]`, if any. Exact comparison.
    pub fn symmetry_defect(&self) -> Option<(usize, usize)> {
        if self.nrows != self.ncols {
            return Some((0, 0));
        }
        for j in 0..self.ncols {
            for i in (j + 1)..self.nrows {
                if self[(i, j)] != self[(j, i)] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// First (i, j) with `m[i,j] != -m[j,i]` (diagonal included), if any.
    pub fn skew_defect(&self) -> Option<(usize, usize)> {
        if self.nrows != self.ncols {
            return Some((0, 0));
        }
        for j in 0..self.ncols {
            if self[(j, j)] != 0.0 {
                return Some((j, j));
            }
            for i in (j + 1)..self.nrows {
                if self[(i, j)] != -self[(j, i)] {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

impl Index<(usize, usize)> for RMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[j * self.nrows + i]
    }
}

impl IndexMut<(usize, usize)> for RMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[j * self.nrows + i]
    }
}

/// Dense complex matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    nrows: usize,
    ncols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![Complex64::ZERO; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let nrows = rows.len();
        let ncols = if nrows == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged row in CMat::from_rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Recombines separately stored real and imaginary parts.
    pub fn from_parts(re: &RMat, im: &RMat) -> Self {
        assert_eq!(re.nrows(), im.nrows());
        assert_eq!(re.ncols(), im.ncols());
        let mut m = Self::zeros(re.nrows(), re.ncols());
        for (k, v) in m.data.iter_mut().enumerate() {
            *v = Complex64::new(re.data()[k], im.data()[k]);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn re(&self) -> RMat {
        let mut m = RMat::zeros(self.nrows, self.ncols);
        for (k, v) in self.data.iter().enumerate() {
            m.data_mut()[k] = v.re;
        }
        m
    }

    pub fn im(&self) -> RMat {
        let mut m = RMat::zeros(self.nrows, self.ncols);
        for (k, v) in self.data.iter().enumerate() {
            m.data_mut()[k] = v.im;
        }
        m
    }

    pub fn conj_transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for j in 0..self.ncols {
            for i in 0..self.nrows {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        let mut y = vec![Complex64::ZERO; self.nrows];
        for j in 0..self.ncols {
            let xj = x[j];
            let col = &self.data[j * self.nrows..(j + 1) * self.nrows];
            for i in 0..self.nrows {
                y[i] += col[i] * xj;
            }
        }
        y
    }

    /// y = Mᴴ x without materializing the conjugate transpose.
    pub fn conj_t_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.nrows, "conj_t_matvec dimension mismatch");
        let mut y = vec![Complex64::ZERO; self.ncols];
        for j in 0..self.ncols {
            let col = &self.data[j * self.nrows..(j + 1) * self.nrows];
            let mut s = Complex64::ZERO;
            for i in 0..self.nrows {
                s += col[i].conj() * x[i];
            }
            y[j] = s;
        }
        y
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_defect().is_none()
    }

    /// First (i, j) with `m[i,j] != conj(m[j,i])`, if any. Exact comparison.
    pub fn hermitian_defect(&self) -> Option<(usize, usize)> {
        if self.nrows != self.ncols {
            return Some((0, 0));
        }
        for j in 0..self.ncols {
            for i in j..self.nrows {
                if self[(i, j)] != self[(j, i)].conj() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Frobenius norm of (M - Mᴴ)/2, zero iff Hermitian.
    pub fn hermitian_deviation(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let mut s = 0.0;
        for j in 0..self.ncols {
            for i in 0..self.nrows {
                let d = (self[(i, j)] - self[(j, i)].conj()) * 0.5;
                s += d.norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn entrywise_eq(&self, other: &CMat) -> bool {
        self.nrows == other.nrows && self.ncols == other.ncols && self.data == other.data
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[j * self.nrows + i]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[j * self.nrows + i]
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn cnorm2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn re_part(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|v| v.re).collect()
}

pub fn im_part(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|v| v.im).collect()
}

pub fn cvec_from_parts(re: &[f64], im: &[f64]) -> Vec<Complex64> {
    assert_eq!(re.len(), im.len());
    re.iter()
        .zip(im)
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect()
}

/// Checks that every imaginary part is exactly zero.
pub fn all_real(x: &[Complex64]) -> bool {
    x.iter().all(|v| v.im == 0.0)
}

pub fn mat_all_real(m: &CMat) -> bool {
    all_real(m.data())
}

/// Complex division by Smith's algorithm; matches the scaling LAPACK uses and
/// avoids the spurious overflow of the textbook formula.
pub fn smith_div(a: Complex64, b: Complex64) -> Complex64 {
    if b.im.abs() < b.re.abs() {
        let t = b.im / b.re;
        let d = b.re + b.im * t;
        Complex64::new((a.re + a.im * t) / d, (a.im - a.re * t) / d)
    } else {
        let t = b.re / b.im;
        let d = b.re * t + b.im;
        Complex64::new((a.re * t + a.im) / d, (a.im * t - a.re) / d)
    }
}

/// Validates that a matrix holds only 0.0 and 1.0 entries.
pub fn check_binary(m: &RMat) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != 0.0 && v != 1.0 {
                return Err(Error::NonBinaryMask { i, j, value: v });
            }
        }
    }
    Ok(())
}
