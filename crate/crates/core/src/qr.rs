//! In-place Householder QR used by the minimum-norm solver. The factor keeps
//! the reflectors, so products with Q and Qᵀ never materialize an orthogonal
//! matrix.

use crate::matrix::RMat;

#[derive(Debug, Clone)]
pub struct QrFactor {
    /// R in the upper triangle, reflector tails below the diagonal.
    qr: RMat,
    tau: Vec<f64>,
}

impl QrFactor {
    pub fn factor(a: &RMat) -> Self {
        let mut qr = a.clone();
        let rows = qr.nrows();
        let cols = qr.ncols();
        let k = rows.min(cols);
        let mut tau = vec![0.0; k];

        for step in 0..k {
            // Householder vector for column `step`, rows step..rows.
            let mut normx = 0.0;
            for i in step..rows {
                normx = f64::hypot(normx, qr[(i, step)]);
            }
            if normx == 0.0 {
                tau[step] = 0.0;
                continue;
            }
            let alpha = qr[(step, step)];
            let beta = if alpha >= 0.0 { -normx } else { normx };
            let t = (beta - alpha) / beta;
            let scale = alpha - beta;
            for i in (step + 1)..rows {
                qr[(i, step)] /= scale;
            }
            qr[(step, step)] = beta;
            tau[step] = t;

            // Apply H = I - t v vᵀ to the trailing columns (v[step] = 1).
            for j in (step + 1)..cols {
                let mut w = qr[(step, j)];
                for i in (step + 1)..rows {
                    w += qr[(i, step)] * qr[(i, j)];
                }
                w *= t;
                qr[(step, j)] -= w;
                for i in (step + 1)..rows {
                    let v = qr[(i, step)];
                    qr[(i, j)] -= v * w;
                }
            }
        }
        Self { qr, tau }
    }

    pub fn nrows(&self) -> usize {
        self.qr.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.qr.ncols()
    }

    /// Diagonal of R, length min(rows, cols).
    pub fn r_diag(&self) -> Vec<f64> {
        (0..self.tau.len()).map(|i| self.qr[(i, i)]).collect()
    }

    /// Entry of R at (i, j), i <= j < ncols.
    pub fn r_entry(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j);
        self.qr[(i, j)]
    }

    /// Solves Rᵀ y = b by forward substitution; R is the leading k×k upper
    /// triangle with k = b.len() <= min(rows, cols).
    pub fn solve_rt(&self, b: &[f64]) -> Vec<f64> {
        let k = b.len();
        debug_assert!(k <= self.tau.len());
        let mut y = vec![0.0; k];
        for i in 0..k {
            let mut s = b[i];
            for j in 0..i {
                s -= self.qr[(j, i)] * y[j];
            }
            y[i] = s / self.qr[(i, i)];
        }
        y
    }

    /// x := Qᵀ x (applies reflectors in factorization order).
    pub fn apply_qt(&self, x: &mut [f64]) {
        let rows = self.qr.nrows();
        debug_assert_eq!(x.len(), rows);
        for step in 0..self.tau.len() {
            let t = self.tau[step];
            if t == 0.0 {
                continue;
            }
            let mut w = x[step];
            for i in (step + 1)..rows {
                w += self.qr[(i, step)] * x[i];
            }
            w *= t;
            x[step] -= w;
            for i in (step + 1)..rows {
                x[i] -= self.qr[(i, step)] * w;
            }
        }
    }

    /// x := Q x (applies reflectors in reverse order).
    pub fn apply_q(&self, x: &mut [f64]) {
        let rows = self.qr.nrows();
        debug_assert_eq!(x.len(), rows);
        for step in (0..self.tau.len()).rev() {
            let t = self.tau[step];
            if t == 0.0 {
                continue;
            }
            let mut w = x[step];
            for i in (step + 1)..rows {
                w += self.qr[(i, step)] * x[i];
            }
            w *= t;
            x[step] -= w;
            for i in (step + 1)..rows {
                x[i] -= self.qr[(i, step)] * w;
            }
        }
    }
}
