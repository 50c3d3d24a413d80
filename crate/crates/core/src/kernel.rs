//! Lower-triangular array kernels and the pseudo-convolution calculus.
//!
//! A discrete kernel on a nonuniform mesh is a ragged lower-triangular array:
//! row `n` (`n = 1..=N`) holds the `n` values `a^n_0, a^n_1, ..., a^n_{n-1}`,
//! stored offset-ascending so that offset `k = 0` is the diagonal and offset
//! `k` sits in matrix column `j = n - k`. Viewed as a lower-triangular matrix
//! with `(n, j)` entry `a^n_{n-j}`, the pseudo-convolution
//!
//! ```text
//! (A ⊛ B)^n_{n-k} = sum_{j=k..n} a^n_{n-j} b^j_{j-k}
//! ```
//!
//! is exactly the matrix product, hence associative and noncommutative, and
//! it reduces to ordinary sequence convolution whenever entries depend on the
//! offset alone. All operations here are pure functions of immutable inputs.

use crate::error::{Error, Result};
use std::path::Path;

/// Ragged lower-triangular kernel `a^n_k` (row `n = 1..=N`, offset `k < n`).
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayKernel {
    rows: Vec<Vec<f64>>,
}

impl ArrayKernel {
    /// Validates the triangular shape (row `n` has `n` finite entries).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(Error::Shape(format!(
                    "row {} must have {} entries, got {}",
                    i + 1,
                    i + 1,
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Parse(format!("non-finite entry {bad} in row {}", i + 1)));
            }
        }
        Ok(ArrayKernel { rows })
    }

    /// Identity for the pseudo-convolution: ones on the diagonal.
    pub fn identity(n: usize) -> Self {
        let rows = (1..=n)
            .map(|r| {
                let mut row = vec![0.0; r];
                row[0] = 1.0;
                row
            })
            .collect();
        ArrayKernel { rows }
    }

    /// Kernel of all ones. Pseudo-convolution with it accumulates prefix
    /// sums; it plays the role of the sequence `(1, 1, 1, ...)`.
    pub fn ones(n: usize) -> Self {
        ArrayKernel { rows: (1..=n).map(|r| vec![1.0; r]).collect() }
    }

    /// Inverse of [`ArrayKernel::ones`]: ones on the diagonal, -1 on the
    /// first subdiagonal. Pseudo-convolution with it takes backward
    /// differences.
    pub fn ones_inverse(n: usize) -> Self {
        let rows = (1..=n)
            .map(|r| {
                let mut row = vec![0.0; r];
                row[0] = 1.0;
                if r > 1 {
                    row[1] = -1.0;
                }
                row
            })
            .collect();
        ArrayKernel { rows }
    }

    /// Number of rows `N`.
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Row `n`, `n = 1..=N`, offset-ascending (diagonal first).
    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n - 1]
    }

    /// Entry `a^n_k` at row `n = 1..=N`, offset `k = 0..n-1`.
    pub fn entry(&self, n: usize, k: usize) -> f64 {
        self.rows[n - 1][k]
    }

    /// Raw row storage (index `i` holds row `n = i + 1`).
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn max_abs(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    fn check_same_rows(&self, other: &ArrayKernel, op: &str) -> Result<()> {
        if self.n_rows() != other.n_rows() {
            return Err(Error::Shape(format!(
                "{op}: kernels have {} and {} rows",
                self.n_rows(),
                other.n_rows()
            )));
        }
        Ok(())
    }

    /// Pseudo-convolution `C = A ⊛ B`:
    /// `c^n_{n-k} = sum_{j=k..n} a^n_{n-j} b^j_{j-k}` for `1 <= k <= n <= N`.
    pub fn pconv(&self, other: &ArrayKernel) -> Result<ArrayKernel> {
        self.check_same_rows(other, "pconv")?;
        Ok(self.pconv_impl(other))
    }

    fn pconv_impl(&self, other: &ArrayKernel) -> ArrayKernel {
        let n_max = self.n_rows();
        let mut rows = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let a_row = &self.rows[n - 1];
            let mut out = vec![0.0; n];
            for k in 1..=n {
                let mut acc = 0.0;
                for j in k..=n {
                    acc += a_row[n - j] * other.rows[j - 1][j - k];
                }
                out[n - k] = acc;
            }
            rows.push(out);
        }
        ArrayKernel { rows }
    }

    /// Kernel applied to a vector: `y_n = sum_{j=1..n} a^n_{n-j} x_j`.
    pub fn pconv_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_rows() {
            return Err(Error::Shape(format!(
                "pconv_vec: kernel has {} rows, vector has {} entries",
                self.n_rows(),
                x.len()
            )));
        }
        let mut y = Vec::with_capacity(x.len());
        for n in 1..=self.n_rows() {
            let row = &self.rows[n - 1];
            let mut acc = 0.0;
            for j in 1..=n {
                acc += row[n - j] * x[j - 1];
            }
            y.push(acc);
        }
        Ok(y)
    }

    /// Pseudo-convolution inverse `B` with `B ⊛ A = A ⊛ B = I`, computed
    /// row by row through forward substitution:
    /// `b^n_0 = 1/a^n_0`, then for `k = n-1..1`
    /// `b^n_{n-k} = -(1/a^k_0) sum_{j=k+1..n} b^n_{n-j} a^j_{j-k}`.
    /// Rows of the inverse are mutually independent.
    pub fn pinv(&self) -> Result<ArrayKernel> {
        let n_max = self.n_rows();
        for n in 1..=n_max {
            if self.rows[n - 1][0] == 0.0 {
                return Err(Error::SingularKernel { row: n });
            }
        }
        let mut rows = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let mut b = vec![0.0; n];
            b[0] = 1.0 / self.rows[n - 1][0];
            for o in 1..n {
                let k = n - o;
                let mut acc = 0.0;
                for j in (k + 1)..=n {
                    acc += b[n - j] * self.rows[j - 1][j - k];
                }
                b[o] = -acc / self.rows[k - 1][0];
            }
            rows.push(b);
        }
        Ok(ArrayKernel { rows })
    }

    /// Right complementary kernel `C_R` with `A ⊛ C_R = ones`; equals
    /// `pinv(A) ⊛ ones`, i.e. rows of prefix sums of the inverse.
    pub fn right_complementary(&self) -> Result<ArrayKernel> {
        let inv = self.pinv()?;
        Ok(inv.pconv_impl(&ArrayKernel::ones(self.n_rows())))
    }

    /// Left complementary kernel `C_L` with `C_L ⊛ A = ones`; equals
    /// `ones ⊛ pinv(A)`.
    pub fn left_complementary(&self) -> Result<ArrayKernel> {
        let inv = self.pinv()?;
        Ok(ArrayKernel::ones(self.n_rows()).pconv_impl(&inv))
    }

    /// Conjugation by the all-ones kernel: `ones_inverse ⊛ A ⊛ ones`.
    /// Entrywise this differences cumulative row sums.
    pub fn conjugate_by_ones(&self) -> ArrayKernel {
        let n = self.n_rows();
        ArrayKernel::ones_inverse(n)
            .pconv_impl(self)
            .pconv_impl(&ArrayKernel::ones(n))
    }

    /// `I + lambda * A`.
    pub fn scaled_plus_identity(&self, lambda: f64) -> ArrayKernel {
        let mut rows = self.rows.clone();
        for row in rows.iter_mut() {
            for v in row.iter_mut() {
                *v *= lambda;
            }
            row[0] += 1.0;
        }
        ArrayKernel { rows }
    }

    /// Resolvent kernel `R_lambda`, the solution of
    /// `R_lambda + lambda R_lambda ⊛ A = lambda A`, computed through
    /// `R_lambda = I - pinv(I + lambda A)`.
    pub fn resolvent(&self, lambda: f64) -> Result<ArrayKernel> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "resolvent parameter must be positive and finite, got {lambda}"
            )));
        }
        let mut inv = self.scaled_plus_identity(lambda).pinv()?;
        for row in inv.rows.iter_mut() {
            for v in row.iter_mut() {
                *v = -*v;
            }
            row[0] += 1.0;
        }
        Ok(inv)
    }

    /// Right multiplication by a diagonal kernel:
    /// `(A ⊛ diag(d))^n_k = a^n_k d_{n-k}`.
    pub fn scale_right(&self, d: &DiagonalKernel) -> Result<ArrayKernel> {
        if d.len() != self.n_rows() {
            return Err(Error::Shape(format!(
                "scale_right: kernel has {} rows, diagonal has {} entries",
                self.n_rows(),
                d.len()
            )));
        }
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n = i + 1;
                row.iter().enumerate().map(|(k, &v)| v * d.values()[n - k - 1]).collect()
            })
            .collect();
        Ok(ArrayKernel { rows })
    }

    /// CSV form: line `n` holds the `n` entries of row `n`, offset-ascending.
    /// Values are printed with the shortest representation that parses back
    /// to the identical `f64`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: Result<Vec<f64>> = line
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("line {}: bad value {p:?}", i + 1)))
                })
                .collect();
            rows.push(row?);
        }
        Self::from_rows(rows)
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }
}

/// Positive diagonal kernel, e.g. the step sizes of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalKernel {
    d: Vec<f64>,
}

impl DiagonalKernel {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::Shape("diagonal kernel must be non-empty".into()));
        }
        if let Some(bad) = d.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "diagonal entries must be positive and finite, got {bad}"
            )));
        }
        Ok(DiagonalKernel { d })
    }

    /// Step sizes of a mesh arranged as a diagonal kernel.
    pub fn from_mesh(mesh: &crate::mesh::Mesh) -> Self {
        DiagonalKernel { d: mesh.steps().to_vec() }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.d
    }

    /// Embeds the diagonal into a full array kernel.
    pub fn to_kernel(&self) -> ArrayKernel {
        let rows = (1..=self.d.len())
            .map(|n| {
                let mut row = vec![0.0; n];
                row[0] = self.d[n - 1];
                row
            })
            .collect();
        ArrayKernel { rows }
    }
}
