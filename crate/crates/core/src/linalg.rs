//! Dense complex matrices of small size, row-major.

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Real, C};

/// Relative pivot threshold below which a body matrix counts as singular.
pub const SINGULAR_RTOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T: Real> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = cone();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C<T>>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn diag(values: &[C<T>]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C<T> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shapes");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.at(k, j);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j).conj());
            }
        }
        out
    }

    /// `(M + M*)/2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        let half = T::lit(0.5);
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&adj.data)
                .map(|(a, b)| (*a + *b) * half)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self.at(i, i))
            .fold(czero(), |a, b| a + b)
    }

    /// Sub-matrix on the given row and column ranges.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let mut out = Self::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                out.set(i - r0, j - c0, self.at(i, j));
            }
        }
        out
    }

    /// LU factorisation with partial pivoting. Returns `(lu, perm, sign)`.
    fn lu(&self) -> Result<(Self, Vec<usize>, bool)> {
        assert_eq!(self.rows, self.cols, "square matrix required");
        let n = self.rows;
        let scale = self.max_abs();
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for k in 0..n {
            let (piv, best) = (k..n)
                .map(|i| (i, a.at(i, k).norm()))
                .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= T::lit(SINGULAR_RTOL) * scale || best == T::zero() {
                return Err(Error::Singular(format!(
                    "pivot {k} of a {n}x{n} body matrix"
                )));
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                odd = !odd;
            }
            let p = a.at(k, k);
            for i in k + 1..n {
                let f = a.at(i, k) / p;
                a.set(i, k, f);
                for j in k + 1..n {
                    let v = a.at(i, j) - f * a.at(k, j);
                    a.set(i, j, v);
                }
            }
        }
        Ok((a, perm, odd))
    }

    /// Determinant; the empty matrix has determinant one.
    pub fn det(&self) -> C<T> {
        if self.rows == 0 {
            return cone();
        }
        match self.lu() {
            Ok((lu, _, odd)) => {
                let mut d = cone::<T>();
                for i in 0..self.rows {
                    d = d * lu.at(i, i);
                }
                if odd {
                    -d
                } else {
                    d
                }
            }
            Err(_) => czero(),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.rows;
        let (lu, perm, _) = self.lu()?;
        let mut inv = Self::zeros(n, n);
        for col in 0..n {
            let mut x: Vec<C<T>> = (0..n)
                .map(|i| if perm[i] == col { cone() } else { czero() })
                .collect();
            for i in 0..n {
                for k in 0..i {
                    let v = x[i] - lu.at(i, k) * x[k];
                    x[i] = v;
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    let v = x[i] - lu.at(i, k) * x[k];
                    x[i] = v;
                }
                x[i] = x[i] / lu.at(i, i);
            }
            for i in 0..n {
                inv.set(i, col, x[i]);
            }
        }
        Ok(inv)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.at(i, j));
            }
        }
        t
    }

    /// Factor `L` (lower) of a complex symmetric matrix, `M = L Lᵀ`, with
    /// principal square roots on the diagonal. Exists when the Hermitian
    /// part of `M` is positive definite; the pivots then have positive real
    /// part.
    pub fn cholesky_symmetric(&self) -> Result<Self> {
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self.at(j, j);
            for k in 0..j {
                d -= l.at(j, k) * l.at(j, k);
            }
            if d.re <= T::zero() {
                return Err(Error::Domain(
                    "symmetric form has no positive-definite real part".into(),
                ));
            }
            let djj = d.sqrt();
            l.set(j, j, djj);
            for i in j + 1..n {
                let mut s = self.at(i, j);
                for k in 0..j {
                    s -= l.at(i, k) * l.at(j, k);
                }
                l.set(i, j, s / djj);
            }
        }
        Ok(l)
    }

    /// Cholesky factor `L` (lower, positive diagonal) of a Hermitian
    /// positive-definite matrix, `M = L L*`.
    pub fn cholesky(&self) -> Result<Self> {
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self.at(j, j).re;
            for k in 0..j {
                d -= l.at(j, k).norm_sqr();
            }
            if d <= T::zero() {
                return Err(Error::Domain("matrix is not positive definite".into()));
            }
            let djj = d.sqrt();
            l.set(j, j, C::new(djj, T::zero()));
            for i in j + 1..n {
                let mut s = self.at(i, j);
                for k in 0..j {
                    s -= l.at(i, k) * l.at(j, k).conj();
                }
                l.set(i, j, s / djj);
            }
        }
        Ok(l)
    }
}
