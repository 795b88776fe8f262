//! Even supermatrices over a Grassmann algebra, Berezinians, principal minors
//! and the conical functions built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{GrassmannNumber, Parity};
use crate::linalg::{CMat, SINGULAR_RTOL};
use crate::scalar::{Real, C};

type Gn<T> = GrassmannNumber<T>;

/// Block format `(even|odd)` of a row or column index set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Format {
    pub even: usize,
    pub odd: usize,
}

impl Format {
    pub const fn new(even: usize, odd: usize) -> Self {
        Self { even, odd }
    }

    pub const fn dim(&self) -> usize {
        self.even + self.odd
    }

    #[inline]
    pub const fn index_is_odd(&self, i: usize) -> bool {
        i >= self.even
    }

    /// Format of the index sub-range `lo..hi`.
    pub fn range(&self, lo: usize, hi: usize) -> Self {
        let even = hi.min(self.even).saturating_sub(lo.min(self.even));
        Self::new(even, hi - lo - even)
    }
}

/// Multi-index `m = (m', m'') ∈ C^p × Z^q`, stored with real boson part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiIndex {
    pub p: usize,
    pub q: usize,
    pub values: Vec<f64>,
}

/// Tolerance for recognising an integer fermionic exponent.
pub const INTEGER_TOL: f64 = 1e-9;

impl MultiIndex {
    /// Validates the length and the integrality of the fermionic entries.
    pub fn new(p: usize, q: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != p + q {
            return Err(Error::Domain(format!(
                "multi-index of length {} for format ({p}|{q})",
                values.len()
            )));
        }
        let mut values = values;
        for v in values.iter_mut().skip(p) {
            if (*v - v.round()).abs() > INTEGER_TOL {
                return Err(Error::Domain(format!(
                    "fermionic exponent {v} is not an integer"
                )));
            }
            *v = v.round();
        }
        Ok(Self { p, q, values })
    }

    /// `(n, …, n)`.
    pub fn constant(p: usize, q: usize, n: i64) -> Self {
        Self {
            p,
            q,
            values: vec![n as f64; p + q],
        }
    }

    pub fn boson(&self) -> &[f64] {
        &self.values[..self.p]
    }

    pub fn fermion(&self) -> Vec<i64> {
        self.values[self.p..].iter().map(|v| *v as i64).collect()
    }

    /// Exponent of `Δ_{k+1}` in `Δ_m`: `m_k − m_{k+1}` with `m_{p+q} = 0`.
    pub fn minor_exponent(&self, k: usize) -> f64 {
        let next = self.values.get(k + 1).copied().unwrap_or(0.0);
        self.values[k] - next
    }
}

/// Even (or, unchecked, arbitrary) supermatrix with Grassmann entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperMatrix<T: Real> {
    rows: Format,
    cols: Format,
    n: usize,
    data: Vec<Gn<T>>,
}

impl<T: Real> SuperMatrix<T> {
    /// Builds an even supermatrix, checking that diagonal blocks carry even
    /// entries and off-diagonal blocks odd ones.
    pub fn new(rows: Format, cols: Format, data: Vec<Gn<T>>) -> Result<Self> {
        let m = Self::new_unchecked(rows, cols, data)?;
        for i in 0..rows.dim() {
            for j in 0..cols.dim() {
                let want = if rows.index_is_odd(i) == cols.index_is_odd(j) {
                    Parity::Even
                } else {
                    Parity::Odd
                };
                let e = m.get(i, j);
                let ok = e.is_zero() || e.parity() == Some(want);
                if !ok {
                    return Err(Error::Parity(format!(
                        "entry ({i},{j}) must be {want:?} in a ({}|{})x({}|{}) even supermatrix",
                        rows.even, rows.odd, cols.even, cols.odd
                    )));
                }
            }
        }
        Ok(m)
    }

    /// Builds without the parity check; shape and algebra are still checked.
    pub fn new_unchecked(rows: Format, cols: Format, data: Vec<Gn<T>>) -> Result<Self> {
        if data.len() != rows.dim() * cols.dim() {
            return Err(Error::Format(format!(
                "{} entries for a {}x{} supermatrix",
                data.len(),
                rows.dim(),
                cols.dim()
            )));
        }
        let n = data.first().map(|g| g.n_generators()).unwrap_or(0);
        if let Some(bad) = data.iter().find(|g| g.n_generators() != n) {
            return Err(Error::AlgebraMismatch(n, bad.n_generators()));
        }
        Ok(Self {
            rows,
            cols,
            n,
            data,
        })
    }

    pub fn zeros(rows: Format, cols: Format, n: usize) -> Self {
        Self {
            rows,
            cols,
            n,
            data: vec![Gn::zero(n); rows.dim() * cols.dim()],
        }
    }

    pub fn identity(fmt: Format, n: usize) -> Self {
        let mut m = Self::zeros(fmt, fmt, n);
        for i in 0..fmt.dim() {
            m.set(i, i, Gn::one(n));
        }
        m
    }

    /// Diagonal supermatrix with the given (even) entries.
    pub fn diagonal(fmt: Format, entries: Vec<Gn<T>>) -> Result<Self> {
        if entries.len() != fmt.dim() {
            return Err(Error::Format("diagonal length".into()));
        }
        let n = entries.first().map(|g| g.n_generators()).unwrap_or(0);
        let mut m = Self::zeros(fmt, fmt, n);
        for (i, e) in entries.into_iter().enumerate() {
            m.set(i, i, e);
        }
        Self::new(fmt, fmt, m.data)
    }

    /// Lifts a complex matrix into the algebra on `n` generators.
    pub fn from_body(rows: Format, cols: Format, n: usize, body: &CMat<T>) -> Result<Self> {
        if body.rows != rows.dim() || body.cols != cols.dim() {
            return Err(Error::Format("body shape".into()));
        }
        let data = body.data.iter().map(|z| Gn::scalar(n, *z)).collect();
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> Format {
        self.rows
    }

    pub fn cols(&self) -> Format {
        self.cols
    }

    pub fn n_generators(&self) -> usize {
        self.n
    }

    pub fn nrows(&self) -> usize {
        self.rows.dim()
    }

    pub fn ncols(&self) -> usize {
        self.cols.dim()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Gn<T> {
        &self.data[i * self.cols.dim() + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Gn<T>) {
        let c = self.cols.dim();
        self.data[i * c + j] = v;
    }

    pub fn entries(&self) -> &[Gn<T>] {
        &self.data
    }

    /// Complex matrix of bodies.
    pub fn body(&self) -> CMat<T> {
        CMat::from_vec(
            self.nrows(),
            self.ncols(),
            self.data.iter().map(|g| g.body()).collect(),
        )
    }

    /// Moves all entries into an algebra with `n_new ≥ n` generators.
    pub fn embed(&self, n_new: usize) -> Result<Self> {
        let data = self
            .data
            .iter()
            .map(|g| g.embed(n_new))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            n: n_new,
            data,
        })
    }

    pub fn map_entries<F: Fn(&Gn<T>) -> Gn<T>>(&self, f: F) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Sub-matrix on rows `r0..r1` and columns `c0..c1`, formats inherited.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let mut data = Vec::with_capacity((r1 - r0) * (c1 - c0));
        for i in r0..r1 {
            for j in c0..c1 {
                data.push(self.get(i, j).clone());
            }
        }
        Self {
            rows: self.rows.range(r0, r1),
            cols: self.cols.range(c0, c1),
            n: self.n,
            data,
        }
    }

    /// Even-even block `A`.
    pub fn a_block(&self) -> Self {
        self.block(0, self.rows.even, 0, self.cols.even)
    }

    /// Even-odd block `B`.
    pub fn b_block(&self) -> Self {
        self.block(0, self.rows.even, self.cols.even, self.ncols())
    }

    /// Odd-even block `C`.
    pub fn c_block(&self) -> Self {
        self.block(self.rows.even, self.nrows(), 0, self.cols.even)
    }

    /// Odd-odd block `D`.
    pub fn d_block(&self) -> Self {
        self.block(self.rows.even, self.nrows(), self.cols.even, self.ncols())
    }

    /// Reassembles `[[A, B], [C, D]]`.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        let rows = Format::new(a.nrows(), c.nrows());
        let cols = Format::new(a.ncols(), b.ncols());
        if b.nrows() != a.nrows()
            || d.nrows() != c.nrows()
            || d.ncols() != b.ncols()
            || c.ncols() != a.ncols()
        {
            return Err(Error::Format("block shapes do not tile".into()));
        }
        let n = a.n.max(b.n).max(c.n).max(d.n);
        let mut m = Self::zeros(rows, cols, n);
        let put = |m: &mut Self, src: &Self, r0: usize, c0: usize| -> Result<()> {
            for i in 0..src.nrows() {
                for j in 0..src.ncols() {
                    m.set(r0 + i, c0 + j, src.get(i, j).embed(n)?);
                }
            }
            Ok(())
        };
        put(&mut m, a, 0, 0)?;
        put(&mut m, b, 0, a.ncols())?;
        put(&mut m, c, a.nrows(), 0)?;
        put(&mut m, d, a.nrows(), a.ncols())?;
        Ok(m)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Format("supermatrix shapes differ".into()));
        }
        if self.n != other.n {
            return Err(Error::AlgebraMismatch(self.n, other.n));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(self.with_data(data))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(self.with_data(data))
    }

    fn with_data(&self, data: Vec<Gn<T>>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            n: self.n,
            data,
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Format(format!(
                "cannot multiply ({}|{}) columns by ({}|{}) rows",
                self.cols.even, self.cols.odd, other.rows.even, other.rows.odd
            )));
        }
        if self.n != other.n {
            return Err(Error::AlgebraMismatch(self.n, other.n));
        }
        let (r, k, c) = (self.nrows(), self.ncols(), other.ncols());
        let mut data = vec![Gn::zero(self.n); r * c];
        for i in 0..r {
            for l in 0..k {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..c {
                    let b = other.get(l, j);
                    if b.is_zero() {
                        continue;
                    }
                    data[i * c + j].add_product(a, b)?;
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            n: self.n,
            data,
        })
    }

    /// Left multiplication of every entry by the scalar `s`.
    pub fn scale(&self, s: &Gn<T>) -> Result<Self> {
        let data = self
            .data
            .iter()
            .map(|e| s.try_mul(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.with_data(data))
    }

    pub fn scale_c(&self, s: C<T>) -> Self {
        self.map_entries(|e| e.scale(s))
    }

    fn require_square(&self) -> Result<()> {
        if self.rows != self.cols {
            Err(Error::Format(
                "square supermatrix of matching formats required".into(),
            ))
        } else {
            Ok(())
        }
    }

    /// Supertrace `tr A − tr D`.
    pub fn supertrace(&self) -> Result<Gn<T>> {
        self.require_square()?;
        let mut s = Gn::zero(self.n);
        for i in 0..self.nrows() {
            if self.rows.index_is_odd(i) {
                s -= self.get(i, i);
            } else {
                s += self.get(i, i);
            }
        }
        Ok(s)
    }

    /// Inverse by the terminating Neumann series around the body:
    /// `X⁻¹ = Σ_k (−X₀⁻¹ X_s)^k X₀⁻¹`.
    pub fn inverse(&self) -> Result<Self> {
        if self.nrows() != self.ncols() {
            return Err(Error::Format("inverse of a non-square supermatrix".into()));
        }
        let x0inv = self.body().inverse()?;
        let lifted = Self {
            rows: self.cols,
            cols: self.rows,
            n: self.n,
            data: x0inv.data.iter().map(|z| Gn::scalar(self.n, *z)).collect(),
        };
        let soul = self.map_entries(|e| e.soul());
        let m = lifted.try_mul(&soul)?.scale_c(C::new(-T::one(), T::zero()));
        let mut term = Self::identity(self.cols, self.n);
        term.rows = self.cols;
        term.cols = self.cols;
        let mut sum = term.clone();
        for _ in 0..self.n {
            term = term.try_mul(&m)?;
            if term.data.iter().all(|e| e.is_zero()) {
                break;
            }
            sum = sum.try_add(&term)?;
        }
        sum.try_mul(&lifted)
    }

    /// Determinant of a square matrix whose entries are all even (and hence
    /// commute), by elimination with pivots chosen on body size.
    pub fn det_even(&self) -> Result<Gn<T>> {
        let k = self.nrows();
        if k != self.ncols() {
            return Err(Error::Format("determinant of a non-square matrix".into()));
        }
        if let Some(e) = self.data.iter().find(|e| !e.is_zero() && !e.is_even()) {
            return Err(Error::Parity(format!(
                "determinant needs even entries, got {e:?}"
            )));
        }
        let mut det = Gn::one(self.n);
        if k == 0 {
            return Ok(det);
        }
        let scale = self.body().max_abs();
        let mut a: Vec<Gn<T>> = self.data.clone();
        let mut negate = false;
        for col in 0..k {
            let (piv, best) = (col..k)
                .map(|i| (i, a[i * k + col].body().norm()))
                .fold((col, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= T::lit(SINGULAR_RTOL) * scale || best == T::zero() {
                if k <= COFACTOR_MAX {
                    return Ok(cofactor_det(&self.data, k, self.n));
                }
                return Err(Error::Singular(format!("determinant pivot {col}")));
            }
            if piv != col {
                for j in 0..k {
                    a.swap(col * k + j, piv * k + j);
                }
                negate = !negate;
            }
            let p = a[col * k + col].clone();
            let pinv = p.inv()?;
            det = det.try_mul(&p)?;
            for i in col + 1..k {
                let f = a[i * k + col].try_mul(&pinv)?;
                if f.is_zero() {
                    continue;
                }
                for j in col + 1..k {
                    let upd = f.try_mul(&a[col * k + j])?;
                    a[i * k + j] -= &upd;
                }
            }
        }
        Ok(if negate { -det } else { det })
    }

    /// Berezinian `det(A − B D⁻¹ C) · det(D)⁻¹`; requires an invertible `D`.
    pub fn ber(&self) -> Result<Gn<T>> {
        self.require_square()?;
        let (p, q) = (self.rows.even, self.rows.odd);
        if q == 0 {
            return self.det_even();
        }
        let d = self.d_block();
        let d_det = d.det_even()?;
        let d_det_inv = d_det.inv()?;
        if p == 0 {
            return Ok(d_det_inv);
        }
        let dinv = d.inverse()?;
        let s = self
            .a_block()
            .try_sub(&self.b_block().try_mul(&dinv)?.try_mul(&self.c_block())?)?;
        s.det_even()?.try_mul(&d_det_inv)
    }

    /// Berezinian through the `A` block: `det(A) · det(D − C A⁻¹ B)⁻¹`.
    pub fn ber_via_a_block(&self) -> Result<Gn<T>> {
        self.require_square()?;
        let (p, q) = (self.rows.even, self.rows.odd);
        if q == 0 {
            return self.det_even();
        }
        if p == 0 {
            return self.d_block().det_even()?.inv();
        }
        let a = self.a_block();
        let ainv = a.inverse()?;
        let s = self
            .d_block()
            .try_sub(&self.c_block().try_mul(&ainv)?.try_mul(&self.b_block())?)?;
        a.det_even()?.try_mul(&s.det_even()?.inv()?)
    }

    /// Principal minor `[Z]_k` on the first `k` rows and columns.
    pub fn principal_minor(&self, k: usize) -> Result<Self> {
        self.require_square()?;
        if k == 0 || k > self.nrows() {
            return Err(Error::Domain(format!(
                "principal minor of size {k} in a {}x{} supermatrix",
                self.nrows(),
                self.nrows()
            )));
        }
        Ok(self.block(0, k, 0, k))
    }

    /// Whether every principal minor has an invertible body.
    pub fn in_big_cell(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let b = self.body();
        let n = b.rows;
        let scale = b.max_abs();
        let mut a = b;
        for k in 0..n {
            let piv = a.at(k, k);
            if piv.norm() <= T::lit(SINGULAR_RTOL) * scale || piv.norm() == T::zero() {
                return false;
            }
            for i in k + 1..n {
                let f = a.at(i, k) / piv;
                for j in k + 1..n {
                    let v = a.at(i, j) - f * a.at(k, j);
                    a.set(i, j, v);
                }
            }
        }
        true
    }

    /// Gauss decomposition `Z = L · diag(d) · U` with `L` lower and `U` upper
    /// unitriangular; defined exactly on the big cell.
    pub fn ldu(&self) -> Result<(Self, Vec<Gn<T>>, Self)> {
        self.require_square()?;
        if !self.in_big_cell() {
            return Err(Error::Singular("supermatrix is not in the big cell".into()));
        }
        let n = self.nrows();
        let mut s = self.data.clone();
        let mut l = Self::identity(self.rows, self.n);
        let mut u = Self::identity(self.rows, self.n);
        let mut d = Vec::with_capacity(n);
        for j in 0..n {
            let piv = s[j * n + j].clone();
            let pinv = piv.inv()?;
            d.push(piv);
            for i in j + 1..n {
                l.set(i, j, s[i * n + j].try_mul(&pinv)?);
            }
            for k in j + 1..n {
                u.set(j, k, pinv.try_mul(&s[j * n + k])?);
            }
            for i in j + 1..n {
                let left = s[i * n + j].try_mul(&pinv)?;
                if left.is_zero() {
                    continue;
                }
                for k in j + 1..n {
                    let upd = left.try_mul(&s[j * n + k])?;
                    s[i * n + k] -= &upd;
                }
            }
        }
        Ok((l, d, u))
    }

    /// Principal minor function `Δ_k(Z) = Ber([Z]_k)`.
    pub fn delta_k(&self, k: usize) -> Result<Gn<T>> {
        self.principal_minor(k)?.ber()
    }

    /// Conical superfunction `Δ_m(Z) = Δ_1^{m_1−m_2} ⋯ Δ_{p+q}^{m_{p+q}}`.
    ///
    /// Minors with a vanishing exponent are skipped and never evaluated.
    pub fn delta_m(&self, m: &MultiIndex) -> Result<Gn<T>> {
        self.require_square()?;
        if m.p != self.rows.even || m.q != self.rows.odd {
            return Err(Error::Format(
                "multi-index format differs from the matrix".into(),
            ));
        }
        let mut out = Gn::one(self.n);
        for k in 0..m.p + m.q {
            let e = m.minor_exponent(k);
            if e == 0.0 {
                continue;
            }
            let dk = self.delta_k(k + 1)?;
            out = out.try_mul(&dk.powf(T::lit(e))?)?;
        }
        Ok(out)
    }

    /// `ϱ(Z) = det(z − ζ w⁻¹ ω)^q · det(w − ω z⁻¹ ζ)^p`.
    pub fn vrho(&self) -> Result<Gn<T>> {
        self.require_square()?;
        let (p, q) = (self.rows.even, self.rows.odd);
        let (z, zeta, omega, w) = (
            self.a_block(),
            self.b_block(),
            self.c_block(),
            self.d_block(),
        );
        let left = if p == 0 {
            Gn::one(self.n)
        } else if q == 0 {
            z.det_even()?.powi(q as i64)?
        } else {
            let s = z.try_sub(&zeta.try_mul(&w.inverse()?)?.try_mul(&omega)?)?;
            s.det_even()?.powi(q as i64)?
        };
        let right = if q == 0 {
            Gn::one(self.n)
        } else if p == 0 {
            w.det_even()?.powi(p as i64)?
        } else {
            let s = w.try_sub(&omega.try_mul(&z.inverse()?)?.try_mul(&zeta)?)?;
            s.det_even()?.powi(p as i64)?
        };
        left.try_mul(&right)
    }

    /// `Ber(Z)^{q−p} det(z)^p det(w)^q`, the second expression for `ϱ`.
    pub fn vrho_via_ber(&self) -> Result<Gn<T>> {
        self.require_square()?;
        let (p, q) = (self.rows.even, self.rows.odd);
        let b = self.ber()?.powi(q as i64 - p as i64)?;
        let z = self.a_block().det_even()?.powi(p as i64)?;
        let w = self.d_block().det_even()?.powi(q as i64)?;
        b.try_mul(&z)?.try_mul(&w)
    }
}

/// Largest size for which a body-singular determinant is expanded by
/// cofactors instead of being rejected.
const COFACTOR_MAX: usize = 6;

/// Cofactor expansion along the first row; entries must commute.
fn cofactor_det<T: Real>(a: &[Gn<T>], k: usize, n: usize) -> Gn<T> {
    if k == 1 {
        return a[0].clone();
    }
    let mut det = Gn::zero(n);
    for j in 0..k {
        if a[j].is_zero() {
            continue;
        }
        let minor: Vec<Gn<T>> = (1..k)
            .flat_map(|r| (0..k).filter(move |c| *c != j).map(move |c| (r, c)))
            .map(|(r, c)| a[r * k + c].clone())
            .collect();
        let term = a[j]
            .try_mul(&cofactor_det(&minor, k - 1, n))
            .expect("same algebra");
        if j % 2 == 0 {
            det += &term;
        } else {
            det -= &term;
        }
    }
    det
}

/// `χ_m` on diagonal data `(a, d)`:
/// `∏_{j≤p} (a_j⁻¹d_j)^{m_j} / ∏_{j≤q} (a_{p+j}⁻¹d_{p+j})^{m_{p+j}}`.
pub fn chi_m<T: Real>(a: &[Gn<T>], d: &[Gn<T>], m: &MultiIndex) -> Result<Gn<T>> {
    let dim = m.p + m.q;
    if a.len() != dim || d.len() != dim {
        return Err(Error::Format("torus diagonal length".into()));
    }
    let n = a.first().map(|g| g.n_generators()).unwrap_or(0);
    let mut out = Gn::one(n);
    for j in 0..dim {
        let r = a[j].inv()?.try_mul(&d[j])?;
        let e = if j < m.p { m.values[j] } else { -m.values[j] };
        out = out.try_mul(&r.powf(T::lit(e))?)?;
    }
    Ok(out)
}

/// `χ_k` on diagonal data: the character of `Δ_k`.
pub fn chi_k<T: Real>(a: &[Gn<T>], d: &[Gn<T>], p: usize, k: usize) -> Result<Gn<T>> {
    let n = a.first().map(|g| g.n_generators()).unwrap_or(0);
    let mut out = Gn::one(n);
    for j in 0..k.min(a.len()) {
        let r = a[j].inv()?.try_mul(&d[j])?;
        out = if j < p {
            out.try_mul(&r)?
        } else {
            out.try_mul(&r.inv()?)?
        };
    }
    Ok(out)
}

/// Element of `GL(p|q) × GL(p|q)` acting by `A Z D⁻¹`, or a full block matrix
/// `(A, B; C, D)` acting by fractional linear transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement<T: Real> {
    pub a: SuperMatrix<T>,
    pub b: Option<SuperMatrix<T>>,
    pub c: Option<SuperMatrix<T>>,
    pub d: SuperMatrix<T>,
}

impl<T: Real> GroupElement<T> {
    pub fn block_diagonal(a: SuperMatrix<T>, d: SuperMatrix<T>) -> Result<Self> {
        if a.rows != a.cols || d.rows != d.cols || a.rows != d.rows {
            return Err(Error::Format(
                "group element blocks must share one square format".into(),
            ));
        }
        Ok(Self {
            a,
            b: None,
            c: None,
            d,
        })
    }

    pub fn full(
        a: SuperMatrix<T>,
        b: SuperMatrix<T>,
        c: SuperMatrix<T>,
        d: SuperMatrix<T>,
    ) -> Result<Self> {
        let f = a.rows;
        for m in [&a, &b, &c, &d] {
            if m.rows != f || m.cols != f {
                return Err(Error::Format(
                    "group element blocks must share one square format".into(),
                ));
            }
        }
        Ok(Self {
            a,
            b: Some(b),
            c: Some(c),
            d,
        })
    }

    /// Torus element `t = (diag(a), diag(d))`.
    pub fn torus(fmt: Format, a: Vec<Gn<T>>, d: Vec<Gn<T>>) -> Result<Self> {
        Self::block_diagonal(
            SuperMatrix::diagonal(fmt, a)?,
            SuperMatrix::diagonal(fmt, d)?,
        )
    }

    pub fn format(&self) -> Format {
        self.a.rows
    }

    /// `g.Z = (AZ + B)(CZ + D)⁻¹`, which is `A Z D⁻¹` for block-diagonal `g`.
    pub fn act(&self, z: &SuperMatrix<T>) -> Result<SuperMatrix<T>> {
        let az = self.a.try_mul(z)?;
        let num = match &self.b {
            Some(b) => az.try_add(b)?,
            None => az,
        };
        let den = match &self.c {
            Some(c) => c.try_mul(z)?.try_add(&self.d)?,
            None => self.d.clone(),
        };
        num.try_mul(&den.inverse()?)
    }

    /// Group product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        match (&self.b, &self.c, &other.b, &other.c) {
            (None, None, None, None) => {
                Self::block_diagonal(self.a.try_mul(&other.a)?, self.d.try_mul(&other.d)?)
            }
            _ => {
                let f = self.format();
                let zero = SuperMatrix::zeros(f, f, self.a.n);
                let (b1, c1) = (
                    self.b.clone().unwrap_or(zero.clone()),
                    self.c.clone().unwrap_or(zero.clone()),
                );
                let (b2, c2) = (
                    other.b.clone().unwrap_or(zero.clone()),
                    other.c.clone().unwrap_or(zero),
                );
                let a = self.a.try_mul(&other.a)?.try_add(&b1.try_mul(&c2)?)?;
                let b = self.a.try_mul(&b2)?.try_add(&b1.try_mul(&other.d)?)?;
                let c = c1.try_mul(&other.a)?.try_add(&self.d.try_mul(&c2)?)?;
                let d = c1.try_mul(&b2)?.try_add(&self.d.try_mul(&other.d)?)?;
                Self::full(a, b, c, d)
            }
        }
    }

    /// Inverse of a block-diagonal element.
    pub fn inverse(&self) -> Result<Self> {
        if self.b.is_some() || self.c.is_some() {
            return Err(Error::Domain(
                "inverse implemented for block-diagonal elements".into(),
            ));
        }
        Self::block_diagonal(self.a.inverse()?, self.d.inverse()?)
    }

    /// Whether `A` is lower and `D` upper triangular (the Borel shape).
    pub fn is_borel(&self) -> bool {
        if self.b.is_some() || self.c.is_some() {
            return false;
        }
        let k = self.a.nrows();
        (0..k).all(|i| {
            (0..k).all(|j| {
                (j <= i || self.a.get(i, j).is_zero()) && (j >= i || self.d.get(i, j).is_zero())
            })
        })
    }

    /// `χ_m(b)` for a Borel element, read off the diagonals.
    pub fn chi_m(&self, m: &MultiIndex) -> Result<Gn<T>> {
        if !self.is_borel() {
            return Err(Error::Domain("χ_m is defined on the Borel subgroup".into()));
        }
        let k = self.a.nrows();
        let a: Vec<_> = (0..k).map(|i| self.a.get(i, i).clone()).collect();
        let d: Vec<_> = (0..k).map(|i| self.d.get(i, i).clone()).collect();
        chi_m(&a, &d, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    type G = GrassmannNumber<f64>;

    fn th(n: usize, i: usize) -> G {
        G::generator(n, i).unwrap()
    }

    fn m11(e: [G; 4]) -> SuperMatrix<f64> {
        SuperMatrix::new(Format::new(1, 1), Format::new(1, 1), e.to_vec()).unwrap()
    }

    #[test]
    fn berezinian_of_odd_coupled_identity() {
        let x = m11([G::one(2), th(2, 0), th(2, 1), G::one(2)]);
        let want = G::one(2) - &th(2, 0) * &th(2, 1);
        assert!(x.ber().unwrap().max_abs_diff(&want).unwrap() < 1e-15);
        assert!(x.ber_via_a_block().unwrap().max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn berezinian_of_scalar_diagonal() {
        let x = m11([G::real(0, 6.0), G::zero(0), G::zero(0), G::real(0, 3.0)]);
        assert!((x.ber().unwrap().body() - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn inverse_solves_xy_equals_one() {
        // Oracle from solving X Y = 1 by hand: Y = [[1 + θ1θ2, −θ1], [−θ2, 1 − θ1θ2]].
        let x = m11([G::one(2), th(2, 0), th(2, 1), G::one(2)]);
        let t12 = &th(2, 0) * &th(2, 1);
        let want = m11([
            G::one(2) + t12.clone(),
            -th(2, 0),
            -th(2, 1),
            G::one(2) - t12,
        ]);
        let inv = x.inverse().unwrap();
        for (a, b) in inv.entries().iter().zip(want.entries()) {
            assert!(a.max_abs_diff(b).unwrap() < 1e-15);
        }
    }

    #[test]
    fn parity_is_checked() {
        let bad = SuperMatrix::new(
            Format::new(1, 1),
            Format::new(1, 1),
            vec![th(1, 0), G::zero(1), G::zero(1), G::one(1)],
        );
        assert!(matches!(bad, Err(Error::Parity(_))));
    }

    #[test]
    fn conical_function_on_diagonal() {
        let z = m11([G::real(0, 3.0), G::zero(0), G::zero(0), G::real(0, 2.0)]);
        let m = MultiIndex::new(1, 1, vec![2.0, 1.0]).unwrap();
        assert!((z.delta_m(&m).unwrap().body() - c(4.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn chi_on_torus() {
        let g = |x: f64| G::real(0, x);
        let m = MultiIndex::new(1, 1, vec![1.0, 1.0]).unwrap();
        let v = chi_m(&[g(2.0), g(1.0)], &[g(4.0), g(3.0)], &m).unwrap();
        assert!((v.body() - c(2.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ldu_small_examples() {
        let f = Format::new(2, 0);
        let z = SuperMatrix::new(
            f,
            f,
            vec![
                G::real(0, 2.0),
                G::real(0, 1.0),
                G::real(0, 1.0),
                G::real(0, 1.0),
            ],
        )
        .unwrap();
        let (l, d, u) = z.ldu().unwrap();
        assert!((l.get(1, 0).body() - c(0.5, 0.0)).norm() < 1e-15);
        assert!((d[0].body() - c(2.0, 0.0)).norm() < 1e-15);
        assert!((d[1].body() - c(0.5, 0.0)).norm() < 1e-15);
        assert!((u.get(0, 1).body() - c(0.5, 0.0)).norm() < 1e-15);
        let swap =
            SuperMatrix::new(f, f, vec![G::zero(0), G::one(0), G::one(0), G::zero(0)]).unwrap();
        assert!(!swap.in_big_cell());
        assert!(swap.ldu().is_err());
    }

    #[test]
    fn vrho_collapses_at_one_one() {
        let n = 2;
        let z = G::real(n, 1.7);
        let w = G::scalar(n, c(0.6, 0.8));
        let y = m11([z.clone(), th(n, 0), th(n, 1), w.clone()]);
        let want = &z * &w;
        assert!(y.vrho().unwrap().max_abs_diff(&want).unwrap() < 1e-15);
        assert!(y.vrho_via_ber().unwrap().max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn fermionic_multi_index_must_be_integral() {
        assert!(MultiIndex::new(1, 1, vec![0.5, 1.5]).is_err());
        assert!(MultiIndex::new(1, 1, vec![0.5, 2.0]).is_ok());
    }
}
