//! Finite Grassmann algebras with complex coefficients.
//!
//! An element of the algebra on `n` generators is stored as a dense table of
//! `2^n` coefficients indexed by a bitmask: bit `i` set means generator `θ_{i+1}`
//! appears. Monomials are always kept in ascending generator order.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};
use crate::scalar::{c, cone, czero, is_zero, Real, C};

/// Largest generator count handled by the dense table.
pub const MAX_GENERATORS: usize = 20;

/// Parity of a homogeneous element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Sign `(-1)^k` of moving monomial `b` past monomial `a` to restore ascending order
/// in the product `θ_a θ_b`.
#[inline]
pub fn reorder_sign(a: usize, b: usize) -> bool {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    swaps & 1 == 1
}

/// Human-readable label of a monomial, e.g. `θ1θ3`; the empty monomial is `1`.
pub fn subset_label(mask: usize) -> String {
    if mask == 0 {
        return "1".to_string();
    }
    let mut s = String::new();
    let mut rest = mask;
    while rest != 0 {
        let j = rest.trailing_zeros();
        s.push_str(&format!("θ{}", j + 1));
        rest &= rest - 1;
    }
    s
}

/// Element of the Grassmann algebra on `n` generators.
#[derive(Clone, PartialEq)]
pub struct GrassmannNumber<T: Real> {
    n: usize,
    coeffs: Coeffs<T>,
}

/// Coefficient storage; algebras with at most four generators stay inline.
type Coeffs<T> = SmallVec<[C<T>; 16]>;

impl<T: Real> fmt::Debug for GrassmannNumber<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gn[{}](", self.n)?;
        let mut first = true;
        for (m, z) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:?}{:+?}i){}", z.re, z.im, subset_label(m))?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_GENERATORS {
        Err(Error::TooManyGenerators {
            n,
            max: MAX_GENERATORS,
        })
    } else {
        Ok(())
    }
}

impl<T: Real> GrassmannNumber<T> {
    /// The zero element.
    ///
    /// # Panics
    /// If `n` exceeds [`MAX_GENERATORS`].
    pub fn zero(n: usize) -> Self {
        check_n(n).expect("generator count");
        Self {
            n,
            coeffs: smallvec![czero(); 1 << n],
        }
    }

    pub fn scalar(n: usize, value: C<T>) -> Self {
        let mut g = Self::zero(n);
        g.coeffs[0] = value;
        g
    }

    pub fn real(n: usize, value: f64) -> Self {
        Self::scalar(n, c(value, 0.0))
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, cone())
    }

    /// Generator `θ_{i+1}` (zero-based index `i`).
    pub fn generator(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::GeneratorOutOfRange { index: i, n });
        }
        Ok(Self::monomial(n, 1 << i, cone()))
    }

    /// `value · θ_mask`.
    pub fn monomial(n: usize, mask: usize, value: C<T>) -> Self {
        let mut g = Self::zero(n);
        g.coeffs[mask] = value;
        g
    }

    /// Builds from a full coefficient table of length `2^n`.
    pub fn from_coeffs(n: usize, coeffs: Vec<C<T>>) -> Result<Self> {
        check_n(n)?;
        if coeffs.len() != 1 << n {
            return Err(Error::Format(format!(
                "coefficient table of length {} for {} generators",
                coeffs.len(),
                n
            )));
        }
        Ok(Self {
            n,
            coeffs: Coeffs::from_vec(coeffs),
        })
    }

    pub fn n_generators(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[C<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> C<T> {
        self.coeffs[mask]
    }

    pub fn set_coeff(&mut self, mask: usize, value: C<T>) {
        self.coeffs[mask] = value;
    }

    pub fn body(&self) -> C<T> {
        self.coeffs[0]
    }

    /// The nilpotent part `a - body(a)`.
    pub fn soul(&self) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = czero();
        s
    }

    /// Non-zero terms in ascending bitmask order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, C<T>)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, z)| !is_zero(**z))
            .map(|(m, z)| (m, *z))
    }

    /// Coefficient of the monomial on `subset` (zero-based indices, any order).
    ///
    /// The coefficient refers to the ascending-ordered monomial; repeated
    /// indices are rejected.
    pub fn extract(&self, subset: &[usize]) -> Result<C<T>> {
        let mut mask = 0usize;
        for &i in subset {
            if i >= self.n {
                return Err(Error::GeneratorOutOfRange {
                    index: i,
                    n: self.n,
                });
            }
            if mask & (1 << i) != 0 {
                return Err(Error::Domain(format!("generator {i} repeated in subset")));
            }
            mask |= 1 << i;
        }
        Ok(self.coeffs[mask])
    }

    /// Parity if homogeneous; `None` for mixed elements. Zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut even = false;
        let mut odd = false;
        for (m, _) in self.terms() {
            if m.count_ones() % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        match (even, odd) {
            (_, false) => Some(Parity::Even),
            (false, true) => Some(Parity::Odd),
            (true, true) => None,
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Some(Parity::Even)
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == Some(Parity::Odd) && !self.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|z| is_zero(*z))
    }

    /// Part of the given parity.
    pub fn parity_part(&self, p: Parity) -> Self {
        let want = matches!(p, Parity::Odd) as u32;
        let mut g = self.clone();
        for (m, z) in g.coeffs.iter_mut().enumerate() {
            if m.count_ones() % 2 != want {
                *z = czero();
            }
        }
        g
    }

    fn same_algebra(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            Err(Error::AlgebraMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_algebra(other)?;
        let mut g = self.clone();
        for (a, b) in g.coeffs.iter_mut().zip(&other.coeffs) {
            *a += *b;
        }
        Ok(g)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_algebra(other)?;
        let mut g = self.clone();
        for (a, b) in g.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= *b;
        }
        Ok(g)
    }

    /// Product in the algebra; fails on mismatched algebras.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero(self.n);
        out.add_product(self, other)?;
        Ok(out)
    }

    /// `self += a · b` without a temporary.
    pub fn add_product(&mut self, a: &Self, b: &Self) -> Result<()> {
        self.same_algebra(a)?;
        self.same_algebra(b)?;
        let full = self.coeffs.len() - 1;
        for (ma, za) in a.coeffs.iter().enumerate() {
            if is_zero(*za) {
                continue;
            }
            // Submasks of the complement of `ma`, down to the empty one.
            let comp = full & !ma;
            let mut mb = comp;
            loop {
                let zb = b.coeffs[mb];
                if !is_zero(zb) {
                    let prod = *za * zb;
                    if reorder_sign(ma, mb) {
                        self.coeffs[ma | mb] -= prod;
                    } else {
                        self.coeffs[ma | mb] += prod;
                    }
                }
                if mb == 0 {
                    break;
                }
                mb = (mb - 1) & comp;
            }
        }
        Ok(())
    }

    pub fn scale(&self, k: C<T>) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|z| *z * k).collect(),
        }
    }

    pub fn scale_real(&self, k: T) -> Self {
        self.scale(C::new(k, T::zero()))
    }

    /// Left derivative `∂/∂θ_{i+1}`: removes the generator with sign
    /// `(-1)^(number of lower generators present)`.
    pub fn derivative(&self, i: usize) -> Result<Self> {
        if i >= self.n {
            return Err(Error::GeneratorOutOfRange {
                index: i,
                n: self.n,
            });
        }
        let bit = 1usize << i;
        let mut out: Coeffs<T> = smallvec![czero(); self.coeffs.len()];
        for (m, z) in self.terms() {
            if m & bit == 0 {
                continue;
            }
            if (m & (bit - 1)).count_ones() % 2 == 1 {
                out[m ^ bit] = -z;
            } else {
                out[m ^ bit] = z;
            }
        }
        Ok(Self {
            n: self.n,
            coeffs: out,
        })
    }

    /// Berezin integral over the ordered generator list `(ν¹, …, ν^k)`:
    /// `∂/∂ν^k ⋯ ∂/∂ν¹ f`, so the first listed derivative is applied first.
    pub fn berezin(&self, order: &[usize]) -> Result<Self> {
        let mut seen = 0usize;
        let mut g = self.clone();
        for &i in order {
            if i >= self.n {
                return Err(Error::GeneratorOutOfRange {
                    index: i,
                    n: self.n,
                });
            }
            if seen & (1 << i) != 0 {
                return Err(Error::Domain(format!(
                    "generator {i} repeated in Berezin order"
                )));
            }
            seen |= 1 << i;
            g = g.derivative(i)?;
        }
        Ok(g)
    }

    /// Re-embeds into an algebra with `n_new ≥ n` generators; existing
    /// generators keep their indices.
    pub fn embed(&self, n_new: usize) -> Result<Self> {
        check_n(n_new)?;
        if n_new < self.n {
            return Err(Error::Domain(format!(
                "cannot embed {} generators into {}",
                self.n, n_new
            )));
        }
        let mut coeffs: Coeffs<T> = smallvec![czero(); 1 << n_new];
        coeffs[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        Ok(Self { n: n_new, coeffs })
    }

    /// Restricts to the first `n_new` generators; every term involving a
    /// dropped generator must vanish.
    pub fn restrict(&self, n_new: usize) -> Result<Self> {
        if n_new > self.n {
            return self.embed(n_new);
        }
        let keep = 1usize << n_new;
        if self.coeffs[keep..].iter().any(|z| !is_zero(*z)) {
            return Err(Error::Domain(format!(
                "element still depends on generators beyond index {n_new}"
            )));
        }
        Ok(Self {
            n: n_new,
            coeffs: Coeffs::from_slice(&self.coeffs[..keep]),
        })
    }

    /// `Σ_k taylor[k] · soul^k`, i.e. `f(body + soul)` given the normalised
    /// Taylor coefficients `taylor[k] = f^(k)(body)/k!`.
    pub fn apply_taylor(&self, taylor: &[C<T>]) -> Self {
        let soul = self.soul();
        let mut out = Self::scalar(self.n, taylor.first().copied().unwrap_or_else(czero));
        let mut power = Self::one(self.n);
        for t in taylor.iter().skip(1) {
            power = power.try_mul(&soul).expect("same algebra");
            if power.is_zero() {
                break;
            }
            out += &power.scale(*t);
        }
        out
    }

    /// Analytic extension of a function given its derivatives at the body:
    /// `deriv(body, k) = f^(k)(body)`. Terms beyond `soul^n` vanish.
    pub fn apply_analytic<F>(&self, deriv: F) -> Self
    where
        F: Fn(C<T>, usize) -> C<T>,
    {
        let b = self.body();
        let mut fact = T::one();
        let mut taylor = Vec::with_capacity(self.n + 1);
        for k in 0..=self.n {
            if k > 0 {
                fact *= T::from_usize(k).unwrap();
            }
            taylor.push(deriv(b, k) / fact);
        }
        self.apply_taylor(&taylor)
    }

    pub fn exp(&self) -> Self {
        let e = self.body().exp();
        let mut taylor = Vec::with_capacity(self.n + 1);
        let mut fact = T::one();
        for k in 0..=self.n {
            if k > 0 {
                fact *= T::from_usize(k).unwrap();
            }
            taylor.push(e / fact);
        }
        self.apply_taylor(&taylor)
    }

    fn nonzero_body(&self, what: &str) -> Result<C<T>> {
        let b = self.body();
        if is_zero(b) {
            Err(Error::Branch(format!(
                "{what} of an element with zero body"
            )))
        } else {
            Ok(b)
        }
    }

    /// Multiplicative inverse; requires a non-zero body.
    pub fn inv(&self) -> Result<Self> {
        let b = self.nonzero_body("inverse")?;
        let r = cone::<T>() / b;
        let mut taylor = Vec::with_capacity(self.n + 1);
        let mut t = r;
        for _ in 0..=self.n {
            taylor.push(t);
            t = -t * r;
        }
        Ok(self.apply_taylor(&taylor))
    }

    /// Principal logarithm; requires a body off the closed negative real axis.
    pub fn ln(&self) -> Result<Self> {
        let b = self.nonzero_body("logarithm")?;
        check_cut(b)?;
        let r = cone::<T>() / b;
        let mut taylor = vec![b.ln()];
        let mut t = r;
        for k in 1..=self.n {
            taylor.push(t / T::from_usize(k).unwrap());
            t = -t * r;
        }
        Ok(self.apply_taylor(&taylor))
    }

    /// Integer power; negative exponents require a non-zero body.
    pub fn powi(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.inv()?.powi(-k);
        }
        let mut result = Self::one(self.n);
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.try_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.try_mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Real power on the principal branch. Integral exponents are delegated to
    /// [`powi`](Self::powi) and accept any non-zero body.
    pub fn powf(&self, alpha: T) -> Result<Self> {
        let rounded = alpha.round();
        if (alpha - rounded).abs() <= T::lit(1e-12) {
            return self.powi(rounded.to_i64().expect("integer exponent"));
        }
        let b = self.nonzero_body("real power")?;
        check_cut(b)?;
        let a = C::new(alpha, T::zero());
        let r = cone::<T>() / b;
        let mut t = (b.ln() * a).exp();
        let mut taylor = Vec::with_capacity(self.n + 1);
        for k in 0..=self.n {
            taylor.push(t);
            let kk = T::from_usize(k).unwrap();
            t = t * (a - kk) / (kk + T::one()) * r;
        }
        Ok(self.apply_taylor(&taylor))
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.powf(T::lit(0.5))
    }

    /// Largest coefficient modulus.
    pub fn norm_inf(&self) -> T {
        self.coeffs
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Largest coefficient-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        Ok(self.try_sub(other)?.norm_inf())
    }
}

fn check_cut<T: Real>(b: C<T>) -> Result<()> {
    if b.im == T::zero() && b.re <= T::zero() {
        Err(Error::Branch(format!(
            "body {:?} lies on the principal branch cut",
            b.re
        )))
    } else {
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl<'a, T: Real> $tr<&'a GrassmannNumber<T>> for &'a GrassmannNumber<T> {
            type Output = GrassmannNumber<T>;
            /// # Panics
            /// On mismatched algebras; use the `try_` form to recover.
            fn $m(self, rhs: &'a GrassmannNumber<T>) -> GrassmannNumber<T> {
                self.$f(rhs).expect("Grassmann algebras must agree")
            }
        }
        impl<T: Real> $tr<GrassmannNumber<T>> for GrassmannNumber<T> {
            type Output = GrassmannNumber<T>;
            fn $m(self, rhs: GrassmannNumber<T>) -> GrassmannNumber<T> {
                self.$f(&rhs).expect("Grassmann algebras must agree")
            }
        }
        impl<'a, T: Real> $tr<&'a GrassmannNumber<T>> for GrassmannNumber<T> {
            type Output = GrassmannNumber<T>;
            fn $m(self, rhs: &'a GrassmannNumber<T>) -> GrassmannNumber<T> {
                self.$f(rhs).expect("Grassmann algebras must agree")
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl<'a, T: Real> AddAssign<&'a GrassmannNumber<T>> for GrassmannNumber<T> {
    fn add_assign(&mut self, rhs: &'a GrassmannNumber<T>) {
        assert_eq!(self.n, rhs.n, "Grassmann algebras must agree");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += *b;
        }
    }
}

impl<'a, T: Real> SubAssign<&'a GrassmannNumber<T>> for GrassmannNumber<T> {
    fn sub_assign(&mut self, rhs: &'a GrassmannNumber<T>) {
        assert_eq!(self.n, rhs.n, "Grassmann algebras must agree");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= *b;
        }
    }
}

impl<T: Real> Neg for GrassmannNumber<T> {
    type Output = GrassmannNumber<T>;
    fn neg(mut self) -> GrassmannNumber<T> {
        for z in &mut self.coeffs {
            *z = -*z;
        }
        self
    }
}

impl<T: Real> Neg for &GrassmannNumber<T> {
    type Output = GrassmannNumber<T>;
    fn neg(self) -> GrassmannNumber<T> {
        -self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type G = GrassmannNumber<f64>;

    fn th(n: usize, i: usize) -> G {
        G::generator(n, i).unwrap()
    }

    #[test]
    fn generators_anticommute_and_square_to_zero() {
        let a = th(3, 0);
        let b = th(3, 2);
        assert_eq!(&a * &b, -(&b * &a));
        assert!((&a * &a).is_zero());
        assert_eq!((&b * &a).coeff(0b101).re, -1.0);
    }

    #[test]
    fn derivative_signs() {
        let f = &th(2, 0) * &th(2, 1);
        assert_eq!(f.derivative(0).unwrap(), th(2, 1));
        assert_eq!(f.derivative(1).unwrap(), -th(2, 0));
    }

    #[test]
    fn berezin_order() {
        let f = &th(2, 0) * &th(2, 1);
        assert_eq!(f.berezin(&[0, 1]).unwrap().body().re, 1.0);
        assert_eq!(f.berezin(&[1, 0]).unwrap().body().re, -1.0);
    }

    #[test]
    fn square_root_of_shifted_four() {
        let t12 = &th(2, 0) * &th(2, 1);
        let x = G::real(2, 4.0) + t12.scale_real(4.0);
        let r = x.sqrt().unwrap();
        let want = G::real(2, 2.0) + t12.clone();
        assert!(r.max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn conjugate_pair_multiplies_to_one() {
        let t12 = &th(2, 0) * &th(2, 1);
        let a = G::one(2) + t12.clone();
        let b = G::one(2) - t12;
        assert!((&a * &b).max_abs_diff(&G::one(2)).unwrap() < 1e-15);
    }

    #[test]
    fn mismatch_is_an_error() {
        assert_eq!(
            th(2, 0).try_mul(&th(3, 0)).unwrap_err(),
            Error::AlgebraMismatch(2, 3)
        );
    }

    #[test]
    fn zero_body_rejected() {
        assert!(th(2, 0).inv().is_err());
        assert!(th(2, 0).ln().is_err());
        assert!(G::real(2, -1.0).sqrt().is_err());
        assert!(G::real(2, -1.0).powi(-3).is_ok());
    }

    #[test]
    fn log_inverts_exp() {
        let mut x = G::real(4, 0.3);
        x.set_coeff(0b0011, c(0.7, -0.2));
        x.set_coeff(0b1100, c(-1.1, 0.4));
        x.set_coeff(0b1111, c(0.5, 0.5));
        let back = x.exp().ln().unwrap();
        assert!(back.max_abs_diff(&x).unwrap() < 1e-14);
    }

    #[test]
    fn extract_and_labels() {
        let f = (&th(3, 0) * &th(3, 2)).scale_real(5.0);
        assert_eq!(f.extract(&[2, 0]).unwrap().re, 5.0);
        assert_eq!(subset_label(0b101), "θ1θ3");
        assert_eq!(subset_label(0), "1");
    }
}
