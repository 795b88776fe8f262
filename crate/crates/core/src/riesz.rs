//! Integration over `Ω` with the invariant Berezinian density, the Riesz
//! functional `T_n`, the gamma function of `Ω`, Laplace transforms of
//! conical superfunctions, invariance and nilpotent-shift checks.
//!
//! Generators are laid out as `[external | ζ | ω]`: `ζ_ij` (p×q, row-major)
//! follows the external parameters and `ω_ji` (q×p, row-major) follows `ζ`.
//! The fermionic density is normalised by `∫ D(ζ,ω) ∏ ω_ji ζ_ij = 1`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::quadrature::{
    cone_integrate, product_integrate, unitary_integrate, ConeWeight, Estimate, QuadSpec, Rule,
};
use crate::report::{Comparison, Tolerance};
use crate::special::{gamma_residue, ln_gamma_signed, pole_index};
use crate::superexpr::{assemble_y, Bindings, SuperExpr};
use crate::supermatrix::{Format, GroupElement, MultiIndex, SuperMatrix};
use crate::{Complex64, Grassmann, SMatrix};

/// Quadrature configuration for the two bosonic sectors of `Ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaSpec {
    pub cone: QuadSpec,
    pub unitary: QuadSpec,
    /// Laguerre exponents `α_j` overriding the per-operation default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
}

impl Default for OmegaSpec {
    fn default() -> Self {
        Self {
            cone: QuadSpec::gauss(&[4, 4]),
            unitary: QuadSpec {
                rule: Rule::Auto,
                orders: vec![24],
                mc_samples: 200_000,
                seed: 0x5eed,
            },
            alpha: None,
        }
    }
}

impl OmegaSpec {
    pub fn with_mc(mut self, samples: u64, seed: u64) -> Self {
        self.unitary.mc_samples = samples;
        self.unitary.seed = seed;
        self
    }

    fn alpha_or(&self, default: Vec<f64>) -> Vec<f64> {
        self.alpha.clone().unwrap_or(default)
    }
}

/// Generator indices of `ζ`, `ω` and the Berezin order of `D(ζ,ω)`.
#[derive(Debug, Clone)]
pub struct FermionLayout {
    pub n_ext: usize,
    pub p: usize,
    pub q: usize,
}

impl FermionLayout {
    pub fn new(n_ext: usize, p: usize, q: usize) -> Self {
        Self { n_ext, p, q }
    }

    pub fn n_total(&self) -> usize {
        self.n_ext + 2 * self.p * self.q
    }

    pub fn zeta(&self, i: usize, j: usize) -> usize {
        self.n_ext + i * self.q + j
    }

    pub fn omega(&self, j: usize, i: usize) -> usize {
        self.n_ext + self.p * self.q + j * self.p + i
    }

    /// `ω_ji` then `ζ_ij` for every pair `(i, j)`.
    pub fn berezin_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.p * self.q);
        for i in 0..self.p {
            for j in 0..self.q {
                out.push(self.omega(j, i));
                out.push(self.zeta(i, j));
            }
        }
        out
    }

    pub fn generators(&self) -> Result<(Vec<Grassmann>, Vec<Grassmann>)> {
        let n = self.n_total();
        let mut zeta = Vec::with_capacity(self.p * self.q);
        for i in 0..self.p {
            for j in 0..self.q {
                zeta.push(Grassmann::generator(n, self.zeta(i, j))?);
            }
        }
        let mut omega = Vec::with_capacity(self.p * self.q);
        for j in 0..self.q {
            for i in 0..self.p {
                omega.push(Grassmann::generator(n, self.omega(j, i))?);
            }
        }
        Ok((zeta, omega))
    }

    /// `∫ D(ζ,ω) g`, as an element of the external algebra.
    pub fn integrate(&self, g: &Grassmann) -> Result<Grassmann> {
        g.berezin(&self.berezin_order())?.restrict(self.n_ext)
    }
}

/// `∫_Ω |Dy| f(y)` in the standard coordinates: the fermionic integral of
/// `ϱ(Y) f(Y)` is exact at every bosonic node `(z, w)`.
pub fn omega_integral<F>(
    p: usize,
    q: usize,
    n_ext: usize,
    cone: &ConeWeight,
    spec: &OmegaSpec,
    f: F,
) -> Result<Estimate>
where
    F: Fn(&SMatrix) -> Result<Grassmann> + Sync,
{
    let layout = FermionLayout::new(n_ext, p, q);
    let n = layout.n_total();
    let (zeta, omega) = layout.generators()?;
    product_integrate(p, q, cone, &spec.cone, &spec.unitary, |z, w| {
        let y = assemble_y(z, w, &zeta, &omega, n)?;
        let g = y.vrho()?.try_mul(&f(&y)?)?;
        layout.integrate(&g)
    })
}

/// Meromorphic value of a product of gamma factors, with poles and zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaValue {
    /// Finite value; `None` at a pole.
    pub value: Option<f64>,
    /// `ln|value|`; `None` at a pole or a zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ln_abs: Option<f64>,
    pub is_pole: bool,
    pub is_zero: bool,
}

impl GammaValue {
    pub(crate) fn finite(ln_abs: f64, sign: f64) -> Self {
        Self {
            value: Some(sign * ln_abs.exp()),
            ln_abs: Some(ln_abs),
            is_pole: false,
            is_zero: false,
        }
    }

    pub(crate) fn zero() -> Self {
        Self {
            value: Some(0.0),
            ln_abs: None,
            is_pole: false,
            is_zero: true,
        }
    }

    pub(crate) fn pole() -> Self {
        Self {
            value: None,
            ln_abs: None,
            is_pole: true,
            is_zero: false,
        }
    }
}

/// `∏ Γ(num_i + ε) / ∏ Γ(den_j + ε)` as `ε → 0`, times `e^{prefactor_ln}`.
/// Each pole contributes its residue and one order in `ε`.
fn gamma_ratio(num: &[f64], den: &[f64], prefactor_ln: f64) -> GammaValue {
    let mut order = 0i64;
    let mut ln = prefactor_ln;
    let mut sign = 1.0;
    for (x, power) in num
        .iter()
        .map(|x| (*x, 1.0))
        .chain(den.iter().map(|x| (*x, -1.0)))
    {
        let (l, s) = match pole_index(x) {
            Some(k) => {
                order += power as i64;
                let r = gamma_residue(k);
                (r.abs().ln(), r.signum())
            }
            None => ln_gamma_signed(x),
        };
        ln += power * l;
        sign *= s;
    }
    match order.cmp(&0) {
        std::cmp::Ordering::Greater => GammaValue::pole(),
        std::cmp::Ordering::Less => GammaValue::zero(),
        std::cmp::Ordering::Equal => GammaValue::finite(ln, sign),
    }
}

/// Closed form of the gamma function of `Ω`:
/// `(2π)^{p(p−1)/2} ∏_j Γ(m_j − j + 1) ∏_k Γ(q−k+1)/Γ(m_{p+k}+q−k+1) · Γ(m_{p+k}+k)/Γ(m_{p+k}−p+k)`,
/// continued meromorphically along `m + ε(1,…,1)`.
pub fn gamma_closed(m: &MultiIndex) -> GammaValue {
    let (p, q) = (m.p, m.q);
    let mut num = Vec::new();
    let mut den = Vec::new();
    let mut pre = (p * p.saturating_sub(1)) as f64 / 2.0 * (2.0 * PI).ln();
    for (j, mj) in m.boson().iter().enumerate() {
        num.push(mj - j as f64);
    }
    for (k0, mk) in m.fermion().iter().enumerate() {
        let k = (k0 + 1) as f64;
        let mk = *mk as f64;
        pre += ln_gamma_signed(q as f64 - k + 1.0).0;
        den.push(mk + q as f64 - k + 1.0);
        num.push(mk + k);
        den.push(mk - p as f64 + k);
    }
    gamma_ratio(&num, &den, pre)
}

/// Rising factorial `a(a+1)⋯(a+k−1)`.
pub fn pochhammer(a: f64, k: usize) -> f64 {
    (0..k).map(|i| a + i as f64).product()
}

/// `∏_k Γ(m_{p+k}+k)/Γ(m_{p+k}−p+k)`, as the polynomial it is.
pub fn fermionic_closed(p: usize, m_fermion: &[i64]) -> f64 {
    m_fermion
        .iter()
        .enumerate()
        .map(|(k0, mk)| pochhammer((*mk + k0 as i64 + 1 - p as i64) as f64, p))
        .product()
}

fn fermion_multi_index(p: usize, q: usize, m_fermion: &[i64]) -> Result<MultiIndex> {
    if m_fermion.len() != q {
        return Err(Error::Domain(format!(
            "{} fermionic exponents for q = {q}",
            m_fermion.len()
        )));
    }
    let mut v = vec![0.0; p];
    v.extend(m_fermion.iter().map(|m| *m as f64 + q as f64 - p as f64));
    MultiIndex::new(p, q, v)
}

/// `ψ(1) = ∫ D(ζ,ω) Δ_{m + q𝟙′ + (q−p)𝟙″}([[1, ζ], [ω, 1]])` by direct
/// expansion in `2pq` generators.
pub fn gamma_fermionic_exact(p: usize, q: usize, m_fermion: &[i64]) -> Result<f64> {
    let layout = FermionLayout::new(0, p, q);
    let (zeta, omega) = layout.generators()?;
    let n = layout.n_total();
    let y = assemble_y(&CMat::identity(p), &CMat::identity(q), &zeta, &omega, n)?;
    let d = y.delta_m(&fermion_multi_index(p, q, m_fermion)?)?;
    Ok(layout.integrate(&d)?.body().re)
}

/// `γ_{−a} = ∫ D(ζ,ω) (1 − ωζ)^{−a}` over `2p` generators (`ζ` a column, `ω` a row).
pub fn gamma_fermionic_factor(p: usize, a: i64) -> Result<f64> {
    let layout = FermionLayout::new(0, p, 1);
    let (zeta, omega) = layout.generators()?;
    let mut s = Grassmann::one(layout.n_total());
    for i in 0..p {
        s -= &(&omega[i] * &zeta[i]);
    }
    Ok(layout.integrate(&s.powi(-a)?)?.body().re)
}

/// `ψ(1)` through the one-row reduction: `∏_k γ_{−(m_{p+k}+k−p)}`.
pub fn gamma_fermionic_reduced(p: usize, m_fermion: &[i64]) -> Result<f64> {
    m_fermion
        .iter()
        .enumerate()
        .map(|(k0, mk)| gamma_fermionic_factor(p, mk + k0 as i64 + 1 - p as i64))
        .product()
}

fn check_dominant(n: &[i64]) -> Result<()> {
    if n.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Domain(format!("{n:?} is not dominant")));
    }
    Ok(())
}

/// `q_n = ∏_k Γ(n_k + q − k + 1)/Γ(q − k + 1)`.
pub fn q_norm(n: &[i64]) -> Result<f64> {
    let q = n.len();
    let num: Vec<f64> = n
        .iter()
        .enumerate()
        .map(|(k0, nk)| (*nk + (q - k0) as i64) as f64)
        .collect();
    let den: Vec<f64> = (0..q).map(|k0| (q - k0) as f64).collect();
    let g = gamma_ratio(&num, &den, 0.0);
    match g.value {
        Some(v) if !g.is_zero => Ok(v),
        _ => Err(Error::Domain(format!("q_n is singular at {n:?}"))),
    }
}

/// Weyl dimension `∏_{i<j} (n_i − n_j + j − i)/(j − i)` of the irreducible
/// `U(q)`-module of highest weight `n`.
pub fn weyl_dim(n: &[i64]) -> Result<u64> {
    check_dominant(n)?;
    let q = n.len();
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for i in 0..q {
        for j in i + 1..q {
            num *= (n[i] - n[j] + (j - i) as i64) as i128;
            den *= (j - i) as i128;
        }
    }
    Ok((num / den) as u64)
}

/// Complete homogeneous symmetric polynomials `h_0..=h_k` in `x`.
fn complete_homogeneous(x: &[Complex64], k: usize) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); k + 1];
    h[0] = Complex64::new(1.0, 0.0);
    for xi in x {
        for d in 1..=k {
            let prev = h[d - 1];
            h[d] += xi * prev;
        }
    }
    h
}

/// Character `s_n` of the irreducible `U(q)`-module of highest weight `n` at
/// a matrix with the given eigenvalues (Jacobi–Trudi; negative parts are
/// absorbed by a power of the determinant).
pub fn schur_char(n: &[i64], eigenvalues: &[Complex64]) -> Result<Complex64> {
    check_dominant(n)?;
    let q = n.len();
    if eigenvalues.len() != q {
        return Err(Error::Format("eigenvalue count differs from q".into()));
    }
    if q == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let shift = n[q - 1].min(0);
    let lam: Vec<usize> = n.iter().map(|v| (v - shift) as usize).collect();
    let h = complete_homogeneous(eigenvalues, lam[0] + q);
    let mut jt = CMat::zeros(q, q);
    for i in 0..q {
        for j in 0..q {
            let idx = lam[i] as i64 - i as i64 + j as i64;
            if idx >= 0 {
                jt.set(i, j, h[idx as usize]);
            }
        }
    }
    let det: Complex64 = eigenvalues.iter().product();
    Ok(jt.det() * det.powi(shift as i32))
}

/// `Δ_r(w) = ∏_k det([w]_k)^{r_k − r_{k+1}}` on ordinary `q×q` matrices.
pub fn conical_gl(w: &CMat<f64>, r: &[i64]) -> Complex64 {
    let q = r.len();
    let mut out = Complex64::new(1.0, 0.0);
    for k in 0..q {
        let e = r[k] - r.get(k + 1).copied().unwrap_or(0);
        if e != 0 {
            out *= w.block(0, k + 1, 0, k + 1).det().powi(e as i32);
        }
    }
    out
}

/// `∫_{U(q)} e^{tr w} Δ_{m″}(w)^{−1} dw`; the closed value is `1/q_{m″}`.
pub fn unitary_sector_integral(m_fermion: &[i64], spec: &QuadSpec) -> Result<Estimate> {
    let q = m_fermion.len();
    if q >= 2 && m_fermion.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Domain(
            "unequal exponents on U(q), q ≥ 2, give an integrand of infinite variance".into(),
        ));
    }
    unitary_integrate(q, spec, |w| {
        Ok(Grassmann::scalar(
            0,
            w.trace().exp() / conical_gl(w, m_fermion),
        ))
    })
}

pub(crate) fn decay_from_kernel(f: &SuperExpr, p: usize) -> CMat<f64> {
    match f.kernel_matrix() {
        Some(x) if x.rows().even == p => x.body().block(0, p, 0, p),
        _ => CMat::identity(p),
    }
}

fn check_cone_exponents(m: &[f64]) -> Result<()> {
    for (j, mj) in m.iter().enumerate() {
        if *mj <= j as f64 {
            return Err(Error::Domain(format!(
                "integral diverges: exponent m_{} = {mj} must exceed {j}",
                j + 1
            )));
        }
    }
    Ok(())
}

fn check_mc_exponents(q: usize, spec: &OmegaSpec, m_fermion: &[i64]) -> Result<()> {
    let mc = spec.unitary.rule == Rule::HaarMc || (spec.unitary.rule == Rule::Auto && q >= 2);
    if mc && m_fermion.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Domain(
            "Monte Carlo on U(q) requires equal fermionic exponents".into(),
        ));
    }
    Ok(())
}

/// `α_j = m_j − j` (one-based), exact for integrands `Δ_{m′}(z) e^{−tr(az)}` times polynomials.
fn alpha_for(m: &[f64]) -> Vec<f64> {
    m.iter()
        .enumerate()
        .map(|(j, v)| v - (j + 1) as f64)
        .collect()
}

pub(crate) fn eval_expr(
    f: &SuperExpr,
    y: &SMatrix,
    params: &BTreeMap<String, Grassmann>,
) -> Result<Grassmann> {
    let mut b = Bindings::with_y(y.clone());
    for (k, v) in params {
        b = b.param(k, v.clone());
    }
    f.eval_scalar(&b)
}

/// `⟨T_n, f⟩ = ∫_Ω |Dy| Ber(y)^n f(y)` for `n ≥ p`; `params` live in an
/// algebra on `n_ext` external generators.
pub fn riesz_t(
    p: usize,
    q: usize,
    n: i64,
    f: &SuperExpr,
    n_ext: usize,
    params: &BTreeMap<String, Grassmann>,
    spec: &OmegaSpec,
) -> Result<Estimate> {
    if p + q == 0 {
        return Err(Error::Domain("Ω needs p + q ≥ 1".into()));
    }
    if n < p as i64 {
        return Err(Error::Domain(format!(
            "T_n requires n ≥ p, got n = {n}, p = {p}"
        )));
    }
    let m = vec![n as f64; p];
    let cone = ConeWeight::new(decay_from_kernel(f, p), spec.alpha_or(alpha_for(&m)))?;
    omega_integral(p, q, n_ext, &cone, spec, |y| {
        y.ber()?.powi(n)?.try_mul(&eval_expr(f, y, params)?)
    })
}

/// `Γ_Ω(m) = ∫_Ω |Dy| e^{−str y} Δ_m(y)` by quadrature.
pub fn gamma_numeric(m: &MultiIndex, spec: &OmegaSpec) -> Result<Estimate> {
    check_cone_exponents(m.boson())?;
    check_mc_exponents(m.q, spec, &m.fermion())?;
    let cone = ConeWeight::new(CMat::identity(m.p), spec.alpha_or(alpha_for(m.boson())))?;
    omega_integral(m.p, m.q, 0, &cone, spec, |y| {
        let e = (-y.supertrace()?).exp();
        e.try_mul(&y.delta_m(m)?)
    })
}

/// `L(Δ_m)(x⁻¹) = ∫_Ω |Dy| e^{−str(x⁻¹y)} Δ_m(y)`; `x` may carry external
/// odd parameters.
pub fn laplace_conical(m: &MultiIndex, x: &SMatrix, spec: &OmegaSpec) -> Result<Estimate> {
    let (p, q) = (m.p, m.q);
    if x.rows() != Format::new(p, q) || x.cols() != x.rows() {
        return Err(Error::Format("x must be square of the format of m".into()));
    }
    check_cone_exponents(m.boson())?;
    check_mc_exponents(q, spec, &m.fermion())?;
    if !x.in_big_cell() {
        return Err(Error::Domain("x is not in the big cell".into()));
    }
    let xinv = x.inverse()?;
    let decay = xinv.body().block(0, p, 0, p);
    decay.hermitian_part().cholesky().map_err(|_| {
        Error::Domain("Re of the boson block of x⁻¹ must be positive definite".into())
    })?;
    let cone = ConeWeight::new(decay, spec.alpha_or(alpha_for(m.boson())))?;
    let n_ext = x.n_generators();
    omega_integral(p, q, n_ext, &cone, spec, |y| {
        let xi = xinv.embed(y.n_generators())?;
        let e = (-xi.try_mul(y)?.supertrace()?).exp();
        e.try_mul(&y.delta_m(m)?)
    })
}

/// `Γ_Ω(m) Δ_m(x)`, the closed form of [`laplace_conical`].
pub fn laplace_conical_closed(m: &MultiIndex, x: &SMatrix) -> Result<Grassmann> {
    let g = gamma_closed(m)
        .value
        .ok_or_else(|| Error::Domain("Γ_Ω has a pole at m".into()))?;
    Ok(x.delta_m(m)?.scale_real(g))
}

/// The three families of group elements used for invariance at `p = q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `h.Z = A Z D` with `A = [[1,0],[α,1]]`, `D = [[1,δ],[0,1]]`.
    OddLower,
    /// `h.Z = A Z D` with `A = [[1,α],[0,1]]`, `D = [[1,0],[δ,1]]`.
    OddUpper,
    /// `h.Z = diag(a, d) Z diag(a*, d′⁻¹)` with `a ∈ C^×`, `d, d′ ∈ U(1)`.
    BlockDiagonal,
}

/// Builds a family element at `p = q = 1`. For the odd families `odd` holds
/// `(α, δ)`; for the block-diagonal family `even` holds `(a, d, d′)`.
pub fn family_element(
    family: Family,
    n: usize,
    odd: Option<(Grassmann, Grassmann)>,
    even: Option<(Complex64, Complex64, Complex64)>,
) -> Result<GroupElement<f64>> {
    let f = Format::new(1, 1);
    let one = Grassmann::one(n);
    let zero = Grassmann::zero(n);
    let m = |e: [Grassmann; 4]| SuperMatrix::new(f, f, e.to_vec());
    match family {
        Family::OddLower | Family::OddUpper => {
            let (alpha, delta) =
                odd.ok_or_else(|| Error::Domain("odd family needs (α, δ)".into()))?;
            if !alpha.is_odd() || !delta.is_odd() {
                return Err(Error::Parity("α and δ must be odd".into()));
            }
            let (a, d) = if family == Family::OddLower {
                (
                    m([one.clone(), zero.clone(), alpha, one.clone()])?,
                    m([one.clone(), delta, zero, one])?,
                )
            } else {
                (
                    m([one.clone(), alpha, zero.clone(), one.clone()])?,
                    m([one.clone(), zero, delta, one])?,
                )
            };
            GroupElement::block_diagonal(a, d.inverse()?)
        }
        Family::BlockDiagonal => {
            let (a1, d, d2) =
                even.ok_or_else(|| Error::Domain("block-diagonal family needs (a, d, d′)".into()))?;
            if (d.norm() - 1.0).abs() > 1e-12 || (d2.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Domain("d and d′ must be unitary".into()));
            }
            let a =
                SuperMatrix::diagonal(f, vec![Grassmann::scalar(n, a1), Grassmann::scalar(n, d)])?;
            let dd = SuperMatrix::diagonal(
                f,
                vec![
                    Grassmann::scalar(n, a1.conj().inv()),
                    Grassmann::scalar(n, d2),
                ],
            )?;
            GroupElement::block_diagonal(a, dd)
        }
    }
}

/// `∫ Dμ f(h.Z)` against `∫ Dμ f(Z)`, coefficient-wise. The Laplace kernel
/// of `f`, if any, sets the cone decay on each side.
pub fn invariance_check(
    h: &GroupElement<f64>,
    f: &SuperExpr,
    params: &BTreeMap<String, Grassmann>,
    spec: &OmegaSpec,
    tol: f64,
) -> Result<Comparison> {
    let fmt = h.format();
    let (p, q) = (fmt.even, fmt.odd);
    if h.b.is_some() || h.c.is_some() {
        return Err(Error::Domain(
            "only block-diagonal group elements are supported".into(),
        ));
    }
    let n_ext = h.a.n_generators();
    let alpha = spec.alpha_or(alpha_for(&vec![p as f64; p]));
    let x = f
        .kernel_matrix()
        .cloned()
        .unwrap_or_else(|| SuperMatrix::identity(fmt, n_ext));
    let x_moved = h.d.inverse()?.try_mul(&x.embed(n_ext)?)?.try_mul(&h.a)?;
    let cone_h = ConeWeight::new(x_moved.body().block(0, p, 0, p), alpha.clone())?;
    let cone_0 = ConeWeight::new(x.body().block(0, p, 0, p), alpha)?;
    let lhs = omega_integral(p, q, n_ext, &cone_h, spec, |y| {
        let hy = GroupElement::block_diagonal(
            h.a.embed(y.n_generators())?,
            h.d.embed(y.n_generators())?,
        )?
        .act(y)?;
        eval_expr(f, &hy, params)
    })?;
    let rhs = omega_integral(p, q, n_ext, &cone_0, spec, |y| eval_expr(f, y, params))?;
    Comparison::new(
        "invariance",
        &lhs,
        &rhs.value,
        "quadrature",
        Tolerance::Relative { tol },
    )
}

/// Domain of a nilpotent-shift check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftDomain {
    /// `U(k)` with the Haar probability measure.
    Unitary(usize),
    /// `Herm⁺(k)` with `|dz|/|det z|^k`.
    Cone(usize),
}

/// `∫ f(x + n)` against `∫ f(x) det(x)^k / det(x − n)^k` for an even
/// nilpotent scalar shift `n`; `f` reads its argument from the `Y` slot as a
/// `(k|0)` matrix.
pub fn shift_check(
    domain: ShiftDomain,
    f: &SuperExpr,
    shift: &Grassmann,
    spec: &OmegaSpec,
    tol: f64,
) -> Result<Comparison> {
    if !shift.is_even() {
        return Err(Error::Parity("the shift must be even".into()));
    }
    if shift.body().norm() != 0.0 {
        return Err(Error::Domain("the shift must be nilpotent".into()));
    }
    let n = shift.n_generators();
    let params = BTreeMap::new();
    let lift = |x: &CMat<f64>, plus: bool| -> Result<SMatrix> {
        let k = x.rows;
        let mut y = SuperMatrix::from_body(Format::new(k, 0), Format::new(k, 0), n, x)?;
        if plus {
            for i in 0..k {
                let v = y.get(i, i).try_add(shift)?;
                y.set(i, i, v);
            }
        }
        Ok(y)
    };
    let jacobian = |x: &CMat<f64>| -> Result<Grassmann> {
        let k = x.rows;
        let base = lift(x, false)?;
        let mut moved = base.clone();
        for i in 0..k {
            let v = moved.get(i, i).try_sub(shift)?;
            moved.set(i, i, v);
        }
        base.det_even()?
            .powi(k as i64)?
            .try_mul(&moved.det_even()?.powi(-(k as i64))?)
    };
    let (lhs, rhs) = match domain {
        ShiftDomain::Unitary(k) => {
            let l =
                unitary_integrate(k, &spec.unitary, |w| eval_expr(f, &lift(w, true)?, &params))?;
            let r = unitary_integrate(k, &spec.unitary, |w| {
                eval_expr(f, &lift(w, false)?, &params)?.try_mul(&jacobian(w)?)
            })?;
            (l, r)
        }
        ShiftDomain::Cone(k) => {
            let alpha = spec.alpha_or((0..k).map(|j| (k - j - 1) as f64).collect());
            let cone = ConeWeight::new(decay_from_kernel(f, k), alpha)?;
            let l = cone_integrate(k, &cone, &spec.cone, |z| {
                eval_expr(f, &lift(z, true)?, &params)
            })?;
            let r = cone_integrate(k, &cone, &spec.cone, |z| {
                eval_expr(f, &lift(z, false)?, &params)?.try_mul(&jacobian(z)?)
            })?;
            (Estimate::exact(l), Estimate::exact(r))
        }
    };
    Comparison::new(
        "nilpotent-shift",
        &lhs,
        &rhs.value,
        "quadrature",
        Tolerance::Relative { tol },
    )
}
