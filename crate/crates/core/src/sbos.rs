//! The flat side of super-bosonisation: the quadratic map `Q(v) = a a′` on
//! `V = C^{(p|q)×n} ⊕ C^{n×(p|q)}`, its Berezin integral, and the comparison
//! with `T_n`.
//!
//! Internal generators follow the external ones: `ξ_bj` (q×n, row-major),
//! then `η_jb` (n×q, row-major). The fermionic density is normalised by
//! `∫ D(ξ,η) e^{tr ξη} = 1`; the flat density carries `π^{−1/2}` per complex
//! coordinate, so that `∫ |Dv| e^{−str Q(v)} = √π^{np}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::quadrature::{gauss_flat_integrate, Estimate, QuadSpec};
use crate::report::{Comparison, Report, Tolerance};
use crate::riesz::{decay_from_kernel, eval_expr, gamma_closed, riesz_t, GammaValue, OmegaSpec};
use crate::superexpr::SuperExpr;
use crate::supermatrix::{Format, MultiIndex, SuperMatrix};
use crate::{Complex64, Grassmann, SMatrix};

/// Quadrature for both sides of the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbosSpec {
    /// Gauss–Hermite order per real coordinate of `V₀`.
    pub flat: QuadSpec,
    pub omega: OmegaSpec,
}

impl Default for SbosSpec {
    fn default() -> Self {
        Self {
            flat: QuadSpec::gauss(&[10]),
            omega: OmegaSpec::default(),
        }
    }
}

/// Generator indices of `ξ`, `η` and the Berezin order of `D(ξ,η)`.
#[derive(Debug, Clone, Copy)]
pub struct VLayout {
    pub n_ext: usize,
    pub q: usize,
    pub n: usize,
}

impl VLayout {
    pub fn new(n_ext: usize, q: usize, n: usize) -> Self {
        Self { n_ext, q, n }
    }

    pub fn n_total(&self) -> usize {
        self.n_ext + 2 * self.q * self.n
    }

    pub fn xi(&self, b: usize, j: usize) -> usize {
        self.n_ext + b * self.n + j
    }

    pub fn eta(&self, j: usize, b: usize) -> usize {
        self.n_ext + self.q * self.n + j * self.q + b
    }

    /// `ξ_bj` then `η_jb` for every pair.
    pub fn berezin_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.q * self.n);
        for b in 0..self.q {
            for j in 0..self.n {
                out.push(self.xi(b, j));
                out.push(self.eta(j, b));
            }
        }
        out
    }

    /// `(ξ, η)` as generator tables, row-major.
    pub fn generators(&self) -> Result<(Vec<Grassmann>, Vec<Grassmann>)> {
        let m = self.n_total();
        let mut xi = Vec::with_capacity(self.q * self.n);
        for b in 0..self.q {
            for j in 0..self.n {
                xi.push(Grassmann::generator(m, self.xi(b, j))?);
            }
        }
        let mut eta = Vec::with_capacity(self.q * self.n);
        for j in 0..self.n {
            for b in 0..self.q {
                eta.push(Grassmann::generator(m, self.eta(j, b))?);
            }
        }
        Ok((xi, eta))
    }

    /// `∫ D(ξ,η) g`, as an element of the external algebra.
    pub fn integrate(&self, g: &Grassmann) -> Result<Grassmann> {
        g.berezin(&self.berezin_order())?.restrict(self.n_ext)
    }
}

/// A point `v = (a, a′)` of `V` with `a′₀ = a₀*`.
#[derive(Debug, Clone, PartialEq)]
pub struct VPoint {
    /// `(p|q)×(n|0)`: boson rows `a₀`, fermion rows `ξ`.
    pub a: SMatrix,
    /// `(n|0)×(p|q)`: boson columns `a₀*`, fermion columns `η`.
    pub a_adj: SMatrix,
}

impl VPoint {
    /// From the boson block `a₀` (p×n) and the odd tables `ξ` (q×n) and
    /// `η` (n×q), row-major, all in an algebra on `n_gen` generators.
    pub fn new(
        a0: &CMat<f64>,
        xi: &[Grassmann],
        eta: &[Grassmann],
        q: usize,
        n_gen: usize,
    ) -> Result<Self> {
        let conj = CMat::from_vec(a0.rows, a0.cols, a0.data.iter().map(|z| z.conj()).collect());
        Self::holomorphic(a0, &conj, xi, eta, q, n_gen)
    }

    /// As [`VPoint::new`] with `a′₀ = a0_bar*` for an independent `a0_bar`
    /// (p×n), the holomorphic continuation off the real cycle.
    pub fn holomorphic(
        a0: &CMat<f64>,
        a0_bar: &CMat<f64>,
        xi: &[Grassmann],
        eta: &[Grassmann],
        q: usize,
        n_gen: usize,
    ) -> Result<Self> {
        let (p, n) = (a0.rows, a0.cols);
        if xi.len() != q * n || eta.len() != q * n {
            return Err(Error::Format(format!(
                "odd blocks must have {} entries",
                q * n
            )));
        }
        let mut a = Vec::with_capacity((p + q) * n);
        for i in 0..p {
            for j in 0..n {
                a.push(Grassmann::scalar(n_gen, a0.at(i, j)));
            }
        }
        a.extend(
            xi.iter()
                .map(|g| g.embed(n_gen))
                .collect::<Result<Vec<_>>>()?,
        );
        let mut b = Vec::with_capacity(n * (p + q));
        for j in 0..n {
            for i in 0..p {
                b.push(Grassmann::scalar(n_gen, a0_bar.at(i, j)));
            }
            for k in 0..q {
                b.push(eta[j * q + k].embed(n_gen)?);
            }
        }
        let (fv, fn_) = (Format::new(p, q), Format::new(n, 0));
        Ok(Self {
            a: SuperMatrix::new(fv, fn_, a)?,
            a_adj: SuperMatrix::new(fn_, fv, b)?,
        })
    }
}

/// `Q(v) = a a′ = [[a₀a₀*, a₀η], [ξa₀*, ξη]]`.
pub fn q_map(v: &VPoint) -> Result<SMatrix> {
    v.a.try_mul(&v.a_adj)
}

/// `M[(i,j),(k,l)] = δ_jl x[i,k]`, so that `a*Ma = tr(x a a*)`.
fn flat_form(x: &CMat<f64>, n: usize) -> CMat<f64> {
    let p = x.rows;
    let mut m = CMat::zeros(p * n, p * n);
    for i in 0..p {
        for k in 0..p {
            for j in 0..n {
                m.set(i * n + j, k * n + j, x.at(i, k));
            }
        }
    }
    m
}

/// `∫_V |Dv| f(Q(v))` for `f` a polynomial times a Laplace kernel; `params`
/// live in an algebra on `n_ext` external generators.
pub fn lhs_pairing(
    p: usize,
    q: usize,
    n: usize,
    f: &SuperExpr,
    n_ext: usize,
    params: &BTreeMap<String, Grassmann>,
    spec: &QuadSpec,
) -> Result<Grassmann> {
    let layout = VLayout::new(n_ext, q, n);
    let m = layout.n_total();
    let (xi, eta) = layout.generators()?;
    let form = flat_form(&decay_from_kernel(f, p), n);
    let total = gauss_flat_integrate(p * n, &form, spec, |avec, abar| {
        let a0 = CMat::from_vec(p, n, avec.to_vec());
        let a0_bar = CMat::from_vec(p, n, abar.to_vec());
        let y = q_map(&VPoint::holomorphic(&a0, &a0_bar, &xi, &eta, q, m)?)?;
        layout.integrate(&eval_expr(f, &y, params)?)
    })
    .map_err(|e| match e {
        Error::Domain(_) => Error::Domain(
            "x violates the tube condition: Re of its boson block must be positive definite".into(),
        ),
        e => e,
    })?;
    Ok(total.scale_real(PI.powf(-((p * n) as f64) / 2.0)))
}

/// `∫_V |Dv| e^{−str(x Q(v))}` by quadrature; `x` may carry external odd
/// parameters.
pub fn lhs_integral(
    p: usize,
    q: usize,
    n: usize,
    x: &SMatrix,
    spec: &QuadSpec,
) -> Result<Grassmann> {
    check_square(p, q, x)?;
    let f = SuperExpr::laplace_kernel(x.clone());
    lhs_pairing(p, q, n, &f, x.n_generators(), &BTreeMap::new(), spec)
}

/// `√π^{np} Ber(x)^{−n}`.
pub fn lhs_closed(p: usize, q: usize, n: usize, x: &SMatrix) -> Result<Grassmann> {
    check_square(p, q, x)?;
    let h = x.body().block(0, p, 0, p).hermitian_part();
    if p > 0 && h.cholesky().is_err() {
        return Err(Error::Domain("x violates the tube condition".into()));
    }
    Ok(x.ber()?
        .powi(-(n as i64))?
        .scale_real(PI.powf((p * n) as f64 / 2.0)))
}

fn check_square(p: usize, q: usize, x: &SMatrix) -> Result<()> {
    let f = Format::new(p, q);
    if x.rows() != f || x.cols() != f {
        return Err(Error::Format(format!("x must be ({p}|{q})×({p}|{q})")));
    }
    Ok(())
}

/// `∫_V |Dv| e^{−str Q(v)}` against `√π^{np}`.
pub fn gaussian_norm_check(
    p: usize,
    q: usize,
    n: usize,
    spec: &QuadSpec,
    tol: f64,
) -> Result<Report> {
    let x = SuperMatrix::identity(Format::new(p, q), 0);
    let got = lhs_integral(p, q, n, &x, spec)?;
    let want = Grassmann::real(0, PI.powf((p * n) as f64 / 2.0));
    let c = Comparison::new(
        "gaussian",
        &Estimate::exact(got),
        &want,
        "closed-form",
        Tolerance::Relative { tol },
    )?;
    Ok(Report::new(
        "gaussian-norm",
        serde_json::json!({ "p": p, "q": q, "n": n }),
        vec![c],
    ))
}

/// `√π^{np} / Γ_Ω(n𝟙)`.
pub fn sbos_constant(p: usize, q: usize, n: usize) -> Result<GammaValue> {
    if n < p {
        return Err(Error::Domain(format!(
            "the identity requires n ≥ p, got n = {n}, p = {p}"
        )));
    }
    let g = gamma_closed(&MultiIndex::constant(p, q, n as i64));
    let lnpi = (p * n) as f64 / 2.0 * PI.ln();
    Ok(match (g.is_pole, g.is_zero, g.ln_abs, g.value) {
        (true, _, _, _) => GammaValue::zero(),
        (_, true, _, _) => GammaValue::pole(),
        (_, _, Some(l), Some(v)) => GammaValue::finite(lnpi - l, v.signum()),
        _ => GammaValue::pole(),
    })
}

/// `n! δ_kn`: the LHS for `p = 0`, `q = 1`, `f = w^k`.
pub fn cauchy_coefficient(n: u64, k: u64) -> f64 {
    if n == k {
        (1..=n).map(|i| i as f64).product()
    } else {
        0.0
    }
}

/// Both sides of `∫_V |Dv| f(Q(v)) = √π^{np}/Γ_Ω(n𝟙) · ⟨T_n, f⟩`. The flat
/// side is the computed value; the Riesz side is the reference.
pub fn verify_identity(
    p: usize,
    q: usize,
    n: usize,
    f: &SuperExpr,
    n_ext: usize,
    params: &BTreeMap<String, Grassmann>,
    spec: &SbosSpec,
    tol: Tolerance,
) -> Result<Comparison> {
    let (lhs, rhs) = identity_sides(p, q, n, f, n_ext, params, spec)?;
    compare_sides(&lhs, &rhs, tol)
}

/// The flat pairing and `Γ_Ω(n𝟙) ⟨T_n, f⟩`, the two sides of the identity.
pub fn identity_sides(
    p: usize,
    q: usize,
    n: usize,
    f: &SuperExpr,
    n_ext: usize,
    params: &BTreeMap<String, Grassmann>,
    spec: &SbosSpec,
) -> Result<(Grassmann, Estimate)> {
    let k = sbos_constant(p, q, n)?
        .value
        .ok_or_else(|| Error::Domain("Γ_Ω(n𝟙) vanishes".into()))?;
    let lhs = lhs_pairing(p, q, n, f, n_ext, params, &spec.flat)?;
    let t = riesz_t(p, q, n as i64, f, n_ext, params, &spec.omega)?;
    let rhs = Estimate {
        value: t.value.scale_real(k),
        stderr: t.stderr.map(|s| s.iter().map(|v| v * k.abs()).collect()),
    };
    Ok((lhs, rhs))
}

pub fn compare_sides(lhs: &Grassmann, rhs: &Estimate, tol: Tolerance) -> Result<Comparison> {
    // The stochastic side goes in the `computed` slot so its stderr is used.
    if rhs.stderr.is_some() {
        Comparison::new("riesz-vs-flat", rhs, lhs, "flat-quadrature", tol)
    } else {
        Comparison::new(
            "flat-vs-riesz",
            &Estimate::exact(lhs.clone()),
            &rhs.value,
            "riesz-quadrature",
            tol,
        )
    }
}

/// `x = [[x_A, θ₁], [θ₂, x_D]]` in the algebra on the two parameters `θ₁, θ₂`.
pub fn shifted_kernel(
    xa: Complex64,
    xd: Complex64,
    s1: Complex64,
    s2: Complex64,
) -> Result<SMatrix> {
    let f = Format::new(1, 1);
    SuperMatrix::new(
        f,
        f,
        vec![
            Grassmann::scalar(2, xa),
            Grassmann::monomial(2, 1, s1),
            Grassmann::monomial(2, 2, s2),
            Grassmann::scalar(2, xd),
        ],
    )
}
