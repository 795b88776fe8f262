//! Fourier transform and cotransform on a flat cs vector space of dimension
//! `p|q`, `p ≤ 1`, for Grassmann-valued Schwartz functions sampled on a
//! symmetric grid.
//!
//! A superfunction is `f(x, ν) = Σ_I f_I(x) ν^I` with `ν^I` the ascending
//! monomial of the odd coordinates in `I`. The pairing is
//! `⟨(ξ, ν_*), (x, ν)⟩ = ξx + Σ_b ν_b ν^b`, and every Berezin integral over
//! `q` odd coordinates applies `∂/∂ν¹` first. The even sector is integrated by
//! the trapezoid rule, which is spectrally accurate for the Gaussian family;
//! the odd sector is exact.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::subset_label;
use crate::report::{Coeff, Comparison, Report, Tolerance};
use crate::{Complex64, Grassmann};

/// Largest odd dimension handled.
pub const MAX_ODD_DIM: usize = 2;

/// Fraction of the grid, at each end, that must carry negligible mass.
const EDGE_FRACTION: f64 = 0.05;

/// Mass allowed in the edge region, relative to the maximum.
const EDGE_TOL: f64 = 1e-10;

/// Uniform grid `x_k = (k − half)·h`, `k = 0, …, 2·half`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub h: f64,
    pub half: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Self { h: 0.1, half: 120 }
    }
}

impl Grid {
    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, k: usize) -> f64 {
        (k as f64 - self.half as f64) * self.h
    }

    /// The one-point grid used when `p = 0`.
    pub fn point() -> Self {
        Self { h: 1.0, half: 0 }
    }
}

/// Sampled superfunction on `R^{p|q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchwartzSample {
    pub p: usize,
    pub q: usize,
    pub grid: Grid,
    /// `comps[I][k] = f_I(x_k)`.
    pub comps: Vec<Vec<Complex64>>,
}

fn check_dims(p: usize, q: usize) -> Result<()> {
    if p > 1 || q > MAX_ODD_DIM {
        return Err(Error::Domain(format!(
            "dimension {p}|{q} outside 1|{MAX_ODD_DIM}"
        )));
    }
    Ok(())
}

fn sign(odd: bool) -> f64 {
    if odd {
        -1.0
    } else {
        1.0
    }
}

impl SchwartzSample {
    /// Samples `f(x)` on the grid; for `p = 0` the grid is ignored and `f(0)`
    /// is used.
    pub fn from_fn<F>(p: usize, q: usize, grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Grassmann,
    {
        check_dims(p, q)?;
        let grid = if p == 0 { Grid::point() } else { grid };
        let mut comps = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; 1 << q];
        for k in 0..grid.len() {
            let g = f(grid.x(k));
            if g.n_generators() != q {
                return Err(Error::AlgebraMismatch(g.n_generators(), q));
            }
            for (mask, z) in g.coeffs().iter().enumerate() {
                comps[mask][k] = *z;
            }
        }
        Ok(Self { p, q, grid, comps })
    }

    /// `Σ_I c_I ν^I · e^{−a x²}`.
    pub fn gaussian(p: usize, q: usize, grid: Grid, a: f64, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != 1 << q {
            return Err(Error::Format(format!(
                "{} coefficients for q = {q}",
                coeffs.len()
            )));
        }
        let g = Grassmann::from_coeffs(q, coeffs.to_vec())?;
        Self::from_fn(p, q, grid, |x| g.scale_real((-a * x * x).exp()))
    }

    pub fn zero_like(&self) -> Self {
        Self {
            comps: vec![vec![Complex64::new(0.0, 0.0); self.grid.len()]; 1 << self.q],
            ..self.clone()
        }
    }

    /// Value at grid point `k` as a Grassmann number on the `q` odd coordinates.
    pub fn at(&self, k: usize) -> Grassmann {
        let c = self.comps.iter().map(|v| v[k]).collect();
        Grassmann::from_coeffs(self.q, c).expect("2^q components")
    }

    /// Pointwise map of the Grassmann values.
    pub fn map_points<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&Grassmann) -> Result<Grassmann>,
    {
        let mut out = self.zero_like();
        for k in 0..self.grid.len() {
            let g = f(&self.at(k))?;
            for (mask, z) in g.coeffs().iter().enumerate() {
                out.comps[mask][k] = *z;
            }
        }
        Ok(out)
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.q != other.q || self.grid != other.grid {
            return Err(Error::Format(
                "samples live on different spaces or grids".into(),
            ));
        }
        Ok(())
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        let mut out = self.zero_like();
        for k in 0..self.grid.len() {
            let g = self.at(k).try_mul(&other.at(k))?;
            for (mask, z) in g.coeffs().iter().enumerate() {
                out.comps[mask][k] = *z;
            }
        }
        Ok(out)
    }

    /// `ν^a · f` (zero-based `a`).
    pub fn mul_odd(&self, a: usize) -> Result<Self> {
        let nu = Grassmann::generator(self.q, a)?;
        self.map_points(|g| nu.try_mul(g))
    }

    /// `∂f/∂ν^a` (zero-based `a`).
    pub fn d_odd(&self, a: usize) -> Result<Self> {
        self.map_points(|g| g.derivative(a))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.comps.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    /// `f(−v)`: reversed grid and `ν → −ν`.
    pub fn reflect(&self) -> Self {
        let mut out = self.clone();
        for (mask, v) in out.comps.iter_mut().enumerate() {
            v.reverse();
            if mask.count_ones() % 2 == 1 {
                v.iter_mut().for_each(|z| *z = -*z);
            }
        }
        out
    }

    /// Shift by `steps` grid points, `f(x − steps·h)`; vacated points are 0.
    pub fn translate(&self, steps: i64) -> Self {
        let mut out = self.zero_like();
        let n = self.grid.len() as i64;
        for (o, v) in out.comps.iter_mut().zip(&self.comps) {
            for k in 0..n {
                let src = k - steps;
                if (0..n).contains(&src) {
                    o[k as usize] = v[src as usize];
                }
            }
        }
        out
    }

    /// Parity in the odd coordinates; `None` when inhomogeneous, `Some(false)`
    /// for zero.
    pub fn parity(&self) -> Option<bool> {
        let mut found = None;
        for (mask, v) in self.comps.iter().enumerate() {
            if v.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let odd = mask.count_ones() % 2 == 1;
            match found {
                None => found = Some(odd),
                Some(f) if f != odd => return None,
                _ => {}
            }
        }
        Some(found.unwrap_or(false))
    }

    /// `∫ |Dv| f`: trapezoid in `x`, top coefficient in `ν`.
    pub fn integrate(&self) -> Complex64 {
        let w = if self.p == 0 { 1.0 } else { self.grid.h };
        let top = Grassmann::monomial(self.q, (1 << self.q) - 1, Complex64::new(1.0, 0.0));
        let order: Vec<usize> = (0..self.q).collect();
        let s = top.berezin(&order).expect("valid order").body();
        self.comps[(1 << self.q) - 1].iter().sum::<Complex64>() * w * s
    }

    /// Fails when the outer grid region carries non-negligible mass.
    pub fn check_tails(&self) -> Result<()> {
        if self.p == 0 {
            return Ok(());
        }
        let n = self.grid.len();
        let edge = ((n as f64 * EDGE_FRACTION).ceil() as usize).max(1);
        for (mask, v) in self.comps.iter().enumerate() {
            let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let tail = v[..edge]
                .iter()
                .chain(&v[n - edge..])
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if tail > EDGE_TOL * peak.max(f64::MIN_POSITIVE) {
                return Err(Error::Numerical(format!(
                    "grid aliasing: component {} has edge mass {tail:.3e} of peak {peak:.3e}",
                    subset_label(mask)
                )));
            }
        }
        Ok(())
    }
}

/// Discrete `Σ_j h e^{s·i ξ_k x_j} f(x_j)` on the same grid.
fn even_transform(v: &[Complex64], grid: Grid, s: f64) -> Vec<Complex64> {
    let n = grid.len();
    (0..n)
        .map(|k| {
            let xi = grid.x(k);
            (0..n)
                .map(|j| v[j] * Complex64::from_polar(grid.h, s * xi * grid.x(j)))
                .sum()
        })
        .collect()
}

/// `∫ D(ν_in) e^{s·i·P} ν_in^I` for every `I`, in the algebra of the output
/// coordinates. Output coordinates sit at `0..q`, integrated ones at `q..2q`;
/// `P = Σ_b ν_b ν^b` with `ν_b` the dual coordinate.
fn odd_kernels(q: usize, s: f64, input_is_dual: bool) -> Result<Vec<Grassmann>> {
    let n = 2 * q;
    let mut pairing = Grassmann::zero(n);
    for b in 0..q {
        let (out, inp) = (Grassmann::generator(n, b)?, Grassmann::generator(n, q + b)?);
        pairing += &if input_is_dual {
            &inp * &out
        } else {
            &out * &inp
        };
    }
    let e = pairing.scale(Complex64::new(0.0, s)).exp();
    let order: Vec<usize> = (q..n).collect();
    (0..1usize << q)
        .map(|mask| {
            let mono = Grassmann::monomial(n, mask << q, Complex64::new(1.0, 0.0));
            e.try_mul(&mono)?.berezin(&order)?.restrict(q)
        })
        .collect()
}

fn transform(
    f: &SchwartzSample,
    s: f64,
    input_is_dual: bool,
    prefactor: Complex64,
) -> Result<SchwartzSample> {
    f.check_tails()?;
    let kernels = odd_kernels(f.q, s, input_is_dual)?;
    let mut out = f.zero_like();
    for (mask, v) in f.comps.iter().enumerate() {
        let e = if f.p == 0 {
            v.clone()
        } else {
            even_transform(v, f.grid, s)
        };
        for (k, c) in kernels[mask].terms() {
            for (o, x) in out.comps[k].iter_mut().zip(&e) {
                *o += x * c * prefactor;
            }
        }
    }
    Ok(out)
}

/// `F(f) = (2π)^{−p/2} ∫ |Dv| e^{−i⟨·,v⟩} f(v)`.
pub fn ft(f: &SchwartzSample) -> Result<SchwartzSample> {
    let pre = (2.0 * PI).powf(-(f.p as f64) / 2.0);
    transform(f, -1.0, false, Complex64::new(pre, 0.0))
}

/// `F̌(g) = (−i)^q (−1)^{q(q−1)/2} (2π)^{−p/2} ∫ |Dv*| e^{i⟨v*,·⟩} g(v*)`.
pub fn ift(g: &SchwartzSample) -> Result<SchwartzSample> {
    let q = g.q as u32;
    let pre = Complex64::new(0.0, -1.0).powu(q)
        * sign((q * q.saturating_sub(1) / 2) % 2 == 1)
        * (2.0 * PI).powf(-(g.p as f64) / 2.0);
    transform(g, 1.0, true, pre)
}

/// Convolution defined by `∫ |Dv| (f∗g)(v) h(v) = ∫ |Dv₁| ∫ |Dv₂| f(v₁) g(v₂) h(v₁+v₂)`.
/// Pointwise this is `(−1)^q ∫ |Dv| f(v) g(x − v)`, the sign coming from
/// exchanging the two odd integrations. The odd sector uses a second set of
/// `q` generators for `v`.
pub fn convolve(f: &SchwartzSample, g: &SchwartzSample) -> Result<SchwartzSample> {
    f.same_space(g)?;
    f.check_tails()?;
    g.check_tails()?;
    let q = f.q;
    let n = 2 * q;
    let order: Vec<usize> = (q..n).collect();
    let mut diff = Vec::with_capacity(q);
    for b in 0..q {
        diff.push(Grassmann::generator(n, b)? - Grassmann::generator(n, q + b)?);
    }
    let mut out = f.zero_like();
    let len = f.grid.len();
    let w = if f.p == 0 { 1.0 } else { f.grid.h } * sign(q % 2 == 1);
    for (mi, fv) in f.comps.iter().enumerate() {
        for (mj, gv) in g.comps.iter().enumerate() {
            // ν_v^I (ν_x − ν_v)^J, integrated over ν_v.
            let mut mono = Grassmann::monomial(n, mi << q, Complex64::new(1.0, 0.0));
            for (b, d) in diff.iter().enumerate() {
                if mj & (1 << b) != 0 {
                    mono = mono.try_mul(d)?;
                }
            }
            let kern = mono.berezin(&order)?.restrict(q)?;
            if kern.is_zero() {
                continue;
            }
            let conv: Vec<Complex64> = (0..len)
                .map(|k| {
                    (0..len)
                        .filter_map(|j| {
                            let src = k as i64 - j as i64 + f.grid.half as i64;
                            (0..len as i64)
                                .contains(&src)
                                .then(|| fv[j] * gv[src as usize])
                        })
                        .sum::<Complex64>()
                        * w
                })
                .collect();
            for (m, c) in kern.terms() {
                for (o, x) in out.comps[m].iter_mut().zip(&conv) {
                    *o += x * c;
                }
            }
        }
    }
    Ok(out)
}

fn max_on(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Per-component comparison of two samples: errors are maxima over the grid,
/// the listed values are those at `x = 0`.
pub fn compare_samples(
    label: &str,
    computed: &SchwartzSample,
    reference: &SchwartzSample,
    reference_kind: &str,
    tol: f64,
) -> Result<Comparison> {
    computed.same_space(reference)?;
    let scale = reference
        .comps
        .iter()
        .map(|v| max_on(v))
        .fold(1.0, f64::max);
    let mut abs_err = Vec::new();
    let mut rel_err = Vec::new();
    for (a, b) in computed.comps.iter().zip(&reference.comps) {
        let d = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        let m = max_on(b);
        abs_err.push(d);
        rel_err.push(if m > 1e-12 * scale { d / m } else { d / scale });
    }
    let centre = |s: &SchwartzSample| -> Vec<Coeff> {
        s.comps
            .iter()
            .enumerate()
            .map(|(mask, v)| {
                let z = v[s.grid.half];
                Coeff {
                    subset: subset_label(mask),
                    re: z.re,
                    im: z.im,
                }
            })
            .collect()
    };
    Ok(Comparison {
        label: label.to_string(),
        computed: centre(computed),
        reference: centre(reference),
        reference_kind: reference_kind.to_string(),
        pass: rel_err.iter().all(|e| *e <= tol),
        abs_err,
        rel_err,
        stderr: None,
        tolerance: Tolerance::Relative { tol },
    })
}

/// Tolerance for checks on `R^{p|q}`: quadrature accuracy when `p = 1`,
/// exact arithmetic otherwise.
pub fn default_tol(p: usize) -> f64 {
    if p == 0 {
        1e-12
    } else {
        1e-8
    }
}

fn scalar_comparison(
    label: &str,
    computed: Complex64,
    reference: Complex64,
    tol: f64,
) -> Result<Comparison> {
    Comparison::new(
        label,
        &crate::quadrature::Estimate::exact(Grassmann::scalar(0, computed)),
        &Grassmann::scalar(0, reference),
        "identity",
        Tolerance::Relative { tol },
    )
}

fn inputs(f: &SchwartzSample) -> serde_json::Value {
    serde_json::json!({ "p": f.p, "q": f.q, "h": f.grid.h, "half": f.grid.half })
}

/// `F̌F f = f` and `FF̌ f = f`.
pub fn roundtrip_check(f: &SchwartzSample, tol: f64) -> Result<Report> {
    let a = compare_samples("inverse-after-transform", &ift(&ft(f)?)?, f, "input", tol)?;
    let b = compare_samples("transform-after-inverse", &ft(&ift(f)?)?, f, "input", tol)?;
    Ok(Report::new("fourier-roundtrip", inputs(f), vec![a, b]))
}

/// The four derivative rules for the odd coordinate `a` (zero-based):
/// `F(ν^a f) = (−1)^q i ∂_{ν_a} F(f)`, `F̌(ν_a g) = (−1)^q i ∂_{ν^a} F̌(g)`,
/// `F(∂_{ν^a} f) = −(−1)^q i ν_a F(f)`, `F̌(∂_{ν_a} g) = −(−1)^q i ν^a F̌(g)`.
/// `f` serves as `g` on the dual space.
pub fn deriv_rule_check(f: &SchwartzSample, a: usize, tol: f64) -> Result<Report> {
    if a >= f.q {
        return Err(Error::GeneratorOutOfRange { index: a, n: f.q });
    }
    let k = Complex64::new(0.0, sign(f.q % 2 == 1));
    let ff = ft(f)?;
    let gf = ift(f)?;
    let comps = vec![
        compare_samples(
            "mul-transform",
            &ft(&f.mul_odd(a)?)?,
            &ff.d_odd(a)?.scale(k),
            "derivative-side",
            tol,
        )?,
        compare_samples(
            "mul-cotransform",
            &ift(&f.mul_odd(a)?)?,
            &gf.d_odd(a)?.scale(k),
            "derivative-side",
            tol,
        )?,
        compare_samples(
            "deriv-transform",
            &ft(&f.d_odd(a)?)?,
            &ff.mul_odd(a)?.scale(-k),
            "multiplication-side",
            tol,
        )?,
        compare_samples(
            "deriv-cotransform",
            &ift(&f.d_odd(a)?)?,
            &gf.mul_odd(a)?.scale(-k),
            "multiplication-side",
            tol,
        )?,
    ];
    let mut inp = inputs(f);
    inp["a"] = serde_json::json!(a);
    Ok(Report::new("fourier-derivative-rules", inp, comps))
}

fn homogeneous_parity(f: &SchwartzSample) -> Result<bool> {
    f.parity()
        .ok_or_else(|| Error::Domain("the sign needs a homogeneous f".into()))
}

/// `F(f∗g) = (−1)^{q|f|} (2π)^{p/2} F(f) F(g)`.
pub fn conv_theorem_check(f: &SchwartzSample, g: &SchwartzSample, tol: f64) -> Result<Report> {
    let pf = homogeneous_parity(f)?;
    let lhs = ft(&convolve(f, g)?)?;
    let s = sign(pf && f.q % 2 == 1) * (2.0 * PI).powf(f.p as f64 / 2.0);
    let rhs = ft(f)?.mul(&ft(g)?)?.scale(Complex64::new(s, 0.0));
    let c = compare_samples(
        "convolution-theorem",
        &lhs,
        &rhs,
        "product-of-transforms",
        tol,
    )?;
    Ok(Report::new("fourier-convolution", inputs(f), vec![c]))
}

/// `∫ |Dv*| F(f) F(g) = (−1)^{q|f|} i^q (−1)^{q(q−1)/2} (f∗g)(0)`, and the
/// same in pointwise form, `(−1)^{q|f|} i^q (−1)^{q(q+1)/2} ∫ |Dv| f(v) g(−v)`.
pub fn parseval_check(f: &SchwartzSample, g: &SchwartzSample, tol: f64) -> Result<Report> {
    f.same_space(g)?;
    let pf = homogeneous_parity(f)?;
    let q = f.q as u32;
    let lhs = ft(f)?.mul(&ft(g)?)?.integrate();
    let base = Complex64::new(0.0, 1.0).powu(q) * sign(pf && q % 2 == 1);
    let conv0 = convolve(f, g)?.comps[0][f.grid.half];
    let via_conv = base * sign((q * q.saturating_sub(1) / 2) % 2 == 1) * conv0;
    let pointwise = base * sign((q * (q + 1) / 2) % 2 == 1) * f.mul(&g.reflect())?.integrate();
    let comps = vec![
        scalar_comparison("parseval-convolution", lhs, via_conv, tol)?,
        scalar_comparison("parseval-pointwise", lhs, pointwise, tol)?,
    ];
    Ok(Report::new("fourier-parseval", inputs(f), comps))
}

/// `(−1)^{q|f|} i^q (−1)^{q(q−1)/2} ∫ |Dv| f(v) g(−v)`: the pointwise
/// right-hand side with the exponent `q(q−1)/2`, which agrees with
/// `∫ |Dv*| F(f) F(g)` only for even `q`.
pub fn parseval_pointwise_alt(f: &SchwartzSample, g: &SchwartzSample) -> Result<Complex64> {
    let pf = homogeneous_parity(f)?;
    let q = f.q as u32;
    let pre = Complex64::new(0.0, 1.0).powu(q)
        * sign(pf && q % 2 == 1)
        * sign((q * q.saturating_sub(1) / 2) % 2 == 1);
    Ok(pre * f.mul(&g.reflect())?.integrate())
}

/// `F(f(· − t))(ξ) = e^{−iξt} F(f)(ξ)` for a shift by whole grid steps.
pub fn modulation_check(f: &SchwartzSample, steps: i64, tol: f64) -> Result<Report> {
    let lhs = ft(&f.translate(steps))?;
    let t = steps as f64 * f.grid.h;
    let mut rhs = ft(f)?;
    for v in rhs.comps.iter_mut() {
        for (k, z) in v.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, -f.grid.x(k) * t);
        }
    }
    let c = compare_samples("modulation", &lhs, &rhs, "modulated-transform", tol)?;
    Ok(Report::new("fourier-modulation", inputs(f), vec![c]))
}

/// The standard test inputs on `R^{p|q}`: an even and an odd homogeneous
/// function (the odd one is zero when `q = 0`) and a mixed one.
pub fn test_family(p: usize, q: usize, grid: Grid) -> Result<Vec<SchwartzSample>> {
    check_dims(p, q)?;
    let dim = 1usize << q;
    let pick = |parity: Option<bool>| -> Vec<Complex64> {
        (0..dim)
            .map(|m| {
                let odd = m.count_ones() % 2 == 1;
                if parity.map_or(true, |p| p == odd) {
                    Complex64::new(1.0 + 0.25 * m as f64, 0.5 - 0.3 * m as f64)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    };
    let mut out = vec![SchwartzSample::from_fn(p, q, grid, |x| {
        Grassmann::from_coeffs(q, pick(Some(false)))
            .expect("2^q")
            .scale_real((1.0 + 0.4 * x) * (-x * x).exp())
    })?];
    if q > 0 {
        out.push(SchwartzSample::gaussian(
            p,
            q,
            grid,
            0.7,
            &pick(Some(true)),
        )?);
    }
    out.push(SchwartzSample::from_fn(p, q, grid, |x| {
        Grassmann::from_coeffs(q, pick(None))
            .expect("2^q")
            .scale(Complex64::new(
                (-0.5 * x * x).exp(),
                0.3 * x * (-0.8 * x * x).exp(),
            ))
    })?);
    Ok(out)
}

/// Inversion, derivative rules, convolution sign and Parseval prefactor on
/// the standard family.
pub fn fourier_suite(p: usize, q: usize, grid: Grid) -> Result<Vec<Report>> {
    let tol = default_tol(p);
    let fam = test_family(p, q, grid)?;
    let mut out = Vec::new();
    for f in &fam {
        out.push(roundtrip_check(f, tol)?);
        for a in 0..q {
            out.push(deriv_rule_check(f, a, tol)?);
        }
    }
    let homogeneous: Vec<_> = fam.iter().filter(|f| f.parity().is_some()).collect();
    for f in &homogeneous {
        for g in &fam {
            out.push(conv_theorem_check(f, g, tol)?);
            out.push(parseval_check(f, g, tol)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn self_dual_gaussian() {
        let g = Grid::default();
        let f = SchwartzSample::gaussian(1, 0, g, 0.5, &[c(1.0, 0.0)]).unwrap();
        let t = ft(&f).unwrap();
        let r = compare_samples("g", &t, &f, "closed-form", 1e-12).unwrap();
        assert!(r.pass, "{:?}", r.rel_err);
    }

    #[test]
    fn one_generator_by_hand() {
        // e^{−iν₁ν¹}(a + bν¹) integrated over ν¹: b + i a ν₁.
        let f = SchwartzSample::from_fn(0, 1, Grid::point(), |_| {
            Grassmann::from_coeffs(1, vec![c(2.0, 0.0), c(0.0, 3.0)]).unwrap()
        })
        .unwrap();
        let t = ft(&f).unwrap().at(0);
        assert_eq!(t.coeff(0), c(0.0, 3.0));
        assert_eq!(t.coeff(1), c(0.0, 2.0));
    }

    #[test]
    fn roundtrip_and_parity() {
        let g = Grid::default();
        for (p, q) in [(1, 0), (0, 1), (1, 1), (0, 2), (1, 2)] {
            for f in test_family(p, q, g).unwrap() {
                let r = roundtrip_check(&f, default_tol(p)).unwrap();
                assert!(r.pass, "{p}|{q}: {:?}", r.comparisons);
                if let Some(par) = f.parity() {
                    assert_eq!(ft(&f).unwrap().parity(), Some(par ^ (q % 2 == 1)));
                }
            }
        }
        let f = SchwartzSample::from_fn(1, 1, g, |x| {
            Grassmann::from_coeffs(1, vec![c(1.0, 0.0), c(1.0, 0.0)])
                .unwrap()
                .scale_real((-x * x).exp())
        })
        .unwrap();
        let back = ift(&ft(&f).unwrap()).unwrap();
        assert!(
            compare_samples("rt", &back, &f, "input", 1e-8)
                .unwrap()
                .pass
        );
        assert!((back.comps[1][g.half] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn derivative_rules() {
        let g = Grid::default();
        let f = SchwartzSample::gaussian(1, 1, g, 1.0, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(deriv_rule_check(&f, 0, 1e-10).unwrap().pass);
        let r = deriv_rule_check(&f, 0, 1e-10).unwrap();
        let d = &r.comparisons[2];
        assert!(d.abs_err.iter().all(|e| *e == 0.0));
        for f in test_family(0, 2, g).unwrap() {
            for a in 0..2 {
                assert!(deriv_rule_check(&f, a, 1e-12).unwrap().pass);
            }
        }
        assert!(deriv_rule_check(&f, 1, 1e-10).is_err());
    }

    #[test]
    fn gaussian_convolution() {
        let g = Grid::default();
        let f = SchwartzSample::gaussian(1, 0, g, 0.5, &[c(1.0, 0.0)]).unwrap();
        let want = SchwartzSample::gaussian(1, 0, g, 0.25, &[c(PI.sqrt(), 0.0)]).unwrap();
        let got = convolve(&f, &f).unwrap();
        assert!(
            compare_samples("conv", &got, &want, "closed-form", 1e-12)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn approximate_identity() {
        let g = Grid { h: 0.02, half: 600 };
        let eps: f64 = 0.05;
        let delta = SchwartzSample::gaussian(
            1,
            0,
            g,
            1.0 / (eps * eps),
            &[c(1.0 / (eps * PI.sqrt()), 0.0)],
        )
        .unwrap();
        let f = SchwartzSample::gaussian(1, 0, g, 0.5, &[c(1.0, 0.0)]).unwrap();
        let got = convolve(&f, &delta).unwrap();
        let r = compare_samples("delta", &got, &f, "input", 1e-3).unwrap();
        assert!(r.pass, "{:?}", r.rel_err);
    }

    #[test]
    fn convolution_sign() {
        let g = Grid::default();
        let f = SchwartzSample::gaussian(1, 1, g, 1.0, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let h = SchwartzSample::gaussian(1, 1, g, 1.0, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(conv_theorem_check(&f, &h, 1e-8).unwrap().pass);
        // Without the sign the identity fails.
        let lhs = ft(&convolve(&f, &h).unwrap()).unwrap();
        let rhs = ft(&f)
            .unwrap()
            .mul(&ft(&h).unwrap())
            .unwrap()
            .scale(c((2.0 * PI).sqrt(), 0.0));
        assert!(!compare_samples("x", &lhs, &rhs, "", 1e-3).unwrap().pass);
        let mixed = SchwartzSample::gaussian(1, 1, g, 1.0, &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(conv_theorem_check(&mixed, &h, 1e-8).is_err());
    }

    #[test]
    fn parseval() {
        let g = Grid::default();
        let f = SchwartzSample::gaussian(1, 0, g, 0.5, &[c(1.0, 0.0)]).unwrap();
        let r = parseval_check(&f, &f, 1e-8).unwrap();
        assert!(r.pass);
        assert!((r.comparisons[0].computed[0].re - PI.sqrt()).abs() < 1e-10);
        // ν against ν: ∫F(ν)F(ν) = i·∫ ν·(−ν) = 0, and ν against 1 exhibits i.
        let nu =
            SchwartzSample::from_fn(0, 1, Grid::point(), |_| Grassmann::generator(1, 0).unwrap())
                .unwrap();
        let one = SchwartzSample::from_fn(0, 1, Grid::point(), |_| Grassmann::one(1)).unwrap();
        let r = parseval_check(&nu, &nu, 1e-12).unwrap();
        assert!(r.pass);
        let r = parseval_check(&one, &nu, 1e-12).unwrap();
        assert!(r.pass);
        assert_eq!(r.comparisons[0].computed[0].im, 1.0);
        assert_eq!(parseval_pointwise_alt(&one, &nu).unwrap(), c(0.0, -1.0));
        let zero = nu.zero_like();
        let r = parseval_check(&nu, &zero, 1e-12).unwrap();
        assert!(r.pass && r.comparisons[0].computed[0].re == 0.0);
    }

    #[test]
    fn modulation() {
        let g = Grid::default();
        let f = SchwartzSample::gaussian(1, 1, g, 1.0, &[c(1.0, 0.0), c(0.5, -1.0)]).unwrap();
        assert!(modulation_check(&f, 7, 1e-8).unwrap().pass);
    }

    #[test]
    fn aliasing_detected() {
        let g = Grid { h: 0.1, half: 20 };
        let f = SchwartzSample::gaussian(1, 0, g, 0.1, &[c(1.0, 0.0)]).unwrap();
        assert!(matches!(ft(&f), Err(Error::Numerical(_))));
    }

    #[test]
    fn suites_pass() {
        for (p, q) in [(1, 0), (0, 1), (1, 1), (0, 2)] {
            for r in fourier_suite(p, q, Grid::default()).unwrap() {
                assert!(
                    r.pass,
                    "{p}|{q} {}: {:?}",
                    r.command,
                    r.comparisons
                        .iter()
                        .map(|c| (&c.label, c.max_rel_err()))
                        .collect::<Vec<_>>()
                );
            }
        }
    }

    #[test]
    fn convolution_matches_its_definition() {
        // Purely odd: both sides in exact arithmetic over monomial f, g, h.
        for q in 1..=2usize {
            let n = 2 * q;
            let dim = 1usize << q;
            let one = c(1.0, 0.0);
            for (mf, mg, mh) in
                (0..dim).flat_map(|a| (0..dim).flat_map(move |b| (0..dim).map(move |h| (a, b, h))))
            {
                let mono = |m: usize| {
                    SchwartzSample::from_fn(0, q, Grid::point(), |_| Grassmann::monomial(q, m, one))
                        .unwrap()
                };
                let conv = convolve(&mono(mf), &mono(mg)).unwrap();
                let lhs = conv.mul(&mono(mh)).unwrap().integrate();
                // f(ν₁) g(ν₂) h(ν₁+ν₂), ν₁ at 0..q, ν₂ at q..2q; ∫Dv₂ first.
                let mut hh = Grassmann::one(n);
                for b in 0..q {
                    if mh & (1 << b) != 0 {
                        let s = Grassmann::generator(n, b).unwrap()
                            + Grassmann::generator(n, q + b).unwrap();
                        hh = hh.try_mul(&s).unwrap();
                    }
                }
                let fg = Grassmann::monomial(n, mf, one)
                    .try_mul(&Grassmann::monomial(n, mg << q, one))
                    .unwrap();
                let inner: Vec<usize> = (q..n).collect();
                let outer: Vec<usize> = (0..q).collect();
                let rhs = fg
                    .try_mul(&hh)
                    .unwrap()
                    .berezin(&inner)
                    .unwrap()
                    .berezin(&outer)
                    .unwrap()
                    .body();
                assert_eq!(lhs, rhs, "q = {q}, masks {mf} {mg} {mh}");
            }
        }
    }
}
