//! Integration over the cone `Herm⁺(p)`, the unitary group `U(q)` and flat
//! complex space, for Grassmann-valued integrands.
//!
//! Deterministic rules are Gaussian: generalised Gauss–Laguerre in the
//! squared diagonal of the Cholesky-type parametrisation `z = R*R` and
//! Gauss–Hermite in the off-diagonal entries after completing the square
//! against the decay matrix. Integrals over `U(q)` use the trapezoid rule on
//! the circle for `q = 1` and seeded Haar Monte Carlo otherwise.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::special::ln_gamma_signed;
use crate::{Complex64, Grassmann};

/// Largest Gauss order accepted; beyond it the three-term recurrences used
/// for node polishing lose accuracy.
pub const MAX_GAUSS_ORDER: usize = 100;

/// Samples per Monte Carlo batch; each batch owns one ChaCha stream.
pub const MC_BATCH: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Gaussian rule (cone, flat space) or trapezoid (`U(1)`) or Monte Carlo
    /// (`U(q)`, `q ≥ 2`) as appropriate.
    Auto,
    Gauss,
    Trapezoid,
    HaarMc,
}

/// Quadrature configuration.
///
/// `orders[0]` is the Laguerre order on the cone, the circle node count on
/// `U(1)` and the Hermite order in flat space; `orders[1]` is the Hermite
/// order for off-diagonal cone entries (defaults to `orders[0]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub rule: Rule,
    pub orders: Vec<usize>,
    #[serde(default)]
    pub mc_samples: u64,
    #[serde(default)]
    pub seed: u64,
}

impl QuadSpec {
    pub fn gauss(orders: &[usize]) -> Self {
        Self {
            rule: Rule::Auto,
            orders: orders.to_vec(),
            mc_samples: 0,
            seed: 0,
        }
    }

    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        Self {
            rule: Rule::HaarMc,
            orders: vec![32],
            mc_samples: samples,
            seed,
        }
    }

    fn order(&self, i: usize) -> Result<usize> {
        let k = self
            .orders
            .get(i)
            .or(self.orders.first())
            .copied()
            .ok_or_else(|| Error::Domain("quadrature orders are empty".into()))?;
        if k == 0 || k > MAX_GAUSS_ORDER {
            return Err(Error::Domain(format!(
                "requested order {k} outside the stable range 1..={MAX_GAUSS_ORDER}"
            )));
        }
        Ok(k)
    }

    /// Copy with every order doubled.
    pub fn doubled(&self) -> Self {
        Self {
            orders: self.orders.iter().map(|k| 2 * k).collect(),
            ..self.clone()
        }
    }
}

/// Integral estimate, with per-coefficient standard errors for Monte Carlo.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: Grassmann,
    pub stderr: Option<Vec<f64>>,
}

impl Estimate {
    pub fn exact(value: Grassmann) -> Self {
        Self {
            value,
            stderr: None,
        }
    }

    /// Standard error of the coefficient at `mask` (zero for deterministic rules).
    pub fn stderr_at(&self, mask: usize) -> f64 {
        self.stderr.as_ref().map(|s| s[mask]).unwrap_or(0.0)
    }
}

/// Nodes and weights of a one-dimensional Gaussian rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Orthonormal polynomial values `p_0..p_{n}` and `p_n'` at `x` for the Jacobi
/// recurrence `b_{k+1} p_{k+1} = (x − a_k) p_k − b_k p_{k−1}`.
fn orthonormal(x: f64, a: &[f64], b: &[f64], mu0: f64, n: usize) -> (Vec<f64>, f64) {
    let mut p = vec![0.0; n + 1];
    let mut dp = vec![0.0; n + 1];
    p[0] = 1.0 / mu0.sqrt();
    for k in 0..n {
        let prev = if k > 0 { p[k - 1] } else { 0.0 };
        let dprev = if k > 0 { dp[k - 1] } else { 0.0 };
        let bk = if k > 0 { b[k] } else { 0.0 };
        p[k + 1] = ((x - a[k]) * p[k] - bk * prev) / b[k + 1];
        dp[k + 1] = (p[k] + (x - a[k]) * dp[k] - bk * dprev) / b[k + 1];
    }
    let d = dp[n];
    (p, d)
}

/// Golub–Welsch nodes, Newton-polished, with Christoffel weights.
/// `a` has length `n`, `b` has length `n + 1` with `b[0]` unused.
fn gauss_from_jacobi(a: &[f64], b: &[f64], mu0: f64) -> GaussRule {
    let n = a.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        j[(k, k)] = a[k];
        if k + 1 < n {
            j[(k, k + 1)] = b[k + 1];
            j[(k + 1, k)] = b[k + 1];
        }
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(j).eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, d) = orthonormal(*x, a, b, mu0, n);
            if d != 0.0 {
                *x -= p[n] / d;
            }
        }
        let (p, _) = orthonormal(*x, a, b, mu0, n);
        let s: f64 = p[..n].iter().map(|v| v * v).sum();
        weights.push(1.0 / s);
    }
    GaussRule { nodes, weights }
}

/// Generalised Gauss–Laguerre rule for `∫₀^∞ t^α e^{−t} f(t) dt`, `α > −1`.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Result<GaussRule> {
    if n == 0 || n > MAX_GAUSS_ORDER {
        return Err(Error::Domain(format!(
            "Laguerre order {n} outside 1..={MAX_GAUSS_ORDER}"
        )));
    }
    if alpha <= -1.0 {
        return Err(Error::Domain(format!(
            "Laguerre exponent {alpha} must exceed -1"
        )));
    }
    let a: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let b: Vec<f64> = (0..=n)
        .map(|k| (k as f64 * (k as f64 + alpha)).sqrt())
        .collect();
    let mu0 = ln_gamma_signed(alpha + 1.0).0.exp();
    Ok(gauss_from_jacobi(&a, &b, mu0))
}

/// Gauss–Hermite rule for `∫_ℝ e^{−x²} f(x) dx`.
pub fn gauss_hermite(n: usize) -> Result<GaussRule> {
    if n == 0 || n > MAX_GAUSS_ORDER {
        return Err(Error::Domain(format!(
            "Hermite order {n} outside 1..={MAX_GAUSS_ORDER}"
        )));
    }
    let a = vec![0.0; n];
    let b: Vec<f64> = (0..=n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut r = gauss_from_jacobi(&a, &b, PI.sqrt());
    // Symmetrise: the rule is exactly even.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (r.nodes[j] - r.nodes[i]);
        let w = 0.5 * (r.weights[i] + r.weights[j]);
        r.nodes[i] = -x;
        r.nodes[j] = x;
        r.weights[i] = w;
        r.weights[j] = w;
    }
    if n % 2 == 1 {
        r.nodes[n / 2] = 0.0;
    }
    Ok(r)
}

/// Nodes `u = √(t/s)` and weights for `∫₀^∞ u^{2α+1} e^{−s u²} G(u) du`
/// with `G` even in `u`: the Laguerre rule in `t = s u²`. For complex `s`,
/// `Re s > 0`, the ray is rotated to `arg u = −arg(s)/2`; the rule stays
/// exact on polynomials since the integrand is holomorphic in the sector.
///
/// Integrands on the cone are invariant under negating a row of `R` together
/// with its Hermite variables, so after the inner Gaussian rules only the
/// even part in each `u_j` survives.
fn half_line_rule(n: usize, alpha: f64, s: Complex64) -> Result<Vec<(Complex64, Complex64)>> {
    let r = gauss_laguerre(n, alpha)?;
    let c = (s.powf(alpha + 1.0) * 2.0).inv();
    Ok(r.nodes
        .iter()
        .zip(&r.weights)
        .map(|(t, w)| ((Complex64::new(*t, 0.0) / s).sqrt(), c * w))
        .collect())
}

/// Decay data for cone integration: the integrand is expected to behave like
/// `∏ u_j^{2(α_j + j)} e^{−tr(a z)}` times a polynomial in the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeWeight {
    pub decay: CMat<f64>,
    pub alpha: Vec<f64>,
}

impl ConeWeight {
    pub fn new(decay: CMat<f64>, alpha: Vec<f64>) -> Result<Self> {
        if decay.rows != alpha.len() || decay.cols != alpha.len() {
            return Err(Error::Format("cone weight shapes".into()));
        }
        Ok(Self { decay, alpha })
    }

    /// Unit decay with Laguerre exponents `α_j = m_j − j` (one-based `j`).
    pub fn for_exponents(m: &[f64]) -> Self {
        let p = m.len();
        Self {
            decay: CMat::identity(p),
            alpha: m
                .iter()
                .enumerate()
                .map(|(j, v)| v - (j + 1) as f64)
                .collect(),
        }
    }

    pub fn with_decay(mut self, decay: CMat<f64>) -> Self {
        self.decay = decay;
        self
    }
}

/// Cholesky-type parametrisation `z = R*R`, `R` upper triangular with
/// diagonal `u_j > 0` and off-diagonal entries `u_jk`.
pub fn herm_param(diag: &[f64], off: &[Complex64]) -> CMat<f64> {
    let p = diag.len();
    let mut r = CMat::zeros(p, p);
    let mut idx = 0;
    for j in 0..p {
        r.set(j, j, Complex64::new(diag[j], 0.0));
        for k in j + 1..p {
            r.set(j, k, off[idx]);
            idx += 1;
        }
    }
    r.adjoint().mul(&r)
}

/// Density of `|det z|^{−p}|dz|` in the coordinates `(u_j, Re u_jk, Im u_jk)`:
/// `2^p ∏ u_j^{−2j+1}`.
pub fn herm_weight(diag: &[f64]) -> f64 {
    let p = diag.len();
    let mut w = 2f64.powi(p as i32);
    for (j, u) in diag.iter().enumerate() {
        w *= u.powi(-2 * (j as i32 + 1) + 1);
    }
    w
}

/// Normalisation of the Lebesgue measure on `Herm(p)` taken from the trace
/// form: an orthonormal basis scales each off-diagonal real coordinate by √2.
pub fn herm_lebesgue_scale(p: usize) -> f64 {
    2f64.powi((p * p.saturating_sub(1) / 2) as i32)
}

/// One row of `R` at a quadrature point: `u_j`, the entries right of the
/// diagonal, their conjugate partners and the weight.
struct RowPoint {
    u: Complex64,
    v: Vec<Complex64>,
    v_bar: Vec<Complex64>,
    w: Complex64,
}

/// Quadrature points `(z, weight)` for `∫_{Herm⁺(p)} h(z) |dz| / |det z|^p`,
/// exact for `h = e^{−tr(az)} × polynomial × ∏ u_j^{2(α_j + j)}`.
///
/// With `z = R*R`, `tr(az) = Σ_j r_j a r_j*` splits over the rows `r_j` of
/// `R`. For non-Hermitian `a` the integrand is continued holomorphically in
/// `u_j` and in the real and imaginary parts of the off-diagonal entries,
/// which makes `r_j*` an independent variable; the cycle is then rotated so
/// that each Gaussian factor becomes real. The points `z` are then complex
/// symmetric rather than Hermitian, and the weights complex.
pub fn cone_points(
    p: usize,
    weight: &ConeWeight,
    spec: &QuadSpec,
) -> Result<Vec<(CMat<f64>, Complex64)>> {
    if weight.alpha.len() != p {
        return Err(Error::Format("cone weight rank".into()));
    }
    if p == 0 {
        return Ok(vec![(CMat::zeros(0, 0), Complex64::new(1.0, 0.0))]);
    }
    let n_lag = spec.order(0)?;
    let n_her = spec.order(1)?;
    let herm = gauss_hermite(n_her)?;
    let a = &weight.decay;
    a.hermitian_part().cholesky().map_err(|_| {
        Error::Domain("decay matrix must have a positive-definite Hermitian part".into())
    })?;
    let i = Complex64::new(0.0, 1.0);

    let mut rows: Vec<Vec<RowPoint>> = Vec::with_capacity(p);
    for j in 0..p {
        let r = p - 1 - j;
        let ajj = a.at(j, j);
        // Completing the square: r_j a r_j* = s u² + (v + u c) a_rr (v̄ + u d).
        let (s, c, d, l_inv_t, det_l) = if r == 0 {
            (
                ajj,
                Vec::new(),
                Vec::new(),
                CMat::zeros(0, 0),
                Complex64::new(1.0, 0.0),
            )
        } else {
            let arr = a.block(j + 1, p, j + 1, p);
            let arr_inv = arr.inverse()?;
            let c = a.block(j, j + 1, j + 1, p).mul(&arr_inv);
            let d = arr_inv.mul(&a.block(j + 1, p, j, j + 1));
            let s = ajj - c.mul(&a.block(j + 1, p, j, j + 1)).at(0, 0);
            // v a_rr v̄ = ξᵀ M ξ in ξ = (Re v, Im v).
            let mut m = CMat::zeros(2 * r, 2 * r);
            for k in 0..r {
                for l in 0..r {
                    let sym = (arr.at(k, l) + arr.at(l, k)) * 0.5;
                    let b = i * (arr.at(l, k) - arr.at(k, l)) * 0.5;
                    m.set(k, l, sym);
                    m.set(r + k, r + l, sym);
                    m.set(k, r + l, b);
                    m.set(r + l, k, b);
                }
            }
            let l = m.cholesky_symmetric()?;
            let det_l: Complex64 = (0..2 * r).map(|k| l.at(k, k)).product();
            (s, c.data, d.data, l.transpose().inverse()?, det_l)
        };
        if s.re <= 0.0 {
            return Err(Error::Domain(
                "decay matrix is not positive definite".into(),
            ));
        }
        let alpha = weight.alpha[j];
        let u_pow = -2.0 * (j as f64 + 1.0) - 2.0 * alpha;
        let half = half_line_rule(n_lag, alpha, s)?;
        let n_g = n_her.pow(2 * r as u32);
        let mut pts = Vec::with_capacity(half.len() * n_g);
        for &(u, wu) in &half {
            for gi in 0..n_g {
                let mut eta = CMat::zeros(2 * r, 1);
                let mut wg = 1.0;
                let mut eta2 = 0.0;
                let mut idx = gi;
                for k in 0..2 * r {
                    let x = herm.nodes[idx % n_her];
                    wg *= herm.weights[idx % n_her];
                    idx /= n_her;
                    eta2 += x * x;
                    eta.set(k, 0, Complex64::new(x, 0.0));
                }
                let xi = l_inv_t.mul(&eta);
                let v = (0..r)
                    .map(|k| xi.at(k, 0) + i * xi.at(r + k, 0) - u * c[k])
                    .collect();
                let v_bar = (0..r)
                    .map(|k| xi.at(k, 0) - i * xi.at(r + k, 0) - u * d[k])
                    .collect();
                let w = wu * wg * u.powf(u_pow) * (s * u * u + eta2).exp() / det_l * 2.0;
                pts.push(RowPoint { u, v, v_bar, w });
            }
        }
        rows.push(pts);
    }

    let scale = herm_lebesgue_scale(p);
    let total: usize = rows.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut r_mat = CMat::zeros(p, p);
        let mut r_bar = CMat::zeros(p, p);
        let mut w = Complex64::new(scale, 0.0);
        for (j, row) in rows.iter().enumerate() {
            let pt = &row[idx % row.len()];
            idx /= row.len();
            r_mat.set(j, j, pt.u);
            r_bar.set(j, j, pt.u);
            for (k, (v, vb)) in pt.v.iter().zip(&pt.v_bar).enumerate() {
                r_mat.set(j, j + 1 + k, *v);
                r_bar.set(j + 1 + k, j, *vb);
            }
            w *= pt.w;
        }
        out.push((r_bar.mul(&r_mat), w));
    }
    Ok(out)
}

/// `∫_{Herm⁺(p)} h(z) |dz| / |det z|^p`.
pub fn cone_integrate<F>(p: usize, weight: &ConeWeight, spec: &QuadSpec, h: F) -> Result<Grassmann>
where
    F: Fn(&CMat<f64>) -> Result<Grassmann> + Sync,
{
    let pts = cone_points(p, weight, spec)?;
    let vals = pts
        .par_iter()
        .map(|(z, w)| h(z).map(|g| g.scale(*w)))
        .collect::<Result<Vec<_>>>()?;
    pairwise_sum(vals).ok_or_else(|| Error::Numerical("empty quadrature".into()))
}

/// Nodes of the normalised trapezoid rule on `U(1)`.
pub fn circle_points(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect()
}

/// `∫_{U(1)} f(w) dw` for the Haar probability measure.
pub fn u1_integrate<F>(spec: &QuadSpec, f: F) -> Result<Grassmann>
where
    F: Fn(Complex64) -> Result<Grassmann> + Sync,
{
    let n = spec
        .orders
        .first()
        .copied()
        .ok_or_else(|| Error::Domain("circle rule needs a node count".into()))?;
    if n == 0 {
        return Err(Error::Domain("circle rule needs at least one node".into()));
    }
    let wt = 1.0 / n as f64;
    let vals = circle_points(n)
        .par_iter()
        .map(|w| f(*w).map(|g| g.scale_real(wt)))
        .collect::<Result<Vec<_>>>()?;
    pairwise_sum(vals).ok_or_else(|| Error::Numerical("empty quadrature".into()))
}

/// Haar-distributed unitary from a complex Ginibre matrix by modified
/// Gram–Schmidt; `R` then has a positive diagonal, which fixes the phases.
pub fn haar_unitary<R: rand::Rng>(q: usize, rng: &mut R) -> CMat<f64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut cols: Vec<Vec<Complex64>> = (0..q)
        .map(|_| {
            (0..q)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    Complex64::new(re * scale, im * scale)
                })
                .collect()
        })
        .collect();
    for j in 0..q {
        for k in 0..j {
            let proj: Complex64 = (0..q).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..q {
                let v = cols[k][i] * proj;
                cols[j][i] -= v;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    let mut u = CMat::zeros(q, q);
    for (j, col) in cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            u.set(i, j, *z);
        }
    }
    u
}

/// Fixed-order pairwise reduction; independent of thread scheduling.
pub fn pairwise_sum(mut v: Vec<Grassmann>) -> Option<Grassmann> {
    if v.is_empty() {
        return None;
    }
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        let mut it = v.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        v = next;
    }
    v.pop()
}

fn moments_sum(mut v: Vec<(Grassmann, Vec<f64>)>) -> (Grassmann, Vec<f64>) {
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        let mut it = v.into_iter();
        while let Some((a, sa)) = it.next() {
            match it.next() {
                Some((b, sb)) => {
                    let s = sa.iter().zip(&sb).map(|(x, y)| x + y).collect();
                    next.push((a + b, s));
                }
                None => next.push((a, sa)),
            }
        }
        v = next;
    }
    v.pop().expect("at least one batch")
}

/// Monte Carlo estimate of `∫_{U(q)} f(w) dw` with one ChaCha stream per
/// batch of [`MC_BATCH`] samples; bitwise reproducible for any thread count.
pub fn haar_mc<F>(q: usize, samples: u64, seed: u64, f: F) -> Result<Estimate>
where
    F: Fn(&CMat<f64>) -> Result<Grassmann> + Sync,
{
    if samples < 2 {
        return Err(Error::Domain(
            "Monte Carlo needs at least two samples".into(),
        ));
    }
    let batches = samples.div_ceil(MC_BATCH);
    let parts = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            let mut sum: Option<Grassmann> = None;
            let mut sq: Vec<f64> = Vec::new();
            for _ in 0..count {
                let w = haar_unitary(q, &mut rng);
                let v = f(&w)?;
                if sq.is_empty() {
                    sq = vec![0.0; v.coeffs().len()];
                }
                for (s, z) in sq.iter_mut().zip(v.coeffs()) {
                    *s += z.norm_sqr();
                }
                sum = Some(match sum {
                    Some(acc) => acc + v,
                    None => v,
                });
            }
            Ok((sum.expect("non-empty batch"), sq))
        })
        .collect::<Result<Vec<_>>>()?;
    let (sum, sq) = moments_sum(parts);
    let nf = samples as f64;
    let mean = sum.scale_real(1.0 / nf);
    let stderr = mean
        .coeffs()
        .iter()
        .zip(&sq)
        .map(|(m, s)| {
            let var = (s / nf - m.norm_sqr()).max(0.0) * nf / (nf - 1.0);
            (var / nf).sqrt()
        })
        .collect();
    Ok(Estimate {
        value: mean,
        stderr: Some(stderr),
    })
}

/// `∫_{U(q)} f(w) dw` for the Haar probability measure, dispatching on `q`
/// and the rule.
pub fn unitary_integrate<F>(q: usize, spec: &QuadSpec, f: F) -> Result<Estimate>
where
    F: Fn(&CMat<f64>) -> Result<Grassmann> + Sync,
{
    let mc = match spec.rule {
        Rule::HaarMc => true,
        Rule::Trapezoid | Rule::Gauss => false,
        Rule::Auto => q >= 2,
    };
    if q == 0 {
        return Ok(Estimate::exact(f(&CMat::zeros(0, 0))?));
    }
    if mc {
        return haar_mc(q, spec.mc_samples, spec.seed, f);
    }
    if q != 1 {
        return Err(Error::Domain(format!(
            "deterministic rule on U({q}) is not available; use haar-mc"
        )));
    }
    let v = u1_integrate(spec, |w| f(&CMat::from_vec(1, 1, vec![w])))?;
    Ok(Estimate::exact(v))
}

/// `∫_{Herm⁺(p) × U(q)} F(z, w) |dz|/|det z|^p dw`.
pub fn product_integrate<F>(
    p: usize,
    q: usize,
    cone: &ConeWeight,
    cone_spec: &QuadSpec,
    unitary_spec: &QuadSpec,
    f: F,
) -> Result<Estimate>
where
    F: Fn(&CMat<f64>, &CMat<f64>) -> Result<Grassmann> + Sync,
{
    let pts = cone_points(p, cone, cone_spec)?;
    let inner = |w: &CMat<f64>| -> Result<Grassmann> {
        let vals = pts
            .iter()
            .map(|(z, wt)| f(z, w).map(|g| g.scale(*wt)))
            .collect::<Result<Vec<_>>>()?;
        pairwise_sum(vals).ok_or_else(|| Error::Numerical("empty quadrature".into()))
    };
    unitary_integrate(q, unitary_spec, inner)
}

/// `∫_{ℂ^d} h(a, ā) dA` (Lebesgue in real and imaginary parts) for
/// integrands `e^{−ā·M a}` times a polynomial, `M` with positive-definite
/// Hermitian part. `h` is continued holomorphically in `(Re a, Im a)`, so it
/// receives `ā` as an independent argument; the cycle is rotated so that the
/// Gaussian factor is real, and the Gauss–Hermite rule runs there.
pub fn gauss_flat_integrate<F>(
    d: usize,
    form: &CMat<f64>,
    spec: &QuadSpec,
    h: F,
) -> Result<Grassmann>
where
    F: Fn(&[Complex64], &[Complex64]) -> Result<Grassmann> + Sync,
{
    if form.rows != d || form.cols != d {
        return Err(Error::Format("quadratic form shape".into()));
    }
    if d == 0 {
        return h(&[], &[]);
    }
    let n = spec.order(0)?;
    let herm = gauss_hermite(n)?;
    form.hermitian_part().cholesky().map_err(|_| {
        Error::Domain("quadratic form must have a positive-definite Hermitian part".into())
    })?;
    let i = Complex64::new(0.0, 1.0);
    // ā·M a = ξᵀ S ξ in ξ = (Re a, Im a).
    let mut sym = CMat::zeros(2 * d, 2 * d);
    for k in 0..d {
        for l in 0..d {
            let even = (form.at(k, l) + form.at(l, k)) * 0.5;
            let cross = i * (form.at(k, l) - form.at(l, k)) * 0.5;
            sym.set(k, l, even);
            sym.set(d + k, d + l, even);
            sym.set(k, d + l, cross);
            sym.set(d + l, k, cross);
        }
    }
    let l = sym.cholesky_symmetric()?;
    let det_l: Complex64 = (0..2 * d).map(|k| l.at(k, k)).product();
    let l_inv_t = l.transpose().inverse()?;
    let jac = det_l.inv();
    let total = n.pow(2 * d as u32);
    let vals = (0..total)
        .into_par_iter()
        .map(|gi| {
            let mut idx = gi;
            let mut eta = CMat::zeros(2 * d, 1);
            let mut w = 1.0;
            let mut eta2 = 0.0;
            for k in 0..2 * d {
                let x = herm.nodes[idx % n];
                w *= herm.weights[idx % n];
                idx /= n;
                eta2 += x * x;
                eta.set(k, 0, Complex64::new(x, 0.0));
            }
            let xi = l_inv_t.mul(&eta);
            let a: Vec<Complex64> = (0..d).map(|k| xi.at(k, 0) + i * xi.at(d + k, 0)).collect();
            let a_bar: Vec<Complex64> = (0..d).map(|k| xi.at(k, 0) - i * xi.at(d + k, 0)).collect();
            h(&a, &a_bar).map(|g| g.scale(jac * w * eta2.exp()))
        })
        .collect::<Result<Vec<_>>>()?;
    pairwise_sum(vals).ok_or_else(|| Error::Numerical("empty quadrature".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    fn re(g: &Grassmann) -> f64 {
        g.body().re
    }

    #[test]
    fn laguerre_integrates_moments() {
        let r = gauss_laguerre(6, 0.5).unwrap();
        for k in 0..12 {
            let got: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(t, w)| w * t.powi(k))
                .sum();
            let want = gamma(k as f64 + 1.5);
            assert!((got / want - 1.0).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn hermite_integrates_moments() {
        let r = gauss_hermite(7).unwrap();
        for k in 0..14 {
            let got: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(t, w)| w * t.powi(k))
                .sum();
            let want = if k % 2 == 1 {
                0.0
            } else {
                gamma((k as f64 + 1.0) / 2.0)
            };
            assert!((got - want).abs() < 1e-12 * want.max(1.0), "k = {k}");
        }
    }

    #[test]
    fn order_range_is_enforced() {
        assert!(gauss_laguerre(0, 0.0).is_err());
        assert!(gauss_hermite(MAX_GAUSS_ORDER + 1).is_err());
        assert!(gauss_laguerre(4, -1.0).is_err());
    }

    #[test]
    fn parametrisation_examples() {
        assert_eq!(herm_weight(&[2.0]), 1.0);
        assert_eq!(herm_weight(&[1.0, 2.0]), 0.5);
        let z = herm_param(&[1.0, 1.0], &[Complex64::new(0.0, 1.0)]);
        assert_eq!(z.at(0, 1), Complex64::new(0.0, 1.0));
        assert_eq!(z.at(1, 0), Complex64::new(0.0, -1.0));
        assert_eq!(z.at(1, 1), Complex64::new(2.0, 0.0));
        assert!((z.det() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cone_gamma_integrals() {
        let spec = QuadSpec::gauss(&[4, 4]);
        // p = 1: ∫ z^{m−1} e^{−z} dz = Γ(m)
        let m = 3.5;
        let v = cone_integrate(1, &ConeWeight::for_exponents(&[m]), &spec, |z| {
            let t = z.at(0, 0);
            Ok(Grassmann::scalar(0, t.powf(m) * (-t).exp()))
        })
        .unwrap();
        assert!((re(&v) / gamma(m) - 1.0).abs() < 1e-12);
        // p = 2: ∫ e^{−tr z} det(z)^2 |dz| / det(z)^2 = 2π
        let v = cone_integrate(2, &ConeWeight::for_exponents(&[2.0, 2.0]), &spec, |z| {
            Ok(Grassmann::scalar(0, z.det().powi(2) * (-z.trace()).exp()))
        })
        .unwrap();
        assert!((re(&v) / (2.0 * PI) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cone_with_skew_decay_and_polynomial() {
        // ∫ e^{−tr(az)} det(z)^3 (1 + z_11) |dz| / det(z)^2 against the
        // doubled-order rule, with a non-diagonal decay matrix.
        let a = CMat::from_vec(
            2,
            2,
            vec![
                Complex64::new(1.5, 0.0),
                Complex64::new(0.3, 0.2),
                Complex64::new(0.3, -0.2),
                Complex64::new(0.8, 0.0),
            ],
        );
        let w = ConeWeight::for_exponents(&[3.0, 3.0]).with_decay(a.clone());
        let f = |z: &CMat<f64>| {
            let e = (-(a.mul(z).trace())).exp();
            Ok(Grassmann::scalar(
                0,
                z.det().powi(3) * (Complex64::new(1.0, 0.0) + z.at(0, 0)) * e,
            ))
        };
        let lo = cone_integrate(2, &w, &QuadSpec::gauss(&[4, 4]), f).unwrap();
        let hi = cone_integrate(2, &w, &QuadSpec::gauss(&[8, 8]), f).unwrap();
        assert!((re(&lo) / re(&hi) - 1.0).abs() < 1e-12);
        // Closed form: Γ_Ω(3,3) det(a)^{-3} · (1 + 3 (a^{-1})_{11}).
        let ainv = a.inverse().unwrap();
        let want = 2.0 * PI * gamma(3.0) * gamma(2.0) / a.det().re.powi(3)
            * (1.0 + 3.0 * ainv.at(0, 0).re);
        assert!((re(&hi) / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_residue() {
        let spec = QuadSpec::gauss(&[32]);
        let v = u1_integrate(&spec, |w| Ok(Grassmann::scalar(0, w.exp() / (w * w)))).unwrap();
        assert!((v.body() - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn flat_gaussians() {
        let spec = QuadSpec::gauss(&[6]);
        let id = CMat::identity(1);
        let v = gauss_flat_integrate(1, &id, &spec, |a, _| {
            Ok(Grassmann::real(0, (-a[0].norm_sqr()).exp()))
        })
        .unwrap();
        assert!((re(&v) - PI).abs() < 1e-13);
        let two = CMat::diag(&[Complex64::new(2.0, 0.0)]);
        let v = gauss_flat_integrate(1, &two, &spec, |a, _| {
            Ok(Grassmann::real(0, (-2.0 * a[0].norm_sqr()).exp()))
        })
        .unwrap();
        assert!((re(&v) - PI / 2.0).abs() < 1e-13);
        let v = gauss_flat_integrate(1, &id, &spec, |a, _| {
            Ok(Grassmann::real(
                0,
                a[0].norm_sqr() * (-a[0].norm_sqr()).exp(),
            ))
        })
        .unwrap();
        assert!((re(&v) - PI).abs() < 1e-13);
    }

    #[test]
    fn flat_gaussians_with_complex_decay() {
        let spec = QuadSpec::gauss(&[6]);
        // ∫ ā a e^{−c ā a} dA = π/c² for Re c > 0.
        let c = Complex64::new(1.0, 1.5);
        let v = gauss_flat_integrate(1, &CMat::diag(&[c]), &spec, |a, ab| {
            Ok(Grassmann::scalar(
                0,
                a[0] * ab[0] * (-c * a[0] * ab[0]).exp(),
            ))
        })
        .unwrap();
        assert!((v.body() - PI / (c * c)).norm() < 1e-12);
        // Non-normal 2×2: ∫ e^{−ā·M a} dA = π²/det M.
        let m = CMat::from_vec(
            2,
            2,
            vec![
                Complex64::new(1.0, 0.4),
                Complex64::new(0.3, 0.0),
                Complex64::new(-0.2, 0.5),
                Complex64::new(2.0, -0.7),
            ],
        );
        let det = m.at(0, 0) * m.at(1, 1) - m.at(0, 1) * m.at(1, 0);
        let v = gauss_flat_integrate(2, &m, &spec, |a, ab| {
            let e: Complex64 = (0..2)
                .flat_map(|k| (0..2).map(move |l| (k, l)))
                .map(|(k, l)| ab[k] * m.at(k, l) * a[l])
                .sum();
            Ok(Grassmann::scalar(0, (-e).exp()))
        })
        .unwrap();
        assert!((v.body() - PI * PI / det).norm() < 1e-12);
    }

    #[test]
    fn haar_second_moment() {
        // E|w_11|^2 = 1/q and E|tr w|^2 = 1.
        let est = haar_mc(2, 20_000, 7, |w| {
            Ok(Grassmann::real(0, w.trace().norm_sqr()))
        })
        .unwrap();
        assert!((re(&est.value) - 1.0).abs() < 4.0 * est.stderr_at(0) + 1e-3);
        let est = haar_mc(3, 20_000, 7, |w| {
            Ok(Grassmann::real(0, w.at(0, 0).norm_sqr()))
        })
        .unwrap();
        assert!((re(&est.value) - 1.0 / 3.0).abs() < 4.0 * est.stderr_at(0) + 1e-3);
    }

    #[test]
    fn haar_is_seed_deterministic() {
        let f = |w: &CMat<f64>| Ok(Grassmann::scalar(0, w.det()));
        let a = haar_mc(2, 3000, 11, f).unwrap();
        let b = haar_mc(2, 3000, 11, f).unwrap();
        assert_eq!(a, b);
        let c = haar_mc(2, 3000, 12, f).unwrap();
        assert_ne!(a, c);
    }
}
