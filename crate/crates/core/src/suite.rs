//! Verification cases, their JSON configuration and the default grid.
//!
//! Every case produces a [`Report`]; a suite runs a list of cases and keeps
//! the per-case outcome, including errors, so that one bad case does not hide
//! the others.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::Parity;
use crate::quadrature::{Estimate, QuadSpec};
use crate::report::{Comparison, Report, Tolerance};
use crate::riesz::{
    fermionic_closed, gamma_closed, gamma_fermionic_exact, gamma_numeric, invariance_check,
    laplace_conical, laplace_conical_closed, q_norm, riesz_t, shift_check, unitary_sector_integral,
    Family, OmegaSpec, ShiftDomain,
};
use crate::sampling::{
    random_big_cell, random_borel, random_even_nilpotent, random_family_element, random_grassmann,
};
use crate::sbos::{
    cauchy_coefficient, compare_sides, gaussian_norm_check, identity_sides, lhs_closed,
    lhs_pairing, verify_identity, SbosSpec,
};
use crate::superexpr::{Slot, SuperExpr};
use crate::superfourier::{fourier_suite, Grid};
use crate::supermatrix::{chi_m, Format, MultiIndex, SuperMatrix};
use crate::{Complex64, Grassmann, SMatrix};

pub const DEFAULT_MC_SAMPLES: u64 = 1_000_000;

/// Monte Carlo runs fail unless `σ ≤ DEFAULT_MAX_REL_STDERR·|reference|`.
pub const DEFAULT_MAX_REL_STDERR: f64 = 1.0;

/// Relative tolerance for Monte Carlo agreement, used with a 4σ allowance.
pub const MC_REL_TOL: f64 = 0.02;
pub const MC_SIGMAS: f64 = 4.0;

/// Suite configuration. Every field has a default, so `{}` is the default
/// grid and `{"cases": []}` is the empty suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(default)]
    pub omega: OmegaSpec,
    /// Gauss–Hermite rule on the flat side of the bosonisation identity.
    #[serde(default = "default_flat")]
    pub flat: QuadSpec,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_rel_stderr")]
    pub max_rel_stderr: Option<f64>,
    /// Overrides every case tolerance when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default = "default_cases")]
    pub cases: Vec<CaseSpec>,
}

fn default_flat() -> QuadSpec {
    SbosSpec::default().flat
}

fn default_mc_samples() -> u64 {
    DEFAULT_MC_SAMPLES
}

fn default_max_rel_stderr() -> Option<f64> {
    Some(DEFAULT_MAX_REL_STDERR)
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            omega: OmegaSpec::default(),
            flat: default_flat(),
            grid: Grid::default(),
            mc_samples: DEFAULT_MC_SAMPLES,
            seed: 0,
            max_rel_stderr: default_max_rel_stderr(),
            tol: None,
            cases: default_cases(),
        }
    }
}

impl SuiteConfig {
    /// The same quadrature settings with a different case list.
    pub fn with_cases(&self, cases: Vec<CaseSpec>) -> Self {
        Self {
            cases,
            ..self.clone()
        }
    }

    fn omega_spec(&self) -> OmegaSpec {
        self.omega.clone().with_mc(self.mc_samples, self.seed)
    }

    fn sbos_spec(&self) -> SbosSpec {
        SbosSpec {
            flat: self.flat.clone(),
            omega: self.omega_spec(),
        }
    }

    fn relative(&self, default: f64) -> Tolerance {
        Tolerance::Relative {
            tol: self.tol.unwrap_or(default),
        }
    }

    fn absolute(&self, default: f64) -> Tolerance {
        Tolerance::Absolute {
            tol: self.tol.unwrap_or(default),
        }
    }

    fn monte_carlo(&self) -> Tolerance {
        Tolerance::MonteCarlo {
            rel: self.tol.unwrap_or(MC_REL_TOL),
            sigmas: MC_SIGMAS,
            max_rel_stderr: self.max_rel_stderr,
        }
    }
}

/// A case with the acceptance criterion it belongs to, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u32>,
    #[serde(flatten)]
    pub case: Case,
}

/// Property checked by a [`Case::Fuzz`] run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    GradedCommutativity,
    BerMultiplicative,
    StrCyclic,
    Conical,
    LduReconstruction,
}

/// One verification. Matrices use the text syntax of [`parse_matrix`];
/// expressions use the prefix syntax of [`SuperExpr::from_prefix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Case {
    /// `Γ_Ω(m)` by quadrature against the closed form.
    Gamma {
        p: usize,
        q: usize,
        m: Vec<f64>,
    },
    /// Flat side against `√π^{np}/Γ_Ω(n𝟙)·⟨T_n, f⟩`; `f` defaults to the
    /// Laplace kernel of `x`.
    Sbos {
        p: usize,
        q: usize,
        n: usize,
        x: String,
        #[serde(default)]
        odd_params: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f: Option<String>,
    },
    /// `p = 0`, `q = 1`, `f = w^k`: the flat side against `n! δ_kn`.
    Bosonisation {
        n: usize,
        k: u32,
    },
    /// `q = 0`: `⟨T_n, e^{−tr(x·)}⟩` against `Γ_Ω(n𝟙) det(x)^{−n}`.
    Riesz {
        p: usize,
        n: usize,
        x: String,
    },
    GaussianNorm {
        p: usize,
        q: usize,
        n: usize,
    },
    /// `L(Δ_m)(x⁻¹)` against `Γ_Ω(m) Δ_m(x)`.
    Laplace {
        p: usize,
        q: usize,
        m: Vec<f64>,
        x: String,
        #[serde(default)]
        odd_params: usize,
    },
    /// Brute-force Berezin integral of the fermionic factor against its product form.
    FermionicGamma {
        p: usize,
        q: usize,
        m: Vec<i64>,
    },
    /// `∫_{U(q)} conical integrand` against `1/q_n`.
    UnitarySector {
        m: Vec<i64>,
    },
    /// Random group elements of one family at `p = q = 1`.
    Invariance {
        family: Family,
        count: usize,
        #[serde(default = "two")]
        odd_params: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f: Option<String>,
    },
    /// `ϱ` against its Berezinian form on random big-cell matrices.
    Vrho {
        p: usize,
        q: usize,
        count: usize,
        #[serde(default = "four")]
        n_gen: usize,
    },
    /// Random even nilpotent shifts of the integration cycle.
    Shift {
        domain: ShiftDomain,
        count: usize,
        #[serde(default = "four")]
        n_gen: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f: Option<String>,
    },
    /// Inversion, derivative rules, convolution, Parseval and modulation.
    Fourier {
        p: usize,
        q: usize,
    },
    /// Algebraic identities on random instances; reports the worst instance.
    Fuzz {
        property: Property,
        count: usize,
        #[serde(default = "four")]
        n_gen: usize,
    },
}

fn two() -> usize {
    2
}

fn four() -> usize {
    4
}

impl Case {
    pub fn kind(&self) -> &'static str {
        match self {
            Case::Gamma { .. } => "gamma",
            Case::Sbos { .. } => "sbos",
            Case::Bosonisation { .. } => "bosonisation",
            Case::Riesz { .. } => "riesz",
            Case::GaussianNorm { .. } => "gaussian-norm",
            Case::Laplace { .. } => "laplace",
            Case::FermionicGamma { .. } => "fermionic-gamma",
            Case::UnitarySector { .. } => "unitary-sector",
            Case::Invariance { .. } => "invariance",
            Case::Vrho { .. } => "vrho",
            Case::Shift { .. } => "shift",
            Case::Fourier { .. } => "fourier",
            Case::Fuzz { .. } => "fuzz",
        }
    }
}

/// Parses a supermatrix of format `(p|q)` over `n_gen` generators.
///
/// `diag:a,b,…` gives a diagonal matrix; otherwise rows are separated by `;`
/// and entries by `,`. An entry is a sum of terms `c` or `c*tItJ…`, where
/// `c` is `re` or `re:im` and `tI` is the generator `θ_I` (one-based).
pub fn parse_matrix(text: &str, p: usize, q: usize, n_gen: usize) -> Result<SMatrix> {
    let f = Format::new(p, q);
    let d = f.dim();
    let text = text.trim();
    let entries: Vec<Grassmann> = if let Some(rest) = text.strip_prefix("diag:") {
        let diag: Vec<&str> = rest.split(',').collect();
        if diag.len() != d {
            return Err(Error::Parse(format!(
                "diag needs {d} entries, got {}",
                diag.len()
            )));
        }
        let mut out = vec![Grassmann::zero(n_gen); d * d];
        for (i, e) in diag.iter().enumerate() {
            out[i * d + i] = parse_entry(e, n_gen)?;
        }
        out
    } else {
        let rows: Vec<&str> = text.split(';').collect();
        if rows.len() != d {
            return Err(Error::Parse(format!(
                "expected {d} rows, got {}",
                rows.len()
            )));
        }
        let mut out = Vec::with_capacity(d * d);
        for r in rows {
            let cells: Vec<&str> = r.split(',').collect();
            if cells.len() != d {
                return Err(Error::Parse(format!(
                    "expected {d} entries per row, got {}",
                    cells.len()
                )));
            }
            for c in cells {
                out.push(parse_entry(c, n_gen)?);
            }
        }
        out
    };
    SuperMatrix::new(f, f, entries)
}

fn parse_entry(text: &str, n_gen: usize) -> Result<Grassmann> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Parse("empty matrix entry".into()));
    }
    // Split on `+` except in exponents and at the start.
    let mut terms = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    for i in 1..bytes.len() {
        if bytes[i] == b'+' && !matches!(bytes[i - 1], b'e' | b'E' | b':') {
            terms.push(&text[start..i]);
            start = i + 1;
        }
    }
    terms.push(&text[start..]);
    let mut sum = Grassmann::zero(n_gen);
    for t in terms {
        sum += &parse_term(t.trim(), n_gen)?;
    }
    Ok(sum)
}

fn parse_term(text: &str, n_gen: usize) -> Result<Grassmann> {
    let (coef, mono) = match text.split_once('*') {
        Some((c, m)) => (c, Some(m)),
        None => (text, None),
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("`{s}` is not a number")))
    };
    let c = match coef.split_once(':') {
        Some((re, im)) => Complex64::new(num(re)?, num(im)?),
        None => Complex64::new(num(coef)?, 0.0),
    };
    let mut g = Grassmann::scalar(n_gen, c);
    if let Some(m) = mono {
        let m = m.trim();
        if !m.starts_with('t') {
            return Err(Error::Parse(format!("monomial `{m}` must look like t1t2")));
        }
        for idx in m.split('t').skip(1) {
            let j: usize = idx
                .parse()
                .map_err(|_| Error::Parse(format!("bad generator index in `{m}`")))?;
            if j == 0 || j > n_gen {
                return Err(Error::Parse(format!(
                    "generator t{j} needs 1 ≤ index ≤ {n_gen} (see --odd-params)"
                )));
            }
            g = g.try_mul(&Grassmann::generator(n_gen, j - 1)?)?;
        }
    }
    Ok(g)
}

fn parse_expr(f: &Option<String>, default: SuperExpr) -> Result<SuperExpr> {
    match f {
        Some(text) => SuperExpr::from_prefix(text),
        None => Ok(default),
    }
}

fn exact(g: Grassmann) -> Estimate {
    Estimate::exact(g)
}

/// Worst instance by maximal relative error.
fn worst(label: &str, pairs: Vec<(Grassmann, Grassmann)>, tol: Tolerance) -> Result<Comparison> {
    let mut best: Option<Comparison> = None;
    let count = pairs.len();
    for (a, b) in pairs {
        let c = Comparison::new(
            format!("{label} (worst of {count})"),
            &exact(a),
            &b,
            "identity",
            tol,
        )?;
        if best
            .as_ref()
            .map_or(true, |w| c.max_rel_err() > w.max_rel_err())
        {
            best = Some(c);
        }
    }
    best.ok_or_else(|| Error::Domain("count must be positive".into()))
}

/// Runs one case.
pub fn run_case(case: &Case, cfg: &SuiteConfig) -> Result<Report> {
    let inputs = serde_json::to_value(case).expect("cases serialise");
    let none = BTreeMap::new();
    let comps: Vec<Comparison> = match case {
        Case::Gamma { p, q, m } => {
            let m = MultiIndex::new(*p, *q, m.clone())?;
            let spec = cfg.omega_spec();
            let closed = gamma_closed(&m);
            let want = closed
                .value
                .ok_or_else(|| Error::Domain("Γ_Ω has a pole at m".into()))?;
            let got = gamma_numeric(&m, &spec)?;
            let tol = if got.stderr.is_some() {
                cfg.monte_carlo()
            } else {
                cfg.relative(1e-6)
            };
            vec![Comparison::new(
                "gamma",
                &got,
                &Grassmann::real(0, want),
                "closed-form",
                tol,
            )?]
        }
        Case::Sbos {
            p,
            q,
            n,
            x,
            odd_params,
            f,
        } => {
            let x = parse_matrix(x, *p, *q, *odd_params)?;
            let closed = match f {
                None => Some(lhs_closed(*p, *q, *n, &x)?),
                Some(_) => None,
            };
            let f = parse_expr(f, SuperExpr::laplace_kernel(x))?;
            let spec = cfg.sbos_spec();
            let mc = *q >= 2;
            let tol = if mc {
                cfg.monte_carlo()
            } else {
                cfg.relative(1e-6)
            };
            let (lhs, rhs) = identity_sides(*p, *q, *n, &f, *odd_params, &none, &spec)?;
            let mut out = vec![compare_sides(&lhs, &rhs, tol)?];
            if let Some(c) = closed {
                out.push(Comparison::new(
                    "flat-vs-closed",
                    &exact(lhs),
                    &c,
                    "closed-form",
                    cfg.relative(1e-10),
                )?);
            }
            out
        }
        Case::Bosonisation { n, k } => {
            let f = SuperExpr::pow(*k as f64, SuperExpr::det(SuperExpr::Slot(Slot::W)));
            let lhs = lhs_pairing(0, 1, *n, &f, 0, &none, &cfg.flat)?;
            let want = Grassmann::real(0, cauchy_coefficient(*n as u64, *k as u64));
            let tol = cfg.absolute(1e-12);
            vec![
                Comparison::new(
                    "flat-vs-cauchy",
                    &exact(lhs),
                    &want,
                    "cauchy-coefficient",
                    tol,
                )?,
                verify_identity(0, 1, *n, &f, 0, &none, &cfg.sbos_spec(), tol)?,
            ]
        }
        Case::Riesz { p, n, x } => {
            let x = parse_matrix(x, *p, 0, 0)?;
            let g = gamma_closed(&MultiIndex::constant(*p, 0, *n as i64))
                .value
                .ok_or_else(|| Error::Domain("Γ_Ω(n𝟙) has a pole".into()))?;
            let want = x.ber()?.powi(-(*n as i64))?.scale_real(g);
            let f = SuperExpr::laplace_kernel(x);
            let got = riesz_t(*p, 0, *n as i64, &f, 0, &none, &cfg.omega_spec())?;
            vec![Comparison::new(
                "riesz-laplace",
                &got,
                &want,
                "closed-form",
                cfg.relative(1e-6),
            )?]
        }
        Case::GaussianNorm { p, q, n } => {
            return gaussian_norm_check(*p, *q, *n, &cfg.flat, cfg.tol.unwrap_or(1e-10));
        }
        Case::Laplace {
            p,
            q,
            m,
            x,
            odd_params,
        } => {
            let m = MultiIndex::new(*p, *q, m.clone())?;
            let x = parse_matrix(x, *p, *q, *odd_params)?;
            let got = laplace_conical(&m, &x, &cfg.omega_spec())?;
            let want = laplace_conical_closed(&m, &x)?;
            let tol = if got.stderr.is_some() {
                cfg.monte_carlo()
            } else {
                cfg.relative(1e-8)
            };
            vec![Comparison::new("laplace", &got, &want, "closed-form", tol)?]
        }
        Case::FermionicGamma { p, q, m } => {
            if m.len() != *q {
                return Err(Error::Domain(format!(
                    "need {q} fermionic exponents, got {}",
                    m.len()
                )));
            }
            let got = gamma_fermionic_exact(*p, *q, m)?;
            let want = fermionic_closed(*p, m);
            vec![Comparison::new(
                "fermionic-gamma",
                &exact(Grassmann::real(0, got)),
                &Grassmann::real(0, want),
                "product-formula",
                cfg.relative(1e-12),
            )?]
        }
        Case::UnitarySector { m } => {
            let mut spec = cfg.omega_spec().unitary;
            spec.seed = cfg.seed;
            let got = unitary_sector_integral(m, &spec)?;
            let want = Grassmann::real(0, 1.0 / q_norm(m)?);
            let tol = if got.stderr.is_some() {
                cfg.monte_carlo()
            } else {
                cfg.relative(1e-12)
            };
            vec![Comparison::new(
                "unitary-sector",
                &got,
                &want,
                "inverse-q-norm",
                tol,
            )?]
        }
        Case::Invariance {
            family,
            count,
            odd_params,
            f,
        } => {
            let fmt = Format::new(1, 1);
            let default = SuperExpr::smul(
                SuperExpr::ber(SuperExpr::y()),
                SuperExpr::laplace_kernel(SuperMatrix::identity(fmt, 0)),
            );
            let f = parse_expr(f, default)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let spec = cfg.omega_spec();
            let tol = cfg.tol.unwrap_or(1e-8);
            (0..*count)
                .map(|i| {
                    let h = random_family_element(&mut rng, *family, *odd_params)?;
                    let mut c = invariance_check(&h, &f, &none, &spec, tol)?;
                    c.label = format!("invariance #{i}");
                    Ok(c)
                })
                .collect::<Result<_>>()?
        }
        Case::Vrho { p, q, count, n_gen } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let pairs = (0..*count)
                .map(|_| {
                    let z = random_big_cell(&mut rng, *p, *q, *n_gen)?;
                    Ok((z.vrho()?, z.vrho_via_ber()?))
                })
                .collect::<Result<Vec<_>>>()?;
            vec![worst("vrho", pairs, cfg.relative(1e-12))?]
        }
        Case::Shift {
            domain,
            count,
            n_gen,
            f,
        } => {
            let k = match domain {
                ShiftDomain::Unitary(k) | ShiftDomain::Cone(k) => *k,
            };
            let y = SuperExpr::det(SuperExpr::y());
            let default = match domain {
                ShiftDomain::Unitary(_) => {
                    SuperExpr::add(SuperExpr::pow(2.0, y.clone()), SuperExpr::pow(-1.0, y))
                }
                ShiftDomain::Cone(_) => SuperExpr::smul(
                    SuperExpr::pow(3.0 + k as f64, y),
                    SuperExpr::laplace_kernel(SuperMatrix::identity(Format::new(k, 0), 0)),
                ),
            };
            let f = parse_expr(f, default)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let spec = cfg.omega_spec();
            let tol = cfg.tol.unwrap_or(1e-10);
            (0..*count)
                .map(|i| {
                    let s = random_even_nilpotent(&mut rng, *n_gen, 0.5);
                    let mut c = shift_check(*domain, &f, &s, &spec, tol)?;
                    c.label = format!("nilpotent-shift #{i}");
                    Ok(c)
                })
                .collect::<Result<_>>()?
        }
        Case::Fourier { p, q } => {
            let grid = if *p == 0 { Grid::point() } else { cfg.grid };
            let reports = fourier_suite(*p, *q, grid)?;
            reports
                .into_iter()
                .flat_map(|r| {
                    let cmd = r.command;
                    r.comparisons.into_iter().map(move |mut c| {
                        c.label = format!("{cmd}/{}", c.label);
                        c
                    })
                })
                .collect()
        }
        Case::Fuzz {
            property,
            count,
            n_gen,
        } => vec![fuzz(*property, *count, *n_gen, cfg)?],
    };
    Ok(Report::new(case.kind(), inputs, comps).with_seed(cfg.seed))
}

const FUZZ_FORMATS: [(usize, usize); 6] = [(1, 1), (2, 1), (1, 2), (2, 2), (0, 2), (2, 0)];

fn fuzz(property: Property, count: usize, n: usize, cfg: &SuiteConfig) -> Result<Comparison> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tol = cfg.relative(1e-12);
    let pairs = (0..count)
        .map(|i| {
            let (p, q) = FUZZ_FORMATS[i % FUZZ_FORMATS.len()];
            match property {
                Property::GradedCommutativity => {
                    let pa = if i % 2 == 0 {
                        Parity::Even
                    } else {
                        Parity::Odd
                    };
                    let pb = if i % 4 < 2 { Parity::Even } else { Parity::Odd };
                    let a = random_grassmann(&mut rng, n, Some(pa), 1.0);
                    let b = random_grassmann(&mut rng, n, Some(pb), 1.0);
                    let ba = b.try_mul(&a)?;
                    let sign = if pa == Parity::Odd && pb == Parity::Odd {
                        -ba
                    } else {
                        ba
                    };
                    Ok((a.try_mul(&b)?, sign))
                }
                Property::BerMultiplicative => {
                    let x = random_big_cell(&mut rng, p, q, n)?;
                    let y = random_big_cell(&mut rng, p, q, n)?;
                    Ok((x.try_mul(&y)?.ber()?, x.ber()?.try_mul(&y.ber()?)?))
                }
                Property::StrCyclic => {
                    let x = random_big_cell(&mut rng, p, q, n)?;
                    let y = random_big_cell(&mut rng, p, q, n)?;
                    Ok((x.try_mul(&y)?.supertrace()?, y.try_mul(&x)?.supertrace()?))
                }
                Property::Conical => {
                    let fmt = Format::new(p, q);
                    let z = random_big_cell(&mut rng, p, q, n)?;
                    let h = random_borel(&mut rng, fmt, n, true);
                    let values: Vec<f64> = (0..fmt.dim())
                        .map(|j| ((i + 3 * j) % 5) as f64 - 1.0)
                        .collect();
                    let m = MultiIndex::new(p, q, values)?;
                    // χ_m(h⁻¹) from the inverted diagonals.
                    let a: Vec<_> = (0..fmt.dim()).map(|j| h.a.get(j, j).clone()).collect();
                    let d: Vec<_> = (0..fmt.dim()).map(|j| h.d.get(j, j).clone()).collect();
                    let lhs = h.act(&z)?.delta_m(&m)?;
                    let rhs = chi_m(&d, &a, &m)?.try_mul(&z.delta_m(&m)?)?;
                    Ok((lhs, rhs))
                }
                Property::LduReconstruction => {
                    let z = random_big_cell(&mut rng, p, q, n)?;
                    let (l, d, u) = z.ldu()?;
                    let back = l
                        .try_mul(&SuperMatrix::diagonal(z.rows(), d)?)?
                        .try_mul(&u)?;
                    // Flatten the matrix into one element per entry: compare entrywise.
                    let diff = back
                        .entries()
                        .iter()
                        .zip(z.entries())
                        .map(|(a, b)| (a.clone(), b.clone()))
                        .max_by(|x, y| entry_err(x).total_cmp(&entry_err(y)))
                        .expect("non-empty matrix");
                    Ok(diff)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let label = serde_json::to_value(property).expect("serialises");
    worst(label.as_str().unwrap_or("fuzz"), pairs, tol)
}

fn entry_err((a, b): &(Grassmann, Grassmann)) -> f64 {
    crate::report::rel_errors(a, b)
        .into_iter()
        .fold(0.0, f64::max)
}

fn spec(criterion: u32, case: Case) -> CaseSpec {
    CaseSpec {
        criterion: Some(criterion),
        case,
    }
}

/// The acceptance grid, criteria 1 to 14.
pub fn default_cases() -> Vec<CaseSpec> {
    let mut out = Vec::new();
    // 1: deterministic sectors.
    for (p, q) in [(1usize, 0usize), (2, 0), (0, 1), (1, 1), (2, 1)] {
        let boson: Vec<Vec<f64>> = match p {
            0 => vec![vec![]],
            1 => (2..=4).map(|a| vec![a as f64]).collect(),
            _ => (3..=5)
                .flat_map(|a| (3..=5).map(move |b| vec![a as f64, b as f64]))
                .collect(),
        };
        let fermion: Vec<Option<f64>> = if q == 0 {
            vec![None]
        } else {
            (-3..=3).map(|v| Some(v as f64)).collect()
        };
        for b in &boson {
            for f in &fermion {
                let mut m = b.clone();
                m.extend(f);
                if gamma_closed(&MultiIndex::new(p, q, m.clone()).expect("valid")).is_pole {
                    continue;
                }
                out.push(spec(1, Case::Gamma { p, q, m }));
            }
        }
    }
    // 2: Monte Carlo sector.
    for n in [2.0, 3.0] {
        out.push(spec(
            2,
            Case::Gamma {
                p: 1,
                q: 2,
                m: vec![n; 3],
            },
        ));
    }
    // 3
    let xs = [
        ("diag:1,1", 0),
        ("diag:2,1", 0),
        ("diag:1,0.7071067811865476:0.7071067811865476", 0),
        ("1.5,0.3:0.2*t1;-0.6*t2,0.8", 2),
    ];
    for (x, odd_params) in xs {
        for n in 1..=2 {
            out.push(spec(
                3,
                Case::Sbos {
                    p: 1,
                    q: 1,
                    n,
                    x: x.into(),
                    odd_params,
                    f: None,
                },
            ));
        }
    }
    // 4
    for n in 1..=3 {
        for k in 0..=4 {
            out.push(spec(4, Case::Bosonisation { n, k }));
        }
    }
    // 5
    for (p, x) in [
        (1, "diag:2"),
        (1, "0.5:1.0"),
        (2, "2,0.5:0.3;0.5:-0.3,1"),
        (2, "diag:1,3"),
        (2, "1:1,0.2;0.3:-0.5,2"),
    ] {
        for n in p..=p + 2 {
            out.push(spec(5, Case::Riesz { p, n, x: x.into() }));
        }
    }
    // 6
    for (p, n) in [(1, 1), (1, 2)] {
        for q in 0..=1 {
            out.push(spec(6, Case::GaussianNorm { p, q, n }));
        }
    }
    out.push(spec(6, Case::GaussianNorm { p: 0, q: 1, n: 1 }));
    // 7
    let laplace: [(usize, Vec<Vec<f64>>, [(&str, usize); 3]); 2] = [
        (
            0,
            vec![vec![1.0], vec![2.0], vec![3.5]],
            [("diag:2", 0), ("1:0.5", 0), ("1.5+0.4*t1t2", 2)],
        ),
        (
            1,
            vec![vec![2.0, 1.0], vec![3.0, 2.0], vec![2.0, -1.0]],
            [
                ("diag:2,1", 0),
                ("diag:1,0.7071067811865476:0.7071067811865476", 0),
                ("1.5,0.3:0.2*t1;-0.6*t2,0.8", 2),
            ],
        ),
    ];
    for (q, ms, xs) in laplace {
        for m in &ms {
            for (x, odd_params) in xs {
                out.push(spec(
                    7,
                    Case::Laplace {
                        p: 1,
                        q,
                        m: m.clone(),
                        x: x.into(),
                        odd_params,
                    },
                ));
            }
        }
    }
    // 8
    for p in 0..=2 {
        for q in 1..=2 {
            let ms: Vec<Vec<i64>> = if q == 1 {
                (-3..=3).map(|a| vec![a]).collect()
            } else {
                (-3..=3)
                    .flat_map(|a| (-3..=3).map(move |b| vec![a, b]))
                    .collect()
            };
            for m in ms {
                out.push(spec(8, Case::FermionicGamma { p, q, m }));
            }
        }
    }
    // 9
    for n in 0..=4 {
        out.push(spec(9, Case::UnitarySector { m: vec![n] }));
    }
    for n in 1..=2 {
        out.push(spec(9, Case::UnitarySector { m: vec![n, n] }));
    }
    // 10
    for family in [Family::OddLower, Family::OddUpper, Family::BlockDiagonal] {
        out.push(spec(
            10,
            Case::Invariance {
                family,
                count: 20,
                odd_params: 2,
                f: None,
            },
        ));
    }
    // 11
    for (p, q) in [
        (1, 1),
        (2, 1),
        (1, 2),
        (2, 2),
        (0, 2),
        (2, 0),
        (1, 0),
        (0, 1),
    ] {
        out.push(spec(
            11,
            Case::Vrho {
                p,
                q,
                count: 100,
                n_gen: 4,
            },
        ));
    }
    // 12
    for domain in [
        ShiftDomain::Unitary(1),
        ShiftDomain::Cone(1),
        ShiftDomain::Cone(2),
    ] {
        out.push(spec(
            12,
            Case::Shift {
                domain,
                count: 10,
                n_gen: 4,
                f: None,
            },
        ));
    }
    // 13
    for (p, q) in [(1, 0), (0, 1), (1, 1), (0, 2)] {
        out.push(spec(13, Case::Fourier { p, q }));
    }
    // 14
    for property in [
        Property::GradedCommutativity,
        Property::BerMultiplicative,
        Property::StrCyclic,
        Property::Conical,
        Property::LduReconstruction,
    ] {
        out.push(spec(
            14,
            Case::Fuzz {
                property,
                count: 1000,
                n_gen: 4,
            },
        ));
    }
    out
}

/// Outcome of one case in a suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u32>,
    pub kind: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<Report>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// `true` when the error is a usage or domain error rather than a numerical one.
    #[serde(default)]
    pub usage_error: bool,
}

/// Aggregate result of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub command: String,
    pub pass: bool,
    pub cases: Vec<CaseOutcome>,
}

impl SuiteReport {
    /// 0 when every case passes, 2 when any case hit a usage or domain
    /// error, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.cases.iter().any(|c| c.usage_error) {
            2
        } else if self.pass {
            0
        } else {
            1
        }
    }

    /// Pass/fail per criterion, in ascending order; cases without a
    /// criterion are grouped under `None`.
    pub fn by_criterion(&self) -> BTreeMap<Option<u32>, Vec<&CaseOutcome>> {
        let mut out: BTreeMap<Option<u32>, Vec<&CaseOutcome>> = BTreeMap::new();
        for c in &self.cases {
            out.entry(c.criterion).or_default().push(c);
        }
        out
    }
}

/// Whether an error is the caller's fault (exit code 2) or numerical (1).
pub fn is_usage_error(e: &Error) -> bool {
    !matches!(e, Error::Numerical(_))
}

/// Runs every case of the configuration.
pub fn run_suite(cfg: &SuiteConfig, timing: bool) -> SuiteReport {
    let cases = cfg
        .cases
        .iter()
        .map(|spec| {
            let start = Instant::now();
            match run_case(&spec.case, cfg) {
                Ok(mut r) => {
                    if timing {
                        r.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
                    }
                    CaseOutcome {
                        criterion: spec.criterion,
                        kind: spec.case.kind().into(),
                        pass: r.pass,
                        report: Some(r),
                        error: None,
                        usage_error: false,
                    }
                }
                Err(e) => CaseOutcome {
                    criterion: spec.criterion,
                    kind: spec.case.kind().into(),
                    pass: false,
                    report: None,
                    error: Some(e.to_string()),
                    usage_error: is_usage_error(&e),
                },
            }
        })
        .collect::<Vec<_>>();
    SuiteReport {
        command: "suite".into(),
        pass: cases.iter().all(|c| c.pass),
        cases,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_syntax() {
        let x = parse_matrix("diag:2,1", 1, 1, 0).unwrap();
        assert_eq!(x.get(0, 0).body(), Complex64::new(2.0, 0.0));
        assert!(x.get(0, 1).is_zero());
        let x = parse_matrix("1.5,0.3:0.2*t1;-0.6*t2,0.8", 1, 1, 2).unwrap();
        assert_eq!(x.get(0, 1).coeff(1), Complex64::new(0.3, 0.2));
        assert_eq!(x.get(1, 0).coeff(2), Complex64::new(-0.6, 0.0));
        let x = parse_matrix("1.5+0.4*t2t1", 1, 0, 2).unwrap();
        assert_eq!(x.get(0, 0).coeff(3), Complex64::new(-0.4, 0.0));
        let x = parse_matrix("1e+0+2*t1t2", 1, 0, 2).unwrap();
        assert_eq!(x.get(0, 0).coeff(0), Complex64::new(1.0, 0.0));
        assert!(parse_matrix("diag:1", 1, 1, 0).is_err());
        assert!(parse_matrix("1,t1;0,1", 1, 1, 1).is_err());
        assert!(parse_matrix("1,1*t3;0,1", 1, 1, 2).is_err());
        assert!(parse_matrix("1,1*t1;0,1", 1, 1, 1).is_ok());
        assert!(parse_matrix("1*t1,0;0,1", 1, 1, 1).is_err());
    }

    #[test]
    fn config_defaults() {
        let cfg: SuiteConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, SuiteConfig::default());
        let cfg: SuiteConfig = serde_json::from_str(r#"{"cases": []}"#).unwrap();
        let r = run_suite(&cfg, false);
        assert!(r.pass && r.cases.is_empty() && r.exit_code() == 0);
        let criteria: std::collections::BTreeSet<_> =
            default_cases().iter().filter_map(|c| c.criterion).collect();
        assert_eq!(criteria, (1..=14).collect());
    }

    #[test]
    fn case_json_round_trip() {
        for c in default_cases() {
            let s = serde_json::to_string(&c).unwrap();
            let back: CaseSpec = serde_json::from_str(&s).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn undersampled_monte_carlo_fails() {
        let cfg = SuiteConfig {
            mc_samples: 10,
            ..SuiteConfig::default()
        };
        let r = run_case(
            &Case::Gamma {
                p: 1,
                q: 2,
                m: vec![2.0; 3],
            },
            &cfg,
        )
        .unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn domain_errors_are_usage_errors() {
        let cfg = SuiteConfig::default().with_cases(vec![CaseSpec {
            criterion: None,
            case: Case::Gamma {
                p: 1,
                q: 0,
                m: vec![0.0],
            },
        }]);
        let r = run_suite(&cfg, false);
        assert_eq!(r.exit_code(), 2);
    }
}
