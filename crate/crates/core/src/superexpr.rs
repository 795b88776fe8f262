//! Closed expression language for superfunctions of a supermatrix argument.
//!
//! Expressions are evaluated on Grassmann-valued bindings, so a single
//! evaluation yields every coefficient exactly. The text form is a prefix
//! s-expression, e.g. `(exp (smul -1.0 (str (matmul (mat 1 1 2.0 0.0 0.0 1.0) Y))))`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::C;
use crate::supermatrix::{Format, SuperMatrix};
use crate::{Complex64, Grassmann, SMatrix};

/// Placeholder bound at evaluation time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Slot {
    /// The full argument `Y`.
    Y,
    /// Even-even block of `Y`.
    Z,
    /// Odd-odd block of `Y`.
    W,
    /// Even-odd block of `Y`.
    Zeta,
    /// Odd-even block of `Y`.
    Omega,
    /// External scalar parameter.
    Param(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SuperExpr {
    Scalar(Complex64),
    Matrix(SMatrix),
    Slot(Slot),
    MatMul(Box<SuperExpr>, Box<SuperExpr>),
    Inverse(Box<SuperExpr>),
    Minor(usize, Box<SuperExpr>),
    Det(Box<SuperExpr>),
    Ber(Box<SuperExpr>),
    Str(Box<SuperExpr>),
    Exp(Box<SuperExpr>),
    Pow(f64, Box<SuperExpr>),
    ScalarMul(Box<SuperExpr>, Box<SuperExpr>),
    Add(Box<SuperExpr>, Box<SuperExpr>),
}

/// Result of evaluating an expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(Grassmann),
    Matrix(SMatrix),
}

impl Value {
    pub fn scalar(self) -> Result<Grassmann> {
        match self {
            Value::Scalar(s) => Ok(s),
            Value::Matrix(_) => Err(Error::Expr("expected a scalar, found a matrix".into())),
        }
    }

    pub fn matrix(self) -> Result<SMatrix> {
        match self {
            Value::Matrix(m) => Ok(m),
            Value::Scalar(_) => Err(Error::Expr("expected a matrix, found a scalar".into())),
        }
    }
}

/// Values for the slots of an expression, all in one Grassmann algebra.
#[derive(Debug, Clone)]
pub struct Bindings {
    pub n: usize,
    pub y: Option<SMatrix>,
    pub params: BTreeMap<String, Grassmann>,
}

impl Bindings {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            y: None,
            params: BTreeMap::new(),
        }
    }

    pub fn with_y(y: SMatrix) -> Self {
        Self {
            n: y.n_generators(),
            y: Some(y),
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, name: &str, value: Grassmann) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }
}

fn bx(e: SuperExpr) -> Box<SuperExpr> {
    Box::new(e)
}

impl SuperExpr {
    pub fn y() -> Self {
        SuperExpr::Slot(Slot::Y)
    }

    pub fn param(name: &str) -> Self {
        SuperExpr::Slot(Slot::Param(name.to_string()))
    }

    pub fn real(x: f64) -> Self {
        SuperExpr::Scalar(Complex64::new(x, 0.0))
    }

    pub fn matmul(a: Self, b: Self) -> Self {
        SuperExpr::MatMul(bx(a), bx(b))
    }

    pub fn inverse(a: Self) -> Self {
        SuperExpr::Inverse(bx(a))
    }

    pub fn minor(k: usize, a: Self) -> Self {
        SuperExpr::Minor(k, bx(a))
    }

    pub fn det(a: Self) -> Self {
        SuperExpr::Det(bx(a))
    }

    pub fn ber(a: Self) -> Self {
        SuperExpr::Ber(bx(a))
    }

    pub fn str(a: Self) -> Self {
        SuperExpr::Str(bx(a))
    }

    pub fn exp(a: Self) -> Self {
        SuperExpr::Exp(bx(a))
    }

    pub fn pow(alpha: f64, a: Self) -> Self {
        SuperExpr::Pow(alpha, bx(a))
    }

    pub fn smul(s: Self, a: Self) -> Self {
        SuperExpr::ScalarMul(bx(s), bx(a))
    }

    pub fn add(a: Self, b: Self) -> Self {
        SuperExpr::Add(bx(a), bx(b))
    }

    /// Laplace kernel `e^{−str(xY)}`.
    pub fn laplace_kernel(x: SMatrix) -> Self {
        Self::exp(Self::smul(
            Self::real(-1.0),
            Self::str(Self::matmul(SuperExpr::Matrix(x), Self::y())),
        ))
    }

    /// The matrix `x` of a Laplace-kernel factor `e^{−str(xY)}`, found at the
    /// root or inside a chain of scalar products.
    pub fn kernel_matrix(&self) -> Option<&SMatrix> {
        match self {
            SuperExpr::Exp(inner) => match inner.as_ref() {
                SuperExpr::ScalarMul(s, t) => match (s.as_ref(), t.as_ref()) {
                    (SuperExpr::Scalar(k), SuperExpr::Str(arg))
                        if *k == Complex64::new(-1.0, 0.0) =>
                    {
                        match arg.as_ref() {
                            SuperExpr::MatMul(x, y) if **y == SuperExpr::y() => match x.as_ref() {
                                SuperExpr::Matrix(m) => Some(m),
                                _ => None,
                            },
                            _ => None,
                        }
                    }
                    _ => None,
                },
                _ => None,
            },
            SuperExpr::ScalarMul(a, b) => a.kernel_matrix().or_else(|| b.kernel_matrix()),
            _ => None,
        }
    }

    /// Evaluates on the given bindings.
    pub fn eval(&self, b: &Bindings) -> Result<Value> {
        let n = b.n;
        let y = || {
            b.y.as_ref()
                .ok_or_else(|| Error::Expr("slot Y is unbound".into()))
        };
        Ok(match self {
            SuperExpr::Scalar(c) => Value::Scalar(Grassmann::scalar(n, *c)),
            SuperExpr::Matrix(m) => Value::Matrix(m.embed(n)?),
            SuperExpr::Slot(s) => match s {
                Slot::Y => Value::Matrix(y()?.clone()),
                Slot::Z => Value::Matrix(y()?.a_block()),
                Slot::W => Value::Matrix(y()?.d_block()),
                Slot::Zeta => Value::Matrix(y()?.b_block()),
                Slot::Omega => Value::Matrix(y()?.c_block()),
                Slot::Param(name) => Value::Scalar(
                    b.params
                        .get(name)
                        .ok_or_else(|| Error::Expr(format!("parameter ${name} is unbound")))?
                        .embed(n)?,
                ),
            },
            SuperExpr::MatMul(a, c) => {
                Value::Matrix(a.eval(b)?.matrix()?.try_mul(&c.eval(b)?.matrix()?)?)
            }
            SuperExpr::Inverse(a) => Value::Matrix(a.eval(b)?.matrix()?.inverse()?),
            SuperExpr::Minor(k, a) => Value::Matrix(a.eval(b)?.matrix()?.principal_minor(*k)?),
            SuperExpr::Det(a) => Value::Scalar(a.eval(b)?.matrix()?.det_even()?),
            SuperExpr::Ber(a) => Value::Scalar(a.eval(b)?.matrix()?.ber()?),
            SuperExpr::Str(a) => Value::Scalar(a.eval(b)?.matrix()?.supertrace()?),
            SuperExpr::Exp(a) => Value::Scalar(a.eval(b)?.scalar()?.exp()),
            SuperExpr::Pow(alpha, a) => Value::Scalar(a.eval(b)?.scalar()?.powf(*alpha)?),
            SuperExpr::ScalarMul(s, a) => {
                let s = s.eval(b)?.scalar()?;
                match a.eval(b)? {
                    Value::Scalar(x) => Value::Scalar(s.try_mul(&x)?),
                    Value::Matrix(m) => Value::Matrix(m.scale(&s)?),
                }
            }
            SuperExpr::Add(a, c) => match (a.eval(b)?, c.eval(b)?) {
                (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x.try_add(&y)?),
                (Value::Matrix(x), Value::Matrix(y)) => Value::Matrix(x.try_add(&y)?),
                _ => return Err(Error::Expr("cannot add a scalar to a matrix".into())),
            },
        })
    }

    /// Evaluates an expression that must produce a scalar.
    pub fn eval_scalar(&self, b: &Bindings) -> Result<Grassmann> {
        self.eval(b)?.scalar()
    }

    /// Prefix text form. Constant matrices must have purely numeric entries.
    pub fn to_prefix(&self) -> Result<String> {
        let mut s = String::new();
        self.write_prefix(&mut s)?;
        Ok(s)
    }

    fn write_prefix(&self, out: &mut String) -> Result<()> {
        let unary = |out: &mut String, name: &str, a: &SuperExpr| -> Result<()> {
            write!(out, "({name} ").unwrap();
            a.write_prefix(out)?;
            out.push(')');
            Ok(())
        };
        let binary = |out: &mut String, name: &str, a: &SuperExpr, b: &SuperExpr| -> Result<()> {
            write!(out, "({name} ").unwrap();
            a.write_prefix(out)?;
            out.push(' ');
            b.write_prefix(out)?;
            out.push(')');
            Ok(())
        };
        match self {
            SuperExpr::Scalar(c) => write_number(out, *c),
            SuperExpr::Matrix(m) => {
                write!(out, "(mat {} {}", m.rows().even, m.rows().odd).unwrap();
                if m.rows() != m.cols() {
                    return Err(Error::Expr(
                        "only square constant matrices are serialisable".into(),
                    ));
                }
                for e in m.entries() {
                    if !e.soul().is_zero() {
                        return Err(Error::Expr(
                            "constant matrix with Grassmann entries has no text form".into(),
                        ));
                    }
                    out.push(' ');
                    write_number(out, e.body());
                }
                out.push(')');
            }
            SuperExpr::Slot(s) => out.push_str(&match s {
                Slot::Y => "Y".to_string(),
                Slot::Z => "z".to_string(),
                Slot::W => "w".to_string(),
                Slot::Zeta => "zeta".to_string(),
                Slot::Omega => "omega".to_string(),
                Slot::Param(p) => format!("${p}"),
            }),
            SuperExpr::MatMul(a, b) => binary(out, "matmul", a, b)?,
            SuperExpr::Inverse(a) => unary(out, "inv", a)?,
            SuperExpr::Minor(k, a) => unary(out, &format!("minor {k}"), a)?,
            SuperExpr::Det(a) => unary(out, "det", a)?,
            SuperExpr::Ber(a) => unary(out, "ber", a)?,
            SuperExpr::Str(a) => unary(out, "str", a)?,
            SuperExpr::Exp(a) => unary(out, "exp", a)?,
            SuperExpr::Pow(alpha, a) => unary(out, &format!("pow {alpha:?}"), a)?,
            SuperExpr::ScalarMul(a, b) => binary(out, "smul", a, b)?,
            SuperExpr::Add(a, b) => binary(out, "add", a, b)?,
        }
        Ok(())
    }

    /// Parses the prefix text form.
    pub fn from_prefix(text: &str) -> Result<Self> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let e = parse(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Parse(format!("trailing input at token {pos}")));
        }
        Ok(e)
    }
}

fn write_number(out: &mut String, c: Complex64) {
    if c.im == 0.0 {
        write!(out, "{:?}", c.re).unwrap();
    } else {
        write!(out, "(c {:?} {:?})", c.re, c.im).unwrap();
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

fn expect(tokens: &[String], pos: &mut usize, want: &str) -> Result<()> {
    match tokens.get(*pos) {
        Some(t) if t == want => {
            *pos += 1;
            Ok(())
        }
        other => Err(Error::Parse(format!("expected `{want}`, found {other:?}"))),
    }
}

fn next<'a>(tokens: &'a [String], pos: &mut usize) -> Result<&'a str> {
    let t = tokens
        .get(*pos)
        .ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
    *pos += 1;
    Ok(t)
}

fn parse_f64(t: &str) -> Result<f64> {
    t.parse::<f64>()
        .map_err(|_| Error::Parse(format!("`{t}` is not a number")))
}

fn parse_number(tokens: &[String], pos: &mut usize) -> Result<Complex64> {
    if tokens.get(*pos).map(String::as_str) == Some("(")
        && tokens.get(*pos + 1).map(String::as_str) == Some("c")
    {
        *pos += 2;
        let re = parse_f64(next(tokens, pos)?)?;
        let im = parse_f64(next(tokens, pos)?)?;
        expect(tokens, pos, ")")?;
        return Ok(C::new(re, im));
    }
    Ok(C::new(parse_f64(next(tokens, pos)?)?, 0.0))
}

fn parse(tokens: &[String], pos: &mut usize) -> Result<SuperExpr> {
    let t = next(tokens, pos)?;
    match t {
        "Y" => return Ok(SuperExpr::Slot(Slot::Y)),
        "z" => return Ok(SuperExpr::Slot(Slot::Z)),
        "w" => return Ok(SuperExpr::Slot(Slot::W)),
        "zeta" => return Ok(SuperExpr::Slot(Slot::Zeta)),
        "omega" => return Ok(SuperExpr::Slot(Slot::Omega)),
        ")" => return Err(Error::Parse("unexpected `)`".into())),
        "(" => {}
        _ if t.starts_with('$') && t.len() > 1 => return Ok(SuperExpr::param(&t[1..])),
        _ => return Ok(SuperExpr::Scalar(C::new(parse_f64(t)?, 0.0))),
    }
    let op = next(tokens, pos)?;
    let e = match op {
        "c" => {
            let re = parse_f64(next(tokens, pos)?)?;
            let im = parse_f64(next(tokens, pos)?)?;
            SuperExpr::Scalar(C::new(re, im))
        }
        "mat" => {
            let p: usize = next(tokens, pos)?
                .parse()
                .map_err(|_| Error::Parse("matrix format".into()))?;
            let q: usize = next(tokens, pos)?
                .parse()
                .map_err(|_| Error::Parse("matrix format".into()))?;
            let f = Format::new(p, q);
            let mut data = Vec::with_capacity(f.dim() * f.dim());
            for _ in 0..f.dim() * f.dim() {
                data.push(Grassmann::scalar(0, parse_number(tokens, pos)?));
            }
            let m = SuperMatrix::new(f, f, data).map_err(|e| Error::Parse(e.to_string()))?;
            SuperExpr::Matrix(m.embed(0)?)
        }
        "matmul" => SuperExpr::matmul(parse(tokens, pos)?, parse(tokens, pos)?),
        "inv" => SuperExpr::inverse(parse(tokens, pos)?),
        "minor" => {
            let k: usize = next(tokens, pos)?
                .parse()
                .map_err(|_| Error::Parse("minor size".into()))?;
            SuperExpr::minor(k, parse(tokens, pos)?)
        }
        "det" => SuperExpr::det(parse(tokens, pos)?),
        "ber" => SuperExpr::ber(parse(tokens, pos)?),
        "str" => SuperExpr::str(parse(tokens, pos)?),
        "exp" => SuperExpr::exp(parse(tokens, pos)?),
        "pow" => {
            let alpha = parse_f64(next(tokens, pos)?)?;
            SuperExpr::pow(alpha, parse(tokens, pos)?)
        }
        "smul" => SuperExpr::smul(parse(tokens, pos)?, parse(tokens, pos)?),
        "add" => SuperExpr::add(parse(tokens, pos)?, parse(tokens, pos)?),
        other => return Err(Error::Parse(format!("unknown operator `{other}`"))),
    };
    expect(tokens, pos, ")")?;
    Ok(e)
}

/// Builds `Y = [[z, ζ], [ω, w]]` from numeric boson blocks and the odd
/// generator blocks `ζ` (p×q) and `ω` (q×p) in an algebra on `n` generators.
pub fn assemble_y(
    z: &crate::linalg::CMat<f64>,
    w: &crate::linalg::CMat<f64>,
    zeta: &[Grassmann],
    omega: &[Grassmann],
    n: usize,
) -> Result<SMatrix> {
    let (p, q) = (z.rows, w.rows);
    let f = Format::new(p, q);
    let mut y = SuperMatrix::zeros(f, f, n);
    for i in 0..p {
        for j in 0..p {
            y.set(i, j, Grassmann::scalar(n, z.at(i, j)));
        }
        for j in 0..q {
            y.set(i, p + j, zeta[i * q + j].clone());
        }
    }
    for i in 0..q {
        for j in 0..p {
            y.set(p + i, j, omega[i * p + j].clone());
        }
        for j in 0..q {
            y.set(p + i, p + j, Grassmann::scalar(n, w.at(i, j)));
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m11(e: [Grassmann; 4]) -> SMatrix {
        SuperMatrix::new(Format::new(1, 1), Format::new(1, 1), e.to_vec()).unwrap()
    }

    #[test]
    fn squared_berezinian() {
        let n = 2;
        let z = Grassmann::generator(n, 0).unwrap();
        let o = Grassmann::generator(n, 1).unwrap();
        let y = m11([
            Grassmann::real(n, 2.0),
            z.clone(),
            o.clone(),
            Grassmann::one(n),
        ]);
        let e = SuperExpr::pow(2.0, SuperExpr::ber(SuperExpr::y()));
        let got = e.eval_scalar(&Bindings::with_y(y)).unwrap();
        let want = Grassmann::real(n, 4.0) - (&z * &o).scale_real(4.0);
        assert!(got.max_abs_diff(&want).unwrap() < 1e-14);
    }

    #[test]
    fn kernel_at_identity() {
        let x = SuperMatrix::identity(Format::new(1, 1), 0);
        let y = m11([
            Grassmann::real(0, 0.7),
            Grassmann::zero(0),
            Grassmann::zero(0),
            Grassmann::scalar(0, C::new(0.0, 1.0)),
        ]);
        let k = SuperExpr::laplace_kernel(x.clone());
        assert_eq!(k.kernel_matrix(), Some(&x));
        let got = k.eval_scalar(&Bindings::with_y(y)).unwrap().body();
        let want = (C::new(-0.7, 0.0) + C::new(0.0, 1.0)).exp();
        assert!((got - want).norm() < 1e-15);
    }

    #[test]
    fn prefix_round_trip() {
        let text = "(smul (pow 2.5 (det z)) (exp (smul -1.0 (str (matmul (mat 1 1 2.0 0.0 0.0 (c 0.5 -1.0)) Y)))))";
        let e = SuperExpr::from_prefix(text).unwrap();
        assert_eq!(e.to_prefix().unwrap(), text);
        assert!(e.kernel_matrix().is_some());
    }

    #[test]
    fn parse_errors() {
        assert!(SuperExpr::from_prefix("(det Y").is_err());
        assert!(SuperExpr::from_prefix("(frob Y)").is_err());
        assert!(SuperExpr::from_prefix("Y Y").is_err());
        assert!(SuperExpr::from_prefix("(mat 1 1 1 0 1 1)").is_err());
    }

    #[test]
    fn type_errors() {
        let y = SuperMatrix::identity(Format::new(1, 1), 0);
        let b = Bindings::with_y(y);
        assert!(SuperExpr::exp(SuperExpr::y()).eval(&b).is_err());
        assert!(SuperExpr::add(SuperExpr::y(), SuperExpr::real(1.0))
            .eval(&b)
            .is_err());
        assert!(SuperExpr::param("a").eval(&b).is_err());
    }
}
