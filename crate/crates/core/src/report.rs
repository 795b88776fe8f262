//! Coefficient-wise comparison records and the JSON report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::subset_label;
use crate::quadrature::Estimate;
use crate::Grassmann;

/// One Grassmann coefficient, labelled by its generator subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coeff {
    pub subset: String,
    pub re: f64,
    pub im: f64,
}

/// All `2^n` coefficients, sorted by bitmask.
pub fn coeffs(g: &Grassmann) -> Vec<Coeff> {
    g.coeffs()
        .iter()
        .enumerate()
        .map(|(mask, z)| Coeff {
            subset: subset_label(mask),
            re: z.re,
            im: z.im,
        })
        .collect()
}

/// How a computed value is judged against its reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tolerance {
    /// Coefficient-wise relative error, see [`rel_errors`].
    Relative { tol: f64 },
    /// Coefficient-wise absolute error.
    Absolute { tol: f64 },
    /// Monte Carlo agreement: `|a − b| ≤ max(rel·|b|, sigmas·σ)`. With
    /// `max_rel_stderr = Some(k)`, also `σ ≤ k·|b|`, so that under-sampled
    /// runs fail; a zero `b` is replaced by the scale of [`rel_errors`].
    MonteCarlo {
        rel: f64,
        sigmas: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_rel_stderr: Option<f64>,
    },
}

/// Per-coefficient relative errors. A reference coefficient counts as zero
/// when it is below `1e-12·max(1, ‖b‖∞)`; the error is then measured against
/// `max(1, ‖b‖∞)`.
pub fn rel_errors(a: &Grassmann, b: &Grassmann) -> Vec<f64> {
    let scale = b.norm_inf().max(1.0);
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| {
            let d = (x - y).norm();
            if y.norm() > 1e-12 * scale {
                d / y.norm()
            } else {
                d / scale
            }
        })
        .collect()
}

/// Computed value against a reference, coefficient by coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub label: String,
    pub computed: Vec<Coeff>,
    pub reference: Vec<Coeff>,
    /// Where the reference comes from, e.g. `closed-form` or `quadrature`.
    pub reference_kind: String,
    pub abs_err: Vec<f64>,
    pub rel_err: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<f64>>,
    pub tolerance: Tolerance,
    pub pass: bool,
}

impl Comparison {
    pub fn new(
        label: impl Into<String>,
        computed: &Estimate,
        reference: &Grassmann,
        reference_kind: &str,
        tolerance: Tolerance,
    ) -> Result<Self> {
        let a = &computed.value;
        if a.n_generators() != reference.n_generators() {
            return Err(Error::AlgebraMismatch(
                a.n_generators(),
                reference.n_generators(),
            ));
        }
        let abs_err: Vec<f64> = a
            .coeffs()
            .iter()
            .zip(reference.coeffs())
            .map(|(x, y)| (x - y).norm())
            .collect();
        let rel_err = rel_errors(a, reference);
        let pass = match tolerance {
            Tolerance::Relative { tol } => rel_err.iter().all(|e| *e <= tol),
            Tolerance::Absolute { tol } => abs_err.iter().all(|e| *e <= tol),
            Tolerance::MonteCarlo {
                rel,
                sigmas,
                max_rel_stderr,
            } => {
                let scale = reference.norm_inf().max(1.0);
                reference
                    .coeffs()
                    .iter()
                    .zip(&abs_err)
                    .enumerate()
                    .all(|(k, (b, d))| {
                        let s = computed.stderr_at(k);
                        let ok = *d <= (rel * b.norm()).max(sigmas * s);
                        let size = if b.norm() > 1e-12 * scale {
                            b.norm()
                        } else {
                            scale
                        };
                        ok && max_rel_stderr.map_or(true, |k| s <= k * size)
                    })
            }
        };
        Ok(Self {
            label: label.into(),
            computed: coeffs(a),
            reference: coeffs(reference),
            reference_kind: reference_kind.to_string(),
            abs_err,
            rel_err,
            stderr: computed.stderr.clone(),
            tolerance,
            pass,
        })
    }

    pub fn max_abs_err(&self) -> f64 {
        self.abs_err.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_rel_err(&self) -> f64 {
        self.rel_err.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_stderr(&self) -> f64 {
        self.stderr
            .as_ref()
            .map(|s| s.iter().copied().fold(0.0, f64::max))
            .unwrap_or(0.0)
    }
}

/// Machine-readable result of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: serde_json::Value,
    pub comparisons: Vec<Comparison>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn new(command: &str, inputs: serde_json::Value, comparisons: Vec<Comparison>) -> Self {
        let pass = comparisons.iter().all(|c| c.pass);
        Self {
            command: command.to_string(),
            inputs,
            comparisons,
            pass,
            seed: None,
            timing_ms: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;

    #[test]
    fn zero_reference_uses_scale() {
        let mut b = Grassmann::real(2, 2.0);
        b.set_coeff(3, Complex64::new(0.0, 0.0));
        let mut a = b.clone();
        a.set_coeff(3, Complex64::new(1e-9, 0.0));
        let e = rel_errors(&a, &b);
        assert_eq!(e[0], 0.0);
        assert!((e[3] - 0.5e-9).abs() < 1e-20);
    }

    #[test]
    fn monte_carlo_rule() {
        let b = Grassmann::real(0, 1.0);
        let est = Estimate {
            value: Grassmann::real(0, 1.1),
            stderr: Some(vec![0.03]),
        };
        let loose = Tolerance::MonteCarlo {
            rel: 0.02,
            sigmas: 4.0,
            max_rel_stderr: None,
        };
        let strict = Tolerance::MonteCarlo {
            rel: 0.02,
            sigmas: 4.0,
            max_rel_stderr: Some(0.02),
        };
        assert!(
            Comparison::new("x", &est, &b, "closed-form", loose)
                .unwrap()
                .pass
        );
        assert!(
            !Comparison::new("x", &est, &b, "closed-form", strict)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn labels_sorted_by_mask() {
        let g = Grassmann::real(2, 1.0);
        let c = coeffs(&g);
        let labels: Vec<_> = c.iter().map(|c| c.subset.as_str()).collect();
        assert_eq!(labels, ["1", "θ1", "θ2", "θ1θ2"]);
    }
}
