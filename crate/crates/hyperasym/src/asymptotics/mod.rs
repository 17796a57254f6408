//! Asymptotic contributions of contributing points and their assembly into
//! dominant coefficient asymptotics.

mod assemble;
mod constant;
mod residue;
mod saddle;

pub use assemble::{assemble, neighbourhood_rate, AssembleOptions, AsymptoticReport, DominantStatus, NeighbourhoodRate};
pub use constant::{LeadingConstant, SymbolicConstant};
pub use residue::{full_codim_contribution, product_formula_leading};
pub use saddle::{
    log_gradient_matrix, partial_codim_contribution, partial_codim_contribution_with, saddle_data,
    valid_completions, LogGradientMatrix, SaddleData,
};

use crate::arrangement::LinearFactor;
use crate::critical::{CriticalError, Value};
use crate::decompose::ideal_split;
use crate::exact::{rat_to_f64, CertifiedReal, MultiPoly, Numerator, Rational};
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AsymptoticsError {
    #[error(transparent)]
    Critical(#[from] CriticalError),
    #[error("non-generic direction not supported: {0}")]
    NonGenericUnsupported(String),
    #[error("ideal membership needs a polynomial numerator")]
    ExpNumerator,
    #[error("Hessian is not positive definite at {0}")]
    NotPositiveDefinite(String),
    #[error("point is not a contributing point of the expected kind: {0}")]
    WrongPoint(String),
    #[error("{0}")]
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exactness {
    /// The whole contribution is `σ^{-nr} · e^{exp} · Σ_i coeffs[i] n^i`.
    ExactPolynomial { coeffs: Vec<Rational>, exp: Rational },
    LeadingTermOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vanishing {
    NonZero,
    /// Certified zero: the numerator lies in the annihilating ideal, or an
    /// exact residue vanishes identically.
    ZeroByIdeal,
    ZeroLeadingUnknownOrder,
}

/// `base^n · n^alpha · constant` attached to one point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contribution {
    pub point: Vec<Value>,
    pub stratum: Vec<usize>,
    pub orthant: Vec<i8>,
    pub height: CertifiedReal,
    /// `σ^{-r}`.
    pub base: Value,
    pub alpha: Rational,
    pub constant: LeadingConstant,
    pub exactness: Exactness,
    pub vanishing: Vanishing,
    /// Decomposition terms that produced this contribution.
    pub terms: Vec<usize>,
}

impl Contribution {
    pub fn is_zero(&self) -> bool {
        self.vanishing != Vanishing::NonZero
    }

    /// Sign of the base, giving the `(±1)^n` phase.
    pub fn phase(&self) -> i32 {
        self.base.sign().unwrap_or(1)
    }

    pub fn log_abs_base(&self) -> f64 {
        self.base.to_f64().abs().ln()
    }

    /// Contribution at `n` divided by `|base|^n`.
    pub fn scaled_value(&self, n: u64) -> f64 {
        let phase = if self.phase() < 0 && n % 2 == 1 { -1.0 } else { 1.0 };
        let nf = n as f64;
        match &self.exactness {
            Exactness::ExactPolynomial { coeffs, exp } => {
                let mut acc = 0.0;
                for c in coeffs.iter().rev() {
                    acc = acc * nf + rat_to_f64(c);
                }
                phase * acc * rat_to_f64(exp).exp()
            }
            Exactness::LeadingTermOnly => {
                phase * nf.powf(rat_to_f64(&self.alpha)) * self.constant.to_f64()
            }
        }
    }

    /// Human-readable `C · base^n · n^α`.
    pub fn expression(&self) -> String {
        let base = match &self.base {
            Value::Exact(q) => format!("({q})^n"),
            Value::Approx(c) => format!("({:.12e})^n", c.to_f64()),
        };
        let npow = if self.alpha.is_zero() {
            String::new()
        } else {
            format!(" * n^({})", self.alpha)
        };
        format!("{} * {}{}", self.constant, base, npow)
    }
}

/// Sum of tied dominant contributions at `n`, divided by the common `|base|^n`.
pub fn scaled_prediction(dominant: &[Contribution], n: u64) -> f64 {
    dominant
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| c.scaled_value(n))
        .sum()
}

/// `a / (prediction at n)` using exact division by `|base|^n` when possible.
pub fn oracle_ratio(a: &Rational, dominant: &[Contribution], n: u64) -> Option<f64> {
    let lead = dominant.iter().find(|c| !c.is_zero())?;
    let pred = scaled_prediction(dominant, n);
    if pred == 0.0 {
        return None;
    }
    let scaled = match &lead.base {
        Value::Exact(b) => {
            let e = i64::try_from(n).ok()?;
            rat_to_f64(&(a / crate::exact::rat_pow(&b.abs(), e)))
        }
        Value::Approx(_) => {
            if a.is_zero() {
                0.0
            } else {
                let la = rat_to_f64(&a.abs()).ln();
                let la = if la.is_finite() { la } else { log_abs_rational(a) };
                a.signum().to_f64().unwrap_or(1.0) * (la - n as f64 * lead.log_abs_base()).exp()
            }
        }
    };
    Some(scaled / pred)
}

fn log_abs_rational(a: &Rational) -> f64 {
    let n = a.numer().abs();
    let d = a.denom().abs();
    let ln = |x: &num_bigint::BigInt| {
        let bits = x.bits();
        let shift = bits.saturating_sub(60);
        let top = (x >> shift).to_f64().unwrap_or(1.0);
        top.ln() + shift as f64 * std::f64::consts::LN_2
    };
    ln(&n) - ln(&d)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdealMembership {
    /// `G = Σ h_i ℓ_{k_i}^{p_i}` with these `h_i`.
    In { certificate: Vec<MultiPoly> },
    Out,
}

impl IdealMembership {
    pub fn is_in(&self) -> bool {
        matches!(self, IdealMembership::In { .. })
    }
}

/// Decides whether `G` lies in the ideal generated by `ℓ_k^{p_k}` for the
/// factors of `stratum`.
pub fn ideal_membership(
    g: &Numerator,
    factors: &[LinearFactor],
    stratum: &[usize],
) -> Result<IdealMembership, AsymptoticsError> {
    if g.exp.is_some() {
        return Err(AsymptoticsError::ExpNumerator);
    }
    Ok(poly_ideal_membership(&g.poly, factors, stratum))
}

pub(crate) fn poly_ideal_membership(g: &MultiPoly, factors: &[LinearFactor], stratum: &[usize]) -> IdealMembership {
    let powers: Vec<u32> = stratum.iter().map(|&k| factors[k].power).collect();
    if g.is_zero() {
        return IdealMembership::In {
            certificate: vec![MultiPoly::zero(g.nvars()); stratum.len()],
        };
    }
    match ideal_split(g, factors, stratum, &powers) {
        Some(certificate) => IdealMembership::In { certificate },
        None => IdealMembership::Out,
    }
}

/// Certified `σ^{-r}` with its sign.
pub(crate) fn base_value(point: &[Value], r: &[u64], bits: u32) -> Value {
    if let Some(z) = point.iter().map(|v| v.as_exact().cloned()).collect::<Option<Vec<_>>>() {
        let dir = crate::critical::Direction::new(r.to_vec()).expect("positive direction");
        return Value::Exact(crate::critical::exact_base(&z, &dir));
    }
    let mut acc = CertifiedReal::one(bits + 32);
    for (v, &k) in point.iter().zip(r) {
        let c = v.to_certified(bits + 32);
        acc = acc.mul(&c.powi(k as u32));
    }
    Value::Approx(acc.recip().expect("non-zero coordinates").with_bits(bits))
}

#[cfg(test)]
mod tests;
