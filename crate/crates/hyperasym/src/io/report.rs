//! Machine-readable reports. Rationals are `"p/q"` strings, certified reals
//! `{mid, rad, bits}`; factor indices are zero-based.

use super::problem::{exp_spec_of, factor_spec_of, monomials_of, ExpSpec, FactorSpec, MonomialSpec, ProblemFile};
use crate::arrangement::{circuits_and_broken_circuits, is_simple, Arrangement};
use crate::asymptotics::{AsymptoticReport, Contribution, DominantStatus, Exactness, LeadingConstant, Vanishing};
use crate::critical::{Classification, CriticalPoint, Value};
use crate::decompose::{Decomposition, Step};
use crate::exact::{rat_to_string, CertifiedReal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedJson {
    pub mid: String,
    pub rad: String,
    pub bits: u32,
}

impl From<&CertifiedReal> for CertifiedJson {
    fn from(c: &CertifiedReal) -> Self {
        CertifiedJson {
            mid: rat_to_string(&c.mid()),
            rad: rat_to_string(&c.rad()),
            bits: c.bits(),
        }
    }
}

/// An exact rational string or a certified enclosure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueJson {
    Exact(String),
    Certified(CertifiedJson),
}

impl From<&Value> for ValueJson {
    fn from(v: &Value) -> Self {
        match v {
            Value::Exact(q) => ValueJson::Exact(rat_to_string(q)),
            Value::Approx(c) => ValueJson::Certified(c.into()),
        }
    }
}

impl ValueJson {
    /// Rough display value.
    pub fn approx(&self) -> f64 {
        let s = match self {
            ValueJson::Exact(s) => s,
            ValueJson::Certified(c) => &c.mid,
        };
        crate::exact::parse_rational(s).map(|q| crate::exact::rat_to_f64(&q)).unwrap_or(f64::NAN)
    }
}

fn values(v: &[Value]) -> Vec<ValueJson> {
    v.iter().map(ValueJson::from).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatJson {
    pub factors: Vec<usize>,
    pub dim: usize,
    pub point: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrangementJson {
    pub nvars: usize,
    pub factors: Vec<FactorSpec>,
    pub flats: Vec<FlatJson>,
    pub simple: bool,
    /// Dependent-normal witness when not simple.
    pub witness: Option<Vec<usize>>,
    pub circuits: Vec<Vec<usize>>,
    pub broken_circuits: Vec<Vec<usize>>,
}

impl ArrangementJson {
    pub fn new(arr: &Arrangement) -> Self {
        let matroid = circuits_and_broken_circuits(&arr.factors);
        let witness = match is_simple(arr) {
            crate::arrangement::Simplicity::Simple => None,
            crate::arrangement::Simplicity::NotSimple { witness, .. } => Some(witness),
        };
        ArrangementJson {
            nvars: arr.nvars,
            factors: arr.factors.iter().map(factor_spec_of).collect(),
            flats: arr
                .flats
                .iter()
                .map(|f| FlatJson {
                    factors: f.set.clone(),
                    dim: f.dim,
                    point: f.point.iter().map(rat_to_string).collect(),
                })
                .collect(),
            simple: witness.is_none(),
            witness,
            circuits: matroid.circuits,
            broken_circuits: matroid.broken_circuits,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    /// Power of each factor in the term's denominator.
    pub powers: Vec<u32>,
    pub numerator: Vec<MonomialSpec>,
    pub exp_affine: Option<ExpSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedPowers {
    pub powers: Vec<u32>,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepJson {
    Exchange {
        powers: Vec<u32>,
        broken_circuit: Vec<usize>,
        circuit: Vec<usize>,
        pivot: usize,
        outputs: Vec<WeightedPowers>,
    },
    IdealReduction {
        powers: Vec<u32>,
        outputs: Vec<Vec<u32>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub terms: Vec<TermJson>,
    pub steps: Vec<StepJson>,
    /// Total degree up to which the Taylor coefficients were compared exactly.
    pub verified_degree: Option<usize>,
    /// Further indices checked exactly.
    pub spot_checks: Vec<Vec<usize>>,
}

impl DecompositionJson {
    pub fn new(dec: &Decomposition, verified_degree: Option<usize>) -> Self {
        DecompositionJson {
            terms: dec
                .terms
                .iter()
                .map(|t| TermJson {
                    coeff: rat_to_string(&t.coeff),
                    powers: t.q.clone(),
                    numerator: monomials_of(&t.numerator.poly),
                    exp_affine: t.numerator.exp.as_ref().map(exp_spec_of),
                })
                .collect(),
            steps: dec
                .log
                .iter()
                .map(|s| match s {
                    Step::Exchange {
                        q,
                        broken_circuit,
                        circuit,
                        pivot,
                        outputs,
                    } => StepJson::Exchange {
                        powers: q.clone(),
                        broken_circuit: broken_circuit.clone(),
                        circuit: circuit.clone(),
                        pivot: *pivot,
                        outputs: outputs
                            .iter()
                            .map(|(p, c)| WeightedPowers {
                                powers: p.clone(),
                                coeff: rat_to_string(c),
                            })
                            .collect(),
                    },
                    Step::IdealReduction { q, outputs } => StepJson::IdealReduction {
                        powers: q.clone(),
                        outputs: outputs.clone(),
                    },
                })
                .collect(),
            verified_degree,
            spot_checks: Vec::new(),
        }
    }
}

pub fn classification_name(c: Classification) -> &'static str {
    match c {
        Classification::Contributing => "contributing",
        Classification::NonContributing => "non_contributing",
        Classification::Boundary => "boundary",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalJson {
    /// Decomposition term the point belongs to, if any.
    pub term: Option<usize>,
    pub point: Vec<ValueJson>,
    pub flat: Vec<usize>,
    pub stratum: Vec<usize>,
    pub orthant: Vec<i8>,
    pub height: CertifiedJson,
    pub lambda: Vec<ValueJson>,
    pub classification: String,
    pub cross_flat: bool,
}

impl CriticalJson {
    pub fn new(p: &CriticalPoint, term: Option<usize>) -> Self {
        CriticalJson {
            term,
            point: values(&p.coords),
            flat: p.flat.clone(),
            stratum: p.stratum.clone(),
            orthant: p.orthant.clone(),
            height: (&p.height).into(),
            lambda: values(&p.lambda),
            classification: classification_name(p.classification).into(),
            cross_flat: p.cross_flat,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicJson {
    pub rational: String,
    pub radicand: String,
    pub pi_half_power: i32,
    pub exp: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantJson {
    pub expression: String,
    /// `rational · √radicand · π^{pi_half_power/2} · e^{exp}` when known.
    pub exact: Option<SymbolicJson>,
    pub value: CertifiedJson,
}

impl From<&LeadingConstant> for ConstantJson {
    fn from(c: &LeadingConstant) -> Self {
        ConstantJson {
            expression: c.to_string(),
            exact: c.symbolic.as_ref().map(|s| SymbolicJson {
                rational: rat_to_string(&s.rational),
                radicand: s.radicand.to_string(),
                pi_half_power: s.pi_half_power,
                exp: rat_to_string(&s.exp),
            }),
            value: (&c.value).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExactnessJson {
    /// `base^n · e^{exp} · Σ coeffs[k] n^k` exactly.
    ExactPolynomial { coeffs: Vec<String>, exp: String },
    LeadingTermOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContributionJson {
    pub point: Vec<ValueJson>,
    pub stratum: Vec<usize>,
    pub orthant: Vec<i8>,
    pub height: CertifiedJson,
    pub base: ValueJson,
    pub alpha: String,
    pub constant: ConstantJson,
    pub exactness: ExactnessJson,
    pub vanishing: String,
    pub terms: Vec<usize>,
    pub expression: String,
}

pub fn vanishing_name(v: Vanishing) -> &'static str {
    match v {
        Vanishing::NonZero => "non_zero",
        Vanishing::ZeroByIdeal => "zero_by_ideal",
        Vanishing::ZeroLeadingUnknownOrder => "zero_leading_unknown_order",
    }
}

impl From<&Contribution> for ContributionJson {
    fn from(c: &Contribution) -> Self {
        ContributionJson {
            point: values(&c.point),
            stratum: c.stratum.clone(),
            orthant: c.orthant.clone(),
            height: (&c.height).into(),
            base: (&c.base).into(),
            alpha: rat_to_string(&c.alpha),
            constant: (&c.constant).into(),
            exactness: match &c.exactness {
                Exactness::ExactPolynomial { coeffs, exp } => ExactnessJson::ExactPolynomial {
                    coeffs: coeffs.iter().map(rat_to_string).collect(),
                    exp: rat_to_string(exp),
                },
                Exactness::LeadingTermOnly => ExactnessJson::LeadingTermOnly,
            },
            vanishing: vanishing_name(c.vanishing).into(),
            terms: c.terms.clone(),
            expression: c.expression(),
        }
    }
}

pub fn status_name(s: DominantStatus) -> &'static str {
    match s {
        DominantStatus::Generic => "generic",
        DominantStatus::NonGeneric => "non_generic",
        DominantStatus::ZeroLeadingUnknownOrder => "zero_leading_unknown_order",
        DominantStatus::NoContribution => "no_contribution",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominantJson {
    pub status: String,
    pub expression: String,
    pub contributions: Vec<ContributionJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationRow {
    pub n: usize,
    pub coefficient: String,
    /// `exp(c0)` multiplying `coefficient`, when the numerator has one.
    pub exp: String,
    /// Oracle value over the prediction, as a decimal string.
    pub ratio: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationJson {
    pub nmax: usize,
    pub tolerance: String,
    pub rows: Vec<VerificationRow>,
    /// `PASS`, `FAIL` or `NO_PREDICTION`.
    pub verdict: String,
}

impl VerificationJson {
    pub fn passed(&self) -> bool {
        self.verdict == "PASS"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientJson {
    pub index: Vec<usize>,
    pub coefficient: String,
    pub exp: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub problem: ProblemFile,
    pub arrangement: Option<ArrangementJson>,
    pub decomposition: Option<DecompositionJson>,
    pub critical: Vec<CriticalJson>,
    pub contributions: Vec<ContributionJson>,
    pub dominant: Option<DominantJson>,
    pub verification: Option<VerificationJson>,
    pub coefficient: Option<CoefficientJson>,
    pub warnings: Vec<String>,
    pub bits: u32,
    /// Some comparison stayed open at the precision cap.
    pub undecided_at_cap: bool,
}

impl Report {
    pub fn empty(command: &str, problem: ProblemFile, bits: u32) -> Self {
        Report {
            command: command.into(),
            problem,
            arrangement: None,
            decomposition: None,
            critical: Vec::new(),
            contributions: Vec::new(),
            dominant: None,
            verification: None,
            coefficient: None,
            warnings: Vec::new(),
            bits,
            undecided_at_cap: false,
        }
    }

    /// Fills the analysis sections from an assembled result.
    pub fn with_analysis(mut self, rep: &AsymptoticReport) -> Self {
        self.arrangement = Some(ArrangementJson::new(&rep.arrangement));
        self.decomposition = rep.decomposition.as_ref().map(|d| DecompositionJson::new(d, None));
        self.critical = rep
            .critical
            .iter()
            .flat_map(|tc| tc.points.iter().map(move |p| CriticalJson::new(p, tc.term)))
            .collect();
        self.contributions = rep.contributions.iter().map(ContributionJson::from).collect();
        self.dominant = Some(DominantJson {
            status: status_name(rep.status).into(),
            expression: rep.dominant_expression(),
            contributions: rep.dominant.iter().map(ContributionJson::from).collect(),
        });
        self.warnings.extend(rep.warnings.iter().cloned());
        self.bits = rep.bits;
        self.undecided_at_cap = rep.undecided_at_cap;
        self
    }

    /// Canonical JSON: sorted keys, two-space indent, trailing newline.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let line = |out: &mut String, s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(&mut out, format!("command: {}", self.command));
        line(&mut out, format!("direction: {:?}", self.problem.direction));
        if let Some(a) = &self.arrangement {
            line(
                &mut out,
                format!(
                    "arrangement: {} factors in {} variables, {} flats, {}",
                    a.factors.len(),
                    a.nvars,
                    a.flats.len(),
                    if a.simple { "simple" } else { "not simple" }
                ),
            );
            if !a.broken_circuits.is_empty() {
                line(&mut out, format!("  broken circuits: {:?}", a.broken_circuits));
            }
        }
        if let Some(d) = &self.decomposition {
            line(&mut out, format!("decomposition: {} terms", d.terms.len()));
            for t in &d.terms {
                let num = if t.numerator.len() == 1 && t.numerator[0].exp.iter().all(|&e| e == 0) {
                    t.numerator[0].coeff.clone()
                } else {
                    format!("{} monomials", t.numerator.len())
                };
                line(&mut out, format!("  {} * ({num}) / powers {:?}", t.coeff, t.powers));
            }
            if let Some(k) = d.verified_degree {
                line(&mut out, format!("  verified exactly to total degree {k}"));
            }
        }
        if !self.critical.is_empty() {
            line(&mut out, "critical points:".into());
            for c in &self.critical {
                let pt: Vec<String> = c.point.iter().map(show_value).collect();
                let term = c.term.map(|t| format!("[term {t}] ")).unwrap_or_default();
                line(
                    &mut out,
                    format!(
                        "  {term}({}) flat {:?} stratum {:?} orthant {:?} height {:.6} {}",
                        pt.join(", "),
                        c.flat,
                        c.stratum,
                        c.orthant,
                        ValueJson::Certified(c.height.clone()).approx(),
                        c.classification
                    ),
                );
            }
        }
        if !self.contributions.is_empty() {
            line(&mut out, "contributions:".into());
            for c in &self.contributions {
                line(&mut out, format!("  {} [{}] terms {:?}", c.expression, c.vanishing, c.terms));
            }
        }
        if let Some(d) = &self.dominant {
            line(&mut out, format!("dominant ({}): {}", d.status, d.expression));
        }
        if let Some(v) = &self.verification {
            line(&mut out, format!("verification (tolerance {}):", v.tolerance));
            for r in &v.rows {
                line(&mut out, format!("  n = {:>4}  ratio {}", r.n, r.ratio.as_deref().unwrap_or("-")));
            }
            line(&mut out, format!("  {}", v.verdict));
        }
        if let Some(c) = &self.coefficient {
            let e = if c.exp == "0" { String::new() } else { format!(" * exp({})", c.exp) };
            line(&mut out, format!("coefficient {:?}: {}{e}", c.index, c.coefficient));
        }
        for w in &self.warnings {
            line(&mut out, format!("warning: {w}"));
        }
        out
    }
}

fn show_value(v: &ValueJson) -> String {
    match v {
        ValueJson::Exact(s) => s.clone(),
        ValueJson::Certified(_) => format!("{:.9}", v.approx()),
    }
}
