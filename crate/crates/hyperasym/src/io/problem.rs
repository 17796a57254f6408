//! Problem files: variable names, numerator, factors and direction.

use crate::arrangement::{InputError, LinearFactor, RationalFunction};
use crate::critical::Direction;
use crate::exact::{parse_rational, rat_to_string, ExpAffine, MultiPoly, Numerator, Rational};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("malformed problem file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: cannot parse rational {value:?}")]
    Rational { field: String, value: String },
    #[error("{0}")]
    Dimension(String),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("direction entries must be positive integers")]
    Direction,
}

/// `coeff · z^exp`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub coeff: String,
    pub exp: Vec<u32>,
}

/// `exp(constant + linear·z)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpSpec {
    pub constant: String,
    pub linear: Vec<String>,
}

/// `(1 − b·z)^power`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub b: Vec<String>,
    #[serde(default = "one")]
    pub power: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub variables: Vec<String>,
    /// Empty means the constant 1.
    #[serde(default)]
    pub numerator: Vec<MonomialSpec>,
    #[serde(default)]
    pub exp_affine: Option<ExpSpec>,
    pub factors: Vec<FactorSpec>,
    pub direction: Vec<u64>,
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub variables: Vec<String>,
    pub f: RationalFunction,
    pub dir: Direction,
    /// Cancellations performed while validating.
    pub warnings: Vec<String>,
}

fn parse_field(field: &str, s: &str) -> Result<Rational, ProblemError> {
    parse_rational(s).map_err(|_| ProblemError::Rational {
        field: field.to_string(),
        value: s.to_string(),
    })
}

fn parse_vec(field: &str, v: &[String], d: usize) -> Result<Vec<Rational>, ProblemError> {
    if v.len() != d {
        return Err(ProblemError::Dimension(format!("{field} has {} entries, expected {d}", v.len())));
    }
    v.iter().map(|s| parse_field(field, s)).collect()
}

pub fn monomials_of(p: &MultiPoly) -> Vec<MonomialSpec> {
    p.terms()
        .map(|(e, c)| MonomialSpec {
            coeff: rat_to_string(c),
            exp: e.clone(),
        })
        .collect()
}

pub fn exp_spec_of(e: &ExpAffine) -> ExpSpec {
    ExpSpec {
        constant: rat_to_string(&e.constant),
        linear: e.linear.iter().map(rat_to_string).collect(),
    }
}

pub fn factor_spec_of(f: &LinearFactor) -> FactorSpec {
    FactorSpec {
        b: f.b.iter().map(rat_to_string).collect(),
        power: f.power,
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, ProblemError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_function(variables: Vec<String>, f: &RationalFunction, dir: &Direction) -> Self {
        ProblemFile {
            variables,
            numerator: monomials_of(&f.numerator.poly),
            exp_affine: f.numerator.exp.as_ref().map(exp_spec_of),
            factors: f.factors.iter().map(factor_spec_of).collect(),
            direction: dir.r().to_vec(),
        }
    }

    pub fn numerator(&self) -> Result<Numerator, ProblemError> {
        let d = self.variables.len();
        let poly = if self.numerator.is_empty() {
            MultiPoly::one(d)
        } else {
            let mut terms = Vec::new();
            for (i, m) in self.numerator.iter().enumerate() {
                if m.exp.len() != d {
                    return Err(ProblemError::Dimension(format!(
                        "numerator term {} has {} exponents, expected {d}",
                        i + 1,
                        m.exp.len()
                    )));
                }
                terms.push((m.exp.clone(), parse_field(&format!("numerator term {}", i + 1), &m.coeff)?));
            }
            MultiPoly::from_terms(d, terms)
        };
        let exp = match &self.exp_affine {
            Some(e) => Some(ExpAffine {
                constant: parse_field("exp_affine.constant", &e.constant)?,
                linear: parse_vec("exp_affine.linear", &e.linear, d)?,
            }),
            None => None,
        };
        Ok(Numerator { poly, exp })
    }

    pub fn build(&self) -> Result<Problem, ProblemError> {
        let d = self.variables.len();
        let numerator = self.numerator()?;
        let factors = self
            .factors
            .iter()
            .enumerate()
            .map(|(i, fs)| Ok(LinearFactor::new(parse_vec(&format!("factor {}", i + 1), &fs.b, d)?, fs.power)))
            .collect::<Result<Vec<_>, ProblemError>>()?;
        if self.direction.len() != d {
            return Err(ProblemError::Dimension(format!(
                "direction has {} entries, expected {d}",
                self.direction.len()
            )));
        }
        let dir = Direction::new(self.direction.clone()).map_err(|_| ProblemError::Direction)?;
        let (f, warnings) = RationalFunction::new(numerator, factors)?;
        Ok(Problem {
            variables: self.variables.clone(),
            f,
            dir,
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    const MAIN: &str = r#"{
        "variables": ["x", "y"],
        "numerator": [{"coeff": "1", "exp": [0, 0]}],
        "factors": [{"b": ["2/3", "1/3"], "power": 1}, {"b": ["1/3", "2/3"]}],
        "direction": [1, 1]
    }"#;

    #[test]
    fn parses_main_example() {
        let p = ProblemFile::parse(MAIN).unwrap().build().unwrap();
        assert_eq!(p.f.factors.len(), 2);
        assert_eq!(p.f.factors[0].b, vec![rat(2, 3), rat(1, 3)]);
        assert_eq!(p.f.factors[1].power, 1);
        assert_eq!(p.dir.r(), &[1, 1]);
        assert_eq!(p.f.numerator.poly.as_constant(), Some(int(1)));
    }

    #[test]
    fn rejects_bad_input() {
        let bad_rat = MAIN.replace("2/3", "2/x");
        assert!(matches!(ProblemFile::parse(&bad_rat).unwrap().build(), Err(ProblemError::Rational { .. })));
        let bad_dim = MAIN.replace("[1, 1]", "[1, 1, 1]");
        assert!(matches!(ProblemFile::parse(&bad_dim).unwrap().build(), Err(ProblemError::Dimension(_))));
        let zero_dir = MAIN.replace("[1, 1]", "[0, 1]");
        assert!(matches!(ProblemFile::parse(&zero_dir).unwrap().build(), Err(ProblemError::Direction)));
        let unknown = MAIN.replace("\"direction\"", "\"dir\"");
        assert!(matches!(ProblemFile::parse(&unknown), Err(ProblemError::Json(_))));
    }

    #[test]
    fn round_trips_through_function() {
        let file = ProblemFile::parse(MAIN).unwrap();
        let p = file.build().unwrap();
        let back = ProblemFile::from_function(p.variables.clone(), &p.f, &p.dir);
        assert_eq!(back.build().unwrap().f, p.f);
    }
}
