//! Hyperplane arrangements of the linear factors: flats, simplicity and
//! circuit combinatorics.

use crate::exact::{dot, MultiPoly, Numerator, RatMatrix, RatVector, Rational, SolveResult};
use num_traits::{One, Zero};
use std::collections::BTreeSet;

/// `ℓ(z) = 1 − b·z` raised to `power`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearFactor {
    pub b: RatVector,
    pub power: u32,
}

impl LinearFactor {
    pub fn new(b: RatVector, power: u32) -> Self {
        LinearFactor { b, power }
    }

    pub fn eval(&self, z: &[Rational]) -> Rational {
        Rational::one() - dot(&self.b, z)
    }

    pub fn form(&self) -> MultiPoly {
        let neg: RatVector = self.b.iter().map(|x| -x.clone()).collect();
        MultiPoly::affine(Rational::one(), &neg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InputError {
    #[error("function must have at least one variable")]
    NoVariables,
    #[error("factor {0} has wrong length or a zero coefficient vector")]
    BadFactor(usize),
    #[error("factor {0} has power 0")]
    ZeroPower(usize),
    #[error("factors {0} and {1} define the same form")]
    DuplicateFactor(usize, usize),
    #[error("numerator has {got} variables, expected {expected}")]
    NumeratorDimension { got: usize, expected: usize },
    #[error("numerator is identically zero")]
    ZeroNumerator,
}

/// `G(z) / ∏ ℓ_j(z)^{p_j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    pub nvars: usize,
    pub numerator: Numerator,
    pub factors: Vec<LinearFactor>,
}

impl RationalFunction {
    /// Validates the input and cancels any factor dividing the polynomial
    /// part of the numerator; each cancellation yields a warning.
    pub fn new(
        numerator: Numerator,
        factors: Vec<LinearFactor>,
    ) -> Result<(Self, Vec<String>), InputError> {
        let d = numerator.nvars();
        if d == 0 {
            return Err(InputError::NoVariables);
        }
        if numerator.poly.is_zero() {
            return Err(InputError::ZeroNumerator);
        }
        for (i, f) in factors.iter().enumerate() {
            if f.b.len() != d || f.b.iter().all(|x| x.is_zero()) {
                return Err(InputError::BadFactor(i + 1));
            }
            if f.power == 0 {
                return Err(InputError::ZeroPower(i + 1));
            }
            for (j, g) in factors.iter().enumerate().take(i) {
                if g.b == f.b {
                    return Err(InputError::DuplicateFactor(j + 1, i + 1));
                }
            }
        }
        if let Some(e) = &numerator.exp {
            if e.linear.len() != d {
                return Err(InputError::NumeratorDimension {
                    got: e.linear.len(),
                    expected: d,
                });
            }
        }
        let mut warnings = Vec::new();
        let mut poly = numerator.poly.clone();
        let mut kept = Vec::new();
        for (i, f) in factors.into_iter().enumerate() {
            let mut p = f.power;
            while p > 0 {
                match poly.divide_by_form(&f.b) {
                    Some(q) => {
                        poly = q;
                        p -= 1;
                        warnings.push(format!(
                            "numerator divisible by factor {}; power reduced to {p}",
                            i + 1
                        ));
                    }
                    None => break,
                }
            }
            if p > 0 {
                kept.push(LinearFactor::new(f.b, p));
            }
        }
        Ok((
            RationalFunction {
                nvars: d,
                numerator: Numerator {
                    poly,
                    exp: numerator.exp,
                },
                factors: kept,
            },
            warnings,
        ))
    }

    /// Builds without validation (inputs already known to be coprime).
    pub fn from_parts(numerator: Numerator, factors: Vec<LinearFactor>) -> Self {
        RationalFunction {
            nvars: numerator.nvars(),
            numerator,
            factors,
        }
    }
}

/// A non-empty intersection `V_S` with its maximal index set `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flat {
    /// Zero-based, sorted.
    pub set: Vec<usize>,
    pub matrix: RatMatrix,
    pub dim: usize,
    pub point: RatVector,
    pub kernel: Vec<RatVector>,
}

impl Flat {
    pub fn rank(&self) -> usize {
        self.matrix.nrows().min(self.matrix.rank())
    }

    pub fn normals_independent(&self) -> bool {
        self.matrix.rank() == self.set.len()
    }

    pub fn contains(&self, z: &[Rational], factors: &[LinearFactor]) -> bool {
        self.set.iter().all(|&k| factors[k].eval(z).is_zero())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrangement {
    pub nvars: usize,
    pub factors: Vec<LinearFactor>,
    pub flats: Vec<Flat>,
}

/// Solves `{ℓ_k = 0 : k ∈ set}`; `None` when inconsistent.
fn intersect(factors: &[LinearFactor], set: &[usize], d: usize) -> Option<(RatVector, Vec<RatVector>)> {
    let b = RatMatrix::from_rows(set.iter().map(|&k| factors[k].b.clone()).collect());
    let ones = vec![Rational::one(); set.len()];
    match b.solve(&ones).ok()? {
        SolveResult::Unique(x) => Some((x, vec![])),
        SolveResult::Family {
            particular, kernel, ..
        } => Some((particular, kernel)),
        SolveResult::Inconsistent { .. } => {
            let _ = d;
            None
        }
    }
}

fn closure(factors: &[LinearFactor], point: &[Rational], kernel: &[RatVector]) -> Vec<usize> {
    (0..factors.len())
        .filter(|&k| {
            factors[k].eval(point).is_zero() && kernel.iter().all(|v| dot(&factors[k].b, v).is_zero())
        })
        .collect()
}

/// All flats, generated upwards from single hyperplanes by closure.
pub fn enumerate_flats(factors: &[LinearFactor]) -> Arrangement {
    let d = factors.first().map_or(0, |f| f.b.len());
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut flats = Vec::new();
    let mut frontier: Vec<Vec<usize>> = Vec::new();
    let make = |set: Vec<usize>| -> Option<Flat> {
        let (point, kernel) = intersect(factors, &set, d)?;
        let cl = closure(factors, &point, &kernel);
        let matrix = RatMatrix::from_rows(cl.iter().map(|&k| factors[k].b.clone()).collect());
        Some(Flat {
            set: cl,
            dim: kernel.len(),
            matrix,
            point,
            kernel,
        })
    };
    for k in 0..factors.len() {
        if let Some(f) = make(vec![k]) {
            if seen.insert(f.set.clone()) {
                frontier.push(f.set.clone());
                flats.push(f);
            }
        }
    }
    while let Some(set) = frontier.pop() {
        for k in 0..factors.len() {
            if set.contains(&k) {
                continue;
            }
            let mut s2 = set.clone();
            s2.push(k);
            s2.sort_unstable();
            if let Some(f) = make(s2) {
                if seen.insert(f.set.clone()) {
                    frontier.push(f.set.clone());
                    flats.push(f);
                }
            }
        }
    }
    flats.sort_by(|a, b| a.set.len().cmp(&b.set.len()).then(a.set.cmp(&b.set)));
    Arrangement {
        nvars: d,
        factors: factors.to_vec(),
        flats,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Simplicity {
    Simple,
    /// Zero-based indices of hyperplanes with dependent normals that meet,
    /// either at a finite point (a flat) or at infinity (parallel family).
    NotSimple { witness: Vec<usize>, at_infinity: bool },
}

impl Simplicity {
    pub fn is_simple(&self) -> bool {
        matches!(self, Simplicity::Simple)
    }
}

/// Flats with dependent normals make the arrangement non-simple. So do
/// dependent families of normals of rank below `d`, whose hyperplanes share
/// a direction and meet at infinity (parallel hyperplanes in the plane).
pub fn is_simple(arr: &Arrangement) -> Simplicity {
    for f in &arr.flats {
        if !f.normals_independent() {
            return Simplicity::NotSimple {
                witness: f.set.clone(),
                at_infinity: false,
            };
        }
    }
    let vecs: Vec<RatVector> = arr.factors.iter().map(|f| f.b.clone()).collect();
    for c in minimal_dependent_sets(&vecs) {
        let m = RatMatrix::from_rows(c.iter().map(|&k| vecs[k].clone()).collect());
        if m.rank() < arr.nvars {
            return Simplicity::NotSimple {
                witness: c,
                at_infinity: true,
            };
        }
    }
    Simplicity::Simple
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatroidData {
    /// Zero-based, each sorted increasingly.
    pub circuits: Vec<Vec<usize>>,
    pub broken_circuits: Vec<Vec<usize>>,
}

/// Vectors `(1, b)` representing the forms `ℓ_j` in the space of affine functions.
pub fn homogenized(factors: &[LinearFactor]) -> Vec<RatVector> {
    factors
        .iter()
        .map(|f| {
            let mut v = vec![Rational::one()];
            v.extend(f.b.iter().cloned());
            v
        })
        .collect()
}

fn rank_of(vecs: &[RatVector], set: &[usize]) -> usize {
    if set.is_empty() {
        return 0;
    }
    RatMatrix::from_rows(set.iter().map(|&k| vecs[k].clone()).collect()).rank()
}

fn subsets_of_size(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

/// Minimal dependent index sets, by rank tests up to size `rank + 1`.
pub fn minimal_dependent_sets(vecs: &[RatVector]) -> Vec<Vec<usize>> {
    let m = vecs.len();
    let total = rank_of(vecs, &(0..m).collect::<Vec<_>>());
    let mut out: Vec<Vec<usize>> = Vec::new();
    for size in 1..=(total + 1).min(m) {
        for s in subsets_of_size(m, size) {
            if rank_of(vecs, &s) == s.len() {
                continue;
            }
            if out.iter().any(|c| c.iter().all(|x| s.contains(x))) {
                continue;
            }
            out.push(s);
        }
    }
    out
}

/// Circuits of the forms `ℓ_j` (linear dependences among the functions
/// themselves) and the broken circuits obtained by dropping the largest index.
pub fn circuits_and_broken_circuits(factors: &[LinearFactor]) -> MatroidData {
    let circuits = minimal_dependent_sets(&homogenized(factors));
    let broken_circuits = circuits
        .iter()
        .map(|c| c[..c.len() - 1].to_vec())
        .collect();
    MatroidData {
        circuits,
        broken_circuits,
    }
}

impl MatroidData {
    /// A support is χ-independent when it contains no broken circuit.
    pub fn is_chi_independent(&self, support: &[usize]) -> bool {
        !self
            .broken_circuits
            .iter()
            .any(|bc| bc.iter().all(|x| support.contains(x)))
    }
}

/// Coefficients `a` (one per member) with `Σ a_k ℓ_{i_k} = 0`, scaled so
/// that the last coefficient is 1.
pub fn circuit_relation(factors: &[LinearFactor], circuit: &[usize]) -> RatVector {
    let vecs = homogenized(factors);
    // columns are the member vectors
    let cols: Vec<RatVector> = circuit.iter().map(|&k| vecs[k].clone()).collect();
    let m = RatMatrix::from_columns(&cols);
    let ker = m.null_space();
    assert_eq!(ker.len(), 1, "circuit must have a one-dimensional relation space");
    let last = ker[0].last().unwrap().clone();
    ker[0].iter().map(|x| x / &last).collect()
}
