//! Partial fractions over an arrangement: rewrites `F` as a sum of terms
//! whose supports contain no broken circuit.

use crate::arrangement::{circuit_relation, circuits_and_broken_circuits, LinearFactor, MatroidData, RationalFunction};
use crate::exact::{ExpAffine, MultiPoly, Numerator, RatMatrix, RatVector, Rational};
use crate::oracle::{OracleError, SeriesTable};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecomposeError {
    #[error("circuit {circuit:?} has an inconsistent dependence relation")]
    BadRelation { circuit: Vec<usize> },
    #[error("pivot {pivot} is not in circuit {circuit:?}")]
    BadPivot { circuit: Vec<usize>, pivot: usize },
    #[error("broken circuit {0:?} is not contained in the support")]
    NotInSupport(Vec<usize>),
}

/// `coeff · numerator / ∏ ℓ_j^{q_j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rational,
    pub q: Vec<u32>,
    pub numerator: Numerator,
}

impl Term {
    pub fn support(&self) -> Vec<usize> {
        self.q
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn denominator_degree(&self) -> u32 {
        self.q.iter().sum()
    }

    /// The term as a rational function over the factors with non-zero power.
    /// Returns the function and the original index of each kept factor.
    pub fn to_function(&self, factors: &[LinearFactor]) -> (RationalFunction, Vec<usize>) {
        let support = self.support();
        let facs = support
            .iter()
            .map(|&k| LinearFactor::new(factors[k].b.clone(), self.q[k]))
            .collect();
        (
            RationalFunction::from_parts(self.numerator.scale(&self.coeff), facs),
            support,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Exchange {
        q: Vec<u32>,
        broken_circuit: Vec<usize>,
        circuit: Vec<usize>,
        pivot: usize,
        outputs: Vec<(Vec<u32>, Rational)>,
    },
    IdealReduction {
        q: Vec<u32>,
        outputs: Vec<Vec<u32>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub factors: Vec<LinearFactor>,
    pub terms: Vec<Term>,
    pub log: Vec<Step>,
}

impl Decomposition {
    pub fn is_trivial(&self) -> bool {
        self.log.is_empty()
    }
}

/// One application of the base exchange identity
/// `1/ℓ^q = Σ_{k≠j} (−a_k/a_j) / ℓ^{q + e_j − e_k}` for the relation
/// `Σ a_k ℓ_k = 0` over `circuit`, pivoting on `pivot`.
pub fn base_exchange_step(
    t: &Term,
    factors: &[LinearFactor],
    circuit: &[usize],
    pivot: usize,
) -> Result<Vec<Term>, DecomposeError> {
    let pos = circuit
        .iter()
        .position(|&k| k == pivot)
        .ok_or_else(|| DecomposeError::BadPivot {
            circuit: circuit.to_vec(),
            pivot,
        })?;
    let rel = circuit_relation(factors, circuit);
    if rel.iter().any(Zero::is_zero) {
        return Err(DecomposeError::BadRelation {
            circuit: circuit.to_vec(),
        });
    }
    for (&k, _) in circuit.iter().zip(&rel).filter(|(&k, _)| k != pivot) {
        if t.q[k] == 0 {
            return Err(DecomposeError::NotInSupport(
                circuit.iter().copied().filter(|&x| x != pivot).collect(),
            ));
        }
    }
    let aj = &rel[pos];
    Ok(circuit
        .iter()
        .zip(&rel)
        .filter(|(&k, _)| k != pivot)
        .map(|(&k, ak)| {
            let mut q = t.q.clone();
            q[pivot] += 1;
            q[k] -= 1;
            Term {
                coeff: &t.coeff * (-(ak / aj)),
                q,
                numerator: t.numerator.clone(),
            }
        })
        .collect())
}

/// Splits `g` along the ideal generated by `ℓ_k^{p_k}` for `k ∈ support`.
///
/// Returns `Some(h)` with `g = Σ h_i ℓ_{support[i]}^{p_i}` when `g` lies in
/// the ideal, `None` otherwise.
pub fn ideal_split(g: &MultiPoly, factors: &[LinearFactor], support: &[usize], powers: &[u32]) -> Option<Vec<MultiPoly>> {
    let d = g.nvars();
    let s = support.len();
    if s == 0 {
        return g.is_zero().then(Vec::new);
    }
    let b = RatMatrix::from_rows(support.iter().map(|&k| factors[k].b.clone()).collect());
    if b.rank() < s {
        // forms with dependent normals: some combination is a non-zero constant
        let ker = b.transpose().null_space();
        let c = &ker[0];
        let total: Rational = c.iter().fold(Rational::zero(), |a, x| a + x);
        if total.is_zero() {
            return None;
        }
        // Σ (c_k/total) ℓ_k = 1; raise it to a power and distribute
        return Some(unit_power_split(g, factors, support, powers, c, &total));
    }
    let (z0, a, t, shift) = chart(factors, support, d);
    let gw = g.substitute_affine(&z0, &a);
    let mut parts = vec![MultiPoly::zero(d); s];
    for (e, c) in gw.terms() {
        let i = (0..s).find(|&i| e[i] >= powers[i])?;
        let mut e2 = e.clone();
        e2[i] -= powers[i];
        parts[i].add_term(e2, c.clone());
    }
    Some(parts.iter().map(|p| p.substitute_affine(&shift, &t)).collect())
}

/// Expands `g · (Σ u_k ℓ_k)^N = g` with `N = 1 + Σ (p_k − 1)`; every
/// monomial `ℓ^α` with `|α| = N` reaches some `α_k ≥ p_k`.
fn unit_power_split(
    g: &MultiPoly,
    factors: &[LinearFactor],
    support: &[usize],
    powers: &[u32],
    c: &RatVector,
    total: &Rational,
) -> Vec<MultiPoly> {
    let s = support.len();
    let n: u32 = 1 + powers.iter().map(|p| p - 1).sum::<u32>();
    let d = g.nvars();
    let u: Vec<Rational> = c.iter().map(|x| x / total).collect();
    let lpoly = MultiPoly::affine(Rational::zero(), &u).pow(n);
    let forms: Vec<MultiPoly> = support.iter().map(|&k| factors[k].form()).collect();
    let mut parts = vec![MultiPoly::zero(d); s];
    for (e, coef) in lpoly.terms() {
        let i = (0..s).find(|&i| e[i] >= powers[i]).expect("pigeonhole");
        let mut m = g.scale(coef);
        for (j, &ej) in e.iter().enumerate() {
            let k = if j == i { ej - powers[i] } else { ej };
            if k > 0 {
                m = m.mul(&forms[j].pow(k));
            }
        }
        parts[i] = parts[i].add(&m);
    }
    parts
}

/// Affine chart with `w_i = ℓ_{support[i]}(z)` for `i < s` and standard
/// coordinates after. Returns `(z0, A, T, c)` with `z = z0 + A w` and `w = T z + c`.
pub(crate) fn chart(factors: &[LinearFactor], support: &[usize], d: usize) -> (RatVector, RatMatrix, RatMatrix, RatVector) {
    let mut rows: Vec<RatVector> = support
        .iter()
        .map(|&k| factors[k].b.iter().map(|x| -x.clone()).collect())
        .collect();
    let mut shift = vec![Rational::one(); support.len()];
    for i in 0..d {
        if rows.len() == d {
            break;
        }
        let mut e = vec![Rational::zero(); d];
        e[i] = Rational::one();
        let mut trial = rows.clone();
        trial.push(e);
        if RatMatrix::from_rows(trial.clone()).rank() == trial.len() {
            rows = trial;
            shift.push(Rational::zero());
        }
    }
    let t = RatMatrix::from_rows(rows);
    let a = t.inverse().expect("completed chart is invertible");
    let z0: RatVector = a.mul_vec(&shift).into_iter().map(|x| -x).collect();
    (z0, a, t, shift)
}

fn support_of(q: &[u32]) -> Vec<usize> {
    q.iter()
        .enumerate()
        .filter(|(_, &x)| x > 0)
        .map(|(i, _)| i)
        .collect()
}

fn first_broken_circuit<'a>(md: &'a MatroidData, support: &[usize]) -> Option<(&'a Vec<usize>, &'a Vec<usize>)> {
    // smallest broken circuits first, ties lexicographic
    let mut cands: Vec<(&Vec<usize>, &Vec<usize>)> = md
        .broken_circuits
        .iter()
        .zip(&md.circuits)
        .filter(|(bc, _)| bc.iter().all(|x| support.contains(x)))
        .collect();
    cands.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
    cands.into_iter().next()
}

/// Decomposes `F` into terms with χ-independent supports, then removes
/// numerators lying in the ideal of their support.
pub fn simple_decomp(f: &RationalFunction) -> Decomposition {
    let m = f.factors.len();
    let d = f.nvars;
    let md = circuits_and_broken_circuits(&f.factors);
    let exp: Option<ExpAffine> = f.numerator.exp.clone();
    let q0: Vec<u32> = f.factors.iter().map(|x| x.power).collect();
    let mut pending: BTreeMap<Vec<u32>, MultiPoly> = BTreeMap::new();
    pending.insert(q0, f.numerator.poly.clone());
    let mut done: BTreeMap<Vec<u32>, MultiPoly> = BTreeMap::new();
    let mut log = Vec::new();

    // base exchange, largest exponent vector first so merges happen early
    while let Some((q, g)) = pending.pop_last() {
        if g.is_zero() {
            continue;
        }
        let support = support_of(&q);
        let Some((bc, circuit)) = first_broken_circuit(&md, &support) else {
            add_into(&mut done, q, g);
            continue;
        };
        let pivot = *circuit.last().expect("non-empty circuit");
        let t = Term {
            coeff: Rational::one(),
            q: q.clone(),
            numerator: Numerator::polynomial(g.clone()),
        };
        let outs = base_exchange_step(&t, &f.factors, circuit, pivot).expect("broken circuit lies in the support");
        log.push(Step::Exchange {
            q: q.clone(),
            broken_circuit: bc.clone(),
            circuit: circuit.clone(),
            pivot,
            outputs: outs.iter().map(|o| (o.q.clone(), o.coeff.clone())).collect(),
        });
        for o in outs {
            add_into(&mut pending, o.q, g.scale(&o.coeff));
        }
    }

    // ideal cleanup, largest denominator degree first
    loop {
        let pick = done
            .iter()
            .filter(|(_, g)| !g.is_zero())
            .filter_map(|(q, g)| {
                let support = support_of(q);
                if support.is_empty() {
                    return None;
                }
                let ones = vec![1; support.len()];
                ideal_split(g, &f.factors, &support, &ones).map(|parts| (q.clone(), support, parts))
            })
            .max_by(|a, b| {
                let da: u32 = a.0.iter().sum();
                let db: u32 = b.0.iter().sum();
                da.cmp(&db).then_with(|| a.0.cmp(&b.0))
            });
        let Some((q, support, parts)) = pick else { break };
        done.remove(&q);
        let mut outs = Vec::new();
        for (k, h) in support.iter().zip(parts) {
            if h.is_zero() {
                continue;
            }
            let mut q2 = q.clone();
            q2[*k] -= 1;
            outs.push(q2.clone());
            add_into(&mut done, q2, h);
        }
        log.push(Step::IdealReduction { q, outputs: outs });
    }

    let terms = done
        .into_iter()
        .filter(|(_, g)| !g.is_zero())
        .rev()
        .map(|(q, g)| {
            let (coeff, poly) = match g.as_constant() {
                Some(c) => (c, MultiPoly::one(d)),
                None => (Rational::one(), g),
            };
            Term {
                coeff,
                q,
                numerator: Numerator {
                    poly,
                    exp: exp.clone(),
                },
            }
        })
        .collect();
    debug_assert!(m == f.factors.len());
    Decomposition {
        factors: f.factors.clone(),
        terms,
        log,
    }
}

fn add_into(map: &mut BTreeMap<Vec<u32>, MultiPoly>, q: Vec<u32>, g: MultiPoly) {
    match map.get_mut(&q) {
        Some(h) => *h = h.add(&g),
        None => {
            map.insert(q, g);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyOutcome {
    Pass { checked: usize },
    Fail {
        index: Vec<usize>,
        expected: Rational,
        got: Rational,
    },
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, VerifyOutcome::Pass { .. })
    }
}

/// Compares every Taylor coefficient of total degree at most `degree`.
pub fn verify_decomposition(f: &RationalFunction, dec: &Decomposition, degree: usize) -> Result<VerifyOutcome, OracleError> {
    let maxes = vec![degree; f.nvars];
    let target = SeriesTable::build(f, &maxes, Some(degree))?;
    let mut tables = Vec::new();
    for t in &dec.terms {
        let (g, _) = t.to_function(&dec.factors);
        tables.push(SeriesTable::build(&g, &maxes, Some(degree))?);
    }
    let mut checked = 0;
    let mut entries: Vec<(Vec<usize>, &Rational)> = target.entries().collect();
    entries.sort_by_key(|(idx, _)| (idx.iter().sum::<usize>(), idx.clone()));
    for (idx, want) in entries {
        let mut got = Rational::zero();
        for t in &tables {
            got += t.get(&idx)?;
        }
        if &got != want {
            return Ok(VerifyOutcome::Fail {
                index: idx,
                expected: want.clone(),
                got,
            });
        }
        checked += 1;
    }
    Ok(VerifyOutcome::Pass { checked })
}
