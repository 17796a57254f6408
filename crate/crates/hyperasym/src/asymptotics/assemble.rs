//! Height-ordered assembly of contributions into the dominant asymptotics.

use super::{
    full_codim_contribution, partial_codim_contribution, poly_ideal_membership, AsymptoticsError, Contribution,
    Exactness, LeadingConstant, SymbolicConstant, Vanishing,
};
use crate::arrangement::{enumerate_flats, is_simple, Arrangement, RationalFunction, Simplicity};
use crate::critical::{
    critical_set, critical_set_relaxed, Classification, CriticalError, CriticalPoint, Direction, Precision, Value,
};
use crate::decompose::{simple_decomp, Decomposition};
use crate::exact::{CertifiedReal, Rational};
use crate::nongeneric::{codim1_constant, face_data};
use num_bigint::BigInt;
use num_traits::Zero;
use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssembleOptions {
    pub precision: Precision,
    /// Dispatch codimension-one boundary points to the non-generic formula.
    pub nongeneric: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            precision: Precision::default(),
            nongeneric: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DominantStatus {
    /// Generic direction; the dominant class has a non-zero leading term.
    Generic,
    /// Exact direction on a codimension-one face of the normal cone.
    NonGeneric,
    /// The top class cancels or cannot be certified non-zero.
    ZeroLeadingUnknownOrder,
    /// No contributing point survives.
    NoContribution,
}

/// Critical points of one decomposition term, indices mapped back to the
/// original factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermCritical {
    pub term: Option<usize>,
    pub support: Vec<usize>,
    pub points: Vec<CriticalPoint>,
    pub generic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsymptoticReport {
    pub direction: Vec<u64>,
    pub arrangement: Arrangement,
    pub simple: bool,
    pub decomposition: Option<Decomposition>,
    pub critical: Vec<TermCritical>,
    /// Merged contributions, by descending height.
    pub contributions: Vec<Contribution>,
    /// Height classes of `contributions`.
    pub classes: Vec<Vec<usize>>,
    /// Non-vanishing members of the dominant class.
    pub dominant: Vec<Contribution>,
    pub status: DominantStatus,
    pub warnings: Vec<String>,
    pub bits: u32,
    /// A height or cancellation question stayed open at the precision cap.
    pub undecided_at_cap: bool,
}

impl AsymptoticReport {
    /// `C₁ b₁^n n^{α₁} + …` over the dominant class.
    pub fn dominant_expression(&self) -> String {
        if self.dominant.is_empty() {
            return "0".into();
        }
        self.dominant.iter().map(|c| c.expression()).collect::<Vec<_>>().join(" + ")
    }

    pub fn dominant_height(&self) -> Option<&CertifiedReal> {
        self.dominant.first().map(|c| &c.height)
    }
}

/// One analysed piece: the whole function, or a decomposition term.
struct Unit {
    term: Option<usize>,
    f: RationalFunction,
    support: Vec<usize>,
}

enum Escalate {
    Done(Box<AsymptoticReport>),
    Retry,
}

fn remap(p: &CriticalPoint, support: &[usize]) -> CriticalPoint {
    let mut q = p.clone();
    q.flat = p.flat.iter().map(|&k| support[k]).collect();
    q.stratum = p.stratum.iter().map(|&k| support[k]).collect();
    q
}

fn zero_contribution(p: &CriticalPoint, dir: &Direction, bits: u32) -> Contribution {
    Contribution {
        point: p.coords.clone(),
        stratum: p.stratum.clone(),
        orthant: p.orthant.clone(),
        height: p.height.clone(),
        base: match &p.base {
            Some(b) => Value::Exact(b.clone()),
            None => super::base_value(&p.coords, dir.r(), bits),
        },
        alpha: Rational::zero(),
        constant: LeadingConstant::zero(bits),
        exactness: Exactness::LeadingTermOnly,
        vanishing: Vanishing::ZeroByIdeal,
        terms: Vec::new(),
    }
}

/// Same point: exact equality, or overlapping enclosures in every coordinate.
fn same_point(a: &[Value], b: &[Value]) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (Value::Exact(p), Value::Exact(q)) => p == q,
        _ => {
            let bits = 64;
            x.to_certified(bits).intersect(&y.to_certified(bits)).is_some()
        }
    })
}

fn poly_alpha(coeffs: &[Rational]) -> Rational {
    Rational::from_integer(BigInt::from(coeffs.len().saturating_sub(1)))
}

/// Adds two contributions at the same point.
fn merge(a: &Contribution, b: &Contribution, bits: u32) -> Contribution {
    if b.vanishing == Vanishing::ZeroByIdeal {
        let mut out = a.clone();
        out.terms.extend(&b.terms);
        return out;
    }
    if a.vanishing == Vanishing::ZeroByIdeal {
        let mut out = b.clone();
        out.terms.extend(&a.terms);
        out.terms.sort_unstable();
        return out;
    }
    let mut out = a.clone();
    out.terms.extend(&b.terms);
    out.terms.sort_unstable();
    for k in &b.stratum {
        if !out.stratum.contains(k) {
            out.stratum.push(*k);
        }
    }
    out.stratum.sort_unstable();
    if let (
        Exactness::ExactPolynomial { coeffs: ca, exp: ea },
        Exactness::ExactPolynomial { coeffs: cb, exp: eb },
    ) = (&a.exactness, &b.exactness)
    {
        if ea == eb {
            let n = ca.len().max(cb.len());
            let mut coeffs: Vec<Rational> = (0..n)
                .map(|i| {
                    ca.get(i).cloned().unwrap_or_else(Rational::zero) + cb.get(i).cloned().unwrap_or_else(Rational::zero)
                })
                .collect();
            while coeffs.last().is_some_and(Zero::is_zero) {
                coeffs.pop();
            }
            out.alpha = poly_alpha(&coeffs);
            out.vanishing = if coeffs.is_empty() {
                Vanishing::ZeroByIdeal
            } else {
                Vanishing::NonZero
            };
            let lead = coeffs.last().cloned().unwrap_or_else(Rational::zero);
            out.constant = LeadingConstant::exact(SymbolicConstant::new(lead, Rational::from_integer(1.into()), 0, ea.clone()), bits);
            out.exactness = Exactness::ExactPolynomial { coeffs, exp: ea.clone() };
            return out;
        }
    }
    out.exactness = Exactness::LeadingTermOnly;
    match a.alpha.cmp(&b.alpha) {
        Ordering::Greater => {}
        Ordering::Less => {
            out.alpha = b.alpha.clone();
            out.constant = b.constant.clone();
            out.vanishing = b.vanishing;
        }
        Ordering::Equal => {
            out.constant = a.constant.add(&b.constant);
            out.vanishing = match (a.vanishing, b.vanishing, out.constant.is_zero()) {
                (Vanishing::NonZero, Vanishing::NonZero, Some(false)) => Vanishing::NonZero,
                _ => Vanishing::ZeroLeadingUnknownOrder,
            };
        }
    }
    out
}

fn compare_contributions(a: &Contribution, b: &Contribution) -> Option<Ordering> {
    if let (Value::Exact(x), Value::Exact(y)) = (&a.base, &b.base) {
        use num_traits::Signed;
        return Some(x.abs().cmp(&y.abs()));
    }
    a.height.compare(&b.height)
}

/// Contribution of one point of a unit, `Err` carrying the reason when a
/// boundary point cannot be handled.
fn point_contribution(
    p: &CriticalPoint,
    unit: &Unit,
    dir: &Direction,
    bits: u32,
    opts: &AssembleOptions,
) -> Result<(Contribution, Option<Result<(), String>>), AsymptoticsError> {
    let mut local = p.clone();
    // stratum in unit-local indices
    local.stratum = p
        .stratum
        .iter()
        .map(|k| unit.support.iter().position(|s| s == k).expect("stratum inside support"))
        .collect();
    let f = &unit.f;
    if poly_ideal_membership(&f.numerator.poly, &f.factors, &local.stratum).is_in() {
        let mut c = zero_contribution(p, dir, bits);
        c.terms = unit.term.into_iter().collect();
        return Ok((c, None));
    }
    let (mut c, boundary) = if p.classification == Classification::Boundary {
        if !opts.nongeneric {
            return Err(AsymptoticsError::NonGenericUnsupported("non-generic dispatch disabled".into()));
        }
        match face_data(&local, f, dir).and_then(|face| codim1_constant(&face, &local, f, bits)) {
            Ok(c) => (c, Some(Ok(()))),
            Err(AsymptoticsError::NonGenericUnsupported(msg)) => {
                let mut c = zero_contribution(p, dir, bits);
                c.vanishing = Vanishing::ZeroLeadingUnknownOrder;
                (c, Some(Err(msg)))
            }
            Err(e) => return Err(e),
        }
    } else if local.stratum.len() == f.nvars {
        (full_codim_contribution(&local, f, dir, bits)?, None)
    } else {
        (partial_codim_contribution(&local, f, dir, bits)?, None)
    };
    c.stratum = p.stratum.clone();
    c.terms = unit.term.into_iter().collect();
    Ok((c, boundary))
}

fn units_of(f: &RationalFunction, simple: bool) -> (Vec<Unit>, Option<Decomposition>) {
    if simple {
        return (
            vec![Unit {
                term: None,
                f: f.clone(),
                support: (0..f.factors.len()).collect(),
            }],
            None,
        );
    }
    let dec = simple_decomp(f);
    let units = dec
        .terms
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.support().is_empty())
        .map(|(i, t)| {
            let (g, support) = t.to_function(&dec.factors);
            Unit {
                term: Some(i),
                f: g,
                support,
            }
        })
        .collect();
    (units, Some(dec))
}

fn assemble_at(
    f: &RationalFunction,
    dir: &Direction,
    opts: &AssembleOptions,
    bits: u32,
) -> Result<Escalate, AsymptoticsError> {
    let at_cap = bits >= opts.precision.max_bits;
    let arrangement = enumerate_flats(&f.factors);
    let simple = is_simple(&arrangement).is_simple();
    let (units, decomposition) = units_of(f, simple);
    let mut warnings = Vec::new();
    if !simple {
        warnings.push(
            "non-simple input: analysed through a partial-fraction decomposition; \
             exponential-rate drops inside chambers are not detected"
                .to_string(),
        );
    }
    let prec = Precision {
        bits,
        max_bits: opts.precision.max_bits,
    };
    let mut critical = Vec::new();
    let mut raw: Vec<(Contribution, Option<Result<(), String>>, Classification)> = Vec::new();
    for unit in &units {
        let set = match critical_set(&unit.f, dir, prec) {
            Ok(s) => s,
            Err(CriticalError::NotSimple { .. }) => {
                warnings.push(format!("term {:?} is not simple; using relaxed classification", unit.term));
                critical_set_relaxed(&unit.f, dir, prec)?
            }
            Err(e) => return Err(e.into()),
        };
        let points: Vec<CriticalPoint> = set.points.iter().map(|p| remap(p, &unit.support)).collect();
        // one entry per (point, stratum), preferring the point's own flat
        let mut chosen: Vec<&CriticalPoint> = Vec::new();
        for p in &points {
            if p.classification == Classification::NonContributing {
                continue;
            }
            match chosen.iter().position(|q| q.stratum == p.stratum && same_point(&q.coords, &p.coords)) {
                Some(i) => {
                    if p.flat == p.stratum && chosen[i].flat != chosen[i].stratum {
                        chosen[i] = p;
                    }
                }
                None => chosen.push(p),
            }
        }
        for p in chosen {
            let (c, b) = point_contribution(p, unit, dir, set.bits.max(bits), opts)?;
            raw.push((c, b, p.classification));
        }
        critical.push(TermCritical {
            term: unit.term,
            support: unit.support.clone(),
            points,
            generic: set.generic,
        });
    }

    // merge contributions sitting at the same point
    let mut merged: Vec<(Contribution, Option<Result<(), String>>)> = Vec::new();
    for (c, b, _) in raw {
        match merged.iter().position(|(m, _)| same_point(&m.point, &c.point)) {
            Some(i) => {
                let nb = match (&merged[i].1, &b) {
                    (Some(Err(e)), _) | (_, Some(Err(e))) => Some(Err(e.clone())),
                    (Some(Ok(())), _) | (_, Some(Ok(()))) => Some(Ok(())),
                    _ => None,
                };
                merged[i] = (merge(&merged[i].0, &c, bits), nb);
            }
            None => merged.push((c, b)),
        }
    }
    merged.sort_by(|a, b| {
        compare_contributions(&b.0, &a.0)
            .unwrap_or_else(|| b.0.height.to_f64().partial_cmp(&a.0.height.to_f64()).unwrap_or(Ordering::Equal))
    });
    let mut undecided_at_cap = false;
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..merged.len() {
        if let Some(last) = classes.last_mut() {
            match compare_contributions(&merged[last[0]].0, &merged[i].0) {
                Some(Ordering::Equal) => {
                    last.push(i);
                    continue;
                }
                Some(_) => {}
                None => {
                    if !at_cap {
                        return Ok(Escalate::Retry);
                    }
                    warnings.push(format!("height tie unresolved at {bits} bits; grouped"));
                    undecided_at_cap = true;
                    last.push(i);
                    continue;
                }
            }
        }
        classes.push(vec![i]);
    }

    let mut status = DominantStatus::NoContribution;
    let mut dominant = Vec::new();
    let mut top: Option<usize> = None;
    for (ci, class) in classes.iter().enumerate() {
        let live: Vec<usize> = class
            .iter()
            .copied()
            .filter(|&i| merged[i].0.vanishing != Vanishing::ZeroByIdeal)
            .collect();
        if live.is_empty() {
            continue;
        }
        if top.is_none() {
            top = Some(ci);
            let boundary: Vec<usize> = live.iter().copied().filter(|&i| merged[i].1.is_some()).collect();
            if !boundary.is_empty() {
                if live.len() > 1 {
                    return Err(AsymptoticsError::NonGenericUnsupported(
                        "boundary point shares the top height with other contributing points".into(),
                    ));
                }
                if let Some(Err(msg)) = &merged[boundary[0]].1 {
                    return Err(AsymptoticsError::NonGenericUnsupported(msg.clone()));
                }
                status = DominantStatus::NonGeneric;
                dominant.push(merged[boundary[0]].0.clone());
                continue;
            }
            let undecided = live.iter().any(|&i| merged[i].0.vanishing == Vanishing::ZeroLeadingUnknownOrder);
            let nonzero: Vec<usize> = live
                .iter()
                .copied()
                .filter(|&i| merged[i].0.vanishing == Vanishing::NonZero)
                .collect();
            if undecided && !at_cap && live.iter().any(|&i| merged[i].0.constant.is_zero().is_none()) {
                return Ok(Escalate::Retry);
            }
            // tied points with the same phase and n-power may cancel
            let mut groups: Vec<(i32, Rational, Vec<usize>, LeadingConstant)> = Vec::new();
            for &i in &nonzero {
                let c = &merged[i].0;
                match groups.iter_mut().find(|g| g.0 == c.phase() && g.1 == c.alpha) {
                    Some(g) => {
                        g.2.push(i);
                        g.3 = g.3.add(&c.constant);
                    }
                    None => groups.push((c.phase(), c.alpha.clone(), vec![i], c.constant.clone())),
                }
            }
            if groups.iter().any(|g| g.3.is_zero().is_none()) {
                if !at_cap {
                    return Ok(Escalate::Retry);
                }
                warnings.push(format!("cancellation of tied constants unresolved at {bits} bits"));
                undecided_at_cap = true;
            }
            let cancelled = groups.iter().any(|g| g.3.is_zero() != Some(false));
            let nonzero: Vec<usize> = groups
                .iter()
                .filter(|g| g.3.is_zero() == Some(false))
                .flat_map(|g| g.2.iter().copied())
                .collect();
            if cancelled {
                warnings.push("tied dominant contributions cancel at leading order".into());
            }
            if nonzero.is_empty() {
                status = DominantStatus::ZeroLeadingUnknownOrder;
                dominant = live.iter().map(|&i| merged[i].0.clone()).collect();
                warnings.push("leading term of the dominant class vanishes; the true order is lower and unknown".into());
            } else {
                status = DominantStatus::Generic;
                dominant = nonzero.iter().map(|&i| merged[i].0.clone()).collect();
                if undecided {
                    warnings.push("some dominant-height contributions have a vanishing leading term".into());
                }
            }
        } else if live.iter().any(|&i| merged[i].1.is_some()) {
            warnings.push("non-generic boundary point below the dominant height".into());
        }
    }
    let contributions: Vec<Contribution> = merged.into_iter().map(|(c, _)| c).collect();
    Ok(Escalate::Done(Box::new(AsymptoticReport {
        direction: dir.r().to_vec(),
        arrangement,
        simple,
        decomposition,
        critical,
        contributions,
        classes,
        dominant,
        status,
        warnings,
        bits,
        undecided_at_cap,
    })))
}

/// Full pipeline: decomposition when needed, critical points, contributions
/// and the height walk, escalating precision on undecided comparisons.
pub fn assemble(f: &RationalFunction, dir: &Direction, opts: &AssembleOptions) -> Result<AsymptoticReport, AsymptoticsError> {
    if dir.dim() != f.nvars {
        return Err(CriticalError::BadDirection.into());
    }
    let mut bits = opts.precision.bits;
    loop {
        match assemble_at(f, dir, opts, bits)? {
            Escalate::Done(r) => return Ok(*r),
            Escalate::Retry => bits = (bits * 2).min(opts.precision.max_bits),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighbourhoodRate {
    /// Normalized height `h_{r̂}(σ*)`.
    pub height: CertifiedReal,
    /// `log |σ*^{-r}|` for the integer direction.
    pub log_rate: CertifiedReal,
    /// Heights of higher classes skipped because every numerator was in the ideal.
    pub skipped: Vec<CertifiedReal>,
}

impl NeighbourhoodRate {
    /// The exponential rate is strictly below the top contributing height.
    pub fn strictly_less(&self) -> bool {
        !self.skipped.is_empty()
    }
}

/// Height of the highest class not annihilated by the ideal test.
pub fn neighbourhood_rate(
    f: &RationalFunction,
    dir: &Direction,
    opts: &AssembleOptions,
) -> Result<Option<NeighbourhoodRate>, AsymptoticsError> {
    if let Simplicity::NotSimple { .. } = is_simple(&enumerate_flats(&f.factors)) {
        return Err(AsymptoticsError::WrongPoint("neighbourhood rate needs a simple function".into()));
    }
    let report = assemble(f, dir, opts)?;
    let mut skipped = Vec::new();
    for class in &report.classes {
        let c = &report.contributions[class[0]];
        if class.iter().all(|&i| report.contributions[i].vanishing == Vanishing::ZeroByIdeal) {
            skipped.push(c.height.clone());
            continue;
        }
        let norm = Rational::from_integer(BigInt::from(dir.norm()));
        return Ok(Some(NeighbourhoodRate {
            height: c.height.clone(),
            log_rate: c.height.mul_rational(&norm),
            skipped,
        }));
    }
    Ok(None)
}
