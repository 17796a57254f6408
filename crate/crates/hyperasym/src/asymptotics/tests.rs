use super::*;
use crate::arrangement::tests::{lf, main_factors, nbc_factors, nonsimp_factors};
use crate::arrangement::RationalFunction;
use crate::critical::{critical_set, critical_set_relaxed, Classification, CriticalPoint, Direction, Precision};
use crate::exact::{int, rat, ExpAffine, MultiPoly, Numerator};
use crate::oracle::{ray_sequence, taylor_coeff};

fn dir(r: &[u64]) -> Direction {
    Direction::new(r.to_vec()).unwrap()
}

fn one_over(factors: Vec<crate::arrangement::LinearFactor>) -> RationalFunction {
    let d = factors[0].b.len();
    RationalFunction::from_parts(Numerator::one(d), factors)
}

fn with_numerator(g: MultiPoly, factors: Vec<crate::arrangement::LinearFactor>) -> RationalFunction {
    RationalFunction::from_parts(Numerator::polynomial(g), factors)
}

fn x_minus_y() -> MultiPoly {
    MultiPoly::affine(int(0), &[int(1), int(-1)])
}

fn compute1() -> RationalFunction {
    one_over(vec![
        lf(&[(2, 1), (1, 1)], 1),
        lf(&[(1, 1), (2, 1)], 1),
        lf(&[(4, 1), (3, 2)], 1),
        lf(&[(2, 3), (2, 3)], 1),
    ])
}

fn sym(q: Rational, pi_half: i32) -> SymbolicConstant {
    SymbolicConstant::new(q, int(1), pi_half, int(0))
}

fn opts() -> AssembleOptions {
    AssembleOptions::default()
}

#[test]
fn main_example_constant_three() {
    let f = one_over(main_factors());
    let rep = assemble(&f, &dir(&[1, 1]), &opts()).unwrap();
    assert_eq!(rep.status, DominantStatus::Generic);
    assert_eq!(rep.dominant.len(), 1);
    let c = &rep.dominant[0];
    assert_eq!(c.base, Value::Exact(int(1)));
    assert_eq!(c.alpha, int(0));
    assert_eq!(c.exactness, Exactness::ExactPolynomial { coeffs: vec![int(3)], exp: int(0) });
    let seq = ray_sequence(&f, &[1, 1], 30).unwrap();
    let err: Vec<f64> = [10, 20, 30].iter().map(|&n| (oracle_ratio(&seq[n - 1], &rep.dominant, n as u64).unwrap() - 1.0).abs()).collect();
    assert!(err[0] > err[1] && err[1] > err[2] && err[2] < 1e-2, "{err:?}");
}

#[test]
fn leading_term_matches_product_formula() {
    let f = one_over(main_factors());
    let d = dir(&[1, 1]);
    let set = critical_set(&f, &d, Precision::default()).unwrap();
    let p = set.points.iter().find(|p| p.stratum.len() == 2).unwrap();
    let c = full_codim_contribution(p, &f, &d, 128).unwrap();
    assert_eq!(Some(c.constant.symbolic.unwrap().rational), product_formula_leading(p, &f));
}

#[test]
fn squared_factor_residue_is_polynomial() {
    // 1/(1−z)² has coefficients n + 1
    let f = one_over(vec![lf(&[(1, 1)], 2)]);
    let d = dir(&[1]);
    let set = critical_set(&f, &d, Precision::default()).unwrap();
    let c = full_codim_contribution(&set.points[0], &f, &d, 128).unwrap();
    assert_eq!(c.exactness, Exactness::ExactPolynomial { coeffs: vec![int(1), int(1)], exp: int(0) });
    // e^z/(1−z)²: exact polynomial times e, matching the series
    let mut f = f;
    f.numerator.exp = Some(ExpAffine { constant: int(0), linear: vec![int(1)] });
    let c = full_codim_contribution(&set.points[0], &f, &d, 128).unwrap();
    let Exactness::ExactPolynomial { coeffs, exp } = &c.exactness else { panic!() };
    assert_eq!(exp, &int(1));
    assert_eq!(coeffs, &vec![int(0), int(1)]);
}

#[test]
fn compute1_five_contributions() {
    let f = compute1();
    let d = dir(&[1, 1]);
    let set = critical_set_relaxed(&f, &d, Precision::default()).unwrap();
    let mut got: Vec<(Rational, SymbolicConstant, Rational)> = set
        .points
        .iter()
        .filter(|p| p.classification == Classification::Contributing && p.flat == p.stratum)
        .map(|p| {
            let c = if p.stratum.len() == 2 {
                full_codim_contribution(p, &f, &d, 128).unwrap()
            } else {
                partial_codim_contribution(p, &f, &d, 128).unwrap()
            };
            (c.base.as_exact().unwrap().clone(), c.constant.symbolic.unwrap(), c.alpha)
        })
        .collect();
    got.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.rational.cmp(&b.1.rational)));
    let half = rat(-1, 2);
    let want = vec![
        (rat(16, 9), sym(rat(-128, 625), -1), half.clone()),
        (int(8), sym(rat(64, 11), -1), half.clone()),
        (int(8), sym(rat(32, 3), -1), half.clone()),
        (int(9), sym(rat(-162, 25), 0), int(0)),
        (int(24), sym(rat(10368, 625), -1), half),
    ];
    assert_eq!(got, want);
}

#[test]
fn unit_factor_residue_against_oracle() {
    // 1/((1−2x−y)(1−x−2y)(1+x)(1+y)): residue 3 at (1/3, 1/3) over units (4/3)²
    let f = one_over(vec![
        lf(&[(2, 1), (1, 1)], 1),
        lf(&[(1, 1), (2, 1)], 1),
        lf(&[(-1, 1), (0, 1)], 1),
        lf(&[(0, 1), (-1, 1)], 1),
    ]);
    let rep = assemble(&f, &dir(&[1, 1]), &opts()).unwrap();
    let c = &rep.dominant[0];
    assert_eq!(c.base, Value::Exact(int(9)));
    assert_eq!(c.constant.symbolic.clone().unwrap(), sym(rat(27, 16), 0));
    let a = taylor_coeff(&f, &[40, 40]).unwrap();
    let ratio = oracle_ratio(&a, &rep.dominant, 40).unwrap();
    assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
}

#[test]
fn compute1_dominant_through_decomposition() {
    let f = compute1();
    let rep = assemble(&f, &dir(&[1, 1]), &opts()).unwrap();
    assert!(!rep.simple);
    assert_eq!(rep.dominant.len(), 1);
    let c = &rep.dominant[0];
    assert_eq!(c.base, Value::Exact(int(24)));
    assert_eq!(c.alpha, rat(-1, 2));
    assert_eq!(c.constant.symbolic.clone().unwrap(), sym(rat(10368, 625), -1));
}

#[test]
fn single_line_saddle() {
    // [xⁿyⁿ] 1/(1−x−y) = binom(2n, n) ~ 4ⁿ/√(πn)
    let f = one_over(vec![lf(&[(1, 1), (1, 1)], 1)]);
    let rep = assemble(&f, &dir(&[1, 1]), &opts()).unwrap();
    let c = &rep.dominant[0];
    assert_eq!(c.base, Value::Exact(int(4)));
    assert_eq!(c.alpha, rat(-1, 2));
    assert_eq!(c.constant.symbolic.clone().unwrap(), sym(int(1), -1));
    let set = critical_set(&f, &dir(&[1, 1]), Precision::default()).unwrap();
    let p = &set.points[0];
    let g = log_gradient_matrix(p, &f, &[1], 128).unwrap();
    assert_eq!(g.abs_det, Value::Exact(rat(1, 2)));
    let data = saddle_data(p, &f, &dir(&[1, 1]), &[0], 128).unwrap();
    assert_eq!(data.exact_det, Some(int(8)));
}

#[test]
fn main_log_gradient_matrix() {
    let f = one_over(main_factors());
    let set = critical_set(&f, &dir(&[1, 1]), Precision::default()).unwrap();
    let p = set.points.iter().find(|p| p.stratum.len() == 2).unwrap();
    let g = log_gradient_matrix(p, &f, &[], 128).unwrap();
    assert_eq!(
        g.rows,
        vec![
            vec![Value::Exact(rat(-2, 3)), Value::Exact(rat(-1, 3))],
            vec![Value::Exact(rat(-1, 3)), Value::Exact(rat(-2, 3))]
        ]
    );
    assert_eq!(g.abs_det, Value::Exact(rat(1, 3)));
}

#[test]
fn vanishing_numerator_ladder() {
    let line = || vec![lf(&[(1, 1), (1, 1)], 1)];
    // C = (x − 2y²)/(1−x−y): G(σ) = 0, not in the ideal
    let mut g = MultiPoly::var(2, 0);
    g.add_term(vec![0, 2], int(-2));
    let c = with_numerator(g, line());
    let rep = assemble(&c, &dir(&[1, 1]), &opts()).unwrap();
    assert_eq!(rep.status, DominantStatus::ZeroLeadingUnknownOrder);
    assert_eq!(rep.contributions[0].vanishing, Vanishing::ZeroLeadingUnknownOrder);
    // D = (x − y)/(1−x−y): same verdict, rate stays log 4
    let dd = with_numerator(x_minus_y(), line());
    assert_eq!(
        ideal_membership(&dd.numerator, &dd.factors, &[0]).unwrap(),
        IdealMembership::Out
    );
    let rep = assemble(&dd, &dir(&[1, 1]), &opts()).unwrap();
    assert_eq!(rep.status, DominantStatus::ZeroLeadingUnknownOrder);
    let rate = neighbourhood_rate(&dd, &dir(&[1, 1]), &opts()).unwrap().unwrap();
    assert!(!rate.strictly_less());
    assert!((rate.log_rate.to_f64() - 4f64.ln()).abs() < 1e-12);
}

#[test]
fn ideal_skips_double_point() {
    let f = with_numerator(x_minus_y(), main_factors());
    let m = ideal_membership(&f.numerator, &f.factors, &[0, 1]).unwrap();
    let IdealMembership::In { certificate } = m else { panic!("x − y lies in the ideal") };
    // x − y = 3ℓ₂ − 3ℓ₁
    assert_eq!(certificate[0].as_constant(), Some(int(-3)));
    assert_eq!(certificate[1].as_constant(), Some(int(3)));
    let rep = assemble(&f, &dir(&[1, 1]), &opts()).unwrap();
    assert_eq!(rep.contributions[0].vanishing, Vanishing::ZeroByIdeal);
    // the diagonal vanishes: the two tied smooth points cancel
    assert_eq!(rep.status, DominantStatus::ZeroLeadingUnknownOrder);
    let rate = neighbourhood_rate(&f, &dir(&[1, 1]), &opts()).unwrap().unwrap();
    assert!(rate.strictly_less());
    assert!(rate.height.to_f64() < 0.0);
}

#[test]
fn ideal_example_off_diagonal() {
    let f = with_numerator(x_minus_y(), main_factors());
    let d = dir(&[7, 3]);
    let rep = assemble(&f, &d, &opts()).unwrap();
    assert_eq!(rep.status, DominantStatus::Generic);
    let c = &rep.dominant[0];
    assert_eq!(c.point, vec![Value::Exact(rat(21, 20)), Value::Exact(rat(9, 10))]);
    // magnitude 3√2/(2√((1−α)απ)) per unit of |r|, α = 7/10; sign from G(σ) > 0
    let per_unit = 3.0 * 2f64.sqrt() / (2.0 * (0.21 * std::f64::consts::PI).sqrt());
    assert!((c.constant.to_f64() - per_unit / 10f64.sqrt()).abs() < 1e-12);
    let seq = ray_sequence(&f, &[7, 3], 20).unwrap();
    let ratio = oracle_ratio(&seq[19], &rep.dominant, 20).unwrap();
    assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
}

#[test]
fn nonsimple_linear_growth() {
    let f = one_over(nonsimp_factors());
    let rep = assemble(&f, &dir(&[1, 1]), &opts()).unwrap();
    assert!(!rep.simple);
    assert_eq!(rep.dominant.len(), 1);
    let c = &rep.dominant[0];
    assert_eq!(c.alpha, int(1));
    assert_eq!(c.constant.symbolic.clone().unwrap(), sym(rat(15, 4), 0));
    let a = taylor_coeff(&f, &[30, 30]).unwrap();
    let ratio = oracle_ratio(&a, &rep.dominant, 30).unwrap();
    assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
}

#[test]
fn nbc_merged_constant() {
    let f = one_over(nbc_factors());
    let rep = assemble(&f, &dir(&[1, 2, 3]), &opts()).unwrap();
    assert_eq!(rep.dominant.len(), 1);
    let c = &rep.dominant[0];
    assert_eq!(c.base, Value::Exact(int(-27648)));
    assert_eq!(c.alpha, int(-1));
    // 128/135 + 32/27 from the two terms through ℓ1, times 1/(2π)
    assert_eq!(c.constant.symbolic.clone().unwrap(), sym(rat(16, 15), -2));
    assert_eq!(c.point, vec![Value::Exact(rat(1, 12)), Value::Exact(rat(1, 6)), Value::Exact(rat(-1, 4))]);
    assert_eq!(c.terms, vec![0, 1]);
    let seq = ray_sequence(&f, &[1, 2, 3], 14).unwrap();
    let ratio = oracle_ratio(&seq[13], &rep.dominant, 14).unwrap();
    assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn parity_in_one_variable() {
    let f = one_over(vec![lf(&[(1, 1)], 1), lf(&[(-1, 1)], 1)]);
    let rep = assemble(&f, &dir(&[1]), &opts()).unwrap();
    assert_eq!(rep.dominant.len(), 2);
    for n in 0..12u64 {
        let pred = scaled_prediction(&rep.dominant, n);
        assert_eq!(pred, if n % 2 == 0 { 1.0 } else { 0.0 });
    }
}

#[test]
fn double_line_with_exponential() {
    // e^{x+y}/(1−x−y)² ~ 4ⁿ √n 2^{3/2} e/√(2π)
    let mut f = one_over(vec![lf(&[(1, 1), (1, 1)], 2)]);
    f.numerator.exp = Some(ExpAffine { constant: int(0), linear: vec![int(1), int(1)] });
    let rep = assemble(&f, &dir(&[1, 1]), &opts()).unwrap();
    let c = &rep.dominant[0];
    assert_eq!(c.alpha, rat(1, 2));
    let want = 2f64.powf(1.5) * std::f64::consts::E / (2.0 * std::f64::consts::PI).sqrt();
    assert!((c.constant.to_f64() - want).abs() < 1e-12);
    assert_eq!(c.constant.symbolic.clone().unwrap(), SymbolicConstant::new(int(2), int(1), -1, int(1)));
}

#[test]
fn non_generic_dispatch() {
    let f = one_over(main_factors());
    let rep = assemble(&f, &dir(&[2, 1]), &opts()).unwrap();
    assert_eq!(rep.status, DominantStatus::NonGeneric);
    assert_eq!(rep.dominant[0].constant.symbolic.clone().unwrap(), sym(rat(3, 2), 0));
    let off = AssembleOptions { nongeneric: false, ..opts() };
    assert!(matches!(assemble(&f, &dir(&[2, 1]), &off), Err(AsymptoticsError::NonGenericUnsupported(_))));
}

#[test]
fn hessian_matches_finite_differences() {
    let f = compute1();
    let d = dir(&[1, 1]);
    let set = critical_set_relaxed(&f, &d, Precision::default()).unwrap();
    let pts: Vec<&CriticalPoint> = set.points.iter().filter(|p| p.stratum.len() == 1).collect();
    assert!(!pts.is_empty());
    for p in pts {
        for comp in valid_completions(&f, &p.stratum) {
            let data = saddle_data(p, &f, &d, &comp, 128).unwrap();
            let fd = data.finite_difference_hessian(&p.coords_f64(), d.r(), 2e-3);
            let h = data.hessian[0][0].to_f64();
            assert!((fd[0][0] - h).abs() <= 1e-8 * h.abs().max(1.0), "{} vs {h}", fd[0][0]);
        }
    }
}

#[test]
fn completion_invariance() {
    let f = compute1();
    let d = dir(&[1, 1]);
    let set = critical_set_relaxed(&f, &d, Precision::default()).unwrap();
    for p in set.points.iter().filter(|p| p.stratum.len() == 1 && p.classification == Classification::Contributing) {
        let vals: Vec<f64> = valid_completions(&f, &p.stratum)
            .iter()
            .map(|c| partial_codim_contribution_with(p, &f, &d, c, 128).unwrap().constant.to_f64())
            .collect();
        assert_eq!(vals.len(), 2);
        assert!((vals[0] - vals[1]).abs() < 1e-12 * vals[0].abs());
    }
}

#[test]
fn scaled_direction_rescales_constant() {
    // n-th coefficient along 3r is the 3n-th along r
    let f = compute1();
    let a = assemble(&f, &dir(&[1, 1]), &opts()).unwrap();
    let b = assemble(&f, &dir(&[3, 3]), &opts()).unwrap();
    let (ca, cb) = (&a.dominant[0], &b.dominant[0]);
    assert_eq!(ca.point, cb.point);
    assert_eq!(cb.base, Value::Exact(int(24 * 24 * 24)));
    let want = ca.constant.to_f64() * 3f64.powf(-0.5);
    assert!((cb.constant.to_f64() - want).abs() < 1e-12 * want.abs());
}
