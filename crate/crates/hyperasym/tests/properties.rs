//! Randomized invariants over small simple arrangements.

mod common;

use common::*;
use hyperasym::exact::rat;
use proptest::prelude::*;

proptest! {
    #![proptest_config(config())]

    #[test]
    fn critical_points_are_real_and_unique_per_orthant(c in simple_case()) {
        check_real_and_unique(&c)?;
    }

    #[test]
    fn contributing_points_minimize_height(c in simple_case(), seed in any::<u64>()) {
        check_minimizer(&c, seed)?;
    }

    #[test]
    fn scaling_the_direction_keeps_points(c in simple_case()) {
        check_scale_invariance(&c)?;
    }

    #[test]
    fn hessian_matches_finite_differences(c in simple_case()) {
        check_hessian(&c)?;
    }

    #[test]
    fn leading_constant_is_completion_invariant(c in simple_case()) {
        check_completion_invariance(&c)?;
    }

    #[test]
    fn planar_points_match_bounded_pieces(c in simple_case().prop_filter("planar", |c| c.f.nvars == 2)) {
        check_planar_count(&c)?;
    }

    #[test]
    fn one_variable_parity_is_exact(p in 1i64..=4, q in 1i64..=4) {
        check_parity(&rat(p, q))?;
    }
}
