mod common;

use common::{random_form, random_points, random_scalar, random_vector_field};
use lck_core::calculus::{
    apply_j, dc, exterior_d, interior_product, lie_derivative, twisted_d, wedge, DifferentialForm, Twist,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn d_squared_vanishes(seed in any::<u64>(), degree in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_form(&mut rng, 4, degree);
        let pts = random_points(&mut rng, 4, 3);
        prop_assert!(exterior_d(&exterior_d(&a)).max_norm(&pts) < 1e-10);
    }

    #[test]
    fn twisted_d_squares_to_zero_for_closed_theta(seed in any::<u64>(), degree in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_form(&mut rng, 4, degree);
        let theta = DifferentialForm::differential(&random_scalar(&mut rng, 4));
        let pts = random_points(&mut rng, 4, 3);
        let dd = twisted_d(&twisted_d(&a, &theta, Twist::Plain), &theta, Twist::Plain);
        prop_assert!(dd.max_norm(&pts) < 1e-10);
    }

    #[test]
    fn d_is_a_graded_derivation(seed in any::<u64>(), p in 0usize..3, q in 0usize..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_form(&mut rng, 4, p), random_form(&mut rng, 4, q));
        let pts = random_points(&mut rng, 4, 3);
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = wedge(&exterior_d(&a), &b).add(&wedge(&a, &exterior_d(&b)).scale(sign));
        prop_assert!(exterior_d(&wedge(&a, &b)).sub(&rhs).max_norm(&pts) < 1e-10);
    }

    #[test]
    fn cartan_formula_commutes_with_d(seed in any::<u64>(), degree in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_form(&mut rng, 4, degree);
        let x = random_vector_field(&mut rng, 4);
        let pts = random_points(&mut rng, 4, 2);
        let lhs = exterior_d(&lie_derivative(&x, &a));
        let rhs = lie_derivative(&x, &exterior_d(&a));
        prop_assert!(lhs.sub(&rhs).max_norm(&pts) < 1e-9);
    }

    #[test]
    fn contraction_is_nilpotent(seed in any::<u64>(), degree in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_form(&mut rng, 4, degree);
        let x = random_vector_field(&mut rng, 4);
        let pts = random_points(&mut rng, 4, 3);
        let twice = interior_product(&x, &interior_product(&x, &a).unwrap()).unwrap();
        prop_assert!(twice.max_norm(&pts) < 1e-12);
    }

    #[test]
    fn dc_on_functions_is_j_of_d(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = DifferentialForm::function(&random_scalar(&mut rng, 4));
        let pts = random_points(&mut rng, 4, 3);
        prop_assert!(dc(&f).sub(&apply_j(&exterior_d(&f))).max_norm(&pts) < 1e-12);
    }
}
