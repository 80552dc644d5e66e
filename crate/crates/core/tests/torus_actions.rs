use lck_core::lck::LCKStructure;
use lck_core::manifolds::gallery;
use lck_core::torus::{intersection_dimension, verdict, TorusAction};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn invertible(entries: &[f64], k: usize) -> Option<DMatrix<f64>> {
    let m = DMatrix::from_row_slice(k, k, &entries[..k * k]);
    (m.determinant().abs() > 0.2).then_some(m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn hopf_verdict_ignores_the_choice_of_generators(entries in prop::collection::vec(-2.0f64..2.0, 4)) {
        let m = gallery("hopf_diag").unwrap();
        let s = LCKStructure::of(&m).unwrap();
        let pts = m.sample_points(6, 3);
        let act = TorusAction::of(&m).unwrap();
        prop_assume!(invertible(&entries, 2).is_some());
        let mixed = act.recombined(&invertible(&entries, 2).unwrap()).unwrap();
        prop_assert_eq!(intersection_dimension(&mixed, &pts).unwrap(), 2);
        prop_assert_eq!(verdict(&mixed, Some(&s), &pts, 8).verdict, verdict(&act, Some(&s), &pts, 8).verdict);
    }

    #[test]
    fn product_dimension_is_basis_free(entries in prop::collection::vec(-2.0f64..2.0, 16)) {
        let m = gallery("product").unwrap();
        let pts = m.sample_points(4, 1);
        let act = TorusAction::of(&m).unwrap();
        prop_assume!(invertible(&entries, 4).is_some());
        let mixed = act.recombined(&invertible(&entries, 4).unwrap()).unwrap();
        prop_assert_eq!(intersection_dimension(&mixed, &pts).unwrap(), 4);
    }
}

#[test]
fn singular_recombination_is_refused() {
    let m = gallery("hopf_diag").unwrap();
    let act = TorusAction::of(&m).unwrap();
    assert!(act.recombined(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0])).is_err());
}

#[test]
fn commuting_closed_tori_in_the_gallery() {
    for id in ["hopf_diag", "hopf_nondiag", "inoue_splus", "product"] {
        let m = gallery(id).unwrap();
        let pts = m.sample_points(5, 2);
        let act = TorusAction::of(&m).unwrap();
        assert!(act.commutation_residual(&pts) < 1e-10, "{id}");
        assert!(act.closure_residual(&m, &pts).unwrap() < 1e-9, "{id}");
    }
}
