use lck_core::report::{run_potential_first_order, run_verify, Polarity, VerifyOptions};
use lck_core::LckError;

fn small() -> VerifyOptions {
    VerifyOptions { points: 20, ..VerifyOptions::default() }
}

#[test]
fn pass_follows_polarity() {
    let r = run_verify("inoue_splus", &small()).unwrap();
    for c in &r.checks {
        let expected = match c.polarity {
            Polarity::Below => c.residual < c.tolerance,
            Polarity::Above => c.residual > c.tolerance,
        };
        assert_eq!(c.pass, expected, "{c:?}");
    }
    assert_eq!(r.exit_code(), 0);
}

#[test]
fn bad_ids_are_refused_before_running() {
    assert!(matches!(run_verify("unknown_thing", &small()), Err(LckError::UnknownFixture(_))));
    assert!(run_verify("hopf_diag:beta=2", &small()).is_err());
    assert!(matches!(run_potential_first_order("const:-1.5", &small()), Err(LckError::InadmissibleF(_))));
}

#[test]
fn summary_prints_three_digits() {
    let r = run_potential_first_order("cos:0.3", &small()).unwrap();
    let text = r.summary();
    assert!(text.lines().count() >= 5);
    assert!(text.contains("periodicity"));
}
