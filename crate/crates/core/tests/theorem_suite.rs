use foldgrowth::apt::{verify_main_theorem, Route, TheoremConfig};
use foldgrowth::homology::pg_abelianized_degree;
use foldgrowth::suite::suite;

/// The homology of some finite cover grows with the degree of the
/// automorphism, for every suite representative.
#[test]
fn every_suite_rep_has_a_cover_with_growth_eta() {
    for rep in suite().unwrap() {
        let cert = verify_main_theorem(&rep, &TheoremConfig::default()).unwrap();
        println!(
            "{:<18} eta {} base {:?} route {:?} sheets {:?}",
            rep.name,
            cert.eta,
            cert.base_degree,
            cert.route,
            cert.sheets()
        );
        assert!(cert.holds(), "{}: {:?}", rep.name, cert.notes);
        assert!(cert.sheets().unwrap() <= 24);
        if let Some(w) = &cert.pipeline {
            assert!(
                w.degree().unwrap() <= cert.eta,
                "{}: cover growth exceeds eta",
                rep.name
            );
        }
        if let Some(w) = &cert.fallback {
            assert_eq!(w.degree(), Some(cert.eta));
        }
        if cert.eta > 0 && cert.route == Route::Fallback {
            assert!(
                cert.notes.iter().any(|n| n.starts_with("apt immersion")),
                "{}",
                rep.name
            );
        }
    }
}

#[test]
fn abelianization_can_undercount() {
    let reps = suite().unwrap();
    let e2 = reps.iter().find(|r| r.name == "e2").unwrap();
    assert_eq!(pg_abelianized_degree(e2).unwrap(), 1);
    let cert = verify_main_theorem(
        e2,
        &TheoremConfig {
            confirm: false,
            ..TheoremConfig::default()
        },
    )
    .unwrap();
    assert_eq!(cert.homology_degree(), Some(2));
}
