mod common;

use std::sync::Arc;

use foldgrowth::folding::{complete_to_cover, fold, fold_stepwise, lift_path, Lift};
use foldgrowth::graph::default_names;
use foldgrowth::graph::Graph;
use foldgrowth::labelled::{labelled_isomorphic, to_dot};
use foldgrowth::rep::{reverse_rep, Representative};
use foldgrowth::suite::{suite, SUITE};
use proptest::prelude::*;

use common::{random_labelled, random_tight_path, rng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn folding_is_idempotent_and_order_free(seed in any::<u64>()) {
        let mut r = rng(seed);
        let base = Arc::new(Graph::rose(2 + (seed % 3) as usize));
        let h = random_labelled(&base, 7, 10, &mut r);
        let once = fold(&h).graph;
        prop_assert!(once.is_immersion());
        prop_assert_eq!(fold(&once).graph.canonical_form(), once.canonical_form());
        prop_assert!(labelled_isomorphic(&once, &fold_stepwise(&h).graph));
    }

    #[test]
    fn folding_preserves_lifted_loops(seed in any::<u64>()) {
        // a closed path in h maps to a closed path in its folding
        let mut r = rng(seed);
        let base = Arc::new(Graph::rose(3));
        let h = random_labelled(&base, 6, 9, &mut r);
        let f = fold(&h);
        let p = random_tight_path(&h.carrier, 8, &|_| true, &mut r);
        let label = h.path_label(&p).tighten();
        let start = f.vertex_map[p.start()];
        match lift_path(&f.graph, start, &label).unwrap() {
            Lift::Complete(t) => prop_assert_eq!(t.end(), f.vertex_map[p.end()]),
            other => prop_assert!(false, "label does not lift: {:?}", other),
        }
    }

    #[test]
    fn covers_have_uniform_fibers(seed in any::<u64>()) {
        let mut r = rng(seed);
        let base = Arc::new(Graph::rose(2));
        let h = fold(&random_labelled(&base, 6, 8, &mut r)).graph;
        let (cover, cert) = complete_to_cover(&h).unwrap();
        prop_assert!(cover.is_cover());
        prop_assert_eq!(cover.carrier.edge_count(), cert.sheets * base.edge_count());
        prop_assert_eq!(cover.carrier.rank(), cert.sheets as i64 * (base.rank() - 1) + 1);
    }

    #[test]
    fn reverse_map_inverts_f(seed in any::<u64>(), which in 0..SUITE.len()) {
        let rep = Representative::parse(SUITE[which].1).unwrap();
        let rev = reverse_rep(&rep).unwrap();
        let mut r = rng(seed);
        let p = random_tight_path(&rep.graph, 1 + (seed % 20) as usize, &|_| true, &mut r);
        prop_assert_eq!(rep.map.apply(&rev.apply(&p)), p.clone());
        prop_assert_eq!(rev.apply(&rep.map.apply(&p)), p);
    }

    #[test]
    fn iteration_composes(seed in any::<u64>(), which in 0..SUITE.len(), j in 0usize..4, k in 0usize..4) {
        let rep = Representative::parse(SUITE[which].1).unwrap();
        let mut r = rng(seed);
        let p = random_tight_path(&rep.graph, 6, &|_| true, &mut r);
        prop_assert_eq!(rep.f_sharp(&rep.f_sharp(&p, j), k), rep.f_sharp(&p, j + k));
        prop_assert_eq!(rep.map.iterate(&p, j + k), rep.map.iterate_naive(&p, j + k));
    }
}

#[test]
fn suite_round_trips_through_emit() {
    for rep in suite().unwrap() {
        let again = Representative::parse(&rep.emit()).unwrap();
        assert_eq!(again.emit(), rep.emit(), "{}", rep.name);
        assert_eq!(again.map, rep.map);
    }
}

#[test]
fn dot_export_is_deterministic() {
    let mut r = rng(3);
    let base = Arc::new(Graph::rose(3));
    let h = fold(&random_labelled(&base, 6, 9, &mut r)).graph;
    let names = default_names(3);
    let a = to_dot(&h.canonical_relabel(), &names);
    let b = to_dot(&h.clone().canonical_relabel(), &names);
    assert_eq!(a, b);
    assert_eq!(a.matches("->").count(), h.carrier.edge_count());
}
