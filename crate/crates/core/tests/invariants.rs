use hochschild::bar_hochschild::DegreeWindow;
use hochschild::bv::BvEngine;
use hochschild::cli::verify::{cup_commutativity_suite, default_corpus, zeta_suite};
use hochschild::graded_algebra::{exterior_algebra, presentation, GenKind};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn zeta_holds_on_random_regular_sequences(seed in any::<u64>()) {
        let r = zeta_suite(seed, 1, false);
        prop_assert!(r.passed, "{:?}", r.witness);
    }

    #[test]
    fn cup_is_commutative_up_to_coboundaries(seed in any::<u64>()) {
        let r = cup_commutativity_suite(&default_corpus(), seed, 5);
        prop_assert!(r.passed && r.checked == 5, "{:?}", r.witness);
    }
}

fn engines() -> Vec<BvEngine> {
    let trunc = presentation(3, &[("x", 2, GenKind::Polynomial)], &["x^3"]).unwrap();
    let w = DegreeWindow { max_p: 3, q_min: -12, q_max: 12 };
    [exterior_algebra(2, 2, 3).unwrap(), exterior_algebra(3, 2, 3).unwrap(), trunc]
        .iter()
        .map(|p| BvEngine::new(p, w, 3).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The seven-term relation on arbitrary classes, not only generators.
    #[test]
    fn seven_term_relation_on_random_classes(which in 0usize..3, picks in prop::array::uniform3(any::<prop::sample::Index>())) {
        thread_local!(static ENGINES: Vec<BvEngine> = engines());
        ENGINES.with(|engines| {
            let e = &engines[which];
            let classes = e.ring.classes();
            let labels: Vec<&str> = picks.iter().map(|i| classes[i.index(classes.len())].label.as_str()).collect();
            for c in e.check_bv_identities(&labels).unwrap() {
                assert!(c.holds, "{:?}", c);
            }
        });
    }
}
