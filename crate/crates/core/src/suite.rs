//! A bundled suite of validated representatives covering ranks 2 to 5 and
//! growth degrees 0 to 3, including graphs with more than one vertex.

use crate::rep::{RepError, Representative};

pub const SUITE: &[(&str, &str)] = &[
    ("bigon2", include_str!("../reps/bigon2.rep")),
    ("chain4", include_str!("../reps/chain4.rep")),
    ("commutator4", include_str!("../reps/commutator4.rep")),
    (
        "double_quadratic4",
        include_str!("../reps/double_quadratic4.rep"),
    ),
    ("e1", include_str!("../reps/e1.rep")),
    ("e2", include_str!("../reps/e2.rep")),
    ("fixed_rose2", include_str!("../reps/fixed_rose2.rep")),
    ("fixed_rose5", include_str!("../reps/fixed_rose5.rep")),
    ("mixed5", include_str!("../reps/mixed5.rep")),
    ("shared_twist3", include_str!("../reps/shared_twist3.rep")),
    ("theta3", include_str!("../reps/theta3.rep")),
    ("twist2", include_str!("../reps/twist2.rep")),
];

/// Parses every suite representative.
pub fn suite() -> Result<Vec<Representative>, RepError> {
    SUITE
        .iter()
        .map(|(_, text)| Representative::parse(text))
        .collect()
}

/// The suite representative with the given name.
pub fn suite_rep(name: &str) -> Option<Representative> {
    SUITE
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Representative::parse(text).expect("suite representatives are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::analyze_growth;

    #[test]
    fn suite_is_valid_and_spans_ranks_and_degrees() {
        let reps = suite().unwrap();
        assert!(reps.len() >= 10);
        let mut ranks = std::collections::BTreeSet::new();
        let mut degrees = std::collections::BTreeSet::new();
        for r in &reps {
            assert!(r.warnings.is_empty(), "{}: {:?}", r.name, r.warnings);
            ranks.insert(r.rank());
            degrees.insert(analyze_growth(r).unwrap().eta);
        }
        assert_eq!(ranks.into_iter().collect::<Vec<_>>(), vec![2, 3, 4, 5]);
        assert_eq!(degrees.into_iter().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert!(reps.iter().any(|r| r.graph.vertex_count() > 1));
    }
}
