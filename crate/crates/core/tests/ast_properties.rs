mod common;

use common::queries::{check_pair, check_single, same_skeleton_similarity, shape};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn single_query_properties(s in shape()) {
        let r = check_single(&s);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }

    #[test]
    fn pair_properties(a in shape(), b in shape()) {
        let r = check_pair(&a, &b);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }
}

#[test]
fn same_skeleton_queries_are_separated() {
    let s = same_skeleton_similarity();
    assert!(s < 1.0, "{s}");
}
