mod common;

use text2sql_rag::bm25::{Bm25, Bm25Params};
use text2sql_rag::schema::{
    dynamic_k, dynamic_k_for, query_elements, select_sub_schema, ColumnIndex, SelectionMode,
};
use text2sql_rag::text::tokenize;

#[test]
fn dynamic_k_closed_form() {
    for g in 1..=20usize {
        let expected = ((1.5 * g as f64).floor() as usize).clamp(6, 20);
        assert_eq!(dynamic_k_for(g), expected, "gamma {g}");
    }
    assert_eq!(dynamic_k("SELECT a, b FROM t WHERE c = 1").unwrap(), 6);
    assert_eq!(
        dynamic_k("SELECT a, b, c, d, e FROM t WHERE f = 1 AND a = 2").unwrap(),
        9
    );
    assert_eq!(
        dynamic_k("SELECT a, b, c, d, e, f, g, h, i, j, k, l, m, n FROM t").unwrap(),
        20
    );
}

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

#[test]
fn bm25_toy_by_hand() {
    // d0 = [a b], d1 = [a c c], d2 = [d]; N = 3, avgdl = 2, k1 = 1.5, b = 0.75.
    let bm = Bm25::new(
        &[toks("a b"), toks("a c c"), toks("d")],
        Bm25Params::default(),
    );
    // idf(c) = ln((3 - 1 + 0.5) / (1 + 0.5)) = ln(5/3)
    let idf_c = (5.0f64 / 3.0).ln();
    assert!((bm.idf("c") - idf_c).abs() < 1e-12);
    // idf(a) = ln(1.5 / 2.5) < 0, floored to 0.
    assert_eq!(bm.idf("a"), 0.0);
    // d1: tf = 2, |d| = 3: 2 * 2.5 / (2 + 1.5 * (0.25 + 0.75 * 1.5)) = 5 / 4.0625
    let s = bm.scores(&toks("c"));
    assert!((s[1] - idf_c * 5.0 / 4.0625).abs() < 1e-12);
    assert_eq!((s[0], s[2]), (0.0, 0.0));
    let twice = bm.scores(&toks("c c"));
    assert!((twice[1] - 2.0 * s[1]).abs() < 1e-12);
    // d0 for b: tf = 1, |d| = 2: 2.5 / (1 + 1.5) = 1
    let sb = bm.scores(&toks("b"));
    assert!((sb[0] - (5.0f64 / 3.0).ln()).abs() < 1e-12);
    assert_eq!(bm.rank(&toks("a"))[0], (0, 0.0));
}

#[test]
fn approx_only_selection_is_stable_under_restriction() {
    let ds = common::dev();
    for s in &ds.samples {
        let catalog = ds.catalogs.get(&s.db_id).unwrap();
        let index = ColumnIndex::build(catalog, Bm25Params::default());
        let sub = select_sub_schema(
            catalog,
            &index,
            &s.question,
            Some(&s.gold_sql),
            SelectionMode::ApproxOnly,
        )
        .unwrap();
        let names = sub.element_names(catalog);
        assert_eq!(names.len(), sub.tables.len() + sub.columns.len());

        let restricted = catalog.restrict(&sub.tables, &sub.column_ids());
        assert_eq!(restricted.element_count(), names.len());
        let rindex = ColumnIndex::build(&restricted, Bm25Params::default());
        let again = select_sub_schema(
            &restricted,
            &rindex,
            &s.question,
            Some(&s.gold_sql),
            SelectionMode::ApproxOnly,
        )
        .unwrap();
        assert_eq!(again.element_names(&restricted), names, "{}", s.id);

        let gold = query_elements(catalog, &s.gold_sql).unwrap();
        assert!(text2sql_rag::eval::recall(&sub, &gold), "{}", s.id);
    }
}

#[test]
fn hybrid_contains_approx_only() {
    let ds = common::dev();
    for s in ds.samples.iter().step_by(7) {
        let catalog = ds.catalogs.get(&s.db_id).unwrap();
        let index = ColumnIndex::build(catalog, Bm25Params::default());
        let approx = select_sub_schema(
            catalog,
            &index,
            &s.question,
            Some(&s.gold_sql),
            SelectionMode::ApproxOnly,
        )
        .unwrap();
        let hybrid = select_sub_schema(
            catalog,
            &index,
            &s.question,
            Some(&s.gold_sql),
            SelectionMode::HybridDynamic,
        )
        .unwrap();
        assert!(
            approx
                .element_names(catalog)
                .is_subset(&hybrid.element_names(catalog)),
            "{}",
            s.id
        );
    }
}

#[test]
fn stemmed_column_document() {
    assert_eq!(
        tokenize("department_name engineer, statistics, medical"),
        ["depart", "name", "engin", "statist", "medic"]
    );
}

#[test]
fn toy_index_matches_exhaustive_scoring() {
    let bad = common::toy_selection_disagreements(7, 50);
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn identical_example_wins_with_full_score() {
    let index = common::toy_index();
    let mut v = vec![1.0f32, 1.0, 1.0, 1.0];
    text2sql_rag::example_store::l2_normalize(&mut v);
    let sel = index
        .select_examples(
            &v,
            "SELECT T1.name FROM concert AS T2 JOIN stadium AS T1 ON T2.stadium_id = T1.stadium_id",
            3,
            10,
        )
        .unwrap();
    let best = sel.chosen.last().unwrap();
    assert_eq!((best.id.as_str(), best.ast_score), ("r3", 1.0));
    assert!(sel
        .chosen
        .windows(2)
        .all(|w| w[0].ast_score <= w[1].ast_score));

    let fallback = index.select_examples(&v, "not sql", 3, 10).unwrap();
    assert!(fallback.question_only);
    assert_eq!(fallback.chosen.len(), 3);
}
