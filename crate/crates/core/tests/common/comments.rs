use text2sql_rag::example_store::SelectionResult;
use text2sql_rag::prompt::{render_prompt, PromptOptions};
use text2sql_rag::schema::{SchemaCatalog, SpiderSchema, SubSchema};

/// (raw name, semantic name, values)
pub const SYNTHETIC: [(&str, &str, &[&str]); 20] = [
    ("name", "name", &[]),
    ("Name", "name", &[]),
    ("stadium_id", "stadium id", &[]),
    ("StadiumID", "stadium id", &[]),
    ("stadiumid", "stadium id", &[]),
    ("dept_name", "department name", &[]),
    ("dept_name", "dept name", &[]),
    ("Song_Name", "song name", &["Love"]),
    ("age", "age", &["12", "15"]),
    ("hs_id", "highschooler id", &[]),
    ("LName", "last name", &[]),
    ("LName", "lname", &[]),
    (
        "Official_ratings_(millions)",
        "official ratings (millions)",
        &[],
    ),
    ("other_details", "other details", &[]),
    ("zip_postcode", "zip postcode", &["02110"]),
    ("Is_full_time", "is full time", &[]),
    ("Is_full_time", "full time", &[]),
    ("year", "year", &[]),
    ("year", "season", &[]),
    ("Country", "nation", &["France", "Spain"]),
];

/// A comment is needed unless the semantic name equals the lowercased raw
/// name with underscores turned into spaces or dropped, or values are shown.
pub fn needs_comment(raw: &str, semantic: &str, values: &[&str]) -> bool {
    let low = raw.to_lowercase();
    !values.is_empty() || (semantic != low.replace('_', " ") && semantic != low.replace('_', ""))
}

/// Lines whose COMMENT presence or value list disagrees with the rule.
pub fn comment_failures() -> Vec<String> {
    let mut bad = Vec::new();
    let names: Vec<String> = SYNTHETIC
        .iter()
        .enumerate()
        .map(|(i, _)| format!("t{i}"))
        .collect();
    let raw = serde_json::json!({
        "db_id": "synthetic",
        "table_names_original": names,
        "table_names": names,
        "column_names_original": std::iter::once(serde_json::json!([-1, "*"]))
            .chain(SYNTHETIC.iter().enumerate().map(|(i, c)| serde_json::json!([i, c.0])))
            .collect::<Vec<_>>(),
        "column_names": std::iter::once(serde_json::json!([-1, "*"]))
            .chain(SYNTHETIC.iter().enumerate().map(|(i, c)| serde_json::json!([i, c.1])))
            .collect::<Vec<_>>(),
        "column_types": std::iter::repeat_n("text", SYNTHETIC.len() + 1).collect::<Vec<_>>(),
        "primary_keys": [],
        "foreign_keys": [],
    });
    let spider: SpiderSchema = serde_json::from_value(raw).unwrap();
    let catalog = SchemaCatalog::from_spider(&spider).unwrap();
    let mut sub = SubSchema::full(&catalog);
    for (i, (_, _, values)) in SYNTHETIC.iter().enumerate() {
        if !values.is_empty() {
            sub.values.insert(
                sub.columns[i].column,
                values.iter().map(|v| v.to_string()).collect(),
            );
        }
    }
    let empty = SelectionResult {
        chosen: Vec::new(),
        pool_size: 0,
        question_only: false,
    };
    let text = render_prompt(
        &catalog,
        &sub,
        &empty,
        "q",
        "synthetic",
        &PromptOptions::default(),
    )
    .unwrap()
    .text;
    for (i, (raw, semantic, values)) in SYNTHETIC.iter().enumerate() {
        let line = text
            .lines()
            .skip_while(|l| *l != format!("CREATE TABLE t{i}("))
            .nth(1)
            .unwrap();
        let body = line.trim_end_matches([')', ';', ',']);
        let ok = line.starts_with(&format!("    {raw} text"))
            && line.contains("COMMENT") == needs_comment(raw, semantic, values)
            && (values.is_empty() || body.ends_with(&format!("(e.g. {})'", values.join(", "))));
        if !ok {
            bad.push(line.to_string());
        }
    }
    bad
}
