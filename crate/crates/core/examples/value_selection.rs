//! Pick representative values for the selected columns of a small catalog.

use std::collections::BTreeMap;

use text2sql_rag::bm25::Bm25Params;
use text2sql_rag::schema::{
    select_sub_schema, ColumnIndex, SchemaCatalog, SelectionMode, SpiderSchema,
};
use text2sql_rag::values::{attach, select_values, DEFAULT_VALUES_PER_COLUMN};

const SCHEMA: &str = r#"{
  "db_id": "college",
  "table_names_original": ["Departments", "Degree_Programs"],
  "table_names": ["departments", "degree programs"],
  "column_names_original": [[-1, "*"], [0, "department_id"], [0, "department_name"], [1, "degree_program_id"], [1, "department_id"], [1, "degree_summary_name"]],
  "column_names": [[-1, "*"], [0, "department id"], [0, "department name"], [1, "degree program id"], [1, "department id"], [1, "degree summary name"]],
  "column_types": ["text", "number", "text", "number", "number", "text"],
  "primary_keys": [1, 3],
  "foreign_keys": [[4, 1]]
}"#;

fn main() -> anyhow::Result<()> {
    let mut catalog = SchemaCatalog::from_spider(&serde_json::from_str::<SpiderSchema>(SCHEMA)?)?;
    let values: BTreeMap<String, Vec<String>> = [
        (
            "Departments.department_name",
            vec!["art", "medical", "statistics", "engineer", "history"],
        ),
        (
            "Degree_Programs.degree_summary_name",
            vec!["PHD", "Master", "Bachelor"],
        ),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.into_iter().map(String::from).collect()))
    .collect();
    catalog.attach_values(&values, 1000);

    let question = "How many degrees does the engineering department have?";
    let index = ColumnIndex::build(&catalog, Bm25Params::default());
    let mut sub = select_sub_schema(&catalog, &index, question, None, SelectionMode::Bm25TopK(4))?;
    let picked = select_values(&catalog, &sub, question, DEFAULT_VALUES_PER_COLUMN);
    for p in picked.values() {
        let col = catalog.column(p.column);
        println!("{:<22} {:?} matched={:?}", col.name, p.values, p.matched);
    }
    attach(&mut sub, &picked);
    println!("{} columns carry values", sub.values.len());
    Ok(())
}
