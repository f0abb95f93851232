#![allow(dead_code)]

pub mod comments;
pub mod oracle;
pub mod queries;
pub mod splits;

use std::path::{Path, PathBuf};

use text2sql_rag::approx::OracleApproximator;
use text2sql_rag::eval::{
    example_pairs, ingest, Dataset, IngestOptions, Pipeline, PipelineSettings, RunReport,
};
use text2sql_rag::example_store::{ExampleIndex, HashingEmbedder};
use text2sql_rag::llm::{LlmClient, ReplayCache};

pub fn dev_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/spider_dev")
}

pub fn dev() -> Dataset {
    ingest(&dev_dir(), &IngestOptions::default()).expect("vendored dev set")
}

pub struct ClosedLoop {
    pub reports: [RunReport; 2],
    pub bytes: [String; 2],
    pub network_calls: usize,
    pub cached_prompts: usize,
}

/// Oracle approximator, a small example pool drawn from the dev set and a
/// replay cache whose answer to every prompt is that sample's gold query.
pub fn closed_loop(dataset: &Dataset, cache_path: &Path, pool_size: usize) -> ClosedLoop {
    let embedder = HashingEmbedder::new(256);
    let pairs = example_pairs(
        &dataset.samples[..pool_size.min(dataset.samples.len())],
        "pool-",
    );
    let index = ExampleIndex::build(&pairs, &embedder).unwrap();
    let settings = PipelineSettings {
        pool: 20,
        exclude_same_db: true,
        ..Default::default()
    };

    let recorder = ReplayCache::open(cache_path).unwrap();
    {
        let staging = ReplayCache::in_memory();
        let p = Pipeline::new(
            &dataset.catalogs,
            &OracleApproximator,
            &staging,
            Some((&index, &embedder)),
            settings.clone(),
        );
        for s in &dataset.samples {
            let bundle = p.prompt_for(s).expect("prompt renders");
            recorder.insert(&bundle.text, &s.gold_sql).unwrap();
        }
    }
    let cached_prompts = recorder.len();
    drop(recorder);

    let mut network_calls = 0;
    let reports = [0, 1].map(|_| {
        let replay = ReplayCache::open(cache_path).unwrap();
        let p = Pipeline::new(
            &dataset.catalogs,
            &OracleApproximator,
            &replay,
            Some((&index, &embedder)),
            settings.clone(),
        );
        let r = p.run(&dataset.samples);
        network_calls += replay.network_calls();
        r
    });
    let bytes = [reports[0].to_json(), reports[1].to_json()];
    ClosedLoop {
        reports,
        bytes,
        network_calls,
        cached_prompts,
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use text2sql_rag::example_store::{ExamplePair, PrecomputedEmbedder};
use text2sql_rag::sql::{normalize_sql, similarity, NormalizationMode};

pub const TOY_RECORDS: [(&str, [i8; 4]); 10] = [
    ("SELECT name FROM singer", [1, 0, 0, 0]),
    ("SELECT count(*) FROM singer", [1, 1, 0, 0]),
    ("SELECT name FROM singer WHERE age > 20", [0, 1, 0, 0]),
    (
        "SELECT T2.name FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id = T2.stadium_id",
        [0, 1, 1, 0],
    ),
    (
        "SELECT country, count(*) FROM singer GROUP BY country",
        [2, 2, 0, 0],
    ),
    (
        "SELECT name FROM stadium ORDER BY capacity DESC LIMIT 1",
        [0, 0, 1, 0],
    ),
    ("SELECT avg(age), max(age) FROM singer", [0, 0, 1, 1]),
    (
        "SELECT name FROM singer WHERE age > (SELECT avg(age) FROM singer)",
        [0, 0, 0, 1],
    ),
    (
        "SELECT name FROM singer UNION SELECT name FROM stadium",
        [1, 0, 0, 1],
    ),
    (
        "SELECT DISTINCT country FROM singer WHERE age < 30",
        [1, 0, 1, 0],
    ),
];

pub fn toy_index() -> ExampleIndex {
    let pairs: Vec<ExamplePair> = TOY_RECORDS
        .iter()
        .enumerate()
        .map(|(i, (sql, _))| ExamplePair {
            id: format!("r{i}"),
            question: format!("question {i}"),
            sql: sql.to_string(),
            db_id: None,
        })
        .collect();
    let embedder = PrecomputedEmbedder::from_vectors(
        "toy",
        TOY_RECORDS
            .iter()
            .enumerate()
            .map(|(i, (_, v))| (format!("r{i}"), v.iter().map(|&x| x as f32).collect())),
    );
    ExampleIndex::build(&pairs, &embedder).unwrap()
}

pub fn random_query(rng: &mut ChaCha8Rng) -> String {
    let cols = ["name", "age", "country", "capacity"];
    let tables = ["singer", "stadium", "concert"];
    let mut pick = |xs: &[&'static str]| xs[rng.gen_range(0..xs.len())];
    let item = match pick(&["col", "count", "avg", "two"]) {
        "col" => pick(&cols).to_string(),
        "count" => "count(*)".to_string(),
        "avg" => format!("avg({})", pick(&cols)),
        _ => format!("{}, {}", pick(&cols), pick(&cols)),
    };
    let mut q = format!("SELECT {item} FROM {}", pick(&tables));
    match pick(&["none", "where", "group", "order", "sub"]) {
        "where" => q += &format!(" WHERE {} > 10", pick(&cols)),
        "group" => q += &format!(" GROUP BY {}", pick(&cols)),
        "order" => q += &format!(" ORDER BY {} DESC LIMIT 1", pick(&cols)),
        "sub" => q += &format!(" WHERE age > (SELECT avg(age) FROM {})", pick(&tables)),
        _ => {}
    }
    q
}

/// Scores all records, then applies the pool cut and the re-ranking rules.
pub fn exhaustive_selection(
    query: [i8; 4],
    approx: &str,
    e: usize,
    pool: usize,
) -> Vec<(String, f64)> {
    let x = NormalizationMode::CrossDomain;
    let a = normalize_sql(approx, x).unwrap();
    let norm = |v: &[i8; 4]| v.iter().map(|&c| (c as f64).powi(2)).sum::<f64>().sqrt();
    let mut all: Vec<(String, f64, f64)> = TOY_RECORDS
        .iter()
        .enumerate()
        .map(|(i, (sql, v))| {
            let dot: f64 = v
                .iter()
                .zip(&query)
                .map(|(p, q)| *p as f64 * *q as f64)
                .sum();
            let ast = similarity(&a, &normalize_sql(sql, x).unwrap())
                .unwrap()
                .score;
            (format!("r{i}"), dot / (norm(v) * norm(&query)), ast)
        })
        .collect();
    all.sort_by(|p, q| q.1.partial_cmp(&p.1).unwrap().then_with(|| p.0.cmp(&q.0)));
    all.truncate(pool);
    let mut ranked: Vec<(usize, &(String, f64, f64))> = all.iter().enumerate().collect();
    ranked.sort_by(|(ri, p), (rj, q)| {
        q.2.partial_cmp(&p.2)
            .unwrap()
            .then(ri.cmp(rj))
            .then_with(|| p.0.cmp(&q.0))
    });
    let mut out: Vec<(String, f64)> = ranked
        .into_iter()
        .take(e)
        .map(|(_, r)| (r.0.clone(), r.2))
        .collect();
    out.reverse();
    out
}

/// Compares the index against the oracle on `n` random queries; returns the disagreements.
pub fn toy_selection_disagreements(seed: u64, n: usize) -> Vec<String> {
    let index = toy_index();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for case in 0..n {
        let approx = random_query(&mut rng);
        let mut q = [0i8; 4];
        while q.iter().all(|&c| c == 0) {
            q = [0; 4].map(|_| rng.gen_range(-2..=2));
        }
        let e = rng.gen_range(1..=5);
        let pool = rng.gen_range(1..=10);
        let mut v: Vec<f32> = q.iter().map(|&c| c as f32).collect();
        text2sql_rag::example_store::l2_normalize(&mut v);
        let got: Vec<(String, f64)> = index
            .select_examples(&v, &approx, e, pool)
            .unwrap()
            .chosen
            .into_iter()
            .map(|c| (c.id, c.ast_score))
            .collect();
        let want = exhaustive_selection(q, &approx, e, pool);
        if got != want {
            bad.push(format!(
                "case {case} {approx} q={q:?} e={e} pool={pool}: got {got:?} want {want:?}"
            ));
        }
    }
    bad
}

use text2sql_rag::example_store::{ChosenExample, SelectionResult};
use text2sql_rag::prompt::{render_prompt, PromptBundle, PromptOptions};
use text2sql_rag::schema::{Provenance, SelectedColumn, SubSchema};

pub const GOLDEN_PROMPT: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/tests/golden/student_transcripts_prompt.txt"
);

/// Departments and degree programs with selected values and one retrieved example.
pub fn student_transcripts_prompt() -> PromptBundle {
    let ds = dev();
    let mut catalog = ds
        .catalogs
        .get("student_transcripts_tracking")
        .unwrap()
        .clone();
    catalog.db_id = "student_transcripts".into();
    let dept = catalog.find_table("Departments").unwrap();
    let prog = catalog.find_table("Degree_Programs").unwrap();
    let col = |t, n: &str| catalog.find_column(t, n).unwrap();
    let dept_name = col(dept, "department_name");
    let summary = col(prog, "degree_summary_name");
    let mut columns: Vec<SelectedColumn> = [
        (col(dept, "department_id"), Provenance::ApproxQuery),
        (dept_name, Provenance::ApproxQuery),
        (col(prog, "degree_program_id"), Provenance::KeyCompletion),
        (col(prog, "department_id"), Provenance::ApproxQuery),
        (summary, Provenance::Bm25),
    ]
    .into_iter()
    .map(|(column, provenance)| SelectedColumn { column, provenance })
    .collect();
    columns.sort_by_key(|c| c.column);
    let sub = SubSchema {
        db_id: catalog.db_id.clone(),
        tables: vec![dept, prog],
        columns,
        values: [
            (
                dept_name,
                vec!["engineer".into(), "statistics".into(), "medical".into()],
            ),
            (
                summary,
                vec!["PHD".into(), "Master".into(), "Bachelor".into()],
            ),
        ]
        .into_iter()
        .collect(),
    };
    let examples = SelectionResult {
        chosen: vec![ChosenExample {
            id: "train-0001".into(),
            question: "How many courses does the department of Computer Information Systems offer?".into(),
            sql: "SELECT count(*) FROM department AS T1 JOIN course AS T2 ON T1.dept_code = T2.dept_code WHERE dept_name = \"Computer Info.Systems\"".into(),
            ast_score: 0.9,
            question_rank: 0,
        }],
        pool_size: 1,
        question_only: false,
    };
    render_prompt(
        &catalog,
        &sub,
        &examples,
        "How many degrees does the engineering department have?",
        "student_transcripts",
        &PromptOptions::default(),
    )
    .unwrap()
}
