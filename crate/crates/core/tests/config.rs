use std::path::Path;

use text2sql_rag::eval::{ApproximatorMode, ConfigError, LlmBackend, RunConfig, SelectionKind};
use text2sql_rag::schema::SelectionMode;

#[test]
fn shipped_example_config_loads() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/run.example.toml");
    let cfg = RunConfig::load(&path).unwrap();
    let base = path.parent().unwrap();
    assert_eq!(cfg.dataset, base.join("../data/spider_dev"));
    assert_eq!(cfg.approximator.mode, ApproximatorMode::File);
    assert_eq!(
        cfg.approximator.path.as_deref(),
        Some(base.join("../target/approx.jsonl").as_path())
    );
    assert_eq!(cfg.selection.mode, SelectionKind::HybridDynamic);
    assert_eq!(cfg.selection.mode(), SelectionMode::HybridDynamic);
    assert_eq!(cfg.llm.backend, LlmBackend::Record);
    assert_eq!(
        (
            cfg.examples.e,
            cfg.examples.pool,
            cfg.split.r,
            cfg.values.topk,
            cfg.llm.max_tokens
        ),
        (5, 500, 64, 3, 256)
    );
}

fn load(text: &str) -> Result<RunConfig, ConfigError> {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.toml");
    std::fs::write(&p, text).unwrap();
    RunConfig::load(&p)
}

#[test]
fn minimal_config_uses_defaults() {
    let cfg = load("dataset = \"d\"\noutput = \"r.json\"\n[llm]\ncache = \"c.jsonl\"\n").unwrap();
    assert_eq!(cfg.approximator.mode, ApproximatorMode::Oracle);
    assert_eq!(cfg.llm.backend, LlmBackend::Replay);
    assert_eq!(cfg.workers, 4);
}

#[test]
fn bad_configs_are_rejected() {
    assert!(matches!(
        load("dataset = \"d\"\noutput = \"r\"\n[llm]\n"),
        Err(ConfigError::Invalid(_))
    ));
    assert!(matches!(
        load("dataset = \"d\"\noutput = \"r\"\nbogus = 1\n[llm]\ncache = \"c\"\n"),
        Err(ConfigError::Parse { .. })
    ));
    assert!(matches!(
        load("dataset = \"d\"\noutput = \"r\"\n[approximator]\nmode = \"file\"\n[llm]\ncache = \"c\"\n"),
        Err(ConfigError::Invalid(_))
    ));
}
