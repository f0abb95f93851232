use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use text2sql_rag::eval::{
    build_embedder, example_pairs, export_official, ingest, load_report, run_config, IngestOptions,
    RunConfig, SelectionKind,
};
use text2sql_rag::example_store::ExampleIndex;

#[derive(Parser)]
#[command(version, about = "Retrieval-augmented Text-to-SQL runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Selection {
    Bm25Topk,
    ApproxOnly,
    HybridDynamic,
    Full,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a Spider-layout dataset directory.
    Ingest {
        dataset: PathBuf,
        #[arg(long, default_value = "dev.json")]
        samples: String,
        #[arg(long)]
        strict: bool,
    },
    /// Embed and store an example pool built from a dataset's samples.
    BuildIndex {
        /// Run config; only the `examples` section is read.
        #[arg(long)]
        config: PathBuf,
        /// Dataset directory holding the pool samples.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "train_spider.json")]
        samples: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the pipeline described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long = "selection.mode", value_enum)]
        selection: Option<Selection>,
        #[arg(long = "selection.k")]
        k: Option<usize>,
        #[arg(long = "examples.e")]
        e: Option<usize>,
        #[arg(long = "examples.pool")]
        pool: Option<usize>,
        #[arg(long = "split.r")]
        r: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        strict: bool,
    },
    /// Recompute and print the aggregates of a report.
    Score { report: PathBuf },
    /// Write predictions and gold queries for the official scorer.
    ExportOfficial {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "dev.json")]
        samples: String,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: Option<PathBuf>,
    },
}

fn main() -> Result<ExitCode> {
    match Cli::parse().cmd {
        Cmd::Ingest {
            dataset,
            samples,
            strict,
        } => {
            let ds = ingest(
                &dataset,
                &IngestOptions {
                    samples_file: samples,
                    strict,
                    ..Default::default()
                },
            )?;
            println!(
                "{} samples over {} databases",
                ds.samples.len(),
                ds.catalogs.len()
            );
            for e in &ds.rejected {
                println!("rejected: {e}");
            }
        }
        Cmd::BuildIndex {
            config,
            dataset,
            samples,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            let ds = ingest(
                &dataset,
                &IngestOptions {
                    samples_file: samples.clone(),
                    ..Default::default()
                },
            )?;
            let prefix = format!("{}-", samples.trim_end_matches(".json"));
            let embedder = build_embedder(&cfg)?;
            let index =
                ExampleIndex::build(&example_pairs(&ds.samples, &prefix), embedder.as_ref())?;
            index.save(&out)?;
            println!(
                "{} examples indexed with {} into {}",
                index.len(),
                index.embedder_id,
                out.display()
            );
        }
        Cmd::Run {
            config,
            output,
            index,
            selection,
            k,
            e,
            pool,
            r,
            workers,
            strict,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(o) = output {
                cfg.output = o;
            }
            if index.is_some() {
                cfg.index = index;
            }
            if let Some(s) = selection {
                cfg.selection.mode = match s {
                    Selection::Bm25Topk => SelectionKind::Bm25Topk,
                    Selection::ApproxOnly => SelectionKind::ApproxOnly,
                    Selection::HybridDynamic => SelectionKind::HybridDynamic,
                    Selection::Full => SelectionKind::Full,
                };
            }
            cfg.selection.k = k.unwrap_or(cfg.selection.k);
            cfg.examples.e = e.unwrap_or(cfg.examples.e);
            cfg.examples.pool = pool.unwrap_or(cfg.examples.pool);
            cfg.split.r = r.unwrap_or(cfg.split.r);
            cfg.workers = workers.unwrap_or(cfg.workers);
            cfg.strict |= strict;
            cfg.validate()?;
            let outcome = run_config(&cfg)?;
            print!("{}", outcome.report.summary());
            println!("network calls   {:>8}", outcome.network_calls);
            println!("report written to {}", cfg.output.display());
            let frac = outcome.report.failure_fraction();
            if frac > cfg.max_failure_fraction {
                eprintln!(
                    "failure fraction {frac:.3} exceeds {}",
                    cfg.max_failure_fraction
                );
                return Ok(ExitCode::FAILURE);
            }
        }
        Cmd::Score { report } => {
            let rep = load_report(&report)?;
            if !rep.is_consistent() {
                bail!(
                    "aggregates in {} do not match its records",
                    report.display()
                );
            }
            print!("{}", rep.summary());
        }
        Cmd::ExportOfficial {
            report,
            dataset,
            samples,
            pred,
            gold,
        } => {
            let rep = load_report(&report)?;
            let ds = ingest(
                &dataset,
                &IngestOptions {
                    samples_file: samples,
                    ..Default::default()
                },
            )
            .with_context(|| format!("loading {}", dataset.display()))?;
            export_official(&rep, &ds.samples, &pred, gold.as_deref())?;
            println!(
                "{} predictions written to {}",
                ds.samples.len(),
                pred.display()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
