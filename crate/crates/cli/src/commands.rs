use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use embias::{
    compare_evaluations, evaluate_professions, extreme_side, hard_debias, load_path, most_similar,
    read_pairs_path, read_words_path, top_neighbors, write_model, AnalogyQuery, Comparison,
    DebiasConfig, DebiasSummary, EmbeddingModel, EvaluationOptions, Format, ModelMeta, RunReport,
    RunResults, Side, SubspaceMethod,
};
use log::{info, warn};
use serde_json::{json, Value};

use crate::cli::{
    AnalogyArgs, Command, CompareArgs, ConvertArgs, DebiasArgs, EvaluateArgs, ExtremesArgs,
    GlobalArgs, InspectArgs, MethodArg, NeighborsArgs, Output, TableOutput,
};
use crate::render;
use crate::UsageError;

struct Context<'a> {
    global: &'a GlobalArgs,
    timestamp: String,
}

impl Context<'_> {
    fn model_path(&self) -> Result<&Path> {
        self.global
            .model
            .as_deref()
            .ok_or_else(|| UsageError("this command needs --model PATH".into()).into())
    }

    fn load(&self) -> Result<(EmbeddingModel, ModelMeta)> {
        let path = self.model_path()?;
        let format = self
            .global
            .model_format
            .map_or_else(|| Format::from_path(path), Format::from);
        info!("loading {} ({format})", path.display());
        let model = load_path(path, format, self.global.limit)
            .with_context(|| format!("cannot load model {}", path.display()))?;
        info!("loaded {} words, dim {}", model.len(), model.dim());
        let meta = ModelMeta {
            path: path.display().to_string(),
            format,
            limit: self.global.limit,
            vocab: model.len(),
            dim: model.dim(),
        };
        Ok((model, meta))
    }

    fn report(
        &self,
        command: &str,
        model: Option<ModelMeta>,
        parameters: Value,
        results: RunResults,
    ) -> RunReport {
        let parameters: BTreeMap<String, Value> = match parameters {
            Value::Object(map) => map.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        RunReport::new(command, self.timestamp.clone(), model, parameters, results)
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// Writes `text` to `out`, or stdout when `out` is `None`.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn json_text(report: &RunReport) -> Result<String> {
    let mut s = report.to_json()?;
    s.push('\n');
    Ok(s)
}

pub fn run(global: &GlobalArgs, command: &Command, timestamp: String) -> Result<()> {
    let ctx = Context { global, timestamp };
    match command {
        Command::Analogy(a) => analogy(&ctx, a),
        Command::Neighbors(a) => neighbors(&ctx, a),
        Command::Inspect(a) => inspect(&ctx, a),
        Command::Evaluate(a) => evaluate(&ctx, a),
        Command::Debias(a) => debias(&ctx, a),
        Command::Extremes(a) => extremes(&ctx, a),
        Command::Compare(a) => compare(&ctx, a),
        Command::Convert(a) => convert(&ctx, a),
    }
}

fn analogy(ctx: &Context, args: &AnalogyArgs) -> Result<()> {
    let query = AnalogyQuery::new(&args.positives, &args.negatives, args.top_n)?;
    let (model, meta) = ctx.load()?;
    let result = most_similar(&model, &query)?;
    let text = match args.output {
        Output::Text => render::ranked(&result),
        Output::Json => json_text(&ctx.report(
            "analogy",
            Some(meta),
            json!({
                "positive": args.positives,
                "negative": args.negatives,
                "top_n": args.top_n,
            }),
            RunResults::Analogy { query, result },
        ))?,
    };
    emit(args.out.as_deref(), &text)
}

fn neighbors(ctx: &Context, args: &NeighborsArgs) -> Result<()> {
    let (model, meta) = ctx.load()?;
    let result = top_neighbors(&model, &args.word, args.top_n)?;
    let text = match args.output {
        Output::Text => render::ranked(&result),
        Output::Json => json_text(&ctx.report(
            "neighbors",
            Some(meta),
            json!({ "word": args.word, "top_n": args.top_n }),
            RunResults::Analogy {
                query: AnalogyQuery::new([args.word.as_str()], Vec::<&str>::new(), args.top_n)?,
                result,
            },
        ))?,
    };
    emit(args.out.as_deref(), &text)
}

fn inspect(ctx: &Context, args: &InspectArgs) -> Result<()> {
    let (model, meta) = ctx.load()?;
    emit(
        None,
        &render::inspect(&model, &meta.format.to_string(), args.head),
    )
}

fn evaluate(ctx: &Context, args: &EvaluateArgs) -> Result<()> {
    let pairs = read_pairs_path(&args.pairs)
        .with_context(|| format!("cannot read pairs from {}", args.pairs.display()))?;
    if pairs.is_empty() {
        bail!(UsageError(format!("no pairs in {}", args.pairs.display())));
    }
    let (model, meta) = ctx.load()?;
    let options = EvaluationOptions {
        seed: (args.seed.0.clone(), args.seed.1.clone()),
        skip_oov: args.skip_oov,
        top_k_match: args.top_k_match,
    };
    let report = evaluate_professions(&model, &pairs, &options)?;
    if report.skipped_count > 0 {
        warn!(
            "{} pair(s) skipped as out of vocabulary",
            report.skipped_count
        );
    }
    let text = match args.output {
        TableOutput::Text => render::evaluation(&report),
        TableOutput::Csv => render::evaluation_csv(&report)?,
        TableOutput::Json => json_text(&ctx.report(
            "evaluate",
            Some(meta),
            json!({
                "pairs": path_str(&args.pairs),
                "seed": args.seed.to_string(),
                "skip_oov": args.skip_oov,
                "top_k_match": args.top_k_match,
            }),
            RunResults::Evaluation(report),
        ))?,
    };
    emit(args.out.as_deref(), &text)
}

fn debias(ctx: &Context, args: &DebiasArgs) -> Result<()> {
    let read_pairs = |p: &Path| {
        read_pairs_path(p).with_context(|| format!("cannot read pairs from {}", p.display()))
    };
    let definitional_pairs = read_pairs(&args.definitional)?;
    let equalize_pairs = match &args.equalize {
        Some(p) => read_pairs(p)?,
        None => Vec::new(),
    };
    let gender_specific = match &args.gender_specific {
        Some(p) => {
            read_words_path(p).with_context(|| format!("cannot read words from {}", p.display()))?
        }
        None => Vec::new(),
    };
    let config = DebiasConfig {
        definitional_pairs,
        equalize_pairs,
        gender_specific,
        subspace_method: match args.method {
            MethodArg::Diff => SubspaceMethod::PairDifference,
            MethodArg::Pca => SubspaceMethod::Pca,
        },
        pca_components: args.components,
    };
    // Fail on config errors before paying for the model load.
    config.validate()?;
    let (model, meta) = ctx.load()?;
    let outcome = hard_debias(&model, &config)?;
    drop(model);
    if !outcome.skipped_oov.is_empty() {
        warn!(
            "not in vocabulary, ignored: {}",
            outcome.skipped_oov.join(", ")
        );
    }

    let format = Format::from(args.out_format);
    write_model_file(&outcome.model, format, &args.out)?;

    let summary = DebiasSummary {
        output_path: path_str(&args.out),
        output_format: format,
        subspace_method: outcome.subspace.method,
        subspace_rank: outcome.subspace.rank(),
        neutralized_count: outcome.neutralized_count,
        equalized_count: outcome.equalized_count,
        skipped_oov: outcome.skipped_oov,
    };
    let text = match args.output {
        Output::Text => render::debias(&summary),
        Output::Json => json_text(&ctx.report(
            "debias",
            Some(meta),
            json!({
                "definitional": path_str(&args.definitional),
                "equalize": args.equalize.as_deref().map(path_str),
                "gender_specific": args.gender_specific.as_deref().map(path_str),
                "method": summary.subspace_method,
                "components": args.components,
            }),
            RunResults::Debias(summary),
        ))?,
    };
    emit(None, &text)
}

fn write_model_file(model: &EmbeddingModel, format: Format, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::with_capacity(1 << 20, file);
    write_model(model, format, &mut out)
        .with_context(|| format!("cannot write model to {}", path.display()))?;
    out.flush()
        .with_context(|| format!("cannot write model to {}", path.display()))?;
    Ok(())
}

fn probes(args: &ExtremesArgs, side_specific: &Option<PathBuf>) -> Result<Vec<String>> {
    let path = side_specific
        .as_ref()
        .or(args.probes.as_ref())
        .ok_or_else(|| UsageError("give --probes or both --she-probes and --he-probes".into()))?;
    read_words_path(path).with_context(|| format!("cannot read probes from {}", path.display()))
}

fn extremes(ctx: &Context, args: &ExtremesArgs) -> Result<()> {
    let she_probes = probes(args, &args.she_probes)?;
    let he_probes = probes(args, &args.he_probes)?;
    let (model, meta) = ctx.load()?;
    let seed = (args.seed.0.as_str(), args.seed.1.as_str());
    let present = |words: Vec<String>| -> Vec<String> {
        let (kept, missing): (Vec<_>, Vec<_>) = words.into_iter().partition(|w| model.contains(w));
        if !missing.is_empty() {
            warn!("probes not in vocabulary, ignored: {}", missing.join(", "));
        }
        kept
    };
    let she = extreme_side(&model, seed, Side::She, &present(she_probes), args.per_side)?;
    let he = extreme_side(&model, seed, Side::He, &present(he_probes), args.per_side)?;
    let text = match args.output {
        Output::Text => render::extremes(&she, &he),
        Output::Json => json_text(&ctx.report(
            "extremes",
            Some(meta),
            json!({
                "seed": args.seed.to_string(),
                "probes": args.probes.as_deref().map(path_str),
                "she_probes": args.she_probes.as_deref().map(path_str),
                "he_probes": args.he_probes.as_deref().map(path_str),
                "per_side": args.per_side,
            }),
            RunResults::Extremes { she, he },
        ))?,
    };
    emit(args.out.as_deref(), &text)
}

fn read_report(path: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read report {}", path.display()))?;
    RunReport::from_json(&text).with_context(|| format!("malformed report {}", path.display()))
}

fn compare(ctx: &Context, args: &CompareArgs) -> Result<()> {
    let a = read_report(&args.report_a)?;
    let b = read_report(&args.report_b)?;
    let (test, warnings) = compare_evaluations(
        a.evaluation().with_context(|| path_str(&args.report_a))?,
        b.evaluation().with_context(|| path_str(&args.report_b))?,
    )?;
    for w in &warnings {
        warn!("{w}");
    }
    let comparison = Comparison {
        label_a: path_str(&args.report_a),
        label_b: path_str(&args.report_b),
        test,
        warnings,
    };
    let confidence = args.confidence.level();
    let text = match args.output {
        Output::Text => render::comparison(&comparison, confidence),
        Output::Json => json_text(&ctx.report(
            "compare",
            None,
            json!({
                "report_a": comparison.label_a,
                "report_b": comparison.label_b,
                "confidence": confidence,
            }),
            RunResults::Comparison(comparison),
        ))?,
    };
    emit(args.out.as_deref(), &text)
}

fn convert(ctx: &Context, args: &ConvertArgs) -> Result<()> {
    let format = args
        .out_format
        .map_or_else(|| Format::from_path(&args.out), Format::from);
    let (model, meta) = ctx.load()?;
    write_model_file(&model, format, &args.out)?;
    info!(
        "wrote {} rows from {} ({}) to {} ({format})",
        model.len(),
        meta.path,
        meta.format,
        args.out.display()
    );
    Ok(())
}
