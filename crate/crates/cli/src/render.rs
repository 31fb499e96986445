//! Human-readable tables and CSV.

use std::fmt::Write as _;

use embias::{
    AnalogyResult, Comparison, DebiasSummary, EmbeddingModel, EvaluationReport, ExtremeReport,
};

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn width<'a>(header: &str, cells: impl Iterator<Item = &'a str>) -> usize {
    cells
        .map(|c| c.chars().count())
        .chain([header.chars().count()])
        .max()
        .unwrap_or(0)
}

fn pad(s: &str, w: usize) -> String {
    let n = s.chars().count();
    format!("{s}{}", " ".repeat(w.saturating_sub(n)))
}

pub fn ranked(result: &AnalogyResult) -> String {
    let w = width("word", result.ranked.iter().map(|n| n.word.as_str()));
    let mut out = format!("{:>4}  {}  score\n", "rank", pad("word", w));
    for (i, n) in result.ranked.iter().enumerate() {
        let _ = writeln!(out, "{:>4}  {}  {:.6}", i + 1, pad(&n.word, w), n.score);
    }
    out
}

pub fn inspect(model: &EmbeddingModel, format: &str, head: usize) -> String {
    let zero = (0..model.len())
        .filter(|&r| model.row(r).iter().all(|&x| x == 0.0))
        .count();
    let mut out = format!(
        "format: {format}\nvocab: {}\ndim: {}\nzero rows: {zero}\n",
        model.len(),
        model.dim()
    );
    if head > 0 && !model.is_empty() {
        out.push_str("first words:\n");
        for r in 0..head.min(model.len()) {
            let norm = model
                .row(r)
                .iter()
                .map(|&x| f64::from(x).powi(2))
                .sum::<f64>()
                .sqrt();
            let _ = writeln!(out, "  {}  (norm {norm:.4})", model.word(r));
        }
    }
    out
}

fn display_pair(p: &embias::ProfessionPair) -> String {
    format!("{}/{}", p.female, p.male)
}

pub fn evaluation(report: &EvaluationReport) -> String {
    let mut out = format!(
        "accuracy: {:.4} ({}/{} correct, {} skipped)\nseed: {}/{}  top-k-match: {}\n\n",
        report.accuracy,
        report.correct_count,
        report.evaluated_count,
        report.skipped_count,
        report.seed.0,
        report.seed.1,
        report.top_k_match,
    );
    let pairs: Vec<String> = report
        .outcomes
        .iter()
        .map(|o| display_pair(&o.pair))
        .collect();
    let preds: Vec<String> = report
        .outcomes
        .iter()
        .map(|o| o.predicted.clone().unwrap_or_else(|| "(skipped)".into()))
        .collect();
    let wp = width("pair", pairs.iter().map(String::as_str));
    let wq = width("predicted", preds.iter().map(String::as_str));
    let _ = writeln!(
        out,
        "{}  {}  score     correct",
        pad("pair", wp),
        pad("predicted", wq)
    );
    for ((o, p), q) in report.outcomes.iter().zip(&pairs).zip(&preds) {
        let score = o
            .score
            .map_or_else(|| "-".to_owned(), |s| format!("{s:.6}"));
        let _ = writeln!(
            out,
            "{}  {}  {}  {}",
            pad(p, wp),
            pad(q, wq),
            pad(&score, 8),
            yes_no(o.correct)
        );
    }
    out
}

pub fn evaluation_csv(report: &EvaluationReport) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["female", "male", "predicted", "score", "correct", "skipped"])?;
    for o in &report.outcomes {
        w.write_record([
            o.pair.female.as_str(),
            o.pair.male.as_str(),
            o.predicted.as_deref().unwrap_or(""),
            &o.score.map_or_else(String::new, |s| s.to_string()),
            &o.correct.to_string(),
            &o.skipped().to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn extremes(she: &ExtremeReport, he: &ExtremeReport) -> String {
    let mut out = String::new();
    for (title, report) in [("Extreme 'she'", she), ("Extreme 'he'", he)] {
        let _ = writeln!(out, "{title}");
        for row in &report.rows {
            let _ = writeln!(out, "  {} → {}  ({:.4})", row.probe, row.analogy, row.score);
        }
        out.push('\n');
    }
    out
}

pub fn comparison(c: &Comparison, confidence: f64) -> String {
    let t = &c.test;
    let mut out = format!(
        "A: {}  {}/{} = {:.4}\nB: {}  {}/{} = {:.4}\n",
        c.label_a,
        t.successes_a,
        t.trials_a,
        t.proportion_a(),
        c.label_b,
        t.successes_b,
        t.trials_b,
        t.proportion_b()
    );
    match (t.z, t.p_value_two_sided, t.p_value_one_sided) {
        (Some(z), Some(p2), Some(p1)) => {
            let _ = writeln!(out, "z = {z:.4}");
            let _ = writeln!(out, "p (two-sided) = {p2:.4}");
            let _ = writeln!(out, "p (one-sided, A > B) = {p1:.4}");
        }
        _ => out.push_str("z undefined: pooled proportion is 0 or 1\n"),
    }
    for s in &t.significant_at {
        let _ = writeln!(
            out,
            "significant at {:.0}%: {}",
            s.confidence * 100.0,
            yes_no(s.significant)
        );
    }
    let _ = writeln!(
        out,
        "verdict at {:.0}%: {}",
        confidence * 100.0,
        if t.significant(confidence) {
            "difference is significant"
        } else {
            "no significant difference"
        }
    );
    out
}

pub fn debias(s: &DebiasSummary) -> String {
    let method = serde_json::to_value(s.subspace_method)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    let mut out = format!(
        "subspace: {method}, rank {}\nneutralized: {} words\nequalized: {} pairs\nwrote: {} ({})\n",
        s.subspace_rank, s.neutralized_count, s.equalized_count, s.output_path, s.output_format
    );
    if !s.skipped_oov.is_empty() {
        let _ = writeln!(out, "not in vocabulary: {}", s.skipped_oov.join(", "));
    }
    out
}
