use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use embias::{load_path, write_model, EmbeddingModel, Format};
use serde_json::Value;
use tempfile::TempDir;

const TS: &str = "2024-01-01T00:00:00Z";

fn embias(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_embias"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(o: Output) -> Output {
    assert!(
        o.status.success(),
        "exit {:?}\nstderr: {}",
        o.status.code(),
        stderr(&o)
    );
    o
}

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Self {
        Work {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn file(&self, name: &str, content: &str) -> String {
        let p = self.path(name);
        fs::write(&p, content).unwrap();
        p.to_str().unwrap().to_owned()
    }

    fn model(&self, name: &str, model: &EmbeddingModel, format: Format) -> String {
        let p = self.path(name);
        write_model(model, format, fs::File::create(&p).unwrap()).unwrap();
        p.to_str().unwrap().to_owned()
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `n` profession pairs, the first `k` of which satisfy `ela + male - ele = female`.
fn planted(k: usize, n: usize) -> (EmbeddingModel, String) {
    let dim = 2 * n + 2;
    let e = |i: usize| {
        let mut v = vec![0.0f32; dim];
        v[i] = 1.0;
        v
    };
    let mut rows = vec![("ela".to_owned(), e(0)), ("ele".to_owned(), e(1))];
    let mut csv = String::from("# female,male\n");
    for i in 0..n {
        let axis = 2 + 2 * i;
        let mut target = e(axis);
        target[0] = 1.0;
        target[1] = -1.0;
        rows.push((format!("prof{i}o"), e(axis)));
        if i < k {
            rows.push((format!("prof{i}a"), target));
        } else {
            rows.push((format!("prof{i}a"), e(axis + 1)));
            rows.push((format!("decoy{i}"), target));
        }
        csv.push_str(&format!("prof{i}a,prof{i}o\n"));
    }
    (EmbeddingModel::from_rows(dim, rows).unwrap(), csv)
}

/// Gendered toy model for debias runs.
fn gendered() -> EmbeddingModel {
    let rows: Vec<(&str, Vec<f32>)> = vec![
        ("ela", vec![1.0, 0.2, 0.1, 0.0]),
        ("ele", vec![-1.0, 0.2, 0.1, 0.0]),
        ("mulher", vec![0.9, 0.3, 0.0, 0.1]),
        ("homem", vec![-0.9, 0.3, 0.0, 0.1]),
        ("rainha", vec![0.7, 0.1, 0.6, 0.0]),
        ("rei", vec![-0.6, 0.2, 0.6, 0.1]),
        ("mãe", vec![0.8, -0.2, 0.1, 0.4]),
        ("enfermeira", vec![0.5, 0.5, 0.3, 0.3]),
        ("engenheiro", vec![-0.4, 0.6, 0.2, 0.2]),
        ("mesa", vec![0.1, -0.3, 0.8, 0.2]),
        ("cadeira", vec![-0.1, -0.2, 0.7, 0.5]),
    ];
    EmbeddingModel::from_rows(4, rows).unwrap()
}

#[test]
fn analogy_top_n_and_oov() {
    let w = Work::new();
    let (model, _) = planted(2, 3);
    let m = w.model("m.txt", &model, Format::Text);
    let out = ok(embias(&[
        "--model",
        &m,
        "analogy",
        "--positive",
        "ela",
        "--positive",
        "prof0o",
        "--negative",
        "ele",
        "--top-n",
        "1",
    ]));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1, "{text}");
    assert!(rows[0].contains("prof0a"));

    let out = embias(&[
        "--model",
        &m,
        "analogy",
        "--positive",
        "ela",
        "--positive",
        "zebra",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("zebra"));
}

#[test]
fn analogy_json_and_neighbors() {
    let w = Work::new();
    let m = w.model("m.bin", &gendered(), Format::Binary);
    let out = ok(embias(&[
        "--model",
        &m,
        "--timestamp",
        TS,
        "analogy",
        "--positive",
        "mesa",
        "--output",
        "json",
    ]));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["results"]["kind"], "analogy");
    assert_eq!(v["results"]["result"]["ranked"][0]["word"], "cadeira");

    let out = ok(embias(&[
        "--model",
        &m,
        "neighbors",
        "mesa",
        "--top-n",
        "2",
    ]));
    assert_eq!(stdout(&out).lines().count(), 3);
    let out = ok(embias(&["--model", &m, "inspect", "--head", "2"]));
    let text = stdout(&out);
    assert!(
        text.contains("vocab: 11") && text.contains("dim: 4") && text.contains("format: binary")
    );
}

#[test]
fn planted_evaluation_json_and_csv() {
    let w = Work::new();
    let (model, csv) = planted(3, 10);
    let m = w.model("planted.bin", &model, Format::Binary);
    let pairs = w.file("pairs.csv", &csv);
    let out = ok(embias(&[
        "--model",
        &m,
        "--timestamp",
        TS,
        "evaluate",
        "--pairs",
        &pairs,
        "--output",
        "json",
    ]));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["results"]["kind"], "evaluation");
    assert_eq!(v["results"]["accuracy"].as_f64(), Some(0.30));
    assert_eq!(v["results"]["correct_count"], 3);
    assert_eq!(v["model"]["vocab"], model.len());
    assert_eq!(v["parameters"]["seed"], "ela,ele");

    let out = ok(embias(&["--model", &m, "evaluate", "--pairs", &pairs]));
    assert!(stdout(&out).starts_with("accuracy: 0.3000 (3/10 correct, 0 skipped)"));

    let out = ok(embias(&[
        "--model", &m, "evaluate", "--pairs", &pairs, "--output", "csv",
    ]));
    let text = stdout(&out);
    assert_eq!(
        text.lines().next(),
        Some("female,male,predicted,score,correct,skipped")
    );
    assert_eq!(
        text.lines().filter(|l| l.contains(",true,false")).count(),
        3
    );
}

#[test]
fn evaluation_input_errors() {
    let w = Work::new();
    let (model, csv) = planted(1, 2);
    let m = w.model("m.txt", &model, Format::Text);
    let empty = w.file("empty.csv", "# nothing\n\n");
    let out = embias(&["--model", &m, "evaluate", "--pairs", &empty]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no pairs"));

    let with_oov = w.file("oov.csv", &format!("{csv}zebraa,zebrao\n"));
    let out = embias(&["--model", &m, "evaluate", "--pairs", &with_oov]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("zebra"));
    let out = ok(embias(&[
        "--model",
        &m,
        "evaluate",
        "--pairs",
        &with_oov,
        "--skip-oov",
    ]));
    assert!(stdout(&out).contains("1 skipped"));

    let pairs = w.file("p.csv", &csv);
    let out = embias(&[
        "--model",
        &m,
        "evaluate",
        "--pairs",
        &pairs,
        "--seed",
        "ela,nobody",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = embias(&["evaluate", "--pairs", &pairs]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--model"));
    let out = embias(&[
        "--model",
        s(&w.path("missing.bin")),
        "evaluate",
        "--pairs",
        &pairs,
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn debias_then_evaluate() {
    let w = Work::new();
    let m = w.model("g.txt", &gendered(), Format::Text);
    let def = w.file("def.csv", "ela,ele\nmulher,homem\n");
    let eq = w.file("eq.csv", "rainha,rei\n");
    let gs = w.file("gs.csv", "mãe\n");
    let out_path = w.path("debiased.bin");
    let out = ok(embias(&[
        "--model",
        &m,
        "debias",
        "--definitional",
        &def,
        "--equalize",
        &eq,
        "--gender-specific",
        &gs,
        "--out",
        s(&out_path),
    ]));
    let text = stdout(&out);
    assert!(text.contains("neutralized: 4 words"), "{text}");
    assert!(text.contains("equalized: 1 pairs"));

    let before = load_path(Path::new(&m), Format::Text, None).unwrap();
    let after = load_path(&out_path, Format::Binary, None).unwrap();
    assert_eq!(after.vocab(), before.vocab());
    let r = before.row_of("enfermeira").unwrap();
    assert!(after.row(r)[0].abs() < 1e-6);

    let pairs = w.file("prof.csv", "enfermeira,engenheiro\n");
    let a = ok(embias(&[
        "--model",
        &m,
        "--timestamp",
        TS,
        "evaluate",
        "--pairs",
        &pairs,
        "--output",
        "json",
    ]));
    let b = ok(embias(&[
        "--model",
        s(&out_path),
        "--timestamp",
        TS,
        "evaluate",
        "--pairs",
        &pairs,
        "--output",
        "json",
    ]));
    let acc = |o: &Output| {
        serde_json::from_str::<Value>(&stdout(o)).unwrap()["results"]["accuracy"]
            .as_f64()
            .unwrap()
    };
    assert!((0.0..=1.0).contains(&acc(&a)) && (0.0..=1.0).contains(&acc(&b)));
}

#[test]
fn debias_leaves_gender_specific_bytes_alone() {
    let w = Work::new();
    let model = gendered();
    let m = w.model("g.bin", &model, Format::Binary);
    let def = w.file("def.csv", "ela,ele\n");
    let gs = w.file("gs.csv", "mãe\nmulher\n");
    let out_path = w.path("out.bin");
    ok(embias(&[
        "--model",
        &m,
        "debias",
        "--definitional",
        &def,
        "--gender-specific",
        &gs,
        "--out",
        s(&out_path),
    ]));
    let record = |bytes: &[u8], word: &str| -> Vec<u8> {
        let needle: Vec<u8> = [word.as_bytes(), b" "].concat();
        let at = bytes
            .windows(needle.len())
            .position(|x| x == needle)
            .unwrap()
            + needle.len();
        bytes[at..at + 4 * model.dim()].to_vec()
    };
    let (src, dst) = (fs::read(&m).unwrap(), fs::read(&out_path).unwrap());
    for word in ["mãe", "mulher", "ela", "ele"] {
        assert_eq!(record(&src, word), record(&dst, word), "{word}");
    }
    assert_ne!(record(&src, "mesa"), record(&dst, "mesa"));
}

#[test]
fn debias_config_errors() {
    let w = Work::new();
    let m = w.model("g.txt", &gendered(), Format::Text);
    let empty = w.file("def.csv", "# none\n");
    let out = embias(&[
        "--model",
        &m,
        "debias",
        "--definitional",
        &empty,
        "--out",
        s(&w.path("o.bin")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("definitional"));
    assert!(!w.path("o.bin").exists());

    let def = w.file("d.csv", "ela,ele\n");
    let out = embias(&[
        "--model",
        &m,
        "debias",
        "--definitional",
        &def,
        "--out",
        s(&w.path("no/such/dir.bin")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn extremes_tables() {
    let w = Work::new();
    let m = w.model("g.txt", &gendered(), Format::Text);
    let probes = w.file("p.csv", "enfermeira\nengenheiro\nzebra\n");
    let out = ok(embias(&[
        "--model",
        &m,
        "extremes",
        "--probes",
        &probes,
        "--per-side",
        "2",
    ]));
    let text = stdout(&out);
    assert!(text.starts_with("Extreme 'she'\n"));
    assert!(text.contains("\nExtreme 'he'\n"));
    assert_eq!(text.matches(" → ").count(), 4);
    assert!(stderr(&out).contains("zebra"));

    let out = ok(embias(&[
        "--model",
        &m,
        "extremes",
        "--probes",
        &probes,
        "--per-side",
        "0",
    ]));
    assert_eq!(stdout(&out), "Extreme 'she'\n\nExtreme 'he'\n\n");

    let out = embias(&[
        "--model",
        &m,
        "extremes",
        "--probes",
        &probes,
        "--seed",
        "ela,zebra",
    ]);
    assert_eq!(out.status.code(), Some(1));

    let she = w.file("she.csv", "enfermeira\n");
    let he = w.file("he.csv", "engenheiro\nmesa\n");
    let out = ok(embias(&[
        "--model",
        &m,
        "extremes",
        "--she-probes",
        &she,
        "--he-probes",
        &he,
    ]));
    assert_eq!(stdout(&out).matches(" → ").count(), 3);
}

#[test]
fn repeated_runs_are_identical() {
    let w = Work::new();
    let m = w.model("g.txt", &gendered(), Format::Text);
    let probes = w.file("p.csv", "enfermeira\nengenheiro\nmesa\n");
    let run = || {
        stdout(&ok(embias(&[
            "--model",
            &m,
            "--timestamp",
            TS,
            "extremes",
            "--probes",
            &probes,
            "--output",
            "json",
        ])))
    };
    assert_eq!(run(), run());
    let run = || {
        stdout(&ok(embias(&[
            "--model", &m, "extremes", "--probes", &probes,
        ])))
    };
    assert_eq!(run(), run());
}

fn evaluation_report(w: &Work, name: &str, correct: usize, total: usize, extra: usize) -> String {
    let (model, csv) = planted(correct, total);
    let m = w.model(&format!("{name}.bin"), &model, Format::Binary);
    let mut pairs = csv;
    for i in 0..extra {
        pairs.push_str(&format!("extra{i}a,extra{i}o\n"));
    }
    let pairs = w.file(&format!("{name}.csv"), &pairs);
    let out = ok(embias(&[
        "--model",
        &m,
        "--timestamp",
        TS,
        "evaluate",
        "--pairs",
        &pairs,
        "--skip-oov",
        "--output",
        "json",
    ]));
    w.file(&format!("{name}.json"), &stdout(&out))
}

#[test]
fn compare_reports() {
    let w = Work::new();
    let a = evaluation_report(&w, "before", 6, 33, 0);
    let b = evaluation_report(&w, "after", 1, 33, 0);
    let out = ok(embias(&["compare", &a, &b]));
    let text = stdout(&out);
    assert!(text.contains("z = 1.9988"), "{text}");
    assert!(text.contains("significant at 95%: yes"));
    assert!(text.contains("significant at 99%: no"));
    assert!(text.contains("verdict at 99%: no significant difference"));
    assert!(stderr(&out).is_empty());

    let out = ok(embias(&[
        "compare",
        &a,
        &a,
        "--output",
        "json",
        "--confidence",
        "0.95",
    ]));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["results"]["test"]["z"].as_f64(), Some(0.0));
    assert_eq!(v["results"]["kind"], "comparison");

    let c = evaluation_report(&w, "other", 6, 30, 2);
    let out = ok(embias(&["compare", &a, &c]));
    assert!(stderr(&out).contains("warning: the reports evaluated different profession pair lists"));
    assert!(stdout(&out).contains("z = "));
}

#[test]
fn compare_rejects_bad_reports() {
    let w = Work::new();
    let junk = w.file("junk.json", "{\"schema_version\": 7}");
    let a = evaluation_report(&w, "a", 1, 2, 0);
    let out = embias(&["compare", &a, &junk]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("schema_version"));

    let m = w.model("g.txt", &gendered(), Format::Text);
    let probes = w.file("p.csv", "mesa\n");
    let ext = stdout(&ok(embias(&[
        "--model", &m, "extremes", "--probes", &probes, "--output", "json",
    ])));
    let ext = w.file("ext.json", &ext);
    let out = embias(&["compare", &a, &ext]);
    assert_eq!(out.status.code(), Some(1));
    let out = embias(&["compare", &a, &a, "--confidence", "0.9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn convert_round_trip_and_limit() {
    let w = Work::new();
    let model = gendered();
    let txt = w.model("g.txt", &model, Format::Text);
    let bin = w.path("g.bin");
    ok(embias(&["--model", &txt, "convert", "--out", s(&bin)]));
    let back = w.path("back.txt");
    ok(embias(&["--model", s(&bin), "convert", "--out", s(&back)]));
    assert_eq!(fs::read(&txt).unwrap(), fs::read(&back).unwrap());
    assert_eq!(load_path(&bin, Format::Binary, None).unwrap(), model);

    let big = EmbeddingModel::from_rows(
        3,
        (0..250).map(|i| (format!("w{i}"), vec![i as f32, 1.0, -0.5])),
    )
    .unwrap();
    let big_path = w.model("big.bin", &big, Format::Binary);
    let cut = w.path("cut.vec");
    ok(embias(&[
        "--model",
        &big_path,
        "--limit",
        "100",
        "convert",
        "--out",
        s(&cut),
    ]));
    let text = fs::read_to_string(&cut).unwrap();
    assert_eq!(text.lines().next(), Some("100 3"));
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn usage_errors() {
    let w = Work::new();
    let m = w.model("g.txt", &gendered(), Format::Text);
    let out = embias(&[
        "--model",
        &m,
        "convert",
        "--out",
        s(&w.path("x")),
        "--out-format",
        "parquet",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("parquet"));
    assert_eq!(
        embias(&["--model", &m, "--model-format", "csv", "inspect"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(embias(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        embias(&[
            "--model",
            &m,
            "analogy",
            "--positive",
            "ela",
            "--top-n",
            "0"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(embias(&["--model", &m, "convert"]).status.code(), Some(1));
    assert_eq!(embias(&["--help"]).status.code(), Some(0));
    assert_eq!(embias(&["--version"]).status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_embias"))
        .args(["--model", &m, "inspect"])
        .env("EMBIAS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_embias"))
        .args(["--model", &m, "inspect"])
        .env("EMBIAS_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn model_format_override() {
    let w = Work::new();
    // Binary content behind a text-looking extension.
    let m = w.model("sneaky.txt", &gendered(), Format::Binary);
    assert_eq!(embias(&["--model", &m, "inspect"]).status.code(), Some(1));
    ok(embias(&[
        "--model",
        &m,
        "--model-format",
        "binary",
        "inspect",
    ]));
}
