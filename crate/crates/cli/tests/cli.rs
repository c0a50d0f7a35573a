use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn textcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_textcat")).args(args).output().expect("run textcat")
}

fn textcat_stdin(args: &[&str], input: &str) -> Output {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_textcat"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn textcat");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_corpus(root: &Path, layout: &[(&str, &[&str])]) {
    for (cat, docs) in layout {
        std::fs::create_dir_all(root.join(cat)).unwrap();
        for (i, text) in docs.iter().enumerate() {
            std::fs::write(root.join(cat).join(format!("{i}.txt")), text).unwrap();
        }
    }
}

fn toy(root: &Path) -> PathBuf {
    let dir = root.join("toy");
    write_corpus(
        &dir,
        &[
            ("খেলা", &["ক্রিকেট ম্যাচ জয়", "ফুটবল ম্যাচ গোল", "ক্রিকেট দল জয়"]),
            ("বাণিজ্য", &["বাজার শেয়ার দাম", "ব্যাংক ঋণ দাম", "শেয়ার বাজার পতন", "ব্যাংক সুদ হার"]),
        ],
    );
    dir
}

fn listing(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    for cat in std::fs::read_dir(root).unwrap() {
        let cat = cat.unwrap().path();
        for f in std::fs::read_dir(&cat).unwrap() {
            let f = f.unwrap().path();
            out.push((f.clone(), std::fs::read(&f).unwrap()));
        }
    }
    out.sort();
    out
}

#[test]
fn every_command_has_help() {
    for cmd in ["train", "predict", "evaluate", "learning-curve", "bench", "generate-corpus", "stats"] {
        let text = ok(&textcat(&[cmd, "--help"]));
        assert!(text.contains("Usage"), "{cmd}");
    }
}

#[test]
fn train_writes_tagged_model_and_predicts_own_label() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = toy(dir.path());
    let before = listing(&corpus);
    let model = dir.path().join("nb.json");
    let out = ok(&textcat(&["train", "--corpus", p(&corpus), "--classifier", "nb", "--out", p(&model)]));
    assert!(out.contains("vocabulary size"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(json["classifier"], "nb");
    let doc = corpus.join("বাণিজ্য").join("0.txt");
    assert_eq!(ok(&textcat(&["predict", "--model", p(&model), "--input", p(&doc)])).trim(), "বাণিজ্য");
    assert_eq!(listing(&corpus), before);
}

#[test]
fn missing_corpus_is_a_one_line_error() {
    let out = textcat(&["train", "--corpus", "/no/such/corpus", "--classifier", "nb", "--out", "/tmp/x.json"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1);
    assert!(err.contains("/no/such/corpus"));
}

#[test]
fn malformed_model_fails() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("bad.json");
    std::fs::write(&model, "{\"classifier\": \"nb\"}").unwrap();
    let out = textcat_stdin(&["predict", "--model", p(&model)], "text");
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn single_category_and_empty_document() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one");
    write_corpus(&one, &[("only", &["কিছু শব্দ", "আরো শব্দ"])]);
    let model = dir.path().join("one.json");
    ok(&textcat(&["train", "--corpus", p(&one), "--classifier", "nb", "--out", p(&model)]));
    assert_eq!(ok(&textcat_stdin(&["predict", "--model", p(&model)], "যেকোনো লেখা")).trim(), "only");

    // empty input falls back to the larger prior
    let corpus = toy(dir.path());
    let nb = dir.path().join("toy.json");
    ok(&textcat(&["train", "--corpus", p(&corpus), "--classifier", "nb", "--out", p(&nb)]));
    let out = ok(&textcat_stdin(&["predict", "--model", p(&nb), "--scores"], ""));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "বাণিজ্য");
    assert_eq!(lines.len(), 3);
}

#[test]
fn evaluate_prints_four_tables_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("gen");
    ok(&textcat(&["generate-corpus", "--seed", "3", "--categories", "3", "--docs", "12", "--out", p(&corpus)]));
    let run = |name: &str, extra: &[&str]| {
        let json = dir.path().join(name);
        let mut args = vec!["evaluate", "--corpus", p(&corpus), "--classifiers", "all", "--folds", "3", "--json", p(&json)];
        args.extend_from_slice(extra);
        let text = ok(&textcat(&args));
        (text, std::fs::read(&json).unwrap())
    };
    let (text, a) = run("a.json", &[]);
    assert_eq!(text.matches("classifier results").count(), 4);
    assert!(!text.contains("Training time"));
    let (_, b) = run("b.json", &["--threads", "1"]);
    assert_eq!(a, b);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("gen");
    ok(&textcat(&["generate-corpus", "--categories", "2", "--docs", "6", "--out", p(&corpus)]));
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, format!("# experiment\ncorpus = {}\nclassifiers = nb\nfolds = 3\n", p(&corpus))).unwrap();
    let json = dir.path().join("r.json");
    ok(&textcat(&["evaluate", "--config", p(&cfg), "--json", p(&json)]));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(v["folds"], 3);
    assert_eq!(v["reports"].as_array().unwrap().len(), 1);
    ok(&textcat(&["evaluate", "--config", p(&cfg), "--folds", "2", "--json", p(&json)]));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(v["folds"], 2);

    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert!(!textcat(&["evaluate", "--config", p(&cfg)]).status.success());
}

#[test]
fn generate_is_deterministic_and_refuses_to_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let sa = ok(&textcat(&["generate-corpus", "--seed", "5", "--categories", "2", "--docs", "4", "--out", p(&a)]));
    ok(&textcat(&["generate-corpus", "--seed", "5", "--categories", "2", "--docs", "4", "--out", p(&b)]));
    assert!(sa.ends_with("total\t8\n"));
    let strip = |root: &Path| listing(root).into_iter().map(|(f, t)| (f.strip_prefix(root).unwrap().to_owned(), t)).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
    assert!(!textcat(&["generate-corpus", "--out", p(&a)]).status.success());
    let stats = ok(&textcat(&["stats", "--corpus", p(&a)]));
    assert_eq!(stats, sa);
}

#[test]
fn learning_curve_and_bench_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("gen");
    ok(&textcat(&["generate-corpus", "--categories", "2", "--docs", "20", "--out", p(&corpus)]));
    let csv = ok(&textcat(&[
        "learning-curve", "--corpus", p(&corpus), "--classifiers", "nb,knn", "--steps", "2", "--step-size", "10",
    ]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "classifier,train_size,macro_f1");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("nb,10,"));
    let bench = ok(&textcat(&["bench", "--corpus", p(&corpus), "--classifiers", "c45", "--repeats", "1"]));
    assert!(bench.starts_with("classifier\tmedian_seconds\nc45\t"));
}

#[test]
fn svm_options_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = toy(dir.path());
    let model = dir.path().join("svm.json");
    let out = textcat(&["train", "--corpus", p(&corpus), "--classifier", "svm", "--kernel", "rbf", "--out", p(&model)]);
    assert!(!out.status.success());
    ok(&textcat(&[
        "train", "--corpus", p(&corpus), "--classifier", "svm", "--kernel", "linear", "--c", "5", "--out", p(&model),
    ]));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(json["config"]["svm"]["kernel"]["kind"], "linear");
    let knn = dir.path().join("knn.json");
    ok(&textcat(&["train", "--corpus", p(&corpus), "--classifier", "knn", "--k", "auto", "--out", p(&knn)]));
}
