use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_embkit");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn embkit(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("running embkit")
}

#[track_caller]
fn ok(args: &[&str]) -> String {
    let out = embkit(args);
    assert!(
        out.status.success(),
        "embkit {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Tokenizes, deduplicates, counts and embeds the fixture corpus.
fn prepare(dir: &TempDir) -> PathBuf {
    let d = dir.path();
    let tokens = d.join("tokens.txt");
    ok(&["corpus", "tokenize", "--input", p(&fixture("mini_corpus.txt")), "--output", p(&tokens), "--lang", "en"]);
    let dedup = d.join("dedup.txt");
    let stats = d.join("dedup.json");
    ok(&["dedup", "--input", p(&tokens), "--output", p(&dedup), "--stats", p(&stats)]);
    ok(&["vocab", "--input", p(&dedup), "--output", p(&d.join("vocab.txt")), "--min-count", "2"]);
    ok(&["emb", "mock-provide", "--embed-in", p(&dedup), "--embed-out", p(&d.join("records.tsv")), "--dim", "8"]);
    dedup
}

#[test]
fn corpus_chain_produces_consistent_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let dedup = prepare(&dir);
    let d = dir.path();

    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("dedup.json")).unwrap()).unwrap();
    assert!(stats["units_kept"].as_u64().unwrap() < stats["units_in"].as_u64().unwrap());
    let kept_tokens: u64 = fs::read_to_string(&dedup).unwrap().split_whitespace().count() as u64;
    assert_eq!(stats["tokens_kept"].as_u64().unwrap(), kept_tokens);

    let vocab = fs::read_to_string(d.join("vocab.txt")).unwrap();
    let counts: Vec<u64> = vocab.lines().map(|l| l.split('\t').nth(1).unwrap().parse().unwrap()).collect();
    assert!(counts.iter().all(|&c| c >= 2));
    assert!(counts.windows(2).all(|w| w[0] >= w[1]));

    let vectors = d.join("vectors.txt");
    ok(&[
        "emb", "average", "--records", p(&d.join("records.tsv")), "--layer", "CNN", "--vocab", p(&d.join("vocab.txt")),
        "--output", p(&vectors),
    ]);
    let text = fs::read_to_string(&vectors).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
    assert_eq!(header, [counts.len().to_string().as_str(), "8"]);
}

#[test]
fn eval_a_reports_every_category() {
    let dir = tempfile::tempdir().unwrap();
    let vectors = dir.path().join("v.txt");
    // Words of the analogy set, each a random-looking but fixed vector.
    let text = fs::read_to_string(fixture("mini_analogy.txt")).unwrap();
    let mut words: Vec<&str> = text.lines().filter(|l| !l.starts_with(':')).flat_map(str::split_whitespace).collect();
    words.sort();
    words.dedup();
    let mut body = String::new();
    for (i, w) in words.iter().enumerate() {
        let v: Vec<String> = (0..6).map(|j| (((i * 7 + j * 13) % 17) as f32 - 8.0).to_string()).collect();
        body.push_str(&format!("{w} {}\n", v.join(" ")));
    }
    fs::write(&vectors, body).unwrap();

    let out = ok(&["analogy", "eval-a", "--emb", p(&vectors), "--dataset", p(&fixture("mini_analogy.txt")), "--topn", "1,5"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "category\tkind\tasked\tskipped_oov\tanswered\tacc@1\tacc@5");
    assert_eq!(lines.len(), 16);
    assert!(lines[1].starts_with("capital-common-countries\tsemantic\t12\t0\t12\t"));
    assert!(lines[6].starts_with("adjective-to-adverb\tsyntactic\t"));
}

#[test]
fn eval_b_through_provider_command_matches_in_process_mock() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("provider.sh");
    fs::write(&script, format!("#!/bin/sh\nexec '{BIN}' emb mock-provide --dim 12 --seed 4 \"$@\"\n")).unwrap();
    fs::set_permissions(&script, fs::Permissions::from_mode(0o755)).unwrap();
    let dataset = fixture("mini_analogy.txt");
    let common = ["analogy", "eval-b", "--dataset", p(&dataset), "--report", "json", "--ranking", "csls"];

    let external = dir.path().join("external.json");
    let mut args = common.to_vec();
    args.extend(["--provider", p(&script), "--output", p(&external)]);
    ok(&args);

    let internal = dir.path().join("internal.json");
    let mut args = common.to_vec();
    args.extend(["--mock-dim", "12", "--mock-seed", "4", "--output", p(&internal)]);
    ok(&args);

    assert_eq!(fs::read(&external).unwrap(), fs::read(&internal).unwrap());

    // The JSON report feeds the summary table.
    let table = ok(&["analogy", "table", "--entry", &format!("en:LSTM1={}", p(&internal)), "--n", "1", "--shape", "by-layer"]);
    assert!(table.starts_with("layer\tcategory\ten\nLSTM1\tsemantic\t"), "{table}");
}

#[test]
fn failing_provider_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("broken.sh");
    fs::write(&script, "#!/bin/sh\necho oops >&2\nexit 3\n").unwrap();
    fs::set_permissions(&script, fs::Permissions::from_mode(0o755)).unwrap();
    let out = embkit(&["analogy", "eval-b", "--dataset", p(&fixture("mini_analogy.txt")), "--provider", p(&script)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error: "), "{err}");
    assert!(err.contains("question 1"), "{err}");
}

#[test]
fn ner_stats_split_score_compare() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = fixture("mini_ner.txt");

    let stats = ok(&["ner", "stats", "--data", &format!("en={}", p(&data))]);
    let row: Vec<&str> = stats.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(row[0], "en");
    let [per, loc, org, n]: [u64; 4] = [1, 2, 3, 5].map(|i| row[i].parse().unwrap());
    assert_eq!(row[4], format!("{:.3}", (per + loc + org) as f64 / n as f64));

    let (train, test) = (d.join("train.txt"), d.join("test.txt"));
    ok(&["ner", "split", "--data", p(&data), "--seed", "3", "--train-out", p(&train), "--test-out", p(&test)]);
    let count = |path: &Path| fs::read_to_string(path).unwrap().split("\n\n").filter(|b| !b.trim().is_empty()).count();
    assert_eq!((count(&train), count(&test)), (54, 6));
    let train2 = d.join("train2.txt");
    ok(&["ner", "split", "--data", p(&data), "--seed", "3", "--train-out", p(&train2), "--test-out", p(&d.join("t2.txt"))]);
    assert_eq!(fs::read(&train).unwrap(), fs::read(&train2).unwrap());

    // Perfect predictions score 1; an all-O copy scores 0.
    let all_o = d.join("all_o.txt");
    let text = fs::read_to_string(&test).unwrap();
    let o: String = text
        .lines()
        .map(|l| match l.split_once('\t') {
            Some((tok, _)) => format!("{tok}\tO\n"),
            None => "\n".into(),
        })
        .collect();
    fs::write(&all_o, o).unwrap();
    let summary = d.join("summary.json");
    ok(&["ner", "score", "--gold", p(&test), "--pred", p(&test), "--pred", p(&all_o), "--report", "json", "--output", p(&summary)]);
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["runs"][1]["macro_f1"], 0.0);
    assert_eq!(s["mean"]["macro_f1"].as_f64().unwrap() * 2.0, s["runs"][0]["macro_f1"].as_f64().unwrap());

    let table = ok(&["ner", "table", "--entry", &format!("en:sys={}", p(&summary))]);
    assert_eq!(table.lines().count(), 2);

    let compare = ok(&[
        "ner", "compare", "--lang", "en", "--gold", p(&test), "--dataset", p(&data),
        "--system", &format!("zero={}", p(&all_o)),
        "--run", &format!("copy=cp '{}' {{out}}", p(&test)),
        "--runs", "2", "--work-dir", p(&d.join("runs")), "--baseline", "copy",
    ]);
    let row: Vec<&str> = compare.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(&row[..6], ["en", "zero", "copy", "0.0000", "1.0000", "-1.0000"]);
    assert!(d.join("runs/copy.run1.pred.txt").exists());
}

#[test]
fn misaligned_predictions_fail() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.txt");
    fs::write(&pred, "Someone\tB-PER\n").unwrap();
    let out = embkit(&["ner", "score", "--gold", p(&fixture("mini_ner.txt")), "--pred", p(&pred)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alignment"));
}

#[test]
fn pipeline_from_env_with_overrides_and_stage_subset() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["pipeline.toml", "mini_corpus.txt", "mini_analogy.txt", "mini_ner.txt"] {
        fs::copy(fixture(name), dir.path().join(name)).unwrap();
    }
    let out = Command::new(BIN)
        .args(["pipeline", "--stages", "tokenize,dedup", "--set", "dedup.threshold=0.5", "--set", "work_dir=\"work\""])
        .env("EMBKIT_CONFIG", dir.path().join("pipeline.toml"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let stages: Vec<&str> = stdout.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(stages, ["tokenize", "dedup"]);

    let work = dir.path().join("work");
    assert!(work.join("dedup.txt").exists());
    assert!(!work.join("vocab.txt").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(work.join("manifests/dedup.json")).unwrap()).unwrap();
    assert_eq!(manifest["params"]["threshold"], 0.5);
}

#[test]
fn missing_config_is_an_error() {
    let out = Command::new(BIN).arg("pipeline").env_remove("EMBKIT_CONFIG").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("EMBKIT_CONFIG"));
}
