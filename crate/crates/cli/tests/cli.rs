use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tsdict(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsdict"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Generates a small two-class dataset directory and returns its path.
fn generate(root: &Path, name: &str, n_per_class: usize) -> PathBuf {
    let out = tsdict(&[
        "generate",
        "-o",
        s(root),
        "--name",
        name,
        "--n-per-class",
        &n_per_class.to_string(),
        "--length",
        "120",
        "--shapelet-length",
        "15",
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    root.join(name)
}

const SMALL_GRID: [&str; 6] = ["--windows", "12,24", "--word-lengths", "4", "--alphas", "4"];

#[test]
fn generate_writes_split_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "Syn", 6);
    let train = fs::read_to_string(data.join("Syn_TRAIN.tsv")).unwrap();
    let test = fs::read_to_string(data.join("Syn_TEST.tsv")).unwrap();
    assert_eq!(train.lines().count(), 6);
    assert_eq!(test.lines().count(), 6);
    assert!(train.lines().all(|l| l.split('\t').count() == 121));
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(data.join("Syn.json")).unwrap()).unwrap();
    assert_eq!(sidecar["train_per_class"], 3);
    assert_eq!(sidecar["placements"].as_array().unwrap().len(), 12);

    let bad = tsdict(&["generate", "-o", s(dir.path()), "--length", "100"]);
    assert!(!bad.status.success());
    assert!(stderr(&bad).contains("cannot pack"), "{}", stderr(&bad));
}

#[test]
fn bag_writes_one_line_per_series() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "Syn", 4);
    let train = data.join("Syn_TRAIN.tsv");
    let bp = dir.path().join("breakpoints.txt");
    let out = tsdict(&["bag", "--data", s(&train), "--w", "16", "--l", "4", "--p", "--breakpoints", s(&bp)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    for line in text.lines() {
        let mut fields = line.split_whitespace();
        let _label = fields.next().unwrap();
        let k: usize = fields.next().unwrap().parse().unwrap();
        assert_eq!(fields.count(), k);
    }
    assert!(bp.is_file());

    let gaussian = tsdict(&[
        "bag", "--data", s(&train), "--w", "16", "--l", "4", "--approx", "paa", "--disc", "gaussian",
    ]);
    assert!(gaussian.status.success(), "{}", stderr(&gaussian));

    let too_wide = tsdict(&["bag", "--data", s(&train), "--w", "500", "--l", "4"]);
    assert_eq!(too_wide.status.code(), Some(1));
    assert!(stderr(&too_wide).contains("exceeds series length"), "{}", stderr(&too_wide));

    let missing = tsdict(&["bag", "--data", s(&dir.path().join("nope.tsv")), "--w", "8", "--l", "4"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("nope.tsv"), "{}", stderr(&missing));
}

#[test]
fn train_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "Syn", 8);
    let model = dir.path().join("model");
    let mut args = vec!["train", "--train"];
    let train = data.join("Syn_TRAIN.tsv");
    args.extend([s(&train), "-c", "BOSS", "-m", s(&model)]);
    args.extend(SMALL_GRID);
    let out = tsdict(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(model.join("manifest.json").is_file());

    let test = data.join("Syn_TEST.tsv");
    let preds = dir.path().join("preds.txt");
    let out = tsdict(&["predict", "-m", s(&model), "--data", s(&test), "-o", s(&preds)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let lines = fs::read_to_string(&preds).unwrap();
    assert_eq!(lines.lines().count(), 8);
    assert!(lines.lines().all(|l| l == "0" || l == "1"));

    let missing = tsdict(&["predict", "-m", s(&dir.path().join("none")), "--data", s(&test)]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn experiment_appends_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "Syn", 6);
    let results = dir.path().join("results.csv");
    let mut args = vec!["experiment", "-d", s(&data), "-c", "BOSS", "--resamples", "2", "-r", s(&results)];
    args.extend(SMALL_GRID);
    let out = tsdict(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let first = fs::read_to_string(&results).unwrap();
    assert_eq!(first.lines().count(), 3, "{first}");
    assert!(first.starts_with("classifier,dataset,resample,accuracy"));
    assert!(stdout(&out).contains("Syn\tBOSS\t"));

    // a rerun finds every cell done and leaves the file untouched
    let again = tsdict(&args);
    assert!(again.status.success(), "{}", stderr(&again));
    assert_eq!(fs::read_to_string(&results).unwrap(), first);

    // results are deterministic without timings
    let fresh = dir.path().join("fresh.csv");
    let mut args2 = args.clone();
    let pos = args2.iter().position(|a| *a == s(&results)).unwrap();
    args2[pos] = s(&fresh);
    assert!(tsdict(&args2).status.success());
    assert_eq!(fs::read_to_string(&fresh).unwrap(), first);
}

#[test]
fn experiment_reads_a_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "Syn", 6);
    let results = dir.path().join("spec_results.csv");
    let spec = dir.path().join("exp.toml");
    fs::write(
        &spec,
        format!(
            "datasets = [{:?}]\nclassifiers = [\"BOP\", \"SP-HI\"]\nresamples = 1\nresults = {:?}\n\n[grid]\nwindows = \"12,24\"\nword_lengths = [4]\nalphas = [4]\n",
            s(&data),
            s(&results)
        ),
    )
    .unwrap();
    let out = tsdict(&["experiment", "--spec", s(&spec)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&results).unwrap();
    assert!(text.contains("\nBOP,Syn,0,"), "{text}");
    assert!(text.contains("\nSP-HI,Syn,0,"), "{text}");

    fs::write(&spec, "datasets = []\nbogus = 1\n").unwrap();
    let bad = tsdict(&["experiment", "--spec", s(&spec)]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn ablation_rejects_unknown_variants() {
    let dir = tempfile::tempdir().unwrap();
    let out = tsdict(&["ablation", "-d", s(dir.path()), "--variant", "BOSS+XYZ"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("BOSS+XYZ"), "{}", stderr(&out));
}

#[test]
fn ablation_runs_selected_variants() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "Syn", 6);
    let results = dir.path().join("ablation.csv");
    let mut args = vec![
        "ablation", "-d", s(&data), "--variant", "BOP", "--variant", "BOSS-FT", "-r", s(&results),
    ];
    args.extend(SMALL_GRID);
    let out = tsdict(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&results).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("BOSS-FT,Syn,0,"));
}

#[test]
fn ranks_reports_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.csv");
    let mut body = String::from("classifier,dataset,resample,accuracy\n");
    for d in ["a", "b", "c", "d", "e"] {
        for c in ["X", "Y", "Z"] {
            body.push_str(&format!("{c},{d},0,0.75\n"));
        }
    }
    fs::write(&results, body).unwrap();
    let out_dir = dir.path().join("report");
    let out = tsdict(&["ranks", "--results", s(&results), "-o", s(&out_dir)]);
    assert!(out.status.success(), "{}", stderr(&out));
    for f in ["ranks.csv", "friedman.txt", "pairwise.csv", "cliques.txt"] {
        assert!(out_dir.join(f).is_file(), "{f}");
    }
    let cliques = fs::read_to_string(out_dir.join("cliques.txt")).unwrap();
    assert_eq!(cliques.lines().filter(|l| l.contains(':')).count(), 1, "{cliques}");
    assert!(stdout(&out).starts_with("classifier,avg_rank\n"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "classifier,dataset,resample,accuracy\nX,a,0,0.5\nX,a,1,oops\n").unwrap();
    let out = tsdict(&["ranks", "--results", s(&bad), "-o", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bad.csv:3"), "{}", stderr(&out));
}
