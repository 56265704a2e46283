use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn fastcmh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fastcmh"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = fastcmh(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn without_timing(summary: &str) -> String {
    summary
        .lines()
        .filter(|l| !l.starts_with("wall_time_s\t"))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn mine_planted(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let data = fixture("planted.data.txt");
    let labels = fixture("planted.labels.txt");
    let cov = fixture("planted.covariates.txt");
    let mut args = vec![
        "mine",
        "--data",
        data.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--covariates",
        cov.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    ok(&args);
    out
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[test]
fn golden_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mine_planted(tmp.path(), "run", &[]);
    assert_eq!(read(&suffixed(&out, ".raw.tsv")), read(&fixture("planted.raw.tsv")));
    assert_eq!(read(&suffixed(&out, ".filtered.tsv")), read(&fixture("planted.filtered.tsv")));
    assert_eq!(
        without_timing(&read(&suffixed(&out, ".summary.tsv"))),
        read(&fixture("planted.summary.tsv"))
    );
}

#[test]
fn raw_report_hits_the_plant() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mine_planted(tmp.path(), "run", &[]);
    let raw = read(&suffixed(&out, ".raw.tsv"));
    let overlaps = raw.lines().skip(1).any(|line| {
        let f: Vec<usize> = line.split('\t').take(2).map(|v| v.parse().unwrap()).collect();
        f[0] < 16 && 12 < f[0] + f[1]
    });
    assert!(overlaps, "{raw}");
}

#[test]
fn default_alpha_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mine_planted(tmp.path(), "run", &[]);
    let summary = read(&suffixed(&out, ".summary.tsv"));
    assert!(summary.lines().any(|l| l == "alpha\t0.05"), "{summary}");
    assert!(summary.lines().any(|l| l == "mu\t0.06"));
    assert!(summary.lines().any(|l| l == "n_steps\t500"));
}

#[test]
fn naive_and_fast_reports_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let fast = mine_planted(tmp.path(), "fast", &["--method", "fastcmh"]);
    let naive = mine_planted(tmp.path(), "naive", &["--method", "fais-cmh"]);
    for suffix in [".raw.tsv", ".filtered.tsv"] {
        assert_eq!(read(&suffixed(&fast, suffix)), read(&suffixed(&naive, suffix)));
    }
    let strip = |p: &Path| -> Vec<String> {
        read(&suffixed(p, ".summary.tsv"))
            .lines()
            .filter(|l| !l.starts_with("method\t") && !l.starts_with("wall_time_s\t"))
            .map(String::from)
            .collect()
    };
    assert_eq!(strip(&fast), strip(&naive));
}

#[test]
fn every_method_runs_and_no_filter_skips_file() {
    let tmp = tempfile::tempdir().unwrap();
    for m in ["fastcmh", "bonferroni-cmh", "fais-chi2", "fais-cmh"] {
        let out = mine_planted(tmp.path(), m, &["--method", m, "--no-filter", "--alpha", "0.1", "--max-ell", "6"]);
        assert!(suffixed(&out, ".raw.tsv").exists());
        assert!(!suffixed(&out, ".filtered.tsv").exists());
        let summary = read(&suffixed(&out, ".summary.tsv"));
        assert!(summary.contains(&format!("method\t{m}\n")));
        assert!(summary.contains("filtered\toff\n") && summary.contains("max_ell\t6\n"));
    }
}

#[test]
fn output_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = mine_planted(tmp.path(), "a", &[]);
    let b = mine_planted(tmp.path(), "b", &[]);
    assert_eq!(read(&suffixed(&a, ".raw.tsv")), read(&suffixed(&b, ".raw.tsv")));
}

#[test]
fn gen_round_trips_through_mine() {
    let tmp = tempfile::tempdir().unwrap();
    let prefix = tmp.path().join("g");
    let p = prefix.to_str().unwrap();
    ok(&["gen", "standard", "--n", "40", "--len", "30", "--k", "2", "--p1", "0.1", "--p-case", "0.9", "--plant", "12:4", "--seed", "7", "--out", p]);
    for suffix in [".data.txt", ".labels.txt", ".covariates.txt"] {
        let name = format!("planted{suffix}");
        assert_eq!(read(&suffixed(&prefix, suffix)), read(&fixture(&name)), "{suffix}");
    }

    ok(&["gen", "confounded", "--n", "60", "--len", "20", "--confounded", "5:3", "--seed", "2", "--out", p]);
    let labels = read(&suffixed(&prefix, ".labels.txt"));
    assert_eq!(labels.lines().count(), 60);
    let cov = read(&suffixed(&prefix, ".covariates.txt"));
    assert!(cov.lines().all(|l| l == "0" || l == "1"));
}

#[test]
fn transposed_input_matches() {
    let tmp = tempfile::tempdir().unwrap();
    let rows: Vec<Vec<String>> = read(&fixture("planted.data.txt"))
        .lines()
        .map(|l| l.split(' ').map(String::from).collect())
        .collect();
    let transposed: String = (0..rows[0].len())
        .map(|p| rows.iter().map(|r| r[p].as_str()).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    let data = tmp.path().join("t.data.txt");
    fs::write(&data, transposed).unwrap();
    let out = tmp.path().join("t");
    ok(&[
        "mine",
        "--data",
        data.to_str().unwrap(),
        "--labels",
        fixture("planted.labels.txt").to_str().unwrap(),
        "--covariates",
        fixture("planted.covariates.txt").to_str().unwrap(),
        "--transpose",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(read(&suffixed(&out, ".raw.tsv")), read(&fixture("planted.raw.tsv")));
}

#[test]
fn input_errors_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d.txt");
    let l = tmp.path().join("l.txt");
    let c = tmp.path().join("c.txt");
    fs::write(&d, "1 0\n0 1\n1 1\n").unwrap();
    fs::write(&l, "1\n0\n1\n0\n").unwrap();
    fs::write(&c, "0\n0\n0\n").unwrap();
    let out = tmp.path().join("o");
    let run = || {
        fastcmh(&[
            "mine",
            "--data",
            d.to_str().unwrap(),
            "--labels",
            l.to_str().unwrap(),
            "--covariates",
            c.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
    };
    let res = run();
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("4 labels") && err.contains("3 samples"), "{err}");

    fs::write(&l, "1\n0\n1\n").unwrap();
    fs::write(&c, "0\n0\n2\n").unwrap();
    let err = String::from_utf8_lossy(&run().stderr).to_string();
    assert!(err.contains("c.txt:3") && err.contains("category 1 empty"), "{err}");

    fs::write(&c, "0\n1\n0\n").unwrap();
    fs::write(&d, "1 0\n0 7\n1 1\n").unwrap();
    let err = String::from_utf8_lossy(&run().stderr).to_string();
    assert!(err.contains("d.txt:2"), "{err}");

    let bad = fastcmh(&["mine", "--data", "nope", "--labels", "nope", "--covariates", "nope", "--out", "x"]);
    assert!(!bad.status.success());
}

#[test]
fn bench_smoke_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("fwer.csv");
    ok(&["bench", "fwer", "--reps", "3", "--alpha", "0.5", "--out", csv.to_str().unwrap()]);
    let text = read(&csv);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("method,repetitions,alpha,false_positive_runs,fwer,ci_low,ci_high,bound,within_bound")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 9);
    assert_eq!(&row[..3], &["fastcmh", "3", "0.5"]);

    let csv = tmp.path().join("power.csv");
    ok(&[
        "bench", "power", "--reps", "2", "--values", "0.9", "--methods", "fastcmh,fais-cmh", "--out",
        csv.to_str().unwrap(),
    ]);
    let text = read(&csv);
    assert_eq!(text.lines().count(), 3);
    let cols = |i: usize| -> Vec<String> {
        text.lines().nth(i).unwrap().split(',').take(6).skip(1).map(String::from).collect()
    };
    assert_eq!(cols(1), cols(2));

    let csv = tmp.path().join("runtime.csv");
    ok(&["bench", "runtime", "--reps", "1", "--values", "2", "--out", csv.to_str().unwrap()]);
    assert_eq!(read(&csv).lines().count(), 5);

    let bad = fastcmh(&["bench", "fwer", "--values", "1", "--out", csv.to_str().unwrap()]);
    assert!(!bad.status.success());
}
