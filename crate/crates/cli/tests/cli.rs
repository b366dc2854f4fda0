use std::path::Path;
use std::process::{Command, Output};

use graphfuse::io::{parse_edge_list, read_label_map, ParseOptions};
use graphfuse::simulate::{make_latent, sample_rdpg_series};
use graphfuse::{KappaParams, SeededRng};

fn graphfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphfuse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures/planted_weekly.csv")
        .to_string_lossy()
        .into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_complete_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.tsv");
    let o = graphfuse(&["simulate", "--n", "4", "--p", "1", "--m", "0", "--t-max", "2", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut expected = String::new();
    for t in 1..=2 {
        for (u, v) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            expected.push_str(&format!("{t}\t{u}\t{v}\n"));
        }
    }
    assert_eq!(text, expected);
}

#[test]
fn simulated_output_parses_back_to_the_same_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.tsv");
    let args = ["simulate", "--n", "40", "--p", "0.05", "--m", "8", "--q", "0.6", "--t-star", "4", "--t-max", "6", "--seed", "11"];
    let o = graphfuse(&[&args[..], &["--out", path_str(&out)]].concat());
    assert!(o.status.success());

    let labels = read_label_map(&dir.path().join("g.tsv.labels")).unwrap();
    let opts = ParseOptions { label_map: Some(labels), t_range: Some((1, 6)) };
    let parsed = parse_edge_list(&out, &opts).unwrap().series;

    let params = KappaParams { n: 40, p: 0.05, m: 8, q: 0.6, t_star: 4, t_max: 6 };
    let latent = make_latent(params.p, params.q).unwrap();
    let expected = sample_rdpg_series(&params, &latent, &mut SeededRng::new(11, 0)).unwrap();
    assert_eq!(parsed, expected);
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = graphfuse(&["power", "--q-grid", "0.3,0.5", "--M", "200", "--scheme", "adaptive", "--subset", "1,2", "--seed", "7", "--out", path_str(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("scheme,subset,q,power,se,M,error\n"));
    assert_eq!(text.lines().count(), 3);
    assert!(dir.path().join("a.csv.meta.json").exists());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(graphfuse(&["simulate", "--bogus"]).status.code(), Some(1));
    assert_eq!(graphfuse(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(graphfuse(&[]).status.code(), Some(1));
    // values rejected before any work starts
    assert_eq!(graphfuse(&["power", "--alpha", "2"]).status.code(), Some(1));
    assert_eq!(graphfuse(&["detect"]).status.code(), Some(1));
    assert_eq!(graphfuse(&["power", "--subset", "1,10"]).status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_two() {
    let o = graphfuse(&["detect", "--input", "/nonexistent/edges.tsv"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "1 a b\nx a c\n").unwrap();
    let o = graphfuse(&["detect", "--input", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.tsv:2:"));
}

#[test]
fn help_exits_zero() {
    assert!(graphfuse(&["--help"]).status.success());
    assert!(graphfuse(&["power", "--help"]).status.success());
}

#[test]
fn detect_flags_planted_week_in_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("detect.json");
    let o = graphfuse(&["detect", "--input", &fixture(), "--scheme", "adaptive", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let flagged: Vec<u64> = rows
        .iter()
        .filter(|r| r["reject"] == true)
        .map(|r| r["t"].as_u64().unwrap())
        .collect();
    assert!(flagged.contains(&24), "{flagged:?}");
    let labels = std::fs::read_to_string(dir.path().join("detect.json.labels")).unwrap();
    assert_eq!(labels.lines().next(), Some("ames"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 6\np = 1.0\nm = 0\nt_max = 3\nseed = 5\n").unwrap();
    let o = graphfuse(&["--config", path_str(&cfg), "simulate", "--n", "3", "--quiet"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    // K3 at each of three steps
    assert_eq!(text.lines().count(), 9);

    std::fs::write(&cfg, "mystery = 1\n").unwrap();
    assert_eq!(graphfuse(&["--config", path_str(&cfg), "simulate"]).status.code(), Some(1));
}

#[test]
fn table2_counts_every_subset() {
    let o = graphfuse(&["table2", "--input", &fixture(), "--t-star", "24", "--quiet"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d_prime,combinations,both,equal_only,adaptive_only,neither"));
    let combos: Vec<u64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(combos, vec![9, 36, 84, 126, 126, 84, 36, 9, 1]);
}

#[test]
fn features_reports_raw_and_standardized_columns() {
    let o = graphfuse(&["features", "--input", &fixture(), "--format", "csv", "--quiet"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("t,size,maxdeg,mad,scan1"));
    assert!(header.ends_with("s_cc,s_neg_apl"));
    assert_eq!(text.lines().count(), 31);
}
