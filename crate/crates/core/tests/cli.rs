use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn resalloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resalloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const DRA: &str = r#"
mode = "dra"
seed = 7
replications = 3
horizons = [50, 200]

[problem]
resources = 2
budget = 2.0
levels = 3

[reward]
family = "table"
p = [[0.0, 0.5, 0.6], [0.0, 0.3, 0.9]]

[output]
traces = true
curve_stride = 10
"#;

fn read_csv(p: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(p).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()));
    rows
}

#[test]
fn run_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("dra.toml");
    fs::write(&cfg, DRA).unwrap();
    let out = tmp.path().join("out");
    let o = resalloc(&["run", "--config", path(&cfg), "--out", path(&out), "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let agg = read_csv(&out.join("aggregate.csv"));
    assert_eq!(
        agg[0],
        [
            "horizon",
            "mean_regret",
            "std_regret",
            "theorem1_dep_bound",
            "theorem1_indep_bound",
            "theorem2_normalized",
            "epsilon",
            "N",
            "lemma1_violations"
        ]
    );
    assert_eq!(agg.len(), 3);
    assert_eq!(agg[1][0], "50");
    // discrete runs leave the continuous-only columns blank
    assert_eq!(agg[1][5], "");
    assert_eq!(agg[1][6], "");
    assert_eq!(agg[1][7], "3");

    let curve = read_csv(&out.join("curve_T200.csv"));
    assert_eq!(curve[0], ["round", "mean_cum_regret", "std_cum_regret"]);
    assert_eq!(curve.len(), 1 + 20);
    assert_eq!(curve.last().unwrap()[0], "200");

    let reps = read_csv(&out.join("replications.csv"));
    assert_eq!(reps.len(), 1 + 2 * 3);

    let trace = read_csv(&out.join("traces").join("trace_T50_rep2.csv"));
    assert_eq!(trace[0], ["round", "level_1", "level_2", "reward_1", "reward_2", "expected_reward"]);
    assert_eq!(trace.len(), 51);
    for row in &trace[1..] {
        let used: usize = row[1].parse::<usize>().unwrap() + row[2].parse::<usize>().unwrap();
        assert!(used <= 2);
    }

    let meta = read_csv(&out.join("meta.csv"));
    let keys: Vec<&str> = meta[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(&keys[..4], ["mode", "config_hash", "seed", "replications"]);
    assert_eq!(meta[3][1], "7");
}

#[test]
fn seed_override_changes_results() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("dra.toml");
    fs::write(&cfg, DRA).unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(resalloc(&["run", "--config", path(&cfg), "--out", path(&a)]).status.success());
    assert!(resalloc(&["run", "--config", path(&cfg), "--out", path(&b), "--seed", "8"]).status.success());
    assert_ne!(
        fs::read(a.join("replications.csv")).unwrap(),
        fs::read(b.join("replications.csv")).unwrap()
    );
    assert_eq!(read_csv(&b.join("meta.csv"))[3][1], "8");
}

#[test]
fn config_errors_exit_one_and_write_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cases = [
        ("missing", None),
        ("syntax", Some("mode = \"dra\"\nseed = \n")),
        ("unknown field", Some("mode = \"dra\"\nseed = 1\ncolour = 3\n")),
        ("bad levels", Some(&DRA.replace("levels = 3", "levels = 9")[..])),
        ("bad probability", Some(&DRA.replace("0.9]]", "1.5]]")[..])),
    ];
    for (name, text) in cases {
        let cfg = tmp.path().join(format!("{}.toml", name.replace(' ', "_")));
        if let Some(text) = text {
            fs::write(&cfg, text).unwrap();
        }
        let o = resalloc(&["run", "--config", path(&cfg), "--out", path(&out)]);
        assert_eq!(o.status.code(), Some(1), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.exists(), "{name} wrote output");
    }
    assert_eq!(resalloc(&["run", "--config", "x.toml", "--jobs", "0"]).status.code(), Some(1));
    assert_eq!(resalloc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(resalloc(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    // 5^12 allocations is past the enumeration limit
    let big = format!(
        "mode = \"bounds\"\nseed = 0\nhorizons = [100]\n[problem]\nresources = 12\nbudget = 48.0\nlevels = 5\n\
         [reward]\nfamily = \"table\"\np = [{}]\n",
        ["[0.1, 0.2, 0.3, 0.4, 0.5]"; 12].join(", ")
    );
    let cfg = tmp.path().join("big.toml");
    fs::write(&cfg, big).unwrap();
    let o = resalloc(&["bounds", "--config", path(&cfg), "--out", path(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    // output directory path is an existing file
    let dra = tmp.path().join("dra.toml");
    fs::write(&dra, DRA).unwrap();
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let o = resalloc(&["run", "--config", path(&dra), "--out", path(&blocker)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_check_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("oc");
    let o = resalloc(&["oracle-check", "--instances", "40", "--seed", "3", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("exact: PASS"), "{stdout}");
    let rows = read_csv(&out.join("oracle_check.csv"));
    assert_eq!(rows.len(), 41);
    let matched = rows[0].iter().position(|h| h == "exact_match").unwrap();
    assert!(rows[1..].iter().all(|r| r[matched] == "true"));
}

#[test]
fn bounds_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("dra.toml");
    fs::write(&cfg, DRA.replace("horizons = [50, 200]", "horizons = [100, 1000, 10000]")).unwrap();
    let out = tmp.path().join("b");
    let o = resalloc(&["bounds", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out.join("bounds.csv"));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1][1], "0.9");
    // both bounds grow with the horizon
    for col in [4, 5] {
        let v: Vec<f64> = rows[1..].iter().map(|r| r[col].parse().unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]), "column {col}: {v:?}");
    }
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            resalloc::experiment::ExperimentConfig::load(&p)
                .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
