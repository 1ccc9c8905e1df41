use std::path::Path;
use std::process::{Command, Output};

use pascu_core::{beta_sharp, KernelSpec, ParameterSet};
use serde_json::Value;

const SMALL_GRID: [&str; 6] = ["--radii", "0.5,0.9", "--angles", "16", "--epsilons", "4"];

fn pascu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pascu"))
        .args(args)
        .env_remove("PASCU_FORMAT")
        .env_remove("PASCU_OUTPUT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn beta_matches_library() {
    let o = pascu(&[
        "beta",
        "--kernel",
        "komatu c=0 delta=3",
        "--mu",
        "1",
        "--nu",
        "2",
        "--sigma",
        "0.1",
        "--xi",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let k = KernelSpec::komatu(0.0, 3.0).unwrap();
    let expect = beta_sharp(&k, &ParameterSet::from_mu_nu(1.0, 2.0, 0.1, 1.0).unwrap()).unwrap().beta;
    assert!((v["beta"].as_f64().unwrap() - expect).abs() <= 1e-12 * expect.abs());
    assert_eq!(v.as_object().unwrap().keys().next().unwrap(), "schema_version");
}

#[test]
fn alpha_gamma_resolve_like_mu_nu() {
    let a = pascu(&["beta", "--kernel", "bernardi c=1", "--alpha", "3", "--gamma", "1", "--sigma", "0", "--xi", "0.5"]);
    let b = pascu(&["beta", "--kernel", "bernardi c=1", "--mu", "1", "--nu", "1", "--sigma", "0", "--xi", "0.5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&p1, &p2] {
        let mut args = vec!["certify", "--kernel", "bernardi c=1", "--alpha", "3", "--gamma", "1", "--sigma", "0"];
        args.extend(["--xi", "0.5", "--format", "json", "--output", p.to_str().unwrap()]);
        args.extend(SMALL_GRID);
        let o = pascu(&args);
        assert!(matches!(o.status.code(), Some(0 | 1)), "{o:?}");
        assert!(o.stdout.is_empty());
    }
    let (a, b) = (read(&p1), read(&p2));
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!(v["passed"].is_boolean());
}

#[test]
fn usage_errors_exit_two() {
    let cases: [&[&str]; 5] = [
        &["beta", "--kernel", "bernardi c=1", "--sigma", "0", "--xi", "0"],
        &[
            "beta",
            "--kernel",
            "bernardi c=1",
            "--alpha",
            "3",
            "--gamma",
            "1",
            "--mu",
            "1",
            "--nu",
            "1",
            "--sigma",
            "0",
            "--xi",
            "0",
        ],
        &["beta", "--kernel", "bernardi q=1", "--mu", "1", "--nu", "1", "--sigma", "0", "--xi", "0"],
        &["beta", "--kernel", "bernardi c=1", "--mu", "1", "--nu", "1", "--sigma", "1.5", "--xi", "0"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = pascu(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {o:?}");
        assert!(!o.stderr.is_empty());
    }
    let o = pascu(&["beta", "--kernel", "bernardi c=1", "--mu", "1", "--sigma", "0", "--xi", "0"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha/gamma, mu/nu"));
}

#[test]
fn failed_check_exits_one_and_still_reports() {
    // delta = 2 violates the family hypothesis delta >= 3 - c.
    let o = pascu(&[
        "check",
        "--kernel",
        "komatu c=0 delta=2",
        "--mu",
        "1",
        "--nu",
        "2",
        "--sigma",
        "0.1",
        "--xi",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], false);
    let o =
        pascu(&["check", "--kernel", "komatu c=0 delta=3", "--mu", "1", "--nu", "2", "--sigma", "0.1", "--xi", "1"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn saved_config_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out1 = dir.path().join("one.txt");
    let o = pascu(&[
        "beta",
        "--kernel",
        "hohlov a=1 b=1 c=4",
        "--mu",
        "1",
        "--nu",
        "2",
        "--sigma",
        "0.1",
        "--xi",
        "1",
        "--output",
        out1.to_str().unwrap(),
        "--save-config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = read(&cfg);
    assert!(text.contains("command = \"beta\""), "{text}");
    let out2 = dir.path().join("two.txt");
    let o = pascu(&["run", cfg.to_str().unwrap(), "--output", out2.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert_eq!(read(&out1), read(&out2));
    assert!(read(&out1).lines().any(|l| l.starts_with("beta_closed_form") && !l.ends_with("none")));
}

#[test]
fn bad_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "command = \"beta\"\nkernel = \"bernardi c=1\"\nmu = 1\nnu = 1\nsigma = \"x\"\nxi = 0\n")
        .unwrap();
    let o = pascu(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma"));
    std::fs::write(
        &cfg,
        "command = \"beta\"\nkernel = \"bernardi c=1\"\nmu = 1\nnu = 1\nsigma = 0\nxi = 0\ncolour = 1\n",
    )
    .unwrap();
    let o = pascu(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 7"), "{o:?}");
}

#[test]
fn sweep_gives_one_row_per_point() {
    let mut args = vec!["sweep", "--kernel", "komatu c=0 delta=[2:4:10]", "--mu", "1", "--nu", "2"];
    args.extend(["--sigma", "0.1", "--xi", "1", "--format", "csv"]);
    args.extend(SMALL_GRID);
    let o = pascu(&args);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{o:?}");
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().get(0), Some("kernel"));
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    assert_eq!(&rows[0][0], "komatu c=0 delta=2");
    assert_eq!(&rows[9][0], "komatu c=0 delta=4");
}

#[test]
fn plot_data_has_two_blocks_and_marks_not_applicable() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.csv");
    let mut args = vec!["certify", "--kernel", "komatu c=0 delta=3", "--mu", "1", "--nu", "2"];
    args.extend(["--sigma", "0.1", "--xi", "0", "--plot-data", plot.to_str().unwrap()]);
    args.extend(SMALL_GRID);
    let o = pascu(&args);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{o:?}");
    let text = read(&plot);
    let blocks: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(blocks.len(), 2);
    assert!(blocks[0].starts_with("report,t,pi,l_at_argmin,monotone,growth\n"));
    assert!(blocks[1].starts_with("report,theta,re_ratio\n"));
    let row = blocks[0].lines().nth(1).unwrap();
    assert!(row.split(',').nth(4) == Some("NotApplicable"), "{row}");
    assert_eq!(blocks[1].lines().count(), 1 + 16);
}

#[test]
fn environment_sets_defaults() {
    let o = Command::new(env!("CARGO_BIN_EXE_pascu"))
        .args(["moments", "--kernel", "bernardi c=1"])
        .env("PASCU_FORMAT", "csv")
        .env("PASCU_MOMENTS", "3")
        .env_remove("PASCU_OUTPUT")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "n,tau\n0,1\n1,0.6666666666666666\n2,0.5\n3,0.4\n");
}
