use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_treatyweb");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/fixture").join(name)
}

fn treatyweb(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Nine countries: two four-cliques joined through country BBI.
fn write_barbell(dir: &Path) -> (PathBuf, PathBuf) {
    let countries = dir.join("countries.csv");
    let mut text = String::from("iso3,name\n");
    for i in 1..=9u8 {
        text.push_str(&format!("BB{},Country {i}\n", (b'A' + i - 1) as char));
    }
    fs::write(&countries, text).unwrap();
    let treaties = dir.join("treaties.csv");
    fs::write(
        &treaties,
        "acronym,name,layer,members\n\
         WEST,,political,BBA;BBB;BBC;BBD\n\
         EAST,,political,BBE;BBF;BBG;BBH\n\
         LINKW,,political,BBD;BBI\n\
         LINKE,,political,BBI;BBE\n",
    )
    .unwrap();
    (countries, treaties)
}

fn report_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[1], "entity");
    assert_eq!(header[13], "delta_norm");
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn audit_prints_fixture_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = treatyweb(&[
        "audit",
        "--countries",
        s(&fixture("countries.csv")),
        "--treaties",
        s(&fixture("treaties.csv")),
        "--bilaterals",
        s(&fixture("bilaterals.csv")),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    for (k, v) in [("countries", 12), ("political_pairs", 18), ("economic_pairs", 16), ("political_only", 7)] {
        assert!(stdout.lines().any(|l| l.split_whitespace().collect::<Vec<_>>() == [k, &v.to_string()]), "{stdout}");
    }
    let artifact = fs::read_to_string(dir.path().join("audit.csv")).unwrap();
    assert!(artifact.starts_with("# tool: treatyweb "));
    assert!(artifact.contains("# input: treaties treaties.csv sha256="));
}

#[test]
fn malformed_and_empty_treaty_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let countries = s(&fixture("countries.csv")).to_string();
    let cases = [
        ("empty.csv", "acronym,name,layer,members\n"),
        ("blank.csv", ""),
        ("bad_layer.csv", "acronym,name,layer,members\nX,,military,USA;CAN\n"),
        ("unknown.csv", "acronym,name,layer,members\nX,,economic,USA;ZZZ\n"),
        ("single.csv", "acronym,name,layer,members\nX,,economic,USA\n"),
    ];
    for (name, body) in cases {
        let path = dir.path().join(name);
        fs::write(&path, body).unwrap();
        let o = treatyweb(&["audit", "--countries", &countries, "--treaties", s(&path), "--out", s(dir.path())]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert!(err.contains(name), "{name}: {err}");
    }
    let o = treatyweb(&["sweep", "countries", "--countries", &countries, "--treaties", "/nonexistent.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let o = treatyweb(&["sweep", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn barbell_bridge_tops_country_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let (countries, treaties) = write_barbell(dir.path());
    let out = dir.path().join("out");
    let o = treatyweb(&[
        "sweep",
        "countries",
        "--countries",
        s(&countries),
        "--treaties",
        s(&treaties),
        "--layer",
        "political",
        "--scope",
        "layer",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().nth(1).unwrap().contains("BBI"));
    let rows = report_rows(&out.join("sweep_countries_political.csv"));
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0][1], "BBI");
    assert_eq!(rows[0][13], "1.0");
    // c = 3/2, q = 3, g = 4/9
    assert_eq!(rows[0][12].parse::<f64>().unwrap(), 10.125);
    assert!(!out.join("sweep_countries_economic.csv").exists());
}

#[test]
fn single_treaty_normalizes_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let treaties = dir.path().join("treaties.csv");
    fs::write(&treaties, "acronym,name,layer,members\nSOLO,Only one,economic,USA;CAN;MEX\n").unwrap();
    let out = dir.path().join("out");
    let o = treatyweb(&[
        "sweep",
        "treaties",
        "--countries",
        s(&fixture("countries.csv")),
        "--treaties",
        s(&treaties),
        "--emit-plot-data",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = report_rows(&out.join("sweep_treaties.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0][0].as_str(), rows[0][1].as_str(), rows[0][13].as_str()), ("treaty", "SOLO", "1.0"));
    let plot = fs::read_to_string(out.join("plot_treaties.csv")).unwrap();
    assert!(plot.lines().filter(|l| !l.starts_with('#')).eq(["entity,layer,delta_norm", "SOLO,economic,1.0"]));
}

fn sweep_fixture(out: &Path, extra: &[&str]) -> Output {
    let (c, t, b) = (fixture("countries.csv"), fixture("treaties.csv"), fixture("bilaterals.csv"));
    let mut args = vec![
        "sweep",
        "countries",
        "--countries",
        s(&c),
        "--treaties",
        s(&t),
        "--bilaterals",
        s(&b),
        "--seed",
        "42",
        "--out",
        s(out),
    ];
    args.extend_from_slice(extra);
    treatyweb(&args)
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(sweep_fixture(&a, &["--emit-plot-data", "--threads", "1"]).status.success());
    assert!(sweep_fixture(&b, &["--emit-plot-data", "--threads", "3"]).status.success());
    let (fa, fb) = (dir_contents(&a), dir_contents(&b));
    assert_eq!(fa.len(), 4);
    assert_eq!(fa, fb);
}

fn write_index(path: &Path, rows: &[Vec<String>], f: impl Fn(f64) -> f64) {
    let mut text = String::from("iso3,value\n");
    for r in rows {
        text.push_str(&format!("{},{}\n", r[1], f(r[13].parse().unwrap())));
    }
    fs::write(path, text).unwrap();
}

fn correlate(report: &Path, index: &Path, out: &Path, extra: &[&str]) -> (i32, String) {
    let mut args = vec!["correlate", "--report", s(report), "--index", s(index), "--out", s(out)];
    args.extend_from_slice(extra);
    let o = treatyweb(&args);
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap() + &String::from_utf8(o.stderr).unwrap())
}

#[test]
fn correlate_against_own_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert!(sweep_fixture(&out, &["--layer", "economic"]).status.success());
    let report = out.join("sweep_countries_economic.csv");
    let rows = report_rows(&report);

    let same = dir.path().join("same.csv");
    write_index(&same, &rows, |v| v);
    let (code, text) = correlate(&report, &same, &out, &[]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("EDI vs same: r=1.000000"), "{text}");
    let artifact = fs::read_to_string(out.join("correlation.csv")).unwrap();
    let data: Vec<&str> = artifact.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "series_a,series_b,r,p,n,method");
    assert!(data[1].starts_with("EDI,same,1.0,0.0,12,"), "{}", data[1]);

    let negated = dir.path().join("negated.csv");
    write_index(&negated, &rows, |v| -v);
    let (code, text) = correlate(&report, &negated, &out, &["--method", "permutation", "--permutations", "2000"]);
    assert_eq!(code, 0, "{text}");
    let artifact = fs::read_to_string(out.join("correlation.csv")).unwrap();
    let line = artifact.lines().last().unwrap();
    assert!(line.starts_with("EDI,negated,-1.0,"), "{line}");
    assert!(line.ends_with(",12,permutation"));
}

#[test]
fn correlate_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert!(sweep_fixture(&out, &[]).status.success());
    let both = dir.path().join("both.csv");
    let mut text = fs::read_to_string(out.join("sweep_countries_political.csv")).unwrap();
    let economic = fs::read_to_string(out.join("sweep_countries_economic.csv")).unwrap();
    for line in economic.lines().filter(|l| l.starts_with("country,")) {
        text.push_str(line);
        text.push('\n');
    }
    fs::write(&both, text).unwrap();
    let (code, msg) = correlate(&both, &fixture("index.csv"), &out, &[]);
    assert_eq!(code, 2, "{msg}");
    assert!(msg.contains("--layer"));
    let (code, _) = correlate(&both, &fixture("index.csv"), &out, &["--layer", "political"]);
    assert_eq!(code, 0);

    let tiny = dir.path().join("tiny.csv");
    fs::write(&tiny, "iso3,value\nUSA,1\nCAN,2\n").unwrap();
    let (code, _) = correlate(&both, &tiny, &out, &["--layer", "economic"]);
    assert_eq!(code, 2);
}

#[test]
fn json_reports_round_trip_into_correlate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert!(sweep_fixture(&out, &["--layer", "political", "--format", "json"]).status.success());
    let report = out.join("sweep_countries_political.json");
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(value["provenance"]["config"]["seed"], "42");
    assert_eq!(value["provenance"]["inputs"].as_array().unwrap().len(), 3);
    let data = value["data"].as_array().unwrap();
    assert_eq!(data.len(), 12);
    assert_eq!(data[0]["delta_norm"], 1.0);
    let (code, text) = correlate(&report, &fixture("index.csv"), &out, &["--format", "json"]);
    assert_eq!(code, 0, "{text}");
    let corr: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("correlation.json")).unwrap()).unwrap();
    assert_eq!(corr["data"][0]["n"], 12);
}

#[test]
fn communities_writes_assignments() {
    let dir = tempfile::tempdir().unwrap();
    let (countries, treaties) = write_barbell(dir.path());
    let out = dir.path().join("out");
    let base = ["communities", "--countries", s(&countries), "--treaties", s(&treaties), "--out", s(&out)];
    let o = treatyweb(&[&base[..], &["--scope", "layer", "--layer", "political"]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("communities.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "node,layer,label");
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[1], "BBA,political,0");
    assert_eq!(rows[8], "BBH,political,1");

    let o = treatyweb(&base);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(out.join("communities.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 19);

    assert_eq!(treatyweb(&[&base[..], &["--scope", "layer"]].concat()).status.code(), Some(2));
    assert_eq!(treatyweb(&[&base[..], &["--repetitions", "0"]].concat()).status.code(), Some(2));
}
