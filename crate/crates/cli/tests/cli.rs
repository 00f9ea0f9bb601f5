use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dirand::extractor::{extractor_loss, BitString};
use dirand::geat::{finite_rate, ProtocolParams};
use dirand::tradeoff::load_certificate;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirand")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_bits(path: &Path, bits: &str) {
    let mut buf = Vec::new();
    BitString::parse(bits).unwrap().write_to(&mut buf).unwrap();
    fs::write(path, buf).unwrap();
}

/// Rows of a CSV file after its `#` comment lines, split on commas.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn certify_reports_the_bound() {
    let o = run(&["certify", "--cert", path_str(&fixture("2a_global.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("OK, rate bound at ν"), "{out}");
    assert!(out.lines().next().unwrap().ends_with("≤ 1.7964"), "{out}");
    assert!(out.contains("dual feasibility margin"));
}

#[test]
fn certify_json_carries_schema() {
    let o = run(&["certify", "--cert", path_str(&fixture("3b_blind.json")), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], "di_rand_cli_json_v1");
    assert_eq!(v["class"], "3b");
    assert!(v["f_at_nu"].as_f64().unwrap() <= 0.9238 + 1e-6);
}

#[test]
fn certify_rejects_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("2a_local.json")).unwrap();

    let truncated = dir.path().join("truncated.json");
    fs::write(&truncated, &text[..text.len() / 2]).unwrap();
    let o = run(&["certify", "--cert", path_str(&truncated)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schema"), "{}", stderr(&o));

    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["di_rand_certificate_v1"]["gamma_z_star"].as_array_mut().unwrap().pop();
    let mismatched = dir.path().join("mismatched.json");
    fs::write(&mismatched, v.to_string()).unwrap();
    let o = run(&["certify", "--cert", path_str(&mismatched)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gamma_z_star"), "{}", stderr(&o));

    let o = run(&["certify", "--cert", path_str(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rate_single_point_matches_engine() {
    let cert_path = fixture("2a_local.json");
    let o = run(&[
        "rate", "--cert", path_str(&cert_path), "--n", "1e7", "--beta-grid", "5e-5", "--nu-grid", "0.5", "--gamma", "0.025",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# di_rand_rate_csv v1\n"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][8], "rate");
    let cert = load_certificate(&fs::read(&cert_path).unwrap()).unwrap();
    let p = ProtocolParams::new(cert.class, cert.rand_type, 10_000_000).with_w_exp(cert.w_exp).with_gamma(0.025);
    let want = finite_rate(&cert, &p, 5e-5, 0.5).unwrap();
    let got: f64 = rows[1][8].parse().unwrap();
    assert_eq!(got, want.rate);
    assert!(got > 0.0);
    let eps_s: f64 = rows[1][10].parse().unwrap();
    assert!((eps_s - 2e-12).abs() < 1e-14);
}

#[test]
fn rate_sweep_is_monotone_with_a_zero_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rates.csv");
    let heat = dir.path().join("heat.csv");
    let o = run(&[
        "rate",
        "--cert",
        path_str(&fixture("2a_local.json")),
        "--n",
        "1e5,1e6,1e7,1e8,1e10,1e12",
        "--beta-grid",
        "log:1e-7:0.5:30",
        "--nu-grid",
        "lin:0:1:5",
        "--gamma-grid",
        "log:1e-4:1:9",
        "--out",
        path_str(&out),
        "--heatmap",
        path_str(&heat),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&fs::read_to_string(&out).unwrap());
    let rates: Vec<f64> = rows[1..].iter().map(|r| r[8].parse().unwrap()).collect();
    assert_eq!(rates.len(), 6);
    assert_eq!(rates[0], 0.0);
    assert!(rates.windows(2).all(|w| w[0] <= w[1]), "{rates:?}");
    assert!(*rates.last().unwrap() > 0.9);
    assert_eq!(csv_rows(&fs::read_to_string(&heat).unwrap()).len(), 1 + 6 * 30 * 5 * 9);
}

#[test]
fn rate_rejects_bad_input() {
    let cert = fixture("2a_local.json");
    let o = run(&["rate", "--cert", path_str(&cert), "--n", "1e6", "--class", "3b"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["rate", "--cert", path_str(&cert), "--n", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["rate", "--cert", path_str(&cert), "--n", "1e6", "--beta-grid", "lin:0:1:3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("beta"), "{}", stderr(&o));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&[
            "simulate", "--class", "2a", "--rand-type", "global", "--n", "2e4", "--gamma", "0.3", "--trials", "5", "--seed", "9",
            "--out", path_str(out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in ["summary.csv", "trials.csv", "transcript.bin", "raw_bits.bin"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let rows = csv_rows(&fs::read_to_string(a.join("trials.csv")).unwrap());
    assert_eq!(rows.len(), 6);
    let bits = BitString::read_from(&fs::read(a.join("raw_bits.bin")).unwrap()[..]).unwrap();
    let tests: usize = rows[1][1].parse().unwrap();
    assert_eq!(bits.len(), 2 * (20_000 - tests));
}

#[test]
fn simulate_3b_zero_rates_are_small() {
    let o = run(&["simulate", "--class", "3b", "--rand-type", "blind", "--n", "1e6", "--w-tol", "0.01", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rates = v["zero_hit_rates"].as_array().unwrap();
    assert_eq!(rates.len(), 3);
    // Honest 3b zeros are below 1e-9; 1e6 tests leave room for at most a stray hit.
    assert!(rates.iter().all(|r| r["rate"].as_f64().unwrap() <= 1e-9 + 2e-6));
    assert_eq!(v["abort_fraction"], 0.0);
}

#[test]
fn simulate_usage_errors() {
    let o = run(&["simulate", "--class", "2a", "--n", "100", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "--n", "100"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "--class", "4z", "--n", "100"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "--class", "2a", "--n", "100", "--gamma", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn extract_hand_example() {
    let dir = tempfile::tempdir().unwrap();
    let (input, seed, out) = (dir.path().join("in.bin"), dir.path().join("seed.bin"), dir.path().join("out.bin"));
    write_bits(&input, "101");
    write_bits(&seed, "1011");
    // eps_ext = 0.5 costs log(33) + 2 bits, so k_ext = 9.5 leaves two.
    let o = run(&[
        "extract", "--input", path_str(&input), "--seed-file", path_str(&seed), "--k-ext", "9.5", "--epsilon-ext", "0.5",
        "--out", path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("extracted 2 bits"));
    let bits = BitString::read_from(&fs::read(&out).unwrap()[..]).unwrap();
    assert_eq!(bits.to_string(), "01");
}

#[test]
fn extract_length_and_infeasibility() {
    let dir = tempfile::tempdir().unwrap();
    let (input, seed) = (dir.path().join("in.bin"), dir.path().join("seed.bin"));
    write_bits(&input, &"1101".repeat(100));
    write_bits(&seed, &"0110".repeat(200));
    let loss = extractor_loss(0.5e-15, 0.5e-15, 1.0).unwrap();
    let k = 300.7;
    let o = run(&["extract", "--input", path_str(&input), "--seed-file", path_str(&seed), "--k-ext", "300.7", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["output_bits"].as_u64().unwrap(), (k - loss).floor() as u64);

    let o = run(&["extract", "--input", path_str(&input), "--seed-file", path_str(&seed), "--k-ext", "150"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("nothing extractable"));

    let o = run(&["extract", "--input", path_str(&input), "--seed-file", path_str(&input), "--k-ext", "300.7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("sim.conf");
    fs::write(&conf, "# honest 2a run\nclass = 2a\nn = 5e3\ngamma = 0.5\nseed = 3\nw_tol = 0.02\n").unwrap();
    let o = run(&["simulate", "--config", path_str(&conf), "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["params"]["n"], 5000);
    assert_eq!(v["params"]["w_tol"], 0.02);
    let o = run(&["simulate", "--config", path_str(&conf), "--w-tol", "0.03", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["params"]["w_tol"], 0.03);
    assert_eq!(v["seed"], 3);

    fs::write(&conf, "bogus_key = 1\n").unwrap();
    let o = run(&["simulate", "--config", path_str(&conf)]);
    assert_eq!(o.status.code(), Some(2));
}
