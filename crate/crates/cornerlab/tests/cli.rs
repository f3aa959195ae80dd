use std::path::PathBuf;

use serde_json::Value;

use cornerlab::classification::AzClass;
use cornerlab::cli::run;
use cornerlab::model::ModelSpec;

fn model(name: &str) -> String {
    format!("{}/../../models/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn out_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

/// Runs the CLI writing to a scratch file; returns the exit code and output.
fn call(tag: &str, args: &[&str]) -> (i32, String) {
    let out = out_path(tag);
    let _ = std::fs::remove_file(&out);
    let mut argv = vec!["cornerlab".to_string(), "--out".into(), out.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let code = run(argv);
    (code, std::fs::read_to_string(&out).unwrap_or_default())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn bundled_models_load() {
    let want = [
        ("ssh", AzClass::BDI),
        ("kitaev", AzClass::D),
        ("cii_chain", AzClass::CII),
        ("pwave", AzClass::D),
        ("helical_diii", AzClass::DIII),
        ("class_c", AzClass::C),
        ("ssh_x_ssh", AzClass::BDI),
        ("kitaev_x_kitaev", AzClass::DIII),
        ("ssh_x_kitaev", AzClass::D),
        ("cii_x_ssh", AzClass::CII),
    ];
    for (name, class) in want {
        let spec = ModelSpec::load(model(name)).unwrap();
        assert_eq!(spec.class().unwrap().class, class, "{name}");
    }
}

#[test]
fn invariant_of_ssh_square() {
    let (code, text) = call("inv.json", &["invariant", "--model", &model("ssh_x_ssh"), "--L", "16"]);
    assert_eq!(code, 0);
    let v = json(&text);
    assert_eq!(v["value"], 1);
    assert_eq!(v["group"], "Z");
    assert_eq!(v["class"], "BDI");
}

#[test]
fn classify_and_ko_table() {
    let (code, text) = call("classify.json", &["classify", "--class", "CII", "--n", "2", "--k", "2"]);
    assert_eq!(code, 0);
    assert_eq!(json(&text)["group"], "2Z");
    let (code, text) = call("ko.json", &["ko-table", "--algebra", "s", "--i", "2", "--alpha", "0/1", "--beta", "2/1"]);
    assert_eq!(code, 0);
    let v = json(&text);
    assert_eq!((v["group"].as_str(), v["t"].as_i64()), (Some("(Z2)^4"), Some(2)));
}

#[test]
fn product_output_reloads() {
    let (code, text) = call("prod.json", &["product", "--model", &model("ssh"), "--model", &model("kitaev")]);
    assert_eq!(code, 0);
    let spec = ModelSpec::from_json(&text).unwrap();
    assert_eq!(spec.class().unwrap().class, AzClass::D);
    assert_eq!(spec.model.dim(), 2);
}

#[test]
fn spectrum_csv() {
    let (code, text) = call("bands.csv", &["--output", "csv", "spectrum", "--model", &model("ssh"), "--grid", "4"]);
    assert_eq!(code, 0);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t1,band,energy"));
    assert_eq!(lines.count(), 8);
}

#[test]
fn exit_codes() {
    assert_eq!(call("gap_ok.json", &["gap", "--model", &model("ssh")]).0, 0);
    let (code, text) = call("gap_bad.json", &["gap", "--model", &model("ssh_critical")]);
    assert_eq!(code, 1);
    // The report is still written when the check fails.
    assert!(!text.is_empty());
    assert_eq!(call("order.json", &["ko-table", "--algebra", "s", "--i", "0", "--alpha", "2/1", "--beta", "0/1"]).0, 2);
    assert_eq!(call("nosuch.json", &["frobnicate"]).0, 2);
    assert_eq!(call("missing.json", &["gap", "--model", "/nonexistent.json"]).0, 1);
}

#[test]
fn product_needs_two_models() {
    let ssh = model("ssh");
    assert_eq!(call("one.json", &["product", "--model", &ssh]).0, 2);
    assert_eq!(call("three.json", &["product", "--model", &ssh, &ssh, "--model", &ssh]).0, 2);
    let (code, text) = call("pair.json", &["product", "--model", &ssh, &ssh]);
    assert_eq!(code, 0);
    assert_eq!(ModelSpec::from_json(&text).unwrap().class().unwrap().class, AzClass::BDI);
}
