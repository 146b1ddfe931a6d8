use std::path::PathBuf;
use std::process::{Command, Output};

fn sixfun(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sixfun")).args(args).output().unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn certify_shipped_fixtures() {
    for (name, first_line, code) in [
        ("smooth-id.json", "Smooth", 0),
        ("suave-BC3-Q.json", "Suave", 0),
        ("prim-BC3-Q.json", "Prim", 0),
        ("smooth-BC2-Q.json", "Smooth", 0),
        ("smooth-BC2-Q-misscaled.json", "Smooth (unit repaired)", 0),
        ("prim-BCp-Fp.json", "FailsRight", 1),
    ] {
        let o = sixfun(&["certify", &fixture(name)]);
        assert_eq!(o.status.code(), Some(code), "{name}");
        assert_eq!(stdout(&o).lines().next(), Some(first_line), "{name}");
    }
    let o = sixfun(&["certify", "--json", &fixture("prim-BCp-Fp.json")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "FailsRight");
    assert!(v["residue"]["components"].as_object().is_some_and(|c| !c.is_empty()));
}

#[test]
fn schema_errors_name_the_path() {
    let text = std::fs::read_to_string(fixture("smooth-BC2-Q.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["payloads"]["L"]["objects"][0] = serde_json::json!("not a rep");
    let dir = std::env::temp_dir().join(format!("sixfun-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    let o = sixfun(&["certify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.json") && err.contains("payloads.L.objects[0]"), "{err}");
    // inputs are never rewritten
    assert_eq!(std::fs::read_to_string(&bad).unwrap(), serde_json::to_string(&v).unwrap());
}

#[test]
fn cohomology_and_csupport() {
    assert_eq!(stdout(&sixfun(&["cohomology", "--model", "point", "--field", "Q"])), "H^0 = 1\n");
    assert_eq!(stdout(&sixfun(&["cohomology", "--model", "sphere:1", "--field", "Q"])), "H^0 = 1, H^1 = 1\n");
    assert_eq!(stdout(&sixfun(&["cohomology", "--model", "torus", "--field", "F2"])), "H^0 = 1, H^1 = 2, H^2 = 1\n");
    let o = sixfun(&["csupport", "--model", "interval-in-circle", "--shift", "1", "--field", "Q"]);
    assert_eq!(stdout(&o), "H^0 = 1\n");
    assert_eq!(stdout(&sixfun(&["csupport", "--model", "figure-eight", "--shift", "1"])), "H^0 = 2\n");
    let o = sixfun(&["csupport", "--model", "sphere:1", "--subset", "a,b"]);
    assert_eq!(o.status.code(), Some(0));
    let o = sixfun(&["cohomology", "--model", "sphere:1", "--field", "F4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(sixfun(&["verify", "--suite", "excision", "--seed", "7"]).status.code(), Some(0));
    let o = sixfun(&["verify", "--suite", "registry"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("expected failure confirmed").count(), 3);
    assert_eq!(sixfun(&["verify", "--suite", "nope"]).status.code(), Some(2));
    let models = stdout(&sixfun(&["models"]));
    assert!(models.contains("interval-in-circle"));
}
