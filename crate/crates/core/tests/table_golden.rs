//! Golden-file tests for the plain-text divisor-table format.

use manin_core::surface::{load_model, SurfaceModel};

fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).expect("golden file")
}

#[test]
fn tables_match_golden_files() {
    let cases = [
        ("ex1", None, "ex1-split-quadric.txt"),
        ("ex2", None, "ex2-a3a1-quartic.txt"),
        ("ex3", Some(4), "ex3-orbit-closure-4.txt"),
    ];
    for (name, n, file) in cases {
        let m = load_model(name, n).unwrap();
        assert_eq!(m.to_table(), golden(file), "table drift for {name}");
    }
}

#[test]
fn golden_files_parse_and_validate() {
    for file in [
        "ex1-split-quadric.txt",
        "ex2-a3a1-quartic.txt",
        "ex3-orbit-closure-4.txt",
    ] {
        let m = SurfaceModel::from_table(&golden(file)).unwrap();
        assert!(manin_core::surface::verify_geometry(&m).all_passed());
    }
}

#[test]
fn parser_rejects_tampered_rows() {
    let mut text = golden("ex1-split-quadric.txt");
    text = text.replace("divisor 0 x1=0 1 1 0 0", "divisor 0 x1=0 1 1 0 1");
    let err = SurfaceModel::from_table(&text).unwrap_err().to_string();
    assert!(err.contains("anticanonical-upper-bound"), "{err}");
}
