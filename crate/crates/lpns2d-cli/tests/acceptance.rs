use std::fs;
use std::process::Command;

/// Two consecutive selftest runs must leave byte-identical tables. The
/// manifest is allowed to differ (it records wall time); the data is not.
#[test]
fn criterion_10_selftest_is_deterministic() {
    let bin = env!("CARGO_BIN_EXE_lpns2d");
    let root = tempfile::tempdir().unwrap();
    let dirs = [root.path().join("run1"), root.path().join("run2")];
    for dir in &dirs {
        let out = Command::new(bin)
            .args(["selftest", "--out"])
            .arg(dir)
            .output()
            .expect("selftest run");
        assert!(
            out.status.success(),
            "selftest exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let tables: Vec<Vec<u8>> =
        dirs.iter().map(|d| fs::read(d.join("results.csv")).unwrap()).collect();
    let identical = tables[0] == tables[1];
    let lines = tables[0].iter().filter(|&&b| b == b'\n').count();
    println!(
        "acceptance 10 (determinism): {} - two selftest runs, {} bytes, {} lines, byte-identical: {}",
        if identical { "PASS" } else { "FAIL" },
        tables[0].len(),
        lines,
        identical
    );
    assert!(identical, "selftest tables differ between consecutive runs");
}
