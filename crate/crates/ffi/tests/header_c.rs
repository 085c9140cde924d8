use std::process::Command;

const PROGRAM: &str = r#"
#include "wwspdc.h"
#include <stdio.h>

int main(void) {
    WwEnsemble *e = NULL;
    WwRate r;
    if (wwspdc_ensemble_new(1, 1000, 10, &e) != WW_STATUS_OK) return 1;
    WwStatus s = wwspdc_mc_single(e, 0.1, 0.0, 0.0, false, WWSPDC_CONVENTION_STOCHASTIC, &r);
    wwspdc_ensemble_free(e);
    printf("%s %d %f\n", wwspdc_version(), (int)s, r.mean);
    return s == WW_STATUS_OK ? 0 : 1;
}
"#;

#[test]
fn header_compiles_as_c() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler found, skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
