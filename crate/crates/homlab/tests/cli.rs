//! End-to-end exercises of the command-line surface and file formats.

use std::path::Path;
use std::process::Command;

fn homlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_homlab"))
}

fn write(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

const K3_JSON: &str = r#"{"signature":[{"name":"E","arity":2}],"size":3,"relations":{"E":[[0,1],[1,0],[0,2],[2,0],[1,2],[2,1]]}}"#;
const C6_TEXT: &str = "n 6\ne 0 1\ne 1 2\ne 2 3\ne 3 4\ne 4 5\ne 5 0\n";

#[test]
fn hom_count_and_cover_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let k3 = write(dir.path(), "k3.json", K3_JSON);
    let c6 = write(dir.path(), "c6.txt", C6_TEXT);

    let out = homlab()
        .args(["hom-count", "--source"])
        .arg(&c6)
        .arg("--target")
        .arg(&k3)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "66");

    // strong embeddings of K3 into K3: the 6 automorphisms
    let out = homlab()
        .args(["hom-count", "--strong-emb", "--source"])
        .arg(&k3)
        .arg("--target")
        .arg(&k3)
        .output()
        .unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "6");

    // search a cover, then count through it
    let cover = dir.path().join("cover.json");
    let out = homlab()
        .arg("cover")
        .arg(&c6)
        .args(["--k", "3", "--out"])
        .arg(&cover)
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = homlab()
        .args(["hom-count", "--source"])
        .arg(&c6)
        .arg("--target")
        .arg(&k3)
        .arg("--treedec")
        .arg(&cover)
        .output()
        .unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "66");
}

#[test]
fn width_and_depth_commands() {
    let dir = tempfile::tempdir().unwrap();
    let c6 = write(dir.path(), "c6.txt", C6_TEXT);
    let out = homlab().arg("treedepth").arg(&c6).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "4");
    let out = homlab().arg("treewidth").arg(&c6).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "2");
    // an unsatisfiable cover request exits nonzero
    let out = homlab().arg("cover").arg(&c6).args(["--k", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn equiv_wl_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let c6 = write(dir.path(), "c6.txt", C6_TEXT);
    let two_k3 = write(
        dir.path(),
        "2k3.txt",
        "n 6\ne 0 1\ne 1 2\ne 2 0\ne 3 4\ne 4 5\ne 5 3\n",
    );
    for (args, expected) in [
        (vec!["equiv", "--logic", "ck", "--width", "2"], "true"),
        (vec!["equiv", "--logic", "ck", "--width", "3"], "false"),
        (vec!["equiv", "--logic", "cn", "--depth", "2"], "true"),
        (vec!["wl", "--k", "1"], "true"),
        (vec!["wl", "--k", "2"], "false"),
    ] {
        let out = homlab().args(&args).arg(&c6).arg(&two_k3).output().unwrap();
        assert!(out.status.success(), "{args:?}");
        assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), expected, "{args:?}");
    }

    let phi = write(dir.path(), "phi.sexp", "(geq 6 x (geq 2 y (E x y)))");
    let out = homlab().arg("eval").arg(&c6).arg(&phi).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "true");

    // modal formulas route through the pointed evaluator
    let pointed = write(
        dir.path(),
        "chain.json",
        r#"{"signature":[{"name":"R","arity":2},{"name":"P","arity":1}],"size":2,"relations":{"R":[[0,1]],"P":[[1]]},"point":0}"#,
    );
    let modal = write(dir.path(), "modal.sexp", "(diamond R 1 (prop P))");
    let out = homlab().arg("eval").arg(&pointed).arg(&modal).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "true");
}

#[test]
fn ccq_lift_and_demo() {
    let dir = tempfile::tempdir().unwrap();
    let edge = write(
        dir.path(),
        "edge.json",
        r#"{"signature":[{"name":"E","arity":2}],"size":2,"relations":{"E":[[0,1]]}}"#,
    );
    let out = homlab().arg("ccq").arg(&edge).output().unwrap();
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "(geq 1 x0 (geq 1 x1 (E x0 x1)))"
    );

    let gamma = write(dir.path(), "gamma.sexp", "(geq 1 x (geq 1 y (E x y)))");
    let out = homlab().args(["lift", "--t", "2"]).arg(&gamma).output().unwrap();
    assert!(out.status.success());
    let lifted = String::from_utf8_lossy(&out.stdout);
    assert!(lifted.contains("geq"));

    let k3 = write(dir.path(), "k3.json", K3_JSON);
    let out = homlab()
        .args(["demo", "distinct-edge", "--bound", "9"])
        .arg(&k3)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("true"));
}

#[test]
fn comonad_emits_carrier_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let k3 = write(dir.path(), "k3.json", K3_JSON);
    let out_path = dir.path().join("carrier.json");
    let out = homlab()
        .arg("comonad")
        .arg(&k3)
        .args(["--kind", "ef", "--n", "2", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let carrier: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(carrier["size"], 3 + 9);
    let sidecar: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("carrier.plays.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sidecar["plays"].as_array().unwrap().len(), 12);
    assert_eq!(sidecar["counit"].as_array().unwrap().len(), 12);
}

#[test]
fn eliminate_collapses_i_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let ext = write(
        dir.path(),
        "ext.json",
        r#"{"signature":[{"name":"E","arity":2},{"name":"I","arity":2}],"size":3,"relations":{"E":[[1,2]],"I":[[0,1]]}}"#,
    );
    let cover = write(dir.path(), "cover.json", r#"{"parent":[-1,0,1],"pebbles":[1,2,1],"k":2}"#);
    let out_path = dir.path().join("reduced.json");
    let out = homlab()
        .arg("eliminate")
        .arg(&ext)
        .arg(&cover)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let reduced: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(reduced["size"], 2);
}

#[test]
fn sweep_writes_a_report_with_clean_summary() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = homlab()
        .args([
            "sweep",
            "--theorem",
            "grohe",
            "--depth",
            "2",
            "--max-size",
            "3",
            "--witness-cap",
            "4",
            "--out",
        ])
        .arg(&report_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["theorem"], "grohe");
    assert_eq!(report["summary"]["failures"], 0);
    assert!(!report["pairs"].as_array().unwrap().is_empty());

    // byte-identical on a second run
    let report2_path = dir.path().join("report2.json");
    homlab()
        .args([
            "sweep",
            "--theorem",
            "grohe",
            "--depth",
            "2",
            "--max-size",
            "3",
            "--witness-cap",
            "4",
            "--out",
        ])
        .arg(&report2_path)
        .output()
        .unwrap();
    assert_eq!(
        std::fs::read(&report_path).unwrap(),
        std::fs::read(&report2_path).unwrap()
    );
}

#[test]
fn verify_prints_per_pair_lines() {
    let out = homlab()
        .args([
            "verify",
            "--theorem",
            "dvorak",
            "--k",
            "2",
            "--max-size",
            "3",
            "--witness-cap",
            "4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().count() >= 28); // 7 graphs up to size 3
    assert!(text.contains("agree-"));
    assert!(!text.contains("FAILURE"));
}

#[test]
fn verify_accepts_a_pairs_directory() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a_c6.txt", C6_TEXT);
    write(dir.path(), "b_2k3.txt", "n 6\ne 0 1\ne 1 2\ne 2 0\ne 3 4\ne 4 5\ne 5 3\n");
    let out = homlab()
        .args([
            "verify",
            "--theorem",
            "dvorak",
            "--k",
            "3",
            "--witness-cap",
            "3",
            "--pairs",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("counts=(0, 12)") || text.contains("counts=(12, 0)"));
}
