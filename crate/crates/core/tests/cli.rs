use std::process::Command;

use crn_osc::workbench::RunRecord;

fn crn_osc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crn-osc"))
}

#[test]
fn enumerate_writes_keys_and_record() {
    let dir = tempfile::tempdir().unwrap();
    let keys = dir.path().join("k.txt");
    let rec = dir.path().join("run.json");
    let out = crn_osc()
        .args([
            "--out",
            rec.to_str().unwrap(),
            "enumerate",
            "--k",
            "2",
            "--l",
            "2",
            "--keys",
        ])
        .arg(&keys)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&keys).unwrap().lines().count(), 169);
    let r = RunRecord::read(&rec).unwrap();
    assert_eq!(r.command, "enumerate");
    assert_eq!(r.outputs, serde_json::json!(169));

    // Keys feed back in as closure seeds.
    let out = crn_osc()
        .args(["inherit-closure", "--target", "2,3", "--seeds"])
        .arg(&keys)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("(2,3) inheritors: 1312"));
}

#[test]
fn exit_code_follows_the_verdict() {
    assert!(crn_osc()
        .args(["certify", "--xiv-k", "0.05"])
        .status()
        .unwrap()
        .success());
    // Past the saddle-node there is no orbit to certify.
    assert_eq!(
        crn_osc()
            .args(["certify", "--xiv-k", "0.1"])
            .status()
            .unwrap()
            .code(),
        Some(1)
    );
    assert_eq!(
        crn_osc().args(["certify"]).status().unwrap().code(),
        Some(2)
    );
}

#[test]
fn text_networks_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.txt");
    std::fs::write(&net, "X1 + X2 -> 2 X2\n").unwrap();
    let out = crn_osc()
        .args([
            "hopf-screen",
            "--open",
            "--class",
            "pl",
            "--samples",
            "50",
            "--network",
        ])
        .arg(&net)
        .output()
        .unwrap();
    assert!(out.status.success());
}
