//! Acceptance criterion 7: every command is deterministic given
//! (config, seed) — re-runs produce byte-identical dataset/CSV/JSON outputs.

use std::path::{Path, PathBuf};
use std::process::Command;

fn wslb() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wslb"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const PRIOR: &str = r#"
[prior]
num_paths = 3
normalize_power = true
power = { dist = "uniform", lo = 0.0, hi = 1.0 }
delay = { dist = "constant", value = 0.0 }
doppler = { dist = "constant", value = 0.0 }
aoa = { dist = "uniform", lo = -1.57, hi = 1.57 }
aod = { dist = "constant", value = 0.0 }
"#;

const CHANNEL: &str = r#"
[channel]
m_sc = 1
m_sn = 1
m_r = 8
m_t = 1
delta_f = 15e3
delta_t = 5e-4
f_c = 2.1e9
"#;

/// Runs one command twice into fresh directories and compares the bytes of
/// every produced file.
fn assert_deterministic(dir: &Path, args: &[&str], outputs: &[&str]) -> bool {
    let run = |out: &PathBuf| {
        let output = wslb().args(args).arg("--out").arg(out).output().unwrap();
        assert!(
            output.status.success(),
            "command {args:?} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    };
    let a = dir.join("a");
    let b = dir.join("b");
    run(&a);
    run(&b);
    outputs.iter().all(|name| {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        x == y
    })
}

#[test]
fn criterion_7_cli_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    let gen = dir.join("gen.toml");
    write(&gen, &format!("n = 200\nseed = 7\n{CHANNEL}{PRIOR}"));
    let gen_ok = assert_deterministic(
        &dir.join("gen"),
        &["gen-data", "--config", gen.to_str().unwrap()],
        &["dataset.wslb"],
    );

    let genv = dir.join("genv.toml");
    write(
        &genv,
        r#"
n = 200
seed = 7

[velocity]
regions = [[0.0, 5.0], [10.0, 15.0], [20.0, 25.0], [30.0, 35.0]]
masses = [0.25, 0.25, 0.25, 0.25]
paths = 8

[velocity.cfg]
m_sc = 1
m_sn = 16
m_r = 1
m_t = 1
delta_f = 15e3
delta_t = 5e-4
f_c = 2.1e9
"#,
    );
    let genv_ok = assert_deterministic(
        &dir.join("genv"),
        &["gen-data", "--config", genv.to_str().unwrap()],
        &["dataset.wslb"],
    );

    let verify = dir.join("verify.toml");
    write(&verify, &format!("n_xi = 3\nn_beta = 2000\ntol = 0.2\nseed = 1\n{CHANNEL}{PRIOR}"));
    let verify_ok = assert_deterministic(
        &dir.join("verify"),
        &["verify-theorem", "--config", verify.to_str().unwrap()],
        &["verify.json"],
    );

    let cluster = dir.join("cluster.toml");
    write(&cluster, "n_train = 200\nn_test = 200\nk_grid = [2]\nseed = 1\npaths = 6\n");
    let cluster_ok = assert_deterministic(
        &dir.join("cluster"),
        &["cluster", "--config", cluster.to_str().unwrap()],
        &["cluster.csv"],
    );

    let estimate = dir.join("estimate.toml");
    write(
        &estimate,
        &format!(
            "snr_grid_db = [0.0, 10.0]\nn_test = 200\nn_train = 2000\nseed = 5\n{CHANNEL}{PRIOR}"
        ),
    );
    let estimate_ok = assert_deterministic(
        &dir.join("estimate"),
        &["estimate", "--config", estimate.to_str().unwrap()],
        &["estimate.csv"],
    );

    let pass = gen_ok && genv_ok && verify_ok && cluster_ok && estimate_ok;
    println!(
        "[criterion 7] {}: cli determinism (gen-data {gen_ok}/{genv_ok}, verify {verify_ok}, \
         cluster {cluster_ok}, estimate {estimate_ok})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}
