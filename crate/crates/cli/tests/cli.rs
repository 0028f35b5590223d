use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chronocorr"))
}

fn run_sweep(dir: &Path, config: &str) -> Output {
    let path = dir.join("exp.cfg");
    std::fs::write(&path, config).unwrap();
    bin().arg("sweep").arg(&path).output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn first_zero(rows: &[Vec<String>], col: usize) -> f64 {
    rows.iter()
        .find(|r| r[col].parse::<f64>().unwrap() <= 1e-9)
        .map(|r| r[0].parse().unwrap())
        .expect("column never reaches zero")
}

fn death_time(dim: usize, expected: f64) {
    let dir = tempfile::tempdir().unwrap();
    let out = run_sweep(
        dir.path(),
        &format!("dim = {dim}\nstate = maximally_mixed\nchannel = depolarizing\nmeasures = TER\noutput = out\n"),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/sweep_maximally_mixed.csv"));
    assert_eq!(header, ["gamma_t", "TER", "flags"]);
    assert_eq!(rows.len(), 101);
    let t = first_zero(&rows, 1);
    assert!(
        t >= expected && t - expected <= 0.05 + 1e-12,
        "death at {t}, expected {expected}"
    );
}

#[test]
fn qubit_ter_dies_at_ln3() {
    death_time(2, 3f64.ln());
}

#[test]
fn qutrit_ter_dies_at_ln4() {
    death_time(3, 4f64.ln());
}

#[test]
fn mixed_qutrit_satisfies_nsit() {
    let dir = tempfile::tempdir().unwrap();
    for channel in ["amplitude_damping", "phase_damping", "depolarizing"] {
        let out = run_sweep(
            dir.path(),
            &format!(
                "dim = 3\nstate = mixed\nchannel = {channel}\nmeasures = NSIT\ngamma_t_points = 21\nsettings_count = 3\noutput = {channel}\n"
            ),
        );
        assert!(out.status.success());
        let (header, rows) = read_csv(&dir.path().join(channel).join("sweep_maximally_mixed.csv"));
        assert_eq!(header, ["gamma_t", "NSIT", "flags"]);
        for r in rows {
            assert!(r[1].parse::<f64>().unwrap() <= 1e-9, "{channel}: {r:?}");
        }
    }
}

#[test]
fn csv_columns_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_sweep(
        dir.path(),
        "dim = 3\nstate = vacuum, balanced, mixed\nchannel = phase_damping\n\
         measures = f, TER, ER, TSR, TNR, LHV-TNR, g, NSIT\ngamma_t_points = 5\noutput = out\n",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for state in ["vacuum", "balanced_superposition", "maximally_mixed"] {
        let (header, rows) = read_csv(&dir.path().join(format!("out/sweep_{state}.csv")));
        assert_eq!(
            header,
            ["gamma_t", "f", "TER", "ER", "TSR", "TNR", "LHV-TNR", "g", "NSIT", "flags"]
        );
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.len() == header.len()));
    }
    for family in ["causality", "entanglement", "steering", "nonlocality", "nsit"] {
        let svg = std::fs::read_to_string(dir.path().join(format!("out/{family}.svg"))).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("stroke-dasharray=\"8,5\"") && svg.contains("stroke-dasharray=\"2,4\""));
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = "dim = 2\nstate = vacuum, mixed\nchannel = amplitude_damping\nmeasures = TER, TSR, TNR\n\
                  gamma_t_points = 6\noptimize = true\nrestarts = 2\nmax_evaluations = 40\nseed = 7\noutput = out\n";
    let read =
        |d: &Path| ["vacuum", "maximally_mixed"].map(|s| std::fs::read(d.join(format!("out/sweep_{s}.csv"))).unwrap());
    assert!(run_sweep(dir.path(), config).status.success());
    let first = read(dir.path());
    assert!(run_sweep(dir.path(), config).status.success());
    assert_eq!(first, read(dir.path()));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for config in [
        "dim = 2\nstate = mixed\nchannel = depolarizing\nmeasures = TER\ncolour = blue\n",
        "dim = 2\nstate = mixed\nchannel = depolarizing\nmeasures =\n",
        "dim = 2\nstate = mixed\nchannel = depolarizing\nmeasures = TER\ngamma_t_points = 1\n",
    ] {
        let out = run_sweep(dir.path(), config);
        assert_eq!(out.status.code(), Some(2), "{config}");
        assert!(!dir.path().join("chronocorr-out").exists());
    }
    let out = bin().args(["measure", "ter", "--dim", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn measure_and_pdo_commands() {
    let out = bin()
        .args(["measure", "ter", "--dim", "2", "--gamma-t", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let line = String::from_utf8(out.stdout).unwrap();
    let v: f64 = line.trim().strip_prefix("TER ").unwrap().parse().unwrap();
    assert!((v - 0.5).abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = bin()
        .args(["pdo", "mixed", "identity", "--dim", "2", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = json.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    // SWAP / 2
    let re = |i: usize, j: usize| rows[i][j][0].as_f64().unwrap();
    assert!((re(1, 2) - 0.5).abs() < 1e-12);
    assert!((re(0, 0) - 0.5).abs() < 1e-12);
    assert!(re(1, 1).abs() < 1e-12);
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let out = run_sweep(
        dir.path(),
        "dim = 2\nstate = mixed\nchannel = depolarizing\nmeasures = TER\ngamma_t_points = 3\noutput = blocker/sub\n",
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blocker"));
}
