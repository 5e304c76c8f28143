use std::path::Path;
use std::process::{Command, Output};

use wifi_respiration::evaluation::ReportSet;

fn wifi_resp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wifi-resp"))
        .args(args)
        .current_dir(cwd)
        .env_remove("WIFI_RESP_OUT")
        .output()
        .expect("spawn wifi-resp")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn synth_noiseless(dir: &Path) {
    let out = wifi_resp(
        &["synth", "--seed", "3", "--subjects", "1", "--postures", "supine,prone", "--duration", "120", "--noiseless", "--out", "data"],
        dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&wifi_resp(&[], dir.path())), 1);
    assert_eq!(code(&wifi_resp(&["run", "--method", "fft"], dir.path())), 1);
    assert_eq!(code(&wifi_resp(&["--jobs", "0", "synth"], dir.path())), 1);
    assert_eq!(code(&wifi_resp(&["run"], dir.path())), 1);
    assert_eq!(code(&wifi_resp(&["--help"], dir.path())), 0);
}

#[test]
fn correlation_without_reference_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    synth_noiseless(dir.path());
    let out = wifi_resp(&["run", "--csi", "data/s1_supine.csi.csv", "--method", "correlation"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--ref"));
}

#[test]
fn malformed_input_exits_2_with_file_and_row() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.csi.csv"),
        "# csi v1 kind=magnitude subcarriers=2 nominal_rate=62.5\n0.0,1,2\n0.016,1,x\n",
    )
    .unwrap();
    let out = wifi_resp(&["run", "--csi", "bad.csi.csv"], dir.path());
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.csi.csv") && err.contains("row 2"), "{err}");

    let out = wifi_resp(&["run", "--csi", "missing.csi.csv"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn noiseless_run_has_zero_mad_and_full_outputs() {
    let dir = tempfile::tempdir().unwrap();
    synth_noiseless(dir.path());
    let out = wifi_resp(&["run", "--dataset", "data", "--out", "res"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let res = dir.path().join("res");
    for name in [
        "s1_supine.waveform.csv",
        "s1_supine.epochs.csv",
        "s1_supine.extraction.json",
        "s1_supine.reference.csv",
        "s1_supine.report.json",
        "report.json",
        "report.txt",
        "histogram.csv",
        "manifest.json",
    ] {
        assert!(res.join(name).is_file(), "missing {name}");
    }
    let set = ReportSet::from_json(&std::fs::read_to_string(res.join("report.json")).unwrap()).unwrap();
    assert_eq!(set.overall.mad, 0.0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("All Postures"));

    let out = wifi_resp(&["report", "res", "--out", "tables"], dir.path());
    assert_eq!(code(&out), 0);
    let again = ReportSet::from_json(&std::fs::read_to_string(dir.path().join("tables/report.json")).unwrap()).unwrap();
    assert_eq!(again.tables, set.tables);

    let out = wifi_resp(
        &["spectrogram", "res/s1_supine.waveform.csv", "res/s1_supine.reference.csv", "--out", "spec"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("spec/s1_supine.waveform.spectrogram.csv").is_file());
    assert!(dir.path().join("spec/spectrogram.png").is_file());
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_wifi-resp"))
        .args(["synth", "--subjects", "1", "--postures", "side", "--duration", "60"])
        .current_dir(dir.path())
        .env("WIFI_RESP_OUT", "from-env")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("from-env/s1_side.csi.csv").is_file());
    assert!(dir.path().join("from-env/manifest.json").is_file());
}
