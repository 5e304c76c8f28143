// Drive the `wifi-resp` command line in-process: synthesize a small
// dataset, process it and rebuild the report tables from the per-record
// reports.

use std::error::Error;

use wifi_respiration::cli::{main_with_args, EXIT_OK, EXIT_USAGE};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let data = dir.path().join("data");
    let results = dir.path().join("results");
    let tables = dir.path().join("tables");
    let p = |path: &std::path::Path| path.to_string_lossy().into_owned();

    let code = main_with_args([
        "wifi-resp", "synth", "--seed", "1", "--subjects", "1", "--postures", "supine", "--duration", "90",
        "--out", &p(&data),
    ]);
    assert_eq!(code, EXIT_OK);

    let code = main_with_args(["wifi-resp", "run", "--dataset", &p(&data), "--format", "json", "--out", &p(&results)]);
    assert_eq!(code, EXIT_OK);

    let code = main_with_args(["wifi-resp", "report", &p(&results), "--format", "text", "--out", &p(&tables)]);
    assert_eq!(code, EXIT_OK);
    print!("{}", std::fs::read_to_string(tables.join("report.txt"))?);

    let csi = data.join("s1_supine.csi.csv");
    let code = main_with_args(["wifi-resp", "run", "--csi", &p(&csi), "--method", "correlation", "--out", &p(&results)]);
    assert_eq!(code, EXIT_USAGE);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
