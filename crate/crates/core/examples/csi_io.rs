// Build a small CSI record by hand, write it as CSV and NDJSON, and read it
// back.
//
// ```bash
// cargo run --example csi_io
// ```

use std::error::Error;

use wifi_respiration::csi_data::{
    load_csi, magnitudes, save_csi, CsiFormat, CsiFrame, CsiRecord, Posture, RecordMeta, SubcarrierValues,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let frames: Vec<CsiFrame> = (0..125)
        .map(|i| {
            let t = i as f64 / 62.5;
            let breath = (std::f64::consts::TAU * 0.25 * t).sin();
            CsiFrame {
                timestamp: t,
                values: SubcarrierValues::Magnitude(vec![30.0 + breath, 25.0 - 0.5 * breath, 28.0]),
            }
        })
        .collect();
    let meta = RecordMeta {
        subject: Some("1".into()),
        posture: Posture::Supine,
        tags: vec!["hand-made".into()],
    };
    let record = CsiRecord::new(frames, 62.5, meta)?;

    for (name, format) in [("a.csi.csv", CsiFormat::Csv), ("a.csi.ndjson", CsiFormat::Ndjson)] {
        let path = dir.path().join(name);
        save_csi(&record, &path, format)?;
        let back = load_csi(&path, CsiFormat::from_path(&path))?;
        assert_eq!(back.len(), record.len());
        assert_eq!(back.meta(), record.meta());
        println!("{name}: {} frames, {} subcarriers", back.len(), back.n_subcarriers());
    }

    let m = magnitudes(&record);
    println!("subcarrier 0 at t=1s: {:.3}", m.get(62, 0));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
