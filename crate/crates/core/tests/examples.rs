mod csi_io {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/csi_io.rs"));
}

#[test]
fn csi_io_runs() {
    csi_io::run_example().expect("csi_io example");
}

mod preprocess {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/preprocess.rs"));
}

#[test]
fn preprocess_runs() {
    preprocess::run_example().expect("preprocess example");
}

mod correlation_selection {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/correlation_selection.rs"));
}

#[test]
fn correlation_selection_runs() {
    correlation_selection::run_example().expect("correlation_selection example");
}

mod pca_extraction {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/pca_extraction.rs"));
}

#[test]
fn pca_extraction_runs() {
    pca_extraction::run_example().expect("pca_extraction example");
}

mod cycle_counting {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/cycle_counting.rs"));
}

#[test]
fn cycle_counting_runs() {
    cycle_counting::run_example().expect("cycle_counting example");
}

mod evaluation_report {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/evaluation_report.rs"));
}

#[test]
fn evaluation_report_runs() {
    evaluation_report::run_example().expect("evaluation_report example");
}

mod synth_suite {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/synth_suite.rs"));
}

#[test]
fn synth_suite_runs() {
    synth_suite::run_example().expect("synth_suite example");
}

mod end_to_end {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/end_to_end.rs"));
}

#[test]
fn end_to_end_runs() {
    end_to_end::run_example().expect("end_to_end example");
}

mod spectrogram {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/spectrogram.rs"));
}

#[test]
fn spectrogram_runs() {
    spectrogram::run_example().expect("spectrogram example");
}

mod command_line {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/command_line.rs"));
}

#[test]
fn command_line_runs() {
    command_line::run_example().expect("command_line example");
}
