//! Writes the artifacts of an adaptive run to a temporary directory and
//! checks every goal invariant against the recorded trace.

use redapt::cli::verify_trace;
use redapt::engine::EngineConfig;
use redapt::hrcs::{run_adaptive, scenario, write_artifacts};
use redapt::spec::{parse_document, HRCS_SPEC};

fn main() {
    let doc = parse_document(HRCS_SPEC).unwrap();
    let sc = scenario("experiment1").unwrap();
    let run = run_adaptive(&doc, &sc, &EngineConfig::default()).unwrap();
    let dir = std::env::temp_dir().join("redapt-verify-example");
    write_artifacts(&dir, &run).unwrap();
    for v in verify_trace(&doc, &dir.join("trace.csv"), sc.p_time_threshold).unwrap() {
        println!("{}: {}", v.entity, v.verdict);
    }
    println!("artifacts in {}", dir.display());
}
