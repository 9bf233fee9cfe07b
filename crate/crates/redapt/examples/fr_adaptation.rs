//! Overloads the highway and lets the engine lengthen the dispatch
//! interval until vehicles pass in time again.

use redapt::engine::EngineConfig;
use redapt::hrcs::{compute_metrics, run_adaptive, scenario, simulate};
use redapt::spec::{parse_document, HRCS_SPEC};

fn main() {
    let doc = parse_document(HRCS_SPEC).unwrap();
    let sc = scenario("experiment2").unwrap();
    let fixed = compute_metrics(&simulate(&sc).unwrap(), &sc);
    println!("static:   p {:.3}, n_peak {}", fixed.p, fixed.n_peak);

    let run = run_adaptive(&doc, &sc, &EngineConfig::default()).unwrap();
    let m = &run.summary.metrics;
    println!("adaptive: p {:.3}, n_peak {}", m.p, m.n_peak);
    println!(
        "{} parametric adaptations, final {:?}",
        run.summary.parametric_adaptations, run.summary.final_parameters
    );
}
