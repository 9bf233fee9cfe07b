//! A flow sensor fails, another turns noisy; the engine swaps each for a
//! standby unit.

use redapt::engine::{Decision, EngineConfig};
use redapt::hrcs::{run_adaptive, scenario};
use redapt::spec::{parse_document, HRCS_SPEC};

fn main() {
    let doc = parse_document(HRCS_SPEC).unwrap();
    for name in ["sensor_failure", "sensor_noise"] {
        let sc = scenario(name).unwrap();
        let run = run_adaptive(&doc, &sc, &EngineConfig::default()).unwrap();
        for r in &run.reports {
            for (goal, d) in &r.reconfiguration {
                if let Decision::Structural { slot, replacement } = d {
                    let why = r.violation.get(goal).map(|v| v.to_string()).unwrap_or_default();
                    println!("{name} t={}s {why}: {slot} -> {replacement}", r.sim_time);
                }
            }
        }
        println!("{name}: active sensors {:?}", run.summary.active_sensors);
    }
}
