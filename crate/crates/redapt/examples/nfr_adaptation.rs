//! Darkens the crossing three times and shows the engine retuning the
//! gate timings each time the safety utility drops.

use redapt::engine::{Decision, EngineConfig};
use redapt::hrcs::{eval_utilities, run_adaptive, scenario};
use redapt::spec::{parse_document, HRCS_SPEC};

fn main() {
    let doc = parse_document(HRCS_SPEC).unwrap();
    let sc = scenario("nfr_dark").unwrap();
    let run = run_adaptive(&doc, &sc, &EngineConfig::default()).unwrap();
    for r in &run.reports {
        for (goal, d) in &r.reconfiguration {
            if let Decision::Parametric { values } = d {
                let (c, o) = (values["t_close"], values["t_open"]);
                let u = eval_utilities(c, o, 10.0).unwrap();
                println!(
                    "t={:>5}s {goal}: t_close {c}, t_open {o}, U_safety {:.4} after {} iterations",
                    r.sim_time, u.u_safety, r.plan_iterations
                );
            }
        }
    }
}
