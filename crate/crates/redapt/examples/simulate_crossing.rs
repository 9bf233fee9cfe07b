//! Runs the crossing without adaptation and prints its traffic metrics
//! for several dispatch intervals.

use redapt::hrcs::{compute_metrics, scenario, simulate};

fn main() {
    let base = scenario("experiment2").unwrap();
    println!("t_dispatch  p_north  p_south  n_peak");
    for t in 3..=8 {
        let mut cfg = base.clone();
        cfg.t_dispatch = f64::from(t);
        let m = compute_metrics(&simulate(&cfg).unwrap(), &cfg);
        println!("{t:>10}  {:>7.3}  {:>7.3}  {:>6}", m.p_north, m.p_south, m.n_peak);
    }
}
