//! Builds the crossing goal model by attaching uncertainty, promoting
//! adaptive tasks and refining them with MAPE tasks, then prints it.

use std::collections::BTreeMap;

use redapt::agm::{derive_hrcs_model, validate_model, Satisfaction};

fn main() {
    let (model, ids) = derive_hrcs_model().expect("derivation succeeds");
    let breaches = validate_model(&model);
    println!("{} nodes, {} breaches", model.nodes.len(), breaches.len());
    for ag in [ids.ag1, ids.ag2, ids.ag3] {
        let node = model.node(ag).unwrap();
        println!("{ag} ({:?}) {}: {:?}", node.kind, node.name, model.children_of(ag));
    }

    // Every leaf satisfied except the analyzer of the first adaptive goal.
    let status: BTreeMap<String, Satisfaction> = model
        .leaves()
        .into_iter()
        .map(|l| (l.to_string(), if l == "A1" { Satisfaction::Viol } else { Satisfaction::Sat }))
        .collect();
    let labels = model.propagate_satisfaction(&status).unwrap();
    println!("root {:?} with A1 violated", labels[ids.root]);

    println!("{}", model.to_json());
}
