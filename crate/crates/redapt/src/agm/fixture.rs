//! The highway-rail crossing goal model, built step by step from the
//! adaptive-task model through the MAPE refinements.

use super::{
    DecompositionMode, GoalModel, GoalNode, Polarity, Result, UncertaintySource, ViolationKind,
};

/// Ids of the elements the derivation creates. Promotion keeps ids, so
/// the adaptive goals carry the ids of the tasks they were promoted from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HrcsModelIds {
    pub root: &'static str,
    pub ag1: &'static str,
    pub ag2: &'static str,
    pub ag3: &'static str,
    pub ag1_mape: [&'static str; 4],
    pub ag2_mape: [&'static str; 4],
    pub ag3_mape: [&'static str; 4],
}

pub const HRCS_IDS: HrcsModelIds = HrcsModelIds {
    root: "g1",
    ag1: "At1",
    ag2: "At2",
    ag3: "M1",
    ag1_mape: ["M1", "A1", "P1", "E1"],
    ag2_mape: ["M2", "A2", "P2", "E2"],
    ag3_mape: ["M3", "A3", "P3", "E3"],
};

/// The goal model with adaptive tasks, before any uncertainty is attached.
pub fn hrcs_initial_model() -> Result<GoalModel> {
    GoalModel::new()
        .add_node(GoalNode::goal("g1", "Control Highway-Rail Crossing"))?
        .add_node(
            GoalNode::adaptive_task("At1", "Determine t_dispatch to make p > 50% and n < 350")
                .with_agent("Train Dispatch End"),
        )?
        .add_node(
            GoalNode::adaptive_task("At2", "Determine t_close and t_open for safety efficiency")
                .with_agent("Gate Control End"),
        )?
        .add_node(GoalNode::softgoal("sg2", "Maintain Safety Efficiency"))?
        .add_node(GoalNode::softgoal("sg3", "Maintain Pass Efficiency"))?
        .decompose("g1", &["At1", "At2"], DecompositionMode::And)?
        .contribute("At2", "sg2", Polarity::Help)?
        .contribute("At2", "sg3", Polarity::Hurt)?
        .with_root("g1")
}

/// Runs the scripted derivation: attach context uncertainty, promote,
/// refine with MAPE, then repeat for the components uncertainty of the
/// flow monitor.
pub fn derive_hrcs_model() -> Result<(GoalModel, HrcsModelIds)> {
    let ids = HRCS_IDS;
    let conu1 = UncertaintySource::context("ConU1", "Vehicle Flow", ViolationKind::Fr);
    let conu2 = UncertaintySource::context("ConU2", "Illuminance", ViolationKind::Nfr);
    let comu1 = UncertaintySource::components("ComU1", "Sensor Failure", ViolationKind::Fr);
    let comu2 = UncertaintySource::components("ComU2", "Sensor Noise", ViolationKind::Nfr);

    let model = hrcs_initial_model()?
        .attach_uncertainty(&conu1, ids.ag1)?
        .attach_uncertainty(&conu2, ids.ag2)?
        .promote_to_adaptive_goal(ids.ag1)?
        .promote_to_adaptive_goal(ids.ag2)?
        .refine_with_mape(
            ids.ag1,
            [
                ("M1", "Gauge f_i by Infrared Sensors"),
                ("A1", "Verify p > 50% and n < 350 at runtime"),
                ("P1", "Decide t_dispatch to hold p > 50% and n < 350"),
                ("E1", "Dispatch Train According to t_dispatch"),
            ],
        )?
        .refine_with_mape(
            ids.ag2,
            [
                ("M2", "Gauge e_i by Illuminance Sensors"),
                ("A2", "Verify U_safety at runtime"),
                ("P2", "Decide t_close and t_open"),
                ("E2", "Apply Gate Timings"),
            ],
        )?;

    let model = model.attach_uncertainty(&comu1, ids.ag3)?;
    let mut model = model.attach_uncertainty(&comu2, ids.ag3)?;
    if let Some(m1) = model.nodes.iter_mut().find(|n| n.id == ids.ag3) {
        m1.agent = Some("Infrared Sensors".into());
    }
    let model = model.promote_to_adaptive_goal(ids.ag3)?.refine_with_mape(
        ids.ag3,
        [
            ("M3", "Gauge Sensor Health"),
            ("A3", "Diagnose Sensor Faults"),
            ("P3", "Select Standby Sensor"),
            ("E3", "Rebind Sensor Slot"),
        ],
    )?;
    Ok((model, ids))
}
