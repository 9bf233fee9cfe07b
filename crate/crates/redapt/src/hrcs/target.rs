use std::collections::{BTreeMap, BTreeSet};

use super::config::{IlluminanceStep, ScenarioConfig};
use super::metrics::spec_trace;
use super::sensors::{flow_slots, light_slots, slot_direction};
use super::sim::{simulate, Direction, EffectorCommand, Simulator, DISPATCH_RANGE};
use crate::engine::{
    ComponentPool, EngineError, ManagedSystem, ParamDomain, ProbeEffectorContract, Reading,
};
use crate::spec::Trace;

/// The crossing simulator seen through the adaptation engine's probes and
/// effectors.
#[derive(Debug, Clone)]
pub struct HrcsSystem {
    sim: Simulator,
    /// Predicted traces keyed by their inputs.
    cache: BTreeMap<String, Trace>,
}

impl HrcsSystem {
    pub fn new(sim: Simulator) -> Self {
        HrcsSystem {
            sim,
            cache: BTreeMap::new(),
        }
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn simulator_mut(&mut self) -> &mut Simulator {
        &mut self.sim
    }

    pub fn into_simulator(self) -> Simulator {
        self.sim
    }

    /// The configuration simulated to predict behavior under `params` when
    /// flows `(north, south)` and illuminance `e` are observed.
    pub fn prediction_config(&self, params: &BTreeMap<String, f64>, flows: (f64, f64), e: f64) -> ScenarioConfig {
        let base = self.sim.config();
        let current = self.sim.params();
        ScenarioConfig {
            name: format!("{}-prediction", base.name),
            lambda_north: flows.0,
            lambda_south: flows.1,
            t_dispatch: params.get("t_dispatch").copied().unwrap_or(current.t_dispatch),
            t_close: params.get("t_close").copied().unwrap_or(current.t_close),
            t_open: params.get("t_open").copied().unwrap_or(current.t_open),
            duration: base.verify_horizon,
            illuminance_profile: vec![IlluminanceStep { from: 0.0, lux: e }],
            sensor_faults: Vec::new(),
            sample_period: 60.0,
            ..base.clone()
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl ManagedSystem for HrcsSystem {
    fn contract(&self) -> ProbeEffectorContract {
        let cfg = self.sim.config();
        let pool = self.sim.sensors().pool();
        let mut probes = BTreeSet::new();
        for slot in flow_slots(cfg).into_iter().chain(light_slots(cfg)) {
            let serving = pool
                .active
                .get(&slot)
                .into_iter()
                .chain(pool.standby.get(&slot).into_iter().flatten());
            for inst in serving {
                probes.insert((inst.clone(), slot.clone()));
            }
        }
        ProbeEffectorContract {
            probes,
            parameters: ["t_dispatch", "t_close", "t_open"]
                .into_iter()
                .map(String::from)
                .collect(),
            slots: pool.active.keys().cloned().collect(),
        }
    }

    fn now(&self) -> f64 {
        self.sim.now()
    }

    fn gauge(&mut self, instance: &str, variable: &str) -> Result<Option<f64>, EngineError> {
        self.sim
            .gauge(instance, variable)
            .map_err(EngineError::ContractViolation)
    }

    fn parameters(&self) -> BTreeMap<String, f64> {
        let p = self.sim.params();
        BTreeMap::from([
            ("t_dispatch".to_string(), p.t_dispatch),
            ("t_close".to_string(), p.t_close),
            ("t_open".to_string(), p.t_open),
        ])
    }

    fn parameter_domain(&self, name: &str) -> Option<ParamDomain> {
        match name {
            "t_dispatch" => Some(ParamDomain::closed(DISPATCH_RANGE.0, DISPATCH_RANGE.1)),
            "t_close" => Some(ParamDomain {
                lo: 1.0,
                hi: 4.0,
                lo_open: true,
                hi_open: false,
            }),
            "t_open" => Some(ParamDomain {
                lo: 4.0,
                hi: 7.0,
                lo_open: false,
                hi_open: true,
            }),
            _ => None,
        }
    }

    fn set_parameter(&mut self, name: &str, value: f64) -> Result<(), String> {
        let p = self.sim.params();
        let cmd = match name {
            "t_dispatch" => EffectorCommand::SetDispatch { t_dispatch: value },
            "t_close" => EffectorCommand::SetGateTimings {
                t_close: value,
                t_open: p.t_open,
            },
            "t_open" => EffectorCommand::SetGateTimings {
                t_close: p.t_close,
                t_open: value,
            },
            other => return Err(format!("no effector for `{other}`")),
        };
        self.sim.apply_effector(&cmd).map_err(|e| e.to_string())
    }

    fn rebind(&mut self, slot: &str, instance: &str) -> Result<(), String> {
        self.sim
            .apply_effector(&EffectorCommand::ReplaceSensor {
                slot: slot.to_string(),
                instance: instance.to_string(),
            })
            .map_err(|e| e.to_string())
    }

    fn component_pool(&self) -> ComponentPool {
        self.sim.sensors().pool().clone()
    }

    /// Simulates the observed flows and illuminance under `params` from an
    /// empty highway for `verify_horizon` minutes.
    fn verification_trace(
        &mut self,
        params: &BTreeMap<String, f64>,
        readings: &[Reading],
    ) -> Result<Trace, EngineError> {
        let cfg = self.sim.config();
        let flow = |dir: Direction| {
            mean(
                readings
                    .iter()
                    .filter(|r| slot_direction(cfg, &r.variable) == Some(dir))
                    .filter_map(|r| r.value),
            )
        };
        let north = flow(Direction::North)
            .ok_or_else(|| EngineError::Target("no flow reading for the north entrance".into()))?;
        let south = flow(Direction::South)
            .ok_or_else(|| EngineError::Target("no flow reading for the south entrance".into()))?;
        let e = mean(
            readings
                .iter()
                .filter(|r| r.variable.starts_with("e_"))
                .filter_map(|r| r.value),
        )
        .ok_or_else(|| EngineError::Target("no illuminance reading".into()))?;
        // Noisy readings can dip below zero.
        let (north, south, e) = (north.max(0.0), south.max(0.0), e.max(0.0));
        let pcfg = self.prediction_config(params, (north, south), e);
        let key = format!(
            "{north:.6}|{south:.6}|{e:.6}|{}|{}|{}",
            pcfg.t_dispatch, pcfg.t_close, pcfg.t_open
        );
        if let Some(t) = self.cache.get(&key) {
            return Ok(t.clone());
        }
        let run = simulate(&pcfg).map_err(|e| EngineError::Target(e.to_string()))?;
        let trace = spec_trace(&run, pcfg.p_time_threshold);
        self.cache.insert(key, trace.clone());
        Ok(trace)
    }
}
