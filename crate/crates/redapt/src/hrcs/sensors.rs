use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::ScenarioConfig;
use super::sim::Direction;
use crate::engine::ComponentPool;

pub const FLOW_CLASS: &str = "I_sensor";
pub const LIGHT_CLASS: &str = "L_sensor";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensorStatus {
    Healthy,
    Noisy(f64),
    Failed,
}

/// Flow slots `f_1..f_2k` in natural order.
pub fn flow_slots(cfg: &ScenarioConfig) -> Vec<String> {
    (1..=2 * cfg.sensors_per_direction)
        .map(|k| format!("f_{k}"))
        .collect()
}

pub fn light_slots(cfg: &ScenarioConfig) -> Vec<String> {
    (1..=cfg.light_sensors).map(|k| format!("e_{k}")).collect()
}

/// The entrance a flow slot watches; `None` for other slots.
pub fn slot_direction(cfg: &ScenarioConfig, slot: &str) -> Option<Direction> {
    let k: usize = slot.strip_prefix("f_")?.parse().ok()?;
    match k {
        0 => None,
        k if k <= cfg.sensors_per_direction => Some(Direction::North),
        k if k <= 2 * cfg.sensors_per_direction => Some(Direction::South),
        _ => None,
    }
}

/// Active instance `I_sensor_k` on `f_k`, spares `I_sensor_{k + j*n}` for
/// `j = 1..=standby_per_slot` where `n` is the number of flow slots; the
/// light sensors follow the same pattern.
pub fn initial_pool(cfg: &ScenarioConfig) -> ComponentPool {
    let mut pool = ComponentPool::default();
    let groups = [
        (FLOW_CLASS, flow_slots(cfg)),
        (LIGHT_CLASS, light_slots(cfg)),
    ];
    for (class, slots) in groups {
        let n = slots.len();
        for (i, slot) in slots.into_iter().enumerate() {
            let k = i + 1;
            pool.active.insert(slot.clone(), format!("{class}_{k}"));
            let spares = (1..=cfg.standby_per_slot)
                .map(|j| format!("{class}_{}", k + j * n))
                .collect();
            pool.standby.insert(slot, spares);
        }
    }
    pool
}

fn name_seed(seed: u64, name: &str) -> u64 {
    // FNV-1a, mixed with the scenario seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Sensor instances, their slot binding and their fault schedule.
#[derive(Debug, Clone)]
pub struct SensorBank {
    cfg: ScenarioConfig,
    pool: ComponentPool,
    rngs: BTreeMap<String, ChaCha8Rng>,
}

impl SensorBank {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        SensorBank {
            cfg: cfg.clone(),
            pool: initial_pool(cfg),
            rngs: BTreeMap::new(),
        }
    }

    pub fn pool(&self) -> &ComponentPool {
        &self.pool
    }

    /// Status of `instance` at `t` seconds.
    pub fn status(&self, instance: &str, t: f64) -> SensorStatus {
        let minutes = t / 60.0;
        let mut status = SensorStatus::Healthy;
        for f in self.cfg.sensor_faults.iter().filter(|f| f.sensor_id == instance) {
            if f.fail_at.is_some_and(|at| minutes >= at) {
                return SensorStatus::Failed;
            }
            if f.noise_from.is_some_and(|at| minutes >= at) {
                status = SensorStatus::Noisy(f.noise_sigma.unwrap_or(0.0));
            }
        }
        status
    }

    /// Reads `instance` when the true value is `truth`.
    pub fn read(&mut self, instance: &str, truth: f64, t: f64) -> Option<f64> {
        match self.status(instance, t) {
            SensorStatus::Healthy => Some(truth),
            SensorStatus::Failed => None,
            SensorStatus::Noisy(sigma) => {
                let seed = self.cfg.seed;
                let rng = self
                    .rngs
                    .entry(instance.to_string())
                    .or_insert_with(|| ChaCha8Rng::seed_from_u64(name_seed(seed, instance)));
                let z: f64 = StandardNormal.sample(rng);
                Some(truth + sigma * z)
            }
        }
    }

    /// Whether `instance` may serve `slot`, actively or as a spare.
    pub fn serves(&self, instance: &str, slot: &str) -> bool {
        self.pool.active.get(slot).is_some_and(|a| a == instance)
            || self
                .pool
                .standby
                .get(slot)
                .is_some_and(|s| s.iter().any(|i| i == instance))
    }

    pub fn rebind(&mut self, slot: &str, instance: &str) -> Result<(), String> {
        self.pool = self
            .pool
            .swapped(slot, instance)
            .map_err(|e| e.to_string())?;
        Ok(())
    }
}
