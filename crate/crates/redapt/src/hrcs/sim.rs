//! Discrete-event model of the crossing.
//!
//! Vehicles enter at either end of the highway, drive to the crossing at
//! its midpoint and queue there while the gate is down. A queue drains at
//! `discharge_rate` once the gate reopens; a vehicle that finds the gate
//! open and nobody waiting drives straight through. Trains arrive every
//! `t_dispatch` minutes and are detected `warn_lead_time` seconds ahead;
//! the gate closes `t_close` seconds after detection and reopens `t_open`
//! seconds after the train has cleared.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{t_close_in_domain, t_open_in_domain, ConfigError, ScenarioConfig};
use super::sensors::{flow_slots, light_slots, slot_direction, SensorBank};
use super::utility::{LIGHT_THRESHOLD, LIT_TIMING};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    North,
    South,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::North, Direction::South];

    fn index(self) -> usize {
        match self {
            Direction::North => 0,
            Direction::South => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateState {
    Open,
    Closed,
}

impl GateState {
    pub fn as_str(self) -> &'static str {
        match self {
            GateState::Open => "open",
            GateState::Closed => "closed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleRecord {
    pub id: u64,
    pub direction: Direction,
    pub entry_time: f64,
    pub exit_time: Option<f64>,
}

impl VehicleRecord {
    pub fn driving_time(&self) -> Option<f64> {
        self.exit_time.map(|x| x - self.entry_time)
    }
}

/// One sampled row of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    pub e: f64,
    pub n: u64,
    pub gate: GateState,
    /// Readings of the flow slots, in slot order.
    pub f: Vec<Option<f64>>,
    pub t_dispatch: f64,
    pub t_close: f64,
    pub t_open: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub slots: Vec<String>,
    pub rows: Vec<TraceRow>,
    pub vehicles: Vec<VehicleRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub t_dispatch: f64,
    pub t_close: f64,
    pub t_open: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EffectorCommand {
    SetDispatch { t_dispatch: f64 },
    SetGateTimings { t_close: f64, t_open: f64 },
    ReplaceSensor { slot: String, instance: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("effector rejected: {0}")]
pub struct EffectorError(pub String);

/// Train headways the dispatcher accepts, in minutes.
pub const DISPATCH_RANGE: (f64, f64) = (3.0, 30.0);

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    Arrival(Direction),
    ReachGate(u64),
    Discharge { dir: Direction, epoch: u64 },
    Exit(u64),
    TrainDetect { epoch: u64 },
    GateClose,
    TrainArrive { t_open: f64 },
    TrainClear { t_open: f64 },
    GateOpen,
    Light,
}

#[derive(Debug, Clone, Copy)]
struct Scheduled {
    time: f64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // Reversed: BinaryHeap pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: ScenarioConfig,
    now: f64,
    seq: u64,
    events: BinaryHeap<Scheduled>,
    arrival_rng: [ChaCha8Rng; 2],
    vehicles: Vec<VehicleRecord>,
    queues: [VecDeque<u64>; 2],
    serving: [bool; 2],
    closures: u32,
    gate_epoch: u64,
    train_epoch: u64,
    detect_pending: bool,
    last_train: f64,
    occupancy: u64,
    params: GateParams,
    sensors: SensorBank,
    slots: Vec<String>,
    rows: Vec<TraceRow>,
    next_sample: f64,
}

impl Simulator {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let mut sim = Simulator {
            cfg: cfg.clone(),
            now: 0.0,
            seq: 0,
            events: BinaryHeap::new(),
            arrival_rng: [
                ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(2)),
                ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(2).wrapping_add(1)),
            ],
            vehicles: Vec::new(),
            queues: [VecDeque::new(), VecDeque::new()],
            serving: [false; 2],
            closures: 0,
            gate_epoch: 0,
            train_epoch: 0,
            detect_pending: true,
            last_train: 0.0,
            occupancy: 0,
            params: GateParams {
                t_dispatch: cfg.t_dispatch,
                t_close: cfg.t_close,
                t_open: cfg.t_open,
            },
            sensors: SensorBank::new(cfg),
            slots: flow_slots(cfg),
            rows: Vec::new(),
            next_sample: 0.0,
        };
        sim.enforce_lit_timing();
        for dir in Direction::BOTH {
            sim.schedule_arrival(dir);
        }
        sim.schedule(cfg.t_dispatch * 60.0 - cfg.warn_lead_time, Event::TrainDetect { epoch: 0 });
        for step in cfg.illuminance_profile.iter().filter(|s| s.from > 0.0) {
            sim.schedule(step.from * 60.0, Event::Light);
        }
        Ok(sim)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn params(&self) -> GateParams {
        self.params
    }

    pub fn illuminance(&self) -> f64 {
        self.cfg.illuminance_at(self.now)
    }

    pub fn occupancy(&self) -> u64 {
        self.occupancy
    }

    pub fn gate(&self) -> GateState {
        if self.closures > 0 {
            GateState::Closed
        } else {
            GateState::Open
        }
    }

    pub fn sensors(&self) -> &SensorBank {
        &self.sensors
    }

    pub fn vehicles(&self) -> &[VehicleRecord] {
        &self.vehicles
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    fn lit(&self) -> bool {
        self.illuminance() > LIGHT_THRESHOLD
    }

    /// While lit, the gate runs the fixed 4 s / 4 s timing.
    fn enforce_lit_timing(&mut self) {
        if self.lit() {
            self.params.t_close = LIT_TIMING;
            self.params.t_open = LIT_TIMING;
        }
    }

    fn schedule(&mut self, time: f64, event: Event) {
        self.seq += 1;
        self.events.push(Scheduled {
            time,
            seq: self.seq,
            event,
        });
    }

    fn schedule_arrival(&mut self, dir: Direction) {
        let rate = match dir {
            Direction::North => self.cfg.lambda_north,
            Direction::South => self.cfg.lambda_south,
        } / 60.0;
        if rate <= 0.0 {
            return;
        }
        let exp = Exp::new(rate).expect("positive rate");
        let gap = exp.sample(&mut self.arrival_rng[dir.index()]);
        self.schedule(self.now + gap, Event::Arrival(dir));
    }

    /// True value a sensor on `slot` observes now.
    fn truth(&self, slot: &str) -> Option<f64> {
        if slot.starts_with("e_") {
            return light_slots(&self.cfg)
                .iter()
                .any(|s| s == slot)
                .then(|| self.illuminance());
        }
        slot_direction(&self.cfg, slot).map(|d| match d {
            Direction::North => self.cfg.lambda_north,
            Direction::South => self.cfg.lambda_south,
        })
    }

    /// Reads `instance` as a sensor on `slot`. `Err` when the instance
    /// cannot serve that slot.
    pub fn gauge(&mut self, instance: &str, slot: &str) -> Result<Option<f64>, String> {
        let truth = self
            .truth(slot)
            .ok_or_else(|| format!("no probe for `{slot}`"))?;
        if !self.sensors.serves(instance, slot) {
            return Err(format!("`{instance}` is not bound to `{slot}`"));
        }
        Ok(self.sensors.read(instance, truth, self.now))
    }

    /// Readings of every active flow sensor, in slot order.
    pub fn sample_sensors(&mut self) -> Vec<(String, String, Option<f64>)> {
        let mut out = Vec::new();
        for slot in self.slots.clone() {
            let inst = self.sensors.pool().active[&slot].clone();
            let v = self.gauge(&inst, &slot).expect("active sensors serve their slot");
            out.push((inst, slot, v));
        }
        out
    }

    pub fn apply_effector(&mut self, cmd: &EffectorCommand) -> Result<(), EffectorError> {
        let reject = |m: String| Err(EffectorError(m));
        match cmd {
            EffectorCommand::SetDispatch { t_dispatch } => {
                let v = *t_dispatch;
                if !(DISPATCH_RANGE.0..=DISPATCH_RANGE.1).contains(&v) {
                    return reject(format!("t_dispatch = {v} min is outside [3, 30]"));
                }
                let closed = self.cfg.closed_duration(self.params.t_close, self.params.t_open);
                if v * 60.0 <= closed {
                    return reject(format!("t_dispatch = {v} min leaves no open window"));
                }
                self.params.t_dispatch = v;
                if self.detect_pending {
                    self.train_epoch += 1;
                    let at = (self.last_train + v * 60.0 - self.cfg.warn_lead_time).max(self.now);
                    self.schedule(at, Event::TrainDetect { epoch: self.train_epoch });
                }
                Ok(())
            }
            EffectorCommand::SetGateTimings { t_close, t_open } => {
                let (c, o) = (*t_close, *t_open);
                if self.lit() {
                    if c != LIT_TIMING || o != LIT_TIMING {
                        return reject("the lit crossing runs the 4 s / 4 s timing".into());
                    }
                } else if !t_close_in_domain(c) || !t_open_in_domain(o) {
                    return reject(format!("timing ({c}, {o}) is outside (1, 4] x [4, 7)"));
                }
                if self.params.t_dispatch * 60.0 <= self.cfg.closed_duration(c, o) {
                    return reject(format!("timing ({c}, {o}) leaves no open window"));
                }
                self.params.t_close = c;
                self.params.t_open = o;
                Ok(())
            }
            EffectorCommand::ReplaceSensor { slot, instance } => {
                self.sensors.rebind(slot, instance).map_err(EffectorError)
            }
        }
    }

    fn record_row(&mut self, time: f64) {
        let saved = self.now;
        self.now = time;
        let f = self.sample_sensors().into_iter().map(|(_, _, v)| v).collect();
        self.rows.push(TraceRow {
            time,
            e: self.illuminance(),
            n: self.occupancy,
            gate: self.gate(),
            f,
            t_dispatch: self.params.t_dispatch,
            t_close: self.params.t_close,
            t_open: self.params.t_open,
        });
        self.now = saved;
    }

    /// Processes every event up to and including `t` and records the
    /// sample rows that fall in between.
    pub fn advance_to(&mut self, t: f64) {
        loop {
            let next_event = self.events.peek().map(|s| s.time).filter(|&te| te <= t);
            let sample_due = self.next_sample <= t;
            match (next_event, sample_due) {
                (Some(te), true) if te <= self.next_sample => self.step(),
                (Some(_), false) => self.step(),
                (_, true) => {
                    let ts = self.next_sample;
                    self.now = self.now.max(ts);
                    self.record_row(ts);
                    self.next_sample += self.cfg.sample_period;
                }
                (None, false) => break,
            }
        }
        self.now = self.now.max(t);
    }

    fn step(&mut self) {
        let Some(Scheduled { time, event, .. }) = self.events.pop() else {
            return;
        };
        self.now = time;
        let half = self.cfg.half_travel_time();
        let service = 1.0 / self.cfg.discharge_rate;
        match event {
            Event::Arrival(dir) => {
                let id = self.vehicles.len() as u64;
                self.vehicles.push(VehicleRecord {
                    id,
                    direction: dir,
                    entry_time: time,
                    exit_time: None,
                });
                self.occupancy += 1;
                self.schedule(time + half, Event::ReachGate(id));
                self.schedule_arrival(dir);
            }
            Event::ReachGate(id) => {
                let d = self.vehicles[id as usize].direction.index();
                let open = self.closures == 0;
                if open && self.queues[d].is_empty() && !self.serving[d] {
                    self.schedule(time + half, Event::Exit(id));
                } else {
                    self.queues[d].push_back(id);
                    if open && !self.serving[d] {
                        self.serving[d] = true;
                        let dir = self.vehicles[id as usize].direction;
                        let epoch = self.gate_epoch;
                        self.schedule(time + service, Event::Discharge { dir, epoch });
                    }
                }
            }
            Event::Discharge { dir, epoch } => {
                if epoch != self.gate_epoch {
                    return;
                }
                let d = dir.index();
                if let Some(id) = self.queues[d].pop_front() {
                    self.schedule(time + half, Event::Exit(id));
                }
                if self.queues[d].is_empty() {
                    self.serving[d] = false;
                } else {
                    self.schedule(time + service, Event::Discharge { dir, epoch });
                }
            }
            Event::Exit(id) => {
                self.vehicles[id as usize].exit_time = Some(time);
                self.occupancy -= 1;
            }
            Event::TrainDetect { epoch } => {
                if epoch != self.train_epoch {
                    return;
                }
                self.detect_pending = false;
                let GateParams { t_close, t_open, .. } = self.params;
                self.schedule(time + t_close, Event::GateClose);
                self.schedule(time + self.cfg.warn_lead_time, Event::TrainArrive { t_open });
            }
            Event::GateClose => {
                self.closures += 1;
                self.gate_epoch += 1;
                self.serving = [false; 2];
            }
            Event::TrainArrive { t_open } => {
                self.last_train = time;
                self.schedule(time + self.cfg.train_pass_time, Event::TrainClear { t_open });
                self.detect_pending = true;
                let next = time + self.params.t_dispatch * 60.0 - self.cfg.warn_lead_time;
                self.schedule(next, Event::TrainDetect { epoch: self.train_epoch });
            }
            Event::TrainClear { t_open } => {
                self.schedule(time + t_open, Event::GateOpen);
            }
            Event::GateOpen => {
                self.closures = self.closures.saturating_sub(1);
                self.gate_epoch += 1;
                if self.closures == 0 {
                    for dir in Direction::BOTH {
                        let d = dir.index();
                        if !self.queues[d].is_empty() {
                            self.serving[d] = true;
                            let epoch = self.gate_epoch;
                            self.schedule(time + service, Event::Discharge { dir, epoch });
                        }
                    }
                }
            }
            Event::Light => self.enforce_lit_timing(),
        }
    }

    /// Runs to the end of the scenario and returns everything recorded.
    pub fn finish(mut self) -> SimTrace {
        self.advance_to(self.cfg.duration * 60.0);
        SimTrace {
            slots: self.slots,
            rows: self.rows,
            vehicles: self.vehicles,
        }
    }
}

/// Simulates `cfg` without any adaptation.
pub fn simulate(cfg: &ScenarioConfig) -> Result<SimTrace, ConfigError> {
    Ok(Simulator::new(cfg)?.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet(lambda: f64) -> ScenarioConfig {
        ScenarioConfig {
            lambda_north: lambda,
            lambda_south: lambda,
            duration: 30.0,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn empty_highway_stays_empty() {
        let t = simulate(&quiet(0.0)).unwrap();
        assert!(t.vehicles.is_empty());
        assert!(t.rows.iter().all(|r| r.n == 0));
        assert_eq!(t.rows.len(), 181);
    }

    #[test]
    fn free_flow_takes_two_hundred_seconds() {
        let t = simulate(&quiet(2.0)).unwrap();
        let mut free = 0;
        for v in &t.vehicles {
            if let Some(d) = v.driving_time() {
                assert!(d >= 200.0 - 1e-9, "{d}");
                if (d - 200.0).abs() < 1e-9 {
                    free += 1;
                }
            }
        }
        assert!(free > 0);
    }

    #[test]
    fn gate_cycle_timing() {
        let cfg = quiet(0.0);
        let mut sim = Simulator::new(&cfg).unwrap();
        // First train arrives at 300 s; detection at 290, closure at 294,
        // clear at 450, reopening at 454.
        sim.advance_to(293.9);
        assert_eq!(sim.gate(), GateState::Open);
        sim.advance_to(294.0);
        assert_eq!(sim.gate(), GateState::Closed);
        sim.advance_to(453.9);
        assert_eq!(sim.gate(), GateState::Closed);
        sim.advance_to(454.0);
        assert_eq!(sim.gate(), GateState::Open);
    }

    #[test]
    fn dispatch_change_reschedules_next_train() {
        let mut sim = Simulator::new(&quiet(0.0)).unwrap();
        sim.advance_to(400.0);
        sim.apply_effector(&EffectorCommand::SetDispatch { t_dispatch: 6.0 })
            .unwrap();
        // Previous train at 300 s, so the next one arrives at 660 s.
        sim.advance_to(653.9);
        assert_eq!(sim.gate(), GateState::Open);
        sim.advance_to(654.0);
        assert_eq!(sim.gate(), GateState::Closed);
    }

    #[test]
    fn lit_crossing_forces_lit_timing() {
        let mut sim = Simulator::new(&ScenarioConfig {
            t_close: 2.0,
            t_open: 6.0,
            ..quiet(0.0)
        })
        .unwrap();
        assert_eq!((sim.params().t_close, sim.params().t_open), (4.0, 4.0));
        let err = sim
            .apply_effector(&EffectorCommand::SetGateTimings {
                t_close: 2.0,
                t_open: 6.0,
            })
            .unwrap_err();
        assert!(err.0.contains("lit"));
    }

    #[test]
    fn vehicles_are_conserved() {
        let cfg = quiet(20.0);
        let mut sim = Simulator::new(&cfg).unwrap();
        for k in 1..=30 {
            sim.advance_to(f64::from(k) * 60.0);
            let done = sim.vehicles().iter().filter(|v| v.exit_time.is_some()).count() as u64;
            assert_eq!(sim.vehicles().len() as u64, done + sim.occupancy());
        }
    }

    #[test]
    fn same_seed_same_run() {
        let a = simulate(&quiet(12.0)).unwrap();
        let b = simulate(&quiet(12.0)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&ScenarioConfig { seed: 2, ..quiet(12.0) }).unwrap();
        assert_ne!(a.vehicles, c.vehicles);
    }
}
