use std::collections::{BTreeMap, BTreeSet};

use super::{slot_key, ComponentPool, EngineConfig, EngineError, ManagedSystem, Reading};
use crate::spec::{EntityKind, SpecDocument, Sort};

/// Gauges every numeric attribute of every monitor entity through the
/// instance currently bound to the slot. A slot read by two monitors is
/// gauged once.
pub fn monitor_step(
    doc: &SpecDocument,
    target: &mut dyn ManagedSystem,
    pool: &ComponentPool,
) -> Result<Vec<Reading>, EngineError> {
    let contract = target.contract();
    let now = target.now();
    let mut slots: Vec<&String> = pool.active.keys().collect();
    slots.sort_by_key(|s| slot_key(s));

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for m in doc.entities_of(EntityKind::Monitor) {
        for attr in m.attributes_of(Sort::Numeric) {
            let covered: Vec<&&String> = slots.iter().filter(|s| attr.covers(s)).collect();
            if covered.is_empty() {
                return Err(EngineError::ContractViolation(format!(
                    "monitor `{}` declares `{}` but no component slot provides it",
                    m.name, attr.name
                )));
            }
            for slot in covered {
                if !seen.insert(slot.as_str()) {
                    continue;
                }
                let instance = &pool.active[slot.as_str()];
                if !contract
                    .probes
                    .contains(&(instance.to_string(), slot.to_string()))
                {
                    return Err(EngineError::ContractViolation(format!(
                        "no probe for `{slot}` on `{instance}`"
                    )));
                }
                let value = target.gauge(instance, slot)?;
                out.push(Reading {
                    sensor_id: instance.clone(),
                    variable: slot.to_string(),
                    value,
                    timestamp: now,
                });
            }
        }
    }
    Ok(out)
}

/// Sample standard deviation (n - 1 denominator); zero below two values.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Whether a window of readings is noisier than the threshold allows. A
/// single value is never evidence of noise.
pub fn window_is_noisy(window: &[f64], threshold: f64) -> bool {
    window.len() >= 2 && sample_std(window) > threshold
}

/// Per sensor: does the last `noise_window` present readings' spread
/// exceed the configured threshold?
pub fn detect_noise(
    history: &BTreeMap<String, Vec<Reading>>,
    cfg: &EngineConfig,
) -> BTreeMap<String, bool> {
    history
        .iter()
        .map(|(sensor, readings)| {
            let values: Vec<f64> = readings.iter().filter_map(|r| r.value).collect();
            let start = values.len().saturating_sub(cfg.noise_window);
            (
                sensor.clone(),
                window_is_noisy(&values[start..], cfg.noise_std_threshold),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn readings(values: &[f64]) -> Vec<Reading> {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| Reading {
                sensor_id: "s".into(),
                variable: "f_1".into(),
                value: Some(*v),
                timestamp: i as f64,
            })
            .collect()
    }

    #[test]
    fn constant_window_is_quiet() {
        let h = BTreeMap::from([("s".to_string(), readings(&[5.0; 5]))]);
        assert!(!detect_noise(&h, &EngineConfig::default())["s"]);
    }

    #[test]
    fn alternating_window_is_noisy() {
        let w = [5.0, 50.0, 5.0, 50.0, 5.0];
        // mean 23, squared deviations 3 * 324 + 2 * 729 = 2430, / 4
        let expected = (2430.0f64 / 4.0).sqrt();
        assert!((sample_std(&w) - expected).abs() < 1e-12);
        assert!((expected - 24.65).abs() < 0.01);
        let h = BTreeMap::from([("s".to_string(), readings(&w))]);
        assert!(detect_noise(&h, &EngineConfig::default())["s"]);
    }

    #[test]
    fn single_value_is_not_noise() {
        assert!(!window_is_noisy(&[1e9], 3.0));
        let h = BTreeMap::from([("s".to_string(), readings(&[1e9]))]);
        assert!(!detect_noise(&h, &EngineConfig::default())["s"]);
    }

    #[test]
    fn only_the_last_window_counts() {
        let mut v = vec![0.0, 100.0, 0.0, 100.0];
        v.extend([7.0; 5]);
        let h = BTreeMap::from([("s".to_string(), readings(&v))]);
        assert!(!detect_noise(&h, &EngineConfig::default())["s"]);
    }
}
