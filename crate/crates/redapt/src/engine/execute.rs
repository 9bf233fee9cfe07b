use super::{ComponentPool, EngineError, ManagedSystem, Reconfiguration};

/// Applies a reconfiguration to the managed system and returns the pool
/// as it stands afterwards.
pub fn execute(
    reconfig: &Reconfiguration,
    target: &mut dyn ManagedSystem,
    pool: &ComponentPool,
) -> Result<ComponentPool, EngineError> {
    match reconfig {
        Reconfiguration::NoChange => Ok(pool.clone()),
        Reconfiguration::Parametric { values } => {
            for (name, value) in values {
                let inside = target
                    .parameter_domain(name)
                    .is_some_and(|d| d.contains(*value));
                if !inside {
                    return Err(EngineError::EffectorRejected(format!(
                        "{name} = {value} is outside its domain"
                    )));
                }
            }
            for (name, value) in values {
                target
                    .set_parameter(name, *value)
                    .map_err(EngineError::EffectorRejected)?;
            }
            Ok(pool.clone())
        }
        Reconfiguration::Structural { slot, replacement } => {
            let next = pool.swapped(slot, replacement)?;
            target
                .rebind(slot, replacement)
                .map_err(EngineError::EffectorRejected)?;
            Ok(next)
        }
    }
}
