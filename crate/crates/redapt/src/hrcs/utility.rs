use serde::Serialize;
use thiserror::Error;

use super::config::{t_close_in_domain, t_open_in_domain};

/// Above this illuminance the crossing counts as lit.
pub const LIGHT_THRESHOLD: f64 = 20.0;

/// Gate timing forced while the crossing is lit.
pub const LIT_TIMING: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Utilities {
    pub u_e: f64,
    pub u_close: f64,
    pub u_open: f64,
    pub u_safety: f64,
    pub u_pass: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("gate timing (t_close = {t_close}, t_open = {t_open}) is not admissible at {e} lx")]
pub struct DomainError {
    pub t_close: f64,
    pub t_open: f64,
    pub e: f64,
}

/// Utilities of the gate timing at illuminance `e`.
///
/// Lit crossings (`e > 20`) admit only the 4 s / 4 s timing; dark ones
/// admit `t_close` in (1, 4] and `t_open` in [4, 7).
pub fn eval_utilities(t_close: f64, t_open: f64, e: f64) -> Result<Utilities, DomainError> {
    let lit = e > LIGHT_THRESHOLD;
    let admissible = if lit {
        t_close == LIT_TIMING && t_open == LIT_TIMING
    } else {
        t_close_in_domain(t_close) && t_open_in_domain(t_open)
    };
    if !admissible || !e.is_finite() || e < 0.0 {
        return Err(DomainError { t_close, t_open, e });
    }
    let u_e = if lit { 1.0 } else { 0.0 };
    let u_open = (7.0 - t_open) / 3.0;
    let u_close = (t_close - 1.0) / 3.0;
    let sgn = if u_e > 0.0 { 1.0 } else { 0.0 };
    let u_safety = u_e + 0.5 * (1.0 - sgn) * (u_open + u_close - 2.0).abs();
    let u_pass = (u_open + u_close) / 2.0;
    Ok(Utilities {
        u_e,
        u_close,
        u_open,
        u_safety,
        u_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lit_optimum() {
        let u = eval_utilities(4.0, 4.0, 50.0).unwrap();
        assert_eq!(
            (u.u_e, u.u_close, u.u_open, u.u_safety, u.u_pass),
            (1.0, 1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn dark_at_lit_timing_is_unsafe() {
        let u = eval_utilities(4.0, 4.0, 10.0).unwrap();
        assert_eq!(u.u_safety, 0.0);
        assert_eq!(u.u_pass, 1.0);
    }

    #[test]
    fn retimed_dark_point() {
        let u = eval_utilities(1.5, 6.5, 10.0).unwrap();
        assert!((u.u_close - 1.0 / 6.0).abs() < 1e-15);
        assert!((u.u_open - 1.0 / 6.0).abs() < 1e-15);
        assert!((u.u_safety - 5.0 / 6.0).abs() < 1e-15);
        assert!((u.u_pass - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn twenty_lux_is_dark() {
        assert_eq!(eval_utilities(4.0, 4.0, 20.0).unwrap().u_e, 0.0);
        assert!(eval_utilities(2.0, 5.0, 20.5).is_err());
    }

    #[test]
    fn out_of_domain() {
        assert!(eval_utilities(1.0, 5.0, 0.0).is_err());
        assert!(eval_utilities(2.0, 7.0, 0.0).is_err());
        assert!(eval_utilities(4.5, 5.0, 0.0).is_err());
    }
}
