//! Requirements-driven self-adaptation.
//!
//! - [`agm`]: adaptive goal models and their derivation steps.
//! - [`spec`]: the specification language, checker and trace evaluator.
//! - [`engine`]: the monitor/analyze/plan/execute loop.
//! - [`hrcs`]: the highway-rail crossing simulator the engine adapts.
//! - [`cli`]: the `check`, `run` and `verify` commands.

// Float checks are written `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait)]

pub mod agm;
pub mod cli;
pub mod engine;
pub mod hrcs;
pub mod spec;
