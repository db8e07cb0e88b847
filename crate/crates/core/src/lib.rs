//! Slot-synchronous simulation and scheduling for multihop mmWave backhaul
//! meshes.
//!
//! The crate is organized bottom-up:
//!
//! * [`topology`]: base stations, directed links, shortest-path routing.
//! * [`radio`]: path loss, link budgets, interference matrices, and the
//!   per-slot packet budget of each link under a power vector.
//! * [`sim`]: traffic generation and the two-phase slot engine.
//! * [`greedy`]: the residual-profit greedy scheduler.
//! * [`env`]: reinforcement-learning wrapper (state encoding, action
//!   decoding, reward).
//! * [`ppo`]: MLP policy/value networks and a PPO trainer.
//! * [`runner`]: scheduler-agnostic episode execution and metrics.
//! * [`harness`]: run configs, evaluation, timing benchmarks, comparisons.
//!
//! See `examples/` for one runnable program per capability.

pub mod decision;
pub mod env;
pub mod error;
pub mod greedy;
pub mod harness;
pub mod ppo;
pub mod radio;
pub mod rng;
pub mod runner;
pub mod sim;
pub mod topology;

pub use decision::ScheduleDecision;
pub use error::{Error, Result};
