//! Deterministic wildfire spread simulation and helitack suppression environment.
//!
//! The crate is `no_std` (with `alloc`): every module is a pure in-memory
//! computation. File formats, the CLI and the wire protocol live in the
//! `wildfire` companion crate.
//!
//! Layout, bottom-up:
//!
//! - [`fuel`]: fuel model catalog (Anderson 13 built in).
//! - [`rothermel`]: surface rate-of-spread kernel.
//! - [`terrain`]: scenario data model, synthetic fixtures, slope geometry.
//! - [`engine`]: cellular-automata fire spread and suppressant drops.
//! - [`env`]: episode environment with actions, stacked observations and rewards.
//! - [`agents`]: scripted baseline policies.
//! - [`dataset`]: incident dedup, negative sampling and weather windows.
//! - [`report`]: threat assessment report built from episode logs.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agents;
pub mod dataset;
pub mod engine;
pub mod env;
pub mod fuel;
pub mod report;
pub mod rothermel;
pub mod terrain;

mod checksum;

pub use checksum::Fnv64;
pub use engine::{CellState, Engine, Phase, SimState, Status, StepDelta};
pub use env::{Action, Env, EnvConfig, EpisodeLog, Observation, RewardBreakdown};

pub use fuel::{FuelCatalog, FuelModel};
pub use terrain::{Cell, GeoRef, Scenario};
