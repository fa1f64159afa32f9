// SPDX-License-Identifier: Apache-2.0

//! Scripted multi-agent scenarios run inside the simulator.

pub mod roomdj;

pub use roomdj::{run_roomdj, RoomDjConfig, RoomDjReport, ScenarioScript};
