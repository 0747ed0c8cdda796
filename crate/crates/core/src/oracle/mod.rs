//! Independent checks of plans against the unrelaxed physics.

mod delivery;
mod enumerate;
mod hydraulics;
mod physics;
mod sweep;
mod verify;

pub use delivery::{evaluate_delivery, DeliveryOutcome};
pub use enumerate::{enumerate_optimal, enumerate_program, Assignment, Enumeration, DEFAULT_BINARY_LIMIT};
pub use hydraulics::{gas_inputs, radial_gas_solve, radial_water_solve, water_inputs, CompressorSetting, RadialState};
pub use physics::{check_exactness_conditions, compressor_power, exactness_gap, pump_power, ConditionFlags};
pub use sweep::{island_from_plan, sweep_power_flow, FeederBranch, Island, SweepResult, SWEEP_MAX_ITER};
pub use verify::{verify_plan, FamilyResidual, FeasibilityReport, Tolerances};
