//! Restoration planning for coupled electricity, water and gas distribution
//! networks after a blackout.

pub mod conic;
pub mod bnb;
pub mod error;
pub mod formulation;
pub mod network;
pub mod oracle;
pub mod plan;
pub mod report;
pub mod scenario;
pub mod synth;
