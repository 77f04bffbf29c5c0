//! Persona-conditioned judge panels: multi-turn evaluation sessions plus
//! reliability and discovery scaling analysis.

pub mod cli;
pub mod config;
pub mod dedup;
pub mod emotion;
pub mod persona;
pub mod scaling;
pub mod session;
pub mod stats;
pub mod store;
pub mod synthetic;
