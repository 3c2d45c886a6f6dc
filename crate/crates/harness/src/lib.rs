//! Experiment harness for `gensmooth`: a named objective catalog, TOML
//! configuration, single traced runs, step-size divergence sweeps, CSV and
//! SVG output, and a certification suite for the catalog.

pub mod catalog;
pub mod config;
pub mod report;
pub mod runner;
pub mod sweep;
pub mod verify;
