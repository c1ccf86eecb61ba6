pub mod action;
pub mod asymptotics;
pub mod banded;
pub mod branch;
pub mod cli;
pub mod dd;
pub mod discretize;
pub mod examples;
pub mod levelcurve;
pub mod quad;
pub mod quasimode;
pub mod symbol;
