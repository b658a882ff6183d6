//! Simulation and optimization toolkit for the single-player CHSH* game:
//! exact strategy evaluation, exhaustive and numerical searches over
//! strategy families, compilation of gates to waveplate sequences, and a
//! seeded Monte-Carlo shot harness.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod game;
pub mod gates;
pub mod linalg;
pub mod optimizer;
pub mod photonic;
pub mod quantum;
pub mod strategies;
pub mod stream;

pub use error::{Error, Result};
