//! Spiking neural network engine with heterogeneous coding per block:
//! direct-coded inputs (or phase-coded audio), burst/rate hidden layers
//! trained by layer-to-layer distillation, and a time-to-first-spike output
//! layer. Includes energy auditing and noise-robustness experiments.

pub mod audio;
pub mod checkpoint;
pub mod coding;
pub mod config;
pub mod conv;
pub mod data;
pub mod energy;
pub mod error;
pub mod gradcheck;
pub mod ltl;
pub mod neurons;
pub mod optim;
pub mod pipeline;
pub mod rng;
pub mod teacher;
pub mod tensor;
pub mod ttfs;

pub use error::{CoreError, Result};
