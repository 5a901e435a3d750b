pub mod book;
pub mod cli;
pub mod cocycle;
pub mod dimension;
pub mod error;
pub mod exceptional;
pub mod map_models;
pub mod mat;
pub mod pressure;
pub mod report;
pub mod selftest;
pub mod symbolic;

pub use error::{Error, Result};
