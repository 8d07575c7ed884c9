pub mod asymptotics;
pub mod basis;
pub mod combinatorics;
pub mod config;
pub mod error;
pub mod moments;
pub mod numeric;
pub mod polynomial;
pub mod sampling;
pub mod transient;
