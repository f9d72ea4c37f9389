pub mod attractor;
pub mod compactification;
pub mod equilibria;
pub mod error;
pub mod grid;
pub mod io;
pub mod nonlinearity;
pub mod numerics;
pub mod oracle;
pub mod parallel;
pub mod pde;
pub mod selftest;
pub mod spectrum;
pub mod steklov;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{Field, Grid, Parity};
pub use nonlinearity::BoundaryNonlinearity;
pub use parallel::Execution;
