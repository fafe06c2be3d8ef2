pub mod dissipators;
pub mod error;
pub mod fock_oracle;
pub mod gibbs;
pub mod langevin;
pub mod lindblad_steady;
pub mod model;
pub mod observables;
pub mod quadrature;

pub use error::{Error, Result};
