//! Model families, simulation and closed-form second-order quantities.

pub mod bilinear;
pub mod contraction;
pub mod innovation;
pub mod linear;
pub mod simulate;
pub mod spec;

pub use bilinear::MarkovForm;
pub use contraction::{contraction_coefficients, ContractionMethod, ContractionReport};
pub use innovation::Innovation;
pub use linear::{arma_filter, check_stable, companion_spectral_radius, psi_weights, theoretical_acov, theoretical_spectrum};
pub use simulate::{simulate, simulate_coupled, simulate_coupled_with_rng, simulate_with_rng, CoupledPair, Simulator};
pub use spec::{ArmaDriver, InnovationMap, ModelSpec};
