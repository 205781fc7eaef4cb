//! Single-excitation waveguide QED with a quantum-mechanically moving
//! two-level emitter.
//!
//! The Hamiltonian conserves the total momentum `K`, so every computation
//! happens inside one `(L+1)`-dimensional block at a time: the excited qubit
//! `|K⟩` plus the photon states `|p⟩_K` with the qubit at `K - p`.

pub mod block;
pub mod boundstates;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod oracle;
pub mod roots;
pub mod scattering;

pub use error::{Result, WqedError};
pub use model::{
    band_extrema, evaluate_bands, self_energy, wrap_angle, z_of_k, BandExtrema, BandPoint,
    ModelParams, Momentum, MomentumGrid, SelfEnergyEval, DEFAULT_L,
};
pub use scattering::{scatter, sweep_scattering, ScatterOutcome, ScatterRow};
pub use boundstates::{
    band_scan, bound_wavefunctions, pole_function, solve_bound_state, BandScan, BoundState,
    BoundWavefunctions, Branch,
};
