//! Simulation and rate calculations for a donor electron-nuclear spin pair
//! exchange-coupled to a conduction-electron current.
//!
//! The model is a four-level system (electron spin 1/2 tensor nuclear spin
//! 1/2) whose electron relaxes at a Kondo-renormalized exchange-scattering
//! rate toward its thermal polarization. Two solvers evolve it:
//!
//! * [`lindblad`] integrates the full 4x4 density matrix (the exact oracle),
//! * [`bloch`] integrates the 15 coupled expectation values
//!   `<S>`, `<I>`, `<S_a I_b>` (the generalized Bloch equations).
//!
//! The two are the same linear system in different coordinates and are held
//! to pointwise agreement by the [`compare`] harness. On top of the solvers,
//! [`rates`] provides the closed-form nuclear decoherence and spin-flip
//! rates plus exponential rate extraction from trajectories, [`kondo`] the
//! exchange rate and coupling-regime classification, and [`edmr`] the
//! shot-noise sensitivity criterion for electrically detected magnetic
//! resonance read-out of the nuclear spin.

pub mod bloch;
pub mod compare;
pub mod edmr;
pub mod kondo;
pub mod lindblad;
pub mod ode;
pub mod params;
pub mod rates;
pub mod units;

pub use bloch::{BlochState, FrameTag, TimeUnit, Trajectory};
pub use kondo::{CouplingRegime, RegimeReport};
pub use lindblad::{DensityMatrix, Frame, RotatingHyperfine};
pub use params::SystemParams;
pub use rates::RateSet;
pub use units::Constants;
