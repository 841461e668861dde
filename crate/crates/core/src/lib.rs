//! Simulation and analysis engine for a two-state atom interferometer in
//! which the two internal states see different constant forces (gravity plus
//! a state-dependent magnetic-gradient force).
//!
//! Three independent routes compute the interferometer signal:
//!
//! * [`sequence`]: exact operator algebra on phase, displacement and free
//!   evolution normal forms,
//! * [`phasespace`]: classical phase-space trajectories plus a
//!   force-difference double integral,
//! * [`oracle`]: split-step Fourier propagation on a grid.
//!
//! [`propagator`] holds the closed-form single-packet results the engines
//! are checked against, and [`calibration`] maps Raman spectroscopy data to
//! magnetic-field values and feasible pulse separations.
//!
//! All public interfaces are SI unless a function documents otherwise; the
//! grid oracle works internally in natural units (`hbar = mass = 1`) and
//! [`sequence::nondimensionalize`] converts SI problems at that boundary.

pub mod calibration;
pub mod constants;
pub mod error;
pub mod oracle;
pub mod phasespace;
pub mod propagator;
pub mod sequence;
mod util;
pub mod zeeman;

pub use calibration::{FieldMapPoint, GradientFit, RamanTransition, SpectrumSample};
pub use num_complex::Complex64;
pub use constants::PhysicalConstants;
pub use error::{CoreError, Result};
pub use oracle::{Grid, GridWavefunction, NumericRun};
pub use phasespace::{BranchForceProfile, PhaseSpaceVector, TransitionMatrix};
pub use propagator::{GaussianPacket, LinearPotentialSpec};
pub use sequence::{
    Branch, BranchResult, InterferometerSequence, OperatorNormalForm, PulseEvent, StateLabel,
};
pub use zeeman::{AtomConfig, FieldConfig, InternalState};
