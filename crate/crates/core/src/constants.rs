//! Physical constants. Values are CODATA 2018; they are fixed at
//! construction and never mutated. Nondimensionalized scenarios (test
//! fixtures, grid-oracle internals) override them through
//! [`PhysicalConstants::new`] rather than by mutation.

use crate::error::{CoreError, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Planck constant, J s (exact since the 2019 SI redefinition).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Bohr magneton, J/T.
pub const MU_BOHR: f64 = 9.274_010_078_3e-24;

/// Local gravitational acceleration, m/s^2 (generic lab value).
pub const G_STD: f64 = 9.81;

/// Mass of rubidium-85, kg.
pub const MASS_RB85: f64 = 1.409_99e-25;

/// Constants bundle threaded through every SI entry point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Bohr magneton, J/T.
    pub mu_bohr: f64,
    /// Gravitational acceleration magnitude, m/s^2 (downward positive).
    pub g: f64,
}

impl PhysicalConstants {
    /// CODATA values with the generic lab gravity 9.81 m/s^2.
    pub fn codata() -> Self {
        Self {
            hbar: HBAR,
            mu_bohr: MU_BOHR,
            g: G_STD,
        }
    }

    /// Natural units: `hbar = mu_bohr = g = 1`. Used by nondimensionalized
    /// fixtures where accelerations are chosen directly.
    pub fn natural() -> Self {
        Self {
            hbar: 1.0,
            mu_bohr: 1.0,
            g: 1.0,
        }
    }

    /// Override for custom unit systems. `hbar` and `mu_bohr` must be
    /// positive and finite; `g` must be finite (its sign is meaningful).
    pub fn new(hbar: f64, mu_bohr: f64, g: f64) -> Result<Self> {
        for (name, value) in [("hbar", hbar), ("mu_bohr", mu_bohr)] {
            if !value.is_finite() {
                return Err(CoreError::NonFinite { name, value });
            }
            if value <= 0.0 {
                return Err(CoreError::NonPositive { name, value });
            }
        }
        if !g.is_finite() {
            return Err(CoreError::NonFinite { name: "g", value: g });
        }
        Ok(Self { hbar, mu_bohr, g })
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}
