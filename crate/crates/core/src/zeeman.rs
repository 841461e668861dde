//! Atom and field configuration: two internal ground states in a magnetic
//! field with a uniform bias plus a constant gradient along z. The reference
//! state is magnetically inert (m_F = 0); the sensitive state sees a linear
//! Zeeman shift, hence a constant state-dependent force.

use crate::constants::PhysicalConstants;
use crate::error::{CoreError, Result};

/// One internal ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalState {
    pub label: String,
    /// Landé g-factor of the hyperfine manifold.
    pub lande_g: f64,
    /// Magnetic quantum number m_F.
    pub m_quantum: i32,
    /// Field-free internal energy offset, J. Never enters interferometer
    /// phases for equal dwell times; kept for completeness. Defaults to 0.
    pub rest_energy_offset: f64,
}

impl InternalState {
    pub fn new(label: impl Into<String>, lande_g: f64, m_quantum: i32) -> Result<Self> {
        if !lande_g.is_finite() {
            return Err(CoreError::NonFinite {
                name: "lande_g",
                value: lande_g,
            });
        }
        Ok(Self {
            label: label.into(),
            lande_g,
            m_quantum,
            rest_energy_offset: 0.0,
        })
    }
}

/// Atom: mass plus the interferometer state pair. `states[0]` is the
/// magnetically inert reference state, `states[1]` the sensitive state.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomConfig {
    /// Atomic mass, kg.
    pub mass: f64,
    pub states: [InternalState; 2],
}

impl AtomConfig {
    pub fn new(mass: f64, reference: InternalState, sensitive: InternalState) -> Result<Self> {
        if !mass.is_finite() {
            return Err(CoreError::NonFinite {
                name: "mass",
                value: mass,
            });
        }
        if mass <= 0.0 {
            return Err(CoreError::NonPositive {
                name: "mass",
                value: mass,
            });
        }
        Ok(Self {
            mass,
            states: [reference, sensitive],
        })
    }

    pub fn reference(&self) -> &InternalState {
        &self.states[0]
    }

    pub fn sensitive(&self) -> &InternalState {
        &self.states[1]
    }
}

/// Gravity and magnetic field along z: B(z) = (b0 + z grad_bz) e_z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    /// Gravitational acceleration magnitude, m/s^2, downward positive.
    pub g: f64,
    /// Uniform bias field, T.
    pub b0: f64,
    /// Field gradient dB_z/dz, T/m.
    pub grad_bz: f64,
}

impl FieldConfig {
    pub fn new(g: f64, b0: f64, grad_bz: f64) -> Result<Self> {
        for (name, value) in [("g", g), ("b0", b0), ("grad_bz", grad_bz)] {
            if !value.is_finite() {
                return Err(CoreError::NonFinite { name, value });
            }
        }
        Ok(Self { g, b0, grad_bz })
    }

    /// |extent * grad_bz| / |b0|: how strongly the field varies over the
    /// region the atoms explore. The linearized Zeeman map and the constant
    /// force picture assume this is small; callers decide the threshold.
    /// Infinite when `b0 == 0`.
    pub fn uniformity_ratio(&self, extent: f64) -> f64 {
        if self.b0 == 0.0 {
            return f64::INFINITY;
        }
        (extent * self.grad_bz / self.b0).abs()
    }
}

/// Linear Zeeman shift of `state` at height `z`, in J:
/// mu_B * g_F * m_F * (b0 + z * grad_bz). Exactly zero for m_F = 0.
pub fn zeeman_shift(
    state: &InternalState,
    field: &FieldConfig,
    z: f64,
    consts: &PhysicalConstants,
) -> f64 {
    if state.m_quantum == 0 {
        return 0.0;
    }
    consts.mu_bohr * state.lande_g * f64::from(state.m_quantum) * (field.b0 + z * field.grad_bz)
}

/// State-dependent accelerations (reference, sensitive), m/s^2.
///
/// The reference state falls freely: a1 = -g. The sensitive state adds the
/// magnetic-gradient force from its linear Zeeman shift:
/// a2 = -g - (mu_B / m) g_F m_F grad_bz.
///
/// Errors if the reference state is not magnetically inert; the constant
/// force picture requires one insensitive arm.
pub fn accelerations(
    atom: &AtomConfig,
    field: &FieldConfig,
    consts: &PhysicalConstants,
) -> Result<(f64, f64)> {
    let reference = atom.reference();
    if reference.m_quantum != 0 {
        return Err(CoreError::InvalidAtom(format!(
            "reference state '{}' has m_F = {}, must be 0",
            reference.label, reference.m_quantum
        )));
    }
    let sensitive = atom.sensitive();
    let a1 = -field.g;
    let a2 = -field.g
        - consts.mu_bohr / atom.mass
            * sensitive.lande_g
            * f64::from(sensitive.m_quantum)
            * field.grad_bz;
    Ok((a1, a2))
}

/// Internal frequency splitting added to the sensitive state by the uniform
/// bias field, rad/s: mu_B g_F m_F b0 / hbar. This offset is absorbed by the
/// laser detuning and never enters interferometer phases.
pub fn bias_frequency_offset(
    atom: &AtomConfig,
    field: &FieldConfig,
    consts: &PhysicalConstants,
) -> f64 {
    let s = atom.sensitive();
    consts.mu_bohr * s.lande_g * f64::from(s.m_quantum) * field.b0 / consts.hbar
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::MASS_RB85;
    use proptest::prelude::*;

    fn rb85() -> AtomConfig {
        AtomConfig::new(
            MASS_RB85,
            InternalState::new("g1", -1.0 / 3.0, 0).unwrap(),
            InternalState::new("g2", 1.0 / 3.0, 1).unwrap(),
        )
        .unwrap()
    }

    fn lab_field() -> FieldConfig {
        FieldConfig::new(9.81, 83.5e-6, 600e-6).unwrap()
    }

    #[test]
    fn inert_state_has_zero_shift_everywhere() {
        let consts = PhysicalConstants::codata();
        let state = InternalState::new("g1", 0.7, 0).unwrap();
        for b0 in [0.0, 1e-6, 5.0] {
            let field = FieldConfig::new(9.81, b0, 1e-3).unwrap();
            assert_eq!(zeeman_shift(&state, &field, 0.37, &consts), 0.0);
        }
    }

    #[test]
    fn shift_at_bias_field() {
        let consts = PhysicalConstants::codata();
        let state = InternalState::new("g2", 1.0 / 3.0, 1).unwrap();
        let field = lab_field();
        let expected = consts.mu_bohr * (1.0 / 3.0) * 83.5e-6;
        let got = zeeman_shift(&state, &field, 0.0, &consts);
        assert!((got - expected).abs() <= 1e-12 * expected.abs());
    }

    #[test]
    fn differential_acceleration_rb85() {
        let consts = PhysicalConstants::codata();
        let (a1, a2) = accelerations(&rb85(), &lab_field(), &consts).unwrap();
        assert_eq!(a1, -9.81);
        // mu_B/m * (1/3) * 600 uT/m = 1.3155e-2 m/s^2 pulling a2 below a1.
        let diff = a2 - a1;
        assert!((diff + 0.0131547).abs() < 1e-6, "diff = {diff}");
    }

    #[test]
    fn rejects_sensitive_reference_state() {
        let consts = PhysicalConstants::codata();
        let atom = AtomConfig::new(
            MASS_RB85,
            InternalState::new("g1", -1.0 / 3.0, 1).unwrap(),
            InternalState::new("g2", 1.0 / 3.0, 1).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            accelerations(&atom, &lab_field(), &consts),
            Err(CoreError::InvalidAtom(_))
        ));
    }

    #[test]
    fn bias_offset_at_lab_field() {
        // mu_B/h = 13.996 GHz/T times g_F m_F = 1/3 times 83.5 uT
        // puts the splitting offset near 389.6 kHz.
        let consts = PhysicalConstants::codata();
        let omega0 = bias_frequency_offset(&rb85(), &lab_field(), &consts);
        let expected = 2.0 * std::f64::consts::PI * 389.56e3;
        assert!(
            (omega0 - expected).abs() < 0.01 * expected,
            "omega0 = {omega0}"
        );
    }

    #[test]
    fn uniformity_ratio_flags_strong_gradients() {
        let field = lab_field();
        // 600 uT/m over 1 mm against an 83.5 uT bias: ~0.7% variation.
        let ratio = field.uniformity_ratio(1e-3);
        assert!((ratio - 600e-6 * 1e-3 / 83.5e-6).abs() < 1e-12);
        assert!(ratio < 0.01);
        let no_bias = FieldConfig::new(9.81, 0.0, 600e-6).unwrap();
        assert!(no_bias.uniformity_ratio(1e-3).is_infinite());
    }

    proptest! {
        // The shift is linear in z by construction; the slope is the
        // gradient force scale and the intercept the bias shift.
        #[test]
        fn shift_linear_in_z(
            z1 in -10.0f64..10.0,
            z2 in -10.0f64..10.0,
            lam in 0.0f64..1.0,
        ) {
            let consts = PhysicalConstants::codata();
            let state = InternalState::new("s", 0.5, 2).unwrap();
            let field = lab_field();
            let z = lam * z1 + (1.0 - lam) * z2;
            let lhs = zeeman_shift(&state, &field, z, &consts);
            let rhs = lam * zeeman_shift(&state, &field, z1, &consts)
                + (1.0 - lam) * zeeman_shift(&state, &field, z2, &consts);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1e-30));
        }
    }
}
