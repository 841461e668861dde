//! Phase-space route to the interferometer phase: classical trajectories
//! under piecewise-constant accelerations, symplectic transport matrices,
//! and the force-difference double integral over the mean trajectory.
//!
//! For linear potentials this route is exact and independent of the
//! operator algebra in [`crate::sequence`], which makes it a good
//! cross-check: it never touches displacement operators or scalar phases,
//! only classical windows and a timing kernel.

use crate::error::{CoreError, Result};
use crate::sequence::{Branch, InterferometerSequence, StateLabel};

/// Point in single-particle phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseSpaceVector {
    /// Position, m.
    pub position: f64,
    /// Momentum, kg m/s.
    pub momentum: f64,
}

impl PhaseSpaceVector {
    pub fn new(position: f64, momentum: f64) -> Self {
        Self { position, momentum }
    }

    pub fn zero() -> Self {
        Self::default()
    }
}

/// Antisymmetric symplectic product u^T J v with J = [[0, 1], [-1, 0]]:
/// u_z v_p - u_p v_z.
pub fn symplectic_product(u: PhaseSpaceVector, v: PhaseSpaceVector) -> f64 {
    u.position * v.momentum - u.momentum * v.position
}

/// Linear phase-space transport matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    pub elems: [[f64; 2]; 2],
}

impl TransitionMatrix {
    pub fn identity() -> Self {
        Self {
            elems: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    /// Free transport from t_prime to t: position advances by momentum
    /// times the elapsed time over the mass, momentum is unchanged.
    pub fn free_transition(t: f64, t_prime: f64, mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(CoreError::NonPositive {
                name: "mass",
                value: mass,
            });
        }
        Ok(Self {
            elems: [[1.0, (t - t_prime) / mass], [0.0, 1.0]],
        })
    }

    /// Matrix product self * other (other acts first).
    pub fn mul(&self, other: &Self) -> Self {
        let a = &self.elems;
        let b = &other.elems;
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self { elems: out }
    }

    pub fn apply(&self, chi: PhaseSpaceVector) -> PhaseSpaceVector {
        let e = &self.elems;
        PhaseSpaceVector {
            position: e[0][0] * chi.position + e[0][1] * chi.momentum,
            momentum: e[1][0] * chi.position + e[1][1] * chi.momentum,
        }
    }

    pub fn det(&self) -> f64 {
        let e = &self.elems;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    /// One-dimensional transport is symplectic exactly when it preserves
    /// phase-space area, i.e. has unit determinant.
    pub fn is_symplectic(&self) -> bool {
        (self.det() - 1.0).abs() <= 1e-12
    }
}

/// One window of constant acceleration on a branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSegment {
    /// Window start, s.
    pub start: f64,
    /// Window end, s.
    pub end: f64,
    /// Acceleration in the window, m/s^2.
    pub accel: f64,
    /// Internal state occupied during the window.
    pub state: StateLabel,
}

impl ForceSegment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Acceleration history of one interferometer branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchForceProfile {
    /// Time-ordered, contiguous windows.
    pub segments: Vec<ForceSegment>,
    /// Atomic mass, kg.
    pub mass: f64,
}

impl BranchForceProfile {
    /// Acceleration windows a branch sees: pulses toggle the internal
    /// state, so the branch alternates between the two accelerations.
    pub fn from_sequence(seq: &InterferometerSequence, branch: Branch) -> Result<Self> {
        if seq.pulses.len() < 2 {
            return Err(CoreError::InvalidSequence(
                "need at least 2 pulses to form a force window".into(),
            ));
        }
        let first_state = match branch {
            Branch::Lower => StateLabel::G1,
            Branch::Upper => StateLabel::G2,
        };
        let segments = seq
            .pulses
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let state = if k % 2 == 0 {
                    first_state
                } else {
                    match first_state {
                        StateLabel::G1 => StateLabel::G2,
                        StateLabel::G2 => StateLabel::G1,
                    }
                };
                let accel = match state {
                    StateLabel::G1 => seq.a1,
                    StateLabel::G2 => seq.a2,
                };
                ForceSegment {
                    start: w[0].time,
                    end: w[1].time,
                    accel,
                    state,
                }
            })
            .collect();
        Ok(Self {
            segments,
            mass: seq.mass,
        })
    }

    pub fn start_time(&self) -> f64 {
        self.segments.first().map_or(0.0, |s| s.start)
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end)
    }

    /// Total time spent in the given internal state.
    pub fn dwell_time(&self, state: StateLabel) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.state == state)
            .map(ForceSegment::duration)
            .sum()
    }

    fn max_accel(&self) -> f64 {
        self.segments
            .iter()
            .fold(0.0f64, |m, s| m.max(s.accel.abs()))
    }
}

/// Exact classical trajectory through the piecewise-constant acceleration
/// windows, starting from `chi0` at the profile start time.
pub fn classical_solution(
    chi0: PhaseSpaceVector,
    profile: &BranchForceProfile,
    t: f64,
) -> Result<PhaseSpaceVector> {
    let (t_start, t_end) = (profile.start_time(), profile.end_time());
    if !t.is_finite() || t < t_start || t > t_end {
        return Err(CoreError::OutOfDomain {
            name: "t",
            value: t,
            domain: "[profile start, profile end]",
        });
    }
    let m = profile.mass;
    let mut chi = chi0;
    for seg in &profile.segments {
        if t <= seg.start {
            break;
        }
        let dt = (t.min(seg.end)) - seg.start;
        let force = m * seg.accel;
        chi = PhaseSpaceVector {
            position: chi.position + chi.momentum / m * dt + 0.5 * seg.accel * dt * dt,
            momentum: chi.momentum + force * dt,
        };
    }
    Ok(chi)
}

/// Result of the phase-space phase computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShift {
    /// Total phase including the laser contribution, rad, for a packet
    /// launched at the phase-space origin. For open geometries add
    /// [`PhaseShift::open_correction`] for the actual launch point.
    pub phase: f64,
    /// Laser part of `phase`, rad.
    pub laser_phase_total: f64,
    /// True when the branch endpoints coincide in phase space.
    pub closed: bool,
    /// Branch-endpoint separation (lower minus upper) at the final time.
    pub residual: PhaseSpaceVector,
    /// First pulse time, s.
    pub start_time: f64,
    /// Last pulse time, s.
    pub end_time: f64,
    mass: f64,
    hbar: f64,
}

impl PhaseShift {
    /// Launch-point correction for open geometries:
    /// -(1/hbar) residual^T J T(end, start) chi0, the phase picked up
    /// because the packet overlap is taken between displaced copies away
    /// from the origin. Zero for closed geometries.
    pub fn open_correction(&self, chi0: PhaseSpaceVector) -> f64 {
        let transported = TransitionMatrix::free_transition(self.end_time, self.start_time, self.mass)
            .expect("mass validated at construction")
            .apply(chi0);
        -symplectic_product(self.residual, transported) / self.hbar
    }
}

/// Timing kernel of the force-difference double integral: the response at
/// window j to unit acceleration in window k, integrated over window j.
/// Windows are time ordered; the future does not contribute.
fn window_kernel(windows: &[(f64, f64)], j: usize, k: usize) -> f64 {
    if k > j {
        return 0.0;
    }
    let (s_j, e_j) = windows[j];
    let (s_k, e_k) = windows[k];
    if k == j {
        let d = e_j - s_j;
        return d * d * d / 6.0;
    }
    let f = |t: f64| ((t - s_k).powi(3) - (t - e_k).powi(3)) / 6.0;
    f(e_j) - f(s_j)
}

/// Interferometer phase from the phase-space picture. The phase is the
/// mass-weighted double integral of the acceleration difference against the
/// mean-trajectory response, plus the laser phase:
///
/// phase = laser + (m/hbar) sum_j dg_j sum_k gbar_k W(j, k)
///
/// with dg the lower-minus-upper acceleration difference and gbar the
/// branch average per window. Velocity non-closure (unequal dwell times in
/// the two internal states) is rejected: the internal energy difference
/// would then contribute an unmodeled phase.
pub fn phase_shift(
    lower: &BranchForceProfile,
    upper: &BranchForceProfile,
    laser_phase_total: f64,
    hbar: f64,
) -> Result<PhaseShift> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(CoreError::NonPositive {
            name: "hbar",
            value: hbar,
        });
    }
    if lower.segments.len() != upper.segments.len() {
        return Err(CoreError::InvalidSequence(
            "branch profiles have different window counts".into(),
        ));
    }
    let total = lower.end_time() - lower.start_time();
    let same_window = |a: &ForceSegment, b: &ForceSegment| {
        (a.start - b.start).abs() <= 1e-12 * total && (a.end - b.end).abs() <= 1e-12 * total
    };
    if !lower
        .segments
        .iter()
        .zip(&upper.segments)
        .all(|(a, b)| same_window(a, b))
    {
        return Err(CoreError::InvalidSequence(
            "branch profiles must share the same window boundaries".into(),
        ));
    }
    if (lower.mass - upper.mass).abs() > 1e-12 * lower.mass {
        return Err(CoreError::InvalidSequence(
            "branch profiles must share the same mass".into(),
        ));
    }
    let m = lower.mass;
    let windows: Vec<(f64, f64)> = lower.segments.iter().map(|s| (s.start, s.end)).collect();
    let dg: Vec<f64> = lower
        .segments
        .iter()
        .zip(&upper.segments)
        .map(|(l, u)| l.accel - u.accel)
        .collect();
    let gbar: Vec<f64> = lower
        .segments
        .iter()
        .zip(&upper.segments)
        .map(|(l, u)| 0.5 * (l.accel + u.accel))
        .collect();

    let a_max = lower.max_accel().max(upper.max_accel());
    let delta_v: f64 = dg
        .iter()
        .zip(&windows)
        .map(|(d, (s, e))| d * (e - s))
        .sum();
    if delta_v.abs() > 1e-9 * a_max * total {
        return Err(CoreError::UnequalDwell(format!(
            "branch velocities do not close (residual velocity {delta_v:.3e} m/s); \
             the two states are occupied for different total times"
        )));
    }

    let mut force_phase = 0.0;
    for j in 0..windows.len() {
        let mut response = 0.0;
        for k in 0..=j {
            response += gbar[k] * window_kernel(&windows, j, k);
        }
        force_phase += dg[j] * response;
    }
    let phase = laser_phase_total + m / hbar * force_phase;

    let t_end = lower.end_time();
    let delta_z: f64 = dg
        .iter()
        .zip(&windows)
        .map(|(d, (s, e))| d * ((t_end - s).powi(2) - (t_end - e).powi(2)) / 2.0)
        .sum();
    let residual = PhaseSpaceVector::new(delta_z, m * delta_v);
    let z_scale = 0.5 * a_max * total * total;
    let closed = delta_z.abs() <= 1e-9 * z_scale && residual.momentum.abs() <= 1e-9 * m * a_max * total;

    Ok(PhaseShift {
        phase,
        laser_phase_total,
        closed,
        residual,
        start_time: lower.start_time(),
        end_time: t_end,
        mass: m,
        hbar,
    })
}

/// Convenience wrapper: both branch profiles from a sequence, then
/// [`phase_shift`] with the sequence's four-pulse laser combination.
pub fn phase_shift_from_sequence(seq: &InterferometerSequence) -> Result<PhaseShift> {
    if seq.pulses.len() != 4 {
        return Err(CoreError::InvalidSequence(format!(
            "phase-space route expects the four-pulse geometry, got {} pulses",
            seq.pulses.len()
        )));
    }
    let lower = BranchForceProfile::from_sequence(seq, Branch::Lower)?;
    let upper = BranchForceProfile::from_sequence(seq, Branch::Upper)?;
    let laser = crate::sequence::total_laser_phase([
        seq.pulses[0].laser_phase,
        seq.pulses[1].laser_phase,
        seq.pulses[2].laser_phase,
        seq.pulses[3].laser_phase,
    ]);
    phase_shift(&lower, &upper, laser, seq.hbar)
}
