//! Pulse-sequence engine. Evolution between pulses is exact and kept in
//! normal form phase * displacement * free-evolution; two-level pulse
//! unitaries mix the internal states and swap which acceleration acts.
//! Composing branch operators and taking the relative form of the two
//! branches yields the interferometer phase and contrast without any grid.

use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::error::{CoreError, Result};
use crate::propagator::GaussianPacket;
use crate::zeeman::{accelerations, AtomConfig, FieldConfig};

/// Internal-state label for the two interferometer states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateLabel {
    G1,
    G2,
}

impl StateLabel {
    fn other(self) -> Self {
        match self {
            StateLabel::G1 => StateLabel::G2,
            StateLabel::G2 => StateLabel::G1,
        }
    }
}

/// Interferometer branch: which acceleration acts first after the opening
/// beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Starts in the reference state (acceleration a1 first).
    Lower,
    /// Starts in the sensitive state (acceleration a2 first).
    Upper,
}

/// One instantaneous two-photon pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseEvent {
    /// Pulse time, s.
    pub time: f64,
    /// Pulse area, rad; pi/2 splits, pi swaps.
    pub area: f64,
    /// Laser phase imprinted by the pulse, rad.
    pub laser_phase: f64,
}

impl PulseEvent {
    pub fn new(time: f64, area: f64, laser_phase: f64) -> Result<Self> {
        for (name, value) in [("time", time), ("laser_phase", laser_phase)] {
            if !value.is_finite() {
                return Err(CoreError::NonFinite { name, value });
            }
        }
        validate_area(area)?;
        Ok(Self {
            time,
            area,
            laser_phase,
        })
    }
}

pub(crate) fn validate_area(area: f64) -> Result<()> {
    if !area.is_finite() || area <= 0.0 || area > 2.0 * std::f64::consts::PI {
        return Err(CoreError::OutOfDomain {
            name: "area",
            value: area,
            domain: "(0, 2*pi]",
        });
    }
    Ok(())
}

/// Pulse sequence with the two state-dependent accelerations. `mass` and
/// `hbar` complete the unit system; natural-unit fixtures set both to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerSequence {
    /// Pulses in strictly increasing time order.
    pub pulses: Vec<PulseEvent>,
    /// Acceleration of the reference state, m/s^2.
    pub a1: f64,
    /// Acceleration of the sensitive state, m/s^2.
    pub a2: f64,
    /// Time of the first pulse, s.
    pub t0: f64,
    /// Atomic mass, kg.
    pub mass: f64,
    /// Reduced Planck constant in the same unit system.
    pub hbar: f64,
}

/// Relative area tolerance for recognizing the canonical pi/2-pi-pi-pi/2
/// structure.
const CANONICAL_AREA_TOL: f64 = 1e-9;

/// Relative residual below which the branch endpoints are treated as
/// coincident (closed geometry).
const CLOSURE_TOL: f64 = 1e-9;

impl InterferometerSequence {
    pub fn new(pulses: Vec<PulseEvent>, a1: f64, a2: f64, mass: f64, hbar: f64) -> Result<Self> {
        if pulses.len() < 2 {
            return Err(CoreError::InvalidSequence(format!(
                "need at least 2 pulses, got {}",
                pulses.len()
            )));
        }
        if !pulses.windows(2).all(|w| w[0].time < w[1].time) {
            return Err(CoreError::InvalidSequence(
                "pulse times must be strictly increasing".into(),
            ));
        }
        for (name, value) in [("a1", a1), ("a2", a2)] {
            if !value.is_finite() {
                return Err(CoreError::NonFinite { name, value });
            }
        }
        for (name, value) in [("mass", mass), ("hbar", hbar)] {
            if !value.is_finite() {
                return Err(CoreError::NonFinite { name, value });
            }
            if value <= 0.0 {
                return Err(CoreError::NonPositive { name, value });
            }
        }
        let t0 = pulses[0].time;
        Ok(Self {
            pulses,
            a1,
            a2,
            t0,
            mass,
            hbar,
        })
    }

    /// Canonical four-pulse sequence: pi/2, pi, pi, pi/2 at times
    /// t0, t0 + period, t0 + 3 period, t0 + 4 period.
    pub fn canonical(
        a1: f64,
        a2: f64,
        t0: f64,
        period: f64,
        laser_phases: [f64; 4],
        mass: f64,
        hbar: f64,
    ) -> Result<Self> {
        if !(period > 0.0) {
            return Err(CoreError::NonPositive {
                name: "period",
                value: period,
            });
        }
        use std::f64::consts::{FRAC_PI_2, PI};
        let times = [t0, t0 + period, t0 + 3.0 * period, t0 + 4.0 * period];
        let areas = [FRAC_PI_2, PI, PI, FRAC_PI_2];
        let pulses = (0..4)
            .map(|k| PulseEvent::new(times[k], areas[k], laser_phases[k]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pulses, a1, a2, mass, hbar)
    }

    /// Canonical sequence with accelerations derived from an atom in a
    /// gravity plus magnetic-gradient field.
    pub fn canonical_si(
        atom: &AtomConfig,
        field: &FieldConfig,
        consts: &PhysicalConstants,
        t0: f64,
        period: f64,
        laser_phases: [f64; 4],
    ) -> Result<Self> {
        let (a1, a2) = accelerations(atom, field, consts)?;
        Self::canonical(a1, a2, t0, period, laser_phases, atom.mass, consts.hbar)
    }

    /// Durations of the free-evolution segments between adjacent pulses.
    pub fn segment_durations(&self) -> Vec<f64> {
        self.pulses.windows(2).map(|w| w[1].time - w[0].time).collect()
    }

    /// Time from first to last pulse.
    pub fn total_time(&self) -> f64 {
        self.pulses.last().unwrap().time - self.t0
    }

    /// True for four pulses with areas (pi/2, pi, pi, pi/2).
    pub fn is_canonical_areas(&self) -> bool {
        use std::f64::consts::{FRAC_PI_2, PI};
        self.pulses.len() == 4
            && [FRAC_PI_2, PI, PI, FRAC_PI_2]
                .iter()
                .zip(&self.pulses)
                .all(|(want, p)| (p.area - want).abs() <= CANONICAL_AREA_TOL * want)
    }

    /// The pulse separation T if the timing is the closed 1:2:1 pattern,
    /// else None.
    pub fn period(&self) -> Option<f64> {
        if self.pulses.len() != 4 {
            return None;
        }
        let d = self.segment_durations();
        let t = d[0];
        let ok = (d[1] - 2.0 * t).abs() <= 1e-9 * t && (d[2] - t).abs() <= 1e-9 * t;
        ok.then_some(t)
    }

    fn require_canonical_areas(&self) -> Result<()> {
        if !self.is_canonical_areas() {
            return Err(CoreError::InvalidSequence(
                "requires the canonical pi/2, pi, pi, pi/2 four-pulse structure".into(),
            ));
        }
        Ok(())
    }

    /// Acceleration acting on segment `k` (0-based) of the given branch.
    /// Pulses alternate the internal state, so accelerations alternate,
    /// starting with a1 on the lower branch and a2 on the upper.
    fn segment_acceleration(&self, branch: Branch, k: usize) -> f64 {
        let first = match branch {
            Branch::Lower => self.a1,
            Branch::Upper => self.a2,
        };
        let second = match branch {
            Branch::Lower => self.a2,
            Branch::Upper => self.a1,
        };
        if k % 2 == 0 {
            first
        } else {
            second
        }
    }
}

/// Exact evolution operator in a linear potential, in normal form
/// exp(i phase) * D(disp_z, disp_p) * U0(free_time), where D is the unitary
/// phase-space displacement and U0 free kinetic evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorNormalForm {
    /// Scalar phase, rad.
    pub phase: f64,
    /// Position displacement, m.
    pub disp_z: f64,
    /// Momentum displacement, kg m/s.
    pub disp_p: f64,
    /// Free-evolution duration, s (non-negative).
    pub free_time: f64,
}

impl OperatorNormalForm {
    pub fn identity() -> Self {
        Self {
            phase: 0.0,
            disp_z: 0.0,
            disp_p: 0.0,
            free_time: 0.0,
        }
    }

    /// Normal form of evolution under constant acceleration `a` for
    /// `duration`: phase m a^2 T^3 / (12 hbar), displacement
    /// (a T^2 / 2, m a T), free time T.
    pub fn linear_evolution(a: f64, duration: f64, mass: f64, hbar: f64) -> Result<Self> {
        if !duration.is_finite() || duration < 0.0 {
            return Err(CoreError::OutOfDomain {
                name: "duration",
                value: duration,
                domain: "[0, inf)",
            });
        }
        Ok(Self {
            phase: mass * a * a * duration.powi(3) / (12.0 * hbar),
            disp_z: 0.5 * a * duration * duration,
            disp_p: mass * a * duration,
            free_time: duration,
        })
    }

    /// Operator product self * right (self acts later). Exact rules:
    /// free evolution commutes past a displacement by advancing its
    /// position component, adjacent displacements fuse with the symplectic
    /// phase (P_l Z_r' - P_r Z_l) / (2 hbar), free times add.
    pub fn compose(&self, right: &Self, mass: f64, hbar: f64) -> Self {
        let z_r = right.disp_z + right.disp_p * self.free_time / mass;
        let fusion = (self.disp_p * z_r - right.disp_p * self.disp_z) / (2.0 * hbar);
        Self {
            phase: self.phase + right.phase + fusion,
            disp_z: self.disp_z + z_r,
            disp_p: self.disp_p + right.disp_p,
            free_time: self.free_time + right.free_time,
        }
    }

    /// Relative operator from.adjoint() * to for two forms with equal free
    /// time. The free evolutions cancel, leaving a pure displacement with
    /// phase; this is what a branch overlap measures.
    pub fn relative(from: &Self, to: &Self, mass: f64, hbar: f64) -> Result<Self> {
        let tau = from.free_time;
        if (to.free_time - tau).abs() > 1e-12 * tau.abs().max(1.0) {
            return Err(CoreError::InvalidSequence(format!(
                "relative form needs equal free times, got {} and {}",
                tau, to.free_time
            )));
        }
        let fusion = (to.disp_p * from.disp_z - from.disp_p * to.disp_z) / (2.0 * hbar);
        let delta_p = to.disp_p - from.disp_p;
        Ok(Self {
            phase: to.phase - from.phase + fusion,
            disp_z: to.disp_z - from.disp_z - delta_p * tau / mass,
            disp_p: delta_p,
            free_time: 0.0,
        })
    }
}

/// Interferometer output computed from the two branch operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchResult {
    /// Fringe contrast in [0, 1]. 1 for closed geometries; for open ones
    /// the overlap of the displaced packets when a reference packet is
    /// supplied, 0 otherwise (no packet, no overlap known).
    pub contrast: f64,
    /// Phase of the branch overlap excluding laser phases, rad. Not
    /// wrapped; closed geometries give the exact cubic-in-T phase.
    pub interferometer_phase: f64,
    /// Total laser phase with the +1, -2, +2, -1 pulse weights, rad.
    pub laser_phase_total: f64,
    /// True when the branches close in phase space.
    pub closed: bool,
}

/// Apply the two-level pulse unitary of area theta and laser phase phi to
/// internal amplitudes (c1, c2):
///
/// c1' = cos(theta/2) c1 - i e^{+i phi} sin(theta/2) c2
/// c2' = -i e^{-i phi} sin(theta/2) c1 + cos(theta/2) c2
pub fn pulse_unitary_action(
    area: f64,
    laser_phase: f64,
    amps: (Complex64, Complex64),
) -> Result<(Complex64, Complex64)> {
    validate_area(area)?;
    let (c1, c2) = amps;
    let cos = (0.5 * area).cos();
    let sin = (0.5 * area).sin();
    let mix = Complex64::new(0.0, -sin); // -i sin(theta/2)
    let up = Complex64::from_polar(1.0, laser_phase);
    Ok((cos * c1 + mix * up * c2, mix * up.conj() * c1 + cos * c2))
}

/// Pulse area from sampled Rabi envelopes on a uniform time grid:
/// theta = integral(rabi1 * rabi2) / (2 detuning). The envelopes must
/// vanish at both ends; the instantaneous-pulse unitary assumes adiabatic
/// switch-on and switch-off of the fields.
pub fn pulse_area_from_envelopes(
    dt: f64,
    rabi1: &[f64],
    rabi2: &[f64],
    detuning: f64,
) -> Result<f64> {
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(CoreError::OutOfDomain {
            name: "detuning",
            value: detuning,
            domain: "nonzero finite",
        });
    }
    if !(dt > 0.0) {
        return Err(CoreError::NonPositive {
            name: "dt",
            value: dt,
        });
    }
    if rabi1.len() != rabi2.len() {
        return Err(CoreError::InvalidSamples(format!(
            "envelope lengths differ: {} vs {}",
            rabi1.len(),
            rabi2.len()
        )));
    }
    let n = rabi1.len();
    if n < 3 || n % 2 == 0 {
        return Err(CoreError::InvalidSamples(format!(
            "need an odd sample count >= 3 for Simpson quadrature, got {n}"
        )));
    }
    let product: Vec<f64> = rabi1.iter().zip(rabi2).map(|(a, b)| a * b).collect();
    let peak = product.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge = product[0].abs().max(product[n - 1].abs());
    if peak > 0.0 && edge > 1e-9 * peak {
        return Err(CoreError::InvalidSamples(
            "envelopes must vanish at the pulse edges".into(),
        ));
    }
    Ok(crate::util::simpson_uniform(dt, &product) / (2.0 * detuning))
}

/// Total laser phase of the four-pulse sequence:
/// phi0 - 2 phi1 + 2 phi2 - phi3. Annihilates constant, linear, and
/// quadratic phase ramps over the 1:2:1 timing.
pub fn total_laser_phase(phases: [f64; 4]) -> f64 {
    phases[0] - 2.0 * phases[1] + 2.0 * phases[2] - phases[3]
}

/// Exact branch evolution operator: the time-ordered product of the
/// constant-acceleration segments seen by that branch (earliest rightmost).
pub fn branch_operator(seq: &InterferometerSequence, branch: Branch) -> Result<OperatorNormalForm> {
    let durations = seq.segment_durations();
    let mut op = OperatorNormalForm::identity();
    for (k, d) in durations.iter().enumerate() {
        let a = seq.segment_acceleration(branch, k);
        let segment = OperatorNormalForm::linear_evolution(a, *d, seq.mass, seq.hbar)?;
        op = segment.compose(&op, seq.mass, seq.hbar);
    }
    Ok(op)
}

/// Overlap expectation of a displacement operator in a fresh Gaussian
/// packet with center z, velocity v, width w:
/// exp[i (delta_p z - delta_z m v) / hbar]
/// * exp[-delta_z^2/(4 w^2) - delta_p^2 w^2/(4 hbar^2)].
pub fn displaced_gaussian_overlap(
    delta_z: f64,
    delta_p: f64,
    packet: &GaussianPacket,
    mass: f64,
    hbar: f64,
) -> Complex64 {
    let w = packet.width;
    let magnitude =
        (-delta_z * delta_z / (4.0 * w * w) - delta_p * delta_p * w * w / (4.0 * hbar * hbar))
            .exp();
    let phase = (delta_p * packet.center - delta_z * mass * packet.velocity) / hbar;
    Complex64::from_polar(magnitude, phase)
}

fn require_fresh(packet: &GaussianPacket) -> Result<()> {
    if !packet.is_fresh() {
        return Err(CoreError::InvalidPacket(
            "reference packet must be minimum-uncertainty (unspread)".into(),
        ));
    }
    Ok(())
}

/// Relative branch form upper.adjoint() * lower together with the closure
/// decision scales.
fn relative_branch_form(seq: &InterferometerSequence) -> Result<(OperatorNormalForm, bool)> {
    let lower = branch_operator(seq, Branch::Lower)?;
    let upper = branch_operator(seq, Branch::Upper)?;
    let rel = OperatorNormalForm::relative(&upper, &lower, seq.mass, seq.hbar)?;
    let a_max = seq.a1.abs().max(seq.a2.abs());
    let t_tot = seq.total_time();
    let z_scale = lower
        .disp_z
        .abs()
        .max(upper.disp_z.abs())
        .max(0.5 * a_max * t_tot * t_tot);
    let p_scale = lower
        .disp_p
        .abs()
        .max(upper.disp_p.abs())
        .max(seq.mass * a_max * t_tot);
    let closed =
        rel.disp_z.abs() <= CLOSURE_TOL * z_scale && rel.disp_p.abs() <= CLOSURE_TOL * p_scale;
    Ok((rel, closed))
}

/// Interferometer phase, laser phase, contrast, and closure flag from the
/// exact operator algebra. Requires canonical pulse areas; timing is free.
/// For open geometries the contrast and the packet-dependent part of the
/// phase need a reference packet; without one contrast is reported as 0.
pub fn interferometer_phase(
    seq: &InterferometerSequence,
    packet: Option<&GaussianPacket>,
) -> Result<BranchResult> {
    seq.require_canonical_areas()?;
    let (rel, closed) = relative_branch_form(seq)?;
    let laser_phase_total = total_laser_phase([
        seq.pulses[0].laser_phase,
        seq.pulses[1].laser_phase,
        seq.pulses[2].laser_phase,
        seq.pulses[3].laser_phase,
    ]);
    let (contrast, phase) = if closed {
        (1.0, rel.phase)
    } else if let Some(p) = packet {
        require_fresh(p)?;
        let overlap = displaced_gaussian_overlap(rel.disp_z, rel.disp_p, p, seq.mass, seq.hbar);
        (overlap.norm(), rel.phase + overlap.arg())
    } else {
        (0.0, rel.phase)
    };
    Ok(BranchResult {
        contrast,
        interferometer_phase: phase,
        laser_phase_total,
        closed,
    })
}

/// Branch-overlap contrast for a closed or open sequence with the given
/// fresh reference packet.
pub fn gaussian_contrast(seq: &InterferometerSequence, packet: &GaussianPacket) -> Result<f64> {
    seq.require_canonical_areas()?;
    require_fresh(packet)?;
    let (rel, _) = relative_branch_form(seq)?;
    Ok(displaced_gaussian_overlap(rel.disp_z, rel.disp_p, packet, seq.mass, seq.hbar).norm())
}

/// Interferometer phase of the closed sequence directly from atom and field
/// parameters, bypassing the operator algebra:
/// -(mu_B/hbar) g_F m_F grad_bz (2 g + (mu_B/m) g_F m_F grad_bz) T^3.
pub fn interferometer_phase_from_fields(
    atom: &AtomConfig,
    field: &FieldConfig,
    consts: &PhysicalConstants,
    period: f64,
) -> Result<f64> {
    if !(period > 0.0) {
        return Err(CoreError::NonPositive {
            name: "period",
            value: period,
        });
    }
    let s = atom.sensitive();
    if atom.reference().m_quantum != 0 {
        return Err(CoreError::InvalidAtom(
            "reference state must be magnetically inert".into(),
        ));
    }
    let k = consts.mu_bohr * s.lande_g * f64::from(s.m_quantum) * field.grad_bz;
    Ok(-k / consts.hbar * (2.0 * field.g + k / atom.mass) * period.powi(3))
}

/// Pulse separations (t2 - t1, t3 - t2) that close the interferometer for
/// a given first separation t10: exactly (2 t10, t10), independent of the
/// accelerations as long as they differ (equal accelerations close for any
/// timing and give no interferometer).
pub fn solve_closure(a1: f64, a2: f64, t10: f64) -> Result<(f64, f64)> {
    if !(t10 > 0.0) {
        return Err(CoreError::NonPositive {
            name: "t10",
            value: t10,
        });
    }
    let scale = a1.abs().max(a2.abs());
    if (a1 - a2).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(CoreError::Degenerate(
            "equal accelerations: any timing closes and no phase accumulates".into(),
        ));
    }
    Ok((2.0 * t10, t10))
}

/// Phase and probability-sign marker of the two-photon accelerometer with
/// three pulses at 0, T, 2T and wavenumbers k1, k2: phase (k1 + k2) g T^2,
/// and the population formula carries a -cos (sign -1), unlike the +cos of
/// the four-pulse geometry.
pub fn kasevich_chu_phase(k1: f64, k2: f64, g: f64, period: f64) -> (f64, i8) {
    ((k1 + k2) * g * period * period, -1)
}

/// Three-pulse laser phase combination phi0 - 2 phi1 + phi2. Annihilates
/// constant and linear ramps only; a quadratic ramp c t^2 over (0, T, 2T)
/// leaks 2 c T^2.
pub fn kasevich_chu_laser_phase(phases: [f64; 3]) -> f64 {
    phases[0] - 2.0 * phases[1] + phases[2]
}

/// One term of the internal-state superposition: which state it is in, its
/// complex coefficient, and the external evolution operator applied so far.
#[derive(Debug, Clone)]
struct BranchTerm {
    state: StateLabel,
    coeff: Complex64,
    form: OperatorNormalForm,
}

/// Exit-port content of the full state-sequence bookkeeping.
#[derive(Debug, Clone)]
pub struct PortComponent {
    /// Coefficient including the accumulated operator phase.
    pub amplitude: Complex64,
    /// Geometric summary of the displaced, spread packet of this component.
    /// Position-dependent phase structure is not representable here;
    /// populations are computed from exact pairwise overlaps instead.
    pub packet: GaussianPacket,
}

/// Populations and per-port components after the full pulse sequence.
#[derive(Debug, Clone)]
pub struct ExitPorts {
    pub p_g1: f64,
    pub p_g2: f64,
    pub port_g1: Vec<PortComponent>,
    pub port_g2: Vec<PortComponent>,
}

/// Run the canonical four-pulse sequence as explicit state bookkeeping:
/// split, swap, swap, close. Returns exit-port amplitudes, packets, and
/// populations. Populations follow
/// P_g2 = (1 + C cos(phi_i + phi_L)) / 2 and P_g1 = 1 - P_g2 for a closed
/// geometry started in G1.
pub fn run_state_sequence(
    seq: &InterferometerSequence,
    initial: StateLabel,
    packet: &GaussianPacket,
) -> Result<ExitPorts> {
    seq.require_canonical_areas()?;
    require_fresh(packet)?;

    let durations = seq.segment_durations();
    let mut terms = vec![BranchTerm {
        state: initial,
        coeff: Complex64::new(1.0, 0.0),
        form: OperatorNormalForm::identity(),
    }];

    for (k, pulse) in seq.pulses.iter().enumerate() {
        if k > 0 {
            let d = durations[k - 1];
            for term in &mut terms {
                let a = match term.state {
                    StateLabel::G1 => seq.a1,
                    StateLabel::G2 => seq.a2,
                };
                let segment = OperatorNormalForm::linear_evolution(a, d, seq.mass, seq.hbar)?;
                term.form = segment.compose(&term.form, seq.mass, seq.hbar);
            }
        }
        let cos = (0.5 * pulse.area).cos();
        let sin = (0.5 * pulse.area).sin();
        let mut next = Vec::with_capacity(terms.len() * 2);
        for term in &terms {
            let stay = term.coeff * cos;
            if stay.norm() > 1e-14 {
                next.push(BranchTerm {
                    state: term.state,
                    coeff: stay,
                    form: term.form,
                });
            }
            // Swap factor -i e^{-i phi} for G1 -> G2, -i e^{+i phi} back.
            let sign = match term.state {
                StateLabel::G1 => -pulse.laser_phase,
                StateLabel::G2 => pulse.laser_phase,
            };
            let swap = term.coeff * Complex64::new(0.0, -sin) * Complex64::from_polar(1.0, sign);
            if swap.norm() > 1e-14 {
                next.push(BranchTerm {
                    state: term.state.other(),
                    coeff: swap,
                    form: term.form,
                });
            }
        }
        terms = next;
    }

    let population = |state: StateLabel, terms: &[BranchTerm]| -> Result<f64> {
        let members: Vec<&BranchTerm> = terms.iter().filter(|t| t.state == state).collect();
        let mut p = 0.0;
        for b in &members {
            for b2 in &members {
                let rel = OperatorNormalForm::relative(&b.form, &b2.form, seq.mass, seq.hbar)?;
                let overlap = Complex64::from_polar(1.0, rel.phase)
                    * displaced_gaussian_overlap(rel.disp_z, rel.disp_p, packet, seq.mass, seq.hbar);
                p += (b.coeff.conj() * b2.coeff * overlap).re;
            }
        }
        Ok(p)
    };
    let p_g1 = population(StateLabel::G1, &terms)?;
    let p_g2 = population(StateLabel::G2, &terms)?;

    let spreading = packet.spreading_time(seq.mass, seq.hbar);
    let component = |term: &BranchTerm| -> PortComponent {
        let tau = term.form.free_time;
        PortComponent {
            amplitude: term.coeff * Complex64::from_polar(1.0, term.form.phase),
            packet: GaussianPacket {
                center: packet.center + packet.velocity * tau + term.form.disp_z,
                velocity: packet.velocity + term.form.disp_p / seq.mass,
                width: packet.width * (1.0 + (tau / spreading).powi(2)).sqrt(),
                global_phase: packet.global_phase,
                time: packet.time + tau,
                initial_width: packet.initial_width,
                initial_time: packet.initial_time,
            },
        }
    };
    Ok(ExitPorts {
        p_g1,
        p_g2,
        port_g1: terms
            .iter()
            .filter(|t| t.state == StateLabel::G1)
            .map(component)
            .collect(),
        port_g2: terms
            .iter()
            .filter(|t| t.state == StateLabel::G2)
            .map(component)
            .collect(),
    })
}

/// Length and time scales used to map an SI problem to natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    /// Time unit, s: the first pulse separation.
    pub time: f64,
    /// Length unit, m: sqrt(hbar * time / mass).
    pub length: f64,
}

/// Rescale a sequence and packet to hbar = mass = 1 with the first pulse
/// separation as the time unit and the first pulse at t = 0. All phases,
/// areas, populations, and contrasts are invariant under this map.
pub fn nondimensionalize(
    seq: &InterferometerSequence,
    packet: &GaussianPacket,
) -> Result<(InterferometerSequence, GaussianPacket, Scales)> {
    let t_unit = seq.pulses[1].time - seq.pulses[0].time;
    let l_unit = (seq.hbar * t_unit / seq.mass).sqrt();
    let t0 = seq.t0;
    let pulses = seq
        .pulses
        .iter()
        .map(|p| PulseEvent::new((p.time - t0) / t_unit, p.area, p.laser_phase))
        .collect::<Result<Vec<_>>>()?;
    let acc = t_unit * t_unit / l_unit;
    let seq_nat = InterferometerSequence::new(pulses, seq.a1 * acc, seq.a2 * acc, 1.0, 1.0)?;
    let packet_nat = GaussianPacket {
        center: packet.center / l_unit,
        velocity: packet.velocity * t_unit / l_unit,
        width: packet.width / l_unit,
        global_phase: packet.global_phase,
        time: (packet.time - t0) / t_unit,
        initial_width: packet.initial_width / l_unit,
        initial_time: (packet.initial_time - t0) / t_unit,
    };
    Ok((
        seq_nat,
        packet_nat,
        Scales {
            time: t_unit,
            length: l_unit,
        },
    ))
}
