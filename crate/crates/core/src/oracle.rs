//! Grid oracle: split-step Fourier propagation of the two-component
//! wavefunction. No operator algebra, no classical trajectories; just the
//! Schroedinger equation on a periodic grid. Used to validate the analytic
//! engines.
//!
//! Everything here works in natural units, `hbar = mass = 1`; rescale SI
//! problems with [`crate::sequence::nondimensionalize`] first. Functions
//! reject sequences carrying any other unit system.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::phasespace::{classical_solution, BranchForceProfile, PhaseSpaceVector};
use crate::propagator::{classical_action, GaussianPacket, LinearPotentialSpec};
use crate::sequence::{Branch, InterferometerSequence, StateLabel};
use crate::util::simpson_uniform_complex;

/// Periodic spatial grid with z_j = z_min + j (z_max - z_min) / n for
/// j = 0 .. n-1 (the right edge is the periodic image of the left).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    z_min: f64,
    z_max: f64,
    n: usize,
}

/// Largest grid the sizing heuristic will propose before giving up.
const MAX_GRID_POINTS: usize = 1 << 21;

impl Grid {
    pub fn new(z_min: f64, z_max: f64, n: usize) -> Result<Self> {
        if !z_min.is_finite() || !z_max.is_finite() || z_min >= z_max {
            return Err(CoreError::Grid(format!(
                "need finite z_min < z_max, got [{z_min}, {z_max}]"
            )));
        }
        if n < 256 || !n.is_power_of_two() {
            return Err(CoreError::Grid(format!(
                "point count must be a power of two >= 256, got {n}"
            )));
        }
        Ok(Self { z_min, z_max, n })
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing.
    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / self.n as f64
    }

    /// Wavenumber spacing 2 pi / (n dz).
    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.z_max - self.z_min)
    }

    pub fn points(&self) -> Vec<f64> {
        let dz = self.dz();
        (0..self.n).map(|j| self.z_min + j as f64 * dz).collect()
    }

    /// FFT-ordered wavenumbers: j dk for j < n/2, then (j - n) dk.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = self.dk();
        (0..self.n)
            .map(|j| {
                if j < self.n / 2 {
                    j as f64 * dk
                } else {
                    (j as f64 - self.n as f64) * dk
                }
            })
            .collect()
    }

    /// Grid sized for a sequence and launch packet (natural units): spans
    /// the classical branch envelope plus ten final widths of padding, with
    /// spacing resolving both the envelope width and the occupied
    /// wavenumbers.
    pub fn suggested(seq: &InterferometerSequence, packet: &GaussianPacket) -> Result<Self> {
        require_natural(seq)?;
        let env = branch_envelope(seq, packet)?;
        let w0 = packet.width;
        let t_total = seq.total_time();
        let t_s = packet.initial_width * packet.initial_width;
        let w_max = packet.initial_width
            * (1.0 + ((packet.elapsed() + t_total) / t_s).powi(2)).sqrt();
        let pad = 10.0 * w_max.max(w0);
        let extent = (env.z_hi - env.z_lo) + 2.0 * pad;
        let k_occ = env.v_max + 6.4 / w0;
        let dz = (w0 / 6.0).min(std::f64::consts::PI / (1.3 * k_occ));
        let n_raw = (extent / dz).ceil() as usize;
        let n = n_raw.next_power_of_two().max(256);
        if n > MAX_GRID_POINTS {
            return Err(CoreError::Grid(format!(
                "sequence needs {n} grid points (> {MAX_GRID_POINTS}); \
                 rescale the problem or coarsen the request"
            )));
        }
        // Distribute the power-of-two rounding slack symmetrically.
        let slack = n as f64 * dz - (env.z_hi - env.z_lo);
        let z_min = env.z_lo - slack / 2.0;
        Grid::new(z_min, z_min + n as f64 * dz, n)
    }
}

/// Two-component wavefunction sampled on a grid.
#[derive(Debug, Clone)]
pub struct GridWavefunction {
    pub grid: Grid,
    pub amp_g1: Vec<Complex64>,
    pub amp_g2: Vec<Complex64>,
    /// Current time, natural units.
    pub time: f64,
}

impl GridWavefunction {
    /// Total norm, sqrt of the summed probability.
    pub fn norm(&self) -> f64 {
        let dz = self.grid.dz();
        let s: f64 = self
            .amp_g1
            .iter()
            .chain(&self.amp_g2)
            .map(|c| c.norm_sqr())
            .sum();
        (s * dz).sqrt()
    }

    /// Probability in each internal state.
    pub fn populations(&self) -> (f64, f64) {
        let dz = self.grid.dz();
        let p = |a: &[Complex64]| a.iter().map(|c| c.norm_sqr()).sum::<f64>() * dz;
        (p(&self.amp_g1), p(&self.amp_g2))
    }

    /// Mean and variance of position over the total density.
    pub fn position_moments(&self) -> (f64, f64) {
        let dz = self.grid.dz();
        let pts = self.grid.points();
        let mut norm = 0.0;
        let mut mean = 0.0;
        for (z, (a, b)) in pts.iter().zip(self.amp_g1.iter().zip(&self.amp_g2)) {
            let rho = a.norm_sqr() + b.norm_sqr();
            norm += rho;
            mean += rho * z;
        }
        mean /= norm;
        let mut var = 0.0;
        for (z, (a, b)) in pts.iter().zip(self.amp_g1.iter().zip(&self.amp_g2)) {
            var += (a.norm_sqr() + b.norm_sqr()) * (z - mean) * (z - mean);
        }
        var /= norm;
        let _ = dz; // density ratios: dz cancels
        (mean, var)
    }
}

fn require_natural(seq: &InterferometerSequence) -> Result<()> {
    if seq.mass != 1.0 {
        return Err(CoreError::NaturalUnits {
            name: "mass",
            value: seq.mass,
        });
    }
    if seq.hbar != 1.0 {
        return Err(CoreError::NaturalUnits {
            name: "hbar",
            value: seq.hbar,
        });
    }
    Ok(())
}

/// Sample a Gaussian packet (fresh or spread, natural units) into the given
/// internal state on the grid. The other component is zero.
pub fn init_gaussian(
    grid: &Grid,
    packet: &GaussianPacket,
    state: StateLabel,
) -> Result<GridWavefunction> {
    let w = packet.width;
    let c = packet.center;
    if grid.dz() > w / 4.0 {
        return Err(CoreError::Grid(format!(
            "grid spacing {} too coarse for packet width {w}",
            grid.dz()
        )));
    }
    let last = grid.z_min + (grid.len() - 1) as f64 * grid.dz();
    if c - 8.0 * w < grid.z_min || c + 8.0 * w > last {
        return Err(CoreError::GridEdge {
            widths: ((c - grid.z_min).min(last - c) / w).max(0.0),
            time: packet.time,
        });
    }
    let t_s = packet.initial_width * packet.initial_width;
    let tau = packet.elapsed() / t_s;
    let prefactor = (std::f64::consts::PI.sqrt() * w).sqrt().recip();
    let amp: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&z| {
            let envelope = prefactor * (-(z - c) * (z - c) / (2.0 * w * w)).exp();
            let phase = packet.global_phase
                + packet.velocity * z
                + tau * (z * z - 2.0 * c * z) / (2.0 * w * w);
            envelope * Complex64::from_polar(1.0, phase)
        })
        .collect();
    let zero = vec![Complex64::ZERO; grid.len()];
    let (amp_g1, amp_g2) = match state {
        StateLabel::G1 => (amp, zero),
        StateLabel::G2 => (zero, amp),
    };
    Ok(GridWavefunction {
        grid: grid.clone(),
        amp_g1,
        amp_g2,
        time: packet.time,
    })
}

/// Apply the instantaneous pulse unitary pointwise to both components.
pub fn apply_pulse(psi: &mut GridWavefunction, area: f64, laser_phase: f64) -> Result<()> {
    crate::sequence::validate_area(area)?;
    let cos = (0.5 * area).cos();
    let mix = Complex64::new(0.0, -(0.5 * area).sin());
    let up = Complex64::from_polar(1.0, laser_phase);
    let m12 = mix * up;
    let m21 = mix * up.conj();
    for (a, b) in psi.amp_g1.iter_mut().zip(psi.amp_g2.iter_mut()) {
        let (c1, c2) = (*a, *b);
        *a = cos * c1 + m12 * c2;
        *b = m21 * c1 + cos * c2;
    }
    Ok(())
}

struct SplitStepPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kinetic: Vec<Complex64>,
    inv_n: f64,
}

impl SplitStepPlan {
    fn new(grid: &Grid, dt: f64) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.len();
        let kinetic = grid
            .wavenumbers()
            .iter()
            .map(|k| Complex64::from_polar(1.0, -0.5 * k * k * dt))
            .collect();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            kinetic,
            inv_n: 1.0 / n as f64,
        }
    }

    fn kinetic_step(&self, amp: &mut [Complex64]) {
        self.forward.process(amp);
        for (a, k) in amp.iter_mut().zip(&self.kinetic) {
            *a *= k;
        }
        self.inverse.process(amp);
        for a in amp.iter_mut() {
            *a *= self.inv_n;
        }
    }
}

fn phase_ramp(points: &[f64], rate: f64) -> Vec<Complex64> {
    points
        .iter()
        .map(|&z| Complex64::from_polar(1.0, rate * z))
        .collect()
}

fn is_occupied(amp: &[Complex64]) -> bool {
    amp.iter().any(|c| c.norm_sqr() > 0.0)
}

/// Strang split-step evolution for `duration` in `steps` equal steps under
/// the linear potentials with accelerations `a1` (first component) and
/// `a2` (second): half potential, full kinetic, half potential, with
/// interior half steps merged. The per-step splitting defect for a linear
/// potential is a pure global phase a^2 dt^3 / 24, so state-resolved
/// population and every relative phase between equal-schedule runs are
/// exact to machine precision; absolute phases converge as dt^2.
pub fn evolve_linear(
    psi: &mut GridWavefunction,
    a1: f64,
    a2: f64,
    duration: f64,
    steps: usize,
) -> Result<()> {
    if !duration.is_finite() || duration < 0.0 {
        return Err(CoreError::OutOfDomain {
            name: "duration",
            value: duration,
            domain: "[0, inf)",
        });
    }
    if steps == 0 {
        return Err(CoreError::NonPositive {
            name: "steps",
            value: 0.0,
        });
    }
    if duration == 0.0 {
        return Ok(());
    }
    let dt = duration / steps as f64;
    let plan = SplitStepPlan::new(&psi.grid, dt);
    let points = psi.grid.points();
    for (amp, a) in [(&mut psi.amp_g1, a1), (&mut psi.amp_g2, a2)] {
        if !is_occupied(amp) {
            continue;
        }
        // exp(-i V dt / hbar) with V = -a z: phase +a z dt per full step.
        let half = phase_ramp(&points, 0.5 * a * dt);
        let full = phase_ramp(&points, a * dt);
        for (c, f) in amp.iter_mut().zip(&half) {
            *c *= f;
        }
        for step in 0..steps {
            plan.kinetic_step(amp);
            let factor = if step + 1 == steps { &half } else { &full };
            for (c, f) in amp.iter_mut().zip(factor) {
                *c *= f;
            }
        }
        // Wrap-around guard: the packet must not have reached the edges.
        let peak = amp.iter().fold(0.0f64, |m, c| m.max(c.norm_sqr())).sqrt();
        let edge = amp[..3]
            .iter()
            .chain(&amp[amp.len() - 3..])
            .fold(0.0f64, |m, c| m.max(c.norm()));
        if edge > 1e-6 * peak {
            return Err(CoreError::Grid(format!(
                "edge amplitude {:.2e} of peak after evolution to t = {}; \
                 enlarge the grid",
                edge / peak,
                psi.time + duration
            )));
        }
    }
    psi.time += duration;
    Ok(())
}

/// Classical envelope of both branches launched from the packet's phase
/// space point, natural units.
struct BranchEnvelope {
    z_lo: f64,
    z_hi: f64,
    v_max: f64,
    t_lo: f64,
    t_hi: f64,
}

fn branch_envelope(
    seq: &InterferometerSequence,
    packet: &GaussianPacket,
) -> Result<BranchEnvelope> {
    let chi0 = PhaseSpaceVector::new(packet.center, packet.velocity);
    let mut env = BranchEnvelope {
        z_lo: packet.center,
        z_hi: packet.center,
        v_max: packet.velocity.abs(),
        t_lo: seq.t0,
        t_hi: seq.t0,
    };
    let mut note = |z: f64, t: f64| {
        if z < env.z_lo {
            env.z_lo = z;
            env.t_lo = t;
        }
        if z > env.z_hi {
            env.z_hi = z;
            env.t_hi = t;
        }
    };
    for branch in [Branch::Lower, Branch::Upper] {
        let profile = BranchForceProfile::from_sequence(seq, branch)?;
        for seg in &profile.segments {
            let start = classical_solution(chi0, &profile, seg.start)?;
            let end = classical_solution(chi0, &profile, seg.end)?;
            note(start.position, seg.start);
            note(end.position, seg.end);
            env.v_max = env.v_max.max(start.momentum.abs()).max(end.momentum.abs());
            // Interior turning point of the parabolic segment, if any.
            if seg.accel != 0.0 {
                let t_star = seg.start - start.momentum / seg.accel;
                if t_star > seg.start && t_star < seg.end {
                    note(classical_solution(chi0, &profile, t_star)?.position, t_star);
                }
            }
        }
    }
    Ok(env)
}

/// Result of a full grid run of a pulse sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericRun {
    /// Final population of the reference state.
    pub p_g1: f64,
    /// Final population of the sensitive state.
    pub p_g2: f64,
    /// Branch overlap <upper|lower> from a pulse-free two-copy run:
    /// magnitude is the contrast, argument the interferometer phase
    /// (laser phases excluded).
    pub overlap: Complex64,
    /// Time step used.
    pub dt: f64,
    /// Total split steps per component.
    pub steps: usize,
}

/// Time step from a quarter-pi phase-excursion bound per step, evaluated
/// over the grid extent (potential) and the occupied wavenumbers (kinetic).
fn step_budget(
    grid: &Grid,
    seq: &InterferometerSequence,
    packet: &GaussianPacket,
    env: &BranchEnvelope,
) -> f64 {
    use std::f64::consts::PI;
    let a_max = seq.a1.abs().max(seq.a2.abs());
    let z_abs = grid.z_min.abs().max(grid.z_max.abs());
    let k_occ = env.v_max + 6.4 / packet.width;
    let dt_v = if a_max > 0.0 {
        PI / (4.0 * a_max * z_abs)
    } else {
        f64::INFINITY
    };
    let dt_k = PI / (2.0 * k_occ * k_occ);
    dt_v.min(dt_k)
}

fn segment_steps(duration: f64, dt_target: f64) -> usize {
    ((duration / dt_target - 1e-9).ceil().max(4.0)) as usize
}

/// Propagate the full two-component problem through the pulse sequence on
/// the grid and measure the branch overlap with a second, pulse-free
/// two-copy run (first slot follows the lower branch accelerations, second
/// slot the upper). Natural units and canonical pulse areas required; the
/// packet must be prepared at the first pulse time.
pub fn run_sequence_numeric(
    seq: &InterferometerSequence,
    packet: &GaussianPacket,
    initial: StateLabel,
    grid: &Grid,
) -> Result<NumericRun> {
    require_natural(seq)?;
    if !seq.is_canonical_areas() {
        return Err(CoreError::InvalidSequence(
            "grid run expects the canonical pi/2, pi, pi, pi/2 structure".into(),
        ));
    }
    let span = seq.total_time().max(1.0);
    if (packet.time - seq.t0).abs() > 1e-9 * span {
        return Err(CoreError::InvalidSequence(format!(
            "packet is prepared at t = {}, sequence starts at t = {}",
            packet.time, seq.t0
        )));
    }

    let env = branch_envelope(seq, packet)?;
    let t_s = packet.initial_width * packet.initial_width;
    let w_max = packet.initial_width
        * (1.0 + ((packet.elapsed() + seq.total_time()) / t_s).powi(2)).sqrt();
    let last = grid.z_min() + (grid.len() - 1) as f64 * grid.dz();
    let margin = ((env.z_lo - grid.z_min()) / w_max).min((last - env.z_hi) / w_max);
    if margin < 8.0 {
        let time = if env.z_lo - grid.z_min() < last - env.z_hi {
            env.t_lo
        } else {
            env.t_hi
        };
        return Err(CoreError::GridEdge {
            widths: margin.max(0.0),
            time,
        });
    }

    let dt_target = step_budget(grid, seq, packet, &env);
    let durations = seq.segment_durations();
    let plan: Vec<usize> = durations
        .iter()
        .map(|d| segment_steps(*d, dt_target))
        .collect();

    // Full run with pulses: component 1 always feels a1, component 2 a2.
    let mut psi = init_gaussian(grid, packet, initial)?;
    for (k, pulse) in seq.pulses.iter().enumerate() {
        if k > 0 {
            evolve_linear(&mut psi, seq.a1, seq.a2, durations[k - 1], plan[k - 1])?;
        }
        apply_pulse(&mut psi, pulse.area, pulse.laser_phase)?;
    }
    let (p_g1, p_g2) = psi.populations();

    // Pulse-free branch copies sharing one step plan: slot 1 evolves under
    // the lower-branch schedule, slot 2 under the upper-branch schedule.
    // Identical step sizes make the splitting-defect phases cancel in the
    // overlap.
    let single = init_gaussian(grid, packet, StateLabel::G1)?;
    let mut copies = GridWavefunction {
        grid: grid.clone(),
        amp_g1: single.amp_g1.clone(),
        amp_g2: single.amp_g1.clone(),
        time: packet.time,
    };
    for (k, d) in durations.iter().enumerate() {
        let (a_lower, a_upper) = if k % 2 == 0 {
            (seq.a1, seq.a2)
        } else {
            (seq.a2, seq.a1)
        };
        evolve_linear(&mut copies, a_lower, a_upper, *d, plan[k])?;
    }
    let dz = grid.dz();
    let overlap = copies
        .amp_g2
        .iter()
        .zip(&copies.amp_g1)
        .map(|(u, l)| u.conj() * l)
        .sum::<Complex64>()
        * dz;

    Ok(NumericRun {
        p_g1,
        p_g2,
        overlap,
        dt: dt_target,
        steps: plan.iter().sum(),
    })
}

/// Result of a least-squares fringe fit P(x) = offset + amplitude cos(x + phase).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    pub offset: f64,
    pub amplitude: f64,
    /// None when the fringe is too shallow for the phase to mean anything.
    pub phase: Option<f64>,
    /// amplitude / offset.
    pub visibility: f64,
    /// Root-mean-square fit residual.
    pub residual_rms: f64,
}

/// Minimum visibility for which the fitted phase is reported.
const FRINGE_PHASE_FLOOR: f64 = 1e-6;

/// Fit a cosine fringe to (phase, population) samples by linear least
/// squares in (1, cos x, sin x). Needs at least 8 samples spanning at
/// least 1.9 pi for a well-conditioned fit.
pub fn extract_phase_from_fringe(samples: &[(f64, f64)]) -> Result<FringeFit> {
    if samples.len() < 8 {
        return Err(CoreError::InvalidSamples(format!(
            "fringe fit needs >= 8 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|(x, p)| !x.is_finite() || !p.is_finite()) {
        return Err(CoreError::InvalidSamples(
            "fringe samples must be finite".into(),
        ));
    }
    let x_lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let x_hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    if x_hi - x_lo < 1.9 * std::f64::consts::PI {
        return Err(CoreError::InvalidSamples(format!(
            "fringe scan spans {:.3} rad, need >= 1.9 pi",
            x_hi - x_lo
        )));
    }

    // Normal equations for the design matrix [1, cos x, sin x].
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (x, p) in samples {
        let row = [1.0, x.cos(), x.sin()];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * p;
        }
    }
    let sol = solve3(m, rhs).ok_or_else(|| {
        CoreError::InvalidSamples("fringe design matrix is singular".into())
    })?;
    let (offset, c1, c2) = (sol[0], sol[1], sol[2]);
    let amplitude = c1.hypot(c2);
    let visibility = if offset > 0.0 { amplitude / offset } else { 0.0 };
    let phase = (visibility >= FRINGE_PHASE_FLOOR).then(|| (-c2).atan2(c1));
    let ss: f64 = samples
        .iter()
        .map(|(x, p)| {
            let model = offset + c1 * x.cos() + c2 * x.sin();
            (p - model) * (p - model)
        })
        .sum();
    Ok(FringeFit {
        offset,
        amplitude,
        phase,
        visibility,
        residual_rms: (ss / samples.len() as f64).sqrt(),
    })
}

fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(m);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for r in 0..3 {
            mc[r][col] = rhs[r];
        }
        *o = det(mc) / d;
    }
    Some(out)
}

/// Propagate a sampled wavefunction through a linear potential by direct
/// quadrature against the exact kernel
/// sqrt(m / (2 pi hbar dt)) e^{-i pi/4} exp(i S_cl / hbar),
/// with S_cl the classical action. The samples start at `z_start` with
/// uniform spacing `dz` (odd count for Simpson) at time `t_i` and must
/// decay below 1e-12 of peak at both ends.
pub fn huygens_integral(
    z_start: f64,
    dz: f64,
    psi0: &[Complex64],
    spec: &LinearPotentialSpec,
    t_i: f64,
    t_f: f64,
    z_f: f64,
) -> Result<Complex64> {
    let dt = t_f - t_i;
    if !(dt > 0.0) {
        return Err(CoreError::TimeOrder {
            what: "huygens_integral needs t_f > t_i",
            t_i,
            t_f,
        });
    }
    if !(dz > 0.0) {
        return Err(CoreError::NonPositive {
            name: "dz",
            value: dz,
        });
    }
    let n = psi0.len();
    if n < 3 || n % 2 == 0 {
        return Err(CoreError::InvalidSamples(format!(
            "need an odd sample count >= 3 for Simpson quadrature, got {n}"
        )));
    }
    let peak = psi0.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if psi0[0].norm() > 1e-12 * peak || psi0[n - 1].norm() > 1e-12 * peak {
        return Err(CoreError::InvalidSamples(
            "initial samples must decay below 1e-12 of peak at both ends".into(),
        ));
    }
    let prefactor = (spec.mass / (2.0 * std::f64::consts::PI * spec.hbar * dt)).sqrt();
    let corner = Complex64::from_polar(prefactor, -std::f64::consts::FRAC_PI_4);
    let integrand: Vec<Complex64> = psi0
        .iter()
        .enumerate()
        .map(|(j, amp)| {
            let z_i = z_start + j as f64 * dz;
            let action = classical_action(z_i, t_i, z_f, t_f, spec)
                .expect("dt already validated positive");
            corner * Complex64::from_polar(1.0, action / spec.hbar) * amp
        })
        .collect();
    Ok(simpson_uniform_complex(dz, &integrand))
}
