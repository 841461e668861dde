//! Helpers shared by the integration-test targets.
#![allow(dead_code)]

use num_complex::Complex64;
use tcubed_core::oracle::{self, FringeFit, Grid};
use tcubed_core::propagator::{self, LinearPotentialSpec};
use tcubed_core::sequence::total_laser_phase;
use tcubed_core::{GaussianPacket, InterferometerSequence, StateLabel};

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x % two_pi;
    if y <= -std::f64::consts::PI {
        y += two_pi;
    } else if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}

/// Absolute difference of two angles modulo 2 pi.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Copy of `seq` with `delta` added to the first pulse's laser phase, which
/// adds exactly `delta` to the total laser phase.
pub fn with_laser_offset(seq: &InterferometerSequence, delta: f64) -> InterferometerSequence {
    let mut pulses = seq.pulses.clone();
    pulses[0].laser_phase += delta;
    InterferometerSequence::new(pulses, seq.a1, seq.a2, seq.mass, seq.hbar)
        .expect("phase shift keeps the sequence valid")
}

pub fn seq_laser_total(seq: &InterferometerSequence) -> f64 {
    total_laser_phase([
        seq.pulses[0].laser_phase,
        seq.pulses[1].laser_phase,
        seq.pulses[2].laser_phase,
        seq.pulses[3].laser_phase,
    ])
}

/// Scan the total laser phase over one full turn, run the grid solver at
/// each point, and fit the resulting fringe. Returns the samples
/// (total laser phase, P_g2) and the fit.
pub fn oracle_fringe(
    seq: &InterferometerSequence,
    packet: &GaussianPacket,
    grid: &Grid,
    n_points: usize,
) -> (Vec<(f64, f64)>, FringeFit) {
    let base = seq_laser_total(seq);
    let samples: Vec<(f64, f64)> = (0..n_points)
        .map(|k| {
            let delta = 2.0 * std::f64::consts::PI * k as f64 / (n_points - 1) as f64;
            let shifted = with_laser_offset(seq, delta);
            let run = oracle::run_sequence_numeric(&shifted, packet, StateLabel::G1, grid)
                .expect("grid run");
            (base + delta, run.p_g2)
        })
        .collect();
    let fit = oracle::extract_phase_from_fringe(&samples).expect("fringe fit");
    (samples, fit)
}

/// Quadrature check of the single-packet global phase: propagate a fresh
/// resting packet of unit width under constant force by spatially
/// integrating the exact short-time kernel, then strip the known
/// position-dependent phase at the packet center and compare the remainder
/// with the closed-form global phase. Returns |numeric - closed form|
/// modulo 2 pi. Natural units; the force is scaled so F^2 t^3 = 1.
pub fn phi_tilde_quadrature_error(tau: f64) -> f64 {
    let t = tau; // width 1 means the spreading time is 1
    let force = t.powf(-1.5);
    let spec = LinearPotentialSpec::new(force, 1.0, 1.0).unwrap();
    let packet = GaussianPacket::at_rest(1.0, 0.0).unwrap();

    let half_range = 8.0;
    let center = 0.5 * force * t * t;
    // Keep the sampled kernel smooth: bound the integrand's local phase
    // rate over the source range and resolve it well below one radian per
    // sample, on top of resolving the envelope itself.
    let rate = (half_range + center.abs()) / t + 0.5 * force * t;
    let dz = (0.08 / rate).min(0.01);
    let mut n = (2.0 * half_range / dz).ceil() as usize + 1;
    if n % 2 == 0 {
        n += 1;
    }
    let dz = 2.0 * half_range / (n - 1) as f64;
    let psi0: Vec<Complex64> = (0..n)
        .map(|j| {
            let z = -half_range + j as f64 * dz;
            propagator::gaussian_wavefunction(&packet, &spec, 0.0, z).unwrap()
        })
        .collect();

    let psi = oracle::huygens_integral(-half_range, dz, &psi0, &spec, 0.0, t, center).unwrap();
    let w2 = 1.0 + tau * tau;
    let numeric = psi.arg() - force * t * center + tau * center * center / (2.0 * w2)
        + 0.5 * tau.atan();
    let want = propagator::total_global_phase(&spec, 1.0, t);
    angle_distance(numeric, want)
}
