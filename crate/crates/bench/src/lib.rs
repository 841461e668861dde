//! Shared fixtures for the engine benchmarks.

use tcubed_core::{GaussianPacket, InterferometerSequence, PulseEvent};

/// Canonical closed natural-unit sequence: accelerations (1, 2), pulses at
/// (0, T, 3T, 4T) with pi/2, pi, pi, pi/2 areas and mixed laser phases.
pub fn canonical_sequence(t: f64) -> InterferometerSequence {
    let areas = [
        std::f64::consts::FRAC_PI_2,
        std::f64::consts::PI,
        std::f64::consts::PI,
        std::f64::consts::FRAC_PI_2,
    ];
    let times = [0.0, t, 3.0 * t, 4.0 * t];
    let phases = [0.1, -0.2, 0.3, 0.0];
    let pulses = (0..4)
        .map(|k| PulseEvent::new(times[k], areas[k], phases[k]).expect("valid pulse"))
        .collect();
    InterferometerSequence::new(pulses, 1.0, 2.0, 1.0, 1.0).expect("valid sequence")
}

/// Unit-width packet at rest at the origin, prepared at the first pulse.
pub fn unit_packet() -> GaussianPacket {
    GaussianPacket::at_rest(1.0, 0.0).expect("valid packet")
}
