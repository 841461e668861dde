//! Closed-form propagation in a linear potential V(z) = -F z: classical
//! paths and actions, the cubic time phase of the quantum propagator, and
//! the exact evolution of Gaussian packets including the crossover of the
//! cubic-phase coefficient between the plane-wave value 1/6 and the
//! narrow-packet value 1/24.

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Particle of mass `mass` in the potential V(z) = -force * z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPotentialSpec {
    /// Constant force, N. Gravity corresponds to `force = -mass * g`.
    pub force: f64,
    /// Mass, kg.
    pub mass: f64,
    /// Reduced Planck constant; 1 for natural-unit problems.
    pub hbar: f64,
}

impl LinearPotentialSpec {
    pub fn new(force: f64, mass: f64, hbar: f64) -> Result<Self> {
        if !force.is_finite() {
            return Err(CoreError::NonFinite {
                name: "force",
                value: force,
            });
        }
        for (name, value) in [("mass", mass), ("hbar", hbar)] {
            if !value.is_finite() {
                return Err(CoreError::NonFinite { name, value });
            }
            if value <= 0.0 {
                return Err(CoreError::NonPositive { name, value });
            }
        }
        Ok(Self { force, mass, hbar })
    }

    /// Acceleration force/mass, m/s^2.
    pub fn acceleration(&self) -> f64 {
        self.force / self.mass
    }
}

/// Gaussian wave packet from the family generated by free evolution of a
/// minimum-uncertainty packet at rest at z = 0, profile
/// exp(-z^2 / (2 width^2)) (1/sqrt(e) amplitude-width convention).
///
/// `width` is the current width, `initial_width` the width at the rest
/// epoch `initial_time`; together they pin the spreading history, which the
/// current width alone would not (a broad packet now may have started
/// narrow or broad). `global_phase` accumulates the position-independent
/// part of the evolved phase; the position-dependent part is reconstructed
/// by [`gaussian_wavefunction`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    /// Packet center, m.
    pub center: f64,
    /// Packet velocity, m/s.
    pub velocity: f64,
    /// Current width, m.
    pub width: f64,
    /// Accumulated position-independent phase, rad.
    pub global_phase: f64,
    /// Current lab time, s.
    pub time: f64,
    /// Width at the rest epoch, m.
    pub initial_width: f64,
    /// Rest epoch, s.
    pub initial_time: f64,
}

impl GaussianPacket {
    /// Minimum-uncertainty packet at rest at z = 0.
    pub fn at_rest(width: f64, time: f64) -> Result<Self> {
        if !width.is_finite() {
            return Err(CoreError::NonFinite {
                name: "width",
                value: width,
            });
        }
        if width <= 0.0 {
            return Err(CoreError::NonPositive {
                name: "width",
                value: width,
            });
        }
        if !time.is_finite() {
            return Err(CoreError::NonFinite {
                name: "time",
                value: time,
            });
        }
        Ok(Self {
            center: 0.0,
            velocity: 0.0,
            width,
            global_phase: 0.0,
            time,
            initial_width: width,
            initial_time: time,
        })
    }

    /// Fresh minimum-uncertainty packet with center and velocity offsets.
    /// Used as a grid-oracle initial condition; [`propagate_gaussian`]
    /// itself accepts only the rest family.
    pub fn displaced(width: f64, time: f64, center: f64, velocity: f64) -> Result<Self> {
        for (name, value) in [("center", center), ("velocity", velocity)] {
            if !value.is_finite() {
                return Err(CoreError::NonFinite { name, value });
            }
        }
        let mut p = Self::at_rest(width, time)?;
        p.center = center;
        p.velocity = velocity;
        Ok(p)
    }

    /// Time since the rest epoch, s.
    pub fn elapsed(&self) -> f64 {
        self.time - self.initial_time
    }

    /// True if the packet has not evolved since its rest epoch (still
    /// minimum uncertainty).
    pub fn is_fresh(&self) -> bool {
        self.elapsed() == 0.0
    }

    /// Quantum spreading time t_s = m width0^2 / hbar: the time at which
    /// the width has grown by sqrt(2).
    pub fn spreading_time(&self, mass: f64, hbar: f64) -> f64 {
        mass * self.initial_width * self.initial_width / hbar
    }
}

/// Action of the classical path from (z_i, t_i) to (z_f, t_f), J s:
///
/// S = m (z_f - z_i)^2 / (2 dt) + (F/2)(z_f + z_i) dt - F^2 dt^3 / (24 m)
pub fn classical_action(
    z_i: f64,
    t_i: f64,
    z_f: f64,
    t_f: f64,
    spec: &LinearPotentialSpec,
) -> Result<f64> {
    let dt = t_f - t_i;
    if !(dt > 0.0) {
        return Err(CoreError::TimeOrder {
            what: "classical action needs t_f > t_i",
            t_i,
            t_f,
        });
    }
    let m = spec.mass;
    let f = spec.force;
    let dz = z_f - z_i;
    Ok(m * dz * dz / (2.0 * dt) + 0.5 * f * (z_f + z_i) * dt - f * f * dt.powi(3) / (24.0 * m))
}

/// Classical boundary-value path from (z_i, t_i) to (z_f, t_f), evaluated
/// at `t` in [t_i, t_f]. Returns (position, velocity):
///
/// z(t)  = z_i + (z_f - z_i)(t - t_i)/dt + (F/2m)(t - t_i)(t - t_f)
/// z'(t) = (z_f - z_i)/dt + (F/m)(t - (t_i + t_f)/2)
pub fn classical_trajectory(
    z_i: f64,
    t_i: f64,
    z_f: f64,
    t_f: f64,
    spec: &LinearPotentialSpec,
    t: f64,
) -> Result<(f64, f64)> {
    let dt = t_f - t_i;
    if !(dt > 0.0) {
        return Err(CoreError::TimeOrder {
            what: "classical trajectory needs t_f > t_i",
            t_i,
            t_f,
        });
    }
    if t < t_i || t > t_f {
        return Err(CoreError::OutOfDomain {
            name: "t",
            value: t,
            domain: "[t_i, t_f]",
        });
    }
    let half_acc = 0.5 * spec.force / spec.mass;
    let slope = (z_f - z_i) / dt;
    let z = z_i + slope * (t - t_i) + half_acc * (t - t_i) * (t - t_f);
    let v = slope + 2.0 * half_acc * (t - 0.5 * (t_i + t_f));
    Ok((z, v))
}

/// Position-independent cubic phase of the propagator over duration `t`:
/// -F^2 t^3 / (24 hbar m). This is the quantum leftover of the classical
/// action (its boundary-independent term divided by hbar).
pub fn cubic_phase(spec: &LinearPotentialSpec, t: f64) -> f64 {
    -spec.force * spec.force * t.powi(3) / (24.0 * spec.hbar * spec.mass)
}

/// Interpolation coefficient of the packet-averaged cubic phase,
/// alpha(tau) = (tau^2 + 4) / (24 (tau^2 + 1)) with tau = t / t_s:
/// 1/6 for tau -> 0 (plane-wave limit), 1/24 for tau -> inf (narrow
/// packet). Strictly decreasing in between.
pub fn alpha_factor(tau: f64) -> f64 {
    let t2 = tau * tau;
    (t2 + 4.0) / (24.0 * (t2 + 1.0))
}

/// Position-independent phase accumulated by a packet of initial width
/// `width0` released at rest, after time `t`:
/// -alpha(t / t_s) F^2 t^3 / (hbar m), with t_s = m width0^2 / hbar.
///
/// The slowly varying arctan envelope phase is not part of this cubic
/// assembly; [`propagate_gaussian`] tracks it separately.
pub fn total_global_phase(spec: &LinearPotentialSpec, width0: f64, t: f64) -> f64 {
    let t_s = spec.mass * width0 * width0 / spec.hbar;
    -alpha_factor(t / t_s) * spec.force * spec.force * t.powi(3) / (spec.hbar * spec.mass)
}

/// Evolve a packet from the rest family to `t_f >= initial.time`.
///
/// Closed forms, elapsed time e measured from the rest epoch:
/// center = F e^2 / 2m, velocity = F e / m,
/// width = width0 sqrt(1 + e^2/t_s^2),
/// global_phase += total cubic phase increment - arctan(e/t_s)/2 increment.
///
/// The input must be a member of the family (at rest, or the unmodified
/// output of a previous call): packets with center or velocity offsets have
/// additional phase structure this family does not describe.
pub fn propagate_gaussian(
    initial: &GaussianPacket,
    spec: &LinearPotentialSpec,
    t_f: f64,
) -> Result<GaussianPacket> {
    if t_f < initial.time {
        return Err(CoreError::TimeOrder {
            what: "propagate_gaussian needs t_f >= packet time",
            t_i: initial.time,
            t_f,
        });
    }
    let e0 = initial.elapsed();
    if e0 < 0.0 {
        return Err(CoreError::InvalidPacket(format!(
            "packet time {} precedes its rest epoch {}",
            initial.time, initial.initial_time
        )));
    }
    let m = spec.mass;
    let f = spec.force;
    let t_s = initial.spreading_time(m, spec.hbar);
    let width0 = initial.initial_width;

    // Family-consistency check: the packet must sit where free fall from
    // rest puts it. Tolerance is relative to natural scales of the motion.
    let center_expect = 0.5 * f / m * e0 * e0;
    let velocity_expect = f / m * e0;
    let width_expect = width0 * (1.0 + (e0 / t_s).powi(2)).sqrt();
    let z_scale = center_expect.abs().max(width0);
    let v_scale = velocity_expect.abs().max(width0 / t_s.max(f64::MIN_POSITIVE));
    if (initial.center - center_expect).abs() > 1e-9 * z_scale
        || (initial.velocity - velocity_expect).abs() > 1e-9 * v_scale
        || (initial.width - width_expect).abs() > 1e-9 * width_expect
    {
        return Err(CoreError::InvalidPacket(
            "packet is not a rest-family member (center/velocity/width inconsistent \
             with free fall from rest)"
                .into(),
        ));
    }

    let e1 = t_f - initial.initial_time;
    let phase_inc = total_global_phase(spec, width0, e1) - total_global_phase(spec, width0, e0)
        - 0.5 * ((e1 / t_s).atan() - (e0 / t_s).atan());
    Ok(GaussianPacket {
        center: 0.5 * f / m * e1 * e1,
        velocity: f / m * e1,
        width: width0 * (1.0 + (e1 / t_s).powi(2)).sqrt(),
        global_phase: initial.global_phase + phase_inc,
        time: t_f,
        initial_width: width0,
        initial_time: initial.initial_time,
    })
}

/// Full complex wavefunction of an evolved rest-family packet at position
/// `z_f` and time `t_f`: amplitude envelope of the current width around the
/// current center, times the accumulated global phase, times the
/// position-dependent phase (momentum ramp plus spreading chirp).
pub fn gaussian_wavefunction(
    initial: &GaussianPacket,
    spec: &LinearPotentialSpec,
    t_f: f64,
    z_f: f64,
) -> Result<Complex64> {
    let p = propagate_gaussian(initial, spec, t_f)?;
    let e = p.elapsed();
    let t_s = p.spreading_time(spec.mass, spec.hbar);
    let tau = e / t_s;
    let w = p.width;
    let c = p.center;

    let envelope = (std::f64::consts::PI.sqrt() * w).sqrt().recip()
        * (-(z_f - c) * (z_f - c) / (2.0 * w * w)).exp();
    // Position-dependent phase, grouped as polynomial in z_f so that the
    // z-independent remainder is exactly what global_phase accumulated.
    let phase = p.global_phase
        + spec.mass * p.velocity * z_f / spec.hbar
        + tau * (z_f * z_f - 2.0 * c * z_f) / (2.0 * w * w);
    Ok(envelope * Complex64::from_polar(1.0, phase))
}

/// Logarithmically spaced samples (tau, alpha(tau)), endpoints included.
/// `tau_min == 0` is allowed: the zero point is emitted exactly and the
/// remaining samples span the six decades up to `tau_max`.
pub fn alpha_curve(tau_min: f64, tau_max: f64, n_points: usize) -> Result<Vec<(f64, f64)>> {
    if !(tau_min >= 0.0) || !(tau_max > tau_min) || !tau_max.is_finite() {
        return Err(CoreError::OutOfDomain {
            name: "tau range",
            value: tau_min,
            domain: "0 <= tau_min < tau_max < inf",
        });
    }
    if n_points < 2 {
        return Err(CoreError::InvalidSamples(format!(
            "alpha curve needs at least 2 points, got {n_points}"
        )));
    }
    let mut out = Vec::with_capacity(n_points);
    let (geo_start, geo_count) = if tau_min > 0.0 {
        (tau_min, n_points)
    } else {
        out.push((0.0, alpha_factor(0.0)));
        (tau_max * 1e-6, n_points - 1)
    };
    if geo_count == 1 {
        out.push((tau_max, alpha_factor(tau_max)));
        return Ok(out);
    }
    let ratio = (tau_max / geo_start).ln() / (geo_count as f64 - 1.0);
    for k in 0..geo_count {
        // Pin the last sample to tau_max exactly.
        let tau = if k + 1 == geo_count {
            tau_max
        } else {
            geo_start * (ratio * k as f64).exp()
        };
        out.push((tau, alpha_factor(tau)));
    }
    Ok(out)
}
