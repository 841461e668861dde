//! Field calibration from Raman spectroscopy: peak finding in two-photon
//! spectra, Zeeman detuning-to-field conversion, gradient regression over a
//! field map, and the pulse separation needed to reach a target phase.
//!
//! Detunings are angular frequencies (rad/s) throughout; file interfaces
//! convert from kHz at the boundary.

use crate::constants::PhysicalConstants;
use crate::error::{CoreError, Result};
use crate::util::ols_line;
use crate::zeeman::{AtomConfig, FieldConfig};

/// Two-photon transition |F1, m_F1> -> |F2, m_F2> between hyperfine levels
/// with Lande factors g_F1, g_F2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanTransition {
    pub f1: u32,
    pub m_f1: i32,
    pub g_f1: f64,
    pub f2: u32,
    pub m_f2: i32,
    pub g_f2: f64,
}

impl RamanTransition {
    pub fn new(f1: u32, m_f1: i32, g_f1: f64, f2: u32, m_f2: i32, g_f2: f64) -> Result<Self> {
        if !g_f1.is_finite() || !g_f2.is_finite() {
            return Err(CoreError::InvalidAtom(
                "Lande factors must be finite".into(),
            ));
        }
        if m_f1.unsigned_abs() > f1 || m_f2.unsigned_abs() > f2 {
            return Err(CoreError::InvalidAtom(format!(
                "|m_F| must not exceed F: got ({f1}, {m_f1}) and ({f2}, {m_f2})"
            )));
        }
        let dm = (m_f2 - m_f1).abs();
        if dm > 1 {
            return Err(CoreError::InvalidAtom(format!(
                "|delta m_F| = {dm} transition is heavily suppressed; only 0 and 1 couple"
            )));
        }
        Ok(Self {
            f1,
            m_f1,
            g_f1,
            f2,
            m_f2,
            g_f2,
        })
    }

    /// Magnetic sensitivity (mu_B / hbar)(g_F2 m_F2 - g_F1 m_F1) in
    /// rad/s per tesla.
    pub fn sensitivity(&self, consts: &PhysicalConstants) -> f64 {
        consts.mu_bohr / consts.hbar
            * (self.g_f2 * f64::from(self.m_f2) - self.g_f1 * f64::from(self.m_f1))
    }
}

/// One sample of a two-photon spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSample {
    /// Two-photon detuning, rad/s.
    pub detuning: f64,
    /// Transferred population, dimensionless.
    pub population: f64,
}

/// One point of a magnetic field map along the interferometry axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMapPoint {
    /// Position, m.
    pub z: f64,
    /// Field magnitude, T.
    pub b: f64,
    /// Optional 1-sigma uncertainty, T. Carried through I/O; the gradient
    /// fit itself is ordinary (unweighted) least squares.
    pub sigma: Option<f64>,
}

/// First-order Zeeman detuning of a transition in field `b`:
/// (mu_B/hbar)(g_F2 m_F2 - g_F1 m_F1) b, rad/s.
pub fn zeeman_detuning(transition: &RamanTransition, b: f64, consts: &PhysicalConstants) -> f64 {
    transition.sensitivity(consts) * b
}

/// Field value producing the observed detuning on a magnetically sensitive
/// transition; exact inverse of [`zeeman_detuning`].
pub fn field_from_detuning(
    transition: &RamanTransition,
    detuning: f64,
    consts: &PhysicalConstants,
) -> Result<f64> {
    let slope = transition.sensitivity(consts);
    if slope == 0.0 {
        return Err(CoreError::Degenerate(
            "magnetically insensitive transition: detuning carries no field information".into(),
        ));
    }
    Ok(detuning / slope)
}

fn validate_spectrum(samples: &[SpectrumSample]) -> Result<()> {
    if samples.len() < 16 {
        return Err(CoreError::InvalidSamples(format!(
            "peak search needs >= 16 samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|s| !s.detuning.is_finite() || !s.population.is_finite())
    {
        return Err(CoreError::InvalidSamples(
            "spectrum samples must be finite".into(),
        ));
    }
    if !samples.windows(2).all(|w| w[0].detuning < w[1].detuning) {
        return Err(CoreError::InvalidSamples(
            "spectrum must be sorted by strictly increasing detuning".into(),
        ));
    }
    Ok(())
}

/// Topographic prominence of the local maximum at `i`: height above the
/// higher of the two valley floors separating it from higher ground (or
/// from the record ends).
fn prominence(samples: &[SpectrumSample], i: usize) -> f64 {
    let h = samples[i].population;
    let side_floor = |range: &mut dyn Iterator<Item = usize>| -> f64 {
        let mut floor = h;
        for j in range {
            if samples[j].population > h {
                return floor;
            }
            floor = floor.min(samples[j].population);
        }
        floor
    };
    let left = side_floor(&mut (0..i).rev());
    let right = side_floor(&mut (i + 1..samples.len()));
    h - left.max(right)
}

/// Vertex of the parabola through three points; falls back to the middle
/// point when the triple is degenerate (collinear).
fn parabolic_vertex(p: [(f64, f64); 3]) -> (f64, f64) {
    let [(x1, y1), (x2, y2), (x3, y3)] = p;
    let d21 = x2 - x1;
    let d23 = x2 - x3;
    let num = d21 * d21 * (y2 - y3) - d23 * d23 * (y2 - y1);
    let den = d21 * (y2 - y3) - d23 * (y2 - y1);
    if den.abs() < 1e-300 {
        return (x2, y2);
    }
    let xv = x2 - 0.5 * num / den;
    // Lagrange evaluation at the vertex.
    let l1 = (xv - x2) * (xv - x3) / ((x1 - x2) * (x1 - x3));
    let l2 = (xv - x1) * (xv - x3) / ((x2 - x1) * (x2 - x3));
    let l3 = (xv - x1) * (xv - x2) / ((x3 - x1) * (x3 - x2));
    (xv, y1 * l1 + y2 * l2 + y3 * l3)
}

/// Find spectral peaks as prominence-thresholded local maxima with
/// three-point parabolic center refinement. Returns (detuning, height)
/// pairs sorted by detuning.
pub fn find_peaks(samples: &[SpectrumSample], min_prominence: f64) -> Result<Vec<(f64, f64)>> {
    validate_spectrum(samples)?;
    if !(min_prominence >= 0.0) {
        return Err(CoreError::OutOfDomain {
            name: "min_prominence",
            value: min_prominence,
            domain: "[0, inf)",
        });
    }
    let mut peaks = Vec::new();
    for i in 1..samples.len() - 1 {
        let (prev, here, next) = (
            samples[i - 1].population,
            samples[i].population,
            samples[i + 1].population,
        );
        if here > prev && here >= next && prominence(samples, i) >= min_prominence {
            let refined = parabolic_vertex([
                (samples[i - 1].detuning, prev),
                (samples[i].detuning, here),
                (samples[i + 1].detuning, next),
            ]);
            peaks.push(refined);
        }
    }
    Ok(peaks)
}

/// Re-reference peak positions to the magnetically insensitive clock line
/// (the peak nearest zero detuning), removing any common-mode drift of the
/// frequency axis (light shifts, reference drift). Requires a peak list
/// containing the clock line.
pub fn correct_clock_drift(peaks: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let clock = peaks
        .iter()
        .map(|p| p.0)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .ok_or_else(|| CoreError::InvalidSamples("no peaks to reference".into()))?;
    Ok(peaks.iter().map(|(d, h)| (d - clock, *h)).collect())
}

/// Ordinary least-squares line fit to a field map, B(z) = intercept + slope z.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientFit {
    /// Field at z = 0, T.
    pub intercept: f64,
    /// Gradient, T/m.
    pub slope: f64,
    /// Standard errors from the residual variance; None for two points
    /// (no degrees of freedom).
    pub intercept_sigma: Option<f64>,
    pub slope_sigma: Option<f64>,
    /// Per-point residual b_i - fit(z_i), T.
    pub residuals: Vec<f64>,
}

/// Fit a straight line to a field map. Needs at least two points with
/// distinct positions; standard errors require at least three.
pub fn fit_gradient(points: &[FieldMapPoint]) -> Result<GradientFit> {
    if points.len() < 2 {
        return Err(CoreError::InvalidSamples(format!(
            "gradient fit needs >= 2 points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|p| !p.z.is_finite() || !p.b.is_finite())
    {
        return Err(CoreError::InvalidSamples(
            "field map points must be finite".into(),
        ));
    }
    let zs: Vec<f64> = points.iter().map(|p| p.z).collect();
    let bs: Vec<f64> = points.iter().map(|p| p.b).collect();
    let n = zs.len() as f64;
    let mz = zs.iter().sum::<f64>() / n;
    let sxx: f64 = zs.iter().map(|z| (z - mz) * (z - mz)).sum();
    let z_span = zs.iter().fold(0.0f64, |m, z| m.max((z - mz).abs()));
    if sxx <= 0.0 || sxx < 1e-24 * z_span.max(1e-12) {
        return Err(CoreError::Degenerate(
            "positions are degenerate: gradient is unconstrained".into(),
        ));
    }
    let (intercept, slope) = ols_line(&zs, &bs);
    let residuals: Vec<f64> = points
        .iter()
        .map(|p| p.b - (intercept + slope * p.z))
        .collect();
    let dof = points.len() as f64 - 2.0;
    let (intercept_sigma, slope_sigma) = if dof > 0.0 {
        let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / dof;
        (
            Some((s2 * (1.0 / n + mz * mz / sxx)).sqrt()),
            Some((s2 / sxx).sqrt()),
        )
    } else {
        (None, None)
    };
    Ok(GradientFit {
        intercept,
        slope,
        intercept_sigma,
        slope_sigma,
        residuals,
    })
}

/// Pulse separation at which the interferometer reaches `target_phase`:
/// the cube root of target over the cubic phase coefficient for this atom
/// and field.
pub fn required_t_for_phase(
    atom: &AtomConfig,
    field: &FieldConfig,
    consts: &PhysicalConstants,
    target_phase: f64,
) -> Result<f64> {
    if !(target_phase > 0.0) {
        return Err(CoreError::NonPositive {
            name: "target_phase",
            value: target_phase,
        });
    }
    let coefficient =
        crate::sequence::interferometer_phase_from_fields(atom, field, consts, 1.0)?;
    if coefficient == 0.0 {
        return Err(CoreError::Degenerate(
            "zero field gradient: no interferometer phase accumulates".into(),
        ));
    }
    Ok((target_phase / coefficient.abs()).cbrt())
}

/// Synthetic spectrum: sum of unit-width-parameterized Lorentzians of
/// common amplitude at the Zeeman detunings of the given transitions in
/// field `b`, sampled uniformly over [lo, hi].
pub fn synthesize_spectrum(
    transitions: &[RamanTransition],
    b: f64,
    consts: &PhysicalConstants,
    fwhm: f64,
    amplitude: f64,
    range: (f64, f64),
    n: usize,
) -> Result<Vec<SpectrumSample>> {
    if !(fwhm > 0.0) {
        return Err(CoreError::NonPositive {
            name: "fwhm",
            value: fwhm,
        });
    }
    if !(amplitude > 0.0 && amplitude <= 1.0) {
        return Err(CoreError::OutOfDomain {
            name: "amplitude",
            value: amplitude,
            domain: "(0, 1]",
        });
    }
    let (lo, hi) = range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(CoreError::InvalidSamples(format!(
            "bad detuning range [{lo}, {hi}]"
        )));
    }
    if n < 16 {
        return Err(CoreError::InvalidSamples(format!(
            "need >= 16 samples, got {n}"
        )));
    }
    let centers: Vec<f64> = transitions
        .iter()
        .map(|t| zeeman_detuning(t, b, consts))
        .collect();
    let gamma = fwhm / 2.0;
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|k| {
            let d = lo + k as f64 * step;
            let population = amplitude
                * centers
                    .iter()
                    .map(|c| gamma * gamma / ((d - c) * (d - c) + gamma * gamma))
                    .sum::<f64>();
            SpectrumSample {
                detuning: d,
                population,
            }
        })
        .collect())
}

/// The eleven-line Raman manifold between hyperfine levels F = 2
/// (g_F = -1/3) and F = 3 (g_F = +1/3): five delta-m_F = 0 lines at even
/// multiples and six delta-m_F = +/-1 lines at odd multiples of
/// (mu_B / 3 hbar) B.
pub fn rb85_raman_manifold() -> Vec<RamanTransition> {
    let g2 = -1.0 / 3.0;
    let g3 = 1.0 / 3.0;
    let mut lines = Vec::with_capacity(11);
    for m in -2..=2 {
        lines.push(RamanTransition::new(2, m, g2, 3, m, g3).expect("valid delta m = 0 line"));
    }
    for (m1, m2) in [(-2, -3), (-1, -2), (0, -1), (0, 1), (1, 2), (2, 3)] {
        lines.push(RamanTransition::new(2, m1, g2, 3, m2, g3).expect("valid delta m = 1 line"));
    }
    lines
}
