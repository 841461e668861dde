//! Line-oriented sequence description files.
//!
//! Grammar, one directive per line, `#` starts a comment:
//!
//! ```text
//! units=natural                        # optional; hbar = mu_B = 1
//! atom mass=1.40999e-25                # exactly one
//! field g=9.81 B0=83.5e-6 gradBz=6e-4  # exactly one
//! state g1 gF=-0.333333 mF=0           # exactly two; first is the
//! state g2 gF=0.333333 mF=1            # inert reference (mF = 0)
//! param T=1.5e-3                       # optional; enables T expressions
//! pulse t=0 area=pi/2 phase=0
//! pulse t=T area=pi phase=0
//! pulse t=3T area=pi phase=0
//! pulse t=4T area=pi/2 phase=0
//! grid zmin=-64 zmax=64 n=4096         # optional, grid-solver window
//! packet width=1e-6 center=0 velocity=0  # optional initial packet
//! ```
//!
//! Pulse times are plain floats or integer-or-rational multiples of the
//! `param T` value (`T`, `3T`, `T/2`, `3T/2`). Areas are `pi/2`, `pi`, or a
//! float in radians. Unknown directives and keys are errors, diagnosed with
//! their line number.

use std::fmt;

use tcubed_core::zeeman::accelerations;
use tcubed_core::{
    AtomConfig, FieldConfig, GaussianPacket, InternalState, InterferometerSequence,
    PhysicalConstants, PulseEvent,
};

/// Parse failure with the 1-based source line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateBlock {
    pub label: String,
    pub g_f: f64,
    pub m_f: i32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldBlock {
    pub g: f64,
    pub b0: f64,
    pub grad_bz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseLine {
    pub time: f64,
    pub area: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBlock {
    pub z_min: f64,
    pub z_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketBlock {
    pub width: Option<f64>,
    pub center: f64,
    pub velocity: f64,
}

/// Fully parsed sequence description.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceFile {
    pub natural_units: bool,
    pub mass: f64,
    pub field: FieldBlock,
    pub states: Vec<StateBlock>,
    pub param_t: Option<f64>,
    pub pulses: Vec<PulseLine>,
    pub grid: Option<GridBlock>,
    pub packet: Option<PacketBlock>,
}

fn parse_float(line: usize, key: &str, raw: &str) -> Result<f64, ParseError> {
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => err(line, format!("{key}={raw} is not a finite number")),
    }
}

fn parse_area(line: usize, raw: &str) -> Result<f64, ParseError> {
    match raw {
        "pi/2" => Ok(std::f64::consts::FRAC_PI_2),
        "pi" => Ok(std::f64::consts::PI),
        other => parse_float(line, "area", other),
    }
}

/// Pulse time: a float, or `kT/q` with positive integers k (optional) and
/// q (optional), requiring a prior `param T` line.
fn parse_time(line: usize, raw: &str, param_t: Option<f64>) -> Result<f64, ParseError> {
    if let Ok(v) = raw.parse::<f64>() {
        if v.is_finite() {
            return Ok(v);
        }
    }
    let Some(t_pos) = raw.find('T') else {
        return err(line, format!("t={raw} is neither a number nor a T expression"));
    };
    let (head, tail) = (&raw[..t_pos], &raw[t_pos + 1..]);
    let k: u64 = if head.is_empty() {
        1
    } else {
        match head.parse() {
            Ok(k) => k,
            Err(_) => {
                return err(
                    line,
                    format!("t={raw}: only integer-or-rational multiples of T are allowed"),
                )
            }
        }
    };
    let q: u64 = if tail.is_empty() {
        1
    } else if let Some(den) = tail.strip_prefix('/') {
        match den.parse::<u64>() {
            Ok(q) if q > 0 => q,
            _ => return err(line, format!("t={raw}: bad denominator")),
        }
    } else {
        return err(line, format!("t={raw}: trailing characters after T"));
    };
    let Some(t) = param_t else {
        return err(line, format!("t={raw} uses T but no `param T=` line precedes it"));
    };
    Ok(k as f64 * t / q as f64)
}

/// Split `key=value` tokens, verifying every key is in `allowed`.
fn key_values<'a>(
    line: usize,
    directive: &str,
    tokens: &[&'a str],
    allowed: &[&str],
) -> Result<Vec<(&'a str, &'a str)>, ParseError> {
    let mut pairs = Vec::new();
    for token in tokens {
        let Some((key, value)) = token.split_once('=') else {
            return err(line, format!("{directive}: expected key=value, got `{token}`"));
        };
        if !allowed.contains(&key) {
            return err(
                line,
                format!("{directive}: unknown key `{key}` (allowed: {})", allowed.join(", ")),
            );
        }
        if pairs.iter().any(|(k, _)| *k == key) {
            return err(line, format!("{directive}: duplicate key `{key}`"));
        }
        pairs.push((key, value));
    }
    Ok(pairs)
}

fn require<'a>(
    line: usize,
    directive: &str,
    pairs: &[(&str, &'a str)],
    key: &str,
) -> Result<&'a str, ParseError> {
    pairs
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or(ParseError {
            line,
            message: format!("{directive}: missing required key `{key}`"),
        })
}

pub fn parse_sequence_file(text: &str) -> Result<SequenceFile, ParseError> {
    let mut natural_units = false;
    let mut mass: Option<(usize, f64)> = None;
    let mut field: Option<(usize, FieldBlock)> = None;
    let mut states: Vec<StateBlock> = Vec::new();
    let mut param_t: Option<f64> = None;
    let mut pulses: Vec<(usize, PulseLine)> = Vec::new();
    let mut grid: Option<GridBlock> = None;
    let mut packet: Option<PacketBlock> = None;

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "units=natural" => {
                natural_units = true;
                if tokens.len() > 1 {
                    return err(line, "units=natural takes no further tokens");
                }
            }
            u if u.starts_with("units=") => {
                return err(line, format!("unsupported unit system `{}`", &u[6..]));
            }
            "atom" => {
                if mass.is_some() {
                    return err(line, "duplicate atom directive");
                }
                let pairs = key_values(line, "atom", &tokens[1..], &["mass"])?;
                let m = parse_float(line, "mass", require(line, "atom", &pairs, "mass")?)?;
                if m <= 0.0 {
                    return err(line, "atom: mass must be positive");
                }
                mass = Some((line, m));
            }
            "field" => {
                if field.is_some() {
                    return err(line, "duplicate field directive");
                }
                let pairs = key_values(line, "field", &tokens[1..], &["g", "B0", "gradBz"])?;
                field = Some((
                    line,
                    FieldBlock {
                        g: parse_float(line, "g", require(line, "field", &pairs, "g")?)?,
                        b0: parse_float(line, "B0", require(line, "field", &pairs, "B0")?)?,
                        grad_bz: parse_float(
                            line,
                            "gradBz",
                            require(line, "field", &pairs, "gradBz")?,
                        )?,
                    },
                ));
            }
            "state" => {
                if tokens.len() < 2 || tokens[1].contains('=') {
                    return err(line, "state: expected `state <label> gF=<v> mF=<v>`");
                }
                let pairs = key_values(line, "state", &tokens[2..], &["gF", "mF"])?;
                let g_f = parse_float(line, "gF", require(line, "state", &pairs, "gF")?)?;
                let m_f_raw = require(line, "state", &pairs, "mF")?;
                let m_f: i32 = m_f_raw
                    .parse()
                    .map_err(|_| ParseError {
                        line,
                        message: format!("state: mF={m_f_raw} is not an integer"),
                    })?;
                states.push(StateBlock {
                    label: tokens[1].to_string(),
                    g_f,
                    m_f,
                });
            }
            "param" => {
                let pairs = key_values(line, "param", &tokens[1..], &["T"])?;
                let t = parse_float(line, "T", require(line, "param", &pairs, "T")?)?;
                if t <= 0.0 {
                    return err(line, "param: T must be positive");
                }
                param_t = Some(t);
            }
            "pulse" => {
                let pairs = key_values(line, "pulse", &tokens[1..], &["t", "area", "phase"])?;
                let pulse = PulseLine {
                    time: parse_time(line, require(line, "pulse", &pairs, "t")?, param_t)?,
                    area: parse_area(line, require(line, "pulse", &pairs, "area")?)?,
                    phase: parse_float(line, "phase", require(line, "pulse", &pairs, "phase")?)?,
                };
                if let Some((_, prev)) = pulses.last() {
                    if pulse.time <= prev.time {
                        return err(
                            line,
                            format!(
                                "pulse times must be strictly increasing ({} after {})",
                                pulse.time, prev.time
                            ),
                        );
                    }
                }
                pulses.push((line, pulse));
            }
            "grid" => {
                if grid.is_some() {
                    return err(line, "duplicate grid directive");
                }
                let pairs = key_values(line, "grid", &tokens[1..], &["zmin", "zmax", "n"])?;
                let n_raw = require(line, "grid", &pairs, "n")?;
                let n: usize = n_raw.parse().map_err(|_| ParseError {
                    line,
                    message: format!("grid: n={n_raw} is not a positive integer"),
                })?;
                grid = Some(GridBlock {
                    z_min: parse_float(line, "zmin", require(line, "grid", &pairs, "zmin")?)?,
                    z_max: parse_float(line, "zmax", require(line, "grid", &pairs, "zmax")?)?,
                    n,
                });
            }
            "packet" => {
                if packet.is_some() {
                    return err(line, "duplicate packet directive");
                }
                let pairs =
                    key_values(line, "packet", &tokens[1..], &["width", "center", "velocity"])?;
                let get = |key: &str| -> Result<Option<f64>, ParseError> {
                    pairs
                        .iter()
                        .find(|(k, _)| *k == key)
                        .map(|(_, v)| parse_float(line, key, v))
                        .transpose()
                };
                packet = Some(PacketBlock {
                    width: get("width")?,
                    center: get("center")?.unwrap_or(0.0),
                    velocity: get("velocity")?.unwrap_or(0.0),
                });
            }
            other => return err(line, format!("unknown directive `{other}`")),
        }
    }

    let Some((_, mass)) = mass else {
        return err(0, "missing atom directive");
    };
    let Some((_, field)) = field else {
        return err(0, "missing field directive");
    };
    if states.len() != 2 {
        return err(0, format!("need exactly 2 state directives, found {}", states.len()));
    }
    if pulses.is_empty() {
        return err(0, "no pulse directives");
    }
    Ok(SequenceFile {
        natural_units,
        mass,
        field,
        states,
        param_t,
        pulses: pulses.into_iter().map(|(_, p)| p).collect(),
        grid,
        packet,
    })
}

/// Render a parsed file back to text. Parsing the output reproduces the
/// same structure; T expressions are emitted as resolved times.
pub fn print_sequence_file(file: &SequenceFile) -> String {
    let mut out = String::new();
    if file.natural_units {
        out.push_str("units=natural\n");
    }
    out.push_str(&format!("atom mass={}\n", file.mass));
    out.push_str(&format!(
        "field g={} B0={} gradBz={}\n",
        file.field.g, file.field.b0, file.field.grad_bz
    ));
    for s in &file.states {
        out.push_str(&format!("state {} gF={} mF={}\n", s.label, s.g_f, s.m_f));
    }
    if let Some(t) = file.param_t {
        out.push_str(&format!("param T={t}\n"));
    }
    for p in &file.pulses {
        out.push_str(&format!(
            "pulse t={} area={} phase={}\n",
            p.time, p.area, p.phase
        ));
    }
    if let Some(g) = file.grid {
        out.push_str(&format!("grid zmin={} zmax={} n={}\n", g.z_min, g.z_max, g.n));
    }
    if let Some(p) = file.packet {
        match p.width {
            Some(w) => out.push_str(&format!(
                "packet width={w} center={} velocity={}\n",
                p.center, p.velocity
            )),
            None => out.push_str(&format!(
                "packet center={} velocity={}\n",
                p.center, p.velocity
            )),
        }
    }
    out
}

impl SequenceFile {
    /// Constants bundle matching the file's unit declaration.
    pub fn constants(&self) -> PhysicalConstants {
        if self.natural_units {
            PhysicalConstants::new(1.0, 1.0, self.field.g).expect("natural constants")
        } else {
            PhysicalConstants::codata()
        }
    }

    pub fn atom_config(&self) -> tcubed_core::Result<AtomConfig> {
        AtomConfig::new(
            self.mass,
            InternalState::new(&self.states[0].label, self.states[0].g_f, self.states[0].m_f)?,
            InternalState::new(&self.states[1].label, self.states[1].g_f, self.states[1].m_f)?,
        )
    }

    pub fn field_config(&self) -> tcubed_core::Result<FieldConfig> {
        FieldConfig::new(self.field.g, self.field.b0, self.field.grad_bz)
    }

    /// State-dependent accelerations (reference, sensitive).
    pub fn accelerations(&self) -> tcubed_core::Result<(f64, f64)> {
        accelerations(&self.atom_config()?, &self.field_config()?, &self.constants())
    }

    /// The pulse sequence with accelerations derived from the atom and
    /// field blocks.
    pub fn interferometer(&self) -> tcubed_core::Result<InterferometerSequence> {
        let (a1, a2) = self.accelerations()?;
        let pulses = self
            .pulses
            .iter()
            .map(|p| PulseEvent::new(p.time, p.area, p.phase))
            .collect::<tcubed_core::Result<Vec<_>>>()?;
        let consts = self.constants();
        InterferometerSequence::new(pulses, a1, a2, self.mass, consts.hbar)
    }

    /// Initial packet, fresh at the first pulse. Defaults to a resting
    /// packet one natural length wide, which closed-geometry signals do
    /// not depend on.
    pub fn initial_packet(
        &self,
        seq: &InterferometerSequence,
    ) -> tcubed_core::Result<GaussianPacket> {
        let gap = seq.pulses[1].time - seq.pulses[0].time;
        let natural_length = (seq.hbar * gap / seq.mass).sqrt();
        let block = self.packet.unwrap_or(PacketBlock {
            width: None,
            center: 0.0,
            velocity: 0.0,
        });
        let width = block.width.unwrap_or(natural_length);
        GaussianPacket::displaced(width, seq.t0, block.center, block.velocity)
    }
}
