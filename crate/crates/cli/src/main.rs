use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use tcubed_cli::seqfile::{parse_sequence_file, print_sequence_file, ParseError, SequenceFile};
use tcubed_cli::{khz_to_rad_per_s, parse_numeric_csv, rad_per_s_to_khz};
use tcubed_core::calibration::{
    correct_clock_drift, field_from_detuning, find_peaks, fit_gradient, FieldMapPoint,
    RamanTransition, SpectrumSample,
};
use tcubed_core::oracle::{extract_phase_from_fringe, run_sequence_numeric, Grid};
use tcubed_core::phasespace::{phase_shift_from_sequence, PhaseSpaceVector};
use tcubed_core::propagator::alpha_curve;
use tcubed_core::sequence::{
    interferometer_phase, nondimensionalize, run_state_sequence, solve_closure, total_laser_phase,
};
use tcubed_core::{
    CoreError, GaussianPacket, InterferometerSequence, PulseEvent, StateLabel,
};

#[derive(Parser)]
#[command(
    name = "tcubed",
    version,
    about = "Four-pulse differential-force atom interferometer toolkit",
    after_help = "Exit codes: 0 success, 1 usage or parse error, 2 physics domain error."
)]
struct Cli {
    /// Print a gnuplot snippet for the produced CSV on stderr.
    #[arg(long, global = true)]
    gnuplot_hints: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interferometer phase of a sequence file, by one or all engines.
    Phase(PhaseArgs),
    /// Population fringe against the scanned laser phase, as CSV.
    Fringe(FringeArgs),
    /// Pulse timings that close the interferometer for given accelerations.
    Closure(ClosureArgs),
    /// Field calibration from spectrum peaks or a field-map fit.
    Calibrate(CalibrateArgs),
    /// Global-phase interpolation factor alpha over the spreading ratio.
    Alpha(AlphaArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Operator,
    Phasespace,
    Oracle,
    All,
}

#[derive(Args)]
struct PhaseArgs {
    /// Sequence description file.
    #[arg(long)]
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Engine::All)]
    engine: Engine,
    /// Laser-phase scan points for the grid engine's fringe fit.
    #[arg(long, default_value_t = 12)]
    points: usize,
    /// Print the parsed file in normalized form and exit.
    #[arg(long)]
    echo: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FringeEngine {
    /// Closed-form branch bookkeeping (exact populations).
    Exact,
    /// Split-step grid propagation.
    Oracle,
}

#[derive(Args)]
struct FringeArgs {
    #[arg(long)]
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = FringeEngine::Exact)]
    engine: FringeEngine,
    /// Scan points over the span (at least 8).
    #[arg(long, default_value_t = 13)]
    points: usize,
    /// Scanned laser-phase span in radians.
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    span: f64,
}

#[derive(Args)]
struct ClosureArgs {
    /// Take accelerations and the first gap from a sequence file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Reference-state acceleration (used with --a2 and --t10).
    #[arg(long, allow_negative_numbers = true)]
    a1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a2: Option<f64>,
    /// First pulse gap.
    #[arg(long, allow_negative_numbers = true)]
    t10: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CalMode {
    /// Peaks of a two-photon spectrum, optionally converted to fields.
    Spectrum,
    /// Straight-line fit of a field map.
    Map,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, value_enum)]
    mode: CalMode,
    /// Input CSV: `detuning_khz,population` for spectrum mode,
    /// `z_m,b_ut[,sigma_ut]` for map mode.
    #[arg(long)]
    input: PathBuf,
    /// Minimum peak prominence (population units), spectrum mode.
    #[arg(long, default_value_t = 0.05)]
    min_prominence: f64,
    /// Re-reference peaks to the line nearest zero detuning.
    #[arg(long)]
    clock_reference: bool,
    /// Transition `F1,mF1,gF1,F2,mF2,gF2` used to convert peak detunings
    /// to field values (adds a field_ut column).
    #[arg(long)]
    transition: Option<String>,
    /// Map mode: emit per-point residuals instead of the fit summary.
    #[arg(long)]
    residuals: bool,
}

#[derive(Args)]
struct AlphaArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tau_min: f64,
    #[arg(long, default_value_t = 100.0, allow_negative_numbers = true)]
    tau_max: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
}

/// Write to stdout, treating a closed pipe (e.g. `tcubed ... | head`) as a
/// normal end of output rather than a panic.
fn emit_raw(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {e}");
        std::process::exit(1);
    }
}

fn emit(line: std::fmt::Arguments) {
    emit_raw(&format!("{line}\n"));
}

macro_rules! emitln {
    ($($t:tt)*) => { emit(format_args!($($t)*)) };
}

enum AppError {
    Usage(String),
    Physics(CoreError),
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        AppError::Physics(e)
    }
}

impl From<ParseError> for AppError {
    fn from(e: ParseError) -> Self {
        AppError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Physics(e)) => {
            eprintln!("physics error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), AppError> {
    match &cli.command {
        Command::Phase(args) => cmd_phase(args),
        Command::Fringe(args) => cmd_fringe(args, cli.gnuplot_hints),
        Command::Closure(args) => cmd_closure(args),
        Command::Calibrate(args) => cmd_calibrate(args, cli.gnuplot_hints),
        Command::Alpha(args) => cmd_alpha(args, cli.gnuplot_hints),
    }
}

fn load_file(path: &Path) -> Result<SequenceFile, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_sequence_file(&text)?)
}

fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x % two_pi;
    if y <= -std::f64::consts::PI {
        y += two_pi;
    } else if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}

fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Shift the total laser phase by `delta` through the first pulse.
fn with_laser_offset(seq: &InterferometerSequence, delta: f64) -> InterferometerSequence {
    let mut pulses = seq.pulses.clone();
    pulses[0] = PulseEvent::new(
        pulses[0].time,
        pulses[0].area,
        pulses[0].laser_phase + delta,
    )
    .expect("offset keeps the pulse valid");
    InterferometerSequence::new(pulses, seq.a1, seq.a2, seq.mass, seq.hbar)
        .expect("offset keeps the sequence valid")
}

fn seq_laser_total(seq: &InterferometerSequence) -> f64 {
    total_laser_phase([
        seq.pulses[0].laser_phase,
        seq.pulses[1].laser_phase,
        seq.pulses[2].laser_phase,
        seq.pulses[3].laser_phase,
    ])
}

/// Natural-unit problem plus grid for the grid engine: the file's grid
/// window scaled by the natural length, or an automatically sized one.
fn oracle_setup(
    file: &SequenceFile,
    seq: &InterferometerSequence,
    packet: &GaussianPacket,
) -> Result<(InterferometerSequence, GaussianPacket, Grid), AppError> {
    let (seq_nat, packet_nat, scales) = nondimensionalize(seq, packet)?;
    let grid = match file.grid {
        Some(g) => Grid::new(g.z_min / scales.length, g.z_max / scales.length, g.n)?,
        None => Grid::suggested(&seq_nat, &packet_nat)?,
    };
    Ok((seq_nat, packet_nat, grid))
}

/// Fringe-fitted phase and visibility from the grid engine.
fn oracle_phase(
    file: &SequenceFile,
    seq: &InterferometerSequence,
    packet: &GaussianPacket,
    points: usize,
) -> Result<(f64, f64), AppError> {
    if points < 8 {
        return Err(AppError::Usage(format!(
            "grid fringe fit needs at least 8 scan points, got {points}"
        )));
    }
    let (seq_nat, packet_nat, grid) = oracle_setup(file, seq, packet)?;
    let samples: Vec<(f64, f64)> = (0..points)
        .map(|k| {
            let delta = 2.0 * std::f64::consts::PI * k as f64 / (points - 1) as f64;
            let shifted = with_laser_offset(&seq_nat, delta);
            let run = run_sequence_numeric(&shifted, &packet_nat, StateLabel::G1, &grid)?;
            Ok((seq_laser_total(&seq_nat) + delta, run.p_g2))
        })
        .collect::<Result<_, CoreError>>()?;
    let fit = extract_phase_from_fringe(&samples)?;
    let phase = fit.phase.ok_or(CoreError::Degenerate(
        "fringe has no measurable visibility; the phase is undefined".into(),
    ))?;
    Ok((phase, fit.visibility))
}

fn cmd_phase(args: &PhaseArgs) -> Result<(), AppError> {
    let file = load_file(&args.file)?;
    if args.echo {
        emit_raw(&print_sequence_file(&file));
        return Ok(());
    }
    let seq = file.interferometer()?;
    let packet = file.initial_packet(&seq)?;
    let laser = seq_laser_total(&seq);

    let operator = || -> Result<(f64, f64, bool), AppError> {
        let r = interferometer_phase(&seq, Some(&packet))?;
        Ok((r.interferometer_phase, r.contrast, r.closed))
    };
    let phasespace = || -> Result<(f64, f64, f64, bool), AppError> {
        let ps = phase_shift_from_sequence(&seq)?;
        let chi0 = PhaseSpaceVector::new(packet.center, seq.mass * packet.velocity);
        let phi = ps.phase - ps.laser_phase_total + ps.open_correction(chi0);
        Ok((phi, ps.residual.position, ps.residual.momentum, ps.closed))
    };

    match args.engine {
        Engine::Operator => {
            let (phi, contrast, closed) = operator()?;
            emitln!(
                "engine=operator interferometer_phase={phi} laser_phase={laser} total_phase={} contrast={contrast} closed={closed}",
                phi + laser
            );
        }
        Engine::Phasespace => {
            let (phi, rz, rp, closed) = phasespace()?;
            emitln!(
                "engine=phasespace interferometer_phase={phi} laser_phase={laser} total_phase={} residual_z={rz} residual_p={rp} closed={closed}",
                phi + laser
            );
        }
        Engine::Oracle => {
            let (phi, visibility) = oracle_phase(&file, &seq, &packet, args.points)?;
            emitln!(
                "engine=oracle interferometer_phase={phi} laser_phase={laser} total_phase={} contrast={visibility} closed=unresolved",
                phi + laser
            );
        }
        Engine::All => {
            let (op, contrast, closed) = operator()?;
            let (ps, rz, rp, _) = phasespace()?;
            let (or, visibility) = oracle_phase(&file, &seq, &packet, args.points)?;
            emitln!(
                "engine=operator interferometer_phase={op} laser_phase={laser} total_phase={} contrast={contrast} closed={closed}",
                op + laser
            );
            emitln!(
                "engine=phasespace interferometer_phase={ps} laser_phase={laser} total_phase={} residual_z={rz} residual_p={rp} closed={closed}",
                ps + laser
            );
            emitln!(
                "engine=oracle interferometer_phase={or} laser_phase={laser} total_phase={} contrast={visibility} closed={closed}",
                or + laser
            );
            let deviation = angle_distance(op, ps)
                .max(angle_distance(op, or))
                .max(angle_distance(ps, or));
            emitln!("max_pairwise_deviation={deviation}");
        }
    }
    Ok(())
}

fn cmd_fringe(args: &FringeArgs, hints: bool) -> Result<(), AppError> {
    if args.points < 8 {
        return Err(AppError::Usage(format!(
            "a fringe scan needs at least 8 points, got {}",
            args.points
        )));
    }
    if !(args.span > 0.0) {
        return Err(AppError::Usage(format!("span must be positive, got {}", args.span)));
    }
    let file = load_file(&args.file)?;
    let seq = file.interferometer()?;
    let packet = file.initial_packet(&seq)?;

    let mut rows: Vec<(f64, f64, f64)> = Vec::with_capacity(args.points);
    match args.engine {
        FringeEngine::Exact => {
            let base = seq_laser_total(&seq);
            for k in 0..args.points {
                let delta = args.span * k as f64 / (args.points - 1) as f64;
                let shifted = with_laser_offset(&seq, delta);
                let ports = run_state_sequence(&shifted, StateLabel::G1, &packet)?;
                rows.push((base + delta, ports.p_g1, ports.p_g2));
            }
        }
        FringeEngine::Oracle => {
            let (seq_nat, packet_nat, grid) = oracle_setup(&file, &seq, &packet)?;
            let base = seq_laser_total(&seq_nat);
            for k in 0..args.points {
                let delta = args.span * k as f64 / (args.points - 1) as f64;
                let shifted = with_laser_offset(&seq_nat, delta);
                let run = run_sequence_numeric(&shifted, &packet_nat, StateLabel::G1, &grid)?;
                rows.push((base + delta, run.p_g1, run.p_g2));
            }
        }
    }
    emitln!("phi_laser_rad,p_g1,p_g2");
    for (phi, p1, p2) in rows {
        emitln!("{phi},{p1},{p2}");
    }
    if hints {
        eprintln!("# gnuplot");
        eprintln!("# set datafile separator ','");
        eprintln!("# set xlabel 'laser phase (rad)'; set ylabel 'population'");
        eprintln!("# plot 'fringe.csv' skip 1 using 1:3 with linespoints title 'P_g2'");
    }
    Ok(())
}

fn cmd_closure(args: &ClosureArgs) -> Result<(), AppError> {
    let (a1, a2, t10, mass, hbar) = match (&args.file, args.a1, args.a2, args.t10) {
        (Some(path), None, None, None) => {
            let file = load_file(path)?;
            if file.pulses.len() < 2 {
                return Err(AppError::Usage(
                    "closure from a file needs at least two pulses for the first gap".into(),
                ));
            }
            let (a1, a2) = file.accelerations()?;
            let consts = file.constants();
            (
                a1,
                a2,
                file.pulses[1].time - file.pulses[0].time,
                file.mass,
                consts.hbar,
            )
        }
        (None, Some(a1), Some(a2), Some(t10)) => (a1, a2, t10, 1.0, 1.0),
        _ => {
            return Err(AppError::Usage(
                "pass either --file, or all of --a1 --a2 --t10".into(),
            ))
        }
    };
    let (t21, t32) = solve_closure(a1, a2, t10)?;
    // Round trip: rebuild the sequence on the solved timings and let the
    // operator engine confirm the branches rejoin.
    let times = [0.0, t10, t10 + t21, t10 + t21 + t32];
    let areas = [
        std::f64::consts::FRAC_PI_2,
        std::f64::consts::PI,
        std::f64::consts::PI,
        std::f64::consts::FRAC_PI_2,
    ];
    let pulses = (0..4)
        .map(|k| PulseEvent::new(times[k], areas[k], 0.0))
        .collect::<Result<Vec<_>, _>>()?;
    let seq = InterferometerSequence::new(pulses, a1, a2, mass, hbar)?;
    let result = interferometer_phase(&seq, None)?;
    let ps = phase_shift_from_sequence(&seq)?;
    emitln!("t21={t21}");
    emitln!("t32={t32}");
    emitln!(
        "closed={} residual_z={} residual_p={} interferometer_phase={}",
        result.closed && ps.closed,
        ps.residual.position,
        ps.residual.momentum,
        result.interferometer_phase
    );
    Ok(())
}

fn parse_transition(spec: &str) -> Result<RamanTransition, AppError> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(AppError::Usage(format!(
            "--transition wants F1,mF1,gF1,F2,mF2,gF2; got {} fields",
            parts.len()
        )));
    }
    let parse_u = |s: &str| -> Result<u32, AppError> {
        s.parse()
            .map_err(|_| AppError::Usage(format!("`{s}` is not a non-negative integer")))
    };
    let parse_i = |s: &str| -> Result<i32, AppError> {
        s.parse()
            .map_err(|_| AppError::Usage(format!("`{s}` is not an integer")))
    };
    let parse_f = |s: &str| -> Result<f64, AppError> {
        s.parse()
            .map_err(|_| AppError::Usage(format!("`{s}` is not a number")))
    };
    Ok(RamanTransition::new(
        parse_u(parts[0])?,
        parse_i(parts[1])?,
        parse_f(parts[2])?,
        parse_u(parts[3])?,
        parse_i(parts[4])?,
        parse_f(parts[5])?,
    )?)
}

fn cmd_calibrate(args: &CalibrateArgs, hints: bool) -> Result<(), AppError> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| AppError::Usage(format!("cannot read {}: {e}", args.input.display())))?;
    let consts = tcubed_core::PhysicalConstants::codata();
    match args.mode {
        CalMode::Spectrum => {
            let rows = parse_numeric_csv(&text, 2, 2).map_err(AppError::Usage)?;
            let samples: Vec<SpectrumSample> = rows
                .iter()
                .map(|r| SpectrumSample {
                    detuning: khz_to_rad_per_s(r[0]),
                    population: r[1],
                })
                .collect();
            let mut peaks = find_peaks(&samples, args.min_prominence)?;
            if args.clock_reference {
                peaks = correct_clock_drift(&peaks)?;
            }
            let transition = args
                .transition
                .as_deref()
                .map(parse_transition)
                .transpose()?;
            match &transition {
                Some(t) => {
                    emitln!("detuning_khz,height,field_ut");
                    for (d, h) in &peaks {
                        let field = field_from_detuning(t, *d, &consts)?;
                        emitln!("{},{h},{}", rad_per_s_to_khz(*d), field * 1e6);
                    }
                }
                None => {
                    emitln!("detuning_khz,height");
                    for (d, h) in &peaks {
                        emitln!("{},{h}", rad_per_s_to_khz(*d));
                    }
                }
            }
            if hints {
                eprintln!("# gnuplot");
                eprintln!("# set datafile separator ','");
                eprintln!("# plot 'spectrum.csv' skip 1 using 1:2 with impulses title 'peaks'");
            }
        }
        CalMode::Map => {
            let rows = parse_numeric_csv(&text, 2, 3).map_err(AppError::Usage)?;
            let points: Vec<FieldMapPoint> = rows
                .iter()
                .map(|r| FieldMapPoint {
                    z: r[0],
                    b: r[1] * 1e-6,
                    sigma: r.get(2).map(|s| s * 1e-6),
                })
                .collect();
            let fit = fit_gradient(&points)?;
            if args.residuals {
                emitln!("z_m,residual_ut");
                for (p, r) in points.iter().zip(&fit.residuals) {
                    emitln!("{},{}", p.z, r * 1e6);
                }
            } else {
                let fmt_sigma = |s: Option<f64>| s.map_or(String::new(), |v| format!("{}", v * 1e6));
                emitln!("intercept_ut,slope_ut_per_m,intercept_sigma_ut,slope_sigma_ut_per_m");
                emitln!(
                    "{},{},{},{}",
                    fit.intercept * 1e6,
                    fit.slope * 1e6,
                    fmt_sigma(fit.intercept_sigma),
                    fmt_sigma(fit.slope_sigma)
                );
            }
            if hints {
                eprintln!("# gnuplot");
                eprintln!("# set datafile separator ','");
                eprintln!("# plot 'map.csv' skip 1 using 1:2 with points title 'B(z)'");
            }
        }
    }
    Ok(())
}

fn cmd_alpha(args: &AlphaArgs, hints: bool) -> Result<(), AppError> {
    if args.points < 2 {
        return Err(AppError::Usage(format!(
            "alpha curve needs at least 2 points, got {}",
            args.points
        )));
    }
    let curve = alpha_curve(args.tau_min, args.tau_max, args.points)?;
    emitln!("tau,alpha");
    for (tau, alpha) in curve {
        emitln!("{tau},{alpha}");
    }
    if hints {
        eprintln!("# gnuplot");
        eprintln!("# set datafile separator ','");
        eprintln!("# set logscale x; plot 'alpha.csv' skip 1 using 1:2 with lines title 'alpha'");
    }
    Ok(())
}
