use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use qreset::control::{fmt12, optimize_pulse, OptimizeOptions, PulseSchedule, DEFAULT_SEGMENTS};
use qreset::dynamics::{
    abar_c_loci, analytic_tmin_class, angle_scan, angle_scan_csv, case_parameters,
    dressed_product_state, eta_and_tmin, numeric_tmin, simulate_purity, table_i, table_i_csv,
    thermal_product, uniform_grid, BlochAngles, CaseParameters, QubitInit, ScanAxis,
    UnitConvention, TABLE_I_SETS,
};
use qreset::lie::{classification_spec, classify_all_27_with, CartanReport};
use qreset::majorization::{dimension_sweep, epsilon_reset_check, sweep_csv};
use qreset::model::{hamiltonian, qubit_thermal, resonant_amplitude, OperatorSelector, SystemSpec};
use qreset::operator::{propagator, Operator};
use qreset::weyl::{qsl_verify, weyl_coordinates, AncillaLocalState};
use qreset::{QresetError, Result};

/// Qubit reset bounds: purification classification, reset times, purity
/// dynamics, speed limits, majorization bounds and pulse optimization.
#[derive(Parser)]
#[command(name = "qreset", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lie-algebra classification of all 27 Pauli couplings and controls
    /// (dimensions of L, k, p and the Cartan subalgebra a).
    Classify(ClassifyArgs),
    /// Minimum reset time π/(2η₋) of a case at its resonant field.
    Tmin(TminArgs),
    /// Reset times in ns of every purifiable case for the three device sets.
    Table1(Table1Args),
    /// Exact qubit purity under a constant resonant field or a given pulse.
    Simulate(SimulateArgs),
    /// Canonical Weyl coordinates of a two-qubit unitary.
    Weyl(WeylArgs),
    /// Brute-force minimum of c1+c2+c3 reaching the ancilla purity.
    QslVerify(QslArgs),
    /// Maximum qubit purity reachable with a thermal qudit ancilla.
    MaxPurity(MaxPurityArgs),
    /// Whether an ancilla spectrum allows resets within a given infidelity.
    EpsilonCheck(EpsilonArgs),
    /// Sweep one operator angle and report |Ā|, 1/T_min and C.
    AngleScan(AngleScanArgs),
    /// Optimize a piecewise-constant field for end-time qubit purity.
    Optimize(OptimizeArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    TableI,
    Angular,
}

impl From<Convention> for UnitConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::TableI => UnitConvention::TableI,
            Convention::Angular => UnitConvention::AngularHbar1,
        }
    }
}

#[derive(Args)]
struct SpecArg {
    /// SystemSpec JSON file (default: ω_S = 1, ω_B = 3, J = 0.1, β = 1)
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args)]
struct CaseArg {
    /// Pauli case `s{i}s{j}:s{k}` for O_S⊗O_B with control O_c
    #[arg(long, conflicts_with = "angles")]
    case: Option<String>,
    /// Bloch angles φ_S θ_S φ_B θ_B φ_c θ_c
    #[arg(long, num_args = 6, allow_negative_numbers = true)]
    angles: Option<Vec<f64>>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Classify all 27 cases (the default and only mode)
    #[arg(long)]
    all: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct TminArgs {
    #[command(flatten)]
    spec: SpecArg,
    #[command(flatten)]
    case: CaseArg,
    /// Use π/(2|A|) instead of π/(2η₋)
    #[arg(long)]
    approx: bool,
    /// Report the analytic class time under a unit convention
    #[arg(long, value_enum)]
    convention: Option<Convention>,
    /// Decimal places on stdout
    #[arg(long, default_value_t = 3)]
    precision: usize,
}

#[derive(Args)]
struct Table1Args {
    #[arg(long, value_enum, default_value = "table-i")]
    convention: Convention,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Initial {
    /// Thermal qubit (field off) times thermal ancilla
    Thermal,
    /// Thermal populations placed diagonally in the dressed frame
    DressedThermal,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    spec: SpecArg,
    #[command(flatten)]
    case: CaseArg,
    /// Pulse JSON; a constant resonant field over --t-max otherwise
    #[arg(long)]
    pulse: Option<PathBuf>,
    /// End of the time grid (default: twice the reset time, or the pulse length)
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 401)]
    n_times: usize,
    #[arg(long, value_enum, default_value = "thermal")]
    initial: Initial,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct WeylArgs {
    /// JSON file with a 4×4 matrix as rows of [re, im] pairs
    #[arg(long, conflicts_with_all = ["case", "angles"])]
    unitary: Option<PathBuf>,
    #[command(flatten)]
    spec: SpecArg,
    #[command(flatten)]
    case: CaseArg,
    /// Propagation time for --case/--angles at the resonant field
    #[arg(long, default_value_t = 1.0)]
    time: f64,
}

#[derive(Args)]
struct QslArgs {
    /// Ancilla excited population (default: thermal from the spec)
    #[arg(long, requires = "p_g")]
    p_e: Option<f64>,
    #[arg(long, requires = "p_e")]
    p_g: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma_re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma_im: f64,
    #[command(flatten)]
    spec: SpecArg,
    #[arg(long, default_value_t = 101)]
    grid_n: usize,
    /// CSV of every achieving point
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MaxPurityArgs {
    #[arg(long, default_value_t = 2)]
    d_b: usize,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 3.0)]
    gap: f64,
    #[arg(long, default_value_t = 1.0)]
    omega_s: f64,
    /// Write a CSV sweep over d_B = 2..=N instead
    #[arg(long)]
    sweep: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    precision: usize,
}

#[derive(Args)]
struct EpsilonArgs {
    /// Ancilla eigenvalues, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    eigenvalues: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    d_s: usize,
    #[arg(long)]
    eps: f64,
}

#[derive(Args)]
struct AngleScanArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Swept angle: phi_s, theta_s, phi_b, theta_b, phi_c, theta_c
    #[arg(long, default_value = "theta_c")]
    axis: String,
    /// Fixed Bloch angles φ_S θ_S φ_B θ_B φ_c θ_c
    #[arg(long, num_args = 6, allow_negative_numbers = true)]
    angles: Option<Vec<f64>>,
    #[arg(long, default_value_t = 33)]
    grid_n: usize,
    /// Compare the maxima loci of |Ā| and C at this θ_S instead
    #[arg(long, allow_negative_numbers = true)]
    loci: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    spec: SpecArg,
    #[command(flatten)]
    case: CaseArg,
    /// Pulse duration (default: the reset time)
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEGMENTS)]
    segments: usize,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long)]
    eps_max: Option<f64>,
    /// Second control channel `s{k}`
    #[arg(long)]
    second_channel: Option<String>,
    #[arg(long, value_enum, default_value = "thermal")]
    initial: Initial,
    /// Result JSON
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optimized pulse as CSV
    #[arg(long)]
    pulse_csv: Option<PathBuf>,
}

enum Failure {
    Lib(QresetError),
    Io(String),
}

impl From<QresetError> for Failure {
    fn from(e: QresetError) -> Self {
        Failure::Lib(e)
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Lib(QresetError::InvalidInput(msg.into()))
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::result::Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn load_spec(arg: &SpecArg) -> std::result::Result<SystemSpec, Failure> {
    match &arg.spec {
        Some(p) => Ok(SystemSpec::from_json_str(&read(p)?)?),
        None => Ok(classification_spec()),
    }
}

fn parse_pauli(s: &str) -> Result<usize> {
    let k = s
        .strip_prefix('s')
        .and_then(|r| r.parse::<usize>().ok())
        .filter(|k| (1..=3).contains(k));
    k.ok_or_else(|| {
        QresetError::InvalidInput(format!("bad Pauli label `{s}` (expected s1, s2 or s3)"))
    })
}

fn parse_case(s: &str) -> Result<(usize, usize, usize)> {
    let bad =
        || QresetError::InvalidInput(format!("bad case `{s}` (expected s{{i}}s{{j}}:s{{k}})"));
    let (pair, ctl) = s.split_once(':').ok_or_else(bad)?;
    if pair.len() != 4 {
        return Err(bad());
    }
    Ok((
        parse_pauli(&pair[..2])?,
        parse_pauli(&pair[2..])?,
        parse_pauli(ctl)?,
    ))
}

enum Case {
    Pauli(usize, usize, usize),
    Angles,
}

fn resolve_case(
    arg: &CaseArg,
    spec: &SystemSpec,
) -> std::result::Result<(Case, SystemSpec), Failure> {
    match (&arg.case, &arg.angles) {
        (Some(c), _) => {
            let (a, b, k) = parse_case(c)?;
            Ok((Case::Pauli(a, b, k), spec.clone().with_operators(a, b, k)))
        }
        (None, Some(v)) => {
            let a = BlochAngles::from_slice(v)?;
            Ok((Case::Angles, a.apply(spec)))
        }
        (None, None) => Ok((Case::Pauli(1, 1, 3), spec.clone().with_operators(1, 1, 3))),
    }
}

fn reset_time(case: &Case, spec: &SystemSpec) -> std::result::Result<f64, Failure> {
    match case {
        Case::Pauli(a, b, k) => match case_parameters(*a, *b, *k, spec)? {
            CaseParameters::Purifiable(p) => Ok(eta_and_tmin(&p)?.t_min),
            CaseParameters::NotPurifiable => {
                Err(QresetError::NoPurification(format!("s{a}s{b}:s{k}")).into())
            }
        },
        Case::Angles => numeric_tmin(spec)?
            .ok_or_else(|| QresetError::NoPurification("purity never rises".into()).into()),
    }
}

fn classify_csv(rows: &[CartanReport]) -> String {
    let mut out = String::from("o_s,o_b,o_c,dim_l,dim_k,dim_p,dim_a,purifiable\n");
    for r in rows {
        out.push_str(&format!(
            "s{},s{},s{},{},{},{},{},{}\n",
            r.o_s, r.o_b, r.o_c, r.dim_l, r.dim_k, r.dim_p, r.dim_a, r.purifiable
        ));
    }
    out
}

fn initial_state(kind: Initial, spec: &SystemSpec) -> Result<Operator> {
    match kind {
        Initial::Thermal => thermal_product(spec),
        Initial::DressedThermal => {
            let th = qubit_thermal(spec)?;
            let q = QubitInit {
                p_g: th[(1, 1)].re,
                p_e: th[(0, 0)].re,
                gamma: Complex64::new(0.0, 0.0),
            };
            dressed_product_state(spec, resonant_amplitude(spec)?, &q)
        }
    }
}

fn parse_unitary(text: &str) -> Result<Operator> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(text)?;
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(QresetError::DimensionMismatch("unitary must be 4x4".into()));
    }
    Ok(Operator::from_fn(4, 4, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

#[derive(Serialize)]
struct WeylOut {
    c1: f64,
    c2: f64,
    c3: f64,
    total_angle: f64,
}

#[derive(Serialize)]
struct QslOut {
    min_total_angle: f64,
    target_purity: f64,
    optimizers: Vec<[f64; 3]>,
    max_stationarity_residual: f64,
    achieving_points: usize,
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::Classify(a) => {
            let _ = a.all;
            let rows = classify_all_27_with(&load_spec(&a.spec)?)?;
            let text = match a.format {
                Format::Csv => classify_csv(&rows),
                Format::Json => json(&rows),
            };
            emit(&a.out, &text)
        }
        Command::Tmin(a) => {
            let spec = load_spec(&a.spec)?;
            let (case, s) = resolve_case(&a.case, &spec)?;
            let t = match (&case, a.convention, a.approx) {
                (Case::Pauli(i, j, k), Some(conv), _) => {
                    analytic_tmin_class(*i, *j, *k, &s, conv.into())?.time
                }
                (Case::Pauli(i, j, k), None, true) => match case_parameters(*i, *j, *k, &s)? {
                    CaseParameters::Purifiable(p) => eta_and_tmin(&p)?.t_min_approx,
                    CaseParameters::NotPurifiable => {
                        return Err(QresetError::NoPurification(format!("s{i}s{j}:s{k}")).into())
                    }
                },
                (Case::Angles, Some(_), _) | (Case::Angles, _, true) => {
                    return Err(invalid("--approx and --convention need a Pauli --case"))
                }
                _ => reset_time(&case, &s)?,
            };
            println!("{:.*}", a.precision, t);
            Ok(())
        }
        Command::Table1(a) => {
            let rows = table_i(&TABLE_I_SETS, a.convention.into())?;
            let text = match a.format {
                Format::Csv => table_i_csv(&rows),
                Format::Json => json(&rows),
            };
            emit(&a.out, &text)
        }
        Command::Simulate(a) => {
            let spec = load_spec(&a.spec)?;
            let (case, s) = resolve_case(&a.case, &spec)?;
            let pulse = match &a.pulse {
                Some(p) => PulseSchedule::from_json_str(&read(p)?)?,
                None => {
                    let t = match a.t_max {
                        Some(t) => t,
                        None => 2.0 * reset_time(&case, &s)?,
                    };
                    PulseSchedule::constant(t, resonant_amplitude(&s)?, 1)?
                }
            };
            let t_max = a.t_max.unwrap_or(pulse.duration);
            if a.n_times < 2 {
                return Err(invalid("--n-times must be at least 2"));
            }
            let rho = initial_state(a.initial, &s)?;
            let curve = simulate_purity(&s, &pulse, &rho, &uniform_grid(t_max, a.n_times))?;
            let text = match a.format {
                Format::Csv => curve.to_csv(),
                Format::Json => json(&curve),
            };
            emit(&a.out, &text)
        }
        Command::Weyl(a) => {
            let u = match &a.unitary {
                Some(p) => parse_unitary(&read(p)?)?,
                None => {
                    let spec = load_spec(&a.spec)?;
                    let (_, s) = resolve_case(&a.case, &spec)?;
                    propagator(&hamiltonian(&s, resonant_amplitude(&s)?)?, a.time)?
                }
            };
            let w = weyl_coordinates(&u)?;
            let [c1, c2, c3] = w.canonical();
            print!(
                "{}",
                json(&WeylOut {
                    c1,
                    c2,
                    c3,
                    total_angle: c1 + c2 + c3
                })
            );
            Ok(())
        }
        Command::QslVerify(a) => {
            let anc = match (a.p_e, a.p_g) {
                (Some(pe), Some(pg)) => {
                    AncillaLocalState::new(pe, pg, Complex64::new(a.gamma_re, a.gamma_im))?
                }
                _ => {
                    let spec = load_spec(&a.spec)?;
                    if spec.ancilla_dim() != 2 {
                        return Err(QresetError::WrongAncillaDim {
                            expected: "2".into(),
                            got: spec.ancilla_dim(),
                        }
                        .into());
                    }
                    AncillaLocalState::thermal(spec.omega_b(), spec.beta)
                }
            };
            let r = qsl_verify(&anc, a.grid_n)?;
            if a.out.is_some() {
                let mut csv = String::from("c1,c2,c3,purity,total_angle\n");
                for p in &r.achieving {
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        fmt12(p.c[0]),
                        fmt12(p.c[1]),
                        fmt12(p.c[2]),
                        fmt12(p.purity),
                        fmt12(p.total_angle)
                    ));
                }
                emit(&a.out, &csv)?;
            }
            print!(
                "{}",
                json(&QslOut {
                    min_total_angle: r.min_total_angle,
                    target_purity: r.target_purity,
                    optimizers: r.optimizers.iter().map(|o| o.triple()).collect(),
                    max_stationarity_residual: r.max_stationarity_residual,
                    achieving_points: r.achieving.len(),
                })
            );
            Ok(())
        }
        Command::MaxPurity(a) => {
            match a.sweep {
                Some(n) => {
                    if n < 2 {
                        return Err(invalid("--sweep must be at least 2"));
                    }
                    let dims: Vec<usize> = (2..=n).collect();
                    emit(
                        &a.out,
                        &sweep_csv(&dimension_sweep(a.omega_s, a.gap, a.beta, &dims)?),
                    )?;
                }
                None => {
                    let rows = dimension_sweep(a.omega_s, a.gap, a.beta, &[a.d_b])?;
                    println!("{:.*}", a.precision, rows[0].max_purity);
                }
            }
            Ok(())
        }
        Command::EpsilonCheck(a) => {
            let n = a.eigenvalues.len();
            let rho = Operator::from_fn(n, n, |i, j| {
                Complex64::new(if i == j { a.eigenvalues[i] } else { 0.0 }, 0.0)
            });
            print!("{}", json(&epsilon_reset_check(&rho, a.d_s, a.eps)?));
            Ok(())
        }
        Command::AngleScan(a) => {
            let spec = load_spec(&a.spec)?;
            if let Some(ts) = a.loci {
                let l = abar_c_loci(ts, &spec, a.grid_n)?;
                return emit(&a.out, &json(&l));
            }
            let axis = ScanAxis::parse(&a.axis)?;
            let fixed = match &a.angles {
                Some(v) => BlochAngles::from_slice(v)?,
                None => BlochAngles::from_slice(&[
                    0.0,
                    0.0,
                    0.0,
                    std::f64::consts::FRAC_PI_2,
                    0.0,
                    0.0,
                ])?,
            };
            let rows = angle_scan(axis, &fixed, &spec, a.grid_n)?;
            let text = match a.format {
                Format::Csv => angle_scan_csv(&rows),
                Format::Json => json(&rows),
            };
            emit(&a.out, &text)
        }
        Command::Optimize(a) => {
            let spec = load_spec(&a.spec)?;
            let (case, s) = resolve_case(&a.case, &spec)?;
            let tau = match a.tau {
                Some(t) => t,
                None => reset_time(&case, &s)?,
            };
            let second_channel = match &a.second_channel {
                Some(k) => Some(OperatorSelector::Pauli(parse_pauli(k)? as u8)),
                None => None,
            };
            let opts = OptimizeOptions {
                max_iter: a.max_iter,
                eps_max: a.eps_max,
                second_channel,
                ..Default::default()
            };
            let rho = initial_state(a.initial, &s)?;
            let r = optimize_pulse(&s, &rho, tau, a.segments, &opts)?;
            if r.bound_warning {
                eprintln!(
                    "warning: amplitude bound is below the resonant amplitude; guess clamped"
                );
            }
            if let Some(p) = &a.pulse_csv {
                emit(&Some(p.clone()), &r.pulse.to_csv())?;
            }
            emit(&a.out, &(r.to_json_string() + "\n"))
        }
    }
}

fn configure_threads() -> std::result::Result<(), Failure> {
    if let Ok(v) = std::env::var("QRESET_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            invalid(format!(
                "QRESET_THREADS must be a positive integer, got `{v}`"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Io(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
