//! Command-line laboratory for quantumness tests: spectra of sums, squared
//! operator orders, classical value-assignment models, correlation bounds,
//! phase-space pairing, and photon-beam moments.
//!
//! Exit codes: 0 success, 1 usage (unknown subcommand or malformed flags),
//! 2 validation error (bad inputs, broken premises), 3 physics or numerical
//! tolerance failure (a documented assertion of the computation failed).

mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use quantumness::beam::{
    crossover_scan, default_direction, moment_check, stokes_reconstruct, BeamAmplitude,
    TwoModeFock,
};
use quantumness::bell::{
    bchsh_value, hvm_additivity_defect, hvm_mean, separable_bound_scan, singlet_state,
    tsirelson_setting, BchshSetting, HVMObservable,
};
use quantumness::operators::{DensityState, HermitianOperator};
use quantumness::phase_space::{pairing_check, q_grid, FockSpace1M, GridSpec, PSymbol};
use quantumness::qtests::{
    minimality_check, square_order_test, sum_spectrum_test, witness_search, WitnessMode,
};

use input::{
    parse_amplitude, parse_bloch, parse_f64_list, parse_observable, parse_observable2,
    parse_mode_state, parse_state,
};
use output::{render_json, write_output, Envelope, SCHEMA_VERSION};

/// Gate for the Monte Carlo mean: generous enough that a correct sampler
/// fails with probability ~1e-9 per run.
const MC_SIGMA_GATE: f64 = 6.0;
/// Classical correlation bound for separable states, with numerical slack.
const SEPARABLE_GATE: f64 = 2.0 + 1e-9;
/// Trace-pairing agreement gate.
const PAIRING_GATE: f64 = 1e-3;
/// Beam moment agreement gate (plus the state's tail bound).
const MOMENT_GATE: f64 = 1e-8;
/// Relative agreement between the bracketed and closed-form crossover.
const CROSSOVER_GATE: f64 = 1e-6;
/// Polarization readout gates.
const STOKES_GATE: f64 = 1e-9;

/// A failed run: exit code plus a message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn physics(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

impl From<quantumness::Error> for Failure {
    fn from(e: quantumness::Error) -> Self {
        if e.is_validation() {
            Self::validation(e.to_string())
        } else {
            Self::physics(e.to_string())
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Unconstrained Hermitian factors.
    General,
    /// Commuting (diagonal) factors; control run that never violates.
    Diagonal,
}

#[derive(Parser)]
#[command(
    name = "quantumness",
    version,
    about = "Numerical experiments separating quantum observables from classical value assignments",
    after_help = "Matrices are passed inline as JSON {\"dim\":n,\"re\":[[..]],\"im\":[[..]]} or as \
                  named forms (identity, pauli-x, pauli-y, pauli-z). Exit codes: 0 success, 1 usage, \
                  2 validation error, 3 physics/tolerance failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for all random sampling.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Monte Carlo sample or trial count.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    samples: usize,

    /// Basis truncation for single-mode and beam subcommands.
    #[arg(long, global = true, default_value_t = 30)]
    cutoff: usize,

    /// Tolerance for premises and margins.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,

    /// Write the report here instead of stdout; relative paths resolve
    /// against $QUANTUMNESS_OUT_DIR when it is set.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Report format; csv is defined for qfunc (re,im,q) and crossover
    /// (N,margin,term1,term2) only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Sum-spectrum test: are the outcomes of C = A + B sums of outcomes of
    /// A and B?
    #[command(long_about = "Computes the spectra of A, B, and C (premise \
        ||A + B - C||_F <= 1e-10), forms the sumset {x + y : x in Sp(A), y in Sp(B)}, and \
        reports the largest distance from an eigenvalue of C to the sumset. Commuting \
        observables give distance 0; a positive distance is the quantum signature. \
        Demo: --a pauli-x --b pauli-z --c '{...sum...}' gives distance 2 - sqrt(2).")]
    QtestA {
        /// First observable (named form or JSON matrix).
        #[arg(long)]
        a: String,
        /// Second observable.
        #[arg(long)]
        b: String,
        /// Candidate sum observable.
        #[arg(long)]
        c: String,
    },

    /// Square-order test: does 0 <= A <= B force A^2 <= B^2?
    #[command(long_about = "For a premise pair with A >= 0, reports the order margin \
        min eig(B - A) and the square margin min eig(B^2 - A^2). A negative square margin \
        under a valid order cannot happen for commuting observables; the eigenstate at the \
        minimum is returned as the violating state. Preset: --pair builtin:av gives square \
        margin 1 - sqrt(1.25) ~ -0.118.")]
    QtestB {
        /// Pair preset (builtin:av).
        #[arg(long)]
        pair: Option<String>,
        /// First observable, required without --pair.
        #[arg(long)]
        a: Option<String>,
        /// Second observable, required without --pair.
        #[arg(long)]
        b: Option<String>,
    },

    /// Randomized search for order pairs whose squares reverse.
    #[command(long_about = "Random restarts plus pattern search over factor pairs \
        A = G1^H G1, B = A + G2^H G2 (so 0 <= A <= B by construction, rescaled to \
        tr B = dim), minimizing min eig(B^2 - A^2). Mode 'diagonal' restricts to commuting \
        candidates as a control; its margin never drops below -1e-9.")]
    WitnessSearch {
        /// Observable dimension.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Candidate evaluations.
        #[arg(long, default_value_t = 2000)]
        iterations: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::General)]
        mode: ModeArg,
    },

    /// Check that the operator order is the minimal certificate for
    /// state-mean order.
    #[command(long_about = "Given a premise pair with A >= 0 and a state list, verifies \
        that whenever every listed state satisfies mean(A) <= mean(B) (accessible order), \
        the operator order min eig(B - A) >= -tol holds as well. Exit 3 when the accessible \
        order holds but the operator order fails. Default states: eigenstates of A and B \
        plus the maximally mixed state.")]
    Minimality {
        /// Lower observable (named form or JSON), must be positive semidefinite.
        #[arg(long)]
        a: String,
        /// Upper observable (named form or JSON), same dimension as A.
        #[arg(long)]
        b: String,
        /// Density matrix (JSON); repeat for several states.
        #[arg(long = "state")]
        states: Vec<String>,
    },

    /// Classical model mean for one spin observable vs the quantum value.
    #[command(long_about = "The model assigns F(m) = a0 + |a| when (m + k) . a > 0 and \
        a0 - |a| otherwise, with m uniform on the unit sphere and k the preparation \
        direction. Its exact mean a0 + k . a equals the quantum value \
        tr(rho_k (a0 I + a . sigma)); the Monte Carlo estimate must land within \
        6 sigma_MC, sigma_MC = |a| / sqrt(samples) (exit 3 otherwise).")]
    BellHvm {
        /// Offset a0 of the observable a0 + a . sigma.
        #[arg(long, default_value_t = 0.0)]
        a0: f64,
        /// Observable direction a as x,y,z (any length).
        #[arg(long)]
        a: String,
        /// Preparation direction k as x,y,z (unit).
        #[arg(long)]
        k: String,
    },

    /// Mean-square additivity defect of the model's value assignment.
    #[command(long_about = "Estimates E[(F_A + F_B - F_{A+B})^2] with all three values \
        read at the same sample point. Exactly zero samplewise when a and b are parallel; \
        strictly positive otherwise (about 1.17 for orthogonal unit directions at k = z).")]
    HvmDefect {
        #[arg(long, default_value_t = 0.0)]
        a0: f64,
        /// First direction as x,y,z.
        #[arg(long)]
        a: String,
        #[arg(long, default_value_t = 0.0)]
        b0: f64,
        /// Second direction as x,y,z.
        #[arg(long)]
        b: String,
        /// Preparation direction as x,y,z (unit).
        #[arg(long)]
        k: String,
    },

    /// Four-correlator combination on a two-qubit state.
    #[command(long_about = "Evaluates F = E(a1,b1) + E(a1,b2) + E(a2,b1) - E(a2,b2) with \
        E(a,b) = tr(rho (a.sigma) x (b.sigma)). Deterministic +-1 assignments give \
        |F| <= 2; the preset 'tsirelson' pairs the singlet state with settings reaching \
        2 sqrt(2). Values above 2 sqrt(2) + 1e-9 are rejected (exit 3).")]
    Bchsh {
        /// Setting preset (builtin:tsirelson).
        #[arg(long)]
        preset: Option<String>,
        /// First side-A direction as x,y,z; required without --preset.
        #[arg(long)]
        a1: Option<String>,
        /// Second side-A direction as x,y,z; required without --preset.
        #[arg(long)]
        a2: Option<String>,
        /// First side-B direction as x,y,z; required without --preset.
        #[arg(long)]
        b1: Option<String>,
        /// Second side-B direction as x,y,z; required without --preset.
        #[arg(long)]
        b2: Option<String>,
        /// Two-qubit density matrix (JSON, 4x4); defaults to the singlet.
        #[arg(long)]
        state: Option<String>,
    },

    /// Random separable states stay below the classical correlation bound.
    #[command(long_about = "Samples mixtures of up to four product states (Dirichlet \
        weights, Bloch-ball factors) with random settings and tracks max |F| over \
        --samples trials plus a histogram of |F|. Exit 3 if the separable bound \
        2 + 1e-9 is exceeded.")]
    SeparableScan,

    /// Sample the coherent-state occupation density on a grid.
    #[command(long_about = "Q(alpha) = <alpha| rho |alpha> on a centered square midpoint \
        grid (radius 2 + 2 sqrt(cutoff), spacing 0.05 by default). Values satisfy \
        0 <= Q <= 1. CSV columns: re,im,q.")]
    Qfunc {
        /// State: vacuum, number:N, coherent:RE[,IM], thermal:NBAR, or JSON.
        #[arg(long)]
        state: String,
        /// Override the grid radius.
        #[arg(long)]
        radius: Option<f64>,
        /// Override the grid spacing.
        #[arg(long)]
        spacing: Option<f64>,
    },

    /// Trace formula via phase-space quadrature.
    #[command(long_about = "Integrates Q(alpha) F(alpha) over the plane, where F is the \
        observable's anti-normal symbol with the 1/pi weight folded in, and compares with \
        tr(rho A). Symbols: identity (F = 1/pi), number (F = (|alpha|^2 - 1)/pi), \
        number-squared (F = (|alpha|^4 - 3|alpha|^2 + 1)/pi). The quadrature error is \
        estimated by half-grid comparison against --quad-tol; exit 3 when \
        |integral - trace| exceeds 1e-3.")]
    Pairing {
        /// Symbol name: identity, number, or number-squared.
        #[arg(long)]
        symbol: String,
        /// State: vacuum, number:N, coherent:RE[,IM], thermal:NBAR, or JSON.
        #[arg(long)]
        state: String,
        /// Quadrature error budget (half-grid estimate).
        #[arg(long, default_value_t = 1e-3)]
        quad_tol: f64,
        /// Override the grid radius.
        #[arg(long)]
        radius: Option<f64>,
        /// Override the grid spacing.
        #[arg(long)]
        spacing: Option<f64>,
    },

    /// Beam moments of a lifted observable against closed forms.
    #[command(long_about = "For the coherent beam of amplitude xi, \
        <Gamma(A)> = <xi, A xi> and <Gamma(A)^2> = <xi, A xi>^2 + <xi, A^2 xi>, where \
        Gamma is the photon-number-conserving lift of the 2x2 observable A. Exit 3 when \
        the truncated evaluation deviates by more than 1e-8 + tail bound.")]
    BeamMoments {
        /// 2x2 observable (named form or JSON).
        #[arg(long)]
        observable: String,
        /// Beam amplitude as re1,im1,re2,im2.
        #[arg(long)]
        xi: String,
    },

    /// Intensity scan of the classical/quantum moment margin.
    #[command(long_about = "margin(N) = N^2 (<u,Bu>^2 - <u,Au>^2) + \
        N (<u,B^2u> - <u,A^2u>) at beam amplitude xi = sqrt(N) u: the quadratic \
        (classical) term dominates bright beams, the linear (per-photon) term makes weak \
        beams negative. Rows whose intensity fits the cutoff also carry numerically \
        evaluated moments. Default direction: bottom eigenvector of B^2 - A^2. CSV \
        columns: N,margin,term1,term2. Exit 3 if a bracketed sign change disagrees with \
        the closed-form root beyond 1e-6 relative.")]
    Crossover {
        /// Pair preset (builtin:av).
        #[arg(long)]
        pair: Option<String>,
        /// Lower 2x2 observable (named form or JSON); alternative to --pair.
        #[arg(long)]
        a: Option<String>,
        /// Upper 2x2 observable (named form or JSON); alternative to --pair.
        #[arg(long)]
        b: Option<String>,
        /// Unit direction as re1,im1,re2,im2; defaults to the bottom
        /// eigenvector of B^2 - A^2.
        #[arg(long)]
        direction: Option<String>,
        /// Comma-separated intensity list.
        #[arg(long)]
        intensities: Option<String>,
    },

    /// Polarization readout and single-photon state reconstruction.
    #[command(long_about = "Measures S_mu = <Gamma(sigma_mu)> on the coherent beam of xi \
        (sigma_0 = I, sigma_1 = pauli-x, sigma_2 = pauli-y, sigma_3 = diag(1,-1); mode 1 \
        is horizontal). Coherent beams are fully polarized: s = (S1,S2,S3)/S0 has \
        |s| = 1 and (I + s.sigma)/2 equals xi xi^H / N within 1e-9 (exit 3 otherwise).")]
    Stokes {
        /// Beam amplitude as re1,im1,re2,im2.
        #[arg(long)]
        xi: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if cli.format == Format::Csv
        && !matches!(cli.command, Command::Qfunc { .. } | Command::Crossover { .. })
    {
        return Err(Failure::validation(
            "csv output is defined for qfunc and crossover only",
        ));
    }
    match &cli.command {
        Command::QtestA { a, b, c } => {
            let report = sum_spectrum_test(
                &parse_observable(a)?,
                &parse_observable(b)?,
                &parse_observable(c)?,
                cli.tol,
            )?;
            emit(cli, "qtest-a", report)
        }
        Command::QtestB { pair, a, b } => {
            let (a, b) = resolve_pair(pair, a, b)?;
            let report = square_order_test(&a, &b, cli.tol)?;
            emit(cli, "qtest-b", report)
        }
        Command::WitnessSearch { dim, iterations, mode } => {
            let mode = match mode {
                ModeArg::General => WitnessMode::General,
                ModeArg::Diagonal => WitnessMode::Diagonal,
            };
            let report = witness_search(*dim, cli.seed, *iterations, mode)?;
            emit(cli, "witness-search", report)
        }
        Command::Minimality { a, b, states } => {
            let a = parse_observable(a)?;
            let b = parse_observable(b)?;
            let states = if states.is_empty() {
                default_minimality_states(&a, &b)?
            } else {
                states.iter().map(|s| parse_state(s)).collect::<Result<_, _>>()?
            };
            let report = minimality_check(&states, &a, &b, cli.tol)?;
            let holds = report.minimality_holds;
            emit(cli, "minimality", report)?;
            if !holds {
                return Err(Failure::physics(
                    "accessible order holds but the operator order fails",
                ));
            }
            Ok(())
        }
        Command::BellHvm { a0, a, k } => {
            let obs = HVMObservable::new(*a0, parse_bloch(a)?);
            let report = hvm_mean(&obs, &parse_bloch(k)?, cli.samples, cli.seed)?;
            let gap = (report.mc_mean - report.analytic_mean).abs();
            let bound = MC_SIGMA_GATE * report.sigma_mc;
            let detail = format!(
                "Monte Carlo mean {} deviates from {} by {gap:.3e} (> {MC_SIGMA_GATE} sigma = {bound:.3e})",
                report.mc_mean, report.analytic_mean
            );
            emit(cli, "bell-hvm", report)?;
            if gap > bound {
                return Err(Failure::physics(detail));
            }
            Ok(())
        }
        Command::HvmDefect { a0, a, b0, b, k } => {
            let obs_a = HVMObservable::new(*a0, parse_bloch(a)?);
            let obs_b = HVMObservable::new(*b0, parse_bloch(b)?);
            let report =
                hvm_additivity_defect(&obs_a, &obs_b, &parse_bloch(k)?, cli.samples, cli.seed)?;
            emit(cli, "hvm-defect", report)
        }
        Command::Bchsh { preset, a1, a2, b1, b2, state } => {
            let setting = resolve_setting(preset, a1, a2, b1, b2)?;
            let rho = match state {
                Some(text) => parse_state(text)?,
                None => singlet_state(),
            };
            let value = bchsh_value(&rho, &setting)?;
            #[derive(Serialize)]
            struct BchshReport {
                value: f64,
                setting: BchshSetting,
                classical_bound: f64,
                quantum_bound: f64,
            }
            emit(cli, "bchsh", BchshReport {
                value,
                setting,
                classical_bound: quantumness::bell::CLASSICAL_BOUND,
                quantum_bound: quantumness::bell::QUANTUM_BOUND,
            })
        }
        Command::SeparableScan => {
            let report = separable_bound_scan(cli.samples, cli.seed)?;
            let max = report.max_abs_f;
            emit(cli, "separable-scan", report)?;
            if max > SEPARABLE_GATE {
                return Err(Failure::physics(format!(
                    "separable scan reached |F| = {max} above the bound {SEPARABLE_GATE}"
                )));
            }
            Ok(())
        }
        Command::Qfunc { state, radius, spacing } => {
            let space = FockSpace1M::new(cli.cutoff)?;
            let rho = parse_mode_state(state, &space)?;
            let grid = resolve_grid(cli.cutoff, *radius, *spacing)?;
            let values = q_grid(&rho, &grid)?;
            match cli.format {
                Format::Csv => {
                    let mut text = String::from("re,im,q\n");
                    for (re, im, q) in &values {
                        text.push_str(&format!("{re},{im},{q}\n"));
                    }
                    write_output(cli.output.as_ref(), &text)
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct QFuncReport {
                        grid: GridSpec,
                        points_per_axis: usize,
                        values: Vec<(f64, f64, f64)>,
                    }
                    emit(cli, "qfunc", QFuncReport {
                        grid,
                        points_per_axis: grid.points_per_axis(),
                        values,
                    })
                }
            }
        }
        Command::Pairing { symbol, state, quad_tol, radius, spacing } => {
            let space = FockSpace1M::new(cli.cutoff)?;
            let rho = parse_mode_state(state, &space)?;
            let symbol = PSymbol::for_name(symbol, &space)?;
            let grid = resolve_grid(cli.cutoff, *radius, *spacing)?;
            let report = pairing_check(&rho, &symbol, &grid, *quad_tol)?;
            let discrepancy = report.discrepancy;
            emit(cli, "pairing", report)?;
            if discrepancy > PAIRING_GATE {
                return Err(Failure::physics(format!(
                    "pairing discrepancy {discrepancy:.3e} exceeds {PAIRING_GATE}"
                )));
            }
            Ok(())
        }
        Command::BeamMoments { observable, xi } => {
            let space = TwoModeFock::new(cli.cutoff)?;
            let obs = parse_observable2(observable)?;
            let xi = parse_amplitude(xi)?;
            let report = moment_check(&obs, &BeamAmplitude::new(xi[0], xi[1]), &space)?;
            let budget = MOMENT_GATE + report.tail_bound;
            let err = (report.mean - report.analytic_mean)
                .abs()
                .max((report.second_moment - report.analytic_second).abs());
            emit(cli, "beam-moments", report)?;
            if err > budget {
                return Err(Failure::physics(format!(
                    "moment deviation {err:.3e} exceeds {budget:.3e}"
                )));
            }
            Ok(())
        }
        Command::Crossover { pair, a, b, direction, intensities } => {
            let (a, b) = resolve_pair(pair, a, b)?;
            let space = TwoModeFock::new(cli.cutoff)?;
            let u = match direction {
                Some(text) => parse_amplitude(text)?,
                None => default_direction(&a, &b)?,
            };
            let ns = match intensities {
                Some(text) => parse_f64_list(text)?,
                None => vec![0.01, 0.0316, 0.1, 0.316, 1.0, 3.16, 10.0, 31.6, 100.0],
            };
            let table = crossover_scan(&a, &b, &u, &ns, &space)?;
            let mismatch = table.crossover_bracketed.and_then(|root| {
                let rel = (root - table.crossover_closed_form).abs()
                    / table.crossover_closed_form.abs().max(f64::MIN_POSITIVE);
                (rel > CROSSOVER_GATE).then_some((root, rel))
            });
            match cli.format {
                Format::Csv => {
                    let mut text = String::from("N,margin,term1,term2\n");
                    for row in &table.rows {
                        text.push_str(&format!(
                            "{},{},{},{}\n",
                            row.intensity, row.margin, row.term1, row.term2
                        ));
                    }
                    write_output(cli.output.as_ref(), &text)?;
                }
                Format::Json => emit(cli, "crossover", table)?,
            }
            if let Some((root, rel)) = mismatch {
                return Err(Failure::physics(format!(
                    "bracketed root {root} disagrees with the closed form by {rel:.3e} relative"
                )));
            }
            Ok(())
        }
        Command::Stokes { xi } => {
            let space = TwoModeFock::new(cli.cutoff)?;
            let xi = parse_amplitude(xi)?;
            let report = stokes_reconstruct(&BeamAmplitude::new(xi[0], xi[1]), &space)?;
            let norm_err = (report.bloch_norm - 1.0).abs();
            let residual = report.reconstruction_residual;
            emit(cli, "stokes", report)?;
            if norm_err > STOKES_GATE || residual > STOKES_GATE {
                return Err(Failure::physics(format!(
                    "polarization readout off the coherent-beam identity: \
                     | |s| - 1 | = {norm_err:.3e}, reconstruction residual {residual:.3e}"
                )));
            }
            Ok(())
        }
    }
}

fn emit<T: Serialize>(cli: &Cli, command: &'static str, report: T) -> Result<(), Failure> {
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        seed: cli.seed,
        samples: cli.samples,
        cutoff: cli.cutoff,
        tol: cli.tol,
        report,
    };
    write_output(cli.output.as_ref(), &render_json(&envelope)?)
}

fn av_pair() -> (HermitianOperator, HermitianOperator) {
    (
        HermitianOperator::diagonal(&[1.0, 0.0]),
        HermitianOperator::from_real(&[vec![1.5, 0.5], vec![0.5, 0.5]]).unwrap(),
    )
}

fn resolve_pair(
    pair: &Option<String>,
    a: &Option<String>,
    b: &Option<String>,
) -> Result<(HermitianOperator, HermitianOperator), Failure> {
    match (pair, a, b) {
        (Some(name), None, None) => match name.as_str() {
            "builtin:av" | "av" => Ok(av_pair()),
            other => Err(Failure::validation(format!(
                "unknown pair preset {other:?}; available: builtin:av"
            ))),
        },
        (None, Some(a), Some(b)) => Ok((parse_observable(a)?, parse_observable(b)?)),
        _ => Err(Failure::validation(
            "provide either --pair builtin:av or both --a and --b",
        )),
    }
}

fn resolve_setting(
    preset: &Option<String>,
    a1: &Option<String>,
    a2: &Option<String>,
    b1: &Option<String>,
    b2: &Option<String>,
) -> Result<BchshSetting, Failure> {
    match (preset, a1, a2, b1, b2) {
        (Some(name), None, None, None, None) => match name.as_str() {
            "builtin:tsirelson" | "tsirelson" => Ok(tsirelson_setting()),
            other => Err(Failure::validation(format!(
                "unknown setting preset {other:?}; available: builtin:tsirelson"
            ))),
        },
        (None, Some(a1), Some(a2), Some(b1), Some(b2)) => Ok(BchshSetting::new(
            parse_bloch(a1)?,
            parse_bloch(a2)?,
            parse_bloch(b1)?,
            parse_bloch(b2)?,
        )?),
        _ => Err(Failure::validation(
            "provide either --preset builtin:tsirelson or all of --a1 --a2 --b1 --b2",
        )),
    }
}

fn resolve_grid(cutoff: usize, radius: Option<f64>, spacing: Option<f64>) -> Result<GridSpec, Failure> {
    let base = GridSpec::default_for(cutoff);
    Ok(GridSpec::new(
        radius.unwrap_or(base.radius),
        spacing.unwrap_or(base.spacing),
    )?)
}

/// Eigenstates of both observables plus the maximally mixed state: a small
/// family that can already witness an accessible-order gap.
fn default_minimality_states(
    a: &HermitianOperator,
    b: &HermitianOperator,
) -> Result<Vec<DensityState>, Failure> {
    let mut states = Vec::new();
    for obs in [a, b] {
        let eig = obs.eigh()?;
        for i in 0..obs.dim() {
            states.push(DensityState::pure(&eig.vector(i))?);
        }
    }
    states.push(DensityState::maximally_mixed(a.dim()));
    Ok(states)
}
