//! Command-line front end. Each subcommand calls one library entry point and writes its
//! report as JSON (or CSV) to `--out`, or to stdout when no path is given.
//!
//! Exit status: 0 on success, 1 when a validation check fails, 2 for argument,
//! resource and I/O errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::correlators::{self, CorrelatorQuery, ThermoCorrelator};
use crate::error::{Error, Result};
use crate::finite_state;
use crate::io;
use crate::mera_bounds::{self, MeraBoundQuery, Topology};
use crate::parent_ham::{self, InteractionLength, KernelWeights, TAU_GS};
use crate::tensor_core::{
    random_isometry, validate_isometry, validate_top, Isometry, TopTensor, TAU_ISO,
};
use crate::thermo::ThermoLimit;

#[derive(Debug, Parser)]
#[command(
    name = "hbts",
    version,
    about = "Homogeneous binary-tree tensor states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that an isometry (and optionally a top tensor) is valid.
    Validate(ValidateArgs),
    /// Thermodynamic-limit states rho_1..rho_4 with ranks and spectra.
    Thermo(ThermoArgs),
    /// Spectrum of the adjoint pair descend channel and its exponents log2(kappa).
    Exponents(IsometryArgs),
    /// Thermodynamic correlators at distances 2^m as CSV `delta_alpha,re,im`.
    Correlate(CorrelateArgs),
    /// Compare every channel recursion with brute-force reduced density matrices.
    FiniteCheck(FiniteCheckArgs),
    /// Build the parent interaction from the kernel of rho_nu.
    Parent(ParentArgs),
    /// Exactly diagonalize the parent Hamiltonian on a ring of N sites.
    Diag(DiagArgs),
    /// Check that all grown states V^{(x)N/2}|psi> are unfrustrated ground states.
    SubspaceCheck(SubspaceArgs),
    /// Kernel-rank bounds for scale-invariant MERA.
    MeraBounds(MeraArgs),
    /// Write a seeded random isometry file.
    RandomIsometry(RandomArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IsometryArgs {
    /// Isometry file `{"d": d, "entries": [[l1, l2, u, re, im], ...]}`.
    #[arg(long)]
    pub isometry: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub isometry: PathBuf,
    /// Top tensor file `{"d": d, "entries": [[l1, l2, re, im], ...]}`.
    #[arg(long)]
    pub top: Option<PathBuf>,
    #[arg(long, default_value_t = TAU_ISO)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ThermoArgs {
    #[arg(long)]
    pub isometry: PathBuf,
    /// Block length 1..=4; all four when absent.
    #[arg(long)]
    pub nu: Option<usize>,
    /// Include the density matrices themselves.
    #[arg(long)]
    pub matrices: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub isometry: PathBuf,
    /// Built-in observable (x, y, z, p0, p1, id) or observable file.
    #[arg(long)]
    pub theta: String,
    #[arg(long = "theta-prime")]
    pub theta_prime: String,
    #[arg(long = "m-min", default_value_t = 0)]
    pub m_min: u32,
    #[arg(long = "m-max", default_value_t = 10)]
    pub m_max: u32,
    /// Power-law analysis of the series as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TopChoice {
    /// Top tensor file; the maximally entangled I/sqrt(d) when neither option is given.
    #[arg(long, conflicts_with = "top_seed")]
    pub top: Option<PathBuf>,
    /// Seeded random top tensor.
    #[arg(long = "top-seed")]
    pub top_seed: Option<u64>,
}

impl TopChoice {
    fn resolve(&self, d: usize) -> Result<TopTensor> {
        match (&self.top, self.top_seed) {
            (Some(p), _) => io::read_top_tensor(p),
            (None, Some(seed)) => TopTensor::random(d, seed),
            (None, None) => Ok(TopTensor::maximally_entangled(d)),
        }
    }
}

#[derive(Debug, Args)]
pub struct FiniteCheckArgs {
    #[arg(long)]
    pub isometry: PathBuf,
    #[command(flatten)]
    pub top: TopChoice,
    #[arg(long = "n-max", default_value_t = 4)]
    pub n_max: u32,
    /// Largest residual accepted.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct HamArgs {
    #[arg(long)]
    pub isometry: PathBuf,
    /// Interaction length: auto, 2, 3 or 4.
    #[arg(long, default_value = "auto")]
    pub nu: String,
    /// Comma-separated positive weights E_k, one per kernel vector; all 1 by default.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
}

impl HamArgs {
    fn build(&self) -> Result<(Isometry, ThermoLimit, parent_ham::HamiltonianSpec)> {
        let lam = io::read_isometry(&self.isometry)?;
        let limit = ThermoLimit::solve(&lam)?;
        let weights = match &self.weights {
            Some(w) => KernelWeights::Explicit(w.clone()),
            None => KernelWeights::Uniform,
        };
        let nu: InteractionLength = self.nu.parse()?;
        let hs = parent_ham::build_from_limit(&limit, &weights, nu)?;
        Ok((lam, limit, hs))
    }
}

#[derive(Debug, Args)]
pub struct ParentArgs {
    #[command(flatten)]
    pub ham: HamArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    #[command(flatten)]
    pub ham: HamArgs,
    /// Ring length.
    #[arg(long = "N")]
    pub n_sites: usize,
    #[arg(long = "tau-gs", default_value_t = TAU_GS)]
    pub tau_gs: f64,
    #[arg(long, default_value_t = parent_ham::DEFAULT_HISTOGRAM_BINS)]
    pub bins: usize,
    /// Density-of-states CSV `bin_left,bin_right,count`.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    /// Eigenvalue CSV `index,energy`.
    #[arg(long = "spectrum-csv")]
    pub spectrum_csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SubspaceArgs {
    #[command(flatten)]
    pub ham: HamArgs,
    #[arg(long = "N")]
    pub n_sites: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct MeraArgs {
    /// binary or ternary.
    #[arg(long)]
    pub topology: String,
    #[arg(long)]
    pub d: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct RandomArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

/// What a command produced: the text for `--out` and whether its checks passed.
struct Outcome {
    text: String,
    pass: bool,
}

fn json_outcome(value: &serde_json::Value, pass: bool) -> Result<Outcome> {
    Ok(Outcome {
        text: io::to_json_string(value)?,
        pass,
    })
}

fn emit(out: &Output, text: &str) -> Result<()> {
    match &out.out {
        Some(p) => io::write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_side(path: &Option<PathBuf>, text: String) -> Result<()> {
    match path {
        Some(p) => io::write_atomic(Path::new(p), text.as_bytes()),
        None => Ok(()),
    }
}

fn validate(a: &ValidateArgs) -> Result<Outcome> {
    let lam = io::read_isometry(&a.isometry)?;
    let iso = validate_isometry(&lam, a.tol);
    let mut report = json!({
        "isometry": {"pass": iso.pass, "residual": iso.residual, "tol": iso.tol},
    });
    let mut pass = iso.pass;
    if let Some(p) = &a.top {
        let top = io::read_top_tensor(p)?;
        let r = validate_top(&top, a.tol);
        report["top"] = json!({"pass": r.pass, "residual": r.residual, "tol": r.tol});
        pass &= r.pass;
    }
    report["pass"] = json!(pass);
    json_outcome(&report, pass)
}

fn thermo(a: &ThermoArgs) -> Result<Outcome> {
    let lam = io::read_isometry(&a.isometry)?;
    let limit = ThermoLimit::solve(&lam)?;
    let nus: Vec<usize> = match a.nu {
        Some(nu) => vec![nu],
        None => (1..=4).collect(),
    };
    let mut states = Vec::new();
    for nu in nus {
        let mut r = limit.report(nu)?.to_json();
        if a.matrices {
            r["matrix"] = correlators::operator_json(limit.rho_nu(nu)?.matrix());
        }
        states.push(r);
    }
    let report = json!({
        "d": limit.d(),
        "states": states,
        "one_site_residual": limit.one_site().residual,
        "two_site_residual": limit.rho2_residual(),
        "mixing": limit.one_site().mixing,
    });
    json_outcome(&report, true)
}

fn exponents(a: &IsometryArgs) -> Result<Outcome> {
    let lam = io::read_isometry(&a.isometry)?;
    json_outcome(&correlators::exponent_spectrum(&lam)?.to_json(), true)
}

fn correlate(a: &CorrelateArgs) -> Result<Outcome> {
    let lam = io::read_isometry(&a.isometry)?;
    let q = CorrelatorQuery::new(
        io::resolve_observable(&a.theta)?,
        io::resolve_observable(&a.theta_prime)?,
        a.m_min,
    )?;
    let tc = ThermoCorrelator::new(&lam)?;
    let series = correlators::powerlaw_series(&tc, &q.pair_operator(), a.m_min, a.m_max)?;
    write_side(&a.report, io::to_json_string(&series.to_json())?)?;
    Ok(Outcome {
        text: io::csv_string(&["delta_alpha", "re", "im"], &series.csv_rows()),
        pass: true,
    })
}

fn finite_check(a: &FiniteCheckArgs) -> Result<Outcome> {
    let lam = io::read_isometry(&a.isometry)?;
    let top = a.top.resolve(lam.d())?;
    let report = finite_state::recursion_check(&lam, &top, a.n_max)?;
    let pass = report.worst() <= a.tol;
    let mut j = report.to_json();
    j["tol"] = json!(a.tol);
    j["pass"] = json!(pass);
    json_outcome(&j, pass)
}

fn parent(a: &ParentArgs) -> Result<Outcome> {
    let (_, limit, hs) = a.ham.build()?;
    let mut j = json!({"interaction": hs.to_json()});
    let mut pass = hs.annihilation_residual <= 1e-10;
    if hs.nu >= 3 {
        let n = parent_ham::nullity_from_limit(&limit, &hs)?;
        if n.precondition_met {
            pass &= n.residual <= 1e-10;
        }
        j["nullity"] = n.to_json();
    }
    j["pass"] = json!(pass);
    json_outcome(&j, pass)
}

fn diag(a: &DiagArgs) -> Result<Outcome> {
    let (_, _, hs) = a.ham.build()?;
    let mut rep = parent_ham::diagonalize_parent(&hs, a.n_sites, a.tau_gs)?;
    rep.histogram = parent_ham::histogram(&rep.spectrum, a.bins);
    write_side(
        &a.histogram,
        io::csv_string(&["bin_left", "bin_right", "count"], &rep.histogram_rows()),
    )?;
    write_side(
        &a.spectrum_csv,
        io::csv_string(&["index", "energy"], &rep.spectrum_rows()),
    )?;
    let mut j = rep.to_json();
    j["nu"] = json!(hs.nu);
    j["kernel_dim"] = json!(hs.kernel_dim());
    json_outcome(&j, true)
}

fn subspace_check(a: &SubspaceArgs) -> Result<Outcome> {
    let (lam, _, hs) = a.ham.build()?;
    let rep = parent_ham::grown_subspace_check(&lam, &hs, a.n_sites)?;
    json_outcome(&rep.to_json(), rep.annihilated)
}

fn mera(a: &MeraArgs) -> Result<Outcome> {
    let topology: Topology = a.topology.parse()?;
    let b = mera_bounds::mera_rank_bound(MeraBoundQuery { topology, d: a.d })?;
    json_outcome(&b.to_json(), true)
}

fn random(a: &RandomArgs) -> Result<Outcome> {
    let lam = random_isometry(a.d, a.seed)?;
    json_outcome(&io::isometry_json(&lam), true)
}

fn output_of(cmd: &Command) -> &Output {
    match cmd {
        Command::Validate(a) => &a.output,
        Command::Thermo(a) => &a.output,
        Command::Exponents(a) => &a.output,
        Command::Correlate(a) => &a.output,
        Command::FiniteCheck(a) => &a.output,
        Command::Parent(a) => &a.output,
        Command::Diag(a) => &a.output,
        Command::SubspaceCheck(a) => &a.output,
        Command::MeraBounds(a) => &a.output,
        Command::RandomIsometry(a) => &a.output,
    }
}

fn dispatch(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Validate(a) => validate(a),
        Command::Thermo(a) => thermo(a),
        Command::Exponents(a) => exponents(a),
        Command::Correlate(a) => correlate(a),
        Command::FiniteCheck(a) => finite_check(a),
        Command::Parent(a) => parent(a),
        Command::Diag(a) => diag(a),
        Command::SubspaceCheck(a) => subspace_check(a),
        Command::MeraBounds(a) => mera(a),
        Command::RandomIsometry(a) => random(a),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Validation { .. } | Error::DegenerateFixedPoint { .. } | Error::NoKernel { .. } => 1,
        _ => 2,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = dispatch(&cli.command).and_then(|o| {
        emit(output_of(&cli.command), &o.text)?;
        Ok(o.pass)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("hbts: check failed");
            1
        }
        Err(e) => {
            eprintln!("hbts: {e}");
            exit_code(&e)
        }
    }
}
