//! Command line driver. `run` returns the process exit code.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::basis::ErrorBasis;
use crate::builders::{build_example, Example};
use crate::classify::{
    definite_form_from_mu, from_t_vector, gluable_family, mu_from_definite_form, mu_to_t, t_to_mu, uniform_sequences, MuVector, PushedSequence, TVector,
};
use crate::config::Config;
use crate::error::{GlueError, Result};
use crate::io::{self, parse_basis_spec, parse_complex_csv};
use crate::mps::{self, MpsTensor};
use crate::protocol::run_trials;
use crate::push::{gluability_check, nogo_check, Verdict};
use crate::report;

#[derive(Parser, Debug)]
#[command(name = "gluekit", version, about = "Decide and simulate measurement-based preparation of MPS")]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Build a named example tensor.
    Example(ExampleArgs),
    /// Gluability verdict, push sequences and spectra.
    Analyze(AnalyzeArgs),
    /// Gluable families and t/μ conversions.
    Classify(ClassifyArgs),
    /// Monte Carlo run of the measure-and-correct protocol.
    Simulate(SimulateArgs),
    /// Correlation and entanglement spectra.
    Spectrum(SpectrumArgs),
}

#[derive(Args, Debug)]
pub struct ExampleArgs {
    pub name: String,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long = "beta-prime", allow_hyphen_values = true)]
    pub beta_prime: Option<f64>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub eta: Option<usize>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// pauli, clock:N, or a basis JSON file.
    #[arg(long, default_value = "pauli")]
    pub basis: String,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Print the human-readable table to stdout.
    #[arg(long)]
    pub table: bool,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long, default_value = "pauli")]
    pub basis: String,
    #[arg(long, conflicts_with_all = ["sequences", "t", "mu"])]
    pub uniform: bool,
    /// JSON file `{"sequences": [{"ops": [...], "preperiod": k}, ...]}`.
    #[arg(long, conflicts_with_all = ["t", "mu"])]
    pub sequences: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma separated t-vector, entries like 0.5 or 0.1-0.2i.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "mu")]
    pub t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// Write the resulting tensor (or sampled tensors, numbered) here.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "pauli")]
    pub basis: String,
    #[arg(long, default_value_t = 6)]
    pub sites: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum What {
    Correlation,
    Entanglement,
    Both,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub what: What,
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Print JSON instead of the table.
    #[arg(long)]
    pub json: bool,
}

/// Minimum fidelity a simulation must reach to succeed.
pub const FIDELITY_FLOOR: f64 = 1.0 - 1e-9;

fn emit(out: &mut dyn Write, path: Option<&Path>, v: &Value) -> Result<()> {
    match path {
        Some(p) => io::write_json(p, v),
        None => {
            out.write_all(io::to_string(v).as_bytes())?;
            Ok(())
        }
    }
}

fn example(a: &ExampleArgs, out: &mut dyn Write) -> Result<i32> {
    let ex: Example = a.name.parse()?;
    let mut p = BTreeMap::new();
    if let Some(b) = a.beta {
        p.insert("beta".to_string(), b);
    }
    if let Some(b) = a.beta_prime {
        p.insert("beta_prime".to_string(), b);
    }
    if let Some(n) = a.n {
        p.insert("N".to_string(), n as f64);
    }
    if let Some(e) = a.eta {
        p.insert("eta".to_string(), e as f64);
    }
    let t = build_example(ex, &p)?;
    emit(out, a.emit.as_deref(), &io::mps_to_json(&t))?;
    Ok(0)
}

fn analyze(a: &AnalyzeArgs, cfg: &Config, out: &mut dyn Write) -> Result<i32> {
    let t = io::load_mps(&a.input)?;
    let basis = parse_basis_spec(&a.basis)?;
    if basis.chi != t.chi() {
        return Err(GlueError::DimensionMismatch { expected: t.chi(), got: basis.chi });
    }
    let r = gluability_check(&t, &basis, cfg);
    let mut v = report::gluability_json(&r, &basis);
    if let Ok(n) = nogo_check(&r.tensor, &cfg.tol) {
        v["nogo"] = report::nogo_json(&n);
    }
    if a.table {
        out.write_all(report::gluability_table(&r).as_bytes())?;
        if let Some(p) = &a.output {
            io::write_json(p, &v)?;
        }
    } else {
        emit(out, a.output.as_deref(), &v)?;
    }
    Ok(0)
}

fn sequences_from_json(v: &Value, chi: usize) -> Result<Vec<PushedSequence>> {
    let seqs = v
        .get("sequences")
        .and_then(Value::as_array)
        .ok_or_else(|| GlueError::Parse("expected `sequences` array".into()))?;
    seqs.iter()
        .map(|s| {
            let ops = s
                .get("ops")
                .and_then(Value::as_array)
                .ok_or_else(|| GlueError::Parse("sequence needs `ops`".into()))?
                .iter()
                .map(|m| io::matrix_from(m, chi))
                .collect::<Result<Vec<_>>>()?;
            let preperiod = s.get("preperiod").and_then(Value::as_u64).unwrap_or(0) as usize;
            Ok(PushedSequence { ops, preperiod })
        })
        .collect()
}

fn numbered(path: &Path, k: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sample");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("json");
    path.with_file_name(format!("{stem}_{k}.{ext}"))
}

fn classify(a: &ClassifyArgs, cfg: &Config, out: &mut dyn Write) -> Result<i32> {
    let basis: ErrorBasis = parse_basis_spec(&a.basis)?;
    if let Some(ts) = &a.t {
        let t = TVector::normalized(parse_complex_csv(ts)?)?;
        let mu = t_to_mu(&basis, &t)?;
        let tensor = from_t_vector(&basis, &t)?;
        return finish_conversion(a, &t, &mu, &tensor, out);
    }
    if let Some(ms) = &a.mu {
        let raw = parse_complex_csv(ms)?;
        let (mu, _) = mu_from_definite_form(&basis, &definite_form_from_mu(&basis, &raw)?)?;
        let mu = MuVector { mu: raw, physical: mu.physical };
        let t = mu_to_t(&basis, &mu)?;
        let tensor = from_t_vector(&basis, &t)?;
        return finish_conversion(a, &t, &mu, &tensor, out);
    }
    let seqs = match &a.sequences {
        Some(p) => sequences_from_json(&io::read_json(p)?, basis.chi)?,
        None if a.uniform => uniform_sequences(&basis),
        None => return Err(GlueError::InvalidArg("one of --uniform, --sequences, --t, --mu is required".into())),
    };
    let fam = gluable_family(&basis, &seqs)?;
    let seed = a.seed.unwrap_or(cfg.seed);
    let samples = fam.sample_seeded(seed, a.samples)?;
    if let Some(p) = &a.emit {
        for (k, s) in samples.iter().enumerate() {
            io::save_mps(&numbered(p, k), s)?;
        }
    }
    emit(out, None, &report::family_json(&fam, &samples))?;
    Ok(0)
}

fn finish_conversion(
    a: &ClassifyArgs,
    t: &TVector,
    mu: &MuVector,
    tensor: &MpsTensor,
    out: &mut dyn Write,
) -> Result<i32> {
    if let Some(p) = &a.emit {
        io::save_mps(p, tensor)?;
    }
    emit(out, None, &report::conversion_json(t, mu, tensor))?;
    Ok(0)
}

fn simulate(a: &SimulateArgs, cfg: &Config, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let t = io::load_mps(&a.input)?;
    let basis = parse_basis_spec(&a.basis)?;
    if basis.chi != t.chi() {
        return Err(GlueError::DimensionMismatch { expected: t.chi(), got: basis.chi });
    }
    let mut cfg = cfg.clone();
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let (chi, d) = (t.chi() as u128, t.d() as u128);
    let need = chi.pow(4).saturating_mul(d.saturating_pow(a.sites as u32));
    if need > cfg.memory_guard {
        return Err(GlueError::TooLarge { requested: need, limit: cfg.memory_guard });
    }
    let r = gluability_check(&t, &basis, &cfg);
    if r.verdict != Verdict::RightGluable {
        return Err(GlueError::CorrectionFailed(format!(
            "tensor is {} for this basis; no deterministic correction exists",
            r.verdict.label()
        )));
    }
    let stats = run_trials(&t, &basis, a.sites, a.trials, &cfg)?;
    emit(out, a.output.as_deref(), &report::trials_json(&stats))?;
    if stats.min_fidelity < FIDELITY_FLOOR {
        writeln!(err, "error: minimum fidelity {:.3e} below 1 - 1e-9", stats.min_fidelity)?;
        return Ok(3);
    }
    Ok(0)
}

fn spectrum(a: &SpectrumArgs, out: &mut dyn Write) -> Result<i32> {
    let t = io::load_mps(&a.input)?;
    let want_c = a.what != What::Entanglement;
    let want_e = a.what != What::Correlation;
    let corr = if want_c || a.plot.is_some() {
        Some(mps::transfer_matrix(&t)?.eigenvalues)
    } else {
        None
    };
    let ent = if want_e || a.plot.is_some() { Some(mps::entanglement_spectrum(&t)?) } else { None };
    let (corr_shown, ent_shown) = (corr.as_deref().filter(|_| want_c), ent.as_ref().filter(|_| want_e));
    if a.json {
        emit(out, None, &report::spectrum_json(corr_shown, ent_shown))?;
    } else {
        let mut s = String::new();
        if let Some(c) = corr_shown {
            s.push_str(&report::correlation_table(c));
        }
        if let Some(e) = ent_shown {
            s.push_str(&report::entanglement_table(e));
        }
        out.write_all(s.as_bytes())?;
    }
    if let Some(p) = &a.plot {
        std::fs::write(p, report::spectrum_svg(corr.as_deref().unwrap_or(&[]), ent.as_ref()))?;
    }
    Ok(0)
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match &cli.cmd {
        Cmd::Example(a) => example(a, out),
        Cmd::Analyze(a) => analyze(a, &cfg, out),
        Cmd::Classify(a) => classify(a, &cfg, out),
        Cmd::Simulate(a) => simulate(a, &cfg, out, err),
        Cmd::Spectrum(a) => spectrum(a, out),
    }
}

/// Parse arguments and run. Exit codes: 0 ok, 1 input, 2 domain, 3 protocol, 4 resource guard.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            let _ = writeln!(err, "{}", json!({"error": e.to_string(), "exit_code": e.exit_code()}));
            e.exit_code()
        }
    }
}
