//! `sturmctl`: command-line front end for the `sturmian` crate.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use sturmian::partition::{coarsest_level, standard_partition, two_block_decomposition};
use sturmian::records::{self, Record, CSV_COLUMNS};
use sturmian::spectral::growth::{certified_bound, growth_fit, resample_violation};
use sturmian::spectral::lyapunov::{
    geometric_lengths, level_for_length, lyapunov_along_phase, lyapunov_estimate_with_tol, DEFAULT_CERT_TOL,
};
use sturmian::spectral::spectrum::{approximate_spectrum, SpectrumApprox, DEFAULT_TOL};
use sturmian::sturmian::{build_sn, c_prefix, rotation_word};
use sturmian::transfer::word_product;
use sturmian::verify::{run_all, run_criterion, VerifyConfig};
use sturmian::{ContinuedFraction, Energy, Error, ErrorClass, Phase, RotationParams, Word};

const DEFAULT_SEED: u64 = 20_240_917;
const DEFAULT_CF_DEPTH: usize = 64;

#[derive(Parser)]
#[command(name = "sturmctl", version, about = "Sturmian words and transfer-matrix experiments")]
struct Cli {
    /// Print the output formats and exit.
    #[arg(long)]
    schema: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Print s_n, a prefix of c_α, or a window of a rotation word.
    Word(WordArgs),
    /// Standard partition or two-block split of a word.
    Partition(PartitionArgs),
    /// Transfer-matrix product of a word.
    Transfer(TransferArgs),
    /// Bands of the level-n periodic approximant.
    Spectrum(SpectrumArgs),
    /// Lyapunov exponent along s_n and along rotation words.
    Lyapunov(LyapunovArgs),
    /// Polynomial growth envelope over subwords of c_α.
    Growth(GrowthArgs),
    /// Two-block norm bound for one word.
    Certify(CertifyArgs),
    /// Run the acceptance suite and write results.jsonl / results.csv.
    VerifyAll(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

/// Options shared by every subcommand. All are optional so that a JSON
/// config file can supply them; flags win.
#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// Continued-fraction coefficients, e.g. `1,1,1,1`.
    #[arg(long)]
    alpha_cf: Option<String>,
    /// α as a decimal or ratio; expanded to `--cf-depth` coefficients.
    #[arg(long)]
    alpha_value: Option<String>,
    #[arg(long)]
    cf_depth: Option<usize>,
    /// fibonacci, silver or one-two.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file with any of the long options (snake_case keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    alpha_cf: Option<CfSpec>,
    alpha_value: Option<String>,
    cf_depth: Option<usize>,
    preset: Option<String>,
    lambda: Option<f64>,
    seed: Option<u64>,
    jobs: Option<usize>,
    format: Option<Format>,
    output: Option<PathBuf>,
    energy: Option<Vec<String>>,
    theta: Option<Vec<String>>,
    max_len: Option<usize>,
    max_level: Option<usize>,
    level: Option<usize>,
    samples: Option<usize>,
    tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CfSpec {
    List(Vec<u64>),
    Text(String),
}

/// Fully resolved shared settings.
struct Settings {
    cf: ContinuedFraction,
    lambda: f64,
    seed: u64,
    format: Format,
    output: Option<PathBuf>,
    file: ConfigFile,
}

impl Common {
    fn resolve(&self) -> sturmian::Result<Settings> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                serde_json::from_str::<ConfigFile>(&text)
                    .map_err(|e| Error::InvalidArgument(format!("config {}: {e}", path.display())))?
            }
            None => ConfigFile::default(),
        };
        let cf_list = self.alpha_cf.clone().or(match &file.alpha_cf {
            Some(CfSpec::Text(s)) => Some(s.clone()),
            Some(CfSpec::List(v)) => Some(v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")),
            None => None,
        });
        let value = self.alpha_value.clone().or(file.alpha_value.clone());
        let preset = self.preset.clone().or(file.preset.clone());
        let depth = self.cf_depth.or(file.cf_depth).unwrap_or(DEFAULT_CF_DEPTH);
        let given = [cf_list.is_some(), value.is_some(), preset.is_some()];
        let cf = match (cf_list, value, preset) {
            (Some(list), None, None) => ContinuedFraction::parse_list(&list)?,
            (None, Some(v), None) => ContinuedFraction::expand_str(&v, depth)?,
            (None, None, Some(p)) => ContinuedFraction::preset(&p)?,
            _ if given.iter().all(|g| !g) => {
                return Err(Error::InvalidArgument(
                    "give one of --alpha-cf, --alpha-value or --preset".into(),
                ))
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "--alpha-cf, --alpha-value and --preset are mutually exclusive".into(),
                ))
            }
        };
        let lambda = self.lambda.or(file.lambda).unwrap_or(1.0);
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("λ = {lambda}")));
        }
        if let Some(jobs) = self.jobs.or(file.jobs) {
            if jobs == 0 {
                return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
            }
            // Only the first call can size the global pool; later calls are no-ops.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
        }
        Ok(Settings {
            cf,
            lambda,
            seed: self.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            format: self.format.or(file.format).unwrap_or(Format::Json),
            output: self.output.clone().or(file.output.clone()),
            file,
        })
    }
}

#[derive(Args)]
struct WordArgs {
    #[command(flatten)]
    common: Common,
    /// Print s_n.
    #[arg(long, conflicts_with_all = ["prefix", "range"])]
    sn: Option<i64>,
    /// Print the first L letters of c_α.
    #[arg(long, conflicts_with = "range")]
    prefix: Option<usize>,
    /// Print v_{α,θ}(first..=last), e.g. `--range=-5..20`.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    #[arg(long, default_value = "0")]
    theta: String,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    word: String,
    /// Partition level; defaults to the coarsest valid one.
    #[arg(long)]
    level: Option<usize>,
    /// Print the two-block split instead.
    #[arg(long)]
    two_block: bool,
}

#[derive(Args)]
struct TransferArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, conflicts_with = "sn")]
    word: Option<String>,
    #[arg(long)]
    sn: Option<i64>,
    /// Energy, e.g. `0.5` or `2+0.5i`.
    #[arg(long, allow_hyphen_values = true)]
    energy: String,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

/// Energy selection: explicit values, a uniform grid, or band midpoints.
#[derive(Args, Clone, Default)]
struct EnergyArgs {
    /// Comma-separated energies, e.g. `0,1.5,2+0.5i`.
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<String>,
    /// `lo,hi,count` on the real axis.
    #[arg(long, allow_hyphen_values = true)]
    energy_grid: Option<String>,
    /// Midpoints of the K widest bands.
    #[arg(long)]
    band_midpoints: Option<usize>,
    /// Level used for `--band-midpoints` when no spectrum file is given.
    #[arg(long, default_value_t = 12)]
    spectrum_level: usize,
    /// Spectrum JSON written by `sturmctl spectrum`.
    #[arg(long)]
    spectrum_file: Option<PathBuf>,
}

#[derive(Args)]
struct LyapunovArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    energies: EnergyArgs,
    /// Largest |s_n| used (picks the level).
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    max_level: Option<usize>,
    /// Comma-separated phases; adds rotation-word rates at geometric lengths.
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct GrowthArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    energies: EnergyArgs,
    #[arg(long)]
    max_len: Option<usize>,
    /// Random windows per length.
    #[arg(long)]
    samples: Option<usize>,
    /// Also score a fresh resample drawn with `seed + 1`.
    #[arg(long)]
    resample: bool,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    word: String,
    #[arg(long, allow_hyphen_values = true)]
    energy: String,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Directory receiving results.jsonl and results.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Comma-separated subset of criteria 1–8.
    #[arg(long)]
    criteria: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    if cli.schema {
        print!("{}", schema());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("no subcommand given; see --help");
        return ExitCode::from(2);
    };
    match run(command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Precision => 3,
                ErrorClass::Resource => 4,
                ErrorClass::Other => 5,
            })
        }
    }
}

fn run(command: Command) -> sturmian::Result<ExitCode> {
    match command {
        Command::Word(a) => cmd_word(a),
        Command::Partition(a) => cmd_partition(a),
        Command::Transfer(a) => cmd_transfer(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Lyapunov(a) => cmd_lyapunov(a),
        Command::Growth(a) => cmd_growth(a),
        Command::Certify(a) => cmd_certify(a),
        Command::VerifyAll(a) => cmd_verify(a),
    }?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_word(a: WordArgs) -> sturmian::Result<()> {
    let s = a.common.resolve()?;
    let w = match (a.sn, a.prefix, &a.range) {
        (Some(n), None, None) => build_sn(&s.cf, n)?,
        (None, Some(len), None) => c_prefix(&s.cf, len)?,
        (None, None, Some(r)) => {
            let (first, last) = parse_range(r)?;
            let params = RotationParams::new(s.cf.clone(), Phase::parse(&a.theta)?, s.lambda);
            rotation_word(&params, first, last)?
        }
        _ => return Err(Error::InvalidArgument("give one of --sn, --prefix or --range".into())),
    };
    write_text(&s.output, &format!("{w}\n"))
}

fn cmd_partition(a: PartitionArgs) -> sturmian::Result<()> {
    let s = a.common.resolve()?;
    let w = parse_word(&a.word)?;
    let text = if a.two_block {
        let split = two_block_decomposition(&w, &s.cf)?;
        to_json(&split)?
    } else {
        let level = match a.level {
            Some(n) => n,
            None => coarsest_level(&w, &s.cf)?.ok_or_else(|| {
                Error::InvalidArgument(format!("{w} lies in s_0 and has no standard partition"))
            })?,
        };
        let p = standard_partition(&w, &s.cf, level)?;
        p.validate(&w, &s.cf)?;
        to_json(&p)?
    };
    write_text(&s.output, &format!("{text}\n"))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TransferOutput {
    lambda: f64,
    energy: Energy,
    len: usize,
    log_norm: f64,
    det_defect: f64,
    product: sturmian::transfer::ProductRecord,
}

fn cmd_transfer(a: TransferArgs) -> sturmian::Result<()> {
    let s = a.common.resolve()?;
    let w = match (&a.word, a.sn) {
        (Some(w), None) => parse_word(w)?,
        (None, Some(n)) => build_sn(&s.cf, n)?,
        _ => return Err(Error::InvalidArgument("give --word or --sn".into())),
    };
    let energy = parse_energy(&a.energy)?;
    let p = word_product(s.lambda, energy, &w)?;
    match s.format {
        Format::Json => {
            let out = TransferOutput {
                lambda: s.lambda,
                energy,
                len: w.len(),
                log_norm: p.log_norm(),
                det_defect: p.det_defect(),
                product: p.to_record(),
            };
            write_text(&s.output, &format!("{}\n", to_json(&out)?))
        }
        Format::Csv => {
            let mut r = Record::new(0, "transfer", s.lambda, energy);
            r.len = Some(w.len() as f64);
            r.lognorm = Some(p.log_norm());
            r.norm_rate = (!w.is_empty()).then(|| p.log_norm() / w.len() as f64);
            r.error_bound = p.error_bound();
            emit_records(&s, &[r])
        }
    }
}

fn cmd_spectrum(a: SpectrumArgs) -> sturmian::Result<()> {
    let s = a.common.resolve()?;
    let level = a.level.or(s.file.level).unwrap_or(12);
    let tol = a.tol.or(s.file.tol).unwrap_or(DEFAULT_TOL);
    let spec = approximate_spectrum(s.lambda, &s.cf, level, None, tol)?;
    if spec.precision_warning {
        eprintln!("warning: some band edges are closer than the grid resolution");
    }
    match s.format {
        Format::Json => write_text(&s.output, &format!("{}\n", to_json(&spec)?)),
        Format::Csv => {
            let mut buf = Vec::new();
            writeln!(buf, "# seed={}", s.seed)?;
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(["band_id", "lo", "hi", "width", "error_bound"]).map_err(csv_err)?;
            for (i, b) in spec.bands.iter().enumerate() {
                w.write_record([
                    i.to_string(),
                    b.lo.to_string(),
                    b.hi.to_string(),
                    b.width().to_string(),
                    spec.resolution.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
            drop(w);
            write_bytes(&s.output, &buf)
        }
    }
}

fn cmd_lyapunov(a: LyapunovArgs) -> sturmian::Result<()> {
    let s = a.common.resolve()?;
    let energies = select_energies(&a.energies, &s)?;
    let tol = a.tol.or(s.file.tol).unwrap_or(DEFAULT_CERT_TOL);
    let max_level = match (a.max_level.or(s.file.max_level), a.max_len.or(s.file.max_len)) {
        (Some(n), _) => n,
        (None, Some(len)) => level_for_length(&s.cf, len)?,
        (None, None) => level_for_length(&s.cf, 100_000)?,
    };
    let thetas = match a.theta.clone().or(s.file.theta.as_ref().map(|t| t.join(","))) {
        Some(list) => list.split(',').map(|t| Phase::parse(t.trim())).collect::<sturmian::Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let phase_len = a.max_len.or(s.file.max_len).unwrap_or(100_000);
    let mut rows = Vec::new();
    for (band, energy) in energies {
        let est = lyapunov_estimate_with_tol(s.lambda, energy, &s.cf, max_level, tol)?;
        for w in &est.warnings {
            eprintln!("warning: {w}");
        }
        for sample in &est.samples {
            let mut r = Record::new(0, "level", s.lambda, energy);
            r.n = Some(sample.n);
            r.len = Some(sample.len);
            r.lognorm = Some(sample.value);
            r.norm_rate = Some(sample.rate);
            r.f_upper = Some(sample.f_upper);
            r.inf_f = Some(sample.inf_f);
            r.band_id = band;
            r.error_bound = est.error_bound;
            rows.push(r);
        }
        for theta in &thetas {
            let params = RotationParams::new(s.cf.clone(), theta.clone(), s.lambda);
            for p in lyapunov_along_phase(energy, &params, &geometric_lengths(phase_len))? {
                let mut r = Record::new(0, "phase", s.lambda, energy);
                r.theta = Some(theta.to_f64());
                r.len = Some(p.len as f64);
                r.lognorm = Some(p.log_norm);
                r.norm_rate = Some(p.rate);
                r.band_id = band;
                r.error_bound = 8.0 * f64::EPSILON * (2 * p.len + 1) as f64;
                rows.push(r);
            }
        }
    }
    emit_records(&s, &rows)
}

fn cmd_growth(a: GrowthArgs) -> sturmian::Result<()> {
    let s = a.common.resolve()?;
    let energies: Vec<Energy> = select_energies(&a.energies, &s)?.into_iter().map(|e| e.1).collect();
    let max_len = a.max_len.or(s.file.max_len).unwrap_or(10_000);
    let samples = a.samples.or(s.file.samples).unwrap_or(16);
    let fit = growth_fit(s.lambda, &s.cf, &energies, max_len, samples, s.seed)?;
    for w in &fit.warnings {
        eprintln!("warning: {w}");
    }
    let fresh = if a.resample {
        Some(resample_violation(&s.cf, &fit, s.seed.wrapping_add(1))?)
    } else {
        None
    };
    match s.format {
        Format::Json => {
            let mut v = serde_json::to_value(&fit).map_err(json_err)?;
            if let Some(fresh) = &fresh {
                v["freshViolation"] = serde_json::json!(fresh);
            }
            write_text(&s.output, &format!("{}\n", to_json(&v)?))
        }
        Format::Csv => {
            let rows: Vec<Record> = fit
                .fits
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let mut r = Record::new(0, "envelope", s.lambda, f.energy);
                    r.len = Some(max_len as f64);
                    r.lognorm = Some(f.envelope.ln_c);
                    r.norm_rate = Some(f.envelope.mu);
                    r.f_upper = fresh.as_ref().map(|v| v[i]);
                    r.inf_f = Some(f.max_violation);
                    r.error_bound = 8.0 * f64::EPSILON * (2 * max_len + 1) as f64;
                    r
                })
                .collect();
            emit_records(&s, &rows)
        }
    }
}

fn cmd_certify(a: CertifyArgs) -> sturmian::Result<()> {
    let s = a.common.resolve()?;
    let w = parse_word(&a.word)?;
    let energy = parse_energy(&a.energy)?;
    let max_len = a.max_len.or(s.file.max_len).unwrap_or_else(|| w.len().max(16));
    let samples = a.samples.or(s.file.samples).unwrap_or(8);
    let fit = growth_fit(s.lambda, &s.cf, &[energy], max_len, samples, s.seed)?;
    let bound = certified_bound(s.lambda, energy, &w, &s.cf, &fit)?;
    write_text(&s.output, &format!("{}\n", to_json(&bound)?))
}

fn cmd_verify(a: VerifyArgs) -> sturmian::Result<()> {
    let s = a.common.resolve()?;
    let cfg = VerifyConfig {
        lambda: s.lambda,
        cf: s.cf.clone(),
        seed: s.seed,
    };
    let reports = match &a.criteria {
        Some(list) => list
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u8>()
                    .map_err(|e| Error::InvalidArgument(format!("criterion {t:?}: {e}")))
                    .map(|id| run_criterion(id, &cfg))
            })
            .collect::<sturmian::Result<Vec<_>>>()?,
        None => run_all(&cfg),
    };
    let rows: Vec<Record> = reports.iter().flat_map(|r| r.records.iter().cloned()).collect();
    fs::create_dir_all(&a.out_dir)?;
    records::write_jsonl(io::BufWriter::new(fs::File::create(a.out_dir.join("results.jsonl"))?), &rows)?;
    records::write_csv(io::BufWriter::new(fs::File::create(a.out_dir.join("results.csv"))?), &rows, s.seed)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{:<4} {:<48} {:>8}  result", "id", "criterion", "time")?;
    for r in &reports {
        writeln!(
            out,
            "{:<4} {:<48} {:>7.2}s  {}",
            r.id,
            r.name,
            r.elapsed.as_secs_f64(),
            if r.passed { "PASS" } else { "FAIL" }
        )?;
    }
    for r in reports.iter().filter(|r| !r.passed) {
        writeln!(out, "criterion {}: {}", r.id, r.detail)?;
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    writeln!(out, "{passed}/{} criteria passed", reports.len())?;
    if passed < reports.len() {
        out.flush()?;
        std::process::exit(1);
    }
    Ok(())
}

/// Energies with the band each one came from, if any.
fn select_energies(a: &EnergyArgs, s: &Settings) -> sturmian::Result<Vec<(Option<usize>, Energy)>> {
    let mut out = Vec::new();
    let listed = a.energy.clone().or(s.file.energy.as_ref().map(|e| e.join(",")));
    if let Some(list) = listed {
        for t in list.split(',') {
            out.push((None, parse_energy(t)?));
        }
    }
    if let Some(grid) = &a.energy_grid {
        let parts: Vec<&str> = grid.split(',').map(str::trim).collect();
        let bad = || Error::InvalidArgument(format!("--energy-grid expects lo,hi,count, got {grid:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let count: usize = parts[2].parse().map_err(|_| bad())?;
        if count == 0 || !(lo <= hi) {
            return Err(bad());
        }
        for i in 0..count {
            let e = if count == 1 { lo } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 };
            out.push((None, Energy::real(e)));
        }
    }
    if let Some(k) = a.band_midpoints {
        let spec: SpectrumApprox = match &a.spectrum_file {
            Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
                .map_err(|e| Error::InvalidArgument(format!("spectrum file {}: {e}", path.display())))?,
            None => approximate_spectrum(s.lambda, &s.cf, a.spectrum_level, None, DEFAULT_TOL)?,
        };
        out.extend(spec.widest_midpoints(k).into_iter().map(|(id, e)| (Some(id), Energy::real(e))));
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(
            "give --energy, --energy-grid or --band-midpoints".into(),
        ));
    }
    Ok(out)
}

fn parse_energy(t: &str) -> sturmian::Result<Energy> {
    let z: Complex64 = t
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("energy {t:?} is not a complex number")))?;
    let e = Energy(z);
    if !e.is_finite() {
        return Err(Error::InvalidArgument(format!("energy {t:?} is not finite")));
    }
    Ok(e)
}

fn parse_word(t: &str) -> sturmian::Result<Word> {
    t.parse()
}

fn parse_range(r: &str) -> sturmian::Result<(i64, i64)> {
    let bad = || Error::InvalidArgument(format!("--range expects first..last, got {r:?}"));
    let (a, b) = r.split_once("..").ok_or_else(bad)?;
    let first = a.trim().parse().map_err(|_| bad())?;
    let last = b.trim().parse().map_err(|_| bad())?;
    Ok((first, last))
}

fn emit_records(s: &Settings, rows: &[Record]) -> sturmian::Result<()> {
    let mut buf = Vec::new();
    match s.format {
        Format::Json => records::write_jsonl(&mut buf, rows)?,
        Format::Csv => records::write_csv(&mut buf, rows, s.seed)?,
    }
    write_bytes(&s.output, &buf)
}

fn write_text(output: &Option<PathBuf>, text: &str) -> sturmian::Result<()> {
    write_bytes(output, text.as_bytes())
}

fn write_bytes(output: &Option<PathBuf>, bytes: &[u8]) -> sturmian::Result<()> {
    match output.as_deref() {
        Some(path) if path != Path::new("-") => fs::write(path, bytes)?,
        _ => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> sturmian::Result<String> {
    serde_json::to_string(v).map_err(json_err)
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Internal(format!("serialization: {e}"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(io::Error::other(e))
}

fn schema() -> String {
    format!(
        "\
sturmctl {version}

Numeric rows (lyapunov, growth --format csv, transfer --format csv, verify-all):
  JSON lines, one object per row, or CSV with a `# seed=N` comment line and
  the header
    {columns}
  criterion    acceptance criterion (0 outside verify-all)
  quantity     level | phase | envelope | bound | transfer
  lambda, E_re, E_im, theta
  n            approximant level (level rows)
  len          word length
  lognorm      ln‖M(w)‖; ln C for envelope rows
  norm_rate    ln‖M(w)‖/|w|; μ for envelope rows
  f_upper      F^(n) (level rows); fresh-resample violation (envelope rows);
               certified ln-bound (bound rows)
  inf_f        min over levels of F^(n); fit violation (envelope rows)
  band_id      band of the approximant spectrum the energy came from
  error_bound  floating-point error budget of lognorm

spectrum:   JSON object with bands [{{lo, hi}}], resolution, grid; CSV columns
            band_id,lo,hi,width,error_bound
partition:  JSON {{level, a, blocks: [{{tag, start, end}}], b}} (0-based, half-open)
            or with --two-block {{t, x, y, x_level}}
transfer:   JSON {{lambda, energy, len, logNorm, detDefect,
            product: {{matrix, logScale, length, errorBound}}}}
certify:    JSON {{energy, len, t, x, y, direct, logBound, logWitness, withinFitRange}}

Exit codes: 0 ok, 1 acceptance failure (verify-all), 2 configuration error,
3 precision error, 4 resource error, 5 internal error.
",
        version = env!("CARGO_PKG_VERSION"),
        columns = CSV_COLUMNS.join(",")
    )
}
