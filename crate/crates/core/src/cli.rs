//! Command-line experiment runner. Every subcommand produces one CSV table,
//! written to `--out` (plus a JSON manifest beside it) or to stdout.

use crate::analytic_error::{pairwise_error, union_bound, QuadratureSpec};
use crate::asymptotics::{
    gap_fourier, gap_gaussian, required_snr, required_snr_very_sparse, subband_required_snr, to_db, AsymptoticRatios,
    SubbandScenario,
};
use crate::bounds::{mimo_mi_mc_grid, mimo_snr_threshold, upper_bound_imup};
use crate::detection::codebook::{codebook_demo, CodebookDemoConfig};
use crate::detection::{support_error_mc_coupled, DetectorMode, DEFAULT_HYPOTHESIS_CAP};
use crate::error::{Error, Result};
use crate::model::{make_dims, MatrixKind, ProblemDims, Snr};
use crate::seed::MasterSeed;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "sublandau",
    version,
    about = "Sparse-signal rate and support-detection experiments"
)]
pub struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Upper bound and MIMO lower bounds on the mutual information vs SNR.
    Fig1(Fig1Args),
    /// Support-detection error probability vs SNR, simulated and analytic.
    Fig3(Fig3Args),
    /// SNR at which the MIMO lower bound covers the support entropy plus R_c.
    Threshold(ThresholdArgs),
    /// Large-system gap constants and required SNR.
    Asymptotics(AsymptoticsArgs),
    /// Required SNR for a multiband signal with unknown occupied subbands.
    Subband(SubbandArgs),
    /// Tiny random codebook over the sparse channel.
    CodebookDemo(CodebookArgs),
}

#[derive(Debug, Args, Serialize, Clone, Copy)]
pub struct DimArgs {
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    #[arg(long, default_value_t = 6)]
    pub q: usize,
}

impl DimArgs {
    fn dims(&self) -> Result<ProblemDims> {
        make_dims(self.n, self.p, self.q)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct OutArgs {
    /// CSV destination; a `.manifest.json` is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Fig1Args {
    #[command(flatten)]
    pub dims: DimArgs,
    #[arg(long = "snr-db", value_delimiter = ',', default_value = "0,5,10,15,20,25")]
    pub snr_db: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct Fig3Args {
    #[command(flatten)]
    pub dims: DimArgs,
    #[arg(long = "snr-db", value_delimiter = ',', default_value = "10,14,18,22,26,30")]
    pub snr_db: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "full,nn-genie,single-genie"
    )]
    pub modes: Vec<DetectorMode>,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kind: MatrixKind,
    /// Largest number of supports the full search may enumerate.
    #[arg(long, default_value_t = DEFAULT_HYPOTHESIS_CAP)]
    pub cap: u128,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub dims: DimArgs,
    /// Content rate in bits per channel use.
    #[arg(long = "r-c", default_value_t = 0.0)]
    pub r_c: f64,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kind: MatrixKind,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long = "lo-db", default_value_t = -10.0, allow_hyphen_values = true)]
    pub lo_db: f64,
    #[arg(long = "hi-db", default_value_t = 40.0, allow_hyphen_values = true)]
    pub hi_db: f64,
    #[arg(long = "tol-db", default_value_t = 0.01)]
    pub tol_db: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct AsymptoticsArgs {
    #[arg(long = "q-r", default_value_t = 0.6)]
    pub q_r: f64,
    #[arg(long = "p-r", default_value_t = 0.3)]
    pub p_r: f64,
    /// Content rate per measurement, bits.
    #[arg(long = "r-cp", default_value_t = 0.0)]
    pub r_cp: f64,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kind: MatrixKind,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SubbandArgs {
    /// Number of subbands.
    #[arg(long, default_value_t = 100)]
    pub k: u64,
    /// Total bandwidth W in Hz.
    #[arg(long, default_value_t = 1e6)]
    pub bandwidth: f64,
    /// Observation interval T in seconds.
    #[arg(long, default_value_t = 1e-3)]
    pub interval: f64,
    #[arg(long = "q-r", default_value_t = 0.1)]
    pub q_r: f64,
    #[arg(long = "p-r", default_value_t = 0.2)]
    pub p_r: f64,
    /// Content bits per interval.
    #[arg(long = "r-c", default_value_t = 0.0)]
    pub r_c: f64,
    /// Gap constant in bits per measurement.
    #[arg(long = "c-gap", default_value_t = 0.0)]
    pub c_gap: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CodebookArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long = "block-length", value_delimiter = ',', default_value = "8")]
    pub block_length: Vec<usize>,
    /// Content rates in bits per channel use; messages are `round(2^(N R))`.
    #[arg(long, value_delimiter = ',', default_value = "0.25")]
    pub rate: Vec<f64>,
    #[arg(
        long = "snr-db",
        value_delimiter = ',',
        default_value = "0,20",
        allow_hyphen_values = true
    )]
    pub snr_db: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Give the transmitter the supports and decode them jointly with the message.
    #[arg(long)]
    pub support_known: bool,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kind: MatrixKind,
    #[command(flatten)]
    pub out: OutArgs,
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Round-trip formatting: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn blank() -> String {
    String::new()
}

fn snrs(db: &[f64]) -> Result<Vec<Snr>> {
    if db.is_empty() {
        return Err(Error::InvalidArgument("SNR grid is empty".into()));
    }
    db.iter().map(|&d| Snr::from_db(d)).collect()
}

fn kind_name(kind: MatrixKind) -> &'static str {
    match kind {
        MatrixKind::Gaussian => "gaussian",
        MatrixKind::Fourier => "fourier",
    }
}

pub fn fig1(a: &Fig1Args, seed: MasterSeed) -> Result<Table> {
    let dims = a.dims.dims()?;
    let grid = snrs(&a.snr_db)?;
    let gauss = mimo_mi_mc_grid(dims, MatrixKind::Gaussian, &grid, a.trials, seed.child("fig1", &[0]))?;
    let fourier = mimo_mi_mc_grid(dims, MatrixKind::Fourier, &grid, a.trials, seed.child("fig1", &[1]))?;
    let mut t = Table::new(vec![
        "snr_db",
        "i_mup_bits",
        "i_mimo_gauss_bits",
        "i_mimo_gauss_se",
        "i_fourier_bits",
        "i_fourier_se",
    ]);
    for (i, (&db, &snr)) in a.snr_db.iter().zip(&grid).enumerate() {
        t.rows.push(vec![
            num(db),
            num(upper_bound_imup(dims.p(), snr).mean_bits),
            num(gauss[i].mean_bits),
            num(gauss[i].std_error_bits),
            num(fourier[i].mean_bits),
            num(fourier[i].std_error_bits),
        ]);
    }
    Ok(t)
}

pub fn fig3(a: &Fig3Args, seed: MasterSeed) -> Result<Table> {
    let dims = a.dims.dims()?;
    let grid = snrs(&a.snr_db)?;
    let mut modes: Vec<DetectorMode> = Vec::new();
    for m in &a.modes {
        if !modes.contains(m) {
            modes.push(*m);
        }
    }
    let est = support_error_mc_coupled(dims, a.kind, &grid, &modes, a.trials, seed.child("fig3", &[]), a.cap)?;
    let (n, p, q) = (dims.n() as u32, dims.p() as u32, dims.q() as u32);
    let quad = QuadratureSpec::default_for(p);
    let mut t = Table::new(vec![
        "snr_db",
        "p_err_full",
        "p_err_nn_genie",
        "p_err_single_genie",
        "half_width_full",
        "half_width_nn_genie",
        "half_width_single_genie",
        "analytic_pairwise",
        "analytic_union",
    ]);
    for (s, (&db, &snr)) in a.snr_db.iter().zip(&grid).enumerate() {
        let mut p_cells = Vec::new();
        let mut hw_cells = Vec::new();
        for mode in DetectorMode::ALL {
            match modes.iter().position(|m| *m == mode) {
                Some(m) => {
                    p_cells.push(num(est[m][s].p_err));
                    hw_cells.push(num(est[m][s].half_width()));
                }
                None => {
                    p_cells.push(blank());
                    hw_cells.push(blank());
                }
            }
        }
        let mut row = vec![num(db)];
        row.extend(p_cells);
        row.extend(hw_cells);
        row.push(num(pairwise_error(p, q, snr, &quad)?));
        row.push(num(union_bound(n, p, q, snr, &quad)?));
        t.rows.push(row);
    }
    Ok(t)
}

pub fn threshold(a: &ThresholdArgs, seed: MasterSeed) -> Result<Table> {
    let dims = a.dims.dims()?;
    let r = mimo_snr_threshold(
        dims,
        a.kind,
        a.r_c,
        a.trials,
        seed.child("threshold", &[]),
        (a.lo_db, a.hi_db),
        a.tol_db,
    )?;
    let mut t = Table::new(vec![
        "kind",
        "r_c_bits",
        "target_bits",
        "threshold_db",
        "ci_low_db",
        "ci_high_db",
        "i_mimo_bits",
        "i_mimo_se",
        "slope_bits_per_db",
        "i_mup_bits",
        "iterations",
        "trials",
    ]);
    t.rows.push(vec![
        kind_name(a.kind).into(),
        num(a.r_c),
        num(r.target_bits),
        num(r.snr_db),
        num(r.ci_95_db.0),
        num(r.ci_95_db.1),
        num(r.estimate.mean_bits),
        num(r.estimate.std_error_bits),
        num(r.slope_bits_per_db),
        num(upper_bound_imup(dims.p(), Snr::from_db(r.snr_db)?).mean_bits),
        r.iterations.to_string(),
        a.trials.to_string(),
    ]);
    Ok(t)
}

pub fn asymptotics(a: &AsymptoticsArgs) -> Result<Table> {
    let ratios = AsymptoticRatios::new(a.p_r, a.q_r)?;
    let gap = match a.kind {
        MatrixKind::Gaussian => gap_gaussian(ratios.beta())?,
        MatrixKind::Fourier => gap_fourier(a.p_r, a.q_r)?,
    };
    let mut t = Table::new(vec![
        "kind",
        "p_r",
        "q_r",
        "beta",
        "r_cp_bits",
        "gap_bits",
        "required_snr_db_no_gap",
        "required_snr_db",
        "very_sparse_snr_db",
    ]);
    t.rows.push(vec![
        kind_name(a.kind).into(),
        num(a.p_r),
        num(a.q_r),
        num(ratios.beta()),
        num(a.r_cp),
        num(gap),
        num(to_db(required_snr(a.q_r, a.p_r, a.r_cp, 0.0)?)),
        num(to_db(required_snr(a.q_r, a.p_r, a.r_cp, gap)?)),
        // Blank where the very-sparse form is undefined (q_R = 1).
        required_snr_very_sparse(a.q_r, a.p_r, a.r_cp, gap).map_or_else(|_| blank(), |s| num(to_db(s))),
    ]);
    Ok(t)
}

pub fn subband(a: &SubbandArgs) -> Result<Table> {
    let s = SubbandScenario::new(a.k, a.bandwidth, a.interval, a.q_r, a.p_r, a.r_c)?;
    let r = subband_required_snr(&s, a.c_gap);
    let mut t = Table::new(vec![
        "k",
        "occupied_subbands",
        "samples",
        "snr",
        "snr_db",
        "exact_entropy_bits",
        "stirling_entropy_bits",
        "resolvable_factor",
    ]);
    t.rows.push(vec![
        s.k().to_string(),
        s.occupied_subbands().to_string(),
        num(s.samples()),
        num(r.snr),
        num(r.snr_db),
        num(r.exact_entropy_bits),
        num(r.stirling_entropy_bits),
        num(r.resolvable_factor),
    ]);
    Ok(t)
}

pub fn codebook(a: &CodebookArgs, seed: MasterSeed) -> Result<Table> {
    let dims = make_dims(a.n, a.p, a.q)?;
    let mut t = Table::new(vec![
        "block_length",
        "rate_requested_bits",
        "num_messages",
        "rate_bits",
        "snr_db",
        "support_known",
        "message_error_rate",
        "message_ci_low",
        "message_ci_high",
        "support_sequence_error_rate",
        "trials",
    ]);
    for (i, &n_uses) in a.block_length.iter().enumerate() {
        for (j, &rate) in a.rate.iter().enumerate() {
            for &db in &a.snr_db {
                let cfg =
                    CodebookDemoConfig::from_rate(dims, a.kind, n_uses, rate, Snr::from_db(db)?, a.support_known)?;
                // One codebook per (N, rate), shared across SNR.
                let out = codebook_demo(&cfg, a.trials, seed.child("codebook-demo", &[i as u64, j as u64]))?;
                t.rows.push(vec![
                    n_uses.to_string(),
                    num(rate),
                    cfg.num_messages.to_string(),
                    num(cfg.rate_bits()),
                    num(db),
                    a.support_known.to_string(),
                    num(out.message_error_rate),
                    num(out.message_ci_95.0),
                    num(out.message_ci_95.1),
                    num(out.support_sequence_error_rate),
                    out.trials.to_string(),
                ]);
            }
        }
    }
    Ok(t)
}

/// Table for a parsed command line, computed on the configured thread pool.
pub fn compute(cli: &Cli) -> Result<Table> {
    let seed = MasterSeed::new(cli.seed);
    let work = || match &cli.command {
        Command::Fig1(a) => fig1(a, seed),
        Command::Fig3(a) => fig3(a, seed),
        Command::Threshold(a) => threshold(a, seed),
        Command::Asymptotics(a) => asymptotics(a),
        Command::Subband(a) => subband(a),
        Command::CodebookDemo(a) => codebook(a, seed),
    };
    match cli.threads {
        Some(0) => Err(Error::InvalidArgument("--threads must be at least 1".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

fn out_path(cli: &Cli) -> Option<&Path> {
    match &cli.command {
        Command::Fig1(a) => a.out.out.as_deref(),
        Command::Fig3(a) => a.out.out.as_deref(),
        Command::Threshold(a) => a.out.out.as_deref(),
        Command::Asymptotics(a) => a.out.out.as_deref(),
        Command::Subband(a) => a.out.out.as_deref(),
        Command::CodebookDemo(a) => a.out.out.as_deref(),
    }
}

#[derive(Debug, Serialize)]
pub struct OutputChecksum {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub master_seed: u64,
    pub command_line: String,
    pub parameters: &'a Cli,
    pub timestamp_unix: u64,
    pub version: &'static str,
    pub outputs: Vec<OutputChecksum>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Path of the manifest written next to `csv`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Run a parsed command: write the CSV and manifest to `--out`, or return
/// the CSV text when no output path was given.
pub fn run(cli: &Cli, command_line: String) -> Result<Option<String>> {
    let csv = compute(cli)?.to_csv();
    let Some(path) = out_path(cli) else {
        return Ok(Some(csv));
    };
    write_file(path, csv.as_bytes())?;
    let manifest = RunManifest {
        master_seed: cli.seed,
        command_line,
        parameters: cli,
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        version: env!("CARGO_PKG_VERSION"),
        outputs: vec![OutputChecksum {
            path: path.to_path_buf(),
            sha256: sha256_hex(csv.as_bytes()),
        }],
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&manifest_path(path), json.as_bytes())?;
    Ok(None)
}

/// One-line JSON error report for stderr.
pub fn error_line(e: &Error) -> String {
    serde_json::json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}
