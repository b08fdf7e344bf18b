//! Batch front end: scans, counts, sums, residual reports, region checks and
//! argument traces, with a persistent zero cache.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use zkz_core::argtrack::{
    check_lemma1, minimal_a_k, track_arg, FunctionId, Lemma1Grid, Lemma1Witness, ANCHOR_SIGMA,
};
use zkz_core::cache::{locate_cached, ZeroCache, CACHE_ENV};
use zkz_core::context::MAX_ORDER;
use zkz_core::verify::{residual_suite_from, scan_height, sig12, ResidualReport};
use zkz_core::zeroscan::{dist_sum_of, ScanOptions, ZeroRecord, T_MAX, T_MIN};
use zkz_core::{Complex, Error, EvalContext};

/// Cache file used when neither `--cache` nor `ZKZ_CACHE` is given.
pub const DEFAULT_CACHE: &str = "zkz-zeros.jsonl";

#[derive(Debug, Parser)]
#[command(name = "zkz", version, about = "Zeros of derivatives of the Riemann zeta function")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Output file (a directory for `verify`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Zero cache file.
    #[arg(long, global = true, env = CACHE_ENV)]
    pub cache: Option<PathBuf>,
    /// Neither read nor write the zero cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Euler–Maclaurin length as a multiple of max(|t|, 10) [default: 0.3]
    #[arg(long, global = true)]
    pub em_terms_factor: Option<f64>,
    /// Absolute tolerance of ζ evaluation [default: 1e-12]
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// Worker threads for band-parallel scans.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Tsv,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Locate zeros of ζ^(k) and add them to the cache.
    Zeros(RangeArgs),
    /// N_k(T): zeros with 0 < γ ≤ T.
    Count(HeightArgs),
    /// Σ (β − ½) over zeros with 0 < γ ≤ T.
    Sum(HeightArgs),
    /// COUNT, DIST_SUM and PROP6 residual reports over a grid of heights.
    Verify(GridArgs),
    /// Sample the region conditions for a witness candidate.
    LemmaCheck(LemmaArgs),
    /// Argument of a function tracked along σ: 30 → ½ at height T.
    Args(ArgsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RangeArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = T_MIN)]
    pub t_lo: f64,
    #[arg(long, visible_alias = "T")]
    pub t_hi: f64,
}

#[derive(Debug, Clone, Args)]
pub struct HeightArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long = "T", visible_alias = "t")]
    pub t: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub k: usize,
    /// Heights as `lo:hi:step`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Grid,
}

#[derive(Debug, Clone, Args)]
pub struct LemmaArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub a_k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma_k: Option<f64>,
    #[arg(long)]
    pub t_k: Option<f64>,
    #[arg(long)]
    pub t_cap: Option<f64>,
    /// Also search for the smallest a_k (step 0.5) passing condition 1.
    #[arg(long)]
    pub search_a: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ArgsArgs {
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long = "T", visible_alias = "t")]
    pub t: f64,
    #[arg(long, default_value = "zeta", value_parser = parse_function)]
    pub function: FunctionId,
    #[arg(long, default_value_t = ANCHOR_SIGMA, allow_negative_numbers = true)]
    pub sigma_from: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub sigma_to: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(format!("expected lo:hi:step, got {s:?}"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
    if !(step > 0.0 && lo <= hi && lo.is_finite() && hi.is_finite()) {
        return Err(format!("need lo <= hi and step > 0, got {s:?}"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok(Grid((0..=n).map(|i| lo + i as f64 * step).collect()))
}

fn parse_function(s: &str) -> Result<FunctionId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failure tagged with the sub-operation that raised it.
#[derive(Debug)]
pub struct Failure {
    pub op: &'static str,
    pub error: Error,
}

impl Failure {
    /// 2 for invalid input, 3 for numerical failure, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match &self.error {
            e if e.is_numerical_failure() => 3,
            Error::ZeroOnPath { .. } | Error::ZeroOnBoundary(_) | Error::ZerosOutsideStrip { .. } => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} failed: {}", self.op, self.error)
    }
}

trait Tag<T> {
    fn op(self, op: &'static str) -> Result<T, Failure>;
}

impl<T> Tag<T> for zkz_core::Result<T> {
    fn op(self, op: &'static str) -> Result<T, Failure> {
        self.map_err(|error| Failure { op, error })
    }
}

fn invalid(op: &'static str, msg: String) -> Failure {
    Failure { op, error: Error::Domain(msg) }
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub ctx: EvalContext,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<RunConfig, Failure> {
        let mut ctx = EvalContext::default();
        if let Some(f) = cli.global.em_terms_factor {
            ctx = ctx.with_em_terms_factor(f);
        }
        if let Some(t) = cli.global.abs_tol {
            ctx = ctx.with_abs_tol(t);
        }
        ctx.validate().op("config")?;
        let cache = if cli.global.no_cache {
            None
        } else {
            Some(cli.global.cache.unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE)))
        };
        let cfg = RunConfig {
            command: cli.command,
            ctx,
            format: cli.global.format,
            out: cli.global.out,
            cache,
            threads: cli.global.threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        let k = match &self.command {
            Command::Zeros(a) => {
                if !(a.t_lo > 0.0 && a.t_lo < a.t_hi && a.t_hi <= T_MAX) {
                    return Err(invalid("config", format!("need 0 < t_lo < t_hi <= {T_MAX}")));
                }
                a.k
            }
            Command::Count(a) | Command::Sum(a) => {
                if !(a.t > T_MIN && a.t <= T_MAX) {
                    return Err(invalid("config", format!("T must lie in ({T_MIN}, {T_MAX}]")));
                }
                a.k
            }
            Command::Verify(a) => a.k,
            Command::LemmaCheck(a) => a.k,
            Command::Args(a) => a.k,
        };
        if k > MAX_ORDER {
            return Err(invalid("config", format!("k must lie in [0, {MAX_ORDER}], got {k}")));
        }
        if self.threads == Some(0) {
            return Err(invalid("config", "--threads must be positive".into()));
        }
        Ok(())
    }

    fn cache(&self) -> Option<ZeroCache> {
        self.cache.as_ref().map(ZeroCache::new)
    }
}

fn zero_rows(zeros: &[ZeroRecord], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(zeros).expect("zero records serialize") + "\n",
        Format::Csv | Format::Tsv => {
            let sep = if format == Format::Csv { "," } else { "\t" };
            let num = |x: f64| if format == Format::Csv { sig12(x) } else { format!("{x}") };
            let mut s = ["k", "beta", "gamma", "multiplicity", "residual", "ctx_digest"].join(sep) + "\n";
            for z in zeros {
                let row = [
                    z.k.to_string(),
                    num(z.beta),
                    num(z.gamma),
                    z.multiplicity.to_string(),
                    num(z.residual),
                    z.ctx_digest.clone(),
                ];
                s += &(row.join(sep) + "\n");
            }
            s
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure { op: "write output", error: e.into() }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn zeros_upto(cfg: &RunConfig, k: usize, t_lo: f64, t_hi: f64) -> Result<Vec<ZeroRecord>, Failure> {
    let cache = cfg.cache();
    let (zeros, hit) = locate_cached(k, t_lo, t_hi, &cfg.ctx, &ScanOptions::default(), cache.as_ref()).op("scan")?;
    if hit {
        log::info!("served k = {k}, ({t_lo}, {t_hi}] from the cache");
    }
    Ok(zeros)
}

fn report_text(rep: &ResidualReport, format: Format) -> String {
    match format {
        Format::Json => rep.to_json() + "\n",
        Format::Csv => rep.to_csv(),
        Format::Tsv => {
            let mut s = String::from("T\tempirical\tmain_term\tresidual\tenvelope_value\n");
            for r in &rep.rows {
                let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}", r.t, r.empirical, r.main_term, r.residual, r.envelope_value);
            }
            s
        }
    }
}

fn summary(reports: &[ResidualReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = write!(
            s,
            "k={} {}: envelope {} fitted_constant {} bound_constant {}",
            r.k,
            r.quantity.name(),
            r.envelope_id,
            sig12(r.fitted_constant),
            sig12(r.bound_constant)
        );
        if let Some(t) = r.trend() {
            let _ = write!(s, " spearman_rho {} p {}", sig12(t.spearman_rho), sig12(t.spearman_p));
        }
        s.push('\n');
    }
    s
}

fn lemma_text(w: &Lemma1Witness, min_a: Option<Option<f64>>, format: Format) -> String {
    if format == Format::Json {
        let mut v = serde_json::to_value(w).expect("witness serializes");
        if let Some(a) = min_a {
            v["minimal_a_k"] = serde_json::json!(a);
        }
        return serde_json::to_string_pretty(&v).expect("json value serializes") + "\n";
    }
    let sep = if format == Format::Csv { "," } else { "\t" };
    let mut s = ["condition", "pass", "worst_margin", "worst_sigma", "worst_t", "points", "skipped", "range"].join(sep) + "\n";
    for r in &w.grid_report {
        let (ws, wt) = r.worst_point.map_or((String::new(), String::new()), |p| (sig12(p.re), sig12(p.im)));
        let row = [
            r.condition.to_string(),
            r.pass.to_string(),
            sig12(r.worst_margin),
            ws,
            wt,
            r.points_checked.to_string(),
            r.skipped.len().to_string(),
            format!("\"{}\"", r.verified_range),
        ];
        s += &(row.join(sep) + "\n");
    }
    if let Some(a) = min_a {
        let _ = writeln!(s, "# minimal a_k on the condition-1 grid: {}", a.map_or("none".into(), sig12));
    }
    s
}

/// Runs one command.
pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    if let Some(n) = cfg.threads {
        // fails only if a pool already exists, which keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = cfg.out.as_deref();
    match &cfg.command {
        Command::Zeros(a) => {
            let zeros = zeros_upto(cfg, a.k, a.t_lo, a.t_hi)?;
            let total: u32 = zeros.iter().map(|z| z.multiplicity).sum();
            emit(out, &zero_rows(&zeros, cfg.format))?;
            eprintln!("{total} zeros of order {} with {} < gamma <= {}", a.k, a.t_lo, a.t_hi);
        }
        Command::Count(a) => {
            let zeros = zeros_upto(cfg, a.k, T_MIN, a.t)?;
            let n: u32 = zeros.iter().map(|z| z.multiplicity).sum();
            let text = match cfg.format {
                Format::Json => serde_json::json!({"k": a.k, "T": a.t, "count": n}).to_string() + "\n",
                _ => format!("{n}\n"),
            };
            emit(out, &text)?;
        }
        Command::Sum(a) => {
            let zeros = zeros_upto(cfg, a.k, T_MIN, a.t)?;
            let v = dist_sum_of(&zeros, a.t);
            let text = match cfg.format {
                Format::Json => serde_json::json!({"k": a.k, "T": a.t, "dist_sum": v}).to_string() + "\n",
                Format::Csv => format!("{}\n", sig12(v)),
                Format::Tsv => format!("{v}\n"),
            };
            emit(out, &text)?;
        }
        Command::Verify(a) => {
            let grid = &a.grid.0;
            let zeros = if grid.is_empty() { Vec::new() } else { zeros_upto(cfg, a.k, T_MIN, scan_height(grid))? };
            let reports = residual_suite_from(a.k, grid, &zeros, &cfg.ctx).op("residual_suite")?;
            let sum = summary(&reports);
            match out {
                Some(dir) => {
                    fs::create_dir_all(dir).map_err(|e| Failure { op: "write output", error: e.into() })?;
                    let ext = match cfg.format {
                        Format::Csv => "csv",
                        Format::Json => "json",
                        Format::Tsv => "tsv",
                    };
                    for r in &reports {
                        let name = format!("k{}_{}.{ext}", a.k, r.quantity.name().to_lowercase());
                        emit(Some(&dir.join(name)), &report_text(r, cfg.format))?;
                    }
                    emit(Some(&dir.join(format!("k{}_summary.txt", a.k))), &sum)?;
                    print!("{sum}");
                }
                None => {
                    for r in &reports {
                        println!("# {}", r.quantity.name());
                        print!("{}", report_text(r, cfg.format));
                    }
                    print!("{sum}");
                }
            }
        }
        Command::LemmaCheck(a) => {
            let mut w = Lemma1Witness::defaults(a.k);
            if let Some(v) = a.a_k {
                w.a_k = v;
            }
            if let Some(v) = a.sigma_k {
                w.sigma_k = v;
            }
            if let Some(v) = a.t_k {
                w.t_k = v;
            } else {
                w.t_k = (w.a_k * w.a_k).max(-w.sigma_k).max(100.0);
            }
            if let Some(v) = a.t_cap {
                w.t_cap = v;
            }
            let grid = Lemma1Grid::default();
            let w = check_lemma1(&w, &grid, &cfg.ctx).op("check_lemma1")?;
            let min_a = if a.search_a { Some(minimal_a_k(a.k, 0.5, &grid, &cfg.ctx).op("minimal_a_k")?) } else { None };
            emit(out, &lemma_text(&w, min_a, cfg.format))?;
        }
        Command::Args(a) => {
            let path = [Complex::new(a.sigma_from, a.t), Complex::new(a.sigma_to, a.t)];
            let tr = track_arg(a.function, a.k, &path, &cfg.ctx).op("track_arg")?;
            let text = match cfg.format {
                Format::Json => serde_json::to_string_pretty(&tr).expect("traces serialize") + "\n",
                _ => {
                    let mut s = String::from("sigma\tt\tre\tim\tunwrapped_arg\n");
                    for p in &tr.samples {
                        let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}", p.point.re, p.point.im, p.value.re, p.value.im, p.unwrapped_arg);
                    }
                    s
                }
            };
            emit(out, &text)?;
        }
    }
    Ok(())
}
