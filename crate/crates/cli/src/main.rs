use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cur_kit::grid::{parse_amounts, parse_list, parse_names, Amount};
use cur_kit::pipeline::{write_csv, Instance, Point, ResultRow, Settings, Side, Source, XSource};
use cur_kit::runner::{self, CompareGrid, SweepGrid};
use cur_kit::verify;
use curkit::cur::{decompose, relative_error, CoreMode};
use curkit::kernels::{singular_values, Threshold};
use curkit::norms::Norm;
use curkit::oversampling::{os_iterated, OversampleMode};
use curkit::selection::{select, Strategy};
use curkit::testbed::{save_matrix_market, save_raw, GeneratorSpec};

#[derive(Parser)]
#[command(name = "cur-kit", version, about = "CUR decomposition experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error of every (seed, k, strategy, p, mode) combination as CSV.
    Sweep(SweepArgs),
    /// Oversampling modes side by side, with one p = 0 baseline per k.
    OsCompare(CompareArgs),
    /// Run the built-in consistency checks; non-zero exit on failure.
    Verify(VerifyArgs),
    /// One decomposition, written as factor files.
    Decompose(DecomposeArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MatrixArgs {
    /// Generator spec, e.g. lowrank:300x300:r20, block:200x200:s20:1e-10,
    /// snn:5000x300, two_by_two:1e-8, geometric:60x60:0.3 (optional :seedN).
    #[arg(long = "gen", value_parser = parse_generator)]
    generator: Option<GeneratorSpec>,
    /// Matrix Market or raw binary file.
    #[arg(long)]
    input: Option<PathBuf>,
}

impl MatrixArgs {
    fn source(&self) -> Source {
        match (&self.generator, &self.input) {
            (Some(g), _) => Source::Generator(g.clone()),
            (None, Some(p)) => Source::File(p.clone()),
            (None, None) => unreachable!("clap requires one of --gen / --input"),
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Absolute truncation threshold.
    #[arg(
        long,
        default_value = "1e-15",
        allow_negative_numbers = true,
        conflicts_with = "eps_rel"
    )]
    eps: f64,
    /// Threshold relative to the largest singular value of the core.
    #[arg(long, allow_negative_numbers = true)]
    eps_rel: Option<f64>,
    #[arg(long, default_value = "fro", value_parser = parse_norm)]
    norm: Norm,
    /// Row-space approximator used by the bounds.
    #[arg(long = "x", default_value = "sketch", value_parser = parse_x)]
    x_source: XSource,
    /// Seeds, e.g. 0..4 (inclusive).
    #[arg(long, default_value = "0", value_parser = parse_seeds)]
    seeds: Seeds,
    /// Record wall times; off by default so identical runs give identical bytes.
    #[arg(long)]
    timing: bool,
    /// Which indices get oversampled.
    #[arg(long, default_value = "rows", value_parser = parse_side)]
    side: Side,
    /// Allow --side both (oversampling rows and columns together).
    #[arg(long)]
    danger_both_sides: bool,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn settings(&self) -> Result<Settings, String> {
        let eps = match self.eps_rel {
            Some(r) => Threshold::Relative(r),
            None => Threshold::Absolute(self.eps),
        };
        eps.validate().map_err(|e| e.to_string())?;
        if self.side == Side::Both && !self.danger_both_sides {
            return Err("--side both needs --danger-both-sides; it usually hurts accuracy".into());
        }
        Ok(Settings {
            eps,
            norm: self.norm,
            x_source: self.x_source,
            timing: self.timing,
        })
    }
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Ranks, e.g. 1..40 or 10..100:10.
    #[arg(long, value_parser = parse_ks)]
    k: Ks,
    /// Core modes: naive, explicit_pinv, stable, scurca, rowwise, curba.
    #[arg(long, default_value = "stable", value_parser = parse_modes)]
    modes: Modes,
    /// Selection strategies: rand_pivot, uniform, independent, dependent.
    #[arg(long, default_value = "rand_pivot", value_parser = parse_strategies)]
    strategy: Strategies,
    /// Oversampling amounts, e.g. 0,10,0.5k.
    #[arg(long, default_value = "0", value_parser = parse_ps)]
    p: Ps,
    #[arg(long, default_value = "projection", value_parser = parse_os)]
    os_mode: OversampleMode,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long, value_parser = parse_ks)]
    k: Ks,
    #[arg(long, default_value = "0,10,0.5k", value_parser = parse_ps)]
    p: Ps,
    /// Oversampling modes: projection, leverage, greedy.
    #[arg(long, default_value = "projection,leverage,greedy", value_parser = parse_os_list)]
    modes: OsModes,
    #[arg(long, default_value = "rand_pivot", value_parser = parse_strategy)]
    strategy: Strategy,
    #[arg(long, default_value = "stable", value_parser = parse_mode)]
    core: CoreMode,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Fewer seeds per check.
    #[arg(long)]
    quick: bool,
    /// Threshold for the truncated checks (0 falls back to the default for
    /// the row-by-row route, which needs eps > 0).
    #[arg(long, default_value = "1e-15", allow_negative_numbers = true)]
    eps: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Mtx,
    Raw,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "rand_pivot", value_parser = parse_strategy)]
    strategy: Strategy,
    #[arg(long, default_value = "stable", value_parser = parse_mode)]
    mode: CoreMode,
    #[arg(long, default_value = "1e-15", allow_negative_numbers = true)]
    eps: f64,
    #[arg(long, default_value = "0", value_parser = parse_p)]
    p: Amount,
    #[arg(long, default_value = "projection", value_parser = parse_os)]
    os_mode: OversampleMode,
    #[arg(long, default_value = "rows", value_parser = parse_side)]
    side: Side,
    #[arg(long)]
    danger_both_sides: bool,
    /// Directory for left, right, rows.txt and cols.txt.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "mtx")]
    format: Format,
}

#[derive(Clone)]
struct Ks(Vec<usize>);
#[derive(Clone)]
struct Ps(Vec<Amount>);
#[derive(Clone)]
struct Modes(Vec<CoreMode>);
#[derive(Clone)]
struct Strategies(Vec<Strategy>);
#[derive(Clone)]
struct OsModes(Vec<OversampleMode>);

fn parse_generator(s: &str) -> Result<GeneratorSpec, String> {
    s.parse().map_err(|e: curkit::CurError| e.to_string())
}
fn parse_norm(s: &str) -> Result<Norm, String> {
    s.parse().map_err(|e: curkit::CurError| e.to_string())
}
fn parse_x(s: &str) -> Result<XSource, String> {
    s.parse()
}
fn parse_side(s: &str) -> Result<Side, String> {
    s.parse()
}
fn parse_seeds(s: &str) -> Result<Seeds, String> {
    Ok(Seeds(
        parse_list(s)?.into_iter().map(|v| v as u64).collect(),
    ))
}
fn parse_ks(s: &str) -> Result<Ks, String> {
    parse_list(s).map(Ks)
}
fn parse_ps(s: &str) -> Result<Ps, String> {
    parse_amounts(s).map(Ps)
}
fn parse_p(s: &str) -> Result<Amount, String> {
    s.parse()
}
fn parse_modes(s: &str) -> Result<Modes, String> {
    parse_names(s).map(Modes)
}
fn parse_mode(s: &str) -> Result<CoreMode, String> {
    s.parse().map_err(|e: curkit::CurError| e.to_string())
}
fn parse_strategies(s: &str) -> Result<Strategies, String> {
    parse_names(s).map(Strategies)
}
fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: curkit::CurError| e.to_string())
}
fn parse_os(s: &str) -> Result<OversampleMode, String> {
    s.parse().map_err(|e: curkit::CurError| e.to_string())
}
fn parse_os_list(s: &str) -> Result<OsModes, String> {
    let modes: Vec<OversampleMode> = parse_names(s)?;
    if modes.is_empty() {
        return Err("at least one oversampling mode is needed".into());
    }
    Ok(OsModes(modes))
}

fn emit(rows: &[ResultRow], out: Option<&Path>) -> Result<(), String> {
    let result = match out {
        Some(p) => write_csv(
            rows,
            BufWriter::new(File::create(p).map_err(|e| format!("{}: {e}", p.display()))?),
        ),
        None => write_csv(rows, io::stdout().lock()),
    };
    result.map_err(|e| e.to_string())
}

fn run_grid(matrix: &MatrixArgs, common: &CommonArgs, points: Vec<Point>) -> Result<(), String> {
    let settings = common.settings()?;
    let source = matrix.source();
    if !points.is_empty() {
        let dims = runner::source_dims(&source).map_err(|e| e.to_string())?;
        runner::validate(&points, dims)?;
    }
    let rows = runner::run(&source, &common.seeds.0, &points, &settings)?;
    emit(&rows, common.out.as_deref())
}

fn sweep(args: &SweepArgs) -> Result<(), String> {
    let grid = SweepGrid {
        ks: args.k.0.clone(),
        amounts: args.p.0.clone(),
        strategies: args.strategy.0.clone(),
        modes: args.modes.0.clone(),
        oversample: args.os_mode,
        side: args.common.side,
    };
    run_grid(&args.matrix, &args.common, grid.points())
}

fn os_compare(args: &CompareArgs) -> Result<(), String> {
    let grid = CompareGrid {
        ks: args.k.0.clone(),
        amounts: args.p.0.clone(),
        oversample: args.modes.0.clone(),
        strategy: args.strategy,
        mode: args.core,
        side: args.common.side,
    };
    run_grid(&args.matrix, &args.common, grid.points())
}

fn verify_cmd(args: &VerifyArgs) -> Result<bool, String> {
    let opts = verify::Options::new(args.quick, args.eps)?;
    let mut ok = true;
    for check in verify::run_all(&opts) {
        if check.passed() {
            println!("PASS {:<28} {} instances", check.name, check.instances);
        } else {
            ok = false;
            println!(
                "FAIL {:<28} failing seeds {:?}",
                check.name, check.failing_seeds
            );
            for e in &check.errors {
                println!("     {e}");
            }
        }
    }
    Ok(ok)
}

fn write_indices(path: &Path, idx: &[usize]) -> Result<(), String> {
    let mut s = String::new();
    for i in idx {
        s.push_str(&i.to_string());
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| format!("{}: {e}", path.display()))
}

fn decompose_cmd(args: &DecomposeArgs) -> Result<(), String> {
    if args.side == Side::Both && !args.danger_both_sides {
        return Err("--side both needs --danger-both-sides; it usually hurts accuracy".into());
    }
    let source = args.matrix.source();
    let inst = Instance::prepare(&source, args.seed, XSource::Sketch).map_err(|e| e.to_string())?;
    let a = &inst.a;
    let p = args.p.resolve(args.k);
    let pt = Point {
        k: args.k,
        p,
        strategy: args.strategy,
        oversample: args.os_mode,
        side: args.side,
        mode: args.mode,
    };
    runner::validate(std::slice::from_ref(&pt), a.shape())?;
    let e = |e: curkit::CurError| e.to_string();

    let sel = select(a, args.k, args.strategy, args.seed).map_err(e)?;
    let (i, j) = (sel.row_indices, sel.col_indices);
    let mut rows = i.clone();
    let mut cols = j.clone();
    if p > 0 && matches!(args.side, Side::Rows | Side::Both) {
        rows = os_iterated(&a.select_cols(j.as_slice()), &i, p, args.os_mode)
            .and_then(|o| o.merged(&i))
            .map_err(e)?;
    }
    if p > 0 && matches!(args.side, Side::Cols | Side::Both) {
        let rt = a.select_rows(i.as_slice()).transpose();
        cols = os_iterated(&rt, &j, p, args.os_mode)
            .and_then(|o| o.merged(&j))
            .map_err(e)?;
    }
    let f = decompose(a, &rows, &cols, args.mode, args.eps).map_err(e)?;

    fs::create_dir_all(&args.out_dir)
        .map_err(|err| format!("{}: {err}", args.out_dir.display()))?;
    let (ext, save): (&str, fn(&curkit::DenseMatrix, &Path) -> curkit::Result<()>) =
        match args.format {
            Format::Mtx => ("mtx", |m, p| save_matrix_market(m, p)),
            Format::Raw => ("bin", |m, p| save_raw(m, p)),
        };
    save(&f.left, &args.out_dir.join(format!("left.{ext}"))).map_err(e)?;
    save(&f.right, &args.out_dir.join(format!("right.{ext}"))).map_err(e)?;
    write_indices(&args.out_dir.join("rows.txt"), rows.as_slice())?;
    write_indices(&args.out_dir.join("cols.txt"), cols.as_slice())?;

    let rel = relative_error(a, &f, Norm::Frobenius).map_err(e)?;
    let core = singular_values(&a.select(rows.as_slice(), cols.as_slice())).map_err(e)?;
    let mut out = io::stdout().lock();
    let lines = [
        format!("shape {}x{}", a.rows(), a.cols()),
        format!("mode {}", f.mode),
        format!("rows {}", rows.len()),
        format!("cols {}", cols.len()),
        format!("inner_dim {}", f.inner_dim()),
        format!("k_eps {}", f.k_eps),
        format!("status {}", f.status),
        format!("relative_error {:?}", rel),
        format!(
            "sigma_min_core {:?}",
            core.last().copied().unwrap_or(f64::NAN)
        ),
    ];
    for l in lines {
        writeln!(out, "{l}").map_err(|err| err.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::OsCompare(a) => os_compare(a).map(|_| true),
        Command::Verify(a) => verify_cmd(a),
        Command::Decompose(a) => decompose_cmd(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("cur-kit: {msg}");
            ExitCode::from(2)
        }
    }
}
