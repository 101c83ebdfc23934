//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid flags, 3 a freshly built
//! partition failed its self-check, 4 an input file could not be parsed,
//! 5 a partition file failed verification, 6 the oracle budget was exceeded.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::geometry::Rational;
use crate::partition::{self, format, radius_check, Construction, TransportPartition, VerifyMode};
use crate::sequence::{DigitalSequence, MAX_DIM};
use crate::transport::{
    constant_bound, obstruction_scan, volumetric_lower_winfty, winfty_oracle_grid, winfty_upper,
    BoundReport, CouplingCertificate, Exponent, OracleError, VerifiedPartition,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SELF_CHECK: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_CHECK: i32 = 5;
pub const EXIT_BUDGET: i32 = 6;

/// Largest `N` verified pairwise unless `--oblivious` is given.
pub const OBLIVIOUS_LIMIT: u64 = 2000;

/// Header shared by every report table.
pub const TABLE_HEADER: [&str; 6] = ["N", "value", "lower", "upper", "oracle", "error"];

#[derive(Debug, Parser)]
#[command(
    name = "dyadic-transport",
    version,
    about = "Exact transport partitions and Wasserstein certificates for a dyadic digital sequence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the first N points of the sequence.
    Gen(GenArgs),
    /// Build, self-verify and serialize the transport partition.
    Partition(PartitionArgs),
    /// Re-verify a serialized partition.
    Verify(VerifyArgs),
    /// Certified upper bound, theorem bound and volumetric lower bound.
    Bounds(BoundsArgs),
    /// Bounds plus the grid bottleneck oracle.
    Oracle(OracleArgs),
    /// N * W_1 along the one-dimensional van der Corput sequence.
    Obstruction(ObstructionArgs),
    /// N^(1/d)-normalized bounds over N = 1, 2, 4, ..., n-max.
    Rates(RatesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: u64,
    /// Self-check disjointness pairwise instead of through the word tree.
    #[arg(long)]
    pub oblivious: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Partition file to check.
    pub input: PathBuf,
    /// Force pairwise disjointness checking regardless of N.
    #[arg(long)]
    pub oblivious: bool,
    /// Additionally report the radius check for this constant (does not affect the exit code).
    #[arg(long)]
    pub constant: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: u64,
    /// Wasserstein exponent in [1, inf].
    #[arg(long, default_value = "inf")]
    pub p: String,
    /// Constant c in the reported bound c * sqrt(d) * N^(-1/d).
    #[arg(long, default_value = "6")]
    pub constant: String,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub bounds: BoundsArgs,
    /// Grid cells per axis.
    #[arg(long)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct ObstructionArgs {
    #[arg(long = "n-max")]
    pub n_max: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long = "n-max")]
    pub n_max: u64,
    #[arg(long, default_value = "6")]
    pub constant: String,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// A failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(EXIT_USAGE, message)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(EXIT_IO, e.to_string())
    }
}

/// A header plus string rows, written as CSV or JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new<S: ToString>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(ToString::to_string).collect(),
            rows: Vec::new(),
        }
    }

    fn report() -> Self {
        Table::new(&TABLE_HEADER)
    }

    pub fn write<W: Write>(&self, format: TableFormat, mut w: W) -> io::Result<()> {
        match format {
            TableFormat::Csv => {
                let mut csv = csv::Writer::from_writer(w);
                csv.write_record(&self.header)?;
                for row in &self.rows {
                    csv.write_record(row)?;
                }
                csv.flush()
            }
            TableFormat::Json => {
                let doc = serde_json::json!({ "header": self.header, "rows": self.rows });
                serde_json::to_writer_pretty(&mut w, &doc)?;
                writeln!(w)
            }
        }
    }
}

/// Renders a float with 12 significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp).max(0) as usize, x)
    } else {
        format!("{:.11e}", x)
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// Parses a positive constant given as an integer, `p/q`, or a decimal.
pub fn parse_constant(s: &str) -> Option<Rational> {
    let s = s.trim();
    let value = if s.contains('/') {
        format::parse_rational(s).ok()?
    } else if let Some((int, frac)) = s.split_once('.') {
        if !frac.bytes().all(|c| c.is_ascii_digit()) || frac.is_empty() {
            return None;
        }
        let digits: BigInt = format!("{int}{frac}").parse().ok()?;
        Rational::new(digits, BigInt::from(10).pow(frac.len() as u32))
    } else {
        Rational::from_integer(s.parse::<BigInt>().ok()?)
    };
    (value > Rational::zero()).then_some(value)
}

fn check_dim(d: usize) -> Result<(), Failure> {
    if !(2..=MAX_DIM).contains(&d) {
        return Err(Failure::usage(format!(
            "--d must be in 2..={MAX_DIM}, got {d}"
        )));
    }
    Ok(())
}

fn check_count(flag: &str, n: u64) -> Result<(), Failure> {
    if n == 0 {
        return Err(Failure::usage(format!("{flag} must be at least 1")));
    }
    Ok(())
}

fn constant_arg(s: &str) -> Result<Rational, Failure> {
    parse_constant(s)
        .ok_or_else(|| Failure::usage(format!("--constant must be a positive number, got {s:?}")))
}

fn exponent_arg(s: &str) -> Result<Exponent, Failure> {
    s.parse::<Exponent>()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn open_output<'a>(
    output: &OutputArgs,
    stdout: &'a mut dyn Write,
) -> Result<Box<dyn Write + 'a>, Failure> {
    Ok(match &output.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(stdout),
    })
}

fn emit_table(
    table: &Table,
    format: TableFormat,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let mut w = open_output(output, stdout)?;
    table.write(format, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Builds and self-verifies; the only failure here is a construction bug.
fn certified(
    n: u64,
    d: usize,
    mode: VerifyMode,
) -> Result<(TransportPartition, CouplingCertificate), Failure> {
    let construction =
        Construction::run(n, d).map_err(|e| Failure::new(EXIT_SELF_CHECK, e.to_string()))?;
    let partition = construction.partition;
    let certificate = match VerifiedPartition::new(&partition, mode) {
        Ok(v) => winfty_upper(&v),
        Err(e) => return Err(Failure::new(EXIT_SELF_CHECK, e.to_string())),
    };
    Ok((partition, certificate))
}

fn self_check_mode(oblivious: bool) -> VerifyMode {
    if oblivious {
        VerifyMode::Oblivious
    } else {
        VerifyMode::Tree
    }
}

fn cmd_gen(args: &GenArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    check_dim(args.d)?;
    check_count("--n", args.n)?;
    let seq = DigitalSequence::new(args.d).map_err(|e| Failure::usage(e.to_string()))?;
    let mut header = vec!["n".to_string()];
    header.extend((1..=args.d).map(|j| format!("x{j}")));
    header.extend((1..=args.d).map(|j| format!("f{j}")));
    let mut table = Table::new(&header);
    for n in 1..=args.n {
        let p = seq.point(n).map_err(|e| Failure::usage(e.to_string()))?;
        let mut row = vec![n.to_string()];
        row.extend(p.to_rationals().iter().map(format::format_rational));
        row.extend(p.to_f64s().into_iter().map(format_float));
        table.rows.push(row);
    }
    emit_table(&table, args.format, &args.output, stdout)
}

fn cmd_partition(
    args: &PartitionArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), Failure> {
    check_dim(args.d)?;
    check_count("--n", args.n)?;
    let partition = Construction::run(args.n, args.d)
        .map_err(|e| Failure::new(EXIT_SELF_CHECK, e.to_string()))?
        .partition;
    let report = partition::verify_partition(&partition, self_check_mode(args.oblivious));
    write!(stderr, "{report}")?;
    if !report.passed() {
        return Err(Failure::new(
            EXIT_SELF_CHECK,
            "self-check failed; refusing to write the partition",
        ));
    }
    let mut w = open_output(&args.output, stdout)?;
    format::write_partition(&mut w, &partition)
        .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let constant = args.constant.as_deref().map(constant_arg).transpose()?;
    let file = File::open(&args.input)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", args.input.display())))?;
    let partition = format::read_partition(BufReader::new(file))
        .map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    let mode = if args.oblivious || partition.count <= OBLIVIOUS_LIMIT {
        VerifyMode::Oblivious
    } else {
        VerifyMode::Tree
    };
    let report = partition::verify_partition(&partition, mode);
    let mut w = open_output(&args.output, stdout)?;
    writeln!(w, "mode: {mode:?}")?;
    write!(w, "{report}")?;
    if let (Some(c), true) = (&constant, report.passed()) {
        writeln!(w, "info {}", radius_check(&partition, c))?;
    }
    w.flush()?;
    match report.first_failure() {
        None => Ok(()),
        Some(f) => Err(Failure::new(EXIT_CHECK, f.to_string())),
    }
}

fn bounds_row(n: u64, d: usize, constant: f64, report: &BoundReport) -> Vec<String> {
    vec![
        n.to_string(),
        format_float(report.upper),
        opt_float(report.lower),
        format_float(constant_bound(constant, n, d)),
        opt_float(report.oracle_value),
        opt_float(report.oracle_error),
    ]
}

fn cmd_bounds(
    args: &BoundsArgs,
    grid: Option<usize>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    check_dim(args.d)?;
    check_count("--n", args.n)?;
    let p = exponent_arg(&args.p)?;
    let constant = constant_arg(&args.constant)?.to_f64().unwrap_or(f64::NAN);
    if grid == Some(0) {
        return Err(Failure::usage("--grid must be at least 1"));
    }
    let (partition, certificate) = certified(args.n, args.d, VerifyMode::Tree)?;
    let mut report = BoundReport::new(&certificate, p);
    if let Some(g) = grid {
        let points: Vec<Vec<Rational>> = partition.cells.iter().map(|c| c.point.clone()).collect();
        let oracle = winfty_oracle_grid(&points, g).map_err(|e| match e {
            OracleError::Budget { .. } => Failure::new(EXIT_BUDGET, e.to_string()),
            _ => Failure::usage(e.to_string()),
        })?;
        report = report.with_oracle(&oracle);
    }
    let mut table = Table::report();
    table
        .rows
        .push(bounds_row(args.n, args.d, constant, &report));
    emit_table(&table, args.format, &args.output, stdout)
}

fn cmd_obstruction(args: &ObstructionArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let scan = obstruction_scan(args.n_max).map_err(|e| Failure::usage(e.to_string()))?;
    let mut table = Table::report();
    for row in &scan.rows {
        table.rows.push(vec![
            row.count.to_string(),
            format::format_rational(&row.scaled_w1),
            String::new(),
            format::format_rational(&row.block_max),
            String::new(),
            String::new(),
        ]);
    }
    emit_table(&table, args.format, &args.output, stdout)
}

fn cmd_rates(args: &RatesArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    check_dim(args.d)?;
    check_count("--n-max", args.n_max)?;
    let constant = constant_arg(&args.constant)?.to_f64().unwrap_or(f64::NAN);
    let mut table = Table::report();
    let sizes =
        std::iter::successors(Some(1u64), |&n| n.checked_mul(2)).take_while(|&n| n <= args.n_max);
    for n in sizes {
        let (_, certificate) = certified(n, args.d, VerifyMode::Tree)?;
        let scale = (n as f64).powf(1.0 / args.d as f64);
        table.rows.push(vec![
            n.to_string(),
            format_float(certificate.radius * scale),
            format_float(volumetric_lower_winfty(n, args.d) * scale),
            format_float(constant_bound(constant, n, args.d) * scale),
            String::new(),
            String::new(),
        ]);
    }
    emit_table(&table, args.format, &args.output, stdout)
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, stdout),
        Command::Partition(a) => cmd_partition(a, stdout, stderr),
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Bounds(a) => cmd_bounds(a, None, stdout),
        Command::Oracle(a) => cmd_bounds(&a.bounds, Some(a.grid), stdout),
        Command::Obstruction(a) => cmd_obstruction(a, stdout),
        Command::Rates(a) => cmd_rates(a, stdout),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
