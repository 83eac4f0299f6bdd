//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when `test` rejects at least one word, 2 on
//! usage or input errors.

use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::bits::BitWord;
use crate::coders::{CoderId, ExternalCompressor, LengthMode};
use crate::error::{Error, Result};
use crate::input::{InputFormat, InputSource, Origin};
use crate::sim::{convergence_trace, doubling_schedule, GeneratorSpec, MeasureKind};
use crate::stats::{
    adjusted_conditional_with_mode, adjusted_mutual_with_mode, adjusted_with_mode, AdjustedReport,
};
use crate::testing::{
    counting_lemma_audit, fpr_to_csv, monte_carlo_fpr, test_word, Decision, TestConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "adjc",
    version,
    about = "Entropy-normalized complexity statistics and randomness tests for binary words"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Mode {
    #[default]
    Ideal,
    Concrete,
}

impl From<Mode> for LengthMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Ideal => LengthMode::Ideal,
            Mode::Concrete => LengthMode::Concrete,
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input encoding: ascii01, raw (bytes, MSB first) or hex.
    #[arg(long = "input-format", default_value = "ascii01", value_parser = parse_input_format)]
    pub input_format: InputFormat,
    /// Keep only the first N bits.
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CoderArgs {
    /// literal, shell, run_length, periodic[:P_max], pair_shell or model_class.
    #[arg(long, default_value = "shell", value_parser = parse_coder)]
    pub coder: CoderId,
    /// Use ideal (real-valued) or concrete (integer) code lengths.
    #[arg(long, value_enum, default_value_t = Mode::Ideal)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Adjusted statistics of a word.
    Analyze {
        /// Input path; `-` or absent for standard input.
        input: Option<String>,
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        coder: CoderArgs,
        /// Treat each line as a separate word.
        #[arg(long)]
        batch: bool,
        /// Measure the description length with an external compressor instead.
        #[arg(long = "external-cmd")]
        external_cmd: Option<String>,
    },
    /// Deficiency test; exits 1 on rejection.
    Test {
        input: Option<String>,
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        coder: CoderArgs,
        /// Deficiency threshold in bits.
        #[arg(long, default_value_t = 5)]
        m: u32,
        #[arg(long)]
        batch: bool,
        /// Also scan growing prefixes with the log penalty.
        #[arg(long)]
        scan: bool,
    },
    /// Conditional statistics of X given Y.
    Cond {
        x: String,
        y: String,
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        coder: CoderArgs,
    },
    /// Mutual statistics of X and Y.
    Mutual {
        x: String,
        y: String,
        #[command(flatten)]
        io: InputArgs,
        #[command(flatten)]
        coder: CoderArgs,
    },
    /// Convergence trace of a simulated source.
    Simulate {
        /// bernoulli:P, mixture:W1:P1,W2:P2,... or block.
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureKind,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated prefix lengths, or `doubling` (16, 32, ..., length).
        #[arg(long, default_value = "doubling")]
        schedule: String,
        #[arg(long, default_value = "shell", value_parser = parse_coder)]
        coder: CoderId,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Monte Carlo false-positive rates under a Bernoulli source.
    Calibrate {
        /// bernoulli:P
        #[arg(long, value_parser = parse_measure)]
        measure: MeasureKind,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "shell", value_parser = parse_coder)]
        coder: CoderId,
        #[arg(long, value_enum, default_value_t = Mode::Ideal)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Exhaustive in-shell counting audit for words of length N.
    Audit {
        #[arg(long)]
        length: u32,
        #[arg(long, default_value = "shell", value_parser = parse_coder)]
        coder: CoderId,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
}

fn parse_coder(s: &str) -> std::result::Result<CoderId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_measure(s: &str) -> std::result::Result<MeasureKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_input_format(s: &str) -> std::result::Result<InputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `analyze` output: the full report, or the constant-word marker.
#[derive(Debug, Serialize)]
#[serde(untagged)]
enum AnalyzeRecord {
    Report(AdjustedReport),
    Constant {
        decision: &'static str,
        n: u64,
        w: u64,
        coder: String,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    match execute(cli.command, stdin, stdout) {
        Ok(code) => code,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn source(input: Option<&str>, io: &InputArgs) -> InputSource {
    InputSource {
        format: io.input_format,
        origin: Origin::from_arg(input),
        cap: io.cap,
    }
}

fn read_words(src: &InputSource, batch: bool, stdin: &mut dyn Read) -> Result<Vec<BitWord>> {
    if batch {
        src.read_batch(stdin)
    } else {
        Ok(vec![src.read_word(stdin)?])
    }
}

pub fn execute(command: Command, stdin: &mut dyn Read, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Analyze {
            input,
            io,
            coder,
            batch,
            external_cmd,
        } => {
            let words = read_words(&source(input.as_deref(), &io), batch, stdin)?;
            let external = external_cmd
                .as_deref()
                .map(ExternalCompressor::from_command_line)
                .transpose()?;
            let mode = LengthMode::from(coder.mode);
            let records: Vec<AnalyzeRecord> = words
                .par_iter()
                .map(|word| {
                    let label = external
                        .as_ref()
                        .map_or_else(|| coder.coder.to_string(), ExternalCompressor::label);
                    if word.is_constant() {
                        return Ok(AnalyzeRecord::Constant {
                            decision: Decision::ConstantWord.as_str(),
                            n: word.len() as u64,
                            w: word.weight() as u64,
                            coder: label,
                        });
                    }
                    let report = match &external {
                        Some(ext) => {
                            AdjustedReport::from_length(word, ext.length_bits(word)? as f64, label)?
                        }
                        None => adjusted_with_mode(word, coder.coder, mode)?,
                    };
                    Ok(AnalyzeRecord::Report(report))
                })
                .collect::<Result<_>>()?;
            emit(&records, coder.format, out)?;
            Ok(EXIT_OK)
        }
        Command::Test {
            input,
            io,
            coder,
            m,
            batch,
            scan,
        } => {
            let words = read_words(&source(input.as_deref(), &io), batch, stdin)?;
            let cfg = TestConfig::new(m, coder.coder)?.with_mode(coder.mode.into());
            let verdicts: Vec<_> = words.par_iter().map(|w| test_word(w, &cfg)).collect();
            emit(&verdicts, coder.format, out)?;
            let mut rejected = verdicts.iter().any(|v| v.decision == Decision::Reject);
            if scan {
                for word in &words {
                    let result = crate::testing::prefix_scan(word, &cfg)?;
                    emit(&result.rows, coder.format, out)?;
                    rejected |= result.first_flag.is_some();
                }
            }
            Ok(if rejected { EXIT_REJECT } else { EXIT_OK })
        }
        Command::Cond { x, y, io, coder } => {
            let xw = source(Some(&x), &io).read_word(stdin)?;
            let yw = source(Some(&y), &io).read_word(stdin)?;
            let report = adjusted_conditional_with_mode(&xw, &yw, coder.coder, coder.mode.into())?;
            emit(&[report], coder.format, out)?;
            Ok(EXIT_OK)
        }
        Command::Mutual { x, y, io, coder } => {
            let xw = source(Some(&x), &io).read_word(stdin)?;
            let yw = source(Some(&y), &io).read_word(stdin)?;
            let report = adjusted_mutual_with_mode(&xw, &yw, coder.coder, coder.mode.into())?;
            emit(&[report], coder.format, out)?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            measure,
            length,
            seed,
            schedule,
            coder,
            format,
        } => {
            let schedule = parse_schedule(&schedule, length)?;
            let spec = GeneratorSpec::new(measure, seed, length);
            let trace = convergence_trace(&spec, coder, &schedule)?;
            match format {
                OutputFormat::Csv => trace.to_csv(out)?,
                _ => emit(&trace.rows, format, out)?,
            }
            Ok(EXIT_OK)
        }
        Command::Calibrate {
            measure,
            length,
            trials,
            seed,
            coder,
            mode,
            format,
        } => {
            let MeasureKind::Bernoulli { p } = measure else {
                return Err(Error::Config(
                    "calibrate needs --measure bernoulli:P".into(),
                ));
            };
            let cfg = TestConfig::new(1, coder)?.with_mode(mode.into());
            let rows = monte_carlo_fpr(p, length, &cfg, trials, seed)?;
            match format {
                OutputFormat::Csv => fpr_to_csv(&rows, out)?,
                _ => emit(&rows, format, out)?,
            }
            Ok(EXIT_OK)
        }
        Command::Audit {
            length,
            coder,
            format,
        } => {
            let table = counting_lemma_audit(length, coder)?;
            emit(&table.rows, format, out)?;
            Ok(EXIT_OK)
        }
    }
}

fn parse_schedule(s: &str, length: usize) -> Result<Vec<usize>> {
    if length == 0 {
        return Err(Error::Config("length must be at least 1".into()));
    }
    if s == "doubling" {
        return Ok(doubling_schedule(length));
    }
    let points: Vec<usize> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad schedule entry {t:?}")))
        })
        .collect::<Result<_>>()?;
    if points.iter().any(|&m| m > length) {
        return Err(Error::Config("schedule exceeds --length".into()));
    }
    Ok(points)
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Writes records as JSON lines, CSV or an aligned table.
pub fn emit<T: Serialize>(records: &[T], format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    let values: Vec<Value> = records
        .iter()
        .map(|r| serde_json::to_value(r).map_err(|e| Error::Io(e.into())))
        .collect::<Result<_>>()?;
    match format {
        OutputFormat::Json => {
            for v in &values {
                writeln!(out, "{v}")?;
            }
        }
        OutputFormat::Csv | OutputFormat::Table => {
            let Some(first) = values.first().and_then(Value::as_object) else {
                return Ok(());
            };
            let header: Vec<String> = first.keys().cloned().collect();
            let rows: Vec<Vec<String>> = values
                .iter()
                .map(|v| header.iter().map(|k| scalar(&v[k])).collect())
                .collect();
            if format == OutputFormat::Csv {
                let mut wtr = csv::Writer::from_writer(&mut *out);
                wtr.write_record(&header).map_err(crate::sim::csv_err)?;
                for row in &rows {
                    wtr.write_record(row).map_err(crate::sim::csv_err)?;
                }
                wtr.flush()?;
            } else {
                let widths: Vec<usize> = (0..header.len())
                    .map(|i| {
                        rows.iter()
                            .map(|r| r[i].len())
                            .chain([header[i].len()])
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |cells: &[String]| {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                writeln!(out, "{}", line(&header))?;
                for row in &rows {
                    writeln!(out, "{}", line(row))?;
                }
            }
        }
    }
    Ok(())
}
