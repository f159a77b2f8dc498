//! `endprox` command-line tool.

use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use endprox::exact::pfold::PfoldParams;
use endprox::limits::{ete_limit_moments, limit_of};
use endprox::pipeline::{
    compare, heatmap, run_stats, summary_rows, write_csv, write_json, StatsReport, StructureInput,
};
use endprox::sample::{sample_dyck, MotzkinSampler, PfoldSampler, RngHandle};
use endprox::{exact_counts, klet_shuffle, EteModel, Error, Model, Stat};

#[derive(Parser, Debug)]
#[command(name = "endprox", version, about = "End-proximity statistics of RNA secondary structures")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Hydrogen-bridge step of the ETE estimate (nm)
    #[arg(long, global = true, default_value_t = 1.5)]
    ete_b: f64,
    /// Covalent step of the ETE estimate (nm)
    #[arg(long, global = true, default_value_t = 0.62)]
    ete_c: f64,
    /// Exponent of the ETE estimate
    #[arg(long, global = true, default_value_t = 1.2)]
    ete_exp: f64,
    /// Average step of the RMS estimate (nm)
    #[arg(long, global = true, default_value_t = 0.75)]
    ete_a: f64,
    /// Pfold parameters: a file with "p1 p2 p3" or {"p1":..,"p2":..,"p3":..}
    #[arg(long, global = true, value_name = "FILE")]
    pfold_params: Option<PathBuf>,
    /// Seed of the random stream (ChaCha8)
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-structure statistics of dot-bracket or bpseq files.
    ///
    /// Summaries report the mean and the population variance (divisor n)
    /// of each statistic per group.
    Stats {
        /// Input files; "-" or none reads standard input
        files: Vec<PathBuf>,
        /// Also write the per-group summary CSV to this file
        #[arg(long, value_name = "FILE")]
        summary: Option<PathBuf>,
        /// Print the per-group summary instead of the rows
        #[arg(long)]
        summary_only: bool,
    },
    /// Limit law of a statistic, with its mean and variance.
    Limits {
        #[arg(long)]
        model: Model,
        #[arg(long)]
        stat: Stat,
        /// Absolute error target for ETE moments
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Exact distribution of a statistic at size n (Dyck: semilength).
    Exact {
        #[arg(long)]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        stat: Stat,
    },
    /// Random structures, one dot-bracket line each.
    Sample {
        #[arg(long)]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// k-let preserving shuffles of FASTA-like sequence records.
    Shuffle {
        /// Input file; "-" or none reads standard input
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Shuffles per record
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Empirical distribution of a statistic against its limit law.
    Compare {
        files: Vec<PathBuf>,
        #[arg(long)]
        model: Model,
        #[arg(long)]
        stat: Stat,
        /// Write the per-bin table to this file
        #[arg(long, value_name = "FILE")]
        bins: Option<PathBuf>,
    },
    /// Percentage of structures per (DEG, UNP) cell with ETE bands.
    Heatmap { files: Vec<PathBuf> },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnsupportedCombination { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn input_error(message: String) -> Failure {
    Failure { code: 1, message }
}

fn read_input(path: &Path) -> CliResult<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn read_inputs(files: &[PathBuf]) -> CliResult<Vec<StructureInput>> {
    if files.is_empty() {
        return Ok(vec![StructureInput::new("stdin", read_input(Path::new("-"))?)]);
    }
    files
        .iter()
        .map(|f| {
            let name = if f.as_os_str() == "-" { "stdin".into() } else { f.display().to_string() };
            Ok(StructureInput::new(name, read_input(f)?))
        })
        .collect()
}

impl Global {
    fn ete_model(&self) -> CliResult<EteModel> {
        Ok(EteModel::new(self.ete_b, self.ete_c, self.ete_exp, self.ete_a)?)
    }

    fn pfold(&self) -> CliResult<PfoldParams> {
        match &self.pfold_params {
            Some(path) => Ok(read_input(path)?.parse()?),
            None => Ok(PfoldParams::default()),
        }
    }

    fn stats(&self, files: &[PathBuf]) -> CliResult<StatsReport> {
        let report = run_stats(&read_inputs(files)?, &self.ete_model()?, self.jobs)?;
        for e in &report.errors {
            eprintln!("endprox: skipped record {}: {}", e.id, e.message);
        }
        Ok(report)
    }
}

fn emit<T: Serialize>(format: Format, items: &[T], out: &mut impl Write) -> CliResult {
    match format {
        Format::Csv => write_csv(items, out)?,
        Format::Json => write_json(items, out)?,
    }
    Ok(())
}

fn run(cli: Cli, out: &mut impl Write) -> CliResult {
    let g = &cli.global;
    match &cli.command {
        Command::Stats {
            files,
            summary,
            summary_only,
        } => {
            let report = g.stats(files)?;
            if let Some(path) = summary {
                let file = fs::File::create(path)?;
                write_csv(&summary_rows(&report.summaries), BufWriter::new(file))?;
            }
            match (g.format, summary_only) {
                (Format::Json, false) => write_json(&report, out)?,
                (Format::Json, true) => write_json(&report.summaries, out)?,
                (Format::Csv, false) => write_csv(&report.rows, out)?,
                (Format::Csv, true) => write_csv(&summary_rows(&report.summaries), out)?,
            }
        }
        Command::Limits { model, stat, tol } => {
            let p = g.pfold()?;
            let pfold = (*model == Model::Pfold).then_some(&p);
            let (law, summary) = if *stat == Stat::Ete {
                let law = limit_of(*model, Stat::Joint, pfold)?;
                let m = ete_limit_moments(*model, &g.ete_model()?, *tol, pfold)?;
                (law, Some(m))
            } else {
                let law = limit_of(*model, *stat, pfold)?;
                let s = law.summary();
                (law, s)
            };
            let record = json!({
                "model": model,
                "stat": stat,
                "law": law.law_json(),
                "mean": summary.map(|s| s.mean),
                "variance": summary.map(|s| s.variance),
                "certified_error": summary.map(|s| s.certified_error),
            });
            match g.format {
                Format::Json => write_json(&record, out)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(out);
                    let cell = |v: &serde_json::Value| match v {
                        serde_json::Value::Null => String::new(),
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    let fields = ["model", "stat", "law", "mean", "variance", "certified_error"];
                    let values: Vec<String> = fields.iter().map(|f| cell(&record[f])).collect();
                    w.write_record(fields).map_err(|e| input_error(e.to_string()))?;
                    w.write_record(&values).map_err(|e| input_error(e.to_string()))?;
                    w.flush()?;
                }
            }
        }
        Command::Exact { model, n, stat } => {
            let p = g.pfold()?;
            let table = exact_counts(*model, *n, *stat, Some(&p))?;
            match g.format {
                Format::Csv => table.write_csv(out)?,
                Format::Json => write_json(&table.to_json(), out)?,
            }
        }
        Command::Sample { model, n, count } => {
            let mut rng = RngHandle::new(g.seed);
            let mut lines = Vec::with_capacity(*count);
            match model {
                Model::Dyck => {
                    for _ in 0..*count {
                        lines.push(sample_dyck(*n, &mut rng));
                    }
                }
                Model::Motzkin => {
                    let sampler = MotzkinSampler::new(*n);
                    for _ in 0..*count {
                        lines.push(sampler.sample(&mut rng));
                    }
                }
                Model::Pfold => {
                    let sampler = PfoldSampler::new(g.pfold()?, *n)?;
                    for _ in 0..*count {
                        lines.push(sampler.sample(*n, &mut rng)?);
                    }
                }
            }
            let lines: Vec<String> = lines
                .iter()
                .map(|s| s.to_dot_bracket())
                .collect::<Result<_, _>>()?;
            match g.format {
                Format::Csv => {
                    for l in &lines {
                        writeln!(out, "{l}")?;
                    }
                }
                Format::Json => write_json(&lines, out)?,
            }
        }
        Command::Shuffle { file, k, count } => {
            let text = read_input(file.as_deref().unwrap_or(Path::new("-")))?;
            let records = read_sequences(&text);
            if records.is_empty() {
                return Err(Error::NoRecords.into());
            }
            let mut rng = RngHandle::new(g.seed);
            let mut shuffled = Vec::new();
            for (id, seq) in &records {
                for i in 1..=*count {
                    shuffled.push(ShuffledRecord {
                        id: format!("{id}_shuf{i}"),
                        sequence: klet_shuffle(seq, *k, &mut rng)?,
                    });
                }
            }
            match g.format {
                Format::Csv => {
                    for r in &shuffled {
                        writeln!(out, ">{}\n{}", r.id, r.sequence)?;
                    }
                }
                Format::Json => write_json(&shuffled, out)?,
            }
        }
        Command::Compare {
            files,
            model,
            stat,
            bins,
        } => {
            let p = g.pfold()?;
            let pfold = (*model == Model::Pfold).then_some(&p);
            let report = g.stats(files)?;
            let cmp = compare(&report.rows, *model, *stat, pfold)?;
            if let Some(path) = bins {
                write_csv(&cmp.bins, BufWriter::new(fs::File::create(path)?))?;
            }
            match g.format {
                Format::Json => write_json(&cmp, out)?,
                Format::Csv => {
                    let row = CompareRow {
                        model: cmp.model,
                        stat: cmp.stat,
                        n_structures: cmp.n_structures,
                        empirical_mean: cmp.empirical_mean,
                        empirical_variance: cmp.empirical_variance,
                        limit_mean: cmp.limit_mean,
                        limit_variance: cmp.limit_variance,
                        total_variation: cmp.total_variation,
                        cap: cmp.cap,
                    };
                    write_csv(&[row], out)?;
                }
            }
        }
        Command::Heatmap { files } => {
            let report = g.stats(files)?;
            emit(g.format, &heatmap(&report.rows, &g.ete_model()?), out)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ShuffledRecord {
    id: String,
    sequence: String,
}

#[derive(Serialize)]
struct CompareRow {
    model: Model,
    stat: Stat,
    n_structures: usize,
    empirical_mean: Option<f64>,
    empirical_variance: Option<f64>,
    limit_mean: Option<f64>,
    limit_variance: Option<f64>,
    total_variation: f64,
    cap: u64,
}

/// `>id` headers followed by sequence lines (wrapped lines are joined).
/// Headerless sequences are named `seq<N>`, one per line.
fn read_sequences(text: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    let mut open = false;
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('>') {
            let id = rest.split_whitespace().next().unwrap_or("").to_string();
            let id = if id.is_empty() { format!("seq{}", out.len() + 1) } else { id };
            out.push((id, String::new()));
            open = true;
        } else if open {
            out.last_mut().unwrap().1.push_str(line);
        } else {
            out.push((format!("seq{}", out.len() + 1), line.to_string()));
        }
    }
    out.retain(|(_, s)| !s.is_empty());
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli, &mut out).and_then(|()| out.flush().map_err(Failure::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("endprox: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
