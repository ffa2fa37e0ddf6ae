use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fcpd_core::io::Format;
use fcpd_core::segmentation::{SegmentationConfig, TailPolicy};
use fcpd_core::shape_space::SlopeSignMode;

mod commands;

#[derive(Parser)]
#[command(name = "fcpd", version, about = "On-line change-point detection with fuzzy rule queries", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a series and print one row per segment
    Segment {
        /// CSV file, or `-` for standard input
        input: PathBuf,
        #[command(flatten)]
        seg: SegArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Segment a series and rank the segments with a rule file
    Query {
        input: PathBuf,
        #[command(flatten)]
        seg: SegArgs,
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Cluster segments by a pair of shape coefficients
    Cluster {
        input: PathBuf,
        #[command(flatten)]
        seg: SegArgs,
        /// Number of clusters
        #[arg(long, default_value_t = 3)]
        clusters: usize,
        /// Coefficient pair, e.g. `1,2` for slope and curvature
        #[arg(long, default_value = "1,2", value_parser = parse_pair)]
        pair: (usize, usize),
        #[arg(long, env = "FCPD_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
    },
    /// Best and worst score bounds over one series or a directory of series
    Sensitivity {
        /// A CSV file or a directory of them
        path: PathBuf,
        #[command(flatten)]
        seg: SegArgs,
        #[command(flatten)]
        query: QueryArgs,
        /// Parameter to vary, one run per value
        #[arg(long, value_enum, requires = "values")]
        vary: Option<Param>,
        /// Comma-separated values for `--vary`
        #[arg(long, value_delimiter = ',', requires = "vary")]
        values: Vec<f64>,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
    },
    /// Write a seeded sinusoid with two anomalies as `t,y` CSV
    Generate {
        #[arg(long, default_value_t = 2000)]
        length: usize,
        /// Samples per cycle
        #[arg(long, default_value_t = 200.0)]
        period: f64,
        #[arg(long, env = "FCPD_SEED", default_value_t = 0)]
        seed: u64,
        /// Leave out the noise burst and the replaced level
        #[arg(long)]
        clean: bool,
        /// Output file (standard output if absent)
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Signed offsets between two sorted lists of change points
    Offsets {
        #[arg(long, value_delimiter = ',', required = true)]
        reference: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        candidate: Vec<usize>,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
    },
}

#[derive(Args, Clone)]
struct SegArgs {
    /// Polynomial degree K
    #[arg(long, default_value_t = 5)]
    degree: usize,
    /// Deviation threshold, in (normalized) value units
    #[arg(long)]
    th_dpu: Option<f64>,
    /// Slope sign-switch threshold
    #[arg(long)]
    th_sss: Option<u32>,
    #[arg(long, value_enum, default_value_t = SssMode::Alpha1)]
    sss_mode: SssMode,
    /// Slopes within this distance of zero carry no sign
    #[arg(long, default_value_t = fcpd_core::segmentation::DEFAULT_SSS_DEADBAND)]
    sss_deadband: f64,
    /// Shortest segment before the criteria are consulted (default K+1, at least 2)
    #[arg(long)]
    min_len: Option<usize>,
    /// Discard the unfinished window at the end of the input
    #[arg(long)]
    drop_tail: bool,
    /// Scale the series to zero mean and unit variance first
    #[arg(long)]
    normalize: bool,
}

#[derive(Args, Clone)]
struct QueryArgs {
    /// Rule file
    #[arg(long, required = true)]
    rules: PathBuf,
    /// Delay used by the var_* feature names
    #[arg(long, default_value_t = fcpd_core::features::DEFAULT_DELAY)]
    delay: usize,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Also write plot data files into this directory
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SssMode {
    /// Sign of the fitted slope coefficient
    Alpha1,
    /// Sign of consecutive differences
    FirstDiff,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Param {
    Degree,
    ThDpu,
    ThSss,
}

impl Param {
    fn name(self) -> &'static str {
        match self {
            Param::Degree => "degree",
            Param::ThDpu => "th_dpu",
            Param::ThSss => "th_sss",
        }
    }
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

impl SegArgs {
    fn config(&self) -> SegmentationConfig {
        let mut c = SegmentationConfig::new(self.degree)
            .with_sss_mode(match self.sss_mode {
                SssMode::Alpha1 => SlopeSignMode::Alpha1Sign,
                SssMode::FirstDiff => SlopeSignMode::FirstDiffSign,
            })
            .with_sss_deadband(self.sss_deadband);
        if let Some(th) = self.th_dpu {
            c = c.with_dpu(th);
        }
        if let Some(th) = self.th_sss {
            c = c.with_sss(th);
        }
        if let Some(n) = self.min_len {
            c = c.with_min_segment_len(n);
        }
        if self.drop_tail {
            c = c.with_tail_policy(TailPolicy::Drop);
        }
        c
    }
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two indices like `1,2`, got `{s}`"))?;
    let idx = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok((idx(a)?, idx(b)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        // the reader went away, e.g. `| head`
        Err(f) if f.code == 0 => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fcpd: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
