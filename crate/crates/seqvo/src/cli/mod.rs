//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use seqvo_core::consistency::{FlowDirection, MetricSelection};
use seqvo_core::voeval::RotationUnit;

use crate::error::{self, Error, Result};
use crate::report::OutputFormat;
use crate::traj::{TimeUnit, TrajFormat};

mod consistency;
mod interp;
mod loss;
mod synth;
mod voeval;
mod warp;

#[derive(Debug, Parser)]
#[command(name = "seqvo", version, about = "Sequence consistency and trajectory evaluation for stereo visual odometry")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Worker threads; 0 uses every core. Never changes any output.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Report format written to stdout.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Flow anchoring convention; overrides the manifest or spec tag.
    #[arg(long, global = true, value_enum)]
    pub flow_direction: Option<DirectionArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    /// Flows live on the earlier frame and point forward.
    Source,
    /// Flows live on the later frame and point back.
    Target,
}

impl From<DirectionArg> for FlowDirection {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Source => FlowDirection::Source,
            DirectionArg::Target => FlowDirection::Target,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricsArg {
    Tmp,
    St,
    Both,
}

impl From<MetricsArg> for MetricSelection {
    fn from(m: MetricsArg) -> Self {
        match m {
            MetricsArg::Tmp => MetricSelection::Temporal,
            MetricsArg::St => MetricSelection::Stereo,
            MetricsArg::Both => MetricSelection::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RotationUnitArg {
    /// Degrees per 100 m of segment length.
    #[value(name = "deg-per-100m")]
    DegPer100m,
    /// Mean rotation error in degrees.
    Deg,
}

impl From<RotationUnitArg> for RotationUnit {
    fn from(u: RotationUnitArg) -> Self {
        match u {
            RotationUnitArg::DegPer100m => RotationUnit::DegPer100m,
            RotationUnitArg::Deg => RotationUnit::Deg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlaneArg {
    Xz,
    Xy,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Temporal and stereo flow-consistency errors of a manifest sequence.
    Consistency {
        manifest: PathBuf,
        /// Directory receiving consistency.csv and consistency.json.
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        metrics: MetricsArg,
    },
    /// Relative and absolute trajectory errors of estimates against ground truth.
    Voeval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(required = true)]
        estimates: Vec<PathBuf>,
        /// Segment lengths in meters.
        #[arg(long, value_delimiter = ',', default_value = "100,200,300,400,500,600,700,800")]
        lengths: Vec<f64>,
        /// Frames between segment starts.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Rigidly align estimates before the absolute error.
        #[arg(long)]
        align: bool,
        /// Association window in seconds.
        #[arg(long, default_value_t = 0.02)]
        max_dt: f64,
        #[arg(long, value_enum, default_value = "deg-per-100m")]
        r_unit: RotationUnitArg,
        /// Trajectory file format; inferred per file when absent.
        #[arg(long, value_enum)]
        traj_format: Option<TrajFormat>,
        /// Directory for the metrics table and plot data.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Ground-plane axes of the top-down path files.
        #[arg(long, value_enum, default_value = "xz")]
        plane: PlaneArg,
    },
    /// Ground-truth poses at requested timestamps from a GPS/INS log.
    Interp {
        #[arg(long)]
        gpsins: PathBuf,
        #[arg(long)]
        timestamps: PathBuf,
        #[arg(long, value_enum, default_value = "us")]
        timestamps_unit: TimeUnit,
        /// TUM output; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Loss components and their weighted total.
    Loss(loss::LossArgs),
    /// Synthetic stereo sequence with exact flows and trajectory.
    Synth {
        /// JSON scene spec; defaults when absent.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Backward-warps an image by a flow field.
    Warp {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        flow: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Validity mask PNG; `<out>_mask.png` when absent.
        #[arg(long)]
        mask: Option<PathBuf>,
    },
}

/// Writes to `path`, or stdout when `None`.
pub(crate) fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => error::write(p, text.as_bytes()),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let global = cli.global;
    pool.install(|| match cli.command {
        Command::Consistency { manifest, out, metrics } => consistency::run(&global, &manifest, &out, metrics.into()),
        Command::Voeval {
            gt,
            estimates,
            lengths,
            stride,
            align,
            max_dt,
            r_unit,
            traj_format,
            out,
            plane,
        } => voeval::run(
            &global,
            &voeval::VoArgs {
                gt,
                estimates,
                lengths,
                stride,
                align,
                max_dt,
                r_unit: r_unit.into(),
                traj_format,
                out,
                plane,
            },
        ),
        Command::Interp {
            gpsins,
            timestamps,
            timestamps_unit,
            out,
        } => interp::run(&gpsins, &timestamps, timestamps_unit, out.as_deref()),
        Command::Loss(args) => loss::run(&global, &args),
        Command::Synth { spec, out } => synth::run(&global, spec.as_deref(), &out),
        Command::Warp { image, flow, out, mask } => warp::run(&image, &flow, &out, mask.as_deref()),
    })
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("SEQVO_LOG", "warn");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .format_target(false)
        .try_init();
}

/// Parses `args`, runs the command and maps the outcome to an exit status:
/// 0 success, 1 usage or validation, 2 I/O or data.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
