use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tensemble::manifest::{parse_reals, GeneratorKind, Manifest};
use tensemble::{run, CliError, Command, LinesMode};
use tensemble_core::Normalization;

/// Degenerate-tensor features of tensor-field ensembles.
///
/// Every command prints a key=value run summary on stdout.
/// Exit codes: 0 success, 2 bad input, 3 I/O failure, 4 internal error.
#[derive(Parser, Debug)]
#[command(name = "tensemble", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Write synthetic ensemble members and a manifest listing them.
    Gen,
    /// Mean tensor field and mode statistics.
    Stats,
    /// Degenerate lines per member and/or of the mean field.
    Lines {
        /// One line file per member.
        #[arg(long)]
        per_member: bool,
        /// Enhanced meanLine (the default).
        #[arg(long)]
        mean: bool,
    },
    /// modeTube around the meanLine.
    Tube,
    /// probabilityBand surfaces, one per c.
    Band,
    /// gen (unless the manifest lists member files), stats, lines, tube, band.
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NormArg {
    Global,
    Perpoint,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    TransRot,
    Noise,
}

#[derive(Args, Debug)]
struct Opts {
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Mode threshold in (0, 1].
    #[arg(long = "t", global = true)]
    t: Option<f64>,
    /// Comma-separated iso-probabilities in (0, 1).
    #[arg(long = "c", global = true)]
    c: Option<String>,
    #[arg(long, global = true)]
    r0: Option<f64>,
    #[arg(long, global = true)]
    rs: Option<f64>,
    /// Samples per tube ring.
    #[arg(long, global = true)]
    rings: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    normalization: Option<NormArg>,
    /// Generator kind.
    #[arg(long, global = true, value_enum)]
    kind: Option<KindArg>,
    /// Generated member count.
    #[arg(long, global = true)]
    members: Option<usize>,
    /// Grid points per axis.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Noise standard deviation.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Weld distance for stitching line points (default: 1e-6 of the mesh diagonal).
    #[arg(long, global = true)]
    weld_eps: Option<f64>,
}

fn manifest(opts: &Opts) -> Result<Manifest, CliError> {
    let mut m = match &opts.manifest {
        Some(p) => Manifest::load(p)?,
        None => Manifest::default(),
    };
    if let Some(v) = &opts.out {
        m.out = v.clone();
    }
    if let Some(v) = opts.t {
        m.t = v;
    }
    if let Some(v) = &opts.c {
        m.c = parse_reals(v).map_err(|e| CliError::Config(format!("--c: {e}")))?;
    }
    if let Some(v) = opts.r0 {
        m.r0 = v;
    }
    if let Some(v) = opts.rs {
        m.rs = v;
    }
    if let Some(v) = opts.rings {
        m.rings = v;
    }
    if let Some(v) = opts.seed {
        m.seed = v;
    }
    if let Some(v) = opts.normalization {
        m.normalization = match v {
            NormArg::Global => Normalization::Global,
            NormArg::Perpoint => Normalization::PerPoint,
        };
    }
    if let Some(v) = opts.kind {
        m.kind = match v {
            KindArg::TransRot => GeneratorKind::TransRot,
            KindArg::Noise => GeneratorKind::Noise,
        };
    }
    if let Some(v) = opts.members {
        m.members = v;
    }
    if let Some(v) = opts.resolution {
        m.resolution = v;
    }
    if let Some(v) = opts.sigma {
        m.sigma = v;
    }
    if let Some(v) = opts.weld_eps {
        m.weld_eps = Some(v);
    }
    Ok(m)
}

fn execute(cli: Cli) -> Result<String, CliError> {
    let threads = cli.opts.threads.unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    let man = manifest(&cli.opts)?;
    let cmd = match cli.cmd {
        Cmd::Gen => Command::Gen,
        Cmd::Stats => Command::Stats,
        Cmd::Lines { per_member, mean } => Command::Lines(match (per_member, mean) {
            (true, true) => LinesMode::Both,
            (true, false) => LinesMode::PerMember,
            _ => LinesMode::Mean,
        }),
        Cmd::Tube => Command::Tube,
        Cmd::Band => Command::Band,
        Cmd::All => Command::All,
    };
    Ok(run(cmd, man)?.render())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| execute(cli)) {
        Ok(Ok(summary)) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            println!("error={e}");
            e.exit_code()
        }
        Err(_) => ExitCode::from(4),
    }
}
