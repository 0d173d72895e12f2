//! Command-line front end. Each subcommand reads its inputs, runs one
//! pipeline, and writes its outputs (atomically) under `--out-dir`.

mod convert;
mod eval;
mod loss;
mod mix;
mod schedule;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{RunConfig, CONFIG_ENV};
use crate::error::{Error, Result};
use crate::imagecore::Dims;
use crate::io::write_atomic;
use crate::scheduler::Domain;

pub use convert::run_convert_light;
pub use eval::{run_apce, run_iou};
pub use loss::{run_loss, LossManifest};
pub use mix::{run_mix, MixInputs};
pub use schedule::{parse_trace, run_schedule, TraceLine};

#[derive(Debug, Parser)]
#[command(name = "foalkit", version, about = "Small-object appearance tooling for thermal-to-color translation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// TOML configuration file (falls back to $FOALKIT_CONFIG, then defaults).
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Overrides the configured RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving all outputs.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Score empty translated edge maps as 0 in APCE.
    #[arg(long, global = true)]
    pub strict_apce: bool,
    /// Worker threads for batch modes (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Occlusion-aware mix of a fake frame's small objects into a real frame.
    Mix {
        #[arg(long)]
        real_image: PathBuf,
        #[arg(long)]
        fake_image: PathBuf,
        #[arg(long)]
        real_labels: PathBuf,
        #[arg(long)]
        fake_labels: PathBuf,
        #[arg(long, value_parser = parse_domain)]
        domain: Domain,
        /// Color supervision target; thermal mixes write its color-converted copy.
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Evaluate every loss whose inputs a manifest provides.
    Loss {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Replay a feedback trace through the sample scheduler.
    Schedule {
        #[arg(long)]
        trace: PathBuf,
        /// JSON sample index with `A` and `B` entry lists.
        #[arg(long)]
        index: Option<PathBuf>,
    },
    /// Multi-threshold Canny edge precision of translations against thermal sources.
    Apce {
        /// Translated image, or directory of PNGs.
        #[arg(long)]
        translated: PathBuf,
        /// Thermal source image, or directory with matching file names.
        #[arg(long)]
        source: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
    },
    /// Per-class IoU and mIoU of predicted label maps.
    Iou {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Class ids to score (default: every palette id).
        #[arg(long, value_delimiter = ',')]
        classes: Option<Vec<u8>>,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
    },
    /// Red/green color conversion of traffic-light crops.
    ConvertLight {
        /// Crop image, or directory of crops.
        #[arg(long)]
        input: PathBuf,
    },
}

fn parse_domain(s: &str) -> std::result::Result<Domain, String> {
    s.parse()
}

/// Shared state for a run.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub jobs: Option<usize>,
}

impl Context {
    pub fn new(global: &GlobalOpts) -> Result<Self> {
        let mut config = RunConfig::resolve(global.config.as_deref())?;
        if let Some(seed) = global.seed {
            config.seed = seed;
        }
        if global.strict_apce {
            config.apce.strict = true;
        }
        Ok(Context { config, out_dir: global.out_dir.clone(), jobs: global.jobs })
    }

    pub fn with_config(config: RunConfig, out_dir: impl Into<PathBuf>) -> Self {
        Context { config, out_dir: out_dir.into(), jobs: None }
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub(crate) fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.jobs {
            b = b.num_threads(n.max(1));
        }
        b.build().map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Checks two inputs share a frame size; the error names both files.
pub(crate) fn same_size(a: &Path, da: Dims, b: &Path, db: Dims) -> Result<()> {
    if da == db {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected: format!("{} ({da})", a.display()),
            found: format!("{} ({db})", b.display()),
        })
    }
}

/// Sorted PNG files of a directory, or the single file itself.
pub(crate) fn list_pngs(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| Error::Io { path: path.to_path_buf(), message: e.to_string() })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
            .collect();
        files.sort();
        Ok(files)
    } else if path.exists() {
        Ok(vec![path.to_path_buf()])
    } else {
        Err(Error::MissingInput(path.display().to_string()))
    }
}

/// Pairs files of two batch inputs by file name.
pub(crate) fn pair_inputs(left: &Path, right: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    if left.is_dir() != right.is_dir() {
        return Err(Error::InvalidParameter(format!(
            "{} and {} must both be files or both be directories",
            left.display(),
            right.display()
        )));
    }
    if !left.is_dir() {
        let name = left.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        list_pngs(left)?;
        list_pngs(right)?;
        return Ok(vec![(name, left.to_path_buf(), right.to_path_buf())]);
    }
    let mut pairs = Vec::new();
    for l in list_pngs(left)? {
        let name = l.file_name().expect("listed file").to_string_lossy().into_owned();
        let r = right.join(&name);
        if !r.exists() {
            return Err(Error::MissingInput(format!("{} (counterpart of {})", r.display(), l.display())));
        }
        pairs.push((name, l, r));
    }
    if pairs.is_empty() {
        return Err(Error::MissingInput(format!("no PNG files in {}", left.display())));
    }
    Ok(pairs)
}

pub fn run(cli: &Cli) -> Result<()> {
    let ctx = Context::new(&cli.global)?;
    match &cli.command {
        Command::Mix { real_image, fake_image, real_labels, fake_labels, domain, target } => {
            let inputs = MixInputs {
                real_image: real_image.clone(),
                fake_image: fake_image.clone(),
                real_labels: real_labels.clone(),
                fake_labels: fake_labels.clone(),
                domain: *domain,
                target: target.clone(),
            };
            run_mix(&ctx, &inputs).map(|_| ())
        }
        Command::Loss { manifest } => run_loss(&ctx, manifest).map(|_| ()),
        Command::Schedule { trace, index } => run_schedule(&ctx, trace, index.as_deref()).map(|_| ()),
        Command::Apce { translated, source, format } => run_apce(&ctx, translated, source, *format).map(|_| ()),
        Command::Iou { pred, gt, classes, format } => run_iou(&ctx, pred, gt, classes.as_deref(), *format).map(|_| ()),
        Command::ConvertLight { input } => run_convert_light(&ctx, input).map(|_| ()),
    }
}
