use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use spn_core::harness::{
    complete_and_score, dataset::write_csv, load_dataset, nn_baseline, train_image_model,
    CompletionTask, ConstantPolicy, ImageDataset, ImageFormat, ModelFile, Side,
};
use spn_core::learning::average_log_likelihood;
use spn_core::structure::{generate_image_spn, ImageArchConfig, LeafParams};
use spn_core::{validate, MpeMode, TrainConfig, TrainMode};

#[derive(Parser)]
#[command(name = "spn", version, about = "Train and query sum-product networks over images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an image model and write it to a model file.
    Train(TrainArgs),
    /// Complete the occluded half of each image and report the MSE.
    Complete(CompleteArgs),
    /// Check completeness, consistency and decomposability of a model.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Average log-likelihood of a dataset under a model.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Nearest-neighbor completion baseline.
    BaselineNn {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long, value_enum, default_value_t = ConstantArg::Reject)]
        constant: ConstantArg,
    },
    /// Write an untrained image architecture with placeholder leaves.
    Generate {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Image file or directory of images.
    #[arg(long)]
    data: PathBuf,
    /// Defaults to the file extension.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, value_enum, default_value_t = ConstantArg::Reject)]
    constant: ConstantArg,
}

#[derive(Args)]
struct ArchArgs {
    /// Coarse block size; 1 disables multi-resolution.
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 20)]
    k_sums: usize,
    #[arg(long, default_value_t = 4)]
    components: usize,
    #[arg(long, default_value_t = ImageArchConfig::DEFAULT_MAX_EDGES)]
    max_edges: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    arch: ArchArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::HardEm)]
    mode: ModeArg,
    #[arg(long, default_value_t = 50)]
    batch_size: usize,
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    #[arg(long, default_value_t = 50)]
    max_epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    l0: f64,
    #[arg(long, default_value_t = 0.0)]
    l1: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = MpeArg::SumUpMaxDown)]
    mpe_mode: MpeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct CompleteArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    side: SideArg,
    #[arg(long, value_enum, default_value_t = MpeArg::SumUpMaxDown)]
    mpe_mode: MpeArg,
    /// Directory for completed images, written as CSV.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Pgm,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstantArg {
    Reject,
    Zero,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    HardEm,
    SoftEm,
    Gradient,
}

#[derive(Clone, Copy, ValueEnum)]
enum MpeArg {
    MaxMax,
    SumUpMaxDown,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
    Top,
    Bottom,
}

impl From<MpeArg> for MpeMode {
    fn from(m: MpeArg) -> Self {
        match m {
            MpeArg::MaxMax => MpeMode::MaxMax,
            MpeArg::SumUpMaxDown => MpeMode::SumUpMaxDown,
        }
    }
}

impl From<SideArg> for CompletionTask {
    fn from(s: SideArg) -> Self {
        CompletionTask::new(match s {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
            SideArg::Top => Side::Top,
            SideArg::Bottom => Side::Bottom,
        })
    }
}

fn load(path: &Path, format: Option<FormatArg>, constant: ConstantArg) -> Result<ImageDataset> {
    let format = match format {
        Some(FormatArg::Csv) => ImageFormat::Csv,
        Some(FormatArg::Pgm) => ImageFormat::Pgm,
        None if path.is_dir() => {
            bail!("{}: --format is required for a directory", path.display())
        }
        None => ImageFormat::from_path(path)
            .with_context(|| format!("{}: cannot infer format, pass --format", path.display()))?,
    };
    let policy = match constant {
        ConstantArg::Reject => ConstantPolicy::Reject,
        ConstantArg::Zero => ConstantPolicy::Zero,
    };
    Ok(load_dataset(path, format, policy)?)
}

impl DataArgs {
    fn load(&self) -> Result<ImageDataset> {
        load(&self.data, self.format, self.constant)
    }
}

fn arch_config(width: usize, height: usize, a: &ArchArgs) -> ImageArchConfig {
    ImageArchConfig {
        width,
        height,
        m: a.m,
        k_sums: a.k_sums,
        k_components: a.components,
        max_edges: a.max_edges,
    }
}

fn load_image_model(path: &Path, data: &ImageDataset) -> Result<ModelFile> {
    let model = ModelFile::load(path)?;
    if (model.width, model.height) != (data.width, data.height) {
        bail!(
            "model is for {}x{} images but the data is {}x{}",
            model.width,
            model.height,
            data.width,
            data.height
        );
    }
    Ok(model)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => {
            let data = a.data.load()?;
            let arch = arch_config(data.width, data.height, &a.arch);
            let config = TrainConfig {
                mode: match a.mode {
                    ModeArg::HardEm => TrainMode::HardEm,
                    ModeArg::SoftEm => TrainMode::SoftEm,
                    ModeArg::Gradient => TrainMode::Gradient,
                },
                learning_rate: a.learning_rate,
                batch_size: a.batch_size,
                threshold: a.threshold,
                max_epochs: a.max_epochs,
                l0: a.l0,
                l1: a.l1,
                alpha: a.alpha,
                mpe_mode: a.mpe_mode.into(),
                seed: a.seed,
            };
            let outcome = train_image_model(&data, &arch, &config)?;
            println!("{}", outcome.log);
            ModelFile::image(data.width, data.height, outcome.spn).save(&a.output)?;
        }
        Command::Complete(a) => {
            let data = a.data.load()?;
            let model = load_image_model(&a.model, &data)?;
            let report = complete_and_score(&model.spn, &data, a.side.into(), a.mpe_mode.into())?;
            if let Some(dir) = &a.output {
                fs::create_dir_all(dir).with_context(|| format!("{}", dir.display()))?;
                for img in &report.images {
                    let path = dir.join(format!("completion_{:04}.csv", img.index));
                    write_csv(&path, data.width, &img.pixels)?;
                }
            }
            println!("{report}");
        }
        Command::Validate { model } => {
            let model = ModelFile::load(&model)?;
            println!("{}", validate(&model.spn));
        }
        Command::Eval { model, data } => {
            let data = data.load()?;
            let model = load_image_model(&model, &data)?;
            println!("avg_ll={}", average_log_likelihood(&model.spn, &data.evidence())?);
        }
        Command::BaselineNn { train, test, side, format, constant } => {
            let train = load(&train, format, constant)?;
            let test = load(&test, format, constant)?;
            println!("{}", nn_baseline(&train, &test, side.into())?);
        }
        Command::Generate { width, height, arch, output } => {
            let cfg = arch_config(width, height, &arch);
            let spn = generate_image_spn(&cfg, &LeafParams::spread(width * height, cfg.k_components))?;
            ModelFile::image(width, height, spn).save(&output)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
