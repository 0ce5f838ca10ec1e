use std::net::IpAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "evsim",
    version,
    about = "EV charging network simulation and usage prediction"
)]
pub struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// TOML pipeline configuration.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate random parking-lot layouts.
    GenLots(GenLots),
    /// Generate arrival schedules.
    GenSchedules(GenSchedules),
    /// Park one schedule's vehicles in a lot.
    Simulate(Simulate),
    /// Schedule charging and compute per-EVSE statistics.
    Charge(Charge),
    /// Encode each EVSE's neighbourhood with its statistics.
    Featurize(Featurize),
    /// Build train/validation datasets end to end.
    Dataset(Dataset),
    /// Train one model.
    Train(Train),
    /// Train several built-in models on a dataset directory.
    Experiment(Experiment),
    /// Report a model's error on a dataset.
    Eval(Eval),
    /// Predict per-EVSE statistics for a lot.
    Predict(Predict),
    /// Run the prediction HTTP service.
    Serve(Serve),
}

#[derive(Debug, Args)]
pub struct GenLots {
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub evses: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Keep layouts even if no EVSE is reachable.
    #[arg(long)]
    pub allow_unreachable: bool,
}

#[derive(Debug, Args)]
pub struct GenSchedules {
    #[arg(long)]
    pub evs: Option<usize>,
    #[arg(long)]
    pub cars: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct Simulate {
    #[arg(long)]
    pub lot: PathBuf,
    #[arg(long)]
    pub schedule: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Charge {
    #[arg(long)]
    pub lot: PathBuf,
    #[arg(long)]
    pub schedule: PathBuf,
    #[arg(long)]
    pub placement: PathBuf,
    /// Network capacity in kW (unbounded if omitted).
    #[arg(long)]
    pub capacity: Option<f64>,
    /// Charging algorithm.
    #[arg(long)]
    pub scheduler: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the per-slot rate matrix.
    #[arg(long)]
    pub profile_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Featurize {
    #[arg(long)]
    pub lot: PathBuf,
    #[arg(long)]
    pub stats: PathBuf,
    #[arg(long)]
    pub m: Option<usize>,
    /// Append the door-distance term.
    #[arg(long)]
    pub door_distance: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Dataset {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub train_layouts: Option<usize>,
    #[arg(long)]
    pub val_layouts: Option<usize>,
    #[arg(long)]
    pub schedules: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Train {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub val_data: Option<PathBuf>,
    #[arg(long)]
    pub model_id: u8,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub out_model: PathBuf,
    #[arg(long)]
    pub history_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Experiment {
    /// Directory written by `dataset`.
    #[arg(long)]
    pub data_dir: PathBuf,
    /// Comma-separated model ids.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub models: Vec<u8>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct Eval {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct Predict {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub lot: PathBuf,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Serve {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: IpAddr,
}
