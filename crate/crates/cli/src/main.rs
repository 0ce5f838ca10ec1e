mod args;
mod commands;

use anyhow::Result;
use clap::Parser;

use args::{Cli, Command};

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let cfg = commands::load_config(cli.config.as_deref(), cli.seed)?;
    match &cli.command {
        Command::GenLots(a) => commands::gen_lots(&cfg, a),
        Command::GenSchedules(a) => commands::gen_schedules(&cfg, a),
        Command::Simulate(a) => commands::simulate(&cfg, a),
        Command::Charge(a) => commands::charge(&cfg, a),
        Command::Featurize(a) => commands::featurize(&cfg, a),
        Command::Dataset(a) => commands::dataset(&cfg, a, cli.jobs),
        Command::Train(a) => commands::train_one(&cfg, a),
        Command::Experiment(a) => commands::experiment(&cfg, a),
        Command::Eval(a) => commands::eval(a),
        Command::Predict(a) => commands::predict(a),
        Command::Serve(a) => commands::serve(a),
    }
}
