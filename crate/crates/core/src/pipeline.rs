//! End-to-end dataset generation and model experiments.
//!
//! Every stage draws its seed from the master seed through
//! [`derive_seed`](crate::seeds::derive_seed) with a stage name and index, so
//! any layout or schedule can be regenerated on its own.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charge::{compute_stats, sessions_from_placement, ChargeConfig, SchedulerRegistry};
use crate::error::{Error, Result};
use crate::featurize::{extract_all, FeatureConfig};
use crate::layout::{Cell, Layout};
use crate::lotgen::{generate_reachable_counted, LotGenConfig};
use crate::mlp::{evaluate, save_model, train, Evaluation, History, ModelConfig, Sample};
use crate::parking::{simulate_parking, ParkingRules};
use crate::schedule_gen::{generate_schedule, ScheduleGenConfig};
use crate::seeds::{derive_seed, SEED_RULE};
use crate::stats::EvseStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub log_epsilon: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            epochs: 200,
            batch_size: 32,
            learning_rate: 1e-3,
            log_epsilon: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub n_train_layouts: usize,
    pub n_val_layouts: usize,
    pub schedules_per_layout: usize,
    pub seed: u64,
    /// Registered charging algorithm name.
    pub scheduler: String,
    pub lot: LotGenConfig,
    pub schedule: ScheduleGenConfig,
    pub parking: ParkingRules,
    pub charge: ChargeConfig,
    pub features: FeatureConfig,
    pub train: TrainSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n_train_layouts: 1215,
            n_val_layouts: 141,
            schedules_per_layout: 20,
            seed: 0,
            scheduler: "olp".into(),
            lot: LotGenConfig::default(),
            schedule: ScheduleGenConfig::default(),
            parking: ParkingRules::default(),
            charge: ChargeConfig::default(),
            features: FeatureConfig::default(),
            train: TrainSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Toml(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Toml(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_train_layouts == 0 || self.n_val_layouts == 0 || self.schedules_per_layout == 0 {
            return Err(Error::InvalidConfig(
                "layout and schedule counts must be positive".into(),
            ));
        }
        self.lot.validate()?;
        self.schedule.validate()?;
        self.parking.validate()?;
        self.charge.validate()?;
        self.features.validate()?;
        SchedulerRegistry::default().get(&self.scheduler)?;
        Ok(())
    }

    /// Model configuration for a built-in id, with this pipeline's window,
    /// training settings, and a derived seed.
    pub fn model_config(&self, model_id: u8) -> Result<ModelConfig> {
        let base = ModelConfig::preset(model_id, self.features.m)?;
        Ok(ModelConfig {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            learning_rate: self.train.learning_rate,
            log_epsilon: self.train.log_epsilon,
            seed: derive_seed(self.seed, "model", model_id as u64),
            ..base
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
        }
    }
}

/// Seeds used for one layout; enough to regenerate it stage by stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutSeeds {
    pub lot_seed: u64,
    pub schedule_seeds: Vec<u64>,
    pub parking_seeds: Vec<u64>,
}

impl LayoutSeeds {
    pub fn derive(master: u64, split: Split, index: usize, schedules: usize) -> Self {
        let stage = |s: &str| format!("{s}-{}", split.name());
        let idx = |k: usize| (index * schedules + k) as u64;
        LayoutSeeds {
            lot_seed: derive_seed(master, &stage("lot"), index as u64),
            schedule_seeds: (0..schedules)
                .map(|k| derive_seed(master, &stage("schedule"), idx(k)))
                .collect(),
            parking_seeds: (0..schedules)
                .map(|k| derive_seed(master, &stage("parking"), idx(k)))
                .collect(),
        }
    }
}

/// Everything simulated for one layout.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutRun {
    pub layout: Layout,
    pub regenerations: u64,
    /// Stats per schedule, each in row-major EVSE order.
    pub per_schedule: Vec<Vec<EvseStats>>,
    /// Per-EVSE mean over schedules.
    pub averaged: Vec<EvseStats>,
}

/// Simulates and schedules one layout over every schedule seed.
pub fn simulate_layout(config: &PipelineConfig, seeds: &LayoutSeeds) -> Result<LayoutRun> {
    let scheduler = SchedulerRegistry::default().get(&config.scheduler)?;
    let (layout, regenerations) = generate_reachable_counted(&LotGenConfig {
        seed: seeds.lot_seed,
        ..config.lot.clone()
    })?;
    let evses = layout.evses();
    let mut per_schedule = Vec::with_capacity(seeds.schedule_seeds.len());
    for (&sched_seed, &park_seed) in seeds.schedule_seeds.iter().zip(&seeds.parking_seeds) {
        let schedule = generate_schedule(&ScheduleGenConfig {
            seed: sched_seed,
            horizon: config.charge.horizon,
            ..config.schedule.clone()
        })?;
        let placement = simulate_parking(&layout, &schedule, &config.parking, park_seed)?;
        let sessions = sessions_from_placement(&layout, &schedule, &placement, &config.charge)?;
        let profile = scheduler.schedule(&evses, &sessions, &config.charge)?;
        per_schedule.push(compute_stats(&profile, &sessions, &config.charge));
    }
    let averaged = average_stats(&per_schedule);
    Ok(LayoutRun {
        layout,
        regenerations,
        per_schedule,
        averaged,
    })
}

/// Element-wise mean of per-schedule stats that share an EVSE order.
pub fn average_stats(per_schedule: &[Vec<EvseStats>]) -> Vec<EvseStats> {
    let Some(first) = per_schedule.first() else {
        return Vec::new();
    };
    let n = per_schedule.len() as f64;
    first
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let (tau, p_tot) = per_schedule
                .iter()
                .fold((0.0, 0.0), |(t, p), run| (t + run[k].tau, p + run[k].p_tot));
            EvseStats {
                row: s.row,
                col: s.col,
                tau: tau / n,
                p_tot: p_tot / n,
            }
        })
        .collect()
}

/// One dataset CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub lot_id: usize,
    pub row: usize,
    pub col: usize,
    pub features: Vec<f64>,
    pub tau: f64,
    pub p_tot: f64,
}

impl DatasetRow {
    pub fn cell(&self) -> Cell {
        (self.row, self.col)
    }
}

/// Feature layout stored in dataset files: the window one-hot encoding plus
/// the raw door distance as the last column.
pub fn dataset_features(features: &FeatureConfig) -> FeatureConfig {
    FeatureConfig {
        m: features.m,
        include_door_distance: true,
        normalize_distance: false,
    }
}

pub fn dataset_rows(
    lot_id: usize,
    run: &LayoutRun,
    features: &FeatureConfig,
) -> Result<Vec<DatasetRow>> {
    let encoded = extract_all(&run.layout, &dataset_features(features))?;
    Ok(encoded
        .into_iter()
        .zip(&run.averaged)
        .map(|((cell, f), s)| {
            debug_assert_eq!(cell, (s.row, s.col));
            DatasetRow {
                lot_id,
                row: cell.0,
                col: cell.1,
                features: f,
                tau: s.tau,
                p_tot: s.p_tot,
            }
        })
        .collect())
}

pub fn write_dataset_csv<W: Write>(rows: &[DatasetRow], n_features: usize, w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    write!(w, "lot_id,row,col")?;
    for k in 0..n_features {
        write!(w, ",f_{k}")?;
    }
    writeln!(w, ",tau_kw,p_tot_kwh")?;
    for r in rows {
        write!(w, "{},{},{}", r.lot_id, r.row, r.col)?;
        for v in &r.features {
            write!(w, ",{v}")?;
        }
        writeln!(w, ",{},{}", r.tau, r.p_tot)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset_csv(path: impl AsRef<Path>) -> Result<Vec<DatasetRow>> {
    let path = path.as_ref();
    let bad =
        |line: usize, msg: &str| Error::InvalidConfig(format!("{}:{line}: {msg}", path.display()));
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty dataset"))??;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 5
        || cols[..3] != ["lot_id", "row", "col"]
        || cols[cols.len() - 2..] != ["tau_kw", "p_tot_kwh"]
    {
        return Err(bad(1, "unexpected header"));
    }
    let n_features = cols.len() - 5;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(bad(i + 2, "wrong field count"));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(i + 2, "bad integer"));
        let float = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 2, "bad number"));
        rows.push(DatasetRow {
            lot_id: int(fields[0])?,
            row: int(fields[1])?,
            col: int(fields[2])?,
            features: fields[3..3 + n_features]
                .iter()
                .map(|s| float(s))
                .collect::<Result<_>>()?,
            tau: float(fields[3 + n_features])?,
            p_tot: float(fields[4 + n_features])?,
        });
    }
    Ok(rows)
}

/// Window side and distance-column presence implied by a feature count, if
/// it matches `m * m * 5` or `m * m * 5 + 1` for some odd `m`.
pub fn infer_window(n_features: usize) -> Option<(usize, bool)> {
    let window_of = |n: usize| {
        if n == 0 || !n.is_multiple_of(crate::featurize::CHANNELS) {
            return None;
        }
        let cells = n / crate::featurize::CHANNELS;
        let m = (cells as f64).sqrt().round() as usize;
        (m * m == cells && m % 2 == 1).then_some(m)
    };
    window_of(n_features)
        .map(|m| (m, false))
        .or_else(|| window_of(n_features.checked_sub(1)?).map(|m| (m, true)))
}

/// Adapts dataset rows to a model's feature layout. Rows hold the window
/// encoding, optionally followed by the raw door distance.
pub fn to_samples(rows: &[DatasetRow], features: &FeatureConfig) -> Result<Vec<Sample>> {
    let window = features.m * features.m * crate::featurize::CHANNELS;
    rows.iter()
        .map(|r| {
            let has_distance = r.features.len() == window + 1;
            if r.features.len() != window && !has_distance {
                return Err(Error::Dimension {
                    expected: window + 1,
                    got: r.features.len(),
                });
            }
            let mut f = r.features[..window].to_vec();
            if features.include_door_distance {
                if !has_distance {
                    return Err(Error::InvalidConfig(
                        "model needs a door-distance column the data does not have".into(),
                    ));
                }
                if features.normalize_distance {
                    return Err(Error::InvalidConfig(
                        "normalized distance needs the layout; re-featurize from lot files".into(),
                    ));
                }
                f.push(r.features[window]);
            }
            Ok(Sample {
                features: f,
                targets: [r.tau, r.p_tot],
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestLayout {
    pub split: Split,
    pub index: usize,
    pub regenerations: u64,
    pub seeds: LayoutSeeds,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: PipelineConfig,
    pub seed_rule: String,
    pub features: FeatureConfig,
    pub train_rows: usize,
    pub val_rows: usize,
    pub layouts: Vec<ManifestLayout>,
}

#[derive(Debug, Clone)]
pub struct DatasetOutput {
    pub train: Vec<DatasetRow>,
    pub val: Vec<DatasetRow>,
    pub manifest: Manifest,
}

pub const TRAIN_FILE: &str = "train.csv";
pub const VAL_FILE: &str = "val.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

fn run_split(
    config: &PipelineConfig,
    split: Split,
    count: usize,
) -> Result<Vec<(LayoutSeeds, LayoutRun)>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let seeds = LayoutSeeds::derive(config.seed, split, i, config.schedules_per_layout);
            simulate_layout(config, &seeds).map(|run| (seeds, run))
        })
        .collect()
}

/// Simulates every layout in memory. `jobs = 0` uses all cores.
pub fn build_dataset(
    config: &PipelineConfig,
    jobs: usize,
) -> Result<(DatasetOutput, Vec<LayoutRun>)> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let (train_runs, val_runs) = pool.install(|| -> Result<_> {
        Ok((
            run_split(config, Split::Train, config.n_train_layouts)?,
            run_split(config, Split::Val, config.n_val_layouts)?,
        ))
    })?;

    let mut layouts = Vec::new();
    let mut runs = Vec::new();
    let mut rows = [Vec::new(), Vec::new()];
    for (split, split_runs) in [(Split::Train, train_runs), (Split::Val, val_runs)] {
        let out = &mut rows[split as usize];
        for (index, (seeds, run)) in split_runs.into_iter().enumerate() {
            out.extend(dataset_rows(index, &run, &config.features)?);
            layouts.push(ManifestLayout {
                split,
                index,
                regenerations: run.regenerations,
                seeds,
            });
            runs.push(run);
        }
    }
    let [train, val] = rows;
    let manifest = Manifest {
        config: config.clone(),
        seed_rule: SEED_RULE.into(),
        features: dataset_features(&config.features),
        train_rows: train.len(),
        val_rows: val.len(),
        layouts,
    };
    Ok((
        DatasetOutput {
            train,
            val,
            manifest,
        },
        runs,
    ))
}

/// Generates the dataset and writes `train.csv`, `val.csv`, `manifest.json`
/// and every layout under `lots/`.
pub fn run_dataset(
    config: &PipelineConfig,
    out_dir: impl AsRef<Path>,
    jobs: usize,
) -> Result<DatasetOutput> {
    let out_dir = out_dir.as_ref();
    let (output, runs) = build_dataset(config, jobs)?;
    let lots = out_dir.join("lots");
    fs::create_dir_all(&lots)?;
    for (entry, run) in output.manifest.layouts.iter().zip(&runs) {
        fs::write(
            lots.join(format!("{}_{}.txt", entry.split.name(), entry.index)),
            run.layout.to_text(),
        )?;
    }
    let n_features = dataset_features(&config.features).len();
    write_dataset_csv(
        &output.train,
        n_features,
        File::create(out_dir.join(TRAIN_FILE))?,
    )?;
    write_dataset_csv(
        &output.val,
        n_features,
        File::create(out_dir.join(VAL_FILE))?,
    )?;
    fs::write(
        out_dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&output.manifest)?,
    )?;
    Ok(output)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub model_id: u8,
    pub model_path: PathBuf,
    pub history_path: PathBuf,
    pub train: Evaluation,
    pub validation: Evaluation,
}

/// Trains each requested model on `dataset_dir/train.csv`, tracking
/// `val.csv` every epoch; writes `model_{id}.json` and `history_{id}.csv`.
pub fn run_experiment(
    config: &PipelineConfig,
    dataset_dir: impl AsRef<Path>,
    model_ids: &[u8],
    out_dir: impl AsRef<Path>,
) -> Result<Vec<(ExperimentResult, History)>> {
    if model_ids.is_empty() {
        return Ok(Vec::new());
    }
    let dataset_dir = dataset_dir.as_ref();
    let out_dir = out_dir.as_ref();
    let train_rows = read_dataset_csv(dataset_dir.join(TRAIN_FILE))?;
    let val_rows = read_dataset_csv(dataset_dir.join(VAL_FILE))?;
    fs::create_dir_all(out_dir)?;
    let mut results = Vec::new();
    for &id in model_ids {
        let model_config = config.model_config(id)?;
        let train_set = to_samples(&train_rows, &model_config.features)?;
        let val_set = to_samples(&val_rows, &model_config.features)?;
        let (model, history) = train(&train_set, Some(&val_set), &model_config)?;
        let model_path = out_dir.join(format!("model_{id}.json"));
        let history_path = out_dir.join(format!("history_{id}.csv"));
        save_model(&model, &model_path)?;
        history.write_csv(File::create(&history_path)?)?;
        results.push((
            ExperimentResult {
                model_id: id,
                model_path,
                history_path,
                train: evaluate(&model, &train_set)?,
                validation: evaluate(&model, &val_set)?,
            },
            history,
        ));
    }
    Ok(results)
}
