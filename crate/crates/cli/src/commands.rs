use std::collections::HashMap;
use std::fs::{self, File};
use std::net::SocketAddr;
use std::path::Path;

use anyhow::{bail, Context, Result};
use evsim::charge::{compute_stats, sessions_from_placement, SchedulerRegistry};
use evsim::featurize::{extract_all, FeatureConfig};
use evsim::lotgen::{generate_layout, generate_layout_with_reachability};
use evsim::mlp::{evaluate, load_model, save_model, train, ModelConfig};
use evsim::parking::simulate_parking;
use evsim::pipeline::{
    infer_window, read_dataset_csv, run_dataset, run_experiment, to_samples, write_dataset_csv,
    DatasetRow, PipelineConfig,
};
use evsim::placement::Placement;
use evsim::predict::predict_layout;
use evsim::schedule::Schedule;
use evsim::schedule_gen::generate_schedule;
use evsim::seeds::derive_seed;
use evsim::stats::{read_stats_csv, write_stats_csv};
use evsim::Layout;

use crate::args::*;

pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<PipelineConfig> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            PipelineConfig::from_toml(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    Ok(config)
}

fn read_layout(path: &Path) -> Result<Layout> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.parse()
        .with_context(|| format!("parsing {}", path.display()))
}

fn read_schedule(path: &Path, horizon: f64) -> Result<Schedule> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Schedule::read_csv(f, horizon).with_context(|| format!("parsing {}", path.display()))
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

pub fn gen_lots(cfg: &PipelineConfig, a: &GenLots) -> Result<()> {
    let mut lot = cfg.lot.clone();
    lot.height = a.height.unwrap_or(lot.height);
    lot.width = a.width.unwrap_or(lot.width);
    lot.n_evses = a.evses.unwrap_or(lot.n_evses);
    fs::create_dir_all(&a.out_dir)?;
    for i in 0..a.count {
        lot.seed = derive_seed(cfg.seed, "lot", i as u64);
        let layout = if a.allow_unreachable {
            generate_layout(&lot)?
        } else {
            generate_layout_with_reachability(&lot)?
        };
        fs::write(a.out_dir.join(format!("lot_{i}.txt")), layout.to_text())?;
    }
    Ok(())
}

pub fn gen_schedules(cfg: &PipelineConfig, a: &GenSchedules) -> Result<()> {
    let mut sc = cfg.schedule.clone();
    sc.n_evs = a.evs.unwrap_or(sc.n_evs);
    sc.n_cars = a.cars.unwrap_or(sc.n_cars);
    sc.horizon = cfg.charge.horizon;
    fs::create_dir_all(&a.out_dir)?;
    for i in 0..a.count {
        sc.seed = derive_seed(cfg.seed, "schedule", i as u64);
        let schedule = generate_schedule(&sc)?;
        schedule.write_csv(create(&a.out_dir.join(format!("schedule_{i}.csv")))?)?;
    }
    Ok(())
}

pub fn simulate(cfg: &PipelineConfig, a: &Simulate) -> Result<()> {
    let layout = read_layout(&a.lot)?;
    let schedule = read_schedule(&a.schedule, cfg.charge.horizon)?;
    let placement = simulate_parking(&layout, &schedule, &cfg.parking, cfg.seed)?;
    eprintln!(
        "parked {} of {} vehicles",
        placement.assignments.len(),
        schedule.len()
    );
    placement.ev_only(&schedule).write_csv(create(&a.out)?)?;
    Ok(())
}

pub fn charge(cfg: &PipelineConfig, a: &Charge) -> Result<()> {
    let layout = read_layout(&a.lot)?;
    let mut config = cfg.charge.clone();
    if a.capacity.is_some() {
        config.network_capacity = a.capacity;
    }
    let schedule = read_schedule(&a.schedule, config.horizon)?;
    let f =
        File::open(&a.placement).with_context(|| format!("opening {}", a.placement.display()))?;
    let placement = Placement::read_csv(f)?;
    let sessions = sessions_from_placement(&layout, &schedule, &placement, &config)?;
    let name = a.scheduler.as_deref().unwrap_or(&cfg.scheduler);
    let profile =
        SchedulerRegistry::default()
            .get(name)?
            .schedule(&layout.evses(), &sessions, &config)?;
    write_stats_csv(
        &compute_stats(&profile, &sessions, &config),
        create(&a.out)?,
    )?;
    if let Some(p) = &a.profile_out {
        profile.write_csv(create(p)?)?;
    }
    Ok(())
}

pub fn featurize(cfg: &PipelineConfig, a: &Featurize) -> Result<()> {
    let layout = read_layout(&a.lot)?;
    let f = File::open(&a.stats).with_context(|| format!("opening {}", a.stats.display()))?;
    let stats: HashMap<_, _> = read_stats_csv(f)?
        .into_iter()
        .map(|s| ((s.row, s.col), s))
        .collect();
    let features = FeatureConfig {
        m: a.m.unwrap_or(cfg.features.m),
        include_door_distance: a.door_distance,
        normalize_distance: false,
    };
    let rows = extract_all(&layout, &features)?
        .into_iter()
        .map(|(cell, f)| {
            let s = stats
                .get(&cell)
                .with_context(|| format!("no statistics for EVSE {cell:?}"))?;
            Ok(DatasetRow {
                lot_id: 0,
                row: cell.0,
                col: cell.1,
                features: f,
                tau: s.tau,
                p_tot: s.p_tot,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_dataset_csv(&rows, features.len(), create(&a.out)?)?;
    Ok(())
}

pub fn dataset(cfg: &PipelineConfig, a: &Dataset, jobs: usize) -> Result<()> {
    let mut cfg = cfg.clone();
    cfg.n_train_layouts = a.train_layouts.unwrap_or(cfg.n_train_layouts);
    cfg.n_val_layouts = a.val_layouts.unwrap_or(cfg.n_val_layouts);
    cfg.schedules_per_layout = a.schedules.unwrap_or(cfg.schedules_per_layout);
    fs::create_dir_all(&a.out_dir)?;
    let out = run_dataset(&cfg, &a.out_dir, jobs)?;
    eprintln!(
        "wrote {} training and {} validation rows to {}",
        out.train.len(),
        out.val.len(),
        a.out_dir.display()
    );
    Ok(())
}

/// Model configuration for `id`, with the window size taken from the data.
fn model_config_for(cfg: &PipelineConfig, id: u8, rows: &[DatasetRow]) -> Result<ModelConfig> {
    let n = rows.first().context("empty dataset")?.features.len();
    let (m, _) =
        infer_window(n).with_context(|| format!("{n} feature columns is not a window encoding"))?;
    let mut c = cfg.model_config(id)?;
    c.features.m = m;
    Ok(c)
}

pub fn train_one(cfg: &PipelineConfig, a: &Train) -> Result<()> {
    let rows = read_dataset_csv(&a.data)?;
    let mut config = model_config_for(cfg, a.model_id, &rows)?;
    if let Some(e) = a.epochs {
        config.epochs = e;
    }
    let train_set = to_samples(&rows, &config.features)?;
    let val_set = match &a.val_data {
        Some(p) => Some(to_samples(&read_dataset_csv(p)?, &config.features)?),
        None => None,
    };
    let (model, history) = train(&train_set, val_set.as_deref(), &config)?;
    save_model(&model, &a.out_model)?;
    if let Some(p) = &a.history_out {
        history.write_csv(create(p)?)?;
    }
    if let Some(last) = history.last() {
        eprint!("epoch {}: train mse {:.6}", last.epoch, last.train.mean());
        if let Some(v) = last.validation {
            eprint!(", validation mse {:.6}", v.mean());
        }
        eprintln!();
    }
    Ok(())
}

pub fn experiment(cfg: &PipelineConfig, a: &Experiment) -> Result<()> {
    let mut cfg = cfg.clone();
    let rows = read_dataset_csv(a.data_dir.join(evsim::pipeline::TRAIN_FILE))?;
    let n = rows.first().context("empty dataset")?.features.len();
    cfg.features.m = infer_window(n).context("unrecognised feature width")?.0;
    for (r, _) in run_experiment(&cfg, &a.data_dir, &a.models, &a.out_dir)? {
        println!(
            "model {}: train mse {:.6}, validation mse {:.6}",
            r.model_id,
            r.train.transformed.mean(),
            r.validation.transformed.mean()
        );
    }
    Ok(())
}

pub fn eval(a: &Eval) -> Result<()> {
    let model = load_model(&a.model)?;
    let samples = to_samples(&read_dataset_csv(&a.data)?, &model.config.features)?;
    let e = evaluate(&model, &samples)?;
    println!("rows: {}", e.rows);
    println!(
        "transformed mse: tau {:.6}, p_tot {:.6}, mean {:.6}",
        e.transformed.tau,
        e.transformed.p_tot,
        e.transformed.mean()
    );
    println!(
        "physical mse: tau {:.6} kW^2, p_tot {:.6} kWh^2",
        e.physical.tau, e.physical.p_tot
    );
    Ok(())
}

/// JSON body identical to the service's `POST /api/predict` response.
pub fn predict_json(model_path: &Path, lot: &Path) -> Result<String> {
    let model = load_model(model_path)?;
    let layout = read_layout(lot)?;
    Ok(serde_json::to_string(&predict_layout(&model, &layout)?)?)
}

pub fn predict(a: &Predict) -> Result<()> {
    let json = predict_json(&a.model, &a.lot)?;
    match &a.out {
        Some(p) => fs::write(p, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

pub fn serve(a: &Serve) -> Result<()> {
    if !a.model.exists() {
        bail!("model file {} not found", a.model.display());
    }
    let addr = SocketAddr::new(a.bind, a.port);
    tokio::runtime::Runtime::new()?.block_on(evsim_service::serve(addr, a.model.clone()))?;
    Ok(())
}
