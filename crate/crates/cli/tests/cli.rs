use std::path::Path;
use std::process::Command;

fn evsim(dir: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_evsim"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "evsim {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn stage_by_stage_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    evsim(
        d,
        &[
            "--seed",
            "3",
            "gen-lots",
            "--height",
            "12",
            "--width",
            "14",
            "--evses",
            "6",
            "--count",
            "2",
            "--out-dir",
            "lots",
        ],
    );
    let lot = std::fs::read_to_string(d.join("lots/lot_1.txt")).unwrap();
    assert_eq!(lot.lines().count(), 12);
    assert_eq!(lot.matches('E').count(), 6);

    evsim(
        d,
        &[
            "--seed",
            "3",
            "gen-schedules",
            "--evs",
            "20",
            "--cars",
            "30",
            "--count",
            "1",
            "--out-dir",
            "sched",
        ],
    );
    let sched = std::fs::read_to_string(d.join("sched/schedule_0.csv")).unwrap();
    assert!(sched.starts_with("id,kind,arrival_min,departure_min,energy_kwh,peak_rate_kw\n"));
    assert_eq!(sched.lines().count(), 51);

    evsim(
        d,
        &[
            "--seed",
            "1",
            "simulate",
            "--lot",
            "lots/lot_0.txt",
            "--schedule",
            "sched/schedule_0.csv",
            "--out",
            "placement.csv",
        ],
    );
    assert!(std::fs::read_to_string(d.join("placement.csv"))
        .unwrap()
        .starts_with("ev_id,row,col\n"));

    evsim(
        d,
        &[
            "charge",
            "--lot",
            "lots/lot_0.txt",
            "--schedule",
            "sched/schedule_0.csv",
            "--placement",
            "placement.csv",
            "--capacity",
            "20",
            "--out",
            "stats.csv",
            "--profile-out",
            "profile.csv",
        ],
    );
    let stats = std::fs::read_to_string(d.join("stats.csv")).unwrap();
    assert!(stats.starts_with("row,col,tau_kw,p_tot_kwh\n"));
    assert_eq!(stats.lines().count(), 7);
    let profile = std::fs::read_to_string(d.join("profile.csv")).unwrap();
    assert_eq!(profile.lines().next().unwrap().split(',').count(), 2 + 144);

    evsim(
        d,
        &[
            "featurize",
            "--lot",
            "lots/lot_0.txt",
            "--stats",
            "stats.csv",
            "--m",
            "5",
            "--door-distance",
            "--out",
            "feat.csv",
        ],
    );
    let feat = std::fs::read_to_string(d.join("feat.csv")).unwrap();
    assert_eq!(feat.lines().next().unwrap().split(',').count(), 3 + 126 + 2);

    evsim(
        d,
        &[
            "train",
            "--data",
            "feat.csv",
            "--val-data",
            "feat.csv",
            "--model-id",
            "4",
            "--epochs",
            "5",
            "--out-model",
            "m4.json",
            "--history-out",
            "h4.csv",
        ],
    );
    assert_eq!(
        std::fs::read_to_string(d.join("h4.csv"))
            .unwrap()
            .lines()
            .count(),
        6
    );
    let report = evsim(d, &["eval", "--model", "m4.json", "--data", "feat.csv"]);
    assert!(report.contains("transformed mse") && report.contains("physical mse"));

    let json = evsim(
        d,
        &["predict", "--model", "m4.json", "--lot", "lots/lot_0.txt"],
    );
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["model_id"], 4);
    assert_eq!(v["m"], 5);
    assert_eq!(v["evses"].as_array().unwrap().len(), 6);
}

#[test]
fn dataset_and_experiment_with_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("pipeline.toml"),
        "n_train_layouts = 4\nn_val_layouts = 2\nschedules_per_layout = 2\n\
         [lot]\nheight = 10\nwidth = 10\nn_evses = 3\n\
         [features]\nm = 3\n\
         [train]\nepochs = 2\n",
    )
    .unwrap();
    evsim(
        d,
        &[
            "--config",
            "pipeline.toml",
            "--seed",
            "8",
            "--jobs",
            "2",
            "dataset",
            "--out-dir",
            "data",
        ],
    );
    let train = std::fs::read_to_string(d.join("data/train.csv")).unwrap();
    assert_eq!(train.lines().count(), 1 + 4 * 3);
    let out = evsim(
        d,
        &[
            "--config",
            "pipeline.toml",
            "experiment",
            "--data-dir",
            "data",
            "--models",
            "2,5",
            "--out-dir",
            "models",
        ],
    );
    assert_eq!(out.lines().count(), 2);
    assert!(d.join("models/model_5.json").exists());
    assert_eq!(
        std::fs::read_to_string(d.join("models/history_2.csv"))
            .unwrap()
            .lines()
            .count(),
        3
    );
}

#[test]
fn bad_input_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.txt"), "PPP\nPDP\nPPP\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_evsim"))
        .current_dir(tmp.path())
        .args([
            "simulate",
            "--lot",
            "bad.txt",
            "--schedule",
            "none.csv",
            "--out",
            "p.csv",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("door not on boundary"));
}
