use vqscale::harness::{self, ExperimentConfig, NoiseGrid};
use vqscale::optimizers::{OptimizerSpec, PluginRegistry};
use vqscale::problems::{generate_random_qubo, QuboInstance};
use vqscale::Error;

fn small() -> ExperimentConfig {
    ExperimentConfig {
        n_grid: vec![3],
        noise: NoiseGrid { none: true, sigmas: vec![0.05, 0.5], sigma_logspace: None, shots: vec![64] },
        optimizers: OptimizerSpec::defaults(),
        instances: 3,
        ..Default::default()
    }
}

#[test]
fn records_survive_disk_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    let out = harness::run_sweep(&cfg, &PluginRegistry::new(), Some(2)).unwrap();
    let written = harness::persist_sweep(dir.path(), &cfg, &out).unwrap();
    assert_eq!(written.len(), 4);
    let (t, back) = harness::load_records(&dir.path().join("records.csv")).unwrap();
    assert_eq!(t, out.thresholds);
    assert_eq!(back.len(), out.records.len());
    for (a, b) in back.iter().zip(&out.records) {
        assert_eq!((a.optimizer.as_str(), a.n, a.instance, &a.x), (b.optimizer.as_str(), b.n, b.instance, &b.x));
        assert_eq!(a.final_ar.to_bits(), b.final_ar.to_bits());
        assert_eq!(a.best_loss.to_bits(), b.best_loss.to_bits());
    }
    let timings = std::fs::read_to_string(dir.path().join("timings.csv")).unwrap();
    assert_eq!(timings.lines().count(), out.records.len() + 1);
}

#[test]
fn schema_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    let out = harness::run_sweep(&cfg, &PluginRegistry::new(), None).unwrap();
    let p = dir.path().join("records.csv");
    harness::save_records(&p, &out.records, &out.thresholds).unwrap();
    let text = std::fs::read_to_string(&p).unwrap().replace("vqscale-sweep/1", "vqscale-sweep/9");
    std::fs::write(&p, text).unwrap();
    assert!(matches!(harness::load_records(&p), Err(Error::SchemaVersion { .. })));
}

#[test]
fn config_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    let toml_path = dir.path().join("c.toml");
    std::fs::write(&toml_path, cfg.to_toml_string().unwrap()).unwrap();
    assert_eq!(ExperimentConfig::from_path(&toml_path).unwrap(), cfg);
    let json_path = dir.path().join("c.json");
    std::fs::write(&json_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(ExperimentConfig::from_path(&json_path).unwrap(), cfg);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "master_seed = 1\n\nunknown_key = 3\n").unwrap();
    let msg = ExperimentConfig::from_path(&bad).unwrap_err().to_string();
    assert!(msg.contains("line 3"), "{msg}");
}

#[test]
fn instance_text_round_trip() {
    for n in [1, 5, 9] {
        let q = generate_random_qubo(n, 77).unwrap();
        let back = QuboInstance::from_text(&q.to_text()).unwrap();
        assert_eq!(back, q);
    }
}
