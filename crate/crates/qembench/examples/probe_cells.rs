//! Run a filtered subset of the standard acceptance grid (by mitigation kind
//! and levels) into a store the full suite can resume from.
use qem_core::data::{load_iris, prepare};
use qem_core::mitigation::MitigationPlan;
use qembench::config::BenchConfig;
use qembench::grid::expand_grid;
use qembench::records::load_records;
use qembench::runner::run_grid;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let out = std::path::PathBuf::from(&args[1]);
    let mitigation = args[2].clone();
    let levels: Vec<f64> = args[3].split(',').map(|s| s.parse().unwrap()).collect();
    let config = BenchConfig {
        noise_levels: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0],
        mitigations: vec![
            MitigationPlan::None,
            MitigationPlan::zne_default(),
            MitigationPlan::ddd_default(),
            MitigationPlan::lre_default(),
        ],
        ..BenchConfig::default()
    };
    let dataset = load_iris(&config.dataset).unwrap();
    let split = prepare(&dataset, config.base_seed, config.reduction);
    let runs: Vec<_> = expand_grid(&config)
        .into_iter()
        .filter(|r| r.mitigation.kind_str() == mitigation && levels.contains(&r.p))
        .collect();
    let existing = load_records(&out).unwrap();
    let (records, _) = run_grid(&runs, &config, &split, &out, 2, existing).unwrap();
    for r in qembench::records::sorted(records) {
        if let Some(acc) = r.final_val_acc {
            println!("{} rep{} seed{} val={:.4}", r.config_id, r.repetition, r.seed, acc);
        }
    }
}
