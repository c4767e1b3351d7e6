use coarse_lab::experiment::{seeded_configs, sweep, write_csv, ExperimentConfig};
use coarse_lab::gen::{gen_space, SpaceKind};
use coarse_lab::json::LfcmDoc;

fn outputs(threads: usize) -> (String, Vec<u8>) {
    let mut base = ExperimentConfig::new(SpaceKind::RandomGeometric, 60, 2, 1, 77);
    base.delta = 0.15;
    let results = sweep(&seeded_configs(&base, 8), Some(threads), false).unwrap();
    let mut csv = Vec::new();
    write_csv(&mut csv, &results).unwrap();
    (serde_json::to_string(&results).unwrap(), csv)
}

#[test]
fn sweep_output_is_independent_of_thread_count() {
    let one = outputs(1);
    assert_eq!(one, outputs(4));
    assert_eq!(one, outputs(1));
    assert!(!one.0.contains("wall_time"));
}

#[test]
fn generators_are_seeded() {
    for kind in [SpaceKind::RandomGeometric, SpaceKind::Grid2d, SpaceKind::MultiComponent] {
        let a = serde_json::to_string(&LfcmDoc::from_lfcm(&gen_space(kind, 30, 3, 5).unwrap())).unwrap();
        let b = serde_json::to_string(&LfcmDoc::from_lfcm(&gen_space(kind, 30, 3, 5).unwrap())).unwrap();
        assert_eq!(a, b);
    }
    let a = gen_space(SpaceKind::RandomGeometric, 50, 1, 1).unwrap();
    let b = gen_space(SpaceKind::RandomGeometric, 50, 1, 2).unwrap();
    assert_ne!(a, b);
}

#[test]
fn results_embed_their_config() {
    let cfg = ExperimentConfig::new(SpaceKind::Grid2d, 5, 1, 1, 9);
    let r = coarse_lab::experiment::run_experiment(&cfg, false).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: coarse_lab::experiment::ExperimentResult = serde_json::from_str(&text).unwrap();
    assert_eq!(back.config, cfg);
    assert_eq!(coarse_lab::experiment::run_experiment(&back.config, false).unwrap(), r);
}
