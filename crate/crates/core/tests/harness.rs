use brwlab::harness::{run, ExperimentConfig, RunManifest, Stage, Suite};
use brwlab::Error;

fn smoke() -> ExperimentConfig {
    ExperimentConfig::from_json(include_str!("../../../configs/smoke.json")).unwrap()
}

#[test]
fn shipped_configs_parse() {
    let d = ExperimentConfig::from_json(include_str!("../../../configs/default.json")).unwrap();
    assert_eq!(d, ExperimentConfig::default());
    assert!(smoke().problems().is_empty());
}

#[test]
fn zero_replicas_fail_before_any_work() {
    let cfg = ExperimentConfig {
        replicas: vec![0, 10],
        ..smoke()
    };
    match Suite::new(cfg, 1) {
        Err(Error::Config(msg)) => assert!(msg.contains("replicas"), "{msg}"),
        other => panic!("expected a config error, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn runs_are_byte_identical_and_tagged() {
    let stages = [Stage::Simulate, Stage::Tail, Stage::Rw, Stage::ManyToOne];
    let a = run(&Suite::new(smoke(), 1).unwrap(), &stages, false).unwrap();
    let b = run(&Suite::new(smoke(), 3).unwrap(), &stages, false).unwrap();
    assert_eq!(a.files, b.files);
    assert_eq!(a.manifest, b.manifest);
    let hash = &a.manifest.manifest_hash;
    for f in &a.files {
        assert!(f.contents.contains(&format!("{hash}")), "{}", f.name);
        if f.name.ends_with(".csv") {
            assert!(f.contents.starts_with(&format!("# manifest={hash}\n")));
        }
    }
    let names: Vec<&str> = a.files.iter().map(|f| f.name.as_str()).collect();
    for expected in ["simulate_n6.csv", "simulate_n10.csv", "tail_n10.json", "renewal.csv", "big_jump.csv", "many_to_one.json"] {
        assert!(names.contains(&expected), "{names:?}");
    }
}

#[test]
fn output_directory_is_keyed_by_manifest_hash() {
    let suite = Suite::new(smoke(), 1).unwrap();
    let out = run(&suite, &[Stage::Simulate], false).unwrap();
    let root = std::env::temp_dir().join(format!("brwlab-harness-{}", std::process::id()));
    let dir = out.write(&root).unwrap();
    assert_eq!(dir, root.join(&out.manifest.manifest_hash));
    for f in ["manifest.json", "timing.json", "simulate_n6.csv", "simulate_summary.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let manifest: RunManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest, out.manifest);
    assert!(manifest.task_seeds.contains_key("trees_n10"));
    std::fs::remove_dir_all(&root).unwrap();
}

#[test]
fn changing_the_seed_changes_hash_and_data() {
    let a = smoke();
    let b = ExperimentConfig { root_seed: a.root_seed + 1, ..a.clone() };
    let ha = RunManifest::new(&a).manifest_hash;
    let hb = RunManifest::new(&b).manifest_hash;
    assert_ne!(ha, hb);
    let fa = run(&Suite::new(a, 1).unwrap(), &[Stage::Simulate], false).unwrap();
    let fb = run(&Suite::new(b, 1).unwrap(), &[Stage::Simulate], false).unwrap();
    let body = |s: &str| s.split_once('\n').unwrap().1.to_string();
    assert_ne!(body(&fa.files[0].contents), body(&fb.files[0].contents));
}
