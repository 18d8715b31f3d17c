use dpcdf::config::{ExperimentConfig, MechanismKind};
use dpcdf::experiment::run_experiment;
use dpcdf::ingest::{dataset_from_reader, ingest_dataset, Boundary};
use dpcdf::HarnessError;
use dpcdf_core::tree::DomainInterval;

fn config(trials: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(MechanismKind::Tree, 16, vec![1.0]);
    c.branching = Some(vec![4, 4]);
    c.samples = 100;
    c.trials = trials;
    c.seed = 5;
    c
}

#[test]
fn identical_seeds_give_identical_reports() {
    let a = serde_json::to_string(&run_experiment(&config(500)).unwrap()).unwrap();
    let b = serde_json::to_string(&run_experiment(&config(500)).unwrap()).unwrap();
    assert_eq!(a, b);
    let mut other = config(500);
    other.seed = 6;
    assert_ne!(a, serde_json::to_string(&run_experiment(&other).unwrap()).unwrap());
}

#[test]
fn stderr_shrinks_with_trials() {
    let se: Vec<f64> = [100, 1000, 10_000]
        .iter()
        .map(|&t| run_experiment(&config(t)).unwrap().rows[0].e2_stderr)
        .collect();
    for w in se.windows(2) {
        let ratio = w[0] / w[1];
        let expect = 10f64.sqrt();
        assert!(ratio > expect / 2.0 && ratio < expect * 2.0, "{se:?}");
    }
}

#[test]
fn ingest_header_and_rows() {
    let domain = DomainInterval::new(0.0, 10.0).unwrap();
    let d = dataset_from_reader("x\n1\n2.5\n9.99\n".as_bytes(), domain, Boundary::Reject).unwrap();
    assert_eq!(d.len(), 3);
    let d = dataset_from_reader("-1\n10\n".as_bytes(), domain, Boundary::Clamp).unwrap();
    assert_eq!(d.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "").unwrap();
    assert!(matches!(
        ingest_dataset(&empty, domain, Boundary::Reject),
        Err(HarnessError::EmptyInput(_))
    ));
}
