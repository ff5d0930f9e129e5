use std::fs;

use sysid_core::benchmarks::{gen_lpv_disk, gen_lti_disk, DiskParams, NoiseKind, NoiseSpec, Scheduling};
use sysid_core::io::*;
use sysid_core::models::{Model, ModelStructure};
use sysid_core::Error;

#[test]
fn dataset_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("train.csv");
    let g = gen_lti_disk(&DiskParams::default(), &NoiseSpec::default(), 300, 3).unwrap();
    write_dataset(&g.data, &path).unwrap();
    assert_eq!(read_dataset(&path).unwrap(), g.data);
    let first = fs::read(&path).unwrap();
    write_dataset(&g.data, &path).unwrap();
    assert_eq!(fs::read(&path).unwrap(), first);
    assert!(fs::read_to_string(&path).unwrap().starts_with("k,u1,y1\n0,"));
}

#[test]
fn scheduling_columns_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lpv.csv");
    let d = DiskParams::default();
    let g = gen_lpv_disk(&d, &NoiseSpec::with_kind(NoiseKind::BjLpv), 100, 1, &Scheduling::external_default(d.ts)).unwrap();
    write_dataset(&g.data, &path).unwrap();
    let back = read_dataset(&path).unwrap();
    assert_eq!(back.np(), 1);
    assert_eq!(back, g.data);
    assert!(fs::read_to_string(&path).unwrap().starts_with("k,u1,p1,y1\n"));
}

#[test]
fn missing_output_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "k,u1\n0,1.0\n").unwrap();
    fs::write(sidecar(&path, ".meta"), "ts=0.01\n").unwrap();
    assert!(matches!(read_dataset(&path), Err(Error::Schema { .. })));
}

#[test]
fn parse_errors_carry_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "k,u1,y1\n0,1.0,2.0\n1,abc,2.0\n").unwrap();
    fs::write(sidecar(&path, ".meta"), "ts=0.01\n").unwrap();
    match read_dataset(&path) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    fs::write(&path, "k,u1,y1\n0,1.0\n").unwrap();
    assert!(matches!(read_dataset(&path), Err(Error::Parse { line: 2, .. })));
}

#[test]
fn metadata_must_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    fs::write(&path, "k,u1,y1\n0,1.0,2.0\n").unwrap();
    fs::write(sidecar(&path, ".meta"), "ts=0.01\nn=5\n").unwrap();
    assert!(matches!(read_dataset(&path), Err(Error::Schema { .. })));
    fs::remove_file(sidecar(&path, ".meta")).unwrap();
    assert!(matches!(read_dataset(&path), Err(Error::Io { .. })));
}

#[test]
fn truth_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let g = gen_lti_disk(&DiskParams::default(), &NoiseSpec::default(), 50, 0).unwrap();
    write_truth(&g.truth, &path).unwrap();
    assert_eq!(read_truth(&path).unwrap(), g.truth);
}

#[test]
fn model_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let m = Model::new(ModelStructure::lti(2, 1, 1, 1)).unwrap();
    let p: Vec<f64> = (0..m.n_params()).map(|i| (i as f64 * 0.37).sin() / 3.0).collect();
    save_model(&path, &m, &p).unwrap();
    let (m2, p2) = load_model(&path).unwrap();
    assert_eq!(m2.structure, m.structure);
    assert_eq!(p2, p);
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"version\": 1"));

    let mut f: ModelFile = serde_json::from_str(&text).unwrap();
    f.theta.pop();
    fs::write(&path, serde_json::to_string(&f).unwrap()).unwrap();
    assert!(matches!(load_model(&path), Err(Error::Schema { .. })));
    fs::write(&path, text.replace("\"version\": 1", "\"version\": 7")).unwrap();
    assert!(matches!(load_model(&path), Err(Error::Schema { .. })));
}
