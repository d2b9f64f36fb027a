use std::io::Write;
use std::path::Path;

use qkernel_core::datasets::{binary_filter_and_split, load_csv_dataset, sample_uniform};
use qkernel_core::kernels::gram;
use qkernel_core::learners::{krr_fit, svm_fit, KrrModel, SvmModel};
use qkernel_core::spectral::empirical_spectrum;
use qkernel_core::{Error, FeatureMapSpec, GramMatrix};

fn write_file(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
    path
}

#[test]
fn two_row_fixture_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "two.csv", "a,b,label\n0.5,-1.25,1\n3,4e-3,0\n");
    let ds = load_csv_dataset(&path).unwrap();
    assert_eq!(ds.inputs, vec![vec![0.5, -1.25], vec![3.0, 4e-3]]);
    assert_eq!(ds.labels, vec![1.0, 0.0]);
    assert_eq!(ds.num_features(), 2);
}

#[test]
fn empty_and_malformed_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_file(dir.path(), "empty.csv", "");
    assert!(load_csv_dataset(&empty).is_err());
    let header_only = write_file(dir.path(), "header.csv", "a,label\n");
    assert!(load_csv_dataset(&header_only).is_err());
    let ragged = write_file(dir.path(), "ragged.csv", "a,b,label\n1,2,0\n1,0\n");
    match load_csv_dataset(&ragged) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected parse error, got {other:?}"),
    }
    let bad = write_file(dir.path(), "bad.csv", "a,label\n1,0\nx,1\n");
    match load_csv_dataset(&bad) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn fmnist_fixture_shape() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/fmnist_tshirt_dress.csv");
    let ds = load_csv_dataset(&path).unwrap();
    assert_eq!(ds.len(), 400);
    assert_eq!(ds.num_features(), 784);
    let (train, test) = binary_filter_and_split(&ds, 0.0, 3.0, 200, 100, 5).unwrap();
    assert_eq!((train.len(), test.len()), (200, 100));
    assert!(train.is_binary() && test.is_binary());
    for t in &test.inputs {
        assert!(!train.inputs.contains(t) || ds.inputs.iter().filter(|r| *r == t).count() > 1);
    }
    let again = binary_filter_and_split(&ds, 0.0, 3.0, 200, 100, 5).unwrap();
    assert_eq!(again.0.inputs, train.inputs);
    assert!(binary_filter_and_split(&ds, 0.0, 3.0, 390, 100, 5).is_err());
}

#[test]
fn gram_csv_and_binary_round_trip() {
    let xs = sample_uniform(3, 12, 4);
    let g = gram(&FeatureMapSpec::evo(3, 0.7, 2).unwrap(), &xs).unwrap();
    let mut text = b"# header line\n".to_vec();
    g.write_csv(&mut text).unwrap();
    let back = GramMatrix::read_csv(&text[..]).unwrap();
    assert_eq!(back.as_slice(), g.as_slice());

    let mut bin = Vec::new();
    g.write_binary(&mut bin).unwrap();
    assert_eq!(&bin[..4], b"QKGM");
    assert_eq!(u32::from_le_bytes(bin[4..8].try_into().unwrap()), 12);
    assert_eq!(bin.len(), 8 + 8 * 144);
    assert_eq!(GramMatrix::read_binary(&bin[..]).unwrap().as_slice(), g.as_slice());
    assert!(GramMatrix::read_binary(&bin[..bin.len() - 1]).is_err());
    let mut extra = bin.clone();
    extra.push(0);
    assert!(GramMatrix::read_binary(&extra[..]).is_err());
    let mut wrong = bin;
    wrong[0] = b'X';
    assert!(GramMatrix::read_binary(&wrong[..]).is_err());
}

#[test]
fn models_round_trip_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let xs = sample_uniform(2, 20, 8);
    let g = gram(&FeatureMapSpec::iqp(2, 0.4).unwrap(), &xs).unwrap();
    let y: Vec<f64> = xs.iter().map(|x| if x[0] > 0.0 { 1.0 } else { -1.0 }).collect();

    let krr = krr_fit(&g, &y, 1e-3).unwrap();
    krr.save_json(dir.path().join("krr.json")).unwrap();
    assert_eq!(KrrModel::load_json(dir.path().join("krr.json")).unwrap(), krr);

    let svm = svm_fit(&g, &y, 1.0).unwrap();
    svm.save_json(dir.path().join("svm.json")).unwrap();
    assert_eq!(SvmModel::load_json(dir.path().join("svm.json")).unwrap(), svm);
}

#[test]
fn spectrum_report_csv_columns() {
    let xs = sample_uniform(2, 10, 1);
    let g = gram(&FeatureMapSpec::product_rx(2, 1.0).unwrap(), &xs).unwrap();
    let y: Vec<f64> = xs.iter().map(|x| x[1].cos()).collect();
    let report = empirical_spectrum(&g, &y).unwrap();
    let mut out = Vec::new();
    report.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "rank,eigenvalue,weight,cumulative_power");
    assert_eq!(lines.count(), 10);
}
