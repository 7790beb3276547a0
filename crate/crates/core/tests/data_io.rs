mod common;

use std::path::Path;

use common::*;
use fidelity_moo::data::{
    assign_splits, binarize_label, load_csv, load_idx, make_synthetic, one_hot, standardize,
    write_idx_images, write_idx_labels, DatasetSchema, RawColumn, SplitFractions, SyntheticKind,
};
use fidelity_moo::linalg::cholesky_solve;
use fidelity_moo::{DenseMatrix, Error, SplitTag, Task};
use rand::Rng;

fn fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures"))
}

fn levels(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[test]
fn adult_fixture_level_inventory() {
    let schema = DatasetSchema::from_file(&fixtures().join("adult_sample.toml")).unwrap();
    let table = load_csv(&fixtures().join("adult_sample.csv"), &schema.columns, None).unwrap();
    let expected = [
        (
            "workclass",
            levels(&["Private", "Self-emp-not-inc", "State-gov"]),
        ),
        (
            "education",
            levels(&[
                "11th",
                "7th-8th",
                "9th",
                "Assoc-acdm",
                "Assoc-voc",
                "Bachelors",
                "HS-grad",
                "Masters",
                "Some-college",
            ]),
        ),
        (
            "marital-status",
            levels(&[
                "Divorced",
                "Married-civ-spouse",
                "Married-spouse-absent",
                "Never-married",
            ]),
        ),
        (
            "occupation",
            levels(&[
                "Adm-clerical",
                "Craft-repair",
                "Exec-managerial",
                "Farming-fishing",
                "Handlers-cleaners",
                "Machine-op-inspct",
                "Other-service",
                "Prof-specialty",
                "Sales",
                "Transport-moving",
            ]),
        ),
        (
            "relationship",
            levels(&["Husband", "Not-in-family", "Own-child", "Unmarried", "Wife"]),
        ),
        (
            "race",
            levels(&["Amer-Indian-Eskimo", "Asian-Pac-Islander", "Black", "White"]),
        ),
        ("sex", levels(&["Female", "Male"])),
        ("capital-loss", levels(&["0"])),
        (
            "native-country",
            levels(&["Cuba", "India", "Jamaica", "Mexico", "United-States"]),
        ),
    ];
    for (name, want) in expected {
        let col = &table.columns.iter().find(|(n, _)| n == name).unwrap().1;
        match col {
            RawColumn::Categorical { levels, codes } => {
                assert_eq!(levels, &want, "{name}");
                assert_eq!(codes.len(), 20);
            }
            other => panic!("{name} parsed as {other:?}"),
        }
    }
    assert_eq!(table.targets.iter().filter(|t| *t == ">50K").count(), 7);
}

#[test]
fn adult_fixture_builds_a_standardized_dataset() {
    let schema = DatasetSchema::from_file(&fixtures().join("adult_sample.toml")).unwrap();
    let ds = schema.load(fixtures()).unwrap();
    assert_eq!(ds.task, Task::BinaryClassification);
    // 5 numeric + 3+9+4+10+5+4+2+1+5 one-hot columns
    assert_eq!(ds.n_features(), 5 + 43);
    assert_eq!(ds.n_rows(), 20);
    let train = ds.indices(SplitTag::Train);
    for (col, _) in &ds.scalers {
        let v: Vec<f64> = train.iter().map(|&i| ds.features.get(i, *col)).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 1e-9 && (var - 1.0).abs() < 1e-6);
    }
    let sex = ds
        .feature_names
        .iter()
        .position(|n| n == "sex=Female")
        .unwrap();
    for i in 0..20 {
        assert_eq!(ds.features.get(i, sex) + ds.features.get(i, sex + 1), 1.0);
    }
}

#[test]
fn one_hot_fixture_matrix() {
    let oh = one_hot("colour", &levels(&["blue", "green", "red"]), &[2, 0, 0, 1]);
    assert_eq!(oh.names, ["colour=blue", "colour=green", "colour=red"]);
    let expect = [
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
    ];
    for (r, row) in expect.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            assert_eq!(oh.columns[c][r], *v);
        }
    }
    let single = one_hot("k", &levels(&["only"]), &[0, 0, 0]);
    assert_eq!(single.columns, vec![vec![1.0; 3]]);
}

#[test]
fn random_column_has_unit_moments_on_train() {
    let mut r = rng(17);
    let values: Vec<f64> = (0..300).map(|_| r.random_range(-40.0..90.0)).collect();
    let train: Vec<usize> = (0..300).filter(|i| i % 3 != 0).collect();
    let (z, s) = standardize("c", &values, &train).unwrap();
    let t: Vec<f64> = train.iter().map(|&i| z[i]).collect();
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    let var = t.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / t.len() as f64;
    assert!(mean.abs() < 1e-9);
    assert!((var - 1.0).abs() < 1e-9);
    let back: Vec<f64> = z.iter().map(|&v| s.invert(v)).collect();
    for (a, b) in back.iter().zip(&values) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn missing_cell_in_file_names_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    std::fs::write(&path, "a,b,y\n1,2,0\n3,,1\n").unwrap();
    let schema = DatasetSchema::parse(
        "task = \"binary_classification\"\n[source]\nkind = \"csv\"\npath = \"m.csv\"\n\
         [[columns]]\nname = \"a\"\nkind = \"numeric\"\n[[columns]]\nname = \"b\"\nkind = \"numeric\"\n\
         [[columns]]\nname = \"y\"\nkind = \"target\"\n",
    )
    .unwrap();
    match schema.load(dir.path()) {
        Err(Error::Ingest { row, .. }) => assert_eq!(row, 2),
        other => panic!("{other:?}"),
    }
}

fn idx_fixture(dir: &Path) -> (Vec<u8>, Vec<u8>) {
    // four 2×3 images; image 2 is blank
    let pixels: Vec<u8> = vec![
        0, 255, 128, 1, 2, 3, //
        10, 20, 30, 40, 50, 60, //
        0, 0, 0, 0, 0, 0, //
        255, 254, 253, 252, 251, 250,
    ];
    let labels = vec![7, 1, 7, 0];
    write_idx_images(&dir.join("img.idx"), 2, 3, &pixels).unwrap();
    write_idx_labels(&dir.join("lab.idx"), &labels).unwrap();
    (pixels, labels)
}

#[test]
fn idx_fixture_loads_exact_pixels_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (pixels, labels) = idx_fixture(dir.path());
    let set = load_idx(&dir.path().join("img.idx"), &dir.path().join("lab.idx")).unwrap();
    assert_eq!((set.height, set.width), (2, 3));
    assert_eq!(set.labels, labels);
    for (got, raw) in set.pixels.data().iter().zip(&pixels) {
        assert_eq!(*got, *raw as f64 / 255.0);
    }
    assert!(set.pixels.row(2).iter().all(|&p| p == 0.0));

    let back: Vec<u8> = set
        .pixels
        .data()
        .iter()
        .map(|p| (p * 255.0).round() as u8)
        .collect();
    write_idx_images(&dir.path().join("img2.idx"), set.height, set.width, &back).unwrap();
    write_idx_labels(&dir.path().join("lab2.idx"), &set.labels).unwrap();
    for (a, b) in [("img.idx", "img2.idx"), ("lab.idx", "lab2.idx")] {
        assert_eq!(
            std::fs::read(dir.path().join(a)).unwrap(),
            std::fs::read(dir.path().join(b)).unwrap()
        );
    }

    let ds = binarize_label(&set, 7, SplitFractions::default(), 0).unwrap();
    assert_eq!(ds.targets, vec![1.0, 0.0, 1.0, 0.0]);
    assert_eq!(ds.image_dims, Some((2, 3)));
    assert!(ds.features.data().iter().all(|&p| (0.0..=1.0).contains(&p)));
}

#[test]
fn idx_rejects_bad_magic_and_mismatched_counts() {
    let dir = tempfile::tempdir().unwrap();
    idx_fixture(dir.path());
    write_idx_labels(&dir.path().join("short.idx"), &[1, 2]).unwrap();
    assert!(matches!(
        load_idx(&dir.path().join("img.idx"), &dir.path().join("short.idx")),
        Err(Error::Format(_))
    ));
    assert!(matches!(
        load_idx(&dir.path().join("lab.idx"), &dir.path().join("lab.idx")),
        Err(Error::Format(_))
    ));
}

#[test]
fn splits_partition_rows() {
    let mut r = rng(8);
    let targets: Vec<f64> = (0..537).map(|_| r.random_range(0..2) as f64).collect();
    for stratify in [false, true] {
        let tags = assign_splits(&targets, stratify, SplitFractions::default(), 4).unwrap();
        assert_eq!(tags.len(), 537);
        let count = |t| tags.iter().filter(|&&x| x == t).count();
        assert_eq!(
            count(SplitTag::Train) + count(SplitTag::Val) + count(SplitTag::Test),
            537
        );
        assert!((count(SplitTag::Train) as i64 - 376).abs() <= 1);
    }
}

#[test]
fn ols_recovers_linear_truth() {
    let ds = make_synthetic(SyntheticKind::LinearRegression, 200, 6, 0.0, 21).unwrap();
    let truth = ds.truth.clone().unwrap();
    let p = ds.n_features() + 1;
    let mut a = DenseMatrix::zeros(p, p);
    let mut rhs = vec![0.0; p];
    for (row, &y) in ds.features.iter_rows().zip(&ds.targets) {
        let z: Vec<f64> = row.iter().copied().chain([1.0]).collect();
        for i in 0..p {
            rhs[i] += z[i] * y;
            for j in 0..p {
                a.set(i, j, a.get(i, j) + z[i] * z[j]);
            }
        }
    }
    let coef = cholesky_solve(&a, &rhs, 1e-14).unwrap();
    for (c, w) in coef.iter().zip(&truth.weights) {
        assert!((c - w).abs() < 1e-6);
    }
    assert!((coef[p - 1] - truth.bias).abs() < 1e-6);
}

#[test]
fn synthetic_is_seeded() {
    let a = make_synthetic(SyntheticKind::Nonlinear, 100, 3, 0.0, 2).unwrap();
    let b = make_synthetic(SyntheticKind::Nonlinear, 100, 3, 0.0, 2).unwrap();
    let c = make_synthetic(SyntheticKind::Nonlinear, 100, 3, 0.0, 3).unwrap();
    assert_eq!(a.features, b.features);
    assert_eq!(a.targets, b.targets);
    assert_ne!(a.features, c.features);
}
