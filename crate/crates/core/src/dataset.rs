//! Labeled feature tables, the benchmark registry and balanced train/test splits.
//!
//! Features are used exactly as stored in the source files; nothing is scaled
//! or centered.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub label_names: Vec<String>,
    d: usize,
    rows: Vec<Sample>,
}

impl LabeledDataset {
    pub fn new(
        name: impl Into<String>,
        d: usize,
        label_names: Vec<String>,
        rows: Vec<Sample>,
    ) -> Result<Self> {
        let n = label_names.len();
        for (i, r) in rows.iter().enumerate() {
            if r.features.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: r.features.len(),
                });
            }
            if r.label >= n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has label {} but only {n} classes exist",
                    r.label
                )));
            }
            if r.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("row {i} has a non-finite feature")));
            }
        }
        Ok(Self {
            name: name.into(),
            label_names,
            d,
            rows,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn rows(&self) -> &[Sample] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for r in &self.rows {
            counts[r.label] += 1;
        }
        counts
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            label_names: self.label_names.clone(),
            d: self.d,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

/// Which columns of a CSV file hold the features and the label.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnSchema {
    pub feature_columns: Vec<usize>,
    pub label_column: usize,
    pub header: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRegistryEntry {
    pub name: String,
    pub expected_d: usize,
    pub expected_n: usize,
    pub train_count: usize,
    pub source: PathBuf,
    pub schema: ColumnSchema,
    /// Label strings in class-index order.
    pub label_names: Vec<String>,
    /// Rows whose label is listed here are skipped rather than rejected.
    pub drop_labels: Vec<String>,
    /// Hidden width used for the one-hidden-layer baseline.
    pub reference_hidden: usize,
}

impl DatasetRegistryEntry {
    /// The entry with `source` resolved against `dir` when it is relative.
    pub fn in_dir(&self, dir: &Path) -> Self {
        let mut e = self.clone();
        if e.source.is_relative() {
            e.source = dir.join(&e.source);
        }
        e
    }
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// The four benchmark configurations. Source paths are relative to a data
/// directory; see [`DatasetRegistryEntry::in_dir`].
pub fn registry() -> Vec<DatasetRegistryEntry> {
    let iris_schema = ColumnSchema {
        feature_columns: (0..4).collect(),
        label_column: 4,
        header: false,
    };
    vec![
        DatasetRegistryEntry {
            name: "CANCER".into(),
            expected_d: 27,
            expected_n: 2,
            train_count: 360,
            source: "wdbc.csv".into(),
            // wdbc.csv stores the 30 diagnostic features followed by M/B;
            // the first 27 feature columns are used
            schema: ColumnSchema {
                feature_columns: (0..27).collect(),
                label_column: 30,
                header: false,
            },
            label_names: strings(&["M", "B"]),
            drop_labels: vec![],
            reference_hidden: 10,
        },
        DatasetRegistryEntry {
            name: "SONAR".into(),
            expected_d: 60,
            expected_n: 2,
            train_count: 140,
            source: "sonar.csv".into(),
            schema: ColumnSchema {
                feature_columns: (0..60).collect(),
                label_column: 60,
                header: false,
            },
            label_names: strings(&["R", "M"]),
            drop_labels: vec![],
            reference_hidden: 30,
        },
        DatasetRegistryEntry {
            name: "IRIS".into(),
            expected_d: 4,
            expected_n: 3,
            train_count: 105,
            source: "iris.csv".into(),
            schema: iris_schema.clone(),
            label_names: strings(&["Iris-setosa", "Iris-versicolor", "Iris-virginica"]),
            drop_labels: vec![],
            reference_hidden: 4,
        },
        DatasetRegistryEntry {
            name: "IRIS2".into(),
            expected_d: 4,
            expected_n: 2,
            train_count: 70,
            source: "iris.csv".into(),
            schema: iris_schema,
            label_names: strings(&["Iris-setosa", "Iris-virginica"]),
            drop_labels: strings(&["Iris-versicolor"]),
            reference_hidden: 4,
        },
    ]
}

/// Case-insensitive registry lookup; "IRIS(2)" is accepted for IRIS2.
pub fn lookup(name: &str) -> Option<DatasetRegistryEntry> {
    let key: String = name
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_uppercase();
    registry().into_iter().find(|e| e.name == key)
}

pub fn load_csv(path: &Path, schema: &DatasetRegistryEntry) -> Result<LabeledDataset> {
    if schema.schema.feature_columns.len() != schema.expected_d {
        return Err(Error::DimensionMismatch {
            expected: schema.expected_d,
            found: schema.schema.feature_columns.len(),
        });
    }
    if schema.label_names.len() != schema.expected_n {
        return Err(Error::DimensionMismatch {
            expected: schema.expected_n,
            found: schema.label_names.len(),
        });
    }
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.schema.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());

    let malformed = |row: usize, reason: String| Error::MalformedRow {
        path: path.to_path_buf(),
        row,
        reason,
    };
    let needed = schema
        .schema
        .feature_columns
        .iter()
        .copied()
        .chain([schema.schema.label_column])
        .max()
        .unwrap_or(0)
        + 1;

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // 1-based line numbers as seen in an editor
        let row = i + 1 + usize::from(schema.schema.header);
        let record = record.map_err(|e| malformed(row, e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() < needed {
            return Err(malformed(
                row,
                format!("expected at least {needed} columns, found {}", record.len()),
            ));
        }
        let label_str = &record[schema.schema.label_column];
        if schema.drop_labels.iter().any(|l| l == label_str) {
            continue;
        }
        let label = schema
            .label_names
            .iter()
            .position(|l| l == label_str)
            .ok_or_else(|| Error::UnknownLabel {
                row,
                label: label_str.to_string(),
            })?;
        let features = schema
            .schema
            .feature_columns
            .iter()
            .map(|&c| {
                let field = &record[c];
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| malformed(row, format!("column {c}: {field:?} is not a finite number")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(Sample { features, label });
    }
    LabeledDataset::new(
        schema.name.clone(),
        schema.expected_d,
        schema.label_names.clone(),
        rows,
    )
}

/// m training rows per class, drawn with a seeded shuffle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitSpec {
    pub per_class_train: usize,
    pub seed: u64,
}

impl SplitSpec {
    /// A split with `train_count` rows spread evenly over `n_classes`.
    pub fn from_train_count(train_count: usize, n_classes: usize, seed: u64) -> Result<Self> {
        if n_classes == 0 || !train_count.is_multiple_of(n_classes) {
            return Err(Error::InvalidInput(format!(
                "train count {train_count} cannot be split evenly over {n_classes} classes"
            )));
        }
        Ok(Self {
            per_class_train: train_count / n_classes,
            seed,
        })
    }

    pub fn train_count(&self, n_classes: usize) -> usize {
        self.per_class_train * n_classes
    }
}

/// Splits `ds` into a class-balanced training set and the remaining test set.
/// Both keep the original row order.
pub fn balanced_split(ds: &LabeledDataset, spec: &SplitSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    let counts = ds.class_counts();
    for (class, &available) in counts.iter().enumerate() {
        if available < spec.per_class_train {
            return Err(Error::InsufficientSamples {
                class,
                available,
                requested: spec.per_class_train,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut in_train = vec![false; ds.len()];
    for class in 0..ds.n_classes() {
        let mut idx: Vec<usize> = (0..ds.len()).filter(|&i| ds.rows[i].label == class).collect();
        idx.shuffle(&mut rng);
        for &i in &idx[..spec.per_class_train] {
            in_train[i] = true;
        }
    }
    let (train, test): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| in_train[i]);
    Ok((ds.subset(&train), ds.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn data_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
    }

    fn load(name: &str) -> LabeledDataset {
        let e = lookup(name).unwrap().in_dir(&data_dir());
        load_csv(&e.source, &e).unwrap()
    }

    #[test]
    fn registry_matches_benchmark_table() {
        let dims: Vec<_> = registry()
            .iter()
            .map(|e| (e.name.clone(), e.expected_d, e.expected_n, e.train_count))
            .collect();
        assert_eq!(
            dims,
            vec![
                ("CANCER".to_string(), 27, 2, 360),
                ("SONAR".to_string(), 60, 2, 140),
                ("IRIS".to_string(), 4, 3, 105),
                ("IRIS2".to_string(), 4, 2, 70),
            ]
        );
        assert_eq!(lookup("iris(2)").unwrap().name, "IRIS2");
        assert!(lookup("MNIST").is_none());
    }

    #[test]
    fn iris_loads_fifty_per_class() {
        let ds = load("IRIS");
        assert_eq!((ds.d(), ds.n_classes(), ds.len()), (4, 3, 150));
        assert_eq!(ds.class_counts(), vec![50, 50, 50]);
        assert_eq!(ds.rows()[0].features, vec![5.1, 3.5, 1.4, 0.2]);
    }

    #[test]
    fn iris2_keeps_setosa_and_virginica() {
        let ds = load("IRIS2");
        assert_eq!((ds.d(), ds.n_classes(), ds.len()), (4, 2, 100));
        assert_eq!(ds.class_counts(), vec![50, 50]);
    }

    #[test]
    fn cancer_and_sonar_shapes() {
        let c = load("CANCER");
        assert_eq!((c.d(), c.len()), (27, 569));
        assert_eq!(c.class_counts(), vec![212, 357]);
        let s = load("SONAR");
        assert_eq!((s.d(), s.len()), (60, 208));
        assert_eq!(s.class_counts(), vec![97, 111]);
    }

    fn tiny_entry(path: &Path) -> DatasetRegistryEntry {
        DatasetRegistryEntry {
            name: "TINY".into(),
            expected_d: 2,
            expected_n: 2,
            train_count: 2,
            source: path.to_path_buf(),
            schema: ColumnSchema {
                feature_columns: vec![0, 1],
                label_column: 2,
                header: true,
            },
            label_names: strings(&["a", "b"]),
            drop_labels: vec![],
            reference_hidden: 2,
        }
    }

    #[test]
    fn malformed_row_is_reported_with_its_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "x,y,label\n1.0,2.0,a\n3.0,oops,b").unwrap();
        let err = load_csv(f.path(), &tiny_entry(f.path())).unwrap_err();
        match err {
            Error::MalformedRow { row, reason, .. } => {
                assert_eq!(row, 3);
                assert!(reason.contains("oops"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_label_and_short_rows() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "x,y,label\n1.0,2.0,c").unwrap();
        assert!(matches!(
            load_csv(f.path(), &tiny_entry(f.path())),
            Err(Error::UnknownLabel { row: 2, .. })
        ));
        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "x,y,label\n1.0,a").unwrap();
        assert!(matches!(
            load_csv(g.path(), &tiny_entry(g.path())),
            Err(Error::MalformedRow { row: 2, .. })
        ));
        let missing = Path::new("/nonexistent/qunit.csv");
        assert!(matches!(load_csv(missing, &tiny_entry(missing)), Err(Error::Io { .. })));
    }

    #[test]
    fn schema_dimension_must_match_expected_d() {
        let mut e = tiny_entry(Path::new("unused.csv"));
        e.expected_d = 3;
        assert!(matches!(
            load_csv(Path::new("unused.csv"), &e),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn iris_split_sizes() {
        let ds = load("IRIS");
        let spec = SplitSpec::from_train_count(105, 3, 7).unwrap();
        let (train, test) = balanced_split(&ds, &spec).unwrap();
        assert_eq!(train.class_counts(), vec![35, 35, 35]);
        assert_eq!(test.len(), 45);

        let ds2 = load("IRIS2");
        let (train, test) = balanced_split(&ds2, &SplitSpec::from_train_count(70, 2, 7).unwrap()).unwrap();
        assert_eq!(train.class_counts(), vec![35, 35]);
        assert_eq!(test.len(), 30);
    }

    #[test]
    fn split_is_seeded() {
        let ds = load("IRIS");
        let spec = SplitSpec::from_train_count(105, 3, 11).unwrap();
        assert_eq!(balanced_split(&ds, &spec).unwrap(), balanced_split(&ds, &spec).unwrap());
        let other = SplitSpec { seed: 12, ..spec };
        assert_ne!(balanced_split(&ds, &spec).unwrap().0, balanced_split(&ds, &other).unwrap().0);
    }

    #[test]
    fn oversized_split_fails() {
        let ds = load("SONAR");
        let spec = SplitSpec { per_class_train: 98, seed: 0 };
        assert!(matches!(
            balanced_split(&ds, &spec),
            Err(Error::InsufficientSamples { class: 0, available: 97, requested: 98 })
        ));
        assert!(SplitSpec::from_train_count(105, 2, 0).is_err());
    }
}
