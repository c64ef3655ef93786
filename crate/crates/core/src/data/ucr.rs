use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Delimiter {
    Comma,
    Tab,
    Whitespace,
}

impl Delimiter {
    fn detect(line: &str) -> Self {
        if line.contains(',') {
            Delimiter::Comma
        } else if line.contains('\t') {
            Delimiter::Tab
        } else {
            Delimiter::Whitespace
        }
    }

    fn split<'a>(self, line: &'a str) -> Box<dyn Iterator<Item = &'a str> + 'a> {
        match self {
            Delimiter::Comma => Box::new(line.split(',').map(str::trim)),
            Delimiter::Tab => Box::new(line.split('\t').map(str::trim)),
            Delimiter::Whitespace => Box::new(line.split_whitespace()),
        }
    }
}

struct RawRows {
    labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_rows(path: &Path) -> Result<RawRows> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut delimiter = None;
    let mut width = None;
    let mut rows = RawRows {
        labels: Vec::new(),
        values: Vec::new(),
    };
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let delim = *delimiter.get_or_insert_with(|| Delimiter::detect(line));
        let mut fields = delim.split(line);
        let label = fields
            .next()
            .filter(|l| !l.is_empty())
            .ok_or_else(|| parse_error(path, line_no, "missing class label"))?;
        let values = fields
            .map(|tok| match tok.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(parse_error(path, line_no, format!("non-finite value {tok:?}"))),
                Err(_) => Err(parse_error(path, line_no, format!("non-numeric value {tok:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(parse_error(path, line_no, "row has a label but no values"));
        }
        match width {
            None => width = Some(values.len()),
            Some(m) if m != values.len() => {
                return Err(parse_error(
                    path,
                    line_no,
                    format!("ragged row: {} values, expected {m}", values.len()),
                ))
            }
            _ => {}
        }
        rows.labels.push(label.to_string());
        rows.values.push(values);
    }
    if rows.labels.is_empty() {
        return Err(parse_error(path, 1, "empty file"));
    }
    Ok(rows)
}

/// Label strings in their canonical order: numeric when all labels parse,
/// lexicographic otherwise.
fn ordered_labels<'a>(labels: impl Iterator<Item = &'a String>) -> Vec<String> {
    let unique: BTreeSet<&String> = labels.collect();
    let mut out: Vec<String> = unique.into_iter().cloned().collect();
    if out.iter().all(|l| l.parse::<f64>().is_ok()) {
        out.sort_by(|a, b| {
            let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
            x.partial_cmp(&y).unwrap().then_with(|| a.cmp(b))
        });
    }
    out
}

fn build<T: Scalar>(name: &str, rows: RawRows, classes: &[String]) -> Result<LabeledDataset<T>> {
    let labels = rows
        .labels
        .iter()
        .map(|l| classes.iter().position(|c| c == l).expect("label in class list"))
        .collect();
    let series = rows
        .values
        .into_iter()
        .map(|v| v.into_iter().map(T::of).collect())
        .collect();
    LabeledDataset::new(name, series, labels, classes.to_vec())
}

fn dataset_name(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    stem.trim_end_matches("_TRAIN")
        .trim_end_matches("_TEST")
        .to_string()
}

/// Reads one UCR file: `label<delim>v1<delim>...<delim>vm` per line.
///
/// The delimiter (comma, tab or whitespace) is detected from the first
/// non-empty line. Labels are mapped to `0..c` in sorted order.
pub fn read_ucr<T: Scalar>(path: impl AsRef<Path>) -> Result<LabeledDataset<T>> {
    let path = path.as_ref();
    let rows = read_rows(path)?;
    let classes = ordered_labels(rows.labels.iter());
    build(&dataset_name(path), rows, &classes)
}

/// Reads a train/test pair under one shared label mapping.
pub fn read_ucr_split<T: Scalar>(
    train: impl AsRef<Path>,
    test: impl AsRef<Path>,
) -> Result<(LabeledDataset<T>, LabeledDataset<T>)> {
    let (train, test) = (train.as_ref(), test.as_ref());
    let train_rows = read_rows(train)?;
    let test_rows = read_rows(test)?;
    let m_train = train_rows.values[0].len();
    let m_test = test_rows.values[0].len();
    if m_train != m_test {
        return Err(Error::input(format!(
            "train series have length {m_train} but test series {m_test}"
        )));
    }
    let classes = ordered_labels(train_rows.labels.iter().chain(test_rows.labels.iter()));
    let name = dataset_name(train);
    Ok((
        build(&name, train_rows, &classes)?,
        build(&name, test_rows, &classes)?,
    ))
}

/// Locates `<Name>_TRAIN.<ext>` and `<Name>_TEST.<ext>` in a dataset directory.
pub fn find_split_files(dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .ok_or_else(|| Error::input(format!("{} is not a dataset directory", dir.display())))?;
    for ext in ["tsv", "txt", "csv"] {
        let train = dir.join(format!("{name}_TRAIN.{ext}"));
        let test = dir.join(format!("{name}_TEST.{ext}"));
        if train.is_file() && test.is_file() {
            return Ok((train, test));
        }
    }
    Err(Error::input(format!(
        "no {name}_TRAIN/{name}_TEST pair (.tsv, .txt or .csv) in {}",
        dir.display()
    )))
}

/// Writes a dataset with its original label strings, tab separated, values
/// with 17 significant digits.
pub fn write_ucr<T: Scalar>(dataset: &LabeledDataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for (values, label) in dataset.iter() {
        out.push_str(&dataset.class_names()[label]);
        for v in values {
            let _ = write!(out, "\t{:.16e}", v.as_f64());
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
