//! Text formats for datasets and reports. The byte layouts are described
//! in `docs/FORMATS.md`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::baselines::{MethodParams, MethodResult};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::tarone::Significant;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, line: usize, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    }
}

/// Non-blank lines with their 1-based line numbers, split into tokens on
/// whitespace and commas.
fn token_lines(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let tokens: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .collect();
            (!tokens.is_empty()).then_some((i + 1, tokens))
        })
        .collect()
}

fn parse_bit(path: &Path, line: usize, column: usize, token: &str) -> Result<u8> {
    match token {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(parse_error(
            path,
            line,
            format!("token {token:?} in column {column} is not 0 or 1"),
        )),
    }
}

/// A binary matrix read from a file, one row per non-blank line.
fn read_matrix(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let text = read(path)?;
    let lines = token_lines(&text);
    let Some((_, first)) = lines.first() else {
        return Err(parse_error(path, 1, "no data rows".into()));
    };
    let width = first.len();
    let mut cells = Vec::with_capacity(lines.len() * width);
    for (line, tokens) in &lines {
        if tokens.len() != width {
            return Err(parse_error(
                path,
                *line,
                format!("expected {width} tokens, found {}", tokens.len()),
            ));
        }
        for (c, tok) in tokens.iter().enumerate() {
            cells.push(parse_bit(path, *line, c + 1, tok)?);
        }
    }
    Ok((lines.len(), width, cells))
}

/// One value per non-blank line.
fn read_column<T>(path: &Path, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<Vec<(usize, T)>> {
    let text = read(path)?;
    token_lines(&text)
        .into_iter()
        .map(|(line, tokens)| {
            if tokens.len() != 1 {
                return Err(parse_error(
                    path,
                    line,
                    format!("expected one {what}, found {} tokens", tokens.len()),
                ));
            }
            parse(tokens[0])
                .map(|v| (line, v))
                .ok_or_else(|| parse_error(path, line, format!("{:?} is not a valid {what}", tokens[0])))
        })
        .collect()
}

/// Reads a dataset from three text files.
///
/// The data file holds one sample per line with `L` tokens in `{0, 1}`
/// separated by whitespace or commas; with `transpose` it holds one
/// position per line with `n` tokens. Labels hold one 0/1 per line and
/// covariates one category index per line. Blank lines are ignored.
pub fn load_dataset(data: &Path, labels: &Path, covariates: &Path, transpose: bool) -> Result<Dataset> {
    let (rows, width, mut cells) = read_matrix(data)?;
    let (n, len) = if transpose { (width, rows) } else { (rows, width) };
    if transpose {
        let mut t = vec![0u8; cells.len()];
        for p in 0..len {
            for s in 0..n {
                t[s * len + p] = cells[p * n + s];
            }
        }
        cells = t;
    }

    let y = read_column(labels, |t| parse_bit(labels, 0, 1, t).ok(), "label (0 or 1)")?;
    let c = read_column(covariates, |t| t.parse::<u32>().ok(), "category index")?;
    let mismatch = |path: &Path, what: &str, count: usize| {
        Error::DimensionMismatch(format!(
            "{} has {count} {what} but {} has {n} samples",
            path.display(),
            data.display()
        ))
    };
    if y.len() != n {
        return Err(mismatch(labels, "labels", y.len()));
    }
    if c.len() != n {
        return Err(mismatch(covariates, "covariates", c.len()));
    }

    let k = c.iter().map(|&(_, v)| v as usize + 1).max().unwrap_or(0);
    let mut seen = vec![false; k];
    for &(_, v) in &c {
        seen[v as usize] = true;
    }
    if let Some(empty) = seen.iter().position(|&s| !s) {
        let line = c.iter().find(|&&(_, v)| v as usize > empty).map_or(0, |&(l, _)| l);
        return Err(parse_error(covariates, line, Error::EmptyCategory(empty).to_string()));
    }

    Dataset::from_rows(
        &cells,
        len,
        y.into_iter().map(|(_, v)| v).collect(),
        c.into_iter().map(|(_, v)| v).collect(),
    )
}

/// Paths of the three dataset files sharing a prefix:
/// `<prefix>.data.txt`, `<prefix>.labels.txt`, `<prefix>.covariates.txt`.
pub fn dataset_paths(prefix: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let with = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with(".data.txt"), with(".labels.txt"), with(".covariates.txt"))
}

/// Row-major data text: one line per sample, cells separated by a space.
pub fn data_text(dataset: &Dataset) -> String {
    let mut out = String::with_capacity(dataset.n_samples() * dataset.len() * 2);
    for s in 0..dataset.n_samples() {
        for p in 0..dataset.len() {
            if p > 0 {
                out.push(' ');
            }
            out.push(if dataset.get(s, p) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

fn column_text<T: std::fmt::Display>(values: &[T]) -> String {
    values.iter().fold(String::new(), |mut out, v| {
        let _ = writeln!(out, "{v}");
        out
    })
}

/// Writes the three files read by [`load_dataset`] (untransposed).
pub fn write_dataset(dataset: &Dataset, data: &Path, labels: &Path, covariates: &Path) -> Result<()> {
    write(data, &data_text(dataset))?;
    write(labels, &column_text(dataset.labels()))?;
    write(covariates, &column_text(dataset.covariates()))
}

/// Tab-separated table of significant intervals over `k` categories.
/// Floats use Rust's shortest round-trip scientific notation.
pub fn hits_tsv(hits: &[Significant<Interval>], k: usize) -> String {
    let mut out = String::from("tau\tell");
    for i in 0..k {
        let _ = write!(out, "\tx_{i}");
    }
    for i in 0..k {
        let _ = write!(out, "\ta_{i}");
    }
    out.push_str("\tx\ta\tstatistic\tp_value\n");
    for h in hits {
        debug_assert_eq!(h.x.len(), k);
        let _ = write!(out, "{}\t{}", h.pattern.tau, h.pattern.ell);
        for v in h.x.iter().chain(&h.a) {
            let _ = write!(out, "\t{v}");
        }
        let x: u32 = h.x.iter().sum();
        let a: u32 = h.a.iter().sum();
        let _ = writeln!(out, "\t{x}\t{a}\t{:e}\t{:e}", h.statistic, h.p_value);
    }
    out
}

/// `key<TAB>value` summary of a run. Every line except `wall_time_s` is
/// a deterministic function of the inputs.
pub fn summary_text(result: &MethodResult, params: &MethodParams, filtered: Option<usize>) -> String {
    let mut out = String::new();
    let max_ell = params.max_ell.map_or("none".to_string(), |v| v.to_string());
    let filtered = filtered.map_or("off".to_string(), |v| v.to_string());
    let rows: [(&str, String); 14] = [
        ("method", result.method.to_string()),
        ("alpha", format!("{}", params.alpha)),
        ("mu", format!("{}", params.mu)),
        ("n_steps", params.n_steps.to_string()),
        ("max_ell", max_ell),
        ("categories", result.categories.to_string()),
        ("delta_star", format!("{:e}", result.delta)),
        ("testable", result.family_size.to_string()),
        ("testable_at_delta_star", result.testable_at_delta.to_string()),
        ("visited", result.visited().to_string()),
        ("granularity_warning", result.granularity_warning.to_string()),
        ("significant", result.hits.len().to_string()),
        ("filtered", filtered),
        ("wall_time_s", format!("{:.6}", result.wall_time.as_secs_f64())),
    ];
    for (k, v) in rows {
        let _ = writeln!(out, "{k}\t{v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn files(dir: &Path, data: &str, labels: &str, cov: &str) -> (PathBuf, PathBuf, PathBuf) {
        let p = dataset_paths(&dir.join("toy"));
        fs::write(&p.0, data).unwrap();
        fs::write(&p.1, labels).unwrap();
        fs::write(&p.2, cov).unwrap();
        p
    }

    #[test]
    fn toy_both_orientations() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path();
        let (d, l, c) = files(dir, "1 0 0 0\n0,1,1,0\n\n0 0 1 1\n", "1\n0\n1\n", "0\n1\n0\n");
        let a = load_dataset(&d, &l, &c, false).unwrap();
        assert_eq!((a.n_samples(), a.len(), a.categories()), (3, 4, 2));
        assert_eq!(a.row(1), vec![0, 1, 1, 0]);
        fs::write(&d, "1 0 0\n0 1 0\n0 1 1\n0 0 1\n").unwrap();
        let b = load_dataset(&d, &l, &c, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn error_messages_name_file_and_line() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path();
        let (d, l, c) = files(dir, "1 0\n0 2\n1 1\n", "1\n0\n1\n", "0\n0\n0\n");
        let e = load_dataset(&d, &l, &c, false).unwrap_err().to_string();
        assert!(e.contains("toy.data.txt:2") && e.contains("\"2\""), "{e}");

        fs::write(&d, "1 0\n0 1 1\n").unwrap();
        let e = load_dataset(&d, &l, &c, false).unwrap_err().to_string();
        assert!(e.contains("toy.data.txt:2") && e.contains("expected 2 tokens, found 3"), "{e}");

        fs::write(&d, "1 0\n0 1\n1 1\n").unwrap();
        fs::write(&l, "1\n0\n1\n0\n").unwrap();
        let e = load_dataset(&d, &l, &c, false).unwrap_err().to_string();
        assert!(e.contains("4 labels") && e.contains("3 samples"), "{e}");

        fs::write(&l, "1\n0\nx\n").unwrap();
        let e = load_dataset(&d, &l, &c, false).unwrap_err().to_string();
        assert!(e.contains("toy.labels.txt:3"), "{e}");

        fs::write(&l, "1\n0\n1\n").unwrap();
        fs::write(&c, "0\n0\n2\n").unwrap();
        let e = load_dataset(&d, &l, &c, false).unwrap_err().to_string();
        assert!(e.contains("toy.covariates.txt:3") && e.contains("category 1 empty"), "{e}");

        fs::write(&c, "0\n-1\n0\n").unwrap();
        assert!(load_dataset(&d, &l, &c, false).is_err());

        let missing = dir.join("absent.txt");
        let e = load_dataset(&missing, &l, &c, false).unwrap_err().to_string();
        assert!(e.contains("absent.txt"), "{e}");
    }

    #[test]
    fn write_then_load() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path();
        let ds = Dataset::from_rows(&[1, 0, 1, 0, 1, 1, 0, 0, 0], 3, vec![0, 1, 1], vec![1, 0, 1]).unwrap();
        let (d, l, c) = dataset_paths(&dir.join("rt"));
        write_dataset(&ds, &d, &l, &c).unwrap();
        assert_eq!(fs::read_to_string(&d).unwrap(), "1 0 1\n0 1 1\n0 0 0\n");
        assert_eq!(load_dataset(&d, &l, &c, false).unwrap(), ds);
    }

    #[test]
    fn tsv_layout() {
        let hits = vec![Significant {
            pattern: Interval::new(3, 2),
            x: vec![4, 1],
            a: vec![3, 0],
            statistic: 12.5,
            p_value: 4.07e-4,
        }];
        assert_eq!(
            hits_tsv(&hits, 2),
            "tau\tell\tx_0\tx_1\ta_0\ta_1\tx\ta\tstatistic\tp_value\n3\t2\t4\t1\t3\t0\t5\t3\t1.25e1\t4.07e-4\n"
        );
        assert_eq!(hits_tsv(&[], 1), "tau\tell\tx_0\ta_0\tx\ta\tstatistic\tp_value\n");
    }
}
