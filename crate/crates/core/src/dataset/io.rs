use std::path::Path;

use super::{Dataset, Sample, Task};
use crate::{Error, Result};

/// On-disk dataset formats.
///
/// Both formats put the integer label first. CSV rows hold dense features;
/// sparse rows hold `index:value` pairs with 1-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv { header: bool },
    Sparse { dim: Option<usize> },
}

/// Reads a labeled dataset from `path`.
///
/// When `task` is `None` it is inferred from the label set: `{-1, +1}` is
/// binary, anything else must be `1..=K`.
pub fn load(path: impl AsRef<Path>, format: Format, task: Option<Task>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text, format, task)
}

pub fn parse(text: &str, format: Format, task: Option<Task>) -> Result<Dataset> {
    let rows = match format {
        Format::Csv { header } => parse_csv(text, header)?,
        Format::Sparse { dim } => parse_sparse(text, dim)?,
    };
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let task = match task {
        Some(t) => t,
        None => infer_task(&rows)?,
    };
    let dim = rows[0].x.len();
    let mut samples = Vec::with_capacity(rows.len());
    for (id, row) in rows.into_iter().enumerate() {
        if row.x.len() != dim {
            return Err(Error::Parse {
                line: row.line,
                message: format!("expected {dim} features, found {}", row.x.len()),
            });
        }
        if !task.is_valid_label(row.y) {
            return Err(Error::UnknownLabel {
                line: row.line,
                token: row.y.to_string(),
            });
        }
        samples.push(Sample {
            x: row.x,
            y: Some(row.y),
            id,
        });
    }
    Dataset::new(samples, dim, task)
}

struct Row {
    line: usize,
    y: i32,
    x: Vec<f64>,
}

fn infer_task(rows: &[Row]) -> Result<Task> {
    if rows.iter().all(|r| r.y == 1 || r.y == -1) {
        return Ok(Task::Binary);
    }
    if let Some(bad) = rows.iter().find(|r| r.y < 1) {
        return Err(Error::UnknownLabel {
            line: bad.line,
            token: bad.y.to_string(),
        });
    }
    let k = rows.iter().map(|r| r.y).max().unwrap_or(1) as usize;
    Ok(Task::Multiclass(k.max(2)))
}

fn parse_label(token: &str, line: usize) -> Result<i32> {
    token.trim().parse::<i32>().map_err(|_| Error::Parse {
        line,
        message: format!("label {token:?} is not an integer"),
    })
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    let v = token.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("feature {token:?} is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("feature {token:?} is not finite"),
        });
    }
    Ok(v)
}

fn parse_csv(text: &str, header: bool) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record
            .position()
            .map_or(rows.len() + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let mut fields = record.iter();
        let y = parse_label(fields.next().unwrap_or_default(), line)?;
        let x = fields
            .map(|f| parse_value(f, line))
            .collect::<Result<Vec<_>>>()?;
        rows.push(Row { line, y, x });
    }
    Ok(rows)
}

fn parse_sparse(text: &str, dim: Option<usize>) -> Result<Vec<Row>> {
    let mut entries = Vec::new();
    let mut max_index = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or_default().trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let y = parse_label(tokens.next().unwrap_or_default(), line)?;
        let mut pairs = Vec::new();
        for token in tokens {
            let (idx, val) = token.split_once(':').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected index:value, found {token:?}"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad feature index {idx:?}"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line,
                    message: "feature indices are 1-based".into(),
                });
            }
            max_index = max_index.max(idx);
            pairs.push((idx - 1, parse_value(val, line)?));
        }
        entries.push((line, y, pairs));
    }
    let dim = match dim {
        Some(d) if d < max_index => {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: max_index,
            })
        }
        Some(d) => d,
        None => max_index,
    };
    Ok(entries
        .into_iter()
        .map(|(line, y, pairs)| {
            let mut x = vec![0.0; dim];
            for (j, v) in pairs {
                x[j] = v;
            }
            Row { line, y, x }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_label_first() {
        let d = parse(
            "1,0.5,-0.2\n-1,0.1,0.0\n",
            Format::Csv { header: false },
            None,
        )
        .unwrap();
        assert_eq!(d.task(), Task::Binary);
        assert_eq!(d.samples()[0].y, Some(1));
        assert_eq!(d.samples()[0].x, vec![0.5, -0.2]);
    }

    #[test]
    fn csv_header_is_skipped() {
        let d = parse(
            "label,a,b\n2,1,2\n3,0,0\n",
            Format::Csv { header: true },
            None,
        )
        .unwrap();
        assert_eq!(d.task(), Task::Multiclass(3));
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn sparse_is_densified() {
        let d = parse("+1 1:0.5 3:0.2\n", Format::Sparse { dim: Some(4) }, None).unwrap();
        assert_eq!(d.samples()[0].y, Some(1));
        assert_eq!(d.samples()[0].x, vec![0.5, 0.0, 0.2, 0.0]);
    }

    #[test]
    fn malformed_row_names_line() {
        let err = parse("abc,1,2\n", Format::Csv { header: false }, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn inconsistent_dimension() {
        let err = parse("1,0.5\n-1,0.1,0.2\n", Format::Csv { header: false }, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_label() {
        let err = parse("0,0.5\n1,0.1\n", Format::Csv { header: false }, None).unwrap_err();
        assert!(matches!(err, Error::UnknownLabel { line: 1, .. }), "{err}");
        let err = parse("3,0.5\n", Format::Csv { header: false }, Some(Task::Binary)).unwrap_err();
        assert!(matches!(err, Error::UnknownLabel { .. }), "{err}");
    }

    #[test]
    fn sparse_rejects_zero_index_and_small_dim() {
        assert!(parse("1 0:1\n", Format::Sparse { dim: None }, None).is_err());
        assert!(matches!(
            parse("1 5:1\n", Format::Sparse { dim: Some(3) }, None),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
