use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::pipelines::Method;
use crate::stats;
use crate::{Error, Result};

pub const COLUMNS: [&str; 10] = [
    "method",
    "M",
    "inv_epsilon",
    "trial",
    "accuracy",
    "noise_norm",
    "beta",
    "solver_iters",
    "runtime_ms",
    "seed",
];

pub const SUMMARY_COLUMNS: [&str; 6] = [
    "method",
    "M",
    "inv_epsilon",
    "trials",
    "mean_accuracy",
    "sd_accuracy",
];

/// One outcome of one (method, M, 1/ε, trial) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub method: Method,
    pub parties: usize,
    pub inv_epsilon: f64,
    pub trial: usize,
    /// Held-out test accuracy.
    pub accuracy: f64,
    pub noise_norm: f64,
    /// Infinite when no noise was added.
    pub beta: f64,
    pub solver_iters: usize,
    pub runtime_ms: u64,
    pub seed: u64,
}

impl ResultRecord {
    fn cell(&self) -> (Method, usize, f64) {
        (self.method, self.parties, self.inv_epsilon)
    }
}

/// Sorts by (method, M, 1/ε, trial).
pub fn sort_canonical(records: &mut [ResultRecord]) {
    records.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.parties.cmp(&b.parties))
            .then(a.inv_epsilon.total_cmp(&b.inv_epsilon))
            .then(a.trial.cmp(&b.trial))
    });
}

/// Writes a header row and one row per record. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_records(records: &[ResultRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in records {
        w.write_record([
            r.method.name().to_string(),
            r.parties.to_string(),
            r.inv_epsilon.to_string(),
            r.trial.to_string(),
            r.accuracy.to_string(),
            r.noise_norm.to_string(),
            r.beta.to_string(),
            r.solver_iters.to_string(),
            r.runtime_ms.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn records_to_string(records: &[ResultRecord]) -> String {
    let mut buf = Vec::new();
    write_records(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, col: usize, line: usize) -> Result<T> {
    let raw = row.get(col).unwrap_or("");
    raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad {} value {raw:?}", COLUMNS[col]),
    })
}

/// Parses the output of [`write_records`]. The header must match exactly.
pub fn read_records(input: impl Read) -> Result<Vec<ResultRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(COLUMNS) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {}", COLUMNS.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let method: String = field(&row, 0, line)?;
        let method = method.parse().map_err(|_| Error::Parse {
            line,
            message: format!("unknown method {method:?}"),
        })?;
        out.push(ResultRecord {
            method,
            parties: field(&row, 1, line)?,
            inv_epsilon: field(&row, 2, line)?,
            trial: field(&row, 3, line)?,
            accuracy: field(&row, 4, line)?,
            noise_norm: field(&row, 5, line)?,
            beta: field(&row, 6, line)?,
            solver_iters: field(&row, 7, line)?,
            runtime_ms: field(&row, 8, line)?,
            seed: field(&row, 9, line)?,
        });
    }
    Ok(out)
}

/// Mean and population standard deviation of one cell's accuracies.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub parties: usize,
    pub inv_epsilon: f64,
    pub trials: usize,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
}

pub fn summarize(records: &[ResultRecord]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<(Method, usize, u64), Vec<f64>> = BTreeMap::new();
    for r in records {
        let (m, p, e) = r.cell();
        // Non-negative floats order like their bit patterns.
        cells
            .entry((m, p, e.to_bits()))
            .or_default()
            .push(r.accuracy);
    }
    cells
        .into_iter()
        .map(|((method, parties, bits), acc)| SummaryRow {
            method,
            parties,
            inv_epsilon: f64::from_bits(bits),
            trials: acc.len(),
            mean_accuracy: stats::mean(&acc),
            sd_accuracy: stats::std_dev(&acc),
        })
        .collect()
}

pub fn write_summary(rows: &[SummaryRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.method.name().to_string(),
            r.parties.to_string(),
            r.inv_epsilon.to_string(),
            r.trials.to_string(),
            r.mean_accuracy.to_string(),
            r.sd_accuracy.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(method: Method, parties: usize, inv: f64, trial: usize, acc: f64) -> ResultRecord {
        ResultRecord {
            method,
            parties,
            inv_epsilon: inv,
            trial,
            accuracy: acc,
            noise_norm: 0.0,
            beta: f64::INFINITY,
            solver_iters: 3,
            runtime_ms: 0,
            seed: 17,
        }
    }

    #[test]
    fn header_is_exact() {
        let s = records_to_string(&[rec(Method::Batch, 10, 0.0, 0, 0.9)]);
        let mut lines = s.lines();
        assert_eq!(
            lines.next().unwrap(),
            "method,M,inv_epsilon,trial,accuracy,noise_norm,beta,solver_iters,runtime_ms,seed"
        );
        assert_eq!(lines.next().unwrap(), "batch,10,0,0,0.9,0,inf,3,0,17");
    }

    #[test]
    fn wrong_header_is_rejected() {
        let err = read_records("method,M\nbatch,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let bad = records_to_string(&[rec(Method::Soft, 1, 1.0, 0, 0.5)]).replace("soft", "sofa");
        assert!(matches!(
            read_records(bad.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn summary_arithmetic() {
        let one = summarize(&[rec(Method::Vote, 5, 1.0, 0, 0.7)]);
        assert_eq!(one[0].sd_accuracy, 0.0);
        let two = summarize(&[
            rec(Method::Vote, 5, 1.0, 0, 0.4),
            rec(Method::Vote, 5, 1.0, 1, 0.6),
        ]);
        assert_eq!(two.len(), 1);
        assert!((two[0].mean_accuracy - 0.5).abs() < 1e-15);
        assert!((two[0].sd_accuracy - 0.1).abs() < 1e-15);
    }

    #[test]
    fn canonical_order() {
        let mut rs = vec![
            rec(Method::Soft, 10, 1.0, 1, 0.0),
            rec(Method::Batch, 100, 0.0, 0, 0.0),
            rec(Method::Soft, 10, 0.1, 0, 0.0),
            rec(Method::Soft, 10, 1.0, 0, 0.0),
            rec(Method::Batch, 10, 0.0, 0, 0.0),
        ];
        sort_canonical(&mut rs);
        let keys: Vec<_> = rs
            .iter()
            .map(|r| (r.method, r.parties, r.inv_epsilon, r.trial))
            .collect();
        assert_eq!(
            keys,
            vec![
                (Method::Batch, 10, 0.0, 0),
                (Method::Batch, 100, 0.0, 0),
                (Method::Soft, 10, 0.1, 0),
                (Method::Soft, 10, 1.0, 0),
                (Method::Soft, 10, 1.0, 1),
            ]
        );
    }

    fn arb_record() -> impl Strategy<Value = ResultRecord> {
        (
            0usize..5,
            1usize..100_000,
            prop_oneof![Just(0.0), 0.0f64..100.0],
            0usize..1000,
            0.0f64..=1.0,
            prop_oneof![Just(0.0), 0.0f64..1e7],
            prop_oneof![Just(f64::INFINITY), 1e-9f64..1e3],
            any::<usize>(),
            any::<u64>(),
            any::<u64>(),
        )
            .prop_map(|(m, p, inv, t, acc, nn, beta, it, ms, seed)| ResultRecord {
                method: Method::ALL[m],
                parties: p,
                inv_epsilon: inv,
                trial: t,
                accuracy: acc,
                noise_norm: nn,
                beta,
                solver_iters: it,
                runtime_ms: ms,
                seed,
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip(records in proptest::collection::vec(arb_record(), 0..40)) {
            let text = records_to_string(&records);
            prop_assert_eq!(read_records(text.as_bytes()).unwrap(), records);
        }
    }
}
