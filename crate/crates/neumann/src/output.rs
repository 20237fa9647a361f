//! Report files. Floats in CSV are written with 17 significant digits;
//! JSON uses the shortest representation that parses back to the same
//! double. Either way a reported value equals the library value exactly.

use std::io::Write;
use std::path::Path;

use neumann_core::harness::TrialRecord;
use serde::Serialize;

use crate::error::CliError;

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `bytes` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| io_err(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

pub const TRIAL_HEADER: [&str; 9] = ["index", "seed", "m", "scheme", "en_x", "en_xstar", "gap", "passed", "angles"];

/// One row per trial; angles are joined with `;`.
pub fn trials_csv(records: &[TrialRecord]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(TRIAL_HEADER).map_err(err)?;
    for r in records {
        let angles: Vec<String> = r.angles.iter().map(|a| fmt_f64(*a)).collect();
        w.write_record([
            r.index.to_string(),
            r.seed.to_string(),
            r.angles.len().to_string(),
            r.scheme.label().to_string(),
            fmt_f64(r.en_x),
            fmt_f64(r.en_xstar),
            fmt_f64(r.gap),
            r.passed.to_string(),
            angles.join(";"),
        ])
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use neumann_core::Scheme;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
    }

    #[test]
    fn csv_rows() {
        let r = TrialRecord {
            index: 0,
            seed: 5,
            angles: vec![0.0, 1.5],
            en_x: 0.25,
            en_xstar: 0.125,
            gap: 0.125,
            scheme: Scheme::Theorem1,
            passed: true,
        };
        let text = String::from_utf8(trials_csv(&[r]).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRIAL_HEADER.join(","));
        let row = lines.next().unwrap();
        assert!(row.starts_with("0,5,2,theorem1,2.5000000000000000e-1,"), "{row}");
    }
}
