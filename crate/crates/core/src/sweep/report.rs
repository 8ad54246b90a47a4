//! Sweep reports on disk: a CSV of rows plus a JSON sidecar with the fit.

use super::{SweepError, SweepReport, SweepRow};
use crate::lineintegral::QuadratureSpec;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: &str = "k,l,h,abs_I,re_I,im_I";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    experiment: super::Experiment,
    slope: Option<f64>,
    #[serde(rename = "intercept_logC")]
    intercept_log_c: Option<f64>,
    r_squared: Option<f64>,
    delta0: Option<f64>,
    quadrature: QuadratureSpec,
}

/// Sidecar path for a CSV path: same stem, `.json` extension.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `contents` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.k, r.l, r.h, r.abs_i, r.re_i, r.im_i);
    }
    out
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> SweepError {
    SweepError::Malformed {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

pub fn parse_csv(path: &Path, text: &str) -> Result<Vec<SweepRow>, SweepError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == CSV_HEADER => {}
        Some(h) => return Err(malformed(path, 1, format!("expected header `{CSV_HEADER}`, found `{h}`"))),
        None => return Err(malformed(path, 1, "missing header")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(malformed(path, lineno, format!("expected 6 fields, found {}", fields.len())));
        }
        let int = |j: usize, name: &str| {
            fields[j]
                .parse::<u32>()
                .map_err(|_| malformed(path, lineno, format!("field `{name}`: bad integer `{}`", fields[j])))
        };
        let real = |j: usize, name: &str| {
            fields[j]
                .parse::<f64>()
                .map_err(|_| malformed(path, lineno, format!("field `{name}`: bad number `{}`", fields[j])))
        };
        rows.push(SweepRow {
            k: int(0, "k")?,
            l: int(1, "l")?,
            h: real(2, "h")?,
            abs_i: real(3, "abs_I")?,
            re_i: real(4, "re_I")?,
            im_i: real(5, "im_I")?,
        });
    }
    Ok(rows)
}

/// Saves rows to `csv_path` and the fit metadata next to it.
pub fn save_report(report: &SweepReport, csv_path: &Path) -> Result<(), SweepError> {
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let sidecar = Sidecar {
        experiment: report.experiment,
        slope: report.slope,
        intercept_log_c: report.intercept_log_c,
        r_squared: report.r_squared,
        delta0: report.delta0,
        quadrature: report.quadrature,
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    write_atomic(csv_path, &rows_to_csv(&report.rows))?;
    write_atomic(&sidecar_path(csv_path), &(json + "\n"))?;
    Ok(())
}

pub fn load_report(csv_path: &Path) -> Result<SweepReport, SweepError> {
    let text = fs::read_to_string(csv_path)?;
    let rows = parse_csv(csv_path, &text)?;
    let json_path = sidecar_path(csv_path);
    let json = fs::read_to_string(&json_path)?;
    let sidecar: Sidecar = serde_json::from_str(&json).map_err(|e| malformed(&json_path, e.line(), e.to_string()))?;
    Ok(SweepReport {
        experiment: sidecar.experiment,
        rows,
        slope: sidecar.slope,
        intercept_log_c: sidecar.intercept_log_c,
        r_squared: sidecar.r_squared,
        delta0: sidecar.delta0,
        quadrature: sidecar.quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::Experiment;

    fn sample() -> SweepReport {
        SweepReport {
            experiment: Experiment::TesseralCaustic,
            rows: vec![
                SweepRow { k: 25, l: 50, h: 0.019802950859533486, abs_i: 0.1234567890123, re_i: -0.1, im_i: 0.07207 },
                SweepRow { k: 50, l: 100, h: 0.00995037190209989, abs_i: 1e-17, re_i: 1e-17, im_i: -0.0 },
            ],
            slope: Some(0.4999999999999),
            intercept_log_c: Some(-1.25),
            r_squared: Some(0.987654321),
            delta0: Some(0.3),
            quadrature: QuadratureSpec::default(),
        }
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out/report.csv");
        let report = sample();
        save_report(&report, &path).unwrap();
        assert_eq!(load_report(&path).unwrap(), report);
        let json = fs::read_to_string(dir.path().join("out/report.json")).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let mut keys: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["delta0", "experiment", "intercept_logC", "quadrature", "r_squared", "slope"]);
        assert_eq!(value["experiment"], "tesseral-caustic");
        assert!(fs::read_to_string(&path).unwrap().starts_with("k,l,h,abs_I,re_I,im_I\n"));
    }

    #[test]
    fn empty_report() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let report = SweepReport {
            rows: vec![],
            slope: None,
            intercept_log_c: None,
            r_squared: None,
            ..sample()
        };
        save_report(&report, &path).unwrap();
        let loaded = load_report(&path).unwrap();
        assert_eq!(loaded, report);
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        assert!(json["slope"].is_null());
    }

    #[test]
    fn truncated_csv_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        save_report(&sample(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let cut = &text[..text.len() - 12];
        fs::write(&path, cut).unwrap();
        let err = load_report(&path).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn bad_field_named() {
        let err = parse_csv(Path::new("x.csv"), "k,l,h,abs_I,re_I,im_I\n1,2,0.5,abc,0,0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("abs_I"), "{msg}");
        assert!(parse_csv(Path::new("x.csv"), "k,h\n").is_err());
    }
}
