//! Ingestion of the normalized Card-Krueger minimum-wage CSV.
//!
//! Expected schema (one row per restaurant, missing values as the literal
//! token `.`):
//!
//! ```text
//! state,empft,emppt,empft2,emppt2,hrsopen,hrsopen2,open,open2,nmgrs,nmgrs2,
//! nregs,nregs2,inctime,inctime2,psoda,psoda2,pentree,pentree2
//! ```
//!
//! `state` is `NJ` (treatment) or `PA` (control); `1`/`0` are accepted as
//! aliases. Wave-1 columns carry the pre-rise survey, `*2` columns the
//! post-rise survey.

use std::path::Path;

use crate::error::{Error, Result};
use crate::measure::EmpiricalMeasure;

/// Base column names selectable for analysis; each has a wave-2 twin with a
/// `2` suffix in the file.
pub const ALL_COLUMNS: [&str; 9] = [
    "empft", "emppt", "hrsopen", "open", "nmgrs", "nregs", "inctime", "psoda", "pentree",
];

/// The 2D full-time / part-time selection.
pub const FT_PT_COLUMNS: [&str; 2] = ["empft", "emppt"];

/// Columns that are counts and must be nonnegative when present.
const COUNT_COLUMNS: [&str; 4] = ["empft", "emppt", "nmgrs", "nregs"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum State {
    NewJersey, // treatment
    Pennsylvania, // control
}

/// One parsed restaurant row: wave-1 and wave-2 values per base column,
/// any of which may be missing.
#[derive(Debug, Clone)]
pub struct RestaurantRecord {
    pub state: State,
    /// Indexed like [`ALL_COLUMNS`]; `[wave1, wave2]`.
    pub values: [[Option<f64>; 2]; 9],
}

impl RestaurantRecord {
    pub fn get(&self, column: &str, wave: usize) -> Result<Option<f64>> {
        let idx = column_index(column)?;
        Ok(self.values[idx][wave])
    }
}

fn column_index(name: &str) -> Result<usize> {
    ALL_COLUMNS
        .iter()
        .position(|&c| c == name)
        .ok_or_else(|| Error::invalid(format!("unknown column name: {name:?}")))
}

/// The four measures of one CK analysis over a column selection.
#[derive(Debug, Clone)]
pub struct CKDataset {
    pub y0c: EmpiricalMeasure,
    pub y1c: EmpiricalMeasure,
    pub y0t: EmpiricalMeasure,
    pub y1t: EmpiricalMeasure,
    pub columns: Vec<String>,
}

impl CKDataset {
    pub fn control_count(&self) -> usize {
        self.y0c.len()
    }

    pub fn treatment_count(&self) -> usize {
        self.y0t.len()
    }

    pub fn dim(&self) -> usize {
        self.y0c.dim()
    }
}

/// Full-time equivalent employment: `FT + 0.5 * PT`.
pub fn fte(ft: f64, pt: f64) -> Result<f64> {
    if ft < 0.0 || pt < 0.0 {
        return Err(Error::invalid(format!(
            "FT and PT must be nonnegative, got ({ft}, {pt})"
        )));
    }
    Ok(ft + 0.5 * pt)
}

fn parse_field(field: &str, line: usize, name: &str) -> Result<Option<f64>> {
    let t = field.trim();
    if t.is_empty() || t == "." {
        return Ok(None);
    }
    t.parse::<f64>()
        .map(Some)
        .map_err(|e| Error::Parse {
            line,
            message: format!("column {name}: {t:?}: {e}"),
        })
}

/// Parses the normalized CSV into per-restaurant records.
pub fn read_records(path: &Path) -> Result<Vec<RestaurantRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::invalid(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_ascii_lowercase())
        .collect();
    let col_pos = |name: &str, line: usize| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or(Error::Parse {
                line,
                message: format!("missing column {name:?} in header"),
            })
    };
    let state_pos = col_pos("state", 1)?;
    let mut positions = [[0usize; 2]; 9];
    for (i, base) in ALL_COLUMNS.iter().enumerate() {
        positions[i][0] = col_pos(base, 1)?;
        positions[i][1] = col_pos(&format!("{base}2"), 1)?;
    }

    let mut records = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let state = match row
            .get(state_pos)
            .map(|s| s.trim().to_ascii_uppercase())
            .as_deref()
        {
            Some("NJ") | Some("1") => State::NewJersey,
            Some("PA") | Some("0") => State::Pennsylvania,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unrecognized state {other:?}"),
                })
            }
        };
        let mut values = [[None; 2]; 9];
        for (i, base) in ALL_COLUMNS.iter().enumerate() {
            for wave in 0..2 {
                let pos = positions[i][wave];
                let field = row.get(pos).ok_or(Error::Parse {
                    line,
                    message: format!("row too short for column {base}"),
                })?;
                let v = parse_field(field, line, base)?;
                if let Some(x) = v {
                    if x < 0.0 && COUNT_COLUMNS.contains(base) {
                        return Err(Error::Parse {
                            line,
                            message: format!("negative count in column {base}: {x}"),
                        });
                    }
                }
                values[i][wave] = v;
            }
        }
        records.push(RestaurantRecord { state, values });
    }
    Ok(records)
}

/// Loads the dataset over a column selection, dropping any restaurant with
/// a missing value in a selected column at either wave.
pub fn load_ck(path: &Path, columns: &[&str]) -> Result<CKDataset> {
    if columns.is_empty() {
        return Err(Error::invalid("column selection must be non-empty"));
    }
    let indices: Vec<usize> = columns
        .iter()
        .map(|c| column_index(c))
        .collect::<Result<_>>()?;

    let records = read_records(path)?;
    let mut control = [Vec::new(), Vec::new()]; // wave -> points
    let mut treatment = [Vec::new(), Vec::new()];
    for rec in &records {
        let complete = indices
            .iter()
            .all(|&i| rec.values[i][0].is_some() && rec.values[i][1].is_some());
        if !complete {
            continue;
        }
        for wave in 0..2 {
            let point: Vec<f64> = indices.iter().map(|&i| rec.values[i][wave].unwrap()).collect();
            match rec.state {
                State::Pennsylvania => control[wave].push(point),
                State::NewJersey => treatment[wave].push(point),
            }
        }
    }
    if control[0].is_empty() || treatment[0].is_empty() {
        return Err(Error::invalid(
            "no complete rows for one of the groups after missing-value filtering",
        ));
    }
    Ok(CKDataset {
        y0c: EmpiricalMeasure::uniform(control[0].clone())?,
        y1c: EmpiricalMeasure::uniform(control[1].clone())?,
        y0t: EmpiricalMeasure::uniform(treatment[0].clone())?,
        y1t: EmpiricalMeasure::uniform(treatment[1].clone())?,
        columns: columns.iter().map(|c| c.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const HEADER: &str = "state,empft,emppt,empft2,emppt2,hrsopen,hrsopen2,open,open2,nmgrs,nmgrs2,nregs,nregs2,inctime,inctime2,psoda,psoda2,pentree,pentree2";

    fn write_fixture(rows: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "{HEADER}").unwrap();
        for r in rows {
            writeln!(f, "{r}").unwrap();
        }
        f
    }

    #[test]
    fn fte_definition() {
        assert_eq!(fte(10.0, 4.0).unwrap(), 12.0);
        assert_eq!(fte(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(fte(3.0, 1.0).unwrap(), 3.5);
        assert!(fte(-1.0, 0.0).is_err());
    }

    #[test]
    fn loads_and_splits_groups() {
        let f = write_fixture(&[
            "NJ,10,5,11,6,70,70,1,1,3,3,2,2,20,20,1.05,1.10,2.90,2.95",
            "PA,8,4,9,5,60,60,1,1,2,2,3,3,15,15,1.00,1.05,2.80,2.85",
            "NJ,12,2,12,3,72,72,1,1,4,4,2,2,25,25,1.10,1.15,3.00,3.05",
        ]);
        let ds = load_ck(f.path(), &ALL_COLUMNS).unwrap();
        assert_eq!(ds.control_count(), 1);
        assert_eq!(ds.treatment_count(), 2);
        assert_eq!(ds.dim(), 9);
        assert_eq!(ds.y0t.point(0)[0], 10.0);
        assert_eq!(ds.y1t.point(0)[1], 6.0);
    }

    #[test]
    fn missing_value_in_either_wave_drops_row() {
        let f = write_fixture(&[
            // missing emppt2 (wave 2): dropped
            "NJ,10,5,11,.,70,70,1,1,3,3,2,2,20,20,1.05,1.10,2.90,2.95",
            "NJ,12,2,12,3,72,72,1,1,4,4,2,2,25,25,1.10,1.15,3.00,3.05",
            "PA,8,4,9,5,60,60,1,1,2,2,3,3,15,15,1.00,1.05,2.80,2.85",
        ]);
        let ds = load_ck(f.path(), &FT_PT_COLUMNS).unwrap();
        assert_eq!(ds.treatment_count(), 1);
        assert_eq!(ds.control_count(), 1);
    }

    #[test]
    fn superset_selection_never_keeps_more_rows() {
        let f = write_fixture(&[
            "NJ,10,5,11,6,.,70,1,1,3,3,2,2,20,20,1.05,1.10,2.90,2.95",
            "NJ,12,2,12,3,72,72,1,1,4,4,2,2,25,25,1.10,1.15,3.00,3.05",
            "PA,8,4,9,5,60,60,1,1,2,2,3,3,15,15,1.00,1.05,2.80,2.85",
        ]);
        let small = load_ck(f.path(), &FT_PT_COLUMNS).unwrap();
        let big = load_ck(f.path(), &ALL_COLUMNS).unwrap();
        assert!(big.treatment_count() <= small.treatment_count());
        assert_eq!(small.treatment_count(), 2);
        assert_eq!(big.treatment_count(), 1);
    }

    #[test]
    fn empty_selection_rejected() {
        let f = write_fixture(&["PA,8,4,9,5,60,60,1,1,2,2,3,3,15,15,1.00,1.05,2.80,2.85"]);
        assert!(load_ck(f.path(), &[]).is_err());
    }

    #[test]
    fn unknown_column_rejected() {
        let f = write_fixture(&["PA,8,4,9,5,60,60,1,1,2,2,3,3,15,15,1.00,1.05,2.80,2.85"]);
        assert!(load_ck(f.path(), &["wages"]).is_err());
    }

    #[test]
    fn malformed_row_reports_line() {
        let f = write_fixture(&[
            "PA,8,4,9,5,60,60,1,1,2,2,3,3,15,15,1.00,1.05,2.80,2.85",
            "NJ,abc,5,11,6,70,70,1,1,3,3,2,2,20,20,1.05,1.10,2.90,2.95",
        ]);
        match load_ck(f.path(), &FT_PT_COLUMNS) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn negative_count_rejected() {
        let f = write_fixture(&["NJ,-1,5,11,6,70,70,1,1,3,3,2,2,20,20,1.05,1.10,2.90,2.95"]);
        assert!(load_ck(f.path(), &FT_PT_COLUMNS).is_err());
    }

    #[test]
    fn reload_determinism() {
        let f = write_fixture(&[
            "NJ,10,5,11,6,70,70,1,1,3,3,2,2,20,20,1.05,1.10,2.90,2.95",
            "PA,8,4,9,5,60,60,1,1,2,2,3,3,15,15,1.00,1.05,2.80,2.85",
        ]);
        let a = load_ck(f.path(), &ALL_COLUMNS).unwrap();
        let b = load_ck(f.path(), &ALL_COLUMNS).unwrap();
        assert_eq!(a.y0c, b.y0c);
        assert_eq!(a.y1t, b.y1t);
    }
}
