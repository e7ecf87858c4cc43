// SPDX-License-Identifier: Apache-2.0

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::features::{feature_names, FeatureVector, SCHEMA_VERSION};

pub const POWER_COLUMN: &str = "power_uW";
pub const TNS_COLUMN: &str = "tns_ns";
/// Optional leading column naming the design.
pub const DESIGN_COLUMN: &str = "design";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub design: Option<String>,
    pub features: FeatureVector,
    pub power_uw: f64,
    /// Stored as an absolute value.
    pub tns_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema_version: u32,
    pub rows: Vec<Row>,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("header does not match feature schema v{version}: {detail}")]
    Header { version: u32, detail: String },
    #[error("line {line}: column '{column}': {detail}")]
    Value { line: u64, column: String, detail: String },
}

/// Parse a dataset CSV whose header is the feature names followed by
/// `power_uW,tns_ns`, optionally preceded by a `design` column.
pub fn read_dataset_csv(reader: impl Read) -> Result<Dataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let offset = usize::from(header.first().map(String::as_str) == Some(DESIGN_COLUMN));
    let mut expected: Vec<&str> = feature_names();
    expected.push(POWER_COLUMN);
    expected.push(TNS_COLUMN);
    let got: Vec<&str> = header[offset..].iter().map(String::as_str).collect();
    if got != expected {
        let detail = match got.iter().zip(&expected).position(|(a, b)| a != b) {
            Some(i) => format!("column {} is '{}', expected '{}'", i + offset + 1, got[i], expected[i]),
            None => format!("{} columns, expected {}", got.len(), expected.len()),
        };
        return Err(DatasetError::Header {
            version: SCHEMA_VERSION,
            detail,
        });
    }
    let n_features = expected.len() - 2;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut nums = Vec::with_capacity(expected.len());
        for (i, name) in expected.iter().enumerate() {
            let cell = rec.get(i + offset).unwrap_or("");
            let v: f64 = cell.parse().map_err(|_| DatasetError::Value {
                line,
                column: name.to_string(),
                detail: format!("'{}' is not a number", cell),
            })?;
            nums.push(v);
        }
        let tns = nums.pop().expect("tns column");
        let power = nums.pop().expect("power column");
        debug_assert_eq!(nums.len(), n_features);
        let features = FeatureVector::from_values(nums).map_err(|e| DatasetError::Value {
            line,
            column: "features".into(),
            detail: e.to_string(),
        })?;
        rows.push(Row {
            design: if offset == 1 { rec.get(0).map(str::to_string) } else { None },
            features,
            power_uw: power,
            tns_ns: tns.abs(),
        });
    }
    Ok(Dataset {
        schema_version: SCHEMA_VERSION,
        rows,
    })
}

pub fn load_dataset_csv(path: &Path) -> Result<Dataset, DatasetError> {
    read_dataset_csv(std::fs::File::open(path)?)
}

pub fn write_dataset_csv(data: &Dataset, writer: impl Write) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(writer);
    let with_design = data.rows.iter().any(|r| r.design.is_some());
    let mut header: Vec<&str> = Vec::new();
    if with_design {
        header.push(DESIGN_COLUMN);
    }
    header.extend(feature_names());
    header.push(POWER_COLUMN);
    header.push(TNS_COLUMN);
    w.write_record(&header)?;
    for r in &data.rows {
        let mut rec: Vec<String> = Vec::with_capacity(header.len());
        if with_design {
            rec.push(r.design.clone().unwrap_or_default());
        }
        rec.extend(r.features.values.iter().map(|v| v.to_string()));
        rec.push(r.power_uw.to_string());
        rec.push(r.tns_ns.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FEATURE_COUNT;

    #[test]
    fn csv_round_trip() {
        let mut values = vec![0.0; FEATURE_COUNT];
        values[3] = 16.0;
        values[27] = 1.25;
        let d = Dataset {
            schema_version: SCHEMA_VERSION,
            rows: vec![Row {
                design: Some("adder".into()),
                features: FeatureVector::from_values(values).unwrap(),
                power_uw: 35.5,
                tns_ns: 0.125,
            }],
        };
        let mut buf = Vec::new();
        write_dataset_csv(&d, &mut buf).unwrap();
        let back = read_dataset_csv(buf.as_slice()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn bad_header_is_rejected() {
        let err = read_dataset_csv("a,b,c\n1,2,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DatasetError::Header { .. }));
    }

    #[test]
    fn negative_tns_is_stored_absolute() {
        let mut header: Vec<&str> = feature_names();
        header.extend([POWER_COLUMN, TNS_COLUMN]);
        let mut row = vec!["0"; FEATURE_COUNT];
        row[27] = "1";
        let text = format!("{}\n{},10,-0.3\n", header.join(","), row.join(","));
        let d = read_dataset_csv(text.as_bytes()).unwrap();
        assert_eq!(d.rows[0].tns_ns, 0.3);
    }
}
