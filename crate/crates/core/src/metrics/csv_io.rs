use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::FeatureVector;
use crate::error::{Error, Result};

pub const FEATURE_HEADER: [&str; 13] = [
    "id", "project", "class", "method", "nmc", "ptmi", "pet", "nrf", "nrdb", "ernc", "frnc", "pr",
    "sr",
];

/// One row of the feature CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub id: String,
    pub project: String,
    pub class: String,
    pub method: String,
    pub features: FeatureVector,
}

impl FeatureRow {
    pub(crate) fn fields(&self) -> Vec<String> {
        let f = &self.features;
        vec![
            self.id.clone(),
            self.project.clone(),
            self.class.clone(),
            self.method.clone(),
            f.nmc.to_string(),
            f.ptmi.to_string(),
            f.pet.to_string(),
            f.nrf.to_string(),
            f.nrdb.to_string(),
            f.ernc.to_string(),
            f.frnc.to_string(),
            f.pr.to_string(),
            f.sr.to_string(),
        ]
    }

    /// Parse the 13 leading feature-CSV columns of a record.
    pub(crate) fn from_record(rec: &csv::StringRecord, line: usize) -> Result<Self> {
        let get = |i: usize| rec.get(i).unwrap_or_default();
        let count = |i: usize| -> Result<usize> {
            get(i).parse().map_err(|_| Error::MalformedRow {
                line,
                message: format!("column `{}`: `{}` is not a count", FEATURE_HEADER[i], get(i)),
            })
        };
        let ratio = |i: usize| -> Result<f64> {
            match get(i).parse::<f64>() {
                Ok(v) if v.is_finite() && (0.0..=1.0).contains(&v) => Ok(v),
                _ => Err(Error::MalformedRow {
                    line,
                    message: format!(
                        "column `{}`: `{}` is not a ratio in [0, 1]",
                        FEATURE_HEADER[i],
                        get(i)
                    ),
                }),
            }
        };
        for i in 0..4 {
            if get(i).is_empty() {
                return Err(Error::MalformedRow {
                    line,
                    message: format!("column `{}` is empty", FEATURE_HEADER[i]),
                });
            }
        }
        Ok(FeatureRow {
            id: get(0).to_string(),
            project: get(1).to_string(),
            class: get(2).to_string(),
            method: get(3).to_string(),
            features: FeatureVector {
                nmc: count(4)?,
                ptmi: count(5)?,
                pet: ratio(6)?,
                nrf: count(7)?,
                nrdb: count(8)?,
                ernc: count(9)?,
                frnc: count(10)?,
                pr: ratio(11)?,
                sr: ratio(12)?,
            },
        })
    }
}

pub(crate) fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let found: Vec<&str> = found.iter().collect();
    if found == expected {
        return Ok(());
    }
    if let Some(extra) = found.iter().find(|c| !expected.contains(c)) {
        return Err(Error::Schema(format!("unknown column `{extra}`")));
    }
    if let Some(missing) = expected.iter().find(|c| !found.contains(c)) {
        return Err(Error::Schema(format!("missing column `{missing}`")));
    }
    Err(Error::Schema(format!(
        "columns out of order; expected `{}`",
        expected.join(",")
    )))
}

pub fn write_feature_csv<W: Write>(rows: &[FeatureRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FEATURE_HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush().map_err(|e| Error::io("<feature csv>", e))?;
    Ok(())
}

pub fn read_feature_csv<R: Read>(input: R) -> Result<Vec<FeatureRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    check_header(r.headers()?, &FEATURE_HEADER)?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::MalformedRow {
            line,
            message: e.to_string(),
        })?;
        rows.push(FeatureRow::from_record(&rec, line)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let rows = vec![FeatureRow {
            id: "p/C/m".into(),
            project: "p".into(),
            class: "C".into(),
            method: "m".into(),
            features: FeatureVector {
                nmc: 3,
                ptmi: 2,
                pet: 1.0 / 3.0,
                pr: 0.5,
                ..FeatureVector::default()
            },
        }];
        let mut buf = Vec::new();
        write_feature_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,project,class,method,nmc,ptmi,pet,nrf,nrdb,ernc,frnc,pr,sr\n"));
        assert_eq!(read_feature_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let text = "id,project,class,method,nmc,ptmi,pet,nrf,nrdb,ernc,frnc,pr,sr\n\
                    a,p,C,m,1,0,0,0,0,0,0,0,0\n\
                    b,p,C,n,x,0,0,0,0,0,0,0,0\n";
        let err = read_feature_csv(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 3, .. }), "{err}");
        let text = "id,project,class,method,nmc,ptmi,pet,nrf,nrdb,ernc,frnc,pr,sr\n\
                    a,p,C,m,1,0,1.5,0,0,0,0,0,0\n";
        assert!(read_feature_csv(text.as_bytes()).is_err());
        let err = read_feature_csv("id,project\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }
}
