//! Daily Level-1B style accelerometer files.
//!
//! A file is an opaque text header closed by a terminator line (by default
//! `END OF HEADER`) followed by whitespace-separated records, one sample per
//! line. Which column holds what is described by [`AccSchema`]; the defaults
//! follow the ACC1B ASCII layout:
//!
//! ```text
//! gps_time GRACEID lin_accl_x lin_accl_y lin_accl_z ang_accl_x ang_accl_y ang_accl_z acl_x_res acl_y_res acl_z_res qualflg
//! ```

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_HEADER_TERMINATOR: &str = "END OF HEADER";

/// Satellite of the twin pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SatId {
    A,
    B,
}

impl fmt::Display for SatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SatId::A => "A",
            SatId::B => "B",
        })
    }
}

impl FromStr for SatId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "A" | "a" => Ok(SatId::A),
            "B" | "b" => Ok(SatId::B),
            other => Err(format!("unknown satellite id `{other}`")),
        }
    }
}

/// Accelerometer axis in the science reference frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(format!("unknown axis `{other}`")),
        }
    }
}

/// One 1 Hz accelerometer sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccSample {
    /// Seconds past 2000-01-01T12:00:00 GPS time.
    pub gps_time: u64,
    pub sat_id: SatId,
    /// Linear acceleration, m/s².
    pub lin_acc: [f64; 3],
    /// Set when the configured quality-flag column marks the record bad.
    pub flagged: bool,
}

/// Column layout of the data records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccSchema {
    pub header_terminator: String,
    pub time_column: usize,
    pub sat_column: usize,
    pub acc_columns: [usize; 3],
    /// Column holding the quality flag; any character other than `0` marks the record bad.
    pub quality_flag_column: Option<usize>,
}

impl Default for AccSchema {
    fn default() -> Self {
        AccSchema {
            header_terminator: DEFAULT_HEADER_TERMINATOR.to_string(),
            time_column: 0,
            sat_column: 1,
            acc_columns: [2, 3, 4],
            quality_flag_column: None,
        }
    }
}

impl AccSchema {
    fn min_columns(&self) -> usize {
        let mut max = self.time_column.max(self.sat_column);
        for c in self.acc_columns {
            max = max.max(c);
        }
        if let Some(q) = self.quality_flag_column {
            max = max.max(q);
        }
        max + 1
    }
}

/// One satellite-day of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyAccFile {
    pub sat_id: SatId,
    pub date: NaiveDate,
    pub samples: Vec<AccSample>,
    pub header_lines: Vec<String>,
}

fn gps_epoch() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2000, 1, 1)
        .and_then(|d| d.and_hms_opt(12, 0, 0))
        .expect("valid epoch")
}

/// Calendar date of a GPS timestamp (seconds past 2000-01-01T12:00:00).
pub fn gps_date(gps_time: u64) -> NaiveDate {
    (gps_epoch() + Duration::seconds(gps_time as i64)).date()
}

/// GPS seconds at 00:00:00 of `date`.
pub fn gps_seconds_at_midnight(date: NaiveDate) -> u64 {
    let midnight = date.and_hms_opt(0, 0, 0).expect("valid time");
    (midnight - gps_epoch()).num_seconds().max(0) as u64
}

/// Reads and parses a day file from disk.
pub fn parse_acc1b(path: impl AsRef<Path>, schema: &AccSchema) -> Result<DailyAccFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_acc1b_str(&text, path, schema)
}

/// Parses day-file contents; `origin` is only used for error messages.
pub fn parse_acc1b_str(text: &str, origin: &Path, schema: &AccSchema) -> Result<DailyAccFile> {
    let malformed = |line_no: usize, reason: String| Error::MalformedRecord {
        path: origin.to_path_buf(),
        line_no,
        reason,
    };

    let mut lines = text.lines().enumerate();
    let mut header_lines = Vec::new();
    let mut terminated = false;
    for (_, line) in lines.by_ref() {
        if line.trim_end() == schema.header_terminator {
            terminated = true;
            break;
        }
        header_lines.push(line.to_string());
    }
    if !terminated {
        return Err(Error::MissingHeaderTerminator {
            path: origin.to_path_buf(),
            terminator: schema.header_terminator.clone(),
        });
    }

    let min_columns = schema.min_columns();
    let mut samples: Vec<AccSample> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < min_columns {
            return Err(malformed(
                line_no,
                format!("{} columns, schema needs {}", fields.len(), min_columns),
            ));
        }
        let gps_time: u64 = fields[schema.time_column].parse().map_err(|_| {
            malformed(
                line_no,
                format!("bad gps_time `{}`", fields[schema.time_column]),
            )
        })?;
        let sat_id: SatId = fields[schema.sat_column]
            .parse()
            .map_err(|e: String| malformed(line_no, e))?;
        let mut lin_acc = [0.0; 3];
        for (k, &col) in schema.acc_columns.iter().enumerate() {
            let v: f64 = fields[col]
                .parse()
                .map_err(|_| malformed(line_no, format!("bad acceleration `{}`", fields[col])))?;
            if !v.is_finite() {
                return Err(malformed(
                    line_no,
                    format!("non-finite acceleration `{}`", fields[col]),
                ));
            }
            lin_acc[k] = v;
        }
        let flagged = schema
            .quality_flag_column
            .map(|q| fields[q].chars().any(|c| c != '0'))
            .unwrap_or(false);

        if let Some(prev) = samples.last() {
            if gps_time <= prev.gps_time {
                return Err(Error::NonMonotonicTime {
                    path: origin.to_path_buf(),
                    line_no,
                });
            }
            if sat_id != prev.sat_id {
                return Err(malformed(
                    line_no,
                    format!("satellite {sat_id} in a {} file", prev.sat_id),
                ));
            }
        }
        samples.push(AccSample {
            gps_time,
            sat_id,
            lin_acc,
            flagged,
        });
    }

    let first = samples.first().ok_or_else(|| Error::NoRecords {
        path: origin.to_path_buf(),
    })?;
    Ok(DailyAccFile {
        sat_id: first.sat_id,
        date: gps_date(first.gps_time),
        samples,
        header_lines,
    })
}

impl DailyAccFile {
    /// Number of flagged records.
    pub fn flagged_count(&self) -> usize {
        self.samples.iter().filter(|s| s.flagged).count()
    }

    /// `A_2005-05-30` style label.
    pub fn label(&self) -> String {
        format!("{}_{}", self.sat_id, self.date)
    }

    /// Renders the file back to text in `schema`'s layout. Columns not covered by
    /// the schema are filled with `0`.
    pub fn to_acc1b_string(&self, schema: &AccSchema) -> String {
        let mut out = String::new();
        for h in &self.header_lines {
            out.push_str(h);
            out.push('\n');
        }
        out.push_str(&schema.header_terminator);
        out.push('\n');
        let ncols = schema.min_columns();
        let mut fields = vec![String::new(); ncols];
        for s in &self.samples {
            fields.iter_mut().for_each(|f| *f = "0".to_string());
            fields[schema.time_column] = s.gps_time.to_string();
            fields[schema.sat_column] = s.sat_id.to_string();
            for (k, &col) in schema.acc_columns.iter().enumerate() {
                fields[col] = format!("{:e}", s.lin_acc[k]);
            }
            if let Some(q) = schema.quality_flag_column {
                fields[q] = if s.flagged { "00000001" } else { "00000000" }.to_string();
            }
            out.push_str(&fields.join(" "));
            out.push('\n');
        }
        out
    }

    /// Writes `gps_time,sat_id,acc_x,acc_y,acc_z`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = String::with_capacity(self.samples.len() * 64);
        buf.push_str("gps_time,sat_id,acc_x,acc_y,acc_z\n");
        for s in &self.samples {
            buf.push_str(&format!(
                "{},{},{:e},{:e},{:e}\n",
                s.gps_time, s.sat_id, s.lin_acc[0], s.lin_acc[1], s.lin_acc[2]
            ));
        }
        write_file(path, buf.as_bytes())
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Where a series is in the preparation chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Raw,
    Cleaned,
    Scaled,
    Downsampled,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Raw => "raw",
            Stage::Cleaned => "cleaned",
            Stage::Scaled => "scaled",
            Stage::Downsampled => "downsampled",
        })
    }
}

/// A single axis of one satellite-day at some stage of preparation.
///
/// `provenance` lists every stage applied so far, starting with [`Stage::Raw`];
/// `stage()` is its last entry. Each non-raw stage may appear at most once.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSeries {
    pub sat_id: SatId,
    pub axis: Axis,
    values: Vec<f64>,
    sample_interval_s: f64,
    provenance: Vec<Stage>,
}

impl AxisSeries {
    pub fn new(
        sat_id: SatId,
        axis: Axis,
        values: Vec<f64>,
        sample_interval_s: f64,
    ) -> Result<Self> {
        validate_values(&values)?;
        if !(sample_interval_s > 0.0 && sample_interval_s.is_finite()) {
            return Err(Error::Config(format!(
                "sample interval must be positive, got {sample_interval_s}"
            )));
        }
        Ok(AxisSeries {
            sat_id,
            axis,
            values,
            sample_interval_s,
            provenance: vec![Stage::Raw],
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn stage(&self) -> Stage {
        *self.provenance.last().expect("provenance starts with raw")
    }

    pub fn provenance(&self) -> &[Stage] {
        &self.provenance
    }

    pub fn sample_interval_s(&self) -> f64 {
        self.sample_interval_s
    }

    pub fn has_stage(&self, stage: Stage) -> bool {
        self.provenance.contains(&stage)
    }

    /// Same metadata, new values, `stage` appended to the provenance.
    pub(crate) fn advance(
        &self,
        stage: Stage,
        values: Vec<f64>,
        sample_interval_s: f64,
    ) -> Result<Self> {
        if stage == Stage::Raw || self.has_stage(stage) {
            return Err(Error::StageOrder {
                stage: stage.to_string(),
                history: self.provenance.iter().map(|s| s.to_string()).collect(),
            });
        }
        validate_values(&values)?;
        let mut provenance = self.provenance.clone();
        provenance.push(stage);
        Ok(AxisSeries {
            sat_id: self.sat_id,
            axis: self.axis,
            values,
            sample_interval_s,
            provenance,
        })
    }

    /// Same metadata and provenance, different values (used for split halves).
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        validate_values(&values)?;
        Ok(AxisSeries {
            values,
            ..self.clone()
        })
    }

    /// Drops the last occurrence of `stage` from the provenance (inverse scaling).
    pub(crate) fn retreat(&self, stage: Stage, values: Vec<f64>) -> Result<Self> {
        validate_values(&values)?;
        let mut provenance = self.provenance.clone();
        match provenance.iter().rposition(|s| *s == stage) {
            Some(pos) => {
                provenance.remove(pos);
            }
            None => {
                return Err(Error::StageOrder {
                    stage: format!("inverse of {stage}"),
                    history: self.provenance.iter().map(|s| s.to_string()).collect(),
                })
            }
        }
        Ok(AxisSeries {
            values,
            provenance,
            ..self.clone()
        })
    }

    /// Restores a series with an explicit provenance, e.g. when reading staged files back.
    pub fn from_parts(
        sat_id: SatId,
        axis: Axis,
        values: Vec<f64>,
        sample_interval_s: f64,
        provenance: Vec<Stage>,
    ) -> Result<Self> {
        let mut s = AxisSeries::new(sat_id, axis, values, sample_interval_s)?;
        if provenance.first() != Some(&Stage::Raw) {
            return Err(Error::StageOrder {
                stage: "raw".into(),
                history: provenance.iter().map(|s| s.to_string()).collect(),
            });
        }
        for (i, st) in provenance.iter().enumerate().skip(1) {
            if *st == Stage::Raw || provenance[..i].contains(st) {
                return Err(Error::StageOrder {
                    stage: st.to_string(),
                    history: provenance[..i].iter().map(|s| s.to_string()).collect(),
                });
            }
        }
        s.provenance = provenance;
        Ok(s)
    }
}

fn validate_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("series value {v}")));
    }
    Ok(())
}

/// Raw series of one acceleration component, sampled at 1 s.
pub fn extract_axis(day: &DailyAccFile, axis: Axis) -> Result<AxisSeries> {
    let values = day
        .samples
        .iter()
        .map(|s| s.lin_acc[axis.index()])
        .collect();
    AxisSeries::new(day.sat_id, axis, values, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
HEADER LINE ONE
PRODUCER AGENCY : TEST
END OF HEADER
170683200 A -1.1e-07 2.5e-06 -3.0e-07 0 0 0 0 0 0 00000000
170683201 A -1.2e-07 2.6e-06 -3.1e-07 0 0 0 0 0 0 00000000
170683202 A -1.3e-07 2.7e-06 -3.2e-07 0 0 0 0 0 0 00000010
";

    fn parse(text: &str, schema: &AccSchema) -> Result<DailyAccFile> {
        parse_acc1b_str(text, Path::new("test.asc"), schema)
    }

    #[test]
    fn parses_three_records() {
        let day = parse(SMALL, &AccSchema::default()).unwrap();
        assert_eq!(day.samples.len(), 3);
        assert_eq!(day.sat_id, SatId::A);
        assert_eq!(day.header_lines.len(), 2);
        assert_eq!(day.samples[1].lin_acc, [-1.2e-07, 2.6e-06, -3.1e-07]);
        assert_eq!(day.flagged_count(), 0);
        assert_eq!(day.date, NaiveDate::from_ymd_opt(2005, 5, 30).unwrap());
    }

    #[test]
    fn quality_flag_marks_but_keeps() {
        let schema = AccSchema {
            quality_flag_column: Some(11),
            ..AccSchema::default()
        };
        let day = parse(SMALL, &schema).unwrap();
        assert_eq!(day.samples.len(), 3);
        assert!(day.samples[2].flagged);
        assert_eq!(day.flagged_count(), 1);
    }

    #[test]
    fn missing_terminator() {
        let text = "HEADER\n170683200 A 1 2 3\n";
        assert!(matches!(
            parse(text, &AccSchema::default()),
            Err(Error::MissingHeaderTerminator { .. })
        ));
    }

    #[test]
    fn short_record_reports_line() {
        let text = "END OF HEADER\n170683200 A 1 2 3\n170683201 A 1 2\n";
        match parse(text, &AccSchema::default()) {
            Err(Error::MalformedRecord { line_no, .. }) => assert_eq!(line_no, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_monotonic_time() {
        let text = "END OF HEADER\n10 A 1 2 3\n12 A 1 2 3\n12 A 1 2 3\n";
        match parse(text, &AccSchema::default()) {
            Err(Error::NonMonotonicTime { line_no, .. }) => assert_eq!(line_no, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn custom_terminator_and_columns() {
        let text = "# meta\n---\nB 3.0 100 1.0 2.0\n";
        let schema = AccSchema {
            header_terminator: "---".into(),
            time_column: 2,
            sat_column: 0,
            acc_columns: [1, 3, 4],
            quality_flag_column: None,
        };
        let day = parse(text, &schema).unwrap();
        assert_eq!(day.samples[0].gps_time, 100);
        assert_eq!(day.samples[0].lin_acc, [3.0, 1.0, 2.0]);
        assert_eq!(day.sat_id, SatId::B);
    }

    #[test]
    fn extract_axis_projects_components() {
        let day = parse(SMALL, &AccSchema::default()).unwrap();
        let x = extract_axis(&day, Axis::X).unwrap();
        assert_eq!(x.values(), &[-1.1e-07, -1.2e-07, -1.3e-07]);
        assert_eq!(x.stage(), Stage::Raw);
        assert_eq!(x.sample_interval_s(), 1.0);
        let y = extract_axis(&day, Axis::Y).unwrap();
        assert_eq!(y.values(), &[2.5e-06, 2.6e-06, 2.7e-06]);
        assert_eq!(y.len(), day.samples.len());
    }

    #[test]
    fn gps_midnight_round_trip() {
        let d = NaiveDate::from_ymd_opt(2005, 5, 30).unwrap();
        let t = gps_seconds_at_midnight(d);
        assert_eq!(t, 170_726_400 - 43_200);
        assert_eq!(gps_date(t), d);
        assert_eq!(gps_date(t + 86_399), d);
    }

    #[test]
    fn stage_cannot_repeat() {
        let s = AxisSeries::new(SatId::A, Axis::X, vec![1.0, 2.0], 1.0).unwrap();
        let c = s.advance(Stage::Cleaned, vec![1.0], 1.0).unwrap();
        assert!(matches!(
            c.advance(Stage::Cleaned, vec![1.0], 1.0),
            Err(Error::StageOrder { .. })
        ));
        assert_eq!(c.provenance(), &[Stage::Raw, Stage::Cleaned]);
    }

    #[test]
    fn series_rejects_non_finite() {
        assert!(AxisSeries::new(SatId::A, Axis::X, vec![1.0, f64::NAN], 1.0).is_err());
        assert!(matches!(
            AxisSeries::new(SatId::A, Axis::X, vec![], 1.0),
            Err(Error::EmptyInput)
        ));
    }
}
