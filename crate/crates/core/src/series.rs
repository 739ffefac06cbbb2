//! Monthly series ingestion, min-max scaling and sliding-window formatting.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A calendar month, written `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Period {
    year: i32,
    month: u8,
}

impl Period {
    pub fn new(year: i32, month: u8) -> Option<Self> {
        (1..=12).contains(&month).then_some(Period { year, month })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }

    /// The following calendar month.
    pub fn succ(self) -> Period {
        if self.month == 12 {
            Period {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Period {
                year: self.year,
                month: self.month + 1,
            }
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Period {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("period {s:?} is not YYYY-MM");
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 || !y.bytes().chain(m.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u8 = m.parse().map_err(|_| bad())?;
        Period::new(year, month).ok_or_else(|| format!("period {s:?} has month outside 01..12"))
    }
}

impl Serialize for Period {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Period {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Chronologically ordered, gap-free monthly observations.
///
/// Values are strictly positive because MAPE divides by the actuals.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    labels: Vec<Period>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(labels: Vec<Period>, values: Vec<f64>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::Series(format!(
                "{} labels but {} values",
                labels.len(),
                values.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::Series("series is empty".into()));
        }
        for (k, pair) in labels.windows(2).enumerate() {
            if pair[1] != pair[0].succ() {
                return Err(Error::Series(format!(
                    "months not contiguous at position {}: {} follows {}",
                    k + 1,
                    pair[1],
                    pair[0]
                )));
            }
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Series(format!(
                "value at position {k} ({}) must be a positive finite count",
                values[k]
            )));
        }
        Ok(TimeSeries { labels, values })
    }

    /// Monthly series starting at `start`.
    pub fn from_values(start: Period, values: Vec<f64>) -> Result<Self> {
        let labels = std::iter::successors(Some(start), |p| Some(p.succ()))
            .take(values.len())
            .collect();
        Self::new(labels, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn labels(&self) -> &[Period] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last_period(&self) -> Period {
        *self.labels.last().expect("series is never empty")
    }
}

/// Loads a `period,passengers` CSV file. Row numbers in errors are 1-based
/// file lines, so the header is row 1.
pub fn load_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |row: u64, message: String| Error::Csv {
        path: path.to_path_buf(),
        row,
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers().map_err(|e| csv_err(1, e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "period" || &headers[1] != "passengers" {
        return Err(csv_err(
            1,
            format!(
                "expected header `period,passengers`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut prev: Option<Period> = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line());
            csv_err(row, e.to_string())
        })?;
        let row = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(csv_err(row, format!("expected 2 fields, found {}", record.len())));
        }
        let period: Period = record[0].parse().map_err(|m| csv_err(row, m))?;
        let raw = &record[1];
        let value: f64 = raw
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| csv_err(row, format!("passenger count {raw:?} is not a number")))?;
        if value <= 0.0 {
            return Err(csv_err(row, format!("passenger count {raw} must be positive")));
        }
        if let Some(p) = prev {
            if period != p.succ() {
                return Err(csv_err(
                    row,
                    format!("period {period} does not follow {p} (months must be contiguous)"),
                ));
            }
        }
        prev = Some(period);
        labels.push(period);
        values.push(value);
    }
    if labels.is_empty() {
        return Err(csv_err(1, "no data rows".into()));
    }
    TimeSeries::new(labels, values)
}

/// Supervised (window, next value) pairs cut from a series.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    /// Position of each target in the source series.
    pub target_indices: Vec<usize>,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn window(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    /// Keeps the samples whose target index satisfies `keep`.
    pub fn filter_by_target(&self, mut keep: impl FnMut(usize) -> bool) -> WindowedDataset {
        let mut out = WindowedDataset {
            inputs: Vec::new(),
            targets: Vec::new(),
            target_indices: Vec::new(),
        };
        for k in 0..self.len() {
            if keep(self.target_indices[k]) {
                out.inputs.push(self.inputs[k].clone());
                out.targets.push(self.targets[k]);
                out.target_indices.push(self.target_indices[k]);
            }
        }
        out
    }
}

/// Slides a width-`w` window over `values`: sample `k` is
/// `values[k..k + w]` with target `values[k + w]`.
pub fn make_windows(values: &[f64], w: usize) -> Result<WindowedDataset> {
    if w == 0 {
        return Err(Error::invalid("window", "must be at least 1"));
    }
    if values.len() <= w {
        return Err(Error::Series(format!(
            "series of length {} is too short for window {w}",
            values.len()
        )));
    }
    let inputs = values.windows(w).take(values.len() - w).map(<[f64]>::to_vec).collect();
    let targets = values[w..].to_vec();
    let target_indices = (w..values.len()).collect();
    Ok(WindowedDataset {
        inputs,
        targets,
        target_indices,
    })
}

/// Min-max scaling onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: f64,
    pub max: f64,
}

impl ScalerParams {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(Error::invalid(
                "scaler",
                format!("need finite min < max, got min={min} max={max}"),
            ));
        }
        Ok(ScalerParams { min, max })
    }

    pub fn scale(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }

    pub fn unscale(&self, y: f64) -> f64 {
        y * (self.max - self.min) + self.min
    }
}

/// Fits a scaler to the extremes of `values`. Pass only training data.
pub fn fit_scaler(values: &[f64]) -> Result<ScalerParams> {
    if values.is_empty() {
        return Err(Error::invalid("scaler", "cannot fit on empty input"));
    }
    let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if max <= min {
        return Err(Error::invalid("scaler", format!("input is constant ({min})")));
    }
    ScalerParams::new(min, max)
}

pub fn transform(params: &ScalerParams, values: &[f64]) -> Vec<f64> {
    values.iter().map(|&x| params.scale(x)).collect()
}

pub fn inverse_transform(params: &ScalerParams, values: &[f64]) -> Vec<f64> {
    values.iter().map(|&y| params.unscale(y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn write_csv(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn period_parse_and_succ() {
        let p: Period = "2016-12".parse().unwrap();
        assert_eq!(p.succ().to_string(), "2017-01");
        assert!("2016-13".parse::<Period>().is_err());
        assert!("2016-1".parse::<Period>().is_err());
        assert!("16-01".parse::<Period>().is_err());
    }

    #[test]
    fn load_simple_file() {
        let f = write_csv("period,passengers\n2016-01,10\n2016-02,20\n2016-03,30\n2016-04,40\n");
        let s = load_csv(f.path()).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.values(), &[10.0, 20.0, 30.0, 40.0]);
        assert_eq!(s.labels()[3].to_string(), "2016-04");
    }

    #[test]
    fn negative_count_names_row() {
        let f = write_csv("period,passengers\n2016-01,10\n2016-02,-5\n");
        let err = load_csv(f.path()).unwrap_err().to_string();
        assert!(err.contains("row 3"), "{err}");
        assert!(err.contains("-5"), "{err}");
    }

    #[test]
    fn non_numeric_and_zero_rejected() {
        let f = write_csv("period,passengers\n2016-01,abc\n");
        assert!(load_csv(f.path()).unwrap_err().to_string().contains("row 2"));
        let f = write_csv("period,passengers\n2016-01,0\n");
        assert!(load_csv(f.path()).is_err());
        let f = write_csv("period,passengers\n2016-01,1,200\n");
        assert!(load_csv(f.path()).is_err());
    }

    #[test]
    fn gap_in_months_rejected() {
        let f = write_csv("period,passengers\n2016-01,10\n2016-03,20\n");
        let err = load_csv(f.path()).unwrap_err().to_string();
        assert!(err.contains("row 3") && err.contains("contiguous"), "{err}");
    }

    #[test]
    fn bad_header_and_missing_file() {
        let f = write_csv("month,count\n2016-01,10\n");
        assert!(load_csv(f.path()).unwrap_err().to_string().contains("header"));
        let err = load_csv("/nonexistent/series.csv").unwrap_err().to_string();
        assert!(err.contains("/nonexistent/series.csv"));
    }

    #[test]
    fn seven_point_windowing() {
        let t: Vec<f64> = (1..=7).map(f64::from).collect();
        let d = make_windows(&t, 3).unwrap();
        assert_eq!(
            d.inputs,
            vec![
                vec![1.0, 2.0, 3.0],
                vec![2.0, 3.0, 4.0],
                vec![3.0, 4.0, 5.0],
                vec![4.0, 5.0, 6.0]
            ]
        );
        assert_eq!(d.targets, vec![4.0, 5.0, 6.0, 7.0]);
        assert_eq!(d.target_indices, vec![3, 4, 5, 6]);
    }

    #[test]
    fn minimal_and_too_short_windows() {
        let d = make_windows(&[1.0, 2.0, 3.0, 4.0], 3).unwrap();
        assert_eq!(d.inputs, vec![vec![1.0, 2.0, 3.0]]);
        assert_eq!(d.targets, vec![4.0]);
        assert!(make_windows(&[1.0, 2.0, 3.0], 3).is_err());
        assert!(make_windows(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn scaler_cases() {
        let p = fit_scaler(&[10.0, 20.0, 30.0]).unwrap();
        assert_eq!((p.min, p.max), (10.0, 30.0));
        assert_eq!(transform(&p, &[10.0, 20.0, 30.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(transform(&p, &[40.0]), vec![1.5]);
        let id = fit_scaler(&[0.0, 1.0]).unwrap();
        assert_eq!(transform(&id, &[0.25, 0.75]), vec![0.25, 0.75]);
        assert!(fit_scaler(&[5.0, 5.0, 5.0]).is_err());
        assert!(fit_scaler(&[]).is_err());
    }

    proptest! {
        #[test]
        fn windows_reconstruct_series(values in prop::collection::vec(1.0f64..1e6, 2..60), w in 1usize..6) {
            prop_assume!(values.len() > w);
            let d = make_windows(&values, w).unwrap();
            prop_assert_eq!(d.len(), values.len() - w);
            let mut rebuilt = d.inputs[0].clone();
            rebuilt.extend_from_slice(&d.targets);
            prop_assert_eq!(&rebuilt, &values);
            for k in 0..d.len().saturating_sub(1) {
                prop_assert_eq!(&d.inputs[k + 1][..w - 1], &d.inputs[k][1..]);
            }
        }

        #[test]
        fn scaler_round_trip(values in prop::collection::vec(-1e6f64..1e6, 2..50)) {
            let Ok(p) = fit_scaler(&values) else { return Ok(()); };
            let scaled = transform(&p, &values);
            let back = inverse_transform(&p, &scaled);
            let span = p.max - p.min;
            for (a, b) in values.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(span).max(1.0));
            }
            let lo = values.iter().position(|&v| v == p.min).unwrap();
            let hi = values.iter().position(|&v| v == p.max).unwrap();
            prop_assert_eq!(scaled[lo], 0.0);
            prop_assert_eq!(scaled[hi], 1.0);
        }
    }
}
