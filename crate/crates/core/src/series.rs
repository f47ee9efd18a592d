//! Calendar-indexed daily series, CSV ingestion and the leap-day convention.
//!
//! A [`TemperatureSeries`] holds one record per calendar day. After
//! [`strip_leap_days`] every year has exactly 365 observations and the
//! position of a record within the series is its day index `t`, which is
//! what the seasonal regressors are evaluated on.

use std::fmt;
use std::io::{Read, Write};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Days in the seasonal cycle. Leap days are removed, so the period is exact.
pub const DAYS_PER_YEAR: usize = 365;

/// Accepted daily mean temperature range, degrees Celsius.
pub const MIN_TEMP_C: f64 = -90.0;
pub const MAX_TEMP_C: f64 = 60.0;

/// 0-based position of a record within a leap-stripped series.
pub type DayIndex = usize;

/// Where a validation problem was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// 1-based line in a CSV file (the header is line 1).
    Line(usize),
    /// 0-based position in an in-memory record list.
    Record(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Record(n) => write!(f, "record {n}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("input is empty (no header)")]
    Empty,
    #[error("bad header {found:?}: expected `date,t_avg_c` or `date,t_avg_c,precip_mm`")]
    BadHeader { found: String },
    #[error("{at}: malformed row: {message}")]
    Malformed { at: Location, message: String },
    #[error("{at}: cannot parse date {value:?} (expected YYYY-MM-DD)")]
    BadDate { at: Location, value: String },
    #[error("{at}: cannot parse {field} value {value:?}")]
    BadNumber {
        at: Location,
        field: &'static str,
        value: String,
    },
    #[error("{at}: missing temperature value")]
    MissingTemperature { at: Location },
    #[error("{at}: duplicate date {date}")]
    DuplicateDate { at: Location, date: CalendarDay },
    #[error("{at}: date {date} is not after the previous date {previous}")]
    OutOfOrder {
        at: Location,
        date: CalendarDay,
        previous: CalendarDay,
    },
    #[error("{at}: temperature {value} °C outside accepted range [{MIN_TEMP_C}, {MAX_TEMP_C}]")]
    TemperatureOutOfRange { at: Location, value: f64 },
    #[error("{at}: negative precipitation {value} mm")]
    NegativePrecipitation { at: Location, value: f64 },
    #[error("series is not contiguous: {after} is followed by {next} (missing days in between)")]
    Gap {
        after: CalendarDay,
        next: CalendarDay,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// A valid Gregorian calendar date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CalendarDay(NaiveDate);

impl CalendarDay {
    pub fn from_ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, month, day).map(Self)
    }

    /// Parses a strict `YYYY-MM-DD` date.
    pub fn parse(s: &str) -> Option<Self> {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().map(Self)
    }

    pub fn year(&self) -> i32 {
        self.0.year()
    }

    pub fn month(&self) -> u32 {
        self.0.month()
    }

    pub fn day(&self) -> u32 {
        self.0.day()
    }

    pub fn is_leap_day(&self) -> bool {
        self.month() == 2 && self.day() == 29
    }

    /// `(year, month)` key of the calendar month containing this day.
    pub fn month_key(&self) -> MonthKey {
        MonthKey {
            year: self.year(),
            month: self.month(),
        }
    }

    /// The next calendar day, or `None` past the end of chrono's range.
    pub fn succ(&self) -> Option<Self> {
        self.0.succ_opt().map(Self)
    }

    /// The next day in the leap-free calendar: February 29 is skipped.
    pub fn succ_skipping_leap(&self) -> Option<Self> {
        let next = self.succ()?;
        if next.is_leap_day() {
            next.succ()
        } else {
            Some(next)
        }
    }

    pub fn as_naive(&self) -> NaiveDate {
        self.0
    }
}

impl From<NaiveDate> for CalendarDay {
    fn from(d: NaiveDate) -> Self {
        Self(d)
    }
}

impl fmt::Display for CalendarDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%d"))
    }
}

/// A calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MonthKey {
    pub year: i32,
    pub month: u32,
}

impl fmt::Display for MonthKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// One daily observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyRecord {
    pub date: CalendarDay,
    /// Daily average temperature, °C.
    pub temp: f64,
    /// Precipitation, mm.
    pub precip: Option<f64>,
}

/// Daily temperature observations with strictly increasing dates.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TemperatureSeries {
    records: Vec<DailyRecord>,
}

impl TemperatureSeries {
    /// Validates ordering and value ranges. Leap days are allowed here.
    pub fn new(records: Vec<DailyRecord>) -> Result<Self, SeriesError> {
        let mut previous: Option<CalendarDay> = None;
        for (i, rec) in records.iter().enumerate() {
            let at = Location::Record(i);
            check_record(rec, previous, at)?;
            previous = Some(rec.date);
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[DailyRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn temperatures(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.temp).collect()
    }

    /// Precipitation values that are present, or `None` if the series carries none.
    pub fn precipitation(&self) -> Option<Vec<f64>> {
        let values: Vec<f64> = self.records.iter().filter_map(|r| r.precip).collect();
        (!values.is_empty()).then_some(values)
    }

    pub fn dates(&self) -> impl Iterator<Item = CalendarDay> + '_ {
        self.records.iter().map(|r| r.date)
    }

    pub fn first_date(&self) -> Option<CalendarDay> {
        self.records.first().map(|r| r.date)
    }

    pub fn last_date(&self) -> Option<CalendarDay> {
        self.records.last().map(|r| r.date)
    }

    pub fn leap_day_count(&self) -> usize {
        self.records.iter().filter(|r| r.date.is_leap_day()).count()
    }

    /// Checks the normalized form: no Feb 29 and no gaps in the leap-free calendar.
    pub fn check_normalized(&self) -> Result<(), SeriesError> {
        if let Some(i) = self.records.iter().position(|r| r.date.is_leap_day()) {
            return Err(SeriesError::Malformed {
                at: Location::Record(i),
                message: format!(
                    "{} is a leap day; strip leap days first",
                    self.records[i].date
                ),
            });
        }
        for w in self.records.windows(2) {
            if w[0].date.succ_skipping_leap() != Some(w[1].date) {
                return Err(SeriesError::Gap {
                    after: w[0].date,
                    next: w[1].date,
                });
            }
        }
        Ok(())
    }
}

fn check_record(
    rec: &DailyRecord,
    previous: Option<CalendarDay>,
    at: Location,
) -> Result<(), SeriesError> {
    if let Some(prev) = previous {
        if rec.date == prev {
            return Err(SeriesError::DuplicateDate { at, date: rec.date });
        }
        if rec.date < prev {
            return Err(SeriesError::OutOfOrder {
                at,
                date: rec.date,
                previous: prev,
            });
        }
    }
    if !rec.temp.is_finite() {
        return Err(SeriesError::MissingTemperature { at });
    }
    if !(MIN_TEMP_C..=MAX_TEMP_C).contains(&rec.temp) {
        return Err(SeriesError::TemperatureOutOfRange {
            at,
            value: rec.temp,
        });
    }
    if let Some(p) = rec.precip {
        if !p.is_finite() {
            return Err(SeriesError::BadNumber {
                at,
                field: "precip_mm",
                value: p.to_string(),
            });
        }
        if p < 0.0 {
            return Err(SeriesError::NegativePrecipitation { at, value: p });
        }
    }
    Ok(())
}

/// Reads `date,t_avg_c[,precip_mm]` CSV. Errors name the 1-based line.
pub fn parse_csv<R: Read>(reader: R) -> Result<TemperatureSeries, SeriesError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut rows = rdr.records();
    let header = match rows.next() {
        None => return Err(SeriesError::Empty),
        Some(h) => h?,
    };
    let names: Vec<&str> = header.iter().collect();
    let has_precip = match names.as_slice() {
        ["date", "t_avg_c"] => false,
        ["date", "t_avg_c", "precip_mm"] => true,
        _ => {
            return Err(SeriesError::BadHeader {
                found: names.join(","),
            })
        }
    };
    let width = if has_precip { 3 } else { 2 };

    let mut records = Vec::new();
    let mut previous = None;
    for row in rows {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let at = Location::Line(line);
        if row.len() == 1 && row.get(0) == Some("") {
            continue;
        }
        if row.len() != width {
            return Err(SeriesError::Malformed {
                at,
                message: format!("expected {width} fields, found {}", row.len()),
            });
        }
        let date_field = &row[0];
        let date = CalendarDay::parse(date_field).ok_or_else(|| SeriesError::BadDate {
            at,
            value: date_field.to_string(),
        })?;
        let temp_field = &row[1];
        if temp_field.is_empty() {
            return Err(SeriesError::MissingTemperature { at });
        }
        let temp = parse_number(temp_field, "t_avg_c", at)?;
        let precip = if has_precip && !row[2].is_empty() {
            Some(parse_number(&row[2], "precip_mm", at)?)
        } else {
            None
        };
        let rec = DailyRecord { date, temp, precip };
        check_record(&rec, previous, at)?;
        previous = Some(date);
        records.push(rec);
    }
    Ok(TemperatureSeries { records })
}

fn parse_number(field: &str, name: &'static str, at: Location) -> Result<f64, SeriesError> {
    let bad = || SeriesError::BadNumber {
        at,
        field: name,
        value: field.to_string(),
    };
    let v: f64 = field.parse().map_err(|_| bad())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Writes the series in the ingestion format. The precipitation column is
/// emitted only when at least one record carries a value.
pub fn write_csv<W: Write>(series: &TemperatureSeries, writer: W) -> Result<(), SeriesError> {
    let with_precip = series.records.iter().any(|r| r.precip.is_some());
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    if with_precip {
        w.write_record(["date", "t_avg_c", "precip_mm"])?;
    } else {
        w.write_record(["date", "t_avg_c"])?;
    }
    for r in &series.records {
        let date = r.date.to_string();
        let temp = r.temp.to_string();
        if with_precip {
            let precip = r.precip.map(|p| p.to_string()).unwrap_or_default();
            w.write_record([date, temp, precip])?;
        } else {
            w.write_record([date, temp])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Removes every February 29 record and verifies the result is gap-free
/// in the leap-free calendar.
pub fn strip_leap_days(series: &TemperatureSeries) -> Result<TemperatureSeries, SeriesError> {
    let records: Vec<DailyRecord> = series
        .records
        .iter()
        .filter(|r| !r.date.is_leap_day())
        .copied()
        .collect();
    let out = TemperatureSeries { records };
    out.check_normalized()?;
    Ok(out)
}

/// `(sin(2πt/365), cos(2πt/365))`. The phase is reduced modulo one year
/// first, so `t` and `t + 365` give bit-identical results.
pub fn seasonal_basis(t: DayIndex) -> (f64, f64) {
    let phase = std::f64::consts::TAU * (t % DAYS_PER_YEAR) as f64 / DAYS_PER_YEAR as f64;
    phase.sin_cos()
}
