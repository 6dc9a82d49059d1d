//! Event ingestion, weekly aggregation and the week calendar.
//!
//! Weeks run Sunday through Saturday. Week 0 starts on Sunday 2022-01-02;
//! earlier weeks have negative indices.

use std::collections::HashSet;
use std::io::{Read, Write};

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obs::WeeklySeries;

/// Number of Sunday-anchored weeks lying entirely within 2021.
const WEEKS_IN_2021: u32 = 52;

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(2022, 1, 2).expect("valid epoch")
}

fn earliest_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date")
}

fn latest_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2030, 12, 31).expect("valid date")
}

/// Weeks since the Sunday 2022-01-02.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WeekIndex(pub i64);

impl WeekIndex {
    pub fn of_date(date: NaiveDate) -> WeekIndex {
        WeekIndex((date - epoch()).num_days().div_euclid(7))
    }

    /// The Sunday on which this week starts.
    pub fn start_date(self) -> NaiveDate {
        epoch() + Duration::days(7 * self.0)
    }
}

/// First day (Sunday) of week `t`.
pub fn week_to_date(t: i64) -> NaiveDate {
    WeekIndex(t).start_date()
}

pub fn date_to_week(date: NaiveDate) -> i64 {
    WeekIndex::of_date(date).0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoffEvent {
    pub date: NaiveDate,
    pub company: Option<String>,
    pub laid_off_count: Option<u64>,
    pub percentage: Option<f64>,
}

/// A data row that could not be turned into an event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRow {
    /// 1-based line number in the input, counting the header as line 1.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedEvents {
    pub events: Vec<LayoffEvent>,
    pub skipped: Vec<SkippedRow>,
}

fn non_empty(field: Option<&str>) -> Option<&str> {
    field.map(str::trim).filter(|s| !s.is_empty())
}

/// Parse a tracker export with a header row. Only `date` is required;
/// optional columns that fail to parse become absent.
pub fn parse_events<R: Read>(input: R) -> Result<ParsedEvents> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let date_col =
        column("date").ok_or_else(|| Error::Format("missing required column `date`".into()))?;
    let company_col = column("company");
    let count_col = column("laid_off_count");
    let pct_col = column("percentage");

    let mut parsed = ParsedEvents::default();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                parsed.skipped.push(SkippedRow {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        let raw_date = record.get(date_col).unwrap_or("").trim();
        let date = match NaiveDate::parse_from_str(raw_date, "%Y-%m-%d") {
            Ok(d) if d >= earliest_date() && d <= latest_date() => d,
            Ok(d) => {
                parsed.skipped.push(SkippedRow {
                    line,
                    reason: format!("date {d} out of range"),
                });
                continue;
            }
            Err(_) => {
                parsed.skipped.push(SkippedRow {
                    line,
                    reason: format!("unparseable date {raw_date:?}"),
                });
                continue;
            }
        };
        let get = |col: Option<usize>| non_empty(col.and_then(|c| record.get(c)));
        parsed.events.push(LayoffEvent {
            date,
            company: get(company_col).map(str::to_owned),
            laid_off_count: get(count_col).and_then(|s| s.parse().ok()),
            percentage: get(pct_col)
                .and_then(|s| s.parse().ok())
                .filter(|p: &f64| p.is_finite() && *p >= 0.0),
        });
    }
    Ok(parsed)
}

/// How events within one week are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    /// One per report row.
    #[default]
    PerEvent,
    /// At most one per company and week. Rows without a company count individually.
    DedupCompanyWeek,
}

/// Count events per week for weeks `from..=to`.
pub fn aggregate_weekly(
    events: &[LayoffEvent],
    from: WeekIndex,
    to: WeekIndex,
) -> Result<WeeklySeries> {
    aggregate_weekly_with(events, from, to, CountMode::PerEvent)
}

pub fn aggregate_weekly_with(
    events: &[LayoffEvent],
    from: WeekIndex,
    to: WeekIndex,
    mode: CountMode,
) -> Result<WeeklySeries> {
    if from > to {
        return Err(Error::Precondition(format!(
            "from week {} after to week {}",
            from.0, to.0
        )));
    }
    let mut counts = vec![0u64; (to.0 - from.0 + 1) as usize];
    let mut seen: HashSet<(i64, &str)> = HashSet::new();
    for ev in events {
        let w = WeekIndex::of_date(ev.date);
        if w < from || w > to {
            continue;
        }
        if mode == CountMode::DedupCompanyWeek {
            if let Some(company) = ev.company.as_deref() {
                if !seen.insert((w.0, company)) {
                    continue;
                }
            }
        }
        counts[(w.0 - from.0) as usize] += 1;
    }
    Ok(WeeklySeries::new(from.0, counts))
}

/// Average weekly event count over the 52 Sunday-anchored weeks inside 2021.
pub fn baseline_2021(events: &[LayoffEvent]) -> f64 {
    let first = NaiveDate::from_ymd_opt(2021, 1, 1).expect("valid date");
    // Advance to the first Sunday of the year.
    let offset = (7 - first.weekday().num_days_from_sunday()) % 7;
    let start = first + Duration::days(offset as i64);
    debug_assert_eq!(start.weekday(), Weekday::Sun);
    let end = start + Duration::days(7 * WEEKS_IN_2021 as i64);
    let n = events
        .iter()
        .filter(|e| e.date >= start && e.date < end)
        .count();
    n as f64 / WEEKS_IN_2021 as f64
}

/// Write `week_index,week_start_date,count`.
pub fn write_series_csv<W: Write>(series: &WeeklySeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["week_index", "week_start_date", "count"])?;
    for (offset, count) in series.counts.iter().enumerate() {
        let t = series.start_week + offset as i64;
        w.write_record([
            t.to_string(),
            week_to_date(t).to_string(),
            count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct SeriesRow {
    week_index: i64,
    #[allow(dead_code)]
    week_start_date: Option<String>,
    count: u64,
}

/// Read a series file written by [`write_series_csv`]. Week indices must be
/// consecutive.
pub fn read_series_csv<R: Read>(input: R) -> Result<WeeklySeries> {
    let mut reader = csv::Reader::from_reader(input);
    let mut start = None;
    let mut counts = Vec::new();
    for row in reader.deserialize::<SeriesRow>() {
        let row = row.map_err(|e| Error::Format(format!("series file: {e}")))?;
        let expected = start.map(|s: i64| s + counts.len() as i64);
        match expected {
            None => start = Some(row.week_index),
            Some(e) if e != row.week_index => {
                return Err(Error::Format(format!(
                    "series file: expected week {e}, found {}",
                    row.week_index
                )))
            }
            _ => {}
        }
        counts.push(row.count);
    }
    Ok(WeeklySeries::new(start.unwrap_or(0), counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn event(date: NaiveDate) -> LayoffEvent {
        LayoffEvent {
            date,
            company: None,
            laid_off_count: None,
            percentage: None,
        }
    }

    #[test]
    fn calendar_anchors() {
        assert_eq!(week_to_date(0), d(2022, 1, 2));
        assert_eq!(week_to_date(96), d(2023, 11, 5));
        assert_eq!(week_to_date(107), d(2024, 1, 21));
        assert_eq!(week_to_date(-52), d(2021, 1, 3));
    }

    #[test]
    fn round_trip_week_dates() {
        for t in -110..=300 {
            let start = week_to_date(t);
            assert_eq!(start.weekday(), Weekday::Sun);
            for day in 0..7 {
                assert_eq!(date_to_week(start + Duration::days(day)), t);
            }
        }
    }

    #[test]
    fn parse_full_row() {
        let csv = "date,company,laid_off_count,percentage\n2022-11-09,Meta,11000,0.13\n";
        let parsed = parse_events(csv.as_bytes()).unwrap();
        assert_eq!(
            parsed.events,
            vec![LayoffEvent {
                date: d(2022, 11, 9),
                company: Some("Meta".into()),
                laid_off_count: Some(11000),
                percentage: Some(0.13),
            }]
        );
        assert!(parsed.skipped.is_empty());
    }

    #[test]
    fn parse_missing_statistics() {
        let csv = "date,company,laid_off_count,percentage\n2022-11-09,Acme,,\n";
        let parsed = parse_events(csv.as_bytes()).unwrap();
        assert_eq!(parsed.events[0].laid_off_count, None);
        assert_eq!(parsed.events[0].percentage, None);
    }

    #[test]
    fn parse_counts_bad_rows() {
        let csv = "date,company,laid_off_count,percentage\n\
                   2022-01-03,A,10,\n\
                   2022-01-04,B,,0.1\n\
                   not-a-date,C,5,\n\
                   2022-01-05,D,1,0.5\n\
                   2022-01-06,A,2,\n";
        let parsed = parse_events(csv.as_bytes()).unwrap();
        assert_eq!(parsed.events.len(), 4);
        assert_eq!(parsed.skipped.len(), 1);
        assert_eq!(parsed.skipped[0].line, 4);
    }

    #[test]
    fn parse_requires_date_column() {
        let csv = "company,laid_off_count\nA,1\n";
        assert!(matches!(
            parse_events(csv.as_bytes()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn parse_rejects_out_of_range_date() {
        let csv = "date\n2019-12-31\n2031-01-01\n2020-01-01\n";
        let parsed = parse_events(csv.as_bytes()).unwrap();
        assert_eq!(parsed.events.len(), 1);
        assert_eq!(parsed.skipped.len(), 2);
    }

    #[test]
    fn aggregate_first_week() {
        let events: Vec<_> = [d(2022, 1, 3), d(2022, 1, 4), d(2022, 1, 5)]
            .into_iter()
            .map(event)
            .collect();
        let s = aggregate_weekly(&events, WeekIndex(0), WeekIndex(3)).unwrap();
        assert_eq!(s.counts, vec![3, 0, 0, 0]);
        assert_eq!(s.start_week, 0);
    }

    #[test]
    fn aggregate_empty_and_boundary() {
        let s = aggregate_weekly(&[], WeekIndex(-2), WeekIndex(2)).unwrap();
        assert_eq!(s.counts, vec![0; 5]);
        // Saturday 2022-01-08 then Sunday 2022-01-09
        let events = vec![event(d(2022, 1, 8)), event(d(2022, 1, 9))];
        let s = aggregate_weekly(&events, WeekIndex(0), WeekIndex(1)).unwrap();
        assert_eq!(s.counts, vec![1, 1]);
        assert!(aggregate_weekly(&[], WeekIndex(2), WeekIndex(1)).is_err());
    }

    #[test]
    fn dedup_company_week() {
        let mk = |c: &str| LayoffEvent {
            company: Some(c.into()),
            ..event(d(2022, 1, 4))
        };
        let events = vec![mk("A"), mk("A"), mk("B"), event(d(2022, 1, 4))];
        let per_event = aggregate_weekly(&events, WeekIndex(0), WeekIndex(0)).unwrap();
        let dedup = aggregate_weekly_with(
            &events,
            WeekIndex(0),
            WeekIndex(0),
            CountMode::DedupCompanyWeek,
        )
        .unwrap();
        assert_eq!(per_event.counts, vec![4]);
        assert_eq!(dedup.counts, vec![3]);
    }

    #[test]
    fn baseline_cases() {
        assert_eq!(baseline_2021(&[]), 0.0);
        let weekly: Vec<_> = (0..52)
            .map(|w| event(d(2021, 1, 3) + Duration::days(7 * w + 2)))
            .collect();
        assert_eq!(baseline_2021(&weekly), 1.0);
        let spread: Vec<_> = (0..44)
            .map(|i| event(d(2021, 1, 3) + Duration::days(8 * i)))
            .collect();
        assert!((baseline_2021(&spread) - 0.846).abs() < 5e-4);
        // 2021-01-01/02 belong to a week that started in 2020.
        assert_eq!(
            baseline_2021(&[event(d(2021, 1, 2)), event(d(2022, 1, 1))]),
            1.0 / 52.0
        );
    }

    #[test]
    fn series_csv_round_trip() {
        let s = WeeklySeries::new(-3, vec![1, 0, 5, 7]);
        let mut buf = Vec::new();
        write_series_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("week_index,week_start_date,count\n-3,2021-12-12,1\n"));
        assert_eq!(read_series_csv(buf.as_slice()).unwrap(), s);
        let gap = "week_index,week_start_date,count\n0,2022-01-02,1\n2,2022-01-16,1\n";
        assert!(read_series_csv(gap.as_bytes()).is_err());
    }
}
