use chrono::{Datelike, Duration, NaiveDate, Weekday};
use layoff_sir::dataio::{
    aggregate_weekly, aggregate_weekly_with, baseline_2021, parse_events, read_series_csv,
    week_to_date, write_series_csv, CountMode, LayoffEvent, WeekIndex,
};
use layoff_sir::WeeklySeries;
use proptest::prelude::*;

fn event(date: NaiveDate, company: &str) -> LayoffEvent {
    LayoffEvent {
        date,
        company: Some(company.to_owned()),
        laid_off_count: None,
        percentage: None,
    }
}

fn day(offset: i64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + Duration::days(offset)
}

#[test]
fn week_starts_are_sundays_seven_days_apart() {
    for t in -110..300 {
        let d = week_to_date(t);
        assert_eq!(d.weekday(), Weekday::Sun);
        assert_eq!(week_to_date(t + 1) - d, Duration::days(7));
    }
    assert_eq!(
        week_to_date(0),
        NaiveDate::from_ymd_opt(2022, 1, 2).unwrap()
    );
}

#[test]
fn parse_skips_bad_rows_and_keeps_optional_fields_optional() {
    let text = "date,company,laid_off_count,percentage\n\
                2023-01-04,Acme,120,0.1\n\
                not-a-date,Beta,5,\n\
                2023-01-05,,,\n\
                1999-05-05,Old,1,\n\
                2023-01-06,Gamma,lots,abc\n";
    let parsed = parse_events(text.as_bytes()).unwrap();
    assert_eq!(parsed.events.len(), 3);
    assert_eq!(parsed.skipped.len(), 2);
    assert_eq!(parsed.skipped[0].line, 3);
    assert_eq!(parsed.events[0].laid_off_count, Some(120));
    assert_eq!(parsed.events[1].company, None);
    assert_eq!(parsed.events[2].laid_off_count, None);
    assert_eq!(parsed.events[2].percentage, None);
}

#[test]
fn missing_date_column_is_a_format_error() {
    assert!(matches!(
        parse_events("company,laid_off_count\nAcme,3\n".as_bytes()),
        Err(layoff_sir::Error::Format(_))
    ));
}

#[test]
fn baseline_counts_only_2021_weeks() {
    // 2021-01-03 is the first Sunday; 52 weeks later is 2022-01-02.
    let inside = [
        NaiveDate::from_ymd_opt(2021, 1, 3).unwrap(),
        NaiveDate::from_ymd_opt(2021, 7, 1).unwrap(),
        NaiveDate::from_ymd_opt(2022, 1, 1).unwrap(),
    ];
    let outside = [
        NaiveDate::from_ymd_opt(2021, 1, 2).unwrap(),
        NaiveDate::from_ymd_opt(2022, 1, 2).unwrap(),
    ];
    let events: Vec<_> = inside
        .iter()
        .chain(&outside)
        .map(|&d| event(d, "x"))
        .collect();
    assert_eq!(baseline_2021(&events), 3.0 / 52.0);
}

proptest! {
    #[test]
    fn weekly_counts_partition_events(offsets in prop::collection::vec(0i64..3000, 0..200)) {
        let events: Vec<_> = offsets.iter().map(|&o| event(day(o), "c")).collect();
        let from = WeekIndex::of_date(day(0));
        let to = WeekIndex::of_date(day(2999));
        let series = aggregate_weekly(&events, from, to).unwrap();
        prop_assert_eq!(series.total(), events.len() as u64);
        for (idx, &count) in series.counts.iter().enumerate() {
            let week = from.0 + idx as i64;
            let want = events.iter().filter(|e| WeekIndex::of_date(e.date).0 == week).count() as u64;
            prop_assert_eq!(count, want);
        }
    }

    #[test]
    fn dedup_never_exceeds_per_event(rows in prop::collection::vec((0i64..400, 0u8..5), 0..120)) {
        let events: Vec<_> = rows.iter().map(|&(o, c)| event(day(o), &format!("co{c}"))).collect();
        let from = WeekIndex::of_date(day(0));
        let to = WeekIndex::of_date(day(399));
        let all = aggregate_weekly_with(&events, from, to, CountMode::PerEvent).unwrap();
        let dedup = aggregate_weekly_with(&events, from, to, CountMode::DedupCompanyWeek).unwrap();
        for (a, d) in all.counts.iter().zip(&dedup.counts) {
            prop_assert!(d <= a);
            prop_assert!(*d <= 5);
            prop_assert_eq!(*a == 0, *d == 0);
        }
    }

    #[test]
    fn series_csv_round_trip(start in -110i64..300, counts in prop::collection::vec(0u64..100_000, 1..150)) {
        let series = WeeklySeries::new(start, counts);
        let mut buf = Vec::new();
        write_series_csv(&series, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        prop_assert!(text.starts_with("week_index,week_start_date,count\n"));
        let back = read_series_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back, series);
    }

    #[test]
    fn date_week_round_trip(offset in -4000i64..4000) {
        let d = NaiveDate::from_ymd_opt(2022, 1, 2).unwrap() + Duration::days(offset);
        let w = WeekIndex::of_date(d);
        let start = w.start_date();
        prop_assert!(start <= d && d - start < Duration::days(7));
        prop_assert_eq!(start.weekday(), Weekday::Sun);
    }
}
