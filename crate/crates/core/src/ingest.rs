//! Daily precipitation ingestion and annual block-maximum extraction.
//!
//! Amounts are stored in inches unless a series is explicitly built in
//! millimeters; [`parse_daily_csv`] always converts to inches.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

pub const MM_PER_INCH: f64 = 25.4;
pub const DEFAULT_MIN_COVERAGE: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Inches,
    #[serde(rename = "mm")]
    Millimeters,
}

impl Units {
    pub fn as_str(self) -> &'static str {
        match self {
            Units::Inches => "inches",
            Units::Millimeters => "mm",
        }
    }

    fn to_inches(self, v: f64) -> f64 {
        match self {
            Units::Inches => v,
            Units::Millimeters => v / MM_PER_INCH,
        }
    }
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Units {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inches" | "in" => Ok(Units::Inches),
            "mm" | "millimeters" => Ok(Units::Millimeters),
            other => Err(Error::Domain(format!("unknown units '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub date: NaiveDate,
    pub amount: f64,
    /// Index into [`DailySeries::stations`].
    pub station: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    station_id: String,
    units: Units,
    stations: Vec<String>,
    observations: Vec<Observation>,
}

impl DailySeries {
    /// Sorts by date and validates amounts and uniqueness of dates.
    pub fn new(station_id: impl Into<String>, units: Units, mut obs: Vec<(NaiveDate, f64)>) -> Result<Self> {
        obs.sort_by_key(|o| o.0);
        for w in obs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Domain(format!("duplicate date {}", w[0].0)));
            }
        }
        if let Some((d, v)) = obs.iter().find(|(_, v)| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!("invalid precipitation {v} on {d}")));
        }
        let station_id = station_id.into();
        Ok(Self {
            stations: vec![station_id.clone()],
            station_id,
            units,
            observations: obs.into_iter().map(|(date, amount)| Observation { date, amount, station: 0 }).collect(),
        })
    }

    pub fn station_id(&self) -> &str {
        &self.station_id
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn stations(&self) -> &[String] {
        &self.stations
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn to_inches(&self) -> DailySeries {
        let mut out = self.clone();
        for o in &mut out.observations {
            o.amount = self.units.to_inches(o.amount);
        }
        out.units = Units::Inches;
        out
    }

    /// Number of observations contributed by each station, per year.
    pub fn provenance_by_year(&self) -> BTreeMap<i32, BTreeMap<String, usize>> {
        let mut out: BTreeMap<i32, BTreeMap<String, usize>> = BTreeMap::new();
        for o in &self.observations {
            *out.entry(o.date.year()).or_default().entry(self.stations[o.station].clone()).or_default() += 1;
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ParseConfig {
    pub date_column: String,
    pub value_column: String,
    pub station_column: Option<String>,
    pub units: Units,
    /// Used when the file has no station column.
    pub station_id: Option<String>,
}

impl Default for ParseConfig {
    fn default() -> Self {
        Self {
            date_column: "DATE".into(),
            value_column: "PRCP".into(),
            station_column: Some("STATION".into()),
            units: Units::Inches,
            station_id: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ParseStats {
    pub rows: usize,
    pub skipped_blank: usize,
    pub duplicate_rows: usize,
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Parse { line: 1, msg: format!("missing column '{name}'") })
}

/// Parses a daily CSV with a header row into an inch-denominated series.
///
/// Blank values are skipped and counted; trace amounts (`T`) read as zero.
pub fn parse_daily_csv<R: Read>(source: R, config: &ParseConfig) -> Result<(DailySeries, ParseStats)> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let headers = reader.headers()?.clone();
    let date_col = column(&headers, &config.date_column)?;
    let value_col = column(&headers, &config.value_column)?;
    let station_col = match &config.station_column {
        Some(name) => headers.iter().position(|h| h.trim() == name),
        None => None,
    };

    let mut stats = ParseStats::default();
    let mut station: Option<String> = None;
    let mut by_date: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        stats.rows += 1;
        let field = |i: usize| record.get(i).unwrap_or("").trim();

        if let Some(sc) = station_col {
            let id = field(sc);
            match &station {
                None => station = Some(id.to_string()),
                Some(s) if s != id => {
                    return Err(Error::Parse { line, msg: format!("file mixes stations '{s}' and '{id}'") })
                }
                _ => {}
            }
        }

        let raw_date = field(date_col);
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
            .map_err(|e| Error::Parse { line, msg: format!("bad date '{raw_date}': {e}") })?;

        let raw_value = field(value_col);
        if raw_value.is_empty() {
            stats.skipped_blank += 1;
            continue;
        }
        let value = if raw_value.eq_ignore_ascii_case("t") {
            0.0
        } else {
            raw_value.parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("bad value '{raw_value}': {e}") })?
        };
        if !value.is_finite() {
            return Err(Error::Parse { line, msg: format!("non-finite value '{raw_value}'") });
        }
        if value < 0.0 {
            return Err(Error::Parse { line, msg: format!("negative precipitation {value}") });
        }
        let value = config.units.to_inches(value);
        match by_date.get(&date) {
            Some(&prev) if prev != value => {
                return Err(Error::Parse { line, msg: format!("conflicting values for {date}: {prev} and {value}") })
            }
            Some(_) => stats.duplicate_rows += 1,
            None => {
                by_date.insert(date, value);
            }
        }
    }

    let id = config.station_id.clone().or(station).unwrap_or_else(|| "unknown".to_string());
    let series = DailySeries::new(id, Units::Inches, by_date.into_iter().collect())?;
    Ok((series, stats))
}

/// Writes `DATE,PRCP` rows in the series' own units.
pub fn write_daily_csv<W: Write>(series: &DailySeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["STATION", "DATE", "PRCP"])?;
    for o in &series.observations {
        w.write_record([
            series.stations[o.station].as_str(),
            &o.date.format("%Y-%m-%d").to_string(),
            &o.amount.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Combines two stations, preferring `primary` wherever both report a date.
pub fn merge_series(primary: &DailySeries, fallback: &DailySeries) -> Result<DailySeries> {
    if primary.units != fallback.units {
        return Err(Error::UnitMismatch(primary.units.as_str(), fallback.units.as_str()));
    }
    let offset = primary.stations.len();
    let mut stations = primary.stations.clone();
    stations.extend(fallback.stations.iter().cloned());

    let mut merged = Vec::with_capacity(primary.len() + fallback.len());
    let (mut i, mut j) = (0, 0);
    let (p, f) = (&primary.observations, &fallback.observations);
    while i < p.len() || j < f.len() {
        let take_fallback = match (p.get(i), f.get(j)) {
            (Some(a), Some(b)) if a.date == b.date => {
                j += 1;
                false
            }
            (Some(a), Some(b)) => b.date < a.date,
            (None, Some(_)) => true,
            _ => false,
        };
        if take_fallback {
            let mut o = f[j];
            o.station += offset;
            merged.push(o);
            j += 1;
        } else {
            merged.push(p[i]);
            i += 1;
        }
    }
    Ok(DailySeries { station_id: primary.station_id.clone(), units: primary.units, stations, observations: merged })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub year: i32,
    pub max: f64,
    pub days_observed: u32,
}

fn days_in_year(year: i32) -> u32 {
    if NaiveDate::from_ymd_opt(year, 2, 29).is_some() {
        366
    } else {
        365
    }
}

/// Annual maxima ordered by year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMaxima {
    blocks: Vec<Block>,
    units: Units,
}

impl BlockMaxima {
    pub fn new(blocks: Vec<Block>, units: Units) -> Result<Self> {
        for w in blocks.windows(2) {
            if w[0].year >= w[1].year {
                return Err(Error::InvalidBlocks(format!(
                    "years must be strictly increasing ({} then {})",
                    w[0].year, w[1].year
                )));
            }
        }
        for b in &blocks {
            if !(b.max > 0.0 && b.max.is_finite()) {
                return Err(Error::InvalidBlocks(format!("year {} has non-positive maximum {}", b.year, b.max)));
            }
            if b.days_observed > days_in_year(b.year) {
                return Err(Error::InvalidBlocks(format!("year {} reports {} observed days", b.year, b.days_observed)));
            }
        }
        Ok(Self { blocks, units })
    }

    /// Consecutive years starting at `first_year`, each fully observed.
    pub fn from_values(first_year: i32, values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .enumerate()
                .map(|(i, &max)| {
                    let year = first_year + i as i32;
                    Block { year, max, days_observed: days_in_year(year) }
                })
                .collect(),
            Units::Inches,
        )
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.max).collect()
    }

    pub fn years(&self) -> Vec<i32> {
        self.blocks.iter().map(|b| b.year).collect()
    }

    pub fn to_inches(&self) -> BlockMaxima {
        let mut out = self.clone();
        for b in &mut out.blocks {
            b.max = self.units.to_inches(b.max);
        }
        out.units = Units::Inches;
        out
    }

    /// Blocks with `from <= year <= to`.
    pub fn filter_years(&self, from: i32, to: i32) -> Result<BlockMaxima> {
        let blocks: Vec<Block> = self.blocks.iter().filter(|b| b.year >= from && b.year <= to).copied().collect();
        if blocks.is_empty() {
            return Err(Error::NoBlocksRetained);
        }
        Ok(Self { blocks, units: self.units })
    }

    /// Replaces the maximum of an existing year.
    pub fn with_override(&self, year: i32, value: f64) -> Result<BlockMaxima> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Domain(format!("override value must be positive, got {value}")));
        }
        let mut out = self.clone();
        let block = out
            .blocks
            .iter_mut()
            .find(|b| b.year == year)
            .ok_or_else(|| Error::Domain(format!("no block for year {year} to override")))?;
        block.max = value;
        Ok(out)
    }

    pub fn mean(&self) -> f64 {
        stats::mean(&self.values())
    }

    pub fn std_dev(&self) -> Result<f64> {
        stats::sample_std(&self.values())
    }

    /// Canonical `year,max_inches,days_observed` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["year", "max_inches", "days_observed"])?;
        for b in &self.to_inches().blocks {
            w.write_record([b.year.to_string(), b.max.to_string(), b.days_observed.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(source: R) -> Result<BlockMaxima> {
        #[derive(Deserialize)]
        struct Row {
            year: i32,
            max_inches: f64,
            days_observed: u32,
        }
        let mut reader = csv::Reader::from_reader(source);
        let mut blocks = Vec::new();
        for row in reader.deserialize::<Row>() {
            let row = row?;
            blocks.push(Block { year: row.year, max: row.max_inches, days_observed: row.days_observed });
        }
        if blocks.is_empty() {
            return Err(Error::NoBlocksRetained);
        }
        BlockMaxima::new(blocks, Units::Inches)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum DropReason {
    Coverage { days_observed: u32, days_in_year: u32 },
    ZeroMaximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroppedBlock {
    pub year: i32,
    #[serde(flatten)]
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockExtraction {
    pub maxima: BlockMaxima,
    pub dropped: Vec<DroppedBlock>,
}

/// Calendar-year maxima, dropping years below `min_coverage` or with a zero maximum.
pub fn block_maxima(daily: &DailySeries, min_coverage: f64) -> Result<BlockExtraction> {
    if !(min_coverage > 0.0 && min_coverage <= 1.0) {
        return Err(Error::Domain(format!("coverage must lie in (0, 1], got {min_coverage}")));
    }
    if daily.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut per_year: BTreeMap<i32, (f64, u32)> = BTreeMap::new();
    for o in &daily.observations {
        let e = per_year.entry(o.date.year()).or_insert((f64::NEG_INFINITY, 0));
        e.0 = e.0.max(o.amount);
        e.1 += 1;
    }
    let mut blocks = Vec::new();
    let mut dropped = Vec::new();
    for (year, (max, days)) in per_year {
        let total = days_in_year(year);
        if f64::from(days) / f64::from(total) < min_coverage {
            dropped
                .push(DroppedBlock { year, reason: DropReason::Coverage { days_observed: days, days_in_year: total } });
        } else if max <= 0.0 {
            dropped.push(DroppedBlock { year, reason: DropReason::ZeroMaximum });
        } else {
            blocks.push(Block { year, max, days_observed: days });
        }
    }
    if blocks.is_empty() {
        return Err(Error::NoBlocksRetained);
    }
    Ok(BlockExtraction { maxima: BlockMaxima::new(blocks, daily.units)?, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn parse(text: &str) -> Result<(DailySeries, ParseStats)> {
        parse_daily_csv(text.as_bytes(), &ParseConfig::default())
    }

    fn full_year(year: i32, f: impl Fn(u32) -> f64) -> Vec<(NaiveDate, f64)> {
        let start = d(year, 1, 1);
        (0..days_in_year(year)).map(|i| (start + chrono::Days::new(u64::from(i)), f(i))).collect()
    }

    #[test]
    fn parses_two_rows() {
        let (s, st) = parse("DATE,PRCP\n2020-01-01,0.5\n2020-01-02,1.2\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(st.skipped_blank, 0);
        assert_eq!(s.observations()[1].amount, 1.2);
    }

    #[test]
    fn skips_blank_values() {
        let (s, st) = parse("DATE,PRCP\n2020-01-01,0.5\n2020-01-02,\n2020-01-03,0.1\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(st.skipped_blank, 1);
    }

    #[test]
    fn noaa_style_export() {
        let text = "\"STATION\",\"NAME\",\"DATE\",\"PRCP\",\"SNOW\"\n\
                    \"USW00004781\",\"ISLIP, NY US\",\"1964-01-02\",\"0.25\",\"0.0\"\n\
                    \"USW00004781\",\"ISLIP, NY US\",\"1964-01-01\",\"T\",\"\"\n";
        let (s, _) = parse(text).unwrap();
        assert_eq!(s.station_id(), "USW00004781");
        assert_eq!(s.observations()[0].date, d(1964, 1, 1));
        assert_eq!(s.observations()[0].amount, 0.0);
    }

    #[test]
    fn parse_errors() {
        match parse("DATE,PRCP\n2020-01-01,0.5\n2020-13-01,1.0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("DATE,PRCP\n2020-01-01,-0.5\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse("DATE,PRCP\n2020-01-01,0.5\n2020-01-01,0.7\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse("DAY,PRCP\n2020-01-01,0.5\n"), Err(Error::Parse { line: 1, .. })));
        let (s, st) = parse("DATE,PRCP\n2020-01-01,0.5\n2020-01-01,0.5\n").unwrap();
        assert_eq!((s.len(), st.duplicate_rows), (1, 1));
    }

    #[test]
    fn millimeters_are_converted() {
        let cfg = ParseConfig { units: Units::Millimeters, ..ParseConfig::default() };
        let (s, _) = parse_daily_csv("DATE,PRCP\n2020-01-01,25.4\n".as_bytes(), &cfg).unwrap();
        assert_eq!(s.units(), Units::Inches);
        assert_eq!(s.observations()[0].amount, 1.0);
    }

    #[test]
    fn merge_rules() {
        let a = DailySeries::new("A", Units::Inches, vec![(d(2000, 1, 1), 1.0), (d(2000, 1, 2), 2.0)]).unwrap();
        let b = DailySeries::new("B", Units::Inches, vec![(d(1999, 12, 31), 5.0)]).unwrap();
        let m = merge_series(&a, &b).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.stations()[m.observations()[0].station], "B");
        assert_eq!(m.stations()[m.observations()[2].station], "A");

        let c = DailySeries::new("C", Units::Inches, vec![(d(2000, 1, 1), 9.0), (d(2000, 1, 2), 9.0)]).unwrap();
        let m = merge_series(&a, &c).unwrap();
        assert_eq!(m.observations().iter().map(|o| o.amount).collect::<Vec<_>>(), vec![1.0, 2.0]);

        let mm = DailySeries::new("M", Units::Millimeters, vec![]).unwrap();
        assert!(matches!(merge_series(&a, &mm), Err(Error::UnitMismatch(..))));
    }

    #[test]
    fn single_year_block() {
        let mut obs = full_year(2001, |_| 0.1);
        obs[151].1 = 3.5;
        let s = DailySeries::new("X", Units::Inches, obs).unwrap();
        let e = block_maxima(&s, 0.9).unwrap();
        assert_eq!(e.maxima.blocks(), &[Block { year: 2001, max: 3.5, days_observed: 365 }]);
        assert!(e.dropped.is_empty());
    }

    #[test]
    fn sparse_and_dry_years_are_dropped() {
        let mut obs = full_year(2001, |_| 0.2);
        obs.extend(full_year(2002, |i| if i < 100 { 1.0 } else { 0.0 }).into_iter().take(100));
        obs.extend(full_year(2003, |_| 0.0));
        let s = DailySeries::new("X", Units::Inches, obs).unwrap();
        let e = block_maxima(&s, 0.9).unwrap();
        assert_eq!(e.maxima.years(), vec![2001]);
        assert_eq!(
            e.dropped,
            vec![
                DroppedBlock { year: 2002, reason: DropReason::Coverage { days_observed: 100, days_in_year: 365 } },
                DroppedBlock { year: 2003, reason: DropReason::ZeroMaximum },
            ]
        );
        let dry = DailySeries::new("X", Units::Inches, full_year(2003, |_| 0.0)).unwrap();
        assert!(matches!(block_maxima(&dry, 0.9), Err(Error::NoBlocksRetained)));
        assert!(block_maxima(&s, 0.0).is_err());
    }

    #[test]
    fn block_maxima_csv_round_trip() {
        let b = BlockMaxima::from_values(1938, &[2.5, 3.25, 1.75]).unwrap();
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("year,max_inches,days_observed\n1938,2.5,365\n"));
        assert_eq!(BlockMaxima::read_csv(buf.as_slice()).unwrap(), b);
    }

    #[test]
    fn overrides_and_filters() {
        let b = BlockMaxima::from_values(2012, &[2.0, 3.0, 13.5, 4.0]).unwrap();
        let o = b.with_override(2014, 5.0).unwrap();
        assert_eq!(o.values(), vec![2.0, 3.0, 5.0, 4.0]);
        assert!(b.with_override(1990, 5.0).is_err());
        assert_eq!(b.filter_years(2013, 2014).unwrap().years(), vec![2013, 2014]);
        assert!(b.filter_years(1900, 1901).is_err());
    }

    #[test]
    fn block_invariants_enforced() {
        let bad =
            vec![Block { year: 2000, max: 1.0, days_observed: 366 }, Block { year: 2000, max: 1.0, days_observed: 1 }];
        assert!(BlockMaxima::new(bad, Units::Inches).is_err());
        assert!(BlockMaxima::from_values(2000, &[1.0, 0.0]).is_err());
        let too_many = vec![Block { year: 2001, max: 1.0, days_observed: 366 }];
        assert!(BlockMaxima::new(too_many, Units::Inches).is_err());
    }

    fn series_strategy() -> impl Strategy<Value = Vec<(NaiveDate, f64)>> {
        prop::collection::btree_map(0u32..4000, 0u32..2000, 1..400).prop_map(|m| {
            m.into_iter()
                .map(|(day, v)| (d(1990, 1, 1) + chrono::Days::new(u64::from(day)), f64::from(v) / 100.0))
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn csv_round_trip(obs in series_strategy()) {
            let s = DailySeries::new("SYN", Units::Inches, obs).unwrap();
            let mut buf = Vec::new();
            write_daily_csv(&s, &mut buf).unwrap();
            let (back, _) = parse_daily_csv(buf.as_slice(), &ParseConfig::default()).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn row_order_does_not_matter(obs in series_strategy(), seed in any::<u64>()) {
            let s = DailySeries::new("SYN", Units::Inches, obs).unwrap();
            let mut buf = Vec::new();
            write_daily_csv(&s, &mut buf).unwrap();
            let text = String::from_utf8(buf).unwrap();
            let mut lines: Vec<&str> = text.lines().skip(1).collect();
            let n = lines.len();
            for i in 0..n {
                let j = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) % n as u64) as usize;
                lines.swap(i, j);
            }
            let shuffled = format!("STATION,DATE,PRCP\n{}\n", lines.join("\n"));
            let (back, _) = parse_daily_csv(shuffled.as_bytes(), &ParseConfig::default()).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn maxima_match_exhaustive_scan(obs in series_strategy()) {
            let s = DailySeries::new("SYN", Units::Inches, obs.clone()).unwrap();
            if let Ok(e) = block_maxima(&s, 0.05) {
                for b in e.maxima.blocks() {
                    let expect = obs.iter().filter(|(dt, _)| dt.year() == b.year).map(|o| o.1).fold(f64::MIN, f64::max);
                    let days = obs.iter().filter(|(dt, _)| dt.year() == b.year).count() as u32;
                    prop_assert_eq!(b.max, expect);
                    prop_assert_eq!(b.days_observed, days);
                }
            }
        }

        #[test]
        fn merge_preserves_primary(p in series_strategy(), f in series_strategy()) {
            let primary = DailySeries::new("P", Units::Inches, p).unwrap();
            let fallback = DailySeries::new("F", Units::Inches, f).unwrap();
            let m = merge_series(&primary, &fallback).unwrap();
            let restricted: Vec<Observation> = m.observations().iter()
                .filter(|o| primary.observations().iter().any(|q| q.date == o.date))
                .copied()
                .collect();
            prop_assert_eq!(restricted.as_slice(), primary.observations());
            prop_assert!(m.observations().windows(2).all(|w| w[0].date < w[1].date));
        }

        #[test]
        fn unit_conversion_commutes(obs in series_strategy()) {
            let mm = DailySeries::new("SYN", Units::Millimeters, obs).unwrap();
            if let Ok(raw) = block_maxima(&mm, 0.05) {
                let a = raw.maxima.to_inches();
                let b = block_maxima(&mm.to_inches(), 0.05).unwrap().maxima;
                prop_assert_eq!(a.years(), b.years());
                for (x, y) in a.values().iter().zip(b.values()) {
                    prop_assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }
}
