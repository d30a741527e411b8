//! Dataset manifests: a TOML file fixing directedness, the timeline
//! resolution, and where the relation files live.
//!
//! Time columns in the data files are either plain integers (`resolution =
//! "integer"`) or ISO-8601 dates mapped onto the integer timeline as whole
//! day/month/year steps from a fixed `origin` date.

use std::path::{Path, PathBuf};

use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::loader::LoadError;

/// The manifest file as written on disk. Paths are relative to the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    pub directed: bool,
    /// `integer`, `day`, `month`, or `year`.
    pub resolution: String,
    /// ISO date anchoring point 0; required unless resolution is `integer`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
    pub vertices: PathBuf,
    pub edges: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_attrs: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_attrs: Option<PathBuf>,
    /// Expected data-line counts per file, verified at load when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Counts>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counts {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_attrs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_attrs: Option<usize>,
}

/// A parsed manifest with resolved paths and a ready time mapper.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub path: PathBuf,
    pub directed: bool,
    pub mapper: TimeMapper,
    pub vertices: PathBuf,
    pub edges: PathBuf,
    pub vertex_attrs: Option<PathBuf>,
    pub edge_attrs: Option<PathBuf>,
    pub counts: Option<Counts>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalendarUnit {
    Day,
    Month,
    Year,
}

impl CalendarUnit {
    pub fn name(&self) -> &'static str {
        match self {
            CalendarUnit::Day => "day",
            CalendarUnit::Month => "month",
            CalendarUnit::Year => "year",
        }
    }
}

/// Maps between the file format's time column and timeline integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeMapper {
    Integer,
    Calendar { unit: CalendarUnit, origin: NaiveDate },
}

/// Month stepping with chrono's end-of-month clamping, in both directions.
fn add_months(origin: NaiveDate, n: i64) -> Option<NaiveDate> {
    let mag = u32::try_from(n.unsigned_abs()).ok()?;
    if n >= 0 {
        origin.checked_add_months(Months::new(mag))
    } else {
        origin.checked_sub_months(Months::new(mag))
    }
}

impl TimeMapper {
    pub fn resolution_name(&self) -> &'static str {
        match self {
            TimeMapper::Integer => "integer",
            TimeMapper::Calendar { unit, .. } => unit.name(),
        }
    }

    pub fn origin_text(&self) -> Option<String> {
        match self {
            TimeMapper::Integer => None,
            TimeMapper::Calendar { origin, .. } => Some(origin.format("%Y-%m-%d").to_string()),
        }
    }

    /// Parses one time field into a timeline point.
    pub fn to_point(&self, text: &str) -> Result<i64, String> {
        match self {
            TimeMapper::Integer => text
                .parse::<i64>()
                .map_err(|_| format!("`{text}` is not a timeline integer")),
            TimeMapper::Calendar { unit, origin } => {
                let date = NaiveDate::parse_from_str(text, "%Y-%m-%d")
                    .map_err(|_| format!("`{text}` is not an ISO-8601 date (YYYY-MM-DD)"))?;
                let p = match unit {
                    CalendarUnit::Day => (date - *origin).num_days(),
                    CalendarUnit::Month => {
                        i64::from(date.year() - origin.year()) * 12
                            + i64::from(date.month() as i32 - origin.month() as i32)
                    }
                    CalendarUnit::Year => i64::from(date.year() - origin.year()),
                };
                // Round-tripping catches dates off the resolution grid, with
                // chrono's month-end clamping applied consistently.
                let canonical = date.format("%Y-%m-%d").to_string();
                if self.from_point(p) != Some(canonical) {
                    return Err(format!(
                        "date {date} is not on the {} grid anchored at {origin}",
                        unit.name()
                    ));
                }
                Ok(p)
            }
        }
    }

    /// Formats a timeline point as a time field. `None` when the point has
    /// no calendar representation (out of chrono's range).
    pub fn from_point(&self, p: i64) -> Option<String> {
        match self {
            TimeMapper::Integer => Some(p.to_string()),
            TimeMapper::Calendar { unit, origin } => {
                let date = match unit {
                    CalendarUnit::Day => {
                        origin.checked_add_signed(chrono::Duration::days(p))?
                    }
                    CalendarUnit::Month => add_months(*origin, p)?,
                    CalendarUnit::Year => add_months(*origin, p.checked_mul(12)?)?,
                };
                Some(date.format("%Y-%m-%d").to_string())
            }
        }
    }
}

fn manifest_error(path: &Path, message: impl Into<String>) -> LoadError {
    LoadError::Manifest {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

impl DatasetManifest {
    /// Reads and checks a manifest file.
    pub fn read(path: &Path) -> Result<DatasetManifest, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let raw: ManifestFile =
            toml::from_str(&text).map_err(|e| manifest_error(path, e.to_string()))?;
        Self::from_file(path, &raw)
    }

    /// Resolves a deserialized manifest against its location on disk.
    pub fn from_file(path: &Path, raw: &ManifestFile) -> Result<DatasetManifest, LoadError> {
        let unit = match raw.resolution.as_str() {
            "integer" => None,
            "day" => Some(CalendarUnit::Day),
            "month" => Some(CalendarUnit::Month),
            "year" => Some(CalendarUnit::Year),
            other => {
                return Err(manifest_error(
                    path,
                    format!("unknown resolution `{other}` (expected integer, day, month, or year)"),
                ))
            }
        };
        let mapper = match unit {
            None => TimeMapper::Integer,
            Some(unit) => {
                let origin_text = raw.origin.as_deref().ok_or_else(|| {
                    manifest_error(path, format!("resolution `{}` needs an origin date", unit.name()))
                })?;
                let origin = NaiveDate::parse_from_str(origin_text, "%Y-%m-%d").map_err(|_| {
                    manifest_error(path, format!("origin `{origin_text}` is not an ISO-8601 date"))
                })?;
                TimeMapper::Calendar { unit, origin }
            }
        };
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        let join = |p: &PathBuf| dir.join(p);
        Ok(DatasetManifest {
            path: path.to_path_buf(),
            directed: raw.directed,
            mapper,
            vertices: join(&raw.vertices),
            edges: join(&raw.edges),
            vertex_attrs: raw.vertex_attrs.as_ref().map(join),
            edge_attrs: raw.edge_attrs.as_ref().map(join),
            counts: raw.counts.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn month_mapper() -> TimeMapper {
        TimeMapper::Calendar {
            unit: CalendarUnit::Month,
            origin: NaiveDate::from_ymd_opt(2015, 1, 15).unwrap(),
        }
    }

    #[test]
    fn integer_resolution_round_trips() {
        let m = TimeMapper::Integer;
        assert_eq!(m.to_point("42").unwrap(), 42);
        assert_eq!(m.to_point("-3").unwrap(), -3);
        assert_eq!(m.from_point(-3).unwrap(), "-3");
        assert!(m.to_point("2015-01-15").is_err());
    }

    #[test]
    fn month_resolution_maps_the_running_example_dates() {
        let m = month_mapper();
        assert_eq!(m.to_point("2015-01-15").unwrap(), 0);
        assert_eq!(m.to_point("2015-02-15").unwrap(), 1);
        assert_eq!(m.to_point("2016-01-15").unwrap(), 12);
        assert_eq!(m.to_point("2014-12-15").unwrap(), -1);
        assert_eq!(m.from_point(1).unwrap(), "2015-02-15");
    }

    #[test]
    fn off_grid_dates_are_rejected() {
        let m = month_mapper();
        let err = m.to_point("2015-02-16").unwrap_err();
        assert!(err.contains("not on the month grid"), "{err}");
    }

    #[test]
    fn month_end_clamping_is_consistent() {
        let m = TimeMapper::Calendar {
            unit: CalendarUnit::Month,
            origin: NaiveDate::from_ymd_opt(2015, 1, 31).unwrap(),
        };
        // January 31 plus one month clamps to February 28; the clamped date
        // is on the grid, the nominal day 31 of March is point 2.
        assert_eq!(m.from_point(1).unwrap(), "2015-02-28");
        assert_eq!(m.to_point("2015-02-28").unwrap(), 1);
        assert_eq!(m.to_point("2015-03-31").unwrap(), 2);
    }

    #[test]
    fn day_and_year_units_step_as_expected() {
        let d = TimeMapper::Calendar {
            unit: CalendarUnit::Day,
            origin: NaiveDate::from_ymd_opt(2020, 2, 28).unwrap(),
        };
        assert_eq!(d.to_point("2020-03-01").unwrap(), 2); // 2020 is a leap year
        let y = TimeMapper::Calendar {
            unit: CalendarUnit::Year,
            origin: NaiveDate::from_ymd_opt(2010, 6, 1).unwrap(),
        };
        assert_eq!(y.to_point("2015-06-01").unwrap(), 5);
        assert!(y.to_point("2015-07-01").is_err());
    }
}
