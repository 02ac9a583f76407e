use serde::{Deserialize, Serialize};

use crate::corpus::MIN_YEAR;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalKind {
    SevenClass,
    FourteenClass,
}

/// One bin covering an inclusive year range; `end == None` is open-ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalBin {
    pub label: String,
    pub start: i32,
    pub end: Option<i32>,
}

impl TemporalBin {
    fn closed(label: impl Into<String>, start: i32, end: i32) -> Self {
        TemporalBin { label: label.into(), start, end: Some(end) }
    }

    fn contains(&self, year: i32) -> bool {
        year >= self.start && self.end.is_none_or(|e| year <= e)
    }
}

/// Ordered, disjoint, contiguous bins from a floor year to an open-ended
/// latest decade.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalScheme {
    pub kind: TemporalKind,
    pub bins: Vec<TemporalBin>,
}

fn decade_bins(from: i32, last: i32) -> impl Iterator<Item = TemporalBin> {
    (from..=last).step_by(10).map(move |d| TemporalBin {
        label: format!("{d}s"),
        start: d,
        end: (d != last).then_some(d + 9),
    })
}

impl TemporalScheme {
    /// Everything before 1960 in one bin, then one bin per decade up to the
    /// open-ended 2010s.
    pub fn seven_class() -> Self {
        let mut bins = vec![TemporalBin::closed("PRE_1960", MIN_YEAR, 1959)];
        bins.extend(decade_bins(1960, 2010));
        TemporalScheme { kind: TemporalKind::SevenClass, bins }
    }

    /// Merged early bins 1830-1840, 1850-1860, 1870-1880 and 1890-1910, then
    /// one bin per decade from the 1920s to the open-ended 2010s.
    pub fn fourteen_class() -> Self {
        let mut bins = vec![
            TemporalBin::closed("1830-1840", 1830, 1849),
            TemporalBin::closed("1850-1860", 1850, 1869),
            TemporalBin::closed("1870-1880", 1870, 1889),
            TemporalBin::closed("1890-1910", 1890, 1919),
        ];
        bins.extend(decade_bins(1920, 2010));
        TemporalScheme { kind: TemporalKind::FourteenClass, bins }
    }

    pub fn new(kind: TemporalKind) -> Self {
        match kind {
            TemporalKind::SevenClass => Self::seven_class(),
            TemporalKind::FourteenClass => Self::fourteen_class(),
        }
    }

    pub fn floor(&self) -> i32 {
        self.bins[0].start
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.bins.iter().map(|b| b.label.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinAssignment {
    pub label: String,
    /// The year preceded the scheme floor and was clamped to the first bin.
    pub clamped: bool,
}

pub fn bin_temporal(year: i32, scheme: &TemporalScheme) -> BinAssignment {
    if year < scheme.floor() {
        return BinAssignment { label: scheme.bins[0].label.clone(), clamped: true };
    }
    let bin =
        scheme.bins.iter().find(|b| b.contains(year)).expect("bins are contiguous and open-ended above the floor");
    BinAssignment { label: bin.label.clone(), clamped: false }
}
