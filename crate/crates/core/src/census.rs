//! Census count series, period alignment and inference of (TFR, e0).

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{invert, sweep, ClosedRange, FeasibleSet, GridSpec, GridSurface};

pub const DEFAULT_CWR_HALFWIDTH: f64 = 0.05;
pub const DEFAULT_GROWTH_HALFWIDTH: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusSnapshot {
    /// Calendar year, possibly fractional.
    pub year: f64,
    pub children_0_14: f64,
    pub women_15_plus: f64,
    pub total_population: f64,
}

impl CensusSnapshot {
    pub fn new(
        year: f64,
        children_0_14: f64,
        women_15_plus: f64,
        total_population: f64,
    ) -> Result<Self> {
        let s = CensusSnapshot {
            year,
            children_0_14,
            women_15_plus,
            total_population,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let counts = [
            self.children_0_14,
            self.women_15_plus,
            self.total_population,
        ];
        if !self.year.is_finite() || counts.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::Domain(format!(
                "census {}: counts must be positive",
                self.year
            )));
        }
        if self.children_0_14 + self.women_15_plus > self.total_population {
            return Err(Error::Domain(format!(
                "census {}: children and women exceed the total",
                self.year
            )));
        }
        Ok(())
    }

    /// Children 0-14 per woman 15+.
    pub fn cwr(&self) -> Result<f64> {
        cwr(self)
    }
}

pub fn cwr(snapshot: &CensusSnapshot) -> Result<f64> {
    if !(snapshot.women_15_plus > 0.0) {
        return Err(Error::Domain(format!(
            "census {}: no women aged 15+",
            snapshot.year
        )));
    }
    Ok(snapshot.children_0_14 / snapshot.women_15_plus)
}

/// Reads `year, children_0_14, women_15_plus, total_population`; `#` lines and
/// blank lines are skipped.
pub fn read_series<R: Read>(input: R) -> Result<Vec<CensusSnapshot>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for row in reader.deserialize::<CensusSnapshot>() {
        let row = row?;
        row.validate()?;
        out.push(row);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignedObservation {
    pub midpoint: f64,
    /// Mean of the two endpoint ratios.
    pub cwr: f64,
    /// Mean annual growth over the period, per year.
    pub growth: f64,
    pub source_years: (f64, f64),
}

/// One observation per adjacent pair of censuses.
pub fn align(series: &[CensusSnapshot]) -> Result<Vec<AlignedObservation>> {
    if series.len() < 2 {
        return Err(Error::Domain(
            "alignment needs at least two censuses".into(),
        ));
    }
    series
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            if !(b.year > a.year) {
                return Err(Error::Ordering(format!(
                    "census years must strictly increase ({} then {})",
                    a.year, b.year
                )));
            }
            Ok(AlignedObservation {
                midpoint: 0.5 * (a.year + b.year),
                cwr: 0.5 * (cwr(a)? + cwr(b)?),
                growth: (b.total_population / a.total_population).ln() / (b.year - a.year),
                source_years: (a.year, b.year),
            })
        })
        .collect()
}

/// Feasible cells of an existing surface within `observation ± halfwidth`.
pub fn infer_on(
    observation: &AlignedObservation,
    cwr_halfwidth: f64,
    growth_halfwidth: f64,
    surface: &GridSurface,
) -> Result<FeasibleSet> {
    invert(
        surface,
        ClosedRange::around(observation.cwr, cwr_halfwidth)?,
        Some(ClosedRange::around(observation.growth, growth_halfwidth)?),
    )
}

/// Sweeps `spec` and inverts it for one observation.
pub fn infer(
    observation: &AlignedObservation,
    cwr_halfwidth: f64,
    growth_halfwidth: f64,
    spec: &GridSpec,
) -> Result<FeasibleSet> {
    ClosedRange::around(0.0, cwr_halfwidth)?;
    ClosedRange::around(0.0, growth_halfwidth)?;
    infer_on(observation, cwr_halfwidth, growth_halfwidth, &sweep(spec)?)
}
