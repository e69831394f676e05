//! (TFR, e0) grid sweeps and range-based inversion of child-woman ratios and
//! growth rates.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fertility::{scale_to_tfr, FertilityPattern};
use crate::format::sig6;
use crate::lifetable::{LifeTablePair, MortalityFamily};
use crate::stable::{solve_lotka, stable_structure, SexRatioAtBirth};

pub const DEFAULT_MAX_CELLS: usize = 50_000;

/// Evenly spaced axis values `min, min + step, ..., <= max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        let r = AxisRange { min, max, step };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if ![self.min, self.max, self.step]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::Domain(format!("axis {self} has non-finite bounds")));
        }
        if self.step <= 0.0 {
            return Err(Error::Domain(format!("axis {self}: step must be positive")));
        }
        if self.min > self.max {
            return Err(Error::Domain(format!("axis {self}: min exceeds max")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Axis values, rounded to 1e-9 so that decimal steps land on their
    /// nominal values.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| ((self.min + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect()
    }
}

impl fmt::Display for AxisRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.step)
    }
}

impl FromStr for AxisRange {
    type Err = Error;

    /// Parses `min:max:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts = parse_numbers(s)?;
        match parts.as_slice() {
            [min, max, step] => AxisRange::new(*min, *max, *step),
            _ => Err(Error::Domain(format!("expected min:max:step, got '{s}'"))),
        }
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedRange {
    pub lo: f64,
    pub hi: f64,
}

impl ClosedRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::Domain(format!("invalid range {lo}:{hi}")));
        }
        Ok(ClosedRange { lo, hi })
    }

    /// `center ± halfwidth`.
    pub fn around(center: f64, halfwidth: f64) -> Result<Self> {
        if !(halfwidth > 0.0) {
            return Err(Error::Domain(format!(
                "halfwidth must be positive, got {halfwidth}"
            )));
        }
        ClosedRange::new(center - halfwidth, center + halfwidth)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

impl fmt::Display for ClosedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

impl FromStr for ClosedRange {
    type Err = Error;

    /// Parses `lo:hi`.
    fn from_str(s: &str) -> Result<Self> {
        let parts = parse_numbers(s)?;
        match parts.as_slice() {
            [lo, hi] => ClosedRange::new(*lo, *hi),
            _ => Err(Error::Domain(format!("expected lo:hi, got '{s}'"))),
        }
    }
}

fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(':')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("'{p}' in '{s}' is not a number")))
        })
        .collect()
}

/// Grid definition plus the age patterns evaluated on it.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub tfr: AxisRange,
    pub e0: AxisRange,
    pub family: Arc<MortalityFamily>,
    pub pattern: Arc<FertilityPattern>,
    pub srb: SexRatioAtBirth,
    pub max_cells: usize,
}

impl GridSpec {
    /// TFR 2.0-9.0 by 0.2, e0 10-50 by 2.5, sex ratio 105.
    pub fn new(family: Arc<MortalityFamily>, pattern: Arc<FertilityPattern>) -> Self {
        GridSpec {
            tfr: AxisRange {
                min: 2.0,
                max: 9.0,
                step: 0.2,
            },
            e0: AxisRange {
                min: 10.0,
                max: 50.0,
                step: 2.5,
            },
            family,
            pattern,
            srb: SexRatioAtBirth::default(),
            max_cells: DEFAULT_MAX_CELLS,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.tfr.len() * self.e0.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.tfr.validate()?;
        self.e0.validate()?;
        if self.tfr.min < 0.0 {
            return Err(Error::Domain("TFR axis must be non-negative".into()));
        }
        if self.cell_count() > self.max_cells {
            return Err(Error::Domain(format!(
                "grid has {} cells, above the cap of {}",
                self.cell_count(),
                self.max_cells
            )));
        }
        Ok(())
    }

    pub fn summary(&self) -> GridSpecSummary {
        GridSpecSummary {
            tfr: self.tfr,
            e0: self.e0,
            family: self.family.name().to_string(),
            pattern: self.pattern.name().to_string(),
            srb: self.srb.value(),
            terminal_age: self.family.grid().terminal(),
            max_cells: self.max_cells,
        }
    }
}

/// The serializable echo of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpecSummary {
    pub tfr: AxisRange,
    pub e0: AxisRange,
    pub family: String,
    pub pattern: String,
    pub srb: f64,
    pub terminal_age: u32,
    pub max_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub tfr: f64,
    pub e0: f64,
    pub cwr: f64,
    /// Intrinsic growth rate, per year.
    pub growth: f64,
    pub residual: f64,
}

/// Sweep results, stored e0-major: the cell for `(e0_values[j], tfr_values[i])`
/// sits at `j * tfr_values.len() + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSurface {
    pub spec: GridSpecSummary,
    pub tfr_values: Vec<f64>,
    pub e0_values: Vec<f64>,
    pub cells: Vec<GridCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Cwr,
    Growth,
}

impl FromStr for SurfaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cwr" => Ok(SurfaceKind::Cwr),
            "growth" => Ok(SurfaceKind::Growth),
            _ => Err(Error::Domain(format!("unknown surface '{s}' (cwr|growth)"))),
        }
    }
}

impl GridSurface {
    pub fn cell(&self, e0_index: usize, tfr_index: usize) -> &GridCell {
        &self.cells[e0_index * self.tfr_values.len() + tfr_index]
    }

    /// Cell at the given coordinates, matched to within 1e-6.
    pub fn find(&self, tfr: f64, e0: f64) -> Option<&GridCell> {
        let i = self
            .tfr_values
            .iter()
            .position(|v| (v - tfr).abs() < 1e-6)?;
        let j = self.e0_values.iter().position(|v| (v - e0).abs() < 1e-6)?;
        Some(self.cell(j, i))
    }

    /// One value per cell in storage order.
    pub fn values(&self, kind: SurfaceKind) -> Vec<f64> {
        self.cells
            .iter()
            .map(|c| match kind {
                SurfaceKind::Cwr => c.cwr,
                SurfaceKind::Growth => c.growth,
            })
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c.residual.abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `tfr,e0,cwr,growth_per_year,residual`, 6 significant
    /// digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_cells_csv(out, &self.cells)
    }
}

pub(crate) fn write_cells_csv<W: Write>(out: W, cells: &[GridCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tfr", "e0", "cwr", "growth_per_year", "residual"])?;
    for c in cells {
        w.write_record([
            sig6(c.tfr),
            sig6(c.e0),
            sig6(c.cwr),
            sig6(c.growth),
            sig6(c.residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Stable outcomes for one (TFR, e0) combination.
pub fn evaluate_cell(
    family: &MortalityFamily,
    pattern: &FertilityPattern,
    srb: SexRatioAtBirth,
    tfr: f64,
    e0: f64,
) -> Result<GridCell> {
    let wrap = |e: Error| Error::Cell {
        tfr,
        e0,
        source: Box::new(e),
    };
    let tables = family.tables_for_female_e0(e0).map_err(wrap)?;
    evaluate_with_tables(&tables, pattern, srb, tfr, e0).map_err(wrap)
}

fn evaluate_with_tables(
    tables: &LifeTablePair,
    pattern: &FertilityPattern,
    srb: SexRatioAtBirth,
    tfr: f64,
    e0: f64,
) -> Result<GridCell> {
    let schedule = scale_to_tfr(pattern, tfr)?;
    let root = solve_lotka(&schedule, &tables.female, srb)?;
    let sol = stable_structure(&schedule, tables, srb, root.r)?;
    Ok(GridCell {
        tfr,
        e0,
        cwr: sol.child_woman_ratio,
        growth: sol.r,
        residual: root.residual,
    })
}

/// Evaluates every cell of the grid. Rows are computed in parallel and
/// assembled in index order, so the result does not depend on scheduling.
pub fn sweep(spec: &GridSpec) -> Result<GridSurface> {
    spec.validate()?;
    let tfr_values = spec.tfr.values();
    let e0_values = spec.e0.values();
    let rows: Vec<Result<Vec<GridCell>>> = e0_values
        .par_iter()
        .map(|&e0| {
            let tables = spec
                .family
                .tables_for_female_e0(e0)
                .map_err(|e| Error::Cell {
                    tfr: tfr_values[0],
                    e0,
                    source: Box::new(e),
                })?;
            tfr_values
                .iter()
                .map(|&tfr| {
                    evaluate_with_tables(&tables, &spec.pattern, spec.srb, tfr, e0).map_err(|e| {
                        Error::Cell {
                            tfr,
                            e0,
                            source: Box::new(e),
                        }
                    })
                })
                .collect()
        })
        .collect();
    let mut cells = Vec::with_capacity(spec.cell_count());
    for row in rows {
        cells.extend(row?);
    }
    Ok(GridSurface {
        spec: spec.summary(),
        tfr_values,
        e0_values,
        cells,
    })
}

/// Cells satisfying the query ranges, in surface order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleSet {
    pub cwr_range: ClosedRange,
    pub growth_range: Option<ClosedRange>,
    pub cells: Vec<GridCell>,
}

impl FeasibleSet {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, tfr: f64, e0: f64) -> bool {
        self.cells
            .iter()
            .any(|c| (c.tfr - tfr).abs() < 1e-6 && (c.e0 - e0).abs() < 1e-6)
    }

    /// Smallest and largest TFR among members.
    pub fn tfr_span(&self) -> Option<(f64, f64)> {
        span(self.cells.iter().map(|c| c.tfr))
    }

    pub fn e0_span(&self) -> Option<(f64, f64)> {
        span(self.cells.iter().map(|c| c.e0))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_cells_csv(out, &self.cells)
    }
}

fn span(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Every cell whose CWR lies in `cwr_range` and, when given, whose growth
/// rate lies in `growth_range`. Both intervals are closed.
pub fn invert(
    surface: &GridSurface,
    cwr_range: ClosedRange,
    growth_range: Option<ClosedRange>,
) -> Result<FeasibleSet> {
    for r in std::iter::once(&cwr_range).chain(growth_range.as_ref()) {
        ClosedRange::new(r.lo, r.hi)?;
    }
    let cells = surface
        .cells
        .iter()
        .filter(|c| cwr_range.contains(c.cwr) && growth_range.is_none_or(|g| g.contains(c.growth)))
        .copied()
        .collect();
    Ok(FeasibleSet {
        cwr_range,
        growth_range,
        cells,
    })
}

/// Female e0 in `[e0_lo, e0_hi]` at which the stable CWR equals `target` for
/// the given TFR; CWR is increasing in e0 over the supported range.
pub fn e0_for_cwr(
    family: &MortalityFamily,
    pattern: &FertilityPattern,
    srb: SexRatioAtBirth,
    tfr: f64,
    target: f64,
    (mut lo, mut hi): (f64, f64),
) -> Result<f64> {
    let cwr = |e0: f64| evaluate_cell(family, pattern, srb, tfr, e0).map(|c| c.cwr);
    let (clo, chi) = (cwr(lo)?, cwr(hi)?);
    if !(clo <= target && target <= chi) {
        return Err(Error::Domain(format!(
            "CWR {target} not bracketed by e0 {lo}..{hi} at TFR {tfr} ({clo:.4}..{chi:.4})"
        )));
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if cwr(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
