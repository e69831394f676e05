//! Stable population implied by constant fertility and mortality.
//!
//! The intrinsic growth rate `r` solves the abridged characteristic equation
//!
//! ```text
//! sum_x exp(-r (x + 2.5)) nL_f(x) f(x) 100 / (100 + srb) = 1
//! ```
//!
//! and each age-sex share is proportional to `B_s exp(-r (x + 2.5)) nL_s(x)`
//! with `B_female : B_male = 100 : srb`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fertility::FertilitySchedule;
use crate::lifetable::{AgeGrid, LifeTable, LifeTablePair, Sex};

/// Bracket for the growth rate, per year.
pub const GROWTH_BRACKET: (f64, f64) = (-0.15, 0.15);
const BRACKET_WIDTH: f64 = 1e-12;
/// Largest acceptable characteristic-equation residual.
pub const MAX_RESIDUAL: f64 = 1e-10;

/// Male births per 100 female births.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SexRatioAtBirth(f64);

impl SexRatioAtBirth {
    pub fn new(males_per_100_females: f64) -> Result<Self> {
        if !(males_per_100_females.is_finite() && males_per_100_females > 0.0) {
            return Err(Error::Domain(format!(
                "sex ratio at birth must be positive, got {males_per_100_females}"
            )));
        }
        Ok(SexRatioAtBirth(males_per_100_females))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Fraction of all births that are female.
    pub fn female_fraction(&self) -> f64 {
        100.0 / (100.0 + self.0)
    }

    pub fn male_fraction(&self) -> f64 {
        self.0 / (100.0 + self.0)
    }
}

impl Default for SexRatioAtBirth {
    fn default() -> Self {
        SexRatioAtBirth(105.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LotkaRoot {
    /// Intrinsic growth rate, per year.
    pub r: f64,
    /// Left side minus one at `r`.
    pub residual: f64,
}

/// Daughters per woman: `sum nL_f(x) f(x) 100 / (100 + srb)`.
pub fn net_reproduction_rate(
    schedule: &FertilitySchedule,
    female: &LifeTable,
    srb: SexRatioAtBirth,
) -> f64 {
    characteristic(schedule, female, srb, 0.0)
}

fn characteristic(
    schedule: &FertilitySchedule,
    female: &LifeTable,
    srb: SexRatioAtBirth,
    r: f64,
) -> f64 {
    let grid = female.grid();
    let ff = srb.female_fraction();
    let l0 = female.lx()[0];
    schedule
        .on_grid(grid)
        .iter()
        .zip(female.nlx())
        .enumerate()
        .filter(|(_, (f, _))| **f > 0.0)
        .map(|(i, (f, nl))| (-r * grid.midpoint(i)).exp() * nl / l0 * f * ff)
        .sum()
}

/// Solves the characteristic equation by bisection on [`GROWTH_BRACKET`].
pub fn solve_lotka(
    schedule: &FertilitySchedule,
    female: &LifeTable,
    srb: SexRatioAtBirth,
) -> Result<LotkaRoot> {
    if female.sex() != Sex::Female {
        return Err(Error::Domain(
            "the characteristic equation needs a female table".into(),
        ));
    }
    if schedule.rates().iter().all(|&f| f == 0.0) {
        return Err(Error::NoRoot("fertility is zero at every age".into()));
    }
    let g = |r: f64| characteristic(schedule, female, srb, r) - 1.0;
    let (mut lo, mut hi) = GROWTH_BRACKET;
    if g(lo) < 0.0 || g(hi) > 0.0 {
        return Err(Error::NoRoot(format!(
            "growth rate outside [{lo}, {hi}] (NRR {:.4})",
            g(0.0) + 1.0
        )));
    }
    let mut steps = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        let v = g(mid);
        if v == 0.0 {
            return Ok(LotkaRoot {
                r: mid,
                residual: 0.0,
            });
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
        if hi - lo < BRACKET_WIDTH {
            let r = 0.5 * (lo + hi);
            let residual = g(r);
            if residual.abs() < MAX_RESIDUAL {
                return Ok(LotkaRoot { r, residual });
            }
        }
        if steps > 200 {
            let r = 0.5 * (lo + hi);
            return Err(Error::NoRoot(format!(
                "residual {} at r = {r} after {steps} bisections",
                g(r)
            )));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableSolution {
    pub grid: AgeGrid,
    /// Intrinsic growth rate, per year.
    pub r: f64,
    pub residual: f64,
    pub nrr: f64,
    /// Shares of the whole population by age group; both sexes sum to 1.
    pub female: Vec<f64>,
    pub male: Vec<f64>,
    pub child_woman_ratio: f64,
}

impl StableSolution {
    pub fn shares(&self, sex: Sex) -> &[f64] {
        match sex {
            Sex::Female => &self.female,
            Sex::Male => &self.male,
        }
    }
}

/// Children 0-14 of both sexes per woman aged 15 and over.
pub fn child_woman_ratio(female: &[f64], male: &[f64]) -> f64 {
    let children: f64 = female[..3].iter().chain(&male[..3]).sum();
    let women: f64 = female[3..].iter().sum();
    children / women
}

/// Age-sex composition of the stable population growing at `r`.
pub fn stable_structure(
    schedule: &FertilitySchedule,
    tables: &LifeTablePair,
    srb: SexRatioAtBirth,
    r: f64,
) -> Result<StableSolution> {
    let grid = tables.female.grid();
    if tables.male.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let raw = |t: &LifeTable, births: f64| -> Vec<f64> {
        let l0 = t.lx()[0];
        t.nlx()
            .iter()
            .enumerate()
            .map(|(i, nl)| births * (-r * grid.midpoint(i)).exp() * nl / l0)
            .collect()
    };
    let mut female = raw(&tables.female, 100.0);
    let mut male = raw(&tables.male, srb.value());
    let total: f64 = female.iter().chain(&male).sum();
    female
        .iter_mut()
        .chain(male.iter_mut())
        .for_each(|c| *c /= total);
    Ok(StableSolution {
        grid,
        r,
        residual: characteristic(schedule, &tables.female, srb, r) - 1.0,
        nrr: net_reproduction_rate(schedule, &tables.female, srb),
        child_woman_ratio: child_woman_ratio(&female, &male),
        female,
        male,
    })
}

/// Growth rate and composition in one call.
pub fn solve_stable(
    schedule: &FertilitySchedule,
    tables: &LifeTablePair,
    srb: SexRatioAtBirth,
) -> Result<StableSolution> {
    let root = solve_lotka(schedule, &tables.female, srb)?;
    stable_structure(schedule, tables, srb, root.r)
}
