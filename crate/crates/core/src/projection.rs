//! Two-sex cohort-component projection in five-year steps.
//!
//! One step from `t` to `t + 5`, with `P_s(x)` the persons of sex `s` in the
//! group starting at `x`:
//!
//! ```text
//! P_s(x+5, t+5) = P_s(x, t) nL_s(x+5) / nL_s(x)
//! P_s(T, t+5)   = (P_s(T-5, t) + P_s(T, t)) nL_s(T) / (nL_s(T-5) + nL_s(T))
//! B             = sum_x f(x) 2.5 (W(x, t) + W(x, t+5))
//! P_s(0, t+5)   = B share_s nL_s(0) / (5 l_s(0))
//! ```
//!
//! where `W` are women and `T` is the open group.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fertility::{scale_to_tfr, FertilityPattern};
use crate::format::sig6;
use crate::lifetable::{AgeGrid, LifeTable, LifeTablePair, MortalityFamily, Sex, GROUP_WIDTH};
use crate::stable::{child_woman_ratio, solve_stable, SexRatioAtBirth};

/// Projection step in years; equal to the age-group width.
pub const STEP: f64 = GROUP_WIDTH;

/// Persons by sex and five-year age group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationVector {
    grid: AgeGrid,
    female: Vec<f64>,
    male: Vec<f64>,
}

impl PopulationVector {
    pub fn new(grid: AgeGrid, female: Vec<f64>, male: Vec<f64>) -> Result<Self> {
        if female.len() != grid.len() || male.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if female
            .iter()
            .chain(&male)
            .any(|c| !(c.is_finite() && *c >= 0.0))
        {
            return Err(Error::Domain(
                "population counts must be non-negative".into(),
            ));
        }
        if !(female.iter().chain(&male).sum::<f64>() > 0.0) {
            return Err(Error::Domain("population is empty".into()));
        }
        Ok(PopulationVector { grid, female, male })
    }

    pub fn grid(&self) -> AgeGrid {
        self.grid
    }

    pub fn counts(&self, sex: Sex) -> &[f64] {
        match sex {
            Sex::Female => &self.female,
            Sex::Male => &self.male,
        }
    }

    pub fn total(&self) -> f64 {
        self.female.iter().chain(&self.male).sum()
    }

    /// Counts divided by the total, female then male.
    pub fn shares(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.total();
        (
            self.female.iter().map(|c| c / n).collect(),
            self.male.iter().map(|c| c / n).collect(),
        )
    }

    pub fn cwr(&self) -> f64 {
        child_woman_ratio(&self.female, &self.male)
    }
}

/// Rates in force from `time` (years after the start) onward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePhase {
    pub time: f64,
    pub tfr: f64,
    pub e0: f64,
}

fn default_interval() -> f64 {
    STEP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSchedule {
    pub phases: Vec<RatePhase>,
    /// Years projected.
    pub horizon: f64,
    #[serde(default = "default_interval")]
    pub reporting_interval: f64,
}

fn is_step_multiple(v: f64) -> bool {
    (v / STEP - (v / STEP).round()).abs() < 1e-9
}

impl ScenarioSchedule {
    pub fn constant(tfr: f64, e0: f64, horizon: f64) -> Self {
        ScenarioSchedule {
            phases: vec![RatePhase { time: 0.0, tfr, e0 }],
            horizon,
            reporting_interval: STEP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .phases
            .first()
            .ok_or_else(|| Error::Domain("scenario has no phases".into()))?;
        if first.time != 0.0 {
            return Err(Error::Domain("the first phase must start at time 0".into()));
        }
        for w in self.phases.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(Error::Ordering(format!(
                    "phase times must strictly increase ({} then {})",
                    w[0].time, w[1].time
                )));
            }
        }
        for p in &self.phases {
            if !(p.time.is_finite() && p.tfr.is_finite() && p.tfr >= 0.0 && p.e0.is_finite()) {
                return Err(Error::Domain(format!("invalid phase {p:?}")));
            }
        }
        if !(self.horizon > 0.0 && is_step_multiple(self.horizon)) {
            return Err(Error::Domain(format!(
                "horizon {} is not a positive multiple of {STEP}",
                self.horizon
            )));
        }
        if !(self.reporting_interval > 0.0 && is_step_multiple(self.reporting_interval)) {
            return Err(Error::Domain(format!(
                "reporting interval {} is not a positive multiple of {STEP}",
                self.reporting_interval
            )));
        }
        Ok(())
    }

    /// Phase start steps after snapping mid-step times to the next boundary.
    fn snapped(&self) -> Vec<(usize, RatePhase)> {
        let mut out: Vec<(usize, RatePhase)> = Vec::new();
        for p in &self.phases {
            let step = (p.time / STEP - 1e-9).ceil().max(0.0) as usize;
            if !is_step_multiple(p.time) {
                log::info!(
                    "rate change at t = {} applied at t = {}",
                    p.time,
                    step as f64 * STEP
                );
            }
            match out.last_mut() {
                Some(last) if last.0 == step => {
                    log::warn!(
                        "phases at t = {} and t = {} share a step; keeping the later",
                        last.1.time,
                        p.time
                    );
                    *last = (step, *p);
                }
                _ => out.push((step, *p)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub cwr: f64,
    /// `ln(N(t) / N(t-5)) / 5`; absent at time 0.
    pub growth: Option<f64>,
    pub total_population: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub final_state: PopulationVector,
}

impl Trajectory {
    /// Earliest reported time from which `metric` stays within `tolerance`
    /// of `target` through the end of the run.
    pub fn settled_from(
        &self,
        metric: impl Fn(&TrajectoryPoint) -> Option<f64>,
        target: f64,
        tolerance: f64,
    ) -> Option<f64> {
        let mut since = None;
        for p in &self.points {
            match metric(p) {
                Some(v) if (v - target).abs() <= tolerance => {
                    since.get_or_insert(p.time);
                }
                _ => since = None,
            }
        }
        since
    }

    pub fn at(&self, time: f64) -> Option<&TrajectoryPoint> {
        self.points.iter().find(|p| (p.time - time).abs() < 1e-9)
    }

    /// CSV with columns `time,cwr,growth_per_year,total_population`; growth is
    /// empty at time 0.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "cwr", "growth_per_year", "total_population"])?;
        for p in &self.points {
            w.write_record([
                sig6(p.time),
                sig6(p.cwr),
                p.growth.map(sig6).unwrap_or_default(),
                sig6(p.total_population),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn advance_sex(counts: &[f64], table: &LifeTable, births: f64) -> Vec<f64> {
    let nl = table.nlx();
    let t = counts.len() - 1;
    let mut next = vec![0.0; counts.len()];
    next[0] = births * nl[0] / (GROUP_WIDTH * table.lx()[0]);
    for i in 1..t {
        next[i] = counts[i - 1] * nl[i] / nl[i - 1];
    }
    next[t] = (counts[t - 1] + counts[t]) * nl[t] / (nl[t - 1] + nl[t]);
    next
}

/// One five-year step under fixed rates.
pub fn step(
    population: &PopulationVector,
    tables: &LifeTablePair,
    fertility: &[f64],
    srb: SexRatioAtBirth,
) -> PopulationVector {
    let mut female = advance_sex(&population.female, &tables.female, 0.0);
    let mut male = advance_sex(&population.male, &tables.male, 0.0);
    let births: f64 = fertility
        .iter()
        .enumerate()
        .map(|(i, f)| f * 0.5 * GROUP_WIDTH * (population.female[i] + female[i]))
        .sum();
    female[0] = births * srb.female_fraction() * tables.female.nlx()[0]
        / (GROUP_WIDTH * tables.female.lx()[0]);
    male[0] =
        births * srb.male_fraction() * tables.male.nlx()[0] / (GROUP_WIDTH * tables.male.lx()[0]);
    PopulationVector {
        grid: population.grid,
        female,
        male,
    }
}

/// Projects `initial` through `schedule`, reporting every
/// `reporting_interval` years. All phases are resolved to life tables before
/// the first step.
pub fn project(
    initial: &PopulationVector,
    schedule: &ScenarioSchedule,
    family: &MortalityFamily,
    pattern: &FertilityPattern,
    srb: SexRatioAtBirth,
) -> Result<Trajectory> {
    schedule.validate()?;
    if initial.grid != family.grid() {
        return Err(Error::GridMismatch);
    }
    let phases = schedule
        .snapped()
        .into_iter()
        .map(|(start, p)| {
            let tables = family.tables_for_female_e0(p.e0)?;
            let rates = scale_to_tfr(pattern, p.tfr)?.on_grid(initial.grid);
            Ok((start, tables, rates))
        })
        .collect::<Result<Vec<_>>>()?;

    let steps = (schedule.horizon / STEP).round() as usize;
    let every = (schedule.reporting_interval / STEP).round() as usize;
    let point = |k: usize, pop: &PopulationVector, growth: Option<f64>| TrajectoryPoint {
        time: k as f64 * STEP,
        cwr: pop.cwr(),
        growth,
        total_population: pop.total(),
    };

    let mut pop = initial.clone();
    let mut points = vec![point(0, &pop, None)];
    let mut phase = 0;
    for k in 0..steps {
        while phase + 1 < phases.len() && phases[phase + 1].0 <= k {
            phase += 1;
        }
        let (_, tables, rates) = &phases[phase];
        let next = step(&pop, tables, rates, srb);
        let growth = (next.total() / pop.total()).ln() / STEP;
        pop = next;
        if (k + 1) % every == 0 {
            points.push(point(k + 1, &pop, Some(growth)));
        }
    }
    Ok(Trajectory {
        points,
        final_state: pop,
    })
}

/// The stable population for constant `(tfr, e0)`, scaled to `total` persons.
pub fn stable_seed(
    tfr: f64,
    e0: f64,
    family: &MortalityFamily,
    pattern: &FertilityPattern,
    srb: SexRatioAtBirth,
    total: f64,
) -> Result<PopulationVector> {
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Domain(format!(
            "total population must be positive, got {total}"
        )));
    }
    let tables = family.tables_for_female_e0(e0)?;
    let sol = solve_stable(&scale_to_tfr(pattern, tfr)?, &tables, srb)?;
    PopulationVector::new(
        sol.grid,
        sol.female.iter().map(|c| c * total).collect(),
        sol.male.iter().map(|c| c * total).collect(),
    )
}
