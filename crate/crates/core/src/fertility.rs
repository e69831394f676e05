//! Age patterns of fertility and their scaling to a total fertility rate.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifetable::{AgeGrid, GROUP_WIDTH};

/// Lower bounds of the reproductive age groups 15-19 ... 45-49.
pub const REPRODUCTIVE_AGES: [u32; 7] = [15, 20, 25, 30, 35, 40, 45];

const RENORMALIZE_THRESHOLD: f64 = 1e-6;

/// Share of total fertility falling in each reproductive age group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FertilityPattern {
    name: String,
    proportions: [f64; 7],
}

impl FertilityPattern {
    /// Negative or non-finite shares are rejected. Shares that do not sum to 1
    /// are rescaled, with a warning when the deviation exceeds 1e-6.
    pub fn new(name: impl Into<String>, proportions: [f64; 7]) -> Result<Self> {
        let name = name.into();
        if proportions.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Domain(format!(
                "fertility pattern {name}: proportions must be finite and non-negative"
            )));
        }
        let total: f64 = proportions.iter().sum();
        if total <= 0.0 {
            return Err(Error::Domain(format!(
                "fertility pattern {name}: proportions sum to zero"
            )));
        }
        if (total - 1.0).abs() > RENORMALIZE_THRESHOLD {
            log::warn!("fertility pattern {name}: proportions sum to {total}, renormalizing");
        }
        let proportions = proportions.map(|p| p / total);
        Ok(FertilityPattern { name, proportions })
    }

    /// Reads a CSV with columns `age_lower, proportion`. Rows outside 15-49
    /// must carry a zero proportion.
    pub fn from_csv<R: Read>(name: impl Into<String>, input: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            age_lower: u32,
            proportion: f64,
        }
        let name = name.into();
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut props = [0.0; 7];
        let mut seen = [false; 7];
        for row in reader.deserialize::<Row>() {
            let row = row?;
            match REPRODUCTIVE_AGES.iter().position(|&a| a == row.age_lower) {
                Some(i) => {
                    if seen[i] {
                        return Err(Error::data(
                            &name,
                            format!("age {} listed twice", row.age_lower),
                        ));
                    }
                    seen[i] = true;
                    props[i] = row.proportion;
                }
                None if row.proportion == 0.0 => {}
                None => {
                    return Err(Error::data(
                        &name,
                        format!(
                            "non-zero proportion at age {} outside the reproductive span",
                            row.age_lower
                        ),
                    ))
                }
            }
        }
        if !seen.iter().all(|s| *s) {
            return Err(Error::data(
                &name,
                "every group 15, 20, ..., 45 needs a row",
            ));
        }
        FertilityPattern::new(name, props)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn proportions(&self) -> &[f64; 7] {
        &self.proportions
    }

    /// Mean age of the pattern, taking each group at its midpoint.
    pub fn mean_age(&self) -> f64 {
        REPRODUCTIVE_AGES
            .iter()
            .zip(&self.proportions)
            .map(|(&a, p)| (a as f64 + 2.5) * p)
            .sum()
    }
}

/// Age-specific fertility rates (births per woman-year) for one TFR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FertilitySchedule {
    pattern: String,
    tfr: f64,
    rates: [f64; 7],
}

impl FertilitySchedule {
    pub fn pattern_name(&self) -> &str {
        &self.pattern
    }

    pub fn tfr(&self) -> f64 {
        self.tfr
    }

    /// Rates for the groups in [`REPRODUCTIVE_AGES`].
    pub fn rates(&self) -> &[f64; 7] {
        &self.rates
    }

    pub fn rate_at(&self, age_lower: u32) -> f64 {
        REPRODUCTIVE_AGES
            .iter()
            .position(|&a| a == age_lower)
            .map_or(0.0, |i| self.rates[i])
    }

    /// Rates laid out on a full age grid, zero outside 15-49.
    pub fn on_grid(&self, grid: AgeGrid) -> Vec<f64> {
        grid.lower_bounds().map(|a| self.rate_at(a)).collect()
    }
}

/// `f(x) = tfr * proportion(x) / 5` for each reproductive group.
pub fn scale_to_tfr(pattern: &FertilityPattern, tfr: f64) -> Result<FertilitySchedule> {
    if !(tfr.is_finite() && tfr >= 0.0) {
        return Err(Error::Domain(format!(
            "TFR must be non-negative, got {tfr}"
        )));
    }
    Ok(FertilitySchedule {
        pattern: pattern.name.clone(),
        tfr,
        rates: pattern.proportions.map(|p| tfr * p / GROUP_WIDTH),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> FertilityPattern {
        FertilityPattern::new("flat", [1.0 / 7.0; 7]).unwrap()
    }

    #[test]
    fn zero_tfr_gives_zero_rates() {
        let s = scale_to_tfr(&flat(), 0.0).unwrap();
        assert!(s.rates().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn group_sum_times_width_is_tfr() {
        let s = scale_to_tfr(&flat(), 5.0).unwrap();
        let total: f64 = s.rates().iter().sum::<f64>() * 5.0;
        assert!((total - 5.0).abs() < 1e-9);
    }

    #[test]
    fn negative_tfr_rejected() {
        assert!(matches!(scale_to_tfr(&flat(), -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn renormalizes_loose_input() {
        let p = FertilityPattern::new("loose", [1.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((p.proportions().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((p.proportions()[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_share() {
        assert!(FertilityPattern::new("neg", [0.5, 0.6, -0.1, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn csv_rejects_fertility_outside_span() {
        let text = "age_lower,proportion\n10,0.01\n15,0.1\n20,0.2\n25,0.2\n30,0.2\n35,0.15\n40,0.1\n45,0.04\n";
        assert!(FertilityPattern::from_csv("x", text.as_bytes()).is_err());
        let ok = "age_lower,proportion\n10,0\n15,0.1\n20,0.2\n25,0.2\n30,0.2\n35,0.15\n40,0.1\n45,0.05\n";
        let p = FertilityPattern::from_csv("x", ok.as_bytes()).unwrap();
        assert!((p.proportions()[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rates_on_grid_are_zero_outside_span() {
        let s = scale_to_tfr(&flat(), 7.0).unwrap();
        let g = s.on_grid(AgeGrid::default());
        assert_eq!(g.len(), 18);
        assert_eq!(g[2], 0.0);
        assert_eq!(g[10], 0.0);
        assert!((g[3] - 0.2).abs() < 1e-12);
    }
}
