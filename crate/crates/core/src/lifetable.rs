//! Abridged life tables, model life table families and the Brass logit system.
//!
//! Tables live on a 5-year [`AgeGrid`] whose last group is open-ended. A
//! [`MortalityFamily`] holds published (or custom) tables at increasing levels
//! of life expectancy; [`MortalityFamily::table_for_e0`] interpolates between
//! levels on the logit scale and extends below the lowest level by varying the
//! Brass level parameter.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width of every closed age group, in years.
pub const GROUP_WIDTH: f64 = 5.0;

const E0_TOLERANCE: f64 = 1e-10;
const MAX_BISECTIONS: usize = 200;
/// Bracket searched for the Brass level parameter.
pub const ALPHA_BRACKET: (f64, f64) = (-2.0, 2.0);

/// Five-year age groups `0, 5, ..., terminal`, the last one open-ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgeGrid {
    terminal: u32,
}

impl AgeGrid {
    pub const DEFAULT_TERMINAL: u32 = 85;

    /// The terminal lower bound must be a multiple of 5 and leave the
    /// reproductive ages 15-49 in closed groups.
    pub fn new(terminal: u32) -> Result<Self> {
        if !terminal.is_multiple_of(5) {
            return Err(Error::InvalidGrid(format!(
                "terminal age {terminal} is not a multiple of 5"
            )));
        }
        if terminal < 50 {
            return Err(Error::InvalidGrid(format!(
                "terminal age {terminal} must be at least 50"
            )));
        }
        Ok(AgeGrid { terminal })
    }

    pub fn terminal(&self) -> u32 {
        self.terminal
    }

    pub fn len(&self) -> usize {
        (self.terminal / 5) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn terminal_index(&self) -> usize {
        self.len() - 1
    }

    pub fn lower(&self, index: usize) -> u32 {
        5 * index as u32
    }

    /// Midpoint of a group, used for the `x + 2.5` discounting exponent.
    pub fn midpoint(&self, index: usize) -> f64 {
        self.lower(index) as f64 + 0.5 * GROUP_WIDTH
    }

    pub fn index_of(&self, age_lower: u32) -> Option<usize> {
        (age_lower.is_multiple_of(5) && age_lower <= self.terminal)
            .then_some((age_lower / 5) as usize)
    }

    pub fn lower_bounds(&self) -> impl Iterator<Item = u32> {
        (0..=self.terminal).step_by(5)
    }
}

impl Default for AgeGrid {
    fn default() -> Self {
        AgeGrid {
            terminal: Self::DEFAULT_TERMINAL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Female,
    Male,
}

impl Sex {
    pub const BOTH: [Sex; 2] = [Sex::Female, Sex::Male];

    pub fn as_str(&self) -> &'static str {
        match self {
            Sex::Female => "female",
            Sex::Male => "male",
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f" | "female" => Ok(Sex::Female),
            "m" | "male" => Ok(Sex::Male),
            other => Err(Error::Domain(format!("unknown sex '{other}'"))),
        }
    }
}

/// `0.5 * ln((1 - l) / l)`; decreasing in `l`.
pub fn logit(l: f64) -> f64 {
    0.5 * ((1.0 - l) / l).ln()
}

pub fn inverse_logit(y: f64) -> f64 {
    1.0 / (1.0 + (2.0 * y).exp())
}

/// An abridged single-sex life table with radix 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifeTable {
    sex: Sex,
    grid: AgeGrid,
    lx: Vec<f64>,
    nlx: Vec<f64>,
    e0: f64,
}

impl LifeTable {
    /// Builds a table from survivorship `lx` and person-years `nlx`, one value
    /// per group of `grid`.
    pub fn new(sex: Sex, grid: AgeGrid, lx: Vec<f64>, nlx: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if lx.len() != n || nlx.len() != n {
            return Err(Error::InvalidTable(format!(
                "expected {n} age groups, got {} lx and {} nLx values",
                lx.len(),
                nlx.len()
            )));
        }
        if lx[0] != 1.0 {
            return Err(Error::InvalidTable(format!(
                "l(0) = {} but must be 1",
                lx[0]
            )));
        }
        for (i, w) in lx.windows(2).enumerate() {
            if !(w[1] > 0.0 && w[1].is_finite()) {
                return Err(Error::InvalidTable(format!(
                    "l({}) = {} is not strictly positive",
                    grid.lower(i + 1),
                    w[1]
                )));
            }
            if w[1] > w[0] {
                return Err(Error::InvalidTable(format!(
                    "l({}) = {} exceeds l({}) = {}",
                    grid.lower(i + 1),
                    w[1],
                    grid.lower(i),
                    w[0]
                )));
            }
        }
        if let Some((i, v)) = nlx
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidTable(format!(
                "nL({}) = {v} is not strictly positive",
                grid.lower(i)
            )));
        }
        let e0 = nlx.iter().sum();
        Ok(LifeTable {
            sex,
            grid,
            lx,
            nlx,
            e0,
        })
    }

    pub fn sex(&self) -> Sex {
        self.sex
    }

    pub fn grid(&self) -> AgeGrid {
        self.grid
    }

    pub fn lx(&self) -> &[f64] {
        &self.lx
    }

    pub fn nlx(&self) -> &[f64] {
        &self.nlx
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    /// Death probabilities per group; 1 in the open terminal group.
    pub fn qx(&self) -> Vec<f64> {
        let mut q: Vec<f64> = self.lx.windows(2).map(|w| 1.0 - w[1] / w[0]).collect();
        q.push(1.0);
        q
    }

    /// Probability of surviving from the start to the end of a closed group.
    pub fn survival_within(&self, age_lower: u32) -> Result<f64> {
        let i = self
            .grid
            .index_of(age_lower)
            .ok_or_else(|| Error::Domain(format!("age {age_lower} is not on the grid")))?;
        if i == self.grid.terminal_index() {
            return Err(Error::Domain(format!(
                "age group {age_lower}+ is open-ended"
            )));
        }
        Ok(self.lx[i + 1] / self.lx[i])
    }

    /// Re-expresses the table with a different open terminal group.
    ///
    /// Truncation pools person-years into the new open group. Extension splits
    /// the old open group assuming its constant implied death rate.
    pub fn with_terminal(&self, terminal: u32) -> Result<LifeTable> {
        let grid = AgeGrid::new(terminal)?;
        let old = self.grid.terminal_index();
        let new = grid.terminal_index();
        if new == old {
            return Ok(self.clone());
        }
        let (lx, nlx) = if new < old {
            let lx = self.lx[..=new].to_vec();
            let mut nlx = self.nlx[..new].to_vec();
            nlx.push(self.nlx[new..].iter().sum());
            (lx, nlx)
        } else {
            let rate = self.lx[old] / self.nlx[old];
            let step = (-GROUP_WIDTH * rate).exp();
            let mut lx = self.lx.clone();
            let mut nlx = self.nlx[..old].to_vec();
            for _ in old..new {
                let l = *lx.last().unwrap();
                nlx.push(l * (1.0 - step) / rate);
                lx.push(l * step);
            }
            nlx.push(*lx.last().unwrap() / rate);
            (lx, nlx)
        };
        LifeTable::new(self.sex, grid, lx, nlx)
    }

    fn closure(&self) -> Closure {
        let t = self.grid.terminal_index();
        let separation = (0..t)
            .map(|i| {
                let deaths = self.lx[i] - self.lx[i + 1];
                if deaths > 0.0 {
                    (self.nlx[i] - GROUP_WIDTH * self.lx[i + 1]) / deaths
                } else {
                    0.5 * GROUP_WIDTH
                }
            })
            .collect();
        Closure {
            separation,
            terminal_expectancy: self.nlx[t] / self.lx[t],
        }
    }

    fn interior_logits(&self) -> Result<Vec<f64>> {
        self.lx[1..]
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                if l > 0.0 && l < 1.0 {
                    Ok(logit(l))
                } else {
                    Err(Error::InvalidStandard(format!(
                        "l({}) = {l} has no finite logit",
                        self.grid.lower(i + 1)
                    )))
                }
            })
            .collect()
    }

    fn from_logits(sex: Sex, grid: AgeGrid, logits: &[f64], closure: &Closure) -> Result<Self> {
        let mut lx = Vec::with_capacity(grid.len());
        lx.push(1.0);
        lx.extend(logits.iter().map(|&y| inverse_logit(y)));
        let t = grid.terminal_index();
        let mut nlx: Vec<f64> = (0..t)
            .map(|i| GROUP_WIDTH * lx[i + 1] + closure.separation[i] * (lx[i] - lx[i + 1]))
            .collect();
        nlx.push(lx[t] * closure.terminal_expectancy);
        LifeTable::new(sex, grid, lx, nlx)
    }
}

/// Within-group separation factors and the open-group expectancy of a
/// standard; these are carried over unchanged when survivorship is transformed.
#[derive(Debug, Clone)]
struct Closure {
    separation: Vec<f64>,
    terminal_expectancy: f64,
}

impl Closure {
    fn blend(&self, other: &Closure, w: f64) -> Closure {
        Closure {
            separation: self
                .separation
                .iter()
                .zip(&other.separation)
                .map(|(a, b)| (1.0 - w) * a + w * b)
                .collect(),
            terminal_expectancy: (1.0 - w) * self.terminal_expectancy
                + w * other.terminal_expectancy,
        }
    }
}

/// Parameters of the relational logit model `Y = alpha + beta * Y_standard`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrassParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BrassParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite() && alpha.is_finite()) {
            return Err(Error::Domain(format!(
                "Brass parameters need finite alpha and beta > 0 (got {alpha}, {beta})"
            )));
        }
        Ok(BrassParams { alpha, beta })
    }

    pub fn level(alpha: f64) -> Self {
        BrassParams { alpha, beta: 1.0 }
    }

    /// The transform that undoes this one.
    pub fn inverse(&self) -> Self {
        BrassParams {
            alpha: -self.alpha / self.beta,
            beta: 1.0 / self.beta,
        }
    }
}

impl Default for BrassParams {
    fn default() -> Self {
        BrassParams::level(0.0)
    }
}

/// Applies the Brass logit transform to every age above 0.
///
/// Person-years are rebuilt from the new survivorship using the standard's
/// separation factors; for groups whose standard follows the trapezoid rule
/// this is exactly `2.5 * (l(x) + l(x+5))`. The open group keeps the
/// standard's expectation of life.
pub fn logit_transform(standard: &LifeTable, params: BrassParams) -> Result<LifeTable> {
    let params = BrassParams::new(params.alpha, params.beta)?;
    let logits: Vec<f64> = standard
        .interior_logits()?
        .into_iter()
        .map(|y| params.alpha + params.beta * y)
        .collect();
    LifeTable::from_logits(standard.sex, standard.grid, &logits, &standard.closure())
}

/// Both sexes at one mortality level.
#[derive(Debug, Clone, PartialEq)]
pub struct LifeTablePair {
    pub female: LifeTable,
    pub male: LifeTable,
}

impl LifeTablePair {
    pub fn get(&self, sex: Sex) -> &LifeTable {
        match sex {
            Sex::Female => &self.female,
            Sex::Male => &self.male,
        }
    }
}

/// Where a target e0 sits relative to the tabulated levels.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Placement {
    Level(usize),
    Between(usize, f64),
    Brass(f64),
}

/// A model life table family: per-sex tables at matched, increasing levels.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalityFamily {
    name: String,
    female: Vec<LifeTable>,
    male: Vec<LifeTable>,
}

impl MortalityFamily {
    pub fn new(
        name: impl Into<String>,
        female: Vec<LifeTable>,
        male: Vec<LifeTable>,
    ) -> Result<Self> {
        let name = name.into();
        if female.is_empty() || female.len() != male.len() {
            return Err(Error::InvalidTable(format!(
                "family {name}: need the same non-zero number of female and male levels"
            )));
        }
        let grid = female[0].grid;
        for (sex, tables) in [(Sex::Female, &female), (Sex::Male, &male)] {
            if tables.iter().any(|t| t.grid != grid) {
                return Err(Error::GridMismatch);
            }
            if tables.iter().any(|t| t.sex != sex) {
                return Err(Error::InvalidTable(format!(
                    "family {name}: {sex} level list contains a table of the other sex"
                )));
            }
            if tables.windows(2).any(|w| w[1].e0 <= w[0].e0) {
                return Err(Error::InvalidTable(format!(
                    "family {name}: {sex} levels must have strictly increasing e0"
                )));
            }
        }
        Ok(MortalityFamily { name, female, male })
    }

    /// Reads one CSV per sex with columns `level_e0, age_lower, lx, nLx`.
    /// Lines starting with `#` are provenance comments.
    pub fn from_csv<R: Read>(
        name: impl Into<String>,
        female: R,
        male: R,
        terminal: u32,
    ) -> Result<Self> {
        let name = name.into();
        let female = read_levels(&format!("{name}/female"), Sex::Female, female, terminal)?;
        let male = read_levels(&format!("{name}/male"), Sex::Male, male, terminal)?;
        MortalityFamily::new(name, female, male)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> AgeGrid {
        self.female[0].grid
    }

    pub fn levels(&self, sex: Sex) -> &[LifeTable] {
        match sex {
            Sex::Female => &self.female,
            Sex::Male => &self.male,
        }
    }

    /// The lowest-e0 table, used as the Brass standard below the tabulated range.
    pub fn brass_standard(&self, sex: Sex) -> &LifeTable {
        &self.levels(sex)[0]
    }

    pub fn max_e0(&self, sex: Sex) -> f64 {
        self.levels(sex).last().unwrap().e0
    }

    /// Smallest e0 reachable through the Brass extension.
    pub fn min_e0(&self, sex: Sex) -> Result<f64> {
        Ok(logit_transform(
            self.brass_standard(sex),
            BrassParams::level(ALPHA_BRACKET.1),
        )?
        .e0)
    }

    /// Life table for `sex` with expectation of life `target_e0` at birth.
    pub fn table_for_e0(&self, sex: Sex, target_e0: f64) -> Result<LifeTable> {
        let placement = self.locate(sex, target_e0)?;
        self.realize(sex, placement)
    }

    /// Both sexes at the mortality level where female e0 equals
    /// `female_e0`; the male table uses the same interpolation weight or
    /// Brass level shift.
    pub fn tables_for_female_e0(&self, female_e0: f64) -> Result<LifeTablePair> {
        let placement = self.locate(Sex::Female, female_e0)?;
        Ok(LifeTablePair {
            female: self.realize(Sex::Female, placement)?,
            male: self.realize(Sex::Male, placement)?,
        })
    }

    /// Rebuilds every level on a different terminal group.
    pub fn with_terminal(&self, terminal: u32) -> Result<Self> {
        let conv = |v: &[LifeTable]| {
            v.iter()
                .map(|t| t.with_terminal(terminal))
                .collect::<Result<Vec<_>>>()
        };
        MortalityFamily::new(self.name.clone(), conv(&self.female)?, conv(&self.male)?)
    }

    fn locate(&self, sex: Sex, target: f64) -> Result<Placement> {
        let levels = self.levels(sex);
        let max = self.max_e0(sex);
        if !(target.is_finite() && target > 0.0) || target > max + E0_TOLERANCE {
            return Err(Error::OutOfRange {
                target,
                min: self.min_e0(sex).unwrap_or(0.0),
                max,
            });
        }
        if let Some(i) = levels
            .iter()
            .position(|t| (t.e0 - target).abs() <= E0_TOLERANCE)
        {
            return Ok(Placement::Level(i));
        }
        if target > levels[0].e0 {
            let i = levels.iter().rposition(|t| t.e0 < target).unwrap();
            let (lo, hi) = (&levels[i], &levels[i + 1]);
            let (ylo, yhi) = (lo.interior_logits()?, hi.interior_logits()?);
            let (clo, chi) = (lo.closure(), hi.closure());
            let w = bisect_increasing(0.0, 1.0, target, |w| {
                blend_tables(lo, &ylo, &clo, &yhi, &chi, w).map(|t| t.e0)
            })?;
            return Ok(Placement::Between(i, w));
        }
        let standard = &levels[0];
        let min = self.min_e0(sex)?;
        if target < min {
            return Err(Error::OutOfRange { target, min, max });
        }
        // e0 falls as alpha rises, so search on -alpha.
        let neg_alpha = bisect_increasing(-ALPHA_BRACKET.1, -ALPHA_BRACKET.0, target, |a| {
            logit_transform(standard, BrassParams::level(-a)).map(|t| t.e0)
        })?;
        Ok(Placement::Brass(-neg_alpha))
    }

    fn realize(&self, sex: Sex, placement: Placement) -> Result<LifeTable> {
        let levels = self.levels(sex);
        match placement {
            Placement::Level(i) => Ok(levels[i].clone()),
            Placement::Between(i, w) => {
                let (lo, hi) = (&levels[i], &levels[i + 1]);
                blend_tables(
                    lo,
                    &lo.interior_logits()?,
                    &lo.closure(),
                    &hi.interior_logits()?,
                    &hi.closure(),
                    w,
                )
            }
            Placement::Brass(alpha) => logit_transform(&levels[0], BrassParams::level(alpha)),
        }
    }
}

fn blend_tables(
    template: &LifeTable,
    ylo: &[f64],
    clo: &Closure,
    yhi: &[f64],
    chi: &Closure,
    w: f64,
) -> Result<LifeTable> {
    let logits: Vec<f64> = ylo
        .iter()
        .zip(yhi)
        .map(|(a, b)| (1.0 - w) * a + w * b)
        .collect();
    LifeTable::from_logits(template.sex, template.grid, &logits, &clo.blend(chi, w))
}

/// Bisection for `f(x) = target` with `f` increasing on `[lo, hi]`.
fn bisect_increasing<F>(mut lo: f64, mut hi: f64, target: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if target < flo - E0_TOLERANCE || target > fhi + E0_TOLERANCE {
        return Err(Error::OutOfRange {
            target,
            min: flo,
            max: fhi,
        });
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if (v - target).abs() <= E0_TOLERANCE {
            return Ok(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn read_levels<R: Read>(label: &str, sex: Sex, input: R, terminal: u32) -> Result<Vec<LifeTable>> {
    #[derive(Deserialize)]
    struct Row {
        level_e0: f64,
        age_lower: u32,
        lx: f64,
        #[serde(rename = "nLx")]
        nlx: f64,
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut groups: Vec<(f64, Vec<Row>)> = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row?;
        match groups.last_mut() {
            Some((level, rows)) if *level == row.level_e0 => rows.push(row),
            _ => groups.push((row.level_e0, vec![row])),
        }
    }
    if groups.is_empty() {
        return Err(Error::data(label, "no life table rows"));
    }
    groups
        .into_iter()
        .map(|(level, rows)| {
            let data_terminal = rows.last().unwrap().age_lower;
            let grid = AgeGrid::new(data_terminal)
                .map_err(|e| Error::data(label, format!("level {level}: {e}")))?;
            if rows.len() != grid.len()
                || rows
                    .iter()
                    .zip(grid.lower_bounds())
                    .any(|(r, a)| r.age_lower != a)
            {
                return Err(Error::data(
                    label,
                    format!("level {level}: ages must run 0, 5, ..., {data_terminal} without gaps"),
                ));
            }
            let lx = rows.iter().map(|r| r.lx).collect();
            let nlx = rows.iter().map(|r| r.nlx).collect();
            let table = LifeTable::new(sex, grid, lx, nlx)
                .map_err(|e| Error::data(label, format!("level {level}: {e}")))?;
            // Male levels carry the female label.
            if sex == Sex::Female && (table.e0 - level).abs() > 0.05 {
                log::warn!(
                    "{label}: level labelled {level} has e0 {:.4} from its nLx column",
                    table.e0
                );
            }
            table.with_terminal(terminal)
        })
        .collect()
}

/// Within-group survival probabilities across life expectancies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalTable {
    pub sex: Sex,
    pub groups: Vec<u32>,
    pub rows: Vec<SurvivalRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalRow {
    pub e0: f64,
    /// `l(x+5) / l(x)` for each requested group, in order.
    pub probabilities: Vec<f64>,
}

/// For each e0 and closed age group `x`, the probability `l(x+5)/l(x)` of
/// surviving from the start to the end of the group.
pub fn survival_increments(
    family: &MortalityFamily,
    sex: Sex,
    e0_list: &[f64],
    groups: &[u32],
) -> Result<SurvivalTable> {
    let grid = family.grid();
    for &g in groups {
        match grid.index_of(g) {
            Some(i) if i < grid.terminal_index() => {}
            _ => {
                return Err(Error::Domain(format!(
                    "age group {g} is not a closed group of the grid"
                )))
            }
        }
    }
    let rows = e0_list
        .iter()
        .map(|&e0| {
            let table = family.table_for_e0(sex, e0)?;
            let probabilities = groups
                .iter()
                .map(|&g| table.survival_within(g))
                .collect::<Result<Vec<_>>>()?;
            Ok(SurvivalRow { e0, probabilities })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurvivalTable {
        sex,
        groups: groups.to_vec(),
        rows,
    })
}
