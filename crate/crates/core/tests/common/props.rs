//! Property checks shared by the property tests and the acceptance run.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use paleodemog_core::census::{align, CensusSnapshot};
use paleodemog_core::contour::march;
use paleodemog_core::fertility::scale_to_tfr;
use paleodemog_core::grid::{
    evaluate_cell, invert, sweep, AxisRange, ClosedRange, GridSpec, GridSurface,
};
use paleodemog_core::lifetable::{logit_transform, BrassParams, Sex};
use paleodemog_core::stable::{solve_lotka, SexRatioAtBirth, MAX_RESIDUAL};

pub const CASES: u32 = 256;

pub type Check = fn(&mut TestRunner) -> Result<(), String>;

pub fn runner() -> TestRunner {
    TestRunner::new(Config {
        failure_persistence: None,
        ..Config::with_cases(CASES)
    })
}

fn run<S: Strategy>(
    runner: &mut TestRunner,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn family_name() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("west"), Just("south")]
}

fn pattern_name() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("booth"), Just("maori1962")]
}

fn default_surface() -> &'static GridSurface {
    static SURFACE: std::sync::OnceLock<GridSurface> = std::sync::OnceLock::new();
    SURFACE.get_or_init(|| sweep(&GridSpec::new(super::west(), super::booth())).unwrap())
}

pub const ALL: &[(&str, Check)] = &[
    (
        "cwr and growth increase with tfr",
        cwr_and_growth_increase_with_tfr,
    ),
    (
        "cwr and growth increase with e0",
        cwr_and_growth_increase_with_e0,
    ),
    ("lotka residual is bounded", lotka_residual_is_bounded),
    ("brass transform round trips", brass_transform_round_trips),
    (
        "child survival and l5 increase with e0",
        child_survival_and_l5_increase_with_e0,
    ),
    ("growth is antisymmetric", growth_is_antisymmetric),
    ("cwr is scale invariant", cwr_is_scale_invariant),
    (
        "widening ranges never drops cells",
        widening_ranges_never_drops_cells,
    ),
    ("sweeps are deterministic", sweeps_are_deterministic),
    (
        "contour vertices sit on their level",
        contour_vertices_sit_on_their_level,
    ),
];

pub fn cwr_and_growth_increase_with_tfr(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (
        family_name(),
        pattern_name(),
        10.0..50.0f64,
        2.0..8.9f64,
        0.01..1.0f64,
    );
    run(runner, strategy, |(fam, pat, e0, tfr, dt)| {
        let (f, p) = (super::family(fam), super::pattern(pat));
        let srb = SexRatioAtBirth::default();
        let a = evaluate_cell(&f, &p, srb, tfr, e0).unwrap();
        let b = evaluate_cell(&f, &p, srb, tfr + dt, e0).unwrap();
        prop_assert!(b.cwr > a.cwr);
        prop_assert!(b.growth > a.growth);
        Ok(())
    })
}

pub fn cwr_and_growth_increase_with_e0(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (
        family_name(),
        pattern_name(),
        10.0..49.0f64,
        0.05..3.0f64,
        2.0..9.0f64,
    );
    run(runner, strategy, |(fam, pat, e0, de, tfr)| {
        let (f, p) = (super::family(fam), super::pattern(pat));
        let srb = SexRatioAtBirth::default();
        let a = evaluate_cell(&f, &p, srb, tfr, e0).unwrap();
        let b = evaluate_cell(&f, &p, srb, tfr, e0 + de).unwrap();
        prop_assert!(b.cwr > a.cwr, "cwr {} -> {}", a.cwr, b.cwr);
        prop_assert!(b.growth > a.growth);
        Ok(())
    })
}

pub fn lotka_residual_is_bounded(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (
        family_name(),
        pattern_name(),
        10.0..50.0f64,
        2.0..9.0f64,
        100.0..110.0f64,
    );
    run(runner, strategy, |(fam, pat, e0, tfr, srb)| {
        let (f, p) = (super::family(fam), super::pattern(pat));
        let tables = f.tables_for_female_e0(e0).unwrap();
        let sched = scale_to_tfr(&p, tfr).unwrap();
        let root = solve_lotka(&sched, &tables.female, SexRatioAtBirth::new(srb).unwrap()).unwrap();
        prop_assert!(root.residual.abs() < MAX_RESIDUAL);
        Ok(())
    })
}

pub fn brass_transform_round_trips(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (family_name(), 0usize..25, -1.5..1.5f64, 0.6..1.6f64);
    run(runner, strategy, |(fam, level, alpha, beta)| {
        let f = super::family(fam);
        for sex in Sex::BOTH {
            let standard = &f.levels(sex)[level];
            let p = BrassParams::new(alpha, beta).unwrap();
            let back =
                logit_transform(&logit_transform(standard, p).unwrap(), p.inverse()).unwrap();
            for (a, b) in standard.lx().iter().zip(back.lx()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
        Ok(())
    })
}

pub fn child_survival_and_l5_increase_with_e0(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (family_name(), 10.0..49.0f64, 0.05..3.0f64);
    run(runner, strategy, |(fam, e0, de)| {
        let f = super::family(fam);
        for sex in Sex::BOTH {
            let a = f.table_for_e0(sex, e0).unwrap();
            let b = f.table_for_e0(sex, e0 + de).unwrap();
            prop_assert!(b.lx()[1] > a.lx()[1]);
            prop_assert!(b.survival_within(0).unwrap() > a.survival_within(0).unwrap());
        }
        Ok(())
    })
}

pub fn growth_is_antisymmetric(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (1800.0..1950.0f64, 0.5..20.0f64, 1e3..1e6f64, 1e3..1e6f64);
    run(runner, strategy, |(year, gap, t1, t2)| {
        let snap = |y: f64, t: f64| CensusSnapshot::new(y, 0.3 * t, 0.3 * t, t).unwrap();
        let forward = align(&[snap(year, t1), snap(year + gap, t2)]).unwrap()[0].growth;
        let reversed = align(&[snap(year, t2), snap(year + gap, t1)]).unwrap()[0].growth;
        prop_assert!((forward + reversed).abs() < 1e-12);
        Ok(())
    })
}

pub fn cwr_is_scale_invariant(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (1.0..1e5f64, 1.0..1e5f64, 0.0..1e5f64, 1e-3..1e3f64);
    run(runner, strategy, |(children, women, extra, k)| {
        let total = children + women + extra;
        let a = CensusSnapshot::new(1900.0, children, women, total).unwrap();
        let b = CensusSnapshot::new(1900.0, k * children, k * women, k * total).unwrap();
        let (ca, cb) = (a.cwr().unwrap(), b.cwr().unwrap());
        prop_assert!((ca - cb).abs() <= 1e-12 * ca.max(1.0));
        Ok(())
    })
}

pub fn widening_ranges_never_drops_cells(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (
        0.3..1.5f64,
        0.0..0.5f64,
        -0.03..0.03f64,
        0.0..0.01f64,
        0.0..0.2f64,
    );
    run(runner, strategy, |(c_lo, c_w, g_lo, g_w, widen)| {
        let surface = default_surface();
        let narrow = invert(
            surface,
            ClosedRange::new(c_lo, c_lo + c_w).unwrap(),
            Some(ClosedRange::new(g_lo, g_lo + g_w).unwrap()),
        )
        .unwrap();
        let wide = invert(
            surface,
            ClosedRange::new(c_lo - widen, c_lo + c_w + widen).unwrap(),
            Some(ClosedRange::new(g_lo - widen / 10.0, g_lo + g_w + widen / 10.0).unwrap()),
        )
        .unwrap();
        let cwr_only = invert(surface, ClosedRange::new(c_lo, c_lo + c_w).unwrap(), None).unwrap();
        for c in &narrow.cells {
            prop_assert!(wide.contains(c.tfr, c.e0));
            prop_assert!(cwr_only.contains(c.tfr, c.e0));
        }
        Ok(())
    })
}

pub fn sweeps_are_deterministic(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (2.0..6.0f64, 10.0..40.0f64, 1usize..5);
    run(runner, strategy, |(tfr_min, e0_min, n)| {
        let mut spec = GridSpec::new(super::west(), super::booth());
        spec.tfr = AxisRange::new(tfr_min, tfr_min + 0.2 * n as f64, 0.2).unwrap();
        spec.e0 = AxisRange::new(e0_min, e0_min + 2.5 * n as f64, 2.5).unwrap();
        let a = sweep(&spec).unwrap();
        let b = sweep(&spec).unwrap();
        prop_assert_eq!(&a, &b);
        for (k, c) in a.cells.iter().enumerate() {
            let (j, i) = (k / a.tfr_values.len(), k % a.tfr_values.len());
            prop_assert_eq!(c.tfr, a.tfr_values[i]);
            prop_assert_eq!(c.e0, a.e0_values[j]);
        }
        Ok(())
    })
}

pub fn contour_vertices_sit_on_their_level(runner: &mut TestRunner) -> Result<(), String> {
    let strategy = (0.1..2.0f64, 0.1..2.0f64, -0.5..0.5f64, 1.0..6.0f64);
    run(runner, strategy, |(a, b, c, level)| {
        let xs: Vec<f64> = (0..8).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = (0..6).map(|j| j as f64 * 0.7).collect();
        let field = |x: f64, y: f64| a * x + b * y + c * x * y;
        let values: Vec<f64> = ys
            .iter()
            .flat_map(|&y| xs.iter().map(move |&x| field(x, y)))
            .collect();
        for line in march(&xs, &ys, &values, level) {
            for [x, y] in line {
                // Vertices lie on cell edges, where bilinear interpolation is linear.
                let i = ((x / 0.5).floor() as usize).min(xs.len() - 2);
                let j = ((y / 0.7).floor() as usize).min(ys.len() - 2);
                let tx = (x - xs[i]) / 0.5;
                let ty = (y - ys[j]) / 0.7;
                let v = values[j * 8 + i] * (1.0 - tx) * (1.0 - ty)
                    + values[j * 8 + i + 1] * tx * (1.0 - ty)
                    + values[(j + 1) * 8 + i] * (1.0 - tx) * ty
                    + values[(j + 1) * 8 + i + 1] * tx * ty;
                prop_assert!((v - level).abs() < 1e-9, "value {} at ({}, {})", v, x, y);
            }
        }
        Ok(())
    })
}
