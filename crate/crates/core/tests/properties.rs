mod common;

use common::props;

#[test]
fn cwr_and_growth_increase_with_tfr() {
    props::cwr_and_growth_increase_with_tfr(&mut props::runner()).unwrap();
}

#[test]
fn cwr_and_growth_increase_with_e0() {
    props::cwr_and_growth_increase_with_e0(&mut props::runner()).unwrap();
}

#[test]
fn lotka_residual_is_bounded() {
    props::lotka_residual_is_bounded(&mut props::runner()).unwrap();
}

#[test]
fn brass_transform_round_trips() {
    props::brass_transform_round_trips(&mut props::runner()).unwrap();
}

#[test]
fn child_survival_and_l5_increase_with_e0() {
    props::child_survival_and_l5_increase_with_e0(&mut props::runner()).unwrap();
}

#[test]
fn growth_is_antisymmetric() {
    props::growth_is_antisymmetric(&mut props::runner()).unwrap();
}

#[test]
fn cwr_is_scale_invariant() {
    props::cwr_is_scale_invariant(&mut props::runner()).unwrap();
}

#[test]
fn widening_ranges_never_drops_cells() {
    props::widening_ranges_never_drops_cells(&mut props::runner()).unwrap();
}

#[test]
fn sweeps_are_deterministic() {
    props::sweeps_are_deterministic(&mut props::runner()).unwrap();
}

#[test]
fn contour_vertices_sit_on_their_level() {
    props::contour_vertices_sit_on_their_level(&mut props::runner()).unwrap();
}
