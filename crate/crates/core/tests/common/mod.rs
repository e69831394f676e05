#![allow(dead_code)]

pub mod props;

use std::sync::{Arc, OnceLock};

use paleodemog_core::data::DataSource;
use paleodemog_core::fertility::FertilityPattern;
use paleodemog_core::lifetable::MortalityFamily;

pub fn family(name: &str) -> Arc<MortalityFamily> {
    static WEST: OnceLock<Arc<MortalityFamily>> = OnceLock::new();
    static SOUTH: OnceLock<Arc<MortalityFamily>> = OnceLock::new();
    let cell = match name {
        "west" => &WEST,
        "south" => &SOUTH,
        _ => panic!("no shared family {name}"),
    };
    cell.get_or_init(|| Arc::new(DataSource::embedded().family(name).unwrap()))
        .clone()
}

pub fn pattern(name: &str) -> Arc<FertilityPattern> {
    static BOOTH: OnceLock<Arc<FertilityPattern>> = OnceLock::new();
    static MAORI: OnceLock<Arc<FertilityPattern>> = OnceLock::new();
    let cell = match name {
        "booth" => &BOOTH,
        "maori1962" => &MAORI,
        _ => panic!("no shared pattern {name}"),
    };
    cell.get_or_init(|| Arc::new(DataSource::embedded().pattern(name).unwrap()))
        .clone()
}

pub fn west() -> Arc<MortalityFamily> {
    family("west")
}

pub fn booth() -> Arc<FertilityPattern> {
    pattern("booth")
}
