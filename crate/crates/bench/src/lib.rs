//! Shared fixtures for the benchmarks.

use kouexp::presets;
use kouexp::{Contract, ExpSum};

/// The unit-intensity contract and the fitted age-65 lifetime density.
pub fn fixture() -> (Contract, ExpSum) {
    let contract = presets::contract_default(presets::kou_table1());
    let sum = presets::lifetimes_65().expect("default mortality fit");
    (contract, sum)
}
