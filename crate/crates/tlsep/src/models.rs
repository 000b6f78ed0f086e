//! Automata compiled into the library, used by the demos, the benchmark
//! table, and the test suite.

use crate::automata::Dera;
use crate::format::parse_dera;

pub const MODEL_NAMES: [&str; 5] = ["echo", "ex1", "ex2", "ex3", "ex4"];

pub fn bundled_model_text(name: &str) -> Option<&'static str> {
    match name {
        "echo" => Some(include_str!("../models/echo.era")),
        "ex1" => Some(include_str!("../models/ex1.era")),
        "ex2" => Some(include_str!("../models/ex2.era")),
        "ex3" => Some(include_str!("../models/ex3.era")),
        "ex4" => Some(include_str!("../models/ex4.era")),
        _ => None,
    }
}

pub fn bundled_model(name: &str) -> Option<Dera> {
    bundled_model_text(name).map(|text| parse_dera(text).expect("bundled models are well-formed"))
}

pub fn bundled_models() -> Vec<(&'static str, Dera)> {
    MODEL_NAMES
        .iter()
        .map(|n| (*n, bundled_model(n).expect("listed model exists")))
        .collect()
}
