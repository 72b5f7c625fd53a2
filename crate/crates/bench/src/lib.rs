//! Fixtures shared by the benchmarks.

use serde_json::json;
use stein_gauge::{build_density, DensitySpec, DiscreteDensity, Scalar};

pub fn density<S: Scalar>(spec: serde_json::Value) -> DiscreteDensity<S> {
    let spec: DensitySpec = serde_json::from_value(spec).expect("fixture spec parses");
    build_density(&spec).expect("fixture spec builds")
}

pub fn poisson<S: Scalar>(lambda: f64) -> DiscreteDensity<S> {
    density(json!({ "family": "poisson", "params": { "lambda": lambda }, "truncation": { "tail_mass": 1e-14 } }))
}

pub fn binomial<S: Scalar>(n: u64, p: f64) -> DiscreteDensity<S> {
    density(json!({ "family": "binomial", "params": { "n": n, "p": p } }))
}
