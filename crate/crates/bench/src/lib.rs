//! Inputs shared by the benchmarks.

use symcov_core::microdata::simulate_macrodata;
use symcov_core::{IntervalDataset, PopulationParams, RngSeed, SymmetricMatrix};

/// `p` variables with unit center variance, 0.3 center correlation and
/// ranges centered at 3.
pub fn params(p: usize) -> PopulationParams {
    let cc = SymmetricMatrix::from_fn(p, |i, j| if i == j { 1.0 } else { 0.3 });
    let rr = SymmetricMatrix::from_fn(p, |i, j| if i == j { 0.25 } else { 0.05 });
    PopulationParams::new(vec![0.0; p], cc, vec![3.0; p], rr, None)
        .expect("benchmark parameters are valid")
}

pub fn dataset(n: usize, p: usize) -> IntervalDataset {
    simulate_macrodata(&params(p), n, RngSeed(7))
        .expect("benchmark simulation succeeds")
        .dataset
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_build() {
        let d = super::dataset(10, 3);
        assert_eq!((d.n_objects(), d.n_variables()), (10, 3));
    }
}
