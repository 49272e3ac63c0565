//! Fixtures shared by the criterion benches.

use phg_core::torus::frequency_set;
use phg_core::{NoiseKey, SpectralFunction, TorusSpec};

/// Dense standard-normal coefficients over the whole band of `spec`.
pub fn dense_coefficients(spec: &TorusSpec, seed: u64) -> SpectralFunction {
    let key = NoiseKey::new(seed, 99);
    SpectralFunction::from_pairs(
        spec.dim(),
        frequency_set(spec).into_iter().map(|z| {
            let a = key.normal(z.coords());
            (z, a)
        }),
    )
    .expect("dimensions agree")
}

pub fn spec(n: usize, l: usize) -> TorusSpec {
    TorusSpec::new(n, l).expect("valid bench spec")
}
