//! Seed-parallel Monte Carlo reductions with a schedule-independent summation order.

use rayon::prelude::*;

use crate::error::Result;

const CHUNK: u64 = 64;

/// Sums `per_seed(s)` over `s = seed0 .. seed0 + num_seeds`.
///
/// Seeds are grouped in fixed chunks that are summed in seed order, and the
/// chunk totals are again combined in order, so the result is bit-identical
/// for any thread count.
pub(crate) fn seed_sum<F>(seed0: u64, num_seeds: usize, width: usize, per_seed: F) -> Result<Vec<f64>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    let num = num_seeds as u64;
    let chunks = num.div_ceil(CHUNK);
    let partials: Vec<Result<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; width];
            for s in (c * CHUNK)..((c + 1) * CHUNK).min(num) {
                let v = per_seed(seed0.wrapping_add(s))?;
                debug_assert_eq!(v.len(), width);
                acc.iter_mut().zip(&v).for_each(|(a, x)| *a += x);
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![0.0; width];
    for p in partials {
        total.iter_mut().zip(&p?).for_each(|(a, x)| *a += x);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_of_thread_count() {
        let f = |s: u64| Ok(vec![(s as f64).sqrt().sin(), 1.0 / (1.0 + s as f64)]);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| seed_sum(10, 1000, 2, f)).unwrap();
        let b = many.install(|| seed_sum(10, 1000, 2, f)).unwrap();
        assert_eq!(a[0].to_bits(), b[0].to_bits());
        assert_eq!(a[1].to_bits(), b[1].to_bits());
    }
}
