//! Order-fixed parallel expectations over valuation profiles.

use rayon::prelude::*;

use crate::error::Result;
use crate::valuations::Instance;

/// `Σ_profiles Pr[profile] · f(profile)` for a vector-valued `f` of fixed
/// length `width`.
///
/// Terms are evaluated in parallel but summed sequentially in profile order,
/// so the result does not depend on the worker count.
pub(crate) fn profile_expectation_vec<F>(
    inst: &Instance,
    limit: u128,
    width: usize,
    f: F,
) -> Result<Vec<f64>>
where
    F: Fn(&[usize]) -> Result<Vec<f64>> + Sync,
{
    inst.require_profiles(limit)?;
    let profiles: Vec<(Vec<usize>, f64)> = inst.profiles().collect();
    let terms: Vec<Vec<f64>> = profiles
        .par_iter()
        .map(|(idx, _)| f(idx))
        .collect::<Result<_>>()?;
    let mut acc = vec![0.0; width];
    for ((_, q), t) in profiles.iter().zip(&terms) {
        debug_assert_eq!(t.len(), width);
        for (a, x) in acc.iter_mut().zip(t) {
            *a += q * x;
        }
    }
    Ok(acc)
}

pub(crate) fn profile_expectation<const K: usize, F>(
    inst: &Instance,
    limit: u128,
    f: F,
) -> Result<[f64; K]>
where
    F: Fn(&[usize]) -> Result<[f64; K]> + Sync,
{
    let v = profile_expectation_vec(inst, limit, K, |p| f(p).map(|a| a.to_vec()))?;
    Ok(v.try_into().expect("width K"))
}

/// Every index vector below `radix`, last coordinate fastest.
pub(crate) fn odometer(radix: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let mut next = if radix.iter().all(|&r| r > 0) {
        Some(vec![0; radix.len()])
    } else {
        None
    };
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut succ = cur.clone();
        for pos in (0..succ.len()).rev() {
            succ[pos] += 1;
            if succ[pos] < radix[pos] {
                next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(cur)
    })
}

/// Saturating product of `sizes`, checked against `limit`.
pub(crate) fn check_product(
    what: &'static str,
    sizes: impl IntoIterator<Item = usize>,
    limit: u128,
) -> Result<u128> {
    let size = sizes
        .into_iter()
        .fold(1u128, |acc, s| acc.saturating_mul(s as u128));
    if size > limit {
        return Err(crate::error::Error::capacity(what, size, limit));
    }
    Ok(size)
}
