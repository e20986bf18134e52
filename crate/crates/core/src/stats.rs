//! Rank correlation with tie handling: Kendall's tau-b and Spearman's rho on
//! average (fractional) ranks.

use std::cmp::Ordering;

use crate::error::{Error, Result};

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::Domain(format!("non-finite value {v} in rank input"))),
        None => Ok(()),
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Domain(
            "at least two observations are required".into(),
        ));
    }
    check_finite(x)?;
    check_finite(y)
}

/// Average ranks (1-based). Tied values share the mean of the positions they
/// occupy. With `descending`, the largest value gets rank 1.
pub fn fractional_ranks(values: &[f64], descending: bool) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Domain("cannot rank an empty vector".into()));
    }
    check_finite(values)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let ord = values[a].total_cmp(&values[b]);
        if descending {
            ord.reverse()
        } else {
            ord
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let mean = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = mean;
        }
        start = end;
    }
    Ok(ranks)
}

fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Stable merge sort that returns the number of inversions (strictly
/// decreasing pairs).
fn sort_counting_swaps(values: &mut [f64], scratch: &mut [f64]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (left, right) = values.split_at_mut(mid);
        let (sl, sr) = scratch.split_at_mut(mid);
        sort_counting_swaps(left, sl) + sort_counting_swaps(right, sr)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if values[j].total_cmp(&values[i]) == Ordering::Less {
            scratch[k] = values[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            scratch[k] = values[i];
            i += 1;
        }
        k += 1;
    }
    scratch[k..k + (mid - i)].copy_from_slice(&values[i..mid]);
    k += mid - i;
    scratch[k..k + (n - j)].copy_from_slice(&values[j..n]);
    values.copy_from_slice(&scratch[..n]);
    swaps
}

/// Kendall's tau-b, computed in `O(n log n)` by sorting on `x` and counting
/// the exchanges needed to sort the paired `y`.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as u64;
    // `+ 0.0` folds -0.0 into 0.0 so total_cmp agrees with ==.
    let mut pairs: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a + 0.0, b + 0.0)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let tied_x = tied_pairs(&xs);
    let tied_xy = tied_pairs(&pairs);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut scratch = vec![0.0; ys.len()];
    let swaps = sort_counting_swaps(&mut ys, &mut scratch);
    let tied_y = tied_pairs(&ys);

    let total = n * (n - 1) / 2;
    let denom = ((total - tied_x) as f64 * (total - tied_y) as f64).sqrt();
    if denom == 0.0 {
        return Err(Error::Domain(
            "tau-b is undefined when a vector is entirely tied".into(),
        ));
    }
    let numer = total as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    Ok(numer / denom)
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Domain(
            "Spearman's rho is undefined for a constant vector".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman's rho: Pearson correlation of the average-rank vectors.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let rx = fractional_ranks(x, false)?;
    let ry = fractional_ranks(y, false)?;
    pearson(&rx, &ry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fractional_examples() {
        assert_eq!(
            fractional_ranks(&[1.0, 0.5, 0.5, 0.1], true).unwrap(),
            [1.0, 2.5, 2.5, 4.0]
        );
        assert_eq!(fractional_ranks(&[0.3; 5], true).unwrap(), [3.0; 5]);
        assert_eq!(
            fractional_ranks(&[1.0, 0.5, 0.5, 0.1], false).unwrap(),
            [4.0, 2.5, 2.5, 1.0]
        );
        assert!(fractional_ranks(&[], true).is_err());
    }

    #[test]
    fn tau_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(kendall_tau_b(&a, &a).unwrap(), 1.0);
        assert_eq!(kendall_tau_b(&a, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(kendall_tau_b(&a, &[1.0, 2.0]).is_err());
        assert!(kendall_tau_b(&a, &[2.0; 4]).is_err());
        // scipy.stats.kendalltau([1,2,2,3],[1,3,2,2]) = 0.4
        let t = kendall_tau_b(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 2.0]).unwrap();
        assert!((t - 0.4).abs() < 1e-12, "{t}");
    }

    #[test]
    fn spearman_basics() {
        let a = [0.1, 0.7, 0.7, 0.2, 0.9];
        assert!((spearman_rho(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!(spearman_rho(&a, &[1.0; 5]).is_err());
        assert!(spearman_rho(&a, &a[..3]).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_monotone_invariant(
            pairs in prop::collection::vec((0u8..6, 0u8..6), 3..25)
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            let tau = kendall_tau_b(&x, &y);
            let rho = spearman_rho(&x, &y);
            prop_assume!(tau.is_ok() && rho.is_ok());
            let (tau, rho) = (tau.unwrap(), rho.unwrap());
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&tau));
            prop_assert!((tau - kendall_tau_b(&y, &x).unwrap()).abs() < 1e-12);
            prop_assert!((rho - spearman_rho(&y, &x).unwrap()).abs() < 1e-12);
            let warped: Vec<f64> = x.iter().map(|v| (v * 0.7).exp() - 3.0).collect();
            prop_assert_eq!(tau, kendall_tau_b(&warped, &y).unwrap());
            prop_assert!((rho - spearman_rho(&warped, &y).unwrap()).abs() < 1e-12);
        }
    }
}
