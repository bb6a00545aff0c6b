//! Polynomial degree of an integer sequence by finite differences.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

fn differences(seq: &[BigInt]) -> Vec<BigInt> {
    seq.windows(2).map(|w| &w[1] - &w[0]).collect()
}

/// Degree `d` such that on the window the `(d+1)`-st difference vanishes
/// identically and the `d`-th is positive (non-negative for `d = 0`). The sequence may be irregular on a
/// prefix of at most half the window (eventually polynomial growth); the tail
/// used must leave at least two vanishing `(d+1)`-st differences. Returns
/// `None` ("inconclusive") when no degree is certified.
pub fn fit_degree_big(seq: &[BigInt]) -> Option<usize> {
    if seq.iter().all(|x| x.is_zero()) && !seq.is_empty() {
        return Some(0);
    }
    let max_offset = seq.len() / 2;
    for d in 0..seq.len() {
        for offset in 0..=max_offset {
            let tail = &seq[offset..];
            if tail.len() < d + 3 {
                break;
            }
            let mut diffs = tail.to_vec();
            for _ in 0..d {
                diffs = differences(&diffs);
            }
            let next = differences(&diffs);
            if next.iter().all(|x| x.is_zero())
                && diffs
                    .iter()
                    .all(|x| x.is_positive() || (d == 0 && x.is_zero()))
            {
                return Some(d);
            }
        }
    }
    None
}

pub fn fit_degree(seq: &[u64]) -> Option<usize> {
    let big: Vec<BigInt> = seq.iter().map(|&x| BigInt::from(x)).collect();
    fit_degree_big(&big)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_polynomials() {
        assert_eq!(fit_degree(&[1, 1, 1, 1, 1]), Some(0));
        assert_eq!(fit_degree(&[1, 2, 3, 4, 5]), Some(1));
        assert_eq!(fit_degree(&[1, 3, 6, 10, 15, 21]), Some(2));
        let cubes: Vec<u64> = (0..12).map(|k| k * k * k + 2).collect();
        assert_eq!(fit_degree(&cubes), Some(3));
    }

    #[test]
    fn irregular_prefix_is_tolerated() {
        assert_eq!(fit_degree(&[1, 4, 6, 9, 13, 18, 24, 31, 39, 48]), Some(2));
        assert_eq!(fit_degree(&[5, 1, 2, 3, 4, 5, 6, 7, 8]), Some(1));
    }

    #[test]
    fn inconclusive_cases() {
        assert_eq!(fit_degree(&[1, 2, 4, 8, 16, 32, 64, 128]), None);
        assert_eq!(fit_degree(&[1, 3]), None);
        assert_eq!(fit_degree(&[3, 2, 1, 0, 0, 0]), Some(0));
    }
}
