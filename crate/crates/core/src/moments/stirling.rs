//! Stirling numbers of both kinds, for converting between factorial and raw
//! moments.

use crate::error::{Error, Result};
use crate::moments::MAX_ORDER;

/// Triangular tables `S2[l][j]` (second kind) and signed `S1[l][j]` (first
/// kind) for `0 <= j <= l <= max_order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StirlingTables {
    max_order: usize,
    second: Vec<Vec<i128>>,
    first: Vec<Vec<i128>>,
}

impl StirlingTables {
    pub fn new(max_order: usize) -> Result<Self> {
        if max_order > MAX_ORDER {
            return Err(Error::OrderTooLarge {
                requested: max_order,
                max: MAX_ORDER,
            });
        }
        let mut second = vec![vec![0i128; max_order + 1]; max_order + 1];
        let mut first = vec![vec![0i128; max_order + 1]; max_order + 1];
        second[0][0] = 1;
        first[0][0] = 1;
        for l in 1..=max_order {
            for j in 1..=l {
                second[l][j] = j as i128 * second[l - 1][j] + second[l - 1][j - 1];
                first[l][j] = first[l - 1][j - 1] - (l as i128 - 1) * first[l - 1][j];
            }
        }
        Ok(Self {
            max_order,
            second,
            first,
        })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn second(&self, l: usize, j: usize) -> i128 {
        self.second[l][j]
    }

    pub fn first(&self, l: usize, j: usize) -> i128 {
        self.first[l][j]
    }

    /// Whether `S2 · S1` and `S1 · S2` are both the identity, in exact integers.
    pub fn are_mutual_inverses(&self) -> bool {
        let n = self.max_order;
        let compose = |a: &Vec<Vec<i128>>, b: &Vec<Vec<i128>>| {
            (0..=n).all(|i| {
                (0..=n).all(|j| {
                    let s: i128 = (0..=n).map(|k| a[i][k] * b[k][j]).sum();
                    s == i128::from(i == j)
                })
            })
        };
        compose(&self.second, &self.first) && compose(&self.first, &self.second)
    }

    /// `m[l] = Σ_j S2[l][j] f[j]`.
    pub fn factorial_to_raw(&self, factorial: &[f64]) -> Vec<f64> {
        self.apply(&self.second, factorial)
    }

    /// `f[l] = Σ_j S1[l][j] m[j]`.
    pub fn raw_to_factorial(&self, raw: &[f64]) -> Vec<f64> {
        self.apply(&self.first, raw)
    }

    /// Worst error of the round trips factorial -> raw -> factorial and
    /// raw -> factorial -> raw. Each order's error is divided by
    /// `(|T2| |T1| |v|)_l`, the sum of absolute terms through both
    /// conversions, which bounds what double precision can resolve: the
    /// first-kind step cancels heavily when high factorial moments are tiny
    /// next to the raw ones.
    pub fn round_trip_error(&self, factorial: &[f64], raw: &[f64]) -> f64 {
        let trip = |first: &[Vec<i128>], second: &[Vec<i128>], v: &[f64]| {
            let got = self.apply(second, &self.apply(first, v));
            let abs = |t: &[Vec<i128>], x: &[f64]| -> Vec<f64> {
                (0..x.len())
                    .map(|l| (0..=l).map(|j| (t[l][j] as f64 * x[j]).abs()).sum())
                    .collect()
            };
            let scale = abs(second, &abs(first, v));
            (0..v.len())
                .map(|l| {
                    let err = (got[l] - v[l]).abs();
                    if err == 0.0 {
                        0.0
                    } else {
                        err / scale[l]
                    }
                })
                .fold(0.0, f64::max)
        };
        trip(&self.second, &self.first, factorial).max(trip(&self.first, &self.second, raw))
    }

    fn apply(&self, table: &[Vec<i128>], v: &[f64]) -> Vec<f64> {
        assert!(
            v.len() <= self.max_order + 1,
            "moment vector longer than the tables"
        );
        (0..v.len())
            .map(|l| (0..=l).map(|j| table[l][j] as f64 * v[j]).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let t = StirlingTables::new(10).unwrap();
        assert_eq!(t.second(5, 2), 15);
        assert_eq!(t.second(10, 5), 42525);
        assert_eq!(t.first(5, 2), -50);
        assert_eq!(t.first(4, 1), -6);
        assert_eq!(t.first(10, 10), 1);
    }

    #[test]
    fn exact_inverses_through_twenty() {
        assert!(StirlingTables::new(20).unwrap().are_mutual_inverses());
        assert!(StirlingTables::new(21).is_err());
    }

    #[test]
    fn bell_numbers_from_unit_factorial_moments() {
        let t = StirlingTables::new(8).unwrap();
        let raw = t.factorial_to_raw(&[1.0; 9]);
        assert_eq!(
            raw,
            vec![1.0, 1.0, 2.0, 5.0, 15.0, 52.0, 203.0, 877.0, 4140.0]
        );
        assert_eq!(t.raw_to_factorial(&raw), vec![1.0; 9]);
    }

    /// Factorial moments of a mixed Poisson count are the raw moments of
    /// its mixing law; a few weighted atoms give valid sequences.
    fn mixed_poisson_factorials(atoms: &[(f64, f64)], order: usize) -> Vec<f64> {
        let total: f64 = atoms.iter().map(|a| a.0).sum();
        (0..=order)
            .map(|n| {
                atoms
                    .iter()
                    .map(|(w, x)| w / total * x.powi(n as i32))
                    .sum()
            })
            .collect()
    }

    proptest::proptest! {
        #[test]
        fn round_trips_are_backward_stable(
            atoms in proptest::collection::vec((0.01f64..1.0, 0.0f64..20.0), 1..5),
            order in 1usize..=20,
        ) {
            let t = StirlingTables::new(order).unwrap();
            let f = mixed_poisson_factorials(&atoms, order);
            let raw = t.factorial_to_raw(&f);
            proptest::prop_assert!(t.round_trip_error(&f, &raw) <= 1e-12);
        }
    }

    #[test]
    fn poisson_raw_moments_are_touchard_values() {
        // E[N^n] for N ~ Poisson(2): 1, 2, 6, 22, 94, 454
        let t = StirlingTables::new(5).unwrap();
        let f: Vec<f64> = (0..=5).map(|n| 2f64.powi(n)).collect();
        assert_eq!(
            t.factorial_to_raw(&f),
            vec![1.0, 2.0, 6.0, 22.0, 94.0, 454.0]
        );
    }
}
