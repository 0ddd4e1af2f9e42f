//! Row-space membership over the rationals.
//!
//! The exact route keeps an echelon basis of integer rows, each divided by
//! the gcd of its entries, so rational elimination never needs fractions.
//! Entries are `i64` until an operation would overflow, after which the
//! whole basis is recomputed with big integers. The modular route keeps
//! echelon bases modulo two primes; it can only err by reporting a rank that
//! is too small, which happens when a prime divides one of the relevant
//! minors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::field::is_prime;

trait ExactInt: Clone + PartialEq + Sized {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    /// `a * b - c * d`, `None` on overflow.
    fn cross(a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self>;
    fn gcd(&self, other: &Self) -> Self;
    fn div_exact(&self, d: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_one(&self) -> bool;
}

impl ExactInt for i64 {
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn cross(a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self> {
        a.checked_mul(*b)?.checked_sub(c.checked_mul(*d)?)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, d: &Self) -> Self {
        self / d
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_one(&self) -> bool {
        *self == 1
    }
}

impl ExactInt for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn cross(a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self> {
        Some(a * b - c * d)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, d: &Self) -> Self {
        self / d
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_one(&self) -> bool {
        *self == BigInt::from(1)
    }
}

#[derive(Clone, Debug)]
struct IntEchelon<T> {
    width: usize,
    /// `(pivot column, row)` sorted by pivot; every row is primitive with a
    /// positive pivot entry.
    rows: Vec<(usize, Vec<T>)>,
}

impl<T: ExactInt> IntEchelon<T> {
    fn new(width: usize) -> Self {
        IntEchelon { width, rows: Vec::new() }
    }

    fn make_primitive(v: &mut [T]) {
        let mut g = T::zero();
        for x in v.iter() {
            if !x.is_zero() {
                g = g.gcd(x);
                if g.is_one() {
                    return;
                }
            }
        }
        if !g.is_zero() {
            v.iter_mut().for_each(|x| *x = x.div_exact(&g));
        }
    }

    /// Reduces `v` against the basis; `None` on overflow.
    fn reduce(&self, mut v: Vec<T>) -> Option<Vec<T>> {
        for (c, row) in &self.rows {
            if v[*c].is_zero() {
                continue;
            }
            let (p, f) = (row[*c].clone(), v[*c].clone());
            for (x, r) in v.iter_mut().zip(row) {
                if r.is_zero() {
                    if !x.is_zero() {
                        *x = T::cross(&p, x, &T::zero(), r)?;
                    }
                } else {
                    *x = T::cross(&p, x, &f, r)?;
                }
            }
            Self::make_primitive(&mut v);
        }
        Some(v)
    }

    /// Adds `v` to the row space; `Some(true)` when the rank grew.
    fn insert(&mut self, v: Vec<T>) -> Option<bool> {
        let mut v = self.reduce(v)?;
        let Some(c) = v.iter().position(|x| !x.is_zero()) else {
            return Some(false);
        };
        if v[c].is_negative() {
            v.iter_mut().for_each(|x| *x = x.neg());
        }
        let at = self.rows.partition_point(|(pc, _)| *pc < c);
        self.rows.insert(at, (c, v));
        Some(true)
    }
}

impl IntEchelon<i64> {
    fn to_big(&self) -> IntEchelon<BigInt> {
        IntEchelon {
            width: self.width,
            rows: self.rows.iter().map(|(c, r)| (*c, r.iter().map(|&x| BigInt::from(x)).collect())).collect(),
        }
    }
}

#[derive(Clone, Debug)]
enum ExactBasis {
    Small(IntEchelon<i64>),
    Big(IntEchelon<BigInt>),
}

#[derive(Clone, Debug)]
struct ModEchelon {
    p: u64,
    /// `(pivot column, row)` sorted by pivot, pivot entry 1.
    rows: Vec<(usize, Vec<u64>)>,
}

impl ModEchelon {
    fn reduce(&self, mut v: Vec<u64>) -> Vec<u64> {
        let p = self.p;
        for (c, row) in &self.rows {
            let f = v[*c];
            if f == 0 {
                continue;
            }
            let nf = p - f;
            for (x, &r) in v.iter_mut().zip(row) {
                if r != 0 {
                    *x = (*x + nf * r) % p;
                }
            }
        }
        v
    }

    fn insert(&mut self, v: Vec<u64>) -> bool {
        let mut v = self.reduce(v);
        let Some(c) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = mod_pow(v[c], self.p - 2, self.p);
        v.iter_mut().for_each(|x| *x = *x * inv % self.p);
        let at = self.rows.partition_point(|(pc, _)| *pc < c);
        self.rows.insert(at, (c, v));
        true
    }
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// The two least primes above `2^20`.
pub fn default_primes() -> [u64; 2] {
    let mut it = ((1u64 << 20) + 1..).filter(|&n| is_prime(n));
    [it.next().unwrap(), it.next().unwrap()]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageMode {
    Exact,
    Modular,
}

/// Membership oracle for the row space of an integer matrix.
#[derive(Clone, Debug)]
pub struct ImageOracle {
    width: usize,
    rank: usize,
    basis: OracleBasis,
}

#[derive(Clone, Debug)]
enum OracleBasis {
    Exact(ExactBasis),
    Modular(Vec<ModEchelon>),
}

impl ImageOracle {
    /// Exact rational row space of `rows`.
    pub fn exact(width: usize, rows: &[Vec<i64>]) -> ImageOracle {
        let mut small = IntEchelon::<i64>::new(width);
        let mut overflow = false;
        for r in rows {
            if small.insert(r.clone()).is_none() {
                overflow = true;
                break;
            }
        }
        let basis = if overflow {
            let mut big = IntEchelon::<BigInt>::new(width);
            for r in rows {
                big.insert(r.iter().map(|&x| BigInt::from(x)).collect()).unwrap();
            }
            ExactBasis::Big(big)
        } else {
            ExactBasis::Small(small)
        };
        let rank = match &basis {
            ExactBasis::Small(e) => e.rows.len(),
            ExactBasis::Big(e) => e.rows.len(),
        };
        ImageOracle { width, rank, basis: OracleBasis::Exact(basis) }
    }

    /// Row space modulo each of `primes`.
    pub fn modular(width: usize, rows: &[Vec<i64>], primes: &[u64]) -> ImageOracle {
        let bases: Vec<ModEchelon> = primes
            .iter()
            .map(|&p| {
                let mut e = ModEchelon { p, rows: Vec::new() };
                for r in rows {
                    e.insert(r.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect());
                }
                e
            })
            .collect();
        let rank = bases.iter().map(|e| e.rows.len()).max().unwrap_or(0);
        ImageOracle { width, rank, basis: OracleBasis::Modular(bases) }
    }

    pub fn mode(&self) -> ImageMode {
        match self.basis {
            OracleBasis::Exact(_) => ImageMode::Exact,
            OracleBasis::Modular(_) => ImageMode::Modular,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Per-prime ranks of the modular route (empty for the exact route).
    pub fn modular_ranks(&self) -> Vec<(u64, usize)> {
        match &self.basis {
            OracleBasis::Modular(b) => b.iter().map(|e| (e.p, e.rows.len())).collect(),
            OracleBasis::Exact(_) => Vec::new(),
        }
    }

    /// Rank after appending `v` as an extra row.
    pub fn extended_rank(&self, v: &[i64]) -> usize {
        assert_eq!(v.len(), self.width);
        match &self.basis {
            OracleBasis::Exact(ExactBasis::Small(e)) => {
                let grows = match e.reduce(v.to_vec()) {
                    Some(r) => r.iter().any(|x| *x != 0),
                    None => {
                        let big = e.to_big();
                        let r = big.reduce(v.iter().map(|&x| BigInt::from(x)).collect()).unwrap();
                        r.iter().any(|x| !Zero::is_zero(x))
                    }
                };
                self.rank + grows as usize
            }
            OracleBasis::Exact(ExactBasis::Big(e)) => {
                let r = e.reduce(v.iter().map(|&x| BigInt::from(x)).collect()).unwrap();
                self.rank + r.iter().any(|x| !Zero::is_zero(x)) as usize
            }
            OracleBasis::Modular(bases) => {
                // the row space is in the image only if every prime agrees
                bases
                    .iter()
                    .map(|e| {
                        let r = e.reduce(v.iter().map(|&x| x.rem_euclid(e.p as i64) as u64).collect());
                        e.rows.len() + r.iter().any(|&x| x != 0) as usize
                    })
                    .max()
                    .unwrap_or(0)
                    .max(self.rank)
            }
        }
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        match &self.basis {
            OracleBasis::Modular(bases) => bases.iter().all(|e| {
                let r = e.reduce(v.iter().map(|&x| x.rem_euclid(e.p as i64) as u64).collect());
                r.iter().all(|&x| x == 0)
            }),
            OracleBasis::Exact(_) => self.extended_rank(v) == self.rank,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_above_two_to_the_twenty() {
        let [a, b] = default_primes();
        assert!(a > 1 << 20 && b > a);
        assert!(is_prime(a) && is_prime(b));
        assert!(((1 << 20) + 1..a).all(|n| !is_prime(n)));
    }

    #[test]
    fn small_rank_examples() {
        let rows = vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 2, 1]];
        for o in [ImageOracle::exact(3, &rows), ImageOracle::modular(3, &rows, &default_primes())] {
            assert_eq!(o.rank(), 2);
            assert!(o.contains(&[1, 0, -1]));
            assert!(!o.contains(&[1, 0, 0]));
            assert_eq!(o.extended_rank(&[0, 0, 1]), 3);
        }
    }

    #[test]
    fn modular_rank_drops_when_prime_divides_a_minor() {
        // det = 7: rank 2 over Q, rank 1 mod 7
        let rows = vec![vec![1, 2], vec![3, 13]];
        assert_eq!(ImageOracle::exact(2, &rows).rank(), 2);
        assert_eq!(ImageOracle::modular(2, &rows, &[7]).rank(), 1);
    }

    #[test]
    fn overflow_falls_back_to_big_integers() {
        // Hilbert-like integer matrix with large entries forces i64 overflow.
        let n = 12;
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| ((i as i64 + 3) * (j as i64 + 7)).pow(6) + (i == j) as i64).collect())
            .collect();
        let o = ImageOracle::exact(n, &rows);
        assert_eq!(o.rank(), n);
        assert!(o.contains(&rows[5]));
    }

    /// Independent check: rank over Q by Gaussian elimination with rationals
    /// as (numerator, denominator) pairs of i128 on tiny matrices.
    fn rational_rank(rows: &[Vec<i64>]) -> usize {
        let mut m: Vec<Vec<(i128, i128)>> = rows.iter().map(|r| r.iter().map(|&x| (x as i128, 1)).collect()).collect();
        let width = m.first().map_or(0, Vec::len);
        let mut rank = 0;
        let norm = |(a, b): (i128, i128)| {
            let g = Integer::gcd(&a, &b).max(1);
            let s = if b < 0 { -1 } else { 1 };
            (s * a / g, s * b / g)
        };
        for col in 0..width {
            let Some(p) = (rank..m.len()).find(|&r| m[r][col].0 != 0) else { continue };
            m.swap(rank, p);
            let piv = m[rank][col];
            for r in 0..m.len() {
                if r == rank || m[r][col].0 == 0 {
                    continue;
                }
                let f = norm((m[r][col].0 * piv.1, m[r][col].1 * piv.0));
                let pivot_row = m[rank].clone();
                for (cell, &(a, b)) in m[r].iter_mut().zip(&pivot_row) {
                    let sub = norm((f.0 * a, f.1 * b));
                    let cur = *cell;
                    *cell = norm((cur.0 * sub.1 - sub.0 * cur.1, cur.1 * sub.1));
                }
            }
            rank += 1;
        }
        rank
    }

    proptest::proptest! {
        #[test]
        fn exact_rank_matches_rational_elimination(
            rows in proptest::collection::vec(proptest::collection::vec(-3i64..4, 5), 1..7)
        ) {
            let o = ImageOracle::exact(5, &rows);
            proptest::prop_assert_eq!(o.rank(), rational_rank(&rows));
            for r in &rows {
                proptest::prop_assert!(o.contains(r));
            }
        }
    }
}
