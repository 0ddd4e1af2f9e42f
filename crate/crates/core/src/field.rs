//! Table-driven arithmetic in a tower `GF(q^t) = GF(q)[y]/(g)` over
//! `GF(q) = GF(p)[x]/(f)`.
//!
//! Elements are indexed `0..q^t` by their coefficient vectors: a base field
//! element `a_0 + a_1 x + ...` has index `sum a_i p^i`, and a tower element
//! `c_0 + c_1 y + ...` has index `sum c_j q^j`. Constant tower polynomials are
//! therefore exactly the indices `0..q`, which makes the subfield embedding the
//! identity on indices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field order for which full addition and multiplication tables are
/// built.
pub const MAX_FIELD_ORDER: u64 = 1024;

/// An element of a [`Field`], identified by its index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Dense operation tables of a small field, used both for the final field
/// and for the intermediate fields polynomial arithmetic runs over.
#[derive(Clone, Debug)]
struct Tables {
    order: u32,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
}

impl Tables {
    fn prime(p: u32) -> Tables {
        let n = p as usize;
        let mut add = vec![0; n * n];
        let mut mul = vec![0; n * n];
        for a in 0..p {
            for b in 0..p {
                add[a as usize * n + b as usize] = (a + b) % p;
                mul[a as usize * n + b as usize] = ((a as u64 * b as u64) % p as u64) as u32;
            }
        }
        let neg = (0..p).map(|a| (p - a) % p).collect();
        Tables { order: p, add, mul, neg }
    }

    #[inline]
    fn add(&self, a: u32, b: u32) -> u32 {
        self.add[(a * self.order + b) as usize]
    }

    #[inline]
    fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[(a * self.order + b) as usize]
    }

    #[inline]
    fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg[b as usize])
    }

    fn inv(&self, a: u32) -> Option<u32> {
        (1..self.order).find(|&b| self.mul(a, b) == 1)
    }

    /// Remainder of `num` modulo the monic polynomial `modulus` (coefficients
    /// low to high).
    fn poly_rem(&self, num: &[u32], modulus: &[u32]) -> Vec<u32> {
        let d = modulus.len() - 1;
        let mut r = num.to_vec();
        while r.len() > d {
            let lead = r.pop().unwrap();
            if lead != 0 {
                let off = r.len() - d;
                for (i, &m) in modulus[..d].iter().enumerate() {
                    r[off + i] = self.sub(r[off + i], self.mul(lead, m));
                }
            }
        }
        r
    }

    fn poly_mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(x, y));
            }
        }
        out
    }

    /// Trial division by every monic polynomial of degree `1..=deg/2`.
    fn is_irreducible(&self, poly: &[u32]) -> bool {
        let deg = poly.len() - 1;
        for k in 1..=deg / 2 {
            for lower in 0..(self.order as u64).pow(k as u32) {
                let mut divisor = digits(lower, self.order, k);
                divisor.push(1);
                if self.poly_rem(poly, &divisor).iter().all(|&c| c == 0) {
                    return false;
                }
            }
        }
        true
    }

    /// Least monic irreducible polynomial of degree `deg`, ordering candidates
    /// by the index `sum c_i n^i` of their lower coefficients.
    fn least_irreducible(&self, deg: usize) -> Vec<u32> {
        (0..(self.order as u64).pow(deg as u32))
            .map(|lower| {
                let mut poly = digits(lower, self.order, deg);
                poly.push(1);
                poly
            })
            .find(|poly| self.is_irreducible(poly))
            .expect("irreducible polynomials exist in every degree")
    }

    /// Tables of `self[y]/(modulus)`.
    fn extend(&self, modulus: &[u32]) -> Tables {
        let d = modulus.len() - 1;
        let order = self.order.pow(d as u32);
        let n = order as usize;
        let polys: Vec<Vec<u32>> = (0..order).map(|i| digits(i as u64, self.order, d)).collect();
        let encode = |v: &[u32]| v.iter().rev().fold(0u32, |acc, &c| acc * self.order + c);
        let mut add = vec![0; n * n];
        let mut mul = vec![0; n * n];
        for a in 0..n {
            for b in a..n {
                let sum: Vec<u32> = polys[a].iter().zip(&polys[b]).map(|(&x, &y)| self.add(x, y)).collect();
                let s = encode(&sum);
                let prod = self.poly_rem(&self.poly_mul(&polys[a], &polys[b]), modulus);
                let m = encode(&prod);
                add[a * n + b] = s;
                add[b * n + a] = s;
                mul[a * n + b] = m;
                mul[b * n + a] = m;
            }
        }
        let neg = polys.iter().map(|v| encode(&v.iter().map(|&c| self.neg[c as usize]).collect::<Vec<_>>())).collect();
        Tables { order, add, mul, neg }
    }
}

/// Little-endian base-`base` digits of `value`, padded to `len`.
fn digits(mut value: u64, base: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((value % base as u64) as u32);
        value /= base as u64;
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits a prime power `q = p^h` into `(p, h)`.
pub fn prime_power(q: u64) -> Result<(u32, u32)> {
    if q < 2 {
        return Err(Error::NotPrimePower(q));
    }
    let p = (2..=q).find(|&d| q.is_multiple_of(d)).unwrap();
    let (mut rest, mut h) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        h += 1;
    }
    if rest != 1 {
        return Err(Error::NotPrimePower(q));
    }
    Ok((p as u32, h))
}

/// The field `GF(q^t)` built as a degree-`t` extension of `GF(q)`, `q = p^h`.
#[derive(Clone)]
pub struct Field {
    p: u32,
    h: u32,
    t: u32,
    q: u32,
    base_poly: Vec<u32>,
    tower_poly: Vec<u32>,
    tables: Tables,
    inv: Vec<u32>,
    frob: Vec<u32>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("h", &self.h)
            .field("t", &self.t)
            .field("base_poly", &self.base_poly)
            .field("tower_poly", &self.tower_poly)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        (self.p, self.h, self.t) == (other.p, other.h, other.t)
            && self.base_poly == other.base_poly
            && self.tower_poly == other.tower_poly
    }
}

impl Eq for Field {}

impl Field {
    /// Builds `GF((p^h)^t)` with the least monic irreducible base and tower
    /// polynomials.
    pub fn new(p: u32, h: u32, t: u32) -> Result<Field> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p));
        }
        if h == 0 || t == 0 {
            return Err(Error::ZeroDegree { h, t });
        }
        let order = (p as u64).checked_pow(h * t).unwrap_or(u64::MAX);
        if order > MAX_FIELD_ORDER {
            return Err(Error::FieldTooLarge(order));
        }
        let prime = Tables::prime(p);
        let base_poly = prime.least_irreducible(h as usize);
        let base = prime.extend(&base_poly);
        let tower_poly = base.least_irreducible(t as usize);
        let tables = base.extend(&tower_poly);
        let q = base.order;

        let inv = (0..tables.order).map(|a| if a == 0 { 0 } else { tables.inv(a).unwrap() }).collect();
        let frob = (0..tables.order)
            .map(|a| {
                let mut acc = 1;
                for _ in 0..q {
                    acc = tables.mul(acc, a);
                }
                acc
            })
            .collect();
        Ok(Field { p, h, t, q, base_poly, tower_poly, tables, inv, frob })
    }

    /// `GF(q)` for a prime power `q`.
    pub fn of_order(q: u64) -> Result<Field> {
        let (p, h) = prime_power(q)?;
        Field::new(p, h, 1)
    }

    /// `GF(q^t)` as a tower over `GF(q)`.
    pub fn tower(q: u64, t: u32) -> Result<Field> {
        let (p, h) = prime_power(q)?;
        Field::new(p, h, t)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn base_degree(&self) -> u32 {
        self.h
    }

    pub fn extension_degree(&self) -> u32 {
        self.t
    }

    /// Order of the subfield `GF(q)`.
    pub fn subfield_order(&self) -> u32 {
        self.q
    }

    /// Order `q^t` of the whole field.
    pub fn order(&self) -> u32 {
        self.tables.order
    }

    /// Base polynomial over `GF(p)`, monic, coefficients low to high.
    pub fn base_poly(&self) -> &[u32] {
        &self.base_poly
    }

    /// Tower polynomial over `GF(q)`, monic, coefficients low to high (as
    /// subfield indices).
    pub fn tower_poly(&self) -> &[u32] {
        &self.tower_poly
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.order()).map(Elem)
    }

    pub fn subfield_elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.q).map(Elem)
    }

    /// Tower coefficients of `a`, each given by its `GF(p)` coefficients.
    pub fn coefficients(&self, a: Elem) -> Vec<Vec<u32>> {
        digits(a.0 as u64, self.q, self.t as usize)
            .into_iter()
            .map(|c| digits(c as u64, self.p, self.h as usize))
            .collect()
    }

    pub fn contains(&self, a: Elem) -> bool {
        a.0 < self.order()
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        Elem(self.tables.add(a.0, b.0))
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        Elem(self.tables.sub(a.0, b.0))
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        Elem(self.tables.neg[a.index()])
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        Elem(self.tables.mul(a.0, b.0))
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Option<Elem> {
        (!a.is_zero()).then(|| Elem(self.inv[a.index()]))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        let inv = self.inv(b).ok_or(Error::DivisionByZero)?;
        Ok(self.mul(a, inv))
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let (mut base, mut acc) = (a, Elem::ONE);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Checked binary operation; rejects elements outside this field.
    pub fn arith(&self, a: Elem, b: Elem, op: ArithOp) -> Result<Elem> {
        for e in [a, b] {
            if !self.contains(e) {
                return Err(Error::ForeignElement { element: e.0, order: self.order() });
            }
        }
        Ok(match op {
            ArithOp::Add => self.add(a, b),
            ArithOp::Sub => self.sub(a, b),
            ArithOp::Mul => self.mul(a, b),
            ArithOp::Div => self.div(a, b)?,
        })
    }

    /// `a^q`.
    #[inline]
    pub fn frobenius(&self, a: Elem) -> Elem {
        Elem(self.frob[a.index()])
    }

    /// `a^(q^k)`; `k` is taken modulo `t`.
    pub fn conjugate(&self, a: Elem, k: u32) -> Elem {
        (0..k % self.t).fold(a, |acc, _| self.frobenius(acc))
    }

    /// Membership in the subfield `GF(q)`.
    #[inline]
    pub fn in_subfield(&self, a: Elem) -> bool {
        self.frobenius(a) == a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_gf2() {
        let f = Field::new(2, 1, 1).unwrap();
        assert_eq!(f.order(), 2);
        assert_eq!(f.elements().collect::<Vec<_>>(), vec![Elem(0), Elem(1)]);
        assert_eq!(f.add(Elem(1), Elem(1)), Elem(0));
    }

    #[test]
    fn gf4_uses_least_quadratic() {
        // Monic quadratics over GF(2): y^2, y^2+1, y^2+y, y^2+y+1; only the last
        // has no root.
        let monic: Vec<[u32; 3]> = vec![[0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]];
        let irreducible: Vec<_> =
            monic.iter().filter(|c| (0..2).all(|y| (c[0] + c[1] * y + c[2] * y * y) % 2 != 0)).collect();
        assert_eq!(irreducible, vec![&[1, 1, 1]]);

        let f = Field::new(2, 1, 2).unwrap();
        assert_eq!(f.tower_poly(), &[1, 1, 1]);
        assert_eq!(f.order(), 4);
        // omega = y has index 2, omega + 1 has index 3
        assert_eq!(f.mul(Elem(2), Elem(3)), Elem::ONE);
        assert_eq!(f.mul(Elem(2), Elem(2)), Elem(3));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(Field::new(4, 1, 1).unwrap_err(), Error::NotPrime(4));
        assert!(matches!(Field::new(2, 0, 1), Err(Error::ZeroDegree { .. })));
        assert!(matches!(Field::new(2, 1, 11), Err(Error::FieldTooLarge(2048))));
        assert!(prime_power(6).is_err());
        assert_eq!(prime_power(8).unwrap(), (2, 3));
    }

    #[test]
    fn division_and_foreign_elements() {
        let f = Field::new(3, 1, 2).unwrap();
        assert_eq!(f.arith(Elem(4), Elem(0), ArithOp::Div), Err(Error::DivisionByZero));
        assert!(matches!(f.arith(Elem(9), Elem(1), ArithOp::Add), Err(Error::ForeignElement { .. })));
        for a in f.elements() {
            assert_eq!(f.add(a, Elem::ZERO), a);
            if !a.is_zero() {
                assert_eq!(f.div(a, a).unwrap(), Elem::ONE);
            }
        }
    }

    fn small_fields() -> Vec<Field> {
        let mut out = Vec::new();
        for (p, h, t) in [
            (2, 1, 1),
            (3, 1, 1),
            (2, 2, 1),
            (5, 1, 1),
            (7, 1, 1),
            (2, 3, 1),
            (3, 2, 1),
            (2, 1, 2),
            (2, 1, 3),
            (3, 1, 2),
            (2, 2, 2),
            (2, 1, 6),
            (2, 2, 3),
            (2, 3, 2),
        ] {
            out.push(Field::new(p, h, t).unwrap());
        }
        out
    }

    #[test]
    fn field_axioms_exhaustive() {
        for f in small_fields() {
            let els: Vec<Elem> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, f.neg(a)), Elem::ZERO);
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_is_automorphism_fixing_subfield() {
        for f in small_fields() {
            let t = f.extension_degree();
            let q = f.subfield_order() as usize;
            let fixed = f.elements().filter(|&a| f.in_subfield(a)).count();
            assert_eq!(fixed, q);
            // fixed elements are exactly the constant tower polynomials
            assert!(f.elements().filter(|&a| f.in_subfield(a)).all(|a| a.0 < q as u32));
            for a in f.elements() {
                assert_eq!(f.conjugate(a, 0), a);
                let orbit = (0..t).fold(a, |acc, _| f.conjugate(acc, 1));
                assert_eq!(orbit, a);
                assert_eq!(f.pow(a, f.order() as u64), a);
                for b in f.elements() {
                    assert_eq!(f.frobenius(f.mul(a, b)), f.mul(f.frobenius(a), f.frobenius(b)));
                    assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
                }
            }
        }
    }

    #[test]
    fn gf8_conjugation_orbit() {
        let f = Field::new(2, 1, 3).unwrap();
        for a in f.elements() {
            let c = f.conjugate(f.conjugate(f.conjugate(a, 1), 1), 1);
            assert_eq!(c, a);
        }
        assert!(f.in_subfield(Elem::ZERO) && f.in_subfield(Elem::ONE));
    }

    #[test]
    fn gf4_omega_not_in_subfield() {
        let f = Field::new(2, 1, 2).unwrap();
        assert!(!f.in_subfield(Elem(2)));
        assert_eq!(f.frobenius(Elem(2)), Elem(3));
    }

    #[test]
    fn deterministic_construction() {
        let a = Field::new(2, 2, 3).unwrap();
        let b = Field::new(2, 2, 3).unwrap();
        assert_eq!(a, b);
        for x in a.elements() {
            for y in a.elements() {
                assert_eq!(a.mul(x, y), b.mul(x, y));
            }
        }
        assert_eq!(a.coefficients(Elem(17)), vec![vec![1, 0], vec![0, 0], vec![1, 0]]);
    }
}
