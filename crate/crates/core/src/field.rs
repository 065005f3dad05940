//! Finite fields GF(p^k) with dense integer elements.
//!
//! An element is the integer `c_0 + c_1 p + ... + c_{k-1} p^{k-1}` encoding the
//! polynomial `c_0 + c_1 x + ... + c_{k-1} x^{k-1}` modulo the field's
//! modulus. The modulus is the first monic irreducible polynomial of degree
//! `k` when the lower coefficients are read as that same base-`p` integer, so
//! encodings are stable across runs.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;

/// Field elements are dense integers in `[0, q)`.
pub type Elem = u32;

/// Default cap on the field order accepted by [`FiniteField::new`].
pub const DEFAULT_ORDER_BOUND: u32 = 8192;

const ADD_TABLE_MAX: u32 = 128;

pub struct FiniteField {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u32>,
    exp: Vec<Elem>,
    log: Vec<u32>,
    neg: Vec<Elem>,
    add_table: Option<Vec<Elem>>,
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.k)
    }
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k
    }
}

impl Eq for FiniteField {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` into `(p, k)` with `q = p^k`, if `q` is a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while !q.is_multiple_of(p) {
        p += 1;
    }
    if !is_prime(p) {
        return None;
    }
    let (mut rest, mut k) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

/// Parses `"p^k"` or a plain order such as `"9"` into `(p, k)`.
pub fn parse_order(spec: &str) -> Result<(u32, u32), Error> {
    let spec = spec.trim();
    let bad = || Error::InvalidInput(alloc::format!("cannot parse field order {spec:?}"));
    if let Some((p, k)) = spec.split_once('^') {
        let p: u32 = p.trim().parse().map_err(|_| bad())?;
        let k: u32 = k.trim().parse().map_err(|_| bad())?;
        if !is_prime(p) || k == 0 {
            return Err(Error::NotPrimePower(p.saturating_pow(k.max(1))));
        }
        Ok((p, k))
    } else {
        let q: u32 = spec.parse().map_err(|_| bad())?;
        prime_power(q).ok_or(Error::NotPrimePower(q))
    }
}

// Polynomials over GF(p) as little-endian coefficient vectors.
fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let c = r[r.len() - 1] * lead_inv % p;
        for (i, &mi) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - c * mi % p) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let (mut b, mut e) = (a as u64 % p as u64, p as u64 - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn digits(mut x: u32, p: u32, k: u32) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn is_irreducible(m: &[u32], p: u32) -> bool {
    let k = m.len() as u32 - 1;
    // Any factorization has a monic factor of degree <= k/2.
    for d in 1..=k / 2 {
        for low in 0..p.pow(d) {
            let mut f = digits(low, p, d);
            f.push(1);
            if poly_rem(m, &f, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FiniteField {
    /// Builds GF(p^k) with the default order bound.
    pub fn new(p: u32, k: u32) -> Result<Arc<Self>, Error> {
        Self::with_bound(p, k, DEFAULT_ORDER_BOUND)
    }

    pub fn with_bound(p: u32, k: u32, bound: u32) -> Result<Arc<Self>, Error> {
        if !is_prime(p) || k == 0 {
            return Err(Error::NotPrimePower(p.saturating_pow(k.max(1))));
        }
        let q = p
            .checked_pow(k)
            .filter(|&q| q <= bound)
            .ok_or(Error::BoundExceeded {
                order: p.saturating_pow(k),
                bound,
            })?;
        let modulus = if k == 1 {
            vec![0, 1]
        } else {
            (0..p.pow(k))
                .map(|low| {
                    let mut m = digits(low, p, k);
                    m.push(1);
                    m
                })
                .find(|m| m[0] != 0 && is_irreducible(m, p))
                .expect("an irreducible polynomial exists in every degree")
        };
        let mut field = FiniteField {
            p,
            k,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            neg: Vec::new(),
            add_table: None,
        };
        field.neg = (0..q).map(|a| field.neg_slow(a)).collect();
        field.build_log_tables();
        if q <= ADD_TABLE_MAX {
            let mut t = vec![0; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = field.add_slow(a, b);
                }
            }
            field.add_table = Some(t);
        }
        Ok(Arc::new(field))
    }

    /// Parses `"p^k"` or `"q"` and builds the field.
    pub fn parse(spec: &str) -> Result<Arc<Self>, Error> {
        let (p, k) = parse_order(spec)?;
        Self::new(p, k)
    }

    fn add_slow(&self, mut a: Elem, mut b: Elem) -> Elem {
        if self.p == 2 {
            return a ^ b;
        }
        let (mut r, mut place) = (0, 1);
        for _ in 0..self.k {
            r += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        r
    }

    fn neg_slow(&self, mut a: Elem) -> Elem {
        let (mut r, mut place) = (0, 1);
        for _ in 0..self.k {
            r += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        r
    }

    fn mul_slow(&self, a: Elem, b: Elem) -> Elem {
        let (p, k) = (self.p, self.k);
        let (da, db) = (digits(a, p, k), digits(b, p, k));
        let mut prod = vec![0u32; (2 * k) as usize];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        let r = poly_rem(&prod, &self.modulus, p);
        r.iter().rev().fold(0, |acc, &c| acc * p + c)
    }

    fn build_log_tables(&mut self) {
        let q = self.q;
        let order = q - 1;
        let generator = (1..q)
            .find(|&g| {
                let mut x = 1;
                for i in 1..=order {
                    x = self.mul_slow(x, g);
                    if x == 1 {
                        return i == order;
                    }
                }
                false
            })
            .expect("the multiplicative group is cyclic");
        let mut exp = vec![0; order as usize];
        let mut log = vec![0; q as usize];
        let mut x = 1;
        for i in 0..order {
            exp[i as usize] = x;
            log[x as usize] = i;
            x = self.mul_slow(x, generator);
        }
        self.exp = exp;
        self.log = log;
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Modulus coefficients, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The primitive element used for the log tables.
    pub fn generator(&self) -> Elem {
        if self.q == 2 {
            1
        } else {
            self.exp[1]
        }
    }

    pub fn elements(&self) -> core::ops::Range<Elem> {
        0..self.q
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match &self.add_table {
            Some(t) => t[(a * self.q + b) as usize],
            None => self.add_slow(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] + self.log[b as usize];
        self.exp[(s % (self.q - 1)) as usize]
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Option<Elem> {
        if a == 0 {
            return None;
        }
        let l = self.log[a as usize];
        Some(self.exp[((self.q - 1 - l) % (self.q - 1)) as usize])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Option<Elem> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = self.log[a as usize] as u64 * (e % (self.q as u64 - 1));
        self.exp[(l % (self.q as u64 - 1)) as usize]
    }

    /// The Frobenius automorphism x -> x^p.
    pub fn frobenius(&self, a: Elem) -> Elem {
        self.pow(a, self.p as u64)
    }

    /// Embeds an integer through the prime subfield.
    pub fn from_int(&self, n: i64) -> Elem {
        n.rem_euclid(self.p as i64) as Elem
    }

    // Vector helpers. Vectors are plain coordinate slices.

    pub fn scale(&self, c: Elem, v: &[Elem]) -> Vec<Elem> {
        v.iter().map(|&x| self.mul(c, x)).collect()
    }

    pub fn add_vec(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    pub fn sub_vec(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        a.iter().zip(b).map(|(&x, &y)| self.sub(x, y)).collect()
    }

    pub fn dot(&self, a: &[Elem], b: &[Elem]) -> Elem {
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    /// Scales `v` so its first nonzero coordinate is 1; `None` for the zero vector.
    pub fn normalize(&self, v: &[Elem]) -> Option<Vec<Elem>> {
        let lead = *v.iter().find(|&&x| x != 0)?;
        let inv = self.inv(lead)?;
        Some(self.scale(inv, v))
    }

    /// If `u = c * v` for some scalar `c`, returns it. `v` must be nonzero.
    pub fn ratio(&self, u: &[Elem], v: &[Elem]) -> Option<Elem> {
        let i = v.iter().position(|&x| x != 0)?;
        let c = self.div(u[i], v[i])?;
        u.iter()
            .zip(v)
            .all(|(&a, &b)| a == self.mul(c, b))
            .then_some(c)
    }

    /// Decodes a base-q integer into `len` coordinates, most significant first.
    pub fn decode(&self, mut code: u64, len: usize) -> Vec<Elem> {
        let mut v = vec![0; len];
        for slot in v.iter_mut().rev() {
            *slot = (code % self.q as u64) as Elem;
            code /= self.q as u64;
        }
        v
    }

    pub fn encode(&self, v: &[Elem]) -> u64 {
        v.iter()
            .fold(0u64, |acc, &x| acc * self.q as u64 + x as u64)
    }
}

/// A unital ring morphism between finite fields, stored as an image table.
#[derive(Clone)]
pub struct FieldMorphism {
    source: Arc<FiniteField>,
    target: Arc<FiniteField>,
    table: Vec<Elem>,
    frobenius_power: u32,
}

impl fmt::Debug for FieldMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} -> {:?} (frobenius^{})",
            self.source, self.target, self.frobenius_power
        )
    }
}

impl PartialEq for FieldMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.table == other.table
    }
}

impl Eq for FieldMorphism {}

impl FieldMorphism {
    pub fn identity(field: &Arc<FiniteField>) -> Self {
        FieldMorphism {
            source: field.clone(),
            target: field.clone(),
            table: field.elements().collect(),
            frobenius_power: 0,
        }
    }

    /// Wraps an arbitrary table, checking the ring-morphism identities exhaustively.
    pub fn from_table(
        source: &Arc<FiniteField>,
        target: &Arc<FiniteField>,
        table: Vec<Elem>,
    ) -> Option<Self> {
        if table.len() != source.order() as usize
            || table.iter().any(|&t| t >= target.order())
            || !is_ring_morphism(source, target, &table)
        {
            return None;
        }
        let frobenius_power = field_morphisms(source, target)
            .into_iter()
            .find(|m| m.table == table)?
            .frobenius_power;
        Some(FieldMorphism {
            source: source.clone(),
            target: target.clone(),
            table,
            frobenius_power,
        })
    }

    #[inline]
    pub fn apply(&self, a: Elem) -> Elem {
        self.table[a as usize]
    }

    pub fn apply_vec(&self, v: &[Elem]) -> Vec<Elem> {
        v.iter().map(|&a| self.apply(a)).collect()
    }

    pub fn source(&self) -> &Arc<FiniteField> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteField> {
        &self.target
    }

    pub fn table(&self) -> &[Elem] {
        &self.table
    }

    /// `i` such that this map is `x -> e(x)^(p^i)` for the canonical first embedding `e`.
    pub fn frobenius_power(&self) -> u32 {
        self.frobenius_power
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.table.iter().enumerate().all(|(i, &t)| i as u32 == t)
    }

    pub fn is_bijective(&self) -> bool {
        self.source.order() == self.target.order()
    }

    /// Serialized name, e.g. `"frobenius^1"`.
    pub fn label(&self) -> alloc::string::String {
        alloc::format!("frobenius^{}", self.frobenius_power)
    }
}

/// Checks `s(0)=0, s(1)=1`, additivity and multiplicativity over the whole source.
pub fn is_ring_morphism(source: &FiniteField, target: &FiniteField, table: &[Elem]) -> bool {
    if table.first() != Some(&0) || table.get(1) != Some(&1) {
        return false;
    }
    source.elements().all(|a| {
        source.elements().all(|b| {
            table[source.add(a, b) as usize] == target.add(table[a as usize], table[b as usize])
                && table[source.mul(a, b) as usize]
                    == target.mul(table[a as usize], table[b as usize])
        })
    })
}

/// All unital ring morphisms `source -> target`, ordered by image table.
///
/// A morphism is fixed by where it sends the class of `x`, which must be a root
/// of the source modulus in the target. None exist across characteristics.
pub fn field_morphisms(source: &Arc<FiniteField>, target: &Arc<FiniteField>) -> Vec<FieldMorphism> {
    if source.characteristic() != target.characteristic()
        || !target.degree().is_multiple_of(source.degree())
    {
        return Vec::new();
    }
    let (p, k) = (source.characteristic(), source.degree());
    let modulus = source.modulus();
    let eval = |r: Elem, coeffs: &[u32]| {
        coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| target.add(target.mul(acc, r), c))
    };
    // A prime field has a single candidate: the inclusion of the prime subfield.
    let roots: Vec<Elem> = if k == 1 {
        vec![0]
    } else {
        target
            .elements()
            .filter(|&r| eval(r, modulus) == 0)
            .collect()
    };
    let mut tables: Vec<Vec<Elem>> = roots
        .into_iter()
        .map(|r| {
            source
                .elements()
                .map(|a| if k == 1 { a } else { eval(r, &digits(a, p, k)) })
                .collect()
        })
        .filter(|t: &Vec<Elem>| is_ring_morphism(source, target, t))
        .collect();
    tables.sort();
    tables.dedup();
    let Some(first) = tables.first().cloned() else {
        return Vec::new();
    };
    tables
        .into_iter()
        .map(|table| {
            let frobenius_power = (0..k)
                .find(|&i| {
                    first
                        .iter()
                        .zip(&table)
                        .all(|(&e, &t)| target.pow(e, (p as u64).pow(i)) == t)
                })
                .expect("field morphisms are Frobenius twists of one embedding");
            FieldMorphism {
                source: source.clone(),
                target: target.clone(),
                table,
                frobenius_power,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_fields_and_extensions() {
        let f2 = FiniteField::new(2, 1).unwrap();
        assert_eq!(f2.order(), 2);
        let f9 = FiniteField::new(3, 2).unwrap();
        assert_eq!((f9.order(), f9.characteristic()), (9, 3));
        // x^2 + 1 is the first irreducible quadratic over GF(3).
        assert_eq!(f9.modulus(), &[1, 0, 1]);
        let f8 = FiniteField::new(2, 3).unwrap();
        assert_eq!(f8.modulus(), &[1, 1, 0, 1]);
    }

    #[test]
    fn rejects_non_prime_and_oversized() {
        assert_eq!(FiniteField::new(6, 1).unwrap_err(), Error::NotPrimePower(6));
        assert!(matches!(
            FiniteField::new(2, 14),
            Err(Error::BoundExceeded { order: 16384, .. })
        ));
        assert_eq!(parse_order("3^2").unwrap(), (3, 2));
        assert_eq!(parse_order("9").unwrap(), (3, 2));
        assert_eq!(parse_order("6").unwrap_err(), Error::NotPrimePower(6));
    }

    #[test]
    fn field_axioms_exhaustive_small_orders() {
        for (p, k) in [
            (2, 1),
            (3, 1),
            (2, 2),
            (5, 1),
            (7, 1),
            (2, 3),
            (3, 2),
            (2, 4),
            (5, 2),
            (7, 2),
        ] {
            let f = FiniteField::new(p, k).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                assert_eq!(f.frobenius(a), f.mul_slow(a, f.pow(a, p as u64 - 1)));
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul_slow(a, b));
                    for c in f.elements() {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
            // Frobenius is a bijection.
            let mut img: Vec<_> = f.elements().map(|a| f.frobenius(a)).collect();
            img.sort();
            assert_eq!(img, f.elements().collect::<Vec<_>>());
        }
    }

    #[test]
    fn morphism_across_characteristics_is_empty() {
        let f3 = FiniteField::new(3, 1).unwrap();
        let f7 = FiniteField::new(7, 1).unwrap();
        assert!(field_morphisms(&f3, &f7).is_empty());
        let f4 = FiniteField::new(2, 2).unwrap();
        let f8 = FiniteField::new(2, 3).unwrap();
        assert!(field_morphisms(&f4, &f8).is_empty());
    }

    #[test]
    fn prime_field_has_only_identity() {
        for p in [2, 3, 5, 7, 11] {
            let f = FiniteField::new(p, 1).unwrap();
            let ms = field_morphisms(&f, &f);
            assert_eq!(ms.len(), 1);
            assert!(ms[0].is_identity());
        }
    }

    #[test]
    fn frobenius_labels() {
        let f4 = FiniteField::new(2, 2).unwrap();
        let ms = field_morphisms(&f4, &f4);
        assert_eq!(ms.len(), 2);
        assert!(ms[0].is_identity());
        assert_eq!(ms[1].frobenius_power(), 1);
        assert_eq!(ms[1].label(), "frobenius^1");
        for a in f4.elements() {
            assert_eq!(ms[1].apply(a), f4.frobenius(a));
        }
    }
}
