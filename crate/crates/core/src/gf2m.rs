//! Arithmetic in the binary field F_{2^m}, 1 <= m <= 32.
//!
//! Elements are bit vectors in the polynomial basis stored in a `u32`
//! (bit i is the coefficient of x^i). Small fields (m <= 16) multiply
//! through log/antilog tables; larger fields use a carryless product
//! followed by reduction.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 32;

/// Fields up to this degree get log/antilog tables.
pub const TABLE_DEGREE: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("extension degree {0} outside 1..=32")]
    InvalidDegree(u32),
    #[error("modulus {modulus:#x} has degree {found}, expected {expected}")]
    DegreeMismatch { modulus: u64, expected: u32, found: u32 },
    #[error("modulus {0:#x} is reducible over F_2")]
    ReduciblePolynomial(u64),
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("value {value:#x} is not an element of F_2^{m}")]
    ValueOutOfRange { value: u64, m: u32 },
}

/// Carryless product of two words.
#[inline]
pub fn clmul(a: u32, b: u32) -> u64 {
    let mut acc = 0u64;
    let mut a = a as u64;
    let mut b = b;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    acc
}

#[inline]
fn poly_degree(p: u64) -> u32 {
    if p == 0 {
        0
    } else {
        63 - p.leading_zeros()
    }
}

/// Remainder of `x` modulo `modulus` (both in F_2[x]).
#[inline]
fn poly_rem(mut x: u64, modulus: u64) -> u64 {
    let dm = poly_degree(modulus);
    while x != 0 && poly_degree(x) >= dm {
        x ^= modulus << (poly_degree(x) - dm);
    }
    x
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

fn mulmod_f2(a: u64, b: u64, modulus: u64) -> u64 {
    // operands have degree < 32 here, so the product fits a u64
    poly_rem(clmul(a as u32, b as u32), modulus)
}

/// Rabin's test: `p` of degree n is irreducible over F_2 iff
/// x^(2^n) = x mod p and gcd(x^(2^(n/r)) - x, p) = 1 for each prime r | n.
pub fn is_irreducible_f2(p: u64) -> bool {
    let n = poly_degree(p);
    if p == 0 || n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    if p & 1 == 0 {
        return false;
    }
    let x = 0b10u64;
    let frob = |k: u32| -> u64 {
        let mut h = x;
        for _ in 0..k {
            h = mulmod_f2(h, h, p);
        }
        h
    };
    if frob(n) != poly_rem(x, p) {
        return false;
    }
    for r in prime_factors(n as u64) {
        let h = frob(n / r as u32);
        if poly_gcd(p, h ^ x) != 1 {
            return false;
        }
    }
    true
}

/// Distinct prime factors in ascending order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest irreducible polynomial of degree m with nonzero constant term.
pub fn default_modulus(m: u32) -> Result<u64, FieldError> {
    if m == 0 || m > MAX_DEGREE {
        return Err(FieldError::InvalidDegree(m));
    }
    let lo = 1u64 << m;
    (lo + 1..lo << 1)
        .step_by(2)
        .find(|&p| is_irreducible_f2(p))
        .ok_or(FieldError::InvalidDegree(m))
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

struct Inner {
    m: u32,
    modulus: u64,
    tables: Option<Tables>,
}

/// The field F_{2^m} with a fixed reduction polynomial. Cheap to clone.
#[derive(Clone)]
pub struct FieldSpec {
    inner: Arc<Inner>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.m == other.inner.m && self.inner.modulus == other.inner.modulus)
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}; {:#x})", self.inner.m, self.inner.modulus)
    }
}

fn field_cache() -> &'static Mutex<HashMap<(u32, u64), FieldSpec>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u64), FieldSpec>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl FieldSpec {
    /// Builds F_{2^m}. With `modulus = None` the default modulus is used.
    pub fn new(m: u32, modulus: Option<u64>) -> Result<Self, FieldError> {
        if m == 0 || m > MAX_DEGREE {
            return Err(FieldError::InvalidDegree(m));
        }
        let modulus = match modulus {
            Some(p) => {
                let found = poly_degree(p);
                if p == 0 || found != m {
                    return Err(FieldError::DegreeMismatch { modulus: p, expected: m, found });
                }
                if !is_irreducible_f2(p) {
                    return Err(FieldError::ReduciblePolynomial(p));
                }
                p
            }
            None => default_modulus(m)?,
        };
        if let Some(f) = field_cache().lock().unwrap().get(&(m, modulus)) {
            return Ok(f.clone());
        }
        let tables = (m <= TABLE_DEGREE).then(|| build_tables(m, modulus));
        let field = FieldSpec { inner: Arc::new(Inner { m, modulus, tables }) };
        field_cache().lock().unwrap().insert((m, modulus), field.clone());
        Ok(field)
    }

    /// F_{2^m} with its default modulus.
    pub fn with_degree(m: u32) -> Result<Self, FieldError> {
        Self::new(m, None)
    }

    /// The prime field F_2.
    pub fn binary() -> Self {
        Self::new(1, None).expect("F_2 is always constructible")
    }

    pub fn m(&self) -> u32 {
        self.inner.m
    }

    pub fn modulus(&self) -> u64 {
        self.inner.modulus
    }

    /// Cardinality q = 2^m.
    pub fn order(&self) -> u64 {
        1u64 << self.inner.m
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        (v as u64) < self.order()
    }

    pub fn element(&self, value: u64) -> Result<FieldElement, FieldError> {
        if value >= self.order() {
            return Err(FieldError::ValueOutOfRange { value, m: self.m() });
        }
        Ok(FieldElement { value: value as u32, field: self.clone() })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { value: 0, field: self.clone() }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement { value: 1, field: self.clone() }
    }

    /// All q elements in ascending value order.
    pub fn elements(&self) -> impl Iterator<Item = u32> {
        let q = self.order();
        (0..q).map(|v| v as u32)
    }

    /// `enumerate` as typed elements.
    pub fn enumerate(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.elements().map(move |value| FieldElement { value, field: self.clone() })
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        match &self.inner.tables {
            Some(t) => t.exp[(t.log[a as usize] + t.log[b as usize]) as usize],
            None => poly_rem(clmul(a, b), self.inner.modulus) as u32,
        }
    }

    #[inline]
    pub fn square(&self, a: u32) -> u32 {
        self.mul(a, a)
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = self.order() - 1;
        if let Some(t) = &self.inner.tables {
            let l = (t.log[a as usize] as u128 * (e % n) as u128 % n as u128) as usize;
            return t.exp[l];
        }
        let mut e = e % n;
        if e == 0 {
            return 1;
        }
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u32) -> Result<u32, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        if let Some(t) = &self.inner.tables {
            let n = (self.order() - 1) as u32;
            return Ok(t.exp[((n - t.log[a as usize]) % n) as usize]);
        }
        Ok(self.pow(a, self.order() - 2))
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Square root (inverse Frobenius): a^(2^(m-1)).
    pub fn sqrt(&self, a: u32) -> u32 {
        let mut r = a;
        for _ in 1..self.m() {
            r = self.square(r);
        }
        r
    }

    /// Absolute trace to F_2.
    pub fn trace(&self, a: u32) -> u32 {
        let mut acc = 0;
        let mut t = a;
        for _ in 0..self.m() {
            acc ^= t;
            t = self.square(t);
        }
        debug_assert!(acc <= 1);
        acc
    }

    /// Degree over F_2 of the smallest subfield containing `a`.
    pub fn element_degree(&self, a: u32) -> u32 {
        let m = self.m();
        let mut t = a;
        for k in 1..=m {
            t = self.square(t);
            if t == a && m.is_multiple_of(k) {
                return k;
            }
        }
        m
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: u32) -> Result<u64, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let n = self.order() - 1;
        let mut ord = n;
        for p in prime_factors(n) {
            while ord.is_multiple_of(p) && self.pow(a, ord / p) == 1 {
                ord /= p;
            }
        }
        Ok(ord)
    }
}

fn build_tables(m: u32, modulus: u64) -> Tables {
    let q = 1usize << m;
    let n = q - 1;
    let slow_mul = |a: u32, b: u32| poly_rem(clmul(a, b), modulus) as u32;
    // smallest element generating the multiplicative group
    let factors = prime_factors(n as u64);
    let slow_pow = |a: u32, mut e: u64| {
        let mut acc = 1u32;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = slow_mul(acc, b);
            }
            b = slow_mul(b, b);
            e >>= 1;
        }
        acc
    };
    let generator = (1..q as u32)
        .find(|&g| n == 1 || factors.iter().all(|&p| slow_pow(g, n as u64 / p) != 1))
        .expect("a finite field has a primitive element");
    let mut exp = vec![0u32; 2 * n];
    let mut log = vec![0u32; q];
    let mut x = 1u32;
    for i in 0..n {
        exp[i] = x;
        exp[i + n] = x;
        log[x as usize] = i as u32;
        x = slow_mul(x, generator);
    }
    Tables { exp, log }
}

/// An element of a specific field.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    value: u32,
    field: FieldSpec,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.value)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.value)
    }
}

impl FieldElement {
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    fn wrap(&self, value: u32) -> Self {
        FieldElement { value, field: self.field.clone() }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.wrap(self.value ^ other.value))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        Ok(self.wrap(self.field.mul(self.value, other.value)))
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        Ok(self.wrap(self.field.inv(self.value)?))
    }

    pub fn pow(&self, e: u64) -> Self {
        self.wrap(self.field.pow(self.value, e))
    }

    pub fn trace(&self) -> u32 {
        self.field.trace(self.value)
    }

    pub fn frobenius(&self) -> Self {
        self.wrap(self.field.square(self.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Multiply-then-reduce the slow way, bit by bit.
    fn schoolbook(a: u32, b: u32, modulus: u64, m: u32) -> u32 {
        let mut prod = 0u64;
        for i in 0..m {
            if (b >> i) & 1 == 1 {
                prod ^= (a as u64) << i;
            }
        }
        for i in (m..2 * m).rev() {
            if (prod >> i) & 1 == 1 {
                prod ^= modulus << (i - m);
            }
        }
        prod as u32
    }

    #[test]
    fn default_moduli() {
        assert_eq!(default_modulus(1).unwrap(), 0b11);
        assert_eq!(default_modulus(3).unwrap(), 0b1011);
        assert_eq!(default_modulus(4).unwrap(), 0b10011);
        assert_eq!(default_modulus(8).unwrap(), 0x11b);
    }

    #[test]
    fn irreducibility_by_exhaustive_division() {
        // oracle: p irreducible iff no polynomial of degree 1..=deg/2 divides it
        for p in 2u64..(1 << 9) {
            let n = poly_degree(p);
            let reducible = (2u64..(1 << (n / 2 + 1)))
                .filter(|&g| poly_degree(g) >= 1 && poly_degree(g) <= n / 2)
                .any(|g| poly_rem(p, g) == 0);
            assert_eq!(is_irreducible_f2(p), n >= 1 && !reducible, "p = {p:#b}");
        }
    }

    #[test]
    fn construction_errors() {
        assert_eq!(FieldSpec::new(4, Some(0b10100)), Err(FieldError::ReduciblePolynomial(0b10100)));
        assert!(matches!(FieldSpec::new(4, Some(0b1011)), Err(FieldError::DegreeMismatch { .. })));
        assert!(matches!(FieldSpec::new(0, None), Err(FieldError::InvalidDegree(0))));
        assert!(matches!(FieldSpec::new(33, None), Err(FieldError::InvalidDegree(33))));
    }

    #[test]
    fn small_products() {
        let f = FieldSpec::with_degree(3).unwrap();
        assert_eq!(f.mul(0b10, 0b10), 0b100);
        assert_eq!(f.mul(0b100, 0b100), 0b110);
        assert_eq!(f.inv(0b10).unwrap(), 0b101);
        assert_eq!(f.inv(1).unwrap(), 1);
        assert_eq!(f.inv(0), Err(FieldError::DivisionByZero));
        assert_eq!(f.trace(1), 1);
        assert_eq!(f.pow(0b10, 7), 1);
        assert_eq!(f.pow(5, 0), 1);
    }

    #[test]
    fn mul_matches_schoolbook_exhaustively() {
        for m in 1..=6 {
            let f = FieldSpec::with_degree(m).unwrap();
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), schoolbook(a, b, f.modulus(), m));
                }
            }
        }
    }

    #[test]
    fn frobenius_fixes_everything() {
        for m in 1..=8 {
            let f = FieldSpec::with_degree(m).unwrap();
            for a in f.elements() {
                assert_eq!(f.pow(a, f.order()), a);
                if a != 0 {
                    assert_eq!(f.inv(f.inv(a).unwrap()).unwrap(), a);
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                assert_eq!(f.sqrt(f.square(a)), a);
            }
        }
    }

    #[test]
    fn wide_fields_agree_with_schoolbook() {
        for m in [17, 23, 31, 32] {
            let f = FieldSpec::with_degree(m).unwrap();
            let mut x = 0x1234_5677u32 & ((f.order() - 1) as u32);
            for _ in 0..200 {
                let y = x.rotate_left(7) ^ 0x9e37_79b9;
                let y = y & ((f.order() - 1) as u32);
                assert_eq!(f.mul(x, y), schoolbook(x, y, f.modulus(), m));
                x = f.mul(x, y) ^ 3;
            }
            let a = 0x5u32;
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            assert_eq!(f.pow(a, f.order()), a);
        }
    }

    #[test]
    fn typed_elements_check_fields() {
        let f3 = FieldSpec::with_degree(3).unwrap();
        let f4 = FieldSpec::with_degree(4).unwrap();
        let a = f3.element(3).unwrap();
        let b = f4.element(3).unwrap();
        assert_eq!(a.mul(&b), Err(FieldError::FieldMismatch));
        assert_eq!(a.mul(&f3.one()).unwrap(), a);
        assert!(f3.element(8).is_err());
        assert_eq!(f3.enumerate().count(), 8);
    }

    #[test]
    fn distributivity_exhaustive_small() {
        let f = FieldSpec::with_degree(4).unwrap();
        for a in f.elements() {
            assert_eq!(a ^ a, 0);
            for b in f.elements() {
                for c in f.elements() {
                    assert_eq!(f.mul(a ^ b, c), f.mul(a, c) ^ f.mul(b, c));
                }
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn field_axioms(m in 1u32..=32, a: u32, b: u32, c: u32) {
            let f = FieldSpec::with_degree(m).unwrap();
            let mask = (f.order() - 1) as u32;
            let (a, b, c) = (a & mask, b & mask, c & mask);
            proptest::prop_assert_eq!(f.mul(a, b), schoolbook(a, b, f.modulus(), m));
            proptest::prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            proptest::prop_assert_eq!(f.mul(a ^ b, c), f.mul(a, c) ^ f.mul(b, c));
            if a != 0 {
                proptest::prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
            let s = f.sqrt(a);
            proptest::prop_assert_eq!(f.mul(s, s), a);
            proptest::prop_assert!(f.trace(a) <= 1);
            proptest::prop_assert_eq!(f.trace(a ^ b), f.trace(a) ^ f.trace(b));
        }
    }
}
