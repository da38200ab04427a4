use std::fmt;

use crate::gf2m::FieldSpec;

/// Dense univariate polynomial over F_{2^k}. Trailing zero coefficients are
/// never stored, so the zero polynomial has an empty coefficient vector.
#[derive(Clone, PartialEq, Eq)]
pub struct UniPoly {
    field: FieldSpec,
    coeffs: Vec<u32>,
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (c, i) {
                (_, 0) => write!(f, "{c:#x}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "x^{i}")?,
                (_, 1) => write!(f, "{c:#x}*x")?,
                _ => write!(f, "{c:#x}*x^{i}")?,
            }
        }
        Ok(())
    }
}

impl UniPoly {
    pub fn new(field: &FieldSpec, mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        debug_assert!(coeffs.iter().all(|&c| field.contains(c)));
        UniPoly { field: field.clone(), coeffs }
    }

    pub fn zero(field: &FieldSpec) -> Self {
        UniPoly { field: field.clone(), coeffs: Vec::new() }
    }

    pub fn one(field: &FieldSpec) -> Self {
        Self::constant(field, 1)
    }

    pub fn constant(field: &FieldSpec, c: u32) -> Self {
        Self::new(field, vec![c])
    }

    /// c * x^n
    pub fn monomial(field: &FieldSpec, c: u32, n: usize) -> Self {
        let mut coeffs = vec![0; n + 1];
        coeffs[n] = c;
        Self::new(field, coeffs)
    }

    /// The polynomial x.
    pub fn x(field: &FieldSpec) -> Self {
        Self::monomial(field, 1, 1)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn lead(&self) -> u32 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) ^ other.coeff(i)).collect();
        Self::new(&self.field, coeffs)
    }

    pub fn add_assign(&mut self, other: &Self) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), 0);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a ^= b;
        }
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.field);
        }
        let f = &self.field;
        let mut out = vec![0u32; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] ^= f.mul(a, b);
            }
        }
        Self::new(f, out)
    }

    pub fn scale(&self, c: u32) -> Self {
        let f = &self.field;
        Self::new(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// Multiply by x^n.
    pub fn shift(&self, n: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![0; n];
        coeffs.extend_from_slice(&self.coeffs);
        Self::new(&self.field, coeffs)
    }

    /// Keep terms of degree < n.
    pub fn truncate(&self, n: usize) -> Self {
        Self::new(&self.field, self.coeffs.iter().take(n).copied().collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.field.inv(self.lead()).expect("nonzero lead");
        self.scale(inv)
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let f = &self.field;
        let dd = d.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return (Self::zero(f), self.clone());
        }
        let inv = f.inv(d.lead()).expect("nonzero lead");
        let mut r = self.coeffs.clone();
        let mut q = vec![0u32; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = r[i];
            if c == 0 {
                continue;
            }
            let t = f.mul(c, inv);
            q[i - dd] = t;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                r[i - dd + j] ^= f.mul(t, dc);
            }
        }
        r.truncate(dd);
        (Self::new(f, q), Self::new(f, r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.divrem(d).1
    }

    /// Quotient when `d` divides `self` exactly.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.divrem(d);
        r.is_zero().then_some(q)
    }

    /// Monic gcd; gcd(0, 0) = 0.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Returns (g, s, t) with s*self + t*other = g, g monic.
    pub fn ext_gcd(&self, other: &Self) -> (Self, Self, Self) {
        let f = &self.field;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Self::one(f), Self::zero(f));
        let (mut t0, mut t1) = (Self::zero(f), Self::one(f));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = s0.add(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = t0.add(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = f.inv(r0.lead()).expect("nonzero lead");
        (r0.scale(inv), s0.scale(inv), t0.scale(inv))
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
            .collect();
        Self::new(&self.field, coeffs)
    }

    pub fn eval(&self, x: u32) -> u32 {
        let f = &self.field;
        self.coeffs.iter().rev().fold(0, |acc, &c| f.mul(acc, x) ^ c)
    }

    pub fn mulmod(&self, other: &Self, m: &Self) -> Self {
        self.mul(other).rem(m)
    }

    /// self^e mod m.
    pub fn powmod(&self, mut e: u128, m: &Self) -> Self {
        let mut base = self.rem(m);
        let mut acc = Self::one(&self.field).rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mulmod(&base, m);
            }
            base = base.mulmod(&base, m);
            e >>= 1;
        }
        acc
    }

    /// self^(2^k) mod m by repeated squaring.
    pub fn frobenius_pow(&self, k: u32, m: &Self) -> Self {
        let mut r = self.rem(m);
        for _ in 0..k {
            r = r.mulmod(&r, m);
        }
        r
    }

    /// Square root of a polynomial all of whose exponents are even.
    pub fn sqrt(&self) -> Option<Self> {
        if self.coeffs.iter().enumerate().any(|(i, &c)| i % 2 == 1 && c != 0) {
            return None;
        }
        let f = &self.field;
        let coeffs = self.coeffs.iter().step_by(2).map(|&c| f.sqrt(c)).collect();
        Some(Self::new(f, coeffs))
    }

    /// Compose with (x + a).
    pub fn taylor_shift(&self, a: u32) -> Self {
        if a == 0 {
            return self.clone();
        }
        let lin = Self::new(&self.field, vec![a, 1]);
        let mut acc = Self::zero(&self.field);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin);
            acc.add_assign(&Self::constant(&self.field, c));
        }
        acc
    }

    /// Re-express coefficients in another field through `map`.
    pub fn map_coeffs(&self, field: &FieldSpec, map: impl Fn(u32) -> u32) -> Self {
        Self::new(field, self.coeffs.iter().map(|&c| map(c)).collect())
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}
