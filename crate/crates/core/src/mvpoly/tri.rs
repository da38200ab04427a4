use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::gf2m::{FieldElement, FieldSpec};

use super::{MvError, UniPoly};

/// Number of variables: x0, x1, x2 and the homogenizing z.
pub const NVARS: usize = 4;
pub const X0: usize = 0;
pub const X1: usize = 1;
pub const X2: usize = 2;
pub const Z: usize = 3;

/// Exponent vector ordered graded-lexicographically with x0 > x1 > x2 > z.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub [u32; NVARS]);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn var(v: usize) -> Self {
        let mut e = [0; NVARS];
        e[v] = 1;
        Monomial(e)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0) {
            *a += b;
        }
        Monomial(e)
    }

    pub fn divides(&self, other: &Self) -> bool {
        self.0.iter().zip(other.0).all(|(a, b)| *a <= b)
    }

    pub fn div(&self, other: &Self) -> Self {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0) {
            *a -= b;
        }
        Monomial(e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Sparse polynomial in x0, x1, x2 (and z once homogenized) over F_{2^k}.
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct TriPoly {
    field: FieldSpec,
    terms: BTreeMap<Monomial, u32>,
}

impl fmt::Debug for TriPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::text::format_tripoly(self))
    }
}

impl fmt::Display for TriPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::text::format_tripoly(self))
    }
}

impl TriPoly {
    pub fn zero(field: &FieldSpec) -> Self {
        TriPoly { field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(field: &FieldSpec, c: u32) -> Self {
        Self::term(field, c, Monomial::default())
    }

    pub fn one(field: &FieldSpec) -> Self {
        Self::constant(field, 1)
    }

    pub fn var(field: &FieldSpec, v: usize) -> Self {
        Self::term(field, 1, Monomial::var(v))
    }

    pub fn term(field: &FieldSpec, c: u32, m: Monomial) -> Self {
        let mut p = Self::zero(field);
        p.add_term(m, c);
        p
    }

    /// Builds from (exponents, coefficient) pairs, merging duplicates.
    pub fn from_terms(field: &FieldSpec, terms: impl IntoIterator<Item = ([u32; NVARS], u32)>) -> Self {
        let mut p = Self::zero(field);
        for (e, c) in terms {
            p.add_term(Monomial(e), c);
        }
        p
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &u32)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> u32 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    /// Adds c * m in place.
    pub fn add_term(&mut self, m: Monomial, c: u32) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry(m).or_insert(0);
        *e ^= c;
        if *e == 0 {
            self.terms.remove(&m);
        }
    }

    pub fn leading(&self) -> Option<(Monomial, u32)> {
        self.terms.iter().next_back().map(|(m, c)| (*m, *c))
    }

    /// Total degree; `None` for zero.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, v: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[v]).max()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// Indices of variables that occur with positive exponent.
    pub fn used_vars(&self) -> Vec<usize> {
        (0..NVARS).filter(|&v| self.terms.keys().any(|m| m.0[v] > 0)).collect()
    }

    fn check_field(&self, other: &Self) -> Result<(), MvError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(MvError::FieldMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, MvError> {
        self.check_field(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, *c);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MvError> {
        self.check_field(other)?;
        let f = &self.field;
        let mut out = Self::zero(f);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), f.mul(*ca, *cb));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: u32) -> Self {
        let f = &self.field;
        let mut out = Self::zero(f);
        for (m, a) in &self.terms {
            out.add_term(*m, f.mul(*a, c));
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial, c: u32) -> Self {
        let f = &self.field;
        let mut out = Self::zero(f);
        for (mm, a) in &self.terms {
            out.add_term(mm.mul(m), f.mul(*a, c));
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::one(&self.field);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same field");
            }
            base = base.mul(&base).expect("same field");
            e >>= 1;
        }
        acc
    }

    /// Scales so the grlex-leading coefficient is 1.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(self.field.inv(c).expect("nonzero")),
        }
    }

    /// Evaluates at a point given by raw field values (x0, x1, x2, z).
    pub fn eval_raw(&self, point: &[u32; NVARS]) -> u32 {
        let f = &self.field;
        let mut acc = 0;
        for (m, c) in &self.terms {
            let mut t = *c;
            for (&e, &x) in m.0.iter().zip(point) {
                if e > 0 {
                    t = f.mul(t, f.pow(x, e as u64));
                }
            }
            acc ^= t;
        }
        acc
    }

    /// `tp_eval`: substitutes (x0, x1, x2) and reduces in the field.
    pub fn eval(&self, point: &[FieldElement; 3]) -> Result<FieldElement, MvError> {
        if point.iter().any(|p| p.field() != &self.field) {
            return Err(MvError::FieldMismatch);
        }
        let v = self.eval_raw(&[point[0].value(), point[1].value(), point[2].value(), 1]);
        Ok(self.field.element(v as u64).expect("reduced value"))
    }

    /// Replaces variable `v` by the polynomial `by`.
    pub fn substitute(&self, v: usize, by: &TriPoly) -> Result<Self, MvError> {
        self.check_field(by)?;
        let f = &self.field;
        let maxe = self.degree_in(v).unwrap_or(0) as usize;
        let mut powers = vec![Self::one(f)];
        for i in 1..=maxe {
            let next = powers[i - 1].mul(by)?;
            powers.push(next);
        }
        let mut out = Self::zero(f);
        for (m, c) in &self.terms {
            let mut rest = *m;
            let e = rest.0[v] as usize;
            rest.0[v] = 0;
            for (pm, pc) in &powers[e].terms {
                out.add_term(rest.mul(pm), f.mul(*c, *pc));
            }
        }
        Ok(out)
    }

    /// Replaces variable `v` by the constant `a`.
    pub fn substitute_value(&self, v: usize, a: u32) -> Self {
        let f = &self.field;
        let mut out = Self::zero(f);
        for (m, c) in &self.terms {
            let mut rest = *m;
            let e = rest.0[v];
            rest.0[v] = 0;
            out.add_term(rest, f.mul(*c, f.pow(a, e as u64)));
        }
        out
    }

    /// Renames variables: variable i becomes `perm[i]`.
    pub fn permute(&self, perm: [usize; NVARS]) -> Self {
        let mut out = Self::zero(&self.field);
        for (m, c) in &self.terms {
            let mut e = [0; NVARS];
            for v in 0..NVARS {
                e[perm[v]] += m.0[v];
            }
            out.add_term(Monomial(e), *c);
        }
        out
    }

    /// `tp_partial`: formal derivative in characteristic 2.
    pub fn partial(&self, v: usize) -> Self {
        let mut out = Self::zero(&self.field);
        for (m, c) in &self.terms {
            if m.0[v] % 2 == 1 {
                let mut e = *m;
                e.0[v] -= 1;
                out.add_term(e, *c);
            }
        }
        out
    }

    /// `tp_homogeneous_component`: terms of total degree exactly `deg`.
    pub fn homogeneous_component(&self, deg: u32) -> Self {
        let mut out = Self::zero(&self.field);
        for (m, c) in &self.terms {
            if m.degree() == deg {
                out.add_term(*m, *c);
            }
        }
        out
    }

    /// `tp_homogenize`: pads every term with z up to `target_deg`.
    pub fn homogenize(&self, target_deg: u32) -> Result<Self, MvError> {
        let have = self.total_degree().unwrap_or(0);
        if have > target_deg {
            return Err(MvError::DegreeTooSmall { target: target_deg, degree: have });
        }
        let mut out = Self::zero(&self.field);
        for (m, c) in &self.terms {
            let mut e = *m;
            e.0[Z] += target_deg - m.degree();
            out.add_term(e, *c);
        }
        Ok(out)
    }

    /// Sets variable `v` to 1 in a homogeneous form.
    pub fn dehomogenize(&self, v: usize) -> Self {
        self.substitute_value(v, 1)
    }

    /// Homogenizes into variable `v` (which must be absent) to the total degree.
    pub fn homogenize_with(&self, v: usize) -> Self {
        let d = self.total_degree().unwrap_or(0);
        let mut out = Self::zero(&self.field);
        for (m, c) in &self.terms {
            let mut e = *m;
            e.0[v] += d - m.degree();
            out.add_term(e, *c);
        }
        out
    }

    /// Largest power of variable `v` dividing every term.
    pub fn var_valuation(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.0[v]).min().unwrap_or(0)
    }

    /// `tp_exact_divide`: multivariate division in grlex order; fails with the
    /// remainder unless the division is exact.
    pub fn exact_divide(&self, den: &TriPoly) -> Result<TriPoly, MvError> {
        self.check_field(den)?;
        let (lm, lc) = den.leading().ok_or(MvError::DivisionByZero)?;
        let f = &self.field;
        let inv = f.inv(lc).expect("nonzero lead");
        let mut rem = self.clone();
        let mut quot = TriPoly::zero(f);
        let mut leftover = TriPoly::zero(f);
        while let Some((m, c)) = rem.leading() {
            if lm.divides(&m) {
                let qm = m.div(&lm);
                let qc = f.mul(c, inv);
                quot.add_term(qm, qc);
                for (dm, dc) in &den.terms {
                    rem.add_term(dm.mul(&qm), f.mul(qc, *dc));
                }
            } else {
                rem.terms.remove(&m);
                leftover.add_term(m, c);
            }
        }
        if leftover.is_zero() {
            Ok(quot)
        } else {
            Err(MvError::NotDivisible { remainder: Box::new(leftover) })
        }
    }

    /// Exact quotient if `den` divides `self`, stopping at the first
    /// non-divisible leading term.
    pub fn try_divide(&self, den: &TriPoly) -> Option<TriPoly> {
        let (lm, lc) = den.leading()?;
        let f = &self.field;
        let inv = f.inv(lc).expect("nonzero lead");
        let mut rem = self.clone();
        let mut quot = TriPoly::zero(f);
        while let Some((m, c)) = rem.leading() {
            if !lm.divides(&m) {
                return None;
            }
            let qm = m.div(&lm);
            let qc = f.mul(c, inv);
            quot.add_term(qm, qc);
            for (dm, dc) in &den.terms {
                rem.add_term(dm.mul(&qm), f.mul(qc, *dc));
            }
        }
        Some(quot)
    }

    /// Coefficient images in another field.
    pub fn map_coeffs(&self, field: &FieldSpec, map: impl Fn(u32) -> u32) -> Self {
        let mut out = Self::zero(field);
        for (m, c) in &self.terms {
            out.add_term(*m, map(*c));
        }
        out
    }

    /// Squares every coefficient.
    pub fn frobenius_coeffs(&self) -> Self {
        let f = self.field.clone();
        self.map_coeffs(&f, |c| f.square(c))
    }

    /// Restricts to a single variable `v`, all others must be absent.
    pub fn to_uni(&self, v: usize) -> Option<UniPoly> {
        let mut coeffs = vec![0u32; self.degree_in(v).unwrap_or(0) as usize + 1];
        for (m, c) in &self.terms {
            if (0..NVARS).any(|w| w != v && m.0[w] > 0) {
                return None;
            }
            coeffs[m.0[v] as usize] ^= c;
        }
        Some(UniPoly::new(&self.field, coeffs))
    }

    pub fn from_uni(p: &UniPoly, v: usize) -> Self {
        let mut out = Self::zero(p.field());
        for (i, &c) in p.coeffs().iter().enumerate() {
            out.add_term(Monomial::var(v).pow(i as u32), c);
        }
        out
    }
}

impl Monomial {
    fn pow(&self, e: u32) -> Self {
        let mut out = *self;
        for x in out.0.iter_mut() {
            *x *= e;
        }
        out
    }
}
