//! Polynomial functions F_q -> F_q, their normalization, affine equivalence
//! transforms, and the classical APN exponent families.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2m::{FieldError, FieldSpec};
use crate::mvpoly::UniPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuncError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("polynomial became zero after removing q-affine terms")]
    BecameZero,
    #[error("scalar must be nonzero")]
    ZeroScalar,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("coefficient name {0:?} has no value")]
    Unbound(String),
}

/// True iff `e` is 0 or a power of two, i.e. x^e is q-affine.
pub fn is_affine_degree(e: u64) -> bool {
    e == 0 || e.is_power_of_two()
}

/// Exponent of the function x^e on F_q, reduced into 0..q (x^q = x).
pub fn reduce_exponent(e: u64, q: u64) -> u64 {
    if e < q {
        e
    } else {
        (e - 1) % (q - 1) + 1
    }
}

/// A function F_q -> F_q as a polynomial of degree <= q - 1, stored sparsely
/// (exponent -> nonzero coefficient).
#[derive(Clone, PartialEq, Eq)]
pub struct PolyFunc {
    field: FieldSpec,
    terms: BTreeMap<u64, u32>,
}

impl fmt::Debug for PolyFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PolyFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(&e, &c)| match (c, e) {
                (_, 0) => format!("{c:#x}"),
                (1, 1) => "x".to_string(),
                (1, _) => format!("x^{e}"),
                (_, 1) => format!("{c:#x}*x"),
                _ => format!("{c:#x}*x^{e}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl PolyFunc {
    /// Sum of c * x^e; exponents are reduced modulo x^q - x and equal
    /// exponents are combined.
    pub fn new(field: &FieldSpec, terms: impl IntoIterator<Item = (u64, u32)>) -> Self {
        let mut out = PolyFunc { field: field.clone(), terms: BTreeMap::new() };
        for (e, c) in terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn zero(field: &FieldSpec) -> Self {
        Self::new(field, [])
    }

    pub fn monomial(field: &FieldSpec, e: u64) -> Self {
        Self::new(field, [(e, 1)])
    }

    fn add_term(&mut self, e: u64, c: u32) {
        debug_assert!(self.field.contains(c));
        if c == 0 {
            return;
        }
        let e = reduce_exponent(e, self.field.order());
        let slot = self.terms.entry(e).or_insert(0);
        *slot ^= c;
        if *slot == 0 {
            self.terms.remove(&e);
        }
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (u64, u32)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn coeff(&self, e: u64) -> u32 {
        self.terms.get(&e).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `None` for the zero function.
    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().next_back().copied()
    }

    pub fn leading_coeff(&self) -> u32 {
        self.terms.values().next_back().copied().unwrap_or(0)
    }

    /// No constant term and no power-of-two exponent.
    pub fn is_normalized(&self) -> bool {
        self.terms.keys().all(|&e| !is_affine_degree(e))
    }

    pub fn is_q_affine(&self) -> bool {
        self.terms.keys().all(|&e| is_affine_degree(e))
    }

    /// Removes the q-affine part. APN status is unchanged.
    pub fn normalize(&self) -> Result<Self, FuncError> {
        let terms: BTreeMap<u64, u32> =
            self.terms.iter().filter(|(&e, _)| !is_affine_degree(e)).map(|(&e, &c)| (e, c)).collect();
        if terms.is_empty() {
            return Err(FuncError::BecameZero);
        }
        Ok(PolyFunc { field: self.field.clone(), terms })
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, &c) in &other.terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn scale(&self, c: u32) -> Self {
        Self::new(&self.field, self.terms.iter().map(|(&e, &k)| (e, self.field.mul(k, c))))
    }

    pub fn eval(&self, x: u32) -> u32 {
        let f = &self.field;
        self.terms
            .iter()
            .fold(0, |acc, (&e, &c)| acc ^ if e == 0 { c } else { f.mul(c, f.pow(x, e)) })
    }

    /// Values f(0), f(1), ..., f(q - 1).
    pub fn value_table(&self) -> Vec<u32> {
        self.field.elements().map(|x| self.eval(x)).collect()
    }

    /// c * f(a*x + b), reduced as a function.
    pub fn affine_transform(&self, a: u32, b: u32, c: u32) -> Result<Self, FuncError> {
        if a == 0 || c == 0 {
            return Err(FuncError::ZeroScalar);
        }
        let f = &self.field;
        let mut out = Self::zero(f);
        for (&e, &k) in &self.terms {
            let kc = f.mul(k, c);
            // (a x + b)^e = sum over submasks s of e of a^s b^(e-s) x^s
            let mut s = e;
            loop {
                let coeff = f.mul(kc, f.mul(f.pow(a, s), f.pow(b, e - s)));
                out.add_term(s, coeff);
                if s == 0 {
                    break;
                }
                s = (s - 1) & e;
            }
        }
        Ok(out)
    }

    /// Rescales so the leading coefficient is 1 (the transform c*f(x)).
    pub fn make_monic(&self) -> Self {
        match self.field.inv(self.leading_coeff()) {
            Ok(inv) => self.scale(inv),
            Err(_) => self.clone(),
        }
    }

    /// Applies the Frobenius automorphism to every coefficient.
    pub fn frobenius_twist(&self) -> Self {
        Self::new(&self.field, self.terms.iter().map(|(&e, &c)| (e, self.field.square(c))))
    }

    /// Dense polynomial form (degree must be small enough to allocate).
    pub fn to_unipoly(&self) -> UniPoly {
        let n = self.degree().map_or(0, |d| d as usize + 1);
        let mut coeffs = vec![0u32; n];
        for (&e, &c) in &self.terms {
            coeffs[e as usize] = c;
        }
        UniPoly::new(&self.field, coeffs)
    }

    /// Parses `x^9 + a*x^6 + 0x3*x^3 + 1`, looking up named coefficients in
    /// `bindings`.
    pub fn parse(field: &FieldSpec, s: &str, bindings: &HashMap<String, u32>) -> Result<Self, FuncError> {
        let mut out = Self::zero(field);
        for t in parse_terms(s)? {
            let c = t.coefficient(field, bindings)?;
            out.add_term(t.exponent, c);
        }
        Ok(out)
    }
}

/// One term of a parsed polynomial expression: constant * names^powers * x^exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedTerm {
    pub constant: u64,
    pub names: Vec<(String, u32)>,
    pub exponent: u64,
}

impl ParsedTerm {
    pub fn coefficient(&self, field: &FieldSpec, bindings: &HashMap<String, u32>) -> Result<u32, FuncError> {
        if self.constant >= field.order() {
            return Err(FuncError::Parse(format!("constant {:#x} is outside F_2^{}", self.constant, field.m())));
        }
        let mut c = self.constant as u32;
        for (name, pw) in &self.names {
            let v = *bindings.get(name).ok_or_else(|| FuncError::Unbound(name.clone()))?;
            if !field.contains(v) {
                return Err(FuncError::Parse(format!("value of {name} is outside the field")));
            }
            c = field.mul(c, field.pow(v, *pw as u64));
        }
        Ok(c)
    }
}

fn parse_number(tok: &str) -> Option<u64> {
    if let Some(h) = tok.strip_prefix("0x").or_else(|| tok.strip_prefix("0X")) {
        u64::from_str_radix(h, 16).ok()
    } else {
        tok.parse().ok()
    }
}

/// Splits an expression in x into terms. Names are ASCII identifiers other
/// than `x`; a name or x may carry a `^n` power.
pub fn parse_terms(s: &str) -> Result<Vec<ParsedTerm>, FuncError> {
    let err = |m: String| FuncError::Parse(m);
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(err("empty expression".into()));
    }
    let mut out = Vec::new();
    for term in compact.split('+') {
        if term.is_empty() {
            return Err(err(format!("empty term in {s:?}")));
        }
        let mut t = ParsedTerm { constant: 1, names: Vec::new(), exponent: 0 };
        for factor in term.split('*') {
            let (base, pw) = match factor.split_once('^') {
                Some((b, p)) => (b, Some(p.parse::<u64>().map_err(|_| err(format!("bad exponent in {factor:?}")))?)),
                None => (factor, None),
            };
            if base.is_empty() {
                return Err(err(format!("bad factor {factor:?}")));
            }
            if base == "x" {
                t.exponent += pw.unwrap_or(1);
            } else if base.starts_with(|c: char| c.is_ascii_digit()) {
                if pw.is_some() {
                    return Err(err(format!("powers of constants are not supported: {factor:?}")));
                }
                let v = parse_number(base).ok_or_else(|| err(format!("bad number {base:?}")))?;
                if t.constant != 1 {
                    return Err(err(format!("more than one numeric constant in {term:?}")));
                }
                t.constant = v;
            } else if base.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                let pw = pw.unwrap_or(1);
                t.names.push((base.to_string(), u32::try_from(pw).map_err(|_| err("power too large".into()))?));
            } else {
                return Err(err(format!("unexpected {factor:?}")));
            }
        }
        out.push(t);
    }
    Ok(out)
}

/// The classical APN power-function families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ApnFamily {
    Gold,
    Kasami,
    Welch,
    Niho,
    Inverse,
    Dobbertin,
}

impl ApnFamily {
    pub const ALL: [ApnFamily; 6] =
        [ApnFamily::Gold, ApnFamily::Kasami, ApnFamily::Welch, ApnFamily::Niho, ApnFamily::Inverse, ApnFamily::Dobbertin];

    pub fn needs_h(self) -> bool {
        matches!(self, ApnFamily::Gold | ApnFamily::Kasami)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// The exponent d of the family at extension degree m (h for Gold/Kasami).
pub fn known_apn_exponent(family: ApnFamily, m: u32, h: Option<u32>) -> Result<u64, FuncError> {
    let bad = |msg: &str| Err(FuncError::InvalidParameters(format!("{family:?} at m = {m}: {msg}")));
    if m == 0 || m > 32 {
        return bad("m must lie in 1..=32");
    }
    let p = |k: u32| 1u64 << k;
    match family {
        ApnFamily::Gold | ApnFamily::Kasami => {
            let Some(h) = h else { return bad("h is required") };
            if h == 0 || h > 31 || gcd(h as u64, m as u64) != 1 {
                return bad("need 1 <= h < 32 and gcd(h, m) = 1");
            }
            Ok(if family == ApnFamily::Gold { p(h) + 1 } else { p(2 * h) - p(h) + 1 })
        }
        ApnFamily::Welch => {
            if m.is_multiple_of(2) {
                return bad("m must be odd");
            }
            Ok(p((m - 1) / 2) + 3)
        }
        ApnFamily::Niho => match m % 4 {
            1 => Ok(p((m - 1) / 2) + p((m - 1) / 4) - 1),
            3 => Ok(p((m - 1) / 2) + p((3 * m - 1) / 4) - 1),
            _ => bad("m must be 1 or 3 mod 4"),
        },
        ApnFamily::Inverse => {
            if m.is_multiple_of(2) {
                return bad("m must be odd");
            }
            Ok(p(m) - 2)
        }
        ApnFamily::Dobbertin => {
            if !m.is_multiple_of(5) {
                return bad("m must be divisible by 5");
            }
            let k = m / 5;
            Ok(p(4 * k) + p(3 * k) + p(2 * k) + p(k) - 1)
        }
    }
}

/// Every valid (family, h, exponent) at degree m, with h ranging over
/// 1..m for Gold and Kasami.
pub fn catalogue(m: u32) -> Vec<(ApnFamily, Option<u32>, u64)> {
    let mut out = Vec::new();
    for fam in ApnFamily::ALL {
        if fam.needs_h() {
            for h in 1..m {
                if let Ok(d) = known_apn_exponent(fam, m, Some(h)) {
                    out.push((fam, Some(h), d));
                }
            }
        } else if let Ok(d) = known_apn_exponent(fam, m, None) {
            out.push((fam, None, d));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(m: u32) -> FieldSpec {
        FieldSpec::with_degree(m).unwrap()
    }

    fn parse(f: &FieldSpec, s: &str) -> PolyFunc {
        PolyFunc::parse(f, s, &HashMap::new()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let f = field(4);
        assert_eq!(parse(&f, "x^3 + x^2 + 1").normalize().unwrap(), parse(&f, "x^3"));
        assert_eq!(parse(&f, "x^6 + x^5 + x^4").normalize().unwrap(), parse(&f, "x^6 + x^5"));
        assert_eq!(parse(&f, "x^8 + x^2 + x").normalize(), Err(FuncError::BecameZero));
    }

    #[test]
    fn q_affine_examples() {
        let f = field(3);
        assert!(parse(&f, "x^4 + x + 1").is_q_affine());
        assert!(!parse(&f, "x^3").is_q_affine());
        assert!(PolyFunc::zero(&f).is_q_affine());
    }

    #[test]
    fn exponents_reduce_as_functions() {
        let f = field(3);
        assert_eq!(PolyFunc::monomial(&f, 8), PolyFunc::monomial(&f, 1));
        assert_eq!(PolyFunc::monomial(&f, 14), PolyFunc::monomial(&f, 7));
        let g = parse(&f, "x^10 + x^3");
        for x in f.elements() {
            assert_eq!(g.eval(x), f.pow(x, 10) ^ f.pow(x, 3));
        }
    }

    #[test]
    fn catalogue_exponents() {
        assert_eq!(known_apn_exponent(ApnFamily::Gold, 5, Some(1)), Ok(3));
        assert_eq!(known_apn_exponent(ApnFamily::Welch, 5, None), Ok(7));
        assert!(known_apn_exponent(ApnFamily::Inverse, 4, None).is_err());
        assert_eq!(known_apn_exponent(ApnFamily::Kasami, 5, Some(2)), Ok(13));
        assert_eq!(known_apn_exponent(ApnFamily::Niho, 5, None), Ok(5));
        assert_eq!(known_apn_exponent(ApnFamily::Niho, 7, None), Ok(39));
        assert_eq!(known_apn_exponent(ApnFamily::Dobbertin, 5, None), Ok(29));
        assert!(known_apn_exponent(ApnFamily::Gold, 4, Some(2)).is_err());
        assert!(known_apn_exponent(ApnFamily::Niho, 4, None).is_err());
    }

    #[test]
    fn rescaling_degree_six() {
        // a^-6 f(a x) with f = x^6 + a x^5 gives x^6 + x^5
        let f = field(3);
        let a = 2;
        let mut b = HashMap::new();
        b.insert("a".to_string(), a);
        let g = PolyFunc::parse(&f, "x^6 + a*x^5", &b).unwrap();
        let c = f.inv(f.pow(a, 6)).unwrap();
        assert_eq!(g.affine_transform(a, 0, c).unwrap(), parse(&f, "x^6 + x^5"));
    }

    #[test]
    fn affine_transform_matches_pointwise() {
        let f = field(4);
        let g = parse(&f, "x^11 + 0x3*x^7 + 0x9*x^5 + x^2 + 0x4");
        for (a, b, c) in [(1, 0, 1), (3, 7, 9), (15, 1, 2)] {
            let t = g.affine_transform(a, b, c).unwrap();
            for x in f.elements() {
                assert_eq!(t.eval(x), f.mul(c, g.eval(f.mul(a, x) ^ b)));
            }
        }
        assert_eq!(g.affine_transform(0, 1, 1), Err(FuncError::ZeroScalar));
    }

    #[test]
    fn parse_errors() {
        let f = field(3);
        assert!(matches!(PolyFunc::parse(&f, "x^^", &HashMap::new()), Err(FuncError::Parse(_))));
        assert!(matches!(PolyFunc::parse(&f, "b*x^3", &HashMap::new()), Err(FuncError::Unbound(_))));
        assert!(matches!(PolyFunc::parse(&f, "0x8*x^3", &HashMap::new()), Err(FuncError::Parse(_))));
        assert!(matches!(PolyFunc::parse(&f, "x^3 + ", &HashMap::new()), Err(FuncError::Parse(_))));
    }

    #[test]
    fn display_round_trip() {
        let f = field(4);
        let g = parse(&f, "x^9 + 0x3*x^6 + 0xf*x + 0x2");
        assert_eq!(g.to_string(), "x^9 + 0x3*x^6 + 0xf*x + 0x2");
        assert_eq!(parse(&f, &g.to_string()), g);
    }
}
