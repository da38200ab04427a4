//! Point-count bounds and the exclusion inequalities they imply, decided
//! exactly with big integers, and the m_max tables derived from them.

use num_bigint::{BigInt, Sign};
use num_integer::Roots;
use serde::{Deserialize, Serialize};

/// Largest m scanned when searching for m_max.
pub const MMAX_SCAN: u32 = 200;

fn sgn(x: &BigInt) -> i32 {
    match x.sign() {
        Sign::Plus => 1,
        Sign::Minus => -1,
        Sign::NoSign => 0,
    }
}

/// Sign of P + R * sqrt(2).
fn sign_sqrt2(p: &BigInt, r: &BigInt) -> i32 {
    let (sp, sr) = (sgn(p), sgn(r));
    if sp >= 0 && sr >= 0 {
        return sp.max(sr);
    }
    if sp <= 0 && sr <= 0 {
        return -1;
    }
    // opposite signs: compare p^2 with 2 r^2
    let diff: BigInt = p * p - r * r * 2;
    sgn(&diff) * sp
}

/// Exact sign of sum_k c[k] * s^k with s = sqrt(2^m).
pub fn sign_in_sqrt_q(coeffs: &[BigInt], m: u32) -> i32 {
    let mut p = BigInt::from(0);
    let mut r = BigInt::from(0);
    for (k, c) in coeffs.iter().enumerate() {
        let k = k as u32;
        if m.is_multiple_of(2) {
            p += c << (k * m / 2);
        } else if k.is_multiple_of(2) {
            p += c << (k / 2 * m);
        } else {
            // s^k = 2^((k m - 1)/2) sqrt(2)
            r += c << ((k * m - 1) / 2);
        }
    }
    sign_sqrt2(&p, &r)
}

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

/// Which bound, and which way of stating its exclusion condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// surface absolutely irreducible
    Irreducible,
    /// surface with isolated singularities
    Isolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    /// the inequality itself, after dividing by q
    Exact,
    /// the sufficient condition polynomial in d
    Polynomial,
    /// the sufficient condition on q^(1/4)
    QuarterRoot,
}

impl Form {
    pub const ALL: [Form; 3] = [Form::Exact, Form::Polynomial, Form::QuarterRoot];

    pub fn name(self) -> &'static str {
        match self {
            Form::Exact => "exact",
            Form::Polynomial => "polynomial",
            Form::QuarterRoot => "quarter-root",
        }
    }
}

/// q - (d-4)(d-5) q^(1/2) - 18 d^4 - 4d + 13 - 3/q > 0, times q.
fn irreducible_exact(d: i64, m: u32) -> bool {
    let c = [big(-3), big(0), big(-18 * d.pow(4) - 4 * d + 13), big(-(d - 4) * (d - 5)), big(1)];
    sign_in_sqrt_q(&c, m) > 0
}

/// q^(1/2) > 13.51 - 5d + 4.773 d^2.
fn irreducible_polynomial(d: i64, m: u32) -> bool {
    let rhs = 13510 - 5000 * d + 4773 * d * d;
    // 1000 sqrt(q) - rhs > 0
    sign_in_sqrt_q(&[big(-rhs), big(1000)], m) > 0
}

/// d < 0.45 q^(1/4) + 0.5, i.e. (20d - 10)^4 < 9^4 q.
fn irreducible_quarter(d: i64, m: u32) -> bool {
    let lhs = big(20 * d - 10).pow(4);
    20 * d - 10 < 0 || lhs < (big(6561) << m)
}

/// q + (-d^2 + 9d - 20) q^(1/2) - d^3 + 13 d^2 - 61 d + 95 - 2/q > 0, times q.
fn isolated_exact(d: i64, m: u32) -> bool {
    let c = [big(-2), big(0), big(-d.pow(3) + 13 * d * d - 61 * d + 95), big(-d * d + 9 * d - 20), big(1)];
    sign_in_sqrt_q(&c, m) > 0
}

/// q > d^4 - 16 d^3 + 94 d^2 - 228 d + 173.
fn isolated_polynomial(d: i64, m: u32) -> bool {
    (big(1) << m) > big(d.pow(4) - 16 * d.pow(3) + 94 * d * d - 228 * d + 173)
}

/// d < q^(1/4) + 4.
fn isolated_quarter(d: i64, m: u32) -> bool {
    d < 4 || big(d - 4).pow(4) < (big(1) << m)
}

/// Whether the given form of the condition holds at (d, m). True means no
/// APN function of degree d (with the geometric hypothesis of `kind`)
/// exists over F_{2^m}.
pub fn excludes(kind: BoundKind, form: Form, d: u64, m: u32) -> bool {
    let d = d as i64;
    match (kind, form) {
        (BoundKind::Irreducible, Form::Exact) => irreducible_exact(d, m),
        (BoundKind::Irreducible, Form::Polynomial) => irreducible_polynomial(d, m),
        (BoundKind::Irreducible, Form::QuarterRoot) => irreducible_quarter(d, m),
        (BoundKind::Isolated, Form::Exact) => isolated_exact(d, m),
        (BoundKind::Isolated, Form::Polynomial) => isolated_polynomial(d, m),
        (BoundKind::Isolated, Form::QuarterRoot) => isolated_quarter(d, m),
    }
}

/// Largest m <= MMAX_SCAN at which the form does not exclude d.
pub fn mmax(kind: BoundKind, form: Form, d: u64) -> u32 {
    (1..=MMAX_SCAN).rev().find(|&m| !excludes(kind, form, d, m)).unwrap_or(0)
}

/// Bound magnitudes at (d, m). The floating values are for display; the
/// exclusion flags are decided exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub d: u64,
    pub m: u32,
    pub q: String,
    /// (d-4)(d-5) q^(3/2) + 18 d^4 q
    pub lw_bound: f64,
    /// (d-4)(d-5) q^(3/2) + (d^3 - 13 d^2 + 57 d - 82) q
    pub deligne_bound: f64,
    /// 4((d-3) q + 1)
    pub threshold: String,
    pub excluded_irreducible: bool,
    pub excluded_isolated: bool,
    pub form_used: Form,
}

fn report(d: u64, m: u32) -> BoundReport {
    let q = BigInt::from(1) << m;
    let qf = 2f64.powi(m as i32);
    let df = d as f64;
    let head = (df - 4.0) * (df - 5.0) * qf.powf(1.5);
    BoundReport {
        d,
        m,
        q: q.to_string(),
        lw_bound: head + 18.0 * df.powi(4) * qf,
        deligne_bound: head + (df.powi(3) - 13.0 * df * df + 57.0 * df - 82.0) * qf,
        threshold: ((BigInt::from(d) - 3i32) * &q * 4i32 + 4i32).to_string(),
        excluded_irreducible: excludes(BoundKind::Irreducible, Form::Exact, d, m),
        excluded_isolated: excludes(BoundKind::Isolated, Form::Exact, d, m),
        form_used: Form::Exact,
    }
}

/// Exclusion when the surface is absolutely irreducible (d >= 5).
pub fn irreducible_excludes(d: u64, m: u32) -> (bool, BoundReport) {
    let r = report(d, m);
    (r.excluded_irreducible, r)
}

/// Exclusion when the surface has isolated singularities (d >= 5).
pub fn isolated_excludes(d: u64, m: u32) -> (bool, BoundReport) {
    let r = report(d, m);
    (r.excluded_isolated, r)
}

/// Published (d_threshold, m_max) rows, absolutely irreducible case.
pub const REFERENCE_IRREDUCIBLE: [(u64, u32); 15] = [
    (7, 15),
    (9, 16),
    (10, 17),
    (12, 18),
    (15, 19),
    (17, 20),
    (21, 21),
    (23, 22),
    (29, 23),
    (36, 24),
    (41, 25),
    (49, 26),
    (50, 27),
    (70, 28),
    (83, 29),
];

/// Published (d_threshold, m_max) rows, isolated singularities case.
pub const REFERENCE_ISOLATED: [(u64, u32); 15] = [
    (7, 6),
    (9, 9),
    (10, 10),
    (12, 11),
    (13, 12),
    (15, 13),
    (17, 14),
    (20, 15),
    (23, 16),
    (26, 17),
    (30, 18),
    (36, 19),
    (42, 20),
    (49, 21),
    (57, 22),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MmaxRow {
    pub d_max: u64,
    /// m_max from the exact inequality
    pub m_max: u32,
    pub by_form: Vec<(Form, u32)>,
    pub reference: u32,
    /// forms reproducing the reference value
    pub matched: Vec<Form>,
    /// set when no form, or only a non-exact form, reproduces the reference
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MmaxTable {
    pub kind: BoundKind,
    pub rows: Vec<MmaxRow>,
}

impl MmaxTable {
    /// `d_max,m_max,form` lines; form is the first matching form, or
    /// "none" (with the exact value) when nothing matches.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d_max,m_max,form\n");
        for r in &self.rows {
            match r.matched.first() {
                Some(f) => out.push_str(&format!("{},{},{}\n", r.d_max, r.reference, f.name())),
                None => out.push_str(&format!("{},{},none\n", r.d_max, r.m_max)),
            }
        }
        out
    }

    pub fn mismatches(&self) -> impl Iterator<Item = &MmaxRow> {
        self.rows.iter().filter(|r| r.matched.is_empty())
    }
}

pub fn reference_rows(kind: BoundKind) -> &'static [(u64, u32)] {
    match kind {
        BoundKind::Irreducible => &REFERENCE_IRREDUCIBLE,
        BoundKind::Isolated => &REFERENCE_ISOLATED,
    }
}

pub fn mmax_table(kind: BoundKind) -> MmaxTable {
    let rows = reference_rows(kind)
        .iter()
        .map(|&(d, reference)| {
            let by_form: Vec<(Form, u32)> = Form::ALL.iter().map(|&f| (f, mmax(kind, f, d))).collect();
            let matched: Vec<Form> = by_form.iter().filter(|(_, v)| *v == reference).map(|(f, _)| *f).collect();
            let flagged = !matched.contains(&Form::Exact);
            MmaxRow { d_max: d, m_max: by_form[0].1, by_form, reference, matched, flagged }
        })
        .collect();
    MmaxTable { kind, rows }
}

/// Upper bound on the points of a plane section curve of the given degree.
pub fn serre_bound(curve_degree: u64, q: u64) -> u64 {
    curve_degree * q + 1
}

/// q + 1 - floor(2 sqrt(q)): least number of rational points of an elliptic
/// curve over F_q.
pub fn hasse_weil_min(q: u64) -> i64 {
    q as i64 + 1 - (4 * q).sqrt() as i64
}

/// q + 1 - (D-1)(D-2) sqrt(q) > 4D, decided exactly for q = 2^m. An
/// absolutely irreducible section of degree D whose points must lie on four
/// lines cannot exist once this holds.
pub fn curve_exclusion(degree: u64, m: u32) -> bool {
    let dd = degree as i64;
    let c = [big(1 - 4 * dd), big(-(dd - 1) * (dd - 2)), big(1)];
    sign_in_sqrt_q(&c, m) > 0
}

/// Smallest m at which `curve_exclusion` holds from then on.
pub fn curve_exclusion_threshold(degree: u64) -> u32 {
    (1..=MMAX_SCAN).rev().find(|&m| !curve_exclusion(degree, m)).map_or(1, |m| m + 1)
}

/// 1 + q - 2 sqrt(q) > points, decided exactly for q = 2^m.
pub fn elliptic_exceeds(points: u64, m: u32) -> bool {
    sign_in_sqrt_q(&[big(1 - points as i64), big(-2), big(1)], m) > 0
}

/// The point cap 4((d-3)q + 1) for the surface of a degree-d APN function.
pub fn surface_point_cap(d: u64, q: u64) -> u128 {
    4 * ((d as u128 - 3) * q as u128 + 1)
}
