//! Criteria for absolute irreducibility and smoothness of the curve at
//! infinity and of plane sections of the surface, plus the arithmetic
//! criteria for binomials x^d + a x^r.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funcrep::PolyFunc;
use crate::gf2m::{prime_factors, FieldError, FieldSpec};
use crate::mvpoly::text::format_tripoly;
use crate::mvpoly::{bi_factor, bi_gcd, bi_squarefree, uni_factor, BiPoly, Embedding, MvError, TriPoly, UniPoly};
use crate::mvpoly::{X0, X1, X2};
use crate::sigma::{build_sigma, infinity_curve, section_xa, voloch_curve, SigmaError};

/// Default degree cap for the curve algorithms.
pub const CURVE_DEGREE_CAP: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("curve degree {degree} exceeds the cap {cap}")]
    DegreeCapExceeded { degree: u32, cap: u32 },
    #[error("extension field F_2^{0} needed, beyond the 32-bit limit")]
    ExtensionTooLarge(u32),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("singular locus is not finite: {0}")]
    NonIsolated(String),
    #[error(transparent)]
    Poly(#[from] MvError),
    #[error(transparent)]
    Sigma(#[from] SigmaError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Established,
    Unknown,
    Refuted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub status: Status,
    pub rule: String,
    /// a factor or singular point, in the mvpoly text format
    pub witness: Option<String>,
    /// extension degree of F_2 over which the witness is written
    pub field_degree: Option<u32>,
    pub notes: Vec<String>,
}

impl CriterionVerdict {
    fn new(status: Status, rule: &str) -> Self {
        CriterionVerdict { status, rule: rule.to_string(), witness: None, field_degree: None, notes: Vec::new() }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn is_established(&self) -> bool {
        self.status == Status::Established
    }
}

fn require_degree(d: u64) -> Result<(), GeomError> {
    if d < 5 {
        return Err(GeomError::Precondition(format!("d = {d} must be at least 5")));
    }
    Ok(())
}

/// Irreducibility of X_infinity from the residue of d: d = 3 (mod 4), or
/// d = 5 (mod 8) with d > 13.
pub fn jmw_irreducible(d: u64) -> Result<CriterionVerdict, GeomError> {
    require_degree(d)?;
    const RULE: &str = "curve at infinity absolutely irreducible for d = 3 mod 4, or d = 5 mod 8 and d > 13";
    let v = if d % 4 == 3 {
        CriterionVerdict::new(Status::Established, RULE).with_note("d = 3 mod 4")
    } else if d % 8 == 5 && d > 13 {
        CriterionVerdict::new(Status::Established, RULE).with_note("d = 5 mod 8 and d > 13")
    } else {
        CriterionVerdict::new(Status::Unknown, RULE)
    };
    Ok(v)
}

fn is_prime(n: u64) -> bool {
    n >= 2 && prime_factors(n) == [n]
}

/// Multiplicative order of 2 modulo odd l > 1.
fn order_of_two(l: u64) -> u64 {
    let mut x = 2 % l;
    let mut k = 1;
    while x != 1 {
        x = x * 2 % l;
        k += 1;
    }
    k
}

/// Smoothness of X_infinity for d = 2l + 1 with l odd and either
/// 2^r = -1 (mod l) for some r, or l a prime > 17 with ord_l(2) = (l-1)/2.
pub fn jw_smooth(d: u64) -> Result<CriterionVerdict, GeomError> {
    require_degree(d)?;
    const RULE: &str = "curve at infinity smooth for d = 2l + 1 with l odd and 2^r = -1 mod l, or l prime > 17 with ord_l(2) = (l-1)/2";
    if d.is_multiple_of(2) || ((d - 1) / 2).is_multiple_of(2) {
        return Ok(CriterionVerdict::new(Status::Unknown, RULE).with_note("d - 1 is not twice an odd number"));
    }
    let l = (d - 1) / 2;
    let ord = order_of_two(l);
    // 2^r = -1 has a solution iff it does for some r < ord
    let mut x = 1u64;
    let mut minus_one = None;
    for r in 1..=ord {
        x = x * 2 % l;
        if x == l - 1 {
            minus_one = Some(r);
            break;
        }
    }
    if let Some(r) = minus_one {
        return Ok(CriterionVerdict::new(Status::Established, RULE).with_note(format!("l = {l}, 2^{r} = -1 mod l")));
    }
    if is_prime(l) && l > 17 && ord == (l - 1) / 2 {
        return Ok(CriterionVerdict::new(Status::Established, RULE)
            .with_note(format!("l = {l} prime, ord_l(2) = (l - 1)/2")));
    }
    Ok(CriterionVerdict::new(Status::Unknown, RULE).with_note(format!("l = {l}, ord_l(2) = {ord}")))
}

/// A curve given by a homogeneous polynomial in x0, x1, x2.
fn check_curve(c: &TriPoly, cap: u32) -> Result<u32, GeomError> {
    if !c.is_homogeneous() || c.degree_in(crate::mvpoly::Z).unwrap_or(0) > 0 {
        return Err(GeomError::Precondition("expected a homogeneous polynomial in x0, x1, x2".into()));
    }
    let degree = c.total_degree().unwrap_or(0);
    if degree > cap {
        return Err(GeomError::DegreeCapExceeded { degree, cap });
    }
    Ok(degree)
}

fn extension(base: &FieldSpec, t: u32) -> Result<(FieldSpec, Embedding), GeomError> {
    let m = base.m() * t;
    if m > 32 {
        return Err(GeomError::ExtensionTooLarge(m));
    }
    let big = FieldSpec::with_degree(m)?;
    let emb = Embedding::new(base, &big)?;
    Ok((big, emb))
}

/// Factors the homogeneous curve `c` over the degree-t extension of its
/// coefficient field. Factors are homogeneous and monic.
pub fn factor_over_extension(c: &TriPoly, t: u32) -> Result<(FieldSpec, Vec<(TriPoly, u32)>), GeomError> {
    let (big, emb) = extension(c.field(), t)?;
    let mapped = c.map_coeffs(&big, |x| emb.apply(x));
    let mut out = Vec::new();
    let k = mapped.var_valuation(X2);
    if k > 0 {
        out.push((TriPoly::var(&big, X2), k));
    }
    let deh = mapped.dehomogenize(X2);
    if !deh.is_constant() {
        for (g, e) in bi_factor(&deh)? {
            out.push((g.homogenize_with(X2), e));
        }
    }
    Ok((big, out))
}

fn rad(n: u32) -> u32 {
    prime_factors(n as u64).iter().product::<u64>() as u32
}

enum Sweep {
    Irreducible,
    Factors(FieldSpec, Vec<(TriPoly, u32)>),
    Skipped(String),
}

/// `absolutely_irreducible`: factors the curve over F_{Q^t} (Q the
/// coefficient field) for t = 1, each prime t dividing the degree D, and a
/// final t divisible by every prime factor of D. A curve irreducible over
/// F_Q but not absolutely irreducible splits into k conjugate components
/// (k | D, k > 1), and over F_{Q^s} into gcd(k, s) factors, so the final
/// extension detects every such splitting.
pub fn absolutely_irreducible(c: &TriPoly, cap: u32) -> Result<CriterionVerdict, GeomError> {
    const RULE: &str = "factorization over finite extensions";
    let degree = check_curve(c, cap)?;
    if degree == 0 {
        let mut v = CriterionVerdict::new(Status::Refuted, RULE).with_note("constant polynomial: no curve");
        v.witness = Some(format_tripoly(c));
        v.field_degree = Some(c.field().m());
        return Ok(v);
    }
    let k0 = c.field().m();
    let r = rad(degree).max(1);
    let mut s = r;
    while (1u64 << (k0 * s).min(63)) <= 2 * (degree as u64).pow(2) && k0 * (s + r) <= 32 {
        s += r;
    }
    let mut ts: Vec<u32> = vec![1];
    ts.extend(prime_factors(degree as u64).into_iter().map(|p| p as u32));
    ts.push(s);
    ts.sort_unstable();
    ts.dedup();
    let results: Vec<(u32, Sweep)> = ts
        .par_iter()
        .map(|&t| {
            let sweep = match factor_over_extension(c, t) {
                Ok((big, fs)) => {
                    if fs.len() == 1 && fs[0].1 == 1 {
                        Sweep::Irreducible
                    } else {
                        Sweep::Factors(big, fs)
                    }
                }
                Err(e) => Sweep::Skipped(e.to_string()),
            };
            (t, sweep)
        })
        .collect();
    let mut notes = Vec::new();
    let mut complete = false;
    for (t, sweep) in &results {
        match sweep {
            Sweep::Factors(big, fs) => {
                let mut v = CriterionVerdict::new(Status::Refuted, RULE);
                v.witness = Some(format_tripoly(&fs[0].0));
                v.field_degree = Some(big.m());
                v.notes = notes;
                v.notes.push(format!("{} irreducible factors over F_2^{}", fs.len(), big.m()));
                return Ok(v);
            }
            Sweep::Irreducible => {
                notes.push(format!("irreducible over F_2^{}", k0 * t));
                if t % r == 0 {
                    complete = true;
                }
            }
            Sweep::Skipped(why) => notes.push(format!("F_2^{} skipped: {why}", k0 * t)),
        }
    }
    let mut v = CriterionVerdict::new(if complete { Status::Established } else { Status::Unknown }, RULE);
    v.notes = notes;
    Ok(v)
}

/// A projective point with coordinates in F_2^field_degree (default
/// modulus), normalized so the leftmost nonzero coordinate is 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjPoint {
    pub field_degree: u32,
    pub coords: [u32; 3],
}

impl std::fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [a, b, c] = self.coords;
        write!(f, "({a:#x} : {b:#x} : {c:#x}) over F_2^{}", self.field_degree)
    }
}

fn poly_on(p: &TriPoly, emb: &Embedding) -> TriPoly {
    p.map_coeffs(emb.target(), |x| emb.apply(x))
}

/// Gcd of the nonzero polynomials; `None` when all are zero.
fn common_gcd(polys: &[UniPoly]) -> Option<UniPoly> {
    let nz: Vec<&UniPoly> = polys.iter().filter(|p| !p.is_zero()).collect();
    if nz.is_empty() {
        return None;
    }
    Some(nz.iter().fold(UniPoly::zero(nz[0].field()), |g, p| g.gcd(p)))
}

/// Roots of `p` (over field K) in extensions: (field, roots) per irreducible
/// factor.
fn roots_in_extensions(p: &UniPoly) -> Result<Vec<(Embedding, Vec<u32>)>, GeomError> {
    let mut out = Vec::new();
    if p.is_constant() {
        return Ok(out);
    }
    for (h, _) in uni_factor(p).factors {
        let e = h.degree().expect("nonconstant") as u32;
        let (big, emb) = extension(p.field(), e)?;
        let hm = h.map_coeffs(&big, |x| emb.apply(x));
        let roots = uni_factor(&hm).roots();
        out.push((emb, roots));
    }
    Ok(out)
}

fn compose(a: &Embedding, b: &Embedding) -> Result<Embedding, GeomError> {
    Ok(Embedding::new(a.source(), b.target())?)
}

/// Singular points of the projective curve c = 0 over the algebraic
/// closure, found chart by chart: (1 : u : v), (0 : 1 : v), (0 : 0 : 1).
pub fn curve_singular_points(c: &TriPoly) -> Result<Vec<ProjPoint>, GeomError> {
    check_curve(c, CURVE_DEGREE_CAP)?;
    let base = c.field().clone();
    let partials: Vec<TriPoly> = [X0, X1, X2].iter().map(|&v| c.partial(v)).collect();
    let mut points = Vec::new();

    // chart (1 : u : v), u = x1, v = x2
    let g = c.substitute_value(X0, 1);
    let (gu, gv) = (g.partial(X1), g.partial(X2));
    let (pvar, evar) = if g.degree_in(X2).unwrap_or(0) > 0 { (X1, X2) } else { (X2, X1) };
    let system: Vec<TriPoly> = [g.clone(), gu, gv].into_iter().filter(|p| !p.is_zero()).collect();
    if !g.is_constant() {
        if system.len() == 1 {
            return Err(GeomError::NonIsolated("the curve is a square".into()));
        }
        let h = system.iter().skip(1).try_fold(system[0].clone(), |acc, p| bi_gcd(&acc, p))?;
        if !h.is_constant() {
            return Err(GeomError::NonIsolated(format!("common component {}", format_tripoly(&h))));
        }
        let bis: Vec<BiPoly> = system.iter().map(|p| BiPoly::from_tri(p, pvar, evar)).collect::<Result<_, _>>()?;
        let mut r = UniPoly::zero(&base);
        'pairs: for i in 0..bis.len() {
            for j in i + 1..bis.len() {
                let res = bis[i].resultant_outer(&bis[j]);
                if !res.is_zero() {
                    r = r.gcd(&res);
                    if r.is_one() {
                        break 'pairs;
                    }
                }
            }
        }
        if r.is_zero() {
            // every pair shares a component; combine the partials
            let comb = bis[1].add(&bis[bis.len() - 1].scale_inner(&UniPoly::constant(&base, 1)));
            r = bis[0].resultant_outer(&comb);
            if r.is_zero() {
                return Err(GeomError::NonIsolated("elimination degenerated".into()));
            }
        }
        for (emb_u, roots) in roots_in_extensions(&r)? {
            let big = emb_u.target().clone();
            let sys_big: Vec<TriPoly> = system.iter().map(|p| poly_on(p, &emb_u)).collect();
            for rho in roots {
                let specs: Vec<UniPoly> =
                    sys_big.iter().map(|p| p.substitute_value(pvar, rho).to_uni(evar).expect("one variable")).collect();
                let Some(gg) = common_gcd(&specs) else {
                    return Err(GeomError::NonIsolated(format!("line through u = {rho:#x} over F_2^{}", big.m())));
                };
                for (emb_v, vroots) in roots_in_extensions(&gg)? {
                    let total = compose(&emb_u, &emb_v)?;
                    let rho_v = emb_v.apply(rho);
                    for v in vroots {
                        let (u, vv) = if pvar == X1 { (rho_v, v) } else { (v, rho_v) };
                        points.push(ProjPoint { field_degree: total.target().m(), coords: [1, u, vv] });
                    }
                }
            }
        }
    }

    // chart (0 : 1 : v)
    let line = |p: &TriPoly| p.substitute_value(X0, 0).substitute_value(X1, 1).to_uni(X2).expect("x2 only");
    let mut on_line = vec![line(c)];
    on_line.extend(partials.iter().map(line));
    match common_gcd(&on_line) {
        None => return Err(GeomError::NonIsolated("the line x0 = 0 is singular".into())),
        Some(gg) => {
            for (emb, vroots) in roots_in_extensions(&gg)? {
                for v in vroots {
                    points.push(ProjPoint { field_degree: emb.target().m(), coords: [0, 1, v] });
                }
            }
        }
    }

    // chart (0 : 0 : 1)
    let pt = [0, 0, 1, 0];
    if c.eval_raw(&pt) == 0 && partials.iter().all(|p| p.eval_raw(&pt) == 0) {
        points.push(ProjPoint { field_degree: base.m(), coords: [0, 0, 1] });
    }

    for p in &points {
        debug_assert!(is_singular_at(c, p));
    }
    Ok(points)
}

/// Checks c and its partials vanish at the point (coefficients embedded).
pub fn is_singular_at(c: &TriPoly, p: &ProjPoint) -> bool {
    let Ok(big) = FieldSpec::with_degree(p.field_degree) else { return false };
    let Ok(emb) = Embedding::new(c.field(), &big) else { return false };
    let pt = [p.coords[0], p.coords[1], p.coords[2], 0];
    std::iter::once(c.clone())
        .chain([X0, X1, X2].iter().map(|&v| c.partial(v)))
        .all(|q| poly_on(&q, &emb).eval_raw(&pt) == 0)
}

/// Gcd of two homogeneous polynomials through the chart x2 = 1.
fn homogeneous_gcd(a: &TriPoly, b: &TriPoly) -> Result<TriPoly, GeomError> {
    let k = a.var_valuation(X2).min(b.var_valuation(X2));
    let g = bi_gcd(&a.dehomogenize(X2), &b.dehomogenize(X2))?;
    Ok(g.homogenize_with(X2).mul(&TriPoly::var(a.field(), X2).pow(k))?)
}

fn homogeneous_squarefree(a: &TriPoly) -> Result<bool, GeomError> {
    if a.is_constant() {
        return Ok(true);
    }
    Ok(a.var_valuation(X2) <= 1 && bi_squarefree(&a.dehomogenize(X2))?)
}

/// Conditions under which x^d + a x^r has an absolutely irreducible surface
/// for every a != 0: gcd(phi_d, phi_r) = 1, and either phi_d squarefree with
/// r >= 5 or phi_r squarefree. A constant phi_r (r = 3) does not count as
/// a product of distinct factors.
pub fn binomial_criterion(d: u64, r: u64) -> Result<CriterionVerdict, GeomError> {
    if !(d > r && r >= 3) {
        return Err(GeomError::Precondition(format!("need d > r >= 3, got d = {d}, r = {r}")));
    }
    const RULE: &str = "binomial: coprime curves at infinity with distinct factors";
    let pd = infinity_curve(d)?;
    let pr = infinity_curve(r)?;
    let g = homogeneous_gcd(&pd, &pr)?;
    let coprime = g.is_constant();
    let d_sqf = homogeneous_squarefree(&pd)?;
    let r_sqf = !pr.is_constant() && homogeneous_squarefree(&pr)?;
    let mut v = CriterionVerdict::new(Status::Unknown, RULE)
        .with_note(format!("gcd(phi_{d}, phi_{r}) constant: {coprime}"))
        .with_note(format!("phi_{d} squarefree: {d_sqf}"))
        .with_note(format!("phi_{r} squarefree: {r_sqf}{}", if pr.is_constant() { " (constant)" } else { "" }));
    if !coprime {
        v.witness = Some(format_tripoly(&g));
        v.field_degree = Some(1);
    } else if (d_sqf && r >= 5) || r_sqf {
        v.status = Status::Established;
    }
    Ok(v)
}

fn is_power_of_two_or_one(n: u64) -> bool {
    n.is_power_of_two()
}

/// Conditions under which the curve Y_a of x^d + c x^r is absolutely
/// irreducible: d, r not both even, neither a power of 2, and gcd(d-1, r-1)
/// a power of 2 (1 included).
pub fn voloch_criterion(d: u64, r: u64) -> Result<CriterionVerdict, GeomError> {
    if !(d > r && r >= 2) {
        return Err(GeomError::Precondition(format!("need d > r >= 2, got d = {d}, r = {r}")));
    }
    const RULE: &str = "binomial: Voloch-curve irreducibility (gcd(d-1, r-1) a power of 2)";
    let g = num_integer::gcd(d - 1, r - 1);
    let both_even = d.is_multiple_of(2) && r.is_multiple_of(2);
    let pow_ok = |x: u64| !x.is_power_of_two();
    let holds = |check_r: bool| !both_even && pow_ok(d) && (!check_r || pow_ok(r)) && is_power_of_two_or_one(g);
    let status = if holds(true) { Status::Established } else { Status::Unknown };
    let mut v = CriterionVerdict::new(status, RULE).with_note(format!("gcd(d - 1, r - 1) = {g}")).with_note(
        "power-of-2 exclusion applied to both d and r (the clause is ambiguous; 1 = 2^0 counts as a power of 2)",
    );
    if holds(false) != holds(true) {
        v.notes.push(format!(
            "reading the exclusion as applying to d only would give {:?}",
            if holds(false) { Status::Established } else { Status::Unknown }
        ));
    }
    Ok(v)
}

/// Combined verdict for the surface of f: established as soon as one of the
/// curve at infinity, a section x2 = a, or the Voloch curve at a fixed a is
/// shown absolutely irreducible.
pub fn surface_irreducibility(f: &PolyFunc, cap: u32) -> Result<CriterionVerdict, GeomError> {
    const RULE: &str = "surface absolutely irreducible if a section curve is";
    let s = build_sigma(f)?;
    let mut notes = Vec::new();
    let mut found: Option<String> = None;
    if s.d >= 5 {
        let v = jmw_irreducible(s.d)?;
        if v.is_established() {
            found = Some(format!("curve at infinity: {}", v.rule));
        }
    }
    let sections = || -> Vec<(String, TriPoly)> {
        let mut out = vec![("curve at infinity".to_string(), s.at_infinity())];
        for a in s.field().elements().take(3) {
            out.push((format!("section x2 = {a:#x}"), section_xa(&s, a).homogenize_with(X2)));
        }
        if let Ok(y) = voloch_curve(f) {
            out.push(("Voloch curve at a = 1".to_string(), y.substitute_value(X2, 1).homogenize_with(X2)));
        }
        out
    };
    if found.is_none() {
        for (name, curve) in sections() {
            if curve.total_degree().unwrap_or(0) == 0 {
                continue;
            }
            match absolutely_irreducible(&curve, cap) {
                Ok(v) if v.is_established() => {
                    found = Some(name);
                    break;
                }
                Ok(v) => notes.push(format!("{name}: {:?}", v.status)),
                Err(e) => notes.push(format!("{name}: {e}")),
            }
        }
    }
    let mut v = CriterionVerdict::new(if found.is_some() { Status::Established } else { Status::Unknown }, RULE);
    if let Some(name) = found {
        v.notes.push(format!("established via {name}"));
    }
    v.notes.extend(notes);
    Ok(v)
}
