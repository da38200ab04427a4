//! The surface X attached to f:
//!
//!   phi(x0, x1, x2) = [f(x0) + f(x1) + f(x2) + f(x0 + x1 + x2)]
//!                     / [(x0 + x1)(x1 + x2)(x0 + x2)],
//!
//! its plane sections, rational point counts, and two structural facts about
//! its singular locus.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::funcrep::{FuncError, PolyFunc};
use crate::gf2m::FieldSpec;
use crate::mvpoly::{BiPoly, Monomial, MvError, TriPoly, UniPoly, X0, X1, X2, Z};

/// Largest degree of f accepted by `build_sigma` (phi has O(d^3) terms).
pub const MAX_SIGMA_DEGREE: u64 = 300;

/// Default cap on m for exhaustive point scans (q^3 work).
pub const DEFAULT_SCAN_DEGREE: u32 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SigmaError {
    #[error("f is q-affine, so the quotient is zero")]
    QAffineInput,
    #[error("degree {d} is outside the supported range 3..={max}")]
    DegreeOutOfRange { d: u64, max: u64 },
    #[error("point scan over F_2^{m} exceeds the budget (m <= {cap})")]
    BudgetExceeded { m: u32, cap: u32 },
    #[error("phi(u, u, u) is not constant; affine diagonal points: {points:?}")]
    DiagonalNotConstant { points: Vec<u32> },
    #[error(transparent)]
    Poly(#[from] MvError),
}

impl From<FuncError> for SigmaError {
    fn from(e: FuncError) -> Self {
        match e {
            FuncError::BecameZero => SigmaError::QAffineInput,
            other => SigmaError::Poly(MvError::Parse(other.to_string())),
        }
    }
}

/// Terms x0^i x1^j x2^k of (x0 + x1 + x2)^e with odd multinomial
/// coefficient: i, j, k are disjoint bit masks with i | j | k = e.
fn trinomial_power(e: u64, c: u32, out: &mut TriPoly) {
    let mut i = e;
    loop {
        let rest = e ^ i;
        let mut j = rest;
        loop {
            let k = rest ^ j;
            out.add_term(Monomial([i as u32, j as u32, k as u32, 0]), c);
            if j == 0 {
                break;
            }
            j = (j - 1) & rest;
        }
        if i == 0 {
            break;
        }
        i = (i - 1) & e;
    }
}

/// f(x0) + f(x1) + f(x2) + f(x0 + x1 + x2).
pub fn numerator(f: &PolyFunc) -> TriPoly {
    let field = f.field();
    let mut out = TriPoly::zero(field);
    for (e, c) in f.terms() {
        if e == 0 {
            continue;
        }
        for v in [X0, X1, X2] {
            let mut m = [0u32; 4];
            m[v] = e as u32;
            out.add_term(Monomial(m), c);
        }
        trinomial_power(e, c, &mut out);
    }
    out
}

/// (x0 + x1)(x1 + x2)(x0 + x2).
pub fn triple_product(field: &FieldSpec) -> TriPoly {
    let l = |a: usize, b: usize| TriPoly::var(field, a).add(&TriPoly::var(field, b)).expect("same field");
    l(X0, X1).mul(&l(X1, X2)).and_then(|p| p.mul(&l(X0, X2))).expect("same field")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaSurface {
    /// affine equation, total degree d - 3
    pub phi: TriPoly,
    /// homogenization in (x0 : x1 : x2 : z)
    pub phi_proj: TriPoly,
    /// the normalized input
    pub source: PolyFunc,
    pub d: u64,
}

impl SigmaSurface {
    pub fn field(&self) -> &FieldSpec {
        self.source.field()
    }

    /// Top homogeneous component of phi, the curve at infinity.
    pub fn at_infinity(&self) -> TriPoly {
        self.phi.homogeneous_component((self.d - 3) as u32)
    }

    /// phi(u, u, u) as a polynomial in u.
    pub fn diagonal(&self) -> UniPoly {
        let u = TriPoly::var(self.field(), X0);
        let p = self.phi.substitute(X1, &u).and_then(|p| p.substitute(X2, &u)).expect("same field");
        p.to_uni(X0).expect("only x0 remains")
    }
}

/// `build_sigma`: numerator by substitution, divided exactly by the triple
/// product. The q-affine part of f contributes nothing and is dropped.
pub fn build_sigma(f: &PolyFunc) -> Result<SigmaSurface, SigmaError> {
    let g = f.normalize()?;
    let d = g.degree().expect("normalized is nonzero");
    if !(3..=MAX_SIGMA_DEGREE).contains(&d) {
        return Err(SigmaError::DegreeOutOfRange { d, max: MAX_SIGMA_DEGREE });
    }
    let num = numerator(&g);
    let phi = num.exact_divide(&triple_product(g.field()))?;
    if phi.is_zero() {
        return Err(SigmaError::QAffineInput);
    }
    debug_assert_eq!(phi.total_degree(), Some((d - 3) as u32));
    let phi_proj = phi.homogenize((d - 3) as u32)?;
    Ok(SigmaSurface { phi, phi_proj, source: g, d })
}

/// The curve X_infinity of x^d: a homogeneous polynomial of degree d - 3
/// over F_2.
pub fn infinity_curve(d: u64) -> Result<TriPoly, SigmaError> {
    if !(3..=MAX_SIGMA_DEGREE).contains(&d) {
        return Err(SigmaError::DegreeOutOfRange { d, max: MAX_SIGMA_DEGREE });
    }
    let f2 = FieldSpec::binary();
    let mut num = TriPoly::zero(&f2);
    for v in [X0, X1, X2] {
        let mut m = [0u32; 4];
        m[v] = d as u32;
        num.add_term(Monomial(m), 1);
    }
    trinomial_power(d, 1, &mut num);
    Ok(num.exact_divide(&triple_product(&f2))?)
}

/// phi with x2 := a, a polynomial in x0, x1.
pub fn section_xa(s: &SigmaSurface, a: u32) -> TriPoly {
    s.phi.substitute_value(X2, a)
}

/// [f(x0) + f(x1) + f(x1 + a) + f(x0 + a)] / [(x0 + x1)(x0 + x1 + a)] with a
/// kept symbolic as the variable x2.
pub fn voloch_curve(f: &PolyFunc) -> Result<TriPoly, SigmaError> {
    let g = f.normalize()?;
    let d = g.degree().expect("nonzero");
    if !(3..=MAX_SIGMA_DEGREE).contains(&d) {
        return Err(SigmaError::DegreeOutOfRange { d, max: MAX_SIGMA_DEGREE });
    }
    let field = g.field();
    let mut num = TriPoly::zero(field);
    for (e, c) in g.terms() {
        for v in [X0, X1] {
            let mut m = [0u32; 4];
            m[v] = e as u32;
            num.add_term(Monomial(m), c);
            // (x_v + a)^e over submasks
            let mut s = e;
            loop {
                let mut m = [0u32; 4];
                m[v] = s as u32;
                m[X2] = (e - s) as u32;
                num.add_term(Monomial(m), c);
                if s == 0 {
                    break;
                }
                s = (s - 1) & e;
            }
        }
    }
    let l = TriPoly::var(field, X0).add(&TriPoly::var(field, X1))?;
    let den = l.mul(&l.add(&TriPoly::var(field, X2))?)?;
    Ok(num.exact_divide(&den)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCount {
    pub affine_total: u64,
    pub affine_on_triple_locus: u64,
    pub affine_off_locus: u64,
    pub infinity_points: u64,
    pub projective_total: u64,
}

/// Zeros over F_q^2 of a polynomial in the variables (a, b) (others absent).
fn grid_zeros(p: &TriPoly, a: usize, b: usize, skip_diagonal: bool) -> u64 {
    let field = p.field().clone();
    let bp = BiPoly::from_tri(p, a, b).expect("two variables");
    field
        .elements()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|vb| {
            let row = bp.eval_outer(vb);
            field.elements().filter(|&va| !(skip_diagonal && va == vb) && row.eval(va) == 0).count() as u64
        })
        .sum()
}

fn check_budget(field: &FieldSpec, cap: u32) -> Result<(), SigmaError> {
    if field.m() > cap {
        return Err(SigmaError::BudgetExceeded { m: field.m(), cap });
    }
    Ok(())
}

/// Number of (x0, x1, x2) with pairwise distinct coordinates and
/// numerator zero, i.e. zeros of phi off the three planes.
fn off_locus_zeros(values: &[u32], stop_at_first: bool) -> u64 {
    let q = values.len();
    (0..q)
        .into_par_iter()
        .map(|x0| {
            let mut n = 0u64;
            for x1 in 0..q {
                if x1 == x0 {
                    continue;
                }
                let s = values[x0] ^ values[x1];
                for x2 in 0..q {
                    if x2 == x0 || x2 == x1 {
                        continue;
                    }
                    if s ^ values[x2] ^ values[x0 ^ x1 ^ x2] == 0 {
                        n += 1;
                        if stop_at_first {
                            return n;
                        }
                    }
                }
            }
            n
        })
        .sum()
}

/// Zeros of the homogeneous curve c over P^2(F_q).
pub fn projective_curve_zeros(c: &TriPoly) -> u64 {
    if c.is_zero() {
        let q = c.field().order();
        return q * q + q + 1;
    }
    let f = c.field();
    let chart_a = c.substitute_value(X0, 1);
    let mut n = grid_zeros(&chart_a, X1, X2, false);
    let chart_b = c.substitute_value(X0, 0).substitute_value(X1, 1).to_uni(X2).expect("x2 only");
    n += f.elements().filter(|&v| chart_b.eval(v) == 0).count() as u64;
    if c.eval_raw(&[0, 0, 1, 0]) == 0 {
        n += 1;
    }
    n
}

/// `count_points`: exhaustive classification of the F_q-points of X and of
/// its curve at infinity. `cap` bounds m.
pub fn count_points(s: &SigmaSurface, cap: u32) -> Result<PointCount, SigmaError> {
    let field = s.field().clone();
    check_budget(&field, cap)?;
    // on the planes x0 = x1, then x1 = x2 minus the first, then x0 = x2
    // minus both
    let x0 = TriPoly::var(&field, X0);
    let x1 = TriPoly::var(&field, X1);
    let p1 = s.phi.substitute(X1, &x0)?;
    let p2 = s.phi.substitute(X2, &x1)?;
    let p3 = s.phi.substitute(X2, &x0)?;
    let on = grid_zeros(&p1, X0, X2, false) + grid_zeros(&p2, X0, X1, true) + grid_zeros(&p3, X0, X1, true);
    let off = off_locus_zeros(&s.source.value_table(), false);
    let inf = projective_curve_zeros(&s.at_infinity());
    let affine = on + off;
    Ok(PointCount {
        affine_total: affine,
        affine_on_triple_locus: on,
        affine_off_locus: off,
        infinity_points: inf,
        projective_total: affine + inf,
    })
}

/// APN test through the surface: no F_q-point of X off the triple-plane
/// locus.
pub fn apn_via_surface(f: &PolyFunc, cap: u32) -> Result<bool, SigmaError> {
    let s = build_sigma(f)?;
    check_budget(s.field(), cap)?;
    Ok(off_locus_zeros(&s.source.value_table(), true) == 0)
}

/// x1 + x2 divides the x0-partial of phi.
pub fn divisibility_check(s: &SigmaSurface) -> bool {
    let d = s.phi.partial(X0);
    let l = TriPoly::var(s.field(), X1).add(&TriPoly::var(s.field(), X2)).expect("same field");
    d.exact_divide(&l).is_ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalCheck {
    /// phi(u, u, u), a nonzero constant
    pub a0: u32,
    /// all four partials of the projective equation vanish at (1:1:1:0)
    pub partials_vanish: bool,
    /// dPhi/dz restricted to (1, 1, 1, z) equals (d - 3) z^(d - 4) a0
    pub z_partial_identity: bool,
}

impl DiagonalCheck {
    pub fn holds(&self) -> bool {
        self.partials_vanish && self.z_partial_identity
    }
}

/// Checks that (1:1:1:0) is a singular point of the projective surface.
/// When phi(u, u, u) is not constant the roots u in F_q (affine diagonal
/// points, all singular) are returned in the error instead.
pub fn singular_at_infinity_diagonal(s: &SigmaSurface) -> Result<DiagonalCheck, SigmaError> {
    if s.d < 5 {
        return Err(SigmaError::DegreeOutOfRange { d: s.d, max: MAX_SIGMA_DEGREE });
    }
    let diag = s.diagonal();
    if !diag.is_constant() {
        let points = s.field().elements().filter(|&u| diag.eval(u) == 0).collect();
        return Err(SigmaError::DiagonalNotConstant { points });
    }
    let a0 = diag.coeff(0);
    let pt = [1, 1, 1, 0];
    let partials_vanish = [X0, X1, X2, Z].iter().all(|&v| s.phi_proj.partial(v).eval_raw(&pt) == 0);
    let dz = s.phi_proj.partial(Z).substitute_value(X0, 1).substitute_value(X1, 1).substitute_value(X2, 1);
    let expected = if (s.d - 3) % 2 == 1 {
        TriPoly::term(s.field(), a0, Monomial([0, 0, 0, (s.d - 4) as u32]))
    } else {
        TriPoly::zero(s.field())
    };
    Ok(DiagonalCheck { a0, partials_vanish, z_partial_identity: dz == expected })
}

/// The affine diagonal points (u, u, u) of X over F_q, each checked to be
/// singular (phi and its three partials vanish).
pub fn diagonal_singular_points(s: &SigmaSurface) -> Vec<u32> {
    let partials: Vec<TriPoly> = [X0, X1, X2].iter().map(|&v| s.phi.partial(v)).collect();
    s.field()
        .elements()
        .filter(|&u| {
            let pt = [u, u, u, 0];
            s.phi.eval_raw(&pt) == 0 && partials.iter().all(|p| p.eval_raw(&pt) == 0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvpoly::text::parse_tripoly;
    use std::collections::HashMap;

    fn field(m: u32) -> FieldSpec {
        FieldSpec::with_degree(m).unwrap()
    }

    fn func(f: &FieldSpec, s: &str) -> PolyFunc {
        PolyFunc::parse(f, s, &HashMap::new()).unwrap()
    }

    /// Numerator expanded by repeated multiplication, no bit tricks.
    fn numerator_by_multiplication(f: &PolyFunc) -> TriPoly {
        let field = f.field();
        let s = TriPoly::var(field, X0).add(&TriPoly::var(field, X1)).unwrap().add(&TriPoly::var(field, X2)).unwrap();
        let mut out = TriPoly::zero(field);
        for (e, c) in f.terms() {
            for v in [X0, X1, X2] {
                out = out.add(&TriPoly::var(field, v).pow(e as u32).scale(c)).unwrap();
            }
            out = out.add(&s.pow(e as u32).scale(c)).unwrap();
        }
        out
    }

    #[test]
    fn cube_gives_constant_one() {
        let f = field(4);
        let s = build_sigma(&func(&f, "x^3")).unwrap();
        assert_eq!(s.phi, TriPoly::one(&f));
        assert_eq!(infinity_curve(3).unwrap(), TriPoly::one(&FieldSpec::binary()));
        let pc = count_points(&s, 10).unwrap();
        assert_eq!(pc.affine_total, 0);
        assert_eq!(pc.infinity_points, 0);
    }

    #[test]
    fn q_affine_rejected() {
        let f = field(3);
        assert_eq!(build_sigma(&func(&f, "x^8 + x")), Err(SigmaError::QAffineInput));
    }

    #[test]
    fn numerator_matches_multiplication_oracle() {
        let f = field(3);
        for s in ["x^3", "x^6 + 0x3*x^5", "x^7 + x^5 + 0x6*x^3"] {
            let g = func(&f, s);
            assert_eq!(numerator(&g), numerator_by_multiplication(&g));
            let sigma = build_sigma(&g).unwrap();
            assert_eq!(sigma.phi.mul(&triple_product(&f)).unwrap(), numerator(&g));
        }
    }

    #[test]
    fn degree_six_decomposes_into_planes() {
        let f = field(3);
        for a5 in 1..8u32 {
            let a3 = f.pow(a5, 3);
            let mut b = HashMap::new();
            b.insert("a".into(), a5);
            b.insert("c".into(), a3);
            let g = PolyFunc::parse(&f, "x^6 + a*x^5 + c*x^3", &b).unwrap();
            let s = build_sigma(&g).unwrap();
            let plane = |i: &str, j: &str| parse_tripoly(&f, &format!("{i} + {j} + {a5:#x}")).unwrap();
            let prod = plane("x0", "x2").mul(&plane("x0", "x1")).unwrap().mul(&plane("x1", "x2")).unwrap();
            assert_eq!(s.phi, prod);
        }
    }

    #[test]
    fn top_component_is_the_curve_at_infinity() {
        let f = field(4);
        for d in [7u64, 9, 11] {
            let g = PolyFunc::new(&f, [(d, 1), (5, 3), (3, 7)]);
            let s = build_sigma(&g).unwrap();
            let c = infinity_curve(d).unwrap().map_coeffs(&f, |c| c);
            assert_eq!(s.at_infinity(), c);
        }
    }

    #[test]
    fn section_commutes_with_evaluation() {
        let f = field(3);
        let s = build_sigma(&func(&f, "x^7 + 0x3*x^6 + x^5")).unwrap();
        for a in f.elements() {
            let sec = section_xa(&s, a);
            for u in f.elements() {
                for v in f.elements() {
                    assert_eq!(sec.eval_raw(&[u, v, 0, 0]), s.phi.eval_raw(&[u, v, a, 0]));
                }
            }
        }
    }

    #[test]
    fn voloch_quotient_of_cube() {
        let f = field(3);
        let v = voloch_curve(&func(&f, "x^3")).unwrap();
        assert_eq!(v, TriPoly::var(&f, X2));
        let f = field(4);
        let v9 = voloch_curve(&func(&f, "x^9 + x^6")).unwrap();
        assert_eq!(v9.total_degree(), Some(7));
    }

    #[test]
    fn parametric_points_for_degree_six() {
        let f = field(3);
        let s = build_sigma(&func(&f, "x^6 + x^5")).unwrap();
        for lam in 2..8u32 {
            let den = f.mul(lam, 1 ^ lam);
            let x0 = f.inv(den).unwrap();
            let x1 = f.div(f.pow(lam, 3), den).unwrap();
            assert_eq!(s.phi.eval_raw(&[x0, x1, 1, 0]), 0);
            assert!(x0 != x1 && x1 != 1 && x0 != 1);
        }
        let pc = count_points(&s, 10).unwrap();
        assert!(pc.affine_off_locus >= 6);
    }

    #[test]
    fn off_locus_count_matches_direct_evaluation() {
        let f = field(3);
        for p in ["x^6 + x^5", "x^7", "x^5 + 0x2*x^3", "x^9 + x^6 + 0x5*x^3"] {
            let s = build_sigma(&func(&f, p)).unwrap();
            let pc = count_points(&s, 10).unwrap();
            let mut on = 0;
            let mut off = 0;
            for a in f.elements() {
                for b in f.elements() {
                    for c in f.elements() {
                        if s.phi.eval_raw(&[a, b, c, 0]) == 0 {
                            if a == b || b == c || a == c {
                                on += 1;
                            } else {
                                off += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!((pc.affine_on_triple_locus, pc.affine_off_locus), (on, off), "{p}");
            let mut inf = 0;
            let c = s.at_infinity();
            for pt in [[0u32, 0, 1]].into_iter().chain(f.elements().map(|v| [0, 1, v])).chain(
                f.elements().flat_map(|u| f.elements().map(move |v| [1, u, v])),
            ) {
                if c.eval_raw(&[pt[0], pt[1], pt[2], 0]) == 0 {
                    inf += 1;
                }
            }
            assert_eq!(pc.infinity_points, inf);
        }
    }

    #[test]
    fn divisibility_and_diagonal() {
        // phi_e(1, 1, 1) = 1 exactly when e = 3 mod 4, so the diagonal is
        // constant iff no exponent above 3 is 3 mod 4
        for (m, p) in [(4u32, "x^5 + x^3"), (5, "x^9 + 0x3*x^6 + x^3"), (4, "x^6 + x^5"), (5, "x^13 + x^10 + x^3")] {
            let f = field(m);
            let s = build_sigma(&func(&f, p)).unwrap();
            assert!(divisibility_check(&s));
            assert!(s.diagonal().is_constant());
            let check = singular_at_infinity_diagonal(&s).unwrap();
            assert!(check.holds(), "{p}");
        }
        let f = field(3);
        let s = build_sigma(&func(&f, "x^7")).unwrap();
        assert!(divisibility_check(&s));
        assert_eq!(singular_at_infinity_diagonal(&s), Err(SigmaError::DiagonalNotConstant { points: vec![0] }));
        assert_eq!(diagonal_singular_points(&s), vec![0]);
    }

    #[test]
    fn diagonal_value_of_monomials() {
        for d in 4..40u64 {
            let c = infinity_curve(d).unwrap();
            assert_eq!(c.eval_raw(&[1, 1, 1, 0]), u32::from(d % 4 == 3), "d = {d}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let f = field(11);
        let s = build_sigma(&PolyFunc::monomial(&f, 5)).unwrap();
        assert_eq!(count_points(&s, 10), Err(SigmaError::BudgetExceeded { m: 11, cap: 10 }));
    }
}
