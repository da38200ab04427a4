//! Bivariate factorization over F_{2^k}: specialize one variable, factor
//! the univariate image, lift the factors y-adically, recombine.

use super::bivar::{pick_vars, BiPoly};
use super::{uni_factor, MvError, TriPoly, UniPoly};

/// Largest total degree accepted by `bi_factor`.
pub const BI_FACTOR_DEGREE_CAP: u32 = 32;

/// Power series in the outer variable with coefficients in K[inner],
/// truncated to a fixed precision.
type Series = Vec<UniPoly>;

fn series_mul(a: &[UniPoly], b: &[UniPoly], prec: usize) -> Series {
    let f = a[0].field().clone();
    let mut out = vec![UniPoly::zero(&f); prec];
    for (i, x) in a.iter().enumerate().take(prec) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(prec - i) {
            out[i + j].add_assign(&x.mul(y));
        }
    }
    out
}

fn to_series(p: &BiPoly, prec: usize) -> Series {
    (0..prec).map(|j| p.row(j)).collect()
}

/// Inverse of a univariate power series with nonzero constant term.
fn inverse_series(p: &UniPoly, prec: usize) -> Vec<u32> {
    let f = p.field();
    let c0 = f.inv(p.coeff(0)).expect("unit constant term");
    let mut inv = vec![0u32; prec];
    inv[0] = c0;
    for n in 1..prec {
        let mut s = 0;
        for k in 1..=n {
            s ^= f.mul(p.coeff(k), inv[n - k]);
        }
        inv[n] = f.mul(s, c0);
    }
    inv
}

/// Lifts p = f0 * g0 (mod outer) to p = f * g (mod outer^prec) with f, g
/// monic in the inner variable.
fn lift_pair(p: &Series, f0: &UniPoly, g0: &UniPoly, prec: usize) -> (Series, Series) {
    let field = f0.field().clone();
    let (_, s, t) = f0.ext_gcd(g0);
    debug_assert!(s.mul(f0).add(&t.mul(g0)).is_one());
    let mut fs = vec![UniPoly::zero(&field); prec];
    let mut gs = vec![UniPoly::zero(&field); prec];
    fs[0] = f0.clone();
    gs[0] = g0.clone();
    for j in 1..prec {
        let mut e = p[j].clone();
        for a in 0..=j {
            if !fs[a].is_zero() && !gs[j - a].is_zero() {
                e.add_assign(&fs[a].mul(&gs[j - a]));
            }
        }
        if e.is_zero() {
            continue;
        }
        let df = t.mul(&e).rem(f0);
        let dg = e.add(&df.mul(g0)).exact_div(f0).expect("lifting step divides");
        fs[j] = df;
        gs[j] = dg;
    }
    (fs, gs)
}

fn lift_all(p: &Series, images: &[UniPoly], prec: usize) -> Vec<Series> {
    let mut out = Vec::with_capacity(images.len());
    let mut rest = p.clone();
    for i in 0..images.len() - 1 {
        let cofactor = images[i + 1..].iter().fold(UniPoly::one(images[0].field()), |acc, g| acc.mul(g));
        let (fi, gi) = lift_pair(&rest, &images[i], &cofactor, prec);
        out.push(fi);
        rest = gi;
    }
    out.push(rest);
    out
}

/// Content with respect to the inner variable (a polynomial in outer).
fn content_inner(p: &BiPoly) -> UniPoly {
    p.transpose().content_outer()
}

fn primitive_inner(p: &BiPoly) -> BiPoly {
    p.transpose().div_inner(&content_inner(p)).transpose()
}

/// Factors a squarefree polynomial, primitive in both directions, with
/// nonzero derivative in the inner variable. Evaluation points for the outer
/// variable are tried in ascending order.
fn factor_primitive(p: &BiPoly) -> Result<Vec<BiPoly>, MvError> {
    let field = p.field().clone();
    if p.degree_inner().unwrap_or(0) == 0 || p.degree_outer() == Some(0) {
        return Ok(vec![p.clone()]);
    }
    let lc = p.lead_inner();
    let alpha = field
        .elements()
        .find(|&a| {
            if lc.eval(a) == 0 {
                return false;
            }
            let img = p.eval_outer(a);
            img.gcd(&img.derivative()).is_one()
        })
        .ok_or(MvError::NoGoodEvaluationPoint)?;
    let shifted = p.taylor_shift_outer(alpha);
    let image = shifted.row(0).monic();
    let images: Vec<UniPoly> = uni_factor(&image).factors.into_iter().map(|(g, _)| g).collect();
    if images.len() == 1 {
        return Ok(vec![p.clone()]);
    }
    let factors = hensel_recombine(&shifted, &images)?;
    Ok(factors.into_iter().map(|g| g.taylor_shift_outer(alpha)).collect())
}

fn hensel_recombine(p: &BiPoly, images: &[UniPoly]) -> Result<Vec<BiPoly>, MvError> {
    let field = p.field().clone();
    let lc = p.lead_inner();
    let prec = p.degree_outer().unwrap_or(0) + lc.degree().unwrap_or(0) + 1;
    let inv_lc = inverse_series(&lc, prec);
    let inv_lc: Series = inv_lc.into_iter().map(|c| UniPoly::constant(&field, c)).collect();
    let monic = series_mul(&inv_lc, &to_series(p, prec), prec);
    let lifted = lift_all(&monic, images, prec);

    let mut remaining: Vec<usize> = (0..lifted.len()).collect();
    let mut current = p.clone();
    let mut found = Vec::new();
    let mut size = 1;
    'outer: while 2 * size <= remaining.len() {
        let lc_poly = current.lead_inner();
        let lc_cur: Series = (0..prec).map(|j| UniPoly::constant(&field, lc_poly.coeff(j))).collect();
        for subset in combinations(remaining.len(), size) {
            let mut g = lc_cur.clone();
            for &i in &subset {
                g = series_mul(&g, &lifted[remaining[i]], prec);
            }
            let cand = primitive_inner(&BiPoly::new(&field, g));
            if let Some(q) = current.exact_div(&cand) {
                found.push(cand);
                current = q;
                let chosen: Vec<usize> = subset.iter().map(|&i| remaining[i]).collect();
                remaining.retain(|i| !chosen.contains(i));
                continue 'outer;
            }
        }
        size += 1;
    }
    if current.degree_inner().unwrap_or(0) > 0 || current.degree_outer().unwrap_or(0) > 0 {
        found.push(current);
    }
    Ok(found)
}

/// All k-subsets of 0..n in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn uni_factors(p: &UniPoly, inner: usize) -> Vec<TriPoly> {
    if p.is_constant() {
        return Vec::new();
    }
    uni_factor(p).factors.into_iter().map(|(g, _)| TriPoly::from_uni(&g, inner)).collect()
}

/// Distinct irreducible factors of a squarefree, content-free polynomial.
fn factor_squarefree(p: &BiPoly, inner: usize, outer: usize) -> Result<Vec<TriPoly>, MvError> {
    let oriented = if !p.derivative_inner().is_zero() {
        factor_primitive(p).map(|fs| fs.into_iter().map(|g| g.to_tri(inner, outer)).collect::<Vec<_>>())
    } else {
        Err(MvError::NoGoodEvaluationPoint)
    };
    match oriented {
        Ok(v) => Ok(v),
        Err(MvError::NoGoodEvaluationPoint) if !p.derivative_outer().is_zero() => {
            let t = p.transpose();
            Ok(factor_primitive(&t)?.into_iter().map(|g| g.to_tri(outer, inner)).collect())
        }
        Err(e) => Err(e),
    }
}

/// Distinct irreducible factors of p (any multiplicities).
fn irreducible_factors(p: &BiPoly, inner: usize, outer: usize) -> Result<Vec<TriPoly>, MvError> {
    let mut out = Vec::new();
    let c_outer = p.content_outer();
    out.extend(uni_factors(&c_outer, inner));
    let p = p.div_inner(&c_outer);
    let c_inner = content_inner(&p);
    out.extend(uni_factors(&c_inner, outer));
    let p = primitive_inner(&p);
    if p.degree_inner().unwrap_or(0) == 0 && p.degree_outer().unwrap_or(0) == 0 {
        return Ok(out);
    }
    let g = p.gcd(&p.derivative_inner()).gcd(&p.derivative_outer());
    let g_const = g.degree_inner() == Some(0) && g.degree_outer() == Some(0);
    if g_const {
        out.extend(factor_squarefree(&p, inner, outer)?);
    } else if p.derivative_inner().is_zero() && p.derivative_outer().is_zero() {
        // every exponent is even: p is a square
        let root = p.to_tri(inner, outer);
        let f = root.field().clone();
        let mut s = TriPoly::zero(&f);
        for (m, &c) in root.terms() {
            let mut e = m.0;
            e.iter_mut().for_each(|x| *x /= 2);
            s.add_term(super::Monomial(e), f.sqrt(c));
        }
        out.extend(irreducible_factors(&BiPoly::from_tri(&s, inner, outer)?, inner, outer)?);
    } else {
        let odd = p.exact_div(&g).expect("gcd divides");
        out.extend(factor_squarefree(&primitive_inner(&odd.div_inner(&odd.content_outer())), inner, outer)?);
        out.extend(irreducible_factors(&g, inner, outer)?);
    }
    Ok(out)
}

/// `bi_factor`: monic irreducible factors over the coefficient field with
/// multiplicities, sorted. The product of factor^multiplicity equals `p` up
/// to a nonzero constant.
pub fn bi_factor(p: &TriPoly) -> Result<Vec<(TriPoly, u32)>, MvError> {
    assert!(!p.is_zero(), "cannot factor the zero polynomial");
    let degree = p.total_degree().unwrap_or(0);
    if degree > BI_FACTOR_DEGREE_CAP {
        return Err(MvError::DegreeCapExceeded { degree, cap: BI_FACTOR_DEGREE_CAP });
    }
    let (inner, outer) = pick_vars(&p.used_vars())?;
    let bp = BiPoly::from_tri(p, inner, outer)?;
    let mut irr: Vec<TriPoly> = irreducible_factors(&bp, inner, outer)?.into_iter().map(|g| g.monic()).collect();
    irr.sort_by_key(factor_key);
    irr.dedup();
    let mut out = Vec::with_capacity(irr.len());
    let mut rest = p.clone();
    for g in irr {
        let mut k = 0;
        while let Some(q) = rest.try_divide(&g) {
            rest = q;
            k += 1;
        }
        debug_assert!(k > 0, "factor {g} does not divide");
        out.push((g, k));
    }
    debug_assert!(rest.is_constant());
    Ok(out)
}

fn factor_key(p: &TriPoly) -> (u32, Vec<([u32; 4], u32)>) {
    (p.total_degree().unwrap_or(0), p.terms().rev().map(|(m, &c)| (m.0, c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2m::FieldSpec;
    use crate::mvpoly::text::parse_tripoly;
    use proptest::prelude::*;

    fn tp(f: &FieldSpec, s: &str) -> TriPoly {
        parse_tripoly(f, s).unwrap()
    }

    fn expand(f: &FieldSpec, fs: &[(TriPoly, u32)]) -> TriPoly {
        fs.iter().fold(TriPoly::one(f), |acc, (g, k)| acc.mul(&g.pow(*k)).unwrap())
    }

    #[test]
    fn two_parallel_lines() {
        let f = FieldSpec::binary();
        let p = tp(&f, "x0 + x1").mul(&tp(&f, "x0 + x1 + 1")).unwrap();
        let fs = bi_factor(&p).unwrap();
        assert_eq!(fs.len(), 2);
        assert!(fs.iter().all(|(g, k)| g.total_degree() == Some(1) && *k == 1));
        assert_eq!(expand(&f, &fs), p);
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(2, 1), vec![vec![0], vec![1]]);
    }

    #[test]
    fn inseparable_in_one_variable() {
        let f = FieldSpec::binary();
        let p = tp(&f, "x0^2 + x1");
        assert_eq!(bi_factor(&p).unwrap(), vec![(p.clone(), 1)]);
        let q = tp(&f, "x0^2 + x1^2");
        assert_eq!(bi_factor(&q).unwrap(), vec![(tp(&f, "x0 + x1"), 2)]);
    }

    #[test]
    fn repeated_and_content_factors() {
        let f = FieldSpec::with_degree(2).unwrap();
        let a = tp(&f, "x0^2 + x0*x1 + 0x2*x1^2 + 1");
        let p = a.pow(3).mul(&tp(&f, "x1 + 0x3")).unwrap().mul(&tp(&f, "x0")).unwrap();
        let fs = bi_factor(&p).unwrap();
        assert_eq!(expand(&f, &fs).monic(), p.monic());
    }

    #[test]
    fn reports_missing_evaluation_point() {
        let f = FieldSpec::binary();
        let p = tp(&f, "x0^2 + x0 + x1^2 + x1");
        assert_eq!(bi_factor(&p).unwrap().len(), 2);
        // over F_2 every specialization of either variable has a repeated root
        let q = ["x0 + x1", "x0 + x1 + 1", "x0 + x1^2 + x1", "x1 + x0^2 + x0"]
            .iter()
            .fold(TriPoly::one(&f), |acc, s| acc.mul(&tp(&f, s)).unwrap());
        assert_eq!(bi_factor(&q), Err(MvError::NoGoodEvaluationPoint));
        let f4 = FieldSpec::with_degree(2).unwrap();
        let q4 = q.map_coeffs(&f4, |c| c);
        assert_eq!(expand(&f4, &bi_factor(&q4).unwrap()), q4);
    }

    #[test]
    fn degree_cap() {
        let f = FieldSpec::binary();
        let p = tp(&f, "x0^33 + x1");
        assert!(matches!(bi_factor(&p), Err(MvError::DegreeCapExceeded { .. })));
    }

    fn random_bivariate(f: &FieldSpec, terms: &[((u32, u32), u32)]) -> TriPoly {
        let mask = (f.order() - 1) as u32;
        TriPoly::from_terms(f, terms.iter().map(|&((a, b), c)| ([a, b, 0, 0], c & mask)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn factors_multiply_back(
            m in 2u32..5,
            a in proptest::collection::vec(((0u32..4, 0u32..4), 1u32..256), 1..6),
            b in proptest::collection::vec(((0u32..4, 0u32..3), 1u32..256), 1..6),
        ) {
            let f = FieldSpec::with_degree(m).unwrap();
            let pa = random_bivariate(&f, &a);
            let pb = random_bivariate(&f, &b);
            prop_assume!(!pa.is_zero() && !pb.is_zero());
            let p = pa.mul(&pb).unwrap();
            match bi_factor(&p) {
                Ok(fs) => prop_assert_eq!(expand(&f, &fs).monic(), p.monic()),
                Err(MvError::NoGoodEvaluationPoint) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
