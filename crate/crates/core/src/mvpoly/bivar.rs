//! Bivariate polynomials as univariate polynomials in an outer variable
//! with coefficients in K[inner], plus gcd, resultant and squarefreeness.

use crate::gf2m::FieldSpec;

use super::{Monomial, MvError, TriPoly, UniPoly};

/// P = sum_j coeffs[j](inner) * outer^j. Trailing zero rows are trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiPoly {
    field: FieldSpec,
    coeffs: Vec<UniPoly>,
}

impl BiPoly {
    pub fn new(field: &FieldSpec, mut coeffs: Vec<UniPoly>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        BiPoly { field: field.clone(), coeffs }
    }

    pub fn zero(field: &FieldSpec) -> Self {
        Self::new(field, Vec::new())
    }

    /// A polynomial in the inner variable only.
    pub fn from_inner(p: UniPoly) -> Self {
        let f = p.field().clone();
        Self::new(&f, vec![p])
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn rows(&self) -> &[UniPoly] {
        &self.coeffs
    }

    pub fn row(&self, j: usize) -> UniPoly {
        self.coeffs.get(j).cloned().unwrap_or_else(|| UniPoly::zero(&self.field))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree_outer(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn degree_inner(&self) -> Option<usize> {
        self.coeffs.iter().filter_map(|c| c.degree()).max()
    }

    pub fn lead_outer(&self) -> UniPoly {
        self.coeffs.last().cloned().unwrap_or_else(|| UniPoly::zero(&self.field))
    }

    /// Leading coefficient in the inner variable, as a polynomial in outer.
    pub fn lead_inner(&self) -> UniPoly {
        match self.degree_inner() {
            None => UniPoly::zero(&self.field),
            Some(n) => UniPoly::new(&self.field, self.coeffs.iter().map(|c| c.coeff(n)).collect()),
        }
    }

    /// Swap the roles of the two variables.
    pub fn transpose(&self) -> Self {
        let n = self.degree_inner().map_or(0, |d| d + 1);
        let rows = (0..n)
            .map(|i| UniPoly::new(&self.field, self.coeffs.iter().map(|c| c.coeff(i)).collect()))
            .collect();
        Self::new(&self.field, rows)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(&self.field, (0..n).map(|j| self.row(j).add(&other.row(j))).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.field);
        }
        let mut out = vec![UniPoly::zero(&self.field); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j].add_assign(&a.mul(b));
            }
        }
        Self::new(&self.field, out)
    }

    pub fn scale_inner(&self, c: &UniPoly) -> Self {
        Self::new(&self.field, self.coeffs.iter().map(|r| r.mul(c)).collect())
    }

    /// Multiply by outer^n.
    pub fn shift_outer(&self, n: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut rows = vec![UniPoly::zero(&self.field); n];
        rows.extend(self.coeffs.iter().cloned());
        Self::new(&self.field, rows)
    }

    /// Substitute outer := outer + a.
    pub fn taylor_shift_outer(&self, a: u32) -> Self {
        if a == 0 {
            return self.clone();
        }
        let lin = BiPoly::new(&self.field, vec![UniPoly::constant(&self.field, a), UniPoly::one(&self.field)]);
        let mut acc = BiPoly::zero(&self.field);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&BiPoly::from_inner(c.clone()));
        }
        acc
    }

    /// Specialize outer := a.
    pub fn eval_outer(&self, a: u32) -> UniPoly {
        let f = &self.field;
        let mut acc = UniPoly::zero(f);
        for c in self.coeffs.iter().rev() {
            acc = acc.scale(a);
            acc.add_assign(c);
        }
        acc
    }

    /// Gcd of the rows (content with respect to the outer variable).
    pub fn content_outer(&self) -> UniPoly {
        self.coeffs.iter().fold(UniPoly::zero(&self.field), |g, c| g.gcd(c))
    }

    /// Divide every row by `c`, which must divide all of them.
    pub fn div_inner(&self, c: &UniPoly) -> Self {
        Self::new(
            &self.field,
            self.coeffs.iter().map(|r| r.exact_div(c).expect("content divides every row")).collect(),
        )
    }

    /// Primitive part with respect to the outer variable, rows normalized so
    /// the leading row is monic.
    pub fn primitive_outer(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let p = self.div_inner(&self.content_outer());
        let inv = self.field.inv(p.lead_outer().lead()).expect("nonzero");
        Self::new(&self.field, p.coeffs.iter().map(|r| r.scale(inv)).collect())
    }

    /// Exact division in K[inner][outer]; `None` as soon as a leading
    /// coefficient fails to divide.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        assert!(!d.is_zero(), "bivariate division by zero");
        let dn = d.coeffs.len() - 1;
        let dl = d.lead_outer();
        let mut rem = self.clone();
        let mut quot = vec![UniPoly::zero(&self.field); self.coeffs.len().saturating_sub(dn).max(1)];
        while let Some(rn) = rem.degree_outer() {
            if rn < dn {
                return None;
            }
            let c = rem.lead_outer().exact_div(&dl)?;
            let shift = rn - dn;
            for (j, r) in d.coeffs.iter().enumerate() {
                rem.coeffs[j + shift].add_assign(&r.mul(&c));
            }
            quot[shift] = c;
            rem = Self::new(&self.field, rem.coeffs);
        }
        Some(Self::new(&self.field, quot))
    }

    /// Pseudo-remainder: lc(b)^(da-db+1) * a mod b.
    fn pseudo_rem(&self, b: &Self) -> Self {
        let db = b.degree_outer().expect("nonzero divisor");
        let lb = b.lead_outer();
        let mut r = self.clone();
        while let Some(dr) = r.degree_outer() {
            if dr < db {
                break;
            }
            let lr = r.lead_outer();
            r = r.scale_inner(&lb).add(&b.scale_inner(&lr).shift_outer(dr - db));
        }
        r
    }

    /// Partial derivative in the outer variable.
    pub fn derivative_outer(&self) -> Self {
        let rows = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| if j % 2 == 1 { c.clone() } else { UniPoly::zero(&self.field) })
            .collect();
        Self::new(&self.field, rows)
    }

    pub fn derivative_inner(&self) -> Self {
        Self::new(&self.field, self.coeffs.iter().map(|c| c.derivative()).collect())
    }

    /// Gcd by the primitive pseudo-remainder sequence, normalized by
    /// `primitive_outer` and then scaled so the result is monic overall.
    pub fn gcd(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.normalize();
        }
        if other.is_zero() {
            return self.normalize();
        }
        let c = self.content_outer().gcd(&other.content_outer());
        let (mut a, mut b) = (self.primitive_outer(), other.primitive_outer());
        if a.degree_outer() < b.degree_outer() {
            std::mem::swap(&mut a, &mut b);
        }
        loop {
            if b.degree_outer() == Some(0) {
                return BiPoly::from_inner(c);
            }
            let r = a.pseudo_rem(&b);
            if r.is_zero() {
                return b.scale_inner(&c).normalize();
            }
            a = b;
            b = r.primitive_outer();
        }
    }

    /// Scale so the grlex-leading term (outer degree first) is 1.
    pub fn normalize(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.field.inv(self.lead_outer().lead()).expect("nonzero");
        Self::new(&self.field, self.coeffs.iter().map(|r| r.scale(inv)).collect())
    }

    /// Resultant with respect to the outer variable via the Sylvester matrix
    /// and fraction-free (Bareiss) elimination.
    pub fn resultant_outer(&self, other: &Self) -> UniPoly {
        let f = &self.field;
        let (Some(da), Some(db)) = (self.degree_outer(), other.degree_outer()) else {
            return UniPoly::zero(f);
        };
        let n = da + db;
        if n == 0 {
            return UniPoly::one(f);
        }
        let zero = UniPoly::zero(f);
        let mut mat = vec![vec![zero.clone(); n]; n];
        for i in 0..db {
            for (j, c) in self.coeffs.iter().rev().enumerate() {
                mat[i][i + j] = c.clone();
            }
        }
        for i in 0..da {
            for (j, c) in other.coeffs.iter().rev().enumerate() {
                mat[db + i][i + j] = c.clone();
            }
        }
        bareiss_det(mat)
    }

    pub fn to_tri(&self, inner: usize, outer: usize) -> TriPoly {
        let mut out = TriPoly::zero(&self.field);
        for (j, row) in self.coeffs.iter().enumerate() {
            for (i, &c) in row.coeffs().iter().enumerate() {
                let mut e = [0u32; 4];
                e[inner] += i as u32;
                e[outer] += j as u32;
                out.add_term(Monomial(e), c);
            }
        }
        out
    }

    /// Reads a polynomial in at most the two variables `inner`, `outer`.
    pub fn from_tri(p: &TriPoly, inner: usize, outer: usize) -> Result<Self, MvError> {
        let f = p.field();
        let extra: Vec<usize> = p.used_vars().into_iter().filter(|&v| v != inner && v != outer).collect();
        if !extra.is_empty() {
            return Err(MvError::TooManyVariables(p.used_vars()));
        }
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); p.degree_in(outer).unwrap_or(0) as usize + 1];
        for (m, &c) in p.terms() {
            let row = &mut rows[m.0[outer] as usize];
            let i = m.0[inner] as usize;
            if row.len() <= i {
                row.resize(i + 1, 0);
            }
            row[i] ^= c;
        }
        Ok(Self::new(f, rows.into_iter().map(|r| UniPoly::new(f, r)).collect()))
    }
}

/// Determinant of a square matrix over K[t] by Bareiss elimination.
/// Characteristic 2 makes row swaps sign-free.
pub(crate) fn bareiss_det(mut mat: Vec<Vec<UniPoly>>) -> UniPoly {
    let n = mat.len();
    let f = mat[0][0].field().clone();
    let mut prev = UniPoly::one(&f);
    for k in 0..n.saturating_sub(1) {
        if mat[k][k].is_zero() {
            match (k + 1..n).find(|&i| !mat[i][k].is_zero()) {
                Some(i) => mat.swap(k, i),
                None => return UniPoly::zero(&f),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = mat[k][k].mul(&mat[i][j]).add(&mat[i][k].mul(&mat[k][j]));
                mat[i][j] = num.exact_div(&prev).expect("Bareiss division is exact");
            }
            mat[i][k] = UniPoly::zero(&f);
        }
        prev = mat[k][k].clone();
    }
    mat[n - 1][n - 1].clone()
}

/// Picks (inner, outer) variables for a polynomial in at most two of them.
pub(crate) fn pick_vars(vars: &[usize]) -> Result<(usize, usize), MvError> {
    match vars {
        [] => Ok((0, 1)),
        [a] => Ok((*a, if *a == 0 { 1 } else { 0 })),
        [a, b] => Ok((*a, *b)),
        _ => Err(MvError::TooManyVariables(vars.to_vec())),
    }
}

fn union_vars(p: &TriPoly, q: &TriPoly) -> Vec<usize> {
    let mut v = p.used_vars();
    v.extend(q.used_vars());
    v.sort_unstable();
    v.dedup();
    v
}

/// Monic gcd of two polynomials in (at most) the same two variables.
pub fn bi_gcd(p: &TriPoly, q: &TriPoly) -> Result<TriPoly, MvError> {
    if p.field() != q.field() {
        return Err(MvError::FieldMismatch);
    }
    let (inner, outer) = pick_vars(&union_vars(p, q))?;
    let a = BiPoly::from_tri(p, inner, outer)?;
    let b = BiPoly::from_tri(q, inner, outer)?;
    Ok(a.gcd(&b).to_tri(inner, outer).monic())
}

/// Resultant eliminating variable `var`; the result is a polynomial in the
/// other variable used by p or q.
pub fn bi_resultant(p: &TriPoly, q: &TriPoly, var: usize) -> Result<(UniPoly, usize), MvError> {
    if p.field() != q.field() {
        return Err(MvError::FieldMismatch);
    }
    let others: Vec<usize> = union_vars(p, q).into_iter().filter(|&v| v != var).collect();
    let inner = match others.as_slice() {
        [] => if var == 0 { 1 } else { 0 },
        [v] => *v,
        _ => return Err(MvError::TooManyVariables(union_vars(p, q))),
    };
    let a = BiPoly::from_tri(p, inner, var)?;
    let b = BiPoly::from_tri(q, inner, var)?;
    Ok((a.resultant_outer(&b), inner))
}

/// True iff p has no repeated factor: gcd(p, dp/du, dp/dv) is constant.
pub fn bi_squarefree(p: &TriPoly) -> Result<bool, MvError> {
    let (inner, outer) = pick_vars(&p.used_vars())?;
    let a = BiPoly::from_tri(p, inner, outer)?;
    if a.is_zero() {
        return Ok(false);
    }
    let g = a.gcd(&a.derivative_inner()).gcd(&a.derivative_outer());
    Ok(g.degree_outer() == Some(0) && g.degree_inner() == Some(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvpoly::text::parse_tripoly;

    fn tp(f: &FieldSpec, s: &str) -> TriPoly {
        parse_tripoly(f, s).unwrap()
    }

    #[test]
    fn resultant_of_line_and_hyperbola() {
        let f = FieldSpec::binary();
        let (r, v) = bi_resultant(&tp(&f, "x0 + x1"), &tp(&f, "x0*x1 + 1"), 0).unwrap();
        assert_eq!(v, 1);
        assert_eq!(r, UniPoly::new(&f, vec![1, 0, 1]));
    }

    #[test]
    fn resultant_vanishes_on_common_factor() {
        let f = FieldSpec::with_degree(3).unwrap();
        let g = tp(&f, "x0 + 0x3*x1 + 1");
        let p = g.mul(&tp(&f, "x0^2 + x1")).unwrap();
        let q = g.mul(&tp(&f, "x1^3 + x0 + 0x5")).unwrap();
        assert!(bi_resultant(&p, &q, 0).unwrap().0.is_zero());
        assert_eq!(bi_gcd(&p, &q).unwrap(), g.monic());
    }

    #[test]
    fn resultant_matches_evaluation_oracle() {
        // Res_x0(p, q)(b) = Res(p(x0, b), q(x0, b)) when leading terms survive
        let f = FieldSpec::with_degree(4).unwrap();
        let p = tp(&f, "x0^3 + 0x3*x0*x1^2 + x1 + 0x7");
        let q = tp(&f, "x0^2 + 0x9*x0*x1 + x1^3");
        let (r, _) = bi_resultant(&p, &q, 0).unwrap();
        for b in f.elements() {
            let pb = p.substitute_value(1, b).to_uni(0).unwrap();
            let qb = q.substitute_value(1, b).to_uni(0).unwrap();
            let expect = BiPoly::new(&f, pb.coeffs().iter().map(|&c| UniPoly::constant(&f, c)).collect())
                .resultant_outer(&BiPoly::new(&f, qb.coeffs().iter().map(|&c| UniPoly::constant(&f, c)).collect()));
            assert_eq!(r.eval(b), expect.coeff(0));
            assert_eq!(r.eval(b) == 0, !pb.gcd(&qb).is_one());
        }
    }

    #[test]
    fn squarefree_detection() {
        let f = FieldSpec::binary();
        assert!(!bi_squarefree(&tp(&f, "x0^2 + x1^2")).unwrap());
        assert!(bi_squarefree(&tp(&f, "x0*x1 + 1")).unwrap());
        assert!(bi_squarefree(&tp(&f, "x0^2 + x1")).unwrap());
        let sq = tp(&f, "x0 + x1 + 1").pow(2).mul(&tp(&f, "x0")).unwrap();
        assert!(!bi_squarefree(&sq).unwrap());
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let f = FieldSpec::with_degree(2).unwrap();
        let g = bi_gcd(&tp(&f, "x0^2 + x1^3 + 1"), &tp(&f, "x0*x1 + 0x2")).unwrap();
        assert!(g.is_constant());
    }

    #[test]
    fn exact_division_in_two_variables() {
        let f = FieldSpec::with_degree(3).unwrap();
        let a = BiPoly::from_tri(&tp(&f, "x0^2*x1 + x1^2 + 0x3"), 0, 1).unwrap();
        let b = BiPoly::from_tri(&tp(&f, "x0 + x1^3 + 1"), 0, 1).unwrap();
        let ab = a.mul(&b);
        assert_eq!(ab.exact_div(&b), Some(a.clone()));
        assert!(ab.add(&BiPoly::from_inner(UniPoly::one(&f))).exact_div(&b).is_none());
    }
}
