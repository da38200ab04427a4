//! Univariate factorization over F_{2^k}: squarefree decomposition,
//! distinct-degree splitting, then randomized equal-degree splitting with
//! the trace map (the characteristic-2 form of Cantor–Zassenhaus).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::UniPoly;

/// Seed of the equal-degree splitting generator.
pub const DEFAULT_SEED: u64 = 0;

/// Complete factorization: leading unit and monic irreducible factors with
/// multiplicities, sorted by (degree, coefficients).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub unit: u32,
    pub factors: Vec<(UniPoly, u32)>,
}

impl Factorization {
    pub fn expand(&self, field: &crate::gf2m::FieldSpec) -> UniPoly {
        let mut acc = UniPoly::constant(field, self.unit);
        for (p, e) in &self.factors {
            acc = acc.mul(&p.pow(*e as u64));
        }
        acc
    }

    /// Distinct roots (from the linear factors).
    pub fn roots(&self) -> Vec<u32> {
        let mut r: Vec<u32> = self
            .factors
            .iter()
            .filter(|(p, _)| p.degree() == Some(1))
            .map(|(p, _)| p.coeff(0))
            .collect();
        r.sort_unstable();
        r
    }
}

/// `uni_factor` with the default seed. Panics on the zero polynomial.
pub fn uni_factor(p: &UniPoly) -> Factorization {
    uni_factor_seeded(p, DEFAULT_SEED)
}

pub fn uni_factor_seeded(p: &UniPoly, seed: u64) -> Factorization {
    assert!(!p.is_zero(), "cannot factor the zero polynomial");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = p.lead();
    let mut factors = Vec::new();
    for (sqf, mult) in squarefree_decomposition(&p.monic()) {
        for (prod, deg) in distinct_degree(&sqf) {
            for g in equal_degree(&prod, deg, &mut rng) {
                factors.push((g, mult));
            }
        }
    }
    factors.sort_by(|a, b| (a.0.degree(), a.0.coeffs(), a.1).cmp(&(b.0.degree(), b.0.coeffs(), b.1)));
    // merge repeated entries (a factor can appear in several squarefree layers only once, but be safe)
    let mut merged: Vec<(UniPoly, u32)> = Vec::new();
    for (g, e) in factors {
        match merged.last_mut() {
            Some((h, k)) if *h == g => *k += e,
            _ => merged.push((g, e)),
        }
    }
    Factorization { unit, factors: merged }
}

/// Monic squarefree parts with multiplicities: p = prod s_i^{m_i}.
pub fn squarefree_decomposition(p: &UniPoly) -> Vec<(UniPoly, u32)> {
    let mut out = Vec::new();
    if p.is_constant() {
        return out;
    }
    let p = p.monic();
    let dp = p.derivative();
    let mut c = p.gcd(&dp);
    let mut w = p.exact_div(&c).expect("gcd divides");
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c);
        let z = w.exact_div(&y).expect("gcd divides");
        if !z.is_one() {
            out.push((z, i));
        }
        i += 1;
        w = y;
        c = c.exact_div(&w).expect("gcd divides");
    }
    if !c.is_one() {
        let root = c.sqrt().expect("remaining part is a square in characteristic 2");
        for (s, m) in squarefree_decomposition(&root) {
            out.push((s, 2 * m));
        }
    }
    out
}

/// Splits a monic squarefree polynomial into products of equal-degree
/// irreducibles: (product, degree).
pub fn distinct_degree(p: &UniPoly) -> Vec<(UniPoly, usize)> {
    let field = p.field().clone();
    let k = field.m();
    let x = UniPoly::x(&field);
    let mut out = Vec::new();
    let mut rest = p.clone();
    let mut h = x.rem(&rest);
    let mut i = 0;
    while let Some(d) = rest.degree() {
        if d < 2 * (i + 1) {
            if d > 0 {
                out.push((rest.clone(), d));
            }
            break;
        }
        i += 1;
        h = h.frobenius_pow(k, &rest);
        let g = rest.gcd(&h.add(&x));
        if !g.is_one() {
            rest = rest.exact_div(&g).expect("gcd divides");
            h = h.rem(&rest);
            out.push((g, i));
        }
    }
    out
}

/// Splits a product of distinct monic irreducibles of degree `d`.
pub fn equal_degree(p: &UniPoly, d: usize, rng: &mut ChaCha8Rng) -> Vec<UniPoly> {
    let n = p.degree().unwrap_or(0);
    if n == 0 {
        return Vec::new();
    }
    if n == d {
        return vec![p.monic()];
    }
    let field = p.field().clone();
    let k = field.m() as usize;
    loop {
        let coeffs: Vec<u32> = (0..n).map(|_| rng.gen::<u32>() & ((field.order() - 1) as u32)).collect();
        let r = UniPoly::new(&field, coeffs);
        if r.is_constant() {
            continue;
        }
        // trace map to F_2: sum of r^(2^j), j < k*d
        let mut t = r.rem(p);
        let mut acc = t.clone();
        for _ in 1..(k * d) {
            t = t.mulmod(&t, p);
            acc.add_assign(&t);
        }
        let g = p.gcd(&acc);
        let gd = g.degree().unwrap_or(0);
        if gd > 0 && gd < n {
            let h = p.exact_div(&g).expect("gcd divides");
            let mut out = equal_degree(&g, d, rng);
            out.extend(equal_degree(&h, d, rng));
            return out;
        }
    }
}

/// True iff `p` (nonconstant) is irreducible.
pub fn is_irreducible(p: &UniPoly) -> bool {
    let f = uni_factor(p);
    f.factors.len() == 1 && f.factors[0].1 == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2m::FieldSpec;
    use proptest::prelude::*;

    fn f2() -> FieldSpec {
        FieldSpec::binary()
    }

    #[test]
    fn small_binary_examples() {
        let f = f2();
        let x2x = UniPoly::new(&f, vec![0, 1, 1]);
        let fac = uni_factor(&x2x);
        assert_eq!(fac.factors, vec![(UniPoly::new(&f, vec![0, 1]), 1), (UniPoly::new(&f, vec![1, 1]), 1)]);

        let x2p1 = UniPoly::new(&f, vec![1, 0, 1]);
        assert_eq!(uni_factor(&x2p1).factors, vec![(UniPoly::new(&f, vec![1, 1]), 2)]);

        let cubic = UniPoly::new(&f, vec![1, 1, 0, 1]);
        assert_eq!(uni_factor(&cubic).factors, vec![(cubic.clone(), 1)]);
    }

    #[test]
    fn x_to_the_q_minus_x_splits_completely() {
        for m in 1..=6 {
            let f = FieldSpec::with_degree(m).unwrap();
            let q = f.order() as usize;
            let mut c = vec![0u32; q + 1];
            c[1] = 1;
            c[q] = 1;
            let p = UniPoly::new(&f, c);
            let fac = uni_factor(&p);
            assert_eq!(fac.factors.len(), q);
            assert_eq!(fac.roots(), f.elements().collect::<Vec<_>>());
        }
    }

    /// Irreducibility oracle: no common factor with x^(Q^i) - x for i <= deg/2.
    fn irreducible_by_trial_gcd(p: &UniPoly) -> bool {
        let n = p.degree().unwrap();
        let x = UniPoly::x(p.field());
        let mut h = x.clone();
        for _ in 1..=n / 2 {
            h = h.frobenius_pow(p.field().m(), p);
            if !p.gcd(&h.add(&x)).is_one() {
                return false;
            }
        }
        true
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn product_of_factors_reproduces_input(m in 1u32..6, coeffs in proptest::collection::vec(any::<u32>(), 2..14)) {
            let f = FieldSpec::with_degree(m).unwrap();
            let mask = (f.order() - 1) as u32;
            let p = UniPoly::new(&f, coeffs.into_iter().map(|c| c & mask).collect());
            prop_assume!(!p.is_constant());
            let fac = uni_factor(&p);
            prop_assert_eq!(fac.expand(&f), p);
            for (g, _) in &fac.factors {
                prop_assert!(irreducible_by_trial_gcd(g));
                prop_assert_eq!(g.lead(), 1);
            }
        }
    }
}
