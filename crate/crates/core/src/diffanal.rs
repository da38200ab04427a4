//! Differential uniformity, the differential spectrum, the APN predicate and
//! the extended Walsh spectrum used as an equivalence fingerprint.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::funcrep::PolyFunc;

/// Largest m handled by the q^2 routines.
pub const MAX_ANALYSIS_DEGREE: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("F_2^{m} is too large for exhaustive analysis (limit m <= {cap})")]
    FieldTooLarge { m: u32, cap: u32 },
}

fn check_size(f: &PolyFunc) -> Result<(), DiffError> {
    let m = f.field().m();
    if m > MAX_ANALYSIS_DEGREE {
        return Err(DiffError::FieldTooLarge { m, cap: MAX_ANALYSIS_DEGREE });
    }
    Ok(())
}

/// Histogram of #{x : f(x + a) + f(x) = b} over all a != 0 and all b.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferentialSpectrum {
    pub m: u32,
    pub delta: u32,
    /// solution count -> number of (a, b) pairs with that count
    pub histogram: BTreeMap<u32, u64>,
}

impl DifferentialSpectrum {
    pub fn is_apn(&self) -> bool {
        self.delta == 2
    }
}

fn row_counts(values: &[u32], a: usize, counts: &mut [u32]) {
    counts.iter_mut().for_each(|c| *c = 0);
    for x in 0..values.len() {
        counts[(values[x] ^ values[x ^ a]) as usize] += 1;
    }
}

/// Spectrum from a value table of length q.
pub fn spectrum_of_values(m: u32, values: &[u32]) -> DifferentialSpectrum {
    let q = values.len();
    let histogram = (1..q)
        .into_par_iter()
        .fold(
            || (vec![0u32; q], BTreeMap::<u32, u64>::new()),
            |(mut counts, mut hist), a| {
                row_counts(values, a, &mut counts);
                for &c in &counts {
                    *hist.entry(c).or_insert(0) += 1;
                }
                (counts, hist)
            },
        )
        .map(|(_, h)| h)
        .reduce(BTreeMap::new, |mut acc, h| {
            for (k, v) in h {
                *acc.entry(k).or_insert(0) += v;
            }
            acc
        });
    let delta = histogram.keys().next_back().copied().unwrap_or(0);
    DifferentialSpectrum { m, delta, histogram }
}

/// `differential_spectrum`: exact counts over all a != 0.
pub fn differential_spectrum(f: &PolyFunc) -> Result<DifferentialSpectrum, DiffError> {
    check_size(f)?;
    Ok(spectrum_of_values(f.field().m(), &f.value_table()))
}

/// APN test on a value table, stopping at the first (a, b) with four
/// solutions. `stamp` must have length q; it is used as scratch space.
pub fn is_apn_values(values: &[u32], stamp: &mut [u32]) -> bool {
    let q = values.len();
    stamp.iter_mut().for_each(|s| *s = 0);
    for a in 1..q {
        let tag = a as u32;
        for x in 0..q {
            let y = x ^ a;
            if x > y {
                continue;
            }
            // x and x + a are the same solution pair; a second pair for the
            // same b means four solutions
            let b = (values[x] ^ values[y]) as usize;
            if stamp[b] == tag {
                return false;
            }
            stamp[b] = tag;
        }
    }
    true
}

/// True iff delta(f) = 2.
pub fn is_apn(f: &PolyFunc) -> Result<bool, DiffError> {
    check_size(f)?;
    let values = f.value_table();
    let q = values.len();
    Ok((1..q).into_par_iter().all(|a| {
        let mut seen = vec![false; q];
        for x in 0..q {
            let y = x ^ a;
            if x > y {
                continue;
            }
            let b = (values[x] ^ values[y]) as usize;
            if seen[b] {
                return false;
            }
            seen[b] = true;
        }
        true
    }))
}

/// Multiset of |W_f(b, u)| = |sum_x (-1)^(Tr(b f(x)) + Tr(u x))| over b != 0
/// and all u, with a SHA-256 digest of its canonical text form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalshFingerprint {
    /// |W| -> multiplicity
    pub histogram: BTreeMap<u64, u64>,
    pub digest: String,
}

impl WalshFingerprint {
    fn from_histogram(histogram: BTreeMap<u64, u64>) -> Self {
        let text: String = histogram.iter().map(|(v, c)| format!("{v}:{c};")).collect();
        let digest = hex::encode(Sha256::digest(text.as_bytes()));
        WalshFingerprint { histogram, digest }
    }
}

/// In-place Walsh–Hadamard transform.
fn fwht(v: &mut [i64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// The linear forms x -> Tr(u x) range over all dot products x . w as u
/// ranges over F_q, so the transform over the bit basis yields the same
/// multiset.
pub fn walsh_fingerprint(f: &PolyFunc) -> Result<WalshFingerprint, DiffError> {
    check_size(f)?;
    let field = f.field().clone();
    let values = f.value_table();
    let q = values.len();
    let histogram = (1..q as u32)
        .into_par_iter()
        .map(|b| {
            let mut v: Vec<i64> =
                values.iter().map(|&y| if field.trace(field.mul(b, y)) == 0 { 1 } else { -1 }).collect();
            fwht(&mut v);
            let mut h = BTreeMap::new();
            for w in v {
                *h.entry(w.unsigned_abs()).or_insert(0u64) += 1;
            }
            h
        })
        .reduce(BTreeMap::new, |mut acc, h| {
            for (k, c) in h {
                *acc.entry(k).or_insert(0) += c;
            }
            acc
        });
    Ok(WalshFingerprint::from_histogram(histogram))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2m::FieldSpec;

    fn mono(m: u32, d: u64) -> PolyFunc {
        PolyFunc::monomial(&FieldSpec::with_degree(m).unwrap(), d)
    }

    /// Direct count with no tables or early exit.
    fn brute_delta(f: &PolyFunc) -> u32 {
        let q = f.field().order() as u32;
        let mut best = 0;
        for a in 1..q {
            for b in 0..q {
                let n = (0..q).filter(|&x| f.eval(x ^ a) ^ f.eval(x) == b).count() as u32;
                best = best.max(n);
            }
        }
        best
    }

    #[test]
    fn gold_cube_is_apn() {
        for m in [3, 4] {
            let s = differential_spectrum(&mono(m, 3)).unwrap();
            assert_eq!(s.delta, 2);
            assert!(is_apn(&mono(m, 3)).unwrap());
        }
    }

    #[test]
    fn inverse_on_even_degree_is_not_apn() {
        let f = mono(4, 14);
        let d = differential_spectrum(&f).unwrap().delta;
        assert_eq!(d, brute_delta(&f));
        assert!(d > 2);
        assert!(!is_apn(&f).unwrap());
    }

    #[test]
    fn spectrum_shape() {
        for m in 2..=6 {
            let field = FieldSpec::with_degree(m).unwrap();
            let f = PolyFunc::new(&field, [(5, 1), (6, 3 % field.order() as u32), (3, 1)]);
            let s = differential_spectrum(&f).unwrap();
            let q = field.order();
            assert!(s.histogram.keys().all(|c| c % 2 == 0));
            assert!(s.delta >= 2);
            assert_eq!(s.histogram.values().sum::<u64>(), (q - 1) * q);
            let total: u64 = s.histogram.iter().map(|(c, n)| *c as u64 * n).sum();
            assert_eq!(total, (q - 1) * q);
            assert_eq!(s.delta, brute_delta(&f));
            let mut stamp = vec![0; q as usize];
            assert_eq!(is_apn_values(&f.value_table(), &mut stamp), s.delta == 2);
        }
    }

    #[test]
    fn gold_walsh_values() {
        let fp = walsh_fingerprint(&mono(3, 3)).unwrap();
        assert!(fp.histogram.keys().all(|&v| v == 0 || v == 4));
        assert_eq!(fp.histogram.values().sum::<u64>(), 7 * 8);
    }

    #[test]
    fn fingerprint_invariance() {
        let field = FieldSpec::with_degree(4).unwrap();
        let f = PolyFunc::new(&field, [(7, 1), (5, 3), (3, 9), (2, 4), (0, 1)]);
        let fp = walsh_fingerprint(&f).unwrap();
        assert_eq!(walsh_fingerprint(&f.normalize().unwrap()).unwrap(), fp);
        assert_eq!(walsh_fingerprint(&f.affine_transform(3, 5, 7).unwrap()).unwrap(), fp);
        assert_eq!(walsh_fingerprint(&f.frobenius_twist()).unwrap(), fp);
    }

    #[test]
    fn rejects_large_fields() {
        let f = mono(17, 3);
        assert!(matches!(is_apn(&f), Err(DiffError::FieldTooLarge { .. })));
    }
}
