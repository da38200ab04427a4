//! Exhaustive APN search over polynomial families with free coefficients,
//! e.g. `x^9 + A*x^6 + B*x^3`.

use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::diffanal::{differential_spectrum, is_apn_values, walsh_fingerprint, DiffError, MAX_ANALYSIS_DEGREE};
use crate::funcrep::{is_affine_degree, parse_terms, FuncError, ParsedTerm, PolyFunc};
use crate::gf2m::{FieldError, FieldSpec};

/// Default work budget, in field operations (candidates times q^2).
pub const DEFAULT_BUDGET: u64 = 1 << 30;

/// Candidates handed to one worker at a time.
const SHARD: u64 = 1024;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Parse(#[from] FuncError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("work {needed} exceeds the budget {budget}; partial result up to candidate {}", partial.cursor)]
    BudgetExceeded { needed: u128, budget: u64, partial: Box<SearchResult> },
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("hit {0} failed re-verification")]
    VerificationFailed(u64),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// A polynomial expression in x whose coefficients may contain named free
/// parameters. Parameters are ordered alphabetically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    text: String,
    terms: Vec<ParsedTerm>,
    names: Vec<String>,
}

impl Family {
    /// Parses a family. Free parameters may not multiply x^0 or x^(2^k):
    /// those terms are q-affine and do not change the APN property.
    pub fn parse(s: &str) -> Result<Self, SearchError> {
        let terms = parse_terms(s)?;
        let mut names: Vec<String> = terms.iter().flat_map(|t| t.names.iter().map(|(n, _)| n.clone())).collect();
        names.sort();
        names.dedup();
        for t in &terms {
            if !t.names.is_empty() && is_affine_degree(t.exponent) {
                return Err(SearchError::InvalidFamily(format!("free coefficient on q-affine term x^{}", t.exponent)));
            }
        }
        let text: String = s.split_whitespace().collect::<Vec<_>>().join(" ");
        Ok(Family { text, terms, names })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn bindings(&self, values: &[u32]) -> HashMap<String, u32> {
        self.names.iter().cloned().zip(values.iter().copied()).collect()
    }

    pub fn instantiate(&self, field: &FieldSpec, values: &[u32]) -> Result<PolyFunc, SearchError> {
        let b = self.bindings(values);
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            terms.push((t.exponent, t.coefficient(field, &b)?));
        }
        Ok(PolyFunc::new(field, terms))
    }
}

/// One scan: a family over F_{2^m}, restricted to candidate indices
/// [start, end).
#[derive(Debug, Clone)]
pub struct SearchJob {
    pub family: Family,
    pub field: FieldSpec,
    pub budget: u64,
    pub start: u64,
    pub end: Option<u64>,
    pub workers: Option<usize>,
}

impl SearchJob {
    pub fn new(family: Family, field: FieldSpec) -> Self {
        SearchJob { family, field, budget: DEFAULT_BUDGET, start: 0, end: None, workers: None }
    }

    /// Number of candidates in the whole family, q^(free parameters).
    pub fn total(&self) -> u128 {
        (self.field.order() as u128).pow(self.family.names.len() as u32)
    }

    /// Hex digest identifying the family and field, used by checkpoints.
    pub fn family_hash(&self) -> String {
        let key = format!("m={};modulus={:#x};family={}", self.field.m(), self.field.modulus(), self.family.text);
        hex::encode(&Sha256::digest(key.as_bytes())[..16])
    }

    /// Coefficient values of candidate `index` (little-endian base q).
    pub fn coefficients(&self, index: u64) -> Vec<u32> {
        let q = self.field.order();
        let mut rest = index;
        self.family
            .names
            .iter()
            .map(|_| {
                let c = (rest % q) as u32;
                rest /= q;
                c
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hit {
    pub index: u64,
    /// parameter name -> value, in the family's parameter order
    pub coefficients: Vec<(String, String)>,
    pub poly: String,
    pub delta: u32,
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub family: String,
    pub m: u32,
    pub modulus: u64,
    pub family_hash: String,
    pub hits: Vec<Hit>,
    /// candidates examined, q-affine ones included
    pub scanned: u64,
    /// candidates rejected by the early-abort APN test
    pub aborted_early: u64,
    /// candidates whose free part vanished (q-affine)
    pub skipped_affine: u64,
    /// next candidate index to examine
    pub cursor: u64,
    pub total: u64,
    pub complete: bool,
    pub elapsed_ms: u64,
}

/// Per-term data for fast evaluation of candidates.
struct Compiled {
    /// x^e for each term
    powers: Vec<Vec<u32>>,
    /// (parameter index, power) factors and constant for each term
    coeffs: Vec<(u32, Vec<(usize, u64)>)>,
    /// reduced exponent of each term, None for q-affine terms
    exponents: Vec<Option<u64>>,
}

fn compile(job: &SearchJob) -> Result<Compiled, SearchError> {
    let f = &job.field;
    let q = f.order();
    let mut powers = Vec::new();
    let mut coeffs = Vec::new();
    let mut exponents = Vec::new();
    for t in &job.family.terms {
        if t.constant >= q {
            return Err(FuncError::Parse(format!("constant {:#x} is outside F_2^{}", t.constant, f.m())).into());
        }
        let e = crate::funcrep::reduce_exponent(t.exponent, q);
        powers.push(f.elements().map(|x| if e == 0 { 1 } else { f.pow(x, e) }).collect());
        let factors = t
            .names
            .iter()
            .map(|(n, p)| (job.family.names.iter().position(|k| k == n).expect("collected"), *p as u64))
            .collect();
        coeffs.push((t.constant as u32, factors));
        exponents.push((!is_affine_degree(e)).then_some(e));
    }
    Ok(Compiled { powers, coeffs, exponents })
}

enum Outcome {
    Affine,
    NotApn,
    Apn,
}

fn examine(job: &SearchJob, c: &Compiled, index: u64, values: &mut [u32], stamp: &mut [u32]) -> Outcome {
    let f = &job.field;
    let params = job.coefficients(index);
    values.iter_mut().for_each(|v| *v = 0);
    // coefficients of the non-affine exponents; equal exponents may cancel
    let mut free: Vec<(u64, u32)> = Vec::new();
    for (t, (k, factors)) in c.coeffs.iter().enumerate() {
        let coef = factors.iter().fold(*k, |acc, &(i, p)| f.mul(acc, f.pow(params[i], p)));
        if coef == 0 {
            continue;
        }
        if let Some(e) = c.exponents[t] {
            match free.iter_mut().find(|(x, _)| *x == e) {
                Some(slot) => slot.1 ^= coef,
                None => free.push((e, coef)),
            }
        }
        for (v, &p) in values.iter_mut().zip(&c.powers[t]) {
            *v ^= f.mul(coef, p);
        }
    }
    if free.iter().all(|&(_, c)| c == 0) {
        return Outcome::Affine;
    }
    if is_apn_values(values, stamp) {
        Outcome::Apn
    } else {
        Outcome::NotApn
    }
}

fn verify(job: &SearchJob, index: u64) -> Result<Hit, SearchError> {
    let params = job.coefficients(index);
    let p = job.family.instantiate(&job.field, &params)?;
    let spectrum = differential_spectrum(&p)?;
    if spectrum.delta != 2 {
        return Err(SearchError::VerificationFailed(index));
    }
    let fp = walsh_fingerprint(&p)?;
    Ok(Hit {
        index,
        coefficients: job.family.names.iter().cloned().zip(params.iter().map(|v| format!("{v:#x}"))).collect(),
        poly: p.to_string(),
        delta: spectrum.delta,
        fingerprint: fp.digest,
    })
}

#[derive(Default)]
struct Tally {
    hits: Vec<u64>,
    aborted: u64,
    affine: u64,
}

fn scan_range(job: &SearchJob, c: &Compiled, from: u64, to: u64) -> Tally {
    let shards: Vec<(u64, u64)> =
        (from..to).step_by(SHARD as usize).map(|s| (s, (s + SHARD).min(to))).collect();
    let q = job.field.order() as usize;
    let tallies: Vec<Tally> = shards
        .into_par_iter()
        .map(|(a, b)| {
            let mut values = vec![0u32; q];
            let mut stamp = vec![0u32; q];
            let mut t = Tally::default();
            for i in a..b {
                match examine(job, c, i, &mut values, &mut stamp) {
                    Outcome::Affine => t.affine += 1,
                    Outcome::NotApn => t.aborted += 1,
                    Outcome::Apn => t.hits.push(i),
                }
            }
            t
        })
        .collect();
    tallies.into_iter().fold(Tally::default(), |mut acc, t| {
        acc.hits.extend(t.hits);
        acc.aborted += t.aborted;
        acc.affine += t.affine;
        acc
    })
}

/// Scans candidates in ascending index order. Hits are re-verified with
/// the full differential spectrum. When the remaining work exceeds the
/// budget, the affordable prefix is scanned and returned inside
/// `BudgetExceeded`, with `cursor` pointing past it.
pub fn scan(job: &SearchJob) -> Result<SearchResult, SearchError> {
    let m = job.field.m();
    if m > MAX_ANALYSIS_DEGREE {
        return Err(DiffError::FieldTooLarge { m, cap: MAX_ANALYSIS_DEGREE }.into());
    }
    let total = u64::try_from(job.total())
        .map_err(|_| SearchError::InvalidFamily("too many free coefficients".into()))?;
    let end = job.end.unwrap_or(total).min(total);
    let start = job.start.min(end);
    let q2 = job.field.order() * job.field.order();
    let needed = (end - start) as u128 * q2 as u128;
    let affordable = job.budget / q2;
    let stop = if needed > job.budget as u128 { start + affordable.min(end - start) } else { end };

    let t0 = Instant::now();
    let compiled = compile(job)?;
    let run = || scan_range(job, &compiled, start, stop);
    let tally = match job.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| SearchError::InvalidFamily(e.to_string()))?
            .install(run),
        None => run(),
    };
    let hits = tally.hits.iter().map(|&i| verify(job, i)).collect::<Result<Vec<_>, _>>()?;
    let result = SearchResult {
        family: job.family.text.clone(),
        m,
        modulus: job.field.modulus(),
        family_hash: job.family_hash(),
        hits,
        scanned: stop - start,
        aborted_early: tally.aborted,
        skipped_affine: tally.affine,
        cursor: stop,
        total,
        complete: stop == total,
        elapsed_ms: t0.elapsed().as_millis() as u64,
    };
    if stop < end {
        return Err(SearchError::BudgetExceeded { needed, budget: job.budget, partial: Box::new(result) });
    }
    Ok(result)
}

/// Saved scan position: family hash and next candidate index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub family_hash: String,
    pub cursor: u64,
}

impl Checkpoint {
    pub fn of(result: &SearchResult) -> Self {
        Checkpoint { family_hash: result.family_hash.clone(), cursor: result.cursor }
    }

    pub fn to_text(&self) -> String {
        format!("{} {}\n", self.family_hash, self.cursor)
    }

    pub fn from_text(s: &str) -> Result<Self, SearchError> {
        let mut it = s.split_whitespace();
        let (Some(h), Some(c), None) = (it.next(), it.next(), it.next()) else {
            return Err(SearchError::CorruptCheckpoint("expected '<hash> <cursor>'".into()));
        };
        if h.len() != 32 || !h.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(SearchError::CorruptCheckpoint(format!("bad hash {h:?}")));
        }
        let cursor = c.parse().map_err(|_| SearchError::CorruptCheckpoint(format!("bad cursor {c:?}")))?;
        Ok(Checkpoint { family_hash: h.to_string(), cursor })
    }

    pub fn save(&self, path: &Path) -> Result<(), SearchError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SearchError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    /// Continuation of `job` from this checkpoint.
    pub fn resume(&self, job: &SearchJob) -> Result<SearchJob, SearchError> {
        if self.family_hash != job.family_hash() {
            return Err(SearchError::CorruptCheckpoint("family or field does not match".into()));
        }
        if self.cursor as u128 > job.total() {
            return Err(SearchError::CorruptCheckpoint("cursor past the end of the family".into()));
        }
        Ok(SearchJob { start: self.cursor, ..job.clone() })
    }
}

/// Note attached to every classification report.
pub const FINGERPRINT_CAVEAT: &str =
    "equal Walsh fingerprints are necessary for CCZ-equivalence but not sufficient; matches are observations, not proofs";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyScan {
    pub family: String,
    pub hits: usize,
    pub scanned: u64,
    /// hit index -> names of the reference functions sharing its fingerprint
    pub matches: Vec<(u64, Vec<String>)>,
    pub result: SearchResult,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub degree: u32,
    pub m: u32,
    pub scans: Vec<FamilyScan>,
    /// reference function -> fingerprint digest (APN references only)
    pub references: Vec<(String, String)>,
    pub caveat: String,
}

fn classify(degree: u32, m: u32, families: &[&str], references: &[u64], budget: u64) -> Result<ClassificationReport, SearchError> {
    let field = FieldSpec::with_degree(m)?;
    let mut refs = Vec::new();
    for &e in references {
        let f = PolyFunc::monomial(&field, e);
        if crate::diffanal::is_apn(&f)? {
            refs.push((format!("x^{e}"), walsh_fingerprint(&f)?.digest));
        }
    }
    let mut scans = Vec::new();
    for fam in families {
        let mut job = SearchJob::new(Family::parse(fam)?, field.clone());
        job.budget = budget;
        let result = scan(&job)?;
        let matches = result
            .hits
            .iter()
            .map(|h| (h.index, refs.iter().filter(|(_, d)| *d == h.fingerprint).map(|(n, _)| n.clone()).collect()))
            .collect();
        scans.push(FamilyScan { family: fam.to_string(), hits: result.hits.len(), scanned: result.scanned, matches, result });
    }
    Ok(ClassificationReport { degree, m, scans, references: refs, caveat: FINGERPRINT_CAVEAT.to_string() })
}

/// Degree 6: x^6 + A x^5 + B x^3.
pub fn classify_degree6(m: u32, budget: u64) -> Result<ClassificationReport, SearchError> {
    classify(6, m, &["x^6 + A*x^5 + B*x^3"], &[3, 6], budget)
}

/// Degree 7 with the leading coefficient normalized to 1.
pub fn classify_degree7(m: u32, budget: u64) -> Result<ClassificationReport, SearchError> {
    classify(7, m, &["x^7 + A*x^6 + B*x^5 + C*x^3"], &[3, 7], budget)
}

/// Degree 9: the reduced families, and the full family when m <= 5.
pub fn classify_degree9(m: u32, budget: u64) -> Result<ClassificationReport, SearchError> {
    let mut fams = vec!["x^9 + A*x^6 + B*x^3", "x^9 + A*x^6 + x^5 + B*x^3", "x^9 + A*x^6 + A^2*x^3"];
    if m <= 5 {
        fams.push("x^9 + A*x^7 + B*x^6 + C*x^5 + D*x^3");
    }
    classify(9, m, &fams, &[3, 7, 9], budget)
}
