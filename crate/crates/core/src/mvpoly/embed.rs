//! Field embeddings F_{2^a} -> F_{2^b} for a | b.

use crate::gf2m::{FieldError, FieldSpec};

use super::{uni_factor, UniPoly};

/// The embedding sending the generator x of the source to the smallest root
/// of the source modulus in the target.
#[derive(Clone, Debug)]
pub struct Embedding {
    source: FieldSpec,
    target: FieldSpec,
    basis: Vec<u32>,
}

impl Embedding {
    pub fn new(source: &FieldSpec, target: &FieldSpec) -> Result<Self, FieldError> {
        let (a, b) = (source.m(), target.m());
        if b % a != 0 {
            return Err(FieldError::FieldMismatch);
        }
        let rho = if source == target {
            if a == 1 { 1 } else { 2 }
        } else if a == 1 {
            1
        } else {
            let bits: Vec<u32> = (0..=a).map(|i| ((source.modulus() >> i) & 1) as u32).collect();
            let poly = UniPoly::new(target, bits);
            *uni_factor(&poly).roots().first().ok_or(FieldError::FieldMismatch)?
        };
        let mut basis = Vec::with_capacity(a as usize);
        let mut pw = 1u32;
        for _ in 0..a {
            basis.push(pw);
            pw = target.mul(pw, rho);
        }
        Ok(Embedding { source: source.clone(), target: target.clone(), basis })
    }

    pub fn source(&self) -> &FieldSpec {
        &self.source
    }

    pub fn target(&self) -> &FieldSpec {
        &self.target
    }

    pub fn apply(&self, v: u32) -> u32 {
        self.basis
            .iter()
            .enumerate()
            .filter(|(i, _)| (v >> i) & 1 == 1)
            .fold(0, |acc, (_, &b)| acc ^ b)
    }
}
