//! Textual form of `TriPoly`: terms `coeff*x0^i*x1^j*x2^k*z^l` joined by
//! `+`, highest grlex term first. Coefficients are hex bit masks (`0x1b`);
//! a coefficient of 1 is omitted unless the term is constant, and the zero
//! polynomial prints as `0`.

use crate::gf2m::FieldSpec;

use super::tri::{Monomial, TriPoly, NVARS};
use super::MvError;

const VAR_NAMES: [&str; NVARS] = ["x0", "x1", "x2", "z"];

pub fn format_tripoly(p: &TriPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut parts = Vec::with_capacity(p.len());
    for (m, &c) in p.terms().rev() {
        let mut factors: Vec<String> = Vec::new();
        if c != 1 {
            factors.push(format!("{c:#x}"));
        }
        for (v, &e) in m.0.iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(VAR_NAMES[v].to_string()),
                _ => factors.push(format!("{}^{e}", VAR_NAMES[v])),
            }
        }
        if factors.is_empty() {
            factors.push("1".to_string());
        }
        parts.push(factors.join("*"));
    }
    parts.join(" + ")
}

fn parse_int(tok: &str) -> Option<u64> {
    if let Some(h) = tok.strip_prefix("0x").or_else(|| tok.strip_prefix("0X")) {
        u64::from_str_radix(h, 16).ok()
    } else {
        tok.parse().ok()
    }
}

pub fn parse_tripoly(field: &FieldSpec, s: &str) -> Result<TriPoly, MvError> {
    let err = |msg: String| MvError::Parse(msg);
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(err("empty polynomial".into()));
    }
    let mut out = TriPoly::zero(field);
    for term in compact.split('+') {
        if term.is_empty() {
            return Err(err(format!("empty term in {s:?}")));
        }
        let mut coeff = 1u32;
        let mut mono = Monomial::default();
        for factor in term.split('*') {
            if let Some(v) = VAR_NAMES.iter().position(|name| factor.starts_with(name)) {
                let rest = &factor[VAR_NAMES[v].len()..];
                let e = if rest.is_empty() {
                    1
                } else {
                    let digits = rest.strip_prefix('^').ok_or_else(|| err(format!("bad factor {factor:?}")))?;
                    digits.parse::<u32>().map_err(|_| err(format!("bad exponent in {factor:?}")))?
                };
                mono.0[v] += e;
            } else {
                let c = parse_int(factor).ok_or_else(|| err(format!("bad coefficient {factor:?}")))?;
                if c >= field.order() {
                    return Err(err(format!("coefficient {c:#x} outside the field")));
                }
                coeff = field.mul(coeff, c as u32);
            }
        }
        out.add_term(mono, coeff);
    }
    Ok(out)
}
