//! Exact lattice-existence criterion: `G_λ` admits a lattice iff the
//! frequencies generate a discrete subgroup of `(ℝ, +)`, i.e. are pairwise
//! commensurable.
//!
//! Inputs are exact numbers `q·√d` (rational `q`, squarefree `d`); anything
//! written with a decimal point or exponent is a float and yields
//! `undecidable`.

use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};

/// `coef · √radicand` with `radicand` squarefree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactReal {
    pub coef: Rational64,
    pub radicand: u64,
}

impl ExactReal {
    pub fn rational(coef: Rational64) -> Self {
        Self { coef, radicand: 1 }
    }

    /// `coef · √d`, pulling square factors out of `d`.
    pub fn with_sqrt(coef: Rational64, d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Parse("sqrt(0) is not a valid frequency".into()));
        }
        let (mut c, mut rest) = (coef, d);
        let mut f = 2u64;
        while f * f <= rest {
            while rest % (f * f) == 0 {
                rest /= f * f;
                c *= Rational64::from_integer(f as i64);
            }
            f += 1;
        }
        Ok(Self { coef: c, radicand: rest })
    }

    pub fn to_f64(&self) -> f64 {
        (*self.coef.numer() as f64 / *self.coef.denom() as f64) * (self.radicand as f64).sqrt()
    }

    pub fn is_positive(&self) -> bool {
        *self.coef.numer() > 0
    }
}

impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.radicand, self.coef == Rational64::from_integer(1)) {
            (1, _) => write!(f, "{}", self.coef),
            (d, true) => write!(f, "sqrt({d})"),
            (d, false) => write!(f, "{}*sqrt({d})", self.coef),
        }
    }
}

/// One parsed frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LatticeInput {
    Exact(ExactReal),
    Float(f64),
}

impl LatticeInput {
    pub fn to_f64(&self) -> f64 {
        match self {
            LatticeInput::Exact(e) => e.to_f64(),
            LatticeInput::Float(v) => *v,
        }
    }
}

fn parse_rational(text: &str) -> Result<Rational64> {
    let bad = |e: String| Error::Parse(format!("rational `{text}`: {e}"));
    match text.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
            let q: i64 = q.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
            if q == 0 {
                return Err(bad("zero denominator".into()));
            }
            Ok(Rational64::new(p, q))
        }
        None => Ok(Rational64::from_integer(text.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?)),
    }
}

/// Parses `p`, `p/q`, `sqrt(d)`, `√d`, `p/q*sqrt(d)`, or a float literal.
pub fn parse_frequency(text: &str) -> Result<LatticeInput> {
    let t = text.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty frequency".into()));
    }
    let lower = t.to_ascii_lowercase();
    if lower.contains('.') || (lower.contains('e') && !lower.contains("sqrt")) {
        let v: f64 = t.parse().map_err(|e| Error::Parse(format!("frequency `{t}`: {e}")))?;
        return Ok(LatticeInput::Float(v));
    }
    let (coef_txt, root_txt) = if let Some(pos) = lower.find("sqrt(") {
        let inner = lower[pos + 5..].strip_suffix(')').ok_or_else(|| Error::Parse(format!("unclosed sqrt in `{t}`")))?;
        (lower[..pos].trim_end_matches('*').trim().to_string(), Some(inner.to_string()))
    } else if let Some(pos) = t.find('√') {
        (t[..pos].trim_end_matches('*').trim().to_string(), Some(t[pos + '√'.len_utf8()..].to_string()))
    } else {
        (lower.clone(), None)
    };
    let coef = if coef_txt.is_empty() { Rational64::from_integer(1) } else { parse_rational(&coef_txt)? };
    let value = match root_txt {
        None => ExactReal::rational(coef),
        Some(r) => {
            let d: u64 = r.trim().parse().map_err(|e| Error::Parse(format!("radicand `{r}`: {e}")))?;
            ExactReal::with_sqrt(coef, d)?
        }
    };
    Ok(LatticeInput::Exact(value))
}

pub fn parse_frequency_list(text: &str) -> Result<Vec<LatticeInput>> {
    text.split(',').map(parse_frequency).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LatticeVerdict {
    /// The frequencies generate `generator · ℤ`.
    Lattice { generator: String },
    /// `λ_{index}` is not a rational multiple of `λ_1` (1-based).
    NoLattice { index: usize },
    Undecidable { reason: String },
}

impl LatticeVerdict {
    pub fn admits_lattice(&self) -> Option<bool> {
        match self {
            LatticeVerdict::Lattice { .. } => Some(true),
            LatticeVerdict::NoLattice { .. } => Some(false),
            LatticeVerdict::Undecidable { .. } => None,
        }
    }
}

fn rational_gcd(a: Rational64, b: Rational64) -> Option<Rational64> {
    // gcd(p/q, r/s) = gcd(p s, r q) / (q s)
    let (p, q, r, s) = (*a.numer(), *a.denom(), *b.numer(), *b.denom());
    let num = p.checked_mul(s)?.gcd(&r.checked_mul(q)?);
    Some(Rational64::new(num, q.checked_mul(s)?))
}

pub fn lattice_criterion(inputs: &[LatticeInput]) -> LatticeVerdict {
    if inputs.is_empty() {
        return LatticeVerdict::Undecidable { reason: "no frequencies given".into() };
    }
    let mut exact = Vec::with_capacity(inputs.len());
    for (j, x) in inputs.iter().enumerate() {
        match x {
            LatticeInput::Exact(e) if e.is_positive() => exact.push(*e),
            LatticeInput::Exact(e) => {
                return LatticeVerdict::Undecidable { reason: format!("lambda_{} = {e} is not positive", j + 1) }
            }
            LatticeInput::Float(v) => {
                return LatticeVerdict::Undecidable {
                    reason: format!("lambda_{} = {v} is a float; commensurability needs exact input", j + 1),
                }
            }
        }
    }
    let d = exact[0].radicand;
    if let Some(j) = exact.iter().position(|e| e.radicand != d) {
        return LatticeVerdict::NoLattice { index: j + 1 };
    }
    let mut g = exact[0].coef;
    for e in &exact[1..] {
        match rational_gcd(g, e.coef) {
            Some(v) => g = v,
            None => return LatticeVerdict::Undecidable { reason: "integer overflow".into() },
        }
    }
    LatticeVerdict::Lattice { generator: ExactReal { coef: g, radicand: d }.to_string() }
}
