//! Polynomials of degree at most two in the canonical operators `x_m`, `p_n`
//! obeying `[x_m, p_n] = i δ_mn` (ħ = 1).
//!
//! Every polynomial is kept in normal order: position symbols before momentum
//! symbols, indices non-decreasing inside each group. Equality of operators
//! then reduces to key-wise comparison of the coefficient maps.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::C64;

/// Longest word the reducer accepts. Products of two quadratics need four.
pub const MAX_WORD_LEN: usize = 4;

/// Largest degree of any polynomial handed out by the public API.
pub const MAX_PUBLIC_DEGREE: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("word of length {0} exceeds the supported maximum of {MAX_WORD_LEN}")]
    UnsupportedDegree(usize),
    #[error("result has operator degree {0}, only degree <= 2 is supported")]
    DegreeOverflow(usize),
    #[error("basis size mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("operator index {index} out of range for K = {k}")]
    IndexOutOfRange { index: usize, k: usize },
    #[error("basis size K must be at least 1")]
    EmptyBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpKind {
    Position,
    Momentum,
}

/// A canonical operator. `index` is zero-based; it is displayed one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpSymbol {
    pub kind: OpKind,
    pub index: usize,
}

impl OpSymbol {
    pub const fn x(index: usize) -> Self {
        OpSymbol {
            kind: OpKind::Position,
            index,
        }
    }

    pub const fn p(index: usize) -> Self {
        OpSymbol {
            kind: OpKind::Momentum,
            index,
        }
    }

    /// Symbol at position `b` of the basis `(x_1..x_K, p_1..p_K)`.
    pub fn from_basis(b: usize, k: usize) -> Self {
        if b < k {
            OpSymbol::x(b)
        } else {
            OpSymbol::p(b - k)
        }
    }

    pub fn basis_index(&self, k: usize) -> usize {
        match self.kind {
            OpKind::Position => self.index,
            OpKind::Momentum => k + self.index,
        }
    }

    /// The scalar `c` in `[self, other] = c`.
    pub fn commutator_with(&self, other: &OpSymbol) -> C64 {
        if self.index != other.index {
            return C64::new(0.0, 0.0);
        }
        match (self.kind, other.kind) {
            (OpKind::Position, OpKind::Momentum) => C64::new(0.0, 1.0),
            (OpKind::Momentum, OpKind::Position) => C64::new(0.0, -1.0),
            _ => C64::new(0.0, 0.0),
        }
    }
}

impl fmt::Display for OpSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OpKind::Position => write!(f, "x{}", self.index + 1),
            OpKind::Momentum => write!(f, "p{}", self.index + 1),
        }
    }
}

/// An ordered product of symbols. Keys of [`OperatorPoly`] are always sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(pub Vec<OpSymbol>);

impl Monomial {
    pub fn identity() -> Self {
        Monomial(Vec::new())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_normal(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1])
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// A normal-ordered polynomial with complex coefficients over a basis of
/// `K` position/momentum pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPoly {
    k: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl OperatorPoly {
    pub fn zero(k: usize) -> Self {
        OperatorPoly {
            k,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(k: usize, c: C64) -> Self {
        let mut p = Self::zero(k);
        p.add_term(Monomial::identity(), c);
        p
    }

    pub fn symbol(k: usize, s: OpSymbol) -> Result<Self, AlgebraError> {
        check_index(&s, k)?;
        let mut p = Self::zero(k);
        p.add_term(Monomial(vec![s]), C64::new(1.0, 0.0));
        Ok(p)
    }

    /// Builds a polynomial from arbitrary (not necessarily ordered) words.
    pub fn from_words<I>(k: usize, words: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (Vec<OpSymbol>, C64)>,
    {
        let mut acc = Self::zero(k);
        for (w, c) in words {
            for s in &w {
                check_index(s, k)?;
            }
            let p = normal_order(k, &w, c)?;
            acc.add_assign(&p);
        }
        acc.check_public()?;
        Ok(acc)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, C64> {
        &self.terms
    }

    pub fn coeff(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Largest coefficient magnitude; zero for the zero polynomial.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sub-polynomial made of terms of exactly degree `d`.
    pub fn homogeneous_part(&self, d: usize) -> OperatorPoly {
        OperatorPoly {
            k: self.k,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    fn add_term(&mut self, m: Monomial, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == C64::new(0.0, 0.0) {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    fn add_assign(&mut self, other: &OperatorPoly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), *c);
        }
    }

    fn check_public(&self) -> Result<(), AlgebraError> {
        let d = self.degree();
        if d > MAX_PUBLIC_DEGREE {
            return Err(AlgebraError::DegreeOverflow(d));
        }
        Ok(())
    }

    fn check_k(&self, other: &OperatorPoly) -> Result<(), AlgebraError> {
        if self.k != other.k {
            return Err(AlgebraError::DimensionMismatch(self.k, other.k));
        }
        Ok(())
    }

    pub fn add(&self, other: &OperatorPoly) -> Result<OperatorPoly, AlgebraError> {
        self.check_k(other)?;
        let mut out = self.clone();
        out.add_assign(other);
        Ok(out)
    }

    pub fn sub(&self, other: &OperatorPoly) -> Result<OperatorPoly, AlgebraError> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> OperatorPoly {
        let mut out = Self::zero(self.k);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// Operator product `self * other`, reduced to normal order.
    pub fn mul(&self, other: &OperatorPoly) -> Result<OperatorPoly, AlgebraError> {
        self.check_k(other)?;
        let mut out = Self::zero(self.k);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let word: Vec<OpSymbol> = ma.0.iter().chain(mb.0.iter()).copied().collect();
                out.add_assign(&normal_order(self.k, &word, ca * cb)?);
            }
        }
        out.check_public()?;
        Ok(out)
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn distance(&self, other: &OperatorPoly) -> Result<f64, AlgebraError> {
        Ok(self.sub(other)?.max_abs_coeff())
    }
}

impl fmt::Display for OperatorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let coeff = if c.im == 0.0 {
                format!("{}", c.re)
            } else {
                format!("({}{:+}i)", c.re, c.im)
            };
            if m.0.is_empty() {
                write!(f, "{coeff}")?;
            } else {
                write!(f, "{coeff}*{m}")?;
            }
        }
        Ok(())
    }
}

fn check_index(s: &OpSymbol, k: usize) -> Result<(), AlgebraError> {
    if k == 0 {
        return Err(AlgebraError::EmptyBasis);
    }
    if s.index >= k {
        return Err(AlgebraError::IndexOutOfRange { index: s.index, k });
    }
    Ok(())
}

/// Rewrites `coeff * word` into normal order using `p_n x_m = x_m p_n - i δ_mn`.
///
/// Words may be up to [`MAX_WORD_LEN`] long so that products of two quadratics
/// can be formed; the result may then have degree up to four.
pub fn normal_order(k: usize, word: &[OpSymbol], coeff: C64) -> Result<OperatorPoly, AlgebraError> {
    if word.len() > MAX_WORD_LEN {
        return Err(AlgebraError::UnsupportedDegree(word.len()));
    }
    let mut out = OperatorPoly::zero(k);
    reduce_into(&mut out, word.to_vec(), coeff);
    Ok(out)
}

fn reduce_into(out: &mut OperatorPoly, mut word: Vec<OpSymbol>, coeff: C64) {
    if coeff == C64::new(0.0, 0.0) {
        return;
    }
    // bubble the first descent; every CCR swap spawns a shorter word
    loop {
        let Some(pos) = word.windows(2).position(|w| w[0] > w[1]) else {
            out.add_term(Monomial(word), coeff);
            return;
        };
        let (a, b) = (word[pos], word[pos + 1]);
        let c = a.commutator_with(&b);
        if c != C64::new(0.0, 0.0) {
            // a b = b a + [a, b]
            let mut shorter = word.clone();
            shorter.drain(pos..pos + 2);
            reduce_into(out, shorter, coeff * c);
        }
        word.swap(pos, pos + 1);
    }
}

/// Commutator of two words, exact for unit coefficients. The leading terms of
/// `ab` and `ba` are identical and cancel exactly.
fn word_commutator(k: usize, a: &[OpSymbol], b: &[OpSymbol]) -> Result<OperatorPoly, AlgebraError> {
    let ab: Vec<OpSymbol> = a.iter().chain(b).copied().collect();
    let ba: Vec<OpSymbol> = b.iter().chain(a).copied().collect();
    let mut out = normal_order(k, &ab, C64::new(1.0, 0.0))?;
    out.add_assign(&normal_order(k, &ba, C64::new(-1.0, 0.0))?);
    Ok(out)
}

/// `[a, b] = ab - ba` in normal order.
pub fn commutator(a: &OperatorPoly, b: &OperatorPoly) -> Result<OperatorPoly, AlgebraError> {
    a.check_k(b)?;
    let mut out = OperatorPoly::zero(a.k);
    for (ma, ca) in &a.terms {
        if ma.0.is_empty() {
            continue;
        }
        for (mb, cb) in &b.terms {
            if mb.0.is_empty() {
                continue;
            }
            let wc = word_commutator(a.k, &ma.0, &mb.0)?;
            out.add_assign(&wc.scale(ca * cb));
        }
    }
    out.check_public()?;
    Ok(out)
}

/// Hermitian adjoint: reverse each word and conjugate its coefficient.
pub fn adjoint(a: &OperatorPoly) -> OperatorPoly {
    let mut out = OperatorPoly::zero(a.k);
    for (m, c) in &a.terms {
        let rev: Vec<OpSymbol> = m.0.iter().rev().copied().collect();
        let p = normal_order(a.k, &rev, c.conj()).expect("stored words are short");
        out.add_assign(&p);
    }
    out
}

/// True when every coefficient of `adjoint(a) - a` has magnitude at most `tol`.
pub fn is_symmetric(a: &OperatorPoly, tol: f64) -> bool {
    let diff = adjoint(a).sub(a).expect("same basis");
    diff.terms.values().all(|c| c.norm() <= tol)
}
