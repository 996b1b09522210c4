//! Text front end: parse a Hamiltonian expression into an [`OperatorPoly`]
//! and extract its Weyl-symmetrized coefficient matrix γ.
//!
//! Grammar (operator products keep their written order):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := number | 'i' | identifier | '(' expr ')'
//! ```
//!
//! Operator identifiers are `x1..xK`, `p1..pK` and, for `K <= 4`, the aliases
//! `x y z w` / `px py pz pw`; `p` is accepted as an alias of `p1`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::opalg::{AlgebraError, OpKind, OpSymbol, OperatorPoly};
use crate::C64;

/// Maximum exponent allowed on an operator-valued base.
pub const MAX_OPERATOR_POWER: u32 = 2;
/// Maximum exponent allowed on a scalar base.
pub const MAX_SCALAR_POWER: u32 = 9;
/// Default tolerance for the Hermiticity checks in [`extract_gamma`].
pub const GAMMA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("unbound parameter `{name}` at byte {pos}")]
    UnboundParameter { name: String, pos: usize },
    #[error("invalid parameter name `{0}`: clashes with an operator or is not an identifier")]
    InvalidParameterName(String),
    #[error("term at byte {pos} has operator degree {degree}; at most 2 is supported")]
    Degree { degree: usize, pos: usize },
    #[error("division by an operator at byte {pos}")]
    DivisionByOperator { pos: usize },
    #[error("division by zero at byte {pos}")]
    DivisionByZero { pos: usize },
    #[error("exponent {exp} at byte {pos} exceeds the cap of {cap}")]
    ExponentCap { exp: u32, cap: u32, pos: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GammaError {
    #[error("degree-1 term `{0}` present; only homogeneous quadratics plus a constant are supported")]
    UnsupportedForm(String),
    #[error("Hamiltonian is not symmetric: |γ - γ†| = {gamma_asym:.3e}, Im(remainder) = {remainder_im:.3e}")]
    NonSymmetric { gamma_asym: f64, remainder_im: f64 },
}

/// Named real parameters bound into an expression.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamBindings(BTreeMap<String, f64>);

impl ParamBindings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a binding, rejecting names that are not identifiers or that
    /// collide with operator names or the imaginary unit.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ParseError> {
        if !is_identifier(name) || is_reserved(name) {
            return Err(ParseError::InvalidParameterName(name.to_string()));
        }
        self.0.insert(name.to_string(), value);
        Ok(())
    }

    pub fn with(mut self, name: &str, value: f64) -> Result<Self, ParseError> {
        self.set(name, value)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.0
    }
}

impl<'a> FromIterator<(&'a str, f64)> for ParamBindings {
    /// Panics on invalid names; use [`ParamBindings::set`] for untrusted input.
    fn from_iter<T: IntoIterator<Item = (&'a str, f64)>>(iter: T) -> Self {
        let mut b = ParamBindings::new();
        for (k, v) in iter {
            b.set(k, v).expect("valid parameter name");
        }
        b
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_reserved(name: &str) -> bool {
    if name == "i" || alias_symbol(name).is_some() {
        return true;
    }
    indexed_symbol(name).is_some()
}

fn alias_symbol(name: &str) -> Option<OpSymbol> {
    Some(match name {
        "x" => OpSymbol::x(0),
        "y" => OpSymbol::x(1),
        "z" => OpSymbol::x(2),
        "w" => OpSymbol::x(3),
        "p" | "px" => OpSymbol::p(0),
        "py" => OpSymbol::p(1),
        "pz" => OpSymbol::p(2),
        "pw" => OpSymbol::p(3),
        _ => return None,
    })
}

/// `x<n>` / `p<n>` with `n >= 1`.
fn indexed_symbol(name: &str) -> Option<OpSymbol> {
    let (head, digits) = name.split_at(1);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    let n: usize = digits.parse().ok()?;
    match head {
        "x" => Some(OpSymbol::x(n - 1)),
        "p" => Some(OpSymbol::p(n - 1)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, ch) = chars[i];
        match ch {
            c if c.is_whitespace() => i += 1,
            '+' => {
                out.push((Tok::Plus, pos));
                i += 1;
            }
            // ASCII hyphen and the typographic minus sign
            '-' | '\u{2212}' => {
                out.push((Tok::Minus, pos));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, pos));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, pos));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, pos));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, pos));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, pos));
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                    i += 1;
                }
                // optional exponent, only when followed by digits
                if i < chars.len() && (chars[i].1 == 'e' || chars[i].1 == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j].1 == '+' || chars[j].1 == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].1.is_ascii_digit() {
                        while j < chars.len() && chars[j].1.is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let end = chars.get(i).map_or(src.len(), |c| c.0);
                let text = &src[pos..end];
                let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    pos,
                    msg: format!("malformed number `{text}`"),
                })?;
                out.push((Tok::Num(v), pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                let end = chars.get(i).map_or(src.len(), |c| c.0);
                out.push((Tok::Ident(src[pos..end].to_string()), pos));
            }
            other => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
    k: usize,
    params: &'a ParamBindings,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.1)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn expr(&mut self) -> Result<OperatorPoly, ParseError> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            let neg = match t {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            acc = if neg { acc.sub(&rhs)? } else { acc.add(&rhs)? };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<OperatorPoly, ParseError> {
        let mut acc = self.unary()?;
        while let Some(t) = self.peek() {
            let pos = self.pos();
            match t {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = product(&acc, &rhs, pos)?;
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    if rhs.degree() > 0 {
                        return Err(ParseError::DivisionByOperator { pos });
                    }
                    let d = rhs.coeff(&crate::opalg::Monomial::identity());
                    if d == C64::new(0.0, 0.0) {
                        return Err(ParseError::DivisionByZero { pos });
                    }
                    acc = acc.scale(d.inv());
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<OperatorPoly, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                Ok(self.unary()?.scale(C64::new(-1.0, 0.0)))
            }
            Some(Tok::Plus) => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<OperatorPoly, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        let caret_pos = self.pos();
        self.bump();
        let pos = self.pos();
        let exp = match self.bump() {
            Some((Tok::Num(v), _)) if v.fract() == 0.0 && v >= 1.0 && v <= u32::MAX as f64 => v as u32,
            _ => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: "exponent must be an integer >= 1".into(),
                })
            }
        };
        if base.degree() > 0 && exp > MAX_OPERATOR_POWER {
            return Err(ParseError::Degree {
                degree: base.degree() * exp as usize,
                pos: caret_pos,
            });
        }
        if exp > MAX_SCALAR_POWER {
            return Err(ParseError::ExponentCap {
                exp,
                cap: MAX_SCALAR_POWER,
                pos,
            });
        }
        let mut acc = base.clone();
        for _ in 1..exp {
            acc = product(&acc, &base, caret_pos)?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<OperatorPoly, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some((Tok::Num(v), _)) => Ok(OperatorPoly::scalar(self.k, C64::new(v, 0.0))),
            Some((Tok::Ident(name), _)) => self.identifier(&name, pos),
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    _ => Err(ParseError::Syntax {
                        pos: self.toks.get(self.at - 1).map_or(self.end, |t| t.1),
                        msg: "expected `)`".into(),
                    }),
                }
            }
            Some((t, _)) => Err(ParseError::Syntax {
                pos,
                msg: format!("unexpected token {t:?}"),
            }),
            None => Err(ParseError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
        }
    }

    fn identifier(&self, name: &str, pos: usize) -> Result<OperatorPoly, ParseError> {
        if name == "i" {
            return Ok(OperatorPoly::scalar(self.k, C64::new(0.0, 1.0)));
        }
        let sym = if self.k <= 4 {
            alias_symbol(name).or_else(|| indexed_symbol(name))
        } else {
            indexed_symbol(name)
        };
        if let Some(s) = sym {
            if s.index >= self.k {
                return Err(ParseError::UnknownIdentifier {
                    name: name.to_string(),
                    pos,
                });
            }
            return Ok(OperatorPoly::symbol(self.k, s)?);
        }
        if is_reserved(name) {
            // an alias used with K > 4
            return Err(ParseError::UnknownIdentifier {
                name: name.to_string(),
                pos,
            });
        }
        match self.params.get(name) {
            Some(v) => Ok(OperatorPoly::scalar(self.k, C64::new(v, 0.0))),
            None => Err(ParseError::UnboundParameter {
                name: name.to_string(),
                pos,
            }),
        }
    }
}

fn product(a: &OperatorPoly, b: &OperatorPoly, pos: usize) -> Result<OperatorPoly, ParseError> {
    if a.degree() + b.degree() > 4 {
        return Err(ParseError::Degree {
            degree: a.degree() + b.degree(),
            pos,
        });
    }
    a.mul(b).map_err(|e| match e {
        AlgebraError::DegreeOverflow(degree) => ParseError::Degree { degree, pos },
        other => ParseError::Algebra(other),
    })
}

/// Parses `src` with the given parameter bindings over a basis of `k` modes.
pub fn parse(src: &str, params: &ParamBindings, k: usize) -> Result<OperatorPoly, ParseError> {
    if k == 0 {
        return Err(AlgebraError::EmptyBasis.into());
    }
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(ParseError::Syntax {
            pos: 0,
            msg: "empty expression".into(),
        });
    }
    let mut p = Parser {
        toks,
        at: 0,
        end: src.len(),
        k,
        params,
    };
    let out = p.expr()?;
    if p.at < p.toks.len() {
        return Err(ParseError::Syntax {
            pos: p.pos(),
            msg: "unexpected trailing input".into(),
        });
    }
    Ok(out)
}

/// Hermitian coefficient matrix of `H = Σ γ_ij O_i O_j + remainder` in the
/// basis `(x_1..x_K, p_1..p_K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix {
    pub k: usize,
    pub entries: DMatrix<C64>,
    pub scalar_remainder: C64,
}

impl GammaMatrix {
    pub fn dim(&self) -> usize {
        2 * self.k
    }

    /// Max-norm of `γ - γ†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.entries - self.entries.adjoint();
        d.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Rebuilds `Σ γ_ij O_i O_j + remainder` as a normal-ordered polynomial.
    pub fn to_operator(&self) -> OperatorPoly {
        let n = self.dim();
        let mut words = Vec::with_capacity(n * n + 1);
        for i in 0..n {
            for j in 0..n {
                let g = self.entries[(i, j)];
                if g != C64::new(0.0, 0.0) {
                    words.push((vec![OpSymbol::from_basis(i, self.k), OpSymbol::from_basis(j, self.k)], g));
                }
            }
        }
        words.push((Vec::new(), self.scalar_remainder));
        OperatorPoly::from_words(self.k, words).expect("quadratic words")
    }
}

/// Weyl-symmetrized γ of a quadratic polynomial, failing on non-symmetric input.
pub fn extract_gamma(poly: &OperatorPoly) -> Result<GammaMatrix, GammaError> {
    extract_gamma_with(poly, GAMMA_TOL, false)
}

/// As [`extract_gamma`]; with `permissive` set the Hermiticity check is skipped.
pub fn extract_gamma_with(poly: &OperatorPoly, tol: f64, permissive: bool) -> Result<GammaMatrix, GammaError> {
    let k = poly.k();
    let n = 2 * k;
    let mut g = DMatrix::<C64>::zeros(n, n);
    let mut rem = C64::new(0.0, 0.0);
    let half = C64::new(0.5, 0.0);
    for (m, &c) in poly.terms() {
        match m.0.as_slice() {
            [] => rem += c,
            [_] => return Err(GammaError::UnsupportedForm(m.to_string())),
            [a, b] => {
                let (i, j) = (a.basis_index(k), b.basis_index(k));
                if i == j {
                    g[(i, i)] += c;
                } else {
                    g[(i, j)] += c * half;
                    g[(j, i)] += c * half;
                    // x_m p_m = (x_m p_m + p_m x_m)/2 + i/2
                    if a.kind == OpKind::Position && b.kind == OpKind::Momentum && a.index == b.index {
                        rem += c * C64::new(0.0, 0.5);
                    }
                }
            }
            _ => unreachable!("public polynomials have degree <= 2"),
        }
    }
    let out = GammaMatrix {
        k,
        entries: g,
        scalar_remainder: rem,
    };
    if !permissive {
        let scale = out.entries.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let gamma_asym = out.hermiticity_defect();
        let remainder_im = rem.im.abs();
        if gamma_asym > tol * scale || remainder_im > tol * scale {
            return Err(GammaError::NonSymmetric {
                gamma_asym,
                remainder_im,
            });
        }
    }
    Ok(out)
}
