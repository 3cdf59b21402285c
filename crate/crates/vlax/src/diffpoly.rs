//! Exact differential polynomial ring in jet variables.
//!
//! The carrier type is [`DiffPoly`]: a sparse multivariate polynomial over
//! arbitrary-precision rationals in the jet variables `u^{i,n}` (the `n`-th
//! total derivative of the `i`-th generator). On top of the commutative ring
//! structure it provides the three derivations the rest of the crate is built
//! from: the total derivative `∂`, the formal partials `∂/∂u^{i,n}`, and the
//! variational derivative `δ/δu^i = Σ_p (−∂)^p ∂/∂u^{i,p}`.
//!
//! Values are canonical (no zero coefficients, monomial keys sorted under a
//! fixed total order), so structural equality is mathematical equality.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;
use thiserror::Error;

/// Exact rational scalar used everywhere in the crate.
pub type Q = BigRational;

/// Rational from a numerator/denominator pair.
pub fn q(num: i64, den: i64) -> Q {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

/// A jet variable `u^{i,n}`: generator index `gen` and derivative order `order`.
///
/// The derived `Ord` (generator major, order minor) is the variable order the
/// canonical monomial order is built on.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct JetVar {
    pub gen: usize,
    pub order: u32,
}

impl JetVar {
    pub fn new(gen: usize, order: u32) -> Self {
        JetVar { gen, order }
    }
}

/// Monomial: multiset of jet variables, stored as a sorted list of
/// (variable, positive exponent) pairs.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<(JetVar, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: JetVar) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: JetVar) -> u32 {
        self.0
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn vars(&self) -> impl Iterator<Item = (JetVar, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn max_order(&self) -> u32 {
        self.0.iter().map(|&(v, _)| v.order).max().unwrap_or(0)
    }

    pub fn max_gen(&self) -> Option<usize> {
        self.0.iter().map(|&(v, _)| v.gen).max()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0, self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Divide by one power of `v`; returns `None` if `v` does not occur.
    fn div_var(&self, v: JetVar) -> Option<Monomial> {
        let idx = self.0.iter().position(|&(w, _)| w == v)?;
        let mut out = self.0.clone();
        if out[idx].1 == 1 {
            out.remove(idx);
        } else {
            out[idx].1 -= 1;
        }
        Some(Monomial(out))
    }

    fn mul_var(&self, v: JetVar) -> Monomial {
        self.mul(&Monomial::var(v))
    }
}

/// Canonical monomial order: lexicographic over the variable order of
/// [`JetVar`], higher exponents first. Iteration of a polynomial's term map
/// therefore yields the leading term first and the constant term last.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                // remaining variables in `other` only: other has a positive
                // exponent on an earlier-or-later var where self has 0
                (None, Some(_)) => return Ordering::Greater,
                (Some(_), None) => return Ordering::Less,
                (Some(&(va, ea)), Some(&(vb, eb))) => match va.cmp(&vb) {
                    // self has positive exponent on the smaller variable
                    Ordering::Less => return Ordering::Less,
                    Ordering::Greater => return Ordering::Greater,
                    Ordering::Equal => {
                        if ea != eb {
                            // larger exponent first
                            return eb.cmp(&ea);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug)]
struct RingInner {
    names: Vec<String>,
}

/// Ambient ring `𝒫_ℓ`: fixes the number of generators and their print names.
///
/// Cheap to clone (shared pointer). Two rings are compatible when they have
/// the same generator names; mixing values from incompatible rings panics.
#[derive(Clone, Debug)]
pub struct Ring(Arc<RingInner>);

impl Ring {
    pub fn new<S: Into<String>>(names: Vec<S>) -> Ring {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        assert!(!names.is_empty(), "ring needs at least one generator");
        Ring(Arc::new(RingInner { names }))
    }

    pub fn n_gens(&self) -> usize {
        self.0.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn name(&self, gen: usize) -> &str {
        &self.0.names[gen]
    }

    pub fn zero(&self) -> DiffPoly {
        DiffPoly {
            ring: self.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(&self) -> DiffPoly {
        self.constant(Q::one())
    }

    pub fn constant(&self, c: Q) -> DiffPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        DiffPoly {
            ring: self.clone(),
            terms,
        }
    }

    /// The generator `u^i` as a polynomial.
    pub fn gen(&self, i: usize) -> DiffPoly {
        self.jet(i, 0)
    }

    /// The jet variable `u^{i,order}` as a polynomial.
    pub fn jet(&self, i: usize, order: u32) -> DiffPoly {
        assert!(i < self.n_gens(), "generator index out of range");
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(JetVar::new(i, order)), Q::one());
        DiffPoly {
            ring: self.clone(),
            terms,
        }
    }

    /// Linear combination of order-0 generators plus a constant.
    pub fn linear(&self, constant: Q, coeffs: &[Q]) -> DiffPoly {
        assert_eq!(coeffs.len(), self.n_gens());
        let mut p = self.constant(constant);
        for (i, c) in coeffs.iter().enumerate() {
            p = &p + &self.gen(i).scale(c);
        }
        p
    }

    fn same(&self, other: &Ring) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.names == other.0.names
    }
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}
impl Eq for Ring {}

/// Sparse differential polynomial with rational coefficients.
///
/// Canonical form invariant: no zero coefficients are stored, and the term
/// map is keyed by the fixed monomial order, so `==` decides mathematical
/// equality and `Display` output is deterministic.
#[derive(Clone, Debug)]
pub struct DiffPoly {
    ring: Ring,
    terms: BTreeMap<Monomial, Q>,
}

impl PartialEq for DiffPoly {
    fn eq(&self, other: &Self) -> bool {
        self.ring.same(&other.ring) && self.terms == other.terms
    }
}
impl Eq for DiffPoly {}

impl DiffPoly {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn constant_term(&self) -> Q {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Q::zero)
    }

    /// Polynomial with the constant term removed.
    pub fn without_constant(&self) -> DiffPoly {
        let mut terms = self.terms.clone();
        terms.remove(&Monomial::one());
        DiffPoly {
            ring: self.ring.clone(),
            terms,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Highest derivative order appearing in any term.
    pub fn max_jet_order(&self) -> u32 {
        self.terms.keys().map(|m| m.max_order()).max().unwrap_or(0)
    }

    pub fn coefficient(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    fn insert(terms: &mut BTreeMap<Monomial, Q>, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> DiffPoly {
        if c.is_zero() {
            return self.ring.zero();
        }
        DiffPoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn powi(&self, n: u32) -> DiffPoly {
        let mut acc = self.ring.one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Total derivative `∂`: `u^{i,n} ↦ u^{i,n+1}` extended by the Leibniz rule.
    pub fn total_derivative(&self) -> DiffPoly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            for (v, e) in m.vars() {
                let rest = m.div_var(v).expect("variable present");
                let bumped = rest.mul_var(JetVar::new(v.gen, v.order + 1));
                Self::insert(&mut terms, bumped, c * qi(e as i64));
            }
        }
        DiffPoly {
            ring: self.ring.clone(),
            terms,
        }
    }

    pub fn iterated_total_derivative(&self, n: u32) -> DiffPoly {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.total_derivative();
        }
        p
    }

    /// Formal partial derivative with respect to the jet variable `v`.
    pub fn partial_derivative(&self, v: JetVar) -> DiffPoly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e > 0 {
                let rest = m.div_var(v).expect("variable present");
                Self::insert(&mut terms, rest, c * qi(e as i64));
            }
        }
        DiffPoly {
            ring: self.ring.clone(),
            terms,
        }
    }

    /// Variational derivative `δ/δu^i = Σ_p (−∂)^p ∂/∂u^{i,p}`.
    ///
    /// Kills the image of [`DiffPoly::total_derivative`].
    pub fn variational_derivative(&self, gen: usize) -> DiffPoly {
        let mut acc = self.ring.zero();
        let max_p = self.max_jet_order();
        for p in 0..=max_p {
            let mut term = self.partial_derivative(JetVar::new(gen, p));
            if term.is_zero() {
                continue;
            }
            term = term.iterated_total_derivative(p);
            if p % 2 == 1 {
                term = -&term;
            }
            acc = &acc + &term;
        }
        acc
    }

    /// Decompose as `c₀ + Σ cᵢ u^i` if the value is affine-linear in the
    /// order-0 generators; `None` if any term is nonlinear or differentiated.
    pub fn as_linear(&self) -> Option<(Q, Vec<Q>)> {
        let mut constant = Q::zero();
        let mut coeffs = vec![Q::zero(); self.ring.n_gens()];
        for (m, c) in &self.terms {
            if m.is_one() {
                constant = c.clone();
            } else if m.degree() == 1 && m.max_order() == 0 {
                let (v, _) = m.vars().next().unwrap();
                coeffs[v.gen] = c.clone();
            } else {
                return None;
            }
        }
        Some((constant, coeffs))
    }

    /// Numeric evaluation with jet values supplied by `jet`.
    pub fn eval_f64(&self, jet: &dyn Fn(JetVar) -> f64) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for (v, e) in m.vars() {
                t *= jet(v).powi(e as i32);
            }
            acc += t;
        }
        acc
    }

    fn assert_same_ring(&self, other: &DiffPoly) {
        assert!(
            self.ring.same(&other.ring),
            "dimension error: values come from different ambient rings ({:?} vs {:?})",
            self.ring.names(),
            other.ring.names()
        );
    }
}

pub fn rational_to_f64(c: &Q) -> f64 {
    let num = c.numer();
    let den = c.denom();
    // exact for all coefficients appearing in practice
    let fnum: f64 = num.to_string().parse().unwrap_or(f64::NAN);
    let fden: f64 = den.to_string().parse().unwrap_or(f64::NAN);
    fnum / fden
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        self.assert_same_ring(rhs);
        let mut terms = self.terms.clone();
        for (m, c) in &rhs.terms {
            DiffPoly::insert(&mut terms, m.clone(), c.clone());
        }
        DiffPoly {
            ring: self.ring.clone(),
            terms,
        }
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        self.assert_same_ring(rhs);
        let mut terms = self.terms.clone();
        for (m, c) in &rhs.terms {
            DiffPoly::insert(&mut terms, m.clone(), -c.clone());
        }
        DiffPoly {
            ring: self.ring.clone(),
            terms,
        }
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        self.assert_same_ring(rhs);
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                DiffPoly::insert(&mut terms, ma.mul(mb), ca * cb);
            }
        }
        DiffPoly {
            ring: self.ring.clone(),
            terms,
        }
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &Q) -> fmt::Result {
    if c.denom().is_one() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

fn format_var(name: &str, order: u32) -> String {
    match order {
        0 => name.to_string(),
        1..=3 => format!("{}{}", name, "'".repeat(order as usize)),
        n => format!("{}^({})", name, n),
    }
}

impl fmt::Display for DiffPoly {
    /// Canonical text form: reduced-fraction coefficients, `*`-separated
    /// variables with prime marks for orders up to 3 and `name^(n)` beyond,
    /// terms in the canonical monomial order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write_rational(f, &abs)?;
                continue;
            }
            let mut lead = true;
            if !abs.is_one() {
                write_rational(f, &abs)?;
                lead = false;
            }
            for (v, e) in m.vars() {
                if !lead {
                    write!(f, "*")?;
                }
                lead = false;
                write!(f, "{}", format_var(self.ring.name(v.gen), v.order))?;
                if e > 1 {
                    write!(f, "^{}", e)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected character `{0}` at byte {1}")]
    UnexpectedChar(char, usize),
    #[error("unknown generator name `{0}`")]
    UnknownName(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected `{0}` at byte {1}")]
    Expected(char, usize),
    #[error("malformed number at byte {0}")]
    BadNumber(usize),
}

struct Parser<'a> {
    ring: &'a Ring,
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src.get(self.pos).map(|&b| b as char)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn expr(&mut self) -> Result<DiffPoly, ParseError> {
        let mut acc = match self.peek() {
            Some('-') => {
                self.bump();
                -&self.term()?
            }
            Some('+') => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                '-' => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<DiffPoly, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.bump();
                    acc = &acc * &self.factor()?;
                }
                // implicit multiplication before a parenthesis or a name
                Some('(') => acc = &acc * &self.factor()?,
                Some(c) if c.is_ascii_alphabetic() => acc = &acc * &self.factor()?,
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<DiffPoly, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            // `name^(n)` is a derivative order and is consumed inside `atom`;
            // reaching here the caret is a plain integer power
            self.bump();
            let n = self.integer()? as u32;
            return Ok(base.powi(n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<DiffPoly, ParseError> {
        match self.peek() {
            None => Err(ParseError::UnexpectedEnd),
            Some('(') => {
                self.bump();
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(ParseError::Expected(')', self.pos));
                }
                self.bump();
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.integer()?;
                if self.peek() == Some('/') {
                    self.bump();
                    let den = self.integer()?;
                    if den == 0 {
                        return Err(ParseError::BadNumber(self.pos));
                    }
                    Ok(self.ring.constant(q(num, den)))
                } else {
                    Ok(self.ring.constant(qi(num)))
                }
            }
            Some(c) if c.is_ascii_alphabetic() => self.variable(),
            Some(c) => Err(ParseError::UnexpectedChar(c, self.pos)),
        }
    }

    fn variable(&mut self) -> Result<DiffPoly, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos] as char;
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let gen = self
            .ring
            .names()
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ParseError::UnknownName(name.to_string()))?;
        // derivative marks: primes, or a parenthesized order `^(n)`
        let mut order = 0u32;
        while self.pos < self.src.len() && self.src[self.pos] as char == '\'' {
            order += 1;
            self.pos += 1;
        }
        if order == 0 && self.src.get(self.pos) == Some(&b'^') && self.src.get(self.pos + 1) == Some(&b'(') {
            self.pos += 2;
            order = self.integer()? as u32;
            if self.peek() != Some(')') {
                return Err(ParseError::Expected(')', self.pos));
            }
            self.bump();
        }
        Ok(self.ring.jet(gen, order))
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ParseError::BadNumber(self.pos));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ParseError::BadNumber(start))
    }
}

impl Ring {
    /// Parse the canonical text grammar back into a polynomial.
    pub fn parse(&self, src: &str) -> Result<DiffPoly, ParseError> {
        let mut p = Parser {
            ring: self,
            src: src.as_bytes(),
            pos: 0,
        };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(ParseError::UnexpectedChar(p.src[p.pos] as char, p.pos));
        }
        Ok(out)
    }
}
