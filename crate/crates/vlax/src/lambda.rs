//! λ-polynomial calculus: bracket tables, the Master formula, and symbolic
//! axiom defects.
//!
//! A λ-bracket on generators is a [`BracketTable`]: one [`LambdaPoly`] per
//! ordered generator pair. [`master_bracket`] extends it to arbitrary
//! differential polynomials,
//!
//! ```text
//! {f_λ g} = Σ_{i,j,p,q} ∂g/∂u^{j,q} (λ+∂)^q {u^i_{λ+∂} u^j}_→ (−λ−∂)^p ∂f/∂u^{i,p},
//! ```
//!
//! where `_→` means the shifted parameter acts as the total derivative on
//! everything to its right. [`skew_defect`] and [`jacobi_defect`] measure the
//! failure of skew-symmetry and the Jacobi identity on generators; both vanish
//! exactly when the table defines a vertex Lie algebra structure.

use crate::diffpoly::{DiffPoly, JetVar, Q, Ring};
use num::Zero;
use std::collections::BTreeMap;
use std::fmt;

/// Polynomial in the formal parameter λ with [`DiffPoly`] coefficients.
///
/// Invariant: the highest stored coefficient is nonzero (zero is the empty
/// coefficient list).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaPoly {
    ring: Ring,
    coeffs: Vec<DiffPoly>,
}

impl LambdaPoly {
    pub fn zero(ring: &Ring) -> Self {
        LambdaPoly {
            ring: ring.clone(),
            coeffs: Vec::new(),
        }
    }

    pub fn constant(p: DiffPoly) -> Self {
        let ring = p.ring().clone();
        let mut lp = LambdaPoly {
            ring,
            coeffs: vec![p],
        };
        lp.trim();
        lp
    }

    pub fn from_coeffs(ring: &Ring, coeffs: Vec<DiffPoly>) -> Self {
        let mut lp = LambdaPoly {
            ring: ring.clone(),
            coeffs,
        };
        lp.trim();
        lp
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in λ; zero polynomial reports 0.
    pub fn lambda_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficient of λ^n (zero when absent).
    pub fn coeff(&self, n: usize) -> DiffPoly {
        self.coeffs.get(n).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn coeffs(&self) -> &[DiffPoly] {
        &self.coeffs
    }

    /// Evaluation at λ = 0.
    pub fn at_zero(&self) -> DiffPoly {
        self.coeff(0)
    }

    pub fn add(&self, other: &LambdaPoly) -> LambdaPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| &self.coeff(k) + &other.coeff(k)).collect();
        LambdaPoly::from_coeffs(&self.ring, coeffs)
    }

    pub fn sub(&self, other: &LambdaPoly) -> LambdaPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| &self.coeff(k) - &other.coeff(k)).collect();
        LambdaPoly::from_coeffs(&self.ring, coeffs)
    }

    pub fn neg(&self) -> LambdaPoly {
        LambdaPoly::from_coeffs(&self.ring, self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, c: &Q) -> LambdaPoly {
        LambdaPoly::from_coeffs(&self.ring, self.coeffs.iter().map(|a| a.scale(c)).collect())
    }

    /// Multiply every coefficient by a λ-free polynomial.
    pub fn mul_poly(&self, p: &DiffPoly) -> LambdaPoly {
        LambdaPoly::from_coeffs(&self.ring, self.coeffs.iter().map(|c| c * p).collect())
    }

    /// Product of two λ-polynomials (λ commutes with coefficients).
    pub fn mul(&self, other: &LambdaPoly) -> LambdaPoly {
        if self.is_zero() || other.is_zero() {
            return LambdaPoly::zero(&self.ring);
        }
        let mut coeffs = vec![self.ring.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (a, ca) in self.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in other.coeffs.iter().enumerate() {
                coeffs[a + b] = &coeffs[a + b] + &(ca * cb);
            }
        }
        LambdaPoly::from_coeffs(&self.ring, coeffs)
    }

    /// Multiply by λ.
    pub fn shift_up(&self) -> LambdaPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(self.ring.zero());
        coeffs.extend(self.coeffs.iter().cloned());
        LambdaPoly::from_coeffs(&self.ring, coeffs)
    }

    /// Apply `(λ + ∂)` once, the total derivative acting on coefficients.
    pub fn apply_lambda_plus_d(&self) -> LambdaPoly {
        let shifted = self.shift_up();
        let derived = LambdaPoly::from_coeffs(
            &self.ring,
            self.coeffs.iter().map(|c| c.total_derivative()).collect(),
        );
        shifted.add(&derived)
    }

    /// Apply `(−λ − ∂)` once.
    pub fn apply_neg_lambda_minus_d(&self) -> LambdaPoly {
        self.apply_lambda_plus_d().neg()
    }

    /// Apply `(±(λ + ∂))^n`.
    pub fn apply_shift_pow(&self, n: u32, positive: bool) -> LambdaPoly {
        let mut acc = self.clone();
        for _ in 0..n {
            acc = if positive {
                acc.apply_lambda_plus_d()
            } else {
                acc.apply_neg_lambda_minus_d()
            };
        }
        acc
    }

    /// Substitute λ ↦ −λ−∂ with the operator acting on the coefficients:
    /// `Σ c_n λ^n ↦ Σ (−λ−∂)^n c_n`. This is the substitution appearing in
    /// the skew-symmetry axiom `{a_λ b} = −{b_{−λ−∂} a}`.
    pub fn substitute_neg_lambda_minus_d(&self) -> LambdaPoly {
        let mut acc = LambdaPoly::zero(&self.ring);
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = LambdaPoly::constant(c.clone()).apply_shift_pow(n as u32, false);
            acc = acc.add(&term);
        }
        acc
    }

    /// Substitute λ ↦ λ+μ by binomial re-expansion into a two-parameter value.
    pub fn substitute_lambda_plus_mu(&self) -> BiLambdaPoly {
        let mut out = BiLambdaPoly::zero(&self.ring);
        for (m, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for s in 0..=m {
                let b = binomial(m as u64, s as u64);
                out.add_term(s, m - s, c.scale(&Q::from_integer(b.into())));
            }
        }
        out
    }
}

impl fmt::Display for LambdaPoly {
    /// `(c0) + (c1)*L + (c2)*L^2 ...` with `L` for λ; zero coefficients are
    /// skipped and the zero value prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            match n {
                0 => {}
                1 => write!(f, "*L")?,
                _ => write!(f, "*L^{}", n)?,
            }
        }
        Ok(())
    }
}

/// Polynomial in two formal parameters λ (`L`) and μ (`M`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiLambdaPoly {
    ring: Ring,
    coeffs: BTreeMap<(usize, usize), DiffPoly>,
}

impl BiLambdaPoly {
    pub fn zero(ring: &Ring) -> Self {
        BiLambdaPoly {
            ring: ring.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, lpow: usize, mpow: usize, c: DiffPoly) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry((lpow, mpow)) {
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

    pub fn sub_assign(&mut self, other: &BiLambdaPoly) {
        for (&(a, b), c) in &other.coeffs {
            self.add_term(a, b, -c);
        }
    }

    pub fn add_assign(&mut self, other: &BiLambdaPoly) {
        for (&(a, b), c) in &other.coeffs {
            self.add_term(a, b, c.clone());
        }
    }

    pub fn coeff(&self, lpow: usize, mpow: usize) -> DiffPoly {
        self.coeffs
            .get(&(lpow, mpow))
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &DiffPoly)> {
        self.coeffs.iter()
    }
}

impl fmt::Display for BiLambdaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(a, b), c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            match a {
                0 => {}
                1 => write!(f, "*L")?,
                _ => write!(f, "*L^{}", a)?,
            }
            match b {
                0 => {}
                1 => write!(f, "*M")?,
                _ => write!(f, "*M^{}", b)?,
            }
        }
        Ok(())
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Generalized binomial coefficient C(m, n) for integer m (possibly negative).
pub fn binomial_signed(m: i64, n: u32) -> Q {
    let mut acc = Q::from_integer(1.into());
    for i in 0..n as i64 {
        acc *= Q::from_integer((m - i).into());
        acc /= Q::from_integer((i + 1).into());
    }
    acc
}

/// λ-bracket table on generators: `entries[i*ℓ+j] = {u^i_λ u^j}` together with
/// the level used to build it.
///
/// Brackets of derivative variables are never stored; they are produced on
/// demand by sesquilinearity (see [`derived_bracket`]).
#[derive(Clone, Debug, PartialEq)]
pub struct BracketTable {
    ring: Ring,
    level: Q,
    entries: Vec<LambdaPoly>,
}

impl BracketTable {
    pub fn from_entries(ring: &Ring, level: Q, entries: Vec<LambdaPoly>) -> Self {
        let l = ring.n_gens();
        assert_eq!(entries.len(), l * l, "need one entry per ordered pair");
        BracketTable {
            ring: ring.clone(),
            level,
            entries,
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn level(&self) -> &Q {
        &self.level
    }

    pub fn n_gens(&self) -> usize {
        self.ring.n_gens()
    }

    /// `{u^i_λ u^j}`.
    pub fn entry(&self, i: usize, j: usize) -> &LambdaPoly {
        &self.entries[i * self.n_gens() + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: LambdaPoly) {
        let l = self.n_gens();
        self.entries[i * l + j] = v;
    }

    /// Bracket of two fiber vectors given by generator coefficients:
    /// `{Σ aᵢuⁱ_λ Σ bⱼuʲ}` by bilinearity. Constant (vacuum) components
    /// bracket to zero and are ignored by the caller.
    pub fn bracket_linear(&self, a: &[Q], b: &[Q]) -> LambdaPoly {
        let mut acc = LambdaPoly::zero(&self.ring);
        for (i, ca) in a.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (j, cb) in b.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                acc = acc.add(&self.entry(i, j).scale(&(ca * cb)));
            }
        }
        acc
    }
}

/// `b(λ+σ∂)_→ target`: substitute the bracket parameter of `b` by `λ+∂`
/// (σ = +1) or `−λ−∂` (σ = −1) with the total derivative acting on everything
/// to the right, i.e. on the target.
pub fn shift_apply(b: &LambdaPoly, target: &LambdaPoly, positive: bool) -> LambdaPoly {
    assert!(b.ring() == target.ring(), "dimension error: mixed rings in shift_apply");
    let mut acc = LambdaPoly::zero(b.ring());
    // iteratively maintain (±(λ+∂))^n target
    let mut shifted = target.clone();
    for n in 0..b.coeffs().len() {
        if n > 0 {
            shifted = shifted.apply_shift_pow(1, positive);
        }
        let c = b.coeff(n);
        if !c.is_zero() {
            acc = acc.add(&shifted.mul_poly(&c));
        }
    }
    acc
}

/// Convenience wrapper for λ-free targets.
pub fn shift_apply_poly(b: &LambdaPoly, target: &DiffPoly, positive: bool) -> LambdaPoly {
    shift_apply(b, &LambdaPoly::constant(target.clone()), positive)
}

/// The Master formula: extend the generator table to arbitrary differential
/// polynomials.
pub fn master_bracket(f: &DiffPoly, g: &DiffPoly, t: &BracketTable) -> LambdaPoly {
    assert!(
        f.ring() == t.ring() && g.ring() == t.ring(),
        "dimension error: operands must live in the table's ring"
    );
    let l = t.n_gens();
    let ring = t.ring();
    let max_p = f.max_jet_order();
    let max_q = g.max_jet_order();
    let mut acc = LambdaPoly::zero(ring);
    for i in 0..l {
        for p in 0..=max_p {
            let df = f.partial_derivative(JetVar::new(i, p));
            if df.is_zero() {
                continue;
            }
            // (−λ−∂)^p ∂f/∂u^{i,p}
            let x1 = LambdaPoly::constant(df).apply_shift_pow(p, false);
            for j in 0..l {
                let entry = t.entry(i, j);
                if entry.is_zero() {
                    continue;
                }
                // {u^i_{λ+∂} u^j}_→ applied to x1
                let x2 = shift_apply(entry, &x1, true);
                if x2.is_zero() {
                    continue;
                }
                // ascending q, applying (λ+∂) incrementally
                let mut x3 = x2;
                for q in 0..=max_q {
                    if q > 0 {
                        x3 = x3.apply_lambda_plus_d();
                    }
                    let dg = g.partial_derivative(JetVar::new(j, q));
                    if dg.is_zero() {
                        continue;
                    }
                    acc = acc.add(&x3.mul_poly(&dg));
                }
            }
        }
    }
    acc
}

/// Skew-symmetry defect per ordered pair: `{u^i_λ u^j} + {u^j_{−λ−∂} u^i}`.
/// The zero map characterizes skew-symmetric tables.
pub fn skew_defect(t: &BracketTable) -> Vec<((usize, usize), LambdaPoly)> {
    let l = t.n_gens();
    let mut out = Vec::new();
    for i in 0..l {
        for j in 0..l {
            let d = t
                .entry(i, j)
                .add(&t.entry(j, i).substitute_neg_lambda_minus_d());
            out.push(((i, j), d));
        }
    }
    out
}

/// Jacobi defect for one generator triple:
/// `{u^i_λ {u^j_μ u^k}} − {u^j_μ {u^i_λ u^k}} − {{u^i_λ u^j}_{λ+μ} u^k}`.
pub fn jacobi_defect(t: &BracketTable, i: usize, j: usize, k: usize) -> BiLambdaPoly {
    let l = t.n_gens();
    assert!(i < l && j < l && k < l, "generator index out of range");
    let ring = t.ring();
    let ui = ring.gen(i);
    let uj = ring.gen(j);
    let mut out = BiLambdaPoly::zero(ring);

    // {u^i_λ {u^j_μ u^k}}: inner coefficients bracketed in λ, μ-power kept
    for (m, c) in t.entry(j, k).coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let lp = master_bracket(&ui, c, t);
        for (a, ca) in lp.coeffs().iter().enumerate() {
            out.add_term(a, m, ca.clone());
        }
    }
    // − {u^j_μ {u^i_λ u^k}}
    for (m, c) in t.entry(i, k).coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let lp = master_bracket(&uj, c, t);
        for (a, ca) in lp.coeffs().iter().enumerate() {
            out.add_term(m, a, -ca);
        }
    }
    // − {{u^i_λ u^j}_{λ+μ} u^k}: coefficients bracketed at parameter λ+μ,
    // the λ-power of the inner bracket kept as a λ-power
    for (n, c) in t.entry(i, j).coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mb = master_bracket(c, &ring.gen(k), t);
        let expanded = mb.substitute_lambda_plus_mu();
        for (&(a, b), cc) in expanded.terms() {
            out.add_term(a + n, b, -cc);
        }
    }
    out
}

/// Bracket of derivative variables `{u^{k,r}_λ u^{l,s}}`, produced from the
/// generator entry by sesquilinearity: multiply by `(−λ)^r` for the first
/// slot and apply `(λ+∂)^s` for the second.
pub fn derived_bracket(t: &BracketTable, a: JetVar, b: JetVar) -> LambdaPoly {
    let base = t.entry(a.gen, b.gen).clone();
    // first slot: {∂^r x_λ y} = (−λ)^r {x_λ y}
    let mut v = base;
    for _ in 0..a.order {
        v = v.shift_up().neg();
    }
    // second slot: {x_λ ∂^s y} = (λ+∂)^s {x_λ y}
    v.apply_shift_pow(b.order, true)
}
