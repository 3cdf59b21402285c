//! Poisson vertex algebra layer: Poisson structure matrices, axiom reports,
//! and λ-bracket center computation.
//!
//! The Poisson structure of a skew-symmetric table is the matrix differential
//! operator `H_ij(∂) = {u^j_{∂+λ} u^i}_→ |_{λ=0}`, oriented so that
//! `Σ_j H_ij(∂)(δh/δu^j) = {h_λ u^i}|_{λ=0}` holds exactly. A global sign
//! convention σ is applied only at the flow and display layers (see the
//! `aks` and `export` modules), never here.

use crate::diffpoly::{DiffPoly, Q, Ring};
use crate::lambda::{jacobi_defect, master_bracket, skew_defect, BiLambdaPoly, BracketTable, LambdaPoly};
use crate::linalg;
use num::{One, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum PvaError {
    #[error("table is not skew-symmetric; offending pairs: {0}")]
    NotSkew(String),
}

/// Matrix of differential operators; entry `(i, j)` is a polynomial in ∂
/// with coefficients multiplying from the left: `Σ_s c_s ∂^s(·)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonMatrix {
    ring: Ring,
    /// entries[i][j][s] = coefficient of ∂^s in H_ij(∂)
    entries: Vec<Vec<Vec<DiffPoly>>>,
}

impl PoissonMatrix {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn n_gens(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &[DiffPoly] {
        &self.entries[i][j]
    }

    /// `H_ij(∂)` applied to a polynomial.
    pub fn apply_entry(&self, i: usize, j: usize, x: &DiffPoly) -> DiffPoly {
        let mut acc = self.ring.zero();
        let mut dx = x.clone();
        for (s, c) in self.entries[i][j].iter().enumerate() {
            if s > 0 {
                dx = dx.total_derivative();
            }
            if !c.is_zero() {
                acc = &acc + &(c * &dx);
            }
        }
        acc
    }

    /// `(H δ)_i = Σ_j H_ij(∂)(δ_j)` for a vector of variational derivatives.
    pub fn apply(&self, delta: &[DiffPoly]) -> Vec<DiffPoly> {
        (0..self.n_gens())
            .map(|i| {
                let mut acc = self.ring.zero();
                for (j, d) in delta.iter().enumerate() {
                    acc = &acc + &self.apply_entry(i, j, d);
                }
                acc
            })
            .collect()
    }

    /// Entrywise negation.
    pub fn negated(&self) -> PoissonMatrix {
        PoissonMatrix {
            ring: self.ring.clone(),
            entries: self
                .entries
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| e.iter().map(|c| -c).collect())
                        .collect()
                })
                .collect(),
        }
    }

    /// Entry transpose: the matrix in the opposite index convention
    /// `H_ij(∂) = {u^i_{∂+λ} u^j}_→ |_{λ=0}`. For ultralocal skew matrices
    /// this is the global negation; diagonal ∂-entries keep their sign.
    pub fn transposed(&self) -> PoissonMatrix {
        let n = self.n_gens();
        PoissonMatrix {
            ring: self.ring.clone(),
            entries: (0..n)
                .map(|i| (0..n).map(|j| self.entries[j][i].clone()).collect())
                .collect(),
        }
    }

    /// Formal adjoint of entry `(i, j)`: `(c ∂^s)* = (−∂)^s ∘ c`, expanded
    /// back into left-coefficient form.
    pub fn adjoint_entry(&self, i: usize, j: usize) -> Vec<DiffPoly> {
        let src = &self.entries[i][j];
        let deg = src.len();
        let mut out: Vec<DiffPoly> = vec![self.ring.zero(); deg.max(1)];
        for (s, c) in src.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // (−∂)^s ∘ c = Σ_t (−1)^s C(s,t) ∂^{s−t}(c) ∂^t
            for t in 0..=s {
                let mut d = c.iterated_total_derivative((s - t) as u32);
                let bin = crate::lambda::binomial(s as u64, t as u64);
                d = d.scale(&Q::from_integer(bin.into()));
                if s % 2 == 1 {
                    d = -&d;
                }
                out[t] = &out[t] + &d;
            }
        }
        while matches!(out.last(), Some(c) if c.is_zero()) {
            out.pop();
        }
        out
    }

    /// Formal skew-adjointness `H* = −H`, exhaustively over entries.
    pub fn is_formally_skew_adjoint(&self) -> bool {
        let n = self.n_gens();
        for i in 0..n {
            for j in 0..n {
                let adj = self.adjoint_entry(i, j);
                let neg: Vec<DiffPoly> = self.entries[j][i].iter().map(|c| -c).collect();
                let len = adj.len().max(neg.len());
                for s in 0..len {
                    let a = adj.get(s).cloned().unwrap_or_else(|| self.ring.zero());
                    let b = neg.get(s).cloned().unwrap_or_else(|| self.ring.zero());
                    if a != b {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Assemble the Poisson structure of a skew-symmetric bracket table.
pub fn poisson_matrix(t: &BracketTable) -> Result<PoissonMatrix, PvaError> {
    let bad: Vec<String> = skew_defect(t)
        .into_iter()
        .filter(|(_, d)| !d.is_zero())
        .map(|((i, j), _)| format!("({}, {})", t.ring().name(i), t.ring().name(j)))
        .collect();
    if !bad.is_empty() {
        return Err(PvaError::NotSkew(bad.join(", ")));
    }
    let n = t.n_gens();
    let entries = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| t.entry(j, i).coeffs().to_vec())
                .collect()
        })
        .collect();
    Ok(PoissonMatrix {
        ring: t.ring().clone(),
        entries,
    })
}

/// Per-pair skew defects and per-triple Jacobi defects of a table.
#[derive(Clone, Debug, Default)]
pub struct AxiomsReport {
    pub skew_failures: Vec<((usize, usize), LambdaPoly)>,
    pub jacobi_failures: Vec<((usize, usize, usize), BiLambdaPoly)>,
    pub names: Vec<String>,
}

impl AxiomsReport {
    pub fn pass(&self) -> bool {
        self.skew_failures.is_empty() && self.jacobi_failures.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.pass() {
            return "all skew and Jacobi defects vanish".to_string();
        }
        let name = |i: usize| self.names.get(i).cloned().unwrap_or_else(|| i.to_string());
        let mut parts = Vec::new();
        if !self.skew_failures.is_empty() {
            let pairs: Vec<String> = self
                .skew_failures
                .iter()
                .map(|((i, j), _)| format!("({}, {})", name(*i), name(*j)))
                .collect();
            parts.push(format!("skew fails at {}", pairs.join(", ")));
        }
        if !self.jacobi_failures.is_empty() {
            let triples: Vec<String> = self
                .jacobi_failures
                .iter()
                .map(|((i, j, k), _)| format!("({}, {}, {})", name(*i), name(*j), name(*k)))
                .collect();
            parts.push(format!("Jacobi fails at {}", triples.join(", ")));
        }
        parts.join("; ")
    }
}

impl fmt::Display for AxiomsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pass() {
            return write!(f, "PASS: {}", self.summary());
        }
        writeln!(f, "FAIL: {}", self.summary())?;
        for ((i, j), d) in &self.skew_failures {
            writeln!(f, "  skew ({}, {}): {}", self.names[*i], self.names[*j], d)?;
        }
        for ((i, j, k), d) in &self.jacobi_failures {
            writeln!(
                f,
                "  jacobi ({}, {}, {}): {}",
                self.names[*i], self.names[*j], self.names[*k], d
            )?;
        }
        Ok(())
    }
}

/// Exhaustive skew and Jacobi defects over generator pairs and triples.
pub fn axioms_report(t: &BracketTable) -> AxiomsReport {
    let n = t.n_gens();
    let skew_failures: Vec<_> = skew_defect(t)
        .into_iter()
        .filter(|(_, d)| !d.is_zero())
        .collect();
    let mut jacobi_failures = Vec::new();
    // Jacobi only needs checking when skew holds; still collect all triples
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let d = jacobi_defect(t, i, j, k);
                if !d.is_zero() {
                    jacobi_failures.push(((i, j, k), d));
                }
            }
        }
    }
    AxiomsReport {
        skew_failures,
        jacobi_failures,
        names: t.ring().names().to_vec(),
    }
}

/// Basis of the λ-bracket center in jet order 0 up to total degree `d`:
/// all `P` with `{P_λ u^j} = 0` for every generator.
///
/// The span is closed under multiplication, and the total derivatives `∂^r P`
/// of its members are central as well (they live in higher jet order and are
/// not enumerated here).
pub fn center_find(t: &BracketTable, d: u32) -> Vec<DiffPoly> {
    let ring = t.ring();
    let n = t.n_gens();
    let monos = monomials_up_to(n, d);
    // For each generator j, expand {m_λ u^j} for every candidate monomial m
    // and collect the coefficients of each (generator, λ-power, monomial)
    // triple into one linear constraint row.
    let mut row_map: std::collections::BTreeMap<(usize, usize, String), Vec<Q>> =
        Default::default();
    for (ci, m) in monos.iter().enumerate() {
        let p = monomial_poly(ring, m);
        for j in 0..n {
            let lp = master_bracket(&p, &ring.gen(j), t);
            for (pow, c) in lp.coeffs().iter().enumerate() {
                for (mono, coeff) in c.terms() {
                    let key = (j, pow, format!("{:?}", mono));
                    let row = row_map
                        .entry(key)
                        .or_insert_with(|| vec![Q::zero(); monos.len()]);
                    row[ci] = &row[ci] + coeff;
                }
            }
        }
    }
    let rows: Vec<Vec<Q>> = row_map.into_values().collect();
    let kernel = if rows.is_empty() {
        (0..monos.len())
            .map(|i| {
                let mut v = vec![Q::zero(); monos.len()];
                v[i] = Q::one();
                v
            })
            .collect()
    } else {
        linalg::kernel_fraction_free(&rows)
    };
    kernel
        .into_iter()
        .map(|v| {
            let mut p = ring.zero();
            for (ci, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    p = &p + &monomial_poly(ring, &monos[ci]).scale(c);
                }
            }
            p
        })
        .collect()
}

fn monomial_poly(ring: &Ring, exps: &[u32]) -> DiffPoly {
    let mut p = ring.one();
    for (g, &e) in exps.iter().enumerate() {
        if e > 0 {
            p = &p * &ring.gen(g).powi(e);
        }
    }
    p
}

fn monomials_up_to(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=d {
            prefix.push(e);
            rec(n, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::new(), &mut out);
    out
}
