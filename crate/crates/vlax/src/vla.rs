//! Affine vertex Lie algebras, classical R-matrices, twisted bracket tables,
//! Yang-Baxter defect checks, factorization data, and local Lie algebra
//! brackets.
//!
//! The generator bracket of the affine structure at level `k` is
//! `{x_λ y} = [x, y] + k (x|y) λ`. An [`RMatrix`] acts on the degree fiber
//! (one copy of the underlying algebra) and is extended degree-wise, which
//! realizes `[R, T] = 0` structurally. The twisted table is
//! `{a_λ b}_R = {R(a)_λ b} + {a_λ R(b)}`; both axiom defects are recomputed
//! for every twist and reported.

use crate::diffpoly::{qi, DiffPoly, Q, Ring};
use crate::lambda::{binomial_signed, BracketTable, LambdaPoly};
use crate::liealg::{Decomposition, LieAlgebraSpec};
use crate::linalg::{self, Matrix};
use crate::pva::{axioms_report, AxiomsReport};
use num::{One, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum VlaError {
    #[error("the untwisted affine table failed validation: {0}")]
    InvalidAffine(String),
    #[error("twisted table is not a vertex Lie algebra: {0}")]
    NotAnRMatrix(String),
    #[error("R-matrix output is not a fiber vector: {0}")]
    NotLinear(String),
    #[error("non-isotropic minus part requires level 0 (got {0})")]
    LevelRestriction(String),
    #[error("factorization inconsistency: {0}")]
    Factorization(String),
}

/// Affine vertex Lie algebra `v_k(g)`: the algebra, the level, and the
/// untwisted generator bracket table (validated at construction).
#[derive(Clone, Debug)]
pub struct AffineVla {
    pub algebra: LieAlgebraSpec,
    pub level: Q,
    pub ring: Ring,
    pub table: BracketTable,
}

impl AffineVla {
    pub fn new(algebra: LieAlgebraSpec, level: Q) -> Result<Self, VlaError> {
        let ring = algebra.ring();
        let n = algebra.dim();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut c0 = ring.zero();
                for (k, c) in algebra.bracket(i, j) {
                    c0 = &c0 + &ring.gen(*k).scale(c);
                }
                let c1 = ring.constant(&level * algebra.form_at(i, j));
                entries.push(LambdaPoly::from_coeffs(&ring, vec![c0, c1]));
            }
        }
        let table = BracketTable::from_entries(&ring, level.clone(), entries);
        let report = axioms_report(&table);
        if !report.pass() {
            return Err(VlaError::InvalidAffine(report.summary()));
        }
        Ok(AffineVla {
            algebra,
            level,
            ring,
            table,
        })
    }

    pub fn n_gens(&self) -> usize {
        self.algebra.dim()
    }
}

/// Classical R-matrix represented on the generator fiber, extended
/// degree-wise. `scalar` is the action on the vacuum line (the constants of
/// the symmetric algebra); `mybe_scale` records the rescaling that carries
/// the matrix onto the operator whose modified Yang-Baxter equation is the
/// `−{u_λ v}`-normalized one (2 for the factorizable ±1/2 projectors,
/// 1 otherwise).
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix {
    pub matrix: Matrix,
    pub scalar: Q,
    pub mybe_scale: Q,
}

impl RMatrix {
    pub fn from_matrix(matrix: Matrix) -> Self {
        RMatrix {
            matrix,
            scalar: Q::one(),
            mybe_scale: Q::one(),
        }
    }

    pub fn identity(n: usize) -> Self {
        RMatrix::from_matrix(linalg::identity(n))
    }

    pub fn zero(n: usize) -> Self {
        RMatrix {
            matrix: linalg::zeros(n, n),
            scalar: Q::zero(),
            mybe_scale: Q::one(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    /// Image of the `i`-th generator as a fiber coefficient vector.
    pub fn column(&self, i: usize) -> Vec<Q> {
        self.matrix.iter().map(|row| row[i].clone()).collect()
    }

    /// Apply to a polynomial that is affine-linear in the generators
    /// (a fiber vector plus a multiple of the vacuum line).
    pub fn apply_linear(&self, p: &DiffPoly) -> Result<DiffPoly, VlaError> {
        let ring = p.ring();
        let (constant, coeffs) = p
            .as_linear()
            .ok_or_else(|| VlaError::NotLinear(p.to_string()))?;
        let image = linalg::mat_vec(&self.matrix, &coeffs);
        let mut out = ring.constant(constant * &self.scalar);
        for (k, c) in image.iter().enumerate() {
            if !c.is_zero() {
                out = &out + &ring.gen(k).scale(c);
            }
        }
        Ok(out)
    }

    /// Apply coefficient-wise to a λ-polynomial with fiber-linear coefficients.
    pub fn apply_lambda(&self, lp: &LambdaPoly) -> Result<LambdaPoly, VlaError> {
        let coeffs: Result<Vec<DiffPoly>, VlaError> =
            lp.coeffs().iter().map(|c| self.apply_linear(c)).collect();
        Ok(LambdaPoly::from_coeffs(lp.ring(), coeffs?))
    }

    fn scaled(&self, s: &Q) -> RMatrix {
        RMatrix {
            matrix: linalg::mat_scale(&self.matrix, s),
            scalar: &self.scalar * s,
            mybe_scale: &self.mybe_scale / s,
        }
    }
}

/// Factorizable R-matrix `½(P₊ − P₋)` of a decomposition: acts as `+½` on
/// the plus part and `−½` on the minus part of each fiber, and as `+½` on
/// the vacuum line.
///
/// When the minus part is not isotropic the central terms obstruct the
/// construction away from level zero, so that case is rejected.
pub fn rmatrix_from_decomposition(v: &AffineVla, d: &Decomposition) -> Result<RMatrix, VlaError> {
    if !d.report.minus_isotropic && !v.level.is_zero() {
        return Err(VlaError::LevelRestriction(v.level.to_string()));
    }
    let n = v.n_gens();
    let mut basis: Matrix = linalg::zeros(n, n);
    for (c, vcol) in d.plus_basis.iter().chain(d.minus_basis.iter()).enumerate() {
        for r in 0..n {
            basis[r][c] = vcol[r].clone();
        }
    }
    let inv = linalg::inverse(&basis)
        .ok_or_else(|| VlaError::Factorization("decomposition basis is singular".into()))?;
    let half = Q::new(1.into(), 2.into());
    let mut diag = linalg::zeros(n, n);
    for i in 0..n {
        diag[i][i] = if i < d.plus_basis.len() {
            half.clone()
        } else {
            -half.clone()
        };
    }
    let matrix = linalg::mat_mul(&basis, &linalg::mat_mul(&diag, &inv));
    Ok(RMatrix {
        matrix,
        scalar: half,
        mybe_scale: qi(2),
    })
}

/// Twisted table together with its recomputed axiom report.
#[derive(Clone, Debug)]
pub struct TwistedTable {
    pub table: BracketTable,
    pub axioms: AxiomsReport,
}

impl TwistedTable {
    /// The table, provided it satisfies the vertex Lie algebra axioms;
    /// otherwise the offending pairs/triples are reported.
    pub fn validated(self) -> Result<BracketTable, VlaError> {
        if self.axioms.pass() {
            Ok(self.table)
        } else {
            Err(VlaError::NotAnRMatrix(self.axioms.summary()))
        }
    }
}

/// `{a_λ b}_R = {R(a)_λ b} + {a_λ R(b)}` on generators.
pub fn twisted_table(v: &AffineVla, r: &RMatrix) -> TwistedTable {
    let n = v.n_gens();
    let mut entries = Vec::with_capacity(n * n);
    let unit = |k: usize| {
        let mut u = vec![Q::zero(); n];
        u[k] = Q::one();
        u
    };
    for i in 0..n {
        for j in 0..n {
            let ri = r.column(i);
            let rj = r.column(j);
            let first = v.table.bracket_linear(&ri, &unit(j));
            let second = v.table.bracket_linear(&unit(i), &rj);
            entries.push(first.add(&second));
        }
    }
    let table = BracketTable::from_entries(&v.ring, v.level.clone(), entries);
    let axioms = axioms_report(&table);
    TwistedTable { table, axioms }
}

/// Which Yang-Baxter sufficiency condition to measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YbeKind {
    /// `{R(u)_λ R(v)} − R{u_λ v}_R = −{u_λ v}`
    Modified,
    /// `{R(u)_λ R(v)} − R{u_λ v}_R = 0`
    Constant,
}

/// Per-pair defect map of a generator-indexed check.
pub type PairDefects = Vec<((usize, usize), LambdaPoly)>;

/// Per-pair Yang-Baxter defect `{R(u^i)_λ R(u^j)} − R({u^i_λ u^j}_R) + {u^i_λ u^j}`
/// (the last term dropped for [`YbeKind::Constant`]).
///
/// The defect is evaluated for the `mybe_scale`-normalized operator, so a
/// factorizable `½(P₊ − P₋)` is tested through its `P₊ − P₋` form, the one
/// the `−{u_λ v}` normalization of the equation refers to.
pub fn ybe_defect(v: &AffineVla, r: &RMatrix, kind: YbeKind) -> Result<PairDefects, VlaError> {
    let scale = r.mybe_scale.clone();
    let rn = r.scaled(&scale);
    let n = v.n_gens();
    let twisted = {
        let mut entries = Vec::with_capacity(n * n);
        let unit = |k: usize| {
            let mut u = vec![Q::zero(); n];
            u[k] = Q::one();
            u
        };
        for i in 0..n {
            for j in 0..n {
                let first = v.table.bracket_linear(&rn.column(i), &unit(j));
                let second = v.table.bracket_linear(&unit(i), &rn.column(j));
                entries.push(first.add(&second));
            }
        }
        BracketTable::from_entries(&v.ring, v.level.clone(), entries)
    };
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let lhs = v.table.bracket_linear(&rn.column(i), &rn.column(j));
            let mid = rn.apply_lambda(twisted.entry(i, j))?;
            let mut defect = lhs.sub(&mid);
            if kind == YbeKind::Modified {
                defect = defect.add(v.table.entry(i, j));
            }
            out.push(((i, j), defect));
        }
    }
    Ok(out)
}

pub fn mybe_defect(v: &AffineVla, r: &RMatrix) -> Result<PairDefects, VlaError> {
    ybe_defect(v, r, YbeKind::Modified)
}

/// Fiber-level factorization data of an R-matrix: images `L_± = (R±1)L`,
/// kernels `𝓛_± = ker(R∓1)`, and the quotient map θ.
#[derive(Clone, Debug)]
pub struct FactorizationData {
    pub plus_image: Vec<Vec<Q>>,
    pub minus_image: Vec<Vec<Q>>,
    pub plus_kernel: Vec<Vec<Q>>,
    pub minus_kernel: Vec<Vec<Q>>,
    /// θ on quotient coordinates: plus quotient basis, minus quotient basis,
    /// and the matrix of θ between them
    pub theta: Matrix,
    pub plus_quotient_dim: usize,
}

fn shift_matrix(m: &Matrix, delta: &Q) -> Matrix {
    let mut out = m.clone();
    for i in 0..out.len() {
        out[i][i] = &out[i][i] + delta;
    }
    out
}

/// Unique splitting `x = x₊ − x₋` with `x₊ = (R+1)(x/2)`, `x₋ = (R−1)(x/2)`.
pub fn decompose_unique(r: &RMatrix, x: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let half = Q::new(1.into(), 2.into());
    let hx: Vec<Q> = x.iter().map(|c| c * &half).collect();
    let rx = linalg::mat_vec(&r.matrix, &hx);
    let plus: Vec<Q> = rx.iter().zip(&hx).map(|(a, b)| a + b).collect();
    let minus: Vec<Q> = rx.iter().zip(&hx).map(|(a, b)| a - b).collect();
    (plus, minus)
}

/// Compute the factorization data and verify its structural laws on the
/// fiber: the kernel containments `ker(R∓1) ⊆ (R±1)L` and bijectivity of the
/// quotient map θ. Violations indicate that the supplied operator is not an
/// R-matrix.
pub fn factorization_data(v: &AffineVla, r: &RMatrix) -> Result<FactorizationData, VlaError> {
    let one = Q::one();
    let rp = shift_matrix(&r.matrix, &one);
    let rm = shift_matrix(&r.matrix, &(-one));
    let plus_image = linalg::column_space(&rp);
    let minus_image = linalg::column_space(&rm);
    let plus_kernel = linalg::kernel(&rm);
    let minus_kernel = linalg::kernel(&rp);
    // 𝓛_± ⊆ L_±
    for k in &plus_kernel {
        if !linalg::in_span(&plus_image, k) {
            return Err(VlaError::Factorization(
                "ker(R−1) is not contained in (R+1)L".into(),
            ));
        }
    }
    for k in &minus_kernel {
        if !linalg::in_span(&minus_image, k) {
            return Err(VlaError::Factorization(
                "ker(R+1) is not contained in (R−1)L".into(),
            ));
        }
    }
    // Quotient coordinates: complete the kernel to the image, θ maps the
    // class of (R+1)u to the class of (R−1)u.
    let (plus_rep, plus_proj) = quotient_basis(&plus_image, &plus_kernel)?;
    let (minus_rep, minus_proj) = quotient_basis(&minus_image, &minus_kernel)?;
    if plus_rep.len() != minus_rep.len() {
        return Err(VlaError::Factorization(
            "quotients have different dimensions".into(),
        ));
    }
    let n = v.n_gens();
    // θ in quotient coordinates via representatives: for each quotient basis
    // vector w of L₊/𝓛₊, pick u with (R+1)u = w and record (R−1)u mod 𝓛₋.
    let mut theta_cols: Vec<Vec<Q>> = Vec::new();
    for w in &plus_rep {
        let u = solve(&rp, w).ok_or_else(|| {
            VlaError::Factorization("representative has no (R+1)-preimage".into())
        })?;
        let img = linalg::mat_vec(&rm, &u);
        theta_cols.push(minus_proj(&img));
    }
    let qd = plus_rep.len();
    let mut theta = linalg::zeros(qd, qd);
    for (c, col) in theta_cols.iter().enumerate() {
        for r_ in 0..qd {
            theta[r_][c] = col[r_].clone();
        }
    }
    if qd > 0 && linalg::inverse(&theta).is_none() {
        return Err(VlaError::Factorization("θ is not a bijection".into()));
    }
    let _ = (n, minus_rep, plus_proj);
    Ok(FactorizationData {
        plus_image,
        minus_image,
        plus_kernel,
        minus_kernel,
        theta,
        plus_quotient_dim: qd,
    })
}

/// Representatives completing `kernel` to a basis of `image`, plus the
/// projection of an image vector onto quotient coordinates.
#[allow(clippy::type_complexity)]
fn quotient_basis(
    image: &[Vec<Q>],
    kernel: &[Vec<Q>],
) -> Result<(Vec<Vec<Q>>, Box<dyn Fn(&[Q]) -> Vec<Q>>), VlaError> {
    let n = if let Some(v) = image.first() {
        v.len()
    } else {
        return Ok((Vec::new(), Box::new(|_: &[Q]| Vec::new())));
    };
    // greedily extend the kernel basis by image vectors
    let mut basis: Vec<Vec<Q>> = kernel.to_vec();
    let mut reps: Vec<Vec<Q>> = Vec::new();
    for v in image {
        if !linalg::in_span(&basis, v) {
            basis.push(v.clone());
            reps.push(v.clone());
        }
    }
    // coordinates: solve [kernel | reps] c = x, return the rep block
    let k = kernel.len();
    let cols: Matrix = (0..n)
        .map(|r| basis.iter().map(|b| b[r].clone()).collect())
        .collect();
    let reps_out = reps.clone();
    let proj = move |x: &[Q]| -> Vec<Q> {
        match solve(&cols, x) {
            Some(c) => c[k..].to_vec(),
            None => vec![Q::zero(); reps.len()],
        }
    };
    Ok((reps_out, Box::new(proj)))
}

/// Solve `A c = b` exactly; `None` when inconsistent.
fn solve(a: &Matrix, b: &[Q]) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut aug: Matrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.push(b[i].clone());
            r
        })
        .collect();
    let pivots = linalg::rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut c = vec![Q::zero(); cols];
    for (ri, &pc) in pivots.iter().enumerate() {
        c[pc] = aug[ri][cols].clone();
    }
    Some(c)
}

/// One term of a local Lie algebra bracket: a generator mode or the central
/// element.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalTerm {
    Gen { gen: usize, mode: i64 },
    Central,
}

impl fmt::Display for LocalTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalTerm::Gen { gen, mode } => write!(f, "g{}[{}]", gen, mode),
            LocalTerm::Central => write!(f, "K"),
        }
    }
}

/// Local Lie algebra bracket
/// `[a_[m], b_[k]] = Σ_{n≥0} C(m,n) (a_(n) b)_[m+k−n]`,
/// computed from a bracket table. Modes of the vacuum vanish except in
/// degree −1, which is the central element, so the `n = 1` coefficient
/// contributes `m·k·(a|b)·K` exactly when `m + k = 0`.
pub fn local_bracket(
    t: &BracketTable,
    a: usize,
    m: i64,
    b: usize,
    k: i64,
) -> Vec<(LocalTerm, Q)> {
    let entry = t.entry(a, b);
    let mut out: Vec<(LocalTerm, Q)> = Vec::new();
    let mut push = |term: LocalTerm, c: Q| {
        if c.is_zero() {
            return;
        }
        if let Some((_, existing)) = out.iter_mut().find(|(t2, _)| *t2 == term) {
            *existing = existing.clone() + c;
        } else {
            out.push((term, c));
        }
    };
    for (n, cn) in entry.coeffs().iter().enumerate() {
        if cn.is_zero() {
            continue;
        }
        // a_(n) b = n! · (λⁿ coefficient)
        let mut fact = Q::one();
        for i in 1..=n as i64 {
            fact *= qi(i);
        }
        let weight = binomial_signed(m, n as u32) * fact;
        if weight.is_zero() {
            continue;
        }
        let mode = m + k - n as i64;
        let (constant, coeffs) = cn
            .as_linear()
            .expect("generator brackets stay in the fiber plus the vacuum line");
        for (g, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                push(LocalTerm::Gen { gen: g, mode }, c * &weight);
            }
        }
        if !constant.is_zero() && mode == -1 {
            push(LocalTerm::Central, constant * &weight);
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out.sort_by_key(|(t2, _)| match t2 {
        LocalTerm::Gen { gen, mode } => (0, *gen, *mode),
        LocalTerm::Central => (1, 0, 0),
    });
    out
}
