//! Finite-dimensional Lie algebra data: structure constants, invariant
//! bilinear forms, standard decompositions, and invariant-polynomial search.
//!
//! Builtin algebras (`sl2`, `sl3`) are constructed from their defining
//! representations, which also supply the trace form and an independent
//! `tr(Xᵖ)` route to invariant polynomials. Generic algebras load from a
//! structured-text spec file and are fully validated: antisymmetry, the
//! Jacobi identity, and ad-invariance of the form are checked on every
//! index triple, and violations are reported with the failing indices.

use crate::diffpoly::{q, qi, DiffPoly, Q, Ring};
use crate::linalg::{self, Matrix};
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum AlgebraError {
    #[error("antisymmetry fails for pair ({i}, {j})")]
    Antisymmetry { i: usize, j: usize },
    #[error("Jacobi identity fails for triple ({i}, {j}, {k})")]
    Jacobi { i: usize, j: usize, k: usize },
    #[error("bilinear form is not symmetric at ({i}, {j})")]
    FormNotSymmetric { i: usize, j: usize },
    #[error("bilinear form is not ad-invariant at triple ({i}, {j}, {k})")]
    FormNotInvariant { i: usize, j: usize, k: usize },
    #[error("unknown builtin algebra `{0}` (expected sl2, sl3, or a spec file path)")]
    UnknownAlgebra(String),
    #[error("unknown decomposition kind `{0}` (expected borel, iwasawa, custom)")]
    UnknownDecomposition(String),
    #[error("decomposition does not span the algebra (rank {rank} of {dim})")]
    NotSpanning { rank: usize, dim: usize },
    #[error("algebra has no triangular data; builtin decompositions need sl2/sl3 or root data")]
    NoRootData,
    #[error("spec file error: {0}")]
    File(String),
    #[error("decomposition part `{part}` is not a subalgebra: [{x}, {y}] leaves the span")]
    NotClosed { part: String, x: String, y: String },
}

/// Finite-dimensional Lie algebra with named basis, sparse structure
/// constants, and an invariant symmetric bilinear form.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraSpec {
    name: String,
    names: Vec<String>,
    /// brackets[i][j] = [u_i, u_j] as sparse (k, coefficient) pairs
    brackets: Vec<Vec<Vec<(usize, Q)>>>,
    form: Matrix,
    triangular: Option<Triangular>,
    /// defining-representation matrices for builtins
    rep: Option<Vec<Matrix>>,
}

/// Root-space bookkeeping for builtin algebras: `neg[i]` and `pos[i]` carry
/// opposite roots, `cartan` lists the Cartan generators.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangular {
    pub neg: Vec<usize>,
    pub cartan: Vec<usize>,
    pub pos: Vec<usize>,
}

impl LieAlgebraSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn form(&self) -> &Matrix {
        &self.form
    }

    pub fn form_at(&self, i: usize, j: usize) -> &Q {
        &self.form[i][j]
    }

    pub fn triangular(&self) -> Option<&Triangular> {
        self.triangular.as_ref()
    }

    /// `[u_i, u_j]` as sparse (index, coefficient) pairs.
    pub fn bracket(&self, i: usize, j: usize) -> &[(usize, Q)] {
        &self.brackets[i][j]
    }

    /// `[x, y]` for coefficient vectors.
    pub fn bracket_vec(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let n = self.dim();
        let mut out = vec![Q::zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let s = &x[i] * &y[j];
                for (k, c) in &self.brackets[i][j] {
                    out[*k] = &out[*k] + &(c * &s);
                }
            }
        }
        out
    }

    /// `(x | y)` for coefficient vectors.
    pub fn form_vec(&self, x: &[Q], y: &[Q]) -> Q {
        let mut out = Q::zero();
        for i in 0..self.dim() {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.dim() {
                if !y[j].is_zero() {
                    out += &x[i] * &y[j] * &self.form[i][j];
                }
            }
        }
        out
    }

    /// Differential polynomial ring on this algebra's generators.
    pub fn ring(&self) -> Ring {
        Ring::new(self.names.clone())
    }

    /// Exhaustive validation: antisymmetry, Jacobi, form symmetry and
    /// ad-invariance. The first violation is reported with its indices.
    pub fn validate(&self) -> Result<(), AlgebraError> {
        let n = self.dim();
        let unit = |k: usize| {
            let mut v = vec![Q::zero(); n];
            v[k] = Q::one();
            v
        };
        for i in 0..n {
            for j in 0..n {
                let ab = self.bracket_vec(&unit(i), &unit(j));
                let ba = self.bracket_vec(&unit(j), &unit(i));
                if ab.iter().zip(&ba).any(|(x, y)| !(x + y).is_zero()) {
                    return Err(AlgebraError::Antisymmetry { i, j });
                }
                if !(&self.form[i][j] - &self.form[j][i]).is_zero() {
                    return Err(AlgebraError::FormNotSymmetric { i, j });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (x, y, z) = (unit(i), unit(j), unit(k));
                    let mut acc = self.bracket_vec(&x, &self.bracket_vec(&y, &z));
                    let t2 = self.bracket_vec(&y, &self.bracket_vec(&z, &x));
                    let t3 = self.bracket_vec(&z, &self.bracket_vec(&x, &y));
                    for a in 0..n {
                        acc[a] = &acc[a] + &t2[a] + &t3[a];
                    }
                    if acc.iter().any(|c| !c.is_zero()) {
                        return Err(AlgebraError::Jacobi { i, j, k });
                    }
                    // ([x,y] | z) = (x | [y,z])
                    let lhs = self.form_vec(&self.bracket_vec(&x, &y), &z);
                    let rhs = self.form_vec(&x, &self.bracket_vec(&y, &z));
                    if !(lhs - rhs).is_zero() {
                        return Err(AlgebraError::FormNotInvariant { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }

    /// Dual-basis quadratic Casimir `Σ (B⁻¹)_{ab} u_a u_b` for the stored form.
    pub fn dual_casimir(&self, ring: &Ring) -> DiffPoly {
        let inv = linalg::inverse(&self.form).expect("form must be non-degenerate");
        let mut p = ring.zero();
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                if !inv[a][b].is_zero() {
                    p = &p + &(&ring.gen(a) * &ring.gen(b)).scale(&inv[a][b]);
                }
            }
        }
        p
    }

    /// `tr((X*)ᵖ)` of the defining representation, with `X* = Σ u_a x^a` over
    /// the form-dual basis `x^a = Σ_b (B⁻¹)_{ab} x_b`, expanded as a
    /// polynomial in the order-0 generators. The dual basis makes the result
    /// an invariant of the symmetric algebra (for `p = 2` it is exactly the
    /// dual-basis Casimir). Only available for builtin algebras.
    pub fn trace_power(&self, ring: &Ring, p: u32) -> Option<DiffPoly> {
        let rep = self.rep.as_ref()?;
        let d = rep[0].len();
        let inv = linalg::inverse(&self.form)?;
        // symbolic matrix X* = Σ_a u_a Σ_b (B⁻¹)_{ab} x_b with DiffPoly entries
        let mut x: Vec<Vec<DiffPoly>> = vec![vec![ring.zero(); d]; d];
        for (a, _) in rep.iter().enumerate() {
            let ua = ring.gen(a);
            for (b, mat) in rep.iter().enumerate() {
                if inv[a][b].is_zero() {
                    continue;
                }
                for i in 0..d {
                    for j in 0..d {
                        if !mat[i][j].is_zero() {
                            x[i][j] = &x[i][j] + &ua.scale(&(&inv[a][b] * &mat[i][j]));
                        }
                    }
                }
            }
        }
        let mut acc = x.clone();
        for _ in 1..p {
            let mut next = vec![vec![ring.zero(); d]; d];
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        next[i][j] = &next[i][j] + &(&acc[i][k] * &x[k][j]);
                    }
                }
            }
            acc = next;
        }
        let mut tr = ring.zero();
        for i in 0..d {
            tr = &tr + &acc[i][i];
        }
        Some(tr)
    }
}

fn e_mat(d: usize, i: usize, j: usize) -> Matrix {
    let mut m = linalg::zeros(d, d);
    m[i][j] = Q::one();
    m
}

fn mat_sub(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect()
}

fn mat_trace_product(a: &Matrix, b: &Matrix) -> Q {
    let d = a.len();
    let mut t = Q::zero();
    for i in 0..d {
        for j in 0..d {
            t += &a[i][j] * &b[j][i];
        }
    }
    t
}

fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    mat_sub(&linalg::mat_mul(a, b), &linalg::mat_mul(b, a))
}

/// Build an algebra from defining-representation matrices: structure
/// constants by expressing commutators in the basis, trace form.
fn from_rep(name: &str, names: Vec<&str>, rep: Vec<Matrix>, tri: Option<Triangular>) -> LieAlgebraSpec {
    let n = rep.len();
    let d = rep[0].len();
    // flatten basis matrices into columns and solve for commutator coordinates
    let flat: Vec<Vec<Q>> = rep
        .iter()
        .map(|m| m.iter().flatten().cloned().collect())
        .collect();
    let express = |target: &Matrix| -> Vec<Q> {
        let tv: Vec<Q> = target.iter().flatten().cloned().collect();
        // least-structure exact solve via augmented RREF
        let mut aug: Matrix = (0..d * d)
            .map(|r| {
                let mut row: Vec<Q> = (0..n).map(|c| flat[c][r].clone()).collect();
                row.push(tv[r].clone());
                row
            })
            .collect();
        let pivots = linalg::rref(&mut aug);
        let mut coords = vec![Q::zero(); n];
        for (ri, &pc) in pivots.iter().enumerate() {
            assert!(pc < n, "commutator leaves the span of the basis");
            coords[pc] = aug[ri][n].clone();
        }
        coords
    };
    let mut brackets = vec![vec![Vec::new(); n]; n];
    let mut form = linalg::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let coords = express(&commutator(&rep[i], &rep[j]));
            brackets[i][j] = coords
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .collect();
            form[i][j] = mat_trace_product(&rep[i], &rep[j]);
        }
    }
    let alg = LieAlgebraSpec {
        name: name.to_string(),
        names: names.into_iter().map(String::from).collect(),
        brackets,
        form,
        triangular: tri,
        rep: Some(rep),
    };
    alg.validate().expect("builtin algebra must validate");
    alg
}

pub fn sl2() -> LieAlgebraSpec {
    let rep = vec![e_mat(2, 1, 0), mat_sub(&e_mat(2, 0, 0), &e_mat(2, 1, 1)), e_mat(2, 0, 1)];
    from_rep(
        "sl2",
        vec!["f", "h", "e"],
        rep,
        Some(Triangular {
            neg: vec![0],
            cartan: vec![1],
            pos: vec![2],
        }),
    )
}

pub fn sl3() -> LieAlgebraSpec {
    let rep = vec![
        e_mat(3, 1, 0),                                // f_1
        e_mat(3, 2, 1),                                // f_2
        e_mat(3, 2, 0),                                // f_3
        mat_sub(&e_mat(3, 0, 0), &e_mat(3, 1, 1)),     // h_1
        mat_sub(&e_mat(3, 1, 1), &e_mat(3, 2, 2)),     // h_2
        e_mat(3, 0, 1),                                // e_1
        e_mat(3, 1, 2),                                // e_2
        e_mat(3, 0, 2),                                // e_3
    ];
    from_rep(
        "sl3",
        vec!["f_1", "f_2", "f_3", "h_1", "h_2", "e_1", "e_2", "e_3"],
        rep,
        Some(Triangular {
            neg: vec![0, 1, 2],
            cartan: vec![3, 4],
            pos: vec![5, 6, 7],
        }),
    )
}

/// Builtin lookup, falling back to a spec file path.
pub fn build_algebra(source: &str) -> Result<LieAlgebraSpec, AlgebraError> {
    match source {
        "sl2" => Ok(sl2()),
        "sl3" => Ok(sl3()),
        path if std::path::Path::new(path).exists() => load_algebra_file(path),
        other => Err(AlgebraError::UnknownAlgebra(other.to_string())),
    }
}

/// Splitting of the algebra into two complementary subspaces, each given by
/// a basis in generator coordinates. Closure and isotropy are checked at
/// build time and recorded in the report rather than assumed.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub kind: String,
    pub plus_basis: Vec<Vec<Q>>,
    pub minus_basis: Vec<Vec<Q>>,
    pub report: DecompositionReport,
}

#[derive(Clone, Debug, Default)]
pub struct DecompositionReport {
    pub plus_closed: bool,
    pub minus_closed: bool,
    /// witness pair of basis indices when a part fails to close
    pub plus_witness: Option<(usize, usize)>,
    pub minus_witness: Option<(usize, usize)>,
    pub minus_isotropic: bool,
}

impl fmt::Display for DecompositionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "plus part closed under bracket: {}{}",
            self.plus_closed,
            match self.plus_witness {
                Some((a, b)) => format!(" (witness basis pair ({a}, {b}))"),
                None => String::new(),
            }
        )?;
        writeln!(
            f,
            "minus part closed under bracket: {}{}",
            self.minus_closed,
            match self.minus_witness {
                Some((a, b)) => format!(" (witness basis pair ({a}, {b}))"),
                None => String::new(),
            }
        )?;
        write!(f, "minus part isotropic: {}", self.minus_isotropic)
    }
}

fn closure_check(alg: &LieAlgebraSpec, basis: &[Vec<Q>]) -> (bool, Option<(usize, usize)>) {
    for (a, x) in basis.iter().enumerate() {
        for (b, y) in basis.iter().enumerate() {
            let br = alg.bracket_vec(x, y);
            if !linalg::in_span(basis, &br) {
                return (false, Some((a, b)));
            }
        }
    }
    (true, None)
}

fn isotropy_check(alg: &LieAlgebraSpec, basis: &[Vec<Q>]) -> bool {
    basis
        .iter()
        .all(|x| basis.iter().all(|y| alg.form_vec(x, y).is_zero()))
}

fn unit_vec(n: usize, k: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[k] = Q::one();
    v
}

/// Build a named decomposition.
///
/// `borel` puts the Cartan and positive root vectors in the plus part and
/// the negative root vectors in the minus part. `iwasawa` uses the adapted
/// basis `e^α + e^{−α}` together with the Cartan for the plus part and
/// `e^α − e^{−α}` for the minus part; the plus part is generally not closed
/// under the bracket, which the report records.
pub fn decomposition(alg: &LieAlgebraSpec, kind: &str) -> Result<Decomposition, AlgebraError> {
    let n = alg.dim();
    let (plus, minus): (Vec<Vec<Q>>, Vec<Vec<Q>>) = match kind {
        "borel" => {
            let tri = alg.triangular.as_ref().ok_or(AlgebraError::NoRootData)?;
            let plus = tri
                .cartan
                .iter()
                .chain(tri.pos.iter())
                .map(|&k| unit_vec(n, k))
                .collect();
            let minus = tri.neg.iter().map(|&k| unit_vec(n, k)).collect();
            (plus, minus)
        }
        "iwasawa" => {
            let tri = alg.triangular.as_ref().ok_or(AlgebraError::NoRootData)?;
            let mut plus: Vec<Vec<Q>> = Vec::new();
            let mut minus: Vec<Vec<Q>> = Vec::new();
            for (&p, &m) in tri.pos.iter().zip(tri.neg.iter()) {
                let mut v = vec![Q::zero(); n];
                v[p] = Q::one();
                v[m] = Q::one();
                plus.push(v.clone());
                v[m] = -Q::one();
                minus.push(v);
            }
            for &c in &tri.cartan {
                plus.push(unit_vec(n, c));
            }
            (plus, minus)
        }
        other => return Err(AlgebraError::UnknownDecomposition(other.to_string())),
    };
    build_decomposition(alg, kind, plus, minus)
}

/// Validate and assemble a decomposition from explicit part bases.
pub fn build_decomposition(
    alg: &LieAlgebraSpec,
    kind: &str,
    plus_basis: Vec<Vec<Q>>,
    minus_basis: Vec<Vec<Q>>,
) -> Result<Decomposition, AlgebraError> {
    let n = alg.dim();
    let all: Matrix = (0..n)
        .map(|r| {
            plus_basis
                .iter()
                .chain(minus_basis.iter())
                .map(|v| v[r].clone())
                .collect()
        })
        .collect();
    let rank = linalg::rank(&all);
    if rank != n || plus_basis.len() + minus_basis.len() != n {
        return Err(AlgebraError::NotSpanning { rank, dim: n });
    }
    let (plus_closed, plus_witness) = closure_check(alg, &plus_basis);
    let (minus_closed, minus_witness) = closure_check(alg, &minus_basis);
    let minus_isotropic = isotropy_check(alg, &minus_basis);
    Ok(Decomposition {
        kind: kind.to_string(),
        plus_basis,
        minus_basis,
        report: DecompositionReport {
            plus_closed,
            minus_closed,
            plus_witness,
            minus_witness,
            minus_isotropic,
        },
    })
}

/// Basis of the invariant polynomials of homogeneous degree `d`: all `P` in
/// the order-0 generators with `Σ_i [u^i, u^j]·∂P/∂u^i = 0` for every `j`.
///
/// The kernel is computed by fraction-free Gaussian elimination; the
/// quadratic invariant of a simple algebra is normalized to the dual-basis
/// Casimir, other kernel vectors to primitive integer coefficient vectors.
pub fn invariant_polynomials(alg: &LieAlgebraSpec, ring: &Ring, d: u32) -> Vec<DiffPoly> {
    assert!(d >= 2, "invariant search needs degree at least 2");
    let n = alg.dim();
    let monos = homogeneous_monomials(n, d);
    let index_of = |m: &Vec<u32>| monos.iter().position(|x| x == m).unwrap();
    // rows: (j, output monomial); columns: input monomials
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for j in 0..n {
        let mut block: std::collections::BTreeMap<Vec<u32>, Vec<Q>> = Default::default();
        for (ci, m) in monos.iter().enumerate() {
            for i in 0..n {
                if m[i] == 0 {
                    continue;
                }
                // ∂(m)/∂u_i = m[i] * m/u_i, then multiply by [u_i, u_j]
                let mut reduced = m.clone();
                reduced[i] -= 1;
                for (k, c) in alg.bracket(i, j) {
                    let mut out = reduced.clone();
                    out[*k] += 1;
                    let row = block
                        .entry(out)
                        .or_insert_with(|| vec![Q::zero(); monos.len()]);
                    row[ci] = &row[ci] + &(c * &qi(m[i] as i64));
                }
            }
        }
        rows.extend(block.into_values());
    }
    let kernel = if rows.is_empty() {
        // abelian algebra: everything is invariant
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
    let mut out: Vec<DiffPoly> = kernel
        .into_iter()
        .map(|v| {
            let mut p = ring.zero();
            for (ci, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mut mono = ring.constant(c.clone());
                for (g, &e) in monos[ci].iter().enumerate() {
                    if e > 0 {
                        mono = &mono * &ring.gen(g).powi(e);
                    }
                }
                p = &p + &mono;
            }
            p
        })
        .collect();
    if d == 2 && out.len() == 1 {
        let casimir = alg.dual_casimir(ring);
        // rescale the one-dimensional span onto the dual-basis Casimir
        if let Some(scale) = ratio(&casimir, &out[0]) {
            out[0] = out[0].scale(&scale);
        }
        debug_assert_eq!(out[0], casimir);
    }
    // index of `index_of` silences the unused warning in the abelian branch
    let _ = index_of;
    out
}

/// `a / b` when `a = c·b` for a scalar `c`.
fn ratio(a: &DiffPoly, b: &DiffPoly) -> Option<Q> {
    let (m, cb) = b.terms().next()?;
    let ca = a.coefficient(m);
    let c = ca / cb;
    if &b.scale(&c) == a {
        Some(c)
    } else {
        None
    }
}

fn homogeneous_monomials(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=d).rev() {
            prefix.push(e);
            rec(n, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::new(), &mut out);
    out
}

fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q, AlgebraError> {
    let parts: Vec<&str> = s.split('/').collect();
    let bad = || AlgebraError::File(format!("bad rational `{s}`"));
    match parts.as_slice() {
        [n] => n
            .trim()
            .parse::<num::BigInt>()
            .map(Q::from_integer)
            .map_err(|_| bad()),
        [n, d] => {
            let num = n.trim().parse::<num::BigInt>().map_err(|_| bad())?;
            let den = d.trim().parse::<num::BigInt>().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(num, den))
        }
        _ => Err(bad()),
    }
}

#[derive(Serialize, Deserialize)]
struct AlgebraFile {
    name: String,
    dim: usize,
    generators: Vec<String>,
    /// entries [i, j, k, numerator, denominator] with i < j; antisymmetric
    /// partners are implied
    brackets: Vec<(usize, usize, usize, i64, i64)>,
    form: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decomposition: Option<DecompositionFile>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionFile {
    plus: Vec<usize>,
    minus_basis: Vec<Vec<String>>,
}

/// Load and validate an algebra spec file, returning the algebra and its
/// optional custom decomposition.
pub fn load_algebra_file_full(
    path: &str,
) -> Result<(LieAlgebraSpec, Option<Decomposition>), AlgebraError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| AlgebraError::File(format!("{path}: {e}")))?;
    let file: AlgebraFile =
        serde_json::from_str(&text).map_err(|e| AlgebraError::File(format!("{path}: {e}")))?;
    if file.generators.len() != file.dim {
        return Err(AlgebraError::File(format!(
            "dim {} does not match {} generator names",
            file.dim,
            file.generators.len()
        )));
    }
    let n = file.dim;
    let mut brackets = vec![vec![Vec::new(); n]; n];
    for (i, j, k, num, den) in &file.brackets {
        if *i >= n || *j >= n || *k >= n || *den == 0 {
            return Err(AlgebraError::File(format!(
                "bad bracket entry [{i}, {j}, {k}, {num}, {den}]"
            )));
        }
        let c = q(*num, *den);
        brackets[*i][*j].push((*k, c.clone()));
        brackets[*j][*i].push((*k, -c));
    }
    for row in &mut brackets {
        for cell in row.iter_mut() {
            cell.sort_by_key(|(k, _)| *k);
        }
    }
    let mut form = linalg::zeros(n, n);
    if file.form.len() != n || file.form.iter().any(|r| r.len() != n) {
        return Err(AlgebraError::File("form matrix has wrong shape".into()));
    }
    for i in 0..n {
        for j in 0..n {
            form[i][j] = parse_q(&file.form[i][j])?;
        }
    }
    let alg = LieAlgebraSpec {
        name: file.name,
        names: file.generators,
        brackets,
        form,
        triangular: None,
        rep: None,
    };
    alg.validate()?;
    let dec = match file.decomposition {
        None => None,
        Some(df) => {
            let plus: Vec<Vec<Q>> = df.plus.iter().map(|&k| unit_vec(n, k)).collect();
            let minus: Result<Vec<Vec<Q>>, AlgebraError> = df
                .minus_basis
                .iter()
                .map(|row| row.iter().map(|s| parse_q(s)).collect())
                .collect();
            let dec = build_decomposition(&alg, "custom", plus, minus?)?;
            if !dec.report.plus_closed || !dec.report.minus_closed {
                let (part, w) = if !dec.report.plus_closed {
                    ("plus", dec.report.plus_witness.unwrap())
                } else {
                    ("minus", dec.report.minus_witness.unwrap())
                };
                return Err(AlgebraError::NotClosed {
                    part: part.into(),
                    x: w.0.to_string(),
                    y: w.1.to_string(),
                });
            }
            Some(dec)
        }
    };
    Ok((alg, dec))
}

pub fn load_algebra_file(path: &str) -> Result<LieAlgebraSpec, AlgebraError> {
    load_algebra_file_full(path).map(|(a, _)| a)
}

/// Serialize an algebra to the spec-file format (canonical field order,
/// brackets with i < j only, reduced-fraction matrix entries).
pub fn save_algebra_string(alg: &LieAlgebraSpec) -> String {
    let n = alg.dim();
    let mut brackets = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for (k, c) in alg.bracket(i, j) {
                let num: i64 = c.numer().to_string().parse().expect("small constants");
                let den: i64 = c.denom().to_string().parse().expect("small constants");
                brackets.push((i, j, *k, num, den));
            }
        }
    }
    let form = alg
        .form
        .iter()
        .map(|row| row.iter().map(format_q).collect())
        .collect();
    let file = AlgebraFile {
        name: alg.name.clone(),
        dim: n,
        generators: alg.names.clone(),
        brackets,
        form,
        decomposition: None,
    };
    serde_json::to_string_pretty(&file).expect("serialization cannot fail")
}
