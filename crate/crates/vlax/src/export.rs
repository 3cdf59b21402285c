//! Text, LaTeX, and JSON rendering of bracket tables, Poisson matrices, and
//! flow systems, plus the orientation-aware differs used to compare computed
//! objects against transcribed reference displays.
//!
//! All output is deterministic: entries render through the canonical
//! polynomial grammar and iteration orders are fixed.

use crate::aks::FlowSystem;
use crate::diffpoly::DiffPoly;
use crate::lambda::{BracketTable, LambdaPoly};
use crate::pva::PoissonMatrix;
use serde_json::json;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Latex,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "latex" => Ok(Format::Latex),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected text, latex, json)")),
        }
    }
}

/// `{a_L b} = value` lines for every ordered generator pair.
pub fn table_text(t: &BracketTable) -> String {
    let ring = t.ring();
    let mut out = String::new();
    for i in 0..t.n_gens() {
        for j in 0..t.n_gens() {
            let _ = writeln!(
                out,
                "{{{}_L {}}} = {}",
                ring.name(i),
                ring.name(j),
                t.entry(i, j)
            );
        }
    }
    out
}

pub fn table_json(t: &BracketTable, label: &str) -> serde_json::Value {
    let ring = t.ring();
    let entries: Vec<serde_json::Value> = (0..t.n_gens())
        .flat_map(|i| {
            let ring = ring.clone();
            let t = t.clone();
            (0..t.n_gens())
                .map(move |j| {
                    json!({
                        "i": ring.name(i),
                        "j": ring.name(j),
                        "value": t.entry(i, j).to_string(),
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    json!({
        "kind": "bracket-table",
        "label": label,
        "level": t.level().to_string(),
        "entries": entries,
    })
}

fn latex_poly(p: &DiffPoly) -> String {
    p.to_string().replace('*', " ")
}

/// Bracket table as aligned λ-bracket lines.
pub fn table_latex(t: &BracketTable, subscript: &str) -> String {
    let ring = t.ring();
    let mut out = String::from("\\begin{align*}\n");
    for i in 0..t.n_gens() {
        for j in 0..t.n_gens() {
            let val = t
                .entry(i, j)
                .to_string()
                .replace('L', "\\lambda")
                .replace('*', " ");
            let _ = writeln!(
                out,
                "[{}{{}}_\\lambda {}]_{{{}}} &= {} \\\\",
                ring.name(i),
                ring.name(j),
                subscript,
                val
            );
        }
    }
    out.push_str("\\end{align*}\n");
    out
}

/// One Poisson-matrix entry as text: the ∂⁰ part alone when the operator is
/// ultralocal, otherwise `(c0) + (c1)*D + ...`.
pub fn operator_entry_text(entry: &[DiffPoly]) -> String {
    let nonzero: Vec<usize> = entry
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(s, _)| s)
        .collect();
    if nonzero.is_empty() {
        return "0".to_string();
    }
    if nonzero == [0] {
        return entry[0].to_string();
    }
    let mut parts = Vec::new();
    for s in nonzero {
        let c = &entry[s];
        let term = match s {
            0 => format!("({})", c),
            1 => format!("({})*D", c),
            _ => format!("({})*D^{}", c, s),
        };
        parts.push(term);
    }
    parts.join(" + ")
}

/// Poisson matrix rendered row by row under a display sign.
pub fn matrix_text(pm: &PoissonMatrix, sigma: i8) -> String {
    let shown = if sigma < 0 { pm.transposed() } else { pm.clone() };
    let n = shown.n_gens();
    let mut out = String::new();
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| operator_entry_text(shown.entry(i, j)))
            .collect();
        let _ = writeln!(out, "[{}]", row.join(", "));
    }
    out
}

pub fn matrix_latex(pm: &PoissonMatrix, sigma: i8) -> String {
    let shown = if sigma < 0 { pm.transposed() } else { pm.clone() };
    let n = shown.n_gens();
    let mut out = String::from("H(\\partial) = \\begin{bmatrix}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| {
                operator_entry_text(shown.entry(i, j))
                    .replace('D', "\\partial")
                    .replace('*', " ")
            })
            .collect();
        let _ = writeln!(out, "{} \\\\", row.join(" & "));
    }
    out.push_str("\\end{bmatrix}\n");
    out
}

pub fn matrix_json(pm: &PoissonMatrix, sigma: i8, label: &str) -> serde_json::Value {
    let shown = if sigma < 0 { pm.transposed() } else { pm.clone() };
    let n = shown.n_gens();
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| operator_entry_text(shown.entry(i, j)))
                .collect()
        })
        .collect();
    json!({
        "kind": "poisson-matrix",
        "label": label,
        "sigma": sigma,
        "entries": rows,
    })
}

/// Flow system as `d<name>/dt_<n> = <rhs>` lines.
pub fn flow_text(fs: &FlowSystem, names: &[String]) -> String {
    fs.render(names)
}

pub fn flow_latex(fs: &FlowSystem, names: &[String]) -> String {
    let mut out = String::from("\\begin{align*}\n");
    for (i, rhs) in fs.rhs.iter().enumerate() {
        let _ = writeln!(
            out,
            "\\frac{{d {}}}{{d t_{{{}}}}} &= {} \\\\",
            names[i],
            fs.time_label,
            latex_poly(rhs)
        );
    }
    out.push_str("\\end{align*}\n");
    out
}

pub fn flow_json(fs: &FlowSystem, names: &[String], label: &str) -> serde_json::Value {
    json!({
        "kind": "flow-system",
        "label": label,
        "time": fs.time_label,
        "sigma": fs.sigma,
        "hamiltonian": fs.hamiltonian.to_string(),
        "equations": fs
            .rhs
            .iter()
            .enumerate()
            .map(|(i, rhs)| json!({ "field": names[i], "rhs": rhs.to_string() }))
            .collect::<Vec<_>>(),
    })
}

/// Outcome of comparing a computed matrix or flow against a transcribed
/// reference display: the best-fit global orientation of the reference plus
/// the entries still discrepant after applying it.
#[derive(Clone, Debug)]
pub struct DisplayDiff {
    /// +1: reference matches as printed; −1: reference is the global
    /// negation of the computed object
    pub orientation: i8,
    /// (position label, computed value, reference value)
    pub mismatches: Vec<(String, String, String)>,
}

impl DisplayDiff {
    pub fn exact(&self) -> bool {
        self.orientation == 1 && self.mismatches.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "reference orientation: {}",
            if self.orientation == 1 {
                "as printed"
            } else {
                "globally negated (entries below were compared modulo that sign)"
            }
        );
        if self.mismatches.is_empty() {
            let _ = writeln!(out, "no discrepant entries");
        } else {
            let _ = writeln!(out, "{} discrepant entries:", self.mismatches.len());
            for (pos, ours, printed) in &self.mismatches {
                let _ = writeln!(out, "  {pos}: computed {ours} vs printed {printed}");
            }
        }
        out
    }

    /// Position labels of the discrepant entries.
    pub fn mismatch_positions(&self) -> Vec<&str> {
        self.mismatches.iter().map(|(p, _, _)| p.as_str()).collect()
    }
}

fn best_orientation<T: PartialEq + Clone>(
    ours: &[T],
    reference: &[T],
    negate: impl Fn(&T) -> T,
) -> (i8, Vec<usize>) {
    let mut direct = Vec::new();
    let mut negated = Vec::new();
    for (i, (a, b)) in ours.iter().zip(reference).enumerate() {
        if *a != *b {
            direct.push(i);
        }
        if *a != negate(b) {
            negated.push(i);
        }
    }
    if negated.len() < direct.len() {
        (-1, negated)
    } else {
        (1, direct)
    }
}

/// One entry of a transcribed reference display. Entries whose source text
/// does not parse in the ambient ring (stray symbols in the original) are
/// kept verbatim and always count as discrepant.
#[derive(Clone, Debug)]
pub enum RefEntry {
    Value(DiffPoly),
    Unparseable(String),
}

impl RefEntry {
    fn render(&self) -> String {
        match self {
            RefEntry::Value(p) => p.to_string(),
            RefEntry::Unparseable(s) => format!("unparseable `{s}`"),
        }
    }
}

/// Parse a transcribed matrix fixture: `#` comment lines, an optional
/// `scale: p/q` header multiplied into every entry, then one row per line
/// with comma-separated entries in the polynomial grammar.
pub fn parse_matrix_fixture(
    ring: &crate::diffpoly::Ring,
    text: &str,
) -> Result<Vec<Vec<RefEntry>>, String> {
    let mut scale: Option<crate::diffpoly::Q> = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("scale:") {
            scale = Some(crate::liealg::parse_q(rest.trim()).map_err(|e| e.to_string())?);
            continue;
        }
        let row: Vec<RefEntry> = line
            .split(',')
            .map(|cell| {
                let cell = cell.trim();
                match ring.parse(cell) {
                    Ok(p) => RefEntry::Value(match &scale {
                        Some(s) => p.scale(s),
                        None => p,
                    }),
                    Err(_) => RefEntry::Unparseable(cell.to_string()),
                }
            })
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

/// Compare a computed matrix (already in display orientation) against a
/// transcribed reference of ultralocal entries.
pub fn diff_matrix(pm: &PoissonMatrix, sigma: i8, reference: &[Vec<RefEntry>]) -> DisplayDiff {
    let shown = if sigma < 0 { pm.transposed() } else { pm.clone() };
    let n = shown.n_gens();
    let mut ours: Vec<DiffPoly> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let e = shown.entry(i, j);
            assert!(e.len() <= 1, "reference diffs only support ultralocal matrices");
            ours.push(if e.is_empty() {
                shown.ring().zero()
            } else {
                e[0].clone()
            });
        }
    }
    let flat_ref: Vec<&RefEntry> = reference.iter().flatten().collect();
    let mut direct = Vec::new();
    let mut negated = Vec::new();
    for (idx, (a, b)) in ours.iter().zip(&flat_ref).enumerate() {
        match b {
            RefEntry::Value(p) => {
                if a != p {
                    direct.push(idx);
                }
                if *a != -p {
                    negated.push(idx);
                }
            }
            RefEntry::Unparseable(_) => {
                direct.push(idx);
                negated.push(idx);
            }
        }
    }
    let (orientation, bad) = if negated.len() < direct.len() {
        (-1, negated)
    } else {
        (1, direct)
    };
    let mismatches = bad
        .into_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            // the reference entry is reported as printed, not re-oriented
            (
                format!("({}, {})", i + 1, j + 1),
                ours[idx].to_string(),
                reference[i][j].render(),
            )
        })
        .collect();
    DisplayDiff {
        orientation,
        mismatches,
    }
}

/// Parse a transcribed flow fixture: `#` comment lines, then one
/// `d<name>/dt_<n> = <poly>` line per generator, in generator order.
pub fn parse_flow_fixture(
    ring: &crate::diffpoly::Ring,
    text: &str,
) -> Result<Vec<DiffPoly>, String> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (_, rhs) = line
            .split_once('=')
            .ok_or_else(|| format!("flow line without `=`: {line}"))?;
        out.push(ring.parse(rhs.trim()).map_err(|e| e.to_string())?);
    }
    if out.len() != ring.n_gens() {
        return Err(format!(
            "flow fixture has {} equations for {} generators",
            out.len(),
            ring.n_gens()
        ));
    }
    Ok(out)
}

/// Compare a computed flow against a transcribed reference system.
pub fn diff_flow(ours: &FlowSystem, reference: &[DiffPoly], names: &[String]) -> DisplayDiff {
    let (orientation, bad) = best_orientation(&ours.rhs, reference, |p| -p);
    let mismatches = bad
        .into_iter()
        .map(|i| {
            (
                format!("d{}/dt_{}", names[i], ours.time_label),
                ours.rhs[i].to_string(),
                reference[i].to_string(),
            )
        })
        .collect();
    DisplayDiff {
        orientation,
        mismatches,
    }
}

/// Compare a computed bracket table against reference entries.
pub fn diff_table(t: &BracketTable, reference: &[((usize, usize), LambdaPoly)]) -> DisplayDiff {
    let mut mismatches = Vec::new();
    for ((i, j), val) in reference {
        if t.entry(*i, *j) != val {
            mismatches.push((
                format!("({}, {})", t.ring().name(*i), t.ring().name(*j)),
                t.entry(*i, *j).to_string(),
                val.to_string(),
            ));
        }
    }
    DisplayDiff {
        orientation: 1,
        mismatches,
    }
}
