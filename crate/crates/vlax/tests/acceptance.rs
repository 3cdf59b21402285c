//! Acceptance suite. Each numbered check prints a `[C<n>] PASS/FAIL` line
//! with its runtime; run with `--nocapture` to see the reports.
//!
//! Reference displays transcribed from the source material live in
//! `tests/fixtures/`. Where the displays are internally inconsistent the
//! comparison reports a best-fit global orientation and the residual
//! discrepancies: those residual sets are frozen here, entry for entry.
//!
//! Three checks are expected to stay red; each failing assertion carries the
//! full analysis. They fail because the reference displays they quote are
//! provably self-contradictory (mixed sign conventions between the printed
//! structure matrices, flows, and exact solutions; a decomposition whose
//! plus part is not a subalgebra; a Hamiltonian density whose stated flow
//! has one term with an impossible sign), not because of missing
//! functionality. The companion green checks pin the computed values and the
//! exact discrepancy sets.

use num::Zero;
use std::time::Instant;
use vlax::aks::{
    flow, functional_bracket, hamiltonian_family, involution_entry, involution_matrix,
    is_total_derivative, FamilyKind, Hamiltonian, SignConvention,
};
use vlax::diffpoly::{q, qi, DiffPoly, Q, Ring};
use vlax::export::{
    diff_flow, diff_matrix, matrix_text, parse_flow_fixture, parse_matrix_fixture, DisplayDiff,
};
use vlax::lambda::{master_bracket, skew_defect, BracketTable, LambdaPoly};
use vlax::liealg::{decomposition, invariant_polynomials, sl2, sl3, LieAlgebraSpec};
use vlax::pva::{axioms_report, center_find, poisson_matrix};
use vlax::verify::{families, residual_check, rk4_integrate, GridSpec};
use vlax::vla::{
    decompose_unique, factorization_data, mybe_defect, rmatrix_from_decomposition, twisted_table,
    AffineVla, RMatrix,
};

fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn report(tag: &str, pass: bool, start: Instant, detail: &str) {
    println!(
        "[{}] {}  ({:.2}s)  {}",
        tag,
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64(),
        detail
    );
}

fn budget(tag: &str, start: Instant, seconds: f64) {
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < seconds,
        "{tag}: runtime {elapsed:.2}s exceeds the {seconds}s budget"
    );
}

struct Twists {
    vla: AffineVla,
    borel: BracketTable,
    iwasawa: BracketTable,
    casimir: DiffPoly,
}

fn sl2_twists(level: Q) -> Twists {
    let vla = AffineVla::new(sl2(), level).unwrap();
    let db = decomposition(&vla.algebra, "borel").unwrap();
    let rb = rmatrix_from_decomposition(&vla, &db).unwrap();
    let borel = twisted_table(&vla, &rb).validated().unwrap();
    let v0 = AffineVla::new(sl2(), Q::zero()).unwrap();
    let di = decomposition(&v0.algebra, "iwasawa").unwrap();
    let ri = rmatrix_from_decomposition(&v0, &di).unwrap();
    let iwasawa = twisted_table(&v0, &ri).validated().unwrap();
    let casimir = vla.algebra.dual_casimir(&vla.ring);
    Twists {
        vla,
        borel,
        iwasawa,
        casimir,
    }
}

fn borel_table(alg: LieAlgebraSpec, level: Q) -> (AffineVla, BracketTable) {
    let vla = AffineVla::new(alg, level).unwrap();
    let d = decomposition(&vla.algebra, "borel").unwrap();
    let r = rmatrix_from_decomposition(&vla, &d).unwrap();
    let t = twisted_table(&vla, &r).validated().unwrap();
    (vla, t)
}

/// Golden bracket tables: the Borel twist of sl2 at general level matches
/// the six reference entries including the central terms; the Iwasawa twist
/// at level zero matches its reference table. One reference entry violates
/// the skew-symmetry its own table requires (a one-character exponent typo);
/// the comparison uses the skew-consistent value and reports the typo.
#[test]
fn c1_golden_bracket_tables() {
    let start = Instant::now();
    for k in [qi(0), qi(1), qi(-2), q(7, 3), q(-5, 4)] {
        let tw = sl2_twists(k.clone());
        let ring = &tw.vla.ring;
        let t = &tw.borel;
        let z = LambdaPoly::zero(ring);
        // displayed entries: (f,f), (f,h), (f,e), (h,h), (h,e), (e,e)
        assert_eq!(t.entry(0, 0), &z, "level {k}: (f, f)");
        assert_eq!(t.entry(0, 1), &z, "level {k}: (f, h)");
        assert_eq!(t.entry(0, 2), &z, "level {k}: (f, e)");
        let two_k_lambda =
            LambdaPoly::from_coeffs(ring, vec![ring.zero(), ring.constant(&k * &qi(2))]);
        assert_eq!(t.entry(1, 1), &two_k_lambda, "level {k}: (h, h) = 2kL");
        assert_eq!(
            t.entry(1, 2),
            &LambdaPoly::constant(ring.gen(2).scale(&qi(2))),
            "level {k}: (h, e) = 2e"
        );
        assert_eq!(t.entry(2, 2), &z, "level {k}: (e, e)");
    }

    let tw = sl2_twists(Q::zero());
    let ring = &tw.vla.ring;
    let t = &tw.iwasawa;
    let e_minus_f = &ring.gen(2) - &ring.gen(0);
    let z = LambdaPoly::zero(ring);
    assert_eq!(t.entry(0, 0), &z, "(f, f)");
    assert_eq!(t.entry(0, 1), &LambdaPoly::constant(-&e_minus_f), "(f, h)");
    assert_eq!(t.entry(0, 2), &z, "(f, e)");
    assert_eq!(t.entry(1, 1), &z, "(h, h)");
    assert_eq!(t.entry(1, 2), &LambdaPoly::constant(e_minus_f), "(h, e)");
    assert_eq!(t.entry(2, 2), &z, "(e, e)");
    // the reference (f, f) formula evaluates to −h/2, which no
    // skew-symmetric table can carry on a diagonal λ-free entry
    let mut corrupted = t.clone();
    corrupted.set_entry(0, 0, LambdaPoly::constant(ring.gen(1).scale(&q(-1, 2))));
    let bad = skew_defect(&corrupted)
        .into_iter()
        .any(|((i, j), d)| (i, j) == (0, 0) && !d.is_zero());
    assert!(bad, "the reference (f, f) value must violate skew-symmetry");

    budget("C1", start, 1.0);
    report(
        "C1",
        true,
        start,
        "Borel table exact at 5 levels incl. central terms; Iwasawa table exact at level 0 \
         (reference (f, f) entry is a skew-violating exponent typo; computed value 0)",
    );
}

/// Poisson matrices: sl2 Borel/Iwasawa and sl3 Borel reproduce the reference
/// displays exactly under the default display sign; the sl3 Iwasawa display
/// is recognized up to a global negation with exactly the frozen 18-entry
/// discrepancy set (stray `e_8` symbols, sign slips, one spurious h_1 pair).
#[test]
fn c2_poisson_matrices() {
    let start = Instant::now();
    let tw = sl2_twists(Q::zero());
    let ring = &tw.vla.ring;

    let pm_b = poisson_matrix(&tw.borel).unwrap();
    let ref_b = parse_matrix_fixture(ring, &fixture("sl2_borel_matrix.txt")).unwrap();
    let d = diff_matrix(&pm_b, -1, &ref_b);
    assert!(d.exact(), "sl2 Borel matrix:\n{}", d.render());
    assert_eq!(
        matrix_text(&pm_b, -1),
        "[0, 0, 0]\n[0, 0, 2*e]\n[0, -2*e, 0]\n"
    );

    let pm_i = poisson_matrix(&tw.iwasawa).unwrap();
    let ref_i = parse_matrix_fixture(ring, &fixture("sl2_iwasawa_matrix.txt")).unwrap();
    let d = diff_matrix(&pm_i, -1, &ref_i);
    assert!(d.exact(), "sl2 Iwasawa matrix:\n{}", d.render());

    let (v3, t3) = borel_table(sl3(), Q::zero());
    let pm3 = poisson_matrix(&t3).unwrap();
    let ref3 = parse_matrix_fixture(&v3.ring, &fixture("sl3_borel_matrix.txt")).unwrap();
    let d3 = diff_matrix(&pm3, -1, &ref3);
    assert!(d3.exact(), "sl3 Borel matrix:\n{}", d3.render());

    // sl3 Iwasawa: the twist is not a vertex Lie algebra (see C5), but it is
    // skew, so its structure matrix is still well-defined and diffable.
    let v3i = AffineVla::new(sl3(), Q::zero()).unwrap();
    let di = decomposition(&v3i.algebra, "iwasawa").unwrap();
    let ri = rmatrix_from_decomposition(&v3i, &di).unwrap();
    let t3i = twisted_table(&v3i, &ri).table;
    let pm3i = poisson_matrix(&t3i).unwrap();
    let ref3i = parse_matrix_fixture(&v3i.ring, &fixture("sl3_iwasawa_matrix.txt")).unwrap();
    let d3i = diff_matrix(&pm3i, -1, &ref3i);
    println!("sl3 Iwasawa matrix diff:\n{}", d3i.render());
    assert_eq!(d3i.orientation, -1, "reference display is globally negated");
    let expected = [
        "(1, 2)", "(1, 5)", "(1, 7)", "(2, 1)", "(2, 3)", "(2, 5)", "(2, 6)", "(3, 2)",
        "(4, 7)", "(5, 1)", "(5, 2)", "(5, 3)", "(5, 6)", "(5, 8)", "(6, 5)", "(7, 1)",
        "(7, 4)", "(7, 5)",
    ];
    assert_eq!(
        d3i.mismatch_positions(),
        expected,
        "sl3 Iwasawa discrepancies must be exactly the identified typos:\n{}",
        d3i.render()
    );

    budget("C2", start, 5.0);
    report(
        "C2",
        true,
        start,
        "sl2 Borel/Iwasawa and sl3 Borel exact; sl3 Iwasawa up to global negation with \
         exactly the 18 identified typo entries",
    );
}

struct FlowFixture {
    fs: vlax::aks::FlowSystem,
    reference: Vec<DiffPoly>,
    names: Vec<String>,
    diff: DisplayDiff,
}

fn flow_against_fixture(
    table: &BracketTable,
    untwisted: &BracketTable,
    density: &DiffPoly,
    kind: FamilyKind,
    n: u32,
    fixture_name: &str,
) -> FlowFixture {
    let pm = poisson_matrix(table).unwrap();
    let h = hamiltonian_family(density, kind, n, untwisted).unwrap();
    let fs = flow(&h, &pm, SignConvention::Paper).unwrap();
    let names = table.ring().names().to_vec();
    let reference = parse_flow_fixture(table.ring(), &fixture(fixture_name)).unwrap();
    let diff = diff_flow(&fs, &reference, &names);
    FlowFixture {
        fs,
        reference,
        names,
        diff,
    }
}

/// First Borel flow: matches the reference system byte for byte under the
/// default convention, and the flow agrees with the direct bracket route.
#[test]
fn c3_flows_borel_first() {
    let start = Instant::now();
    let tw = sl2_twists(Q::zero());
    let fx = flow_against_fixture(
        &tw.borel,
        &tw.vla.table,
        &tw.casimir,
        FamilyKind::Power,
        1,
        "sl2_borel_flow1.txt",
    );
    assert!(
        fx.diff.exact(),
        "Borel first flow vs reference:\n{}",
        fx.diff.render()
    );
    assert_eq!(
        fx.fs.render(&fx.names),
        "df/dt_1 = 0\ndh/dt_1 = 4*f*e\nde/dt_1 = -2*h*e\n"
    );
    // oracle: σ·{h_λ u}|_{λ=0} through the Master formula directly
    for i in 0..3 {
        let direct = master_bracket(&tw.casimir, &tw.vla.ring.gen(i), &tw.borel).at_zero();
        assert_eq!(fx.fs.rhs[i], -&direct);
    }
    budget("C3a", start, 10.0);
    report("C3a", true, start, "sl2 Borel first flow matches the reference display exactly");
}

/// Second Borel flow against the printed system. The printed second flow
/// carries the opposite global sign from the printed first flow — both
/// cannot hold under one convention — so this comparison is expected to
/// fail by exactly a global negation. The companion check below pins that.
#[test]
fn c3_flows_borel_second_vs_printed() {
    let start = Instant::now();
    let tw = sl2_twists(Q::zero());
    let fx = flow_against_fixture(
        &tw.borel,
        &tw.vla.table,
        &tw.casimir,
        FamilyKind::DerivProduct,
        2,
        "sl2_borel_flow2.txt",
    );
    report(
        "C3b",
        fx.diff.exact(),
        start,
        "sl2 Borel second flow vs reference display (expected: global sign flip)",
    );
    assert!(
        fx.diff.exact(),
        "KNOWN DEFECT IN THE REFERENCE DISPLAYS: the printed second Borel flow has the \
         opposite global sign from the printed first Borel flow. The printed first flow \
         (0, 4ef, -2eh) is satisfied by the printed rational solution f = 1, h = 1/(t+C), \
         e = -(1/4)(t+C)^-2, which pins the default convention; under that same convention \
         the second flow comes out as the global negation of the printed one (the printed \
         second flow is instead satisfied by the right-moving sech^2 branch, i.e. it uses \
         the strict orientation). No single sign convention matches both printed systems.\n\
         Comparison:\n{}",
        fx.diff.render()
    );
}

/// First Iwasawa flow against the printed system: the printed flows are in
/// the strict orientation while the printed Iwasawa matrix (C2) and the
/// oscillator solution (C8) are in the default one, so this comparison is
/// expected to fail by exactly a global negation.
#[test]
fn c3_flows_iwasawa_first_vs_printed() {
    let start = Instant::now();
    let tw = sl2_twists(Q::zero());
    let fx = flow_against_fixture(
        &tw.iwasawa,
        &tw.vla.table,
        &tw.casimir,
        FamilyKind::Power,
        1,
        "sl2_iwasawa_flow1.txt",
    );
    report(
        "C3c",
        fx.diff.exact(),
        start,
        "sl2 Iwasawa first flow vs reference display (expected: global sign flip)",
    );
    assert!(
        fx.diff.exact(),
        "KNOWN DEFECT IN THE REFERENCE DISPLAYS: the printed Iwasawa flow system is \
         inconsistent with the printed Iwasawa structure matrix — applying that matrix to \
         the variational derivatives of the quadratic density yields the negation of the \
         printed flow. Under the default convention (which reproduces the printed matrix \
         and the oscillator solution xi = A sin t, eta = A cos t) the computed flow is the \
         global negation of the printed system.\nComparison:\n{}",
        fx.diff.render()
    );
}

/// sl3 quadratic first flow against the printed system: printed in the
/// strict orientation and carrying two typo'd equations; expected to fail.
#[test]
fn c3_flows_sl3_quadratic_vs_printed() {
    let start = Instant::now();
    let (v3, t3) = borel_table(sl3(), Q::zero());
    let s1 = invariant_polynomials(&v3.algebra, &v3.ring, 2).remove(0);
    let fx = flow_against_fixture(
        &t3,
        &v3.table,
        &s1,
        FamilyKind::Power,
        1,
        "sl3_borel_quad_flow.txt",
    );
    report(
        "C3d",
        fx.diff.exact(),
        start,
        "sl3 Borel quadratic flow vs reference display (expected: sign flip + 2 typos)",
    );
    assert!(
        fx.diff.exact(),
        "KNOWN DEFECT IN THE REFERENCE DISPLAYS: the printed sl3 quadratic flow is in the \
         strict orientation (global negation of the default one pinned by the printed \
         structure matrices), and two of its equations disagree with the matrix route even \
         after the sign normalization: the printed dh_2 has -2 f_2 e_2 where the matrix \
         gives -4 f_2 e_2, and the printed de_2 has (2/3)(h_2 - h_1) e_2 where the matrix \
         gives 2 h_2 e_2. Six of eight equations match after the global negation.\n\
         Comparison:\n{}",
        fx.diff.render()
    );
}

/// Companion check pinning the expected outcome of the three red flow
/// comparisons: each reference system equals the computed one up to exactly
/// a global negation, except the two typo'd sl3 equations.
#[test]
fn c3_flow_convention_analysis() {
    let start = Instant::now();
    let tw = sl2_twists(Q::zero());
    let b2 = flow_against_fixture(
        &tw.borel,
        &tw.vla.table,
        &tw.casimir,
        FamilyKind::DerivProduct,
        2,
        "sl2_borel_flow2.txt",
    );
    assert_eq!(b2.diff.orientation, -1);
    assert!(b2.diff.mismatches.is_empty(), "{}", b2.diff.render());
    // the conserved combination: d/dt(½h² + 2fe) vanishes identically
    assert!(vlax::aks::time_derivative_along_flow(&tw.casimir, &b2.fs).is_zero());

    let iw = flow_against_fixture(
        &tw.iwasawa,
        &tw.vla.table,
        &tw.casimir,
        FamilyKind::Power,
        1,
        "sl2_iwasawa_flow1.txt",
    );
    assert_eq!(iw.diff.orientation, -1);
    assert!(iw.diff.mismatches.is_empty(), "{}", iw.diff.render());

    let (v3, t3) = borel_table(sl3(), Q::zero());
    let s1 = invariant_polynomials(&v3.algebra, &v3.ring, 2).remove(0);
    let q3 = flow_against_fixture(
        &t3,
        &v3.table,
        &s1,
        FamilyKind::Power,
        1,
        "sl3_borel_quad_flow.txt",
    );
    assert_eq!(q3.diff.orientation, -1);
    assert_eq!(
        q3.diff.mismatch_positions(),
        ["dh_2/dt_1", "de_2/dt_1"],
        "{}",
        q3.diff.render()
    );
    let _ = (&b2.reference, &iw.reference, &q3.reference);
    budget("C3e", start, 10.0);
    report(
        "C3e",
        true,
        start,
        "flow comparisons pinned: reference systems are global negations of the computed \
         ones, with exactly the two known typo'd sl3 equations as residual",
    );
}

/// sl3 cubic flow: the matrix route and the direct bracket route agree, the
/// cubic density is the trace invariant cross-checked against the kernel
/// solve, and the diff against the printed system is reported (the printed
/// cubic flow is garbled; all seven nonzero equations deviate).
#[test]
fn c3_flows_sl3_cubic_oracle_and_diff() {
    let start = Instant::now();
    let (v3, t3) = borel_table(sl3(), Q::zero());
    let ring = &v3.ring;
    let s2 = v3.algebra.trace_power(ring, 3).unwrap();
    // cross-check: the trace invariant spans the degree-3 kernel
    let kernel = invariant_polynomials(&v3.algebra, ring, 3);
    assert_eq!(kernel.len(), 1);
    let lead = kernel[0].terms().next().unwrap().0.clone();
    let scale = s2.coefficient(&lead) / kernel[0].coefficient(&lead);
    assert_eq!(kernel[0].scale(&scale), s2, "trace route equals kernel route");

    let fx = flow_against_fixture(
        &t3,
        &v3.table,
        &s2,
        FamilyKind::Custom,
        1,
        "sl3_borel_cubic_flow.txt",
    );
    // oracle: the matrix route equals σ·{S₂_λ u^i}|_{λ=0}
    for i in 0..8 {
        let direct = master_bracket(&s2, &ring.gen(i), &t3).at_zero();
        assert_eq!(fx.fs.rhs[i], -&direct, "generator {i}");
    }
    println!("sl3 cubic flow diff vs reference display:\n{}", fx.diff.render());
    assert_eq!(
        fx.diff.mismatch_positions(),
        [
            "df_1/dt_1",
            "df_2/dt_1",
            "dh_1/dt_1",
            "dh_2/dt_1",
            "de_1/dt_1",
            "de_2/dt_1",
            "de_3/dt_1"
        ],
        "every nonzero printed cubic equation deviates from the oracle (the printed \
         dh_1 and dh_2 are even textually identical): {}",
        fx.diff.render()
    );
    budget("C3f", start, 10.0);
    report(
        "C3f",
        true,
        start,
        "sl3 cubic flow matches the independent oracle; diff report against the reference \
         display lists all seven nonzero equations (printed dh_1 = dh_2 verbatim)",
    );
}

/// Modified Yang-Baxter equation for the factorizable R of the Borel
/// decompositions, exhaustively over generator pairs.
#[test]
fn c4_mybe_borel() {
    let start = Instant::now();
    for (alg, level) in [
        (sl2(), qi(0)),
        (sl2(), q(5, 2)),
        (sl3(), qi(0)),
        (sl3(), qi(-3)),
    ] {
        let name = alg.name().to_string();
        let vla = AffineVla::new(alg, level.clone()).unwrap();
        let d = decomposition(&vla.algebra, "borel").unwrap();
        let r = rmatrix_from_decomposition(&vla, &d).unwrap();
        for ((i, j), defect) in mybe_defect(&vla, &r).unwrap() {
            assert!(
                defect.is_zero(),
                "{name} level {level} pair ({i}, {j}): {defect}"
            );
        }
    }
    budget("C4a", start, 2.0);
    report(
        "C4a",
        true,
        start,
        "modified Yang-Baxter defects vanish for sl2/sl3 Borel at level 0 and general level",
    );
}

/// Modified Yang-Baxter equation for the adapted-basis (Iwasawa-type)
/// decomposition. This genuinely fails: the plus part (symmetric matrices
/// plus the Cartan) is not a subalgebra, so the factorization theorem's
/// sufficiency hypothesis is not met, and the defect is nonzero.
#[test]
fn c4_mybe_iwasawa() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for alg in [sl2(), sl3()] {
        let name = alg.name().to_string();
        let vla = AffineVla::new(alg, Q::zero()).unwrap();
        let d = decomposition(&vla.algebra, "iwasawa").unwrap();
        assert!(
            !d.report.plus_closed,
            "the adapted plus part is not closed under the bracket"
        );
        let r = rmatrix_from_decomposition(&vla, &d).unwrap();
        let bad: Vec<String> = mybe_defect(&vla, &r)
            .unwrap()
            .into_iter()
            .filter(|(_, d)| !d.is_zero())
            .map(|((i, j), d)| {
                format!(
                    "  {name} ({}, {}): {}",
                    vla.ring.name(i),
                    vla.ring.name(j),
                    d
                )
            })
            .collect();
        if !bad.is_empty() {
            failures.push(format!("{name}: {} nonzero pairs\n{}", bad.len(), bad.join("\n")));
        }
    }
    report(
        "C4b",
        failures.is_empty(),
        start,
        "Iwasawa-type mYBE (expected: nonzero defects — plus part is not a subalgebra)",
    );
    assert!(
        failures.is_empty(),
        "KNOWN DEFECT IN THE REFERENCE CONSTRUCTION: the adapted-basis decomposition \
         spans {{e^a + e^-a}} + Cartan / {{e^a - e^-a}}, and its plus part is not closed \
         under the bracket ([e+f, h] = -2(e-f) already leaves it for sl2). The \
         factorization theorem therefore does not apply and the modified Yang-Baxter \
         equation genuinely fails for this operator, even though the twisted bracket \
         happens to satisfy the vertex Lie algebra axioms for sl2 (it does not for sl3, \
         see C5). Defects:\n{}",
        failures.join("\n")
    );
}

/// Axiom suites: skew and Jacobi defects vanish for the untwisted tables and
/// the valid twists, exhaustively over pairs and triples; corrupted tables
/// fail with named witnesses.
#[test]
fn c5_axiom_suites() {
    let start = Instant::now();
    // untwisted affine tables validate at construction; re-check explicitly
    for (alg, level) in [(sl2(), qi(0)), (sl2(), q(7, 2)), (sl3(), qi(0)), (sl3(), qi(2))] {
        let vla = AffineVla::new(alg, level).unwrap();
        assert!(axioms_report(&vla.table).pass());
    }
    // twisted: sl2 Borel (two levels), sl2 Iwasawa, sl3 Borel (two levels)
    let tw = sl2_twists(q(5, 3));
    assert!(axioms_report(&tw.borel).pass());
    assert!(axioms_report(&tw.iwasawa).pass());
    let (_, t3) = borel_table(sl3(), qi(0));
    assert!(axioms_report(&t3).pass());
    let (_, t3k) = borel_table(sl3(), q(-3, 1));
    assert!(axioms_report(&t3k).pass());

    // negative controls with named witnesses
    let v = AffineVla::new(sl2(), qi(0)).unwrap();
    let ring = &v.ring;
    let mut skew_bad = v.table.clone();
    skew_bad.set_entry(2, 1, LambdaPoly::constant(ring.gen(2).scale(&qi(2))));
    let r1 = axioms_report(&skew_bad);
    assert!(!r1.pass());
    assert!(
        r1.summary().contains("(e, h)"),
        "witness names the corrupted pair: {}",
        r1.summary()
    );
    let mut jac_bad = v.table.clone();
    jac_bad.set_entry(1, 2, LambdaPoly::constant(ring.gen(2).scale(&qi(3))));
    jac_bad.set_entry(2, 1, LambdaPoly::constant(ring.gen(2).scale(&qi(-3))));
    let r2 = axioms_report(&jac_bad);
    assert!(!r2.pass() && r2.skew_failures.is_empty());
    assert!(
        r2.summary().contains("Jacobi fails"),
        "witnesses name the failing triples: {}",
        r2.summary()
    );

    budget("C5a", start, 10.0);
    report(
        "C5a",
        true,
        start,
        "skew and Jacobi vanish exhaustively for all untwisted tables and the Borel/sl2 \
         Iwasawa twists; corrupted tables fail with named witnesses",
    );
}

/// The sl3 adapted-basis twist violates the Jacobi identity, so it is not a
/// vertex Lie algebra and its construction reports the offending triples.
#[test]
fn c5_sl3_iwasawa_twisted_jacobi() {
    let start = Instant::now();
    let vla = AffineVla::new(sl3(), Q::zero()).unwrap();
    let d = decomposition(&vla.algebra, "iwasawa").unwrap();
    let r = rmatrix_from_decomposition(&vla, &d).unwrap();
    let tw = twisted_table(&vla, &r);
    report(
        "C5b",
        tw.axioms.pass(),
        start,
        "sl3 Iwasawa-type twisted table axioms (expected: Jacobi failures)",
    );
    assert!(
        tw.axioms.pass(),
        "KNOWN DEFECT IN THE REFERENCE CONSTRUCTION: the sl3 adapted-basis twist fails \
         the Jacobi identity, exhaustively verified — the twisted bracket of two \
         symmetric-part elements lands in the antisymmetric part, whose own bracket is \
         nonabelian for rank >= 2 ([(twist of h_1, e_1+f_1), e_2-f_2]-type triples do \
         not cancel). Its structure matrix is still skew (see C2), but no vertex Lie \
         algebra — and hence no Poisson vertex algebra — underlies it. Witnesses:\n{}",
        tw.axioms.summary()
    );
}

/// Involution: all pairwise functional brackets of the center families
/// vanish in the quotient by total derivatives, decided by exact vanishing
/// of every variational derivative of the integrand.
#[test]
fn c6_involution() {
    let start = Instant::now();
    let tw = sl2_twists(Q::zero());
    let powers: Vec<Hamiltonian> = (1..=3)
        .map(|n| hamiltonian_family(&tw.casimir, FamilyKind::Power, n, &tw.vla.table).unwrap())
        .collect();
    for (label, table) in [("borel", &tw.borel), ("iwasawa", &tw.iwasawa)] {
        let m = involution_matrix(&powers, table, &tw.vla.table).unwrap();
        assert!(
            m.iter().flatten().all(|&b| b),
            "powers over sl2 {label}: {m:?}"
        );
    }
    let derivs: Vec<Hamiltonian> = (1..=2)
        .map(|n| {
            hamiltonian_family(&tw.casimir, FamilyKind::DerivProduct, n, &tw.vla.table).unwrap()
        })
        .collect();
    for (label, table) in [("borel", &tw.borel), ("iwasawa", &tw.iwasawa)] {
        let m = involution_matrix(&derivs, table, &tw.vla.table).unwrap();
        assert!(
            m.iter().flatten().all(|&b| b),
            "derivative products over sl2 {label}: {m:?}"
        );
    }

    let (v3, t3) = borel_table(sl3(), Q::zero());
    let s1 = invariant_polynomials(&v3.algebra, &v3.ring, 2).remove(0);
    let s2 = v3.algebra.trace_power(&v3.ring, 3).unwrap();
    let family: Vec<Hamiltonian> = vec![
        hamiltonian_family(&s1, FamilyKind::Power, 1, &v3.table).unwrap(),
        hamiltonian_family(&s1, FamilyKind::Power, 2, &v3.table).unwrap(),
        hamiltonian_family(&s2, FamilyKind::Custom, 1, &v3.table).unwrap(),
    ];
    let m = involution_matrix(&family, &t3, &v3.table).unwrap();
    assert!(
        m.iter().flatten().all(|&b| b),
        "{{S1, S1^2, S2}} over sl3 Borel: {m:?}"
    );

    // negative control: a non-central generator does not commute
    assert!(!involution_entry(
        &tw.casimir,
        &tw.vla.ring.gen(2),
        &tw.borel
    ));
    // spot-check one integrand through the explicit quotient test
    let integrand = functional_bracket(&powers[0].density, &powers[1].density, &tw.borel);
    assert!(is_total_derivative(&integrand));

    budget("C6", start, 60.0);
    report(
        "C6",
        true,
        start,
        "involution matrices all-true: {S^n} n<=3 and {S d^n S} n<=2 over sl2 Borel and \
         Iwasawa, {S1, S1^2, S2} over sl3 Borel; negative control rejected",
    );
}

/// Factorization: unique splitting on fiber bases, image/kernel data, θ
/// bijective; for the ±1-normalized operator the images and kernels coincide
/// with the decomposition parts.
#[test]
fn c7_factorization() {
    let start = Instant::now();
    for (alg, kind) in [
        (sl2(), "borel"),
        (sl2(), "iwasawa"),
        (sl3(), "borel"),
        (sl3(), "iwasawa"),
    ] {
        let name = format!("{} {kind}", alg.name());
        let vla = AffineVla::new(alg, Q::zero()).unwrap();
        let n = vla.n_gens();
        let d = decomposition(&vla.algebra, kind).unwrap();
        let r = rmatrix_from_decomposition(&vla, &d).unwrap();
        let fd = factorization_data(&vla, &r).unwrap();
        // ±1/2 spectrum: R ± 1 invertible, kernels trivial, θ on the full fiber
        assert_eq!(fd.plus_image.len(), n, "{name}");
        assert_eq!(fd.minus_image.len(), n, "{name}");
        assert!(fd.plus_kernel.is_empty() && fd.minus_kernel.is_empty(), "{name}");
        assert_eq!(fd.plus_quotient_dim, n, "{name}");
        // unique splitting x = x₊ − x₋ with x₊ = (R+1)(x/2), x₋ = (R−1)(x/2)
        for k in 0..n {
            let mut x = vec![Q::zero(); n];
            x[k] = Q::from_integer(1.into());
            let (p, m) = decompose_unique(&r, &x);
            let back: Vec<Q> = p.iter().zip(&m).map(|(a, b)| a - b).collect();
            assert_eq!(back, x, "{name} basis vector {k}");
        }
        // ±1-normalized operator: images are the decomposition parts and the
        // kernels coincide with them (the quotients collapse)
        let doubled = RMatrix::from_matrix(
            r.matrix
                .iter()
                .map(|row| row.iter().map(|c| c * &qi(2)).collect())
                .collect(),
        );
        let fd2 = factorization_data(&vla, &doubled).unwrap();
        assert_eq!(fd2.plus_image.len(), d.plus_basis.len(), "{name}");
        assert_eq!(fd2.minus_image.len(), d.minus_basis.len(), "{name}");
        assert_eq!(fd2.plus_kernel.len(), d.plus_basis.len(), "{name}");
        assert_eq!(fd2.minus_kernel.len(), d.minus_basis.len(), "{name}");
        assert_eq!(fd2.plus_quotient_dim, 0, "{name}");
        for v in &fd2.plus_image {
            assert!(vlax::linalg::in_span(&d.plus_basis, v), "{name}");
        }
        for v in &fd2.minus_image {
            assert!(vlax::linalg::in_span(&d.minus_basis, v), "{name}");
        }
    }
    budget("C7", start, 1.0);
    report(
        "C7",
        true,
        start,
        "unique fiber splittings, image/kernel data, and θ bijectivity over sl2/sl3 × \
         Borel/adapted; ±1-normalized operator recovers the decomposition parts",
    );
}

/// Closed-form solutions: rational family and oscillator at 1e-12, the
/// sech² branch at 1e-8 away from its singular point, RK4 against the exact
/// rational solution with first-integral conservation.
#[test]
fn c8_closed_form_solutions() {
    let start = Instant::now();
    let tw = sl2_twists(Q::zero());
    let pm_b = poisson_matrix(&tw.borel).unwrap();
    let pm_i = poisson_matrix(&tw.iwasawa).unwrap();
    let h1 = hamiltonian_family(&tw.casimir, FamilyKind::Power, 1, &tw.vla.table).unwrap();
    let h2 = hamiltonian_family(&tw.casimir, FamilyKind::DerivProduct, 2, &tw.vla.table).unwrap();
    let flow_b1 = flow(&h1, &pm_b, SignConvention::Paper).unwrap();
    let flow_b2 = flow(&h2, &pm_b, SignConvention::Paper).unwrap();
    let flow_i1 = flow(&h1, &pm_i, SignConvention::Paper).unwrap();

    let r1 = residual_check(
        &flow_b1,
        &families::RationalFamily { c: 1.0 },
        &GridSpec::time_only(0.0, 2.0, 401),
        1e-12,
    )
    .unwrap();
    assert!(r1.pass(), "rational family:\n{r1}");

    let r2 = residual_check(
        &flow_i1,
        &families::OscillatorFamily { a: 1.0 },
        &GridSpec::time_only(0.0, 6.3, 401),
        1e-12,
    )
    .unwrap();
    assert!(r2.pass(), "oscillator family:\n{r2}");

    let grid = GridSpec {
        x: (-10.0, 10.0),
        nx: 2001,
        t: (0.0, 1.0),
        nt: 11,
        exclusions: vec![(0.0, 1e-2)],
    };
    let sol = families::SolitonFamily {
        c: 1.0,
        x0: 0.0,
        direction: 1.0,
    };
    let r3 = residual_check(&flow_b2, &sol, &grid, 1e-8).unwrap();
    assert!(r3.pass(), "sech² branch:\n{r3}");
    // under the strict orientation the same profile travels the other way
    let strict2 = flow(&h2, &pm_b, SignConvention::Strict).unwrap();
    let sol_r = families::SolitonFamily {
        c: 1.0,
        x0: 0.0,
        direction: -1.0,
    };
    let r3s = residual_check(&strict2, &sol_r, &grid, 1e-8).unwrap();
    assert!(r3s.pass(), "strict-orientation sech² branch:\n{r3s}");

    // RK4: h(1) = 1/2 to 1e-8 at dt = 1e-3, quadratic density conserved to 1e-9
    let tr = rk4_integrate(&flow_b1, &[1.0, 1.0, -0.25], (0.0, 1.0), 1e-3, &[tw.casimir.clone()])
        .unwrap();
    let h_end = tr.states.last().unwrap()[1];
    assert!((h_end - 0.5).abs() < 1e-8, "h(1) = {h_end}");
    assert!(tr.drifts[0] < 1e-9, "first-integral drift {}", tr.drifts[0]);

    budget("C8", start, 30.0);
    report(
        "C8",
        true,
        start,
        &format!(
            "rational {:.1e}, oscillator {:.1e}, sech² {:.1e} (both orientations), RK4 \
             |h(1)-1/2| = {:.1e}, drift {:.1e}",
            r1.worst(),
            r2.worst(),
            r3.worst(),
            (h_end - 0.5).abs(),
            tr.drifts[0]
        ),
    );
}

/// KdV sanity against the quoted example: with {u_λ u} = λ and
/// h = u³ + ½(u′)², the quoted flow is 6uu′ + u‴. The Master formula gives
/// ±(6uu′ − u‴): the u‴ sign in the quoted display is unreachable under any
/// global convention, so this check is expected to stay red.
#[test]
fn c9_kdv_flow_matches_quoted_example() {
    let start = Instant::now();
    let (ring, fs_paper, fs_strict) = kdv_flows();
    let u = ring.gen(0);
    let quoted = &(&u * &ring.jet(0, 1)).scale(&qi(6)) + &ring.jet(0, 3);
    let pass = fs_paper.rhs[0] == quoted || fs_strict.rhs[0] == quoted;
    report(
        "C9",
        pass,
        start,
        "KdV flow vs quoted display (expected: one sign differs under every convention)",
    );
    assert!(
        pass,
        "KNOWN DEFECT IN THE REFERENCE DISPLAY: for h = u^3 + (1/2)(u')^2 the variational \
         derivative is 3u^2 - u'' (pinned independently by the hand oracle), so the flow \
         through H = d is d(3u^2 - u'') = 6uu' - u''' up to the global orientation: \
         {} (default) and {} (strict). The quoted 6uu' + u''' flips only the u''' term, \
         which no global convention can produce; it is the classical system for the \
         density u^3 - (1/2)(u')^2 instead.",
        fs_paper.rhs[0],
        fs_strict.rhs[0]
    );
}

/// Companion check pinning the actual KdV computation: the Heisenberg table
/// loaded from a spec file, H = ∂ (a symmetric one-generator structure, so
/// both index conventions agree), and the flow; the corrected density
/// reproduces the classical system exactly.
#[test]
fn c9_kdv_flow_pinned() {
    let start = Instant::now();
    let (ring, fs_paper, fs_strict) = kdv_flows();
    let u = ring.gen(0);
    let six_u_up = (&u * &ring.jet(0, 1)).scale(&qi(6));
    let uppp = ring.jet(0, 3);
    assert_eq!(fs_strict.rhs[0], &six_u_up - &uppp);
    assert_eq!(fs_paper.rhs[0], &six_u_up - &uppp);
    // the corrected density u³ − ½(u′)² gives the classical system under the
    // strict orientation
    let heis = heisenberg_table(&ring);
    let pm = poisson_matrix(&heis).unwrap();
    let corrected = &u.powi(3) - &ring.jet(0, 1).powi(2).scale(&q(1, 2));
    let h = vlax::aks::Hamiltonian::custom(corrected, 1);
    let fs = flow(&h, &pm, SignConvention::Strict).unwrap();
    assert_eq!(fs.rhs[0], &six_u_up + &uppp);
    budget("C9", start, 1.0);
    report(
        "C9b",
        true,
        start,
        "KdV flow pinned: 6uu' - u''' under both conventions; corrected density \
         u^3 - (1/2)(u')^2 reproduces 6uu' + u''' exactly",
    );
}

fn heisenberg_table(ring: &Ring) -> BracketTable {
    let path = format!(
        "{}/tests/fixtures/heisenberg.json",
        env!("CARGO_MANIFEST_DIR")
    );
    let alg = vlax::liealg::build_algebra(&path).unwrap();
    let vla = AffineVla::new(alg, qi(1)).unwrap();
    assert_eq!(vla.ring.names(), ring.names());
    vla.table
}

fn kdv_flows() -> (Ring, vlax::aks::FlowSystem, vlax::aks::FlowSystem) {
    let ring = Ring::new(vec!["u"]);
    let t = heisenberg_table(&ring);
    // {u_λ u} = λ exactly
    assert_eq!(
        t.entry(0, 0),
        &LambdaPoly::from_coeffs(&ring, vec![ring.zero(), ring.one()])
    );
    let pm = poisson_matrix(&t).unwrap();
    let dens = &ring.gen(0).powi(3) + &ring.jet(0, 1).powi(2).scale(&q(1, 2));
    let h = vlax::aks::Hamiltonian::custom(dens, 1);
    let fs_paper = flow(&h, &pm, SignConvention::Paper).unwrap();
    let fs_strict = flow(&h, &pm, SignConvention::Strict).unwrap();
    (ring, fs_paper, fs_strict)
}

/// The λ-bracket center: span{1, S} for sl2 at level 0 up to degree 2, the
/// quadratic and cubic invariants for sl3 up to degree 3, and closure of the
/// center under the total derivative.
#[test]
fn center_supporting_checks() {
    let start = Instant::now();
    let tw = sl2_twists(Q::zero());
    let basis = center_find(&tw.vla.table, 2);
    assert_eq!(basis.len(), 2);
    assert!(basis.iter().any(|p| p.degree() == 0));
    let quad = basis.iter().find(|p| p.degree() == 2).unwrap();
    let lead = quad.terms().next().unwrap().0.clone();
    let scale = tw.casimir.coefficient(&lead) / quad.coefficient(&lead);
    assert_eq!(quad.scale(&scale), tw.casimir);
    // T S central as well
    let ts = tw.casimir.total_derivative();
    for j in 0..3 {
        assert!(master_bracket(&ts, &tw.vla.ring.gen(j), &tw.vla.table).is_zero());
    }
    // sl3: quadratic and cubic center elements up to degree 3
    let v3 = AffineVla::new(sl3(), Q::zero()).unwrap();
    let c3 = center_find(&v3.table, 3);
    assert_eq!(c3.len(), 3, "constants, quadratic, and cubic");
    assert!(c3.iter().any(|p| p.degree() == 2));
    assert!(c3.iter().any(|p| p.degree() == 3));
    report(
        "center",
        true,
        start,
        "center bases match the invariant-polynomial routes and close under d",
    );
}
