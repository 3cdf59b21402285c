//! Numerical verification: residual checks of closed-form solutions against
//! flow systems, and fixed-step RK4 integration with first-integral drift
//! monitoring.
//!
//! Closed-form fields supply their space derivatives analytically, so the
//! residual of an exact solution is bounded by rounding error alone and the
//! acceptance tolerances need no discretization headroom.

use crate::aks::FlowSystem;
use crate::diffpoly::{DiffPoly, JetVar};
use std::fmt;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum VerifyError {
    #[error("solution supplies x-derivatives up to order {have}, flow needs {need}")]
    InsufficientOrder { have: u32, need: u32 },
    #[error("flow is not an ODE system (jet order {0} > 0); use a residual check instead")]
    NotOde(u32),
    #[error("field count {have} does not match generator count {need}")]
    FieldCount { have: usize, need: usize },
}

/// A closed-form field assignment: per-generator values with analytic
/// x-derivatives up to a declared order and the t-derivative.
pub trait ClosedFormField {
    fn n_fields(&self) -> usize;
    /// Highest x-derivative order available.
    fn max_order(&self) -> u32;
    /// ∂ₓᵏ of field `gen` at (x, t); `k = 0` is the value itself.
    fn x_deriv(&self, gen: usize, k: u32, x: f64, t: f64) -> f64;
    /// ∂ₜ of field `gen` at (x, t).
    fn t_deriv(&self, gen: usize, x: f64, t: f64) -> f64;
}

/// Rectangular sampling grid with optional excluded intervals around
/// singular points of the solution family.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub x: (f64, f64),
    pub nx: usize,
    pub t: (f64, f64),
    pub nt: usize,
    /// (center, radius) pairs; grid nodes with |x − center| < radius are
    /// skipped and the exclusions recorded in the report
    pub exclusions: Vec<(f64, f64)>,
}

impl GridSpec {
    pub fn time_only(t0: f64, t1: f64, nt: usize) -> Self {
        GridSpec {
            x: (0.0, 0.0),
            nx: 1,
            t: (t0, t1),
            nt,
            exclusions: Vec::new(),
        }
    }

    fn x_nodes(&self) -> Vec<f64> {
        sample(self.x.0, self.x.1, self.nx)
            .into_iter()
            .filter(|&x| {
                self.exclusions
                    .iter()
                    .all(|&(c, r)| (x - c).abs() >= r)
            })
            .collect()
    }

    fn t_nodes(&self) -> Vec<f64> {
        sample(self.t.0, self.t.1, self.nt)
    }
}

fn sample(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * (i as f64) / ((n - 1) as f64))
        .collect()
}

/// Per-equation maximum absolute residuals over the sample grid.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub max_residuals: Vec<f64>,
    pub tolerance: f64,
    pub nodes_checked: usize,
    pub exclusions: Vec<(f64, f64)>,
}

impl ResidualReport {
    pub fn pass(&self) -> bool {
        self.max_residuals.iter().all(|&r| r <= self.tolerance)
    }

    pub fn worst(&self) -> f64 {
        self.max_residuals.iter().cloned().fold(0.0, f64::max)
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} over {} nodes (tolerance {:.1e})",
            if self.pass() { "PASS" } else { "FAIL" },
            self.nodes_checked,
            self.tolerance
        )?;
        for (i, r) in self.max_residuals.iter().enumerate() {
            writeln!(f, "  equation {}: max |residual| = {:.3e}", i, r)?;
        }
        if !self.exclusions.is_empty() {
            for (c, r) in &self.exclusions {
                writeln!(f, "  excluded |x - {}| < {}", c, r)?;
            }
        }
        Ok(())
    }
}

/// Evaluate `∂ₜ(field_i) − rhs_i` on every grid node using the analytic
/// derivative evaluators of the solution.
pub fn residual_check(
    fs: &FlowSystem,
    sol: &dyn ClosedFormField,
    grid: &GridSpec,
    tol: f64,
) -> Result<ResidualReport, VerifyError> {
    let n = fs.rhs.len();
    if sol.n_fields() != n {
        return Err(VerifyError::FieldCount {
            have: sol.n_fields(),
            need: n,
        });
    }
    let need = fs.max_jet_order();
    if sol.max_order() < need {
        return Err(VerifyError::InsufficientOrder {
            have: sol.max_order(),
            need,
        });
    }
    let mut max_residuals = vec![0.0f64; n];
    let mut nodes = 0usize;
    for &t in &grid.t_nodes() {
        for &x in &grid.x_nodes() {
            nodes += 1;
            let jet = |v: JetVar| sol.x_deriv(v.gen, v.order, x, t);
            for i in 0..n {
                let rhs = fs.rhs[i].eval_f64(&jet);
                let res = (sol.t_deriv(i, x, t) - rhs).abs();
                if res > max_residuals[i] {
                    max_residuals[i] = res;
                }
            }
        }
    }
    Ok(ResidualReport {
        max_residuals,
        tolerance: tol,
        nodes_checked: nodes,
        exclusions: grid.exclusions.clone(),
    })
}

/// Builtin closed-form solution families.
pub mod families {
    use super::ClosedFormField;

    /// Rational first-flow family: f = 1, h = 1/(t+C), e = −¼(t+C)⁻².
    pub struct RationalFamily {
        pub c: f64,
    }

    impl ClosedFormField for RationalFamily {
        fn n_fields(&self) -> usize {
            3
        }
        fn max_order(&self) -> u32 {
            2
        }
        fn x_deriv(&self, gen: usize, k: u32, _x: f64, t: f64) -> f64 {
            if k > 0 {
                return 0.0;
            }
            let z = 1.0 / (t + self.c);
            match gen {
                0 => 1.0,
                1 => z,
                _ => -0.25 * z * z,
            }
        }
        fn t_deriv(&self, gen: usize, _x: f64, t: f64) -> f64 {
            let z = 1.0 / (t + self.c);
            match gen {
                0 => 0.0,
                1 => -z * z,
                _ => 0.5 * z * z * z,
            }
        }
    }

    /// Oscillator family for the adapted-basis first flow with f − e = ½:
    /// f + e = A sin t, h = A cos t.
    pub struct OscillatorFamily {
        pub a: f64,
    }

    impl ClosedFormField for OscillatorFamily {
        fn n_fields(&self) -> usize {
            3
        }
        fn max_order(&self) -> u32 {
            2
        }
        fn x_deriv(&self, gen: usize, k: u32, _x: f64, t: f64) -> f64 {
            if k > 0 {
                return 0.0;
            }
            let xi = self.a * t.sin();
            match gen {
                0 => 0.5 * (xi + 0.5),
                1 => self.a * t.cos(),
                _ => 0.5 * (xi - 0.5),
            }
        }
        fn t_deriv(&self, gen: usize, _x: f64, t: f64) -> f64 {
            match gen {
                0 => 0.5 * self.a * t.cos(),
                1 => -self.a * t.sin(),
                _ => 0.5 * self.a * t.cos(),
            }
        }
    }

    /// Traveling sech² branch of the second Borel flow. With
    /// B(x) = 9^{1/3}·√c/2·(x − x₀)^{2/3} the fields are
    ///
    /// f = B²/(2c),  h = B·tanh φ,  e = (c/2)·sech²φ,
    ///
    /// where φ = (√c/2)(x + ε·c·t) and ε = ±1 selects the propagation
    /// direction: ε = +1 solves the σ = −1 flow, ε = −1 the strict one.
    /// B″ blows up at x₀, so grids must exclude a neighborhood of x₀.
    pub struct SolitonFamily {
        pub c: f64,
        pub x0: f64,
        pub direction: f64,
    }

    impl SolitonFamily {
        fn b(&self, x: f64) -> f64 {
            // real cube-root convention: (x − x₀)^{2/3} = |x − x₀|^{2/3}
            let base: f64 = 9.0;
            base.powf(1.0 / 3.0) * self.c.sqrt() / 2.0 * (x - self.x0).abs().powf(2.0 / 3.0)
        }
        fn b_prime(&self, x: f64) -> f64 {
            let base: f64 = 9.0;
            let s = x - self.x0;
            base.powf(1.0 / 3.0) * self.c.sqrt() / 2.0 * (2.0 / 3.0) * s.signum()
                * s.abs().powf(-1.0 / 3.0)
        }
        fn b_second(&self, x: f64) -> f64 {
            let base: f64 = 9.0;
            let s = x - self.x0;
            base.powf(1.0 / 3.0) * self.c.sqrt() / 2.0 * (2.0 / 3.0) * (-1.0 / 3.0)
                * s.abs().powf(-4.0 / 3.0)
        }
        fn phi(&self, x: f64, t: f64) -> f64 {
            self.c.sqrt() / 2.0 * (x + self.direction * self.c * t)
        }
        fn phi_x(&self) -> f64 {
            self.c.sqrt() / 2.0
        }
        fn phi_t(&self) -> f64 {
            self.direction * self.c.powf(1.5) / 2.0
        }
    }

    impl ClosedFormField for SolitonFamily {
        fn n_fields(&self) -> usize {
            3
        }
        fn max_order(&self) -> u32 {
            2
        }
        fn x_deriv(&self, gen: usize, k: u32, x: f64, t: f64) -> f64 {
            let b = self.b(x);
            let bp = self.b_prime(x);
            let bpp = self.b_second(x);
            let phi = self.phi(x, t);
            let px = self.phi_x();
            let sech = 1.0 / phi.cosh();
            let tanh = phi.tanh();
            match (gen, k) {
                // f = B²/(2c)
                (0, 0) => b * b / (2.0 * self.c),
                (0, 1) => b * bp / self.c,
                (0, 2) => (bp * bp + b * bpp) / self.c,
                // h = B tanh φ
                (1, 0) => b * tanh,
                (1, 1) => bp * tanh + b * px * sech * sech,
                (1, 2) => {
                    bpp * tanh + 2.0 * bp * px * sech * sech
                        - 2.0 * b * px * px * sech * sech * tanh
                }
                // e = (c/2) sech²φ
                (2, 0) => self.c / 2.0 * sech * sech,
                (2, 1) => -self.c * px * sech * sech * tanh,
                (2, 2) => -self.c * px * px * (sech.powi(4) - 2.0 * sech * sech * tanh * tanh),
                _ => 0.0,
            }
        }
        fn t_deriv(&self, gen: usize, x: f64, t: f64) -> f64 {
            let b = self.b(x);
            let phi = self.phi(x, t);
            let pt = self.phi_t();
            let sech = 1.0 / phi.cosh();
            let tanh = phi.tanh();
            match gen {
                0 => 0.0,
                1 => b * pt * sech * sech,
                _ => -self.c * pt * sech * sech * tanh,
            }
        }
    }
}

/// Classical fixed-step RK4 trajectory of a jet-order-0 flow system, with
/// drift reporting for supplied first integrals.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// max |I(t) − I(0)| per monitored integral
    pub drifts: Vec<f64>,
}

pub fn rk4_integrate(
    fs: &FlowSystem,
    init: &[f64],
    t_span: (f64, f64),
    dt: f64,
    integrals: &[DiffPoly],
) -> Result<Trajectory, VerifyError> {
    let order = fs.max_jet_order();
    if order > 0 {
        return Err(VerifyError::NotOde(order));
    }
    assert!(dt > 0.0, "step size must be positive");
    let n = fs.rhs.len();
    if init.len() != n {
        return Err(VerifyError::FieldCount {
            have: init.len(),
            need: n,
        });
    }
    let eval_rhs = |state: &[f64]| -> Vec<f64> {
        let jet = |v: JetVar| state[v.gen];
        fs.rhs.iter().map(|p| p.eval_f64(&jet)).collect()
    };
    let eval_integral = |p: &DiffPoly, state: &[f64]| -> f64 {
        let jet = |v: JetVar| state[v.gen];
        p.eval_f64(&jet)
    };
    let steps = ((t_span.1 - t_span.0) / dt).round() as usize;
    let mut state = init.to_vec();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let init_values: Vec<f64> = integrals.iter().map(|p| eval_integral(p, init)).collect();
    let mut drifts = vec![0.0f64; integrals.len()];
    let mut t = t_span.0;
    times.push(t);
    states.push(state.clone());
    for _ in 0..steps {
        let k1 = eval_rhs(&state);
        let mid1: Vec<f64> = state.iter().zip(&k1).map(|(y, k)| y + 0.5 * dt * k).collect();
        let k2 = eval_rhs(&mid1);
        let mid2: Vec<f64> = state.iter().zip(&k2).map(|(y, k)| y + 0.5 * dt * k).collect();
        let k3 = eval_rhs(&mid2);
        let end: Vec<f64> = state.iter().zip(&k3).map(|(y, k)| y + dt * k).collect();
        let k4 = eval_rhs(&end);
        for i in 0..n {
            state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += dt;
        times.push(t);
        states.push(state.clone());
        for (m, p) in integrals.iter().enumerate() {
            let d = (eval_integral(p, &state) - init_values[m]).abs();
            if d > drifts[m] {
                drifts[m] = d;
            }
        }
    }
    Ok(Trajectory {
        times,
        states,
        drifts,
    })
}

/// Tab-separated export of a residual grid: coordinates, field values, and
/// per-equation residuals, one row per node.
pub fn residual_table(fs: &FlowSystem, sol: &dyn ClosedFormField, grid: &GridSpec) -> String {
    let n = fs.rhs.len();
    let mut out = String::from("t\tx");
    for i in 0..n {
        out.push_str(&format!("\tfield{i}\tresidual{i}"));
    }
    out.push('\n');
    for &t in &grid.t_nodes() {
        for &x in &grid.x_nodes() {
            let jet = |v: JetVar| sol.x_deriv(v.gen, v.order, x, t);
            out.push_str(&format!("{t}\t{x}"));
            for i in 0..n {
                let rhs = fs.rhs[i].eval_f64(&jet);
                let res = sol.t_deriv(i, x, t) - rhs;
                out.push_str(&format!("\t{}\t{:e}", sol.x_deriv(i, 0, x, t), res));
            }
            out.push('\n');
        }
    }
    out
}

/// Tab-separated trajectory export.
pub fn trajectory_table(tr: &Trajectory, names: &[String]) -> String {
    let mut out = String::from("t");
    for n in names {
        out.push_str(&format!("\t{n}"));
    }
    out.push('\n');
    for (t, s) in tr.times.iter().zip(&tr.states) {
        out.push_str(&format!("{t}"));
        for v in s {
            out.push_str(&format!("\t{v}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::families::*;
    use super::*;
    use crate::aks::{flow, hamiltonian_family, FamilyKind, SignConvention};
    use crate::diffpoly::{q, qi};
    use crate::liealg::{decomposition, sl2};
    use crate::pva::poisson_matrix;
    use crate::vla::{rmatrix_from_decomposition, twisted_table, AffineVla};

    fn sl2_flows() -> (crate::diffpoly::Ring, FlowSystem, FlowSystem, FlowSystem) {
        let v = AffineVla::new(sl2(), qi(0)).unwrap();
        let ring = v.ring.clone();
        let s = &ring.gen(1).powi(2).scale(&q(1, 2)) + &(&ring.gen(0) * &ring.gen(2)).scale(&qi(2));
        let db = decomposition(&v.algebra, "borel").unwrap();
        let rb = rmatrix_from_decomposition(&v, &db).unwrap();
        let borel = twisted_table(&v, &rb).validated().unwrap();
        let pmb = poisson_matrix(&borel).unwrap();
        let h1 = hamiltonian_family(&s, FamilyKind::Power, 1, &v.table).unwrap();
        let flow1 = flow(&h1, &pmb, SignConvention::Paper).unwrap();
        let h2 = hamiltonian_family(&s, FamilyKind::DerivProduct, 2, &v.table).unwrap();
        let flow2 = flow(&h2, &pmb, SignConvention::Paper).unwrap();
        let di = decomposition(&v.algebra, "iwasawa").unwrap();
        let ri = rmatrix_from_decomposition(&v, &di).unwrap();
        let iw = twisted_table(&v, &ri).validated().unwrap();
        let pmi = poisson_matrix(&iw).unwrap();
        let flow_iw = flow(&h1, &pmi, SignConvention::Paper).unwrap();
        (ring, flow1, flow2, flow_iw)
    }

    #[test]
    fn rational_family_residual() {
        let (_, flow1, _, _) = sl2_flows();
        let sol = RationalFamily { c: 1.0 };
        let grid = GridSpec::time_only(0.0, 2.0, 201);
        let report = residual_check(&flow1, &sol, &grid, 1e-12).unwrap();
        assert!(report.pass(), "{report}");
    }

    #[test]
    fn oscillator_family_residual() {
        let (_, _, _, flow_iw) = sl2_flows();
        let sol = OscillatorFamily { a: 1.5 };
        let grid = GridSpec::time_only(0.0, 6.3, 201);
        let report = residual_check(&flow_iw, &sol, &grid, 1e-12).unwrap();
        assert!(report.pass(), "{report}");
    }

    #[test]
    fn soliton_family_residual_both_directions() {
        let (_, _, flow2, _) = sl2_flows();
        let grid = GridSpec {
            x: (-10.0, 10.0),
            nx: 2001,
            t: (0.0, 1.0),
            nt: 11,
            exclusions: vec![(0.0, 1e-2)],
        };
        // left-moving branch solves the σ = −1 system
        let sol = SolitonFamily {
            c: 1.0,
            x0: 0.0,
            direction: 1.0,
        };
        let report = residual_check(&flow2, &sol, &grid, 1e-8).unwrap();
        assert!(report.pass(), "{report}");
        // right-moving branch solves the strict system (global negation)
        let strict = FlowSystem {
            rhs: flow2.rhs.iter().map(|p| -p).collect(),
            hamiltonian: flow2.hamiltonian.clone(),
            time_label: flow2.time_label,
            sigma: 1,
        };
        let sol_r = SolitonFamily {
            c: 1.0,
            x0: 0.0,
            direction: -1.0,
        };
        let report_r = residual_check(&strict, &sol_r, &grid, 1e-8).unwrap();
        assert!(report_r.pass(), "{report_r}");
    }

    #[test]
    fn insufficient_order_is_a_contract_error() {
        let (_, _, flow2, _) = sl2_flows();
        struct Flat;
        impl ClosedFormField for Flat {
            fn n_fields(&self) -> usize {
                3
            }
            fn max_order(&self) -> u32 {
                1
            }
            fn x_deriv(&self, _: usize, _: u32, _: f64, _: f64) -> f64 {
                0.0
            }
            fn t_deriv(&self, _: usize, _: f64, _: f64) -> f64 {
                0.0
            }
        }
        let grid = GridSpec::time_only(0.0, 1.0, 2);
        assert!(matches!(
            residual_check(&flow2, &Flat, &grid, 1e-8),
            Err(VerifyError::InsufficientOrder { have: 1, need: 2 })
        ));
    }

    #[test]
    fn rk4_reproduces_rational_solution_and_conserves_s() {
        let (ring, flow1, _, _) = sl2_flows();
        let s = &ring.gen(1).powi(2).scale(&q(1, 2)) + &(&ring.gen(0) * &ring.gen(2)).scale(&qi(2));
        let tr = rk4_integrate(&flow1, &[1.0, 1.0, -0.25], (0.0, 1.0), 1e-3, &[s]).unwrap();
        let last = tr.states.last().unwrap();
        assert!((last[1] - 0.5).abs() < 1e-8, "h(1) = {}", last[1]);
        assert!(tr.drifts[0] < 1e-9, "S drift {}", tr.drifts[0]);
    }

    #[test]
    fn rk4_refuses_pdes_and_keeps_constants() {
        let (ring, _, flow2, _) = sl2_flows();
        assert!(matches!(
            rk4_integrate(&flow2, &[0.0; 3], (0.0, 1.0), 0.1, &[]),
            Err(VerifyError::NotOde(_))
        ));
        let zero_flow = FlowSystem {
            rhs: vec![ring.zero(), ring.zero(), ring.zero()],
            hamiltonian: ring.zero(),
            time_label: 1,
            sigma: -1,
        };
        let tr = rk4_integrate(&zero_flow, &[1.0, 2.0, 3.0], (0.0, 1.0), 0.1, &[]).unwrap();
        assert_eq!(tr.states.last().unwrap(), &vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        let (_, flow1, _, _) = sl2_flows();
        let exact = |t: f64| 1.0 / (t + 1.0);
        let mut errors = Vec::new();
        for dt in [1e-2, 5e-3, 2.5e-3] {
            let tr = rk4_integrate(&flow1, &[1.0, 1.0, -0.25], (0.0, 1.0), dt, &[]).unwrap();
            let h_end = tr.states.last().unwrap()[1];
            errors.push((h_end - exact(1.0)).abs());
        }
        let order1 = (errors[0] / errors[1]).log2();
        let order2 = (errors[1] / errors[2]).log2();
        assert!(
            order1 >= 3.8 && order2 >= 3.8,
            "observed orders {order1:.2}, {order2:.2}"
        );
    }
}
