//! Command-line driver: algebra validation, R-matrix construction, bracket
//! tables, Yang-Baxter checks, Poisson matrices, hierarchies, involution
//! verification, and numerical solution checks.
//!
//! Exit codes: 0 on success, 1 when a mathematical check fails (a nonzero
//! defect, a failed residual), 2 on usage errors.

use clap::{Args, Parser, Subcommand};
use num::Zero;
use vlax::aks::{
    flow, hamiltonian_family, involution_matrix, FamilyKind, Hamiltonian, SignConvention,
};
use vlax::diffpoly::{DiffPoly, Q};
use vlax::export::{self, Format};
use vlax::liealg::{self, Decomposition, LieAlgebraSpec};
use vlax::pva::{axioms_report, center_find, poisson_matrix};
use vlax::verify::{families, residual_check, rk4_integrate, GridSpec};
use vlax::vla::{
    factorization_data, rmatrix_from_decomposition, twisted_table, ybe_defect, AffineVla, RMatrix,
    YbeKind,
};

#[derive(Parser)]
#[command(name = "vlax", version, about = "exact R-matrix and integrable-hierarchy calculator")]
struct Cli {
    /// Use the strict du/dt = {∫h, u} orientation instead of the default
    /// display convention
    #[arg(long, global = true)]
    strict_convention: bool,

    /// Output format
    #[arg(long, global = true, default_value = "text")]
    format: Format,

    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    output: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct AlgebraArgs {
    /// Builtin name (sl2, sl3) or path to an algebra spec file
    #[arg(long)]
    algebra: String,
    /// Level of the affine structure
    #[arg(long, default_value = "0")]
    level: String,
}

#[derive(Args)]
struct DecompArgs {
    /// Decomposition kind: borel, iwasawa, or custom (from the spec file)
    #[arg(long)]
    decomposition: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an algebra (and optional decomposition) and print a report
    CheckLie {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        decomposition: DecompArgs,
    },
    /// Print the factorizable R-matrix of a decomposition
    Rmatrix {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        decomposition: DecompArgs,
    },
    /// Print the untwisted or twisted λ-bracket table
    BracketTable {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        decomposition: DecompArgs,
    },
    /// Yang-Baxter defects of the factorizable R-matrix
    Mybe {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        decomposition: DecompArgs,
        /// Check the constant equation instead of the modified one
        #[arg(long)]
        cybe: bool,
    },
    /// Factorization data: images and kernels of R ± 1 and the quotient map
    Factorize {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        decomposition: DecompArgs,
    },
    /// Poisson structure matrix of the (twisted) table
    PoissonMatrix {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        decomposition: DecompArgs,
    },
    /// λ-bracket center in jet order 0 up to a degree bound
    Center {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[arg(long, default_value_t = 2)]
        max_degree: u32,
    },
    /// Hamiltonian flow of a center-family density through the twisted
    /// Poisson structure
    Hierarchy {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        decomposition: DecompArgs,
        /// Family kind: power (Sⁿ) or deriv-product (S·∂ⁿS)
        #[arg(long, default_value = "power")]
        family: String,
        /// Family index n ≥ 1
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// Pairwise involution of a center family under the twisted bracket
    Involution {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        decomposition: DecompArgs,
        /// Center elements up to this degree enter the family
        #[arg(long, default_value_t = 3)]
        max_degree: u32,
    },
    /// Residual check of a builtin closed-form solution against a builtin flow
    VerifySolution {
        /// Flow: borel1, borel2, iwasawa1
        #[arg(long)]
        flow: String,
        /// Solution family: rational, oscillator, soliton
        #[arg(long)]
        solution: String,
        #[arg(long)]
        tol: Option<f64>,
        /// Emit the per-node tab-separated residual table instead of the summary
        #[arg(long)]
        dump_grid: bool,
    },
    /// RK4 integration of the rational first flow with drift monitoring
    Integrate {
        /// Comma-separated initial values, one per generator
        #[arg(long, default_value = "1,1,-0.25")]
        init: String,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
    /// Export a table, matrix, or flow in the chosen format
    Export {
        /// What to export: table, matrix, flow
        #[arg(long)]
        what: String,
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        decomposition: DecompArgs,
        #[arg(long, default_value = "power")]
        family: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
}

fn main() {
    init_thread_pool();
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(clean) => {
            if clean {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("VLAX_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

struct Context {
    algebra: LieAlgebraSpec,
    vla: AffineVla,
    decomposition: Option<Decomposition>,
    rmatrix: Option<RMatrix>,
}

fn load_context(a: &AlgebraArgs, d: &DecompArgs) -> Result<Context, String> {
    let level: Q = liealg::parse_q(&a.level).map_err(|e| e.to_string())?;
    let (algebra, custom) = if std::path::Path::new(&a.algebra).exists() {
        liealg::load_algebra_file_full(&a.algebra).map_err(|e| e.to_string())?
    } else {
        (liealg::build_algebra(&a.algebra).map_err(|e| e.to_string())?, None)
    };
    let vla = AffineVla::new(algebra.clone(), level).map_err(|e| e.to_string())?;
    let decomposition = match d.decomposition.as_deref() {
        None => None,
        Some("custom") => Some(custom.ok_or("spec file carries no decomposition")?),
        Some(kind) => Some(liealg::decomposition(&algebra, kind).map_err(|e| e.to_string())?),
    };
    let rmatrix = match &decomposition {
        Some(dec) => Some(rmatrix_from_decomposition(&vla, dec).map_err(|e| e.to_string())?),
        None => None,
    };
    Ok(Context {
        algebra,
        vla,
        decomposition,
        rmatrix,
    })
}

fn emit(cli: &Cli, text: String) -> Result<(), String> {
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn convention(cli: &Cli) -> SignConvention {
    if cli.strict_convention {
        SignConvention::Strict
    } else {
        SignConvention::Paper
    }
}

fn active_table(ctx: &Context) -> Result<(vlax::lambda::BracketTable, bool), String> {
    match &ctx.rmatrix {
        Some(r) => {
            let tw = twisted_table(&ctx.vla, r);
            let pass = tw.axioms.pass();
            Ok((tw.table, pass))
        }
        None => Ok((ctx.vla.table.clone(), true)),
    }
}

fn center_density(ctx: &Context) -> Result<DiffPoly, String> {
    let ring = &ctx.vla.ring;
    let quad = liealg::invariant_polynomials(&ctx.algebra, ring, 2);
    quad.into_iter()
        .next()
        .ok_or_else(|| "algebra has no quadratic invariant".to_string())
}

fn family_kind(name: &str) -> Result<FamilyKind, String> {
    match name {
        "power" => Ok(FamilyKind::Power),
        "deriv-product" => Ok(FamilyKind::DerivProduct),
        other => Err(format!("unknown family `{other}`")),
    }
}

fn run(cli: &Cli) -> Result<bool, String> {
    match &cli.command {
        Command::CheckLie { algebra, decomposition } => {
            let ctx = load_context(algebra, decomposition)?;
            let mut out = format!(
                "algebra {}: dim {}, generators [{}]\nvalidation: ok (antisymmetry, Jacobi, invariant form)\n",
                ctx.algebra.name(),
                ctx.algebra.dim(),
                ctx.algebra.names().join(", ")
            );
            let mut clean = true;
            if let Some(dec) = &ctx.decomposition {
                out.push_str(&format!("decomposition {}:\n{}\n", dec.kind, dec.report));
                clean = dec.report.minus_closed;
            }
            emit(cli, out)?;
            Ok(clean)
        }
        Command::Rmatrix { algebra, decomposition } => {
            let ctx = load_context(algebra, decomposition)?;
            let r = ctx.rmatrix.as_ref().ok_or("a decomposition is required")?;
            let names = ctx.algebra.names();
            let mut out = String::new();
            for (i, name) in names.iter().enumerate() {
                let img = r.apply_linear(&ctx.vla.ring.gen(i)).map_err(|e| e.to_string())?;
                out.push_str(&format!("R({name}) = {img}\n"));
            }
            emit(cli, out)?;
            Ok(true)
        }
        Command::BracketTable { algebra, decomposition } => {
            let ctx = load_context(algebra, decomposition)?;
            let (table, pass) = active_table(&ctx)?;
            let label = ctx
                .decomposition
                .as_ref()
                .map(|d| d.kind.clone())
                .unwrap_or_else(|| "untwisted".into());
            let text = match cli.format {
                Format::Text => export::table_text(&table),
                Format::Latex => export::table_latex(&table, if label == "untwisted" { "" } else { "R" }),
                Format::Json => format!("{:#}\n", export::table_json(&table, &label)),
            };
            let mut out = text;
            if !pass {
                out.push_str(&format!("axioms: {}\n", axioms_report(&table).summary()));
            }
            emit(cli, out)?;
            Ok(pass)
        }
        Command::Mybe { algebra, decomposition, cybe } => {
            let ctx = load_context(algebra, decomposition)?;
            let r = ctx.rmatrix.as_ref().ok_or("a decomposition is required")?;
            let kind = if *cybe { YbeKind::Constant } else { YbeKind::Modified };
            let defects = ybe_defect(&ctx.vla, r, kind).map_err(|e| e.to_string())?;
            let names = ctx.algebra.names();
            let mut out = String::new();
            let mut clean = true;
            for ((i, j), d) in &defects {
                if !d.is_zero() {
                    clean = false;
                    out.push_str(&format!("defect ({}, {}): {}\n", names[*i], names[*j], d));
                }
            }
            out.push_str(&format!(
                "{}: {}\n",
                if *cybe { "constant equation" } else { "modified equation" },
                if clean { "holds on all generator pairs" } else { "fails" }
            ));
            emit(cli, out)?;
            Ok(clean)
        }
        Command::Factorize { algebra, decomposition } => {
            let ctx = load_context(algebra, decomposition)?;
            let r = ctx.rmatrix.as_ref().ok_or("a decomposition is required")?;
            let fd = factorization_data(&ctx.vla, r).map_err(|e| e.to_string())?;
            let out = format!(
                "dim (R+1)L = {}\ndim (R-1)L = {}\ndim ker(R-1) = {}\ndim ker(R+1) = {}\nquotient dim = {} (θ bijective)\n",
                fd.plus_image.len(),
                fd.minus_image.len(),
                fd.plus_kernel.len(),
                fd.minus_kernel.len(),
                fd.plus_quotient_dim
            );
            emit(cli, out)?;
            Ok(true)
        }
        Command::PoissonMatrix { algebra, decomposition } => {
            let ctx = load_context(algebra, decomposition)?;
            let (table, _) = active_table(&ctx)?;
            let pm = poisson_matrix(&table).map_err(|e| e.to_string())?;
            let sigma = convention(cli).sigma();
            let text = match cli.format {
                Format::Text => export::matrix_text(&pm, sigma),
                Format::Latex => export::matrix_latex(&pm, sigma),
                Format::Json => format!("{:#}\n", export::matrix_json(&pm, sigma, ctx.algebra.name())),
            };
            emit(cli, text)?;
            Ok(true)
        }
        Command::Center { algebra, max_degree } => {
            let ctx = load_context(algebra, &DecompArgs { decomposition: None })?;
            let basis = center_find(&ctx.vla.table, *max_degree);
            let mut out = format!("center basis ({} elements, degree <= {max_degree}):\n", basis.len());
            for p in &basis {
                out.push_str(&format!("  {p}\n"));
            }
            emit(cli, out)?;
            Ok(true)
        }
        Command::Hierarchy { algebra, decomposition, family, n } => {
            let ctx = load_context(algebra, decomposition)?;
            let (table, pass) = active_table(&ctx)?;
            if !pass {
                return Err("twisted table fails the vertex Lie algebra axioms".into());
            }
            let s = center_density(&ctx)?;
            let kind = family_kind(family)?;
            let h = hamiltonian_family(&s, kind, *n, &ctx.vla.table).map_err(|e| e.to_string())?;
            let pm = poisson_matrix(&table).map_err(|e| e.to_string())?;
            let fs = flow(&h, &pm, convention(cli)).map_err(|e| e.to_string())?;
            let names = ctx.algebra.names().to_vec();
            let mut text = match cli.format {
                Format::Text => export::flow_text(&fs, &names),
                Format::Latex => export::flow_latex(&fs, &names),
                Format::Json => format!("{:#}\n", export::flow_json(&fs, &names, ctx.algebra.name())),
            };
            if fs.is_trivial() {
                text.push_str("flow is trivial (all right-hand sides vanish)\n");
            }
            emit(cli, text)?;
            Ok(true)
        }
        Command::Involution { algebra, decomposition, max_degree } => {
            let ctx = load_context(algebra, decomposition)?;
            let (table, _) = active_table(&ctx)?;
            let ring = &ctx.vla.ring;
            let mut family: Vec<Hamiltonian> = Vec::new();
            // center generators of degree ≤ D, plus powers of the quadratic
            let mut gens: Vec<DiffPoly> = Vec::new();
            for d in 2..=*max_degree {
                gens.extend(liealg::invariant_polynomials(&ctx.algebra, ring, d));
            }
            if gens.is_empty() {
                return Err("no center generators up to the degree bound".into());
            }
            let quad = gens[0].clone();
            for g in &gens {
                family.push(
                    hamiltonian_family(g, FamilyKind::Custom, 1, &ctx.vla.table)
                        .map_err(|e| e.to_string())?,
                );
            }
            let mut power = quad.clone();
            for k in 2..=3u32 {
                power = &power * &quad;
                if power.degree() <= 2 * max_degree {
                    family.push(
                        hamiltonian_family(&power, FamilyKind::Custom, k, &ctx.vla.table)
                            .map_err(|e| e.to_string())?,
                    );
                }
            }
            let m = involution_matrix(&family, &table, &ctx.vla.table).map_err(|e| e.to_string())?;
            let all = m.iter().flatten().all(|&b| b);
            let mut out = format!("involution matrix ({} densities):\n", family.len());
            for row in &m {
                let line: Vec<&str> = row.iter().map(|&b| if b { "true" } else { "false" }).collect();
                out.push_str(&format!("  [{}]\n", line.join(", ")));
            }
            out.push_str(if all { "all pairs Poisson-commute\n" } else { "involution fails\n" });
            emit(cli, out)?;
            Ok(all)
        }
        Command::VerifySolution { flow: flow_name, solution, tol, dump_grid } => {
            let (fs, names) = builtin_flow(flow_name, convention(cli))?;
            let (sol, default_tol, grid): (Box<dyn vlax::verify::ClosedFormField>, f64, GridSpec) =
                match solution.as_str() {
                    "rational" => (
                        Box::new(families::RationalFamily { c: 1.0 }),
                        1e-12,
                        GridSpec::time_only(0.0, 2.0, 201),
                    ),
                    "oscillator" => (
                        Box::new(families::OscillatorFamily { a: 1.0 }),
                        1e-12,
                        GridSpec::time_only(0.0, 6.3, 201),
                    ),
                    "soliton" => (
                        Box::new(families::SolitonFamily {
                            c: 1.0,
                            x0: 0.0,
                            direction: if cli.strict_convention { -1.0 } else { 1.0 },
                        }),
                        1e-8,
                        GridSpec {
                            x: (-10.0, 10.0),
                            nx: 2001,
                            t: (0.0, 1.0),
                            nt: 11,
                            exclusions: vec![(0.0, 1e-2)],
                        },
                    ),
                    other => return Err(format!("unknown solution family `{other}`")),
                };
            let _ = names;
            if *dump_grid {
                let table = vlax::verify::residual_table(&fs, sol.as_ref(), &grid);
                emit(cli, table)?;
                return Ok(true);
            }
            let report =
                residual_check(&fs, sol.as_ref(), &grid, tol.unwrap_or(default_tol)).map_err(|e| e.to_string())?;
            let pass = report.pass();
            emit(cli, format!("{report}"))?;
            Ok(pass)
        }
        Command::Integrate { init, t_end, dt } => {
            let (fs, names) = builtin_flow("borel1", convention(cli))?;
            let init: Vec<f64> = init
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            let ring = fs.hamiltonian.ring().clone();
            let s = fs.hamiltonian.clone();
            let tr = rk4_integrate(&fs, &init, (0.0, *t_end), *dt, &[s]).map_err(|e| e.to_string())?;
            let mut out = vlax::verify::trajectory_table(&tr, &names);
            out.push_str(&format!("first-integral drift: {:e}\n", tr.drifts[0]));
            let _ = ring;
            emit(cli, out)?;
            Ok(true)
        }
        Command::Export { what, algebra, decomposition, family, n } => {
            match what.as_str() {
                "table" => run(&Cli {
                    strict_convention: cli.strict_convention,
                    format: cli.format,
                    output: cli.output.clone(),
                    command: Command::BracketTable {
                        algebra: AlgebraArgs {
                            algebra: algebra.algebra.clone(),
                            level: algebra.level.clone(),
                        },
                        decomposition: DecompArgs {
                            decomposition: decomposition.decomposition.clone(),
                        },
                    },
                }),
                "matrix" => run(&Cli {
                    strict_convention: cli.strict_convention,
                    format: cli.format,
                    output: cli.output.clone(),
                    command: Command::PoissonMatrix {
                        algebra: AlgebraArgs {
                            algebra: algebra.algebra.clone(),
                            level: algebra.level.clone(),
                        },
                        decomposition: DecompArgs {
                            decomposition: decomposition.decomposition.clone(),
                        },
                    },
                }),
                "flow" => run(&Cli {
                    strict_convention: cli.strict_convention,
                    format: cli.format,
                    output: cli.output.clone(),
                    command: Command::Hierarchy {
                        algebra: AlgebraArgs {
                            algebra: algebra.algebra.clone(),
                            level: algebra.level.clone(),
                        },
                        decomposition: DecompArgs {
                            decomposition: decomposition.decomposition.clone(),
                        },
                        family: family.clone(),
                        n: *n,
                    },
                }),
                other => Err(format!("unknown export target `{other}`")),
            }
        }
    }
}

/// The three builtin sl2 flows used by the numerical subcommands.
fn builtin_flow(name: &str, conv: SignConvention) -> Result<(vlax::aks::FlowSystem, Vec<String>), String> {
    let algebra = liealg::sl2();
    let vla = AffineVla::new(algebra.clone(), Q::zero()).map_err(|e| e.to_string())?;
    let ring = &vla.ring;
    let s = algebra.dual_casimir(ring);
    let names = algebra.names().to_vec();
    let (kind, n, dec) = match name {
        "borel1" => (FamilyKind::Power, 1, "borel"),
        "borel2" => (FamilyKind::DerivProduct, 2, "borel"),
        "iwasawa1" => (FamilyKind::Power, 1, "iwasawa"),
        other => return Err(format!("unknown builtin flow `{other}`")),
    };
    let d = liealg::decomposition(&algebra, dec).map_err(|e| e.to_string())?;
    let r = rmatrix_from_decomposition(&vla, &d).map_err(|e| e.to_string())?;
    let table = twisted_table(&vla, &r).validated().map_err(|e| e.to_string())?;
    let pm = poisson_matrix(&table).map_err(|e| e.to_string())?;
    let h = hamiltonian_family(&s, kind, n, &vla.table).map_err(|e| e.to_string())?;
    let fs = flow(&h, &pm, conv).map_err(|e| e.to_string())?;
    Ok((fs, names))
}
