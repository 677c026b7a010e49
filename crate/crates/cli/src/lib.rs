//! `nilfock` command-line front end.
//!
//! Exit codes: 0 success or pass, 1 negative mathematical verdict, 2 input error.

mod report;

use clap::{Parser, Subcommand, ValueEnum};
use nilfock::fock::{write_dump, FockOperator, FockTruncation, DEFAULT_MAX_DIM};
use nilfock::field::{self, ChartField};
use nilfock::htype::{self, clifford_generators, clifford_relation_defect, commutant_dimension};
use nilfock::lie::{self, RegularityOptions, Verdict, Witness};
use nilfock::repn::{self, SymbolContext, SymbolExpr};
use nilfock::sampling::{self, DEFAULT_SEED};
use nilfock::symplectic::{compatible_j, darboux_basis};
use nilfock::{Error, Result, Step2Algebra};
use report::{vec_str, verdict, Report};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "nilfock", version, about = "Regular step-2 nilpotent algebras, Fock representations and symbols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Skewness, generation and regularity report for an algebra file.
    Validate {
        file: PathBuf,
        /// Relative tolerance on σ_min(Ω_θ).
        #[arg(long, default_value_t = 1e-8)]
        rel_tol: f64,
        #[arg(long, default_value_t = 4096)]
        grid_points: usize,
    },
    /// H-type verdict and class pair.
    Classify { file: PathBuf },
    /// Coadjoint orbit through (η, θ).
    Orbit {
        file: PathBuf,
        /// Comma-separated covector on g1.
        #[arg(long, allow_hyphen_values = true)]
        eta: String,
        /// Comma-separated covector on g2.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
    },
    /// Build π_θ on the truncated Fock space, print defects and operator dumps.
    Represent {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(short = 'K', default_value_t = 12)]
        k: usize,
        /// Write one dump per basis vector here instead of stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(short = 'K', default_value_t = 12)]
        k: usize,
        /// Comma-separated covector or `sphere:<count>`.
        #[arg(long, default_value = "sphere:16", allow_hyphen_values = true)]
        theta: String,
        /// Override the suite tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Scan a chart file (or a built-in fixture) point by point.
    FieldScan {
        /// Chart file; omit when using --fixture.
        file: Option<PathBuf>,
        #[arg(long, value_enum)]
        fixture: Option<Fixture>,
        /// Exit 1 unless the property holds at every point.
        #[arg(long, value_enum)]
        require: Option<Requirement>,
    },
    /// Emit a catalog algebra file.
    Make {
        #[arg(long = "type", value_enum)]
        kind: MakeType,
        /// Heisenberg rank, or module multiplicity for clifford/quaternionic.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Number of Clifford generators (clifford only).
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Ccr,
    Symbol,
    Flow,
    Clifford,
    Darboux,
    Homogeneity,
    Equivalence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    Heisenberg,
    Involutive,
    Quaternionic,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Requirement {
    Polycontact,
    Htype,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MakeType {
    Heisenberg,
    Quaternionic,
    Complexified,
    Clifford,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Negative,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Negative => 1,
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Negative
        }
    }
}

/// Basis cap for Fock truncations, from `NILFOCK_MAX_DIM` when set.
pub fn max_dim() -> Result<usize> {
    match std::env::var("NILFOCK_MAX_DIM") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("NILFOCK_MAX_DIM must be a positive integer, got '{v}'"))),
        Err(_) => Ok(DEFAULT_MAX_DIM),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load_algebra(path: &Path) -> Result<Step2Algebra> {
    lie::parse_algebra(&read(path)?)
}

fn parse_vec(s: &str, len: usize, what: &str) -> Result<Vec<f64>> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Input(format!("bad {what} component '{t}'"))))
        .collect::<Result<Vec<_>>>()?;
    if v.len() != len {
        return Err(Error::Dimension { expected: len, got: v.len() });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input(format!("{what} must be finite")));
    }
    Ok(v)
}

/// `sphere:<count>` or a literal covector.
fn parse_thetas(s: &str, n2: usize) -> Result<Vec<Vec<f64>>> {
    match s.strip_prefix("sphere:") {
        Some(c) => {
            let count: usize = c.parse().map_err(|_| Error::Input(format!("bad sample count '{c}'")))?;
            if count == 0 {
                return Err(Error::Input("sample count must be positive".into()));
            }
            Ok(sampling::sample_sphere(n2, count))
        }
        None => Ok(vec![parse_vec(s, n2, "theta")?]),
    }
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Input(format!("-K must be at least 2, got {k}")));
    }
    Ok(())
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Outcome> {
    let io = |e: std::io::Error| Error::Input(format!("write failed: {e}"));
    match &cli.command {
        Command::Validate { file, rel_tol, grid_points } => {
            let a = load_algebra(file)?;
            let opts = RegularityOptions { grid_points: *grid_points, rel_tol: *rel_tol, ..Default::default() };
            let rep = lie::is_regular_with(&a, &opts);
            let mut r = Report::new("validate");
            r.put("dims", format!("{} {}", a.n1(), a.n2()))
                .put("skew", "ok")
                .put("generation_rank", rep.generation_rank)
                .put("generated", rep.generated)
                .put("grid_points", rep.grid_points)
                .num("tolerance", rep.tolerance)
                .num("sphere_min_sigma", rep.sphere_min_sigma)
                .put("argmin_theta", vec_str(&rep.argmin_theta));
            match &rep.verdict {
                Verdict::Regular => {
                    r.put("verdict", "Regular");
                }
                Verdict::NotRegular(Witness::OddDimension) => {
                    r.put("verdict", "NotRegular").put("witness", "odd dim g1");
                }
                Verdict::NotRegular(Witness::DegenerateDirection { theta, sigma_min, x }) => {
                    r.put("verdict", "NotRegular")
                        .put("witness_theta", vec_str(theta))
                        .num("witness_sigma_min", *sigma_min)
                        .put("witness_x", vec_str(x));
                }
            }
            write!(out, "{r}").map_err(io)?;
            Ok(Outcome::from_bool(rep.is_regular()))
        }
        Command::Classify { file } => {
            let a = load_algebra(file)?;
            let v = htype::is_htype(&a);
            let mut r = Report::new("classify");
            r.put("dims", format!("{} {}", a.n1(), a.n2()))
                .num("tolerance", v.tolerance)
                .num("clifford_defect", v.clifford_defect)
                .num("orthogonality_defect", v.orthogonality_defect)
                .put("htype", v.is_htype);
            if v.is_htype {
                match htype::classify_htype(&a) {
                    Ok(c) => {
                        r.put("class", format!("({},{})", c.m, c.dim_g1)).put("multiplicity", c.multiplicity);
                    }
                    Err(e) => {
                        r.put("class", format!("inconsistent: {e}"));
                        write!(out, "{r}").map_err(io)?;
                        return Ok(Outcome::Negative);
                    }
                }
            }
            write!(out, "{r}").map_err(io)?;
            Ok(Outcome::from_bool(v.is_htype))
        }
        Command::Orbit { file, eta, theta } => {
            let a = load_algebra(file)?;
            let eta = parse_vec(eta, a.n1(), "eta")?;
            let theta = parse_vec(theta, a.n2(), "theta")?;
            let mut r = Report::new("orbit");
            match lie::coadjoint_orbit(&a, &eta, &theta) {
                Ok(o) => {
                    r.put("kind", format!("{:?}", o.kind))
                        .put("orbit_dimension", o.orbit_dimension)
                        .put("eta", vec_str(&o.eta))
                        .put("theta", vec_str(&o.theta));
                    write!(out, "{r}").map_err(io)?;
                    Ok(Outcome::Pass)
                }
                Err(Error::Unsupported(msg)) => {
                    r.put("kind", "unavailable").put("reason", msg);
                    write!(out, "{r}").map_err(io)?;
                    Ok(Outcome::Negative)
                }
                Err(e) => Err(e),
            }
        }
        Command::Represent { file, theta, k, out_dir } => {
            check_k(*k)?;
            let a = load_algebra(file)?;
            let theta = parse_vec(theta, a.n2(), "theta")?;
            let rep = repn::build_rep_with_cap(&a, &theta, *k, max_dim()?)?;
            let hom = rep.verify_homomorphism();
            let ah = rep.anti_hermitian_defect();
            let w = rep.weyl_shift_identity();
            let mut r = Report::new("represent");
            r.put("theta", vec_str(&theta))
                .put("K", k)
                .put("fock_dim", rep.truncation().dim())
                .put("modes", rep.truncation().modes())
                .num("homomorphism_defect", hom)
                .num("anti_hermitian_defect", ah)
                .num("weyl_shift_residual", w.forward)
                .num("weyl_adjoint_residual", w.adjoint);
            let names = basis_names(&a);
            match out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| Error::Input(format!("{}: {e}", dir.display())))?;
                    for (i, name) in names.iter().enumerate() {
                        let p = dir.join(format!("rho_{name}.fockop"));
                        std::fs::write(&p, write_dump(rep.rho_basis(i)))
                            .map_err(|e| Error::Input(format!("{}: {e}", p.display())))?;
                    }
                    r.put("dumps", dir.display());
                    write!(out, "{r}").map_err(io)?;
                }
                None => {
                    r.put("dumps", "inline");
                    write!(out, "{r}").map_err(io)?;
                    for (i, name) in names.iter().enumerate() {
                        write!(out, "# rho({name})\n{}", write_dump(rep.rho_basis(i))).map_err(io)?;
                    }
                }
            }
            Ok(Outcome::Pass)
        }
        Command::Verify { file, suite, k, theta, tol } => {
            check_k(*k)?;
            let a = load_algebra(file)?;
            let thetas = parse_thetas(theta, a.n2())?;
            let (r, pass) = verify(&a, *suite, *k, &thetas, *tol)?;
            write!(out, "{r}").map_err(io)?;
            Ok(Outcome::from_bool(pass))
        }
        Command::FieldScan { file, fixture, require } => {
            let chart = match (file, fixture) {
                (Some(p), None) => field::parse_chart(&read(p)?)?,
                (None, Some(f)) => match f {
                    Fixture::Heisenberg => field::heisenberg_chart(),
                    Fixture::Involutive => field::involutive_chart(),
                    Fixture::Quaternionic => field::quaternionic_chart(),
                    Fixture::Mixed => field::mixed_fixture(),
                },
                _ => return Err(Error::Input("give exactly one of a chart file or --fixture".into())),
            };
            let (r, s) = field_scan(&chart)?;
            write!(out, "{r}").map_err(io)?;
            Ok(match require {
                None => Outcome::Pass,
                Some(Requirement::Polycontact) => Outcome::from_bool(s.polycontact),
                Some(Requirement::Htype) => Outcome::from_bool(s.htype_manifold && s.class_constant),
            })
        }
        Command::Make { kind, n, m, out: path } => {
            if *n == 0 || *m == 0 {
                return Err(Error::Input("--n and --m must be positive".into()));
            }
            let (a, comment) = match kind {
                MakeType::Heisenberg => (htype::make_heisenberg(*n), format!("heisenberg n={n}")),
                MakeType::Quaternionic => {
                    (htype::make_quaternionic_heisenberg(*n), format!("quaternionic heisenberg n={n}"))
                }
                MakeType::Complexified => {
                    (htype::make_complexified_heisenberg(*n), format!("complexified heisenberg n={n}"))
                }
                MakeType::Clifford => {
                    if *m > 16 {
                        return Err(Error::Input("clifford --m is limited to 16".into()));
                    }
                    (htype::make_htype_from_clifford(*m, *n), format!("clifford m={m} multiplicity={n}"))
                }
            };
            let text = lie::write_algebra(&a, Some(&comment));
            match path {
                Some(p) => std::fs::write(p, &text).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?,
                None => write!(out, "{text}").map_err(io)?,
            }
            Ok(Outcome::Pass)
        }
    }
}

fn basis_names(a: &Step2Algebra) -> Vec<String> {
    (1..=a.n1()).map(|i| format!("x{i}")).chain((1..=a.n2()).map(|k| format!("z{k}"))).collect()
}

fn verify(a: &Step2Algebra, suite: Suite, k: usize, thetas: &[Vec<f64>], tol: Option<f64>) -> Result<(Report, bool)> {
    let cap = max_dim()?;
    let mut r = Report::new("verify");
    r.put("suite", format!("{suite:?}").to_lowercase())
        .put("dims", format!("{} {}", a.n1(), a.n2()))
        .put("K", k)
        .put("seed", format!("{DEFAULT_SEED:#x}"))
        .put("theta_samples", thetas.len());
    let pass = match suite {
        Suite::Ccr => {
            let tol = tol.unwrap_or(1e-10);
            let (mut hom, mut ah) = (0.0f64, 0.0f64);
            for th in thetas {
                let rep = repn::build_rep_with_cap(a, th, k, cap)?;
                hom = hom.max(rep.verify_homomorphism());
                ah = ah.max(rep.anti_hermitian_defect());
            }
            r.num("tolerance", tol).num("homomorphism_defect", hom).num("anti_hermitian_defect", ah);
            hom <= tol && ah <= tol
        }
        Suite::Darboux => {
            let tol = tol.unwrap_or(1e-10);
            let (mut sq, mut inv, mut db, mut jr) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for th in thetas {
                let t = compatible_j(&a.omega_matrix(th)?, a.g1_metric())?;
                let b = darboux_basis(&t)?;
                sq = sq.max(t.square_residual());
                inv = inv.max(t.invariance_residual());
                db = db.max(b.darboux_residual(&t.omega));
                jr = jr.max(b.j_residual(&t.j));
            }
            r.num("tolerance", tol)
                .num("j_square_residual", sq)
                .num("j_invariance_residual", inv)
                .num("darboux_residual", db)
                .num("j_darboux_residual", jr);
            sq.max(inv).max(db).max(jr) <= tol
        }
        Suite::Homogeneity => {
            let tol = tol.unwrap_or(1e-12);
            let mut worst = 0.0f64;
            for th in thetas {
                for lambda in [0.5, 2.0, 3.0] {
                    let h = repn::homogeneity_check(a, th, lambda, k)?;
                    worst = worst.max(h.max_residual() / (lambda * lambda).max(1.0));
                }
            }
            r.num("tolerance", tol).put("lambdas", "0.5,2,3").num("max_scaled_residual", worst);
            worst <= tol
        }
        Suite::Clifford => {
            let tol = tol.unwrap_or(1e-13);
            let m = a.n2();
            let gens = clifford_generators(m);
            let gdef = clifford_relation_defect(&gens);
            let comm = commutant_dimension(&gens);
            let v = htype::is_htype(a);
            r.num("tolerance", tol)
                .put("irrep_dim", htype::clifford_irrep_dim(m))
                .num("generator_relation_defect", gdef)
                .put("commutant_dim", comm)
                .put("expected_commutant_dim", htype::expected_commutant_dim(m))
                .num("algebra_clifford_defect", v.clifford_defect)
                .num("htype_tolerance", v.tolerance)
                .put("htype", v.is_htype);
            gdef <= tol && comm == htype::expected_commutant_dim(m) && v.is_htype
        }
        Suite::Equivalence => {
            let rep = a.regularity();
            let scan = lie::ad_surjectivity_scan(a, 64, DEFAULT_SEED, 1e-8);
            let ambiguous =
                rep.sphere_min_sigma >= 0.5 * rep.tolerance && rep.sphere_min_sigma <= 2.0 * rep.tolerance;
            let agree = rep.is_regular() == scan.all_surjective;
            r.num("tolerance", rep.tolerance)
                .put("omega_regular", rep.is_regular())
                .num("sphere_min_sigma", rep.sphere_min_sigma)
                .put("ad_all_surjective", scan.all_surjective)
                .num("ad_sampled_min", scan.sampled_min)
                .num("ad_refined_min", scan.refined_min)
                .put("ambiguous_band", ambiguous)
                .put("agree", agree);
            agree || ambiguous
        }
        Suite::Symbol => {
            let tol = tol.unwrap_or(1e-10);
            let n = a.n1() / 2;
            let ctx = SymbolContext::new(a, thetas.to_vec())?;
            let sphere = sampling::sample_sphere(a.n1(), 128);
            let mut sum = SymbolExpr::default();
            for j in 0..n {
                let s = SymbolExpr::shift_basis(n, j);
                sum = &sum + &(&s.adjoint() * &s);
            }
            let sample = repn::symbol_eval(&ctx, &[sum], &sphere);
            let unit_dev = sample.values[0].iter().flatten().map(|v| (v - 1.0).norm()).fold(0.0, f64::max);
            let trunc = FockTruncation::with_cap(n, k, cap)?;
            let s = FockOperator::shift_basis(trunc, 0)?;
            let c = s.adjoint().commutator(&s);
            let (l1, l2) = ((k / 4).max(1), (k / 2).max(2));
            let (d1, d2) = (c.compactness_defect(l1), c.compactness_defect(l2));
            r.num("tolerance", tol)
                .put("sphere_samples", sphere.len())
                .num("sum_of_squares_deviation", unit_dev)
                .put("defect_levels", format!("{l1},{l2}"))
                .num("commutator_defect_low", d1)
                .num("commutator_defect_high", d2);
            unit_dev <= tol && d2 < d1
        }
        Suite::Flow => {
            let tol = tol.unwrap_or(1e-8);
            let n = a.n1() / 2;
            let trunc = FockTruncation::with_cap(n, k, cap)?;
            let s = FockOperator::shift_basis(trunc, 0)?;
            let levels: Vec<usize> = [k / 8, k / 4, k / 2].into_iter().filter(|&l| l >= 1 && l < k).collect();
            let mut bound_ok = true;
            let mut worst_ratio = 0.0f64;
            for t in [0.5, std::f64::consts::PI] {
                let d = &s.flow_conjugate(t) - &s;
                for &l in &levels {
                    let bound = t / (2.0 * (l as f64 + 1.0)) + 1e-12;
                    let got = d.compactness_defect(l);
                    worst_ratio = worst_ratio.max(got / bound);
                    bound_ok &= got <= bound;
                }
            }
            let ctx = SymbolContext::new(a, thetas.to_vec())?;
            let sphere = sampling::sample_sphere(a.n1(), 64);
            let word = &SymbolExpr::shift_basis(n, 0) * &SymbolExpr::shift_basis(n, n - 1).adjoint();
            let before = repn::symbol_eval(&ctx, std::slice::from_ref(&word), &sphere);
            let after = repn::symbol_eval(&ctx, &[word.flow(std::f64::consts::PI)], &sphere);
            let sym_dev = before.max_abs_diff(&after);
            r.num("tolerance", tol)
                .put("times", "0.5,pi")
                .put("levels", levels.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
                .num("max_defect_over_bound", worst_ratio)
                .num("symbol_deviation", sym_dev);
            bound_ok && sym_dev <= tol
        }
    };
    r.put("result", verdict(pass));
    Ok((r, pass))
}

fn field_scan(chart: &ChartField) -> Result<(Report, field::ChartScan)> {
    let s = field::scan_chart(chart)?;
    let mut r = Report::new("field-scan");
    r.put("ambient", chart.dim()).put("hrank", chart.hrank()).put("points", s.points.len());
    r.put("polycontact", s.polycontact).put("htype", s.htype_manifold).put("class_constant", s.class_constant);
    match s.class_pair {
        Some((m, d)) => r.put("class", format!("({m},{d})")),
        None => r.put("class", "none"),
    };
    let min_sigma = s.points.iter().map(|p| p.sigma_min).fold(f64::INFINITY, f64::min);
    r.num("min_sigma", if s.points.is_empty() { 0.0 } else { min_sigma });
    let list = |ix: &[usize]| {
        if ix.is_empty() {
            "none".to_string()
        } else {
            ix.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
        }
    };
    r.put("non_regular_points", list(&s.non_regular)).put("non_htype_points", list(&s.non_htype));
    match s.dtheta {
        Some(c) => r.put("dtheta_identity", format!("{} evaluations, {} mismatches", c.evaluations, c.mismatches)),
        None => r.put("dtheta_identity", "n/a"),
    };
    Ok((r, s))
}
