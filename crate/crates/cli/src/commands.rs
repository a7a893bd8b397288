use std::fmt::Write as _;

use clap::{ArgGroup, Args};
use dpw_core::chartfamily::{coefficient_residuals, residual_table, CoefficientResiduals, ResidualRow};
use dpw_core::extensions::{
    classify_to_quadratic, decomposition_oracle, hopf_pairing, stability_check, symmetric_density, Classification,
    ClassifyOptions, ExtensionFunctional, OracleResult, QuadraticDifferential, QuadratureOptions, StabilityVerdict,
    Verdict, ORACLE_THRESHOLD,
};
use dpw_core::genus2::spin_structure;
use dpw_core::iwasawa::iwasawa;
use dpw_core::loopcore::random_invertible_loop;
use dpw_core::poly::Poly;
use dpw_core::potential::{leading_term_check, lawson_weierstrass_locations, validate_pole_structure, LeadingTermReport, PoleReport};
use dpw_core::synthesis::{
    extended_frame, frame_from_chart, geometry_report, sym_point_surface, to_obj, Convergence, PointFailure,
    SynthesisOptions,
};
use dpw_core::transport::{abelianness_probe, holonomy, TransportOptions};
use dpw_core::{Matrix2, MatrixLoop, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::inputs::{
    load_chart, load_curve, load_loops, load_potential, parse_complex, parse_complex3, parse_grid, parse_partition,
    parse_zeta_grid,
};
use crate::report::{CliError, Report};

/// A finished command: its report and the artifacts to write next to it.
pub struct Outcome {
    pub report: Report<serde_json::Value>,
    pub artifacts: Vec<(&'static str, String)>,
}

fn config<A: Serialize>(args: &A) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn finish<T: Serialize>(report: Report<T>, artifacts: Vec<(&'static str, String)>) -> Outcome {
    let Report { command, version, config, config_hash, tolerances, pass, diagnostics, warnings, result } = report;
    let result = serde_json::to_value(result).expect("result serializes");
    Outcome {
        report: Report { command, version, config, config_hash, tolerances, pass, diagnostics, warnings, result },
        artifacts,
    }
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("source").required(true).args(["potential", "chart"])))]
pub struct SynthArgs {
    /// DPW potential: JSON file or builtin:{empty,vacuum,lawson[:A,G]}.
    #[arg(long)]
    pub potential: Option<String>,
    /// Chart data (u, q) instead of a potential: JSON file or builtin:{sphere,clifford,flat}.
    #[arg(long)]
    pub chart: Option<String>,
    /// Grid `cx,cy,h,n` for potentials and built-in charts; the basepoint is its center.
    #[arg(long, default_value = "0,0,0.05,17", allow_hyphen_values = true)]
    pub grid: String,
    /// ζ-truncation degree of Ψ before splitting.
    #[arg(long, default_value_t = 16)]
    pub trunc: usize,
    /// Iwasawa tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Unit-circle ζ samples for transport.
    #[arg(long, default_value_t = 64)]
    pub zeta_samples: usize,
}

#[derive(Serialize)]
struct SynthResult {
    nx: usize,
    ny: usize,
    basepoint: (usize, usize),
    max_iwasawa_residual: f64,
    max_tail: f64,
    su2_defect: f64,
    failures: Vec<PointFailure>,
    conformality: Convergence,
    mean_curvature: Convergence,
    hopf: Convergence,
    degenerate: bool,
    min_metric: f64,
}

pub fn synth(args: &SynthArgs) -> Result<Outcome, CliError> {
    positive(args.tol, "--tol")?;
    let synth_err = |e: dpw_core::synthesis::SynthesisError| CliError::failed("synthesis", "extended_frame", e);
    let (frames, bytes) = match (&args.potential, &args.chart) {
        (Some(p), _) => {
            let pot = load_potential(p)?;
            let grid = parse_grid(&args.grid)?;
            let opts = SynthesisOptions { tol: args.tol, trunc: args.trunc, zeta_samples: args.zeta_samples, ..Default::default() };
            let base = (grid.nx / 2, grid.ny / 2);
            let f = extended_frame(&pot.value.potential, &grid, base, &MatrixLoop::identity(), &opts).map_err(synth_err)?;
            (f, pot.bytes)
        }
        (None, Some(c)) => {
            let chart = load_chart(c, &args.grid)?;
            let g = chart.value.grid;
            let f = frame_from_chart(&chart.value, (g.nx / 2, g.ny / 2), args.zeta_samples, f64::INFINITY).map_err(synth_err)?;
            (f, chart.bytes)
        }
        (None, None) => return Err(CliError::input("one of --potential or --chart is required")),
    };
    let surface = sym_point_surface(&frames).map_err(|e| CliError::failed("synthesis", "sym_point_surface", e))?;
    let geo = geometry_report(&surface).map_err(|e| CliError::failed("synthesis", "geometry_report", e))?;
    // Stereographic projection from the antipode of the basepoint image.
    let obj = to_obj(&surface, [-1.0, 0.0, 0.0, 0.0]).map_err(|e| CliError::failed("synthesis", "stereographic", e))?;
    let residual_tol = 10.0 * args.tol;
    let su2_tol = 1e-8;
    let result = SynthResult {
        nx: surface.grid.nx,
        ny: surface.grid.ny,
        basepoint: surface.basepoint,
        max_iwasawa_residual: frames.max_residual(),
        max_tail: frames.max_tail(),
        su2_defect: surface.max_su2_defect(),
        failures: frames.failures.clone(),
        conformality: geo.conformality,
        mean_curvature: geo.mean_curvature,
        hopf: geo.hopf,
        degenerate: geo.degenerate,
        min_metric: geo.min_metric,
    };
    let mut r = Report::new("synth", config(args), &[bytes.as_deref()], result)
        .tolerance("iwasawa", args.tol)
        .tolerance("iwasawa_residual", residual_tol)
        .tolerance("su2_defect", su2_tol);
    let (fails, res, su2) = (r.result.failures.len(), r.result.max_iwasawa_residual, r.result.su2_defect);
    r.check(fails == 0, "iwasawa", "split", format!("{fails} grid points failed to split"));
    r.check(res <= residual_tol, "iwasawa", "reconstruction", format!("max residual {res:e} exceeds {residual_tol:e}"));
    r.check(su2 <= su2_tol, "synthesis", "su2", format!("surface leaves SU(2) by {su2:e}"));
    if r.result.degenerate {
        r.warnings.push("surface is degenerate (vanishing differential somewhere)".into());
    }
    Ok(finish(r, vec![("surface.obj", obj), ("geometry.csv", geo.to_csv(&surface.grid))]))
}

#[derive(Args, Debug, Serialize)]
pub struct HolonomyArgs {
    /// DPW potential: JSON file or builtin name.
    #[arg(long)]
    pub potential: String,
    /// JSON list of closed loops.
    #[arg(long)]
    pub loops: String,
    /// `unit:M` or a comma-separated list of ζ values.
    #[arg(long, default_value = "unit:8", allow_hyphen_values = true)]
    pub zeta_grid: String,
    /// Transport tolerance.
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
    /// Bound on `|det H − 1|`.
    #[arg(long, default_value_t = 1e-8)]
    pub det_tol: f64,
}

#[derive(Serialize)]
struct ZetaProbe {
    zeta: C64,
    traces: Vec<C64>,
    commutator_probe: f64,
    max_det_defect: f64,
}

pub fn holonomy_sweep(args: &HolonomyArgs) -> Result<Outcome, CliError> {
    positive(args.tol, "--tol")?;
    positive(args.det_tol, "--det-tol")?;
    let pot = load_potential(&args.potential)?;
    let loops = load_loops(&args.loops)?;
    if loops.value.is_empty() {
        return Err(CliError::input("no loops given"));
    }
    if let Some(k) = loops.value.iter().position(|p| !p.closed) {
        return Err(CliError::input(format!("loop {k} is not closed")));
    }
    let zetas = parse_zeta_grid(&args.zeta_grid)?;
    let opts = TransportOptions::with_tol(args.tol);
    let probes: Vec<ZetaProbe> = zetas
        .par_iter()
        .map(|&zeta| {
            let hols: Vec<Matrix2> = loops
                .value
                .iter()
                .map(|path| holonomy(&pot.value.potential, path, zeta, &opts).map(|h| h.value))
                .collect::<Result<_, _>>()?;
            let max_det_defect = hols.iter().map(|h| (h.det() - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max);
            Ok(ZetaProbe { zeta, traces: hols.iter().map(Matrix2::trace).collect(), commutator_probe: abelianness_probe(&hols), max_det_defect })
        })
        .collect::<Result<_, dpw_core::transport::TransportError>>()
        .map_err(|e| CliError::failed("transport", "parallel_transport", e))?;
    let mut csv = String::from("zeta_re,zeta_im,loop,trace_re,trace_im,commutator_probe\n");
    for p in &probes {
        for (k, t) in p.traces.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{k},{:e},{:e},{:e}", p.zeta.re, p.zeta.im, t.re, t.im, p.commutator_probe);
        }
    }
    let worst = probes.iter().map(|p| p.max_det_defect).fold(0.0, f64::max);
    let mut r = Report::new("holonomy", config(args), &[pot.bytes.as_deref(), loops.bytes.as_deref()], probes)
        .tolerance("transport", args.tol)
        .tolerance("det_defect", args.det_tol);
    r.check(worst <= args.det_tol, "transport", "det_holonomy", format!("|det H − 1| = {worst:e} exceeds {:e}", args.det_tol));
    Ok(finish(r, vec![("holonomy.csv", csv)]))
}

#[derive(Args, Debug, Serialize)]
pub struct ResidualsArgs {
    /// Chart data (u, q): JSON file or builtin:{sphere,clifford,flat}.
    #[arg(long)]
    pub chart: String,
    /// Grid `cx,cy,h,n` for built-in charts.
    #[arg(long, default_value = "0,0,0.05,17", allow_hyphen_values = true)]
    pub grid: String,
    /// `unit:M` or a comma-separated list of ζ values.
    #[arg(long, default_value = "unit:16", allow_hyphen_values = true)]
    pub zeta_grid: String,
    /// If given, coefficient and flatness residuals must not exceed it.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Serialize)]
struct ResidualsResult {
    coefficients: CoefficientResiduals,
    rows: Vec<ResidualRow>,
}

pub fn residuals(args: &ResidualsArgs) -> Result<Outcome, CliError> {
    if let Some(t) = args.tol {
        positive(t, "--tol")?;
    }
    let chart = load_chart(&args.chart, &args.grid)?;
    let zetas = parse_zeta_grid(&args.zeta_grid)?;
    let rows = residual_table(&chart.value, &zetas).map_err(|e| CliError::failed("chartfamily", "residual_table", e))?;
    let coefficients = coefficient_residuals(&chart.value).map_err(|e| CliError::failed("chartfamily", "coefficient_residuals", e))?;
    let mut csv = String::from("zeta_re,zeta_im,r_minus,r_zero,r_plus,flatness,unitarity\n");
    for row in &rows {
        let _ = writeln!(
            csv,
            "{},{},{:e},{:e},{:e},{:e},{:e}",
            row.zeta.re, row.zeta.im, row.r_minus, row.r_zero, row.r_plus, row.flatness, row.unitarity
        );
    }
    let unit_tol = 1e-12;
    let unit = rows.iter().filter(|r| (r.zeta.norm() - 1.0).abs() <= 1e-12).map(|r| r.unitarity).fold(0.0, f64::max);
    let flat = rows.iter().map(|r| r.flatness).fold(0.0, f64::max);
    let coeff = coefficients.r_minus.max(coefficients.r_zero).max(coefficients.r_plus);
    let mut r = Report::new("residuals", config(args), &[chart.bytes.as_deref()], ResidualsResult { coefficients, rows })
        .tolerance("unitarity", unit_tol);
    r.check(unit <= unit_tol, "chartfamily", "unitarity", format!("unit-ζ unitarity defect {unit:e} exceeds {unit_tol:e}"));
    if let Some(t) = args.tol {
        r = r.tolerance("residual", t);
        r.check(coeff <= t, "chartfamily", "coefficient_residual", format!("{coeff:e} exceeds {t:e}"));
        r.check(flat <= t, "chartfamily", "flatness", format!("{flat:e} exceeds {t:e}"));
    }
    Ok(finish(r, vec![("residuals.csv", csv)]))
}

#[derive(Args, Debug, Serialize)]
pub struct FactorizeArgs {
    /// Number of random loops.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Loops have ζ-indices `−deg..=deg`.
    #[arg(long, default_value_t = 8)]
    pub deg: usize,
    /// Iwasawa tolerance; checks use ten times this.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Loops are redrawn until their smallest sampled singular value reaches this.
    #[arg(long, default_value_t = 0.1)]
    pub sigma_floor: f64,
    /// Unit-circle samples for the independent residual measurements.
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
}

#[derive(Serialize)]
struct LoopCase {
    index: usize,
    reconstruction: f64,
    unitarity: f64,
    b0_normalized: bool,
    tail: f64,
    condition: f64,
    error: Option<String>,
}

#[derive(Serialize)]
struct FactorizeResult {
    max_reconstruction: f64,
    max_unitarity: f64,
    cases: Vec<LoopCase>,
}

pub fn factorize_test(args: &FactorizeArgs) -> Result<Outcome, CliError> {
    positive(args.tol, "--tol")?;
    positive(args.sigma_floor, "--sigma-floor")?;
    if args.n == 0 || args.samples < 2 * args.deg + 2 {
        return Err(CliError::input("need --n ≥ 1 and --samples ≥ 2·deg + 2"));
    }
    let cases: Vec<LoopCase> = (0..args.n)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            rng.set_stream(index as u64);
            let psi = random_invertible_loop(&mut rng, args.deg, args.sigma_floor);
            match iwasawa(&psi, args.tol) {
                Ok(res) => {
                    let b0 = res.b.coeff(0);
                    LoopCase {
                        index,
                        reconstruction: (&psi - &res.f.mul(&res.b)).sup_norm_sampled(args.samples),
                        unitarity: res.f.unitarity_defect(args.samples),
                        b0_normalized: b0.get(1, 0) == C64::new(0.0, 0.0)
                            && [b0.get(0, 0), b0.get(1, 1)].iter().all(|d| d.im == 0.0 && d.re > 0.0),
                        tail: res.tail,
                        condition: res.condition,
                        error: None,
                    }
                }
                Err(e) => LoopCase {
                    index,
                    reconstruction: f64::NAN,
                    unitarity: f64::NAN,
                    b0_normalized: false,
                    tail: f64::NAN,
                    condition: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let mut csv = String::from("index,reconstruction,unitarity,b0_normalized,tail,condition\n");
    for c in &cases {
        let _ = writeln!(csv, "{},{:e},{:e},{},{:e},{:e}", c.index, c.reconstruction, c.unitarity, c.b0_normalized, c.tail, c.condition);
    }
    let check_tol = 10.0 * args.tol;
    let max_rec = cases.iter().map(|c| c.reconstruction).fold(0.0, f64::max);
    let max_unit = cases.iter().map(|c| c.unitarity).fold(0.0, f64::max);
    let errors: Vec<String> = cases.iter().filter_map(|c| c.error.as_ref().map(|e| format!("loop {}: {e}", c.index))).collect();
    let unnormalized = cases.iter().filter(|c| c.error.is_none() && !c.b0_normalized).count();
    let result = FactorizeResult { max_reconstruction: max_rec, max_unitarity: max_unit, cases };
    let mut r = Report::new("factorize-test", config(args), &[], result)
        .tolerance("iwasawa", args.tol)
        .tolerance("check", check_tol);
    r.check(errors.is_empty(), "iwasawa", "split", errors.join("; "));
    r.check(max_rec <= check_tol, "iwasawa", "reconstruction", format!("‖Ψ − FB‖ = {max_rec:e} exceeds {check_tol:e}"));
    r.check(max_unit <= check_tol, "iwasawa", "unitarity", format!("‖F*F − I‖ = {max_unit:e} exceeds {check_tol:e}"));
    r.check(unnormalized == 0, "iwasawa", "b0_normalization", format!("{unnormalized} loops with B(0) not upper triangular positive"));
    Ok(finish(r, vec![("factorize-test.csv", csv)]))
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("ell").required(true).args(["functional", "point", "hopf"])))]
pub struct ClassifyArgs {
    /// Curve: JSON file or builtin:lawson.
    #[arg(long, default_value = "builtin:lawson")]
    pub curve: String,
    /// Even spin partition, `a,b,c|d,e,f` or a single triple (0-based labels).
    #[arg(long)]
    pub partition: String,
    /// Functional values `ℓ(1), ℓ(z), ℓ(z²)` on `H⁰(K²)`.
    #[arg(long, allow_hyphen_values = true)]
    pub functional: Option<String>,
    /// Evaluation functional at the fiber over this z (`inf` for ∞).
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Hopf differential `p0,p1,p2` whose L² pairing gives the functional.
    #[arg(long, allow_hyphen_values = true)]
    pub hopf: Option<String>,
    /// Residual bound for accepted zeros.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Serialize)]
struct ClassifyResult {
    functional: [C64; 3],
    quadrature_error: Option<f64>,
    classification: Classification,
    hopf_roundtrip_distance: Option<f64>,
    stability: StabilityVerdict,
}

fn quadratic(s: &str) -> Result<QuadraticDifferential, CliError> {
    let c = parse_complex3(s, "quadratic differential")?;
    QuadraticDifferential::new(Poly(c.to_vec())).map_err(|e| CliError::input(e.to_string()))
}

pub fn classify(args: &ClassifyArgs) -> Result<Outcome, CliError> {
    positive(args.tol, "--tol")?;
    let curve = load_curve(&args.curve)?;
    let part = parse_partition(&args.partition)?;
    let spin = spin_structure(&part, &curve.value).map_err(|e| CliError::failed("genus2", "spin_structure", e))?;
    let ext_err = |inv| move |e: dpw_core::extensions::ExtensionError| CliError::failed("extensions", inv, e);
    let (ell, quad_err, hopf) = if let Some(f) = &args.functional {
        let ell = ExtensionFunctional::new(parse_complex3(f, "functional")?).map_err(|e| CliError::input(e.to_string()))?;
        (ell, None, None)
    } else if let Some(p) = &args.point {
        let z = if p.trim() == "inf" { None } else { Some(parse_complex(p)?) };
        (ExtensionFunctional::evaluation_at(z), None, None)
    } else {
        let q = quadratic(args.hopf.as_deref().expect("group requires one"))?;
        let res = hopf_pairing(&q, &symmetric_density, &curve.value, &QuadratureOptions::default()).map_err(ext_err("hopf_pairing"))?;
        (res.functional, Some(res.error_estimate), Some(q))
    };
    let opts = ClassifyOptions { tol: args.tol, ..Default::default() };
    let classification = classify_to_quadratic(&ell, &spin, &curve.value, &opts).map_err(ext_err("classify_to_quadratic"))?;
    let stability = stability_check(&classification.quadratic, &spin, &curve.value).map_err(ext_err("stability_check"))?;
    let result = ClassifyResult {
        functional: ell.values,
        quadrature_error: quad_err,
        hopf_roundtrip_distance: hopf.map(|q| classification.quadratic.projective_distance(&q)),
        classification,
        stability,
    };
    let mut r = Report::new("classify", config(args), &[curve.bytes.as_deref()], result).tolerance("zero_residual", args.tol);
    if args.point.is_some() {
        let v = r.result.stability.verdict;
        r.check(v == Verdict::NonStable, "extensions", "point_criterion", "evaluation functional classified to a stable differential");
    }
    Ok(finish(r, Vec::new()))
}

#[derive(Args, Debug, Serialize)]
pub struct StabilityArgs {
    /// Curve: JSON file or builtin:lawson.
    #[arg(long, default_value = "builtin:lawson")]
    pub curve: String,
    /// Even spin partition, `a,b,c|d,e,f` or a single triple (0-based labels).
    #[arg(long)]
    pub partition: String,
    /// Quadratic differential `p0,p1,p2` for `𝒬 = (p0 + p1 z + p2 z²)(dz/y)²`.
    #[arg(long, allow_hyphen_values = true)]
    pub p: String,
    /// Bound on the witness identity residual.
    #[arg(long, default_value_t = 1e-10)]
    pub witness_tol: f64,
}

#[derive(Serialize)]
struct StabilityResult {
    verdict: StabilityVerdict,
    oracle: OracleResult,
}

pub fn stability(args: &StabilityArgs) -> Result<Outcome, CliError> {
    positive(args.witness_tol, "--witness-tol")?;
    let curve = load_curve(&args.curve)?;
    let part = parse_partition(&args.partition)?;
    let q = quadratic(&args.p)?;
    let spin = spin_structure(&part, &curve.value).map_err(|e| CliError::failed("genus2", "spin_structure", e))?;
    let verdict = stability_check(&q, &spin, &curve.value).map_err(|e| CliError::failed("extensions", "stability_check", e))?;
    let oracle = decomposition_oracle(&q, &spin, &curve.value).map_err(|e| CliError::failed("extensions", "decomposition_oracle", e))?;
    let agree = (verdict.verdict == Verdict::NonStable) == oracle.witness.is_some();
    let witness = verdict.witness.as_ref().map(|w| w.residual);
    let mut r = Report::new("stability", config(args), &[curve.bytes.as_deref()], StabilityResult { verdict, oracle })
        .tolerance("witness", args.witness_tol)
        .tolerance("oracle", ORACLE_THRESHOLD);
    r.check(agree, "extensions", "oracle_agreement", "stability_check and decomposition_oracle disagree");
    if r.result.verdict.verdict == Verdict::NonStable {
        let res = witness.unwrap_or(f64::INFINITY);
        r.check(res <= args.witness_tol, "extensions", "witness_identity", format!("ω𝒬 − αβ residual {res:e} exceeds {:e}", args.witness_tol));
    }
    Ok(finish(r, Vec::new()))
}

#[derive(Args, Debug, Serialize)]
pub struct ValidateArgs {
    /// DPW potential: JSON file or builtin name.
    #[arg(long)]
    pub potential: String,
    /// Spin partition; overrides the one stored in the potential file.
    #[arg(long)]
    pub partition: Option<String>,
}

#[derive(Serialize)]
struct ValidateResult {
    poles: PoleReport,
    leading_terms: LeadingTermReport,
}

pub fn validate_potential(args: &ValidateArgs) -> Result<Outcome, CliError> {
    let file = load_potential(&args.potential)?;
    let part = match (&args.partition, &file.value.partition) {
        (Some(s), _) => parse_partition(s)?,
        (None, Some(p)) => *p,
        (None, None) => return Err(CliError::input("no spin partition: pass --partition or store one in the potential file")),
    };
    let mut warnings = Vec::new();
    let locations = file.value.weierstrass_locations.clone().unwrap_or_else(|| {
        warnings.push("no Weierstrass locations in the potential file; using the Lawson chart".to_string());
        lawson_weierstrass_locations()
    });
    let poles = validate_pole_structure(&file.value.potential, &part, &locations).map_err(|e| CliError::input(e.to_string()))?;
    let leading_terms = leading_term_check(&file.value.potential);
    let failures = poles.failures();
    let mut r = Report::new("validate-potential", config(args), &[file.bytes.as_deref()], ValidateResult { poles, leading_terms })
        .tolerance("trace_defect", 1e-12);
    r.warnings = warnings;
    for f in failures {
        r.check(false, "potential", "pole_order", f);
    }
    let td = r.result.poles.trace_defect;
    r.check(td < 1e-12, "potential", "traceless", format!("trace defect {td:e}"));
    let lead = r.result.leading_terms.pass;
    r.check(lead, "potential", "leading_term", "ζ⁻¹ coefficient is not of the form [[0, 1], [0, 0]]");
    Ok(finish(r, Vec::new()))
}

fn positive(x: f64, flag: &str) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::input(format!("{flag} must be positive, got {x}")))
    }
}
