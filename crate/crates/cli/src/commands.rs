use std::fmt;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use clap::ValueEnum;
use log::info;
use serde::Serialize;

use curvlab::curvature::{check_cd, cross_check, curvature_profile, CdVerdict, OracleComparison, VertexScope};
use curvlab::function::{parse_vertex_function, random_function};
use curvlab::geometry::{doubling_report, profiles_csv};
use curvlab::graph::{
    cayley_truncation, complete_graph, cycle_graph, parse_graph, path_graph_example, random_conductance_graph,
    star_graph, two_vertex, write_graph, BoundaryMode, GraphFileFormat, GraphValidationReport, GroupSpec,
    RandomConductanceParams, WeightedGraph, z_non_h2_example,
};
use curvlab::modified_heat::{
    all_ordered_pairs, parse_pairs, solve, trace_csv, verify_comparison, verify_edge_oscillation,
    verify_gradient_decay, verify_harnack, verify_li_yau, InequalityReport, PicardDiagnostics, SolveConfig,
    SolveMethod,
};
use curvlab::semigroup::{audit_gradient_estimates, heat, AuditOptions, GradientAuditReport};
use curvlab::tolerance::{
    gamma_upper, omega_constant, AUDIT_TOL, PICARD_TOL, PSD_REL, SEMIGROUP_TOL, TOL_MARKOV, TOL_REV, VERIFY_TOL,
};
use curvlab::{GraphError, SolveError};

use crate::manifest::RunContext;
use crate::{
    BoundaryArg, CayleyKind, Cli, Command, CurvatureArgs, DoublingArgs, Family, FormatArg, GenArgs, HeatArgs,
    ModifiedHeatArgs, Verifier,
};

pub const EXIT_INVALID_GRAPH: u8 = 2;
pub const EXIT_FAIL: u8 = 3;
pub const EXIT_ORACLE: u8 = 4;
pub const EXIT_REFUSED: u8 = 5;

/// An error carrying its process exit code.
#[derive(Debug)]
pub struct Coded {
    pub code: u8,
    pub msg: String,
}

impl fmt::Display for Coded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl std::error::Error for Coded {}

fn coded(code: u8, msg: impl Into<String>) -> anyhow::Error {
    Coded { code, msg: msg.into() }.into()
}

fn refused(why: impl fmt::Display) -> anyhow::Error {
    coded(EXIT_REFUSED, format!("vacuous audit refused: {why}"))
}

pub struct Outcome {
    pub code: u8,
    pub stdout: Option<String>,
}

impl Outcome {
    fn report(code: u8, text: String) -> Self {
        Self { code, stdout: Some(text) }
    }
}

pub fn run(cli: Cli, mut argv: Vec<String>, threads: Option<usize>) -> anyhow::Result<Outcome> {
    if let Some(a) = argv.first_mut() {
        *a = "curvlab".into();
    }
    let name = match &cli.command {
        Command::Validate { .. } => "validate",
        Command::Gen(_) => "gen",
        Command::Curvature(_) => "curvature",
        Command::Heat(_) => "heat",
        Command::ModifiedHeat(_) => "modified-heat",
        Command::Doubling(_) => "doubling",
    };
    let ctx = RunContext::new(name, argv, threads, cli.record_time);
    match cli.command {
        Command::Validate { graph } => validate(ctx, &graph),
        Command::Gen(a) => gen(ctx, a),
        Command::Curvature(a) => curvature(ctx, a),
        Command::Heat(a) => heat_cmd(ctx, a),
        Command::ModifiedHeat(a) => modified_heat(ctx, a),
        Command::Doubling(a) => doubling(ctx, a),
    }
}

fn load_graph(ctx: &mut RunContext, path: &Path) -> anyhow::Result<WeightedGraph<f64>> {
    let text = ctx.read(path)?;
    ctx.tolerance("markov_row_sum", TOL_MARKOV);
    ctx.tolerance("reversibility", TOL_REV);
    parse_graph(&text).map_err(|e| coded(EXIT_INVALID_GRAPH, format!("invalid graph {}: {e}", path.display())))
}

fn load_function(ctx: &mut RunContext, g: &WeightedGraph<f64>, path: &Path) -> anyhow::Result<Vec<f64>> {
    let text = ctx.read(path)?;
    parse_vertex_function(g, &text).with_context(|| format!("reading function {}", path.display()))
}

fn labels_to_ids(g: &WeightedGraph<f64>, labels: &[String]) -> anyhow::Result<Vec<usize>> {
    labels
        .iter()
        .map(|l| g.index_of(l).ok_or_else(|| anyhow!(GraphError::UnknownVertex(l.clone()))))
        .collect()
}

fn write_sidecar(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn validate(mut ctx: RunContext, path: &Path) -> anyhow::Result<Outcome> {
    let g = load_graph(&mut ctx, path)?;
    let report = g.validate();
    if let Some(why) = geometry_violation(&report) {
        return Err(coded(EXIT_INVALID_GRAPH, format!("{}: {why}", path.display())));
    }
    ctx.hypothesis("reversibility (and markov row sums in markov mode) enforced at parse time");
    Ok(Outcome::report(0, ctx.render(&report)?))
}

/// The axioms are enforced by the parser; valence and measure ratios are
/// consequences only in markov mode, so they are reported but not enforced.
fn geometry_violation(r: &GraphValidationReport<f64>) -> Option<String> {
    (!r.connected).then(|| "graph is disconnected".to_string())
}

#[derive(Serialize)]
struct GenResult {
    family: String,
    vertices: usize,
    kernel_entries: usize,
    path: String,
    sha256: String,
}

fn need<T>(v: Option<T>, flag: &str, what: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| anyhow!("{what} requires {flag}"))
}

fn gen(ctx: RunContext, a: GenArgs) -> anyhow::Result<Outcome> {
    let boundary = match a.boundary {
        BoundaryArg::Reflecting => BoundaryMode::Reflecting,
        BoundaryArg::Absorbing => BoundaryMode::AbsorbingFlagged,
    };
    let (family, g, default_format) = if let Some(kind) = a.cayley {
        let spec = match kind {
            CayleyKind::Zd => GroupSpec::integer_lattice(need(a.dims, "--dims", "--cayley zd")?),
            CayleyKind::Torus => GroupSpec::torus(need(a.dims, "--dims", "--cayley torus")?, need(a.modulus, "--mod", "--cayley torus")?),
            CayleyKind::Cyclic => GroupSpec::cyclic(need(a.modulus, "--mod", "--cayley cyclic")?),
            CayleyKind::Sym => GroupSpec::symmetric(need(a.n, "--n", "--cayley sym")?),
        };
        let family = kind.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
        let t = cayley_truncation::<f64>(spec, a.radius, a.mode, boundary, 0)?;
        (format!("cayley-{family}"), t.graph, GraphFileFormat::Kernel)
    } else if a.conductance_random {
        let g = random_conductance_graph(a.seed, RandomConductanceParams::default());
        ("conductance-random".to_string(), g, GraphFileFormat::Conductance)
    } else if a.example_z_nonh2 {
        let g = z_non_h2_example(need(a.radius, "--radius", "--example-z-nonh2")?)?;
        ("z-nonh2".to_string(), g, GraphFileFormat::Kernel)
    } else {
        let fam = a.family.expect("clap enforces one source");
        let n = || need(a.n, "--n", "this family");
        let g = match fam {
            Family::TwoVertex => two_vertex(),
            Family::Path => path_graph_example(),
            Family::Cycle => {
                let n = n()?;
                anyhow::ensure!(n >= 3, "cycle needs --n >= 3");
                cycle_graph(n)
            }
            Family::Complete => {
                let n = n()?;
                anyhow::ensure!(n >= 2, "complete graph needs --n >= 2");
                complete_graph(n)
            }
            Family::Star => {
                let n = n()?;
                anyhow::ensure!(n >= 1, "star needs --n >= 1");
                star_graph(n)
            }
        };
        let name = fam.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
        (name, g, GraphFileFormat::Kernel)
    };
    let format = match a.format {
        Some(FormatArg::Kernel) => GraphFileFormat::Kernel,
        Some(FormatArg::Conductance) => GraphFileFormat::Conductance,
        None => default_format,
    };
    let text = write_graph(&g, format)?;
    info!("generated {family} with {} vertices", g.len());
    match a.out {
        None => Ok(Outcome::report(0, text)),
        Some(path) => {
            write_sidecar(&path, &text)?;
            let result = GenResult {
                family,
                vertices: g.len(),
                kernel_entries: g.num_kernel_entries(),
                path: path.display().to_string(),
                sha256: crate::manifest::sha256_hex(text.as_bytes()),
            };
            let mut ctx = ctx;
            ctx.manifest.seed = a.conductance_random.then_some(a.seed);
            Ok(Outcome::report(0, ctx.render(&result)?))
        }
    }
}

#[derive(Serialize)]
struct CurvatureResult {
    verdict: Option<CdVerdict<f64>>,
    profile: Option<curvlab::CurvatureProfile>,
    oracle: Vec<OracleComparison<f64>>,
    oracle_trials: usize,
    oracle_agrees: bool,
}

/// Margin used to probe either side of `K_opt` in profile mode.
const PROFILE_PROBE: f64 = 0.01;

fn curvature(mut ctx: RunContext, a: CurvatureArgs) -> anyhow::Result<Outcome> {
    let g = load_graph(&mut ctx, &a.graph)?;
    let scope = match &a.vertices {
        Some(l) => VertexScope::List(labels_to_ids(&g, l)?),
        None => VertexScope::All,
    };
    ctx.manifest.seed = Some(a.seed);
    ctx.tolerance("psd_rel", PSD_REL);
    if a.n.is_finite() && a.n.fract() != 0.0 {
        ctx.hypothesis(format!("n = {} is not an integer; the real-n extension is used", a.n));
    }
    let mut result = CurvatureResult {
        verdict: None,
        profile: None,
        oracle: Vec::new(),
        oracle_trials: a.oracle_trials,
        oracle_agrees: true,
    };
    let mut code = 0;
    if let Some(k) = a.k {
        let verdict = check_cd(&g, k, a.n, &scope)?;
        result.oracle = cross_check(&g, &verdict, a.oracle_trials, a.seed)?;
        if !verdict.satisfied {
            code = EXIT_FAIL;
        }
        result.verdict = Some(verdict);
    } else {
        let profile = curvature_profile(&g, a.n, &scope)?;
        for (i, &x) in profile.vertices.iter().enumerate() {
            let k = profile.k_opt[i];
            if !k.is_finite() {
                continue;
            }
            for probe in [k - PROFILE_PROBE, k + PROFILE_PROBE] {
                let v = check_cd(&g, probe, a.n, &VertexScope::List(vec![x]))?;
                result.oracle.extend(cross_check(&g, &v, a.oracle_trials, a.seed)?);
            }
        }
        result.profile = Some(profile);
    }
    result.oracle_agrees = result.oracle.iter().all(|c| c.agree);
    if !result.oracle_agrees {
        code = EXIT_ORACLE;
    }
    Ok(Outcome::report(code, ctx.render(&result)?))
}

#[derive(Serialize)]
struct HeatValues {
    t: f64,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct HeatResult {
    labels: Vec<String>,
    flows: Vec<HeatValues>,
    audit: Option<GradientAuditReport<f64>>,
}

fn parse_audit(s: &str) -> anyhow::Result<(f64, f64)> {
    let (k, n) = s.split_once(',').ok_or_else(|| anyhow!("--audit expects `K,n`, got `{s}`"))?;
    let k: f64 = k.trim().parse().map_err(|_| anyhow!("invalid K `{k}`"))?;
    let n: f64 = n.trim().parse().map_err(|_| anyhow!("invalid n `{n}`"))?;
    Ok((k, n))
}

fn heat_cmd(mut ctx: RunContext, a: HeatArgs) -> anyhow::Result<Outcome> {
    let g = load_graph(&mut ctx, &a.graph)?;
    if let Some(t) = a.times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        bail!("times must be finite and non-negative, got {t}");
    }
    let f = a.function.as_deref().map(|p| load_function(&mut ctx, &g, p)).transpose()?;
    ctx.tolerance("semigroup", SEMIGROUP_TOL);
    let flows = match &f {
        Some(f) => a
            .times
            .iter()
            .map(|&t| Ok(HeatValues { t, values: heat(&g, t, f)? }))
            .collect::<anyhow::Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let audit = match a.audit.as_deref().map(parse_audit).transpose()? {
        None => None,
        Some((k, n)) => {
            let extra = a.corpus.unwrap_or(if f.is_some() { 0 } else { 16 });
            let mut corpus: Vec<Vec<f64>> = f.iter().cloned().collect();
            corpus.extend((0..extra as u64).map(|i| random_function(g.len(), a.seed.wrapping_add(i))));
            if extra > 0 {
                ctx.manifest.seed = Some(a.seed);
            }
            anyhow::ensure!(!corpus.is_empty(), "audit corpus is empty");
            ctx.tolerance("audit", AUDIT_TOL);
            ctx.tolerance("psd_rel", PSD_REL);
            let report = audit_gradient_estimates(&g, &corpus, &a.times, k, n, &AuditOptions::default())?;
            if report.records.iter().filter(|r| r.name != "stochastic_completeness").all(|r| r.vacuous.is_some()) {
                let why = report.records.iter().find_map(|r| r.vacuous.clone()).unwrap_or_default();
                return Err(refused(why));
            }
            ctx.hypothesis(format!("CD({k}, {n}) verified by check_cd on all {} vertices", g.len()));
            for r in report.records.iter().filter(|r| r.vacuous.is_some()) {
                ctx.hypothesis(format!("{} vacuous: {}", r.name, r.vacuous.as_deref().unwrap_or("")));
            }
            Some(report)
        }
    };
    if audit.is_none() && f.is_none() {
        bail!("nothing to do: pass --f and/or --audit");
    }
    if let Some(path) = &a.csv {
        let mut csv = String::from("t,vertex,value\n");
        for h in &flows {
            for (x, v) in h.values.iter().enumerate() {
                csv.push_str(&format!("{:.16e},{},{:.16e}\n", h.t, g.label(x), v));
            }
        }
        write_sidecar(path, &csv)?;
    }
    let code = if audit.as_ref().is_some_and(|r| !r.pass()) { EXIT_FAIL } else { 0 };
    let result = HeatResult {
        labels: g.labels().to_vec(),
        flows,
        audit,
    };
    Ok(Outcome::report(code, ctx.render(&result)?))
}

#[derive(Serialize)]
struct ModifiedHeatResult {
    method: SolveMethod,
    global_extension: bool,
    nodes: usize,
    horizon: f64,
    alpha: f64,
    gamma0_sup: f64,
    t_local: f64,
    admissible: bool,
    gamma_sup: Vec<f64>,
    oracle_deviation: Option<f64>,
    picard: Option<PicardDiagnostics<f64>>,
    reports: Vec<InequalityReport<f64>>,
    pass: bool,
}

fn modified_heat(mut ctx: RunContext, a: ModifiedHeatArgs) -> anyhow::Result<Outcome> {
    let g = load_graph(&mut ctx, &a.graph)?;
    let u0 = load_function(&mut ctx, &g, &a.u0)?;
    let wants = |v: Verifier| a.verify.contains(&v);
    let n = a.n;
    if (wants(Verifier::Liyau) || wants(Verifier::Harnack)) && n.is_none() {
        bail!("liyau and harnack require --n");
    }
    if wants(Verifier::Decay) && a.k.is_none() {
        bail!("decay requires --k");
    }
    let config = SolveConfig::new(u0, a.horizon, a.step).method(a.method).global(a.global);
    ctx.tolerance("picard", PICARD_TOL);
    let trace = match solve(&g, &config) {
        Ok(t) => t,
        Err(e @ (SolveError::NotAdmissible { .. } | SolveError::NotStochastic)) => return Err(refused(e)),
        Err(e) => return Err(e.into()),
    };
    if trace.admissible {
        ctx.hypothesis(format!("||Gamma u0|| = {} < alpha/2 = {}", trace.gamma0_sup, trace.alpha / 2.0));
    }

    let mut reports = Vec::new();
    if !a.verify.is_empty() {
        ctx.tolerance("verify", VERIFY_TOL);
        ctx.tolerance("psd_rel", PSD_REL);
    }
    if let Some(k) = a.k.filter(|_| wants(Verifier::Decay)) {
        reports.push(verify_gradient_decay(&g, &trace, k)?);
    }
    if wants(Verifier::Oscillation) {
        reports.push(verify_edge_oscillation(&g, &trace));
    }
    if let Some(n) = n.filter(|_| wants(Verifier::Liyau)) {
        reports.push(verify_li_yau(&g, &trace, n)?);
    }
    if let Some(n) = n.filter(|_| wants(Verifier::Harnack)) {
        let pairs = match &a.pairs {
            Some(p) => {
                let text = ctx.read(p)?;
                parse_pairs(&g, &text)?
            }
            None => {
                let last = trace.len() - 1;
                anyhow::ensure!(last >= 2, "default Harnack pairs need at least two grid steps");
                all_ordered_pairs(g.len(), trace.times[last / 2], trace.times[last])
            }
        };
        reports.push(verify_harnack(&g, &trace, n, &pairs)?);
    }
    if wants(Verifier::Comparison) {
        let gammas = a.gamma.clone().unwrap_or_else(|| vec![omega_constant(), gamma_upper()]);
        reports.extend(verify_comparison(&g, &trace, &gammas)?);
    }
    if let Some(r) = reports.iter().find(|r| r.vacuous.is_some()) {
        return Err(refused(format!("{}: {}", r.name, r.vacuous.as_deref().unwrap_or(""))));
    }
    for r in &reports {
        let params: Vec<String> = r.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        ctx.hypothesis(format!("{} hypotheses established ({})", r.name, params.join(", ")));
    }
    if let Some(path) = &a.csv {
        write_sidecar(path, &trace_csv(&g, &trace))?;
    }
    let pass = reports.iter().all(|r| r.pass);
    let result = ModifiedHeatResult {
        method: trace.method,
        global_extension: a.global,
        nodes: trace.len(),
        horizon: trace.horizon(),
        alpha: trace.alpha,
        gamma0_sup: trace.gamma0_sup,
        t_local: trace.t_local,
        admissible: trace.admissible,
        gamma_sup: trace.gamma.iter().map(|v| v.iter().copied().fold(0.0, f64::max)).collect(),
        oracle_deviation: trace.oracle_deviation,
        picard: trace.picard.clone(),
        reports,
        pass,
    };
    Ok(Outcome::report(if pass { 0 } else { EXIT_FAIL }, ctx.render(&result)?))
}

fn doubling(mut ctx: RunContext, a: DoublingArgs) -> anyhow::Result<Outcome> {
    let g = load_graph(&mut ctx, &a.graph)?;
    let centers = match &a.centers {
        Some(l) => labels_to_ids(&g, l)?,
        None => (0..g.len()).collect(),
    };
    if a.cd0_n.is_some() {
        ctx.tolerance("psd_rel", PSD_REL);
    }
    let report = doubling_report(&g, &centers, a.r_max, a.cd0_n)?;
    if let Some(n) = report.cd0_dimension {
        ctx.hypothesis(format!("CD(0, {n}) verified by check_cd"));
    }
    if let Some(path) = &a.csv {
        write_sidecar(path, &profiles_csv(&report.profiles, report.alpha))?;
    }
    let code = if report.local.iter().all(|l| l.pass) { 0 } else { EXIT_FAIL };
    Ok(Outcome::report(code, ctx.render(&report)?))
}
