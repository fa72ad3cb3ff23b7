//! Subcommand implementations. Each writes its artifacts under `out` and a
//! manifest that the CSV files cite.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use cofrag_core::analysis::{
    contraction_check, gronwall_constant_psi, mass_conservation_report, trajectory_norm, truncation_convergence,
    uniqueness_distance, ContractionReport, ConvergenceReport, MassReport, ThetaConstraints,
};
use cofrag_core::kernels::{check_admissibility, AdmissibilityReport, SamplePlan};
use cofrag_core::moments::{envelope_rows, Envelopes};
use cofrag_core::{project_initial_condition, AbortedRun, Solver, Trajectory};

use crate::output::{self, num, Csv, MANIFEST};
use crate::{CliError, Outcome, RunConfig};

fn hash_text(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
    }
    hex::encode(h.finalize())
}

/// SHA-256 of the canonical configuration text.
pub fn config_hash(cfg: &RunConfig) -> String {
    hash_text(&[&cfg.emit()])
}

#[derive(Debug, Clone, Serialize)]
struct Versions {
    cofrag_cli: &'static str,
    cofrag_core: &'static str,
}

const VERSIONS: Versions = Versions { cofrag_cli: env!("CARGO_PKG_VERSION"), cofrag_core: cofrag_core::VERSION };

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

/// Runs a trajectory for `cfg`, stamping it with the configuration hash.
pub fn simulate(cfg: &RunConfig) -> Result<Result<Trajectory, AbortedRun>, CliError> {
    let solver = Solver::new(cfg.solver_config()?).map_err(|e| CliError::Config(e.to_string()))?;
    let hash = config_hash(cfg);
    log::info!("running {} cells to t = {} (config {})", cfg.grid.n_cells, cfg.time.t_end, &hash[..12]);
    let initial = cfg.initial.clone();
    let result = solver.run(|x| initial.eval(x));
    Ok(match result {
        Ok(mut traj) => {
            traj.config_hash = hash;
            Ok(traj)
        }
        Err(mut aborted) => {
            aborted.partial.config_hash = hash;
            Err(aborted)
        }
    })
}

const ENVELOPE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
struct MarginSummary {
    xi: f64,
    min_margin: f64,
    t: f64,
}

#[derive(Debug, Clone, Serialize)]
struct EnvelopeSummary {
    available: bool,
    note: Option<String>,
    exceeded: bool,
    worst: Vec<MarginSummary>,
}

#[derive(Debug, Clone, Serialize)]
struct RunManifest {
    command: &'static str,
    status: &'static str,
    error: Option<String>,
    config_hash: String,
    versions: Versions,
    samples: usize,
    accepted_steps: usize,
    rejected_steps: usize,
    files: Vec<String>,
    mass: Option<MassReport>,
    envelope_summary: EnvelopeSummary,
}

fn envelope_artifacts(cfg: &RunConfig, traj: &Trajectory) -> (Option<Csv>, EnvelopeSummary) {
    let rows = cfg.envelope_params().and_then(|p| envelope_rows(traj, &p).map_err(|e| CliError::Config(e.to_string())));
    let rows = match rows {
        Ok(rows) => rows,
        Err(e) => {
            let summary = EnvelopeSummary { available: false, note: Some(e.to_string()), exceeded: false, worst: Vec::new() };
            return (None, summary);
        }
    };
    let mut csv = Csv::new(&traj.config_hash, &["t", "xi", "moment", "envelope", "margin"]);
    let mut worst: Vec<MarginSummary> = Vec::new();
    for r in &rows {
        csv.row(&[num(r.t), num(r.xi), num(r.moment), num(r.envelope), num(r.margin)]);
        match worst.iter_mut().find(|w| w.xi == r.xi) {
            Some(w) if r.margin < w.min_margin => {
                w.min_margin = r.margin;
                w.t = r.t;
            }
            Some(_) => {}
            None => worst.push(MarginSummary { xi: r.xi, min_margin: r.margin, t: r.t }),
        }
    }
    // Moments equal their envelopes at t = 0, so allow rounding.
    let exceeded = rows.iter().any(|r| r.margin < -ENVELOPE_SLACK * r.envelope.abs().max(r.moment.abs()));
    (Some(csv), EnvelopeSummary { available: true, note: None, exceeded, worst })
}

fn write_run_artifacts(
    cfg: &RunConfig,
    traj: &Trajectory,
    out: &Path,
    error: Option<String>,
) -> Result<RunManifest, CliError> {
    ensure_dir(out)?;
    let hash = &traj.config_hash;
    let mut files = vec!["config.json".to_string(), "trajectory.csv".to_string()];
    fs::write(out.join("config.json"), cfg.emit())?;
    output::trajectory_csv(traj, hash).write(&out.join("trajectory.csv"))?;
    if let Some(extra) = output::extra_moments_csv(traj, hash) {
        extra.write(&out.join("moments_extra.csv"))?;
        files.push("moments_extra.csv".into());
    }
    for k in 0..traj.samples.len() {
        let name = output::snapshot_name(k);
        output::snapshot_csv(traj, k, hash).write(&out.join(&name))?;
        files.push(name);
    }
    let (env_csv, envelope_summary) =
        if traj.samples.is_empty() { (None, EnvelopeSummary { available: false, note: Some("no samples".into()), exceeded: false, worst: Vec::new() }) } else { envelope_artifacts(cfg, traj) };
    if let Some(csv) = env_csv {
        csv.write(&out.join("envelopes.csv"))?;
        files.push("envelopes.csv".into());
    }
    let mass = mass_conservation_report(traj, cfg.analysis.mass_tolerance).ok();
    let manifest = RunManifest {
        command: "run",
        status: if error.is_some() { "aborted" } else { "complete" },
        error,
        config_hash: hash.clone(),
        versions: VERSIONS,
        samples: traj.samples.len(),
        accepted_steps: traj.dt_history.len(),
        rejected_steps: traj.rejected_steps,
        files,
        mass,
        envelope_summary,
    };
    output::write_json(&out.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

pub fn cmd_run(config: &Path, out: &Path, w: &mut dyn Write) -> Result<Outcome, CliError> {
    let cfg = RunConfig::load(config)?;
    match simulate(&cfg)? {
        Ok(traj) => {
            let manifest = write_run_artifacts(&cfg, &traj, out, None)?;
            let last = traj.last();
            writeln!(w, "run complete: {} samples, {} steps ({} rejected)", manifest.samples, manifest.accepted_steps, manifest.rejected_steps)?;
            writeln!(w, "t = {}  M0 = {}  M1 = {}  mass drift = {:e}", num(last.t()), num(last.moments[1]), num(last.moments[2]), last.mass_drift)?;
            if let Some(m) = &manifest.mass {
                writeln!(w, "adjusted mass drift {:e} (tolerance {:e})", m.adjusted_drift, m.tolerance)?;
            }
            if manifest.envelope_summary.exceeded {
                writeln!(w, "warning: a moment exceeded its envelope; see envelopes.csv")?;
            }
            writeln!(w, "artifacts written to {}", out.display())?;
            Ok(Outcome::Ok)
        }
        Err(aborted) => {
            let msg = aborted.error.to_string();
            write_run_artifacts(&cfg, &aborted.partial, out, Some(msg.clone()))?;
            Err(CliError::Runtime(format!("run aborted: {msg}; partial artifacts in {}", out.display())))
        }
    }
}

/// Sampling plan used by `check-kernels`, covering the configured negative
/// moment order and, when requested, the uniqueness weights.
pub fn sample_plan(cfg: &RunConfig, uniqueness: bool) -> SamplePlan {
    let mut plan = SamplePlan::default();
    plan.x_max = plan.x_max.max(cfg.grid.x_max);
    plan.negative_orders = vec![0.0, cfg.moments.omega];
    if uniqueness {
        if !plan.negative_orders.contains(&cfg.analysis.theta) {
            plan.negative_orders.push(cfg.analysis.theta);
        }
        plan.uniqueness = Some(cfg.uniqueness_weights());
    }
    plan
}

pub fn check_kernels(cfg: &RunConfig, uniqueness: bool) -> AdmissibilityReport {
    let k = &cfg.kernels;
    check_admissibility(&k.coagulation, &k.collision, &k.breakup, &sample_plan(cfg, uniqueness))
}

#[derive(Debug, Clone, Serialize)]
struct CheckManifest<'a> {
    command: &'static str,
    config_hash: String,
    versions: Versions,
    report: &'a AdmissibilityReport,
}

pub fn cmd_check_kernels(config: &Path, out: Option<&Path>, uniqueness: bool, w: &mut dyn Write) -> Result<Outcome, CliError> {
    let cfg = RunConfig::load(config)?;
    let report = check_kernels(&cfg, uniqueness);
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.assumption.to_string(),
                if c.passed { "pass".into() } else { "FAIL".into() },
                c.worst_ratio.map_or("-".into(), |r| format!("{r:.6e}")),
                c.detail.clone(),
            ]
        })
        .collect();
    write!(w, "{}", output::table(&["assumption", "status", "worst_ratio", "detail"], &rows))?;
    writeln!(w, "N = sup N(y) = {} (constant in y: {})", report.fragment_sup, report.fragment_count_constant)?;
    for c in report.failures() {
        if let Some(wit) = &c.witness {
            writeln!(w, "{} witness: x = {:e}, y = {:e}, z = {:?}, value = {:e} > bound = {:e}", c.assumption, wit.x, wit.y, wit.z, wit.value, wit.bound)?;
        }
    }
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let manifest = CheckManifest { command: "check-kernels", config_hash: config_hash(&cfg), versions: VERSIONS, report: &report };
        output::write_json(&dir.join(MANIFEST), &manifest)?;
    }
    Ok(if report.all_passed() { Outcome::Ok } else { Outcome::Violations })
}

/// Outcome of a paired comparison.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub theta: f64,
    pub norm_g: f64,
    pub norm_h: f64,
    pub eta_theta: f64,
    pub theta_constraints: ThetaConstraints,
    pub contraction: ContractionReport,
}

/// Runs both configurations and checks `Q(t) <= Q(0) e^{Psi t}`.
pub fn compare(a: &RunConfig, b: &RunConfig, theta: f64) -> Result<(Trajectory, Trajectory, Comparison), CliError> {
    if a.grid != b.grid {
        return Err(CliError::Config("compared configurations must use identical grids".into()));
    }
    if a.time.t_end != b.time.t_end || a.time.sample_count != b.time.sample_count {
        return Err(CliError::Config("compared configurations must use identical sample times".into()));
    }
    let (ra, rb) = rayon::join(|| simulate(a), || simulate(b));
    let ga = ra?.map_err(|e| CliError::Runtime(format!("first run aborted: {}", e.error)))?;
    let gb = rb?.map_err(|e| CliError::Runtime(format!("second run aborted: {}", e.error)))?;
    let q = uniqueness_distance(&ga, &gb, theta).map_err(|e| CliError::Config(e.to_string()))?;
    let params = a.envelope_params()?;
    let (s1, s2) = (a.analysis.sigma1, a.analysis.sigma2);
    let norm_g = trajectory_norm(&ga, s1, s2);
    let norm_h = trajectory_norm(&gb, s1, s2);
    let eta_theta = a.kernels.breakup.eta(theta).map_err(|e| CliError::Config(e.to_string()))?;
    let psi = gronwall_constant_psi(norm_g, norm_h, &params, eta_theta);
    let contraction = contraction_check(&q, psi, a.analysis.contraction_tolerance);
    let mut analysis = a.analysis_config();
    analysis.theta = theta;
    let theta_constraints = analysis.theta_constraints(a.kernels.coagulation.bound.sigma);
    Ok((ga, gb, Comparison { theta, norm_g, norm_h, eta_theta, theta_constraints, contraction }))
}

#[derive(Debug, Clone, Serialize)]
struct CompareManifest<'a> {
    command: &'static str,
    config_hash: String,
    config_hashes: [String; 2],
    versions: Versions,
    files: Vec<&'static str>,
    comparison: &'a Comparison,
}

pub fn cmd_compare(
    config: &Path,
    against: &Path,
    theta: Option<f64>,
    out: &Path,
    w: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let a = RunConfig::load(config)?;
    let b = RunConfig::load(against)?;
    let theta = theta.unwrap_or(a.analysis.theta);
    if !(0.0..1.0).contains(&theta) {
        return Err(CliError::Config(format!("theta must lie in [0, 1), got {theta}")));
    }
    let (ga, gb, cmp) = compare(&a, &b, theta)?;
    let hash = hash_text(&[&ga.config_hash, &gb.config_hash]);
    ensure_dir(out)?;
    let mut csv = Csv::new(&hash, &["t", "Q", "bound", "margin"]);
    for r in &cmp.contraction.rows {
        csv.row(&[num(r.t), num(r.q), num(r.bound), num(r.margin)]);
    }
    csv.write(&out.join("compare.csv"))?;
    let manifest = CompareManifest {
        command: "compare",
        config_hash: hash,
        config_hashes: [ga.config_hash.clone(), gb.config_hash.clone()],
        versions: VERSIONS,
        files: vec!["compare.csv"],
        comparison: &cmp,
    };
    output::write_json(&out.join(MANIFEST), &manifest)?;
    let c = &cmp.contraction;
    writeln!(w, "theta = {theta}  Psi = {:e}  ||g|| = {:e}  ||h|| = {:e}", c.psi, cmp.norm_g, cmp.norm_h)?;
    writeln!(w, "Q(0) = {:e}  sup Q = {:e}", c.rows.first().map_or(0.0, |r| r.q), c.rows.iter().map(|r| r.q).fold(0.0, f64::max))?;
    let tc = &cmp.theta_constraints;
    writeln!(w, "theta constraints: weights {} distance {} (binding {})", tc.weights_hold, tc.distance_holds, tc.binding)?;
    match c.witness {
        None => writeln!(w, "contraction: pass")?,
        Some(t) => writeln!(w, "contraction: FAIL at t = {t:e}")?,
    }
    Ok(if c.passed { Outcome::Ok } else { Outcome::Violations })
}

pub fn convergence(cfg: &RunConfig, n_list: &[u32], theta: f64) -> Result<ConvergenceReport, CliError> {
    let base = cfg.solver_config()?;
    let initial = cfg.initial.clone();
    truncation_convergence(&base, |x| initial.eval(x), n_list, theta).map_err(|e| match e {
        cofrag_core::Error::Config(m) => CliError::Config(m),
        other => CliError::Runtime(other.to_string()),
    })
}

#[derive(Debug, Clone, Serialize)]
struct ConvergenceManifest<'a> {
    command: &'static str,
    config_hash: String,
    versions: Versions,
    files: Vec<&'static str>,
    report: &'a ConvergenceReport,
}

pub fn cmd_convergence(
    config: &Path,
    n_list: &[u32],
    theta: Option<f64>,
    out: &Path,
    w: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let cfg = RunConfig::load(config)?;
    let theta = theta.unwrap_or(cfg.analysis.theta);
    let report = convergence(&cfg, n_list, theta)?;
    let hash = config_hash(&cfg);
    ensure_dir(out)?;
    let mut csv = Csv::new(&hash, &["n_coarse", "n_fine", "sup_Q"]);
    for p in &report.pairs {
        csv.row(&[p.n_coarse.to_string(), p.n_fine.to_string(), num(p.sup_q)]);
    }
    csv.write(&out.join("convergence.csv"))?;
    let manifest =
        ConvergenceManifest { command: "convergence", config_hash: hash, versions: VERSIONS, files: vec!["convergence.csv"], report: &report };
    output::write_json(&out.join(MANIFEST), &manifest)?;
    let rows: Vec<Vec<String>> =
        report.pairs.iter().map(|p| vec![p.n_coarse.to_string(), p.n_fine.to_string(), format!("{:.6e}", p.sup_q)]).collect();
    write!(w, "{}", output::table(&["n", "n_next", "sup_t Q"], &rows))?;
    writeln!(w, "monotone decrease: {}", report.monotone)?;
    Ok(if report.monotone { Outcome::Ok } else { Outcome::Violations })
}

/// Envelope values at each sample time of the configuration.
pub fn envelope_table(cfg: &RunConfig) -> Result<Vec<Envelopes>, CliError> {
    let params = cfg.envelope_params()?;
    let solver_cfg = cfg.solver_config()?;
    let initial = project_initial_condition(&solver_cfg.grid, |x| cfg.initial.eval(x)).map_err(CliError::from_core_config)?;
    solver_cfg
        .sample_times()
        .into_iter()
        .map(|t| Envelopes::compute(&params.with_horizon(t), &initial, &solver_cfg.grid).map_err(CliError::from_core_config))
        .collect()
}

const ENVELOPE_COLUMNS: [&str; 9] = ["T", "P0", "P1", "P2", "P_minus_omega", "P_minus_omega_gronwall", "E0", "S", "S_sup"];

fn envelope_cells(e: &Envelopes, fmt: impl Fn(f64) -> String) -> Vec<String> {
    [e.horizon, e.p0, e.p1, e.p2, e.p_negative, e.p_negative_gronwall, e.e0, e.s, e.s_sup].into_iter().map(fmt).collect()
}

pub fn cmd_envelopes(config: &Path, out: Option<&Path>, w: &mut dyn Write) -> Result<Outcome, CliError> {
    let cfg = RunConfig::load(config)?;
    let table = envelope_table(&cfg)?;
    let rows: Vec<Vec<String>> = table.iter().map(|e| envelope_cells(e, |v| format!("{v:.6e}"))).collect();
    write!(w, "{}", output::table(&ENVELOPE_COLUMNS, &rows))?;
    writeln!(w, "S uses lambda1^(1-sigma) as printed; S_sup is sup over x of E(x, T)")?;
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let hash = config_hash(&cfg);
        let mut csv = Csv::new(&hash, &ENVELOPE_COLUMNS);
        for e in &table {
            csv.row(&envelope_cells(e, num));
        }
        csv.write(&dir.join("envelope_table.csv"))?;
        #[derive(Serialize)]
        struct EnvManifest {
            command: &'static str,
            config_hash: String,
            versions: Versions,
            files: Vec<&'static str>,
        }
        let manifest = EnvManifest { command: "envelopes", config_hash: hash, versions: VERSIONS, files: vec!["envelope_table.csv"] };
        output::write_json(&dir.join(MANIFEST), &manifest)?;
    }
    Ok(Outcome::Ok)
}
