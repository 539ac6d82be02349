use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use phasewall::constants::{
    compute_c_delta_with, compute_c_over_with, compute_c_under_with, compute_m_with, compute_sigma_with, select_r,
};
use phasewall::lifting::estimate_zeta;
use phasewall::scaling::plateau;
use phasewall::{
    characterize, lifting_ratio_explicit, ConstantEstimate, ConstantKind, DoubleWell, EstimateOptions, Grid1D, Grid2D,
    InitKind, LiftReport, ScalarField1D, ScalarField2D, SweepConfig, SweepDomain, SweepRecord,
};
use serde_json::json;
use thiserror::Error;

use crate::config::{Command, RunConfig};
use crate::report::{envelope, num, write_csv, write_json, ReportError};
use crate::suites::{self, SuiteReport, ZETA_LOWER, ZETA_UPPER};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] phasewall::Error),
    #[error("output: {0}")]
    Report(#[from] ReportError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) | RunError::Report(_) => 1,
        }
    }
}

/// Files written by a run and whether its checks passed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub pass: bool,
    /// Human-readable lines for stderr: warnings and failed cases.
    pub notes: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// Runs a validated config inside a thread pool of `cfg.threads` workers.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| RunError::Config(format!("output directory {}: {e}", cfg.output_dir.display())))?;
    let probe = cfg.output_dir.join(".phasewall-write-probe");
    fs::write(&probe, b"")
        .and_then(|_| fs::remove_file(&probe))
        .map_err(|e| RunError::Config(format!("output directory {} is not writable: {e}", cfg.output_dir.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match cfg.command {
        Command::Constant => constant(cfg),
        Command::Lift => lift(cfg),
        Command::Sweep => sweep(cfg),
        Command::Check => check(cfg),
    })
}

fn quartic(w: (f64, f64), scale: f64) -> Result<DoubleWell, RunError> {
    DoubleWell::quartic(w.0, w.1, scale).map_err(|e| RunError::Config(e.to_string()))
}

fn profile_rows(f: &ScalarField1D) -> Vec<Vec<String>> {
    let g = f.grid();
    f.values().iter().enumerate().map(|(i, &v)| vec![num(g.node(i)), num(v)]).collect()
}

fn estimate(
    which: ConstantKind,
    w: &DoubleWell,
    cfg: &RunConfig,
    r: f64,
    n: usize,
    opts: &EstimateOptions<f64>,
) -> phasewall::Result<ConstantEstimate> {
    match which {
        ConstantKind::M => compute_m_with(w, r, n, opts),
        ConstantKind::Sigma => compute_sigma_with(w, cfg.real("z"), cfg.real("xi"), r, n, opts),
        ConstantKind::CUnder => compute_c_under_with(w, r, n, opts),
        ConstantKind::COver => compute_c_over_with(w, r, n, opts),
        ConstantKind::CDelta => compute_c_delta_with(w, cfg.real("delta"), r, n, opts),
    }
}

fn constant(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let which: ConstantKind = cfg.get("which").parse()?;
    let wells = cfg.pair("wells");
    let w = quartic(wells, cfg.real("scale"))?;
    let opts = EstimateOptions { richardson: cfg.flag("richardson"), ..EstimateOptions::default() };
    let (r0, n) = (cfg.real("R"), cfg.int("n"));
    let (est, trail, settled) = if cfg.flag("select_R") {
        let sel = select_r(r0, n, 0.005, 4, |r, n| estimate(which, &w, cfg, r, n, &opts))?;
        (sel.estimate, Some(sel.trail), Some(sel.settled))
    } else {
        (estimate(which, &w, cfg, r0, n, &opts)?, None, None)
    };

    let name = which.name();
    let profile_name = format!("{name}_profile.csv");
    let profile_path = cfg.output_dir.join(&profile_name);
    write_csv(&profile_path, &["x", "f"], profile_rows(&est.profile))?;

    let mut results = json!({
        "constant": name,
        "wells": [wells.0, wells.1],
        "scale": cfg.real("scale"),
        "R": est.r,
        "R_start": r0,
        "n": est.n,
        "value": est.value,
        "extrapolated": est.extrapolated,
        "converged": est.converged,
        "iterations": est.iterations,
        "grad_norm": est.grad_norm,
        "breakdown": est.breakdown,
        "profile_path": profile_name,
    });
    let extra = results.as_object_mut().expect("object");
    match which {
        ConstantKind::Sigma => {
            extra.insert("z".into(), json!(cfg.real("z")));
            extra.insert("xi".into(), json!(cfg.real("xi")));
        }
        ConstantKind::CDelta => {
            extra.insert("delta".into(), json!(cfg.real("delta")));
        }
        _ => {}
    }
    if let Some(audit) = &est.audit {
        extra.insert("range_audit".into(), json!(audit));
    }
    if let Some(kappa) = which.kappa::<f64>() {
        extra.insert("kappa".into(), json!(kappa));
        extra.insert("characterized".into(), json!(characterize(&est, &w, kappa)?));
    }
    if let (Some(trail), Some(settled)) = (trail, settled) {
        extra.insert("R_trail".into(), json!(trail));
        extra.insert("R_settled".into(), json!(settled));
    }

    let json_path = cfg.output_dir.join(format!("{name}.json"));
    write_json(&json_path, &envelope(cfg, results))?;
    let mut notes = Vec::new();
    if !est.converged {
        notes.push(format!("warning: minimizer stopped with gradient norm {:e}", est.grad_norm));
    }
    Ok(RunOutcome { files: vec![json_path, profile_path], pass: true, notes })
}

fn trace_fn(kind: &str) -> Option<fn(f64) -> f64> {
    match kind {
        "smoothstep" => Some(|t| t * t * (3.0 - 2.0 * t)),
        "sine" => Some(|t| (std::f64::consts::PI * t).sin()),
        "cubic" => Some(|t| t * t * t),
        _ => None,
    }
}

fn field_rows(u: &ScalarField2D) -> Vec<Vec<String>> {
    let g = u.grid();
    (0..g.node_count())
        .filter(|&k| g.mask()[k])
        .map(|k| {
            let (i, j) = g.coords(k);
            vec![num(g.x(i)), num(g.y(j)), num(u.values()[k])]
        })
        .collect()
}

fn lift(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let (r, n, tol) = (cfg.real("R"), cfg.int("n"), cfg.real("tol"));
    let grid1 = Grid1D::new(0.0, r, n)?;
    let trace = cfg.get("trace");
    let g = match trace_fn(trace) {
        Some(f) => ScalarField1D::sample(grid1, |x| f(x / r))?,
        None => {
            let unit = suites::random_trace(&mut suites::rng_for(cfg.seed, 0), n);
            unit.relabeled(0.0, r)?
        }
    };
    let explicit = lifting_ratio_explicit(&g)?;
    let zeta = estimate_zeta(&g, Arc::new(Grid2D::triangle(r, n)?), tol)?;

    let mut files = Vec::new();
    let mut field_files = json!({});
    if cfg.flag("fields") {
        for (label, report) in [("explicit", &explicit), ("zeta", &zeta)] {
            if let Some(u) = &report.field {
                let name = format!("lift_{label}.csv");
                let path = cfg.output_dir.join(&name);
                write_csv(&path, &["x", "y", "u"], field_rows(u))?;
                field_files[label] = json!(name);
                files.push(path);
            }
        }
    }
    let report_json = |rep: &LiftReport| {
        let (xx, xy, yy) = rep.component_ratios();
        let mut v = json!(rep);
        v["component_ratios"] = json!([xx, xy, yy]);
        v
    };
    let inside = |v: f64| (ZETA_LOWER..=ZETA_UPPER).contains(&v);
    let results = json!({
        "trace": trace,
        "R": r,
        "n": n,
        "explicit": report_json(&explicit),
        "zeta": report_json(&zeta),
        "bracket": [ZETA_LOWER, ZETA_UPPER],
        "in_bracket": inside(explicit.ratio) && inside(zeta.ratio),
        "zeta_below_explicit": zeta.ratio <= explicit.ratio + 1e-9,
        "fields": field_files,
    });
    let path = cfg.output_dir.join("lift.json");
    write_json(&path, &envelope(cfg, results))?;
    files.insert(0, path);
    Ok(RunOutcome { files, pass: true, notes: Vec::new() })
}

fn sweep_config(cfg: &RunConfig) -> Result<(SweepConfig, &str), RunError> {
    let kind = cfg.get("kind");
    let scale = cfg.real("scale");
    let w = quartic(cfg.pair("wells"), scale)?;
    let domain = match kind {
        "full2d" => SweepDomain::Rectangle {
            width: cfg.real("width"),
            height: cfg.real("height"),
            nx: cfg.int("nx"),
            ny: cfg.int("ny"),
        },
        _ => SweepDomain::Interval { lo: 0.0, hi: 1.0, n: cfg.int("n") },
    };
    let boundary = if kind == "full2d" { quartic(cfg.pair("boundary_wells"), scale)? } else { w.clone() };
    let mut sc = SweepConfig::new(cfg.real("L"), cfg.list("eps"), w, boundary, domain);
    sc.mass = cfg.band("mass");
    sc.boundary_mass = cfg.band("boundary_mass");
    sc.lambda_override = cfg.optional("lambda");
    sc.init = match cfg.get("init") {
        "linear" => InitKind::LinearInterp,
        "boundary_layer" => InitKind::BoundaryLayerAnsatz,
        _ => InitKind::ProfileAnsatz,
    };
    sc.validate().map_err(|e| RunError::Config(e.to_string()))?;
    Ok((sc, kind))
}

fn sweep(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let (sc, kind) = sweep_config(cfg)?;
    let mut records: Vec<SweepRecord> = match kind {
        "f1d" => phasewall::sweep_f1d(&sc)?,
        "g1d" => phasewall::sweep_g1d(&sc)?,
        _ => phasewall::sweep_full2d(&sc)?,
    };
    if !cfg.timing {
        for r in &mut records {
            r.wall_ms = 0;
        }
    }
    let header = [
        "eps",
        "lambda",
        "L",
        "min_energy",
        "bending",
        "potential",
        "fractional",
        "boundary_potential",
        "converged",
        "wall_ms",
    ];
    let rows = records.iter().map(|r| {
        vec![
            num(r.eps),
            num(r.lambda),
            num(r.l),
            num(r.min_energy),
            num(r.breakdown.bending),
            num(r.breakdown.potential),
            num(r.breakdown.fractional),
            num(r.breakdown.boundary_potential),
            r.converged.to_string(),
            r.wall_ms.to_string(),
        ]
    });
    let csv_path = cfg.output_dir.join("sweep.csv");
    write_csv(&csv_path, &header, rows)?;

    let plateau_json = match plateau(&records) {
        Ok(p) => json!(p),
        Err(e) => json!({ "unavailable": e.to_string() }),
    };
    let notes: Vec<String> =
        records.iter().flat_map(|r| r.warnings.iter().map(move |w| format!("warning (eps={}): {w}", r.eps))).collect();
    let results = json!({
        "kind": kind,
        "L": sc.l,
        "records": records,
        "plateau": plateau_json,
        "csv_path": "sweep.csv",
    });
    let json_path = cfg.output_dir.join("sweep.json");
    write_json(&json_path, &envelope(cfg, results))?;
    Ok(RunOutcome { files: vec![csv_path, json_path], pass: true, notes })
}

/// Suites selected by a `check` config, in report order.
pub fn check_suites(cfg: &RunConfig) -> Vec<SuiteReport> {
    let seed = cfg.seed;
    let samples = cfg.int("samples");
    let inequalities = || {
        vec![
            suites::hardy_suite(seed, samples),
            suites::seminorm_suite(seed, samples),
            suites::lifting_suite(seed, cfg.int("traces"), cfg.int("n"), 0.03),
        ]
    };
    let hypotheses = || suites::hypotheses_suite(cfg.pair("wells"), cfg.real("scale"));
    match cfg.get("suite") {
        "inequalities" => inequalities(),
        "closed_form" => vec![suites::closed_form_suite()],
        "hypotheses" => vec![hypotheses()],
        _ => {
            let mut all = vec![suites::closed_form_suite()];
            all.extend(inequalities());
            all.push(hypotheses());
            all
        }
    }
}

fn check(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    let reports = check_suites(cfg);
    let pass = reports.iter().all(|s| s.pass);
    let notes = reports
        .iter()
        .flat_map(|s| {
            s.results.iter().filter(|c| !c.pass).map(move |c| format!("FAIL {}: {} {}", s.suite, c.name, c.detail))
        })
        .collect();
    let rows = reports
        .iter()
        .flat_map(|s| s.results.iter().map(move |c| vec![s.suite.clone(), c.name.clone(), c.pass.to_string()]));
    let csv_path = cfg.output_dir.join("check.csv");
    write_csv(&csv_path, &["suite", "case", "pass"], rows)?;
    let json_path = cfg.output_dir.join("check.json");
    write_json(&json_path, &envelope(cfg, json!({ "pass": pass, "suites": reports })))?;
    Ok(RunOutcome { files: vec![json_path, csv_path], pass, notes })
}
