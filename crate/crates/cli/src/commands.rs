use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::Serialize;

use boussinesq_core::adjoint::{random_detcheck, solve_eigenfunction};
use boussinesq_core::config::{parse_config, Config, InitialState};
use boussinesq_core::export::{fmt_real, CsvTable};
use boussinesq_core::fattorini::{
    f_of_alpha, merge_exceptional_set, scan_alpha as scan_one, two_control_verdict, uc_verdict, zeros_csv,
    AlphaScanReport, ExceptionalAlpha, FattoriniError, TwoControlVerdict, UcVerdict,
};
use boussinesq_core::galerkin::{
    assemble_mode_system, random_unit_vector, reduced_trajectory_csv, synthesize_control, truncate,
    GalerkinError,
};
use boussinesq_core::spectra::{
    default_search_ceiling, merge_spectrum, sample_dispersion, stokes_eigenvalues, Branch, MergedSpectrum,
    SpectralPoint,
};
use boussinesq_core::ModeIndex;

use crate::output::OutputDir;
use crate::CliError;

/// Writes outputs and returns `Some(reason)` when an acceptance check fails.
pub type Runner = fn(&Context, &mut OutputDir) -> Result<Option<String>, CliError>;

pub struct Context {
    pub config: Config,
    /// Directory relative paths in the config are resolved against.
    pub base: PathBuf,
}

const DETCHECK_TOLERANCE: f64 = 1e-9;
const DISPERSION_SAMPLES: usize = 4000;
const F_CURVE_SAMPLES: usize = 1000;

pub fn execute(name: &str, config_path: &Path, out: &Path, run: Runner) -> Result<(), CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::Config(format!("{}: {e}", config_path.display())))?;
    let config = parse_config(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let ctx = Context {
        config,
        base: config_path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let mut dir = OutputDir::create(out)?;
    let failure = run(&ctx, &mut dir)?;
    dir.finish(name, &text, &ctx.config)?;
    match failure {
        None => Ok(()),
        Some(reason) => Err(CliError::Numeric(reason)),
    }
}

fn mode(k: i32, key: &str) -> Result<ModeIndex, CliError> {
    ModeIndex::new(k).map_err(|e| CliError::Config(format!("{key}: {e}")))
}

fn numeric<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numeric(e.to_string())
}

fn galerkin(e: GalerkinError) -> CliError {
    match e {
        GalerkinError::Solve(_) => CliError::Numeric(e.to_string()),
        _ => CliError::Config(e.to_string()),
    }
}

fn spectrum_csv(points: &[SpectralPoint]) -> String {
    let mut t = CsvTable::new(&["branch", "k", "j", "lambda", "mu1_re", "mu1_im", "mu2_re", "mu2_im"]);
    for p in points {
        t.push(vec![
            p.branch.as_str().to_string(),
            p.k.get().to_string(),
            p.j.to_string(),
            fmt_real(p.lambda),
            fmt_real(p.mu1.re),
            fmt_real(p.mu1.im),
            fmt_real(p.mu2.re),
            fmt_real(p.mu2.im),
        ]);
    }
    t.to_csv_string()
}

fn merged(ctx: &Context, k: i32) -> Result<MergedSpectrum, CliError> {
    let c = &ctx.config;
    let s = &c.options.spectra;
    merge_spectrum(
        mode(k, "spectra.k_list")?,
        &c.params,
        s.count_stokes,
        s.count_dirichlet,
        &c.tol,
        s.search_ceiling,
    )
    .map_err(numeric)
}

pub fn spectra(ctx: &Context, out: &mut OutputDir) -> Result<Option<String>, CliError> {
    #[derive(Serialize)]
    struct Doc<'a> {
        modes: &'a [MergedSpectrum],
    }
    let s = &ctx.config.options.spectra;
    let l = ctx.config.params.l();
    for &k in &s.k_list {
        mode(k, "spectra.k_list")?;
    }
    let mut modes = Vec::new();
    for &k in &s.k_list {
        let m = merged(ctx, k)?;
        out.write(&format!("spectrum_k{k}.csv"), &spectrum_csv(&m.points))?;
        let ceiling = s.search_ceiling.unwrap_or_else(|| default_search_ceiling(s.count_stokes, l));
        let mut curve = CsvTable::new(&["mu_tilde", "dispersion_scaled"]);
        for p in sample_dispersion(m.k, l, ceiling, DISPERSION_SAMPLES) {
            curve.push(vec![fmt_real(p.mu_tilde), fmt_real(p.value)]);
        }
        out.write(&format!("dispersion_k{k}.csv"), &curve.to_csv_string())?;
        modes.push(m);
    }
    out.write_json("spectra.json", &Doc { modes: &modes })?;
    Ok(None)
}

pub fn detcheck(ctx: &Context, out: &mut OutputDir) -> Result<Option<String>, CliError> {
    let d = &ctx.config.options.detcheck;
    let seed = d
        .seed
        .ok_or_else(|| CliError::Config("detcheck.seed is required".into()))?;
    let report = random_detcheck(d.samples, seed);
    out.write_json("detcheck.json", &report)?;
    if !(report.max_rel_err <= DETCHECK_TOLERANCE) {
        return Ok(Some(format!(
            "max relative error {:.3e} exceeds {DETCHECK_TOLERANCE:e}",
            report.max_rel_err
        )));
    }
    if !report.coincident_both_zero {
        return Ok(Some("coincident-root sample: determinants do not both vanish".into()));
    }
    Ok(None)
}

pub fn scan_alpha(ctx: &Context, out: &mut OutputDir) -> Result<Option<String>, CliError> {
    #[derive(Serialize)]
    struct Doc<'a> {
        interval: (f64, f64),
        reports: &'a [AlphaScanReport],
        exceptional_set: &'a [ExceptionalAlpha],
    }
    let c = &ctx.config;
    let s = &c.options.scan;
    let nu = c.params.nu();
    let l = c.params.l();
    let lo = s.alpha_lo.unwrap_or(0.05 * nu);
    let hi = s.alpha_hi.unwrap_or(0.95 * nu);
    if !(lo > 0.0 && hi < nu && lo < hi) {
        return Err(CliError::Config(format!(
            "scan interval ({lo}, {hi}) must satisfy 0 < alpha_lo < alpha_hi < nu = {nu}"
        )));
    }
    if !(s.grid_step > 0.0 && s.grid_step < hi - lo) {
        return Err(CliError::Config(format!("scan.grid_step = {} out of range", s.grid_step)));
    }
    let j_max = s.j_list.iter().copied().max().unwrap_or(0);
    if j_max == 0 {
        return Err(CliError::Config("scan.j_list is empty".into()));
    }
    let mut reports = Vec::new();
    for &k in &s.k_list {
        let km = mode(k, "scan.k_list")?;
        let points = stokes_eigenvalues(km, &c.params, j_max, &c.tol).map_err(numeric)?;
        for &j in &s.j_list {
            let point = &points[j - 1];
            let report = scan_one(point, nu, l, (lo, hi), s.grid_step, &c.tol).map_err(|e| match e {
                FattoriniError::InvalidInterval { .. } | FattoriniError::InvalidGridStep(_) => {
                    CliError::Config(e.to_string())
                }
                other => numeric(other),
            })?;
            let mut curve = CsvTable::new(&["alpha", "F"]);
            for i in 0..=F_CURVE_SAMPLES {
                let a = lo + (hi - lo) * i as f64 / F_CURVE_SAMPLES as f64;
                curve.push(vec![fmt_real(a), fmt_real(f_of_alpha(point, l, a))]);
            }
            out.write(&format!("f_alpha_k{k}_j{j}.csv"), &curve.to_csv_string())?;
            reports.push(report);
        }
    }
    let exceptional = merge_exceptional_set(&reports);
    out.write("zeros.csv", &zeros_csv(&reports))?;
    out.write_json(
        "scan_alpha.json",
        &Doc {
            interval: (lo, hi),
            reports: &reports,
            exceptional_set: &exceptional,
        },
    )?;
    Ok(None)
}

pub fn verdict(ctx: &Context, out: &mut OutputDir) -> Result<Option<String>, CliError> {
    #[derive(Serialize)]
    struct Row {
        #[serde(flatten)]
        uc: UcVerdict,
        two_control: Option<TwoControlVerdict>,
    }
    #[derive(Serialize)]
    struct Doc<'a> {
        rows: &'a [Row],
    }
    let c = &ctx.config;
    let v = &c.options.verdict;
    for &k in &c.options.spectra.k_list {
        mode(k, "spectra.k_list")?;
    }
    let mut rows = Vec::new();
    for &k in &c.options.spectra.k_list {
        for point in merged(ctx, k)?.points {
            let uc = uc_verdict(&point, &c.params, &c.tol, v.samples).map_err(numeric)?;
            let two_control = if v.two_control && point.branch == Branch::Stokes {
                Some(two_control_verdict(&point, &c.params).map_err(numeric)?)
            } else {
                None
            };
            if v.export_eigenfunctions {
                let e = solve_eigenfunction(&point, &c.params, &c.tol, v.samples).map_err(numeric)?;
                let stem = format!("eigenfunction_{}_k{k}_j{}", point.branch.as_str(), point.j);
                out.write(&format!("{stem}.csv"), &e.to_csv())?;
                out.write(&format!("{stem}.json"), &e.summary_json().map_err(numeric)?)?;
            }
            rows.push(Row { uc, two_control });
        }
    }
    let mut t = CsvTable::new(&[
        "branch",
        "k",
        "j",
        "lambda",
        "verdict",
        "regime",
        "det_r_normalized",
        "obs_re",
        "obs_im",
        "null_ratio",
        "max_residual",
        "two_control",
    ]);
    for r in &rows {
        let u = &r.uc;
        let regime = serde_json::to_value(u.regime).map_err(numeric)?;
        t.push(vec![
            u.branch.as_str().to_string(),
            u.k.to_string(),
            u.j.to_string(),
            fmt_real(u.lambda),
            u.verdict.as_str().to_string(),
            regime.as_str().unwrap_or_default().to_string(),
            u.det_r_normalized.map(fmt_real).unwrap_or_default(),
            fmt_real(u.obs.re),
            fmt_real(u.obs.im),
            fmt_real(u.null_ratio),
            fmt_real(u.max_residual),
            r.two_control.map(|t| t.verdict.as_str().to_string()).unwrap_or_default(),
        ]);
    }
    out.write("verdicts.csv", &t.to_csv_string())?;
    out.write_json("verdicts.json", &Doc { rows: &rows })?;
    Ok(None)
}

fn read_target(path: &Path, dim: usize) -> Result<DVector<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if values.len() != dim || values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Config(format!(
            "{}: expected {dim} finite values, found {}",
            path.display(),
            values.len()
        )));
    }
    Ok(DVector::from_vec(values))
}

pub fn control(ctx: &Context, out: &mut OutputDir) -> Result<Option<String>, CliError> {
    let c = &ctx.config;
    let o = &c.options.control;
    let k = mode(o.k, "control.k")?;
    let needs_seed = o.target_file.is_none() || o.x0 == InitialState::Random;
    let seed = match (o.seed, needs_seed) {
        (Some(s), _) => s,
        (None, false) => 0,
        (None, true) => return Err(CliError::Config("control.seed is required for random states".into())),
    };
    let system = assemble_mode_system(k, &c.params, o.grid_n, o.dt, o.horizon).map_err(galerkin)?;
    if system.steps % o.segments != 0 {
        return Err(CliError::Config(format!(
            "control.segments = {} must divide the {} time steps",
            o.segments, system.steps
        )));
    }
    let trunc = truncate(&system, o.n_u, o.n_theta).map_err(galerkin)?;
    let dim = trunc.dim();
    let target = match &o.target_file {
        Some(f) => read_target(&ctx.base.join(f), dim)?,
        None => random_unit_vector(dim, seed),
    };
    let x0 = match o.x0 {
        InitialState::Zero => DVector::zeros(dim),
        InitialState::Random => random_unit_vector(dim, seed.wrapping_add(1)),
    };
    let experiment = synthesize_control(&trunc, &x0, &target, o.segments, o.ridge).map_err(galerkin)?;
    let traj = trunc
        .simulate(&x0, &experiment.control)
        .map_err(galerkin)?;
    out.write("control.json", &experiment.to_json().map_err(numeric)?)?;
    out.write("control_signal.csv", &experiment.control_csv())?;
    out.write("gramian_sv.csv", &experiment.gramian_csv())?;
    out.write("trajectory.csv", &reduced_trajectory_csv(&system, &trunc, &traj))?;
    if !(experiment.achieved_eps <= o.eps_bound) {
        return Ok(Some(format!(
            "achieved_eps {:.3e} exceeds control.eps_bound {:e}",
            experiment.achieved_eps, o.eps_bound
        )));
    }
    Ok(None)
}
