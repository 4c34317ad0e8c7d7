use std::path::Path;
use std::sync::Arc;

use super::config::JobConfig;
use super::pgm::{encode_labels, encode_mask, write_atomic};
use super::report::{Check, RhEntry, RunReport};
use super::CliError;
use crate::fractal::estimate::julia_semigroup_points;
use crate::fractal::{invariant_julia, rasterize, InvariantJulia, SphereMask, TwoChartGrid};
use crate::ratmap::RationalMap;
use crate::semigroup::RationalSemigroup;
use crate::sphere::SpherePoint;
use crate::topology::{
    check_permutation, classify_count, label_components, summarize, ComponentLabeling,
    MIN_COMPONENT_PIXELS,
};

pub(crate) fn grid(n: usize, overlap: f64) -> Result<Arc<TwoChartGrid>, CliError> {
    TwoChartGrid::new(n, overlap)
        .map(Arc::new)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn scenario_name(cfg: &JobConfig, default: &str) -> String {
    cfg.scenario.clone().unwrap_or_else(|| default.to_string())
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(&dir.join(name), bytes).map_err(|e| CliError::Io(format!("{name}: {e}")))
}

pub(crate) fn rh_entries(maps: &[RationalMap]) -> Result<Vec<RhEntry>, CliError> {
    maps.iter()
        .map(|f| {
            Ok(RhEntry {
                degree: f.degree(),
                deficiency: f.rh_deficiency()?,
            })
        })
        .collect()
}

/// Julia-set sample points and their rasterization at each grid size.
pub struct JuliaRun {
    pub points: Vec<SpherePoint>,
    pub mask: SphereMask,
    pub report: RunReport,
}

/// Samples `J(G)`, rasterizes it at `grid_n` and counts the components of its
/// complement at each resolution.
pub fn run_julia(cfg: &JobConfig) -> Result<JuliaRun, CliError> {
    let g = cfg.semigroup()?;
    let mut report = RunReport::new(&scenario_name(cfg, "estimate-julia"), cfg.estimator.seed);
    let points = julia_semigroup_points(&g, &cfg.estimator)?;
    let mut trace = Vec::new();
    for &r in &cfg.resolutions {
        let m = rasterize(&grid(r, cfg.overlap)?, &points);
        trace.push((r, label_components(&m).counted(MIN_COMPONENT_PIXELS)));
    }
    let mask = rasterize(&grid(cfg.grid_n, cfg.overlap)?, &points);
    report.resolutions = cfg.resolutions.clone();
    report.counts = trace.iter().map(|t| t.1).collect();
    report.class = Some(classify_count(&trace)?);
    report.components = summarize(&label_components(&mask), MIN_COMPONENT_PIXELS)?;
    report.rh = rh_entries(g.generators())?;
    Ok(JuliaRun {
        points,
        mask,
        report,
    })
}

/// Invariant closure at `grid_n` with its complement labeled.
pub struct InvariantRun {
    pub semigroup: RationalSemigroup,
    pub estimate: InvariantJulia,
    pub labeling: ComponentLabeling,
    pub report: RunReport,
}

fn closure(
    g: &RationalSemigroup,
    cfg: &JobConfig,
    n: usize,
) -> Result<InvariantJulia, CliError> {
    Ok(invariant_julia(g, &grid(n, cfg.overlap)?, &cfg.estimator)?.require_fixed_point()?)
}

/// Runs the closure at every resolution, then labels, summarizes and checks
/// the permutation action at `grid_n`.
pub fn run_invariant(cfg: &JobConfig) -> Result<InvariantRun, CliError> {
    let g = cfg.semigroup()?;
    let mut report =
        RunReport::new(&scenario_name(cfg, "estimate-invariant"), cfg.estimator.seed);
    let mut trace = Vec::new();
    let mut at_grid = None;
    for &r in &cfg.resolutions {
        let e = closure(&g, cfg, r)?;
        trace.push((r, label_components(&e.mask).counted(MIN_COMPONENT_PIXELS)));
        report.iterations.push(e.iterations);
        if r == cfg.grid_n {
            at_grid = Some(e);
        }
    }
    let estimate = match at_grid {
        Some(e) => e,
        None => closure(&g, cfg, cfg.grid_n)?,
    };
    let labeling = label_components(&estimate.mask);
    report.resolutions = cfg.resolutions.clone();
    report.counts = trace.iter().map(|t| t.1).collect();
    report.class = Some(classify_count(&trace)?);
    report.components = summarize(&labeling, MIN_COMPONENT_PIXELS)?;
    if (1..=2).contains(&labeling.counted(MIN_COMPONENT_PIXELS)) {
        match check_permutation(&g, &labeling, MIN_COMPONENT_PIXELS) {
            Ok(table) => report.permutations = table,
            Err(e) => eprintln!("warning: no permutation table: {e}"),
        }
    }
    report.rh = rh_entries(g.generators())?;
    Ok(InvariantRun {
        semigroup: g,
        estimate,
        labeling,
        report,
    })
}

pub fn estimate_julia(cfg: &JobConfig) -> Result<RunReport, CliError> {
    let run = run_julia(cfg)?;
    write(&cfg.output_dir, "julia.pgm", &encode_mask(&run.mask))?;
    Ok(run.report)
}

pub fn estimate_invariant(cfg: &JobConfig) -> Result<RunReport, CliError> {
    let run = run_invariant(cfg)?;
    write(&cfg.output_dir, "e_set.pgm", &encode_mask(&run.estimate.mask))?;
    write(&cfg.output_dir, "w_components.pgm", &encode_labels(&run.labeling))?;
    Ok(run.report)
}

/// Labels the complement of a stored mask, or of a fresh closure when no mask
/// is given.
pub fn components(cfg: &JobConfig, mask: Option<SphereMask>) -> Result<RunReport, CliError> {
    let Some(mask) = mask else {
        let run = run_invariant(cfg)?;
        write(&cfg.output_dir, "w_components.pgm", &encode_labels(&run.labeling))?;
        return Ok(run.report);
    };
    let g = cfg.semigroup()?;
    let mut report = RunReport::new(&scenario_name(cfg, "components"), cfg.estimator.seed);
    let labeling = label_components(&mask);
    report.resolutions = vec![mask.grid().n()];
    report.counts = vec![labeling.counted(MIN_COMPONENT_PIXELS)];
    report.components = summarize(&labeling, MIN_COMPONENT_PIXELS)?;
    if (1..=2).contains(&labeling.counted(MIN_COMPONENT_PIXELS)) {
        if let Ok(table) = check_permutation(&g, &labeling, MIN_COMPONENT_PIXELS) {
            report.permutations = table;
        }
    }
    report.rh = rh_entries(g.generators())?;
    write(&cfg.output_dir, "w_components.pgm", &encode_labels(&labeling))?;
    Ok(report)
}

/// Riemann-Hurwitz deficiency of every generator and every ordered pair of
/// generators composed.
pub fn rh_check(cfg: &JobConfig) -> Result<RunReport, CliError> {
    let g = cfg.semigroup()?;
    let mut report = RunReport::new(&scenario_name(cfg, "rh-check"), cfg.estimator.seed);
    let gens = g.generators();
    let mut maps: Vec<(String, RationalMap)> = gens
        .iter()
        .enumerate()
        .map(|(i, f)| (format!("g{i}"), f.clone()))
        .collect();
    for (i, a) in gens.iter().enumerate() {
        for (j, b) in gens.iter().enumerate() {
            maps.push((format!("g{i}.g{j}"), a.compose(b)?));
        }
    }
    for (name, f) in &maps {
        let entry = rh_entries(std::slice::from_ref(f))?[0];
        report.checks.push(Check::new(
            name,
            entry.holds(),
            format!("degree {} deficiency {}", entry.degree, entry.deficiency),
        ));
        report.rh.push(entry);
    }
    Ok(report)
}
