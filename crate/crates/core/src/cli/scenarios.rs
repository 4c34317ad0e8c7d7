//! Built-in semigroups and the checks `verify` runs against them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::commands::{rh_entries, run_invariant, run_julia};
use super::config::{GeneratorSpec, JobConfig};
use super::report::{Check, RunReport};
use super::CliError;
use crate::fractal::reference::{
    coverage, excess_pixels, sample_circle, sample_real_line, sample_segment,
};
use crate::fractal::SphereMask;
use crate::polyroots::Polynomial;
use crate::ratmap::RationalMap;
use crate::topology::ComponentClass;
use num_complex::Complex64;

pub const VERIFY_SCENARIOS: [&str; 4] = ["example1", "example2", "single-quadratic", "rh-identities"];

/// Samples per reference check.
pub const REFERENCE_SAMPLES: usize = 720;
pub const PIXEL_TOLERANCE: usize = 2;
pub const MIN_COVERAGE: f64 = 0.99;
pub const RANDOM_RH_MAPS: usize = 20;

/// `2z - 1/z`.
pub fn cantor_map() -> GeneratorSpec {
    GeneratorSpec::from_real(&[-1.0, 0.0, 2.0], &[0.0, 1.0])
}

/// `(z^2 - 1) / 2z`, Newton's method for `z^2 + 1`.
pub fn newton_map() -> GeneratorSpec {
    GeneratorSpec::from_real(&[-1.0, 0.0, 1.0], &[0.0, 2.0])
}

/// `(2z^2 - 3z) / (z - 1)`, the Cantor map moved by one unit.
pub fn shifted_cantor_map() -> GeneratorSpec {
    GeneratorSpec::from_real(&[0.0, -3.0, 2.0], &[-1.0, 1.0])
}

pub fn quadratic(c: f64) -> GeneratorSpec {
    GeneratorSpec::from_real(&[c, 0.0, 1.0], &[1.0])
}

fn named(name: &str, generators: Vec<GeneratorSpec>, grid_n: usize) -> JobConfig {
    let mut c = JobConfig::new(generators);
    c.scenario = Some(name.to_string());
    c.grid_n = grid_n;
    c
}

/// Configuration of a named semigroup. Besides the verify scenarios this
/// knows the rest of the classification corpus.
pub fn builtin(name: &str) -> Option<JobConfig> {
    Some(match name {
        "example1" => named(name, vec![cantor_map(), newton_map()], 512),
        "example2" => named(name, vec![cantor_map(), shifted_cantor_map()], 512),
        "single-quadratic" => named(name, vec![quadratic(0.0)], 256),
        "rh-identities" => named(name, vec![cantor_map(), newton_map()], 256),
        "chebyshev" => named(name, vec![quadratic(-2.0)], 512),
        "square-and-chebyshev" => named(name, vec![quadratic(0.0), quadratic(-2.0)], 512),
        "basilica" => named(name, vec![quadratic(-1.0)], 512),
        _ => return None,
    })
}

/// Every built-in semigroup used for the component-count classification.
pub const CORPUS: [&str; 6] = [
    "example1",
    "example2",
    "single-quadratic",
    "chebyshev",
    "square-and-chebyshev",
    "basilica",
];

fn two_sided(name: &str, mask: &SphereMask, reference: &[crate::SpherePoint], samples: &[crate::SpherePoint], out: &mut Vec<Check>) {
    let cov = coverage(mask, samples, PIXEL_TOLERANCE);
    out.push(Check::new(
        &format!("{name} covered"),
        cov >= MIN_COVERAGE,
        format!("{:.4} of {} samples within {PIXEL_TOLERANCE} px", cov, samples.len()),
    ));
    let excess = excess_pixels(mask, reference, PIXEL_TOLERANCE);
    out.push(Check::new(
        &format!("{name} contains set"),
        excess == 0,
        format!("{excess} of {} set pixels farther than {PIXEL_TOLERANCE} px", mask.count()),
    ));
}

fn class_check(report: &RunReport, expected: ComponentClass, out: &mut Vec<Check>) {
    out.push(Check::new(
        "class",
        report.class == Some(expected),
        format!(
            "counts {:?} at {:?}, class {}",
            report.counts,
            report.resolutions,
            report.class.map_or("none".to_string(), |c| c.to_string())
        ),
    ));
}

fn simply_connected_check(report: &RunReport, out: &mut Vec<Check>) {
    let holes: Vec<usize> = report.components.iter().map(|c| c.holes).collect();
    out.push(Check::new(
        "simply connected",
        !report.components.is_empty() && report.components.iter().all(|c| c.simply_connected),
        format!("hole counts {holes:?}"),
    ));
}

/// Dense reference sampling for a grid of size `n`.
fn dense(n: usize) -> usize {
    16 * n
}

/// A random map of degree `d` whose zeros and poles are at least `sep` apart.
pub fn random_map(rng: &mut ChaCha8Rng, d: usize, sep: f64) -> RationalMap {
    loop {
        let mut roots: Vec<Complex64> = Vec::new();
        let den_deg = if rng.gen_bool(0.5) { d } else { d - 1 };
        while roots.len() < d + den_deg {
            let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if roots.iter().all(|r| (r - z).norm() >= sep) {
                roots.push(z);
            }
        }
        let product = |rs: &[Complex64]| {
            rs.iter().fold(Polynomial::constant(Complex64::new(1.0, 0.0)), |acc, &r| {
                let f = Polynomial::linear_factor(r);
                let mut c = vec![Complex64::new(0.0, 0.0); acc.coeffs().len() + 1];
                for (i, a) in acc.coeffs().iter().enumerate() {
                    for (j, b) in f.coeffs().iter().enumerate() {
                        c[i + j] += a * b;
                    }
                }
                Polynomial::new(c)
            })
        };
        let lead = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
        let num = product(&roots[..d]).scale(lead);
        let den = product(&roots[d..]);
        if let Ok(f) = RationalMap::new(num, den) {
            return f;
        }
    }
}

/// Runs a verify scenario. The report carries one check per acceptance item.
pub fn verify(name: &str, cfg: &JobConfig) -> Result<RunReport, CliError> {
    let mut checks = Vec::new();
    let mut report = match name {
        "example1" => {
            let run = run_invariant(cfg)?;
            let n = cfg.grid_n;
            let mask = &run.estimate.mask;
            two_sided("extended real line", mask, &sample_real_line(dense(n)), &sample_real_line(REFERENCE_SAMPLES), &mut checks);
            class_check(&run.report, ComponentClass::Two, &mut checks);
            simply_connected_check(&run.report, &mut checks);
            run.report
        }
        "example2" => {
            let julia = run_julia(cfg)?;
            let n = cfg.grid_n;
            two_sided(
                "segment [-1, 2]",
                &julia.mask,
                &sample_segment(-1.0, 2.0, dense(n)),
                &sample_segment(-1.0, 2.0, REFERENCE_SAMPLES),
                &mut checks,
            );
            let run = run_invariant(cfg)?;
            two_sided("extended real line", &run.estimate.mask, &sample_real_line(dense(n)), &sample_real_line(REFERENCE_SAMPLES), &mut checks);
            class_check(&run.report, ComponentClass::Two, &mut checks);
            run.report
        }
        "single-quadratic" => {
            let run = run_invariant(cfg)?;
            let n = cfg.grid_n;
            let mask = &run.estimate.mask;
            let cov = coverage(mask, &sample_circle(0.0, 0.0, 1.0, REFERENCE_SAMPLES), PIXEL_TOLERANCE);
            checks.push(Check::new(
                "unit circle covered",
                cov == 1.0,
                format!("{cov:.4} of {REFERENCE_SAMPLES} samples within {PIXEL_TOLERANCE} px"),
            ));
            let excess = excess_pixels(mask, &sample_circle(0.0, 0.0, 1.0, dense(n)), PIXEL_TOLERANCE);
            checks.push(Check::new(
                "unit circle contains set",
                excess == 0,
                format!("{excess} of {} set pixels farther than {PIXEL_TOLERANCE} px", mask.count()),
            ));
            let counted = run.report.components.len();
            checks.push(Check::new(
                "two components",
                counted == 2,
                format!("{counted} counted components at n={n}"),
            ));
            simply_connected_check(&run.report, &mut checks);
            class_check(&run.report, ComponentClass::Two, &mut checks);
            run.report
        }
        "rh-identities" => {
            let g = cfg.semigroup()?;
            let mut report = RunReport::new(name, cfg.estimator.seed);
            let gens = g.generators();
            let mut maps = vec![
                ("f".to_string(), gens[0].clone()),
                ("g".to_string(), gens[gens.len() - 1].clone()),
                ("f.g".to_string(), gens[0].compose(&gens[gens.len() - 1])?),
                ("g.f".to_string(), gens[gens.len() - 1].compose(&gens[0])?),
            ];
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.estimator.seed);
            for k in 0..RANDOM_RH_MAPS {
                maps.push((format!("random {k}"), random_map(&mut rng, 2 + k % 2, 0.3)));
            }
            for (label, f) in &maps {
                let entry = rh_entries(std::slice::from_ref(f))?[0];
                checks.push(Check::new(
                    label,
                    entry.holds(),
                    format!("degree {} deficiency {} expected {}", entry.degree, entry.deficiency, 2 * (entry.degree - 1)),
                ));
                report.rh.push(entry);
            }
            report
        }
        _ => {
            return Err(CliError::Config(format!(
                "unknown scenario {name:?}; expected one of {}",
                VERIFY_SCENARIOS.join(", ")
            )))
        }
    };
    report.scenario = name.to_string();
    report.checks = checks;
    Ok(report)
}
