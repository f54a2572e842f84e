//! Monte Carlo checks of the hash families and the sketch estimators against
//! exact oracles. Every suite is seeded and produces identical numbers for
//! identical settings regardless of the worker count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsketch_core::kde::{exact_abs_root_kde, mom_error_bound};
use rsketch_core::lsh::{derive_seed, SampledHash};
use rsketch_core::sketch::median_of_means;
use rsketch_core::{
    exact_weighted_kde, KernelConfig, LshEnsembleSpec, LshFamily, LshFamilyConfig, RepresenterSketch, WeightedPoint,
};

use crate::error::Result;
use crate::parallel;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub seed: u64,
    pub threads: usize,
    pub quick: bool,
}

impl Settings {
    fn scaled(&self, full: usize, quick: usize) -> usize {
        if self.quick {
            quick
        } else {
            full
        }
    }
}

pub const SUITES: [&str; 4] = ["calibration", "unbiasedness", "variance", "mom-coverage"];

pub fn run(suite: &str, s: &Settings) -> Result<Vec<Check>> {
    match suite {
        "calibration" => calibration(s),
        "unbiasedness" => unbiasedness(s),
        "variance" => variance(s),
        "mom-coverage" => mom_coverage(s),
        other => Err(crate::error::Error::input(format!(
            "unknown suite {other:?}; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

/// Draws are split into this many seeded batches, independent of the worker count.
const CALIBRATION_BATCHES: u64 = 16;

/// Empirical collision frequency of one family at one separation.
#[derive(Debug, Clone, Copy)]
pub struct Calibration {
    /// Distance for distance-based families, angle for the sign family.
    pub separation: f64,
    pub empirical: f64,
    pub analytic: f64,
}

/// Two points at the requested separation in `dim` dimensions. For distances the
/// offset is spread evenly over all coordinates with random signs, so sums of
/// sparse `+-1` projections of it are close to Gaussian.
fn point_pair(family: LshFamily, dim: usize, separation: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    match family {
        LshFamily::SignProjection => {
            let mut x = vec![0.0; dim];
            let mut y = vec![0.0; dim];
            x[0] = 1.0;
            y[0] = separation.cos();
            y[1] = separation.sin();
            (x, y)
        }
        _ => {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let step = separation / (dim as f64).sqrt();
            let y = x
                .iter()
                .map(|v| if rng.random_bool(0.5) { v + step } else { v - step })
                .collect();
            (x, y)
        }
    }
}

/// Collision frequencies over `draws` independent hash functions at each separation.
pub fn calibrate(
    cfg: LshFamilyConfig,
    separations: &[f64],
    draws: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<Calibration>> {
    let kernel = KernelConfig::new(cfg, 1);
    let mut out = Vec::with_capacity(separations.len());
    for (i, &sep) in separations.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64, u64::MAX));
        let (x, y) = point_pair(cfg.family, cfg.input_dim, sep, &mut rng);
        let batches: Vec<u64> = (0..CALIBRATION_BATCHES).collect();
        let per_batch = draws.div_ceil(batches.len());
        let hits: Vec<Result<usize>> = parallel::map(&batches, threads, |&b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64, b));
            let mut hits = 0;
            for _ in 0..per_batch {
                let h = SampledHash::sample(&cfg, &mut rng)?;
                hits += usize::from(h.hash(&x)? == h.hash(&y)?);
            }
            Ok(hits)
        });
        let total: usize = hits.into_iter().sum::<Result<usize>>()?;
        let analytic = match cfg.family {
            LshFamily::SignProjection => 1.0 - sep / PI,
            _ => kernel.base_kernel(sep),
        };
        out.push(Calibration {
            separation: sep,
            empirical: total as f64 / (per_batch * batches.len()) as f64,
            analytic,
        });
    }
    Ok(out)
}

pub fn calibration(s: &Settings) -> Result<Vec<Check>> {
    let draws = s.scaled(100_000, 20_000);
    let tol = if s.quick { 0.02 } else { 0.01 };
    let r = 2.0;
    let distances: Vec<f64> = [0.1, 0.5, 1.0, 2.0, 5.0].iter().map(|m| m * r).collect();
    let angles = [PI / 8.0, PI / 4.0, PI / 2.0, 2.0 * PI / 3.0, 7.0 * PI / 8.0];
    let cases = [
        ("l2", LshFamilyConfig::l2(8, r), &distances[..]),
        ("sparse", LshFamilyConfig::sparse(128, r), &distances[..]),
        ("sign", LshFamilyConfig::sign(8), &angles[..]),
    ];
    let mut checks = Vec::new();
    for (i, (name, cfg, seps)) in cases.into_iter().enumerate() {
        let results = calibrate(cfg, seps, draws, derive_seed(s.seed, 1, i as u64), s.threads)?;
        let worst = results.iter().map(|c| (c.empirical - c.analytic).abs()).fold(0.0, f64::max);
        let detail = results
            .iter()
            .map(|c| format!("{:.3}:{:.4}/{:.4}", c.separation, c.empirical, c.analytic))
            .collect::<Vec<_>>()
            .join(" ");
        checks.push(Check {
            suite: "calibration",
            name: format!("{name} collision frequency"),
            passed: worst <= tol,
            detail: format!("max |empirical - analytic| = {worst:.4} (tol {tol}); {detail}"),
        });
    }
    Ok(checks)
}

/// The fixed weighted point set and queries shared by the estimator suites:
/// 50 points in `[-1, 1]^5` with weights in `[0, 2]`, and five queries (three
/// near data points, two uniform).
pub fn fixture(seed: u64) -> (Vec<WeightedPoint>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<WeightedPoint> = (0..50)
        .map(|_| {
            let x = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
            WeightedPoint::new(x, rng.random_range(0.0..2.0))
        })
        .collect();
    let mut queries = Vec::with_capacity(5);
    for j in 0..3 {
        queries.push(points[j * 7].x.iter().map(|v| v + rng.random_range(-0.2..0.2)).collect());
    }
    for _ in 0..2 {
        queries.push((0..5).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    (points, queries)
}

pub fn fixture_family() -> LshFamilyConfig {
    LshFamilyConfig::l2(5, 2.0)
}

/// Moments of the single-row estimate `S[h(q)]` for one query.
#[derive(Debug, Clone, Copy)]
pub struct RowMoments {
    pub exact: f64,
    pub mean: f64,
    pub std_error: f64,
    pub variance: f64,
    /// Standard deviation of the sample variance, `sqrt((m4 - s^4) / n)`.
    pub variance_sd: f64,
    /// `(sum |alpha| sqrt(K))^2`.
    pub variance_bound: f64,
}

/// Builds `trials` independent one-row sketches (seeds `seed + t`) and
/// collects the cell each query lands in.
pub fn single_row_moments(
    points: &[WeightedPoint],
    queries: &[Vec<f64>],
    family: LshFamilyConfig,
    range: usize,
    trials: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<RowMoments>> {
    let seeds: Vec<u64> = (0..trials as u64).map(|t| seed.wrapping_add(t)).collect();
    let per_trial: Vec<Result<Vec<f64>>> = parallel::map(&seeds, threads, |&master_seed| {
        let spec = LshEnsembleSpec {
            family,
            rows: 1,
            concat: 1,
            range,
            master_seed,
        };
        let sketch = RepresenterSketch::build(points, spec)?;
        queries
            .iter()
            .map(|q| Ok(sketch.row_values(q)?[0]))
            .collect::<Result<Vec<f64>>>()
    });
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;
    let kernel = KernelConfig::new(family, 1);
    let n = trials as f64;
    let mut out = Vec::with_capacity(queries.len());
    for (j, q) in queries.iter().enumerate() {
        let xs: Vec<f64> = per_trial.iter().map(|t| t[j]).collect();
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        let variance = m2 * n / (n - 1.0);
        out.push(RowMoments {
            exact: exact_weighted_kde(q, points, &kernel)?,
            mean,
            std_error: (variance / n).sqrt(),
            variance,
            variance_sd: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
            variance_bound: exact_abs_root_kde(q, points, &kernel)?.powi(2),
        });
    }
    Ok(out)
}

fn row_moments(s: &Settings) -> Result<Vec<RowMoments>> {
    let (points, queries) = fixture(s.seed);
    single_row_moments(
        &points,
        &queries,
        fixture_family(),
        65_536,
        s.scaled(10_000, 2_000),
        derive_seed(s.seed, 2, 0),
        s.threads,
    )
}

pub fn unbiasedness(s: &Settings) -> Result<Vec<Check>> {
    Ok(row_moments(s)?
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let z = (m.mean - m.exact) / m.std_error;
            Check {
                suite: "unbiasedness",
                name: format!("query {j}"),
                passed: z.abs() <= 3.0,
                detail: format!("mean {:.5} exact {:.5} se {:.5} (z = {z:.2})", m.mean, m.exact, m.std_error),
            }
        })
        .collect())
}

pub fn variance(s: &Settings) -> Result<Vec<Check>> {
    Ok(row_moments(s)?
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let limit = m.variance_bound + 3.0 * m.variance_sd;
            Check {
                suite: "variance",
                name: format!("query {j}"),
                passed: m.variance <= limit,
                detail: format!(
                    "variance {:.4} bound {:.4} + slack {:.4}",
                    m.variance,
                    m.variance_bound,
                    3.0 * m.variance_sd
                ),
            }
        })
        .collect())
}

/// Fraction of trials in which the median-of-means estimate is within the
/// concentration bound, per query.
#[derive(Debug, Clone, Copy)]
pub struct Coverage {
    pub covered: usize,
    pub trials: usize,
    pub bound: f64,
    pub worst_error: f64,
}

impl Coverage {
    pub fn rate(&self) -> f64 {
        self.covered as f64 / self.trials as f64
    }
}

/// Builds `trials` independent `rows x range` sketches and checks
/// `|Z(q) - f(q)| <= 6 f~(q) sqrt(ln(1/delta) / L)` with `Z` the median of
/// `groups` contiguous group means.
#[allow(clippy::too_many_arguments)]
pub fn mom_coverage_experiment(
    points: &[WeightedPoint],
    queries: &[Vec<f64>],
    family: LshFamilyConfig,
    rows: usize,
    range: usize,
    groups: usize,
    delta: f64,
    trials: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<Coverage>> {
    let kernel = KernelConfig::new(family, 1);
    let exact: Vec<f64> = queries
        .iter()
        .map(|q| exact_weighted_kde(q, points, &kernel))
        .collect::<rsketch_core::Result<_>>()?;
    let bounds: Vec<f64> = queries
        .iter()
        .map(|q| Ok(mom_error_bound(exact_abs_root_kde(q, points, &kernel)?, rows, delta)))
        .collect::<rsketch_core::Result<_>>()?;
    let seeds: Vec<u64> = (0..trials as u64).map(|t| derive_seed(seed, t, 0)).collect();
    let errors: Vec<Result<Vec<f64>>> = parallel::map(&seeds, threads, |&master_seed| {
        let spec = LshEnsembleSpec {
            family,
            rows,
            concat: 1,
            range,
            master_seed,
        };
        let sketch = RepresenterSketch::build(points, spec)?;
        queries
            .iter()
            .zip(&exact)
            .map(|(q, f)| Ok((median_of_means(&sketch.row_values(q)?, groups)? - f).abs()))
            .collect()
    });
    let errors = errors.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..queries.len())
        .map(|j| Coverage {
            covered: errors.iter().filter(|e| e[j] <= bounds[j]).count(),
            trials,
            bound: bounds[j],
            worst_error: errors.iter().map(|e| e[j]).fold(0.0, f64::max),
        })
        .collect())
}

pub fn mom_coverage(s: &Settings) -> Result<Vec<Check>> {
    let (points, queries) = fixture(s.seed);
    let trials = s.scaled(1000, 100);
    let rows = s.scaled(1000, 240);
    let coverage = mom_coverage_experiment(
        &points,
        &queries,
        fixture_family(),
        rows,
        256,
        24,
        0.05,
        trials,
        derive_seed(s.seed, 3, 0),
        s.threads,
    )?;
    Ok(coverage
        .iter()
        .enumerate()
        .map(|(j, c)| Check {
            suite: "mom-coverage",
            name: format!("query {j}"),
            passed: c.rate() >= 0.95,
            detail: format!(
                "{}/{} within {:.4} (worst error {:.4})",
                c.covered, c.trials, c.bound, c.worst_error
            ),
        })
        .collect())
}
