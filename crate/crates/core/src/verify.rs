//! Seeded randomized checks of every quantitative bound, reported as signed
//! margins (non-negative means the bound held).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounded::{non_injectivity_witness, phi3, rho3_linear, rho3_steps, uniform_spec, BoundedEmbeddingSpec};
use crate::diagram::{bottleneck_bruteforce, bottleneck_distance, DiagramPoint, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::grid::phi_scale;
use crate::inject::{injective_embed, reconstruct, AnchorSet, DEFAULT_ANGLE_TOLERANCE};
use crate::multiscale::{certified_distance, rho_minus, rho_minus_improved, ScaleSchedule, ScheduleKind};

/// Registered check names, in run order.
pub const CHECKS: [&str; 12] = [
    "oracle-equivalence",
    "lipschitz-phiR",
    "norm-floor",
    "separation",
    "multiplicity",
    "co-support-diameter",
    "phi3-lipschitz",
    "phi3-steps",
    "multiscale-lipschitz",
    "multiscale-distortion",
    "witness-zero",
    "inject-roundtrip",
];

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    /// Smallest `bound slack` seen; `passed` iff `>= -tolerance`.
    pub worst_margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seed: u64,
}

impl CheckReport {
    fn new(name: &str, samples: usize, worst_margin: f64, tolerance: f64, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            samples,
            worst_margin,
            tolerance,
            passed: worst_margin >= -tolerance,
            seed,
        }
    }
}

/// Parameters shared by all checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub arity: usize,
    pub samples: usize,
    pub seed: u64,
    /// Side of the square diagrams are drawn from.
    pub frame: f64,
    pub diag_prob: f64,
    /// Scales used by the single-scale checks.
    pub scales: Vec<f64>,
    /// Absolute slack, scaled by `max(1, R)` where a scale is involved.
    pub tolerance: f64,
    /// Width of the certified multi-scale intervals.
    pub epsilon: f64,
    /// `(m, M, N)` triples for the bounded-domain checks.
    pub bounded: Vec<(f64, f64, usize)>,
    pub schedules: Vec<ScheduleKind>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            arity: 3,
            samples: 1000,
            seed: 42,
            frame: 10.0,
            diag_prob: 0.2,
            scales: vec![0.5, 1.0, 3.0],
            tolerance: 1e-9,
            epsilon: 1e-3,
            bounded: vec![(1.0, 5.0, 4), (1.0, 5.0, 19)],
            schedules: vec![ScheduleKind::Coarse, ScheduleKind::Uniform, ScheduleKind::Combined],
        }
    }
}

impl CheckConfig {
    pub fn validate(&self) -> Result<()> {
        if self.arity == 0 {
            return Err(Error::EmptyDiagram);
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be positive".into()));
        }
        if !(self.frame.is_finite() && self.frame > 0.0) {
            return Err(Error::InvalidConfig(format!("frame must be positive, got {}", self.frame)));
        }
        if !(0.0..=1.0).contains(&self.diag_prob) {
            return Err(Error::InvalidProbability(self.diag_prob));
        }
        if !(self.tolerance >= 0.0) || !(self.epsilon > 0.0) {
            return Err(Error::InvalidTolerance(self.tolerance.min(self.epsilon)));
        }
        if self.scales.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidConfig("scales must be positive".into()));
        }
        Ok(())
    }
}

/// Generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n` i.i.d. points: the diagonal with probability `diag_prob`, otherwise
/// uniform on `{0 <= b < d <= L}`.
pub fn sample_diagram_with<R: Rng + ?Sized>(
    rng: &mut R,
    arity: usize,
    frame: f64,
    diag_prob: f64,
) -> Result<PersistenceDiagram<f64>> {
    if !(0.0..=1.0).contains(&diag_prob) {
        return Err(Error::InvalidProbability(diag_prob));
    }
    if !(frame.is_finite() && frame > 0.0) {
        return Err(Error::InvalidConfig(format!("frame must be positive, got {frame}")));
    }
    let points = (0..arity)
        .map(|_| {
            if rng.gen_bool(diag_prob) {
                return DiagramPoint::Diagonal;
            }
            loop {
                let (u, v) = (rng.gen_range(0.0..=frame), rng.gen_range(0.0..=frame));
                if u != v {
                    return DiagramPoint::OffDiagonal {
                        birth: u.min(v),
                        death: u.max(v),
                    };
                }
            }
        })
        .collect();
    PersistenceDiagram::new(points)
}

pub fn sample_diagram(seed: u64, arity: usize, frame: f64, diag_prob: f64) -> Result<PersistenceDiagram<f64>> {
    sample_diagram_with(&mut sample_rng(seed, 0), arity, frame, diag_prob)
}

/// Runs the named checks (`"all"` expands to every check).
pub fn run_checks(names: &[String], config: &CheckConfig) -> Result<Vec<CheckReport>> {
    config.validate()?;
    let mut selected: Vec<&str> = Vec::new();
    for name in names {
        if name == "all" {
            selected.extend(CHECKS);
        } else if let Some(c) = CHECKS.iter().find(|c| **c == name) {
            selected.push(c);
        } else {
            return Err(Error::UnknownCheck(name.clone()));
        }
    }
    selected.dedup();
    selected.into_iter().map(|name| run_check(name, config)).collect()
}

pub fn run_check(name: &str, c: &CheckConfig) -> Result<CheckReport> {
    match name {
        "oracle-equivalence" => oracle_equivalence(c),
        "lipschitz-phiR" => per_scale(name, c, |x, y, r, n| {
            let d = bottleneck_distance(x, y)?;
            let e = phi_scale(x, r)?.distance(&phi_scale(y, r)?)?;
            Ok(2f64.powi(n as i32) * d - e)
        }),
        "norm-floor" => per_scale(name, c, |x, _, r, _| Ok(phi_scale(x, r)?.norm() - r / 8.0)),
        "separation" => separation(c),
        "multiplicity" => per_scale(name, c, |x, _, r, n| {
            Ok(4f64.powi(n as i32) - phi_scale(x, r)?.len() as f64)
        }),
        "co-support-diameter" => co_support(c),
        "phi3-lipschitz" => bounded_pairs(name, c, |_, dist, emb| Ok(dist - emb)),
        "phi3-steps" => bounded_pairs(name, c, |spec, dist, emb| {
            let t = dist.min(spec.frame());
            Ok((emb - rho3_steps(spec, t)?).min(emb - rho3_linear(spec, t)?))
        }),
        "multiscale-lipschitz" => multiscale(name, c, |s, x, y, d, eps| {
            let iv = certified_distance(x, y, s, eps)?;
            let mut margin = (d + eps - iv.upper).min(eps - iv.width());
            if s.kind == ScheduleKind::Coarse && d > 0.0 {
                let tight = certified_distance(x, y, s, 1e-7 * d)?;
                margin = margin.min((1.0 + 1e-6) - tight.upper / d);
            }
            Ok(margin)
        }),
        "multiscale-distortion" => multiscale(name, c, |s, x, y, d, eps| {
            let iv = certified_distance(x, y, s, eps)?;
            let floor = rho_minus(s, d)?.max(rho_minus_improved(s, d)?);
            Ok((iv.lower + eps - floor).min(eps - iv.width()))
        }),
        "witness-zero" => witness_zero(c),
        "inject-roundtrip" => inject_roundtrip(c),
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

/// Worst margin over `samples` independent draws, evaluated in parallel.
fn worst_over<F>(samples: usize, f: F) -> Result<f64>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    (0..samples as u64)
        .into_par_iter()
        .map(f)
        .try_reduce(|| f64::INFINITY, |a, b| Ok(a.min(b)))
}

fn oracle_equivalence(c: &CheckConfig) -> Result<CheckReport> {
    let n = c.arity.min(crate::diagram::BRUTEFORCE_MAX_ARITY);
    let worst = worst_over(c.samples, |i| {
        let mut rng = sample_rng(c.seed, i);
        let x = sample_diagram_with(&mut rng, n, c.frame, c.diag_prob)?;
        let y = sample_diagram_with(&mut rng, n, c.frame, c.diag_prob)?;
        Ok(0.0 - (bottleneck_distance(&x, &y)? - bottleneck_bruteforce(&x, &y)?).abs())
    })?;
    Ok(CheckReport::new("oracle-equivalence", c.samples, worst, 0.0, c.seed))
}

fn per_scale<F>(name: &str, c: &CheckConfig, f: F) -> Result<CheckReport>
where
    F: Fn(&PersistenceDiagram<f64>, &PersistenceDiagram<f64>, f64, usize) -> Result<f64> + Sync,
{
    let mut worst = f64::INFINITY;
    for (j, &r) in c.scales.iter().enumerate() {
        let scale_tol = c.tolerance * r.max(1.0);
        let m = worst_over(c.samples, |i| {
            let mut rng = sample_rng(c.seed, ((j as u64) << 32) | i);
            let x = sample_diagram_with(&mut rng, c.arity, c.frame, c.diag_prob)?;
            let y = sample_diagram_with(&mut rng, c.arity, c.frame, c.diag_prob)?;
            // Shifted so the report's tolerance stands for `tolerance * max(1, R)`.
            Ok(f(&x, &y, r, c.arity)? + (scale_tol - c.tolerance))
        })?;
        worst = worst.min(m);
    }
    Ok(CheckReport::new(name, c.samples * c.scales.len(), worst, c.tolerance, c.seed))
}

/// A diagram `y` with `d_B(x, y) >= 3R`: every point of `y` has persistence
/// at least `6R` and dies at least `3R` above every coordinate of `x`.
pub fn separated_partner<R: Rng + ?Sized>(
    rng: &mut R,
    x: &PersistenceDiagram<f64>,
    r: f64,
    frame: f64,
) -> Result<PersistenceDiagram<f64>> {
    let top = x.max_coordinate().max(0.0);
    let points = x
        .points()
        .iter()
        .map(|p| {
            let birth = match p.coords() {
                Some((b, _)) => b,
                None => rng.gen_range(0.0..=frame),
            };
            let jitter = rng.gen_range(0.0..=r);
            let death = (top + 3.0 * r).max(birth + 6.0 * r) + 1e-6 * r.max(1.0) + jitter;
            DiagramPoint::new(birth, death)
        })
        .collect::<Result<Vec<_>>>()?;
    PersistenceDiagram::new(points)
}

fn separation(c: &CheckConfig) -> Result<CheckReport> {
    let n = c.arity.min(crate::diagram::BRUTEFORCE_MAX_ARITY);
    let mut worst = f64::INFINITY;
    for (j, &r) in c.scales.iter().enumerate() {
        let scale_tol = c.tolerance * r.max(1.0);
        let m = worst_over(c.samples, |i| {
            let mut rng = sample_rng(c.seed, ((j as u64) << 32) | i);
            let x = sample_diagram_with(&mut rng, n, c.frame, c.diag_prob)?;
            let y = separated_partner(&mut rng, &x, r, c.frame)?;
            if bottleneck_bruteforce(&x, &y)? < 3.0 * r {
                return Ok(f64::NEG_INFINITY);
            }
            let e = phi_scale(&x, r)?.distance(&phi_scale(&y, r)?)?;
            Ok(e - r * 2f64.sqrt() / 8.0 + (scale_tol - c.tolerance))
        })?;
        worst = worst.min(m);
    }
    Ok(CheckReport::new("separation", c.samples * c.scales.len(), worst, c.tolerance, c.seed))
}

fn co_support(c: &CheckConfig) -> Result<CheckReport> {
    let mut worst = f64::INFINITY;
    let mut tested = 0usize;
    for (j, &r) in c.scales.iter().enumerate() {
        let (m, count) = (0..c.samples as u64)
            .into_par_iter()
            .map(|i| -> Result<(f64, usize)> {
                let mut rng = sample_rng(c.seed, ((j as u64) << 32) | i);
                let x = sample_diagram_with(&mut rng, c.arity, c.frame, c.diag_prob)?;
                // Nearby partner: every off-diagonal point moved by < 3R.
                let points = x
                    .points()
                    .iter()
                    .map(|p| match p.coords() {
                        None => Ok(DiagramPoint::Diagonal),
                        Some((b, d)) => {
                            let nb = (b + rng.gen_range(-1.5 * r..1.5 * r)).max(0.0);
                            let nd = (d + rng.gen_range(-1.5 * r..1.5 * r)).max(nb + 1e-3);
                            DiagramPoint::new(nb, nd)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                let y = PersistenceDiagram::new(points)?;
                let (px, py) = (phi_scale(&x, r)?, phi_scale(&y, r)?);
                if !px.entries.keys().any(|k| py.entries.contains_key(k)) {
                    return Ok((f64::INFINITY, 0));
                }
                Ok((3.0 * r - bottleneck_distance(&x, &y)?, 1))
            })
            .try_reduce(|| (f64::INFINITY, 0), |a, b| Ok((a.0.min(b.0), a.1 + b.1)))?;
        worst = worst.min(m);
        tested += count;
    }
    Ok(CheckReport::new("co-support-diameter", tested, worst, c.tolerance, c.seed))
}

fn bounded_pairs<F>(name: &str, c: &CheckConfig, f: F) -> Result<CheckReport>
where
    F: Fn(&BoundedEmbeddingSpec<f64>, f64, f64) -> Result<f64> + Sync,
{
    let mut worst = f64::INFINITY;
    for (j, &(m, big_m, scales)) in c.bounded.iter().enumerate() {
        let spec = uniform_spec(m, big_m, scales, c.arity)?.spec;
        let w = worst_over(c.samples, |i| {
            let mut rng = sample_rng(c.seed, ((j as u64) << 32) | i);
            let x = sample_diagram_with(&mut rng, c.arity, spec.frame(), c.diag_prob)?;
            let y = sample_diagram_with(&mut rng, c.arity, spec.frame(), c.diag_prob)?;
            let dist = bottleneck_distance(&x, &y)?;
            let emb = phi3(&x, &spec)?.distance(&phi3(&y, &spec)?)?;
            f(&spec, dist, emb)
        })?;
        worst = worst.min(w);
    }
    Ok(CheckReport::new(name, c.samples * c.bounded.len(), worst, c.tolerance, c.seed))
}

fn multiscale<F>(name: &str, c: &CheckConfig, f: F) -> Result<CheckReport>
where
    F: Fn(&ScaleSchedule<f64>, &PersistenceDiagram<f64>, &PersistenceDiagram<f64>, f64, f64) -> Result<f64>
        + Sync,
{
    let mut worst = f64::INFINITY;
    for (j, &kind) in c.schedules.iter().enumerate() {
        let s = ScaleSchedule::default_for(kind, c.arity)?;
        let w = worst_over(c.samples, |i| {
            let mut rng = sample_rng(c.seed, ((j as u64) << 32) | i);
            let x = sample_diagram_with(&mut rng, c.arity, c.frame, c.diag_prob)?;
            let y = sample_diagram_with(&mut rng, c.arity, c.frame, c.diag_prob)?;
            let d = bottleneck_distance(&x, &y)?;
            f(&s, &x, &y, d, c.epsilon)
        })?;
        worst = worst.min(w);
    }
    Ok(CheckReport::new(name, c.samples * c.schedules.len(), worst, c.tolerance, c.seed))
}

/// A random bounded spec: frame, increasing scales and unit weights.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, arity: usize) -> Result<BoundedEmbeddingSpec<f64>> {
    let frame = rng.gen_range(2.0..20.0);
    let count = rng.gen_range(1..=6);
    let mut scales: Vec<f64> = (0..count).map(|_| rng.gen_range(0.05 * frame..=frame)).collect();
    scales.sort_by(|a, b| a.partial_cmp(b).unwrap());
    scales.dedup();
    let raw: Vec<f64> = scales.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
    let norm = raw.iter().map(|w| w * w).sum::<f64>().sqrt();
    let weights = raw.iter().map(|w| w / norm).collect();
    BoundedEmbeddingSpec::new(frame, scales, weights, arity)
}

fn witness_zero(c: &CheckConfig) -> Result<CheckReport> {
    let worst = worst_over(c.samples, |i| {
        let mut rng = sample_rng(c.seed, i);
        let spec = random_spec(&mut rng, c.arity)?;
        let w = non_injectivity_witness(&spec)?;
        let (a, b) = (phi3(&w.first, &spec)?, phi3(&w.second, &spec)?);
        if a != b || w.first == w.second {
            return Ok(f64::NEG_INFINITY);
        }
        let eps = spec.scales()[0] / 10.0;
        Ok(bottleneck_distance(&w.first, &w.second)? - eps / 2.0)
    })?;
    Ok(CheckReport::new("witness-zero", c.samples, worst, 0.0, c.seed))
}

/// Sup-norm distance of the best point-to-point matching; diagonal entries
/// may only match each other.
pub fn multiset_gap(x: &PersistenceDiagram<f64>, y: &PersistenceDiagram<f64>) -> f64 {
    use itertools::Itertools;
    if x.arity() != y.arity() {
        return f64::INFINITY;
    }
    let (xs, ys) = (x.points(), y.points());
    (0..ys.len())
        .permutations(ys.len())
        .map(|perm| {
            xs.iter()
                .zip(perm)
                .map(|(p, j)| match (p.coords(), ys[j].coords()) {
                    (None, None) => 0.0,
                    (Some((b1, d1)), Some((b2, d2))) => (b1 - b2).abs().max((d1 - d2).abs()),
                    _ => f64::INFINITY,
                })
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

fn inject_roundtrip(c: &CheckConfig) -> Result<CheckReport> {
    let n = c.arity.min(crate::diagram::BRUTEFORCE_MAX_ARITY);
    let anchors = AnchorSet::default_for(n, c.frame)?;
    let worst = worst_over(c.samples, |i| {
        let mut rng = sample_rng(c.seed, i);
        let x = sample_diagram_with(&mut rng, n, c.frame, c.diag_prob)?;
        let v = injective_embed(&x, &anchors, c.frame)?;
        match reconstruct(&v, &anchors, n, c.frame, DEFAULT_ANGLE_TOLERANCE) {
            Ok(back) => Ok(1e-6 - multiset_gap(&x, &back)),
            Err(_) => Ok(f64::NEG_INFINITY),
        }
    })?;
    Ok(CheckReport::new("inject-roundtrip", c.samples, worst, 0.0, c.seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_contract() {
        let all_diag = sample_diagram(1, 4, 10.0, 1.0).unwrap();
        assert_eq!(all_diag, PersistenceDiagram::diagonal(4).unwrap());
        assert_eq!(sample_diagram(7, 3, 10.0, 0.3).unwrap(), sample_diagram(7, 3, 10.0, 0.3).unwrap());
        let mut rng = sample_rng(3, 0);
        for _ in 0..10_000 {
            let x = sample_diagram_with(&mut rng, 2, 10.0, 0.0).unwrap();
            for (b, d) in x.off_diagonal() {
                assert!(d > b && b >= 0.0 && d <= 10.0);
            }
        }
        assert!(matches!(sample_diagram(1, 2, 10.0, 1.5), Err(Error::InvalidProbability(_))));
    }

    #[test]
    fn unknown_check_rejected() {
        let c = CheckConfig::default();
        assert!(matches!(
            run_checks(&["nope".to_string()], &c),
            Err(Error::UnknownCheck(_))
        ));
    }

    #[test]
    fn small_suite_passes() {
        let c = CheckConfig {
            arity: 2,
            samples: 40,
            bounded: vec![(1.0, 5.0, 4)],
            ..CheckConfig::default()
        };
        let reports = run_checks(&["all".to_string()], &c).unwrap();
        assert_eq!(reports.len(), CHECKS.len());
        for r in reports {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn separated_partner_is_far() {
        let mut rng = sample_rng(11, 0);
        for _ in 0..200 {
            let x = sample_diagram_with(&mut rng, 3, 10.0, 0.3).unwrap();
            let y = separated_partner(&mut rng, &x, 1.0, 10.0).unwrap();
            assert!(bottleneck_bruteforce(&x, &y).unwrap() >= 3.0);
        }
    }

    #[test]
    fn multiset_gap_ignores_order() {
        let x = PersistenceDiagram::from_pairs(&[(1.0, 2.0), (3.0, 5.0)], 3).unwrap();
        let y = PersistenceDiagram::from_pairs(&[(3.0, 5.0), (1.0, 2.0 + 1e-9)], 3).unwrap();
        assert!(multiset_gap(&x, &y) < 2e-9);
        let z = PersistenceDiagram::from_pairs(&[(3.0, 5.0)], 3).unwrap();
        assert_eq!(multiset_gap(&x, &z), f64::INFINITY);
    }
}
