//! Multi-scale assembly of `φ_R` into Hilbert-space embeddings.
//!
//! Scale families are closed-form power laws `w_k = k^-α`,
//! `R_k = β k^{±γ}`. A coarse family (increasing scales) gives `Φ₁`, a
//! uniform family (scales decreasing to zero) gives `Φ₂`, and the combined
//! kind mixes the two as `(Φ₁, Φ₂)/√2`. Each family carries a normalization
//! `c` that makes its map 1-Lipschitz; with the default `c = 1/Σ w_k²` the
//! default families reproduce the `6/π²` normalization.
//!
//! Images are infinite-dimensional, so scale blocks are produced on demand
//! and distances are returned as certified intervals.

use crate::diagram::{bottleneck_distance, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::grid::{phi_scale, SparseEmbedding};
use crate::scalar::Scalar;
use crate::series::{power_tail, zeta};

/// Maximum number of explicitly evaluated scales per certified distance.
pub const MAX_CERTIFIED_SCALES: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Coarse,
    Uniform,
    Combined,
}

impl ScheduleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScheduleKind::Coarse => "coarse",
            ScheduleKind::Uniform => "uniform",
            ScheduleKind::Combined => "combined",
        }
    }
}

impl std::str::FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coarse" => Ok(ScheduleKind::Coarse),
            "uniform" => Ok(ScheduleKind::Uniform),
            "combined" => Ok(ScheduleKind::Combined),
            other => Err(Error::InvalidSchedule(format!("unknown schedule kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `R_k = β k^γ`, growing without bound.
    Increasing,
    /// `R_k = β k^-γ`, shrinking to zero.
    Decreasing,
}

/// Weights `w_k = k^-α` and scales `R_k = β k^{±γ}` for `k = 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFamily<T> {
    pub direction: Direction,
    pub weight_exponent: T,
    pub scale_base: T,
    pub scale_exponent: T,
    pub normalization: T,
}

impl<T: Scalar> ScaleFamily<T> {
    /// Validates the family and sets `c = 1/Σ w_k²`.
    pub fn new(direction: Direction, weight_exponent: T, scale_base: T, scale_exponent: T) -> Result<Self> {
        let finite = [weight_exponent, scale_base, scale_exponent]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidSchedule("non-finite parameter".into()));
        }
        if weight_exponent <= T::lit(0.5) {
            return Err(Error::InvalidSchedule(format!(
                "weights k^-{weight_exponent} are not square-summable"
            )));
        }
        if scale_base <= T::zero() || scale_exponent <= T::zero() {
            return Err(Error::InvalidSchedule("scales must be strictly monotone and positive".into()));
        }
        if direction == Direction::Increasing && scale_exponent <= weight_exponent {
            return Err(Error::InvalidSchedule(
                "coarse family needs w_k R_k -> infinity (scale exponent > weight exponent)".into(),
            ));
        }
        let mut family = Self {
            direction,
            weight_exponent,
            scale_base,
            scale_exponent,
            normalization: T::one(),
        };
        family.normalization = T::one() / family.weight_square_sum();
        Ok(family)
    }

    /// Overrides the normalization; it must keep the map 1-Lipschitz.
    pub fn with_normalization(mut self, c: T) -> Result<Self> {
        if !(c > T::zero() && c * self.weight_square_sum().sqrt() <= T::one() + T::epsilon()) {
            return Err(Error::InvalidSchedule(format!(
                "normalization {c} makes the map more than 1-Lipschitz"
            )));
        }
        self.normalization = c;
        Ok(self)
    }

    /// `w_k = 1/k`, `R_k = k²`.
    pub fn coarse_default() -> Self {
        Self::new(Direction::Increasing, T::one(), T::one(), T::lit(2.0)).expect("valid default")
    }

    /// `w_k = R_k = 1/k`.
    pub fn uniform_default() -> Self {
        Self::new(Direction::Decreasing, T::one(), T::one(), T::one()).expect("valid default")
    }

    pub fn weight(&self, k: usize) -> T {
        T::from_count(k).powf(-self.weight_exponent)
    }

    pub fn scale(&self, k: usize) -> T {
        let e = match self.direction {
            Direction::Increasing => self.scale_exponent,
            Direction::Decreasing => -self.scale_exponent,
        };
        self.scale_base * T::from_count(k).powf(e)
    }

    pub fn weight_square_sum(&self) -> T {
        zeta(T::lit(2.0) * self.weight_exponent)
    }

    /// Bracket of `Σ_{k > start} w_k²`.
    pub fn weight_square_tail(&self, start: usize) -> (T, T) {
        power_tail(T::lit(2.0) * self.weight_exponent, start as u64)
    }

    /// Bracket of `Σ_{k > start} (w_k R_k)²`; only finite for decreasing scales.
    fn weighted_scale_square_tail(&self, start: usize) -> Option<(T, T)> {
        match self.direction {
            Direction::Increasing => None,
            Direction::Decreasing => {
                let s = T::lit(2.0) * (self.weight_exponent + self.scale_exponent);
                let (lo, hi) = power_tail(s, start as u64);
                let b2 = self.scale_base * self.scale_base;
                Some((lo * b2, hi * b2))
            }
        }
    }

    /// Index of the step containing `t`, if any: the largest `i` with
    /// `R_i <= t` for increasing scales, the smallest for decreasing ones.
    fn step_index(&self, t: T) -> Option<usize> {
        if !(t > T::zero()) {
            return None;
        }
        match self.direction {
            Direction::Increasing => {
                if t < self.scale(1) {
                    return None;
                }
                let guess = (t / self.scale_base).powf(T::one() / self.scale_exponent).floor();
                let mut i = guess.to_usize().unwrap_or(1).max(1);
                while self.scale(i + 1) <= t {
                    i += 1;
                }
                while i > 1 && self.scale(i) > t {
                    i -= 1;
                }
                Some(i)
            }
            Direction::Decreasing => {
                let guess = (self.scale_base / t).powf(T::one() / self.scale_exponent).ceil();
                let mut i = guess.to_usize().unwrap_or(1).max(1);
                while i > 1 && self.scale(i - 1) <= t {
                    i -= 1;
                }
                while self.scale(i) > t {
                    i += 1;
                }
                Some(i)
            }
        }
    }

    fn step_height(&self, i: usize, arity: usize) -> T {
        self.normalization * step_constant::<T>(arity) * self.weight(i) * self.scale(i)
    }

    fn rho(&self, t: T, arity: usize) -> T {
        self.step_index(t)
            .map(|i| self.step_height(i, arity))
            .unwrap_or_else(T::zero)
    }

    fn rho_improved(&self, t: T, arity: usize) -> T {
        let Some(i) = self.step_index(t) else {
            return T::zero();
        };
        match self.direction {
            Direction::Increasing => (1..=i)
                .map(|j| self.step_height(j, arity).powi(2))
                .sum::<T>()
                .sqrt(),
            Direction::Decreasing => {
                // Σ_{j >= i} (w_j R_j)² = β² Σ_{j >= i} j^{-2(α+γ)}; lower end
                // of the bracket keeps the bound certified.
                let (tail_lo, _) = self
                    .weighted_scale_square_tail(i - 1)
                    .expect("decreasing family has a finite tail");
                self.normalization * step_constant::<T>(arity) * tail_lo.sqrt()
            }
        }
    }
}

/// `2^{-n-2.5} / 3`, the per-step constant of the lower distortion.
pub fn step_constant<T: Scalar>(arity: usize) -> T {
    T::lit(2.0).powf(-(T::from_count(arity) + T::lit(2.5))) / T::lit(3.0)
}

/// A multi-scale embedding recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSchedule<T> {
    pub kind: ScheduleKind,
    pub arity: usize,
    pub coarse: Option<ScaleFamily<T>>,
    pub uniform: Option<ScaleFamily<T>>,
    /// Base point subtracted by `Φ₁`.
    pub basepoint: PersistenceDiagram<T>,
}

impl<T: Scalar> ScaleSchedule<T> {
    pub fn new(
        kind: ScheduleKind,
        arity: usize,
        coarse: Option<ScaleFamily<T>>,
        uniform: Option<ScaleFamily<T>>,
        basepoint: Option<PersistenceDiagram<T>>,
    ) -> Result<Self> {
        let need_coarse = matches!(kind, ScheduleKind::Coarse | ScheduleKind::Combined);
        let need_uniform = matches!(kind, ScheduleKind::Uniform | ScheduleKind::Combined);
        if need_coarse != coarse.is_some() || need_uniform != uniform.is_some() {
            return Err(Error::InvalidSchedule(format!(
                "{} schedule needs exactly its own families",
                kind.as_str()
            )));
        }
        if coarse.is_some_and(|f| f.direction != Direction::Increasing) {
            return Err(Error::InvalidSchedule("coarse family must have increasing scales".into()));
        }
        if uniform.is_some_and(|f| f.direction != Direction::Decreasing) {
            return Err(Error::InvalidSchedule("uniform family must have decreasing scales".into()));
        }
        let basepoint = match basepoint {
            Some(b) => b,
            None => PersistenceDiagram::diagonal(arity)?,
        };
        if basepoint.arity() != arity {
            return Err(Error::ArityMismatch {
                left: arity,
                right: basepoint.arity(),
            });
        }
        Ok(Self {
            kind,
            arity,
            coarse,
            uniform,
            basepoint,
        })
    }

    pub fn coarse_default(arity: usize) -> Result<Self> {
        Self::new(ScheduleKind::Coarse, arity, Some(ScaleFamily::coarse_default()), None, None)
    }

    pub fn uniform_default(arity: usize) -> Result<Self> {
        Self::new(ScheduleKind::Uniform, arity, None, Some(ScaleFamily::uniform_default()), None)
    }

    pub fn combined_default(arity: usize) -> Result<Self> {
        Self::new(
            ScheduleKind::Combined,
            arity,
            Some(ScaleFamily::coarse_default()),
            Some(ScaleFamily::uniform_default()),
            None,
        )
    }

    pub fn default_for(kind: ScheduleKind, arity: usize) -> Result<Self> {
        match kind {
            ScheduleKind::Coarse => Self::coarse_default(arity),
            ScheduleKind::Uniform => Self::uniform_default(arity),
            ScheduleKind::Combined => Self::combined_default(arity),
        }
    }

    fn check_arity(&self, x: &PersistenceDiagram<T>) -> Result<()> {
        if x.arity() != self.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: x.arity(),
            });
        }
        Ok(())
    }
}

fn two_pow_neg<T: Scalar>(n: usize) -> T {
    T::lit(2.0).powi(-(n as i32))
}

/// Scale blocks `k = 1..=K` of `Φ₁(x)`: `w_k 2^-n (φ_{R_k}(x) - φ_{R_k}(x₀))`.
///
/// Blocks are unnormalized; multiply by the family's `normalization` for
/// the 1-Lipschitz map.
pub fn embed_phi1_truncated<T: Scalar>(
    x: &PersistenceDiagram<T>,
    s: &ScaleSchedule<T>,
    scales: usize,
) -> Result<Vec<SparseEmbedding<T>>> {
    if s.kind != ScheduleKind::Coarse {
        return Err(Error::WrongScheduleKind {
            expected: "coarse",
            found: s.kind.as_str(),
        });
    }
    s.check_arity(x)?;
    let family = s.coarse.as_ref().expect("validated coarse schedule");
    (1..=scales)
        .map(|k| {
            let r = family.scale(k);
            let diff = phi_scale(x, r)?.difference(&phi_scale(&s.basepoint, r)?)?;
            Ok(diff.scaled(family.weight(k) * two_pow_neg(s.arity)))
        })
        .collect()
}

/// Scale blocks `k = 1..=K` of `Φ₂(x)`: `w_k 2^-n φ_{R_k}(x)`, unnormalized.
pub fn embed_phi2_truncated<T: Scalar>(
    x: &PersistenceDiagram<T>,
    s: &ScaleSchedule<T>,
    scales: usize,
) -> Result<Vec<SparseEmbedding<T>>> {
    if s.kind != ScheduleKind::Uniform {
        return Err(Error::WrongScheduleKind {
            expected: "uniform",
            found: s.kind.as_str(),
        });
    }
    s.check_arity(x)?;
    let family = s.uniform.as_ref().expect("validated uniform schedule");
    (1..=scales)
        .map(|k| Ok(phi_scale(x, family.scale(k))?.scaled(family.weight(k) * two_pow_neg(s.arity))))
        .collect()
}

/// Enclosure of an embedded distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifiedInterval<T> {
    pub lower: T,
    pub upper: T,
    /// Number of scale blocks evaluated explicitly.
    pub scales_evaluated: usize,
}

impl<T: Scalar> CertifiedInterval<T> {
    pub fn width(&self) -> T {
        self.upper - self.lower
    }
}

/// Running bracket `[head + tail_lo, head + tail_hi]` of one family's
/// normalized squared distance.
struct FamilyAccumulator<'a, T> {
    family: &'a ScaleFamily<T>,
    x: &'a PersistenceDiagram<T>,
    y: &'a PersistenceDiagram<T>,
    arity: usize,
    bottleneck: T,
    /// Signed gap `d_B(y, Δ) - d_B(x, Δ)`, the saturated block difference.
    diagonal_gap: T,
    /// First scale index from which every block is saturated (increasing only).
    saturated_from: usize,
    evaluated: usize,
    head: T,
}

impl<'a, T: Scalar> FamilyAccumulator<'a, T> {
    fn new(
        family: &'a ScaleFamily<T>,
        x: &'a PersistenceDiagram<T>,
        y: &'a PersistenceDiagram<T>,
        arity: usize,
        bottleneck: T,
    ) -> Result<Self> {
        let mut acc = Self {
            family,
            x,
            y,
            arity,
            bottleneck,
            diagonal_gap: y.to_diagonal() - x.to_diagonal(),
            saturated_from: 1,
            evaluated: 0,
            head: T::zero(),
        };
        if family.direction == Direction::Increasing {
            // Once every coordinate sits below 2.4 R_k, no grid point's ball
            // reaches the diagrams and φ_{R_k} is the single all-diagonal
            // coordinate 3R_k/2 - d_B(·, Δ).
            let reach = x.max_coordinate().max(y.max_coordinate());
            let mut k = 1;
            while family.scale(k) * T::lit(2.4) < reach {
                k += 1;
            }
            acc.saturated_from = k;
            while acc.evaluated + 1 < acc.saturated_from {
                acc.advance()?;
            }
        }
        Ok(acc)
    }

    fn advance(&mut self) -> Result<()> {
        if self.evaluated >= MAX_CERTIFIED_SCALES {
            return Err(Error::TailNotReached(self.evaluated));
        }
        let k = self.evaluated + 1;
        let r = self.family.scale(k);
        let d = phi_scale(self.x, r)?.distance_squared(&phi_scale(self.y, r)?)?;
        let w = self.family.normalization * self.family.weight(k) * two_pow_neg(self.arity);
        self.head = self.head + w * w * d;
        self.evaluated = k;
        Ok(())
    }

    fn bracket(&self) -> (T, T) {
        let c2 = self.family.normalization * self.family.normalization;
        let (wl, wh) = self.family.weight_square_tail(self.evaluated);
        match self.family.direction {
            Direction::Increasing => {
                debug_assert!(self.evaluated + 1 >= self.saturated_from);
                let g = self.diagonal_gap * two_pow_neg(self.arity);
                let g2 = c2 * g * g;
                (self.head + g2 * wl, self.head + g2 * wh)
            }
            Direction::Decreasing => {
                let by_distance = c2 * self.bottleneck * self.bottleneck * wh;
                let (_, rh) = self
                    .family
                    .weighted_scale_square_tail(self.evaluated)
                    .expect("decreasing family");
                let by_scale = T::lit(9.0) * c2 * rh;
                (self.head, self.head + by_distance.min(by_scale))
            }
        }
    }
}

/// Certified enclosure of `‖Φ(x) - Φ(y)‖` for the schedule's normalized map,
/// with width at most `eps`.
pub fn certified_distance<T: Scalar>(
    x: &PersistenceDiagram<T>,
    y: &PersistenceDiagram<T>,
    s: &ScaleSchedule<T>,
    eps: T,
) -> Result<CertifiedInterval<T>> {
    if !(eps.is_finite() && eps > T::zero()) {
        return Err(Error::InvalidTolerance(eps.as_f64()));
    }
    s.check_arity(x)?;
    s.check_arity(y)?;
    let bottleneck = bottleneck_distance(x, y)?;

    let mut parts = Vec::with_capacity(2);
    if let Some(f) = s.coarse.as_ref() {
        parts.push(FamilyAccumulator::new(f, x, y, s.arity, bottleneck)?);
    }
    if let Some(f) = s.uniform.as_ref() {
        parts.push(FamilyAccumulator::new(f, x, y, s.arity, bottleneck)?);
    }
    let mix = if parts.len() == 2 { T::lit(0.5) } else { T::one() };

    loop {
        let brackets: Vec<(T, T)> = parts.iter().map(FamilyAccumulator::bracket).collect();
        let lo_sq: T = brackets.iter().map(|b| b.0).sum::<T>() * mix;
        let hi_sq: T = brackets.iter().map(|b| b.1).sum::<T>() * mix;
        let (lower, upper) = (lo_sq.max(T::zero()).sqrt(), hi_sq.max(T::zero()).sqrt());
        if upper - lower <= eps {
            return Ok(CertifiedInterval {
                lower,
                upper,
                scales_evaluated: parts.iter().map(|p| p.evaluated).sum(),
            });
        }
        // Refine the family contributing the widest tail.
        let widest = brackets
            .iter()
            .enumerate()
            .max_by(|a, b| (a.1 .1 - a.1 .0).partial_cmp(&(b.1 .1 - b.1 .0)).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        parts[widest].advance()?;
    }
}

/// Lower distortion step function of the schedule's normalized map.
pub fn rho_minus<T: Scalar>(s: &ScaleSchedule<T>, t: T) -> Result<T> {
    distortion(s, t, ScaleFamily::rho)
}

/// Cumulative variant that also counts every finer (coarse) or coarser
/// (uniform) scale separating the pair.
pub fn rho_minus_improved<T: Scalar>(s: &ScaleSchedule<T>, t: T) -> Result<T> {
    distortion(s, t, ScaleFamily::rho_improved)
}

fn distortion<T: Scalar>(s: &ScaleSchedule<T>, t: T, f: fn(&ScaleFamily<T>, T, usize) -> T) -> Result<T> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::NegativeArgument(t.as_f64()));
    }
    let coarse = s.coarse.as_ref().map(|c| f(c, t, s.arity));
    let uniform = s.uniform.as_ref().map(|u| f(u, t, s.arity));
    Ok(match (coarse, uniform) {
        (Some(a), Some(b)) => ((a * a + b * b) / T::lit(2.0)).sqrt(),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => T::zero(),
    })
}
