//! Continuous injective map on diagrams inside a frame, built from the
//! angles each point makes with a few anchors on the negative diagonal,
//! and its inverse by intersecting level lines.

use crate::diagram::{DiagramPoint, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default reconstruction tolerance, in radians.
pub const DEFAULT_ANGLE_TOLERANCE: f64 = 1e-9;

/// Distinct negative anchors `s_1, ..., s_k`; the anchor point is `(s, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet<T> {
    values: Vec<T>,
}

impl<T: Scalar> AnchorSet<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidAnchors("need at least two anchors".into()));
        }
        if values.iter().any(|s| !(s.is_finite() && *s < T::zero())) {
            return Err(Error::InvalidAnchors("anchors must be finite and negative".into()));
        }
        for (i, a) in values.iter().enumerate() {
            if values[..i].contains(a) {
                return Err(Error::InvalidAnchors(format!("anchor {a} repeated")));
            }
        }
        Ok(Self { values })
    }

    /// `s_i = -L i / (n + 1)` for `i = 1..=n+1`.
    pub fn default_for(arity: usize, frame: T) -> Result<Self> {
        if !(frame.is_finite() && frame > T::zero()) {
            return Err(Error::InvalidAnchors(format!("frame must be positive, got {frame}")));
        }
        let k = T::from_count(arity + 1);
        Self::new((1..=arity + 1).map(|i| -frame * T::from_count(i) / k).collect())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Angle of `p - (s, s)` from the positive horizontal axis; `π/4` for the
/// diagonal. Lies in `[π/4, π/2)` for points inside the first quadrant.
pub fn angle_value<T: Scalar>(p: &DiagramPoint<T>, s: T) -> Result<T> {
    if !(s < T::zero()) {
        return Err(Error::InvalidAnchors(format!("anchor must be negative, got {s}")));
    }
    Ok(match p.coords() {
        None => T::FRAC_PI_4(),
        Some((b, d)) => (d - s).atan2(b - s),
    })
}

/// `F(x)`: per anchor, the ascending angles of the points of `x`.
pub fn injective_embed<T: Scalar>(x: &PersistenceDiagram<T>, anchors: &AnchorSet<T>, frame: T) -> Result<Vec<T>> {
    let n = x.arity();
    if anchors.len() != n + 1 {
        return Err(Error::InvalidAnchors(format!(
            "arity {n} needs {} anchors, got {}",
            n + 1,
            anchors.len()
        )));
    }
    x.check_frame(frame)?;
    let mut out = Vec::with_capacity(n * (n + 1));
    for &s in anchors.values() {
        let mut block = x
            .points()
            .iter()
            .map(|p| angle_value(p, s))
            .collect::<Result<Vec<T>>>()?;
        block.sort_by(|a, b| a.partial_cmp(b).expect("finite angle"));
        out.extend(block);
    }
    Ok(out)
}

/// Distinct angle values seen from one anchor, with occurrence counts.
struct LevelLines<T> {
    diagonal: usize,
    lines: Vec<(T, usize)>,
}

fn level_lines<T: Scalar>(values: &[T], tau: T) -> Result<LevelLines<T>> {
    let quarter = T::FRAC_PI_4();
    let mut sorted = values.to_vec();
    if sorted.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotAnImage("non-finite coordinate".into()));
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    if sorted[0] < quarter - tau || *sorted.last().unwrap() >= T::FRAC_PI_2() {
        return Err(Error::NotAnImage("angle outside [π/4, π/2)".into()));
    }
    // (first value, sum, count) per group of values within tau of each other.
    let mut groups: Vec<(T, T, usize)> = Vec::new();
    for v in sorted {
        match groups.last_mut() {
            Some((_, sum, count)) if v - *sum / T::from_count(*count) <= tau => {
                *sum = *sum + v;
                *count += 1;
            }
            _ => groups.push((v, v, 1)),
        }
    }
    let ten_tau = T::lit(10.0) * tau;
    let mut diagonal = 0;
    let mut lines: Vec<(T, usize)> = Vec::new();
    let mut previous: Option<T> = None;
    for (_, sum, count) in groups {
        let mean = sum / T::from_count(count);
        if let Some(p) = previous {
            if mean - p < ten_tau {
                return Err(Error::IllConditioned(format!(
                    "angles {p} and {mean} are closer than 10τ"
                )));
            }
        }
        previous = Some(mean);
        if (mean - quarter).abs() <= tau {
            diagonal = count;
        } else {
            lines.push((mean, count));
        }
    }
    Ok(LevelLines { diagonal, lines })
}

/// Intersection of the rays from `(s, s)` at angle `a` and from `(t, t)` at
/// angle `b`.
fn intersect<T: Scalar>(s: T, a: T, t: T, b: T) -> Option<(T, T)> {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let det = ca * sb - sa * cb;
    if det.abs() <= T::epsilon() {
        return None;
    }
    // (s,s) + u (ca, sa) = (t,t) + v (cb, sb)
    let delta = t - s;
    let u = delta * (sb - cb) / det;
    Some((s + u * ca, s + u * sa))
}

/// Inverts [`injective_embed`]: a point is recovered where lines from every
/// anchor meet, with multiplicity the smallest count of its angle over the
/// anchors.
pub fn reconstruct<T: Scalar>(
    image: &[T],
    anchors: &AnchorSet<T>,
    arity: usize,
    frame: T,
    tau: T,
) -> Result<PersistenceDiagram<T>> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidTolerance(tau.as_f64()));
    }
    if anchors.len() != arity + 1 {
        return Err(Error::InvalidAnchors(format!(
            "arity {arity} needs {} anchors, got {}",
            arity + 1,
            anchors.len()
        )));
    }
    if arity == 0 || image.len() != arity * (arity + 1) {
        return Err(Error::NotAnImage(format!(
            "expected {} coordinates, got {}",
            arity * (arity + 1),
            image.len()
        )));
    }
    let families = image
        .chunks(arity)
        .map(|block| level_lines(block, tau))
        .collect::<Result<Vec<_>>>()?;
    let s = anchors.values();

    let mut points: Vec<(T, T)> = Vec::new();
    for &(a, _) in &families[0].lines {
        for &(b, _) in &families[1].lines {
            let Some((x, y)) = intersect(s[0], a, s[1], b) else {
                continue;
            };
            let slack = tau * frame.max(T::one());
            if !(y > x && x >= -slack && y <= frame + slack) {
                continue;
            }
            let mut multiplicity = usize::MAX;
            for (family, &sj) in families.iter().zip(s) {
                let angle = (y - sj).atan2(x - sj);
                match family.lines.iter().find(|(v, _)| (*v - angle).abs() <= tau) {
                    Some(&(_, count)) => multiplicity = multiplicity.min(count),
                    None => {
                        multiplicity = 0;
                        break;
                    }
                }
            }
            let (x, y) = (x.max(T::zero()), y.min(frame));
            for _ in 0..multiplicity {
                points.push((x, y));
            }
        }
    }
    if points.len() > arity {
        return Err(Error::NotAnImage(format!(
            "{} points recovered for arity {arity}",
            points.len()
        )));
    }
    let diagonal = arity - points.len();
    if families.iter().any(|f| f.diagonal != diagonal) {
        return Err(Error::NotAnImage("diagonal counts disagree across anchors".into()));
    }
    let recovered = PersistenceDiagram::from_pairs(&points, arity)?;
    let forward = injective_embed(&recovered, anchors, frame)?;
    let check = T::lit(100.0) * tau;
    let mut expected: Vec<T> = Vec::with_capacity(image.len());
    for block in image.chunks(arity) {
        let mut b = block.to_vec();
        b.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
        expected.extend(b);
    }
    if forward.iter().zip(&expected).any(|(a, b)| (*a - *b).abs() > check) {
        return Err(Error::NotAnImage("recovered diagram does not reproduce the image".into()));
    }
    Ok(recovered)
}
