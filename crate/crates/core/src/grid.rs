//! The scale-`R` landmark grid and the single-scale map `φ_R`.
//!
//! Landmarks are one-point diagrams `(mR, kR)` with `m` odd, `k` even,
//! `k >= m + 3`, plus the diagonal. A landmark diagram on `n` points is a
//! multiset of `n` such keys. The map `φ_R` sends a diagram `x` to the
//! coordinates `max(3R/2 - d_B(x, p), 0)` over all landmark diagrams `p`;
//! at most `4^n` of them are non-zero and we store only those.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;

use crate::diagram::{bottleneck_distance, DiagramPoint, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::scalar::{cover_radius, Scalar};

/// One grid landmark point, or the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GridKey {
    Diagonal,
    Point { m: i64, k: i64 },
}

impl GridKey {
    pub fn new(m: i64, k: i64) -> Result<Self> {
        if m < 1 || m % 2 == 0 || k < 4 || k % 2 != 0 || k < m + 3 {
            return Err(Error::InvalidGridKey { m, k });
        }
        Ok(GridKey::Point { m, k })
    }

    /// The diagram point this key denotes at scale `r`.
    pub fn point<T: Scalar>(&self, r: T) -> DiagramPoint<T> {
        match *self {
            GridKey::Diagonal => DiagramPoint::Diagonal,
            GridKey::Point { m, k } => DiagramPoint::OffDiagonal {
                birth: T::from_key(m) * r,
                death: T::from_key(k) * r,
            },
        }
    }
}

impl fmt::Display for GridKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridKey::Diagonal => write!(f, "D"),
            GridKey::Point { m, k } => write!(f, "{m},{k}"),
        }
    }
}

/// A landmark diagram: a sorted multiset of grid keys.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LandmarkKey(Vec<GridKey>);

impl LandmarkKey {
    pub fn new(mut keys: Vec<GridKey>) -> Self {
        keys.sort();
        LandmarkKey(keys)
    }

    pub fn diagonal(arity: usize) -> Self {
        LandmarkKey(vec![GridKey::Diagonal; arity])
    }

    pub fn keys(&self) -> &[GridKey] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Canonical text form, e.g. `s2:1,4;3,8;D`: the 1-based scale index,
    /// then grid points in ascending order followed by diagonal entries.
    pub fn to_text(&self, scale_index: usize) -> String {
        let points = self.0.iter().filter(|g| **g != GridKey::Diagonal);
        let diags = self.0.iter().filter(|g| **g == GridKey::Diagonal);
        format!("s{scale_index}:{}", points.chain(diags).join(";"))
    }

    /// Parses the text form back into `(scale_index, key)`.
    pub fn parse_text(text: &str) -> Result<(usize, Self)> {
        let bad = || Error::Parse(format!("malformed landmark key `{text}`"));
        let rest = text.strip_prefix('s').ok_or_else(bad)?;
        let (idx, body) = rest.split_once(':').ok_or_else(bad)?;
        let idx: usize = idx.parse().map_err(|_| bad())?;
        let keys = body
            .split(';')
            .map(|part| {
                if part == "D" {
                    return Ok(GridKey::Diagonal);
                }
                let (m, k) = part.split_once(',').ok_or_else(bad)?;
                let m: i64 = m.parse().map_err(|_| bad())?;
                let k: i64 = k.parse().map_err(|_| bad())?;
                GridKey::new(m, k)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((idx, LandmarkKey::new(keys)))
    }
}

/// Finitely supported vector indexed by landmark keys at one scale.
///
/// `φ_R` images hold values in `(0, 3R/2]`; scaled or differenced blocks
/// reuse the type with signed values. Zero entries are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseEmbedding<T> {
    pub scale: T,
    pub entries: BTreeMap<LandmarkKey, T>,
}

impl<T: Scalar> SparseEmbedding<T> {
    pub fn empty(scale: T) -> Self {
        Self {
            scale,
            entries: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &LandmarkKey) -> T {
        self.entries.get(key).copied().unwrap_or_else(T::zero)
    }

    pub fn norm_squared(&self) -> T {
        self.entries.values().map(|&v| v * v).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    /// Multiplies every entry by `factor`, dropping entries that become zero.
    pub fn scaled(&self, factor: T) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(k, &v)| (k.clone(), v * factor))
            .filter(|(_, v)| *v != T::zero())
            .collect();
        Self {
            scale: self.scale,
            entries,
        }
    }

    /// `self - other` over the union of supports.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        check_scales(self, other)?;
        let mut entries = self.entries.clone();
        for (k, &v) in &other.entries {
            let e = entries.entry(k.clone()).or_insert_with(T::zero);
            *e = *e - v;
        }
        entries.retain(|_, v| *v != T::zero());
        Ok(Self {
            scale: self.scale,
            entries,
        })
    }

    /// Squared Euclidean distance, treating absent keys as zero.
    pub fn distance_squared(&self, other: &Self) -> Result<T> {
        check_scales(self, other)?;
        let mut total = T::zero();
        let mut a = self.entries.iter().peekable();
        let mut b = other.entries.iter().peekable();
        loop {
            let d = match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some((_, &va)), None) => {
                    a.next();
                    va
                }
                (None, Some((_, &vb))) => {
                    b.next();
                    vb
                }
                (Some((ka, &va)), Some((kb, &vb))) => match ka.cmp(kb) {
                    std::cmp::Ordering::Less => {
                        a.next();
                        va
                    }
                    std::cmp::Ordering::Greater => {
                        b.next();
                        vb
                    }
                    std::cmp::Ordering::Equal => {
                        a.next();
                        b.next();
                        va - vb
                    }
                },
            };
            total = total + d * d;
        }
        Ok(total)
    }

    pub fn distance(&self, other: &Self) -> Result<T> {
        Ok(self.distance_squared(other)?.sqrt())
    }
}

fn check_scales<T: Scalar>(a: &SparseEmbedding<T>, b: &SparseEmbedding<T>) -> Result<()> {
    if a.scale != b.scale {
        return Err(Error::ScaleMismatch(a.scale.as_f64(), b.scale.as_f64()));
    }
    Ok(())
}

pub fn sparse_norm<T: Scalar>(a: &SparseEmbedding<T>) -> T {
    a.norm()
}

pub fn sparse_distance<T: Scalar>(a: &SparseEmbedding<T>, b: &SparseEmbedding<T>) -> Result<T> {
    a.distance(b)
}

pub(crate) fn check_scale<T: Scalar>(r: T) -> Result<()> {
    if !(r.is_finite() && r > T::zero()) {
        return Err(Error::InvalidScale(r.as_f64()));
    }
    Ok(())
}

/// The concrete diagram a landmark key denotes at scale `r`.
pub fn landmark_diagram<T: Scalar>(key: &LandmarkKey, r: T) -> Result<PersistenceDiagram<T>> {
    check_scale(r)?;
    PersistenceDiagram::new(key.keys().iter().map(|g| g.point(r)).collect())
}

/// Grid keys whose open `3R/2`-ball contains `p`.
///
/// Every grid point sits at least `3R/2` from the diagonal, so for grid keys
/// the ball test reduces to the sup-norm test and only the 3x3 block of odd
/// and even indices around `p / R` needs to be scanned.
pub fn grid_candidates<T: Scalar>(p: &DiagramPoint<T>, r: T) -> Result<Vec<GridKey>> {
    check_scale(r)?;
    let radius = cover_radius(r);
    let mut out = Vec::with_capacity(5);
    if p.to_diagonal() < radius {
        out.push(GridKey::Diagonal);
    }
    if let Some((b, d)) = p.coords() {
        let span = |c: T| {
            let lo = (c / r - T::lit(1.5)).floor().to_i64().unwrap_or(i64::MIN) - 1;
            let hi = (c / r + T::lit(1.5)).ceil().to_i64().unwrap_or(i64::MAX) + 1;
            lo..=hi
        };
        for m in span(b).filter(|m| *m >= 1 && m % 2 == 1) {
            for k in span(d).filter(|k| *k >= 4 && k % 2 == 0 && *k >= m + 3) {
                // The grid point's diagonal distance is taken as the exact
                // half-integer multiple of R so that rounding never admits a
                // key through the diagonal route.
                let sup = (b - T::from_key(m) * r).abs().max((d - T::from_key(k) * r).abs());
                let key_diagonal = T::from_key(k - m) / T::lit(2.0) * r;
                if sup.min(p.to_diagonal().max(key_diagonal)) < radius {
                    out.push(GridKey::Point { m, k });
                }
            }
        }
    }
    Ok(out)
}

/// Every landmark key whose `3R/2`-ball can contain `x`: one candidate per
/// point, all combinations, deduplicated as multisets.
pub fn landmark_candidates<T: Scalar>(x: &PersistenceDiagram<T>, r: T) -> Result<Vec<LandmarkKey>> {
    let per_point = x
        .points()
        .iter()
        .map(|p| grid_candidates(p, r))
        .collect::<Result<Vec<_>>>()?;
    let keys: BTreeSet<LandmarkKey> = per_point
        .into_iter()
        .multi_cartesian_product()
        .map(LandmarkKey::new)
        .collect();
    Ok(keys.into_iter().collect())
}

/// `max(3R/2 - d_B(x, landmark), 0)`.
pub fn phi_component<T: Scalar>(x: &PersistenceDiagram<T>, key: &LandmarkKey, r: T) -> Result<T> {
    if key.arity() != x.arity() {
        return Err(Error::ArityMismatch {
            left: x.arity(),
            right: key.arity(),
        });
    }
    let landmark = landmark_diagram(key, r)?;
    let d = bottleneck_distance(x, &landmark)?;
    Ok((cover_radius(r) - d).max(T::zero()))
}

/// The single-scale map `φ_R(x)`, stored sparsely.
pub fn phi_scale<T: Scalar>(x: &PersistenceDiagram<T>, r: T) -> Result<SparseEmbedding<T>> {
    let mut entries = BTreeMap::new();
    for key in landmark_candidates(x, r)? {
        let v = phi_component(x, &key, r)?;
        if v > T::zero() {
            entries.insert(key, v);
        }
    }
    Ok(SparseEmbedding { scale: r, entries })
}
