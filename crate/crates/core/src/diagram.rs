//! Persistence diagrams on a fixed number of points and the bottleneck metric.
//!
//! A diagram on `n` points is a multiset of `n` entries, each either an
//! off-diagonal pair `(birth, death)` with `death > birth >= 0` or the
//! diagonal marker. Diagrams with fewer real points are padded with
//! diagonal entries, which is an isometric inclusion.

use std::cmp::Ordering;
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::matching::has_perfect_matching;
use crate::scalar::{cmp_finite, Scalar};

/// Largest arity accepted by [`bottleneck_bruteforce`].
pub const BRUTEFORCE_MAX_ARITY: usize = 8;

/// One entry of a persistence diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagramPoint<T> {
    Diagonal,
    OffDiagonal { birth: T, death: T },
}

impl<T: Scalar> DiagramPoint<T> {
    /// Builds an off-diagonal point, rejecting `death <= birth`, negative
    /// births and non-finite coordinates.
    pub fn new(birth: T, death: T) -> Result<Self> {
        if !(birth.is_finite() && death.is_finite()) || birth < T::zero() || death <= birth {
            return Err(Error::InvalidPoint {
                birth: birth.as_f64(),
                death: death.as_f64(),
            });
        }
        Ok(DiagramPoint::OffDiagonal { birth, death })
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, DiagramPoint::Diagonal)
    }

    pub fn coords(&self) -> Option<(T, T)> {
        match *self {
            DiagramPoint::Diagonal => None,
            DiagramPoint::OffDiagonal { birth, death } => Some((birth, death)),
        }
    }

    /// Bottleneck distance to the diagonal: half the persistence.
    pub fn to_diagonal(&self) -> T {
        match *self {
            DiagramPoint::Diagonal => T::zero(),
            DiagramPoint::OffDiagonal { birth, death } => (death - birth).abs() / T::lit(2.0),
        }
    }

    /// Bottleneck distance between one-point diagrams: the cheaper of
    /// matching the two points to each other (sup norm) or both to the
    /// diagonal.
    pub fn distance(&self, other: &Self) -> T {
        match (*self, *other) {
            (DiagramPoint::Diagonal, _) => other.to_diagonal(),
            (_, DiagramPoint::Diagonal) => self.to_diagonal(),
            (
                DiagramPoint::OffDiagonal { birth: b1, death: d1 },
                DiagramPoint::OffDiagonal { birth: b2, death: d2 },
            ) => {
                let sup = (b1 - b2).abs().max((d1 - d2).abs());
                sup.min(self.to_diagonal().max(other.to_diagonal()))
            }
        }
    }

    /// True if the point is the diagonal or lies in `[0, frame]^2`.
    pub fn in_frame(&self, frame: T) -> bool {
        match *self {
            DiagramPoint::Diagonal => true,
            DiagramPoint::OffDiagonal { birth, death } => {
                birth >= T::zero() && death <= frame && birth <= frame
            }
        }
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (DiagramPoint::Diagonal, DiagramPoint::Diagonal) => Ordering::Equal,
            (DiagramPoint::Diagonal, _) => Ordering::Less,
            (_, DiagramPoint::Diagonal) => Ordering::Greater,
            (
                DiagramPoint::OffDiagonal { birth: b1, death: d1 },
                DiagramPoint::OffDiagonal { birth: b2, death: d2 },
            ) => cmp_finite(*b1, *b2).then_with(|| cmp_finite(*d1, *d2)),
        }
    }
}

impl<T: Scalar> fmt::Display for DiagramPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagramPoint::Diagonal => write!(f, "Δ"),
            DiagramPoint::OffDiagonal { birth, death } => write!(f, "({birth}, {death})"),
        }
    }
}

/// A persistence diagram on exactly `arity()` points.
///
/// Entries are kept sorted (diagonal first, then by birth and death), so two
/// diagrams are equal exactly when their multisets agree.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram<T> {
    points: Vec<DiagramPoint<T>>,
}

impl<T: Scalar> PersistenceDiagram<T> {
    pub fn new(mut points: Vec<DiagramPoint<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDiagram);
        }
        for p in &points {
            if let DiagramPoint::OffDiagonal { birth, death } = *p {
                DiagramPoint::new(birth, death)?;
            }
        }
        points.sort_by(|a, b| a.canonical_cmp(b));
        Ok(Self { points })
    }

    /// The diagram made of `arity` copies of the diagonal.
    pub fn diagonal(arity: usize) -> Result<Self> {
        Self::new(vec![DiagramPoint::Diagonal; arity])
    }

    /// Builds a diagram from birth/death pairs, padded with the diagonal up
    /// to `arity`.
    pub fn from_pairs(pairs: &[(T, T)], arity: usize) -> Result<Self> {
        if pairs.len() > arity {
            return Err(Error::PadBelowArity {
                arity: pairs.len(),
                target: arity,
            });
        }
        let mut points = pairs
            .iter()
            .map(|&(b, d)| DiagramPoint::new(b, d))
            .collect::<Result<Vec<_>>>()?;
        points.resize(arity, DiagramPoint::Diagonal);
        Self::new(points)
    }

    pub fn arity(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[DiagramPoint<T>] {
        &self.points
    }

    /// Off-diagonal `(birth, death)` pairs in canonical order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.points.iter().filter_map(|p| p.coords())
    }

    /// Largest coordinate of any off-diagonal point (zero if there is none).
    pub fn max_coordinate(&self) -> T {
        self.off_diagonal()
            .fold(T::zero(), |acc, (b, d)| acc.max(b).max(d))
    }

    pub fn in_frame(&self, frame: T) -> bool {
        self.points.iter().all(|p| p.in_frame(frame))
    }

    /// Rejects diagrams with a point outside `[0, frame]^2`.
    pub fn check_frame(&self, frame: T) -> Result<()> {
        match self.points.iter().find(|p| !p.in_frame(frame)) {
            None => Ok(()),
            Some(p) => {
                let (b, d) = p.coords().unwrap_or((T::zero(), T::zero()));
                Err(Error::OutsideFrame {
                    birth: b.as_f64(),
                    death: d.as_f64(),
                    frame: frame.as_f64(),
                })
            }
        }
    }

    /// Bottleneck distance to the all-diagonal diagram.
    pub fn to_diagonal(&self) -> T {
        self.points
            .iter()
            .map(DiagramPoint::to_diagonal)
            .fold(T::zero(), T::max)
    }
}

impl<T: Scalar> fmt::Display for PersistenceDiagram<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.points.iter().join(", "))
    }
}

/// Pads `x` with diagonal entries up to arity `n`.
pub fn pad_to_arity<T: Scalar>(x: &PersistenceDiagram<T>, n: usize) -> Result<PersistenceDiagram<T>> {
    if n < x.arity() {
        return Err(Error::PadBelowArity {
            arity: x.arity(),
            target: n,
        });
    }
    let mut points = x.points.clone();
    points.resize(n, DiagramPoint::Diagonal);
    PersistenceDiagram::new(points)
}

pub fn point_to_diagonal<T: Scalar>(p: &DiagramPoint<T>) -> T {
    p.to_diagonal()
}

pub fn point_distance<T: Scalar>(p: &DiagramPoint<T>, q: &DiagramPoint<T>) -> T {
    p.distance(q)
}

fn check_arity<T>(x: &PersistenceDiagram<T>, y: &PersistenceDiagram<T>) -> Result<()> {
    if x.points.len() != y.points.len() {
        return Err(Error::ArityMismatch {
            left: x.points.len(),
            right: y.points.len(),
        });
    }
    Ok(())
}

/// Bottleneck distance by enumerating every permutation. Ground truth for
/// small arities only.
pub fn bottleneck_bruteforce<T: Scalar>(x: &PersistenceDiagram<T>, y: &PersistenceDiagram<T>) -> Result<T> {
    check_arity(x, y)?;
    let n = x.arity();
    if n > BRUTEFORCE_MAX_ARITY {
        return Err(Error::ArityTooLarge {
            arity: n,
            max: BRUTEFORCE_MAX_ARITY,
        });
    }
    let best = (0..n)
        .permutations(n)
        .map(|perm| {
            perm.iter()
                .enumerate()
                .map(|(i, &j)| x.points[i].distance(&y.points[j]))
                .fold(T::zero(), T::max)
        })
        .fold(T::infinity(), T::min);
    Ok(best)
}

/// Bottleneck distance between diagrams of equal arity.
///
/// The optimum is always one of the `n^2` pairwise point distances, so this
/// binary-searches the sorted candidate values for the smallest threshold
/// whose "distance <= threshold" bipartite graph has a perfect matching.
pub fn bottleneck_distance<T: Scalar>(x: &PersistenceDiagram<T>, y: &PersistenceDiagram<T>) -> Result<T> {
    check_arity(x, y)?;
    let n = x.arity();
    let cost: Vec<T> = x
        .points
        .iter()
        .flat_map(|p| y.points.iter().map(move |q| p.distance(q)))
        .collect();
    if n == 1 {
        return Ok(cost[0]);
    }

    // The max over rows of the row minimum (and likewise for columns) is a
    // lower bound on any perfect matching's bottleneck.
    let mut lower = T::zero();
    for i in 0..n {
        let row_min = (0..n).map(|j| cost[i * n + j]).fold(T::infinity(), T::min);
        let col_min = (0..n).map(|j| cost[j * n + i]).fold(T::infinity(), T::min);
        lower = lower.max(row_min).max(col_min);
    }

    let mut candidates: Vec<T> = cost.iter().copied().filter(|&c| c >= lower).collect();
    candidates.sort_by(|a, b| cmp_finite(*a, *b));
    candidates.dedup();

    let feasible = |t: T| {
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| cost[i * n + j] <= t).collect())
            .collect();
        has_perfect_matching(n, &adj)
    };

    // The largest candidate is always feasible.
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(candidates[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(b: f64, d: f64) -> DiagramPoint<f64> {
        DiagramPoint::new(b, d).unwrap()
    }

    #[test]
    fn point_to_diagonal_values() {
        assert_eq!(pt(2.0, 6.0).to_diagonal(), 2.0);
        assert_eq!(DiagramPoint::<f64>::Diagonal.to_diagonal(), 0.0);
        assert_eq!(pt(0.0, 1.0).to_diagonal(), 0.5);
    }

    #[test]
    fn point_distance_values() {
        assert_eq!(point_distance(&pt(1.0, 3.0), &pt(2.0, 5.0)), 1.5);
        assert_eq!(point_distance(&pt(1.0, 3.0), &pt(1.0, 3.0)), 0.0);
        assert_eq!(point_distance(&pt(0.0, 10.0), &pt(1.0, 9.0)), 1.0);
        assert_eq!(point_distance(&DiagramPoint::Diagonal, &pt(1.0, 4.0)), 1.5);
    }

    #[test]
    fn rejects_degenerate_points() {
        assert!(DiagramPoint::new(1.0, 1.0).is_err());
        assert!(DiagramPoint::new(2.0, 1.0).is_err());
        assert!(DiagramPoint::new(-0.5, 1.0).is_err());
        assert!(DiagramPoint::new(0.0, f64::INFINITY).is_err());
        assert!(DiagramPoint::new(f64::NAN, 1.0).is_err());
        assert!(PersistenceDiagram::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn normalization_makes_equality_order_free() {
        let a = PersistenceDiagram::from_pairs(&[(0.0, 4.0), (0.0, 12.0)], 3).unwrap();
        let b = PersistenceDiagram::from_pairs(&[(0.0, 12.0), (0.0, 4.0)], 3).unwrap();
        assert_eq!(a, b);
        assert!(a.points()[0].is_diagonal());
        assert_eq!(bottleneck_distance(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn bottleneck_worked_example() {
        let x = PersistenceDiagram::from_pairs(&[(0.0, 10.0), (4.0, 6.0)], 2).unwrap();
        let y = PersistenceDiagram::from_pairs(&[(1.0, 9.0)], 2).unwrap();
        assert_eq!(bottleneck_bruteforce(&x, &y).unwrap(), 1.0);
        assert_eq!(bottleneck_distance(&x, &y).unwrap(), 1.0);
    }

    #[test]
    fn bottleneck_against_empty() {
        let x = PersistenceDiagram::from_pairs(&[(1.0, 2.0)], 3).unwrap();
        let y = PersistenceDiagram::diagonal(3).unwrap();
        assert_eq!(bottleneck_bruteforce(&x, &y).unwrap(), 0.5);
        assert_eq!(bottleneck_distance(&x, &y).unwrap(), 0.5);
    }

    #[test]
    fn arity_errors() {
        let x = PersistenceDiagram::<f64>::diagonal(2).unwrap();
        let y = PersistenceDiagram::<f64>::diagonal(3).unwrap();
        assert!(matches!(bottleneck_distance(&x, &y), Err(Error::ArityMismatch { .. })));
        assert!(matches!(bottleneck_bruteforce(&x, &y), Err(Error::ArityMismatch { .. })));
        let big = PersistenceDiagram::<f64>::diagonal(9).unwrap();
        assert!(matches!(
            bottleneck_bruteforce(&big, &big),
            Err(Error::ArityTooLarge { .. })
        ));
        assert!(bottleneck_distance(&big, &big).is_ok());
        assert!(matches!(pad_to_arity(&y, 2), Err(Error::PadBelowArity { .. })));
    }

    #[test]
    fn padding() {
        let x = PersistenceDiagram::from_pairs(&[(1.0, 2.0)], 1).unwrap();
        let p = pad_to_arity(&x, 3).unwrap();
        assert_eq!(p.arity(), 3);
        assert_eq!(p.points().iter().filter(|q| q.is_diagonal()).count(), 2);
        assert_eq!(pad_to_arity(&x, 1).unwrap(), x);
    }

    #[test]
    fn works_in_single_precision() {
        let x = PersistenceDiagram::<f32>::from_pairs(&[(0.0, 10.0), (4.0, 6.0)], 2).unwrap();
        let y = PersistenceDiagram::<f32>::from_pairs(&[(1.0, 9.0)], 2).unwrap();
        assert_eq!(bottleneck_distance(&x, &y).unwrap(), 1.0f32);
    }
}
