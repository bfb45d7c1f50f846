//! Finite-dimensional embedding of diagrams inside a frame `[0, L]^2`.
//!
//! `φ₃(x) = (w_k 2^-n φ_{R_k}(x))_{k=1..N}` for scales `R_1 < ... < R_N <= L`
//! and a unit weight vector. Only landmarks whose ball meets the frame can
//! be non-zero, which makes the image finite-dimensional.

use std::collections::BTreeMap;

use crate::diagram::{bottleneck_distance, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::grid::{check_scale, grid_candidates, phi_scale, GridKey, LandmarkKey, SparseEmbedding};
use crate::scalar::{cover_radius, Scalar};

/// Default cap on the dense vector length.
pub const DEFAULT_DENSE_CAP: u128 = 1_000_000;

/// Frame, scales and unit weights of a bounded-domain embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedEmbeddingSpec<T> {
    frame: T,
    scales: Vec<T>,
    weights: Vec<T>,
    arity: usize,
}

impl<T: Scalar> BoundedEmbeddingSpec<T> {
    pub fn new(frame: T, scales: Vec<T>, weights: Vec<T>, arity: usize) -> Result<Self> {
        if !(frame.is_finite() && frame > T::zero()) {
            return Err(Error::InvalidSpec(format!("frame must be positive, got {frame}")));
        }
        if arity == 0 {
            return Err(Error::EmptyDiagram);
        }
        if scales.is_empty() {
            return Err(Error::InvalidSpec("need at least one scale".into()));
        }
        if weights.len() != scales.len() {
            return Err(Error::InvalidSpec(format!(
                "{} weights for {} scales",
                weights.len(),
                scales.len()
            )));
        }
        for r in &scales {
            check_scale(*r)?;
            if *r > frame {
                return Err(Error::InvalidSpec(format!("scale {r} exceeds frame {frame}")));
            }
        }
        if scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpec("scales must be strictly increasing".into()));
        }
        let norm_sq: T = weights.iter().map(|&w| w * w).sum();
        let tol = T::lit(1e-12).max(T::from_count(8 * weights.len()) * T::epsilon());
        if weights.iter().any(|w| !w.is_finite()) || (norm_sq - T::one()).abs() > tol {
            return Err(Error::InvalidSpec(format!(
                "weights must form a unit vector (squared norm {norm_sq})"
            )));
        }
        Ok(Self {
            frame,
            scales,
            weights,
            arity,
        })
    }

    pub fn frame(&self) -> T {
        self.frame
    }

    pub fn scales(&self) -> &[T] {
        &self.scales
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// `ν_i` for every scale.
    pub fn landmark_counts(&self) -> Result<Vec<u128>> {
        self.scales
            .iter()
            .map(|&r| count_landmarks(r, self.frame, self.arity))
            .collect()
    }

    /// `ν_1 + ... + ν_N`.
    pub fn dense_len(&self) -> Result<u128> {
        self.landmark_counts()?
            .into_iter()
            .try_fold(0u128, |acc, v| acc.checked_add(v).ok_or(Error::CountOverflow))
    }

    fn block_factor(&self, i: usize) -> T {
        self.weights[i] * T::lit(2.0).powi(-(self.arity as i32))
    }
}

/// Grid keys (diagonal excluded) whose ball meets the frame at scale `r`,
/// in canonical order.
pub fn eligible_grid_keys<T: Scalar>(r: T, frame: T) -> Vec<GridKey> {
    let limit = frame + cover_radius(r);
    let mut out = Vec::new();
    let mut m = 1i64;
    while T::from_key(m + 3) * r < limit {
        let mut k = m + 3;
        while T::from_key(k) * r < limit {
            out.push(GridKey::Point { m, k });
            k += 2;
        }
        m += 2;
    }
    out.sort();
    out
}

fn binomial(n: u128, k: u128) -> Result<u128> {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul(n - i)
            .ok_or(Error::CountOverflow)?
            / (i + 1);
    }
    Ok(acc)
}

/// Number of cover elements at scale `r` that meet the frame: multisets of
/// size `n` over the eligible grid keys plus the diagonal, `C(G + n, n)`.
pub fn count_landmarks<T: Scalar>(r: T, frame: T, n: usize) -> Result<u128> {
    check_scale(r)?;
    if !(frame.is_finite() && frame > T::zero()) || r > frame {
        return Err(Error::InvalidSpec(format!("need 0 < R <= L, got R={r}, L={frame}")));
    }
    let g = eligible_grid_keys(r, frame).len() as u128;
    binomial(g + n as u128, n as u128)
}

/// `φ₃(x)`, one sparse block per scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Phi3Image<T> {
    pub blocks: Vec<SparseEmbedding<T>>,
}

impl<T: Scalar> Phi3Image<T> {
    pub fn nnz(&self) -> usize {
        self.blocks.iter().map(SparseEmbedding::len).sum()
    }

    pub fn norm(&self) -> T {
        self.blocks.iter().map(SparseEmbedding::norm_squared).sum::<T>().sqrt()
    }

    pub fn distance(&self, other: &Self) -> Result<T> {
        if self.blocks.len() != other.blocks.len() {
            return Err(Error::InvalidSpec("images come from different specs".into()));
        }
        let mut total = T::zero();
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            total = total + a.distance_squared(b)?;
        }
        Ok(total.sqrt())
    }

    /// `(scale index (1-based), key, value)` in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, &LandmarkKey, T)> + '_ {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.entries.iter().map(move |(k, &v)| (i + 1, k, v)))
    }

    /// Dense vector in the canonical layout of `spec`.
    pub fn to_dense(&self, spec: &BoundedEmbeddingSpec<T>, cap: u128) -> Result<Vec<T>> {
        let layout = DenseLayout::new(spec, cap)?;
        let mut out = vec![T::zero(); layout.len];
        for (i, block) in self.blocks.iter().enumerate() {
            for (key, &v) in &block.entries {
                out[layout.index(i, key)?] = v;
            }
        }
        Ok(out)
    }
}

/// Position of every landmark in the dense vector: scale blocks in order,
/// each block listing multisets lexicographically over `[Δ, grid keys...]`.
#[derive(Debug, Clone)]
pub struct DenseLayout {
    alphabets: Vec<Vec<GridKey>>,
    offsets: Vec<usize>,
    arity: usize,
    len: usize,
}

impl DenseLayout {
    pub fn new<T: Scalar>(spec: &BoundedEmbeddingSpec<T>, cap: u128) -> Result<Self> {
        let size = spec.dense_len()?;
        if size > cap {
            return Err(Error::DenseTooLarge { size, cap });
        }
        let alphabets: Vec<Vec<GridKey>> = spec
            .scales
            .iter()
            .map(|&r| {
                let mut a = vec![GridKey::Diagonal];
                a.extend(eligible_grid_keys(r, spec.frame));
                a
            })
            .collect();
        let mut offsets = Vec::with_capacity(alphabets.len());
        let mut acc = 0usize;
        for count in spec.landmark_counts()? {
            offsets.push(acc);
            acc += count as usize;
        }
        Ok(Self {
            alphabets,
            offsets,
            arity: spec.arity,
            len: acc,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Dense index of `key` in scale block `block` (0-based).
    pub fn index(&self, block: usize, key: &LandmarkKey) -> Result<usize> {
        let alphabet = &self.alphabets[block];
        let size = alphabet.len() as u128;
        let mut rank: u128 = 0;
        let mut prev = 0u128;
        for (pos, g) in key.keys().iter().enumerate() {
            let c = alphabet
                .binary_search(g)
                .map_err(|_| Error::InvalidSpec(format!("landmark {g} lies outside the frame")))?
                as u128;
            let remaining = (self.arity - pos - 1) as u128;
            for v in prev..c {
                rank += binomial(size - v + remaining - 1, remaining)?;
            }
            prev = c;
        }
        Ok(self.offsets[block] + rank as usize)
    }

    /// Text keys in dense order.
    pub fn keys(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.len);
        for (b, alphabet) in self.alphabets.iter().enumerate() {
            let mut current = Vec::with_capacity(self.arity);
            enumerate_multisets(alphabet, self.arity, 0, &mut current, &mut |keys| {
                out.push(LandmarkKey::new(keys.to_vec()).to_text(b + 1));
            });
        }
        out
    }
}

fn enumerate_multisets(
    alphabet: &[GridKey],
    arity: usize,
    start: usize,
    current: &mut Vec<GridKey>,
    emit: &mut dyn FnMut(&[GridKey]),
) {
    if current.len() == arity {
        emit(current);
        return;
    }
    for i in start..alphabet.len() {
        current.push(alphabet[i]);
        enumerate_multisets(alphabet, arity, i, current, emit);
        current.pop();
    }
}

/// `φ₃(x)` for a diagram inside the frame.
pub fn phi3<T: Scalar>(x: &PersistenceDiagram<T>, spec: &BoundedEmbeddingSpec<T>) -> Result<Phi3Image<T>> {
    if x.arity() != spec.arity {
        return Err(Error::ArityMismatch {
            left: spec.arity,
            right: x.arity(),
        });
    }
    x.check_frame(spec.frame)?;
    let blocks = spec
        .scales
        .iter()
        .enumerate()
        .map(|(i, &r)| Ok(phi_scale(x, r)?.scaled(spec.block_factor(i))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Phi3Image { blocks })
}

/// `1 / (3 · 2^{n+2.5})`.
fn bounded_constant<T: Scalar>(arity: usize) -> T {
    T::one() / (T::lit(3.0) * T::lit(2.0).powf(T::from_count(arity) + T::lit(2.5)))
}

fn check_t<T: Scalar>(spec: &BoundedEmbeddingSpec<T>, t: T) -> Result<()> {
    if !(t >= T::zero()) {
        return Err(Error::NegativeArgument(t.as_f64()));
    }
    if t > spec.frame {
        return Err(Error::OutOfDomain {
            t: t.as_f64(),
            frame: spec.frame.as_f64(),
        });
    }
    Ok(())
}

/// Step heights `h_i = (1/(3·2^{n+2.5})) √(Σ_{k<=i} w_k² R_k²)`.
pub fn step_heights<T: Scalar>(spec: &BoundedEmbeddingSpec<T>) -> Vec<T> {
    let q = bounded_constant::<T>(spec.arity);
    let mut acc = T::zero();
    spec.weights
        .iter()
        .zip(&spec.scales)
        .map(|(&w, &r)| {
            acc = acc + w * w * r * r;
            q * acc.sqrt()
        })
        .collect()
}

/// Step lower bound: `h_i` on `[R_i, R_{i+1})`, the top step reaching `L`.
pub fn rho3_steps<T: Scalar>(spec: &BoundedEmbeddingSpec<T>, t: T) -> Result<T> {
    check_t(spec, t)?;
    let count = spec.scales.iter().take_while(|&&r| r <= t).count();
    Ok(match count {
        0 => T::zero(),
        i => step_heights(spec)[i - 1],
    })
}

/// Slope of the linear lower bound: the flattest chord from `(R_1, 0)` to
/// the bottom-right corner `(R_{i+1}, h_i)` of each step, the last step's
/// corner sitting at `(L, h_N)`.
pub fn rho3_linear_slope<T: Scalar>(spec: &BoundedEmbeddingSpec<T>) -> T {
    let h = step_heights(spec);
    let r1 = spec.scales[0];
    let n = spec.scales.len();
    let mut slope = T::infinity();
    for i in 1..n {
        slope = slope.min(h[i - 1] / (spec.scales[i] - r1));
    }
    if spec.frame > r1 {
        slope = slope.min(h[n - 1] / (spec.frame - r1));
    }
    if slope.is_infinite() {
        T::zero()
    } else {
        slope
    }
}

/// Linear lower bound: `0` up to `R_1`, then `slope · (t - R_1)`.
pub fn rho3_linear<T: Scalar>(spec: &BoundedEmbeddingSpec<T>, t: T) -> Result<T> {
    check_t(spec, t)?;
    let r1 = spec.scales[0];
    if t <= r1 {
        return Ok(T::zero());
    }
    Ok(rho3_linear_slope(spec) * (t - r1))
}

/// Evenly spaced scales on `[m, M)` with constant weights, and the linear
/// bound's `λ` computed in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSpec<T> {
    pub spec: BoundedEmbeddingSpec<T>,
    /// `(M - m) / (m N)`.
    pub a: T,
    /// Minimizer of the continuous relaxation `f`.
    pub mu: T,
    pub lambda: T,
    /// `(1/(3·2^{n+2.5})) √λ / (a √N)`.
    pub slope: T,
}

/// `f(x) = (a²/3) x + (1 - a + a²/6)/x + (a - a²/2)`, which equals
/// `Σ_{k<=x} (1 + (k-1)a)² / x²` at positive integers.
pub fn lambda_f<T: Scalar>(a: T, x: T) -> T {
    let a2 = a * a;
    a2 / T::lit(3.0) * x + (T::one() - a + a2 / T::lit(6.0)) / x + (a - a2 / T::lit(2.0))
}

/// Direct minimum of `Σ_{k<=i} (1 + (k-1)a)² / i²` over `i = 1..=N`.
pub fn lambda_bruteforce<T: Scalar>(a: T, scales: usize) -> T {
    let mut acc = T::zero();
    let mut best = T::infinity();
    for i in 1..=scales {
        let r = T::one() + T::from_count(i - 1) * a;
        acc = acc + r * r;
        let v = acc / T::from_count(i * i);
        best = best.min(v);
    }
    best
}

pub fn uniform_spec<T: Scalar>(m: T, big_m: T, scales: usize, arity: usize) -> Result<UniformSpec<T>> {
    if !(m > T::zero()) || !(big_m > m) || !big_m.is_finite() {
        return Err(Error::InvalidSpec(format!("need 0 < m < M, got m={m}, M={big_m}")));
    }
    if scales < 1 {
        return Err(Error::InvalidSpec("need at least one scale".into()));
    }
    let nf = T::from_count(scales);
    let step = (big_m - m) / nf;
    let rs: Vec<T> = (0..scales).map(|i| m + step * T::from_count(i)).collect();
    let ws = vec![T::one() / nf.sqrt(); scales];
    let spec = BoundedEmbeddingSpec::new(big_m, rs, ws, arity)?;

    let a = (big_m - m) / (m * nf);
    let mu = (T::lit(3.0) / (a * a) - T::lit(3.0) / a + T::lit(0.5)).sqrt();
    let lambda = if a <= T::one() {
        if mu > T::one() {
            // f is convex; its integer minimum on [1, N] sits next to μ.
            let top = nf;
            let lo = mu.floor().max(T::one()).min(top);
            let hi = mu.ceil().max(T::one()).min(top);
            lambda_f(a, lo).min(lambda_f(a, hi))
        } else {
            lambda_f(a, T::one())
        }
    } else {
        lambda_bruteforce(a, scales)
    };
    let slope = bounded_constant::<T>(arity) * lambda.sqrt() / (a * nf.sqrt());
    Ok(UniformSpec {
        spec,
        a,
        mu,
        lambda,
        slope,
    })
}

/// Two distinct in-frame diagrams with identical `φ₃` images.
///
/// Both points have persistence exactly `gap >= R_1/10` and lie at least
/// `gap` apart horizontally, so their bottleneck distance is `gap / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness<T> {
    pub first: PersistenceDiagram<T>,
    pub second: PersistenceDiagram<T>,
    /// Realized persistence `death - birth` of both points.
    pub gap: T,
    pub bottleneck: T,
}

/// True if a point `(a, a + eps)` avoids every grid ball at scale `r`.
///
/// The point can only enter the ball of `(mR, (m+3)R)`, which happens for
/// `a` in `((m + 1.5)R - eps, (m + 1.5)R)`.
fn clear_of_grid<T: Scalar>(a: T, eps: T, r: T) -> bool {
    let slack = eps * T::lit(1e-6);
    let centre = (a / r - T::lit(1.5)).floor().to_i64().unwrap_or(0);
    (centre - 2..=centre + 2)
        .filter(|m| *m >= 1 && m % 2 == 1)
        .all(|m| {
            let edge = (T::from_key(m) + T::lit(1.5)) * r;
            !(a > edge - eps - slack && a < edge + slack)
        })
}

/// Finds two one-point diagrams `(a, a+ε)`, `(a', a'+ε)` near the diagonal
/// that only meet the diagonal's ball at every scale, so `φ₃` cannot tell
/// them apart.
pub fn non_injectivity_witness<T: Scalar>(spec: &BoundedEmbeddingSpec<T>) -> Result<Witness<T>> {
    let eps = spec.scales[0] / T::lit(10.0);
    let half = eps / T::lit(2.0);
    let frame = spec.frame;
    // Admissible points seen so far; partners must share the realized gap.
    let mut seen: Vec<(T, T)> = Vec::new();
    let mut j = 0usize;
    loop {
        let a = frame / T::lit(2.0) - T::from_count(j) * half;
        j += 1;
        if a < T::zero() {
            break;
        }
        let mut death = a + eps;
        while death - a < eps {
            // Rounding lost part of ε; step up by at least one ulp.
            death = death + death * T::epsilon();
        }
        let gap = death - a;
        if death > frame || !spec.scales.iter().all(|&r| clear_of_grid(a, gap, r)) {
            continue;
        }
        for &(a0, d0) in &seen {
            if d0 - a0 == gap && (a0 - a).abs() >= eps {
                if let Some(w) = verify_witness(spec, (a0, d0), (a, death))? {
                    return Ok(w);
                }
            }
        }
        seen.push((a, death));
    }
    Err(Error::WitnessUnavailable(format!(
        "frame {frame} leaves no two admissible abscissas for ε = {eps}"
    )))
}

fn verify_witness<T: Scalar>(
    spec: &BoundedEmbeddingSpec<T>,
    p: (T, T),
    q: (T, T),
) -> Result<Option<Witness<T>>> {
    let n = spec.arity;
    let x = PersistenceDiagram::from_pairs(&[p], n)?;
    let y = PersistenceDiagram::from_pairs(&[q], n)?;
    for &r in &spec.scales {
        for d in [&x, &y] {
            for point in d.points() {
                if grid_candidates(point, r)? != vec![GridKey::Diagonal] {
                    return Ok(None);
                }
            }
        }
    }
    if phi3(&x, spec)? != phi3(&y, spec)? {
        return Ok(None);
    }
    let bottleneck = bottleneck_distance(&x, &y)?;
    if !(bottleneck > T::zero()) {
        return Ok(None);
    }
    Ok(Some(Witness {
        first: x,
        second: y,
        gap: p.1 - p.0,
        bottleneck,
    }))
}

/// Sparse `φ₃` entries keyed by text key, for serialization.
pub fn phi3_text_entries<T: Scalar>(image: &Phi3Image<T>) -> BTreeMap<String, T> {
    image
        .entries()
        .map(|(i, k, v)| (k.to_text(i), v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(pairs: &[(f64, f64)], n: usize) -> PersistenceDiagram<f64> {
        PersistenceDiagram::from_pairs(pairs, n).unwrap()
    }

    #[test]
    fn counts_at_coarse_and_fine_scales() {
        assert_eq!(count_landmarks(8.0, 8.0, 1).unwrap(), 1);
        assert_eq!(count_landmarks(1.0, 8.0, 1).unwrap(), 7);
        let g = eligible_grid_keys(1.0, 8.0);
        let want: Vec<GridKey> = [(1, 4), (1, 6), (1, 8), (3, 6), (3, 8), (5, 8)]
            .iter()
            .map(|&(m, k)| GridKey::new(m, k).unwrap())
            .collect();
        assert_eq!(g, want);
        assert_eq!(count_landmarks(1.0, 8.0, 2).unwrap(), 28);
        assert!(count_landmarks(2.0, 1.0, 1).is_err());
        assert!(count_landmarks(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn eligible_keys_match_ball_scan() {
        // Oracle: a key is eligible iff some frame point lies in its ball;
        // scan a fine grid of frame points.
        let (r, frame) = (0.9, 6.0);
        let mut hit = std::collections::BTreeSet::new();
        let steps = 240;
        for i in 0..=steps {
            for j in (i + 1)..=steps {
                let b = frame * i as f64 / steps as f64;
                let d = frame * j as f64 / steps as f64;
                let p = crate::diagram::DiagramPoint::new(b, d).unwrap();
                for g in grid_candidates(&p, r).unwrap() {
                    if g != GridKey::Diagonal {
                        hit.insert(g);
                    }
                }
            }
        }
        let got: std::collections::BTreeSet<GridKey> = eligible_grid_keys(r, frame).into_iter().collect();
        assert_eq!(got, hit);
    }

    #[test]
    fn spec_validation() {
        assert!(BoundedEmbeddingSpec::new(5.0, vec![1.0, 2.0], vec![0.6, 0.8], 2).is_ok());
        assert!(BoundedEmbeddingSpec::new(5.0, vec![2.0, 1.0], vec![0.6, 0.8], 2).is_err());
        assert!(BoundedEmbeddingSpec::new(5.0, vec![1.0, 6.0], vec![0.6, 0.8], 2).is_err());
        assert!(BoundedEmbeddingSpec::new(5.0, vec![1.0, 2.0], vec![0.6, 0.7], 2).is_err());
        assert!(BoundedEmbeddingSpec::new(5.0, vec![], vec![], 2).is_err());
        assert!(BoundedEmbeddingSpec::new(0.0, vec![1.0], vec![1.0], 2).is_err());
    }

    #[test]
    fn phi3_of_empty_diagram() {
        let spec = BoundedEmbeddingSpec::new(5.0, vec![1.0, 2.0], vec![0.6, 0.8], 2).unwrap();
        let img = phi3(&diag(&[], 2), &spec).unwrap();
        assert_eq!(img.nnz(), 2);
        let want = [0.6 * 0.25 * 1.5, 0.8 * 0.25 * 3.0];
        for (b, w) in img.blocks.iter().zip(want) {
            assert!((b.get(&LandmarkKey::diagonal(2)) - w).abs() < 1e-15);
        }
    }

    #[test]
    fn phi3_rejects_out_of_frame() {
        let spec = BoundedEmbeddingSpec::new(5.0, vec![1.0], vec![1.0], 1).unwrap();
        assert!(matches!(
            phi3(&diag(&[(1.0, 6.0)], 1), &spec),
            Err(Error::OutsideFrame { .. })
        ));
        assert!(phi3(&diag(&[(0.0, 5.0)], 1), &spec).is_ok());
    }

    #[test]
    fn dense_layout_ranks_match_enumeration() {
        let spec = BoundedEmbeddingSpec::new(6.0, vec![1.0, 2.0], vec![0.6, 0.8], 3).unwrap();
        let layout = DenseLayout::new(&spec, DEFAULT_DENSE_CAP).unwrap();
        let keys = layout.keys();
        assert_eq!(keys.len(), layout.len());
        assert_eq!(keys.len() as u128, spec.dense_len().unwrap());
        for (pos, text) in keys.iter().enumerate() {
            let (idx, key) = LandmarkKey::parse_text(text).unwrap();
            assert_eq!(layout.index(idx - 1, &key).unwrap(), pos, "{text}");
        }
        assert_eq!(keys[0], "s1:D;D;D");
    }

    #[test]
    fn dense_and_sparse_agree() {
        let spec = BoundedEmbeddingSpec::new(6.0, vec![1.0, 2.0], vec![0.6, 0.8], 2).unwrap();
        let x = diag(&[(0.3, 4.1), (2.0, 5.5)], 2);
        let y = diag(&[(1.1, 2.9)], 2);
        let (ix, iy) = (phi3(&x, &spec).unwrap(), phi3(&y, &spec).unwrap());
        let (dx, dy) = (
            ix.to_dense(&spec, DEFAULT_DENSE_CAP).unwrap(),
            iy.to_dense(&spec, DEFAULT_DENSE_CAP).unwrap(),
        );
        let dense_norm = dx.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dense_dist = dx.iter().zip(&dy).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!((dense_norm - ix.norm()).abs() < 1e-12);
        assert!((dense_dist - ix.distance(&iy).unwrap()).abs() < 1e-12);
        assert!(matches!(ix.to_dense(&spec, 3), Err(Error::DenseTooLarge { .. })));
    }

    #[test]
    fn step_function_values() {
        let spec = BoundedEmbeddingSpec::new(4.0, vec![1.5], vec![1.0], 2).unwrap();
        let q = 1.0 / (3.0 * 2f64.powf(4.5));
        assert_eq!(rho3_steps(&spec, 1.0).unwrap(), 0.0);
        assert_eq!(rho3_linear(&spec, 1.0).unwrap(), 0.0);
        assert!((rho3_steps(&spec, 1.5).unwrap() - q * 1.5).abs() < 1e-15);
        assert!((rho3_steps(&spec, 4.0).unwrap() - q * 1.5).abs() < 1e-15);
        assert!(rho3_steps(&spec, -0.1).is_err());
        assert!(matches!(rho3_linear(&spec, 4.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn linear_bound_below_steps() {
        for (frame, scales, weights) in [
            (5.0, vec![1.0, 2.0, 3.0, 4.0], vec![0.5; 4]),
            (4.0, vec![1.5], vec![1.0]),
            (10.0, vec![0.5, 0.7, 3.0, 9.5], vec![0.1, 0.7, 0.7, 0.1]),
        ] {
            let norm: f64 = weights.iter().map(|w: &f64| w * w).sum::<f64>().sqrt();
            let weights: Vec<f64> = weights.iter().map(|w| w / norm).collect();
            let spec = BoundedEmbeddingSpec::new(frame, scales, weights, 3).unwrap();
            for i in 0..=4000 {
                let t = frame * i as f64 / 4000.0;
                let lin = rho3_linear(&spec, t).unwrap();
                let step = rho3_steps(&spec, t).unwrap();
                assert!(lin <= step + 1e-15, "t={t}: {lin} > {step}");
            }
        }
    }

    #[test]
    fn lambda_at_unit_a() {
        let u = uniform_spec(1.0, 5.0, 4, 4).unwrap();
        assert_eq!(u.a, 1.0);
        assert!((u.mu - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(u.lambda, 1.0);
        assert_eq!(lambda_bruteforce(1.0, 4), 1.0);
    }

    #[test]
    fn lambda_f_matches_sequence() {
        for a in [0.1, 0.37, 1.0, 2.5] {
            let mut acc = 0.0;
            for i in 1..30usize {
                let r = 1.0 + (i - 1) as f64 * a;
                acc += r * r;
                let direct = acc / (i * i) as f64;
                assert!((lambda_f(a, i as f64) - direct).abs() < 1e-12 * direct.max(1.0));
            }
        }
    }

    #[test]
    fn uniform_slope_matches_theorem_slope() {
        // The closed-form slope equals the chord minimum over step corners.
        for (m, big_m, n_scales) in [(1.0, 5.0, 4), (1.0, 5.0, 19), (0.5, 3.0, 7), (2.0, 3.0, 12)] {
            let u = uniform_spec::<f64>(m, big_m, n_scales, 2).unwrap();
            let chord = rho3_linear_slope(&u.spec);
            assert!((u.slope - chord).abs() < 1e-12 * chord, "{m} {big_m} {n_scales}");
        }
    }

    #[test]
    fn uniform_spec_errors() {
        assert!(uniform_spec(0.0, 5.0, 4, 1).is_err());
        assert!(uniform_spec(2.0, 1.0, 4, 1).is_err());
        assert!(uniform_spec(1.0, 5.0, 0, 1).is_err());
    }

    #[test]
    fn witness_for_example_spec() {
        let u = uniform_spec(1.0, 5.0, 4, 2).unwrap();
        let w = non_injectivity_witness(&u.spec).unwrap();
        assert_ne!(w.first, w.second);
        assert!(w.bottleneck > 0.0);
        assert_eq!(w.bottleneck, w.gap / 2.0);
        let (a, b) = (phi3(&w.first, &u.spec).unwrap(), phi3(&w.second, &u.spec).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.distance(&b).unwrap(), 0.0);
        assert!(w.first.in_frame(5.0) && w.second.in_frame(5.0));
    }
}
