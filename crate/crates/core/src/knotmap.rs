//! Maps from swarm coordinates to knot vectors, and the post-processing that
//! resolves several knots falling between two consecutive predictor values.
//!
//! A model with `M` distinct knots is searched either over all `M` knot
//! locations (variable end knots) or over the `M - 2` interior ones with the
//! ends pinned at 0 and 1 (fixed end knots).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bspline::KnotVector;
use crate::error::{Result, ShapesError};
use crate::scalar::Scalar;

/// Interior coordinates of the centered-monotonic map are kept this far from 0 and 1.
pub const CM_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    /// Sort the coordinates.
    Plain,
    /// Coordinates are relative positions of each knot between its neighbors.
    CenteredMonotonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndKnots {
    Fixed,
    Variable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnotAdjust {
    Merge,
    Heal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnotMapOptions {
    pub map_kind: MapKind,
    pub end_knots: EndKnots,
    pub adjust: KnotAdjust,
    pub order: usize,
}

impl Default for KnotMapOptions {
    fn default() -> Self {
        Self {
            map_kind: MapKind::Plain,
            end_knots: EndKnots::Fixed,
            adjust: KnotAdjust::Merge,
            order: 4,
        }
    }
}

impl KnotMapOptions {
    /// Dimension of the swarm search space for a model with `m` distinct knots.
    pub fn search_dim(&self, m: usize) -> usize {
        match self.end_knots {
            EndKnots::Fixed => m.saturating_sub(2),
            EndKnots::Variable => m,
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapKind::Plain => "plain",
            MapKind::CenteredMonotonic => "centered-monotonic",
        })
    }
}

fn too_few(m: usize) -> ShapesError {
    ShapesError::InvalidConfig(format!("a knot map needs at least 2 distinct knots, got {m}"))
}

/// Sorted distinct-knot locations before end replication.
fn plain_base<T: Scalar>(z: &[T], end_knots: EndKnots) -> Result<Vec<T>> {
    let mut base = Vec::with_capacity(z.len() + 2);
    if end_knots == EndKnots::Fixed {
        base.push(T::zero());
    }
    base.extend_from_slice(z);
    if end_knots == EndKnots::Fixed {
        base.push(T::one());
    }
    if base.len() < 2 {
        return Err(too_few(base.len()));
    }
    if base.iter().any(|v| !v.is_finite()) {
        return Err(ShapesError::InvalidKnots("non-finite coordinate".into()));
    }
    base.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(base)
}

/// Solves `τ_i = (1 - z_i) τ_{i-1} + z_i τ_{i+1}` for the interior knots with
/// the two end knots given (Thomas algorithm; diagonally dominant for z in (0,1)).
fn cm_interior<T: Scalar>(z_interior: &[T], first: T, last: T) -> Vec<T> {
    let n = z_interior.len();
    let eps = T::lit(CM_EPSILON);
    let z: Vec<T> = z_interior
        .iter()
        .map(|&v| v.max(eps).min(T::one() - eps))
        .collect();
    // forward sweep on rows  -(1-z_i) τ_{i-1} + τ_i - z_i τ_{i+1} = d_i
    let mut c_prime = vec![T::zero(); n];
    let mut d_prime = vec![T::zero(); n];
    for i in 0..n {
        let sub = -(T::one() - z[i]);
        let sup = -z[i];
        let mut d = T::zero();
        if i == 0 {
            d = d + (T::one() - z[i]) * first;
        }
        if i + 1 == n {
            d = d + z[i] * last;
        }
        let (denom, d_prev) = if i == 0 {
            (T::one(), T::zero())
        } else {
            (T::one() - sub * c_prime[i - 1], d_prime[i - 1])
        };
        c_prime[i] = sup / denom;
        d_prime[i] = if i == 0 { d } else { (d - sub * d_prev) / denom };
    }
    let mut tau = vec![T::zero(); n];
    for i in (0..n).rev() {
        tau[i] = if i + 1 == n { d_prime[i] } else { d_prime[i] - c_prime[i] * tau[i + 1] };
    }
    tau
}

fn cm_base<T: Scalar>(z: &[T], end_knots: EndKnots) -> Result<Vec<T>> {
    if z.iter().any(|v| !v.is_finite()) {
        return Err(ShapesError::InvalidKnots("non-finite coordinate".into()));
    }
    let (first, last, interior) = match end_knots {
        EndKnots::Fixed => (T::zero(), T::one(), z),
        EndKnots::Variable => {
            if z.len() < 2 {
                return Err(too_few(z.len()));
            }
            let first = z[0];
            let last = first + z[z.len() - 1] * (T::one() - first);
            (first, last, &z[1..z.len() - 1])
        }
    };
    let mut base = Vec::with_capacity(interior.len() + 2);
    base.push(first);
    base.extend(cm_interior(interior, first, last));
    base.push(last);
    Ok(base)
}

/// Coordinates that the centered-monotonic map sends to the distinct knots
/// `tau` (variable-end layout, `M` values).
pub fn centered_monotonic_coordinates<T: Scalar>(tau: &[T]) -> Result<Vec<T>> {
    let m = tau.len();
    if m < 2 {
        return Err(too_few(m));
    }
    let mut z = Vec::with_capacity(m);
    z.push(tau[0]);
    for i in 1..m - 1 {
        z.push((tau[i] - tau[i - 1]) / (tau[i + 1] - tau[i - 1]));
    }
    z.push((tau[m - 1] - tau[0]) / (T::one() - tau[0]));
    Ok(z)
}

fn replicate_ends<T: Scalar>(base: &[T], k: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(base.len() + 2 * (k - 1));
    out.extend(std::iter::repeat(base[0]).take(k - 1));
    out.extend_from_slice(base);
    out.extend(std::iter::repeat(base[base.len() - 1]).take(k - 1));
    out
}

/// Plain map: sort `z`, then repeat the smallest and largest values `k - 1`
/// more times. With fixed end knots `z` holds only the interior knots.
pub fn plain_map<T: Scalar>(z: &[T], options: &KnotMapOptions) -> Result<KnotVector<T>> {
    let base = plain_base(z, options.end_knots)?;
    KnotVector::new(replicate_ends(&base, options.order), options.order)
}

/// Centered-monotonic map; always yields a nondecreasing knot sequence.
pub fn centered_monotonic_map<T: Scalar>(z: &[T], options: &KnotMapOptions) -> Result<KnotVector<T>> {
    let base = cm_base(z, options.end_knots)?;
    KnotVector::new(replicate_ends(&base, options.order), options.order)
}

/// Index `j` of the open predictor interval `(x_j, x_{j+1})` strictly containing `t`.
fn interval_of<T: Scalar>(grid: &[T], t: T) -> Option<usize> {
    let j = grid.partition_point(|&x| x < t);
    if j == 0 || j == grid.len() || grid[j] == t {
        None
    } else {
        Some(j - 1)
    }
}

/// A group of coincident interior knots that moves as one piece while healing.
#[derive(Debug, Clone, Copy)]
struct Unit<T> {
    value: T,
    mult: usize,
}

/// Moves units until no open predictor interval holds more than one.
///
/// In each pass every overcrowded interval sends one boundary unit to the
/// midpoint of the nearest empty interval in that direction, or the opposite
/// direction if none exists. The unit with the lower multiplicity moves, so
/// merged groups stay put; between equals, the one with the larger gap to its
/// outward neighbor moves.
fn heal_units<T: Scalar>(units: &mut [Unit<T>], lo: T, hi: T, grid: &[T], max_passes: usize) -> Result<()> {
    let n_int = grid.len().saturating_sub(1);
    for _ in 0..max_passes {
        units.sort_by(|a, b| a.value.partial_cmp(&b.value).expect("finite knots"));
        let slots: Vec<Option<usize>> = units.iter().map(|u| interval_of(grid, u.value)).collect();
        let mut occupied = vec![false; n_int];
        for j in slots.iter().flatten().chain(interval_of(grid, lo).iter()).chain(interval_of(grid, hi).iter()) {
            occupied[*j] = true;
        }
        let usable = |j: usize, occupied: &[bool]| {
            let mid = (grid[j] + grid[j + 1]) / T::lit(2.0);
            !occupied[j] && mid > lo && mid < hi
        };
        let find = |j: usize, leftward: bool, occupied: &[bool]| -> Option<usize> {
            if leftward {
                (0..j).rev().find(|&c| usable(c, occupied))
            } else {
                (j + 1..n_int).find(|&c| usable(c, occupied))
            }
        };

        let mut moves = Vec::new();
        let mut i = 0;
        while i < units.len() {
            let Some(j) = slots[i] else {
                i += 1;
                continue;
            };
            let mut e = i;
            while e + 1 < units.len() && slots[e + 1] == Some(j) {
                e += 1;
            }
            if e > i {
                let prev = if i == 0 { lo } else { units[i - 1].value };
                let next = if e + 1 == units.len() { hi } else { units[e + 1].value };
                let leftward = if units[i].mult != units[e].mult {
                    units[i].mult < units[e].mult
                } else {
                    units[i].value - prev >= next - units[e].value
                };
                let choice = find(j, leftward, &occupied)
                    .map(|t| (t, leftward))
                    .or_else(|| find(j, !leftward, &occupied).map(|t| (t, !leftward)));
                let Some((target, went_left)) = choice else {
                    return Err(ShapesError::Unhealable(format!(
                        "no empty predictor interval left for the knots near {}",
                        units[i].value
                    )));
                };
                occupied[target] = true;
                let idx = if went_left { i } else { e };
                moves.push((idx, (grid[target] + grid[target + 1]) / T::lit(2.0)));
            }
            i = e + 1;
        }
        if moves.is_empty() {
            return Ok(());
        }
        for (idx, v) in moves {
            units[idx].value = v;
        }
    }
    Err(ShapesError::Unhealable(format!("knots still overcrowded after {max_passes} passes")))
}

fn expand<T: Scalar>(first: T, last: T, units: &[Unit<T>], k: usize) -> Vec<T> {
    let mut out = Vec::new();
    out.extend(std::iter::repeat(first).take(k));
    for u in units {
        out.extend(std::iter::repeat(u.value).take(u.mult));
    }
    out.extend(std::iter::repeat(last).take(k));
    out
}

/// Splits a full knot sequence into end values and interior knots.
fn split_full<T: Scalar>(values: &[T], k: usize) -> Result<(T, T, &[T])> {
    let p = values.len();
    if p < 2 * k {
        return Err(ShapesError::InvalidKnots(format!("{p} knots for order {k}")));
    }
    Ok((values[0], values[p - 1], &values[k..p - k]))
}

fn heal_full<T: Scalar>(values: &[T], k: usize, grid: &[T]) -> Result<Vec<T>> {
    let (first, last, interior) = split_full(values, k)?;
    let mut units: Vec<Unit<T>> = interior.iter().map(|&value| Unit { value, mult: 1 }).collect();
    heal_units(&mut units, first, last, grid, 10 * (interior.len() + 2))?;
    Ok(expand(first, last, &units, k))
}

fn merge_full<T: Scalar>(values: &[T], k: usize, grid: &[T]) -> Result<Vec<T>> {
    let (first, last, interior) = split_full(values, k)?;
    let slots: Vec<Option<usize>> = interior.iter().map(|&t| interval_of(grid, t)).collect();
    let mut units = Vec::with_capacity(interior.len());
    let mut i = 0;
    while i < interior.len() {
        let mut e = i;
        if slots[i].is_some() {
            while e + 1 < interior.len() && slots[e + 1] == slots[i] {
                e += 1;
            }
        }
        // right to left: each chunk of at most k knots collapses onto its rightmost
        let mut chunks = Vec::new();
        let mut end = e + 1;
        while end > i {
            let start = end.saturating_sub(k).max(i);
            chunks.push(Unit { value: interior[end - 1], mult: end - start });
            end = start;
        }
        units.extend(chunks.into_iter().rev());
        i = e + 1;
    }
    heal_units(&mut units, first, last, grid, 10 * (interior.len() + 2))?;
    Ok(expand(first, last, &units, k))
}

/// Collapses interior knots that share an open predictor interval onto the
/// rightmost one (up to multiplicity `k`, then onto the next rightmost, and so
/// on); several merged groups left in one interval are dispersed by healing.
pub fn merge_knots<T: Scalar>(knots: &KnotVector<T>, grid: &[T]) -> Result<KnotVector<T>> {
    KnotVector::new(merge_full(knots.values(), knots.order(), grid)?, knots.order())
}

/// Disperses interior knots so that no open predictor interval holds more than one.
pub fn heal_knots<T: Scalar>(knots: &KnotVector<T>, grid: &[T]) -> Result<KnotVector<T>> {
    KnotVector::new(heal_full(knots.values(), knots.order(), grid)?, knots.order())
}

/// Full map from a swarm position to a valid knot vector: knot map, end
/// replication, then merge or heal against the predictor grid.
pub fn map_to_knots<T: Scalar>(z: &[T], grid: &[T], options: &KnotMapOptions) -> Result<KnotVector<T>> {
    let k = options.order;
    if k == 0 {
        return Err(ShapesError::InvalidConfig("spline order must be at least 1".into()));
    }
    let base = match options.map_kind {
        MapKind::Plain => plain_base(z, options.end_knots)?,
        MapKind::CenteredMonotonic => cm_base(z, options.end_knots)?,
    };
    let full = replicate_ends(&base, k);
    let adjusted = match options.adjust {
        KnotAdjust::Merge => merge_full(&full, k, grid)?,
        KnotAdjust::Heal => heal_full(&full, k, grid)?,
    };
    KnotVector::new(adjusted, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(map_kind: MapKind, end_knots: EndKnots) -> KnotMapOptions {
        KnotMapOptions { map_kind, end_knots, adjust: KnotAdjust::Merge, order: 4 }
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    fn cubic(interior: &[f64]) -> KnotVector<f64> {
        let mut v = vec![0.0; 4];
        v.extend_from_slice(interior);
        v.extend([1.0; 4]);
        KnotVector::new(v, 4).unwrap()
    }

    #[test]
    fn plain_sorts_and_replicates() {
        let kv = plain_map(&[0.7, 0.2, 0.5], &opts(MapKind::Plain, EndKnots::Variable)).unwrap();
        assert_eq!(kv.values(), &[0.2, 0.2, 0.2, 0.2, 0.5, 0.7, 0.7, 0.7, 0.7]);
        let perm = plain_map(&[0.5, 0.7, 0.2], &opts(MapKind::Plain, EndKnots::Variable)).unwrap();
        assert_eq!(kv, perm);
    }

    #[test]
    fn plain_fixed_ends() {
        let kv = plain_map(&[0.6, 0.3, 0.9], &opts(MapKind::Plain, EndKnots::Fixed)).unwrap();
        assert_eq!(kv.len(), 5 + 6);
        assert_eq!(&kv.values()[3..8], &[0.0, 0.3, 0.6, 0.9, 1.0]);
    }

    #[test]
    fn plain_needs_two_knots() {
        assert!(plain_map(&[0.5], &opts(MapKind::Plain, EndKnots::Variable)).is_err());
    }

    #[test]
    fn cm_small_case() {
        let kv = centered_monotonic_map(&[0.2f64, 0.5, 1.0], &opts(MapKind::CenteredMonotonic, EndKnots::Variable))
            .unwrap();
        let v = &kv.values()[3..6];
        assert!((v[0] - 0.2).abs() < 1e-15);
        assert!((v[1] - 0.6).abs() < 1e-15);
        assert!((v[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cm_center_is_uniform() {
        let kv = centered_monotonic_map(&[0.5; 6], &opts(MapKind::CenteredMonotonic, EndKnots::Fixed)).unwrap();
        let base = &kv.values()[3..11];
        for (i, &t) in base.iter().enumerate() {
            assert!((t - i as f64 / 7.0).abs() < 1e-12, "{base:?}");
        }
    }

    #[test]
    fn cm_degenerate_coordinates_are_clamped() {
        let kv = centered_monotonic_map(&[0.0, 1.0, 0.5], &opts(MapKind::CenteredMonotonic, EndKnots::Fixed))
            .unwrap();
        assert!(kv.values().windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn merge_two_in_one_interval() {
        let g = grid(11);
        let kv = cubic(&[0.32, 0.37, 0.6]);
        let merged = merge_knots(&kv, &g).unwrap();
        assert_eq!(&merged.values()[4..7], &[0.37, 0.37, 0.6]);
        assert_eq!(merged.len(), kv.len());
    }

    #[test]
    fn merge_five_in_one_interval() {
        let g = grid(11);
        let kv = cubic(&[0.41, 0.42, 0.43, 0.44, 0.45]);
        let merged = merge_knots(&kv, &g).unwrap();
        let interior = &merged.values()[4..9];
        assert_eq!(interior.iter().filter(|&&t| t == 0.45).count(), 4);
        let other: Vec<f64> = interior.iter().copied().filter(|&t| t != 0.45).collect();
        assert_eq!(other.len(), 1);
        // 0.41 had the larger outward gap (to the end knot at 0), so it went left
        assert!((other[0] - 0.35).abs() < 1e-12, "{other:?}");
    }

    #[test]
    fn merge_is_identity_when_sparse() {
        let g = grid(11);
        let kv = cubic(&[0.15, 0.45, 0.75]);
        assert_eq!(merge_knots(&kv, &g).unwrap(), kv);
        assert_eq!(heal_knots(&kv, &g).unwrap(), kv);
    }

    #[test]
    fn heal_moves_toward_larger_gap() {
        let g = grid(11);
        // 0.52 is 0.22 from 0.3, 0.55 is 0.35 from 0.9: the right one moves right
        let kv = cubic(&[0.3, 0.52, 0.55, 0.9]);
        let healed = heal_knots(&kv, &g).unwrap();
        let interior = &healed.values()[4..8];
        assert_eq!(interior[0], 0.3);
        assert_eq!(interior[1], 0.52);
        assert!((interior[2] - 0.65).abs() < 1e-12);
        assert_eq!(interior[3], 0.9);
    }

    #[test]
    fn heal_fails_when_no_room() {
        let g = grid(3);
        let kv = cubic(&[0.1, 0.2, 0.3]);
        assert!(matches!(heal_knots(&kv, &g), Err(ShapesError::Unhealable(_))));
    }

    #[test]
    fn search_dimension() {
        let mut o = KnotMapOptions::default();
        assert_eq!(o.search_dim(7), 5);
        o.end_knots = EndKnots::Variable;
        assert_eq!(o.search_dim(7), 7);
    }
}
