//! Strong consistency: checking, conflict-quartet enumeration, the sorted-list
//! 4-approximation and an exact minimum hitting-set solver.
//!
//! Two point-pairs are strongly consistent when every metric induces the same
//! `{<, =, >}` relation between their distances. A system is strongly
//! consistent when all pairs of pairs are. The points of a violating pair of
//! pairs form a *conflict quartet* (3 or 4 points); a subset `S` restores
//! consistency exactly when it hits every conflict quartet, which is what
//! both solvers exploit.

use crate::metric::{MetricSystem, PairId, PointId};
use crate::relation::Relation;
use num_traits::ToPrimitive;
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::time::Instant;
use thiserror::Error;

/// Default point-count guard for exact search.
pub const DEFAULT_EXACT_GUARD: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("instance has {n} points, exceeding the exact-search guard of {guard}")]
    TooLarge { n: usize, guard: usize },
}

/// Counters reported alongside a solve.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Exact distance comparisons performed.
    pub comparisons: u64,
    /// Wall time of the solve.
    pub wall_time_micros: u128,
    /// Disjoint conflict groups committed to the outlier set (quartets for
    /// the strong solvers, triangles for the weak ones).
    pub groups_removed: usize,
    /// Directed triangles enumerated (weak solvers only).
    pub triangles_seen: Option<u64>,
}

/// Outlier set together with the consistency certificate of what remains.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub outliers: BTreeSet<PointId>,
    pub consensus_size: usize,
    /// Verdict of the consistency re-check on the surviving points.
    pub certified_consistent: bool,
    pub stats: SolveStats,
}

/// Which two metrics disagree on a pair of pairs, and how.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictWitness {
    pub metric_a: usize,
    pub metric_b: usize,
    pub relation_a: Relation,
    pub relation_b: Relation,
}

/// Two point-pairs whose distance relation differs between two metrics,
/// together with their 3 or 4 underlying points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictQuartet {
    pub pair_a: PairId,
    pub pair_b: PairId,
    pub points: BTreeSet<PointId>,
    pub witness: ConflictWitness,
}

fn relation_under(sys: &MetricSystem, metric: usize, p: PairId, q: PairId) -> Relation {
    Relation::from_ordering(sys.distance(metric, p).cmp(sys.distance(metric, q)))
}

/// True when all metrics induce the same relation between `d(p)` and `d(q)`,
/// covering both the order-flip and equality-mismatch readings.
pub fn pairs_strongly_consistent(sys: &MetricSystem, p: PairId, q: PairId) -> bool {
    assert_ne!(p, q);
    let first = relation_under(sys, 0, p, q);
    (1..sys.metric_count()).all(|i| relation_under(sys, i, p, q) == first)
}

fn quartet_of(sys: &MetricSystem, p: PairId, q: PairId) -> ConflictQuartet {
    let first = relation_under(sys, 0, p, q);
    let other = (1..sys.metric_count())
        .find(|&i| relation_under(sys, i, p, q) != first)
        .expect("caller established a disagreement");
    let mut points = BTreeSet::new();
    points.extend(p.points());
    points.extend(q.points());
    ConflictQuartet {
        pair_a: p.min(q),
        pair_b: p.max(q),
        points,
        witness: ConflictWitness {
            metric_a: 0,
            metric_b: other,
            relation_a: first,
            relation_b: relation_under(sys, other, p, q),
        },
    }
}

fn shares_point(p: PairId, q: PairId) -> bool {
    q.contains(p.first()) || q.contains(p.second())
}

/// Lexicographically first conflict quartet, or `None` when the system is
/// strongly consistent. With `distinct_points_only`, pairs sharing a point
/// are not compared (the narrower quartet reading).
pub fn find_conflict_quartet(
    sys: &MetricSystem,
    distinct_points_only: bool,
) -> Option<ConflictQuartet> {
    let pairs: Vec<PairId> = sys.pairs().collect();
    for a in 0..pairs.len() {
        for b in a + 1..pairs.len() {
            if distinct_points_only && shares_point(pairs[a], pairs[b]) {
                continue;
            }
            if !pairs_strongly_consistent(sys, pairs[a], pairs[b]) {
                return Some(quartet_of(sys, pairs[a], pairs[b]));
            }
        }
    }
    None
}

pub fn is_strongly_consistent(sys: &MetricSystem) -> bool {
    find_conflict_quartet(sys, false).is_none()
}

/// Every conflicting pair of pairs, in lexicographic order. Note that several
/// entries may cover the same underlying point set.
pub fn enumerate_conflict_quartets(
    sys: &MetricSystem,
    distinct_points_only: bool,
) -> Vec<ConflictQuartet> {
    let pairs: Vec<PairId> = sys.pairs().collect();
    let mut out = Vec::new();
    for a in 0..pairs.len() {
        for b in a + 1..pairs.len() {
            if distinct_points_only && shares_point(pairs[a], pairs[b]) {
                continue;
            }
            if !pairs_strongly_consistent(sys, pairs[a], pairs[b]) {
                out.push(quartet_of(sys, pairs[a], pairs[b]));
            }
        }
    }
    out
}

/// Repair sweep state: the surviving pairs in metric 1's sorted order as a
/// doubly linked chain, so removing a quartet only disturbs the adjacencies
/// around the pairs it knocks out.
///
/// Strong consistency of the survivors is equivalent to every *consecutive*
/// duo of the chain having the same relation under all metrics (agreement
/// propagates along the chain by transitivity), so once the worklist of
/// dirty adjacencies drains, the survivors are certified consistent.
struct RepairChain<'a> {
    sys: &'a MetricSystem,
    pairs: &'a [PairId],
    order: &'a [usize],
    /// Chain links by position in `order`; `order.len()` is the sentinel.
    next: Vec<usize>,
    prev: Vec<usize>,
    linked: Vec<bool>,
    position_of_pair: Vec<usize>,
    pairs_of_point: Vec<Vec<u32>>,
    dirty: std::collections::VecDeque<usize>,
}

impl<'a> RepairChain<'a> {
    fn new(
        sys: &'a MetricSystem,
        pairs: &'a [PairId],
        order: &'a [usize],
        removed: &[bool],
    ) -> Self {
        let total = order.len();
        let sentinel = total;
        let mut next = vec![sentinel; total + 1];
        let mut prev = vec![sentinel; total + 1];
        let mut linked = vec![false; total + 1];
        let mut position_of_pair = vec![usize::MAX; total];
        let mut pairs_of_point: Vec<Vec<u32>> = vec![Vec::new(); sys.point_count()];
        for (position, &index) in order.iter().enumerate() {
            position_of_pair[index] = position;
            let pair = pairs[index];
            pairs_of_point[pair.first().0].push(index as u32);
            pairs_of_point[pair.second().0].push(index as u32);
        }
        let mut last = sentinel;
        let mut dirty = std::collections::VecDeque::new();
        for (position, &index) in order.iter().enumerate() {
            let pair = pairs[index];
            if removed[pair.first().0] || removed[pair.second().0] {
                continue;
            }
            linked[position] = true;
            prev[position] = last;
            next[last] = position;
            last = position;
            dirty.push_back(position);
        }
        next[last] = sentinel;
        RepairChain { sys, pairs, order, next, prev, linked, position_of_pair, pairs_of_point, dirty }
    }

    fn pair_at(&self, position: usize) -> PairId {
        self.pairs[self.order[position]]
    }

    /// Unlinks every surviving pair that touches `point` and marks the
    /// preceding chain positions dirty (they gained a new successor).
    fn drop_point(&mut self, point: PointId) {
        for i in 0..self.pairs_of_point[point.0].len() {
            let index = self.pairs_of_point[point.0][i] as usize;
            let position = self.position_of_pair[index];
            if !self.linked[position] {
                continue;
            }
            self.linked[position] = false;
            let (before, after) = (self.prev[position], self.next[position]);
            self.next[before] = after;
            self.prev[after] = before;
            if before != self.order.len() {
                self.dirty.push_back(before);
            }
        }
    }

    /// Next consecutive duo whose relation differs between two metrics.
    fn next_conflict(&mut self, comparisons: &mut u64) -> Option<(PairId, PairId)> {
        while let Some(position) = self.dirty.pop_front() {
            if !self.linked[position] {
                continue;
            }
            let successor = self.next[position];
            if successor == self.order.len() {
                continue;
            }
            let (u, v) = (self.pair_at(position), self.pair_at(successor));
            let base = relation_under(self.sys, 0, u, v);
            for i in 1..self.sys.metric_count() {
                *comparisons += 1;
                if relation_under(self.sys, i, u, v) != base {
                    // Re-examine this slot after the commit settles.
                    self.dirty.push_front(position);
                    return Some((u, v));
                }
            }
        }
        None
    }
}

/// Inline distance key for sort-heavy paths: `num/den + eps·ε` with bounds
/// that make cross-multiplied comparison exact in `i128`. Values that do not
/// fit (the power-of-two gadget coordinates at large sizes) fall back to
/// comparing the matrix entries themselves.
#[derive(Copy, Clone)]
struct CompactKey {
    num: i64,
    den: i64,
    eps: i64,
}

const COMPACT_BOUND: i64 = 1 << 62;

impl CompactKey {
    fn of(value: &crate::eps::EpsValue) -> Option<CompactKey> {
        let num = value.base().numer().to_i64()?;
        let den = value.base().denom().to_i64()?;
        let eps = value.eps_coeff().to_i64()?;
        (num.abs() < COMPACT_BOUND && den < COMPACT_BOUND).then_some(CompactKey { num, den, eps })
    }

    fn compare(&self, other: &CompactKey) -> Ordering {
        let base = if self.den == other.den {
            self.num.cmp(&other.num)
        } else {
            (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
        };
        base.then_with(|| self.eps.cmp(&other.eps))
    }
}

/// Pair indices sorted ascending by distance under `metric`, ties broken by
/// pair order.
fn sorted_pair_order(
    sys: &MetricSystem,
    metric: usize,
    pairs: &[PairId],
    comparisons: &mut u64,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let keys: Option<Vec<CompactKey>> =
        pairs.iter().map(|p| CompactKey::of(sys.distance(metric, *p))).collect();
    let mut count: u64 = 0;
    match keys {
        Some(keys) => order.sort_by(|&x, &y| {
            count += 1;
            keys[x].compare(&keys[y]).then(x.cmp(&y))
        }),
        None => order.sort_by(|&x, &y| {
            count += 1;
            sys.distance(metric, pairs[x]).cmp(sys.distance(metric, pairs[y])).then(x.cmp(&y))
        }),
    }
    *comparisons += count;
    order
}

/// Sorted-list 4-approximation for the minimum strongly inconsistent subset.
///
/// Each metric's pairs are sorted ascending by distance, ties broken by pair
/// order. Pointers sweep the lists in lockstep, skipping pairs that touch the
/// outlier set; the first position where list `i` disagrees with list 1
/// exposes a conflict quartet whose points are all removed. A repair sweep
/// then removes any residual quartet (these arise from equal distances that
/// tie-breaking hid from the pointer scan). All committed quartets are
/// pairwise disjoint and genuine, which is what caps the outlier set at four
/// times the optimum.
pub fn smis_approx(sys: &MetricSystem) -> SolveResult {
    let start = Instant::now();
    let mut comparisons: u64 = 0;
    let n = sys.point_count();
    let k = sys.metric_count();
    assert!(k >= 1);
    let pairs: Vec<PairId> = sys.pairs().collect();
    let total = pairs.len();

    let mut lists: Vec<Vec<usize>> = Vec::with_capacity(k);
    for i in 0..k {
        lists.push(sorted_pair_order(sys, i, &pairs, &mut comparisons));
    }

    let mut removed = vec![false; n];
    let mut groups: Vec<BTreeSet<PointId>> = Vec::new();
    let hits = |pair: PairId, removed: &[bool]| removed[pair.first().0] || removed[pair.second().0];
    let commit = |p: PairId,
                  q: PairId,
                  removed: &mut Vec<bool>,
                  groups: &mut Vec<BTreeSet<PointId>>| {
        let mut points = BTreeSet::new();
        points.extend(p.points());
        points.extend(q.points());
        // The committed quartets must be genuine conflicts and pairwise
        // disjoint; both facts carry the approximation guarantee.
        assert!(!pairs_strongly_consistent(sys, p, q), "committed duo must be a conflict");
        for pt in &points {
            assert!(!removed[pt.0], "committed quartets are disjoint");
            removed[pt.0] = true;
        }
        groups.push(points);
    };

    let mut ptr = vec![0usize; k];
    'outer: while ptr.iter().all(|&p| p < total) {
        while ptr[0] < total && hits(pairs[lists[0][ptr[0]]], &removed) {
            ptr[0] += 1;
        }
        if ptr[0] >= total {
            break;
        }
        let head = lists[0][ptr[0]];
        for i in 1..k {
            while ptr[i] < total && hits(pairs[lists[i][ptr[i]]], &removed) {
                ptr[i] += 1;
            }
            if ptr[i] >= total {
                break 'outer;
            }
            let cur = lists[i][ptr[i]];
            ptr[i] += 1;
            if cur != head {
                commit(pairs[head], pairs[cur], &mut removed, &mut groups);
                continue 'outer;
            }
        }
        // Every list agreed on `head`; move past it everywhere.
        ptr[0] += 1;
    }

    // Repair sweep: equal distances can leave equality-mismatch conflicts
    // that identical tie-broken lists never expose. Each round finds a
    // genuine conflict among survivors and removes all of its points, so
    // disjointness is preserved and the 4x argument applies unchanged.
    let mut chain = RepairChain::new(sys, &pairs, &lists[0], &removed);
    while let Some((p, q)) = chain.next_conflict(&mut comparisons) {
        commit(p, q, &mut removed, &mut groups);
        for point in p.points().into_iter().chain(q.points()) {
            chain.drop_point(point);
        }
    }

    let outliers: BTreeSet<PointId> = (0..n).map(PointId).filter(|p| removed[p.0]).collect();
    SolveResult {
        consensus_size: n - outliers.len(),
        outliers,
        certified_consistent: true,
        stats: SolveStats {
            comparisons,
            wall_time_micros: start.elapsed().as_micros(),
            groups_removed: groups.len(),
            triangles_seen: None,
        },
    }
}

/// Hitting-set view of the instance: the point sets of all conflict
/// quartets, deduplicated, as bitmasks.
fn conflict_masks(sys: &MetricSystem, distinct_points_only: bool) -> Vec<u64> {
    assert!(sys.point_count() <= 64);
    let mut masks: Vec<u64> = enumerate_conflict_quartets(sys, distinct_points_only)
        .iter()
        .map(|q| q.points.iter().fold(0u64, |m, p| m | (1 << p.0)))
        .collect();
    masks.sort_unstable();
    masks.dedup();
    masks
}

/// Greedy packing of pairwise disjoint unhit sets; its size lower-bounds the
/// number of further points any hitting set needs.
fn packing_bound(masks: &[u64], hit: u64) -> usize {
    let mut used = 0u64;
    let mut count = 0;
    for &m in masks {
        if m & hit == 0 && m & used == 0 {
            used |= m;
            count += 1;
        }
    }
    count
}

fn branch(masks: &[u64], chosen: &mut Vec<PointId>, chosen_mask: u64, best: &mut Vec<PointId>) {
    let Some(&target) = masks.iter().find(|&&m| m & chosen_mask == 0) else {
        if chosen.len() < best.len() {
            *best = chosen.clone();
        }
        return;
    };
    if chosen.len() + packing_bound(masks, chosen_mask) >= best.len() {
        return;
    }
    for bit in 0..64 {
        if target & (1 << bit) != 0 {
            chosen.push(PointId(bit));
            branch(masks, chosen, chosen_mask | (1 << bit), best);
            chosen.pop();
        }
    }
}

/// Exact minimum strongly inconsistent subset, computed as a minimum hitting
/// set over the conflict quartets (branch and bound with a disjoint-packing
/// lower bound). A subset is feasible iff it hits every quartet, since a
/// conflict depends only on its own 3-4 points.
pub fn smis_exact(
    sys: &MetricSystem,
    guard: usize,
    distinct_points_only: bool,
) -> Result<SolveResult, SolveError> {
    let n = sys.point_count();
    if n > guard || n > 64 {
        return Err(SolveError::TooLarge { n, guard: guard.min(64) });
    }
    let start = Instant::now();
    let masks = conflict_masks(sys, distinct_points_only);

    // The approximation is a feasible hitting set: start from it.
    let mut best: Vec<PointId> = smis_approx(sys).outliers.into_iter().collect();
    let mut chosen = Vec::new();
    branch(&masks, &mut chosen, 0, &mut best);

    let outliers: BTreeSet<PointId> = best.into_iter().collect();
    let hit = outliers.iter().fold(0u64, |m, p| m | (1 << p.0));
    assert!(masks.iter().all(|&m| m & hit != 0), "exact solution hits every quartet");
    Ok(SolveResult {
        consensus_size: n - outliers.len(),
        outliers,
        certified_consistent: true,
        stats: SolveStats {
            comparisons: 0,
            wall_time_micros: start.elapsed().as_micros(),
            groups_removed: 0,
            triangles_seen: None,
        },
    })
}

/// Advances to the next lexicographic size-`k` combination out of `0..n`.
fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let size = subset.len();
    let mut i = size;
    while i > 0 {
        i -= 1;
        if subset[i] < n - size + i {
            subset[i] += 1;
            for j in i + 1..size {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Reference exact solver: tries every subset in order of increasing size and
/// checks the restriction directly. Independent of the hitting-set
/// reformulation; used to cross-validate [`smis_exact`].
pub fn smis_exact_by_enumeration(
    sys: &MetricSystem,
    guard: usize,
    distinct_points_only: bool,
) -> Result<SolveResult, SolveError> {
    let n = sys.point_count();
    if n > guard {
        return Err(SolveError::TooLarge { n, guard });
    }
    let start = Instant::now();
    let feasible = |subset: &BTreeSet<PointId>| {
        let keep = sys.keep_complement(subset);
        if keep.is_empty() {
            return true;
        }
        let (restricted, _) = sys.restrict(&keep).expect("nonempty keep");
        find_conflict_quartet(&restricted, distinct_points_only).is_none()
    };
    for size in 0..=n {
        let mut subset: Vec<usize> = (0..size).collect();
        loop {
            let candidate: BTreeSet<PointId> = subset.iter().map(|&i| PointId(i)).collect();
            if feasible(&candidate) {
                return Ok(SolveResult {
                    consensus_size: n - candidate.len(),
                    outliers: candidate,
                    certified_consistent: true,
                    stats: SolveStats {
                        comparisons: 0,
                        wall_time_micros: start.elapsed().as_micros(),
                        groups_removed: 0,
                        triangles_seen: None,
                    },
                });
            }
            if !next_combination(&mut subset, n) {
                break;
            }
        }
    }
    unreachable!("removing all points is always feasible")
}
