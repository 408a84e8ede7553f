//! Weak consistency: plurality relations must be realizable by a single
//! metric, i.e. the auxiliary graph restricted to the surviving points has no
//! directed cycle — equivalently, no directed triangle.
//!
//! The greedy 6-approximation sweeps all directed triangles of the auxiliary
//! graph in order and removes all (at most six) points of every triangle not
//! yet hit; the committed point groups are pairwise disjoint, which caps the
//! result at six times the optimum. The exact solver searches outlier subsets
//! by increasing size, pruned by a packing bound over point-disjoint
//! triangles.

use crate::metric::{MetricSystem, PairId, PointId};
use crate::relation::{build_auxiliary_graph, build_relation_set, AuxiliaryGraph};
use crate::strong::{SolveError, SolveResult, SolveStats};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::time::Instant;

/// Default point-count guard for exact search.
pub const DEFAULT_EXACT_GUARD: usize = 14;

/// Default cap on materialized triangle lists (seeded orders only; the
/// lexicographic sweep streams and needs no list).
pub const DEFAULT_TRIANGLE_CAP: usize = 5_000_000;

/// Iteration order of the greedy sweep. The approximation factor is 6 either
/// way; the concrete outlier set may differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleOrder {
    /// Lexicographic by node triple; streamed, deterministic, the default.
    Lexicographic,
    /// Deterministic shuffle of the full triangle list.
    Seeded(u64),
}

/// Verdict plus the lexicographically first directed triangle, if any.
#[derive(Debug, Clone)]
pub struct WeakCheck {
    pub consistent: bool,
    pub witness: Option<[PairId; 3]>,
}

fn active_mask(sys: &MetricSystem, active: &BTreeSet<PointId>) -> Vec<bool> {
    let mut mask = vec![false; sys.point_count()];
    for p in active {
        assert!(p.0 < sys.point_count(), "active point out of range");
        mask[p.0] = true;
    }
    mask
}

/// Checks weak consistency of the system restricted to `active`.
///
/// The relation set and auxiliary graph are built once for the full system;
/// restriction only masks nodes, which is sound because a plurality relation
/// depends on nothing but the distances of the pairs involved.
pub fn is_weakly_consistent(sys: &MetricSystem, active: &BTreeSet<PointId>) -> WeakCheck {
    assert!(!active.is_empty(), "weak consistency needs a nonempty point set");
    if sys.point_count() < 2 || active.len() < 2 {
        return WeakCheck { consistent: true, witness: None };
    }
    let aux = build_auxiliary_graph(&build_relation_set(sys));
    weak_check_on(&aux, &active_mask(sys, active))
}

fn weak_check_on(aux: &AuxiliaryGraph, points: &[bool]) -> WeakCheck {
    let witness = aux.find_directed_triangle(points);
    #[cfg(debug_assertions)]
    {
        if aux.node_count() <= 60 {
            assert_eq!(
                witness.is_some(),
                aux.has_directed_cycle(points),
                "triangle and cycle detectors must agree"
            );
        }
    }
    WeakCheck { consistent: witness.is_none(), witness }
}

pub fn is_weakly_consistent_all(sys: &MetricSystem) -> WeakCheck {
    is_weakly_consistent(sys, &sys.points().collect())
}

/// Greedy 6-approximation for the minimum weakly inconsistent subset.
pub fn wmis_approx(sys: &MetricSystem) -> SolveResult {
    wmis_approx_with(sys, TriangleOrder::Lexicographic, DEFAULT_TRIANGLE_CAP)
        .expect("lexicographic order never materializes the triangle list")
}

pub fn wmis_approx_with(
    sys: &MetricSystem,
    order: TriangleOrder,
    triangle_cap: usize,
) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let n = sys.point_count();
    let k = sys.metric_count();

    // With one or two metrics the tie-break makes plurality follow the first
    // metric, so the relation set is always realizable.
    if k <= 2 || n < 3 {
        return Ok(SolveResult {
            outliers: BTreeSet::new(),
            consensus_size: n,
            certified_consistent: true,
            stats: SolveStats {
                comparisons: 0,
                wall_time_micros: start.elapsed().as_micros(),
                groups_removed: 0,
                triangles_seen: Some(0),
            },
        });
    }

    let aux = build_auxiliary_graph(&build_relation_set(sys));
    let nodes = aux.node_count();
    let comparisons = (k as u64) * (nodes as u64) * (nodes as u64 - 1) / 2;
    let all_nodes = vec![true; nodes];

    let mut removed = vec![false; n];
    let mut groups = 0usize;
    let mut seen = 0u64;
    let commit = |t: [usize; 3], removed: &mut Vec<bool>, groups: &mut usize| {
        let mut points = BTreeSet::new();
        for node in t {
            points.extend(aux.pair_of(node).points());
        }
        if points.iter().all(|p| !removed[p.0]) {
            // Committed groups are pairwise disjoint by this very check.
            for p in &points {
                removed[p.0] = true;
            }
            *groups += 1;
        }
    };

    match order {
        TriangleOrder::Lexicographic => {
            // Streaming the lexicographic sweep commits exactly what
            // materializing the list first would.
            aux.graph().for_each_directed_triangle(&all_nodes, |t| {
                seen += 1;
                commit(t, &mut removed, &mut groups);
                true
            });
        }
        TriangleOrder::Seeded(seed) => {
            let mut triangles = Vec::new();
            let mut over_cap = false;
            aux.graph().for_each_directed_triangle(&all_nodes, |t| {
                if triangles.len() >= triangle_cap {
                    over_cap = true;
                    return false;
                }
                triangles.push(t);
                true
            });
            if over_cap {
                return Err(SolveError::TooLarge { n: triangle_cap + 1, guard: triangle_cap });
            }
            seen = triangles.len() as u64;
            triangles.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            for t in triangles {
                commit(t, &mut removed, &mut groups);
            }
        }
    }

    let outliers: BTreeSet<PointId> = (0..n).map(PointId).filter(|p| removed[p.0]).collect();
    let survivors: Vec<bool> = removed.iter().map(|r| !r).collect();
    let node_mask = aux.node_mask(&survivors);
    let consistent = aux.graph().find_directed_triangle(&node_mask).is_none();
    assert!(consistent, "every directed triangle is hit after the sweep");
    Ok(SolveResult {
        consensus_size: n - outliers.len(),
        outliers,
        certified_consistent: consistent,
        stats: SolveStats {
            comparisons,
            wall_time_micros: start.elapsed().as_micros(),
            groups_removed: groups,
            triangles_seen: Some(seen),
        },
    })
}

/// Greedy packing of point-disjoint triangles among the unhit ones.
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

fn search_with_budget(masks: &[u64], budget: usize, chosen: u64) -> Option<Vec<PointId>> {
    let Some(&target) = masks.iter().find(|&&m| m & chosen == 0) else {
        return Some(Vec::new());
    };
    if budget == 0 || packing_bound(masks, chosen) > budget {
        return None;
    }
    for bit in 0..64 {
        if target & (1 << bit) != 0 {
            if let Some(mut rest) = search_with_budget(masks, budget - 1, chosen | (1 << bit)) {
                rest.push(PointId(bit));
                return Some(rest);
            }
        }
    }
    None
}

/// Exact minimum weakly inconsistent subset: outlier sets are searched by
/// increasing size, pruning branches whose packing bound exceeds the budget.
/// A set is feasible iff it hits every directed triangle of the auxiliary
/// graph, by the triangle/cycle equivalence and relation locality.
pub fn wmis_exact(sys: &MetricSystem, guard: usize) -> Result<SolveResult, SolveError> {
    let n = sys.point_count();
    if n > guard || n > 64 {
        return Err(SolveError::TooLarge { n, guard: guard.min(64) });
    }
    let start = Instant::now();
    let k = sys.metric_count();
    if k <= 2 || n < 3 {
        return Ok(SolveResult {
            outliers: BTreeSet::new(),
            consensus_size: n,
            certified_consistent: true,
            stats: SolveStats {
                comparisons: 0,
                wall_time_micros: start.elapsed().as_micros(),
                groups_removed: 0,
                triangles_seen: Some(0),
            },
        });
    }

    let aux = build_auxiliary_graph(&build_relation_set(sys));
    let all_nodes = vec![true; aux.node_count()];
    let mut masks: Vec<u64> = Vec::new();
    let mut seen = 0u64;
    aux.graph().for_each_directed_triangle(&all_nodes, |t| {
        seen += 1;
        let mut mask = 0u64;
        for node in t {
            for p in aux.pair_of(node).points() {
                mask |= 1 << p.0;
            }
        }
        masks.push(mask);
        true
    });
    masks.sort_unstable();
    masks.dedup();

    let mut solution = Vec::new();
    for budget in packing_bound(&masks, 0)..=n {
        if let Some(mut found) = search_with_budget(&masks, budget, 0) {
            found.reverse();
            solution = found;
            break;
        }
    }

    let outliers: BTreeSet<PointId> = solution.into_iter().collect();
    let survivors: Vec<bool> = (0..n).map(|i| !outliers.contains(&PointId(i))).collect();
    let node_mask = aux.node_mask(&survivors);
    // Certify via both detectors; they must agree on complete mixed graphs.
    let triangle_free = aux.graph().find_directed_triangle(&node_mask).is_none();
    let cycle_free = !aux.graph().has_directed_cycle_scc(&node_mask);
    assert!(triangle_free && cycle_free, "exact solution leaves a consistent remainder");
    Ok(SolveResult {
        consensus_size: n - outliers.len(),
        outliers,
        certified_consistent: true,
        stats: SolveStats {
            comparisons: 0,
            wall_time_micros: start.elapsed().as_micros(),
            groups_removed: 0,
            triangles_seen: Some(seen),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eps::EpsValue;
    use crate::metric::{line_metric_from_coordinates, DistanceMatrix};
    use proptest::prelude::*;

    fn ev(x: i64) -> EpsValue {
        EpsValue::from_integer(x)
    }

    /// Three metrics on three points with rotating distance orders; the
    /// plurality relations over the three pairs form a directed triangle.
    fn condorcet_system() -> MetricSystem {
        let assign = |d01: i64, d02: i64, d12: i64| {
            let mut m = DistanceMatrix::zeroed(3);
            m.set_pair(PointId(0), PointId(1), ev(d01));
            m.set_pair(PointId(0), PointId(2), ev(d02));
            m.set_pair(PointId(1), PointId(2), ev(d12));
            m
        };
        MetricSystem::new(vec![assign(4, 5, 6), assign(6, 4, 5), assign(5, 6, 4)]).unwrap()
    }

    #[test]
    fn two_metrics_are_always_weakly_consistent() {
        // Strongly inconsistent on purpose; plurality still follows rho1.
        let m1 = line_metric_from_coordinates(&[ev(0), ev(1), ev(3), ev(9)]).unwrap();
        let m2 = line_metric_from_coordinates(&[ev(9), ev(1), ev(5), ev(0)]).unwrap();
        let sys = MetricSystem::new(vec![m1, m2]).unwrap();
        assert!(is_weakly_consistent_all(&sys).consistent);
        assert!(wmis_approx(&sys).outliers.is_empty());
        assert!(wmis_exact(&sys, 14).unwrap().outliers.is_empty());
    }

    #[test]
    fn condorcet_gadget_is_weakly_inconsistent() {
        let sys = condorcet_system();
        let check = is_weakly_consistent_all(&sys);
        assert!(!check.consistent);
        assert!(check.witness.is_some());
    }

    #[test]
    fn single_point_restriction_is_consistent() {
        let sys = condorcet_system();
        let active: BTreeSet<PointId> = [PointId(1)].into();
        assert!(is_weakly_consistent(&sys, &active).consistent);
    }

    #[test]
    fn greedy_hits_the_condorcet_triangle() {
        let sys = condorcet_system();
        let result = wmis_approx(&sys);
        // One triangle on three points: the greedy removes all of them.
        assert_eq!(result.outliers.len(), 3);
        assert_eq!(result.stats.groups_removed, 1);
        let exact = wmis_exact(&sys, 14).unwrap();
        assert_eq!(exact.outliers.len(), 1);
        assert!(result.outliers.len() <= 6 * exact.outliers.len());
    }

    #[test]
    fn identical_metrics_need_no_outliers() {
        let m = line_metric_from_coordinates(&[ev(0), ev(1), ev(3), ev(9)]).unwrap();
        let sys = MetricSystem::new(vec![m.clone(), m.clone(), m]).unwrap();
        let result = wmis_approx(&sys);
        assert!(result.outliers.is_empty());
        assert_eq!(result.stats.triangles_seen, Some(0));
    }

    #[test]
    fn exact_guard_refuses_large_instances() {
        let m = line_metric_from_coordinates(&(0..20).map(|i| ev(1 << i)).collect::<Vec<_>>())
            .unwrap();
        let sys = MetricSystem::new(vec![m.clone(), m.clone(), m]).unwrap();
        assert!(matches!(wmis_exact(&sys, 14), Err(SolveError::TooLarge { n: 20, guard: 14 })));
    }

    #[test]
    fn seeded_order_still_yields_a_feasible_set() {
        let sys = condorcet_system();
        let lex = wmis_approx(&sys);
        let seeded = wmis_approx_with(&sys, TriangleOrder::Seeded(7), 1000).unwrap();
        assert!(seeded.certified_consistent);
        assert_eq!(lex.stats.triangles_seen, seeded.stats.triangles_seen);
    }

    fn random_line_system(seed: i64, k: usize, n: usize, spread: i64) -> MetricSystem {
        let coords = |salt: i64| -> Vec<EpsValue> {
            let mut out = Vec::new();
            let mut x = salt;
            let mut seen = BTreeSet::new();
            while out.len() < n {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let c = (x >> 33).rem_euclid(spread.max(n as i64 + 1));
                if seen.insert(c) {
                    out.push(ev(c));
                }
            }
            out
        };
        let metrics =
            (0..k).map(|i| line_metric_from_coordinates(&coords(seed + i as i64)).unwrap()).collect();
        MetricSystem::new(metrics).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn approx_is_feasible_and_within_six_times_exact(
            seed in 0i64..10_000,
            n in 4usize..8,
            spread in 4i64..30,
        ) {
            let sys = random_line_system(seed, 3, n, spread);
            let approx = wmis_approx(&sys);
            let keep = sys.keep_complement(&approx.outliers);
            if !keep.is_empty() {
                prop_assert!(is_weakly_consistent(&sys, &keep).consistent);
                let (restricted, _) = sys.restrict(&keep).unwrap();
                prop_assert!(is_weakly_consistent_all(&restricted).consistent);
            }
            let exact = wmis_exact(&sys, 14).unwrap();
            prop_assert!(approx.outliers.len() <= 6 * exact.outliers.len());
            prop_assert!(exact.outliers.len() <= approx.outliers.len());
        }

        #[test]
        fn restriction_equals_active_filtering(
            seed in 0i64..5_000,
            n in 3usize..7,
            keep_bits in 1usize..64,
        ) {
            let sys = random_line_system(seed, 3, n, 12);
            let keep: BTreeSet<PointId> =
                (0..n).filter(|i| keep_bits & (1 << i) != 0).map(PointId).collect();
            prop_assume!(!keep.is_empty());
            let filtered = is_weakly_consistent(&sys, &keep).consistent;
            let (restricted, _) = sys.restrict(&keep).unwrap();
            let rebuilt = is_weakly_consistent_all(&restricted).consistent;
            prop_assert_eq!(filtered, rebuilt);
        }
    }
}
