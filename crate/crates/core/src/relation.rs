//! Plurality-vote relation sets over pairwise distances, the complete mixed
//! auxiliary graph they induce, and the machinery deciding whether a relation
//! set is realizable by a single metric.
//!
//! Nodes of the auxiliary graph are point pairs. A directed edge runs from
//! the pair with the larger distance to the pair with the smaller one; an
//! undirected edge records equality. A relation set is *valid* exactly when
//! the graph has no directed cycle, and a complete mixed graph has a directed
//! cycle exactly when it has a directed triangle — both detectors live here
//! and are cross-checked against each other in the test suites.

use crate::eps::EpsValue;
use crate::metric::{all_pairs, pair_count, DistanceMatrix, MetricSystem, PairId};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

/// Order relation between two pairwise distances.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Less,
    Equal,
    Greater,
}

impl Relation {
    pub fn from_ordering(ord: Ordering) -> Relation {
        match ord {
            Ordering::Less => Relation::Less,
            Ordering::Equal => Relation::Equal,
            Ordering::Greater => Relation::Greater,
        }
    }

    /// Relation seen from the other operand.
    pub fn flip(self) -> Relation {
        match self {
            Relation::Less => Relation::Greater,
            Relation::Equal => Relation::Equal,
            Relation::Greater => Relation::Less,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Relation::Less => "<",
            Relation::Equal => "=",
            Relation::Greater => ">",
        };
        write!(f, "{s}")
    }
}

/// Relation between `d(p)` and `d(q)` held by the most metrics. Ties go to
/// the metric of smallest index among those voting for any tied relation.
pub fn plurality_relation(sys: &MetricSystem, p: PairId, q: PairId) -> Relation {
    assert_ne!(p, q, "relations compare distinct pairs");
    let mut votes = [0usize; 3];
    let mut per_metric = Vec::with_capacity(sys.metric_count());
    for i in 0..sys.metric_count() {
        let rel = Relation::from_ordering(sys.distance(i, p).cmp(sys.distance(i, q)));
        votes[rel_slot(rel)] += 1;
        per_metric.push(rel);
    }
    let best = *votes.iter().max().expect("three slots");
    per_metric
        .into_iter()
        .find(|rel| votes[rel_slot(*rel)] == best)
        .expect("some metric attains the maximum vote")
}

fn rel_slot(rel: Relation) -> usize {
    match rel {
        Relation::Less => 0,
        Relation::Equal => 1,
        Relation::Greater => 2,
    }
}

/// Dense total map from unordered pairs of distinct point-pairs to their
/// plurality relation.
#[derive(Clone)]
pub struct RelationSet {
    n: usize,
    relations: Vec<Relation>,
}

fn slot_index(node_count: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < node_count);
    a * node_count - a * (a + 1) / 2 + (b - a - 1)
}

impl RelationSet {
    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        pair_count(self.n)
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    /// Relation of `d(p)` versus `d(q)`.
    pub fn relation(&self, p: PairId, q: PairId) -> Relation {
        assert_ne!(p, q, "relations compare distinct pairs");
        let (a, b) = (p.linear_index(), q.linear_index());
        if a < b {
            self.relations[slot_index(self.node_count(), a, b)]
        } else {
            self.relations[slot_index(self.node_count(), b, a)].flip()
        }
    }

    /// Builds a relation set directly from per-slot relations; `relations[r]`
    /// relates the pair of smaller linear index to the larger one.
    pub fn from_slots(n: usize, relations: Vec<Relation>) -> RelationSet {
        let nodes = pair_count(n);
        assert_eq!(relations.len(), nodes * nodes.saturating_sub(1) / 2);
        RelationSet { n, relations }
    }
}

/// Applies [`plurality_relation`] to every unordered pair of distinct
/// point-pairs.
pub fn build_relation_set(sys: &MetricSystem) -> RelationSet {
    let n = sys.point_count();
    assert!(n >= 2, "relation sets need at least one pair");
    let pairs: Vec<PairId> = sys.pairs().collect();
    let nodes = pairs.len();
    let mut relations = Vec::with_capacity(nodes * nodes.saturating_sub(1) / 2);
    for a in 0..nodes {
        for b in a + 1..nodes {
            relations.push(plurality_relation(sys, pairs[a], pairs[b]));
        }
    }
    RelationSet { n, relations }
}

/// Edge of a complete mixed graph, stored for the node pair `(a, b)` with
/// `a < b`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum MixedEdge {
    /// Directed from the smaller-indexed node to the larger.
    Forward,
    /// Directed from the larger-indexed node to the smaller.
    Backward,
    Undirected,
}

/// Complete mixed graph on abstract nodes `0..node_count`: exactly one edge
/// per node pair, each directed or undirected.
#[derive(Clone, Debug)]
pub struct CompleteMixedGraph {
    node_count: usize,
    edges: Vec<MixedEdge>,
}

impl CompleteMixedGraph {
    pub fn new_undirected(node_count: usize) -> Self {
        let slots = node_count * node_count.saturating_sub(1) / 2;
        CompleteMixedGraph { node_count, edges: vec![MixedEdge::Undirected; slots] }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, a: usize, b: usize) -> MixedEdge {
        assert_ne!(a, b);
        if a < b {
            self.edges[slot_index(self.node_count, a, b)]
        } else {
            match self.edges[slot_index(self.node_count, b, a)] {
                MixedEdge::Forward => MixedEdge::Backward,
                MixedEdge::Backward => MixedEdge::Forward,
                MixedEdge::Undirected => MixedEdge::Undirected,
            }
        }
    }

    pub fn set_directed(&mut self, from: usize, to: usize) {
        assert_ne!(from, to);
        let (a, b) = (from.min(to), from.max(to));
        self.edges[slot_index(self.node_count, a, b)] =
            if from < to { MixedEdge::Forward } else { MixedEdge::Backward };
    }

    pub fn set_undirected(&mut self, a: usize, b: usize) {
        assert_ne!(a, b);
        let (a, b) = (a.min(b), a.max(b));
        self.edges[slot_index(self.node_count, a, b)] = MixedEdge::Undirected;
    }

    /// Arc relation of the reachability digraph: directed edges keep their
    /// direction, undirected edges go both ways.
    fn has_arc(&self, from: usize, to: usize) -> bool {
        if from < to {
            !matches!(self.edges[slot_index(self.node_count, from, to)], MixedEdge::Backward)
        } else {
            !matches!(self.edges[slot_index(self.node_count, to, from)], MixedEdge::Forward)
        }
    }

    /// True when the triangle `a < b < c` can be oriented into a consistent
    /// directed cycle using at least one directed edge. The three admissible
    /// shapes: three directed edges, two directed plus one undirected, one
    /// directed plus two undirected.
    pub fn triangle_is_directed(&self, a: usize, b: usize, c: usize) -> bool {
        debug_assert!(a < b && b < c);
        let mut along = 0u8;
        let mut against = 0u8;
        let mut tally = |edge: MixedEdge, along_is_forward: bool| match edge {
            MixedEdge::Undirected => {}
            MixedEdge::Forward => {
                if along_is_forward {
                    along += 1
                } else {
                    against += 1
                }
            }
            MixedEdge::Backward => {
                if along_is_forward {
                    against += 1
                } else {
                    along += 1
                }
            }
        };
        // Reference orientation a→b→c→a.
        tally(self.edges[slot_index(self.node_count, a, b)], true);
        tally(self.edges[slot_index(self.node_count, b, c)], true);
        tally(self.edges[slot_index(self.node_count, a, c)], false);
        (along + against >= 1) && (along == 0 || against == 0)
    }

    /// Visits every directed triangle in lexicographic node order. The
    /// visitor returns `false` to stop early.
    ///
    /// The sweep walks the edge rows of `a` and `b` in lockstep, so the inner
    /// loop is two sequential array reads plus integer arithmetic.
    pub fn for_each_directed_triangle(
        &self,
        active: &[bool],
        mut visit: impl FnMut([usize; 3]) -> bool,
    ) {
        debug_assert_eq!(active.len(), self.node_count);
        let n = self.node_count;
        let nodes: Vec<usize> = (0..n).filter(|&v| active[v]).collect();
        // (along, against) contribution of an edge traversed forward.
        let forward = |e: MixedEdge| -> (u8, u8) {
            match e {
                MixedEdge::Forward => (1, 0),
                MixedEdge::Backward => (0, 1),
                MixedEdge::Undirected => (0, 0),
            }
        };
        let row_base = |v: usize| v * n - v * (v + 1) / 2;
        for (ia, &a) in nodes.iter().enumerate() {
            let base_a = row_base(a);
            for (ib, &b) in nodes.iter().enumerate().skip(ia + 1) {
                let base_b = row_base(b);
                // Reference orientation a→b→c→a: edges (a,b) and (b,c) count
                // forward, edge (a,c) counts reversed.
                let (al_ab, ag_ab) = forward(self.edges[base_a + b - a - 1]);
                for &c in &nodes[ib + 1..] {
                    let (al_bc, ag_bc) = forward(self.edges[base_b + c - b - 1]);
                    let (ag_ac, al_ac) = forward(self.edges[base_a + c - a - 1]);
                    let along = al_ab + al_bc + al_ac;
                    let against = ag_ab + ag_bc + ag_ac;
                    if (along + against >= 1) && (along == 0 || against == 0) && !visit([a, b, c])
                    {
                        return;
                    }
                }
            }
        }
    }

    /// Lexicographically smallest directed triangle among active nodes.
    pub fn find_directed_triangle(&self, active: &[bool]) -> Option<[usize; 3]> {
        let mut found = None;
        self.for_each_directed_triangle(active, |t| {
            found = Some(t);
            false
        });
        found
    }

    /// All directed triangles among active nodes, lexicographic order.
    pub fn directed_triangles(&self, active: &[bool]) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        self.for_each_directed_triangle(active, |t| {
            out.push(t);
            true
        });
        out
    }

    /// Directed-cycle test straight from the definition: some directed edge
    /// `u→v` admits a return path from `v` to `u` traversing directed edges
    /// forward and undirected edges in either direction. Independent of the
    /// triangle machinery. Prefer [`CompleteMixedGraph::has_directed_cycle_scc`]
    /// on large graphs.
    pub fn has_directed_cycle(&self, active: &[bool]) -> bool {
        self.find_directed_cycle(active).is_some()
    }

    /// Witness cycle `[v0, v1, ..., vk]` meaning `v0→v1→...→vk→v0`, if any.
    pub fn find_directed_cycle(&self, active: &[bool]) -> Option<Vec<usize>> {
        debug_assert_eq!(active.len(), self.node_count);
        for u in 0..self.node_count {
            if !active[u] {
                continue;
            }
            for v in 0..self.node_count {
                if v == u || !active[v] {
                    continue;
                }
                let directed_u_to_v = if u < v {
                    self.edges[slot_index(self.node_count, u, v)] == MixedEdge::Forward
                } else {
                    self.edges[slot_index(self.node_count, v, u)] == MixedEdge::Backward
                };
                if !directed_u_to_v {
                    continue;
                }
                if let Some(path) = self.arc_path(v, u, active) {
                    let mut cycle = vec![u];
                    cycle.extend_from_slice(&path[..path.len() - 1]);
                    return Some(cycle);
                }
            }
        }
        None
    }

    /// Shortest arc path `from → ... → to` (inclusive), if one exists.
    fn arc_path(&self, from: usize, to: usize, active: &[bool]) -> Option<Vec<usize>> {
        let mut parent = vec![usize::MAX; self.node_count];
        let mut queue = std::collections::VecDeque::new();
        parent[from] = from;
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for v in 0..self.node_count {
                if v == u || !active[v] || parent[v] != usize::MAX {
                    continue;
                }
                if self.has_arc(u, v) {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Same predicate as [`CompleteMixedGraph::has_directed_cycle`], computed
    /// via strongly connected components of the arc digraph: a directed cycle
    /// exists iff some directed edge has both endpoints in one component.
    pub fn has_directed_cycle_scc(&self, active: &[bool]) -> bool {
        let comp = self.scc_ids(active);
        for a in 0..self.node_count {
            if !active[a] {
                continue;
            }
            for b in a + 1..self.node_count {
                if !active[b] {
                    continue;
                }
                if self.edges[slot_index(self.node_count, a, b)] != MixedEdge::Undirected
                    && comp[a] == comp[b]
                {
                    return true;
                }
            }
        }
        false
    }

    /// Tarjan over the implicit arc digraph, iterative to keep the call
    /// stack flat.
    fn scc_ids(&self, active: &[bool]) -> Vec<usize> {
        const UNSET: usize = usize::MAX;
        let n = self.node_count;
        let mut index = vec![UNSET; n];
        let mut low = vec![0usize; n];
        let mut comp = vec![UNSET; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut next_index = 0usize;
        let mut next_comp = 0usize;

        for start in 0..n {
            if !active[start] || index[start] != UNSET {
                continue;
            }
            let mut frames: Vec<(usize, usize)> = vec![(start, 0)];
            index[start] = next_index;
            low[start] = next_index;
            next_index += 1;
            stack.push(start);
            on_stack[start] = true;

            while let Some(&mut (u, ref mut cand)) = frames.last_mut() {
                let mut descended = false;
                while *cand < n {
                    let v = *cand;
                    *cand += 1;
                    if v == u || !active[v] || !self.has_arc(u, v) {
                        continue;
                    }
                    if index[v] == UNSET {
                        index[v] = next_index;
                        low[v] = next_index;
                        next_index += 1;
                        stack.push(v);
                        on_stack[v] = true;
                        frames.push((v, 0));
                        descended = true;
                        break;
                    } else if on_stack[v] {
                        low[u] = low[u].min(index[v]);
                    }
                }
                if descended {
                    continue;
                }
                frames.pop();
                if low[u] == index[u] {
                    loop {
                        let w = stack.pop().expect("scc stack nonempty");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == u {
                            break;
                        }
                    }
                    next_comp += 1;
                }
                if let Some(&mut (p, _)) = frames.last_mut() {
                    low[p] = low[p].min(low[u]);
                }
            }
        }
        comp
    }
}

/// The auxiliary graph of a relation set: one node per point pair, one mixed
/// edge per node pair.
#[derive(Clone)]
pub struct AuxiliaryGraph {
    n: usize,
    pairs: Vec<PairId>,
    graph: CompleteMixedGraph,
}

impl AuxiliaryGraph {
    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn graph(&self) -> &CompleteMixedGraph {
        &self.graph
    }

    pub fn pair_of(&self, node: usize) -> PairId {
        self.pairs[node]
    }

    /// Node activity mask induced by a set of active points: a pair node is
    /// active when both of its points are.
    pub fn node_mask(&self, active_points: &[bool]) -> Vec<bool> {
        assert_eq!(active_points.len(), self.n);
        self.pairs
            .iter()
            .map(|p| active_points[p.first().0] && active_points[p.second().0])
            .collect()
    }

    pub fn all_points_mask(&self) -> Vec<bool> {
        vec![true; self.n]
    }

    /// Lexicographically smallest directed triangle whose pairs draw all
    /// their points from `active_points`.
    pub fn find_directed_triangle(&self, active_points: &[bool]) -> Option<[PairId; 3]> {
        let mask = self.node_mask(active_points);
        self.graph
            .find_directed_triangle(&mask)
            .map(|[a, b, c]| [self.pairs[a], self.pairs[b], self.pairs[c]])
    }

    pub fn has_directed_cycle(&self, active_points: &[bool]) -> bool {
        let mask = self.node_mask(active_points);
        self.graph.has_directed_cycle(&mask)
    }

    pub fn has_directed_cycle_scc(&self, active_points: &[bool]) -> bool {
        let mask = self.node_mask(active_points);
        self.graph.has_directed_cycle_scc(&mask)
    }
}

/// Builds the complete mixed graph of a relation set: `p > q` becomes a
/// directed edge from `p`'s node to `q`'s, equality becomes undirected.
pub fn build_auxiliary_graph(rs: &RelationSet) -> AuxiliaryGraph {
    let pairs: Vec<PairId> = all_pairs(rs.n).collect();
    let nodes = pairs.len();
    let mut graph = CompleteMixedGraph::new_undirected(nodes);
    for a in 0..nodes {
        for b in a + 1..nodes {
            match rs.relations[slot_index(nodes, a, b)] {
                Relation::Greater => graph.set_directed(a, b),
                Relation::Less => graph.set_directed(b, a),
                Relation::Equal => graph.set_undirected(a, b),
            }
        }
    }
    AuxiliaryGraph { n: rs.n, pairs, graph }
}

/// A relation set is valid iff its auxiliary graph has no directed cycle;
/// equivalently, no directed triangle. Both detectors run and must agree.
pub fn is_valid_relation_set(rs: &RelationSet) -> bool {
    let aux = build_auxiliary_graph(rs);
    let mask = vec![true; aux.node_count()];
    let by_cycle = aux.graph.has_directed_cycle_scc(&mask);
    let by_triangle = aux.graph.find_directed_triangle(&mask).is_some();
    assert_eq!(
        by_cycle, by_triangle,
        "cycle and triangle detectors must agree on complete mixed graphs"
    );
    !by_cycle
}

#[derive(Debug, Error)]
pub enum RelationError {
    #[error("relation set is not realizable; directed cycle through {0:?}")]
    InvalidRelationSet(Vec<PairId>),
}

/// Constructs a metric whose pairwise-distance order reproduces a valid
/// relation set exactly.
///
/// Equal pairs are contracted into supernodes; the remaining strict order is
/// ranked `1..=L` and rank `r` receives distance `L + r`. Every distance then
/// exceeds half the maximum, so the triangle inequality holds for free.
pub fn generating_metric(rs: &RelationSet) -> Result<DistanceMatrix, RelationError> {
    let aux = build_auxiliary_graph(rs);
    let mask = vec![true; aux.node_count()];
    if let Some(cycle) = aux.graph.find_directed_cycle(&mask) {
        return Err(RelationError::InvalidRelationSet(
            cycle.into_iter().map(|v| aux.pairs[v]).collect(),
        ));
    }

    let nodes = aux.node_count();
    // Contract undirected (equal) components.
    let mut group_of: Vec<usize> = (0..nodes).collect();
    fn find(group_of: &mut [usize], mut x: usize) -> usize {
        while group_of[x] != x {
            group_of[x] = group_of[group_of[x]];
            x = group_of[x];
        }
        x
    }
    for a in 0..nodes {
        for b in a + 1..nodes {
            if aux.graph.edges[slot_index(nodes, a, b)] == MixedEdge::Undirected {
                let (x, y) = (find(&mut group_of, a), find(&mut group_of, b));
                if x != y {
                    group_of[x.max(y)] = x.min(y);
                }
            }
        }
    }
    let mut reps: Vec<usize> = (0..nodes).filter(|&v| find(&mut group_of, v) == v).collect();
    // Validity makes the contracted graph an acyclic tournament, i.e. a
    // total order; rank representatives by ascending distance.
    reps.sort_by(|&a, &b| {
        match rs.relations[slot_index(nodes, a.min(b), a.max(b))] {
            Relation::Less => {
                if a < b {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            Relation::Greater => {
                if a < b {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            Relation::Equal => unreachable!("representatives of distinct groups are comparable"),
        }
    });
    let levels = reps.len() as i64;
    let mut value_of_rep = vec![0i64; nodes];
    for (rank, &rep) in reps.iter().enumerate() {
        value_of_rep[rep] = levels + rank as i64 + 1;
    }

    let mut m = DistanceMatrix::zeroed(rs.n);
    for (node, pair) in aux.pairs.iter().enumerate() {
        let rep = find(&mut group_of, node);
        m.set_pair(pair.first(), pair.second(), EpsValue::from_integer(value_of_rep[rep]));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{line_metric_from_coordinates, pair_index, validate_metric, PointId};
    use proptest::prelude::*;

    fn ev(x: i64) -> EpsValue {
        EpsValue::from_integer(x)
    }

    fn pid(i: usize, j: usize, n: usize) -> PairId {
        pair_index(PointId(i), PointId(j), n).unwrap()
    }

    /// Three metrics on three points whose pairwise-distance orders rotate,
    /// so the plurality relation over the three pairs is cyclic.
    fn condorcet_system() -> MetricSystem {
        // Pairs in linear order: (0,1), (0,2), (1,2). Orders:
        //   rho1: (0,1) < (0,2) < (1,2)
        //   rho2: (0,2) < (1,2) < (0,1)
        //   rho3: (1,2) < (0,1) < (0,2)
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
    fn majority_vote_wins() {
        let mut m1 = DistanceMatrix::from_pair_fn(4, |_, _| ev(5));
        m1.set_pair(PointId(0), PointId(1), ev(4));
        let mut m2 = m1.clone();
        m2.set_pair(PointId(0), PointId(1), ev(6));
        let m3 = m1.clone();
        let sys = MetricSystem::new(vec![m1, m2, m3]).unwrap();
        // Votes: Less, Greater, Less.
        assert_eq!(plurality_relation(&sys, pid(0, 1, 4), pid(2, 3, 4)), Relation::Less);
    }

    #[test]
    fn three_way_tie_goes_to_first_metric() {
        let mut m1 = DistanceMatrix::from_pair_fn(4, |_, _| ev(5));
        m1.set_pair(PointId(0), PointId(1), ev(4));
        let m2 = DistanceMatrix::from_pair_fn(4, |_, _| ev(5));
        let mut m3 = DistanceMatrix::from_pair_fn(4, |_, _| ev(5));
        m3.set_pair(PointId(0), PointId(1), ev(6));
        let sys = MetricSystem::new(vec![m1, m2, m3]).unwrap();
        // Votes: Less, Equal, Greater — all tied at one.
        assert_eq!(plurality_relation(&sys, pid(0, 1, 4), pid(2, 3, 4)), Relation::Less);
    }

    #[test]
    fn single_metric_relations_follow_its_distances() {
        let m = line_metric_from_coordinates(&[ev(0), ev(1), ev(5)]).unwrap();
        let sys = MetricSystem::new(vec![m]).unwrap();
        let rs = build_relation_set(&sys);
        // d(0,1)=1 < d(1,2)=4 < d(0,2)=5.
        assert_eq!(rs.relation(pid(0, 1, 3), pid(0, 2, 3)), Relation::Less);
        assert_eq!(rs.relation(pid(0, 2, 3), pid(1, 2, 3)), Relation::Greater);
        assert!(is_valid_relation_set(&rs));
    }

    #[test]
    fn condorcet_votes_are_cyclic_and_invalid() {
        let sys = condorcet_system();
        let rs = build_relation_set(&sys);
        let (a, b, c) = (pid(0, 1, 3), pid(0, 2, 3), pid(1, 2, 3));
        assert_eq!(rs.relation(a, b), Relation::Less);
        assert_eq!(rs.relation(b, c), Relation::Less);
        assert_eq!(rs.relation(c, a), Relation::Less);
        assert!(!is_valid_relation_set(&rs));
        let aux = build_auxiliary_graph(&rs);
        let mask = aux.all_points_mask();
        assert!(aux.find_directed_triangle(&mask).is_some());
        assert!(aux.has_directed_cycle(&mask));
        assert!(matches!(generating_metric(&rs), Err(RelationError::InvalidRelationSet(_))));
    }

    #[test]
    fn all_equal_relations_give_undirected_graph_and_uniform_metric() {
        let m = DistanceMatrix::from_pair_fn(3, |_, _| ev(7));
        let sys = MetricSystem::new(vec![m.clone(), m]).unwrap();
        let rs = build_relation_set(&sys);
        let aux = build_auxiliary_graph(&rs);
        for a in 0..aux.node_count() {
            for b in a + 1..aux.node_count() {
                assert_eq!(aux.graph().edge(a, b), MixedEdge::Undirected);
            }
        }
        assert!(aux.find_directed_triangle(&aux.all_points_mask()).is_none());
        assert!(is_valid_relation_set(&rs));
        let generated = generating_metric(&rs).unwrap();
        // One contracted level: every pair sits at distance 2.
        for pair in sys.pairs() {
            assert_eq!(*generated.distance(pair), ev(2));
        }
    }

    #[test]
    fn strict_chain_yields_consecutive_levels() {
        let m = line_metric_from_coordinates(&[ev(0), ev(1), ev(5)]).unwrap();
        let sys = MetricSystem::new(vec![m]).unwrap();
        let rs = build_relation_set(&sys);
        let generated = generating_metric(&rs).unwrap();
        let mut values: Vec<EpsValue> =
            sys.pairs().map(|p| generated.distance(p).clone()).collect();
        values.sort();
        assert_eq!(values, vec![ev(4), ev(5), ev(6)]);
        assert!(validate_metric(&generated).is_valid());
    }

    #[test]
    fn tournament_from_strict_order_is_acyclic() {
        let m = line_metric_from_coordinates(&[ev(0), ev(1), ev(5), ev(20)]).unwrap();
        let sys = MetricSystem::new(vec![m]).unwrap();
        let rs = build_relation_set(&sys);
        let aux = build_auxiliary_graph(&rs);
        let mask = vec![true; aux.node_count()];
        // All distances distinct: every edge directed, no cycle.
        for a in 0..aux.node_count() {
            for b in a + 1..aux.node_count() {
                assert_ne!(aux.graph().edge(a, b), MixedEdge::Undirected);
            }
        }
        assert!(!aux.graph().has_directed_cycle(&mask));
        assert!(!aux.graph().has_directed_cycle_scc(&mask));
    }

    #[test]
    fn auxiliary_graph_is_complete() {
        let sys = condorcet_system();
        let aux = build_auxiliary_graph(&build_relation_set(&sys));
        let nodes = aux.node_count();
        assert_eq!(nodes, 3);
        assert_eq!(aux.edge_count(), nodes * (nodes - 1) / 2);
    }

    #[test]
    fn five_cycle_of_directed_edges_is_detected() {
        // Plain 5-cycle embedded in a complete mixed graph; the chords stay
        // undirected so the pentagon itself is the only source of direction.
        let mut g = CompleteMixedGraph::new_undirected(5);
        for i in 0..5 {
            g.set_directed(i, (i + 1) % 5);
        }
        let mask = vec![true; 5];
        assert!(g.has_directed_cycle(&mask));
        assert!(g.has_directed_cycle_scc(&mask));
        // An undirected chord completes a triangle with two cycle edges.
        assert!(g.find_directed_triangle(&mask).is_some());
    }

    #[test]
    fn conflicting_directions_are_not_a_cycle() {
        // 0→1, 2→1, 0—2: the two directed edges meet head-on at 1.
        let mut g = CompleteMixedGraph::new_undirected(3);
        g.set_directed(0, 1);
        g.set_directed(2, 1);
        let mask = vec![true; 3];
        assert!(!g.has_directed_cycle(&mask));
        assert!(!g.has_directed_cycle_scc(&mask));
        assert!(g.find_directed_triangle(&mask).is_none());
    }

    #[test]
    fn one_directed_edge_with_undirected_closure_is_a_cycle() {
        let mut g = CompleteMixedGraph::new_undirected(3);
        g.set_directed(0, 1);
        let mask = vec![true; 3];
        assert_eq!(g.find_directed_triangle(&mask), Some([0, 1, 2]));
        assert!(g.has_directed_cycle(&mask));
    }

    #[test]
    fn fully_undirected_triangle_is_not_directed() {
        let g = CompleteMixedGraph::new_undirected(3);
        let mask = vec![true; 3];
        assert!(g.find_directed_triangle(&mask).is_none());
        assert!(!g.has_directed_cycle(&mask));
    }

    #[test]
    fn cycle_witness_is_a_real_cycle() {
        let sys = condorcet_system();
        let rs = build_relation_set(&sys);
        match generating_metric(&rs) {
            Err(RelationError::InvalidRelationSet(cycle)) => {
                assert!(cycle.len() >= 3);
                for window in cycle.windows(2) {
                    assert_ne!(rs.relation(window[0], window[1]), Relation::Less);
                }
                assert_ne!(rs.relation(*cycle.last().unwrap(), cycle[0]), Relation::Less);
            }
            other => panic!("expected invalid relation set, got {other:?}"),
        }
    }

    fn arb_mixed_graph(nodes: usize) -> impl Strategy<Value = CompleteMixedGraph> {
        proptest::collection::vec(0u8..3, nodes * (nodes - 1) / 2).prop_map(move |labels| {
            let mut g = CompleteMixedGraph::new_undirected(nodes);
            let mut slot = 0;
            for a in 0..nodes {
                for b in a + 1..nodes {
                    match labels[slot] {
                        0 => g.set_directed(a, b),
                        1 => g.set_directed(b, a),
                        _ => g.set_undirected(a, b),
                    }
                    slot += 1;
                }
            }
            g
        })
    }

    proptest! {
        #[test]
        fn triangle_and_cycle_detectors_agree(g in (3usize..7).prop_flat_map(arb_mixed_graph)) {
            let mask = vec![true; g.node_count()];
            let triangle = g.find_directed_triangle(&mask).is_some();
            prop_assert_eq!(g.has_directed_cycle(&mask), triangle);
            prop_assert_eq!(g.has_directed_cycle_scc(&mask), triangle);
        }

        #[test]
        fn generated_metric_reproduces_its_relation_set(
            coords in proptest::collection::btree_set(0i64..60, 3..7),
        ) {
            let coords: Vec<EpsValue> = coords.into_iter().map(ev).collect();
            let m = line_metric_from_coordinates(&coords).unwrap();
            let sys = MetricSystem::new(vec![m]).unwrap();
            let rs = build_relation_set(&sys);
            let generated = generating_metric(&rs).unwrap();
            prop_assert!(validate_metric(&generated).is_valid());
            let round = build_relation_set(&MetricSystem::new(vec![generated]).unwrap());
            let pairs: Vec<PairId> = sys.pairs().collect();
            for a in 0..pairs.len() {
                for b in a + 1..pairs.len() {
                    prop_assert_eq!(
                        rs.relation(pairs[a], pairs[b]),
                        round.relation(pairs[a], pairs[b])
                    );
                }
            }
        }
    }
}
