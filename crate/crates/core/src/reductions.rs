//! Hardness-gadget instance generators and exact oracles for their source
//! problems.
//!
//! Each generator turns a combinatorial source instance (a graph, a 2-CNF
//! formula, a triple system) into a metric system whose minimum inconsistent
//! subset mirrors the source optimum:
//!
//! * vertex cover → 2 line metrics or 2 arbitrary metrics (strong notion),
//! * maximum 2-sat → 2 ultrametrics (strong notion),
//! * vertex cover → 3 line metrics or 3 arbitrary metrics (weak notion),
//! * 3-dimensional matching → 3 ultrametrics (weak notion).
//!
//! The oracles ([`oracle_min_vertex_cover`], [`oracle_max_2sat`],
//! [`oracle_max_3dm`]) solve the sources exactly by bounded search, so tests
//! can assert the size identities end to end. [`random_system`] supplies
//! seeded random instances of every flavor for property tests and benchmarks.

use crate::eps::EpsValue;
use crate::metric::{
    line_metric_from_coordinates, pair_index, DistanceMatrix, MetricSystem, PairId, PointId,
};
use crate::relation::{build_auxiliary_graph, build_relation_set};
use crate::tree::{ultrametric_from_tree, RepresentingTree, TreeSpec};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

pub const VC_ORACLE_GUARD: usize = 20;
pub const SAT_ORACLE_GUARD: usize = 20;
pub const DM_ORACLE_GUARD: usize = 15;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("malformed source JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("graph needs at least one vertex")]
    EmptyGraph,
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("clause {index} is malformed: {reason}")]
    BadClause { index: usize, reason: String },
    #[error("triple {index} is malformed: {reason}")]
    BadTriple { index: usize, reason: String },
    #[error("matching instance has no triples")]
    EmptyInstance,
    #[error("gadget self-verification failed: {0}")]
    GadgetInvalid(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("source has size {size}, exceeding the oracle guard of {guard}")]
    TooLarge { size: usize, guard: usize },
}

// ---------------------------------------------------------------------------
// Source instances
// ---------------------------------------------------------------------------

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl SimpleGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, ReductionError> {
        if n == 0 {
            return Err(ReductionError::EmptyGraph);
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u >= n {
                return Err(ReductionError::VertexOutOfRange { vertex: u, n });
            }
            if v >= n {
                return Err(ReductionError::VertexOutOfRange { vertex: v, n });
            }
            if u == v {
                return Err(ReductionError::SelfLoop(u));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(SimpleGraph { n, edges: set })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical sorted order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.edges.iter().copied().collect()
    }
}

/// One- or two-literal clause; a literal is a variable index with a sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoSatFormula {
    n_vars: usize,
    clauses: Vec<Vec<Literal>>,
}

impl TwoSatFormula {
    pub fn new(n_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self, ReductionError> {
        for (index, clause) in clauses.iter().enumerate() {
            if clause.is_empty() || clause.len() > 2 {
                return Err(ReductionError::BadClause {
                    index,
                    reason: format!("{} literals", clause.len()),
                });
            }
            for lit in clause {
                if lit.var >= n_vars {
                    return Err(ReductionError::BadClause {
                        index,
                        reason: format!("variable {} out of range", lit.var),
                    });
                }
            }
            if clause.len() == 2 && clause[0] == clause[1] {
                return Err(ReductionError::BadClause {
                    index,
                    reason: "repeated literal".to_owned(),
                });
            }
        }
        Ok(TwoSatFormula { n_vars, clauses })
    }

    pub fn var_count(&self) -> usize {
        self.n_vars
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    /// Counts of one-literal and two-literal clauses.
    pub fn clause_counts(&self) -> (usize, usize) {
        let ones = self.clauses.iter().filter(|c| c.len() == 1).count();
        (ones, self.clauses.len() - ones)
    }
}

/// Triple system over three disjoint ground sets of equal size `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeDmInstance {
    n: usize,
    triples: Vec<[usize; 3]>,
}

impl ThreeDmInstance {
    pub fn new(n: usize, triples: Vec<[usize; 3]>) -> Result<Self, ReductionError> {
        let mut seen = BTreeSet::new();
        for (index, t) in triples.iter().enumerate() {
            if t.iter().any(|&c| c >= n) {
                return Err(ReductionError::BadTriple {
                    index,
                    reason: format!("coordinate out of range for n={n}"),
                });
            }
            if !seen.insert(*t) {
                return Err(ReductionError::BadTriple { index, reason: "duplicate".to_owned() });
            }
        }
        Ok(ThreeDmInstance { n, triples })
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn triples(&self) -> &[[usize; 3]] {
        &self.triples
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }
}

// ---------------------------------------------------------------------------
// Source JSON formats
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GraphWire {
    n: usize,
    edges: Vec<(usize, usize)>,
}

pub fn graph_from_json(text: &str) -> Result<SimpleGraph, ReductionError> {
    let wire: GraphWire = serde_json::from_str(text)?;
    SimpleGraph::new(wire.n, &wire.edges)
}

pub fn graph_to_json(g: &SimpleGraph) -> String {
    serde_json::to_string_pretty(&GraphWire { n: g.n, edges: g.edges() })
        .expect("graph serialization cannot fail")
}

#[derive(Serialize, Deserialize)]
struct TwoSatWire {
    #[serde(rename = "nVars")]
    n_vars: usize,
    /// Signed 1-based variable indices, one inner list per clause.
    clauses: Vec<Vec<i64>>,
}

pub fn two_sat_from_json(text: &str) -> Result<TwoSatFormula, ReductionError> {
    let wire: TwoSatWire = serde_json::from_str(text)?;
    let mut clauses = Vec::with_capacity(wire.clauses.len());
    for (index, clause) in wire.clauses.iter().enumerate() {
        let mut lits = Vec::with_capacity(clause.len());
        for &code in clause {
            if code == 0 {
                return Err(ReductionError::BadClause {
                    index,
                    reason: "literal 0 is not valid".to_owned(),
                });
            }
            lits.push(Literal { var: code.unsigned_abs() as usize - 1, positive: code > 0 });
        }
        clauses.push(lits);
    }
    TwoSatFormula::new(wire.n_vars, clauses)
}

pub fn two_sat_to_json(f: &TwoSatFormula) -> String {
    let clauses = f
        .clauses
        .iter()
        .map(|c| {
            c.iter()
                .map(|l| {
                    let code = l.var as i64 + 1;
                    if l.positive {
                        code
                    } else {
                        -code
                    }
                })
                .collect()
        })
        .collect();
    serde_json::to_string_pretty(&TwoSatWire { n_vars: f.n_vars, clauses })
        .expect("formula serialization cannot fail")
}

#[derive(Serialize, Deserialize)]
struct ThreeDmWire {
    n: usize,
    triples: Vec<[usize; 3]>,
}

pub fn three_dm_from_json(text: &str) -> Result<ThreeDmInstance, ReductionError> {
    let wire: ThreeDmWire = serde_json::from_str(text)?;
    ThreeDmInstance::new(wire.n, wire.triples)
}

pub fn three_dm_to_json(inst: &ThreeDmInstance) -> String {
    serde_json::to_string_pretty(&ThreeDmWire { n: inst.n, triples: inst.triples.clone() })
        .expect("triple serialization cannot fail")
}

// ---------------------------------------------------------------------------
// Generators: strong notion
// ---------------------------------------------------------------------------

fn pow2(exp: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(1) << exp)
}

fn plain(r: BigRational) -> EpsValue {
    EpsValue::from_rational(r)
}

/// Vertex cover → two line metrics. One vertex point per graph vertex at
/// coordinate `2^(i-1)`, plus one pivot pair per edge whose separation
/// straddles the edge's vertex distance by ±ε, in opposite directions in the
/// two metrics. Conflict quartets then correspond exactly to graph edges.
pub fn gen_smis_lines_from_vc(g: &SimpleGraph) -> MetricSystem {
    let n = g.vertex_count();
    let edges = g.edges();
    let mut labels = Vec::new();
    let mut coords1 = Vec::new();
    let mut coords2 = Vec::new();
    for i in 0..n {
        labels.push(format!("v{}", i + 1));
        coords1.push(plain(pow2(i)));
        coords2.push(plain(pow2(i)));
    }
    for (j, &(a, b)) in edges.iter().enumerate() {
        let left = pow2(n + 2 * j);
        let offset = pow2(b) - pow2(a);
        labels.push(format!("r{}l", j + 1));
        coords1.push(plain(left.clone()));
        coords2.push(plain(left.clone()));
        labels.push(format!("r{}r", j + 1));
        coords1.push(EpsValue::new(&left + &offset, BigInt::from(1)));
        coords2.push(EpsValue::new(left + offset, BigInt::from(-1)));
    }
    let m1 = line_metric_from_coordinates(&coords1).expect("coordinates are distinct");
    let m2 = line_metric_from_coordinates(&coords2).expect("coordinates are distinct");
    let mut sys =
        MetricSystem::with_names(vec![m1, m2], vec!["line1".into(), "line2".into()]).unwrap();
    sys.set_labels(labels);
    sys
}

/// Vertex cover → two arbitrary metrics. Baseline distance 1 everywhere; a
/// vertex pair joined by an edge sits at `1+ε` in the first metric and `1-ε`
/// in the second, flipping its order against the baseline pairs.
pub fn gen_smis_arbitrary_from_vc(g: &SimpleGraph) -> MetricSystem {
    let n = g.vertex_count();
    let edges = g.edges.clone();
    let total = 2 * n;
    let one = BigRational::from_integer(1.into());
    let gadget = |i: usize, j: usize, sign: i64| -> EpsValue {
        // Points n..2n are the vertex copies.
        if i >= n && j >= n && edges.contains(&(i - n, j - n)) {
            EpsValue::with_eps(one.clone(), sign)
        } else {
            EpsValue::from_integer(1)
        }
    };
    let m1 = DistanceMatrix::from_pair_fn(total, |p, q| gadget(p.0, q.0, 1));
    let m2 = DistanceMatrix::from_pair_fn(total, |p, q| gadget(p.0, q.0, -1));
    let mut labels: Vec<String> = (1..=n).map(|i| format!("r{i}")).collect();
    labels.extend((1..=n).map(|i| format!("v{i}")));
    let mut sys =
        MetricSystem::with_names(vec![m1, m2], vec!["rho1".into(), "rho2".into()]).unwrap();
    sys.set_labels(labels);
    sys
}

/// Maximum 2-sat → two ultrametrics with a shared tree shape.
///
/// A buffer node `B` holds more leaves than the formula has literal slots;
/// each clause hangs one subtree with a two-leaf block per literal. The two
/// height functions interleave complementary literals in opposite orders and
/// flip `B` against the clause nodes, so a consensus can keep both leaves of
/// a literal block only when that literal satisfies its clause.
pub fn gen_smis_ultra_from_max2sat(f: &TwoSatFormula) -> MetricSystem {
    let n = f.var_count() as i64;
    let (ones, twos) = f.clause_counts();
    let clause_count = (ones + twos) as i64;
    let buffer_leaves = 2 * ones + 4 * twos + 1;

    let lit_height = |metric: usize, lit: Literal| -> i64 {
        let t = lit.var as i64 + 1;
        match (metric, lit.positive) {
            (0, true) => 2 * t - 1,
            (0, false) => 2 * t,
            (_, true) => 2 * t,
            (_, false) => 2 * t - 1,
        }
    };
    let buffer_height = |metric: usize| -> i64 {
        if metric == 0 {
            2 * n + 1
        } else {
            2 * n + clause_count + 1
        }
    };
    let clause_height = |metric: usize, i: i64| -> i64 {
        if metric == 0 {
            2 * n + 1 + i
        } else {
            2 * n + i
        }
    };
    let root_height = |metric: usize| -> i64 {
        buffer_height(metric).max(clause_height(metric, clause_count)) + 1
    };

    let mut labels: Vec<String> = (1..=buffer_leaves).map(|t| format!("b{t}")).collect();
    for (ci, clause) in f.clauses().iter().enumerate() {
        for t in 1..=2 * clause.len() {
            labels.push(format!("d{}_{}", ci + 1, t));
        }
    }

    let build = |metric: usize| -> RepresentingTree {
        let mut next_leaf = buffer_leaves;
        let buffer = TreeSpec::internal_int(
            buffer_height(metric),
            (0..buffer_leaves).map(TreeSpec::leaf).collect(),
        );
        let mut children = vec![buffer];
        for (ci, clause) in f.clauses().iter().enumerate() {
            let mut blocks = Vec::new();
            for lit in clause {
                let block = TreeSpec::internal_int(
                    lit_height(metric, *lit),
                    vec![TreeSpec::leaf(next_leaf), TreeSpec::leaf(next_leaf + 1)],
                );
                next_leaf += 2;
                blocks.push(block);
            }
            children.push(TreeSpec::internal_int(clause_height(metric, ci as i64 + 1), blocks));
        }
        let spec = TreeSpec::internal_int(root_height(metric), children);
        RepresentingTree::from_spec(&spec).expect("labels are dense by construction")
    };

    let trees = [build(0), build(1)];
    let matrices: Vec<DistanceMatrix> = trees
        .iter()
        .map(|t| ultrametric_from_tree(t).expect("generated trees are valid"))
        .collect();
    let mut sys = MetricSystem::with_names(matrices, vec!["U1".into(), "U2".into()]).unwrap();
    sys.set_labels(labels);
    sys
}

// ---------------------------------------------------------------------------
// Generators: weak notion
// ---------------------------------------------------------------------------

/// Vertex cover → three line metrics. Like the two-line construction, but
/// each edge gets two pivot pairs, and the six ε-offsets (−2ε,−ε | +ε,+2ε |
/// +ε,−ε across the three metrics) rotate the order of the three near-equal
/// pairs into a plurality cycle: one directed triangle per edge.
pub fn gen_wmis_lines_from_vc(g: &SimpleGraph) -> MetricSystem {
    let n = g.vertex_count();
    let edges = g.edges();
    // Per-metric ε offsets for the (r1, r2) pivots of every edge.
    const OFFSETS: [(i64, i64); 3] = [(-2, -1), (1, 2), (1, -1)];

    let mut labels: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let mut coords: [Vec<EpsValue>; 3] = Default::default();
    for metric_coords in coords.iter_mut() {
        *metric_coords = (0..n).map(|i| plain(pow2(i))).collect();
    }
    for (j, &(a, b)) in edges.iter().enumerate() {
        let left1 = pow2(n + 4 * j);
        let left2 = pow2(n + 4 * j + 2);
        let span = pow2(b) - pow2(a);
        labels.push(format!("r{}l1", j + 1));
        labels.push(format!("r{}l2", j + 1));
        labels.push(format!("r{}r1", j + 1));
        labels.push(format!("r{}r2", j + 1));
        for (metric_coords, &(eps1, eps2)) in coords.iter_mut().zip(OFFSETS.iter()) {
            metric_coords.push(plain(left1.clone()));
            metric_coords.push(plain(left2.clone()));
            metric_coords.push(EpsValue::new(&left1 + &span, BigInt::from(eps1)));
            metric_coords.push(EpsValue::new(&left2 + &span, BigInt::from(eps2)));
        }
    }
    let matrices: Vec<DistanceMatrix> = coords
        .iter()
        .map(|c| line_metric_from_coordinates(c).expect("coordinates are distinct"))
        .collect();
    let mut sys =
        MetricSystem::with_names(matrices, vec!["line1".into(), "line2".into(), "line3".into()])
            .unwrap();
    sys.set_labels(labels);
    sys
}

/// Vertex cover → three arbitrary metrics.
///
/// Every non-gadget distance is `2M`. For edge `e = (u, v)` the three pairs
/// among `{v̂_u, v̂_v, r_e}` take three values just above `M`, rotated across
/// the metrics so their plurality relations form a cycle. Values stay within
/// `(M, M+1)` and per-edge value ranges are disjoint, so cross-edge relations
/// are strict and identical in all metrics. The construction self-verifies:
/// the directed triangles of the auxiliary graph must be exactly the per-edge
/// triples.
pub fn gen_wmis_arbitrary_from_vc(g: &SimpleGraph) -> Result<MetricSystem, ReductionError> {
    let n = g.vertex_count();
    let edges = g.edges();
    let m = edges.len();
    let total = m + n;
    let big_m = BigRational::from_integer(BigInt::from(3 * m.max(1)));
    let background = &big_m + &big_m;
    let half_width = BigRational::new(BigInt::from(1), BigInt::from(8 * m.max(1) as i64));

    // Roles within a gadget: 0 = (v̂_u, v̂_v), 1 = (v̂_u, r_e), 2 = (v̂_v, r_e).
    // value_rank[metric][role] ∈ {0, 1, 2} places the role at center − w,
    // center, or center + w.
    const VALUE_RANK: [[i64; 3]; 3] = [[0, 1, 2], [2, 0, 1], [1, 2, 0]];

    let mut matrices: Vec<DistanceMatrix> = (0..3)
        .map(|_| DistanceMatrix::from_pair_fn(total, |_, _| plain(background.clone())))
        .collect();
    for (j, &(u, v)) in edges.iter().enumerate() {
        let center =
            &big_m + BigRational::new(BigInt::from(2 * j as i64 + 1), BigInt::from(2 * m as i64));
        let value = |rank: i64| -> EpsValue {
            plain(&center + BigRational::from_integer(BigInt::from(rank - 1)) * &half_width)
        };
        let vertex_u = PointId(m + u);
        let vertex_v = PointId(m + v);
        let pivot = PointId(j);
        for (metric, ranks) in matrices.iter_mut().zip(VALUE_RANK.iter()) {
            metric.set_pair(vertex_u, vertex_v, value(ranks[0]));
            metric.set_pair(vertex_u, pivot, value(ranks[1]));
            metric.set_pair(vertex_v, pivot, value(ranks[2]));
        }
    }

    let mut labels: Vec<String> = (1..=m).map(|j| format!("r{j}")).collect();
    labels.extend((1..=n).map(|i| format!("v{i}")));
    let mut sys =
        MetricSystem::with_names(matrices, vec!["rho1".into(), "rho2".into(), "rho3".into()])
            .unwrap();
    sys.set_labels(labels);

    // Self-verification: metric axioms plus the exact triangle structure.
    for metric in 0..3 {
        let report = crate::metric::validate_metric(sys.metric(metric));
        if !report.is_valid() {
            return Err(ReductionError::GadgetInvalid(format!(
                "metric {metric} violates the axioms: {:?}",
                report.violations[0]
            )));
        }
    }
    if total >= 2 {
        let aux = build_auxiliary_graph(&build_relation_set(&sys));
        let mut expected = BTreeSet::new();
        for (j, &(u, v)) in edges.iter().enumerate() {
            let mut nodes = [
                pair_index(PointId(m + u), PointId(m + v), total).unwrap().linear_index(),
                pair_index(PointId(m + u), PointId(j), total).unwrap().linear_index(),
                pair_index(PointId(m + v), PointId(j), total).unwrap().linear_index(),
            ];
            nodes.sort_unstable();
            expected.insert(nodes);
        }
        let mut actual = BTreeSet::new();
        aux.graph().for_each_directed_triangle(&vec![true; aux.node_count()], |t| {
            actual.insert(t);
            true
        });
        if actual != expected {
            return Err(ReductionError::GadgetInvalid(format!(
                "directed triangles do not match the edge set: {} found, {} expected",
                actual.len(),
                expected.len()
            )));
        }
    }
    Ok(sys)
}

/// Heights of one representing tree of the matching gadget: the root, the
/// four block nodes, the per-coordinate group node and its element nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GadgetHeights {
    pub root: i64,
    pub block_a: i64,
    pub block_b: i64,
    pub block_c: i64,
    pub block_d: i64,
    pub group: i64,
    pub element: i64,
}

/// The height table that makes the matching reduction work: splitting pairs
/// join only at the root, and exactly the shared-coordinate triple pairs end
/// up in directed triangles.
pub fn standard_matching_heights() -> [GadgetHeights; 3] {
    [
        GadgetHeights {
            root: 10,
            block_a: 5,
            block_b: 4,
            block_c: 3,
            block_d: 1,
            group: 2,
            element: 0,
        },
        GadgetHeights {
            root: 10,
            block_a: 3,
            block_b: 0,
            block_c: 2,
            block_d: 5,
            group: 4,
            element: 1,
        },
        GadgetHeights {
            root: 10,
            block_a: 2,
            block_b: 4,
            block_c: 0,
            block_d: 1,
            group: 5,
            element: 3,
        },
    ]
}

/// The three representing trees of the matching gadget. All share one shape:
/// root → four leaf blocks (a, b, c, d) plus a group node whose element
/// subtrees collect the triples using that element in the tree's coordinate.
/// Elements unused by every triple are omitted (their nodes would be
/// childless).
pub fn matching_gadget_trees(
    inst: &ThreeDmInstance,
    heights: &[GadgetHeights; 3],
) -> Result<[RepresentingTree; 3], ReductionError> {
    let m = inst.triple_count();
    if m == 0 {
        return Err(ReductionError::EmptyInstance);
    }
    let build = |coord: usize| -> RepresentingTree {
        let h = &heights[coord];
        let block = |height: i64, base: usize| {
            TreeSpec::internal_int(height, (0..m).map(|j| TreeSpec::leaf(base + j)).collect())
        };
        let mut element_nodes = Vec::new();
        for element in 0..inst.ground_size() {
            let members: Vec<TreeSpec> = inst
                .triples()
                .iter()
                .enumerate()
                .filter(|(_, t)| t[coord] == element)
                .map(|(j, _)| TreeSpec::leaf(4 * m + j))
                .collect();
            if !members.is_empty() {
                element_nodes.push(TreeSpec::internal_int(h.element, members));
            }
        }
        let spec = TreeSpec::internal_int(
            h.root,
            vec![
                block(h.block_a, 0),
                block(h.block_b, m),
                block(h.block_c, 2 * m),
                block(h.block_d, 3 * m),
                TreeSpec::internal_int(h.group, element_nodes),
            ],
        );
        RepresentingTree::from_spec(&spec).expect("labels are dense by construction")
    };
    Ok([build(0), build(1), build(2)])
}

/// 3-dimensional matching → three ultrametrics over `5m` points
/// (`a`/`b`/`c`/`d` blocks plus one point per triple).
pub fn gen_wmis_ultra_from_3dm(inst: &ThreeDmInstance) -> Result<MetricSystem, ReductionError> {
    gen_wmis_ultra_with_heights(inst, &standard_matching_heights())
}

pub fn gen_wmis_ultra_with_heights(
    inst: &ThreeDmInstance,
    heights: &[GadgetHeights; 3],
) -> Result<MetricSystem, ReductionError> {
    let trees = matching_gadget_trees(inst, heights)?;
    let m = inst.triple_count();
    let matrices: Vec<DistanceMatrix> = trees
        .iter()
        .map(|t| {
            ultrametric_from_tree(t)
                .map_err(|e| ReductionError::GadgetInvalid(format!("tree fails validation: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let mut labels = Vec::with_capacity(5 * m);
    for prefix in ["a", "b", "c", "d", "r"] {
        labels.extend((1..=m).map(|j| format!("{prefix}{j}")));
    }
    let mut sys =
        MetricSystem::with_names(matrices, vec!["U_X".into(), "U_Y".into(), "U_Z".into()])
            .unwrap();
    sys.set_labels(labels);
    Ok(sys)
}

// ---------------------------------------------------------------------------
// Matching-gadget condition verifier
// ---------------------------------------------------------------------------

/// Outcome of exhaustively checking the three structural conditions the
/// matching gadget relies on:
///
/// 1. pairs drawing from two different blocks appear in no directed triangle;
/// 2. every directed triangle contains a shared-coordinate triple pair;
/// 3. every shared-coordinate triple pair lies in at least one directed
///    triangle.
#[derive(Debug, Clone)]
pub struct MatchingGadgetReport {
    pub splitting_pairs_isolated: bool,
    pub triangles_contain_shared_pair: bool,
    pub shared_pairs_in_triangle: bool,
    /// Triangle containing a splitting pair (condition 1 witness).
    pub splitting_witness: Option<[PairId; 3]>,
    /// Triangle without any shared-coordinate pair (condition 2 witness).
    pub unshared_triangle_witness: Option<[PairId; 3]>,
    /// Shared-coordinate pair in no triangle (condition 3 witness).
    pub isolated_shared_pair: Option<PairId>,
    pub triangle_count: u64,
}

impl MatchingGadgetReport {
    pub fn passed(&self) -> bool {
        self.splitting_pairs_isolated
            && self.triangles_contain_shared_pair
            && self.shared_pairs_in_triangle
    }
}

/// Exhaustively verifies the three matching-gadget conditions on a system
/// generated from `inst` (point layout `a..a b..b c..c d..d r..r`).
pub fn verify_matching_gadget(sys: &MetricSystem, inst: &ThreeDmInstance) -> MatchingGadgetReport {
    let m = inst.triple_count();
    assert_eq!(sys.point_count(), 5 * m, "system does not match the instance layout");
    let block = |p: PointId| p.0 / m;
    let splits = |pair: PairId| block(pair.first()) != block(pair.second());
    let shared_coordinate = |pair: PairId| -> bool {
        if block(pair.first()) != 4 || block(pair.second()) != 4 {
            return false;
        }
        let a = inst.triples()[pair.first().0 - 4 * m];
        let b = inst.triples()[pair.second().0 - 4 * m];
        (0..3).any(|c| a[c] == b[c])
    };

    let aux = build_auxiliary_graph(&build_relation_set(sys));
    let all = vec![true; aux.node_count()];
    let mut report = MatchingGadgetReport {
        splitting_pairs_isolated: true,
        triangles_contain_shared_pair: true,
        shared_pairs_in_triangle: true,
        splitting_witness: None,
        unshared_triangle_witness: None,
        isolated_shared_pair: None,
        triangle_count: 0,
    };
    let mut in_triangle = vec![false; aux.node_count()];
    aux.graph().for_each_directed_triangle(&all, |t| {
        report.triangle_count += 1;
        let pairs = [aux.pair_of(t[0]), aux.pair_of(t[1]), aux.pair_of(t[2])];
        for node in t {
            in_triangle[node] = true;
        }
        if report.splitting_witness.is_none() && pairs.iter().any(|p| splits(*p)) {
            report.splitting_pairs_isolated = false;
            report.splitting_witness = Some(pairs);
        }
        if report.unshared_triangle_witness.is_none()
            && !pairs.iter().any(|p| shared_coordinate(*p))
        {
            report.triangles_contain_shared_pair = false;
            report.unshared_triangle_witness = Some(pairs);
        }
        true
    });
    for node in 0..aux.node_count() {
        let pair = aux.pair_of(node);
        if shared_coordinate(pair) && !in_triangle[node] {
            report.shared_pairs_in_triangle = false;
            report.isolated_shared_pair = Some(pair);
            break;
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Exact minimum vertex cover size by branching on an uncovered edge.
pub fn oracle_min_vertex_cover(g: &SimpleGraph) -> Result<usize, OracleError> {
    if g.vertex_count() > VC_ORACLE_GUARD {
        return Err(OracleError::TooLarge { size: g.vertex_count(), guard: VC_ORACLE_GUARD });
    }
    fn search(edges: &[(usize, usize)], covered: u64, chosen: usize, best: &mut usize) {
        if chosen >= *best {
            return;
        }
        match edges.iter().find(|&&(u, v)| covered & (1 << u) == 0 && covered & (1 << v) == 0) {
            None => *best = chosen,
            Some(&(u, v)) => {
                search(edges, covered | (1 << u), chosen + 1, best);
                search(edges, covered | (1 << v), chosen + 1, best);
            }
        }
    }
    let edges = g.edges();
    let mut best = g.vertex_count();
    search(&edges, 0, 0, &mut best);
    Ok(best)
}

/// Exact maximum number of simultaneously satisfiable clauses, by exhausting
/// all assignments.
pub fn oracle_max_2sat(f: &TwoSatFormula) -> Result<usize, OracleError> {
    if f.var_count() > SAT_ORACLE_GUARD {
        return Err(OracleError::TooLarge { size: f.var_count(), guard: SAT_ORACLE_GUARD });
    }
    let mut best = 0;
    for assignment in 0u64..(1 << f.var_count()) {
        let satisfied = f
            .clauses()
            .iter()
            .filter(|clause| {
                clause.iter().any(|lit| (assignment >> lit.var) & 1 == u64::from(lit.positive))
            })
            .count();
        best = best.max(satisfied);
    }
    Ok(best)
}

/// Exact maximum 3-dimensional matching size by include/exclude search over
/// the triples.
pub fn oracle_max_3dm(inst: &ThreeDmInstance) -> Result<usize, OracleError> {
    if inst.triple_count() > DM_ORACLE_GUARD {
        return Err(OracleError::TooLarge { size: inst.triple_count(), guard: DM_ORACLE_GUARD });
    }
    fn search(
        triples: &[[usize; 3]],
        index: usize,
        used: [u64; 3],
        chosen: usize,
        best: &mut usize,
    ) {
        *best = (*best).max(chosen);
        if index == triples.len() || chosen + (triples.len() - index) <= *best {
            return;
        }
        let t = triples[index];
        if (0..3).all(|c| used[c] & (1 << t[c]) == 0) {
            let mut next = used;
            for (c, slot) in next.iter_mut().enumerate() {
                *slot |= 1 << t[c];
            }
            search(triples, index + 1, next, chosen + 1, best);
        }
        search(triples, index + 1, used, chosen, best);
    }
    let mut best = 0;
    search(inst.triples(), 0, [0; 3], 0, &mut best);
    Ok(best)
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

/// Random-instance families. All draws run through one seeded stream, so a
/// fixed `(n, k, model, seed)` reproduces the system bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomModel {
    /// Independent integer distances in `[1000, 2000]` per metric; the range
    /// keeps every matrix a metric and makes ties common.
    Uniform,
    /// One shared base metric plus per-metric additive noise in `[0, noise]`.
    PerturbedCommon { noise: u32 },
    /// Independent random representing trees, read off as ultrametrics.
    Ultrametric,
    /// Independent random distinct integer coordinates on the line.
    Line,
}

impl RandomModel {
    pub fn name(&self) -> &'static str {
        match self {
            RandomModel::Uniform => "uniform",
            RandomModel::PerturbedCommon { .. } => "perturbed-common",
            RandomModel::Ultrametric => "ultrametric",
            RandomModel::Line => "line",
        }
    }
}

pub fn random_system(n: usize, k: usize, model: RandomModel, seed: u64) -> MetricSystem {
    assert!(n >= 2 && k >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let metrics: Vec<DistanceMatrix> = match model {
        RandomModel::Uniform => (0..k)
            .map(|_| {
                DistanceMatrix::from_pair_fn(n, |_, _| {
                    EpsValue::from_integer(rng.random_range(1000..=2000))
                })
            })
            .collect(),
        RandomModel::PerturbedCommon { noise } => {
            let noise = i64::from(noise).min(500);
            let base = DistanceMatrix::from_pair_fn(n, |_, _| {
                EpsValue::from_integer(rng.random_range(1000..=(2000 - noise)))
            });
            (0..k)
                .map(|_| {
                    DistanceMatrix::from_pair_fn(n, |i, j| {
                        let bump = EpsValue::from_integer(rng.random_range(0..=noise));
                        base.get(i, j) + &bump
                    })
                })
                .collect()
        }
        RandomModel::Ultrametric => (0..k).map(|_| random_ultrametric(n, &mut rng)).collect(),
        RandomModel::Line => (0..k).map(|_| random_line(n, &mut rng)).collect(),
    };
    MetricSystem::new(metrics).expect("matching sizes by construction")
}

fn random_ultrametric(n: usize, rng: &mut ChaCha8Rng) -> DistanceMatrix {
    // Random binary merge tree; merge heights never decrease, occasionally
    // tying with a child to produce equal distances.
    let mut clusters: Vec<(TreeSpec, i64)> = (0..n).map(|i| (TreeSpec::leaf(i), 0)).collect();
    while clusters.len() > 1 {
        let i = rng.random_range(0..clusters.len());
        let mut j = rng.random_range(0..clusters.len() - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = (i.min(j), i.max(j));
        let (spec_b, height_b) = clusters.remove(b);
        let (spec_a, height_a) = clusters.remove(a);
        let height = height_a.max(height_b).max(1) + rng.random_range(0..=1);
        clusters.push((TreeSpec::internal_int(height, vec![spec_a, spec_b]), height));
    }
    let tree =
        RepresentingTree::from_spec(&clusters.pop().expect("one cluster").0).expect("dense labels");
    ultrametric_from_tree(&tree).expect("random trees are valid")
}

fn random_line(n: usize, rng: &mut ChaCha8Rng) -> DistanceMatrix {
    let bound = (4 * n * n) as i64;
    let mut seen = BTreeSet::new();
    let mut coords = Vec::with_capacity(n);
    while coords.len() < n {
        let c = rng.random_range(0..=bound);
        if seen.insert(c) {
            coords.push(EpsValue::from_integer(c));
        }
    }
    line_metric_from_coordinates(&coords).expect("coordinates are distinct")
}

/// Seeded random graph with the given percent edge density.
pub fn random_graph(n: usize, density_percent: u32, seed: u64) -> SimpleGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_range(0..100) < density_percent {
                edges.push((u, v));
            }
        }
    }
    SimpleGraph::new(n, &edges).expect("generated edges are canonical")
}

/// Seeded random formula with clauses of one or two distinct literals.
pub fn random_two_sat(max_vars: usize, max_clauses: usize, seed: u64) -> TwoSatFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_vars = rng.random_range(1..=max_vars);
    let n_clauses = rng.random_range(1..=max_clauses);
    let mut clauses = Vec::with_capacity(n_clauses);
    for _ in 0..n_clauses {
        let lit = |rng: &mut ChaCha8Rng| Literal {
            var: rng.random_range(0..n_vars),
            positive: rng.random_bool(0.5),
        };
        let first = lit(&mut rng);
        if n_vars == 1 && !rng.random_bool(0.5) {
            // Only x1 and ¬x1 exist; a two-literal clause must use both.
            clauses.push(vec![
                Literal { var: 0, positive: true },
                Literal { var: 0, positive: false },
            ]);
        } else if rng.random_bool(0.5) {
            clauses.push(vec![first]);
        } else {
            let mut second = lit(&mut rng);
            while second == first {
                second = lit(&mut rng);
            }
            clauses.push(vec![first, second]);
        }
    }
    TwoSatFormula::new(n_vars, clauses).expect("sampled clauses are well-formed")
}

/// Seeded random triple system with distinct triples.
pub fn random_three_dm(n: usize, m: usize, seed: u64) -> ThreeDmInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = m.min(n * n * n);
    let mut seen = BTreeSet::new();
    let mut triples = Vec::with_capacity(m);
    while triples.len() < m {
        let t = [rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n)];
        if seen.insert(t) {
            triples.push(t);
        }
    }
    ThreeDmInstance::new(n, triples).expect("sampled triples are distinct")
}

// ---------------------------------------------------------------------------
// Graph enumeration (for exhaustive round-trip testing)
// ---------------------------------------------------------------------------

/// All non-isomorphic simple graphs with 1 to `max_n` vertices, canonical
/// representatives in deterministic order. `max_n` is capped at 7 to keep the
/// permutation sweep cheap.
pub fn nonisomorphic_graphs(max_n: usize) -> Vec<SimpleGraph> {
    assert!(max_n <= 7);
    let mut out = Vec::new();
    for n in 1..=max_n {
        let slots: Vec<(usize, usize)> =
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let perms = permutations(n);
        // slot_maps[p][s] = slot index of slot s under permutation p.
        let slot_maps: Vec<Vec<usize>> = perms
            .iter()
            .map(|perm| {
                slots
                    .iter()
                    .map(|&(a, b)| {
                        let (x, y) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
                        slots.iter().position(|&s| s == (x, y)).expect("slot exists")
                    })
                    .collect()
            })
            .collect();
        let mut canon_seen = BTreeSet::new();
        for mask in 0u32..(1 << slots.len()) {
            let canon = slot_maps
                .iter()
                .map(|map| {
                    let mut image = 0u32;
                    for (s, &target) in map.iter().enumerate() {
                        if mask & (1 << s) != 0 {
                            image |= 1 << target;
                        }
                    }
                    image
                })
                .min()
                .expect("identity permutation exists");
            if canon_seen.insert(canon) {
                let edges: Vec<(usize, usize)> = slots
                    .iter()
                    .enumerate()
                    .filter(|(s, _)| canon & (1 << s) != 0)
                    .map(|(_, &e)| e)
                    .collect();
                out.push(SimpleGraph::new(n, &edges).expect("canonical edges are valid"));
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(current.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, current, out);
            if k % 2 == 0 {
                current.swap(i, k - 1);
            } else {
                current.swap(0, k - 1);
            }
        }
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    heap(n, &mut current, &mut out);
    out
}
