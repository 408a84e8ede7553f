//! Height-labeled rooted trees and the LCA-height realization of
//! ultrametrics.
//!
//! A representing tree carries a non-negative rational height on every node;
//! all leaves sit at height 0 and heights never increase from the root down.
//! The ultrametric it realizes assigns two points the height of their lowest
//! common ancestor. [`tree_from_ultrametric`] inverts the construction by
//! exact single-linkage clustering, which is lossless on ultrametrics.

use crate::eps::{rational_from_str, rational_to_string, EpsValue};
use crate::metric::validate_ultrametric;
use crate::metric::{DistanceMatrix, MetricViolation, PointId};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Blueprint for a tree: what the JSON format encodes and what generators
/// build. Leaves name points; internal nodes carry heights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeSpec {
    Internal { height: BigRational, children: Vec<TreeSpec> },
    Leaf { label: usize },
}

impl TreeSpec {
    pub fn internal(height: BigRational, children: Vec<TreeSpec>) -> Self {
        TreeSpec::Internal { height, children }
    }

    pub fn internal_int(height: i64, children: Vec<TreeSpec>) -> Self {
        TreeSpec::internal(BigRational::from_integer(height.into()), children)
    }

    pub fn leaf(label: usize) -> Self {
        TreeSpec::Leaf { label }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TreeSpecWire {
    Internal { height: String, children: Vec<TreeSpecWire> },
    Leaf { leaf: usize },
}

impl TreeSpecWire {
    fn from_spec(spec: &TreeSpec) -> Self {
        match spec {
            TreeSpec::Internal { height, children } => TreeSpecWire::Internal {
                height: rational_to_string(height),
                children: children.iter().map(TreeSpecWire::from_spec).collect(),
            },
            TreeSpec::Leaf { label } => TreeSpecWire::Leaf { leaf: *label },
        }
    }

    fn into_spec(self) -> Result<TreeSpec, TreeError> {
        match self {
            TreeSpecWire::Internal { height, children } => Ok(TreeSpec::Internal {
                height: rational_from_str(&height).map_err(TreeError::BadHeight)?,
                children: children
                    .into_iter()
                    .map(TreeSpecWire::into_spec)
                    .collect::<Result<_, _>>()?,
            }),
            TreeSpecWire::Leaf { leaf } => Ok(TreeSpec::Leaf { label: leaf }),
        }
    }
}

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("malformed tree JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unparsable height: {0}")]
    BadHeight(String),
    #[error("leaf label {0} appears more than once")]
    DuplicateLeafLabel(usize),
    #[error("leaf labels must cover 0..{expected}, label {missing} is missing")]
    MissingLeafLabel { expected: usize, missing: usize },
    #[error("tree has no leaves")]
    EmptyTree,
    #[error("point {0} is not a leaf of this tree")]
    IndexError(usize),
    #[error("invalid tree: {0:?}")]
    InvalidTree(Vec<TreeViolation>),
    #[error("matrix is not an ultrametric, witness violation {0:?}")]
    NotUltrametric(MetricViolation),
    #[error("distance between {i} and {j} carries an infinitesimal component; tree heights are plain rationals")]
    EpsilonDistance { i: usize, j: usize },
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeViolation {
    /// Child height exceeds its parent's height.
    Monotonicity { parent: NodeId, child: NodeId },
    /// A leaf sits above height 0.
    NonzeroLeafHeight { leaf: NodeId },
    /// Internal node with no children.
    ChildlessInternal { node: NodeId },
    /// Negative height.
    NegativeHeight { node: NodeId },
    /// Parent/child links disagree or a node is unreachable from the root.
    Structural { node: NodeId },
}

#[derive(Clone, Debug)]
struct Node {
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    height: BigRational,
    leaf: Option<PointId>,
}

/// Rooted height-labeled tree whose leaves are bijectively labeled by the
/// points `0..n`.
#[derive(Clone, Debug)]
pub struct RepresentingTree {
    nodes: Vec<Node>,
    root: NodeId,
    leaf_node: Vec<NodeId>,
}

impl RepresentingTree {
    pub fn from_spec(spec: &TreeSpec) -> Result<Self, TreeError> {
        let mut nodes = Vec::new();
        let mut leaves: Vec<(usize, NodeId)> = Vec::new();
        let root = build_nodes(spec, None, &mut nodes, &mut leaves);
        if leaves.is_empty() {
            return Err(TreeError::EmptyTree);
        }
        let mut leaf_node = vec![usize::MAX; leaves.len()];
        for &(label, node) in &leaves {
            if label >= leaves.len() {
                let missing = (0..leaves.len())
                    .find(|l| !leaves.iter().any(|&(seen, _)| seen == *l))
                    .expect("an out-of-range label leaves a gap below the leaf count");
                return Err(TreeError::MissingLeafLabel { expected: leaves.len(), missing });
            }
            if leaf_node[label] != usize::MAX {
                return Err(TreeError::DuplicateLeafLabel(label));
            }
            leaf_node[label] = node;
        }
        Ok(RepresentingTree { nodes, root, leaf_node })
    }

    pub fn to_spec(&self) -> TreeSpec {
        self.spec_of(self.root)
    }

    fn spec_of(&self, node: NodeId) -> TreeSpec {
        let n = &self.nodes[node];
        match n.leaf {
            Some(p) => TreeSpec::Leaf { label: p.0 },
            None => TreeSpec::Internal {
                height: n.height.clone(),
                children: n.children.iter().map(|&c| self.spec_of(c)).collect(),
            },
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_node.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn height_of(&self, node: NodeId) -> &BigRational {
        &self.nodes[node].height
    }

    pub fn leaf_node_of(&self, p: PointId) -> Result<NodeId, TreeError> {
        self.leaf_node.get(p.0).copied().ok_or(TreeError::IndexError(p.0))
    }

    /// Heights of all internal nodes, in preorder.
    pub fn internal_heights(&self) -> Vec<BigRational> {
        self.nodes.iter().filter(|n| n.leaf.is_none()).map(|n| n.height.clone()).collect()
    }

    fn depth(&self, mut node: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.nodes[node].parent {
            node = p;
            d += 1;
        }
        d
    }

    /// Lowest common ancestor of two leaves; `lca(u, u)` is the leaf itself.
    pub fn lca(&self, u: PointId, v: PointId) -> Result<NodeId, TreeError> {
        let mut a = self.leaf_node_of(u)?;
        let mut b = self.leaf_node_of(v)?;
        let (mut da, mut db) = (self.depth(a), self.depth(b));
        while da > db {
            a = self.nodes[a].parent.expect("depth accounted");
            da -= 1;
        }
        while db > da {
            b = self.nodes[b].parent.expect("depth accounted");
            db -= 1;
        }
        while a != b {
            a = self.nodes[a].parent.expect("roots coincide");
            b = self.nodes[b].parent.expect("roots coincide");
        }
        Ok(a)
    }

    /// Reports each monotonicity, leaf-height or structural defect.
    pub fn validate(&self) -> Vec<TreeViolation> {
        let mut out = Vec::new();
        for (id, node) in self.nodes.iter().enumerate() {
            if node.height.is_negative() {
                out.push(TreeViolation::NegativeHeight { node: id });
            }
            match node.leaf {
                Some(_) => {
                    if !node.height.is_zero() {
                        out.push(TreeViolation::NonzeroLeafHeight { leaf: id });
                    }
                }
                None => {
                    if node.children.is_empty() {
                        out.push(TreeViolation::ChildlessInternal { node: id });
                    }
                }
            }
            for &child in &node.children {
                if self.nodes[child].parent != Some(id) {
                    out.push(TreeViolation::Structural { node: child });
                }
                if self.nodes[child].height > node.height {
                    out.push(TreeViolation::Monotonicity { parent: id, child });
                }
            }
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(node) = stack.pop() {
            if seen[node] {
                out.push(TreeViolation::Structural { node });
                continue;
            }
            seen[node] = true;
            stack.extend(self.nodes[node].children.iter().copied());
        }
        for (id, reached) in seen.iter().enumerate() {
            if !reached {
                out.push(TreeViolation::Structural { node: id });
            }
        }
        out
    }
}

fn build_nodes(
    spec: &TreeSpec,
    parent: Option<NodeId>,
    nodes: &mut Vec<Node>,
    leaves: &mut Vec<(usize, NodeId)>,
) -> NodeId {
    let id = nodes.len();
    match spec {
        TreeSpec::Leaf { label } => {
            nodes.push(Node {
                parent,
                children: Vec::new(),
                height: BigRational::zero(),
                leaf: Some(PointId(*label)),
            });
            leaves.push((*label, id));
        }
        TreeSpec::Internal { height, children } => {
            nodes.push(Node { parent, children: Vec::new(), height: height.clone(), leaf: None });
            let child_ids: Vec<NodeId> =
                children.iter().map(|c| build_nodes(c, Some(id), nodes, leaves)).collect();
            nodes[id].children = child_ids;
        }
    }
    id
}

/// Reads the distance matrix off a valid tree: `d[p][q] = height(lca(p, q))`.
pub fn ultrametric_from_tree(tree: &RepresentingTree) -> Result<DistanceMatrix, TreeError> {
    let violations = tree.validate();
    if !violations.is_empty() {
        return Err(TreeError::InvalidTree(violations));
    }
    let n = tree.leaf_count();
    let mut m = DistanceMatrix::zeroed(n);
    for i in 0..n {
        for j in i + 1..n {
            let anc = tree.lca(PointId(i), PointId(j))?;
            m.set_pair(
                PointId(i),
                PointId(j),
                EpsValue::from_rational(tree.height_of(anc).clone()),
            );
        }
    }
    Ok(m)
}

/// Rebuilds a representing tree from an ultrametric by merging closest
/// clusters at their pairwise distance. Exact: the output tree realizes the
/// input matrix bit for bit. Child order is canonicalized by smallest leaf
/// label, so equal matrices yield identical trees.
pub fn tree_from_ultrametric(m: &DistanceMatrix) -> Result<RepresentingTree, TreeError> {
    let n = m.point_count();
    if n == 0 {
        return Err(TreeError::EmptyTree);
    }
    for i in 0..n {
        for j in i + 1..n {
            if !m.get(PointId(i), PointId(j)).is_rational() {
                return Err(TreeError::EpsilonDistance { i, j });
            }
        }
    }
    let report = validate_ultrametric(m);
    if let Some(v) = report.violations.first() {
        return Err(TreeError::NotUltrametric(v.clone()));
    }

    struct Cluster {
        spec: TreeSpec,
        rep: PointId,
        min_label: usize,
    }
    let mut clusters: Vec<Cluster> = (0..n)
        .map(|i| Cluster { spec: TreeSpec::leaf(i), rep: PointId(i), min_label: i })
        .collect();

    let mut levels: Vec<BigRational> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            levels.push(m.get(PointId(i), PointId(j)).base().clone());
        }
    }
    levels.sort();
    levels.dedup();

    fn find(group_of: &mut [usize], mut x: usize) -> usize {
        while group_of[x] != x {
            group_of[x] = group_of[group_of[x]];
            x = group_of[x];
        }
        x
    }

    for level in levels {
        // Group clusters whose representatives sit at exactly this distance.
        // On an ultrametric, cross-cluster distances are constant and the
        // same-level relation is transitive, so union-find grouping is exact.
        let mut group_of: Vec<usize> = (0..clusters.len()).collect();
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                if *m.get(clusters[i].rep, clusters[j].rep).base() == level {
                    let (a, b) = (find(&mut group_of, i), find(&mut group_of, j));
                    if a != b {
                        group_of[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut grouped: Vec<Vec<usize>> = vec![Vec::new(); clusters.len()];
        for i in 0..clusters.len() {
            let g = find(&mut group_of, i);
            grouped[g].push(i);
        }
        let mut slots: Vec<Option<Cluster>> = clusters.into_iter().map(Some).collect();
        let mut next: Vec<Cluster> = Vec::new();
        for members in grouped.into_iter().filter(|g| !g.is_empty()) {
            let mut parts: Vec<Cluster> =
                members.iter().map(|&i| slots[i].take().expect("member taken once")).collect();
            if parts.len() == 1 {
                next.push(parts.pop().expect("single member"));
            } else {
                parts.sort_by_key(|c| c.min_label);
                let rep = parts[0].rep;
                let min_label = parts[0].min_label;
                let spec =
                    TreeSpec::internal(level.clone(), parts.into_iter().map(|c| c.spec).collect());
                next.push(Cluster { spec, rep, min_label });
            }
        }
        next.sort_by_key(|c| c.min_label);
        clusters = next;
        if clusters.len() == 1 {
            break;
        }
    }

    assert_eq!(clusters.len(), 1, "every distance level processed");
    RepresentingTree::from_spec(&clusters.pop().expect("one cluster").spec)
}

pub fn tree_to_json(tree: &RepresentingTree) -> String {
    serde_json::to_string_pretty(&TreeSpecWire::from_spec(&tree.to_spec()))
        .expect("tree serialization cannot fail")
}

pub fn tree_from_json(text: &str) -> Result<RepresentingTree, TreeError> {
    let wire: TreeSpecWire = serde_json::from_str(text)?;
    RepresentingTree::from_spec(&wire.into_spec()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Five leaves A..E = 0..4, internal heights {1,2,3,4}, d(A,E) = 3.
    fn five_leaf_tree() -> RepresentingTree {
        let spec = TreeSpec::internal_int(
            4,
            vec![
                TreeSpec::internal_int(
                    3,
                    vec![
                        TreeSpec::internal_int(1, vec![TreeSpec::leaf(0), TreeSpec::leaf(1)]),
                        TreeSpec::leaf(4),
                    ],
                ),
                TreeSpec::internal_int(2, vec![TreeSpec::leaf(2), TreeSpec::leaf(3)]),
            ],
        );
        RepresentingTree::from_spec(&spec).unwrap()
    }

    fn int(x: i64) -> BigRational {
        BigRational::from_integer(x.into())
    }

    #[test]
    fn lca_of_siblings_is_their_parent() {
        let tree = five_leaf_tree();
        let anc = tree.lca(PointId(0), PointId(1)).unwrap();
        assert_eq!(*tree.height_of(anc), int(1));
        let same = tree.lca(PointId(2), PointId(2)).unwrap();
        assert_eq!(same, tree.leaf_node_of(PointId(2)).unwrap());
    }

    #[test]
    fn lca_across_root_subtrees_is_the_root() {
        let tree = five_leaf_tree();
        let anc = tree.lca(PointId(0), PointId(2)).unwrap();
        assert_eq!(anc, tree.root());
    }

    #[test]
    fn distance_from_first_to_last_leaf_is_three() {
        let tree = five_leaf_tree();
        let anc = tree.lca(PointId(0), PointId(4)).unwrap();
        assert_eq!(*tree.height_of(anc), int(3));
        let m = ultrametric_from_tree(&tree).unwrap();
        assert_eq!(*m.get(PointId(0), PointId(4)), EpsValue::from_integer(3));
        assert!(validate_ultrametric(&m).is_valid());
    }

    #[test]
    fn star_tree_gives_uniform_metric() {
        let spec = TreeSpec::internal_int(1, (0..5).map(TreeSpec::leaf).collect());
        let tree = RepresentingTree::from_spec(&spec).unwrap();
        let m = ultrametric_from_tree(&tree).unwrap();
        for i in 0..5 {
            for j in i + 1..5 {
                assert_eq!(*m.get(PointId(i), PointId(j)), EpsValue::from_integer(1));
            }
        }
    }

    #[test]
    fn child_above_parent_is_reported() {
        let spec = TreeSpec::internal_int(
            2,
            vec![
                TreeSpec::internal_int(5, vec![TreeSpec::leaf(0), TreeSpec::leaf(1)]),
                TreeSpec::leaf(2),
            ],
        );
        let tree = RepresentingTree::from_spec(&spec).unwrap();
        let violations = tree.validate();
        assert!(violations.iter().any(|v| matches!(v, TreeViolation::Monotonicity { .. })));
        assert!(matches!(ultrametric_from_tree(&tree), Err(TreeError::InvalidTree(_))));
    }

    #[test]
    fn nonzero_leaf_height_is_reported() {
        let mut tree = five_leaf_tree();
        let leaf = tree.leaf_node_of(PointId(1)).unwrap();
        tree.nodes[leaf].height = int(1);
        assert!(tree
            .validate()
            .iter()
            .any(|v| matches!(v, TreeViolation::NonzeroLeafHeight { .. })));
    }

    #[test]
    fn degree_one_chains_are_permitted() {
        let spec = TreeSpec::internal_int(
            3,
            vec![TreeSpec::internal_int(1, vec![TreeSpec::leaf(0)]), TreeSpec::leaf(1)],
        );
        let tree = RepresentingTree::from_spec(&spec).unwrap();
        assert!(tree.validate().is_empty());
        let m = ultrametric_from_tree(&tree).unwrap();
        assert_eq!(*m.get(PointId(0), PointId(1)), EpsValue::from_integer(3));
    }

    #[test]
    fn duplicate_and_missing_labels_rejected() {
        let dup = TreeSpec::internal_int(1, vec![TreeSpec::leaf(0), TreeSpec::leaf(0)]);
        assert!(matches!(
            RepresentingTree::from_spec(&dup),
            Err(TreeError::DuplicateLeafLabel(0))
        ));
        let gap = TreeSpec::internal_int(1, vec![TreeSpec::leaf(0), TreeSpec::leaf(2)]);
        assert!(matches!(
            RepresentingTree::from_spec(&gap),
            Err(TreeError::MissingLeafLabel { missing: 1, .. })
        ));
    }

    #[test]
    fn uniform_metric_becomes_star_tree() {
        let m = DistanceMatrix::from_pair_fn(4, |_, _| EpsValue::from_integer(1));
        let tree = tree_from_ultrametric(&m).unwrap();
        assert_eq!(tree.leaf_count(), 4);
        assert_eq!(tree.node_count(), 5);
        assert_eq!(*tree.height_of(tree.root()), int(1));
    }

    #[test]
    fn five_leaf_matrix_rebuilds_heights_one_to_four() {
        let m = ultrametric_from_tree(&five_leaf_tree()).unwrap();
        let rebuilt = tree_from_ultrametric(&m).unwrap();
        let mut heights = rebuilt.internal_heights();
        heights.sort();
        assert_eq!(heights, vec![int(1), int(2), int(3), int(4)]);
        assert_eq!(ultrametric_from_tree(&rebuilt).unwrap(), m);
    }

    #[test]
    fn non_ultrametric_is_rejected_with_witness() {
        let mut m = DistanceMatrix::zeroed(3);
        m.set_pair(PointId(0), PointId(1), EpsValue::from_integer(1));
        m.set_pair(PointId(1), PointId(2), EpsValue::from_integer(2));
        m.set_pair(PointId(0), PointId(2), EpsValue::from_integer(3));
        assert!(matches!(tree_from_ultrametric(&m), Err(TreeError::NotUltrametric(_))));
    }

    #[test]
    fn infinitesimal_distances_cannot_become_heights() {
        let mut m = DistanceMatrix::zeroed(2);
        m.set_pair(PointId(0), PointId(1), EpsValue::epsilon());
        assert!(matches!(
            tree_from_ultrametric(&m),
            Err(TreeError::EpsilonDistance { i: 0, j: 1 })
        ));
    }

    #[test]
    fn json_round_trip_preserves_shape() {
        let tree = five_leaf_tree();
        let json = tree_to_json(&tree);
        let back = tree_from_json(&json).unwrap();
        assert_eq!(tree_to_json(&back), json);
        assert_eq!(ultrametric_from_tree(&back).unwrap(), ultrametric_from_tree(&tree).unwrap());
    }

    /// Random tree by repeated merges; zero internal heights are included on
    /// purpose (they realize distance 0 between distinct points).
    fn tree_from_script(n: usize, script: &[(usize, usize)]) -> RepresentingTree {
        let mut clusters: Vec<(TreeSpec, i64)> = (0..n).map(|i| (TreeSpec::leaf(i), 0)).collect();
        let mut step = 0;
        while clusters.len() > 1 {
            let (pick, raise) = script[step % script.len()];
            step += 1;
            let i = pick % clusters.len();
            let j = (pick / 7) % clusters.len();
            let j = if i == j { (j + 1) % clusters.len() } else { j };
            let (a, b) = (i.min(j), i.max(j));
            let (spec_b, h_b) = clusters.remove(b);
            let (spec_a, h_a) = clusters.remove(a);
            let h = h_a.max(h_b) + (raise as i64 % 3);
            clusters.push((TreeSpec::internal_int(h, vec![spec_a, spec_b]), h));
        }
        RepresentingTree::from_spec(&clusters.pop().unwrap().0).unwrap()
    }

    proptest! {
        #[test]
        fn random_trees_realize_ultrametrics(
            n in 2usize..9,
            script in proptest::collection::vec((0usize..1000, 0usize..3), 8..32),
        ) {
            let tree = tree_from_script(n, &script);
            prop_assert!(tree.validate().is_empty());
            let m = ultrametric_from_tree(&tree).unwrap();
            prop_assert!(validate_ultrametric(&m).is_valid());
        }

        #[test]
        fn rebuild_fixes_the_matrix_exactly(
            n in 2usize..9,
            script in proptest::collection::vec((0usize..1000, 0usize..3), 8..32),
        ) {
            let tree = tree_from_script(n, &script);
            let m = ultrametric_from_tree(&tree).unwrap();
            let rebuilt = tree_from_ultrametric(&m).unwrap();
            prop_assert!(rebuilt.validate().is_empty());
            prop_assert_eq!(ultrametric_from_tree(&rebuilt).unwrap(), m);
        }
    }
}
