//! Point sets, pair indexing, distance matrices and metric systems.
//!
//! A [`MetricSystem`] bundles `k` symmetric distance matrices over one point
//! set; it is the object every checker and solver consumes. Metric axioms are
//! validated on demand (see [`validate_metric`] / [`validate_ultrametric`]),
//! not on construction, so instance generators can fill matrices in stages.

use crate::eps::EpsValue;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Index of a point, dense in `[0, n)`. A point keeps its identity across all
/// `k` metrics of a system.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub usize);

impl fmt::Debug for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Canonical unordered pair of distinct points, `first < second`, together
/// with its row-major rank among all such pairs of an `n`-point set.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairId {
    first: PointId,
    second: PointId,
    linear: usize,
}

impl PairId {
    pub fn first(&self) -> PointId {
        self.first
    }

    pub fn second(&self) -> PointId {
        self.second
    }

    pub fn points(&self) -> [PointId; 2] {
        [self.first, self.second]
    }

    pub fn linear_index(&self) -> usize {
        self.linear
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.first == p || self.second == p
    }
}

impl fmt::Debug for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.first.0, self.second.0)
    }
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.first.0, self.second.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("pair endpoints must be distinct (point {0})")]
    InvalidPair(usize),
    #[error("point index {index} out of range for {n} points")]
    IndexError { index: usize, n: usize },
    #[error("coordinates {first} and {second} coincide")]
    DuplicateCoordinate { first: usize, second: usize },
    #[error("restriction keeps no points")]
    EmptySystem,
    #[error("metric system needs at least one metric")]
    NoMetrics,
    #[error("matrix {index} has {found} points, expected {expected}")]
    SizeMismatch { index: usize, found: usize, expected: usize },
}

/// Number of unordered pairs of an `n`-point set.
pub fn pair_count(n: usize) -> usize {
    n * (n.saturating_sub(1)) / 2
}

/// Canonicalizes `(i, j)` to `(min, max)` and computes its row-major rank.
pub fn pair_index(i: PointId, j: PointId, n: usize) -> Result<PairId, MetricError> {
    if i.0 >= n {
        return Err(MetricError::IndexError { index: i.0, n });
    }
    if j.0 >= n {
        return Err(MetricError::IndexError { index: j.0, n });
    }
    if i == j {
        return Err(MetricError::InvalidPair(i.0));
    }
    let (a, b) = if i.0 < j.0 { (i.0, j.0) } else { (j.0, i.0) };
    let linear = a * n - a * (a + 1) / 2 + (b - a - 1);
    Ok(PairId { first: PointId(a), second: PointId(b), linear })
}

/// Inverse of [`pair_index`] on `[0, pair_count(n))`.
pub fn pair_unindex(linear: usize, n: usize) -> Result<PairId, MetricError> {
    if linear >= pair_count(n) {
        return Err(MetricError::IndexError { index: linear, n });
    }
    let mut a = 0usize;
    let mut offset = linear;
    loop {
        let row = n - a - 1;
        if offset < row {
            return Ok(PairId { first: PointId(a), second: PointId(a + 1 + offset), linear });
        }
        offset -= row;
        a += 1;
    }
}

/// All pairs of an `n`-point set in linear-index (lexicographic) order.
pub fn all_pairs(n: usize) -> impl Iterator<Item = PairId> {
    (0..n).flat_map(move |a| {
        (a + 1..n).map(move |b| pair_index(PointId(a), PointId(b), n).expect("valid pair"))
    })
}

/// Symmetric `n`×`n` matrix of exact distances.
#[derive(Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<EpsValue>,
}

impl DistanceMatrix {
    /// All-zero matrix; fill it with [`DistanceMatrix::set_pair`].
    pub fn zeroed(n: usize) -> Self {
        DistanceMatrix { n, values: vec![EpsValue::zero(); n * n] }
    }

    /// Builds a matrix with zero diagonal and `f` evaluated once per
    /// unordered pair.
    pub fn from_pair_fn(n: usize, mut f: impl FnMut(PointId, PointId) -> EpsValue) -> Self {
        let mut m = DistanceMatrix::zeroed(n);
        for i in 0..n {
            for j in i + 1..n {
                m.set_pair(PointId(i), PointId(j), f(PointId(i), PointId(j)));
            }
        }
        m
    }

    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: PointId, j: PointId) -> &EpsValue {
        &self.values[i.0 * self.n + j.0]
    }

    pub fn distance(&self, pair: PairId) -> &EpsValue {
        self.get(pair.first, pair.second)
    }

    /// Sets both orientations of `{i, j}`.
    pub fn set_pair(&mut self, i: PointId, j: PointId, value: EpsValue) {
        assert_ne!(i, j, "diagonal entries stay zero");
        self.values[i.0 * self.n + j.0] = value.clone();
        self.values[j.0 * self.n + i.0] = value;
    }

    fn restrict(&self, keep: &[PointId]) -> DistanceMatrix {
        DistanceMatrix::from_pair_fn(keep.len(), |a, b| self.get(keep[a.0], keep[b.0]).clone())
    }
}

impl fmt::Debug for DistanceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DistanceMatrix(n={})", self.n)?;
        for i in 0..self.n {
            let row: Vec<String> =
                (0..self.n).map(|j| self.values[i * self.n + j].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// One violated metric (or ultrametric) axiom, with the offending indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricViolation {
    /// `d[i][j] != d[j][i]`.
    Asymmetric { i: PointId, j: PointId },
    /// `d[i][i] != 0`.
    NonzeroDiagonal { i: PointId },
    /// `d[i][j] <= 0` for `i != j`.
    NonPositive { i: PointId, j: PointId },
    /// `d[x][z] > d[x][y] + d[y][z]`.
    Triangle { x: PointId, y: PointId, z: PointId },
    /// `d[x][z] > max(d[x][y], d[y][z])`.
    StrongTriangle { x: PointId, y: PointId, z: PointId },
}

/// Violations are data, not failures: an empty report means the axioms hold.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<MetricViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn basic_violations(m: &DistanceMatrix, check_positive: bool) -> Vec<MetricViolation> {
    let mut out = Vec::new();
    let n = m.n;
    for i in 0..n {
        if !m.get(PointId(i), PointId(i)).is_zero() {
            out.push(MetricViolation::NonzeroDiagonal { i: PointId(i) });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (pi, pj) = (PointId(i), PointId(j));
            if m.get(pi, pj) != m.get(pj, pi) {
                out.push(MetricViolation::Asymmetric { i: pi, j: pj });
            }
            if check_positive && !m.get(pi, pj).is_positive() {
                out.push(MetricViolation::NonPositive { i: pi, j: pj });
            }
        }
    }
    out
}

/// Reports every violation of symmetry, zero diagonal, positivity and the
/// triangle inequality.
pub fn validate_metric(m: &DistanceMatrix) -> ValidationReport {
    let mut violations = basic_violations(m, true);
    let n = m.n;
    for x in 0..n {
        for z in x + 1..n {
            for y in 0..n {
                if y == x || y == z {
                    continue;
                }
                let (px, py, pz) = (PointId(x), PointId(y), PointId(z));
                let detour = m.get(px, py) + m.get(py, pz);
                if *m.get(px, pz) > detour {
                    violations.push(MetricViolation::Triangle { x: px, y: py, z: pz });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Reports every triple violating the strong triangle inequality
/// `d(x,z) <= max(d(x,y), d(y,z))`, plus symmetry and diagonal defects.
///
/// Positivity is deliberately not required here: gadget constructions place
/// distance zero between some distinct points, which is compatible with the
/// strong triangle inequality.
pub fn validate_ultrametric(m: &DistanceMatrix) -> ValidationReport {
    let mut violations = basic_violations(m, false);
    let n = m.n;
    for x in 0..n {
        for z in x + 1..n {
            for y in 0..n {
                if y == x || y == z {
                    continue;
                }
                let (px, py, pz) = (PointId(x), PointId(y), PointId(z));
                let bound = m.get(px, py).max(m.get(py, pz));
                if m.get(px, pz) > bound {
                    violations.push(MetricViolation::StrongTriangle { x: px, y: py, z: pz });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Builds the absolute-difference metric of points on the real line.
///
/// Coordinates must be pairwise distinct, otherwise two distinct points
/// would sit at distance zero.
pub fn line_metric_from_coordinates(coords: &[EpsValue]) -> Result<DistanceMatrix, MetricError> {
    for i in 0..coords.len() {
        for j in i + 1..coords.len() {
            if coords[i] == coords[j] {
                return Err(MetricError::DuplicateCoordinate { first: i, second: j });
            }
        }
    }
    Ok(DistanceMatrix::from_pair_fn(coords.len(), |i, j| (&coords[i.0] - &coords[j.0]).abs()))
}

/// `k` metrics over one point set. Metric order is significant: plurality
/// tie-breaking prefers the metric of smaller index.
#[derive(Clone, Debug)]
pub struct MetricSystem {
    n: usize,
    metrics: Vec<DistanceMatrix>,
    metric_names: Vec<String>,
    labels: Option<Vec<String>>,
}

impl MetricSystem {
    pub fn new(metrics: Vec<DistanceMatrix>) -> Result<Self, MetricError> {
        let names = (1..=metrics.len()).map(|i| format!("rho{i}")).collect();
        MetricSystem::with_names(metrics, names)
    }

    pub fn with_names(
        metrics: Vec<DistanceMatrix>,
        metric_names: Vec<String>,
    ) -> Result<Self, MetricError> {
        let Some(first) = metrics.first() else {
            return Err(MetricError::NoMetrics);
        };
        let n = first.point_count();
        for (index, m) in metrics.iter().enumerate() {
            if m.point_count() != n {
                return Err(MetricError::SizeMismatch {
                    index,
                    found: m.point_count(),
                    expected: n,
                });
            }
        }
        assert_eq!(metric_names.len(), metrics.len());
        Ok(MetricSystem { n, metrics, metric_names, labels: None })
    }

    pub fn set_labels(&mut self, labels: Vec<String>) {
        assert_eq!(labels.len(), self.n);
        self.labels = Some(labels);
    }

    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn metric_count(&self) -> usize {
        self.metrics.len()
    }

    pub fn metric(&self, index: usize) -> &DistanceMatrix {
        &self.metrics[index]
    }

    pub fn metrics(&self) -> &[DistanceMatrix] {
        &self.metrics
    }

    pub fn metric_names(&self) -> &[String] {
        &self.metric_names
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, p: PointId) -> String {
        match &self.labels {
            Some(labels) => labels[p.0].clone(),
            None => format!("p{}", p.0),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (0..self.n).map(PointId)
    }

    pub fn pairs(&self) -> impl Iterator<Item = PairId> {
        all_pairs(self.n)
    }

    /// Distance of `pair` under metric `metric_index`.
    pub fn distance(&self, metric_index: usize, pair: PairId) -> &EpsValue {
        self.metrics[metric_index].distance(pair)
    }

    /// Induced sub-system on `keep`, reindexed densely. Returns the system
    /// together with the index map (`map[new] = old`).
    pub fn restrict(
        &self,
        keep: &BTreeSet<PointId>,
    ) -> Result<(MetricSystem, Vec<PointId>), MetricError> {
        if keep.is_empty() {
            return Err(MetricError::EmptySystem);
        }
        if let Some(&p) = keep.iter().next_back() {
            if p.0 >= self.n {
                return Err(MetricError::IndexError { index: p.0, n: self.n });
            }
        }
        let map: Vec<PointId> = keep.iter().copied().collect();
        let metrics = self.metrics.iter().map(|m| m.restrict(&map)).collect();
        let mut sys = MetricSystem::with_names(metrics, self.metric_names.clone())?;
        if let Some(labels) = &self.labels {
            sys.set_labels(map.iter().map(|p| labels[p.0].clone()).collect());
        }
        Ok((sys, map))
    }

    /// Convenience for "everything except `remove`".
    pub fn keep_complement(&self, remove: &BTreeSet<PointId>) -> BTreeSet<PointId> {
        (0..self.n).map(PointId).filter(|p| !remove.contains(p)).collect()
    }
}

pub const INSTANCE_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct MetricWire {
    name: String,
    d: Vec<Vec<EpsValue>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceWire {
    version: u32,
    n: usize,
    k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    metrics: Vec<MetricWire>,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported instance format version {0}")]
    Version(u32),
    #[error("instance declares n={declared} but metric {metric} has {found} rows")]
    Shape { metric: usize, declared: usize, found: usize },
    #[error("instance declares k={declared} but carries {found} metrics")]
    MetricCount { declared: usize, found: usize },
    #[error("labels list has {found} entries for {n} points")]
    LabelCount { found: usize, n: usize },
    #[error("metric {metric} is asymmetric at ({i},{j})")]
    Asymmetric { metric: usize, i: usize, j: usize },
    #[error("metric {metric} has a nonzero diagonal at {i}")]
    NonzeroDiagonal { metric: usize, i: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Serializes a system in the versioned instance format. Matrices are written
/// in full; field order is fixed, so equal systems serialize identically.
pub fn to_instance_json(sys: &MetricSystem) -> String {
    let wire = InstanceWire {
        version: INSTANCE_FORMAT_VERSION,
        n: sys.n,
        k: sys.metrics.len(),
        labels: Some(match &sys.labels {
            Some(labels) => labels.clone(),
            None => (0..sys.n).map(|i| format!("p{i}")).collect(),
        }),
        metrics: sys
            .metrics
            .iter()
            .zip(&sys.metric_names)
            .map(|(m, name)| MetricWire {
                name: name.clone(),
                d: (0..m.n)
                    .map(|i| (0..m.n).map(|j| m.values[i * m.n + j].clone()).collect())
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&wire).expect("instance serialization cannot fail")
}

/// Parses and checks the instance format: version, shapes, symmetry and zero
/// diagonals are all verified before a system is returned.
pub fn from_instance_json(text: &str) -> Result<MetricSystem, InstanceError> {
    let wire: InstanceWire = serde_json::from_str(text)?;
    if wire.version != INSTANCE_FORMAT_VERSION {
        return Err(InstanceError::Version(wire.version));
    }
    if wire.metrics.len() != wire.k {
        return Err(InstanceError::MetricCount { declared: wire.k, found: wire.metrics.len() });
    }
    if let Some(labels) = &wire.labels {
        if labels.len() != wire.n {
            return Err(InstanceError::LabelCount { found: labels.len(), n: wire.n });
        }
    }
    let mut metrics = Vec::with_capacity(wire.metrics.len());
    let mut names = Vec::with_capacity(wire.metrics.len());
    for (index, metric) in wire.metrics.iter().enumerate() {
        if metric.d.len() != wire.n || metric.d.iter().any(|row| row.len() != wire.n) {
            return Err(InstanceError::Shape {
                metric: index,
                declared: wire.n,
                found: metric.d.len(),
            });
        }
        for i in 0..wire.n {
            if !metric.d[i][i].is_zero() {
                return Err(InstanceError::NonzeroDiagonal { metric: index, i });
            }
            for j in i + 1..wire.n {
                if metric.d[i][j] != metric.d[j][i] {
                    return Err(InstanceError::Asymmetric { metric: index, i, j });
                }
            }
        }
        let mut m = DistanceMatrix::zeroed(wire.n);
        for i in 0..wire.n {
            for j in i + 1..wire.n {
                m.set_pair(PointId(i), PointId(j), metric.d[i][j].clone());
            }
        }
        metrics.push(m);
        names.push(metric.name.clone());
    }
    let mut sys = MetricSystem::with_names(metrics, names)?;
    if let Some(labels) = wire.labels {
        sys.set_labels(labels);
    }
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn ev(x: i64) -> EpsValue {
        EpsValue::from_integer(x)
    }

    fn with_eps(x: i64, c: i64) -> EpsValue {
        EpsValue::with_eps(BigRational::from_integer(BigInt::from(x)), c)
    }

    #[test]
    fn pair_index_row_major() {
        assert_eq!(pair_index(PointId(0), PointId(1), 4).unwrap().linear_index(), 0);
        assert_eq!(pair_index(PointId(2), PointId(3), 4).unwrap().linear_index(), 5);
        // Canonicalization: order of endpoints does not matter.
        assert_eq!(
            pair_index(PointId(1), PointId(0), 4).unwrap(),
            pair_index(PointId(0), PointId(1), 4).unwrap()
        );
    }

    #[test]
    fn pair_index_rejects_bad_input() {
        assert_eq!(pair_index(PointId(2), PointId(2), 4), Err(MetricError::InvalidPair(2)));
        assert_eq!(
            pair_index(PointId(0), PointId(7), 4),
            Err(MetricError::IndexError { index: 7, n: 4 })
        );
    }

    #[test]
    fn uniform_metric_is_valid() {
        let m = DistanceMatrix::from_pair_fn(3, |_, _| ev(1));
        assert!(validate_metric(&m).is_valid());
    }

    #[test]
    fn triangle_violation_is_reported() {
        let mut m = DistanceMatrix::zeroed(3);
        m.set_pair(PointId(0), PointId(1), ev(1));
        m.set_pair(PointId(1), PointId(2), ev(1));
        m.set_pair(PointId(0), PointId(2), ev(3));
        let report = validate_metric(&m);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, MetricViolation::Triangle { x: PointId(0), y: PointId(1), z: PointId(2) })));
    }

    #[test]
    fn strict_middle_point_breaks_strong_triangle() {
        let mut m = DistanceMatrix::zeroed(3);
        m.set_pair(PointId(0), PointId(1), ev(1));
        m.set_pair(PointId(1), PointId(2), ev(2));
        m.set_pair(PointId(0), PointId(2), ev(3));
        assert!(validate_metric(&m).is_valid());
        let report = validate_ultrametric(&m);
        assert!(!report.is_valid());
    }

    #[test]
    fn line_metric_from_integer_coordinates() {
        let m = line_metric_from_coordinates(&[ev(0), ev(1), ev(3)]).unwrap();
        assert_eq!(*m.get(PointId(0), PointId(1)), ev(1));
        assert_eq!(*m.get(PointId(1), PointId(2)), ev(2));
        assert_eq!(*m.get(PointId(0), PointId(2)), ev(3));
        assert!(validate_metric(&m).is_valid());
    }

    #[test]
    fn line_metric_on_three_collinear_points_is_not_ultrametric() {
        let m = line_metric_from_coordinates(&[ev(0), ev(1), ev(3)]).unwrap();
        assert!(!validate_ultrametric(&m).is_valid());
    }

    #[test]
    fn epsilon_separates_equal_bases() {
        // Same real coordinate, different infinitesimal offsets: distance is
        // 2ε > 0, so this is a legal line metric, not a duplicate.
        let m = line_metric_from_coordinates(&[with_eps(5, -1), with_eps(5, 1)]).unwrap();
        assert_eq!(*m.get(PointId(0), PointId(1)), with_eps(0, 2));
        assert!(validate_metric(&m).is_valid());
    }

    #[test]
    fn duplicate_coordinates_rejected() {
        let err = line_metric_from_coordinates(&[ev(2), ev(2)]).unwrap_err();
        assert_eq!(err, MetricError::DuplicateCoordinate { first: 0, second: 1 });
    }

    fn toy_system() -> MetricSystem {
        let m1 = line_metric_from_coordinates(&[ev(0), ev(1), ev(3), ev(7)]).unwrap();
        let m2 = line_metric_from_coordinates(&[ev(0), ev(2), ev(3), ev(9)]).unwrap();
        MetricSystem::new(vec![m1, m2]).unwrap()
    }

    #[test]
    fn restrict_to_all_points_is_identity() {
        let sys = toy_system();
        let keep: BTreeSet<PointId> = sys.points().collect();
        let (restricted, map) = sys.restrict(&keep).unwrap();
        assert_eq!(restricted.point_count(), 4);
        assert_eq!(map, vec![PointId(0), PointId(1), PointId(2), PointId(3)]);
        for pair in sys.pairs() {
            assert_eq!(sys.distance(0, pair), restricted.distance(0, pair));
        }
    }

    #[test]
    fn restrict_to_single_point() {
        let sys = toy_system();
        let keep: BTreeSet<PointId> = [PointId(0)].into();
        let (restricted, _) = sys.restrict(&keep).unwrap();
        assert_eq!(restricted.point_count(), 1);
    }

    #[test]
    fn restrict_rejects_empty_keep() {
        let sys = toy_system();
        assert!(matches!(sys.restrict(&BTreeSet::new()), Err(MetricError::EmptySystem)));
    }

    #[test]
    fn instance_json_round_trip() {
        let mut sys = toy_system();
        sys.set_labels(vec!["a".into(), "b".into(), "c".into(), "d".into()]);
        let json = to_instance_json(&sys);
        let back = from_instance_json(&json).unwrap();
        assert_eq!(back.point_count(), 4);
        assert_eq!(back.labels().unwrap(), sys.labels().unwrap());
        for pair in sys.pairs() {
            assert_eq!(sys.distance(0, pair), back.distance(0, pair));
            assert_eq!(sys.distance(1, pair), back.distance(1, pair));
        }
    }

    #[test]
    fn reader_rejects_asymmetry() {
        let json = r#"{
            "version": 1, "n": 2, "k": 1,
            "metrics": [{"name": "m", "d": [
                [{"base":"0/1","eps":"0"}, {"base":"1/1","eps":"0"}],
                [{"base":"2/1","eps":"0"}, {"base":"0/1","eps":"0"}]
            ]}]
        }"#;
        assert!(matches!(from_instance_json(json), Err(InstanceError::Asymmetric { .. })));
    }

    #[test]
    fn reader_rejects_wrong_version() {
        let json = r#"{"version": 9, "n": 1, "k": 1, "metrics": [{"name":"m","d":[[{"base":"0/1","eps":"0"}]]}]}"#;
        assert!(matches!(from_instance_json(json), Err(InstanceError::Version(9))));
    }

    proptest! {
        #[test]
        fn pair_index_unindex_bijective(n in 2usize..12) {
            for linear in 0..pair_count(n) {
                let pair = pair_unindex(linear, n).unwrap();
                let back = pair_index(pair.first(), pair.second(), n).unwrap();
                prop_assert_eq!(back.linear_index(), linear);
            }
        }

        #[test]
        fn restriction_preserves_metric_validity(
            coords in proptest::collection::btree_set(0i64..1000, 3..8),
            keep_mask in proptest::collection::vec(any::<bool>(), 8),
        ) {
            let coords: Vec<EpsValue> = coords.into_iter().map(ev).collect();
            let m = line_metric_from_coordinates(&coords).unwrap();
            prop_assume!(validate_metric(&m).is_valid());
            let sys = MetricSystem::new(vec![m]).unwrap();
            let keep: BTreeSet<PointId> = sys
                .points()
                .filter(|p| keep_mask[p.0])
                .collect();
            prop_assume!(!keep.is_empty());
            let (restricted, _) = sys.restrict(&keep).unwrap();
            prop_assert!(validate_metric(restricted.metric(0)).is_valid());
        }
    }
}
