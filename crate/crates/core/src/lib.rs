//! Ordinal consensus analysis for multi-metric systems.
//!
//! A *metric system* is a set of `k` metrics over one common point set. This
//! crate decides whether the metrics are ordinally consistent — strongly
//! (every metric induces the identical order over all pairwise distances) or
//! weakly (the plurality-vote order over pairwise distances is realizable by
//! a single metric) — and finds small outlier sets whose removal restores
//! consistency.
//!
//! The main entry points are:
//!
//! * [`strong::smis_approx`] / [`strong::smis_exact`] — minimum strongly
//!   inconsistent subset (4-approximation and exact hitting-set search).
//! * [`weak::wmis_approx`] / [`weak::wmis_exact`] — minimum weakly
//!   inconsistent subset (6-approximation and exact search).
//! * [`relation`] — plurality relation sets, the mixed auxiliary graph, and
//!   directed-cycle / directed-triangle detection.
//! * [`reductions`] — hardness-gadget instance generators (vertex cover,
//!   max-2-sat, 3-dimensional matching) with exact oracles for the source
//!   problems.
//!
//! All distance arithmetic is exact: values are arbitrary-precision rationals
//! optionally carrying a symbolic infinitesimal component (see [`eps`]), so
//! ordinal comparisons never suffer from rounding.

pub mod eps;
pub mod metric;
pub mod reductions;
pub mod relation;
pub mod strong;
pub mod tree;
pub mod weak;

pub use eps::EpsValue;
pub use metric::{DistanceMatrix, MetricSystem, PairId, PointId};
