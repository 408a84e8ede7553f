//! Command implementations for the `ordinal-consensus` binary.
//!
//! Everything lives behind plain functions returning exit codes so the
//! integration and acceptance suites can drive the same code paths the
//! binary uses. Exit codes: 0 consistent/pass, 1 inconsistent/fail, 2 usage
//! or input error, 3 size guard exceeded.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ordinal_consensus::metric::{from_instance_json, to_instance_json};
use ordinal_consensus::reductions::{
    gen_smis_arbitrary_from_vc, gen_smis_lines_from_vc, gen_smis_ultra_from_max2sat,
    gen_wmis_arbitrary_from_vc, gen_wmis_lines_from_vc, gen_wmis_ultra_from_3dm, graph_from_json,
    oracle_max_2sat, oracle_max_3dm, oracle_min_vertex_cover, random_system, three_dm_from_json,
    two_sat_from_json, verify_matching_gadget, OracleError, RandomModel,
};
use ordinal_consensus::relation::{
    build_auxiliary_graph, build_relation_set, generating_metric, is_valid_relation_set, Relation,
    RelationError,
};
use ordinal_consensus::strong::{
    find_conflict_quartet, smis_approx, smis_exact, ConflictQuartet, SolveError, SolveResult,
};
use ordinal_consensus::tree::{
    tree_from_json, tree_from_ultrametric, tree_to_json, ultrametric_from_tree,
};
use ordinal_consensus::weak::{
    is_weakly_consistent_all, wmis_approx_with, wmis_exact, TriangleOrder, DEFAULT_TRIANGLE_CAP,
};
use ordinal_consensus::{MetricSystem, PairId};
use serde::Serialize;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

pub mod bench;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

/// Point-count guards for the exact solvers when invoked without an explicit
/// `--max-exact-n`.
pub const STRONG_EXACT_GUARD: usize = ordinal_consensus::strong::DEFAULT_EXACT_GUARD;
pub const WEAK_EXACT_GUARD: usize = ordinal_consensus::weak::DEFAULT_EXACT_GUARD;

/// Round trips solve instances far larger than the interactive defaults; the
/// weak guard stays lower because triangle enumeration grows with the sixth
/// power of the point count.
pub const ROUNDTRIP_STRONG_GUARD: usize = 64;
pub const ROUNDTRIP_WEAK_GUARD: usize = 40;

#[derive(Parser, Debug)]
#[command(
    name = "ordinal-consensus",
    version,
    about = "Ordinal consensus analysis for multi-metric systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Notion {
    Strong,
    Weak,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Approx,
    Exact,
    Both,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build an instance from a source problem or a random model.
    Generate {
        /// smis-lines | smis-ultra | smis-arb | wmis-lines | wmis-ultra |
        /// wmis-arb | random
        family: String,
        /// Source JSON (edge list, clause list or triple list); not used by
        /// the random family.
        #[arg(long)]
        source: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        /// uniform | perturbed-common | ultrametric | line
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Noise amplitude for the perturbed-common model.
        #[arg(long)]
        noise: Option<u32>,
    },
    /// Decide consistency of an instance; exit 1 when inconsistent.
    Check {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        notion: Notion,
        /// Include the conflict quartet or directed triangle in the output.
        #[arg(long)]
        witness: bool,
    },
    /// Find a minimum (or approximate) inconsistent subset.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        notion: Notion,
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Independently re-verify the outlier set by restricting the system
        /// and re-running the full consistency checker.
        #[arg(long)]
        assert_feasible: bool,
        /// Override the exact-solver point guard.
        #[arg(long)]
        max_exact_n: Option<usize>,
        /// Shuffle the triangle sweep of the weak approximation.
        #[arg(long)]
        seed_order: Option<u64>,
        /// Restrict strong checks to pairs of pairs on four distinct points.
        #[arg(long)]
        distinct_quartets_only: bool,
    },
    /// Emit the plurality relation set and its validity verdict.
    Relations {
        #[arg(long)]
        instance: PathBuf,
        /// Write a single metric generating the relation set (valid sets
        /// only) as instance JSON.
        #[arg(long)]
        emit_generating_metric: Option<PathBuf>,
    },
    /// Solve a source problem exactly (vc | max2sat | 3dm).
    Oracle {
        problem: String,
        #[arg(long)]
        source: PathBuf,
    },
    /// Verify structural conditions of a generated instance.
    /// `gadget` (alias `lemma5`) checks the matching-gadget conditions.
    Verify {
        check: String,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        source: PathBuf,
    },
    /// Generate from a source, solve both sides exactly, and assert the
    /// reduction's size identity.
    Roundtrip {
        #[arg(long)]
        family: String,
        #[arg(long)]
        source: PathBuf,
    },
    /// Run a benchmark configuration and emit CSV records.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a representing tree to a single-metric instance.
    TreeToMatrix {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert an ultrametric instance back to its representing tree.
    MatrixToTree {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Metric index to convert (default 0).
        #[arg(long)]
        metric: Option<usize>,
    },
}

pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<SolveError>().is_some()
                || err.downcast_ref::<OracleError>().is_some()
            {
                EXIT_GUARD
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Generate { family, source, out, n, k, model, seed, noise } => {
            cmd_generate(&family, source.as_deref(), &out, n, k, model.as_deref(), seed, noise)
        }
        Command::Check { instance, notion, witness } => cmd_check(&instance, notion, witness),
        Command::Solve {
            instance,
            notion,
            algo,
            out,
            assert_feasible,
            max_exact_n,
            seed_order,
            distinct_quartets_only,
        } => cmd_solve(
            &instance,
            notion,
            algo,
            out.as_deref(),
            assert_feasible,
            max_exact_n,
            seed_order,
            distinct_quartets_only,
        ),
        Command::Relations { instance, emit_generating_metric } => {
            cmd_relations(&instance, emit_generating_metric.as_deref())
        }
        Command::Oracle { problem, source } => cmd_oracle(&problem, &source),
        Command::Verify { check, instance, source } => cmd_verify(&check, &instance, &source),
        Command::Roundtrip { family, source } => cmd_roundtrip(&family, &source),
        Command::Bench { config, out } => bench::cmd_bench(&config, out.as_deref()),
        Command::TreeToMatrix { tree, out } => cmd_tree_to_matrix(&tree, &out),
        Command::MatrixToTree { instance, out, metric } => {
            cmd_matrix_to_tree(&instance, &out, metric.unwrap_or(0))
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_instance(path: &Path) -> Result<MetricSystem> {
    let text = read_file(path)?;
    from_instance_json(&text).with_context(|| format!("parsing instance {}", path.display()))
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct GenerateSummary {
    family: String,
    n: usize,
    k: usize,
    out: String,
}

fn parse_model(model: &str, noise: Option<u32>) -> Result<RandomModel> {
    Ok(match model {
        "uniform" => RandomModel::Uniform,
        "perturbed-common" => RandomModel::PerturbedCommon { noise: noise.unwrap_or(50) },
        "ultrametric" => RandomModel::Ultrametric,
        "line" => RandomModel::Line,
        other => bail!("unknown random model `{other}`"),
    })
}

/// Builds the instance of a reduction family from source JSON.
pub fn generate_family(family: &str, source_text: &str) -> Result<MetricSystem> {
    Ok(match family {
        "smis-lines" => gen_smis_lines_from_vc(&graph_from_json(source_text)?),
        "smis-arb" => gen_smis_arbitrary_from_vc(&graph_from_json(source_text)?),
        "smis-ultra" => gen_smis_ultra_from_max2sat(&two_sat_from_json(source_text)?),
        "wmis-lines" => gen_wmis_lines_from_vc(&graph_from_json(source_text)?),
        "wmis-arb" => gen_wmis_arbitrary_from_vc(&graph_from_json(source_text)?)?,
        "wmis-ultra" => gen_wmis_ultra_from_3dm(&three_dm_from_json(source_text)?)?,
        other => bail!("unknown family `{other}`"),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    family: &str,
    source: Option<&Path>,
    out: &Path,
    n: Option<usize>,
    k: Option<usize>,
    model: Option<&str>,
    seed: Option<u64>,
    noise: Option<u32>,
) -> Result<i32> {
    let sys = if family == "random" {
        let n = n.ok_or_else(|| anyhow!("random family needs --n"))?;
        let k = k.ok_or_else(|| anyhow!("random family needs --k"))?;
        let model =
            parse_model(model.ok_or_else(|| anyhow!("random family needs --model"))?, noise)?;
        random_system(n, k, model, seed.unwrap_or(0))
    } else {
        let source = source.ok_or_else(|| anyhow!("family `{family}` needs --source"))?;
        generate_family(family, &read_file(source)?)?
    };
    write_file(out, &to_instance_json(&sys))?;
    let summary = GenerateSummary {
        family: family.to_owned(),
        n: sys.point_count(),
        k: sys.metric_count(),
        out: out.display().to_string(),
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

fn pair_wire(p: PairId) -> [usize; 2] {
    [p.first().0, p.second().0]
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct QuartetWire {
    pair_a: [usize; 2],
    pair_b: [usize; 2],
    points: Vec<usize>,
    labels: Vec<String>,
    metric_a: usize,
    metric_b: usize,
    relation_a: String,
    relation_b: String,
}

fn quartet_wire(sys: &MetricSystem, q: &ConflictQuartet) -> QuartetWire {
    QuartetWire {
        pair_a: pair_wire(q.pair_a),
        pair_b: pair_wire(q.pair_b),
        points: q.points.iter().map(|p| p.0).collect(),
        labels: q.points.iter().map(|p| sys.label(*p)).collect(),
        metric_a: q.witness.metric_a,
        metric_b: q.witness.metric_b,
        relation_a: q.witness.relation_a.to_string(),
        relation_b: q.witness.relation_b.to_string(),
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TriangleWire {
    nodes: [[usize; 2]; 3],
    labels: Vec<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CheckOutput {
    notion: String,
    n: usize,
    k: usize,
    consistent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    conflict_quartet: Option<QuartetWire>,
    #[serde(skip_serializing_if = "Option::is_none")]
    directed_triangle: Option<TriangleWire>,
}

fn cmd_check(instance: &Path, notion: Notion, witness: bool) -> Result<i32> {
    let sys = load_instance(instance)?;
    let mut output = CheckOutput {
        notion: format!("{notion:?}").to_lowercase(),
        n: sys.point_count(),
        k: sys.metric_count(),
        consistent: true,
        conflict_quartet: None,
        directed_triangle: None,
    };
    match notion {
        Notion::Strong => {
            if let Some(q) = find_conflict_quartet(&sys, false) {
                output.consistent = false;
                if witness {
                    output.conflict_quartet = Some(quartet_wire(&sys, &q));
                }
            }
        }
        Notion::Weak => {
            let check = is_weakly_consistent_all(&sys);
            output.consistent = check.consistent;
            if let (true, Some(t)) = (witness, check.witness) {
                let labels = t.iter().flat_map(|p| p.points()).map(|p| sys.label(p)).collect();
                output.directed_triangle = Some(TriangleWire {
                    nodes: [pair_wire(t[0]), pair_wire(t[1]), pair_wire(t[2])],
                    labels,
                });
            }
        }
    }
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(if output.consistent { EXIT_OK } else { EXIT_FAIL })
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StatsWire {
    pub comparisons: u64,
    pub wall_time_micros: u128,
    pub groups_removed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triangles_seen: Option<u64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveEntryWire {
    pub outliers: Vec<usize>,
    pub outlier_labels: Vec<String>,
    pub consensus_size: usize,
    pub certified_consistent: bool,
    pub stats: StatsWire,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveOutput {
    pub notion: String,
    pub n: usize,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub approx: Option<SolveEntryWire>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<SolveEntryWire>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_vs_exact: Option<f64>,
}

fn entry_wire(sys: &MetricSystem, result: &SolveResult) -> SolveEntryWire {
    SolveEntryWire {
        outliers: result.outliers.iter().map(|p| p.0).collect(),
        outlier_labels: result.outliers.iter().map(|p| sys.label(*p)).collect(),
        consensus_size: result.consensus_size,
        certified_consistent: result.certified_consistent,
        stats: StatsWire {
            comparisons: result.stats.comparisons,
            wall_time_micros: result.stats.wall_time_micros,
            groups_removed: result.stats.groups_removed,
            triangles_seen: result.stats.triangles_seen,
        },
    }
}

fn verify_feasible(sys: &MetricSystem, result: &SolveResult, notion: Notion) -> Result<()> {
    let keep = sys.keep_complement(&result.outliers);
    if keep.is_empty() {
        return Ok(());
    }
    let (restricted, _) = sys.restrict(&keep)?;
    let ok = match notion {
        Notion::Strong => find_conflict_quartet(&restricted, false).is_none(),
        Notion::Weak => is_weakly_consistent_all(&restricted).consistent,
    };
    if !ok {
        bail!("outlier set fails the independent feasibility re-check");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    instance: &Path,
    notion: Notion,
    algo: Algo,
    out: Option<&Path>,
    assert_feasible: bool,
    max_exact_n: Option<usize>,
    seed_order: Option<u64>,
    distinct_quartets_only: bool,
) -> Result<i32> {
    let sys = load_instance(instance)?;
    let run_approx = matches!(algo, Algo::Approx | Algo::Both);
    let run_exact = matches!(algo, Algo::Exact | Algo::Both);

    let approx = if run_approx {
        Some(match notion {
            Notion::Strong => smis_approx(&sys),
            Notion::Weak => {
                let order = seed_order.map_or(TriangleOrder::Lexicographic, TriangleOrder::Seeded);
                wmis_approx_with(&sys, order, DEFAULT_TRIANGLE_CAP)?
            }
        })
    } else {
        None
    };
    let exact = if run_exact {
        Some(match notion {
            Notion::Strong => smis_exact(
                &sys,
                max_exact_n.unwrap_or(STRONG_EXACT_GUARD),
                distinct_quartets_only,
            )?,
            Notion::Weak => wmis_exact(&sys, max_exact_n.unwrap_or(WEAK_EXACT_GUARD))?,
        })
    } else {
        None
    };

    if assert_feasible {
        for result in approx.iter().chain(exact.iter()) {
            verify_feasible(&sys, result, notion)?;
        }
    }

    let ratio = match (&approx, &exact) {
        (Some(a), Some(e)) => Some(if e.outliers.is_empty() {
            debug_assert!(a.outliers.is_empty());
            1.0
        } else {
            a.outliers.len() as f64 / e.outliers.len() as f64
        }),
        _ => None,
    };
    let output = SolveOutput {
        notion: format!("{notion:?}").to_lowercase(),
        n: sys.point_count(),
        k: sys.metric_count(),
        approx: approx.as_ref().map(|r| entry_wire(&sys, r)),
        exact: exact.as_ref().map(|r| entry_wire(&sys, r)),
        ratio_vs_exact: ratio,
    };
    let text = serde_json::to_string_pretty(&output)?;
    if let Some(path) = out {
        write_file(path, &text)?;
    }
    println!("{text}");
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// relations
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RelationEntryWire {
    a: [usize; 2],
    b: [usize; 2],
    rel: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RelationsOutput {
    n: usize,
    pair_nodes: usize,
    relation_count: usize,
    valid: bool,
    relations: Vec<RelationEntryWire>,
}

fn cmd_relations(instance: &Path, emit: Option<&Path>) -> Result<i32> {
    let sys = load_instance(instance)?;
    if sys.point_count() < 2 {
        bail!("relation sets need at least two points");
    }
    let rs = build_relation_set(&sys);
    let valid = is_valid_relation_set(&rs);
    let pairs: Vec<PairId> = sys.pairs().collect();
    let mut relations = Vec::with_capacity(rs.relation_count());
    for a in 0..pairs.len() {
        for b in a + 1..pairs.len() {
            relations.push(RelationEntryWire {
                a: pair_wire(pairs[a]),
                b: pair_wire(pairs[b]),
                rel: rs.relation(pairs[a], pairs[b]).to_string(),
            });
        }
    }
    let output = RelationsOutput {
        n: sys.point_count(),
        pair_nodes: pairs.len(),
        relation_count: relations.len(),
        valid,
        relations,
    };
    if let Some(path) = emit {
        match generating_metric(&rs) {
            Ok(metric) => {
                let generated = MetricSystem::with_names(vec![metric], vec!["generated".into()])?;
                write_file(path, &to_instance_json(&generated))?;
            }
            Err(RelationError::InvalidRelationSet(cycle)) => {
                eprintln!(
                    "relation set is not realizable; directed cycle through {:?}",
                    cycle.iter().map(|p| pair_wire(*p)).collect::<Vec<_>>()
                );
                return Ok(EXIT_FAIL);
            }
        }
    }
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(if valid { EXIT_OK } else { EXIT_FAIL })
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct OracleOutput {
    problem: String,
    optimum: usize,
}

fn cmd_oracle(problem: &str, source: &Path) -> Result<i32> {
    let text = read_file(source)?;
    let optimum = match problem {
        "vc" => oracle_min_vertex_cover(&graph_from_json(&text)?)?,
        "max2sat" => oracle_max_2sat(&two_sat_from_json(&text)?)?,
        "3dm" => oracle_max_3dm(&three_dm_from_json(&text)?)?,
        other => bail!("unknown oracle problem `{other}` (expected vc, max2sat or 3dm)"),
    };
    let output = OracleOutput { problem: problem.to_owned(), optimum };
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct VerifyOutput {
    check: String,
    splitting_pairs_isolated: bool,
    triangles_contain_shared_pair: bool,
    shared_pairs_in_triangle: bool,
    triangle_count: u64,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<String>,
}

fn cmd_verify(check: &str, instance: &Path, source: &Path) -> Result<i32> {
    if check != "gadget" && check != "lemma5" {
        bail!("unknown verify check `{check}` (expected `gadget`)");
    }
    let sys = load_instance(instance)?;
    let inst = three_dm_from_json(&read_file(source)?)?;
    if sys.point_count() != 5 * inst.triple_count() {
        bail!(
            "instance has {} points but the source implies {}",
            sys.point_count(),
            5 * inst.triple_count()
        );
    }
    let report = verify_matching_gadget(&sys, &inst);
    let witness = report
        .splitting_witness
        .map(|t| format!("splitting pair inside triangle {t:?}"))
        .or_else(|| {
            report
                .unshared_triangle_witness
                .map(|t| format!("triangle without shared-coordinate pair {t:?}"))
        })
        .or_else(|| {
            report.isolated_shared_pair.map(|p| format!("shared pair {p:?} in no triangle"))
        });
    let output = VerifyOutput {
        check: "gadget".to_owned(),
        splitting_pairs_isolated: report.splitting_pairs_isolated,
        triangles_contain_shared_pair: report.triangles_contain_shared_pair,
        shared_pairs_in_triangle: report.shared_pairs_in_triangle,
        triangle_count: report.triangle_count,
        passed: report.passed(),
        witness,
    };
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAIL })
}

// ---------------------------------------------------------------------------
// roundtrip
// ---------------------------------------------------------------------------

#[derive(Serialize, Debug)]
#[serde(rename_all = "camelCase")]
pub struct RoundtripReport {
    pub family: String,
    pub points: usize,
    pub source_optimum: usize,
    pub measure: String,
    pub expected_value: usize,
    pub actual_value: usize,
    pub pass: bool,
}

/// Generates the instance, solves both sides exactly, and checks the
/// reduction's size identity.
pub fn run_roundtrip(family: &str, source_text: &str) -> Result<RoundtripReport> {
    let report = match family {
        "smis-lines" | "smis-arb" => {
            let g = graph_from_json(source_text)?;
            let sys = if family == "smis-lines" {
                gen_smis_lines_from_vc(&g)
            } else {
                gen_smis_arbitrary_from_vc(&g)
            };
            let cover = oracle_min_vertex_cover(&g)?;
            let exact = smis_exact(&sys, ROUNDTRIP_STRONG_GUARD, false)?;
            RoundtripReport {
                family: family.to_owned(),
                points: sys.point_count(),
                source_optimum: cover,
                measure: "outliers".to_owned(),
                expected_value: cover,
                actual_value: exact.outliers.len(),
                pass: exact.outliers.len() == cover,
            }
        }
        "smis-ultra" => {
            let f = two_sat_from_json(source_text)?;
            let sys = gen_smis_ultra_from_max2sat(&f);
            let satisfied = oracle_max_2sat(&f)?;
            let (m1, m2) = f.clause_counts();
            let expected = (2 * m1 + 4 * m2 + 1) + m1 + m2 + satisfied;
            let exact = smis_exact(&sys, ROUNDTRIP_STRONG_GUARD, false)?;
            RoundtripReport {
                family: family.to_owned(),
                points: sys.point_count(),
                source_optimum: satisfied,
                measure: "consensus".to_owned(),
                expected_value: expected,
                actual_value: exact.consensus_size,
                pass: exact.consensus_size == expected,
            }
        }
        "wmis-lines" | "wmis-arb" => {
            let g = graph_from_json(source_text)?;
            let sys = if family == "wmis-lines" {
                gen_wmis_lines_from_vc(&g)
            } else {
                gen_wmis_arbitrary_from_vc(&g)?
            };
            let cover = oracle_min_vertex_cover(&g)?;
            let exact = wmis_exact(&sys, ROUNDTRIP_WEAK_GUARD)?;
            RoundtripReport {
                family: family.to_owned(),
                points: sys.point_count(),
                source_optimum: cover,
                measure: "outliers".to_owned(),
                expected_value: cover,
                actual_value: exact.outliers.len(),
                pass: exact.outliers.len() == cover,
            }
        }
        "wmis-ultra" => {
            let inst = three_dm_from_json(source_text)?;
            let sys = gen_wmis_ultra_from_3dm(&inst)?;
            let matching = oracle_max_3dm(&inst)?;
            let expected = 4 * inst.triple_count() + matching;
            let exact = wmis_exact(&sys, ROUNDTRIP_WEAK_GUARD)?;
            RoundtripReport {
                family: family.to_owned(),
                points: sys.point_count(),
                source_optimum: matching,
                measure: "consensus".to_owned(),
                expected_value: expected,
                actual_value: exact.consensus_size,
                pass: exact.consensus_size == expected,
            }
        }
        other => bail!("unknown family `{other}`"),
    };
    Ok(report)
}

fn cmd_roundtrip(family: &str, source: &Path) -> Result<i32> {
    let report = run_roundtrip(family, &read_file(source)?)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
}

// ---------------------------------------------------------------------------
// tree conversions
// ---------------------------------------------------------------------------

fn cmd_tree_to_matrix(tree_path: &Path, out: &Path) -> Result<i32> {
    let tree = tree_from_json(&read_file(tree_path)?)?;
    let matrix = ultrametric_from_tree(&tree)?;
    let sys = MetricSystem::with_names(vec![matrix], vec!["ultrametric".into()])?;
    write_file(out, &to_instance_json(&sys))?;
    println!(
        "{}",
        serde_json::json!({ "leaves": sys.point_count(), "out": out.display().to_string() })
    );
    Ok(EXIT_OK)
}

fn cmd_matrix_to_tree(instance: &Path, out: &Path, metric: usize) -> Result<i32> {
    let sys = load_instance(instance)?;
    if metric >= sys.metric_count() {
        bail!("metric index {metric} out of range for k={}", sys.metric_count());
    }
    match tree_from_ultrametric(sys.metric(metric)) {
        Ok(tree) => {
            write_file(out, &tree_to_json(&tree))?;
            println!(
                "{}",
                serde_json::json!({ "leaves": tree.leaf_count(), "out": out.display().to_string() })
            );
            Ok(EXIT_OK)
        }
        Err(err) => {
            eprintln!("not an ultrametric: {err}");
            Ok(EXIT_FAIL)
        }
    }
}

// ---------------------------------------------------------------------------
// helpers shared with the test suites
// ---------------------------------------------------------------------------

/// True when the plurality relations of `sys` are realizable by one metric.
pub fn relations_valid(sys: &MetricSystem) -> bool {
    is_valid_relation_set(&build_relation_set(sys))
}

/// Directed-triangle count of the full auxiliary graph.
pub fn directed_triangle_count(sys: &MetricSystem) -> u64 {
    if sys.point_count() < 2 {
        return 0;
    }
    let aux = build_auxiliary_graph(&build_relation_set(sys));
    let mut count = 0;
    aux.graph().for_each_directed_triangle(&vec![true; aux.node_count()], |_| {
        count += 1;
        true
    });
    count
}

/// First plurality relation (if any), exposed for spot checks.
pub fn first_relation(sys: &MetricSystem) -> Option<Relation> {
    let pairs: Vec<PairId> = sys.pairs().collect();
    if pairs.len() < 2 {
        return None;
    }
    let rs = build_relation_set(sys);
    Some(rs.relation(pairs[0], pairs[1]))
}

/// Outlier sets as plain index sets, for test assertions.
pub fn outlier_indices(result: &SolveResult) -> BTreeSet<usize> {
    result.outliers.iter().map(|p| p.0).collect()
}
