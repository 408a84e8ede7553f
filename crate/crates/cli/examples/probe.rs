use ordinal_consensus::reductions::*;
use ordinal_consensus::strong::{smis_approx, smis_exact};
use ordinal_consensus::weak::wmis_exact;
use std::time::Instant;

fn main() {
    // Worst-case 2-sat: 6 two-literal clauses over 6 vars -> 49 points.
    let f = two_sat_from_json(r#"{"nVars":6,"clauses":[[1,-2],[2,-3],[3,-4],[4,-5],[5,-6],[6,-1]]}"#).unwrap();
    let sys = gen_smis_ultra_from_max2sat(&f);
    let t = Instant::now();
    let exact = smis_exact(&sys, 64, false).unwrap();
    println!("2sat 6x2 ({} pts): exact {} in {:?}", sys.point_count(), exact.outliers.len(), t.elapsed());

    let f2 = two_sat_from_json(r#"{"nVars":3,"clauses":[[1,-2],[2,-3],[-1,3],[1,2],[-2,-3],[-1,2]]}"#).unwrap();
    let sys2 = gen_smis_ultra_from_max2sat(&f2);
    let t = Instant::now();
    let exact2 = smis_exact(&sys2, 64, false).unwrap();
    println!("2sat 6x2/3vars ({} pts): exact {} in {:?}", sys2.point_count(), exact2.outliers.len(), t.elapsed());

    // K6 line gadget: 36 points, min VC 5.
    let edges: Vec<(usize,usize)> = (0..6).flat_map(|a| (a+1..6).map(move |b| (a,b))).collect();
    let k6 = SimpleGraph::new(6, &edges).unwrap();
    let sys3 = gen_smis_lines_from_vc(&k6);
    let t = Instant::now();
    let exact3 = smis_exact(&sys3, 64, false).unwrap();
    println!("K6 lines ({} pts): exact {} in {:?}", sys3.point_count(), exact3.outliers.len(), t.elapsed());

    // Weak lines on an 8-edge graph over 6 vertices: 38 points.
    let g8 = SimpleGraph::new(6, &[(0,1),(0,2),(0,3),(1,2),(1,3),(2,3),(4,5),(3,4)]).unwrap();
    let sys4 = gen_wmis_lines_from_vc(&g8);
    let t = Instant::now();
    let exact4 = wmis_exact(&sys4, 40).unwrap();
    println!("wmis-lines 8 edges ({} pts): exact {} (vc {}) in {:?}", sys4.point_count(),
             exact4.outliers.len(), oracle_min_vertex_cover(&g8).unwrap(), t.elapsed());

    // 3DM m=6: 30 points.
    let dm = random_three_dm(4, 6, 11);
    let sys5 = gen_wmis_ultra_from_3dm(&dm).unwrap();
    let t = Instant::now();
    let exact5 = wmis_exact(&sys5, 40).unwrap();
    println!("3dm m=6 ({} pts): exact {} in {:?}", sys5.point_count(), exact5.outliers.len(), t.elapsed());

    // Large approx timing.
    for n in [100usize, 200, 400, 800] {
        let sys = random_system(n, 3, RandomModel::Uniform, 1);
        let t = Instant::now();
        let r = smis_approx(&sys);
        println!("smis_approx n={n}: outliers {} in {:?}", r.outliers.len(), t.elapsed());
    }
}
