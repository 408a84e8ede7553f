use ordinal_consensus::reductions::*;
use ordinal_consensus::metric::PairId;
use std::time::Instant;

fn main() {
    for n in [200usize, 400, 800] {
        let sys = random_system(n, 3, RandomModel::Uniform, 1);
        let pairs: Vec<PairId> = sys.pairs().collect();
        let t = Instant::now();
        let mut lists = Vec::new();
        for i in 0..3 {
            let mut order: Vec<usize> = (0..pairs.len()).collect();
            order.sort_by(|&x, &y| {
                sys.distance(i, pairs[x]).cmp(sys.distance(i, pairs[y])).then(x.cmp(&y))
            });
            lists.push(order);
        }
        println!("n={n}: sort only {:?} ({} pairs)", t.elapsed(), pairs.len());
        let t = Instant::now();
        let r = ordinal_consensus::strong::smis_approx(&sys);
        println!("n={n}: full solve {:?}, outliers {}, groups {}", t.elapsed(), r.outliers.len(), r.stats.groups_removed);
    }
}
