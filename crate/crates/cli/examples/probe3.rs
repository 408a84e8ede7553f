use ordinal_consensus::reductions::*;
use std::time::Instant;

fn main() {
    for n in [400usize, 800] {
        let sys = random_system(n, 3, RandomModel::Uniform, 1);
        // run twice to see warm cache behavior
        for round in 0..2 {
            let t = Instant::now();
            let r = ordinal_consensus::strong::smis_approx(&sys);
            println!("n={n} round={round}: {:?}, groups {}, comparisons {}", t.elapsed(), r.stats.groups_removed, r.stats.comparisons);
        }
    }
}
