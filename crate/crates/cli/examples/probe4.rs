use ordinal_consensus::metric::PairId;
use ordinal_consensus::reductions::*;
use std::time::Instant;

fn main() {
    let n = 800usize;
    let sys = random_system(n, 3, RandomModel::Uniform, 1);
    let pairs: Vec<PairId> = sys.pairs().collect();
    // warm
    let _ = ordinal_consensus::strong::smis_approx(&sys);

    // compact key extraction
    let t = Instant::now();
    let mut keysums = 0i64;
    for i in 0..3 {
        for p in &pairs {
            keysums ^= sys.distance(i, *p).base().numer().to_string().len() as i64;
        }
    }
    println!("key extraction x3: {:?} ({keysums})", t.elapsed());

    // pure index sort with contiguous i64 keys
    let keys: Vec<i64> = pairs.iter().map(|p| {
        let s = sys.distance(0, *p).base().numer().to_string();
        s.parse::<i64>().unwrap()
    }).collect();
    let t = Instant::now();
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&x, &y| keys[x].cmp(&keys[y]).then(x.cmp(&y)));
    println!("contiguous i64 sort: {:?} (first {})", t.elapsed(), order[0]);

    let t = Instant::now();
    let r = ordinal_consensus::strong::smis_approx(&sys);
    println!("full solve warm: {:?} groups {}", t.elapsed(), r.stats.groups_removed);
}
