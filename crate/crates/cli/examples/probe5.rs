use ordinal_consensus::reductions::*;
use std::time::Instant;

fn main() {
    let mut points = Vec::new();
    for n in [100usize, 200, 400, 800] {
        let sys = random_system(n, 3, RandomModel::Uniform, 1);
        let mut best = f64::MAX;
        for _ in 0..3 {
            let t = Instant::now();
            let r = ordinal_consensus::strong::smis_approx(&sys);
            std::hint::black_box(r);
            best = best.min(t.elapsed().as_secs_f64());
        }
        println!("n={n}: min {best:.4}s");
        points.push((n as f64, best));
    }
    // least squares on ln/ln
    let logs: Vec<(f64, f64)> = points.iter().map(|(n, t)| (n.ln(), t.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / logs.len() as f64;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / logs.len() as f64;
    let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
    println!("fitted exponent: {slope:.3}");
}
