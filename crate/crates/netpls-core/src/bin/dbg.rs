use netpls_core::estimator::{fit, FitConfig};
use netpls_core::simulate::{simulate_type2, Type2Setting};
fn main() {
    let reps = 50;
    let config = FitConfig { num_inits: 10, max_iter: 150, ..FitConfig::default() };
    let mut sq = [0.0f64; 2];
    let mut worst: (f64, u64) = (0.0, 0);
    let t0 = std::time::Instant::now();
    for r in 0..reps {
        let seed = 60_000 + r as u64;
        let (a, truth) = simulate_type2(300, Type2Setting::C, seed).unwrap();
        let fr = fit(a.matrix(), &truth.x, &config).unwrap();
        let e1 = fr.params.gamma[0] - 0.3;
        let e2 = fr.params.gamma[1] - 0.7;
        sq[0] += e1 * e1;
        sq[1] += e2 * e2;
        if e2.abs() > worst.0 { worst = (e2.abs(), seed); }
    }
    println!("II-c n=300 50 reps: MSE=({:.3e},{:.3e}) worst|e2|={:.3} at seed {} ({:?})",
        sq[0]/reps as f64, sq[1]/reps as f64, worst.0, worst.1, t0.elapsed());
}
