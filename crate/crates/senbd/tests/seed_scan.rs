// Temporary scan helper; deleted before finalizing.
use senbd::discrete::{DtConfig, DtProcess};
use senbd::kernel::ExponentialMixture;

#[test]
#[ignore]
fn scan_dt_means() {
    for seed in 0..24u64 {
        let mut line = format!("seed {seed}:");
        for n in [0.5, 0.9] {
            let cfg = DtConfig {
                nu0: 0.01,
                omega: 1.0,
                kernel: ExponentialMixture::single(n, 1.0).unwrap(),
                steps: 1_000_000,
                seed,
            };
            let mut p = DtProcess::new(&cfg).unwrap();
            let mut sum = 0.0;
            for _ in 0..cfg.steps {
                p.step();
                sum += p.lambda_hat();
            }
            let mean = sum / cfg.steps as f64;
            let expected = 0.01 / (1.0 - n);
            line += &format!("  n={n}: {:+.2}%", 100.0 * (mean - expected) / expected);
        }
        println!("{line}");
    }
}
