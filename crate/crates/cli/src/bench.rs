use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use nbekcf::acsii::autocorrelation;
use nbekcf::ccim::circulant_correlation;
use nbekcf::oracle::{brute_autocorrelation, brute_circulant_correlation, MAX_ORACLE_DIM};
use nbekcf::FeatureMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{usage_error, BenchArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Ccim,
    Acsii,
    Brute,
    All,
}

/// Median wall time in ms after one untimed warmup run.
fn median_ms(iters: usize, mut f: impl FnMut()) -> f64 {
    f();
    let mut t: Vec<f64> = (0..iters)
        .map(|_| {
            let s = Instant::now();
            f();
            s.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    t.sort_by(f64::total_cmp);
    let mid = t.len() / 2;
    if t.len().is_multiple_of(2) {
        0.5 * (t[mid - 1] + t[mid])
    } else {
        t[mid]
    }
}

pub fn run(args: BenchArgs) -> Result<ExitCode> {
    let BenchArgs { m, n, big_m, big_n, d, iters, method, seed } = args;
    if m == 0 || n == 0 || d == 0 || m > big_m || n > big_n {
        usage_error(format!(
            "need 1 <= m <= M, 1 <= n <= N and D >= 1, got m={m} n={n} M={big_m} N={big_n} D={d}"
        ));
    }
    if iters == 0 {
        usage_error("--iters must be at least 1");
    }
    let oracle_fits = big_m <= MAX_ORACLE_DIM && big_n <= MAX_ORACLE_DIM;
    if method == Method::Brute && !oracle_fits {
        usage_error(format!("brute force is limited to M, N <= {MAX_ORACLE_DIM}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = FeatureMap::from_fn(m, n, d, |_, _, _| rng.gen_range(0.0..1.0))?;
    let z = FeatureMap::from_fn(big_m, big_n, d, |_, _, _| rng.gen_range(0.0..1.0))?;

    let want = |k: Method| method == k || method == Method::All;
    let run_brute = want(Method::Brute) && oracle_fits;
    let brute = run_brute.then(|| {
        let c = median_ms(iters, || {
            std::hint::black_box(brute_circulant_correlation(&x0, &z).expect("shapes checked"));
        });
        let a = median_ms(iters, || {
            std::hint::black_box(brute_autocorrelation(&z, m, n).expect("shapes checked"));
        });
        (c, a)
    });
    let ccim = want(Method::Ccim).then(|| {
        median_ms(iters, || {
            std::hint::black_box(circulant_correlation(&x0, &z).expect("shapes checked"));
        })
    });
    let acsii = want(Method::Acsii).then(|| {
        median_ms(iters, || {
            std::hint::black_box(autocorrelation(&z, m, n).expect("shapes checked"));
        })
    });

    println!("{:<12} {:>4} {:>4} {:>4} {:>4} {:>4} {:>12} {:>9}", "method", "m", "n", "M", "N", "D", "median_ms", "speedup");
    let row = |name: &str, ms: f64, speedup: Option<f64>| {
        let s = speedup.map_or("-".to_string(), |s| format!("{s:.1}x"));
        println!("{name:<12} {m:>4} {n:>4} {big_m:>4} {big_n:>4} {d:>4} {ms:>12.3} {s:>9}");
    };
    if let Some(ms) = ccim {
        row("ccim", ms, brute.map(|b| b.0 / ms));
    }
    if let Some(ms) = acsii {
        row("acsii", ms, brute.map(|b| b.1 / ms));
    }
    if let Some((c, a)) = brute {
        row("brute-ccim", c, None);
        row("brute-acsii", a, None);
    } else if method == Method::All {
        println!("brute force skipped: M, N > {MAX_ORACLE_DIM}");
    }
    println!("median of {iters} runs after one warmup, seed {seed}");
    Ok(ExitCode::SUCCESS)
}
