//! Five-number summaries of the limiting statistic for three sample sizes.
//! Pass a replication count as the first argument (default 1000).

use deconv_multiscale::experiments::fig2;

fn main() -> deconv_multiscale::Result<()> {
    let reps = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1000);
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    println!("{:>6} {:>6} {:>8} {:>8} {:>8} {:>8} {:>8}", "n", "pairs", "min", "q1", "median", "q3", "max");
    for row in fig2(&[200, 1000, 10_000], reps, 2024, workers)? {
        let s = &row.summary;
        println!(
            "{:>6} {:>6} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}",
            row.n, row.pairs, s.min, s.q1, s.median, s.q3, s.max
        );
    }
    Ok(())
}
