//! Monte Carlo calibration of the multiscale statistic for Laplace errors and a density derivative.

use deconv_multiscale::experiments::{default_set, laplace_derivative_config};
use deconv_multiscale::gaussian_sim::{quantile, simulate_statistic};
use deconv_multiscale::teststat::Mode;

fn main() -> deconv_multiscale::Result<()> {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let config = laplace_derivative_config(0.075)?;
    for n in [200, 1000, 10_000] {
        let set = default_set(n)?;
        let draws = simulate_statistic(&config, &set, Mode::Principal, 2000, 1, workers)?;
        let q = quantile(&draws, 0.1)?;
        println!("n = {n:>5}: {} pairs, q_0.1 = {:+.3} (mc se {:.3})", set.len(), q.value, q.mc_stderr);
    }
    Ok(())
}
