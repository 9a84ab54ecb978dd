//! End to end: contaminated sample, calibrated rectangles, increase/decrease calls and a
//! lower bound on the number of modes.

use deconv_multiscale::error_models::ErrorModel;
use deconv_multiscale::experiments::{default_set, laplace_derivative_config};
use deconv_multiscale::gaussian_sim::{quantile, simulate_statistic};
use deconv_multiscale::inference::{coverage_check, extract_report, rectangles};
use deconv_multiscale::synth::{synthesize, DensitySpec};
use deconv_multiscale::teststat::{statistics_over_set, Mode};

fn main() -> deconv_multiscale::Result<()> {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let (n, theta, alpha) = (2000, 0.075, 0.1);
    let density = DensitySpec::trimodal();
    let data = synthesize(&density, &ErrorModel::laplace(theta)?, n, 3)?;

    let config = laplace_derivative_config(theta)?.with_mode(Mode::General);
    let set = default_set(n)?;
    let q = quantile(&simulate_statistic(&config, &set, Mode::General, 1000, 17, workers)?, alpha)?;
    println!("{} pairs, q_{alpha} = {:.3}", set.len(), q.value);

    let table = statistics_over_set(&data, &set, &config)?;
    let rects = rectangles(&table, q.value, Mode::General)?;
    let report = extract_report(&rects, alpha);
    let show = |name: &str, v: &[deconv_multiscale::inference::Interval]| {
        let s: Vec<String> = v.iter().map(|i| format!("[{:.3}, {:.3}]", i.lo, i.hi)).collect();
        println!("{name}: {}", s.join(" "));
    };
    show("minimal increases", &report.minimal_increases);
    show("minimal decreases", &report.minimal_decreases);
    show("mode intervals", &report.root_intervals);
    println!("at least {} modes (true count {})", report.mode_count_lower_bound, density.mode_count());

    let covered = coverage_check(&|x| density.derivative(x), &rects).iter().filter(|&&c| c).count();
    println!("{covered} of {} rectangles meet the graph of f'", rects.len());
    Ok(())
}
