//! Sampling distribution of every estimator over replicate synthetic series
//! generated from the reference parameters.
//!
//! ```text
//! cargo run --release --example recovery_calibration -- [replicates] [years]
//! ```

use ou_weather::recover_parameters;
use ou_weather::reference;
use ou_weather::simulate::generate_synthetic_series;

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn report(name: &str, truth: f64, mut values: Vec<f64>, failures: usize) {
    values.sort_by(f64::total_cmp);
    if values.is_empty() {
        println!("{name:<12} all {failures} replicates failed");
        return;
    }
    println!(
        "{name:<12} truth {truth:>11.5e}  q025 {:>11.5e}  median {:>11.5e}  q975 {:>11.5e}  failures {failures}",
        quantile(&values, 0.025),
        quantile(&values, 0.5),
        quantile(&values, 0.975),
    );
}

fn main() {
    let mut args = std::env::args().skip(1);
    let replicates: u64 = args.next().map_or(200, |a| a.parse().expect("replicates"));
    let years: usize = args.next().map_or(24, |a| a.parse().expect("years"));

    let seasonal = reference::seasonal();
    let vol = reference::volatility();
    let mut cols: [Vec<f64>; 9] = Default::default();
    let (mut ks_fail, mut kt_fail) = (0, 0);
    let mut ks_ratio = Vec::new();
    for seed in 0..replicates {
        let series =
            generate_synthetic_series(&seasonal, reference::KAPPA_T, &vol, 2000, years, seed, None)
                .expect("synthetic series");
        let r = recover_parameters(&series).expect("seasonal and volatility stages");
        cols[0].push(r.seasonal.a_t);
        cols[1].push(r.seasonal.b_t);
        cols[2].push(r.seasonal.c_t);
        cols[3].push(r.seasonal.psi);
        cols[4].push(r.sigma_bar);
        cols[5].push(r.sigma_sigma);
        cols[8].push(r.seasonal.r_squared_fit);
        match r.kappa_sigma {
            Ok(k) => {
                cols[6].push(k);
                ks_ratio.push((-k).exp());
            }
            Err(_) => ks_fail += 1,
        }
        match r.kappa_t {
            Ok(k) => cols[7].push(k),
            Err(_) => kt_fail += 1,
        }
    }

    println!("{replicates} replicates of {years} years");
    let [a, b, c, psi, sbar, ssig, ks, kt, r2] = cols;
    report("a_t", reference::A_T, a, 0);
    report("b_t", reference::B_T, b, 0);
    report("c_t", reference::C_T, c, 0);
    report("psi", reference::PSI, psi, 0);
    report("sigma_bar", reference::SIGMA_BAR, sbar, 0);
    report("sigma_sigma", reference::SIGMA_SIGMA, ssig, 0);
    report("kappa_sigma", reference::KAPPA_SIGMA, ks, ks_fail);
    report("kappa_t", reference::KAPPA_T, kt, kt_fail);
    report("r2_fit", reference::SEASONAL_R2, r2, 0);
    report(
        "ks_ratio",
        (-reference::KAPPA_SIGMA).exp(),
        ks_ratio,
        ks_fail,
    );
}
