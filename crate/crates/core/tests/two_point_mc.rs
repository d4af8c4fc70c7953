//! Two-point functions against Monte Carlo pair histograms. A missing
//! boundary contribution at k = 2 would show up as a systematic offset.

use rmtcorr::correlation::{evaluate, CorrelationRequest, Method, Variant};
use rmtcorr::ensembles::{EnsembleSpec, TraceNormalization};
use rmtcorr::mc::{estimate_r2, sample_batch, Bins, Threads};
use rmtcorr::quad::gauss_legendre;

fn r2(spec: &EnsembleSpec, a: f64, b: f64) -> f64 {
    evaluate(&CorrelationRequest::new(spec.clone(), vec![a, b], Variant::R, Method::Convolution))
        .unwrap()
        .value
        .re
}

fn check(spec: &EnsembleSpec, seed: u64) {
    let bins = Bins::new(-2.4, 2.4, 8).unwrap();
    let batch = sample_batch(spec, 400_000, seed, Threads(4)).unwrap();
    let hist = estimate_r2(&batch, bins).unwrap();
    let rule = gauss_legendre(4);
    let half = 0.5 * bins.width();
    let (mut agree, mut pull_sum) = (0, 0.0);
    let total = bins.count * bins.count;
    for i in 0..bins.count {
        for j in 0..bins.count {
            let (ci, cj) = (bins.center(i), bins.center(j));
            // bin average; the diagonal bins straddle the coincidence line, which the
            // engine handles by splitting points
            let mut avg = 0.0;
            for &(u, wu) in rule.iter() {
                for &(v, wv) in rule.iter() {
                    avg += 0.25 * wu * wv * r2(spec, ci + half * u, cj + half * v);
                }
            }
            let idx = i * bins.count + j;
            let pull = (hist.density[idx] - avg) / hist.error[idx].max(1e-12);
            pull_sum += pull;
            if pull.abs() <= 3.0 {
                agree += 1;
            }
        }
    }
    let fraction = agree as f64 / total as f64;
    let mean_pull = pull_sum / total as f64;
    assert!(fraction >= 0.95, "{fraction} of bins agree");
    // neighbouring bins share samples, so the bound on the mean pull is loose
    assert!(mean_pull.abs() < 1.0, "mean pull {mean_pull}");
}

#[test]
fn gaussian_pair_density_matches_sampling() {
    check(&EnsembleSpec::gaussian(4, 1.0).unwrap(), 31);
}

#[test]
fn quartic_pair_density_matches_sampling() {
    check(&EnsembleSpec::higher_trace(4, 4, 1, TraceNormalization::Auto).unwrap(), 32);
}
