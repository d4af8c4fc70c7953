use super::*;
use crate::ensembles::{Spread, SpreadAtom, TraceNormalization};
use crate::quad::composite_gl;

fn run(spec: &EnsembleSpec, x: &[f64], variant: Variant, method: Method, metric: Option<&str>) -> CorrelationResult {
    let mut req = CorrelationRequest::new(spec.clone(), x.to_vec(), variant, method);
    if let Some(m) = metric {
        req = req.with_metric(MetricSignature::parse(m).unwrap());
    }
    evaluate(&req).unwrap_or_else(|e| panic!("{method} {variant} at {x:?}: {e}"))
}

fn close(a: C64, b: C64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()).max(1e-300)
}

fn gue(n: usize) -> EnsembleSpec {
    EnsembleSpec::gaussian(n, 1.0).unwrap()
}

fn quartic(n: usize) -> EnsembleSpec {
    EnsembleSpec::higher_trace(n, 4, 1, TraceNormalization::Auto).unwrap()
}

#[test]
fn convolution_reproduces_gue_kernel() {
    for n in 2..=6 {
        let spec = gue(n);
        for &x in &[-2.1, -0.35, 0.0, 0.8, 1.9] {
            for variant in [Variant::Rhat, Variant::R] {
                let conv = run(&spec, &[x], variant, Method::Convolution, None);
                let closed = run(&spec, &[x], variant, Method::ClosedFormGue, None);
                assert!(close(conv.value, closed.value, 1e-6), "N={n} x={x} {variant}: {} vs {}", conv.value, closed.value);
            }
        }
    }
}

#[test]
fn eigenvalue_integral_reproduces_gue_kernel() {
    let spec = gue(3);
    for &x in &[-1.2, 0.3, 2.0] {
        for variant in [Variant::Rhat, Variant::R] {
            let eig = run(&spec, &[x], variant, Method::EigenvalueIntegral, None);
            let closed = run(&spec, &[x], variant, Method::ClosedFormGue, None);
            assert!(close(eig.value, closed.value, 1e-6), "x={x} {variant}: {} vs {}", eig.value, closed.value);
        }
    }
}

#[test]
fn eigenvalue_integral_two_points() {
    let spec = gue(4);
    let x = [-0.4, 0.9];
    for metric in ["++", "+-"] {
        let eig = run(&spec, &x, Variant::Rhat, Method::EigenvalueIntegral, Some(metric));
        let closed = run(&spec, &x, Variant::Rhat, Method::ClosedFormGue, Some(metric));
        assert!(close(eig.value, closed.value, 1e-6), "{metric}: {} vs {}", eig.value, closed.value);
    }
}

#[test]
fn factorized_reproduces_gue_kernel() {
    let spec = gue(4);
    for x in [vec![0.7], vec![-1.1, 0.4]] {
        for variant in [Variant::Rhat, Variant::R] {
            let fac = run(&spec, &x, variant, Method::Factorized, None);
            let closed = run(&spec, &x, variant, Method::ClosedFormGue, None);
            assert!(close(fac.value, closed.value, 1e-8), "{x:?} {variant}: {} vs {}", fac.value, closed.value);
        }
    }
}

#[test]
fn two_point_convolution_matches_determinant() {
    let spec = gue(4);
    for (x, metric) in [([-0.8, 0.5], "++"), ([0.2, 1.6], "+-"), ([-1.9, -0.1], "--")] {
        let conv = run(&spec, &x, Variant::Rhat, Method::Convolution, Some(metric));
        let closed = run(&spec, &x, Variant::Rhat, Method::ClosedFormGue, Some(metric));
        assert!(close(conv.value, closed.value, 1e-5), "{x:?} {metric}: {} vs {}", conv.value, closed.value);
    }
}

#[test]
fn imaginary_part_variant_is_real_and_nonnegative() {
    for spec in [gue(3), quartic(4)] {
        for &x in &[-3.0, -1.0, 0.0, 0.6, 2.4] {
            let r = run(&spec, &[x], Variant::R, Method::Convolution, None);
            assert!(r.value.im.abs() <= r.error.max(1e-14), "x={x}: {}", r.value);
            assert!(r.value.re >= -r.error, "x={x}: {}", r.value);
        }
    }
}

fn integrated_density(spec: &EnsembleSpec, method: Method) -> f64 {
    let half = 3.0 * (spec.n() as f64).sqrt() + 6.0;
    composite_gl(-half, half, 24, 12, |x| run(spec, &[x], Variant::R, method, None).value).re
}

#[test]
fn one_point_function_integrates_to_level_count() {
    let cases = [
        (gue(3), Method::ClosedFormGue),
        (gue(3), Method::Convolution),
        (quartic(4), Method::ClosedFormHigherTrace),
    ];
    for (spec, method) in cases {
        let total = integrated_density(&spec, method);
        assert!((total - spec.n() as f64).abs() < 1e-6, "{method}: {total}");
    }
}

#[test]
fn flipping_all_sides_conjugates() {
    let spec = quartic(4);
    let x = [-0.6, 1.1];
    for metric in ["++", "+-"] {
        let a = run(&spec, &x, Variant::Rhat, Method::Convolution, Some(metric));
        let flipped: String = metric.chars().map(|c| if c == '+' { '-' } else { '+' }).collect();
        let b = run(&spec, &x, Variant::Rhat, Method::Convolution, Some(&flipped));
        assert!(close(a.value.conj(), b.value, 1e-8), "{metric}: {} vs {}", a.value, b.value);
    }
}

#[test]
fn permuting_points_leaves_value_unchanged() {
    let spec = quartic(4);
    let a = run(&spec, &[-0.6, 1.1], Variant::R, Method::ClosedFormHigherTrace, None);
    let b = run(&spec, &[1.1, -0.6], Variant::R, Method::ClosedFormHigherTrace, None);
    assert!(close(a.value, b.value, 1e-12));
    let a = run(&spec, &[-0.6, 1.1], Variant::Rhat, Method::Convolution, Some("+-"));
    let b = run(&spec, &[1.1, -0.6], Variant::Rhat, Method::Convolution, Some("-+"));
    assert!(close(a.value, b.value, 1e-10));
}

#[test]
fn coincident_points_show_level_repulsion() {
    let spec = gue(3);
    let r = run(&spec, &[0.4, 0.4], Variant::R, Method::ClosedFormGue, None);
    let r1 = run(&spec, &[0.4], Variant::R, Method::ClosedFormGue, None).value.re;
    assert!(r.value.norm() < 1e-12 * r1 * r1, "{}", r.value);
    assert!(r.notes.iter().any(|n| n.contains("coincident")));
}

#[test]
fn quartic_closed_form_matches_convolution() {
    let spec = quartic(4);
    for &x in &[0.0, 0.9, -1.7] {
        for variant in [Variant::Rhat, Variant::R] {
            let closed = run(&spec, &[x], variant, Method::ClosedFormHigherTrace, None);
            let conv = run(&spec, &[x], variant, Method::Convolution, None);
            assert!(close(closed.value, conv.value, 1e-5), "x={x} {variant}: {} vs {}", closed.value, conv.value);
        }
    }
}

#[test]
fn quadratic_trace_matches_norm_dependent_route() {
    let n = 4;
    let trace = EnsembleSpec::higher_trace(n, 2, 1, TraceNormalization::Auto).unwrap();
    // (tr H²) e^{-tr H²} is -∂_t of the Gaussian family at t = 1/2, rescaled
    let spread = Spread::from_atoms(vec![
        SpreadAtom { t: 0.5, weight: 1.0, derivative: 0 },
        SpreadAtom { t: 0.5, weight: -1.0 / (n * n) as f64, derivative: 1 },
    ])
    .unwrap();
    let norm = EnsembleSpec::norm_dependent(n, spread).unwrap();
    for x in [vec![0.3], vec![-1.2], vec![-0.5, 0.8]] {
        let a = run(&trace, &x, Variant::R, Method::ClosedFormHigherTrace, None);
        let b = run(&norm, &x, Variant::R, Method::Convolution, None);
        assert!(close(a.value, b.value, 1e-6), "{x:?}: {} vs {}", a.value, b.value);
    }
}

#[test]
fn spike_spread_is_a_rescaled_gue() {
    let t0 = 0.8;
    let spike = EnsembleSpec::norm_dependent(3, Spread::spike(t0).unwrap()).unwrap();
    let rescaled = EnsembleSpec::gaussian(3, 2.0 * t0).unwrap();
    for x in [vec![0.5], vec![-0.9, 0.3]] {
        let a = run(&spike, &x, Variant::Rhat, Method::Factorized, None);
        let b = run(&rescaled, &x, Variant::Rhat, Method::ClosedFormGue, None);
        assert!(close(a.value, b.value, 1e-8), "{x:?}: {} vs {}", a.value, b.value);
    }
}

#[test]
fn gaussian_generating_function_agrees_with_kernel_route() {
    let spec = gue(2);
    let h = 1e-4;
    for side in [Side::Plus, Side::Minus] {
        let x = 0.7;
        let up = generating_function_value(&spec, x, h, side).unwrap().0;
        let down = generating_function_value(&spec, x, -h, side).unwrap().0;
        let deriv = (up - down) / (2.0 * h) / (2.0 * std::f64::consts::PI);
        let want = run(&spec, &[x], Variant::Rhat, Method::ClosedFormGue, Some(&side.symbol().to_string())).value;
        assert!((deriv - want).norm() < 1e-5, "{side:?}: {deriv} vs {want}");
    }
}

#[test]
fn generating_function_is_normalized_at_zero_source() {
    let spec = quartic(4);
    for &x in &[-1.5, 0.2, 2.3] {
        let (z, _) = generating_function_value(&spec, x, 0.0, Side::Plus).unwrap();
        assert!((z - C64::new(1.0, 0.0)).norm() < 1e-8, "x={x}: {z}");
    }
}

#[test]
fn closed_form_gue_rejects_other_families() {
    let req = CorrelationRequest::new(quartic(4), vec![0.1], Variant::R, Method::ClosedFormGue);
    assert!(matches!(evaluate(&req), Err(Error::Contract(_))));
    let req = CorrelationRequest::new(quartic(4), vec![0.1], Variant::R, Method::Factorized);
    assert!(matches!(evaluate(&req), Err(Error::Contract(_))));
}

#[test]
fn malformed_requests_are_config_errors() {
    let req = CorrelationRequest::new(gue(2), vec![], Variant::R, Method::Convolution);
    assert!(matches!(evaluate(&req), Err(Error::Config(_))));
    let req = CorrelationRequest::new(gue(2), vec![0.1, 0.2], Variant::Rhat, Method::Convolution)
        .with_metric(MetricSignature::parse("+").unwrap());
    assert!(matches!(evaluate(&req), Err(Error::Config(_))));
    let req = CorrelationRequest::new(gue(3), vec![0.0, 0.1, 0.2], Variant::R, Method::EigenvalueIntegral);
    assert!(matches!(evaluate(&req), Err(Error::Config(_))));
}

#[test]
fn method_names_round_trip() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
    }
    assert_eq!("closed-form-gue".parse::<Method>().unwrap(), Method::ClosedFormGue);
    let err = "simpson".parse::<Method>().unwrap_err().to_string();
    for m in Method::ALL {
        assert!(err.contains(m.name()), "{err}");
    }
    assert!("Rhat".parse::<Variant>().is_ok());
    assert!("imag".parse::<Variant>().is_err());
}
