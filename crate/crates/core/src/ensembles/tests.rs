use super::*;
use crate::quad::gauss_hermite;
use proptest::prelude::*;

/// `∫ P(H) dH` for `N = 2` by Gauss–Hermite in the four real coordinates
/// `(h₁₁, h₂₂, Re h₁₂, Im h₁₂)`, scaled to the Gaussian of width `scale`.
fn total_mass_n2(spec: &EnsembleSpec, scale: f64, nodes: usize) -> f64 {
    let rule = gauss_hermite(nodes);
    // h = √s y maps e^{-h²/s} to e^{-y²}; off-diagonal parts carry 2|z|²/s
    let diag = scale.sqrt();
    let off = (0.5 * scale).sqrt();
    let mut acc = 0.0;
    for &(y1, w1) in rule.iter() {
        for &(y2, w2) in rule.iter() {
            for &(y3, w3) in rule.iter() {
                for &(y4, w4) in rule.iter() {
                    let z = C64::new(off * y3, off * y4);
                    let h = DMatrix::from_row_slice(
                        2,
                        2,
                        &[C64::new(diag * y1, 0.0), z, z.conj(), C64::new(diag * y2, 0.0)],
                    );
                    let p = spec.evaluate_density(&h).unwrap();
                    let back = (y1 * y1 + y2 * y2 + y3 * y3 + y4 * y4).exp();
                    acc += w1 * w2 * w3 * w4 * p * back;
                }
            }
        }
    }
    acc * diag * diag * off * off
}

#[test]
fn densities_are_normalized() {
    let cases = [
        (EnsembleSpec::gaussian(2, 1.0).unwrap(), 1.0),
        (EnsembleSpec::gaussian(2, 1.7).unwrap(), 1.7),
        (EnsembleSpec::norm_dependent(2, Spread::spike(0.8).unwrap()).unwrap(), 1.6),
        (EnsembleSpec::higher_trace(2, 2, 1, TraceNormalization::Auto).unwrap(), 1.0),
        (EnsembleSpec::higher_trace(2, 4, 1, TraceNormalization::Auto).unwrap(), 1.0),
        (EnsembleSpec::higher_trace(2, 2, 2, TraceNormalization::Auto).unwrap(), 1.0),
    ];
    for (spec, scale) in &cases {
        let mass = total_mass_n2(spec, *scale, 12);
        assert!((mass - 1.0).abs() < 1e-10, "{:?}: {mass}", spec.family());
    }
}

#[test]
fn trivial_trace_weight_is_gaussian() {
    let g = EnsembleSpec::gaussian(3, 1.0).unwrap();
    let h0 = EnsembleSpec::higher_trace(3, 0, 1, TraceNormalization::Auto).unwrap();
    let m = crate::mc::sample_matrices(&g, 3, 5).unwrap();
    for (h, _) in &m {
        let a = g.evaluate_density(h).unwrap();
        let b = h0.evaluate_density(h).unwrap();
        assert!((a - b).abs() < 1e-12 * a, "{a} vs {b}");
    }
    assert_eq!(h0.gaussian_scale(), Some(1.0));
}

#[test]
fn density_is_rotation_invariant() {
    let specs = [
        EnsembleSpec::gaussian(3, 1.3).unwrap(),
        EnsembleSpec::higher_trace(3, 4, 1, TraceNormalization::Auto).unwrap(),
        EnsembleSpec::norm_dependent(3, Spread::from_fn(|t| 2.0 * t, 0.0, 1.0, 41).unwrap()).unwrap(),
    ];
    let g = EnsembleSpec::gaussian(3, 1.0).unwrap();
    let samples = crate::mc::sample_matrices(&g, 4, 11).unwrap();
    for spec in &specs {
        for (i, (h, _)) in samples.iter().enumerate() {
            let u = crate::mc::haar_unitary(3, 100 + i as u64);
            let rotated = &u * h * u.adjoint();
            let a = spec.evaluate_density(h).unwrap();
            let b = spec.evaluate_density(&rotated).unwrap();
            assert!((a - b).abs() < 1e-10 * a.abs().max(1e-300), "{a} vs {b}");
        }
    }
}

#[test]
fn non_hermitean_matrix_is_rejected() {
    let g = EnsembleSpec::gaussian(2, 1.0).unwrap();
    let h = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    assert!(matches!(g.evaluate_density(&h), Err(Error::Contract(_))));
}

#[test]
fn gaussian_reduced_density_factorizes() {
    let s = 1.4;
    let spec = EnsembleSpec::gaussian(4, s).unwrap();
    let h = [0.3, -0.7, 1.1, 0.05];
    let v = spec
        .reduced_density(&DiagonalSelection::new(h.to_vec()).unwrap(), ReductionMethod::ClosedForm)
        .unwrap();
    let want: f64 = h.iter().map(|x| (-x * x / s).exp() / (PI * s).sqrt()).product();
    assert!((v.value - want).abs() < 1e-14);
}

#[test]
fn reduced_density_matches_monte_carlo() {
    let n = 4;
    let cases = [(2u32, 1u32), (4, 1), (2, 2)];
    let points = [vec![0.2, -0.5], vec![1.0, 0.4]];
    for &(m1, m2) in &cases {
        let spec = EnsembleSpec::higher_trace(n, m1, m2, TraceNormalization::Auto).unwrap();
        for (i, h) in points.iter().enumerate() {
            let sel = DiagonalSelection::new(h.clone()).unwrap();
            let exact = spec.reduced_density(&sel, ReductionMethod::ClosedForm).unwrap();
            let mc = spec
                .reduced_density(&sel, ReductionMethod::MonteCarlo { samples: 200_000, seed: 3 + i as u64 })
                .unwrap();
            assert!(
                (exact.value - mc.value).abs() < 3.0 * mc.error,
                "({m1},{m2}) h={h:?}: {} vs {} ± {}",
                exact.value,
                mc.value,
                mc.error
            );
        }
    }
}

#[test]
fn reduced_density_integrates_to_one() {
    let rule = gauss_hermite(30);
    let specs = [
        EnsembleSpec::higher_trace(4, 4, 1, TraceNormalization::Auto).unwrap(),
        EnsembleSpec::higher_trace(4, 2, 2, TraceNormalization::Auto).unwrap(),
        EnsembleSpec::norm_dependent(4, Spread::spike(0.5).unwrap()).unwrap(),
    ];
    for spec in &specs {
        let mix = spec.mixture(1).unwrap();
        let s = mix.min_scale();
        let root = s.sqrt();
        let mut acc = 0.0;
        for &(a, wa) in rule.iter() {
            for &(b, wb) in rule.iter() {
                let p = mix.density(&[root * a, root * b]);
                acc += wa * wb * p * (a * a + b * b).exp();
            }
        }
        acc *= s;
        assert!((acc - 1.0).abs() < 1e-10, "{:?}: {acc}", spec.family());
    }
}

#[test]
fn characteristic_function_basics() {
    let g = EnsembleSpec::gaussian(2, 1.0).unwrap();
    // ⟨e^{2ih}⟩ for e^{-h²}/√π is e^{-1}
    let v = g.characteristic_value(&[2.0, 0.0]).unwrap();
    assert!((v - C64::new((-1.0f64).exp(), 0.0)).norm() < 1e-15);
    for spec in [
        EnsembleSpec::higher_trace(4, 4, 1, TraceNormalization::Auto).unwrap(),
        EnsembleSpec::norm_dependent(4, Spread::spike(0.3).unwrap()).unwrap(),
    ] {
        let one = spec.characteristic_value(&[0.0; 4]).unwrap();
        assert!((one - C64::new(1.0, 0.0)).norm() < 1e-12, "{one}");
    }
}

#[test]
fn characteristic_jet_matches_finite_differences() {
    let spec = EnsembleSpec::higher_trace(4, 2, 1, TraceNormalization::Auto).unwrap();
    let r1 = [0.6];
    let jet = spec.characteristic_function(&r1, 3).unwrap();
    let h = 1e-3;
    let f = |t: f64| spec.characteristic_value(&[r1[0], t]).unwrap();
    let d1 = (f(h) - f(-h)) / (2.0 * h);
    let d2 = (f(h) - f(0.0) * 2.0 + f(-h)) / (h * h);
    assert!((jet.coeff(&[0]) - f(0.0)).norm() < 1e-14);
    assert!((jet.coeff(&[1]) - d1).norm() < 1e-6);
    assert!((jet.coeff(&[2]) * 2.0 - d2).norm() < 1e-5);
}

#[test]
fn spike_spread_is_rescaled_gaussian() {
    let t0 = 0.35;
    let a = EnsembleSpec::norm_dependent(4, Spread::spike(t0).unwrap()).unwrap();
    let b = EnsembleSpec::gaussian(4, 2.0 * t0).unwrap();
    assert_eq!(a.gaussian_scale(), Some(2.0 * t0));
    for h in [[0.1, 0.2, -0.3, 0.4], [1.0, -1.0, 0.5, 0.0]] {
        let (pa, pb) = (a.mixture(2).unwrap().density(&h), b.mixture(2).unwrap().density(&h));
        assert!((pa - pb).abs() < 1e-14 * pb);
    }
}

#[test]
fn quadratic_trace_is_a_derivative_spread() {
    let n = 4;
    let trace = EnsembleSpec::higher_trace(n, 2, 1, TraceNormalization::Auto).unwrap();
    let spread = Spread::from_atoms(vec![
        SpreadAtom { t: 0.5, weight: 1.0, derivative: 0 },
        SpreadAtom { t: 0.5, weight: -1.0 / (n * n) as f64, derivative: 1 },
    ])
    .unwrap();
    let norm = EnsembleSpec::norm_dependent(n, spread).unwrap();
    for k in 1..=2 {
        let (a, b) = (trace.mixture(k).unwrap(), norm.mixture(k).unwrap());
        for h in [[0.3, -0.2, 0.9, 0.1], [1.2, 0.0, -0.6, 0.8]] {
            let (pa, pb) = (a.density(&h[..2 * k]), b.density(&h[..2 * k]));
            assert!((pa - pb).abs() < 1e-13 * pa.abs().max(1e-300), "k={k}: {pa} vs {pb}");
        }
    }
    let g = crate::mc::sample_matrices(&EnsembleSpec::gaussian(n, 1.0).unwrap(), 2, 9).unwrap();
    for (h, _) in &g {
        let (pa, pb) = (trace.evaluate_density(h).unwrap(), norm.evaluate_density(h).unwrap());
        assert!((pa - pb).abs() < 1e-12 * pa, "{pa} vs {pb}");
    }
}

#[test]
fn superspace_density_of_spike() {
    let t0 = 0.7;
    let spec = EnsembleSpec::norm_dependent(3, Spread::spike(t0).unwrap()).unwrap();
    assert!((spec.superspace_density(&[0.0], &[0.0]).unwrap() - 1.0).abs() < 1e-15);
    let (s1, s2) = ([0.4, -0.1], [0.3, 0.2]);
    let trg: f64 = s1.iter().chain(&s2).map(|x| x * x).sum();
    let want = 4.0 * (-trg / (2.0 * t0)).exp();
    assert!((spec.superspace_density(&s1, &s2).unwrap() - want).abs() < 1e-14);
    let g = EnsembleSpec::gaussian(3, 1.0).unwrap();
    assert!(matches!(g.superspace_density(&[0.0], &[0.0]), Err(Error::Contract(_))));
}

#[test]
fn json_forms_parse() {
    let g = EnsembleSpec::from_json(r#"{"N": 4, "family": "gaussian", "scale": 2.0}"#, None).unwrap();
    assert_eq!(g.gaussian_scale(), Some(2.0));
    let t = EnsembleSpec::from_json(r#"{"N": 4, "family": "higher_trace", "m1": 4, "m2": 1, "b": "auto"}"#, None).unwrap();
    assert!(matches!(t.family(), Family::HigherTrace { m1: 4, m2: 1, normalization: TraceNormalization::Auto }));
    let a = EnsembleSpec::from_json(
        r#"{"N": 3, "family": "norm_dependent", "spread": {"kind": "atoms", "atoms": [{"t": 0.5, "weight": 1.0}]}}"#,
        None,
    )
    .unwrap();
    assert_eq!(a.gaussian_scale(), Some(1.0));
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("f.csv"), "t,f\n0.5,0\n1.0,2\n1.5,0\n").unwrap();
    let c = EnsembleSpec::from_json(
        r#"{"N": 3, "family": "norm_dependent", "spread": {"kind": "tabulated_csv", "path": "f.csv"}}"#,
        Some(dir.path()),
    )
    .unwrap();
    assert!(matches!(c.family(), Family::NormDependent { .. }));
}

#[test]
fn json_rejects_bad_input() {
    for text in [
        r#"{"N": 4, "family": "gaussian", "colour": 1}"#,
        r#"{"N": 4, "family": "wishart"}"#,
        r#"{"N": 4, "family": "higher_trace", "m1": 3, "m2": 1}"#,
        r#"{"N": 4, "family": "higher_trace", "m1": 1, "m2": 1}"#,
        r#"{"N": 4, "family": "gaussian", "m1": 2}"#,
        r#"{"N": 0, "family": "gaussian"}"#,
        r#"{"N": 2, "family": "norm_dependent", "spread": {"kind": "tabulated", "t": [0.5, 1.0], "f": [1.0, 1.0]}}"#,
    ] {
        assert!(EnsembleSpec::from_json(text, None).is_err(), "{text}");
    }
}

#[test]
fn explicit_normalization_scales_density() {
    let auto = EnsembleSpec::higher_trace(2, 2, 1, TraceNormalization::Auto).unwrap();
    let b = auto.trace_normalization().unwrap();
    let doubled = EnsembleSpec::higher_trace(2, 2, 1, TraceNormalization::Value(2.0 * b)).unwrap();
    let m = crate::mc::sample_matrices(&EnsembleSpec::gaussian(2, 1.0).unwrap(), 1, 1).unwrap();
    let (pa, pb) = (auto.evaluate_density(&m[0].0).unwrap(), doubled.evaluate_density(&m[0].0).unwrap());
    assert!((pb - 2.0 * pa).abs() < 1e-12 * pb);
}

proptest! {
    #[test]
    fn reduced_density_is_symmetric(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0) {
        let spec = EnsembleSpec::higher_trace(4, 4, 1, TraceNormalization::Auto).unwrap();
        let mix = spec.mixture(2).unwrap();
        let p = mix.density(&[a, b, c, d]);
        let q = mix.density(&[d, c, a, b]);
        prop_assert!((p - q).abs() <= 1e-12 * p.abs().max(1e-300));
    }

    #[test]
    fn characteristic_function_is_hermitean(r in -3.0f64..3.0, s in -3.0f64..3.0) {
        let spec = EnsembleSpec::higher_trace(4, 2, 2, TraceNormalization::Auto).unwrap();
        let v = spec.characteristic_value(&[r, s]).unwrap();
        let w = spec.characteristic_value(&[-r, -s]).unwrap();
        prop_assert!((v.conj() - w).norm() < 1e-12);
    }
}
