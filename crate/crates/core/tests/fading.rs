mod common;

use common::{gamma_pdf, integrate, integrate_to_inf};
use specshare::{
    moment_inverse_g1, moment_ratio, ratio_cdf, ratio_pdf, sample_pair, Error, FadingModel,
    RngStream,
};
use std::f64::consts::{E, PI};

fn models() -> Vec<FadingModel> {
    vec![
        FadingModel::rayleigh(),
        FadingModel::nakagami(1.0).unwrap(),
        FadingModel::nakagami(2.0).unwrap(),
        FadingModel::nakagami(4.5).unwrap(),
        FadingModel::lognormal(1.0).unwrap(),
        FadingModel::lognormal(0.3).unwrap(),
    ]
}

#[test]
fn sample_pair_examples() {
    let c = FadingModel::constant(1.0).unwrap();
    let s = sample_pair(&c, &c, RngStream::new(9, 0), 3);
    assert_eq!(s.len(), 3);
    assert!(s.iter().all(|s| s.g0 == 1.0 && s.g1 == 1.0));

    let n = 1_000_000;
    let r = sample_pair(
        &FadingModel::rayleigh(),
        &FadingModel::rayleigh(),
        RngStream::new(11, 0),
        n,
    );
    let mean = r.iter().map(|s| s.g0).sum::<f64>() / n as f64;
    assert!((mean - 1.0).abs() < 0.005);

    let k = FadingModel::nakagami(2.0).unwrap();
    let r = sample_pair(&k, &k, RngStream::new(12, 0), n);
    let mean = r.iter().map(|s| s.g0).sum::<f64>() / n as f64;
    let var = r.iter().map(|s| (s.g0 - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    assert!((var - 0.5).abs() < 0.01, "{var}");
}

#[test]
fn samples_are_reproducible_and_streams_differ() {
    let r = FadingModel::rayleigh();
    let a = sample_pair(&r, &r, RngStream::new(5, 3), 1000);
    let b = sample_pair(&r, &r, RngStream::new(5, 3), 1000);
    let c = sample_pair(&r, &r, RngStream::new(5, 4), 1000);
    assert_eq!(a, b);
    assert_ne!(a, c);
    // g0 and g1 come from different sub-streams
    assert!(a.iter().any(|s| s.g0 != s.g1));
}

#[test]
fn ratio_pdf_examples() {
    let r = FadingModel::rayleigh();
    assert_eq!(ratio_pdf(&r, &r, 0.0).unwrap(), 1.0);
    let n1 = FadingModel::nakagami(1.0).unwrap();
    for &x in &[0.0, 0.2, 1.0, 3.7, 50.0] {
        let a = ratio_pdf(&n1, &n1, x).unwrap();
        let b = ratio_pdf(&r, &r, x).unwrap();
        assert!((a - b).abs() <= 1e-13 * b, "x = {x}");
    }
    let l = FadingModel::lognormal(1.0).unwrap();
    assert!((ratio_pdf(&l, &l, 1.0).unwrap() - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-14);
    assert!((ratio_pdf(&l, &l, 1.0).unwrap() - 0.2820947918).abs() < 1e-10);
}

#[test]
fn ratio_pdf_rejects_mixed_and_constant() {
    let c = FadingModel::constant(1.0).unwrap();
    let r = FadingModel::rayleigh();
    let l = FadingModel::lognormal(1.0).unwrap();
    assert!(matches!(ratio_pdf(&r, &l, 1.0), Err(Error::Unsupported(_))));
    assert!(matches!(ratio_pdf(&c, &c, 1.0), Err(Error::Unsupported(_))));
}

#[test]
fn ratio_pdf_integrates_to_one() {
    for m in models() {
        let f = |x: f64| ratio_pdf(&m, &m, x).unwrap();
        let total = integrate(f, 0.0, 1.0, 1e-13) + integrate_to_inf(f, 1.0, 1e-13);
        assert!((total - 1.0).abs() < 1e-8, "{m:?}: {total}");
    }
}

#[test]
fn ratio_cdf_matches_integrated_pdf() {
    for m in models() {
        let f = |x: f64| ratio_pdf(&m, &m, x).unwrap();
        for &x in &[0.05, 0.5, 1.0, 2.0, 9.0] {
            let q = integrate(f, 0.0, x, 1e-14);
            let c = ratio_cdf(&m, &m, x).unwrap();
            assert!((c - q).abs() < 1e-9, "{m:?} at {x}: {c} vs {q}");
        }
    }
}

#[test]
fn sampled_ratio_matches_cdf_within_ks_band() {
    let n = 1_000_000;
    // 3 sigma of the Kolmogorov-Smirnov statistic is about 1.95 / sqrt(n)
    let band = 1.95 / (n as f64).sqrt();
    for (i, m) in [
        FadingModel::rayleigh(),
        FadingModel::nakagami(2.0).unwrap(),
        FadingModel::lognormal(1.0).unwrap(),
    ]
    .iter()
    .enumerate()
    {
        let s = sample_pair(m, m, RngStream::new(77, i as u64), n);
        let mut r: Vec<f64> = s.iter().map(|s| s.g0 / s.g1).collect();
        r.sort_by(f64::total_cmp);
        for k in 0..20 {
            let x = 10f64.powf(-2.0 + 4.0 * k as f64 / 19.0);
            let emp = r.partition_point(|&v| v <= x) as f64 / n as f64;
            let f = |t: f64| ratio_pdf(m, m, t).unwrap();
            let exact = integrate(f, 0.0, x, 1e-13);
            assert!((emp - exact).abs() < band, "{m:?} at {x}: {emp} vs {exact}");
        }
    }
}

#[test]
fn moments_match_quadrature() {
    assert_eq!(
        moment_inverse_g1(&FadingModel::rayleigh()).unwrap(),
        f64::INFINITY
    );
    assert_eq!(
        moment_ratio(&FadingModel::rayleigh(), &FadingModel::rayleigh()).unwrap(),
        f64::INFINITY
    );
    assert!(matches!(
        moment_inverse_g1(&FadingModel::nakagami(1.0).unwrap()),
        Err(Error::UndefinedMoment(_))
    ));
    assert_eq!(
        moment_inverse_g1(&FadingModel::constant(2.0).unwrap()).unwrap(),
        0.5
    );

    for &m in &[1.5, 2.0, 3.0, 7.0] {
        // x = u^2 near zero tames the x^{m-2} singularity
        let head = integrate(|u| 2.0 * gamma_pdf(m, u * u) / u, 0.0, 1.0, 1e-14);
        let q = head + integrate_to_inf(|x| gamma_pdf(m, x) / x, 1.0, 1e-14);
        let k = FadingModel::nakagami(m).unwrap();
        assert!(
            (moment_inverse_g1(&k).unwrap() - q).abs() < 1e-9 * q,
            "m = {m}"
        );
        assert!((moment_ratio(&k, &k).unwrap() - q).abs() < 1e-9 * q);
    }
    assert!((moment_inverse_g1(&FadingModel::nakagami(2.0).unwrap()).unwrap() - 2.0).abs() < 1e-15);

    let l = FadingModel::lognormal(1.0).unwrap();
    assert!((moment_inverse_g1(&l).unwrap() - 0.5f64.exp()).abs() < 1e-15);
    assert!((moment_ratio(&l, &l).unwrap() - E).abs() < 1e-15);
    let normal = |y: f64| (-0.5 * y * y).exp() / (2.0 * PI).sqrt();
    let q = integrate(|y| (-y).exp() * normal(y), -40.0, 40.0, 1e-15);
    assert!((moment_inverse_g1(&l).unwrap() - q).abs() < 1e-12);
}

#[test]
fn moment_ratio_factorizes() {
    for m in models() {
        if let (Ok(r), Ok(i)) = (moment_ratio(&m, &m), moment_inverse_g1(&m)) {
            if r.is_finite() && i.is_finite() {
                assert!((r - i * m.mean()).abs() <= 1e-15 * r);
            }
        }
    }
}

#[test]
fn scaled_models() {
    let r = FadingModel::rayleigh().with_scale(3.0).unwrap();
    let n = 200_000;
    let s = sample_pair(&r, &FadingModel::rayleigh(), RngStream::new(3, 0), n);
    let mean = s.iter().map(|s| s.g0).sum::<f64>() / n as f64;
    assert!((mean - 3.0).abs() < 3.0 * 3.0 * 3.0 / (n as f64).sqrt());
    assert!((r.quantile(0.5).unwrap() - 3.0 * 2f64.ln()).abs() < 1e-13);
}

#[test]
fn quantiles_invert_the_cdf() {
    let k = FadingModel::nakagami(2.0).unwrap();
    for &u in &[1e-6, 0.01, 0.3, 0.5, 0.9, 0.999999] {
        let g = k.quantile(u).unwrap();
        let c = integrate(|x| gamma_pdf(2.0, x), 0.0, g, 1e-15);
        assert!((c - u).abs() < 1e-10, "u = {u}");
    }
}
