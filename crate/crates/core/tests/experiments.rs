use proptest::prelude::*;

use dcnet::experiments::phantom::{disk_saturation_levels, draw_gaussian_params, render_gaussian};
use dcnet::experiments::{
    add_noise, aggregate, data_fidelity, decode_pgm, encode_pgm, evaluate_set, fit_rate, gen_ellipse_pair,
    gen_gaussian_phantom, mean_std, psnr, ssim, GaussSat, Method, NoiseModel, PhantomRegime, PSNR_CAP,
};
use dcnet::linalg::l2_distance;
use dcnet::operators::SaturationMap;
use dcnet::{Extent, Grid, Image, Rng};

fn img(n: usize, v: Vec<f64>) -> Image<f64> {
    Image::new(n, n, Extent::unit_square(), v).unwrap()
}

/// Direct per-window SSIM with a full 2-D Gaussian weight table.
fn ssim_oracle(a: &[f64], b: &[f64], n: usize, peak: f64) -> f64 {
    let (win, sigma) = (11usize, 1.5f64);
    let mut wts = vec![0.0; win * win];
    for i in 0..win {
        for j in 0..win {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            wts[i * win + j] = (-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp();
        }
    }
    let s: f64 = wts.iter().sum();
    wts.iter_mut().for_each(|w| *w /= s);
    let (c1, c2) = ((0.01 * peak).powi(2), (0.03 * peak).powi(2));
    let mut total = 0.0;
    let mut count = 0;
    for r0 in 0..=n - win {
        for q0 in 0..=n - win {
            let (mut ma, mut mb) = (0.0, 0.0);
            for i in 0..win {
                for j in 0..win {
                    let p = (r0 + i) * n + q0 + j;
                    ma += wts[i * win + j] * a[p];
                    mb += wts[i * win + j] * b[p];
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..win {
                for j in 0..win {
                    let p = (r0 + i) * n + q0 + j;
                    let w = wts[i * win + j];
                    va += w * (a[p] - ma).powi(2);
                    vb += w * (b[p] - mb).powi(2);
                    cov += w * (a[p] - ma) * (b[p] - mb);
                }
            }
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    total / count as f64
}

#[test]
fn ssim_matches_windowed_oracle() {
    let mut rng = Rng::new(1);
    for n in [11, 16, 23] {
        for _ in 0..5 {
            let a: Vec<f64> = rng.uniform_vec(n * n, 0.0, 1.0);
            let b: Vec<f64> = a.iter().map(|v| v + 0.2 * rng.gaussian()).collect();
            let got = ssim(&img(n, a.clone()), &img(n, b.clone()), 1.0).unwrap();
            let want = ssim_oracle(&a, &b, n, 1.0);
            assert!((got - want).abs() < 1e-12, "n={n}: {got} vs {want}");
        }
    }
    assert!(ssim(&img(10, vec![0.0; 100]), &img(10, vec![0.0; 100]), 1.0).is_err());
}

#[test]
fn psnr_matches_closed_form() {
    let x = img(4, vec![0.5; 16]);
    let mut v = vec![0.5; 16];
    v[3] = 0.9;
    // mse = 0.16 / 16 = 0.01
    let got = psnr(&img(4, v), &x, 1.0).unwrap();
    assert!((got - 20.0).abs() < 1e-12);
    assert_eq!(psnr(&x, &x, 1.0).unwrap(), PSNR_CAP);
    assert!(psnr(&x, &x, 0.0).is_err());
}

#[test]
fn data_fidelity_and_mean_std() {
    let m = SaturationMap::constant(2, 2, 0.5).unwrap();
    let x = vec![0.1, 0.7, 0.2, 0.9];
    let xh = vec![0.4, 2.0, 0.2, 0.3];
    // saturated: (0.1, 0.5, 0.2, 0.5) vs (0.4, 0.5, 0.2, 0.3)
    let want = (0.3f64.powi(2) + 0.2f64.powi(2)).sqrt();
    assert!((data_fidelity(&m, &xh, &x).unwrap() - want).abs() < 1e-12);

    let (mean, sd) = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
    assert_eq!(mean, 5.0);
    assert!((sd - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
    assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    assert!(mean_std(&[]).0.is_nan());
}

#[test]
fn noise_stays_in_the_ball_over_many_draws() {
    let mut rng = Rng::new(2);
    let mut ratio_sum = 0.0;
    let draws = 100_000;
    for k in 0..draws {
        let y: Vec<f64> = rng.uniform_vec(1 + k % 17, -3.0, 3.0);
        let delta = 10f64.powf(rng.uniform(-6.0, 1.0));
        let yd = add_noise(&y, NoiseModel { delta }, &mut rng).unwrap();
        let d = l2_distance(&yd, &y).unwrap();
        assert!(d <= delta, "draw {k}: {d} > {delta}");
        ratio_sum += d / delta;
    }
    // the radius is uniform on [0, δ)
    assert!((ratio_sum / draws as f64 - 0.5).abs() < 0.01);

    let y32: Vec<f32> = vec![1e3; 64];
    for _ in 0..1000 {
        let yd = add_noise(&y32, NoiseModel { delta: 1e-2 }, &mut rng).unwrap();
        assert!(l2_distance(&yd, &y32).unwrap() as f64 <= 1e-2);
    }
    assert!(add_noise(&y32, NoiseModel { delta: -1.0 }, &mut rng).is_err());
    assert_eq!(add_noise(&y32, NoiseModel { delta: 0.0 }, &mut rng).unwrap(), y32);
}

#[test]
fn gaussian_regimes_differ_in_width_and_height() {
    let n = 64;
    let area = (2.0 / n as f64).powi(2);
    let mut rng = Rng::new(3);
    for _ in 0..50 {
        let mut probe = rng.clone();
        let reg = gen_gaussian_phantom::<f64>(&mut rng, &PhantomRegime::gaussian_regular(), n).unwrap();
        let p = draw_gaussian_params(&mut probe, &PhantomRegime::gaussian_regular());
        assert_eq!(reg, render_gaussian(&p, n));
        assert!((0.24..0.32).contains(&p.sigma1) && (0.24..0.32).contains(&p.sigma2));
        assert!((0.75..1.0).contains(&p.amplitude));
        // mass A·2πσ₁σ₂ separates the regimes: regular ≥ 0.27, modified ≤ 0.21
        let mass: f64 = reg.values().iter().sum::<f64>() * area;
        assert!(mass > 0.26, "{mass}");

        let modi = gen_gaussian_phantom::<f64>(&mut rng, &PhantomRegime::gaussian_modified(), n).unwrap();
        let mass: f64 = modi.values().iter().sum::<f64>() * area;
        assert!(mass < 0.21, "{mass}");
        assert!(modi.values().iter().all(|&v| (0.0..=0.8).contains(&v)));
    }
    assert!(gen_gaussian_phantom::<f64>(&mut rng, &PhantomRegime::ellipse(false), n).is_err());
}

#[test]
fn disk_levels_and_gauss_forward() {
    let n = 32;
    let levels = disk_saturation_levels::<f64>(n);
    for r in 0..n {
        for c in 0..n {
            let (x, y) = levels.pixel_center(r, c);
            let want = if x.hypot(y) <= 0.5 { 0.6 } else { 0.0 };
            assert_eq!(levels.get(r, c), want);
        }
    }
    let g = GaussSat::<f64>::new(n).unwrap();
    let split = g.draw(&PhantomRegime::gaussian_regular(), 4, &mut Rng::new(4)).unwrap();
    for (x, y) in split.truth.iter().zip(&split.data) {
        for ((a, b), l) in x.iter().zip(y).zip(levels.values()) {
            assert_eq!(*b, a.min(*l));
        }
    }
}

#[test]
fn ellipse_pairs_differ_by_a_small_bump() {
    let mut rng = Rng::new(5);
    for _ in 0..30 {
        let (reg, modi) = gen_ellipse_pair::<f64>(&mut rng, 32, (3, 6)).unwrap();
        assert!(reg.values().iter().all(|&v| (0.0..=0.9).contains(&v)));
        let mut moved = 0;
        for (a, b) in reg.values().iter().zip(modi.values()) {
            let d = b - a;
            assert!((0.0..=0.1 + 1e-12).contains(&d));
            moved += (d > 0.0) as usize;
        }
        assert!(moved > 0);
    }
    assert!(gen_ellipse_pair::<f64>(&mut rng, 8, (4, 2)).is_err());
}

#[test]
fn pgm_round_trip_is_within_half_a_step() {
    let mut rng = Rng::new(6);
    let x = Image::<f64>::new(7, 5, Extent::unit_square(), rng.uniform_vec(35, 0.0, 2.0)).unwrap();
    let bytes = encode_pgm(&x, 2.0);
    assert!(bytes.starts_with(b"P5\n7 5\n65535\n"));
    assert_eq!(bytes.len(), b"P5\n7 5\n65535\n".len() + 70);
    let back: Image<f64> = decode_pgm(&bytes, 2.0).unwrap();
    assert_eq!(back.shape(), x.shape());
    for (a, b) in back.values().iter().zip(x.values()) {
        assert!((a - b).abs() <= 0.5 * 2.0 / 65535.0 + 1e-15);
    }
    assert!(decode_pgm::<f64>(&bytes[..bytes.len() - 1], 2.0).is_err());
    assert!(decode_pgm::<f64>(b"P2\n1 1\n65535\n\x00\x00", 1.0).is_err());
}

#[test]
fn evaluate_and_aggregate() {
    let n = 12;
    let mut rng = Rng::new(7);
    let truths: Vec<Vec<f64>> = (0..3).map(|_| rng.uniform_vec(n * n, 0.0, 1.0)).collect();
    let m = SaturationMap::constant(n, n, 0.5).unwrap();
    let data: Vec<Vec<f64>> = truths.iter().map(|x| m.saturate_slice(x).unwrap()).collect();
    let methods = vec![
        Method { name: "data", run: Box::new(|y: &[f64]| Ok(y.to_vec())) },
        Method { name: "zero", run: Box::new(|y: &[f64]| Ok(vec![0.0; y.len()])) },
    ];
    let fwd = |x: &[f64]| m.saturate_slice(x);
    let (rows, recons) = evaluate_set("s", &truths, &data, n, 1.0, &fwd, &methods).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(recons.len(), 2);
    assert_eq!(recons[0], data);
    for r in &rows {
        let xi = img(n, truths[r.sample].clone());
        let xh = img(n, recons[(r.method == "zero") as usize][r.sample].clone());
        assert_eq!(r.psnr, psnr(&xh, &xi, 1.0).unwrap());
        assert_eq!(r.ssim, ssim(&xh, &xi, 1.0).unwrap());
        if r.method == "data" {
            // the saturated data is itself consistent
            assert_eq!(r.fidelity, 0.0);
        }
    }
    let agg = aggregate(&rows);
    assert_eq!(agg.len(), 2);
    assert_eq!((agg[0].method.as_str(), agg[0].count), ("data", 3));
    let ps: Vec<f64> = rows.iter().filter(|r| r.method == "zero").map(|r| r.psnr).collect();
    assert_eq!((agg[1].psnr_mean, agg[1].psnr_std), mean_std(&ps));
}

#[test]
fn rate_fit_recovers_a_power_law() {
    let deltas = [1e-1, 5e-2, 2e-2, 1e-2, 5e-3];
    let errs: Vec<f64> = deltas.iter().map(|d: &f64| 3.0 * d.powf(0.5)).collect();
    let (slope, intercept, residual) = fit_rate(&deltas, &errs).unwrap();
    assert!((slope - 0.5).abs() < 1e-12);
    assert!((intercept - 3f64.ln()).abs() < 1e-12);
    assert!(residual < 1e-12);
    assert!(fit_rate(&deltas[..2], &errs[..2]).is_err());
    assert!(fit_rate(&deltas, &[1.0, 0.0, 1.0, 1.0, 1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ssim_is_symmetric(seed in any::<u64>(), noise in 0.0f64..0.5) {
        let mut rng = Rng::new(seed);
        let a: Vec<f64> = rng.uniform_vec(256, 0.0, 1.0);
        let b: Vec<f64> = a.iter().map(|v| v + noise * rng.gaussian()).collect();
        let (ia, ib) = (img(16, a), img(16, b));
        let ab = ssim(&ia, &ib, 1.0).unwrap();
        let ba = ssim(&ib, &ia, 1.0).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-14);
        prop_assert!((ssim(&ia, &ia, 1.0).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn psnr_decreases_strictly_in_mse(seed in any::<u64>(), s in 1e-4f64..1.0, grow in 1.001f64..10.0) {
        let mut rng = Rng::new(seed);
        let x: Vec<f64> = rng.uniform_vec(64, 0.0, 1.0);
        let dir: Vec<f64> = rng.gaussian_vec(64);
        let at = |t: f64| img(8, x.iter().zip(&dir).map(|(a, d)| a + t * d).collect());
        let near = psnr(&at(s), &img(8, x.clone()), 1.0).unwrap();
        let far = psnr(&at(s * grow), &img(8, x.clone()), 1.0).unwrap();
        prop_assert!(far < near);
    }

    #[test]
    fn rate_fit_is_scale_equivariant(
        errs in prop::collection::vec(1e-3f64..10.0, 6),
        a in 1e-3f64..1e3,
        b in 1e-3f64..1e3,
    ) {
        let deltas = [3e-1, 1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
        let (s0, i0, r0) = fit_rate(&deltas, &errs).unwrap();
        // errors scaled by a: slope kept, intercept shifted by ln a
        let scaled: Vec<f64> = errs.iter().map(|e| a * e).collect();
        let (s1, i1, r1) = fit_rate(&deltas, &scaled).unwrap();
        prop_assert!((s1 - s0).abs() <= 1e-9);
        prop_assert!((i1 - i0 - a.ln()).abs() <= 1e-9);
        prop_assert!((r1 - r0).abs() <= 1e-9);
        // deltas scaled by b: slope kept, intercept shifted by −slope·ln b
        let dd: Vec<f64> = deltas.iter().map(|d| b * d).collect();
        let (s2, i2, _) = fit_rate(&dd, &errs).unwrap();
        prop_assert!((s2 - s0).abs() <= 1e-9);
        prop_assert!((i2 - i0 + s0 * b.ln()).abs() <= 1e-8);
    }
}
