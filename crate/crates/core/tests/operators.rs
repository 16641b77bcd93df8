use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;

use dcnet::linalg::{dot, l2_distance, norm, DenseMatrix};
use dcnet::operators::{ComposedOperator, ForwardOperator, PinvMethod, RadonOperator, SaturationMap};
use dcnet::Rng;

fn dense(op: &RadonOperator<f64>) -> DMatrix<f64> {
    let d = DenseMatrix::from_map(op.matrix());
    DMatrix::from_fn(d.rows(), d.cols(), |i, j| d.get(i, j))
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    l2_distance(a, b).unwrap() / norm(b).max(1e-300)
}

/// Chord lengths by marching along the ray in tiny steps and binning each step into its pixel.
fn marched_row(n: usize, theta: f64, s: f64, steps: usize) -> Vec<f64> {
    let h = n as f64 / 2.0;
    let (c, sn) = (theta.cos(), theta.sin());
    let reach = h * 2f64.sqrt() + 1.0;
    let dt = 2.0 * reach / steps as f64;
    let mut out = vec![0.0; n * n];
    for k in 0..steps {
        let t = -reach + (k as f64 + 0.5) * dt;
        let x = s * c - t * sn;
        let y = s * sn + t * c;
        if x <= -h || x >= h || y <= -h || y >= h {
            continue;
        }
        let col = (x + h).floor() as usize;
        let row = (h - y).floor() as usize;
        out[row * n + col] += dt;
    }
    out
}

#[test]
fn radon_rows_match_marched_chord_lengths() {
    let (n, angles) = (8, 5);
    let op = RadonOperator::<f64>::new(n, angles).unwrap();
    let a = dense(&op);
    let bins = op.n_bins();
    for (k, theta) in op.angles().into_iter().enumerate() {
        for j in 0..bins {
            let s = j as f64 + 0.5 - bins as f64 / 2.0;
            let oracle = marched_row(n, theta, s, 200_000);
            for p in 0..n * n {
                let got = a[(k * bins + j, p)];
                assert!((got - oracle[p]).abs() < 1e-3, "angle {k} bin {j} pixel {p}: {got} vs {}", oracle[p]);
            }
        }
    }
}

#[test]
fn radon_ray_sums_match_square_chords() {
    // total weight of a ray equals the chord of the line through the whole square
    let n = 12;
    let op = RadonOperator::<f64>::new(n, 7).unwrap();
    let ones = vec![1.0; n * n];
    let sums = op.apply_slice(&ones).unwrap();
    let h = n as f64 / 2.0;
    let bins = op.n_bins();
    for (k, theta) in op.angles().into_iter().enumerate() {
        for j in 0..bins {
            let s = j as f64 + 0.5 - bins as f64 / 2.0;
            // clip p(t) = s·(c, sn) + t·(−sn, c) against |x|, |y| ≤ h
            let (c, sn) = (theta.cos(), theta.sin());
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            let mut empty = false;
            for (p, d) in [(s * c, -sn), (s * sn, c)] {
                if d.abs() < 1e-14 {
                    empty |= p.abs() >= h;
                } else {
                    let (a, b) = ((-h - p) / d, (h - p) / d);
                    lo = lo.max(a.min(b));
                    hi = hi.min(a.max(b));
                }
            }
            let chord = if empty { 0.0 } else { (hi - lo).max(0.0) };
            assert!((sums[k * bins + j] - chord).abs() < 1e-9, "angle {k} bin {j}");
        }
    }
}

#[test]
fn spectral_pseudo_inverse_matches_svd() {
    let op = RadonOperator::<f64>::new(8, 4).unwrap();
    let a = dense(&op);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.rank(1e-6 * smax);
    let pinv = svd.pseudo_inverse(1e-6 * smax).unwrap();
    let mut rng = Rng::new(41);
    for _ in 0..10 {
        let y: Vec<f64> = rng.gaussian_vec(a.nrows());
        let want: Vec<f64> = (&pinv * DMatrix::from_column_slice(y.len(), 1, &y)).iter().copied().collect();
        let got = op.pinv_slice(&y).unwrap();
        assert!(rel(&got, &want) < 1e-9);
    }
    assert_eq!(op.rank().unwrap(), rank);
}

#[test]
fn lsqr_and_spectral_routes_agree() {
    let op = RadonOperator::<f64>::new(16, 6).unwrap();
    let mut rng = Rng::new(42);
    for _ in 0..5 {
        // data in the range so both routes target the same minimum-norm solution
        let x: Vec<f64> = rng.uniform_vec(256, 0.0, 1.0);
        let y = op.apply_slice(&x).unwrap();
        let a = op.pinv_slice_with(&y, PinvMethod::Spectral { rel_cutoff: 1e-10 }).unwrap();
        let b = op
            .pinv_slice_with(&y, PinvMethod::Lsqr { tol: 1e-12, max_iter: Some(20_000) })
            .unwrap();
        assert!(rel(&a, &b) < 1e-6);
    }
}

#[test]
fn moore_penrose_identities() {
    let op = RadonOperator::<f64>::new(16, 8).unwrap();
    let mut rng = Rng::new(43);
    for _ in 0..20 {
        let u: Vec<f64> = rng.gaussian_vec(256);
        let fu = op.apply_slice(&u).unwrap();
        let back = op.apply_slice(&op.pinv_slice(&fu).unwrap()).unwrap();
        assert!(rel(&back, &fu) < 1e-9);

        let y: Vec<f64> = rng.gaussian_vec(fu.len());
        let py = op.pinv_slice(&y).unwrap();
        let again = op.pinv_slice(&op.apply_slice(&py).unwrap()).unwrap();
        assert!(rel(&again, &py) < 1e-9);

        // F F† and F† F are symmetric
        let y2: Vec<f64> = rng.gaussian_vec(fu.len());
        let r1 = dot(&op.range_project_slice(&y).unwrap(), &y2);
        let r2 = dot(&y, &op.range_project_slice(&y2).unwrap());
        assert!((r1 - r2).abs() < 1e-9 * (1.0 + r1.abs()));
        let u2: Vec<f64> = rng.gaussian_vec(256);
        let k1 = dot(&op.row_space_project_slice(&u).unwrap(), &u2);
        let k2 = dot(&u, &op.row_space_project_slice(&u2).unwrap());
        assert!((k1 - k2).abs() < 1e-9 * (1.0 + k1.abs()));
    }
}

#[test]
fn composed_operator_is_saturated_radon() {
    let radon = Arc::new(RadonOperator::<f64>::new(12, 4).unwrap());
    let op = ComposedOperator::with_level(radon.clone(), 3.0).unwrap();
    let mut rng = Rng::new(44);
    let x: Vec<f64> = rng.uniform_vec(144, 0.0, 1.0);
    let y = op.forward(&x).unwrap();
    let r = radon.apply_slice(&x).unwrap();
    for (a, b) in y.iter().zip(&r) {
        assert_eq!(*a, b.min(3.0));
    }
    assert!(r.iter().any(|&v| v > 3.0));
}

fn radon16() -> &'static RadonOperator<f64> {
    use std::sync::OnceLock;
    static OP: OnceLock<RadonOperator<f64>> = OnceLock::new();
    OP.get_or_init(|| RadonOperator::new(16, 6).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn radon_adjoint_identity(seed in any::<u64>()) {
        let op = radon16();
        let mut rng = Rng::new(seed);
        let x: Vec<f64> = rng.gaussian_vec(256);
        let y: Vec<f64> = rng.gaussian_vec(op.n_angles() * op.n_bins());
        let lhs = dot(&op.apply_slice(&x).unwrap(), &y);
        let rhs = dot(&x, &op.adjoint_slice(&y).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn projectors_are_idempotent_and_complementary(seed in any::<u64>()) {
        let op = radon16();
        let mut rng = Rng::new(seed);
        let x: Vec<f64> = rng.gaussian_vec(256);
        let k = op.kernel_project_slice(&x).unwrap();
        let kk = op.kernel_project_slice(&k).unwrap();
        prop_assert!(l2_distance(&k, &kk).unwrap() <= 1e-8 * norm(&x));
        // kernel part is invisible to F and orthogonal to the row-space part
        prop_assert!(norm(&op.apply_slice(&k).unwrap()) <= 1e-8 * norm(&x));
        let r = op.row_space_project_slice(&x).unwrap();
        prop_assert!(dot(&k, &r).abs() <= 1e-8 * dot(&x, &x));
        let y: Vec<f64> = rng.gaussian_vec(op.n_angles() * op.n_bins());
        let p = op.range_project_slice(&y).unwrap();
        let pp = op.range_project_slice(&p).unwrap();
        prop_assert!(l2_distance(&p, &pp).unwrap() <= 1e-8 * norm(&y));
    }

    #[test]
    fn normal_cone_projection_is_the_cellwise_nearest_point(
        cells in prop::collection::vec((-2.0f64..2.0, -3.0f64..3.0, 0.0f64..1.0), 1..40)
    ) {
        let levels: Vec<f64> = cells.iter().map(|c| c.0.abs() + 0.1).collect();
        let m = SaturationMap::new(1, cells.len(), levels.clone()).unwrap();
        let x: Vec<f64> = cells.iter().map(|c| c.0 + c.2).collect();
        let y = m.saturate_slice(&x).unwrap();
        let u: Vec<f64> = cells.iter().map(|c| c.1).collect();
        let p = m.normal_cone_project_slice(&y, &u).unwrap();
        // the projection is consistent with the data and idempotent
        prop_assert_eq!(m.saturate_slice(&p).unwrap(), y.clone());
        prop_assert_eq!(m.normal_cone_project_slice(&y, &p).unwrap(), p.clone());
        // nearest point, cell by cell: the fibre is {y} or [M, ∞)
        for i in 0..u.len() {
            let want = if y[i] < levels[i] { y[i] } else { u[i].max(levels[i]) };
            prop_assert_eq!(p[i], want);
        }
        // any other consistent point is at least as far
        let q: Vec<f64> = y.iter().zip(&levels).map(|(&v, &l)| if v < l { v } else { l + 1.0 }).collect();
        prop_assert!(l2_distance(&p, &u).unwrap() <= l2_distance(&q, &u).unwrap() + 1e-12);
    }
}

#[test]
fn f32_and_f64_operators_agree() {
    let a = RadonOperator::<f64>::new(10, 3).unwrap();
    let b = RadonOperator::<f32>::new(10, 3).unwrap();
    let mut rng = Rng::new(45);
    let x: Vec<f64> = rng.uniform_vec(100, 0.0, 1.0);
    let xf: Vec<f32> = x.iter().map(|&v| v as f32).collect();
    let ya = a.apply_slice(&x).unwrap();
    let yb = b.apply_slice(&xf).unwrap();
    for (p, q) in ya.iter().zip(&yb) {
        assert!((p - *q as f64).abs() < 1e-4 * (1.0 + p.abs()));
    }
}
