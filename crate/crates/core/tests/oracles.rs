//! Independent reimplementations checked against the library.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reld::{hotelling_ld, kpss_ld, LongRunVariance, SeriesView};

fn sample(r: &mut ChaCha8Rng, rows: usize, dims: usize) -> Vec<f64> {
    (0..rows * dims).map(|_| r.random_range(-3.0..3.0)).collect()
}

fn mean_cov_2d(data: &[f64], rows: usize) -> ([f64; 2], [[f64; 2]; 2]) {
    let n = rows as f64;
    let mut mean = [0.0; 2];
    for r in 0..rows {
        mean[0] += data[2 * r] / n;
        mean[1] += data[2 * r + 1] / n;
    }
    let mut cov = [[0.0; 2]; 2];
    for r in 0..rows {
        let d = [data[2 * r] - mean[0], data[2 * r + 1] - mean[1]];
        for a in 0..2 {
            for b in 0..2 {
                cov[a][b] += d[a] * d[b] / (n - 1.0);
            }
        }
    }
    (mean, cov)
}

/// Two-variable Hotelling t² with an explicit 2×2 inverse.
fn hotelling_2d(x: &[f64], nx: usize, y: &[f64], ny: usize) -> f64 {
    let (mx, sx) = mean_cov_2d(x, nx);
    let (my, sy) = mean_cov_2d(y, ny);
    let (fx, fy) = (nx as f64, ny as f64);
    let mut s = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            s[a][b] = ((fx - 1.0) * sx[a][b] + (fy - 1.0) * sy[a][b]) / (fx + fy - 2.0);
        }
    }
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let inv = [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]];
    let d = [mx[0] - my[0], mx[1] - my[1]];
    let q = d[0] * (inv[0][0] * d[0] + inv[0][1] * d[1]) + d[1] * (inv[1][0] * d[0] + inv[1][1] * d[1]);
    fx * fy / (fx + fy) * q
}

#[test]
fn hotelling_two_variables_matches_closed_form() {
    let mut r = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..300 {
        let nx = r.random_range(4..40);
        let ny = r.random_range(4..40);
        let x = sample(&mut r, nx, 2);
        let y: Vec<f64> = sample(&mut r, ny, 2).iter().map(|v| v + 0.5).collect();
        let got = hotelling_ld(SeriesView::new(&x, nx, 2), SeriesView::new(&y, ny, 2), 0.0).unwrap();
        let want = hotelling_2d(&x, nx, &y, ny);
        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn hotelling_rejects_singular_covariance_without_ridge() {
    let x = [1.0, 2.0, 2.0, 4.0, 3.0, 6.0];
    let y = [4.0, 8.0, 5.0, 10.0, 6.0, 12.0];
    assert!(hotelling_ld(SeriesView::new(&x, 3, 2), SeriesView::new(&y, 3, 2), 0.0).is_err());
    let t2 = hotelling_ld(SeriesView::new(&x, 3, 2), SeriesView::new(&y, 3, 2), 1e-3).unwrap();
    assert!(t2.is_finite() && t2 > 0.0);
}

/// KPSS with a Bartlett long-run variance, following the textbook recipe.
fn kpss_newey_west(z: &[f64], lags: usize) -> f64 {
    let n = z.len();
    let nf = n as f64;
    let tbar = (nf - 1.0) / 2.0;
    let zbar = z.iter().sum::<f64>() / nf;
    let sxy: f64 = z.iter().enumerate().map(|(i, v)| (i as f64 - tbar) * (v - zbar)).sum();
    let sxx: f64 = (0..n).map(|i| (i as f64 - tbar).powi(2)).sum();
    let slope = sxy / sxx;
    let e: Vec<f64> = z.iter().enumerate().map(|(i, v)| v - zbar - slope * (i as f64 - tbar)).collect();
    let mut lrv = e.iter().map(|v| v * v).sum::<f64>() / nf;
    for l in 1..=lags {
        let w = 1.0 - l as f64 / (lags as f64 + 1.0);
        let gamma: f64 = (l..n).map(|i| e[i] * e[i - l]).sum::<f64>() / nf;
        lrv += 2.0 * w * gamma;
    }
    let mut s = 0.0;
    let mut total = 0.0;
    for v in &e {
        s += v;
        total += s * s;
    }
    total / (nf * nf * lrv)
}

#[test]
fn kpss_newey_west_matches_textbook() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let n = r.random_range(10..120);
        let z = sample(&mut r, n, 1);
        for lags in [0usize, 1, 4] {
            let got = kpss_ld(&z, LongRunVariance::NeweyWest { bandwidth: lags }).unwrap();
            let want = kpss_newey_west(&z, lags);
            assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "lags {lags}: {got} vs {want}");
        }
        let simple = kpss_ld(&z, LongRunVariance::Simple).unwrap();
        assert!((simple - kpss_newey_west(&z, 0)).abs() <= 1e-8 * simple.max(1.0));
    }
}

#[test]
fn kpss_of_exact_line_is_zero() {
    let z: Vec<f64> = (0..50).map(|i| 3.0 - 0.25 * i as f64).collect();
    assert_eq!(kpss_ld(&z, LongRunVariance::Simple).unwrap(), 0.0);
}
