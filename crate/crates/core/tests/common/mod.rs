#![allow(dead_code)]

use deconv_multiscale::kernels::gauss_legendre_unit;
use statrs::function::erf::erf;

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Asymptotic Kolmogorov tail `P(K > λ)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample KS statistic and p-value.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    (d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d))
}

/// Two-sample KS statistic and p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let sn = ne.sqrt();
    (d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d))
}

/// Composite Gauss–Legendre quadrature on `[a, b]`.
pub fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
    let w = (b - a) / pieces as f64;
    (0..pieces).map(|k| w * gauss_legendre_unit(20, |u| f(a + w * (k as f64 + u)))).sum()
}

/// Legendre polynomial `P_k(y)` by the three-term recurrence.
pub fn legendre(k: usize, y: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, y);
    if k == 0 {
        return p0;
    }
    for j in 1..k {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * y * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

pub fn factorial(k: u64) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

pub fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// `P_k(2x−1)` in ascending monomial coefficients of `x`.
pub fn shifted_legendre_coeffs(k: usize) -> Vec<i128> {
    let binom = |n: usize, r: usize| (0..r).fold(1i128, |b, i| b * (n - i) as i128 / (i + 1) as i128);
    (0..=k).map(|j| if (k + j) % 2 == 0 { 1 } else { -1 } * binom(k, j) * binom(k + j, j)).collect()
}

/// `N^deg · p(i/N)` as an exact integer.
pub fn eval_scaled(p: &[i128], i: i128, n: i128, deg: usize) -> i128 {
    p.iter().enumerate().map(|(j, &c)| c * i.pow(j as u32) * n.pow((deg - j) as u32)).sum()
}

pub fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}
