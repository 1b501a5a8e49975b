//! Special functions and log-domain helpers used across the crate.
//!
//! Everything routes through `libm` so that results are bit-identical with
//! and without the `std` feature.

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

/// `log(e^a + e^b)` without overflow; `-inf` operands are absorbing zeros.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + libm::log1p(libm::exp(lo - hi))
}

/// `log Σ e^{x_i}` with a single max shift. Empty input gives `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let s: f64 = xs.iter().map(|&x| libm::exp(x - m)).sum();
    m + libm::log(s)
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Distribution function of `scale·|Z|`, `Z` standard normal.
pub fn half_normal_cdf(x: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        libm::erf(x / (scale * core::f64::consts::SQRT_2))
    }
}

// Bernoulli numbers B_2, B_4, B_6, B_8 divided by (2k)!.
const EM_COEFFS: [f64; 4] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30_240.0, -1.0 / 1_209_600.0];

/// `k`-th derivative of `x^{-s} e^{-f x}` at `x`.
fn damped_power_derivative(s: f64, f: f64, x: f64, k: u32) -> f64 {
    // Leibniz rule: Σ_j C(k,j) (s)_j x^{-s-j} f^{k-j}, times (-1)^k e^{-fx}.
    let mut total = 0.0;
    let mut binom = 1.0;
    let mut rising = 1.0;
    for j in 0..=k {
        total += binom * rising * powf(x, -s - j as f64) * powf(f, (k - j) as f64);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
        rising *= s + j as f64;
    }
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * total * exp(-f * x)
}

/// `Σ_{n ≥ m} n^{-s} e^{-f n}` for `s > 1`, `f ≥ 0`, `m ≥ 1`.
///
/// Terms below an internal cut are summed directly; the remainder uses the
/// tail integral `M^{1-s} E_s(fM)` plus Euler–Maclaurin corrections.
pub fn damped_power_tail_sum(s: f64, f: f64, m: usize) -> f64 {
    debug_assert!(s > 1.0 && f >= 0.0 && m >= 1);
    let cut = m.max(64);
    let mut direct = 0.0;
    for n in m..cut {
        let x = n as f64;
        direct += powf(x, -s) * exp(-f * x);
    }
    let big_m = cut as f64;
    let mut tail = powf(big_m, 1.0 - s) * exp_integral_e(s, f * big_m);
    tail += 0.5 * powf(big_m, -s) * exp(-f * big_m);
    for (i, c) in EM_COEFFS.iter().enumerate() {
        tail -= c * damped_power_derivative(s, f, big_m, 2 * i as u32 + 1);
    }
    direct + tail
}

/// `Σ_{n ≥ m} n^{-s}` for `s > 1`.
pub fn power_tail_sum(s: f64, m: usize) -> f64 {
    damped_power_tail_sum(s, 0.0, m)
}

/// Riemann zeta function for real `s > 1`.
pub fn zeta(s: f64) -> f64 {
    power_tail_sum(s, 1)
}

/// Generalized exponential integral `E_p(z) = ∫_1^∞ e^{-zt} t^{-p} dt`
/// for `p > 1` and `z ≥ 0`.
pub fn exp_integral_e(p: f64, z: f64) -> f64 {
    debug_assert!(p > 1.0 && z >= 0.0);
    if z == 0.0 {
        return 1.0 / (p - 1.0);
    }
    if z > 1.5 {
        return expint_continued_fraction(p, z);
    }
    let nearest = libm::round(p);
    if (p - nearest).abs() < 1e-7 {
        return expint_series_integer(nearest as u32, z);
    }
    // E_p(z) = z^{p-1} Γ(1-p) - Σ_k (-z)^k / (k! (k+1-p))
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 0..200 {
        let contrib = term / (k as f64 + 1.0 - p);
        sum += contrib;
        if k > 2 && contrib.abs() < 1e-17 * sum.abs() {
            break;
        }
        term *= -z / (k as f64 + 1.0);
    }
    powf(z, p - 1.0) * libm::tgamma(1.0 - p) - sum
}

fn expint_continued_fraction(p: f64, z: f64) -> f64 {
    // Modified Lentz evaluation of the standard continued fraction.
    const TINY: f64 = 1e-300;
    let mut b = z + p;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (p - 1.0 + i as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * exp(-z)
}

fn expint_series_integer(n: u32, z: f64) -> f64 {
    let nm1 = n as i64 - 1;
    let mut ans = if nm1 != 0 {
        1.0 / nm1 as f64
    } else {
        -ln(z) - EULER_GAMMA
    };
    let mut fact = 1.0;
    for i in 1..200i64 {
        fact *= -z / i as f64;
        let del = if i != nm1 {
            -fact / (i - nm1) as f64
        } else {
            let mut psi = -EULER_GAMMA;
            for ii in 1..=nm1 {
                psi += 1.0 / ii as f64;
            }
            fact * (-ln(z) + psi)
        };
        ans += del;
        if del.abs() < ans.abs() * 1e-17 {
            break;
        }
    }
    ans
}
