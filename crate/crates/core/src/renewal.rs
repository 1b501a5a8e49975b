//! Renewal processes with polynomial tails.
//!
//! A [`RenewalLaw`] stores the inter-arrival masses `K(1..=n_max)`. When the
//! law comes from [`make_power_law`] it also remembers the analytic tail
//! `c·n^{-(1+α)}` for `n > n_max`, which is used wherever an infinite sum
//! over gaps appears.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{param, Error, Result};
use crate::special::{self, damped_power_tail_sum, exp, ln, power_tail_sum, powf, sqrt};

const RECURRENCE_TOL: f64 = 1e-10;
#[cfg(feature = "std")]
const DIRECT_GREEN_LIMIT: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
pub struct RenewalLaw {
    // mass[0] is unused and always 0.
    mass: Vec<f64>,
    alpha: f64,
    c_k: f64,
    total: f64,
    // K(n) = tail_coeff·n^{-(1+alpha)} for n > n_max; 0 for finitely supported laws.
    tail_coeff: f64,
    // survival[m] = P(τ₁ > m), including the analytic tail and any defect.
    survival: Vec<f64>,
    cdf: Vec<f64>,
}

/// Power law `K(n) = n^{-(1+α)}/ζ(1+α)`, stored up to `n_max`.
pub fn make_power_law(alpha: f64, n_max: usize) -> Result<RenewalLaw> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidExponent(alpha));
    }
    if n_max < 2 {
        return Err(Error::InvalidHorizon(n_max));
    }
    let s = 1.0 + alpha;
    let c = 1.0 / special::zeta(s);
    let mut mass = vec![0.0; n_max + 1];
    for (n, m) in mass.iter_mut().enumerate().skip(1) {
        *m = c * powf(n as f64, -s);
    }
    Ok(RenewalLaw::assemble(mass, alpha, c, c))
}

impl RenewalLaw {
    /// Finitely supported law with `masses[i] = K(i+1)`. `alpha` and `c_k`
    /// are carried as labels only.
    pub fn from_masses(masses: &[f64], alpha: f64, c_k: f64) -> Result<Self> {
        if masses.len() < 2 {
            return Err(Error::InvalidHorizon(masses.len()));
        }
        for &m in masses {
            if !(m > 0.0) || !m.is_finite() {
                return Err(param("mass", m, "every mass must be positive"));
            }
        }
        let mut mass = Vec::with_capacity(masses.len() + 1);
        mass.push(0.0);
        mass.extend_from_slice(masses);
        let law = RenewalLaw::assemble(mass, alpha, c_k, 0.0);
        if law.total > 1.0 + 1e-12 {
            return Err(param("total", law.total, "masses must sum to at most 1"));
        }
        Ok(law)
    }

    fn assemble(mass: Vec<f64>, alpha: f64, c_k: f64, tail_coeff: f64) -> Self {
        let n_max = mass.len() - 1;
        let total: f64 = mass.iter().sum();
        let tail = if tail_coeff > 0.0 {
            tail_coeff * power_tail_sum(1.0 + alpha, n_max + 1)
        } else {
            0.0
        };
        let defect = (1.0 - total - tail).max(0.0);
        let mut survival = vec![0.0; n_max + 1];
        let mut acc = tail + defect;
        for m in (0..=n_max).rev() {
            survival[m] = acc;
            acc += mass[m];
        }
        let mut cdf = vec![0.0; n_max + 1];
        let mut run = 0.0;
        for n in 1..=n_max {
            run += mass[n];
            cdf[n] = run;
        }
        RenewalLaw {
            mass,
            alpha,
            c_k,
            total,
            tail_coeff,
            survival,
            cdf,
        }
    }

    pub fn n_max(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_k(&self) -> f64 {
        self.c_k
    }

    /// `Σ_{n ≤ n_max} K(n)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// `K(n)`; zero for `n = 0` and beyond the stored range.
    #[inline]
    pub fn mass(&self, n: usize) -> f64 {
        self.mass.get(n).copied().unwrap_or(0.0)
    }

    /// `K(n)` including the analytic tail beyond `n_max`.
    pub fn mass_extended(&self, n: usize) -> f64 {
        if n <= self.n_max() {
            self.mass(n)
        } else {
            self.tail_coeff * powf(n as f64, -(1.0 + self.alpha))
        }
    }

    /// Slice `K(0..=n_max)` with `K(0) = 0`.
    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    /// Mass beyond `n_max` accounted for by the analytic tail.
    pub fn tail_mass(&self) -> f64 {
        if self.tail_coeff > 0.0 {
            self.tail_coeff * power_tail_sum(1.0 + self.alpha, self.n_max() + 1)
        } else {
            0.0
        }
    }

    /// Stored plus analytic tail mass; 1 for a recurrent law.
    pub fn full_mass(&self) -> f64 {
        self.total + self.tail_mass()
    }

    pub fn is_recurrent(&self) -> bool {
        (self.full_mass() - 1.0).abs() < RECURRENCE_TOL
    }

    /// `P(τ₁ > m)`.
    pub fn survival(&self, m: usize) -> f64 {
        if m <= self.n_max() {
            self.survival[m]
        } else if self.tail_coeff > 0.0 {
            self.tail_coeff * power_tail_sum(1.0 + self.alpha, m + 1) + (1.0 - self.full_mass()).max(0.0)
        } else {
            (1.0 - self.total).max(0.0)
        }
    }

    /// Largest `|K(n)·n^{1+α}/c_k − 1|` over the last decade of stored indices.
    pub fn tail_drift(&self) -> f64 {
        let n_max = self.n_max();
        let start = (n_max / 10).max(1);
        (start..=n_max)
            .map(|n| (self.mass[n] * powf(n as f64, 1.0 + self.alpha) / self.c_k - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Same law with every mass (and the analytic tail) multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(param("factor", factor, "must be positive"));
        }
        let mass: Vec<f64> = self.mass.iter().map(|m| m * factor).collect();
        let law = RenewalLaw::assemble(mass, self.alpha, self.c_k * factor, self.tail_coeff * factor);
        if law.full_mass() > 1.0 + 1e-12 {
            return Err(param("factor", factor, "scaled law would exceed total mass 1"));
        }
        Ok(law)
    }

    /// `Σ_n K(n) e^{-F n}` over all `n ≥ 1`, analytic tail included.
    pub fn laplace(&self, f: f64) -> f64 {
        let direct: f64 = self
            .mass
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, m)| m * exp(-f * n as f64))
            .sum();
        let tail = if self.tail_coeff > 0.0 {
            self.tail_coeff * damped_power_tail_sum(1.0 + self.alpha, f, self.n_max() + 1)
        } else {
            0.0
        };
        direct + tail
    }

    // Σ_n K(n)(1 − e^{−Fn}), computed without cancellation for small F.
    fn laplace_deficit(&self, f: f64) -> f64 {
        let direct: f64 = self
            .mass
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, m)| -m * libm::expm1(-f * n as f64))
            .sum();
        let tail = if self.tail_coeff > 0.0 {
            let s = 1.0 + self.alpha;
            let start = self.n_max() + 1;
            self.tail_coeff * (power_tail_sum(s, start) - damped_power_tail_sum(s, f, start))
        } else {
            0.0
        };
        direct + tail
    }

    /// Draws one gap, or `None` when the gap exceeds `room`.
    fn draw_gap<R: Rng + ?Sized>(&self, room: usize, rng: &mut R) -> Option<usize> {
        let n_max = self.n_max();
        let u: f64 = rng.random();
        if u < self.total {
            let gap = self.cdf.partition_point(|&c| c <= u).clamp(1, n_max);
            return (gap <= room).then_some(gap);
        }
        let in_tail = u - self.total < self.tail_mass();
        // A gap beyond n_max ends the path exactly when it cannot fit anyway.
        if !in_tail || room <= n_max {
            return None;
        }
        let v: f64 = rng.random::<f64>() * self.total;
        let gap = self.cdf.partition_point(|&c| c <= v).clamp(1, n_max);
        (gap <= room).then_some(gap)
    }
}

/// Renewal mass function `u(n) = P(n ∈ τ)` for `n = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenTable {
    u: Vec<f64>,
}

impl GreenTable {
    #[inline]
    pub fn u(&self, n: usize) -> f64 {
        self.u[n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.u
    }

    /// Largest index `N` in the table.
    pub fn horizon(&self) -> usize {
        self.u.len() - 1
    }

    /// `max_n |u(n) − Σ_m K(m)u(n−m) − 1_{n=0}|`.
    pub fn residual(&self, law: &RenewalLaw) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..self.u.len() {
            let mut conv = if n == 0 { 1.0 } else { 0.0 };
            for m in 1..=n {
                conv += law.mass(m) * self.u[n - m];
            }
            worst = worst.max((self.u[n] - conv).abs());
        }
        worst
    }

    /// `Σ_{1 ≤ n ≤ L} u(n)`.
    pub fn expected_points(&self, l: usize) -> f64 {
        self.u[1..=l].iter().sum()
    }
}

/// Green function up to `N`; switches to divide-and-conquer FFT convolution
/// above `N = 2·10⁴` when the `std` feature is on.
///
/// Finitely supported laws accept any `N`; laws with an analytic tail need
/// `N ≤ n_max`.
pub fn green_function(law: &RenewalLaw, n: usize) -> Result<GreenTable> {
    let padded;
    let mass = if n > law.n_max() {
        if law.tail_coeff > 0.0 {
            return Err(Error::HorizonExceeded {
                requested: n,
                available: law.n_max(),
            });
        }
        let mut m = law.masses().to_vec();
        m.resize(n + 1, 0.0);
        padded = m;
        &padded[..]
    } else {
        law.masses()
    };
    #[cfg(feature = "std")]
    if n > DIRECT_GREEN_LIMIT {
        return Ok(GreenTable {
            u: fft_green::solve(mass, n),
        });
    }
    Ok(GreenTable {
        u: green_direct(mass, n),
    })
}

/// Direct `O(N²)` solution of the renewal equation.
pub fn green_direct(mass: &[f64], n: usize) -> Vec<f64> {
    let mut u = vec![0.0; n + 1];
    u[0] = 1.0;
    for i in 1..=n {
        let mut acc = 0.0;
        for m in 1..=i {
            acc += mass[m] * u[i - m];
        }
        u[i] = acc;
    }
    u
}

#[cfg(feature = "std")]
pub use fft_green::solve as green_divide_and_conquer;

#[cfg(feature = "std")]
mod fft_green {
    use alloc::vec;
    use alloc::vec::Vec;
    use rustfft::num_complex::Complex;
    use rustfft::FftPlanner;

    const LEAF: usize = 512;

    /// Online convolution: `u[mid..r]` receives the contributions of the
    /// already solved `u[l..mid]` by one FFT product per recursion node.
    pub fn solve(mass: &[f64], n: usize) -> Vec<f64> {
        let mut u = vec![0.0; n + 1];
        let mut acc = vec![0.0; n + 1];
        acc[0] = 1.0;
        let mut planner = FftPlanner::new();
        recurse(mass, &mut u, &mut acc, 0, n + 1, &mut planner);
        u
    }

    fn recurse(mass: &[f64], u: &mut [f64], acc: &mut [f64], l: usize, r: usize, planner: &mut FftPlanner<f64>) {
        if r - l <= LEAF {
            for i in l..r {
                u[i] = acc[i];
                let ui = u[i];
                for j in i + 1..r {
                    acc[j] += mass[j - i] * ui;
                }
            }
            return;
        }
        let mid = l + (r - l) / 2;
        recurse(mass, u, acc, l, mid, planner);
        // acc[t] += Σ_{s∈[l,mid)} u[s]·K(t−s) for t ∈ [mid, r)
        let a_len = mid - l;
        let b_len = r - l;
        let size = (a_len + b_len).next_power_of_two();
        let mut a: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); size];
        let mut b: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); size];
        for (k, x) in a.iter_mut().take(a_len).enumerate() {
            x.re = u[l + k];
        }
        for (d, x) in b.iter_mut().take(b_len).enumerate().skip(1) {
            x.re = mass[d];
        }
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        fwd.process(&mut a);
        fwd.process(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y;
        }
        inv.process(&mut a);
        let scale = 1.0 / size as f64;
        for t in mid..r {
            acc[t] += a[t - l].re * scale;
        }
        recurse(mass, u, acc, mid, r, planner);
    }
}

/// `τ ∩ [0, N]`, starting at 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenewalPath {
    pub points: Vec<usize>,
    pub horizon: usize,
}

impl RenewalPath {
    /// Points in `[1, L]`.
    pub fn contacts_up_to(&self, l: usize) -> &[usize] {
        let end = self.points.partition_point(|&p| p <= l);
        &self.points[1.min(end)..end]
    }
}

/// Samples `τ ∩ [0, N]` by inverse-CDF gap draws.
///
/// A gap beyond `n_max` ends the path when fewer than `n_max + 1` sites
/// remain (it would overshoot `N` anyway); otherwise it is redrawn from the
/// stored range, which is the documented truncation.
pub fn sample_path<R: Rng + ?Sized>(law: &RenewalLaw, n: usize, rng: &mut R) -> RenewalPath {
    let mut points = vec![0];
    let mut last = 0;
    while last < n {
        match law.draw_gap(n - last, rng) {
            Some(gap) => {
                last += gap;
                points.push(last);
            }
            None => break,
        }
    }
    RenewalPath { points, horizon: n }
}

/// Free energy of the homogeneous model: the root `F > 0` of
/// `Σ K(n)e^{-Fn} = e^{-h}`, and 0 for `h ≤ 0`.
pub fn homogeneous_free_energy(law: &RenewalLaw, h: f64) -> Result<f64> {
    if !law.is_recurrent() {
        return Err(Error::NotRecurrent(law.full_mass()));
    }
    if h <= 0.0 {
        return Ok(0.0);
    }
    let target = -libm::expm1(-h);
    // Σ K e^{-Fn} ≤ e^{-F}, so the root lies in (0, h].
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if law.laplace_deficit(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-10 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Normalizes a defective law, returning it with `log Σ K`.
pub fn terminating_shift(law: &RenewalLaw) -> Result<(RenewalLaw, f64)> {
    let full = law.full_mass();
    if (full - 1.0).abs() < 1e-12 {
        return Ok((law.clone(), 0.0));
    }
    Ok((law.scaled(1.0 / full)?, ln(full)))
}

/// `Z(0..=N)` for the homogeneous pinned recursion `Z(n) = e^{h} Σ_m Z(m)K(n−m)`.
pub fn homogeneous_decay_profile(law_hat: &RenewalLaw, h_hat: f64, n: usize) -> Result<Vec<f64>> {
    if n > law_hat.n_max() {
        return Err(Error::HorizonExceeded {
            requested: n,
            available: law_hat.n_max(),
        });
    }
    let weight = exp(h_hat);
    let mass = law_hat.masses();
    let mut z = vec![0.0; n + 1];
    z[0] = 1.0;
    for i in 1..=n {
        let mut acc = 0.0;
        for m in 1..=i {
            acc += mass[m] * z[i - m];
        }
        z[i] = weight * acc;
    }
    Ok(z)
}

/// `Z(N)` of [`homogeneous_decay_profile`].
pub fn homogeneous_decay(law_hat: &RenewalLaw, h_hat: f64, n: usize) -> Result<f64> {
    Ok(homogeneous_decay_profile(law_hat, h_hat, n)?[n])
}

/// Laws of the last renewal epoch `X_N ≤ N`, without and with the
/// conditioning `2N ∈ τ`. Entry `n` is `P(X_N = n)`.
pub fn last_renewal_laws(law: &RenewalLaw, green: &GreenTable, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if 2 * n > green.horizon() {
        return Err(Error::HorizonExceeded {
            requested: 2 * n,
            available: green.horizon(),
        });
    }
    let u2n = green.u(2 * n);
    let mut free = Vec::with_capacity(n + 1);
    let mut cond = Vec::with_capacity(n + 1);
    for x in 0..=n {
        free.push(green.u(x) * law.survival(n - x));
        let mut s = 0.0;
        for t in n + 1..=2 * n {
            s += law.mass_extended(t - x) * green.u(2 * n - t);
        }
        cond.push(green.u(x) * s / u2n);
    }
    Ok((free, cond))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditioningScan {
    /// Running maximum of the ratio after each `N = 1..=N_max` (index `N−1`).
    pub running_max: Vec<f64>,
    pub max_ratio: f64,
}

/// `max_{N ≤ N_max, n ≤ N} P(X_N = n | 2N ∈ τ)/P(X_N = n)` in `O(N_max²)`.
pub fn conditioning_ratio(law: &RenewalLaw, n_max_scan: usize) -> Result<ConditioningScan> {
    if n_max_scan == 0 {
        return Err(Error::InvalidHorizon(0));
    }
    let top = 2 * n_max_scan;
    let green = green_function(law, top)?;
    // c[t] = Σ_{r<N} u(r)K(t−r), updated as N grows.
    let mut c = vec![0.0; top + 1];
    let mut running = 0.0f64;
    let mut running_max = Vec::with_capacity(n_max_scan);
    for big_n in 1..=n_max_scan {
        let r = big_n - 1;
        let ur = green.u(r);
        for (t, ct) in c.iter_mut().enumerate().skip(r + 1) {
            *ct += ur * law.mass(t - r);
        }
        let u2n = green.u(2 * big_n);
        for x in 0..=big_n {
            let ratio = c[2 * big_n - x] / (u2n * law.survival(big_n - x));
            running = running.max(ratio);
        }
        running_max.push(running);
    }
    Ok(ConditioningScan {
        running_max,
        max_ratio: running,
    })
}

/// `max_{1≤n≤N} u(n)√n`, the empirical Green-bound constant.
pub fn green_bound_constant(green: &GreenTable) -> f64 {
    (1..=green.horizon())
        .map(|n| green.u(n) * sqrt(n as f64))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSeed;

    #[test]
    fn power_law_constant() {
        let law = make_power_law(0.5, 1000).unwrap();
        // oracle: direct partial sum plus tail integral and midpoint correction
        let m = 1_000_000usize;
        let partial: f64 = (1..m).map(|n| (n as f64).powf(-1.5)).sum();
        let zeta = partial + 2.0 / (m as f64).sqrt() + 0.5 * (m as f64).powf(-1.5);
        assert!((law.c_k() - 1.0 / zeta).abs() < 1e-9);
        assert!(law.c_k() > 0.38 && law.c_k() < 0.39);
        assert_eq!(law.mass(1), law.c_k());
        assert!(law.is_recurrent());
        assert!(law.tail_drift() < 1e-12);
        assert!(matches!(make_power_law(0.0, 10), Err(Error::InvalidExponent(_))));
        assert!(matches!(make_power_law(0.5, 1), Err(Error::InvalidHorizon(1))));
    }

    #[test]
    fn two_point_green() {
        let law = RenewalLaw::from_masses(&[0.6, 0.4], 0.5, 1.0).unwrap();
        let g = green_function(&law, 2).unwrap();
        assert_eq!(g.u(0), 1.0);
        assert!((g.u(1) - 0.6).abs() < 1e-15);
        assert!((g.u(2) - 0.76).abs() < 1e-15);
        // finite support: u(3) = 0.6·0.76 + 0.4·0.6
        assert!((green_function(&law, 3).unwrap().u(3) - 0.696).abs() < 1e-15);
        assert!(matches!(
            green_function(&make_power_law(0.5, 10).unwrap(), 11),
            Err(Error::HorizonExceeded { .. })
        ));
    }

    #[test]
    fn fft_route_matches_direct() {
        let law = make_power_law(0.5, 5000).unwrap();
        let direct = green_direct(law.masses(), 5000);
        let fast = fft_green::solve(law.masses(), 5000);
        for (a, b) in direct.iter().zip(&fast) {
            assert!((a - b).abs() <= 1e-10 * a.abs());
        }
    }

    #[test]
    fn free_energy_sign_and_root() {
        let law = make_power_law(0.5, 20_000).unwrap();
        assert_eq!(homogeneous_free_energy(&law, 0.0).unwrap(), 0.0);
        assert_eq!(homogeneous_free_energy(&law, -0.3).unwrap(), 0.0);
        let f = homogeneous_free_energy(&law, 0.05).unwrap();
        assert!(f > 0.0);
        assert!((law.laplace(f) - (-0.05f64).exp()).abs() < 1e-9);
        let half = law.scaled(0.5).unwrap();
        assert!(matches!(
            homogeneous_free_energy(&half, 0.1),
            Err(Error::NotRecurrent(_))
        ));
    }

    #[test]
    fn shift_of_halved_law() {
        let law = make_power_law(0.5, 500).unwrap();
        let (same, d0) = terminating_shift(&law).unwrap();
        assert_eq!(d0, 0.0);
        assert_eq!(same, law);
        let (back, d) = terminating_shift(&law.scaled(0.5).unwrap()).unwrap();
        assert!((d - 0.5f64.ln()).abs() < 1e-12);
        assert!((-d - core::f64::consts::LN_2).abs() < 1e-12);
        assert!((back.mass(7) - law.mass(7)).abs() < 1e-15);
    }

    #[test]
    fn decay_single_term_and_green_collapse() {
        let law = make_power_law(0.2, 200).unwrap();
        assert!((homogeneous_decay(&law, -0.4, 1).unwrap() - (-0.4f64).exp() * law.mass(1)).abs() < 1e-15);
        let g = green_function(&law, 150).unwrap();
        assert!((homogeneous_decay(&law, 0.0, 150).unwrap() - g.u(150)).abs() < 1e-14);
    }

    #[test]
    fn paths_are_deterministic_and_well_formed() {
        let law = make_power_law(0.5, 300).unwrap();
        let seed = StreamSeed::new(11);
        let a = sample_path(&law, 1000, &mut seed.rng(0));
        let b = sample_path(&law, 1000, &mut seed.rng(0));
        assert_eq!(a, b);
        assert_eq!(a.points[0], 0);
        for w in a.points.windows(2) {
            assert!(w[1] > w[0] && w[1] - w[0] <= 300);
        }
        assert!(*a.points.last().unwrap() <= 1000);
    }

    #[test]
    fn conditioning_marginals_sum_to_one() {
        let law = make_power_law(0.5, 400).unwrap();
        let g = green_function(&law, 400).unwrap();
        for n in [1, 5, 50, 200] {
            let (free, cond) = last_renewal_laws(&law, &g, n).unwrap();
            assert!((free.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!((cond.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn conditioning_scan_matches_pointwise_laws() {
        let law = make_power_law(0.5, 200).unwrap();
        let g = green_function(&law, 200).unwrap();
        let scan = conditioning_ratio(&law, 60).unwrap();
        let mut brute = 0.0f64;
        for n in 1..=60 {
            let (free, cond) = last_renewal_laws(&law, &g, n).unwrap();
            for x in 0..=n {
                brute = brute.max(cond[x] / free[x]);
            }
            assert!((scan.running_max[n - 1] - brute).abs() < 1e-10 * brute);
        }
        assert!(scan.max_ratio >= 1.0);
    }
}
