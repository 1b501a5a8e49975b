use pinning_core::estimate::PoolEstimate;
use pinning_core::quenched::{
    chung_erdos_check, decomposition_check as decompose, lemma51_conditions, quenched_free_energy, sample_w,
    Lemma51Options, QuenchedConfig,
};
use pinning_core::renewal::{conditioning_ratio, green_bound_constant, green_function};
use pinning_core::special::half_normal_cdf;
use pinning_core::stats::{ks_distance, ks_p_value};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use super::{log_grid, Ctx, Outcome};
use crate::error::Result;
use crate::record::Table;

pub(super) fn renewal_green(ctx: &Ctx) -> Result<Outcome> {
    let n = ctx.cfg.size.unwrap_or(10_000);
    let law = ctx.law(n)?;
    let green = green_function(&law, n)?;
    let alpha = law.alpha();
    // u(n) ~ α sin(πα)/(π C_K) n^{α−1}
    let amp = alpha * (PI * alpha).sin() / (PI * law.c_k());
    let mut points: Vec<usize> = log_grid(1.0, n as f64, 41).iter().map(|x| x.round() as usize).collect();
    points.dedup();
    let mut table = Table::new("green", &["n", "u", "asymptotic", "ratio"]);
    for &m in &points {
        let asym = amp * (m as f64).powf(alpha - 1.0);
        table.push(vec![
            m.into(),
            green.u(m).into(),
            asym.into(),
            (green.u(m) / asym).into(),
        ]);
    }
    let ratio = green.u(n) / (amp * (n as f64).powf(alpha - 1.0));
    let residual = green.residual(&law);
    let mut out = Outcome::default();
    out.exact("u_ratio_at_N", ratio).baseline = Some(1.0);
    out.exact("renewal_equation_residual", residual);
    out.constant("c9", green_bound_constant(&green));
    out.flag("ratio_within_5pct", (ratio - 1.0).abs() <= 0.05);
    out.flag("residual_below_1e-10", residual < 1e-10);
    out.tables.push(table);
    Ok(out)
}

pub(super) fn quenched_scan(ctx: &Ctx) -> Result<Outcome> {
    let n = ctx.cfg.size.unwrap_or(1000);
    let samples = ctx.cfg.samples.unwrap_or(100);
    let law = ctx.law(1 << 15)?;
    let grid = ctx.beta_h_grid(1.0, &[-0.5, 0.0, 0.1, 0.3, 0.6]);
    let ests = ctx.map(grid.len(), |i| {
        let (beta, h) = grid[i];
        let cfg = QuenchedConfig::new(&law, beta, h, n)?;
        Ok(quenched_free_energy(&cfg, samples, &ctx.seed.derive(i as u64))?)
    })?;
    let mut table = Table::new(
        "grid",
        &["beta", "h", "free_energy", "std_error", "annealed", "jensen_ok"],
    );
    let mut out = Outcome::default();
    let mut all = true;
    for (&(beta, h), e) in grid.iter().zip(&ests) {
        let ok = e.estimate.lower(3.0) <= e.annealed;
        all &= ok;
        table.push(vec![
            beta.into(),
            h.into(),
            e.estimate.mean.into(),
            e.estimate.std_error.into(),
            e.annealed.into(),
            ok.into(),
        ]);
        out.estimate(&format!("free_energy[beta={beta},h={h}]"), &e.estimate)
            .baseline = Some(e.annealed);
    }
    out.flag("quenched_below_annealed", all);
    out.tables.push(table);
    Ok(out)
}

/// `Z = Σ_J Ẑ_J` on random instances. Unset `k`, `N`, `beta`, `h` are drawn
/// per instance (`k ≤ 5`, `N/k ≤ 6`, `β ∈ [0,2)`, `h ∈ [−1,1)`).
pub(super) fn decomposition_check(ctx: &Ctx) -> Result<Outcome> {
    let instances = ctx.cfg.samples.unwrap_or(100);
    let law = ctx.law(64)?;
    let rows = ctx.map(instances, |i| {
        let mut rng = ctx.seed.rng(i as u64);
        let k = ctx.cfg.k.unwrap_or_else(|| rng.random_range(1..=5));
        let n = ctx.cfg.size.unwrap_or_else(|| k * rng.random_range(1..=6));
        let beta = ctx.cfg.beta.unwrap_or_else(|| rng.random_range(0.0..2.0));
        let h = ctx.cfg.h.unwrap_or_else(|| rng.random_range(-1.0..1.0));
        let omega: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let check = decompose(&QuenchedConfig::new(&law, beta, h, n)?, &omega, k)?;
        Ok((n, k, beta, h, check))
    })?;
    let mut table = Table::new(
        "instances",
        &[
            "instance",
            "N",
            "k",
            "beta",
            "h",
            "terms",
            "partition",
            "sum_of_terms",
            "relative_residual",
        ],
    );
    let mut worst = 0.0f64;
    for (i, (n, k, beta, h, c)) in rows.into_iter().enumerate() {
        worst = worst.max(c.relative_residual);
        table.push(vec![
            i.into(),
            n.into(),
            k.into(),
            beta.into(),
            h.into(),
            c.terms.len().into(),
            c.partition.into(),
            c.sum_of_terms.into(),
            c.relative_residual.into(),
        ]);
    }
    let mut out = Outcome::default();
    out.exact("max_relative_residual", worst);
    out.flag("identity_holds", worst <= 1e-10);
    out.tables.push(table);
    Ok(out)
}

pub(super) fn lemma51_scan(ctx: &Ctx) -> Result<Outcome> {
    let beta = ctx.cfg.beta.unwrap_or(1.0);
    let mut hs = ctx.cfg.h_grid.clone().unwrap_or_else(|| vec![0.1, 0.01, 0.001]);
    hs.sort_by(|a, b| b.total_cmp(a));
    let law = ctx.law(1 << 15)?;
    let opts = Lemma51Options::new(
        ctx.cfg.gamma.unwrap_or(0.9),
        ctx.cfg.samples.unwrap_or(1000),
        ctx.cfg.seed.unwrap_or_default(),
    );
    let reports = ctx.map(hs.len(), |i| Ok(lemma51_conditions(beta, hs[i], &law, &opts)?))?;
    let mut table = Table::new(
        "lemma51",
        &[
            "h",
            "k",
            "eta_min",
            "lhs1",
            "lhs1_std_error",
            "lhs2",
            "lhs2_std_error",
            "c8",
            "c2_hat",
            "h_hat",
            "h_hat_negative",
        ],
    );
    for r in &reports {
        table.push(vec![
            r.h.into(),
            r.k.into(),
            r.eta_min.into(),
            r.lhs1.mean.into(),
            r.lhs1.std_error.into(),
            r.lhs2.mean.into(),
            r.lhs2.std_error.into(),
            r.c8.into(),
            r.c2_hat.into(),
            r.h_hat.into(),
            r.h_hat_negative.into(),
        ]);
    }
    let mut out = Outcome::default();
    let last = reports.last().expect("nonempty h grid");
    let decreasing = reports.windows(2).all(|w| w[1].eta_min < w[0].eta_min);
    for r in &reports {
        out.estimate(&format!("lhs1[h={}]", r.h), &r.lhs1);
        out.estimate(&format!("lhs2[h={}]", r.h), &r.lhs2);
    }
    let cond = conditioning_ratio(&law, opts.conditioning_horizon)?;
    out.constant("c", cond.max_ratio);
    out.constant("c8", last.c8);
    out.constant("C2_hat", last.c2_hat);
    let horizon = law.n_max().min(10_000);
    out.constant("c9", green_bound_constant(&green_function(&law, horizon)?));
    out.flag("eta_min_decreasing", decreasing);
    out.flag("h_hat_negative_at_smallest_h", last.h_hat_negative);
    out.details = serde_json::to_value(&reports)?;
    out.tables.push(table);
    Ok(out)
}

pub(super) fn clt_check(ctx: &Ctx) -> Result<Outcome> {
    let ls = ctx.cfg.l_grid.clone().unwrap_or_else(|| vec![1000, 10_000]);
    let base = ctx.law(*ls.iter().max().unwrap_or(&2))?;
    let checks = ctx.map(ls.len(), |i| Ok(chung_erdos_check(&base, ls[i])?))?;
    let mut table = Table::new(
        "chung-erdos",
        &["L", "mean", "variance", "mean_ratio", "variance_ratio", "limit"],
    );
    for c in &checks {
        table.push(vec![
            c.l.into(),
            c.mean.into(),
            c.variance.into(),
            c.mean_ratio.into(),
            c.variance_ratio.into(),
            c.limit.into(),
        ]);
    }
    let mut out = Outcome::default();
    let top = checks.last().expect("nonempty L grid");
    out.exact("mean_ratio", top.mean_ratio).baseline = Some(top.limit);
    let spread = checks.iter().map(|c| c.variance_ratio).fold(0.0, f64::max)
        / checks.iter().map(|c| c.variance_ratio).fold(f64::INFINITY, f64::min);
    out.exact("variance_ratio_spread", spread);
    out.flag("mean_within_5pct", (top.mean_ratio / top.limit - 1.0).abs() <= 0.05);
    out.flag("variance_bounded", spread < 2.0);
    out.tables.push(table);

    let samples = ctx.cfg.samples.unwrap_or(10_000);
    if samples > 0 {
        let l = ctx.cfg.l.unwrap_or(100_000);
        let law = ctx.law(l.max(1 << 17))?;
        let w = sample_w(&law, l, samples, &ctx.seed);
        let c = (2.0 * PI).powf(-1.5) / (law.c_k() * law.c_k());
        let ks = ks_distance(&w, |x| half_normal_cdf(x, c));
        let mut sorted = w.clone();
        sorted.sort_by(f64::total_cmp);
        let mut q = Table::new("w-quantiles", &["p", "empirical", "half_normal"]);
        for i in 1..20 {
            let p = i as f64 / 20.0;
            let emp = sorted[((p * samples as f64) as usize).min(samples - 1)];
            // half-normal quantile by bisection on the CDF
            let (mut lo, mut hi) = (0.0, 20.0 * c);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if half_normal_cdf(mid, c) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            q.push(vec![p.into(), emp.into(), (0.5 * (lo + hi)).into()]);
        }
        let mean = PoolEstimate::from_samples(&w, l, "w-statistic");
        out.estimate("w_mean", &mean).baseline = Some(c * (2.0 / PI).sqrt());
        out.details = serde_json::json!({
            "w_ks_distance": ks,
            "w_ks_p_value": ks_p_value(ks, samples),
            "w_scale": c,
        });
        out.flag("w_ks_below_0.1", ks < 0.1);
        out.tables.push(q);
    }
    Ok(out)
}
