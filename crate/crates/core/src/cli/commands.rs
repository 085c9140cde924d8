//! The four subcommands. Each returns a table plus human-readable summary lines.

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::RunConfig;
use super::output::{fmt_num, fmt_opt, Table};
use crate::bell_analysis::{
    ch_with_efficiency, efficiency_violation_possible, mc_ch_evaluate, AnalyticRates, ChResult, FockRates,
    EBERHARD_NONMAXIMAL_THRESHOLD, MC_VIOLATION_SIGMAS, SYMMETRIC_EFFICIENCY_THRESHOLD,
};
use crate::detection_rates::{
    analytic_coincidence, analytic_single, apply_efficiency, batch_coincidence, check_d, clamped_mc_single,
    clamped_single_exact, mc_coincidence, mc_single, mc_single_b, stochastic_rule_coincidence_exact, ww_rule_single,
    Convention,
};
use crate::error::Result;
use crate::fock_oracle::{self, TruncatedSpace};
use crate::gaussian_modes::{sample_vacuum, Mode, VacuumEnsemble, RNG_ID};
use crate::polarization_fields::{AnalyzerAngles, FieldOperatorSums};
use crate::spdc_evolution::{integrate_rotating_frame, integrated_coefficients, observed_order, ModeFrequencies, TransferCoefficients};
use crate::stats::RateEstimate;
use crate::ww_algebra::{operator_sum_vacuum_expectation, ordering_table, weyl_symbol, vacuum_expectation, OperatorWord};
use crate::VERSION;

/// Longest operator word compared between the phase-space and number-basis expectations.
pub const ORACLE_WORD_LEN: usize = 6;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub summary: Vec<String>,
    /// Set by `oracle` when any check fails.
    pub failed: bool,
}

fn warnings(cfg: &RunConfig) -> Result<String> {
    let mut w = Vec::new();
    if check_d(cfg.d())? {
        w.push("large_d");
    }
    Ok(w.join(";"))
}

fn angle_out(cfg: &RunConfig, x: f64) -> String {
    fmt_num(if cfg.degrees { x.to_degrees() } else { x })
}

fn ensemble(cfg: &RunConfig) -> Result<VacuumEnsemble> {
    sample_vacuum(&cfg.sampler())
}

pub fn rates(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.d();
    let warn = warnings(cfg)?;
    let conv = cfg.convention;
    let eff = cfg.efficiencies();
    let ens = ensemble(cfg)?;
    let mut table = Table::new(vec![
        "theta", "phi", "d_re", "d_im", "convention", "p_a", "p_a_err", "p_b", "p_b_err", "p_ab", "p_ab_err",
        "p_ab_analytic", "n_samples", "n_batches", "seed", "rng_id", "version", "p_a_analytic", "p_b_analytic",
        "eta_a", "eta_b", "p_a_clamped", "p_a_clamped_err", "p_a_clamped_exact", "warning",
    ]);
    let single = analytic_single(d, conv)?;
    let mut summary = Vec::new();
    for &theta in &cfg.theta {
        for &phi in &cfg.phi {
            let angles = AnalyzerAngles::new(theta, phi);
            let pa = mc_single(&ens, d, theta, conv)?.scaled(eff.eta_a());
            let pb = mc_single_b(&ens, d, phi, conv)?.scaled(eff.eta_b());
            let pab = mc_coincidence(&ens, d, angles, conv)?.scaled(eff.eta_a() * eff.eta_b());
            let (pa_exact, pb_exact, pab_exact) =
                apply_efficiency((single, single), analytic_coincidence(d, angles, conv)?, eff);
            let clamp = match cfg.clamp_floor {
                Some(f) => {
                    let k = conv.factor() * eff.eta_a();
                    let est = clamped_mc_single(&ens, d, theta, f)?.scaled(k);
                    (fmt_num(est.mean), fmt_num(est.std_error), clamped_single_exact(d, theta, f).map(|x| fmt_num(k * x)).unwrap_or_default())
                }
                None => Default::default(),
            };
            summary.push(format!(
                "theta={} phi={}: P_AB = {} +- {} (closed form {})",
                angle_out(cfg, theta),
                angle_out(cfg, phi),
                fmt_num(pab.mean),
                fmt_num(pab.std_error),
                fmt_num(pab_exact)
            ));
            table.push(vec![
                angle_out(cfg, theta),
                angle_out(cfg, phi),
                fmt_num(d.re),
                fmt_num(d.im),
                conv.tag().into(),
                fmt_num(pa.mean),
                fmt_num(pa.std_error),
                fmt_num(pb.mean),
                fmt_num(pb.std_error),
                fmt_num(pab.mean),
                fmt_num(pab.std_error),
                fmt_num(pab_exact),
                ens.n_samples().to_string(),
                ens.n_batches().to_string(),
                cfg.seed.to_string(),
                RNG_ID.into(),
                VERSION.into(),
                fmt_num(pa_exact),
                fmt_num(pb_exact),
                fmt_num(eff.eta_a()),
                fmt_num(eff.eta_b()),
                clamp.0,
                clamp.1,
                clamp.2,
                warn.clone(),
            ]);
        }
    }
    Ok(Outcome { table, summary, failed: false })
}

/// Scan offsets `k pi / (n - 1)`, `k = 0..n`.
pub fn scan_offsets(n_points: usize) -> Vec<f64> {
    (0..n_points).map(|k| k as f64 * std::f64::consts::PI / (n_points - 1) as f64).collect()
}

/// Least-squares amplitude of `r = c cos^2(delta)`.
pub fn fit_cos2(deltas: &[f64], rates: &[f64]) -> f64 {
    let (num, den) = deltas.iter().zip(rates).fold((0.0, 0.0), |(n, d), (&x, &r)| {
        let c2 = x.cos().powi(2);
        (n + r * c2, d + c2 * c2)
    });
    num / den
}

pub fn scan(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.d();
    let warn = warnings(cfg)?;
    let conv = cfg.convention;
    let eff = cfg.efficiencies();
    let scale = eff.eta_a() * eff.eta_b();
    let ens = ensemble(cfg)?;
    let theta = cfg.theta[0];
    let deltas = scan_offsets(cfg.n_points);
    let points: Vec<AnalyzerAngles> = deltas.iter().map(|&x| AnalyzerAngles::new(theta, theta - x)).collect();

    let per_batch: Vec<Vec<f64>> = ens
        .batches()
        .par_iter()
        .map(|b| points.iter().map(|&a| scale * batch_coincidence(b, d, a, conv)).collect())
        .collect();
    let n = ens.n_samples();
    let point_est: Vec<RateEstimate> = (0..points.len())
        .map(|k| RateEstimate::from_batch_values(&per_batch.iter().map(|v| v[k]).collect::<Vec<_>>(), n))
        .collect();
    let fits: Vec<f64> = per_batch.iter().map(|v| fit_cos2(&deltas, v)).collect();
    let fit = RateEstimate::from_batch_values(&fits, n);
    let means: Vec<f64> = point_est.iter().map(|e| e.mean).collect();
    let fit_c = fit_cos2(&deltas, &means);
    let chi2: f64 = deltas
        .iter()
        .zip(&point_est)
        .filter(|(_, e)| e.std_error > 0.0)
        .map(|(&x, e)| ((e.mean - fit_c * x.cos().powi(2)) / e.std_error).powi(2))
        .sum();
    let expected = scale * analytic_coincidence(d, AnalyzerAngles::new(0.0, 0.0), conv)?;

    let mut table = Table::new(vec![
        "delta", "theta", "phi", "d_re", "d_im", "convention", "p_ab", "p_ab_err", "p_ab_analytic", "fit_c",
        "fit_c_err", "fit_c_expected", "chi2", "n_points", "n_samples", "n_batches", "seed", "rng_id", "version",
        "warning",
    ]);
    for ((&delta, a), est) in deltas.iter().zip(&points).zip(&point_est) {
        table.push(vec![
            angle_out(cfg, delta),
            angle_out(cfg, a.theta()),
            angle_out(cfg, a.phi()),
            fmt_num(d.re),
            fmt_num(d.im),
            conv.tag().into(),
            fmt_num(est.mean),
            fmt_num(est.std_error),
            fmt_num(scale * analytic_coincidence(d, *a, conv)?),
            fmt_num(fit_c),
            fmt_num(fit.std_error),
            fmt_num(expected),
            fmt_num(chi2),
            cfg.n_points.to_string(),
            n.to_string(),
            ens.n_batches().to_string(),
            cfg.seed.to_string(),
            RNG_ID.into(),
            VERSION.into(),
            warn.clone(),
        ]);
    }
    let summary = vec![format!(
        "fit P_AB = c cos^2(delta): c = {} +- {} (expected {}), chi2 = {} over {} points",
        fmt_num(fit_c),
        fmt_num(fit.std_error),
        fmt_num(expected),
        fmt_num(chi2),
        cfg.n_points
    )];
    Ok(Outcome { table, summary, failed: false })
}

pub fn bell(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.d();
    let warn = warnings(cfg)?;
    let conv = cfg.convention;
    let eff = cfg.efficiencies();
    let setting = cfg.ch_setting();
    let possible = efficiency_violation_possible(eff);

    let analytic = ch_with_efficiency(&AnalyticRates { d, convention: conv }, &setting, eff)?;
    let ens = ensemble(cfg)?;
    let mc = mc_ch_evaluate(&ens, d, &setting, conv, eff)?;
    let space = TruncatedSpace::new(cfg.cutoff)?;
    let fock = ch_with_efficiency(&FockRates { space, d }, &setting, eff)?;

    let mut table = Table::new(vec![
        "source", "theta1", "theta2", "phi1", "phi2", "d_re", "d_im", "convention", "eta_a", "eta_b", "lhs",
        "lhs_err", "rhs", "rhs_err", "margin", "margin_err", "ratio", "violated", "efficiency_violation_possible",
        "eta_threshold", "n_samples", "n_batches", "seed", "rng_id", "version", "warning",
    ]);
    let mut row = |source: &str, tag: &str, r: &ChResult| {
        let e = r.errors;
        table.push(vec![
            source.into(),
            angle_out(cfg, setting.theta1),
            angle_out(cfg, setting.theta2),
            angle_out(cfg, setting.phi1),
            angle_out(cfg, setting.phi2),
            fmt_num(d.re),
            fmt_num(d.im),
            tag.into(),
            fmt_num(eff.eta_a()),
            fmt_num(eff.eta_b()),
            fmt_num(r.lhs),
            fmt_opt(e.map(|e| e.lhs)),
            fmt_num(r.rhs),
            fmt_opt(e.map(|e| e.rhs)),
            fmt_num(r.margin),
            fmt_opt(e.map(|e| e.margin)),
            fmt_opt(r.ratio()),
            r.violated.to_string(),
            possible.to_string(),
            fmt_num(SYMMETRIC_EFFICIENCY_THRESHOLD),
            e.map(|e| e.n_samples.to_string()).unwrap_or_default(),
            e.map(|e| e.n_batches.to_string()).unwrap_or_default(),
            if e.is_some() { cfg.seed.to_string() } else { String::new() },
            if e.is_some() { RNG_ID.into() } else { String::new() },
            VERSION.into(),
            warn.clone(),
        ]);
    };
    row("analytic", conv.tag(), &analytic);
    row("mc", conv.tag(), &mc);
    row("fock", Convention::HilbertNormalized.tag(), &fock);

    let verdict = |v: bool| if v { "violated" } else { "not violated" };
    let mc_se = mc.errors.map(|e| e.margin).unwrap_or(0.0);
    let summary = vec![
        format!(
            "analytic: lhs {} rhs {} margin {} rhs/lhs {} -> {}",
            fmt_num(analytic.lhs),
            fmt_num(analytic.rhs),
            fmt_num(analytic.margin),
            fmt_opt(analytic.ratio()),
            verdict(analytic.violated)
        ),
        format!(
            "mc: margin {} +- {} ({} se band [{}, {}]) -> {}",
            fmt_num(mc.margin),
            fmt_num(mc_se),
            MC_VIOLATION_SIGMAS,
            fmt_num(mc.margin - MC_VIOLATION_SIGMAS * mc_se),
            fmt_num(mc.margin + MC_VIOLATION_SIGMAS * mc_se),
            verdict(mc.violated)
        ),
        format!(
            "fock (cutoff {}): margin {} rhs/lhs {} -> {}",
            cfg.cutoff,
            fmt_num(fock.margin),
            fmt_opt(fock.ratio()),
            verdict(fock.violated)
        ),
        format!(
            "efficiencies eta_a {} eta_b {}: violation {} (symmetric threshold {}, non-maximal-state bound {})",
            fmt_num(eff.eta_a()),
            fmt_num(eff.eta_b()),
            if possible { "possible" } else { "impossible" },
            fmt_num(SYMMETRIC_EFFICIENCY_THRESHOLD),
            fmt_num(EBERHARD_NONMAXIMAL_THRESHOLD)
        ),
    ];
    Ok(Outcome { table, summary, failed: false })
}

struct Check {
    name: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

fn below(name: impl Into<String>, value: f64, threshold: f64) -> Check {
    Check { name: name.into(), value, threshold, pass: value <= threshold }
}

fn max_abs<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

pub fn oracle(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.d();
    let warn = warnings(cfg)?;
    let space = TruncatedSpace::new(cfg.cutoff)?;
    let bigger = TruncatedSpace::new(cfg.cutoff + 1)?;
    let hilbert = Convention::HilbertNormalized;
    let pairs: Vec<AnalyzerAngles> =
        cfg.theta.iter().flat_map(|&t| cfg.phi.iter().map(move |&p| AnalyzerAngles::new(t, p))).collect();
    let mut checks = Vec::new();

    let table_dev = max_abs(
        [Mode::Signal, Mode::Idler]
            .into_iter()
            .flat_map(ordering_table)
            .map(|(_, word, expected)| weyl_symbol(&word).max_deviation(&expected)),
    );
    checks.push(below("ordering_table", table_dev, 1e-12));

    let words: Vec<OperatorWord> = (1..=ORACLE_WORD_LEN).flat_map(OperatorWord::enumerate).collect();
    let word_devs: Vec<f64> = words
        .par_iter()
        .map(|w| Ok((vacuum_expectation(&weyl_symbol(w)) - space.expectation_on_vacuum(w)?).norm()))
        .collect::<Result<_>>()?;
    checks.push(below(format!("word_expectations_len_le_{ORACLE_WORD_LEN}"), max_abs(word_devs), 1e-10));

    let single = analytic_single(d, hilbert)?;
    let single_dev = max_abs(cfg.theta.iter().flat_map(|&t| {
        [fock_oracle::single_rate(&space, d, t), fock_oracle::single_rate_b(&space, d, t)].map(|r| (r - single).abs())
    }));
    checks.push(below("fock_single_vs_closed_form", single_dev, 1e-12));

    let ww_single_dev = max_abs(
        cfg.theta
            .iter()
            .map(|&t| ww_rule_single(d, t).map(|r| (r - single).abs()))
            .collect::<Result<Vec<_>>>()?,
    );
    checks.push(below("ww_single_vs_closed_form", ww_single_dev, 1e-12));

    let quartic = 2.0 * d.norm_sqr().powi(2) * (1.0 + 1e-12) + 1e-15;
    let mut fock_dev = 0.0f64;
    let mut ww_dev = 0.0f64;
    let mut stability = 0.0f64;
    let mut stochastic_dev = 0.0f64;
    for &a in &pairs {
        let fock = fock_oracle::coincidence_rate(&space, d, a);
        fock_dev = fock_dev.max((fock - analytic_coincidence(d, a, hilbert)?).abs());
        stability = stability.max((fock - fock_oracle::coincidence_rate(&bigger, d, a)).abs());
        let f = FieldOperatorSums::new(d, a);
        let (ea, eb) = (f.e_a(), f.e_b());
        let ab = &(&(&ea.adjoint() * &eb.adjoint()) * &eb) * &ea;
        let ba = &(&(&eb.adjoint() * &ea.adjoint()) * &ea) * &eb;
        let ww = 0.5 * (operator_sum_vacuum_expectation(&ab) + operator_sum_vacuum_expectation(&ba)).re;
        ww_dev = ww_dev.max((ww - fock).abs());
        let stoch = stochastic_rule_coincidence_exact(d, a)?;
        stochastic_dev = stochastic_dev.max((stoch - analytic_coincidence(d, a, Convention::StochasticModel)?).abs());
    }
    checks.push(below("fock_coincidence_vs_closed_form", fock_dev, quartic));
    checks.push(below("fock_coincidence_vs_phase_space", ww_dev, 1e-10));
    checks.push(below(format!("cutoff_stability_{}_{}", cfg.cutoff, cfg.cutoff + 1), stability, 1e-12));
    checks.push(below("stochastic_rule_vs_closed_form", stochastic_dev, 1e-12));

    let c = cfg.coupling_c()?;
    let freqs = ModeFrequencies { omega_s: 1.3, omega_i: 0.7 };
    let integrated = integrated_coefficients(c, 1.0, freqs, cfg.ode_steps)?;
    checks.push(below(
        "ode_vs_exact_flow",
        integrated.max_deviation(&TransferCoefficients::exact(c)),
        1e-9,
    ));
    checks.push(below(
        "ode_vs_second_order_closed_form",
        integrated.max_deviation(&TransferCoefficients::closed_form(c)),
        c.norm().powi(3).max(1e-15),
    ));
    let one = Complex64::new(1.0, 0.0);
    let end = integrate_rotating_frame([one, Complex64::new(0.0, 0.0)], c, 1.0, cfg.ode_steps)?;
    checks.push(below("ode_invariant_drift", (end[0].norm_sqr() - end[1].norm_sqr() - 1.0).abs(), 1e-8));
    let order = observed_order(Complex64::new(0.8, 0.6), 1.0, 20)?;
    checks.push(below("ode_convergence_order", (order - 4.0).abs(), 0.2));

    let mut table = Table::new(vec!["check", "value", "threshold", "pass", "d_re", "d_im", "cutoff", "version", "warning"]);
    let mut failed = false;
    let mut summary = Vec::new();
    for ch in &checks {
        failed |= !ch.pass;
        summary.push(format!(
            "{} {}: {} (limit {})",
            if ch.pass { "PASS" } else { "FAIL" },
            ch.name,
            fmt_num(ch.value),
            fmt_num(ch.threshold)
        ));
        table.push(vec![
            ch.name.clone(),
            fmt_num(ch.value),
            fmt_num(ch.threshold),
            ch.pass.to_string(),
            fmt_num(d.re),
            fmt_num(d.im),
            cfg.cutoff.to_string(),
            VERSION.into(),
            warn.clone(),
        ]);
    }
    Ok(Outcome { table, summary, failed })
}
