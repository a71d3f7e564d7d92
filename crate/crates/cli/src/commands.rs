//! Subcommand implementations. Each writes rows through a [`ResultWriter`] and
//! reports progress on stderr.

use serde::Serialize;

use seqdec::analysis::{
    average_error_exact, average_error_mc, first_n_below, monotonicity_check, verify_operator_orderings,
    AveragingContext, BoundReport, EpsilonReport,
};
use seqdec::coding::{enumerate_codes, sample_code, Codebook, SeedStream};
use seqdec::decoding::{
    build_pgm_povm, build_sequential_povm, code_error_probability, decode_confusion_matrix, Decoder,
    TrajectorySimulator,
};
use seqdec::ensembles::Ensemble;
use seqdec::typicality::{average_typical_projector, sandwich_check, MassMode};
use seqdec::Settings;

use crate::config::{ExperimentConfig, Mode};
use crate::error::CliError;
use crate::output::{write_report, ResultWriter, RowKey};

fn progress(msg: impl AsRef<str>) {
    eprintln!("[seqdec] {}", msg.as_ref());
}

fn bool_value(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn capacity(cfg: &ExperimentConfig, e: &Ensemble, out: &mut ResultWriter) -> Result<(), CliError> {
    let key = RowKey::default();
    out.write(key, "chi", e.chi(), None)?;
    out.write(key, "entropy", e.entropy(), None)?;
    for (j, s) in e.state_entropies().iter().enumerate() {
        out.write(key, &format!("state_entropy:{j}"), *s, None)?;
    }
    if let Some(path) = &cfg.report {
        #[derive(Serialize)]
        struct Capacity<'a> {
            chi: f64,
            entropy: f64,
            state_entropies: &'a [f64],
        }
        write_report(
            path,
            &Capacity {
                chi: e.chi(),
                entropy: e.entropy(),
                state_entropies: e.state_entropies(),
            },
        )?;
    }
    Ok(())
}

fn mass_mode(cfg: &ExperimentConfig) -> MassMode {
    match cfg.mode {
        Mode::Exact => MassMode::Exact,
        Mode::Mc => MassMode::MonteCarlo {
            samples: cfg.samples,
            seed: cfg.seed,
        },
    }
}

pub fn typicality(cfg: &ExperimentConfig, e: &Ensemble, out: &mut ResultWriter) -> Result<(), CliError> {
    let delta = cfg.require_delta()?;
    let ns = cfg.require_n_list()?;
    let settings = &cfg.settings;
    for &n in ns {
        settings_check_dim(settings, e, n)?;
    }
    let mode = mass_mode(cfg);
    let mut reports = Vec::new();
    for &n in ns {
        progress(format!("typicality n={n}"));
        let key = RowKey {
            n: Some(n),
            delta: Some(delta),
            ..Default::default()
        };
        let p = average_typical_projector(e, n, delta, settings)?;
        out.write(key, "rank_p", p.rank() as f64, None)?;
        let eps = EpsilonReport::compute(e, n, delta, mode, settings)?;
        let cond =
            seqdec::typicality::atypical_mass_conditional(e, n, delta, mode, settings)?;
        out.write(key, "avg_atypical_mass", eps.avg_atypical_mass, None)?;
        out.write(key, "cond_atypical_mass", cond.value, cond.stderr)?;
        out.write(key, "f0_gap", eps.f0_gap, None)?;
        let sandwich = sandwich_check(e, n, delta, settings)?;
        out.write(key, "sandwich_lower_margin", sandwich.lower_margin, None)?;
        out.write(key, "sandwich_upper_margin", sandwich.upper_margin, None)?;
        out.write(key, "sandwich_holds", bool_value(sandwich.holds), None)?;
        reports.push(eps);
    }
    if let Some(eps) = cfg.epsilon {
        if let Some(n0) = first_n_below(&reports, eps) {
            out.write(RowKey { delta: Some(delta), ..Default::default() }, "n0", n0 as f64, None)?;
        }
    }
    if let Some(path) = &cfg.report {
        write_report(path, &reports)?;
    }
    Ok(())
}

fn settings_check_dim(settings: &Settings, e: &Ensemble, n: usize) -> Result<(), CliError> {
    let dim = (e.dim() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > settings.max_dim as u128 {
        return Err(seqdec::Error::DimensionOverflow {
            dim,
            max_dim: settings.max_dim,
        }
        .into());
    }
    Ok(())
}

fn fixed_code(cfg: &ExperimentConfig, e: &Ensemble) -> Result<Option<Codebook>, CliError> {
    cfg.code
        .as_ref()
        .map(|path| Codebook::load(path, e.alphabet_size()).map_err(CliError::from))
        .transpose()
}

/// Brute-force code average over every codebook, for the given decoder.
fn brute_force_average(
    e: &Ensemble,
    n: usize,
    size: usize,
    delta: f64,
    decoder: Decoder,
    settings: &Settings,
) -> Result<f64, CliError> {
    let mut total = 0.0;
    for (code, weight) in enumerate_codes(e, n, size, settings)? {
        let err = match decoder {
            Decoder::Sequential => {
                code_error_probability(&build_sequential_povm(e, &code, delta, settings)?, e, &code, settings)?
            }
            Decoder::Pgm => code_error_probability(&build_pgm_povm(e, &code, delta, settings)?, e, &code, settings)?,
        };
        total += weight.prob() * err;
    }
    Ok(total)
}

fn brute_force_within_budget(e: &Ensemble, n: usize, size: usize, settings: &Settings) -> bool {
    let total = (e.alphabet_size() as f64).powi((n * size) as i32);
    // Every code costs a dense POVM build, so keep this well below the raw budget.
    total <= (settings.enumeration_budget as f64).min(4096.0)
}

pub fn decode(cfg: &ExperimentConfig, e: &Ensemble, out: &mut ResultWriter) -> Result<(), CliError> {
    let delta = cfg.require_delta()?;
    let settings = &cfg.settings;
    let fixed = fixed_code(cfg, e)?;
    let ns: Vec<usize> = match (&fixed, cfg.n_list.is_empty()) {
        (Some(code), true) => vec![code.block_length()],
        _ => cfg.require_n_list()?.to_vec(),
    };
    for &n in &ns {
        settings_check_dim(settings, e, n)?;
    }
    if let Some(code) = fixed {
        return decode_fixed(cfg, e, &code, delta, out);
    }
    let size_spec = cfg.require_size()?;
    for &n in &ns {
        let (size, rate) = size_spec.resolve(n);
        let key = RowKey {
            n: Some(n),
            delta: Some(delta),
            code_size: Some(size),
            rate: Some(rate),
        };
        match cfg.mode {
            Mode::Exact => {
                progress(format!("decode exact n={n} N={size}"));
                let ctx = AveragingContext::exact(e, n, delta, settings)?;
                out.write(key, "avg_err_exact", average_error_exact(&ctx, size)?, None)?;
                if brute_force_within_budget(e, n, size, settings) {
                    progress("brute-force code enumeration");
                    let bf = brute_force_average(e, n, size, delta, Decoder::Sequential, settings)?;
                    out.write(key, "avg_err_bruteforce", bf, None)?;
                    if cfg.compare_pgm {
                        let pgm = brute_force_average(e, n, size, delta, Decoder::Pgm, settings)?;
                        out.write(key, "pgm_avg_err_exact", pgm, None)?;
                    }
                }
            }
            Mode::Mc => {
                progress(format!("decode mc n={n} N={size} codes={}", cfg.codes));
                let est = average_error_mc(e, n, delta, size, cfg.codes, cfg.seed, Decoder::Sequential, settings)?;
                out.write(key, "avg_err_mc", est.mean, Some(est.stderr))?;
                if cfg.compare_pgm {
                    let est = average_error_mc(e, n, delta, size, cfg.codes, cfg.seed, Decoder::Pgm, settings)?;
                    out.write(key, "pgm_avg_err_mc", est.mean, Some(est.stderr))?;
                }
            }
        }
    }
    Ok(())
}

fn decode_fixed(
    cfg: &ExperimentConfig,
    e: &Ensemble,
    code: &Codebook,
    delta: f64,
    out: &mut ResultWriter,
) -> Result<(), CliError> {
    let settings = &cfg.settings;
    let n = code.block_length();
    let key = RowKey {
        n: Some(n),
        delta: Some(delta),
        code_size: Some(code.len()),
        rate: Some((code.len() as f64).log2() / n as f64),
    };
    let seq = build_sequential_povm(e, code, delta, settings)?;
    let confusion = decode_confusion_matrix(&seq, e, code, settings)?;
    out.write(key, "code_err:0", code_error_probability(&seq, e, code, settings)?, None)?;
    let mut pgm_confusion = None;
    if cfg.compare_pgm {
        let pgm = build_pgm_povm(e, code, delta, settings)?;
        out.write(key, "pgm_code_err:0", code_error_probability(&pgm, e, code, settings)?, None)?;
        pgm_confusion = Some(decode_confusion_matrix(&pgm, e, code, settings)?);
    }
    if let Some(path) = &cfg.report {
        #[derive(Serialize)]
        struct Fixed<'a> {
            code: &'a Codebook,
            sequential_confusion: Vec<Vec<f64>>,
            pgm_confusion: Option<Vec<Vec<f64>>>,
        }
        write_report(
            path,
            &Fixed {
                code,
                sequential_confusion: confusion,
                pgm_confusion,
            },
        )?;
    }
    Ok(())
}

pub fn bounds(cfg: &ExperimentConfig, e: &Ensemble, out: &mut ResultWriter) -> Result<(), CliError> {
    let delta = cfg.require_delta()?;
    let ns = cfg.require_n_list()?;
    let size_spec = cfg.require_size()?;
    let settings = &cfg.settings;
    for &n in ns {
        settings_check_dim(settings, e, n)?;
    }
    let mut reports = Vec::new();
    for &n in ns {
        let (size, rate) = size_spec.resolve(n);
        progress(format!("bounds n={n} N={size}"));
        let key = RowKey {
            n: Some(n),
            delta: Some(delta),
            code_size: Some(size),
            rate: Some(rate),
        };
        let ctx = AveragingContext::exact(e, n, delta, settings)?;
        let mut report = BoundReport::compute(&ctx, size, cfg.zmax)?;
        if cfg.mode == Mode::Mc {
            report.avg_err_mc = Some(average_error_mc(
                e,
                n,
                delta,
                size,
                cfg.codes,
                cfg.seed,
                Decoder::Sequential,
                settings,
            )?);
        }
        for (z, f) in report.f.iter().enumerate() {
            out.write(key, &format!("f:{z}"), *f, None)?;
        }
        out.write(key, "a_exact", report.a_exact, None)?;
        if let Some(a) = report.a_expansion {
            out.write(key, "a_expansion", a, None)?;
        }
        out.write(key, "a_lower", report.a_lower, None)?;
        if let Some(y) = report.log_y {
            out.write(key, "log_y", y, None)?;
        }
        out.write(key, "chi_eff", report.chi_eff, None)?;
        out.write(
            key,
            "verdict_below",
            bool_value(report.verdict == seqdec::analysis::Verdict::Below),
            None,
        )?;
        out.write(key, "bound_vacuous", bool_value(report.vacuous), None)?;
        if let Some(err) = report.avg_err_exact {
            out.write(key, "avg_err_exact", err, None)?;
            out.write(key, "success_exact", 1.0 - err, None)?;
        }
        if let Some(mc) = report.avg_err_mc {
            out.write(key, "avg_err_mc", mc.mean, Some(mc.stderr))?;
        }
        let orderings = verify_operator_orderings(&ctx)?;
        out.write(key, "w0_margin", orderings.w0_margin, None)?;
        out.write(key, "compressed_w0_margin", orderings.compressed_w0_margin, None)?;
        out.write(key, "q_margin", orderings.q_margin, None)?;
        out.write(key, "orderings_hold", bool_value(orderings.all_hold()), None)?;
        let traces = monotonicity_check(&ctx, size.saturating_sub(1).max(cfg.zmax))?;
        for (l, t) in traces.iter().enumerate() {
            out.write(key, &format!("w1_q_trace:{l}"), *t, None)?;
        }
        if !orderings.all_hold() {
            return Err(seqdec::Error::InvariantViolation(format!("operator ordering failed at n={n}: {orderings:?}")).into());
        }
        reports.push(report);
    }
    if let Some(path) = &cfg.report {
        write_report(path, &reports)?;
    }
    Ok(())
}

pub fn trajectories(cfg: &ExperimentConfig, e: &Ensemble, out: &mut ResultWriter) -> Result<(), CliError> {
    let delta = cfg.require_delta()?;
    let settings = &cfg.settings;
    let code = match fixed_code(cfg, e)? {
        Some(code) => code,
        None => {
            let ns = cfg.require_n_list()?;
            if ns.len() != 1 {
                return Err(CliError::Config("trajectories takes a single `n`".into()));
            }
            settings_check_dim(settings, e, ns[0])?;
            let (size, _) = cfg.require_size()?.resolve(ns[0]);
            sample_code(e, ns[0], size, &mut SeedStream::new(cfg.seed).rng(u64::MAX))?
        }
    };
    let n = code.block_length();
    let size = code.len();
    let key = RowKey {
        n: Some(n),
        delta: Some(delta),
        code_size: Some(size),
        rate: Some((size as f64).log2() / n as f64),
    };
    let povm = build_sequential_povm(e, &code, delta, settings)?;
    let exact = decode_confusion_matrix(&povm, e, &code, settings)?;
    let sim = TrajectorySimulator::new(e, &code, delta, settings)?;
    let samples = cfg.samples;
    let mut max_z: f64 = 0.0;
    let mut resamples = 0usize;
    #[derive(Serialize)]
    struct SentReport {
        sent: usize,
        counts: Vec<usize>,
        exact: Vec<f64>,
        z: Vec<f64>,
    }
    let mut report = Vec::new();
    for sent in 1..=size {
        progress(format!("trajectories sent={sent} samples={samples}"));
        let mut rng = SeedStream::new(cfg.seed).rng(sent as u64);
        let mut counts = vec![0usize; size + 1];
        for _ in 0..samples {
            let outcome = sim.simulate(sent, &mut rng)?;
            resamples += outcome.resamples;
            counts[outcome.declared.unwrap_or(0)] += 1;
        }
        let mut zs = Vec::with_capacity(size + 1);
        let mut probs = Vec::with_capacity(size + 1);
        for (outcome, &count) in counts.iter().enumerate() {
            let p = exact[outcome][sent - 1].clamp(0.0, 1.0);
            let freq = count as f64 / samples as f64;
            let sd = (p * (1.0 - p) / samples as f64).sqrt();
            let z = if sd > 0.0 {
                (freq - p) / sd
            } else if (freq - p).abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            max_z = max_z.max(z.abs());
            let tag = format!("s{sent}_o{outcome}");
            out.write(key, &format!("traj_freq:{tag}"), freq, Some((freq * (1.0 - freq) / samples as f64).sqrt()))?;
            out.write(key, &format!("exact_prob:{tag}"), p, None)?;
            out.write(key, &format!("z_score:{tag}"), z, None)?;
            zs.push(z);
            probs.push(p);
        }
        report.push(SentReport {
            sent,
            counts,
            exact: probs,
            z: zs,
        });
    }
    out.write(key, "max_abs_z", max_z, None)?;
    out.write(key, "resamples", resamples as f64, None)?;
    if let Some(path) = &cfg.report {
        write_report(path, &report)?;
    }
    Ok(())
}
