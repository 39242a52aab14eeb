use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use binned_bosons::binning::{
    binned_distribution_exact, binned_distribution_gurvits, char_poly_coefficients, generalized_bunching_probability,
    gurvits_samples_for, ModePartition,
};
use binned_bosons::haar_stats::{variance_over_unitaries, EnsembleSpec, MeanEstimate, VarianceResult};
use binned_bosons::interference::{
    draw_samples, full_distribution, gram_from_delays, gram_uniform, hom_visibility, outcome_probability,
    DelayConfig, GramMatrix, InputConfig, OutcomePattern, SampleMetadata,
};
use binned_bosons::io::{
    binned_to_json, json_string, parse_counts, parse_partition, parse_partitions, parse_values, read_gram,
    read_samples, read_unitary, samples_to_json, unitary_to_json, write_text, BinnedFile,
};
use binned_bosons::linalg::{amplitude_fidelity, ComplexMatrix, NoiseModel, UnitaryEigen, UnitaryMatrix};
use binned_bosons::rng::child_seed;
use binned_bosons::validation::{
    distinguishability_sweep, ensemble_mean_distribution, ensemble_tvds, gbp_difference_scan, tvd,
    uniform_sampler_baseline, validation_report, Histogram, ScanNoise,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{num, Csv};
use crate::{EnsembleArgs, GramArgs, Method, Reference};

fn gram(args: &GramArgs) -> Result<GramMatrix> {
    match (&args.gram, args.x) {
        (Some(path), _) => {
            let g = read_gram(path)?;
            if let Some(n) = args.n.filter(|&n| n != g.n()) {
                bail!("--n {n} disagrees with the {}-photon Gram matrix in {}", g.n(), path.display());
            }
            Ok(g)
        }
        (None, Some(x)) => {
            let n = args.n.ok_or_else(|| anyhow!("--x needs --n"))?;
            Ok(gram_uniform(n, x)?)
        }
        (None, None) => bail!("give either --gram FILE or --x OVERLAP with --n"),
    }
}

fn ensemble(args: &EnsembleArgs) -> Result<Vec<UnitaryMatrix>> {
    if let Some(dir) = &args.ensemble {
        let mut paths: Vec<_> = fs::read_dir(dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
        paths.sort();
        if paths.is_empty() {
            bail!("no .json unitaries in {}", dir.display());
        }
        let us: Vec<UnitaryMatrix> = paths.iter().map(|p| read_unitary(p)).collect::<Result<_, _>>()?;
        if us.iter().any(|u| u.dim() != us[0].dim()) {
            bail!("unitaries in {} have different sizes", dir.display());
        }
        return Ok(us);
    }
    match (args.m, args.count) {
        (Some(m), Some(count)) => Ok(EnsembleSpec::new(count, m, args.seed)?.unitaries()?),
        _ => bail!("give either --ensemble DIR or both --m and --count"),
    }
}

fn subset(text: &str, m: usize) -> Result<Vec<usize>> {
    let p = parse_partition(text, m)?;
    if p.k() != 1 {
        bail!("subset {text:?} must be a single bin");
    }
    Ok(p.bins()[0].clone())
}

pub fn haar_gen(m: usize, count: usize, seed: u64, out: &Path) -> Result<()> {
    let spec = EnsembleSpec::new(count, m, seed)?;
    let width = count.saturating_sub(1).to_string().len().max(3);
    for i in 0..count {
        let path = out.join(format!("u{i:0width$}.json"));
        write_text(&path, &unitary_to_json(&spec.unitary(i)?))?;
    }
    Ok(())
}

pub fn simulate(unitary: &Path, g: &GramArgs, samples: u64, seed: u64, out: &Path) -> Result<()> {
    let u = read_unitary(unitary)?;
    let x = gram(g)?;
    let dist = full_distribution(&u, &x, &InputConfig::new(x.n(), u.dim())?)?;
    let mut set = draw_samples(&dist, samples, seed)?;
    set.metadata = SampleMetadata {
        unitary_id: Some(unitary.display().to_string()),
        gram_id: g.gram.as_ref().map(|p| p.display().to_string()),
        seed: Some(seed),
    };
    write_text(out, &samples_to_json(&set))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn bin(
    unitary: &Path,
    g: &GramArgs,
    partition: &str,
    method: Method,
    eps: f64,
    samples_per_point: Option<usize>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let u = read_unitary(unitary)?;
    let x = gram(g)?;
    let p = parse_partition(partition, u.dim())?;
    let file = match method {
        Method::Exact => BinnedFile {
            distribution: binned_distribution_exact(&u, &x, &p)?,
            method: Some("exact".into()),
            error_estimate: None,
        },
        Method::Gurvits => {
            let spp = match samples_per_point {
                Some(s) => s,
                None => gurvits_samples_for(x.n(), eps)?,
            };
            let est = binned_distribution_gurvits(&u, &x, &p, spp, seed)?;
            BinnedFile {
                distribution: est.distribution,
                method: Some("gurvits".into()),
                error_estimate: Some(est.error_estimate),
            }
        }
    };
    write_text(out, &binned_to_json(&file))?;
    Ok(())
}

#[derive(Serialize)]
struct GbpOut {
    subset: Vec<usize>,
    /// Bunching probability for the given Gram matrix.
    gbp: f64,
    /// Same for indistinguishable photons.
    bosonic: f64,
    delta: f64,
    abscissa: f64,
    coefficients: Option<Vec<f64>>,
}

pub fn gbp(unitary: &Path, g: &GramArgs, subset_text: &str, out: &Path) -> Result<()> {
    let u = read_unitary(unitary)?;
    let x = gram(g)?;
    let s = subset(subset_text, u.dim())?;
    let value = generalized_bunching_probability(&u, &x, &s)?;
    let bosonic = generalized_bunching_probability(&u, &GramMatrix::ones(x.n()), &s)?;
    // Coefficient sums run over all principal minors; skip them when capped.
    let coefficients = char_poly_coefficients(&u, &x, &s).ok().map(|c| c.coefficients);
    let doc = GbpOut {
        subset: s,
        gbp: value,
        bosonic,
        delta: bosonic - value,
        abscissa: x.permanent_score(),
        coefficients,
    };
    write_text(out, &json_string(&doc))?;
    Ok(())
}

pub fn validate(
    samples: &Path,
    unitary: &Path,
    g: &GramArgs,
    partitions: &str,
    fail_above: Option<f64>,
    against: Reference,
    out: &Path,
) -> Result<bool> {
    let s = read_samples(samples)?;
    let u = read_unitary(unitary)?;
    let x = gram(g)?;
    let ps = parse_partitions(partitions, u.dim())?;
    let report = validation_report(&s, &u, &x, &ps)?;
    write_text(out, &json_string(&report))?;
    let Some(threshold) = fail_above else {
        return Ok(true);
    };
    let worst = match against {
        Reference::Bosonic => &report.worst_case_bosonic,
        Reference::Model => &report.worst_case_model,
    };
    if worst.tvd > threshold {
        eprintln!(
            "validation failed: binned TVD {} on partition {} exceeds {threshold}",
            worst.tvd, worst.partition
        );
        return Ok(false);
    }
    Ok(true)
}

pub fn sweep_tvd(e: &EnsembleArgs, n: usize, grid: &str, partitions: &[String], out: &Path) -> Result<()> {
    let us = ensemble(e)?;
    let grid = parse_values(grid)?;
    let mut csv = Csv::create(out, &["partition", "x", "mean_tvd", "stderr"])?;
    for text in partitions {
        let p = parse_partition(text, us[0].dim())?;
        let r = distinguishability_sweep(&us, n, &p, &grid)?;
        for i in 0..r.grid.len() {
            csv.row([r.partition.clone(), num(r.grid[i]), num(r.mean[i]), num(r.stderr[i])])?;
        }
    }
    csv.finish()
}

pub fn variance_scan(e: &EnsembleArgs, n: usize, bins: &str, xs: &str, out: &Path) -> Result<()> {
    let us = ensemble(e)?;
    let m = us[0].dim();
    let mut csv = Csv::create(
        out,
        &["bin_size", "x", "sum_sq_overlaps", "mc_mean", "mc_stderr", "formula", "formula_exact"],
    )?;
    let xs = parse_values(xs)?;
    for k in parse_counts(bins)? {
        let bin: Vec<usize> = (1..=k).collect();
        for &x in &xs {
            let g = gram_uniform(n, x)?;
            let pred = VarianceResult::predict(m, k, &g)?;
            let mc = variance_over_unitaries(&us, &g, &bin)?;
            csv.row([
                k.to_string(),
                num(x),
                num(pred.sum_sq_overlaps),
                num(mc.mean),
                num(mc.stderr),
                num(pred.predicted_variance),
                num(pred.exact_variance),
            ])?;
        }
    }
    csv.finish()
}

/// Each draw `i` keeps one target and one noise unitary across all `eps`.
pub fn noise_scan(m: usize, eps: &str, draws: usize, seed: u64, out: &Path) -> Result<()> {
    let eps = parse_values(eps)?;
    if let Some(bad) = eps.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        bail!("epsilon {bad} outside [0, 1]");
    }
    let targets = EnsembleSpec::new(draws, m, child_seed(seed, 0))?;
    let noise_root = child_seed(seed, 1);
    let identity = UnitaryMatrix::identity(m);
    // fidelities[i][e] = (haar target, identity target)
    let fidelities: Vec<Vec<(f64, f64)>> = (0..draws)
        .into_par_iter()
        .map(|i| -> Result<Vec<(f64, f64)>> {
            let target = targets.unitary(i)?;
            let noise = NoiseModel::haar(m, 0.0, child_seed(noise_root, i as u64))?;
            let eig = UnitaryEigen::new(noise.noise_unitary())?;
            eps.iter()
                .map(|&e| {
                    let step = eig.map_phases(|t| Complex64::from_polar(1.0, e * t));
                    let step = UnitaryMatrix::new(ComplexMatrix::from_dmatrix(step)?)?;
                    let noisy = step.compose(&target)?;
                    Ok((amplitude_fidelity(&target, &noisy)?, amplitude_fidelity(&identity, &step)?))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut csv = Csv::create(
        out,
        &["eps", "fidelity_haar_mean", "fidelity_haar_stderr", "fidelity_identity_mean", "fidelity_identity_stderr"],
    )?;
    for (j, &e) in eps.iter().enumerate() {
        let haar: Vec<f64> = fidelities.iter().map(|f| f[j].0).collect();
        let ident: Vec<f64> = fidelities.iter().map(|f| f[j].1).collect();
        let (h, id) = (MeanEstimate::from_values(&haar)?, MeanEstimate::from_values(&ident)?);
        csv.row([num(e), num(h.mean), num(h.stderr), num(id.mean), num(id.stderr)])?;
    }
    csv.finish()
}

/// Two photons on a balanced beamsplitter, the second delayed by each value.
pub fn hom_curve(delays: &str, sigma: f64, out: &Path) -> Result<()> {
    let bs = UnitaryMatrix::beamsplitter();
    let coincidence = OutcomePattern::new(vec![1, 1]);
    let mut csv = Csv::create(out, &["delay", "overlap", "visibility", "coincidence_probability"])?;
    for d in parse_values(delays)? {
        let x = gram_from_delays(&DelayConfig::new(vec![0.0, d], sigma)?)?;
        let overlap = x.get(0, 1);
        let p = outcome_probability(&bs, &x, &coincidence)?;
        csv.row([num(d), num(overlap), num(hom_visibility(overlap)), num(p)])?;
    }
    csv.finish()
}

#[allow(clippy::too_many_arguments)]
pub fn gbp_scan(
    e: &EnsembleArgs,
    subset_text: &str,
    n: usize,
    grams: usize,
    gram_seed: u64,
    noise: Option<(f64, u64)>,
    out: &Path,
    summary: Option<&Path>,
) -> Result<()> {
    let us = ensemble(e)?;
    let s = subset(subset_text, us[0].dim())?;
    let gs: Vec<GramMatrix> = (0..grams)
        .map(|i| GramMatrix::random_real(n, child_seed(gram_seed, i as u64)))
        .collect();
    let noise = noise.map(|(epsilon, seed)| ScanNoise { epsilon, seed });
    let scan = gbp_difference_scan(&us, &s, &gs, noise)?;
    let mut csv = Csv::create(out, &["unitary", "gram", "abscissa", "delta"])?;
    for p in &scan.points {
        csv.row([p.unitary.to_string(), p.gram.to_string(), num(p.abscissa), num(p.delta)])?;
    }
    csv.finish()?;
    if let Some(path) = summary {
        let mut csv = Csv::create(path, &["gram", "abscissa", "mean", "std_dev", "min", "negatives"])?;
        for r in &scan.summaries {
            csv.row([
                r.gram.to_string(),
                num(r.abscissa),
                num(r.mean),
                num(r.std_dev),
                num(r.min),
                r.negatives.to_string(),
            ])?;
        }
        csv.finish()?;
    }
    Ok(())
}

pub fn avg_dist(e: &EnsembleArgs, g: &GramArgs, partition: &str, out: &Path) -> Result<()> {
    let us = ensemble(e)?;
    let x = gram(g)?;
    let p: ModePartition = parse_partition(partition, us[0].dim())?;
    let mean = ensemble_mean_distribution(&us, &x, &p)?;
    let uniform = uniform_sampler_baseline(x.n(), us[0].dim(), &p)?;
    let mut csv = Csv::create(out, &["k", "ensemble_mean", "uniform"])?;
    for (k, v) in mean.probs() {
        csv.row([k.to_string(), num(*v), num(uniform.prob(k.counts()))])?;
    }
    csv.finish()?;
    eprintln!("tvd(ensemble mean, uniform) = {}", tvd(&mean, &uniform)?);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn tvd_hist(
    e: &EnsembleArgs,
    g: &GramArgs,
    partitions: &str,
    buckets: usize,
    lo: f64,
    hi: f64,
    out: &Path,
) -> Result<()> {
    let us = ensemble(e)?;
    let x = gram(g)?;
    let ones = GramMatrix::ones(x.n());
    let mut values = Vec::new();
    for p in parse_partitions(partitions, us[0].dim())? {
        values.extend(ensemble_tvds(&us, &x, &p, &ones)?);
    }
    let h = Histogram::new(&values, lo, hi, buckets)?;
    let edges = h.edges();
    let mut csv = Csv::create(out, &["lo", "hi", "count"])?;
    for (i, c) in h.counts.iter().enumerate() {
        csv.row([num(edges[i]), num(edges[i + 1]), c.to_string()])?;
    }
    csv.finish()
}
