//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails. Tolerances are pinned below.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use binned_bosons::binning::{
    binned_distribution_exact, binned_distribution_gurvits, char_poly_coefficients, coarse_grain,
    generalized_bunching_probability, gurvits_samples_for, ModePartition,
};
use binned_bosons::haar_stats::{
    ensemble_variance_mc, haar_variance_exact, haar_variance_formula, weingarten_moment_oracle, EnsembleSpec,
    MomentSpec,
};
use binned_bosons::interference::{
    full_distribution, gram_uniform, outcome_probability, FullDistribution, GramMatrix, InputConfig,
    OutcomePattern,
};
use binned_bosons::linalg::{amplitude_fidelity, apply_noise, haar_unitary, NoiseModel, UnitaryMatrix};
use binned_bosons::rng::child_seed;
use binned_bosons::validation::{
    binned_tvd, distinguishability_sweep, gbp_difference_scan, phase_sensitivity_probe, random_dressing, tvd,
    ScanNoise,
};
use binned_bosons::Result;

// Oracle equivalence.
const ORACLE_INSTANCES: usize = 50;
const ORACLE_TVD: f64 = 1e-10;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);

// Hong-Ou-Mandel.
const HOM_TOL: f64 = 1e-12;

// Haar-averaged single-bin variance.
const VARIANCE_DRAWS: usize = 2000;
const VARIANCE_SIGMAS: f64 = 3.0;
const VARIANCE_BUDGET: Duration = Duration::from_secs(300);

// Bunching maximality.
const GBP_NOISELESS_INSTANCES: usize = 500;
const GBP_FLOOR: f64 = -1e-12;
const GBP_NOISE_EPS: f64 = 0.424;
const GBP_NOISY_MODES: usize = 12;
const GBP_NOISY_UNITARIES: usize = 50;
const GBP_NOISY_GRAMS: usize = 20;
/// Two-mode subsets must show at least this fraction of negative differences.
const GBP_TWO_MODE_MIN_NEGATIVE: f64 = 0.01;
/// "Rare": the single-mode negative fraction is at most this multiple of the
/// two-mode one.
const GBP_SINGLE_MODE_RARITY: f64 = 0.5;

// Noise-model anchor.
const FIDELITY_MODES: usize = 12;
const FIDELITY_EPS: f64 = 0.424;
const FIDELITY_DRAWS: usize = 200;
const FIDELITY_TARGET: f64 = 0.904;
const FIDELITY_TOL: f64 = 0.02;
const FIDELITY_BUDGET: Duration = Duration::from_secs(30);

// Lower-bound chain.
const BOUND_PAIRS: usize = 500;
/// Rounding slack for sums of at most 20 terms.
const BOUND_SLACK: f64 = 1e-14;

// Randomized permanents.
const GURVITS_INSTANCES: usize = 20;
const GURVITS_SEEDS_PER_INSTANCE: usize = 5;
const GURVITS_EPS: f64 = 0.05;
const GURVITS_MIN_COVERAGE: f64 = 0.95;

// Phase sensitivity.
const PHASE_TRIALS: usize = 100;
const PHASE_ZERO: f64 = 1e-12;
const PHASE_VISIBLE: f64 = 1e-3;
const PHASE_MIN_VISIBLE_FRACTION: f64 = 0.90;

// Distinguishability sweep and moments.
const SWEEP_UNITARIES: usize = 50;
const SWEEP_MODES: usize = 12;
const SWEEP_SIGMAS: f64 = 3.0;
const SWEEP_ENDPOINT: f64 = 1e-12;
const MOMENT_DRAWS: usize = 20_000;
const MOMENT_SIGMAS: f64 = 3.0;

// Performance.
const SMALL_BUDGET: Duration = Duration::from_millis(10);
const LARGE_BUDGET: Duration = Duration::from_secs(30);

const SEED: u64 = 0x5eed_acce;

type Criterion = (&'static str, fn() -> Result<Verdict>);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn seed(tag: u64, i: usize) -> u64 {
    child_seed(child_seed(SEED, tag), i as u64)
}

fn unit_float(s: u64) -> f64 {
    (s >> 11) as f64 / (1u64 << 53) as f64
}

/// All nonempty proper subsets of `1..=m` as single-bin partitions.
fn proper_subsets(m: usize) -> Vec<ModePartition> {
    (1..(1usize << m) - 1)
        .map(|mask| {
            let s: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
            ModePartition::single(m, &s).expect("valid subset")
        })
        .collect()
}

/// Every set partition of every nonempty subset of `1..=m`.
fn all_partitions(m: usize) -> Vec<ModePartition> {
    fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
        let Some((&first, rest)) = items.split_first() else {
            return vec![vec![]];
        };
        let mut out = Vec::new();
        for p in set_partitions(rest) {
            for i in 0..p.len() {
                let mut q = p.clone();
                q[i].insert(0, first);
                out.push(q);
            }
            let mut q = p;
            q.insert(0, vec![first]);
            out.push(q);
        }
        out
    }
    let mut out = Vec::new();
    for mask in 1..1usize << m {
        let items: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        for bins in set_partitions(&items) {
            out.push(ModePartition::new(m, bins).expect("valid partition"));
        }
    }
    out
}

fn oracle_equivalence() -> Result<Verdict> {
    let start = Instant::now();
    let cfg = InputConfig::new(3, 4)?;
    let subsets = proper_subsets(4);
    let mut worst = 0.0f64;
    for i in 0..ORACLE_INSTANCES {
        let u = haar_unitary(4, seed(1, i))?;
        let x = GramMatrix::random_real(3, seed(2, i));
        let full = full_distribution(&u, &x, &cfg)?;
        for p in &subsets {
            worst = worst.max(tvd(&binned_distribution_exact(&u, &x, p)?, &coarse_grain(&full, p)?)?);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= ORACLE_TVD && elapsed < ORACLE_BUDGET,
        format!(
            "{ORACLE_INSTANCES} instances x {} subsets, max TVD {worst:.2e} (tol {ORACLE_TVD:.0e}), {elapsed:.2?}",
            subsets.len()
        ),
    )
}

fn hom_suite() -> Result<Verdict> {
    let bs = UnitaryMatrix::beamsplitter();
    let (bos, dis) = (GramMatrix::ones(2), GramMatrix::identity(2));
    let coincidence = OutcomePattern::new(vec![1, 1]);
    let bin = ModePartition::single(2, &[1])?;
    let mut err = 0.0f64;
    err = err.max(outcome_probability(&bs, &bos, &coincidence)?.abs());
    err = err.max((outcome_probability(&bs, &dis, &coincidence)? - 0.5).abs());
    for (x, want) in [(&bos, [0.5, 0.0, 0.5]), (&dis, [0.25, 0.5, 0.25])] {
        let d = binned_distribution_exact(&bs, x, &bin)?;
        for (k, w) in want.iter().enumerate() {
            err = err.max((d.prob(&[k]) - w).abs());
        }
    }
    verdict(err <= HOM_TOL, format!("max deviation {err:.2e} (tol {HOM_TOL:.0e})"))
}

fn haar_variance() -> Result<Verdict> {
    let start = Instant::now();
    let (n, m) = (3, 4);
    let spec = EnsembleSpec::new(VARIANCE_DRAWS, m, seed(3, 0))?;
    let mut pass = true;
    let mut cells = Vec::new();
    for bin_size in [1, 2] {
        for x in [0.0, 0.5, 1.0] {
            let g = gram_uniform(n, x)?;
            let mc = ensemble_variance_mc(&spec, &g, bin_size)?;
            let target = haar_variance_formula(n, m, bin_size, g.sum_sq_overlaps())?;
            let exact = haar_variance_exact(n, m, bin_size, g.sum_sq_overlaps())?;
            let ok = mc.within(target, VARIANCE_SIGMAS);
            pass &= ok;
            cells.push(format!(
                "|K|={bin_size} x={x}: mc {:.4}±{:.4} vs formula {target:.4} ({:+.1}σ{}) [exact avg {exact:.4}]",
                mc.mean,
                mc.stderr,
                (mc.mean - target) / mc.stderr,
                if ok { "" } else { ", miss" }
            ));
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < VARIANCE_BUDGET;
    verdict(pass, format!("{VARIANCE_DRAWS} unitaries, {elapsed:.2?}\n      {}", cells.join("\n      ")))
}

fn bunching_maximality() -> Result<Verdict> {
    let mut worst = f64::INFINITY;
    for i in 0..GBP_NOISELESS_INSTANCES {
        let s = seed(4, i);
        let m = 3 + (s % 6) as usize;
        let mask = 1 + (child_seed(s, 1) % ((1u64 << m) - 2)) as usize;
        let subset: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        let u = haar_unitary(m, child_seed(s, 2))?;
        let x = GramMatrix::random_real(3, child_seed(s, 3));
        let d = generalized_bunching_probability(&u, &GramMatrix::ones(3), &subset)?
            - generalized_bunching_probability(&u, &x, &subset)?;
        worst = worst.min(d);
    }
    let ensemble = EnsembleSpec::new(GBP_NOISY_UNITARIES, GBP_NOISY_MODES, seed(5, 0))?.unitaries()?;
    let grams: Vec<GramMatrix> = (0..GBP_NOISY_GRAMS).map(|g| GramMatrix::random_real(3, seed(6, g))).collect();
    let noise = Some(ScanNoise {
        epsilon: GBP_NOISE_EPS,
        seed: seed(7, 0),
    });
    let two = gbp_difference_scan(&ensemble, &[1, 2], &grams, noise)?.negative_fraction(-GBP_FLOOR);
    let one = gbp_difference_scan(&ensemble, &[1], &grams, noise)?.negative_fraction(-GBP_FLOOR);
    let pass = worst >= GBP_FLOOR && two >= GBP_TWO_MODE_MIN_NEGATIVE && one <= GBP_SINGLE_MODE_RARITY * two;
    verdict(
        pass,
        format!(
            "noiseless min difference {worst:.3e} (floor {GBP_FLOOR:.0e}); with noise eps={GBP_NOISE_EPS}: \
             negative fraction two-mode {two:.3} (need >= {GBP_TWO_MODE_MIN_NEGATIVE}), \
             single-mode {one:.3} (need <= {GBP_SINGLE_MODE_RARITY} x two-mode)"
        ),
    )
}

fn noise_anchor() -> Result<Verdict> {
    let start = Instant::now();
    let mut sum = 0.0;
    for i in 0..FIDELITY_DRAWS {
        let target = haar_unitary(FIDELITY_MODES, seed(8, i))?;
        let model = NoiseModel::haar(FIDELITY_MODES, FIDELITY_EPS, seed(9, i))?;
        sum += amplitude_fidelity(&target, &apply_noise(&target, &model)?)?;
    }
    let mean = sum / FIDELITY_DRAWS as f64;
    let elapsed = start.elapsed();
    verdict(
        (mean - FIDELITY_TARGET).abs() <= FIDELITY_TOL && elapsed < FIDELITY_BUDGET,
        format!("mean amplitude fidelity {mean:.4} (target {FIDELITY_TARGET} ± {FIDELITY_TOL}), {elapsed:.2?}"),
    )
}

fn random_distribution(tag: u64, i: usize) -> Result<FullDistribution> {
    let patterns = binned_bosons::interference::enumerate_patterns(3, 4);
    let s = seed(tag, i);
    // Every fourth distribution is sparse, to exercise zero entries.
    let sparse = i.is_multiple_of(4);
    let mut w: Vec<f64> = (0..patterns.len())
        .map(|j| {
            let r = unit_float(child_seed(s, j as u64));
            if sparse && r < 0.6 {
                0.0
            } else {
                -(1.0 - r).ln()
            }
        })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    let probs: BTreeMap<OutcomePattern, f64> = patterns.into_iter().zip(w.into_iter().map(|v| v / total)).collect();
    FullDistribution::new(4, 3, probs)
}

fn lower_bound_chain() -> Result<Verdict> {
    let partitions = all_partitions(4);
    let nested: Vec<(usize, usize)> = (0..partitions.len())
        .flat_map(|a| (0..partitions.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b && partitions[a].refines(&partitions[b]))
        .collect();
    let (mut bound_viol, mut mono_viol) = (0usize, 0usize);
    let mut worst_excess = f64::NEG_INFINITY;
    for i in 0..BOUND_PAIRS {
        let (p, q) = (random_distribution(10, i)?, random_distribution(11, i)?);
        let full = tvd(&p, &q)?;
        let binned: Vec<f64> = partitions.iter().map(|k| binned_tvd(&p, &q, k)).collect::<Result<_>>()?;
        for &b in &binned {
            worst_excess = worst_excess.max(b - full);
            if b > full + BOUND_SLACK {
                bound_viol += 1;
            }
        }
        mono_viol += nested
            .iter()
            .filter(|&&(fine, coarse)| binned[coarse] > binned[fine] + BOUND_SLACK)
            .count();
    }
    verdict(
        bound_viol == 0 && mono_viol == 0,
        format!(
            "{BOUND_PAIRS} pairs x {} partitions ({} nested pairs): {bound_viol} bound and {mono_viol} \
             refinement violations, max binned-minus-full {worst_excess:.2e}",
            partitions.len(),
            nested.len()
        ),
    )
}

fn gurvits_coverage() -> Result<Verdict> {
    let p = ModePartition::new(4, vec![vec![1, 2], vec![3]])?;
    let samples = gurvits_samples_for(3, GURVITS_EPS)?;
    let (mut covered, mut runs) = (0usize, 0usize);
    let mut worst_ratio = 0.0f64;
    for i in 0..GURVITS_INSTANCES {
        let u = haar_unitary(4, seed(12, i))?;
        let x = GramMatrix::random_real(3, seed(13, i));
        let exact = binned_distribution_exact(&u, &x, &p)?;
        for r in 0..GURVITS_SEEDS_PER_INSTANCE {
            let est = binned_distribution_gurvits(&u, &x, &p, samples, seed(14, i * 100 + r))?;
            let err = tvd(&exact, &est.distribution)?;
            runs += 1;
            if err <= est.error_estimate {
                covered += 1;
            }
            worst_ratio = worst_ratio.max(err / est.error_estimate);
        }
    }
    let coverage = covered as f64 / runs as f64;
    verdict(
        coverage >= GURVITS_MIN_COVERAGE,
        format!(
            "{samples} samples/point, {covered}/{runs} runs within the reported bound \
             (need {GURVITS_MIN_COVERAGE}), worst error/bound {worst_ratio:.2}"
        ),
    )
}

/// Diagonal dressings are exact symmetries of every binned distribution, so
/// multi-mode sensitivity is probed with modulus-preserving, gauge-inequivalent
/// twins; dressings are checked to leave everything unchanged.
fn phase_sensitivity() -> Result<Verdict> {
    let p = ModePartition::single(4, &[1, 2])?;
    let (bos, dis) = (GramMatrix::ones(3), GramMatrix::identity(3));
    let (mut single_worst, mut c1_worst, mut dis_worst, mut dressing_worst) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut visible = 0usize;
    for i in 0..PHASE_TRIALS {
        let u = haar_unitary(4, seed(15, i))?;
        let phase_seed = seed(16, i);
        let b = phase_sensitivity_probe(&u, &bos, &p, phase_seed)?;
        let d = phase_sensitivity_probe(&u, &dis, &p, phase_seed)?;
        single_worst = single_worst.max(b.tvd_single_mode_bins).max(d.tvd_single_mode_bins);
        c1_worst = c1_worst.max(b.c_diffs[0][0].abs()).max(d.c_diffs[0][0].abs());
        dis_worst = dis_worst.max(d.tvd_multi_mode_bins);
        if b.inequivalent && b.tvd_multi_mode_bins > PHASE_VISIBLE {
            visible += 1;
        }
        let v = random_dressing(&u, phase_seed)?;
        dressing_worst = dressing_worst.max(tvd(
            &binned_distribution_exact(&u, &bos, &p)?,
            &binned_distribution_exact(&v, &bos, &p)?,
        )?);
        let c1 = char_poly_coefficients(&u, &bos, &[1])?.coefficients[1] - char_poly_coefficients(&v, &bos, &[1])?.coefficients[1];
        c1_worst = c1_worst.max(c1.abs());
    }
    let frac = visible as f64 / PHASE_TRIALS as f64;
    verdict(
        single_worst <= PHASE_ZERO
            && c1_worst <= PHASE_ZERO
            && dis_worst <= PHASE_ZERO
            && frac >= PHASE_MIN_VISIBLE_FRACTION,
        format!(
            "single-mode max TVD {single_worst:.1e}, c1 max diff {c1_worst:.1e}, distinguishable two-mode max TVD \
             {dis_worst:.1e}; bosonic two-mode TVD > {PHASE_VISIBLE:.0e} in {frac:.2} (need {PHASE_MIN_VISIBLE_FRACTION}); \
             dressing max TVD {dressing_worst:.1e}"
        ),
    )
}

fn sweep_and_moments() -> Result<Verdict> {
    let ensemble = EnsembleSpec::new(SWEEP_UNITARIES, SWEEP_MODES, seed(17, 0))?.unitaries()?;
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let mut pass = true;
    let mut lines = Vec::new();
    for bin in [vec![1, 2], vec![1]] {
        let p = ModePartition::single(SWEEP_MODES, &bin)?;
        let r = distinguishability_sweep(&ensemble, 3, &p, &grid)?;
        let mut worst_rise = f64::NEG_INFINITY;
        let mut ok = true;
        for i in 1..grid.len() {
            let rise = r.mean[i] - r.mean[i - 1];
            let allowance = SWEEP_SIGMAS * r.stderr[i].hypot(r.stderr[i - 1]);
            worst_rise = worst_rise.max(rise);
            ok &= rise <= allowance;
        }
        let end = *r.mean.last().expect("grid");
        ok &= end.abs() <= SWEEP_ENDPOINT;
        pass &= ok;
        lines.push(format!(
            "bin {}: mean TVD {:.4} at x=0 -> {end:.1e} at x=1, largest step {worst_rise:+.2e}",
            p, r.mean[0]
        ));
    }
    let moments = [
        MomentSpec::from_indices(&[1, 1, 1, 1])?,
        MomentSpec::from_indices(&[2, 3, 2, 3])?,
        MomentSpec::from_indices(&[1, 2, 2, 1])?,
        MomentSpec::from_indices(&[1, 1, 1, 1, 1, 1, 1, 1])?,
        MomentSpec::from_indices(&[1, 1, 2, 2, 1, 1, 2, 2])?,
        MomentSpec::from_indices(&[1, 1, 2, 2, 1, 2, 2, 1])?,
        MomentSpec::from_indices(&[1, 2, 1, 2, 1, 2, 1, 2])?,
    ];
    let mut misses = 0;
    for (j, spec) in moments.iter().enumerate() {
        let c = weingarten_moment_oracle(4, spec, MOMENT_DRAWS, seed(18, j))?;
        if !c.within(MOMENT_SIGMAS) {
            misses += 1;
        }
    }
    pass &= misses == 0;
    lines.push(format!("{} Haar moments at m=4, {misses} outside {MOMENT_SIGMAS}σ", moments.len()));
    verdict(pass, lines.join("; "))
}

fn median_time(runs: usize, mut f: impl FnMut() -> Result<()>) -> Result<Duration> {
    f()?;
    let mut t = Vec::with_capacity(runs);
    for _ in 0..runs {
        let s = Instant::now();
        f()?;
        t.push(s.elapsed());
    }
    t.sort();
    Ok(t[runs / 2])
}

fn performance() -> Result<Verdict> {
    let u = haar_unitary(4, seed(19, 0))?;
    let x = GramMatrix::random_real(3, seed(20, 0));
    let p = ModePartition::new(4, vec![vec![1, 2], vec![3, 4]])?;
    let small = median_time(11, || binned_distribution_exact(&u, &x, &p).map(|_| ()))?;

    let u = haar_unitary(20, seed(19, 1))?;
    let x = GramMatrix::random_real(10, seed(20, 1));
    let bin = ModePartition::single(20, &(1..=10).collect::<Vec<_>>())?;
    let start = Instant::now();
    let d = binned_distribution_exact(&u, &x, &bin)?;
    let large = start.elapsed();
    let total: f64 = d.values().iter().sum();
    verdict(
        small < SMALL_BUDGET && large < LARGE_BUDGET && (total - 1.0).abs() < 1e-8,
        format!(
            "n=3 m=4 K=2 median {small:.2?} (budget {SMALL_BUDGET:?}); n=10 m=20 single bin {large:.2?} (budget {LARGE_BUDGET:?})"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("binned distribution matches brute-force binning", oracle_equivalence),
        ("two-photon interference on a balanced beamsplitter", hom_suite),
        ("Haar-averaged single-bin variance vs closed form", haar_variance),
        ("bunching is maximal for indistinguishable photons", bunching_maximality),
        ("noise model reaches the reported amplitude fidelity", noise_anchor),
        ("binned TVD lower-bounds the full TVD", lower_bound_chain),
        ("randomized permanents stay within the reported error", gurvits_coverage),
        ("phase sensitivity of single- vs multi-mode bins", phase_sensitivity),
        ("distinguishability sweep and Haar moments", sweep_and_moments),
        ("exact binned distributions are fast", performance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (mark, detail) = match f() {
            Ok(v) if v.pass => ("PASS", v.detail),
            Ok(v) => ("FAIL", v.detail),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if mark == "FAIL" {
            failed += 1;
        }
        println!("{mark} {:>2} {name}: {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
