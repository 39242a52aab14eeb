use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interference::GramMatrix;
use crate::linalg::UnitaryMatrix;

/// Largest photon number for the `(n!)²` brute-force probability.
pub const BRUTE_FORCE_PHOTON_CAP: usize = 6;
/// Largest mode count for full-distribution enumeration.
pub const ENUMERATION_MODE_CAP: usize = 12;

/// Negative or imaginary residues above this magnitude signal bad inputs.
const RESIDUE_ERROR: f64 = 1e-9;

/// Photons in the first `n` of `m` input modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InputConfig {
    n: usize,
    m: usize,
}

impl InputConfig {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || n > m {
            return Err(Error::arg(format!("need 1 <= n <= m, got n={n}, m={m}")));
        }
        Ok(InputConfig { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

/// Photon counts per output mode.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutcomePattern(Vec<usize>);

impl OutcomePattern {
    pub fn new(counts: Vec<usize>) -> Self {
        OutcomePattern(counts)
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn photons(&self) -> usize {
        self.0.iter().sum()
    }

    /// Output mode of each photon, nondecreasing (0-based).
    pub fn mode_list(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(mode, &c)| std::iter::repeat_n(mode, c))
            .collect()
    }

    fn multiplicity(&self) -> f64 {
        self.0.iter().map(|&c| factorial(c)).product()
    }
}

impl fmt::Display for OutcomePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for OutcomePattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::arg(format!("bad photon count {t:?} in pattern {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(OutcomePattern)
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// All patterns of `n` photons in `m` modes, lexicographically ordered.
pub fn enumerate_patterns(n: usize, m: usize) -> Vec<OutcomePattern> {
    fn rec(mode: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<OutcomePattern>) {
        let m = cur.len();
        if mode == m - 1 {
            cur[mode] = left;
            out.push(OutcomePattern(cur.clone()));
            return;
        }
        for c in 0..=left {
            cur[mode] = c;
            rec(mode + 1, left - c, cur, out);
        }
    }
    if m == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    rec(0, n, &mut vec![0; m], &mut out);
    out
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    // Heap's algorithm.
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Probability of output pattern `s` for photons in the first `n` input modes:
/// `(1/Π s_j!) Σ_{σ,τ} Π_k x_{τ(k),σ(k)} U_{d_k,σ(k)} U*_{d_k,τ(k)}`.
pub fn outcome_probability(u: &UnitaryMatrix, x: &GramMatrix, s: &OutcomePattern) -> Result<f64> {
    let n = x.n();
    let m = u.dim();
    if s.m() != m {
        return Err(Error::dim(format!("pattern has {} modes, unitary has {m}", s.m())));
    }
    if s.photons() != n {
        return Err(Error::dim(format!(
            "pattern holds {} photons, Gram matrix describes {n}",
            s.photons()
        )));
    }
    if n > m {
        return Err(Error::dim(format!("{n} photons do not fit in {m} input modes")));
    }
    if n > BRUTE_FORCE_PHOTON_CAP {
        return Err(Error::size(format!(
            "{n} photons exceed the brute-force cap of {BRUTE_FORCE_PHOTON_CAP}"
        )));
    }
    let perms = permutations(n);
    probability_with(u, x, s, &perms)
}

fn probability_with(u: &UnitaryMatrix, x: &GramMatrix, s: &OutcomePattern, perms: &[Vec<usize>]) -> Result<f64> {
    let n = x.n();
    let d = s.mode_list();
    // a[k][p] = U_{d_k, p}
    let a: Vec<Vec<Complex64>> = d.iter().map(|&row| (0..n).map(|p| u.entry(row, p)).collect()).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for sigma in perms {
        let left: Complex64 = (0..n).map(|k| a[k][sigma[k]]).product();
        if left == Complex64::new(0.0, 0.0) {
            continue;
        }
        for tau in perms {
            let mut term = left;
            for k in 0..n {
                term *= a[k][tau[k]].conj() * x.complex_entry(tau[k], sigma[k]);
            }
            total += term;
        }
    }
    let p = total / s.multiplicity();
    clean_probability(p)
}

fn clean_probability(p: Complex64) -> Result<f64> {
    if p.im.abs() > RESIDUE_ERROR {
        return Err(Error::invariant(format!(
            "probability has imaginary part {:.3e}",
            p.im
        )));
    }
    if p.re < -RESIDUE_ERROR {
        return Err(Error::invariant(format!(
            "negative probability {:.3e}; the Gram matrix is inconsistent",
            p.re
        )));
    }
    Ok(p.re.max(0.0))
}

/// Probability table over all `n`-photon output patterns.
#[derive(Clone, Debug, PartialEq)]
pub struct FullDistribution {
    m: usize,
    n: usize,
    probs: BTreeMap<OutcomePattern, f64>,
}

impl FullDistribution {
    /// Checks nonnegativity and normalization to `1e-9`.
    pub fn new(m: usize, n: usize, probs: BTreeMap<OutcomePattern, f64>) -> Result<Self> {
        for (s, &p) in &probs {
            if s.m() != m || s.photons() != n {
                return Err(Error::dim(format!("pattern {s} is not an {n}-photon pattern on {m} modes")));
            }
            if !p.is_finite() || p < -1e-12 {
                return Err(Error::invariant(format!("probability {p} for pattern {s}")));
            }
        }
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invariant(format!("probabilities sum to {total}")));
        }
        let probs = probs.into_iter().map(|(s, p)| (s, p.max(0.0))).collect();
        Ok(FullDistribution { m, n, probs })
    }

    /// Uniform distribution over all `C(n+m-1, n)` patterns.
    pub fn uniform(n: usize, m: usize) -> Result<Self> {
        check_enumeration_caps(n, m)?;
        let patterns = enumerate_patterns(n, m);
        let p = 1.0 / patterns.len() as f64;
        Ok(FullDistribution {
            m,
            n,
            probs: patterns.into_iter().map(|s| (s, p)).collect(),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &BTreeMap<OutcomePattern, f64> {
        &self.probs
    }

    pub fn prob(&self, s: &OutcomePattern) -> f64 {
        self.probs.get(s).copied().unwrap_or(0.0)
    }
}

fn check_enumeration_caps(n: usize, m: usize) -> Result<()> {
    if n > BRUTE_FORCE_PHOTON_CAP {
        return Err(Error::size(format!(
            "{n} photons exceed the enumeration cap of {BRUTE_FORCE_PHOTON_CAP}"
        )));
    }
    if m > ENUMERATION_MODE_CAP {
        return Err(Error::size(format!(
            "{m} modes exceed the enumeration cap of {ENUMERATION_MODE_CAP}"
        )));
    }
    Ok(())
}

/// Every output pattern's probability by brute force.
pub fn full_distribution(u: &UnitaryMatrix, x: &GramMatrix, cfg: &InputConfig) -> Result<FullDistribution> {
    if u.dim() != cfg.m() {
        return Err(Error::dim(format!("unitary has {} modes, config says {}", u.dim(), cfg.m())));
    }
    if x.n() != cfg.n() {
        return Err(Error::dim(format!("Gram matrix has {} photons, config says {}", x.n(), cfg.n())));
    }
    check_enumeration_caps(cfg.n(), cfg.m())?;
    let perms = permutations(cfg.n());
    let patterns = enumerate_patterns(cfg.n(), cfg.m());
    let probs: Vec<f64> = patterns
        .par_iter()
        .map(|s| probability_with(u, x, s, &perms))
        .collect::<Result<_>>()?;
    FullDistribution::new(cfg.m(), cfg.n(), patterns.into_iter().zip(probs).collect())
}
