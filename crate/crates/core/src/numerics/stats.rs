//! Sample statistics for the selection experiments.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Finite discrete law on ℝ: atoms with nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteLaw {
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("law has no atoms".into()));
        }
        if atoms.iter().any(|(x, w)| !x.is_finite() || !(*w >= 0.0)) {
            return Err(Error::InvalidInput("atoms must be finite with nonnegative weight".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidInput("law has zero mass".into()));
        }
        for a in &mut atoms {
            a.1 /= total;
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { atoms })
    }

    /// Empirical law of a sample.
    pub fn empirical(sample: &[f64]) -> Result<Self> {
        Self::new(sample.iter().map(|&x| (x, 1.0)).collect())
    }

    /// `½ δ_{-a} + ½ δ_{a}`.
    pub fn symmetric_pair(a: f64) -> Self {
        Self::new(vec![(-a, 0.5), (a, 0.5)]).expect("finite atoms")
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// Wasserstein-1 distance `∫ |F_a − F_b| dx` between two discrete laws.
pub fn wasserstein1_1d(a: &DiscreteLaw, b: &DiscreteLaw) -> f64 {
    let (xa, xb) = (&a.atoms, &b.atoms);
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0_f64, 0.0_f64);
    let mut prev: Option<f64> = None;
    let mut total = 0.0;
    while i < xa.len() || j < xb.len() {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(p), Some(q)) => p.0.min(q.0),
            (Some(p), None) => p.0,
            (None, Some(q)) => q.0,
            (None, None) => unreachable!(),
        };
        if let Some(p) = prev {
            total += (fa - fb).abs() * (x - p);
        }
        while i < xa.len() && xa[i].0 == x {
            fa += xa[i].1;
            i += 1;
        }
        while j < xb.len() && xb[j].0 == x {
            fb += xb[j].1;
            j += 1;
        }
        prev = Some(x);
    }
    total
}

/// Wasserstein-1 between two samples.
pub fn wasserstein1_samples(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(wasserstein1_1d(&DiscreteLaw::empirical(a)?, &DiscreteLaw::empirical(b)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KuiperTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// Smallest sample accepted by [`circular_uniformity`].
pub const KUIPER_MIN_SAMPLE: usize = 30;

/// Kuiper's test of angles in `[0, 2π)` against the uniform law, with the
/// asymptotic tail `Q(λ) = 2 Σ (4j²λ² − 1) exp(−2j²λ²)` evaluated at
/// `λ = (√n + 0.155 + 0.24/√n) V`.
pub fn circular_uniformity(angles: &[f64]) -> Result<KuiperTest> {
    let n = angles.len();
    if n < KUIPER_MIN_SAMPLE {
        return Err(Error::InvalidInput(format!(
            "Kuiper test needs at least {KUIPER_MIN_SAMPLE} angles, got {n}"
        )));
    }
    let mut u: Vec<f64> = angles
        .iter()
        .map(|a| a.rem_euclid(2.0 * PI) / (2.0 * PI))
        .collect();
    u.sort_by(f64::total_cmp);
    let nf = n as f64;
    let (mut d_plus, mut d_minus) = (0.0f64, 0.0f64);
    for (i, &x) in u.iter().enumerate() {
        d_plus = d_plus.max((i + 1) as f64 / nf - x);
        d_minus = d_minus.max(x - i as f64 / nf);
    }
    let v = d_plus + d_minus;
    let sq = nf.sqrt();
    let lambda = (sq + 0.155 + 0.24 / sq) * v;
    Ok(KuiperTest {
        statistic: v,
        p_value: kuiper_tail(lambda),
    })
}

fn kuiper_tail(lambda: f64) -> f64 {
    if lambda < 0.4 {
        return 1.0;
    }
    let l2 = lambda * lambda;
    let mut sum = 0.0;
    for j in 1..=100 {
        let j2 = (j * j) as f64;
        let term = (4.0 * j2 * l2 - 1.0) * (-2.0 * j2 * l2).exp();
        sum += term;
        if term.abs() <= 1e-16 * sum.abs() {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance (0 for fewer than two points).
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

pub fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// `[p̂ − kσ, p̂ + kσ]` with `σ = sqrt(p0 (1 − p0) / n)`.
pub fn binomial_band(p0: f64, n: usize, k: f64) -> (f64, f64) {
    let s = (p0 * (1.0 - p0) / n as f64).sqrt();
    (p0 - k * s, p0 + k * s)
}
