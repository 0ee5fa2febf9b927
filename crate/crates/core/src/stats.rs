//! Statistical tests backing the distinguisher batteries: bit-frequency and
//! runs tests on ciphertext pools, a two-sample proportion test, and
//! Bonferroni-corrected reporting.

use serde::Serialize;
use statrs::function::erf::erfc;

/// Two-sided tail probability for a chi-square statistic with 1 dof.
pub fn chi2_1dof_p(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0;
    }
    erfc((x / 2.0).sqrt())
}

/// Two-sided p-value of a standard normal z statistic.
pub fn normal_two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Chi-square frequency (monobit) test: are ones and zeros balanced?
pub fn freq_test(bits: &[bool]) -> f64 {
    if bits.is_empty() {
        return 1.0;
    }
    let n = bits.len() as f64;
    let ones = bits.iter().filter(|&&b| b).count() as f64;
    let zeros = n - ones;
    let expected = n / 2.0;
    let chi2 = (ones - expected).powi(2) / expected + (zeros - expected).powi(2) / expected;
    chi2_1dof_p(chi2)
}

/// Wald-Wolfowitz runs test against serial dependence in the stream.
pub fn runs_test(bits: &[bool]) -> f64 {
    let n = bits.len();
    if n < 2 {
        return 1.0;
    }
    let n1 = bits.iter().filter(|&&b| b).count();
    let n2 = n - n1;
    if n1 == 0 || n2 == 0 {
        return 0.0;
    }
    let runs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let n1 = n1 as f64;
    let n2 = n2 as f64;
    let nf = n as f64;
    let mean = 2.0 * n1 * n2 / nf + 1.0;
    let var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - nf) / (nf * nf * (nf - 1.0));
    if var <= 0.0 {
        return 0.0;
    }
    normal_two_sided_p((runs as f64 - mean) / var.sqrt())
}

/// Two-sample proportion test on the ones-rate of two bit pools.
pub fn two_sample_freq_test(a: &[bool], b: &[bool]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 1.0;
    }
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let pa = a.iter().filter(|&&x| x).count() as f64 / na;
    let pb = b.iter().filter(|&&x| x).count() as f64 / nb;
    let pooled = (pa * na + pb * nb) / (na + nb);
    let denom = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    if denom == 0.0 {
        return if pa == pb { 1.0 } else { 0.0 };
    }
    normal_two_sided_p((pa - pb) / denom)
}

#[derive(Debug, Clone, Serialize)]
pub struct TestResult {
    pub name: String,
    pub p_value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryReport {
    pub alpha: f64,
    pub bonferroni_threshold: f64,
    pub tests: Vec<TestResult>,
    pub pass: bool,
}

/// Applies a Bonferroni correction to named p-values: the battery rejects
/// only if some test's p-value falls below alpha / m.
pub fn battery(named_pvalues: Vec<(String, f64)>, alpha: f64) -> BatteryReport {
    let m = named_pvalues.len().max(1);
    let threshold = alpha / m as f64;
    let tests: Vec<TestResult> = named_pvalues
        .into_iter()
        .map(|(name, p)| TestResult { name, p_value: p, pass: p >= threshold })
        .collect();
    let pass = tests.iter().all(|t| t.pass);
    BatteryReport { alpha, bonferroni_threshold: threshold, tests, pass }
}

/// 95% confidence interval for a binomial rate (normal approximation).
pub fn binomial_ci95(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let p = successes as f64 / trials as f64;
    let half = 1.96 * (p * (1.0 - p) / trials as f64).sqrt();
    ((p - half).max(0.0), (p + half).min(1.0))
}

/// Binomial standard deviation of an empirical rate.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{domain, SeedStream};

    #[test]
    fn chi2_matches_known_quantile() {
        // P(chi2_1 > 3.841) ~ 0.05.
        let p = chi2_1dof_p(3.841);
        assert!((p - 0.05).abs() < 0.001, "p {p}");
        assert!(chi2_1dof_p(0.0) > 0.999);
    }

    #[test]
    fn uniform_bits_pass_both_tests() {
        let mut s = SeedStream::derive(0xace, domain::TRIAL, 0);
        let bits = s.bits(100_000);
        assert!(freq_test(&bits) > 0.001);
        assert!(runs_test(&bits) > 0.001);
    }

    #[test]
    fn biased_bits_fail_frequency() {
        let mut s = SeedStream::derive(0xace, domain::TRIAL, 1);
        let bits: Vec<bool> = (0..10_000).map(|_| s.f64() < 0.45).collect();
        assert!(freq_test(&bits) < 1e-6);
    }

    #[test]
    fn alternating_bits_fail_runs() {
        let bits: Vec<bool> = (0..10_000).map(|i| i % 2 == 0).collect();
        assert!(freq_test(&bits) > 0.9);
        assert!(runs_test(&bits) < 1e-9);
    }

    #[test]
    fn two_sample_detects_rate_gap() {
        let mut s = SeedStream::derive(0xace, domain::TRIAL, 2);
        let a: Vec<bool> = (0..20_000).map(|_| s.f64() < 0.5).collect();
        let b: Vec<bool> = (0..20_000).map(|_| s.f64() < 0.55).collect();
        assert!(two_sample_freq_test(&a, &b) < 1e-6);
        let c: Vec<bool> = (0..20_000).map(|_| s.f64() < 0.5).collect();
        assert!(two_sample_freq_test(&a, &c) > 0.001);
    }

    #[test]
    fn bonferroni_gate() {
        let report = battery(
            vec![("a".into(), 0.5), ("b".into(), 0.009), ("c".into(), 0.9)],
            0.01,
        );
        assert!(report.pass);
        let report = battery(vec![("a".into(), 0.5), ("b".into(), 0.0001)], 0.01);
        assert!(!report.pass);
    }
}
