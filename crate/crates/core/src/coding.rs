//! Block codes for the two-sender channel and their success probability.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::correlation::Correlation;
use crate::error::{check_unit, Error, Result};
use crate::info::ln_binomial;
use crate::jamming::{floor_budget, JammerStrategy};
use crate::rng::stream;
use crate::sim::{exact_output_distribution, transmit_block, BlockTrace};

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Maps a received word to a message pair, or `None` for an erasure.
#[derive(Debug, Clone, PartialEq)]
pub enum Decoder {
    /// Majority vote on `c^n` gives Alice's message; Bob's is always 0.
    Majority,
    Table(HashMap<BitString, (usize, usize)>),
}

impl Decoder {
    pub fn decode(&self, c: &BitString) -> Option<(usize, usize)> {
        match self {
            Decoder::Majority => Some(((2 * c.weight() > c.len()) as usize, 0)),
            Decoder::Table(t) => t.get(c).copied(),
        }
    }
}

/// Codebooks for Alice (`U` words) and Bob (`V` words) plus a decoder.
/// A decoder is a function, so its decoding sets are disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Code {
    n: usize,
    codewords_a: Vec<BitString>,
    codewords_b: Vec<BitString>,
    decoder: Decoder,
}

impl Code {
    pub fn new(
        codewords_a: Vec<BitString>,
        codewords_b: Vec<BitString>,
        decoder: Decoder,
    ) -> Result<Self> {
        let n = codewords_a
            .first()
            .ok_or_else(|| Error::InvalidParams("Alice needs at least one codeword".into()))?
            .len();
        if codewords_b.is_empty() {
            return Err(Error::InvalidParams(
                "Bob needs at least one codeword".into(),
            ));
        }
        if n == 0 {
            return Err(Error::InvalidParams("codewords must be non-empty".into()));
        }
        if let Some(bad) = codewords_a
            .iter()
            .chain(&codewords_b)
            .find(|w| w.len() != n)
        {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        Ok(Code {
            n,
            codewords_a,
            codewords_b,
            decoder,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn message_counts(&self) -> (usize, usize) {
        (self.codewords_a.len(), self.codewords_b.len())
    }

    pub fn codeword_a(&self, u: usize) -> &BitString {
        &self.codewords_a[u]
    }

    pub fn codeword_b(&self, v: usize) -> &BitString {
        &self.codewords_b[v]
    }

    pub fn decode(&self, c: &BitString) -> Option<(usize, usize)> {
        self.decoder.decode(c)
    }
}

/// Alice repeats her bit `n` times, Bob always sends zeros, majority decoding.
pub fn repetition_code(n: usize) -> Result<Code> {
    if n.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "repetition length must be odd, got {n}"
        )));
    }
    Code::new(
        vec![BitString::zeros(n), BitString::ones(n)],
        vec![BitString::zeros(n)],
        Decoder::Majority,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Fraction of positions where `e ⊕ s = 1`, over all trials.
    pub empirical_flip_rate: f64,
}

impl SuccessEstimate {
    pub fn from_counts(trials: u64, successes: u64, flips: u64, n: usize) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials);
        let rate = successes as f64 / trials as f64;
        SuccessEstimate {
            trials,
            successes,
            rate,
            ci_low: ci_low.min(rate),
            ci_high: ci_high.max(rate),
            empirical_flip_rate: flips as f64 / (trials as f64 * n as f64),
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        (self.ci_low..=self.ci_high).contains(&p)
    }
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Replays trial `trial` of an experiment: uniform messages, one block.
/// Returns the sent pair and the block trace.
pub fn trial_trace(
    code: &Code,
    corr: &Correlation,
    jammer: &JammerStrategy,
    lambda: f64,
    seed: u64,
    trial: u64,
) -> Result<((usize, usize), BlockTrace)> {
    let mut rng = stream(seed, trial);
    let (u_count, v_count) = code.message_counts();
    let u = rng.random_range(0..u_count);
    let v = rng.random_range(0..v_count);
    let trace = transmit_block(
        corr,
        code.codeword_a(u),
        code.codeword_b(v),
        jammer,
        lambda,
        &mut rng,
    )?;
    Ok(((u, v), trace))
}

fn run_trial(
    code: &Code,
    corr: &Correlation,
    jammer: &JammerStrategy,
    lambda: f64,
    seed: u64,
    trial: u64,
) -> Result<(u64, u64)> {
    let (sent, trace) = trial_trace(code, corr, jammer, lambda, seed, trial)?;
    let ok = code.decode(&trace.c) == Some(sent);
    Ok((ok as u64, trace.total_noise().weight() as u64))
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    Ok(())
}

/// Monte Carlo success probability for uniform messages. Trial `i` uses
/// stream `(seed, i)`, so the result does not depend on the thread pool.
pub fn estimate_success(
    code: &Code,
    corr: &Correlation,
    jammer: &JammerStrategy,
    lambda: f64,
    trials: u64,
    seed: u64,
) -> Result<SuccessEstimate> {
    check_trials(trials)?;
    let outcomes: Vec<(u64, u64)> = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(code, corr, jammer, lambda, seed, i))
        .collect::<Result<_>>()?;
    Ok(summarize(&outcomes, trials, code.n()))
}

/// Single-threaded [`estimate_success`]; bit-identical output.
pub fn estimate_success_serial(
    code: &Code,
    corr: &Correlation,
    jammer: &JammerStrategy,
    lambda: f64,
    trials: u64,
    seed: u64,
) -> Result<SuccessEstimate> {
    check_trials(trials)?;
    let outcomes: Vec<(u64, u64)> = (0..trials)
        .map(|i| run_trial(code, corr, jammer, lambda, seed, i))
        .collect::<Result<_>>()?;
    Ok(summarize(&outcomes, trials, code.n()))
}

fn summarize(outcomes: &[(u64, u64)], trials: u64, n: usize) -> SuccessEstimate {
    let (successes, flips) = outcomes
        .iter()
        .fold((0, 0), |(s, f), &(ok, w)| (s + ok, f + w));
    SuccessEstimate::from_counts(trials, successes, flips, n)
}

/// Exact success probability of the repetition code against the greedy
/// jammer: base noise weight `b ~ Bin(n, base_flip)`, then the jammer adds
/// `min(⌊nΛ⌋, n − b)` flips and majority decoding succeeds iff the total
/// stays below `n/2`.
pub fn analytic_majority_success(n: usize, base_flip: f64, lambda: f64) -> Result<f64> {
    if n.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!("n must be odd, got {n}")));
    }
    check_unit("base_flip", base_flip)?;
    check_unit("lambda", lambda)?;
    let budget = floor_budget(lambda, n);
    let log_pmf = |b: usize| -> f64 {
        let ones = match (b, base_flip) {
            (0, _) => 0.0,
            (_, 0.0) => return f64::NEG_INFINITY,
            (b, f) => b as f64 * f.ln(),
        };
        let zeros = match (n - b, base_flip) {
            (0, _) => 0.0,
            (_, 1.0) => return f64::NEG_INFINITY,
            (k, f) => k as f64 * (-f).ln_1p(),
        };
        ln_binomial(n, b) + ones + zeros
    };
    // Kahan summation over the succeeding weights
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for b in 0..=n {
        if 2 * (b + budget.min(n - b)) < n {
            let term = log_pmf(b).exp() - carry;
            let next = sum + term;
            carry = (next - sum) - term;
            sum = next;
        }
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// Exact success probability by enumeration, for `n ≤ 6`.
pub fn exact_success(
    code: &Code,
    corr: &Correlation,
    jammer: &JammerStrategy,
    lambda: f64,
) -> Result<f64> {
    let n = code.n();
    let (u_count, v_count) = code.message_counts();
    let mut total = 0.0;
    for u in 0..u_count {
        for v in 0..v_count {
            let dist = exact_output_distribution(
                corr,
                code.codeword_a(u),
                code.codeword_b(v),
                jammer,
                lambda,
            )?;
            total += dist
                .iter()
                .enumerate()
                .filter(|(idx, _)| {
                    code.decode(&BitString::from_index(*idx as u64, n)) == Some((u, v))
                })
                .map(|(_, p)| p)
                .sum::<f64>();
        }
    }
    Ok(total / (u_count * v_count) as f64)
}

/// One line of a batch experiment CSV; field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub trials: u64,
    pub modulation: String,
    pub jammer: String,
    pub lambda: f64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub empirical_flip_rate: f64,
    pub seed: u64,
}

pub const EXPERIMENT_CSV_HEADER: &str =
    "n,trials,modulation,jammer,lambda,rate,ci_low,ci_high,empirical_flip_rate,seed";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{
        deterministic_correlation, epr_correlation, pr_box, BoxStrength, DeterministicModulator,
        ExtremalMap,
    };
    use crate::jamming::{greedy_jammer, JammerBudget};

    const EPR_FLIP: f64 = 0.146_446_609_406_726_24;

    fn id_const0() -> Correlation {
        deterministic_correlation(DeterministicModulator::new(
            ExtremalMap::Identity,
            ExtremalMap::Const0,
        ))
    }

    #[test]
    fn majority_decoding() {
        let code = repetition_code(3).unwrap();
        assert_eq!(code.decode(&"101".parse().unwrap()), Some((1, 0)));
        assert_eq!(code.decode(&"001".parse().unwrap()), Some((0, 0)));
        assert!(repetition_code(4).is_err());
        assert_eq!(code.message_counts(), (2, 1));
    }

    #[test]
    fn decoding_sets_partition_the_output_space() {
        for n in (1..=11).step_by(2) {
            let code = repetition_code(n).unwrap();
            let mut sizes = [0usize; 2];
            for idx in 0..1u64 << n {
                let (u, v) = code.decode(&BitString::from_index(idx, n)).unwrap();
                assert_eq!(v, 0);
                sizes[u] += 1;
            }
            assert_eq!(sizes[0] + sizes[1], 1 << n);
            assert_eq!(sizes[0], sizes[1]);
        }
    }

    #[test]
    fn code_validation() {
        assert!(Code::new(vec![], vec![BitString::zeros(2)], Decoder::Majority).is_err());
        assert!(Code::new(
            vec![BitString::zeros(2)],
            vec![BitString::zeros(3)],
            Decoder::Majority
        )
        .is_err());
        let table = HashMap::from([(BitString::zeros(1), (0, 0))]);
        let code = Code::new(
            vec![BitString::zeros(1)],
            vec![BitString::zeros(1)],
            Decoder::Table(table),
        )
        .unwrap();
        assert_eq!(code.decode(&BitString::ones(1)), None);
    }

    #[test]
    fn wilson_contains_rate() {
        for (s, t) in [(0, 10), (10, 10), (5, 10), (999, 1000), (1, 1)] {
            let (lo, hi) = wilson_interval(s, t);
            let p = s as f64 / t as f64;
            assert!(lo <= p + 1e-15 && p <= hi + 1e-15 && lo >= 0.0 && hi <= 1.0);
        }
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
    }

    #[test]
    fn noiseless_box_always_succeeds() {
        let code = repetition_code(3).unwrap();
        let est = estimate_success(
            &code,
            &pr_box(BoxStrength::new(0.25).unwrap()),
            &JammerStrategy::Silent,
            0.0,
            200,
            3,
        )
        .unwrap();
        assert_eq!(est.rate, 1.0);
        assert_eq!(est.empirical_flip_rate, 0.0);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let code = repetition_code(31).unwrap();
        let jammer = greedy_jammer(JammerBudget::new(0.3, 31).unwrap());
        let corr = epr_correlation();
        let a = estimate_success(&code, &corr, &jammer, 0.3, 500, 12).unwrap();
        let b = estimate_success_serial(&code, &corr, &jammer, 0.3, 500, 12).unwrap();
        assert_eq!(a, b);
        let c = estimate_success(&code, &corr, &jammer, 0.3, 500, 13).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn analytic_examples() {
        assert_eq!(analytic_majority_success(11, 0.0, 0.0).unwrap(), 1.0);
        let v = analytic_majority_success(1001, 0.25, 0.25).unwrap();
        // 40-digit reference: 0.50970551943824509688...
        assert!((v - 0.509_705_519_438_245).abs() < 1e-12, "{v}");
        assert!(analytic_majority_success(2001, 0.25, 0.25).unwrap() < v);
        let epr = analytic_majority_success(1001, EPR_FLIP, 0.3).unwrap();
        assert!((epr - 0.999_998_062_269_619_7).abs() < 1e-12, "{epr}");
        let classical = analytic_majority_success(1001, 0.25, 0.3).unwrap();
        assert!(
            (classical - 1.018_084_709_566_25e-4).abs() < 1e-12,
            "{classical}"
        );
        assert!(analytic_majority_success(10, 0.1, 0.1).is_err());
    }

    #[test]
    fn analytic_monotone_on_grid() {
        for n in [1usize, 11, 101] {
            for i in 0..=20 {
                let lambda = i as f64 / 20.0;
                let mut prev = f64::INFINITY;
                for j in 0..=25 {
                    let f = 0.5 * j as f64 / 25.0;
                    let v = analytic_majority_success(n, f, lambda).unwrap();
                    assert!(v <= prev + 1e-12);
                    prev = v;
                }
            }
            for j in 0..=25 {
                let f = 0.5 * j as f64 / 25.0;
                let mut prev = f64::INFINITY;
                for i in 0..=20 {
                    let v = analytic_majority_success(n, f, i as f64 / 20.0).unwrap();
                    assert!(v <= prev + 1e-12);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn exact_success_examples() {
        let one = repetition_code(1).unwrap();
        let v = exact_success(&one, &id_const0(), &JammerStrategy::Silent, 0.0).unwrap();
        assert!((v - 0.75).abs() < 1e-12);
        let three = repetition_code(3).unwrap();
        let v = exact_success(&three, &epr_correlation(), &JammerStrategy::Silent, 0.0).unwrap();
        let f = EPR_FLIP;
        assert!((v - (1.0 - 3.0 * f * f + 2.0 * f * f * f)).abs() < 1e-12);
        assert!((v - 0.941_942).abs() < 1e-6);
        let full = greedy_jammer(JammerBudget::new(1.0, 3).unwrap());
        let v = exact_success(&three, &epr_correlation(), &full, 1.0).unwrap();
        assert!(v <= 0.5);
    }

    #[test]
    fn exact_matches_analytic_for_greedy() {
        for n in [1usize, 3, 5] {
            for lambda in [0.0, 0.2, 0.4, 0.6] {
                let jammer = greedy_jammer(JammerBudget::new(lambda, n).unwrap());
                let code = repetition_code(n).unwrap();
                let exact = exact_success(&code, &epr_correlation(), &jammer, lambda).unwrap();
                let analytic = analytic_majority_success(n, EPR_FLIP, lambda).unwrap();
                assert!((exact - analytic).abs() < 1e-12, "n={n} lambda={lambda}");
            }
        }
    }
}
