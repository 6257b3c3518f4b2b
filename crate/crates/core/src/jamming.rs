//! Admissible jammer strategies under the power constraint `Σ sᵢ ≤ ⌊nΛ⌋`.
//!
//! The jammer sees the whole pre-jamming noise string `e^n` before choosing
//! `s^n` (non-causal). Two strategies are provided: a greedy flipper that
//! spends its budget on clean positions, and the typical-set strategy that
//! makes `e^n ⊕ s^n` uniform over a window of type classes regardless of
//! the weight of `e^n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{check_unit, Error, Result};
use crate::info::{binomial, ln_binomial};

/// Largest block length for exact enumeration of induced distributions.
pub const EXACT_JAMMER_MAX_N: usize = 12;

/// Default slack for the typical-set strategy.
pub const DEFAULT_EPS: f64 = 0.05;

/// Upper end of the search for a feasible block length in sizing errors.
const SIZING_SEARCH_LIMIT: usize = 1_000_000;
const SHORT_SEARCH: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JammerBudget {
    pub lambda: f64,
    pub n: usize,
    pub budget: usize,
}

impl JammerBudget {
    pub fn new(lambda: f64, n: usize) -> Result<Self> {
        check_unit("lambda", lambda)?;
        Ok(JammerBudget {
            lambda,
            n,
            budget: floor_budget(lambda, n),
        })
    }
}

/// `⌊nΛ⌋`.
pub fn floor_budget(lambda: f64, n: usize) -> usize {
    (lambda * n as f64).floor() as usize
}

pub fn check_admissible(s: &BitString, budget: usize) -> bool {
    s.weight() <= budget
}

/// Number of clean positions the typical-set strategy flips:
/// `χ(K, t, k) = k − (t − t₁) + (Λ_n − K)`.
pub fn chi(k_span: usize, t: usize, k: usize, t1: usize, budget: usize) -> Result<usize> {
    if t < t1 || k > k_span {
        return Err(Error::InvalidParams(format!(
            "chi needs t ≥ t1 and k ≤ K (t = {t}, t1 = {t1}, k = {k}, K = {k_span})"
        )));
    }
    let value = (k + budget) as i64 - (t - t1) as i64 - k_span as i64;
    if value < 0 {
        return Err(Error::InvalidParams(format!(
            "chi(K={k_span}, t={t}, k={k}) = {value} is negative; need Λ_n − K − t2 + t1 ≥ 0"
        )));
    }
    Ok(value as usize)
}

/// Parameters of the typical-set strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalJammerParams {
    n: usize,
    lambda: f64,
    budget: usize,
    t1: usize,
    t2: usize,
    k_span: usize,
    weights: Vec<f64>,
}

impl TypicalJammerParams {
    /// Validates `Λ_n − K − t₂ + t₁ ≥ 0`, `t₁ + Λ_n ≤ n` and that the
    /// `K + 1` weights form a distribution.
    pub fn new(
        n: usize,
        lambda: f64,
        t1: usize,
        t2: usize,
        k_span: usize,
        weights: Vec<f64>,
    ) -> Result<Self> {
        check_unit("lambda", lambda)?;
        let budget = floor_budget(lambda, n);
        Self::with_budget(n, lambda, budget, t1, t2, k_span, weights)
    }

    /// As [`TypicalJammerParams::new`] with an explicit `Λ_n`.
    pub fn with_budget(
        n: usize,
        lambda: f64,
        budget: usize,
        t1: usize,
        t2: usize,
        k_span: usize,
        weights: Vec<f64>,
    ) -> Result<Self> {
        window_violation(n, budget, t1, t2, k_span)
            .map_or(Ok(()), |msg| Err(Error::InvalidParams(msg)))?;
        if weights.len() != k_span + 1 {
            return Err(Error::InvalidParams(format!(
                "expected {} weights, got {}",
                k_span + 1,
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w.is_nan() || w < 0.0) {
            return Err(Error::InvalidParams("negative weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!("weights sum to {total}")));
        }
        Ok(TypicalJammerParams {
            n,
            lambda,
            budget,
            t1,
            t2,
            k_span,
            weights,
        })
    }

    /// Window and span from a base noise level `η` and slack `ε`:
    /// `t₁ = ⌈(η−ε)n⌉`, `t₂ = ⌊(η+ε)n⌋`, `K = ⌊2εn⌋`. Weights follow
    /// [`lambda_weights`] at `p_star`, defaulting to the window midpoint.
    pub fn from_noise_level(
        n: usize,
        lambda: f64,
        eta: f64,
        eps: f64,
        p_star: Option<f64>,
    ) -> Result<Self> {
        check_unit("lambda", lambda)?;
        check_unit("eta", eta)?;
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "eps = {eps} must be positive"
            )));
        }
        let (t1, t2, k_span, budget) = eps_window(n, lambda, eta, eps);
        if let Some(reason) = window_violation(n, budget, t1, t2, k_span) {
            let hint = match minimal_feasible_n(n, lambda, eta, eps) {
                Some(m) => format!("smallest feasible block length above {n} is n = {m}"),
                None => format!(
                    "no feasible block length found above {n}; need about 4·eps < lambda ≤ 1 − eta + eps"
                ),
            };
            return Err(Error::Sizing { n, reason, hint });
        }
        let top = t1 + budget;
        let p_star = match p_star {
            Some(p) => check_unit("p_star", p)?,
            None => midpoint_target(n, top, k_span),
        };
        let weights = lambda_weights(n, top, k_span, p_star)?;
        Self::with_budget(n, lambda, budget, t1, t2, k_span, weights)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn window(&self) -> (usize, usize) {
        (self.t1, self.t2)
    }

    pub fn k_span(&self) -> usize {
        self.k_span
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn chi(&self, t: usize, k: usize) -> Result<usize> {
        if t > self.t2 {
            return Err(Error::InvalidParams(format!(
                "t = {t} above window top {}",
                self.t2
            )));
        }
        chi(self.k_span, t, k, self.t1, self.budget)
    }

    /// Types reachable by `e^n ⊕ s^n`: `χ(K, 0, k) = t₁ + Λ_n − K + k`.
    pub fn output_types(&self) -> impl Iterator<Item = usize> + '_ {
        let base = self.t1 + self.budget - self.k_span;
        (0..=self.k_span).map(move |k| base + k)
    }
}

fn eps_window(n: usize, lambda: f64, eta: f64, eps: f64) -> (usize, usize, usize, usize) {
    let nf = n as f64;
    let t1 = ((eta - eps) * nf).ceil().max(0.0) as usize;
    let t2 = (((eta + eps) * nf).floor() as usize).min(n);
    let k_span = (2.0 * eps * nf).floor() as usize;
    (t1, t2, k_span, floor_budget(lambda, n))
}

fn window_violation(
    n: usize,
    budget: usize,
    t1: usize,
    t2: usize,
    k_span: usize,
) -> Option<String> {
    if t1 > t2 {
        Some(format!("window [{t1}, {t2}] is empty"))
    } else if budget + t1 < k_span + t2 {
        Some(format!(
            "Λ_n − K − t2 + t1 = {budget} − {k_span} − {t2} + {t1} < 0"
        ))
    } else if t1 + budget > n {
        Some(format!("t1 + Λ_n = {} exceeds n = {n}", t1 + budget))
    } else {
        None
    }
}

fn minimal_feasible_n(from: usize, lambda: f64, eta: f64, eps: f64) -> Option<usize> {
    // outside these limits only rounding luck helps, so keep the scan short
    let limit = if lambda > 4.0 * eps && eta - eps + lambda < 1.0 {
        SIZING_SEARCH_LIMIT
    } else {
        (from + SHORT_SEARCH).min(SIZING_SEARCH_LIMIT)
    };
    (from + 1..=limit).find(|&m| {
        let (t1, t2, k, b) = eps_window(m, lambda, eta, eps);
        window_violation(m, b, t1, t2, k).is_none()
    })
}

fn midpoint_target(n: usize, top: usize, k_span: usize) -> f64 {
    (top as f64 - k_span as f64 / 2.0) / n as f64
}

/// `λ_k ∝ p_star^{⊗n}(T_{top − K + k})`, normalized over `k = 0..=K`.
pub fn lambda_weights(n: usize, window_top: usize, k_span: usize, p_star: f64) -> Result<Vec<f64>> {
    check_unit("p_star", p_star)?;
    if window_top > n || window_top < k_span {
        return Err(Error::InvalidParams(format!(
            "window [{}, {window_top}] not inside [0, {n}]",
            window_top as i64 - k_span as i64
        )));
    }
    let log_mass = |j: usize| {
        let ones = if j == 0 { 0.0 } else { j as f64 * p_star.ln() };
        let zeros = if j == n {
            0.0
        } else {
            (n - j) as f64 * (1.0 - p_star).ln()
        };
        ln_binomial(n, j) + ones + zeros
    };
    let logs: Vec<f64> = (0..=k_span)
        .map(|k| log_mass(window_top - k_span + k))
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::InvalidParams(format!(
            "window carries no mass under p_star = {p_star}"
        )));
    }
    let raw: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Effective i.i.d. picture of the typical-set strategy at block length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseProfile {
    pub n: usize,
    pub lambda: f64,
    pub eta: f64,
    pub eps: f64,
    /// Target parameter the weights are fitted to (window midpoint unless overridden).
    pub p_target: f64,
    /// `Λ + η − p_target`.
    pub eps_n: f64,
    /// `(Λ_n + K + t₁)/n`, which lies above the reachable window.
    pub shifted_center: f64,
}

impl NoiseProfile {
    pub fn new(n: usize, lambda: f64, eta: f64, eps: f64, p_star: Option<f64>) -> Result<Self> {
        check_unit("lambda", lambda)?;
        check_unit("eta", eta)?;
        let (t1, _, k_span, budget) = eps_window(n, lambda, eta, eps);
        let p_target = p_star.unwrap_or_else(|| midpoint_target(n, t1 + budget, k_span));
        Ok(NoiseProfile {
            n,
            lambda,
            eta,
            eps,
            p_target,
            eps_n: lambda + eta - p_target,
            shifted_center: (budget + k_span + t1) as f64 / n as f64,
        })
    }
}

/// Serializable strategy description `{kind, lambda, eps, p_star?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JammerConfig {
    pub kind: JammerKind,
    pub lambda: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_star: Option<f64>,
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JammerKind {
    None,
    Greedy,
    Typical,
}

impl std::str::FromStr for JammerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(JammerKind::None),
            "greedy" => Ok(JammerKind::Greedy),
            "typical" => Ok(JammerKind::Typical),
            other => Err(Error::Parse(format!("unknown jammer {other:?}"))),
        }
    }
}

impl JammerConfig {
    /// Instantiates the strategy for block length `n`; `eta` is the base
    /// noise level the typical-set window is centred on.
    pub fn build(&self, n: usize, eta: f64) -> Result<JammerStrategy> {
        match self.kind {
            JammerKind::None => Ok(JammerStrategy::Silent),
            JammerKind::Greedy => Ok(greedy_jammer(JammerBudget::new(self.lambda, n)?)),
            JammerKind::Typical => Ok(typical_jammer(TypicalJammerParams::from_noise_level(
                n,
                self.lambda,
                eta,
                self.eps,
                self.p_star,
            )?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JammerStrategy {
    /// Always `s^n = 0`.
    Silent,
    Greedy(JammerBudget),
    Typical(TypicalJammerParams),
}

pub fn greedy_jammer(budget: JammerBudget) -> JammerStrategy {
    JammerStrategy::Greedy(budget)
}

pub fn typical_jammer(params: TypicalJammerParams) -> JammerStrategy {
    JammerStrategy::Typical(params)
}

impl JammerStrategy {
    /// Block length the strategy was built for, if it depends on one.
    pub fn block_length(&self) -> Option<usize> {
        match self {
            JammerStrategy::Silent => None,
            JammerStrategy::Greedy(b) => Some(b.n),
            JammerStrategy::Typical(p) => Some(p.n),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            JammerStrategy::Silent => "none",
            JammerStrategy::Greedy(_) => "greedy",
            JammerStrategy::Typical(_) => "typical",
        }
    }

    /// Chooses `s^n` after seeing the noise string.
    pub fn jam<R: Rng + ?Sized>(&self, noise: &BitString, rng: &mut R) -> BitString {
        let n = noise.len();
        match self {
            JammerStrategy::Silent => BitString::zeros(n),
            JammerStrategy::Greedy(b) => flip_clean(noise, b.budget, rng),
            JammerStrategy::Typical(p) => {
                let t = noise.weight();
                if t < p.t1 || t > p.t2 {
                    return BitString::zeros(n);
                }
                let k = sample_index(&p.weights, rng);
                let flips = p
                    .chi(t, k)
                    .expect("window parameters validated at construction");
                flip_clean(noise, flips, rng)
            }
        }
    }

    /// Exact distribution of `s^n` given the noise string. Enumerates subsets,
    /// so only usable for small blocks.
    pub fn outcomes(&self, noise: &BitString) -> Vec<(BitString, f64)> {
        let n = noise.len();
        match self {
            JammerStrategy::Silent => vec![(BitString::zeros(n), 1.0)],
            JammerStrategy::Greedy(b) => {
                let clean = noise.zero_positions();
                let m = b.budget.min(clean.len());
                uniform_flips(n, &clean, m, 1.0)
            }
            JammerStrategy::Typical(p) => {
                let t = noise.weight();
                if t < p.t1 || t > p.t2 {
                    return vec![(BitString::zeros(n), 1.0)];
                }
                let clean = noise.zero_positions();
                let mut out = Vec::new();
                for (k, &w) in p.weights.iter().enumerate() {
                    if w > 0.0 {
                        let flips = p.chi(t, k).expect("validated");
                        out.extend(uniform_flips(n, &clean, flips, w));
                    }
                }
                out
            }
        }
    }
}

fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Flips `min(count, #clean)` zero positions of `noise`, chosen uniformly.
fn flip_clean<R: Rng + ?Sized>(noise: &BitString, count: usize, rng: &mut R) -> BitString {
    let clean = noise.zero_positions();
    let m = count.min(clean.len());
    let mut s = BitString::zeros(noise.len());
    for i in index::sample(rng, clean.len(), m) {
        s.set(clean[i], true);
    }
    s
}

/// Masks over `len` bits with exactly `size` ones.
fn masks(len: usize, size: usize) -> impl Iterator<Item = u64> {
    assert!(
        len < 64,
        "subset enumeration limited to fewer than 64 positions"
    );
    (0..1u64 << len).filter(move |m| m.count_ones() as usize == size)
}

fn uniform_flips(n: usize, clean: &[usize], size: usize, mass: f64) -> Vec<(BitString, f64)> {
    let count = binomial(clean.len(), size).expect("small enumeration") as f64;
    masks(clean.len(), size)
        .map(|m| {
            let mut s = BitString::zeros(n);
            for (j, &pos) in clean.iter().enumerate() {
                if m >> j & 1 == 1 {
                    s.set(pos, true);
                }
            }
            (s, mass / count)
        })
        .collect()
}

/// Exact distribution over `{0,1}^n`, indexed by [`BitString::to_index`].
pub type ExactDistribution = Vec<BigRational>;

/// Exact rationals of the `f64` weights, rescaled to sum to exactly one.
fn exact_weights(params: &TypicalJammerParams) -> Result<Vec<BigRational>> {
    let raw = params
        .weights
        .iter()
        .map(|&w| {
            BigRational::from_float(w)
                .ok_or_else(|| Error::InvalidParams(format!("weight {w} is not finite")))
        })
        .collect::<Result<Vec<_>>>()?;
    let total: BigRational = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / &total).collect())
}

fn ratio(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact law of `e^n ⊕ s^n` for `e^n` uniform on `T_t^n` and the
/// typical-set strategy's randomness. The weights are taken as the exact
/// rationals of their `f64` values, renormalized.
pub fn induced_state_distribution(
    params: &TypicalJammerParams,
    t: usize,
) -> Result<ExactDistribution> {
    let n = params.n;
    if n > EXACT_JAMMER_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: EXACT_JAMMER_MAX_N,
        });
    }
    if t < params.t1 || t > params.t2 {
        return Err(Error::InvalidParams(format!(
            "t = {t} outside window [{}, {}]",
            params.t1, params.t2
        )));
    }
    let lambdas = exact_weights(params)?;
    let class_size = binomial(n, t).expect("n ≤ 12");
    let mut dist = vec![BigRational::zero(); 1 << n];
    let mut counts = vec![0u128; 1 << n];
    for (k, lambda) in lambdas.iter().enumerate() {
        let flips = params.chi(t, k)?;
        counts.iter_mut().for_each(|c| *c = 0);
        for alpha in masks(n, t) {
            let clean: Vec<usize> = (0..n).filter(|&i| alpha >> i & 1 == 0).collect();
            for m in masks(clean.len(), flips) {
                let s = clean
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| m >> j & 1 == 1)
                    .fold(0u64, |acc, (_, &pos)| acc | 1 << pos);
                counts[(alpha ^ s) as usize] += 1;
            }
        }
        let per_alpha = binomial(n - t, flips).expect("n ≤ 12");
        for (idx, &c) in counts.iter().enumerate() {
            if c > 0 {
                dist[reverse_index(idx as u64, n) as usize] +=
                    lambda * ratio(c, class_size * per_alpha);
            }
        }
    }
    Ok(dist)
}

/// Bit `i` of a mask is position `i`; [`BitString::to_index`] puts position 0 first.
fn reverse_index(mask: u64, n: usize) -> u64 {
    (0..n).fold(0, |acc, i| (acc << 1) | (mask >> i & 1))
}

/// `Σ_k λ_k π_{χ(K,0,k)}` as an exact distribution.
pub fn type_mixture(params: &TypicalJammerParams) -> Result<ExactDistribution> {
    let n = params.n;
    if n > EXACT_JAMMER_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: EXACT_JAMMER_MAX_N,
        });
    }
    let lambdas = exact_weights(params)?;
    let mut dist = vec![BigRational::zero(); 1 << n];
    for (lambda, j) in lambdas.iter().zip(params.output_types()) {
        let mass = lambda * ratio(1, binomial(n, j).expect("n ≤ 12"));
        for (idx, slot) in dist.iter_mut().enumerate() {
            if (idx as u64).count_ones() as usize == j {
                *slot += &mass;
            }
        }
    }
    Ok(dist)
}

/// Total variation distance between two exact distributions.
pub fn total_variation(p: &ExactDistribution, q: &ExactDistribution) -> BigRational {
    let sum = p.iter().zip(q).fold(BigRational::zero(), |acc, (a, b)| {
        let d = a - b;
        acc + if d < BigRational::zero() { -d } else { d }
    });
    sum / BigRational::from_integer(BigInt::from(2))
}

pub fn is_distribution(p: &ExactDistribution) -> bool {
    p.iter().all(|v| *v >= BigRational::zero())
        && p.iter().sum::<BigRational>() == BigRational::one()
}
