//! Self-check suites behind `mavmac verify`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_8, SQRT_2};
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::capacity::{
    avcei_capacity, capacity_monotonicity_check, compound_capacity, rate_endpoint, CapacityQuery,
    CompoundClassQuery, ModulationClass, SymmetrizerFamily, EPR_OMEGA,
};
use crate::correlation::{
    chsh_win_probability, effective_flip_prob, epr_correlation, is_nonsignalling,
    local_correlation, pr_box, BoxStrength, DeterministicModulator, LocalCorrelationSpec,
    EPR_STRENGTH,
};
use crate::error::{Error, Result};
use crate::info::{binary_entropy, sample_iid, BitDistribution};
use crate::jamming::{
    check_admissible, greedy_jammer, induced_state_distribution, lambda_weights, total_variation,
    type_mixture, typical_jammer, JammerBudget, JammerStrategy, TypicalJammerParams,
};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lemma1,
    Epr,
    Jammer,
    Capacity,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemma1" => Ok(Suite::Lemma1),
            "epr" => Ok(Suite::Epr),
            "jammer" => Ok(Suite::Jammer),
            "capacity" => Ok(Suite::Capacity),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {}: {}", self.name, self.detail)
    }
}

pub fn run(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Lemma1 => lemma1(),
        Suite::Epr => epr(),
        Suite::Jammer => jammer(),
        Suite::Capacity => capacity(),
        Suite::All => [lemma1(), epr(), jammer(), capacity()].concat(),
    }
}

/// A random local correlation with `|E| ≤ 8`, drawn from `rng`.
pub fn random_local_spec<R: Rng + ?Sized>(rng: &mut R) -> LocalCorrelationSpec {
    let size = rng.random_range(1..=8);
    let raw: Vec<f64> = (0..size).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let mut shared: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let rest: f64 = shared[1..].iter().sum();
    shared[0] = 1.0 - rest;
    let mut table = || {
        (0..size)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect()
    };
    let alice = table();
    let bob = table();
    LocalCorrelationSpec { shared, alice, bob }
}

fn lemma1() -> Vec<Check> {
    let quarter = Ratio::new(1, 4);
    let three_quarters = Ratio::new(3, 4);
    let values: Vec<Ratio<u32>> = DeterministicModulator::all()
        .map(|m| m.effective_flip_exact())
        .collect();
    let hits = values
        .iter()
        .filter(|&&r| r == quarter || r == three_quarters)
        .count();
    let mut checks = vec![Check::new(
        "deterministic modulators have flip probability in {1/4, 3/4}",
        hits == 16,
        format!("{hits}/16 deterministic strategies in {{1/4, 3/4}}"),
    )];
    let mut rng = stream(0x1e44a1, 0);
    let mut worst: f64 = 0.0;
    let mut ok = 0;
    for _ in 0..100 {
        let spec = random_local_spec(&mut rng);
        let c = local_correlation(&spec).expect("valid by construction");
        let f = effective_flip_prob(&c);
        worst = worst.max((0.25 - f).max(f - 0.75));
        if (0.25 - 1e-12..=0.75 + 1e-12).contains(&f) && is_nonsignalling(&c, 1e-12) {
            ok += 1;
        }
    }
    checks.push(Check::new(
        "local correlations have flip probability in [1/4, 3/4]",
        ok == 100,
        format!("{ok}/100 random local specs within [1/4, 3/4] (max excursion {worst:.3e})"),
    ));
    checks
}

fn epr() -> Vec<Check> {
    let c = epr_correlation();
    let t = 1.0 / (4.0 * SQRT_2);
    let same = [0.25 + t, 0.25 - t, 0.25 - t, 0.25 + t];
    let swapped = [0.25 - t, 0.25 + t, 0.25 + t, 0.25 - t];
    let mut err: f64 = 0.0;
    for (x, y) in [(false, false), (false, true), (true, false), (true, true)] {
        let expected = if x && y { swapped } else { same };
        for (a, b) in c.conditional(x, y).iter().zip(expected) {
            err = err.max((a - b).abs());
        }
    }
    let chsh = chsh_win_probability(&c);
    let chsh_err = (chsh - FRAC_PI_8.cos().powi(2)).abs();
    let box_err = c.max_abs_diff(&pr_box(BoxStrength::new(EPR_STRENGTH).expect("in range")));
    let flip_err = (effective_flip_prob(&c) - EPR_OMEGA).abs();
    vec![
        Check::new(
            "EPR table equals (1/4 ± 1/(4√2))",
            err <= 1e-12,
            format!("table matches (1/4±1/(4√2)) at 1e-12 (max error {err:.3e})"),
        ),
        Check::new(
            "EPR CHSH win probability equals cos²(π/8)",
            chsh_err <= 1e-12,
            format!("win probability {chsh:.12} (error {chsh_err:.3e})"),
        ),
        Check::new(
            "EPR table equals the box of strength 1/(4√2)",
            box_err <= 1e-12,
            format!("max difference {box_err:.3e}"),
        ),
        Check::new(
            "EPR flip probability equals (2−√2)/4",
            flip_err <= 1e-12,
            format!("error {flip_err:.3e}"),
        ),
        Check::new(
            "EPR table is non-signalling",
            is_nonsignalling(&c, 1e-12),
            "marginals independent of the remote input",
        ),
        Check::new(
            "CHSH quantum advantage",
            chsh > 0.75,
            format!(
                "{chsh:.6} = (1 + 1/√2)/2 = {:.6} > 3/4",
                0.5 * (1.0 + FRAC_1_SQRT_2)
            ),
        ),
    ]
}

/// Parameter sets at `n = 12` used by the exact mixture check.
pub fn reference_jammer_grid() -> Vec<TypicalJammerParams> {
    let n = 12;
    let make = |budget: usize, t1: usize, t2: usize, k: usize, weights: Vec<f64>| {
        TypicalJammerParams::with_budget(n, budget as f64 / n as f64, budget, t1, t2, k, weights)
            .expect("reference grid is valid")
    };
    let fitted = |budget: usize, t1: usize, k: usize, p: f64| {
        lambda_weights(n, t1 + budget, k, p).expect("window inside [0, n]")
    };
    vec![
        make(5, 2, 3, 2, vec![1.0 / 3.0; 3]),
        make(4, 1, 3, 2, fitted(4, 1, 2, 0.3)),
        make(6, 3, 5, 3, vec![0.1, 0.2, 0.3, 0.4]),
        make(3, 0, 0, 3, fitted(3, 0, 3, 0.15)),
        make(7, 4, 4, 0, vec![1.0]),
        make(8, 2, 6, 4, fitted(8, 2, 4, 8.0 / 12.0)),
    ]
}

fn jammer() -> Vec<Check> {
    let mut checks = Vec::new();
    let grid = reference_jammer_grid();
    let mut identical = 0;
    let mut exact = 0;
    for params in &grid {
        let (t1, t2) = params.window();
        let reference = type_mixture(params).expect("n = 12");
        let dists: Vec<_> = (t1..=t2)
            .map(|t| induced_state_distribution(params, t).expect("t in window"))
            .collect();
        if dists.windows(2).all(|w| w[0] == w[1]) {
            identical += 1;
        }
        if dists
            .iter()
            .all(|d| total_variation(d, &reference).is_zero())
        {
            exact += 1;
        }
    }
    checks.push(Check::new(
        "typical jammer output law does not depend on the input type",
        identical == grid.len(),
        format!("{identical}/{} parameter sets at n=12", grid.len()),
    ));
    checks.push(Check::new(
        "typical jammer output law equals the type mixture",
        exact == grid.len(),
        format!(
            "exact mixture identity at n=12 on {exact}/{} parameter sets",
            grid.len()
        ),
    ));

    let blocks = 10_000u64;
    let mut violations = 0;
    for i in 0..blocks {
        let mut rng = stream(0xad41, i);
        let n = rng.random_range(20..=200);
        let lambda: f64 = rng.random_range(0.0..=1.0);
        let e = sample_iid(
            BitDistribution::new(rng.random_range(0.0..0.5)).expect("unit"),
            n,
            &mut rng,
        );
        let budget = JammerBudget::new(lambda, n).expect("unit");
        let strategy = if i % 2 == 0 {
            greedy_jammer(budget)
        } else {
            match TypicalJammerParams::from_noise_level(
                n,
                lambda,
                rng.random_range(0.0..0.4),
                0.02,
                None,
            ) {
                Ok(p) => typical_jammer(p),
                Err(_) => greedy_jammer(budget),
            }
        };
        if !check_admissible(&strategy.jam(&e, &mut rng), budget.budget) {
            violations += 1;
        }
    }
    checks.push(Check::new(
        "sampled jammer outputs respect the budget",
        violations == 0,
        format!("{violations} violations in {blocks} blocks"),
    ));
    let silent = JammerStrategy::Silent.jam(&BitString::zeros(4), &mut stream(0, 0));
    checks.push(Check::new(
        "silent jammer emits zeros",
        silent.weight() == 0,
        "s = 0000",
    ));
    checks
}

/// Smallest `Λ` on `[0, 1]` where `rate_endpoint` vanishes, by bisection.
pub fn endpoint_threshold(modulation: ModulationClass, tol: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if rate_endpoint(modulation, mid).expect("unit interval") == 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn capacity() -> Vec<Check> {
    let mut checks = Vec::new();
    let zero = avcei_capacity(CapacityQuery::new(0.25, 0.25).expect("unit"));
    checks.push(Check::new(
        "C(1/4, 1/4) = 0",
        zero == 0.0,
        format!("value {zero}"),
    ));
    let epr = avcei_capacity(CapacityQuery::new(0.25, EPR_OMEGA).expect("unit"));
    let target = 1.0 - binary_entropy((1.0 + SQRT_2) / 4.0).expect("unit");
    checks.push(Check::new(
        "C(1/4, (2−√2)/4) = 1 − h((1+√2)/4)",
        (epr - target).abs() < 1e-12 && (epr - 0.031_166).abs() < 1e-6,
        format!("value {epr:.9}"),
    ));
    for (class, expected) in [
        (ModulationClass::Classical, 0.25),
        (ModulationClass::Epr, SQRT_2 / 4.0),
        (ModulationClass::Pr, 0.5),
    ] {
        let found = endpoint_threshold(class, 1e-10);
        checks.push(Check::new(
            &format!("{class:?} rate vanishes from Λ = {expected:.6}"),
            (found - expected).abs() < 1e-9,
            format!("bisection gives {found:.10}"),
        ));
    }
    let zero = compound_capacity(CompoundClassQuery::new(0.75, 2.0 / 3.0).expect("unit"));
    let nu = 0.5 * (1.0 + FRAC_1_SQRT_2);
    let positive = compound_capacity(CompoundClassQuery::new(nu, 2.0 / 3.0).expect("unit"));
    checks.push(Check::new(
        "compound class: zero at ν = 3/4, positive at ν = (1 + 1/√2)/2",
        zero == 0.0 && positive > 0.0 && (positive - 0.0138).abs() < 1e-3,
        format!("values {zero} and {positive:.6}"),
    ));
    let mut rng = stream(0xca9, 0);
    let violations = (0..1000)
        .filter(|_| {
            !capacity_monotonicity_check(rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0))
        })
        .count();
    checks.push(Check::new(
        "C_Λ(ω) ≥ C_{Λ+ω}(0)",
        violations == 0,
        format!("{violations} violations on 1000 random points"),
    ));
    let worst = (0..100)
        .map(|_| {
            let theta = rng.random_range(0.0..=1.0);
            let mut nu: f64 = rng.random_range(0.0..=1.0);
            if nu == 0.5 {
                nu = 0.25;
            }
            SymmetrizerFamily::new(theta)
                .expect("unit")
                .symmetrizability_residual(nu)
                .expect("unit")
        })
        .fold(0.0f64, f64::max);
    checks.push(Check::new(
        "BSC(θ) symmetrizes (BSC(ν), BSC(1−ν))",
        worst < 1e-12,
        format!("max residual {worst:.3e} over 100 pairs"),
    ));
    checks
}
