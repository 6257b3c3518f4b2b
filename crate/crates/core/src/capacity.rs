//! Closed-form capacities of the jammed binary channels.
//!
//! With power constraint `Λ` the jammer can move the effective flip
//! probability anywhere in `[ω − Λ, ω + Λ] ∩ [0, 1]`, so the capacity is
//! `1 − h(p*)` with `p*` the admissible point closest to `1/2`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Result};
use crate::info::{bsc, entropy_deficit, BinaryChannel, BitDistribution};

/// `(2 − √2)/4`: residual flip probability under EPR modulation.
pub const EPR_OMEGA: f64 = (2.0 - SQRT_2) / 4.0;

/// Flip probability left by the best classical modulation.
pub const CLASSICAL_OMEGA: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityQuery {
    pub lambda: f64,
    pub omega: f64,
}

impl CapacityQuery {
    pub fn new(lambda: f64, omega: f64) -> Result<Self> {
        Ok(CapacityQuery {
            lambda: check_unit("lambda", lambda)?,
            omega: check_unit("omega", omega)?,
        })
    }
}

fn one_minus_entropy_closest_to_half(lo: f64, hi: f64) -> f64 {
    let p = 0.5f64.clamp(lo, hi);
    entropy_deficit(p).expect("point lies in [0,1]")
}

/// `1 − max_{|τ|≤Λ, ω+τ∈[0,1]} h(ω + τ)`. Accepts any `Λ ≥ 0`.
pub(crate) fn avcei_capacity_unchecked(lambda: f64, omega: f64) -> f64 {
    let lo = (omega - lambda).max(0.0);
    let hi = (omega + lambda).min(1.0);
    one_minus_entropy_closest_to_half(lo, hi)
}

pub fn avcei_capacity(q: CapacityQuery) -> f64 {
    avcei_capacity_unchecked(q.lambda, q.omega)
}

/// `Λ₀(p) = min{p(0), p(1)}` for the flip cost `l(s) = s`.
pub fn symmetrizability_cost(p: BitDistribution) -> f64 {
    p.p0().min(p.p1())
}

/// `min{1/2, ω + Λ}`.
pub fn effective_noise_level(lambda: f64, omega: f64) -> Result<f64> {
    check_unit("lambda", lambda)?;
    check_unit("omega", omega)?;
    Ok((omega + lambda).min(0.5))
}

/// A symmetrizing channel `U(s|x) = BSC(θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizerFamily {
    pub theta: f64,
}

impl SymmetrizerFamily {
    pub fn new(theta: f64) -> Result<Self> {
        check_unit("theta", theta).map(|theta| SymmetrizerFamily { theta })
    }

    pub fn channel(&self) -> BinaryChannel {
        bsc(self.theta).expect("validated")
    }

    /// Largest violation of `Σ_s u(s|x') w(y|s,x) = Σ_s u(s|x) w(y|s,x')`
    /// for the two-state channel `(BSC(ν), BSC(1−ν))`.
    pub fn symmetrizability_residual(&self, nu: f64) -> Result<f64> {
        let states = [bsc(nu)?, bsc(1.0 - nu)?];
        let u = self.channel();
        let mut worst: f64 = 0.0;
        for x in [false, true] {
            for x2 in [false, true] {
                for y in [false, true] {
                    let lhs: f64 = [false, true]
                        .iter()
                        .map(|&s| u.prob(x2, s) * states[s as usize].prob(x, y))
                        .sum();
                    let rhs: f64 = [false, true]
                        .iter()
                        .map(|&s| u.prob(x, s) * states[s as usize].prob(x2, y))
                        .sum();
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
        Ok(worst)
    }

    /// Expected jammer cost `Σ_x p(x) u(1|x)`.
    pub fn cost(&self, p: BitDistribution) -> f64 {
        p.p0() * self.theta + p.p1() * (1.0 - self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationClass {
    Classical,
    Epr,
    Pr,
}

impl ModulationClass {
    /// Residual environmental flip probability the senders face.
    pub fn omega(self) -> f64 {
        match self {
            ModulationClass::Classical => CLASSICAL_OMEGA,
            ModulationClass::Epr => EPR_OMEGA,
            ModulationClass::Pr => 0.0,
        }
    }
}

/// Largest single-user rate on either axis of the achievable region.
pub fn rate_endpoint(modulation: ModulationClass, lambda: f64) -> Result<f64> {
    Ok(avcei_capacity(CapacityQuery::new(
        lambda,
        modulation.omega(),
    )?))
}

/// Convex hull of `(0,0)`, `(R,0)`, `(0,R)`. This is an achievable subset,
/// not the capacity region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AchievableSubset {
    pub endpoint: f64,
}

impl AchievableSubset {
    pub fn new(modulation: ModulationClass, lambda: f64) -> Result<Self> {
        Ok(AchievableSubset {
            endpoint: rate_endpoint(modulation, lambda)?,
        })
    }

    pub fn vertices(&self) -> [(f64, f64); 3] {
        [(0.0, 0.0), (self.endpoint, 0.0), (0.0, self.endpoint)]
    }

    pub fn contains(&self, rate_a: f64, rate_b: f64) -> bool {
        rate_a >= 0.0 && rate_b >= 0.0 && rate_a + rate_b <= self.endpoint
    }

    pub fn is_trivial(&self) -> bool {
        self.endpoint == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompoundClassQuery {
    pub nu: f64,
    pub lambda: f64,
}

impl CompoundClassQuery {
    pub fn new(nu: f64, lambda: f64) -> Result<Self> {
        Ok(CompoundClassQuery {
            nu: check_unit("nu", nu)?,
            lambda: check_unit("lambda", lambda)?,
        })
    }

    /// Range of `ν·ω₁ + (1−ν)(1−ω₂)` over `ω₁, ω₂ ∈ [Λ, 1]`.
    pub fn parameter_range(&self) -> (f64, f64) {
        (self.nu * self.lambda, 1.0 - (1.0 - self.nu) * self.lambda)
    }
}

/// Compound capacity: `1 − max h` over the admissible BSC parameters.
pub fn compound_capacity(q: CompoundClassQuery) -> f64 {
    let (lo, hi) = q.parameter_range();
    one_minus_entropy_closest_to_half(lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub classical: f64,
    pub epr: f64,
    pub pr: f64,
}

pub fn separation_sweep(lambda_grid: &[f64]) -> Result<Vec<SweepRow>> {
    lambda_grid
        .iter()
        .map(|&lambda| {
            Ok(SweepRow {
                lambda,
                classical: rate_endpoint(ModulationClass::Classical, lambda)?,
                epr: rate_endpoint(ModulationClass::Epr, lambda)?,
                pr: rate_endpoint(ModulationClass::Pr, lambda)?,
            })
        })
        .collect()
}

/// `steps` evenly spaced points from `start` to `end` inclusive.
pub fn linear_grid(start: f64, end: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![start],
        _ => (0..steps)
            .map(|i| start + (end - start) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// `C_Λ(ω) ≥ C_{Λ+ω}(0)`: folding the environment into the jammer's budget
/// never increases capacity.
pub fn capacity_monotonicity_check(lambda: f64, omega: f64) -> bool {
    avcei_capacity_unchecked(lambda, omega) >= avcei_capacity_unchecked(lambda + omega, 0.0) - 1e-12
}

/// Decimal rendering with 12 significant digits and trailing zeros trimmed.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() {
            "0".into()
        } else {
            v.to_string()
        };
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::binary_entropy;
    use proptest::prelude::*;

    fn cap(lambda: f64, omega: f64) -> f64 {
        avcei_capacity(CapacityQuery::new(lambda, omega).unwrap())
    }

    /// Brute-force maximum of h over a fine τ grid, the definition of the formula.
    fn cap_by_grid(lambda: f64, omega: f64) -> f64 {
        let steps = 20_000;
        let mut best: f64 = 0.0;
        for i in 0..=steps {
            let tau = -lambda + 2.0 * lambda * i as f64 / steps as f64;
            let p = omega + tau;
            if (0.0..=1.0).contains(&p) {
                best = best.max(binary_entropy(p).unwrap());
            }
        }
        1.0 - best
    }

    #[test]
    fn special_values() {
        assert_eq!(cap(0.25, 0.25), 0.0);
        assert!((cap(0.25, EPR_OMEGA) - 0.031_166).abs() < 1e-5);
        assert!((cap(0.1, 0.25) - 0.065_932).abs() < 1e-6);
        assert_eq!(cap(0.0, 0.0), 1.0);
    }

    #[test]
    fn closed_form_matches_grid_search() {
        for &(l, w) in &[
            (0.1, 0.25),
            (0.05, 0.8),
            (0.3, 0.1),
            (0.0, 0.3),
            (0.45, 0.02),
        ] {
            assert!((cap(l, w) - cap_by_grid(l, w)).abs() < 1e-6, "({l},{w})");
        }
    }

    #[test]
    fn zero_set_on_grid() {
        let steps = 200;
        for i in 0..steps {
            let lambda = i as f64 / (steps - 1) as f64;
            for j in 0..steps {
                let omega = j as f64 / (steps - 1) as f64;
                let c = cap(lambda, omega);
                let expect_zero = (omega - 0.5).abs() <= lambda;
                assert_eq!(c.abs() <= 1e-12, expect_zero, "({lambda},{omega})");
                assert!((c - cap(lambda, 1.0 - omega)).abs() <= 1e-12);
            }
        }
        for j in 0..steps {
            let omega = j as f64 / (steps - 1) as f64;
            let mut prev = f64::INFINITY;
            for i in 0..steps {
                let c = cap(i as f64 / (steps - 1) as f64, omega);
                assert!(c <= prev + 1e-12);
                prev = c;
            }
        }
    }

    #[test]
    fn symmetrizability_cost_values() {
        let cost = |p: f64| symmetrizability_cost(BitDistribution::new(p).unwrap());
        assert_eq!(cost(0.5), 0.5);
        assert_eq!(cost(0.0), 0.0);
        assert!((cost(0.3) - 0.3).abs() < 1e-15);
        // minimum over the symmetrizer family, by grid
        for &p in &[0.1, 0.3, 0.5, 0.8] {
            let dist = BitDistribution::new(p).unwrap();
            let grid_min = (0..=1000)
                .map(|i| {
                    SymmetrizerFamily::new(i as f64 / 1000.0)
                        .unwrap()
                        .cost(dist)
                })
                .fold(f64::INFINITY, f64::min);
            assert!((grid_min - symmetrizability_cost(dist)).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_level() {
        assert!((effective_noise_level(0.3, EPR_OMEGA).unwrap() - 0.446_447).abs() < 1e-6);
        assert_eq!(effective_noise_level(0.3, 0.25).unwrap(), 0.5);
        assert_eq!(effective_noise_level(0.0, 0.17).unwrap(), 0.17);
        assert!(effective_noise_level(-0.1, 0.1).is_err());
    }

    #[test]
    fn endpoints() {
        assert_eq!(
            rate_endpoint(ModulationClass::Classical, 0.25).unwrap(),
            0.0
        );
        assert!((rate_endpoint(ModulationClass::Epr, 0.25).unwrap() - 0.031_166).abs() < 1e-5);
        let threshold = SQRT_2 / 4.0;
        assert_eq!(rate_endpoint(ModulationClass::Epr, threshold).unwrap(), 0.0);
        assert!(rate_endpoint(ModulationClass::Epr, threshold - 0.01).unwrap() > 0.0);
        let pr = rate_endpoint(ModulationClass::Pr, 0.49).unwrap();
        assert!((pr - (1.0 - binary_entropy(0.49).unwrap())).abs() < 1e-14 && pr > 0.0);
    }

    #[test]
    fn achievable_subset_geometry() {
        let region = AchievableSubset::new(ModulationClass::Epr, 0.3).unwrap();
        assert!(!region.is_trivial());
        assert!(region.contains(region.endpoint, 0.0));
        assert!(region.contains(region.endpoint / 2.0, region.endpoint / 2.0));
        assert!(!region.contains(region.endpoint, 1e-6));
        assert!(AchievableSubset::new(ModulationClass::Classical, 0.3)
            .unwrap()
            .is_trivial());
    }

    #[test]
    fn compound_examples() {
        assert_eq!(
            compound_capacity(CompoundClassQuery::new(0.75, 2.0 / 3.0).unwrap()),
            0.0
        );
        let nu = 0.5 * (1.0 + 1.0 / SQRT_2);
        let c = compound_capacity(CompoundClassQuery::new(nu, 2.0 / 3.0).unwrap());
        assert!((c - 0.013_795_547_663_068).abs() < 1e-9 && c > 0.0);
        assert_eq!(
            compound_capacity(CompoundClassQuery::new(1.0, 0.0).unwrap()),
            0.0
        );
    }

    #[test]
    fn sweep_rows() {
        let rows = separation_sweep(&[0.0, 0.3, 0.36]).unwrap();
        assert!((rows[0].classical - 0.188_722).abs() < 1e-6);
        assert!((rows[0].epr - 0.399_124).abs() < 1e-6);
        assert_eq!(rows[0].pr, 1.0);
        assert_eq!(rows[1].classical, 0.0);
        assert!(rows[1].epr > 0.0);
        assert_eq!((rows[2].classical, rows[2].epr), (0.0, 0.0));
        assert!(rows[2].pr > 0.0);
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = linear_grid(0.0, 0.5, 51);
        assert_eq!(g.len(), 51);
        assert_eq!(g[25], 0.25);
        assert_eq!(g[50], 0.5);
        assert_eq!(linear_grid(0.3, 0.3, 1), vec![0.3]);
    }

    #[test]
    fn monotonicity_examples() {
        assert!((cap(0.1, 0.1) - (1.0 - binary_entropy(0.2).unwrap())).abs() < 1e-12);
        assert!((avcei_capacity_unchecked(0.2, 0.0) - cap(0.1, 0.1)).abs() < 1e-12);
        assert!(capacity_monotonicity_check(0.1, 0.1));
        assert!(capacity_monotonicity_check(0.1, 0.5));
    }

    #[test]
    fn formatting() {
        assert_eq!(format_sig12(0.0), "0");
        assert_eq!(format_sig12(1.0), "1");
        assert_eq!(format_sig12(0.25), "0.25");
        assert_eq!(format_sig12(EPR_OMEGA), "0.146446609407");
        assert_eq!(format_sig12(0.0311659942898), "0.0311659942898");
        assert_eq!(format_sig12(123.456), "123.456");
    }

    proptest! {
        #[test]
        fn bsc_family_symmetrizes(theta in 0.0..=1.0f64, nu in 0.0..=1.0f64) {
            let residual = SymmetrizerFamily::new(theta).unwrap().symmetrizability_residual(nu).unwrap();
            prop_assert!(residual < 1e-12);
        }

        #[test]
        fn monotonicity_holds(lambda in 0.0..=1.0f64, omega in 0.0..=1.0f64) {
            prop_assert!(capacity_monotonicity_check(lambda, omega));
        }
    }
}
