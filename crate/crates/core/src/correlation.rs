//! Modulation resources shared by the two senders.
//!
//! A [`Correlation`] is a conditional table `q(α, β | x, y)`: on environment
//! bits `x` (seen by Alice) and `y` (seen by Bob) the modulators output `α`
//! and `β`. The residual noise reaching the receiver is `x·y ⊕ α ⊕ β`, so
//! every resource is summarized by the probability that this bit is one,
//! see [`effective_flip_prob`].

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};

use num_complex::Complex64;
use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum shared-randomness alphabet for local correlations.
pub const MAX_SHARED_ALPHABET: usize = 1 << 16;

/// Box strength reproduced by the EPR measurements, `1/(4√2)`.
pub const EPR_STRENGTH: f64 = FRAC_1_SQRT_2 / 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationKind {
    Deterministic,
    Local,
    Quantum,
    Box,
}

/// `q(α, β | x, y)`, stored as `table[x][y][α][β]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CorrelationRepr", into = "CorrelationRepr")]
pub struct Correlation {
    table: [[[[f64; 2]; 2]; 2]; 2],
    kind: CorrelationKind,
}

/// Wire form: 16 numbers, row `(x, y)` and column `(α, β)` both lexicographic,
/// i.e. entry `4·(2x + y) + (2α + β)`.
#[derive(Serialize, Deserialize)]
struct CorrelationRepr {
    kind: CorrelationKind,
    table: Vec<f64>,
}

impl TryFrom<CorrelationRepr> for Correlation {
    type Error = Error;

    fn try_from(repr: CorrelationRepr) -> Result<Self> {
        let flat: [f64; 16] = repr.table.as_slice().try_into().map_err(|_| {
            Error::Parse(format!(
                "correlation table needs 16 entries, got {}",
                repr.table.len()
            ))
        })?;
        Correlation::from_flat(flat, repr.kind)
    }
}

impl From<Correlation> for CorrelationRepr {
    fn from(c: Correlation) -> Self {
        CorrelationRepr {
            kind: c.kind,
            table: c.to_flat().to_vec(),
        }
    }
}

impl Correlation {
    pub fn from_table(table: [[[[f64; 2]; 2]; 2]; 2], kind: CorrelationKind) -> Result<Self> {
        for x in 0..2 {
            for y in 0..2 {
                let row = &table[x][y];
                let entries = row.iter().flatten();
                if entries.clone().any(|&v| v.is_nan() || v < 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "negative entry in q(·|{x},{y})"
                    )));
                }
                let total: f64 = entries.sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParams(format!(
                        "q(·|{x},{y}) sums to {total}"
                    )));
                }
            }
        }
        Ok(Correlation { table, kind })
    }

    pub fn from_flat(flat: [f64; 16], kind: CorrelationKind) -> Result<Self> {
        let mut table = [[[[0.0; 2]; 2]; 2]; 2];
        for (i, v) in flat.into_iter().enumerate() {
            table[i >> 3][(i >> 2) & 1][(i >> 1) & 1][i & 1] = v;
        }
        Self::from_table(table, kind)
    }

    pub fn to_flat(&self) -> [f64; 16] {
        let mut flat = [0.0; 16];
        for (i, v) in flat.iter_mut().enumerate() {
            *v = self.table[i >> 3][(i >> 2) & 1][(i >> 1) & 1][i & 1];
        }
        flat
    }

    pub fn kind(&self) -> CorrelationKind {
        self.kind
    }

    pub fn prob(&self, alpha: bool, beta: bool, x: bool, y: bool) -> f64 {
        self.table[x as usize][y as usize][alpha as usize][beta as usize]
    }

    /// `q(·|x, y)` in lexicographic `(α, β)` order.
    pub fn conditional(&self, x: bool, y: bool) -> [f64; 4] {
        let t = &self.table[x as usize][y as usize];
        [t[0][0], t[0][1], t[1][0], t[1][1]]
    }

    pub fn max_abs_diff(&self, other: &Correlation) -> f64 {
        self.to_flat()
            .iter()
            .zip(other.to_flat().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Draws `(α, β) ~ q(·|x, y)`.
    pub fn sample<R: Rng + ?Sized>(&self, x: bool, y: bool, rng: &mut R) -> (bool, bool) {
        let row = self.conditional(x, y);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return (i & 2 != 0, i & 1 != 0);
            }
        }
        // rounding left u above the cumulative sum; take the last outcome with mass
        let last = row.iter().rposition(|&p| p > 0.0).unwrap_or(3);
        (last & 2 != 0, last & 1 != 0)
    }

    /// Probability that the noise bit `x·y ⊕ α ⊕ β` is one, for fixed inputs.
    pub fn flip_prob_given(&self, x: bool, y: bool) -> f64 {
        let mut p = 0.0;
        for alpha in [false, true] {
            for beta in [false, true] {
                if (x & y) ^ alpha ^ beta {
                    p += self.prob(alpha, beta, x, y);
                }
            }
        }
        p
    }
}

/// One of the four extremal maps `{0,1} → {0,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremalMap {
    Identity,
    Flip,
    Const0,
    Const1,
}

impl ExtremalMap {
    pub const ALL: [ExtremalMap; 4] = [
        ExtremalMap::Identity,
        ExtremalMap::Flip,
        ExtremalMap::Const0,
        ExtremalMap::Const1,
    ];

    pub fn apply(self, bit: bool) -> bool {
        match self {
            ExtremalMap::Identity => bit,
            ExtremalMap::Flip => !bit,
            ExtremalMap::Const0 => false,
            ExtremalMap::Const1 => true,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExtremalMap::Identity => "id",
            ExtremalMap::Flip => "flip",
            ExtremalMap::Const0 => "const0",
            ExtremalMap::Const1 => "const1",
        }
    }
}

impl std::str::FromStr for ExtremalMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" | "identity" => Ok(ExtremalMap::Identity),
            "flip" => Ok(ExtremalMap::Flip),
            "const0" | "0" => Ok(ExtremalMap::Const0),
            "const1" | "1" => Ok(ExtremalMap::Const1),
            other => Err(Error::Parse(format!(
                "unknown map {other:?}, expected id|flip|const0|const1"
            ))),
        }
    }
}

/// A pair of extremal maps, one per sender.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicModulator {
    pub alice: ExtremalMap,
    pub bob: ExtremalMap,
}

impl DeterministicModulator {
    pub fn new(alice: ExtremalMap, bob: ExtremalMap) -> Self {
        DeterministicModulator { alice, bob }
    }

    /// All 16 pairs.
    pub fn all() -> impl Iterator<Item = DeterministicModulator> {
        ExtremalMap::ALL
            .into_iter()
            .flat_map(|a| ExtremalMap::ALL.into_iter().map(move |b| Self::new(a, b)))
    }

    /// Effective flip probability in exact rational arithmetic.
    pub fn effective_flip_exact(&self) -> Ratio<u32> {
        let flips = (0..4u32)
            .filter(|&i| {
                let (x, y) = (i & 2 != 0, i & 1 != 0);
                (x & y) ^ self.alice.apply(x) ^ self.bob.apply(y)
            })
            .count() as u32;
        Ratio::new(flips, 4)
    }

    pub fn label(&self) -> String {
        format!("det:{},{}", self.alice.name(), self.bob.name())
    }
}

pub fn deterministic_correlation(m: DeterministicModulator) -> Correlation {
    let mut table = [[[[0.0; 2]; 2]; 2]; 2];
    for x in [false, true] {
        for y in [false, true] {
            table[x as usize][y as usize][m.alice.apply(x) as usize][m.bob.apply(y) as usize] = 1.0;
        }
    }
    Correlation {
        table,
        kind: CorrelationKind::Deterministic,
    }
}

/// Shared randomness `p(e)` with local response tables.
///
/// `alice[e][x]` is `q₁(α = 1 | e, x)` and `bob[e][y]` is `q₂(β = 1 | e, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalCorrelationSpec {
    pub shared: Vec<f64>,
    pub alice: Vec<[f64; 2]>,
    pub bob: Vec<[f64; 2]>,
}

impl LocalCorrelationSpec {
    pub fn validate(&self) -> Result<()> {
        let e = self.shared.len();
        if e == 0 || e > MAX_SHARED_ALPHABET {
            return Err(Error::InvalidParams(format!(
                "shared alphabet size {e} not in 1..={MAX_SHARED_ALPHABET}"
            )));
        }
        if self.alice.len() != e || self.bob.len() != e {
            return Err(Error::InvalidParams(format!(
                "response tables have {} and {} rows, shared alphabet has {e}",
                self.alice.len(),
                self.bob.len()
            )));
        }
        if self.shared.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidParams(
                "negative shared-randomness weight".into(),
            ));
        }
        let total: f64 = self.shared.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "shared randomness sums to {total}"
            )));
        }
        let in_unit = |v: &f64| (0.0..=1.0).contains(v);
        if !self.alice.iter().chain(&self.bob).flatten().all(in_unit) {
            return Err(Error::InvalidParams(
                "response probability outside [0,1]".into(),
            ));
        }
        Ok(())
    }

    /// Mixture of deterministic pairs with the given weights.
    pub fn from_deterministic(mix: &[(DeterministicModulator, f64)]) -> Self {
        let indicator = |m: ExtremalMap| [m.apply(false) as u8 as f64, m.apply(true) as u8 as f64];
        LocalCorrelationSpec {
            shared: mix.iter().map(|&(_, w)| w).collect(),
            alice: mix.iter().map(|(m, _)| indicator(m.alice)).collect(),
            bob: mix.iter().map(|(m, _)| indicator(m.bob)).collect(),
        }
    }
}

pub fn local_correlation(spec: &LocalCorrelationSpec) -> Result<Correlation> {
    spec.validate()?;
    let mut table = [[[[0.0; 2]; 2]; 2]; 2];
    for ((&pe, qa), qb) in spec.shared.iter().zip(&spec.alice).zip(&spec.bob) {
        for x in 0..2 {
            for y in 0..2 {
                for alpha in 0..2 {
                    let pa = if alpha == 1 { qa[x] } else { 1.0 - qa[x] };
                    for beta in 0..2 {
                        let pb = if beta == 1 { qb[y] } else { 1.0 - qb[y] };
                        table[x][y][alpha][beta] += pe * pa * pb;
                    }
                }
            }
        }
    }
    Correlation::from_table(table, CorrelationKind::Local)
}

/// `U_θ = [[cos θ, sin θ], [−sin θ, cos θ]]`.
fn rotation(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s, c]]
}

/// Two-qubit state measured in rotated bases, one angle per input bit.
///
/// `state[2i + j]` is the amplitude of `e_i ⊗ e_j`. Outcome `α` on Alice's
/// input `x` projects onto `U_{θ_x} e_α`, likewise for Bob with `τ_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumModulation {
    state: [Complex64; 4],
    alice_angles: [f64; 2],
    bob_angles: [f64; 2],
}

impl QuantumModulation {
    pub fn new(
        state: [Complex64; 4],
        alice_angles: [f64; 2],
        bob_angles: [f64; 2],
    ) -> Result<Self> {
        let norm: f64 = state.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "state has squared norm {norm}"
            )));
        }
        Ok(QuantumModulation {
            state,
            alice_angles,
            bob_angles,
        })
    }

    /// `(e₀⊗e₀ + e₁⊗e₁)/√2` with angles `θ = (0, π/4)`, `τ = (π/8, −π/8)`.
    pub fn epr() -> Self {
        let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        QuantumModulation {
            state: [a, z, z, a],
            alice_angles: [0.0, FRAC_PI_4],
            bob_angles: [FRAC_PI_8, -FRAC_PI_8],
        }
    }

    /// Same measurements on `(e₀⊗e₁ + e₁⊗e₀)/√2`.
    pub fn epr_symmetric_singlet() -> Self {
        let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        QuantumModulation {
            state: [z, a, a, z],
            ..Self::epr()
        }
    }

    /// `P(α, β | x, y) = |(U_θᵀ Ψ U_τ)_{αβ}|²` where `Ψ` is the state reshaped to 2×2.
    pub fn measurement_probability(&self, x: bool, y: bool) -> [f64; 4] {
        let ua = rotation(self.alice_angles[x as usize]);
        let ub = rotation(self.bob_angles[y as usize]);
        let mut out = [0.0; 4];
        for alpha in 0..2 {
            for beta in 0..2 {
                let mut amp = Complex64::new(0.0, 0.0);
                for i in 0..2 {
                    for j in 0..2 {
                        amp += self.state[2 * i + j] * (ua[i][alpha] * ub[j][beta]);
                    }
                }
                out[2 * alpha + beta] = amp.norm_sqr();
            }
        }
        out
    }

    pub fn correlation(&self) -> Correlation {
        let mut table = [[[[0.0; 2]; 2]; 2]; 2];
        for x in [false, true] {
            for y in [false, true] {
                let p = self.measurement_probability(x, y);
                for (i, v) in p.into_iter().enumerate() {
                    table[x as usize][y as usize][i >> 1][i & 1] = v;
                }
            }
        }
        Correlation {
            table,
            kind: CorrelationKind::Quantum,
        }
    }
}

pub fn epr_correlation() -> Correlation {
    QuantumModulation::epr().correlation()
}

/// Correlation strength `t`, `|t| ≤ 1/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxStrength(f64);

impl BoxStrength {
    pub fn new(t: f64) -> Result<Self> {
        if t.abs() <= 0.25 {
            Ok(BoxStrength(t))
        } else {
            Err(Error::Domain {
                name: "t",
                value: t,
                lo: -0.25,
                hi: 0.25,
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `q(·|x,y) = (¼+t, ¼−t, ¼−t, ¼+t)` unless `x = y = 1`, where the signs swap.
pub fn pr_box(strength: BoxStrength) -> Correlation {
    let t = strength.value();
    let agree = [[0.25 + t, 0.25 - t], [0.25 - t, 0.25 + t]];
    let differ = [[0.25 - t, 0.25 + t], [0.25 + t, 0.25 - t]];
    Correlation {
        table: [[agree, agree], [agree, differ]],
        kind: CorrelationKind::Box,
    }
}

/// Each side's marginal is independent of the other side's input, within `tol`.
pub fn is_nonsignalling(c: &Correlation, tol: f64) -> bool {
    let alice = |x: bool, y: bool| c.prob(true, false, x, y) + c.prob(true, true, x, y);
    let bob = |x: bool, y: bool| c.prob(false, true, x, y) + c.prob(true, true, x, y);
    [false, true].iter().all(|&v| {
        (alice(v, false) - alice(v, true)).abs() <= tol
            && (bob(false, v) - bob(true, v)).abs() <= tol
    })
}

/// Probability that `x·y ⊕ α ⊕ β = 1` for uniform `(x, y)`.
pub fn effective_flip_prob(c: &Correlation) -> f64 {
    let mut total = 0.0;
    for x in [false, true] {
        for y in [false, true] {
            total += c.flip_prob_given(x, y);
        }
    }
    total / 4.0
}

/// Probability of winning the CHSH game, `α ⊕ β = x·y`.
pub fn chsh_win_probability(c: &Correlation) -> f64 {
    1.0 - effective_flip_prob(c)
}
