//! Binary information-theoretic primitives: distributions on `{0,1}`,
//! binary channels, entropy, mutual information and type classes.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{check_unit, Error, Result};

/// Type-class sizes are exact in `u128` up to this block length.
pub const EXACT_BINOMIAL_MAX_N: usize = 120;

/// A distribution on `{0,1}`, identified with its probability of `1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BitDistribution(f64);

impl BitDistribution {
    pub fn new(p1: f64) -> Result<Self> {
        check_unit("p1", p1).map(BitDistribution)
    }

    pub fn uniform() -> Self {
        BitDistribution(0.5)
    }

    pub fn p1(self) -> f64 {
        self.0
    }

    pub fn p0(self) -> f64 {
        1.0 - self.0
    }

    pub fn prob(self, bit: bool) -> f64 {
        if bit {
            self.p1()
        } else {
            self.p0()
        }
    }
}

/// Shannon entropy in bits of a Bernoulli(`p`) variable, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_unit("p", p)?;
    // canonical pair so that h(p) and h(1 - p) are bit-identical
    let hi = p.max(1.0 - p);
    let lo = 1.0 - hi;
    Ok(entropy_term(lo) + entropy_term(hi))
}

/// `1 − h(p)`, evaluated as `(p·ln(1+x) + (1−p)·ln(1−x)) / ln 2` with
/// `x = 2p − 1` so that it keeps full relative precision near `p = 1/2`.
pub fn entropy_deficit(p: f64) -> Result<f64> {
    check_unit("p", p)?;
    let hi = p.max(1.0 - p);
    let lo = 1.0 - hi;
    let x = 2.0 * hi - 1.0;
    let up = hi * x.ln_1p();
    let down = if lo == 0.0 { 0.0 } else { lo * (-x).ln_1p() };
    Ok(((up + down) / std::f64::consts::LN_2).max(0.0))
}

fn entropy_term(p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// A 2×2 row-stochastic matrix; `w[x][y]` is the probability of output `y` on input `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryChannel {
    w: [[f64; 2]; 2],
}

impl BinaryChannel {
    pub fn new(w: [[f64; 2]; 2]) -> Result<Self> {
        for row in &w {
            if row.iter().any(|&v| v.is_nan() || v < 0.0) || (row[0] + row[1] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParams(format!(
                    "channel row {row:?} is not a probability vector"
                )));
            }
        }
        Ok(BinaryChannel { w })
    }

    pub fn identity() -> Self {
        BinaryChannel {
            w: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn flip() -> Self {
        BinaryChannel {
            w: [[0.0, 1.0], [1.0, 0.0]],
        }
    }

    /// The constant channel always emitting `bit`.
    pub fn constant(bit: bool) -> Self {
        let row = if bit { [0.0, 1.0] } else { [1.0, 0.0] };
        BinaryChannel { w: [row, row] }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.w
    }

    pub fn prob(&self, x: bool, y: bool) -> f64 {
        self.w[x as usize][y as usize]
    }

    /// Output distribution for input distribution `p`.
    pub fn apply(&self, p: BitDistribution) -> BitDistribution {
        BitDistribution((p.p0() * self.w[0][1] + p.p1() * self.w[1][1]).clamp(0.0, 1.0))
    }

    pub fn max_abs_diff(&self, other: &BinaryChannel) -> f64 {
        let mut d: f64 = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                d = d.max((self.w[x][y] - other.w[x][y]).abs());
            }
        }
        d
    }

    pub fn approx_eq(&self, other: &BinaryChannel, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

/// Binary symmetric channel parameterized by its flip probability.
pub fn bsc(flip: f64) -> Result<BinaryChannel> {
    check_unit("flip", flip)?;
    Ok(BinaryChannel {
        w: [[1.0 - flip, flip], [flip, 1.0 - flip]],
    })
}

/// Runs `first`, then feeds its output into `second`.
pub fn compose(first: &BinaryChannel, second: &BinaryChannel) -> BinaryChannel {
    let mut w = [[0.0; 2]; 2];
    for (x, row) in w.iter_mut().enumerate() {
        for (z, entry) in row.iter_mut().enumerate() {
            *entry = (0..2).map(|y| first.w[x][y] * second.w[y][z]).sum();
        }
    }
    BinaryChannel { w }
}

/// `I(p; W) = H(p) + H(Wp) − H(p, W)`.
pub fn mutual_information(p: BitDistribution, w: &BinaryChannel) -> f64 {
    let input = entropy_term(p.p0()) + entropy_term(p.p1());
    let output = {
        let q = w.apply(p);
        entropy_term(q.p0()) + entropy_term(q.p1())
    };
    let joint: f64 = (0..2)
        .flat_map(|x| (0..2).map(move |y| (x, y)))
        .map(|(x, y)| entropy_term(p.prob(x == 1) * w.w[x][y]))
        .sum();
    input + output - joint
}

/// Two-user MAC with a binary state: `p(c = 1 | a, b, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacKernel {
    w: [[[BitDistribution; 2]; 2]; 2],
}

impl MacKernel {
    pub fn new(w: [[[BitDistribution; 2]; 2]; 2]) -> Self {
        MacKernel { w }
    }

    /// The binary adder channel `(a, b) ↦ a ⊕ b`, ignoring the state.
    pub fn adder() -> Self {
        Self::adder_then(&BinaryChannel::identity(), &BinaryChannel::identity())
    }

    /// `W_s ∘ I`: the adder channel followed by `on_state0` or `on_state1`.
    pub fn adder_then(on_state0: &BinaryChannel, on_state1: &BinaryChannel) -> Self {
        let mut w = [[[BitDistribution(0.0); 2]; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let sum = (a ^ b) == 1;
                w[a][b][0] = BitDistribution(on_state0.prob(sum, true));
                w[a][b][1] = BitDistribution(on_state1.prob(sum, true));
            }
        }
        MacKernel { w }
    }

    pub fn conditional(&self, a: bool, b: bool, s: bool) -> BitDistribution {
        self.w[a as usize][b as usize][s as usize]
    }

    pub fn max_abs_diff(&self, other: &MacKernel) -> f64 {
        let mut d: f64 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for s in 0..2 {
                    d = d.max((self.w[a][b][s].p1() - other.w[a][b][s].p1()).abs());
                }
            }
        }
        d
    }
}

/// `n` i.i.d. draws from `p`.
pub fn sample_iid<R: Rng + ?Sized>(p: BitDistribution, n: usize, rng: &mut R) -> BitString {
    (0..n).map(|_| rng.random::<f64>() < p.p1()).collect()
}

/// `binomial(n, k)` in exact arithmetic; `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `ln binomial(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    statrs::function::factorial::ln_binomial(n as u64, k as u64)
}

/// The type class `T_t^n`: all length-`n` strings with exactly `t` ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeClass {
    n: usize,
    t: usize,
}

impl TypeClass {
    pub fn new(n: usize, t: usize) -> Result<Self> {
        if t > n {
            return Err(Error::InvalidParams(format!(
                "weight {t} exceeds length {n}"
            )));
        }
        Ok(TypeClass { n, t })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> usize {
        self.t
    }

    /// Exact size for `n ≤ 120`.
    pub fn size(&self) -> Option<u128> {
        if self.n <= EXACT_BINOMIAL_MAX_N {
            binomial(self.n, self.t)
        } else {
            None
        }
    }

    pub fn ln_size(&self) -> f64 {
        ln_binomial(self.n, self.t)
    }

    pub fn contains(&self, x: &BitString) -> bool {
        x.len() == self.n && x.weight() == self.t
    }

    /// Mass `π_t(x)` of the uniform distribution on the class.
    pub fn uniform_mass(&self, x: &BitString) -> f64 {
        if self.contains(x) {
            (-self.ln_size()).exp()
        } else {
            0.0
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BitString {
        let mut x = BitString::zeros(self.n);
        for i in index::sample(rng, self.n, self.t) {
            x.set(i, true);
        }
        x
    }

    /// All members in lexicographic order. Intended for small `n`.
    pub fn members(&self) -> impl Iterator<Item = BitString> + '_ {
        assert!(self.n < 64, "enumeration limited to n < 64");
        let n = self.n;
        let t = self.t as u32;
        (0..1u64 << n)
            .filter(move |v| v.count_ones() == t)
            .map(move |v| BitString::from_index(v, n))
    }
}

/// Strings whose number of ones deviates from `n·p` by at most `n·δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaTypicalSet {
    pub n: usize,
    pub p: BitDistribution,
    pub delta: f64,
}

impl DeltaTypicalSet {
    pub fn new(n: usize, p: BitDistribution, delta: f64) -> Result<Self> {
        if delta.is_nan() || delta < 0.0 {
            return Err(Error::InvalidParams(format!(
                "slack {delta} must be non-negative"
            )));
        }
        Ok(DeltaTypicalSet { n, p, delta })
    }

    pub fn contains(&self, x: &BitString) -> bool {
        let n = self.n as f64;
        x.len() == self.n && (x.weight() as f64 - n * self.p.p1()).abs() <= n * self.delta
    }

    /// `p^{⊗n}` mass of the set, summed over type classes.
    pub fn iid_mass(&self) -> f64 {
        let n = self.n as f64;
        (0..=self.n)
            .filter(|&t| (t as f64 - n * self.p.p1()).abs() <= n * self.delta)
            .map(|t| iid_type_mass(self.n, t, self.p.p1()))
            .sum()
    }
}

/// `p^{⊗n}(T_t^n)`, computed in log space.
pub fn iid_type_mass(n: usize, t: usize, p1: f64) -> f64 {
    let log_term = |k: usize, p: f64| {
        if k == 0 {
            0.0
        } else if p == 0.0 {
            f64::NEG_INFINITY
        } else {
            k as f64 * p.ln()
        }
    };
    (ln_binomial(n, t) + log_term(t, p1) + log_term(n - t, 1.0 - p1)).exp()
}
