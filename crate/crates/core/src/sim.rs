//! Block-level simulation of the jammed two-sender channel.
//!
//! Per position `i` the environment draws uniform `xᵢ, yᵢ`, the modulators
//! output `(αᵢ, βᵢ) ~ q(·|xᵢ, yᵢ)`, the jammer sees the full noise string
//! `eᵢ = xᵢ·yᵢ ⊕ αᵢ ⊕ βᵢ` and picks `s^n`, and the receiver gets
//! `cᵢ = aᵢ ⊕ bᵢ ⊕ eᵢ ⊕ sᵢ`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::correlation::Correlation;
use crate::error::{check_unit, Error, Result};
use crate::info::{BitDistribution, MacKernel};
use crate::jamming::{check_admissible, floor_budget, JammerStrategy};

/// Largest block length for [`exact_output_distribution`].
pub const EXACT_BLOCK_MAX_N: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockTrace {
    pub n: usize,
    pub x: BitString,
    pub y: BitString,
    pub alpha: BitString,
    pub beta: BitString,
    /// `x·y ⊕ α ⊕ β`, before jamming.
    pub e: BitString,
    pub s: BitString,
    pub c: BitString,
}

impl BlockTrace {
    /// `cᵢ = aᵢ ⊕ bᵢ ⊕ eᵢ ⊕ sᵢ` and `eᵢ = xᵢyᵢ ⊕ αᵢ ⊕ βᵢ` at every position.
    pub fn satisfies_identity(&self, a: &BitString, b: &BitString) -> bool {
        (0..self.n).all(|i| {
            let e = (self.x.get(i) & self.y.get(i)) ^ self.alpha.get(i) ^ self.beta.get(i);
            e == self.e.get(i) && self.c.get(i) == a.get(i) ^ b.get(i) ^ e ^ self.s.get(i)
        })
    }

    /// Noise after jamming, `e ⊕ s`.
    pub fn total_noise(&self) -> BitString {
        &self.e ^ &self.s
    }

    pub fn to_record(&self, seed: u64) -> TraceRecord {
        TraceRecord {
            n: self.n,
            x: self.x.to_hex(),
            y: self.y.to_hex(),
            alpha: self.alpha.to_hex(),
            beta: self.beta.to_hex(),
            e: self.e.to_hex(),
            s: self.s.to_hex(),
            c: self.c.to_hex(),
            seed,
        }
    }
}

/// One JSON object per block; bit strings are hex-packed (see [`BitString::to_hex`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub n: usize,
    pub x: String,
    pub y: String,
    pub alpha: String,
    pub beta: String,
    pub e: String,
    pub s: String,
    pub c: String,
    pub seed: u64,
}

impl TraceRecord {
    pub fn to_trace(&self) -> Result<BlockTrace> {
        let n = self.n;
        Ok(BlockTrace {
            n,
            x: BitString::from_hex(&self.x, n)?,
            y: BitString::from_hex(&self.y, n)?,
            alpha: BitString::from_hex(&self.alpha, n)?,
            beta: BitString::from_hex(&self.beta, n)?,
            e: BitString::from_hex(&self.e, n)?,
            s: BitString::from_hex(&self.s, n)?,
            c: BitString::from_hex(&self.c, n)?,
        })
    }
}

fn check_block(
    a: &BitString,
    b: &BitString,
    jammer: &JammerStrategy,
    lambda: f64,
) -> Result<usize> {
    check_unit("lambda", lambda)?;
    let n = a.len();
    if n == 0 {
        return Err(Error::InvalidParams(
            "block length must be at least 1".into(),
        ));
    }
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    if let Some(m) = jammer.block_length() {
        if m != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: m,
            });
        }
    }
    Ok(n)
}

/// Sends one block. The jammer's output is checked against `⌊nΛ⌋`.
pub fn transmit_block<R: Rng + ?Sized>(
    corr: &Correlation,
    a: &BitString,
    b: &BitString,
    jammer: &JammerStrategy,
    lambda: f64,
    rng: &mut R,
) -> Result<BlockTrace> {
    let n = check_block(a, b, jammer, lambda)?;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    for _ in 0..n {
        let xi: bool = rng.random();
        let yi: bool = rng.random();
        let (ai, bi) = corr.sample(xi, yi, rng);
        x.push(xi);
        y.push(yi);
        alpha.push(ai);
        beta.push(bi);
        e.push((xi & yi) ^ ai ^ bi);
    }
    let e = BitString::from_bits(e);
    let s = jammer.jam(&e, rng);
    let budget = floor_budget(lambda, n);
    if !check_admissible(&s, budget) {
        return Err(Error::Inadmissible {
            weight: s.weight(),
            budget,
        });
    }
    let c = (0..n)
        .map(|i| a.get(i) ^ b.get(i) ^ e.get(i) ^ s.get(i))
        .collect();
    Ok(BlockTrace {
        n,
        x: BitString::from_bits(x),
        y: BitString::from_bits(y),
        alpha: BitString::from_bits(alpha),
        beta: BitString::from_bits(beta),
        e,
        s,
        c,
    })
}

/// `w(c | a, b, s)` averaged over uniform `(x, y)` and `q(α, β | x, y)`.
pub fn effective_kernel(corr: &Correlation) -> MacKernel {
    let mut w = [[[BitDistribution::uniform(); 2]; 2]; 2];
    for a in [false, true] {
        for b in [false, true] {
            for s in [false, true] {
                let mut p1 = 0.0;
                for x in [false, true] {
                    for y in [false, true] {
                        for alpha in [false, true] {
                            for beta in [false, true] {
                                if a ^ b ^ (x & y) ^ alpha ^ beta ^ s {
                                    p1 += 0.25 * corr.prob(alpha, beta, x, y);
                                }
                            }
                        }
                    }
                }
                w[a as usize][b as usize][s as usize] =
                    BitDistribution::new(p1.clamp(0.0, 1.0)).expect("clamped");
            }
        }
    }
    MacKernel::new(w)
}

/// Per-position law of the noise bit, summed over all `(x, y, α, β)`.
fn noise_bit_distribution(corr: &Correlation) -> f64 {
    let mut p1 = 0.0;
    for x in [false, true] {
        for y in [false, true] {
            for alpha in [false, true] {
                for beta in [false, true] {
                    if (x & y) ^ alpha ^ beta {
                        p1 += 0.25 * corr.prob(alpha, beta, x, y);
                    }
                }
            }
        }
    }
    p1
}

/// Exact law of `c^n`, indexed by [`BitString::to_index`]. The jammer only
/// sees `e^n`, so the sum over environment and modulator outcomes is grouped
/// by the noise string they produce.
pub fn exact_output_distribution(
    corr: &Correlation,
    a: &BitString,
    b: &BitString,
    jammer: &JammerStrategy,
    lambda: f64,
) -> Result<Vec<f64>> {
    let n = check_block(a, b, jammer, lambda)?;
    if n > EXACT_BLOCK_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: EXACT_BLOCK_MAX_N,
        });
    }
    let budget = floor_budget(lambda, n);
    let f = noise_bit_distribution(corr);
    let ab = a ^ b;
    let mut dist = vec![0.0; 1 << n];
    for idx in 0..1u64 << n {
        let e = BitString::from_index(idx, n);
        let pe: f64 = e.iter().map(|bit| if bit { f } else { 1.0 - f }).product();
        if pe == 0.0 {
            continue;
        }
        for (s, ps) in jammer.outcomes(&e) {
            if !check_admissible(&s, budget) {
                return Err(Error::Inadmissible {
                    weight: s.weight(),
                    budget,
                });
            }
            let c = &(&ab ^ &e) ^ &s;
            dist[c.to_index() as usize] += pe * ps;
        }
    }
    Ok(dist)
}
