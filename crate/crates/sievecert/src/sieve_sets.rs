//! Exact sifted counts on finite integer intervals and the Buchstab identity
//! checked over them.

use std::sync::OnceLock;
use thiserror::Error;

/// Largest admissible interval endpoint.
pub const MAX_HI: u64 = 1_000_000_000;
const SEGMENT: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SieveError {
    #[error("interval [{lo}, {hi}] must satisfy 2 <= lo <= hi <= 10^9")]
    InvalidInterval { lo: u64, hi: u64 },
    #[error("divisor must be at least 1")]
    InvalidDivisor,
    #[error("thresholds must satisfy 2 <= z1 < z2, got z1 = {z1}, z2 = {z2}")]
    InvalidThresholds { z1: f64, z2: f64 },
}

/// The integers `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SievedInterval {
    lo: u64,
    hi: u64,
}

impl SievedInterval {
    pub fn new(lo: u64, hi: u64) -> Result<Self, SieveError> {
        if lo < 2 || lo > hi || hi > MAX_HI {
            return Err(SieveError::InvalidInterval { lo, hi });
        }
        Ok(SievedInterval { lo, hi })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    /// The range of m with lo ≤ m·d ≤ hi, or `None` when it is empty.
    pub fn quotient_range(&self, d: u64) -> Option<(u64, u64)> {
        let first = self.lo.div_ceil(d);
        let last = self.hi / d;
        (first <= last).then_some((first, last))
    }
}

/// Primes up to √(10⁹), built once.
fn base_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(31_623))
}

fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            for j in (i * i..=n).step_by(i) {
                composite[j] = true;
            }
        }
    }
    out
}

/// Smallest prime factor of every integer in `first..first + len`, with 0
/// standing for the integer 1.
fn smallest_factors(first: u64, len: usize) -> Vec<u64> {
    let mut spf = vec![0u64; len];
    let last = first + len as u64 - 1;
    for &p in base_primes() {
        if p * p > last {
            break;
        }
        let start = first.div_ceil(p).max(p) * p;
        let mut m = start;
        while m <= last {
            let slot = &mut spf[(m - first) as usize];
            if *slot == 0 {
                *slot = p;
            }
            m += p;
        }
    }
    for (k, slot) in spf.iter_mut().enumerate() {
        let m = first + k as u64;
        if *slot == 0 && m > 1 {
            *slot = m;
        }
    }
    spf
}

/// 1 when every prime factor of `n` is at least `z`, else 0; ψ(1, z) = 1.
pub fn psi(n: u64, z: f64) -> u8 {
    if n == 1 {
        return 1;
    }
    let smallest = base_primes()
        .iter()
        .take_while(|&&p| p * p <= n)
        .find(|&&p| n % p == 0)
        .copied()
        .unwrap_or(n);
    u8::from(smallest as f64 >= z)
}

/// #{m : lo ≤ m·d ≤ hi, ψ(m, z) = 1}.
pub fn sifted_count(c: SievedInterval, d: u64, z: f64) -> Result<u64, SieveError> {
    if d == 0 {
        return Err(SieveError::InvalidDivisor);
    }
    let Some((first, last)) = c.quotient_range(d) else {
        return Ok(0);
    };
    let mut count = 0;
    let mut start = first;
    while start <= last {
        let len = ((last - start + 1) as usize).min(SEGMENT);
        count += smallest_factors(start, len)
            .iter()
            .filter(|&&p| p == 0 || p as f64 >= z)
            .count() as u64;
        start += len as u64;
    }
    Ok(count)
}

/// Primes p with `z1 ≤ p < z2` and `p ≤ cap`, in increasing order.
pub fn primes_between(z1: f64, z2: f64, cap: u64) -> Vec<u64> {
    let first = (z1.ceil().max(2.0)) as u64;
    let last = if z2 > cap as f64 {
        cap
    } else {
        (z2.ceil() as u64).saturating_sub(1)
    };
    if first > last {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut start = first;
    while start <= last {
        let len = ((last - start + 1) as usize).min(SEGMENT);
        for (k, &p) in smallest_factors(start, len).iter().enumerate() {
            let m = start + k as u64;
            if p == m && (m as f64) >= z1 && (m as f64) < z2 {
                out.push(m);
            }
        }
        start += len as u64;
    }
    out
}

/// Both sides of S(C_d, z₂) = S(C_d, z₁) − Σ_{z₁ ≤ p < z₂} S(C_{dp}, p).
pub fn buchstab_sides(
    c: SievedInterval,
    d: u64,
    z1: f64,
    z2: f64,
) -> Result<(u64, i64), SieveError> {
    if d == 0 {
        return Err(SieveError::InvalidDivisor);
    }
    if !(z1 >= 2.0 && z1 < z2) {
        return Err(SieveError::InvalidThresholds { z1, z2 });
    }
    let left = sifted_count(c, d, z2)?;
    let mut right = sifted_count(c, d, z1)? as i64;
    for p in primes_between(z1, z2, c.hi() / d) {
        let dp = d.checked_mul(p).filter(|&dp| dp <= c.hi());
        if let Some(dp) = dp {
            right -= sifted_count(c, dp, p as f64)? as i64;
        }
    }
    Ok((left, right))
}

/// True iff the Buchstab identity holds exactly for (c, d, z₁, z₂).
pub fn buchstab_identity_check(
    c: SievedInterval,
    d: u64,
    z1: f64,
    z2: f64,
) -> Result<bool, SieveError> {
    let (left, right) = buchstab_sides(c, d, z1, z2)?;
    Ok(left as i64 == right)
}
