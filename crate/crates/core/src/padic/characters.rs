//! Multiplicative characters of `(Z/p^C)^x`, additive character values and
//! Gauss sums, for odd `p`.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::padic::complex::ComplexValue;
use crate::padic::modarith::{mul_mod, pow_mod, ppow};
use crate::rational::{q_pow, Q};

/// Smallest integer generating `(Z/p^2)^x`, hence `(Z/p^k)^x` for all `k`.
pub fn primitive_root(p: u64) -> u64 {
    let phi = p - 1;
    let mut primes = Vec::new();
    let mut n = phi;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            primes.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    let p2 = (p as u128) * (p as u128);
    (2..p)
        .find(|&g| {
            primes.iter().all(|&q| pow_mod(g as u128, (phi / q) as u128, p as u128) != 1)
                && pow_mod(g as u128, phi as u128, p2) != 1
        })
        .unwrap_or(1)
}

/// Characters `chi_k(g^j) = exp(2 pi i k j / phi(p^C))`, `0 <= k < phi`.
#[derive(Clone, Debug)]
pub struct CharacterGroup {
    pub p: u64,
    pub level: u32,
    pub generator: u64,
    modulus: u128,
    order: u128,
    /// `dlog[r]` for units `r` mod `p^C`.
    dlog: Vec<u64>,
}

pub const MAX_TABLE: u128 = 1 << 24;

impl CharacterGroup {
    pub fn new(p: u64, level: u32) -> Result<Self> {
        if p == 2 {
            return Err(Error::Invalid("characters are implemented for odd p only".into()));
        }
        let level = level.max(1);
        let modulus = ppow(p, level);
        if modulus > MAX_TABLE {
            return Err(Error::Budget(format!("discrete log table of size {modulus}")));
        }
        let order = modulus / p as u128 * (p as u128 - 1);
        let g = primitive_root(p);
        let mut dlog = vec![u64::MAX; modulus as usize];
        let mut x = 1u128;
        for j in 0..order {
            dlog[x as usize] = j as u64;
            x = mul_mod(x, g as u128, modulus);
        }
        Ok(CharacterGroup { p, level, generator: g, modulus, order, dlog })
    }

    pub fn order(&self) -> u128 {
        self.order
    }

    /// 0 for the trivial character, else the smallest `c >= 1` with
    /// `chi` trivial on `1 + p^c Z_p`.
    pub fn conductor(&self, k: u128) -> u32 {
        if k % self.order == 0 {
            return 0;
        }
        (1..=self.level)
            .find(|&c| k % ppow(self.p, self.level - c) == 0)
            .unwrap_or(self.level)
    }

    pub fn inverse(&self, k: u128) -> u128 {
        (self.order - k % self.order) % self.order
    }

    /// Phase `k dlog(r) / phi` in `[0, 1)`; `r` must be a unit.
    pub fn phase(&self, k: u128, r: u128) -> Q {
        let j = self.dlog[(r % self.modulus) as usize];
        debug_assert!(j != u64::MAX, "not a unit");
        let num = (k % self.order) * j as u128 % self.order;
        Q::new(BigInt::from(num), BigInt::from(self.order))
    }

    pub fn value(&self, k: u128, r: u128) -> ComplexValue {
        ComplexValue::cis(&self.phase(k, r))
    }

    /// `sum_{v in (Z/p^c)^x} chi(v) exp(2 pi i v / p^c)`, `c` the conductor.
    pub fn raw_gauss_sum(&self, k: u128) -> ComplexValue {
        let c = self.conductor(k);
        let pc = ppow(self.p, c);
        (1..pc)
            .filter(|v| v % self.p as u128 != 0)
            .map(|v| {
                let phase = self.phase(k, v) + Q::new(BigInt::from(v), BigInt::from(pc));
                ComplexValue::cis(&phase)
            })
            .sum()
    }

    /// `g_chi = (p-1)^-1 p^(1-c) sum_v chi(v) Psi(v / p^c)`.
    pub fn gauss_sum(&self, k: u128) -> ComplexValue {
        let c = self.conductor(k) as i64;
        let f = q_pow(self.p, 1 - c) / Q::from_integer(BigInt::from(self.p - 1));
        self.raw_gauss_sum(k).scale_q(&f)
    }
}

/// `Psi(x) = exp(2 pi i {x}_p)` for `x = n / p^v`.
pub fn psi(n: u128, p: u64, v: u32) -> ComplexValue {
    if v == 0 {
        return ComplexValue::new(1.0, 0.0, 0.0);
    }
    let m = ppow(p, v);
    ComplexValue::cis(&Q::new(BigInt::from(n % m), BigInt::from(m)))
}

/// Sum of `chi(r)` weights: `sum mass * chi_k(r)`.
pub fn weighted_sum<'a, I: Iterator<Item = (&'a u128, &'a Q)>>(g: &CharacterGroup, k: u128, it: I) -> ComplexValue {
    let mut by_phase: std::collections::BTreeMap<Q, Q> = std::collections::BTreeMap::new();
    for (r, m) in it {
        if m.is_zero() {
            continue;
        }
        *by_phase.entry(g.phase(k, *r)).or_insert_with(Q::zero) += m;
    }
    by_phase
        .iter()
        .filter(|(_, m)| !m.is_zero())
        .map(|(ph, m)| ComplexValue::cis(ph).scale_q(m))
        .sum()
}
