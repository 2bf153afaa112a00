//! Arithmetic modulo prime powers in `u128`.

/// `a * b mod m` without overflow for any `m < 2^127`.
pub fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    let (a, b) = (a % m, b % m);
    if let Some(x) = a.checked_mul(b) {
        return x % m;
    }
    let mut r = 0u128;
    let mut x = a;
    let mut y = b;
    while y > 0 {
        if y & 1 == 1 {
            r = add_mod(r, x, m);
        }
        x = add_mod(x, x, m);
        y >>= 1;
    }
    r
}

pub fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    let s = a.wrapping_add(b);
    if s < a || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

pub fn sub_mod(a: u128, b: u128, m: u128) -> u128 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn pow_mod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u128, m: u128) -> Option<u128> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u128)
}

/// `p^k`, panicking on overflow.
pub fn ppow(p: u64, k: u32) -> u128 {
    (p as u128).checked_pow(k).expect("prime power overflows u128")
}

/// Valuation of `x mod p^cap`, returning `cap` for zero.
pub fn val_mod(mut x: u128, p: u64, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let p = p as u128;
    let mut v = 0;
    while x % p == 0 && v < cap {
        x /= p;
        v += 1;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverses() {
        assert_eq!(inv_mod(2, 9), Some(5));
        assert_eq!(inv_mod(3, 9), None);
        let m = ppow(7, 40);
        let a = 123456789u128;
        let i = inv_mod(a, m).unwrap();
        assert_eq!(mul_mod(a, i, m), 1);
    }

    #[test]
    fn valuation() {
        assert_eq!(val_mod(18, 3, 5), 2);
        assert_eq!(val_mod(0, 3, 5), 5);
    }
}
