//! Polynomials over GF(2) and the binary extension fields GF(2^n) used by the
//! key-extraction and confirmation hashes.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::bits::BitString;

/// Polynomial over GF(2); bit `i` of the limb vector is the coefficient of `x^i`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Gf2Poly {
    limbs: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0)
    }

    pub fn monomial(k: usize) -> Self {
        let mut p = Self {
            limbs: vec![0; k / 64 + 1],
        };
        p.limbs[k / 64] |= 1 << (k % 64);
        p
    }

    pub fn from_exponents(exps: &[usize]) -> Self {
        let mut p = Self::zero();
        for &e in exps {
            p = p.add(&Self::monomial(e));
        }
        p
    }

    pub fn from_bits(bits: &BitString) -> Self {
        let mut limbs = vec![0u64; bits.len().div_ceil(64)];
        for (i, b) in bits.iter().enumerate() {
            if b {
                limbs[i / 64] |= 1 << (i % 64);
            }
        }
        Self { limbs }.normalized()
    }

    /// Low `len` coefficients as a bit string.
    pub fn to_bits(&self, len: usize) -> BitString {
        (0..len).map(|i| self.coeff(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn degree(&self) -> Option<usize> {
        self.limbs
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &l)| l != 0)
            .map(|(i, &l)| i * 64 + 63 - l.leading_zeros() as usize)
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.limbs
            .get(i / 64)
            .is_some_and(|l| (l >> (i % 64)) & 1 == 1)
    }

    fn flip(&mut self, i: usize) {
        if self.limbs.len() <= i / 64 {
            self.limbs.resize(i / 64 + 1, 0);
        }
        self.limbs[i / 64] ^= 1 << (i % 64);
    }

    fn normalized(mut self) -> Self {
        while self.limbs.last() == Some(&0) {
            self.limbs.pop();
        }
        self
    }

    pub fn add(&self, other: &Gf2Poly) -> Gf2Poly {
        let len = self.limbs.len().max(other.limbs.len());
        let limbs = (0..len)
            .map(|i| self.limbs.get(i).unwrap_or(&0) ^ other.limbs.get(i).unwrap_or(&0))
            .collect();
        Self { limbs }.normalized()
    }

    pub fn mul(&self, other: &Gf2Poly) -> Gf2Poly {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0u64; self.limbs.len() + other.limbs.len()];
        for (i, &a) in self.limbs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.limbs.iter().enumerate() {
                let (lo, hi) = clmul64(a, b);
                out[i + j] ^= lo;
                out[i + j + 1] ^= hi;
            }
        }
        Self { limbs: out }.normalized()
    }

    pub fn rem(&self, modulus: &Gf2Poly) -> Gf2Poly {
        let m_deg = modulus.degree().expect("division by the zero polynomial");
        let terms: Vec<usize> = (0..m_deg).filter(|&i| modulus.coeff(i)).collect();
        let mut r = self.clone();
        let Some(mut deg) = r.degree() else {
            return r;
        };
        while deg >= m_deg {
            if r.coeff(deg) {
                let shift = deg - m_deg;
                r.flip(deg);
                for &t in &terms {
                    r.flip(t + shift);
                }
            }
            if deg == 0 {
                break;
            }
            deg -= 1;
        }
        r.normalized()
    }

    pub fn gcd(&self, other: &Gf2Poly) -> Gf2Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    pub fn square(&self) -> Gf2Poly {
        let mut limbs = Vec::with_capacity(2 * self.limbs.len());
        for &l in &self.limbs {
            limbs.push(spread(l as u32));
            limbs.push(spread((l >> 32) as u32));
        }
        Self { limbs }.normalized()
    }

    /// Rabin's test, after a cheap sieve for factors of degree at most 8.
    pub fn is_irreducible(&self) -> bool {
        let Some(n) = self.degree() else {
            return false;
        };
        if n == 0 {
            return false;
        }
        let x = Self::monomial(1);
        let divisors = prime_divisors(n);
        let checkpoints: Vec<usize> = divisors.iter().map(|p| n / p).collect();
        let mut power = x.rem(self);
        for i in 1..=n {
            power = power.square().rem(self);
            let sieve = i <= 8 && i < n;
            if sieve || checkpoints.contains(&i) {
                if self.gcd(&power.add(&x)).degree() != Some(0) {
                    return false;
                }
            }
        }
        power == x.rem(self)
    }
}

/// Interleaves zero bits: bit `i` moves to bit `2i`.
fn spread(v: u32) -> u64 {
    let mut x = u64::from(v);
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    (x | (x << 1)) & 0x5555_5555_5555_5555
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Carry-less 64x64 -> 128-bit product as (low, high).
fn clmul64(a: u64, b: u64) -> (u64, u64) {
    let (mut lo, mut hi) = (0u64, 0u64);
    let mut bits = b;
    while bits != 0 {
        let i = bits.trailing_zeros();
        lo ^= a << i;
        if i != 0 {
            hi ^= a >> (64 - i);
        }
        bits &= bits - 1;
    }
    (lo, hi)
}

/// GF(2^n) with the first low-weight irreducible modulus found by searching
/// trinomials `x^n + x^k + 1`, then pentanomials `x^n + x^a + x^b + x^c + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryField {
    degree: usize,
    modulus: Gf2Poly,
}

impl BinaryField {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "field degree must be positive");
        Self {
            degree,
            modulus: cached_modulus(degree),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modulus(&self) -> &Gf2Poly {
        &self.modulus
    }

    /// Product of two field elements given as `degree`-bit strings.
    pub fn mul_bits(&self, a: &BitString, b: &BitString) -> BitString {
        Gf2Poly::from_bits(a)
            .mul(&Gf2Poly::from_bits(b))
            .rem(&self.modulus)
            .to_bits(self.degree)
    }
}

/// First hits of the search below for degrees where it takes seconds.
const PRECOMPUTED: [(usize, [usize; 3]); 2] = [(1024, [19, 6, 1]), (2048, [19, 14, 13])];

fn cached_modulus(n: usize) -> Gf2Poly {
    static CACHE: OnceLock<Mutex<HashMap<usize, Gf2Poly>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().expect("modulus cache poisoned").get(&n) {
        return p.clone();
    }
    let p = match PRECOMPUTED.iter().find(|(d, _)| *d == n) {
        Some((_, [a, b, c])) => Gf2Poly::from_exponents(&[n, *a, *b, *c, 0]),
        None => find_irreducible(n),
    };
    cache
        .lock()
        .expect("modulus cache poisoned")
        .insert(n, p.clone());
    p
}

fn find_irreducible(n: usize) -> Gf2Poly {
    if n == 1 {
        return Gf2Poly::from_exponents(&[1, 0]);
    }
    for k in 1..n {
        let p = Gf2Poly::from_exponents(&[n, k, 0]);
        if p.is_irreducible() {
            return p;
        }
    }
    for a in 3..n {
        for b in 2..a {
            for c in 1..b {
                let p = Gf2Poly::from_exponents(&[n, a, b, c, 0]);
                if p.is_irreducible() {
                    return p;
                }
            }
        }
    }
    unreachable!("every degree >= 2 has an irreducible trinomial or pentanomial in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Trial division by every polynomial of degree 1..=n/2.
    fn irreducible_by_trial_division(p: u64) -> bool {
        let n = 63 - p.leading_zeros() as usize;
        let poly = Gf2Poly {
            limbs: vec![p],
        };
        for d in 1u64..(1 << (n / 2 + 1)) {
            let dd = Gf2Poly { limbs: vec![d] }.normalized();
            if dd.degree().is_none_or(|deg| deg == 0 || deg > n / 2) {
                continue;
            }
            if poly.rem(&dd).is_zero() {
                return false;
            }
        }
        n > 0
    }

    #[test]
    fn squaring_matches_multiplication() {
        let p = Gf2Poly::from_exponents(&[0, 5, 63, 64, 130]);
        assert_eq!(p.square(), p.mul(&p));
    }

    #[test]
    fn rabin_agrees_with_trial_division() {
        for p in 2u64..1 << 11 {
            let poly = Gf2Poly { limbs: vec![p] };
            assert_eq!(poly.is_irreducible(), irreducible_by_trial_division(p), "p = {p:#b}");
        }
    }

    #[test]
    fn irreducible_counts_for_small_degrees() {
        // number of irreducible binary polynomials of degree 1..=8
        let expected = [2, 1, 2, 3, 6, 9, 18, 30];
        for (n, &count) in (1..=8).zip(expected.iter()) {
            let found = (1u64 << n..1 << (n + 1))
                .filter(|&p| Gf2Poly { limbs: vec![p] }.is_irreducible())
                .count();
            assert_eq!(found, count, "degree {n}");
        }
    }

    #[test]
    fn known_moduli() {
        assert_eq!(BinaryField::new(2).modulus(), &Gf2Poly::from_exponents(&[2, 1, 0]));
        assert_eq!(BinaryField::new(3).modulus(), &Gf2Poly::from_exponents(&[3, 1, 0]));
        assert_eq!(BinaryField::new(128).modulus(), &Gf2Poly::from_exponents(&[128, 7, 2, 1, 0]));
        assert_eq!(BinaryField::new(256).modulus(), &Gf2Poly::from_exponents(&[256, 10, 5, 2, 0]));
        for n in [1, 8, 64, 128, 256, 1024, 2048] {
            let f = BinaryField::new(n);
            assert_eq!(f.modulus().degree(), Some(n));
            assert!(f.modulus().is_irreducible());
        }
    }

    #[test]
    fn precomputed_moduli_are_first_search_hits() {
        for (n, [a, b, c]) in PRECOMPUTED {
            // every lexicographically earlier pentanomial must be reducible
            assert!((1..n).all(|k| !Gf2Poly::from_exponents(&[n, k, 0]).is_irreducible()));
            let earlier = (3..=a)
                .flat_map(|x| (2..x).flat_map(move |y| (1..y).map(move |z| (x, y, z))))
                .take_while(|&t| t != (a, b, c));
            for (x, y, z) in earlier {
                assert!(!Gf2Poly::from_exponents(&[n, x, y, z, 0]).is_irreducible());
            }
        }
    }

    #[test]
    fn every_nonzero_element_has_an_inverse() {
        // multiplication by a nonzero element permutes GF(2^6)
        let f = BinaryField::new(6);
        for a in 1u64..64 {
            let mut seen = [false; 64];
            for b in 0u64..64 {
                let prod = f.mul_bits(&BitString::from_u64(a, 6), &BitString::from_u64(b, 6));
                seen[prod.to_u64() as usize] = true;
            }
            assert!(seen.iter().all(|&s| s), "a = {a}");
        }
    }

    proptest! {
        #[test]
        fn multiplication_distributes(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let f = BinaryField::new(61);
            let mask = (1u64 << 61) - 1;
            let (a, b, c) = (
                BitString::from_u64(a & mask, 61),
                BitString::from_u64(b & mask, 61),
                BitString::from_u64(c & mask, 61),
            );
            let lhs = f.mul_bits(&a, &b.xor(&c).unwrap());
            let rhs = f.mul_bits(&a, &b).xor(&f.mul_bits(&a, &c)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn clmul_matches_bitwise(a in any::<u64>(), b in any::<u64>()) {
            let (lo, hi) = clmul64(a, b);
            let mut expect = 0u128;
            for i in 0..64 {
                if (b >> i) & 1 == 1 {
                    expect ^= (a as u128) << i;
                }
            }
            prop_assert_eq!((lo as u128) | ((hi as u128) << 64), expect);
        }
    }
}
