//! Prime field arithmetic on `u64` residues.
//!
//! All polynomial and matrix code in this crate works over a single prime
//! field `F_p`. The default prime is the Mersenne prime `2^61 - 1`, which is
//! large enough that random-substitution rank arguments lose nothing in
//! practice and admits a fast reduction. Any other prime below `2^62` can be
//! used instead, e.g. tiny fields for exhaustive oracles in tests.

use thiserror::Error;

/// The Mersenne prime `2^61 - 1`.
pub const DEFAULT_PRIME: u64 = (1 << 61) - 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} out of range (need 2 <= p < 2^62)")]
    OutOfRange(u64),
}

/// A prime field `F_p`, passed by value wherever arithmetic is needed.
///
/// Elements are plain `u64` residues in `[0, p)`; the struct only carries the
/// modulus and a flag for the Mersenne fast path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    p: u64,
    mersenne61: bool,
}

impl Default for Field {
    fn default() -> Self {
        Field { p: DEFAULT_PRIME, mersenne61: true }
    }
}

impl Field {
    /// Field with a caller-supplied prime modulus.
    pub fn new(p: u64) -> Result<Field, FieldError> {
        if p < 2 || p >= (1 << 62) {
            return Err(FieldError::OutOfRange(p));
        }
        if !is_prime_u64(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Field { p, mersenne61: p == DEFAULT_PRIME })
    }

    pub fn prime(self) -> u64 {
        self.p
    }

    /// Canonical residue of a signed integer.
    pub fn from_i64(self, v: i64) -> u64 {
        let r = v.rem_euclid(self.p as i64);
        r as u64
    }

    pub fn from_u64(self, v: u64) -> u64 {
        v % self.p
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        if self.mersenne61 {
            reduce_m61((a as u128) * (b as u128))
        } else {
            ((a as u128 * b as u128) % self.p as u128) as u64
        }
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a nonzero element (Fermat).
    pub fn inv(self, a: u64) -> u64 {
        debug_assert!(a % self.p != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }

    /// Uniform element of `[0, p)`.
    pub fn rand_elem<R: rand::Rng>(self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }

    /// Uniform nonzero element.
    pub fn rand_nonzero<R: rand::Rng>(self, rng: &mut R) -> u64 {
        rng.gen_range(1..self.p)
    }
}

#[inline]
fn reduce_m61(x: u128) -> u64 {
    const M: u64 = DEFAULT_PRIME;
    let lo = (x as u64) & M;
    let hi = (x >> 61) as u64;
    let mut r = lo + hi;
    if r >= M {
        r -= M;
    }
    if r >= M {
        r -= M;
    }
    r
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for `u64` (the 12 usual witnesses suffice).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn default_prime_is_prime() {
        assert!(is_prime_u64(DEFAULT_PRIME));
        assert_eq!(Field::default().prime(), DEFAULT_PRIME);
    }

    #[test]
    fn rejects_composites() {
        assert_eq!(Field::new(1), Err(FieldError::OutOfRange(1)));
        assert_eq!(Field::new(91), Err(FieldError::NotPrime(91)));
        assert!(Field::new(5).is_ok());
    }

    #[test]
    fn inverse_roundtrip() {
        let f = Field::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let a = f.rand_nonzero(&mut rng);
            assert_eq!(f.mul(a, f.inv(a)), 1);
        }
        let f5 = Field::new(5).unwrap();
        for a in 1..5 {
            assert_eq!(f5.mul(a, f5.inv(a)), 1);
        }
    }

    #[test]
    fn signed_reduction() {
        let f = Field::new(7).unwrap();
        assert_eq!(f.from_i64(-1), 6);
        assert_eq!(f.from_i64(-14), 0);
        assert_eq!(f.from_i64(9), 2);
    }

    #[test]
    fn mersenne_matches_generic() {
        let f = Field::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let a = f.rand_elem(&mut rng);
            let b = f.rand_elem(&mut rng);
            let generic = ((a as u128 * b as u128) % DEFAULT_PRIME as u128) as u64;
            assert_eq!(f.mul(a, b), generic);
        }
    }
}
