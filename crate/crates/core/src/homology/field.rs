use crate::error::{Error, Result};

/// The prime field `Z_p` for `p < 2^31`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 31 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p: p as u32 })
    }

    pub fn modulus(self) -> u32 {
        self.p
    }

    pub fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }

    pub fn sub(self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.p as u64 - b as u64) % self.p as u64) as u32
    }

    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn neg(self, a: u32) -> u32 {
        self.sub(0, a)
    }

    /// Multiplicative inverse by Fermat's little theorem. `a` must be non-zero.
    pub fn inv(self, a: u32) -> u32 {
        debug_assert!(a % self.p != 0);
        self.pow(a, self.p - 2)
    }

    pub fn pow(self, mut base: u32, mut exp: u32) -> u32 {
        let mut acc = 1 % self.p;
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

    /// `(-1)^i` as a field element.
    pub fn sign(self, i: usize) -> u32 {
        if i % 2 == 0 {
            1 % self.p
        } else {
            self.p - 1
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_primes() {
        assert!(PrimeField::new(2).is_ok());
        assert!(PrimeField::new(2_147_483_647).is_ok());
        for n in [0, 1, 4, 9, 2_147_483_648] {
            assert!(PrimeField::new(n).is_err(), "{n}");
        }
    }

    #[test]
    fn inverses() {
        for p in [2u64, 3, 5, 7, 101, 65_521] {
            let f = PrimeField::new(p).unwrap();
            for a in 1..(p.min(200) as u32) {
                assert_eq!(f.mul(a, f.inv(a)), 1, "p={p} a={a}");
            }
        }
        let f = PrimeField::new(2).unwrap();
        assert_eq!(f.sign(1), 1);
        assert_eq!(f.neg(1), 1);
    }
}
