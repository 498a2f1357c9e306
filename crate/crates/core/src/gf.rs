//! Arithmetic in GF(2^v) through log/antilog tables.
//!
//! Field elements are plain `u16` values in polynomial basis: bit `i` is the
//! coefficient of `x^i`. The field is generated by a fixed primitive
//! polynomial per order; see [`PRIMITIVE_POLYS`].

use crate::error::{Error, Result};

/// Smallest supported field order exponent.
pub const MIN_ORDER: u32 = 3;
/// Largest supported field order exponent.
pub const MAX_ORDER: u32 = 12;

/// Primitive polynomials used to generate GF(2^v), indexed by `v - 3`.
///
/// Bit `i` is the coefficient of `x^i`. These are the usual low-weight
/// choices found in the standard tables (Lin & Costello, Appendix A).
///
/// | v  | polynomial                 |
/// |----|----------------------------|
/// | 3  | x^3 + x + 1                |
/// | 4  | x^4 + x + 1                |
/// | 5  | x^5 + x^2 + 1              |
/// | 6  | x^6 + x + 1                |
/// | 7  | x^7 + x^3 + 1              |
/// | 8  | x^8 + x^4 + x^3 + x^2 + 1  |
/// | 9  | x^9 + x^4 + 1              |
/// | 10 | x^10 + x^3 + 1             |
/// | 11 | x^11 + x^2 + 1             |
/// | 12 | x^12 + x^6 + x^4 + x + 1   |
pub const PRIMITIVE_POLYS: [u32; 10] = [
    0x00B, 0x013, 0x025, 0x043, 0x089, 0x11D, 0x211, 0x409, 0x805, 0x1053,
];

/// The finite field GF(2^v).
#[derive(Clone, Debug)]
pub struct GaloisField {
    order_exponent: u32,
    primitive_poly: u32,
    /// `exp[i] = alpha^i`, stored twice over so that `exp[a + b]` never
    /// needs a reduction for `a, b < 2^v - 1`.
    exp: Vec<u16>,
    /// `log[a]` for nonzero `a`; `log[0]` is unused.
    log: Vec<u16>,
}

impl GaloisField {
    pub fn new(order_exponent: u32) -> Result<Self> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&order_exponent) {
            return Err(Error::InvalidParameters(format!(
                "field order exponent {order_exponent} outside {MIN_ORDER}..={MAX_ORDER}"
            )));
        }
        let primitive_poly = PRIMITIVE_POLYS[(order_exponent - MIN_ORDER) as usize];
        let size = 1usize << order_exponent;
        let cycle = size - 1;
        let mut exp = vec![0u16; 2 * cycle];
        let mut log = vec![0u16; size];
        let mut a: u32 = 1;
        for i in 0..cycle {
            exp[i] = a as u16;
            if i > 0 && a == 1 {
                return Err(Error::InvalidParameters(format!(
                    "polynomial {primitive_poly:#x} is not primitive"
                )));
            }
            log[a as usize] = i as u16;
            a <<= 1;
            if a & size as u32 != 0 {
                a ^= primitive_poly;
            }
        }
        for i in cycle..2 * cycle {
            exp[i] = exp[i - cycle];
        }
        Ok(Self {
            order_exponent,
            primitive_poly,
            exp,
            log,
        })
    }

    #[inline]
    pub fn order_exponent(&self) -> u32 {
        self.order_exponent
    }

    #[inline]
    pub fn primitive_poly(&self) -> u32 {
        self.primitive_poly
    }

    /// Number of nonzero elements, `2^v - 1`.
    #[inline]
    pub fn cycle(&self) -> usize {
        (1usize << self.order_exponent) - 1
    }

    /// `alpha^i` for any `i`.
    #[inline]
    pub fn exp(&self, i: usize) -> u16 {
        self.exp[i % self.cycle()]
    }

    /// Discrete log of a nonzero element.
    #[inline]
    pub fn log(&self, a: u16) -> Option<usize> {
        if a == 0 {
            None
        } else {
            Some(self.log[a as usize] as usize)
        }
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    /// Multiplicative inverse. Panics on zero.
    #[inline]
    pub fn inv(&self, a: u16) -> u16 {
        assert!(a != 0, "inverse of zero in GF(2^{})", self.order_exponent);
        let l = self.log[a as usize] as usize;
        self.exp[(self.cycle() - l) % self.cycle()]
    }

    #[inline]
    pub fn div(&self, a: u16, b: u16) -> u16 {
        if a == 0 {
            return 0;
        }
        let cycle = self.cycle();
        let la = self.log[a as usize] as usize;
        let lb = self.log[b as usize] as usize;
        assert!(b != 0, "division by zero in GF(2^{})", self.order_exponent);
        self.exp[la + cycle - lb]
    }

    /// `a^e` for an arbitrary exponent.
    pub fn pow(&self, a: u16, e: usize) -> u16 {
        if e == 0 {
            return 1;
        }
        match self.log(a) {
            None => 0,
            Some(l) => self.exp((l * (e % self.cycle())) % self.cycle()),
        }
    }

    /// Multiplies `a` by `alpha^i` without going through `log[alpha^i]`.
    #[inline]
    pub fn mul_exp(&self, a: u16, i: usize) -> u16 {
        if a == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + i % self.cycle()]
        }
    }

    /// Evaluates a polynomial (coefficients lowest degree first) at `x`.
    pub fn eval(&self, poly: &[u16], x: u16) -> u16 {
        poly.iter().rev().fold(0u16, |acc, &c| self.mul(acc, x) ^ c)
    }
}

/// Carry-less product of two field elements reduced modulo `poly`.
///
/// Independent of the tables; used to cross-check them.
pub fn poly_mul_mod(a: u16, b: u16, poly: u32, order_exponent: u32) -> u16 {
    let mut acc: u32 = 0;
    let mut a = a as u32;
    let mut b = b as u32;
    let top = 1u32 << order_exponent;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= poly;
        }
    }
    acc as u16
}
