use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use num_bigint::{BigInt, BigUint};

/// Exact amplitude `numerator / 2^exponent` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicAmplitude {
    numerator: i128,
    exponent: u32,
}

impl DyadicAmplitude {
    pub const ZERO: Self = Self {
        numerator: 0,
        exponent: 0,
    };
    pub const ONE: Self = Self {
        numerator: 1,
        exponent: 0,
    };

    pub fn new(numerator: i128, exponent: u32) -> Self {
        if numerator == 0 {
            return Self::ZERO;
        }
        let shift = numerator.trailing_zeros().min(exponent);
        Self {
            numerator: numerator >> shift,
            exponent: exponent - shift,
        }
    }

    pub fn numerator(&self) -> i128 {
        self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 * (-(self.exponent as f64)).exp2()
    }

    /// Squared magnitude, exact.
    pub fn probability(&self) -> DyadicProbability {
        let n = self.numerator.unsigned_abs();
        let big = BigUint::from(n);
        DyadicProbability::new(&big * &big, 2 * self.exponent)
    }

    /// Parse `num/2^e`, `num` or `0`.
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        match text.split_once("/2^") {
            Some((n, e)) => Some(Self::new(n.trim().parse().ok()?, e.trim().parse().ok()?)),
            None => Some(Self::new(text.parse().ok()?, 0)),
        }
    }
}

impl Neg for DyadicAmplitude {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            numerator: -self.numerator,
            exponent: self.exponent,
        }
    }
}

impl fmt::Display for DyadicAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.exponent)
    }
}

/// Exact non-negative dyadic rational, used for probabilities and sums of
/// probabilities that can outgrow 128 bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicProbability {
    numerator: BigUint,
    exponent: u32,
}

impl DyadicProbability {
    pub fn zero() -> Self {
        Self {
            numerator: BigUint::ZERO,
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Self {
            numerator: BigUint::from(1u8),
            exponent: 0,
        }
    }

    pub fn new(numerator: BigUint, exponent: u32) -> Self {
        if numerator == BigUint::ZERO {
            return Self::zero();
        }
        let tz = numerator.trailing_zeros().unwrap_or(0) as u32;
        let shift = tz.min(exponent);
        Self {
            numerator: numerator >> shift,
            exponent: exponent - shift,
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == BigUint::ZERO
    }

    pub fn to_f64(&self) -> f64 {
        // scale down in integer arithmetic first so huge numerators stay finite
        let bits = self.numerator.bits();
        let drop = bits.saturating_sub(60);
        let head = (&self.numerator >> drop)
            .to_u64_digits()
            .first()
            .copied()
            .unwrap_or(0);
        head as f64 * (drop as f64 - self.exponent as f64).exp2()
    }

    pub fn add(&self, other: &Self) -> Self {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        Self::new(a + b, e)
    }

    /// `self · 2^shift` for possibly negative `shift`.
    pub fn scaled(&self, shift: i64) -> Self {
        if shift >= 0 {
            Self::new(&self.numerator << shift as u64, self.exponent)
        } else {
            Self::new(self.numerator.clone(), self.exponent + (-shift) as u32)
        }
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt) {
        let e = self.exponent.max(other.exponent);
        (
            BigInt::from(&self.numerator << (e - self.exponent)),
            BigInt::from(&other.numerator << (e - other.exponent)),
        )
    }
}

impl PartialOrd for DyadicProbability {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicProbability {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Display for DyadicProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.exponent)
    }
}
