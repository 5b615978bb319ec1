//! Arithmetic kernels: the prime field `F_p`, truncated power series over a
//! field, and first-order dual extensions of those series.
//!
//! Every ring is a small context object implementing [`Ring`]; elements are
//! plain values. Expression evaluation in [`crate::expr`] is generic over
//! this trait, so the same `Expr` can be evaluated over `F_p`, over jets in
//! `F_p[[t]]/(t^{ν+1})`, over dual jets, or over the rationals.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

/// The Mersenne prime `2^61 - 1`, the default modulus.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    /// A division hit a non-unit (zero, or a series with zero constant term).
    #[error("division by a non-invertible element")]
    NotInvertible,
    #[error("constant {0} is not representable in this ring")]
    BadConstant(String),
    #[error("operands have mismatched truncation orders ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("{0} is not a prime in the supported range [3, 2^63)")]
    NotPrime(u64),
}

/// A commutative ring with unit, given as a context object.
pub trait Ring {
    type Elem: Clone + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    /// Embeds a rational constant. Fails when the denominator is not a unit.
    fn constant(&self, q: &BigRational) -> Result<Self::Elem, ArithError>;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, ArithError>;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, ArithError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    fn pow(&self, a: &Self::Elem, mut exp: u32) -> Self::Elem {
        let mut acc = self.one();
        let mut base = a.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
}

/// A ring in which every nonzero element is a unit.
pub trait Field: Ring {
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn from_u64(&self, n: u64) -> Self::Elem;
}

// ---------------------------------------------------------------------------
// F_p

/// The prime field `F_p` for an odd prime `p < 2^63`. Elements are residues
/// in `[0, p)` stored as `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl Default for PrimeField {
    fn default() -> Self {
        PrimeField { p: MERSENNE_61 }
    }
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, ArithError> {
        if !(3..1 << 63).contains(&p) || !is_prime_u64(p) {
            return Err(ArithError::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let prod = (a as u128) * (b as u128);
        if self.p == MERSENNE_61 {
            let lo = (prod as u64) & MERSENNE_61;
            let hi = (prod >> 61) as u64;
            let s = lo + hi;
            if s >= MERSENNE_61 {
                s - MERSENNE_61
            } else {
                s
            }
        } else {
            (prod % self.p as u128) as u64
        }
    }

    /// `a + b*c`, the inner step of every convolution.
    #[inline]
    pub fn mul_add(&self, acc: u64, b: u64, c: u64) -> u64 {
        self.add(acc, self.mul(b, c))
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Inverse via Fermat; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    pub fn from_i64(&self, n: i64) -> u64 {
        let r = n.rem_euclid(self.p as i64);
        r as u64
    }

    pub fn from_bigint(&self, n: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        let mut r = n % &p;
        if r.is_negative() {
            r += &p;
        }
        r.to_u64().expect("residue fits in u64")
    }

    pub fn from_rational(&self, q: &BigRational) -> Result<u64, ArithError> {
        let num = self.from_bigint(q.numer());
        let den = self.from_bigint(q.denom());
        let inv = self.inv(den).ok_or_else(|| ArithError::BadConstant(q.to_string()))?;
        Ok(self.mul(num, inv))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(1..self.p)
    }

    /// One step of the jet recurrence `x_{k+1} = f_k / (k+1)`.
    ///
    /// Requires `k + 1 < p`; configurations with a jet order reaching `p`
    /// are rejected before any solve starts.
    pub fn integrate_step(&self, k: u64, fk: u64) -> u64 {
        debug_assert!(k + 1 < self.p);
        self.mul(fk, self.inv(k + 1).expect("k + 1 < p"))
    }

    /// Table of `1/1, 1/2, ..., 1/n` (index `i` holds `1/(i+1)`).
    pub fn inverse_table(&self, n: usize) -> Vec<u64> {
        (1..=n as u64)
            .map(|k| self.inv(k % self.p).expect("table size below p"))
            .collect()
    }
}

impl Ring for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn constant(&self, q: &BigRational) -> Result<u64, ArithError> {
        self.from_rational(q)
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        PrimeField::add(self, *a, *b)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        PrimeField::sub(self, *a, *b)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        PrimeField::mul(self, *a, *b)
    }
    fn neg(&self, a: &u64) -> u64 {
        PrimeField::neg(self, *a)
    }
    fn inv(&self, a: &u64) -> Result<u64, ArithError> {
        PrimeField::inv(self, *a).ok_or(ArithError::NotInvertible)
    }
}

impl Field for PrimeField {
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn from_u64(&self, n: u64) -> u64 {
        n % self.p
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n % q == 0 {
            return n == q;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, a);
            }
            a = mulmod(a, a);
            e >>= 1;
        }
        acc
    };
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// ---------------------------------------------------------------------------
// Q

/// The rationals with exact big-integer arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct RationalField;

impl Ring for RationalField {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn constant(&self, q: &BigRational) -> Result<BigRational, ArithError> {
        Ok(q.clone())
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Result<BigRational, ArithError> {
        if a.is_zero() {
            Err(ArithError::NotInvertible)
        } else {
            Ok(a.recip())
        }
    }
}

impl Field for RationalField {
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn from_u64(&self, n: u64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }
}

// ---------------------------------------------------------------------------
// Truncated series

/// A power series in `t` truncated after the `t^ν` term. Coefficient `k`
/// multiplies `t^k`; the vector always has length `ν + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries<T> {
    pub coeffs: Vec<T>,
}

impl<T> TruncatedSeries<T> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// `F[[t]] / (t^{ν+1})` over a field `F`.
#[derive(Debug, Clone)]
pub struct SeriesRing<F> {
    pub field: F,
    pub order: usize,
}

impl<F: Field> SeriesRing<F> {
    pub fn new(field: F, order: usize) -> Self {
        SeriesRing { field, order }
    }

    pub fn from_coeffs(&self, mut coeffs: Vec<F::Elem>) -> TruncatedSeries<F::Elem> {
        coeffs.resize(self.order + 1, self.field.zero());
        coeffs.truncate(self.order + 1);
        TruncatedSeries { coeffs }
    }

    /// The series `c` (constant in `t`).
    pub fn scalar(&self, c: F::Elem) -> TruncatedSeries<F::Elem> {
        self.from_coeffs(vec![c])
    }

    /// The series `t` (zero when `ν = 0`).
    pub fn t(&self) -> TruncatedSeries<F::Elem> {
        self.from_coeffs(vec![self.field.zero(), self.field.one()])
    }

    fn check(&self, a: &TruncatedSeries<F::Elem>) -> Result<(), ArithError> {
        if a.coeffs.len() != self.order + 1 {
            Err(ArithError::OrderMismatch(self.order, a.order()))
        } else {
            Ok(())
        }
    }

    /// Cauchy product truncated at `ν`, with operand checks.
    pub fn series_mul(
        &self,
        a: &TruncatedSeries<F::Elem>,
        b: &TruncatedSeries<F::Elem>,
    ) -> Result<TruncatedSeries<F::Elem>, ArithError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    /// Multiplicative inverse; fails when the constant term is zero.
    pub fn series_inv(
        &self,
        a: &TruncatedSeries<F::Elem>,
    ) -> Result<TruncatedSeries<F::Elem>, ArithError> {
        self.check(a)?;
        self.inv(a)
    }

    /// `∫ a dt` with zero constant of integration, truncated at `ν`.
    pub fn integrate(&self, a: &TruncatedSeries<F::Elem>) -> TruncatedSeries<F::Elem> {
        let mut out = vec![self.field.zero(); self.order + 1];
        for k in 0..self.order {
            let scale = self
                .field
                .inv(&self.field.from_u64(k as u64 + 1))
                .expect("k + 1 invertible below the characteristic");
            out[k + 1] = self.field.mul(&a.coeffs[k], &scale);
        }
        TruncatedSeries { coeffs: out }
    }
}

impl<F: Field> Ring for SeriesRing<F> {
    type Elem = TruncatedSeries<F::Elem>;

    fn zero(&self) -> Self::Elem {
        self.from_coeffs(Vec::new())
    }
    fn one(&self) -> Self::Elem {
        self.scalar(self.field.one())
    }
    fn constant(&self, q: &BigRational) -> Result<Self::Elem, ArithError> {
        Ok(self.scalar(self.field.constant(q)?))
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| self.field.add(x, y))
            .collect();
        TruncatedSeries { coeffs }
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| self.field.sub(x, y))
            .collect();
        TruncatedSeries { coeffs }
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let n = self.order + 1;
        let mut out = vec![self.field.zero(); n];
        for (i, ai) in a.coeffs.iter().enumerate().take(n) {
            if self.field.is_zero(ai) {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate().take(n - i) {
                out[i + j] = self.field.add(&out[i + j], &self.field.mul(ai, bj));
            }
        }
        TruncatedSeries { coeffs: out }
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        TruncatedSeries {
            coeffs: a.coeffs.iter().map(|x| self.field.neg(x)).collect(),
        }
    }
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, ArithError> {
        let a0_inv = self.field.inv(&a.coeffs[0])?;
        let n = self.order + 1;
        let mut out: Vec<F::Elem> = Vec::with_capacity(n);
        out.push(a0_inv.clone());
        for k in 1..n {
            let mut acc = self.field.zero();
            for j in 1..=k {
                acc = self.field.add(&acc, &self.field.mul(&a.coeffs[j], &out[k - j]));
            }
            out.push(self.field.neg(&self.field.mul(&acc, &a0_inv)));
        }
        Ok(TruncatedSeries { coeffs: out })
    }
}

// ---------------------------------------------------------------------------
// Dual series

/// `value + ε·derivative` with `ε² = 0`, both parts truncated series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualSeries<T> {
    pub value: TruncatedSeries<T>,
    pub derivative: TruncatedSeries<T>,
}

/// Series ring extended by a nilpotent `ε`: one seed direction per value.
#[derive(Debug, Clone)]
pub struct DualSeriesRing<F> {
    pub series: SeriesRing<F>,
}

impl<F: Field> DualSeriesRing<F> {
    pub fn new(field: F, order: usize) -> Self {
        DualSeriesRing {
            series: SeriesRing::new(field, order),
        }
    }

    pub fn lift(
        &self,
        value: TruncatedSeries<F::Elem>,
        derivative: TruncatedSeries<F::Elem>,
    ) -> DualSeries<F::Elem> {
        DualSeries { value, derivative }
    }

    /// A value with zero derivative part.
    pub fn passive(&self, value: TruncatedSeries<F::Elem>) -> DualSeries<F::Elem> {
        DualSeries {
            value,
            derivative: self.series.zero(),
        }
    }
}

impl<F: Field> Ring for DualSeriesRing<F> {
    type Elem = DualSeries<F::Elem>;

    fn zero(&self) -> Self::Elem {
        self.passive(self.series.zero())
    }
    fn one(&self) -> Self::Elem {
        self.passive(self.series.one())
    }
    fn constant(&self, q: &BigRational) -> Result<Self::Elem, ArithError> {
        Ok(self.passive(self.series.constant(q)?))
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        DualSeries {
            value: self.series.add(&a.value, &b.value),
            derivative: self.series.add(&a.derivative, &b.derivative),
        }
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        DualSeries {
            value: self.series.sub(&a.value, &b.value),
            derivative: self.series.sub(&a.derivative, &b.derivative),
        }
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let s = &self.series;
        DualSeries {
            value: s.mul(&a.value, &b.value),
            derivative: s.add(&s.mul(&a.value, &b.derivative), &s.mul(&a.derivative, &b.value)),
        }
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        DualSeries {
            value: self.series.neg(&a.value),
            derivative: self.series.neg(&a.derivative),
        }
    }
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, ArithError> {
        // (v + εd)^{-1} = v^{-1} - ε d v^{-2}
        let s = &self.series;
        let vi = s.inv(&a.value)?;
        let d = s.neg(&s.mul(&a.derivative, &s.mul(&vi, &vi)));
        Ok(DualSeries {
            value: vi,
            derivative: d,
        })
    }
}
