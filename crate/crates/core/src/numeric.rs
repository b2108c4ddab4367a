//! Numeric modes. Probabilities are either `f64` or exact [`Rational`]s; the
//! matching entropy type is `f64` or an exact [`LogLinear`] form
//! `Σ c_k · ln(m_k)` with rational `c_k` and pairwise coprime integers `m_k`,
//! which makes entropy identities checkable with no rounding at all.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::reduce::CompensatedSum;

pub type Rational = BigRational;

/// Tolerance on `|Σp - 1|` for float-mode distributions.
pub const FLOAT_SUM_TOLERANCE: f64 = 1e-12;

/// Numeric mode requested by the caller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NumericMode {
    /// Exact rationals for small pattern spaces, floats above.
    #[default]
    Auto,
    Rational,
    Float,
}

/// Pattern-count threshold below which [`NumericMode::Auto`] stays exact.
pub const AUTO_RATIONAL_LIMIT: u64 = 1 << 16;

/// An entropy value: plain `f64` or an exact [`LogLinear`].
pub trait EntropyValue: Clone + Send + Sync + fmt::Debug + 'static {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    /// Multiplies by the integer ratio `num / den`.
    fn scale(&self, num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact equality for exact values, `|a - b| <= tol` for floats.
    fn agrees(&self, other: &Self, tol: f64) -> bool;
    fn is_exact() -> bool;
    fn into_value(self) -> Value;
}

/// A probability weight.
pub trait Weight: Clone + Send + Sync + PartialEq + fmt::Debug + 'static {
    type Entropy: EntropyValue;
    type Acc: EntropyAccumulator<Self>;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// `p · h`.
    fn weigh(&self, h: &Self::Entropy) -> Self::Entropy;
    /// Whether the weights sum to one under this mode's tolerance.
    fn sums_to_one(weights: &[Self]) -> bool;
    /// Equality under this mode's tolerance.
    fn close(&self, other: &Self) -> bool;
    fn render(&self) -> String;
    fn mode_name() -> &'static str;
}

/// Streams probabilities and produces `-Σ p ln p`.
pub trait EntropyAccumulator<W: Weight>: Default + Send {
    fn push(&mut self, p: &W);
    fn merge(&mut self, other: Self);
    fn finish(self) -> W::Entropy;
}

/// Shannon entropy of a weight list; zero weights contribute nothing.
pub fn entropy_of_weights<'a, W: Weight>(weights: impl IntoIterator<Item = &'a W>) -> W::Entropy {
    let mut acc = W::Acc::default();
    for p in weights {
        acc.push(p);
    }
    acc.finish()
}

/// A value produced by an f-entropy route.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Exact(LogLinear),
    NegInfinity,
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Float(x) => *x,
            Value::Exact(l) => l.to_f64(),
            Value::NegInfinity => f64::NEG_INFINITY,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    /// Exact comparison when both sides are exact, tolerance otherwise.
    pub fn agrees(&self, other: &Value, tol: f64) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a.sub(b).is_zero(),
            (Value::NegInfinity, Value::NegInfinity) => true,
            (Value::NegInfinity, _) | (_, Value::NegInfinity) => false,
            _ => (self.to_f64() - other.to_f64()).abs() <= tol,
        }
    }
}

// ---------------------------------------------------------------------------
// float mode

#[derive(Default)]
pub struct FloatEntropyAcc(CompensatedSum);

impl EntropyAccumulator<f64> for FloatEntropyAcc {
    fn push(&mut self, p: &f64) {
        if *p > 0.0 {
            self.0.add(-p * p.ln());
        }
    }

    fn merge(&mut self, other: Self) {
        self.0.merge(&other.0);
    }

    fn finish(self) -> f64 {
        self.0.value()
    }
}

impl EntropyValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scale(&self, num: i64, den: i64) -> Self {
        self * num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn agrees(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }
    fn is_exact() -> bool {
        false
    }
    fn into_value(self) -> Value {
        Value::Float(self)
    }
}

impl Weight for f64 {
    type Entropy = f64;
    type Acc = FloatEntropyAcc;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn weigh(&self, h: &f64) -> f64 {
        self * h
    }
    fn sums_to_one(weights: &[Self]) -> bool {
        let mut s = CompensatedSum::default();
        for w in weights {
            s.add(*w);
        }
        (s.value() - 1.0).abs() <= FLOAT_SUM_TOLERANCE
    }
    fn close(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_SUM_TOLERANCE
    }
    fn render(&self) -> String {
        format!("{self}")
    }
    fn mode_name() -> &'static str {
        "float"
    }
}

// ---------------------------------------------------------------------------
// rational mode

#[derive(Default)]
pub struct RationalEntropyAcc(HashMap<Rational, u64>);

impl EntropyAccumulator<Rational> for RationalEntropyAcc {
    fn push(&mut self, p: &Rational) {
        if p.is_positive() && !p.is_one() {
            *self.0.entry(p.clone()).or_insert(0) += 1;
        }
    }

    fn merge(&mut self, other: Self) {
        for (p, c) in other.0 {
            *self.0.entry(p).or_insert(0) += c;
        }
    }

    fn finish(self) -> LogLinear {
        let mut out = LogLinear::zero();
        for (p, count) in self.0 {
            let coeff = -(&p * Rational::from_integer(BigInt::from(count)));
            out.add_scaled_ln(&coeff, &p);
        }
        out
    }
}

impl Weight for Rational {
    type Entropy = LogLinear;
    type Acc = RationalEntropyAcc;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn weigh(&self, h: &LogLinear) -> LogLinear {
        h.scale_rational(self)
    }
    fn sums_to_one(weights: &[Self]) -> bool {
        weights.iter().fold(<Rational as Zero>::zero(), |a, b| a + b).is_one()
    }
    fn close(&self, other: &Self) -> bool {
        self == other
    }
    fn render(&self) -> String {
        format_rational(self)
    }
    fn mode_name() -> &'static str {
        "rational"
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    ToPrimitive::to_f64(q).unwrap_or_else(|| {
        // Fall back to a scaled division when numerator or denominator overflow.
        let n = q.numer().bits() as i64;
        let d = q.denom().bits() as i64;
        let shift = (n - d).clamp(-1000, 1000);
        let scaled = if shift >= 0 {
            q / Rational::from_integer(BigInt::one() << shift as usize)
        } else {
            q * Rational::from_integer(BigInt::one() << (-shift) as usize)
        };
        ToPrimitive::to_f64(&scaled).unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
    })
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::InvalidDistribution(format!("cannot parse number {s:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let q = Rational::new(n, d);
        return Ok(if neg { -q } else { q });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

// ---------------------------------------------------------------------------
// exact logarithmic forms

const TRIAL_LIMIT: u32 = 4096;

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut sieve = vec![true; TRIAL_LIMIT as usize];
        let mut out = Vec::new();
        for i in 2..TRIAL_LIMIT as usize {
            if sieve[i] {
                out.push(i as u32);
                let mut j = i * i;
                while j < sieve.len() {
                    sieve[j] = false;
                    j += i;
                }
            }
        }
        out
    })
}

/// Splits `n` into small primes (below [`TRIAL_LIMIT`]) and one residue whose
/// prime factors are all large.
fn factor(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut out = Vec::new();
    let mut rest = n.clone();
    for &p in small_primes() {
        if rest.is_one() {
            break;
        }
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = rest.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            out.push((pb, e));
        }
    }
    if !rest.is_one() {
        out.push((rest, 1));
    }
    out
}

fn is_certified_atom(m: &BigUint) -> bool {
    // Anything below TRIAL_LIMIT² with no small factor is prime.
    m < &(BigUint::from(TRIAL_LIMIT) * BigUint::from(TRIAL_LIMIT))
}

/// Refines a set of integers `> 1` into pairwise coprime factors.
fn coprime_basis(nums: impl IntoIterator<Item = BigUint>) -> Vec<BigUint> {
    let mut set: Vec<BigUint> = nums.into_iter().filter(|n| !n.is_one()).collect();
    set.sort();
    set.dedup();
    'outer: loop {
        for i in 0..set.len() {
            for j in i + 1..set.len() {
                let g = set[i].gcd(&set[j]);
                if !g.is_one() {
                    let a = &set[i] / &g;
                    let b = &set[j] / &g;
                    set.swap_remove(j);
                    set.swap_remove(i);
                    set.extend([a, b, g].into_iter().filter(|x| !x.is_one()));
                    set.sort();
                    set.dedup();
                    continue 'outer;
                }
            }
        }
        return set;
    }
}

/// An exact real number `Σ c_k · ln(m_k)` with rational coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LogLinear {
    terms: BTreeMap<BigUint, Rational>,
}

impl LogLinear {
    pub fn zero() -> Self {
        LogLinear::default()
    }

    /// `ln(q)` for positive `q`.
    pub fn ln(q: &Rational) -> Self {
        let mut out = LogLinear::zero();
        out.add_scaled_ln(&<Rational as One>::one(), q);
        out
    }

    /// `-p ln p`.
    pub fn neg_p_ln_p(p: &Rational) -> Self {
        let mut out = LogLinear::zero();
        if p.is_positive() {
            out.add_scaled_ln(&-p.clone(), p);
        }
        out
    }

    fn add_term(&mut self, atom: BigUint, coeff: Rational) {
        if Zero::is_zero(&coeff) || atom.is_one() {
            return;
        }
        let slot = self.terms.entry(atom).or_insert_with(<Rational as Zero>::zero);
        *slot += coeff;
        if Zero::is_zero(slot) {
            self.terms.retain(|_, c| !Zero::is_zero(c));
        }
    }

    /// `self += coeff · ln(q)`.
    pub fn add_scaled_ln(&mut self, coeff: &Rational, q: &Rational) {
        assert!(q.is_positive(), "logarithm of a non-positive number");
        let num = q.numer().to_biguint().expect("positive");
        let den = q.denom().to_biguint().expect("positive");
        for (atom, e) in factor(&num) {
            self.add_term(atom, coeff * Rational::from_integer(BigInt::from(e)));
        }
        for (atom, e) in factor(&den) {
            self.add_term(atom, -(coeff * Rational::from_integer(BigInt::from(e))));
        }
    }

    pub fn scale_rational(&self, c: &Rational) -> Self {
        if Zero::is_zero(c) {
            return LogLinear::zero();
        }
        LogLinear {
            terms: self.terms.iter().map(|(a, k)| (a.clone(), k * c)).collect(),
        }
    }

    /// Rewrites the form over a pairwise coprime set of atoms; after this,
    /// the form is zero exactly when it has no terms.
    pub fn canonical(&self) -> Self {
        let uncertain: Vec<BigUint> = self
            .terms
            .keys()
            .filter(|a| !is_certified_atom(a))
            .cloned()
            .collect();
        if uncertain.is_empty() {
            return self.clone();
        }
        let large: Vec<BigUint> = self
            .terms
            .keys()
            .filter(|a| a >= &&BigUint::from(TRIAL_LIMIT))
            .cloned()
            .collect();
        let basis = coprime_basis(large);
        let mut out = LogLinear::zero();
        for (atom, coeff) in &self.terms {
            if atom < &BigUint::from(TRIAL_LIMIT) {
                out.add_term(atom.clone(), coeff.clone());
                continue;
            }
            let mut rest = atom.clone();
            for b in &basis {
                let mut e = 0u32;
                loop {
                    let (q, r) = rest.div_rem(b);
                    if !r.is_zero() {
                        break;
                    }
                    rest = q;
                    e += 1;
                }
                if e > 0 {
                    out.add_term(b.clone(), coeff * Rational::from_integer(BigInt::from(e)));
                }
            }
            debug_assert!(rest.is_one());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() || self.canonical().terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, &Rational)> {
        self.terms.iter()
    }
}

fn ln_biguint(m: &BigUint) -> f64 {
    match m.to_f64() {
        Some(x) if x.is_finite() => x.ln(),
        _ => {
            let shift = m.bits() - 64;
            let top = (m >> shift).to_f64().unwrap_or(f64::MAX);
            top.ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

impl EntropyValue for LogLinear {
    fn zero() -> Self {
        LogLinear::zero()
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }

    fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), -c.clone());
        }
        out
    }

    fn scale(&self, num: i64, den: i64) -> Self {
        self.scale_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn to_f64(&self) -> f64 {
        let mut s = CompensatedSum::default();
        for (a, c) in &self.terms {
            s.add(rational_to_f64(c) * ln_biguint(a));
        }
        s.value()
    }

    fn agrees(&self, other: &Self, _tol: f64) -> bool {
        self.sub(other).is_zero()
    }

    fn is_exact() -> bool {
        true
    }

    fn into_value(self) -> Value {
        Value::Exact(self)
    }
}

impl fmt::Debug for LogLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LogLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(a, c)| format!("({})·ln {}", format_rational(c), a))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Sign of a rational, used when the caller needs `Sign` from `num-bigint`.
pub fn rational_sign(q: &Rational) -> Sign {
    q.numer().sign()
}
