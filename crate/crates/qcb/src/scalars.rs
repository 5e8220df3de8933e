//! Exact rational functions in `v = q^{1/2}` with integer coefficients.
//!
//! A [`Scalar`] is stored as `v^shift * num(v) / den(v)` where `num` and `den`
//! are integer polynomials with nonzero constant terms, coprime over `Q[v]`,
//! with the integer content of the pair removed and `den` having a positive
//! leading coefficient. That makes the representation canonical, so structural
//! equality is field equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole: denominator vanishes at q = {0}")]
    Pole(f64),
    #[error("q must lie in (0, 1), got {0}")]
    BadParameter(f64),
    #[error("cannot parse scalar: {0}")]
    Parse(String),
}

type Poly = Vec<BigInt>;

// ---- dense integer polynomial helpers (index = degree, no trailing zeros) ----

fn trim(p: &mut Poly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn padd(a: &[BigInt], b: &[BigInt]) -> Poly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_default();
        let y = b.get(i).cloned().unwrap_or_default();
        out.push(x + y);
    }
    trim(&mut out);
    out
}

fn pneg(a: &[BigInt]) -> Poly {
    a.iter().map(|c| -c).collect()
}

fn pmul(a: &[BigInt], b: &[BigInt]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn pscale(a: &[BigInt], c: &BigInt) -> Poly {
    let mut out: Poly = a.iter().map(|x| x * c).collect();
    trim(&mut out);
    out
}

fn content(a: &[BigInt]) -> BigInt {
    a.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn shift_up(a: &[BigInt], k: usize) -> Poly {
    if a.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); k];
    out.extend_from_slice(a);
    out
}

/// Pseudo-remainder of `a` by `b` (b nonzero).
fn prem(a: &[BigInt], b: &[BigInt]) -> Poly {
    let mut r: Poly = a.to_vec();
    let db = b.len() - 1;
    let lb = b[db].clone();
    while r.len() > db {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        r = pscale(&r, &lb);
        let t = shift_up(&pscale(b, &lr), dr - db);
        r = padd(&r, &pneg(&t));
    }
    r
}

/// Exact division, panicking on a nonzero remainder (caller guarantees divisibility).
fn pdiv_exact(a: &[BigInt], b: &[BigInt]) -> Poly {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r: Poly = a.to_vec();
    if r.len() < b.len() {
        assert!(r.is_empty(), "inexact polynomial division");
        return Vec::new();
    }
    let mut q = vec![BigInt::zero(); r.len() - db];
    while r.len() > db {
        let dr = r.len() - 1;
        let (c, rem) = r[dr].div_rem(lb);
        assert!(rem.is_zero(), "inexact polynomial division");
        q[dr - db] = c.clone();
        let t = shift_up(&pscale(b, &c), dr - db);
        r = padd(&r, &pneg(&t));
    }
    assert!(r.is_empty(), "inexact polynomial division");
    trim(&mut q);
    q
}

fn primitive(a: &[BigInt]) -> Poly {
    let c = content(a);
    if c.is_zero() || c.is_one() {
        return a.to_vec();
    }
    a.iter().map(|x| x / &c).collect()
}

/// gcd in Z[v] up to sign, via the primitive remainder sequence.
fn pgcd(a: &[BigInt], b: &[BigInt]) -> Poly {
    let (mut x, mut y) = if a.len() >= b.len() {
        (primitive(a), primitive(b))
    } else {
        (primitive(b), primitive(a))
    };
    while !y.is_empty() {
        let r = prem(&x, &y);
        x = y;
        y = primitive(&r);
    }
    let g = content(a).gcd(&content(b));
    pscale(&x, &g)
}

fn low_zeros(a: &[BigInt]) -> usize {
    a.iter().take_while(|c| c.is_zero()).count()
}

/// Exact element of `Q(v)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    shift: i32,
    num: Poly,
    den: Poly,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { shift: 0, num: Vec::new(), den: vec![BigInt::one()] }
    }

    pub fn one() -> Self {
        Scalar::int(1)
    }

    pub fn int(n: i64) -> Self {
        Self::from_bigint(BigInt::from(n))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        if n.is_zero() {
            return Self::zero();
        }
        Scalar { shift: 0, num: vec![n], den: vec![BigInt::one()] }
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Self::normalize(vec![BigInt::from(n)], 0, vec![BigInt::from(d)], 0).expect("nonzero denominator")
    }

    /// `v^k = q^{k/2}`.
    pub fn v_pow(k: i32) -> Self {
        Scalar { shift: k, num: vec![BigInt::one()], den: vec![BigInt::one()] }
    }

    /// `q^k`.
    pub fn q_pow(k: i32) -> Self {
        Self::v_pow(2 * k)
    }

    pub fn v() -> Self {
        Self::v_pow(1)
    }

    pub fn q() -> Self {
        Self::v_pow(2)
    }

    /// Laurent polynomial `Σ c_i v^{lo+i}`.
    pub fn laurent(lo: i32, coeffs: &[i64]) -> Self {
        let num = coeffs.iter().map(|&c| BigInt::from(c)).collect();
        Self::normalize(num, lo, vec![BigInt::one()], 0).unwrap()
    }

    /// Quantum integer `[n] = (q^n - q^{-n}) / (q - q^{-1})`.
    pub fn qint(n: u32) -> Self {
        let mut acc = Self::zero();
        let n = n as i32;
        for k in 0..n {
            acc = &acc + &Self::q_pow(n - 1 - 2 * k);
        }
        acc
    }

    /// Canonicalize `v^ns * num / (v^ds * den)`.
    pub fn normalize(num: Poly, ns: i32, den: Poly, ds: i32) -> Result<Self, ScalarError> {
        let mut num = num;
        let mut den = den;
        trim(&mut num);
        trim(&mut den);
        if den.is_empty() {
            return Err(ScalarError::DivisionByZero);
        }
        if num.is_empty() {
            return Ok(Self::zero());
        }
        let mut shift = ns - ds;
        let lz = low_zeros(&num);
        if lz > 0 {
            num.drain(..lz);
            shift += lz as i32;
        }
        let lz = low_zeros(&den);
        if lz > 0 {
            den.drain(..lz);
            shift -= lz as i32;
        }
        if den.len() > 1 {
            let g = primitive(&pgcd(&num, &den));
            if g.len() > 1 {
                num = pdiv_exact(&num, &g);
                den = pdiv_exact(&den, &g);
            }
        }
        let c = content(&num).gcd(&content(&den));
        if !c.is_one() {
            num = num.iter().map(|x| x / &c).collect();
            den = den.iter().map(|x| x / &c).collect();
        }
        if den.last().unwrap().is_negative() {
            num = pneg(&num);
            den = pneg(&den);
        }
        Ok(Scalar { shift, num, den })
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.shift == 0 && self.num.len() == 1 && self.num[0].is_one() && self.den.len() == 1 && self.den[0].is_one()
    }

    /// True when the denominator is the constant 1.
    pub fn is_laurent(&self) -> bool {
        self.den.len() == 1 && self.den[0].is_one()
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Self::normalize(self.den.clone(), 0, self.num.clone(), self.shift)
    }

    pub fn pow(&self, k: i32) -> Self {
        if k < 0 {
            return self.inv().expect("inverse of zero").pow(-k);
        }
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Lowest and highest exponent of `v` in the numerator (meaningful for Laurent scalars).
    pub fn v_range(&self) -> Option<(i32, i32)> {
        if self.is_zero() {
            None
        } else {
            Some((self.shift, self.shift + self.num.len() as i32 - 1))
        }
    }

    /// Substitute `v = sqrt(q)`.
    pub fn evaluate<T: Float>(&self, q: T) -> Result<T, ScalarError> {
        let qf = q.to_f64().unwrap_or(f64::NAN);
        if !(q > T::zero() && q < T::one()) {
            return Err(ScalarError::BadParameter(qf));
        }
        let v = q.sqrt();
        let horner = |p: &[BigInt]| -> T {
            p.iter().rev().fold(T::zero(), |acc, c| acc * v + T::from(c.to_f64().unwrap()).unwrap())
        };
        let d = horner(&self.den);
        if d == T::zero() {
            return Err(ScalarError::Pole(qf));
        }
        Ok(horner(&self.num) / d * v.powi(self.shift))
    }

    pub fn eval_f64(&self, q: f64) -> f64 {
        self.evaluate(q).expect("scalar evaluation")
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

// ---- Add ----

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let m = self.shift.min(rhs.shift);
        let a = shift_up(&self.num, (self.shift - m) as usize);
        let b = shift_up(&rhs.num, (rhs.shift - m) as usize);
        if self.den == rhs.den {
            return Scalar::normalize(padd(&a, &b), m, self.den.clone(), 0).unwrap();
        }
        let n = padd(&pmul(&a, &rhs.den), &pmul(&b, &self.den));
        Scalar::normalize(n, m, pmul(&self.den, &rhs.den), 0).unwrap()
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { shift: self.shift, num: pneg(&self.num), den: self.den.clone() }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

// ---- Mul ----

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        if self.is_zero() || rhs.is_zero() {
            return Scalar::zero();
        }
        if self.is_laurent() && rhs.is_laurent() {
            // products of polynomials with nonzero constant terms keep that property
            let num = pmul(&self.num, &rhs.num);
            let c = content(&num);
            debug_assert!(!c.is_zero());
            return Scalar { shift: self.shift + rhs.shift, num, den: vec![BigInt::one()] };
        }
        Scalar::normalize(
            pmul(&self.num, &rhs.num),
            self.shift + rhs.shift,
            pmul(&self.den, &rhs.den),
            0,
        )
        .unwrap()
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        self * &rhs.inv().expect("division by zero scalar")
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar { (&self).$m(&rhs) }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar { (&self).$m(rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Arbitrary but fixed total order, used only for deterministic sorting.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.shift, &self.num, &self.den).cmp(&(other.shift, &other.num, &other.den))
    }
}

// ---- text form ----

fn fmt_poly(p: &[BigInt], shift: i32) -> (String, usize) {
    let mut parts: Vec<(bool, String)> = Vec::new();
    for (i, c) in p.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let e = shift + i as i32;
        let neg = c.is_negative();
        let a = c.abs();
        let mono = match e {
            0 => String::new(),
            1 => "v".to_string(),
            _ => format!("v^{e}"),
        };
        let body = if mono.is_empty() {
            a.to_string()
        } else if a.is_one() {
            mono
        } else {
            format!("{a}*{mono}")
        };
        parts.push((neg, body));
    }
    let mut s = String::new();
    for (k, (neg, body)) in parts.iter().enumerate() {
        if k == 0 {
            if *neg {
                s.push('-');
            }
        } else {
            s.push_str(if *neg { " - " } else { " + " });
        }
        s.push_str(body);
    }
    (s, parts.len())
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let (n, nt) = fmt_poly(&self.num, self.shift);
        if self.is_laurent() {
            return write!(f, "{n}");
        }
        let (d, dt) = fmt_poly(&self.den, 0);
        let n = if nt > 1 || n.starts_with('-') { format!("({n})") } else { n };
        let d = if dt > 1 || self.den.len() > 1 { format!("({d})") } else { d };
        write!(f, "{n}/{d}")
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Scalar {
    type Err = ScalarError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        crate::cli::parse_scalar(s).map_err(|e| ScalarError::Parse(e.to_string()))
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        c.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn normalize_examples() {
        let s = Scalar::normalize(p(&[-1, 0, 0, 0, 1]), 0, p(&[-1, 0, 1]), 0).unwrap();
        assert_eq!(s, Scalar::laurent(0, &[1, 0, 1]));
        assert_eq!(Scalar::normalize(p(&[0, 1]), 0, p(&[1]), 0).unwrap(), Scalar::v());
        let half = Scalar::normalize(p(&[0, 0, 2]), 0, p(&[4]), 0).unwrap();
        assert_eq!(half.to_string(), "v^2/2");
        assert_eq!(half, &Scalar::q() * &Scalar::rational(1, 2));
        assert!(Scalar::normalize(p(&[1]), 0, p(&[]), 0).is_err());
    }

    #[test]
    fn normalize_is_idempotent() {
        let s = Scalar::normalize(p(&[3, 0, -3]), 1, p(&[6, 6]), 0).unwrap();
        let again = Scalar::normalize(s.num.clone(), s.shift, s.den.clone(), 0).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.to_string(), "(v - v^2)/2");
    }

    #[test]
    fn evaluate_examples() {
        assert!((Scalar::q().eval_f64(0.25) - 0.25).abs() < 1e-15);
        let s = Scalar::laurent(0, &[1, 0, 0, 0, -1]);
        assert!((s.eval_f64(0.25) - 0.9375).abs() < 1e-15);
        assert!((Scalar::v_pow(-2).eval_f64(0.5) - 2.0).abs() < 1e-15);
        assert!(Scalar::one().evaluate(1.5).is_err());
    }

    #[test]
    fn pole_detected() {
        // 1/(1 - 2v) has a pole at v = 1/2, i.e. q = 1/4
        let s = Scalar::normalize(p(&[1]), 0, p(&[1, -2]), 0).unwrap();
        assert!(matches!(s.evaluate(0.25), Err(ScalarError::Pole(_))));
    }

    #[test]
    fn text_round_trip() {
        let s = Scalar::normalize(p(&[1, 0, 0, 0, -1]), 0, p(&[1, 0, 1]), 0).unwrap();
        // (1 - v^4)/(1 + v^2) simplifies to 1 - v^2
        assert_eq!(s.to_string(), "1 - v^2");
        let t = Scalar::normalize(p(&[1, 0, 0, 0, -1]), 0, p(&[1, 0, 0, 2]), 0).unwrap();
        assert_eq!(t.to_string(), "(1 - v^4)/(1 + 2*v^3)");
        for x in [s, t, Scalar::v_pow(-2), Scalar::rational(-3, 7), Scalar::zero()] {
            assert_eq!(x.to_string().parse::<Scalar>().unwrap(), x);
        }
    }

    #[test]
    fn qint_matches_definition() {
        let q = Scalar::q();
        let qi = q.inv().unwrap();
        let two = (&q - &qi) * (&q + &qi) / (&q - &qi);
        assert_eq!(Scalar::qint(2), two);
        assert_eq!(Scalar::qint(1), Scalar::one());
    }
}
