//! Coefficient fields: exact Gaussian rationals and `f64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// The operations the exterior algebra and the linear solvers need from a
/// coefficient field.
pub trait Field: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    /// A square root inside the field, if one exists.
    fn sqrt(&self) -> Option<Self>;
    /// Magnitude used for pivoting and residual norms.
    fn magnitude(&self) -> f64;
    /// Real value when the scalar is real.
    fn to_real_f64(&self) -> Option<f64>;
    /// Whether the scalar is real and strictly negative.
    fn is_negative_real(&self) -> bool;
    fn is_exact() -> bool;

    fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.mul(&i))
    }
}

/// Exact Gaussian rational `re + im·i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gq {
    pub re: BigRational,
    pub im: BigRational,
}

impl Gq {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Gq { re, im }
    }

    pub fn int(v: i64) -> Self {
        Gq {
            re: BigRational::from_integer(BigInt::from(v)),
            im: BigRational::zero(),
        }
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Gq {
            re: BigRational::new(BigInt::from(n), BigInt::from(d)),
            im: BigRational::zero(),
        }
    }

    pub fn real(re: BigRational) -> Self {
        Gq {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn i() -> Self {
        Gq {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn zero() -> Self {
        Gq::int(0)
    }

    pub fn one() -> Self {
        Gq::int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Gq {
        Gq {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn inverse(&self) -> Option<Gq> {
        if self.is_zero() {
            return None;
        }
        if self.im.is_zero() {
            return Some(Gq::real(self.re.recip()));
        }
        let n = &self.re * &self.re + &self.im * &self.im;
        Some(Gq {
            re: &self.re / &n,
            im: -(&self.im / &n),
        })
    }

    /// Whether the scalar is a (real) negative number; used when printing
    /// sums so that `a + -b` reads `a - b`.
    pub fn is_negative(&self) -> bool {
        if self.re.is_zero() {
            self.im.is_negative()
        } else {
            self.re.is_negative()
        }
    }

    pub fn approx(&self) -> (f64, f64) {
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Expression-language rendering: `3/2`, `-2*i`, `(1 + 3/2*i)`.
    pub fn to_expr_string(&self) -> String {
        let r = fmt_rat(&self.re);
        if self.im.is_zero() {
            return r;
        }
        let im = if self.im.is_one() {
            "i".to_string()
        } else if (-self.im.clone()).is_one() {
            "-i".to_string()
        } else {
            format!("{}*i", fmt_rat(&self.im))
        };
        if self.re.is_zero() {
            im
        } else if self.im.is_negative() {
            format!("({} - {})", r, im.trim_start_matches('-'))
        } else {
            format!("({} + {})", r, im)
        }
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer();
    let d = r.denom();
    let sn = num_integer::Roots::sqrt(n);
    let sd = num_integer::Roots::sqrt(d);
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

impl fmt::Display for Gq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr_string())
    }
}

impl fmt::Debug for Gq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr_string())
    }
}

impl<'a> Add<&'a Gq> for &'a Gq {
    type Output = Gq;
    fn add(self, o: &Gq) -> Gq {
        if self.im.is_zero() && o.im.is_zero() {
            return Gq::real(&self.re + &o.re);
        }
        Gq {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
}

impl<'a> Sub<&'a Gq> for &'a Gq {
    type Output = Gq;
    fn sub(self, o: &Gq) -> Gq {
        if self.im.is_zero() && o.im.is_zero() {
            return Gq::real(&self.re - &o.re);
        }
        Gq {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
}

impl<'a> Mul<&'a Gq> for &'a Gq {
    type Output = Gq;
    fn mul(self, o: &Gq) -> Gq {
        if self.im.is_zero() && o.im.is_zero() {
            return Gq::real(&self.re * &o.re);
        }
        Gq {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl<'a> Div<&'a Gq> for &'a Gq {
    type Output = Gq;
    fn div(self, o: &Gq) -> Gq {
        self * &o.inverse().expect("division by zero Gaussian rational")
    }
}

impl Neg for &Gq {
    type Output = Gq;
    fn neg(self) -> Gq {
        Gq {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Gq> for Gq {
            type Output = Gq;
            fn $m(self, o: Gq) -> Gq {
                $tr::$m(&self, &o)
            }
        }
        impl<'a> $tr<&'a Gq> for Gq {
            type Output = Gq;
            fn $m(self, o: &Gq) -> Gq {
                $tr::$m(&self, o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Gq {
    type Output = Gq;
    fn neg(self) -> Gq {
        -&self
    }
}

impl AddAssign<&Gq> for Gq {
    fn add_assign(&mut self, o: &Gq) {
        self.re += &o.re;
        if !o.im.is_zero() {
            self.im += &o.im;
        }
    }
}

impl SubAssign<&Gq> for Gq {
    fn sub_assign(&mut self, o: &Gq) {
        self.re -= &o.re;
        if !o.im.is_zero() {
            self.im -= &o.im;
        }
    }
}

impl Field for Gq {
    fn zero() -> Self {
        Gq::int(0)
    }
    fn one() -> Self {
        Gq::int(1)
    }
    fn from_i64(v: i64) -> Self {
        Gq::int(v)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Gq::ratio(num, den)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        self.inverse()
    }
    fn is_zero(&self) -> bool {
        Gq::is_zero(self)
    }
    fn sqrt(&self) -> Option<Self> {
        if !self.im.is_zero() {
            return None;
        }
        if self.re.is_negative() {
            rational_sqrt(&-self.re.clone()).map(|s| Gq::new(BigRational::zero(), s))
        } else {
            rational_sqrt(&self.re).map(Gq::real)
        }
    }
    fn magnitude(&self) -> f64 {
        let (a, b) = self.approx();
        a.hypot(b)
    }
    fn to_real_f64(&self) -> Option<f64> {
        if self.im.is_zero() {
            self.re.to_f64()
        } else {
            None
        }
    }
    fn is_negative_real(&self) -> bool {
        self.im.is_zero() && self.re.is_negative()
    }
    fn is_exact() -> bool {
        true
    }
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn sqrt(&self) -> Option<Self> {
        if *self < 0.0 {
            None
        } else {
            Some(f64::sqrt(*self))
        }
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn to_real_f64(&self) -> Option<f64> {
        Some(*self)
    }
    fn is_negative_real(&self) -> bool {
        *self < 0.0
    }
    fn is_exact() -> bool {
        false
    }
}

/// Best rational approximation with denominator at most `max_den`
/// (continued fractions).
pub fn rationalize(x: f64, max_den: i64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i64;
        let p2 = a.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a as f64;
        if frac < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return None;
    }
    Some((if neg { -p1 } else { p1 }, q1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_arithmetic() {
        let a = Gq::new(BigRational::from_integer(1.into()), BigRational::from_integer(2.into()));
        let b = a.inverse().unwrap();
        assert!((&a * &b).is_one());
        assert_eq!(Gq::i() * Gq::i(), Gq::int(-1));
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(Field::sqrt(&Gq::ratio(9, 4)), Some(Gq::ratio(3, 2)));
        assert_eq!(Field::sqrt(&Gq::int(-4)), Some(Gq::int(2) * Gq::i()));
        assert_eq!(Field::sqrt(&Gq::int(2)), None);
    }

    #[test]
    fn expr_rendering() {
        assert_eq!(Gq::ratio(-3, 2).to_expr_string(), "-3/2");
        assert_eq!((Gq::int(1) - Gq::i()).to_expr_string(), "(1 - i)");
        assert_eq!((Gq::int(2) * Gq::i()).to_expr_string(), "2*i");
    }

    #[test]
    fn rationalize_recovers_simple_fractions() {
        assert_eq!(rationalize(-5.0 / 3.0, 1000), Some((-5, 3)));
        assert_eq!(rationalize(0.25, 1000), Some((1, 4)));
    }
}
