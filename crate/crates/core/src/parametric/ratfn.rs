//! Rational functions with a factored denominator.
//!
//! Denominators are kept as products of monic factors. Sums use the least
//! common multiple of the factor lists and cancellation is trial division
//! of the numerator by each factor, so no multivariate gcd is needed.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{rational_to_f64, Poly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFn {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

impl RatFn {
    pub fn zero(nvars: usize) -> Self {
        RatFn::from_poly(Poly::zero(nvars))
    }

    pub fn one(nvars: usize) -> Self {
        RatFn::from_poly(Poly::one(nvars))
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        RatFn::from_poly(Poly::constant(nvars, c))
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFn {
            num: p,
            den: Vec::new(),
        }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    /// Monic denominator factors with multiplicities.
    pub fn denominator(&self) -> &[(Poly, u32)] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    fn expanded_denominator(&self) -> Poly {
        cofactor(self.nvars(), &self.den, &[])
    }

    fn cancel(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        for (f, e) in &mut self.den {
            while *e > 0 {
                match self.num.div_exact(f) {
                    Some(q) => {
                        self.num = q;
                        *e -= 1;
                    }
                    None => break,
                }
            }
        }
        self.den.retain(|(_, e)| *e > 0);
        self
    }

    pub fn add(&self, other: &RatFn) -> RatFn {
        let lcm = lcm(&self.den, &other.den);
        let a = &self.num * &cofactor(self.nvars(), &lcm, &self.den);
        let b = &other.num * &cofactor(self.nvars(), &lcm, &other.den);
        RatFn { num: &a + &b, den: lcm }.cancel()
    }

    pub fn neg(&self) -> RatFn {
        RatFn {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RatFn) -> RatFn {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFn) -> RatFn {
        if self.is_zero() || other.is_zero() {
            return RatFn::zero(self.nvars());
        }
        let mut den = self.den.clone();
        for (f, e) in &other.den {
            push_factor(&mut den, f.clone(), *e);
        }
        RatFn {
            num: &self.num * &other.num,
            den,
        }
        .cancel()
    }

    pub fn scale(&self, c: &BigRational) -> RatFn {
        RatFn {
            num: self.num.scale(c),
            den: if c.is_zero() { Vec::new() } else { self.den.clone() },
        }
    }

    /// `self / other`; `None` when `other` is identically zero.
    pub fn div(&self, other: &RatFn) -> Option<RatFn> {
        if other.is_zero() {
            return None;
        }
        let mut num = &self.num * &other.expanded_denominator();
        let mut den = self.den.clone();
        match other.num.as_constant() {
            Some(c) => num = num.scale(&c.recip()),
            None => {
                let (lc, monic) = other.num.monic();
                num = num.scale(&lc.recip());
                push_factor(&mut den, monic, 1);
            }
        }
        Some(RatFn { num, den }.cancel())
    }

    /// Exact value; `None` if a denominator factor vanishes.
    pub fn eval(&self, point: &[BigRational]) -> Option<BigRational> {
        let mut d = BigRational::one();
        for (f, e) in &self.den {
            let v = f.eval(point);
            for _ in 0..*e {
                d *= &v;
            }
        }
        (!d.is_zero()).then(|| self.num.eval(point) / d)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let d: f64 = self
            .den
            .iter()
            .map(|(f, e)| f.eval_f64(point).powi(*e as i32))
            .product();
        self.num.eval_f64(point) / d
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// Value as `f64` if constant.
    pub fn constant_f64(&self) -> Option<f64> {
        self.as_constant().map(|c| rational_to_f64(&c))
    }
}

fn push_factor(list: &mut Vec<(Poly, u32)>, f: Poly, e: u32) {
    match list.iter_mut().find(|(g, _)| *g == f) {
        Some((_, k)) => *k += e,
        None => list.push((f, e)),
    }
}

fn multiplicity(list: &[(Poly, u32)], f: &Poly) -> u32 {
    list.iter().find(|(g, _)| g == f).map_or(0, |(_, e)| *e)
}

fn lcm(a: &[(Poly, u32)], b: &[(Poly, u32)]) -> Vec<(Poly, u32)> {
    let mut out = a.to_vec();
    for (f, e) in b {
        match out.iter_mut().find(|(g, _)| g == f) {
            Some((_, k)) => *k = (*k).max(*e),
            None => out.push((f.clone(), *e)),
        }
    }
    out
}

/// Product of `whole / part`, both given as factor lists with `part ⊆ whole`.
fn cofactor(nvars: usize, whole: &[(Poly, u32)], part: &[(Poly, u32)]) -> Poly {
    let mut out = Poly::one(nvars);
    for (f, e) in whole {
        for _ in 0..e - multiplicity(part, f) {
            out = &out * f;
        }
    }
    out
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        write!(f, "({})", self.num)?;
        f.write_str(" / (")?;
        for (i, (p, e)) in self.den.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            if *e == 1 {
                write!(f, "({p})")?;
            } else {
                write!(f, "({p})^{e}")?;
            }
        }
        f.write_str(")")
    }
}
