//! Exact scalars for the symbolic layer.
//!
//! A [`Coefficient`] is a Laurent polynomial over a small fixed set of formal
//! symbols with Gaussian-rational coefficients. Every operator coefficient
//! that appears in the generator dictionary is of this shape (powers of
//! `1/(2ω)` times integers and `±i`), and the shape is closed under sums,
//! products and conjugation, so no rounding ever happens here. Division is
//! only defined by single-term divisors, which is all the closure solver and
//! the normalizations need.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Formal symbols a coefficient may carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Oscillator frequency ω.
    Omega,
    /// Energy parameter v.
    V,
    /// Disentangled coefficient of `M†`.
    CPlus,
    /// Disentangled coefficient of `M`.
    CMinus,
    /// `exp(c₀)`, the exponential of the disentangled `(N+2)` coefficient.
    ExpCZero,
}

impl Symbol {
    pub const COUNT: usize = 5;
    pub const ALL: [Symbol; Symbol::COUNT] = [
        Symbol::Omega,
        Symbol::V,
        Symbol::CPlus,
        Symbol::CMinus,
        Symbol::ExpCZero,
    ];

    fn slot(self) -> usize {
        self as usize
    }

    /// Name used when rendering.
    pub fn name(self) -> &'static str {
        match self {
            Symbol::Omega => "w",
            Symbol::V => "v",
            Symbol::CPlus => "cp",
            Symbol::CMinus => "cm",
            Symbol::ExpCZero => "e0",
        }
    }
}

/// Exact complex number with rational parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Self {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(num.into(), den.into()))
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
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

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let d = self.norm_sqr();
        Some(Self::new(&self.re / &d, -&self.im / &d))
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn add_ref(&self, o: &Self) -> Self {
        Self::new(&self.re + &o.re, &self.im + &o.im)
    }

    fn mul_ref(&self, o: &Self) -> Self {
        Self::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    fn neg_ref(&self) -> Self {
        Self::new(-self.re.clone(), -self.im.clone())
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, q: &BigRational) -> fmt::Result {
    if q.denom().is_one() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for GaussRational {
    /// `3/2`, `-1/2i`, `(1+2i)`; parseable by the expression grammar.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write_rational(f, &self.re),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-self.im.clone()).is_one() {
                    write!(f, "-i")
                } else {
                    write_rational(f, &self.im)?;
                    write!(f, "i")
                }
            }
            (false, false) => {
                write!(f, "(")?;
                write_rational(f, &self.re)?;
                if self.im.is_positive() {
                    write!(f, "+")?;
                }
                write_rational(f, &self.im)?;
                write!(f, "i)")
            }
        }
    }
}

/// Exponent vector over [`Symbol::ALL`]; negative entries are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SymbolPowers(pub [i32; Symbol::COUNT]);

impl SymbolPowers {
    pub fn of(sym: Symbol, exp: i32) -> Self {
        let mut p = [0; Symbol::COUNT];
        p[sym.slot()] = exp;
        Self(p)
    }

    pub fn get(&self, sym: Symbol) -> i32 {
        self.0[sym.slot()]
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn combine(&self, o: &Self, sign: i32) -> Self {
        let mut p = self.0;
        for (a, b) in p.iter_mut().zip(o.0) {
            *a += sign * b;
        }
        Self(p)
    }
}

/// Numeric values assigned to symbols for evaluation.
#[derive(Debug, Clone, Default)]
pub struct SymbolValues {
    values: [Option<Complex64>; Symbol::COUNT],
}

impl SymbolValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, sym: Symbol, value: impl Into<Complex64>) -> Self {
        self.values[sym.slot()] = Some(value.into());
        self
    }

    pub fn omega(omega: f64) -> Self {
        Self::new().with(Symbol::Omega, omega)
    }

    pub fn get(&self, sym: Symbol) -> Option<Complex64> {
        self.values[sym.slot()]
    }
}

/// Exact scalar of the symbolic layer. Zero terms are never stored, so
/// structural equality is mathematical equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Coefficient {
    terms: BTreeMap<SymbolPowers, GaussRational>,
}

impl Coefficient {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(GaussRational::one())
    }

    pub fn i() -> Self {
        Self::constant(GaussRational::i())
    }

    pub fn constant(g: GaussRational) -> Self {
        Self::term(SymbolPowers::default(), g)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(GaussRational::from_int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::constant(GaussRational::from_ratio(num, den))
    }

    pub fn from_rational(q: BigRational) -> Self {
        Self::constant(GaussRational::real(q))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_rational(BigRational::from_integer(n))
    }

    /// `sym^exp`.
    pub fn symbol_pow(sym: Symbol, exp: i32) -> Self {
        Self::term(SymbolPowers::of(sym, exp), GaussRational::one())
    }

    pub fn symbol(sym: Symbol) -> Self {
        Self::symbol_pow(sym, 1)
    }

    pub fn term(powers: SymbolPowers, g: GaussRational) -> Self {
        let mut terms = BTreeMap::new();
        if !g.is_zero() {
            terms.insert(powers, g);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|g| g.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SymbolPowers, &GaussRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if no symbol occurs.
    pub fn as_constant(&self) -> Option<GaussRational> {
        match self.terms.len() {
            0 => Some(GaussRational::zero()),
            1 => {
                let (p, g) = self.terms.iter().next().unwrap();
                p.is_constant().then(|| g.clone())
            }
            _ => None,
        }
    }

    /// Real rational value if the coefficient is a real constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.as_constant().filter(|g| g.is_real()).map(|g| g.re)
    }

    pub fn conj(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(p, g)| (*p, g.conj())).collect(),
        }
    }

    fn insert_add(&mut self, p: SymbolPowers, g: GaussRational) {
        if g.is_zero() {
            return;
        }
        match self.terms.get_mut(&p) {
            Some(existing) => {
                let sum = existing.add_ref(&g);
                if sum.is_zero() {
                    self.terms.remove(&p);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(p, g);
            }
        }
    }

    pub fn scale(&self, g: &GaussRational) -> Self {
        if g.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(p, c)| (*p, c.mul_ref(g)))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact quotient by a single-term divisor.
    pub fn checked_div(&self, divisor: &Self) -> Result<Self> {
        if divisor.terms.len() != 1 {
            return Err(Error::NonMonomialDivisor(divisor.to_string()));
        }
        let (p, g) = divisor.terms.iter().next().unwrap();
        let inv = g.inv().expect("stored terms are nonzero");
        Ok(Self {
            terms: self
                .terms
                .iter()
                .map(|(q, c)| (q.combine(p, -1), c.mul_ref(&inv)))
                .collect(),
        })
    }

    /// Substitutes numeric values for every symbol that occurs.
    pub fn eval(&self, values: &SymbolValues) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for (p, g) in &self.terms {
            let mut t = g.to_complex();
            for sym in Symbol::ALL {
                let e = p.get(sym);
                if e != 0 {
                    let x = values
                        .get(sym)
                        .ok_or(Error::UnboundSymbol(sym.name()))?;
                    t *= x.powi(e);
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// Substitutes one symbol by an exact value, leaving the others formal.
    pub fn substitute(&self, sym: Symbol, value: &GaussRational) -> Result<Self> {
        let mut out = Self::zero();
        for (p, g) in &self.terms {
            let e = p.get(sym);
            let base = if e < 0 {
                value
                    .inv()
                    .ok_or(Error::NonMonomialDivisor("0".to_string()))?
            } else {
                value.clone()
            };
            let mut factor = GaussRational::one();
            for _ in 0..e.unsigned_abs() {
                factor = factor.mul_ref(&base);
            }
            let mut q = *p;
            q.0[sym.slot()] = 0;
            out.insert_add(q, g.mul_ref(&factor));
        }
        Ok(out)
    }

    /// Largest absolute exponent of `sym`.
    pub fn max_power(&self, sym: Symbol) -> i32 {
        self.terms.keys().map(|p| p.get(sym)).max().unwrap_or(0)
    }

    /// Renders in the operator-expression grammar (`1/2*w^-1`).
    pub fn to_expr_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (p, g)) in self.terms.iter().enumerate() {
            let (neg, mag) = split_sign(g);
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&render_term(p, &mag));
        }
        out
    }
}

/// Pulls a leading minus off real or purely imaginary values.
pub(crate) fn split_sign(g: &GaussRational) -> (bool, GaussRational) {
    let neg = if g.im.is_zero() {
        g.re.is_negative()
    } else if g.re.is_zero() {
        g.im.is_negative()
    } else {
        false
    };
    if neg {
        (true, g.neg_ref())
    } else {
        (false, g.clone())
    }
}

pub(crate) fn render_term(p: &SymbolPowers, g: &GaussRational) -> String {
    let mut factors = Vec::new();
    let constant = p.is_constant();
    if !g.is_one() || constant {
        factors.push(g.to_string());
    }
    for sym in Symbol::ALL {
        let e = p.get(sym);
        match e {
            0 => {}
            1 => factors.push(sym.name().to_string()),
            _ => factors.push(format!("{}^{}", sym.name(), e)),
        }
    }
    factors.join("*")
}

impl fmt::Display for Coefficient {
    /// Human form with symbol denominators pulled out: `1/w`, `3/(4*w^2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Common symbol denominator.
        let mut den = [0i32; Symbol::COUNT];
        for p in self.terms.keys() {
            for (d, &e) in den.iter_mut().zip(p.0.iter()) {
                *d = (*d).max(-e);
            }
        }
        let den = SymbolPowers(den);
        let lifted: Coefficient = Coefficient {
            terms: self
                .terms
                .iter()
                .map(|(p, g)| (p.combine(&den, 1), g.clone()))
                .collect(),
        };
        if den.is_constant() {
            return write!(f, "{}", lifted.to_expr_string());
        }
        // Pull a single rational denominator out of a lone real numerator.
        let mut den_factors = Vec::new();
        let mut numer = lifted.clone();
        if let Some((p, g)) = lifted.terms.iter().next().filter(|_| lifted.len() == 1) {
            if g.is_real() && !g.re.denom().is_one() {
                let d = BigRational::from_integer(g.re.denom().clone());
                den_factors.push(g.re.denom().to_string());
                numer = Coefficient::term(*p, GaussRational::real(&g.re * d));
            }
        }
        for sym in Symbol::ALL {
            match den.get(sym) {
                0 => {}
                1 => den_factors.push(sym.name().to_string()),
                e => den_factors.push(format!("{}^{}", sym.name(), e)),
            }
        }
        let numer_s = numer.to_expr_string();
        let numer_s = if numer.len() > 1 {
            format!("({numer_s})")
        } else {
            numer_s
        };
        if den_factors.len() == 1 {
            write!(f, "{}/{}", numer_s, den_factors[0])
        } else {
            write!(f, "{}/({})", numer_s, den_factors.join("*"))
        }
    }
}

impl From<GaussRational> for Coefficient {
    fn from(g: GaussRational) -> Self {
        Self::constant(g)
    }
}

impl From<i64> for Coefficient {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl Add<&Coefficient> for &Coefficient {
    type Output = Coefficient;
    fn add(self, rhs: &Coefficient) -> Coefficient {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Coefficient {
    type Output = Coefficient;
    fn add(mut self, rhs: Coefficient) -> Coefficient {
        self += &rhs;
        self
    }
}

impl AddAssign<&Coefficient> for Coefficient {
    fn add_assign(&mut self, rhs: &Coefficient) {
        for (p, g) in &rhs.terms {
            self.insert_add(*p, g.clone());
        }
    }
}

impl Sub<&Coefficient> for &Coefficient {
    type Output = Coefficient;
    fn sub(self, rhs: &Coefficient) -> Coefficient {
        self + &(-rhs)
    }
}

impl Sub for Coefficient {
    type Output = Coefficient;
    fn sub(self, rhs: Coefficient) -> Coefficient {
        &self - &rhs
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient {
            terms: self.terms.iter().map(|(p, g)| (*p, g.neg_ref())).collect(),
        }
    }
}

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        -&self
    }
}

impl Mul<&Coefficient> for &Coefficient {
    type Output = Coefficient;
    fn mul(self, rhs: &Coefficient) -> Coefficient {
        let mut out = Coefficient::zero();
        for (p, g) in &self.terms {
            for (q, h) in &rhs.terms {
                out.insert_add(p.combine(q, 1), g.mul_ref(h));
            }
        }
        out
    }
}

impl Mul for Coefficient {
    type Output = Coefficient;
    fn mul(self, rhs: Coefficient) -> Coefficient {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w() -> Coefficient {
        Coefficient::symbol(Symbol::Omega)
    }

    #[test]
    fn cancellation_prunes_terms() {
        let a = &w() + &Coefficient::from_int(2);
        let b = &a - &w();
        assert_eq!(b, Coefficient::from_int(2));
        assert!((&b - &Coefficient::from_int(2)).is_zero());
    }

    #[test]
    fn laurent_products() {
        let half_over_w = Coefficient::from_ratio(1, 2) * Coefficient::symbol_pow(Symbol::Omega, -1);
        let prod = &half_over_w * &(&w() * &Coefficient::from_int(4));
        assert_eq!(prod, Coefficient::from_int(2));
    }

    #[test]
    fn gaussian_arithmetic() {
        let i = Coefficient::i();
        assert_eq!(&i * &i, Coefficient::from_int(-1));
        assert_eq!(i.conj(), -&i);
        let z = GaussRational::new(BigRational::new(1.into(), 2.into()), BigRational::one());
        let inv = z.inv().unwrap();
        assert!(z.mul_ref(&inv).is_one());
    }

    #[test]
    fn division_by_monomial_only() {
        let c = &w() + &Coefficient::one();
        assert!(c.checked_div(&c).is_err());
        let q = c.checked_div(&(Coefficient::from_int(2) * w())).unwrap();
        assert_eq!(
            q,
            Coefficient::from_ratio(1, 2) + Coefficient::from_ratio(1, 2) * Coefficient::symbol_pow(Symbol::Omega, -1)
        );
    }

    #[test]
    fn display_forms() {
        let inv_w = Coefficient::symbol_pow(Symbol::Omega, -1);
        assert_eq!(inv_w.to_string(), "1/w");
        let c = Coefficient::from_ratio(3, 4) * Coefficient::symbol_pow(Symbol::Omega, -2);
        assert_eq!(c.to_string(), "3/(4*w^2)");
        assert_eq!(c.to_expr_string(), "3/4*w^-2");
        assert_eq!(Coefficient::from_ratio(-5, 2).to_string(), "-5/2");
        let z = Coefficient::constant(GaussRational::new(BigRational::one(), BigRational::from_integer((-2).into())));
        assert_eq!(z.to_string(), "(1-2i)");
    }

    #[test]
    fn eval_and_substitute() {
        let c = Coefficient::from_ratio(1, 2) * Coefficient::symbol_pow(Symbol::Omega, -1);
        let v = c.eval(&SymbolValues::omega(0.25)).unwrap();
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert!(c.eval(&SymbolValues::new()).is_err());
        let s = c.substitute(Symbol::Omega, &GaussRational::from_int(2)).unwrap();
        assert_eq!(s, Coefficient::from_ratio(1, 4));
    }
}
