//! Normal-ordered algebra of the four boson modes `a₁, a₂, b₁, b₂`.
//!
//! Every [`OperatorExpr`] is kept in normal form: a finite map from
//! [`NormalMonomial`] (creation operators left of annihilation operators, modes
//! in the fixed order `a₁†, a₂†, b₁†, b₂†, a₁, a₂, b₁, b₂`) to an exact
//! [`Coefficient`]. Distinct modes commute, so the product of two normal
//! monomials factorizes mode by mode and each factor is reordered with
//!
//! ```text
//! aᵈ (a†)ᶜ = Σⱼ j!·C(d,j)·C(c,j) (a†)^(c-j) a^(d-j)
//! ```

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::coeff::{render_term, split_sign, Coefficient};
use crate::error::{Error, Result};

/// Number of boson modes.
pub const MODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    A,
    B,
}

/// A single creation or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeOp {
    pub family: Family,
    /// 1 or 2.
    pub index: u8,
    pub dagger: bool,
}

impl ModeOp {
    /// All eight operators in canonical monomial order.
    pub const ALL: [ModeOp; 8] = [
        ModeOp::new(Family::A, 1, true),
        ModeOp::new(Family::A, 2, true),
        ModeOp::new(Family::B, 1, true),
        ModeOp::new(Family::B, 2, true),
        ModeOp::new(Family::A, 1, false),
        ModeOp::new(Family::A, 2, false),
        ModeOp::new(Family::B, 1, false),
        ModeOp::new(Family::B, 2, false),
    ];

    pub const fn new(family: Family, index: u8, dagger: bool) -> Self {
        assert!(index == 1 || index == 2);
        Self {
            family,
            index,
            dagger,
        }
    }

    /// Mode number 0..4 in the order a₁, a₂, b₁, b₂.
    pub fn mode(self) -> usize {
        let f = match self.family {
            Family::A => 0,
            Family::B => 2,
        };
        f + self.index as usize - 1
    }

    /// Position in the exponent vector of a [`NormalMonomial`].
    pub fn slot(self) -> usize {
        self.mode() + if self.dagger { 0 } else { MODES }
    }

    pub fn adjoint(self) -> Self {
        Self {
            dagger: !self.dagger,
            ..self
        }
    }

    pub fn name(self) -> &'static str {
        ["a1", "a2", "b1", "b2"][self.mode()]
    }
}

impl fmt::Display for ModeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name(), if self.dagger { "^" } else { "" })
    }
}

/// Normal-ordered product of mode operators. Slots `0..4` hold creation
/// exponents and slots `4..8` annihilation exponents, modes ordered a₁, a₂, b₁, b₂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct NormalMonomial {
    exps: [u32; 2 * MODES],
}

impl NormalMonomial {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_exponents(exps: [u32; 2 * MODES]) -> Self {
        Self { exps }
    }

    pub fn single(op: ModeOp) -> Self {
        let mut exps = [0; 2 * MODES];
        exps[op.slot()] = 1;
        Self { exps }
    }

    pub fn exponents(&self) -> &[u32; 2 * MODES] {
        &self.exps
    }

    pub fn power(&self, op: ModeOp) -> u32 {
        self.exps[op.slot()]
    }

    pub fn creation(&self) -> [u32; MODES] {
        self.exps[..MODES].try_into().unwrap()
    }

    pub fn annihilation(&self) -> [u32; MODES] {
        self.exps[MODES..].try_into().unwrap()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn creation_degree(&self) -> u32 {
        self.exps[..MODES].iter().sum()
    }

    pub fn annihilation_degree(&self) -> u32 {
        self.exps[MODES..].iter().sum()
    }

    pub fn is_identity(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn is_creation_only(&self) -> bool {
        self.annihilation_degree() == 0
    }

    /// Swaps creation and annihilation exponents; the result is again normal
    /// ordered because distinct modes commute.
    pub fn adjoint(&self) -> Self {
        let mut exps = [0; 2 * MODES];
        exps[..MODES].copy_from_slice(&self.exps[MODES..]);
        exps[MODES..].copy_from_slice(&self.exps[..MODES]);
        Self { exps }
    }

    /// Normal-ordered expansion of `self * rhs` with integer weights.
    pub fn product(&self, rhs: &Self) -> Vec<(NormalMonomial, BigInt)> {
        let mut base = [0; 2 * MODES];
        for (k, e) in base.iter_mut().enumerate() {
            *e = self.exps[k] + rhs.exps[k];
        }
        let mut out = vec![(NormalMonomial { exps: base }, BigInt::one())];
        for m in 0..MODES {
            let d = self.exps[MODES + m];
            let c = rhs.exps[m];
            if d == 0 || c == 0 {
                continue;
            }
            let contractions = contraction_weights(d, c);
            let mut next = Vec::with_capacity(out.len() * contractions.len());
            for (mono, w) in &out {
                for (j, cw) in contractions.iter().enumerate() {
                    let mut e = mono.exps;
                    e[m] -= j as u32;
                    e[MODES + m] -= j as u32;
                    next.push((NormalMonomial { exps: e }, w * cw));
                }
            }
            out = next;
        }
        out
    }
}

/// `j!·C(d,j)·C(c,j)` for `j = 0..=min(d,c)`.
fn contraction_weights(d: u32, c: u32) -> Vec<BigInt> {
    let top = d.min(c);
    let mut w = Vec::with_capacity(top as usize + 1);
    let mut cur = BigInt::one();
    w.push(cur.clone());
    for j in 1..=top {
        // ratio of consecutive terms: (d-j+1)(c-j+1)/j
        cur = cur * BigInt::from(d - j + 1) * BigInt::from(c - j + 1) / BigInt::from(j);
        w.push(cur.clone());
    }
    w
}

impl Ord for NormalMonomial {
    /// Graded lexicographic: total degree first, then the exponent vector.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for NormalMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NormalMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "1");
        }
        let mut first = true;
        for op in ModeOp::ALL {
            let e = self.power(op);
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{op}")?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Finite linear combination of normal monomials.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct OperatorExpr {
    terms: BTreeMap<NormalMonomial, Coefficient>,
}

impl OperatorExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(Coefficient::one())
    }

    pub fn scalar(c: Coefficient) -> Self {
        Self::monomial(NormalMonomial::identity(), c)
    }

    pub fn monomial(mono: NormalMonomial, c: Coefficient) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(mono, c);
        }
        Self { terms }
    }

    pub fn mode(op: ModeOp) -> Self {
        Self::monomial(NormalMonomial::single(op), Coefficient::one())
    }

    /// Sums duplicate monomials and drops zero coefficients.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (NormalMonomial, Coefficient)>,
    {
        let mut out = Self::zero();
        for (m, c) in terms {
            out.add_term(m, &c);
        }
        out
    }

    fn add_term(&mut self, mono: NormalMonomial, c: &Coefficient) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c.clone());
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NormalMonomial, &Coefficient)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mono: &NormalMonomial) -> Option<&Coefficient> {
        self.terms.get(mono)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest total degree among the terms (0 for scalars and zero).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn is_creation_only(&self) -> bool {
        self.terms.keys().all(|m| m.is_creation_only())
    }

    pub fn scale(&self, c: &Coefficient) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(m, k)| (*m, k * c)))
    }

    pub fn map_coefficients<F>(&self, f: F) -> Self
    where
        F: Fn(&Coefficient) -> Coefficient,
    {
        Self::from_terms(self.terms.iter().map(|(m, k)| (*m, f(k))))
    }

    /// Keeps only the terms of total degree `n`.
    pub fn grade(&self, n: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == n)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn multiply(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for (ml, cl) in &self.terms {
            for (mr, cr) in &rhs.terms {
                let c = cl * cr;
                for (m, w) in ml.product(mr) {
                    out.add_term(m, &c.scale(&crate::coeff::GaussRational::real(
                        BigRational::from_integer(w),
                    )));
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.multiply(self);
        }
        acc
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.multiply(rhs) - &rhs.multiply(self)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.adjoint(), c.conj()))
                .collect(),
        }
    }

    /// `⟨0|expr|0⟩`: the coefficient of the identity monomial.
    pub fn vacuum_expectation(&self) -> Coefficient {
        self.terms
            .get(&NormalMonomial::identity())
            .cloned()
            .unwrap_or_else(Coefficient::zero)
    }

    /// `expr|0⟩`: every term carrying an annihilator is dropped.
    pub fn apply_to_vacuum(&self) -> KetState {
        KetState {
            expr: Self {
                terms: self
                    .terms
                    .iter()
                    .filter(|(m, _)| m.is_creation_only())
                    .map(|(m, c)| (*m, c.clone()))
                    .collect(),
            },
            scale_sq: BigRational::one(),
        }
    }
}

pub fn multiply(lhs: &OperatorExpr, rhs: &OperatorExpr) -> OperatorExpr {
    lhs.multiply(rhs)
}

pub fn commutator(lhs: &OperatorExpr, rhs: &OperatorExpr) -> OperatorExpr {
    lhs.commutator(rhs)
}

pub fn adjoint(expr: &OperatorExpr) -> OperatorExpr {
    expr.adjoint()
}

pub fn vacuum_expectation(expr: &OperatorExpr) -> Coefficient {
    expr.vacuum_expectation()
}

pub fn apply_to_vacuum(expr: &OperatorExpr) -> KetState {
    expr.apply_to_vacuum()
}

impl fmt::Display for OperatorExpr {
    /// Canonical text in the expression grammar, e.g. `1/2*w^-1*a1^*b1^ + 1/w`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (mono, c)) in self.terms.iter().enumerate() {
            let (neg, body) = match c.terms().next().filter(|_| c.len() == 1) {
                Some((powers, g)) => {
                    let (neg, mag) = split_sign(g);
                    let coeff = if mag.is_one() && powers.is_constant() && !mono.is_identity() {
                        String::new()
                    } else {
                        render_term(powers, &mag)
                    };
                    (neg, coeff)
                }
                None => (false, format!("({})", c.to_expr_string())),
            };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            match (body.is_empty(), mono.is_identity()) {
                (true, _) => write!(f, "{mono}")?,
                (false, true) => write!(f, "{body}")?,
                (false, false) => write!(f, "{body}*{mono}")?,
            }
        }
        Ok(())
    }
}

impl Add<&OperatorExpr> for &OperatorExpr {
    type Output = OperatorExpr;
    fn add(self, rhs: &OperatorExpr) -> OperatorExpr {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c);
        }
        out
    }
}

impl Add for OperatorExpr {
    type Output = OperatorExpr;
    fn add(self, rhs: OperatorExpr) -> OperatorExpr {
        &self + &rhs
    }
}

impl Sub<&OperatorExpr> for &OperatorExpr {
    type Output = OperatorExpr;
    fn sub(self, rhs: &OperatorExpr) -> OperatorExpr {
        self + &(-rhs)
    }
}

impl Sub for OperatorExpr {
    type Output = OperatorExpr;
    fn sub(self, rhs: OperatorExpr) -> OperatorExpr {
        &self - &rhs
    }
}

impl Neg for &OperatorExpr {
    type Output = OperatorExpr;
    fn neg(self) -> OperatorExpr {
        OperatorExpr {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Neg for OperatorExpr {
    type Output = OperatorExpr;
    fn neg(self) -> OperatorExpr {
        -&self
    }
}

impl Mul<&OperatorExpr> for &OperatorExpr {
    type Output = OperatorExpr;
    fn mul(self, rhs: &OperatorExpr) -> OperatorExpr {
        self.multiply(rhs)
    }
}

impl Mul for OperatorExpr {
    type Output = OperatorExpr;
    fn mul(self, rhs: OperatorExpr) -> OperatorExpr {
        self.multiply(&rhs)
    }
}

impl From<ModeOp> for OperatorExpr {
    fn from(op: ModeOp) -> Self {
        Self::mode(op)
    }
}

impl From<Coefficient> for OperatorExpr {
    fn from(c: Coefficient) -> Self {
        Self::scalar(c)
    }
}

/// Creation-only expression applied to the vacuum.
///
/// The physical state is `√scale_sq · expr|0⟩`; the square root is never
/// materialized, so normalizations stay exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KetState {
    expr: OperatorExpr,
    scale_sq: BigRational,
}

impl KetState {
    pub fn new(expr: OperatorExpr) -> Result<Self> {
        Self::with_scale_sq(expr, BigRational::one())
    }

    pub fn with_scale_sq(expr: OperatorExpr, scale_sq: BigRational) -> Result<Self> {
        if !expr.is_creation_only() {
            return Err(Error::NotCreationOnly);
        }
        Ok(Self { expr, scale_sq })
    }

    pub fn vacuum() -> Self {
        Self {
            expr: OperatorExpr::one(),
            scale_sq: BigRational::one(),
        }
    }

    pub fn expr(&self) -> &OperatorExpr {
        &self.expr
    }

    pub fn scale_sq(&self) -> &BigRational {
        &self.scale_sq
    }

    pub fn is_zero(&self) -> bool {
        self.expr.is_zero()
    }

    /// `op · self`, reduced against the vacuum.
    pub fn apply(&self, op: &OperatorExpr) -> KetState {
        KetState {
            expr: op.multiply(&self.expr).apply_to_vacuum().expr,
            scale_sq: self.scale_sq.clone(),
        }
    }

    /// `⟨self|other⟩` of the unscaled expressions.
    pub fn raw_inner(&self, other: &KetState) -> Coefficient {
        self.expr.adjoint().multiply(&other.expr).vacuum_expectation()
    }

    /// `⟨ψ|ψ⟩` including the stored normalization.
    pub fn squared_norm(&self) -> Coefficient {
        self.raw_inner(self)
            .scale(&crate::coeff::GaussRational::real(self.scale_sq.clone()))
    }

    /// Whether the ket is `λ·other` for the exact scalar `λ`.
    pub fn is_multiple_of(&self, other: &KetState, lambda: &Coefficient) -> bool {
        self.expr == other.expr.scale(lambda)
    }
}

impl fmt::Display for KetState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale_sq.is_one() {
            write!(f, "({})|0>", self.expr)
        } else {
            write!(f, "sqrt({})*({})|0>", self.scale_sq, self.expr)
        }
    }
}

/// Convenience constructors for the raw modes.
pub mod modes {
    use super::{Family, ModeOp, OperatorExpr};

    pub fn a(index: u8) -> OperatorExpr {
        ModeOp::new(Family::A, index, false).into()
    }

    pub fn a_dag(index: u8) -> OperatorExpr {
        ModeOp::new(Family::A, index, true).into()
    }

    pub fn b(index: u8) -> OperatorExpr {
        ModeOp::new(Family::B, index, false).into()
    }

    pub fn b_dag(index: u8) -> OperatorExpr {
        ModeOp::new(Family::B, index, true).into()
    }
}

#[cfg(test)]
mod tests {
    use super::modes::*;
    use super::*;

    fn c(n: i64) -> OperatorExpr {
        OperatorExpr::scalar(Coefficient::from_int(n))
    }

    #[test]
    fn eight_distinct_mode_ops() {
        let slots: std::collections::BTreeSet<_> = ModeOp::ALL.iter().map(|o| o.slot()).collect();
        assert_eq!(slots.len(), 8);
        for (k, op) in ModeOp::ALL.iter().enumerate() {
            assert_eq!(op.slot(), k);
        }
    }

    #[test]
    fn canonical_commutation() {
        assert_eq!(a(1) * a_dag(1), &(a_dag(1) * a(1)) + &c(1));
        assert_eq!(a(1) * b_dag(2), b_dag(2) * a(1));
        assert_eq!(a(1).commutator(&a_dag(1)), c(1));
        assert!(a(1).commutator(&b(1)).is_zero());
        assert!(a(2).commutator(&a_dag(1)).is_zero());
    }

    #[test]
    fn higher_power_reordering() {
        // a² a†² = a†²a² + 4 a†a + 2
        let lhs = a(1).pow(2) * a_dag(1).pow(2);
        let rhs = &(&(a_dag(1).pow(2) * a(1).pow(2)) + &(a_dag(1) * a(1)).scale(&Coefficient::from_int(4))) + &c(2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn adjoint_rules() {
        assert_eq!(a(1).adjoint(), a_dag(1));
        let x = (a_dag(1) * b(2)).scale(&Coefficient::i());
        assert_eq!(x.adjoint(), (b_dag(2) * a(1)).scale(&-Coefficient::i()));
        assert_eq!(x.adjoint().adjoint(), x);
    }

    #[test]
    fn vacuum_rules() {
        assert!(OperatorExpr::one().vacuum_expectation().is_one());
        assert!((a_dag(1) * a(1)).vacuum_expectation().is_zero());
        assert!(a(1).apply_to_vacuum().is_zero());
        let e = &(a_dag(1) * a(1)) + &b_dag(1).scale(&Coefficient::from_int(3));
        assert_eq!(e.apply_to_vacuum().expr(), &b_dag(1).scale(&Coefficient::from_int(3)));
    }

    #[test]
    fn ket_rejects_annihilators() {
        assert_eq!(KetState::new(a(1)), Err(Error::NotCreationOnly));
        assert!(KetState::new(a_dag(2)).is_ok());
    }

    #[test]
    fn rendering() {
        let e = &(&(a_dag(1) * b_dag(1)) - &a(2).pow(3)) + &c(2);
        assert_eq!(e.to_string(), "2 + a1^*b1^ - a2^3");
        let h = (a_dag(1).pow(2) * a(1)).scale(&Coefficient::from_ratio(-1, 2));
        assert_eq!(h.to_string(), "-1/2*a1^^2*a1");
        assert_eq!(OperatorExpr::zero().to_string(), "0");
    }

    #[test]
    fn contraction_weights_match_factorials() {
        // a³ a†² contractions: j=0:1, j=1: 3·2=6, j=2: 2!·3·1=6
        let w: Vec<i64> = contraction_weights(3, 2)
            .into_iter()
            .map(|x| x.try_into().unwrap())
            .collect();
        assert_eq!(w, vec![1, 6, 6]);
    }
}
