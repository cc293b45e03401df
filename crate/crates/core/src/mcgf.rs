//! Many-particle Green operator as a shift-convolution of one-particle ones.
//!
//! For independent particles the resolvent of `Σ H_k` is an integral over
//! shifts `α_k` with `Σ α_k = 0` of the product of one-particle resolvents at
//! energies `E_k - α_k`. Two-particle operators are pairs of one-particle
//! monomials with a product vacuum, so expectation values factorize.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;

use crate::coeff::Coefficient;
use crate::error::{Error, Result};
use crate::su11::Branch;
use crate::wick::{NormalMonomial, OperatorExpr};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleSpec {
    pub index: usize,
    pub charge: f64,
    pub energy: f64,
}

impl ParticleSpec {
    pub fn new(index: usize, charge: f64, energy: f64) -> Result<Self> {
        if !(charge > 0.0 && charge.is_finite()) {
            return Err(Error::InvalidArgument(format!("charge must be positive, got {charge}")));
        }
        if !energy.is_finite() {
            return Err(Error::InvalidArgument(format!("energy must be finite, got {energy}")));
        }
        Ok(Self { index, charge, energy })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionPlan {
    particles: Vec<ParticleSpec>,
}

pub fn build_plan(particles: &[ParticleSpec]) -> Result<ConvolutionPlan> {
    if particles.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "a convolution plan needs at least 2 particles, got {}",
            particles.len()
        )));
    }
    Ok(ConvolutionPlan {
        particles: particles.to_vec(),
    })
}

impl ConvolutionPlan {
    pub fn particles(&self) -> &[ParticleSpec] {
        &self.particles
    }

    pub fn total_energy(&self) -> f64 {
        self.particles.iter().map(|p| p.energy).sum()
    }

    /// The last shift is fixed by the constraint.
    pub fn free_shift_count(&self) -> usize {
        self.particles.len() - 1
    }

    pub fn shifts(&self, free: &[Complex64]) -> Result<Vec<Complex64>> {
        if free.len() != self.free_shift_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} free shifts, got {}",
                self.free_shift_count(),
                free.len()
            )));
        }
        let mut out = free.to_vec();
        out.push(-free.iter().sum::<Complex64>());
        Ok(out)
    }

    /// `E_k - α_k` for every particle.
    pub fn effective_energies(&self, free: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self
            .shifts(free)?
            .into_iter()
            .zip(&self.particles)
            .map(|(a, p)| Complex64::new(p.energy, 0.0) - a)
            .collect())
    }
}

/// Maps an energy to `(v, branch)` with `E = -v²/2` (Bound) or `E = +v²/2`
/// (Continuum, positive real energies only), `Re(v) > 0`.
pub fn energy_to_v(energy: Complex64) -> Result<(Complex64, Branch)> {
    if energy.norm() == 0.0 {
        return Err(Error::InvalidArgument("branch point v = 0".into()));
    }
    if energy.im == 0.0 && energy.re > 0.0 {
        return Ok((Complex64::new((2.0 * energy.re).sqrt(), 0.0), Branch::Continuum));
    }
    Ok(((-2.0 * energy).sqrt(), Branch::Bound))
}

/// `(v, branch)` for the one-particle operator `½rp² + ½ω²r - αr`, i.e. the
/// energy `-ω²/2 + α`, so that `v² = ω² - 2α` on the Bound branch.
pub fn shift_to_v(alpha: Complex64, omega: f64) -> Result<(Complex64, Branch)> {
    energy_to_v(Complex64::new(-0.5 * omega * omega, 0.0) + alpha)
}

/// Operator on two particles: a sum of `coefficient · (m₁ ⊗ m₂)` with each
/// factor normal ordered in its own four modes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProductExpr {
    terms: BTreeMap<(NormalMonomial, NormalMonomial), Coefficient>,
}

impl ProductExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::tensor(&OperatorExpr::one(), &OperatorExpr::one())
    }

    pub fn tensor(first: &OperatorExpr, second: &OperatorExpr) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in first.terms() {
            for (m2, c2) in second.terms() {
                out.add_term(m1.clone(), m2.clone(), c1 * c2);
            }
        }
        out
    }

    pub fn first(op: &OperatorExpr) -> Self {
        Self::tensor(op, &OperatorExpr::one())
    }

    pub fn second(op: &OperatorExpr) -> Self {
        Self::tensor(&OperatorExpr::one(), op)
    }

    fn add_term(&mut self, m1: NormalMonomial, m2: NormalMonomial, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        let key = (m1, m2);
        let sum = match self.terms.remove(&key) {
            Some(prev) => &prev + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(NormalMonomial, NormalMonomial), &Coefficient)> {
        self.terms.iter()
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

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((m1, m2), c) in &other.terms {
            out.add_term(m1.clone(), m2.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Coefficient) -> Self {
        let mut out = Self::zero();
        for ((m1, m2), v) in &self.terms {
            out.add_term(m1.clone(), m2.clone(), v * c);
        }
        out
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((a1, a2), ca) in &self.terms {
            for ((b1, b2), cb) in &other.terms {
                let c = ca * cb;
                let first = a1.product(b1);
                let second = a2.product(b2);
                for (m1, w1) in &first {
                    for (m2, w2) in &second {
                        let w = Coefficient::from_bigint(w1 * w2);
                        out.add_term(m1.clone(), m2.clone(), &c * &w);
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.multiply(other)
            .add(&other.multiply(self).scale(&Coefficient::from_int(-1)))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for ((m1, m2), c) in &self.terms {
            out.add_term(m1.adjoint(), m2.adjoint(), c.conj());
        }
        out
    }

    /// Creation-only part, i.e. the operator applied to the product vacuum.
    pub fn apply_to_vacuum(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|((m1, m2), _)| m1.is_creation_only() && m2.is_creation_only())
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// `⟨0|left · middle · right|0⟩` without forming the full product:
    /// both sides are reduced to kets first.
    pub fn vacuum_bracket(left: &Self, middle: &Self, right: &Self) -> Coefficient {
        let ket = middle.multiply(&right.apply_to_vacuum()).apply_to_vacuum();
        let bra = left.adjoint().apply_to_vacuum();
        let mut sum = Coefficient::zero();
        for (key, c) in &bra.terms {
            if let Some(d) = ket.terms.get(key) {
                let weight = occupation_weight(&key.0) * occupation_weight(&key.1);
                sum += &(&(&c.conj() * d) * &Coefficient::from_bigint(weight));
            }
        }
        sum
    }

    /// Expectation in the product vacuum.
    pub fn vacuum_expectation(&self) -> Coefficient {
        let id = NormalMonomial::identity();
        self.terms
            .get(&(id.clone(), id))
            .cloned()
            .unwrap_or_else(Coefficient::zero)
    }
}

/// `‖(a†)^n|0⟩‖² = Π n_k!` for a creation-only monomial.
fn occupation_weight(m: &NormalMonomial) -> BigInt {
    m.creation()
        .iter()
        .flat_map(|&n| 1..=n)
        .fold(BigInt::from(1), |acc, k| acc * k)
}

impl fmt::Display for ProductExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, ((m1, m2), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*[{m1}]x[{m2}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydrogenic::{generator, GeneratorName};
    use crate::wick::modes;

    fn two(e: f64) -> Vec<ParticleSpec> {
        vec![ParticleSpec::new(1, 1.0, e).unwrap(), ParticleSpec::new(2, 1.0, e).unwrap()]
    }

    #[test]
    fn two_particle_plan() {
        let plan = build_plan(&two(-0.5)).unwrap();
        assert_eq!(plan.free_shift_count(), 1);
        let a = Complex64::new(0.3, 0.2);
        let e = plan.effective_energies(&[a]).unwrap();
        assert_eq!(e[0], Complex64::new(-0.5, 0.0) - a);
        assert_eq!(e[1], Complex64::new(-0.5, 0.0) + a);
        let s = plan.shifts(&[a]).unwrap();
        assert_eq!(s[0] + s[1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn three_particle_plan() {
        let ps = vec![
            ParticleSpec::new(1, 1.0, -0.5).unwrap(),
            ParticleSpec::new(2, 2.0, -2.0).unwrap(),
            ParticleSpec::new(3, 1.0, -0.125).unwrap(),
        ];
        let plan = build_plan(&ps).unwrap();
        assert_eq!(plan.free_shift_count(), 2);
        let s = plan.shifts(&[Complex64::new(0.1, 0.0), Complex64::new(0.0, 0.4)]).unwrap();
        assert_eq!(s.iter().sum::<Complex64>(), Complex64::new(0.0, 0.0));
        assert!((plan.total_energy() + 2.625).abs() < 1e-15);
    }

    #[test]
    fn plan_rejects_short_lists() {
        assert!(build_plan(&[]).is_err());
        assert!(build_plan(&two(-0.5)[..1]).is_err());
        assert!(ParticleSpec::new(1, 0.0, -0.5).is_err());
    }

    #[test]
    fn shift_mapping() {
        let (v, b) = shift_to_v(Complex64::new(0.0, 0.0), 1.0).unwrap();
        assert_eq!(b, Branch::Bound);
        assert!((v - 1.0).norm() < 1e-15);
        assert!(shift_to_v(Complex64::new(0.5, 0.0), 1.0).is_err());
        let (v, b) = shift_to_v(Complex64::new(1.0, 0.0), 1.0).unwrap();
        assert_eq!(b, Branch::Continuum);
        assert!((v - 1.0).norm() < 1e-15);
        let (v, b) = shift_to_v(Complex64::new(0.0, 0.7), 1.0).unwrap();
        assert_eq!(b, Branch::Bound);
        assert!(v.re > 0.0);
        assert!((v * v - Complex64::new(1.0, -1.4)).norm() < 1e-14);
    }

    #[test]
    fn factors_commute_across_particles() {
        for g in GeneratorName::ALL {
            let a = ProductExpr::first(&generator(g));
            for h in GeneratorName::ALL {
                let b = ProductExpr::second(&generator(h));
                assert!(a.commutator(&b).is_zero());
            }
        }
        let x = ProductExpr::first(&modes::a(1));
        let y = ProductExpr::first(&modes::a_dag(1));
        assert_eq!(x.commutator(&y), ProductExpr::one());
    }

    #[test]
    fn product_vacuum_factorizes() {
        let m = generator(GeneratorName::M);
        let md = generator(GeneratorName::Mdag);
        let op = ProductExpr::tensor(&m, &m).multiply(&ProductExpr::tensor(&md, &md));
        let single = m.multiply(&md).vacuum_expectation();
        assert_eq!(op.vacuum_expectation(), &single * &single);
        let left = ProductExpr::tensor(&m, &m);
        let right = ProductExpr::tensor(&md, &md);
        let n2 = ProductExpr::tensor(&generator(GeneratorName::Nplus2), &generator(GeneratorName::Nplus2));
        let direct = left.multiply(&n2).multiply(&right).vacuum_expectation();
        assert_eq!(ProductExpr::vacuum_bracket(&left, &n2, &right), direct);
    }
}
