//! The fifteen quadratic generators, the physical-operator dictionary and the
//! hydrogenic state vectors in the oscillator representation.
//!
//! Index conventions follow the generator definitions literally:
//! `n_a(λ) = (σ_λ)ₛₜ aₛ†aₜ`, `n_b(λ) = (σ_λ)ₛₜ bₜ†bₛ`, `m(λ) = (σ_λ)ₛₜ aₜbₛ`,
//! `m†(λ) = (σ_λ)ₛₜ aₛ†bₜ†`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::coeff::{Coefficient, GaussRational, Symbol};
use crate::error::{Error, Result};
use crate::wick::modes::{a, a_dag, b, b_dag};
use crate::wick::{KetState, OperatorExpr};

/// Pauli matrix `σ_λ`, `λ ∈ {1,2,3}`, with exact entries.
pub fn pauli(lambda: u8) -> [[GaussRational; 2]; 2] {
    let z = GaussRational::zero;
    let one = GaussRational::one;
    let i = GaussRational::i;
    match lambda {
        1 => [[z(), one()], [one(), z()]],
        2 => [[z(), i().conj()], [i(), z()]],
        3 => [[one(), z()], [z(), GaussRational::from_int(-1)]],
        _ => panic!("Pauli index must be 1, 2 or 3, got {lambda}"),
    }
}

/// One of the fifteen generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorName {
    /// `N + 2`.
    Nplus2,
    NA(u8),
    NB(u8),
    M,
    Mdag,
    Ml(u8),
    MlDag(u8),
}

impl GeneratorName {
    pub const ALL: [GeneratorName; 15] = [
        GeneratorName::Nplus2,
        GeneratorName::NA(1),
        GeneratorName::NA(2),
        GeneratorName::NA(3),
        GeneratorName::NB(1),
        GeneratorName::NB(2),
        GeneratorName::NB(3),
        GeneratorName::M,
        GeneratorName::Mdag,
        GeneratorName::Ml(1),
        GeneratorName::Ml(2),
        GeneratorName::Ml(3),
        GeneratorName::MlDag(1),
        GeneratorName::MlDag(2),
        GeneratorName::MlDag(3),
    ];
}

impl fmt::Display for GeneratorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorName::Nplus2 => write!(f, "N2"),
            GeneratorName::NA(l) => write!(f, "n_a_{l}"),
            GeneratorName::NB(l) => write!(f, "n_b_{l}"),
            GeneratorName::M => write!(f, "M"),
            GeneratorName::Mdag => write!(f, "Mdag"),
            GeneratorName::Ml(l) => write!(f, "m_{l}"),
            GeneratorName::MlDag(l) => write!(f, "mdag_{l}"),
        }
    }
}

fn parse_lambda(s: &str, prefix: &str) -> Option<u8> {
    let rest = s.strip_prefix(prefix)?;
    match rest {
        "1" => Some(1),
        "2" => Some(2),
        "3" => Some(3),
        _ => None,
    }
}

impl FromStr for GeneratorName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let g = match s {
            "N2" => GeneratorName::Nplus2,
            "M" => GeneratorName::M,
            "Mdag" => GeneratorName::Mdag,
            _ => {
                if let Some(l) = parse_lambda(s, "n_a_") {
                    GeneratorName::NA(l)
                } else if let Some(l) = parse_lambda(s, "n_b_") {
                    GeneratorName::NB(l)
                } else if let Some(l) = parse_lambda(s, "mdag_") {
                    GeneratorName::MlDag(l)
                } else if let Some(l) = parse_lambda(s, "m_") {
                    GeneratorName::Ml(l)
                } else {
                    return Err(Error::InvalidArgument(format!("unknown generator `{s}`")));
                }
            }
        };
        Ok(g)
    }
}

/// Operators of the physical dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhysicalOpName {
    /// Radius `r`.
    R,
    /// Cartesian coordinate `x_λ`.
    X(u8),
    /// Formal replacement for `r p_λ`.
    Rp(u8),
    /// `r p²`.
    RP2,
    /// Squared orbital angular momentum.
    L2,
    /// Angular momentum component `l_λ`.
    L(u8),
}

impl PhysicalOpName {
    pub const ALL: [PhysicalOpName; 12] = [
        PhysicalOpName::R,
        PhysicalOpName::X(1),
        PhysicalOpName::X(2),
        PhysicalOpName::X(3),
        PhysicalOpName::Rp(1),
        PhysicalOpName::Rp(2),
        PhysicalOpName::Rp(3),
        PhysicalOpName::RP2,
        PhysicalOpName::L2,
        PhysicalOpName::L(1),
        PhysicalOpName::L(2),
        PhysicalOpName::L(3),
    ];
}

impl fmt::Display for PhysicalOpName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhysicalOpName::R => write!(f, "r"),
            PhysicalOpName::X(l) => write!(f, "x_{l}"),
            PhysicalOpName::Rp(l) => write!(f, "rp_{l}"),
            PhysicalOpName::RP2 => write!(f, "rp2"),
            PhysicalOpName::L2 => write!(f, "L2"),
            PhysicalOpName::L(l) => write!(f, "l_{l}"),
        }
    }
}

impl FromStr for PhysicalOpName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let p = match s {
            "r" => PhysicalOpName::R,
            "rp2" => PhysicalOpName::RP2,
            "L2" => PhysicalOpName::L2,
            _ => {
                if let Some(l) = parse_lambda(s, "x_") {
                    PhysicalOpName::X(l)
                } else if let Some(l) = parse_lambda(s, "rp_") {
                    PhysicalOpName::Rp(l)
                } else if let Some(l) = parse_lambda(s, "l_") {
                    PhysicalOpName::L(l)
                } else {
                    return Err(Error::InvalidArgument(format!(
                        "unknown physical operator `{s}`"
                    )));
                }
            }
        };
        Ok(p)
    }
}

fn mode_pair(family_a: fn(u8) -> OperatorExpr, s: u8, family_b: fn(u8) -> OperatorExpr, t: u8) -> OperatorExpr {
    family_a(s).multiply(&family_b(t))
}

/// `Σₛₜ (σ_λ)ₛₜ · f(s, t)`.
fn sigma_sum(lambda: u8, f: impl Fn(u8, u8) -> OperatorExpr) -> OperatorExpr {
    let sigma = pauli(lambda);
    let mut out = OperatorExpr::zero();
    for s in 1..=2u8 {
        for t in 1..=2u8 {
            let w = &sigma[s as usize - 1][t as usize - 1];
            if !w.is_zero() {
                out = &out + &f(s, t).scale(&Coefficient::constant(w.clone()));
            }
        }
    }
    out
}

fn number_operator() -> OperatorExpr {
    let mut n = OperatorExpr::zero();
    for s in 1..=2 {
        n = &n + &mode_pair(a_dag, s, a, s);
        n = &n + &mode_pair(b_dag, s, b, s);
    }
    n
}

/// Normal-form expansion of a generator.
pub fn generator(name: GeneratorName) -> OperatorExpr {
    match name {
        GeneratorName::Nplus2 => &number_operator() + &OperatorExpr::scalar(Coefficient::from_int(2)),
        GeneratorName::NA(l) => sigma_sum(l, |s, t| mode_pair(a_dag, s, a, t)),
        GeneratorName::NB(l) => sigma_sum(l, |s, t| mode_pair(b_dag, t, b, s)),
        GeneratorName::M => &mode_pair(a, 1, b, 1) + &mode_pair(a, 2, b, 2),
        GeneratorName::Mdag => &mode_pair(a_dag, 1, b_dag, 1) + &mode_pair(a_dag, 2, b_dag, 2),
        GeneratorName::Ml(l) => sigma_sum(l, |s, t| mode_pair(a, t, b, s)),
        GeneratorName::MlDag(l) => sigma_sum(l, |s, t| mode_pair(a_dag, s, b_dag, t)),
    }
}

fn inv_two_omega() -> Coefficient {
    Coefficient::from_ratio(1, 2) * Coefficient::symbol_pow(Symbol::Omega, -1)
}

/// Expression of a physical operator with ω kept symbolic.
pub fn physical_operator(name: PhysicalOpName) -> OperatorExpr {
    use GeneratorName as G;
    let g = generator;
    match name {
        PhysicalOpName::R => (&(&g(G::M) + &g(G::Mdag)) + &g(G::Nplus2)).scale(&inv_two_omega()),
        PhysicalOpName::X(l) => {
            let sum = &(&g(G::Ml(l)) + &g(G::MlDag(l))) + &(&g(G::NA(l)) + &g(G::NB(l)));
            sum.scale(&inv_two_omega())
        }
        PhysicalOpName::Rp(l) => {
            let diff = &g(G::Ml(l)) - &g(G::MlDag(l));
            diff.scale(&(Coefficient::from_ratio(-1, 2) * Coefficient::i()))
        }
        PhysicalOpName::RP2 => {
            let inner = &(&g(G::Nplus2) - &g(G::M)) - &g(G::Mdag);
            inner.scale(&(Coefficient::from_ratio(1, 2) * Coefficient::symbol(Symbol::Omega)))
        }
        PhysicalOpName::L2 => {
            let n = number_operator();
            let quarter = n.multiply(&g(G::Nplus2)).scale(&Coefficient::from_ratio(1, 4));
            &quarter - &g(G::Mdag).multiply(&g(G::M))
        }
        PhysicalOpName::L(l) => &g(G::NA(l)) - &g(G::NB(l)),
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `1/(n!(n+1)!)`, the printed squared normalization of both state families.
fn printed_scale_sq(n: u64) -> BigRational {
    BigRational::new(BigInt::one(), factorial(n) * factorial(n + 1))
}

/// s-state `(M†)ⁿ|0⟩` carrying the squared normalization `1/(n!(n+1)!)`.
pub fn s_state(n: i64) -> Result<KetState> {
    if n < 0 {
        return Err(Error::InvalidArgument(format!("s-state index must be >= 0, got {n}")));
    }
    let core = generator(GeneratorName::Mdag).pow(n as u32);
    KetState::with_scale_sq(core, printed_scale_sq(n as u64))
}

/// m = 1 p-state `(M†)ⁿ⁻¹ a₁†b₂†|0⟩` with the same printed normalization as
/// the s-states. That factor does not normalize the p-states; see
/// [`p_state_squared_norm`].
pub fn p_state(n: i64) -> Result<KetState> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("p-state index must be >= 1, got {n}")));
    }
    let core = generator(GeneratorName::Mdag)
        .pow(n as u32 - 1)
        .multiply(&a_dag(1))
        .multiply(&b_dag(2));
    KetState::with_scale_sq(core, printed_scale_sq(n as u64))
}

/// Closed form of `⟨p(n)|p(n)⟩` under the printed normalization, `(n+2)/(6n)`.
/// The raw ladder `(M†)ᵐ` acts on the lowest-weight vector `a₁†b₂†|0⟩` with
/// Bargmann index 2, giving raw squared norm `(n-1)!(n+2)!/6`.
pub fn p_state_squared_norm(n: u64) -> BigRational {
    assert!(n >= 1);
    BigRational::new(BigInt::from(n + 2), BigInt::from(6 * n))
}

/// One commutator of the closure table.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureEntry {
    pub pair: (GeneratorName, GeneratorName),
    /// Nonzero structure coefficients.
    pub coefficients: BTreeMap<GeneratorName, Coefficient>,
    pub residual: OperatorExpr,
}

impl fmt::Display for ClosureEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] = ", self.pair.0, self.pair.1)?;
        if self.coefficients.is_empty() {
            write!(f, "0")?;
        }
        for (k, (g, c)) in self.coefficients.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if c.is_one() {
                write!(f, "{g}")?;
            } else {
                write!(f, "{}*{g}", c.to_expr_string())?;
            }
        }
        if !self.residual.is_zero() {
            write!(f, "  residual: {}", self.residual)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureReport {
    pub entries: Vec<ClosureEntry>,
}

impl ClosureReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.residual.is_zero())
    }
}

/// Exact least-squares-free span solve: finds `x` with `Σ xᵢ basisᵢ = target`
/// when possible and returns the residual `target - Σ xᵢ basisᵢ`. Pivots
/// must be single-term coefficients.
pub fn solve_in_span(
    basis: &[OperatorExpr],
    target: &OperatorExpr,
) -> Result<(Vec<Coefficient>, OperatorExpr)> {
    let mut monos: Vec<_> = basis.iter().flat_map(|b| b.terms().map(|(m, _)| *m)).collect();
    monos.extend(target.terms().map(|(m, _)| *m));
    monos.sort();
    monos.dedup();
    let ncols = basis.len();
    // augmented rows: [basis coefficients..., target]
    let mut rows: Vec<Vec<Coefficient>> = monos
        .iter()
        .map(|m| {
            let mut row: Vec<Coefficient> = basis
                .iter()
                .map(|b| b.coefficient(m).cloned().unwrap_or_default())
                .collect();
            row.push(target.coefficient(m).cloned().unwrap_or_default());
            row
        })
        .collect();

    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][col].clone();
        for entry in rows[r].iter_mut() {
            *entry = entry.checked_div(&pivot)?;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone();
                for k in 0..=ncols {
                    let delta = &factor * &rows[r][k];
                    rows[i][k] = &rows[i][k] - &delta;
                }
            }
        }
        pivots.push((r, col));
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let mut x = vec![Coefficient::zero(); ncols];
    for (row, col) in pivots {
        x[col] = rows[row][ncols].clone();
    }
    let mut fitted = OperatorExpr::zero();
    for (b, c) in basis.iter().zip(&x) {
        fitted = &fitted + &b.scale(c);
    }
    Ok((x, target - &fitted))
}

/// Expresses every commutator of two distinct generators in the generator
/// span.
pub fn check_closure() -> Result<ClosureReport> {
    let basis: Vec<OperatorExpr> = GeneratorName::ALL.iter().map(|&g| generator(g)).collect();
    let mut entries = Vec::with_capacity(105);
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            let comm = basis[i].commutator(&basis[j]);
            let (x, residual) = solve_in_span(&basis, &comm)?;
            let coefficients = GeneratorName::ALL
                .iter()
                .zip(x)
                .filter(|(_, c)| !c.is_zero())
                .map(|(g, c)| (*g, c))
                .collect();
            entries.push(ClosureEntry {
                pair: (GeneratorName::ALL[i], GeneratorName::ALL[j]),
                coefficients,
                residual,
            });
        }
    }
    Ok(ClosureReport { entries })
}
