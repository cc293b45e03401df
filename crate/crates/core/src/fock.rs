//! Truncated Fock-space linear algebra, used as an independent oracle for
//! the analytic pipeline.
//!
//! States are occupation vectors `|n_{a1}, n_{a2}, n_{b1}, n_{b2}⟩` in the
//! orthonormal number basis. A monomial `(a†)ⁿ|0⟩` maps to `√(n!)·|n⟩`.
//! Operators are assembled by acting with each normal monomial directly on
//! basis states; anything leaving the basis is discarded (the truncation).

use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;

use crate::coeff::SymbolValues;
use crate::error::{Error, Result};
use crate::wick::{NormalMonomial, OperatorExpr, MODES};

pub type Occupation = [u32; MODES];

/// Cutoff on the total number of quanta across the four modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockTruncation {
    pub max_quanta: u32,
}

impl FockTruncation {
    pub fn new(max_quanta: u32) -> Result<Self> {
        if max_quanta == 0 {
            return Err(Error::InvalidArgument("truncation must be positive".into()));
        }
        Ok(Self { max_quanta })
    }
}

/// Ordered set of occupation vectors.
#[derive(Debug, Clone)]
pub struct FockBasis {
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
    max_quanta: u32,
}

fn total(occ: &Occupation) -> u32 {
    occ.iter().sum()
}

impl FockBasis {
    fn from_states(mut states: Vec<Occupation>, max_quanta: u32) -> Self {
        // Lexicographic order keeps the pair-ladder operators banded.
        states.sort_unstable();
        states.dedup();
        let index = states.iter().enumerate().map(|(k, s)| (*s, k)).collect();
        Self {
            states,
            index,
            max_quanta,
        }
    }

    /// Every occupation with at most `max_quanta` quanta.
    pub fn full(trunc: FockTruncation) -> Self {
        let t = trunc.max_quanta;
        let mut states = Vec::new();
        for n0 in 0..=t {
            for n1 in 0..=t - n0 {
                for n2 in 0..=t - n0 - n1 {
                    for n3 in 0..=t - n0 - n1 - n2 {
                        states.push([n0, n1, n2, n3]);
                    }
                }
            }
        }
        Self::from_states(states, t)
    }

    /// Closure of `seeds` under the pair ladders `M`, `M†` (steps of
    /// `±(1,0,1,0)` and `±(0,1,0,1)`), restricted to `max_quanta`.
    pub fn pair_closure<I>(seeds: I, trunc: FockTruncation) -> Self
    where
        I: IntoIterator<Item = Occupation>,
    {
        const STEPS: [[i64; MODES]; 4] = [[1, 0, 1, 0], [0, 1, 0, 1], [-1, 0, -1, 0], [0, -1, 0, -1]];
        let t = trunc.max_quanta;
        let mut seen: HashMap<Occupation, ()> = HashMap::new();
        let mut queue: VecDeque<Occupation> = VecDeque::new();
        for s in seeds {
            if total(&s) <= t && seen.insert(s, ()).is_none() {
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for step in STEPS {
                let mut next = [0u32; MODES];
                let mut ok = true;
                for k in 0..MODES {
                    let v = s[k] as i64 + step[k];
                    if v < 0 {
                        ok = false;
                        break;
                    }
                    next[k] = v as u32;
                }
                if ok && total(&next) <= t && seen.insert(next, ()).is_none() {
                    queue.push_back(next);
                }
            }
        }
        Self::from_states(seen.into_keys().collect(), t)
    }

    /// Pair-ladder closure seeded by the occupations of creation-only
    /// expressions.
    pub fn for_kets(kets: &[&OperatorExpr], trunc: FockTruncation) -> Self {
        let seeds = kets
            .iter()
            .flat_map(|k| k.terms().map(|(m, _)| m.creation()))
            .collect::<Vec<_>>();
        Self::pair_closure(seeds, trunc)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn index_of(&self, occ: &Occupation) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn max_quanta(&self) -> u32 {
        self.max_quanta
    }

    /// Coordinates of a creation-only expression applied to the vacuum.
    pub fn ket_vector(&self, expr: &OperatorExpr, values: &SymbolValues) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        for (mono, c) in expr.terms() {
            if !mono.is_creation_only() {
                return Err(Error::NotCreationOnly);
            }
            let occ = mono.creation();
            let k = self.index_of(&occ).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "state {occ:?} lies outside the truncated basis ({} quanta)",
                    self.max_quanta
                ))
            })?;
            let norm: f64 = occ.iter().map(|&n| factorial_f64(n)).product::<f64>().sqrt();
            out[k] += c.eval(values)? * norm;
        }
        Ok(out)
    }

    /// Truncated matrix of `expr` in this basis.
    pub fn operator_matrix(&self, expr: &OperatorExpr, values: &SymbolValues) -> Result<SparseMatrix> {
        let mut terms = Vec::with_capacity(expr.len());
        for (mono, c) in expr.terms() {
            terms.push((*mono, c.eval(values)?));
        }
        let mut m = SparseMatrix::new(self.len());
        for (col, occ) in self.states.iter().enumerate() {
            for (mono, c) in &terms {
                if let Some((target, amp)) = act(mono, occ) {
                    if let Some(row) = self.index_of(&target) {
                        m.add(row, col, c * amp);
                    }
                }
            }
        }
        m.compress();
        Ok(m)
    }
}

fn factorial_f64(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `(a†)ᶜ aᵈ |n⟩` for one normal monomial acting on an occupation vector.
fn act(mono: &NormalMonomial, occ: &Occupation) -> Option<(Occupation, f64)> {
    let c = mono.creation();
    let d = mono.annihilation();
    let mut out = [0u32; MODES];
    let mut amp = 1.0;
    for k in 0..MODES {
        let n = occ[k];
        if d[k] > n {
            return None;
        }
        let mid = n - d[k];
        // √(n!/(n-d)!) · √((n-d+c)!/(n-d)!)
        for j in mid + 1..=n {
            amp *= f64::from(j).sqrt();
        }
        for j in mid + 1..=mid + c[k] {
            amp *= f64::from(j).sqrt();
        }
        out[k] = mid + c[k];
    }
    Some((out, amp))
}

/// Square complex matrix stored as sorted `(row, col, value)` triplets.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    n: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            entries: (0..n).map(|k| (k, k, Complex64::new(1.0, 0.0))).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries.push((row, col, value));
    }

    /// Sums duplicates and drops exact zeros.
    pub fn compress(&mut self) {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut out: Vec<(usize, usize, Complex64)> = Vec::with_capacity(self.entries.len());
        for &(r, c, v) in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => out.push((r, c, v)),
            }
        }
        out.retain(|e| e.2 != Complex64::new(0.0, 0.0));
        self.entries = out;
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries
            .binary_search_by_key(&(row, col), |&(r, c, _)| (r, c))
            .map(|k| self.entries[k].2)
            .unwrap_or_default()
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &SparseMatrix, b: Complex64) -> SparseMatrix {
        assert_eq!(self.n, other.n);
        let mut m = SparseMatrix::new(self.n);
        m.entries.extend(self.entries.iter().map(|&(r, c, v)| (r, c, a * v)));
        m.entries.extend(other.entries.iter().map(|&(r, c, v)| (r, c, b * v)));
        m.compress();
        m
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut by_row: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); other.n];
        for &(r, c, v) in &other.entries {
            by_row[r].push((c, v));
        }
        let mut m = SparseMatrix::new(self.n);
        for &(r, k, v) in &self.entries {
            for &(c, w) in &by_row[k] {
                m.add(r, c, v * w);
            }
        }
        m.compress();
        m
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        self.entries.iter().fold((0, 0), |(kl, ku), &(r, c, _)| {
            if r > c {
                (kl.max(r - c), ku)
            } else {
                (kl, ku.max(c - r))
            }
        })
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut sums = vec![0.0; self.n];
        for &(r, _, v) in &self.entries {
            sums[r] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }
}

/// LU factorization with partial pivoting in band storage.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    /// Upper bandwidth of U after pivoting fill, `kl + ku`.
    kv: usize,
    /// Element `(i, j)` lives at `ab[(kv + i - j) * n + j]`.
    ab: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let n = a.dim();
        let (kl, ku) = a.bandwidths();
        let kv = kl + ku;
        let rows = kv + kl + 1;
        let mut lu = Self {
            n,
            kl,
            kv,
            ab: vec![Complex64::new(0.0, 0.0); rows * n],
            pivots: vec![0; n],
        };
        for &(i, j, v) in a.entries() {
            *lu.at(i, j) = v;
        }
        let scale = a.norm_inf().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kv).min(n - 1);
            let mut p = k;
            let mut best = lu.get(k, k).norm();
            for i in k + 1..=last_row {
                let v = lu.get(i, k).norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-14 * scale {
                return Err(Error::SingularSystem(format!(
                    "zero pivot in column {k} of {n}"
                )));
            }
            lu.pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    let tmp = lu.get(k, j);
                    *lu.at(k, j) = lu.get(p, j);
                    *lu.at(p, j) = tmp;
                }
            }
            let inv = lu.get(k, k).inv();
            for i in k + 1..=last_row {
                let l = lu.get(i, k) * inv;
                *lu.at(i, k) = l;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..=last_col {
                    let u = lu.get(k, j);
                    *lu.at(i, j) -= l * u;
                }
            }
        }
        Ok(lu)
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.ab[(self.kv + i - j) * self.n + j]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> Complex64 {
        self.ab[(self.kv + i - j) * self.n + j]
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + self.kl).min(n.saturating_sub(1)) {
                x[i] -= self.get(i, k) * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + self.kv).min(n - 1) {
                s -= self.get(k, j) * x[j];
            }
            x[k] = s / self.get(k, k);
        }
        x
    }
}

/// `exp(scale · A) x` by scaled Taylor steps; each step has `‖scale·A‖/s ≤ ½`.
pub fn expm_action(a: &SparseMatrix, scale: Complex64, x: &[Complex64]) -> Vec<Complex64> {
    let norm = a.norm_inf() * scale.norm();
    let steps = (norm / 0.5).ceil().max(1.0) as usize;
    let h = scale / steps as f64;
    let mut v = x.to_vec();
    for _ in 0..steps {
        let mut term = v.clone();
        let mut acc = v.clone();
        for k in 1..60 {
            term = a.mul_vec(&term);
            let f = h / k as f64;
            for t in term.iter_mut() {
                *t *= f;
            }
            let tn: f64 = term.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
            for (a, t) in acc.iter_mut().zip(&term) {
                *a += t;
            }
            let an: f64 = acc.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
            if tn <= 1e-18 * an.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        v = acc;
    }
    v
}

/// `Σᵢ conj(xᵢ) yᵢ`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coefficient;
    use crate::hydrogenic::{generator, GeneratorName};
    use crate::wick::modes::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ladder_matrix_elements() {
        let basis = FockBasis::full(FockTruncation::new(4).unwrap());
        let m = basis.operator_matrix(&a_dag(1), &SymbolValues::new()).unwrap();
        let from = basis.index_of(&[2, 0, 0, 0]).unwrap();
        let to = basis.index_of(&[3, 0, 0, 0]).unwrap();
        assert!((m.get(to, from) - c(3f64.sqrt(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn ket_vector_uses_factorial_norm() {
        let basis = FockBasis::full(FockTruncation::new(4).unwrap());
        let e = a_dag(1).pow(2).scale(&Coefficient::from_int(3));
        let v = basis.ket_vector(&e, &SymbolValues::new()).unwrap();
        let k = basis.index_of(&[2, 0, 0, 0]).unwrap();
        assert!((v[k] - c(3.0 * 2f64.sqrt(), 0.0)).norm() < 1e-14);
        assert!(basis.ket_vector(&a(1), &SymbolValues::new()).is_err());
    }

    #[test]
    fn pair_closure_is_lattice() {
        let basis = FockBasis::pair_closure([[0, 0, 0, 0]], FockTruncation::new(8).unwrap());
        // (i, j, i, j) with i + j <= 4
        assert_eq!(basis.len(), 15);
        let mdag = basis.operator_matrix(&generator(GeneratorName::Mdag), &SymbolValues::new()).unwrap();
        let (kl, ku) = mdag.bandwidths();
        assert!(kl <= 5 && ku == 0);
    }

    #[test]
    fn banded_lu_matches_dense_solution() {
        // tridiagonal system with known solution
        let n = 30;
        let mut m = SparseMatrix::new(n);
        for k in 0..n {
            m.add(k, k, c(0.1, 1.0));
            if k + 1 < n {
                m.add(k, k + 1, c(2.0, 0.0));
                m.add(k + 1, k, c(-1.0, 0.5));
            }
        }
        m.compress();
        let x: Vec<Complex64> = (0..n).map(|k| c(k as f64, 1.0 / (k + 1) as f64)).collect();
        let b = m.mul_vec(&x);
        let sol = BandedLu::factor(&m).unwrap().solve(&b);
        for (s, e) in sol.iter().zip(&x) {
            assert!((s - e).norm() < 1e-10);
        }
    }

    #[test]
    fn singular_system_detected() {
        let mut m = SparseMatrix::new(2);
        m.add(0, 0, c(1.0, 0.0));
        m.compress();
        assert!(matches!(BandedLu::factor(&m), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn expm_action_on_diagonal() {
        let mut m = SparseMatrix::new(3);
        for k in 0..3 {
            m.add(k, k, c(k as f64 + 1.0, 0.0));
        }
        m.compress();
        let x = vec![c(1.0, 0.0); 3];
        let y = expm_action(&m, c(0.0, -2.0), &x);
        for k in 0..3 {
            let expect = (c(0.0, -2.0) * (k as f64 + 1.0)).exp();
            assert!((y[k] - expect).norm() < 1e-13);
        }
    }
}
