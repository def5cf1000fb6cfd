//! The 2N-dimensional hypercomplex system used for retrieval.
//!
//! The system is the direct sum of N split-complex blocks. Block `i`
//! (1-based) owns the basis pair `(e_p, e_q)` with `p = 2i - 1`, `q = 2i`,
//! and multiplies as `e_p e_p = e_p`, `e_p e_q = e_q`, `e_q e_q = e_p`.
//! Products of basis elements from different blocks vanish.
//!
//! Basis indices are 1-based throughout this module so that `e_1` reads as
//! `1` in code and tests.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Upper bound on the number of terms a table may describe.
pub const MAX_TERMS: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("a multiplication table needs at least one term")]
    NoTerms,
    #[error("{0} terms exceeds the supported maximum of {MAX_TERMS}")]
    TooManyTerms(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("basis index {index} is outside 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("coefficient of e_{index} is not finite")]
    NonFinite { index: usize },
    #[error("dimension {0} is not a positive even number")]
    OddDimension(usize),
}

/// One cell of the multiplication table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entry {
    Zero,
    Basis(usize),
}

/// Structure constants of the system. Every constant is 0 or 1, so the
/// table is computed from the block rule instead of being stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiplicationTable {
    n_terms: usize,
}

#[inline]
fn block_of(index: usize) -> usize {
    index.div_ceil(2)
}

impl MultiplicationTable {
    pub fn new(n_terms: usize) -> Result<Self, AlgebraError> {
        match n_terms {
            0 => Err(AlgebraError::NoTerms),
            n if n > MAX_TERMS => Err(AlgebraError::TooManyTerms(n)),
            n => Ok(Self { n_terms: n }),
        }
    }

    /// Table matching a hypercomplex number of the given dimension.
    pub fn for_dim(dim: usize) -> Result<Self, AlgebraError> {
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(AlgebraError::OddDimension(dim));
        }
        Self::new(dim / 2)
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn dim(&self) -> usize {
        2 * self.n_terms
    }

    /// Product `e_a · e_b`.
    ///
    /// Panics if either index lies outside `1..=dim`.
    pub fn entry(&self, a: usize, b: usize) -> Entry {
        let dim = self.dim();
        assert!((1..=dim).contains(&a), "basis index {a} outside 1..={dim}");
        assert!((1..=dim).contains(&b), "basis index {b} outside 1..={dim}");
        if block_of(a) != block_of(b) {
            return Entry::Zero;
        }
        let p = 2 * block_of(a) - 1;
        // odd·odd and even·even land on e_p, mixed pairs on e_q
        if (a % 2) == (b % 2) {
            Entry::Basis(p)
        } else {
            Entry::Basis(p + 1)
        }
    }

    fn check(&self, x: &HyperNumber) -> Result<(), AlgebraError> {
        if x.dim != self.dim() {
            return Err(AlgebraError::DimensionMismatch { left: self.dim(), right: x.dim });
        }
        Ok(())
    }

    /// Unit element `E = e_1 + e_3 + … + e_{2N-1}`.
    pub fn unit(&self) -> HyperNumber {
        let coeffs = (1..=self.n_terms).map(|i| (2 * i - 1, 1.0)).collect();
        HyperNumber { dim: self.dim(), coeffs }
    }

    /// Bilinear extension of the table. Only basis pairs that share a
    /// block are visited, since every other pair multiplies to zero.
    pub fn mul(&self, x: &HyperNumber, y: &HyperNumber) -> Result<HyperNumber, AlgebraError> {
        self.check(x)?;
        self.check(y)?;
        let mut out: BTreeMap<usize, f64> = BTreeMap::new();
        for (block, xs) in x.blocks() {
            let Some(ys) = y.block(block) else { continue };
            for &(a, xa) in xs.iter().flatten() {
                for &(b, yb) in ys.iter().flatten() {
                    if let Entry::Basis(c) = self.entry(a, b) {
                        *out.entry(c).or_insert(0.0) += xa * yb;
                    }
                }
            }
        }
        out.retain(|_, v| *v != 0.0);
        Ok(HyperNumber { dim: x.dim, coeffs: out })
    }

    /// Est of the product: the primary relevance score. Can be negative.
    pub fn sim(&self, a: &HyperNumber, b: &HyperNumber) -> Result<f64, AlgebraError> {
        Ok(est(&self.mul(a, b)?))
    }

    /// Distance-like score `Σ (Δ⁺)² (Δ⁻)²`, evaluated inside the algebra.
    /// Lower means closer. Not used for ranking.
    pub fn sim1(&self, a: &HyperNumber, b: &HyperNumber) -> Result<f64, AlgebraError> {
        self.check(a)?;
        self.check(b)?;
        let dim = self.dim();
        let mut blocks: Vec<usize> = a.blocks().map(|(i, _)| i).collect();
        blocks.extend(b.blocks().map(|(i, _)| i));
        blocks.sort_unstable();
        blocks.dedup();

        let mut total = HyperNumber::zero(dim);
        for i in blocks {
            let (p, q) = (2 * i - 1, 2 * i);
            let plus = HyperNumber::single(dim, p, a.coeff(p) - b.coeff(p))?;
            let minus = HyperNumber::single(dim, q, a.coeff(q) - b.coeff(q))?;
            let plus_sq = self.mul(&plus, &plus)?;
            let minus_sq = self.mul(&minus, &minus)?;
            total = total.add(&self.mul(&plus_sq, &minus_sq)?)?;
        }
        Ok(est(&total))
    }

    /// Block-diagonal matrix image of `x`; block `i` is `[[x_p, x_q], [x_q, x_p]]`.
    pub fn matrix_rep(&self, x: &HyperNumber) -> Result<BlockDiagonal, AlgebraError> {
        self.check(x)?;
        let mut blocks = vec![[[0.0; 2]; 2]; self.n_terms];
        for (i, block) in blocks.iter_mut().enumerate() {
            let (xp, xq) = (x.coeff(2 * i + 1), x.coeff(2 * i + 2));
            *block = [[xp, xq], [xq, xp]];
        }
        Ok(BlockDiagonal { blocks })
    }
}

/// Element of the algebra, stored sparsely by 1-based basis index.
#[derive(Clone, PartialEq)]
pub struct HyperNumber {
    dim: usize,
    coeffs: BTreeMap<usize, f64>,
}

impl fmt::Debug for HyperNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0 (dim {})", self.dim);
        }
        let mut first = true;
        for (i, v) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{v}·e{i}")?;
            first = false;
        }
        write!(f, " (dim {})", self.dim)
    }
}

type BlockPair = [Option<(usize, f64)>; 2];

impl HyperNumber {
    pub fn zero(dim: usize) -> Self {
        Self { dim, coeffs: BTreeMap::new() }
    }

    /// `c · e_index`.
    pub fn single(dim: usize, index: usize, c: f64) -> Result<Self, AlgebraError> {
        Self::from_coeffs(dim, [(index, c)])
    }

    /// Builds a number from `(basis index, coefficient)` pairs. Repeated
    /// indices accumulate; zeros are not stored.
    pub fn from_coeffs<I>(dim: usize, coeffs: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut map = BTreeMap::new();
        for (index, c) in coeffs {
            if !(1..=dim).contains(&index) {
                return Err(AlgebraError::IndexOutOfRange { index, dim });
            }
            if !c.is_finite() {
                return Err(AlgebraError::NonFinite { index });
            }
            *map.entry(index).or_insert(0.0) += c;
        }
        map.retain(|_, v: &mut f64| *v != 0.0);
        Ok(Self { dim, coeffs: map })
    }

    pub fn from_dense(coeffs: &[f64]) -> Result<Self, AlgebraError> {
        Self::from_coeffs(coeffs.len(), coeffs.iter().enumerate().map(|(i, &c)| (i + 1, c)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeff(&self, index: usize) -> f64 {
        self.coeffs.get(&index).copied().unwrap_or(0.0)
    }

    /// Nonzero coefficients in ascending basis order.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs.iter().map(|(&i, &c)| (i, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (&i, &c) in &self.coeffs {
            out[i - 1] = c;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.dim != other.dim {
            return Err(AlgebraError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let mut coeffs = self.coeffs.clone();
        for (&i, &c) in &other.coeffs {
            *coeffs.entry(i).or_insert(0.0) += c;
        }
        coeffs.retain(|_, v| *v != 0.0);
        Ok(Self { dim: self.dim, coeffs })
    }

    pub fn scale(&self, c: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&i, &v)| (i, c * v))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        Self { dim: self.dim, coeffs }
    }

    fn block(&self, block: usize) -> Option<BlockPair> {
        let p = 2 * block - 1;
        let mut pair = [None, None];
        for (&i, &c) in self.coeffs.range(p..=p + 1) {
            pair[i - p] = Some((i, c));
        }
        pair.iter().any(Option::is_some).then_some(pair)
    }

    /// Nonzero blocks in ascending order with their `(e_p, e_q)` entries.
    fn blocks(&self) -> impl Iterator<Item = (usize, BlockPair)> + '_ {
        let mut iter = self.coeffs.iter().peekable();
        std::iter::from_fn(move || {
            let (&i, &c) = iter.next()?;
            let block = block_of(i);
            let mut pair: BlockPair = [None, None];
            pair[(i + 1) % 2] = Some((i, c));
            if let Some(&(&j, &d)) = iter.peek() {
                if block_of(j) == block {
                    pair[1] = Some((j, d));
                    iter.next();
                }
            }
            Some((block, pair))
        })
    }
}

/// Additive evaluation: `+1` on odd basis elements, `-1` on even ones.
pub fn est(x: &HyperNumber) -> f64 {
    x.nonzeros().map(|(i, c)| if i % 2 == 1 { c } else { -c }).sum()
}

/// Per-term differences `x_p - x_q`, one per block.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedProjection {
    pub values: Vec<f64>,
}

impl SignedProjection {
    pub fn dot(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }
}

pub fn signed_projection(x: &HyperNumber) -> SignedProjection {
    let mut values = vec![0.0; x.dim / 2];
    for (i, c) in x.nonzeros() {
        let slot = &mut values[block_of(i) - 1];
        if i % 2 == 1 {
            *slot += c;
        } else {
            *slot -= c;
        }
    }
    SignedProjection { values }
}

/// Block-diagonal real matrix made of N 2×2 blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonal {
    pub blocks: Vec<[[f64; 2]; 2]>,
}

impl BlockDiagonal {
    pub fn matmul(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.blocks.len() != other.blocks.len() {
            return Err(AlgebraError::DimensionMismatch {
                left: 2 * self.blocks.len(),
                right: 2 * other.blocks.len(),
            });
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(l, r)| {
                let mut out = [[0.0; 2]; 2];
                for (i, row) in out.iter_mut().enumerate() {
                    for (j, cell) in row.iter_mut().enumerate() {
                        *cell = l[i][0] * r[0][j] + l[i][1] * r[1][j];
                    }
                }
                out
            })
            .collect();
        Ok(Self { blocks })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(l, r)| (0..4).map(move |k| (l[k / 2][k % 2] - r[k / 2][k % 2]).abs()))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hn(coeffs: &[f64]) -> HyperNumber {
        HyperNumber::from_dense(coeffs).unwrap()
    }

    /// Block rule written out independently of `entry`.
    fn brute_entry(a: usize, b: usize) -> Entry {
        let (ba, bb) = (a.div_ceil(2), b.div_ceil(2));
        if ba != bb {
            return Entry::Zero;
        }
        let odd_a = a % 2 == 1;
        let odd_b = b % 2 == 1;
        Entry::Basis(if odd_a == odd_b { 2 * ba - 1 } else { 2 * ba })
    }

    #[test]
    fn table_two_terms() {
        let t = MultiplicationTable::new(2).unwrap();
        assert_eq!(t.entry(1, 2), Entry::Basis(2));
        assert_eq!(t.entry(2, 2), Entry::Basis(1));
        assert_eq!(t.entry(2, 3), Entry::Zero);
        assert_eq!(t.entry(3, 4), Entry::Basis(4));
    }

    #[test]
    fn table_one_term() {
        let t = MultiplicationTable::new(1).unwrap();
        assert_eq!(t.entry(1, 1), Entry::Basis(1));
        assert_eq!(t.entry(1, 2), Entry::Basis(2));
        assert_eq!(t.entry(2, 2), Entry::Basis(1));
    }

    #[test]
    fn table_three_terms_matches_block_formula() {
        let t = MultiplicationTable::new(3).unwrap();
        assert_eq!(t.entry(5, 6), Entry::Basis(6));
        assert_eq!(t.entry(6, 6), Entry::Basis(5));
        assert_eq!(t.entry(1, 6), Entry::Zero);
        for a in 1..=6 {
            for b in 1..=6 {
                assert_eq!(t.entry(a, b), brute_entry(a, b), "e{a}·e{b}");
                assert_eq!(t.entry(a, b), t.entry(b, a));
            }
        }
    }

    #[test]
    fn table_rejects_bad_sizes() {
        assert_eq!(MultiplicationTable::new(0), Err(AlgebraError::NoTerms));
        assert_eq!(
            MultiplicationTable::new(MAX_TERMS + 1),
            Err(AlgebraError::TooManyTerms(MAX_TERMS + 1))
        );
        assert!(MultiplicationTable::new(MAX_TERMS).is_ok());
        assert!(MultiplicationTable::for_dim(3).is_err());
    }

    #[test]
    fn mul_examples() {
        let t = MultiplicationTable::new(1).unwrap();
        let q = hn(&[0.5, 0.5]);
        assert_eq!(t.mul(&q, &hn(&[1.0, 0.0])).unwrap(), q);
        assert_eq!(t.mul(&hn(&[0.0, 1.0]), &hn(&[0.0, 1.0])).unwrap(), hn(&[1.0, 0.0]));
    }

    #[test]
    fn mul_rejects_mismatched_dims() {
        let t = MultiplicationTable::new(1).unwrap();
        let err = t.mul(&hn(&[1.0, 0.0]), &hn(&[1.0, 0.0, 0.0, 0.0])).unwrap_err();
        assert_eq!(err, AlgebraError::DimensionMismatch { left: 2, right: 4 });
    }

    #[test]
    fn add_and_scale() {
        assert_eq!(hn(&[1.0, 0.0]).add(&hn(&[0.0, 1.0])).unwrap(), hn(&[1.0, 1.0]));
        assert!(hn(&[0.3, -0.7]).scale(0.0).is_zero());
        assert_eq!(hn(&[0.5, 0.0]).scale(2.0), hn(&[1.0, 0.0]));
        assert!(hn(&[1.0, 0.0]).add(&HyperNumber::zero(4)).is_err());
    }

    #[test]
    fn unit_element() {
        assert_eq!(MultiplicationTable::new(1).unwrap().unit(), hn(&[1.0, 0.0]));
        assert_eq!(
            MultiplicationTable::new(3).unwrap().unit(),
            hn(&[1.0, 0.0, 1.0, 0.0, 1.0, 0.0])
        );
    }

    #[test]
    fn est_examples() {
        assert_eq!(est(&hn(&[1.0, 0.0])), 1.0);
        assert_eq!(est(&hn(&[0.0, 1.0])), -1.0);
        assert_eq!(est(&HyperNumber::zero(6)), 0.0);
    }

    #[test]
    fn sim_worked_cases() {
        let t = MultiplicationTable::new(1).unwrap();
        let half = hn(&[0.5, 0.5]);
        assert_eq!(t.sim(&half, &hn(&[1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(t.sim(&half, &half).unwrap(), 0.0);
        let s = t.sim(&hn(&[1.0, 0.0]), &hn(&[0.8, 0.2])).unwrap();
        assert!((s - 0.6).abs() < 1e-12);
        // e2·e1 = e2, Est(e2) = -1
        assert_eq!(t.sim(&hn(&[0.0, 1.0]), &hn(&[1.0, 0.0])).unwrap(), -1.0);
    }

    #[test]
    fn sim1_examples() {
        let t = MultiplicationTable::new(1).unwrap();
        let a = hn(&[0.3, 0.9]);
        assert_eq!(t.sim1(&a, &a).unwrap(), 0.0);
        assert_eq!(t.sim1(&hn(&[1.0, 0.0]), &hn(&[0.0, 1.0])).unwrap(), 1.0);
        let zero = HyperNumber::zero(2);
        assert_eq!(t.sim1(&zero, &hn(&[1.0, 1.0])).unwrap(), 1.0);
    }

    #[test]
    fn signed_projection_examples() {
        assert_eq!(signed_projection(&hn(&[0.5, 0.5])).values, vec![0.0]);
        let p = signed_projection(&hn(&[0.8, 0.2])).values;
        assert!((p[0] - 0.6).abs() < 1e-15);
        assert_eq!(signed_projection(&hn(&[0.0, 0.0, 1.0, 0.0])).values, vec![0.0, 1.0]);
    }

    #[test]
    fn matrix_rep_examples() {
        let t = MultiplicationTable::new(1).unwrap();
        let id = t.matrix_rep(&hn(&[1.0, 0.0])).unwrap();
        assert_eq!(id.blocks, vec![[[1.0, 0.0], [0.0, 1.0]]]);
        let swap = t.matrix_rep(&hn(&[0.0, 1.0])).unwrap();
        assert_eq!(swap.blocks, vec![[[0.0, 1.0], [1.0, 0.0]]]);
        assert_eq!(swap.matmul(&swap).unwrap(), id);
    }

    #[test]
    fn rejects_non_finite_and_out_of_range() {
        assert_eq!(
            HyperNumber::from_dense(&[f64::NAN, 0.0]),
            Err(AlgebraError::NonFinite { index: 1 })
        );
        assert_eq!(
            HyperNumber::single(2, 3, 1.0),
            Err(AlgebraError::IndexOutOfRange { index: 3, dim: 2 })
        );
    }

    #[test]
    fn sparse_storage_drops_zeros() {
        let x = hn(&[0.0, 0.0, 2.0, 0.0]);
        assert_eq!(x.nonzeros().collect::<Vec<_>>(), vec![(3, 2.0)]);
        assert_eq!(x.to_dense(), vec![0.0, 0.0, 2.0, 0.0]);
    }
}
