//! Binary linear algebra: packed bit vectors, sparse and dense GF(2)
//! matrices, rank, a systematic encoder pinned to the information positions
//! of a lifted code, and completion of partially known codewords.
//!
//! Encoding uses a dense inverse of the parity part of `H` computed once by
//! Gauss-Jordan elimination. At the block lengths simulated here (a few
//! thousand bits) this is cheap, and it produces exactly the same codewords as
//! a linear-time QC encoder would.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::lifting::LiftedCode;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("parity-check matrix has rank {rank} < {rows} rows")]
    RankDeficient { rank: usize, rows: usize },
    #[error("parity columns do not form an invertible submatrix")]
    InfoSetNotDetermining,
    #[error("known positions do not determine the codeword")]
    NotDetermining,
    #[error("known values are not consistent with any codeword")]
    Inconsistent,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

type Result<T> = std::result::Result<T, Gf2Error>;

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// Packed vector over GF(2).
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    /// From 0/1 values; any nonzero byte counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        bits.iter().map(|&b| b != 0).collect()
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self {
            words: (0..words_for(len)).map(|_| rng.random()).collect(),
            len,
        };
        v.clear_tail();
        v
    }

    fn clear_tail(&mut self) {
        let used = self.len % WORD;
        if used != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    /// Gathers the bits at `positions` into a new vector.
    pub fn select(&self, positions: &[usize]) -> BitVector {
        positions.iter().map(|&p| self.get(p)).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl FromIterator<bool> for BitVector {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut v = BitVector::zeros(0);
        for bit in iter {
            if v.len % WORD == 0 {
                v.words.push(0);
            }
            v.len += 1;
            if bit {
                v.set(v.len - 1, true);
            }
        }
        v
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "BitVector({s})")
    }
}

/// Sparse binary matrix stored both by rows (CSR) and by columns.
///
/// Nonzeros are numbered in row-major order; these numbers double as the edge
/// indices of the Tanner graph used by the decoders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    col_ptr: Vec<usize>,
    /// Edge indices of each column, in increasing row order.
    col_edges: Vec<u32>,
    edge_row: Vec<u32>,
}

impl SparseMatrix {
    /// Builds a matrix from the column indices of each row. Indices are sorted;
    /// repeated indices within a row are rejected.
    pub fn from_rows(cols: usize, mut row_lists: Vec<Vec<usize>>) -> Self {
        let rows = row_lists.len();
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut edge_row = Vec::new();
        row_ptr.push(0);
        for (i, list) in row_lists.iter_mut().enumerate() {
            list.sort_unstable();
            assert!(
                list.windows(2).all(|w| w[0] != w[1]),
                "duplicate entry in row {i}"
            );
            assert!(list.last().is_none_or(|&c| c < cols), "column out of range");
            col_idx.extend(list.iter().map(|&c| c as u32));
            edge_row.extend(std::iter::repeat_n(i as u32, list.len()));
            row_ptr.push(col_idx.len());
        }
        let mut counts = vec![0usize; cols + 1];
        for &c in &col_idx {
            counts[c as usize + 1] += 1;
        }
        for j in 0..cols {
            counts[j + 1] += counts[j];
        }
        let col_ptr = counts.clone();
        let mut fill = counts;
        let mut col_edges = vec![0u32; col_idx.len()];
        for (e, &c) in col_idx.iter().enumerate() {
            col_edges[fill[c as usize]] = e as u32;
            fill[c as usize] += 1;
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            col_ptr,
            col_edges,
            edge_row,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Column indices of row `i`.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Edge index range of row `i`.
    pub fn row_edges(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// Edge indices of column `j`.
    pub fn col_edges(&self, j: usize) -> &[u32] {
        &self.col_edges[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    pub fn edge_col(&self, e: usize) -> usize {
        self.col_idx[e] as usize
    }

    pub fn edge_row(&self, e: usize) -> usize {
        self.edge_row[e] as usize
    }

    /// Row indices of column `j`.
    pub fn col_rows(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.col_edges(j).iter().map(|&e| self.edge_row[e as usize] as usize)
    }

    pub fn row_weight(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn col_weight(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&(j as u32)).is_ok()
    }

    /// `H x` over GF(2).
    pub fn mul_vec(&self, x: &BitVector) -> Result<BitVector> {
        if x.len() != self.cols {
            return Err(Gf2Error::LengthMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().fold(false, |acc, &c| acc ^ x.get(c as usize)))
            .collect())
    }

    /// Keeps the given columns (in the given order) and the rows whose support
    /// lies entirely inside them.
    pub fn restrict_to_columns(&self, columns: &[usize]) -> (SparseMatrix, Vec<usize>) {
        let mut new_index = vec![usize::MAX; self.cols];
        for (k, &c) in columns.iter().enumerate() {
            new_index[c] = k;
        }
        let mut kept_rows = Vec::new();
        let mut lists = Vec::new();
        for i in 0..self.rows {
            let row = self.row(i);
            if row.iter().all(|&c| new_index[c as usize] != usize::MAX) {
                kept_rows.push(i);
                lists.push(row.iter().map(|&c| new_index[c as usize]).collect());
            }
        }
        (SparseMatrix::from_rows(columns.len(), lists), kept_rows)
    }

    pub fn to_dense(&self) -> DenseBitMatrix {
        let mut d = DenseBitMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for &c in self.row(i) {
                d.set(i, c as usize, true);
            }
        }
        d
    }

    pub fn rank(&self) -> usize {
        self.to_dense().rank()
    }
}

/// Row-major packed dense matrix over GF(2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseBitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl DenseBitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix");
            for (j, &b) in r.iter().enumerate() {
                m.set(i, j, b != 0);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.data[i * self.stride + j / WORD] >> (j % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        let w = &mut self.data[i * self.stride + j / WORD];
        let mask = 1u64 << (j % WORD);
        if bit {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row(&self, i: usize) -> BitVector {
        let mut v = BitVector::zeros(self.cols);
        v.words.copy_from_slice(self.row_words(i));
        v
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * self.stride);
        head[lo * self.stride..(lo + 1) * self.stride].swap_with_slice(&mut tail[..self.stride]);
    }

    /// `row[dst] ^= row[src]`, touching words from `from_word` on.
    fn xor_row_into(&mut self, src: usize, dst: usize, from_word: usize) {
        debug_assert_ne!(src, dst);
        let s = self.stride;
        let (src_off, dst_off) = (src * s, dst * s);
        for w in from_word..s {
            let v = self.data[src_off + w];
            self.data[dst_off + w] ^= v;
        }
    }

    pub fn add_row(&mut self, src: usize, dst: usize) {
        self.xor_row_into(src, dst, 0);
    }

    /// Reduces to reduced row-echelon form, trying pivot columns in the order
    /// given. Returns the pivot column of each leading row; rows past
    /// `pivots.len()` have zeros in every listed column.
    pub fn reduce(&mut self, pivot_order: &[usize]) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for &col in pivot_order {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&r| self.get(r, col)) else {
                continue;
            };
            self.swap_rows(p, next);
            for r in 0..self.rows {
                if r != next && self.get(r, col) {
                    self.xor_row_into(next, r, 0);
                }
            }
            pivots.push(col);
            next += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let order: Vec<usize> = (0..self.cols).collect();
        self.clone().reduce(&order).len()
    }

    pub fn mul_vec(&self, x: &BitVector) -> BitVector {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row_words(i)
                    .iter()
                    .zip(x.words())
                    .map(|(a, b)| (a & b).count_ones())
                    .sum::<u32>()
                    & 1
                    == 1
            })
            .collect()
    }
}

/// GF(2) rank of a sparse matrix.
pub fn rank(h: &SparseMatrix) -> usize {
    h.rank()
}

/// Builds the dense matrix `[H_a | H_b]` from two column selections of `h`.
fn split_dense(h: &SparseMatrix, left: &[usize], right: &[usize]) -> DenseBitMatrix {
    let mut pos = vec![usize::MAX; h.cols()];
    for (k, &c) in left.iter().chain(right).enumerate() {
        pos[c] = k;
    }
    let mut d = DenseBitMatrix::zeros(h.rows(), left.len() + right.len());
    for i in 0..h.rows() {
        for &c in h.row(i) {
            let k = pos[c as usize];
            if k != usize::MAX {
                d.set(i, k, true);
            }
        }
    }
    d
}

/// Systematic encoder pinned to the code's information positions.
///
/// The payload is copied unchanged to the payload positions and the
/// remaining bits are solved from `H x = 0`. For most codes the payload
/// positions are exactly the information positions. When the protograph
/// forces linear relations among the information bits (for instance parity
/// cells of even multiplicity, which vanish modulo `x - 1`), a few
/// information bits become *dependent*: they stay in their information
/// columns but are computed from the payload. Parity positions left free by
/// redundant checks are fixed at zero.
#[derive(Clone, Debug)]
pub struct Encoder {
    n: usize,
    info_positions: Vec<usize>,
    payload_positions: Vec<usize>,
    fixed_zero: Vec<usize>,
    solved_positions: Vec<usize>,
    /// `x[solved_positions[r]] = solved_forms[r] . payload`
    solved_forms: Vec<BitVector>,
    redundant_checks: usize,
}

/// Precomputes the encoder of `code`. Column swaps across positions are
/// never attempted: moving an information bit would move it to another
/// fading block.
pub fn build_encoder(code: &LiftedCode) -> Result<Encoder> {
    encoder_from(code, false)
}

/// Like [`build_encoder`] but insists on a full-rank `H` whose parity part is
/// invertible, so that every information position carries a payload bit.
pub fn build_encoder_strict(code: &LiftedCode) -> Result<Encoder> {
    encoder_from(code, true)
}

fn encoder_from(code: &LiftedCode, strict: bool) -> Result<Encoder> {
    let h = code.h();
    let n = h.cols();
    let rows = h.rows();
    let info = code.info_positions().to_vec();
    let mut is_info = vec![false; n];
    for &p in &info {
        is_info[p] = true;
    }
    let parity: Vec<usize> = (0..n).filter(|&j| !is_info[j]).collect();
    // Parity columns are tried first; the last information columns are the
    // first to become dependent if some must.
    let order: Vec<usize> = parity.iter().chain(info.iter().rev()).copied().collect();
    let mut d = split_dense(h, &order, &[]);
    let pivot_idx: Vec<usize> = (0..n).collect();
    let pivots = d.reduce(&pivot_idx);
    let pivot_pos: Vec<usize> = pivots.iter().map(|&c| order[c]).collect();
    let mut is_pivot = vec![false; n];
    for &p in &pivot_pos {
        is_pivot[p] = true;
    }
    let dependent = pivot_pos.iter().filter(|&&p| is_info[p]).count();
    if strict && (pivots.len() < rows || dependent > 0) {
        return Err(if pivots.len() < rows {
            Gf2Error::RankDeficient {
                rank: pivots.len(),
                rows,
            }
        } else {
            Gf2Error::InfoSetNotDetermining
        });
    }
    let payload_positions: Vec<usize> = info.iter().copied().filter(|&p| !is_pivot[p]).collect();
    let fixed_zero: Vec<usize> = parity.iter().copied().filter(|&p| !is_pivot[p]).collect();
    let mut payload_index = vec![usize::MAX; n];
    for (t, &p) in payload_positions.iter().enumerate() {
        payload_index[p] = t;
    }
    let mut col_of_pos = vec![0; n];
    for (c, &p) in order.iter().enumerate() {
        col_of_pos[p] = c;
    }
    let solved_forms = (0..pivots.len())
        .map(|t| {
            payload_positions
                .iter()
                .map(|&p| d.get(t, col_of_pos[p]))
                .collect()
        })
        .collect();
    Ok(Encoder {
        n,
        info_positions: info,
        payload_positions,
        fixed_zero,
        solved_positions: pivot_pos,
        solved_forms,
        redundant_checks: rows - pivots.len(),
    })
}

impl Encoder {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Payload length.
    pub fn k(&self) -> usize {
        self.payload_positions.len()
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Positions that carry the payload unchanged, a subset of the
    /// information positions.
    pub fn payload_positions(&self) -> &[usize] {
        &self.payload_positions
    }

    /// Information bits computed from the payload.
    pub fn dependent_info_bits(&self) -> usize {
        self.info_positions.len() - self.payload_positions.len()
    }

    /// Parity positions that every encoder output holds at zero.
    pub fn fixed_zero_positions(&self) -> &[usize] {
        &self.fixed_zero
    }

    /// Number of linearly dependent rows of `H`.
    pub fn redundant_checks(&self) -> usize {
        self.redundant_checks
    }

    pub fn encode(&self, payload: &BitVector) -> Result<BitVector> {
        if payload.len() != self.k() {
            return Err(Gf2Error::LengthMismatch {
                expected: self.k(),
                got: payload.len(),
            });
        }
        let mut x = BitVector::zeros(self.n);
        for (t, &p) in self.payload_positions.iter().enumerate() {
            if payload.get(t) {
                x.set(p, true);
            }
        }
        for (form, &p) in self.solved_forms.iter().zip(&self.solved_positions) {
            if form.dot(payload) {
                x.set(p, true);
            }
        }
        Ok(x)
    }
}

/// Free-function form of [`Encoder::encode`].
pub fn encode(enc: &Encoder, info: &BitVector) -> Result<BitVector> {
    enc.encode(info)
}

/// `H x` over GF(2).
pub fn syndrome(code: &LiftedCode, x: &BitVector) -> Result<BitVector> {
    code.h().mul_vec(x)
}

/// Precomputed solver that rebuilds a codeword from a fixed set of known
/// positions, e.g. a relay deriving the later frames from the first one.
#[derive(Clone, Debug)]
pub struct Completer {
    n: usize,
    known: Vec<usize>,
    unknown: Vec<usize>,
    /// `x[unknown[r]] = solve[r] . x_known`
    solve: Vec<BitVector>,
    /// Every codeword satisfies `check[r] . x_known = 0`.
    check: Vec<BitVector>,
}

impl Completer {
    pub fn new(h: &SparseMatrix, known_positions: &[usize]) -> Result<Self> {
        let n = h.cols();
        let mut is_known = vec![false; n];
        for &p in known_positions {
            assert!(p < n, "position {p} out of range");
            is_known[p] = true;
        }
        let unknown: Vec<usize> = (0..n).filter(|&j| !is_known[j]).collect();
        let mut d = split_dense(h, &unknown, known_positions);
        let order: Vec<usize> = (0..unknown.len()).collect();
        let pivots = d.reduce(&order);
        if pivots.len() < unknown.len() {
            return Err(Gf2Error::NotDetermining);
        }
        let off = unknown.len();
        let form = |r: usize| -> BitVector {
            (0..known_positions.len()).map(|t| d.get(r, off + t)).collect()
        };
        let solve = (0..unknown.len()).map(form).collect();
        let check = (unknown.len()..h.rows())
            .map(form)
            .filter(|v: &BitVector| !v.is_zero())
            .collect();
        Ok(Self {
            n,
            known: known_positions.to_vec(),
            unknown,
            solve,
            check,
        })
    }

    pub fn known_positions(&self) -> &[usize] {
        &self.known
    }

    /// `known_values[t]` is the bit at `known_positions()[t]`.
    pub fn complete(&self, known_values: &BitVector) -> Result<BitVector> {
        if known_values.len() != self.known.len() {
            return Err(Gf2Error::LengthMismatch {
                expected: self.known.len(),
                got: known_values.len(),
            });
        }
        if self.check.iter().any(|c| c.dot(known_values)) {
            return Err(Gf2Error::Inconsistent);
        }
        Ok(self.complete_unchecked(known_values))
    }

    /// Solves for the unknown bits without testing consistency. On
    /// inconsistent input the result agrees with `known_values` but is not a
    /// codeword.
    pub fn complete_unchecked(&self, known_values: &BitVector) -> BitVector {
        assert_eq!(known_values.len(), self.known.len());
        let mut x = BitVector::zeros(self.n);
        for (t, &p) in self.known.iter().enumerate() {
            if known_values.get(t) {
                x.set(p, true);
            }
        }
        for (form, &p) in self.solve.iter().zip(&self.unknown) {
            if form.dot(known_values) {
                x.set(p, true);
            }
        }
        x
    }
}

/// Returns the unique codeword of `code` that agrees with `known_values` on
/// `known_positions`.
pub fn complete_codeword(
    code: &LiftedCode,
    known_positions: &[usize],
    known_values: &BitVector,
) -> Result<BitVector> {
    Completer::new(code.h(), known_positions)?.complete(known_values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bitvector_basics() {
        let v = BitVector::from_bits(&[1, 0, 1, 1]);
        assert_eq!(v.len(), 4);
        assert_eq!(v.count_ones(), 3);
        assert_eq!(v.to_bits(), vec![1, 0, 1, 1]);
        assert!(v.dot(&BitVector::from_bits(&[1, 1, 1, 0])) == false);
        let mut w = v.clone();
        w.xor_assign(&v);
        assert!(w.is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = BitVector::random(130, &mut rng);
        assert_eq!(r.len(), 130);
        assert_eq!(r.iter().filter(|&b| b).count(), r.count_ones());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(DenseBitMatrix::identity(4).rank(), 4);
        let m = DenseBitMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 1, 0]]);
        assert_eq!(m.rank(), 2);
        let m = DenseBitMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        assert_eq!(DenseBitMatrix::zeros(3, 5).rank(), 0);
    }

    #[test]
    fn sparse_structure() {
        let h = SparseMatrix::from_rows(4, vec![vec![2, 0], vec![1, 2, 3]]);
        assert_eq!(h.row(0), &[0, 2]);
        assert_eq!(h.col_weight(2), 2);
        assert_eq!(h.col_rows(2).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(h.edge_col(3), 2);
        assert_eq!(h.edge_row(3), 1);
        let s = h.mul_vec(&BitVector::from_bits(&[0, 0, 1, 0])).unwrap();
        assert_eq!(s.to_bits(), vec![1, 1]);
        assert!(h.mul_vec(&BitVector::zeros(3)).is_err());
        let (sub, rows) = h.restrict_to_columns(&[0, 2]);
        assert_eq!(rows, vec![0]);
        assert_eq!(sub.row(0), &[0, 1]);
    }

    fn random_dense(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseBitMatrix {
        let mut m = DenseBitMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, rng.random_bool(0.3));
            }
        }
        m
    }

    proptest! {
        #[test]
        fn rank_invariant_under_row_ops(seed in any::<u64>(), rows in 1usize..20, cols in 1usize..90) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_dense(rows, cols, &mut rng);
            let r = m.rank();
            prop_assert!(r <= rows.min(cols));
            let mut p = m.clone();
            for _ in 0..10 {
                let a = rng.random_range(0..rows);
                let b = rng.random_range(0..rows);
                if a != b {
                    if rng.random_bool(0.5) { p.swap_rows(a, b) } else { p.add_row(a, b) }
                }
            }
            prop_assert_eq!(p.rank(), r);
            // Duplicating a row leaves the rank unchanged.
            let mut rows_v: Vec<Vec<u8>> = (0..rows).map(|i| m.row(i).to_bits()).collect();
            rows_v.push(rows_v[0].clone());
            prop_assert_eq!(DenseBitMatrix::from_rows(&rows_v).rank(), r);
        }
    }
}
