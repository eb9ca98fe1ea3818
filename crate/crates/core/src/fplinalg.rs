//! Dense linear algebra over the prime fields F_p, p < 256.
//!
//! Vectors and matrices over F_2 pack 64 entries per machine word and combine
//! rows with word-wide XOR; odd primes store one entry per byte with a
//! multiply-accumulate in 16 bits before reduction. `new` selects the packed
//! path for p = 2; `new_generic` forces the byte path so the two kernels can
//! be checked against each other. Pivoting is deterministic: elimination
//! always takes the leftmost nonzero column and the topmost available row.

use std::collections::BTreeMap;

use rand::Rng;

/// Multiplicative inverse mod p (p prime, a nonzero).
pub fn fp_inv(a: u8, p: u16) -> u8 {
    debug_assert!(a != 0 && (a as u16) < p);
    let (mut t, mut new_t) = (0i32, 1i32);
    let (mut r, mut new_r) = (p as i32, a as i32);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1);
    t.rem_euclid(p as i32) as u8
}

#[derive(Clone, Debug)]
enum VecData {
    Bits(Vec<u64>),
    Bytes(Vec<u8>),
}

/// A vector over F_p with storage chosen by the prime (packed bits for p = 2).
#[derive(Clone, Debug)]
pub struct FpVec {
    p: u16,
    len: usize,
    data: VecData,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl FpVec {
    pub fn zero(p: u16, len: usize) -> Self {
        let data = if p == 2 {
            VecData::Bits(vec![0u64; words_for(len)])
        } else {
            VecData::Bytes(vec![0u8; len])
        };
        Self { p, len, data }
    }

    /// Byte storage regardless of the prime.
    pub fn zero_generic(p: u16, len: usize) -> Self {
        Self { p, len, data: VecData::Bytes(vec![0u8; len]) }
    }

    pub fn p(&self) -> u16 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_packed(&self) -> bool {
        matches!(self.data, VecData::Bits(_))
    }

    pub fn get(&self, i: usize) -> u8 {
        debug_assert!(i < self.len);
        match &self.data {
            VecData::Bits(w) => ((w[i >> 6] >> (i & 63)) & 1) as u8,
            VecData::Bytes(b) => b[i],
        }
    }

    pub fn set(&mut self, i: usize, v: u8) {
        debug_assert!(i < self.len);
        let v = (v as u16 % self.p) as u8;
        match &mut self.data {
            VecData::Bits(w) => {
                let mask = 1u64 << (i & 63);
                if v == 0 {
                    w[i >> 6] &= !mask;
                } else {
                    w[i >> 6] |= mask;
                }
            }
            VecData::Bytes(b) => b[i] = v,
        }
    }

    pub fn add_assign_entry(&mut self, i: usize, v: u8) {
        let cur = self.get(i) as u16;
        self.set(i, ((cur + v as u16) % self.p) as u8);
    }

    pub fn is_zero(&self) -> bool {
        match &self.data {
            VecData::Bits(w) => w.iter().all(|&x| x == 0),
            VecData::Bytes(b) => b.iter().all(|&x| x == 0),
        }
    }

    pub fn first_nonzero(&self) -> Option<(usize, u8)> {
        match &self.data {
            VecData::Bits(w) => {
                for (wi, &word) in w.iter().enumerate() {
                    if word != 0 {
                        let i = (wi << 6) + word.trailing_zeros() as usize;
                        return Some((i, 1));
                    }
                }
                None
            }
            VecData::Bytes(b) => b.iter().position(|&x| x != 0).map(|i| (i, b[i])),
        }
    }

    /// `self += c * other` in F_p. Both vectors must share prime, length, and
    /// storage kind.
    pub fn add_scaled(&mut self, other: &FpVec, c: u8) {
        assert_eq!(self.p, other.p, "prime mismatch");
        assert_eq!(self.len, other.len, "length mismatch");
        let c = (c as u16 % self.p) as u8;
        if c == 0 {
            return;
        }
        match (&mut self.data, &other.data) {
            (VecData::Bits(a), VecData::Bits(b)) => {
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x ^= *y;
                }
            }
            (VecData::Bytes(a), VecData::Bytes(b)) => {
                let p = self.p;
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x = ((*x as u16 + c as u16 * *y as u16) % p) as u8;
                }
            }
            _ => panic!("storage kind mismatch"),
        }
    }

    pub fn scale(&mut self, c: u8) {
        let c = (c as u16 % self.p) as u8;
        match &mut self.data {
            VecData::Bits(w) => {
                if c == 0 {
                    w.fill(0);
                }
            }
            VecData::Bytes(b) => {
                let p = self.p;
                for x in b.iter_mut() {
                    *x = ((*x as u16 * c as u16) % p) as u8;
                }
            }
        }
    }

    pub fn nonzero_entries(&self) -> Vec<(usize, u8)> {
        match &self.data {
            VecData::Bits(w) => {
                let mut out = Vec::new();
                for (wi, &word) in w.iter().enumerate() {
                    let mut bits = word;
                    while bits != 0 {
                        let b = bits.trailing_zeros() as usize;
                        out.push(((wi << 6) + b, 1));
                        bits &= bits - 1;
                    }
                }
                out
            }
            VecData::Bytes(b) => b
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(i, &x)| (i, x))
                .collect(),
        }
    }

    /// Canonical bytes for hashing; consistent within one storage kind.
    pub fn to_bytes_key(&self) -> Vec<u8> {
        match &self.data {
            VecData::Bits(w) => {
                let mut out = Vec::with_capacity(w.len() * 8);
                for &word in w {
                    out.extend_from_slice(&word.to_le_bytes());
                }
                out
            }
            VecData::Bytes(b) => b.clone(),
        }
    }

    pub fn to_generic(&self) -> FpVec {
        let mut v = FpVec::zero_generic(self.p, self.len);
        for (i, c) in self.nonzero_entries() {
            v.set(i, c);
        }
        v
    }

    pub fn to_packed(&self) -> FpVec {
        assert_eq!(self.p, 2, "packed storage is for p = 2");
        let mut v = FpVec::zero(2, self.len);
        for (i, c) in self.nonzero_entries() {
            v.set(i, c);
        }
        v
    }

    pub fn random<R: Rng>(p: u16, len: usize, rng: &mut R) -> Self {
        let mut v = FpVec::zero(p, len);
        for i in 0..len {
            v.set(i, rng.gen_range(0..p) as u8);
        }
        v
    }
}

impl PartialEq for FpVec {
    fn eq(&self, other: &Self) -> bool {
        if self.p != other.p || self.len != other.len {
            return false;
        }
        match (&self.data, &other.data) {
            (VecData::Bits(a), VecData::Bits(b)) => a == b,
            (VecData::Bytes(a), VecData::Bytes(b)) => a == b,
            _ => (0..self.len).all(|i| self.get(i) == other.get(i)),
        }
    }
}

impl Eq for FpVec {}

/// A dense matrix over F_p stored as rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMatrix {
    p: u16,
    rows: usize,
    cols: usize,
    data: Vec<FpVec>,
}

impl FpMatrix {
    pub fn new(p: u16, rows: usize, cols: usize) -> Self {
        Self {
            p,
            rows,
            cols,
            data: (0..rows).map(|_| FpVec::zero(p, cols)).collect(),
        }
    }

    /// Byte storage regardless of the prime.
    pub fn new_generic(p: u16, rows: usize, cols: usize) -> Self {
        Self {
            p,
            rows,
            cols,
            data: (0..rows).map(|_| FpVec::zero_generic(p, cols)).collect(),
        }
    }

    pub fn from_rows(rows: Vec<FpVec>) -> Self {
        assert!(!rows.is_empty(), "from_rows needs at least one row");
        let p = rows[0].p();
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.p() == p && r.len() == cols));
        Self { p, rows: rows.len(), cols, data: rows }
    }

    pub fn identity(p: u16, n: usize) -> Self {
        let mut m = Self::new(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_dense(p: u16, rows: usize, cols: usize, entries: &[u8]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        let mut m = Self::new(p, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, entries[i * cols + j]);
            }
        }
        m
    }

    pub fn p(&self) -> u16 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.data[i].set(j, v);
    }

    pub fn add_assign_entry(&mut self, i: usize, j: usize, v: u8) {
        self.data[i].add_assign_entry(j, v);
    }

    pub fn row(&self, i: usize) -> &FpVec {
        &self.data[i]
    }

    fn eliminate(&mut self, full: bool) -> Vec<usize> {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.data[i].get(c) != 0) else {
                continue;
            };
            self.data.swap(r, pr);
            let inv = fp_inv(self.data[r].get(c), p);
            self.data[r].scale(inv);
            let piv = self.data[r].clone();
            for i in 0..self.rows {
                if i == r || (!full && i < r) {
                    continue;
                }
                let f = self.data[i].get(c);
                if f != 0 {
                    self.data[i].add_scaled(&piv, (p - f as u16) as u8);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Row rank, computed on a copy.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.eliminate(false).len()
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn echelonize(&mut self) -> Vec<usize> {
        self.eliminate(true)
    }

    /// Reduced row echelon form of a copy, with its pivot columns.
    pub fn echelon_form(&self) -> (FpMatrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.echelonize();
        (m, pivots)
    }

    /// Dimension of the right nullspace `{v : Av = 0}`.
    pub fn nullspace_dim(&self) -> usize {
        self.cols - self.rank()
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.p, other.p);
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc = if other.data.first().map(|r| r.is_packed()).unwrap_or(self.p == 2) {
                FpVec::zero(self.p, other.cols)
            } else {
                FpVec::zero_generic(self.p, other.cols)
            };
            for (k, c) in self.data[i].nonzero_entries() {
                acc.add_scaled(&other.data[k], c);
            }
            out.push(acc);
        }
        FpMatrix { p: self.p, rows: self.rows, cols: other.cols, data: out }
    }

    /// Row vector times matrix: `v * self`, where `v` has `rows()` entries.
    pub fn vec_mul(&self, v: &FpVec) -> FpVec {
        assert_eq!(v.len(), self.rows);
        let mut acc = if self.data.first().map(|r| r.is_packed()).unwrap_or(self.p == 2) {
            FpVec::zero(self.p, self.cols)
        } else {
            FpVec::zero_generic(self.p, self.cols)
        };
        for (k, c) in v.nonzero_entries() {
            acc.add_scaled(&self.data[k], c);
        }
        acc
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut out = if self.data.first().map(|r| r.is_packed()).unwrap_or(self.p == 2) {
            FpMatrix::new(self.p, self.cols, self.rows)
        } else {
            FpMatrix::new_generic(self.p, self.cols, self.rows)
        };
        for i in 0..self.rows {
            for (j, c) in self.data[i].nonzero_entries() {
                out.set(j, i, c);
            }
        }
        out
    }

    pub fn inverse(&self) -> Option<FpMatrix> {
        assert_eq!(self.rows, self.cols, "inverse needs a square matrix");
        let n = self.rows;
        let mut aug = FpMatrix::new(self.p, n, 2 * n);
        for i in 0..n {
            for (j, c) in self.data[i].nonzero_entries() {
                aug.set(i, j, c);
            }
            aug.set(i, n + i, 1);
        }
        let pivots = aug.echelonize();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut inv = FpMatrix::new(self.p, n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j));
            }
        }
        Some(inv)
    }

    pub fn delete_row(&self, i: usize) -> FpMatrix {
        let mut data = self.data.clone();
        data.remove(i);
        FpMatrix { p: self.p, rows: self.rows - 1, cols: self.cols, data }
    }

    pub fn delete_col(&self, j: usize) -> FpMatrix {
        let mut out = if self.data.first().map(|r| r.is_packed()).unwrap_or(self.p == 2) {
            FpMatrix::new(self.p, self.rows, self.cols - 1)
        } else {
            FpMatrix::new_generic(self.p, self.rows, self.cols - 1)
        };
        for i in 0..self.rows {
            for (c, v) in self.data[i].nonzero_entries() {
                if c != j {
                    out.set(i, if c < j { c } else { c - 1 }, v);
                }
            }
        }
        out
    }

    pub fn to_generic(&self) -> FpMatrix {
        FpMatrix {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|r| r.to_generic()).collect(),
        }
    }

    pub fn random<R: Rng>(p: u16, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows).map(|_| FpVec::random(p, cols, rng)).collect();
        Self { p, rows, cols, data }
    }
}

/// An incrementally maintained row space in reduced echelon form.
///
/// Optionally tracks how each echelon row decomposes over the raw inserted
/// vectors, so members of the span can be expressed in terms of the inserted
/// generating set. Insertion order is the id space for that tracking.
pub struct EchelonSpan {
    p: u16,
    dim: usize,
    rows: Vec<FpVec>,
    pivots: Vec<usize>,
    exprs: Option<Vec<Vec<(usize, u8)>>>,
    inserted: usize,
}

impl EchelonSpan {
    pub fn new(p: u16, dim: usize) -> Self {
        Self { p, dim, rows: Vec::new(), pivots: Vec::new(), exprs: None, inserted: 0 }
    }

    pub fn new_tracked(p: u16, dim: usize) -> Self {
        Self { p, dim, rows: Vec::new(), pivots: Vec::new(), exprs: Some(Vec::new()), inserted: 0 }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[FpVec] {
        &self.rows
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }

    fn reduce_collect(&self, v: &mut FpVec) -> Vec<(usize, u8)> {
        let mut used = Vec::new();
        for (r, &pc) in self.pivots.iter().enumerate() {
            let c = v.get(pc);
            if c != 0 {
                v.add_scaled(&self.rows[r], (self.p - c as u16) as u8);
                used.push((r, c));
            }
        }
        used
    }

    /// Normal form of `v` modulo the span.
    pub fn reduce(&self, v: &FpVec) -> FpVec {
        let mut v = v.clone();
        self.reduce_collect(&mut v);
        v
    }

    pub fn contains(&self, v: &FpVec) -> bool {
        self.reduce(v).is_zero()
    }

    pub fn insert(&mut self, v: FpVec) -> bool {
        self.insert_returning(v).is_some()
    }

    /// Inserts `v`; if it enlarges the span, returns the new normalized row.
    pub fn insert_returning(&mut self, v: FpVec) -> Option<FpVec> {
        assert_eq!(v.len(), self.dim);
        assert_eq!(v.p(), self.p);
        let id = self.inserted;
        self.inserted += 1;
        let mut v = v;
        let used = self.reduce_collect(&mut v);
        let (pc, pv) = v.first_nonzero()?;
        let inv = fp_inv(pv, self.p);
        v.scale(inv);
        let expr_new = self.exprs.as_ref().map(|exprs| {
            let mut acc: BTreeMap<usize, i32> = BTreeMap::new();
            acc.insert(id, inv as i32);
            for &(r, c) in &used {
                for &(jid, jc) in &exprs[r] {
                    *acc.entry(jid).or_insert(0) -= inv as i32 * c as i32 * jc as i32;
                }
            }
            normalize_expr(acc, self.p)
        });
        if let Some(exprs) = self.exprs.as_mut() {
            let expr_new = expr_new.as_ref().unwrap();
            for (r, row) in self.rows.iter_mut().enumerate() {
                let f = row.get(pc);
                if f != 0 {
                    row.add_scaled(&v, (self.p - f as u16) as u8);
                    let mut acc: BTreeMap<usize, i32> = exprs[r]
                        .iter()
                        .map(|&(jid, jc)| (jid, jc as i32))
                        .collect();
                    for &(jid, jc) in expr_new {
                        *acc.entry(jid).or_insert(0) -= f as i32 * jc as i32;
                    }
                    exprs[r] = normalize_expr(acc, self.p);
                }
            }
        } else {
            for row in self.rows.iter_mut() {
                let f = row.get(pc);
                if f != 0 {
                    row.add_scaled(&v, (self.p - f as u16) as u8);
                }
            }
        }
        let pos = self.pivots.partition_point(|&q| q < pc);
        self.rows.insert(pos, v.clone());
        self.pivots.insert(pos, pc);
        if let Some(exprs) = self.exprs.as_mut() {
            exprs.insert(pos, expr_new.unwrap());
        }
        Some(v)
    }

    /// Coefficients of `v` over the echelon rows, if `v` lies in the span.
    pub fn express(&self, v: &FpVec) -> Option<Vec<(usize, u8)>> {
        let mut w = v.clone();
        let used = self.reduce_collect(&mut w);
        if w.is_zero() {
            Some(used)
        } else {
            None
        }
    }

    /// Coefficients of `v` over the raw inserted vectors (requires tracking).
    pub fn express_inserted(&self, v: &FpVec) -> Option<Vec<(usize, u8)>> {
        let exprs = self.exprs.as_ref().expect("span was not built with tracking");
        let used = self.express(v)?;
        let mut acc: BTreeMap<usize, i32> = BTreeMap::new();
        for (r, c) in used {
            for &(jid, jc) in &exprs[r] {
                *acc.entry(jid).or_insert(0) += c as i32 * jc as i32;
            }
        }
        Some(normalize_expr(acc, self.p))
    }
}

fn normalize_expr(acc: BTreeMap<usize, i32>, p: u16) -> Vec<(usize, u8)> {
    acc.into_iter()
        .filter_map(|(id, c)| {
            let c = c.rem_euclid(p as i32) as u8;
            (c != 0).then_some((id, c))
        })
        .collect()
}
