//! Finite-dimensional algebra quotients B_k and the finite group images
//! living inside their unit groups.
//!
//! For a presentation with prime p and n generators, B_k is the span of
//! monomials of weight < k in the truncated free algebra, modulo the two-sided
//! ideal generated by the relator images `word(r) - 1` under `g -> 1 + X_g`.
//! The k-th congruence quotient of the presented group is the subgroup of
//! units generated by the generator images; its elements are enumerated by
//! breadth-first search and its order is the index of the k-th dimension
//! subgroup.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fplinalg::{EchelonSpan, FpVec};
use crate::free_series::{
    enumerate_monomials, magnus_images, magnus_word, FreeCtx, Mono, TruncPoly,
};
use crate::presentations::{GroupPresentation, GroupWord};

/// The algebra B_k: truncated free algebra modulo the relator ideal.
pub struct QuotientAlgebra {
    ctx: FreeCtx,
    k: u32,
    monomials: Vec<Mono>,
    index: HashMap<Mono, usize>,
    ideal: EchelonSpan,
    gen_images: Vec<TruncPoly>,
    gen_inv_images: Vec<TruncPoly>,
}

/// Builds B_k for the presentation, failing if the ambient monomial count
/// exceeds `max_dim`.
pub fn build_quotient(
    pres: &GroupPresentation,
    k: u32,
    max_dim: u128,
) -> Result<QuotientAlgebra> {
    if k == 0 {
        return Err(Error::Invalid("quotient level k must be at least 1".into()));
    }
    let p = pres.p;
    let names: Vec<String> = pres.generators.clone();
    let n = names.len();
    let ctx = FreeCtx::new(p, names, vec![1; n], k as u64)?;
    let monomials = enumerate_monomials(&ctx, k as u64, max_dim)?;
    let index: HashMap<Mono, usize> = monomials
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    let mut alg = QuotientAlgebra {
        ctx,
        k,
        monomials,
        index,
        ideal: EchelonSpan::new(p, 0),
        gen_images: Vec::new(),
        gen_inv_images: Vec::new(),
    };
    alg.ideal = EchelonSpan::new(p, alg.monomials.len());

    // Close the relator span into a two-sided ideal: whenever a vector
    // enlarges the span, its products with every variable on both sides are
    // queued. Each enlarging insertion adds one dimension, so this ends.
    let images = magnus_images(&alg.ctx);
    let one = TruncPoly::one(p, alg.ctx.cutoff());
    let mut work: Vec<TruncPoly> = Vec::new();
    for r in &pres.relators {
        work.push(magnus_word(r, &images)?.sub(&one));
    }
    while let Some(f) = work.pop() {
        if f.is_zero() {
            continue;
        }
        let coords = alg.to_coords(&f);
        if let Some(row) = alg.ideal.insert_returning(coords) {
            let rp = alg.to_poly(&row);
            for v in 0..n {
                let xv = TruncPoly::var(&alg.ctx, v);
                work.push(xv.mul(&rp));
                work.push(rp.mul(&xv));
            }
        }
    }

    for image in images.iter().take(n) {
        let img = alg.reduce_poly(image);
        let inv = alg.reduce_poly(&image.inv_unit()?);
        alg.gen_images.push(alg.to_poly(&img));
        alg.gen_inv_images.push(alg.to_poly(&inv));
    }
    Ok(alg)
}

impl QuotientAlgebra {
    pub fn p(&self) -> u16 {
        self.ctx.p()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn ngens(&self) -> usize {
        self.ctx.nvars()
    }

    pub fn ctx(&self) -> &FreeCtx {
        &self.ctx
    }

    /// Dimension of B_k over F_p.
    pub fn dim(&self) -> usize {
        self.monomials.len() - self.ideal.rank()
    }

    /// Dimension of the ambient truncated free algebra.
    pub fn ambient_dim(&self) -> usize {
        self.monomials.len()
    }

    pub fn monomials(&self) -> &[Mono] {
        &self.monomials
    }

    /// Coordinates of a polynomial in the ambient monomial basis.
    pub fn to_coords(&self, f: &TruncPoly) -> FpVec {
        let mut v = FpVec::zero(self.p(), self.monomials.len());
        for (m, c) in f.terms() {
            match self.index.get(m) {
                Some(&i) => v.set(i, c),
                None => debug_assert!(m.weight() >= self.k as u64),
            }
        }
        v
    }

    pub fn to_poly(&self, v: &FpVec) -> TruncPoly {
        let mut f = TruncPoly::zero(self.p(), self.ctx.cutoff());
        for (i, c) in v.nonzero_entries() {
            f.add_term(self.monomials[i].clone(), c);
        }
        f
    }

    /// Canonical form of a polynomial in B_k: coordinates reduced modulo the
    /// relator ideal. Supported only on standard (non-pivot) monomials.
    pub fn reduce_poly(&self, f: &TruncPoly) -> FpVec {
        self.ideal.reduce(&self.to_coords(f))
    }

    pub fn reduce_coords(&self, v: &FpVec) -> FpVec {
        self.ideal.reduce(v)
    }

    pub fn one(&self) -> FpVec {
        self.reduce_poly(&TruncPoly::one(self.p(), self.ctx.cutoff()))
    }

    pub fn is_ideal_member(&self, f: &TruncPoly) -> bool {
        self.reduce_poly(f).is_zero()
    }

    pub fn mul(&self, a: &FpVec, b: &FpVec) -> FpVec {
        let fa = self.to_poly(a);
        let fb = self.to_poly(b);
        self.reduce_poly(&fa.mul(&fb))
    }

    /// Right multiplication by the image of a generator or its inverse.
    pub fn mul_by_gen(&self, a: &FpVec, gen: usize, inverse: bool) -> FpVec {
        let img = if inverse { &self.gen_inv_images[gen] } else { &self.gen_images[gen] };
        self.reduce_poly(&self.to_poly(a).mul(img))
    }

    /// Image of a group word in B_k.
    pub fn word_image(&self, w: &GroupWord) -> Result<FpVec> {
        let images = magnus_images(&self.ctx);
        Ok(self.reduce_poly(&magnus_word(w, &images)?))
    }

    /// Least monomial weight in the canonical form, `None` for zero.
    pub fn min_weight(&self, v: &FpVec) -> Option<u64> {
        v.first_nonzero().map(|(i, _)| self.monomials[i].weight())
    }

    /// Dimensions of the weight-graded pieces of B_k, indexed 0..k.
    ///
    /// Weight-m piece of the associated graded algebra has dimension equal to
    /// the number of standard monomials of weight m: combinations of ideal
    /// rows have their least monomial at a pivot, so the span of monomials of
    /// weight >= m meets the ideal in exactly the rows whose pivot has weight
    /// >= m.
    pub fn graded_dims(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.monomials.len()];
        for &c in self.ideal.pivots() {
            is_pivot[c] = true;
        }
        let mut dims = vec![0usize; self.k as usize];
        for (i, m) in self.monomials.iter().enumerate() {
            if !is_pivot[i] {
                dims[m.weight() as usize] += 1;
            }
        }
        dims
    }

    /// Indices of standard monomials, ascending in the monomial order.
    pub fn standard_monomials(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.monomials.len()];
        for &c in self.ideal.pivots() {
            is_pivot[c] = true;
        }
        (0..self.monomials.len()).filter(|&i| !is_pivot[i]).collect()
    }
}

/// The image of the presented group inside the units of B_k, fully
/// enumerated, with right-multiplication permutations per generator.
pub struct FiniteQuotient {
    p: u16,
    k: u32,
    ngens: usize,
    elements: Vec<FpVec>,
    paths: Vec<Vec<(usize, bool)>>,
    perm: Vec<Vec<usize>>,
    perm_inv: Vec<Vec<usize>>,
}

/// Enumerates the congruence quotient at level k by breadth-first search
/// from the identity, failing once more than `max_order` elements appear.
pub fn finite_quotient(alg: &QuotientAlgebra, max_order: usize) -> Result<FiniteQuotient> {
    let n = alg.ngens();
    let one = alg.one();
    let mut key_to_id: HashMap<Vec<u8>, usize> = HashMap::new();
    key_to_id.insert(one.to_bytes_key(), 0);
    let mut elements = vec![one];
    let mut paths: Vec<Vec<(usize, bool)>> = vec![Vec::new()];
    let mut perm: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut perm_inv: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut cursor = 0;
    while cursor < elements.len() {
        let id = cursor;
        cursor += 1;
        for g in 0..n {
            for inverse in [false, true] {
                let w = alg.mul_by_gen(&elements[id], g, inverse);
                let key = w.to_bytes_key();
                let nid = match key_to_id.get(&key) {
                    Some(&nid) => nid,
                    None => {
                        if elements.len() >= max_order {
                            return Err(Error::OrderBudget { max: max_order });
                        }
                        let nid = elements.len();
                        key_to_id.insert(key, nid);
                        elements.push(w);
                        let mut path = paths[id].clone();
                        path.push((g, inverse));
                        paths.push(path);
                        nid
                    }
                };
                if inverse {
                    perm_inv[g].push(nid);
                } else {
                    perm[g].push(nid);
                }
            }
        }
    }
    Ok(FiniteQuotient {
        p: alg.p(),
        k: alg.k(),
        ngens: n,
        elements,
        paths,
        perm,
        perm_inv,
    })
}

impl FiniteQuotient {
    pub fn p(&self) -> u16 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn ngens(&self) -> usize {
        self.ngens
    }

    /// Order of the congruence quotient, the index of the dimension subgroup.
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// Canonical algebra representative of element `id`.
    pub fn rep(&self, id: usize) -> &FpVec {
        &self.elements[id]
    }

    pub fn apply_gen(&self, id: usize, gen: usize, inverse: bool) -> usize {
        if inverse {
            self.perm_inv[gen][id]
        } else {
            self.perm[gen][id]
        }
    }

    fn apply_path(&self, mut id: usize, path: &[(usize, bool)]) -> usize {
        for &(g, inv) in path {
            id = self.apply_gen(id, g, inv);
        }
        id
    }

    /// Image of a group word, as an element id.
    pub fn resolve_word(&self, w: &GroupWord) -> Result<usize> {
        let mut id = 0;
        for &(g, e) in w.letters() {
            if g >= self.ngens {
                return Err(Error::VariableRange { index: g, nvars: self.ngens });
            }
            for _ in 0..e.unsigned_abs() {
                id = self.apply_gen(id, g, e < 0);
            }
        }
        Ok(id)
    }

    /// Right-multiplication permutation of a group word.
    pub fn word_perm(&self, w: &GroupWord) -> Result<Vec<usize>> {
        let mut perm: Vec<usize> = (0..self.order()).collect();
        for &(g, e) in w.letters() {
            if g >= self.ngens {
                return Err(Error::VariableRange { index: g, nvars: self.ngens });
            }
            for _ in 0..e.unsigned_abs() {
                for slot in perm.iter_mut() {
                    *slot = self.apply_gen(*slot, g, e < 0);
                }
            }
        }
        Ok(perm)
    }

    /// Group multiplication via the generator path of `b`.
    pub fn group_mul(&self, a: usize, b: usize) -> usize {
        self.apply_path(a, &self.paths[b])
    }

    pub fn group_inv(&self, a: usize) -> usize {
        // Finite group: some power of a is the inverse.
        let mut cur = self.group_mul(a, a);
        let mut prev = a;
        while cur != 0 {
            prev = cur;
            cur = self.group_mul(cur, a);
        }
        if a == 0 {
            0
        } else {
            prev
        }
    }

    /// Multiplicative order of element `id`.
    pub fn element_order(&self, id: usize) -> usize {
        let mut cur = id;
        let mut ord = 1;
        while cur != 0 {
            cur = self.group_mul(cur, id);
            ord += 1;
        }
        if id == 0 {
            1
        } else {
            ord
        }
    }

    /// Maps every element onto the corresponding element of a lower-level
    /// quotient of the same presentation.
    pub fn map_onto(&self, smaller: &FiniteQuotient) -> Vec<usize> {
        assert!(smaller.k <= self.k);
        assert_eq!(smaller.ngens, self.ngens);
        (0..self.order())
            .map(|id| smaller.apply_path(0, &self.paths[id]))
            .collect()
    }
}

/// Ranks of the free Lie algebra layers: necklace counts by Witt's formula.
fn lie_rank(d: u128, j: u64) -> u128 {
    let mut sum: i128 = 0;
    for e in 1..=j {
        if !j.is_multiple_of(e) {
            continue;
        }
        let mu = mobius(e);
        if mu == 0 {
            continue;
        }
        let term = d.pow((j / e) as u32) as i128;
        sum += mu as i128 * term;
    }
    (sum / j as i128) as u128
}

fn mobius(mut n: u64) -> i8 {
    let mut m: i8 = 1;
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            n /= q;
            if n.is_multiple_of(q) {
                return 0;
            }
            m = -m;
        }
        q += 1;
    }
    if n > 1 {
        m = -m;
    }
    m
}

/// Layer dimensions of the dimension-series graded Lie algebra of a free
/// pro-p group of rank d: layer m collects the Lie ranks at m / p^s for
/// every p^s dividing m.
pub fn free_dimension_layers(d: u64, p: u64, upto: usize) -> Vec<u128> {
    let mut dims = Vec::with_capacity(upto);
    for m in 1..=upto as u64 {
        let mut total: u128 = 0;
        let mut ps = 1u64;
        while ps <= m {
            if m % ps == 0 {
                total += lie_rank(d as u128, m / ps);
            }
            match ps.checked_mul(p) {
                Some(next) => ps = next,
                None => break,
            }
        }
        dims.push(total);
    }
    dims
}

/// log_p of the order of the level-k congruence quotient of a free pro-p
/// group of rank d.
pub fn free_quotient_order_log(d: u64, p: u64, k: u32) -> u128 {
    free_dimension_layers(d, p, k.saturating_sub(1) as usize)
        .iter()
        .sum()
}

/// Closed-form order of the level-k congruence quotient of a free pro-p
/// group of rank d, as a u128 (panics on overflow; use
/// [`free_quotient_order_log`] for large k).
pub fn restricted_lie_order_oracle(d: u64, p: u64, k: u32) -> u128 {
    let log = free_quotient_order_log(d, p, k);
    let log32 = u32::try_from(log).expect("order exceeds u128");
    (p as u128).checked_pow(log32).expect("order exceeds u128")
}

/// Graded dimensions of the quotient algebras predicted by a mild
/// presentation's structure; errors on non-mild input.
pub fn hilbert_mild_flag(info: &crate::presentations::FlagInfo, upto: usize) -> Result<Vec<u128>> {
    let s = info.mild_structure()?;
    Ok(mild_graded_dims(s.l(), s.n() + 1, upto))
}

/// Graded dimensions predicted for a mild presentation with `l` relators and
/// `ngens` generators (counting the distinguished one): the coefficients of
///   1/(1-t) * 1/(1 - l t - (ngens-1-l) t/(1-t)).
///
/// The kernel of the projection onto the distinguished direction is free on
/// generators of weight 1 (one per relator subject) and of every weight >= 1
/// (one family per remaining generator), which gives the inner factor; the
/// outer factor is the distinguished direction itself.
pub fn mild_graded_dims(l: usize, ngens: usize, upto: usize) -> Vec<u128> {
    assert!(l < ngens, "need at least the distinguished generator");
    let m = (ngens - 1) as u128;
    let free_tail = m - l as u128;
    // b_j: graded dims of the kernel part, from b_j = sum_i v_i b_{j-i}
    // with v_1 = m and v_i = m - l for i >= 2.
    let mut b = vec![0u128; upto.max(1)];
    b[0] = 1;
    for j in 1..upto {
        let mut s = m * b[j - 1];
        for i in 2..=j {
            s += free_tail * b[j - i];
        }
        b[j] = s;
    }
    // Multiply by 1/(1-t): prefix sums.
    let mut a = vec![0u128; upto];
    let mut run = 0u128;
    for j in 0..upto {
        run += b[j];
        a[j] = run;
    }
    a
}
