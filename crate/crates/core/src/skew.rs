//! Skew power series decomposition of the quotient algebras.
//!
//! For a presentation with distinguished generator g and kernel generators
//! x_i, the algebra B_k decomposes as a right skew power series ring over the
//! subalgebra generated by the kernel: every element is Σ s^i a_i with
//! s = g - 1 and coefficients a_i in that subalgebra (the "N-part"), and
//! multiplication is twisted by σ (conjugation by g) and the σ-derivation
//! δ = σ - id via the commutation rule a·s = s·σ(a) + δ(a).
//!
//! The same σ and δ extend to a weighted polynomial ring Λ[[t]] whose
//! variables a_{i,j} stand for the scaled kernel elements (x_{i,j} - 1)/t^w:
//! [`extend_twist`] builds that extension for mild presentations and checks
//! that δ lands in t·Λ[[t]].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fplinalg::{EchelonSpan, FpMatrix, FpVec};
use crate::free_series::{magnus_images, magnus_word, split_by_weight, FreeCtx, TSeries, TruncPoly};
use crate::presentations::{iterated_commutator, FlagInfo, GroupPresentation, GroupWord};
use crate::quotient::{build_quotient, QuotientAlgebra};

/// Binomial coefficient mod p by Lucas's theorem.
pub fn binom_mod_p(mut n: u64, mut k: u64, p: u16) -> u8 {
    let pp = p as u64;
    let mut acc = 1u64;
    while n > 0 || k > 0 {
        let (nd, kd) = (n % pp, k % pp);
        if kd > nd {
            return 0;
        }
        acc = acc * small_binom(nd, kd, p) as u64 % pp;
        n /= pp;
        k /= pp;
    }
    acc as u8
}

/// C(n, k) mod p for n, k < p.
fn small_binom(n: u64, k: u64, p: u16) -> u8 {
    let pp = p as u64;
    let mut acc = 1u64;
    for i in 1..=k {
        acc = acc * ((n - k + i) % pp) % pp;
        acc = acc * crate::fplinalg::fp_inv((i % pp) as u8, p) as u64 % pp;
    }
    acc as u8
}

/// A truncated right skew power series Σ s^i a_i: coefficient i is a vector
/// over the N-part basis, kept only where weight(basis) + i < cutoff.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewSeries {
    pub cutoff: u32,
    pub coeffs: Vec<FpVec>,
}

impl SkewSeries {
    pub fn zero(p: u16, nb: usize, cutoff: u32) -> Self {
        Self {
            cutoff,
            coeffs: (0..cutoff as usize).map(|_| FpVec::zero(p, nb)).collect(),
        }
    }

    pub fn coeff(&self, i: usize) -> &FpVec {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.cutoff, other.cutoff, "cutoff mismatch");
        let mut out = self.clone();
        for (c, oc) in out.coeffs.iter_mut().zip(&other.coeffs) {
            c.add_scaled(oc, 1);
        }
        out
    }
}

/// The skew decomposition data of one quotient algebra: N-part basis, the
/// twist maps σ and δ on it, and the change of basis between B_k coordinates
/// and skew coefficient lists.
pub struct SkewStructure {
    alg: QuotientAlgebra,
    distinguished: usize,
    nspan: EchelonSpan,
    nweights: Vec<u64>,
    sigma: FpMatrix,
    delta: FpMatrix,
    s_vec: FpVec,
    s_pows: Vec<FpVec>,
    skew_span: EchelonSpan,
}

/// Builds the decomposition for a flag presentation's quotient algebra.
///
/// The N-part is the unital subalgebra generated by the images of the
/// iterated commutators x_{i,j} = [x_i, g, ..., g] (j up to k-2); its span is
/// closed under right multiplication by the generating units, which reaches
/// every product because multiplication is linear in the left factor. σ is
/// conjugation by g, which must preserve the N-part; δ = σ - id must raise
/// the minimal weight of every basis vector. Finally the set
/// {s^i · basis} is echelonized (ascending i, then basis order) and must span
/// all of B_k.
pub fn build_skew(alg: QuotientAlgebra, info: &FlagInfo) -> Result<SkewStructure> {
    let s = info.structure()?;
    let p = alg.p();
    let k = alg.k();
    let dim = alg.ambient_dim();
    let g_word = GroupWord::generator(s.distinguished);

    // Seed units: images of the commutator tower over each kernel generator.
    let mut seeds = Vec::new();
    for &x in &s.kernel_generators {
        let xw = GroupWord::generator(x);
        for j in 0..k.saturating_sub(1) {
            let img = alg.word_image(&iterated_commutator(&xw, &g_word, j))?;
            seeds.push(img);
        }
    }

    let mut nspan = EchelonSpan::new(p, dim);
    let mut work: Vec<FpVec> = vec![alg.one()];
    work.extend(seeds.iter().cloned());
    while let Some(v) = work.pop() {
        if let Some(row) = nspan.insert_returning(v) {
            for u in &seeds {
                work.push(alg.mul(&row, u));
            }
        }
    }

    let nb = nspan.rank();
    let nweights: Vec<u64> = nspan
        .rows()
        .iter()
        .map(|r| alg.min_weight(r).expect("echelon rows are nonzero"))
        .collect();

    // σ = conjugation by g on the N-part, row per basis vector.
    let g_img = alg.word_image(&g_word)?;
    let g_inv = alg.word_image(&g_word.inverse())?;
    let mut sigma = FpMatrix::new(p, nb, nb);
    for (b, row) in nspan.rows().iter().enumerate() {
        let conj = alg.mul(&alg.mul(&g_inv, row), &g_img);
        let expr = nspan.express(&conj).ok_or(Error::SigmaEscapes)?;
        for (r, c) in expr {
            sigma.set(b, r, c);
        }
        // δ on this basis vector must sit strictly above it in weight.
        let mut diff = conj;
        diff.add_scaled(row, (p - 1) as u8);
        if let Some(w) = alg.min_weight(&diff) {
            if w <= nweights[b] {
                return Err(Error::DeltaDegree);
            }
        }
    }
    let mut delta = sigma.clone();
    for b in 0..nb {
        let cur = delta.get(b, b);
        delta.set(b, b, ((cur as u16 + p - 1) % p) as u8);
    }

    // Powers of s = g - 1 and the skew spanning set.
    let mut s_vec = g_img;
    s_vec.add_scaled(&alg.one(), (p - 1) as u8);
    let mut s_pows = vec![alg.one()];
    for _ in 1..k {
        let last = s_pows.last().unwrap();
        s_pows.push(alg.mul(last, &s_vec));
    }
    let mut skew_span = EchelonSpan::new_tracked(p, dim);
    for sp in &s_pows {
        for row in nspan.rows() {
            skew_span.insert(alg.mul(sp, row));
        }
    }
    if skew_span.rank() != alg.dim() {
        return Err(Error::SkewSpan { cutoff: k });
    }

    Ok(SkewStructure {
        alg,
        distinguished: s.distinguished,
        nspan,
        nweights,
        sigma,
        delta,
        s_vec,
        s_pows,
        skew_span,
    })
}

impl SkewStructure {
    pub fn alg(&self) -> &QuotientAlgebra {
        &self.alg
    }

    pub fn p(&self) -> u16 {
        self.alg.p()
    }

    pub fn cutoff(&self) -> u32 {
        self.alg.k()
    }

    pub fn distinguished(&self) -> usize {
        self.distinguished
    }

    /// Dimension of the N-part.
    pub fn n_dim(&self) -> usize {
        self.nspan.rank()
    }

    /// Minimal weight of each N-part basis vector.
    pub fn n_weights(&self) -> &[u64] {
        &self.nweights
    }

    pub fn sigma_matrix(&self) -> &FpMatrix {
        &self.sigma
    }

    pub fn delta_matrix(&self) -> &FpMatrix {
        &self.delta
    }

    /// The element s = g - 1 in B_k coordinates.
    pub fn s_elem(&self) -> &FpVec {
        &self.s_vec
    }

    /// N-part coordinates of a B_k vector, if it lies in the N-part.
    pub fn n_coords(&self, v: &FpVec) -> Option<FpVec> {
        let expr = self.nspan.express(v)?;
        let mut out = FpVec::zero(self.p(), self.n_dim());
        for (r, c) in expr {
            out.set(r, c);
        }
        Some(out)
    }

    /// B_k vector of an N-part coordinate vector.
    pub fn n_elem(&self, coords: &FpVec) -> FpVec {
        let mut out = FpVec::zero(self.p(), self.alg.ambient_dim());
        for (b, c) in coords.nonzero_entries() {
            out.add_scaled(&self.nspan.rows()[b], c);
        }
        out
    }

    pub fn sigma_n(&self, coords: &FpVec) -> FpVec {
        self.sigma.vec_mul(coords)
    }

    pub fn delta_n(&self, coords: &FpVec) -> FpVec {
        self.delta.vec_mul(coords)
    }

    /// Product of two N-part elements, in N-part coordinates.
    pub fn mul_n(&self, a: &FpVec, b: &FpVec) -> FpVec {
        let prod = self.alg.mul(&self.n_elem(a), &self.n_elem(b));
        self.n_coords(&prod)
            .expect("the N-part is multiplicatively closed")
    }

    /// Skew coefficients of a B_k vector (canonical coordinates).
    pub fn to_skew(&self, v: &FpVec) -> Result<SkewSeries> {
        let k = self.cutoff();
        let nb = self.n_dim();
        let expr = self
            .skew_span
            .express_inserted(v)
            .ok_or(Error::SkewSpan { cutoff: k })?;
        let mut out = SkewSeries::zero(self.p(), nb, k);
        for (id, c) in expr {
            let (i, b) = (id / nb, id % nb);
            out.coeffs[i].add_assign_entry(b, c);
        }
        Ok(out)
    }

    /// B_k vector of a skew series: Σ s^i a_i.
    pub fn from_skew(&self, f: &SkewSeries) -> FpVec {
        let mut out = FpVec::zero(self.p(), self.alg.ambient_dim());
        for (i, coeff) in f.coeffs.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            let term = self.alg.mul(&self.s_pows[i], &self.n_elem(coeff));
            out.add_scaled(&term, 1);
        }
        out
    }

    /// Drops coefficient components that vanish identically at this cutoff:
    /// basis vectors of weight w contribute nothing to s^i · (...) once
    /// i + w reaches the cutoff.
    fn truncate_coeff(&self, i: usize, coeff: &mut FpVec) {
        let k = self.cutoff() as u64;
        for (b, _) in coeff.nonzero_entries() {
            if i as u64 + self.nweights[b] >= k {
                coeff.set(b, 0);
            }
        }
    }

    /// Product of two skew series by the twisted convolution: the s^m
    /// coefficient is Σ_{n<=m} Σ_{j>=n} C(j,n) δ^{j-n}(σ^n(a_{m-n})) · b_j.
    pub fn skew_mul(&self, f: &SkewSeries, h: &SkewSeries) -> SkewSeries {
        assert_eq!(f.cutoff, h.cutoff, "cutoff mismatch");
        let k = f.cutoff as usize;
        let nb = self.n_dim();
        let p = self.p();
        let mut out = SkewSeries::zero(p, nb, f.cutoff);
        for m in 0..k {
            let mut acc = FpVec::zero(p, nb);
            for n in 0..=m {
                let a = &f.coeffs[m - n];
                if a.is_zero() {
                    continue;
                }
                let mut twisted = a.clone();
                for _ in 0..n {
                    twisted = self.sigma_n(&twisted);
                }
                for j in n..k {
                    if twisted.is_zero() {
                        break;
                    }
                    let c = binom_mod_p(j as u64, n as u64, p);
                    if c != 0 && !h.coeffs[j].is_zero() {
                        let mut term = self.mul_n(&twisted, &h.coeffs[j]);
                        term.scale(c);
                        acc.add_scaled(&term, 1);
                    }
                    twisted = self.delta_n(&twisted);
                }
            }
            self.truncate_coeff(m, &mut acc);
            out.coeffs[m] = acc;
        }
        out
    }

    /// A uniformly random canonical B_k vector.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> FpVec {
        let p = self.p();
        let mut v = FpVec::zero(p, self.alg.ambient_dim());
        for i in self.alg.standard_monomials() {
            v.set(i, rng.gen_range(0..p) as u8);
        }
        v
    }

    /// A uniformly random N-part coordinate vector.
    pub fn random_n<R: Rng>(&self, rng: &mut R) -> FpVec {
        FpVec::random(self.p(), self.n_dim(), rng)
    }
}

/// Checks that skew multiplication agrees with the algebra product on random
/// pairs plus the directed pair (image of g, image of the first kernel
/// generator). Deterministic for a fixed seed.
pub fn check_decomposition(
    pres: &GroupPresentation,
    k: u32,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    let info = pres.validate_flag();
    let alg = build_quotient(pres, k, 2_000_000)?;
    let sk = build_skew(alg, &info)?;
    let s = info.structure()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut pairs: Vec<(FpVec, FpVec)> = Vec::with_capacity(samples + 2);
    let g_img = sk.alg().word_image(&GroupWord::generator(s.distinguished))?;
    if let Some(&x) = s.kernel_generators.first() {
        let x_img = sk.alg().word_image(&GroupWord::generator(x))?;
        pairs.push((g_img.clone(), x_img.clone()));
        pairs.push((x_img, g_img));
    }
    for _ in 0..samples {
        pairs.push((sk.random_element(&mut rng), sk.random_element(&mut rng)));
    }

    for (u, v) in &pairs {
        let direct = sk.alg().mul(u, v);
        let through = sk.from_skew(&sk.skew_mul(&sk.to_skew(u)?, &sk.to_skew(v)?));
        if direct != through {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The twist maps on the weighted polynomial ring Λ[[t]].
///
/// Variables come in towers over the kernel generators: subject generators
/// (those with a commutator relation) contribute a single weight-1 variable,
/// every other kernel generator contributes variables a_{i,j} of weight
/// 1 + j. σ fixes t and acts on variables; images are stored for every
/// variable whose weight stays below the t-cutoff, which covers all
/// occurrences in weight-graded series.
pub struct LambdaTwist {
    ctx: FreeCtx,
    tcut: usize,
    slot_vars: Vec<Vec<usize>>,
    images: Vec<Option<TSeries>>,
}

/// Shifts a series down by t^w, requiring the low coefficients to vanish.
fn divide_t(ts: &TSeries, w: usize, tcut: usize) -> Result<TSeries> {
    let p = ts.coeff(0).p();
    let inner = ts.coeff(0).cutoff();
    for d in 0..w.min(ts.tcut()) {
        if !ts.coeff(d).is_zero() {
            return Err(Error::NotDivisible(w as u32));
        }
    }
    let mut out = TSeries::zero(p, inner, tcut);
    for d in 0..tcut {
        if d + w < ts.tcut() {
            out.set_coeff(d, ts.coeff(d + w).clone());
        }
    }
    Ok(out)
}

fn tseries_sub(a: &TSeries, b: &TSeries, p: u16) -> TSeries {
    let mut out = a.clone();
    for d in 0..b.tcut() {
        out.add_to_coeff(d, &b.coeff(d).scale((p - 1) as u8));
    }
    out
}

/// Builds σ and δ on Λ[[t]] for a mild presentation.
pub fn extend_twist(
    pres: &GroupPresentation,
    info: &FlagInfo,
    tcut: usize,
) -> Result<LambdaTwist> {
    let s = info.mild_structure()?;
    let p = pres.p;
    if tcut == 0 {
        return Err(Error::Invalid("t-cutoff must be positive".into()));
    }

    // Variable universe: slot i is the position of a kernel generator in the
    // structure's ordering; subjects carry only j = 0, free towers carry
    // j = 0..=tcut (weights above tcut act as inert buffers).
    let l = s.l();
    let nker = s.n();
    let mut names = Vec::new();
    let mut weights = Vec::new();
    let mut slot_vars: Vec<Vec<usize>> = Vec::with_capacity(nker);
    for (slot, &gen) in s.kernel_generators.iter().enumerate() {
        let jmax = if slot < l { 0 } else { tcut };
        let mut vars = Vec::with_capacity(jmax + 1);
        for j in 0..=jmax {
            vars.push(names.len());
            names.push(format!("{}_{}", pres.generators[gen], j));
            weights.push(1 + j as u64);
        }
        slot_vars.push(vars);
    }
    let ctx = FreeCtx::new(p, names, weights, u64::MAX)?;

    // Kernel-letter context for expanding subject images: one weight-1
    // variable per kernel generator, truncated just past the t-cutoff.
    let kctx = FreeCtx::new(
        p,
        s.kernel_generators
            .iter()
            .map(|&g| pres.generators[g].clone())
            .collect(),
        vec![1; nker],
        tcut as u64 + 1,
    )?;
    let kimages = magnus_images(&kctx);
    let kernel_slot: Vec<Option<usize>> = (0..pres.ngens())
        .map(|g| s.kernel_generators.iter().position(|&kg| kg == g))
        .collect();
    let split_images: Vec<(TruncPoly, usize)> = (0..nker)
        .map(|slot| (TruncPoly::var(&ctx, slot_vars[slot][0]), 1))
        .collect();

    let mut images: Vec<Option<TSeries>> = vec![None; ctx.nvars()];
    for (slot, vars) in slot_vars.iter().enumerate() {
        if slot < l {
            // Subject: σ(x - 1) = x·h - 1, expanded over the kernel letters,
            // graded into t-powers, and divided by t.
            let word = GroupWord::generator(s.kernel_generators[slot]).concat(&s.h_words[slot]);
            let remapped = GroupWord::from_letters(word.letters().iter().map(|&(g, e)| {
                let slot = kernel_slot[g].expect("flag right-hand words avoid the distinguished generator");
                (slot, e)
            }));
            let poly = magnus_word(&remapped, &kimages)?.sub(&TruncPoly::one(p, tcut as u64 + 1));
            let graded = split_by_weight(&poly, &split_images, u64::MAX, tcut + 1)?;
            let img = divide_t(&graded, 1, tcut)?;
            if img.coeff(0) != &TruncPoly::var(&ctx, vars[0]) {
                return Err(Error::DeltaDegree);
            }
            images[vars[0]] = Some(img);
        } else {
            // Free tower: σ(a_j) = a_j + a_{j+1} t + a_j a_{j+1} t^{2+j}.
            for (j, &v) in vars.iter().enumerate() {
                if j + 1 >= vars.len() {
                    break;
                }
                let a = TruncPoly::var(&ctx, v);
                let b = TruncPoly::var(&ctx, vars[j + 1]);
                let mut img = TSeries::zero(p, u64::MAX, tcut);
                img.set_coeff(0, a.clone());
                if 1 < tcut {
                    img.set_coeff(1, b.clone());
                }
                if 2 + j < tcut {
                    img.set_coeff(2 + j, a.mul(&b));
                }
                images[v] = Some(img);
            }
        }
    }

    Ok(LambdaTwist { ctx, tcut, slot_vars, images })
}

impl LambdaTwist {
    pub fn ctx(&self) -> &FreeCtx {
        &self.ctx
    }

    pub fn tcut(&self) -> usize {
        self.tcut
    }

    /// Variable index of the j-th tower element over kernel slot `slot`.
    pub fn var(&self, slot: usize, j: usize) -> Option<usize> {
        self.slot_vars.get(slot)?.get(j).copied()
    }

    pub fn sigma_var(&self, v: usize) -> Option<&TSeries> {
        self.images.get(v)?.as_ref()
    }

    /// The graded embedding ι on a polynomial over the weight-1 kernel
    /// letters: letter for slot i maps to a_{i,0} · t.
    pub fn iota(&self, f: &TruncPoly) -> Result<TSeries> {
        let imgs: Vec<(TruncPoly, usize)> = self
            .slot_vars
            .iter()
            .map(|vars| (TruncPoly::var(&self.ctx, vars[0]), 1))
            .collect();
        split_by_weight(f, &imgs, u64::MAX, self.tcut)
    }

    /// Applies σ coefficient-wise: σ(t) = t, variables map to their stored
    /// images. Fails if a variable beyond the stored range occurs.
    pub fn apply_sigma(&self, f: &TSeries) -> Result<TSeries> {
        let p = self.ctx.p();
        let mut out = TSeries::zero(p, u64::MAX, self.tcut);
        for d in 0..f.tcut().min(self.tcut) {
            for (m, c) in f.coeff(d).terms() {
                let mut acc = TSeries::zero(p, u64::MAX, self.tcut);
                acc.set_coeff(0, TruncPoly::scalar(p, u64::MAX, c));
                for &v in m.letters() {
                    let img = self
                        .images
                        .get(v as usize)
                        .and_then(|i| i.as_ref())
                        .ok_or(Error::LambdaDepth(self.ctx.weight(v as usize) as u32))?;
                    acc = acc.mul(img);
                }
                for e in 0..self.tcut.saturating_sub(d) {
                    out.add_to_coeff(d + e, acc.coeff(e));
                }
            }
        }
        Ok(out)
    }

    /// δ = σ - id; lands in t·Λ[[t]] by construction.
    pub fn apply_delta(&self, f: &TSeries) -> Result<TSeries> {
        let sig = self.apply_sigma(f)?;
        let mut trimmed = f.clone();
        if trimmed.tcut() != self.tcut {
            let mut fit = TSeries::zero(self.ctx.p(), u64::MAX, self.tcut);
            for d in 0..self.tcut.min(f.tcut()) {
                fit.set_coeff(d, f.coeff(d).clone());
            }
            trimmed = fit;
        }
        Ok(tseries_sub(&sig, &trimmed, self.ctx.p()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentations::FlagStructure;
    use crate::presets;

    fn pres(name: &str) -> GroupPresentation {
        GroupPresentation::parse(presets::preset(name).unwrap()).unwrap()
    }

    fn skew_for(name: &str, k: u32) -> SkewStructure {
        let pr = pres(name);
        let info = pr.validate_flag();
        let alg = build_quotient(&pr, k, 1 << 22).unwrap();
        build_skew(alg, &info).unwrap()
    }

    #[test]
    fn lucas_binomials_match_small_cases() {
        assert_eq!(binom_mod_p(3, 1, 2), 1);
        assert_eq!(binom_mod_p(4, 2, 2), 0);
        assert_eq!(binom_mod_p(5, 2, 2), 0);
        assert_eq!(binom_mod_p(5, 4, 2), 1);
        assert_eq!(binom_mod_p(4, 2, 3), 0);
        assert_eq!(binom_mod_p(6, 3, 3), 2);
        assert_eq!(binom_mod_p(10, 5, 7), (252 % 7) as u8);
        // Exhaustive check against Pascal's rule for small n.
        for p in [2u16, 3, 5] {
            let mut prev = vec![1u16];
            for n in 1..=12u64 {
                let mut row = vec![1u16];
                for k in 1..n as usize {
                    row.push((prev[k - 1] + prev[k]) % p);
                }
                row.push(1);
                for (k, &exp) in row.iter().enumerate() {
                    assert_eq!(binom_mod_p(n, k as u64, p) as u16, exp % p, "C({n},{k}) mod {p}");
                }
                prev = row;
            }
        }
    }

    #[test]
    fn procyclic_npart_is_scalars_and_skew_is_the_power_basis() {
        let sk = skew_for("zp2", 4);
        assert_eq!(sk.n_dim(), 1);
        assert_eq!(sk.alg().dim(), 4);
        let one = sk.alg().one();
        let f = sk.to_skew(&one).unwrap();
        assert_eq!(f.coeffs[0].get(0), 1);
        assert!(f.coeffs[1..].iter().all(|c| c.is_zero()));
    }

    #[test]
    fn npart_dimensions_match_the_frozen_values() {
        let sk = skew_for("free2", 6);
        assert_eq!(sk.n_dim(), 32);
        let mut hist = vec![0usize; 6];
        for &w in sk.n_weights() {
            hist[w as usize] += 1;
        }
        assert_eq!(hist, vec![1, 1, 2, 4, 8, 16]);
        assert_eq!(sk.alg().dim(), 63);

        let sk = skew_for("mild1", 6);
        assert_eq!(sk.n_dim(), 6);
        assert_eq!(sk.n_weights(), &[0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn conjugation_of_x_matches_the_closed_form() {
        // x^g = x^3, so σ(X) = (1+X)^3 - 1 = X + X^2 + X^3 over F_2.
        let sk = skew_for("mild1", 6);
        let alg = sk.alg();
        let x_img = alg.word_image(&GroupWord::generator(0)).unwrap();
        let mut x_minus_one = x_img;
        x_minus_one.add_scaled(&alg.one(), 1);
        let coords = sk.n_coords(&x_minus_one).unwrap();

        let mut expect = TruncPoly::zero(2, 6);
        for e in 1..=3usize {
            expect.add_term(alg.ctx().mono(&vec![0u32; e]), 1);
        }
        let expect_vec = alg.reduce_poly(&expect);
        assert_eq!(sk.n_elem(&sk.sigma_n(&coords)), expect_vec);

        // δ(X) = X^2 + X^3.
        let mut dexpect = TruncPoly::zero(2, 6);
        dexpect.add_term(alg.ctx().mono(&[0, 0]), 1);
        dexpect.add_term(alg.ctx().mono(&[0, 0, 0]), 1);
        assert_eq!(sk.n_elem(&sk.delta_n(&coords)), alg.reduce_poly(&dexpect));
    }

    #[test]
    fn free_tower_delta_raises_degree_past_the_depth() {
        let sk = skew_for("free2", 5);
        let alg = sk.alg();
        let g = GroupWord::generator(1);
        for j in 0..3u32 {
            let xj = iterated_commutator(&GroupWord::generator(0), &g, j);
            let mut v = alg.word_image(&xj).unwrap();
            v.add_scaled(&alg.one(), 1);
            let coords = sk.n_coords(&v).unwrap();
            let dv = sk.n_elem(&sk.delta_n(&coords));
            let w = alg.min_weight(&dv).expect("nonzero at this cutoff");
            assert!(w >= 2 + j as u64, "depth {j}: got weight {w}");
        }
    }

    #[test]
    fn one_and_g_have_the_expected_skew_coefficients() {
        for name in ["mild1", "free2"] {
            let sk = skew_for(name, 5);
            let alg = sk.alg();
            let one = sk.to_skew(&alg.one()).unwrap();
            assert_eq!(sk.n_elem(&one.coeffs[0]), alg.one());
            assert!(one.coeffs[1..].iter().all(|c| c.is_zero()));

            let g_img = alg.word_image(&GroupWord::generator(sk.distinguished())).unwrap();
            let g = sk.to_skew(&g_img).unwrap();
            assert_eq!(sk.n_elem(&g.coeffs[0]), alg.one());
            assert_eq!(sk.n_elem(&g.coeffs[1]), alg.one());
            assert!(g.coeffs[2..].iter().all(|c| c.is_zero()));
        }
    }

    #[test]
    fn round_trip_is_the_identity() {
        let sk = skew_for("mild2", 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..25 {
            let v = sk.random_element(&mut rng);
            let back = sk.from_skew(&sk.to_skew(&v).unwrap());
            assert_eq!(back, v);
        }
    }

    #[test]
    fn commutation_rule_holds_for_npart_elements() {
        // a·s = s·σ(a) + δ(a).
        let sk = skew_for("mild1", 6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let a = sk.random_n(&mut rng);
            let lhs = sk.alg().mul(&sk.n_elem(&a), sk.s_elem());
            let mut rhs = sk.alg().mul(sk.s_elem(), &sk.n_elem(&sk.sigma_n(&a)));
            rhs.add_scaled(&sk.n_elem(&sk.delta_n(&a)), 1);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn twist_maps_obey_the_derivation_laws() {
        for name in ["mild1", "mild2", "free2"] {
            let sk = skew_for(name, if name == "free2" { 5 } else { 4 });
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..30 {
                let a = sk.random_n(&mut rng);
                let b = sk.random_n(&mut rng);
                // δ(ab) = δ(a)·b + σ(a)·δ(b).
                let lhs = sk.delta_n(&sk.mul_n(&a, &b));
                let mut rhs = sk.mul_n(&sk.delta_n(&a), &b);
                rhs.add_scaled(&sk.mul_n(&sk.sigma_n(&a), &sk.delta_n(&b)), 1);
                assert_eq!(lhs, rhs, "{name}: right twisted derivation");
                // σ and δ commute.
                assert_eq!(sk.sigma_n(&sk.delta_n(&a)), sk.delta_n(&sk.sigma_n(&a)), "{name}");
                // σ is multiplicative.
                assert_eq!(
                    sk.sigma_n(&sk.mul_n(&a, &b)),
                    sk.mul_n(&sk.sigma_n(&a), &sk.sigma_n(&b)),
                    "{name}"
                );
                // δ raises the minimal weight of nonzero vectors.
                let av = sk.n_elem(&a);
                let dv = sk.n_elem(&sk.delta_n(&a));
                if let (Some(wa), Some(wd)) = (sk.alg().min_weight(&av), sk.alg().min_weight(&dv)) {
                    assert!(wd > wa, "{name}: δ must raise weight");
                }
            }
        }
    }

    #[test]
    fn skew_products_match_the_algebra() {
        assert!(check_decomposition(&pres("mild1"), 6, 40, 1).unwrap());
        assert!(check_decomposition(&pres("free2"), 5, 25, 2).unwrap());
        assert!(check_decomposition(&pres("zp2"), 5, 10, 3).unwrap());
        assert!(check_decomposition(&pres("mild2"), 4, 15, 4).unwrap());
    }

    #[test]
    fn skew_multiplication_is_associative_and_unital() {
        let sk = skew_for("mild1", 5);
        let one = sk.to_skew(&sk.alg().one()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..15 {
            let f = sk.to_skew(&sk.random_element(&mut rng)).unwrap();
            let g = sk.to_skew(&sk.random_element(&mut rng)).unwrap();
            let h = sk.to_skew(&sk.random_element(&mut rng)).unwrap();
            assert_eq!(sk.skew_mul(&f, &one), f);
            assert_eq!(sk.skew_mul(&one, &f), f);
            let ab_c = sk.skew_mul(&sk.skew_mul(&f, &g), &h);
            let a_bc = sk.skew_mul(&f, &sk.skew_mul(&g, &h));
            assert_eq!(ab_c, a_bc);
        }
    }

    #[test]
    fn pure_s_squares_to_s_squared() {
        let sk = skew_for("free2", 4);
        let s = sk.to_skew(sk.s_elem()).unwrap();
        let sq = sk.skew_mul(&s, &s);
        let direct = sk.alg().mul(sk.s_elem(), sk.s_elem());
        assert_eq!(sk.from_skew(&sq), direct);
        assert!(sq.coeffs[0].is_zero());
        assert!(sq.coeffs[1].is_zero());
    }

    #[test]
    fn lambda_twist_of_the_mild_subject_matches_the_closed_form() {
        // σ(a) = a + a^2 t + a^3 t^2 from σ(X) = X + X^2 + X^3.
        let pr = pres("mild1");
        let tw = extend_twist(&pr, &pr.validate_flag(), 4).unwrap();
        let v = tw.var(0, 0).unwrap();
        let a = TruncPoly::var(tw.ctx(), v);
        let img = tw.sigma_var(v).unwrap();
        assert_eq!(img.coeff(0), &a);
        assert_eq!(img.coeff(1), &a.mul(&a));
        assert_eq!(img.coeff(2), &a.mul(&a).mul(&a));
        assert!(img.coeff(3).is_zero());
    }

    #[test]
    fn lambda_twist_of_a_free_tower_matches_the_closed_form() {
        let pr = pres("free2");
        let tw = extend_twist(&pr, &pr.validate_flag(), 3).unwrap();
        let a0 = TruncPoly::var(tw.ctx(), tw.var(0, 0).unwrap());
        let a1 = TruncPoly::var(tw.ctx(), tw.var(0, 1).unwrap());
        let img = tw.sigma_var(tw.var(0, 0).unwrap()).unwrap();
        assert_eq!(img.coeff(0), &a0);
        assert_eq!(img.coeff(1), &a1);
        assert_eq!(img.coeff(2), &a0.mul(&a1));
        assert_eq!(tw.ctx().weight(tw.var(0, 1).unwrap()), 2);
    }

    #[test]
    fn lambda_sigma_fixes_t_and_delta_kills_scalars() {
        let pr = pres("mild1");
        let tw = extend_twist(&pr, &pr.validate_flag(), 4).unwrap();
        let p = tw.ctx().p();
        // t itself: the series with coefficient 1 at degree 1.
        let mut t = TSeries::zero(p, u64::MAX, 4);
        t.set_coeff(1, TruncPoly::one(p, u64::MAX));
        assert_eq!(tw.apply_sigma(&t).unwrap(), t);
        assert!(tw.apply_delta(&t).unwrap().is_zero());
        // Scalars are fixed.
        let mut c = TSeries::zero(p, u64::MAX, 4);
        c.set_coeff(0, TruncPoly::one(p, u64::MAX));
        assert!(tw.apply_delta(&c).unwrap().is_zero());
    }

    #[test]
    fn lambda_delta_lands_in_t_times_the_ring() {
        for name in ["mild1", "mild2", "free2"] {
            let pr = pres(name);
            let tw = extend_twist(&pr, &pr.validate_flag(), 4).unwrap();
            for slot in 0..tw.slot_vars.len() {
                let v = tw.var(slot, 0).unwrap();
                let mut ts = TSeries::zero(pr.p, u64::MAX, 4);
                ts.set_coeff(0, TruncPoly::var(tw.ctx(), v));
                let d = tw.apply_delta(&ts).unwrap();
                assert!(d.valuation().is_none_or(|val| val >= 1), "{name} slot {slot}");
            }
        }
    }

    #[test]
    fn lambda_iota_preserves_valuation() {
        let pr = pres("mild2");
        let tw = extend_twist(&pr, &pr.validate_flag(), 5).unwrap();
        let kctx = FreeCtx::uniform(2, "K", 2, 5).unwrap();
        let x = TruncPoly::var(&kctx, 0);
        let y = TruncPoly::var(&kctx, 1);
        let f = x.mul(&y).add(&y.mul(&y).mul(&x));
        assert_eq!(tw.iota(&f).unwrap().valuation(), Some(2));
        assert_eq!(tw.iota(&TruncPoly::one(2, 5)).unwrap().valuation(), Some(0));
        assert!(tw.iota(&TruncPoly::zero(2, 5)).unwrap().is_zero());
    }

    #[test]
    fn lambda_rejects_non_mild_and_broken_subjects() {
        let deep = pres("flag-deep");
        assert!(matches!(
            extend_twist(&deep, &deep.validate_flag(), 4),
            Err(Error::NotMild)
        ));
        // A doctored structure whose right-hand word has nonzero exponent
        // sum: σ(a) then starts at a^2 t, so δ fails to land in tΛ[[t]].
        let pr = pres("mild1");
        let bogus = FlagInfo {
            is_flag: true,
            is_mild: true,
            structure: Some(FlagStructure {
                distinguished: 1,
                kernel_generators: vec![0],
                a_values: vec![1],
                h_words: vec![GroupWord::generator(0)],
            }),
        };
        assert!(matches!(extend_twist(&pr, &bogus, 4), Err(Error::DeltaDegree)));
    }

    #[test]
    fn skew_series_respects_the_coefficient_weight_bound() {
        let sk = skew_for("free2", 5);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let f = sk.to_skew(&sk.random_element(&mut rng)).unwrap();
            let g = sk.to_skew(&sk.random_element(&mut rng)).unwrap();
            let prod = sk.skew_mul(&f, &g);
            for (i, coeff) in prod.coeffs.iter().enumerate() {
                for (b, _) in coeff.nonzero_entries() {
                    assert!(i as u64 + sk.n_weights()[b] < 5);
                }
            }
        }
    }
}
