//! Truncated power series in noncommuting weighted variables over F_p.
//!
//! A [`FreeCtx`] fixes the prime, the variable names, a positive integer
//! weight per variable, and a weight cutoff. Polynomials keep only monomials
//! of weight strictly below the cutoff, so the ring is the free algebra
//! modulo the closed ideal spanned by high-weight monomials. Group elements
//! embed through `g_i -> 1 + X_i`, and inverting such units term by term is
//! what makes group words computable here.
//!
//! Monomials order by weight first, then lexicographically by letters. That
//! order is what the basis enumeration, echelon pivoting, and all degree
//! arguments elsewhere rely on; do not change it casually.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::fplinalg::fp_inv;
use crate::presentations::{is_supported_prime, GroupWord};

/// Weight cutoffs above this are rejected; unbounded contexts use `u64::MAX`.
pub const MAX_CUTOFF: u64 = 1_000_000;

/// Ambient data for a truncated free algebra: prime, variables, weights.
#[derive(Clone, Debug)]
pub struct FreeCtx {
    p: u16,
    names: Vec<String>,
    weights: Vec<u64>,
    cutoff: u64,
}

impl FreeCtx {
    pub fn new(p: u16, names: Vec<String>, weights: Vec<u64>, cutoff: u64) -> Result<Self> {
        if !is_supported_prime(p as u64) {
            return Err(Error::BadPrime(p as u64));
        }
        if names.len() != weights.len() {
            return Err(Error::Invalid("names and weights differ in length".into()));
        }
        if weights.contains(&0) {
            return Err(Error::Invalid("variable weights must be positive".into()));
        }
        if cutoff == 0 || (cutoff > MAX_CUTOFF && cutoff != u64::MAX) {
            return Err(Error::CutoffTooLarge(cutoff.min(u32::MAX as u64) as u32));
        }
        Ok(Self { p, names, weights, cutoff })
    }

    /// Context with no weight truncation. Unit inversion is unavailable here;
    /// use it only for coefficient rings whose elements stay small.
    pub fn unbounded(p: u16, names: Vec<String>, weights: Vec<u64>) -> Result<Self> {
        Self::new(p, names, weights, u64::MAX)
    }

    /// All weights 1, names `prefix0..prefix{n-1}`.
    pub fn uniform(p: u16, prefix: &str, nvars: usize, cutoff: u64) -> Result<Self> {
        let names = (0..nvars).map(|i| format!("{prefix}{i}")).collect();
        Self::new(p, names, vec![1; nvars], cutoff)
    }

    pub fn p(&self) -> u16 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.weights.len()
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn weight(&self, var: usize) -> u64 {
        self.weights[var]
    }

    pub fn name(&self, var: usize) -> &str {
        &self.names[var]
    }

    pub fn mono(&self, letters: &[u32]) -> Mono {
        let weight = letters.iter().map(|&v| self.weights[v as usize]).sum();
        Mono { weight, letters: letters.to_vec() }
    }
}

/// A word in the variables, with its total weight cached.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mono {
    weight: u64,
    letters: Vec<u32>,
}

impl Mono {
    pub fn one() -> Self {
        Mono { weight: 0, letters: Vec::new() }
    }

    pub fn weight(&self) -> u64 {
        self.weight
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn is_one(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &Mono) -> Mono {
        let mut letters = Vec::with_capacity(self.letters.len() + other.letters.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Mono { weight: self.weight + other.weight, letters }
    }

    pub fn to_text(&self, ctx: &FreeCtx) -> String {
        if self.letters.is_empty() {
            return "1".into();
        }
        let mut parts: Vec<(u32, u32)> = Vec::new();
        for &v in &self.letters {
            match parts.last_mut() {
                Some((u, e)) if *u == v => *e += 1,
                _ => parts.push((v, 1)),
            }
        }
        parts
            .iter()
            .map(|&(v, e)| {
                if e == 1 {
                    ctx.name(v as usize).to_string()
                } else {
                    format!("{}^{}", ctx.name(v as usize), e)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.weight
            .cmp(&other.weight)
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mono{:?}", self.letters)
    }
}

/// A weight valuation value: 0 for (apparent) zero, p^{-exponent} otherwise.
///
/// Ordered multiplicatively: larger exponent means smaller weight, and zero
/// is below everything. A zero polynomial at finite precision may hide a
/// nonzero tail past the cutoff, which is why zero carries no exponent.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Weight {
    ZeroAtCutoff,
    NonZero { exponent: u64 },
}

impl Weight {
    pub fn exponent(self) -> Option<u64> {
        match self {
            Weight::ZeroAtCutoff => None,
            Weight::NonZero { exponent } => Some(exponent),
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, Weight::ZeroAtCutoff)
    }
}

/// Product of valuations: exponents add.
impl std::ops::Mul for Weight {
    type Output = Weight;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, other: Weight) -> Weight {
        match (self, other) {
            (Weight::NonZero { exponent: a }, Weight::NonZero { exponent: b }) => {
                Weight::NonZero { exponent: a + b }
            }
            _ => Weight::ZeroAtCutoff,
        }
    }
}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Weight::ZeroAtCutoff, Weight::ZeroAtCutoff) => std::cmp::Ordering::Equal,
            (Weight::ZeroAtCutoff, _) => std::cmp::Ordering::Less,
            (_, Weight::ZeroAtCutoff) => std::cmp::Ordering::Greater,
            (Weight::NonZero { exponent: a }, Weight::NonZero { exponent: b }) => b.cmp(a),
        }
    }
}

/// Polynomial truncated below a weight cutoff, coefficients in F_p.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncPoly {
    p: u16,
    cutoff: u64,
    terms: BTreeMap<Mono, u8>,
}

impl TruncPoly {
    pub fn zero(p: u16, cutoff: u64) -> Self {
        Self { p, cutoff, terms: BTreeMap::new() }
    }

    pub fn scalar(p: u16, cutoff: u64, c: u8) -> Self {
        let mut f = Self::zero(p, cutoff);
        let c = (c as u16 % p) as u8;
        if c != 0 && cutoff > 0 {
            f.terms.insert(Mono::one(), c);
        }
        f
    }

    pub fn one(p: u16, cutoff: u64) -> Self {
        Self::scalar(p, cutoff, 1)
    }

    pub fn var(ctx: &FreeCtx, v: usize) -> Self {
        let mut f = Self::zero(ctx.p, ctx.cutoff);
        let m = ctx.mono(&[v as u32]);
        if m.weight < ctx.cutoff {
            f.terms.insert(m, 1);
        }
        f
    }

    pub fn monomial(p: u16, cutoff: u64, m: Mono, c: u8) -> Self {
        let mut f = Self::zero(p, cutoff);
        let c = (c as u16 % p) as u8;
        if c != 0 && m.weight < cutoff {
            f.terms.insert(m, c);
        }
        f
    }

    pub fn p(&self) -> u16 {
        self.p
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, u8)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Mono) -> u8 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn constant_term(&self) -> u8 {
        self.coeff(&Mono::one())
    }

    /// Minimum weight among nonzero terms; `None` for the zero polynomial.
    pub fn valuation(&self) -> Option<u64> {
        self.terms.keys().next().map(|m| m.weight)
    }

    /// The weight valuation p^{-min weight}, zero for the zero polynomial.
    pub fn weight(&self) -> Weight {
        match self.valuation() {
            Some(exponent) => Weight::NonZero { exponent },
            None => Weight::ZeroAtCutoff,
        }
    }

    pub fn add_term(&mut self, m: Mono, c: u8) {
        if m.weight >= self.cutoff {
            return;
        }
        let c = c as u16 % self.p;
        if c == 0 {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(cur) => {
                let s = ((*cur as u16 + c) % self.p) as u8;
                if s == 0 {
                    self.terms.remove(&m);
                } else {
                    *cur = s;
                }
            }
            None => {
                self.terms.insert(m, c as u8);
            }
        }
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(self.p, other.p, "prime mismatch");
        assert_eq!(self.cutoff, other.cutoff, "cutoff mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let mut out = self.clone();
        let neg = (self.p - 1) as u8;
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), ((c as u16 * neg as u16) % self.p) as u8);
        }
        out
    }

    pub fn scale(&self, c: u8) -> Self {
        let c = c as u16 % self.p;
        let mut out = Self::zero(self.p, self.cutoff);
        if c == 0 {
            return out;
        }
        for (m, &a) in &self.terms {
            out.terms.insert(m.clone(), ((a as u16 * c) % self.p) as u8);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let mut out = Self::zero(self.p, self.cutoff);
        for (ma, &ca) in &self.terms {
            if ma.weight >= self.cutoff {
                continue;
            }
            for (mb, &cb) in &other.terms {
                if ma.weight + mb.weight >= self.cutoff {
                    break;
                }
                out.add_term(ma.concat(mb), ((ca as u16 * cb as u16) % self.p) as u8);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.p, self.cutoff);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Inverse of a unit (nonzero constant term) by geometric series.
    pub fn inv_unit(&self) -> Result<Self> {
        assert!(self.cutoff != u64::MAX, "cannot invert in an unbounded context");
        let c0 = self.constant_term();
        if c0 == 0 {
            return Err(Error::NotAUnit);
        }
        let c0inv = fp_inv(c0, self.p);
        let g = Self::one(self.p, self.cutoff).sub(&self.scale(c0inv));
        debug_assert!(g.valuation().is_none_or(|v| v >= 1));
        let mut acc = Self::one(self.p, self.cutoff);
        let mut pw = g.clone();
        while !pw.is_zero() {
            acc = acc.add(&pw);
            pw = pw.mul(&g);
        }
        Ok(acc.scale(c0inv))
    }

    /// Terms of weight exactly `w`.
    pub fn homogeneous_part(&self, w: u64) -> Self {
        let mut out = Self::zero(self.p, self.cutoff);
        for (m, &c) in self.terms.range(
            Mono { weight: w, letters: Vec::new() }..Mono { weight: w + 1, letters: Vec::new() },
        ) {
            out.terms.insert(m.clone(), c);
        }
        out
    }

    /// Reinterprets the polynomial under a smaller cutoff, dropping terms.
    pub fn retruncate(&self, cutoff: u64) -> Self {
        let mut out = Self::zero(self.p, cutoff);
        for (m, &c) in &self.terms {
            if m.weight < cutoff {
                out.terms.insert(m.clone(), c);
            }
        }
        out
    }

    /// Applies a variable substitution, mapping letter `v` to `images[v]`.
    pub fn substitute(&self, images: &[TruncPoly]) -> Result<Self> {
        let (p, cutoff) = match images.first() {
            Some(f) => (f.p, f.cutoff),
            None => (self.p, self.cutoff),
        };
        let mut out = TruncPoly::zero(p, cutoff);
        for (m, &c) in &self.terms {
            let mut acc = TruncPoly::scalar(p, cutoff, c);
            for &v in &m.letters {
                let img = images.get(v as usize).ok_or(Error::VariableRange {
                    index: v as usize,
                    nvars: images.len(),
                })?;
                acc = acc.mul(img);
                if acc.is_zero() {
                    break;
                }
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    pub fn to_text(&self, ctx: &FreeCtx) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(m, &c)| {
                if m.is_one() {
                    format!("{c}")
                } else if c == 1 {
                    m.to_text(ctx)
                } else {
                    format!("{}*{}", c, m.to_text(ctx))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for TruncPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{c}*{:?}", m))
            .collect();
        write!(f, "TruncPoly[{}]", parts.join(" + "))
    }
}

/// Image of a free group word under `g_v -> images[v]`, with inverses
/// computed as unit inverses.
pub fn magnus_word(word: &GroupWord, images: &[TruncPoly]) -> Result<TruncPoly> {
    let (p, cutoff) = match images.first() {
        Some(f) => (f.p, f.cutoff),
        None => return Err(Error::Invalid("magnus_word needs at least one image".into())),
    };
    let mut acc = TruncPoly::one(p, cutoff);
    for &(gen, e) in word.letters() {
        let img = images.get(gen).ok_or(Error::VariableRange { index: gen, nvars: images.len() })?;
        let base = if e > 0 { img.clone() } else { img.inv_unit()? };
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
    }
    Ok(acc)
}

/// Standard Magnus images `1 + X_v` for every variable of the context.
pub fn magnus_images(ctx: &FreeCtx) -> Vec<TruncPoly> {
    (0..ctx.nvars())
        .map(|v| TruncPoly::one(ctx.p(), ctx.cutoff()).add(&TruncPoly::var(ctx, v)))
        .collect()
}

/// All monomials of weight `< below` in weight-then-lex order.
///
/// Counts first and fails with a budget error if more than `max_count`
/// monomials would be produced, before allocating anything large.
pub fn enumerate_monomials(ctx: &FreeCtx, below: u64, max_count: u128) -> Result<Vec<Mono>> {
    if below > MAX_CUTOFF {
        return Err(Error::CutoffTooLarge(below.min(u32::MAX as u64) as u32));
    }
    let below = below as usize;
    let nvars = ctx.nvars();
    // ways[w] counts words of weight exactly w; saturating keeps the budget
    // check honest without overflow.
    let mut ways = vec![0u128; below.max(1)];
    if below > 0 {
        ways[0] = 1;
    }
    let mut total: u128 = if below > 0 { 1 } else { 0 };
    for w in 1..below {
        let mut s: u128 = 0;
        for v in 0..nvars {
            let wv = ctx.weights[v];
            if wv <= w as u64 {
                s = s.saturating_add(ways[w - wv as usize]);
            }
        }
        ways[w] = s;
        total = total.saturating_add(s);
        if total > max_count {
            return Err(Error::DimBudget { dim: total, max: max_count });
        }
    }
    if total > max_count {
        return Err(Error::DimBudget { dim: total, max: max_count });
    }
    let mut out = Vec::with_capacity(total as usize);
    for w in 0..below as u64 {
        if (w as usize) < ways.len() && ways[w as usize] == 0 {
            continue;
        }
        // Iterative DFS emitting weight-w words in lex order.
        let mut prefix: Vec<u32> = Vec::new();
        let mut rem = w;
        let mut next: Vec<usize> = vec![0];
        loop {
            if rem == 0 {
                out.push(ctx.mono(&prefix));
                let Some(u) = prefix.pop() else { break };
                rem += ctx.weights[u as usize];
                next.pop();
                continue;
            }
            let d = prefix.len();
            match (next[d]..nvars).find(|&v| ctx.weights[v] <= rem) {
                Some(v) => {
                    next[d] = v + 1;
                    prefix.push(v as u32);
                    rem -= ctx.weights[v];
                    next.push(0);
                }
                None => {
                    let Some(u) = prefix.pop() else { break };
                    rem += ctx.weights[u as usize];
                    next.pop();
                }
            }
        }
    }
    Ok(out)
}

/// Power series in one central variable `t` with coefficients in a truncated
/// free algebra, kept to `t`-degrees `< tcut`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TSeries {
    p: u16,
    inner_cutoff: u64,
    coeffs: Vec<TruncPoly>,
}

impl TSeries {
    pub fn zero(p: u16, inner_cutoff: u64, tcut: usize) -> Self {
        Self {
            p,
            inner_cutoff,
            coeffs: (0..tcut).map(|_| TruncPoly::zero(p, inner_cutoff)).collect(),
        }
    }

    pub fn tcut(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, d: usize) -> &TruncPoly {
        &self.coeffs[d]
    }

    pub fn set_coeff(&mut self, d: usize, f: TruncPoly) {
        assert_eq!(f.cutoff(), self.inner_cutoff);
        self.coeffs[d] = f;
    }

    pub fn add_to_coeff(&mut self, d: usize, f: &TruncPoly) {
        if d < self.coeffs.len() {
            self.coeffs[d] = self.coeffs[d].add(f);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|f| f.is_zero())
    }

    /// Least `t`-degree with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|f| !f.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        let mut out = self.clone();
        for (d, f) in other.coeffs.iter().enumerate() {
            out.coeffs[d] = out.coeffs[d].add(f);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        let tcut = self.coeffs.len();
        let mut out = Self::zero(self.p, self.inner_cutoff, tcut);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= tcut {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                out.coeffs[i + j] = out.coeffs[i + j].add(&a.mul(b));
            }
        }
        out
    }
}

/// Splits a polynomial along a weight-respecting variable map: letter `v`
/// goes to `images[v].0` while contributing `images[v].1` to the power of a
/// central variable `t`. Terms landing at `t`-degree `>= tcut` are dropped.
pub fn split_by_weight(
    f: &TruncPoly,
    images: &[(TruncPoly, usize)],
    inner_cutoff: u64,
    tcut: usize,
) -> Result<TSeries> {
    let mut out = TSeries::zero(f.p(), inner_cutoff, tcut);
    for (m, c) in f.terms() {
        let mut acc = TruncPoly::scalar(f.p(), inner_cutoff, c);
        let mut tdeg = 0usize;
        let mut dropped = false;
        for &v in m.letters() {
            let (img, w) = images.get(v as usize).ok_or(Error::VariableRange {
                index: v as usize,
                nvars: images.len(),
            })?;
            tdeg += w;
            if tdeg >= tcut {
                dropped = true;
                break;
            }
            acc = acc.mul(img);
        }
        if !dropped && !acc.is_zero() {
            out.add_to_coeff(tdeg, &acc);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentations::GroupPresentation;

    fn ctx2(nvars: usize, cutoff: u64) -> FreeCtx {
        FreeCtx::uniform(2, "X", nvars, cutoff).unwrap()
    }

    #[test]
    fn geometric_inverse_of_one_plus_x() {
        let ctx = ctx2(1, 4);
        let f = TruncPoly::one(2, 4).add(&TruncPoly::var(&ctx, 0));
        let inv = f.inv_unit().unwrap();
        // (1+X)^{-1} = 1 + X + X^2 + X^3 over F_2 below weight 4.
        let mut expect = TruncPoly::one(2, 4);
        for e in 1..4u32 {
            expect.add_term(ctx.mono(&vec![0; e as usize]), 1);
        }
        assert_eq!(inv, expect);
        assert_eq!(f.mul(&inv), TruncPoly::one(2, 4));
        assert_eq!(inv.mul(&f), TruncPoly::one(2, 4));
    }

    #[test]
    fn inverse_over_odd_prime() {
        let ctx = FreeCtx::uniform(3, "X", 1, 3).unwrap();
        let f = TruncPoly::one(3, 3).add(&TruncPoly::var(&ctx, 0));
        let inv = f.inv_unit().unwrap();
        // 1 - X + X^2 mod 3.
        let mut expect = TruncPoly::one(3, 3);
        expect.add_term(ctx.mono(&[0]), 2);
        expect.add_term(ctx.mono(&[0, 0]), 1);
        assert_eq!(inv, expect);
    }

    #[test]
    fn word_image_of_inverse_generator() {
        let ctx = ctx2(1, 3);
        let pres = GroupPresentation::parse("p = 2\ngens = x\n").unwrap();
        let w = pres.word("x^-1").unwrap();
        let img = magnus_word(&w, &magnus_images(&ctx)).unwrap();
        let mut expect = TruncPoly::one(2, 3);
        expect.add_term(ctx.mono(&[0]), 1);
        expect.add_term(ctx.mono(&[0, 0]), 1);
        assert_eq!(img, expect);
    }

    #[test]
    fn word_image_of_commutator_starts_in_weight_two() {
        let ctx = ctx2(2, 3);
        let pres = GroupPresentation::parse("p = 2\ngens = x, y\n").unwrap();
        let w = pres.word("[x, y]").unwrap();
        let img = magnus_word(&w, &magnus_images(&ctx)).unwrap();
        // 1 + XY + YX below weight 3 over F_2.
        let mut expect = TruncPoly::one(2, 3);
        expect.add_term(ctx.mono(&[0, 1]), 1);
        expect.add_term(ctx.mono(&[1, 0]), 1);
        assert_eq!(img, expect);
        assert_eq!(img.sub(&TruncPoly::one(2, 3)).valuation(), Some(2));
    }

    #[test]
    fn products_match_hand_expansion() {
        // (1+X)(1-X) = 1 - X^2 over F_3 below weight 3.
        let ctx = FreeCtx::uniform(3, "X", 1, 3).unwrap();
        let one = TruncPoly::one(3, 3);
        let x = TruncPoly::var(&ctx, 0);
        let f = one.add(&x);
        let g = one.sub(&x);
        let mut expect = TruncPoly::one(3, 3);
        expect.add_term(ctx.mono(&[0, 0]), 2);
        assert_eq!(f.mul(&g), expect);
        // (1+X)^2 = 1 + X^2 over F_2.
        let ctx2 = FreeCtx::uniform(2, "X", 1, 3).unwrap();
        let f2 = TruncPoly::one(2, 3).add(&TruncPoly::var(&ctx2, 0));
        let mut expect2 = TruncPoly::one(2, 3);
        expect2.add_term(ctx2.mono(&[0, 0]), 1);
        assert_eq!(f2.mul(&f2), expect2);
        // Characteristic-2 cancellation in sums.
        assert!(f2.add(&f2).is_zero());
        // Noncommutativity: XY and YX are distinct.
        let cxy = ctx2_bivar();
        let x = TruncPoly::var(&cxy, 0);
        let y = TruncPoly::var(&cxy, 1);
        assert_ne!(x.mul(&y), y.mul(&x));
        // Field inverse of a constant.
        let two = TruncPoly::scalar(3, 3, 2);
        assert_eq!(two.inv_unit().unwrap(), TruncPoly::scalar(3, 3, 2));
    }

    fn ctx2_bivar() -> FreeCtx {
        FreeCtx::uniform(2, "V", 2, 3).unwrap()
    }

    #[test]
    fn word_image_is_multiplicative() {
        let ctx = ctx2(2, 5);
        let pres = GroupPresentation::parse("p = 2\ngens = x, y\n").unwrap();
        let images = magnus_images(&ctx);
        let u = pres.word("x*y^-1*x").unwrap();
        let v = pres.word("y*x^2*y").unwrap();
        let lhs = magnus_word(&u.concat(&v), &images).unwrap();
        let rhs = magnus_word(&u, &images)
            .unwrap()
            .mul(&magnus_word(&v, &images).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn weight_is_ultrametric_and_multiplicative() {
        let ctx = ctx2(2, 6);
        let x = TruncPoly::var(&ctx, 0);
        let y = TruncPoly::var(&ctx, 1);
        let f = x.mul(&x).add(&y.mul(&x));
        let g = y.clone();
        assert_eq!(f.weight(), Weight::NonZero { exponent: 2 });
        assert_eq!(g.weight(), Weight::NonZero { exponent: 1 });
        // Ultrametric with equality at distinct weights.
        let sum = f.add(&g);
        assert_eq!(sum.weight(), f.weight().max(g.weight()));
        // Multiplicativity when exponents sum below the cutoff.
        assert_eq!(f.mul(&g).weight(), f.weight() * g.weight());
        // Zero and one.
        assert!(TruncPoly::zero(2, 6).weight().is_zero());
        assert_eq!(TruncPoly::one(2, 6).weight(), Weight::NonZero { exponent: 0 });
        // Larger weight value means smaller exponent.
        assert!(g.weight() > f.weight());
    }

    #[test]
    fn monomial_enumeration_is_deglex() {
        let ctx = ctx2(2, 4);
        let monos = enumerate_monomials(&ctx, 4, 1_000).unwrap();
        assert_eq!(monos.len(), 1 + 2 + 4 + 8);
        for pair in monos.windows(2) {
            assert!(pair[0] < pair[1], "not strictly increasing");
        }
        assert!(monos[0].is_one());
        assert_eq!(monos[1], ctx.mono(&[0]));
        assert_eq!(monos[2], ctx.mono(&[1]));
        assert_eq!(monos[3], ctx.mono(&[0, 0]));
    }

    #[test]
    fn weighted_enumeration_respects_weights() {
        let ctx = FreeCtx::new(2, vec!["a".into(), "b".into()], vec![1, 2], 4).unwrap();
        let monos = enumerate_monomials(&ctx, 4, 1_000).unwrap();
        // weight 0: 1; weight 1: a; weight 2: aa, b; weight 3: aaa, ab, ba.
        let texts: Vec<String> = monos.iter().map(|m| m.to_text(&ctx)).collect();
        assert_eq!(texts, vec!["1", "a", "a^2", "b", "a^3", "a*b", "b*a"]);
    }

    #[test]
    fn enumeration_budget_is_enforced() {
        let ctx = ctx2(3, 30);
        match enumerate_monomials(&ctx, 30, 1_000) {
            Err(Error::DimBudget { dim, max }) => {
                assert!(dim > max);
                assert_eq!(max, 1_000);
            }
            other => panic!("expected budget error, got {:?}", other.map(|v| v.len())),
        }
    }

    #[test]
    fn homogeneous_parts_partition_a_polynomial() {
        let ctx = ctx2(2, 4);
        let f = magnus_word(
            &GroupPresentation::parse("p = 2\ngens = x, y\n")
                .unwrap()
                .word("x*y*x^-1")
                .unwrap(),
            &magnus_images(&ctx),
        )
        .unwrap();
        let mut sum = TruncPoly::zero(2, 4);
        for w in 0..4 {
            sum = sum.add(&f.homogeneous_part(w));
        }
        assert_eq!(sum, f);
    }

    #[test]
    fn substitution_matches_direct_product() {
        let ctx = ctx2(2, 4);
        let x = TruncPoly::var(&ctx, 0);
        let y = TruncPoly::var(&ctx, 1);
        let xy = ctx.mono(&[0, 1]);
        let f = TruncPoly::monomial(2, 4, xy, 1);
        // Substitute X -> X+Y, Y -> Y.
        let images = vec![x.add(&y), y.clone()];
        let g = f.substitute(&images).unwrap();
        assert_eq!(g, x.add(&y).mul(&y));
    }

    #[test]
    fn central_split_sends_weight_to_t_degree() {
        let ctx = ctx2(2, 5);
        let inner = FreeCtx::unbounded(2, vec!["a".into()], vec![1]).unwrap();
        let a = TruncPoly::var(&inner, 0);
        let f = TruncPoly::one(2, 5)
            .add(&TruncPoly::monomial(2, 5, ctx.mono(&[0]), 1))
            .add(&TruncPoly::monomial(2, 5, ctx.mono(&[0, 0, 0]), 1));
        let s = split_by_weight(&f, &[(a.clone(), 1), (a.clone(), 1)], u64::MAX, 4).unwrap();
        assert_eq!(s.coeff(0), &TruncPoly::one(2, u64::MAX));
        assert_eq!(s.coeff(1), &a);
        assert!(s.coeff(2).is_zero());
        assert_eq!(s.coeff(3), &a.pow(3));
    }

    #[test]
    fn tseries_multiplication_convolves() {
        let inner = FreeCtx::unbounded(2, vec!["a".into()], vec![1]).unwrap();
        let a = TruncPoly::var(&inner, 0);
        let mut s = TSeries::zero(2, u64::MAX, 3);
        s.set_coeff(0, TruncPoly::one(2, u64::MAX));
        s.set_coeff(1, a.clone());
        let sq = s.mul(&s);
        assert_eq!(sq.coeff(0), &TruncPoly::one(2, u64::MAX));
        assert!(sq.coeff(1).is_zero());
        assert_eq!(sq.coeff(2), &a.mul(&a));
    }
}
