//! Localization triples: formal elements a·C^{-1}·x over a base ring,
//! with sum and product given by block formulas, the scalar embedding
//! λ(r) = (1, 1, r), row/column equivalence transforms, and evaluation into
//! concrete rings where the middle matrices become invertible.
//!
//! Supported base and target rings: the prime field F_p, the truncated
//! polynomial ring F_p[t]/(t^m), and the matrix ring M_r(F_p). Evaluation is
//! a ring homomorphism on triples whose middles invert in the target, which
//! is what the law checks exercise.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::fplinalg::{fp_inv, FpMatrix};
use crate::presentations::is_supported_prime;

/// A base or evaluation ring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RingSpec {
    /// The prime field F_p.
    Fp { p: u16 },
    /// F_p[t]/(t^m); elements are coefficient vectors of length m.
    FpPoly { p: u16, m: usize },
    /// The full matrix ring M_r(F_p).
    FpMat { p: u16, r: usize },
}

/// An element of one of the supported rings.
#[derive(Clone, Debug, PartialEq)]
pub enum RingElem {
    Fp(u8),
    Poly(Vec<u8>),
    Mat(FpMatrix),
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Fp { p } => write!(f, "F_{p}"),
            RingSpec::FpPoly { p, m } => write!(f, "F_{p}[t]/t^{m}"),
            RingSpec::FpMat { p, r } => write!(f, "M_{r}(F_{p})"),
        }
    }
}

impl RingSpec {
    pub fn p(&self) -> u16 {
        match *self {
            RingSpec::Fp { p } | RingSpec::FpPoly { p, .. } | RingSpec::FpMat { p, .. } => p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !is_supported_prime(self.p() as u64) {
            return Err(Error::BadPrime(self.p() as u64));
        }
        match *self {
            RingSpec::FpPoly { m: 0, .. } => {
                Err(Error::Invalid("truncation order m must be positive".into()))
            }
            RingSpec::FpMat { r: 0, .. } => {
                Err(Error::Invalid("matrix size r must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Size of the F_p block one element flattens to.
    fn block(&self) -> usize {
        match *self {
            RingSpec::Fp { .. } => 1,
            RingSpec::FpPoly { m, .. } => m,
            RingSpec::FpMat { r, .. } => r,
        }
    }

    pub fn zero(&self) -> RingElem {
        match *self {
            RingSpec::Fp { .. } => RingElem::Fp(0),
            RingSpec::FpPoly { m, .. } => RingElem::Poly(vec![0; m]),
            RingSpec::FpMat { p, r } => RingElem::Mat(FpMatrix::new(p, r, r)),
        }
    }

    pub fn one(&self) -> RingElem {
        self.from_int(1)
    }

    /// The image of an integer scalar.
    pub fn from_int(&self, c: i64) -> RingElem {
        let p = self.p();
        let c = c.rem_euclid(p as i64) as u8;
        match *self {
            RingSpec::Fp { .. } => RingElem::Fp(c),
            RingSpec::FpPoly { m, .. } => {
                let mut v = vec![0; m];
                v[0] = c;
                RingElem::Poly(v)
            }
            RingSpec::FpMat { p, r } => {
                let mut mt = FpMatrix::new(p, r, r);
                for i in 0..r {
                    mt.set(i, i, c);
                }
                RingElem::Mat(mt)
            }
        }
    }

    /// Shape check: the element belongs to this ring.
    pub fn admits(&self, e: &RingElem) -> bool {
        match (self, e) {
            (RingSpec::Fp { p }, RingElem::Fp(c)) => (*c as u16) < *p,
            (RingSpec::FpPoly { p, m }, RingElem::Poly(v)) => {
                v.len() == *m && v.iter().all(|&c| (c as u16) < *p)
            }
            (RingSpec::FpMat { p, r }, RingElem::Mat(mt)) => {
                mt.p() == *p && mt.rows() == *r && mt.cols() == *r
            }
            _ => false,
        }
    }

    pub fn add(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let p = self.p();
        match (a, b) {
            (RingElem::Fp(x), RingElem::Fp(y)) => {
                RingElem::Fp(((*x as u16 + *y as u16) % p) as u8)
            }
            (RingElem::Poly(x), RingElem::Poly(y)) => RingElem::Poly(
                x.iter()
                    .zip(y)
                    .map(|(&a, &b)| ((a as u16 + b as u16) % p) as u8)
                    .collect(),
            ),
            (RingElem::Mat(x), RingElem::Mat(y)) => {
                let mut out = x.clone();
                for i in 0..y.rows() {
                    for (j, c) in y.row(i).nonzero_entries() {
                        out.add_assign_entry(i, j, c);
                    }
                }
                RingElem::Mat(out)
            }
            _ => panic!("ring element kind mismatch"),
        }
    }

    pub fn neg(&self, a: &RingElem) -> RingElem {
        let p = self.p();
        let s = (p - 1) as u8;
        match a {
            RingElem::Fp(x) => RingElem::Fp(((*x as u16 * s as u16) % p) as u8),
            RingElem::Poly(x) => {
                RingElem::Poly(x.iter().map(|&c| ((c as u16 * s as u16) % p) as u8).collect())
            }
            RingElem::Mat(x) => {
                let mut out = FpMatrix::new(p, x.rows(), x.cols());
                for i in 0..x.rows() {
                    for (j, c) in x.row(i).nonzero_entries() {
                        out.set(i, j, ((c as u16 * s as u16) % p) as u8);
                    }
                }
                RingElem::Mat(out)
            }
        }
    }

    pub fn sub(&self, a: &RingElem, b: &RingElem) -> RingElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &RingElem, b: &RingElem) -> RingElem {
        let p = self.p();
        match (a, b) {
            (RingElem::Fp(x), RingElem::Fp(y)) => {
                RingElem::Fp(((*x as u16 * *y as u16) % p) as u8)
            }
            (RingElem::Poly(x), RingElem::Poly(y)) => {
                let m = x.len();
                let mut out = vec![0u8; m];
                for (i, &xi) in x.iter().enumerate() {
                    if xi == 0 {
                        continue;
                    }
                    for (j, &yj) in y.iter().enumerate() {
                        if i + j >= m {
                            break;
                        }
                        out[i + j] =
                            ((out[i + j] as u16 + xi as u16 * yj as u16) % p) as u8;
                    }
                }
                RingElem::Poly(out)
            }
            (RingElem::Mat(x), RingElem::Mat(y)) => RingElem::Mat(x.mul(y)),
            _ => panic!("ring element kind mismatch"),
        }
    }

    pub fn is_zero(&self, a: &RingElem) -> bool {
        a == &self.zero()
    }

    pub fn is_unit(&self, a: &RingElem) -> bool {
        match a {
            RingElem::Fp(c) => *c != 0,
            RingElem::Poly(v) => v[0] != 0,
            RingElem::Mat(m) => m.inverse().is_some(),
        }
    }

    pub fn inv(&self, a: &RingElem) -> Option<RingElem> {
        let p = self.p();
        match a {
            RingElem::Fp(c) => (*c != 0).then(|| RingElem::Fp(fp_inv(*c, p))),
            RingElem::Poly(v) => {
                if v[0] == 0 {
                    return None;
                }
                let m = v.len();
                let c0inv = fp_inv(v[0], p) as u16;
                let mut out = vec![0u8; m];
                out[0] = c0inv as u8;
                // b_k = -a_0^{-1} Σ_{i=1..k} a_i b_{k-i}
                for k in 1..m {
                    let mut s: u32 = 0;
                    for i in 1..=k {
                        s += v[i] as u32 * out[k - i] as u32;
                    }
                    let s = (s % p as u32) as u16;
                    out[k] = ((p - s) % p * c0inv % p) as u8;
                }
                Some(RingElem::Poly(out))
            }
            RingElem::Mat(m) => m.inverse().map(RingElem::Mat),
        }
    }

    pub fn random<R: Rng>(&self, rng: &mut R) -> RingElem {
        let p = self.p();
        match *self {
            RingSpec::Fp { .. } => RingElem::Fp(rng.gen_range(0..p) as u8),
            RingSpec::FpPoly { m, .. } => {
                RingElem::Poly((0..m).map(|_| rng.gen_range(0..p) as u8).collect())
            }
            RingSpec::FpMat { r, .. } => RingElem::Mat(FpMatrix::random(p, r, r, rng)),
        }
    }

    pub fn random_unit<R: Rng>(&self, rng: &mut R) -> RingElem {
        loop {
            let e = self.random(rng);
            if self.is_unit(&e) {
                return e;
            }
        }
    }
}

/// A rectangular matrix over one of the supported rings.
#[derive(Clone, Debug, PartialEq)]
pub struct RingMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<RingElem>,
}

impl RingMat {
    pub fn zero(spec: &RingSpec, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: (0..rows * cols).map(|_| spec.zero()).collect(),
        }
    }

    pub fn identity(spec: &RingSpec, n: usize) -> Self {
        let mut m = Self::zero(spec, n, n);
        for i in 0..n {
            m.set(i, i, spec.one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> RingElem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn get(&self, i: usize, j: usize) -> &RingElem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: RingElem) {
        self.data[i * self.cols + j] = e;
    }

    pub fn add(&self, spec: &RingSpec, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| spec.add(self.get(i, j), other.get(i, j)))
    }

    pub fn neg(&self, spec: &RingSpec) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| spec.neg(self.get(i, j)))
    }

    pub fn mul(&self, spec: &RingSpec, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = spec.zero();
            for k in 0..self.cols {
                acc = spec.add(&acc, &spec.mul(self.get(i, k), other.get(k, j)));
            }
            acc
        })
    }

    /// Entrywise map (used for homomorphisms).
    pub fn map(&self, mut f: impl FnMut(&RingElem) -> Result<RingElem>) -> Result<Self> {
        let mut data = Vec::with_capacity(self.data.len());
        for e in &self.data {
            data.push(f(e)?);
        }
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        Self::from_fn(self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.get(i, j).clone()
            } else {
                other.get(i - self.rows, j).clone()
            }
        })
    }

    pub fn block_diag(&self, spec: &RingSpec, other: &Self) -> Self {
        Self::from_fn(self.rows + other.rows, self.cols + other.cols, |i, j| {
            if i < self.rows && j < self.cols {
                self.get(i, j).clone()
            } else if i >= self.rows && j >= self.cols {
                other.get(i - self.rows, j - self.cols).clone()
            } else {
                spec.zero()
            }
        })
    }

    pub fn random<R: Rng>(spec: &RingSpec, rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| spec.random(rng))
    }

    /// A random invertible square matrix: unit lower triangular times a
    /// diagonal of units times unit upper triangular.
    pub fn random_invertible<R: Rng>(spec: &RingSpec, n: usize, rng: &mut R) -> Self {
        let mut lower = Self::identity(spec, n);
        let mut upper = Self::identity(spec, n);
        for i in 0..n {
            for j in 0..i {
                lower.set(i, j, spec.random(rng));
                upper.set(j, i, spec.random(rng));
            }
        }
        let mut diag = Self::zero(spec, n, n);
        for i in 0..n {
            diag.set(i, i, spec.random_unit(rng));
        }
        lower.mul(spec, &diag).mul(spec, &upper)
    }

    /// Flattens entries to F_p blocks: polynomials become upper triangular
    /// Toeplitz blocks in the nilpotent shift, matrices embed as themselves.
    fn flatten(&self, spec: &RingSpec) -> FpMatrix {
        let b = spec.block();
        let mut out = FpMatrix::new(spec.p(), self.rows * b, self.cols * b);
        for i in 0..self.rows {
            for j in 0..self.cols {
                match self.get(i, j) {
                    RingElem::Fp(c) => out.set(i, j, *c),
                    RingElem::Poly(v) => {
                        for (d, &c) in v.iter().enumerate() {
                            for r in 0..b - d {
                                out.set(i * b + r, j * b + r + d, c);
                            }
                        }
                    }
                    RingElem::Mat(m) => {
                        for r in 0..b {
                            for (c, val) in m.row(r).nonzero_entries() {
                                out.set(i * b + r, j * b + c, val);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn unflatten(spec: &RingSpec, flat: &FpMatrix, rows: usize, cols: usize) -> Self {
        let b = spec.block();
        Self::from_fn(rows, cols, |i, j| match spec {
            RingSpec::Fp { .. } => RingElem::Fp(flat.get(i, j)),
            RingSpec::FpPoly { .. } => {
                let v: Vec<u8> = (0..b).map(|d| flat.get(i * b, j * b + d)).collect();
                RingElem::Poly(v)
            }
            RingSpec::FpMat { p, .. } => {
                let mut m = FpMatrix::new(*p, b, b);
                for r in 0..b {
                    for c in 0..b {
                        m.set(r, c, flat.get(i * b + r, j * b + c));
                    }
                }
                RingElem::Mat(m)
            }
        })
    }

    /// Inverse over the entry ring, if it exists. Inversion happens on the
    /// flattened F_p matrix; the inverse of a matrix in the flattened image
    /// of M_n(ring) stays in that image, so reading the blocks back is exact.
    pub fn try_inverse(&self, spec: &RingSpec) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse needs a square matrix");
        let flat = self.flatten(spec);
        let inv = flat.inverse()?;
        if let RingSpec::FpPoly { .. } = spec {
            // Each block of the inverse must again be upper triangular
            // Toeplitz, i.e. a polynomial in the shift.
            let b = spec.block();
            debug_assert!((0..self.rows * b).all(|r| {
                (0..self.cols * b).all(|c| {
                    let (rb, ro) = (r / b, r % b);
                    let (cb, co) = (c / b, c % b);
                    if co < ro {
                        inv.get(r, c) == 0
                    } else {
                        inv.get(r, c) == inv.get(rb * b, cb * b + (co - ro))
                    }
                })
            }));
        }
        Some(Self::unflatten(spec, &inv, self.rows, self.cols))
    }
}

/// A formal element a·C^{-1}·x: row, square middle, column.
#[derive(Clone, Debug, PartialEq)]
pub struct LocTriple {
    pub a: RingMat,
    pub c: RingMat,
    pub x: RingMat,
}

impl LocTriple {
    pub fn new(a: RingMat, c: RingMat, x: RingMat) -> Result<Self> {
        let n = c.rows;
        if n == 0 || c.cols != n || a.rows != 1 || a.cols != n || x.rows != n || x.cols != 1 {
            return Err(Error::Shape(format!(
                "triple needs shapes 1xn, nxn, nx1; got {}x{}, {}x{}, {}x{}",
                a.rows, a.cols, c.rows, c.cols, x.rows, x.cols
            )));
        }
        Ok(Self { a, c, x })
    }

    /// Middle matrix size.
    pub fn size(&self) -> usize {
        self.c.rows
    }
}

/// The scalar embedding r ↦ (1, 1, r).
pub fn loc_lambda(spec: &RingSpec, r: RingElem) -> LocTriple {
    let a = RingMat::from_fn(1, 1, |_, _| spec.one());
    let c = RingMat::from_fn(1, 1, |_, _| spec.one());
    let x = RingMat::from_fn(1, 1, |_, _| r.clone());
    LocTriple { a, c, x }
}

/// Sum: ((a b), diag(C, D), (x; y)).
pub fn loc_add(spec: &RingSpec, t1: &LocTriple, t2: &LocTriple) -> LocTriple {
    LocTriple {
        a: t1.a.hstack(&t2.a),
        c: t1.c.block_diag(spec, &t2.c),
        x: t1.x.vstack(&t2.x),
    }
}

/// Product: ((a 0), [[C, -x·b], [0, D]], (0; y)).
pub fn loc_mul(spec: &RingSpec, t1: &LocTriple, t2: &LocTriple) -> LocTriple {
    let n = t1.size();
    let m = t2.size();
    let a = t1.a.hstack(&RingMat::zero(spec, 1, m));
    let top_right = t1.x.mul(spec, &t2.a).neg(spec);
    let c = RingMat::from_fn(n + m, n + m, |i, j| {
        if i < n && j < n {
            t1.c.get(i, j).clone()
        } else if i < n {
            top_right.get(i, j - n).clone()
        } else if j >= n {
            t2.c.get(i - n, j - n).clone()
        } else {
            spec.zero()
        }
    });
    let x = RingMat::zero(spec, n, 1).vstack(&t2.x);
    LocTriple { a, c, x }
}

/// Row/column equivalence: (aU, VCU, Vx) for invertible U, V.
pub fn r1_transform(spec: &RingSpec, t: &LocTriple, u: &RingMat, v: &RingMat) -> Result<LocTriple> {
    let n = t.size();
    if u.rows != n || u.cols != n || v.rows != n || v.cols != n {
        return Err(Error::Shape(format!(
            "transform needs {n}x{n} matrices, got {}x{} and {}x{}",
            u.rows, u.cols, v.rows, v.cols
        )));
    }
    Ok(LocTriple {
        a: t.a.mul(spec, u),
        c: v.mul(spec, &t.c).mul(spec, u),
        x: v.mul(spec, &t.x),
    })
}

/// The canonical homomorphism between supported rings, applied to one
/// element: identity F_p -> F_p, constants into polynomials and scalar
/// matrices, truncation between polynomial rings.
pub fn hom_elem(src: &RingSpec, dst: &RingSpec, e: &RingElem) -> Result<RingElem> {
    let no_hom = || Error::NoHom { src: src.to_string(), dst: dst.to_string() };
    if src.p() != dst.p() {
        return Err(no_hom());
    }
    match (src, dst, e) {
        (RingSpec::Fp { .. }, RingSpec::Fp { .. }, RingElem::Fp(c)) => Ok(RingElem::Fp(*c)),
        (RingSpec::Fp { .. }, RingSpec::FpPoly { .. } | RingSpec::FpMat { .. }, RingElem::Fp(c)) => {
            Ok(dst.from_int(*c as i64))
        }
        (RingSpec::FpPoly { m, .. }, RingSpec::FpPoly { m: m2, .. }, RingElem::Poly(v)) => {
            if m2 > m {
                return Err(no_hom());
            }
            Ok(RingElem::Poly(v[..*m2].to_vec()))
        }
        (RingSpec::FpMat { r, .. }, RingSpec::FpMat { r: r2, .. }, RingElem::Mat(mt)) => {
            if r != r2 {
                return Err(no_hom());
            }
            Ok(RingElem::Mat(mt.clone()))
        }
        _ => Err(no_hom()),
    }
}

/// Evaluates a triple in a target ring: φ(a)·φ(C)^{-1}·φ(x).
pub fn loc_eval(
    t: &LocTriple,
    base: &RingSpec,
    target: &RingSpec,
) -> Result<RingElem> {
    let a = t.a.map(|e| hom_elem(base, target, e))?;
    let c = t.c.map(|e| hom_elem(base, target, e))?;
    let x = t.x.map(|e| hom_elem(base, target, e))?;
    let cinv = c.try_inverse(target).ok_or(Error::NotInvertible)?;
    let out = a.mul(target, &cinv).mul(target, &x);
    Ok(out.get(0, 0).clone())
}

/// A random triple with an invertible middle (so every evaluation under an
/// injective-on-units homomorphism succeeds).
pub fn random_triple<R: Rng>(spec: &RingSpec, max_size: usize, rng: &mut R) -> LocTriple {
    let n = rng.gen_range(1..=max_size.max(1));
    LocTriple {
        a: RingMat::random(spec, 1, n, rng),
        c: RingMat::random_invertible(spec, n, rng),
        x: RingMat::random(spec, n, 1, rng),
    }
}

/// Outcome of the ring-law checks over a batch of triples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LawSummary {
    /// Pairs whose sum/product laws were tested.
    pub pairs: usize,
    /// Triples given an equivalence-transform test.
    pub transforms: usize,
    pub add_failures: usize,
    pub mul_failures: usize,
    pub transform_failures: usize,
    /// Evaluations skipped because a middle matrix failed to invert.
    pub skipped: usize,
}

impl LawSummary {
    pub fn all_passed(&self) -> bool {
        self.add_failures == 0 && self.mul_failures == 0 && self.transform_failures == 0
    }
}

/// Checks that evaluation is a ring homomorphism on consecutive pairs and
/// that row/column transforms by random invertible matrices preserve the
/// value of each triple. Deterministic for a fixed seed.
pub fn check_laws(
    base: &RingSpec,
    triples: &[LocTriple],
    target: &RingSpec,
    seed: u64,
) -> Result<LawSummary> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut summary = LawSummary::default();
    for pair in triples.windows(2) {
        let (t1, t2) = (&pair[0], &pair[1]);
        let (e1, e2) = match (loc_eval(t1, base, target), loc_eval(t2, base, target)) {
            (Ok(e1), Ok(e2)) => (e1, e2),
            _ => {
                summary.skipped += 1;
                continue;
            }
        };
        summary.pairs += 1;
        let sum = loc_eval(&loc_add(base, t1, t2), base, target)?;
        if sum != target.add(&e1, &e2) {
            summary.add_failures += 1;
        }
        let prod = loc_eval(&loc_mul(base, t1, t2), base, target)?;
        if prod != target.mul(&e1, &e2) {
            summary.mul_failures += 1;
        }
    }
    for t in triples {
        let before = match loc_eval(t, base, target) {
            Ok(e) => e,
            Err(_) => {
                summary.skipped += 1;
                continue;
            }
        };
        summary.transforms += 1;
        let n = t.size();
        let u = RingMat::random_invertible(base, n, &mut rng);
        let v = RingMat::random_invertible(base, n, &mut rng);
        let moved = r1_transform(base, t, &u, &v)?;
        if loc_eval(&moved, base, target)? != before {
            summary.transform_failures += 1;
        }
    }
    Ok(summary)
}

fn elem_from_json(spec: &RingSpec, v: &serde_json::Value) -> Result<RingElem> {
    let bad = |what: &str| Error::Invalid(format!("expected {what} for a {spec} element"));
    let p = spec.p();
    let scalar = |x: &serde_json::Value, what: &str| -> Result<u8> {
        let n = x.as_i64().ok_or_else(|| bad(what))?;
        Ok(n.rem_euclid(p as i64) as u8)
    };
    match *spec {
        RingSpec::Fp { .. } => Ok(RingElem::Fp(scalar(v, "a number")?)),
        RingSpec::FpPoly { m, .. } => {
            let arr = v.as_array().ok_or_else(|| bad("a coefficient array"))?;
            if arr.len() > m {
                return Err(Error::Invalid(format!(
                    "coefficient array longer than the truncation order {m}"
                )));
            }
            let mut out = vec![0u8; m];
            for (i, x) in arr.iter().enumerate() {
                out[i] = scalar(x, "a number")?;
            }
            Ok(RingElem::Poly(out))
        }
        RingSpec::FpMat { r, .. } => {
            let arr = v.as_array().ok_or_else(|| bad("a matrix (array of rows)"))?;
            if arr.len() != r {
                return Err(Error::Invalid(format!("matrix needs {r} rows")));
            }
            let mut m = FpMatrix::new(p, r, r);
            for (i, row) in arr.iter().enumerate() {
                let row = row.as_array().ok_or_else(|| bad("a row array"))?;
                if row.len() != r {
                    return Err(Error::Invalid(format!("matrix row needs {r} entries")));
                }
                for (j, x) in row.iter().enumerate() {
                    m.set(i, j, scalar(x, "a number")?);
                }
            }
            Ok(RingElem::Mat(m))
        }
    }
}

pub fn elem_to_json(e: &RingElem) -> serde_json::Value {
    match e {
        RingElem::Fp(c) => serde_json::json!(c),
        RingElem::Poly(v) => serde_json::json!(v),
        RingElem::Mat(m) => {
            let rows: Vec<Vec<u8>> = (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
                .collect();
            serde_json::json!(rows)
        }
    }
}

fn mat_from_json(spec: &RingSpec, v: &serde_json::Value, what: &str) -> Result<RingMat> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Invalid(format!("{what} must be an array of rows")))?;
    if rows.is_empty() {
        return Err(Error::Invalid(format!("{what} must be nonempty")));
    }
    let mut parsed: Vec<Vec<RingElem>> = Vec::with_capacity(rows.len());
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Invalid(format!("{what} rows must be arrays")))?;
        let mut out = Vec::with_capacity(row.len());
        for e in row {
            out.push(elem_from_json(spec, e)?);
        }
        parsed.push(out);
    }
    let cols = parsed[0].len();
    if cols == 0 || parsed.iter().any(|r| r.len() != cols) {
        return Err(Error::Invalid(format!("{what} rows must share a positive length")));
    }
    Ok(RingMat::from_fn(parsed.len(), cols, |i, j| parsed[i][j].clone()))
}

#[derive(Deserialize)]
struct TriplesFile {
    ring: RingSpec,
    triples: Vec<TripleJson>,
}

#[derive(Deserialize)]
struct TripleJson {
    a: serde_json::Value,
    c: serde_json::Value,
    x: serde_json::Value,
}

/// Parses a triples file: `{"ring": {...}, "triples": [{"a": [[...]],
/// "c": [[...], ...], "x": [[...], ...]}, ...]}` with `a` a single row and
/// `x` a column given as single-entry rows.
pub fn parse_triples_file(text: &str) -> Result<(RingSpec, Vec<LocTriple>)> {
    let file: TriplesFile = serde_json::from_str(text)?;
    file.ring.validate()?;
    let mut triples = Vec::with_capacity(file.triples.len());
    for t in &file.triples {
        let a = mat_from_json(&file.ring, &t.a, "a")?;
        let c = mat_from_json(&file.ring, &t.c, "c")?;
        let x = mat_from_json(&file.ring, &t.x, "x")?;
        triples.push(LocTriple::new(a, c, x)?);
    }
    Ok((file.ring, triples))
}
