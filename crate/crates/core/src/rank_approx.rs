//! Normalized rank approximation across congruence levels.
//!
//! A matrix over the group ring maps to the level-k quotient algebra, is
//! blown up to an F_p matrix through the right regular representation of the
//! finite quotient group, and its rank divided by the group order gives the
//! level-k normalized rank. As k grows these exact rationals approach the
//! rank of the matrix over the full completed group algebra, and for the
//! group families treated here that limit is an integer; the report tracks
//! the gap to the nearest integer as the convergence diagnostic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fplinalg::FpMatrix;
use crate::presentations::{GroupPresentation, GroupWord};
use crate::quotient::{build_quotient, finite_quotient, FiniteQuotient};

/// A matrix with entries in the group ring F_p[G]: each entry is a finite
/// sum of (coefficient, group word) terms.
#[derive(Clone, Debug)]
pub struct GroupRingMatrix {
    p: u16,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Vec<(u8, GroupWord)>>>,
}

impl GroupRingMatrix {
    pub fn zero(p: u16, rows: usize, cols: usize) -> Self {
        Self {
            p,
            rows,
            cols,
            entries: vec![vec![Vec::new(); cols]; rows],
        }
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

    /// Sets one entry from signed-coefficient terms: coefficients are reduced
    /// mod p, like terms merged, zero terms dropped.
    pub fn set_entry(&mut self, i: usize, j: usize, terms: Vec<(i64, GroupWord)>) {
        let p = self.p as i64;
        let mut merged: Vec<(u8, GroupWord)> = Vec::new();
        for (c, w) in terms {
            let c = c.rem_euclid(p) as u16;
            match merged.iter_mut().find(|(_, u)| *u == w) {
                Some(slot) => slot.0 = ((slot.0 as u16 + c) % self.p) as u8,
                None => merged.push(((c % self.p) as u8, w)),
            }
        }
        merged.retain(|(c, _)| *c != 0);
        self.entries[i][j] = merged;
    }

    pub fn entry(&self, i: usize, j: usize) -> &[(u8, GroupWord)] {
        &self.entries[i][j]
    }

    /// The 1x1 matrix (g - 1) for a generator index.
    pub fn gen_minus_one(pres: &GroupPresentation, gen: usize) -> Self {
        let mut m = Self::zero(pres.p, 1, 1);
        m.set_entry(0, 0, vec![(1, GroupWord::generator(gen)), (-1, GroupWord::identity())]);
        m
    }

    /// The 1xN row (g_1 - 1, ..., g_N - 1) over the given generator indices.
    pub fn aug_row(pres: &GroupPresentation, gens: &[usize]) -> Self {
        let mut m = Self::zero(pres.p, 1, gens.len());
        for (j, &g) in gens.iter().enumerate() {
            m.set_entry(0, j, vec![(1, GroupWord::generator(g)), (-1, GroupWord::identity())]);
        }
        m
    }

    /// The identity entry matrix of a given size.
    pub fn identity(pres: &GroupPresentation, n: usize) -> Self {
        let mut m = Self::zero(pres.p, n, n);
        for i in 0..n {
            m.set_entry(i, i, vec![(1, GroupWord::identity())]);
        }
        m
    }

    pub fn delete_row(&self, i: usize) -> Self {
        let mut entries = self.entries.clone();
        entries.remove(i);
        Self { p: self.p, rows: self.rows - 1, cols: self.cols, entries }
    }

    pub fn delete_col(&self, j: usize) -> Self {
        let mut entries = self.entries.clone();
        for row in entries.iter_mut() {
            row.remove(j);
        }
        Self { p: self.p, rows: self.rows, cols: self.cols - 1, entries }
    }

    /// Block-diagonal stack of two matrices over the same prime.
    pub fn block_diag(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let mut m = Self::zero(self.p, self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.entries[i][j] = self.entries[i][j].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m.entries[self.rows + i][self.cols + j] = other.entries[i][j].clone();
            }
        }
        m
    }
}

#[derive(Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Vec<(i64, String)>>>,
}

/// Parses the matrix JSON format
/// `{"rows": n, "cols": m, "entries": [[[[c, "word"], ...], ...], ...]}`
/// with words in the presentation's generator syntax.
pub fn matrix_from_json(text: &str, pres: &GroupPresentation) -> Result<GroupRingMatrix> {
    let spec: MatrixJson = serde_json::from_str(text)?;
    if spec.entries.len() != spec.rows || spec.entries.iter().any(|r| r.len() != spec.cols) {
        return Err(Error::Shape(format!(
            "entries shape does not match {}x{}",
            spec.rows, spec.cols
        )));
    }
    let mut m = GroupRingMatrix::zero(pres.p, spec.rows, spec.cols);
    for (i, row) in spec.entries.iter().enumerate() {
        for (j, terms) in row.iter().enumerate() {
            let mut parsed = Vec::with_capacity(terms.len());
            for (c, expr) in terms {
                parsed.push((*c, pres.word(expr)?));
            }
            m.set_entry(i, j, parsed);
        }
    }
    Ok(m)
}

/// Blows a group-ring matrix up to an F_p matrix: block (i, j) is the matrix
/// of right multiplication by entry (i, j) on the basis indexed by the group
/// elements, so block[h, h'] is the coefficient of h' in h * A[i][j].
pub fn regular_rep(fq: &FiniteQuotient, a: &GroupRingMatrix) -> Result<FpMatrix> {
    let q = fq.order();
    let mut out = FpMatrix::new(a.p, a.rows * q, a.cols * q);
    for i in 0..a.rows {
        for j in 0..a.cols {
            for (c, word) in &a.entries[i][j] {
                let perm = fq.word_perm(word)?;
                for (h, &hw) in perm.iter().enumerate() {
                    out.add_assign_entry(i * q + h, j * q + hw, *c);
                }
            }
        }
    }
    Ok(out)
}

/// One level of the approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct RankLevel {
    pub k: u32,
    /// |G : D_k|, the order of the level-k quotient.
    pub order: u64,
    /// Rank of the blown-up matrix over F_p.
    pub rank: u64,
    /// rank / order, exact.
    pub value: BigRational,
    /// Distance to the nearest integer (ties round up).
    pub gap: BigRational,
    /// The nearest integer itself.
    pub nearest: BigInt,
}

/// Budgets and parallelism for a rank run.
#[derive(Clone, Debug)]
pub struct RankConfig {
    pub max_dim: u128,
    pub max_order: usize,
    pub jobs: Option<usize>,
}

impl Default for RankConfig {
    fn default() -> Self {
        Self { max_dim: 2_000_000, max_order: 20_000, jobs: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Truncation {
    pub k: u32,
    pub reason: String,
}

/// Rank values across the requested levels, possibly truncated by budgets.
#[derive(Clone, Debug)]
pub struct RankReport {
    pub p: u16,
    pub rows: usize,
    pub cols: usize,
    pub levels: Vec<RankLevel>,
    pub truncated: Option<Truncation>,
}

/// Nearest integer with half-up tie breaking, and the distance to it.
pub fn nearest_integer(v: &BigRational) -> (BigInt, BigRational) {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let nearest = (v + half).floor().to_integer();
    let gap = (v - BigRational::from(nearest.clone())).abs();
    (nearest, gap)
}

/// Computes the level-k normalized rank of `a`.
pub fn rank_at_level(
    pres: &GroupPresentation,
    a: &GroupRingMatrix,
    k: u32,
    cfg: &RankConfig,
) -> Result<RankLevel> {
    let alg = build_quotient(pres, k, cfg.max_dim)?;
    let fq = finite_quotient(&alg, cfg.max_order)?;
    let rep = regular_rep(&fq, a)?;
    let rank = rep.rank() as u64;
    let order = fq.order() as u64;
    let value = BigRational::new(BigInt::from(rank), BigInt::from(order));
    let (nearest, gap) = nearest_integer(&value);
    Ok(RankLevel { k, order, rank, value, gap, nearest })
}

fn is_budget(e: &Error) -> bool {
    matches!(
        e,
        Error::DimBudget { .. } | Error::OrderBudget { .. } | Error::CutoffTooLarge(_)
    )
}

/// Runs the pipeline at every level in `k_list` (ascending, nonempty).
/// Levels run in parallel; a budget failure truncates the report at the
/// first failing level, any other failure is an error.
pub fn rank_sequence(
    pres: &GroupPresentation,
    a: &GroupRingMatrix,
    k_list: &[u32],
    cfg: &RankConfig,
) -> Result<RankReport> {
    if k_list.is_empty() {
        return Err(Error::Invalid("k list must be nonempty".into()));
    }
    if k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("k list must be strictly ascending".into()));
    }
    if a.p != pres.p {
        return Err(Error::Invalid("matrix and presentation prime differ".into()));
    }
    let run = || -> Vec<(u32, Result<RankLevel>)> {
        k_list
            .par_iter()
            .map(|&k| (k, rank_at_level(pres, a, k, cfg)))
            .collect()
    };
    let results = match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let mut levels = Vec::new();
    let mut truncated = None;
    for (k, res) in results {
        match res {
            Ok(level) => levels.push(level),
            Err(e) if is_budget(&e) => {
                truncated = Some(Truncation { k, reason: e.to_string() });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(RankReport {
        p: pres.p,
        rows: a.rows,
        cols: a.cols,
        levels,
        truncated,
    })
}

/// Integrality diagnostics for a computed report.
#[derive(Clone, Debug)]
pub struct IntegralityReport {
    /// Nearest integer to the last level's value.
    pub nearest: BigInt,
    pub final_gap: BigRational,
    /// Gap at every level, in level order.
    pub gaps: Vec<BigRational>,
    pub strictly_decreasing: bool,
    /// Final gap is strictly below the threshold.
    pub consistent: bool,
    pub threshold: BigRational,
}

/// Summarizes how close the sequence sits to an integer limit; `None` when
/// the report has no completed levels.
pub fn integrality_report(r: &RankReport, threshold: &BigRational) -> Option<IntegralityReport> {
    let last = r.levels.last()?;
    let gaps: Vec<BigRational> = r.levels.iter().map(|l| l.gap.clone()).collect();
    let strictly_decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    Some(IntegralityReport {
        nearest: last.nearest.clone(),
        final_gap: last.gap.clone(),
        gaps,
        strictly_decreasing,
        consistent: last.gap < *threshold,
        threshold: threshold.clone(),
    })
}

/// Checks that no single row or column deletion increases the level-k rank.
pub fn submatrix_check(
    pres: &GroupPresentation,
    a: &GroupRingMatrix,
    k: u32,
    cfg: &RankConfig,
) -> Result<bool> {
    let alg = build_quotient(pres, k, cfg.max_dim)?;
    let fq = finite_quotient(&alg, cfg.max_order)?;
    let full = regular_rep(&fq, a)?.rank();
    if a.rows > 1 {
        for i in 0..a.rows {
            if regular_rep(&fq, &a.delete_row(i))?.rank() > full {
                return Ok(false);
            }
        }
    }
    if a.cols > 1 {
        for j in 0..a.cols {
            if regular_rep(&fq, &a.delete_col(j))?.rank() > full {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// CSV serialization: one row per level, plus a trailing comment on
/// truncation. Byte-deterministic for a given report.
pub fn report_csv(r: &RankReport) -> String {
    let mut out = String::from("k,order,raw_rank,value_num,value_den,gap_num,gap_den\n");
    for l in &r.levels {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            l.k,
            l.order,
            l.rank,
            l.value.numer(),
            l.value.denom(),
            l.gap.numer(),
            l.gap.denom()
        ));
    }
    if let Some(t) = &r.truncated {
        out.push_str(&format!("# truncated: k={} {}\n", t.k, t.reason));
    }
    out
}

/// JSON serialization mirroring the CSV; big integers appear as strings.
pub fn report_json(r: &RankReport) -> String {
    let levels: Vec<serde_json::Value> = r
        .levels
        .iter()
        .map(|l| {
            serde_json::json!({
                "k": l.k,
                "order": l.order,
                "raw_rank": l.rank,
                "value": { "num": l.value.numer().to_string(), "den": l.value.denom().to_string() },
                "gap": { "num": l.gap.numer().to_string(), "den": l.gap.denom().to_string() },
                "nearest": l.nearest.to_string(),
            })
        })
        .collect();
    let truncated = match &r.truncated {
        Some(t) => serde_json::json!({ "k": t.k, "reason": t.reason }),
        None => serde_json::Value::Null,
    };
    let doc = serde_json::json!({
        "p": r.p,
        "rows": r.rows,
        "cols": r.cols,
        "levels": levels,
        "truncated": truncated,
    });
    serde_json::to_string_pretty(&doc).expect("report serialization cannot fail")
}
