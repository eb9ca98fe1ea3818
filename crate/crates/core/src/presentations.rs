//! Group presentations over a prime p: named generators, freely reduced
//! relator words, and recognition of the distinguished-generator shape.
//!
//! The text format is line oriented:
//!
//! ```text
//! p = 2
//! gens = x, g
//! rels = [x,g] = x^2
//! ```
//!
//! Relator expressions support `*` (concatenation), `^` (integer exponents),
//! parentheses, `1` (the empty word), and `[u,v,w]` commutators nested on the
//! left, so `[u,v,w]` means `[[u,v],w]` with `[u,v] = u^-1*v^-1*u*v`.
//! An equation `lhs = rhs` is stored as the relator `lhs*rhs^-1`.
//!
//! `validate_flag` recognizes presentations whose relators all have the form
//! `[x_i, g, ..., g] = h_i` for a single distinguished generator `g`,
//! pairwise distinct subjects `x_i`, and words `h_i` in the non-distinguished
//! generators whose exponent sums all vanish mod p. When every commutator
//! has depth one the presentation is called mild.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// A freely reduced word in numbered generators.
///
/// Letters are `(generator index, exponent)` pairs with nonzero exponents and
/// distinct adjacent indices; the invariant is maintained by every operation.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupWord {
    letters: Vec<(usize, i64)>,
}

impl GroupWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn generator(index: usize) -> Self {
        Self { letters: vec![(index, 1)] }
    }

    /// Builds a word from raw letters, freely reducing as it goes.
    pub fn from_letters<I: IntoIterator<Item = (usize, i64)>>(letters: I) -> Self {
        let mut w = Self::identity();
        for (g, e) in letters {
            w.push(g, e);
        }
        w
    }

    /// Appends one letter, merging and cancelling with the current tail.
    pub fn push(&mut self, gen: usize, exp: i64) {
        if exp == 0 {
            return;
        }
        if let Some(last) = self.letters.last_mut() {
            if last.0 == gen {
                last.1 += exp;
                if last.1 == 0 {
                    self.letters.pop();
                }
                return;
            }
        }
        self.letters.push((gen, exp));
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut w = self.clone();
        for &(g, e) in &other.letters {
            w.push(g, e);
        }
        w
    }

    pub fn inverse(&self) -> Self {
        Self {
            letters: self.letters.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = Self::identity();
        for _ in 0..n.unsigned_abs() {
            acc = acc.concat(&base);
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[(usize, i64)] {
        &self.letters
    }

    /// Total letter count of the reduced word, counting multiplicity.
    pub fn reduced_length(&self) -> u64 {
        self.letters.iter().map(|&(_, e)| e.unsigned_abs()).sum()
    }

    pub fn contains(&self, gen: usize) -> bool {
        self.letters.iter().any(|&(g, _)| g == gen)
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.letters.iter().map(|&(g, _)| g).max()
    }

    pub fn exponent_sums(&self, ngens: usize) -> Vec<i64> {
        let mut sums = vec![0i64; ngens];
        for &(g, e) in &self.letters {
            sums[g] += e;
        }
        sums
    }

    pub fn to_text(&self, names: &[String]) -> String {
        if self.letters.is_empty() {
            return "1".to_string();
        }
        self.letters
            .iter()
            .map(|&(g, e)| {
                let name = &names[g];
                if e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl fmt::Debug for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|&(g, e)| if e == 1 { format!("g{g}") } else { format!("g{g}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// `[u, v] = u^-1 * v^-1 * u * v`.
pub fn commutator(u: &GroupWord, v: &GroupWord) -> GroupWord {
    u.inverse().concat(&v.inverse()).concat(u).concat(v)
}

/// `[x, g, ..., g]` with `times` copies of `g`, nested on the left.
pub fn iterated_commutator(x: &GroupWord, g: &GroupWord, times: u32) -> GroupWord {
    let mut w = x.clone();
    for _ in 0..times {
        w = commutator(&w, g);
    }
    w
}

/// A presentation: prime, named generators, freely reduced relators.
#[derive(Clone, Debug)]
pub struct GroupPresentation {
    pub p: u16,
    pub generators: Vec<String>,
    pub relators: Vec<GroupWord>,
}

pub fn is_supported_prime(p: u64) -> bool {
    if !(2..256).contains(&p) {
        return false;
    }
    (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl GroupPresentation {
    pub fn parse(text: &str) -> Result<Self> {
        parse_presentation(text)
    }

    pub fn ngens(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|n| n == name)
    }

    /// Parses a single word expression over this presentation's generators.
    pub fn word(&self, expr: &str) -> Result<GroupWord> {
        let names: HashMap<&str, usize> = self
            .generators
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        parse_word_expr(expr, &names)
    }

    pub fn validate_flag(&self) -> FlagInfo {
        validate_flag(self)
    }
}

impl fmt::Display for GroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p = {}", self.p)?;
        writeln!(f, "gens = {}", self.generators.join(", "))?;
        if !self.relators.is_empty() {
            let rels: Vec<String> = self
                .relators
                .iter()
                .map(|r| r.to_text(&self.generators))
                .collect();
            writeln!(f, "rels = {}", rels.join("; "))?;
        }
        Ok(())
    }
}

/// Parses the line-oriented presentation format.
pub fn parse_presentation(text: &str) -> Result<GroupPresentation> {
    let mut p: Option<(u64, usize)> = None;
    let mut gens: Option<(Vec<String>, usize)> = None;
    let mut rels_src: Option<(String, usize)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            msg: "expected `key = value`".into(),
        })?;
        match key.trim() {
            "p" => {
                if p.is_some() {
                    return Err(Error::Parse { line: line_no, msg: "duplicate `p` line".into() });
                }
                let v: u64 = value.trim().parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("invalid prime `{}`", value.trim()),
                })?;
                p = Some((v, line_no));
            }
            "gens" => {
                if gens.is_some() {
                    return Err(Error::Parse { line: line_no, msg: "duplicate `gens` line".into() });
                }
                let names: Vec<String> = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                gens = Some((names, line_no));
            }
            "rels" => {
                if rels_src.is_some() {
                    return Err(Error::Parse { line: line_no, msg: "duplicate `rels` line".into() });
                }
                rels_src = Some((value.to_string(), line_no));
            }
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unknown key `{}`", other.trim()),
                });
            }
        }
    }

    let (p, _) = p.ok_or(Error::Parse { line: 0, msg: "missing `p = <prime>` line".into() })?;
    if !is_supported_prime(p) {
        return Err(Error::BadPrime(p));
    }
    let (generators, gline) =
        gens.ok_or(Error::Parse { line: 0, msg: "missing `gens = ...` line".into() })?;
    if generators.is_empty() {
        return Err(Error::Parse { line: gline, msg: "empty generator list".into() });
    }
    let mut seen: HashMap<&str, ()> = HashMap::new();
    for name in &generators {
        if !is_ident(name) || name == "1" {
            return Err(Error::Parse {
                line: gline,
                msg: format!("invalid generator name `{name}`"),
            });
        }
        if seen.insert(name.as_str(), ()).is_some() {
            return Err(Error::DuplicateGenerator(name.clone()));
        }
    }

    let names: HashMap<&str, usize> = generators
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut relators = Vec::new();
    if let Some((src, line_no)) = rels_src {
        for part in src.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let w = parse_word_expr(part, &names).map_err(|e| match e {
                Error::Parse { msg, .. } | Error::Invalid(msg) => {
                    Error::Parse { line: line_no, msg }
                }
                other => other,
            })?;
            relators.push(w);
        }
    }

    Ok(GroupPresentation { p: p as u16, generators, relators })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Star,
    Caret,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Eq,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '^' => {
                toks.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            '[' => {
                toks.push(Tok::LBrack);
                i += 1;
            }
            ']' => {
                toks.push(Tok::RBrack);
                i += 1;
            }
            ',' => {
                toks.push(Tok::Comma);
                i += 1;
            }
            '=' => {
                toks.push(Tok::Eq);
                i += 1;
            }
            '-' | '0'..='9' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let v: i64 = text
                    .parse()
                    .map_err(|_| Error::Invalid(format!("bad integer `{text}`")))?;
                toks.push(Tok::Int(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(Error::Invalid(format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    names: &'a HashMap<&'a str, usize>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.next() {
            Some(found) if found == t => Ok(()),
            Some(found) => Err(Error::Invalid(format!("expected {t:?}, found {found:?}"))),
            None => Err(Error::Invalid(format!("expected {t:?}, found end of input"))),
        }
    }

    fn equation(&mut self) -> Result<GroupWord> {
        let lhs = self.expr()?;
        if let Some(Tok::Eq) = self.peek() {
            self.next();
            let rhs = self.expr()?;
            if self.peek().is_some() {
                return Err(Error::Invalid("trailing tokens after equation".into()));
            }
            Ok(lhs.concat(&rhs.inverse()))
        } else {
            if self.peek().is_some() {
                return Err(Error::Invalid("trailing tokens after word".into()));
            }
            Ok(lhs)
        }
    }

    fn expr(&mut self) -> Result<GroupWord> {
        let mut w = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.next();
            w = w.concat(&self.factor()?);
        }
        Ok(w)
    }

    fn factor(&mut self) -> Result<GroupWord> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.next();
            match self.next() {
                Some(Tok::Int(e)) => Ok(base.pow(e)),
                other => Err(Error::Invalid(format!("expected integer exponent, found {other:?}"))),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<GroupWord> {
        match self.next() {
            Some(Tok::Ident(name)) => match self.names.get(name.as_str()) {
                Some(&idx) => Ok(GroupWord::generator(idx)),
                None => Err(Error::UnknownGenerator(name)),
            },
            Some(Tok::Int(1)) => Ok(GroupWord::identity()),
            Some(Tok::LParen) => {
                let w = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(w)
            }
            Some(Tok::LBrack) => {
                let mut w = self.expr()?;
                self.expect(Tok::Comma)?;
                w = commutator(&w, &self.expr()?);
                while let Some(Tok::Comma) = self.peek() {
                    self.next();
                    w = commutator(&w, &self.expr()?);
                }
                self.expect(Tok::RBrack)?;
                Ok(w)
            }
            other => Err(Error::Invalid(format!("expected a word atom, found {other:?}"))),
        }
    }
}

/// Parses a word expression (or `lhs = rhs` equation) over named generators.
pub fn parse_word_expr(expr: &str, names: &HashMap<&str, usize>) -> Result<GroupWord> {
    let toks = tokenize(expr)?;
    if toks.is_empty() {
        return Ok(GroupWord::identity());
    }
    let mut parser = Parser { toks, pos: 0, names };
    parser.equation()
}

/// The recognized commutator shape of a presentation.
#[derive(Clone, Debug)]
pub struct FlagStructure {
    /// Index of the distinguished generator `g`.
    pub distinguished: usize,
    /// All non-distinguished generators; the first `a_values.len()` entries
    /// are the relator subjects `x_i` in relator order.
    pub kernel_generators: Vec<usize>,
    /// Commutator depth `a_i` of each relator.
    pub a_values: Vec<u32>,
    /// Right-hand word `h_i` of each relator.
    pub h_words: Vec<GroupWord>,
}

impl FlagStructure {
    /// Number of relators (subjects with a commutator relation).
    pub fn l(&self) -> usize {
        self.a_values.len()
    }

    /// Number of non-distinguished generators.
    pub fn n(&self) -> usize {
        self.kernel_generators.len()
    }
}

#[derive(Clone, Debug)]
pub struct FlagInfo {
    pub is_flag: bool,
    pub is_mild: bool,
    pub structure: Option<FlagStructure>,
}

impl FlagInfo {
    pub fn structure(&self) -> Result<&FlagStructure> {
        self.structure.as_ref().ok_or(Error::NotFlag)
    }

    pub fn mild_structure(&self) -> Result<&FlagStructure> {
        let s = self.structure()?;
        if !self.is_mild {
            return Err(Error::NotMild);
        }
        Ok(s)
    }
}

/// Tries to decompose relator `r` as `[x, g, ..., g] * h^-1` with `h` free of
/// `g`. Returns `(subject, depth, h)` for the first matching subject.
fn decompose_relator(r: &GroupWord, gd: usize, ngens: usize) -> Option<(usize, u32, GroupWord)> {
    let g = GroupWord::generator(gd);
    for x in 0..ngens {
        if x == gd {
            continue;
        }
        let xw = GroupWord::generator(x);
        let mut c = commutator(&xw, &g);
        let mut a = 1u32;
        while c.reduced_length() <= r.reduced_length() {
            let hinv = c.inverse().concat(r);
            if !hinv.contains(gd) {
                return Some((x, a, hinv.inverse()));
            }
            c = commutator(&c, &g);
            a += 1;
        }
    }
    None
}

/// Recognizes the distinguished-generator commutator shape.
///
/// Every candidate for the distinguished generator is tried; the last
/// declared generator that works is chosen, so a presentation with no
/// relators picks its final generator. Membership of `h_i` in the Frattini
/// subgroup of the kernel's free group is decided by exponent sums mod p.
pub fn validate_flag(pres: &GroupPresentation) -> FlagInfo {
    let ngens = pres.ngens();
    let p = pres.p as i64;
    let mut best: Option<FlagStructure> = None;
    'cand: for gd in 0..ngens {
        let mut subjects = Vec::new();
        let mut a_values = Vec::new();
        let mut h_words = Vec::new();
        for r in &pres.relators {
            match decompose_relator(r, gd, ngens) {
                Some((x, a, h)) => {
                    if subjects.contains(&x) {
                        continue 'cand;
                    }
                    subjects.push(x);
                    a_values.push(a);
                    h_words.push(h);
                }
                None => continue 'cand,
            }
        }
        for h in &h_words {
            let sums = h.exponent_sums(ngens);
            if (0..ngens).any(|i| i != gd && sums[i].rem_euclid(p) != 0) {
                continue 'cand;
            }
        }
        let mut kernel = subjects.clone();
        for i in 0..ngens {
            if i != gd && !kernel.contains(&i) {
                kernel.push(i);
            }
        }
        best = Some(FlagStructure {
            distinguished: gd,
            kernel_generators: kernel,
            a_values,
            h_words,
        });
    }
    match best {
        Some(s) => FlagInfo {
            is_flag: true,
            is_mild: s.a_values.iter().all(|&a| a == 1),
            structure: Some(s),
        },
        None => FlagInfo { is_flag: false, is_mild: false, structure: None },
    }
}
