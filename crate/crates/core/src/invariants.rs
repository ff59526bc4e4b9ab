//! Polynomials in the cell variables `p[i,j]` and the invariant families of
//! the diagonal-effect and common-diagonal-effect models.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov;
use crate::rational::{self, Q};
use crate::table::{Move, ProbTable};

/// 0-based `(row, col)` of a cell variable.
pub type Cell = (usize, usize);

/// Power product of cell variables. Exponents are stored sorted by cell in
/// row-major order and are never zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CellMonomial {
    exps: Vec<(Cell, u32)>,
}

impl CellMonomial {
    pub fn one() -> Self {
        CellMonomial::default()
    }

    pub fn var(cell: Cell) -> Self {
        CellMonomial { exps: vec![(cell, 1)] }
    }

    pub fn from_exponents(exps: impl IntoIterator<Item = (Cell, u32)>) -> Self {
        let mut map: BTreeMap<Cell, u32> = BTreeMap::new();
        for (cell, e) in exps {
            *map.entry(cell).or_default() += e;
        }
        CellMonomial {
            exps: map.into_iter().filter(|&(_, e)| e > 0).collect(),
        }
    }

    pub fn exponents(&self) -> &[(Cell, u32)] {
        &self.exps
    }

    pub fn exponent(&self, cell: Cell) -> u32 {
        self.exps
            .binary_search_by(|(c, _)| c.cmp(&cell))
            .map(|k| self.exps[k].1)
            .unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn max_index(&self) -> usize {
        self.exps.iter().map(|&((i, j), _)| i.max(j)).max().unwrap_or(0)
    }

    pub fn gcd(&self, other: &Self) -> Self {
        CellMonomial {
            exps: self
                .exps
                .iter()
                .filter_map(|&(c, e)| {
                    let m = e.min(other.exponent(c));
                    (m > 0).then_some((c, m))
                })
                .collect(),
        }
    }

    pub fn eval(&self, point: &ProbTable) -> Q {
        self.exps
            .iter()
            .fold(Q::one(), |acc, &((i, j), e)| acc * rational::pow(point.get(i, j), e))
    }
}

impl Mul for &CellMonomial {
    type Output = CellMonomial;

    fn mul(self, rhs: &CellMonomial) -> CellMonomial {
        CellMonomial::from_exponents(self.exps.iter().chain(rhs.exps.iter()).copied())
    }
}

/// Graded lexicographic with cells ordered row-major: higher degree first,
/// then the larger exponent on the earliest differing cell.
impl Ord for CellMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let (mut a, mut b) = (self.exps.iter().peekable(), other.exps.iter().peekable());
            loop {
                match (a.peek(), b.peek()) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some(&&(ca, ea)), Some(&&(cb, eb))) => match ca.cmp(&cb) {
                        Ordering::Less => return Ordering::Greater,
                        Ordering::Greater => return Ordering::Less,
                        Ordering::Equal => {
                            if ea != eb {
                                return ea.cmp(&eb);
                            }
                            a.next();
                            b.next();
                        }
                    },
                }
            }
        })
    }
}

impl PartialOrd for CellMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CellMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "1");
        }
        for (k, &((i, j), e)) in self.exps.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "p[{},{}]", i + 1, j + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial over the rationals in the `I*I` cell variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellPolynomial {
    size: usize,
    terms: BTreeMap<CellMonomial, Q>,
}

impl CellPolynomial {
    pub fn zero(size: usize) -> Self {
        CellPolynomial {
            size,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(size: usize, c: Q) -> Self {
        Self::from_terms(size, [(CellMonomial::one(), c)])
    }

    pub fn from_terms(size: usize, terms: impl IntoIterator<Item = (CellMonomial, Q)>) -> Self {
        let mut poly = Self::zero(size);
        for (m, c) in terms {
            poly.add_term(m, c);
        }
        poly
    }

    /// `m_plus - m_minus`.
    pub fn binomial(size: usize, m_plus: CellMonomial, m_minus: CellMonomial) -> Self {
        Self::from_terms(size, [(m_plus, Q::one()), (m_minus, -Q::one())])
    }

    /// Parses text like `p[1,2]*p[2,3]^2 - 3*p[1,1]`, 1-based indices.
    pub fn parse(size: usize, text: &str) -> Result<Self> {
        Parser::new(size, text).parse()
    }

    fn add_term(&mut self, m: CellMonomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms from the largest monomial down.
    pub fn terms(&self) -> impl Iterator<Item = (&CellMonomial, &Q)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, m: &CellMonomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn leading_term(&self) -> Option<(&CellMonomial, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(CellMonomial::degree).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(CellMonomial::degree);
        match degrees.next() {
            Some(d) => degrees.all(|e| e == d),
            None => true,
        }
    }

    /// Two terms with coefficients `+1` and `-1`.
    pub fn as_binomial(&self) -> Option<(CellMonomial, CellMonomial)> {
        if self.terms.len() != 2 {
            return None;
        }
        let mut plus = None;
        let mut minus = None;
        for (m, c) in &self.terms {
            if c.is_one() {
                plus = Some(m.clone());
            } else if (-c).is_one() {
                minus = Some(m.clone());
            }
        }
        Some((plus?, minus?))
    }

    /// `gcd` of the two monomials is 1.
    pub fn is_pure_binomial(&self) -> bool {
        self.as_binomial().is_some_and(|(a, b)| a.gcd(&b).is_one())
    }

    /// Scaled so the leading coefficient is 1.
    pub fn monic(&self) -> Self {
        match self.leading_term() {
            None => self.clone(),
            Some((_, lc)) => self.scale(&lc.recip()),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::from_terms(self.size, self.terms.iter().map(|(m, v)| (m.clone(), v * c)))
    }

    pub fn eval(&self, point: &ProbTable) -> Result<Q> {
        Error::check_size(self.size, point.size())?;
        Ok(self
            .terms
            .iter()
            .fold(Q::zero(), |acc, (m, c)| acc + c * m.eval(point)))
    }

    /// Same polynomial up to a nonzero scalar of ±1.
    pub fn equal_up_to_sign(&self, other: &Self) -> bool {
        self == other || *self == -other.clone()
    }

    /// Sign-normalized copy: leading coefficient positive.
    pub fn sign_normalized(&self) -> Self {
        match self.leading_term() {
            Some((_, c)) if c.is_negative() => -self.clone(),
            _ => self.clone(),
        }
    }

    /// Copy with the sign of one term flipped.
    pub fn with_term_negated(&self, m: &CellMonomial) -> Self {
        let mut out = self.clone();
        if let Some(c) = out.terms.get_mut(m) {
            *c = -c.clone();
        }
        out
    }
}

impl fmt::Display for CellPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (k, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_one() {
                write!(f, "{}", rational::format_q(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", rational::format_q(&abs))?;
            }
        }
        Ok(())
    }
}

impl Add for CellPolynomial {
    type Output = CellPolynomial;

    fn add(mut self, rhs: CellPolynomial) -> CellPolynomial {
        self.size = self.size.max(rhs.size);
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Neg for CellPolynomial {
    type Output = CellPolynomial;

    fn neg(mut self) -> CellPolynomial {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Sub for CellPolynomial {
    type Output = CellPolynomial;

    fn sub(self, rhs: CellPolynomial) -> CellPolynomial {
        self + (-rhs)
    }
}

impl Mul for &CellPolynomial {
    type Output = CellPolynomial;

    fn mul(self, rhs: &CellPolynomial) -> CellPolynomial {
        let mut out = CellPolynomial::zero(self.size.max(rhs.size));
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma * mb, ca * cb);
            }
        }
        out
    }
}

struct Parser<'a> {
    size: usize,
    text: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(size: usize, text: &'a str) -> Self {
        Parser {
            size,
            text: text.as_bytes(),
            pos: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: 1,
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", b as char)))
        }
    }

    fn number(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap_or_default()
            .parse()
            .map_err(|_| self.error("expected a number"))
    }

    fn parse(mut self) -> Result<CellPolynomial> {
        let mut poly = CellPolynomial::zero(self.size);
        let mut first = true;
        loop {
            let sign = match self.peek() {
                None if first => return Err(self.error("empty polynomial")),
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    1
                }
                Some(b'-') => {
                    self.pos += 1;
                    -1
                }
                Some(_) if first => 1,
                Some(_) => return Err(self.error("expected `+` or `-`")),
            };
            first = false;
            let (m, c) = self.term()?;
            poly.add_term(m, c * rational::qi(sign));
        }
        Ok(poly)
    }

    fn term(&mut self) -> Result<(CellMonomial, Q)> {
        let mut coeff = Q::one();
        let mut exps = Vec::new();
        loop {
            match self.peek() {
                Some(b'p') => {
                    self.pos += 1;
                    self.expect(b'[')?;
                    let i = self.number()? as usize;
                    self.expect(b',')?;
                    let j = self.number()? as usize;
                    self.expect(b']')?;
                    if i == 0 || j == 0 || i > self.size || j > self.size {
                        return Err(self.error(format!("cell p[{i},{j}] outside a {0}x{0} table", self.size)));
                    }
                    let mut e = 1;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        e = self.number()? as u32;
                    }
                    exps.push(((i - 1, j - 1), e));
                }
                Some(b) if b.is_ascii_digit() => {
                    coeff *= Q::from_integer(BigInt::from(self.number()?));
                }
                _ => return Err(self.error("expected a cell variable or a number")),
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((CellMonomial::from_exponents(exps), coeff))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InvariantFamilyTag {
    DiagEffectBinomials,
    CommonToricListed3,
    CommonToricFromMoves,
    CommonMixtureListed3,
    CommonMixtureFamilies,
}

/// A named polynomial produced by one of the invariant factories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invariant {
    pub tag: InvariantFamilyTag,
    pub label: String,
    pub poly: CellPolynomial,
}

impl Invariant {
    fn new(tag: InvariantFamilyTag, label: impl Into<String>, poly: CellPolynomial) -> Self {
        Invariant {
            tag,
            label: label.into(),
            poly,
        }
    }

    /// Family letter (`b`, `t`, `f`, `g`, `h`) for the common-diagonal
    /// mixture families.
    pub fn family_letter(&self) -> Option<char> {
        match self.tag {
            InvariantFamilyTag::CommonMixtureFamilies => self.label.chars().next(),
            _ => None,
        }
    }
}

pub fn polys(invariants: &[Invariant]) -> Vec<CellPolynomial> {
    invariants.iter().map(|inv| inv.poly.clone()).collect()
}

fn p(i: usize, j: usize) -> CellMonomial {
    CellMonomial::var((i, j))
}

fn mono(cells: &[Cell]) -> CellMonomial {
    CellMonomial::from_exponents(cells.iter().map(|&c| (c, 1)))
}

fn signed_sum(size: usize, terms: &[(i64, &[Cell])]) -> CellPolynomial {
    CellPolynomial::from_terms(size, terms.iter().map(|&(c, cells)| (mono(cells), rational::qi(c))))
}

fn label(prefix: &str, idx: &[usize]) -> String {
    let idx: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    format!("{prefix}[{}]", idx.join(","))
}

fn require_size(size: usize) -> Result<()> {
    if size < 3 {
        Err(Error::SizeTooSmall { size, min: 3 })
    } else {
        Ok(())
    }
}

/// Degree-2 binomials `p[i,j]p[i',j'] - p[i,j']p[i',j]` with i,i',j,j' all
/// distinct (i<i', j<j') and degree-3 binomials
/// `p[i,i']p[i',i'']p[i'',i] - p[i,i'']p[i'',i']p[i',i]` for i<i'<i''.
pub fn gens_diag_effect(size: usize) -> Result<Vec<Invariant>> {
    require_size(size)?;
    let tag = InvariantFamilyTag::DiagEffectBinomials;
    let mut out = Vec::new();
    for i in 0..size {
        for k in i + 1..size {
            for j in 0..size {
                for l in j + 1..size {
                    let idx = [i, k, j, l];
                    if (0..4).any(|a| (a + 1..4).any(|b| idx[a] == idx[b])) {
                        continue;
                    }
                    let poly = CellPolynomial::binomial(size, &p(i, j) * &p(k, l), &p(i, l) * &p(k, j));
                    out.push(Invariant::new(tag, label("quad", &idx), poly));
                }
            }
        }
    }
    for i in 0..size {
        for k in i + 1..size {
            for l in k + 1..size {
                let poly = CellPolynomial::binomial(size, mono(&[(i, k), (k, l), (l, i)]), mono(&[(i, l), (l, k), (k, i)]));
                out.push(Invariant::new(tag, label("cubic", &[i, k, l]), poly));
            }
        }
    }
    Ok(out)
}

const COMMON_TORIC_LISTED3: [&str; 9] = [
    "p[1,2]*p[2,3]*p[3,1] - p[1,3]*p[2,1]*p[3,2]",
    "p[1,3]*p[2,2]*p[3,1] - p[1,1]*p[2,3]*p[3,2]",
    "-p[1,1]*p[2,3]*p[3,2] + p[1,2]*p[2,1]*p[3,3]",
    "-p[2,2]*p[2,3]*p[3,1]^2 + p[2,1]^2*p[3,2]*p[3,3]",
    "p[1,2]*p[2,2]*p[3,1]^2 - p[1,1]*p[2,1]*p[3,2]^2",
    "-p[1,1]*p[1,3]*p[3,2]^2 + p[1,2]^2*p[3,1]*p[3,3]",
    "-p[1,3]^2*p[2,2]*p[3,2] + p[1,2]^2*p[2,3]*p[3,3]",
    "-p[1,1]*p[2,3]^2*p[3,1] + p[1,3]*p[2,1]^2*p[3,3]",
    "p[1,3]^2*p[2,1]*p[2,2] - p[1,1]*p[1,2]*p[2,3]^2",
];

/// The nine binomials generating the common-diagonal toric ideal for I=3,
/// with the printed signs and term order.
pub fn gens_common_toric_listed3() -> Vec<Invariant> {
    COMMON_TORIC_LISTED3
        .iter()
        .enumerate()
        .map(|(k, text)| {
            let poly = CellPolynomial::parse(3, text).expect("listed polynomial parses");
            Invariant::new(InvariantFamilyTag::CommonToricListed3, format!("toric-{}", k + 1), poly)
        })
        .collect()
}

const COMMON_MIXTURE_LISTED3: [(&str, &str); 20] = [
    ("binomial", "p[1,2]*p[2,3]*p[3,1] - p[1,3]*p[2,1]*p[3,2]"),
    ("4-term", "p[1,3]*p[2,1]*p[2,2] - p[1,2]*p[2,1]*p[2,3] + p[1,3]*p[2,3]*p[3,1] - p[1,3]*p[2,1]*p[3,3]"),
    ("4-term", "-p[1,2]*p[1,3]*p[2,2] + p[1,2]^2*p[2,3] - p[1,3]^2*p[3,2] + p[1,2]*p[1,3]*p[3,3]"),
    ("4-term", "p[1,3]*p[2,1]*p[3,1] - p[1,1]*p[2,3]*p[3,1] + p[2,2]*p[2,3]*p[3,1] - p[2,1]*p[2,3]*p[3,2]"),
    ("4-term", "p[1,2]*p[1,3]*p[3,1] - p[1,1]*p[1,3]*p[3,2] + p[1,3]*p[2,2]*p[3,2] - p[1,2]*p[2,3]*p[3,2]"),
    ("4-term", "p[1,3]*p[2,1]^2 - p[1,1]*p[2,1]*p[2,3] - p[2,3]^2*p[3,1] + p[2,1]*p[2,3]*p[3,3]"),
    ("4-term", "p[1,3]^2*p[2,1] - p[1,1]*p[1,3]*p[2,3] + p[1,3]*p[2,2]*p[2,3] - p[1,2]*p[2,3]^2"),
    ("4-term", "p[1,2]*p[1,3]*p[2,1] - p[1,1]*p[1,2]*p[2,3] - p[1,3]*p[2,3]*p[3,2] + p[1,2]*p[2,3]*p[3,3]"),
    ("4-term", "-p[2,1]*p[2,2]*p[3,1] - p[2,3]*p[3,1]^2 + p[2,1]^2*p[3,2] + p[2,1]*p[3,1]*p[3,3]"),
    ("4-term", "-p[1,2]*p[2,2]*p[3,1] + p[1,2]*p[2,1]*p[3,2] - p[1,3]*p[3,1]*p[3,2] + p[1,2]*p[3,1]*p[3,3]"),
    ("4-term", "p[1,2]*p[3,1]^2 - p[1,1]*p[3,1]*p[3,2] - p[2,2]*p[3,1]*p[3,2] - p[2,1]*p[3,2]^2"),
    ("4-term", "p[1,2]*p[2,1]*p[3,1] - p[1,1]*p[2,1]*p[3,2] - p[2,3]*p[3,1]*p[3,2] + p[2,1]*p[3,2]*p[3,3]"),
    ("4-term", "p[1,2]^2*p[3,1] - p[1,1]*p[1,2]*p[3,2] - p[1,3]*p[3,2]^2 + p[1,2]*p[3,2]*p[3,3]"),
    (
        "8-term",
        "p[1,1]*p[1,3]*p[2,2] - p[1,3]*p[2,2]^2 - p[1,1]*p[1,2]*p[2,3] + p[1,2]*p[2,2]*p[2,3] \
         + p[1,3]^2*p[3,1] - p[1,3]*p[2,3]*p[3,2] - p[1,1]*p[1,3]*p[3,3] + p[1,3]*p[2,2]*p[3,3]",
    ),
    (
        "8-term",
        "p[1,1]*p[1,3]*p[2,1] - p[1,1]^2*p[2,3] - p[1,2]*p[2,1]*p[2,3] + p[1,1]*p[2,2]*p[2,3] \
         + p[2,3]^2*p[3,2] - p[1,3]*p[2,1]*p[3,3] + p[1,1]*p[2,3]*p[3,3] - p[2,2]*p[2,3]*p[3,3]",
    ),
    (
        "8-term",
        "-p[1,1]*p[2,2]*p[3,1] + p[2,2]^2*p[3,1] - p[1,3]*p[3,1]^2 + p[1,1]*p[2,1]*p[3,2] \
         - p[2,1]*p[2,2]*p[3,2] + p[2,3]*p[3,1]*p[3,2] + p[1,1]*p[3,1]*p[3,3] - p[2,2]*p[3,1]*p[3,3]",
    ),
    (
        "8-term",
        "p[1,1]*p[1,2]*p[3,1] - p[1,1]^2*p[3,2] - p[1,2]*p[2,1]*p[3,2] + p[1,1]*p[2,2]*p[3,2] \
         + p[2,3]*p[3,2]^2 - p[1,2]*p[3,1]*p[3,3] + p[1,1]*p[3,2]*p[3,3] - p[2,2]*p[3,2]*p[3,3]",
    ),
    (
        "8-term",
        "p[1,2]*p[2,1]^2 - p[1,1]*p[2,1]*p[2,2] - p[1,1]*p[2,3]*p[3,1] - p[2,1]*p[2,3]*p[3,2] \
         + p[1,1]*p[2,1]*p[3,3] + p[2,1]*p[2,2]*p[3,3] + p[2,3]*p[3,1]*p[3,3] - p[2,1]*p[3,3]^2",
    ),
    (
        "8-term",
        "p[1,2]^2*p[2,1] - p[1,1]*p[1,2]*p[2,2] - p[1,1]*p[1,3]*p[3,2] - p[1,2]*p[2,3]*p[3,2] \
         + p[1,1]*p[1,2]*p[3,3] + p[1,2]*p[2,2]*p[3,3] + p[1,3]*p[3,2]*p[3,3] - p[1,2]*p[3,3]^2",
    ),
    (
        "12-term",
        "p[1,1]*p[1,2]*p[2,1] - p[1,1]^2*p[2,2] - p[1,2]*p[2,1]*p[2,2] + p[1,1]*p[2,2]^2 \
         - p[1,1]*p[1,3]*p[3,1] + p[2,2]*p[2,3]*p[3,2] + p[1,1]^2*p[3,3] - p[2,2]^2*p[3,3] \
         + p[1,3]*p[3,1]*p[3,3] - p[2,3]*p[3,2]*p[3,3] - p[1,1]*p[3,3]^2 + p[2,2]*p[3,3]^2",
    ),
];

/// The twenty listed invariants of the common-diagonal mixture model for
/// I=3: one binomial, twelve 4-term, six 8-term and one 12-term polynomial.
/// Labels are `<group>-<k>` with `k` counting within the group.
pub fn gens_common_mixture_listed3() -> Vec<Invariant> {
    let mut counters: BTreeMap<&str, usize> = BTreeMap::new();
    COMMON_MIXTURE_LISTED3
        .iter()
        .map(|(group, text)| {
            let k = counters.entry(group).or_default();
            *k += 1;
            let poly = CellPolynomial::parse(3, text).expect("listed polynomial parses");
            Invariant::new(InvariantFamilyTag::CommonMixtureListed3, format!("{group}-{k}"), poly)
        })
        .collect()
}

/// Binomials of the common-diagonal Markov basis, one per move.
pub fn gens_common_toric_from_moves(size: usize) -> Result<Vec<Invariant>> {
    let moves = markov::moves_common_diag(size)?;
    let binomials = moves_to_binomials(&moves)?;
    Ok(binomials
        .into_iter()
        .enumerate()
        .map(|(k, poly)| Invariant::new(InvariantFamilyTag::CommonToricFromMoves, format!("move-{}", k + 1), poly))
        .collect())
}

/// `b`, `t`, `f`, `g`, `h` families of invariants for the common-diagonal
/// mixture model.
///
/// `g` is emitted exactly as printed in the source listing, including the `+p[i,j]p[k,k]^2`
/// term. Index tuples giving the same polynomial up to sign are emitted once.
pub fn gens_common_mixture_families(size: usize) -> Result<Vec<Invariant>> {
    require_size(size)?;
    let tag = InvariantFamilyTag::CommonMixtureFamilies;
    let n = size;
    let mut out = Vec::new();
    let mut seen: HashSet<CellPolynomial> = HashSet::new();
    let mut push = |out: &mut Vec<Invariant>, name: String, poly: CellPolynomial| {
        if poly.is_zero() || !seen.insert(poly.sign_normalized()) {
            return;
        }
        out.push(Invariant::new(tag, name, poly));
    };

    // (a) b_ijkl = p[i,j]p[k,l] - p[i,l]p[k,j]
    for i in 0..n {
        for k in i + 1..n {
            for j in 0..n {
                for l in j + 1..n {
                    let idx = [i, j, k, l];
                    if (0..4).any(|a| (a + 1..4).any(|b| idx[a] == idx[b])) {
                        continue;
                    }
                    let poly = signed_sum(n, &[(1, &[(i, j), (k, l)]), (-1, &[(i, l), (k, j)])]);
                    push(&mut out, label("b", &idx), poly);
                }
            }
        }
    }
    // (b) t_ijk = p[i,j]p[j,k]p[k,i] - p[i,k]p[k,j]p[j,i]
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let poly = signed_sum(n, &[(1, &[(i, j), (j, k), (k, i)]), (-1, &[(i, k), (k, j), (j, i)])]);
                push(&mut out, label("t", &[i, j, k]), poly);
            }
        }
    }
    // (c) f_ijklmn
    let pairs: Vec<Cell> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| i != j).collect();
    for &(i, j) in &pairs {
        for &(k, l) in &pairs {
            if (i, j) == (k, l) {
                continue;
            }
            for m in (0..n).filter(|&m| m != i && m != j) {
                for nn in (0..n).filter(|&x| x != k && x != l && x != m) {
                    let poly = signed_sum(
                        n,
                        &[
                            (1, &[(i, j), (k, l), (nn, nn)]),
                            (-1, &[(i, j), (nn, l), (k, nn)]),
                            (-1, &[(i, j), (k, l), (m, m)]),
                            (1, &[(k, l), (m, j), (i, m)]),
                        ],
                    );
                    push(&mut out, label("f", &[i, j, k, l, m, nn]), poly);
                }
            }
        }
    }
    // (d) g_ijk, literal form
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for k in (0..n).filter(|&k| k != i && k != j) {
                push(&mut out, label("g", &[i, j, k]), g_polynomial(n, i, j, k, 1));
            }
        }
    }
    // (e) h_ijk
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for k in (0..n).filter(|&k| k != i && k != j) {
                let poly = signed_sum(
                    n,
                    &[
                        (1, &[(i, i), (j, j), (j, j)]),
                        (1, &[(i, i), (i, i), (k, k)]),
                        (1, &[(j, j), (k, k), (k, k)]),
                        (-1, &[(i, i), (i, i), (j, j)]),
                        (-1, &[(j, j), (j, j), (k, k)]),
                        (-1, &[(i, i), (k, k), (k, k)]),
                        (1, &[(i, i), (i, j), (j, i)]),
                        (-1, &[(i, i), (i, k), (k, i)]),
                        (1, &[(j, j), (j, k), (k, j)]),
                        (-1, &[(j, j), (j, i), (i, j)]),
                        (1, &[(k, k), (k, i), (i, k)]),
                        (-1, &[(k, k), (k, j), (j, k)]),
                    ],
                );
                push(&mut out, label("h", &[i, j, k]), poly);
            }
        }
    }
    Ok(out)
}

/// `g_ijk` with the sign of its `p[i,j]p[k,k]^2` term given by `kk_sign`.
/// The printed form has `+1`.
pub fn g_polynomial(size: usize, i: usize, j: usize, k: usize, kk_sign: i64) -> CellPolynomial {
    signed_sum(
        size,
        &[
            (1, &[(i, j), (i, i), (k, k)]),
            (1, &[(i, j), (j, j), (k, k)]),
            (-1, &[(i, j), (i, i), (j, j)]),
            (kk_sign, &[(i, j), (k, k), (k, k)]),
            (1, &[(k, k), (i, k), (k, j)]),
            (-1, &[(i, i), (i, k), (k, j)]),
            (1, &[(i, j), (i, j), (j, i)]),
            (-1, &[(i, j), (k, j), (j, k)]),
        ],
    )
}

/// `p^{m+} - p^{m-}` for each move. Zero moves are rejected.
pub fn moves_to_binomials(moves: &[Move]) -> Result<Vec<CellPolynomial>> {
    moves
        .iter()
        .map(|mv| {
            if mv.is_zero() {
                return Err(Error::InvalidMove("the zero move has no binomial".into()));
            }
            let n = mv.size();
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let v = mv.get(i, j);
                    if v > 0 {
                        plus.push(((i, j), v as u32));
                    } else if v < 0 {
                        minus.push(((i, j), v.unsigned_abs() as u32));
                    }
                }
            }
            Ok(CellPolynomial::binomial(
                n,
                CellMonomial::from_exponents(plus),
                CellMonomial::from_exponents(minus),
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VanishingEntry {
    pub label: String,
    #[serde(with = "rational::serde_q")]
    pub value: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub entries: Vec<VanishingEntry>,
    pub pass: bool,
}

impl VanishingReport {
    pub fn failures(&self) -> impl Iterator<Item = &VanishingEntry> {
        self.entries.iter().filter(|e| !e.value.is_zero())
    }
}

/// Evaluates every invariant at `point`; passes iff all values are 0.
pub fn check_vanishing(invariants: &[Invariant], point: &ProbTable) -> Result<VanishingReport> {
    let entries = invariants
        .iter()
        .map(|inv| {
            Ok(VanishingEntry {
                label: inv.label.clone(),
                value: inv.poly.eval(point)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = entries.iter().all(|e| e.value.is_zero());
    Ok(VanishingReport { entries, pass })
}

/// A printed polynomial that fails to vanish, and the single term whose sign
/// flip would make it vanish at every test point, if there is exactly one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuspectedTypo {
    pub label: String,
    pub poly: CellPolynomial,
    pub witness_value: Q,
    pub flipped_term: Option<CellMonomial>,
}

impl fmt::Display for SuspectedTypo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} evaluates to {}",
            self.label,
            self.poly,
            rational::format_q(&self.witness_value)
        )?;
        if let Some(m) = &self.flipped_term {
            let c = self.poly.coefficient(m);
            write!(
                f,
                "; suspected sign typo on term {}{m} (vanishes with the sign flipped)",
                if c.is_negative() { "-" } else { "+" }
            )?;
        }
        Ok(())
    }
}

/// Flags every invariant that is nonzero at some point, and looks for a
/// single-term sign flip explaining the failure. Nothing is corrected.
pub fn suspected_typos(invariants: &[Invariant], points: &[ProbTable]) -> Result<Vec<SuspectedTypo>> {
    let mut out = Vec::new();
    for inv in invariants {
        let mut witness = None;
        for pt in points {
            let v = inv.poly.eval(pt)?;
            if !v.is_zero() {
                witness = Some(v);
                break;
            }
        }
        let Some(witness_value) = witness else { continue };
        let mut candidates = Vec::new();
        for (m, _) in inv.poly.terms() {
            let flipped = inv.poly.with_term_negated(m);
            let mut ok = true;
            for pt in points {
                if !flipped.eval(pt)?.is_zero() {
                    ok = false;
                    break;
                }
            }
            if ok {
                candidates.push(m.clone());
            }
        }
        out.push(SuspectedTypo {
            label: inv.label.clone(),
            poly: inv.poly.clone(),
            witness_value,
            flipped_term: (candidates.len() == 1).then(|| candidates.remove(0)),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::{mixture_point, random_rational_point, toric_point, ModelParams};
    use crate::rational::q;
    use crate::table::{ModelFamily, ModelDef};

    fn poly(size: usize, text: &str) -> CellPolynomial {
        CellPolynomial::parse(size, text).unwrap()
    }

    #[test]
    fn parse_and_print() {
        let f = poly(3, "p[1,2]*p[2,3]*p[3,1] - p[1,3]*p[2,1]*p[3,2]");
        assert_eq!(f.to_string(), "p[1,2]*p[2,3]*p[3,1] - p[1,3]*p[2,1]*p[3,2]");
        let g = poly(3, "-p[2,2]*p[2,3]*p[3,1]^2 + p[2,1]^2*p[3,2]*p[3,3]");
        assert_eq!(g.degree(), 4);
        assert_eq!(g.to_string(), "p[2,1]^2*p[3,2]*p[3,3] - p[2,2]*p[2,3]*p[3,1]^2");
        assert_eq!(poly(2, "2*p[1,1] - 2 + 2").to_string(), "2*p[1,1]");
        assert!(CellPolynomial::parse(2, "p[3,1]").is_err());
        assert!(CellPolynomial::parse(2, "p[1,1] p[1,2]").is_err());
        assert!(CellPolynomial::parse(2, "").is_err());
    }

    #[test]
    fn eval_minor() {
        let m = poly(2, "p[1,1]*p[2,2] - p[1,2]*p[2,1]");
        assert_eq!(m.eval(&ProbTable::uniform(2).unwrap()).unwrap(), q(0, 1));
        let t = ProbTable::from_rows(&[vec![q(1, 3), q(1, 6)], vec![q(1, 6), q(1, 3)]]).unwrap();
        assert_eq!(m.eval(&t).unwrap(), q(1, 12));
        assert!(m.eval(&ProbTable::uniform(3).unwrap()).is_err());
    }

    #[test]
    fn diag_effect_counts() {
        let g3 = gens_diag_effect(3).unwrap();
        assert_eq!(g3.len(), 1);
        assert_eq!(g3[0].poly, poly(3, "p[1,2]*p[2,3]*p[3,1] - p[1,3]*p[2,1]*p[3,2]"));
        let g4 = gens_diag_effect(4).unwrap();
        assert_eq!(g4.iter().filter(|g| g.poly.degree() == 2).count(), 6);
        assert_eq!(g4.iter().filter(|g| g.poly.degree() == 3).count(), 4);
        for g in gens_diag_effect(5).unwrap() {
            for (m, _) in g.poly.terms() {
                assert!(m.exponents().iter().all(|&((i, j), _)| i != j));
            }
        }
        assert!(gens_diag_effect(2).is_err());
    }

    #[test]
    fn diag_effect_binomial_vanishes_on_toric_point() {
        let def = ModelDef::toric(ModelFamily::DiagonalEffect, 3).unwrap();
        let ModelParams::Toric(params) = random_rational_point(&def, 9).unwrap() else { unreachable!() };
        let pt = toric_point(&params).unwrap().0;
        assert!(check_vanishing(&gens_diag_effect(3).unwrap(), &pt).unwrap().pass);
    }

    #[test]
    fn minor_fails_off_diagonal() {
        // [[1/3,1/6],[1/6,1/3]] placed on rows 1,2 and columns 3,4 of a 4x4 table.
        let mut rows = vec![vec![q(0, 1); 4]; 4];
        rows[0][2] = q(1, 3);
        rows[0][3] = q(1, 6);
        rows[1][2] = q(1, 6);
        rows[1][3] = q(1, 3);
        let pt = ProbTable::from_rows(&rows).unwrap();
        let report = check_vanishing(&gens_diag_effect(4).unwrap(), &pt).unwrap();
        assert!(!report.pass);
        let bad: Vec<_> = report.failures().collect();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].label, "quad[1,2,3,4]");
        assert_eq!(bad[0].value, q(1, 12));
    }

    #[test]
    fn listed_sizes() {
        let toric = gens_common_toric_listed3();
        assert_eq!(toric.len(), 9);
        assert_eq!(toric[0].poly, poly(3, "p[1,2]*p[2,3]*p[3,1] - p[1,3]*p[2,1]*p[3,2]"));
        assert_eq!(toric[3].poly.degree(), 4);
        assert!(toric.iter().all(|t| t.poly.is_pure_binomial()));

        let mix = gens_common_mixture_listed3();
        assert_eq!(mix.len(), 20);
        let count = |n: usize| mix.iter().filter(|m| m.poly.num_terms() == n).count();
        assert_eq!((count(2), count(4), count(8), count(12)), (1, 12, 6, 1));
        let last = &mix[19].poly;
        assert_eq!(last.coefficient(&mono(&[(0, 0), (0, 1), (1, 0)])), q(1, 1));
        assert_eq!(mix[10].label, "4-term-10");
    }

    #[test]
    fn families_small_cases() {
        let fam = gens_common_mixture_families(3).unwrap();
        assert!(fam.iter().all(|f| f.family_letter() != Some('b')));
        let t: Vec<_> = fam.iter().filter(|f| f.family_letter() == Some('t')).collect();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].poly, poly(3, "p[1,2]*p[2,3]*p[3,1] - p[1,3]*p[3,2]*p[2,1]"));
        let fam4 = gens_common_mixture_families(4).unwrap();
        assert!(fam4.iter().any(|f| f.family_letter() == Some('b')));
        assert!(gens_common_mixture_families(2).is_err());
    }

    #[test]
    fn literal_g_is_flagged_with_kk_term() {
        let def = ModelDef::mixture(ModelFamily::CommonDiagonalEffect, 3).unwrap();
        let points: Vec<_> = (0..5)
            .map(|s| match random_rational_point(&def, s).unwrap() {
                ModelParams::Mixture(m) => mixture_point(&m).unwrap(),
                _ => unreachable!(),
            })
            .collect();
        let fam = gens_common_mixture_families(3).unwrap();
        let g: Vec<_> = fam.iter().filter(|f| f.family_letter() == Some('g')).cloned().collect();
        let typos = suspected_typos(&g, &points).unwrap();
        assert_eq!(typos.len(), g.len());
        for t in &typos {
            let m = t.flipped_term.as_ref().expect("single-term explanation");
            assert_eq!(m.degree(), 3);
            // p[i,j] p[k,k]^2: one exponent 2 on a diagonal cell
            assert!(m.exponents().iter().any(|&((a, b), e)| a == b && e == 2));
        }
        for inv in &g {
            let (i, j, k) = parse_triple(&inv.label);
            let fixed = g_polynomial(3, i, j, k, -1);
            assert!(points.iter().all(|pt| fixed.eval(pt).unwrap().is_zero()));
        }
    }

    fn parse_triple(label: &str) -> (usize, usize, usize) {
        let inner = &label[2..label.len() - 1];
        let v: Vec<usize> = inner.split(',').map(|s| s.parse::<usize>().unwrap() - 1).collect();
        (v[0], v[1], v[2])
    }

    #[test]
    fn moves_to_binomials_examples() {
        let n = 4;
        let basic = Move::from_entries(n, &[(0, 2, 1), (0, 3, -1), (1, 2, -1), (1, 3, 1)], crate::MoveFamily::Basic2).unwrap();
        let b = moves_to_binomials(&[basic]).unwrap();
        assert_eq!(b[0], poly(4, "p[1,3]*p[2,4] - p[1,4]*p[2,3]"));
        let tri = Move::from_entries(3, &[(0, 1, 1), (0, 2, -1), (1, 0, -1), (1, 2, 1), (2, 0, 1), (2, 1, -1)], crate::MoveFamily::Triangle3).unwrap();
        let b = moves_to_binomials(&[tri]).unwrap();
        assert_eq!(b[0], gens_diag_effect(3).unwrap()[0].poly);
        let zero = Move::from_cells(2, vec![0; 4], crate::MoveFamily::Other).unwrap();
        assert!(moves_to_binomials(&[zero]).is_err());
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        let a = mono(&[(0, 1), (1, 2), (2, 0)]);
        let b = mono(&[(0, 2), (1, 0), (2, 1)]);
        assert!(a > b);
        assert!(mono(&[(2, 2), (2, 2)]) > p(0, 0));
        assert!(p(0, 0) > p(0, 1));
    }
}
