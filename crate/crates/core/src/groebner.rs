//! Buchberger's algorithm over the rationals.
//!
//! Polynomials here use dense exponent vectors and an explicit [`Ring`]
//! carrying the term order. [`crate::toricideal`] converts to and from
//! [`crate::invariants::CellPolynomial`].

use std::cmp::Ordering;
use std::collections::HashSet;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::Q;

pub type Exponents = Vec<u16>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermOrder {
    /// Graded reverse lexicographic, variable 0 largest.
    Grevlex,
    Lex,
    /// Grevlex on the first `block` variables, ties broken by grevlex on the
    /// rest. Eliminates the first block.
    Elimination { block: usize },
}

fn grevlex(a: &[u16], b: &[u16]) -> Ordering {
    let da: u32 = a.iter().map(|&e| e as u32).sum();
    let db: u32 = b.iter().map(|&e| e as u32).sum();
    da.cmp(&db).then_with(|| {
        for (x, y) in a.iter().zip(b).rev() {
            if x != y {
                return y.cmp(x);
            }
        }
        Ordering::Equal
    })
}

impl TermOrder {
    pub fn cmp(&self, a: &[u16], b: &[u16]) -> Ordering {
        match *self {
            TermOrder::Grevlex => grevlex(a, b),
            TermOrder::Lex => a.cmp(b),
            TermOrder::Elimination { block } => {
                grevlex(&a[..block], &b[..block]).then_with(|| grevlex(&a[block..], &b[block..]))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ring {
    pub nvars: usize,
    pub order: TermOrder,
}

/// Caps on a Buchberger run. Exceeding either is an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// S-pairs processed.
    pub max_pairs: usize,
    /// Largest total degree of an S-pair lcm.
    pub max_degree: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_pairs: 100_000,
            max_degree: 12,
        }
    }
}

/// Terms in increasing order; the leading term is last.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: Vec<(Exponents, Q)>,
}

fn divides(a: &[u16], b: &[u16]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm(a: &[u16], b: &[u16]) -> Exponents {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn quotient(a: &[u16], b: &[u16]) -> Exponents {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn coprime(a: &[u16], b: &[u16]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

fn degree(a: &[u16]) -> u32 {
    a.iter().map(|&e| e as u32).sum()
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn from_terms(ring: &Ring, terms: impl IntoIterator<Item = (Exponents, Q)>) -> Self {
        let mut terms: Vec<(Exponents, Q)> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| ring.order.cmp(&a.0, &b.0));
        let mut merged: Vec<(Exponents, Q)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        Poly { terms: merged }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing order.
    pub fn terms(&self) -> &[(Exponents, Q)] {
        &self.terms
    }

    pub fn lead(&self) -> Option<&(Exponents, Q)> {
        self.terms.last()
    }

    fn lead_exp(&self) -> &[u16] {
        &self.terms.last().expect("nonzero polynomial").0
    }

    pub fn monic(mut self) -> Self {
        if let Some((_, lc)) = self.terms.last() {
            let inv = lc.recip();
            for (_, c) in &mut self.terms {
                *c *= &inv;
            }
        }
        self
    }

    /// `self - c * x^shift * other`.
    fn sub_scaled(&self, ring: &Ring, c: &Q, shift: &[u16], other: &Poly) -> Poly {
        let shifted = other.terms.iter().map(|(e, v)| {
            let e: Exponents = e.iter().zip(shift).map(|(a, b)| a + b).collect();
            (e, -(c * v))
        });
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = self.terms.iter().cloned().peekable();
        let mut b = shifted.peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => out.push(a.next().unwrap()),
                (None, Some(_)) => out.push(b.next().unwrap()),
                (Some(x), Some(y)) => match ring.order.cmp(&x.0, &y.0) {
                    Ordering::Less => out.push(a.next().unwrap()),
                    Ordering::Greater => out.push(b.next().unwrap()),
                    Ordering::Equal => {
                        let (e, v) = a.next().unwrap();
                        let (_, w) = b.next().unwrap();
                        let s = v + w;
                        if !s.is_zero() {
                            out.push((e, s));
                        }
                    }
                },
            }
        }
        Poly { terms: out }
    }

    /// Highest power of variable `var` dividing every term.
    pub fn var_content(&self, var: usize) -> u16 {
        self.terms.iter().map(|(e, _)| e[var]).min().unwrap_or(0)
    }

    pub fn divide_var_power(&self, var: usize, power: u16) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e[var] -= power;
                    (e, c.clone())
                })
                .collect(),
        }
    }

    /// Same polynomial with variables renamed `x_k -> x_perm[k]`.
    pub fn rename(&self, ring: &Ring, perm: &[usize]) -> Poly {
        Poly::from_terms(
            ring,
            self.terms.iter().map(|(e, c)| {
                let mut out = vec![0u16; e.len()];
                for (k, &x) in e.iter().enumerate() {
                    out[perm[k]] = x;
                }
                (out, c.clone())
            }),
        )
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.iter().map(|(e, _)| degree(e)).max().unwrap_or(0)
    }
}

/// Full normal form of `f` modulo `basis`.
pub fn reduce(ring: &Ring, f: &Poly, basis: &[Poly]) -> Poly {
    let mut p = f.clone();
    let mut remainder: Vec<(Exponents, Q)> = Vec::new();
    while let Some((lt, lc)) = p.terms.last().cloned() {
        match basis.iter().find(|g| !g.is_zero() && divides(g.lead_exp(), &lt)) {
            Some(g) => {
                let (ge, gc) = g.lead().unwrap();
                let shift = quotient(&lt, ge);
                let c = &lc / gc;
                p = p.sub_scaled(ring, &c, &shift, g);
            }
            None => {
                p.terms.pop();
                remainder.push((lt, lc));
            }
        }
    }
    remainder.reverse();
    Poly { terms: remainder }
}

fn s_polynomial(ring: &Ring, f: &Poly, g: &Poly) -> Poly {
    let (fe, fc) = f.lead().unwrap();
    let (ge, gc) = g.lead().unwrap();
    let l = lcm(fe, ge);
    Poly::zero()
        .sub_scaled(ring, &(-fc.recip()), &quotient(&l, fe), f)
        .sub_scaled(ring, &gc.recip(), &quotient(&l, ge), g)
}

/// Reduced Gröbner basis: monic, sorted by leading term, largest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroebnerBasis {
    pub ring: Ring,
    pub generators: Vec<Poly>,
    pub pairs_processed: usize,
}

impl GroebnerBasis {
    pub fn reduce(&self, f: &Poly) -> Poly {
        reduce(&self.ring, f, &self.generators)
    }

    pub fn contains(&self, f: &Poly) -> bool {
        self.reduce(f).is_zero()
    }

    /// Every S-polynomial reduces to zero.
    pub fn is_groebner(&self) -> bool {
        let g = &self.generators;
        (0..g.len()).all(|i| (i + 1..g.len()).all(|j| reduce(&self.ring, &s_polynomial(&self.ring, &g[i], &g[j]), g).is_zero()))
    }
}

/// Buchberger's algorithm with the normal selection strategy and the
/// product and chain criteria.
pub fn groebner(ring: &Ring, gens: &[Poly], budget: &Budget) -> Result<GroebnerBasis> {
    let mut basis: Vec<Poly> = Vec::new();
    for f in gens {
        let r = reduce(ring, f, &basis);
        if !r.is_zero() {
            basis.push(r.monic());
        }
    }
    if basis.is_empty() {
        return Err(Error::InvalidModel("Gröbner basis of an empty or zero generating set".into()));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    let mut done: HashSet<(usize, usize)> = HashSet::new();
    let mut processed = 0usize;
    while !pairs.is_empty() {
        // normal strategy: smallest lcm first, ties by index
        let (pos, _) = pairs
            .iter()
            .enumerate()
            .min_by(|(_, &(a, b)), (_, &(c, d))| {
                let l1 = lcm(basis[a].lead_exp(), basis[b].lead_exp());
                let l2 = lcm(basis[c].lead_exp(), basis[d].lead_exp());
                ring.order.cmp(&l1, &l2).then((a, b).cmp(&(c, d)))
            })
            .unwrap();
        let (i, j) = pairs.swap_remove(pos);
        done.insert((i, j));
        let (li, lj) = (basis[i].lead_exp().to_vec(), basis[j].lead_exp().to_vec());
        if coprime(&li, &lj) {
            continue;
        }
        let l = lcm(&li, &lj);
        let chain = (0..basis.len()).any(|k| {
            k != i && k != j && divides(basis[k].lead_exp(), &l) && {
                let key = |a: usize, b: usize| (a.min(b), a.max(b));
                done.contains(&key(i, k)) && done.contains(&key(j, k))
            }
        });
        if chain {
            continue;
        }
        processed += 1;
        if processed > budget.max_pairs {
            return Err(Error::Budget(format!("more than {} S-pairs", budget.max_pairs)));
        }
        if degree(&l) > budget.max_degree {
            return Err(Error::Budget(format!(
                "S-pair of degree {} exceeds the degree cap {}",
                degree(&l),
                budget.max_degree
            )));
        }
        let s = s_polynomial(ring, &basis[i], &basis[j]);
        let r = reduce(ring, &s, &basis);
        if !r.is_zero() {
            let k = basis.len();
            basis.push(r.monic());
            for a in 0..k {
                pairs.push((a, k));
            }
        }
    }
    Ok(GroebnerBasis {
        ring: *ring,
        generators: reduced(ring, basis),
        pairs_processed: processed,
    })
}

fn reduced(ring: &Ring, basis: Vec<Poly>) -> Vec<Poly> {
    // minimal: drop elements whose leading term is divisible by another's
    let mut minimal: Vec<Poly> = Vec::new();
    for (k, g) in basis.iter().enumerate() {
        let lg = g.lead_exp();
        let redundant = basis.iter().enumerate().any(|(m, h)| {
            m != k && divides(h.lead_exp(), lg) && (h.lead_exp() != lg || m < k)
        });
        if !redundant {
            minimal.push(g.clone());
        }
    }
    let mut out: Vec<Poly> = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let others: Vec<Poly> = minimal.iter().enumerate().filter(|&(m, _)| m != k).map(|(_, p)| p.clone()).collect();
        out.push(reduce(ring, &minimal[k], &others).monic());
    }
    out.sort_by(|a, b| ring.order.cmp(b.lead_exp(), a.lead_exp()));
    out
}
