//! Toric ideals recomputed from design matrices.
//!
//! The pipeline is design matrix → integer kernel of `A^t` → lattice basis
//! binomials → saturation by the product of all cell variables. Two
//! saturation routes are available and are checked against each other in the
//! tests: one variable at a time with grevlex, or a single elimination of an
//! auxiliary variable `t` with `t * prod(p) - 1` adjoined.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groebner::{groebner, Budget, GroebnerBasis, Poly, Ring, TermOrder};
use crate::invariants::{CellMonomial, CellPolynomial};
use crate::rational::Q;
use crate::table::{ModelFamily, ModelForm, ModelDef, Move, MoveFamily};

/// Largest table size accepted by [`toric_ideal`].
pub const MAX_TORIC_SIZE: usize = 4;

/// One row per cell (row-major), one column per parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub model: ModelDef,
    pub entries: Vec<Vec<u32>>,
    pub num_params: usize,
}

pub fn design_matrix(model: &ModelDef) -> Result<DesignMatrix> {
    if model.form != ModelForm::Toric {
        return Err(Error::InvalidModel("design matrices exist only for the toric form".into()));
    }
    let n = model.size;
    let num_params = match model.family {
        ModelFamily::Independence => 2 * n,
        ModelFamily::DiagonalEffect => 3 * n,
        ModelFamily::CommonDiagonalEffect => 2 * n + 1,
    };
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![0u32; num_params];
            row[i] = 1;
            row[n + j] = 1;
            if i == j {
                match model.family {
                    ModelFamily::Independence => {}
                    ModelFamily::DiagonalEffect => row[2 * n + i] = 1,
                    ModelFamily::CommonDiagonalEffect => row[2 * n] = 1,
                }
            }
            entries.push(row);
        }
    }
    Ok(DesignMatrix {
        model: *model,
        entries,
        num_params,
    })
}

impl DesignMatrix {
    pub fn num_cells(&self) -> usize {
        self.entries.len()
    }

    /// `A^t v` for a vector indexed by cells.
    pub fn transpose_apply(&self, v: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.num_params];
        for (row, &x) in self.entries.iter().zip(v) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a as i64 * x;
            }
        }
        out
    }

    pub fn annihilates(&self, mv: &Move) -> bool {
        mv.cells().len() == self.num_cells() && self.transpose_apply(mv.cells()).iter().all(|&x| x == 0)
    }

    /// Rank over the rationals, by fraction-free elimination.
    pub fn rank(&self) -> usize {
        let mut m: Vec<Vec<i128>> = self.entries.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let rows = m.len();
        let cols = self.num_params;
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..rows).find(|&r| m[r][c] != 0) else { continue };
            m.swap(rank, p);
            for r in 0..rows {
                if r != rank && m[r][c] != 0 {
                    let (a, b) = (m[rank][c], m[r][c]);
                    for k in 0..cols {
                        m[r][k] = a * m[r][k] - b * m[rank][k];
                    }
                    let g = m[r].iter().fold(0i128, |g, &x| gcd(g, x.abs()));
                    if g > 1 {
                        m[r].iter_mut().for_each(|x| *x /= g);
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Z-basis of `{v : A^t v = 0}` as moves.
///
/// Unimodular column operations bring `A^t` to column echelon form; the
/// transformation columns past the pivots span the kernel over Z. A greedy
/// pairwise pass then shortens the vectors in L1 norm.
pub fn integer_kernel(design: &DesignMatrix) -> Result<Vec<Move>> {
    let n = design.num_cells();
    let k = design.num_params;
    // columns of A^t are the cells
    let mut m: Vec<Vec<i128>> = (0..n).map(|c| design.entries[c].iter().map(|&x| x as i128).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..n).map(|c| (0..n).map(|r| i128::from(r == c)).collect()).collect();
    let mut pivot = 0;
    for row in 0..k {
        if pivot == n {
            break;
        }
        for c in pivot + 1..n {
            if m[c][row] == 0 {
                continue;
            }
            if m[pivot][row] == 0 {
                m.swap(pivot, c);
                u.swap(pivot, c);
                continue;
            }
            let (a, b) = (m[pivot][row], m[c][row]);
            let (g, x, y) = ext_gcd(a, b);
            let (pa, pb) = (a / g, b / g);
            let combine = |cols: &mut Vec<Vec<i128>>| {
                let (cp, cc) = (cols[pivot].clone(), cols[c].clone());
                cols[pivot] = cp.iter().zip(&cc).map(|(s, t)| x * s + y * t).collect();
                cols[c] = cp.iter().zip(&cc).map(|(s, t)| -pb * s + pa * t).collect();
            };
            combine(&mut m);
            combine(&mut u);
        }
        if m[pivot][row] != 0 {
            pivot += 1;
        }
    }
    let mut basis: Vec<Vec<i128>> = u[pivot..].to_vec();
    shorten(&mut basis);
    let size = design.model.size;
    let moves = basis
        .into_iter()
        .map(|v| {
            let cells = v.into_iter().map(|x| i64::try_from(x).map_err(|_| Error::Internal("kernel entry overflow".into()))).collect::<Result<Vec<_>>>()?;
            let mv = Move::from_cells(size, cells, MoveFamily::Other)?;
            if !design.annihilates(&mv) {
                return Err(Error::Internal("kernel vector not annihilated by A^t".into()));
            }
            Ok(mv)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(moves)
}

fn l1(v: &[i128]) -> i128 {
    v.iter().map(|x| x.abs()).sum()
}

fn shorten(basis: &mut [Vec<i128>]) {
    loop {
        let mut improved = false;
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if i == j {
                    continue;
                }
                for s in [1i128, -1] {
                    let cand: Vec<i128> = basis[i].iter().zip(&basis[j]).map(|(a, b)| a + s * b).collect();
                    if l1(&cand) < l1(&basis[i]) {
                        basis[i] = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// How the lattice ideal is saturated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Saturation {
    /// `J : x_k^inf` for each variable in turn, via grevlex with `x_k` last.
    PerVariable,
    /// Adjoin `t`, add `t * prod(p) - 1`, eliminate `t`.
    AuxiliaryVariable,
}

fn cell_ring(size: usize, extra: usize, order: TermOrder) -> Ring {
    Ring {
        nvars: size * size + extra,
        order,
    }
}

pub(crate) fn to_poly(ring: &Ring, f: &CellPolynomial, offset: usize) -> Poly {
    let size = f.size();
    Poly::from_terms(
        ring,
        f.terms().map(|(m, c)| {
            let mut e = vec![0u16; ring.nvars];
            for &((i, j), x) in m.exponents() {
                e[offset + i * size + j] = x as u16;
            }
            (e, c.clone())
        }),
    )
}

pub(crate) fn from_poly(size: usize, f: &Poly, offset: usize) -> CellPolynomial {
    CellPolynomial::from_terms(
        size,
        f.terms().iter().map(|(e, c)| {
            let m = CellMonomial::from_exponents(
                e[offset..]
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x > 0)
                    .map(|(k, &x)| ((k / size, k % size), x as u32)),
            );
            (m, c.clone())
        }),
    )
}

fn lattice_binomials(ring: &Ring, basis: &[Move], offset: usize) -> Vec<Poly> {
    basis
        .iter()
        .map(|mv| {
            let mut plus = vec![0u16; ring.nvars];
            let mut minus = vec![0u16; ring.nvars];
            for (k, &x) in mv.cells().iter().enumerate() {
                if x > 0 {
                    plus[offset + k] = x as u16;
                } else if x < 0 {
                    minus[offset + k] = (-x) as u16;
                }
            }
            Poly::from_terms(ring, [(plus, Q::one()), (minus, -Q::one())])
        })
        .collect()
}

fn saturate_per_variable(size: usize, gens: Vec<Poly>, budget: &Budget) -> Result<Vec<Poly>> {
    let nvars = size * size;
    let ring = cell_ring(size, 0, TermOrder::Grevlex);
    if gens.iter().any(|g| {
        let degs: Vec<u32> = g.terms().iter().map(|(e, _)| e.iter().map(|&x| x as u32).sum()).collect();
        degs.windows(2).any(|w| w[0] != w[1])
    }) {
        return Err(Error::InvalidModel("per-variable saturation needs homogeneous generators".into()));
    }
    let mut current = gens;
    for var in 0..nvars {
        // swap `var` with the last variable so it is the smallest in grevlex
        let mut perm: Vec<usize> = (0..nvars).collect();
        perm.swap(var, nvars - 1);
        let renamed: Vec<Poly> = current.iter().map(|g| g.rename(&ring, &perm)).collect();
        let gb = groebner(&ring, &renamed, budget)?;
        current = gb
            .generators
            .iter()
            .map(|g| {
                let c = g.var_content(nvars - 1);
                g.divide_var_power(nvars - 1, c).rename(&ring, &perm)
            })
            .collect();
    }
    Ok(current)
}

fn saturate_auxiliary(size: usize, gens: &[Move], budget: &Budget) -> Result<Vec<Poly>> {
    let ring = cell_ring(size, 1, TermOrder::Elimination { block: 1 });
    let mut polys = lattice_binomials(&ring, gens, 1);
    let all = vec![1u16; ring.nvars];
    polys.push(Poly::from_terms(&ring, [(all, Q::one()), (vec![0u16; ring.nvars], -Q::one())]));
    let gb = groebner(&ring, &polys, budget)?;
    let plain = cell_ring(size, 0, TermOrder::Grevlex);
    Ok(gb
        .generators
        .iter()
        .filter(|g| g.terms().iter().all(|(e, _)| e[0] == 0))
        .map(|g| Poly::from_terms(&plain, g.terms().iter().map(|(e, c)| (e[1..].to_vec(), c.clone()))))
        .collect())
}

/// Generators of the toric ideal of `model`: the reduced grevlex Gröbner
/// basis of the saturated lattice ideal.
pub fn toric_ideal(model: &ModelDef) -> Result<Vec<CellPolynomial>> {
    toric_ideal_with(model, Saturation::PerVariable, &Budget::default())
}

pub fn toric_ideal_with(model: &ModelDef, method: Saturation, budget: &Budget) -> Result<Vec<CellPolynomial>> {
    let size = model.size;
    if size > MAX_TORIC_SIZE {
        return Err(Error::Budget(format!(
            "toric ideals are supported up to {MAX_TORIC_SIZE}x{MAX_TORIC_SIZE} tables"
        )));
    }
    let design = design_matrix(model)?;
    let basis = integer_kernel(&design)?;
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let ring = cell_ring(size, 0, TermOrder::Grevlex);
    let saturated = match method {
        Saturation::PerVariable => saturate_per_variable(size, lattice_binomials(&ring, &basis, 0), budget)?,
        Saturation::AuxiliaryVariable => saturate_auxiliary(size, &basis, budget)?,
    };
    let gb = groebner(&ring, &saturated, budget)?;
    // the basis is monic in grevlex; print with the first displayed term positive
    Ok(gb.generators.iter().map(|g| from_poly(size, g, 0).sign_normalized()).collect())
}

/// Reduced grevlex Gröbner basis of cell polynomials.
pub fn groebner_cells(gens: &[CellPolynomial], budget: &Budget) -> Result<GroebnerBasis> {
    let size = common_size(gens)?;
    let ring = cell_ring(size, 0, TermOrder::Grevlex);
    let polys: Vec<Poly> = gens.iter().map(|g| to_poly(&ring, g, 0)).collect();
    groebner(&ring, &polys, budget)
}

pub fn basis_to_cells(size: usize, gb: &GroebnerBasis) -> Vec<CellPolynomial> {
    gb.generators.iter().map(|g| from_poly(size, g, 0)).collect()
}

fn common_size(gens: &[CellPolynomial]) -> Result<usize> {
    let size = gens
        .first()
        .map(CellPolynomial::size)
        .ok_or_else(|| Error::InvalidModel("empty generating set".into()))?;
    if let Some(g) = gens.iter().find(|g| g.size() != size) {
        return Err(Error::SizeMismatch {
            expected: size,
            found: g.size(),
        });
    }
    Ok(size)
}

/// `f` reduces to zero modulo the ideal generated by `gens`.
pub fn ideal_contains(gens: &[CellPolynomial], f: &CellPolynomial, budget: &Budget) -> Result<bool> {
    let gb = groebner_cells(gens, budget)?;
    Error::check_size(gb_size(gens)?, f.size())?;
    Ok(gb.contains(&to_poly(&gb.ring, f, 0)))
}

fn gb_size(gens: &[CellPolynomial]) -> Result<usize> {
    common_size(gens)
}

/// True iff every generator of each set reduces to zero modulo a Gröbner
/// basis of the other.
pub fn ideal_equal(first: &[CellPolynomial], second: &[CellPolynomial], budget: &Budget) -> Result<bool> {
    let size = common_size(first)?;
    Error::check_size(size, common_size(second)?)?;
    let nonzero = |gens: &[CellPolynomial]| gens.iter().filter(|g| !g.is_zero()).cloned().collect::<Vec<_>>();
    let (a, b) = (nonzero(first), nonzero(second));
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ok(true),
        (true, false) | (false, true) => return Ok(false),
        _ => {}
    }
    let ga = groebner_cells(&a, budget)?;
    let gb = groebner_cells(&b, budget)?;
    let inside = |gens: &[CellPolynomial], basis: &GroebnerBasis| gens.iter().all(|g| basis.contains(&to_poly(&basis.ring, g, 0)));
    Ok(inside(&a, &gb) && inside(&b, &ga))
}

/// Exact ideal membership check used by the vanishing tests: the product of
/// all cell variables is not in the ideal (the ideal is proper off the
/// coordinate hyperplanes).
pub fn is_proper(gens: &[CellPolynomial], budget: &Budget) -> Result<bool> {
    let gb = groebner_cells(gens, budget)?;
    Ok(!gb.generators.iter().any(|g| g.terms().len() == 1 && g.terms()[0].1.is_one() && g.terms()[0].0.iter().all(Zero::is_zero)))
}
