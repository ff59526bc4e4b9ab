//! Square tables, moves and sufficient statistics.
//!
//! Cells are stored row-major and addressed with 0-based `(row, col)` pairs.
//! Text output switches to the 1-based `p[i,j]` convention.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelFamily {
    Independence,
    DiagonalEffect,
    CommonDiagonalEffect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelForm {
    Toric,
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelDef {
    pub family: ModelFamily,
    pub form: ModelForm,
    pub size: usize,
    /// Diagonal cells are structural zeros. Only meaningful for the
    /// diagonal-effect family.
    pub structural_zero_diagonal: bool,
}

impl ModelDef {
    pub fn new(family: ModelFamily, form: ModelForm, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::SizeTooSmall { size, min: 1 });
        }
        Ok(ModelDef {
            family,
            form,
            size,
            structural_zero_diagonal: false,
        })
    }

    pub fn toric(family: ModelFamily, size: usize) -> Result<Self> {
        Self::new(family, ModelForm::Toric, size)
    }

    pub fn mixture(family: ModelFamily, size: usize) -> Result<Self> {
        Self::new(family, ModelForm::Mixture, size)
    }

    pub fn with_structural_zero_diagonal(mut self) -> Result<Self> {
        if self.family != ModelFamily::DiagonalEffect {
            return Err(Error::InvalidModel(
                "structural zeros on the diagonal require the diagonal-effect family".into(),
            ));
        }
        self.structural_zero_diagonal = true;
        Ok(self)
    }
}

/// I×I table of nonnegative counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CountTable {
    size: usize,
    cells: Vec<u64>,
    total: u64,
}

impl CountTable {
    pub fn from_cells(size: usize, cells: Vec<u64>) -> Result<Self> {
        if size == 0 {
            return Err(Error::SizeTooSmall { size, min: 1 });
        }
        if cells.len() != size * size {
            return Err(Error::InvalidTable(format!(
                "expected {} cells for a {size}x{size} table, got {}",
                size * size,
                cells.len()
            )));
        }
        let total = cells.iter().sum();
        Ok(CountTable { size, cells, total })
    }

    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self> {
        let size = rows.len();
        let mut cells = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != size {
                return Err(Error::InvalidTable(format!(
                    "row {} has {} entries, expected {size}",
                    i + 1,
                    row.len()
                )));
            }
            cells.extend_from_slice(row);
        }
        Self::from_cells(size, cells)
    }

    pub fn zeros(size: usize) -> Result<Self> {
        Self::from_cells(size, vec![0; size * size])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn cells(&self) -> &[u64] {
        &self.cells
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.cells[i * self.size + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.cells.chunks(self.size)
    }

    pub fn row_margins(&self) -> Vec<u64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }

    pub fn col_margins(&self) -> Vec<u64> {
        (0..self.size)
            .map(|j| (0..self.size).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn diagonal(&self) -> Vec<u64> {
        (0..self.size).map(|i| self.get(i, i)).collect()
    }
}

impl fmt::Display for CountTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let line: Vec<String> = row.iter().map(u64::to_string).collect();
            write!(f, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// I×I table of exact probabilities summing to one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProbTable {
    size: usize,
    cells: Vec<Q>,
}

impl ProbTable {
    pub fn from_cells(size: usize, cells: Vec<Q>) -> Result<Self> {
        if size == 0 {
            return Err(Error::SizeTooSmall { size, min: 1 });
        }
        if cells.len() != size * size {
            return Err(Error::InvalidTable(format!(
                "expected {} cells, got {}",
                size * size,
                cells.len()
            )));
        }
        if let Some(pos) = cells.iter().position(|c| !rational::is_nonnegative(c)) {
            return Err(Error::InvalidTable(format!(
                "negative probability at cell ({},{})",
                pos / size + 1,
                pos % size + 1
            )));
        }
        let total = rational::sum(&cells);
        if !total.is_one() {
            return Err(Error::InvalidTable(format!(
                "probabilities sum to {}, not 1",
                rational::format_q(&total)
            )));
        }
        Ok(ProbTable { size, cells })
    }

    pub fn from_rows(rows: &[Vec<Q>]) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::InvalidTable("rows must all have length I".into()));
        }
        Self::from_cells(size, rows.concat())
    }

    pub fn uniform(size: usize) -> Result<Self> {
        let cell = rational::q(1, (size * size) as i64);
        Self::from_cells(size, vec![cell; size * size])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn cells(&self) -> &[Q] {
        &self.cells
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.cells[i * self.size + j]
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.cells.iter().all(|c| c > &Q::zero())
    }

    pub fn row_sum(&self, i: usize) -> Q {
        rational::sum(&self.cells[i * self.size..(i + 1) * self.size])
    }

    pub fn col_sum(&self, j: usize) -> Q {
        (0..self.size).fold(Q::zero(), |acc, i| acc + self.get(i, j))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.size).all(|i| (0..self.size).all(|j| i == j || self.get(i, j).is_zero()))
    }
}

impl fmt::Display for ProbTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.size {
            if i > 0 {
                writeln!(f)?;
            }
            let row: Vec<String> = (0..self.size)
                .map(|j| rational::format_q(self.get(i, j)))
                .collect();
            write!(f, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Which move family a [`Move`] was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveFamily {
    /// Degree-2 move on rows i,i' and columns j,j', all four distinct.
    Basic2,
    /// Degree-2 move of the independence model (any i≠i', j≠j').
    Minor2,
    /// Degree-3 off-diagonal cycle on three distinct indices.
    Triangle3,
    /// Degree-3 cycle through two diagonal cells on three indices.
    DiagonalShift3,
    /// Degree-3 move on i,i',j,j' touching two diagonal cells.
    Mixed3,
    /// Degree-4 move `+1 +1 -2 / -1 -1 +2` or its transpose.
    Split4,
    /// Degree-4 move `+1 +1 -1 -1 / -1 -1 +1 +1` or its transpose.
    Double4,
    /// Anything else (lattice vectors, user input).
    Other,
}

/// Integer table with zero margins for some model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    size: usize,
    cells: Vec<i64>,
    degree: u64,
    family: MoveFamily,
}

impl Move {
    pub fn from_cells(size: usize, cells: Vec<i64>, family: MoveFamily) -> Result<Self> {
        if cells.len() != size * size {
            return Err(Error::InvalidMove(format!(
                "expected {} cells, got {}",
                size * size,
                cells.len()
            )));
        }
        let positive: u64 = cells.iter().filter(|&&c| c > 0).map(|&c| c as u64).sum();
        let negative: u64 = cells.iter().filter(|&&c| c < 0).map(|&c| c.unsigned_abs()).sum();
        if positive != negative {
            return Err(Error::InvalidMove(format!(
                "positive part sums to {positive}, negative part to {negative}"
            )));
        }
        Ok(Move {
            size,
            cells,
            degree: positive,
            family,
        })
    }

    /// Builds a move from `(row, col, value)` entries, 0-based.
    pub fn from_entries(size: usize, entries: &[(usize, usize, i64)], family: MoveFamily) -> Result<Self> {
        let mut cells = vec![0i64; size * size];
        for &(i, j, v) in entries {
            if i >= size || j >= size {
                return Err(Error::InvalidMove(format!("cell ({i},{j}) out of range")));
            }
            cells[i * size + j] += v;
        }
        Self::from_cells(size, cells, family)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn cells(&self) -> &[i64] {
        &self.cells
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.cells[i * self.size + j]
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn family(&self) -> MoveFamily {
        self.family
    }

    pub fn is_zero(&self) -> bool {
        self.degree == 0
    }

    pub fn negated(&self) -> Move {
        Move {
            size: self.size,
            cells: self.cells.iter().map(|c| -c).collect(),
            degree: self.degree,
            family: self.family,
        }
    }

    pub fn transposed(&self) -> Move {
        let n = self.size;
        let cells = (0..n * n).map(|k| self.cells[(k % n) * n + k / n]).collect();
        Move {
            size: n,
            cells,
            degree: self.degree,
            family: self.family,
        }
    }

    /// Sign-normalized cells: the first nonzero entry is positive.
    pub fn canonical_cells(&self) -> Vec<i64> {
        match self.cells.iter().find(|&&c| c != 0) {
            Some(&c) if c < 0 => self.cells.iter().map(|c| -c).collect(),
            _ => self.cells.clone(),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.size {
            if i > 0 {
                writeln!(f)?;
            }
            let row: Vec<String> = (0..self.size)
                .map(|j| format!("{:+}", self.get(i, j)))
                .collect();
            write!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Diagonal part of a sufficient statistic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiagonalStat {
    /// Independence: no diagonal component.
    None,
    /// Diagonal-effect: every diagonal count.
    Vector(Vec<u64>),
    /// Common-diagonal-effect: the trace.
    Sum(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SufficientStat {
    pub row_margins: Vec<u64>,
    pub col_margins: Vec<u64>,
    pub diagonal: DiagonalStat,
}

impl SufficientStat {
    pub fn size(&self) -> usize {
        self.row_margins.len()
    }

    pub fn is_consistent(&self) -> bool {
        self.row_margins.len() == self.col_margins.len()
            && self.row_margins.iter().sum::<u64>() == self.col_margins.iter().sum::<u64>()
    }

    pub fn total(&self) -> u64 {
        self.row_margins.iter().sum()
    }
}

pub fn sufficient_statistic(table: &CountTable, model: &ModelDef) -> Result<SufficientStat> {
    Error::check_size(model.size, table.size())?;
    let diagonal = match model.family {
        ModelFamily::Independence => DiagonalStat::None,
        ModelFamily::DiagonalEffect => DiagonalStat::Vector(table.diagonal()),
        ModelFamily::CommonDiagonalEffect => DiagonalStat::Sum(table.diagonal().iter().sum()),
    };
    Ok(SufficientStat {
        row_margins: table.row_margins(),
        col_margins: table.col_margins(),
        diagonal,
    })
}

/// Result of adding a multiple of a move to a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoveOutcome {
    Feasible(CountTable),
    /// Some cell would become negative.
    Infeasible,
}

impl MoveOutcome {
    pub fn feasible(self) -> Option<CountTable> {
        match self {
            MoveOutcome::Feasible(t) => Some(t),
            MoveOutcome::Infeasible => None,
        }
    }
}

/// Returns `table + scale * mv` when every cell stays nonnegative.
pub fn apply_move(table: &CountTable, mv: &Move, scale: i64) -> Result<MoveOutcome> {
    Error::check_size(table.size(), mv.size())?;
    let mut cells = Vec::with_capacity(table.cells.len());
    for (&c, &m) in table.cells.iter().zip(mv.cells.iter()) {
        let v = c as i64 + scale * m;
        if v < 0 {
            return Ok(MoveOutcome::Infeasible);
        }
        cells.push(v as u64);
    }
    Ok(MoveOutcome::Feasible(CountTable {
        size: table.size,
        cells,
        total: table.total,
    }))
}

/// Value of `prod p_ij^f_ij`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Likelihood {
    Positive(Q),
    /// A cell with positive count has probability zero.
    Zero { cell: (usize, usize) },
}

impl Likelihood {
    pub fn value(&self) -> Q {
        match self {
            Likelihood::Positive(v) => v.clone(),
            Likelihood::Zero { .. } => Q::zero(),
        }
    }
}

pub fn likelihood(prob: &ProbTable, table: &CountTable) -> Result<Likelihood> {
    Error::check_size(prob.size(), table.size())?;
    let n = prob.size();
    let mut value = Q::one();
    for (k, (p, &f)) in prob.cells().iter().zip(table.cells()).enumerate() {
        if f == 0 {
            continue;
        }
        if p.is_zero() {
            return Ok(Likelihood::Zero { cell: (k / n, k % n) });
        }
        value *= rational::pow(p, f as u32);
    }
    Ok(Likelihood::Positive(value))
}
