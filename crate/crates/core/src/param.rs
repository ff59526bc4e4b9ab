//! Parametrizations of the model families.
//!
//! Toric points are `p_ij = zr_i zc_j` off the diagonal and
//! `p_ii = zr_i zc_i zg_i` on it, always divided by the normalizer `N_T` so
//! that they land in the simplex. Mixture points are
//! `alpha * r c^t + (1 - alpha) * diag(d)`.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, q, Q};
use crate::table::{CountTable, ModelFamily, ModelForm, ModelDef, ProbTable};

/// Denominator of the random rational scheme; numerators are drawn from 1..=100.
pub const RANDOM_DENOMINATOR: i64 = 101;
const RANDOM_NUMERATOR_MAX: i64 = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToricParams {
    #[serde(with = "rational::serde_qvec")]
    pub zeta_r: Vec<Q>,
    #[serde(with = "rational::serde_qvec")]
    pub zeta_c: Vec<Q>,
    #[serde(rename = "zeta_gamma", with = "rational::serde_qvec")]
    pub zeta_g: Vec<Q>,
}

impl ToricParams {
    pub fn new(zeta_r: Vec<Q>, zeta_c: Vec<Q>, zeta_g: Vec<Q>) -> Result<Self> {
        let size = zeta_r.len();
        if size == 0 {
            return Err(Error::params("zeta_r", "empty vector"));
        }
        for (name, v) in [("zeta_c", &zeta_c), ("zeta_gamma", &zeta_g)] {
            if v.len() != size {
                return Err(Error::params(name, format!("length {} differs from zeta_r length {size}", v.len())));
            }
        }
        for (name, v) in [("zeta_r", &zeta_r), ("zeta_c", &zeta_c), ("zeta_gamma", &zeta_g)] {
            if let Some(k) = v.iter().position(|x| x.is_negative()) {
                return Err(Error::params(name, format!("entry {} is negative", k + 1)));
            }
        }
        if zeta_r.iter().all(Zero::is_zero) {
            return Err(Error::params("zeta_r", "all entries are zero"));
        }
        if zeta_c.iter().all(Zero::is_zero) {
            return Err(Error::params("zeta_c", "all entries are zero"));
        }
        Ok(ToricParams { zeta_r, zeta_c, zeta_g })
    }

    /// Common-diagonal-effect parameters: one shared diagonal parameter.
    pub fn common(zeta_r: Vec<Q>, zeta_c: Vec<Q>, gamma: Q) -> Result<Self> {
        let zeta_g = vec![gamma; zeta_r.len()];
        Self::new(zeta_r, zeta_c, zeta_g)
    }

    pub fn size(&self) -> usize {
        self.zeta_r.len()
    }

    pub fn has_common_diagonal(&self) -> bool {
        self.zeta_g.windows(2).all(|w| w[0] == w[1])
    }

    pub fn is_strictly_positive(&self) -> bool {
        [&self.zeta_r, &self.zeta_c, &self.zeta_g]
            .iter()
            .all(|v| v.iter().all(|x| x.is_positive()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureParams {
    #[serde(with = "rational::serde_q")]
    pub alpha: Q,
    #[serde(with = "rational::serde_qvec")]
    pub r: Vec<Q>,
    #[serde(with = "rational::serde_qvec")]
    pub c: Vec<Q>,
    #[serde(with = "rational::serde_qvec")]
    pub d: Vec<Q>,
}

impl MixtureParams {
    pub fn new(alpha: Q, r: Vec<Q>, c: Vec<Q>, d: Vec<Q>) -> Result<Self> {
        if alpha.is_negative() || alpha > Q::one() {
            return Err(Error::params("alpha", format!("{} is outside [0,1]", rational::format_q(&alpha))));
        }
        let size = r.len();
        if size == 0 {
            return Err(Error::params("r", "empty vector"));
        }
        for (name, v) in [("r", &r), ("c", &c), ("d", &d)] {
            if v.len() != size {
                return Err(Error::params(name, format!("length {} differs from r length {size}", v.len())));
            }
            if let Some(k) = v.iter().position(|x| x.is_negative()) {
                return Err(Error::params(name, format!("entry {} is negative", k + 1)));
            }
            let total = rational::sum(v);
            if !total.is_one() {
                return Err(Error::params(name, format!("sums to {}, not 1", rational::format_q(&total))));
            }
        }
        Ok(MixtureParams { alpha, r, c, d })
    }

    /// Common-diagonal-effect mixture: `d` is fixed to `(1/I, ..., 1/I)`.
    pub fn common(alpha: Q, r: Vec<Q>, c: Vec<Q>) -> Result<Self> {
        let d = uniform_vector(r.len());
        Self::new(alpha, r, c, d)
    }

    pub fn size(&self) -> usize {
        self.r.len()
    }

    pub fn has_common_diagonal(&self) -> bool {
        self.d == uniform_vector(self.size())
    }
}

pub fn uniform_vector(size: usize) -> Vec<Q> {
    vec![q(1, size as i64); size]
}

/// Parameters of either form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelParams {
    Toric(ToricParams),
    Mixture(MixtureParams),
}

impl ModelParams {
    pub fn size(&self) -> usize {
        match self {
            ModelParams::Toric(p) => p.size(),
            ModelParams::Mixture(p) => p.size(),
        }
    }

    pub fn point(&self) -> Result<ProbTable> {
        match self {
            ModelParams::Toric(p) => Ok(toric_point(p)?.0),
            ModelParams::Mixture(p) => mixture_point(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalizers {
    /// Sum over all cells of `zr_i zc_j`.
    #[serde(rename = "N", with = "rational::serde_q")]
    pub n: Q,
    /// Off-diagonal `zr_i zc_j` plus diagonal `zr_i zc_i zg_i`.
    #[serde(rename = "N_T", with = "rational::serde_q")]
    pub n_t: Q,
}

pub fn normalizers(params: &ToricParams) -> Normalizers {
    let sr = rational::sum(&params.zeta_r);
    let sc = rational::sum(&params.zeta_c);
    let n = &sr * &sc;
    let mut n_t = n.clone();
    for i in 0..params.size() {
        let rc = &params.zeta_r[i] * &params.zeta_c[i];
        n_t += &rc * &params.zeta_g[i] - rc;
    }
    Normalizers { n, n_t }
}

pub fn toric_point(params: &ToricParams) -> Result<(ProbTable, Normalizers)> {
    let norms = normalizers(params);
    if !norms.n_t.is_positive() {
        return Err(Error::Degenerate("N_T is zero; the monomials cannot be normalized".into()));
    }
    let size = params.size();
    let mut cells = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let mut m = &params.zeta_r[i] * &params.zeta_c[j];
            if i == j {
                m *= &params.zeta_g[i];
            }
            cells.push(m / &norms.n_t);
        }
    }
    Ok((ProbTable::from_cells(size, cells)?, norms))
}

pub fn mixture_point(params: &MixtureParams) -> Result<ProbTable> {
    let size = params.size();
    let rest = Q::one() - &params.alpha;
    let mut cells = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let mut v = &params.alpha * &params.r[i] * &params.c[j];
            if i == j {
                v += &rest * &params.d[i];
            }
            cells.push(v);
        }
    }
    ProbTable::from_cells(size, cells)
}

/// Outcome of [`independence_factorize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factorization {
    /// `p_ij = r_i c_j` with `r`, `c` the row and column sums.
    RankOne { r: Vec<Q>, c: Vec<Q> },
    /// Some 2×2 minor is nonzero; reports one of them.
    NotRankOne { rows: (usize, usize), cols: (usize, usize), minor: Q },
}

/// Recovers the independence factors of a strictly positive table.
pub fn independence_factorize(prob: &ProbTable) -> Result<Factorization> {
    if !prob.is_strictly_positive() {
        return Err(Error::Hypothesis("factorization requires a strictly positive table".into()));
    }
    let n = prob.size();
    for i in 0..n {
        for k in i + 1..n {
            for j in 0..n {
                for l in j + 1..n {
                    let minor = prob.get(i, j) * prob.get(k, l) - prob.get(i, l) * prob.get(k, j);
                    if !minor.is_zero() {
                        return Ok(Factorization::NotRankOne { rows: (i, k), cols: (j, l), minor });
                    }
                }
            }
        }
    }
    let r = (0..n).map(|i| prob.row_sum(i)).collect();
    let c = (0..n).map(|j| prob.col_sum(j)).collect();
    Ok(Factorization::RankOne { r, c })
}

fn random_unit(rng: &mut ChaCha8Rng) -> Q {
    q(rng.gen_range(1..=RANDOM_NUMERATOR_MAX), RANDOM_DENOMINATOR)
}

fn random_vector(rng: &mut ChaCha8Rng, size: usize) -> Vec<Q> {
    (0..size).map(|_| random_unit(rng)).collect()
}

fn random_simplex(rng: &mut ChaCha8Rng, size: usize) -> Vec<Q> {
    let raw = random_vector(rng, size);
    let total = rational::sum(&raw);
    raw.into_iter().map(|x| x / &total).collect()
}

/// Deterministic strictly positive parameters for `model`.
///
/// Every numerator is uniform on `1..=100` over the denominator 101; mixture
/// vectors are then normalized to sum to one.
pub fn random_rational_point(model: &ModelDef, seed: u64) -> Result<ModelParams> {
    let size = model.size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match model.form {
        ModelForm::Toric => {
            let zeta_r = random_vector(&mut rng, size);
            let zeta_c = random_vector(&mut rng, size);
            let zeta_g = match model.family {
                ModelFamily::Independence => vec![Q::one(); size],
                ModelFamily::DiagonalEffect => random_vector(&mut rng, size),
                ModelFamily::CommonDiagonalEffect => vec![random_unit(&mut rng); size],
            };
            ModelParams::Toric(ToricParams::new(zeta_r, zeta_c, zeta_g)?)
        }
        ModelForm::Mixture => {
            let alpha = match model.family {
                ModelFamily::Independence => Q::one(),
                _ => random_unit(&mut rng),
            };
            let r = random_simplex(&mut rng, size);
            let c = random_simplex(&mut rng, size);
            let d = match model.family {
                ModelFamily::DiagonalEffect => random_simplex(&mut rng, size),
                _ => uniform_vector(size),
            };
            ModelParams::Mixture(MixtureParams::new(alpha, r, c, d)?)
        }
    })
}

/// Convergence threshold on the largest margin discrepancy.
pub const FIT_TOLERANCE: f64 = 1e-10;
/// Sweeps before the fit is reported as non-convergent.
pub const FIT_MAX_SWEEPS: usize = 10_000;

/// Expected counts from iterative proportional fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedTable {
    pub size: usize,
    pub expected: Vec<f64>,
    pub sweeps: usize,
    pub max_discrepancy: f64,
}

impl FittedTable {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.expected[i * self.size + j]
    }
}

/// Quasi-independence (diagonal-effect) fit.
///
/// Diagonal counts are sufficient, so the expected diagonal is the observed
/// one; the off-diagonal cells are fitted to the off-diagonal row and column
/// totals with the diagonal treated as structural zeros.
pub fn quasi_independence_fit(table: &CountTable) -> Result<FittedTable> {
    let n = table.size();
    let rows: Vec<f64> = (0..n)
        .map(|i| (table.row_margins()[i] - table.get(i, i)) as f64)
        .collect();
    let cols: Vec<f64> = (0..n)
        .map(|j| (table.col_margins()[j] - table.get(j, j)) as f64)
        .collect();
    let mut off = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off[i * n + j] = 1.0;
            }
        }
    }
    let (sweeps, discrepancy) = ipf(n, &mut off, &rows, &cols, None)?;
    let mut expected = off;
    for i in 0..n {
        expected[i * n + i] = table.get(i, i) as f64;
    }
    Ok(FittedTable {
        size: n,
        expected,
        sweeps,
        max_discrepancy: discrepancy,
    })
}

/// Common-diagonal-effect fit: rows, columns and the trace.
pub fn common_diagonal_fit(table: &CountTable) -> Result<FittedTable> {
    let n = table.size();
    let rows: Vec<f64> = table.row_margins().iter().map(|&x| x as f64).collect();
    let cols: Vec<f64> = table.col_margins().iter().map(|&x| x as f64).collect();
    let trace = table.diagonal().iter().sum::<u64>() as f64;
    let mut cells = vec![1.0; n * n];
    let (sweeps, discrepancy) = ipf(n, &mut cells, &rows, &cols, Some(trace))?;
    Ok(FittedTable {
        size: n,
        expected: cells,
        sweeps,
        max_discrepancy: discrepancy,
    })
}

/// Plain independence fit `row_i col_j / n`.
pub fn independence_fit(table: &CountTable) -> FittedTable {
    let n = table.size();
    let total = table.total() as f64;
    let rows = table.row_margins();
    let cols = table.col_margins();
    let mut expected = vec![0.0; n * n];
    if total > 0.0 {
        for i in 0..n {
            for j in 0..n {
                expected[i * n + j] = rows[i] as f64 * cols[j] as f64 / total;
            }
        }
    }
    FittedTable {
        size: n,
        expected,
        sweeps: 0,
        max_discrepancy: 0.0,
    }
}

/// Fitted expectation matching the model's sufficient statistic.
pub fn model_fit(table: &CountTable, family: ModelFamily) -> Result<FittedTable> {
    match family {
        ModelFamily::Independence => Ok(independence_fit(table)),
        ModelFamily::DiagonalEffect => quasi_independence_fit(table),
        ModelFamily::CommonDiagonalEffect => common_diagonal_fit(table),
    }
}

fn ipf(n: usize, cells: &mut [f64], rows: &[f64], cols: &[f64], trace: Option<f64>) -> Result<(usize, f64)> {
    let discrepancy = |cells: &[f64]| {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let s: f64 = cells[i * n..(i + 1) * n].iter().sum();
            worst = worst.max((s - rows[i]).abs());
        }
        for j in 0..n {
            let s: f64 = (0..n).map(|i| cells[i * n + j]).sum();
            worst = worst.max((s - cols[j]).abs());
        }
        if let Some(t) = trace {
            let s: f64 = (0..n).map(|i| cells[i * n + i]).sum();
            worst = worst.max((s - t).abs());
        }
        worst
    };
    for sweep in 0..FIT_MAX_SWEEPS {
        let d = discrepancy(cells);
        if d < FIT_TOLERANCE {
            return Ok((sweep, d));
        }
        for i in 0..n {
            let s: f64 = cells[i * n..(i + 1) * n].iter().sum();
            let f = if s > 0.0 { rows[i] / s } else { 0.0 };
            cells[i * n..(i + 1) * n].iter_mut().for_each(|c| *c *= f);
        }
        for j in 0..n {
            let s: f64 = (0..n).map(|i| cells[i * n + j]).sum();
            let f = if s > 0.0 { cols[j] / s } else { 0.0 };
            (0..n).for_each(|i| cells[i * n + j] *= f);
        }
        if let Some(t) = trace {
            let total: f64 = cells.iter().sum();
            let diag: f64 = (0..n).map(|i| cells[i * n + i]).sum();
            let off = total - diag;
            let target_off = rows.iter().sum::<f64>() - t;
            let fd = if diag > 0.0 { t / diag } else { 0.0 };
            let fo = if off > 0.0 { target_off / off } else { 0.0 };
            for i in 0..n {
                for j in 0..n {
                    cells[i * n + j] *= if i == j { fd } else { fo };
                }
            }
        }
    }
    let d = discrepancy(cells);
    if d < FIT_TOLERANCE {
        return Ok((FIT_MAX_SWEEPS, d));
    }
    Err(Error::Convergence(format!(
        "iterative proportional fitting stopped after {FIT_MAX_SWEEPS} sweeps with margin discrepancy {d:e}"
    )))
}

/// Helper for tests and examples: the outer product `r c^t` as a table.
pub fn outer_product(r: &[Q], c: &[Q]) -> Result<ProbTable> {
    let size = r.len();
    let cells = r.iter().flat_map(|ri| c.iter().map(move |cj| ri * cj)).collect();
    ProbTable::from_cells(size, cells)
}

/// `N_T - N` written as `sum_i zr_i zc_i (zg_i - 1)`.
pub fn normalizer_gap(params: &ToricParams) -> Q {
    (0..params.size()).fold(Q::zero(), |acc, i| {
        acc + &params.zeta_r[i] * &params.zeta_c[i] * (&params.zeta_g[i] - Q::one())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    fn v(xs: &[(i64, i64)]) -> Vec<Q> {
        xs.iter().map(|&(a, b)| q(a, b)).collect()
    }

    #[test]
    fn zero_diagonal_toric_point() {
        let p = ToricParams::new(v(&[(1, 3); 3]), v(&[(1, 2); 3]), v(&[(0, 1); 3])).unwrap();
        let (table, norms) = toric_point(&p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { q(0, 1) } else { q(1, 6) };
                assert_eq!(table.get(i, j), &expected);
            }
        }
        assert_eq!(norms.n, q(3, 2));
        assert_eq!(norms.n_t, q(1, 1));
    }

    #[test]
    fn all_ones_is_uniform() {
        let ones = vec![qi(1); 3];
        let p = ToricParams::new(ones.clone(), ones.clone(), ones).unwrap();
        let (table, norms) = toric_point(&p).unwrap();
        assert_eq!(table, ProbTable::uniform(3).unwrap());
        assert_eq!(norms.n, qi(9));
        assert_eq!(norms.n_t, qi(9));
    }

    #[test]
    fn gamma_two() {
        let ones = vec![qi(1); 3];
        let p = ToricParams::new(ones.clone(), ones, vec![qi(2); 3]).unwrap();
        let (table, norms) = toric_point(&p).unwrap();
        assert_eq!(norms.n, qi(9));
        assert_eq!(norms.n_t, qi(12));
        assert_eq!(table.get(0, 1), &q(1, 12));
        assert_eq!(table.get(2, 2), &q(1, 6));
    }

    #[test]
    fn degenerate_toric_rejected() {
        // zr = (1,0), zc = (0,1), gamma zero: only p_21 and p_12 terms, and p_12 = 1*1.
        let p = ToricParams::new(v(&[(1, 1), (0, 1)]), v(&[(1, 1), (0, 1)]), v(&[(0, 1), (0, 1)])).unwrap();
        assert!(matches!(toric_point(&p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn mixture_examples() {
        let third = v(&[(1, 3); 3]);
        let diag = mixture_point(&MixtureParams::new(qi(0), third.clone(), third.clone(), third.clone()).unwrap()).unwrap();
        assert!(diag.is_diagonal());
        assert_eq!(diag.get(1, 1), &q(1, 3));

        let uni = mixture_point(&MixtureParams::new(qi(1), third.clone(), third.clone(), third.clone()).unwrap()).unwrap();
        assert_eq!(uni, ProbTable::uniform(3).unwrap());

        let m = mixture_point(&MixtureParams::new(q(3, 4), third.clone(), third.clone(), third.clone()).unwrap()).unwrap();
        let ones = vec![qi(1); 3];
        let t = toric_point(&ToricParams::new(ones.clone(), ones, vec![qi(2); 3]).unwrap()).unwrap().0;
        assert_eq!(m, t);
        assert_eq!(m.get(0, 2), &q(1, 12));
        assert_eq!(m.get(0, 0), &q(1, 6));
    }

    #[test]
    fn mixture_validation() {
        let third = v(&[(1, 3); 3]);
        assert!(MixtureParams::new(qi(2), third.clone(), third.clone(), third.clone()).is_err());
        assert!(MixtureParams::new(qi(1), v(&[(1, 2); 3]), third.clone(), third.clone()).is_err());
        let common = MixtureParams::common(q(1, 2), third.clone(), third).unwrap();
        assert!(common.has_common_diagonal());
    }

    #[test]
    fn normalizer_examples() {
        let ones = vec![qi(1); 3];
        let p = ToricParams::new(ones.clone(), ones.clone(), ones.clone()).unwrap();
        let nz = normalizers(&p);
        assert_eq!((nz.n.clone(), nz.n_t.clone()), (qi(9), qi(9)));
        let p = ToricParams::new(ones.clone(), ones, vec![qi(2); 3]).unwrap();
        let nz = normalizers(&p);
        assert_eq!((nz.n, nz.n_t), (qi(9), qi(12)));
    }

    #[test]
    fn factorize_examples() {
        let r = v(&[(1, 6), (1, 3), (1, 2)]);
        let c = v(&[(1, 2), (1, 3), (1, 6)]);
        let p = outer_product(&r, &c).unwrap();
        assert_eq!(independence_factorize(&p).unwrap(), Factorization::RankOne { r, c });

        let u = ProbTable::uniform(2).unwrap();
        assert_eq!(
            independence_factorize(&u).unwrap(),
            Factorization::RankOne { r: v(&[(1, 2); 2]), c: v(&[(1, 2); 2]) }
        );

        let p = ProbTable::from_rows(&[v(&[(1, 3), (1, 6)]), v(&[(1, 6), (1, 3)])]).unwrap();
        match independence_factorize(&p).unwrap() {
            Factorization::NotRankOne { minor, .. } => assert_eq!(minor, q(1, 12)),
            other => panic!("unexpected {other:?}"),
        }

        let z = ProbTable::from_rows(&[v(&[(1, 2), (0, 1)]), v(&[(0, 1), (1, 2)])]).unwrap();
        assert!(independence_factorize(&z).is_err());
    }

    #[test]
    fn random_points_are_deterministic_and_valid() {
        let toric = ModelDef::toric(ModelFamily::DiagonalEffect, 4).unwrap();
        let a = random_rational_point(&toric, 1).unwrap();
        assert_eq!(a, random_rational_point(&toric, 1).unwrap());
        assert_ne!(a, random_rational_point(&toric, 2).unwrap());
        match a {
            ModelParams::Toric(p) => assert!(p.is_strictly_positive()),
            _ => panic!("expected toric"),
        }

        let mix = ModelDef::mixture(ModelFamily::CommonDiagonalEffect, 3).unwrap();
        match random_rational_point(&mix, 1).unwrap() {
            ModelParams::Mixture(m) => {
                assert!(m.alpha > Q::zero() && m.alpha < Q::one());
                assert!(m.has_common_diagonal());
                assert_eq!(rational::sum(&m.r), Q::one());
            }
            _ => panic!("expected mixture"),
        }

        let common = ModelDef::toric(ModelFamily::CommonDiagonalEffect, 3).unwrap();
        match random_rational_point(&common, 7).unwrap() {
            ModelParams::Toric(p) => assert!(p.has_common_diagonal()),
            _ => panic!("expected toric"),
        }
    }

    #[test]
    fn normalizer_gap_identity() {
        for seed in 0..50 {
            let def = ModelDef::toric(ModelFamily::DiagonalEffect, 4).unwrap();
            let ModelParams::Toric(p) = random_rational_point(&def, seed).unwrap() else { unreachable!() };
            let nz = normalizers(&p);
            assert_eq!(&nz.n_t - &nz.n, normalizer_gap(&p));
        }
    }

    #[test]
    fn fit_symmetric_table_is_fixed_point() {
        let t = CountTable::from_rows(&[[0u64, 1, 1], [1, 0, 1], [1, 1, 0]]).unwrap();
        let fit = quasi_independence_fit(&t).unwrap();
        for (e, &o) in fit.expected.iter().zip(t.cells()) {
            assert!((e - o as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn fit_reproduces_scaled_toric_point() {
        // zr = (1,2,3), zc = (3,2,1), gamma = (5,1,2): cells are integers already.
        let zr = [1u64, 2, 3];
        let zc = [3u64, 2, 1];
        let g = [5u64, 1, 2];
        let mut cells = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                cells.push(zr[i] * zc[j] * if i == j { g[i] } else { 1 });
            }
        }
        let t = CountTable::from_cells(3, cells).unwrap();
        let fit = quasi_independence_fit(&t).unwrap();
        for (e, &o) in fit.expected.iter().zip(t.cells()) {
            assert!((e - o as f64).abs() < 1e-8, "{e} vs {o}");
        }
    }

    #[test]
    fn fit_keeps_observed_diagonal() {
        let t = CountTable::from_rows(&[[3u64, 1, 4], [1, 5, 9], [2, 6, 5]]).unwrap();
        let fit = quasi_independence_fit(&t).unwrap();
        for i in 0..3 {
            assert_eq!(fit.get(i, i), t.get(i, i) as f64);
        }
        assert!(fit.max_discrepancy < FIT_TOLERANCE);
    }

    #[test]
    fn common_fit_matches_margins_and_trace() {
        let t = CountTable::from_rows(&[[3u64, 1, 4], [1, 5, 9], [2, 6, 5]]).unwrap();
        let fit = common_diagonal_fit(&t).unwrap();
        let trace: f64 = (0..3).map(|i| fit.get(i, i)).sum();
        assert!((trace - 13.0).abs() < 1e-9);
        for i in 0..3 {
            let row: f64 = (0..3).map(|j| fit.get(i, j)).sum();
            assert!((row - t.row_margins()[i] as f64).abs() < 1e-9);
        }
    }
}
