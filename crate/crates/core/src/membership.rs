//! Which strictly positive diagonal-effect points also have a mixture
//! representation `alpha r c^t + (1 - alpha) diag(d)`, and conversion between
//! the two parametrizations.
//!
//! With `N = sum(zr) sum(zc)` and `N_T` the toric normalizer,
//! `N_T - N = sum_i zr_i zc_i (zg_i - 1)`. A mixture witness must have
//! `alpha = N / N_T`, so it exists exactly when `N_T >= N` and every
//! `zg_i >= 1` (with `N_T = N` forcing `zg = 1`). The witness branch is
//! verified by recomposition in the tests rather than assumed.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{check_vanishing, gens_diag_effect, VanishingReport};
use crate::param::{mixture_point, normalizers, toric_point, uniform_vector, MixtureParams, Normalizers, ToricParams};
use crate::rational::{self, Q};
use crate::table::ProbTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ToricOnlyCase {
    /// `N_T < N`.
    #[serde(rename = "(i)")]
    BelowNormalizer,
    /// `N_T = N` but the diagonal parameters are not all 1.
    #[serde(rename = "(ii)")]
    EqualNormalizer,
    /// `N_T > N` with some diagonal parameter below 1.
    #[serde(rename = "(iii)")]
    DiagonalBelowOne,
}

impl ToricOnlyCase {
    pub fn tag(self) -> &'static str {
        match self {
            ToricOnlyCase::BelowNormalizer => "(i)",
            ToricOnlyCase::EqualNormalizer => "(ii)",
            ToricOnlyCase::DiagonalBelowOne => "(iii)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum MembershipVerdict {
    InBothWithWitness {
        witness: MixtureParams,
        normalizers: Normalizers,
    },
    ToricOnly {
        case_tag: ToricOnlyCase,
        normalizers: Normalizers,
    },
}

impl MembershipVerdict {
    pub fn witness(&self) -> Option<&MixtureParams> {
        match self {
            MembershipVerdict::InBothWithWitness { witness, .. } => Some(witness),
            MembershipVerdict::ToricOnly { .. } => None,
        }
    }

    pub fn case(&self) -> Option<ToricOnlyCase> {
        match self {
            MembershipVerdict::ToricOnly { case_tag, .. } => Some(*case_tag),
            MembershipVerdict::InBothWithWitness { .. } => None,
        }
    }

    pub fn normalizers(&self) -> &Normalizers {
        match self {
            MembershipVerdict::InBothWithWitness { normalizers, .. } | MembershipVerdict::ToricOnly { normalizers, .. } => normalizers,
        }
    }
}

/// Classify a strictly positive toric parameter vector.
pub fn classify_toric_point(params: &ToricParams) -> Result<MembershipVerdict> {
    for (name, v) in [("zeta_r", &params.zeta_r), ("zeta_c", &params.zeta_c), ("zeta_gamma", &params.zeta_g)] {
        if let Some(k) = v.iter().position(|x| !x.is_positive()) {
            return Err(Error::Hypothesis(format!(
                "{name} entry {} is not strictly positive; use the boundary check for such points",
                k + 1
            )));
        }
    }
    let norms = normalizers(params);
    let one = Q::one();
    let all_one = params.zeta_g.iter().all(|g| *g == one);
    let some_below = params.zeta_g.iter().any(|g| *g < one);
    let toric_only = |case_tag| MembershipVerdict::ToricOnly {
        case_tag,
        normalizers: norms.clone(),
    };
    let sr = rational::sum(&params.zeta_r);
    let sc = rational::sum(&params.zeta_c);
    let r: Vec<Q> = params.zeta_r.iter().map(|x| x / &sr).collect();
    let c: Vec<Q> = params.zeta_c.iter().map(|x| x / &sc).collect();
    if norms.n_t < norms.n {
        return Ok(toric_only(ToricOnlyCase::BelowNormalizer));
    }
    if norms.n_t == norms.n {
        if !all_one {
            return Ok(toric_only(ToricOnlyCase::EqualNormalizer));
        }
        // alpha = 1, so d does not enter the point; uniform keeps the output deterministic
        let witness = MixtureParams::new(one, r, c, uniform_vector(params.size()))?;
        return Ok(MembershipVerdict::InBothWithWitness { witness, normalizers: norms });
    }
    if some_below {
        return Ok(toric_only(ToricOnlyCase::DiagonalBelowOne));
    }
    let gap = &norms.n_t - &norms.n;
    let d: Vec<Q> = (0..params.size())
        .map(|i| &params.zeta_r[i] * &params.zeta_c[i] * (&params.zeta_g[i] - &one) / &gap)
        .collect();
    let alpha = &norms.n / &norms.n_t;
    let witness = MixtureParams::new(alpha, r, c, d).map_err(|e| Error::Internal(format!("witness construction: {e}")))?;
    Ok(MembershipVerdict::InBothWithWitness { witness, normalizers: norms })
}

/// Toric parameters reproducing a mixture point with full support.
pub fn mixture_to_toric(params: &MixtureParams) -> Result<ToricParams> {
    if params.alpha.is_zero() {
        return Err(Error::Hypothesis("alpha is 0; the point has no off-diagonal mass".into()));
    }
    for (name, v) in [("r", &params.r), ("c", &params.c)] {
        if let Some(k) = v.iter().position(Zero::is_zero) {
            return Err(Error::Hypothesis(format!("{name} entry {} is zero", k + 1)));
        }
    }
    let rest = Q::one() - &params.alpha;
    let zeta_c: Vec<Q> = params.c.iter().map(|x| x * &params.alpha).collect();
    let zeta_g: Vec<Q> = (0..params.size())
        .map(|i| Q::one() + &rest * &params.d[i] / (&params.alpha * &params.r[i] * &params.c[i]))
        .collect();
    ToricParams::new(params.r.clone(), zeta_c, zeta_g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryVerdict {
    RuledOutM1,
    RuledOutM2,
    RuledOutBoth,
    Inconclusive,
}

/// A support-pattern rule that fired; indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule")]
pub enum BoundaryFinding {
    /// `p[i,i] = 0` with row i and column i nonzero and the table not
    /// diagonal: a mixture would need `r_i c_i = 0`.
    ZeroDiagonal { i: usize },
    /// `p[i,j] = 0` off the diagonal with row i and column j nonzero: a toric
    /// point would need `zr_i zc_j = 0`.
    ZeroOffDiagonal { i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    /// `None` when the table is too small to carry invariants.
    pub invariants: Option<VanishingReport>,
    pub findings: Vec<BoundaryFinding>,
    pub verdict: BoundaryVerdict,
}

/// Necessary-condition checks for points that may have zero cells.
/// Toric model: diagonal-effect (ℳ₁). Mixture model: ℳ₂.
pub fn boundary_membership_check(prob: &ProbTable) -> BoundaryReport {
    let size = prob.size();
    let invariants = gens_diag_effect(size)
        .ok()
        .and_then(|gens| check_vanishing(&gens, prob).ok());
    let row_nonzero: Vec<bool> = (0..size).map(|i| !prob.row_sum(i).is_zero()).collect();
    let col_nonzero: Vec<bool> = (0..size).map(|j| !prob.col_sum(j).is_zero()).collect();
    let mut findings = Vec::new();
    let diagonal = prob.is_diagonal();
    for i in 0..size {
        if prob.get(i, i).is_zero() && row_nonzero[i] && col_nonzero[i] && !diagonal {
            findings.push(BoundaryFinding::ZeroDiagonal { i: i + 1 });
        }
    }
    for i in 0..size {
        for j in 0..size {
            if i != j && prob.get(i, j).is_zero() && row_nonzero[i] && col_nonzero[j] {
                findings.push(BoundaryFinding::ZeroOffDiagonal { i: i + 1, j: j + 1 });
            }
        }
    }
    let invariants_fail = invariants.as_ref().is_some_and(|r| !r.pass);
    let m1 = invariants_fail || findings.iter().any(|f| matches!(f, BoundaryFinding::ZeroOffDiagonal { .. }));
    // the mixture model has the same invariants, so failing them rules out both
    let m2 = invariants_fail || findings.iter().any(|f| matches!(f, BoundaryFinding::ZeroDiagonal { .. }));
    let verdict = match (m1, m2) {
        (true, true) => BoundaryVerdict::RuledOutBoth,
        (true, false) => BoundaryVerdict::RuledOutM1,
        (false, true) => BoundaryVerdict::RuledOutM2,
        (false, false) => BoundaryVerdict::Inconclusive,
    };
    BoundaryReport {
        invariants,
        findings,
        verdict,
    }
}

/// Recover toric parameters from a strictly positive table, normalized so
/// that `zr_1 = 1`. Off-diagonal cells determine `zr` and `zc` (this needs
/// at least three rows so every row has an off-diagonal partner column
/// avoiding row 1); the diagonal then gives `zg`. Fails if the table is not
/// reproduced exactly.
pub fn toric_params_from_table(prob: &ProbTable) -> Result<ToricParams> {
    let size = prob.size();
    if size < 3 {
        return Err(Error::SizeTooSmall { size, min: 3 });
    }
    if !prob.is_strictly_positive() {
        return Err(Error::Hypothesis("table has zero cells".into()));
    }
    let mut zc = vec![Q::zero(); size];
    for (j, z) in zc.iter_mut().enumerate().skip(1) {
        *z = prob.get(0, j).clone();
    }
    let mut zr = vec![Q::one(); size];
    for (i, z) in zr.iter_mut().enumerate().skip(1) {
        let j = if i == 1 { 2 } else { 1 };
        *z = prob.get(i, j) / &zc[j];
    }
    zc[0] = prob.get(1, 0) / &zr[1];
    let zg: Vec<Q> = (0..size).map(|i| prob.get(i, i) / (&zr[i] * &zc[i])).collect();
    let params = ToricParams::new(zr, zc, zg)?;
    let (recomposed, _) = toric_point(&params)?;
    if &recomposed != prob {
        return Err(Error::Hypothesis("table is not a diagonal-effect point".into()));
    }
    Ok(params)
}

/// `mixture_point(witness)` equals `toric_point(params)` cell by cell.
pub fn witness_recomposes(params: &ToricParams, witness: &MixtureParams) -> Result<bool> {
    Ok(toric_point(params)?.0 == mixture_point(witness)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn ones(n: usize) -> Vec<Q> {
        vec![qi(1); n]
    }

    #[test]
    fn witness_for_constant_two() {
        let p = ToricParams::new(ones(3), ones(3), vec![qi(2); 3]).unwrap();
        let v = classify_toric_point(&p).unwrap();
        let w = v.witness().unwrap();
        assert_eq!(w.alpha, q(3, 4));
        assert_eq!(w.r, vec![q(1, 3); 3]);
        assert_eq!(w.c, vec![q(1, 3); 3]);
        assert_eq!(w.d, vec![q(1, 3); 3]);
        assert!(witness_recomposes(&p, w).unwrap());
    }

    #[test]
    fn below_normalizer() {
        let p = ToricParams::new(ones(3), ones(3), vec![q(1, 2), qi(1), qi(1)]).unwrap();
        let v = classify_toric_point(&p).unwrap();
        assert_eq!(v.case(), Some(ToricOnlyCase::BelowNormalizer));
        assert_eq!(v.normalizers().n_t, q(17, 2));
        assert_eq!(v.normalizers().n, qi(9));
    }

    #[test]
    fn equal_normalizer_and_independence() {
        // gains and losses on the diagonal cancel
        let p = ToricParams::new(ones(3), ones(3), vec![q(1, 2), q(3, 2), qi(1)]).unwrap();
        assert_eq!(classify_toric_point(&p).unwrap().case(), Some(ToricOnlyCase::EqualNormalizer));
        let p = ToricParams::new(ones(3), vec![qi(1), qi(2), qi(3)], ones(3)).unwrap();
        let v = classify_toric_point(&p).unwrap();
        let w = v.witness().unwrap();
        assert!(w.alpha.is_one());
        assert!(witness_recomposes(&p, w).unwrap());
    }

    #[test]
    fn above_normalizer_with_low_gamma() {
        let p = ToricParams::new(ones(3), ones(3), vec![q(1, 2), qi(3), qi(1)]).unwrap();
        assert_eq!(classify_toric_point(&p).unwrap().case(), Some(ToricOnlyCase::DiagonalBelowOne));
    }

    #[test]
    fn rejects_boundary_parameters() {
        let p = ToricParams::new(vec![q(1, 3); 3], vec![q(1, 2); 3], vec![qi(0); 3]).unwrap();
        assert!(matches!(classify_toric_point(&p), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn mixture_round_trip() {
        let m = MixtureParams::new(q(3, 4), vec![q(1, 3); 3], vec![q(1, 3); 3], vec![q(1, 3); 3]).unwrap();
        let t = mixture_to_toric(&m).unwrap();
        assert_eq!(t.zeta_g, vec![qi(2); 3]);
        assert_eq!(toric_point(&t).unwrap().0, mixture_point(&m).unwrap());
        let back = classify_toric_point(&t).unwrap();
        assert_eq!(back.witness().unwrap(), &m);

        let independent = MixtureParams::new(qi(1), vec![q(1, 3); 3], vec![q(1, 2), q(1, 4), q(1, 4)], vec![q(1, 3); 3]).unwrap();
        assert_eq!(mixture_to_toric(&independent).unwrap().zeta_g, ones(3));
        let zero = MixtureParams::new(qi(0), vec![q(1, 3); 3], vec![q(1, 3); 3], vec![q(1, 3); 3]).unwrap();
        assert!(mixture_to_toric(&zero).is_err());
    }

    #[test]
    fn boundary_examples() {
        let sixth = q(1, 6);
        let z = qi(0);
        let hollow = ProbTable::from_rows(&[
            vec![z.clone(), sixth.clone(), sixth.clone()],
            vec![sixth.clone(), z.clone(), sixth.clone()],
            vec![sixth.clone(), sixth.clone(), z.clone()],
        ])
        .unwrap();
        let report = boundary_membership_check(&hollow);
        assert_eq!(report.verdict, BoundaryVerdict::RuledOutM2);
        assert!(report.invariants.unwrap().pass);

        let third = q(1, 3);
        let diag = ProbTable::from_rows(&[
            vec![third.clone(), z.clone(), z.clone()],
            vec![z.clone(), third.clone(), z.clone()],
            vec![z.clone(), z.clone(), third],
        ])
        .unwrap();
        assert_eq!(boundary_membership_check(&diag).verdict, BoundaryVerdict::RuledOutM1);
        assert_eq!(boundary_membership_check(&ProbTable::uniform(3).unwrap()).verdict, BoundaryVerdict::Inconclusive);
    }

    #[test]
    fn recovers_parameters() {
        let p = ToricParams::new(vec![qi(1), qi(2), qi(3)], vec![qi(2), qi(1), qi(5)], vec![q(1, 2), qi(3), qi(7)]).unwrap();
        let (point, _) = toric_point(&p).unwrap();
        let rec = toric_params_from_table(&point).unwrap();
        assert_eq!(toric_point(&rec).unwrap().0, point);
        let tenth = q(1, 10);
        let skew = ProbTable::from_rows(&[
            vec![tenth.clone(), tenth.clone(), tenth.clone()],
            vec![tenth.clone(), tenth.clone(), q(2, 10)],
            vec![tenth.clone(), tenth.clone(), tenth],
        ])
        .unwrap();
        assert!(matches!(toric_params_from_table(&skew), Err(Error::Hypothesis(_))));
    }
}
