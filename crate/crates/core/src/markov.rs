//! Markov-basis moves, fibers, the fiber walk and exact conditional tests.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::{model_fit, FittedTable};
use crate::table::{
    apply_move, sufficient_statistic, CountTable, DiagonalStat, ModelFamily, ModelDef, Move, MoveFamily, MoveOutcome,
    SufficientStat,
};

/// Moves deduplicated up to sign, in insertion order.
#[derive(Default)]
struct MoveSet {
    seen: HashSet<Vec<i64>>,
    moves: Vec<Move>,
}

impl MoveSet {
    fn push(&mut self, size: usize, entries: &[(usize, usize, i64)], family: MoveFamily) -> Result<()> {
        let mv = Move::from_entries(size, entries, family)?;
        if !mv.is_zero() && self.seen.insert(mv.canonical_cells()) {
            self.moves.push(mv);
        }
        Ok(())
    }

    fn push_with_transpose(&mut self, size: usize, entries: &[(usize, usize, i64)], family: MoveFamily) -> Result<()> {
        self.push(size, entries, family)?;
        let t: Vec<_> = entries.iter().map(|&(i, j, v)| (j, i, v)).collect();
        self.push(size, &t, family)
    }
}

fn require_size(size: usize) -> Result<()> {
    if size < 3 {
        Err(Error::SizeTooSmall { size, min: 3 })
    } else {
        Ok(())
    }
}

fn distinct(idx: &[usize]) -> bool {
    (0..idx.len()).all(|a| (a + 1..idx.len()).all(|b| idx[a] != idx[b]))
}

fn diag_effect_into(set: &mut MoveSet, size: usize) -> Result<()> {
    for i in 0..size {
        for k in i + 1..size {
            for j in 0..size {
                for l in j + 1..size {
                    if distinct(&[i, k, j, l]) {
                        set.push(size, &[(i, j, 1), (i, l, -1), (k, j, -1), (k, l, 1)], MoveFamily::Basic2)?;
                    }
                }
            }
        }
    }
    for a in 0..size {
        for b in a + 1..size {
            for c in b + 1..size {
                set.push(
                    size,
                    &[(a, b, 1), (a, c, -1), (b, a, -1), (b, c, 1), (c, a, 1), (c, b, -1)],
                    MoveFamily::Triangle3,
                )?;
            }
        }
    }
    Ok(())
}

/// Minimal Markov basis of the diagonal-effect model: degree-2 moves on four
/// distinct indices (I ≥ 4) and degree-3 triangle moves (I ≥ 3). One move per
/// sign class; the walk uses both signs.
pub fn moves_diag_effect(size: usize) -> Result<Vec<Move>> {
    require_size(size)?;
    let mut set = MoveSet::default();
    diag_effect_into(&mut set, size)?;
    Ok(set.moves)
}

/// Markov basis of the common-diagonal-effect model: the diagonal-effect
/// moves plus four families that trade mass between diagonal cells.
pub fn moves_common_diag(size: usize) -> Result<Vec<Move>> {
    require_size(size)?;
    let n = size;
    let mut set = MoveSet::default();
    diag_effect_into(&mut set, n)?;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if !distinct(&[a, b, c]) {
                    continue;
                }
                let f = MoveFamily::DiagonalShift3;
                set.push(n, &[(a, a, 1), (a, c, -1), (b, b, -1), (b, c, 1), (c, a, -1), (c, b, 1)], f)?;
                set.push(n, &[(a, a, 1), (a, b, -1), (b, a, -1), (b, c, 1), (c, b, 1), (c, c, -1)], f)?;
                set.push(n, &[(a, b, -1), (a, c, 1), (b, a, -1), (b, b, 1), (c, a, 1), (c, c, -1)], f)?;
            }
        }
    }
    for i in 0..n {
        for ip in 0..n {
            for j in 0..n {
                if !distinct(&[i, ip, j]) {
                    continue;
                }
                set.push_with_transpose(
                    n,
                    &[(i, i, 1), (i, ip, 1), (i, j, -2), (ip, i, -1), (ip, ip, -1), (ip, j, 2)],
                    MoveFamily::Split4,
                )?;
                for jp in 0..n {
                    if !distinct(&[i, ip, j, jp]) {
                        continue;
                    }
                    set.push(
                        n,
                        &[(i, i, 1), (i, j, -1), (ip, ip, -1), (ip, j, 1), (jp, i, -1), (jp, ip, 1)],
                        MoveFamily::Mixed3,
                    )?;
                    set.push_with_transpose(
                        n,
                        &[
                            (i, i, 1),
                            (i, ip, 1),
                            (i, j, -1),
                            (i, jp, -1),
                            (ip, i, -1),
                            (ip, ip, -1),
                            (ip, j, 1),
                            (ip, jp, 1),
                        ],
                        MoveFamily::Double4,
                    )?;
                }
            }
        }
    }
    Ok(set.moves)
}

/// All basic 2×2 moves, the Markov basis of the independence model.
pub fn moves_independence(size: usize) -> Result<Vec<Move>> {
    if size < 2 {
        return Err(Error::SizeTooSmall { size, min: 2 });
    }
    let mut set = MoveSet::default();
    for i in 0..size {
        for k in i + 1..size {
            for j in 0..size {
                for l in j + 1..size {
                    set.push(size, &[(i, j, 1), (i, l, -1), (k, j, -1), (k, l, 1)], MoveFamily::Minor2)?;
                }
            }
        }
    }
    Ok(set.moves)
}

/// The move family matching `model`.
pub fn moves_for(model: &ModelDef) -> Result<Vec<Move>> {
    match model.family {
        ModelFamily::Independence => moves_independence(model.size),
        ModelFamily::DiagonalEffect => moves_diag_effect(model.size),
        ModelFamily::CommonDiagonalEffect => moves_common_diag(model.size),
    }
}

/// Default cap on backtracking nodes for [`enumerate_fiber`].
pub const DEFAULT_FIBER_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fiber {
    pub stat: SufficientStat,
    pub model: ModelDef,
    pub tables: Vec<CountTable>,
}

impl Fiber {
    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}

struct Enumerator<'a> {
    n: usize,
    free: Vec<bool>,
    last_free_in_row: Vec<Option<usize>>,
    common: bool,
    cells: Vec<u64>,
    rows: Vec<u64>,
    cols: Vec<u64>,
    diag: u64,
    nodes: u64,
    budget: u64,
    out: &'a mut Vec<CountTable>,
}

impl Enumerator<'_> {
    fn run(&mut self, k: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Budget(format!(
                "fiber enumeration exceeded {} nodes; use the fiber walk instead",
                self.budget
            )));
        }
        let n = self.n;
        if k == n * n {
            if self.rows.iter().all(|&r| r == 0) && self.cols.iter().all(|&c| c == 0) && self.diag == 0 {
                self.out.push(CountTable::from_cells(n, self.cells.clone())?);
            }
            return Ok(());
        }
        let (i, j) = (k / n, k % n);
        if !self.free[k] {
            return self.run(k + 1);
        }
        let on_diag = i == j;
        let mut hi = self.rows[i].min(self.cols[j]);
        if self.common && on_diag {
            hi = hi.min(self.diag);
        }
        let mut lo = 0;
        if self.last_free_in_row[i] == Some(j) || i == n - 1 {
            let forced = if i == n - 1 { self.cols[j] } else { self.rows[i] };
            if forced > hi {
                return Ok(());
            }
            lo = forced;
            hi = forced;
        }
        for v in lo..=hi {
            self.cells[k] = v;
            self.rows[i] -= v;
            self.cols[j] -= v;
            if self.common && on_diag {
                self.diag -= v;
            }
            let res = self.run(k + 1);
            self.rows[i] += v;
            self.cols[j] += v;
            if self.common && on_diag {
                self.diag += v;
            }
            res?;
        }
        self.cells[k] = 0;
        Ok(())
    }
}

/// Every nonnegative table with the given sufficient statistic, by row-major
/// backtracking with row and column remainders.
pub fn enumerate_fiber(stat: &SufficientStat, model: &ModelDef, budget: u64) -> Result<Fiber> {
    let n = model.size;
    Error::check_size(n, stat.size())?;
    Error::check_size(n, stat.col_margins.len())?;
    let mut tables = Vec::new();
    let fiber = |tables| Fiber {
        stat: stat.clone(),
        model: *model,
        tables,
    };
    if !stat.is_consistent() {
        return Ok(fiber(tables));
    }
    let mut rows = stat.row_margins.clone();
    let mut cols = stat.col_margins.clone();
    let mut cells = vec![0u64; n * n];
    let mut free = vec![true; n * n];
    let (common, diag) = match (&stat.diagonal, model.family) {
        (DiagonalStat::None, ModelFamily::Independence) => (false, 0),
        (DiagonalStat::Vector(d), ModelFamily::DiagonalEffect) => {
            Error::check_size(n, d.len())?;
            for i in 0..n {
                if d[i] > rows[i] || d[i] > cols[i] {
                    return Ok(fiber(tables));
                }
                rows[i] -= d[i];
                cols[i] -= d[i];
                cells[i * n + i] = d[i];
                free[i * n + i] = false;
            }
            (false, 0)
        }
        (DiagonalStat::Sum(s), ModelFamily::CommonDiagonalEffect) => (true, *s),
        _ => {
            return Err(Error::InvalidModel(
                "sufficient statistic does not match the model family".into(),
            ))
        }
    };
    let last_free_in_row = (0..n).map(|i| (0..n).rev().find(|&j| free[i * n + j])).collect();
    let mut e = Enumerator {
        n,
        free,
        last_free_in_row,
        common,
        cells,
        rows,
        cols,
        diag,
        nodes: 0,
        budget,
        out: &mut tables,
    };
    e.run(0)?;
    Ok(fiber(tables))
}

/// Connected components of the move graph on a fiber.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub connected: bool,
    /// Indices into `fiber.tables`, one list per component.
    pub components: Vec<Vec<usize>>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Links fiber members that differ by one feasible move (either sign).
pub fn is_connected(fiber: &Fiber, moves: &[Move]) -> Result<ConnectivityReport> {
    let index: HashMap<&[u64], usize> = fiber.tables.iter().enumerate().map(|(k, t)| (t.cells(), k)).collect();
    let mut parent: Vec<usize> = (0..fiber.len()).collect();
    for (k, table) in fiber.tables.iter().enumerate() {
        for mv in moves {
            for sign in [1, -1] {
                if let MoveOutcome::Feasible(next) = apply_move(table, mv, sign)? {
                    if let Some(&other) = index.get(next.cells()) {
                        let (a, b) = (find(&mut parent, k), find(&mut parent, other));
                        if a != b {
                            parent[a] = b;
                        }
                    }
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for k in 0..fiber.len() {
        let root = find(&mut parent, k);
        groups.entry(root).or_default().push(k);
    }
    let mut components: Vec<Vec<usize>> = groups.into_values().collect();
    components.sort();
    Ok(ConnectivityReport {
        connected: components.len() <= 1,
        components,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stationary {
    Uniform,
    Hypergeometric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Recorded steps after burn-in.
    pub steps: u64,
    pub burn_in: u64,
    /// Keep every `thinning`-th state; 0 and 1 both keep every state.
    pub thinning: u64,
    pub seed: u64,
    pub stationary: Stationary,
}

impl WalkConfig {
    /// Burn-in `10 * sqrt(steps)` and no thinning. Both are arbitrary
    /// defaults and are echoed in every result.
    pub fn new(steps: u64, seed: u64, stationary: Stationary) -> Self {
        WalkConfig {
            steps,
            burn_in: default_burn_in(steps),
            thinning: 1,
            seed,
            stationary,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::params("steps", "must be positive"));
        }
        Ok(())
    }

    fn stride(&self) -> u64 {
        self.thinning.max(1)
    }
}

pub fn default_burn_in(steps: u64) -> u64 {
    (10.0 * (steps as f64).sqrt()).round() as u64
}

/// Metropolis acceptance for the hypergeometric law: `prod f! / prod f'!`
/// compared exactly in integers while it fits, in log space otherwise.
fn hypergeometric_accept(current: &CountTable, mv: &Move, sign: i64, rng: &mut ChaCha8Rng) -> bool {
    let mut num: Option<u128> = Some(1);
    let mut den: Option<u128> = Some(1);
    let mut log_ratio = 0.0f64;
    for (&f, &m) in current.cells().iter().zip(mv.cells()) {
        let delta = sign * m;
        if delta > 0 {
            for x in f + 1..=f + delta as u64 {
                den = den.and_then(|d| d.checked_mul(x as u128));
                log_ratio -= (x as f64).ln();
            }
        } else if delta < 0 {
            for x in f + 1 - delta.unsigned_abs()..=f {
                num = num.and_then(|d| d.checked_mul(x as u128));
                log_ratio += (x as f64).ln();
            }
        }
    }
    match (num, den) {
        (Some(num), Some(den)) => num >= den || rng.gen_range(0..den) < num,
        _ => log_ratio >= 0.0 || rng.gen::<f64>().ln() < log_ratio,
    }
}

/// Markov chain on the fiber of `start` driven by a move set.
///
/// Each step draws a move and a sign uniformly; infeasible proposals leave
/// the state unchanged. Emits the states after burn-in, thinned.
pub struct FiberWalk<'a> {
    state: CountTable,
    moves: &'a [Move],
    config: WalkConfig,
    rng: ChaCha8Rng,
    burned: bool,
    emitted: u64,
    accepted: u64,
    proposed: u64,
}

impl<'a> FiberWalk<'a> {
    pub fn new(start: CountTable, moves: &'a [Move], config: WalkConfig) -> Result<Self> {
        config.validate()?;
        if moves.is_empty() {
            return Err(Error::InvalidMove("the fiber walk needs at least one move".into()));
        }
        if let Some(mv) = moves.iter().find(|m| m.size() != start.size()) {
            return Err(Error::SizeMismatch {
                expected: start.size(),
                found: mv.size(),
            });
        }
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(FiberWalk {
            state: start,
            moves,
            config,
            rng,
            burned: false,
            emitted: 0,
            accepted: 0,
            proposed: 0,
        })
    }

    fn step(&mut self) {
        let mv = &self.moves[self.rng.gen_range(0..self.moves.len())];
        let sign = if self.rng.gen::<bool>() { 1 } else { -1 };
        self.proposed += 1;
        let Ok(MoveOutcome::Feasible(next)) = apply_move(&self.state, mv, sign) else {
            return;
        };
        let accept = match self.config.stationary {
            Stationary::Uniform => true,
            Stationary::Hypergeometric => hypergeometric_accept(&self.state, mv, sign, &mut self.rng),
        };
        if accept {
            self.state = next;
            self.accepted += 1;
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn config(&self) -> &WalkConfig {
        &self.config
    }
}

impl Iterator for FiberWalk<'_> {
    type Item = CountTable;

    fn next(&mut self) -> Option<CountTable> {
        if !self.burned {
            for _ in 0..self.config.burn_in {
                self.step();
            }
            self.burned = true;
        }
        let stride = self.config.stride();
        if self.emitted >= self.config.steps / stride {
            return None;
        }
        for _ in 0..stride {
            self.step();
        }
        self.emitted += 1;
        Some(self.state.clone())
    }
}

pub fn fiber_walk<'a>(start: CountTable, moves: &'a [Move], config: WalkConfig) -> Result<FiberWalk<'a>> {
    FiberWalk::new(start, moves, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestMethod {
    #[serde(rename = "MCMC")]
    Mcmc,
    Enumeration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub model: ModelDef,
    pub statistic_observed: f64,
    pub p_value: f64,
    pub monte_carlo_stderr: f64,
    pub samples_used: u64,
    pub method: TestMethod,
    /// Present for MCMC results.
    pub effective_samples: Option<f64>,
    pub fiber_size: Option<usize>,
    pub config: Option<WalkConfig>,
    pub chains: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestOptions {
    /// Try exhaustive enumeration first.
    pub enumerate: bool,
    pub budget: u64,
    /// Independent chains, seeded `seed + k`.
    pub chains: u64,
}

impl Default for TestOptions {
    fn default() -> Self {
        TestOptions {
            enumerate: false,
            budget: DEFAULT_FIBER_BUDGET,
            chains: 1,
        }
    }
}

/// Pearson chi-square of `table` against the expected counts.
pub fn pearson_statistic(table: &CountTable, fit: &FittedTable) -> f64 {
    table
        .cells()
        .iter()
        .zip(&fit.expected)
        .filter(|(_, &e)| e > 1e-300)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

fn at_least(stat: f64, observed: f64) -> bool {
    stat >= observed - 1e-9 * observed.abs().max(1.0)
}

/// `n! / prod f!`, exact while it fits in 128 bits.
fn multinomial_weight(table: &CountTable) -> Option<u128> {
    let mut remaining = 0u64;
    let mut w: u128 = 1;
    for &f in table.cells() {
        for x in 1..=f {
            remaining += 1;
            w = w.checked_mul(remaining as u128)? / x as u128;
        }
    }
    Some(w)
}

fn log_weight(table: &CountTable) -> f64 {
    -table
        .cells()
        .iter()
        .map(|&f| (1..=f).map(|x| (x as f64).ln()).sum::<f64>())
        .sum::<f64>()
}

fn check_table(table: &CountTable, model: &ModelDef) -> Result<()> {
    Error::check_size(model.size, table.size())?;
    if table.total() == 0 {
        return Err(Error::InvalidTable("the test needs a nonzero table".into()));
    }
    if model.structural_zero_diagonal && table.diagonal().iter().any(|&d| d > 0) {
        return Err(Error::InvalidTable("positive count on a structural-zero diagonal".into()));
    }
    Ok(())
}

/// Exact p-value by enumerating the fiber under the hypergeometric law.
pub fn exact_test_enumerated(table: &CountTable, model: &ModelDef, budget: u64) -> Result<TestResult> {
    check_table(table, model)?;
    let fit = model_fit(table, model.family)?;
    let observed = pearson_statistic(table, &fit);
    let stat = sufficient_statistic(table, model)?;
    let fiber = enumerate_fiber(&stat, model, budget)?;
    let exact: Option<Vec<u128>> = fiber.tables.iter().map(multinomial_weight).collect();
    let p_value = match exact {
        Some(weights) => {
            let mut total = 0u128;
            let mut hit = 0u128;
            for (t, w) in fiber.tables.iter().zip(&weights) {
                total = total.checked_add(*w).ok_or_else(|| Error::Internal("weight overflow".into()))?;
                if at_least(pearson_statistic(t, &fit), observed) {
                    hit += *w;
                }
            }
            hit as f64 / total as f64
        }
        None => {
            let logs: Vec<f64> = fiber.tables.iter().map(log_weight).collect();
            let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            let mut hit = 0.0;
            for (t, l) in fiber.tables.iter().zip(&logs) {
                let w = (l - top).exp();
                total += w;
                if at_least(pearson_statistic(t, &fit), observed) {
                    hit += w;
                }
            }
            hit / total
        }
    };
    Ok(TestResult {
        model: *model,
        statistic_observed: observed,
        p_value: p_value.clamp(0.0, 1.0),
        monte_carlo_stderr: 0.0,
        samples_used: fiber.len() as u64,
        method: TestMethod::Enumeration,
        effective_samples: None,
        fiber_size: Some(fiber.len()),
        config: None,
        chains: 0,
    })
}

const BATCHES: usize = 50;

fn run_chain(table: &CountTable, model: &ModelDef, fit: &FittedTable, observed: f64, config: WalkConfig) -> Result<Vec<bool>> {
    let moves = moves_for(model)?;
    let stat = sufficient_statistic(table, model)?;
    let walk = fiber_walk(table.clone(), &moves, config)?;
    let mut hits = Vec::new();
    for t in walk {
        if sufficient_statistic(&t, model)? != stat {
            return Err(Error::Internal("fiber walk left the fiber".into()));
        }
        hits.push(at_least(pearson_statistic(&t, fit), observed));
    }
    Ok(hits)
}

/// Monte Carlo p-value from hypergeometric fiber walks. The standard error
/// uses batch means over each chain.
pub fn exact_test_mcmc(table: &CountTable, model: &ModelDef, config: &WalkConfig, chains: u64) -> Result<TestResult> {
    check_table(table, model)?;
    let chains = chains.max(1);
    let mut config = config.clone();
    config.stationary = Stationary::Hypergeometric;
    let fit = model_fit(table, model.family)?;
    let observed = pearson_statistic(table, &fit);
    let per_chain: Vec<Result<Vec<bool>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..chains)
            .map(|k| {
                let mut cfg = config.clone();
                cfg.seed = config.seed.wrapping_add(k);
                let fit = &fit;
                scope.spawn(move || run_chain(table, model, fit, observed, cfg))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Internal("chain panicked".into()))))
            .collect()
    });
    let mut batch_means = Vec::new();
    let mut hits = 0u64;
    let mut total = 0u64;
    for chain in per_chain {
        let chain = chain?;
        total += chain.len() as u64;
        hits += chain.iter().filter(|&&h| h).count() as u64;
        let size = (chain.len() / BATCHES).max(1);
        for batch in chain.chunks(size) {
            if batch.len() == size {
                batch_means.push(batch.iter().filter(|&&h| h).count() as f64 / size as f64);
            }
        }
    }
    let p = hits as f64 / total as f64;
    let b = batch_means.len() as f64;
    let stderr = if b > 1.0 {
        let mean = batch_means.iter().sum::<f64>() / b;
        let var = batch_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1.0);
        (var / b).sqrt()
    } else {
        0.0
    };
    let effective = if stderr > 0.0 { p * (1.0 - p) / (stderr * stderr) } else { total as f64 };
    Ok(TestResult {
        model: *model,
        statistic_observed: observed,
        p_value: p.clamp(0.0, 1.0),
        monte_carlo_stderr: stderr,
        samples_used: total,
        method: TestMethod::Mcmc,
        effective_samples: Some(effective),
        fiber_size: None,
        config: Some(config),
        chains,
    })
}

/// Conditional goodness-of-fit test of `model` on the fiber of `table`.
///
/// The statistic is Pearson's chi-square against the model fit. With
/// `options.enumerate` the fiber is enumerated when it fits in the budget;
/// otherwise the p-value comes from the hypergeometric fiber walk.
pub fn exact_test(table: &CountTable, model: &ModelDef, config: &WalkConfig, options: &TestOptions) -> Result<TestResult> {
    if options.enumerate {
        match exact_test_enumerated(table, model, options.budget) {
            Err(Error::Budget(_)) => {}
            other => return other,
        }
    }
    exact_test_mcmc(table, model, config, options.chains)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::ModelForm;

    fn t(rows: &[&[u64]]) -> CountTable {
        CountTable::from_rows(rows).unwrap()
    }

    fn def(family: ModelFamily, size: usize) -> ModelDef {
        ModelDef::new(family, ModelForm::Toric, size).unwrap()
    }

    fn stat_of(table: &CountTable, model: &ModelDef) -> SufficientStat {
        sufficient_statistic(table, model).unwrap()
    }

    #[test]
    fn diag_effect_move_counts() {
        let m3 = moves_diag_effect(3).unwrap();
        assert_eq!(m3.len(), 1);
        assert_eq!(m3[0].family(), MoveFamily::Triangle3);
        let m4 = moves_diag_effect(4).unwrap();
        assert_eq!(m4.iter().filter(|m| m.degree() == 2).count(), 6);
        assert_eq!(m4.iter().filter(|m| m.degree() == 3).count(), 4);
        for m in moves_diag_effect(5).unwrap() {
            assert!((0..5).all(|i| m.get(i, i) == 0));
        }
        assert!(moves_diag_effect(2).is_err());
    }

    #[test]
    fn common_diag_contains_printed_moves() {
        let moves = moves_common_diag(3).unwrap();
        let keys: HashSet<Vec<i64>> = moves.iter().map(Move::canonical_cells).collect();
        let printed = Move::from_cells(3, vec![1, 0, -1, 0, -1, 1, -1, 1, 0], MoveFamily::DiagonalShift3).unwrap();
        assert!(keys.contains(&printed.canonical_cells()));
        // +1 +1 -2 on rows 1,2 over columns 1,2,3 and its transpose
        let split = Move::from_cells(3, vec![1, 1, -2, -1, -1, 2, 0, 0, 0], MoveFamily::Split4).unwrap();
        assert!(keys.contains(&split.canonical_cells()));
        assert!(keys.contains(&split.transposed().canonical_cells()));
        for n in 3..=5 {
            for m in moves_common_diag(n).unwrap() {
                for i in 0..n {
                    assert_eq!((0..n).map(|j| m.get(i, j)).sum::<i64>(), 0);
                    assert_eq!((0..n).map(|j| m.get(j, i)).sum::<i64>(), 0);
                }
                assert_eq!((0..n).map(|i| m.get(i, i)).sum::<i64>(), 0);
            }
        }
        assert!(moves_common_diag(4).unwrap().iter().any(|m| m.family() == MoveFamily::Double4));
    }

    #[test]
    fn derangement_fiber() {
        let table = t(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]);
        for family in [ModelFamily::DiagonalEffect, ModelFamily::CommonDiagonalEffect] {
            let model = def(family, 3);
            let fiber = enumerate_fiber(&stat_of(&table, &model), &model, DEFAULT_FIBER_BUDGET).unwrap();
            assert_eq!(fiber.len(), 2);
            assert!(fiber.tables.contains(&t(&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]])));
        }
    }

    #[test]
    fn inconsistent_stat_gives_empty_fiber() {
        let model = def(ModelFamily::DiagonalEffect, 2);
        let stat = SufficientStat {
            row_margins: vec![1, 1],
            col_margins: vec![1, 2],
            diagonal: DiagonalStat::Vector(vec![0, 0]),
        };
        assert!(enumerate_fiber(&stat, &model, DEFAULT_FIBER_BUDGET).unwrap().is_empty());
    }

    #[test]
    fn enumeration_budget() {
        let table = t(&[&[5, 5, 5], &[5, 5, 5], &[5, 5, 5]]);
        let model = def(ModelFamily::Independence, 3);
        let err = enumerate_fiber(&stat_of(&table, &model), &model, 100);
        assert!(matches!(err, Err(Error::Budget(_))));
    }

    #[test]
    fn connectivity_examples() {
        let table = t(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]);
        let model = def(ModelFamily::DiagonalEffect, 3);
        let fiber = enumerate_fiber(&stat_of(&table, &model), &model, DEFAULT_FIBER_BUDGET).unwrap();
        assert!(is_connected(&fiber, &moves_diag_effect(3).unwrap()).unwrap().connected);
        let none = is_connected(&fiber, &[]).unwrap();
        assert!(!none.connected);
        assert_eq!(none.components.len(), 2);

        let single = t(&[&[2, 0, 0], &[0, 1, 0], &[0, 0, 0]]);
        let fiber = enumerate_fiber(&stat_of(&single, &model), &model, DEFAULT_FIBER_BUDGET).unwrap();
        assert_eq!(fiber.len(), 1);
        assert!(is_connected(&fiber, &[]).unwrap().connected);
    }

    #[test]
    fn walk_is_deterministic_and_stays_in_fiber() {
        let table = t(&[&[1, 2, 0], &[0, 1, 3], &[2, 0, 1]]);
        let model = def(ModelFamily::CommonDiagonalEffect, 3);
        let moves = moves_common_diag(3).unwrap();
        let cfg = WalkConfig::new(500, 7, Stationary::Hypergeometric);
        let a: Vec<_> = fiber_walk(table.clone(), &moves, cfg.clone()).unwrap().collect();
        let b: Vec<_> = fiber_walk(table.clone(), &moves, cfg).unwrap().collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 500);
        let stat = stat_of(&table, &model);
        assert!(a.iter().all(|x| stat_of(x, &model) == stat));
        assert!(fiber_walk(table, &[], WalkConfig::new(5, 1, Stationary::Uniform)).is_err());
    }

    #[test]
    fn thinning_divides_emissions() {
        let table = t(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]);
        let moves = moves_diag_effect(3).unwrap();
        let mut cfg = WalkConfig::new(100, 3, Stationary::Uniform);
        cfg.thinning = 4;
        assert_eq!(fiber_walk(table, &moves, cfg).unwrap().count(), 25);
    }

    #[test]
    fn uniform_walk_on_two_cycles() {
        let table = t(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]);
        let moves = moves_diag_effect(3).unwrap();
        let n = 20_000;
        let cfg = WalkConfig::new(n, 11, Stationary::Uniform);
        let hits: Vec<f64> = fiber_walk(table.clone(), &moves, cfg)
            .unwrap()
            .map(|x| if x == table { 1.0 } else { 0.0 })
            .collect();
        let freq = hits.iter().sum::<f64>() / n as f64;
        // batch-means standard error
        let size = hits.len() / 50;
        let means: Vec<f64> = hits.chunks(size).map(|c| c.iter().sum::<f64>() / size as f64).collect();
        let mean = means.iter().sum::<f64>() / 50.0;
        let se = (means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / 49.0 / 50.0).sqrt();
        assert!((freq - 0.5).abs() <= 3.0 * se.max(1e-3), "freq {freq}, se {se}");
    }

    #[test]
    fn multinomial_weights() {
        assert_eq!(multinomial_weight(&t(&[&[2, 1], &[0, 1]])), Some(12));
        assert_eq!(multinomial_weight(&t(&[&[0, 0], &[0, 0]])), Some(1));
    }

    #[test]
    fn fitted_table_has_p_value_one() {
        let table = t(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        let model = def(ModelFamily::DiagonalEffect, 3);
        let r = exact_test_enumerated(&table, &model, DEFAULT_FIBER_BUDGET).unwrap();
        assert!(r.statistic_observed < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert_eq!(r.monte_carlo_stderr, 0.0);
        assert_eq!(r.method, TestMethod::Enumeration);
    }

    #[test]
    fn exact_test_dispatch() {
        let table = t(&[&[2, 1, 0], &[0, 1, 2], &[1, 0, 1]]);
        let model = def(ModelFamily::DiagonalEffect, 3);
        let cfg = WalkConfig::new(2000, 5, Stationary::Hypergeometric);
        let opts = TestOptions {
            enumerate: true,
            ..TestOptions::default()
        };
        let r = exact_test(&table, &model, &cfg, &opts).unwrap();
        assert_eq!(r.method, TestMethod::Enumeration);
        let r = exact_test(&table, &model, &cfg, &TestOptions::default()).unwrap();
        assert_eq!(r.method, TestMethod::Mcmc);
        assert!((0.0..=1.0).contains(&r.p_value));
        assert_eq!(r.samples_used, 2000);
        assert!(exact_test(&CountTable::zeros(3).unwrap(), &model, &cfg, &opts).is_err());
    }

    #[test]
    fn chains_merge_deterministically() {
        let table = t(&[&[2, 1, 0], &[0, 1, 2], &[1, 0, 1]]);
        let model = def(ModelFamily::CommonDiagonalEffect, 3);
        let cfg = WalkConfig::new(1000, 5, Stationary::Hypergeometric);
        let a = exact_test_mcmc(&table, &model, &cfg, 3).unwrap();
        let b = exact_test_mcmc(&table, &model, &cfg, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples_used, 3000);
    }
}
