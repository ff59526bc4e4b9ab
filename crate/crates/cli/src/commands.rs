use std::collections::BTreeMap;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use diageff::groebner::Budget;
use diageff::invariants::{
    check_vanishing, gens_common_mixture_families, gens_common_mixture_listed3, gens_common_toric_from_moves,
    gens_common_toric_listed3, gens_diag_effect, moves_to_binomials, polys, suspected_typos, Invariant,
};
use diageff::markov::{
    enumerate_fiber, exact_test, fiber_walk, is_connected, moves_for, moves_independence, Stationary, TestOptions,
    WalkConfig, DEFAULT_FIBER_BUDGET,
};
use diageff::membership::{boundary_membership_check, classify_toric_point, mixture_to_toric};
use diageff::param::ModelParams;
use diageff::rational::format_q;
use diageff::table::sufficient_statistic;
use diageff::toricideal::{ideal_equal, toric_ideal_with, Saturation};
use diageff::{CountTable, ModelFamily, ModelDef, Move, ProbTable};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{parse_count_table, parse_params, parse_prob_table};
use crate::{version, CliError, RunRecord};

#[derive(Debug, Parser)]
#[command(name = "diageff", version, about = "Diagonal-effect models for square contingency tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Independence,
    Diag,
    Common,
}

impl ModelArg {
    fn family(self) -> ModelFamily {
        match self {
            ModelArg::Independence => ModelFamily::Independence,
            ModelArg::Diag => ModelFamily::DiagonalEffect,
            ModelArg::Common => ModelFamily::CommonDiagonalEffect,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormArg {
    Toric,
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationaryArg {
    Uniform,
    Hypergeometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyArg {
    /// The listed generators for the model.
    Listed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SaturationArg {
    PerVariable,
    Auxiliary,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct TableModel {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// CSV file of counts, one row per line.
    #[arg(long)]
    pub table: String,
    /// Treat the diagonal as structural zeros (diagonal-effect model only).
    #[arg(long)]
    pub structural_zero_diagonal: bool,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Print invariant generators, optionally evaluated at a parameter point.
    Invariants {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_enum, default_value = "toric")]
        form: FormArg,
        #[arg(long)]
        size: usize,
        /// Use the fixed 3x3 lists instead of the generated families.
        #[arg(long)]
        listed: bool,
        /// JSON parameter file to evaluate every generator at.
        #[arg(long)]
        evaluate: Option<String>,
    },
    /// Decide whether a toric point also has a mixture representation.
    Classify {
        #[arg(long)]
        params: String,
    },
    /// Support-pattern checks for a probability table with zero cells.
    BoundaryCheck {
        /// CSV of nonnegative rationals or counts; rescaled to sum to one.
        #[arg(long)]
        table: String,
    },
    /// Random walk on the fiber of a table, one JSON line per state.
    Sample {
        #[command(flatten)]
        input: TableModel,
        #[arg(long)]
        steps: u64,
        /// Defaults to round(10 * sqrt(steps)).
        #[arg(long)]
        burnin: Option<u64>,
        #[arg(long, default_value_t = 1)]
        thinning: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "hypergeometric")]
        stationary: StationaryArg,
    },
    /// Conditional goodness-of-fit test.
    ExactTest {
        #[command(flatten)]
        input: TableModel,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        burnin: Option<u64>,
        #[arg(long, default_value_t = 1)]
        chains: u64,
        /// Enumerate the fiber when it fits in the budget.
        #[arg(long)]
        enumerate: bool,
        #[arg(long, default_value_t = DEFAULT_FIBER_BUDGET)]
        budget: u64,
    },
    /// List every table with the same sufficient statistic.
    EnumerateFiber {
        #[command(flatten)]
        input: TableModel,
        #[arg(long, default_value_t = DEFAULT_FIBER_BUDGET)]
        budget: u64,
    },
    /// Print the Markov basis moves of a model.
    MarkovMoves {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        size: usize,
    },
    /// Recompute the toric ideal from the design matrix.
    ToricIdeal {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        size: usize,
        #[arg(long, value_enum)]
        verify_against: Option<VerifyArg>,
        #[arg(long, value_enum, default_value = "per-variable")]
        saturation: SaturationArg,
        #[arg(long, default_value_t = 100_000)]
        max_pairs: usize,
        /// Defaults to 12 for per-variable saturation and 24 for auxiliary.
        #[arg(long)]
        max_degree: Option<u32>,
    },
    /// Check that the moves connect every fiber of tables with total <= max-n.
    CheckConnectivity {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        max_n: u64,
        #[arg(long, default_value_t = DEFAULT_FIBER_BUDGET)]
        budget: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Invariants { .. } => "invariants",
            Command::Classify { .. } => "classify",
            Command::BoundaryCheck { .. } => "boundary-check",
            Command::Sample { .. } => "sample",
            Command::ExactTest { .. } => "exact-test",
            Command::EnumerateFiber { .. } => "enumerate-fiber",
            Command::MarkovMoves { .. } => "markov-moves",
            Command::ToricIdeal { .. } => "toric-ideal",
            Command::CheckConnectivity { .. } => "check-connectivity",
        }
    }
}

fn read(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })
}

fn toric_def(model: ModelArg, size: usize) -> Result<ModelDef, CliError> {
    Ok(ModelDef::toric(model.family(), size)?)
}

fn table_def(input: &TableModel, table: &CountTable) -> Result<ModelDef, CliError> {
    let def = toric_def(input.model, table.size())?;
    Ok(if input.structural_zero_diagonal {
        def.with_structural_zero_diagonal()?
    } else {
        def
    })
}

fn rows_of_table(t: &CountTable) -> Value {
    json!(t.rows().map(|r| r.to_vec()).collect::<Vec<_>>())
}

fn rows_of_prob(p: &ProbTable) -> Value {
    let n = p.size();
    json!((0..n).map(|i| (0..n).map(|j| format_q(p.get(i, j))).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn move_json(m: &Move) -> Value {
    let n = m.size();
    json!({
        "family": m.family(),
        "degree": m.degree(),
        "rows": (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn invariant_json(inv: &Invariant) -> Value {
    json!({ "label": inv.label, "family": inv.tag, "polynomial": inv.poly.to_string() })
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Core(diageff::Error::Internal(e.to_string())))
}

fn params_json(p: &ModelParams) -> Result<Value, CliError> {
    to_value(p)
}

fn invariants_for(model: ModelArg, form: FormArg, size: usize, listed: bool) -> Result<Vec<Invariant>, CliError> {
    let needs3 = || {
        if size == 3 {
            Ok(())
        } else {
            Err(CliError::Usage("--listed is only available for --size 3".into()))
        }
    };
    Ok(match (model, form) {
        (ModelArg::Independence, _) => return Err(CliError::Usage("use toric-ideal for the independence model".into())),
        (ModelArg::Diag, _) => gens_diag_effect(size)?,
        (ModelArg::Common, FormArg::Toric) if listed => {
            needs3()?;
            gens_common_toric_listed3()
        }
        (ModelArg::Common, FormArg::Toric) => gens_common_toric_from_moves(size)?,
        (ModelArg::Common, FormArg::Mixture) if listed => {
            needs3()?;
            gens_common_mixture_listed3()
        }
        (ModelArg::Common, FormArg::Mixture) => gens_common_mixture_families(size)?,
    })
}

fn all_tables(size: usize, max_n: u64) -> Vec<CountTable> {
    fn fill(cells: &mut Vec<u64>, left: u64, len: usize, out: &mut Vec<CountTable>, size: usize) {
        if cells.len() == len {
            out.push(CountTable::from_cells(size, cells.clone()).expect("valid cells"));
            return;
        }
        for v in 0..=left {
            cells.push(v);
            fill(cells, left - v, len, out, size);
            cells.pop();
        }
    }
    let mut out = Vec::new();
    fill(&mut Vec::new(), max_n, size * size, &mut out, size);
    out
}

fn walk_config(steps: u64, burnin: Option<u64>, thinning: u64, seed: u64, stationary: Stationary) -> WalkConfig {
    let mut config = WalkConfig::new(steps, seed, stationary);
    if let Some(b) = burnin {
        config.burn_in = b;
    }
    config.thinning = thinning;
    config
}

/// Pretty JSON, or a single line when the record ends a JSON-lines stream.
fn emit(out: &mut dyn Write, record: &RunRecord, single_line: bool) -> Result<(), CliError> {
    let text = if single_line {
        serde_json::to_string(record)
    } else {
        serde_json::to_string_pretty(record)
    }
    .map_err(|e| CliError::Core(diageff::Error::Internal(e.to_string())))?;
    writeln!(out, "{text}").map_err(CliError::Write)
}

/// Runs one command and writes its output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cmd = &cli.command;
    let mut config = to_value(cmd)?;
    // keep only the arguments of the chosen subcommand
    if let Value::Object(mut map) = config {
        config = map.remove(cmd.name()).unwrap_or(Value::Null);
    }
    let mut extra = serde_json::Map::new();
    let outputs = match cmd {
        Command::Invariants {
            model,
            form,
            size,
            listed,
            evaluate,
        } => {
            let invs = invariants_for(*model, *form, *size, *listed)?;
            let mut outputs = json!({
                "count": invs.len(),
                "generators": invs.iter().map(invariant_json).collect::<Vec<_>>(),
            });
            if let Some(path) = evaluate {
                let family = model.family();
                let params = parse_params(&read(path)?, Some(family))?;
                if params.size() != *size {
                    return Err(diageff::Error::SizeMismatch {
                        expected: *size,
                        found: params.size(),
                    }
                    .into());
                }
                extra.insert("params".into(), params_json(&params)?);
                let point = params.point()?;
                let report = check_vanishing(&invs, &point)?;
                let typos: Vec<String> = suspected_typos(&invs, std::slice::from_ref(&point))?
                    .iter()
                    .map(|t| t.to_string())
                    .collect();
                outputs["point"] = rows_of_prob(&point);
                outputs["vanishing"] = to_value(&report)?;
                outputs["suspected_typos"] = json!(typos);
            }
            outputs
        }
        Command::Classify { params } => {
            let parsed = parse_params(&read(params)?, None)?;
            extra.insert("params".into(), params_json(&parsed)?);
            let toric = match &parsed {
                ModelParams::Toric(t) => t.clone(),
                ModelParams::Mixture(m) => mixture_to_toric(m)?,
            };
            let verdict = classify_toric_point(&toric)?;
            let mut v = to_value(&verdict)?;
            v["toric_params"] = to_value(&toric)?;
            v
        }
        Command::BoundaryCheck { table } => {
            let prob = parse_prob_table(&read(table)?)?;
            extra.insert("table".into(), rows_of_prob(&prob));
            to_value(&boundary_membership_check(&prob))?
        }
        Command::Sample {
            input,
            steps,
            burnin,
            thinning,
            seed,
            stationary,
        } => {
            let table = parse_count_table(&read(&input.table)?)?;
            let def = table_def(input, &table)?;
            let moves = moves_for(&def)?;
            let stationary = match stationary {
                StationaryArg::Uniform => Stationary::Uniform,
                StationaryArg::Hypergeometric => Stationary::Hypergeometric,
            };
            let cfg = walk_config(*steps, *burnin, *thinning, *seed, stationary);
            extra.insert("table".into(), rows_of_table(&table));
            extra.insert("walk".into(), to_value(&cfg)?);
            let mut walk = fiber_walk(table, &moves, cfg)?;
            let mut count = 0u64;
            for (k, state) in walk.by_ref().enumerate() {
                let line = json!({ "sample": k, "table": rows_of_table(&state) });
                writeln!(out, "{line}").map_err(CliError::Write)?;
                count += 1;
            }
            json!({ "samples": count, "acceptance_rate": walk.acceptance_rate() })
        }
        Command::ExactTest {
            input,
            samples,
            seed,
            burnin,
            chains,
            enumerate,
            budget,
        } => {
            let table = parse_count_table(&read(&input.table)?)?;
            let def = table_def(input, &table)?;
            let cfg = walk_config(*samples, *burnin, 1, *seed, Stationary::Hypergeometric);
            extra.insert("table".into(), rows_of_table(&table));
            extra.insert("walk".into(), to_value(&cfg)?);
            let options = TestOptions {
                enumerate: *enumerate,
                budget: *budget,
                chains: *chains,
            };
            to_value(&exact_test(&table, &def, &cfg, &options)?)?
        }
        Command::EnumerateFiber { input, budget } => {
            let table = parse_count_table(&read(&input.table)?)?;
            let def = table_def(input, &table)?;
            extra.insert("table".into(), rows_of_table(&table));
            let stat = sufficient_statistic(&table, &def)?;
            let fiber = enumerate_fiber(&stat, &def, *budget)?;
            json!({
                "sufficient_statistic": to_value(&stat)?,
                "size": fiber.len(),
                "tables": fiber.tables.iter().map(rows_of_table).collect::<Vec<_>>(),
            })
        }
        Command::MarkovMoves { model, size } => {
            let moves = moves_for(&toric_def(*model, *size)?)?;
            let mut by_family: BTreeMap<String, usize> = BTreeMap::new();
            for m in &moves {
                *by_family.entry(format!("{:?}", m.family())).or_default() += 1;
            }
            json!({
                "count": moves.len(),
                "by_family": by_family,
                "moves": moves.iter().map(move_json).collect::<Vec<_>>(),
            })
        }
        Command::ToricIdeal {
            model,
            size,
            verify_against,
            saturation,
            max_pairs,
            max_degree,
        } => {
            let def = toric_def(*model, *size)?;
            let (method, default_degree) = match saturation {
                SaturationArg::PerVariable => (Saturation::PerVariable, 12),
                SaturationArg::Auxiliary => (Saturation::AuxiliaryVariable, 24),
            };
            let budget = Budget {
                max_pairs: *max_pairs,
                max_degree: max_degree.unwrap_or(default_degree),
            };
            let gens = toric_ideal_with(&def, method, &budget)?;
            let mut outputs = json!({
                "count": gens.len(),
                "generators": gens.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            });
            if verify_against.is_some() {
                let reference = match model {
                    ModelArg::Independence => moves_to_binomials(&moves_independence(*size)?)?,
                    ModelArg::Diag => polys(&gens_diag_effect(*size)?),
                    ModelArg::Common if *size == 3 => polys(&gens_common_toric_listed3()),
                    ModelArg::Common => polys(&gens_common_toric_from_moves(*size)?),
                };
                let equal = if gens.is_empty() || reference.is_empty() {
                    gens.is_empty() && reference.is_empty()
                } else {
                    ideal_equal(&gens, &reference, &budget)?
                };
                outputs["reference"] = json!(reference.iter().map(|g| g.to_string()).collect::<Vec<_>>());
                outputs["verdict"] = json!(if equal { "EQUAL" } else { "NOT EQUAL" });
            }
            outputs
        }
        Command::CheckConnectivity {
            model,
            size,
            max_n,
            budget,
        } => {
            let def = toric_def(*model, *size)?;
            let moves = moves_for(&def)?;
            let mut stats = std::collections::BTreeSet::new();
            for t in all_tables(*size, *max_n) {
                stats.insert(sufficient_statistic(&t, &def)?);
            }
            let mut disconnected = Vec::new();
            let mut largest = 0;
            for stat in &stats {
                let fiber = enumerate_fiber(stat, &def, *budget)?;
                largest = largest.max(fiber.len());
                let report = is_connected(&fiber, &moves)?;
                if !report.connected {
                    disconnected.push(json!({
                        "sufficient_statistic": to_value(stat)?,
                        "components": report
                            .components
                            .iter()
                            .map(|c| c.iter().map(|&k| rows_of_table(&fiber.tables[k])).collect::<Vec<_>>())
                            .collect::<Vec<_>>(),
                    }));
                }
            }
            json!({
                "fibers": stats.len(),
                "moves": moves.len(),
                "largest_fiber": largest,
                "connected": disconnected.is_empty(),
                "disconnected": disconnected,
            })
        }
    };
    if let Value::Object(map) = &mut config {
        map.extend(extra);
    }
    emit(
        out,
        &RunRecord {
            command: cmd.name().to_string(),
            config,
            outputs,
            version: version(),
        },
        matches!(cmd, Command::Sample { .. }),
    )
}
