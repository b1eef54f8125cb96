//! Property checks over the synthetic game catalogue.
//!
//! Game `s` of the suite has `d = 3 + s mod 6` players. Oracle and
//! efficiency checks use the uniform random family; transitivity and the
//! triple bound use the random monotone family.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use bishap::graph::{build_graph, threshold};
use bishap::shapley::{exact_explanation, exact_shapley, InteractionMatrix};
use bishap::utility::{enumerate_all, filter, make_synthetic, CoalitionGame, Game, SyntheticFamily, SyntheticGameSpec};
use bishap::Coalition;

use crate::config::parse_range;
use crate::{CliError, CliResult, VerifyArgs};

const VALUE_TOLERANCE: f64 = 1e-10;
/// `|m| <= 1e-12` counts as zero for the redundancy graph.
const ZERO_GAMMA: f64 = 1e-12;
/// Slack on the bound for rounding in the enumeration.
const BOUND_SLACK: f64 = 1e-12;
const MONOTONE_DENSITY: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Oracle,
    Efficiency,
    Transitivity,
    Bound,
}

impl Check {
    pub const ALL: [Check; 4] = [Check::Oracle, Check::Efficiency, Check::Transitivity, Check::Bound];
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Check::Oracle => "oracle",
            Check::Efficiency => "efficiency",
            Check::Transitivity => "transitivity",
            Check::Bound => "bound",
        })
    }
}

impl FromStr for Check {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Check::ALL.into_iter().find(|c| c.to_string() == s).ok_or_else(|| {
            CliError::config(format!("unknown check {s:?}; expected oracle, efficiency, transitivity or bound"))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check: Check,
    pub games: usize,
    pub violations: usize,
    /// Seed and description of the first violation.
    pub first_failure: Option<(u64, String)>,
    /// Violations of the factor-1/2 variant of the bound; informational.
    pub tight_bound_violations: usize,
}

pub fn suite_dim(seed: u64) -> usize {
    3 + (seed % 6) as usize
}

fn random_game(seed: u64) -> CoalitionGame<'static> {
    make_synthetic(&SyntheticGameSpec::new(suite_dim(seed), SyntheticFamily::Random { seed })).expect("valid spec")
}

fn monotone_game(seed: u64) -> CoalitionGame<'static> {
    let family = SyntheticFamily::RandomMonotone { seed, density: MONOTONE_DENSITY };
    make_synthetic(&SyntheticGameSpec::new(suite_dim(seed), family)).expect("valid spec")
}

fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

/// `eps[a][b] = max |u(S ∪ {a}) - u(S)|` over `S` without `a` and with `b`.
fn restricted_marginals(table: &[f64], d: usize) -> Vec<Vec<f64>> {
    let mut eps = vec![vec![0.0f64; d]; d];
    for s in Coalition::all(d) {
        for a in (0..d).filter(|&a| !s.contains(a)) {
            let delta = (table[s.with(a).bits() as usize] - table[s.bits() as usize]).abs();
            for b in s.members() {
                eps[a][b] = eps[a][b].max(delta);
            }
        }
    }
    eps
}

/// Violation message for one game, or `None`.
fn check_game(check: Check, seed: u64, fault: bool, tight: &mut usize) -> bishap::Result<Option<String>> {
    match check {
        Check::Oracle => {
            let u = random_game(seed);
            let (_, mut m) = exact_explanation(&u)?;
            if fault {
                m.values[0][1] += 1e-6;
            }
            for j in 0..m.dim() {
                let column = exact_shapley(&filter(&u, j)?)?.phi;
                for (i, want) in column.iter().enumerate() {
                    let diff = (m.get(i, j) - want).abs();
                    if diff > VALUE_TOLERANCE {
                        return Ok(Some(format!(
                            "entry [{i}][{j}] differs from the filtered Shapley value by {diff:e}"
                        )));
                    }
                }
            }
            Ok(None)
        }
        Check::Efficiency => {
            let u = random_game(seed);
            let mut phi = exact_shapley(&u)?.phi;
            if fault {
                phi[0] += 1e-6;
            }
            let d = u.players();
            let gap = (phi.iter().sum::<f64>() - (u.value(Coalition::full(d))? - u.value(Coalition::EMPTY)?)).abs();
            Ok((gap > VALUE_TOLERANCE).then(|| format!("sum of values misses u(D) - u(∅) by {gap:e}")))
        }
        Check::Transitivity => {
            let u = monotone_game(seed);
            let (_, m) = exact_explanation(&u)?;
            let mut h = threshold(&build_graph(&m)?, ZERO_GAMMA)?;
            let d = m.dim();
            let triples = || {
                (0..d).flat_map(move |i| {
                    (0..d)
                        .flat_map(move |j| (0..d).map(move |k| (i, j, k)))
                        .filter(|&(i, j, k)| i != j && j != k && i != k)
                })
            };
            if fault {
                if let Some((i, _, k)) = triples().find(|&(i, j, k)| h.edges[i][j] && h.edges[j][k]) {
                    h.edges[i][k] = false;
                }
            }
            Ok(triples()
                .find(|&(i, j, k)| h.edges[i][j] && h.edges[j][k] && !h.edges[i][k])
                .map(|(i, j, k)| format!("edges {i}->{j} and {j}->{k} without {i}->{k}")))
        }
        Check::Bound => {
            let u = monotone_game(seed);
            let d = u.players();
            let table = enumerate_all(&u)?;
            let (_, mut m): (_, InteractionMatrix) = exact_explanation(&u)?;
            let eps = restricted_marginals(&table, d);
            let loose = factorial(d) / 2.0;
            if fault {
                m.values[0][1] = loose * eps[0][1] + 1.0;
            }
            let mut found = None;
            for i in 0..d {
                for j in (0..d).filter(|&j| j != i) {
                    for k in (0..d).filter(|&k| k != i && k != j) {
                        let (ej, ei) = (eps[i][j], eps[k][i]);
                        let sides =
                            [(m.get(i, j).abs(), ej), (m.get(k, i).abs(), ei), (m.get(k, j).abs(), 2.0 * ej + ei)];
                        for (n, (lhs, rhs)) in sides.into_iter().enumerate() {
                            if lhs > 0.5 * rhs + BOUND_SLACK {
                                *tight += 1;
                            }
                            if found.is_none() && lhs > loose * rhs + BOUND_SLACK {
                                found = Some(format!("inequality {} fails for (i, j, k) = ({i}, {j}, {k})", n + 1));
                            }
                        }
                    }
                }
            }
            Ok(found)
        }
    }
}

/// Runs `check` over `seeds`; `fault` corrupts one value per game.
pub fn run_check(check: Check, seeds: Range<u64>, fault: bool) -> bishap::Result<CheckReport> {
    let mut report = CheckReport { check, games: 0, violations: 0, first_failure: None, tight_bound_violations: 0 };
    for seed in seeds {
        report.games += 1;
        if let Some(msg) = check_game(check, seed, fault, &mut report.tight_bound_violations)? {
            report.violations += 1;
            report.first_failure.get_or_insert((seed, msg));
        }
    }
    Ok(report)
}

pub fn run_verify(args: &VerifyArgs) -> CliResult<()> {
    let seeds = parse_range(&args.seed_range)?;
    let fault: Option<Check> = args.inject_fault.as_deref().map(str::parse).transpose()?;
    println!("seeds {}..{} ({} games per check)", seeds.start, seeds.end, seeds.end - seeds.start);
    let mut failed = Vec::new();
    for check in Check::ALL {
        let r = run_check(check, seeds.clone(), fault == Some(check))?;
        let status = if r.violations == 0 { "ok" } else { "FAILED" };
        println!("{check:<13} {status:<6} games={} violations={}", r.games, r.violations);
        if check == Check::Bound {
            println!("{:<13} {:<6} factor-1/2 variant violations={}", "", "info", r.tight_bound_violations);
        }
        if let Some((seed, msg)) = &r.first_failure {
            println!("  first violation: seed {seed} (d = {}): {msg}", suite_dim(*seed));
            failed.push(format!("{check} (seed {seed})"));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::verify(format!("verification failed: {}", failed.join(", "))))
    }
}
