//! Top-level solver: try every candidate radius with both the
//! pseudo-approximation (budget `k - (c - 1)`) and the separated solver
//! (after guessing up to `c - 2` centers), keep the cheapest verified cover.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{candidate_radii, verify, Instance, Metric, Point, Solution};
use crate::number::{format_rational, rat, ratio, Length, Rational};
use crate::oracle::binomial;
use crate::pseudo::pseudo_approximate;
use crate::seed::derive_seed;
use crate::separated::{separated_radius, solve_separated_with_stats};

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub alpha: Rational,
    pub seed: u64,
    /// Worker threads; `None` runs on the calling thread's pool.
    pub parallelism: Option<usize>,
    /// Skip radius guesses that cannot beat the best cover found so far.
    pub early_stop: bool,
    /// Only try this radius.
    pub radius: Option<Length>,
    /// Record wall time in the report.
    pub timing: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { alpha: ratio(33, 4), seed: 0, parallelism: None, early_stop: false, radius: None, timing: false }
    }
}

/// Worst-case ratio `max{2(α + 1), α/2 + 2}` of the combined algorithm.
pub fn approximation_factor(alpha: &Rational) -> Rational {
    let a = (alpha + rat(1)) * rat(2);
    let b = alpha / rat(2) + rat(2);
    a.max(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Pseudo,
    Separated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchStatus {
    Found,
    NotFound,
    /// The branch does not apply (budget below one, or a general metric).
    Skipped,
    /// Its cost at this radius cannot beat the best cover already found.
    Pruned,
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchResult {
    pub status: BranchStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<Length>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_centers: Option<usize>,
    /// Centers guessed before running the separated solver.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guess: Option<Vec<usize>>,
}

impl BranchResult {
    fn bare(status: BranchStatus) -> Self {
        BranchResult { status, cost: None, num_centers: None, guess: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GuessReport {
    pub rho: Length,
    pub pseudo: BranchResult,
    pub separated: BranchResult,
}

#[derive(Clone, Debug, Serialize)]
pub struct Winner {
    pub rho: Length,
    pub branch: Branch,
    pub guess: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Feasible,
    Infeasible,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Counters {
    pub lp_runs: usize,
    pub support_calls: usize,
    pub recover_calls: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub status: RunStatus,
    pub seed: u64,
    pub alpha: String,
    pub best: Option<Solution>,
    pub cost: Option<Length>,
    pub winner: Option<Winner>,
    pub guesses: Vec<GuessReport>,
    pub counters: Counters,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Clone, Debug)]
pub enum Residual {
    /// The guessed balls already meet every requirement.
    Satisfied,
    /// No centers remain for positive requirements, or a color ran out of points.
    Infeasible,
    /// The remaining points, with `ids[i]` the original id of point `i`.
    Reduced { instance: Instance, ids: Vec<usize> },
}

/// Removes every point within `rho` of a guessed center, lowers each
/// requirement by the removed points of its color (floored at zero), and
/// lowers `k` by the number of guesses.
pub fn residual_instance(inst: &Instance, guessed: &[usize], rho: &Length) -> Result<Residual> {
    if let Some(&bad) = guessed.iter().find(|&&g| g >= inst.n()) {
        return Err(Error::UnknownCenter(bad));
    }
    let mut guess = guessed.to_vec();
    guess.sort_unstable();
    guess.dedup();
    let keep: Vec<usize> = (0..inst.n()).filter(|&p| !guess.iter().any(|&g| inst.within(g, p, rho))).collect();
    let mut requirements = inst.requirements().to_vec();
    for p in 0..inst.n() {
        if keep.binary_search(&p).is_err() {
            let t = &mut requirements[inst.color(p)];
            *t = t.saturating_sub(1);
        }
    }
    let k = inst.k().saturating_sub(guess.len());
    if requirements.iter().all(|&t| t == 0) && (k == 0 || keep.is_empty()) {
        return Ok(Residual::Satisfied);
    }
    let mut sizes = vec![0usize; inst.num_colors()];
    for &p in &keep {
        sizes[inst.color(p)] += 1;
    }
    let positive = requirements.iter().any(|&t| t > 0);
    if (positive && k == 0) || requirements.iter().zip(&sizes).any(|(t, s)| t > s) {
        return Ok(Residual::Infeasible);
    }
    let colors: Vec<usize> = keep.iter().map(|&p| inst.color(p)).collect();
    let metric = match inst.metric() {
        Metric::EuclideanPlane(points) => Metric::EuclideanPlane(keep.iter().map(|&p| points[p].clone()).collect::<Vec<Point>>()),
        Metric::Explicit(d) => Metric::Explicit(keep.iter().map(|&i| keep.iter().map(|&j| d[i][j].clone()).collect()).collect()),
    };
    let instance = Instance::relaxed(metric, colors, k.min(keep.len()), requirements)?;
    Ok(Residual::Reduced { instance, ids: keep })
}

/// All subsets of `0..n` of size at most `max`, by size then lexicographically.
fn small_subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for size in 1..=max.min(n) {
        let mut s: Vec<usize> = (0..size).collect();
        loop {
            out.push(s.clone());
            let Some(i) = (0..size).rev().find(|&i| s[i] < n - size + i) else { break };
            s[i] += 1;
            for j in i + 1..size {
                s[j] = s[j - 1] + 1;
            }
        }
    }
    out
}

struct Candidate {
    cost: Length,
    idx: usize,
    branch: Branch,
    guess: Vec<usize>,
    solution: Solution,
}

struct GuessRun {
    report: GuessReport,
    candidates: Vec<Candidate>,
    counters: Counters,
}

fn pseudo_budget(inst: &Instance) -> Option<usize> {
    (inst.k() + 1).checked_sub(inst.num_colors()).filter(|&b| b >= 1)
}

fn run_pseudo(inst: &Instance, rho: &Length, counters: &mut Counters) -> Result<(BranchResult, Option<Solution>)> {
    let Some(budget) = pseudo_budget(inst) else {
        return Ok((BranchResult::bare(BranchStatus::Skipped), None));
    };
    counters.lp_runs += 1;
    let Some(sol) = pseudo_approximate(inst, budget, rho)? else {
        return Ok((BranchResult::bare(BranchStatus::NotFound), None));
    };
    let report = verify(inst, &sol)?;
    if !report.feasible {
        return Ok((BranchResult::bare(BranchStatus::NotFound), None));
    }
    let result = BranchResult {
        status: BranchStatus::Found,
        cost: Some(sol.radius.clone()),
        num_centers: Some(report.num_centers),
        guess: None,
    };
    Ok((result, Some(sol)))
}

fn run_separated(
    inst: &Instance,
    rho: &Length,
    alpha: &Rational,
    seed: u64,
    counters: &mut Counters,
) -> Result<(BranchResult, Option<(Vec<usize>, Solution)>)> {
    if !inst.is_planar() {
        return Ok((BranchResult::bare(BranchStatus::Skipped), None));
    }
    let radius = separated_radius(rho, alpha);
    let max_guess = inst.num_colors().saturating_sub(2).min(inst.k());
    for (g_idx, guess) in small_subsets(inst.n(), max_guess).into_iter().enumerate() {
        let (mut centers, sub) = match residual_instance(inst, &guess, rho)? {
            Residual::Infeasible => continue,
            Residual::Satisfied => (guess.clone(), None),
            Residual::Reduced { instance, ids } => {
                let (out, stats) = solve_separated_with_stats(&instance, rho, alpha, derive_seed(seed, g_idx as u64))?;
                counters.support_calls += stats.support_calls;
                counters.recover_calls += stats.recover_calls;
                let Some(out) = out else { continue };
                let mapped: Vec<usize> = out.solution.centers.iter().map(|&c| ids[c]).collect();
                (guess.clone(), Some(mapped))
            }
        };
        centers.extend(sub.unwrap_or_default());
        let sol = Solution::new(inst, centers, radius.clone())?;
        let report = verify(inst, &sol)?;
        if report.feasible {
            let result = BranchResult {
                status: BranchStatus::Found,
                cost: Some(radius.clone()),
                num_centers: Some(report.num_centers),
                guess: Some(guess.clone()),
            };
            return Ok((result, Some((guess, sol))));
        }
    }
    Ok((BranchResult::bare(BranchStatus::NotFound), None))
}

fn run_guess(inst: &Instance, cfg: &SolverConfig, idx: usize, rho: &Length, best: Option<&Length>) -> Result<GuessRun> {
    let mut counters = Counters::default();
    let mut candidates = Vec::new();
    let beaten = |cost: &Length| best.is_some_and(|b| cost >= b);

    let pseudo_cost = rho.scale(&rat(2));
    let pseudo = if beaten(&pseudo_cost) && pseudo_budget(inst).is_some() {
        BranchResult::bare(BranchStatus::Pruned)
    } else {
        let (result, sol) = run_pseudo(inst, rho, &mut counters)?;
        if let Some(solution) = sol {
            candidates.push(Candidate { cost: solution.radius.clone(), idx, branch: Branch::Pseudo, guess: Vec::new(), solution });
        }
        result
    };

    let sep_cost = separated_radius(rho, &cfg.alpha);
    let separated = if beaten(&sep_cost) && inst.is_planar() {
        BranchResult::bare(BranchStatus::Pruned)
    } else {
        let task_seed = derive_seed(cfg.seed, idx as u64);
        let (result, found) = run_separated(inst, rho, &cfg.alpha, task_seed, &mut counters)?;
        if let Some((guess, solution)) = found {
            candidates.push(Candidate { cost: solution.radius.clone(), idx, branch: Branch::Separated, guess, solution });
        }
        result
    };
    Ok(GuessRun { report: GuessReport { rho: rho.clone(), pseudo, separated }, candidates, counters })
}

pub fn solve(inst: &Instance, cfg: &SolverConfig) -> Result<RunReport> {
    let radii = match &cfg.radius {
        Some(r) => vec![r.clone()],
        None => candidate_radii(inst),
    };
    solve_with_radii(inst, cfg, &radii)
}

/// [`solve`] restricted to the given radius guesses (tried in the given order).
pub fn solve_with_radii(inst: &Instance, cfg: &SolverConfig, radii: &[Length]) -> Result<RunReport> {
    if cfg.alpha <= rat(8) {
        return Err(Error::InvalidArgument(format!("alpha = {} must exceed 8", format_rational(&cfg.alpha))));
    }
    let started = Instant::now();
    let runs = match cfg.parallelism {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| scan(inst, cfg, radii))?,
        None => scan(inst, cfg, radii)?,
    };

    let mut counters = Counters::default();
    let mut guesses = Vec::with_capacity(runs.len());
    let mut best: Option<Candidate> = None;
    for run in runs {
        counters.lp_runs += run.counters.lp_runs;
        counters.support_calls += run.counters.support_calls;
        counters.recover_calls += run.counters.recover_calls;
        guesses.push(run.report);
        for cand in run.candidates {
            let better = match &best {
                None => true,
                Some(b) => (&cand.cost, cand.idx, cand.branch) < (&b.cost, b.idx, b.branch),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    let all_zero = inst.requirements().iter().all(|&t| t == 0);
    if all_zero {
        let empty = Solution::empty(inst);
        if best.as_ref().is_none_or(|b| !b.solution.centers.is_empty() || !b.cost.is_zero()) {
            best = Some(Candidate { cost: Length::zero(), idx: 0, branch: Branch::Pseudo, guess: Vec::new(), solution: empty });
        }
    }
    let wall_time_ms = cfg.timing.then(|| started.elapsed().as_secs_f64() * 1e3);
    let (status, best_sol, cost, winner) = match best {
        Some(c) => {
            let winner = Winner { rho: radii.get(c.idx).cloned().unwrap_or_else(Length::zero), branch: c.branch, guess: c.guess };
            (RunStatus::Feasible, Some(c.solution), Some(c.cost), Some(winner))
        }
        None => (RunStatus::Infeasible, None, None, None),
    };
    Ok(RunReport {
        status,
        seed: cfg.seed,
        alpha: format_rational(&cfg.alpha),
        best: best_sol,
        cost,
        winner,
        guesses,
        counters,
        wall_time_ms,
    })
}

fn scan(inst: &Instance, cfg: &SolverConfig, radii: &[Length]) -> Result<Vec<GuessRun>> {
    if !cfg.early_stop {
        return radii.par_iter().enumerate().map(|(idx, rho)| run_guess(inst, cfg, idx, rho, None)).collect();
    }
    let mut runs = Vec::new();
    let mut best: Option<Length> = None;
    for (idx, rho) in radii.iter().enumerate() {
        if let Some(b) = &best {
            // Branch costs grow with rho, so no later guess can win either.
            let cheapest = if pseudo_budget(inst).is_some() { rho.scale(&rat(2)) } else { separated_radius(rho, &cfg.alpha) };
            if &cheapest >= b {
                break;
            }
        }
        let run = run_guess(inst, cfg, idx, rho, best.as_ref())?;
        for c in &run.candidates {
            if best.as_ref().is_none_or(|b| &c.cost < b) {
                best = Some(c.cost.clone());
            }
        }
        runs.push(run);
    }
    Ok(runs)
}

/// Number of center guesses the separated branch may try per radius.
pub fn guess_count(n: usize, colors: usize, k: usize) -> u128 {
    (0..=colors.saturating_sub(2).min(k)).map(|s| binomial(n, s)).sum()
}
