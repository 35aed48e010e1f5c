//! One PASS/FAIL line per acceptance criterion. Exits non-zero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use colorful_kcenter::driver::{approximation_factor, solve, Branch, SolverConfig};
use colorful_kcenter::generate::{
    example_2_5_gap, gen_example_2_5, gen_random_metric, gen_random_planar, gen_separated, SeparatedParams,
};
use colorful_kcenter::grid::{adjacent, edges_in_window, polygon_dist_sq, rhombus_of, GridSpec, Q3};
use colorful_kcenter::lp::{count_fractional, solve_extreme_optimal};
use colorful_kcenter::matching::{
    brute_force_matchings, matching_weight_bounds, recover_flagged, support, WeightedGraph,
};
use colorful_kcenter::model::{verify, Instance, Solution};
use colorful_kcenter::number::{rat, ratio, Length, Rational};
use colorful_kcenter::oracle::{brute_force_optimum, radius_for};
use colorful_kcenter::pseudo::{build_simplified_lp, greedy_cluster, pseudo_approximate_run};
use colorful_kcenter::separated::{separated_radius, solve_separated};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

struct Outcome {
    failures: Vec<String>,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: Vec::new(), detail: String::new() }
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }
}

fn metric_corpus() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..120u64)
        .map(|seed| {
            let n = rng.random_range(4..=12);
            let colors = rng.random_range(2..=3);
            let k = rng.random_range(1..=4usize.min(n));
            gen_random_metric(n, k, colors, 1000 + seed).unwrap()
        })
        .collect()
}

/// Coverage only; the pseudo-approximation may open more than `k` centers.
fn meets_requirements(inst: &Instance, sol: &Solution) -> bool {
    let covered = verify(inst, sol).unwrap().covered;
    covered.iter().zip(inst.requirements()).all(|(c, t)| c >= t)
}

fn criterion_1(corpus: &[Instance]) -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new();
    let mut max_extra = 0;
    for (idx, inst) in corpus.iter().enumerate() {
        let opt = brute_force_optimum(inst).unwrap();
        let Some(run) = pseudo_approximate_run(inst, inst.k(), &opt.radius).unwrap() else {
            out.fail(format!("instance {idx}: LP infeasible at OPT"));
            continue;
        };
        let sol = &run.solution;
        let c = inst.num_colors();
        if sol.centers.len() > inst.k() + c - 1 {
            out.fail(format!("instance {idx}: {} centers > k + c - 1", sol.centers.len()));
        }
        max_extra = max_extra.max(sol.centers.len().saturating_sub(inst.k()));
        if sol.radius != opt.radius.scale(&rat(2)) {
            out.fail(format!("instance {idx}: radius {} is not 2·OPT", sol.radius));
        }
        if !meets_requirements(inst, sol) {
            out.fail(format!("instance {idx}: requirements not met"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        out.fail(format!("took {elapsed:?}"));
    }
    out.detail = format!("{} instances, max centers over k = {max_extra}, {elapsed:.2?}", corpus.len());
    out
}

fn criterion_2(corpus: &[Instance]) -> Outcome {
    let mut out = Outcome::new();
    let mut checks = 0usize;
    for (idx, inst) in corpus.iter().enumerate() {
        let opt = brute_force_optimum(inst).unwrap();
        let Some(run) = pseudo_approximate_run(inst, inst.k(), &opt.radius).unwrap() else {
            out.fail(format!("instance {idx}: LP infeasible at OPT"));
            continue;
        };
        let n = inst.n();
        let (x, z) = run.feasibility.values.split_at(n);
        let cs = greedy_cluster(inst, &opt.radius, x, z);
        if cs != run.clusters {
            out.fail(format!("instance {idx}: clustering is not reproducible"));
        }
        for v in cs.violations(inst, inst.k(), x, z) {
            out.fail(format!("instance {idx}: {v}"));
        }
        // Coverage against the LP's own z′ mass, colour by colour.
        for color in 0..inst.num_colors() {
            let mass: Rational =
                cs.counts.iter().zip(&cs.x_tilde).map(|(cnt, xt)| rat(cnt[color] as i64) * xt).sum();
            let z_mass: Rational = (0..n).filter(|&j| inst.color(j) == color).map(|j| &z[j]).sum();
            if mass < z_mass {
                out.fail(format!("instance {idx}: color {color} cluster mass below Σ z′"));
            }
            if z_mass < rat(inst.requirements()[color] as i64) {
                out.fail(format!("instance {idx}: Σ z′ of color {color} below its requirement"));
            }
        }
        let x_tilde_sum: Rational = cs.x_tilde.iter().sum();
        let x_sum: Rational = x.iter().sum();
        if x_tilde_sum > x_sum || x_sum > rat(inst.k() as i64) {
            out.fail(format!("instance {idx}: Σ x̃ ≤ Σ x′ ≤ k fails"));
        }
        for (a, &i) in cs.centers.iter().enumerate() {
            let ball: Rational = inst.ball(i, &opt.radius).into_iter().map(|p| &x[p]).sum();
            if cs.x_tilde[a] > ball || cs.z_tilde[i] != cs.x_tilde[a] {
                out.fail(format!("instance {idx}: x̃ of center {i} inconsistent"));
            }
        }
        let simplified = &run.simplified;
        if count_fractional(simplified) > inst.num_colors() {
            out.fail(format!("instance {idx}: {} fractional simplified values", count_fractional(simplified)));
        }
        checks += 1;
    }
    out.detail = format!("{checks} clusterings checked");
    out
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    let scale = rat(1);
    let inst = gen_example_2_5(&scale).unwrap();
    let rho = Length::from_sq(ratio(1, 2));
    let Some(run) = pseudo_approximate_run(&inst, inst.k(), &rho).unwrap() else {
        out.fail("feasibility LP infeasible".into());
        return out;
    };
    let lp = build_simplified_lp(&run.clusters, &inst);
    let extreme = solve_extreme_optimal(&lp).unwrap();
    let fractional = count_fractional(&extreme);
    if fractional != 2 {
        out.fail(format!("{fractional} fractional variables"));
    }
    if run.solution.centers.len() != inst.k() + 1 {
        out.fail(format!("{} centers after rounding", run.solution.centers.len()));
    }
    if !meets_requirements(&inst, &run.solution) {
        out.fail("rounded solution misses a requirement".into());
    }
    let opt = brute_force_optimum(&inst).unwrap();
    let tenth = Length::from_rational(&(example_2_5_gap(&scale) / rat(10)));
    if opt.radius < tenth {
        out.fail(format!("1-center optimum {} below gap/10", opt.radius));
    }
    out.detail = format!(
        "fractional = {fractional}, centers = {}, 1-center OPT ≈ {:.3}, gap/10 ≈ {:.3}",
        run.solution.centers.len(),
        opt.radius.to_f64(),
        tenth.to_f64()
    );
    out
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new();
    let alpha = ratio(33, 4);
    let ell = rat(1);
    let g = GridSpec::new(ell.clone()).unwrap();
    // ℓ = αρ/2, so extended regions are disjoint when rhombi are more than 2ρ apart.
    let two_rho = &ell * rat(4) / &alpha;
    let half_ell_sq = Q3::rational(&ell * &ell / rat(4));
    let two_rho_sq = Q3::rational(&two_rho * &two_rho);
    let edges = edges_in_window(0..5, 0..5);
    let rhombi: Vec<_> = edges.iter().map(|e| rhombus_of(&g, e)).collect();
    let mut pairs = 0usize;
    let mut min_gap: Option<Q3> = None;
    for a in 0..edges.len() {
        for b in a + 1..edges.len() {
            if adjacent(&edges[a], &edges[b]) {
                continue;
            }
            pairs += 1;
            let d = polygon_dist_sq(&rhombi[a].vertices, &rhombi[b].vertices);
            if d < half_ell_sq {
                out.fail(format!("{:?} and {:?} closer than ℓ/2", edges[a], edges[b]));
            }
            if d <= two_rho_sq {
                out.fail(format!("extended regions of {:?} and {:?} meet", edges[a], edges[b]));
            }
            if min_gap.as_ref().is_none_or(|m| d < *m) {
                min_gap = Some(d);
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(10) {
        out.fail(format!("took {elapsed:?}"));
    }
    out.detail = format!(
        "{} edges, {pairs} non-adjacent pairs, min distance² = {:.4}·ℓ², {elapsed:.2?}",
        edges.len(),
        min_gap.map_or(f64::NAN, |d| d.to_f64())
    );
    out
}

fn random_graph(rng: &mut ChaCha8Rng) -> WeightedGraph {
    let n = 2 * rng.random_range(1..=5);
    let mut g = WeightedGraph::new(n, 2);
    let density = rng.random_range(0.3..=1.0);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(density) {
                let w = vec![rng.random_range(0..=5), rng.random_range(0..=5)];
                g.add_edge(u, v, w).unwrap();
            }
        }
    }
    g
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut false_negative_trials = 0usize;
    let mut recovered = 0usize;
    for trial in 0..500u64 {
        let g = random_graph(&mut rng);
        let truth = brute_force_matchings(&g).unwrap();
        let bounds = matching_weight_bounds(&g);
        let table = support(&g, &bounds, 5000 + trial).unwrap();
        let flagged = table.achievable();
        if let Some(w) = flagged.iter().find(|w| !truth.contains_key(*w)) {
            out.fail(format!("graph {trial}: false positive {w:?}"));
        }
        if truth.keys().any(|w| !table.contains(w)) {
            false_negative_trials += 1;
        }
        for w in &flagged {
            match recover_flagged(&g, &table, w).unwrap() {
                Some(m) if g.is_perfect_matching(&m) && &g.matching_weight(&m) == w => recovered += 1,
                Some(_) => out.fail(format!("graph {trial}: recovered matching for {w:?} does not verify")),
                None => out.fail(format!("graph {trial}: no matching recovered for flagged {w:?}")),
            }
        }
    }
    if false_negative_trials > 1 {
        out.fail(format!("{false_negative_trials} trials with false negatives"));
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        out.fail(format!("took {elapsed:?}"));
    }
    out.detail = format!(
        "500 graphs, {recovered} recoveries verified, {false_negative_trials} false-negative trials, {elapsed:.2?}"
    );
    out
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new();
    let alpha = ratio(33, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_balls = 0;
    for trial in 0..50u64 {
        let k = rng.random_range(1..=4);
        let colors = rng.random_range(2..=3);
        let n = rng.random_range(2 * k + colors..=30);
        let outliers = rng.random_range(0..=3.min(n - k));
        let params = SeparatedParams { n, k, colors, alpha: alpha.clone(), rho: rat(1), outliers, seed: 600 + trial };
        let (inst, planted) = gen_separated(&params).unwrap();
        let bound = separated_radius(&planted.rho, &alpha);
        match solve_separated(&inst, &planted.rho, &alpha, 6000 + trial).unwrap() {
            None => out.fail(format!("instance {trial}: nothing found")),
            Some(found) => {
                let sol = &found.solution;
                worst_balls = worst_balls.max(sol.centers.len());
                if sol.centers.len() > k {
                    out.fail(format!("instance {trial}: {} balls for k = {k}", sol.centers.len()));
                }
                if sol.radius > bound {
                    out.fail(format!("instance {trial}: radius {} above bound", sol.radius));
                }
                if !verify(&inst, sol).unwrap().feasible {
                    out.fail(format!("instance {trial}: cover infeasible"));
                }
            }
        }
    }
    out.detail = format!("50 planted instances, radius bound 6.125ρ, {:.2?}", start.elapsed());
    out
}

fn ratio_sq(cost: &Length, opt: &Length) -> Option<Rational> {
    if opt.is_zero() {
        None
    } else {
        Some(cost.sq() / opt.sq())
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new();
    let cfg = SolverConfig { early_stop: true, ..SolverConfig::default() };
    let factor = approximation_factor(&cfg.alpha);
    let factor_sq = &factor * &factor;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ratios: Vec<f64> = Vec::new();
    let mut zero_opt = 0usize;
    let mut separated_wins = 0usize;
    for trial in 0..100u64 {
        let n = rng.random_range(3..=12);
        let k = rng.random_range(1..=3usize.min(n));
        let inst = gen_random_planar(n, k, 2, 700 + trial).unwrap();
        let opt = brute_force_optimum(&inst).unwrap();
        let report = solve(&inst, &SolverConfig { seed: trial, ..cfg.clone() }).unwrap();
        let (Some(best), Some(cost)) = (&report.best, &report.cost) else {
            out.fail(format!("instance {trial}: no solution"));
            continue;
        };
        if best.centers.len() > inst.k() {
            out.fail(format!("instance {trial}: {} centers", best.centers.len()));
        }
        if !verify(&inst, best).unwrap().feasible {
            out.fail(format!("instance {trial}: infeasible"));
        }
        if radius_for(&inst, &best.centers) > *cost {
            out.fail(format!("instance {trial}: reported cost does not cover"));
        }
        if report.winner.as_ref().is_some_and(|w| w.branch == Branch::Separated) {
            separated_wins += 1;
        }
        match ratio_sq(cost, &opt.radius) {
            None => {
                zero_opt += 1;
                if !cost.is_zero() {
                    out.fail(format!("instance {trial}: OPT is 0 but cost is {cost}"));
                }
            }
            Some(r) => {
                if r > factor_sq {
                    out.fail(format!("instance {trial}: ratio² {r} above {factor_sq}"));
                }
                ratios.push(Length::from_sq(r).to_f64());
            }
        }
    }
    ratios.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| ratios.get(((ratios.len() as f64 - 1.0) * p).round() as usize).copied().unwrap_or(f64::NAN);
    out.detail = format!(
        "100 instances ({zero_opt} with OPT = 0, {separated_wins} won by the separated branch), ratio min {:.3} median {:.3} p90 {:.3} max {:.3}, {:.2?}",
        q(0.0),
        q(0.5),
        q(0.9),
        q(1.0),
        start.elapsed()
    );
    out
}

fn determinism_snapshot() -> String {
    let mut parts = Vec::new();
    for inst in metric_corpus().iter().take(20) {
        let opt = brute_force_optimum(inst).unwrap();
        let run = pseudo_approximate_run(inst, inst.k(), &opt.radius).unwrap().unwrap();
        parts.push(json!({
            "opt": opt,
            "solution": run.solution.to_json(inst).unwrap(),
        }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..20u64 {
        let g = random_graph(&mut rng);
        let table = support(&g, &matching_weight_bounds(&g), 5000 + trial).unwrap();
        let flagged = table.achievable();
        let recovered: Vec<_> = flagged.iter().map(|w| recover_flagged(&g, &table, w).unwrap()).collect();
        parts.push(json!({ "graph": g.to_json(), "support": flagged, "recovered": recovered }));
    }
    let alpha = ratio(33, 4);
    for trial in 0..5u64 {
        let params = SeparatedParams { n: 20, k: 3, colors: 2, alpha: alpha.clone(), rho: rat(1), outliers: 2, seed: trial };
        let (inst, planted) = gen_separated(&params).unwrap();
        let found = solve_separated(&inst, &planted.rho, &alpha, trial).unwrap();
        parts.push(json!({
            "instance": inst.to_json(),
            "solution": found.map(|f| f.solution.to_json(&inst).unwrap()),
        }));
    }
    for trial in 0..10u64 {
        let inst = gen_random_planar(10, 2, 2, 700 + trial).unwrap();
        for threads in [1, 4] {
            let cfg = SolverConfig { seed: trial, parallelism: Some(threads), ..SolverConfig::default() };
            parts.push(serde_json::to_value(solve(&inst, &cfg).unwrap()).unwrap());
        }
    }
    serde_json::to_string(&parts).unwrap()
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new();
    let a = determinism_snapshot();
    let b = determinism_snapshot();
    if a != b {
        out.fail("reruns differ".into());
    }
    out.detail = format!("{} bytes compared", a.len());
    out
}

fn main() -> ExitCode {
    let corpus = metric_corpus();
    let results = [
        ("pseudo-approximation guarantee", criterion_1(&corpus)),
        ("clustering invariants", criterion_2(&corpus)),
        ("two-cluster fractional example", criterion_3()),
        ("rhombus separation", criterion_4()),
        ("exact matching engine", criterion_5()),
        ("separated branch end-to-end", criterion_6()),
        ("headline ratio", criterion_7()),
        ("determinism", criterion_8()),
    ];
    let mut ok = true;
    for (i, (name, outcome)) in results.iter().enumerate() {
        let status = if outcome.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {}: {status} {name}: {}", i + 1, outcome.detail);
        for f in outcome.failures.iter().take(10) {
            println!("    {f}");
        }
        ok &= outcome.failures.is_empty();
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
