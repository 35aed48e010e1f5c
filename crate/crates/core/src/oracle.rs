//! Exhaustive ground truth for small instances.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::number::{Length, Rational};

pub const SUBSET_LIMIT: u128 = 1_000_000;
pub const OPTIMAL_SET_LIMIT: usize = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct OracleResult {
    pub radius: Length,
    pub centers: Vec<usize>,
    /// Every optimal `k`-subset, up to `OPTIMAL_SET_LIMIT` of them.
    pub optimal_sets: Vec<Vec<usize>>,
    pub optimal_count: u64,
    pub subsets_examined: u64,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Smallest radius at which `centers` meet every requirement: per color, the
/// `t`-th smallest distance from a point of that color to its nearest center.
pub fn radius_for(inst: &Instance, centers: &[usize]) -> Length {
    let mut per_color: Vec<Vec<&Rational>> = vec![Vec::new(); inst.num_colors()];
    for p in 0..inst.n() {
        let nearest = centers.iter().map(|&c| inst.dist_sq(c, p)).min().expect("at least one center");
        per_color[inst.color(p)].push(nearest);
    }
    let mut worst: Option<&Rational> = None;
    for (dists, &t) in per_color.iter_mut().zip(inst.requirements()) {
        if t == 0 {
            continue;
        }
        dists.sort_unstable();
        let d = dists[t - 1];
        if worst.is_none_or(|w| d > w) {
            worst = Some(d);
        }
    }
    worst.map_or_else(Length::zero, |d| Length::from_sq(d.clone()))
}

fn check_guard(inst: &Instance) -> Result<()> {
    let subsets = binomial(inst.n(), inst.k());
    if subsets > SUBSET_LIMIT {
        return Err(Error::OracleGuard { n: inst.n(), k: inst.k(), subsets, limit: SUBSET_LIMIT });
    }
    Ok(())
}

/// Next `k`-subset of `0..n` in lexicographic order.
fn next_subset(s: &mut [usize], n: usize) -> bool {
    let k = s.len();
    let Some(i) = (0..k).rev().find(|&i| s[i] < n - k + i) else {
        return false;
    };
    s[i] += 1;
    for j in i + 1..k {
        s[j] = s[j - 1] + 1;
    }
    true
}

/// Optimal radius over all `k`-subsets of the points as centers.
pub fn brute_force_optimum(inst: &Instance) -> Result<OracleResult> {
    check_guard(inst)?;
    let (n, k) = (inst.n(), inst.k());
    let mut subset: Vec<usize> = (0..k).collect();
    let mut best: Option<Length> = None;
    let mut optimal_sets = Vec::new();
    let mut optimal_count = 0u64;
    let mut examined = 0u64;
    loop {
        examined += 1;
        let r = radius_for(inst, &subset);
        match best.as_ref().map(|b| r.cmp(b)) {
            None | Some(std::cmp::Ordering::Less) => {
                best = Some(r);
                optimal_sets.clear();
                optimal_sets.push(subset.clone());
                optimal_count = 1;
            }
            Some(std::cmp::Ordering::Equal) => {
                optimal_count += 1;
                if optimal_sets.len() < OPTIMAL_SET_LIMIT {
                    optimal_sets.push(subset.clone());
                }
            }
            Some(std::cmp::Ordering::Greater) => {}
        }
        if !next_subset(&mut subset, n) {
            break;
        }
    }
    Ok(OracleResult {
        radius: best.expect("k <= n gives at least one subset"),
        centers: optimal_sets[0].clone(),
        optimal_sets,
        optimal_count,
        subsets_examined: examined,
    })
}

/// Whether all pairwise center distances exceed `alpha * radius`.
pub fn is_alpha_separated(inst: &Instance, centers: &[usize], radius: &Length, alpha: &Rational) -> bool {
    let bound = radius.scale(alpha);
    centers
        .iter()
        .enumerate()
        .all(|(a, &i)| centers[a + 1..].iter().all(|&j| inst.dist_sq(i, j) > bound.sq()))
}

/// Whether some optimal `k`-subset (among the first `OPTIMAL_SET_LIMIT`)
/// is α-separated at the optimal radius.
pub fn exists_separated_optimum(inst: &Instance, alpha: &Rational) -> Result<bool> {
    let opt = brute_force_optimum(inst)?;
    Ok(opt.optimal_sets.iter().any(|s| is_alpha_separated(inst, s, &opt.radius, alpha)))
}
