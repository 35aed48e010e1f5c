//! LP-based pseudo-approximation, valid in any metric.
//!
//! Solve the feasibility LP at a radius guess, cluster greedily around
//! points of largest fractional coverage, then take an extreme optimum of
//! the much smaller per-cluster LP and open every cluster with a positive
//! value. The result has radius `2ρ` and at most `budget + c - 1` centers.

use num_traits::{One, Signed, Zero};

use crate::error::Result;
use crate::lp::{solve_extreme_optimal, solve_feasible, LinearProgram, LpOutcome, LpStatus, Relation};
use crate::model::{Instance, Solution};
use crate::number::{rat, Length, Rational};

/// Feasibility LP over variables `x_0..x_{n-1}` (openings) followed by
/// `z_0..z_{n-1}` (coverage), using the instance's own `k`.
pub fn build_feasibility_lp(inst: &Instance, rho: &Length) -> LinearProgram {
    feasibility_lp_with_budget(inst, inst.k(), rho)
}

pub fn feasibility_lp_with_budget(inst: &Instance, budget: usize, rho: &Length) -> LinearProgram {
    let n = inst.n();
    let mut lp = LinearProgram::with_box(2 * n, Rational::zero(), Rational::one());
    for j in 0..n {
        let mut row = vec![Rational::zero(); 2 * n];
        for i in inst.ball(j, rho) {
            row[i] = Rational::one();
        }
        row[n + j] = -Rational::one();
        lp.add_constraint(row, Relation::Ge, Rational::zero());
    }
    let mut total = vec![Rational::zero(); 2 * n];
    total[..n].fill(Rational::one());
    lp.add_constraint(total, Relation::Le, rat(budget as i64));
    for (color, &t) in inst.requirements().iter().enumerate() {
        let mut row = vec![Rational::zero(); 2 * n];
        for j in (0..n).filter(|&j| inst.color(j) == color) {
            row[n + j] = Rational::one();
        }
        lp.add_constraint(row, Relation::Ge, rat(t as i64));
    }
    lp
}

/// Output of the greedy clustering pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSet {
    pub rho: Length,
    /// Cluster centers `S`, in the order they were picked.
    pub centers: Vec<usize>,
    /// `members[i]` is the cluster of `centers[i]`, ascending by id.
    pub members: Vec<Vec<usize>>,
    /// `counts[i][c]`: points of color `c` in cluster `i`.
    pub counts: Vec<Vec<usize>>,
    /// Modified opening value of each cluster center.
    pub x_tilde: Vec<Rational>,
    /// Modified coverage value of every point.
    pub z_tilde: Vec<Rational>,
}

/// Greedy clustering driven by a feasible fractional point `(x, z)`.
///
/// Ties on the largest `z` go to the lowest point id.
pub fn greedy_cluster(inst: &Instance, rho: &Length, x: &[Rational], z: &[Rational]) -> ClusterSet {
    let n = inst.n();
    let two_rho = rho.scale(&rat(2));
    let mut unclustered = vec![true; n];
    let mut remaining = n;
    let mut cs = ClusterSet {
        rho: rho.clone(),
        centers: Vec::new(),
        members: Vec::new(),
        counts: Vec::new(),
        x_tilde: Vec::new(),
        z_tilde: vec![Rational::zero(); n],
    };
    while remaining > 0 {
        let mut pick: Option<usize> = None;
        for j in (0..n).filter(|&j| unclustered[j]) {
            if pick.is_none_or(|p| z[j] > z[p]) {
                pick = Some(j);
            }
        }
        let j = pick.expect("an unclustered point remains");
        let mass: Rational = inst.ball(j, rho).into_iter().map(|i| &x[i]).sum();
        let value = mass.min(Rational::one());
        let members: Vec<usize> = (0..n).filter(|&p| unclustered[p] && inst.within(j, p, &two_rho)).collect();
        let mut counts = vec![0; inst.num_colors()];
        for &p in &members {
            counts[inst.color(p)] += 1;
            cs.z_tilde[p] = value.clone();
            unclustered[p] = false;
        }
        remaining -= members.len();
        cs.centers.push(j);
        cs.members.push(members);
        cs.counts.push(counts);
        cs.x_tilde.push(value);
    }
    cs
}

impl ClusterSet {
    /// Checks every structural property of the clustering exactly; returns
    /// a description of each violation found.
    pub fn violations(&self, inst: &Instance, budget: usize, x: &[Rational], z: &[Rational]) -> Vec<String> {
        let n = inst.n();
        let mut out = Vec::new();
        let mut seen = vec![0usize; n];
        for members in &self.members {
            for &p in members {
                seen[p] += 1;
            }
        }
        if seen.iter().any(|&s| s != 1) {
            out.push("clusters do not partition the point set".to_string());
        }
        let two_rho = self.rho.scale(&rat(2));
        for (a, &i) in self.centers.iter().enumerate() {
            for &i2 in &self.centers[a + 1..] {
                if inst.within(i, i2, &two_rho) {
                    out.push(format!("centers {i} and {i2} are within 2ρ"));
                }
            }
        }
        for j in 0..n {
            let near = self.centers.iter().filter(|&&i| inst.within(i, j, &self.rho)).count();
            if near > 1 {
                out.push(format!("point {j} is within ρ of {near} centers"));
            }
        }
        for (a, members) in self.members.iter().enumerate() {
            for &p in members {
                if self.z_tilde[p] != self.x_tilde[a] {
                    out.push(format!("z̃ of {p} differs from its center's value"));
                }
                if self.z_tilde[p] < z[p] {
                    out.push(format!("z̃ of {p} is below z′"));
                }
            }
        }
        for color in 0..inst.num_colors() {
            let mass: Rational =
                self.counts.iter().zip(&self.x_tilde).map(|(c, xt)| rat(c[color] as i64) * xt).sum();
            if mass < rat(inst.requirements()[color] as i64) {
                out.push(format!("fractional coverage of color {color} is below its requirement"));
            }
        }
        let opened: Rational = self.x_tilde.iter().sum();
        if opened > rat(budget as i64) {
            out.push("total fractional opening exceeds the budget".to_string());
        }
        if x.iter().any(|v| v.is_negative()) {
            out.push("input x has negative entries".to_string());
        }
        out
    }
}

/// Per-cluster LP: color 0 in the objective, one coverage row per other
/// color, and the opening budget. Uses the instance's own `k`.
pub fn build_simplified_lp(cs: &ClusterSet, inst: &Instance) -> LinearProgram {
    simplified_lp_with_budget(cs, inst, inst.k())
}

pub fn simplified_lp_with_budget(cs: &ClusterSet, inst: &Instance, budget: usize) -> LinearProgram {
    let m = cs.centers.len();
    let mut lp = LinearProgram::with_box(m, Rational::zero(), Rational::one());
    for color in 1..inst.num_colors() {
        let row = cs.counts.iter().map(|c| rat(c[color] as i64)).collect();
        lp.add_constraint(row, Relation::Ge, rat(inst.requirements()[color] as i64));
    }
    lp.add_constraint(vec![Rational::one(); m], Relation::Le, rat(budget as i64));
    lp.maximize(cs.counts.iter().map(|c| rat(c[0] as i64)).collect());
    lp
}

/// Everything produced along the way, for inspection and testing.
#[derive(Clone, Debug)]
pub struct PseudoRun {
    pub feasibility: LpOutcome,
    pub clusters: ClusterSet,
    pub simplified: LpOutcome,
    pub solution: Solution,
}

/// Pseudo-approximation at radius guess `rho`: `None` if the feasibility
/// LP is infeasible, otherwise a cover of radius `2ρ` with at most
/// `budget + c - 1` centers meeting every requirement.
pub fn pseudo_approximate(inst: &Instance, budget: usize, rho: &Length) -> Result<Option<Solution>> {
    Ok(pseudo_approximate_run(inst, budget, rho)?.map(|run| run.solution))
}

pub fn pseudo_approximate_run(inst: &Instance, budget: usize, rho: &Length) -> Result<Option<PseudoRun>> {
    let lp = feasibility_lp_with_budget(inst, budget, rho);
    let feasibility = solve_feasible(&lp)?;
    if feasibility.status == LpStatus::Infeasible {
        return Ok(None);
    }
    let n = inst.n();
    let (x, z) = feasibility.values.split_at(n);
    let clusters = greedy_cluster(inst, rho, x, z);
    let simplified_lp = simplified_lp_with_budget(&clusters, inst, budget);
    let simplified = solve_extreme_optimal(&simplified_lp)?;
    debug_assert_eq!(simplified.status, LpStatus::OptimalExtreme, "x̃ is feasible for the simplified LP");
    let centers: Vec<usize> = clusters
        .centers
        .iter()
        .zip(&simplified.values)
        .filter(|(_, v)| v.is_positive())
        .map(|(&c, _)| c)
        .collect();
    let solution = Solution::new(inst, centers, rho.scale(&rat(2)))?;
    Ok(Some(PseudoRun { feasibility, clusters, simplified, solution }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::gen_example_2_5;
    use crate::lp::count_fractional;
    use crate::model::{verify, Point};
    use crate::number::ratio;

    fn single_point() -> Instance {
        Instance::planar(vec![(Point::new(rat(0), rat(0)), 0)], 1, vec![1]).unwrap()
    }

    #[test]
    fn single_point_lp_feasible() {
        let inst = single_point();
        let lp = build_feasibility_lp(&inst, &Length::zero());
        let out = solve_feasible(&lp).unwrap();
        assert_eq!(out.status, LpStatus::Feasible);
        assert_eq!(out.values, vec![rat(1), rat(1)]);
    }

    #[test]
    fn single_point_radius_zero() {
        let inst = single_point();
        let sol = pseudo_approximate(&inst, 1, &Length::zero()).unwrap().unwrap();
        assert_eq!(sol.centers, vec![0]);
        assert!(sol.radius.is_zero());
        assert!(verify(&inst, &sol).unwrap().feasible);
    }

    #[test]
    fn one_cluster_when_everything_is_close() {
        let pts = (0..5).map(|i| (Point::new(ratio(i, 10), rat(0)), (i % 2) as usize)).collect();
        let inst = Instance::planar(pts, 1, vec![2, 1]).unwrap();
        let rho = Length::from_rational(&rat(1));
        let n = inst.n();
        let mut z = vec![ratio(1, 2); n];
        z[3] = rat(1);
        let x = vec![ratio(1, 5); n];
        let cs = greedy_cluster(&inst, &rho, &x, &z);
        assert_eq!(cs.centers, vec![3]);
        assert_eq!(cs.members, vec![vec![0, 1, 2, 3, 4]]);
        let out = solve_extreme_optimal(&build_simplified_lp(&cs, &inst)).unwrap();
        assert_eq!(out.values, vec![rat(1)]);
    }

    #[test]
    fn example_2_5_pipeline() {
        let inst = gen_example_2_5(&rat(1)).unwrap();
        let rho = Length::from_rational(&rat(1));
        let run = pseudo_approximate_run(&inst, 1, &rho).unwrap().unwrap();
        let mut counts = run.clusters.counts.clone();
        counts.sort();
        assert_eq!(counts, vec![vec![1, 3], vec![3, 1]]);
        assert_eq!(run.simplified.objective, Some(rat(2)));
        assert_eq!(count_fractional(&run.simplified), 2);
        assert!(run.simplified.values.iter().all(|v| *v == ratio(1, 2)));
        assert_eq!(run.solution.centers.len(), 2);
        assert_eq!(run.solution.radius, rho.scale(&rat(2)));
        assert!(run.solution.covered.iter().all(|&c| c >= 2));
        let (x, z) = run.feasibility.values.split_at(inst.n());
        assert!(run.clusters.violations(&inst, 1, x, z).is_empty());
    }

    #[test]
    fn x_tilde_is_feasible_for_simplified_lp() {
        let inst = gen_example_2_5(&rat(1)).unwrap();
        let rho = Length::from_rational(&rat(1));
        let run = pseudo_approximate_run(&inst, 1, &rho).unwrap().unwrap();
        let lp = build_simplified_lp(&run.clusters, &inst);
        assert!(lp.is_satisfied(&run.clusters.x_tilde));
        assert!(lp.objective_value(&run.clusters.x_tilde).unwrap() >= rat(2));
    }

    #[test]
    fn infeasible_guess_returns_none() {
        // Two far-apart points of different colors, one center, radius 0.
        let pts = vec![(Point::new(rat(0), rat(0)), 0), (Point::new(rat(10), rat(0)), 1)];
        let inst = Instance::planar(pts, 1, vec![1, 1]).unwrap();
        assert!(pseudo_approximate(&inst, 1, &Length::zero()).unwrap().is_none());
        let sol = pseudo_approximate(&inst, 1, &Length::from_rational(&rat(10))).unwrap().unwrap();
        assert!(sol.centers.len() <= 2);
    }

    #[test]
    fn deterministic_runs() {
        let inst = gen_example_2_5(&ratio(1, 3)).unwrap();
        let rho = Length::from_rational(&ratio(1, 3));
        let a = pseudo_approximate_run(&inst, 1, &rho).unwrap().unwrap();
        let b = pseudo_approximate_run(&inst, 1, &rho).unwrap().unwrap();
        assert_eq!(a.clusters, b.clusters);
        assert_eq!(a.solution, b.solution);
    }
}
