//! Solver for instances whose optimal balls are far apart: grid edges stand
//! in for balls, and a perfect matching with an exact color-count vector
//! picks `k` pairwise non-adjacent edges covering enough of every color.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{adjacent, edges_near, GridEdge, GridSpec};
use crate::matching::{matching_weight_bounds, recover_flagged, support, WeightedGraph};
use crate::model::{verify, Instance, Point, Solution};
use crate::number::{rat, sqrt_lower, Length, Rational};
use crate::seed::derive_seed;

/// The matching graph `G'` on grid vertices touched by a non-empty region.
#[derive(Clone, Debug)]
pub struct MatchInstance {
    pub grid: GridSpec,
    pub rho: Length,
    pub alpha: Rational,
    /// Grid vertex (lattice coordinates) of each vertex of `G'`.
    pub vertices: Vec<(i64, i64)>,
    /// Edge `idx` of `g_prime` is `grid_edges[idx]`.
    pub grid_edges: Vec<GridEdge>,
    /// Sorted point ids in the extended region of each edge.
    pub members: Vec<Vec<usize>>,
    pub g_prime: WeightedGraph,
    /// Packing base `2 · max(n, |V'|)`.
    pub pack_base: usize,
}

impl MatchInstance {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Whether every two vertex-disjoint edges have disjoint point sets.
    pub fn regions_disjoint(&self) -> bool {
        let m = self.grid_edges.len();
        for a in 0..m {
            for b in a + 1..m {
                if adjacent(&self.grid_edges[a], &self.grid_edges[b]) {
                    continue;
                }
                let (x, y) = (&self.members[a], &self.members[b]);
                let (mut i, mut j) = (0, 0);
                while i < x.len() && j < y.len() {
                    match x[i].cmp(&y[j]) {
                        std::cmp::Ordering::Equal => return false,
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                    }
                }
            }
        }
        true
    }
}

/// `Σ_i counts[i] · N^(2i)`.
pub fn pack(counts: &[usize], base: usize) -> BigUint {
    let sq = BigUint::from(base) * BigUint::from(base);
    counts.iter().rev().fold(BigUint::zero(), |acc, &c| acc * &sq + BigUint::from(c))
}

/// Inverse of [`pack`] for counts below `N^2`.
pub fn unpack(mut packed: BigUint, base: usize, colors: usize) -> Vec<usize> {
    let sq = BigUint::from(base) * BigUint::from(base);
    (0..colors)
        .map(|_| {
            let (q, r) = packed.div_rem(&sq);
            packed = q;
            r.to_usize().expect("digit below N^2")
        })
        .collect()
}

/// Grid side for radius `rho`. At `rho = 0` the side is below half the
/// smallest positive point distance, so each rhombus sees one location.
fn grid_for(inst: &Instance, rho: &Length, alpha: &Rational) -> Result<GridSpec> {
    if !rho.is_zero() {
        return GridSpec::for_radius(alpha, rho);
    }
    let n = inst.n();
    let min_sq = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| inst.dist_sq(i, j))
        .filter(|d| !d.is_zero())
        .min()
        .cloned();
    match min_sq {
        Some(d) => GridSpec::new(sqrt_lower(&d, 32) / rat(3)),
        None => GridSpec::new(rat(1)),
    }
}

fn planar_points(inst: &Instance) -> Result<&[Point]> {
    inst.points()
        .ok_or_else(|| Error::InvalidArgument("the separated solver needs a planar instance".into()))
}

pub fn build_match_instance(inst: &Instance, rho: &Length, alpha: &Rational) -> Result<MatchInstance> {
    let points = planar_points(inst)?;
    if alpha <= &rat(8) {
        return Err(Error::InvalidArgument("alpha must exceed 8".into()));
    }
    let grid = grid_for(inst, rho, alpha)?;
    let mut regions: BTreeMap<GridEdge, Vec<usize>> = BTreeMap::new();
    for (id, p) in points.iter().enumerate() {
        for e in edges_near(&grid, p, rho) {
            regions.entry(e).or_default().push(id);
        }
    }
    let mut vertex_ids: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for e in regions.keys() {
        let (a, b) = e.endpoints();
        vertex_ids.entry(a).or_insert(0);
        vertex_ids.entry(b).or_insert(0);
    }
    for (idx, slot) in vertex_ids.values_mut().enumerate() {
        *slot = idx;
    }
    let colors = inst.num_colors();
    let mut g_prime = WeightedGraph::new(vertex_ids.len(), colors);
    let mut grid_edges = Vec::with_capacity(regions.len());
    let mut members = Vec::with_capacity(regions.len());
    for (e, ids) in regions {
        let (a, b) = e.endpoints();
        let mut weight = vec![0; colors];
        for &p in &ids {
            weight[inst.color(p)] += 1;
        }
        g_prime.add_edge(vertex_ids[&a], vertex_ids[&b], weight)?;
        grid_edges.push(e);
        members.push(ids);
    }
    let vertices: Vec<(i64, i64)> = vertex_ids.into_keys().collect();
    let pack_base = 2 * inst.n().max(vertices.len());
    let mi = MatchInstance {
        grid,
        rho: rho.clone(),
        alpha: alpha.clone(),
        vertices,
        grid_edges,
        members,
        g_prime,
        pack_base,
    };
    debug_assert!(mi.regions_disjoint());
    Ok(mi)
}

/// `G'` plus `|V'| - 2k_eff` auxiliary vertices joined to every original
/// vertex by zero-weight edges. Its perfect matchings restrict to
/// `k_eff`-edge matchings of `G'` with the same weight.
pub fn augment(mi: &MatchInstance, k_eff: usize) -> Result<WeightedGraph> {
    let v = mi.num_vertices();
    if v < 2 * k_eff {
        return Err(Error::TooFewVertices { vertices: v, k: k_eff });
    }
    let extra = v - 2 * k_eff;
    let colors = mi.g_prime.num_colors();
    let mut g = WeightedGraph::new(v + extra, colors);
    for e in mi.g_prime.edges() {
        g.add_edge(e.u, e.v, e.weight.clone())?;
    }
    for aux in v..v + extra {
        for orig in 0..v {
            g.add_edge(orig, aux, vec![0; colors])?;
        }
    }
    Ok(g)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SeparatedStats {
    pub support_calls: usize,
    pub recover_calls: usize,
    pub graph_vertices: usize,
    pub graph_edges: usize,
}

#[derive(Clone, Debug)]
pub struct SeparatedOutcome {
    pub solution: Solution,
    /// Per-color counts of the matched regions.
    pub target: Vec<usize>,
    pub k_eff: usize,
    pub stats: SeparatedStats,
}

/// Radius of the balls the separated solver places: `(α/2 + 2)ρ`.
pub fn separated_radius(rho: &Length, alpha: &Rational) -> Length {
    rho.scale(&(alpha / rat(2) + rat(2)))
}

/// Cover with at most `k` balls of radius `(α/2 + 2)ρ`, or `None` when no
/// matching meets the requirements. Always `Some` on an α-separated
/// instance whose optimum is at most `rho` (up to the matching error rate).
pub fn solve_separated(inst: &Instance, rho: &Length, alpha: &Rational, seed: u64) -> Result<Option<SeparatedOutcome>> {
    Ok(solve_separated_with_stats(inst, rho, alpha, seed)?.0)
}

/// [`solve_separated`] that also reports its work when nothing is found.
pub fn solve_separated_with_stats(
    inst: &Instance,
    rho: &Length,
    alpha: &Rational,
    seed: u64,
) -> Result<(Option<SeparatedOutcome>, SeparatedStats)> {
    let mut stats = SeparatedStats::default();
    let t = inst.requirements();
    if t.iter().all(|&x| x == 0) {
        let solution = Solution::empty(inst);
        let out = SeparatedOutcome { solution, target: vec![0; t.len()], k_eff: 0, stats: stats.clone() };
        return Ok((Some(out), stats));
    }
    let mi = build_match_instance(inst, rho, alpha)?;
    stats.graph_vertices = mi.num_vertices();
    stats.graph_edges = mi.g_prime.edges().len();
    let sizes = inst.class_sizes();
    let radius = separated_radius(rho, alpha);
    for k_eff in (1..=inst.k().min(mi.num_vertices() / 2)).rev() {
        // Quick necessary condition: the k_eff heaviest edges per color.
        let reachable = (0..t.len()).all(|i| {
            let mut w: Vec<usize> = mi.g_prime.edges().iter().map(|e| e.weight[i]).collect();
            w.sort_unstable_by(|a, b| b.cmp(a));
            w.iter().take(k_eff).sum::<usize>() >= t[i]
        });
        if !reachable {
            continue;
        }
        let g = augment(&mi, k_eff)?;
        let bounds: Vec<usize> = matching_weight_bounds(&g).iter().zip(&sizes).map(|(a, b)| *a.min(b)).collect();
        if bounds.iter().zip(t).any(|(b, x)| b < x) {
            continue;
        }
        stats.support_calls += 1;
        let table = support(&g, &bounds, derive_seed(seed, k_eff as u64))?;
        let Some(target) = table.achievable().into_iter().find(|w| w.iter().zip(t).all(|(a, b)| a >= b)) else {
            continue;
        };
        stats.recover_calls += 1;
        let matching = recover_flagged(&g, &table, &target)?.ok_or(Error::RecoveryFailed { attempts: 0 })?;
        let v = mi.num_vertices();
        let mut counted = vec![0usize; t.len()];
        let mut centers = Vec::new();
        for &e in &matching {
            let edge = &g.edges()[e];
            if edge.u >= v || edge.v >= v {
                continue;
            }
            // Edges of g keep the indices they had in G'.
            let ids = &mi.members[e];
            for &p in ids {
                counted[inst.color(p)] += 1;
            }
            centers.push(ids[0]);
        }
        assert_eq!(counted, target, "matched regions must be disjoint");
        let solution = Solution::new(inst, centers, radius.clone())?;
        let report = verify(inst, &solution)?;
        assert!(report.feasible, "every point of a region lies within the ball radius of its lowest member");
        return Ok((Some(SeparatedOutcome { solution, target, k_eff, stats: stats.clone() }), stats));
    }
    Ok((None, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_separated, SeparatedParams};
    use crate::grid::edges_in_window;
    use crate::matching::brute_force_matchings;
    use crate::number::ratio;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn alpha() -> Rational {
        ratio(33, 4)
    }

    #[test]
    fn packing_example_weight() {
        // Two of color 0 (red) and four of color 1 (blue).
        let n = 7;
        assert_eq!(pack(&[2, 4], n), BigUint::from(4 * n * n + 2));
    }

    proptest! {
        #[test]
        fn pack_round_trip(a in 0usize..400, b in 0usize..400, c in 0usize..400, base in 20usize..40) {
            prop_assume!(a < base * base && b < base * base && c < base * base);
            prop_assert_eq!(unpack(pack(&[a, b, c], base), base, 3), vec![a, b, c]);
        }
    }

    #[test]
    fn coincident_points_share_surrounding_edges() {
        let pts = (0..5).map(|i| (Point::new(ratio(1, 3), ratio(1, 7)), i % 2)).collect();
        let inst = Instance::planar(pts, 1, vec![1, 1]).unwrap();
        let mi = build_match_instance(&inst, &Length::from_rational(&rat(1)), &alpha()).unwrap();
        assert!(mi.grid_edges.len() <= 6);
        assert!(mi.members.iter().all(|m| m.len() == 5));
        let out = solve_separated(&inst, &Length::from_rational(&rat(1)), &alpha(), 0).unwrap().unwrap();
        assert_eq!(out.solution.centers, vec![0]);
    }

    #[test]
    fn every_point_lands_in_some_region() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let pts = (0..12)
                .map(|_| (Point::new(ratio(rng.random_range(0..500), 50), ratio(rng.random_range(0..500), 50)), rng.random_range(0..2)))
                .collect::<Vec<_>>();
            let colors_present = [0, 1].iter().all(|c| pts.iter().any(|p| p.1 == *c));
            if !colors_present {
                continue;
            }
            let inst = Instance::planar(pts, 2, vec![1, 1]).unwrap();
            let mi = build_match_instance(&inst, &Length::from_sq(rat(2)), &alpha()).unwrap();
            let mut seen = vec![false; inst.n()];
            for m in &mi.members {
                for &p in m {
                    seen[p] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
            assert!(mi.regions_disjoint());
            assert!(mi.pack_base >= 2 * inst.n());
        }
    }

    #[test]
    fn augmentation_sizes() {
        let pts = vec![(Point::new(rat(0), rat(0)), 0), (Point::new(rat(100), rat(0)), 1)];
        let inst = Instance::planar(pts, 2, vec![1, 1]).unwrap();
        let mi = build_match_instance(&inst, &Length::from_rational(&ratio(1, 2)), &alpha()).unwrap();
        let v = mi.num_vertices();
        for k_eff in 1..=v / 2 {
            let g = augment(&mi, k_eff).unwrap();
            assert_eq!(g.num_vertices(), 2 * v - 2 * k_eff);
            assert_eq!(g.num_vertices() % 2, 0);
        }
        if v % 2 == 0 {
            assert_eq!(augment(&mi, v / 2).unwrap().edges(), mi.g_prime.edges());
        }
        assert!(matches!(augment(&mi, v / 2 + 1), Err(Error::TooFewVertices { .. })));
    }

    /// Weight vectors of all matchings with exactly `k` edges.
    fn k_matchings(g: &WeightedGraph, k: usize) -> std::collections::BTreeSet<Vec<usize>> {
        let mut out = std::collections::BTreeSet::new();
        fn rec(g: &WeightedGraph, from: usize, k: usize, chosen: &mut Vec<usize>, out: &mut std::collections::BTreeSet<Vec<usize>>) {
            if chosen.len() == k {
                if g.is_matching(chosen) {
                    out.insert(g.matching_weight(chosen));
                }
                return;
            }
            for e in from..g.edges().len() {
                chosen.push(e);
                rec(g, e + 1, k, chosen, out);
                chosen.pop();
            }
        }
        rec(g, 0, k, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn augmentation_preserves_matching_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let v = rng.random_range(2..=6);
            let mut g_prime = WeightedGraph::new(v, 2);
            for a in 0..v {
                for b in a + 1..v {
                    if rng.random_bool(0.6) {
                        g_prime.add_edge(a, b, vec![rng.random_range(0..3), rng.random_range(0..3)]).unwrap();
                    }
                }
            }
            let mi = MatchInstance {
                grid: GridSpec::new(rat(1)).unwrap(),
                rho: Length::zero(),
                alpha: alpha(),
                vertices: (0..v as i64).map(|i| (i, 0)).collect(),
                grid_edges: edges_in_window(0..1, 0..1),
                members: Vec::new(),
                g_prime: g_prime.clone(),
                pack_base: 2 * v,
            };
            for k_eff in 1..=v / 2 {
                let g = augment(&mi, k_eff).unwrap();
                let perfect: std::collections::BTreeSet<Vec<usize>> =
                    brute_force_matchings(&g).unwrap().into_keys().collect();
                assert_eq!(perfect, k_matchings(&g_prime, k_eff));
            }
        }
    }

    #[test]
    fn single_point_instance() {
        let inst = Instance::planar(vec![(Point::new(rat(3), rat(4)), 0)], 1, vec![1]).unwrap();
        for rho in [Length::zero(), Length::from_rational(&rat(1))] {
            let out = solve_separated(&inst, &rho, &alpha(), 0).unwrap().unwrap();
            assert_eq!(out.solution.centers, vec![0]);
            assert!(verify(&inst, &out.solution).unwrap().feasible);
        }
    }

    #[test]
    fn unreachable_requirements() {
        let pts = vec![(Point::new(rat(0), rat(0)), 0), (Point::new(rat(50), rat(0)), 1), (Point::new(rat(100), rat(0)), 1)];
        let inst = Instance::planar(pts, 1, vec![1, 2]).unwrap();
        assert!(solve_separated(&inst, &Length::from_rational(&rat(1)), &alpha(), 0).unwrap().is_none());
    }

    #[test]
    fn zero_requirements_give_empty_cover() {
        let inst = Instance::planar(vec![(Point::new(rat(0), rat(0)), 0)], 1, vec![0]).unwrap();
        let out = solve_separated(&inst, &Length::zero(), &alpha(), 0).unwrap().unwrap();
        assert!(out.solution.centers.is_empty());
    }

    #[test]
    fn planted_instances_are_solved() {
        for seed in 0..5 {
            let params = SeparatedParams { n: 14, k: 2, colors: 2, alpha: alpha(), rho: rat(1), outliers: 2, seed };
            let (inst, planted) = gen_separated(&params).unwrap();
            let out = solve_separated(&inst, &planted.rho, &alpha(), seed).unwrap().unwrap();
            assert!(out.solution.centers.len() <= inst.k());
            assert!(out.solution.radius <= separated_radius(&planted.rho, &alpha()));
            assert!(verify(&inst, &out.solution).unwrap().feasible);
        }
    }

    #[test]
    fn rejects_general_metrics() {
        let inst = Instance::explicit(vec![vec![rat(0), rat(1)], vec![rat(1), rat(0)]], vec![0, 0], 1, vec![1]).unwrap();
        assert!(solve_separated(&inst, &Length::zero(), &alpha(), 0).is_err());
    }
}
