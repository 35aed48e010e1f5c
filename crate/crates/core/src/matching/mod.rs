//! Exact-weight perfect matching on graphs with vector-valued edge weights.
//!
//! Each color gets one indeterminate `y_i`. The skew-symmetric matrix with
//! entries `±r_uv · Π y_i^{w_i(uv)}` has a Pfaffian whose monomial `y^w` is
//! non-zero (for random `r`) exactly when some perfect matching has weight
//! vector `w`. The Pfaffian is sampled on a grid over GF(2^61 - 1) and
//! interpolated per axis.

pub mod field;

use std::collections::{BTreeMap, HashMap};

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derive_seed, keyed_rng};
use field::{Grid, P};

/// Largest grid `support` will sample.
pub const MAX_GRID_POINTS: usize = 1 << 22;
pub const BRUTE_FORCE_LIMIT: usize = 12;
pub const RECOVERY_ATTEMPTS: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub u: usize,
    pub v: usize,
    pub weight: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    colors: usize,
    edges: Vec<WeightedEdge>,
    index: BTreeMap<(usize, usize), usize>,
}

#[derive(Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<usize>,
    pub edges: Vec<(usize, usize, Vec<usize>)>,
}

impl WeightedGraph {
    pub fn new(n: usize, colors: usize) -> Self {
        WeightedGraph { n, colors, edges: Vec::new(), index: BTreeMap::new() }
    }

    /// Adds the edge `{u, v}` and returns its index.
    pub fn add_edge(&mut self, u: usize, v: usize, weight: Vec<usize>) -> Result<usize> {
        if u == v {
            return Err(Error::InvalidGraph(format!("self-loop at {u}")));
        }
        if u >= self.n || v >= self.n {
            return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range for {} vertices", self.n)));
        }
        if weight.len() != self.colors {
            return Err(Error::InvalidGraph(format!(
                "edge ({u}, {v}) has {} weights, expected {}",
                weight.len(),
                self.colors
            )));
        }
        let key = (u.min(v), u.max(v));
        if self.index.contains_key(&key) {
            return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
        }
        self.index.insert(key, self.edges.len());
        self.edges.push(WeightedEdge { u: key.0, v: key.1, weight });
        Ok(self.edges.len() - 1)
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_colors(&self) -> usize {
        self.colors
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.index.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn matching_weight(&self, edges: &[usize]) -> Vec<usize> {
        let mut total = vec![0; self.colors];
        for &e in edges {
            for (t, w) in total.iter_mut().zip(&self.edges[e].weight) {
                *t += w;
            }
        }
        total
    }

    pub fn is_matching(&self, edges: &[usize]) -> bool {
        let mut used = vec![false; self.n];
        for &e in edges {
            let Some(edge) = self.edges.get(e) else { return false };
            if used[edge.u] || used[edge.v] {
                return false;
            }
            used[edge.u] = true;
            used[edge.v] = true;
        }
        true
    }

    pub fn is_perfect_matching(&self, edges: &[usize]) -> bool {
        self.is_matching(edges) && 2 * edges.len() == self.n
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (idx, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, idx));
            adj[e.v].push((e.u, idx));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            colors: Some(self.colors),
            edges: self.edges.iter().map(|e| (e.u, e.v, e.weight.clone())).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GraphJson = serde_json::from_str(text)?;
        let colors = raw.colors.or_else(|| raw.edges.first().map(|e| e.2.len())).unwrap_or(0);
        let mut g = WeightedGraph::new(raw.n, colors);
        for (u, v, w) in raw.edges {
            g.add_edge(u, v, w)?;
        }
        Ok(g)
    }
}

/// Which weight vectors within `bounds` are achieved by a perfect matching.
#[derive(Clone, Debug, Serialize)]
pub struct SupportTable {
    pub bounds: Vec<usize>,
    pub seed: u64,
    pub prime: u64,
    #[serde(skip)]
    flags: Vec<bool>,
    #[serde(skip)]
    grid: Option<Grid>,
}

impl SupportTable {
    pub fn contains(&self, w: &[usize]) -> bool {
        match &self.grid {
            Some(grid) if grid.contains(w) => self.flags[grid.index(w)],
            _ => false,
        }
    }

    /// Flagged weight vectors in lexicographic order.
    pub fn achievable(&self) -> Vec<Vec<usize>> {
        let grid = self.grid.as_ref().expect("support table has a grid");
        (0..grid.len()).filter(|&i| self.flags[i]).map(|i| grid.coords(i)).collect()
    }

    pub fn is_empty(&self) -> bool {
        !self.flags.iter().any(|&f| f)
    }
}

/// Non-zero field element attached to the vertex pair `{u, v}`.
fn edge_coeff(seed: u64, u: usize, v: usize) -> u64 {
    let mut rng = keyed_rng(1, seed, u as u64, v as u64);
    loop {
        let x = rng.next_u64() >> 3;
        if x != 0 && x != P {
            return x;
        }
    }
}

fn check_inputs(g: &WeightedGraph, bounds: &[usize]) -> Result<Grid> {
    if g.n % 2 == 1 {
        return Err(Error::OddVertexCount(g.n));
    }
    if bounds.len() != g.colors {
        return Err(Error::InvalidArgument(format!("{} bounds for {} colors", bounds.len(), g.colors)));
    }
    for e in &g.edges {
        if let Some(color) = (0..g.colors).find(|&i| e.weight[i] > bounds[i]) {
            return Err(Error::WeightExceedsBound { u: e.u, v: e.v, color });
        }
    }
    Grid::new(bounds)
        .filter(|grid| grid.len() <= MAX_GRID_POINTS)
        .ok_or_else(|| Error::InvalidArgument(format!("degree bounds {bounds:?} give too large a grid")))
}

struct Sampler<'a> {
    g: &'a WeightedGraph,
    coeffs: Vec<u64>,
}

impl<'a> Sampler<'a> {
    fn new(g: &'a WeightedGraph, seed: u64) -> Self {
        let coeffs = g.edges.iter().map(|e| edge_coeff(seed, e.u, e.v)).collect();
        Sampler { g, coeffs }
    }

    /// The matrix restricted to `alive` (sorted ids) at grid point `y`.
    fn matrix(&self, alive: &[usize], pos: &[usize], y: &[usize], bounds: &[usize]) -> Vec<u64> {
        let m = alive.len();
        let powers: Vec<Vec<u64>> = y
            .iter()
            .zip(bounds)
            .map(|(&yi, &d)| {
                let mut row = Vec::with_capacity(d + 1);
                let mut p = 1;
                for _ in 0..=d {
                    row.push(p);
                    p = field::mul(p, yi as u64 + 1);
                }
                row
            })
            .collect();
        let mut a = vec![0u64; m * m];
        for (e, edge) in self.g.edges.iter().enumerate() {
            let (pu, pv) = (pos[edge.u], pos[edge.v]);
            if pu == usize::MAX || pv == usize::MAX {
                continue;
            }
            let mut val = self.coeffs[e];
            for (i, &w) in edge.weight.iter().enumerate() {
                val = field::mul(val, powers[i][w]);
            }
            a[pu * m + pv] = val;
            a[pv * m + pu] = field::neg(val);
        }
        a
    }
}

fn positions(n: usize, alive: &[usize]) -> Vec<usize> {
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in alive.iter().enumerate() {
        pos[v] = i;
    }
    pos
}

fn tables(bounds: &[usize]) -> Vec<Vec<Vec<u64>>> {
    bounds.iter().map(|&d| field::vandermonde_inverse(d)).collect()
}

/// Samples the Pfaffian on the grid given by `bounds` and reads off which
/// weight vectors carry a non-zero coefficient.
///
/// Every matching's per-color weight must stay within `bounds`; single
/// edges are checked here, whole matchings are the caller's promise. A flag
/// is never set spuriously; a missing flag is wrong with probability at most
/// about `(|V|/2 + Σ bounds) / 2^61`.
pub fn support(g: &WeightedGraph, bounds: &[usize], seed: u64) -> Result<SupportTable> {
    let grid = check_inputs(g, bounds)?;
    let sampler = Sampler::new(g, seed);
    let alive: Vec<usize> = (0..g.n).collect();
    let pos = positions(g.n, &alive);
    let mut values: Vec<u64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let mut a = sampler.matrix(&alive, &pos, &grid.coords(idx), bounds);
            field::pfaffian(&mut a, alive.len())
        })
        .collect();
    field::interpolate(&mut values, &grid, &tables(bounds));
    Ok(SupportTable {
        bounds: bounds.to_vec(),
        seed,
        prime: P,
        flags: values.iter().map(|&v| v != 0).collect(),
        grid: Some(grid),
    })
}

/// A perfect matching (edge indices, sorted) whose weight vector is exactly
/// `target`, or `None` when `support` does not flag the target.
pub fn recover(g: &WeightedGraph, bounds: &[usize], target: &[usize], seed: u64) -> Result<Option<Vec<usize>>> {
    let table = support(g, bounds, seed)?;
    recover_flagged(g, &table, target)
}

/// Like [`recover`], reusing a table already computed for `g`.
pub fn recover_flagged(g: &WeightedGraph, table: &SupportTable, target: &[usize]) -> Result<Option<Vec<usize>>> {
    if !table.contains(target) {
        return Ok(None);
    }
    for attempt in 0..RECOVERY_ATTEMPTS {
        let seed = if attempt == 0 { table.seed } else { derive_seed(table.seed, attempt as u64) };
        if let Some(mut found) = self_reduce(g, &table.bounds, target, seed) {
            found.sort_unstable();
            if g.is_perfect_matching(&found) && g.matching_weight(&found) == target {
                return Ok(Some(found));
            }
        }
    }
    Err(Error::RecoveryFailed { attempts: RECOVERY_ATTEMPTS })
}

/// Neighbors of `u` that are pairwise distinguishable: among vertices with
/// identical weighted neighborhoods only the first is kept.
fn distinct_partners(
    adj: &[Vec<(usize, usize)>],
    g: &WeightedGraph,
    alive: &[bool],
    u: usize,
    rem: &[usize],
) -> Vec<(usize, usize)> {
    let mut seen: HashMap<Vec<(usize, &[usize])>, ()> = HashMap::new();
    let mut out = Vec::new();
    for &(v, e) in &adj[u] {
        if !alive[v] || g.edges[e].weight.iter().zip(rem).any(|(w, r)| w > r) {
            continue;
        }
        let key: Vec<(usize, &[usize])> = adj[v]
            .iter()
            .filter(|(x, _)| alive[*x])
            .map(|&(x, f)| (x, g.edges[f].weight.as_slice()))
            .collect();
        if seen.insert(key, ()).is_none() {
            out.push((v, e));
        }
    }
    out
}

/// Vertex-by-vertex self-reduction. The lowest live vertex `u` is matched to
/// the first partner `v` for which the target minus `w(uv)` survives in
/// `Pf(T - u - v)`; those Pfaffians come from `Pf(T) · T^{-1}` column `u`.
fn self_reduce(g: &WeightedGraph, bounds: &[usize], target: &[usize], seed: u64) -> Option<Vec<usize>> {
    let sampler = Sampler::new(g, seed);
    let adj = g.adjacency();
    let mut alive = vec![true; g.n];
    let mut rem = target.to_vec();
    let mut bnd = bounds.to_vec();
    let mut chosen = Vec::new();
    while let Some(u) = (0..g.n).find(|&v| alive[v]) {
        let partners = distinct_partners(&adj, g, &alive, u, &rem);
        let pick = match partners.len() {
            0 => return None,
            // A matching of the target weight exists, so u's only option is it.
            1 => partners[0],
            _ => {
                let live: Vec<usize> = (0..g.n).filter(|&v| alive[v]).collect();
                let pos = positions(g.n, &live);
                let grid = Grid::new(&bnd)?;
                let m = live.len();
                let columns: Option<Vec<Vec<u64>>> = (0..grid.len())
                    .into_par_iter()
                    .map(|idx| {
                        let a = sampler.matrix(&live, &pos, &grid.coords(idx), &bnd);
                        let pf = field::pfaffian(&mut a.clone(), m);
                        let mut rhs = vec![0u64; m];
                        rhs[pos[u]] = 1;
                        let x = field::solve(&mut a.clone(), m, rhs)?;
                        Some(partners.iter().map(|&(v, _)| field::mul(pf, x[pos[v]])).collect())
                    })
                    .collect();
                let columns = columns?;
                let tabs = tables(&bnd);
                let hit = partners.iter().enumerate().find(|&(k, &(_, e))| {
                    let want: Vec<usize> = rem.iter().zip(&g.edges[e].weight).map(|(r, w)| r - w).collect();
                    let values: Vec<u64> = columns.iter().map(|c| c[k]).collect();
                    field::coefficient(&values, &grid, &tabs, &want) != 0
                });
                *hit?.1
            }
        };
        let (v, e) = pick;
        alive[u] = false;
        alive[v] = false;
        for ((r, b), w) in rem.iter_mut().zip(bnd.iter_mut()).zip(&g.edges[e].weight) {
            *r -= w;
            *b -= w;
        }
        chosen.push(e);
        for (b, tight) in bnd.iter_mut().zip(live_weight_bounds(g, &alive)) {
            *b = (*b).min(tight);
        }
        if rem.iter().zip(&bnd).any(|(r, b)| r > b) {
            return None;
        }
    }
    rem.iter().all(|&r| r == 0).then_some(chosen)
}

/// Every achievable weight vector with one witness matching (edge indices),
/// by exhaustive search. Odd vertex counts give an empty map.
pub fn brute_force_matchings(g: &WeightedGraph) -> Result<BTreeMap<Vec<usize>, Vec<usize>>> {
    if g.n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyVertices { n: g.n, limit: BRUTE_FORCE_LIMIT });
    }
    let mut out = BTreeMap::new();
    if g.n % 2 == 1 {
        return Ok(out);
    }
    let adj = g.adjacency();
    let mut used = vec![false; g.n];
    let mut stack = Vec::new();
    fn walk(
        g: &WeightedGraph,
        adj: &[Vec<(usize, usize)>],
        used: &mut [bool],
        stack: &mut Vec<usize>,
        out: &mut BTreeMap<Vec<usize>, Vec<usize>>,
    ) {
        let Some(u) = (0..g.n).find(|&v| !used[v]) else {
            let mut witness = stack.clone();
            witness.sort_unstable();
            out.entry(g.matching_weight(&witness)).or_insert(witness);
            return;
        };
        used[u] = true;
        for &(v, e) in &adj[u] {
            if !used[v] {
                used[v] = true;
                stack.push(e);
                walk(g, adj, used, stack, out);
                stack.pop();
                used[v] = false;
            }
        }
        used[u] = false;
    }
    walk(g, &adj, &mut used, &mut stack, &mut out);
    Ok(out)
}

/// Per-color bounds valid for every matching of `g`: the smaller of half the
/// sum of each vertex's heaviest incident weight and the sum of the
/// `|V|/2` heaviest edge weights.
pub fn matching_weight_bounds(g: &WeightedGraph) -> Vec<usize> {
    live_weight_bounds(g, &vec![true; g.n])
}

/// [`matching_weight_bounds`] for the subgraph induced by `alive`.
fn live_weight_bounds(g: &WeightedGraph, alive: &[bool]) -> Vec<usize> {
    let live = alive.iter().filter(|&&a| a).count();
    (0..g.colors)
        .map(|i| {
            let mut heaviest = vec![0usize; g.n];
            let mut weights: Vec<usize> = Vec::with_capacity(g.edges.len());
            for e in g.edges.iter().filter(|e| alive[e.u] && alive[e.v]) {
                let w = e.weight[i];
                heaviest[e.u] = heaviest[e.u].max(w);
                heaviest[e.v] = heaviest[e.v].max(w);
                weights.push(w);
            }
            weights.sort_unstable_by(|a, b| b.cmp(a));
            let top: usize = weights.iter().take(live / 2).sum();
            (heaviest.iter().sum::<usize>() / 2).min(top)
        })
        .collect()
}
