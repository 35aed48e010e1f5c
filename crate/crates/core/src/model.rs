//! Instances, solutions and coverage verification.

use std::collections::BTreeSet;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number::{format_rational, parse_rational, rational_text, Length, NumberText, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }

    pub fn dist_sq(&self, other: &Point) -> Rational {
        let dx = &self.x - &other.x;
        let dy = &self.y - &other.y;
        &dx * &dx + &dy * &dy
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64().unwrap_or(f64::NAN), self.y.to_f64().unwrap_or(f64::NAN))
    }
}

#[derive(Clone, Debug)]
pub enum Metric {
    /// Points in the plane with exact rational coordinates.
    EuclideanPlane(Vec<Point>),
    /// Symmetric matrix of rational distances.
    Explicit(Vec<Vec<Rational>>),
}

/// A colorful k-center instance. Immutable once built; every constructor
/// validates the invariants and caches exact squared distances.
#[derive(Clone, Debug)]
pub struct Instance {
    k: usize,
    requirements: Vec<usize>,
    colors: Vec<usize>,
    metric: Metric,
    dist_sq: Vec<Rational>,
}

impl Instance {
    pub fn planar(points: Vec<(Point, usize)>, k: usize, requirements: Vec<usize>) -> Result<Self> {
        let (coords, colors): (Vec<_>, Vec<_>) = points.into_iter().unzip();
        Self::build(Metric::EuclideanPlane(coords), colors, k, requirements, true)
    }

    pub fn explicit(
        dist: Vec<Vec<Rational>>,
        colors: Vec<usize>,
        k: usize,
        requirements: Vec<usize>,
    ) -> Result<Self> {
        Self::build(Metric::Explicit(dist), colors, k, requirements, true)
    }

    /// Like the public constructors, but color classes with a zero
    /// requirement may be empty. Used for residual instances.
    pub(crate) fn relaxed(metric: Metric, colors: Vec<usize>, k: usize, requirements: Vec<usize>) -> Result<Self> {
        Self::build(metric, colors, k, requirements, false)
    }

    fn build(
        metric: Metric,
        colors: Vec<usize>,
        k: usize,
        requirements: Vec<usize>,
        strict: bool,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidInstance(msg));
        let n = colors.len();
        let c = requirements.len();
        if c == 0 {
            return invalid("at least one color class is required".into());
        }
        if n == 0 {
            return invalid("instance has no points".into());
        }
        if k == 0 || k > n {
            return invalid(format!("k = {k} must satisfy 1 <= k <= n = {n}"));
        }
        if let Some(bad) = colors.iter().find(|&&col| col >= c) {
            return invalid(format!("color {bad} out of range for {c} classes"));
        }
        let mut sizes = vec![0usize; c];
        for &col in &colors {
            sizes[col] += 1;
        }
        for (i, (&size, &t)) in sizes.iter().zip(&requirements).enumerate() {
            if strict && size == 0 {
                return invalid(format!("color class {i} is empty"));
            }
            if t > size {
                return invalid(format!("requirement t_{i} = {t} exceeds class size {size}"));
            }
        }
        let dist_sq = match &metric {
            Metric::EuclideanPlane(points) => {
                if points.len() != n {
                    return invalid("coordinate and color counts differ".into());
                }
                let mut d = Vec::with_capacity(n * n);
                for p in points {
                    for q in points {
                        d.push(p.dist_sq(q));
                    }
                }
                d
            }
            Metric::Explicit(m) => {
                validate_matrix(m, n)?;
                m.iter().flatten().map(|x| x * x).collect()
            }
        };
        Ok(Instance { k, requirements, colors, metric, dist_sq })
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_colors(&self) -> usize {
        self.requirements.len()
    }

    pub fn requirements(&self) -> &[usize] {
        &self.requirements
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn color(&self, i: usize) -> usize {
        self.colors[i]
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn is_planar(&self) -> bool {
        matches!(self.metric, Metric::EuclideanPlane(_))
    }

    pub fn points(&self) -> Option<&[Point]> {
        match &self.metric {
            Metric::EuclideanPlane(p) => Some(p),
            Metric::Explicit(_) => None,
        }
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_colors()];
        for &c in &self.colors {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn dist_sq(&self, i: usize, j: usize) -> &Rational {
        &self.dist_sq[i * self.n() + j]
    }

    pub fn dist(&self, i: usize, j: usize) -> Length {
        Length::from_sq(self.dist_sq(i, j).clone())
    }

    /// Closed-ball membership: `d(i, j) <= radius`.
    pub fn within(&self, i: usize, j: usize, radius: &Length) -> bool {
        self.dist_sq(i, j) <= radius.sq()
    }

    /// Points of the closed ball `B(center, radius)`, ascending by id.
    pub fn ball(&self, center: usize, radius: &Length) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.within(center, j, radius)).collect()
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        let mut copy = self.clone();
        if k == 0 || k > self.n() {
            return Err(Error::InvalidInstance(format!("k = {k} must satisfy 1 <= k <= n = {}", self.n())));
        }
        copy.k = k;
        Ok(copy)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        read_instance(text)
    }

    pub fn to_json(&self) -> InstanceJson {
        match &self.metric {
            Metric::EuclideanPlane(points) => InstanceJson::Planar {
                k: self.k,
                requirements: self.requirements.clone(),
                points: points
                    .iter()
                    .zip(&self.colors)
                    .map(|(p, &color)| PointJson { x: p.x.clone(), y: p.y.clone(), color })
                    .collect(),
            },
            Metric::Explicit(m) => InstanceJson::Explicit {
                k: self.k,
                requirements: self.requirements.clone(),
                n: self.n(),
                colors: self.colors.clone(),
                dist: m.iter().map(|row| row.iter().map(format_rational).collect()).collect(),
            },
        }
    }
}

fn validate_matrix(m: &[Vec<Rational>], n: usize) -> Result<()> {
    let invalid = |msg: String| Err(Error::InvalidInstance(msg));
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        return invalid(format!("distance matrix must be {n}x{n}"));
    }
    for i in 0..n {
        if !m[i][i].is_zero() {
            return invalid(format!("non-zero diagonal entry at {i}"));
        }
        for j in 0..n {
            if m[i][j].is_negative() {
                return invalid(format!("negative distance at ({i}, {j})"));
            }
            if m[i][j] != m[j][i] {
                return invalid(format!("asymmetric entry at ({i}, {j})"));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                if m[i][l] > &m[i][j] + &m[j][l] {
                    return invalid(format!("triangle inequality fails for ({i}, {j}, {l})"));
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointJson {
    #[serde(with = "rational_text")]
    pub x: Rational,
    #[serde(with = "rational_text")]
    pub y: Rational,
    pub color: usize,
}

/// On-disk instance schema: planar points, or an explicit distance matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceJson {
    Planar {
        k: usize,
        requirements: Vec<usize>,
        points: Vec<PointJson>,
    },
    Explicit {
        k: usize,
        requirements: Vec<usize>,
        n: usize,
        colors: Vec<usize>,
        dist: Vec<Vec<String>>,
    },
}

// Deserializing `dist` entries that are JSON numbers goes through `NumberText`.
#[derive(Deserialize)]
struct ExplicitRaw {
    k: usize,
    requirements: Vec<usize>,
    n: usize,
    colors: Vec<usize>,
    dist: Vec<Vec<NumberText>>,
}

impl InstanceJson {
    pub fn into_instance(self) -> Result<Instance> {
        match self {
            InstanceJson::Planar { k, requirements, points } => Instance::planar(
                points.into_iter().map(|p| (Point::new(p.x, p.y), p.color)).collect(),
                k,
                requirements,
            ),
            InstanceJson::Explicit { k, requirements, n, colors, dist } => {
                if colors.len() != n {
                    return Err(Error::InvalidInstance(format!("n = {n} but {} colors given", colors.len())));
                }
                let dist = dist
                    .iter()
                    .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Instance::explicit(dist, colors, k, requirements)
            }
        }
    }
}

impl<'de> Deserialize<'de> for InstanceJsonInput {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        if value.get("points").is_some() {
            let planar: InstanceJson = serde_json::from_value(value).map_err(serde::de::Error::custom)?;
            Ok(InstanceJsonInput(planar))
        } else {
            let raw: ExplicitRaw = serde_json::from_value(value).map_err(serde::de::Error::custom)?;
            Ok(InstanceJsonInput(InstanceJson::Explicit {
                k: raw.k,
                requirements: raw.requirements,
                n: raw.n,
                colors: raw.colors,
                dist: raw.dist.into_iter().map(|row| row.into_iter().map(|t| t.0).collect()).collect(),
            }))
        }
    }
}

struct InstanceJsonInput(InstanceJson);

/// Reads an instance from JSON text, accepting numbers or decimal strings.
pub fn read_instance(text: &str) -> Result<Instance> {
    let input: InstanceJsonInput = serde_json::from_str(text)?;
    input.0.into_instance()
}

/// Ascending, deduplicated pairwise distances with 0 first.
pub fn candidate_radii(inst: &Instance) -> Vec<Length> {
    let n = inst.n();
    let mut set: BTreeSet<&Rational> = BTreeSet::new();
    let zero = Rational::zero();
    set.insert(&zero);
    for i in 0..n {
        for j in i + 1..n {
            set.insert(inst.dist_sq(i, j));
        }
    }
    set.into_iter().map(|sq| Length::from_sq(sq.clone())).collect()
}

/// Per-color counts of points within `radius` of some center.
pub fn coverage(inst: &Instance, centers: &[usize], radius: &Length) -> Result<Vec<usize>> {
    if let Some(&bad) = centers.iter().find(|&&c| c >= inst.n()) {
        return Err(Error::UnknownCenter(bad));
    }
    let mut covered = vec![0; inst.num_colors()];
    for j in 0..inst.n() {
        if centers.iter().any(|&c| inst.within(c, j, radius)) {
            covered[inst.color(j)] += 1;
        }
    }
    Ok(covered)
}

/// Chosen centers with a common radius. Coverage counts are always
/// recomputed from the instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Solution {
    pub centers: Vec<usize>,
    pub radius: Length,
    pub covered: Vec<usize>,
}

impl Solution {
    pub fn new(inst: &Instance, mut centers: Vec<usize>, radius: Length) -> Result<Self> {
        centers.sort_unstable();
        centers.dedup();
        let covered = coverage(inst, &centers, &radius)?;
        Ok(Solution { centers, radius, covered })
    }

    pub fn empty(inst: &Instance) -> Self {
        Solution { centers: Vec::new(), radius: Length::zero(), covered: vec![0; inst.num_colors()] }
    }

    pub fn to_json(&self, inst: &Instance) -> Result<SolutionJson> {
        let report = verify(inst, self)?;
        Ok(SolutionJson {
            centers: self.centers.clone(),
            radius: self.radius.clone(),
            covered: Some(report.covered),
            feasible: Some(report.feasible),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionJson {
    pub centers: Vec<usize>,
    pub radius: Length,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covered: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible: Option<bool>,
}

impl SolutionJson {
    /// Rebuilds a solution, ignoring any coverage claims in the input.
    pub fn into_solution(self, inst: &Instance) -> Result<Solution> {
        Solution::new(inst, self.centers, self.radius)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub covered: Vec<usize>,
    pub feasible: bool,
    pub num_centers: usize,
    pub radius: Length,
}

pub fn verify(inst: &Instance, sol: &Solution) -> Result<CoverageReport> {
    let distinct: BTreeSet<usize> = sol.centers.iter().copied().collect();
    let centers: Vec<usize> = distinct.into_iter().collect();
    let covered = coverage(inst, &centers, &sol.radius)?;
    let meets = covered.iter().zip(inst.requirements()).all(|(c, t)| c >= t);
    Ok(CoverageReport {
        feasible: meets && centers.len() <= inst.k(),
        num_centers: centers.len(),
        covered,
        radius: sol.radius.clone(),
    })
}
