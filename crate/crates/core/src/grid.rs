//! Equilateral triangular grid, the Voronoi rhombus of each grid edge, and
//! membership in its ρ-neighborhood.
//!
//! Lattice vertex `(i, j)` sits at `ℓ·(i + j/2, (√3/2)·j)`. Coordinates live in
//! `Q(√3)`, so every predicate here is exact.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Point;
use crate::number::{rat, sqrt_lower, Length, Rational};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// `a + b·√3` with rational `a`, `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q3 {
    pub a: Rational,
    pub b: Rational,
}

impl Q3 {
    pub fn new(a: Rational, b: Rational) -> Self {
        Q3 { a, b }
    }

    pub fn rational(a: Rational) -> Self {
        Q3 { a, b: Rational::zero() }
    }

    pub fn zero() -> Self {
        Q3::rational(Rational::zero())
    }

    pub fn add(&self, o: &Q3) -> Q3 {
        Q3 { a: &self.a + &o.a, b: &self.b + &o.b }
    }

    pub fn sub(&self, o: &Q3) -> Q3 {
        Q3 { a: &self.a - &o.a, b: &self.b - &o.b }
    }

    pub fn mul(&self, o: &Q3) -> Q3 {
        Q3 {
            a: &self.a * &o.a + rat(3) * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }

    pub fn scale(&self, f: &Rational) -> Q3 {
        Q3 { a: &self.a * f, b: &self.b * f }
    }

    /// Panics on zero.
    pub fn inv(&self) -> Q3 {
        let norm = &self.a * &self.a - rat(3) * &self.b * &self.b;
        assert!(!norm.is_zero(), "inverse of zero in Q(sqrt 3)");
        Q3 { a: &self.a / &norm, b: -&self.b / &norm }
    }

    pub fn div(&self, o: &Q3) -> Q3 {
        self.mul(&o.inv())
    }

    pub fn signum(&self) -> Ordering {
        let (sa, sb) = (self.a.cmp(&Rational::zero()), self.b.cmp(&Rational::zero()));
        match (sa, sb) {
            (Ordering::Equal, Ordering::Equal) => Ordering::Equal,
            (Ordering::Less, Ordering::Greater) => (rat(3) * &self.b * &self.b).cmp(&(&self.a * &self.a)),
            (Ordering::Greater, Ordering::Less) => (&self.a * &self.a).cmp(&(rat(3) * &self.b * &self.b)),
            (Ordering::Less, _) | (_, Ordering::Less) => Ordering::Less,
            _ => Ordering::Greater,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * SQRT3
    }
}

impl PartialOrd for Q3 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Q3 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).signum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoint {
    pub x: Q3,
    pub y: Q3,
}

impl QPoint {
    pub fn from_point(p: &Point) -> Self {
        QPoint { x: Q3::rational(p.x.clone()), y: Q3::rational(p.y.clone()) }
    }

    fn sub(&self, o: &QPoint) -> QPoint {
        QPoint { x: self.x.sub(&o.x), y: self.y.sub(&o.y) }
    }

    fn dot(&self, o: &QPoint) -> Q3 {
        self.x.mul(&o.x).add(&self.y.mul(&o.y))
    }

    fn cross(&self, o: &QPoint) -> Q3 {
        self.x.mul(&o.y).sub(&self.y.mul(&o.x))
    }

    pub fn dist_sq(&self, o: &QPoint) -> Q3 {
        let d = self.sub(o);
        d.dot(&d)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    ell: Rational,
    ell_f64: f64,
}

impl GridSpec {
    pub fn new(ell: Rational) -> Result<Self> {
        if !ell.is_positive() {
            return Err(Error::InvalidArgument("grid side must be positive".into()));
        }
        let ell_f64 = ell.to_f64().unwrap_or(f64::NAN);
        Ok(GridSpec { ell, ell_f64 })
    }

    /// Side `0.5·α·ρ` when that is rational; otherwise the rational `ℓ` just
    /// below it with `4ρ < ℓ`, which keeps non-adjacent extended regions
    /// disjoint. Needs `α > 8` and `ρ > 0`.
    pub fn for_radius(alpha: &Rational, rho: &Length) -> Result<Self> {
        if alpha <= &rat(8) || rho.is_zero() {
            return Err(Error::InvalidArgument("grid needs alpha > 8 and rho > 0".into()));
        }
        let half = alpha / rat(2);
        if let Some(r) = rho.as_rational() {
            return GridSpec::new(half * r);
        }
        let floor = rho.sq() * rat(16);
        let mut bits = 16;
        loop {
            let ell = &half * sqrt_lower(rho.sq(), bits);
            if &ell * &ell > floor {
                return GridSpec::new(ell);
            }
            bits *= 2;
        }
    }

    pub fn ell(&self) -> &Rational {
        &self.ell
    }

    pub fn ell_f64(&self) -> f64 {
        self.ell_f64
    }

    /// Position of the lattice point with (possibly fractional) lattice
    /// coordinates `(i, j)`.
    pub fn lattice_point(&self, i: &Rational, j: &Rational) -> QPoint {
        let half = Rational::new(1.into(), 2.into());
        QPoint {
            x: Q3::rational(&self.ell * (i + j * &half)),
            y: Q3::new(Rational::zero(), &self.ell * j * &half),
        }
    }

    pub fn vertex(&self, (i, j): (i64, i64)) -> QPoint {
        self.lattice_point(&rat(i), &rat(j))
    }

    fn vertex_f64(&self, (i, j): (f64, f64)) -> (f64, f64) {
        let ell = self.ell_f64;
        (ell * (i + j / 2.0), ell * SQRT3 / 2.0 * j)
    }
}

/// Lattice directions of the three edge orientations: 0°, 60° and 120°.
const DIRS: [(i64, i64); 3] = [(1, 0), (0, 1), (-1, 1)];

/// A grid edge from lattice vertex `(i, j)` along `DIRS[orientation]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridEdge {
    pub orientation: u8,
    pub i: i64,
    pub j: i64,
}

impl GridEdge {
    pub fn new(orientation: u8, i: i64, j: i64) -> Self {
        assert!(orientation < 3, "orientation must be 0, 1 or 2");
        GridEdge { orientation, i, j }
    }

    pub fn endpoints(&self) -> ((i64, i64), (i64, i64)) {
        let (di, dj) = DIRS[self.orientation as usize];
        ((self.i, self.j), (self.i + di, self.j + dj))
    }

    /// The six edges meeting at a lattice vertex.
    pub fn incident((i, j): (i64, i64)) -> [GridEdge; 6] {
        let mut out = [GridEdge::new(0, 0, 0); 6];
        for (o, &(di, dj)) in DIRS.iter().enumerate() {
            out[2 * o] = GridEdge::new(o as u8, i, j);
            out[2 * o + 1] = GridEdge::new(o as u8, i - di, j - dj);
        }
        out
    }
}

/// Every edge whose start vertex lies in the given lattice window.
pub fn edges_in_window(i_range: std::ops::Range<i64>, j_range: std::ops::Range<i64>) -> Vec<GridEdge> {
    let mut out = Vec::new();
    for i in i_range {
        for j in j_range.clone() {
            for o in 0..3 {
                out.push(GridEdge::new(o, i, j));
            }
        }
    }
    out
}

pub fn adjacent(e: &GridEdge, f: &GridEdge) -> bool {
    let (a, b) = e.endpoints();
    let (c, d) = f.endpoints();
    a == c || a == d || b == c || b == d
}

/// Counter-clockwise: start vertex, centroid of the triangle on the right,
/// end vertex, centroid of the triangle on the left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rhombus {
    pub vertices: [QPoint; 4],
}

impl Rhombus {
    pub fn area(&self) -> Q3 {
        let v = &self.vertices;
        let mut twice = Q3::zero();
        for k in 0..4 {
            twice = twice.add(&v[k].x.mul(&v[(k + 1) % 4].y).sub(&v[(k + 1) % 4].x.mul(&v[k].y)));
        }
        twice.scale(&Rational::new(1.into(), 2.into()))
    }

    pub fn to_f64(&self) -> [(f64, f64); 4] {
        [
            self.vertices[0].to_f64(),
            self.vertices[1].to_f64(),
            self.vertices[2].to_f64(),
            self.vertices[3].to_f64(),
        ]
    }
}

/// Lattice coordinates of the rhombus corners, in thirds.
fn rhombus_lattice(e: &GridEdge) -> [(i64, i64); 4] {
    let ((ai, aj), (bi, bj)) = e.endpoints();
    let (di, dj) = (bi - ai, bj - aj);
    // Third vertices of the two incident triangles: rotate d by ∓60°.
    let right = (ai + di + dj, aj - di);
    let left = (ai - dj, aj + di + dj);
    let centroid = |(ci, cj): (i64, i64)| (ai + bi + ci, aj + bj + cj);
    [(3 * ai, 3 * aj), centroid(right), (3 * bi, 3 * bj), centroid(left)]
}

pub fn rhombus_of(g: &GridSpec, e: &GridEdge) -> Rhombus {
    let third = |(i, j): (i64, i64)| g.lattice_point(&Rational::new(i.into(), 3.into()), &Rational::new(j.into(), 3.into()));
    let [a, b, c, d] = rhombus_lattice(e);
    Rhombus { vertices: [third(a), third(b), third(c), third(d)] }
}

fn rhombus_f64(g: &GridSpec, e: &GridEdge) -> [(f64, f64); 4] {
    rhombus_lattice(e).map(|(i, j)| g.vertex_f64((i as f64 / 3.0, j as f64 / 3.0)))
}

/// Squared distance from `p` to the closed segment `[a, b]`.
pub fn segment_dist_sq(p: &QPoint, a: &QPoint, b: &QPoint) -> Q3 {
    let d = b.sub(a);
    let w = p.sub(a);
    let dot = w.dot(&d);
    if dot.signum() != Ordering::Greater {
        return w.dot(&w);
    }
    let len = d.dot(&d);
    if dot >= len {
        return p.dist_sq(b);
    }
    w.dot(&w).sub(&dot.mul(&dot).div(&len))
}

fn inside_convex(p: &QPoint, poly: &[QPoint]) -> bool {
    let mut pos = false;
    let mut neg = false;
    for k in 0..poly.len() {
        let a = &poly[k];
        let b = &poly[(k + 1) % poly.len()];
        match b.sub(a).cross(&p.sub(a)).signum() {
            Ordering::Greater => pos = true,
            Ordering::Less => neg = true,
            Ordering::Equal => {}
        }
    }
    !(pos && neg)
}

/// Squared distance from a point to a convex polygon (zero inside).
pub fn point_polygon_dist_sq(p: &QPoint, poly: &[QPoint]) -> Q3 {
    if inside_convex(p, poly) {
        return Q3::zero();
    }
    (0..poly.len())
        .map(|k| segment_dist_sq(p, &poly[k], &poly[(k + 1) % poly.len()]))
        .min()
        .expect("non-empty polygon")
}

fn segments_cross(a: &QPoint, b: &QPoint, c: &QPoint, d: &QPoint) -> bool {
    let o = |p: &QPoint, q: &QPoint, r: &QPoint| q.sub(p).cross(&r.sub(p)).signum();
    let (o1, o2) = (o(a, b, c), o(a, b, d));
    let (o3, o4) = (o(c, d, a), o(c, d, b));
    o1 != Ordering::Equal && o1 == o2.reverse() && o3 != Ordering::Equal && o3 == o4.reverse()
}

/// Exact squared distance between two convex polygons.
pub fn polygon_dist_sq(p: &[QPoint], q: &[QPoint]) -> Q3 {
    if p.iter().any(|v| inside_convex(v, q)) || q.iter().any(|v| inside_convex(v, p)) {
        return Q3::zero();
    }
    let mut best: Option<Q3> = None;
    for k in 0..p.len() {
        let (a, b) = (&p[k], &p[(k + 1) % p.len()]);
        for m in 0..q.len() {
            let (c, d) = (&q[m], &q[(m + 1) % q.len()]);
            if segments_cross(a, b, c, d) {
                return Q3::zero();
            }
            for cand in [
                segment_dist_sq(a, c, d),
                segment_dist_sq(b, c, d),
                segment_dist_sq(c, a, b),
                segment_dist_sq(d, a, b),
            ] {
                if best.as_ref().is_none_or(|cur| cand < *cur) {
                    best = Some(cand);
                }
            }
        }
    }
    best.expect("non-empty polygons")
}

fn seg_dist_f64(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let (wx, wy) = (p.0 - a.0, p.1 - a.1);
    let len = dx * dx + dy * dy;
    let t = ((wx * dx + wy * dy) / len).clamp(0.0, 1.0);
    ((wx - t * dx).powi(2) + (wy - t * dy).powi(2)).sqrt()
}

enum Quick {
    Yes,
    No,
    Unsure,
}

fn quick_membership(g: &GridSpec, e: &GridEdge, p: (f64, f64), rho: f64) -> Quick {
    let poly = rhombus_f64(g, e);
    let ell = g.ell_f64;
    let eps = 1e-9 * (p.0.abs() + p.1.abs() + ell + rho);
    if !eps.is_finite() {
        return Quick::Unsure;
    }
    let mut inside = true;
    let mut dist = f64::INFINITY;
    for k in 0..4 {
        let (a, b) = (poly[k], poly[(k + 1) % 4]);
        let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        if cross < 0.0 {
            inside = false;
        }
        dist = dist.min(seg_dist_f64(p, a, b));
    }
    if inside && dist > eps {
        Quick::Yes
    } else if !inside && dist > rho + eps {
        Quick::No
    } else if !inside && dist + eps < rho {
        Quick::Yes
    } else {
        Quick::Unsure
    }
}

/// Whether `p` lies within distance `rho` of the closed rhombus of `e`.
pub fn in_extended_region(g: &GridSpec, e: &GridEdge, p: &Point, rho: &Length) -> bool {
    let (px, py) = p.to_f64();
    match quick_membership(g, e, (px, py), rho.to_f64()) {
        Quick::Yes => true,
        Quick::No => false,
        Quick::Unsure => in_extended_region_exact(g, e, p, rho),
    }
}

/// Exact membership test without the floating-point shortcut.
pub fn in_extended_region_exact(g: &GridSpec, e: &GridEdge, p: &Point, rho: &Length) -> bool {
    let r = rhombus_of(g, e);
    let d = point_polygon_dist_sq(&QPoint::from_point(p), &r.vertices);
    d <= Q3::rational(rho.sq().clone())
}

/// All edges whose extended region contains `p`, in sorted order.
pub fn edges_near(g: &GridSpec, p: &Point, rho: &Length) -> Vec<GridEdge> {
    let (px, py) = p.to_f64();
    let ell = g.ell_f64;
    // A qualifying edge has an endpoint within rho + ell/sqrt(3) of p.
    let reach = rho.to_f64() + ell / SQRT3;
    let v = 2.0 * py / (SQRT3 * ell);
    let rows = (reach / (SQRT3 * ell / 2.0)).ceil() as i64 + 1;
    let cols = (reach / ell).ceil() as i64 + 1;
    let mut candidates = BTreeSet::new();
    for j in (v.floor() as i64 - rows)..=(v.ceil() as i64 + rows) {
        let u = px / ell - j as f64 / 2.0;
        for i in (u.floor() as i64 - cols)..=(u.ceil() as i64 + cols) {
            candidates.extend(GridEdge::incident((i, j)));
        }
    }
    candidates.into_iter().filter(|e| in_extended_region(g, e, p, rho)).collect()
}

/// Whether the polygon distance between two rhombi is at least `gamma * ell`.
pub fn rhombi_at_least(g: &GridSpec, e: &GridEdge, f: &GridEdge, gamma: &Rational) -> bool {
    let d = polygon_dist_sq(&rhombus_of(g, e).vertices, &rhombus_of(g, f).vertices);
    let bound = gamma * gamma * &g.ell * &g.ell;
    d >= Q3::rational(bound)
}

/// `1/2`, the separation constant between non-adjacent rhombi in units of `ℓ`.
pub fn gamma() -> Rational {
    Rational::new(One::one(), 2.into())
}
