//! Instance generators: the two-cluster fractional-gap example, planted
//! α-separated planar instances, and plain random instances.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Instance, Point};
use crate::number::{rat, ratio, Length, Rational};

/// Two clusters far apart: three red and one blue point in the first,
/// three blue and one red in the second. Red is color 0, blue color 1;
/// `k = 1` and both requirements are 2.
///
/// Each cluster has diameter at most `scale`, and the clusters are at
/// least `100 * scale` apart.
pub fn gen_example_2_5(scale: &Rational) -> Result<Instance> {
    if !scale.is_positive() {
        return Err(Error::InvalidArgument("scale must be positive".into()));
    }
    let half = scale / rat(2);
    let offset = scale * rat(101);
    let at = |x: &Rational, y: &Rational| Point::new(x.clone(), y.clone());
    let zero = Rational::zero();
    let far_half = &offset + &half;
    let points = vec![
        (at(&zero, &zero), 0),
        (at(&half, &zero), 0),
        (at(&zero, &half), 0),
        (at(&half, &half), 1),
        (at(&offset, &zero), 1),
        (at(&far_half, &zero), 1),
        (at(&offset, &half), 1),
        (at(&far_half, &half), 0),
    ];
    Instance::planar(points, 1, vec![2, 2])
}

/// Distance between the two clusters of [`gen_example_2_5`] (closest pair).
pub fn example_2_5_gap(scale: &Rational) -> Rational {
    scale * ratio(201, 2)
}

#[derive(Clone, Debug)]
pub struct SeparatedParams {
    pub n: usize,
    pub k: usize,
    pub colors: usize,
    pub alpha: Rational,
    pub rho: Rational,
    /// Points placed away from every planted disk.
    pub outliers: usize,
    pub seed: u64,
}

/// The planted cover behind a generated instance.
#[derive(Clone, Debug)]
pub struct Planted {
    pub centers: Vec<usize>,
    pub rho: Length,
}

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;
// Offsets inside a disk are multiples of rho / GRID.
const GRID: i64 = 64;

/// Plants `k` disks of radius `rho` centered at input points whose pairwise
/// center distance exceeds `alpha * rho`, fills them with colored points,
/// and adds far outliers. Requirements equal the planted coverage, so the
/// planted centers form a feasible α-separated cover at radius `rho`.
pub fn gen_separated(params: &SeparatedParams) -> Result<(Instance, Planted)> {
    let SeparatedParams { n, k, colors, ref alpha, ref rho, outliers, seed } = *params;
    if k == 0 || !alpha.is_positive() || !rho.is_positive() {
        return Err(Error::InvalidArgument("need k >= 1, alpha > 0, rho > 0".into()));
    }
    if colors == 0 || n < k + outliers || n < colors {
        return Err(Error::InvalidArgument(format!(
            "n = {n} too small for k = {k}, {outliers} outliers and {colors} colors"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sep_sq = alpha * alpha * rho * rho;
    // Box side in units of rho/GRID; generous enough that rejection sampling
    // rarely fails.
    let side_units = {
        let per_center = (alpha + rat(2)) * rat(3 * GRID);
        let side = per_center * rat((k as f64).sqrt().ceil() as i64);
        side.ceil().to_integer().try_into().unwrap_or(i64::MAX / 4)
    };
    let unit = rho / rat(GRID);
    let mut centers: Vec<Point> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut placed = false;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let p = Point::new(
                &unit * rat(rng.random_range(0..=side_units)),
                &unit * rat(rng.random_range(0..=side_units)),
            );
            if centers.iter().all(|c| c.dist_sq(&p) > sep_sq) {
                centers.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::GeneratorRetries { k, attempts: MAX_PLACEMENT_ATTEMPTS });
        }
    }

    let mut points: Vec<Point> = centers.clone();
    for _ in 0..n - k - outliers {
        let c = &centers[rng.random_range(0..k)];
        let (a, b) = loop {
            let a = rng.random_range(-GRID..=GRID);
            let b = rng.random_range(-GRID..=GRID);
            if a * a + b * b <= GRID * GRID {
                break (a, b);
            }
        };
        points.push(Point::new(&c.x + &unit * rat(a), &c.y + &unit * rat(b)));
    }
    let far_sq = rho * rho * rat(4);
    let spread = side_units + 4 * GRID;
    for _ in 0..outliers {
        let mut placed = false;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let p = Point::new(
                &unit * rat(rng.random_range(-4 * GRID..=spread)),
                &unit * rat(rng.random_range(-4 * GRID..=spread)),
            );
            if centers.iter().all(|c| c.dist_sq(&p) > far_sq) {
                points.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::GeneratorRetries { k, attempts: MAX_PLACEMENT_ATTEMPTS });
        }
    }

    let labels = random_colors(&mut rng, n, colors);
    let mut requirements = vec![0; colors];
    for &color in &labels[..n - outliers] {
        requirements[color] += 1;
    }
    let inst = Instance::planar(points.into_iter().zip(labels).collect(), k, requirements)?;
    Ok((inst, Planted { centers: (0..k).collect(), rho: Length::from_rational(rho) }))
}

/// Uniform random colors with every class non-empty.
fn random_colors(rng: &mut ChaCha8Rng, n: usize, colors: usize) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..colors)).collect();
    for color in 0..colors {
        if !labels.contains(&color) {
            // Take a point from some class with at least two members.
            let donor = (0..n)
                .find(|&i| labels.iter().filter(|&&l| l == labels[i]).count() > 1)
                .expect("n >= colors");
            labels[donor] = color;
        }
    }
    labels
}

fn random_requirements(rng: &mut ChaCha8Rng, labels: &[usize], colors: usize) -> Vec<usize> {
    let mut sizes = vec![0usize; colors];
    for &l in labels {
        sizes[l] += 1;
    }
    sizes.iter().map(|&s| rng.random_range(1..=s)).collect()
}

/// Random planar instance: coordinates with two decimals in `[0, 10]`,
/// random colors, and requirements drawn from `1..=|P_i|`.
pub fn gen_random_planar(n: usize, k: usize, colors: usize, seed: u64) -> Result<Instance> {
    if colors == 0 || n < colors || k == 0 || k > n {
        return Err(Error::InvalidArgument("need 1 <= k <= n and colors <= n".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Point> = (0..n)
        .map(|_| Point::new(ratio(rng.random_range(0..=1000), 100), ratio(rng.random_range(0..=1000), 100)))
        .collect();
    let labels = random_colors(&mut rng, n, colors);
    let requirements = random_requirements(&mut rng, &labels, colors);
    Instance::planar(points.into_iter().zip(labels).collect(), k, requirements)
}

/// Random shortest-path metric of a complete graph with integer edge
/// lengths in `1..=20`, with random colors and requirements.
pub fn gen_random_metric(n: usize, k: usize, colors: usize, seed: u64) -> Result<Instance> {
    if colors == 0 || n < colors || k == 0 || k > n {
        return Err(Error::InvalidArgument("need 1 <= k <= n and colors <= n".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.random_range(1..=20);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][m] + d[m][j]);
            }
        }
    }
    let dist = d.iter().map(|row| row.iter().map(|&v| rat(v)).collect()).collect();
    let labels = random_colors(&mut rng, n, colors);
    let requirements = random_requirements(&mut rng, &labels, colors);
    Instance::explicit(dist, labels, k, requirements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{verify, Solution};

    #[test]
    fn example_2_5_shape() {
        let inst = gen_example_2_5(&rat(1)).unwrap();
        assert_eq!(inst.n(), 8);
        assert_eq!(inst.k(), 1);
        assert_eq!(inst.requirements(), &[2, 2]);
        assert_eq!(inst.class_sizes(), vec![4, 4]);
        let scale_sq = rat(1);
        let gap = example_2_5_gap(&rat(1));
        for i in 0..8 {
            for j in 0..8 {
                let same = (i < 4) == (j < 4);
                if same {
                    assert!(inst.dist_sq(i, j) <= &scale_sq);
                } else {
                    assert!(inst.dist_sq(i, j) >= &(&gap * &gap));
                    assert!(inst.dist_sq(i, j) >= &rat(100 * 100));
                }
            }
        }
        assert!(gen_example_2_5(&rat(0)).is_err());
    }

    #[test]
    fn separated_planting() {
        let params = SeparatedParams {
            n: 20,
            k: 3,
            colors: 2,
            alpha: rat(9),
            rho: rat(1),
            outliers: 2,
            seed: 11,
        };
        let (inst, planted) = gen_separated(&params).unwrap();
        assert_eq!(inst.n(), 20);
        for (a, &i) in planted.centers.iter().enumerate() {
            for &j in &planted.centers[a + 1..] {
                assert!(inst.dist_sq(i, j) > &rat(81));
            }
        }
        let sol = Solution::new(&inst, planted.centers.clone(), planted.rho.clone()).unwrap();
        assert!(verify(&inst, &sol).unwrap().feasible);
    }

    #[test]
    fn separated_rejects_bad_params() {
        let mut params = SeparatedParams {
            n: 3,
            k: 3,
            colors: 2,
            alpha: rat(9),
            rho: rat(1),
            outliers: 1,
            seed: 0,
        };
        assert!(gen_separated(&params).is_err());
        params.outliers = 0;
        params.k = 0;
        assert!(gen_separated(&params).is_err());
    }

    #[test]
    fn random_generators_are_valid_and_seeded() {
        for seed in 0..20 {
            let a = gen_random_planar(9, 3, 3, seed).unwrap();
            let b = gen_random_planar(9, 3, 3, seed).unwrap();
            assert_eq!(serde_json::to_string(&a.to_json()).unwrap(), serde_json::to_string(&b.to_json()).unwrap());
            assert!(a.class_sizes().iter().all(|&s| s > 0));
            let m = gen_random_metric(8, 2, 2, seed).unwrap();
            assert!(!m.is_planar());
        }
    }
}
