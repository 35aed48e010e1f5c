use colorful_kcenter::driver::{approximation_factor, solve, RunStatus, SolverConfig};
use colorful_kcenter::generate::{gen_example_2_5, gen_random_metric, gen_random_planar};
use colorful_kcenter::model::{candidate_radii, coverage, read_instance, verify, Instance, Point, Solution};
use colorful_kcenter::number::{rat, ratio, Length};
use colorful_kcenter::oracle::brute_force_optimum;
use proptest::prelude::*;

fn line(xs: &[i64]) -> Instance {
    let pts = xs.iter().map(|&x| (Point::new(rat(x), rat(0)), 0)).collect();
    Instance::planar(pts, 1, vec![1]).unwrap()
}

#[test]
fn candidate_radii_of_small_lines() {
    let radii: Vec<String> = candidate_radii(&line(&[0, 1, 3])).iter().map(|r| r.to_string()).collect();
    assert_eq!(radii, ["0", "1", "2", "3"]);
    assert_eq!(candidate_radii(&line(&[4, 4, 4])), vec![Length::zero()]);
}

#[test]
fn zero_radius_covers_only_coincident_points() {
    let inst = line(&[2, 2, 5, 2]);
    assert_eq!(coverage(&inst, &[0], &Length::zero()).unwrap(), vec![3]);
    assert_eq!(coverage(&inst, &[2], &Length::zero()).unwrap(), vec![1]);
}

#[test]
fn example_both_cluster_centers_feasible_for_two_centers() {
    let inst = gen_example_2_5(&rat(1)).unwrap().with_k(2).unwrap();
    let rho = Length::from_sq(ratio(1, 2));
    let sol = Solution::new(&inst, vec![0, 4], rho.scale(&rat(2))).unwrap();
    let report = verify(&inst, &sol).unwrap();
    assert!(report.feasible);
    assert!(report.covered.iter().all(|&c| c >= 2));
}

#[test]
fn unknown_center_is_an_error() {
    let inst = line(&[0, 1]);
    assert!(verify(&inst, &Solution { centers: vec![5], radius: Length::zero(), covered: vec![0] }).is_err());
}

#[test]
fn driver_within_factor_on_metric_and_planar_instances() {
    let cfg = SolverConfig { early_stop: true, ..SolverConfig::default() };
    let f = approximation_factor(&cfg.alpha);
    for seed in 0..12 {
        for inst in [gen_random_planar(9, 3, 2, seed).unwrap(), gen_random_metric(9, 3, 2, seed).unwrap()] {
            let opt = brute_force_optimum(&inst).unwrap();
            let report = solve(&inst, &cfg).unwrap();
            assert_eq!(report.status, RunStatus::Feasible);
            let best = report.best.unwrap();
            assert!(verify(&inst, &best).unwrap().feasible);
            assert!(best.radius <= opt.radius.scale(&f));
        }
    }
}

fn naive_count(inst: &Instance, centers: &[usize], radius: &Length) -> Vec<usize> {
    let mut out = vec![0; inst.num_colors()];
    for j in 0..inst.n() {
        let mut hit = false;
        for &c in centers {
            if inst.dist(c, j) <= *radius {
                hit = true;
            }
        }
        if hit {
            out[inst.color(j)] += 1;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coverage_matches_naive_recount(seed in 0u64..10_000, n in 2usize..10, pick in 0usize..64, r in 0i64..40) {
        let inst = gen_random_planar(n, 1, 2, seed).unwrap();
        let centers: Vec<usize> = (0..n).filter(|i| (pick >> (i % 6)) & 1 == 1).collect();
        let radius = Length::from_rational(&ratio(r, 4));
        prop_assert_eq!(coverage(&inst, &centers, &radius).unwrap(), naive_count(&inst, &centers, &radius));
    }

    #[test]
    fn instance_json_round_trips(seed in 0u64..10_000, n in 2usize..10, metric in any::<bool>()) {
        let inst = if metric { gen_random_metric(n, 1, 2, seed) } else { gen_random_planar(n, 1, 2, seed) }.unwrap();
        let text = serde_json::to_string(&inst.to_json()).unwrap();
        let back = read_instance(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back.to_json()).unwrap(), text);
    }

    #[test]
    fn optimum_is_a_candidate_radius(seed in 0u64..10_000, n in 2usize..9, k in 1usize..3) {
        let inst = gen_random_planar(n, k.min(n), 2, seed).unwrap();
        let opt = brute_force_optimum(&inst).unwrap();
        prop_assert!(candidate_radii(&inst).contains(&opt.radius));
    }
}
