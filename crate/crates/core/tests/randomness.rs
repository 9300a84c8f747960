use proptest::prelude::*;
use sdefw_core::randomness::*;

// Unscrambled Sobol points from scipy.stats.qmc.Sobol (same Joe-Kuo table).
const SCIPY_COLUMNS: [usize; 8] = [0, 1, 2, 5, 9, 50, 300, 1023];
const SCIPY_POINTS: [(u64, [f64; 8]); 3] = [
    (7, [0.125, 0.625, 0.375, 0.375, 0.875, 0.875, 0.375, 0.625]),
    (
        100,
        [
            0.4140625, 0.2578125, 0.7734375, 0.7421875, 0.6953125, 0.8828125, 0.7890625, 0.9453125,
        ],
    ),
    (
        1999,
        [
            0.07861328125,
            0.61181640625,
            0.13427734375,
            0.73583984375,
            0.33642578125,
            0.96533203125,
            0.45654296875,
            0.39892578125,
        ],
    ),
];

#[test]
fn sobol_matches_reference_points() {
    let s = Sobol::new(DirectionTable::shipped(), 1024).unwrap();
    let mut x = vec![0.0; 1024];
    for (index, expect) in SCIPY_POINTS {
        s.point_at(index, &mut x).unwrap();
        for (col, e) in SCIPY_COLUMNS.iter().zip(expect) {
            assert_eq!(x[*col], e, "point {index} coordinate {col}");
        }
    }
}

#[test]
fn sobol_prefixes_are_stratified() {
    // the first 2^k points, with the origin, fill every dyadic cell of width
    // 2^-k once per coordinate
    let dim = 64;
    let s = Sobol::new(DirectionTable::shipped(), dim).unwrap();
    let mut x = vec![0.0; dim];
    for k in [1u32, 4, 7, 10] {
        let cells = 1usize << k;
        let mut counts = vec![vec![0u32; cells]; dim];
        for c in counts.iter_mut() {
            c[0] += 1;
        }
        for i in 1..cells as u64 {
            s.point_at(i, &mut x).unwrap();
            for (j, &v) in x.iter().enumerate() {
                counts[j][(v * cells as f64) as usize] += 1;
            }
        }
        for (j, c) in counts.iter().enumerate() {
            assert!(c.iter().all(|&n| n == 1), "k={k} coordinate {j}");
        }
    }
}

#[test]
fn sobol_integrates_products() {
    let points = 1u64 << 14;
    for dim in 1..=6 {
        let s = Sobol::new(DirectionTable::shipped(), dim).unwrap();
        let mut it = s.iter(0).unwrap();
        let mut x = vec![0.0; dim];
        let mut acc = 0.0;
        for _ in 1..points {
            it.next_point(&mut x).unwrap();
            acc += x.iter().product::<f64>();
        }
        let est = acc / points as f64;
        let exact = 0.5f64.powi(dim as i32);
        assert!((est - exact).abs() < 1e-4, "dim {dim}: {est} vs {exact}");
    }
}

/// Reference quantile by bisection on the normal distribution function;
/// the upper half goes through symmetry, where `1 - u` is exact.
fn bisect_quantile(u: f64) -> f64 {
    if u > 0.5 {
        return -bisect_quantile(1.0 - u);
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gaussian_cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn quantile_known_values() {
    assert_eq!(gaussian_inverse_cdf(0.5).unwrap(), 0.0);
    let z = gaussian_inverse_cdf(0.975).unwrap();
    assert!((z - 1.959963984540054).abs() < 1e-12, "{z}");
    assert!((z - bisect_quantile(0.975)).abs() < 1e-9);
    for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
        assert!(gaussian_inverse_cdf(bad).is_err());
    }
}

#[test]
fn quantile_matches_bisection_on_grid() {
    let mut grid: Vec<f64> = (1..1000).map(|k| k as f64 / 1000.0).collect();
    for e in 3..=12 {
        let t = 10f64.powi(-e);
        grid.push(t);
        grid.push(1.0 - t);
    }
    for u in grid {
        let z = gaussian_inverse_cdf(u).unwrap();
        assert!((z - bisect_quantile(u)).abs() < 1e-9, "u={u}");
        assert!((gaussian_cdf(z) - u).abs() < 1e-9, "u={u}");
    }
}

#[test]
fn gaussian_moments_over_many_paths() {
    let (n, d, horizon) = (2usize, 2usize, 1.0f64);
    let layout = RandomLayout::new(&[1, 2], n, d, Coupling::Independent).unwrap();
    let mut drawer = PathDrawer::new(&PointSource::Pseudo { seed: 2024 }, layout, horizon).unwrap();
    let paths = 1_000_000u64;
    // (level, row 1, column 0) and (level 1, row 2, last column)
    let probes = [(0usize, 1usize, 0usize), (1, 2, 3)];
    let mut sums = [[0.0f64; 2]; 2];
    let mut forward = 0u64;
    for p in 0..paths {
        let r = drawer.draw(p).unwrap();
        forward += r.lambda.iter().filter(|&&l| l).count() as u64;
        for (s, &(k, i, c)) in sums.iter_mut().zip(&probes) {
            let z = r.levels[k].get(i, c);
            s[0] += z;
            s[1] += z * z;
        }
    }
    let m = paths as f64;
    for (s, &(k, _, _)) in sums.iter().zip(&probes) {
        let var = horizon / (n as f64 * [1.0, 2.0][k]);
        let mean = s[0] / m;
        assert!(mean.abs() < 4.0 * (var / m).sqrt(), "mean {mean}");
        let v = s[1] / m - mean * mean;
        assert!((v / var - 1.0).abs() < 0.01, "variance {v} vs {var}");
    }
    let frac = forward as f64 / (m * n as f64);
    assert!((frac - 0.5).abs() < 4.0 * (0.25 / (m * n as f64)).sqrt());
}

#[test]
fn sobol_layout_overflow_is_reported() {
    let layout = RandomLayout::new(&[1, 2, 3, 4], 60, 2, Coupling::Independent).unwrap();
    assert_eq!(layout.dimension(), 1260);
    let err = PathDrawer::<f64>::new(&PointSource::Sobol { skip: 0 }, layout, 1.0).unwrap_err();
    assert_eq!(
        err,
        sdefw_core::error::Error::DimensionOverflow {
            required: 1260,
            supported: 1024
        }
    );
}

#[test]
fn draws_do_not_depend_on_order() {
    let layout = RandomLayout::new(&[1, 3], 3, 2, Coupling::Reuse).unwrap();
    for source in [
        PointSource::Pseudo { seed: 5 },
        PointSource::Sobol { skip: 3 },
    ] {
        let mut a = PathDrawer::<f64>::new(&source, layout.clone(), 2.0).unwrap();
        let mut b = PathDrawer::<f64>::new(&source, layout.clone(), 2.0).unwrap();
        let forward: Vec<_> = (0..50).map(|p| a.draw(p).unwrap().clone()).collect();
        for p in (0..50).rev() {
            assert_eq!(b.draw(p).unwrap(), &forward[p as usize]);
        }
    }
}

proptest! {
    #[test]
    fn uniforms_stay_in_open_interval(seed in any::<u64>(), path in any::<u64>()) {
        let s = PointSource::Pseudo { seed }.sampler(16).unwrap();
        let mut x = [0.0; 16];
        s.fill(path, &mut x).unwrap();
        prop_assert!(x.iter().all(|&u| u > 0.0 && u < 1.0));
    }

    #[test]
    fn sobol_points_stay_in_open_interval(index in 1u64..MAX_POINTS) {
        let s = Sobol::new(DirectionTable::shipped(), 32).unwrap();
        let mut x = [0.0; 32];
        s.point_at(index, &mut x).unwrap();
        prop_assert!(x.iter().all(|&u| u > 0.0 && u < 1.0));
    }
}
