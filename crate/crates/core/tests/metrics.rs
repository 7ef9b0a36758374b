use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rescu::metrics::{count_instances, instance_pr, iod, match_instances, rp_pr, sweep_h, ts_success_rate, vpd_success_curve};
use rescu::region::{BBox, Region};
use rescu::{Error, TsResult};

fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> Region {
    Region::Box(BBox::new(x0, y0, x1, y1))
}

fn ts(has_symmetry: bool) -> TsResult {
    TsResult {
        has_symmetry,
        deviation: 0.0,
        cross_ratios: vec![],
        tested: true,
        threshold: 0.06,
    }
}

/// Largest matching over edges with IOD > h, by exhaustive recursion.
fn exhaustive_matching(iods: &[Vec<f64>], h: f64) -> usize {
    fn go(i: usize, iods: &[Vec<f64>], h: f64, used: &mut Vec<bool>) -> usize {
        if i == iods.len() {
            return 0;
        }
        let mut best = go(i + 1, iods, h, used);
        for j in 0..used.len() {
            if !used[j] && iods[i][j] > h {
                used[j] = true;
                best = best.max(1 + go(i + 1, iods, h, used));
                used[j] = false;
            }
        }
        best
    }
    let n_gt = iods.first().map_or(0, Vec::len);
    go(0, iods, h, &mut vec![false; n_gt])
}

fn random_boxes(rng: &mut ChaCha8Rng, n: usize) -> Vec<Region> {
    (0..n)
        .map(|_| {
            let x = rng.gen_range(0.0..80.0);
            let y = rng.gen_range(0.0..80.0);
            bx(x, y, x + rng.gen_range(5.0..30.0), y + rng.gen_range(5.0..30.0))
        })
        .collect()
}

#[test]
fn iod_unit_cases() {
    assert_eq!(iod(&bx(2.0, 2.0, 4.0, 4.0), &bx(0.0, 0.0, 10.0, 10.0)).unwrap(), 1.0);
    assert_eq!(iod(&bx(0.0, 0.0, 1.0, 1.0), &bx(5.0, 5.0, 6.0, 6.0)).unwrap(), 0.0);
    assert_eq!(iod(&bx(0.0, 0.0, 10.0, 10.0), &bx(5.0, 0.0, 15.0, 10.0)).unwrap(), 0.5);
    assert!(matches!(
        iod(&bx(1.0, 1.0, 1.0, 5.0), &bx(0.0, 0.0, 2.0, 2.0)),
        Err(Error::ZeroAreaDetection)
    ));
}

#[test]
fn iod_is_asymmetric() {
    let small = bx(0.0, 0.0, 2.0, 2.0);
    let big = bx(0.0, 0.0, 10.0, 10.0);
    assert_eq!(iod(&small, &big).unwrap(), 1.0);
    assert!((iod(&big, &small).unwrap() - 0.04).abs() < 1e-12);
}

#[test]
fn polygon_and_box_agree() {
    let poly = Region::Polygon(vec![[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]]);
    let v = iod(&poly, &bx(5.0, 0.0, 15.0, 10.0)).unwrap();
    assert!((v - 0.5).abs() < 1e-12);
}

#[test]
fn instance_examples() {
    let gts = vec![bx(0.0, 0.0, 10.0, 10.0), bx(20.0, 0.0, 30.0, 10.0), bx(40.0, 0.0, 50.0, 10.0)];
    assert_eq!(instance_pr(&gts, &gts, 0.5).unwrap(), (1.0, 1.0));

    let dets = vec![
        gts[0].clone(),
        gts[1].clone(),
        bx(100.0, 0.0, 110.0, 10.0),
        bx(200.0, 0.0, 210.0, 10.0),
    ];
    let (p, r) = instance_pr(&dets, &gts, 0.5).unwrap();
    assert_eq!(p, 0.5);
    assert!((r - 2.0 / 3.0).abs() < 1e-15);

    // Both cover 90% of themselves with the single ground truth.
    let gt = vec![bx(0.0, 0.0, 10.0, 10.0)];
    let dets = vec![bx(1.0, 0.0, 11.0, 10.0), bx(-1.0, 0.0, 9.0, 10.0)];
    assert_eq!(instance_pr(&dets, &gt, 0.5).unwrap(), (0.5, 1.0));
}

#[test]
fn empty_conventions() {
    let gt = vec![bx(0.0, 0.0, 10.0, 10.0)];
    assert_eq!(instance_pr(&[], &gt, 0.5).unwrap(), (1.0, 0.0));
    assert_eq!(instance_pr(&[], &[], 0.5).unwrap(), (1.0, 1.0));
    let pts = sweep_h(&[], std::slice::from_ref(&gt), &[0.1, 0.5, 0.9]).unwrap();
    assert!(pts
        .iter()
        .all(|p| p.inst_precision == 1.0 && p.inst_recall == 0.0 && p.rp_recall == 0.0));
}

#[test]
fn rp_level_examples() {
    let a = vec![bx(0.0, 0.0, 10.0, 10.0), bx(20.0, 0.0, 30.0, 10.0)];
    let b = vec![bx(0.0, 50.0, 10.0, 60.0), bx(20.0, 50.0, 30.0, 60.0)];
    let gts = vec![a.clone(), b.clone()];

    let r = rp_pr(std::slice::from_ref(&a), &gts, 0.5).unwrap();
    assert_eq!((r.precision, r.recall), (1.0, 0.5));
    assert_eq!(r.assignments, vec![Some(0)]);

    let r = rp_pr(&[a.clone(), vec![a[0].clone()]], &gts, 0.5).unwrap();
    assert_eq!((r.precision, r.recall), (1.0, 0.5));
    assert_eq!(r.assignments, vec![Some(0), Some(0)]);

    let stray = vec![bx(500.0, 500.0, 510.0, 510.0)];
    let r = rp_pr(&[a, stray], &gts, 0.5).unwrap();
    assert_eq!((r.precision, r.recall), (0.5, 0.5));
    assert_eq!(r.assignments[1], None);
}

#[test]
fn acceptance_is_strict() {
    let gt = vec![vec![bx(5.0, 0.0, 15.0, 10.0)]];
    let det = vec![vec![bx(0.0, 0.0, 10.0, 10.0)]];
    let pts = sweep_h(&det, &gt, &[0.4, 0.5, 0.6]).unwrap();
    let accepted: Vec<bool> = pts.iter().map(|p| p.inst_recall == 1.0).collect();
    assert_eq!(accepted, vec![true, false, false]);
}

#[test]
fn perfect_detections_give_flat_curves() {
    let gt = vec![vec![bx(0.0, 0.0, 10.0, 10.0), bx(20.0, 0.0, 30.0, 10.0)]];
    let pts = sweep_h(&gt, &gt, &[0.0, 0.3, 0.6, 0.99]).unwrap();
    for p in pts {
        assert_eq!([p.rp_precision, p.rp_recall, p.inst_precision, p.inst_recall], [1.0; 4]);
    }
}

#[test]
fn unsorted_sweep_is_rejected() {
    assert!(matches!(sweep_h(&[], &[], &[0.5, 0.1]), Err(Error::InvalidArgument(_))));
}

#[test]
fn greedy_matching_is_maximum_on_small_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..3000 {
        let nd = rng.gen_range(0..=6);
        let ng = rng.gen_range(1..=6);
        let iods: Vec<Vec<f64>> = (0..nd)
            .map(|_| {
                (0..ng)
                    .map(|_| if rng.gen_bool(0.4) { rng.gen_range(0.0..1.0) } else { 0.0 })
                    .collect()
            })
            .collect();
        let h = rng.gen_range(0.0..0.9);
        let m = match_instances(&iods, h);
        let mut seen = vec![false; ng];
        for (i, j) in m.iter().enumerate() {
            if let Some(j) = *j {
                assert!(iods[i][j] > h && !seen[j]);
                seen[j] = true;
            }
        }
        assert_eq!(m.iter().flatten().count(), exhaustive_matching(&iods, h));
    }
}

#[test]
fn vpd_examples() {
    let sizes = vec![(800.0, 600.0); 3];
    let gts = vec![[100.0, 100.0], [900.0, 50.0], [-300.0, 400.0]];
    let exact: Vec<Option<[f64; 2]>> = gts.iter().copied().map(Some).collect();
    let c = vpd_success_curve(&exact, &gts, &sizes, &[0.5, 1.0, 5.0], &[0.1, 1.0]).unwrap();
    assert!(c.point.iter().chain(&c.vector).all(|&(_, sr)| sr == 1.0));

    let c = vpd_success_curve(
        &[Some([100.0, 100.0]), Some([215.0, 100.0])],
        &[[100.0, 100.0], [200.0, 100.0]],
        &sizes[..2],
        &[10.0, 20.0],
        &[],
    )
    .unwrap();
    assert_eq!(c.point, vec![(10.0, 0.5), (20.0, 1.0)]);

    assert!(matches!(
        vpd_success_curve(&[None], &[[0.0, 0.0], [1.0, 1.0]], &sizes[..2], &[1.0], &[]),
        Err(Error::UnpairedRecords { .. })
    ));
}

#[test]
fn point_behind_the_centre_is_ninety_degrees_off() {
    // A point at the image centre looks straight ahead; one infinitely far
    // to the side would be 90 degrees away, so any finite one is below.
    let (w, h) = (800.0, 600.0);
    let f = (w + h) / 4.0;
    let gt = [400.0, 300.0];
    let pred = [400.0 + 1e9 * f, 300.0];
    let a = rescu::metrics::vp_angle_deg(pred, gt, w, h);
    assert!((a - 90.0).abs() < 1e-6);
    let c = vpd_success_curve(&[Some(pred)], &[gt], &[(w, h)], &[], &[45.0, 89.0, 90.0]).unwrap();
    assert_eq!(c.vector, vec![(45.0, 0.0), (89.0, 0.0), (90.0, 1.0)]);
}

#[test]
fn ts_rate_examples() {
    assert_eq!(ts_success_rate(&[ts(true), ts(true)]).unwrap(), 1.0);
    let mut v: Vec<TsResult> = (0..12).map(|i| ts(i < 3)).collect();
    v.reverse();
    assert_eq!(ts_success_rate(&v).unwrap(), 0.25);
    assert!(matches!(ts_success_rate(&[]), Err(Error::EmptyInput)));
}

#[test]
fn counting_of_nothing() {
    let c = count_instances(&[]);
    assert_eq!((c.per_rp, c.total), (vec![], 0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sweeps_are_non_increasing(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let det: Vec<Vec<Region>> = (0..rng.gen_range(0..4)).map(|_| { let n = rng.gen_range(1..5); random_boxes(&mut rng, n) }).collect();
        let gt: Vec<Vec<Region>> = (0..rng.gen_range(1..4)).map(|_| { let n = rng.gen_range(1..5); random_boxes(&mut rng, n) }).collect();
        let hs: Vec<f64> = (0..20).map(|k| k as f64 * 0.05).collect();
        let pts = sweep_h(&det, &gt, &hs).unwrap();
        for w in pts.windows(2) {
            prop_assert!(w[1].inst_precision <= w[0].inst_precision);
            prop_assert!(w[1].inst_recall <= w[0].inst_recall);
            prop_assert!(w[1].rp_precision <= w[0].rp_precision);
            prop_assert!(w[1].rp_recall <= w[0].rp_recall);
        }
        for p in &pts {
            for v in [p.inst_precision, p.inst_recall, p.rp_precision, p.rp_recall] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn success_rates_grow_with_threshold(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..20);
        let gts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(-500.0..1500.0), rng.gen_range(-500.0..1000.0)]).collect();
        let preds: Vec<Option<[f64; 2]>> = gts
            .iter()
            .map(|g| rng.gen_bool(0.9).then(|| [g[0] + rng.gen_range(-30.0..30.0), g[1] + rng.gen_range(-30.0..30.0)]))
            .collect();
        let sizes = vec![(800.0, 600.0); n];
        let dist: Vec<f64> = (0..40).map(|k| k as f64).collect();
        let ang: Vec<f64> = (0..40).map(|k| k as f64 * 0.1).collect();
        let c = vpd_success_curve(&preds, &gts, &sizes, &dist, &ang).unwrap();
        for curve in [&c.point, &c.vector] {
            for w in curve.windows(2) {
                prop_assert!(w[1].1 >= w[0].1);
            }
        }
    }

    #[test]
    fn iod_of_a_region_with_itself_is_one(x in -100.0f64..100.0, y in -100.0f64..100.0, w in 0.1f64..50.0, h in 0.1f64..50.0) {
        let r = bx(x, y, x + w, y + h);
        prop_assert!((iod(&r, &r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn instance_rates_ignore_order(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nd = rng.gen_range(0..7);
        let ng = rng.gen_range(0..7);
        let dets = random_boxes(&mut rng, nd);
        let gts = random_boxes(&mut rng, ng);
        let base = instance_pr(&dets, &gts, 0.3).unwrap();
        let mut d2 = dets.clone();
        let mut g2 = gts.clone();
        d2.reverse();
        g2.rotate_left(ng.min(1));
        prop_assert_eq!(base, instance_pr(&d2, &g2, 0.3).unwrap());
    }
}
