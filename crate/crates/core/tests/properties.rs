use foalkit::categories::CategoryConfig;
use foalkit::imagecore::{canny_edges, sobel_gradient, to_grayscale, BinaryMask, Dims, Image, LabelMap};
use foalkit::losses::{aggregate, midf, traffic_light_luminance_adjust_loss, LossTerms, LossWeights};
use foalkit::metrics::{apce, ApceConfig};
use foalkit::oamix::{build_mixing_masks, compose_mix_a, object_and_road_masks};
use foalkit::scheduler::{Domain, Pool, SchedulerState};
use foalkit::trafficlight::{bright_dark_masks, split_upper_lower, TlRegionMasks};
use proptest::prelude::*;

const N: usize = 10;

fn unit_image(ch: usize) -> impl Strategy<Value = Image> {
    prop::collection::vec(0.0f64..=1.0, N * N * ch).prop_map(move |d| Image::new(N, N, ch, d).unwrap())
}

fn mask() -> impl Strategy<Value = BinaryMask> {
    prop::collection::vec(any::<bool>(), N * N).prop_map(|b| BinaryMask::new(N, N, b).unwrap())
}

fn nonempty_mask() -> impl Strategy<Value = BinaryMask> {
    mask().prop_filter("non-empty", |m| !m.is_empty())
}

fn labels() -> impl Strategy<Value = LabelMap> {
    prop::collection::vec(prop::sample::select(vec![0u8, 6, 7, 8, 10, 11, 13, 17]), N * N)
        .prop_map(|ids| LabelMap::new(N, N, ids).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn midf_is_non_negative_and_zero_at_truth(a in unit_image(3), b in unit_image(3), m in mask()) {
        let w = LossWeights::default();
        prop_assert!(midf(&m, &a, &b, &w).unwrap() >= 0.0);
        prop_assert_eq!(midf(&m, &a, &a, &w).unwrap(), 0.0);
    }

    #[test]
    fn midf_smooth_l1_term_grows_with_the_mask(a in unit_image(1), b in unit_image(1), m in mask(), extra in mask()) {
        let w = LossWeights { lambda_sl1: 1.0, ..Default::default() };
        let big = m.union(&extra).unwrap();
        let sl1 = |m: &BinaryMask| {
            let (x, y) = (a.masked(m).unwrap(), b.masked(m).unwrap());
            foalkit::imagecore::smooth_l1_loss(&x, &y).unwrap()
        };
        prop_assert!(sl1(&big) >= sl1(&m));
        prop_assert!(midf(&big, &a, &b, &w).unwrap().is_finite());
    }

    #[test]
    fn cosine_hinge_ignores_offset_and_scale(a in unit_image(1), b in unit_image(1), m in nonempty_mask(),
                                             offset in -0.3f64..0.3, scale in 0.2f64..3.0) {
        let w = LossWeights::default();
        let base = traffic_light_luminance_adjust_loss(&a, &b, &m, &w).unwrap();
        let shifted = Image::new(N, N, 1, b.data().iter().map(|v| v * scale + offset).collect::<Vec<_>>());
        // Out-of-range transforms are not valid images; skip them.
        if let Ok(shifted) = shifted {
            let moved = traffic_light_luminance_adjust_loss(&a, &shifted, &m, &w).unwrap();
            prop_assert!((base - moved).abs() < 1e-9, "{} vs {}", base, moved);
        }
    }

    #[test]
    fn aggregate_is_linear(v in prop::collection::vec(0.0f64..10.0, 8)) {
        let terms = |k: f64| LossTerms {
            sla: Some(k * v[0]), tla_cos: Some(k * v[1]), abc: Some(k * v[2]), cbc: Some(k * v[3]),
            ac_a: Some(k * v[4]), ac_b: Some(k * v[5]), tll: Some(k * v[6]), tlc: Some(k * v[7]),
        };
        let one = aggregate(&terms(1.0)).unwrap().total_partial;
        let two = aggregate(&terms(2.0)).unwrap().total_partial;
        prop_assert!((two - 2.0 * one).abs() <= 1e-12 * one.max(1.0));
        prop_assert!((one - v[2..].iter().sum::<f64>()).abs() <= 1e-12 * one.max(1.0));
    }

    #[test]
    fn light_partitions_are_exact(x in unit_image(1), m in nonempty_mask()) {
        let (bright, dark) = bright_dark_masks(&x, &m).unwrap();
        prop_assert!(!bright.intersects(&dark).unwrap());
        prop_assert_eq!(bright.union(&dark).unwrap(), m.clone());
        let (up, low) = split_upper_lower(&m);
        prop_assert!(!up.intersects(&low).unwrap());
        prop_assert_eq!(up.union(&low).unwrap(), m.clone());
        let masks = TlRegionMasks::from_thermal(&x, &m).unwrap();
        prop_assert!(!masks.bright.is_empty());
    }

    #[test]
    fn mixing_never_occludes_real_objects(real in labels(), fake in labels(), xa in unit_image(3), xb in unit_image(3)) {
        let cfg = CategoryConfig { area_threshold: foalkit::categories::AreaThreshold::Fixed { pixels: 1 }, ..Default::default() };
        let (obj, road) = object_and_road_masks(&real, &cfg);
        let (q_o, q_f) = build_mixing_masks(&fake, &obj, &road, &cfg).unwrap();
        prop_assert!(!q_o.union(&q_f).unwrap().intersects(&obj).unwrap());
        let mix = compose_mix_a(&xa, &xb, &q_o, &q_f).unwrap();
        for i in mix.context.set_indices() {
            let (r, c) = (i / N, i % N);
            prop_assert_eq!(mix.mixed.pixel(r, c), xb.pixel(r, c));
        }
    }

    #[test]
    fn wider_tolerance_never_lowers_apce(a in unit_image(1), b in unit_image(1)) {
        let narrow = ApceConfig { tolerance_radius: 0, ..Default::default() };
        let wide = ApceConfig { tolerance_radius: 2, ..Default::default() };
        let lo = apce(&a, &b, &narrow).unwrap();
        let hi = apce(&a, &b, &wide).unwrap();
        prop_assert!(hi >= lo);
        prop_assert!((0.0..=1.0).contains(&lo));
    }

    #[test]
    fn canny_edges_are_nested_in_threshold(a in unit_image(1), t in 0.2f64..0.9) {
        let strict = canny_edges(&a, 0.4 * t, t).unwrap();
        let loose = canny_edges(&a, 0.4 * t * 0.5, t * 0.5).unwrap();
        prop_assert!(strict.is_subset_of(&loose).unwrap());
        let g = sobel_gradient(&to_grayscale(&a)).unwrap();
        prop_assert!(g.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn scheduler_pool_follows_signals(steps in prop::collection::vec((any::<bool>(), 0.0f64..2.0, 0.0f64..2.0), 1..60), seed in any::<u64>()) {
        let pools = [(vec![1u8, 2], vec![1, 2, 3, 4]), (vec![9], vec![7, 8, 9])];
        let mut s = SchedulerState::new(pools, seed).unwrap();
        for (a, zs, zg) in steps {
            let d = if a { Domain::A } else { Domain::B };
            s.update_state(d, zs, zg).unwrap();
            let (_, pool) = s.next_sample(d).unwrap();
            prop_assert_eq!(pool, if zs > zg { Pool::Soc } else { Pool::All });
        }
    }
}

#[test]
fn dims_display_is_height_by_width() {
    assert_eq!(Dims::new(3, 5).to_string(), "3x5");
}
