use std::sync::Arc;

use collective_stopping::*;
use proptest::prelude::*;

fn dist_with_mean(raw: Vec<(f64, f64)>, mean: f64) -> Option<PosteriorDistribution> {
    let total: f64 = raw.iter().map(|a| a.1).sum();
    let m: f64 = raw.iter().map(|a| a.0 * a.1).sum::<f64>() / total;
    let atoms: Vec<(f64, f64)> = raw.iter().map(|&(x, w)| (x - m + mean, w / total)).collect();
    if atoms.iter().any(|a| !(0.0..=1.0).contains(&a.0)) {
        return None;
    }
    PosteriorDistribution::new(atoms).ok()
}

fn grid(n: usize) -> Arc<BeliefGrid> {
    Arc::new(BeliefGrid::build(n, 1e-3, &[], &[]).unwrap())
}

fn pwl(values: &[f64]) -> PiecewiseLinearSpec {
    let k = values.len() - 1;
    let pts: Vec<(f64, f64)> = values.iter().enumerate().map(|(j, &v)| (j as f64 / k as f64, v)).collect();
    PiecewiseLinearSpec::continuous(&pts).unwrap()
}

fn two_player(u1: &[f64], u2: &[f64], c: f64, rule: CoalitionRule) -> Game {
    let players = vec![PlayerSpec { u: pwl(u1), c: CostSpec::Constant(c) }, PlayerSpec { u: pwl(u2), c: CostSpec::Constant(c) }];
    Game::new(&GameSpec::new(0.5, players, ProcessSpec::diffusion(1.0).unwrap(), rule).with_grid(40, 1e-3)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn mpc_is_reflexive_and_transitive(
        a in prop::collection::vec((0.2f64..0.8, 0.05f64..1.0), 1..6),
        b in prop::collection::vec((0.1f64..0.9, 0.05f64..1.0), 1..6),
        c in prop::collection::vec((0.0f64..1.0, 0.05f64..1.0), 1..6),
        mean in 0.3f64..0.7,
    ) {
        let (Some(f), Some(g), Some(h)) = (dist_with_mean(a, mean), dist_with_mean(b, mean), dist_with_mean(c, mean)) else {
            return Ok(());
        };
        prop_assert!(is_mpc(&f, &f));
        if is_mpc(&f, &g) && is_mpc(&g, &h) {
            prop_assert!(is_mpc(&f, &h));
        }
        // the point mass at the mean contracts everything with that mean
        let point = PosteriorDistribution::degenerate(f.mean()).unwrap();
        prop_assert!(is_mpc(&point, &f));
    }
}

proptest! {
    #[test]
    fn binary_spread_dominates_point_mass(lo in 0.01f64..0.5, hi in 0.5f64..0.99, t in 0.01f64..0.99) {
        let prior = lo + t * (hi - lo);
        let b = binary_from_bounds(lo, hi, prior).unwrap();
        let spread = b.distribution();
        let point = PosteriorDistribution::degenerate(prior).unwrap();
        prop_assert!(is_mpc(&point, &spread));
        prop_assert!((spread.mean() - prior).abs() < 1e-12);
    }

    #[test]
    fn closure_is_a_concave_majorant(ys in prop::collection::vec(-1.0f64..1.0, 16..48)) {
        let g = grid(ys.len());
        let f = GridFunction::new(g.clone(), ys).unwrap();
        let hat = full_closure(&f);
        let xs = g.points();
        let v = hat.values();
        for k in 0..v.len() {
            prop_assert!(v[k] >= f.value(k) - 1e-12);
        }
        for k in 1..v.len() - 1 {
            let mid = chord_value(xs[k - 1], v[k - 1], xs[k + 1], v[k + 1], xs[k]);
            prop_assert!(v[k] >= mid - 1e-12);
        }
        let again = full_closure(&hat);
        for (a, b) in again.values().iter().zip(v) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        // the closure touches the function at both ends
        prop_assert!((v[0] - f.value(0)).abs() <= 1e-15);
        prop_assert!((v[v.len() - 1] - f.value(v.len() - 1)).abs() <= 1e-15);
    }

    #[test]
    fn phi_is_convex_and_anchored(
        costs in prop::collection::vec(0.0f64..0.5, 2..6),
        sigma in 0.3f64..2.0,
    ) {
        let c = CostSpec::Piecewise(pwl(&costs));
        let g = Arc::new(BeliefGrid::build(64, 1e-3, &[0.5], &[]).unwrap());
        let phi = phi_transform(&c, &ProcessSpec::diffusion(sigma).unwrap(), &g, 0.5).unwrap();
        let z = g.index_of(0.5).unwrap();
        prop_assert!(phi.value(z).abs() <= 1e-15);
        let xs = g.points();
        let v = phi.values();
        for k in 1..v.len() - 1 {
            let mid = chord_value(xs[k - 1], v[k - 1], xs[k + 1], v[k + 1], xs[k]);
            prop_assert!(v[k] <= mid + 1e-12);
        }
    }

    #[test]
    fn constant_cost_phi_matches_closed_form(c in 0.01f64..1.0, sigma in 0.3f64..2.0) {
        let g = Arc::new(BeliefGrid::build(512, 1e-3, &[0.5], &[]).unwrap());
        let phi = phi_transform(&CostSpec::Constant(c), &ProcessSpec::diffusion(sigma).unwrap(), &g, 0.5).unwrap();
        let exact = phi_closed_form_diffusion(c, sigma, &g);
        // both vanish with zero slope at one half, so no affine correction is needed
        let scale = c * sigma * sigma;
        for (k, &p) in g.points().iter().enumerate() {
            if (0.05..=0.95).contains(&p) {
                prop_assert!((phi.value(k) - exact.value(k)).abs() <= 1e-7 * scale.max(1.0), "p = {p}");
            }
        }
    }

    #[test]
    fn bounds_table_brackets_every_point(mask in prop::collection::vec(any::<bool>(), 16..40)) {
        let g = grid(mask.len());
        let Ok(region) = SamplingRegion::from_mask(g, mask) else { return Ok(()) };
        for (k, &(lo, hi)) in region.bounds_table().iter().enumerate() {
            prop_assert!(lo <= k && k <= hi);
            prop_assert!(!region.contains_index(lo) && !region.contains_index(hi));
            prop_assert!((lo + 1..hi).all(|j| region.contains_index(j)));
        }
    }

    #[test]
    fn region_lattice_laws(a in prop::collection::vec(any::<bool>(), 20), b in prop::collection::vec(any::<bool>(), 20)) {
        let g = grid(20);
        let (Ok(ra), Ok(rb)) = (SamplingRegion::from_mask(g.clone(), a), SamplingRegion::from_mask(g, b)) else {
            return Ok(());
        };
        let u = ra.union(&rb).unwrap();
        let i = ra.intersection(&rb).unwrap();
        prop_assert!(ra.is_subset(&u) && rb.is_subset(&u));
        prop_assert!(i.is_subset(&ra) && i.is_subset(&rb));
        prop_assert_eq!(ra.union(&i).unwrap(), ra.clone());
    }

    #[test]
    fn quota_pivots_and_nesting(n in 1usize..8, q_seed in 0usize..100) {
        let q = 1 + q_seed % n;
        let rule = CoalitionRule::quota(q, n).unwrap();
        prop_assert_eq!(pivotal_players(&rule), (q - 1, n - q));
        if q > 1 {
            prop_assert!(rule.is_sub_rule_of(&CoalitionRule::quota(q - 1, n).unwrap()));
        }
        let decisive = rule.is_decisive(PlayerSet::from_players(&(0..q).collect::<Vec<_>>()));
        prop_assert!(decisive);
        if q > 1 {
            prop_assert!(!rule.is_decisive(PlayerSet::from_players(&(0..q - 1).collect::<Vec<_>>())));
        }
    }

    #[test]
    fn u_bar_interpolates_between_bounds(ys in prop::collection::vec(-1.0f64..1.0, 16..32), lo_seed in 0usize..100, width in 2usize..10) {
        let g = grid(ys.len());
        let n = ys.len();
        let net = GridFunction::new(g.clone(), ys).unwrap();
        let lo = lo_seed % (n - width);
        let hi = lo + width;
        let xs = g.points();
        for k in lo..=hi {
            let t = (xs[k] - xs[lo]) / (xs[hi] - xs[lo]);
            let expected = (1.0 - t) * net.value(lo) + t * net.value(hi);
            prop_assert!((u_bar_index(&net, lo, hi, k) - expected).abs() <= 1e-12);
        }
        prop_assert!((u_bar_index(&net, lo, hi, lo) - net.value(lo)).abs() <= 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unanimity_equilibria_are_closed_upward(
        u1 in prop::collection::vec(0.0f64..1.0, 3..7),
        u2 in prop::collection::vec(0.0f64..1.0, 3..7),
        c in 0.0f64..0.1,
    ) {
        let game = two_player(&u1, &u2, c, CoalitionRule::unanimity(2).unwrap());
        let eq = enumerate_interval_equilibria(&game, EnumerationScope::Single).unwrap();
        let n = game.grid().len();
        for r in eq.iter().take(6) {
            for (a, b) in r.region.interval_indices_list() {
                let wider = SamplingRegion::interval_indices(game.grid().clone(), a.saturating_sub(3), (b + 3).min(n - 1));
                prop_assert!(certify(&game, &wider).unwrap().pass);
            }
        }
    }

    #[test]
    fn unilateral_equilibria_sit_inside_every_efficient_region(
        u1 in prop::collection::vec(0.0f64..1.0, 3..7),
        u2 in prop::collection::vec(0.0f64..1.0, 3..7),
        c in 0.001f64..0.1,
        l1 in 0.0f64..1.0,
        l2 in 0.0f64..1.0,
    ) {
        let game = two_player(&u1, &u2, c, CoalitionRule::unilateral(2).unwrap()).jittered(1e-6, 7);
        let lambda = WeightVector::new(vec![l1, l2 + 1e-3]).unwrap();
        let eff = efficient_region(&game, &lambda).unwrap();
        for r in enumerate_interval_equilibria(&game, EnumerationScope::Single).unwrap() {
            prop_assert!(r.region.is_subset(&eff));
        }
    }

    #[test]
    fn single_player_optimum_is_the_efficient_region(u in prop::collection::vec(0.0f64..1.0, 3..7), c in 0.001f64..0.1) {
        let spec = GameSpec::new(
            0.5,
            vec![PlayerSpec { u: pwl(&u), c: CostSpec::Constant(c) }],
            ProcessSpec::diffusion(1.0).unwrap(),
            CoalitionRule::unilateral(1).unwrap(),
        )
        .with_grid(40, 1e-3);
        let game = Game::new(&spec).unwrap();
        let eff = efficient_region(&game, &WeightVector::equal(1)).unwrap();
        let cert = certify(&game, &eff).unwrap();
        prop_assert!(cert.pass);
    }
}
