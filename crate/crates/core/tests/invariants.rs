use std::collections::VecDeque;

use proptest::prelude::*;
use schonmann_core::cluster::{label_clusters, BondConfig, BondLattice};
use schonmann_core::ising::{
    heat_bath_update, line_clamped, sweep, uniform_config, ChainState, CoupledChains, HeatBath,
};
use schonmann_core::{ModelParams, Site, Spin, SpinConfig, SquareBox};

fn spins(bits: &[bool]) -> Vec<Spin> {
    bits.iter().map(|&b| Spin::from_bool(b)).collect()
}

fn config(n: usize, bits: &[bool], boundary: bool) -> SpinConfig {
    let g = SquareBox::new(n).unwrap();
    SpinConfig::from_interior(g, &spins(bits), Spin::from_bool(boundary)).unwrap()
}

/// Coordinatewise max of two configurations on the same box.
fn join(a: &SpinConfig, b: &SpinConfig) -> SpinConfig {
    let mut out = a.clone();
    for s in a.geometry().sites().collect::<Vec<_>>() {
        if b.spin(s) == Spin::Plus {
            out.set(s, Spin::Plus).unwrap();
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leq_is_a_partial_order(
        a in prop::collection::vec(any::<bool>(), 25),
        b in prop::collection::vec(any::<bool>(), 25),
        c in prop::collection::vec(any::<bool>(), 25),
    ) {
        let (a, b, c) = (config(2, &a, true), config(2, &b, true), config(2, &c, true));
        prop_assert!(a.leq(&a).unwrap());
        if a.leq(&b).unwrap() && b.leq(&a).unwrap() {
            prop_assert_eq!(&a, &b);
        }
        if a.leq(&b).unwrap() && b.leq(&c).unwrap() {
            prop_assert!(a.leq(&c).unwrap());
        }
    }

    #[test]
    fn flip_reverses_order(
        a in prop::collection::vec(any::<bool>(), 25),
        b in prop::collection::vec(any::<bool>(), 25),
    ) {
        let lo = config(2, &a, false);
        let hi = join(&lo, &config(2, &b, true));
        prop_assert!(lo.leq(&hi).unwrap());
        prop_assert!(hi.flipped().leq(&lo.flipped()).unwrap());
        prop_assert_eq!(lo.flipped().flipped(), lo);
    }

    #[test]
    fn single_update_keeps_order(
        a in prop::collection::vec(any::<bool>(), 25),
        b in prop::collection::vec(any::<bool>(), 25),
        x in -2i32..=2, y in -2i32..=2,
        u in 0.0f64..1.0,
        beta in 0.05f64..2.0,
    ) {
        let p = ModelParams::zero_field(beta).unwrap();
        let mut lo = config(2, &a, false);
        let mut hi = join(&lo, &config(2, &b, true));
        let s = Site::new(x, y);
        heat_bath_update(&mut lo, s, u, &p).unwrap();
        heat_bath_update(&mut hi, s, u, &p).unwrap();
        prop_assert!(lo.leq(&hi).unwrap());
    }

    #[test]
    fn extremal_chains_stay_ordered(seed in any::<u64>(), sweeps in 1usize..30, beta in 0.1f64..1.5) {
        let kernel = HeatBath::new(&ModelParams::zero_field(beta).unwrap());
        let lo = uniform_config(4, Spin::Minus, Spin::Plus).unwrap();
        let hi = uniform_config(4, Spin::Plus, Spin::Plus).unwrap();
        let mut ch = CoupledChains::new(vec![lo, hi], seed).unwrap();
        for _ in 0..sweeps {
            ch.sweep(&kernel);
            prop_assert!(ch.configs()[0].leq(&ch.configs()[1]).unwrap());
        }
    }

    #[test]
    fn conditioning_sandwich(seed in any::<u64>(), word in prop::collection::vec(any::<bool>(), 3), beta in 0.2f64..1.2) {
        // Pasts on [-3, -1]: all minus, the given word, all plus.
        let kernel = HeatBath::new(&ModelParams::zero_field(beta).unwrap());
        let past = |f: &dyn Fn(usize) -> bool| -> Vec<(i32, Spin)> {
            (0..3).map(|i| (i as i32 - 3, Spin::from_bool(f(i)))).collect()
        };
        let cfgs = vec![
            line_clamped(5, Spin::Plus, &past(&|_| false)).unwrap(),
            line_clamped(5, Spin::Plus, &past(&|i| word[i])).unwrap(),
            line_clamped(5, Spin::Plus, &past(&|_| true)).unwrap(),
        ];
        let mut ch = CoupledChains::new(cfgs, seed).unwrap();
        for _ in 0..20 {
            ch.sweep(&kernel);
            let c = ch.configs();
            prop_assert!(c[0].leq(&c[1]).unwrap() && c[1].leq(&c[2]).unwrap());
            for (i, &w) in word.iter().enumerate() {
                prop_assert_eq!(c[1].spin(Site::line(i as i32 - 3)), Spin::from_bool(w));
            }
        }
    }

    #[test]
    fn replay_is_bit_exact(seed in any::<u64>(), sweeps in 1usize..20) {
        let p = ModelParams::zero_field(0.5).unwrap();
        let start = uniform_config(3, Spin::Plus, Spin::Minus).unwrap();
        let run = || {
            let mut st = ChainState::new(start.clone(), seed);
            for _ in 0..sweeps {
                sweep(&mut st, &p);
            }
            st.config
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn labels_are_connected_components(open in prop::collection::vec(any::<bool>(), 40)) {
        let lat = BondLattice::plus_box(2).unwrap();
        let g = lat.geometry();
        let mut b = BondConfig::all_closed(lat.clone());
        for (i, &o) in open.iter().enumerate().take(lat.bonds().len()) {
            b.set(i, o);
        }
        let lab = label_clusters(&b);
        // Breadth-first search over free sites, with one exterior node.
        let free = lat.free_sites().to_vec();
        let node = |s: Site| free.iter().position(|&f| f == s).unwrap_or(free.len());
        let mut adj = vec![Vec::new(); free.len() + 1];
        for (i, e) in lat.bonds().iter().enumerate() {
            if b.is_open(i) {
                let (u, v) = (node(e.a), node(e.b));
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut comp = vec![usize::MAX; free.len() + 1];
        for start in 0..=free.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut q = VecDeque::from([start]);
            comp[start] = start;
            while let Some(u) = q.pop_front() {
                for &v in &adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = start;
                        q.push_back(v);
                    }
                }
            }
        }
        for (i, &s) in free.iter().enumerate() {
            let smallest = free
                .iter()
                .enumerate()
                .filter(|&(j, _)| comp[j] == comp[i])
                .map(|(_, &t)| g.index(t).unwrap())
                .min()
                .unwrap();
            prop_assert_eq!(lab.label(s), Some(smallest));
            prop_assert_eq!(lab.touches_exterior(s), comp[i] == comp[free.len()]);
            for (j, &t) in free.iter().enumerate() {
                prop_assert_eq!(lab.label(s) == lab.label(t), comp[i] == comp[j]);
            }
        }
    }
}
