use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;

use meshsched::decision::ScheduleDecision;
use meshsched::env::{build_episode, EnvConfig, InterferenceMode};
use meshsched::radio::{capacity, effective_power, gen_interference_synthetic, packets_per_slot, LinkBudget};
use meshsched::rng::seeded;
use meshsched::sim::{EpisodeState, WorkloadKind};
use meshsched::topology::{RoutingTable, Topology, TopologyKind};

fn small() -> (Arc<Topology>, Arc<RoutingTable>) {
    let t = Arc::new(Topology::generate(TopologyKind::Small10, &mut seeded(7)).unwrap());
    let r = Arc::new(RoutingTable::compute(&t).unwrap());
    (t, r)
}

fn episode(seed: u64, level: f64, workload: WorkloadKind, packets: u64) -> EpisodeState {
    let (t, r) = small();
    let cfg = EnvConfig {
        workload,
        total_packets: packets,
        interference: InterferenceMode::Synthetic { level },
        seed,
        ..EnvConfig::default()
    };
    build_episode(&t, &r, &cfg, 0).unwrap()
}

fn random_decision(rng: &mut impl Rng, e: usize) -> ScheduleDecision {
    ScheduleDecision::new((0..e).map(|_| if rng.random_bool(0.4) { rng.random_range(0..=10) as f64 / 10.0 } else { 0.0 }).collect())
        .unwrap()
}

fn workload() -> impl Strategy<Value = WorkloadKind> {
    prop_oneof![
        Just(WorkloadKind::Uniform),
        Just(WorkloadKind::FewToMany),
        Just(WorkloadKind::ManyToFew)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conservation_every_slot(seed in 0u64..10_000, level in 0.0f64..=1.0, w in workload(), packets in 0u64..6000) {
        let mut st = episode(seed, level, w, packets);
        let mut rng = seeded(seed ^ 0xabc);
        prop_assert!(st.conservation_holds());
        for _ in 0..60 {
            if st.is_terminal() {
                break;
            }
            let d = random_decision(&mut rng, st.topology().num_links());
            st.apply_schedule(&d).unwrap();
            prop_assert!(st.conservation_holds());
            let t = st.totals();
            prop_assert_eq!(t.injected, t.delivered + t.dropped + st.in_system());
        }
    }

    #[test]
    fn packets_move_at_most_one_hop_per_slot(seed in 0u64..10_000, w in workload()) {
        let mut st = episode(seed, 0.1, w, 3000);
        let mut rng = seeded(seed);
        for _ in 0..40 {
            let d = random_decision(&mut rng, st.topology().num_links());
            let occ = st.occupancies();
            let budgets = st.link_budgets(&d);
            let o = st.apply_schedule(&d).unwrap();
            let expected: u64 = occ.iter().zip(&budgets).map(|(&q, &b)| q.min(b as usize) as u64).sum();
            prop_assert_eq!(o.moved, expected);
            for l in 0..st.topology().num_links() {
                for p in st.buffer(l) {
                    prop_assert!(p.hops_taken as u64 <= st.slot() - p.created_slot);
                }
            }
        }
    }

    #[test]
    fn buffers_are_fifo(seed in 0u64..10_000) {
        let mut st = episode(seed, 0.2, WorkloadKind::Uniform, 2304);
        let mut rng = seeded(seed);
        for _ in 0..30 {
            let e = st.topology().num_links();
            let d = random_decision(&mut rng, e);
            let before: Vec<Vec<u64>> = (0..e).map(|l| st.buffer(l).iter().map(|p| p.id).collect()).collect();
            let budgets = st.link_budgets(&d);
            st.apply_schedule(&d).unwrap();
            for l in 0..e {
                let take = (budgets[l] as usize).min(before[l].len());
                let after: Vec<u64> = st.buffer(l).iter().map(|p| p.id).collect();
                // Survivors keep their order at the head; arrivals join the tail.
                prop_assert_eq!(&after[..before[l].len() - take], &before[l][take..]);
            }
        }
    }

    #[test]
    fn effective_power_is_monotone(seed in 0u64..10_000, level in 0.0f64..=1.0, link in 0usize..10, other in 0usize..10, bump in 0.0f64..=1.0) {
        let mut rng = seeded(seed);
        let received: Vec<f64> = (0..10).map(|_| rng.random_range(0.5..50.0)).collect();
        let b = LinkBudget::from_parts(received, vec![1e9; 10], vec![120; 10]).unwrap();
        let i = gen_interference_synthetic(&b, level, &mut rng).unwrap();
        let base: Vec<f64> = (0..10).map(|_| rng.random_range(0..=10) as f64 / 10.0).collect();
        let p0 = effective_power(link, &base, &b, &i);

        let mut louder = base.clone();
        louder[other] = (louder[other] + bump).min(1.0);
        let p1 = effective_power(link, &louder, &b, &i);
        if other == link {
            prop_assert!(p1 >= p0);
        } else {
            prop_assert!(p1 <= p0);
        }
        prop_assert!(packets_per_slot(link, &base, &b, &i) <= 120);
    }

    #[test]
    fn capacity_is_concave_and_increasing(a in 0.0f64..1e4, d in 1e-3f64..1e3) {
        let bw = 1e9;
        let (c0, c1, c2) = (capacity(a, bw).unwrap(), capacity(a + d, bw).unwrap(), capacity(a + 2.0 * d, bw).unwrap());
        prop_assert!(c1 > c0);
        prop_assert!(c1 - c0 >= (c2 - c1) * (1.0 - 1e-12));
    }
}
