//! Link budgets, interference matrices and what they do to a slot's packet
//! budget as the interference level rises.

use meshsched::decision::ScheduleDecision;
use meshsched::radio::{
    effective_power, gen_interference_geometric, gen_interference_synthetic, slot_budgets, LinkBudget, NoiseRange,
};
use meshsched::rng::seeded;
use meshsched::topology::{Topology, TopologyKind};

fn main() -> meshsched::Result<()> {
    let t = Topology::generate(TopologyKind::Small10, &mut seeded(7))?;
    let budget = LinkBudget::from_topology(&t, NoiseRange::default(), &mut seeded(1))?;
    for l in 0..3 {
        println!(
            "link {l}: {:.0} m, P_R {:.3e} mW, nominal {} packets/slot",
            t.link_length(l),
            budget.received_mw(l),
            budget.nominal_pkts(l)
        );
    }

    let all_on = ScheduleDecision::full(t.num_links());
    println!("\nall links at full power");
    for level in [0.0, 0.05, 0.1, 0.2, 0.5, 1.0] {
        let i = gen_interference_synthetic(&budget, level, &mut seeded(2))?;
        let b = slot_budgets(all_on.powers(), &budget, &i);
        println!("  level {level:.2}: packets/slot {:?}", b);
    }

    let geo = gen_interference_geometric(&t, &budget, NoiseRange::default(), &mut seeded(3))?;
    let p = all_on.powers();
    let alive = (0..t.num_links()).filter(|&l| effective_power(l, p, &budget, &geo) > 0.0).count();
    println!("\ngeometric interference: {alive}/{} links keep positive effective power", t.num_links());
    Ok(())
}
