//! Generates the three built-in meshes, prints their shape and routing, and
//! round-trips one through the text format.

use meshsched::rng::seeded;
use meshsched::topology::{RoutingTable, Topology, TopologyKind};

fn main() -> meshsched::Result<()> {
    for kind in [TopologyKind::Small10, TopologyKind::Medium48, TopologyKind::Large96] {
        let t = Topology::generate(kind, &mut seeded(7))?;
        let routes = RoutingTable::compute(&t)?;
        let mean_len = t.links().iter().map(|l| t.link_length(l.id)).sum::<f64>() / t.num_links() as f64;
        println!(
            "{kind:<10} nodes {:>3}  links {:>3}  strongly connected {}  diameter {}  mean link {:.0} m",
            t.num_nodes(),
            t.num_links(),
            t.is_strongly_connected(),
            routes.diameter(),
            mean_len
        );
    }

    let t = Topology::generate(TopologyKind::Small10, &mut seeded(7))?;
    let routes = RoutingTable::compute(&t)?;
    let (src, dst) = (0, t.num_nodes() - 1);
    let path: Vec<String> = routes
        .path(&t, src, dst)
        .into_iter()
        .map(|l| format!("{}->{}", t.link(l).src, t.link(l).dst))
        .collect();
    println!("\nroute {src} -> {dst}: {}", path.join(", "));

    let text = t.to_text();
    let back = Topology::from_text(&text, &mut seeded(0))?;
    assert_eq!(back.num_links(), t.num_links());
    println!("\n{}", text.lines().take(8).collect::<Vec<_>>().join("\n"));
    Ok(())
}
