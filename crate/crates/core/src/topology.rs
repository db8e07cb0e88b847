//! Backhaul mesh: base stations, directed mmWave links and shortest-path routing.
//!
//! Every directed link `i -> j` owns the transmit buffer `B(i->j)` at node `i`,
//! so buffers are indexed by link id throughout the crate.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

pub type NodeId = usize;
pub type LinkId = usize;

pub const DEFAULT_BUFFER_CAPACITY: usize = 650;
/// Range the per-link nominal packet budget is sampled from.
pub const NOMINAL_PKTS_RANGE: (u32, u32) = (115, 125);

pub const DEFAULT_TX_POWER_DBM: f64 = 30.0;
pub const DEFAULT_CARRIER_HZ: f64 = 60.0e9;
pub const DEFAULT_BANDWIDTH_HZ: f64 = 1.0e9;
/// 45 dBi parabolic dish.
pub const DEFAULT_DIRECTIVITY: f64 = 31_622.776_601_683_792;
/// Lattice spacing of the built-in generators, meters.
pub const DEFAULT_SPACING_M: f64 = 150.0;

const FILE_HEADER: &str = "meshsched-topology 1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub src: NodeId,
    pub dst: NodeId,
    pub max_tx_power_dbm: f64,
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_directivity_max: f64,
    pub rx_directivity_max: f64,
    /// Packets the link moves per slot at full power without interference.
    pub nominal_pkts_per_slot: u32,
}

/// Built-in stand-ins for the three evaluation meshes. Only node and link
/// counts are fixed; geometry comes from a seeded jittered hex lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum TopologyKind {
    #[serde(rename = "small-10")]
    #[default]
    Small10,
    #[serde(rename = "medium-48")]
    Medium48,
    #[serde(rename = "large-96")]
    Large96,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 3] = [Self::Small10, Self::Medium48, Self::Large96];

    pub fn name(self) -> &'static str {
        match self {
            Self::Small10 => "small-10",
            Self::Medium48 => "medium-48",
            Self::Large96 => "large-96",
        }
    }

    pub fn num_nodes(self) -> usize {
        match self {
            Self::Small10 => 4,
            Self::Medium48 => 19,
            Self::Large96 => 37,
        }
    }

    pub fn num_links(self) -> usize {
        match self {
            Self::Small10 => 10,
            Self::Medium48 => 48,
            Self::Large96 => 96,
        }
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small-10" | "small" => Ok(Self::Small10),
            "medium-48" | "medium" => Ok(Self::Medium48),
            "large-96" | "large" => Ok(Self::Large96),
            other => Err(Error::Config(format!("unknown topology generator `{other}`"))),
        }
    }
}

impl std::fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Link description before validation. `nominal_pkts_per_slot` is sampled
/// when absent.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub src: NodeId,
    pub dst: NodeId,
    pub max_tx_power_dbm: f64,
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_directivity_max: f64,
    pub rx_directivity_max: f64,
    pub nominal_pkts_per_slot: Option<u32>,
}

impl LinkSpec {
    /// A link with the crate's default radio parameters.
    pub fn between(src: NodeId, dst: NodeId) -> Self {
        Self {
            src,
            dst,
            max_tx_power_dbm: DEFAULT_TX_POWER_DBM,
            carrier_freq_hz: DEFAULT_CARRIER_HZ,
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
            tx_directivity_max: DEFAULT_DIRECTIVITY,
            rx_directivity_max: DEFAULT_DIRECTIVITY,
            nominal_pkts_per_slot: None,
        }
    }

    pub fn with_nominal(mut self, pkts: u32) -> Self {
        self.nominal_pkts_per_slot = Some(pkts);
        self
    }
}

/// Explicit topology description: node positions plus directed links.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologySpec {
    pub positions: Vec<(f64, f64)>,
    pub links: Vec<LinkSpec>,
    pub buffer_capacity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    buffer_capacity: usize,
    out_links: Vec<Vec<LinkId>>,
    index: HashMap<(NodeId, NodeId), LinkId>,
}

impl Topology {
    /// Validates `spec` and samples any missing nominal packet budgets from `rng`.
    pub fn build(spec: TopologySpec, rng: &mut SimRng) -> Result<Self> {
        if spec.buffer_capacity == 0 {
            return Err(Error::Topology("buffer capacity must be positive".into()));
        }
        let n = spec.positions.len();
        let mut nodes = Vec::with_capacity(n);
        for (id, &(x, y)) in spec.positions.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Topology(format!("node {id} has a non-finite position")));
            }
            nodes.push(Node { id, x, y });
        }

        let mut links = Vec::with_capacity(spec.links.len());
        let mut index = HashMap::new();
        let mut out_links = vec![Vec::new(); n];
        for (id, ls) in spec.links.into_iter().enumerate() {
            if ls.src >= n || ls.dst >= n {
                return Err(Error::Topology(format!(
                    "link {id} references node {} but only {n} nodes exist",
                    ls.src.max(ls.dst)
                )));
            }
            if ls.src == ls.dst {
                return Err(Error::Topology(format!("link {id} is a self-loop on node {}", ls.src)));
            }
            for (name, v) in [
                ("carrier frequency", ls.carrier_freq_hz),
                ("bandwidth", ls.bandwidth_hz),
                ("tx directivity", ls.tx_directivity_max),
                ("rx directivity", ls.rx_directivity_max),
            ] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Topology(format!("link {id}: {name} must be positive, got {v}")));
                }
            }
            if !ls.max_tx_power_dbm.is_finite() {
                return Err(Error::Topology(format!("link {id}: transmit power must be finite")));
            }
            let (src_pos, dst_pos) = (spec.positions[ls.src], spec.positions[ls.dst]);
            if src_pos == dst_pos {
                return Err(Error::Topology(format!("link {id} joins two co-located nodes")));
            }
            if index.insert((ls.src, ls.dst), id).is_some() {
                return Err(Error::Topology(format!("duplicate link {} -> {}", ls.src, ls.dst)));
            }
            let nominal = match ls.nominal_pkts_per_slot {
                Some(0) => {
                    return Err(Error::Topology(format!("link {id}: nominal packets per slot must be positive")))
                }
                Some(v) => v,
                None => rng.random_range(NOMINAL_PKTS_RANGE.0..=NOMINAL_PKTS_RANGE.1),
            };
            out_links[ls.src].push(id);
            links.push(Link {
                id,
                src: ls.src,
                dst: ls.dst,
                max_tx_power_dbm: ls.max_tx_power_dbm,
                carrier_freq_hz: ls.carrier_freq_hz,
                bandwidth_hz: ls.bandwidth_hz,
                tx_directivity_max: ls.tx_directivity_max,
                rx_directivity_max: ls.rx_directivity_max,
                nominal_pkts_per_slot: nominal,
            });
        }

        Ok(Self {
            nodes,
            links,
            buffer_capacity: spec.buffer_capacity,
            out_links,
            index,
        })
    }

    /// Generates one of the built-in meshes.
    ///
    /// Nodes are placed on a hexagonal lattice (center first, then ring by
    /// ring) with uniform jitter of 15% of the spacing. Undirected edges are a
    /// Euclidean minimum spanning tree plus the shortest remaining node pairs
    /// until the target count is reached; each edge becomes two directed
    /// links, so the result is strongly connected.
    pub fn generate(kind: TopologyKind, rng: &mut SimRng) -> Result<Self> {
        let n = kind.num_nodes();
        let spacing = DEFAULT_SPACING_M;
        let jitter = 0.15 * spacing;
        let positions: Vec<(f64, f64)> = hex_spiral(n)
            .into_iter()
            .map(|(q, r)| {
                let x = spacing * (q as f64 + r as f64 / 2.0);
                let y = spacing * (3f64.sqrt() / 2.0 * r as f64);
                (
                    x + rng.random_range(-jitter..=jitter),
                    y + rng.random_range(-jitter..=jitter),
                )
            })
            .collect();

        let edges = select_edges(&positions, kind.num_links() / 2);
        let mut links = Vec::with_capacity(kind.num_links());
        for (a, b) in edges {
            links.push(LinkSpec::between(a, b));
            links.push(LinkSpec::between(b, a));
        }
        Self::build(
            TopologySpec {
                positions,
                links,
                buffer_capacity: DEFAULT_BUFFER_CAPACITY,
            },
            rng,
        )
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn buffer_capacity(&self) -> usize {
        self.buffer_capacity
    }

    pub fn with_buffer_capacity(mut self, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Topology("buffer capacity must be positive".into()));
        }
        self.buffer_capacity = capacity;
        Ok(self)
    }

    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.out_links[node]
    }

    pub fn link_between(&self, src: NodeId, dst: NodeId) -> Option<LinkId> {
        self.index.get(&(src, dst)).copied()
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        let (pa, pb) = (&self.nodes[a], &self.nodes[b]);
        (pa.x - pb.x).hypot(pa.y - pb.y)
    }

    pub fn link_length(&self, l: LinkId) -> f64 {
        let link = &self.links[l];
        self.distance(link.src, link.dst)
    }

    /// True when every node can reach every other node.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.num_nodes();
        if n == 0 {
            return true;
        }
        let forward = self.reach_from(0, false);
        let backward = self.reach_from(0, true);
        forward.iter().all(|&r| r) && backward.iter().all(|&r| r)
    }

    fn reach_from(&self, start: NodeId, reverse: bool) -> Vec<bool> {
        let mut seen = vec![false; self.num_nodes()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for link in &self.links {
                let (from, to) = if reverse { (link.dst, link.src) } else { (link.src, link.dst) };
                if from == u && !seen[to] {
                    seen[to] = true;
                    queue.push_back(to);
                }
            }
        }
        seen
    }

    /// Parses the line-oriented topology file format (see [`Topology::to_text`]).
    pub fn from_text(text: &str, rng: &mut SimRng) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            Preamble,
            Nodes,
            Links,
        }
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        match lines.next() {
            Some((_, h)) if h == FILE_HEADER => {}
            Some((ln, h)) => {
                return Err(Error::parse(
                    format!("topology line {ln}"),
                    format!("expected header `{FILE_HEADER}`, found `{h}`"),
                ))
            }
            None => return Err(Error::parse("topology", "empty file")),
        }

        let mut section = Section::Preamble;
        let mut buffer_capacity = DEFAULT_BUFFER_CAPACITY;
        let mut positions: Vec<(usize, (f64, f64))> = Vec::new();
        let mut links: Vec<(usize, LinkSpec)> = Vec::new();

        for (ln, line) in lines {
            let ctx = || format!("topology line {ln}");
            match line {
                "[nodes]" => {
                    section = Section::Nodes;
                    continue;
                }
                "[links]" => {
                    section = Section::Links;
                    continue;
                }
                _ => {}
            }
            match section {
                Section::Preamble => {
                    let (key, value) = line
                        .split_once('=')
                        .ok_or_else(|| Error::parse(ctx(), "expected `key = value`"))?;
                    match key.trim() {
                        "buffer_capacity" => {
                            buffer_capacity = value.trim().parse().map_err(|e| Error::parse(ctx(), e))?
                        }
                        k => return Err(Error::parse(ctx(), format!("unknown key `{k}`"))),
                    }
                }
                Section::Nodes => {
                    let f: Vec<&str> = line.split_whitespace().collect();
                    if f.len() != 3 {
                        return Err(Error::parse(ctx(), "node rows are `id x y`"));
                    }
                    let id: usize = f[0].parse().map_err(|e| Error::parse(ctx(), e))?;
                    let x: f64 = f[1].parse().map_err(|e| Error::parse(ctx(), e))?;
                    let y: f64 = f[2].parse().map_err(|e| Error::parse(ctx(), e))?;
                    positions.push((id, (x, y)));
                }
                Section::Links => {
                    let f: Vec<&str> = line.split_whitespace().collect();
                    if f.len() != 8 && f.len() != 9 {
                        return Err(Error::parse(
                            ctx(),
                            "link rows are `id src dst max_tx_power_dbm freq_hz bandwidth_hz dt_max dr_max [n0]`",
                        ));
                    }
                    let int = |s: &str| s.parse::<usize>().map_err(|e| Error::parse(ctx(), e));
                    let real = |s: &str| s.parse::<f64>().map_err(|e| Error::parse(ctx(), e));
                    let nominal = match f.get(8) {
                        Some(s) => Some(s.parse::<u32>().map_err(|e| Error::parse(ctx(), e))?),
                        None => None,
                    };
                    links.push((
                        int(f[0])?,
                        LinkSpec {
                            src: int(f[1])?,
                            dst: int(f[2])?,
                            max_tx_power_dbm: real(f[3])?,
                            carrier_freq_hz: real(f[4])?,
                            bandwidth_hz: real(f[5])?,
                            tx_directivity_max: real(f[6])?,
                            rx_directivity_max: real(f[7])?,
                            nominal_pkts_per_slot: nominal,
                        },
                    ));
                }
            }
        }

        positions.sort_by_key(|(id, _)| *id);
        for (expect, (id, _)) in positions.iter().enumerate() {
            if *id != expect {
                return Err(Error::Topology(format!("node ids must be dense 0..N-1; missing {expect}")));
            }
        }
        links.sort_by_key(|(id, _)| *id);
        for (expect, (id, _)) in links.iter().enumerate() {
            if *id != expect {
                return Err(Error::Topology(format!("link ids must be dense 0..E-1; missing {expect}")));
            }
        }

        Self::build(
            TopologySpec {
                positions: positions.into_iter().map(|(_, p)| p).collect(),
                links: links.into_iter().map(|(_, l)| l).collect(),
                buffer_capacity,
            },
            rng,
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{FILE_HEADER}");
        let _ = writeln!(out, "buffer_capacity = {}", self.buffer_capacity);
        let _ = writeln!(out, "[nodes]");
        let _ = writeln!(out, "# id x_m y_m");
        for n in &self.nodes {
            let _ = writeln!(out, "{} {:?} {:?}", n.id, n.x, n.y);
        }
        let _ = writeln!(out, "[links]");
        let _ = writeln!(out, "# id src dst max_tx_power_dbm freq_hz bandwidth_hz dt_max dr_max n0");
        for l in &self.links {
            let _ = writeln!(
                out,
                "{} {} {} {:?} {:?} {:?} {:?} {:?} {}",
                l.id,
                l.src,
                l.dst,
                l.max_tx_power_dbm,
                l.carrier_freq_hz,
                l.bandwidth_hz,
                l.tx_directivity_max,
                l.rx_directivity_max,
                l.nominal_pkts_per_slot
            );
        }
        out
    }

    pub fn load(path: &Path, rng: &mut SimRng) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text, rng)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Axial coordinates of the first `n` cells of a hexagonal spiral.
fn hex_spiral(n: usize) -> Vec<(i64, i64)> {
    const DIRS: [(i64, i64); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];
    let mut cells = vec![(0, 0)];
    let mut radius = 1;
    while cells.len() < n {
        let mut cur = (DIRS[4].0 * radius, DIRS[4].1 * radius);
        for dir in DIRS {
            for _ in 0..radius {
                cells.push(cur);
                cur = (cur.0 + dir.0, cur.1 + dir.1);
            }
        }
        radius += 1;
    }
    cells.truncate(n);
    cells
}

/// Minimum spanning tree plus shortest extra pairs; returns `count` undirected
/// edges as `(low, high)` node pairs.
fn select_edges(positions: &[(f64, f64)], count: usize) -> Vec<(NodeId, NodeId)> {
    let n = positions.len();
    let mut pairs: Vec<(f64, NodeId, NodeId)> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let d = (positions[a].0 - positions[b].0).hypot(positions[a].1 - positions[b].1);
            pairs.push((d, a, b));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let mut chosen = vec![false; pairs.len()];
    let mut edges = Vec::with_capacity(count);
    for (i, &(_, a, b)) in pairs.iter().enumerate() {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            chosen[i] = true;
            edges.push((a, b));
        }
    }
    for (i, &(_, a, b)) in pairs.iter().enumerate() {
        if edges.len() >= count {
            break;
        }
        if !chosen[i] {
            edges.push((a, b));
        }
    }
    edges.sort_unstable();
    edges
}

/// Next-hop table over hop-count shortest paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingTable {
    num_nodes: usize,
    next_hop: Vec<Option<LinkId>>,
    hops: Vec<u32>,
}

impl RoutingTable {
    /// Breadth-first hop distances to every destination; the next hop from
    /// `n` toward `d` is the out-link whose head is one hop closer, ties going
    /// to the lowest head node id.
    pub fn compute(t: &Topology) -> Result<Self> {
        let n = t.num_nodes();
        let mut in_links: Vec<Vec<LinkId>> = vec![Vec::new(); n];
        for link in t.links() {
            in_links[link.dst].push(link.id);
        }

        let mut hops = vec![u32::MAX; n * n];
        for dest in 0..n {
            hops[dest * n + dest] = 0;
            let mut queue = VecDeque::from([dest]);
            while let Some(v) = queue.pop_front() {
                let dv = hops[v * n + dest];
                for &l in &in_links[v] {
                    let u = t.link(l).src;
                    if hops[u * n + dest] == u32::MAX {
                        hops[u * n + dest] = dv + 1;
                        queue.push_back(u);
                    }
                }
            }
        }

        let mut next_hop = vec![None; n * n];
        for src in 0..n {
            for dest in 0..n {
                if src == dest {
                    continue;
                }
                let d = hops[src * n + dest];
                if d == u32::MAX {
                    return Err(Error::Unreachable { src, dst: dest });
                }
                next_hop[src * n + dest] = t
                    .out_links(src)
                    .iter()
                    .copied()
                    .filter(|&l| hops[t.link(l).dst * n + dest] + 1 == d)
                    .min_by_key(|&l| t.link(l).dst);
            }
        }

        Ok(Self {
            num_nodes: n,
            next_hop,
            hops,
        })
    }

    /// Outgoing link from `at` toward `dest`; `None` when `at == dest`.
    pub fn next_hop(&self, at: NodeId, dest: NodeId) -> Option<LinkId> {
        self.next_hop[at * self.num_nodes + dest]
    }

    pub fn hop_count(&self, src: NodeId, dest: NodeId) -> u32 {
        self.hops[src * self.num_nodes + dest]
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// The full link sequence from `src` to `dest`.
    pub fn path(&self, t: &Topology, src: NodeId, dest: NodeId) -> Vec<LinkId> {
        let mut path = Vec::new();
        let mut at = src;
        while let Some(l) = self.next_hop(at, dest) {
            path.push(l);
            at = t.link(l).dst;
        }
        path
    }

    pub fn diameter(&self) -> u32 {
        self.hops.iter().copied().max().unwrap_or(0)
    }
}

/// Occupancy over capacity for each buffer, in link-id order.
pub fn buffer_load_fractions(occupancies: &[usize], capacity: usize) -> Vec<f64> {
    occupancies
        .iter()
        .map(|&o| (o as f64 / capacity as f64).clamp(0.0, 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn chain() -> Topology {
        let spec = TopologySpec {
            positions: vec![(0.0, 0.0), (100.0, 0.0), (200.0, 0.0)],
            links: vec![
                LinkSpec::between(0, 1),
                LinkSpec::between(1, 2),
                LinkSpec::between(2, 1),
                LinkSpec::between(1, 0),
            ],
            buffer_capacity: 650,
        };
        Topology::build(spec, &mut seeded(0)).unwrap()
    }

    #[test]
    fn generators_match_published_sizes() {
        for (kind, seed) in [
            (TopologyKind::Small10, 7),
            (TopologyKind::Medium48, 3),
            (TopologyKind::Large96, 1),
        ] {
            let t = Topology::generate(kind, &mut seeded(seed)).unwrap();
            assert_eq!(t.num_nodes(), kind.num_nodes());
            assert_eq!(t.num_links(), kind.num_links());
            assert!(t.is_strongly_connected(), "{kind}");
            assert_eq!(t.buffer_capacity(), 650);
            for l in t.links() {
                assert!((115..=125).contains(&l.nominal_pkts_per_slot));
            }
        }
    }

    #[test]
    fn self_loop_rejected() {
        let spec = TopologySpec {
            positions: vec![(0.0, 0.0), (1.0, 0.0)],
            links: vec![LinkSpec::between(1, 1)],
            buffer_capacity: 10,
        };
        assert!(matches!(Topology::build(spec, &mut seeded(0)), Err(Error::Topology(_))));
    }

    #[test]
    fn duplicate_and_dangling_rejected() {
        let pos = vec![(0.0, 0.0), (1.0, 0.0)];
        let dup = TopologySpec {
            positions: pos.clone(),
            links: vec![LinkSpec::between(0, 1), LinkSpec::between(0, 1)],
            buffer_capacity: 10,
        };
        assert!(Topology::build(dup, &mut seeded(0)).is_err());
        let dangling = TopologySpec {
            positions: pos.clone(),
            links: vec![LinkSpec::between(0, 5)],
            buffer_capacity: 10,
        };
        assert!(Topology::build(dangling, &mut seeded(0)).is_err());
        let mut bad = LinkSpec::between(0, 1);
        bad.bandwidth_hz = 0.0;
        let nonpos = TopologySpec {
            positions: pos,
            links: vec![bad],
            buffer_capacity: 10,
        };
        assert!(Topology::build(nonpos, &mut seeded(0)).is_err());
    }

    #[test]
    fn chain_route_uses_first_hop() {
        let t = chain();
        let r = RoutingTable::compute(&t).unwrap();
        assert_eq!(r.next_hop(0, 2), t.link_between(0, 1));
        assert_eq!(r.hop_count(0, 2), 2);
        assert_eq!(r.next_hop(2, 2), None);
    }

    #[test]
    fn diamond_tie_breaks_to_lowest_node() {
        // A=0, B=1, C=2, D=3; both A->B->D and A->C->D have two hops.
        let spec = TopologySpec {
            positions: vec![(0.0, 0.0), (1.0, 1.0), (1.0, -1.0), (2.0, 0.0)],
            links: vec![
                LinkSpec::between(0, 2),
                LinkSpec::between(0, 1),
                LinkSpec::between(2, 3),
                LinkSpec::between(1, 3),
                LinkSpec::between(3, 0),
            ],
            buffer_capacity: 10,
        };
        let t = Topology::build(spec, &mut seeded(0)).unwrap();
        let r = RoutingTable::compute(&t).unwrap();
        assert_eq!(r.next_hop(0, 3), t.link_between(0, 1));
    }

    #[test]
    fn unreachable_pair_is_named() {
        let spec = TopologySpec {
            positions: vec![(0.0, 0.0), (1.0, 0.0)],
            links: vec![LinkSpec::between(0, 1)],
            buffer_capacity: 10,
        };
        let t = Topology::build(spec, &mut seeded(0)).unwrap();
        match RoutingTable::compute(&t) {
            Err(Error::Unreachable { src: 1, dst: 0 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_fractions() {
        assert_eq!(buffer_load_fractions(&[65, 0, 650], 650), vec![0.1, 0.0, 1.0]);
    }

    #[test]
    fn text_round_trip() {
        let t = Topology::generate(TopologyKind::Medium48, &mut seeded(11)).unwrap();
        let back = Topology::from_text(&t.to_text(), &mut seeded(99)).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn text_rejects_bad_header() {
        assert!(Topology::from_text("topology v9\n", &mut seeded(0)).is_err());
    }

    #[test]
    fn routing_deterministic() {
        let a = Topology::generate(TopologyKind::Large96, &mut seeded(5)).unwrap();
        let b = Topology::generate(TopologyKind::Large96, &mut seeded(5)).unwrap();
        assert_eq!(RoutingTable::compute(&a).unwrap(), RoutingTable::compute(&b).unwrap());
    }
}
