//! Slot-stepped packet simulation over the mesh.
//!
//! A slot runs in two phases. First every link, in ascending id order,
//! dequeues up to its packet budget from its own buffer. Then the departed
//! packets arrive, in link-id and FIFO order: a packet at its destination is
//! delivered, any other packet joins the buffer toward its next hop or is
//! dropped when that buffer is full. Packets that arrive in a slot never
//! depart again in the same slot.

use std::collections::VecDeque;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decision::ScheduleDecision;
use crate::error::{Error, Result};
use crate::radio::{slot_budgets, InterferenceMatrix, LinkBudget};
use crate::rng::{seeded, SimRng};
use crate::topology::{LinkId, NodeId, RoutingTable, Topology};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub id: u64,
    pub src: NodeId,
    pub dst: NodeId,
    pub hops_taken: u32,
    pub created_slot: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorkloadKind {
    Uniform,
    FewToMany,
    ManyToFew,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 3] = [Self::Uniform, Self::FewToMany, Self::ManyToFew];

    pub fn name(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::FewToMany => "few-to-many",
            Self::ManyToFew => "many-to-few",
        }
    }
}

impl FromStr for WorkloadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "few-to-many" => Ok(Self::FewToMany),
            "many-to-few" => Ok(Self::ManyToFew),
            other => Err(Error::Config(format!("unknown workload `{other}`"))),
        }
    }
}

impl std::fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Source/destination sampler for one workload realization. The skewed
/// workloads fix a random 10% subset (at least one node) once, and draw the
/// other side from its complement.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSampler {
    kind: WorkloadKind,
    sources: Vec<NodeId>,
    dests: Vec<NodeId>,
}

impl WorkloadSampler {
    pub fn new(kind: WorkloadKind, num_nodes: usize, rng: &mut SimRng) -> Result<Self> {
        if num_nodes < 2 {
            return Err(Error::Traffic("traffic needs at least two nodes".into()));
        }
        let all: Vec<NodeId> = (0..num_nodes).collect();
        let (sources, dests) = match kind {
            WorkloadKind::Uniform => (all.clone(), all),
            WorkloadKind::FewToMany | WorkloadKind::ManyToFew => {
                let few_count = ((num_nodes as f64) * 0.1).ceil().max(1.0) as usize;
                let mut shuffled = all;
                shuffled.shuffle(rng);
                let mut few = shuffled[..few_count].to_vec();
                let mut many = shuffled[few_count..].to_vec();
                few.sort_unstable();
                many.sort_unstable();
                if kind == WorkloadKind::FewToMany {
                    (few, many)
                } else {
                    (many, few)
                }
            }
        };
        if sources.is_empty() || dests.is_empty() {
            return Err(Error::Traffic(format!("{kind} workload has an empty node subset")));
        }
        Ok(Self { kind, sources, dests })
    }

    pub fn kind(&self) -> WorkloadKind {
        self.kind
    }

    pub fn sources(&self) -> &[NodeId] {
        &self.sources
    }

    pub fn destinations(&self) -> &[NodeId] {
        &self.dests
    }

    /// One `(source, destination)` pair with `source != destination`.
    pub fn sample(&self, rng: &mut SimRng) -> (NodeId, NodeId) {
        let src = self.sources[rng.random_range(0..self.sources.len())];
        loop {
            let dst = self.dests[rng.random_range(0..self.dests.len())];
            if dst != src {
                return (src, dst);
            }
        }
    }
}

/// Packet counts per ordered node pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrafficMatrix {
    n: usize,
    demand: Vec<u64>,
    total: u64,
}

impl TrafficMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            demand: vec![0; n * n],
            total: 0,
        }
    }

    pub fn add(&mut self, src: NodeId, dst: NodeId, count: u64) -> Result<()> {
        if src >= self.n || dst >= self.n {
            return Err(Error::Traffic(format!("pair ({src},{dst}) outside {} nodes", self.n)));
        }
        if src == dst && count > 0 {
            return Err(Error::Traffic(format!("traffic from node {src} to itself")));
        }
        self.demand[src * self.n + dst] += count;
        self.total += count;
        Ok(())
    }

    pub fn get(&self, src: NodeId, dst: NodeId) -> u64 {
        self.demand[src * self.n + dst]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    /// Non-zero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (NodeId, NodeId, u64)> + '_ {
        self.demand
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (i / self.n, i % self.n, c))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["src", "dst", "count"])?;
        for (s, d, c) in self.entries() {
            wr.write_record([s.to_string(), d.to_string(), c.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, num_nodes: usize) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            src: usize,
            dst: usize,
            count: u64,
        }
        let mut rd = csv::Reader::from_reader(r);
        let mut m = Self::zeros(num_nodes);
        for row in rd.deserialize() {
            let row: Row = row?;
            m.add(row.src, row.dst, row.count)?;
        }
        Ok(m)
    }
}

/// Draws exactly `total` packets from the workload distribution.
pub fn gen_traffic(t: &Topology, kind: WorkloadKind, total: u64, rng: &mut SimRng) -> Result<TrafficMatrix> {
    let sampler = WorkloadSampler::new(kind, t.num_nodes(), rng)?;
    let mut m = TrafficMatrix::zeros(t.num_nodes());
    for _ in 0..total {
        let (s, d) = sampler.sample(rng);
        m.add(s, d, 1)?;
    }
    Ok(m)
}

/// Accounting for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StepOutcome {
    pub slot: u64,
    /// Packets queued before the slot started.
    pub in_system_before: u64,
    /// Packets that left a buffer over an active link.
    pub moved: u64,
    /// Moved packets that found the next buffer full.
    pub dropped: u64,
    /// Moved packets that reached their destination.
    pub delivered: u64,
    /// Slots the delivered packets spent beyond their shortest-path hop count.
    pub excess_delay: u64,
}

/// Running totals for an episode. `dropped` includes injection overflow,
/// which is also reported on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EpisodeTotals {
    pub injected: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub injection_dropped: u64,
    pub moved: u64,
    pub slots: u64,
}

/// Queue lengths per `(node, neighbor)` as reported to the controller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandVectors {
    per_link: Vec<usize>,
    per_node: Vec<Vec<(NodeId, usize)>>,
}

impl DemandVectors {
    pub fn from_link_counts(t: &Topology, per_link: Vec<usize>) -> Self {
        let per_node = (0..t.num_nodes())
            .map(|n| t.out_links(n).iter().map(|&l| (t.link(l).dst, per_link[l])).collect())
            .collect();
        Self { per_link, per_node }
    }

    pub fn per_link(&self) -> &[usize] {
        &self.per_link
    }

    /// `v_i`: queued packets from node `i` toward each neighbor.
    pub fn node(&self, i: NodeId) -> &[(NodeId, usize)] {
        &self.per_node[i]
    }

    pub fn toward(&self, i: NodeId, neighbor: NodeId) -> Option<usize> {
        self.per_node[i].iter().find(|(j, _)| *j == neighbor).map(|(_, c)| *c)
    }

    pub fn total(&self) -> usize {
        self.per_link.iter().sum()
    }
}

/// One episode: immutable topology and routes, per-episode radio state, and
/// the mutable buffers.
#[derive(Debug, Clone)]
pub struct EpisodeState {
    topology: Arc<Topology>,
    routes: Arc<RoutingTable>,
    budget: LinkBudget,
    interference: InterferenceMatrix,
    buffers: Vec<VecDeque<Packet>>,
    queued: u64,
    slot: u64,
    totals: EpisodeTotals,
    next_packet: u64,
    rng: SimRng,
}

impl EpisodeState {
    pub fn empty(
        topology: Arc<Topology>,
        routes: Arc<RoutingTable>,
        budget: LinkBudget,
        interference: InterferenceMatrix,
        seed: u64,
    ) -> Result<Self> {
        let e = topology.num_links();
        if budget.num_links() != e {
            return Err(Error::Dimension {
                expected: e,
                got: budget.num_links(),
            });
        }
        if interference.len() != e {
            return Err(Error::Dimension {
                expected: e,
                got: interference.len(),
            });
        }
        Ok(Self {
            buffers: vec![VecDeque::new(); e],
            topology,
            routes,
            budget,
            interference,
            queued: 0,
            slot: 0,
            totals: EpisodeTotals::default(),
            next_packet: 0,
            rng: seeded(seed),
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn routes(&self) -> &RoutingTable {
        &self.routes
    }

    pub fn budget(&self) -> &LinkBudget {
        &self.budget
    }

    pub fn interference(&self) -> &InterferenceMatrix {
        &self.interference
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn totals(&self) -> EpisodeTotals {
        self.totals
    }

    /// Packets currently waiting in any buffer.
    pub fn in_system(&self) -> u64 {
        self.queued
    }

    pub fn buffer(&self, l: LinkId) -> &VecDeque<Packet> {
        &self.buffers[l]
    }

    pub fn occupancies(&self) -> Vec<usize> {
        self.buffers.iter().map(VecDeque::len).collect()
    }

    pub fn is_terminal(&self) -> bool {
        self.queued == 0
    }

    /// `injected = delivered + dropped + queued`.
    pub fn conservation_holds(&self) -> bool {
        let queued: u64 = self.buffers.iter().map(|b| b.len() as u64).sum();
        queued == self.queued && self.totals.injected == self.totals.delivered + self.totals.dropped + queued
    }

    /// Creates a packet at `src` and queues it toward its first hop. Returns
    /// `false` when the first-hop buffer is full and the packet was dropped.
    pub fn inject_packet(&mut self, src: NodeId, dst: NodeId) -> Result<bool> {
        let n = self.topology.num_nodes();
        if src >= n || dst >= n || src == dst {
            return Err(Error::Traffic(format!("cannot inject packet {src} -> {dst}")));
        }
        let link = self
            .routes
            .next_hop(src, dst)
            .ok_or(Error::Unreachable { src, dst })?;
        let packet = Packet {
            id: self.next_packet,
            src,
            dst,
            hops_taken: 0,
            created_slot: self.slot,
        };
        self.next_packet += 1;
        self.totals.injected += 1;
        if self.buffers[link].len() < self.topology.buffer_capacity() {
            self.buffers[link].push_back(packet);
            self.queued += 1;
            Ok(true)
        } else {
            self.totals.dropped += 1;
            self.totals.injection_dropped += 1;
            Ok(false)
        }
    }

    /// Places every packet of `traffic` at its source in a seeded random order.
    pub fn inject_traffic(&mut self, traffic: &TrafficMatrix) -> Result<u64> {
        if traffic.num_nodes() != self.topology.num_nodes() {
            return Err(Error::Dimension {
                expected: self.topology.num_nodes(),
                got: traffic.num_nodes(),
            });
        }
        let mut pairs = Vec::with_capacity(traffic.total() as usize);
        for (s, d, c) in traffic.entries() {
            pairs.extend(std::iter::repeat_n((s, d), c as usize));
        }
        pairs.shuffle(&mut self.rng);
        let mut dropped = 0;
        for (s, d) in pairs {
            if !self.inject_packet(s, d)? {
                dropped += 1;
            }
        }
        Ok(dropped)
    }

    /// Adds `rate` packets drawn from `sampler`; overflow counts as drops.
    pub fn inject_continuous(&mut self, rate: u64, sampler: &WorkloadSampler) -> Result<u64> {
        for _ in 0..rate {
            let (s, d) = sampler.sample(&mut self.rng);
            self.inject_packet(s, d)?;
        }
        Ok(rate)
    }

    /// Per-link packet budgets this slot under `decision`.
    pub fn link_budgets(&self, decision: &ScheduleDecision) -> Vec<u32> {
        slot_budgets(decision.powers(), &self.budget, &self.interference)
    }

    fn check_decision(&self, decision: &ScheduleDecision) -> Result<()> {
        if decision.len() != self.topology.num_links() {
            return Err(Error::DecisionLength {
                expected: self.topology.num_links(),
                got: decision.len(),
            });
        }
        Ok(())
    }

    /// Runs one slot under `decision`.
    pub fn apply_schedule(&mut self, decision: &ScheduleDecision) -> Result<StepOutcome> {
        self.check_decision(decision)?;
        let budgets = self.link_budgets(decision);
        let mut outcome = StepOutcome {
            slot: self.slot,
            in_system_before: self.queued,
            ..StepOutcome::default()
        };

        let mut departed: Vec<(LinkId, Packet)> = Vec::new();
        for (l, &b) in budgets.iter().enumerate() {
            let take = (b as usize).min(self.buffers[l].len());
            departed.extend(self.buffers[l].drain(..take).map(|p| (l, p)));
        }
        outcome.moved = departed.len() as u64;
        self.queued -= outcome.moved;

        let capacity = self.topology.buffer_capacity();
        for (l, mut packet) in departed {
            packet.hops_taken += 1;
            let at = self.topology.link(l).dst;
            if at == packet.dst {
                let steps = self.slot + 1 - packet.created_slot;
                let shortest = self.routes.hop_count(packet.src, packet.dst) as u64;
                outcome.excess_delay += steps.saturating_sub(shortest);
                outcome.delivered += 1;
                continue;
            }
            let next = self
                .routes
                .next_hop(at, packet.dst)
                .expect("routing table covers every ordered pair");
            if self.buffers[next].len() < capacity {
                self.buffers[next].push_back(packet);
                self.queued += 1;
            } else {
                outcome.dropped += 1;
            }
        }

        self.totals.delivered += outcome.delivered;
        self.totals.dropped += outcome.dropped;
        self.totals.moved += outcome.moved;
        self.totals.slots += 1;
        self.slot += 1;
        debug_assert!(self.conservation_holds());
        Ok(outcome)
    }

    pub fn demand_vectors(&self) -> DemandVectors {
        DemandVectors::from_link_counts(&self.topology, self.occupancies())
    }

    /// The controller's estimate of the buffers at the start of the next slot
    /// if `current` runs now: occupancy minus departures plus forwarded
    /// arrivals, clamped to the buffer capacity.
    pub fn predict_demand(&self, current: &ScheduleDecision) -> Result<DemandVectors> {
        self.check_decision(current)?;
        let budgets = self.link_budgets(current);
        let mut next: Vec<i64> = self.buffers.iter().map(|b| b.len() as i64).collect();
        for (l, &b) in budgets.iter().enumerate() {
            let take = (b as usize).min(self.buffers[l].len());
            next[l] -= take as i64;
            let at = self.topology.link(l).dst;
            for p in self.buffers[l].iter().take(take) {
                if let Some(hop) = self.routes.next_hop(at, p.dst) {
                    next[hop] += 1;
                }
            }
        }
        let cap = self.topology.buffer_capacity() as i64;
        let counts = next.into_iter().map(|v| v.clamp(0, cap) as usize).collect();
        Ok(DemandVectors::from_link_counts(&self.topology, counts))
    }
}

/// Builds an episode and injects `traffic` into it.
pub fn init_episode(
    topology: Arc<Topology>,
    routes: Arc<RoutingTable>,
    traffic: &TrafficMatrix,
    budget: LinkBudget,
    interference: InterferenceMatrix,
    seed: u64,
) -> Result<EpisodeState> {
    let mut st = EpisodeState::empty(topology, routes, budget, interference, seed)?;
    st.inject_traffic(traffic)?;
    Ok(st)
}

/// Per-slot CSV log: `slot,P,M,D,delivered`.
pub struct StepLog<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> StepLog<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(["slot", "P", "M", "D", "delivered"])?;
        Ok(Self { writer })
    }

    pub fn record(&mut self, o: &StepOutcome) -> Result<()> {
        self.writer.write_record([
            o.slot.to_string(),
            o.in_system_before.to_string(),
            o.moved.to_string(),
            o.dropped.to_string(),
            o.delivered.to_string(),
        ])?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.writer.flush()?;
        self.writer
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::InterferenceMatrix;
    use crate::topology::{LinkSpec, TopologyKind, TopologySpec};

    fn build(positions: Vec<(f64, f64)>, links: &[(usize, usize)], capacity: usize) -> (Arc<Topology>, Arc<RoutingTable>) {
        let spec = TopologySpec {
            positions,
            links: links.iter().map(|&(a, b)| LinkSpec::between(a, b).with_nominal(120)).collect(),
            buffer_capacity: capacity,
        };
        let t = Topology::build(spec, &mut seeded(0)).unwrap();
        let r = RoutingTable::compute(&t).unwrap();
        (Arc::new(t), Arc::new(r))
    }

    fn quiet_episode(t: &Arc<Topology>, r: &Arc<RoutingTable>) -> EpisodeState {
        let e = t.num_links();
        let budget = LinkBudget::from_parts(vec![10.0; e], vec![1.0; e], vec![120; e]).unwrap();
        EpisodeState::empty(t.clone(), r.clone(), budget, InterferenceMatrix::zeros(e), 1).unwrap()
    }

    fn chain3() -> (Arc<Topology>, Arc<RoutingTable>) {
        build(
            vec![(0.0, 0.0), (100.0, 0.0), (200.0, 0.0)],
            &[(0, 1), (1, 2), (2, 1), (1, 0)],
            650,
        )
    }

    fn power(e: usize, on: &[usize]) -> ScheduleDecision {
        let mut p = vec![0.0; e];
        for &l in on {
            p[l] = 1.0;
        }
        ScheduleDecision::new(p).unwrap()
    }

    #[test]
    fn init_without_overflow() {
        let (t, r) = chain3();
        let mut tm = TrafficMatrix::zeros(3);
        tm.add(0, 2, 10).unwrap();
        let st = quiet_episode(&t, &r);
        let mut st2 = st.clone();
        assert_eq!(st2.inject_traffic(&tm).unwrap(), 0);
        assert_eq!(st2.in_system(), 10);
        let dv = st2.demand_vectors();
        assert_eq!(dv.toward(0, 1), Some(10));
        assert_eq!(dv.total(), 10);
        assert!(st.demand_vectors().per_link().iter().all(|&c| c == 0));
    }

    #[test]
    fn injection_overflow_drops() {
        let (t, r) = chain3();
        let mut tm = TrafficMatrix::zeros(3);
        tm.add(0, 1, 700).unwrap();
        let mut st = quiet_episode(&t, &r);
        assert_eq!(st.inject_traffic(&tm).unwrap(), 50);
        assert_eq!(st.totals().injection_dropped, 50);
        assert_eq!(st.in_system(), 650);
        assert!(st.conservation_holds());
    }

    #[test]
    fn idle_slot_moves_nothing() {
        let (t, r) = chain3();
        let mut st = quiet_episode(&t, &r);
        for _ in 0..5 {
            st.inject_packet(0, 2).unwrap();
        }
        let before = st.occupancies();
        let o = st.apply_schedule(&ScheduleDecision::idle(4)).unwrap();
        assert_eq!((o.moved, o.dropped), (0, 0));
        assert_eq!(st.occupancies(), before);
    }

    #[test]
    fn queue_limited_link() {
        let (t, r) = chain3();
        let mut st = quiet_episode(&t, &r);
        for _ in 0..5 {
            st.inject_packet(0, 2).unwrap();
        }
        let l01 = t.link_between(0, 1).unwrap();
        let o = st.apply_schedule(&power(4, &[l01])).unwrap();
        assert_eq!(o.moved, 5);
        assert_eq!(o.in_system_before, 5);
        assert_eq!(st.buffer(t.link_between(1, 2).unwrap()).len(), 5);
    }

    #[test]
    fn one_hop_per_slot() {
        let (t, r) = chain3();
        let mut st = quiet_episode(&t, &r);
        st.inject_packet(0, 2).unwrap();
        let o = st.apply_schedule(&ScheduleDecision::full(4)).unwrap();
        assert_eq!((o.moved, o.delivered), (1, 0));
        let o = st.apply_schedule(&ScheduleDecision::full(4)).unwrap();
        assert_eq!((o.moved, o.delivered), (1, 1));
        assert!(st.is_terminal());
    }

    #[test]
    fn downstream_overflow_hand_trace() {
        // Links 0->2 and 1->2 both feed buffer 2->3 (capacity 10, 7 queued).
        let (t, r) = build(
            vec![(0.0, 0.0), (0.0, 100.0), (100.0, 50.0), (200.0, 50.0)],
            &[(0, 2), (1, 2), (2, 3), (3, 0), (3, 1)],
            10,
        );
        let mut st = quiet_episode(&t, &r);
        for _ in 0..7 {
            st.inject_packet(2, 3).unwrap();
        }
        for _ in 0..5 {
            st.inject_packet(0, 3).unwrap();
            st.inject_packet(1, 3).unwrap();
        }
        let first_from_a: Vec<u64> = st.buffer(0).iter().take(3).map(|p| p.id).collect();
        let o = st.apply_schedule(&power(5, &[0, 1])).unwrap();
        assert_eq!(o.moved, 10);
        assert_eq!(o.dropped, 7);
        assert_eq!(o.delivered, 0);
        let tail: Vec<u64> = st.buffer(2).iter().skip(7).map(|p| p.id).collect();
        assert_eq!(tail, first_from_a);
        assert!(st.conservation_holds());
    }

    #[test]
    fn fifo_departures() {
        let (t, r) = chain3();
        let mut st = quiet_episode(&t, &r);
        for _ in 0..4 {
            st.inject_packet(0, 1).unwrap();
        }
        let ids: Vec<u64> = st.buffer(0).iter().map(|p| p.id).collect();
        assert_eq!(ids, vec![0, 1, 2, 3]);
    }

    #[test]
    fn predict_demand_cases() {
        let (t, r) = chain3();
        let l01 = t.link_between(0, 1).unwrap();
        let l12 = t.link_between(1, 2).unwrap();
        let mut st = quiet_episode(&t, &r);
        for _ in 0..100 {
            st.inject_packet(1, 2).unwrap();
        }
        let idle = ScheduleDecision::idle(4);
        assert_eq!(st.predict_demand(&idle).unwrap(), st.demand_vectors());
        let pred = st.predict_demand(&power(4, &[l12])).unwrap();
        assert_eq!(pred.per_link()[l12], 0);

        // Inflow 50 over 0->1, outflow 30 over 1->2 at a reduced budget.
        let e = 4;
        let budget = LinkBudget::from_parts(vec![10.0; e], vec![1.0; e], vec![120, 30, 120, 120]).unwrap();
        let mut st2 = EpisodeState::empty(t.clone(), r.clone(), budget, InterferenceMatrix::zeros(e), 1).unwrap();
        for _ in 0..50 {
            st2.inject_packet(0, 2).unwrap();
        }
        for _ in 0..100 {
            st2.inject_packet(1, 2).unwrap();
        }
        let pred = st2.predict_demand(&power(4, &[l01, l12])).unwrap();
        assert_eq!(pred.per_link()[l12], 120);
        assert_eq!(pred.per_link()[l01], 0);
    }

    #[test]
    fn terminal_states() {
        let (t, r) = chain3();
        let mut st = quiet_episode(&t, &r);
        assert!(st.is_terminal());
        st.inject_packet(0, 1).unwrap();
        assert!(!st.is_terminal());
    }

    #[test]
    fn decision_length_checked() {
        let (t, r) = chain3();
        let mut st = quiet_episode(&t, &r);
        assert!(matches!(
            st.apply_schedule(&ScheduleDecision::idle(3)),
            Err(Error::DecisionLength { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn traffic_totals_and_subsets() {
        let t = Topology::generate(TopologyKind::Large96, &mut seeded(1)).unwrap();
        let tm = gen_traffic(&t, WorkloadKind::ManyToFew, 57_600, &mut seeded(2)).unwrap();
        assert_eq!(tm.total(), 57_600);
        let dests: std::collections::BTreeSet<_> = tm.entries().map(|(_, d, _)| d).collect();
        assert!(dests.len() <= 4);
        let small = Topology::generate(TopologyKind::Small10, &mut seeded(7)).unwrap();
        assert_eq!(gen_traffic(&small, WorkloadKind::Uniform, 2304, &mut seeded(3)).unwrap().total(), 2304);
        assert_eq!(gen_traffic(&small, WorkloadKind::Uniform, 0, &mut seeded(3)).unwrap().total(), 0);
    }

    #[test]
    fn continuous_injection_counts() {
        let (t, r) = chain3();
        let mut st = quiet_episode(&t, &r);
        let sampler = WorkloadSampler::new(WorkloadKind::Uniform, 3, &mut seeded(4)).unwrap();
        assert_eq!(st.inject_continuous(0, &sampler).unwrap(), 0);
        let mut injected = 0;
        for _ in 0..100 {
            injected += st.inject_continuous(10, &sampler).unwrap();
            st.apply_schedule(&ScheduleDecision::full(4)).unwrap();
        }
        assert_eq!(injected, 1000);
        assert_eq!(st.totals().injected, 1000);
        assert!(st.conservation_holds());
    }

    #[test]
    fn traffic_csv_round_trip() {
        let small = Topology::generate(TopologyKind::Small10, &mut seeded(7)).unwrap();
        let tm = gen_traffic(&small, WorkloadKind::FewToMany, 1800, &mut seeded(3)).unwrap();
        let mut buf = Vec::new();
        tm.write_csv(&mut buf).unwrap();
        assert_eq!(TrafficMatrix::read_csv(buf.as_slice(), 4).unwrap(), tm);
    }

    #[test]
    fn step_log_format() {
        let mut log = StepLog::new(Vec::new()).unwrap();
        log.record(&StepOutcome {
            slot: 3,
            in_system_before: 10,
            moved: 4,
            dropped: 1,
            delivered: 2,
            excess_delay: 0,
        })
        .unwrap();
        let text = String::from_utf8(log.finish().unwrap()).unwrap();
        assert_eq!(text, "slot,P,M,D,delivered\n3,10,4,1,2\n");
    }
}
