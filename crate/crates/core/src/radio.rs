//! Physical layer: free-space path loss, antenna patterns, link budgets,
//! effective received power under adversarial interference, and the per-slot
//! packet budget that follows from it.
//!
//! Powers are carried in dBm through the link budget and converted to linear
//! milliwatts before interference is subtracted. The effective power is then
//! used directly as an SNR against a unit noise floor in `B·log2(1 + P)`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::topology::{LinkId, Topology};

pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Per-episode thermal noise draw range, dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRange {
    pub min_db: f64,
    pub max_db: f64,
}

impl Default for NoiseRange {
    fn default() -> Self {
        Self {
            min_db: 0.0,
            max_db: 2.0,
        }
    }
}

impl NoiseRange {
    pub fn sample(&self, rng: &mut SimRng) -> f64 {
        if self.max_db > self.min_db {
            rng.random_range(self.min_db..=self.max_db)
        } else {
            self.min_db
        }
    }

    fn validate(&self) -> Result<()> {
        if self.min_db < 0.0 || self.max_db < self.min_db || !self.max_db.is_finite() {
            return Err(Error::Config(format!(
                "noise range [{}, {}] dB must satisfy 0 <= min <= max",
                self.min_db, self.max_db
            )));
        }
        Ok(())
    }
}

/// Free-space path loss in dB, including antenna directivities as gains.
pub fn fspl_db(dist_m: f64, freq_hz: f64, d_t: f64, d_r: f64) -> Result<f64> {
    for (name, v) in [("distance", dist_m), ("frequency", freq_hz), ("d_t", d_t), ("d_r", d_r)] {
        if !(v > 0.0) {
            return Err(Error::Domain(format!("fspl: {name} must be positive, got {v}")));
        }
    }
    let ratio = SPEED_OF_LIGHT / (4.0 * PI * dist_m * freq_hz);
    Ok(-10.0 * (d_t * d_r * ratio * ratio).log10())
}

/// Parabolic-antenna radiation pattern, `theta` in radians off boresight.
pub fn directivity(theta: f64, d_max: f64) -> f64 {
    d_max * (-4.0 * theta * theta / std::f64::consts::SQRT_2).exp()
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Received power in mW from a transmit power, a path loss and a noise term, all in dB.
pub fn received_power_mw(tx_power_dbm: f64, fspl_db: f64, noise_db: f64) -> f64 {
    dbm_to_mw(tx_power_dbm - fspl_db - noise_db)
}

/// `B·log2(1 + p_eff)` in bits/s.
pub fn capacity(p_eff: f64, bandwidth_hz: f64) -> Result<f64> {
    if !(p_eff >= 0.0) {
        return Err(Error::Domain(format!("capacity: effective power must be >= 0, got {p_eff}")));
    }
    Ok(bandwidth_hz * (1.0 + p_eff).log2())
}

/// Unsigned angle between two planar vectors, in `[0, π]`.
fn angle_between(a: (f64, f64), b: (f64, f64)) -> f64 {
    let cross = a.0 * b.1 - a.1 * b.0;
    let dot = a.0 * b.0 + a.1 * b.1;
    cross.atan2(dot).abs()
}

/// Per-episode link budget: full-power received power and capacity per link,
/// plus the nominal packet budget that the capacity ratio scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    received_mw: Vec<f64>,
    capacity_max: Vec<f64>,
    bandwidth_hz: Vec<f64>,
    nominal_pkts: Vec<u32>,
}

impl LinkBudget {
    /// Aligned-beam budget for every link with one noise draw per link.
    pub fn from_topology(t: &Topology, noise: NoiseRange, rng: &mut SimRng) -> Result<Self> {
        noise.validate()?;
        let mut received = Vec::with_capacity(t.num_links());
        for link in t.links() {
            let loss = fspl_db(
                t.link_length(link.id),
                link.carrier_freq_hz,
                directivity(0.0, link.tx_directivity_max),
                directivity(0.0, link.rx_directivity_max),
            )?;
            received.push(received_power_mw(link.max_tx_power_dbm, loss, noise.sample(rng)));
        }
        Self::from_parts(
            received,
            t.links().iter().map(|l| l.bandwidth_hz).collect(),
            t.links().iter().map(|l| l.nominal_pkts_per_slot).collect(),
        )
    }

    pub fn from_parts(received_mw: Vec<f64>, bandwidth_hz: Vec<f64>, nominal_pkts: Vec<u32>) -> Result<Self> {
        let e = received_mw.len();
        if bandwidth_hz.len() != e || nominal_pkts.len() != e {
            return Err(Error::Dimension {
                expected: e,
                got: bandwidth_hz.len().min(nominal_pkts.len()),
            });
        }
        let mut capacity_max = Vec::with_capacity(e);
        for l in 0..e {
            if !(received_mw[l] > 0.0 && received_mw[l].is_finite()) {
                return Err(Error::Domain(format!("link {l}: received power must be positive")));
            }
            capacity_max.push(capacity(received_mw[l], bandwidth_hz[l])?);
        }
        Ok(Self {
            received_mw,
            capacity_max,
            bandwidth_hz,
            nominal_pkts,
        })
    }

    pub fn num_links(&self) -> usize {
        self.received_mw.len()
    }

    pub fn received_mw(&self, l: LinkId) -> f64 {
        self.received_mw[l]
    }

    pub fn capacity_max(&self, l: LinkId) -> f64 {
        self.capacity_max[l]
    }

    pub fn bandwidth(&self, l: LinkId) -> f64 {
        self.bandwidth_hz[l]
    }

    pub fn nominal_pkts(&self, l: LinkId) -> u32 {
        self.nominal_pkts[l]
    }

    pub fn max_received_mw(&self) -> f64 {
        self.received_mw.iter().copied().fold(0.0, f64::max)
    }

    /// Packets per slot for link `l` at a given effective power: the nominal
    /// budget scaled by realized over full-power capacity.
    pub fn packets_at(&self, l: LinkId, p_eff: f64) -> u32 {
        if p_eff <= 0.0 {
            return 0;
        }
        let c = self.bandwidth_hz[l] * (1.0 + p_eff).log2();
        let ratio = (c / self.capacity_max[l]).min(1.0);
        (self.nominal_pkts[l] as f64 * ratio).floor() as u32
    }
}

/// Pairwise interference at full power: `get(l, k)` is the power (mW) that
/// link `k` induces on link `l`'s receiver. Fixed for an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceMatrix {
    n: usize,
    data: Vec<f64>,
    level: Option<f64>,
}

impl InterferenceMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
            level: None,
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (l, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, got: row.len() });
            }
            for (k, v) in row.into_iter().enumerate() {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::Domain(format!("interference ({l},{k}) must be finite and >= 0, got {v}")));
                }
                data.push(if k == l { 0.0 } else { v });
            }
        }
        Ok(Self { n, data, level: None })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn level(&self) -> Option<f64> {
        self.level
    }

    pub fn get(&self, victim: LinkId, interferer: LinkId) -> f64 {
        self.data[victim * self.n + interferer]
    }

    /// Interference on `victim` from every link, indexed by interferer.
    pub fn row(&self, victim: LinkId) -> &[f64] {
        &self.data[victim * self.n..(victim + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Writes the matrix as CSV: a header row of link ids, then one row of
    /// linear mW values per victim link.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record((0..self.n).map(|l| l.to_string()))?;
        for l in 0..self.n {
            wr.write_record(self.row(l).iter().map(|v| v.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header = rd.headers()?.clone();
        for (i, h) in header.iter().enumerate() {
            if h.trim().parse::<usize>().ok() != Some(i) {
                return Err(Error::parse("interference csv header", format!("expected link id {i}, found `{h}`")));
            }
        }
        let mut rows = Vec::new();
        for (ln, rec) in rd.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(format!("interference csv row {}", ln + 1), e))?;
            rows.push(row);
        }
        if rows.len() != header.len() {
            return Err(Error::Dimension {
                expected: header.len(),
                got: rows.len(),
            });
        }
        Self::from_rows(rows)
    }
}

/// `max(0, p_l·P_R(l) − Σ_{k≠l} p_k·I(l,k))` in mW.
pub fn effective_power(l: LinkId, powers: &[f64], budget: &LinkBudget, interference: &InterferenceMatrix) -> f64 {
    raw_effective_power(l, powers, budget, interference).max(0.0)
}

/// Effective power before the floor at zero.
pub(crate) fn raw_effective_power(
    l: LinkId,
    powers: &[f64],
    budget: &LinkBudget,
    interference: &InterferenceMatrix,
) -> f64 {
    let row = interference.row(l);
    let mut total = 0.0;
    for (k, (&p, &i)) in powers.iter().zip(row).enumerate() {
        if k != l {
            total += p * i;
        }
    }
    powers[l] * budget.received_mw(l) - total
}

/// Packets link `l` can move this slot under the given power vector.
pub fn packets_per_slot(l: LinkId, powers: &[f64], budget: &LinkBudget, interference: &InterferenceMatrix) -> u32 {
    budget.packets_at(l, effective_power(l, powers, budget, interference))
}

/// Per-link packet budgets for a whole decision.
pub fn slot_budgets(powers: &[f64], budget: &LinkBudget, interference: &InterferenceMatrix) -> Vec<u32> {
    (0..powers.len())
        .map(|l| packets_per_slot(l, powers, budget, interference))
        .collect()
}

/// Interference from node geometry: each entry is the power link `k`'s
/// transmitter delivers at link `l`'s receiver at full power, with both
/// antennas evaluated at their off-boresight angles and a fresh noise draw
/// per entry.
///
/// A transmitter co-located with the victim's receiver blocks it outright
/// (entry set to the victim's full received power).
pub fn gen_interference_geometric(
    t: &Topology,
    budget: &LinkBudget,
    noise: NoiseRange,
    rng: &mut SimRng,
) -> Result<InterferenceMatrix> {
    noise.validate()?;
    let n = t.num_links();
    let nodes = t.nodes();
    let vec = |a: usize, b: usize| (nodes[b].x - nodes[a].x, nodes[b].y - nodes[a].y);
    let mut data = vec![0.0; n * n];
    for victim in t.links() {
        let (i, j) = (victim.src, victim.dst);
        for agg in t.links() {
            if agg.id == victim.id {
                continue;
            }
            let (k, m) = (agg.src, agg.dst);
            let value = if k == j {
                budget.received_mw(victim.id)
            } else {
                let theta_t = angle_between(vec(k, m), vec(k, j));
                let theta_r = angle_between(vec(j, i), vec(j, k));
                let loss = fspl_db(
                    t.distance(k, j),
                    agg.carrier_freq_hz,
                    directivity(theta_t, agg.tx_directivity_max),
                    directivity(theta_r, victim.rx_directivity_max),
                )?;
                received_power_mw(agg.max_tx_power_dbm, loss, noise.sample(rng))
            };
            data[victim.id * n + agg.id] = value;
        }
    }
    Ok(InterferenceMatrix { n, data, level: None })
}

/// Upper end of the per-entry multiplier in synthetic mode.
pub const SYNTHETIC_SPREAD: f64 = 1.1;

/// Level-scaled interference: `I(l,k) = level·P_R(l)·u`, `u ~ U[1, 1.1]`.
///
/// At level 1 any single full-power interferer cancels the victim completely.
pub fn gen_interference_synthetic(budget: &LinkBudget, level: f64, rng: &mut SimRng) -> Result<InterferenceMatrix> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::Domain(format!("interference level must be in [0, 1], got {level}")));
    }
    let n = budget.num_links();
    let mut data = vec![0.0; n * n];
    for l in 0..n {
        let base = level * budget.received_mw(l);
        for k in 0..n {
            if k != l {
                data[l * n + k] = base * rng.random_range(1.0..=SYNTHETIC_SPREAD);
            }
        }
    }
    Ok(InterferenceMatrix {
        n,
        data,
        level: Some(level),
    })
}
