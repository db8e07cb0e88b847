//! Residual-profit greedy link scheduler.
//!
//! Links are visited once each in random order. For a candidate link `l` and
//! every power level `p` the scheduler computes
//!
//! * the capacity gain `C+`: packets `l` would move at `p` given the
//!   interference from the links already selected, capped by its queue;
//! * the capacity loss `C-`: packets the already selected links would lose
//!   because `l` transmits at `p`;
//!
//! and keeps `l` at the power maximizing `C+ − C-` if that residual profit is
//! positive. Each candidate re-evaluates the effective power of every
//! selected victim against the full power vector, so a decision costs
//! `O(E³ · levels)`.

use rand::seq::SliceRandom;

use crate::decision::{power_grid, ScheduleDecision};
use crate::radio::{effective_power, InterferenceMatrix, LinkBudget};
use crate::rng::SimRng;
use crate::topology::LinkId;

/// How the capacity loss of victim links is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossModel {
    /// Drop in effective power times the victim's packets-per-mW at full
    /// power, `(P_old − P_new) · N0 / P_R`, capped by the victim's current
    /// estimated deliverable packets.
    #[default]
    Linear,
    /// Recompute the victim's deliverable packets under the new power vector.
    Exact,
}

/// One accepted link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub link: LinkId,
    pub power: f64,
    pub gain: f64,
    pub loss: f64,
}

impl Selection {
    pub fn residual_profit(&self) -> f64 {
        self.gain - self.loss
    }
}

/// Record of one greedy construction, for inspection and invariant checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GreedyTrace {
    /// Order in which links were drawn.
    pub visit_order: Vec<LinkId>,
    pub selections: Vec<Selection>,
    /// Greedy's own estimate of the packets moved by the selected set,
    /// summed over its members after each acceptance.
    pub estimated_aggregate: Vec<f64>,
    /// Deliverable packets of the selected set recomputed from the physical
    /// model after each acceptance.
    pub physical_aggregate: Vec<u64>,
}

/// Deliverable packets for link `l` at effective power `p_eff`.
fn deliverable(l: LinkId, p_eff: f64, queues: &[usize], budget: &LinkBudget) -> u32 {
    budget.packets_at(l, p_eff).min(queues[l].min(u32::MAX as usize) as u32)
}

/// Power vector of a selection set.
fn powers_of(selected: &[(LinkId, f64)], num_links: usize) -> Vec<f64> {
    let mut p = vec![0.0; num_links];
    for &(l, q) in selected {
        p[l] = q;
    }
    p
}

/// `C+` for adding `l` at power `p` to the selected set.
pub fn capacity_gain(
    l: LinkId,
    p: f64,
    selected: &[(LinkId, f64)],
    queues: &[usize],
    budget: &LinkBudget,
    interference: &InterferenceMatrix,
) -> u32 {
    let mut powers = powers_of(selected, budget.num_links());
    powers[l] = p;
    deliverable(l, effective_power(l, &powers, budget, interference), queues, budget)
}

/// `C-` for adding `l` at power `p` to the selected set, estimating each
/// victim's current deliverable packets from the physical model.
pub fn capacity_loss(
    l: LinkId,
    p: f64,
    selected: &[(LinkId, f64)],
    queues: &[usize],
    budget: &LinkBudget,
    interference: &InterferenceMatrix,
    model: LossModel,
) -> f64 {
    let mut powers = powers_of(selected, budget.num_links());
    let victims: Vec<Victim> = selected
        .iter()
        .map(|&(v, _)| {
            let p_eff = effective_power(v, &powers, budget, interference);
            Victim {
                link: v,
                p_eff,
                estimate: deliverable(v, p_eff, queues, budget) as f64,
            }
        })
        .collect();
    loss_against(l, p, &victims, &mut powers, queues, budget, interference, model)
}

#[derive(Debug, Clone, Copy)]
struct Victim {
    link: LinkId,
    /// Effective power under the current selection.
    p_eff: f64,
    /// Estimated deliverable packets under the current selection.
    estimate: f64,
}

/// Capacity loss against cached victim state. `powers` is the current
/// selection's power vector; it is restored before returning.
#[allow(clippy::too_many_arguments)]
fn loss_against(
    l: LinkId,
    p: f64,
    victims: &[Victim],
    powers: &mut [f64],
    queues: &[usize],
    budget: &LinkBudget,
    interference: &InterferenceMatrix,
    model: LossModel,
) -> f64 {
    let saved = powers[l];
    powers[l] = p;
    let mut loss = 0.0;
    for v in victims {
        let p_new = effective_power(v.link, powers, budget, interference);
        let term = match model {
            LossModel::Linear => {
                let per_mw = budget.nominal_pkts(v.link) as f64 / budget.received_mw(v.link);
                ((v.p_eff - p_new) * per_mw).min(v.estimate)
            }
            LossModel::Exact => v.estimate - deliverable(v.link, p_new, queues, budget) as f64,
        };
        loss += term.max(0.0);
    }
    powers[l] = saved;
    loss
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyScheduler {
    levels: Vec<f64>,
    model: LossModel,
}

impl Default for GreedyScheduler {
    fn default() -> Self {
        Self::new(11, LossModel::Linear)
    }
}

impl GreedyScheduler {
    /// `power_levels` evenly spaced levels from 0 to 1 (at least 2).
    pub fn new(power_levels: usize, model: LossModel) -> Self {
        Self {
            levels: power_grid(power_levels),
            model,
        }
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn loss_model(&self) -> LossModel {
        self.model
    }

    pub fn schedule(
        &self,
        queues: &[usize],
        budget: &LinkBudget,
        interference: &InterferenceMatrix,
        rng: &mut SimRng,
    ) -> ScheduleDecision {
        self.run(queues, budget, interference, rng, false).0
    }

    /// Like [`GreedyScheduler::schedule`] but also returns the construction trace.
    pub fn schedule_traced(
        &self,
        queues: &[usize],
        budget: &LinkBudget,
        interference: &InterferenceMatrix,
        rng: &mut SimRng,
    ) -> (ScheduleDecision, GreedyTrace) {
        self.run(queues, budget, interference, rng, true)
    }

    fn run(
        &self,
        queues: &[usize],
        budget: &LinkBudget,
        interference: &InterferenceMatrix,
        rng: &mut SimRng,
        trace: bool,
    ) -> (ScheduleDecision, GreedyTrace) {
        let e = budget.num_links();
        let mut unconsidered: Vec<LinkId> = (0..e).collect();
        unconsidered.shuffle(rng);

        let mut powers = vec![0.0; e];
        let mut victims: Vec<Victim> = Vec::new();
        let mut record = GreedyTrace::default();

        for &l in &unconsidered {
            if trace {
                record.visit_order.push(l);
            }
            // Interference from the selected set onto l does not depend on p.
            let incoming: f64 = victims.iter().map(|v| powers[v.link] * interference.get(l, v.link)).sum();

            let mut best: Option<Selection> = None;
            for &p in &self.levels {
                let p_eff = (p * budget.received_mw(l) - incoming).max(0.0);
                let gain = deliverable(l, p_eff, queues, budget) as f64;
                let loss = loss_against(l, p, &victims, &mut powers, queues, budget, interference, self.model);
                let rp = gain - loss;
                if best.is_none_or(|b| rp > b.residual_profit()) {
                    best = Some(Selection { link: l, power: p, gain, loss });
                }
            }

            let Some(choice) = best.filter(|b| b.residual_profit() > 0.0) else {
                continue;
            };

            powers[l] = choice.power;
            for v in victims.iter_mut() {
                let p_new = effective_power(v.link, &powers, budget, interference);
                let lost = match self.model {
                    LossModel::Linear => {
                        let per_mw = budget.nominal_pkts(v.link) as f64 / budget.received_mw(v.link);
                        ((v.p_eff - p_new) * per_mw).min(v.estimate).max(0.0)
                    }
                    LossModel::Exact => v.estimate - deliverable(v.link, p_new, queues, budget) as f64,
                };
                v.estimate -= lost;
                v.p_eff = p_new;
            }
            victims.push(Victim {
                link: l,
                p_eff: effective_power(l, &powers, budget, interference),
                estimate: choice.gain,
            });

            if trace {
                record.selections.push(choice);
                record.estimated_aggregate.push(victims.iter().map(|v| v.estimate).sum());
                record.physical_aggregate.push(
                    victims
                        .iter()
                        .map(|v| deliverable(v.link, effective_power(v.link, &powers, budget, interference), queues, budget) as u64)
                        .sum(),
                );
            }
        }

        (
            ScheduleDecision::new(powers).expect("grid powers lie in [0, 1]"),
            record,
        )
    }
}
