use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::runner::{mean_std, EpisodeMetrics};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

impl Aggregate {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let (mean, std) = mean_std(xs);
        Self { mean, std }
    }
}

/// Per-episode results of one scheduler plus their aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scheduler: String,
    pub episodes: Vec<EpisodeMetrics>,
    pub goodput: Aggregate,
    pub dropped: Aggregate,
    pub delivered: Aggregate,
    pub slots: Aggregate,
    pub decision_ms: Aggregate,
    /// Mean goodput as a percentage of a paired greedy run's mean goodput.
    pub normalized: Option<f64>,
}

#[derive(Debug, Serialize)]
struct EpisodeRow<'a> {
    scheduler: &'a str,
    episode: u64,
    injected: u64,
    delivered: u64,
    dropped: u64,
    queued: u64,
    lost: u64,
    slots: u64,
    truncated: bool,
    goodput: f64,
}

impl MetricsReport {
    pub fn new(scheduler: impl Into<String>, episodes: Vec<EpisodeMetrics>) -> Self {
        Self {
            scheduler: scheduler.into(),
            goodput: Aggregate::of(episodes.iter().map(|m| m.goodput)),
            dropped: Aggregate::of(episodes.iter().map(|m| m.dropped as f64)),
            delivered: Aggregate::of(episodes.iter().map(|m| m.delivered as f64)),
            slots: Aggregate::of(episodes.iter().map(|m| m.slots as f64)),
            decision_ms: Aggregate::of(episodes.iter().map(|m| m.mean_decision_ms)),
            episodes,
            normalized: None,
        }
    }

    pub fn normalize_against(&mut self, greedy: &MetricsReport) {
        self.normalized = Some(normalized_goodput(self.goodput.mean, greedy.goodput.mean));
    }

    /// Per-episode rows. Timing is left out so that seeded runs produce
    /// identical files.
    pub fn write_episodes_csv<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        for m in &self.episodes {
            w.serialize(EpisodeRow {
                scheduler: &self.scheduler,
                episode: m.episode,
                injected: m.injected,
                delivered: m.delivered,
                dropped: m.dropped,
                queued: m.queued,
                lost: m.lost,
                slots: m.slots,
                truncated: m.truncated,
                goodput: m.goodput,
            })?;
        }
        Ok(())
    }

    pub fn summary_header() -> [&'static str; 11] {
        [
            "scheduler",
            "episodes",
            "goodput_mean",
            "goodput_std",
            "dropped_mean",
            "dropped_std",
            "delivered_mean",
            "delivered_std",
            "slots_mean",
            "slots_std",
            "normalized",
        ]
    }

    pub fn summary_record(&self) -> Vec<String> {
        vec![
            self.scheduler.clone(),
            self.episodes.len().to_string(),
            self.goodput.mean.to_string(),
            self.goodput.std.to_string(),
            self.dropped.mean.to_string(),
            self.dropped.std.to_string(),
            self.delivered.mean.to_string(),
            self.delivered.std.to_string(),
            self.slots.mean.to_string(),
            self.slots.std.to_string(),
            self.normalized.map(|v| v.to_string()).unwrap_or_default(),
        ]
    }

    pub fn describe(&self) -> String {
        let mut s = format!(
            "{:<7} episodes {:>3}  goodput {:>7.3}% ± {:.3}  dropped {:>9.1}  slots {:>7.1}  decision {:.3} ms",
            self.scheduler,
            self.episodes.len(),
            self.goodput.mean,
            self.goodput.std,
            self.dropped.mean,
            self.slots.mean,
            self.decision_ms.mean
        );
        if let Some(n) = self.normalized {
            s.push_str(&format!("  normalized {n:.2}%"));
        }
        s
    }
}

/// `100 · ours / greedy`; two zero goodputs compare as equal.
pub fn normalized_goodput(ours: f64, greedy: f64) -> f64 {
    if greedy == 0.0 {
        if ours == 0.0 {
            100.0
        } else {
            f64::INFINITY
        }
    } else {
        100.0 * ours / greedy
    }
}
