use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized transmit power per link for one slot; `0` keeps the link idle,
/// `1` is full power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDecision {
    power: Vec<f64>,
}

impl ScheduleDecision {
    pub fn new(power: Vec<f64>) -> Result<Self> {
        if let Some((l, p)) = power.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Domain(format!("power for link {l} is {p}, outside [0, 1]")));
        }
        Ok(Self { power })
    }

    pub fn idle(num_links: usize) -> Self {
        Self {
            power: vec![0.0; num_links],
        }
    }

    pub fn full(num_links: usize) -> Self {
        Self {
            power: vec![1.0; num_links],
        }
    }

    pub fn powers(&self) -> &[f64] {
        &self.power
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub fn active_links(&self) -> impl Iterator<Item = usize> + '_ {
        self.power.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(l, _)| l)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.power
    }
}

/// `levels` evenly spaced powers from 0 to 1 inclusive.
pub fn power_grid(levels: usize) -> Vec<f64> {
    assert!(levels >= 2, "a power grid needs at least the levels 0 and 1");
    let steps = (levels - 1) as f64;
    (0..levels).map(|k| k as f64 / steps).collect()
}
