//! Periodic traffic light: `cycles` repetitions of the green sequence 1, 2, ..., n.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenInterval {
    /// Zero-based incoming road index.
    pub road: usize,
    pub start: f64,
    pub end: f64,
}

/// One light change: `to == None` marks the end of the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switch {
    pub time: f64,
    pub from: usize,
    pub to: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LightSchedule {
    horizon: f64,
    cycles: usize,
    sigma: Vec<f64>,
    tau: Vec<f64>,
    intervals: Vec<GreenInterval>,
}

impl LightSchedule {
    /// Build the schedule with green durations `tau_i = sigma_i T / (cycles * sum sigma)`.
    pub fn build(horizon: f64, cycles: usize, sigma: &[f64]) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Schedule(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if cycles == 0 {
            return Err(Error::Schedule("at least one cycle is required".into()));
        }
        if sigma.len() < 2 {
            return Err(Error::Schedule(
                "at least two incoming roads are required".into(),
            ));
        }
        if let Some(bad) = sigma.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::Schedule(format!(
                "green ratios must be positive, got {bad}"
            )));
        }
        let last = sigma[sigma.len() - 1];
        if (last - 1.0).abs() > 1e-12 {
            return Err(Error::Schedule(format!(
                "the last green ratio must be 1, got {last}"
            )));
        }
        let total: f64 = sigma.iter().sum();
        let cycle = horizon / cycles as f64;
        let tau: Vec<f64> = sigma.iter().map(|s| s * cycle / total).collect();

        let n = sigma.len();
        let mut intervals = Vec::with_capacity(n * cycles);
        for k in 0..cycles {
            let cycle_start = k as f64 * horizon / cycles as f64;
            let cycle_end = if k + 1 == cycles {
                horizon
            } else {
                (k + 1) as f64 * horizon / cycles as f64
            };
            let mut start = cycle_start;
            for (road, t) in tau.iter().enumerate() {
                let end = if road + 1 == n { cycle_end } else { start + t };
                intervals.push(GreenInterval { road, start, end });
                start = end;
            }
        }
        Ok(LightSchedule {
            horizon,
            cycles,
            sigma: sigma.to_vec(),
            tau,
            intervals,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    pub fn roads(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn cycle_length(&self) -> f64 {
        self.horizon / self.cycles as f64
    }

    pub fn intervals(&self) -> &[GreenInterval] {
        &self.intervals
    }

    /// Index into [`intervals`](Self::intervals) of the green phase active at `t`.
    pub fn interval_at(&self, t: f64) -> Result<usize> {
        if !(0.0..self.horizon).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(self.intervals.partition_point(|iv| iv.start <= t) - 1)
    }

    /// The road holding the green at `t` (right-continuous at switches).
    pub fn green_at(&self, t: f64) -> Result<usize> {
        Ok(self.intervals[self.interval_at(t)?].road)
    }

    /// Interior switches in increasing order followed by the terminal time.
    pub fn switch_times(&self) -> Vec<Switch> {
        let mut out: Vec<Switch> = self
            .intervals
            .windows(2)
            .map(|w| Switch {
                time: w[1].start,
                from: w[0].road,
                to: Some(w[1].road),
            })
            .collect();
        let last = self.intervals[self.intervals.len() - 1];
        out.push(Switch {
            time: self.horizon,
            from: last.road,
            to: None,
        });
        out
    }

    /// Total green time given to `road` over the horizon.
    pub fn green_time(&self, road: usize) -> f64 {
        self.intervals
            .iter()
            .filter(|iv| iv.road == road)
            .map(|iv| iv.end - iv.start)
            .sum()
    }
}
