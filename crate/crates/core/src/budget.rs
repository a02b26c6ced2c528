use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

/// Node and wall-clock limits for the exhaustive searches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_seconds: Option<f64>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn nodes(max_nodes: u64) -> Self {
        Budget {
            max_nodes: Some(max_nodes),
            max_seconds: None,
        }
    }

    pub fn seconds(max_seconds: f64) -> Self {
        Budget {
            max_nodes: None,
            max_seconds: Some(max_seconds),
        }
    }

    pub fn with_nodes(mut self, max_nodes: Option<u64>) -> Self {
        self.max_nodes = max_nodes;
        self
    }

    pub fn with_seconds(mut self, max_seconds: Option<f64>) -> Self {
        self.max_seconds = max_seconds;
        self
    }

    /// Splits off a share of this budget, e.g. for a first search phase.
    pub fn fraction(&self, share: f64) -> Budget {
        Budget {
            max_nodes: self.max_nodes.map(|n| ((n as f64 * share) as u64).max(1)),
            max_seconds: self.max_seconds.map(|s| s * share),
        }
    }

    pub fn start(&self) -> Meter {
        Meter {
            budget: *self,
            started: Instant::now(),
            nodes: 0,
        }
    }
}

/// Running consumption against a [`Budget`].
#[derive(Debug, Clone)]
pub struct Meter {
    budget: Budget,
    started: Instant,
    nodes: u64,
}

impl Meter {
    /// Counts one node; `false` once the budget is spent.
    pub fn tick(&mut self) -> bool {
        if self.exhausted() {
            return false;
        }
        self.nodes += 1;
        true
    }

    pub fn exhausted(&self) -> bool {
        if let Some(max) = self.budget.max_nodes {
            if self.nodes >= max {
                return true;
            }
        }
        if let Some(secs) = self.budget.max_seconds {
            // checking the clock on every node is measurable in the clique search
            if self.nodes % 64 == 0 && self.started.elapsed().as_secs_f64() >= secs {
                return true;
            }
        }
        false
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }
}
