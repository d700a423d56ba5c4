use thiserror::Error;

use crate::net::{Marking, Net, NetError, Step};

/// One trace of a lasso-shaped witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceWitness {
    pub var: String,
    pub prefix: Vec<Step>,
    pub cycle: Vec<Step>,
}

/// Synchronous lasso over all trace variables, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub traces: Vec<TraceWitness>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("trace `{var}`, step {position}: {reason}")]
    Illegal { var: String, position: usize, reason: String },
    #[error("trace `{var}`: loop does not return to its start marking")]
    OpenLoop { var: String },
    #[error("trace `{var}`: empty loop")]
    EmptyLoop { var: String },
    #[error("traces have different prefix or loop lengths")]
    Misaligned,
    #[error(transparent)]
    Net(#[from] NetError),
}

impl Witness {
    pub fn prefix_len(&self) -> usize {
        self.traces.first().map_or(0, |t| t.prefix.len())
    }

    pub fn cycle_len(&self) -> usize {
        self.traces.first().map_or(0, |t| t.cycle.len())
    }

    /// Replays every trace from the initial marking. On success returns the
    /// marking tuples at each position: prefix positions, then loop positions.
    #[allow(clippy::type_complexity)]
    pub fn replay(&self, net: &Net) -> Result<(Vec<Vec<Marking>>, Vec<Vec<Marking>>), ReplayError> {
        let (p, c) = (self.prefix_len(), self.cycle_len());
        if self.traces.iter().any(|t| t.prefix.len() != p || t.cycle.len() != c) {
            return Err(ReplayError::Misaligned);
        }
        let mut prefix = vec![Vec::with_capacity(self.traces.len()); p];
        let mut cycle = vec![Vec::with_capacity(self.traces.len()); c];
        for t in &self.traces {
            if t.cycle.is_empty() {
                return Err(ReplayError::EmptyLoop { var: t.var.clone() });
            }
            let mut m = net.initial_marking().clone();
            for (i, step) in t.prefix.iter().chain(&t.cycle).enumerate() {
                if i < p {
                    prefix[i].push(m.clone());
                } else {
                    cycle[i - p].push(m.clone());
                }
                m = replay_step(net, &m, *step).map_err(|reason| ReplayError::Illegal {
                    var: t.var.clone(),
                    position: i,
                    reason,
                })?;
            }
            if Some(&m) != cycle[0].last() {
                return Err(ReplayError::OpenLoop { var: t.var.clone() });
            }
        }
        Ok((prefix, cycle))
    }
}

fn replay_step(net: &Net, m: &Marking, step: Step) -> Result<Marking, String> {
    match step {
        Step::Stutter if net.is_deadlock(m) => Ok(m.clone()),
        Step::Stutter => Err("stutter from a marking that is not a deadlock".into()),
        Step::Fire(t) if t.0 >= net.transition_count() => Err(format!("unknown transition #{}", t.0)),
        Step::Fire(t) if !net.is_enabled(m, t) => Err(format!("`{}` is not enabled", net.transition_name(t))),
        Step::Fire(t) => net.fire(m, t).map_err(|e| e.to_string()),
    }
}
