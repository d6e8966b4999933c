use alloc::vec::Vec;

use super::integrate::{Observer, Trajectory};
use super::state::IonState;
use crate::error::{Error, Result};

/// Axial periods a new ordering must persist before it counts.
pub const DEBOUNCE_PERIODS: f64 = 10.0;

/// A persistent change of the axial ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpEvent {
    /// Sample time (s) at which the new ordering first appeared.
    pub time: f64,
    /// Ion indices sorted by axial position, before and after.
    pub before: Vec<usize>,
    pub after: Vec<usize>,
    /// Axial rank of the dark ion before and after.
    pub dark_before: usize,
    pub dark_after: usize,
}

/// Outcome for one observation window.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpReport {
    pub events: Vec<JumpEvent>,
    pub start_rank: usize,
    pub end_rank: usize,
    /// The dark ion ended at a different rank, or some persistent
    /// reordering moved it.
    pub jumped: bool,
}

/// Streaming detector; feed it samples directly or use it as an observer.
#[derive(Debug, Clone)]
pub struct JumpDetector {
    n: usize,
    dark: usize,
    debounce: f64,
    stable: Vec<usize>,
    candidate: Option<(Vec<usize>, f64)>,
    start_rank: Option<usize>,
    last_rank: usize,
    events: Vec<JumpEvent>,
    scratch: Vec<usize>,
}

impl JumpDetector {
    /// Detector for `n` ions with the dark ion `dark`; orderings must last
    /// `debounce` seconds.
    pub fn new(n: usize, dark: usize, debounce: f64) -> Result<Self> {
        if dark >= n {
            return Err(Error::IndexOutOfRange { index: dark, len: n });
        }
        Ok(JumpDetector {
            n,
            dark,
            debounce,
            stable: Vec::new(),
            candidate: None,
            start_rank: None,
            last_rank: 0,
            events: Vec::new(),
            scratch: Vec::with_capacity(n),
        })
    }

    fn rank_of(order: &[usize], ion: usize) -> usize {
        order.iter().position(|&i| i == ion).unwrap_or(0)
    }

    /// Feeds the axial positions of all ions at time `t`.
    pub fn observe(&mut self, t: f64, axial: impl IntoIterator<Item = f64>) {
        let z: Vec<f64> = axial.into_iter().collect();
        debug_assert_eq!(z.len(), self.n);
        self.scratch.clear();
        self.scratch.extend(0..self.n);
        self.scratch.sort_by(|&a, &b| z[a].total_cmp(&z[b]));
        let order = &self.scratch;
        self.last_rank = Self::rank_of(order, self.dark);
        if self.start_rank.is_none() {
            self.start_rank = Some(self.last_rank);
            self.stable = order.clone();
            return;
        }
        if *order == self.stable {
            self.candidate = None;
            return;
        }
        match &self.candidate {
            Some((c, _)) if c == order => {}
            _ => self.candidate = Some((order.clone(), t)),
        }
        if let Some((c, since)) = &self.candidate {
            if t - since >= self.debounce {
                self.events.push(JumpEvent {
                    time: *since,
                    before: self.stable.clone(),
                    after: c.clone(),
                    dark_before: Self::rank_of(&self.stable, self.dark),
                    dark_after: Self::rank_of(c, self.dark),
                });
                self.stable = c.clone();
                self.candidate = None;
            }
        }
    }

    pub fn report(&self) -> JumpReport {
        let start_rank = self.start_rank.unwrap_or(0);
        let moved = self.events.iter().any(|e| e.dark_before != e.dark_after);
        JumpReport {
            events: self.events.clone(),
            start_rank,
            end_rank: self.last_rank,
            jumped: moved || self.last_rank != start_rank,
        }
    }
}

impl Observer for JumpDetector {
    fn sample(&mut self, time: f64, ions: &[IonState]) {
        self.observe(time, ions.iter().map(|ion| ion.position.z));
    }
}

/// Reorderings of a recorded trajectory, debounced over ten axial periods.
pub fn detect_jumps(trajectory: &Trajectory, dark_index: usize) -> Result<JumpReport> {
    let debounce = DEBOUNCE_PERIODS * core::f64::consts::TAU / trajectory.trap.omega_axial;
    let mut detector = JumpDetector::new(trajectory.ion_count(), dark_index, debounce)?;
    for (i, &t) in trajectory.times.iter().enumerate() {
        detector.observe(t, trajectory.axial_positions(i));
    }
    Ok(detector.report())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn transient_crossing_is_ignored() {
        let mut d = JumpDetector::new(2, 0, 1.0).unwrap();
        d.observe(0.0, [0.0, 1.0]);
        d.observe(0.5, [1.0, 0.0]);
        d.observe(1.2, [0.0, 1.0]);
        d.observe(3.0, [0.0, 1.0]);
        let r = d.report();
        assert!(r.events.is_empty());
        assert!(!r.jumped);
    }

    #[test]
    fn persistent_swap_counts_once() {
        let mut d = JumpDetector::new(3, 2, 1.0).unwrap();
        d.observe(0.0, [0.0, 1.0, 2.0]);
        for k in 1..10 {
            d.observe(k as f64 * 0.5, [0.0, 2.0, 1.0]);
        }
        let r = d.report();
        assert_eq!(r.events.len(), 1);
        assert_eq!(r.events[0].before, vec![0, 1, 2]);
        assert_eq!(r.events[0].after, vec![0, 2, 1]);
        assert_eq!((r.events[0].dark_before, r.events[0].dark_after), (2, 1));
        assert_eq!(r.events[0].time, 0.5);
        assert!(r.jumped);
    }

    #[test]
    fn bright_swap_does_not_flag_the_dark_ion() {
        let mut d = JumpDetector::new(3, 0, 0.1).unwrap();
        d.observe(0.0, [0.0, 1.0, 2.0]);
        d.observe(1.0, [0.0, 2.0, 1.0]);
        d.observe(2.0, [0.0, 2.0, 1.0]);
        let r = d.report();
        assert_eq!(r.events.len(), 1);
        assert!(!r.jumped);
    }

    #[test]
    fn dark_index_checked() {
        assert!(matches!(JumpDetector::new(4, 4, 1.0), Err(Error::IndexOutOfRange { index: 4, len: 4 })));
    }
}
