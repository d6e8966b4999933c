use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;

use super::expm::expm_generator;
use super::rates::{RateMatrix, StateLabel};
use crate::atomic_model::{LevelId, LevelScheme, Multipole};
use crate::error::{invalid, Error, Result};
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

/// Probabilities over the states of a [`RateMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationVector {
    labels: Vec<StateLabel>,
    values: Vec<f64>,
}

impl PopulationVector {
    /// Validates non-negativity (to −10⁻¹²) and normalization (to 10⁻⁹).
    pub fn new(labels: Vec<StateLabel>, values: Vec<f64>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(invalid("populations", "length differs from state list"));
        }
        if values.iter().any(|p| !p.is_finite() || *p < -1e-12) {
            return Err(invalid("populations", "entries must be finite and non-negative"));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(invalid("populations", alloc::format!("sum is {sum}, not 1")));
        }
        Ok(PopulationVector { labels, values })
    }

    /// All population in the first state of `level` (its lowest sublevel).
    pub fn concentrated(labels: &[StateLabel], level: LevelId) -> Result<Self> {
        let index = labels
            .iter()
            .position(|l| l.level == level)
            .ok_or_else(|| invalid("level", "not present in state list"))?;
        let mut values = vec![0.0; labels.len()];
        values[index] = 1.0;
        Ok(PopulationVector { labels: labels.to_vec(), values })
    }

    /// Equal population in every sublevel of `level`.
    pub fn uniform_in(labels: &[StateLabel], level: LevelId) -> Result<Self> {
        let count = labels.iter().filter(|l| l.level == level).count();
        if count == 0 {
            return Err(invalid("level", "not present in state list"));
        }
        let values = labels.iter().map(|l| if l.level == level { 1.0 / count as f64 } else { 0.0 }).collect();
        Ok(PopulationVector { labels: labels.to_vec(), values })
    }

    pub fn labels(&self) -> &[StateLabel] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Total population of a level, summed over sublevels.
    pub fn level(&self, id: LevelId) -> f64 {
        self.labels.iter().zip(&self.values).filter(|(l, _)| l.level == id).map(|(_, p)| p).sum()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest absolute difference from `other`.
    pub fn max_difference(&self, other: &PopulationVector) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// The unique stationary distribution of `m`.
///
/// States that cannot be left once entered form closed classes; exactly one
/// is required, otherwise the null space is degenerate. The distribution on
/// that class is computed with the Grassmann–Taksar–Heyman elimination, which
/// uses only additions of non-negative numbers and stays accurate for rates
/// spanning many decades (0.14 Hz to 23 MHz here). Transient states get zero.
pub fn steady_state(m: &RateMatrix) -> Result<PopulationVector> {
    let n = m.len();
    if n == 0 {
        return Err(invalid("rate matrix", "no states"));
    }
    let a = m.matrix();
    // reach[i][j]: j reachable from i.
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        reach[i][i] = true;
        for j in 0..n {
            if i != j && a[(j, i)] > 0.0 {
                reach[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    // A state is recurrent when everything it reaches can reach it back.
    let recurrent: Vec<bool> = (0..n).map(|i| (0..n).all(|j| !reach[i][j] || reach[j][i])).collect();
    let mut classes: Vec<usize> = Vec::new();
    for i in (0..n).filter(|&i| recurrent[i]) {
        if !classes.iter().any(|&c| reach[c][i]) {
            classes.push(i);
        }
    }
    if classes.len() != 1 {
        return Err(Error::DegenerateNullSpace(classes.len()));
    }
    let class: Vec<usize> = (0..n).filter(|&i| reach[classes[0]][i]).collect();

    // rate[i][j]: from class state i to class state j.
    let k = class.len();
    let mut rate = vec![vec![0.0; k]; k];
    for (ii, &i) in class.iter().enumerate() {
        for (jj, &j) in class.iter().enumerate() {
            if i != j {
                rate[ii][jj] = a[(j, i)];
            }
        }
    }
    for last in (1..k).rev() {
        let out: f64 = rate[last][..last].iter().sum();
        if !(out > 0.0) {
            return Err(Error::NoConvergence("steady-state elimination met an isolated state"));
        }
        for i in 0..last {
            rate[i][last] /= out;
        }
        for i in 0..last {
            let through = rate[i][last];
            if through == 0.0 {
                continue;
            }
            for j in 0..last {
                if i != j {
                    rate[i][j] += through * rate[last][j];
                }
            }
        }
    }
    let mut pi = vec![0.0; k];
    pi[0] = 1.0;
    for j in 1..k {
        pi[j] = (0..j).map(|i| pi[i] * rate[i][j]).sum();
    }
    let total: f64 = pi.iter().sum();
    let mut values = vec![0.0; n];
    for (ii, &i) in class.iter().enumerate() {
        values[i] = pi[ii] / total;
    }

    let residual = (a * DVector::from_column_slice(&values)).amax();
    if residual > 1e-9 * m.max_abs() {
        return Err(Error::NoConvergence("steady-state residual above tolerance"));
    }
    PopulationVector::new(m.labels().to_vec(), values)
}

/// Populations after time `t` (s): exp(M·t)·p0.
///
/// Uses the scaling-and-squaring Padé exponential with the propagator's
/// diagonal rebuilt from its off-diagonal entries at every squaring, so
/// population is conserved to rounding; the vector itself is never
/// renormalized.
pub fn evolve_populations(m: &RateMatrix, p0: &PopulationVector, t: f64) -> Result<PopulationVector> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid("t", "must be finite and non-negative"));
    }
    if p0.labels() != m.labels() {
        return Err(invalid("p0", "state list differs from the rate matrix"));
    }
    if t == 0.0 {
        return Ok(p0.clone());
    }
    let propagator = expm_generator(&(m.matrix() * t))?;
    let p = propagator * DVector::from_column_slice(p0.values());
    Ok(PopulationVector { labels: p0.labels.clone(), values: p.iter().copied().collect() })
}

/// Spontaneous photon emission rate on one decay channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionChannel {
    pub lower: LevelId,
    pub upper: LevelId,
    /// Vacuum wavelength in m.
    pub wavelength: f64,
    pub kind: Multipole,
    /// Photons per second.
    pub rate: f64,
}

/// Emission rates of all decay channels of a scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringRates {
    pub channels: Vec<EmissionChannel>,
}

impl ScatteringRates {
    /// Rate on the channel nearest `wavelength_nm` (within 1 nm), else 0.
    pub fn at_nm(&self, wavelength_nm: f64) -> f64 {
        self.channels.iter().filter(|c| (c.wavelength * 1e9 - wavelength_nm).abs() <= 1.0).map(|c| c.rate).sum()
    }

    /// Detected rate: dipole decays into the ground state (393 + 397 nm for
    /// Ca⁺). Red and infrared channels are filtered out.
    pub fn violet(&self) -> f64 {
        self.channels.iter().filter(|c| c.lower == LevelId::S12 && c.kind == Multipole::Dipole).map(|c| c.rate).sum()
    }

    pub fn total(&self) -> f64 {
        self.channels.iter().map(|c| c.rate).sum()
    }
}

/// Photon rates per decay channel: population(upper) × Γ(upper) × branching.
pub fn scattering_rates(p: &PopulationVector, scheme: &LevelScheme) -> ScatteringRates {
    let channels = scheme
        .transitions()
        .iter()
        .map(|t| EmissionChannel {
            lower: t.lower,
            upper: t.upper,
            wavelength: t.wavelength,
            kind: t.kind,
            rate: p.level(t.upper) * t.partial_rate(),
        })
        .collect();
    ScatteringRates { channels }
}
