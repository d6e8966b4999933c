use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, Vector3};

use super::effective::{degeneracy_ratio, dress};
use crate::atomic_model::{
    rabi_from_power, zeeman_lines, zeeman_shift, LaserBeam, LevelId, LevelScheme, LineGeometry, Multipole,
};
use crate::error::{invalid, Result};
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

/// An internal state: a whole level, or one of its Zeeman sublevels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateLabel {
    pub level: LevelId,
    /// 2m, or `None` for a level-resolved state.
    pub twice_m: Option<i8>,
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.twice_m {
            None => write!(f, "{}", self.level),
            Some(tm) => write!(f, "{}(m={}/2)", self.level, tm),
        }
    }
}

/// What moves population along one edge of the rate graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessKind {
    /// Absorption from beam `beam` (index into the beam list).
    Absorption { beam: usize },
    /// Stimulated emission into beam `beam`.
    StimulatedEmission { beam: usize },
    /// Spontaneous decay on scheme transition `transition`.
    Spontaneous { transition: usize },
}

/// One population-transfer channel: `rate` (s⁻¹) from state `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Process {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
    pub kind: ProcessKind,
}

/// Generator of the population rate equations dp/dt = M·p.
///
/// `M[(i, j)]` is the rate from state j into state i; each diagonal entry is
/// minus the total outflow of its state, so columns sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    labels: Vec<StateLabel>,
    matrix: DMatrix<f64>,
    processes: Vec<Process>,
}

impl RateMatrix {
    /// Assembles the generator from a list of processes.
    pub fn from_processes(labels: Vec<StateLabel>, processes: Vec<Process>) -> Result<Self> {
        let n = labels.len();
        let mut matrix = DMatrix::zeros(n, n);
        for p in &processes {
            if p.from >= n || p.to >= n || p.from == p.to {
                return Err(invalid("process", "state index out of range or self-loop"));
            }
            if !(p.rate >= 0.0) || !p.rate.is_finite() {
                return Err(invalid("process", "rate must be finite and non-negative"));
            }
            matrix[(p.to, p.from)] += p.rate;
            matrix[(p.from, p.from)] -= p.rate;
        }
        Ok(RateMatrix { labels, matrix, processes })
    }

    pub fn labels(&self) -> &[StateLabel] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn processes(&self) -> &[Process] {
        &self.processes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest absolute column sum; zero up to rounding for any generator.
    pub fn conservation_defect(&self) -> f64 {
        self.matrix.column_iter().map(|c| c.sum().abs()).fold(0.0, f64::max)
    }

    /// Population flux (s⁻¹) through all processes matching `select`.
    pub fn flux(&self, populations: &[f64], mut select: impl FnMut(&Process) -> bool) -> f64 {
        self.processes.iter().filter(|p| select(p)).map(|p| populations[p.from] * p.rate).sum()
    }

    /// Net absorption flux (absorption minus stimulated emission) from beam `beam`.
    pub fn net_absorption(&self, populations: &[f64], beam: usize) -> f64 {
        self.flux(populations, |p| p.kind == ProcessKind::Absorption { beam })
            - self.flux(populations, |p| p.kind == ProcessKind::StimulatedEmission { beam })
    }

    /// Gross absorption plus stimulated-emission flux of beam `beam`; each event
    /// transfers one photon momentum.
    pub fn gross_stimulated(&self, populations: &[f64], beam: usize) -> f64 {
        self.flux(populations, |p| {
            p.kind == ProcessKind::Absorption { beam } || p.kind == ProcessKind::StimulatedEmission { beam }
        })
    }
}

/// Which internal states a rate matrix resolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Resolution {
    /// One state per level.
    Levels,
    /// One state per Zeeman sublevel, also in zero field (quantization
    /// axis +z). Use this to compare fields on one footing.
    Sublevels,
    /// Sublevels when the field is non-zero, levels otherwise.
    #[default]
    Auto,
}

impl Resolution {
    fn resolves(self, field: &Vector3<f64>) -> bool {
        match self {
            Resolution::Levels => false,
            Resolution::Sublevels => true,
            Resolution::Auto => field.norm() > 0.0,
        }
    }
}

/// Quantization axis: along the field, or +z in zero field.
pub fn quantization_axis(field: &Vector3<f64>) -> Vector3<f64> {
    let b = field.norm();
    if b > 0.0 {
        field / b
    } else {
        Vector3::z()
    }
}

/// Builds the rate matrix of `scheme` driven by `beams` for an ion moving at
/// `velocity` (m/s) in magnetic field `field` (T).
///
/// Each beam addresses the scheme transition at its wavelength with a
/// Lorentzian rate Ω²Γ_w/(4Δ_eff² + Γ_w²), Δ_eff = Δ − k·v. For dipole lines
/// Γ_w is the upper-level width; for a quadrupole line it is the width Γ′ of
/// the metastable level dressed by the dipole beams that drain it, and Δ_eff
/// also subtracts their light shift. Level-resolved stimulated emission is
/// weighted by the degeneracy ratio so the level model is the exact
/// collapse of the sublevel model with isotropic coupling.
///
/// When sublevels are resolved, each Zeeman component carries its own shift,
/// geometric weight and Clebsch–Gordan strength, and spontaneous decay is
/// split by Clebsch–Gordan strength. The sublevel model sees the actual beam
/// polarizations, so in zero field it differs from the level model whenever
/// the geometry leaves some sublevels uncoupled.
pub fn build_rate_matrix(
    scheme: &LevelScheme,
    beams: &[LaserBeam],
    velocity: &Vector3<f64>,
    field: &Vector3<f64>,
    resolution: Resolution,
) -> Result<RateMatrix> {
    let mut driven = Vec::with_capacity(beams.len());
    for beam in beams {
        let t = scheme.transition_at(beam.wavelength, 1e-9)?;
        let detuning = beam.detuning - beam.k_vector().dot(velocity);
        driven.push((beam, t, detuning));
    }
    let resolved = resolution.resolves(field);
    let layout = Layout::new(scheme, resolved);
    let mut processes = Vec::new();

    for (index, &(beam, t, detuning)) in driven.iter().enumerate() {
        let rabi = rabi_from_power(beam, t)?;
        if rabi == 0.0 {
            continue;
        }
        let (width, detuning) = match t.kind {
            Multipole::Dipole => (t.upper_rate, detuning),
            Multipole::Quadrupole => {
                let dressing: Vec<(&LaserBeam, f64)> = driven.iter().map(|&(b, _, d)| (b, d)).collect();
                let (width, shift) = dress(scheme, t.upper, &dressing)?;
                (width, detuning - shift)
            }
        };
        if resolved {
            let geometry = LineGeometry {
                field_dir: quantization_axis(field),
                k_dir: *beam.direction(),
                polarization: beam.polarization,
            };
            let rank = t.kind.rank() as f64;
            let lower = scheme.level(t.lower);
            let upper = scheme.level(t.upper);
            let norm = (2.0 * rank + 1.0) * lower.multiplicity() as f64 / upper.multiplicity() as f64;
            for line in zeeman_lines(scheme, t, Some(&geometry)) {
                let weight = line.geometry_factor * line.geometry_factor * line.strength * norm;
                if weight <= 0.0 {
                    continue;
                }
                let d = detuning - zeeman_shift(&line, field.norm());
                let rate = weight * lorentzian(rabi, width, d);
                let from = layout.sublevel(scheme, t.lower, line.lower.twice_m);
                let to = layout.sublevel(scheme, t.upper, line.upper.twice_m);
                push_pair(&mut processes, from, to, rate, rate, index);
            }
        } else {
            let up = lorentzian(rabi, width, detuning);
            let down = up * degeneracy_ratio(scheme, t.lower, t.upper);
            push_pair(&mut processes, layout.level(t.lower), layout.level(t.upper), up, down, index);
        }
    }

    for (index, t) in scheme.transitions().iter().enumerate() {
        let rate = t.partial_rate();
        if resolved {
            for line in zeeman_lines(scheme, t, None) {
                if line.strength > 0.0 {
                    processes.push(Process {
                        from: layout.sublevel(scheme, t.upper, line.upper.twice_m),
                        to: layout.sublevel(scheme, t.lower, line.lower.twice_m),
                        rate: rate * line.strength,
                        kind: ProcessKind::Spontaneous { transition: index },
                    });
                }
            }
        } else {
            processes.push(Process {
                from: layout.level(t.upper),
                to: layout.level(t.lower),
                rate,
                kind: ProcessKind::Spontaneous { transition: index },
            });
        }
    }
    RateMatrix::from_processes(layout.labels, processes)
}

fn lorentzian(rabi: f64, width: f64, detuning: f64) -> f64 {
    rabi * rabi * width / (4.0 * detuning * detuning + width * width)
}

fn push_pair(processes: &mut Vec<Process>, lower: usize, upper: usize, up: f64, down: f64, beam: usize) {
    processes.push(Process { from: lower, to: upper, rate: up, kind: ProcessKind::Absorption { beam } });
    processes.push(Process { from: upper, to: lower, rate: down, kind: ProcessKind::StimulatedEmission { beam } });
}

/// State ordering: levels in [`LevelId::ALL`] order, sublevels by ascending m.
struct Layout {
    labels: Vec<StateLabel>,
    offsets: [usize; 5],
}

impl Layout {
    fn new(scheme: &LevelScheme, resolved: bool) -> Self {
        let mut labels = Vec::new();
        let mut offsets = [0; 5];
        for level in scheme.levels() {
            offsets[level.id.index()] = labels.len();
            if resolved {
                labels.extend(level.sublevels().map(|tm| StateLabel { level: level.id, twice_m: Some(tm) }));
            } else {
                labels.push(StateLabel { level: level.id, twice_m: None });
            }
        }
        Layout { labels, offsets }
    }

    fn level(&self, id: LevelId) -> usize {
        self.offsets[id.index()]
    }

    fn sublevel(&self, scheme: &LevelScheme, id: LevelId, twice_m: i8) -> usize {
        let twice_j = scheme.level(id).twice_j as i32;
        self.offsets[id.index()] + ((twice_m as i32 + twice_j) / 2) as usize
    }
}
