//! Projective measurements on the central region, alone and interleaved
//! with wall evolution.

use serde::Serialize;

use crate::algebra::MatrixAlgebra;
use crate::error::{Result, WallError};
use crate::kernel::linalg::{cluster_sorted, hermitian_eigen, hermiticity_residual, matmul, CMatrix};
use crate::kernel::random::SeededRng;
use crate::synth::WallUnitary;

use super::state::{schmidt_left, PureState};

/// Relative gap below which eigenvalues of the observable share an outcome.
pub const OUTCOME_CLUSTER_TOL: f64 = 1e-9;
/// Branches less likely than this are never sampled.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-12;
/// Membership tolerance used to classify an observable.
pub const CLASS_TOL: f64 = 1e-8;

/// One eigenvalue of a central observable and its spectral projector on `C`.
#[derive(Debug, Clone)]
pub struct SpectralBranch {
    pub eigenvalue: f64,
    pub projector: CMatrix,
}

pub fn spectral_branches(m: &CMatrix) -> Result<Vec<SpectralBranch>> {
    let r = hermiticity_residual(m);
    if r > 1e-10 {
        return Err(WallError::NotHermitian { residual: r });
    }
    let (vals, w) = hermitian_eigen(m);
    Ok(cluster_sorted(&vals, OUTCOME_CLUSTER_TOL)
        .into_iter()
        .map(|c| {
            let cols = w.columns(c.start, c.len()).into_owned();
            SpectralBranch {
                eigenvalue: vals[c.clone()].iter().sum::<f64>() / c.len() as f64,
                projector: matmul(&cols, &cols.adjoint()),
            }
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// Position of the eigenvalue in ascending order.
    pub index: usize,
    pub eigenvalue: f64,
    pub probability: f64,
    pub state: PureState,
}

/// Born-rule measurement of a Hermitian observable on `C`.
pub fn measure(psi: &PureState, m_c: &CMatrix, rng: &mut SeededRng) -> Result<Outcome> {
    let branches = spectral_branches(m_c)?;
    let projected: Vec<_> = branches
        .iter()
        .map(|b| psi.apply_center(&b.projector))
        .collect::<Result<_>>()?;
    let probs: Vec<f64> = projected
        .iter()
        .map(|v| {
            let p = v.norm_squared();
            if p < MIN_BRANCH_PROBABILITY {
                0.0
            } else {
                p
            }
        })
        .collect();
    let total: f64 = probs.iter().sum();
    let mut x = rng.uniform() * total;
    let mut pick = probs.iter().rposition(|&p| p > 0.0).expect("some branch has weight");
    for (k, &p) in probs.iter().enumerate() {
        if p > 0.0 && x < p {
            pick = k;
            break;
        }
        x -= p;
    }
    Ok(Outcome {
        index: pick,
        eigenvalue: branches[pick].eigenvalue,
        probability: probs[pick],
        state: PureState::normalized(projected[pick].clone(), psi.layout().clone())?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementClass {
    /// The observable lies in `A_C`.
    Algebra,
    /// The observable commutes with `A_C` without lying in it.
    Commutant,
    Neither,
}

pub fn classify(m_c: &CMatrix, a_c: &MatrixAlgebra) -> MeasurementClass {
    if a_c.contains(m_c, CLASS_TOL) {
        MeasurementClass::Algebra
    } else if a_c.commutant().contains(m_c, CLASS_TOL) {
        MeasurementClass::Commutant
    } else {
        MeasurementClass::Neither
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub outcome: usize,
    pub eigenvalue: f64,
    pub probability: f64,
    pub schmidt_rank: usize,
    pub entropy_bits: f64,
    /// `|⟨ψ_pre|ψ_post⟩|²` between the evolved and the measured state.
    pub fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasurementRecord {
    pub class: MeasurementClass,
    /// `dim A_C`
    pub bound: usize,
    pub rounds: Vec<RoundRecord>,
}

impl MeasurementRecord {
    pub fn max_rank(&self) -> usize {
        self.rounds.iter().map(|r| r.schmidt_rank).max().unwrap_or(0)
    }

    /// First round whose rank exceeds `dim A_C`.
    pub fn first_excess(&self) -> Option<usize> {
        self.rounds.iter().find(|r| r.schmidt_rank > self.bound).map(|r| r.round)
    }
}

/// Alternates one step of the wall with a measurement of `m_c`, recording
/// the Schmidt data across `L | CR` after each measurement.
pub fn measurement_protocol(
    wall: &WallUnitary,
    psi0: &PureState,
    m_c: &CMatrix,
    rounds: usize,
    rng: &mut SeededRng,
) -> Result<MeasurementRecord> {
    let class = classify(m_c, &wall.a_c);
    let mut psi = psi0.clone();
    let mut out = Vec::with_capacity(rounds);
    for round in 1..=rounds {
        let evolved = psi.apply(&wall.u)?;
        let o = measure(&evolved, m_c, rng)?;
        let s = schmidt_left(&o.state)?;
        out.push(RoundRecord {
            round,
            outcome: o.index,
            eigenvalue: o.eigenvalue,
            probability: o.probability,
            schmidt_rank: s.rank,
            entropy_bits: s.entropy_bits(),
            fidelity: evolved.fidelity(&o.state),
        });
        psi = o.state;
    }
    Ok(MeasurementRecord {
        class,
        bound: wall.a_c.dim(),
        rounds: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::layout::SystemLayout;
    use crate::kernel::linalg::{c64, identity};
    use crate::kernel::pauli::{x, z};
    use crate::kernel::CVector;
    use crate::synth::presets::{preset_wall, preset_wall_with};

    fn plus_state() -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let layout = SystemLayout::tripartite(1, 2, 1);
        PureState::new(CVector::from_vec(vec![c64(h, 0.0), c64(h, 0.0)]), layout).unwrap()
    }

    #[test]
    fn eigenstates_are_left_alone() {
        let layout = SystemLayout::tripartite(1, 2, 1);
        let psi = PureState::basis(1, layout).unwrap();
        let o = measure(&psi, &z(), &mut SeededRng::new(0, 0)).unwrap();
        assert_eq!(o.eigenvalue, -1.0);
        assert!((o.probability - 1.0).abs() < 1e-12);
        assert!(o.state.fidelity(&psi) > 1.0 - 1e-12);
    }

    #[test]
    fn z_on_plus_is_a_fair_coin() {
        let psi = plus_state();
        let mut rng = SeededRng::new(1, 0);
        let mut ups = 0;
        for _ in 0..2000 {
            let o = measure(&psi, &z(), &mut rng).unwrap();
            assert!((o.probability - 0.5).abs() < 1e-12);
            if o.eigenvalue > 0.0 {
                ups += 1;
            }
        }
        assert!((ups as f64 / 2000.0 - 0.5).abs() < 4.0 / 2000f64.sqrt());
    }

    #[test]
    fn non_hermitian_observables_are_rejected() {
        let mut m = z();
        m[(0, 1)] = c64(1.0, 0.0);
        assert!(matches!(
            measure(&plus_state(), &m, &mut SeededRng::new(0, 0)),
            Err(WallError::NotHermitian { .. })
        ));
    }

    #[test]
    fn classes() {
        let w = preset_wall("abelian-pair", &mut SeededRng::new(2, 0)).unwrap();
        assert_eq!(classify(&z(), &w.a_c), MeasurementClass::Algebra);
        assert_eq!(classify(&x(), &w.a_c), MeasurementClass::Neither);
        let na = preset_wall("nonabelian-cnot", &mut SeededRng::new(2, 0)).unwrap();
        let comm = crate::kernel::pauli::parse_pauli("IX").unwrap();
        assert_eq!(classify(&comm, &na.a_c), MeasurementClass::Commutant);
    }

    #[test]
    fn algebra_measurement_keeps_block_rank() {
        let mut rng = SeededRng::new(3, 0);
        let w = preset_wall_with("abelian-pair", 4, 4, &mut rng).unwrap();
        let psi = PureState::random_product(w.layout.clone(), &mut rng).unwrap();
        let rec = measurement_protocol(&w, &psi, &z(), 20, &mut rng).unwrap();
        assert_eq!(rec.class, MeasurementClass::Algebra);
        assert_eq!(rec.max_rank(), 1);
    }

    #[test]
    fn off_algebra_measurement_breaks_the_bound() {
        let mut rng = SeededRng::new(4, 0);
        let w = preset_wall_with("abelian-pair", 4, 4, &mut rng).unwrap();
        let psi = PureState::random_product(w.layout.clone(), &mut rng).unwrap();
        let rec = measurement_protocol(&w, &psi, &x(), 10, &mut rng).unwrap();
        assert_eq!(rec.class, MeasurementClass::Neither);
        assert!(rec.first_excess().is_some());
    }

    #[test]
    fn trivial_dynamics_never_entangles() {
        let mut rng = SeededRng::new(5, 0);
        let mut w = preset_wall("abelian-pair", &mut rng).unwrap();
        w.u = identity(8);
        let psi = PureState::random_product(w.layout.clone(), &mut rng).unwrap();
        let rec = measurement_protocol(&w, &psi, &x(), 10, &mut rng).unwrap();
        assert_eq!(rec.max_rank(), 1);
    }

    #[test]
    fn recorded_probabilities_match_frequencies() {
        let mut rng = SeededRng::new(6, 0);
        let w = preset_wall("abelian-pair", &mut rng).unwrap();
        let psi = PureState::random_product(w.layout.clone(), &mut rng).unwrap();
        let runs = 2000;
        let mut hits = 0;
        let mut p_first: Option<f64> = None;
        for k in 0..runs {
            let mut r = SeededRng::new(100, k);
            let rec = measurement_protocol(&w, &psi, &x(), 1, &mut r).unwrap();
            let first = &rec.rounds[0];
            let p0 = if first.outcome == 0 { first.probability } else { 1.0 - first.probability };
            if let Some(p) = p_first {
                assert!((p - p0).abs() < 1e-10);
            }
            p_first = Some(p0);
            if first.outcome == 0 {
                hits += 1;
            }
        }
        let freq = hits as f64 / runs as f64;
        assert!((freq - p_first.unwrap()).abs() < 4.0 / (runs as f64).sqrt());
    }
}
