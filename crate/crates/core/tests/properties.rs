//! Randomised invariants. Every case derives its matrices from a proptest-chosen
//! seed, so failures shrink to a seed that reproduces them.

use proptest::prelude::*;

use wallkit::algebra::{close_algebra, MatrixAlgebra, OperatorSpace};
use wallkit::blocks::decompose;
use wallkit::dynamics::gauge::{gauged_sequence, haar_gauges};
use wallkit::dynamics::invariants::{conserved_algebra, invariant_algebras};
use wallkit::dynamics::verify::{lift_center, verify_wall};
use wallkit::dynamics::{evolve_op, support};
use wallkit::kernel::linalg::{
    commutator, conjugate_by, frob, identity, kron, kron_all, matmul, max_abs, orthonormal_basis, unitarity_residual,
};
use wallkit::kernel::pauli::parse_pauli;
use wallkit::kernel::random::{ginibre, haar_unitary, random_hermitian};
use wallkit::kernel::tensor::{embed, operator_schmidt_rank, partial_trace};
use wallkit::observables::{measurement_protocol, verify_area_law, PureState};
use wallkit::synth::presets::{preset_wall, preset_wall_with, PRESET_NAMES};
use wallkit::synth::{normaliser_sample, span_preservation_residual, synth_wall, CentralAlgebra, WallSpec};
use wallkit::{CMatrix, SeededRng, SystemLayout};

const PAULI: [char; 4] = ['I', 'X', 'Y', 'Z'];

fn pauli_string(code: usize, sites: usize) -> String {
    (0..sites).map(|k| PAULI[(code >> (2 * k)) & 3]).collect()
}

/// Algebra generated by a few Pauli strings on `sites` qubits, rotated by a
/// Haar unitary when `rotate` so bases are not aligned with the computational one.
fn pauli_algebra(codes: &[usize], sites: usize, rotate: bool, seed: u64) -> MatrixAlgebra {
    let w = if rotate {
        haar_unitary(1 << sites, &mut SeededRng::new(seed, 9))
    } else {
        identity(1 << sites)
    };
    let gens: Vec<CMatrix> = codes
        .iter()
        .map(|&c| conjugate_by(&w, &parse_pauli(&pauli_string(c, sites)).unwrap()))
        .collect();
    close_algebra(vec![2; sites], &gens, 1e-9).unwrap()
}

fn algebra_strategy() -> impl Strategy<Value = MatrixAlgebra> {
    (prop::collection::vec(0usize..16, 0..4), any::<bool>(), any::<u64>())
        .prop_map(|(codes, rotate, seed)| pauli_algebra(&codes, 2, rotate, seed))
}

fn central_choice(k: usize) -> CentralAlgebra {
    match k {
        0 => CentralAlgebra::Diag,
        1 => CentralAlgebra::Full,
        2 => CentralAlgebra::Pauli(vec!["XI".into(), "ZX".into()]),
        3 => CentralAlgebra::Pauli(vec!["ZI".into()]),
        4 => CentralAlgebra::Pauli(vec!["ZZ".into(), "XX".into()]),
        _ => CentralAlgebra::Pauli(vec!["IZ".into(), "ZI".into(), "XX".into()]),
    }
}

fn random_wall(k: usize, seed: u64) -> wallkit::synth::WallUnitary {
    let layout = SystemLayout::from_regions(&[2], &[2, 2], &[2]).unwrap();
    let spec = WallSpec::haar(layout, central_choice(k), seed);
    synth_wall(&spec, &mut spec.rng()).unwrap()
}

fn span_of(dims: Vec<usize>, mats: &[CMatrix]) -> OperatorSpace {
    OperatorSpace::span(dims, mats, 1e-9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    // ---- tensor kernel ------------------------------------------------

    #[test]
    fn kron_is_associative(da in 1usize..4, db in 1usize..4, dc in 1usize..4, seed in any::<u64>()) {
        let mut r = SeededRng::new(seed, 0);
        let (a, b, c) = (ginibre(da, da, &mut r), ginibre(db, db, &mut r), ginibre(dc, dc, &mut r));
        let lhs = kron(&kron(&a, &b), &c);
        let rhs = kron(&a, &kron(&b, &c));
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-14);
    }

    #[test]
    fn partial_trace_undoes_embed(
        dims in prop::collection::vec(1usize..4, 2..4),
        mask in 1u8..7,
        seed in any::<u64>(),
    ) {
        let n = dims.len();
        let sites: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        prop_assume!(!sites.is_empty() && sites.len() < n);
        let rest: Vec<usize> = (0..n).filter(|k| !sites.contains(k)).collect();
        let d_op: usize = sites.iter().map(|&s| dims[s]).product();
        let d_rest: usize = rest.iter().map(|&s| dims[s]).product();
        let op = ginibre(d_op, d_op, &mut SeededRng::new(seed, 0));
        let back = partial_trace(&embed(&op, &sites, &dims).unwrap(), &rest, &dims).unwrap();
        prop_assert!(max_abs(&(back - op.map(|z| z * d_rest as f64))) < 1e-12);
    }

    #[test]
    fn orthonormal_basis_is_idempotent(n in 1usize..6, d in 1usize..4, seed in any::<u64>()) {
        let mut r = SeededRng::new(seed, 0);
        let mats: Vec<CMatrix> = (0..n).map(|_| ginibre(d, d, &mut r)).collect();
        let once = orthonormal_basis(&mats, 1e-10);
        let twice = orthonormal_basis(&once, 1e-10);
        let a = OperatorSpace::from_orthonormal(vec![d], once);
        let b = OperatorSpace::from_orthonormal(vec![d], twice);
        prop_assert!(a.projector_distance(&b) < 1e-10);
    }

    // ---- operator algebra -----------------------------------------------

    #[test]
    fn double_commutant_returns_the_algebra(a in algebra_strategy()) {
        let cc = a.commutant().commutant();
        prop_assert!(cc.equals(&a, 1e-8), "dim A = {}, dim A'' = {}", a.dim(), cc.dim());
    }

    #[test]
    fn commutant_of_a_tensor_product_factorises(
        ca in prop::collection::vec(0usize..4, 0..3),
        cb in prop::collection::vec(0usize..4, 0..3),
        seed in any::<u64>(),
    ) {
        let a = pauli_algebra(&ca, 1, true, seed);
        let b = pauli_algebra(&cb, 1, true, seed ^ 1);
        let i2 = identity(2);
        let mut gens: Vec<CMatrix> = a.basis().iter().map(|x| kron(x, &i2)).collect();
        gens.extend(b.basis().iter().map(|y| kron(&i2, y)));
        let ab = close_algebra(vec![2, 2], &gens, 1e-9).unwrap();
        let (ac, bc) = (a.commutant(), b.commutant());
        let products: Vec<CMatrix> = ac.basis().iter().flat_map(|x| bc.basis().iter().map(move |y| kron(x, y))).collect();
        prop_assert!(ab.commutant().space().equals(&span_of(vec![2, 2], &products), 1e-8));
    }

    #[test]
    fn closing_a_closed_algebra_changes_nothing(a in algebra_strategy()) {
        let again = close_algebra(a.site_dims().to_vec(), a.basis(), 1e-9).unwrap();
        prop_assert!(again.equals(&a, 1e-9));
    }

    #[test]
    fn abelian_algebras_split_into_orthogonal_projectors(
        codes in prop::collection::vec(prop::sample::select(vec![0usize, 3, 12, 15]), 1..3),
        seed in any::<u64>(),
    ) {
        // strings over {I, Z} commute; a rotation hides it
        let a = pauli_algebra(&codes, 2, true, seed);
        prop_assert!(a.is_abelian());
        let ps = a.abelian_projectors(&mut SeededRng::new(seed, 1)).unwrap();
        prop_assert_eq!(ps.len(), a.dim());
        for (i, p) in ps.iter().enumerate() {
            for (j, q) in ps.iter().enumerate() {
                let want = if i == j { p.clone() } else { CMatrix::zeros(4, 4) };
                prop_assert!(max_abs(&(matmul(p, q) - want)) < 1e-9);
            }
        }
    }

    // ---- block decomposition ---------------------------------------------

    #[test]
    fn wedderburn_identities(a in algebra_strategy(), seed in any::<u64>()) {
        let bs = decompose(&a, &mut SeededRng::new(seed, 0)).unwrap();
        let sum_de: usize = bs.blocks().iter().map(|b| b.dim_d * b.dim_e).sum();
        let sum_d2: usize = bs.blocks().iter().map(|b| b.dim_d * b.dim_d).sum();
        prop_assert_eq!(sum_de, a.hilbert_dim());
        prop_assert_eq!(sum_d2, a.dim());
        prop_assert!(bs.block_residual(&a) < 1e-8);
        prop_assert!(unitarity_residual(bs.v()) < 1e-10);
        prop_assert!(bs.reconstruct().equals(&a, 1e-8));
    }

    #[test]
    fn commutant_mirrors_the_blocks(a in algebra_strategy(), seed in any::<u64>()) {
        let mut r = SeededRng::new(seed, 0);
        let mut mirrored: Vec<(usize, usize)> = decompose(&a, &mut r).unwrap().signature().iter().map(|&(d, e)| (e, d)).collect();
        mirrored.sort_unstable();
        let mut comm = decompose(&a.commutant(), &mut r).unwrap().signature();
        comm.sort_unstable();
        prop_assert_eq!(comm, mirrored);
    }

    #[test]
    fn signature_is_conjugation_invariant(a in algebra_strategy(), seed in any::<u64>()) {
        let mut r = SeededRng::new(seed, 0);
        let w = haar_unitary(4, &mut r);
        let rotated: Vec<CMatrix> = a.basis().iter().map(|b| conjugate_by(&w, b)).collect();
        let b = MatrixAlgebra::from_closed_space(OperatorSpace::from_orthonormal(vec![2, 2], rotated));
        let mut s1 = decompose(&a, &mut r).unwrap().signature();
        let mut s2 = decompose(&b, &mut r).unwrap().signature();
        s1.sort_unstable();
        s2.sort_unstable();
        prop_assert_eq!(s1, s2);
    }

    // ---- wall synthesis -------------------------------------------------------

    #[test]
    fn synthesized_walls_verify(k in 0usize..6, seed in any::<u64>()) {
        let w = random_wall(k, seed);
        let rep = verify_wall(&w.u, &w.layout).unwrap();
        prop_assert!(rep.left && rep.right);
        prop_assert!(rep.a_c().unwrap().equals(&w.a_c, 1e-8));
    }

    #[test]
    fn normaliser_is_a_group_that_also_fixes_the_commutant(a in algebra_strategy(), seed in any::<u64>()) {
        let mut r = SeededRng::new(seed, 0);
        let g = normaliser_sample(&a, &mut r).unwrap();
        let h = normaliser_sample(&a, &mut r).unwrap();
        let gh = matmul(&g, &h);
        prop_assert!(span_preservation_residual(&gh, a.space()) < 1e-9);
        prop_assert!(span_preservation_residual(&g.adjoint(), a.space()) < 1e-9);
        prop_assert!(span_preservation_residual(&g, a.commutant().space()) < 1e-9);
    }

    #[test]
    fn product_walls_are_exactly_the_improper_ones(k in 0usize..6, seed in any::<u64>()) {
        let w = random_wall(k, seed);
        let dc = w.layout.dim_center();
        let improper = w.a_c.dim() == 1 || w.a_c.dim() == dc * dc;
        // ⟨𝟙⟩ splits as (L)(CR); 𝓜_C as (LC)(R)
        let factors = operator_schmidt_rank(&w.u, 2, 1e-9) == 1 || operator_schmidt_rank(&w.u, 2 * dc, 1e-9) == 1;
        prop_assert_eq!(improper, factors);
    }

    // ---- Heisenberg dynamics --------------------------------------------------

    #[test]
    fn left_and_right_verdicts_agree(kind in 0usize..4, k in 0usize..7, seed in any::<u64>()) {
        let mut r = SeededRng::new(seed, 0);
        let layout = SystemLayout::tripartite(2, 2, 2);
        let (u, layout) = match kind {
            0 => {
                let w = preset_wall(PRESET_NAMES[k], &mut r).unwrap();
                (w.u, w.layout)
            }
            1 => {
                let w = random_wall(k % 6, seed);
                (w.u, w.layout)
            }
            2 => (haar_unitary(8, &mut r), layout),
            // two overlapping Haar gates: typically not a wall
            _ => {
                let a = kron(&haar_unitary(4, &mut r), &identity(2));
                let b = kron(&identity(2), &haar_unitary(4, &mut r));
                (matmul(&b, &a), layout)
            }
        };
        let rep = verify_wall(&u, &layout).unwrap();
        prop_assert_eq!(rep.left, rep.right);
    }

    #[test]
    fn closure_grows_strictly_then_stops(k in 0usize..6, seed in any::<u64>()) {
        let w = random_wall(k, seed);
        let rep = verify_wall(&w.u, &w.layout).unwrap();
        let dc = w.layout.dim_center();
        for side in [&rep.left_side, &rep.right_side] {
            prop_assert!(side.dims.windows(2).all(|p| p[0] < p[1]), "{:?}", side.dims);
            prop_assert_eq!(side.stabilization_time, side.dims.len() - 1);
            prop_assert!(side.stabilization_time <= dc * dc);
        }
    }

    #[test]
    fn invariant_flanks_commute(k in 0usize..6, seed in any::<u64>()) {
        let w = random_wall(k, seed);
        let inv = invariant_algebras(&w.u, &w.layout).unwrap();
        prop_assert!(inv.lifted_commutator() < 1e-9);
    }

    #[test]
    fn conserved_charges_never_leave_the_center(k in 0usize..6, seed in any::<u64>(), t in 1usize..=50) {
        let w = random_wall(k, seed);
        let inv = invariant_algebras(&w.u, &w.layout).unwrap();
        let cons = conserved_algebra(&inv).unwrap();
        let center: Vec<usize> = w.layout.center_sites().collect();
        for c in cons.basis() {
            let o = evolve_op(&w.u, &lift_center(&w.layout, c), t).unwrap();
            let s = support(&o, &w.layout, 1e-8).unwrap();
            prop_assert!(s.iter().all(|x| center.contains(x)), "t={t}: {s:?}");
        }
    }

    #[test]
    fn local_kicks_keep_the_wall(k in 0usize..7, seed in any::<u64>(), from_right in any::<bool>()) {
        let mut r = SeededRng::new(seed, 0);
        let w = preset_wall(PRESET_NAMES[k], &mut r).unwrap();
        let layout = &w.layout;
        let (dl, dc, dr) = (layout.dim_left(), layout.dim_center(), layout.dim_right());
        let seed_op = if from_right {
            kron(&identity(dl * dc), &random_hermitian(dr, &mut r))
        } else {
            kron(&random_hermitian(dl, &mut r), &identity(dc * dr))
        };
        let allowed: Vec<usize> = if from_right {
            layout.center_sites().chain(layout.right_sites()).collect()
        } else {
            layout.left_sites().chain(layout.center_sites()).collect()
        };
        let mut o = seed_op;
        for t in 1..=50 {
            let kick = if from_right {
                kron_all([&identity(dl), &identity(dc), &haar_unitary(dr, &mut r)])
            } else {
                kron_all([&haar_unitary(dl, &mut r), &identity(dc), &identity(dr)])
            };
            o = conjugate_by(&matmul(&w.u, &kick), &o);
            let s = support(&o, layout, 1e-8).unwrap();
            prop_assert!(s.iter().all(|x| allowed.contains(x)), "t={t}: {s:?}");
        }
    }

    #[test]
    fn gauged_signatures_are_constant(k in 0usize..7, seed in any::<u64>()) {
        let mut r = SeededRng::new(seed, 0);
        let w = preset_wall(PRESET_NAMES[k], &mut r).unwrap();
        let gauges = haar_gauges(&w, 6, &mut r).unwrap();
        let seq = gauged_sequence(&w, &gauges, &mut r).unwrap();
        prop_assert!(seq.signatures_constant(), "{:?}", seq.signatures);
    }

    // ---- observables ---------------------------------------------------------

    #[test]
    fn area_law_for_random_walls(k in 0usize..6, seed in any::<u64>()) {
        let w = random_wall(k, seed);
        let psi = PureState::random_product(w.layout.clone(), &mut SeededRng::new(seed, 3)).unwrap();
        let rep = verify_area_law(&w, &psi, 100).unwrap();
        prop_assert!(rep.holds(), "{:?}", rep.violations);
    }

    #[test]
    fn commutant_measurements_respect_the_bound(seed in any::<u64>()) {
        let mut r = SeededRng::new(seed, 0);
        let w = preset_wall_with("nonabelian-cnot", 4, 4, &mut r).unwrap();
        let m = w.a_c.commutant().random_hermitian_element(&mut r);
        for a in w.a_c.basis() {
            prop_assert!(frob(&commutator(&m, a)) < 1e-9);
        }
        let psi = PureState::random_product(w.layout.clone(), &mut r).unwrap();
        let rec = measurement_protocol(&w, &psi, &m, 12, &mut r).unwrap();
        prop_assert!(rec.max_rank() <= rec.bound, "{:?}", rec.rounds.iter().map(|x| x.schmidt_rank).collect::<Vec<_>>());
    }
}
