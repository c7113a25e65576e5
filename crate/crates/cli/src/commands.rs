//! One function per subcommand. Each returns a summary, an artifact and
//! whether the run found a property violation.

use anyhow::{bail, Context};
use serde_json::{json, Map, Value};

use wallkit::algebra::{close_algebra, MatrixAlgebra};
use wallkit::blocks::decompose;
use wallkit::dynamics::invariants::conserved_algebra;
use wallkit::dynamics::verify::{site_generators, verify_wall_with_tol};
use wallkit::dynamics::{
    fragment_decomposition, gauged_sequence, haar_gauges, invariant_algebras, lightcone, scan_chain, BrickworkChain,
};
use wallkit::kernel::linalg::{identity, kron, unitarity_residual};
use wallkit::kernel::pauli::z;
use wallkit::observables::{measurement_protocol, sff_mc, verify_area_law, PureState, SffEnsemble};
use wallkit::synth::presets::{preset_center_dims, preset_central_algebra, preset_wall_with};
use wallkit::synth::{synth_wall, BlockMode, CentralAlgebra, WallSpec, WallUnitary};
use wallkit::{CMatrix, SeededRng, SystemLayout};

use crate::config::{AlgebraConfig, Command, Dims, Ensemble, RunConfig};
use crate::io::{
    algebra_to_json, blocks_to_json, lightcone_csv, matrix_to_json, protocol_csv, sff_csv, OperatorLiteral,
};

/// Monte Carlo points further than this many standard errors from the closed form count as violations.
pub const SFF_Z: f64 = 4.0;
/// Default flank dimension for presets.
pub const DEFAULT_FLANK: usize = 2;
pub const DEFAULT_CHAIN_SITES: usize = 8;
pub const DEFAULT_MAX_WIDTH: usize = 2;

// Random streams drawn from the run seed, one per purpose.
const STREAM_SYNTH: u64 = 0;
const STREAM_GAUGE: u64 = 1;
const STREAM_STATES: u64 = 2;
const STREAM_MEASURE: u64 = 3;
const STREAM_DECOMPOSE: u64 = 4;

pub struct Artifact {
    pub json: Value,
    pub csv: Option<String>,
}

pub struct Report {
    pub summary: Map<String, Value>,
    pub artifact: Artifact,
    pub violation: bool,
}

fn report(summary: Value, json: Value, csv: Option<String>, violation: bool) -> Report {
    let Value::Object(summary) = summary else {
        unreachable!("summaries are objects")
    };
    Report {
        summary,
        artifact: Artifact { json, csv },
        violation,
    }
}

fn rng(cfg: &RunConfig, stream: u64) -> SeededRng {
    SeededRng::new(cfg.seed, stream)
}

pub fn execute(cfg: &RunConfig) -> anyhow::Result<Report> {
    match cfg.command {
        Command::Close => close(cfg),
        Command::Commutant => commutant(cfg),
        Command::Center => center(cfg),
        Command::Decompose => decompose_cmd(cfg),
        Command::Synth => synth(cfg),
        Command::Verify => verify(cfg),
        Command::Lightcone => lightcone_cmd(cfg),
        Command::Invariants => invariants(cfg),
        Command::Conserved => conserved(cfg),
        Command::GaugeSeq => gauge_seq(cfg),
        Command::Fragments => fragments(cfg),
        Command::Scan => scan(cfg),
        Command::Arealaw => arealaw(cfg),
        Command::Measure => measure_cmd(cfg),
        Command::Sff => sff(cfg),
    }
}

// ---- algebra input -------------------------------------------------------

fn generated_algebra(cfg: &RunConfig) -> anyhow::Result<MatrixAlgebra> {
    let Some(lits) = &cfg.generators else {
        bail!("no generators: pass --generators or set `generators` in the config");
    };
    if lits.is_empty() {
        bail!("generators: empty list");
    }
    let gens = lits
        .iter()
        .enumerate()
        .map(|(i, g)| g.to_matrix(&format!("generators[{i}]")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let n = gens[0].nrows();
    if let Some(i) = gens.iter().position(|g| g.nrows() != n) {
        bail!("generators[{i}]: dimension {} differs from generators[0] ({n})", gens[i].nrows());
    }
    let dims = match &cfg.site_dims {
        Some(d) => {
            if d.iter().product::<usize>() != n {
                bail!("site_dims {d:?} do not multiply to the generator dimension {n}");
            }
            d.clone()
        }
        None if lits.iter().all(|g| matches!(g, OperatorLiteral::Pauli(_))) => vec![2; n.trailing_zeros() as usize],
        None => vec![n],
    };
    Ok(close_algebra(dims, &gens, cfg.tol_rank)?)
}

fn algebra_summary(alg: &MatrixAlgebra) -> Value {
    json!({"dim": alg.dim(), "hilbert_dim": alg.hilbert_dim(), "abelian": alg.is_abelian()})
}

fn close(cfg: &RunConfig) -> anyhow::Result<Report> {
    let alg = generated_algebra(cfg)?;
    Ok(report(algebra_summary(&alg), algebra_to_json(&alg), None, false))
}

fn commutant(cfg: &RunConfig) -> anyhow::Result<Report> {
    let alg = generated_algebra(cfg)?.commutant();
    Ok(report(algebra_summary(&alg), algebra_to_json(&alg), None, false))
}

fn center(cfg: &RunConfig) -> anyhow::Result<Report> {
    let alg = generated_algebra(cfg)?.center()?;
    let mut s = algebra_summary(&alg);
    s["factor"] = json!(alg.dim() == 1);
    Ok(report(s, algebra_to_json(&alg), None, false))
}

fn decompose_cmd(cfg: &RunConfig) -> anyhow::Result<Report> {
    let alg = generated_algebra(cfg)?;
    let bs = decompose(&alg, &mut rng(cfg, STREAM_DECOMPOSE))?;
    let s = json!({
        "dim": alg.dim(),
        "hilbert_dim": alg.hilbert_dim(),
        "signature": bs.signature(),
        "sum_de": bs.blocks().iter().map(|b| b.dim_d * b.dim_e).sum::<usize>(),
        "sum_d2": bs.blocks().iter().map(|b| b.dim_d * b.dim_d).sum::<usize>(),
        "reconstruction_residual": bs.block_residual(&alg),
    });
    Ok(report(s, blocks_to_json(&bs), None, false))
}

// ---- wall input ----------------------------------------------------------

fn layout_of(d: &Dims) -> anyhow::Result<SystemLayout> {
    Ok(SystemLayout::from_regions(&[d.left], &d.center, &[d.right])?)
}

enum Source {
    Built(WallUnitary),
    Given(CMatrix, SystemLayout),
}

fn central_algebra(a: &AlgebraConfig) -> anyhow::Result<CentralAlgebra> {
    Ok(match a {
        AlgebraConfig::Named(n) if n == "diag" => CentralAlgebra::Diag,
        AlgebraConfig::Named(n) if n == "full" => CentralAlgebra::Full,
        AlgebraConfig::Named(n) => bail!("wall.algebra: unknown algebra \"{n}\" (expected diag, full or {{\"generators\": …}})"),
        AlgebraConfig::Generated(g) => {
            if g.generators.iter().all(|x| matches!(x, OperatorLiteral::Pauli(_))) {
                CentralAlgebra::Pauli(
                    g.generators
                        .iter()
                        .map(|x| match x {
                            OperatorLiteral::Pauli(s) => s.clone(),
                            OperatorLiteral::Matrix(_) => unreachable!(),
                        })
                        .collect(),
                )
            } else {
                CentralAlgebra::Matrices(
                    g.generators
                        .iter()
                        .enumerate()
                        .map(|(i, x)| x.to_matrix(&format!("wall.algebra.generators[{i}]")))
                        .collect::<anyhow::Result<_>>()?,
                )
            }
        }
    })
}

fn wall_spec(cfg: &RunConfig) -> anyhow::Result<Option<WallSpec>> {
    let Some(w) = &cfg.wall else { return Ok(None) };
    let dims = cfg.dims.as_ref().context("wall: `dims` is required alongside a wall spec")?;
    Ok(Some(WallSpec {
        layout: layout_of(dims)?,
        algebra: central_algebra(&w.algebra)?,
        block_mode: BlockMode::Haar,
        permutation: w.permutation.clone(),
        seed: cfg.seed,
    }))
}

/// Flank dimensions for a preset, checking any configured center against it.
fn preset_flanks(cfg: &RunConfig, name: &str) -> anyhow::Result<(usize, usize)> {
    let center = preset_center_dims(name)?;
    match &cfg.dims {
        Some(d) => {
            if d.center != center {
                bail!("dims: preset {name} has center {center:?}, config asks for {:?}", d.center);
            }
            Ok((d.left, d.right))
        }
        None => Ok((DEFAULT_FLANK, DEFAULT_FLANK)),
    }
}

fn source(cfg: &RunConfig) -> anyhow::Result<Source> {
    if let Some(name) = &cfg.preset {
        let (dl, dr) = preset_flanks(cfg, name)?;
        return Ok(Source::Built(preset_wall_with(name, dl, dr, &mut rng(cfg, STREAM_SYNTH))?));
    }
    if let Some(spec) = wall_spec(cfg)? {
        return Ok(Source::Built(synth_wall(&spec, &mut spec.rng())?));
    }
    if let Some(lit) = &cfg.unitary {
        let dims = cfg.dims.as_ref().context("unitary: `dims` is required alongside a unitary")?;
        let layout = layout_of(dims)?;
        let u = crate::io::matrix_from_literal(lit, "unitary")?;
        if u.nrows() != layout.dim() {
            bail!("unitary: dimension {} does not match dims {dims} ({})", u.nrows(), layout.dim());
        }
        let r = unitarity_residual(&u);
        if r > 1e-9 {
            bail!("unitary: not unitary (residual {r:.3e})");
        }
        return Ok(Source::Given(u, layout));
    }
    bail!("no wall given: pass --preset, or set `preset`, `wall` or `unitary` in the config")
}

fn unitary_input(cfg: &RunConfig) -> anyhow::Result<(CMatrix, SystemLayout)> {
    Ok(match source(cfg)? {
        Source::Built(w) => (w.u, w.layout),
        Source::Given(u, l) => (u, l),
    })
}

fn wall_input(cfg: &RunConfig) -> anyhow::Result<WallUnitary> {
    match source(cfg)? {
        Source::Built(w) => Ok(w),
        Source::Given(u, layout) => {
            let inv = invariant_algebras(&u, &layout)?;
            Ok(WallUnitary::from_unitary(u, layout, inv.a_c, &mut rng(cfg, STREAM_DECOMPOSE))?)
        }
    }
}

fn layout_json(l: &SystemLayout) -> Value {
    json!({"left": l.left_dims(), "center": l.center_dims(), "right": l.right_dims()})
}

fn synth(cfg: &RunConfig) -> anyhow::Result<Report> {
    let w = match source(cfg)? {
        Source::Built(w) => w,
        Source::Given(..) => bail!("synth builds from a preset or a wall spec, not a given unitary"),
    };
    let mut r = rng(cfg, STREAM_DECOMPOSE);
    let s = json!({
        "layout": layout_json(&w.layout),
        "hilbert_dim": w.layout.dim(),
        "dim_a": w.a_c.dim(),
        "signature": decompose(&w.a_c, &mut r)?.signature(),
        "permutation": w.permutation,
        "unitarity_residual": unitarity_residual(&w.u),
    });
    // the artifact is itself a config that `verify --config` accepts
    let dims = Dims {
        left: w.layout.dim_left(),
        center: w.layout.center_dims().to_vec(),
        right: w.layout.dim_right(),
    };
    let art = json!({"dims": dims, "unitary": matrix_to_json(&w.u)});
    Ok(report(s, art, None, false))
}

fn verify(cfg: &RunConfig) -> anyhow::Result<Report> {
    let (u, layout) = unitary_input(cfg)?;
    let rep = verify_wall_with_tol(&u, &layout, cfg.tol_support)?;
    let mut r = rng(cfg, STREAM_DECOMPOSE);
    let (dim_conserved, signature) = if rep.is_wall() {
        let inv = invariant_algebras(&u, &layout)?;
        (json!(conserved_algebra(&inv)?.dim()), json!(decompose(&inv.a_c, &mut r)?.signature()))
    } else {
        (Value::Null, Value::Null)
    };
    let s = json!({
        "left": rep.left,
        "right": rep.right,
        "stabilization_time": rep.stabilization_time,
        "dimA": rep.a_c().map(MatrixAlgebra::dim),
        "dimB": rep.b_c().map(MatrixAlgebra::dim),
        "dim_conserved": dim_conserved,
        "signature": signature,
    });
    let art = s.clone();
    Ok(report(s, art, None, !rep.is_wall()))
}

/// Seed operator on the whole system; one given on `L` alone is padded with identities.
fn seed_operator(cfg: &RunConfig, layout: &SystemLayout) -> anyhow::Result<CMatrix> {
    let rest = identity(layout.dim_center() * layout.dim_right());
    let op = match &cfg.seed_op {
        Some(lit) => lit.to_matrix("seed_op")?,
        None => {
            let dl = layout.dim_left();
            if dl == 2 {
                z()
            } else {
                let [shift, _] = site_generators(dl);
                shift
            }
        }
    };
    if op.nrows() == layout.dim() {
        Ok(op)
    } else if op.nrows() == layout.dim_left() {
        Ok(kron(&op, &rest))
    } else {
        bail!(
            "seed_op: dimension {} fits neither L ({}) nor the whole system ({})",
            op.nrows(),
            layout.dim_left(),
            layout.dim()
        )
    }
}

fn lightcone_cmd(cfg: &RunConfig) -> anyhow::Result<Report> {
    let (u, layout) = unitary_input(cfg)?;
    let seed = seed_operator(cfg, &layout)?;
    let p = lightcone(&u, &seed, &layout, cfg.t_max, cfg.tol_support)?;
    let s = json!({
        "t_max": cfg.t_max,
        "envelope": p.envelope(),
        "final_support": p.support_sets.last(),
    });
    let csv = lightcone_csv(&p)?;
    Ok(report(s, serde_json::to_value(&p)?, Some(csv), false))
}

fn invariants(cfg: &RunConfig) -> anyhow::Result<Report> {
    let (u, layout) = unitary_input(cfg)?;
    let inv = invariant_algebras(&u, &layout)?;
    let s = json!({
        "dim_lbar": inv.lbar.dim(),
        "dim_rbar": inv.rbar.dim(),
        "dim_a": inv.a_c.dim(),
        "dim_b": inv.b_c.dim(),
        "stabilization_time": inv.stabilization_time,
        "central_commutator": inv.central_commutator(),
    });
    let art = json!({"a_c": algebra_to_json(&inv.a_c), "b_c": algebra_to_json(&inv.b_c)});
    Ok(report(s, art, None, false))
}

fn conserved(cfg: &RunConfig) -> anyhow::Result<Report> {
    let (u, layout) = unitary_input(cfg)?;
    let alg = conserved_algebra(&invariant_algebras(&u, &layout)?)?;
    Ok(report(algebra_summary(&alg), algebra_to_json(&alg), None, false))
}

fn fragments(cfg: &RunConfig) -> anyhow::Result<Report> {
    let (u, layout) = unitary_input(cfg)?;
    let f = fragment_decomposition(&invariant_algebras(&u, &layout)?)?;
    let mut s = serde_json::to_value(&f)?;
    s["dim_fragmented"] = json!(f.dim_fragmented());
    s["dim_total"] = json!(layout.dim() * layout.dim());
    let art = s.clone();
    Ok(report(s, art, None, false))
}

fn signature_string(sig: &[(usize, usize)]) -> String {
    sig.iter().map(|(d, e)| format!("{d}x{e}")).collect::<Vec<_>>().join(";")
}

fn gauge_seq(cfg: &RunConfig) -> anyhow::Result<Report> {
    let w = wall_input(cfg)?;
    let mut r = rng(cfg, STREAM_GAUGE);
    let gauges = haar_gauges(&w, cfg.t_max, &mut r)?;
    let seq = gauged_sequence(&w, &gauges, &mut r)?;
    let constant = seq.signatures_constant();
    let s = json!({
        "steps": cfg.t_max,
        "signature": seq.signatures[0],
        "constant": constant,
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["step", "dim", "signature"])?;
    for (k, (sig, alg)) in seq.signatures.iter().zip(&seq.algebras).enumerate() {
        w.write_record([k.to_string(), alg.dim().to_string(), signature_string(sig)])?;
    }
    let csv = String::from_utf8(w.into_inner()?)?;
    let art = json!({"signatures": seq.signatures});
    Ok(report(s, art, Some(csv), !constant))
}

fn scan(cfg: &RunConfig) -> anyhow::Result<Report> {
    let sites = cfg.chain.sites.unwrap_or(DEFAULT_CHAIN_SITES);
    let max_width = cfg.chain.max_width.unwrap_or(DEFAULT_MAX_WIDTH);
    if max_width == 0 {
        bail!("max_width must be at least 1");
    }
    let mut r = rng(cfg, STREAM_SYNTH);
    let chain = match cfg.chain.wall_site {
        Some(site) => BrickworkChain::with_wall(sites, site, &mut r)?,
        None => BrickworkChain::haar(sites, &mut r)?,
    };
    let rep = scan_chain(&chain, max_width)?;
    let s = json!({
        "sites": sites,
        "max_width": max_width,
        "checked": rep.checked.len(),
        "passing": rep.passing.len(),
        "walls": rep.walls,
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["start", "width", "left", "right"])?;
    for c in &rep.checked {
        w.write_record([
            c.window.start.to_string(),
            c.window.width.to_string(),
            c.left.to_string(),
            c.right.to_string(),
        ])?;
    }
    let csv = String::from_utf8(w.into_inner()?)?;
    Ok(report(s, serde_json::to_value(&rep)?, Some(csv), false))
}

fn arealaw(cfg: &RunConfig) -> anyhow::Result<Report> {
    let w = wall_input(cfg)?;
    let mut r = rng(cfg, STREAM_STATES);
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["state", "t", "rank"])?;
    let (mut max_rank, mut violations, mut block_violations) = (0, 0, 0);
    let mut reports = Vec::with_capacity(cfg.samples);
    for k in 0..cfg.samples {
        let psi = PureState::random_product(w.layout.clone(), &mut r)?;
        let rep = verify_area_law(&w, &psi, cfg.t_max)?;
        for (t, rank) in rep.ranks.iter().enumerate() {
            csv.write_record([k.to_string(), t.to_string(), rank.to_string()])?;
        }
        max_rank = max_rank.max(rep.ranks.iter().copied().max().unwrap_or(0));
        violations += rep.violations.len();
        block_violations += rep.blocks.iter().map(|b| b.violations.len()).sum::<usize>();
        reports.push(rep);
    }
    let s = json!({
        "states": cfg.samples,
        "t_max": cfg.t_max,
        "bound": w.a_c.dim(),
        "max_rank": max_rank,
        "violations": violations,
        "block_violations": block_violations,
    });
    let csv = String::from_utf8(csv.into_inner()?)?;
    let held = violations == 0 && block_violations == 0;
    Ok(report(s, serde_json::to_value(&reports)?, Some(csv), !held))
}

/// Configured observable on `C`, or `Z` on the first central qubit.
fn observable(cfg: &RunConfig, layout: &SystemLayout) -> anyhow::Result<CMatrix> {
    let m = match &cfg.observable {
        Some(lit) => lit.to_matrix("observable")?,
        None => {
            let c = layout.center_dims();
            if c[0] != 2 {
                bail!("observable: required when the first central site is not a qubit");
            }
            kron(&z(), &identity(layout.dim_center() / 2))
        }
    };
    if m.nrows() != layout.dim_center() {
        bail!("observable: dimension {} does not match the center ({})", m.nrows(), layout.dim_center());
    }
    Ok(m)
}

fn measure_cmd(cfg: &RunConfig) -> anyhow::Result<Report> {
    let w = wall_input(cfg)?;
    let m = observable(cfg, &w.layout)?;
    let psi = PureState::random_product(w.layout.clone(), &mut rng(cfg, STREAM_STATES))?;
    let rec = measurement_protocol(&w, &psi, &m, cfg.t_max, &mut rng(cfg, STREAM_MEASURE))?;
    let s = json!({
        "class": rec.class,
        "bound": rec.bound,
        "rounds": rec.rounds.len(),
        "max_rank": rec.max_rank(),
        "first_excess": rec.first_excess(),
    });
    let csv = protocol_csv(&rec)?;
    Ok(report(s, serde_json::to_value(&rec)?, Some(csv), false))
}

fn sff_ensemble(cfg: &RunConfig) -> anyhow::Result<SffEnsemble> {
    if cfg.ensemble == Ensemble::Haar {
        let dim = match (cfg.haar_dim, &cfg.dims) {
            (Some(d), _) => d,
            (None, Some(d)) => layout_of(d)?.dim(),
            (None, None) => bail!("haar ensemble: set --haar-dim or dims"),
        };
        if dim == 0 {
            bail!("haar_dim must be positive");
        }
        return Ok(SffEnsemble::Haar { dim });
    }
    let mut r = rng(cfg, STREAM_DECOMPOSE);
    if let Some(name) = &cfg.preset {
        let (d_l, d_r) = preset_flanks(cfg, name)?;
        let bs = decompose(&preset_central_algebra(name)?, &mut r)?;
        return Ok(SffEnsemble::Wall {
            blocks: bs.blocks().to_vec(),
            d_l,
            d_r,
            permutation: None,
        });
    }
    if let Some(spec) = wall_spec(cfg)? {
        let mut ens = SffEnsemble::from_spec(&spec, &mut r)?;
        if let SffEnsemble::Wall { permutation, .. } = &mut ens {
            *permutation = spec.permutation.clone();
        }
        return Ok(ens);
    }
    bail!("sff needs a preset, a wall spec or the haar ensemble")
}

fn sff(cfg: &RunConfig) -> anyhow::Result<Report> {
    let ens = sff_ensemble(cfg)?;
    let res = sff_mc(&ens, cfg.t_max, cfg.samples, cfg.seed)?;
    let dev = res.deviations(SFF_Z);
    let max_z = (0..res.times.len())
        .filter(|&k| res.stderr[k] > 0.0)
        .map(|k| (res.k_mc[k] - res.k_analytic[k]).abs() / res.stderr[k])
        .fold(0.0, f64::max);
    let s = json!({
        "ensemble": cfg.ensemble,
        "hilbert_dim": ens.dim(),
        "samples": res.samples,
        "t_max": cfg.t_max,
        "deviations": dev,
        "max_z": max_z,
    });
    let csv = sff_csv(&res)?;
    Ok(report(s, serde_json::to_value(&res)?, Some(csv), !dev.is_empty()))
}
