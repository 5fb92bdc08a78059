use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde::Serialize;
use shiftlab_core::constructions::eq::{eq_build_blocks, eq_error_report, eq_vector, stage_pair};
use shiftlab_core::constructions::fhc::{fhc_schedule, fhc_vector, FhcSchedule};
use shiftlab_core::constructions::ne::{
    ne_default_targets, ne_index_plan, ne_scaled_schedule, ne_vector_scaled, ne_windows_disjoint,
};
use shiftlab_core::constructions::tm::{
    tm_admissible_range, tm_build_schedule, tm_claim_equivalence_check, tm_f,
    tm_zero_density_check, BuildMode, TMSchedule,
};
use shiftlab_core::cantor::{delta_check, BairePoint};
use shiftlab_core::dyadic::Rat;
use shiftlab_core::ideals::{peak_density_estimate, rat_to_f64, upper_density_estimate, Lscsm};
use shiftlab_core::natset::NatSet;
use shiftlab_core::shifts::{orbit_visits, p_norm, Cylinder, SeqVector, WeightSequence};

use crate::config::{parse_rat, parse_rat_rows, ExperimentConfig, OutputFormat};
use crate::output::{write_csv, write_json};
use crate::CliError;

fn rr(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

fn default_targets(max_i: usize) -> Vec<Vec<Rat>> {
    (0..=max_i)
        .map(|i| match i {
            0 => vec![rr(1, 1)],
            1 => vec![rr(1, 2)],
            _ if i % 2 == 0 => vec![rr(1, 3), rr(-1, 1)],
            _ => vec![rr(2, 1), rr(1, 2), rr(1, 1)],
        })
        .collect()
}

fn targets_from(cfg: &ExperimentConfig, max_i: usize) -> Result<Vec<Vec<Rat>>, CliError> {
    if cfg.construct.targets.is_empty() {
        Ok(default_targets(max_i))
    } else {
        parse_rat_rows(&cfg.construct.targets)
    }
}

/// Support dump: magnitudes can underflow binary64, so the log2 column is
/// authoritative for small coordinates.
fn write_vector(
    cfg: &ExperimentConfig,
    name: &str,
    z: &SeqVector,
) -> Result<std::path::PathBuf, CliError> {
    #[derive(Serialize)]
    struct Coord {
        n: u64,
        value: f64,
        log2_abs: Option<f64>,
    }
    let coords: Vec<Coord> = z
        .support()
        .into_iter()
        .map(|n| {
            let v = z.coeff_log(n).map_err(CliError::runtime)?;
            Ok(Coord {
                n,
                value: z.coeff_f64(n).map_err(CliError::runtime)?,
                log2_abs: (v.sign != 0).then_some(v.log2),
            })
        })
        .collect::<Result<_, CliError>>()?;
    match cfg.format() {
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = coords
                .iter()
                .map(|c| {
                    vec![
                        c.n.to_string(),
                        format!("{:.12e}", c.value),
                        c.log2_abs.map_or(String::new(), |l| format!("{l:.6}")),
                    ]
                })
                .collect();
            write_csv(
                &cfg.out_dir(),
                &format!("{name}_blocks.csv"),
                &["n", "value", "log2_abs"],
                &rows,
            )
        }
        OutputFormat::Json => write_json(&cfg.out_dir(), &format!("{name}_blocks.json"), &coords),
    }
}

#[derive(Serialize)]
struct FhcManifest {
    kind: &'static str,
    p: f64,
    horizon: u64,
    period: u64,
    certified_lower_density: String,
    offsets: Vec<u64>,
    empirical_upper_densities: Vec<f64>,
    support_len: usize,
    blocks_file: String,
}

fn run_fhc(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let horizon = cfg.horizon();
    let w = WeightSequence::constant_int(2);
    let targets = targets_from(cfg, 3)?;
    let radius = parse_rat(&cfg.construct.radius)?;
    let sched = fhc_schedule(&w, cfg.construct.p, targets, &radius).map_err(CliError::runtime)?;
    let y = fhc_vector(&w, &sched, horizon).map_err(CliError::runtime)?;
    let empirical = (0..sched.targets.len())
        .map(|i| {
            let s = sched.progression(i, horizon);
            Ok(rat_to_f64(
                &upper_density_estimate(&s, horizon).map_err(CliError::runtime)?,
            ))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let blocks = write_vector(cfg, "fhc", &y)?;
    let manifest = FhcManifest {
        kind: "fhc",
        p: cfg.construct.p,
        horizon,
        period: sched.period,
        certified_lower_density: sched.certified_lower_density().to_string(),
        offsets: (0..sched.targets.len()).map(|i| sched.offset(i)).collect(),
        empirical_upper_densities: empirical,
        support_len: y.support_len(),
        blocks_file: blocks.display().to_string(),
    };
    let path = write_json(&cfg.out_dir(), "fhc_manifest.json", &manifest)?;
    println!(
        "fhc: period {} certified density {} -> {}",
        manifest.period,
        manifest.certified_lower_density,
        path.display()
    );
    Ok(())
}

fn tm_setup(
    cfg: &ExperimentConfig,
    x: &BairePoint,
) -> Result<(WeightSequence, FhcSchedule, SeqVector, TMSchedule), CliError> {
    let w = WeightSequence::constant_int(2);
    let targets = targets_from(cfg, 3)?;
    let radius = parse_rat(&cfg.construct.radius)?;
    let fsched = fhc_schedule(&w, cfg.construct.p, targets, &radius).map_err(CliError::runtime)?;
    let y = fhc_vector(&w, &fsched, cfg.horizon().max(40_000)).map_err(CliError::runtime)?;
    let ks: Vec<u64> = (0..x.prefix.len())
        .map(|i| fsched.prefix_len(i.min(fsched.targets.len() - 1)))
        .collect();
    let sched = tm_build_schedule(
        x,
        &ks,
        BuildMode::Certified {
            period: fsched.period,
        },
    )
    .map_err(CliError::runtime)?;
    Ok((w, fsched, y, sched))
}

#[derive(Serialize)]
struct TmManifest {
    kind: &'static str,
    x: Vec<u64>,
    stages: usize,
    schedule_len: String,
    claim_equivalence_checked: u64,
    claim_equivalence_passed: u64,
    claim_equivalence_pass_fraction: f64,
    zero_density_lower: f64,
    norm: f64,
    blocks_file: String,
}

fn run_tm(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let x = BairePoint::new(cfg.construct.x.clone());
    if !delta_check(&x) {
        return Err(CliError::Validation(format!(
            "baire prefix {:?} leaves the triangle (needs x_n <= n)",
            x.prefix
        )));
    }
    let (w, _, y, sched) = tm_setup(cfg, &x)?;
    let gamma = sched
        .stages
        .last()
        .expect("nonempty schedule")
        .gamma
        .clone()
        + BigUint::from(8u32);
    let z_h = gamma
        .to_u64()
        .ok_or_else(|| CliError::Runtime("schedule length exceeds u64".into()))?;
    let z = tm_f(&w, &x, &y, &sched, z_h).map_err(CliError::runtime)?;
    let mut checked = 0u64;
    let mut passed = 0u64;
    for t in 0..sched.stages.len() {
        let Some((lo, hi)) = tm_admissible_range(&sched, t) else {
            continue;
        };
        let per_stage = (cfg.construct.pairs / sched.stages.len() as u64).max(1);
        let step = ((hi - lo) / per_stage).max(1);
        let mut n = lo;
        while n <= hi {
            for i in 0..=t as u64 {
                checked += 1;
                if tm_claim_equivalence_check(&w, &y, &z, &sched, i, n).map_err(CliError::runtime)?
                {
                    passed += 1;
                }
            }
            n += step;
        }
    }
    let n_max = z_h - 8;
    let zero_density = tm_zero_density_check(&z, n_max).map_err(CliError::runtime)?;
    let blocks = write_vector(cfg, "tm", &z)?;
    let manifest = TmManifest {
        kind: "tm",
        x: x.prefix.clone(),
        stages: sched.stages.len(),
        schedule_len: sched.stages.last().unwrap().gamma.to_string(),
        claim_equivalence_checked: checked,
        claim_equivalence_passed: passed,
        claim_equivalence_pass_fraction: passed as f64 / checked.max(1) as f64,
        zero_density_lower: rat_to_f64(&zero_density),
        norm: p_norm(&z, cfg.construct.p).map_err(CliError::runtime)?,
        blocks_file: blocks.display().to_string(),
    };
    let path = write_json(&cfg.out_dir(), "tm_manifest.json", &manifest)?;
    println!(
        "tm: {}/{} orbit identities, zero density {:.4} -> {}",
        passed,
        checked,
        manifest.zero_density_lower,
        path.display()
    );
    if passed != checked {
        return Err(CliError::Runtime(format!(
            "claim-equivalence mismatches: {} of {checked}",
            checked - passed
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct EqManifest {
    kind: &'static str,
    p: f64,
    t_max: usize,
    horizon: u64,
    g_table: Vec<(usize, u32, Option<u64>)>,
    errors_checked: usize,
    bound_violations: usize,
    max_error: f64,
    blocks_file: String,
}

fn run_eq(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let horizon = cfg.horizon().max(200_000);
    let t_max = cfg.construct.t_max;
    let max_i = (0..=t_max).map(|t| stage_pair(t).0).max().unwrap_or(0);
    let targets = targets_from(cfg, max_i)?;
    if targets.len() <= max_i {
        return Err(CliError::Validation(format!(
            "t_max {t_max} addresses target {max_i}, only {} given",
            targets.len()
        )));
    }
    let w = WeightSequence::constant_int(2);
    let radius = parse_rat(&cfg.construct.radius)?;
    let fsched =
        fhc_schedule(&w, cfg.construct.p, targets.clone(), &radius).map_err(CliError::runtime)?;
    let y = fhc_vector(&w, &fsched, horizon).map_err(CliError::runtime)?;
    let visit_sets: Vec<NatSet> = (0..targets.len())
        .map(|i| fsched.progression(i, horizon))
        .collect();
    let m: Vec<u64> = (0..targets.len())
        .map(|i| fsched.prefix_len(i).max(2) - 1)
        .collect();
    let blocks = eq_build_blocks(&y, &w, &visit_sets, &m, &Lscsm::counting(), t_max, horizon)
        .map_err(CliError::runtime)?;
    let z = eq_vector(&y, &blocks).map_err(CliError::runtime)?;
    let report = eq_error_report(&w, &z, &blocks, &fsched.targets).map_err(CliError::runtime)?;
    let violations = report
        .iter()
        .filter(|e| e.measured > e.bound + 1e-9)
        .count();
    let g_table = (0..blocks.f_sets.len())
        .map(|t| {
            let (i, j) = stage_pair(t);
            (i, j, blocks.g(i, j))
        })
        .collect();
    let blocks_file = write_vector(cfg, "eq", &z)?;
    let manifest = EqManifest {
        kind: "eq",
        p: cfg.construct.p,
        t_max,
        horizon,
        g_table,
        errors_checked: report.len(),
        bound_violations: violations,
        max_error: report.iter().map(|e| e.measured).fold(0.0, f64::max),
        blocks_file: blocks_file.display().to_string(),
    };
    let path = write_json(&cfg.out_dir(), "eq_manifest.json", &manifest)?;
    println!(
        "eq: {} orbit errors checked, {} bound violations -> {}",
        manifest.errors_checked,
        manifest.bound_violations,
        path.display()
    );
    if violations > 0 {
        return Err(CliError::Runtime(format!(
            "{violations} error-bound violations"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct NePlanManifest {
    kind: &'static str,
    i_max: usize,
    m: Vec<u64>,
    n: Vec<String>,
    j_lens: Vec<String>,
    q: Vec<String>,
    windows_disjoint: bool,
    norm_pow_bound: f64,
}

fn run_ne_plan(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let i_max = cfg.construct.i_max;
    let m: Vec<u64> = if cfg.construct.m.is_empty() {
        vec![1; i_max + 1]
    } else {
        cfg.construct.m.clone()
    };
    if m.len() <= i_max {
        return Err(CliError::Validation(format!(
            "need {} fiber sizes, got {}",
            i_max + 1,
            m.len()
        )));
    }
    let h = |i: usize| ((i as u64) + 1).trailing_zeros();
    let plan = ne_index_plan(i_max, &h, &m).map_err(CliError::runtime)?;
    let manifest = NePlanManifest {
        kind: "ne-plan",
        i_max,
        m,
        n: plan.stages.iter().map(|s| s.n.to_string()).collect(),
        j_lens: plan
            .stages
            .iter()
            .map(|s| format!("{}*{}!+{}", s.j_len.coeff, s.j_len.arg, s.j_len.offset))
            .collect(),
        q: plan.stages.iter().map(|s| s.q.to_string()).collect(),
        windows_disjoint: ne_windows_disjoint(&plan).is_ok(),
        norm_pow_bound: plan.norm_pow_bound,
    };
    let path = write_json(&cfg.out_dir(), "ne_plan_manifest.json", &manifest)?;
    println!(
        "ne-plan: n_0 = {}, {} stages -> {}",
        manifest.n[0],
        manifest.n.len(),
        path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct NeScaledManifest {
    kind: &'static str,
    p: f64,
    horizon: u64,
    targets: usize,
    peak_densities: Vec<f64>,
    density_floors: Vec<f64>,
    norm: f64,
    blocks_file: String,
}

fn run_ne_scaled(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let horizon = cfg.horizon().max(100_000);
    let (targets, m) = if cfg.construct.targets.is_empty() {
        ne_default_targets()
    } else {
        let t = parse_rat_rows(&cfg.construct.targets)?;
        let m = t.iter().map(|row| row.len() as u64).collect();
        (t, m)
    };
    let w = WeightSequence::fratio(2.0);
    let sched = ne_scaled_schedule(&targets, &m, horizon).map_err(CliError::runtime)?;
    let z = ne_vector_scaled(&w, &sched, cfg.construct.p, horizon).map_err(CliError::runtime)?;
    let radius = parse_rat(&cfg.construct.radius)?;
    let mut peaks = Vec::new();
    let mut floors = Vec::new();
    for (k, target) in targets.iter().enumerate() {
        let u = Cylinder::new(target.clone(), radius.clone());
        let visits =
            orbit_visits(&w, &z, &u, horizon - target.len() as u64).map_err(CliError::runtime)?;
        let peak = peak_density_estimate(&visits, horizon - target.len() as u64)
            .map_err(CliError::runtime)?;
        peaks.push(rat_to_f64(&peak));
        floors.push(1.0 / m[k] as f64 - 0.05);
    }
    let blocks = write_vector(cfg, "ne_scaled", &z)?;
    let manifest = NeScaledManifest {
        kind: "ne-scaled",
        p: cfg.construct.p,
        horizon,
        targets: targets.len(),
        peak_densities: peaks,
        density_floors: floors,
        norm: p_norm(&z, cfg.construct.p).map_err(CliError::runtime)?,
        blocks_file: blocks.display().to_string(),
    };
    let path = write_json(&cfg.out_dir(), "ne_scaled_manifest.json", &manifest)?;
    println!(
        "ne-scaled: peaks {:?} (floors {:?}) -> {}",
        manifest.peak_densities,
        manifest.density_floors,
        path.display()
    );
    Ok(())
}

pub fn cmd_construct(cfg: &ExperimentConfig) -> Result<(), CliError> {
    match cfg.construct.kind.as_str() {
        "fhc" => run_fhc(cfg),
        "tm" => run_tm(cfg),
        "eq" => run_eq(cfg),
        "ne-plan" => run_ne_plan(cfg),
        "ne-scaled" => run_ne_scaled(cfg),
        other => Err(CliError::Validation(format!(
            "unknown construction `{other}` (expected fhc, tm, eq, ne-plan, ne-scaled)"
        ))),
    }
}
