use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use shiftlab_core::cantor::{random_hereditary, verify_hat_decomposition, FiniteFamily};
use shiftlab_core::dyadic::{Dyadic, Rat};
use shiftlab_core::ideals::{check_lscsm_axioms, Lscsm};
use shiftlab_core::shifts::{
    shift_coord_exact, weight_product, Block, BlockValues, SeqVector, Space, WeightSequence,
};

use crate::config::{thread_cap, ExperimentConfig};
use crate::output::write_json;
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: u32,
    pub failed: u32,
    pub witness: Option<String>,
}

fn suite_hat(cfg: &ExperimentConfig) -> SuiteReport {
    let v = &cfg.verify;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let mut passed = 0;
    let mut failed = 0;
    let mut witness = None;
    for _ in 0..v.trials {
        match random_hereditary(v.bound, 3, &mut rng).and_then(|f| verify_hat_decomposition(&f)) {
            Ok(true) => passed += 1,
            Ok(false) => {
                failed += 1;
                witness.get_or_insert_with(|| "decomposition mismatch".to_string());
            }
            Err(e) => {
                failed += 1;
                witness.get_or_insert_with(|| e.to_string());
            }
        }
    }
    if v.inject_non_hereditary {
        // negative control: {0,1} without its singletons must be rejected
        let planted = FiniteFamily::new(1, [0b00, 0b11]).expect("bound fits");
        match planted.hereditarity_witness() {
            Some((member, subset)) => {
                failed += 1;
                witness.get_or_insert_with(|| {
                    format!("planted family: member {member:#b} missing subset {subset:#b}")
                });
            }
            None => {
                failed += 1;
                witness.get_or_insert_with(|| "planted non-hereditary family not caught".into());
            }
        }
    }
    SuiteReport {
        suite: "hat-decomposition".into(),
        passed,
        failed,
        witness,
    }
}

fn suite_lscsm(cfg: &ExperimentConfig) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed() ^ 0x5ca1ab1e);
    let mut passed = 0;
    let mut failed = 0;
    let mut witness = None;
    for phi in [
        Lscsm::counting(),
        Lscsm::sup_density(),
        Lscsm::dyadic_block_sup(),
        Lscsm::harmonic(),
    ] {
        match check_lscsm_axioms(&phi, cfg.verify.instances, 64, &mut rng) {
            Ok(()) => passed += 1,
            Err(e) => {
                failed += 1;
                witness.get_or_insert(e);
            }
        }
    }
    SuiteReport {
        suite: "lscsm-axioms".into(),
        passed,
        failed,
        witness,
    }
}

fn random_vector(rng: &mut ChaCha8Rng, horizon: u64) -> SeqVector {
    let len = rng.gen_range(1..=6u64);
    let offset = rng.gen_range(0..=12u64);
    let values = (0..len)
        .map(|_| {
            Dyadic::from_rat(Rat::new(
                BigInt::from(rng.gen_range(-8i64..=8)),
                BigInt::from(rng.gen_range(1i64..=4)),
            ))
        })
        .collect();
    SeqVector::new(
        vec![Block {
            offset,
            values: BlockValues::Exact(values),
        }],
        Space::Lp { p: 2.0 },
        horizon,
        None,
    )
    .expect("single block cannot overlap")
}

fn suite_algebra(cfg: &ExperimentConfig) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed() ^ 0xa1_9eb7a);
    let w = WeightSequence::constant_int(2);
    let horizon = 256u64;
    let mut passed = 0;
    let mut failed = 0;
    let mut witness = None;
    for trial in 0..cfg.verify.instances {
        // telescoping of weight products
        let n = rng.gen_range(0..=40u64);
        let k = n + rng.gen_range(0..=40u64);
        let j = n + rng.gen_range(0..=(k - n));
        let whole = weight_product(&w, n, k).expect("constant weights");
        let left = weight_product(&w, n, j).expect("constant weights");
        let right = if j < k {
            weight_product(&w, j + 1, k).expect("constant weights")
        } else {
            1.0
        };
        if (whole - left * right).abs() > 1e-9 * whole.abs().max(1.0) {
            failed += 1;
            witness.get_or_insert_with(|| format!("telescoping fails at n={n}, j={j}, k={k}"));
            continue;
        }
        // linearity and the semigroup law, coordinatewise and exact
        let x = random_vector(&mut rng, horizon);
        let y = random_vector(&mut rng, horizon);
        let s = rng.gen_range(0..=4u64);
        let t = rng.gen_range(0..=4u64);
        let pos = rng.gen_range(0..=16u64);
        let ok = (|| -> shiftlab_core::Result<bool> {
            let sx = shift_coord_exact(&w, &x, s, pos)?;
            let sy = shift_coord_exact(&w, &y, s, pos)?;
            let sum_blocks = vec![
                Block {
                    offset: 0,
                    values: BlockValues::Exact(
                        (0..=(horizon / 2))
                            .map(|i| {
                                Ok(x.coeff_exact(i)?.add(&y.coeff_exact(i)?))
                            })
                            .collect::<shiftlab_core::Result<Vec<_>>>()?,
                    ),
                },
            ];
            let xy = SeqVector::new(sum_blocks, Space::Lp { p: 2.0 }, horizon, None)?;
            let sxy = shift_coord_exact(&w, &xy, s, pos)?;
            if sxy.sub(&sx.add(&sy)).sign() != 0 {
                return Ok(false);
            }
            // T^s (T^t x) = T^{s+t} x at one coordinate
            let direct = shift_coord_exact(&w, &x, s + t, pos)?;
            let stage_len = horizon / 2;
            let shifted_once = SeqVector::new(
                vec![Block {
                    offset: 0,
                    values: BlockValues::Exact(
                        (0..=stage_len)
                            .map(|i| shift_coord_exact(&w, &x, t, i))
                            .collect::<shiftlab_core::Result<Vec<_>>>()?,
                    ),
                }],
                Space::Lp { p: 2.0 },
                horizon,
                None,
            )?;
            let composed = shift_coord_exact(&w, &shifted_once, s, pos)?;
            Ok(composed.sub(&direct).sign() == 0)
        })();
        match ok {
            Ok(true) => passed += 1,
            Ok(false) => {
                failed += 1;
                witness
                    .get_or_insert_with(|| format!("shift law fails at trial {trial}, pos {pos}"));
            }
            Err(e) => {
                failed += 1;
                witness.get_or_insert_with(|| e.to_string());
            }
        }
    }
    SuiteReport {
        suite: "shift-algebra".into(),
        passed,
        failed,
        witness,
    }
}

pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let cap = thread_cap()?;
    type Suite<'a> = Box<dyn FnOnce() -> SuiteReport + Send + 'a>;
    let suites: Vec<Suite> = vec![
        Box::new(|| suite_hat(cfg)),
        Box::new(|| suite_lscsm(cfg)),
        Box::new(|| suite_algebra(cfg)),
    ];
    let mut reports: Vec<SuiteReport> = Vec::new();
    let mut pending = suites;
    while !pending.is_empty() {
        let wave: Vec<Suite> = pending
            .drain(..pending.len().min(cap))
            .collect();
        let wave_reports = std::thread::scope(|scope| {
            let handles: Vec<_> = wave.into_iter().map(|f| scope.spawn(f)).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("suite panicked"))
                .collect::<Vec<_>>()
        });
        reports.extend(wave_reports);
    }
    let path = write_json(&cfg.out_dir(), "verify_report.json", &reports)?;
    let mut all_pass = true;
    for r in &reports {
        println!(
            "{}: {} passed, {} failed{}",
            r.suite,
            r.passed,
            r.failed,
            r.witness
                .as_deref()
                .map_or(String::new(), |w| format!(" ({w})"))
        );
        all_pass &= r.failed == 0;
    }
    println!("report: {}", path.display());
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Verification("verification suite failed".into()))
    }
}
