//! Subcommand implementations.
//!
//! Handlers return the process exit code: 0 when every check passed, 1 when
//! a mathematical check failed (which indicates an implementation bug and is
//! reported with a reproduction seed where applicable). Input, parse, and
//! usage problems are returned as errors and exit with code 2.

use rankcanon_cli::format::{self, Document};
use anyhow::{bail, Context, Result};
use rankcanon::{
    check_multipartite_suite, check_transpose_rank_bound, check_tripartite_suite, column_reduce,
    marginal_necessary_check, render_inequality, run_pipeline_checks, to_canonical,
    verify_canonical_shape, verify_reduced_pattern, DensityMatrix, InequalityReport,
    LocalTransform, Matrix,
};
use std::path::Path;
use std::sync::Mutex;

const WORKERS_ENV: &str = "RANKCANON_WORKERS";

fn load(path: &Path) -> Result<Document> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    format::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn load_density(path: &Path) -> Result<DensityMatrix> {
    let rho = load(path)?.into_density()?;
    let report = rho.validate();
    if !report.is_valid() {
        bail!(
            "{}: not a valid state (hermitian: {}, psd: {}, positive trace: {})",
            path.display(),
            report.hermitian,
            report.positive_semidefinite,
            report.positive_trace
        );
    }
    Ok(rho)
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn print_inequalities(reports: &[InequalityReport], machine: bool) -> bool {
    let mut all_hold = true;
    for r in reports {
        all_hold &= r.holds;
        if machine {
            println!(
                "name={} lhs={} rhs={} holds={} saturated={}",
                r.name.replace(' ', ""),
                r.lhs,
                r.rhs,
                r.holds,
                r.saturated
            );
        } else {
            println!("{}", render_inequality(r));
        }
    }
    all_hold
}

fn write_certificate(path: &Path, cert: &LocalTransform<rankcanon::GaussianRational>) -> Result<()> {
    let mut out = String::from(
        "# local transform certificate: (outer_left x inner_left) . M . (outer_right x inner_right)\n",
    );
    let factors: [(&str, &Matrix<rankcanon::GaussianRational>); 4] = [
        ("outer_left", &cert.outer_left),
        ("inner_left", &cert.inner_left),
        ("outer_right", &cert.outer_right),
        ("inner_right", &cert.inner_right),
    ];
    for (name, m) in factors {
        out.push_str(&format!("factor {name} {} {}\n", m.rows(), m.cols()));
        for i in 0..m.rows() {
            let row: Vec<String> = (0..m.cols()).map(|j| m[(i, j)].to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn canon(
    input: &Path,
    out: Option<&Path>,
    cert: Option<&Path>,
    machine: bool,
) -> Result<i32> {
    let m = load(input)?.into_block_matrix()?;
    let canonical = to_canonical(&m)?;
    let reduced = column_reduce(&canonical)?;

    // self-checks: a failure here is a bug, not an input problem
    let shape = verify_canonical_shape(&reduced.matrix, &reduced.profile);
    let pattern = verify_reduced_pattern(&reduced);
    let replay_ok = m.apply_local(&reduced.certificate)? == reduced.matrix;

    let profile = &reduced.profile;
    let bound = check_transpose_rank_bound(&m);
    if machine {
        println!("p={}", profile.p);
        println!("k={}", join(&profile.k));
        println!("r={}", join(profile.r.as_ref().expect("reduced")));
        println!("schmidt_rank={}", bound.schmidt_rank);
        println!("rank={}", bound.rank);
        println!("inner_transpose_rank={}", bound.inner_transpose_rank);
        println!("outer_transpose_rank={}", bound.outer_transpose_rank);
    } else {
        println!("staircase columns: p = {}", profile.p);
        println!("designated blocks per column: k = [{}]", join(&profile.k));
        println!(
            "slab widths: r = [{}]",
            join(profile.r.as_ref().expect("reduced"))
        );
        println!(
            "schmidt rank {}, rank {}, inner transpose rank {}, outer transpose rank {}",
            bound.schmidt_rank, bound.rank, bound.inner_transpose_rank, bound.outer_transpose_rank
        );
    }

    if let Some(path) = out {
        let doc = Document::from_block_matrix(&reduced.matrix);
        std::fs::write(path, format::serialize(&doc))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = cert {
        write_certificate(path, &reduced.certificate)?;
    }

    if !shape.pass || !pattern.pass || !replay_ok {
        println!(
            "CHECK FAILED: {}",
            shape
                .violation
                .or(pattern.violation)
                .unwrap_or_else(|| "certificate replay mismatch".into())
        );
        return Ok(1);
    }
    Ok(0)
}

pub fn verify(input: &Path, machine: bool) -> Result<i32> {
    let m = load(input)?.into_block_matrix()?;
    let report = check_transpose_rank_bound(&m);
    let budget = report.schmidt_rank * report.rank;
    if machine {
        println!("schmidt_rank={}", report.schmidt_rank);
        println!("rank={}", report.rank);
        println!("inner_transpose_rank={}", report.inner_transpose_rank);
        println!("outer_transpose_rank={}", report.outer_transpose_rank);
        println!("inner_holds={}", report.inner_holds());
        println!("outer_holds={}", report.outer_holds());
    } else {
        println!(
            "schmidt rank {}, rank {}, bound {}",
            report.schmidt_rank, report.rank, budget
        );
        println!(
            "inner transpose rank {} <= {}: {} (slack {})",
            report.inner_transpose_rank,
            budget,
            if report.inner_holds() { "holds" } else { "VIOLATED" },
            budget.saturating_sub(report.inner_transpose_rank)
        );
        println!(
            "outer transpose rank {} <= {}: {} (slack {})",
            report.outer_transpose_rank,
            budget,
            if report.outer_holds() { "holds" } else { "VIOLATED" },
            budget.saturating_sub(report.outer_transpose_rank)
        );
    }
    Ok(if report.holds() { 0 } else { 1 })
}

pub fn entropy(input: &Path, machine: bool) -> Result<i32> {
    let rho = load_density(input)?;
    let n = rho.subsystem_count();
    let reports = match n {
        0..=2 => bail!("entropy suite requires at least 3 subsystems, found {n}"),
        3 => check_tripartite_suite(&rho)?,
        _ => check_multipartite_suite(&rho)?,
    };
    let all_hold = print_inequalities(&reports, machine);
    if !machine {
        println!(
            "{} inequalities over {} subsystems: {}",
            reports.len(),
            n,
            if all_hold { "all hold" } else { "VIOLATION" }
        );
    }
    Ok(if all_hold { 0 } else { 1 })
}

pub fn marginal(
    ab: &Path,
    ac: &Path,
    bc: &Path,
    expect_consistent: bool,
    machine: bool,
) -> Result<i32> {
    let sigma_ab = load_density(ab)?;
    let sigma_ac = load_density(ac)?;
    let sigma_bc = load_density(bc)?;
    let report = marginal_necessary_check(&sigma_ab, &sigma_ac, &sigma_bc)?;

    if machine {
        println!("marginal_a_consistent={}", report.marginals_consistent[0]);
        println!("marginal_b_consistent={}", report.marginals_consistent[1]);
        println!("marginal_c_consistent={}", report.marginals_consistent[2]);
        println!(
            "ranks={},{},{}",
            report.input_ranks[0], report.input_ranks[1], report.input_ranks[2]
        );
        for r in &report.rank_checks {
            println!(
                "name={} lhs={} rhs={} holds={}",
                r.name.replace(' ', ""),
                r.lhs,
                r.rhs,
                r.holds
            );
        }
        println!("joint_state_possible={}", report.joint_state_possible);
    } else {
        for (party, ok) in ["A", "B", "C"].iter().zip(report.marginals_consistent) {
            println!(
                "one-party marginal {party}: {}",
                if ok { "consistent" } else { "INCONSISTENT" }
            );
        }
        println!(
            "input ranks: r(AB) = {}, r(AC) = {}, r(BC) = {}",
            report.input_ranks[0], report.input_ranks[1], report.input_ranks[2]
        );
        for r in &report.rank_checks {
            println!("{}", render_inequality(r));
        }
        println!(
            "verdict: {}",
            if report.joint_state_possible {
                "necessary conditions pass"
            } else {
                "no joint state can exist"
            }
        );
    }
    if expect_consistent && !report.joint_state_possible {
        return Ok(1);
    }
    Ok(0)
}

pub fn vec_command(input: &Path, machine: bool) -> Result<i32> {
    let rho = load_density(input)?;
    let vector = rho.zero_entropy_vector()?;
    if machine {
        let parts: Vec<String> = vector.ranks.iter().map(usize::to_string).collect();
        println!("ranks={}", parts.join(","));
    } else {
        println!("(r_A, r_B, r_C, r_D, r_AB, r_AC, r_AD) = {vector}");
    }
    Ok(0)
}

fn workers_from_env() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(1),
        Err(e) => bail!("{WORKERS_ENV}: {e}"),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| anyhow::anyhow!("{WORKERS_ENV} must be a positive integer"))?;
            if n == 0 {
                bail!("{WORKERS_ENV} must be a positive integer");
            }
            Ok(n)
        }
    }
}

/// Deterministic 64-bit mix used to derive per-trial Schmidt ranks.
fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

struct TrialOutcome {
    index: usize,
    seed: u64,
    schmidt_rank: usize,
    failure: Option<String>,
}

fn run_trial(dims: [usize; 4], seed: u64, schmidt_rank: usize) -> Option<String> {
    let [m1, n1, m2, n2] = dims;
    let m = match rankcanon::random_block_matrix(m1, n1, m2, n2, schmidt_rank, seed) {
        Ok(m) => m,
        Err(e) => return Some(format!("generator: {e}")),
    };
    match run_pipeline_checks(&m) {
        Ok(report) if report.pass() => None,
        Ok(report) => Some(report.failures.join("; ")),
        Err(e) => Some(format!("pipeline: {e}")),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn fuzz(
    trials: usize,
    seed: u64,
    dims: &str,
    max_sr: Option<usize>,
    machine: bool,
) -> Result<i32> {
    let parsed: Vec<usize> = dims
        .split(',')
        .map(|part| part.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| anyhow::anyhow!("--dims expects four comma-separated integers"))?;
    if parsed.len() != 4 || parsed.iter().any(|&d| d == 0) {
        bail!("--dims expects four positive integers m1,n1,m2,n2");
    }
    let dims: [usize; 4] = [parsed[0], parsed[1], parsed[2], parsed[3]];
    let natural_bound = (dims[0] * dims[1]).min(dims[2] * dims[3]);
    let bound = max_sr.unwrap_or(natural_bound).min(natural_bound);
    if bound == 0 || trials == 0 {
        bail!("nothing to do: empty Schmidt-rank range or zero trials");
    }
    let workers = workers_from_env()?.min(trials.max(1));

    let run_one = |index: usize| -> TrialOutcome {
        let trial_seed = seed.wrapping_add(index as u64);
        let schmidt_rank = 1 + (mix64(trial_seed) % bound as u64) as usize;
        TrialOutcome {
            index,
            seed: trial_seed,
            schmidt_rank,
            failure: run_trial(dims, trial_seed, schmidt_rank),
        }
    };

    let mut outcomes: Vec<Option<TrialOutcome>> = Vec::new();
    outcomes.resize_with(trials, || None);
    if workers <= 1 {
        for (index, slot) in outcomes.iter_mut().enumerate() {
            *slot = Some(run_one(index));
        }
    } else {
        let shared = Mutex::new(&mut outcomes);
        std::thread::scope(|scope| {
            for w in 0..workers {
                let shared = &shared;
                let run_one = &run_one;
                scope.spawn(move || {
                    let mut local = Vec::new();
                    let mut index = w;
                    while index < trials {
                        local.push(run_one(index));
                        index += workers;
                    }
                    let mut guard = shared.lock().expect("poisoned");
                    for outcome in local {
                        let index = outcome.index;
                        guard[index] = Some(outcome);
                    }
                });
            }
        });
    }

    let mut passed = 0usize;
    let mut first_failure: Option<u64> = None;
    for outcome in outcomes.iter().map(|o| o.as_ref().expect("filled")) {
        match &outcome.failure {
            None => {
                passed += 1;
                if machine {
                    println!(
                        "trial={} seed={} sr={} status=ok",
                        outcome.index, outcome.seed, outcome.schmidt_rank
                    );
                }
            }
            Some(msg) => {
                first_failure.get_or_insert(outcome.seed);
                if machine {
                    println!(
                        "trial={} seed={} sr={} status=fail detail={}",
                        outcome.index,
                        outcome.seed,
                        outcome.schmidt_rank,
                        msg.replace(' ', "_")
                    );
                } else {
                    println!(
                        "trial {} seed {} sr {}: FAIL: {msg}",
                        outcome.index, outcome.seed, outcome.schmidt_rank
                    );
                }
            }
        }
    }
    if machine {
        println!("passed={passed} trials={trials}");
    } else {
        println!(
            "fuzz: {passed}/{trials} trials passed (dims {},{},{},{} seed {seed})",
            dims[0], dims[1], dims[2], dims[3]
        );
    }
    if passed != trials {
        if let Some(s) = first_failure {
            println!("reproduce with seed {s}");
        }
        return Ok(1);
    }
    Ok(0)
}
