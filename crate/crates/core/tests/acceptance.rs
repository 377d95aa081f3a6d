//! Acceptance suite: fifteen criteria, one printed line each. Exits nonzero when
//! any criterion fails. Set `ACCEPTANCE_ONLY=3,14` to run a subset.

use std::process::ExitCode;
use std::time::Instant;

use skewsim::validation::experiments::{
    coalescence, coupling_order, density_identities, exit_identities, exit_time, hitting, l1_skew,
    local_time_ladder, occupation, occupation_reflection_error, pde_triangle, sde_residual, sign_and_marginal,
    transform_checks, ExitKind, GeneratorKind, DEFAULT_LADDER,
};
use skewsim::validation::{convergence_rate, rescaling_limit, RateOptions, RescalingOptions, ValidationReport};
use skewsim::{Piece, PiecewiseFunction, RngStream, SkewParameter};

const SEED: u64 = 20_240_601;
const ALPHAS: [f64; 4] = [0.25, 0.5, 0.7, 0.9];

type Outcome = Result<Vec<ValidationReport>, skewsim::Error>;

fn sk(a: f64) -> SkewParameter {
    SkewParameter::from_alpha(a).expect("valid alpha")
}

fn stream(criterion: u64, part: u64) -> RngStream {
    RngStream::new(SEED + criterion, part)
}

fn sign_generators() -> [GeneratorKind; 4] {
    [
        GeneratorKind::Walk { n: 200 },
        GeneratorKind::Euler { dt: 1e-4 },
        GeneratorKind::FollowLeader { delta: 1e-4 },
        GeneratorKind::SchemeC { h: 0.1 },
    ]
}

/// Terminal samples are shared by criteria 1 and 2, so both run together.
fn sign_and_marginal_all() -> Result<(Vec<ValidationReport>, Vec<ValidationReport>), skewsim::Error> {
    let (mut signs, mut marginals) = (Vec::new(), Vec::new());
    for (i, &a) in ALPHAS.iter().enumerate() {
        for (j, g) in sign_generators().into_iter().enumerate() {
            let (s, m) = sign_and_marginal(g, sk(a), 1.0, 100_000, stream(1, (i * 10 + j) as u64))?;
            signs.push(s);
            marginals.push(m);
        }
    }
    Ok((signs, marginals))
}

fn c3_density() -> Outcome {
    let mut out = Vec::new();
    for a in ALPHAS {
        out.extend(density_identities(sk(a))?);
    }
    Ok(out)
}

fn c4_hitting() -> Outcome {
    let mut out = Vec::new();
    for (i, &a) in ALPHAS.iter().enumerate() {
        out.push(hitting(ExitKind::Walk { n: 50 }, sk(a), 100_000, stream(4, 2 * i as u64))?);
        out.push(hitting(ExitKind::SchemeC { h: 0.1 }, sk(a), 100_000, stream(4, 2 * i as u64 + 1))?);
        out.push(exit_identities(sk(a), &[])?.remove(0));
    }
    Ok(out)
}

fn c5_exit_time() -> Outcome {
    let mut out = Vec::new();
    for (i, &a) in ALPHAS.iter().enumerate() {
        out.extend(exit_identities(sk(a), &[0.5, 1.0, 2.0])?.into_iter().skip(1));
        for (j, k) in [ExitKind::Walk { n: 50 }, ExitKind::SchemeC { h: 0.1 }, ExitKind::SchemeE { h: 0.1 }]
            .into_iter()
            .enumerate()
        {
            out.push(exit_time(k, sk(a), 100_000, stream(5, (i * 10 + j) as u64))?);
        }
    }
    Ok(out)
}

fn c6_local_time() -> Outcome {
    local_time_ladder(sk(0.7), &DEFAULT_LADDER, 1.0, 10_000, stream(6, 0))
}

fn c7_residual() -> Outcome {
    Ok(vec![sde_residual(sk(0.7), 1e-4, 0.01, 0.05, 1.0, 2_000, stream(7, 0))?])
}

fn c8_occupation() -> Outcome {
    let mut out = Vec::new();
    for (i, a) in [0.5, 0.7].into_iter().enumerate() {
        out.push(occupation(sk(a), 500, 100_000, stream(8, i as u64))?);
    }
    for a in ALPHAS {
        let e = occupation_reflection_error(sk(a))?;
        out.push(ValidationReport::new(
            format!("occupation_reflection/alpha{a}"),
            skewsim::validation::Target::Value(0.0),
            e,
            None,
            None,
            skewsim::validation::ToleranceRule::Absolute { tol: 1e-13 },
            None,
            1001,
        ));
    }
    Ok(out)
}

fn c9_coupling() -> Outcome {
    Ok(vec![
        coupling_order(sk(0.3), sk(0.8), 50, 1.0, 100_000, stream(9, 0))?,
        coalescence(sk(0.7), 10, -0.5, 0.5, &[1.0, 4.0, 16.0], 10_000, stream(9, 1))?,
    ])
}

fn c10_l1() -> Outcome {
    Ok(vec![
        l1_skew(0.2, 0.6, 1e-3, 1.0, 20_000, stream(10, 0))?,
        l1_skew(-0.5, 0.5, 1e-3, 1.0, 20_000, stream(10, 1))?,
    ])
}

fn c11_rate() -> Outcome {
    let r = convergence_rate(sk(0.7), &[10, 20, 40, 80], 1280, &RateOptions::default(), stream(11, 0))?;
    let monotone = r.detail("monotone").unwrap_or(0.0);
    let mono = ValidationReport::new(
        "rate_monotone",
        skewsim::validation::Target::Value(1.0),
        monotone,
        None,
        None,
        skewsim::validation::ToleranceRule::AtLeast,
        Some(SEED + 11),
        r.sample_size,
    );
    Ok(vec![r, mono])
}

fn c12_rescaling() -> Outcome {
    let c = 3f64.ln() / 4.0;
    let b = PiecewiseFunction::new(
        vec![-1.0, 1.0],
        vec![Piece::Constant(0.0), Piece::Constant(c), Piece::Constant(0.0)],
    )?;
    Ok(vec![rescaling_limit(&b, 50, 100_000, &RescalingOptions::default(), stream(12, 0))?])
}

fn c13_pde() -> Outcome {
    pde_triangle(sk(0.7), 1.0, 0.0, GeneratorKind::SchemeC { h: 0.1 }, 100_000, stream(13, 0))
}

fn c14_transform() -> Outcome {
    transform_checks(1000, stream(14, 0))
}

/// Same drivers under one and four workers; the JSON of every report must match.
fn c15_determinism() -> Outcome {
    let run = |workers: usize| -> Result<String, skewsim::Error> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
        pool.install(|| {
            let mut reps = Vec::new();
            for g in [
                GeneratorKind::Walk { n: 50 },
                GeneratorKind::Euler { dt: 1e-3 },
                GeneratorKind::FollowLeader { delta: 1e-3 },
                GeneratorKind::SchemeC { h: 0.1 },
                GeneratorKind::Exact,
            ] {
                let (s, m) = sign_and_marginal(g, sk(0.7), 1.0, 5_000, stream(15, 0))?;
                reps.push(s);
                reps.push(m);
            }
            reps.push(occupation(sk(0.7), 50, 5_000, stream(15, 1))?);
            reps.extend(local_time_ladder(sk(0.7), &DEFAULT_LADDER[..2], 1.0, 1_000, stream(15, 2))?);
            reps.push(l1_skew(0.2, 0.6, 1e-2, 1.0, 5_000, stream(15, 3))?);
            reps.push(coalescence(sk(0.7), 4, -0.5, 0.5, &[1.0, 4.0], 2_000, stream(15, 4))?);
            Ok(serde_json::to_string(&reps).expect("serialize"))
        })
    };
    let one = run(1)?;
    let four = run(4)?;
    Ok(vec![ValidationReport::new(
        "determinism_1_vs_4_workers",
        skewsim::validation::Target::Value(1.0),
        if one == four { 1.0 } else { 0.0 },
        None,
        None,
        skewsim::validation::ToleranceRule::AtLeast,
        Some(SEED + 15),
        one.len(),
    )])
}

fn line(id: usize, title: &str, outcome: &Outcome, secs: f64) -> bool {
    match outcome {
        Ok(reps) => {
            let failed: Vec<&ValidationReport> = reps.iter().filter(|r| !r.pass).collect();
            let ok = !reps.is_empty() && failed.is_empty();
            println!(
                "criterion {id:>2} {:<4} {title} ({}/{} checks, {secs:.1}s)",
                if ok { "PASS" } else { "FAIL" },
                reps.len() - failed.len(),
                reps.len()
            );
            for r in reps {
                println!("    {}", r.summary_line());
            }
            for r in failed {
                println!("    failed: {} details {:?}", r.name, r.details);
            }
            ok
        }
        Err(e) => {
            println!("criterion {id:>2} FAIL {title} (error: {e})");
            false
        }
    }
}

fn main() -> ExitCode {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |id: usize| only.as_ref().is_none_or(|v| v.contains(&id));
    let mut results: Vec<(usize, bool)> = Vec::new();

    if wanted(1) || wanted(2) {
        let t = Instant::now();
        let both = sign_and_marginal_all();
        let secs = t.elapsed().as_secs_f64();
        let (s, m): (Outcome, Outcome) = match both {
            Ok((s, m)) => (Ok(s), Ok(m)),
            Err(e) => (Err(e.clone()), Err(e)),
        };
        if wanted(1) {
            results.push((1, line(1, "sign law", &s, secs)));
        }
        if wanted(2) {
            results.push((2, line(2, "marginal law", &m, secs)));
        }
    }
    let rest: [(usize, &str, fn() -> Outcome); 13] = [
        (3, "density identities", c3_density),
        (4, "hitting law", c4_hitting),
        (5, "exit-time law", c5_exit_time),
        (6, "local-time ratios", c6_local_time),
        (7, "SDE residual", c7_residual),
        (8, "occupation law", c8_occupation),
        (9, "coupling", c9_coupling),
        (10, "L1 bounds", c10_l1),
        (11, "convergence rate", c11_rate),
        (12, "rescaling limit", c12_rescaling),
        (13, "PDE triangle", c13_pde),
        (14, "transform consistency", c14_transform),
        (15, "determinism", c15_determinism),
    ];
    for (id, title, f) in rest {
        if wanted(id) {
            let t = Instant::now();
            let o = f();
            results.push((id, line(id, title, &o, t.elapsed().as_secs_f64())));
        }
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!("; failed {failed:?}") }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
