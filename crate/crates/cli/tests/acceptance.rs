//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use jm_cli::repro;
use jm_core::construction::construct_joint;
use jm_core::criterion::{
    busch_pair, decide, threshold_sweep, triple_criterion, triple_points, DecideOptions, Verdict,
};
use jm_core::ensemble::{random_biased, random_rotation, random_unbiased, rng};
use jm_core::hypercube::{build_a, system_size};
use jm_core::oracle::{feasibility_oracle, weiszfeld_ft, OracleOptions, OracleOutcome};
use jm_core::povm::{verify_povm, Tolerances};
use jm_core::solver::{minimize, SolverOptions, SumOfNormsProblem};
use jm_core::Vec3;

struct Line {
    id: u8,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

fn unit(v: [f64; 3]) -> Vec3 {
    Vec3::from(v)
}

fn minimum(v: &[Vec3]) -> f64 {
    let p = SumOfNormsProblem::from_bloch_vectors(v).unwrap();
    minimize(&p, &SolverOptions::default()).primal
}

fn counterexample() -> Line {
    let report = repro(&DecideOptions::default());
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    Line {
        id: 1,
        name: "counterexample reproduction",
        passed: failed.is_empty(),
        detail: format!(
            "chain {:.6}, objective {:.6}, gap {:.2e}, verdict {}, {}{}",
            report.chain.lhs,
            report.decision.objective,
            report.decision.gap,
            report.decision.verdict,
            secs(report.elapsed),
            if failed.is_empty() {
                String::new()
            } else {
                format!(", failed: {}", failed.join("; "))
            }
        ),
    }
}

#[allow(clippy::approx_constant)]
fn busch_threshold() -> Line {
    let start = Instant::now();
    let s = threshold_sweep(
        &[unit([1.0, 0.0, 0.0]), unit([0.0, 0.0, 1.0])],
        0.0,
        1.0,
        1e-8,
        &DecideOptions::default(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    Line {
        id: 2,
        name: "pair threshold",
        passed: s.flipped
            && (s.eta_star - 0.7071068).abs() <= 1e-6
            && elapsed < Duration::from_secs(1),
        detail: format!(
            "eta* {:.9} (target 0.7071068 ± 1e-6), {}",
            s.eta_star,
            secs(elapsed)
        ),
    }
}

fn triple_threshold() -> Line {
    let dirs = [
        unit([1.0, 0.0, 0.0]),
        unit([0.0, 1.0, 0.0]),
        unit([0.0, 0.0, 1.0]),
    ];
    let s = threshold_sweep(&dirs, 0.0, 1.0, 1e-8, &DecideOptions::default()).unwrap();
    // homogeneity: eta_w = 4 / value at eta = 1
    let (_, ft) = weiszfeld_ft(&triple_points(&dirs[0], &dirs[1], &dirs[2]), 1e-14).unwrap();
    let eta_w = 4.0 / ft;
    Line {
        id: 3,
        name: "orthogonal triple threshold",
        passed: s.flipped
            && (s.eta_star - 0.5773503).abs() <= 1e-6
            && (s.eta_star - eta_w).abs() <= 1e-6,
        detail: format!(
            "eta* {:.9} (target 0.5773503 ± 1e-6), Weiszfeld {:.9}",
            s.eta_star, eta_w
        ),
    }
}

fn appendix_identities() -> Line {
    let start = Instant::now();
    let mut problems = Vec::new();
    for n in 2..=10usize {
        let a = build_a(n).unwrap();
        let d = system_size(n);
        if a.len() != d {
            problems.push(format!("N={n}: {} rows, expected {d}", a.len()));
            continue;
        }
        // 2^(N-1) A^-1 = (A - J)^T, so A (A - J)^T must be 2^(N-1) I
        let scale = 1i64 << (n - 1);
        let mut bad_product = 0usize;
        for (k, row_k) in a.iter().enumerate() {
            for (j, row_j) in a.iter().enumerate() {
                let s: i64 = row_k
                    .iter()
                    .zip(row_j)
                    .map(|(&x, &y)| x as i64 * (y as i64 - 1))
                    .sum();
                if s != if k == j { scale } else { 0 } {
                    bad_product += 1;
                }
            }
        }
        let bad_sums = (0..d)
            .filter(|&i| a.iter().map(|r| r[i] as i64).sum::<i64>() != -1)
            .count();
        let mut bad_distance = 0usize;
        for i in 0..d {
            for j in i + 1..d {
                let h = a.iter().filter(|r| r[i] != r[j]).count();
                if h != 1 << (n - 2) {
                    bad_distance += 1;
                }
            }
        }
        if bad_product + bad_sums + bad_distance > 0 {
            problems.push(format!(
                "N={n}: {bad_product} product entries, {bad_sums} column sums, {bad_distance} column pairs"
            ));
        }
    }
    let elapsed = start.elapsed();
    Line {
        id: 4,
        name: "system matrix identities",
        passed: problems.is_empty() && elapsed < Duration::from_secs(30),
        detail: if problems.is_empty() {
            format!("N = 2..10 exact, {}", secs(elapsed))
        } else {
            format!("{}, {}", problems.join("; "), secs(elapsed))
        },
    }
}

struct Closure {
    agreements: Line,
    witnesses: Line,
}

fn closure() -> Closure {
    let start = Instant::now();
    let opts = DecideOptions::default();
    let oracle_opts = OracleOptions::default();
    let tol = Tolerances {
        pos: 1e-10,
        eq: 1e-10,
    };
    let mut total = 0usize;
    let mut disagreements = Vec::new();
    let mut inconclusive = 0usize;
    let mut jm = 0usize;
    let mut bad_witness = Vec::new();
    for n in 2..=4usize {
        let mut r = rng(1000 + n as u64);
        for i in 0..200 {
            let a = random_unbiased(&mut r, n).unwrap();
            total += 1;
            let d = decide(&a, &opts).unwrap();
            let o = feasibility_oracle(&a, &oracle_opts).unwrap();
            let decided = matches!(
                d.verdict,
                Verdict::JointlyMeasurable | Verdict::Incompatible
            );
            let settled = matches!(
                o,
                OracleOutcome::Feasible { .. } | OracleOutcome::InfeasibleEvidence { .. }
            );
            if !decided || !settled {
                inconclusive += 1;
            } else if (d.verdict == Verdict::JointlyMeasurable) != o.is_feasible() {
                disagreements.push(format!("N={n} #{i}"));
            }
            if d.verdict == Verdict::JointlyMeasurable {
                jm += 1;
                let w = construct_joint(&a, &d.optimal_coefficients, tol).unwrap();
                let v = verify_povm(&w.joint, Some(&a), tol);
                if !v.valid {
                    bad_witness.push(format!("N={n} #{i} (min eig {:.2e})", v.min_eigenvalue));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let rate = inconclusive as f64 / total as f64;
    Closure {
        agreements: Line {
            id: 5,
            name: "criterion and oracle agree",
            passed: disagreements.is_empty() && rate < 0.02 && elapsed < Duration::from_secs(300),
            detail: format!(
                "{total} instances, {} disagreements{}, inconclusive {:.2}%, {}",
                disagreements.len(),
                if disagreements.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", disagreements.join(", "))
                },
                100.0 * rate,
                secs(elapsed)
            ),
        },
        witnesses: Line {
            id: 6,
            name: "witness soundness",
            passed: bad_witness.is_empty() && jm > 0,
            detail: format!(
                "{jm} jointly measurable verdicts, {} witnesses failed verification{}",
                bad_witness.len(),
                if bad_witness.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", bad_witness.join(", "))
                }
            ),
        },
    }
}

fn biased_necessity() -> Line {
    let opts = DecideOptions::default();
    let mut r = rng(7);
    let mut feasible = 0usize;
    let mut violations = Vec::new();
    for i in 0..200 {
        let n = 2 + i % 2;
        let a = random_biased(&mut r, n).unwrap();
        let o = feasibility_oracle(&a, &OracleOptions::default()).unwrap();
        if o.is_feasible() {
            feasible += 1;
            let d = decide(&a, &opts).unwrap();
            if d.verdict == Verdict::Incompatible {
                violations.push(format!("#{i} (dual {:.9})", d.dual_lower_bound));
            }
        }
    }
    Line {
        id: 7,
        name: "biased necessity",
        passed: violations.is_empty(),
        detail: format!(
            "200 instances, {feasible} feasible, {} violations{}",
            violations.len(),
            if violations.is_empty() {
                String::new()
            } else {
                format!(" ({})", violations.join(", "))
            }
        ),
    }
}

fn solver_properties() -> Line {
    let mut r = rng(8);
    let mut worst_fd = 0.0f64;
    for i in 0..50 {
        let n = 2 + i % 5;
        let v = random_unbiased(&mut r, n).unwrap().bloch_vectors();
        let p = SumOfNormsProblem::from_bloch_vectors(&v).unwrap();
        let x: Vec<Vec3> = (0..p.num_slots())
            .map(|_| {
                Vec3::new(
                    r.gen_range(-1.0..1.0),
                    r.gen_range(-1.0..1.0),
                    r.gen_range(-1.0..1.0),
                )
            })
            .collect();
        let eps = 1e-2 * p.scale().max(1e-3);
        let g = p.smoothed_gradient(&x, eps);
        let h = 1e-6;
        for j in 0..x.len() {
            for c in 0..3 {
                let mut up = x.clone();
                let mut down = x.clone();
                up[j][c] += h;
                down[j][c] -= h;
                let fd =
                    (p.smoothed_objective(&up, eps) - p.smoothed_objective(&down, eps)) / (2.0 * h);
                worst_fd = worst_fd.max((fd - g[j][c]).abs() / g[j][c].abs().max(1.0));
            }
        }
    }

    let mut duality_violations = 0usize;
    for i in 0..50 {
        let n = 2 + i % 5;
        let v = random_unbiased(&mut r, n).unwrap().bloch_vectors();
        let p = SumOfNormsProblem::from_bloch_vectors(&v).unwrap();
        let s = minimize(&p, &SolverOptions::default());
        for _ in 0..20 {
            let x: Vec<Vec3> = s
                .x_star
                .iter()
                .map(|w| {
                    w + Vec3::new(
                        r.gen_range(-0.5..0.5),
                        r.gen_range(-0.5..0.5),
                        r.gen_range(-0.5..0.5),
                    )
                })
                .collect();
            if p.objective(&x) < s.dual - 1e-12 * p.scale() {
                duality_violations += 1;
            }
        }
        if s.primal < s.dual - 1e-12 * p.scale() {
            duality_violations += 1;
        }
    }

    let mut worst_triple = 0.0f64;
    for _ in 0..100 {
        let v = random_unbiased(&mut r, 3).unwrap().bloch_vectors();
        let (_, ft) = weiszfeld_ft(&triple_points(&v[0], &v[1], &v[2]), 1e-14).unwrap();
        let value = triple_criterion(&v[0], &v[1], &v[2]);
        worst_triple = worst_triple.max((value - ft).abs() / ft.max(1.0));
    }
    Line {
        id: 8,
        name: "solver properties",
        passed: worst_fd <= 1e-5 && duality_violations == 0 && worst_triple <= 1e-7,
        detail: format!(
            "gradient error {worst_fd:.2e}, {duality_violations} weak duality violations, triple deviation {worst_triple:.2e}"
        ),
    }
}

fn exact_reductions() -> Line {
    let mut r = rng(9);
    let mut worst_pair = 0.0f64;
    for _ in 0..100 {
        let v = random_unbiased(&mut r, 2).unwrap().bloch_vectors();
        let value = minimum(&v);
        let exact = busch_pair(&v[0], &v[1]);
        worst_pair = worst_pair.max((value - exact).abs() / exact.max(f64::MIN_POSITIVE));
    }
    let mut worst_inv = 0.0f64;
    for _ in 0..50 {
        let v = random_unbiased(&mut r, 4).unwrap().bloch_vectors();
        let base = minimum(&v);
        let rot = random_rotation(&mut r);
        let rotated: Vec<Vec3> = v.iter().map(|z| rot * z).collect();
        let flipped: Vec<Vec3> = v
            .iter()
            .enumerate()
            .map(|(i, z)| if r.gen_bool(0.5) || i == 3 { -z } else { *z })
            .collect();
        let mut relabeled = v.clone();
        relabeled.swap(0, r.gen_range(1..4));
        relabeled.swap(1, 3);
        for other in [rotated, flipped, relabeled] {
            worst_inv = worst_inv.max((minimum(&other) - base).abs() / base.max(1.0));
        }
    }
    Line {
        id: 9,
        name: "exact reductions",
        passed: worst_pair <= 4.0 * f64::EPSILON && worst_inv <= 1e-7,
        detail: format!("pair deviation {worst_pair:.2e}, invariance deviation {worst_inv:.2e}"),
    }
}

fn main() -> ExitCode {
    let lines_early = [
        counterexample(),
        busch_threshold(),
        triple_threshold(),
        appendix_identities(),
    ];
    let c = closure();
    let lines: Vec<Line> = lines_early
        .into_iter()
        .chain([
            c.agreements,
            c.witnesses,
            biased_necessity(),
            solver_properties(),
            exact_reductions(),
        ])
        .collect();
    for l in &lines {
        println!(
            "{} [{}] {}: {}",
            if l.passed { "PASS" } else { "FAIL" },
            l.id,
            l.name,
            l.detail
        );
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!(
        "{} of {} criteria passed",
        lines.len() - failed,
        lines.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
