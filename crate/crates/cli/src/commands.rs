use std::time::Instant;

use ghz_comm::lowerbound::{
    case_cover_check, cube_str, replay_case, search_blackboard_two_bit, search_bob_broadcast_carol,
    search_replay_disagreements, search_two_party_ip3, three_bit_broadcast_feasible, CaseId,
    CaseReport, Pattern,
};
use ghz_comm::protocols::{
    audit_runs, quantum_output_set, run_classical_count, run_classical_three_bit,
    run_quantum_two_bit, RunResult,
};
use ghz_comm::qsim::{check_lemma1, support, transformed_state};
use ghz_comm::{enumerate_promise, f_ghz, Column, Error, Party, PromiseTriple};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::report::{Check, Params, Report};

/// Largest `n` for exhaustive sweeps in `verify`.
pub const VERIFY_MAX_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum VerifyScope {
    Lemma1,
    Quantum,
    Classical,
    Cases,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SearchScope {
    Paper,
    Blackboard,
    Ip3,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn protocol_check(name: &str, r: &RunResult, expected: bool, cost: usize) -> Check {
    Check::new(name, r.output == expected && r.cost() == cost)
        .with("output", r.output as u8)
        .with("cost", r.cost())
        .with("transcript", r.transcript.to_string())
}

/// One random promise triple through all three protocols for `f`.
pub fn cmd_demo(n: usize, seed: u64) -> Result<Report, Error> {
    let mut report = Report::new(
        "demo",
        Params {
            n: Some(n),
            seed: Some(seed),
            ..Params::default()
        },
    );
    let mut rng = rng(seed);
    let t = PromiseTriple::random(n, &mut rng)?;
    let f = f_ghz(&t);
    report.push(
        Check::new("input", true)
            .with("x", t.x().to_string())
            .with("y", t.y().to_string())
            .with("z", t.z().to_string())
            .with("f", f as u8),
    );

    let start = Instant::now();
    let q = run_quantum_two_bit(&t, &mut rng);
    report.push(protocol_check("quantum-2bit", &q, f, 2));
    let three = run_classical_three_bit(&t)?;
    report.push(protocol_check("classical-3bit", &three, f, 3));
    let count = run_classical_count(&t)?;
    let width = ghz_comm::protocols::count_width(n) as usize;
    report.push(protocol_check("classical-count", &count, f, 2 * width));
    let runs = [q, three, count];
    let audit = runs.iter().map(|r| ghz_comm::protocols::audit_run(r).map(|_| ()));
    let audit_errors: Vec<String> = audit.filter_map(|r| r.err()).map(|e| e.to_string()).collect();
    report.push(
        Check::new("agreement", runs.iter().all(|r| r.output == f) && audit_errors.is_empty())
            .with("outputs", json!(runs.iter().map(|r| r.output as u8).collect::<Vec<_>>()))
            .with("audit_errors", json!(audit_errors)),
    );
    report.time("protocols", start.elapsed());
    Ok(report)
}

fn verify_lemma1(report: &mut Report) {
    for column in Column::LEGAL {
        let name = format!("lemma1/{column}");
        let sup: Vec<String> = support(&transformed_state(column))
            .into_iter()
            .map(cube_str)
            .collect();
        let check = match check_lemma1(column) {
            Ok(parity) => Check::new(name, parity == column.and()).with("parity", parity as u8),
            Err(e) => Check::new(name, false).with("error", e.to_string()),
        };
        report.push(check.with("support", json!(sup)));
    }
}

fn verify_quantum(report: &mut Report, n_max: usize, seed: u64) -> Result<(), Error> {
    let mut rng = rng(seed);
    for n in 1..=n_max {
        let mut runs = Vec::new();
        let mut wrong = 0usize;
        let mut nondeterministic = 0usize;
        for t in enumerate_promise(n)? {
            let r = run_quantum_two_bit(&t, &mut rng);
            if r.output != f_ghz(&t) || r.cost() != 2 {
                wrong += 1;
            }
            if quantum_output_set(&t).len() != 1 {
                nondeterministic += 1;
            }
            runs.push(r);
        }
        let audit = audit_runs(&runs);
        report.push(
            Check::new(
                format!("quantum/n={n}"),
                wrong == 0 && nondeterministic == 0 && audit.is_ok(),
            )
            .with("triples", runs.len())
            .with("wrong", wrong)
            .with("nondeterministic", nondeterministic)
            .with("audit", audit.map(|_| "ok".to_string()).unwrap_or_else(|e| e.to_string())),
        );
    }
    Ok(())
}

fn verify_classical(report: &mut Report, n_max: usize) -> Result<(), Error> {
    for n in 1..=n_max {
        let width = ghz_comm::protocols::count_width(n) as usize;
        let mut three_runs = Vec::new();
        let mut count_runs = Vec::new();
        let mut wrong = 0usize;
        for t in enumerate_promise(n)? {
            let f = f_ghz(&t);
            let a = run_classical_three_bit(&t)?;
            let b = run_classical_count(&t)?;
            if a.output != f || a.cost() != 3 || b.output != f || b.cost() != 2 * width {
                wrong += 1;
            }
            three_runs.push(a);
            count_runs.push(b);
        }
        let audit = audit_runs(&three_runs).and_then(|_| audit_runs(&count_runs));
        report.push(
            Check::new(format!("classical/n={n}"), wrong == 0 && audit.is_ok())
                .with("triples", three_runs.len())
                .with("wrong", wrong)
                .with("count_cost", 2 * width)
                .with("audit", audit.map(|_| "ok".to_string()).unwrap_or_else(|e| e.to_string())),
        );
    }
    Ok(())
}

fn case_check(r: &CaseReport) -> Check {
    let tuples: Vec<String> = r.tuples.iter().map(|t| t.to_string()).collect();
    let mismatches: Vec<String> = r.mismatches().iter().map(|t| t.to_string()).collect();
    let conflict = r
        .carol
        .joint
        .conflict
        .map(|(a, b)| format!("{}~{}", cube_str(a), cube_str(b)));
    Check::new(format!("case/{}", r.id), r.passed())
        .with("xs", json!(r.xs.map(cube_str)))
        .with("tuples", json!(tuples))
        .with("mismatches", json!(mismatches))
        .with("infeasible", r.infeasible())
        .with("conflict", json!(conflict))
}

fn verify_cases(report: &mut Report) {
    for id in CaseId::ALL {
        report.push(case_check(&replay_case(id)));
    }
    let cover = case_cover_check();
    let per_case: serde_json::Map<String, serde_json::Value> = cover
        .per_case()
        .into_iter()
        .map(|(c, n)| (c.label().to_string(), json!(n)))
        .collect();
    let unmapped: Vec<String> = cover.unmapped.iter().map(|p| p.to_string()).collect();
    report.push(
        Check::new("case-cover", cover.passed())
            .with("partitions", cover.total())
            .with("mapped", cover.entries.len())
            .with("per_case", per_case)
            .with("unmapped", json!(unmapped)),
    );
}

/// Exhaustive checks for the chosen scope over `n = 1..=n_max`.
pub fn cmd_verify(scope: VerifyScope, n_max: usize, seed: u64) -> Result<Report, Error> {
    let label = format!("{scope:?}").to_lowercase();
    let mut report = Report::new(
        "verify",
        Params {
            n: Some(n_max),
            seed: Some(seed),
            scope: Some(label),
            ..Params::default()
        },
    );
    let all = scope == VerifyScope::All;
    if all || scope == VerifyScope::Lemma1 {
        let start = Instant::now();
        verify_lemma1(&mut report);
        report.time("lemma1", start.elapsed());
    }
    if all || scope == VerifyScope::Quantum {
        let start = Instant::now();
        verify_quantum(&mut report, n_max, seed)?;
        report.time("quantum", start.elapsed());
    }
    if all || scope == VerifyScope::Classical {
        let start = Instant::now();
        verify_classical(&mut report, n_max)?;
        report.time("classical", start.elapsed());
    }
    if all || scope == VerifyScope::Cases {
        let start = Instant::now();
        verify_cases(&mut report);
        report.time("cases", start.elapsed());
    }
    Ok(report)
}

/// Runs one lower-bound search; each check passes iff nothing is feasible.
pub fn cmd_search(scope: SearchScope, workers: usize, seed: u64) -> Result<Report, Error> {
    let label = format!("{scope:?}").to_lowercase();
    let mut report = Report::new(
        "search",
        Params {
            seed: Some(seed),
            scope: Some(label),
            workers: Some(workers),
            ..Params::default()
        },
    );
    let start = Instant::now();
    match scope {
        SearchScope::Paper => {
            let s = search_bob_broadcast_carol(workers);
            let disagreements = search_replay_disagreements(&s);
            report.push(
                Check::new("bob-broadcast-carol", s.feasible == 0)
                    .with("examined", s.examined)
                    .with("feasible", s.feasible),
            );
            report.push(
                Check::new("partition-agreement", disagreements.is_empty())
                    .with("disagreeing_phi", json!(disagreements)),
            );
            report.push(Check::new("three-bit-control", three_bit_broadcast_feasible()));
        }
        SearchScope::Blackboard => {
            let s = search_blackboard_two_bit(workers);
            report.push(
                Check::new("blackboard-two-bit", s.feasible == 0)
                    .with("examined", s.examined)
                    .with("feasible", s.feasible),
            );
            let alice_first = s.feasible_where(|p| p.first == Party::Alice);
            report.push(Check::new("alice-first", alice_first == 0).with("feasible", alice_first));
            let relay = Pattern {
                first: Party::Bob,
                second: [Party::Carol, Party::Carol],
            };
            let relay_count = s.per_pattern.get(&relay).copied().unwrap_or(0);
            report.push(Check::new("bob-carol-alice", relay_count == 0).with("feasible", relay_count));
        }
        SearchScope::Ip3 => {
            let s = search_two_party_ip3(workers)?;
            report.push(
                Check::new("ip3-two-bit", s.two_bit.feasible == 0)
                    .with("examined", s.two_bit.examined)
                    .with("feasible", s.two_bit.feasible),
            );
            report.push(Check::new("ip3-three-bit", s.three_bit_feasible));
        }
    }
    report.time("search", start.elapsed());
    Ok(report)
}

/// Replays one case (`"2.1.3"`) or `"all"`.
pub fn cmd_replay(scope: &str, seed: u64) -> Result<Report, Error> {
    let mut report = Report::new(
        "replay",
        Params {
            seed: Some(seed),
            scope: Some(scope.to_string()),
            ..Params::default()
        },
    );
    let ids: Vec<CaseId> = if scope == "all" {
        CaseId::ALL.to_vec()
    } else {
        vec![scope.parse()?]
    };
    let start = Instant::now();
    for id in ids {
        let r = replay_case(id);
        let mut check = case_check(&r);
        for view in &r.carol.per_x {
            let values: Vec<String> = view
                .candidates
                .iter()
                .map(|c| format!("z={}:f={}", cube_str(c.z), c.f as u8))
                .collect();
            check = check.with(&format!("x={}", cube_str(view.x)), json!(values));
        }
        report.push(check);
    }
    report.time("replay", start.elapsed());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_agrees_at_n3() {
        let r = cmd_demo(3, 1).unwrap();
        assert!(r.passed());
        assert_eq!(r.checks.len(), 5);
    }

    #[test]
    fn demo_extremes() {
        assert!(cmd_demo(1, 9).unwrap().passed());
        assert!(cmd_demo(32, 9).unwrap().passed());
        assert!(cmd_demo(0, 9).is_err());
        assert!(cmd_demo(33, 9).is_err());
    }

    #[test]
    fn verify_lemma1_scope() {
        let r = cmd_verify(VerifyScope::Lemma1, 3, 0).unwrap();
        assert_eq!(r.checks.len(), 4);
        assert!(r.passed());
    }

    #[test]
    fn verify_cases_scope() {
        let r = cmd_verify(VerifyScope::Cases, 3, 0).unwrap();
        assert_eq!(r.checks.len(), 8);
        assert!(r.passed());
        let cover = r.checks.last().unwrap();
        assert_eq!(cover.details["mapped"], 128);
    }

    #[test]
    fn replay_single_and_unknown() {
        let r = cmd_replay("2.2.1", 0).unwrap();
        assert_eq!(r.checks.len(), 1);
        assert!(r.passed());
        assert!(cmd_replay("3.1", 0).is_err());
        assert_eq!(cmd_replay("all", 0).unwrap().checks.len(), 7);
    }
}
