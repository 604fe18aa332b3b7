use ghz_comm::lowerbound::{
    broadcast_feasible, candidate_feasible, search_adaptive_two_bit, CubeDomain, Pattern,
    ProtocolCandidate,
};
use ghz_comm::Party;

/// Promise triples indexed `8x + y`, `z = x ^ y ^ 7`.
fn target_from(f: impl Fn(u8, u8, u8) -> bool) -> u64 {
    (0..64u8)
        .filter(|&i| {
            let (x, y) = (i >> 3, i & 7);
            f(x, y, x ^ y ^ 7)
        })
        .fold(0, |acc, i| acc | 1 << i)
}

/// Literal `(φ, ψ)` loop, independent of the adaptive search's memoization.
fn broadcast_count(domain: &CubeDomain) -> u64 {
    let mut count = 0;
    for phi in 0..=255u8 {
        let y1 = domain.message_mask(Party::Bob, phi);
        for psi in 0..=u16::MAX {
            let zs = [
                domain.message_mask(Party::Carol, psi as u8),
                domain.message_mask(Party::Carol, (psi >> 8) as u8),
            ];
            if broadcast_feasible(domain, &[!y1, y1], &zs) {
                count += 1;
            }
        }
    }
    count
}

const B_CC: Pattern = Pattern {
    first: Party::Bob,
    second: [Party::Carol, Party::Carol],
};

#[test]
fn relay_pattern_matches_literal_broadcast_loop() {
    let base = CubeDomain::ghz();
    let easy = base.with_target(target_from(|_, y, z| (y ^ z) >> 2 & 1 == 1));
    let mut literal = Vec::new();
    for domain in [&base, &easy] {
        let adaptive = search_adaptive_two_bit(domain, &[Party::Bob, Party::Carol], 4);
        literal.push(broadcast_count(domain));
        assert_eq!(adaptive.per_pattern.get(&B_CC).copied().unwrap_or(0), *literal.last().unwrap());
    }
    assert_eq!(literal[0], 0);
    assert!(literal[1] > 0);
}

#[test]
fn witnesses_recheck_one_at_a_time() {
    let domain = CubeDomain::ghz().with_target(target_from(|x, y, _| (x & y) & 1 == 1));
    let s = search_adaptive_two_bit(&domain, &Party::ALL, 2);
    assert!(s.feasible > 0);
    assert!(!s.witnesses.is_empty());
    for w in &s.witnesses {
        assert!(candidate_feasible(&domain, w), "{w:?}");
    }
    let bob_last_bit = ProtocolCandidate {
        first: (Party::Bob, 0b1010_1010),
        second: [(Party::Alice, 0), (Party::Alice, 0)],
    };
    assert!(candidate_feasible(&domain, &bob_last_bit));
    assert_eq!(s.examined, 768u64.pow(3));
}

#[test]
fn ghz_has_no_feasible_candidate_in_any_pattern() {
    let s = search_adaptive_two_bit(&CubeDomain::ghz(), &Party::ALL, 8);
    assert_eq!(s.feasible, 0);
    assert!(s.per_pattern.values().all(|&c| c == 0));
}
