//! No two-bit classical protocol exists for `n = 3`.
//!
//! Two independent routes:
//!
//! - a replay of the seven-case argument over Bob's broadcast partition, with
//!   the witness tuples re-evaluated and Carol's options decided by 2-coloring
//!   a must-apart graph on her inputs;
//! - exhaustive searches over deterministic protocols, where a protocol is
//!   correct iff `f` is constant on every fiber (inputs consistent with a fixed
//!   Alice input and transcript).
//!
//! Inputs of length 3 are handled as codes `0..8`, the binary reading of the
//! string (`"001"` is `1`). The 64 promise triples are indexed by `8x + y`,
//! with `z = x ^ y ^ 0b111`; row `x` of a `u64` mask is byte `x`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bitcore::{BitString, FunctionTable, Party};
use crate::error::{Error, Result};

const LOW7: u64 = 0x7f7f_7f7f_7f7f_7f7f;

/// `"011"` -> `3`. Panics on malformed literals; only used on fixed tables.
fn code(s: &str) -> u8 {
    u8::from_str_radix(s, 2).expect("3-bit literal")
}

/// `3` -> `"011"`.
pub fn cube_str(v: u8) -> String {
    format!("{v:03b}")
}

fn weight(v: u8) -> u32 {
    v.count_ones()
}

/// `z` forced by the promise.
pub fn promise_z(x: u8, y: u8) -> u8 {
    x ^ y ^ 0b111
}

/// `f` on a triple of 3-bit codes.
pub fn ghz3(x: u8, y: u8, z: u8) -> bool {
    (x & y & z).count_ones() % 2 == 1
}

fn is_promise(x: u8, y: u8, z: u8) -> bool {
    x ^ y ^ z == 0b111
}

// ---------------------------------------------------------------------------
// Bob's partition and Carol's constraints

/// Bob's one-bit broadcast `φ: {0,1}^3 -> {0,1}`, normalized so `φ(000) = 0`.
///
/// Bit `v` of the classifier is `φ(v)`; `S_0` and `S_1` are the preimages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartitionOfCube {
    classifier: u8,
}

impl PartitionOfCube {
    pub fn new(classifier: u8) -> Option<Self> {
        (classifier & 1 == 0).then_some(PartitionOfCube { classifier })
    }

    /// The 128 normalized partitions.
    pub fn all() -> impl Iterator<Item = PartitionOfCube> {
        (0..=255u8).filter_map(PartitionOfCube::new)
    }

    pub fn classifier(&self) -> u8 {
        self.classifier
    }

    /// Members of `S_bit` as a bit set over codes.
    pub fn class_mask(&self, bit: bool) -> u8 {
        if bit {
            self.classifier
        } else {
            !self.classifier
        }
    }

    pub fn class(&self, bit: bool) -> Vec<u8> {
        let mask = self.class_mask(bit);
        (0..8).filter(|v| mask >> v & 1 == 1).collect()
    }
}

impl fmt::Display for PartitionOfCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s0: Vec<String> = self.class(false).into_iter().map(cube_str).collect();
        write!(f, "S_0={{{}}}", s0.join(","))
    }
}

/// Pairs of Carol inputs that must share a class of her one-bit message, and
/// pairs that must be split.
///
/// Only `apart` constraints arise directly (two inputs giving different `f`
/// for the same Alice input). With a binary partition they force `together`
/// pairs: equal colors within a connected component.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TogetherApartConstraints {
    pub apart: BTreeSet<(u8, u8)>,
    pub together: BTreeSet<(u8, u8)>,
    /// First apart edge that could not be 2-colored.
    pub conflict: Option<(u8, u8)>,
}

impl TogetherApartConstraints {
    fn solve(apart: BTreeSet<(u8, u8)>) -> Self {
        let mut adj: [Vec<u8>; 8] = Default::default();
        for &(u, v) in &apart {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let mut color: [Option<(usize, bool)>; 8] = [None; 8];
        let mut conflict = None;
        let nodes: BTreeSet<u8> = apart.iter().flat_map(|&(u, v)| [u, v]).collect();
        for (component, &start) in nodes.iter().enumerate() {
            if color[start as usize].is_some() {
                continue;
            }
            color[start as usize] = Some((component, false));
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                let (comp, cu) = color[u as usize].expect("queued nodes are colored");
                for &v in &adj[u as usize] {
                    match color[v as usize] {
                        None => {
                            color[v as usize] = Some((comp, !cu));
                            queue.push_back(v);
                        }
                        Some((_, cv)) if cv == cu && conflict.is_none() => {
                            conflict = Some((u.min(v), u.max(v)));
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        let mut together = BTreeSet::new();
        if conflict.is_none() {
            for &u in &nodes {
                for &v in nodes.range(u + 1..) {
                    if color[u as usize] == color[v as usize] {
                        together.insert((u, v));
                    }
                }
            }
        }
        TogetherApartConstraints {
            apart,
            together,
            conflict,
        }
    }

    pub fn feasible(&self) -> bool {
        self.conflict.is_none()
    }

    pub fn must_be_apart(&self, a: u8, b: u8) -> bool {
        self.apart.contains(&(a.min(b), a.max(b)))
    }

    pub fn must_be_together(&self, a: u8, b: u8) -> bool {
        self.together.contains(&(a.min(b), a.max(b)))
    }
}

/// A completion `(y, z)` Alice cannot rule out after Bob's bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub y: u8,
    pub z: u8,
    pub f: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliceView {
    pub x: u8,
    pub candidates: Vec<Candidate>,
    pub constraints: TogetherApartConstraints,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarolCheck {
    pub per_x: Vec<AliceView>,
    /// All Alice inputs at once; Carol's partition cannot depend on `x`.
    pub joint: TogetherApartConstraints,
}

impl CarolCheck {
    pub fn feasible(&self) -> bool {
        self.joint.feasible()
    }
}

fn apart_pairs(candidates: &[Candidate]) -> BTreeSet<(u8, u8)> {
    let mut apart = BTreeSet::new();
    for (i, a) in candidates.iter().enumerate() {
        for b in &candidates[i + 1..] {
            if a.f != b.f {
                apart.insert((a.z.min(b.z), a.z.max(b.z)));
            }
        }
    }
    apart
}

/// Can Carol's one bit finish the job once Bob has announced `y ∈ bob_class`?
///
/// For each `x`, the candidates are `(y, x + y + 1)` for `y` in the class. A
/// partition of Carol's inputs works for `x` iff `f` is constant on each part;
/// it works for all listed `x` iff the union of their must-apart graphs is
/// bipartite.
pub fn carol_partition_feasible(xs: &[u8], bob_class: &[u8]) -> CarolCheck {
    let mut joint = BTreeSet::new();
    let per_x = xs
        .iter()
        .map(|&x| {
            let candidates: Vec<Candidate> = bob_class
                .iter()
                .map(|&y| {
                    let z = promise_z(x, y);
                    Candidate { y, z, f: ghz3(x, y, z) }
                })
                .collect();
            let apart = apart_pairs(&candidates);
            joint.extend(apart.iter().copied());
            AliceView {
                x,
                candidates,
                constraints: TogetherApartConstraints::solve(apart),
            }
        })
        .collect();
    CarolCheck {
        per_x,
        joint: TogetherApartConstraints::solve(joint),
    }
}

// ---------------------------------------------------------------------------
// Case analysis

/// The seven partition types of the case analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseId {
    One,
    TwoOneOne,
    TwoOneTwo,
    TwoOneThree,
    TwoOneFour,
    TwoTwoOne,
    TwoTwoTwo,
}

impl CaseId {
    pub const ALL: [CaseId; 7] = [
        CaseId::One,
        CaseId::TwoOneOne,
        CaseId::TwoOneTwo,
        CaseId::TwoOneThree,
        CaseId::TwoOneFour,
        CaseId::TwoTwoOne,
        CaseId::TwoTwoTwo,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CaseId::One => "1",
            CaseId::TwoOneOne => "2.1.1",
            CaseId::TwoOneTwo => "2.1.2",
            CaseId::TwoOneThree => "2.1.3",
            CaseId::TwoOneFour => "2.1.4",
            CaseId::TwoTwoOne => "2.2.1",
            CaseId::TwoTwoTwo => "2.2.2",
        }
    }

    /// Permutation-invariant condition on `S_0` selecting this branch.
    pub fn header_holds(self, s0: u8) -> bool {
        let size = s0.count_ones();
        let has_weight1 = (0..8u8).any(|v| s0 >> v & 1 == 1 && weight(v) == 1);
        let has_111 = s0 >> 7 & 1 == 1;
        match self {
            CaseId::One => size <= 2,
            CaseId::TwoOneOne | CaseId::TwoOneTwo | CaseId::TwoOneThree | CaseId::TwoOneFour => {
                size >= 3 && has_weight1
            }
            CaseId::TwoTwoOne => size >= 3 && !has_weight1 && !has_111,
            CaseId::TwoTwoTwo => size >= 3 && !has_weight1 && has_111,
        }
    }

    fn witness(self) -> &'static CaseWitness {
        &CASES[self as usize]
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::UnknownCase(s.to_string()))
    }
}

type Tuple = (&'static str, &'static str, &'static str, u8);

/// Hard-coded witness data for one case: membership assumptions, the class
/// Bob announces, and two Alice inputs with their candidate tuples and the
/// `f` values as printed.
#[derive(Debug)]
pub struct CaseWitness {
    pub id: CaseId,
    pub in_s0: &'static [&'static str],
    pub in_s1: &'static [&'static str],
    /// Class announced by Bob's bit.
    pub announced: bool,
    pub groups: [&'static [Tuple]; 2],
}

static CASES: [CaseWitness; 7] = [
    CaseWitness {
        id: CaseId::One,
        in_s0: &["000"],
        in_s1: &["001", "010", "011"],
        announced: true,
        groups: [
            &[("001", "001", "111", 1), ("001", "010", "100", 0), ("001", "011", "101", 1)],
            &[("011", "001", "101", 1), ("011", "010", "110", 1), ("011", "011", "111", 0)],
        ],
    },
    CaseWitness {
        id: CaseId::TwoOneOne,
        in_s0: &["000", "001", "010"],
        in_s1: &[],
        announced: false,
        groups: [
            &[("001", "000", "110", 0), ("001", "001", "111", 1), ("001", "010", "100", 0)],
            &[("011", "000", "100", 0), ("011", "001", "101", 1), ("011", "010", "110", 1)],
        ],
    },
    CaseWitness {
        id: CaseId::TwoOneTwo,
        in_s0: &["000", "001", "011"],
        in_s1: &[],
        announced: false,
        groups: [
            &[("001", "000", "110", 0), ("001", "001", "111", 1), ("001", "011", "101", 1)],
            &[("011", "000", "100", 0), ("011", "001", "101", 1), ("011", "011", "111", 0)],
        ],
    },
    CaseWitness {
        id: CaseId::TwoOneThree,
        in_s0: &["000", "001", "110"],
        in_s1: &[],
        announced: false,
        groups: [
            &[("010", "000", "101", 0), ("010", "001", "100", 0), ("010", "110", "011", 1)],
            &[("011", "000", "100", 0), ("011", "001", "101", 1), ("011", "110", "010", 1)],
        ],
    },
    CaseWitness {
        id: CaseId::TwoOneFour,
        in_s0: &["000", "001", "111"],
        in_s1: &[],
        announced: false,
        groups: [
            &[("010", "000", "101", 0), ("010", "001", "100", 0), ("010", "111", "010", 1)],
            &[("011", "000", "100", 0), ("011", "001", "101", 1), ("011", "111", "011", 0)],
        ],
    },
    CaseWitness {
        id: CaseId::TwoTwoOne,
        in_s0: &["000"],
        in_s1: &["001", "010", "100", "111"],
        announced: true,
        groups: [
            &[
                ("001", "001", "111", 1),
                ("001", "010", "100", 0),
                ("001", "100", "010", 0),
                ("001", "111", "001", 1),
            ],
            &[
                ("010", "001", "100", 0),
                ("010", "010", "111", 1),
                ("010", "100", "001", 0),
                ("010", "111", "010", 1),
            ],
        ],
    },
    CaseWitness {
        id: CaseId::TwoTwoTwo,
        in_s0: &["000", "011", "111"],
        in_s1: &[],
        announced: false,
        groups: [
            &[("010", "000", "101", 0), ("010", "011", "110", 1), ("010", "111", "010", 1)],
            &[("110", "000", "001", 0), ("110", "011", "010", 1), ("110", "111", "110", 0)],
        ],
    },
];

impl CaseWitness {
    pub fn get(id: CaseId) -> &'static CaseWitness {
        id.witness()
    }

    fn members(list: &[&str]) -> u8 {
        list.iter().fold(0u8, |m, s| m | 1 << code(s))
    }

    pub fn s0_mask(&self) -> u8 {
        Self::members(self.in_s0)
    }

    pub fn s1_mask(&self) -> u8 {
        Self::members(self.in_s1)
    }

    fn announced_mask(&self) -> u8 {
        if self.announced {
            self.s1_mask()
        } else {
            self.s0_mask()
        }
    }
}

/// One witness tuple re-checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleCheck {
    pub x: u8,
    pub y: u8,
    pub z: u8,
    pub listed_f: bool,
    pub computed_f: bool,
    pub promise: bool,
    /// `y` is among the members assumed for the announced class.
    pub in_class: bool,
}

impl TupleCheck {
    pub fn ok(&self) -> bool {
        self.promise && self.in_class && self.listed_f == self.computed_f
    }
}

impl fmt::Display for TupleCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{})->{}",
            cube_str(self.x),
            cube_str(self.y),
            cube_str(self.z),
            self.computed_f as u8
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseReport {
    pub id: CaseId,
    pub tuples: Vec<TupleCheck>,
    pub xs: [u8; 2],
    pub carol: CarolCheck,
}

impl CaseReport {
    pub fn infeasible(&self) -> bool {
        !self.carol.feasible()
    }

    pub fn mismatches(&self) -> Vec<&TupleCheck> {
        self.tuples.iter().filter(|t| !t.ok()).collect()
    }

    pub fn passed(&self) -> bool {
        self.infeasible() && self.mismatches().is_empty()
    }

    /// `f` values in listed order, one vector per Alice input.
    pub fn f_values(&self) -> [Vec<u8>; 2] {
        self.xs.map(|x| {
            self.tuples
                .iter()
                .filter(|t| t.x == x)
                .map(|t| t.computed_f as u8)
                .collect()
        })
    }
}

/// Re-evaluates one case's witness tuples and confirms that no single
/// partition of Carol's inputs serves both Alice inputs.
pub fn replay_case(id: CaseId) -> CaseReport {
    let w = id.witness();
    let class = w.announced_mask();
    let mut tuples = Vec::new();
    let mut ys = BTreeSet::new();
    for group in w.groups {
        for &(x, y, z, f) in group {
            let (x, y, z) = (code(x), code(y), code(z));
            ys.insert(y);
            tuples.push(TupleCheck {
                x,
                y,
                z,
                listed_f: f == 1,
                computed_f: ghz3(x, y, z),
                promise: is_promise(x, y, z),
                in_class: class >> y & 1 == 1,
            });
        }
    }
    let xs = w.groups.map(|g| code(g[0].0));
    let class: Vec<u8> = ys.into_iter().collect();
    CaseReport {
        id,
        tuples,
        xs,
        carol: carol_partition_feasible(&xs, &class),
    }
}

pub fn replay_case_label(label: &str) -> Result<CaseReport> {
    Ok(replay_case(label.parse()?))
}

/// A permutation of the three bit positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation([usize; 3]);

impl Permutation {
    pub const ALL: [Permutation; 6] = [
        Permutation([0, 1, 2]),
        Permutation([0, 2, 1]),
        Permutation([1, 0, 2]),
        Permutation([1, 2, 0]),
        Permutation([2, 0, 1]),
        Permutation([2, 1, 0]),
    ];

    /// Position `i` of the result takes position `self[i]` of `v`
    /// (positions counted from the left).
    pub fn apply(self, v: u8) -> u8 {
        (0..3).fold(0u8, |acc, i| {
            let b = (v >> (2 - self.0[i])) & 1;
            acc | b << (2 - i)
        })
    }

    pub fn inverse(self) -> Permutation {
        let mut inv = [0; 3];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p] = i;
        }
        Permutation(inv)
    }

    pub fn apply_set(self, set: u8) -> u8 {
        (0..8u8)
            .filter(|v| set >> v & 1 == 1)
            .fold(0u8, |acc, v| acc | 1 << self.apply(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverEntry {
    pub partition: PartitionOfCube,
    pub case: CaseId,
    /// Maps the partition onto the case's normal form.
    pub permutation: Permutation,
    /// The case's witness, pulled back to this partition, is still a valid
    /// contradiction.
    pub transported: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverReport {
    pub entries: Vec<CoverEntry>,
    pub unmapped: Vec<PartitionOfCube>,
}

impl CoverReport {
    pub fn total(&self) -> usize {
        self.entries.len() + self.unmapped.len()
    }

    pub fn per_case(&self) -> BTreeMap<CaseId, usize> {
        let mut counts: BTreeMap<CaseId, usize> = CaseId::ALL.into_iter().map(|c| (c, 0)).collect();
        for e in &self.entries {
            *counts.entry(e.case).or_default() += 1;
        }
        counts
    }

    pub fn passed(&self) -> bool {
        self.total() == 128 && self.unmapped.is_empty() && self.entries.iter().all(|e| e.transported)
    }
}

/// Pulls a case's witness back through `perm` and checks it against the
/// original partition.
fn transport_witness(p: PartitionOfCube, case: CaseId, perm: Permutation) -> bool {
    let w = case.witness();
    let back = perm.inverse();
    let class = p.class_mask(w.announced);
    let mut ys = BTreeSet::new();
    let mut xs = Vec::new();
    for group in w.groups {
        xs.push(back.apply(code(group[0].0)));
        for &(x, y, z, f) in group {
            let (x, y, z) = (back.apply(code(x)), back.apply(code(y)), back.apply(code(z)));
            if class >> y & 1 == 0 || !is_promise(x, y, z) || ghz3(x, y, z) != (f == 1) {
                return false;
            }
            ys.insert(y);
        }
    }
    let ys: Vec<u8> = ys.into_iter().collect();
    !carol_partition_feasible(&xs, &ys).feasible()
}

/// Assigns each of the 128 normalized partitions to a case, up to
/// simultaneous permutation of bit positions.
///
/// A partition maps to the first case whose header it satisfies and whose
/// membership assumptions it meets after some permutation. Partitions that
/// match nothing are reported, not reclassified.
pub fn case_cover_check() -> CoverReport {
    let mut entries = Vec::new();
    let mut unmapped = Vec::new();
    for p in PartitionOfCube::all() {
        let s0 = p.class_mask(false);
        let s1 = p.class_mask(true);
        let found = CaseId::ALL.into_iter().find_map(|case| {
            if !case.header_holds(s0) {
                return None;
            }
            let w = case.witness();
            Permutation::ALL.into_iter().find_map(|perm| {
                let (ps0, ps1) = (perm.apply_set(s0), perm.apply_set(s1));
                (ps0 & w.s0_mask() == w.s0_mask() && ps1 & w.s1_mask() == w.s1_mask())
                    .then_some((case, perm))
            })
        });
        match found {
            Some((case, permutation)) => entries.push(CoverEntry {
                partition: p,
                case,
                permutation,
                transported: transport_witness(p, case, permutation),
            }),
            None => unmapped.push(p),
        }
    }
    CoverReport { entries, unmapped }
}

// ---------------------------------------------------------------------------
// Bitmask fibers over 64 inputs

/// A function on 64 inputs indexed `8a + b`, where row `a` is Alice's input,
/// with the positions of every other party's inputs precomputed.
#[derive(Debug, Clone)]
pub struct CubeDomain {
    target: u64,
    /// `party_masks[p][v]`: inputs where party `p` holds `v`.
    party_masks: Vec<[u64; 8]>,
}

impl CubeDomain {
    /// Builds the domain from a table on 3-bit inputs in which every
    /// `(x, second input)` pair occurs exactly once.
    pub fn from_table(table: &FunctionTable) -> Result<Self> {
        if table.input_len() != 3 {
            return Err(Error::WrongLength {
                expected: 3,
                actual: table.input_len(),
            });
        }
        if table.len() != 64 {
            return Err(Error::WrongLength {
                expected: 64,
                actual: table.len(),
            });
        }
        let mut target = 0u64;
        let mut seen = 0u64;
        let mut party_masks = vec![[0u64; 8]; table.arity()];
        for (inputs, value) in table.iter() {
            let index = inputs[0].value() * 8 + inputs[1].value();
            let bit = 1u64 << index;
            if seen & bit != 0 {
                return Err(Error::WrongLength {
                    expected: 64,
                    actual: table.len() + 1,
                });
            }
            seen |= bit;
            if value {
                target |= bit;
            }
            for (p, input) in inputs.iter().enumerate() {
                party_masks[p][input.value() as usize] |= bit;
            }
        }
        Ok(CubeDomain {
            target,
            party_masks,
        })
    }

    pub fn ghz() -> Self {
        Self::from_table(&FunctionTable::ghz_promise(3).expect("n=3")).expect("64 promise triples")
    }

    pub fn inner_product() -> Self {
        Self::from_table(&FunctionTable::inner_product(3).expect("n=3")).expect("64 pairs")
    }

    pub fn parity() -> Self {
        Self::from_table(&FunctionTable::parity(3).expect("n=3")).expect("64 pairs")
    }

    /// Same inputs, different function: bit `i` of `target` is `f` on input `i`.
    pub fn with_target(&self, target: u64) -> Self {
        CubeDomain {
            target,
            party_masks: self.party_masks.clone(),
        }
    }

    pub fn parties(&self) -> usize {
        self.party_masks.len()
    }

    /// Inputs on which a message table `g` (bit `v` = message for input `v`)
    /// sends 1.
    pub fn message_mask(&self, party: Party, table: u8) -> u64 {
        let masks = &self.party_masks[party.index()];
        (0..8)
            .filter(|v| table >> v & 1 == 1)
            .fold(0u64, |acc, v| acc | masks[v])
    }

    fn message_masks(&self, party: Party) -> Vec<u64> {
        (0..=255u8).map(|g| self.message_mask(party, g)).collect()
    }

    /// `f` is constant on the fiber within every row.
    #[inline]
    pub fn fiber_constant(&self, fiber: u64) -> bool {
        nonzero_rows(fiber & self.target) & nonzero_rows(fiber & !self.target) == 0
    }
}

/// High bit of each byte set iff that byte is non-zero.
#[inline]
fn nonzero_rows(m: u64) -> u64 {
    (((m & LOW7) + LOW7) | m) & !LOW7
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
}

/// Bob broadcasts `φ(y)`, then Carol sends `ψ(z, φ(y))` to Alice.
///
/// Bit `v` of `phi` is `φ(v)`; bit `8b + z` of `psi` is `ψ(z, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BroadcastCandidate {
    pub phi: u8,
    pub psi: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BroadcastSearch {
    pub examined: u64,
    pub feasible: u64,
    /// Feasible `ψ` count for each `φ`.
    pub per_phi: Vec<u64>,
    pub witnesses: Vec<BroadcastCandidate>,
}

const WITNESS_CAP: usize = 32;

/// Feasible iff `f` is constant on every fiber of Bob's message `m` and
/// Carol's bit, for every Alice input. `bob[m]` is the set of inputs on which
/// Bob sends `m`; `carol[m]` the set on which Carol then sends 1.
pub fn broadcast_feasible(domain: &CubeDomain, bob: &[u64], carol: &[u64]) -> bool {
    bob.iter()
        .zip(carol)
        .all(|(&b, &c)| domain.fiber_constant(b & c) && domain.fiber_constant(b & !c))
}

/// Every `(φ, ψ)` pair, `256 × 65536` candidates, each checked on all four
/// of its fibers. Must find none.
pub fn search_bob_broadcast_carol(workers: usize) -> BroadcastSearch {
    let domain = CubeDomain::ghz();
    let bob = domain.message_masks(Party::Bob);
    let carol = domain.message_masks(Party::Carol);
    let per_phi: Vec<(u64, Vec<BroadcastCandidate>)> = pool(workers).install(|| {
        (0..=255u8)
            .into_par_iter()
            .map(|phi| {
                let y1 = bob[phi as usize];
                let ys = [!y1, y1];
                let mut count = 0u64;
                let mut witnesses = Vec::new();
                for psi in 0..=u16::MAX {
                    let zs = [carol[(psi & 0xff) as usize], carol[(psi >> 8) as usize]];
                    if broadcast_feasible(&domain, &ys, &zs) {
                        count += 1;
                        if witnesses.len() < WITNESS_CAP {
                            witnesses.push(BroadcastCandidate { phi, psi });
                        }
                    }
                }
                (count, witnesses)
            })
            .collect()
    });
    let mut witnesses: Vec<BroadcastCandidate> =
        per_phi.iter().flat_map(|(_, w)| w.iter().copied()).collect();
    witnesses.sort();
    witnesses.truncate(WITNESS_CAP);
    let per_phi: Vec<u64> = per_phi.into_iter().map(|(c, _)| c).collect();
    BroadcastSearch {
        examined: 256 * 65536,
        feasible: per_phi.iter().sum(),
        per_phi,
        witnesses,
    }
}

/// The three-bit protocol's messages as a broadcast protocol: Bob sends
/// `r_B mod 4`, Carol the high bit of `r_C mod 4`. Checked with the same
/// fiber test as the two-bit search.
pub fn three_bit_broadcast_feasible() -> bool {
    let domain = CubeDomain::ghz();
    let zeros = |v: usize| 3 - (v as u32).count_ones();
    let mut bob = vec![0u64; 4];
    for (v, mask) in domain.party_masks[Party::Bob.index()].iter().enumerate() {
        bob[(zeros(v) % 4) as usize] |= mask;
    }
    let carol_high = domain.party_masks[Party::Carol.index()]
        .iter()
        .enumerate()
        .filter(|(v, _)| (zeros(*v) % 4) >> 1 == 1)
        .fold(0u64, |acc, (_, m)| acc | m);
    broadcast_feasible(&domain, &bob, &[carol_high; 4])
}

/// Per `φ`, the partition-based verdict: Carol can always finish iff both of
/// Bob's classes are jointly 2-colorable over all eight Alice inputs.
pub fn partition_verdict(phi: u8) -> bool {
    let xs: Vec<u8> = (0..8).collect();
    [false, true].into_iter().all(|bit| {
        let class: Vec<u8> = (0..8).filter(|v| (phi >> v & 1 == 1) == bit).collect();
        carol_partition_feasible(&xs, &class).feasible()
    })
}

/// `φ` values on which the exhaustive search and the partition argument
/// disagree. Empty when the two routes agree.
pub fn search_replay_disagreements(search: &BroadcastSearch) -> Vec<u8> {
    (0..=255u8)
        .filter(|&phi| (search.per_phi[phi as usize] > 0) != partition_verdict(phi))
        .collect()
}

// ---------------------------------------------------------------------------
// Adaptive two-bit protocols

/// Who speaks first and, for each value of the first bit, who speaks second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    pub first: Party,
    pub second: [Party; 2],
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}|{}{}",
            self.first.short(),
            self.second[0].short(),
            self.second[1].short()
        )
    }
}

/// A deterministic two-bit protocol on a blackboard: both bits are seen by
/// everyone, and the second speaker may depend on the first bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProtocolCandidate {
    pub first: (Party, u8),
    pub second: [(Party, u8); 2],
}

impl ProtocolCandidate {
    pub fn pattern(&self) -> Pattern {
        Pattern {
            first: self.first.0,
            second: [self.second[0].0, self.second[1].0],
        }
    }

    pub fn to_tree(&self) -> ProtocolTree {
        let leaf = || ProtocolTree::Output;
        let speak = |(party, table): (Party, u8), children: [ProtocolTree; 2]| ProtocolTree::Speak {
            party,
            message: (0..8).map(|v| table >> v & 1 == 1).collect(),
            children: Box::new(children),
        };
        speak(
            self.first,
            [
                speak(self.second[0], [leaf(), leaf()]),
                speak(self.second[1], [leaf(), leaf()]),
            ],
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptiveSearch {
    pub examined: u64,
    pub feasible: u64,
    pub per_pattern: BTreeMap<Pattern, u64>,
    pub witnesses: Vec<ProtocolCandidate>,
}

impl AdaptiveSearch {
    pub fn feasible_where(&self, keep: impl Fn(&Pattern) -> bool) -> u64 {
        self.per_pattern
            .iter()
            .filter(|(p, _)| keep(p))
            .map(|(_, c)| c)
            .sum()
    }
}

/// Verdict of the fast path for one candidate.
pub fn candidate_feasible(domain: &CubeDomain, c: &ProtocolCandidate) -> bool {
    let m1 = domain.message_mask(c.first.0, c.first.1);
    [!m1, m1].into_iter().zip(c.second).all(|(branch, (p, t))| {
        let m2 = domain.message_mask(p, t);
        domain.fiber_constant(branch & m2) && domain.fiber_constant(branch & !m2)
    })
}

/// All adaptive two-bit protocols among `speakers`.
///
/// A candidate is feasible iff each first-bit branch is: the branch verdicts
/// are computed once per `(first speaker, first table)` and every
/// combination of them is counted, so each candidate's verdict is the
/// conjunction of its two branch checks.
pub fn search_adaptive_two_bit(domain: &CubeDomain, speakers: &[Party], workers: usize) -> AdaptiveSearch {
    let options: Vec<(Party, u8)> = speakers
        .iter()
        .flat_map(|&p| (0..=255u8).map(move |t| (p, t)))
        .collect();
    let masks: Vec<u64> = options.iter().map(|&(p, t)| domain.message_mask(p, t)).collect();

    let units: Vec<(BTreeMap<Pattern, u64>, Vec<ProtocolCandidate>)> = pool(workers).install(|| {
        options
            .par_iter()
            .enumerate()
            .map(|(i, &first)| {
                let m1 = masks[i];
                let ok: [Vec<bool>; 2] = [!m1, m1].map(|branch| {
                    masks
                        .iter()
                        .map(|&m2| domain.fiber_constant(branch & m2) && domain.fiber_constant(branch & !m2))
                        .collect()
                });
                let mut counts: BTreeMap<Pattern, u64> = BTreeMap::new();
                for &a in speakers {
                    for &b in speakers {
                        let count = |bit: usize, p: Party| {
                            options
                                .iter()
                                .zip(&ok[bit])
                                .filter(|((q, _), &ok)| *q == p && ok)
                                .count() as u64
                        };
                        let pattern = Pattern {
                            first: first.0,
                            second: [a, b],
                        };
                        counts.insert(pattern, count(0, a) * count(1, b));
                    }
                }
                let passing = |bit: usize| {
                    options
                        .iter()
                        .zip(&ok[bit])
                        .filter(|(_, &ok)| ok)
                        .map(|(&o, _)| o)
                };
                let witnesses: Vec<ProtocolCandidate> = passing(0)
                    .flat_map(|s0| passing(1).map(move |s1| ProtocolCandidate { first, second: [s0, s1] }))
                    .take(WITNESS_CAP)
                    .collect();
                (counts, witnesses)
            })
            .collect()
    });

    let mut per_pattern: BTreeMap<Pattern, u64> = BTreeMap::new();
    let mut witnesses = Vec::new();
    for (counts, w) in units {
        for (p, c) in counts {
            *per_pattern.entry(p).or_default() += c;
        }
        witnesses.extend(w);
    }
    witnesses.sort();
    witnesses.truncate(WITNESS_CAP);
    let n = options.len() as u64;
    AdaptiveSearch {
        examined: n * n * n,
        feasible: per_pattern.values().sum(),
        per_pattern,
        witnesses,
    }
}

/// Every adaptive two-bit blackboard protocol among Alice, Bob and Carol for
/// the three-party function at `n = 3`.
pub fn search_blackboard_two_bit(workers: usize) -> AdaptiveSearch {
    search_adaptive_two_bit(&CubeDomain::ghz(), &Party::ALL, workers)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoPartySearch {
    pub two_bit: AdaptiveSearch,
    /// Bob sending all of `y` passes the fiber check.
    pub three_bit_feasible: bool,
}

/// Two-party inner product on 3-bit inputs: no two-bit protocol, and a
/// three-bit one exists.
pub fn search_two_party_ip3(workers: usize) -> Result<TwoPartySearch> {
    let two_bit = search_adaptive_two_bit(&CubeDomain::inner_product(), &[Party::Alice, Party::Bob], workers);
    let table = FunctionTable::inner_product(3)?;
    let three_bit_feasible = tree_feasible(&table, &ProtocolTree::sends_all(Party::Bob, 3));
    Ok(TwoPartySearch {
        two_bit,
        three_bit_feasible,
    })
}

// ---------------------------------------------------------------------------
// Generic protocol trees

/// A deterministic blackboard protocol as a binary tree. Each internal node
/// names a speaker and its message as a table over the speaker's input
/// values; Alice answers at the leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolTree {
    Output,
    Speak {
        party: Party,
        message: Vec<bool>,
        children: Box<[ProtocolTree; 2]>,
    },
}

impl ProtocolTree {
    /// `party` writes its `n`-bit input one bit at a time, `x_1` first.
    pub fn sends_all(party: Party, n: usize) -> ProtocolTree {
        fn build(party: Party, n: usize, i: usize) -> ProtocolTree {
            if i > n {
                return ProtocolTree::Output;
            }
            let message = (0..1u32 << n).map(|v| (v >> (n - i)) & 1 == 1).collect();
            ProtocolTree::Speak {
                party,
                message,
                children: Box::new([build(party, n, i + 1), build(party, n, i + 1)]),
            }
        }
        build(party, n, 1)
    }

    /// Longest path, i.e. worst-case bits sent.
    pub fn depth(&self) -> usize {
        match self {
            ProtocolTree::Output => 0,
            ProtocolTree::Speak { children, .. } => 1 + children.iter().map(Self::depth).max().unwrap_or(0),
        }
    }

    fn transcript(&self, inputs: &[BitString]) -> Vec<bool> {
        let mut node = self;
        let mut bits = Vec::new();
        while let ProtocolTree::Speak {
            party,
            message,
            children,
        } = node
        {
            let bit = message[inputs[party.index()].value() as usize];
            bits.push(bit);
            node = &children[bit as usize];
        }
        bits
    }
}

/// Runs the tree on every input of `table` and checks that Alice's input
/// plus the transcript always determines the value.
pub fn tree_feasible(table: &FunctionTable, tree: &ProtocolTree) -> bool {
    let mut seen: HashMap<(BitString, Vec<bool>), bool> = HashMap::new();
    table.iter().all(|(inputs, value)| {
        let key = (inputs[0], tree.transcript(inputs));
        *seen.entry(key).or_insert(value) == value
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneBitSearch {
    pub examined: u64,
    pub feasible: u64,
}

/// Every one-bit protocol for a two-party table: either party speaks, with
/// any message table over its `2^n` inputs. `n <= 4`.
pub fn search_one_bit_two_party(table: &FunctionTable) -> Result<OneBitSearch> {
    let n = table.input_len();
    if n > 4 || table.arity() != 2 {
        return Err(Error::LengthOutOfRange { len: n, max: 4 });
    }
    let size = 1usize << n;
    let mut examined = 0;
    let mut feasible = 0;
    for party in [Party::Alice, Party::Bob] {
        for t in 0..1u64 << size {
            examined += 1;
            let tree = ProtocolTree::Speak {
                party,
                message: (0..size).map(|v| t >> v & 1 == 1).collect(),
                children: Box::new([ProtocolTree::Output, ProtocolTree::Output]),
            };
            if tree_feasible(table, &tree) {
                feasible += 1;
            }
        }
    }
    Ok(OneBitSearch { examined, feasible })
}
