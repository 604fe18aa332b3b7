//! Transcript-based execution of the quantum and classical protocols.
//!
//! Every run goes through [`Execution`], which only ever hands a party its own
//! input, its own measurement bits, and the bits addressed to it. Runs record
//! enough of that per-party view for [`audit_runs`] to check, across a batch of
//! runs, that each transmitted bit and Alice's output are functions of the
//! corresponding view alone.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::Rng;

use crate::bitcore::{f_inner_product, BitString, Party, PromiseTriple};
use crate::error::{Error, Result};
use crate::qsim::{sample_outcome, support, transformed_state};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Audience {
    To(Party),
    Broadcast,
}

impl Audience {
    pub fn reaches(self, p: Party) -> bool {
        match self {
            Audience::To(q) => q == p,
            Audience::Broadcast => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Record {
    pub sender: Party,
    pub audience: Audience,
    pub bit: bool,
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let to = match self.audience {
            Audience::To(p) => p.short(),
            Audience::Broadcast => '*',
        };
        write!(f, "{}->{}:{}", self.sender.short(), to, self.bit as u8)
    }
}

/// Ordered, append-only list of transmitted bits. Its length is the cost.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Transcript {
    records: Vec<Record>,
}

impl Transcript {
    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn cost(&self) -> usize {
        self.records.len()
    }

    /// Bits addressed to `p` among the first `upto` records, excluding bits
    /// `p` sent itself.
    pub fn inbox_before(&self, p: Party, upto: usize) -> Vec<bool> {
        self.records[..upto]
            .iter()
            .filter(|r| r.sender != p && r.audience.reaches(p))
            .map(|r| r.bit)
            .collect()
    }

    pub fn inbox(&self, p: Party) -> Vec<bool> {
        self.inbox_before(p, self.records.len())
    }

    fn push(&mut self, r: Record) {
        self.records.push(r);
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, r) in self.records.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolKind {
    QuantumTwoBit,
    ClassicalThreeBit,
    ClassicalCount,
    ParityOneBit,
    InnerProductTrivial,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::QuantumTwoBit => "quantum-2bit",
            ProtocolKind::ClassicalThreeBit => "classical-3bit",
            ProtocolKind::ClassicalCount => "classical-count",
            ProtocolKind::ParityOneBit => "parity-1bit",
            ProtocolKind::InnerProductTrivial => "ip-trivial",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Zero counts per party and the number of columns whose AND is 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CountSummary {
    pub r_a: u32,
    pub r_b: u32,
    pub r_c: u32,
    pub k: u32,
}

impl CountSummary {
    /// Each column with AND 0 holds exactly two zeros and each column `111`
    /// holds none, so `r_A + r_B + r_C = 2k` on the promise.
    pub fn of(t: &PromiseTriple) -> Result<Self> {
        let s = CountSummary {
            r_a: t.x().count_zeros(),
            r_b: t.y().count_zeros(),
            r_c: t.z().count_zeros(),
            k: t.columns().filter(|c| !c.and()).count() as u32,
        };
        if s.r_a + s.r_b + s.r_c != 2 * s.k {
            return Err(Error::CountingIdentity {
                r_a: s.r_a,
                r_b: s.r_b,
                r_c: s.r_c,
                k: s.k,
            });
        }
        Ok(s)
    }
}

/// Diagnostic per-party data kept alongside a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalData {
    /// `s^A, s^B, s^C`.
    Measured([bool; 3]),
    Counts(CountSummary),
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub protocol: ProtocolKind,
    /// Input held by each party, indexed by [`Party::index`]; `None` for a
    /// party that does not take part.
    pub inputs: [Option<BitString>; 3],
    /// Bits each party obtained locally before communicating (measurement
    /// results in the quantum protocol).
    pub local_bits: [Vec<bool>; 3],
    pub transcript: Transcript,
    pub output: bool,
    pub locals: LocalData,
}

impl RunResult {
    pub fn cost(&self) -> usize {
        self.transcript.cost()
    }
}

/// What a party may look at when choosing a bit.
#[derive(Debug, Clone, Copy)]
pub struct View<'a> {
    pub input: &'a BitString,
    pub local_bits: &'a [bool],
    pub inbox: &'a [bool],
}

/// Drives one run and keeps parties' information separated.
struct Execution {
    inputs: [Option<BitString>; 3],
    local_bits: [Vec<bool>; 3],
    transcript: Transcript,
}

impl Execution {
    fn new(inputs: [Option<BitString>; 3]) -> Self {
        Execution {
            inputs,
            local_bits: Default::default(),
            transcript: Transcript::default(),
        }
    }

    fn with_view<T>(&self, p: Party, f: impl FnOnce(View<'_>) -> T) -> T {
        let input = self.inputs[p.index()]
            .as_ref()
            .expect("party without input cannot act");
        let inbox = self.transcript.inbox(p);
        f(View {
            input,
            local_bits: &self.local_bits[p.index()],
            inbox: &inbox,
        })
    }

    /// Sends `width` bits, most significant first, of a word computed from
    /// the sender's view.
    fn send_word(
        &mut self,
        sender: Party,
        audience: Audience,
        width: u32,
        word: impl FnOnce(View<'_>) -> u32,
    ) {
        let value = self.with_view(sender, word);
        for shift in (0..width).rev() {
            self.transcript.push(Record {
                sender,
                audience,
                bit: (value >> shift) & 1 == 1,
            });
        }
    }

    fn send_bit(&mut self, sender: Party, audience: Audience, bit: impl FnOnce(View<'_>) -> bool) {
        self.send_word(sender, audience, 1, |v| bit(v) as u32);
    }

    fn finish(
        self,
        protocol: ProtocolKind,
        locals: LocalData,
        output: impl FnOnce(View<'_>) -> bool,
    ) -> RunResult {
        let output = self.with_view(Party::Alice, output);
        RunResult {
            protocol,
            inputs: self.inputs,
            local_bits: self.local_bits,
            transcript: self.transcript,
            output,
            locals,
        }
    }
}

fn xor_all(bits: &[bool]) -> bool {
    bits.iter().fold(false, |a, &b| a ^ b)
}

fn three_party(t: &PromiseTriple) -> [Option<BitString>; 3] {
    [Some(*t.x()), Some(*t.y()), Some(*t.z())]
}

fn two_party(x: &BitString, y: &BitString) -> Result<[Option<BitString>; 3]> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok([Some(*x), Some(*y), None])
}

/// Entanglement-assisted protocol: Bob and Carol each send one bit to Alice.
///
/// Each column's triple is measured once after the local Hadamards and its
/// three result bits are handed to the three parties as local data.
pub fn run_quantum_two_bit<R: Rng + ?Sized>(t: &PromiseTriple, rng: &mut R) -> RunResult {
    let mut exec = Execution::new(three_party(t));
    for column in t.columns() {
        let outcome = sample_outcome(&transformed_state(column), rng);
        for p in Party::ALL {
            exec.local_bits[p.index()].push(outcome.bit(p));
        }
    }
    let s = Party::ALL.map(|p| xor_all(&exec.local_bits[p.index()]));
    exec.send_bit(Party::Bob, Audience::To(Party::Alice), |v| xor_all(v.local_bits));
    exec.send_bit(Party::Carol, Audience::To(Party::Alice), |v| xor_all(v.local_bits));
    exec.finish(ProtocolKind::QuantumTwoBit, LocalData::Measured(s), |v| {
        xor_all(v.local_bits) ^ xor_all(v.inbox)
    })
}

/// Every value `s^A + s^B + s^C` can take over outcomes of non-zero
/// probability, found by walking the product of per-column supports.
pub fn quantum_output_set(t: &PromiseTriple) -> BTreeSet<bool> {
    let mut reachable = BTreeSet::from([false]);
    for column in t.columns() {
        let parities: BTreeSet<bool> = support(&transformed_state(column))
            .into_iter()
            .map(|b| b.count_ones() % 2 == 1)
            .collect();
        reachable = reachable
            .iter()
            .flat_map(|&acc| parities.iter().map(move |&p| acc ^ p))
            .collect();
    }
    reachable
}

/// `(n - k) mod 2` from `n` and `r_A + r_B + r_C (mod 4)`.
fn output_from_total(n: usize, total: u32) -> bool {
    debug_assert!(total.is_multiple_of(2));
    let k = total / 2;
    (n as u32 + k) % 2 == 1
}

/// Three-bit classical protocol.
///
/// Bob sends `r_B mod 4` (two bits) and Carol the high bit of `r_C mod 4`.
/// Alice restores the low bit of `r_C` as `r_A + r_B (mod 2)`, since the three
/// counts sum to an even number.
pub fn run_classical_three_bit(t: &PromiseTriple) -> Result<RunResult> {
    let counts = CountSummary::of(t)?;
    let n = t.len();
    let mut exec = Execution::new(three_party(t));
    exec.send_word(Party::Bob, Audience::To(Party::Alice), 2, |v| {
        v.input.count_zeros() % 4
    });
    exec.send_bit(Party::Carol, Audience::To(Party::Alice), |v| {
        (v.input.count_zeros() % 4) >> 1 == 1
    });
    Ok(exec.finish(ProtocolKind::ClassicalThreeBit, LocalData::Counts(counts), |v| {
        let r_a = v.input.count_zeros() % 4;
        let r_b = ((v.inbox[0] as u32) << 1) | v.inbox[1] as u32;
        let c_low = (r_a + r_b) % 2;
        let r_c = ((v.inbox[2] as u32) << 1) | c_low;
        output_from_total(n, (r_a + r_b + r_c) % 4)
    }))
}

/// Width of one count field in [`run_classical_count`]: `ceil(log2(n + 1))`.
pub fn count_width(n: usize) -> u32 {
    usize::BITS - n.leading_zeros()
}

/// Classical protocol sending the full zero counts, `2·ceil(log2(n+1))` bits.
pub fn run_classical_count(t: &PromiseTriple) -> Result<RunResult> {
    let counts = CountSummary::of(t)?;
    let n = t.len();
    let width = count_width(n);
    let mut exec = Execution::new(three_party(t));
    for sender in [Party::Bob, Party::Carol] {
        exec.send_word(sender, Audience::To(Party::Alice), width, |v| v.input.count_zeros());
    }
    Ok(exec.finish(ProtocolKind::ClassicalCount, LocalData::Counts(counts), |v| {
        let field = |bits: &[bool]| bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        let (bob, carol) = v.inbox.split_at(width as usize);
        let total = v.input.count_zeros() + field(bob) + field(carol);
        output_from_total(n, total)
    }))
}

/// Bob sends the parity of `y`; one bit.
pub fn run_parity_one_bit(x: &BitString, y: &BitString) -> Result<RunResult> {
    let mut exec = Execution::new(two_party(x, y)?);
    exec.send_bit(Party::Bob, Audience::To(Party::Alice), |v| v.input.parity());
    Ok(exec.finish(ProtocolKind::ParityOneBit, LocalData::None, |v| {
        v.input.parity() ^ v.inbox[0]
    }))
}

/// Bob sends all of `y`; Alice evaluates the inner product. `n` bits.
pub fn run_ip_trivial(x: &BitString, y: &BitString) -> Result<RunResult> {
    let n = x.len();
    let mut exec = Execution::new(two_party(x, y)?);
    exec.send_word(Party::Bob, Audience::To(Party::Alice), n as u32, |v| v.input.value());
    Ok(exec.finish(ProtocolKind::InnerProductTrivial, LocalData::None, |v| {
        let y = BitString::from_bits(v.inbox.iter().copied()).expect("n <= 32 bits");
        f_inner_product(v.input, &y).expect("equal lengths")
    }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub runs: usize,
    pub costs: BTreeSet<usize>,
}

impl AuditReport {
    pub fn max_cost(&self) -> usize {
        self.costs.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Hash, PartialEq, Eq)]
struct ViewKey {
    protocol: ProtocolKind,
    step: Option<usize>,
    party: Party,
    audience: Option<Audience>,
    input: BitString,
    local_bits: Vec<bool>,
    inbox: Vec<bool>,
}

fn locality(location: String, detail: String) -> Error {
    Error::Locality { location, detail }
}

/// Audits a single run: structure and cost.
pub fn audit_run(r: &RunResult) -> Result<AuditReport> {
    audit_runs(std::iter::once(r))
}

/// Audits a batch of runs for information locality.
///
/// Within the batch, any two records at the same position whose senders had
/// identical views must carry the same bit, and any two runs in which Alice
/// had identical views must produce the same output. A bit or output that
/// secretly depends on someone else's input shows up as a conflict once the
/// batch covers enough inputs.
pub fn audit_runs<'a, I>(runs: I) -> Result<AuditReport>
where
    I: IntoIterator<Item = &'a RunResult>,
{
    let mut seen: HashMap<ViewKey, bool> = HashMap::new();
    let mut report = AuditReport {
        runs: 0,
        costs: BTreeSet::new(),
    };
    for run in runs {
        report.runs += 1;
        report.costs.insert(run.cost());
        let view_of = |p: Party, upto: usize| -> Result<(BitString, Vec<bool>)> {
            let input = run.inputs[p.index()].ok_or_else(|| {
                locality(format!("run {}", report.runs), format!("{p} acts without an input"))
            })?;
            Ok((input, run.transcript.inbox_before(p, upto)))
        };
        for (step, rec) in run.transcript.records().iter().enumerate() {
            let location = format!("record {step} ({rec})");
            if rec.audience == Audience::To(rec.sender) {
                return Err(locality(location, "sender addresses itself".into()));
            }
            if let Audience::To(p) = rec.audience {
                if run.inputs[p.index()].is_none() {
                    return Err(locality(location, format!("{p} does not take part")));
                }
            }
            let (input, inbox) = view_of(rec.sender, step)?;
            let key = ViewKey {
                protocol: run.protocol,
                step: Some(step),
                party: rec.sender,
                audience: Some(rec.audience),
                input,
                local_bits: run.local_bits[rec.sender.index()].clone(),
                inbox,
            };
            if let Some(&prev) = seen.get(&key) {
                if prev != rec.bit {
                    return Err(locality(
                        location,
                        format!("{} sent {} and {} from the same view", rec.sender, prev as u8, rec.bit as u8),
                    ));
                }
            } else {
                seen.insert(key, rec.bit);
            }
        }
        let (input, inbox) = view_of(Party::Alice, run.transcript.cost())?;
        let key = ViewKey {
            protocol: run.protocol,
            step: None,
            party: Party::Alice,
            audience: None,
            input,
            local_bits: run.local_bits[Party::Alice.index()].clone(),
            inbox,
        };
        match seen.get(&key) {
            Some(&prev) if prev != run.output => {
                return Err(locality(
                    "output".into(),
                    format!("Alice output {} and {} from the same view", prev as u8, run.output as u8),
                ));
            }
            Some(_) => {}
            None => {
                seen.insert(key, run.output);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::{enumerate_promise, f_ghz, f_parity};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn all_pairs(n: usize) -> impl Iterator<Item = (BitString, BitString)> {
        (0..1u32 << n).flat_map(move |a| {
            (0..1u32 << n).map(move |b| {
                (BitString::from_value(n, a).unwrap(), BitString::from_value(n, b).unwrap())
            })
        })
    }

    #[test]
    fn quantum_protocol_on_all_n3_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut runs = Vec::new();
        for t in enumerate_promise(3).unwrap() {
            let r = run_quantum_two_bit(&t, &mut rng);
            assert_eq!(r.output, f_ghz(&t), "{t}");
            assert_eq!(r.cost(), 2);
            assert_eq!(quantum_output_set(&t), BTreeSet::from([f_ghz(&t)]));
            runs.push(r);
        }
        let audit = audit_runs(&runs).unwrap();
        assert_eq!(audit.costs, BTreeSet::from([2]));
    }

    #[test]
    fn quantum_all_ones() {
        let t = PromiseTriple::parse("111", "111", "111").unwrap();
        let r = run_quantum_two_bit(&t, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(r.output);
        assert_eq!(r.transcript.records()[0].sender, Party::Bob);
        assert_eq!(r.transcript.records()[1].sender, Party::Carol);
    }

    #[test]
    fn classical_protocols_exhaustive() {
        for n in 1..=5 {
            let mut three = Vec::new();
            for t in enumerate_promise(n).unwrap() {
                let a = run_classical_three_bit(&t).unwrap();
                let b = run_classical_count(&t).unwrap();
                assert_eq!(a.output, f_ghz(&t));
                assert_eq!(b.output, f_ghz(&t));
                assert_eq!(a.cost(), 3);
                assert_eq!(b.cost(), 2 * count_width(n) as usize);
                three.push(a);
            }
            audit_runs(&three).unwrap();
        }
    }

    #[test]
    fn count_widths() {
        assert_eq!(count_width(1), 1);
        assert_eq!(count_width(3), 2);
        assert_eq!(count_width(4), 3);
        assert_eq!(count_width(7), 3);
        assert_eq!(count_width(8), 4);
    }

    #[test]
    fn all_ones_counts() {
        for n in [1, 2, 5, 32] {
            let one = BitString::ones(n).unwrap();
            let t = PromiseTriple::new(one, one, one).unwrap();
            let r = run_classical_three_bit(&t).unwrap();
            assert_eq!(r.output, n % 2 == 1);
            match r.locals {
                LocalData::Counts(c) => {
                    assert_eq!((c.r_b, c.r_c, c.k), (0, 0, 0));
                }
                _ => panic!("expected counts"),
            }
        }
    }

    #[test]
    fn parity_and_ip_baselines() {
        let r = run_parity_one_bit(&bs("000"), &bs("000")).unwrap();
        assert!(!r.output);
        assert_eq!(r.cost(), 1);
        assert!(!run_parity_one_bit(&bs("101"), &bs("110")).unwrap().output);
        let r = run_ip_trivial(&bs("011"), &bs("101")).unwrap();
        assert!(r.output);
        assert_eq!(r.cost(), 3);
        assert!(!run_ip_trivial(&bs("000"), &bs("000")).unwrap().output);

        let mut parity_runs = Vec::new();
        let mut ip_runs = Vec::new();
        for (x, y) in all_pairs(3) {
            let p = run_parity_one_bit(&x, &y).unwrap();
            assert_eq!(p.output, f_parity(&x, &y).unwrap());
            parity_runs.push(p);
            let i = run_ip_trivial(&x, &y).unwrap();
            assert_eq!(i.output, f_inner_product(&x, &y).unwrap());
            ip_runs.push(i);
        }
        assert_eq!(audit_runs(&parity_runs).unwrap().max_cost(), 1);
        assert_eq!(audit_runs(&ip_runs).unwrap().max_cost(), 3);
        assert!(matches!(
            run_parity_one_bit(&bs("01"), &bs("011")),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(run_ip_trivial(&bs("01"), &bs("011")).is_err());
    }

    #[test]
    fn audit_single_run() {
        let t = PromiseTriple::parse("001", "010", "100").unwrap();
        let r = run_classical_three_bit(&t).unwrap();
        let audit = audit_run(&r).unwrap();
        assert_eq!(audit.max_cost(), 3);
        assert_eq!(audit.runs, 1);
    }

    #[test]
    fn audit_catches_output_that_reads_bobs_input() {
        let mut runs: Vec<RunResult> = enumerate_promise(3)
            .unwrap()
            .map(|t| run_classical_three_bit(&t).unwrap())
            .collect();
        audit_runs(&runs).unwrap();
        for r in &mut runs {
            if r.inputs[Party::Bob.index()].unwrap().bit(1) {
                r.output = !r.output;
            }
        }
        let err = audit_runs(&runs).unwrap_err();
        assert!(matches!(err, Error::Locality { ref location, .. } if location == "output"), "{err}");
    }

    #[test]
    fn audit_catches_message_that_reads_another_input() {
        let mut runs: Vec<RunResult> = enumerate_promise(3)
            .unwrap()
            .map(|t| run_classical_three_bit(&t).unwrap())
            .collect();
        for r in &mut runs {
            // Carol's bit leaks x_1
            let leak = r.inputs[Party::Alice.index()].unwrap().bit(1);
            r.transcript.records[2].bit ^= leak;
        }
        let err = audit_runs(&runs).unwrap_err();
        assert!(matches!(err, Error::Locality { ref location, .. } if location.starts_with("record 2")), "{err}");
    }

    #[test]
    fn audit_rejects_self_addressed_records() {
        let t = PromiseTriple::parse("1", "1", "1").unwrap();
        let mut r = run_classical_count(&t).unwrap();
        r.transcript.records[0].audience = Audience::To(Party::Bob);
        assert!(audit_run(&r).is_err());
    }

    #[test]
    fn counting_identity_on_all_small_triples() {
        for n in 1..=6 {
            for t in enumerate_promise(n).unwrap() {
                let c = CountSummary::of(&t).unwrap();
                assert_eq!(c.r_a + c.r_b + c.r_c, 2 * c.k);
                assert_eq!(f_ghz(&t), (n as u32 - c.k) % 2 == 1);
            }
        }
    }
}
