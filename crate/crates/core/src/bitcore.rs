//! Bit strings, the three-party promise set, and the target functions.
//!
//! Strings are written and indexed the way they are read: `"001"` has
//! `x_1 = 0`, `x_2 = 0`, `x_3 = 1`. The packed value of a string is its binary
//! reading, so `"001"` packs to `1` and `"110"` to `6`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Longest supported bit string.
pub const MAX_LEN: usize = 32;

/// Longest `n` accepted by [`enumerate_promise`].
pub const MAX_ENUM_LEN: usize = 16;

/// One of the three parties. Alice holds `x`, Bob `y`, Carol `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    Alice,
    Bob,
    Carol,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::Alice, Party::Bob, Party::Carol];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn short(self) -> char {
        match self {
            Party::Alice => 'A',
            Party::Bob => 'B',
            Party::Carol => 'C',
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "Alice",
            Party::Bob => "Bob",
            Party::Carol => "Carol",
        })
    }
}

/// Fixed-length binary word of 1 to 32 bits.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString {
    len: u8,
    bits: u32,
}

impl BitString {
    fn check_len(len: usize) -> Result<()> {
        if (1..=MAX_LEN).contains(&len) {
            Ok(())
        } else {
            Err(Error::LengthOutOfRange { len, max: MAX_LEN })
        }
    }

    fn mask(len: usize) -> u32 {
        if len == 32 {
            u32::MAX
        } else {
            (1u32 << len) - 1
        }
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::from_value(len, 0)
    }

    pub fn ones(len: usize) -> Result<Self> {
        Self::check_len(len)?;
        Ok(BitString {
            len: len as u8,
            bits: Self::mask(len),
        })
    }

    /// Builds a string from its binary reading, e.g. `from_value(3, 0b001)` is `"001"`.
    pub fn from_value(len: usize, value: u32) -> Result<Self> {
        Self::check_len(len)?;
        if value & !Self::mask(len) != 0 {
            return Err(Error::ValueTooWide { value, len });
        }
        Ok(BitString {
            len: len as u8,
            bits: value,
        })
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Result<Self> {
        let mut value = 0u32;
        let mut len = 0usize;
        for b in bits {
            len += 1;
            if len > MAX_LEN {
                return Err(Error::LengthOutOfRange { len, max: MAX_LEN });
            }
            value = (value << 1) | b as u32;
        }
        Self::from_value(len, value)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        Self::check_len(len)?;
        let value = rng.random::<u32>() & Self::mask(len);
        Self::from_value(len, value)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self) -> u32 {
        self.bits
    }

    fn shift(&self, i: usize) -> usize {
        assert!(
            (1..=self.len()).contains(&i),
            "bit index {i} outside 1..={}",
            self.len()
        );
        self.len() - i
    }

    /// Bit `x_i`, 1-based.
    ///
    /// # Panics
    ///
    /// If `i` is not in `1..=len`.
    pub fn bit(&self, i: usize) -> bool {
        (self.bits >> self.shift(i)) & 1 == 1
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (1..=self.len()).contains(&i).then(|| self.bit(i))
    }

    /// Copy with `x_i` replaced. Panics like [`BitString::bit`].
    pub fn with_bit(self, i: usize, value: bool) -> Self {
        let s = self.shift(i);
        let bits = (self.bits & !(1 << s)) | ((value as u32) << s);
        BitString { bits, ..self }
    }

    /// `x_1, x_2, ..., x_n` in order.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (1..=self.len()).map(move |i| self.bit(i))
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn count_zeros(&self) -> u32 {
        self.len as u32 - self.bits.count_ones()
    }

    /// XOR of all bits.
    pub fn parity(&self) -> bool {
        self.bits.count_ones() % 2 == 1
    }

    fn same_len(&self, other: &BitString) -> Result<()> {
        if self.len == other.len {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            })
        }
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        self.same_len(other)?;
        Ok(BitString {
            len: self.len,
            bits: self.bits ^ other.bits,
        })
    }

    pub fn and(&self, other: &BitString) -> Result<BitString> {
        self.same_len(other)?;
        Ok(BitString {
            len: self.len,
            bits: self.bits & other.bits,
        })
    }

    pub fn not(&self) -> BitString {
        BitString {
            len: self.len,
            bits: !self.bits & Self::mask(self.len()),
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidBitChar(other)),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.is_empty() {
            return Err(Error::LengthOutOfRange {
                len: 0,
                max: MAX_LEN,
            });
        }
        BitString::from_bits(bits)
    }
}

/// One position `i` of a triple: the bits `x_i y_i z_i`, packed as the
/// binary reading of that three-character string.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Column(u8);

impl Column {
    /// The columns allowed by the promise, in lexicographic order.
    pub const LEGAL: [Column; 4] = [Column(0b001), Column(0b010), Column(0b100), Column(0b111)];

    pub fn new(a: bool, b: bool, c: bool) -> Self {
        Column(((a as u8) << 2) | ((b as u8) << 1) | c as u8)
    }

    pub fn from_code(code: u8) -> Option<Self> {
        (code < 8).then_some(Column(code))
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn party(self, p: Party) -> bool {
        (self.0 >> (2 - p.index())) & 1 == 1
    }

    pub fn bits(self) -> [bool; 3] {
        [
            self.party(Party::Alice),
            self.party(Party::Bob),
            self.party(Party::Carol),
        ]
    }

    /// `x_i + y_i + z_i = 1 (mod 2)`.
    pub fn is_legal(self) -> bool {
        self.0.count_ones() % 2 == 1
    }

    /// `x_i · y_i · z_i`.
    pub fn and(self) -> bool {
        self.0 == 0b111
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:03b}", self.0)
    }
}

impl fmt::Debug for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Column({self})")
    }
}

/// Inputs `(x, y, z)` of equal length with `x + y + z = 11...1` bitwise.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PromiseTriple {
    x: BitString,
    y: BitString,
    z: BitString,
}

impl PromiseTriple {
    pub fn new(x: BitString, y: BitString, z: BitString) -> Result<Self> {
        x.same_len(&y)?;
        x.same_len(&z)?;
        let violated = x.bits ^ y.bits ^ z.bits ^ BitString::mask(x.len());
        if violated != 0 {
            // leftmost offending column
            let index = x.len() - (31 - violated.leading_zeros() as usize);
            return Err(Error::PromiseViolation {
                index,
                column: Column::new(x.bit(index), y.bit(index), z.bit(index)),
            });
        }
        Ok(PromiseTriple { x, y, z })
    }

    pub fn parse(x: &str, y: &str, z: &str) -> Result<Self> {
        Self::new(x.parse()?, y.parse()?, z.parse()?)
    }

    /// Completes `(x, y)` with the unique `z` the promise allows.
    pub fn complete(x: BitString, y: BitString) -> Result<Self> {
        let z = x.xor(&y)?.not();
        Self::new(x, y, z)
    }

    pub fn from_columns(columns: &[Column]) -> Result<Self> {
        let pick = |p: Party| BitString::from_bits(columns.iter().map(|c| c.party(p)));
        Self::new(pick(Party::Alice)?, pick(Party::Bob)?, pick(Party::Carol)?)
    }

    /// Each column drawn uniformly from [`Column::LEGAL`].
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        BitString::check_len(n)?;
        let columns: Vec<Column> = (0..n)
            .map(|_| Column::LEGAL[rng.random_range(0..4)])
            .collect();
        Self::from_columns(&columns)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self) -> &BitString {
        &self.x
    }

    pub fn y(&self) -> &BitString {
        &self.y
    }

    pub fn z(&self) -> &BitString {
        &self.z
    }

    pub fn input(&self, p: Party) -> &BitString {
        match p {
            Party::Alice => &self.x,
            Party::Bob => &self.y,
            Party::Carol => &self.z,
        }
    }

    /// Column `i`, 1-based.
    pub fn column(&self, i: usize) -> Column {
        Column::new(self.x.bit(i), self.y.bit(i), self.z.bit(i))
    }

    pub fn columns(&self) -> impl Iterator<Item = Column> + '_ {
        (1..=self.len()).map(move |i| self.column(i))
    }
}

impl fmt::Display for PromiseTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

/// `x_1 y_1 z_1 + ... + x_n y_n z_n (mod 2)` on a promise triple.
pub fn f_ghz(t: &PromiseTriple) -> bool {
    let and = t.x.bits & t.y.bits & t.z.bits;
    and.count_ones() % 2 == 1
}

/// [`f_ghz`] on raw strings; refuses inputs off the promise.
pub fn f_ghz_checked(x: &BitString, y: &BitString, z: &BitString) -> Result<bool> {
    PromiseTriple::new(*x, *y, *z).map(|t| f_ghz(&t))
}

/// `x_1 + ... + x_n + y_1 + ... + y_n (mod 2)`.
pub fn f_parity(x: &BitString, y: &BitString) -> Result<bool> {
    Ok(x.xor(y)?.parity())
}

/// `x_1 y_1 + ... + x_n y_n (mod 2)`.
pub fn f_inner_product(x: &BitString, y: &BitString) -> Result<bool> {
    Ok(x.and(y)?.parity())
}

/// Reduces the three-party function to a two-party inner product.
///
/// Substituting `z_i = 1 + x_i + y_i` gives `x_i y_i z_i = x_i y_i` over GF(2),
/// so the pair is simply `(x, y)`. The identity holds for every `n`.
pub fn reduce_to_inner_product(t: &PromiseTriple) -> (BitString, BitString) {
    (t.x, t.y)
}

/// Iterator over every promise triple of a fixed length.
///
/// Triples come out in lexicographic order of their column codes, column 1
/// most significant: for `n = 1` the order is `001, 010, 100, 111`.
#[derive(Debug, Clone)]
pub struct PromiseIter {
    n: usize,
    next: u64,
    end: u64,
}

impl Iterator for PromiseIter {
    type Item = PromiseTriple;

    fn next(&mut self) -> Option<PromiseTriple> {
        if self.next >= self.end {
            return None;
        }
        let index = self.next;
        self.next += 1;
        let columns: Vec<Column> = (0..self.n)
            .map(|i| {
                let digit = (index >> (2 * (self.n - 1 - i))) & 3;
                Column::LEGAL[digit as usize]
            })
            .collect();
        Some(PromiseTriple::from_columns(&columns).expect("legal columns"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for PromiseIter {}

/// All `4^n` promise triples of length `n`, `1 <= n <= 16`.
pub fn enumerate_promise(n: usize) -> Result<PromiseIter> {
    if !(1..=MAX_ENUM_LEN).contains(&n) {
        return Err(Error::LengthOutOfRange {
            len: n,
            max: MAX_ENUM_LEN,
        });
    }
    Ok(PromiseIter {
        n,
        next: 0,
        end: 1u64 << (2 * n),
    })
}

/// A total function on an explicit finite domain of input tuples.
///
/// Used as the common carrier for the parity, inner product and promise
/// functions when they are handed to generic checkers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    arity: usize,
    n: usize,
    values: BTreeMap<Vec<BitString>, bool>,
}

impl FunctionTable {
    /// Every pair of `n`-bit strings, `n <= 8`.
    pub fn two_party<F>(n: usize, f: F) -> Result<Self>
    where
        F: Fn(&BitString, &BitString) -> Result<bool>,
    {
        if !(1..=8).contains(&n) {
            return Err(Error::LengthOutOfRange { len: n, max: 8 });
        }
        let mut values = BTreeMap::new();
        for a in 0..1u32 << n {
            for b in 0..1u32 << n {
                let x = BitString::from_value(n, a)?;
                let y = BitString::from_value(n, b)?;
                values.insert(vec![x, y], f(&x, &y)?);
            }
        }
        Ok(FunctionTable {
            arity: 2,
            n,
            values,
        })
    }

    pub fn parity(n: usize) -> Result<Self> {
        Self::two_party(n, f_parity)
    }

    pub fn inner_product(n: usize) -> Result<Self> {
        Self::two_party(n, f_inner_product)
    }

    /// [`f_ghz`] on exactly the promise set, `n <= 8`.
    pub fn ghz_promise(n: usize) -> Result<Self> {
        if n > 8 {
            return Err(Error::LengthOutOfRange { len: n, max: 8 });
        }
        let values = enumerate_promise(n)?
            .map(|t| (vec![t.x, t.y, t.z], f_ghz(&t)))
            .collect();
        Ok(FunctionTable {
            arity: 3,
            n,
            values,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn input_len(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `None` off the domain.
    pub fn get(&self, inputs: &[BitString]) -> Option<bool> {
        self.values.get(inputs).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[BitString], bool)> + '_ {
        self.values.iter().map(|(k, v)| (k.as_slice(), *v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn indexing_is_one_based_and_reads_left_to_right() {
        let x = bs("001");
        assert_eq!(x.value(), 1);
        assert!(!x.bit(1));
        assert!(!x.bit(2));
        assert!(x.bit(3));
        assert_eq!(x.get(4), None);
        assert_eq!(x.to_string(), "001");
        assert_eq!(x.with_bit(1, true).to_string(), "101");
    }

    #[test]
    #[should_panic(expected = "outside 1..=3")]
    fn out_of_range_bit_panics() {
        bs("001").bit(0);
    }

    #[test]
    fn length_limits() {
        assert!(BitString::zeros(0).is_err());
        assert!(BitString::zeros(33).is_err());
        assert_eq!(BitString::ones(32).unwrap().count_ones(), 32);
        assert!(matches!(
            BitString::from_value(3, 8),
            Err(Error::ValueTooWide { .. })
        ));
        assert!(matches!("01a".parse::<BitString>(), Err(Error::InvalidBitChar('a'))));
        assert!("".parse::<BitString>().is_err());
    }

    #[test]
    fn promise_is_checked() {
        assert!(PromiseTriple::parse("001", "001", "111").is_ok());
        let err = PromiseTriple::parse("001", "001", "110").unwrap_err();
        assert_eq!(
            err,
            Error::PromiseViolation {
                index: 3,
                column: Column::new(true, true, false)
            }
        );
        assert!(matches!(
            PromiseTriple::parse("001", "01", "111"),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(f_ghz_checked(&bs("000"), &bs("000"), &bs("000")).is_err());
    }

    #[test]
    fn ghz_examples() {
        let t = PromiseTriple::parse("001", "001", "111").unwrap();
        assert!(f_ghz(&t));
        let t = PromiseTriple::parse("001", "010", "100").unwrap();
        assert!(!f_ghz(&t));
        for n in 1..=32 {
            let one = BitString::ones(n).unwrap();
            let t = PromiseTriple::new(one, one, one).unwrap();
            assert_eq!(f_ghz(&t), n % 2 == 1);
        }
    }

    #[test]
    fn parity_examples() {
        assert!(!f_parity(&bs("000"), &bs("000")).unwrap());
        assert!(!f_parity(&bs("101"), &bs("110")).unwrap());
        assert!(f_parity(&bs("100"), &bs("110")).unwrap());
        assert!(f_parity(&bs("100"), &bs("11")).is_err());
    }

    #[test]
    fn inner_product_examples() {
        assert!(f_inner_product(&bs("111"), &bs("111")).unwrap());
        assert!(f_inner_product(&bs("011"), &bs("101")).unwrap());
        for v in 0..8 {
            let y = BitString::from_value(3, v).unwrap();
            assert!(!f_inner_product(&bs("000"), &y).unwrap());
        }
        assert!(f_inner_product(&bs("1"), &bs("11")).is_err());
    }

    #[test]
    fn enumeration_order_and_size() {
        let one: Vec<String> = enumerate_promise(1).unwrap().map(|t| t.to_string()).collect();
        assert_eq!(one, ["(0,0,1)", "(0,1,0)", "(1,0,0)", "(1,1,1)"]);
        assert_eq!(enumerate_promise(2).unwrap().count(), 16);
        assert_eq!(enumerate_promise(3).unwrap().len(), 64);
        assert!(enumerate_promise(0).is_err());
        assert!(enumerate_promise(17).is_err());
        assert_eq!(enumerate_promise(16).unwrap().len(), 1 << 32);

        let two: Vec<PromiseTriple> = enumerate_promise(2).unwrap().collect();
        assert!(two.windows(2).all(|w| {
            let a: Vec<u8> = w[0].columns().map(Column::code).collect();
            let b: Vec<u8> = w[1].columns().map(Column::code).collect();
            a < b
        }));
    }

    #[test]
    fn reduction_examples() {
        let t = PromiseTriple::parse("001", "001", "111").unwrap();
        let (x, y) = reduce_to_inner_product(&t);
        assert!(f_inner_product(&x, &y).unwrap());
        let t = PromiseTriple::parse("000", "000", "111").unwrap();
        let (x, y) = reduce_to_inner_product(&t);
        assert!(!f_inner_product(&x, &y).unwrap());
    }

    #[test]
    fn function_tables() {
        let ip = FunctionTable::inner_product(3).unwrap();
        assert_eq!(ip.len(), 64);
        assert_eq!(ip.get(&[bs("011"), bs("101")]), Some(true));
        let ghz = FunctionTable::ghz_promise(3).unwrap();
        assert_eq!(ghz.len(), 64);
        assert_eq!(ghz.get(&[bs("001"), bs("001"), bs("111")]), Some(true));
        assert_eq!(ghz.get(&[bs("000"), bs("000"), bs("000")]), None);
    }
}
