//! Grammar-compressed words.
//!
//! Every output word handled by the transducer code lives in an [`SlpPool`]: an
//! append-only straight-line program whose nodes are the empty word, a single
//! symbol, or the concatenation of two earlier nodes. Lengths are exact
//! arbitrary-precision integers, so words such as `a^(2^60)` are cheap to build,
//! cut, rotate and compare.
//!
//! Equality is decided by Karp-Rabin fingerprints by default. Each pool carries
//! a random prime modulus in `[2^61, 2^62)` and two independent random bases;
//! two distinct words of length `n` collide with probability at most
//! `(n / p)^2` per comparison. [`EqualityMode::Exact`] and
//! [`EqualityMode::Verify`] add a symbol-by-symbol comparison for words under
//! the expansion cap.

mod arith;

pub use arith::{factorize, is_prime};
pub(crate) use arith::{add_mod, inv_mod, mul_mod, sub_mod};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt;

/// Exact word length.
pub type Length = BigUint;

/// Number of independent fingerprint components kept per node.
pub const FINGERPRINTS: usize = 2;

/// Seed used when no explicit seed is given.
pub const DEFAULT_SEED: u64 = 0x5eed_17a9_c0de_0001;

/// Default expansion cap (symbols) for exact operations.
pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("word of length {0} exceeds the expansion cap")]
    CapExceeded(Length),
    #[error("cannot remove {requested} symbols from a word of length {length}")]
    OutOfRange { requested: Length, length: Length },
    #[error("words belong to different pools")]
    PoolMismatch,
}

/// Reference to a node of an [`SlpPool`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordRef(u32);

impl WordRef {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Production {
    Empty,
    Symbol(u8),
    Concat(WordRef, WordRef),
}

/// How [`SlpPool::equals`] decides equality of words with equal lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EqualityMode {
    /// Fingerprints only.
    #[default]
    Fingerprint,
    /// Symbol-by-symbol comparison when the length is under the cap,
    /// fingerprints above it.
    Exact,
    /// Fingerprints first; on a fingerprint match, confirm symbol by symbol
    /// when the length is under the cap.
    Verify,
}

/// Parameters of the polynomial fingerprint `H(w) = sum c(w_i) B^(|w|-1-i) mod p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashParams {
    pub modulus: u64,
    pub bases: [u64; FINGERPRINTS],
}

impl HashParams {
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modulus = arith::random_prime(&mut rng, 1 << 61, 1 << 62);
        let mut bases = [0; FINGERPRINTS];
        for b in bases.iter_mut() {
            *b = rand::Rng::gen_range(&mut rng, 2..modulus - 1);
        }
        HashParams { modulus, bases }
    }

    /// Upper bound on the probability that two distinct words of the given
    /// length share all fingerprints.
    pub fn collision_bound(&self, len: &Length) -> f64 {
        let n = len.to_f64().unwrap_or(f64::INFINITY);
        (n / self.modulus as f64).min(1.0).powi(FINGERPRINTS as i32)
    }
}

impl Default for HashParams {
    fn default() -> Self {
        HashParams::from_seed(DEFAULT_SEED)
    }
}

/// Fingerprint of one node for one base: `hash = H(w)`, `power = B^|w|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    pub hash: u64,
    pub power: u64,
}

#[derive(Clone, Debug)]
struct Node {
    production: Production,
    len: Length,
    fp: [Fingerprint; FINGERPRINTS],
    depth: u32,
}

/// Symbol value used in fingerprints; never zero.
#[inline]
pub(crate) fn symbol_value(s: u8) -> u64 {
    s as u64 + 1
}

/// Append-only straight-line program.
#[derive(Clone)]
pub struct SlpPool {
    nodes: Vec<Node>,
    params: HashParams,
    mode: EqualityMode,
    cap: usize,
    concat_memo: HashMap<(WordRef, WordRef), WordRef>,
    symbol_memo: HashMap<u8, WordRef>,
    reverse_memo: HashMap<WordRef, WordRef>,
}

impl fmt::Debug for SlpPool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SlpPool")
            .field("nodes", &self.nodes.len())
            .field("mode", &self.mode)
            .finish()
    }
}

impl Default for SlpPool {
    fn default() -> Self {
        SlpPool::new()
    }
}

impl SlpPool {
    pub fn new() -> Self {
        SlpPool::with_params(HashParams::default())
    }

    pub fn with_seed(seed: u64) -> Self {
        SlpPool::with_params(HashParams::from_seed(seed))
    }

    pub fn with_params(params: HashParams) -> Self {
        let empty = Node {
            production: Production::Empty,
            len: Length::zero(),
            fp: [Fingerprint { hash: 0, power: 1 }; FINGERPRINTS],
            depth: 0,
        };
        SlpPool {
            nodes: vec![empty],
            params,
            mode: EqualityMode::default(),
            cap: DEFAULT_CAP,
            concat_memo: HashMap::new(),
            symbol_memo: HashMap::new(),
            reverse_memo: HashMap::new(),
        }
    }

    pub fn params(&self) -> HashParams {
        self.params
    }

    pub fn equality_mode(&self) -> EqualityMode {
        self.mode
    }

    pub fn set_equality_mode(&mut self, mode: EqualityMode) {
        self.mode = mode;
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn set_cap(&mut self, cap: usize) {
        self.cap = cap;
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn production(&self, w: WordRef) -> Production {
        self.nodes[w.index()].production
    }

    pub fn fingerprint(&self, w: WordRef, component: usize) -> Fingerprint {
        self.nodes[w.index()].fp[component]
    }

    pub fn depth(&self, w: WordRef) -> u32 {
        self.nodes[w.index()].depth
    }

    pub fn empty(&self) -> WordRef {
        WordRef(0)
    }

    fn push(&mut self, node: Node) -> WordRef {
        let id = u32::try_from(self.nodes.len()).expect("SLP pool exhausted");
        self.nodes.push(node);
        WordRef(id)
    }

    pub fn symbol(&mut self, s: u8) -> WordRef {
        if let Some(&w) = self.symbol_memo.get(&s) {
            return w;
        }
        let mut fp = [Fingerprint { hash: 0, power: 0 }; FINGERPRINTS];
        for (k, f) in fp.iter_mut().enumerate() {
            *f = Fingerprint {
                hash: symbol_value(s) % self.params.modulus,
                power: self.params.bases[k],
            };
        }
        let w = self.push(Node {
            production: Production::Symbol(s),
            len: Length::one(),
            fp,
            depth: 0,
        });
        self.symbol_memo.insert(s, w);
        w
    }

    /// Builds a balanced SLP for an explicit symbol sequence.
    pub fn literal(&mut self, symbols: &[u8]) -> WordRef {
        match symbols.len() {
            0 => self.empty(),
            1 => self.symbol(symbols[0]),
            n => {
                let (l, r) = symbols.split_at(n / 2);
                let a = self.literal(l);
                let b = self.literal(r);
                self.concat(a, b)
            }
        }
    }

    pub fn concat(&mut self, a: WordRef, b: WordRef) -> WordRef {
        if self.is_empty(a) {
            return b;
        }
        if self.is_empty(b) {
            return a;
        }
        if let Some(&w) = self.concat_memo.get(&(a, b)) {
            return w;
        }
        let p = self.params.modulus;
        let (na, nb) = (&self.nodes[a.index()], &self.nodes[b.index()]);
        let mut fp = [Fingerprint { hash: 0, power: 0 }; FINGERPRINTS];
        for (k, f) in fp.iter_mut().enumerate() {
            let (fa, fb) = (na.fp[k], nb.fp[k]);
            *f = Fingerprint {
                hash: add_mod(mul_mod(fa.hash, fb.power, p), fb.hash, p),
                power: mul_mod(fa.power, fb.power, p),
            };
        }
        let node = Node {
            production: Production::Concat(a, b),
            len: &na.len + &nb.len,
            fp,
            depth: na.depth.max(nb.depth) + 1,
        };
        let w = self.push(node);
        self.concat_memo.insert((a, b), w);
        w
    }

    pub fn concat_all<I: IntoIterator<Item = WordRef>>(&mut self, parts: I) -> WordRef {
        let mut acc = self.empty();
        for w in parts {
            acc = self.concat(acc, w);
        }
        acc
    }

    pub fn len(&self, w: WordRef) -> &Length {
        &self.nodes[w.index()].len
    }

    pub fn is_empty(&self, w: WordRef) -> bool {
        self.nodes[w.index()].len.is_zero()
    }

    /// Lazily yields the symbols of `w`.
    pub fn symbols(&self, w: WordRef) -> Symbols<'_> {
        Symbols {
            pool: self,
            stack: vec![w],
        }
    }

    /// The explicit word, if its length is at most `cap`.
    pub fn expand(&self, w: WordRef, cap: usize) -> Result<Vec<u8>, WordError> {
        let len = self.len(w);
        match len.to_usize() {
            Some(n) if n <= cap => Ok(self.symbols(w).collect()),
            _ => Err(WordError::CapExceeded(len.clone())),
        }
    }

    /// Appends the symbols of `w` to `out` as long as `out` stays within `cap`.
    pub fn expand_into(&self, w: WordRef, out: &mut Vec<u8>, cap: usize) -> Result<(), WordError> {
        let len = self.len(w);
        match len.to_usize() {
            Some(n) if out.len() + n <= cap => {
                out.extend(self.symbols(w));
                Ok(())
            }
            _ => Err(WordError::CapExceeded(len + out.len())),
        }
    }

    /// Word equality under the pool's [`EqualityMode`].
    pub fn equals(&self, a: WordRef, b: WordRef) -> bool {
        if a == b {
            return true;
        }
        let (na, nb) = (&self.nodes[a.index()], &self.nodes[b.index()]);
        if na.len != nb.len {
            return false;
        }
        let small = na.len.to_usize().is_some_and(|n| n <= self.cap);
        match self.mode {
            EqualityMode::Fingerprint => na.fp == nb.fp,
            EqualityMode::Exact if small => self.symbols(a).eq(self.symbols(b)),
            EqualityMode::Exact => na.fp == nb.fp,
            EqualityMode::Verify => na.fp == nb.fp && (!small || self.symbols(a).eq(self.symbols(b))),
        }
    }

    /// Removes the first `n` symbols.
    pub fn strip_prefix(&mut self, w: WordRef, n: &Length) -> Result<WordRef, WordError> {
        self.check_range(w, n)?;
        Ok(self.drop_front(w, n.clone()))
    }

    /// Removes the last `n` symbols.
    pub fn strip_suffix(&mut self, w: WordRef, n: &Length) -> Result<WordRef, WordError> {
        self.check_range(w, n)?;
        let keep = self.len(w) - n;
        Ok(self.take_front(w, keep))
    }

    /// The first `n` symbols.
    pub fn prefix(&mut self, w: WordRef, n: &Length) -> Result<WordRef, WordError> {
        self.check_range(w, n)?;
        Ok(self.take_front(w, n.clone()))
    }

    /// The last `n` symbols.
    pub fn suffix(&mut self, w: WordRef, n: &Length) -> Result<WordRef, WordError> {
        self.check_range(w, n)?;
        let drop = self.len(w) - n;
        Ok(self.drop_front(w, drop))
    }

    fn check_range(&self, w: WordRef, n: &Length) -> Result<(), WordError> {
        let len = self.len(w);
        if n > len {
            return Err(WordError::OutOfRange {
                requested: n.clone(),
                length: len.clone(),
            });
        }
        Ok(())
    }

    fn drop_front(&mut self, w: WordRef, mut n: Length) -> WordRef {
        let mut rights = Vec::new();
        let mut cur = w;
        let mut rest = loop {
            if n.is_zero() {
                break cur;
            }
            if &n >= self.len(cur) {
                break self.empty();
            }
            match self.production(cur) {
                Production::Concat(a, b) => {
                    let la = self.len(a);
                    if &n < la {
                        rights.push(b);
                        cur = a;
                    } else {
                        n -= la;
                        cur = b;
                    }
                }
                // 0 < n < len(cur) is impossible for leaves
                _ => unreachable!("leaf with partial cut"),
            }
        };
        for &r in rights.iter().rev() {
            rest = self.concat(rest, r);
        }
        rest
    }

    fn take_front(&mut self, w: WordRef, mut n: Length) -> WordRef {
        let mut lefts = Vec::new();
        let mut cur = w;
        let last = loop {
            if n.is_zero() {
                break self.empty();
            }
            if &n >= self.len(cur) {
                break cur;
            }
            match self.production(cur) {
                Production::Concat(a, b) => {
                    let la = self.len(a);
                    if &n <= la {
                        cur = a;
                    } else {
                        n -= la;
                        lefts.push(a);
                        cur = b;
                    }
                }
                _ => unreachable!("leaf with partial cut"),
            }
        };
        let mut acc = self.empty();
        for &l in &lefts {
            acc = self.concat(acc, l);
        }
        self.concat(acc, last)
    }

    /// `rho_n[w]`: moves the prefix of length `n mod |w|` to the end.
    pub fn rotate_left(&mut self, w: WordRef, n: &Length) -> WordRef {
        if self.is_empty(w) {
            return w;
        }
        let m = n % self.len(w);
        if m.is_zero() {
            return w;
        }
        let head = self.take_front(w, m.clone());
        let tail = self.drop_front(w, m);
        self.concat(tail, head)
    }

    pub fn reverse(&mut self, w: WordRef) -> WordRef {
        if let Some(&r) = self.reverse_memo.get(&w) {
            return r;
        }
        // post-order over the DAG below w
        let mut stack = vec![(w, false)];
        while let Some((v, expanded)) = stack.pop() {
            if self.reverse_memo.contains_key(&v) {
                continue;
            }
            match self.production(v) {
                Production::Empty | Production::Symbol(_) => {
                    self.reverse_memo.insert(v, v);
                }
                Production::Concat(a, b) => {
                    if expanded {
                        let (ra, rb) = (self.reverse_memo[&a], self.reverse_memo[&b]);
                        let r = self.concat(rb, ra);
                        self.reverse_memo.insert(v, r);
                        self.reverse_memo.insert(r, v);
                    } else {
                        stack.push((v, true));
                        stack.push((a, false));
                        stack.push((b, false));
                    }
                }
            }
        }
        self.reverse_memo[&w]
    }

    /// `p^k` using O(log k) new nodes.
    pub fn power(&mut self, p: WordRef, k: &Length) -> WordRef {
        let mut acc = self.empty();
        let mut base = p;
        let bits = k.bits();
        for i in 0..bits {
            if k.bit(i) {
                acc = self.concat(acc, base);
            }
            if i + 1 < bits {
                base = self.concat(base, base);
            }
        }
        acc
    }

    /// Whether `w` lies in `p^*`.
    pub fn is_power_of(&mut self, w: WordRef, p: WordRef) -> bool {
        if self.is_empty(w) {
            return true;
        }
        if self.is_empty(p) {
            return false;
        }
        let (q, r) = self.len(w).div_rem(self.len(p));
        if !r.is_zero() {
            return false;
        }
        let candidate = self.power(p, &q);
        self.equals(w, candidate)
    }

    /// The smallest `p` with `w = p^k`.
    ///
    /// Words within the cap are expanded and solved with the failure function.
    /// Longer words whose length fits in 64 bits are handled in compressed form:
    /// `w` is a power of its prefix of length `d` (with `d | |w|`) iff
    /// `rho_d[w] = w`, and the full periods dividing `|w|` are exactly the
    /// multiples of the primitive root length, so dividing out prime factors
    /// greedily finds it.
    pub fn primitive_root(&mut self, w: WordRef) -> Result<WordRef, WordError> {
        let len = self.len(w).clone();
        if len.is_zero() {
            return Ok(w);
        }
        if let Some(n) = len.to_usize().filter(|&n| n <= self.cap) {
            let s = self.expand(w, n)?;
            let period = smallest_period(&s);
            let root = if n % period == 0 { period } else { n };
            return Ok(self.take_front(w, Length::from(root)));
        }
        let n = len.to_u64().ok_or_else(|| WordError::CapExceeded(len.clone()))?;
        let mut d = n;
        for (prime, mult) in factorize(n) {
            for _ in 0..mult {
                let candidate = d / prime;
                let rotated = self.rotate_left(w, &Length::from(candidate));
                if self.equals(rotated, w) {
                    d = candidate;
                } else {
                    break;
                }
            }
        }
        Ok(self.take_front(w, Length::from(d)))
    }

    /// Copies `w` from another pool into this one.
    pub fn import(&mut self, other: &SlpPool, w: WordRef, memo: &mut HashMap<WordRef, WordRef>) -> WordRef {
        if let Some(&r) = memo.get(&w) {
            return r;
        }
        let mut stack = vec![(w, false)];
        while let Some((v, expanded)) = stack.pop() {
            if memo.contains_key(&v) {
                continue;
            }
            match other.production(v) {
                Production::Empty => {
                    memo.insert(v, self.empty());
                }
                Production::Symbol(s) => {
                    let r = self.symbol(s);
                    memo.insert(v, r);
                }
                Production::Concat(a, b) => {
                    if expanded {
                        let r = self.concat(memo[&a], memo[&b]);
                        memo.insert(v, r);
                    } else {
                        stack.push((v, true));
                        stack.push((a, false));
                        stack.push((b, false));
                    }
                }
            }
        }
        memo[&w]
    }

    /// Human-readable rendering: the word itself when short, otherwise a
    /// prefix and the exact length.
    pub fn display(&self, w: WordRef, max: usize) -> String {
        match self.expand(w, max) {
            Ok(s) => String::from_utf8_lossy(&s).into_owned(),
            Err(_) => {
                let head: Vec<u8> = self.symbols(w).take(max.min(32)).collect();
                format!("{}...<len={}>", String::from_utf8_lossy(&head), self.len(w))
            }
        }
    }
}

/// Smallest period of an explicit word via the KMP failure function.
pub fn smallest_period(s: &[u8]) -> usize {
    if s.is_empty() {
        return 0;
    }
    let mut fail = vec![0usize; s.len()];
    let mut k = 0;
    for i in 1..s.len() {
        while k > 0 && s[i] != s[k] {
            k = fail[k - 1];
        }
        if s[i] == s[k] {
            k += 1;
        }
        fail[i] = k;
    }
    s.len() - fail[s.len() - 1]
}

/// Explicit primitive root of a nonempty word.
pub fn primitive_root_explicit(s: &[u8]) -> &[u8] {
    let p = smallest_period(s);
    if p > 0 && s.len() % p == 0 {
        &s[..p]
    } else {
        s
    }
}

pub struct Symbols<'a> {
    pool: &'a SlpPool,
    stack: Vec<WordRef>,
}

impl Iterator for Symbols<'_> {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        while let Some(w) = self.stack.pop() {
            match self.pool.production(w) {
                Production::Empty => {}
                Production::Symbol(s) => return Some(s),
                Production::Concat(a, b) => {
                    self.stack.push(b);
                    self.stack.push(a);
                }
            }
        }
        None
    }
}
