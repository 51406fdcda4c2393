//! Shift spaces, admissible words, lazily materialized points and the
//! connecting bridges between words.
//!
//! Every space is compiled to a deterministic automaton whose accepted
//! language is exactly the set of admissible finite words. Counting, bridging
//! and partition sums all run over that automaton, so the three variants
//! (full shift, matrix SFT, β-shift) share one code path.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::beta::{beta_kneading, required_precision_bits, BetaNumber, Kneading};
use crate::error::{LabError, Result};

pub type Symbol = u8;

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// A finite word over `{0, …, k−1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Symbol> {
        self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Base-k index of the word (most significant symbol first).
    pub fn index(&self, k: usize) -> usize {
        word_index(&self.0, k)
    }

    pub fn from_index(mut index: usize, len: usize, k: usize) -> Word {
        let mut v = vec![0; len];
        for slot in v.iter_mut().rev() {
            *slot = (index % k) as Symbol;
            index /= k;
        }
        Word(v)
    }

    pub fn check_alphabet(&self, k: usize) -> Result<()> {
        match self.0.iter().find(|&&s| s as usize >= k) {
            Some(&s) => Err(LabError::SymbolOutOfRange { symbol: s as u32, k }),
            None => Ok(()),
        }
    }
}

pub(crate) fn word_index(symbols: &[Symbol], k: usize) -> usize {
    symbols.iter().fold(0usize, |acc, &s| acc * k + s as usize)
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            write!(f, "{}", DIGITS[s as usize] as char)?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as Symbol)
                    .ok_or_else(|| LabError::Parse(format!("bad symbol {c:?} in word {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Deterministic automaton over the alphabet; state 0 is the start state and
/// every state is accepting.
#[derive(Clone, Debug)]
pub struct Automaton {
    k: usize,
    delta: Vec<Vec<Option<u32>>>,
}

impl Automaton {
    pub fn start(&self) -> usize {
        0
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    #[inline]
    pub fn step(&self, state: usize, symbol: Symbol) -> Option<usize> {
        self.delta[state][symbol as usize].map(|s| s as usize)
    }

    pub fn run_from(&self, mut state: usize, word: &[Symbol]) -> Option<usize> {
        for &s in word {
            state = self.step(state, s)?;
        }
        Some(state)
    }

    pub fn run(&self, word: &[Symbol]) -> Option<usize> {
        self.run_from(self.start(), word)
    }

    pub fn alphabet(&self) -> usize {
        self.k
    }
}

#[derive(Clone, Debug)]
pub enum SpaceKind {
    Full,
    Sft { transition: Vec<Vec<bool>> },
    Beta { beta: BetaNumber, kneading: Kneading },
}

/// The ambient one-sided symbolic system.
#[derive(Clone, Debug)]
pub struct ShiftSpace {
    k: usize,
    kind: SpaceKind,
    mixing_gap: Option<usize>,
    automaton: Automaton,
}

impl ShiftSpace {
    pub fn full(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(LabError::InvalidSpace(format!("alphabet size must be ≥ 2, got {k}")));
        }
        if k > DIGITS.len() {
            return Err(LabError::InvalidSpace(format!("alphabet size must be ≤ 36, got {k}")));
        }
        let automaton = Automaton {
            k,
            delta: vec![(0..k).map(|_| Some(0)).collect()],
        };
        Ok(ShiftSpace {
            k,
            kind: SpaceKind::Full,
            mixing_gap: Some(0),
            automaton,
        })
    }

    pub fn sft(transition: Vec<Vec<bool>>) -> Result<Self> {
        let k = transition.len();
        if k < 2 || k > DIGITS.len() {
            return Err(LabError::InvalidSpace(format!("alphabet size must be in 2..=36, got {k}")));
        }
        if transition.iter().any(|row| row.len() != k) {
            return Err(LabError::InvalidSpace("transition matrix must be square".into()));
        }
        for i in 0..k {
            if !transition[i].iter().any(|&b| b) {
                return Err(LabError::InvalidSpace(format!("symbol {i} has no successor")));
            }
            if !(0..k).any(|r| transition[r][i]) {
                return Err(LabError::InvalidSpace(format!("symbol {i} has no predecessor")));
            }
        }
        let mixing_gap = primitivity_exponent(&transition);
        // state 0 = nothing read yet, state s+1 = last symbol s
        let mut delta = vec![(0..k).map(|s| Some(s as u32 + 1)).collect::<Vec<_>>()];
        for row in &transition {
            delta.push(
                row.iter()
                    .enumerate()
                    .map(|(t, &ok)| ok.then_some(t as u32 + 1))
                    .collect(),
            );
        }
        Ok(ShiftSpace {
            k,
            kind: SpaceKind::Sft { transition },
            mixing_gap,
            automaton: Automaton { k, delta },
        })
    }

    /// Golden-mean shift: no two consecutive 1s.
    pub fn golden_mean() -> Self {
        Self::sft(vec![vec![true, true], vec![true, false]]).expect("valid constant")
    }

    /// β-shift with the kneading prefix computed to `depth` digits.
    pub fn beta(beta: BetaNumber, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(LabError::InvalidSpace("kneading depth must be positive".into()));
        }
        let precision = required_precision_bits(&beta, depth).max(128);
        let kneading = beta_kneading(&beta, depth, precision)?;
        let k = beta.floor().to_string().parse::<usize>().unwrap_or(0) + 1;
        if k > DIGITS.len() {
            return Err(LabError::InvalidSpace("beta too large".into()));
        }
        let automaton = beta_automaton(kneading.digits.as_slice(), k);
        Ok(ShiftSpace {
            k,
            kind: SpaceKind::Beta { beta, kneading },
            mixing_gap: None,
            automaton,
        })
    }

    pub fn alphabet(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn mixing_gap(&self) -> Option<usize> {
        self.mixing_gap
    }

    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    pub fn kneading(&self) -> Option<&Kneading> {
        match &self.kind {
            SpaceKind::Beta { kneading, .. } => Some(kneading),
            _ => None,
        }
    }

    /// Whether symbol `b` may follow `a` (always true off matrix SFTs).
    pub fn allows(&self, a: Symbol, b: Symbol) -> bool {
        match &self.kind {
            SpaceKind::Sft { transition } => transition[a as usize][b as usize],
            _ => true,
        }
    }

    pub fn is_markov(&self) -> bool {
        !matches!(self.kind, SpaceKind::Beta { .. })
    }

    pub fn type_name(&self) -> &'static str {
        match self.kind {
            SpaceKind::Full => "full",
            SpaceKind::Sft { .. } => "sft",
            SpaceKind::Beta { .. } => "beta",
        }
    }

    pub fn is_admissible(&self, w: &[Symbol]) -> bool {
        w.iter().all(|&s| (s as usize) < self.k) && self.automaton.run(w).is_some()
    }

    /// Whether the bi-infinite repetition of `cycle` stays admissible.
    pub fn is_cyclically_admissible(&self, cycle: &[Symbol]) -> bool {
        if cycle.is_empty() || cycle.iter().any(|&s| s as usize >= self.k) {
            return false;
        }
        self.periodic_run(&[], cycle).is_some()
    }

    /// Runs `prefix · cycle^∞` until the (state, phase) pair repeats.
    fn periodic_run(&self, prefix: &[Symbol], cycle: &[Symbol]) -> Option<()> {
        let mut state = self.automaton.run(prefix)?;
        let mut seen = HashSet::new();
        while seen.insert(state) {
            state = self.automaton.run_from(state, cycle)?;
        }
        Some(())
    }

    /// Exact number of admissible words of length `n`.
    pub fn count_words(&self, n: usize) -> Result<BigUint> {
        if n == 0 {
            return Err(LabError::Precondition("word length must be ≥ 1".into()));
        }
        let a = &self.automaton;
        let mut counts = vec![BigUint::zero(); a.num_states()];
        counts[a.start()] = BigUint::one();
        for _ in 0..n {
            let mut next = vec![BigUint::zero(); a.num_states()];
            for (state, c) in counts.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for s in 0..self.k {
                    if let Some(t) = a.step(state, s as Symbol) {
                        next[t] += c;
                    }
                }
            }
            counts = next;
        }
        Ok(counts.into_iter().sum())
    }

    /// All admissible words of length `n` in lexicographic order.
    pub fn enumerate_words(&self, n: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut buf = Vec::with_capacity(n);
        self.enumerate_rec(self.automaton.start(), n, &mut buf, &mut out);
        out
    }

    fn enumerate_rec(&self, state: usize, n: usize, buf: &mut Vec<Symbol>, out: &mut Vec<Word>) {
        if buf.len() == n {
            out.push(Word(buf.clone()));
            return;
        }
        for s in 0..self.k as Symbol {
            if let Some(t) = self.automaton.step(state, s) {
                buf.push(s);
                self.enumerate_rec(t, n, buf, out);
                buf.pop();
            }
        }
    }

    /// Shortest (then lexicographically smallest) `w` with `|w| ≤ max_gap`
    /// and `u·w·v` admissible.
    pub fn bridge(&self, u: &[Symbol], v: &[Symbol], max_gap: usize) -> Result<Word> {
        let state = self
            .automaton
            .run(u)
            .ok_or_else(|| LabError::Inadmissible(Word(u.to_vec()).to_string()))?;
        if !self.is_admissible(v) {
            return Err(LabError::Inadmissible(Word(v.to_vec()).to_string()));
        }
        self.bridge_from_state(state, v, max_gap)
    }

    /// Bridge search starting from an automaton state (the state reached after `u`).
    pub fn bridge_from_state(&self, state: usize, v: &[Symbol], max_gap: usize) -> Result<Word> {
        let search_limit = max_gap.max(self.k * self.k);
        let mut accepts: HashMap<usize, bool> = HashMap::new();
        let mut dead: HashSet<(usize, usize)> = HashSet::new();
        let mut buf = Vec::new();
        for len in 0..=search_limit {
            if self.bridge_dfs(state, len, v, &mut buf, &mut accepts, &mut dead) {
                if len <= max_gap {
                    return Ok(Word(buf));
                }
                return Err(LabError::BridgeTooLong {
                    max_gap,
                    required: len,
                });
            }
        }
        Err(LabError::NotMixing)
    }

    fn bridge_dfs(
        &self,
        state: usize,
        remaining: usize,
        v: &[Symbol],
        buf: &mut Vec<Symbol>,
        accepts: &mut HashMap<usize, bool>,
        dead: &mut HashSet<(usize, usize)>,
    ) -> bool {
        if remaining == 0 {
            return *accepts
                .entry(state)
                .or_insert_with(|| self.automaton.run_from(state, v).is_some());
        }
        if dead.contains(&(state, remaining)) {
            return false;
        }
        for s in 0..self.k as Symbol {
            if let Some(t) = self.automaton.step(state, s) {
                buf.push(s);
                if self.bridge_dfs(t, remaining - 1, v, buf, accepts, dead) {
                    return true;
                }
                buf.pop();
            }
        }
        dead.insert((state, remaining));
        false
    }
}

/// Smallest `M ≥ 1` with every entry of `A^M` positive, searched up to `k²`.
fn primitivity_exponent(a: &[Vec<bool>]) -> Option<usize> {
    let k = a.len();
    let mut power = a.to_vec();
    for m in 1..=k * k {
        if power.iter().all(|row| row.iter().all(|&b| b)) {
            return Some(m);
        }
        let mut next = vec![vec![false; k]; k];
        for i in 0..k {
            for l in 0..k {
                if power[i][l] {
                    for j in 0..k {
                        next[i][j] |= a[l][j];
                    }
                }
            }
        }
        power = next;
    }
    None
}

/// Automaton whose states are the sets of suffix lengths still tied with the
/// kneading prefix. Reading `s` against a tie of length `j` rejects when
/// `s > a[j]`, extends the tie when `s = a[j]` and releases it when `s < a[j]`;
/// a tie that reaches the kneading depth has no overlap left and is released.
fn beta_automaton(a: &[Symbol], k: usize) -> Automaton {
    let depth = a.len();
    let mut index: HashMap<Vec<u16>, usize> = HashMap::new();
    let mut states: Vec<Vec<u16>> = vec![Vec::new()];
    index.insert(Vec::new(), 0);
    let mut delta: Vec<Vec<Option<u32>>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let ties = states[id].clone();
        let mut row = vec![None; k];
        for (s, slot) in row.iter_mut().enumerate() {
            let s = s as Symbol;
            let mut next: Vec<u16> = Vec::new();
            let mut ok = true;
            for j in std::iter::once(0u16).chain(ties.iter().copied()) {
                let aj = a[j as usize];
                if s > aj {
                    ok = false;
                    break;
                }
                if s == aj && (j as usize + 1) < depth {
                    next.push(j + 1);
                }
            }
            if !ok {
                continue;
            }
            next.sort_unstable();
            next.dedup();
            let target = match index.get(&next) {
                Some(&t) => t,
                None => {
                    let t = states.len();
                    index.insert(next.clone(), t);
                    states.push(next);
                    queue.push_back(t);
                    t
                }
            };
            *slot = Some(target as u32);
        }
        if delta.len() <= id {
            delta.resize(id + 1, Vec::new());
        }
        delta[id] = row;
    }
    Automaton { k, delta }
}

/// Source of symbols for a point whose tail is generated by a construction.
pub trait SymbolSource: fmt::Debug + Send + Sync {
    /// Number of symbols available.
    fn horizon(&self) -> usize;
    fn symbols(&self) -> &[Symbol];
}

#[derive(Clone, Debug)]
pub enum Tail {
    Periodic(Word),
    Schedule(Arc<dyn SymbolSource>),
}

/// A one-sided sequence: finite prefix followed by a periodic or generated tail.
#[derive(Clone, Debug)]
pub struct SymbolicPoint {
    k: usize,
    prefix: Word,
    tail: Tail,
}

impl SymbolicPoint {
    /// `prefix · cycle^∞`, checked admissible in `space` for all time.
    pub fn periodic(space: &ShiftSpace, prefix: Word, cycle: Word) -> Result<Self> {
        if cycle.is_empty() {
            return Err(LabError::Precondition("cycle must be nonempty".into()));
        }
        prefix.check_alphabet(space.alphabet())?;
        cycle.check_alphabet(space.alphabet())?;
        if space.periodic_run(prefix.as_slice(), cycle.as_slice()).is_none() {
            return Err(LabError::Inadmissible(format!("{prefix}({cycle})^∞")));
        }
        Ok(SymbolicPoint {
            k: space.alphabet(),
            prefix,
            tail: Tail::Periodic(cycle),
        })
    }

    /// Point backed by a construction. The source is trusted to be admissible.
    pub fn scheduled(k: usize, source: Arc<dyn SymbolSource>) -> Self {
        SymbolicPoint {
            k,
            prefix: Word::empty(),
            tail: Tail::Schedule(source),
        }
    }

    pub fn alphabet(&self) -> usize {
        self.k
    }

    pub fn prefix(&self) -> &Word {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// Number of symbols that can be materialized (`None` = unbounded).
    pub fn horizon(&self) -> Option<usize> {
        match &self.tail {
            Tail::Periodic(_) => None,
            Tail::Schedule(src) => Some(self.prefix.len() + src.horizon()),
        }
    }

    /// Period of the tail, when periodic.
    pub fn period(&self) -> Option<usize> {
        match &self.tail {
            Tail::Periodic(c) => Some(c.len()),
            Tail::Schedule(_) => None,
        }
    }

    pub fn symbol_at(&self, i: usize) -> Result<Symbol> {
        if i < self.prefix.len() {
            return Ok(self.prefix.0[i]);
        }
        let j = i - self.prefix.len();
        match &self.tail {
            Tail::Periodic(c) => Ok(c.0[j % c.len()]),
            Tail::Schedule(src) => src.symbols().get(j).copied().ok_or(LabError::HorizonExceeded {
                requested: i + 1,
                available: self.prefix.len() + src.horizon(),
            }),
        }
    }

    /// First `n` symbols.
    pub fn materialize_prefix(&self, n: usize) -> Result<Word> {
        let mut out = Vec::with_capacity(n);
        out.extend_from_slice(&self.prefix.0[..n.min(self.prefix.len())]);
        let rest = n.saturating_sub(self.prefix.len());
        match &self.tail {
            Tail::Periodic(c) => {
                out.extend(c.0.iter().copied().cycle().take(rest));
            }
            Tail::Schedule(src) => {
                if rest > src.horizon() {
                    return Err(LabError::HorizonExceeded {
                        requested: n,
                        available: self.prefix.len() + src.horizon(),
                    });
                }
                out.extend_from_slice(&src.symbols()[..rest]);
            }
        }
        Ok(Word(out))
    }
}
