//! Block decompositions of words over `{s_{n−1}, s_n}`.
//!
//! The `n`-partition of `c_α` is obtained by unrolling
//! `s_i = s_{i−1}^{a_i} s_{i−2}` down to level `n`; partitions of finite
//! words are restrictions of it to the window where the word first occurs.
//! Block positions are 0-based and half-open, relative to the partitioned
//! word.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::cf::ContinuedFraction;
use crate::error::{Error, Result};
use crate::sturmian::{build_sn, scan_level, Approximants};
use crate::word::Word;

/// Block type: `S_PREV` is `s_{n−1}`, `S_CUR` is `s_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockTag {
    #[serde(rename = "S_PREV")]
    Prev,
    #[serde(rename = "S_CUR")]
    Cur,
}

impl BlockTag {
    /// Index of the approximant this tag denotes at `level`.
    pub fn index(self, level: usize) -> i64 {
        match self {
            BlockTag::Cur => level as i64,
            BlockTag::Prev => level as i64 - 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub tag: BlockTag,
    pub start: usize,
    pub end: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

/// `w = a · z_1 ⋯ z_l · b` with `z_j ∈ {s_{n−1}, s_n}`, `a` a proper suffix
/// and `b` a proper prefix of a block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    level: usize,
    a: Word,
    blocks: Vec<Block>,
    b: Word,
    #[serde(skip)]
    a_parent: Option<BlockTag>,
    #[serde(skip)]
    b_parent: Option<BlockTag>,
}

impl Partition {
    pub fn level(&self) -> usize {
        self.level
    }

    /// Leading fragment.
    pub fn a(&self) -> &Word {
        &self.a
    }

    /// Trailing fragment.
    pub fn b(&self) -> &Word {
        &self.b
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn tags(&self) -> Vec<BlockTag> {
        self.blocks.iter().map(|b| b.tag).collect()
    }

    /// Block the leading fragment was cut from, when known.
    pub fn a_parent(&self) -> Option<BlockTag> {
        self.a_parent
    }

    pub fn b_parent(&self) -> Option<BlockTag> {
        self.b_parent
    }

    /// Length of the partitioned word.
    pub fn len(&self) -> usize {
        self.a.len() + self.blocks.iter().map(Block::len).sum::<usize>() + self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reassembles `a · z_1 ⋯ z_l · b`.
    pub fn expand(&self, cf: &ContinuedFraction) -> Result<Word> {
        let words = level_words(cf, self.level)?;
        let mut out = Word::with_capacity(self.len());
        out.append(&self.a);
        for block in &self.blocks {
            out.append(words.of(block.tag));
        }
        out.append(&self.b);
        Ok(out)
    }

    /// Checks every partition invariant against `w`.
    pub fn validate(&self, w: &Word, cf: &ContinuedFraction) -> Result<()> {
        let words = level_words(cf, self.level)?;
        let fail = |what: String| Err(Error::Internal(format!("level-{} partition: {what}", self.level)));

        if !self.a.is_empty() {
            let parents = candidates(self.a_parent);
            if !parents
                .iter()
                .any(|&t| self.a.len() < words.of(t).len() && self.a.is_suffix_of(words.of(t)))
            {
                return fail(format!("a = {} is not a proper suffix of a block", self.a));
            }
        }
        if !self.b.is_empty() {
            let parents = candidates(self.b_parent);
            if !parents
                .iter()
                .any(|&t| self.b.len() < words.of(t).len() && self.b.is_prefix_of(words.of(t)))
            {
                return fail(format!("b = {} is not a proper prefix of a block", self.b));
            }
        }
        let mut pos = self.a.len();
        for (j, block) in self.blocks.iter().enumerate() {
            let expected = words.of(block.tag).len();
            if block.start != pos || block.len() != expected {
                return fail(format!(
                    "block {j} spans {:?}, expected {pos}..{}",
                    block.range(),
                    pos + expected
                ));
            }
            if w.len() < block.end || w.slice(block.range()) != *words.of(block.tag) {
                return fail(format!("block {j} does not match the word"));
            }
            pos = block.end;
        }
        if pos + self.b.len() != w.len() {
            return fail(format!("covers {} letters of {}", pos + self.b.len(), w.len()));
        }
        if self.expand(cf)? != *w {
            return fail("reassembly differs from the word".into());
        }
        Ok(())
    }

    /// The `(n−1)`-partition of the same word: `s_n ↦ s_{n−1}^{a_n} s_{n−2}`
    /// (`s_0^{a_1−1} s_{−1}` for `n = 1`), `s_{n−1} ↦ s_{n−1}`.
    pub fn refine(&self, cf: &ContinuedFraction) -> Result<Partition> {
        if self.level == 0 {
            return Err(Error::InvalidArgument("level-0 partitions cannot be refined".into()));
        }
        let n = self.level;
        let fine = n - 1;
        let words = level_words(cf, fine)?;
        let a_n = cf.coefficient(n)?;
        let children = |tag: BlockTag| -> Vec<BlockTag> {
            match tag {
                BlockTag::Prev => vec![BlockTag::Cur],
                BlockTag::Cur => {
                    let k = if n == 1 { a_n - 1 } else { a_n };
                    let mut v = vec![BlockTag::Cur; k as usize];
                    v.push(BlockTag::Prev);
                    v
                }
            }
        };
        let missing = |side: &str| Error::Contract(format!("fragment {side} has no recorded parent block"));

        let mut tags = Vec::new();
        let mut a = Word::new();
        let mut a_parent = None;
        if !self.a.is_empty() {
            let parent = self.a_parent.ok_or_else(|| missing("a"))?;
            let kids = children(parent);
            let mut rest = self.a.len();
            let mut full = Vec::new();
            for &t in kids.iter().rev() {
                let l = words.of(t).len();
                if l <= rest {
                    full.push(t);
                    rest -= l;
                    if rest == 0 {
                        break;
                    }
                } else {
                    a = words.of(t).suffix(rest);
                    a_parent = Some(t);
                    break;
                }
            }
            full.reverse();
            tags.extend(full);
        }
        for block in &self.blocks {
            tags.extend(children(block.tag));
        }
        let mut b = Word::new();
        let mut b_parent = None;
        if !self.b.is_empty() {
            let parent = self.b_parent.ok_or_else(|| missing("b"))?;
            let mut rest = self.b.len();
            for t in children(parent) {
                let l = words.of(t).len();
                if l <= rest {
                    tags.push(t);
                    rest -= l;
                    if rest == 0 {
                        break;
                    }
                } else {
                    b = words.of(t).prefix(rest);
                    b_parent = Some(t);
                    break;
                }
            }
        }
        let mut blocks = Vec::with_capacity(tags.len());
        let mut pos = a.len();
        for tag in tags {
            let end = pos + words.of(tag).len();
            blocks.push(Block { tag, start: pos, end });
            pos = end;
        }
        Ok(Partition {
            level: fine,
            a,
            blocks,
            b,
            a_parent,
            b_parent,
        })
    }
}

fn candidates(parent: Option<BlockTag>) -> Vec<BlockTag> {
    match parent {
        Some(t) => vec![t],
        None => vec![BlockTag::Cur, BlockTag::Prev],
    }
}

/// `s_{n−1}` and `s_n`.
struct LevelWords {
    prev: Word,
    cur: Word,
}

impl LevelWords {
    fn of(&self, tag: BlockTag) -> &Word {
        match tag {
            BlockTag::Prev => &self.prev,
            BlockTag::Cur => &self.cur,
        }
    }
}

fn level_words(cf: &ContinuedFraction, n: usize) -> Result<LevelWords> {
    Ok(LevelWords {
        prev: build_sn(cf, n as i64 - 1)?,
        cur: build_sn(cf, n as i64)?,
    })
}

/// Leaves of the level-`n` unrolling of `c_α` that meet a window.
struct Unroller<'a> {
    cf: &'a ContinuedFraction,
    lengths: Vec<usize>,
    level: i64,
    window: Range<usize>,
    leaves: Vec<(BlockTag, usize)>,
}

impl<'a> Unroller<'a> {
    fn len(&self, i: i64) -> usize {
        self.lengths[(i + 1) as usize]
    }

    fn descend(&mut self, i: i64, offset: usize) {
        let kids: [(i64, u64); 2] = if i == 1 {
            [(0, self.cf.coefficients()[0] - 1), (-1, 1)]
        } else {
            [(i - 1, self.cf.coefficients()[i as usize - 1]), (i - 2, 1)]
        };
        let mut offset = offset;
        for (c, count) in kids {
            let l = self.len(c);
            let span = l * count as usize;
            let (lo, hi) = (self.window.start, self.window.end);
            if offset < hi && lo < offset + span {
                let first = lo.saturating_sub(offset) / l;
                let last = (hi - offset).div_ceil(l).min(count as usize);
                for r in first..last {
                    let start = offset + r * l;
                    if c == self.level {
                        self.leaves.push((BlockTag::Cur, start));
                    } else if c == self.level - 1 {
                        self.leaves.push((BlockTag::Prev, start));
                    } else {
                        self.descend(c, start);
                    }
                }
            }
            offset += span;
        }
    }
}

/// Restriction of the level-`n` partition of `c_α` to `window`
/// (0-based positions in `c_α`).
fn restrict(cf: &ContinuedFraction, n: usize, window: Range<usize>) -> Result<Partition> {
    let table = cf.length_table(cf.depth())?;
    let floor = n.max(1);
    let root = (floor..=cf.depth())
        .find(|&m| table.get_usize(m as i64).is_none_or(|l| l >= window.end))
        .ok_or(Error::DepthExhausted {
            requested: cf.depth() as i64 + 1,
            available: cf.depth(),
        })?;
    let lengths = (-1..=root as i64)
        .map(|i| {
            table.get_usize(i).ok_or_else(|| {
                Error::Resource(format!("|s_{i}| does not fit in memory addressing"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut unroller = Unroller {
        cf,
        lengths,
        level: n as i64,
        window: window.clone(),
        leaves: Vec::new(),
    };
    if root == n {
        unroller.leaves.push((BlockTag::Cur, 0));
    } else {
        unroller.descend(root as i64, 0);
    }

    let words = level_words(cf, n)?;
    let mut partition = Partition {
        level: n,
        a: Word::new(),
        blocks: Vec::new(),
        b: Word::new(),
        a_parent: None,
        b_parent: None,
    };
    let (lo, hi) = (window.start, window.end);
    for (tag, start) in unroller.leaves {
        let word = words.of(tag);
        let end = start + word.len();
        match (start < lo, end > hi) {
            (false, false) => partition.blocks.push(Block {
                tag,
                start: start - lo,
                end: end - lo,
            }),
            (true, false) => {
                partition.a = word.suffix(end - lo);
                partition.a_parent = Some(tag);
            }
            (false, true) => {
                partition.b = word.prefix(hi - start);
                partition.b_parent = Some(tag);
            }
            (true, true) => {
                return Err(Error::Internal(format!(
                    "window {window:?} lies inside a single level-{n} block"
                )))
            }
        }
    }
    Ok(partition)
}

/// The level-`n` partition of `c_α` cut after `len` letters: `a` is empty,
/// a block crossing the cut becomes `b`.
pub fn partition_c_prefix(cf: &ContinuedFraction, n: usize, len: usize) -> Result<Partition> {
    if len == 0 {
        return Err(Error::InvalidArgument("prefix length must be positive".into()));
    }
    if n > cf.depth() {
        return Err(Error::DepthExhausted {
            requested: n as i64,
            available: cf.depth(),
        });
    }
    restrict(cf, n, 0..len)
}

/// Smallest 1-based `j` with `w = c_α[j .. j+|w|−1]`.
pub fn locate(w: &Word, cf: &ContinuedFraction) -> Result<usize> {
    let (_, host) = search_host(w, cf)?;
    host.find(w)
        .map(|i| i + 1)
        .ok_or_else(|| Error::NotInLanguage(w.to_string()))
}

/// Whether `w` is a factor of `c_α`.
pub fn is_member(w: &Word, cf: &ContinuedFraction) -> Result<bool> {
    match locate(w, cf) {
        Ok(_) => Ok(true),
        Err(Error::NotInLanguage(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// `(n, s_{n+2})` with `n ≥ 2` minimal such that `|s_n| > |w|`; every word of
/// the language of that length occurs in `s_{n+2}`.
fn search_host(w: &Word, cf: &ContinuedFraction) -> Result<(usize, Word)> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("empty word".into()));
    }
    let n = scan_level(cf, w.len())?;
    Ok((n, build_sn(cf, n as i64 + 2)?))
}

/// `(n, offset)`: `n ≥ 2` minimal with `|w| < |s_n|` and the first
/// occurrence of `w` in `s_{n+2}` (0-based).
pub fn embed_in_sn(w: &Word, cf: &ContinuedFraction) -> Result<(usize, usize)> {
    let (n, host) = search_host(w, cf)?;
    let offset = host.find(w).ok_or_else(|| Error::NotInLanguage(w.to_string()))?;
    Ok((n, offset))
}

/// The standard `n`-partition of `w`: the `n`-partition of `c_α`
/// restricted to the first occurrence of `w`.
pub fn standard_partition(w: &Word, cf: &ContinuedFraction, n: usize) -> Result<Partition> {
    let j = locate(w, cf)?;
    if n > cf.depth() {
        return Err(Error::DepthExhausted {
            requested: n as i64,
            available: cf.depth(),
        });
    }
    if build_sn(cf, n as i64)?.contains(w) {
        return Err(Error::LevelTooCoarse { level: n });
    }
    restrict(cf, n, j - 1..j - 1 + w.len())
}

/// Largest `n` for which `w` has a standard `n`-partition, i.e. the largest
/// `n` with `w ∉ Sub(s_n)`; `None` when there is none. Every level below it
/// admits one too, except level 0 for the word `0`.
pub fn coarsest_level(w: &Word, cf: &ContinuedFraction) -> Result<Option<usize>> {
    let first = first_containing_level(w, cf)?;
    if first >= 2 {
        return Ok(Some(first - 1));
    }
    Ok((*w != Word::letter(0)).then_some(0))
}

/// Smallest `n ≥ 1` with `w ∈ Sub(s_n)`; the sets are nested from `n = 1`.
pub(crate) fn first_containing_level(w: &Word, cf: &ContinuedFraction) -> Result<usize> {
    let (m, _) = search_host(w, cf)?;
    let approx = Approximants::new(cf, m + 2)?;
    (1..=m + 2)
        .find(|&n| approx.get(n as i64).contains(w))
        .ok_or_else(|| Error::NotInLanguage(w.to_string()))
}

/// `w = x · y` with `x` a suffix of `s_t` or `s_{t−1}` and `y` a prefix of
/// `s_{t+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoBlockSplit {
    pub t: usize,
    pub x: Word,
    pub y: Word,
    /// Index of the approximant `x` is a suffix of (`t` or `t − 1`).
    pub x_level: i64,
}

impl TwoBlockSplit {
    /// Checks the suffix/prefix predicates and `x · y = w`.
    pub fn check(&self, w: &Word, cf: &ContinuedFraction) -> Result<()> {
        let t = self.t as i64;
        if self.x.concat(&self.y) != *w {
            return Err(Error::Internal("x·y differs from w".into()));
        }
        let x_ok = [t, t - 1]
            .into_iter()
            .map(|i| build_sn(cf, i))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .any(|s| self.x.is_suffix_of(s));
        if !x_ok || !self.y.is_prefix_of(&build_sn(cf, t + 1)?) {
            return Err(Error::Internal(format!(
                "split {}·{} at t = {} violates the block predicates",
                self.x, self.y, self.t
            )));
        }
        Ok(())
    }
}

/// Splits `w ∈ W_α` into two blocks.
///
/// For `w ∈ Sub(s_1)` (so `w = 0^k` or `0^k 1`) the split is `t = 1` with
/// `x = ε, y = 0^k` or `x = 0^k 1, y = ε`. Otherwise `t` starts at the largest
/// level with `w ∉ Sub(s_t)` and the split with the shortest `x` is returned.
///
/// When `a_1 = 1` and `a_2 ≥ 2` a few short words (`10` is the smallest) have
/// no split at that level because `s_{t−1} = 0` is not a prefix of `s_{t+1}`;
/// the search then moves up one level at a time.
pub fn two_block_decomposition(w: &Word, cf: &ContinuedFraction) -> Result<TwoBlockSplit> {
    let first = first_containing_level(w, cf)?;
    if first == 1 {
        let (x, y) = if w.letters().all(|a| a == 0) {
            (Word::new(), w.clone())
        } else {
            (w.clone(), Word::new())
        };
        return Ok(TwoBlockSplit { t: 1, x, y, x_level: 1 });
    }
    let start = first - 1;
    let last = (start + SPLIT_SEARCH_LEVELS).min(cf.depth().saturating_sub(1));
    if start > last {
        return Err(Error::DepthExhausted {
            requested: start as i64 + 1,
            available: cf.depth(),
        });
    }
    let approx = Approximants::new(cf, last + 1)?;
    for t in start..=last {
        if let Some(split) = split_at(w, &approx, t) {
            return Ok(split);
        }
    }
    Err(Error::Internal(format!("no two-block split of {w} at t = {start}..={last}")))
}

const SPLIT_SEARCH_LEVELS: usize = 4;

fn split_at(w: &Word, approx: &Approximants, t: usize) -> Option<TwoBlockSplit> {
    let (cur, prev, next) = (
        approx.get(t as i64),
        approx.get(t as i64 - 1),
        approx.get(t as i64 + 1),
    );
    (0..=w.len()).find_map(|i| {
        let (x, y) = (w.prefix(i), w.suffix(w.len() - i));
        if !y.is_prefix_of(next) {
            return None;
        }
        let x_level = if x.is_suffix_of(cur) {
            t as i64
        } else if x.is_suffix_of(prev) {
            t as i64 - 1
        } else {
            return None;
        };
        Some(TwoBlockSplit { t, x, y, x_level })
    })
}

/// `(x, y)` with `x · w · y = s_{n+3}` and `|x|, |y| ≥ |s_{n+1}|`, taking
/// the leftmost such occurrence of `w`.
pub fn frame(w: &Word, cf: &ContinuedFraction, n: usize) -> Result<(Word, Word)> {
    if n == 0 {
        return Err(Error::InvalidArgument("framing needs n ≥ 1".into()));
    }
    if n + 3 > cf.depth() {
        return Err(Error::DepthExhausted {
            requested: n as i64 + 3,
            available: cf.depth(),
        });
    }
    let approx = Approximants::new(cf, n + 3)?;
    if !approx.get(n as i64).contains(w) {
        return Err(Error::Contract(format!("{w} is not a subword of s_{n}")));
    }
    let host = approx.get(n as i64 + 3);
    let margin = approx.len_of(n as i64 + 1);
    let last = host.len().checked_sub(margin + w.len());
    let i = host
        .find_from(w, margin)
        .filter(|&i| last.is_some_and(|l| i <= l))
        .ok_or_else(|| Error::Internal(format!("no framed occurrence of {w} in s_{}", n + 3)))?;
    Ok((host.prefix(i), host.suffix(host.len() - i - w.len())))
}
