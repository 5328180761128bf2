//! Finite truncations of countable-alphabet Markov shifts.
//!
//! Letters are `1..=M`. Words are stored as plain letter vectors; the shift
//! checks admissibility.

use std::fmt;

use crate::error::{Error, Result};

pub type Letter = u32;

/// Default cap on the number of words any enumeration may produce.
pub const DEFAULT_WORD_CAP: u128 = 10_000_000;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].to_vec())
    }

    pub fn into_inner(self) -> Vec<Letter> {
        self.0
    }

    /// Parses `"1.2.12"` style text; `"-"` or the empty string is the empty word.
    pub fn parse(text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() || text == "-" {
            return Ok(Word::empty());
        }
        text.split('.')
            .map(|s| {
                s.trim()
                    .parse::<Letter>()
                    .ok()
                    .filter(|&l| l >= 1)
                    .ok_or_else(|| Error::Invalid(format!("bad letter {s:?} in word {text:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl From<&[Letter]> for Word {
    fn from(v: &[Letter]) -> Self {
        Word(v.to_vec())
    }
}

impl<const N: usize> From<[Letter; N]> for Word {
    fn from(v: [Letter; N]) -> Self {
        Word(v.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// An eventually periodic sequence `prefix cycle cycle ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point {
    pub prefix: Word,
    pub cycle: Word,
}

impl Point {
    pub fn new(prefix: Word, cycle: Word) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Invalid("point cycle must be nonempty".into()));
        }
        Ok(Point { prefix, cycle })
    }

    pub fn periodic(cycle: Word) -> Result<Self> {
        Point::new(Word::empty(), cycle)
    }

    pub fn letter(&self, i: usize) -> Letter {
        let p = self.prefix.len();
        if i < p {
            self.prefix.0[i]
        } else {
            self.cycle.0[(i - p) % self.cycle.len()]
        }
    }

    /// First `n` coordinates.
    pub fn head(&self, n: usize) -> Vec<Letter> {
        (0..n).map(|i| self.letter(i)).collect()
    }

    pub fn prepend(&self, w: &Word) -> Point {
        Point {
            prefix: w.concat(&self.prefix),
            cycle: self.cycle.clone(),
        }
    }

    /// `σ^n` applied to the point.
    pub fn shifted(&self, n: usize) -> Point {
        let p = self.prefix.len();
        if n <= p {
            Point {
                prefix: Word(self.prefix.0[n..].to_vec()),
                cycle: self.cycle.clone(),
            }
        } else {
            let c = self.cycle.len();
            let r = (n - p) % c;
            let mut cyc = self.cycle.0[r..].to_vec();
            cyc.extend_from_slice(&self.cycle.0[..r]);
            Point {
                prefix: Word::empty(),
                cycle: Word(cyc),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicOrbit {
    pub word: Word,
}

impl PeriodicOrbit {
    pub fn period(&self) -> usize {
        self.word.len()
    }

    pub fn point(&self) -> Point {
        Point {
            prefix: Word::empty(),
            cycle: self.word.clone(),
        }
    }
}

/// Outcome of the finite-irreducibility search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Irreducibility {
    Connected { witnesses: Vec<Word> },
    Unconnectable { from: Letter, to: Letter },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedShift {
    size: usize,
    incidence: Vec<bool>,
    full: bool,
    name: String,
}

impl TruncatedShift {
    pub fn full(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidShift("alphabet size must be positive".into()));
        }
        Ok(TruncatedShift {
            size: m,
            incidence: vec![true; m * m],
            full: true,
            name: format!("full:{m}"),
        })
    }

    pub fn golden_mean() -> Self {
        Self::from_rule(2, |i, j| !(i == 2 && j == 2))
            .map(|s| s.named("golden-mean"))
            .expect("golden-mean shift is valid")
    }

    /// Restriction of a countable 0/1 matrix, given as a rule on letter pairs, to `1..=m`.
    pub fn from_rule(m: usize, rule: impl Fn(Letter, Letter) -> bool) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidShift("alphabet size must be positive".into()));
        }
        let mut incidence = vec![false; m * m];
        for i in 0..m {
            for j in 0..m {
                incidence[i * m + j] = rule(i as Letter + 1, j as Letter + 1);
            }
        }
        let full = incidence.iter().all(|&b| b);
        let shift = TruncatedShift {
            size: m,
            incidence,
            full,
            name: format!("matrix:{m}"),
        };
        shift.validate()?;
        Ok(shift)
    }

    pub fn from_table(rows: &[Vec<bool>]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidShift("incidence table must be square".into()));
        }
        Self::from_rule(m, |i, j| rows[i as usize - 1][j as usize - 1])
    }

    /// Named builtins: `full`, `golden-mean` (requires `m == 2`), `gauss` (full shift on ℕ).
    pub fn builtin(name: &str, m: usize) -> Result<Self> {
        match name {
            "full" => Self::full(m),
            "gauss" => Self::full(m).map(|s| s.named(&format!("gauss:{m}"))),
            "golden-mean" if m == 2 => Ok(Self::golden_mean()),
            "golden-mean" => Err(Error::InvalidShift(format!(
                "golden-mean shift has two letters, got M = {m}"
            ))),
            other => Err(Error::InvalidShift(format!("unknown builtin shift {other:?}"))),
        }
    }

    fn named(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    fn validate(&self) -> Result<()> {
        let m = self.size;
        for i in 0..m {
            if !(0..m).any(|j| self.incidence[i * m + j]) {
                return Err(Error::InvalidShift(format!("letter {} has no successor", i + 1)));
            }
            if !(0..m).any(|j| self.incidence[j * m + i]) {
                return Err(Error::InvalidShift(format!("letter {} has no predecessor", i + 1)));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    #[inline]
    pub fn allows(&self, i: Letter, j: Letter) -> bool {
        self.incidence[(i as usize - 1) * self.size + (j as usize - 1)]
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        1..=self.size as Letter
    }

    pub fn successors(&self, i: Letter) -> impl Iterator<Item = Letter> + '_ {
        self.letters().filter(move |&j| self.allows(i, j))
    }

    pub fn predecessors(&self, j: Letter) -> impl Iterator<Item = Letter> + '_ {
        self.letters().filter(move |&i| self.allows(i, j))
    }

    pub fn is_admissible(&self, w: &[Letter]) -> bool {
        w.iter().all(|&l| l >= 1 && l as usize <= self.size)
            && w.windows(2).all(|p| self.allows(p[0], p[1]))
    }

    pub fn check_admissible(&self, w: &[Letter]) -> Result<()> {
        if self.is_admissible(w) {
            Ok(())
        } else {
            Err(Error::Inadmissible { word: Word::from(w) })
        }
    }

    /// Point admissibility: the prefix, the junction and the cycle closure.
    pub fn point_admissible(&self, x: &Point) -> bool {
        let len = x.prefix.len() + 2 * x.cycle.len();
        self.is_admissible(&x.head(len))
    }

    /// |E^n|, saturating at `u128::MAX`.
    pub fn count_words(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        if self.full {
            return (self.size as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        }
        let m = self.size;
        let mut ends = vec![1u128; m];
        for _ in 1..n {
            let mut next = vec![0u128; m];
            for (i, &c) in ends.iter().enumerate() {
                for j in 0..m {
                    if self.incidence[i * m + j] {
                        next[j] = next[j].saturating_add(c);
                    }
                }
            }
            ends = next;
        }
        ends.iter().fold(0u128, |a, &c| a.saturating_add(c))
    }

    /// Admissible words of length `n` in lexicographic order.
    pub fn enumerate_words(&self, n: usize, cap: u128) -> Result<Vec<Word>> {
        let count = self.count_words(n);
        if count > cap {
            return Err(Error::ResourceCap {
                what: "word enumeration",
                count,
                cap,
            });
        }
        let mut out = Vec::with_capacity(count as usize);
        let mut buf = Vec::with_capacity(n);
        self.extend_words(&mut buf, n, None, &mut out);
        Ok(out)
    }

    /// All `ω ∈ E^n` with `ω·anchor` admissible, in lexicographic order.
    pub fn preimage_words(&self, anchor: &Word, n: usize, cap: u128) -> Result<Vec<Word>> {
        if anchor.is_empty() && !self.full {
            return Err(Error::precondition("preimage anchor must be nonempty"));
        }
        self.check_admissible(anchor.letters())?;
        let count = self.count_words(n);
        if count > cap {
            return Err(Error::ResourceCap {
                what: "preimage enumeration",
                count,
                cap,
            });
        }
        let mut out = Vec::new();
        let mut buf = Vec::with_capacity(n);
        self.extend_words(&mut buf, n, anchor.letters().first().copied(), &mut out);
        Ok(out)
    }

    fn extend_words(&self, buf: &mut Vec<Letter>, n: usize, tail: Option<Letter>, out: &mut Vec<Word>) {
        if buf.len() == n {
            let joins = match (buf.last(), tail) {
                (Some(&l), Some(t)) => self.allows(l, t),
                _ => true,
            };
            if joins {
                out.push(Word(buf.clone()));
            }
            return;
        }
        for e in self.letters() {
            if buf.last().map_or(true, |&l| self.allows(l, e)) {
                buf.push(e);
                self.extend_words(buf, n, tail, out);
                buf.pop();
            }
        }
    }

    /// Cyclic words of period `p`; rotations are listed separately.
    pub fn enumerate_periodic_orbits(&self, p: usize, cap: u128) -> Result<Vec<PeriodicOrbit>> {
        if p == 0 {
            return Err(Error::precondition("period must be at least 1"));
        }
        Ok(self
            .enumerate_words(p, cap)?
            .into_iter()
            .filter(|w| self.allows(*w.0.last().unwrap(), w.0[0]))
            .map(|word| PeriodicOrbit { word })
            .collect())
    }

    /// Searches for a connecting set Λ with words of length at most `max_len`.
    ///
    /// Each ordered pair gets its shortest, lexicographically least connector;
    /// Λ is the set of those connectors.
    pub fn check_finitely_irreducible(&self, max_len: usize) -> Irreducibility {
        if self.full {
            return Irreducibility::Connected { witnesses: vec![Word::empty()] };
        }
        let m = self.size;
        let mut witnesses: Vec<Word> = Vec::new();
        for i in self.letters() {
            let mut link: Vec<Option<Vec<Letter>>> = vec![None; m];
            for j in self.successors(i) {
                link[j as usize - 1] = Some(Vec::new());
            }
            let mut path: Vec<Option<Vec<Letter>>> = vec![None; m];
            let mut level: Vec<Letter> = self.successors(i).collect();
            for &v in &level {
                path[v as usize - 1] = Some(vec![v]);
            }
            let mut len = 1;
            while len <= max_len && !level.is_empty() && link.iter().any(Option::is_none) {
                for &v in &level {
                    for j in self.successors(v) {
                        if link[j as usize - 1].is_none() {
                            link[j as usize - 1] = path[v as usize - 1].clone();
                        }
                    }
                }
                let mut next = Vec::new();
                for &v in &level {
                    for u in self.successors(v) {
                        if path[u as usize - 1].is_none() {
                            let mut p = path[v as usize - 1].clone().unwrap();
                            p.push(u);
                            path[u as usize - 1] = Some(p);
                            next.push(u);
                        }
                    }
                }
                level = next;
                len += 1;
            }
            for (j, l) in link.into_iter().enumerate() {
                match l {
                    Some(w) => witnesses.push(Word(w)),
                    None => {
                        return Irreducibility::Unconnectable {
                            from: i,
                            to: j as Letter + 1,
                        }
                    }
                }
            }
        }
        witnesses.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        witnesses.dedup();
        Irreducibility::Connected { witnesses }
    }

    /// Strong connectivity of the incidence graph.
    pub fn is_irreducible(&self) -> bool {
        matches!(
            self.check_finitely_irreducible(self.size),
            Irreducibility::Connected { .. }
        )
    }

    /// Canonical point of `[w]`: `w` followed by the greedy least-successor path,
    /// which is eventually periodic.
    pub fn canonical_point(&self, w: &[Letter]) -> Result<Point> {
        self.check_admissible(w)?;
        let mut path: Vec<Letter> = w.to_vec();
        let start = match w.last() {
            Some(&l) => l,
            None => return self.canonical_point(&[1]),
        };
        let base = path.len();
        let mut cur = start;
        loop {
            let next = self.successors(cur).next().expect("validated shift");
            if let Some(off) = path[base..].iter().position(|&l| l == next) {
                let at = base + off;
                let cycle = path[at..].to_vec();
                path.truncate(at);
                return Point::new(Word(path), Word(cycle));
            }
            path.push(next);
            cur = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[Letter]) -> Word {
        Word::from(v)
    }

    #[test]
    fn full_shift_counts() {
        let s = TruncatedShift::full(2).unwrap();
        assert_eq!(s.enumerate_words(3, DEFAULT_WORD_CAP).unwrap().len(), 8);
        assert_eq!(s.enumerate_words(0, DEFAULT_WORD_CAP).unwrap(), vec![Word::empty()]);
    }

    #[test]
    fn golden_words_are_lexicographic() {
        let s = TruncatedShift::golden_mean();
        let words = s.enumerate_words(3, DEFAULT_WORD_CAP).unwrap();
        let expect: Vec<Word> = [[1, 1, 1], [1, 1, 2], [1, 2, 1], [2, 1, 1], [2, 1, 2]]
            .iter()
            .map(|a| w(a))
            .collect();
        assert_eq!(words, expect);
    }

    #[test]
    fn dead_letters_rejected() {
        let err = TruncatedShift::from_table(&[vec![true, false], vec![true, false]]);
        assert!(matches!(err, Err(Error::InvalidShift(_))));
    }

    #[test]
    fn word_cap_enforced() {
        let s = TruncatedShift::full(10).unwrap();
        assert!(matches!(s.enumerate_words(8, 1000), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn irreducibility_witnesses() {
        let full = TruncatedShift::full(3).unwrap();
        assert_eq!(
            full.check_finitely_irreducible(2),
            Irreducibility::Connected { witnesses: vec![Word::empty()] }
        );
        let golden = TruncatedShift::golden_mean();
        assert_eq!(
            golden.check_finitely_irreducible(2),
            Irreducibility::Connected { witnesses: vec![Word::empty(), w(&[1])] }
        );
    }

    #[test]
    fn isolated_letter_is_unconnectable() {
        let s = TruncatedShift::from_table(&[
            vec![true, true, false],
            vec![true, true, false],
            vec![false, false, true],
        ])
        .unwrap();
        assert_eq!(
            s.check_finitely_irreducible(4),
            Irreducibility::Unconnectable { from: 1, to: 3 }
        );
        assert!(!s.is_irreducible());
    }

    #[test]
    fn preimages() {
        let full = TruncatedShift::full(2).unwrap();
        assert_eq!(full.preimage_words(&w(&[1]), 2, DEFAULT_WORD_CAP).unwrap().len(), 4);
        let golden = TruncatedShift::golden_mean();
        assert_eq!(
            golden.preimage_words(&w(&[2]), 1, DEFAULT_WORD_CAP).unwrap(),
            vec![w(&[1])]
        );
        assert_eq!(
            golden.preimage_words(&w(&[2]), 0, DEFAULT_WORD_CAP).unwrap(),
            vec![Word::empty()]
        );
    }

    #[test]
    fn periodic_orbits() {
        let full = TruncatedShift::full(2).unwrap();
        assert_eq!(full.enumerate_periodic_orbits(1, DEFAULT_WORD_CAP).unwrap().len(), 2);
        let golden = TruncatedShift::golden_mean();
        let p1 = golden.enumerate_periodic_orbits(1, DEFAULT_WORD_CAP).unwrap();
        assert_eq!(p1, vec![PeriodicOrbit { word: w(&[1]) }]);
        let p2: Vec<Word> = golden
            .enumerate_periodic_orbits(2, DEFAULT_WORD_CAP)
            .unwrap()
            .into_iter()
            .map(|o| o.word)
            .collect();
        assert_eq!(p2, vec![w(&[1, 1]), w(&[1, 2]), w(&[2, 1])]);
    }

    #[test]
    fn canonical_points() {
        let golden = TruncatedShift::golden_mean();
        let p = golden.canonical_point(&[2]).unwrap();
        assert_eq!(p.head(5), vec![2, 1, 1, 1, 1]);
        assert!(golden.point_admissible(&p));
        let cyc = TruncatedShift::from_table(&[vec![false, true], vec![true, false]]).unwrap();
        let q = cyc.canonical_point(&[1]).unwrap();
        assert_eq!(q.head(4), vec![1, 2, 1, 2]);
    }

    #[test]
    fn point_shift_and_prepend() {
        let x = Point::new(w(&[3]), w(&[1, 2])).unwrap();
        assert_eq!(x.shifted(2).head(4), vec![2, 1, 2, 1]);
        assert_eq!(x.prepend(&w(&[5])).head(4), vec![5, 3, 1, 2]);
    }

    #[test]
    fn word_text_roundtrip() {
        let v = w(&[1, 12, 3]);
        assert_eq!(v.to_string(), "1.12.3");
        assert_eq!(Word::parse("1.12.3").unwrap(), v);
        assert_eq!(Word::parse("-").unwrap(), Word::empty());
        assert!(Word::parse("0").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn full_shift_has_m_pow_n_words(m in 1usize..=5, n in 0usize..=8) {
                let s = TruncatedShift::full(m).unwrap();
                let words = s.enumerate_words(n, DEFAULT_WORD_CAP).unwrap();
                prop_assert_eq!(words.len() as u128, (m as u128).pow(n as u32));
                prop_assert_eq!(s.count_words(n), words.len() as u128);
            }

            #[test]
            fn preimages_concatenate_admissibly(anchor in 1u32..=2, n in 0usize..=6) {
                let s = TruncatedShift::golden_mean();
                let a = Word::from([anchor]);
                for pre in s.preimage_words(&a, n, DEFAULT_WORD_CAP).unwrap() {
                    prop_assert!(s.is_admissible(pre.concat(&a).letters()));
                }
            }

            #[test]
            fn full_truncations_need_only_empty_connector(m in 1usize..=6) {
                let s = TruncatedShift::full(m).unwrap();
                prop_assert_eq!(
                    s.check_finitely_irreducible(1),
                    Irreducibility::Connected { witnesses: vec![Word::empty()] }
                );
            }
        }

        #[test]
        fn golden_counts_follow_fibonacci() {
            let s = TruncatedShift::golden_mean();
            for n in 3..=12 {
                let c = |k| s.enumerate_words(k, DEFAULT_WORD_CAP).unwrap().len();
                assert_eq!(c(n), c(n - 1) + c(n - 2));
            }
        }
    }
}
