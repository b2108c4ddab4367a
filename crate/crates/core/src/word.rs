//! Reduced words in the free group of rank `r`, the length-then-lexicographic
//! well-ordering, balls and spheres, and Cayley-tree geometry.
//!
//! Letters are indexed `0..2r` as `s_1, s_1⁻¹, s_2, s_2⁻¹, …`; the inverse of
//! a letter flips the low bit. Words print over `a, A, b, B, …` with the
//! capital letter standing for the inverse generator, and `e` for the
//! identity.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One of the `2r` letters `s_i^{±1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub const fn from_index(index: u8) -> Self {
        Letter(index)
    }

    /// `s_{generator+1}` or its inverse.
    pub const fn generator(generator: usize, inverse: bool) -> Self {
        Letter((generator as u8) << 1 | inverse as u8)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub const fn generator_index(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub const fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub const fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn to_char(self) -> char {
        let c = (b'a' + self.generator_index() as u8) as char;
        if self.is_inverse() {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        if c.is_ascii_lowercase() {
            Some(Letter::generator((c as u8 - b'a') as usize, false))
        } else if c.is_ascii_uppercase() {
            Some(Letter::generator((c as u8 - b'A') as usize, true))
        } else {
            None
        }
    }

    /// All `2r` letters in index order.
    pub fn all(rank: usize) -> impl Iterator<Item = Letter> {
        (0..2 * rank as u8).map(Letter)
    }

    /// The free generators `s_1, …, s_r`.
    pub fn generators(rank: usize) -> impl Iterator<Item = Letter> {
        (0..rank).map(|i| Letter::generator(i, false))
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A reduced word. The derived-by-hand `Ord` is the canonical shortlex order
/// (shorter first, then lexicographic in letter index).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    /// Freely reduces the given letter sequence.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Largest generator index used plus one.
    pub fn min_rank(&self) -> usize {
        self.0.iter().map(|l| l.generator_index() + 1).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn multiply(&self, other: &Word) -> Word {
        let mut k = 0;
        let (a, b) = (&self.0, &other.0);
        while k < a.len() && k < b.len() && a[a.len() - 1 - k] == b[k].inverse() {
            k += 1;
        }
        let mut out = Vec::with_capacity(a.len() + b.len() - 2 * k);
        out.extend_from_slice(&a[..a.len() - k]);
        out.extend_from_slice(&b[k..]);
        Word(out)
    }

    /// `s · self` for a single letter.
    pub fn left_mul(&self, s: Letter) -> Word {
        if self.0.first() == Some(&s.inverse()) {
            Word(self.0[1..].to_vec())
        } else {
            let mut out = Vec::with_capacity(self.0.len() + 1);
            out.push(s);
            out.extend_from_slice(&self.0);
            Word(out)
        }
    }

    /// `self · s` for a single letter.
    pub fn right_mul(&self, s: Letter) -> Word {
        let mut out = self.0.clone();
        if out.last() == Some(&s.inverse()) {
            out.pop();
        } else {
            out.push(s);
        }
        Word(out)
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.multiply(&base);
        }
        out
    }

    /// The leftmost letter `s` and `s⁻¹·self`; `(s⁻¹g, g)` is an edge of the
    /// left Cayley graph.
    pub fn parent(&self) -> Result<(Letter, Word)> {
        match self.0.split_first() {
            Some((&s, rest)) => Ok((s, Word(rest.to_vec()))),
            None => Err(Error::IdentityInput),
        }
    }

    /// The word with its last letter removed; `(p, p·s)` is an edge of the
    /// right Cayley graph, the tree along which Markov measures factor.
    pub fn prefix_parent(&self) -> Option<Word> {
        if self.0.is_empty() {
            None
        } else {
            Some(Word(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// Vertices of the reduced path from `self` to `target` in the left
    /// Cayley graph; consecutive vertices differ by one letter on the left.
    pub fn geodesic(&self, target: &Word) -> Vec<Word> {
        let step = target.multiply(&self.inverse());
        let mut path = Vec::with_capacity(step.len() + 1);
        let mut cur = self.clone();
        path.push(cur.clone());
        for &l in step.0.iter().rev() {
            cur = cur.left_mul(l);
            path.push(cur.clone());
        }
        path
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Word> {
        let s = s.trim();
        if s == "e" || s == "1" || s.is_empty() {
            return Ok(Word::identity());
        }
        let letters = s
            .chars()
            .map(|c| Letter::from_char(c).ok_or_else(|| Error::InvalidWord(s.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Word::from_letters(letters))
    }
}

/// Total order on `S ∪ S⁻¹` used to break ties between words of equal length.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum LetterOrder {
    /// `s_1 < s_1⁻¹ < s_2 < s_2⁻¹ < …`
    #[default]
    Canonical,
    /// `position[letter.index()]` is the rank of the letter in the order.
    Custom(Vec<u8>),
}

impl LetterOrder {
    /// Parses an order such as `"bBaA"`: every letter of the given rank must
    /// appear exactly once.
    pub fn parse(spec: &str, rank: usize) -> Result<Self> {
        let letters: Vec<Letter> = spec
            .chars()
            .map(|c| Letter::from_char(c).ok_or_else(|| Error::InvalidWord(spec.to_string())))
            .collect::<Result<_>>()?;
        Self::from_sequence(&letters, rank)
    }

    pub fn from_sequence(letters: &[Letter], rank: usize) -> Result<Self> {
        if letters.len() != 2 * rank {
            return Err(Error::InvalidWord(format!(
                "letter order must list all {} letters, got {}",
                2 * rank,
                letters.len()
            )));
        }
        let mut position = vec![u8::MAX; 2 * rank];
        for (pos, l) in letters.iter().enumerate() {
            if l.index() >= 2 * rank || position[l.index()] != u8::MAX {
                return Err(Error::InvalidWord(format!("bad letter order at {l}")));
            }
            position[l.index()] = pos as u8;
        }
        Ok(LetterOrder::Custom(position))
    }

    fn key(&self, l: Letter) -> u8 {
        match self {
            LetterOrder::Canonical => l.0,
            LetterOrder::Custom(p) => p.get(l.index()).copied().unwrap_or(l.0),
        }
    }

    /// Letters of the given rank, ascending in this order.
    pub fn letters(&self, rank: usize) -> Vec<Letter> {
        let mut v: Vec<Letter> = Letter::all(rank).collect();
        v.sort_by_key(|&l| self.key(l));
        v
    }

    pub fn compare(&self, g: &Word, h: &Word) -> Ordering {
        match self {
            LetterOrder::Canonical => g.cmp(h),
            LetterOrder::Custom(_) => g.len().cmp(&h.len()).then_with(|| {
                g.0.iter()
                    .map(|&l| self.key(l))
                    .cmp(h.0.iter().map(|&l| self.key(l)))
            }),
        }
    }

    pub fn describe(&self, rank: usize) -> String {
        self.letters(rank).iter().map(|l| l.to_char()).collect()
    }
}

/// `|B_n|` for rank `r`: `1 + 2r((2r-1)^n - 1)/(2r-2)`, or `2n+1` when `r = 1`.
pub fn ball_size(rank: usize, radius: usize) -> u128 {
    if rank == 0 {
        return 1;
    }
    let mut total: u128 = 1;
    let mut sphere: u128 = 2 * rank as u128;
    for _ in 0..radius {
        total = total.saturating_add(sphere);
        sphere = sphere.saturating_mul(2 * rank as u128 - 1);
    }
    total
}

/// Words of length at most `radius`, sorted by the chosen order.
#[derive(Clone, Debug)]
pub struct OrderedBall {
    rank: usize,
    radius: usize,
    order: LetterOrder,
    elements: Vec<Word>,
    index: HashMap<Word, usize>,
    sphere_start: Vec<usize>,
}

impl OrderedBall {
    pub fn new(rank: usize, radius: usize, order: &LetterOrder, cap: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidWord("rank must be at least 1".into()));
        }
        let size = ball_size(rank, radius);
        if size > cap as u128 {
            return Err(Error::cap("ball", size, cap));
        }
        let letters = order.letters(rank);
        let mut elements = Vec::with_capacity(size as usize);
        let mut sphere_start = vec![0];
        elements.push(Word::identity());
        let mut prev = 0..1;
        for _ in 0..radius {
            sphere_start.push(elements.len());
            let start = elements.len();
            for i in prev.clone() {
                let w = elements[i].clone();
                for &l in &letters {
                    if w.last() != Some(l.inverse()) {
                        let mut v = w.0.clone();
                        v.push(l);
                        elements.push(Word(v));
                    }
                }
            }
            prev = start..elements.len();
        }
        sphere_start.push(elements.len());
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(OrderedBall {
            rank,
            radius,
            order: order.clone(),
            elements,
            index,
            sphere_start,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn order(&self) -> &LetterOrder {
        &self.order
    }

    pub fn elements(&self) -> &[Word] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `B_n` as a prefix of the ordered elements.
    pub fn ball(&self, n: usize) -> &[Word] {
        &self.elements[..self.sphere_start[n.min(self.radius) + 1]]
    }

    /// `S_n` as a contiguous slice.
    pub fn sphere(&self, n: usize) -> &[Word] {
        let n = n.min(self.radius);
        &self.elements[self.sphere_start[n]..self.sphere_start[n + 1]]
    }

    pub fn position(&self, g: &Word) -> Option<usize> {
        self.index.get(g).copied()
    }

    /// `Pre(g)`, the elements strictly preceding `g`.
    pub fn pre(&self, g: &Word) -> Option<&[Word]> {
        self.position(g).map(|p| &self.elements[..p])
    }
}

/// The smallest subtree of the right Cayley graph containing `set`: every
/// prefix of every element, together with the identity.
pub fn prefix_hull(set: &[Word]) -> Vec<Word> {
    if set.is_empty() {
        return Vec::new();
    }
    let mut out: BTreeSet<Word> = BTreeSet::new();
    for w in set {
        for k in 0..=w.len() {
            out.insert(Word(w.0[..k].to_vec()));
        }
    }
    // Drop the part of the hull above the common root when the set avoids 1.
    let mut hull: Vec<Word> = out.into_iter().collect();
    loop {
        let roots: Vec<&Word> = hull.iter().filter(|w| w.len() == hull[0].len()).collect();
        if roots.len() != 1 || set.contains(roots[0]) {
            break;
        }
        let root = roots[0].clone();
        let children = hull
            .iter()
            .filter(|w| w.prefix_parent().as_ref() == Some(&root))
            .count();
        if children != 1 {
            break;
        }
        hull.retain(|w| *w != root);
    }
    hull
}

/// Whether `set` spans a connected subtree of the right Cayley graph: exactly
/// one element (the root) has no right neighbour one step closer to `1`
/// inside the set.
pub fn is_tree_connected(set: &[Word]) -> bool {
    if set.is_empty() {
        return true;
    }
    let members: std::collections::HashSet<&Word> = set.iter().collect();
    let roots = set
        .iter()
        .filter(|w| match w.prefix_parent() {
            None => true,
            Some(p) => !members.contains(&p),
        })
        .count();
    roots == 1
}

/// Formats a set as `{e, a, A, …}`.
pub fn format_set(set: &[Word]) -> String {
    let parts: Vec<String> = set.iter().map(|w| w.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn multiply_cancels() {
        assert_eq!(w("a").multiply(&w("A")), Word::identity());
        assert_eq!(w("ab").multiply(&w("Ba")), w("aa"));
        assert_eq!(w("abA").len(), 3);
        assert_eq!(w("aA").len(), 0);
    }

    #[test]
    fn compare_examples() {
        let o = LetterOrder::Canonical;
        assert_eq!(o.compare(&w("a"), &w("b")), Ordering::Less);
        assert_eq!(o.compare(&w("a"), &w("A")), Ordering::Less);
        assert_eq!(o.compare(&w("A"), &w("b")), Ordering::Less);
        assert_eq!(o.compare(&Word::identity(), &w("a")), Ordering::Less);
        assert_eq!(o.compare(&w("aa"), &w("b")), Ordering::Greater);
    }

    #[test]
    fn ball_sizes_match_bfs() {
        // BFS over the Cayley graph as an independent count.
        for rank in 1..=3 {
            let mut seen: BTreeSet<Word> = BTreeSet::new();
            let mut frontier = vec![Word::identity()];
            seen.insert(Word::identity());
            for n in 0..=4usize {
                let ball = OrderedBall::new(rank, n, &LetterOrder::Canonical, 1 << 20).unwrap();
                assert_eq!(ball.len(), seen.len(), "rank {rank} radius {n}");
                assert_eq!(ball.len() as u128, ball_size(rank, n));
                let mut next = Vec::new();
                for g in &frontier {
                    for s in Letter::all(rank) {
                        let h = g.left_mul(s);
                        if seen.insert(h.clone()) {
                            next.push(h);
                        }
                    }
                }
                frontier = next;
            }
        }
        let sizes: Vec<usize> = (0..4)
            .map(|n| OrderedBall::new(2, n, &LetterOrder::Canonical, 1000).unwrap().len())
            .collect();
        assert_eq!(sizes, vec![1, 5, 17, 53]);
        assert_eq!(OrderedBall::new(1, 5, &LetterOrder::Canonical, 100).unwrap().len(), 11);
    }

    #[test]
    fn ball_is_sorted_and_pre_matches_filter() {
        for order in [LetterOrder::Canonical, LetterOrder::parse("BbAa", 2).unwrap()] {
            let ball = OrderedBall::new(2, 3, &order, 1000).unwrap();
            for pair in ball.elements().windows(2) {
                assert_eq!(order.compare(&pair[0], &pair[1]), Ordering::Less);
            }
            for g in ball.ball(2) {
                let filtered: Vec<&Word> = ball
                    .ball(g.len())
                    .iter()
                    .filter(|h| order.compare(h, g) == Ordering::Less)
                    .collect();
                let pre: Vec<&Word> = ball.pre(g).unwrap().iter().collect();
                assert_eq!(pre, filtered);
            }
        }
    }

    #[test]
    fn pre_of_ab() {
        let ball = OrderedBall::new(2, 2, &LetterOrder::Canonical, 100).unwrap();
        let pre: Vec<String> = ball.pre(&w("ab")).unwrap().iter().map(|g| g.to_string()).collect();
        assert_eq!(pre, vec!["e", "a", "A", "b", "B", "aa"]);
    }

    #[test]
    fn parent_strips_leftmost() {
        assert_eq!(w("ab").parent().unwrap(), (Letter::from_char('a').unwrap(), w("b")));
        assert_eq!(w("a").parent().unwrap().1, Word::identity());
        assert_eq!(w("Ba").parent().unwrap(), (Letter::from_char('B').unwrap(), w("a")));
        assert!(matches!(Word::identity().parent(), Err(Error::IdentityInput)));
    }

    #[test]
    fn geodesics() {
        assert_eq!(Word::identity().geodesic(&w("ab")), vec![w("e"), w("b"), w("ab")]);
        assert_eq!(w("ab").geodesic(&w("ab")), vec![w("ab")]);
        assert_eq!(w("a").geodesic(&w("b")), vec![w("a"), w("e"), w("b")]);
        for path in [w("a").geodesic(&w("b")), w("aB").geodesic(&w("bbA"))] {
            for pair in path.windows(2) {
                let step = pair[1].multiply(&pair[0].inverse());
                assert_eq!(step.len(), 1);
            }
        }
    }

    #[test]
    fn sphere_adjacency() {
        let ball = OrderedBall::new(3, 4, &LetterOrder::Canonical, 10000).unwrap();
        for n in 1..4 {
            for g in ball.sphere(n) {
                let up = Letter::all(3).filter(|&s| g.left_mul(s).len() == n + 1).count();
                assert_eq!(up, 5);
            }
        }
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(Word::identity().to_string(), "e");
        assert_eq!(w("abBa"), w("aa"));
        assert_eq!(w("aBc").to_string(), "aBc");
        assert!("a1".parse::<Word>().is_err());
    }

    #[test]
    fn hull_and_connectivity() {
        assert!(is_tree_connected(&[w("e"), w("a"), w("ab")]));
        assert!(!is_tree_connected(&[w("e"), w("ab")]));
        assert!(is_tree_connected(&[w("A"), w("AA"), w("AAA")]));
        assert_eq!(prefix_hull(&[w("e"), w("ab")]), vec![w("e"), w("a"), w("ab")]);
        assert_eq!(prefix_hull(&[w("ab"), w("aB")]), vec![w("a"), w("ab"), w("aB")]);
        assert_eq!(prefix_hull(&[w("A"), w("AA")]), vec![w("A"), w("AA")]);
        let ball = OrderedBall::new(2, 3, &LetterOrder::Canonical, 1000).unwrap();
        for g in ball.elements() {
            let mut f: Vec<Word> = ball.pre(g).unwrap().to_vec();
            f.push(g.clone());
            assert!(is_tree_connected(&f));
        }
    }

    #[test]
    fn custom_order_letters() {
        let o = LetterOrder::parse("bBaA", 2).unwrap();
        assert_eq!(o.describe(2), "bBaA");
        assert!(LetterOrder::parse("bBa", 2).is_err());
        assert!(LetterOrder::parse("bBaa", 2).is_err());
    }
}
