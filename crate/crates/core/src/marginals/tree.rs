//! Streaming enumeration of observed patterns of a tree Markov measure on a
//! finite subtree of the right Cayley graph, with hidden vertices summed out.
//!
//! Vertices are visited in preorder. Each vertex on the active path keeps
//! `inc` (the law of its state given everything observed outside its subtree,
//! unnormalized) and `phi` (the likelihood of what has been observed inside
//! its subtree so far). `Σ inc·phi` at the top of the path is the probability
//! of the observed prefix, so dead prefixes are pruned immediately. The last
//! few child subtrees of a vertex on the rightmost path are handled in one
//! step through a precomputed likelihood table.

use crate::error::{Error, Result};
use crate::numeric::Weight;
use crate::reduce::{map_ordered, ExecPolicy};
use crate::systems::MarkovSpec;
use crate::word::Word;

/// Receives `(pattern, probability)` pairs.
pub(crate) trait PatternSink<W>: Send + Sized {
    /// Whether `accept` reads the pattern; if not, it may be stale.
    const NEEDS_PATTERN: bool;
    fn accept(&mut self, pattern: &[u8], p: &W);
    fn fresh(&self) -> Self;
    fn merge(&mut self, other: Self);
}

/// Largest number of suffix label combinations tabulated up front.
const TABLE_CAP: usize = 4096;

/// Minimum number of parallel chunks to aim for.
const CHUNK_TARGET: usize = 256;

#[derive(Clone, Debug)]
struct Node {
    parent: usize,
    letter: usize,
    pos: Option<usize>,
    children: Vec<usize>,
}

pub(crate) struct TreeModel<W> {
    n: usize,
    pi: Vec<W>,
    trans: Vec<Vec<W>>,
    /// Indicator vector of each observed label over inner states.
    ind: Vec<Vec<W>>,
    labels: Vec<u8>,
    ones: Vec<W>,
    nodes: Vec<Node>,
    /// Preorder index where the tabulated suffix starts.
    split: usize,
    /// Vertex whose trailing children form the suffix.
    anchor: usize,
    suffix_pos: Vec<usize>,
    /// Label combinations of the suffix, row-major by combination.
    combos: Vec<u8>,
    /// Likelihood of each combination given the anchor state.
    table: Vec<Vec<W>>,
    prefix_obs: usize,
    width: usize,
}

impl<W: Weight> TreeModel<W> {
    /// `emit[x]` is the observed label of inner state `x`, already offset
    /// into the pattern alphabet. `support` must be sorted and is the set of
    /// observed positions; hidden vertices of its hull are summed out.
    pub(crate) fn new(
        markov: &MarkovSpec,
        emit: &[u8],
        support: &[Word],
        scale: &W,
        cap: u64,
    ) -> Result<Self> {
        let n = markov.states().len();
        let pi: Vec<W> = markov
            .stationary
            .probs
            .iter()
            .map(|q| W::from_rational(q).mul(scale))
            .collect();
        let trans: Vec<Vec<W>> = markov
            .transitions
            .iter()
            .map(|m| m.iter().flatten().map(W::from_rational).collect())
            .collect();
        let mut labels: Vec<u8> = emit.to_vec();
        labels.sort_unstable();
        labels.dedup();
        let ind = labels
            .iter()
            .map(|&y| {
                emit.iter()
                    .map(|&e| if e == y { W::one() } else { W::zero() })
                    .collect()
            })
            .collect();

        let observed = support.len() as u32;
        let needed = (labels.len() as u64).checked_pow(observed).unwrap_or(u64::MAX);
        if needed > cap {
            return Err(Error::cap(
                "pattern enumeration",
                format!("{}^{}", labels.len(), observed),
                cap,
            ));
        }

        let nodes = preorder(support);
        let mut model = TreeModel {
            n,
            pi,
            trans,
            ind,
            labels,
            ones: vec![W::one(); n],
            nodes,
            split: 0,
            anchor: 0,
            suffix_pos: Vec::new(),
            combos: Vec::new(),
            table: Vec::new(),
            prefix_obs: 0,
            width: support.len(),
        };
        model.choose_suffix();
        model.build_table();
        Ok(model)
    }

    fn observed_in(&self, range: std::ops::Range<usize>) -> usize {
        self.nodes[range].iter().filter(|n| n.pos.is_some()).count()
    }

    fn choose_suffix(&mut self) {
        let total = self.nodes.len();
        let nl = self.labels.len().max(1);
        let fits = |m: usize| nl.checked_pow(m as u32).is_some_and(|c| c <= TABLE_CAP);
        let mut q = 0;
        let (mut split, mut anchor) = (total, 0);
        'walk: loop {
            let kids = self.nodes[q].children.clone();
            for j in (1..=kids.len()).rev() {
                let start = kids[kids.len() - j];
                if fits(self.observed_in(start..total)) {
                    split = start;
                    anchor = q;
                    break 'walk;
                }
            }
            match kids.last() {
                Some(&last) => q = last,
                None => break,
            }
        }
        self.split = split;
        self.anchor = anchor;
        self.prefix_obs = self.observed_in(0..split);
        self.suffix_pos = self.nodes[split..].iter().filter_map(|n| n.pos).collect();
    }

    fn mat_vec(&self, letter: usize, v: &[W]) -> Vec<W> {
        // (P v)(x) = Σ_y P(x, y) v(y)
        let p = &self.trans[letter];
        (0..self.n)
            .map(|x| {
                let mut s = W::zero();
                for (y, vy) in v.iter().enumerate() {
                    let pxy = &p[x * self.n + y];
                    if !pxy.is_zero() && !vy.is_zero() {
                        s = s.add(&pxy.mul(vy));
                    }
                }
                s
            })
            .collect()
    }

    fn vec_mat(&self, letter: usize, v: &[W]) -> Vec<W> {
        // (v P)(y) = Σ_x v(x) P(x, y)
        let p = &self.trans[letter];
        let mut out = vec![W::zero(); self.n];
        for (x, vx) in v.iter().enumerate() {
            if vx.is_zero() {
                continue;
            }
            for (y, o) in out.iter_mut().enumerate() {
                let pxy = &p[x * self.n + y];
                if !pxy.is_zero() {
                    *o = o.add(&vx.mul(pxy));
                }
            }
        }
        out
    }

    fn build_table(&mut self) {
        let m = self.suffix_pos.len();
        let nl = self.labels.len();
        let count = nl.pow(m as u32);
        let roots: Vec<usize> = self.nodes[self.anchor]
            .children
            .iter()
            .copied()
            .filter(|&c| c >= self.split)
            .collect();
        let mut combos = Vec::with_capacity(count * m);
        let mut table = Vec::with_capacity(count);
        let mut digits = vec![0usize; m];
        for _ in 0..count {
            combos.extend(digits.iter().map(|&d| self.labels[d]));
            let mut slot = 0;
            let mut lik = self.ones.clone();
            for &r in &roots {
                let v = self.subtree_likelihood(r, &digits, &mut slot);
                let msg = self.mat_vec(self.nodes[r].letter, &v);
                for (a, b) in lik.iter_mut().zip(&msg) {
                    *a = a.mul(b);
                }
            }
            table.push(lik);
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < nl {
                    break;
                }
                *d = 0;
            }
        }
        self.combos = combos;
        self.table = table;
    }

    /// Likelihood of the labels `digits[slot..]` (preorder) on the subtree at `v`.
    fn subtree_likelihood(&self, v: usize, digits: &[usize], slot: &mut usize) -> Vec<W> {
        let mut lik = match self.nodes[v].pos {
            Some(_) => {
                let d = digits[*slot];
                *slot += 1;
                self.ind[d].clone()
            }
            None => self.ones.clone(),
        };
        for &c in &self.nodes[v].children {
            let child = self.subtree_likelihood(c, digits, slot);
            let msg = self.mat_vec(self.nodes[c].letter, &child);
            for (a, b) in lik.iter_mut().zip(&msg) {
                *a = a.mul(b);
            }
        }
        lik
    }

    /// Number of prefix vertices fixed per parallel chunk.
    fn chunk_depth(&self) -> usize {
        let nl = self.labels.len().max(2);
        let mut d = 0;
        while d < self.prefix_obs && nl.pow(d as u32) < CHUNK_TARGET {
            d += 1;
        }
        d
    }

    /// Streams every pattern of positive probability into `sink`.
    pub(crate) fn run<S: PatternSink<W>>(&self, policy: ExecPolicy, sink: S) -> S {
        let d = self.chunk_depth();
        let nl = self.labels.len();
        let chunks: Vec<Vec<u8>> = (0..nl.pow(d as u32))
            .map(|mut c| {
                let mut fixed = vec![0u8; d];
                for f in fixed.iter_mut().rev() {
                    *f = self.labels[c % nl];
                    c /= nl;
                }
                fixed
            })
            .collect();
        let jobs: Vec<(Vec<u8>, S)> = chunks.into_iter().map(|f| (f, sink.fresh())).collect();
        let parts = map_ordered(policy, jobs, |(fixed, mut s)| {
            let mut walk = Walk::new(self, &fixed);
            walk.descend(0, 0, &mut s);
            s
        });
        let mut out = sink;
        for p in parts {
            out.merge(p);
        }
        out
    }
}

struct Frame<W> {
    node: usize,
    inc: Vec<W>,
    phi: Vec<W>,
}

impl<W: Clone> Clone for Frame<W> {
    fn clone(&self) -> Self {
        Frame {
            node: self.node,
            inc: self.inc.clone(),
            phi: self.phi.clone(),
        }
    }

    fn clone_from(&mut self, src: &Self) {
        self.node = src.node;
        self.inc.clone_from(&src.inc);
        self.phi.clone_from(&src.phi);
    }
}

struct Walk<'a, W> {
    model: &'a TreeModel<W>,
    fixed: &'a [u8],
    /// One path stack per preorder level, reused across siblings.
    levels: Vec<Vec<Frame<W>>>,
    pattern: Vec<u8>,
}

impl<'a, W: Weight> Walk<'a, W> {
    fn new(model: &'a TreeModel<W>, fixed: &'a [u8]) -> Self {
        Walk {
            model,
            fixed,
            levels: (0..=model.split).map(|_| Vec::new()).collect(),
            pattern: vec![0; model.width],
        }
    }

    fn pop_into_parent(model: &TreeModel<W>, stack: &mut Vec<Frame<W>>) {
        let top = stack.pop().expect("non-empty path");
        let msg = model.mat_vec(model.nodes[top.node].letter, &top.phi);
        let parent = stack.last_mut().expect("parent on path");
        for (a, b) in parent.phi.iter_mut().zip(&msg) {
            *a = a.mul(b);
        }
    }

    fn mass(frame: &Frame<W>) -> W {
        frame
            .inc
            .iter()
            .zip(&frame.phi)
            .fold(W::zero(), |s, (a, b)| if a.is_zero() || b.is_zero() { s } else { s.add(&a.mul(b)) })
    }

    /// Assigns preorder vertex `k` (the `obs`-th observed one) in every way.
    fn descend<S: PatternSink<W>>(&mut self, k: usize, obs: usize, sink: &mut S) {
        let model = self.model;
        if k == model.split {
            self.finish(sink);
            return;
        }
        let node = &model.nodes[k];
        // Path for vertex k: the previous level with completed subtrees popped.
        let mut base = std::mem::take(&mut self.levels[k]);
        if k == 0 {
            base.clear();
        } else {
            let prev = &self.levels[k - 1];
            base.truncate(prev.len());
            for (i, f) in prev.iter().enumerate() {
                if i < base.len() {
                    base[i].clone_from(f);
                } else {
                    base.push(f.clone());
                }
            }
            while base.last().map(|f| f.node) != Some(node.parent) {
                Self::pop_into_parent(model, &mut base);
            }
        }
        let inc = match base.last() {
            None => model.pi.clone(),
            Some(parent) => {
                let d: Vec<W> = parent.inc.iter().zip(&parent.phi).map(|(a, b)| a.mul(b)).collect();
                model.vec_mat(node.letter, &d)
            }
        };
        base.push(Frame {
            node: k,
            inc,
            phi: Vec::new(),
        });
        match node.pos {
            None => {
                base.last_mut().unwrap().phi = model.ones.clone();
                self.levels[k] = base;
                self.descend(k + 1, obs, sink);
            }
            Some(pos) => {
                self.levels[k] = base;
                for (li, &y) in model.labels.iter().enumerate() {
                    if obs < self.fixed.len() && self.fixed[obs] != y {
                        continue;
                    }
                    {
                        let top = self.levels[k].last_mut().unwrap();
                        top.phi.clone_from(&model.ind[li]);
                        if Self::mass(top).is_zero() {
                            continue;
                        }
                    }
                    self.pattern[pos] = y;
                    self.descend(k + 1, obs + 1, sink);
                }
            }
        }
    }

    fn finish<S: PatternSink<W>>(&mut self, sink: &mut S) {
        let model = self.model;
        let mut stack = if model.split == 0 {
            Vec::new()
        } else {
            self.levels[model.split - 1].clone()
        };
        while stack.len() > 1 && stack.last().map(|f| f.node) != Some(model.anchor) {
            Self::pop_into_parent(model, &mut stack);
        }
        let top = stack.last().expect("root assigned");
        let r: Vec<W> = top.inc.iter().zip(&top.phi).map(|(a, b)| a.mul(b)).collect();
        let m = model.suffix_pos.len();
        for (c, lik) in model.table.iter().enumerate() {
            let mut p = W::zero();
            for (a, b) in r.iter().zip(lik) {
                if !a.is_zero() && !b.is_zero() {
                    p = p.add(&a.mul(b));
                }
            }
            if p.is_zero() {
                continue;
            }
            if S::NEEDS_PATTERN {
                for (i, &pos) in model.suffix_pos.iter().enumerate() {
                    self.pattern[pos] = model.combos[c * m + i];
                }
            }
            sink.accept(&self.pattern, &p);
        }
    }
}

/// Preorder of the hull of `support`; larger subtrees are visited first so
/// the trailing subtrees are small enough to tabulate.
fn preorder(support: &[Word]) -> Vec<Node> {
    let hull = crate::word::prefix_hull(support);
    let pos_of = |w: &Word| support.binary_search(w).ok();
    let index: std::collections::HashMap<&Word, usize> =
        hull.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); hull.len()];
    for (i, w) in hull.iter().enumerate().skip(1) {
        let p = w.prefix_parent().expect("non-root has a prefix");
        kids[index[&p]].push(i);
    }
    fn size(v: usize, kids: &[Vec<usize>]) -> usize {
        1 + kids[v].iter().map(|&c| size(c, kids)).sum::<usize>()
    }
    for v in 0..hull.len() {
        let mut ch = std::mem::take(&mut kids[v]);
        ch.sort_by_key(|&c| std::cmp::Reverse(size(c, &kids)));
        kids[v] = ch;
    }
    let mut out: Vec<Node> = Vec::with_capacity(hull.len());
    // (hull index, parent preorder index)
    let mut stack = vec![(0usize, usize::MAX)];
    while let Some((h, parent)) = stack.pop() {
        let me = out.len();
        let letter = hull[h].last().map_or(0, |l| l.index());
        out.push(Node {
            parent,
            letter,
            pos: pos_of(&hull[h]),
            children: Vec::new(),
        });
        if parent != usize::MAX {
            out[parent].children.push(me);
        }
        for &c in kids[h].iter().rev() {
            stack.push((c, me));
        }
    }
    out
}
