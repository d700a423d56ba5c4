//! Acceptance of ultimately periodic words.

use super::{label_holds, BuchiAutomaton};
use crate::words::{letter_to_valuation, LassoWords, Letter};

/// Decides whether `prefix · cycle^ω` is accepted, by an SCC search in the
/// product of `ba` with the positions of the lasso.
pub fn accepts_lasso(ba: &BuchiAutomaton, prefix: &[Vec<bool>], cycle: &[Vec<bool>]) -> bool {
    assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
    let len = prefix.len() + cycle.len();
    let letter = |i: usize| if i < prefix.len() { &prefix[i] } else { &cycle[i - prefix.len()] };
    let succ_pos = |i: usize| if i + 1 < len { i + 1 } else { prefix.len() };
    let n = ba.state_count();
    let total = n * len;
    let mut graph: Vec<Vec<usize>> = vec![Vec::new(); total];
    let mut reach = vec![false; total];
    let start = ba.initial * len;
    reach[start] = true;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        let (q, i) = (v / len, v % len);
        let j = succ_pos(i);
        for (label, r) in &ba.edges[q] {
            if label_holds(label, letter(i)) {
                let u = r * len + j;
                graph[v].push(u);
                if !reach[u] {
                    reach[u] = true;
                    stack.push(u);
                }
            }
        }
    }
    crate::scc::tarjan(total, |v| graph[v].iter().copied(), |v| reach[v])
        .iter()
        .any(|comp| {
            (comp.len() > 1 || graph[comp[0]].contains(&comp[0]))
                && comp.iter().any(|&v| ba.accepting[v / len])
        })
}

/// Bitset form of a Büchi automaton for evaluating many lasso words over a
/// fixed small atom set. Results agree with [`accepts_lasso`].
#[derive(Debug, Clone)]
pub struct LassoEvaluator {
    states: usize,
    width: usize,
    /// `post[(letter * states + q) * width ..]`: successors of `q` on `letter`.
    post: Vec<u64>,
    accepting: Vec<u64>,
    initial: Vec<u64>,
    /// Only when `width == 1`: `pre_bytes[(letter * chunks + c) * 256 + b]` is
    /// the set of states with a successor among states `8c + bits(b)`.
    pre_bytes: Vec<u64>,
}

fn bit(set: &[u64], q: usize) -> bool {
    set[q / 64] >> (q % 64) & 1 == 1
}

fn set_bit(set: &mut [u64], q: usize) {
    set[q / 64] |= 1 << (q % 64);
}

fn intersects(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

impl LassoEvaluator {
    pub fn new(ba: &BuchiAutomaton, atoms: usize) -> Self {
        let states = ba.state_count();
        let width = states.div_ceil(64).max(1);
        let letters = 1usize << atoms;
        let mut post = vec![0u64; letters * states * width];
        for letter in 0..letters {
            let val = letter_to_valuation(letter, atoms);
            for q in 0..states {
                let base = (letter * states + q) * width;
                for (label, r) in &ba.edges[q] {
                    if label_holds(label, &val) {
                        set_bit(&mut post[base..base + width], *r);
                    }
                }
            }
        }
        let mut accepting = vec![0u64; width];
        for q in 0..states {
            if ba.accepting[q] {
                set_bit(&mut accepting, q);
            }
        }
        let mut initial = vec![0u64; width];
        set_bit(&mut initial, ba.initial);
        let mut pre_bytes = Vec::new();
        if width == 1 {
            let chunks = states.div_ceil(8);
            pre_bytes = vec![0u64; letters * chunks * 256];
            for letter in 0..letters {
                let mut rev = vec![0u64; states];
                for q in 0..states {
                    let mut s = post[letter * states + q];
                    while s != 0 {
                        rev[s.trailing_zeros() as usize] |= 1 << q;
                        s &= s - 1;
                    }
                }
                for c in 0..chunks {
                    let table = &mut pre_bytes[(letter * chunks + c) * 256..(letter * chunks + c + 1) * 256];
                    for b in 1..256usize {
                        let low = b.trailing_zeros() as usize;
                        let r = 8 * c + low;
                        table[b] = table[b & (b - 1)] | if r < states { rev[r] } else { 0 };
                    }
                }
            }
        }
        LassoEvaluator {
            states,
            width,
            post,
            accepting,
            initial,
            pre_bytes,
        }
    }

    fn post_of(&self, letter: Letter, q: usize) -> &[u64] {
        let base = (letter * self.states + q) * self.width;
        &self.post[base..base + self.width]
    }

    fn image(&self, set: &[u64], letter: Letter, out: &mut [u64]) {
        out.fill(0);
        for q in 0..self.states {
            if bit(set, q) {
                for (o, s) in out.iter_mut().zip(self.post_of(letter, q)) {
                    *o |= s;
                }
            }
        }
    }

    /// For each position `i` of `cycle`, the states from which the automaton
    /// accepts `(cycle[i..] cycle[..i])^ω`; flat, `width` words per position.
    /// Emerson-Lei fixpoint `νZ. μY. pre(Y) ∪ (Acc ∩ pre(Z))` on the cycle product.
    pub fn cycle_acceptors(&self, cycle: &[Letter]) -> Vec<u64> {
        if self.width == 1 {
            return self.cycle_acceptors_narrow(cycle);
        }
        let (len, w) = (cycle.len(), self.width);
        let mut z = vec![0u64; len * w];
        for i in 0..len {
            for q in 0..self.states {
                set_bit(&mut z[i * w..(i + 1) * w], q);
            }
        }
        loop {
            let mut y = vec![0u64; len * w];
            loop {
                let mut changed = false;
                for i in (0..len).rev() {
                    let j = (i + 1) % len;
                    for q in 0..self.states {
                        if bit(&y[i * w..(i + 1) * w], q) {
                            continue;
                        }
                        let s = self.post_of(cycle[i], q);
                        if intersects(s, &y[j * w..(j + 1) * w])
                            || (bit(&self.accepting, q) && intersects(s, &z[j * w..(j + 1) * w]))
                        {
                            set_bit(&mut y[i * w..(i + 1) * w], q);
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            if y == z {
                return z;
            }
            z = y;
        }
    }

    // Same fixpoint with one machine word per state set; `pre` goes through
    // per-letter lookup tables indexed by one byte of the target set.
    fn cycle_acceptors_narrow(&self, cycle: &[Letter]) -> Vec<u64> {
        let len = cycle.len();
        let chunks = self.states.div_ceil(8);
        let pre = |letter: Letter, set: u64| -> u64 {
            let table = &self.pre_bytes[letter * chunks * 256..];
            let mut out = 0;
            for c in 0..chunks {
                out |= table[c * 256 + (set >> (8 * c) & 0xff) as usize];
            }
            out
        };
        let acc = self.accepting[0];
        let mut z = vec![self.all_narrow(); len];
        let mut y = vec![0u64; len];
        let mut from_z = vec![0u64; len];
        loop {
            for i in 0..len {
                from_z[i] = acc & pre(cycle[i], z[(i + 1) % len]);
            }
            y.fill(0);
            loop {
                let mut changed = false;
                for i in (0..len).rev() {
                    let j = if i + 1 == len { 0 } else { i + 1 };
                    let n = y[i] | from_z[i] | pre(cycle[i], y[j]);
                    if n != y[i] {
                        y[i] = n;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            if y == z {
                return z;
            }
            std::mem::swap(&mut z, &mut y);
        }
    }

    fn all_narrow(&self) -> u64 {
        if self.states == 64 {
            u64::MAX
        } else {
            (1u64 << self.states) - 1
        }
    }

    pub fn accepts(&self, prefix: &[Letter], cycle: &[Letter]) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
        let mut cur = self.initial.clone();
        let mut next = vec![0u64; self.width];
        for &l in prefix {
            self.image(&cur, l, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        let acc = self.cycle_acceptors(cycle);
        intersects(&cur, &acc[..self.width])
    }

    /// Verdict for every word of `words`, in order.
    pub fn signature(&self, words: &LassoWords) -> Vec<bool> {
        let w = self.width;
        let mut reach = vec![0u64; words.prefixes.len() * w];
        reach[..w].copy_from_slice(&self.initial);
        let mut tmp = vec![0u64; w];
        for i in 1..words.prefixes.len() {
            let (p, l) = words.parent[i];
            self.image(&reach[p * w..(p + 1) * w], l, &mut tmp);
            reach[i * w..(i + 1) * w].copy_from_slice(&tmp);
        }
        let acc: Vec<Vec<u64>> = words.classes.iter().map(|c| self.cycle_acceptors(c)).collect();
        words
            .index
            .iter()
            .map(|&(p, c, r)| intersects(&reach[p * w..(p + 1) * w], &acc[c][r * w..(r + 1) * w]))
            .collect()
    }
}
