//! Ultimately periodic words `prefix · cycle^ω` over atom valuations.
//!
//! A letter is a bitmask: bit `i` set means atom `i` holds.

use std::collections::HashMap;

pub type Letter = usize;

pub fn letter_holds(letter: Letter, atom: usize) -> bool {
    letter >> atom & 1 == 1
}

pub fn letter_to_valuation(letter: Letter, atoms: usize) -> Vec<bool> {
    (0..atoms).map(|a| letter_holds(letter, a)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoWord {
    pub prefix: Vec<Letter>,
    pub cycle: Vec<Letter>,
}

impl LassoWord {
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn valuations(&self, atoms: usize) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
        let conv = |w: &[Letter]| w.iter().map(|&l| letter_to_valuation(l, atoms)).collect();
        (conv(&self.prefix), conv(&self.cycle))
    }
}

/// Every lasso word with `1 <= |cycle|` and `|prefix| + |cycle| <= max_len`,
/// plus the sharing structure batch evaluators use: a prefix trie and the
/// cycles grouped by rotation class of their primitive root.
#[derive(Debug, Clone)]
pub struct LassoWords {
    pub atoms: usize,
    pub words: Vec<LassoWord>,
    /// Prefix `i > 0` is prefix `parent[i].0` followed by letter `parent[i].1`.
    /// Parents come first; prefix 0 is empty.
    pub prefixes: Vec<Vec<Letter>>,
    pub parent: Vec<(usize, Letter)>,
    /// Lyndon words: primitive and minimal among their rotations.
    pub classes: Vec<Vec<Letter>>,
    /// Per word: prefix id, class id, and rotation `r` such that the cycle is a
    /// power of `class[r..] ++ class[..r]`.
    pub index: Vec<(usize, usize, usize)>,
}

fn primitive_root(w: &[Letter]) -> &[Letter] {
    let n = w.len();
    for d in 1..=n {
        if n.is_multiple_of(d) && (d..n).all(|i| w[i] == w[i - d]) {
            return &w[..d];
        }
    }
    w
}

fn rotate(w: &[Letter], r: usize) -> Vec<Letter> {
    w[r..].iter().chain(&w[..r]).copied().collect()
}

impl LassoWords {
    pub fn up_to(atoms: usize, max_len: usize) -> Self {
        let alphabet = 1usize << atoms;
        let mut prefixes = vec![Vec::new()];
        let mut parent = vec![(0, 0)];
        let mut prefix_id: HashMap<Vec<Letter>, usize> = HashMap::from([(Vec::new(), 0)]);
        let mut frontier = vec![0usize];
        for _ in 1..max_len {
            let mut next = Vec::new();
            for &p in &frontier {
                for l in 0..alphabet {
                    let mut w = prefixes[p].clone();
                    w.push(l);
                    let id = prefixes.len();
                    prefix_id.insert(w.clone(), id);
                    prefixes.push(w);
                    parent.push((p, l));
                    next.push(id);
                }
            }
            frontier = next;
        }

        let mut classes: Vec<Vec<Letter>> = Vec::new();
        let mut class_id: HashMap<Vec<Letter>, usize> = HashMap::new();
        let mut words = Vec::new();
        let mut index = Vec::new();
        for total in 1..=max_len {
            for plen in 0..total {
                let clen = total - plen;
                for code in 0..alphabet.pow(total as u32) {
                    let mut letters = Vec::with_capacity(total);
                    let mut c = code;
                    for _ in 0..total {
                        letters.push(c % alphabet);
                        c /= alphabet;
                    }
                    let cycle = letters.split_off(plen);
                    let prefix = letters;
                    debug_assert_eq!(cycle.len(), clen);
                    let root = primitive_root(&cycle);
                    let (r, lyn) = (0..root.len())
                        .map(|r| (r, rotate(root, r)))
                        .min_by(|a, b| a.1.cmp(&b.1))
                        .expect("non-empty cycle");
                    // root = rotate(lyn, (d - r) % d)
                    let d = root.len();
                    let rot = (d - r) % d;
                    let cid = *class_id.entry(lyn.clone()).or_insert_with(|| {
                        classes.push(lyn);
                        classes.len() - 1
                    });
                    index.push((prefix_id[&prefix], cid, rot));
                    words.push(LassoWord { prefix, cycle });
                }
            }
        }
        LassoWords {
            atoms,
            words,
            prefixes,
            parent,
            classes,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}
