//! Place/transition nets with weighted and inhibitor arcs.
//!
//! A [`Net`] is immutable once built. Markings are dense token vectors indexed
//! by place declaration order, so they hash and compare canonically.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Token count held by a single place.
pub type Tokens = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaceId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionId(pub usize);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("duplicate place `{0}`")]
    DuplicatePlace(String),
    #[error("duplicate transition `{0}`")]
    DuplicateTransition(String),
    #[error("duplicate arc between `{0}` and `{1}`")]
    DuplicateArc(String, String),
    #[error("arc between `{0}` and `{1}` has weight 0")]
    ZeroWeight(String, String),
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("token count overflow in place `{0}`")]
    TokenOverflow(String),
    #[error("marking has {got} entries, net has {expected} places")]
    MarkingSize { expected: usize, got: usize },
}

/// Token vector, one entry per place of the owning net.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(Vec<Tokens>);

impl Marking {
    pub fn new(tokens: Vec<Tokens>) -> Self {
        Marking(tokens)
    }

    pub fn zeros(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn tokens(&self) -> &[Tokens] {
        &self.0
    }

    pub fn get(&self, p: PlaceId) -> Tokens {
        self.0[p.0]
    }

    pub fn set(&mut self, p: PlaceId, n: Tokens) {
        self.0[p.0] = n;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u128 {
        self.0.iter().map(|&n| n as u128).sum()
    }

    pub fn into_inner(self) -> Vec<Tokens> {
        self.0
    }
}

impl From<Vec<Tokens>> for Marking {
    fn from(v: Vec<Tokens>) -> Self {
        Marking(v)
    }
}

/// One step of a trace: fire an enabled transition, or stutter at a deadlock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    Fire(TransitionId),
    Stutter,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct TransitionArcs {
    // (place, weight), sorted by place
    inputs: Vec<(PlaceId, Tokens)>,
    outputs: Vec<(PlaceId, Tokens)>,
    inhibitors: Vec<(PlaceId, Tokens)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    places: Vec<String>,
    transitions: Vec<String>,
    place_index: HashMap<String, PlaceId>,
    transition_index: HashMap<String, TransitionId>,
    arcs: Vec<TransitionArcs>,
    initial: Marking,
}

impl Net {
    pub fn builder() -> NetBuilder {
        NetBuilder::default()
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn places(&self) -> impl ExactSizeIterator<Item = PlaceId> {
        (0..self.places.len()).map(PlaceId)
    }

    pub fn transitions(&self) -> impl ExactSizeIterator<Item = TransitionId> {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.0]
    }

    pub fn transition_name(&self, t: TransitionId) -> &str {
        &self.transitions[t.0]
    }

    pub fn place(&self, name: &str) -> Result<PlaceId, NetError> {
        self.place_index
            .get(name)
            .copied()
            .ok_or_else(|| NetError::UnknownPlace(name.to_string()))
    }

    pub fn transition(&self, name: &str) -> Result<TransitionId, NetError> {
        self.transition_index
            .get(name)
            .copied()
            .ok_or_else(|| NetError::UnknownTransition(name.to_string()))
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn inputs(&self, t: TransitionId) -> &[(PlaceId, Tokens)] {
        &self.arcs[t.0].inputs
    }

    pub fn outputs(&self, t: TransitionId) -> &[(PlaceId, Tokens)] {
        &self.arcs[t.0].outputs
    }

    pub fn inhibitors(&self, t: TransitionId) -> &[(PlaceId, Tokens)] {
        &self.arcs[t.0].inhibitors
    }

    pub fn input_weight(&self, p: PlaceId, t: TransitionId) -> Tokens {
        lookup(&self.arcs[t.0].inputs, p)
    }

    pub fn output_weight(&self, t: TransitionId, p: PlaceId) -> Tokens {
        lookup(&self.arcs[t.0].outputs, p)
    }

    pub fn inhibitor_threshold(&self, p: PlaceId, t: TransitionId) -> Option<Tokens> {
        self.arcs[t.0]
            .inhibitors
            .binary_search_by_key(&p, |&(q, _)| q)
            .ok()
            .map(|i| self.arcs[t.0].inhibitors[i].1)
    }

    /// Net effect of firing `t` once on place `p` (output minus input weight).
    pub fn incidence(&self, p: PlaceId, t: TransitionId) -> i128 {
        self.output_weight(t, p) as i128 - self.input_weight(p, t) as i128
    }

    /// True if some transition deposits tokens into `p`.
    pub fn has_incoming(&self, p: PlaceId) -> bool {
        self.arcs.iter().any(|a| a.outputs.iter().any(|&(q, _)| q == p))
    }

    /// True if some transition consumes tokens from `p`.
    pub fn has_outgoing(&self, p: PlaceId) -> bool {
        self.arcs.iter().any(|a| a.inputs.iter().any(|&(q, _)| q == p))
    }

    pub fn check_marking(&self, m: &Marking) -> Result<(), NetError> {
        if m.len() != self.places.len() {
            return Err(NetError::MarkingSize {
                expected: self.places.len(),
                got: m.len(),
            });
        }
        Ok(())
    }

    /// Enabledness by index; `t` must belong to this net.
    pub fn is_enabled(&self, m: &Marking, t: TransitionId) -> bool {
        self.enabled_in(&m.0, t)
    }

    /// Enabledness on a raw token slice (one entry per place).
    pub fn enabled_in(&self, tokens: &[Tokens], t: TransitionId) -> bool {
        let arcs = &self.arcs[t.0];
        arcs.inputs.iter().all(|&(p, w)| tokens[p.0] >= w)
            && arcs.inhibitors.iter().all(|&(p, h)| tokens[p.0] < h)
    }

    pub fn enabled(&self, m: &Marking, t: &str) -> Result<bool, NetError> {
        let t = self.transition(t)?;
        Ok(self.is_enabled(m, t))
    }

    pub fn fire(&self, m: &Marking, t: TransitionId) -> Result<Marking, NetError> {
        if !self.is_enabled(m, t) {
            return Err(NetError::NotEnabled(self.transitions[t.0].clone()));
        }
        let arcs = &self.arcs[t.0];
        let mut next = m.clone();
        for &(p, w) in &arcs.inputs {
            next.0[p.0] -= w;
        }
        for &(p, w) in &arcs.outputs {
            next.0[p.0] = next.0[p.0]
                .checked_add(w)
                .ok_or_else(|| NetError::TokenOverflow(self.places[p.0].clone()))?;
        }
        Ok(next)
    }

    pub fn is_deadlock(&self, m: &Marking) -> bool {
        self.transitions().all(|t| !self.is_enabled(m, t))
    }

    /// Trace successors of `m`: one entry per enabled transition in declaration
    /// order, or a single stutter step when `m` is a deadlock. Never empty.
    pub fn successors(&self, m: &Marking) -> Result<Vec<(Step, Marking)>, NetError> {
        let mut out = Vec::new();
        for t in self.transitions() {
            if self.is_enabled(m, t) {
                out.push((Step::Fire(t), self.fire(m, t)?));
            }
        }
        if out.is_empty() {
            out.push((Step::Stutter, m.clone()));
        }
        Ok(out)
    }

    /// Applies one trace step, checking that it is legal from `m`.
    pub fn apply(&self, m: &Marking, step: Step) -> Result<Marking, NetError> {
        match step {
            Step::Fire(t) => self.fire(m, t),
            Step::Stutter if self.is_deadlock(m) => Ok(m.clone()),
            Step::Stutter => Err(NetError::NotEnabled("<stutter>".into())),
        }
    }

    pub fn format_marking(&self, m: &Marking) -> String {
        MarkingDisplay { net: self, marking: m }.to_string()
    }
}

fn lookup(arcs: &[(PlaceId, Tokens)], p: PlaceId) -> Tokens {
    arcs.binary_search_by_key(&p, |&(q, _)| q)
        .map(|i| arcs[i].1)
        .unwrap_or(0)
}

struct MarkingDisplay<'a> {
    net: &'a Net,
    marking: &'a Marking,
}

impl fmt::Display for MarkingDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "{{")?;
        for p in self.net.places() {
            let n = self.marking.get(p);
            if n > 0 {
                if !first {
                    write!(f, ", ")?;
                }
                first = false;
                write!(f, "{}: {}", self.net.place_name(p), n)?;
            }
        }
        write!(f, "}}")
    }
}

/// Incremental construction of a [`Net`]; validation happens as items are added.
#[derive(Debug, Default, Clone)]
pub struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<String>,
    place_index: HashMap<String, PlaceId>,
    transition_index: HashMap<String, TransitionId>,
    arcs: Vec<TransitionArcs>,
    initial: Vec<Tokens>,
}

impl NetBuilder {
    pub fn place(&mut self, name: impl Into<String>, tokens: Tokens) -> Result<PlaceId, NetError> {
        let name = name.into();
        if self.place_index.contains_key(&name) {
            return Err(NetError::DuplicatePlace(name));
        }
        let id = PlaceId(self.places.len());
        self.place_index.insert(name.clone(), id);
        self.places.push(name);
        self.initial.push(tokens);
        Ok(id)
    }

    pub fn transition(&mut self, name: impl Into<String>) -> Result<TransitionId, NetError> {
        let name = name.into();
        if self.transition_index.contains_key(&name) {
            return Err(NetError::DuplicateTransition(name));
        }
        let id = TransitionId(self.transitions.len());
        self.transition_index.insert(name.clone(), id);
        self.transitions.push(name);
        self.arcs.push(TransitionArcs::default());
        Ok(id)
    }

    pub fn place_id(&self, name: &str) -> Result<PlaceId, NetError> {
        self.place_index
            .get(name)
            .copied()
            .ok_or_else(|| NetError::UnknownPlace(name.to_string()))
    }

    pub fn transition_id(&self, name: &str) -> Result<TransitionId, NetError> {
        self.transition_index
            .get(name)
            .copied()
            .ok_or_else(|| NetError::UnknownTransition(name.to_string()))
    }

    pub fn has_place(&self, name: &str) -> bool {
        self.place_index.contains_key(name)
    }

    pub fn has_transition(&self, name: &str) -> bool {
        self.transition_index.contains_key(name)
    }

    pub fn set_initial(&mut self, p: PlaceId, tokens: Tokens) {
        self.initial[p.0] = tokens;
    }

    pub fn input(&mut self, p: &str, t: &str, weight: Tokens) -> Result<&mut Self, NetError> {
        let (pi, ti) = (self.place_id(p)?, self.transition_id(t)?);
        self.input_arc(pi, ti, weight)
    }

    pub fn output(&mut self, t: &str, p: &str, weight: Tokens) -> Result<&mut Self, NetError> {
        let (pi, ti) = (self.place_id(p)?, self.transition_id(t)?);
        self.output_arc(ti, pi, weight)
    }

    pub fn inhibitor(&mut self, p: &str, t: &str, threshold: Tokens) -> Result<&mut Self, NetError> {
        let (pi, ti) = (self.place_id(p)?, self.transition_id(t)?);
        self.inhibitor_arc(pi, ti, threshold)
    }

    pub fn input_arc(&mut self, p: PlaceId, t: TransitionId, w: Tokens) -> Result<&mut Self, NetError> {
        let (pn, tn) = (self.places[p.0].clone(), self.transitions[t.0].clone());
        insert_arc(&mut self.arcs[t.0].inputs, p, w, pn, tn)?;
        Ok(self)
    }

    pub fn output_arc(&mut self, t: TransitionId, p: PlaceId, w: Tokens) -> Result<&mut Self, NetError> {
        let (pn, tn) = (self.places[p.0].clone(), self.transitions[t.0].clone());
        insert_arc(&mut self.arcs[t.0].outputs, p, w, tn, pn)?;
        Ok(self)
    }

    pub fn inhibitor_arc(&mut self, p: PlaceId, t: TransitionId, h: Tokens) -> Result<&mut Self, NetError> {
        let (pn, tn) = (self.places[p.0].clone(), self.transitions[t.0].clone());
        insert_arc(&mut self.arcs[t.0].inhibitors, p, h, pn, tn)?;
        Ok(self)
    }

    pub fn build(self) -> Net {
        Net {
            places: self.places,
            transitions: self.transitions,
            place_index: self.place_index,
            transition_index: self.transition_index,
            arcs: self.arcs,
            initial: Marking(self.initial),
        }
    }
}

fn insert_arc(
    arcs: &mut Vec<(PlaceId, Tokens)>,
    p: PlaceId,
    w: Tokens,
    from: String,
    to: String,
) -> Result<(), NetError> {
    if w == 0 {
        return Err(NetError::ZeroWeight(from, to));
    }
    match arcs.binary_search_by_key(&p, |&(q, _)| q) {
        Ok(_) => Err(NetError::DuplicateArc(from, to)),
        Err(i) => {
            arcs.insert(i, (p, w));
            Ok(())
        }
    }
}
