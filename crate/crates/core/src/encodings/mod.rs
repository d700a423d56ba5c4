//! Benchmark generators: congestion and latency nets with their queries, the
//! self-composed congestion baseline, and topology ingestion.

mod topology;

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use topology::{parse_edgelist, parse_graphml, parse_topology, Edge, Topology, TopologyError, TopologyFormat};

use crate::formula::{Atom, Cmp, HyperQuery, LtlExpr, Quantifier, Term};
use crate::net::{Net, NetError, Tokens};

#[derive(Debug, Error)]
pub enum EncodingError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("{0}")]
    Params(String),
}

/// Turns arbitrary ids into query-language identifiers, keeping them unique.
#[derive(Debug, Default)]
struct Namer {
    used: HashSet<String>,
}

impl Namer {
    fn fresh(&mut self, raw: &str) -> String {
        let mut base: String = raw
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
            .collect();
        if !base.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
            base.insert(0, 'n');
        }
        let mut name = base.clone();
        let mut i = 2;
        while !self.used.insert(name.clone()) {
            name = format!("{base}_{i}");
            i += 1;
        }
        name
    }
}

fn vars(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("p{i}")).collect()
}

fn eq_one(var: &str, place: &str) -> LtlExpr {
    LtlExpr::atom(Atom::linear(vec![Term::new(1, var, place)], Cmp::Eq, 1))
}

/// Congestion net plus the names the query generator needs.
#[derive(Debug, Clone)]
pub struct CongestionNet {
    pub net: Net,
    /// Place per topology node, indexed by node id.
    pub node_places: Vec<String>,
    /// Link transitions and their capacity places, in edge order.
    pub links: Vec<(String, String)>,
    /// `(target node, deliver transition, goal place)`.
    pub goals: Vec<(usize, String, String)>,
}

impl CongestionNet {
    pub fn goal_place(&self, target: usize) -> Option<&str> {
        self.goals.iter().find(|g| g.0 == target).map(|g| g.2.as_str())
    }
}

fn check_node(topo: &Topology, v: usize) -> Result<(), EncodingError> {
    if v >= topo.node_count() {
        return Err(TopologyError::UnknownNode(format!("#{v}")).into());
    }
    Ok(())
}

/// One place per node (the source holds the packet), one link transition per
/// directed edge consuming its capacity place, and a deliver transition per
/// target moving the packet into an absorbing goal place.
pub fn congestion_net(topo: &Topology, source: usize, targets: &[usize]) -> Result<CongestionNet, EncodingError> {
    check_node(topo, source)?;
    for &t in targets {
        check_node(topo, t)?;
    }
    let mut names = Namer::default();
    let mut b = Net::builder();
    let node_places: Vec<String> = topo.nodes().iter().map(|n| names.fresh(n)).collect();
    for (i, p) in node_places.iter().enumerate() {
        b.place(p.clone(), (i == source) as Tokens)?;
    }
    let mut links = Vec::new();
    for e in topo.edges() {
        let t = names.fresh(&format!("t_{}_{}", node_places[e.source], node_places[e.target]));
        let a = names.fresh(&format!("a_{t}"));
        b.place(a.clone(), 1)?;
        links.push((t, a));
    }
    let mut goals = Vec::new();
    for &w in targets {
        if goals.iter().any(|g: &(usize, String, String)| g.0 == w) {
            continue;
        }
        let d = names.fresh(&format!("{}_deliver", node_places[w]));
        let g = names.fresh(&format!("{}g", node_places[w]));
        b.place(g.clone(), 0)?;
        goals.push((w, d, g));
    }
    for (e, (t, a)) in topo.edges().iter().zip(&links) {
        b.transition(t.clone())?;
        b.input(&node_places[e.source], t, 1)?;
        b.input(a, t, 1)?;
        b.output(t, &node_places[e.target], 1)?;
    }
    for (w, d, g) in &goals {
        b.transition(d.clone())?;
        b.input(&node_places[*w], d, 1)?;
        b.output(d, g, 1)?;
    }
    Ok(CongestionNet {
        net: b.build(),
        node_places,
        links,
        goals,
    })
}

/// `E p1..pk : F p1.goal = 1 && .. && F pk.goal = 1 && G (AND over links of
/// p1.a + .. + pk.a >= k - l)`: k routes to `target`, no link used by more
/// than `l` of them.
pub fn congestion_query(cn: &CongestionNet, k: usize, l: usize, target: usize) -> Result<HyperQuery, EncodingError> {
    if l == 0 || l >= k {
        return Err(EncodingError::Params(format!("need 1 <= l < k, got k={k} l={l}")));
    }
    let goal = cn
        .goal_place(target)
        .ok_or_else(|| EncodingError::Params(format!("node #{target} is not a target of the net")))?;
    let vs = vars(k);
    let reach = vs.iter().map(|v| LtlExpr::finally(eq_one(v, goal)));
    let caps = cn.links.iter().map(|(_, a)| {
        LtlExpr::atom(Atom::linear(
            vs.iter().map(|v| Term::new(1, v.clone(), a.clone())).collect(),
            Cmp::Ge,
            (k - l) as i64,
        ))
    });
    let mut parts: Vec<LtlExpr> = reach.collect();
    if !cn.links.is_empty() {
        parts.push(LtlExpr::globally(LtlExpr::and_all(caps)));
    }
    Ok(HyperQuery::new(Quantifier::Exists, vs, LtlExpr::and_all(parts)))
}

/// `k` copies of the routing net sharing capacity places that hold `l`
/// tokens each; the single-trace query asks for every copy to deliver.
pub fn selfcomposed_congestion(
    topo: &Topology,
    source: usize,
    target: usize,
    k: usize,
    l: usize,
) -> Result<(Net, HyperQuery), EncodingError> {
    check_node(topo, source)?;
    check_node(topo, target)?;
    if l == 0 || l >= k {
        return Err(EncodingError::Params(format!("need 1 <= l < k, got k={k} l={l}")));
    }
    selfcomposed_net(topo, source, target, k, l)
}

// Also used with k = 1, which the public entry point rejects.
fn selfcomposed_net(topo: &Topology, source: usize, target: usize, k: usize, l: usize) -> Result<(Net, HyperQuery), EncodingError> {
    let mut names = Namer::default();
    let mut b = Net::builder();
    let base: Vec<String> = topo.nodes().iter().map(|n| names.fresh(n)).collect();
    let node = |v: usize, i: usize| format!("{}_{i}", base[v]);
    let copies: Vec<Vec<String>> = (1..=k).map(|i| (0..topo.node_count()).map(|v| names.fresh(&node(v, i))).collect()).collect();
    for (i, places) in copies.iter().enumerate() {
        for (v, p) in places.iter().enumerate() {
            let _ = i;
            b.place(p.clone(), (v == source) as Tokens)?;
        }
    }
    let mut links = Vec::new();
    for e in topo.edges() {
        let t = format!("t_{}_{}", base[e.source], base[e.target]);
        let a = names.fresh(&format!("a_{t}"));
        b.place(a.clone(), l as Tokens)?;
        links.push((t, a));
    }
    let goals: Vec<String> = (1..=k).map(|i| names.fresh(&format!("{}g_{i}", base[target]))).collect();
    for g in &goals {
        b.place(g.clone(), 0)?;
    }
    for i in 0..k {
        for (e, (t, a)) in topo.edges().iter().zip(&links) {
            let name = names.fresh(&format!("{t}_{}", i + 1));
            b.transition(name.clone())?;
            b.input(&copies[i][e.source], &name, 1)?;
            b.input(a, &name, 1)?;
            b.output(&name, &copies[i][e.target], 1)?;
        }
        let d = names.fresh(&format!("{}_deliver_{}", base[target], i + 1));
        b.transition(d.clone())?;
        b.input(&copies[i][target], &d, 1)?;
        b.output(&d, &goals[i], 1)?;
    }
    let body = LtlExpr::and_all(goals.iter().map(|g| LtlExpr::finally(eq_one("p", g))));
    Ok((b.build(), HyperQuery::new(Quantifier::Exists, vec!["p".into()], body)))
}

/// Single-copy self-composition: reachability of the goal.
pub fn single_route_net(topo: &Topology, source: usize, target: usize) -> Result<(Net, HyperQuery), EncodingError> {
    check_node(topo, source)?;
    check_node(topo, target)?;
    selfcomposed_net(topo, source, target, 1, 1)
}

#[derive(Debug, Clone)]
pub struct LatencyNet {
    pub net: Net,
    pub node_places: Vec<String>,
    pub counter: String,
}

/// Packet routing with accumulated latency: a hop into node `v` consumes the
/// single token of `once_v` and deposits the edge latency into the counter.
/// Hops into the source or out of the target are omitted, and the source has
/// no `once` place.
pub fn latency_net(topo: &Topology, source: usize, target: usize) -> Result<LatencyNet, EncodingError> {
    check_node(topo, source)?;
    check_node(topo, target)?;
    if source == target {
        return Err(EncodingError::Params("source and target must differ".into()));
    }
    let mut names = Namer::default();
    let mut b = Net::builder();
    let node_places: Vec<String> = topo.nodes().iter().map(|n| names.fresh(n)).collect();
    for (i, p) in node_places.iter().enumerate() {
        b.place(p.clone(), (i == source) as Tokens)?;
    }
    let once: Vec<Option<String>> = (0..topo.node_count())
        .map(|v| (v != source).then(|| names.fresh(&format!("once_{}", node_places[v]))))
        .collect();
    for o in once.iter().flatten() {
        b.place(o.clone(), 1)?;
    }
    let counter = names.fresh("counter");
    b.place(counter.clone(), 0)?;
    for e in topo.edges() {
        if e.target == source || e.source == target {
            continue;
        }
        let w = e.latency.ok_or_else(|| {
            TopologyError::MissingLatency(topo.node_name(e.source).into(), topo.node_name(e.target).into())
        })?;
        let t = names.fresh(&format!("t_{}_{}", node_places[e.source], node_places[e.target]));
        b.transition(t.clone())?;
        b.input(&node_places[e.source], &t, 1)?;
        b.input(once[e.target].as_ref().expect("target of a kept edge is not the source"), &t, 1)?;
        b.output(&t, &node_places[e.target], 1)?;
        b.output(&t, &counter, w)?;
    }
    Ok(LatencyNet {
        net: b.build(),
        node_places,
        counter,
    })
}

/// `E p1 p2 : F (p1.target = 1 && p2.target = 1 && p1.counter - p2.counter >= l)`,
/// i.e. two routes whose latencies differ by at least `l`.
pub fn latency_query(ln: &LatencyNet, l: u64, target: usize) -> Result<HyperQuery, EncodingError> {
    if l == 0 {
        return Err(EncodingError::Params("latency bound must be at least 1".into()));
    }
    let bound = i64::try_from(l).map_err(|_| EncodingError::Params("latency bound too large".into()))?;
    let goal = ln
        .node_places
        .get(target)
        .ok_or_else(|| TopologyError::UnknownNode(format!("#{target}")))?;
    let diff = LtlExpr::atom(Atom::linear(
        vec![Term::new(1, "p1", ln.counter.clone()), Term::new(-1, "p2", ln.counter.clone())],
        Cmp::Ge,
        bound,
    ));
    let body = LtlExpr::finally(LtlExpr::and_all([eq_one("p1", goal), eq_one("p2", goal), diff]));
    Ok(HyperQuery::new(Quantifier::Exists, vars(2), body))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkKind {
    Congestion,
    SelfComposed,
    Latency,
}

impl BenchmarkKind {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::Congestion => "congestion",
            BenchmarkKind::SelfComposed => "selfcompose",
            BenchmarkKind::Latency => "latency",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleParams {
    /// Number of routes (congestion kinds).
    pub k: usize,
    /// Link capacity (congestion kinds) or latency bound before scaling.
    pub l: u64,
    /// Latency scale factor M.
    pub scale: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metadata {
    pub kind: BenchmarkKind,
    pub k: usize,
    pub l: u64,
    pub source: String,
    pub target: String,
    pub seed: u64,
    pub scale: u64,
    pub index: usize,
}

#[derive(Debug, Clone)]
pub struct BenchmarkInstance {
    pub net: Net,
    pub query: HyperQuery,
    pub metadata: Metadata,
}

/// Nodes in the top decile of out-degree (at least one node).
pub fn high_degree_nodes(topo: &Topology) -> Vec<usize> {
    let mut order: Vec<usize> = (0..topo.node_count()).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(topo.out_degree(v)));
    order.truncate(topo.node_count().div_ceil(10).max(1));
    order.sort_unstable();
    order
}

/// Draws `count` instances. Each draw picks a source uniformly among
/// [`high_degree_nodes`] and a target uniformly among the other nodes it
/// reaches. Latency instances draw every edge latency uniformly from 1..=5
/// before multiplying by the scale, so scaled instances differ only in weights.
pub fn sample_instances(
    topo: &Topology,
    kind: BenchmarkKind,
    params: SampleParams,
    count: usize,
    seed: u64,
) -> Result<Vec<BenchmarkInstance>, EncodingError> {
    if count == 0 {
        return Err(EncodingError::Params("count must be at least 1".into()));
    }
    if params.scale == 0 {
        return Err(EncodingError::Params("scale must be at least 1".into()));
    }
    let sources = high_degree_nodes(topo);
    if sources.is_empty() {
        return Err(TopologyError::Sampling("topology has no nodes".into()).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let source = sources[rng.random_range(0..sources.len())];
        let reach = topo.reachable_from(source);
        let targets: Vec<usize> = (0..topo.node_count()).filter(|&v| v != source && reach[v]).collect();
        if targets.is_empty() {
            return Err(TopologyError::Sampling(format!("node `{}` reaches no other node", topo.node_name(source))).into());
        }
        let target = targets[rng.random_range(0..targets.len())];
        let (net, query) = match kind {
            BenchmarkKind::Congestion => {
                let cn = congestion_net(topo, source, &[target])?;
                let q = congestion_query(&cn, params.k, params.l as usize, target)?;
                (cn.net, q)
            }
            BenchmarkKind::SelfComposed => selfcomposed_congestion(topo, source, target, params.k, params.l as usize)?,
            BenchmarkKind::Latency => {
                let base: Vec<u64> = (0..topo.edge_count()).map(|_| rng.random_range(1..=5u64)).collect();
                let weighted = topo.with_latencies(|i| base[i] * params.scale);
                let ln = latency_net(&weighted, source, target)?;
                let bound = params
                    .l
                    .checked_mul(params.scale)
                    .ok_or_else(|| EncodingError::Params("scaled bound overflows".into()))?;
                let q = latency_query(&ln, bound, target)?;
                (ln.net, q)
            }
        };
        out.push(BenchmarkInstance {
            net,
            query,
            metadata: Metadata {
                kind,
                k: params.k,
                l: params.l,
                source: topo.node_name(source).to_string(),
                target: topo.node_name(target).to_string(),
                seed,
                scale: params.scale,
                index,
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROUTING: &str = "v0 v1\nv1 v0\nv0 v2\nv2 v0\nv0 v3\nv3 v0\nv1 v2\nv2 v1\nv3 v1\nv1 v3\n";
    const ROUTING_LATENCY: &str = "v0 v1 3\nv1 v0 3\nv0 v2 3\nv2 v0 3\nv0 v3 3\nv3 v0 3\nv1 v2 1\nv2 v1 1\nv3 v1 4\nv1 v3 1\n";

    #[test]
    fn congestion_net_shape() {
        let t = parse_edgelist(ROUTING).unwrap();
        let cn = congestion_net(&t, 0, &[1, 2]).unwrap();
        assert_eq!(cn.net.place_count(), 4 + 10 + 2);
        assert_eq!(cn.net.transition_count(), 10 + 2);
        let m = cn.net.initial_marking();
        assert_eq!(m.get(cn.net.place("v0").unwrap()), 1);
        assert_eq!(m.get(cn.net.place("a_t_v0_v1").unwrap()), 1);
        assert!(cn.net.transition("v1_deliver").is_ok());
        assert_eq!(cn.goal_place(2), Some("v2g"));
    }

    #[test]
    fn smallest_congestion_net() {
        let t = parse_edgelist("s t\n").unwrap();
        let cn = congestion_net(&t, 0, &[1]).unwrap();
        assert_eq!((cn.net.place_count(), cn.net.transition_count()), (4, 2));
    }

    #[test]
    fn congestion_query_text() {
        let t = parse_edgelist("s t\n").unwrap();
        let cn = congestion_net(&t, 0, &[1]).unwrap();
        let q = congestion_query(&cn, 2, 1, 1).unwrap();
        assert_eq!(
            q.to_string(),
            "E p1 p2 : ((F p1.tg = 1 && F p2.tg = 1) && G p1.a_t_s_t + p2.a_t_s_t >= 1)"
        );
        assert!(congestion_query(&cn, 2, 2, 1).is_err());
        let q = congestion_query(&cn, 4, 2, 1).unwrap();
        assert!(q.to_string().ends_with(">= 2)"));
    }

    #[test]
    fn names_are_sanitized_and_unique() {
        let mut n = Namer::default();
        assert_eq!(n.fresh("1 a"), "n1_a");
        assert_eq!(n.fresh("n1_a"), "n1_a_2");
        assert_eq!(n.fresh("x-y"), "x_y");
    }

    #[test]
    fn latency_net_matches_hand_encoding() {
        let t = parse_edgelist(ROUTING_LATENCY).unwrap();
        let ln = latency_net(&t, 0, 2).unwrap();
        let n = &ln.net;
        assert_eq!(n.transition_count(), 6);
        // 4 nodes, 3 once places, counter
        assert_eq!(n.place_count(), 8);
        let t2 = n.transition("t_v0_v3").unwrap();
        let m = n.fire(n.initial_marking(), t2).unwrap();
        let get = |p: &str| m.get(n.place(p).unwrap());
        assert_eq!((get("v0"), get("once_v3"), get("v3"), get("counter")), (0, 0, 1, 3));
        let m = n.fire(&m, n.transition("t_v3_v1").unwrap()).unwrap();
        let m = n.fire(&m, n.transition("t_v1_v2").unwrap()).unwrap();
        assert_eq!(m.get(n.place("counter").unwrap()), 8);
    }

    #[test]
    fn latency_needs_weights() {
        let t = parse_edgelist("a b\n").unwrap();
        assert!(matches!(latency_net(&t, 0, 1), Err(EncodingError::Topology(TopologyError::MissingLatency(..)))));
    }

    #[test]
    fn selfcomposed_shape() {
        let t = parse_edgelist(ROUTING).unwrap();
        let (net, q) = selfcomposed_congestion(&t, 0, 1, 2, 1).unwrap();
        // 2 x 4 node places, 10 shared capacity places, 2 goals
        assert_eq!(net.place_count(), 8 + 10 + 2);
        assert_eq!(net.transition_count(), 2 * 11);
        assert_eq!(q.vars, vec!["p".to_string()]);
        assert_eq!(q.to_string(), "E p : (F p.v1g_1 = 1 && F p.v1g_2 = 1)");
    }

    #[test]
    fn sampling_is_deterministic_and_scales() {
        let t = parse_edgelist(ROUTING).unwrap();
        let p = SampleParams { k: 2, l: 1, scale: 1 };
        let a = sample_instances(&t, BenchmarkKind::Congestion, p, 5, 7).unwrap();
        let b = sample_instances(&t, BenchmarkKind::Congestion, p, 5, 7).unwrap();
        assert_eq!(a.len(), 5);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.net, y.net);
            assert_eq!(x.query, y.query);
            assert_eq!(x.metadata.source, "v0");
        }
        let lp = SampleParams { k: 2, l: 2, scale: 1 };
        let one = sample_instances(&t, BenchmarkKind::Latency, lp, 3, 11).unwrap();
        let big = sample_instances(&t, BenchmarkKind::Latency, SampleParams { scale: 255, ..lp }, 3, 11).unwrap();
        for (x, y) in one.iter().zip(&big) {
            assert_eq!(x.metadata.target, y.metadata.target);
            let c = x.net.place("counter").unwrap();
            for tr in x.net.transitions() {
                assert_eq!(x.net.output_weight(tr, c) * 255, y.net.output_weight(tr, c));
            }
            assert!(y.query.to_string().ends_with(">= 510)"));
        }
    }
}
