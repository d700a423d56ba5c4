use std::collections::VecDeque;

use crate::encodings::Topology;

/// Every simple path from `source` to `target` (as node ids) with its summed
/// latency. Edges without a latency count as 0.
pub fn enumerate_loop_free_paths(topo: &Topology, source: usize, target: usize) -> Vec<(Vec<usize>, u64)> {
    assert_ne!(source, target, "source and target must differ");
    let mut out = Vec::new();
    let mut path = vec![source];
    let mut on_path = vec![false; topo.node_count()];
    on_path[source] = true;
    // explicit stack of (node, index of next edge to try, latency so far)
    let edges: Vec<Vec<(usize, u64)>> = (0..topo.node_count())
        .map(|v| topo.successors(v).map(|e| (e.target, e.latency.unwrap_or(0))).collect())
        .collect();
    let mut stack = vec![(source, 0usize, 0u64)];
    while let Some((v, i, lat)) = stack.pop() {
        if i >= edges[v].len() {
            on_path[v] = false;
            path.pop();
            continue;
        }
        stack.push((v, i + 1, lat));
        let (w, l) = edges[v][i];
        if on_path[w] {
            continue;
        }
        if w == target {
            let mut p = path.clone();
            p.push(w);
            out.push((p, lat + l));
            continue;
        }
        on_path[w] = true;
        path.push(w);
        stack.push((w, 0, lat + l));
    }
    out
}

/// Maximum number of edge-disjoint directed paths, by unit-capacity
/// augmenting paths.
pub fn max_edge_disjoint_paths(topo: &Topology, source: usize, target: usize) -> usize {
    let n = topo.node_count();
    let mut cap = vec![vec![0i64; n]; n];
    for e in topo.edges() {
        cap[e.source][e.target] += 1;
    }
    let mut flow = 0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[source] = source;
        let mut q = VecDeque::from([source]);
        while let Some(v) = q.pop_front() {
            for w in 0..n {
                if cap[v][w] > 0 && prev[w] == usize::MAX {
                    prev[w] = v;
                    q.push_back(w);
                }
            }
        }
        if prev[target] == usize::MAX {
            return flow;
        }
        let mut w = target;
        while w != source {
            let v = prev[w];
            cap[v][w] -= 1;
            cap[w][v] += 1;
            w = v;
        }
        flow += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::parse_edgelist;

    fn fig() -> Topology {
        parse_edgelist("v0 v1 3\nv1 v0 3\nv0 v2 3\nv2 v0 3\nv0 v3 3\nv3 v0 3\nv1 v2 1\nv2 v1 1\nv3 v1 4\nv1 v3 1\n").unwrap()
    }

    #[test]
    fn latency_set_of_example() {
        let t = fig();
        let (s, d) = (t.node("v0").unwrap(), t.node("v2").unwrap());
        let mut lat: Vec<u64> = enumerate_loop_free_paths(&t, s, d).into_iter().map(|p| p.1).collect();
        lat.sort();
        lat.dedup();
        assert_eq!(lat, vec![3, 4, 8]);
    }

    #[test]
    fn disconnected_target() {
        let t = parse_edgelist("a b 1\nc a 1\n").unwrap();
        assert!(enumerate_loop_free_paths(&t, 0, 2).is_empty());
    }

    #[test]
    fn flows() {
        let t = fig();
        let v = |n: &str| t.node(n).unwrap();
        assert_eq!(max_edge_disjoint_paths(&t, v("v0"), v("v1")), 3);
        assert_eq!(max_edge_disjoint_paths(&t, v("v0"), v("v2")), 2);
    }
}
