//! Iterative Tarjan SCC over an implicit graph.

/// Strongly connected components of the subgraph induced by nodes with
/// `include(v)`, in reverse topological order. Successors outside the
/// subgraph are ignored.
pub fn tarjan<I, S, P>(n: usize, succ: S, include: P) -> Vec<Vec<usize>>
where
    I: Iterator<Item = usize>,
    S: Fn(usize) -> I,
    P: Fn(usize) -> bool,
{
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0usize;
    let mut call: Vec<(usize, I)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN || !include(root) {
            continue;
        }
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, succ(root)));
        while let Some((v, it)) = call.last_mut() {
            let v = *v;
            match it.next() {
                Some(w) if !include(w) => {}
                Some(w) if index[w] == UNSEEN => {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, succ(w)));
                }
                Some(w) => {
                    if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                }
                None => {
                    call.pop();
                    if let Some((u, _)) = call.last() {
                        low[*u] = low[*u].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        out.push(comp);
                    }
                }
            }
        }
    }
    out
}
