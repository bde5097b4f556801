use nalgebra::DMatrix;

/// Strongly connected components by Tarjan's algorithm, iteratively so deep
/// chains do not overflow the stack. Components come out in reverse
/// topological order.
pub fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (vertex, position in its adjacency list)
        let mut call = vec![(root, 0usize)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&u) = adj[v].get(*pos) {
                *pos += 1;
                if index[u] == UNSEEN {
                    index[u] = next;
                    low[u] = next;
                    next += 1;
                    stack.push(u);
                    on_stack[u] = true;
                    call.push((u, 0));
                } else if on_stack[u] {
                    low[v] = low[v].min(index[u]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let u = stack.pop().expect("tarjan stack underflow");
                    on_stack[u] = false;
                    comp.push(u);
                    if u == v {
                        break;
                    }
                }
                comps.push(comp);
            }
        }
    }
    comps
}

/// Adjacency of the support graph: an edge `j → i` whenever `a_ij > 0`.
pub fn support_graph(a: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    (0..n)
        .map(|j| (0..n).filter(|&i| a[(i, j)] > 0.0).collect())
        .collect()
}

pub fn strongly_connected(a: &DMatrix<f64>) -> bool {
    assert!(a.is_square());
    a.nrows() > 0 && tarjan_scc(&support_graph(a)).len() == 1
}
