//! Strongly connected components of directed graphs (Tarjan).

/// Tarjan SCC on an adjacency-list digraph. Components are returned in
/// reverse topological order; vertex order inside a component is arbitrary
/// but deterministic for a given input.
pub fn tarjan_scc(graph: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut state = TarjanState {
        index: 0,
        stack: Vec::new(),
        on_stack: vec![false; n],
        idx: vec![None; n],
        low: vec![0; n],
        comps: Vec::new(),
    };
    for v in 0..n {
        if state.idx[v].is_none() {
            strongconnect(v, graph, &mut state);
        }
    }
    state.comps
}

/// A digraph is strongly connected iff it has exactly one SCC spanning
/// every vertex. The empty graph counts as not strongly connected.
pub fn is_strongly_connected(graph: &[Vec<usize>]) -> bool {
    !graph.is_empty() && tarjan_scc(graph).len() == 1
}

struct TarjanState {
    index: usize,
    stack: Vec<usize>,
    on_stack: Vec<bool>,
    idx: Vec<Option<usize>>,
    low: Vec<usize>,
    comps: Vec<Vec<usize>>,
}

fn strongconnect(v: usize, graph: &[Vec<usize>], state: &mut TarjanState) {
    state.idx[v] = Some(state.index);
    state.low[v] = state.index;
    state.index += 1;

    state.stack.push(v);
    state.on_stack[v] = true;

    for &w in &graph[v] {
        if state.idx[w].is_none() {
            strongconnect(w, graph, state);
            state.low[v] = state.low[v].min(state.low[w]);
        } else if state.on_stack[w] {
            state.low[v] = state.low[v].min(state.idx[w].unwrap());
        }
    }

    if state.low[v] == state.idx[v].unwrap() {
        let mut comp = Vec::new();
        loop {
            let w = state.stack.pop().expect("stack underflow");
            state.on_stack[w] = false;
            comp.push(w);
            if w == v {
                break;
            }
        }
        state.comps.push(comp);
    }
}
