//! Decomposition of a finite chain into ergodic classes and transient states.
//!
//! The ergodic classes are exactly the terminal strongly connected components
//! of the positive-entry digraph: closed (no probability mass leaves) and
//! irreducible by strong connectivity. Every remaining state is transient.

use super::matrix::StochasticMatrix;

/// Partition of the state space into ergodic classes `E^(1)..E^(L)` and the
/// transient set. Classes are sorted internally and ordered by their smallest
/// member index, so the decomposition is a canonical function of the matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainDecomposition {
    classes: Vec<Vec<usize>>,
    transient: Vec<usize>,
    class_of: Vec<Option<usize>>,
}

impl ChainDecomposition {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> &[usize] {
        &self.classes[i]
    }

    pub fn transient_set(&self) -> &[usize] {
        &self.transient
    }

    /// Index of the ergodic class containing `v`, or `None` if `v` is transient.
    pub fn class_of(&self, v: usize) -> Option<usize> {
        self.class_of[v]
    }

    pub fn is_transient(&self, v: usize) -> bool {
        self.class_of[v].is_none()
    }

    pub fn dim(&self) -> usize {
        self.class_of.len()
    }
}

/// Unique partition into closed irreducible recurrent classes plus transient
/// states, via strongly-connected-component condensation of the digraph of
/// strictly positive entries.
pub fn decompose(p: &StochasticMatrix) -> ChainDecomposition {
    let n = p.dim();
    let adj = p.positive_adjacency();
    let sccs = tarjan_scc(&adj);

    let mut comp_of = vec![usize::MAX; n];
    for (cid, comp) in sccs.iter().enumerate() {
        for &v in comp {
            comp_of[v] = cid;
        }
    }

    // terminal component = no positive edge leaves it
    let mut terminal = vec![true; sccs.len()];
    for v in 0..n {
        for &w in &adj[v] {
            if comp_of[w] != comp_of[v] {
                terminal[comp_of[v]] = false;
            }
        }
    }

    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut transient: Vec<usize> = Vec::new();
    for (cid, comp) in sccs.iter().enumerate() {
        if terminal[cid] {
            let mut c = comp.clone();
            c.sort_unstable();
            classes.push(c);
        } else {
            transient.extend_from_slice(comp);
        }
    }
    classes.sort_by_key(|c| c[0]);
    transient.sort_unstable();

    let mut class_of = vec![None; n];
    for (i, c) in classes.iter().enumerate() {
        for &v in c {
            class_of[v] = Some(i);
        }
    }

    ChainDecomposition {
        classes,
        transient,
        class_of,
    }
}

/// Iterative Tarjan SCC over adjacency lists.
fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0usize;

    // explicit DFS frames: (node, next edge position)
    let mut frames: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        frames.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut ei)) = frames.last_mut() {
            if *ei < adj[v].len() {
                let w = adj[v][*ei];
                *ei += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}
