//! Qualitative graph analyses over the support of a chain.
//!
//! Until-probabilities need the exact zero and one sets before any numerics
//! run, and steady-state analysis needs the bottom strongly connected
//! components and the period. All of this ignores the probability values and
//! works on edge support alone.

use crate::scalar::Real;

use super::Dtmc;

/// States reachable from the initial state.
pub fn reachable<T: Real>(d: &Dtmc<T>) -> Vec<bool> {
    let mut seen = vec![false; d.n_states()];
    let mut stack = vec![d.initial()];
    seen[d.initial()] = true;
    while let Some(s) = stack.pop() {
        for &(to, _) in d.row(s) {
            if !seen[to] {
                seen[to] = true;
                stack.push(to);
            }
        }
    }
    seen
}

/// States from which a `b`-state is reachable along paths that stay inside
/// `a` until `b` is hit. The complement has until-probability exactly zero.
pub fn can_reach_through<T: Real>(d: &Dtmc<T>, a: &[bool], b: &[bool]) -> Vec<bool> {
    let cols = transpose_support(d);
    let mut hit: Vec<bool> = b.to_vec();
    let mut stack: Vec<usize> = (0..d.n_states()).filter(|&s| b[s]).collect();
    while let Some(s) = stack.pop() {
        for &from in &cols[s] {
            if !hit[from] && a[from] {
                hit[from] = true;
                stack.push(from);
            }
        }
    }
    hit
}

/// The set with until-probability exactly one, via the standard two-pass
/// backward construction: a state is below one iff it can wander (through
/// `a \ b`) into the zero set.
pub fn prob1_set<T: Real>(d: &Dtmc<T>, a: &[bool], b: &[bool], zero: &[bool]) -> Vec<bool> {
    let cols = transpose_support(d);
    let mut below_one: Vec<bool> = zero.to_vec();
    let mut stack: Vec<usize> = (0..d.n_states()).filter(|&s| zero[s]).collect();
    while let Some(s) = stack.pop() {
        for &from in &cols[s] {
            if !below_one[from] && a[from] && !b[from] {
                below_one[from] = true;
                stack.push(from);
            }
        }
    }
    below_one.iter().map(|&x| !x).collect()
}

fn transpose_support<T: Real>(d: &Dtmc<T>) -> Vec<Vec<usize>> {
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); d.n_states()];
    for s in 0..d.n_states() {
        for &(to, _) in d.row(s) {
            cols[to].push(s);
        }
    }
    cols
}

/// Strongly connected components, Kosaraju's algorithm with explicit stacks.
/// Components come out in reverse topological order of the condensation.
pub fn sccs<T: Real>(d: &Dtmc<T>) -> Vec<Vec<usize>> {
    let n = d.n_states();
    // First pass: finish order on the forward graph.
    let mut finished = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        // (state, next edge index) pairs emulate the recursion.
        let mut stack = vec![(start, 0usize)];
        seen[start] = true;
        while let Some(&mut (s, ref mut i)) = stack.last_mut() {
            if *i < d.row(s).len() {
                let to = d.row(s)[*i].0;
                *i += 1;
                if !seen[to] {
                    seen[to] = true;
                    stack.push((to, 0));
                }
            } else {
                finished.push(s);
                stack.pop();
            }
        }
    }
    // Second pass: sweep the transpose in reverse finish order.
    let cols = transpose_support(d);
    let mut comp = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &start in finished.iter().rev() {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut stack = vec![start];
        while let Some(s) = stack.pop() {
            for &from in &cols[s] {
                if comp[from] == usize::MAX {
                    comp[from] = id;
                    members.push(from);
                    stack.push(from);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Bottom strongly connected components: SCCs with no edge leaving them.
pub fn bottom_sccs<T: Real>(d: &Dtmc<T>) -> Vec<Vec<usize>> {
    let comps = sccs(d);
    let mut comp_of = vec![0usize; d.n_states()];
    for (id, c) in comps.iter().enumerate() {
        for &s in c {
            comp_of[s] = id;
        }
    }
    comps
        .into_iter()
        .enumerate()
        .filter(|(id, c)| {
            c.iter().all(|&s| d.row(s).iter().all(|&(to, _)| comp_of[to] == *id))
        })
        .map(|(_, c)| c)
        .collect()
}

/// Period of the reachable part of the chain, assuming it is strongly
/// connected: the gcd of `depth(u) + 1 - depth(v)` over all edges `u → v`,
/// with BFS depths from the initial state. Period one means aperiodic.
pub fn period<T: Real>(d: &Dtmc<T>) -> u64 {
    let reach = reachable(d);
    let n = d.n_states();
    let mut depth = vec![i64::MIN; n];
    let mut queue = std::collections::VecDeque::new();
    depth[d.initial()] = 0;
    queue.push_back(d.initial());
    while let Some(s) = queue.pop_front() {
        for &(to, _) in d.row(s) {
            if depth[to] == i64::MIN {
                depth[to] = depth[s] + 1;
                queue.push_back(to);
            }
        }
    }
    let mut g: u64 = 0;
    for s in 0..n {
        if !reach[s] {
            continue;
        }
        for &(to, _) in d.row(s) {
            let diff = (depth[s] + 1 - depth[to]).unsigned_abs();
            g = gcd(g, diff);
        }
    }
    if g == 0 {
        1
    } else {
        g
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
