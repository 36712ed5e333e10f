//! Initial placement strategies. A layout maps logical qubit `i` to physical
//! qubit `layout[i]`.

use alloc::vec;
use alloc::vec::Vec;

use super::CompileError;
use crate::circuit::Circuit;
use crate::dag::interaction_graph;
use crate::devices::{DeviceModel, UNREACHABLE};

pub type Layout = Vec<usize>;

/// Expansion budget of the line search, summed over all start nodes.
pub const LINE_SEARCH_BUDGET: usize = 50_000;

fn check_fits(c: &Circuit, d: &DeviceModel) -> Result<(), CompileError> {
    if c.num_qubits > d.num_qubits {
        Err(CompileError::Infeasible {
            device: d.id.clone(),
            needed: c.num_qubits,
            available: d.num_qubits,
        })
    } else {
        Ok(())
    }
}

pub fn place_trivial(c: &Circuit, d: &DeviceModel) -> Result<Layout, CompileError> {
    check_fits(c, d)?;
    Ok((0..c.num_qubits).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinePlacement {
    pub layout: Layout,
    /// No simple path of the required length was found within budget; the
    /// layout is trivial.
    pub fallback: bool,
}

/// First simple path with `n` nodes in depth-first order: start nodes
/// ascending, neighbors ascending, with backtracking.
fn find_path(d: &DeviceModel, n: usize, mut budget: usize) -> Option<Vec<usize>> {
    if n == 0 {
        return Some(Vec::new());
    }
    let mut visited = vec![false; d.num_qubits];
    for start in 0..d.num_qubits {
        let mut path = vec![start];
        let mut cursor = vec![0usize];
        visited[start] = true;
        while let Some(&u) = path.last() {
            if path.len() == n {
                return Some(path);
            }
            if budget == 0 {
                return None;
            }
            budget -= 1;
            let top = cursor.len() - 1;
            let next = d.neighbors(u)[cursor[top]..].iter().position(|&v| !visited[v]);
            match next {
                Some(off) => {
                    let v = d.neighbors(u)[cursor[top] + off];
                    cursor[top] += off + 1;
                    visited[v] = true;
                    path.push(v);
                    cursor.push(0);
                }
                None => {
                    visited[u] = false;
                    path.pop();
                    cursor.pop();
                }
            }
        }
    }
    None
}

/// Logical qubits along a simple coupling path, highest interaction degree
/// first.
pub fn place_line(c: &Circuit, d: &DeviceModel) -> Result<LinePlacement, CompileError> {
    check_fits(c, d)?;
    let n = c.num_qubits;
    let Some(path) = find_path(d, n, LINE_SEARCH_BUDGET) else {
        return Ok(LinePlacement {
            layout: (0..n).collect(),
            fallback: true,
        });
    };
    let degrees = interaction_graph(c).degrees();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&q| (core::cmp::Reverse(degrees[q]), q));
    let mut layout = vec![0; n];
    for (&logical, &physical) in order.iter().zip(&path) {
        layout[logical] = physical;
    }
    Ok(LinePlacement {
        layout,
        fallback: false,
    })
}

/// Greedy embedding of the interaction graph, heaviest edges first.
/// Logical qubits left over go to the nearest free physical qubit.
pub fn place_graph(c: &Circuit, d: &DeviceModel) -> Result<Layout, CompileError> {
    check_fits(c, d)?;
    let n = c.num_qubits;
    let graph = interaction_graph(c);
    let mut edges = graph.edges.clone();
    edges.sort_by_key(|&(a, b, w)| (core::cmp::Reverse(w), a, b));

    let mut l2p: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; d.num_qubits];
    let lowest_free_neighbor =
        |used: &[bool], p: usize| d.neighbors(p).iter().copied().find(|&v| !used[v]);

    for &(a, b, _) in &edges {
        match (l2p[a], l2p[b]) {
            (Some(_), Some(_)) => {}
            (Some(pa), None) | (None, Some(pa)) => {
                let other = if l2p[a].is_some() { b } else { a };
                if let Some(v) = lowest_free_neighbor(&used, pa) {
                    l2p[other] = Some(v);
                    used[v] = true;
                }
            }
            (None, None) => {
                let anchor = if used.iter().any(|&u| u) {
                    // Free node with a free neighbor, closest to what is placed.
                    (0..d.num_qubits)
                        .filter(|&p| !used[p] && lowest_free_neighbor(&used, p).is_some())
                        .min_by_key(|&p| (distance_to_used(d, &used, p), p))
                } else {
                    (0..d.num_qubits).max_by_key(|&p| (d.neighbors(p).len(), core::cmp::Reverse(p)))
                };
                if let Some(pa) = anchor {
                    if let Some(pb) = lowest_free_neighbor(&used, pa) {
                        l2p[a] = Some(pa);
                        l2p[b] = Some(pb);
                        used[pa] = true;
                        used[pb] = true;
                    }
                }
            }
        }
    }

    for q in 0..n {
        if l2p[q].is_some() {
            continue;
        }
        let partners: Vec<usize> = graph.neighbors(q).filter_map(|p| l2p[p]).collect();
        let target = (0..d.num_qubits).filter(|&p| !used[p]).min_by_key(|&p| {
            let dist = if partners.is_empty() {
                distance_to_used(d, &used, p)
            } else {
                partners.iter().map(|&x| d.distance(p, x)).min().unwrap_or(UNREACHABLE)
            };
            (dist, p)
        });
        let p = target.expect("device has at least as many qubits as the circuit");
        l2p[q] = Some(p);
        used[p] = true;
    }
    Ok(l2p.into_iter().map(|p| p.expect("every qubit placed")).collect())
}

fn distance_to_used(d: &DeviceModel, used: &[bool], p: usize) -> usize {
    used.iter()
        .enumerate()
        .filter(|(_, &u)| u)
        .map(|(x, _)| d.distance(p, x))
        .min()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use crate::devices::builtin_devices;

    fn ghz(n: usize) -> Circuit {
        let mut c = Circuit::new(n, 0);
        c.apply(GateKind::H, &[0], &[]);
        for q in 1..n {
            c.apply(GateKind::Cx, &[q - 1, q], &[]);
        }
        c
    }

    fn triangle() -> Circuit {
        let mut c = Circuit::new(3, 0);
        c.apply(GateKind::Cx, &[0, 1], &[])
            .apply(GateKind::Cx, &[1, 2], &[])
            .apply(GateKind::Cx, &[0, 2], &[]);
        c
    }

    fn is_injective(layout: &[usize], n: usize) -> bool {
        let mut seen = vec![false; n];
        layout.iter().all(|&p| p < n && !core::mem::replace(&mut seen[p], true))
    }

    #[test]
    fn line_is_a_coupled_path() {
        let fleet = builtin_devices();
        for d in &fleet {
            for n in [1, 3, 5, 8] {
                let p = place_line(&ghz(n), d).unwrap();
                assert!(!p.fallback);
                assert!(is_injective(&p.layout, d.num_qubits));
                let path: Vec<usize> = {
                    let degrees = interaction_graph(&ghz(n)).degrees();
                    let mut order: Vec<usize> = (0..n).collect();
                    order.sort_by_key(|&q| (core::cmp::Reverse(degrees[q]), q));
                    order.iter().map(|&q| p.layout[q]).collect()
                };
                assert!(path.windows(2).all(|w| d.distance(w[0], w[1]) == 1), "{} {n}", d.id);
            }
        }
    }

    #[test]
    fn line_small_cases() {
        let ring = &builtin_devices()[0];
        assert_eq!(place_line(&Circuit::new(1, 0), ring).unwrap().layout, vec![0]);
        // 3 qubits without interactions: logical order 0,1,2 onto 0-1-2.
        assert_eq!(place_line(&Circuit::new(3, 0), ring).unwrap().layout, vec![0, 1, 2]);
        let ion = &builtin_devices()[1];
        let full = place_line(&Circuit::new(11, 0), ion).unwrap();
        assert!(!full.fallback);
        assert_eq!(full.layout, (0..11).collect::<Vec<_>>());
    }

    #[test]
    fn line_falls_back_when_no_path() {
        // A 127-node path on heavy-hex exhausts the search budget.
        let eagle = &builtin_devices()[4];
        let p = place_line(&Circuit::new(127, 0), eagle).unwrap();
        assert!(p.fallback);
        assert_eq!(p.layout, (0..127).collect::<Vec<_>>());
    }

    #[test]
    fn graph_embeds_ghz_exactly() {
        let ring = &builtin_devices()[0];
        let layout = place_graph(&ghz(3), ring).unwrap();
        for &(a, b, _) in &interaction_graph(&ghz(3)).edges {
            assert_eq!(ring.distance(layout[a], layout[b]), 1);
        }
        assert!(has_exact_embedding(&ghz(3), ring));
    }

    // Exhaustive oracle: does any injective map send every interaction edge to
    // a coupled pair?
    fn has_exact_embedding(c: &Circuit, d: &DeviceModel) -> bool {
        fn go(i: usize, map: &mut Vec<usize>, c: &Circuit, d: &DeviceModel) -> bool {
            if i == c.num_qubits {
                return interaction_graph(c)
                    .edges
                    .iter()
                    .all(|&(a, b, _)| d.distance(map[a], map[b]) == 1);
            }
            for p in 0..d.num_qubits {
                if !map.contains(&p) {
                    map.push(p);
                    if go(i + 1, map, c, d) {
                        return true;
                    }
                    map.pop();
                }
            }
            false
        }
        go(0, &mut Vec::new(), c, d)
    }

    #[test]
    fn graph_triangle() {
        let fleet = builtin_devices();
        let ion = &fleet[1];
        let layout = place_graph(&triangle(), ion).unwrap();
        assert!(interaction_graph(&triangle())
            .edges
            .iter()
            .all(|&(a, b, _)| ion.is_coupled(layout[a], layout[b])));
        let ring = &fleet[0];
        let layout = place_graph(&triangle(), ring).unwrap();
        assert!(interaction_graph(&triangle())
            .edges
            .iter()
            .any(|&(a, b, _)| !ring.is_coupled(layout[a], layout[b])));
    }

    #[test]
    fn graph_places_isolated_qubits() {
        let mut c = Circuit::new(5, 0);
        c.apply(GateKind::Cx, &[3, 4], &[]);
        for d in builtin_devices() {
            let layout = place_graph(&c, &d).unwrap();
            assert!(is_injective(&layout, d.num_qubits));
            assert_eq!(d.distance(layout[3], layout[4]), 1);
        }
    }

    #[test]
    fn too_wide_is_infeasible() {
        let ring = &builtin_devices()[0];
        assert!(matches!(place_trivial(&Circuit::new(9, 0), ring), Err(CompileError::Infeasible { .. })));
        assert!(place_line(&Circuit::new(9, 0), ring).is_err());
        assert!(place_graph(&Circuit::new(9, 0), ring).is_err());
    }
}
