//! Transfer-matrix cover counting along axis 1.
//!
//! Slab `k` is the cross-section `{x : x_1 = k}`; with axis 1 fastest, its
//! vertices are `k + L_1 c` for cross-section index `c`. The interface state
//! is a bitmask over cross-section sites marking dimers that cross from slab
//! `k` into slab `k + 1`. Periodicity along axis 1 is a trace: the state
//! entering slab 0 must equal the state leaving the last slab.

use std::collections::HashMap;

use num::{BigUint, Zero};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lattice::TorusLattice;

type Transitions = Vec<Vec<(u64, u64)>>;

pub(crate) fn count(lat: &TorusLattice, excluded: &[bool], budget: &Budget) -> Result<BigUint> {
    let l1 = lat.side(0);
    let width = lat.vertex_count() / l1;
    if width >= 63 {
        return Err(Error::Budget {
            what: "transfer-matrix interface",
            needed: u128::MAX,
            budget: budget.transfer_states,
        });
    }
    let states = 1u128 << width;
    // a wrap edge that coincides with the forward edge (L_1 = 2) carries no trace
    let traced = l1 > 2;
    let pairs = if traced { states * states } else { states };
    if pairs > budget.transfer_states {
        return Err(Error::Budget {
            what: "transfer-matrix state space",
            needed: pairs,
            budget: budget.transfer_states,
        });
    }

    // in-slab neighbours in cross-section indices, from slab 0
    let mut cross_adj: Vec<Vec<usize>> = Vec::with_capacity(width);
    for c in 0..width {
        let v = c * l1;
        let mut adj: Vec<usize> = lat
            .adjacent(v)
            .iter()
            .filter(|&&u| lat.coord(u, 0) == 0)
            .map(|&u| u / l1)
            .collect();
        adj.sort_unstable();
        adj.dedup();
        cross_adj.push(adj);
    }

    let slab_masks: Vec<u64> = (0..l1)
        .map(|k| {
            (0..width)
                .filter(|&c| excluded[k + l1 * c])
                .fold(0u64, |m, c| m | (1 << c))
        })
        .collect();

    let mut cache: HashMap<u64, Transitions> = HashMap::new();
    for &m in &slab_masks {
        cache
            .entry(m)
            .or_insert_with(|| slab_transitions(width, &cross_adj, m));
    }

    let n_states = states as usize;
    let boundaries: Vec<u64> = if traced {
        (0..states as u64)
            .filter(|b| b & slab_masks[0] == 0)
            .collect()
    } else {
        vec![0]
    };

    let mut total = BigUint::zero();
    for b in boundaries {
        let mut cur: Vec<BigUint> = vec![BigUint::zero(); n_states];
        cur[b as usize] = BigUint::from(1u32);
        for &m in &slab_masks {
            let trans = &cache[&m];
            let mut next: Vec<BigUint> = vec![BigUint::zero(); n_states];
            for (s, w) in cur.iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                for &(out, mult) in &trans[s] {
                    next[out as usize] += w * mult;
                }
            }
            cur = next;
        }
        total += &cur[b as usize];
    }
    Ok(total)
}

/// For each incoming mask, the outgoing masks and their multiplicities.
fn slab_transitions(width: usize, adj: &[Vec<usize>], excluded: u64) -> Transitions {
    let states = 1usize << width;
    let mut out = vec![Vec::new(); states];
    for (incoming, slot) in out.iter_mut().enumerate() {
        let incoming = incoming as u64;
        if incoming & excluded != 0 {
            continue;
        }
        let mut acc: HashMap<u64, u64> = HashMap::new();
        fill(0, width, adj, incoming | excluded, excluded, 0, &mut acc);
        let mut list: Vec<(u64, u64)> = acc.into_iter().collect();
        list.sort_unstable();
        *slot = list;
    }
    out
}

fn fill(
    c: usize,
    width: usize,
    adj: &[Vec<usize>],
    covered: u64,
    excluded: u64,
    forward: u64,
    acc: &mut HashMap<u64, u64>,
) {
    let Some(c) = (c..width).find(|&i| covered & (1 << i) == 0) else {
        *acc.entry(forward).or_insert(0) += 1;
        return;
    };
    let bit = 1u64 << c;
    // dimer towards the next slab
    fill(
        c + 1,
        width,
        adj,
        covered | bit,
        excluded,
        forward | bit,
        acc,
    );
    for &u in &adj[c] {
        let ub = 1u64 << u;
        if u > c && covered & ub == 0 && excluded & ub == 0 {
            fill(
                c + 1,
                width,
                adj,
                covered | bit | ub,
                excluded,
                forward,
                acc,
            );
        }
    }
}
