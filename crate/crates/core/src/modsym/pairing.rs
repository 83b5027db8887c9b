use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::One;

use super::{boundary_map, Result, SymbolSpace};
use crate::exactlin::{kernel_int, snf, solve_int_many, IntMatrix, Lattice};

/// The saturated kernel of the boundary map, in quotient coordinates.
pub fn cuspidal_lattice(space: &SymbolSpace) -> Lattice {
    let (_, b) = boundary_map(space);
    kernel_int(&b)
}

/// Intersection form on the cuspidal lattice basis.
pub fn intersection_pairing(space: &SymbolSpace) -> Result<IntMatrix> {
    Ok(CuspidalData::new(space)?.pairing)
}

/// Cuspidal lattice with the maps needed to restrict operators to it.
#[derive(Clone, Debug)]
pub struct CuspidalData {
    pub lattice: Lattice,
    /// basis vectors as columns (`rank x 2g`)
    pub basis: IntMatrix,
    /// `left_inverse * basis = 1`
    pub left_inverse: IntMatrix,
    pub pairing: IntMatrix,
}

impl CuspidalData {
    pub fn new(space: &SymbolSpace) -> Result<Self> {
        let lattice = cuspidal_lattice(space);
        let basis = lattice.as_columns();
        let left_inverse = left_inverse(&basis);
        let pairing = dual_graph_pairing(space, &basis)?;
        Ok(Self { lattice, basis, left_inverse, pairing })
    }

    /// Twice the genus.
    pub fn dim(&self) -> usize {
        self.lattice.rank()
    }

    /// `L T C`, the action of `t` in the cuspidal basis; `None` when `t`
    /// does not preserve the lattice.
    pub fn restrict(&self, t: &IntMatrix) -> Option<IntMatrix> {
        let tc = t * &self.basis;
        let r = &self.left_inverse * &tc;
        (&self.basis * &r == tc).then_some(r)
    }
}

/// `V [I 0] U` from `U C V = [I; 0]`, valid for a saturated basis.
fn left_inverse(c: &IntMatrix) -> IntMatrix {
    let (n, k) = c.shape();
    let s = snf(c);
    debug_assert!(s.invariants().iter().all(One::is_one));
    let mut proj = IntMatrix::zeros(k, n);
    for i in 0..k {
        proj[(i, i)] = BigInt::one();
    }
    &(&s.v * &proj) * &s.u
}

/// Pairs cuspidal classes with closed loops of the graph dual to the
/// triangulation. Every triangle is a tau-orbit, every edge an S-pair; a
/// loop is pushed onto the edge graph through one corner per triangle.
fn dual_graph_pairing(space: &SymbolSpace, cusp_basis: &IntMatrix) -> Result<IntMatrix> {
    let syms = space.symbols();
    let n = syms.len();
    let g2 = cusp_basis.cols();

    let mut tri = vec![usize::MAX; n];
    let mut tri_rep = Vec::new();
    for i in 0..n {
        if tri[i] != usize::MAX {
            continue;
        }
        let t = tri_rep.len();
        tri_rep.push(i);
        let j = syms.tau_image(i);
        let k = syms.tau_image(j);
        tri[i] = t;
        tri[j] = t;
        tri[k] = t;
    }
    let ntri = tri_rep.len();

    // path inside tri(h) from its base corner to the start of h
    let corner = |h: usize| -> Vec<(usize, i64)> {
        let rep = tri_rep[tri[h]];
        if h == rep {
            vec![]
        } else if h == syms.tau_image(rep) {
            vec![(h, -1)]
        } else {
            vec![(rep, 1)]
        }
    };
    // edges: (x, xS) with x < xS, oriented tri(x) -> tri(xS)
    let edges: Vec<usize> = (0..n).filter(|&x| x < syms.s_image(x)).collect();
    let edge_chain = |x: usize| -> Vec<i64> {
        let mut chain = corner(x);
        chain.push((x, 1));
        chain.extend(corner(syms.s_image(x)).into_iter().map(|(c, v)| (c, -v)));
        space.chain_coords(&chain)
    };

    let mut adj: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); ntri];
    for (e, &x) in edges.iter().enumerate() {
        let (a, b) = (tri[x], tri[syms.s_image(x)]);
        adj[a].push((b, e, 1));
        adj[b].push((a, e, -1));
    }
    // BFS tree; potential[t] = image of the tree path from the root
    let mut parent: Vec<Option<(usize, i64)>> = vec![None; ntri];
    let mut potential: Vec<Option<Vec<i64>>> = vec![None; ntri];
    let mut in_tree = vec![false; edges.len()];
    potential[0] = Some(vec![0; space.rank()]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(t) = queue.pop_front() {
        for &(u, e, sign) in &adj[t] {
            if potential[u].is_some() {
                continue;
            }
            let step = edge_chain(edges[e]);
            let base = potential[t].as_ref().expect("visited");
            potential[u] = Some(base.iter().zip(&step).map(|(b, s)| b + sign * s).collect());
            parent[u] = Some((e, sign));
            in_tree[e] = true;
            queue.push_back(u);
        }
    }
    let potential: Vec<Vec<i64>> = potential.into_iter().map(|p| p.expect("dual graph is connected")).collect();

    // image of each fundamental loop in quotient coordinates
    let loops: Vec<usize> = (0..edges.len()).filter(|&e| !in_tree[e]).collect();
    let rank = space.rank();
    let mut phi = IntMatrix::zeros(rank, loops.len());
    for (k, &e) in loops.iter().enumerate() {
        let x = edges[e];
        let step = edge_chain(x);
        let (a, b) = (tri[x], tri[syms.s_image(x)]);
        for i in 0..rank {
            phi[(i, k)] = (potential[a][i] + step[i] - potential[b][i]).into();
        }
    }

    // crossing numbers of cuspidal classes with each loop
    let mut cross = IntMatrix::zeros(g2, loops.len());
    for j in 0..g2 {
        let mut a = vec![0i64; n];
        for i in 0..rank {
            let u = i64::try_from(&cusp_basis[(i, j)]).map_err(|_| super::ModSymError::Overflow)?;
            if u == 0 {
                continue;
            }
            for &(class, c) in space.basis_lift(i) {
                a[class] += u * c;
            }
        }
        let f: Vec<i64> = edges.iter().map(|&x| a[x] - a[syms.s_image(x)]).collect();
        let mut pot = vec![0i64; ntri];
        let mut done = vec![false; ntri];
        done[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(t) = queue.pop_front() {
            for &(u, e, sign) in &adj[t] {
                if done[u] || parent[u] != Some((e, sign)) {
                    continue;
                }
                pot[u] = pot[t] + sign * f[e];
                done[u] = true;
                queue.push_back(u);
            }
        }
        for (k, &e) in loops.iter().enumerate() {
            let x = edges[e];
            let (ta, tb) = (tri[x], tri[syms.s_image(x)]);
            cross[(j, k)] = (pot[ta] + f[e] - pot[tb]).into();
        }
    }

    let z = solve_int_many(&phi, cusp_basis)?;
    let g = &cross * &z;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modsym::build_space_for_level;
    use num_traits::Signed;

    #[test]
    fn genus_one_levels() {
        for level in [11, 15] {
            let s = build_space_for_level(level).unwrap();
            let c = CuspidalData::new(&s).unwrap();
            assert_eq!(c.dim(), 2);
            assert_eq!(c.pairing.transpose(), -&c.pairing);
            assert_eq!(c.pairing.det().abs(), BigInt::one());
        }
    }

    #[test]
    fn left_inverse_is_left_inverse() {
        let s = build_space_for_level(15).unwrap();
        let c = CuspidalData::new(&s).unwrap();
        assert_eq!(&c.left_inverse * &c.basis, IntMatrix::identity(c.dim()));
    }
}
