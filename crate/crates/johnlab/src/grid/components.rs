//! Connected-component labeling of occupied cells by union-find.

use serde::{Deserialize, Serialize};

use crate::grid::{Cell, VoxelDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Adjacency {
    /// 2n face neighbors (matches cubical-complex connectivity of open cells).
    Face,
    /// All 3^n - 1 neighbors (matches connectivity of closed cubical cells
    /// and gives better metric fidelity for geodesic graphs).
    Full,
}

#[derive(Debug, Clone)]
pub struct Labeling {
    /// Component id per cell, usize::MAX on unoccupied cells.
    pub labels: Vec<usize>,
    pub count: usize,
    /// Occupied linear indices grouped by component id.
    pub members: Vec<Vec<usize>>,
}

impl Labeling {
    pub fn label_of(&self, d: &VoxelDomain, c: Cell) -> Option<usize> {
        let l = self.labels[d.spec.linear(c)];
        (l != usize::MAX).then_some(l)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Offsets to already-visited neighbors in scan order (negative direction),
/// so each adjacency is processed once.
pub(crate) fn neighbor_offsets(dim: usize, adjacency: Adjacency) -> Vec<[isize; 3]> {
    let mut offs = Vec::new();
    let zr = if dim == 2 { 0..=0 } else { -1..=1 };
    for dz in zr {
        for dy in -1..=1 {
            for dx in -1..=1 {
                let o: [isize; 3] = [dx, dy, dz];
                if o == [0, 0, 0] {
                    continue;
                }
                // keep only the lexicographically-negative half
                let neg = if dz != 0 { dz < 0 } else if dy != 0 { dy < 0 } else { dx < 0 };
                if !neg {
                    continue;
                }
                if adjacency == Adjacency::Face
                    && dx.abs() + dy.abs() + dz.abs() != 1
                {
                    continue;
                }
                offs.push(o);
            }
        }
    }
    offs
}

pub fn components(domain: &VoxelDomain, adjacency: Adjacency) -> Labeling {
    let spec = &domain.spec;
    let n = spec.cell_count();
    let mut uf = UnionFind::new(n);
    let offs = neighbor_offsets(spec.dim, adjacency);
    for c in spec.cells() {
        if !domain.occupied(c) {
            continue;
        }
        let i = spec.linear(c);
        for o in &offs {
            let mut nb = [0usize; 3];
            let mut ok = true;
            for a in 0..3 {
                let v = c[a] as isize + o[a];
                if v < 0 || v >= spec.shape[a] as isize {
                    ok = false;
                    break;
                }
                nb[a] = v as usize;
            }
            if ok && domain.occupied(nb) {
                uf.union(i, spec.linear(nb));
            }
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut root_to_label = vec![usize::MAX; n];
    for i in 0..n {
        if !domain.occ[i] {
            continue;
        }
        let r = uf.find(i);
        if root_to_label[r] == usize::MAX {
            root_to_label[r] = members.len();
            members.push(Vec::new());
        }
        labels[i] = root_to_label[r];
        members[root_to_label[r]].push(i);
    }
    Labeling { count: members.len(), labels, members }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn two_disjoint_boxes() {
        let spec = GridSpec::new(3, [10, 4, 4], 1.0, [0.0; 3]).unwrap();
        let mut d = VoxelDomain::empty(spec);
        for x in 0..3 {
            for y in 0..3 {
                for z in 0..3 {
                    d.set([x, y, z], true);
                    d.set([x + 6, y, z], true);
                }
            }
        }
        assert_eq!(components(&d, Adjacency::Face).count, 2);
        assert_eq!(components(&d, Adjacency::Full).count, 2);
    }

    #[test]
    fn full_box_one_component() {
        let d = VoxelDomain::full(GridSpec::new(3, [5, 5, 5], 1.0, [0.0; 3]).unwrap());
        assert_eq!(components(&d, Adjacency::Face).count, 1);
    }

    #[test]
    fn checkerboard_2d() {
        let spec = GridSpec::new(2, [8, 8, 1], 1.0, [0.0; 3]).unwrap();
        let mut d = VoxelDomain::empty(spec);
        let mut occ = 0;
        for x in 0..8 {
            for y in 0..8 {
                if (x + y) % 2 == 0 {
                    d.set([x, y, 0], true);
                    occ += 1;
                }
            }
        }
        // face adjacency: every occupied cell isolated; full: diagonals connect
        assert_eq!(components(&d, Adjacency::Face).count, occ);
        assert_eq!(components(&d, Adjacency::Full).count, 1);
    }

    #[test]
    fn face_refines_full() {
        let spec = GridSpec::new(2, [16, 16, 1], 1.0, [0.0; 3]).unwrap();
        let mut d = VoxelDomain::empty(spec.clone());
        // a blobby deterministic pattern
        for c in spec.cells() {
            if (c[0] * 7 + c[1] * 13) % 5 < 3 {
                d.set(c, true);
            }
        }
        let face = components(&d, Adjacency::Face);
        let full = components(&d, Adjacency::Full);
        // every face-component maps into exactly one full-component
        for mem in &face.members {
            let target = full.labels[mem[0]];
            for &i in mem {
                assert_eq!(full.labels[i], target);
            }
        }
        assert!(face.count >= full.count);
    }
}
