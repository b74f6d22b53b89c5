//! Closed cubical complexes over voxel sets.
//!
//! Cells are elementary cubes addressed by doubled (Khalimsky) coordinates:
//! a voxel (i,j,k) becomes the top cell (2i+1, 2j+1, 2k+1); even coordinates
//! are vertices of the grid-line lattice, odd coordinates unit intervals.
//! The three doubled coordinates pack into a u64 key (21 bits each), which
//! is stable across subcomplexes of the same grid and serves as the
//! serialized cell id.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Point, VoxelDomain};

pub type CellKey = u64;

const COORD_BITS: u32 = 21;
const COORD_MASK: u64 = (1 << COORD_BITS) - 1;

#[inline]
pub fn pack(c: [u64; 3]) -> CellKey {
    c[0] | c[1] << COORD_BITS | c[2] << (2 * COORD_BITS)
}

#[inline]
pub fn unpack(k: CellKey) -> [u64; 3] {
    [k & COORD_MASK, k >> COORD_BITS & COORD_MASK, k >> (2 * COORD_BITS) & COORD_MASK]
}

/// Cell dimension = number of odd (interval) coordinates.
#[inline]
pub fn cell_dim(k: CellKey) -> usize {
    let c = unpack(k);
    (c[0] & 1) as usize + (c[1] & 1) as usize + (c[2] & 1) as usize
}

/// Physical barycenter of a cell (doubled coordinate / 2 in index units).
pub fn cell_center(spec: &GridSpec, k: CellKey) -> Point {
    let c = unpack(k);
    let mut p = [0.0; 3];
    for a in 0..3 {
        p[a] = spec.origin[a] + c[a] as f64 / 2.0 * spec.spacing;
    }
    if spec.dim == 2 {
        p[2] = 0.0;
    }
    p
}

/// Signed faces of a cell: the m-th odd axis (in increasing axis order)
/// contributes (-1)^m * (upper face - lower face), the tensor-product rule
/// for the interval boundary d[a,a+1] = [a+1] - [a].
pub fn boundary_faces(k: CellKey) -> Vec<(CellKey, i32)> {
    let c = unpack(k);
    let mut out = Vec::with_capacity(6);
    let mut m = 0;
    for a in 0..3 {
        if c[a] & 1 == 1 {
            let sign = if m % 2 == 0 { 1 } else { -1 };
            let mut up = c;
            up[a] += 1;
            let mut lo = c;
            lo[a] -= 1;
            out.push((pack(up), sign));
            out.push((pack(lo), -sign));
            m += 1;
        }
    }
    out
}

/// Sparse integer chain, keyed by stable cell ids so chains transfer between
/// subcomplexes of the same grid. Coefficients sorted by key, no zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainVector {
    pub p: usize,
    pub coeffs: Vec<(CellKey, i64)>,
}

impl ChainVector {
    pub fn zero(p: usize) -> Self {
        ChainVector { p, coeffs: Vec::new() }
    }

    pub fn from_terms(p: usize, terms: impl IntoIterator<Item = (CellKey, i64)>) -> Self {
        let mut map: HashMap<CellKey, i64> = HashMap::new();
        for (k, c) in terms {
            *map.entry(k).or_insert(0) += c;
        }
        let mut coeffs: Vec<(CellKey, i64)> =
            map.into_iter().filter(|&(_, c)| c != 0).collect();
        coeffs.sort_unstable();
        ChainVector { p, coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Boundary of the chain (over the full grid, no complex needed).
    pub fn boundary(&self) -> ChainVector {
        let terms = self.coeffs.iter().flat_map(|&(k, c)| {
            boundary_faces(k).into_iter().map(move |(f, s)| (f, c * s as i64))
        });
        ChainVector::from_terms(self.p.wrapping_sub(1), terms.collect::<Vec<_>>())
    }

    /// Max pairwise Euclidean distance of the support's cell centers.
    pub fn support_diameter(&self, spec: &GridSpec) -> f64 {
        let pts: Vec<Point> = self.coeffs.iter().map(|&(k, _)| cell_center(spec, k)).collect();
        let mut d = 0.0f64;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                d = d.max(crate::grid::dist(pts[i], pts[j]));
            }
        }
        d
    }

    pub fn support_barycenter(&self, spec: &GridSpec) -> Point {
        let mut p = [0.0; 3];
        for &(k, _) in &self.coeffs {
            let c = cell_center(spec, k);
            for a in 0..3 {
                p[a] += c[a];
            }
        }
        let n = self.coeffs.len().max(1) as f64;
        [p[0] / n, p[1] / n, p[2] / n]
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.p,
            "cells": self.coeffs.iter().map(|&(k, c)| serde_json::json!([k, c])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<ChainVector> {
        let p = v["dim"]
            .as_u64()
            .ok_or_else(|| Error::Parse("chain json missing dim".into()))? as usize;
        let cells = v["cells"]
            .as_array()
            .ok_or_else(|| Error::Parse("chain json missing cells".into()))?;
        let mut terms = Vec::with_capacity(cells.len());
        for e in cells {
            let k = e[0].as_u64().ok_or_else(|| Error::Parse("bad cell id".into()))?;
            let c = e[1].as_i64().ok_or_else(|| Error::Parse("bad coefficient".into()))?;
            terms.push((k, c));
        }
        Ok(ChainVector::from_terms(p, terms))
    }
}

/// Closed cubical complex: cells per dimension in sorted key order, boundary
/// operator as a sparse signed matrix per dimension.
#[derive(Debug, Clone)]
pub struct CubicalComplex {
    pub spec: GridSpec,
    /// Ambient dimension (2 or 3).
    pub n: usize,
    /// cells[p] = sorted keys of the p-cells.
    pub cells: Vec<Vec<CellKey>>,
    /// index[p][key] = position in cells[p].
    pub index: Vec<HashMap<CellKey, u32>>,
    /// boundary[p][j] = sparse column of d_p on the j-th p-cell, entries
    /// (row in cells[p-1], sign), rows ascending. boundary[0] is empty.
    pub boundary: Vec<Vec<Vec<(u32, i32)>>>,
}

impl CubicalComplex {
    pub fn cell_count(&self, p: usize) -> usize {
        self.cells.get(p).map_or(0, |v| v.len())
    }

    pub fn total_cells(&self) -> usize {
        self.cells.iter().map(|v| v.len()).sum()
    }

    pub fn has_cell(&self, k: CellKey) -> bool {
        let p = cell_dim(k);
        p <= self.n && self.index[p].contains_key(&k)
    }

    /// True when every cell of `self` is a cell of `other`.
    pub fn subcomplex_of(&self, other: &CubicalComplex) -> bool {
        self.cells.iter().enumerate().all(|(p, v)| {
            p <= other.n && v.iter().all(|k| other.index[p].contains_key(k))
        })
    }

    /// Chain -> rows in this complex; errors when a cell is absent.
    pub fn rows_of(&self, z: &ChainVector) -> Result<Vec<(u32, i64)>> {
        let mut rows = Vec::with_capacity(z.coeffs.len());
        for &(k, c) in &z.coeffs {
            let idx = self.index[z.p].get(&k).ok_or_else(|| {
                Error::Precondition(format!("chain references cell {k} absent from complex"))
            })?;
            rows.push((*idx, c));
        }
        rows.sort_unstable_by_key(|&(r, _)| r);
        Ok(rows)
    }

    pub fn chain_of_rows(&self, p: usize, rows: &[(u32, i64)]) -> ChainVector {
        ChainVector::from_terms(
            p,
            rows.iter().map(|&(r, c)| (self.cells[p][r as usize], c)).collect::<Vec<_>>(),
        )
    }

    /// Euler characteristic from cell counts.
    pub fn euler_characteristic(&self) -> i64 {
        self.cells
            .iter()
            .enumerate()
            .map(|(p, v)| if p % 2 == 0 { v.len() as i64 } else { -(v.len() as i64) })
            .sum()
    }
}

pub fn build_complex(domain: &VoxelDomain) -> CubicalComplex {
    let spec = domain.spec.clone();
    let n = spec.dim;
    let mut sets: Vec<HashMap<CellKey, ()>> = (0..=n).map(|_| HashMap::new()).collect();
    // closure of each occupied top cell: all 2^d combinations of rounding
    // each odd coordinate down/up to its even neighbors
    for c in domain.occupied_cells() {
        let top = [
            2 * c[0] as u64 + 1,
            2 * c[1] as u64 + 1,
            if n == 2 { 0 } else { 2 * c[2] as u64 + 1 },
        ];
        // ternary enumeration over the n odd axes: per axis the cell keeps
        // the interval or collapses to its lower / upper vertex
        let axes = n;
        let mut choice = vec![0u8; axes];
        loop {
            let mut cell = top;
            for (a, &ch) in choice.iter().enumerate() {
                match ch {
                    0 => {}
                    1 => cell[a] -= 1,
                    _ => cell[a] += 1,
                }
            }
            let d = cell_dim(pack(cell));
            sets[d].insert(pack(cell), ());
            // increment ternary counter
            let mut i = 0;
            loop {
                if i == axes {
                    break;
                }
                choice[i] += 1;
                if choice[i] < 3 {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == axes {
                break;
            }
        }
    }
    let mut cells: Vec<Vec<CellKey>> = sets
        .into_iter()
        .map(|s| {
            let mut v: Vec<CellKey> = s.into_keys().collect();
            v.sort_unstable();
            v
        })
        .collect();
    if cells.is_empty() {
        cells = vec![Vec::new(); n + 1];
    }
    let index: Vec<HashMap<CellKey, u32>> = cells
        .iter()
        .map(|v| v.iter().enumerate().map(|(i, &k)| (k, i as u32)).collect())
        .collect();
    let mut boundary: Vec<Vec<Vec<(u32, i32)>>> = Vec::with_capacity(n + 1);
    boundary.push(Vec::new());
    for p in 1..=n {
        let cols = cells[p]
            .iter()
            .map(|&k| {
                let mut col: Vec<(u32, i32)> = boundary_faces(k)
                    .into_iter()
                    .map(|(f, s)| (index[p - 1][&f], s))
                    .collect();
                col.sort_unstable_by_key(|&(r, _)| r);
                col
            })
            .collect();
        boundary.push(cols);
    }
    let cx = CubicalComplex { spec, n, cells, index, boundary };
    debug_assert!(check_dd_zero(&cx), "dd != 0 on constructed complex");
    cx
}

/// Exact integer check that the composite boundary vanishes.
pub fn check_dd_zero(cx: &CubicalComplex) -> bool {
    for p in 2..=cx.n {
        for col in &cx.boundary[p] {
            let mut acc: HashMap<u32, i64> = HashMap::new();
            for &(r, s) in col {
                for &(rr, ss) in &cx.boundary[p - 1][r as usize] {
                    *acc.entry(rr).or_insert(0) += (s * ss) as i64;
                }
            }
            if acc.values().any(|&v| v != 0) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn single_voxel_cell_counts() {
        let spec = GridSpec::new(3, [3, 3, 3], 1.0, [0.0; 3]).unwrap();
        let mut d = VoxelDomain::empty(spec);
        d.set([1, 1, 1], true);
        let cx = build_complex(&d);
        assert_eq!(cx.cell_count(0), 8);
        assert_eq!(cx.cell_count(1), 12);
        assert_eq!(cx.cell_count(2), 6);
        assert_eq!(cx.cell_count(3), 1);
        assert!(check_dd_zero(&cx));
    }

    #[test]
    fn two_adjacent_voxels_cell_counts() {
        let spec = GridSpec::new(3, [4, 3, 3], 1.0, [0.0; 3]).unwrap();
        let mut d = VoxelDomain::empty(spec);
        d.set([1, 1, 1], true);
        d.set([2, 1, 1], true);
        let cx = build_complex(&d);
        assert_eq!(cx.cell_count(0), 12);
        assert_eq!(cx.cell_count(1), 20);
        assert_eq!(cx.cell_count(2), 11);
        assert_eq!(cx.cell_count(3), 2);
    }

    #[test]
    fn empty_set_empty_complex() {
        let spec = GridSpec::new(3, [3, 3, 3], 1.0, [0.0; 3]).unwrap();
        let cx = build_complex(&VoxelDomain::empty(spec));
        assert_eq!(cx.total_cells(), 0);
    }

    #[test]
    fn chain_boundary_of_square_is_cycle() {
        // square (1,1,0): boundary must be a 1-cycle
        let sq = ChainVector::from_terms(2, [(pack([1, 1, 0]), 1)]);
        let b = sq.boundary();
        assert_eq!(b.coeffs.len(), 4);
        assert!(b.boundary().is_zero());
    }

    #[test]
    fn chain_json_roundtrip() {
        let z = ChainVector::from_terms(1, [(pack([1, 2, 0]), 2), (pack([3, 2, 0]), -1)]);
        let back = ChainVector::from_json(&z.to_json()).unwrap();
        assert_eq!(back, z);
    }
}
