//! Cubical homology over voxel sets: Betti numbers, explicit H1 bases,
//! cycle-bounding queries, fast-sequence checks, and the derived joinability
//! and bounded-turning estimators.

mod complex;
mod estimate;
mod reduce;

pub use complex::{
    boundary_faces, build_complex, cell_center, cell_dim, check_dd_zero, pack, unpack,
    CellKey, ChainVector, CubicalComplex,
};
pub use estimate::{estimate_hlog_bt, estimate_hlog_joinability, JoinMode};
pub use reduce::{snf_invariant_factors, IntCol, IntReducer, Mod2Reducer};

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ring {
    Mod2,
    Rational,
    Integer,
}

impl Ring {
    pub fn name(self) -> &'static str {
        match self {
            Ring::Mod2 => "mod2",
            Ring::Rational => "rational",
            Ring::Integer => "integer",
        }
    }
}

#[derive(Debug, Clone)]
pub struct HomologyBasis {
    pub p: usize,
    pub reps: Vec<ChainVector>,
    pub rank: usize,
    pub torsion: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct FastSequenceReport {
    pub p: usize,
    pub fast: bool,
    /// Cycle in A that bounds in X but not in B (present iff not fast).
    pub witness: Option<ChainVector>,
    /// The bounding chain in X certifying the witness is in the kernel.
    pub witness_bounds_in_x: Option<ChainVector>,
    pub ring: String,
    pub flags: Vec<String>,
}

impl FastSequenceReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "verdict": if self.fast { "fast" } else { "not_fast" },
            "witness": self.witness.as_ref().map(|w| w.to_json()),
            "witness_bounds_in_x": self.witness_bounds_in_x.as_ref().map(|w| w.to_json()),
            "ring": self.ring,
            "flags": self.flags,
        })
    }
}

fn mod2_rows(col: &[(u32, i32)]) -> Vec<u32> {
    col.iter().map(|&(r, _)| r).collect()
}

fn int_rows(col: &[(u32, i32)]) -> Vec<(u32, i64)> {
    col.iter().map(|&(r, s)| (r, s as i64)).collect()
}

/// Rank of the boundary operator d_p over mod 2.
pub(crate) fn rank_boundary_mod2(cx: &CubicalComplex, p: usize) -> usize {
    if p == 0 || p > cx.n {
        return 0;
    }
    let mut r = Mod2Reducer::new(false);
    for col in &cx.boundary[p] {
        r.insert(mod2_rows(col), None);
    }
    r.rank()
}

/// Integer column echelon of d_p; rank doubles as the rational rank.
pub(crate) fn int_reduce_boundary(
    cx: &CubicalComplex,
    p: usize,
    track: bool,
) -> Result<IntReducer> {
    let mut r = IntReducer::new(track);
    if p == 0 || p > cx.n {
        return Ok(r);
    }
    for (j, col) in cx.boundary[p].iter().enumerate() {
        let combo = if track { vec![(j as u32, 1)] } else { Vec::new() };
        r.insert(IntCol { rows: int_rows(col), combo })?;
    }
    Ok(r)
}

/// Vertex component labels from the 1-skeleton (union-find over edges).
pub(crate) fn skeleton_components(cx: &CubicalComplex) -> (Vec<usize>, usize) {
    let nv = cx.cell_count(0);
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    if cx.n >= 1 {
        for col in &cx.boundary[1] {
            let (a, b) = (col[0].0 as usize, col[1].0 as usize);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut labels = vec![usize::MAX; nv];
    let mut count = 0;
    for v in 0..nv {
        let r = find(&mut parent, v);
        if labels[r] == usize::MAX {
            labels[r] = count;
            count += 1;
        }
        labels[v] = labels[r];
    }
    (labels, count)
}

/// Reduced Betti number (and torsion of H_p for ring = integer).
pub fn betti(cx: &CubicalComplex, p: usize, ring: Ring) -> Result<(usize, Vec<i64>)> {
    if p > cx.n || cx.cell_count(0) == 0 {
        return Ok((0, Vec::new()));
    }
    let cp = cx.cell_count(p);
    let (rank_dp, rank_dp1, torsion) = match ring {
        Ring::Mod2 => {
            let (_, comps) = skeleton_components(cx);
            let rdp = if p == 0 {
                0
            } else if p == 1 {
                cx.cell_count(0) - comps
            } else {
                rank_boundary_mod2(cx, p)
            };
            (rdp, rank_boundary_mod2(cx, p + 1), Vec::new())
        }
        Ring::Rational | Ring::Integer => {
            let (_, comps) = skeleton_components(cx);
            let rdp = if p == 0 {
                0
            } else if p == 1 {
                cx.cell_count(0) - comps
            } else {
                int_reduce_boundary(cx, p, false)?.rank()
            };
            let red1 = int_reduce_boundary(cx, p + 1, false)?;
            let torsion = if ring == Ring::Integer {
                torsion_from_reducer(&red1)?
            } else {
                Vec::new()
            };
            (rdp, red1.rank(), torsion)
        }
    };
    let rank = if p == 0 {
        // reduced convention: components - 1
        let (_, comps) = skeleton_components(cx);
        comps - 1
    } else {
        cp - rank_dp - rank_dp1
    };
    Ok((rank, torsion))
}

fn torsion_from_reducer(red: &IntReducer) -> Result<Vec<i64>> {
    if red.unit_pivots() {
        return Ok(Vec::new());
    }
    let factors = snf_invariant_factors(red.dense())?;
    Ok(factors.into_iter().filter(|&f| f > 1).map(|f| f as i64).collect())
}

/// Spanning-forest data on the 1-skeleton: parent vertex, connecting edge
/// column index, depth; roots have parent = usize::MAX.
struct Forest {
    parent: Vec<usize>,
    parent_edge: Vec<usize>,
    depth: Vec<usize>,
    non_tree: Vec<usize>,
}

fn edge_endpoints(cx: &CubicalComplex, j: usize) -> (usize, usize) {
    // boundary column of an edge: (lo, -1), (hi, +1) in some row order
    let col = &cx.boundary[1][j];
    if col[0].1 < 0 {
        (col[0].0 as usize, col[1].0 as usize)
    } else {
        (col[1].0 as usize, col[0].0 as usize)
    }
}

fn spanning_forest(cx: &CubicalComplex) -> Forest {
    let nv = cx.cell_count(0);
    let mut uf: Vec<usize> = (0..nv).collect();
    fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    let ne = cx.cell_count(1);
    let mut tree_adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    let mut non_tree = Vec::new();
    for j in 0..ne {
        let (lo, hi) = edge_endpoints(cx, j);
        let (ra, rb) = (find(&mut uf, lo), find(&mut uf, hi));
        if ra != rb {
            uf[ra.max(rb)] = ra.min(rb);
            tree_adj[lo].push((hi, j));
            tree_adj[hi].push((lo, j));
        } else {
            non_tree.push(j);
        }
    }
    let mut parent = vec![usize::MAX; nv];
    let mut parent_edge = vec![usize::MAX; nv];
    let mut depth = vec![0usize; nv];
    let mut visited = vec![false; nv];
    for root in 0..nv {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(v, e) in &tree_adj[u] {
                if !visited[v] {
                    visited[v] = true;
                    parent[v] = u;
                    parent_edge[v] = e;
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    Forest { parent, parent_edge, depth, non_tree }
}

/// Fundamental cycle of a non-tree edge: the edge plus the signed tree path
/// from its head back to its tail.
fn fundamental_cycle(cx: &CubicalComplex, forest: &Forest, j: usize) -> ChainVector {
    let (lo, hi) = edge_endpoints(cx, j);
    let mut terms: Vec<(CellKey, i64)> = vec![(cx.cells[1][j], 1)];
    // climb both endpoints to their LCA; tree path runs hi -> lca -> lo
    let (mut a, mut b) = (hi, lo);
    let mut up_a: Vec<usize> = Vec::new(); // edges traveled child->parent from hi
    let mut up_b: Vec<usize> = Vec::new();
    while forest.depth[a] > forest.depth[b] {
        up_a.push(forest.parent_edge[a]);
        a = forest.parent[a];
    }
    while forest.depth[b] > forest.depth[a] {
        up_b.push(forest.parent_edge[b]);
        b = forest.parent[b];
    }
    while a != b {
        up_a.push(forest.parent_edge[a]);
        a = forest.parent[a];
        up_b.push(forest.parent_edge[b]);
        b = forest.parent[b];
    }
    // walking hi -> lca uses up_a edges; an edge traveled from x toward its
    // parent y carries +1 when the travel direction matches lo -> hi
    let mut add = |e: usize, from_child: bool, child: usize| {
        let (elo, _) = edge_endpoints(cx, e);
        let travel_from = if from_child { child } else { usize::MAX };
        let sign = if travel_from == elo { 1 } else { -1 };
        terms.push((cx.cells[1][e], sign));
    };
    let mut node = hi;
    for &e in &up_a {
        add(e, true, node);
        node = forest.parent[node];
    }
    // then lca -> lo descends along up_b reversed; travel direction is
    // parent -> child, i.e. from the edge's parent endpoint
    let mut desc = up_b.clone();
    desc.reverse();
    // reconstruct the chain of vertices from lo upward to know each child
    let mut chain_children = Vec::with_capacity(up_b.len());
    let mut nb = lo;
    for _ in 0..up_b.len() {
        chain_children.push(nb);
        nb = forest.parent[nb];
    }
    chain_children.reverse();
    for (idx, &e) in desc.iter().enumerate() {
        let child = chain_children[idx];
        let (elo, _) = edge_endpoints(cx, e);
        // traveling parent -> child: +1 iff the edge's lo endpoint is the parent
        let parent_v = forest.parent[child];
        let sign = if parent_v == elo { 1 } else { -1 };
        terms.push((cx.cells[1][e], sign));
    }
    let z = ChainVector::from_terms(1, terms);
    debug_assert!(z.boundary().is_zero(), "fundamental cycle is not a cycle");
    z
}

/// Explicit integer cycles spanning H1 over the rationals.
pub fn h1_basis(cx: &CubicalComplex) -> Result<HomologyBasis> {
    if cx.n < 1 || cx.cell_count(1) == 0 {
        return Ok(HomologyBasis { p: 1, reps: Vec::new(), rank: 0, torsion: Vec::new() });
    }
    let forest = spanning_forest(cx);
    let red2 = int_reduce_boundary(cx, 2, false)?;
    let (_, comps) = skeleton_components(cx);
    let rank = cx.cell_count(1) - (cx.cell_count(0) - comps) - red2.rank();
    let torsion = torsion_from_reducer(&red2)?;
    let mut reps = Vec::with_capacity(rank);
    if rank > 0 {
        // mod-2 selection of independent fundamental cycles, falling back to
        // the integer echelon when mod-2 rank disagrees (2-torsion artifacts)
        let mut sel = Mod2Reducer::new(false);
        for col in &cx.boundary[2] {
            sel.insert(mod2_rows(col), None);
        }
        let mut chosen = Vec::new();
        for &j in &forest.non_tree {
            let z = fundamental_cycle(cx, &forest, j);
            let rows: Vec<u32> = cx
                .rows_of(&z)?
                .iter()
                .filter(|&&(_, c)| c % 2 != 0)
                .map(|&(r, _)| r)
                .collect();
            if sel.insert(rows, None).is_none() {
                chosen.push(z);
            }
        }
        if chosen.len() == rank {
            reps = chosen;
        } else {
            // exact rational selection
            let mut sel = red2.clone();
            for &j in &forest.non_tree {
                let z = fundamental_cycle(cx, &forest, j);
                let rows = cx
                    .rows_of(&z)?
                    .iter()
                    .map(|&(r, c)| (r, c))
                    .collect::<Vec<_>>();
                if sel.insert(IntCol { rows, combo: Vec::new() })?.is_none() {
                    reps.push(z);
                }
                if reps.len() == rank {
                    break;
                }
            }
        }
        if reps.len() != rank {
            return Err(Error::Invariant(format!(
                "h1 basis selection found {} of {} generators",
                reps.len(),
                rank
            )));
        }
    }
    Ok(HomologyBasis { p: 1, reps, rank, torsion })
}

/// Solve d g = z over the chosen ring. For ring = rational the returned
/// chain may certify a scaled relation d g = m z (integer chains cannot
/// carry rational coefficients); solvability itself is exact.
pub fn bounds_in(cx: &CubicalComplex, z: &ChainVector, ring: Ring) -> Result<Option<ChainVector>> {
    if z.p >= cx.n {
        return Ok(if z.is_zero() { Some(ChainVector::zero(z.p + 1)) } else { None });
    }
    let rows = cx.rows_of(z)?;
    if !z.boundary().is_zero() {
        return Err(Error::Precondition("bounds_in argument is not a cycle".into()));
    }
    if z.is_zero() {
        return Ok(Some(ChainVector::zero(z.p + 1)));
    }
    match ring {
        Ring::Mod2 => {
            let mut r = Mod2Reducer::new(true);
            for (j, col) in cx.boundary[z.p + 1].iter().enumerate() {
                r.insert(mod2_rows(col), Some(j as u32));
            }
            let odd: Vec<u32> =
                rows.iter().filter(|&&(_, c)| c % 2 != 0).map(|&(r, _)| r).collect();
            Ok(r.probe(odd).map(|combo| {
                cx.chain_of_rows(
                    z.p + 1,
                    &combo.iter().map(|&j| (j, 1i64)).collect::<Vec<_>>(),
                )
            }))
        }
        Ring::Integer => {
            let r = int_reduce_boundary(cx, z.p + 1, true)?;
            Ok(r.probe(&rows)?.map(|combo| cx.chain_of_rows(z.p + 1, &combo)))
        }
        Ring::Rational => {
            let mut r = int_reduce_boundary(cx, z.p + 1, true)?;
            // integer solution first; otherwise decide rational solvability
            if let Some(combo) = r.probe(&rows)? {
                return Ok(Some(cx.chain_of_rows(z.p + 1, &combo)));
            }
            let tag = cx.cell_count(z.p + 1) as u32;
            let col = IntCol { rows, combo: vec![(tag, 1)] };
            match r.insert(col)? {
                Some(combo) => {
                    let g: Vec<(u32, i64)> =
                        combo.into_iter().filter(|&(t, _)| t != tag).collect();
                    Ok(Some(cx.chain_of_rows(z.p + 1, &g)))
                }
                None => Ok(None),
            }
        }
    }
}

/// Decides whether every p-cycle of A that bounds in X also bounds in B,
/// for complexes A within B within X. Kernel generators of H_p(A) -> H_p(X)
/// are produced by exact integer reduction; any not_fast verdict carries an
/// integer-certified witness.
pub fn fast_sequence_check(
    a: &CubicalComplex,
    b: &CubicalComplex,
    x: &CubicalComplex,
    p: usize,
) -> Result<FastSequenceReport> {
    if !a.subcomplex_of(b) || !b.subcomplex_of(x) {
        return Err(Error::Precondition("fast_sequence_check needs A within B within X".into()));
    }
    let mut report = FastSequenceReport {
        p,
        fast: true,
        witness: None,
        witness_bounds_in_x: None,
        ring: "integer".into(),
        flags: Vec::new(),
    };
    if a.cell_count(p) == 0 {
        report.flags.push("vacuous-empty-A".into());
        return Ok(report);
    }
    if p == 0 {
        return fast_check_p0(a, b, x, report);
    }
    if p != 1 {
        return Err(Error::Precondition(format!("fast_sequence_check supports p in {{0,1}}, got {p}")));
    }
    let basis = h1_basis(a)?;
    if basis.rank == 0 {
        report.flags.push("trivial-H1-A".into());
        return Ok(report);
    }
    // if every generator of H1(A) already bounds in B, then so does any
    // kernel combination, and the costly reduction of X can be skipped
    let rb = int_reduce_boundary(b, p + 1, false)?;
    let mut all_die = true;
    for z in &basis.reps {
        if rb.probe(&b.rows_of(z)?)?.is_none() {
            all_die = false;
            break;
        }
    }
    if all_die {
        report.flags.push("all-classes-bound-in-B".into());
        return Ok(report);
    }
    // kernel of H1(A) -> H1(X): insert representatives into X's integer
    // echelon; a dependency relation is an integer combination of reps
    // that bounds rationally in X
    let rx = int_reduce_boundary(x, p + 1, true)?;
    let mut rk = rx.clone();
    let base_tag = x.cell_count(p + 1) as u32;
    let mut kernel: Vec<Vec<(u32, i64)>> = Vec::new();
    for (i, z) in basis.reps.iter().enumerate() {
        let rows = x.rows_of(z)?;
        let col = IntCol { rows, combo: vec![(base_tag + i as u32, 1)] };
        if let Some(combo) = rk.insert(col)? {
            let coeffs: Vec<(u32, i64)> = combo
                .into_iter()
                .filter(|&(t, _)| t >= base_tag)
                .map(|(t, c)| (t - base_tag, c))
                .collect();
            kernel.push(coeffs);
        }
    }
    if kernel.is_empty() {
        report.flags.push("injective-into-X".into());
        return Ok(report);
    }
    for coeffs in kernel {
        let w = combine_reps(&basis.reps, &coeffs);
        debug_assert!(w.boundary().is_zero());
        let w_rows_x = x.rows_of(&w)?;
        let gx = match rx.probe(&w_rows_x)? {
            Some(combo) => Some(x.chain_of_rows(p + 1, &combo)),
            None => {
                // rational kernel element whose class is torsion in X
                report.flags.push("kernel-generator-torsion-in-X".into());
                None
            }
        };
        if gx.is_none() {
            continue;
        }
        let w_rows_b = b.rows_of(&w)?;
        if rb.probe(&w_rows_b)?.is_none() {
            report.fast = false;
            report.witness = Some(w);
            report.witness_bounds_in_x = gx;
            return Ok(report);
        }
    }
    Ok(report)
}

fn combine_reps(reps: &[ChainVector], coeffs: &[(u32, i64)]) -> ChainVector {
    let terms: Vec<(CellKey, i64)> = coeffs
        .iter()
        .flat_map(|&(i, c)| {
            reps[i as usize].coeffs.iter().map(move |&(k, v)| (k, c * v))
        })
        .collect();
    ChainVector::from_terms(1, terms)
}

/// p = 0 case: A-components merging in X must already merge in B.
fn fast_check_p0(
    a: &CubicalComplex,
    b: &CubicalComplex,
    x: &CubicalComplex,
    mut report: FastSequenceReport,
) -> Result<FastSequenceReport> {
    let (la, ca) = skeleton_components(a);
    let (lb, _) = skeleton_components(b);
    let (lx, _) = skeleton_components(x);
    // representative vertex per A-component (smallest index = deterministic)
    let mut rep_of = vec![usize::MAX; ca];
    for v in 0..a.cell_count(0) {
        if rep_of[la[v]] == usize::MAX {
            rep_of[la[v]] = v;
        }
    }
    // group A-component reps by their X-component; within a group all pairs
    // are in the kernel and must share a B-component
    let mut by_x: HashMap<usize, Vec<usize>> = HashMap::new();
    for &v in &rep_of {
        let key = a.cells[0][v];
        let xv = x.index[0][&key] as usize;
        by_x.entry(lx[xv]).or_default().push(v);
    }
    let mut groups: Vec<(usize, Vec<usize>)> = by_x.into_iter().collect();
    groups.sort_unstable();
    for (_, members) in groups {
        if members.len() < 2 {
            continue;
        }
        let b_of = |v: usize| {
            let key = a.cells[0][v];
            lb[b.index[0][&key] as usize]
        };
        let first = members[0];
        for &v in &members[1..] {
            if b_of(v) != b_of(first) {
                report.fast = false;
                let w = ChainVector::from_terms(
                    0,
                    [(a.cells[0][v], 1i64), (a.cells[0][first], -1)],
                );
                report.witness = Some(w);
                return Ok(report);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::grid::{BallSpec, GridSpec, RestrictMode, VoxelDomain};

    fn annulus_2d(res: usize) -> VoxelDomain {
        let spec = GridSpec::cube(2, res, -1.0, 1.0).unwrap();
        let mut d = VoxelDomain::empty(spec.clone());
        for c in spec.cells() {
            let p = spec.center(c);
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            if r > 0.35 && r < 0.9 {
                d.set(c, true);
            }
        }
        d
    }

    fn disk_2d(res: usize) -> VoxelDomain {
        let spec = GridSpec::cube(2, res, -1.0, 1.0).unwrap();
        let mut d = VoxelDomain::empty(spec.clone());
        for c in spec.cells() {
            let p = spec.center(c);
            if (p[0] * p[0] + p[1] * p[1]).sqrt() < 0.9 {
                d.set(c, true);
            }
        }
        d
    }

    /// Hollow torus shell around the circle of radius R in the z=0 plane.
    pub(crate) fn torus_shell(res: usize, rr: f64, tube: f64, thick: f64) -> VoxelDomain {
        let spec = GridSpec::cube(3, res, -1.0, 1.0).unwrap();
        let mut d = VoxelDomain::empty(spec.clone());
        for c in spec.cells() {
            let p = spec.center(c);
            let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let q = ((rho - rr) * (rho - rr) + p[2] * p[2]).sqrt();
            if (q - tube).abs() < thick {
                d.set(c, true);
            }
        }
        d
    }

    #[test]
    fn solid_box_contractible() {
        let d = VoxelDomain::full(GridSpec::new(3, [6, 6, 6], 1.0, [0.0; 3]).unwrap());
        let cx = build_complex(&d);
        for p in 0..=3 {
            for ring in [Ring::Mod2, Ring::Rational, Ring::Integer] {
                let (r, t) = betti(&cx, p, ring).unwrap();
                assert_eq!((r, t.len()), (0, 0), "p={p} ring={ring:?}");
            }
        }
    }

    #[test]
    fn annulus_betti_and_basis() {
        let cx = build_complex(&annulus_2d(24));
        assert_eq!(betti(&cx, 0, Ring::Rational).unwrap().0, 0);
        assert_eq!(betti(&cx, 1, Ring::Mod2).unwrap().0, 1);
        assert_eq!(betti(&cx, 1, Ring::Integer).unwrap(), (1, vec![]));
        let basis = h1_basis(&cx).unwrap();
        assert_eq!(basis.rank, 1);
        // the representative must not bound in the annulus but must bound in
        // the filled disk
        let z = &basis.reps[0];
        assert!(bounds_in(&cx, z, Ring::Mod2).unwrap().is_none());
        assert!(bounds_in(&cx, z, Ring::Integer).unwrap().is_none());
        let disk = build_complex(&disk_2d(24));
        let g = bounds_in(&disk, z, Ring::Integer).unwrap().expect("bounds in disk");
        assert_eq!(g.boundary(), *z);
    }

    #[test]
    fn torus_shell_betti() {
        let cx = build_complex(&torus_shell(24, 0.55, 0.3, 0.12));
        assert_eq!(betti(&cx, 0, Ring::Rational).unwrap().0, 0);
        assert_eq!(betti(&cx, 1, Ring::Rational).unwrap().0, 2);
        assert_eq!(betti(&cx, 2, Ring::Rational).unwrap().0, 1);
        assert_eq!(betti(&cx, 1, Ring::Integer).unwrap().1, Vec::<i64>::new());
    }

    #[test]
    fn euler_identity() {
        for d in [annulus_2d(20), disk_2d(16), torus_shell(20, 0.55, 0.3, 0.15)] {
            let cx = build_complex(&d);
            let mut chi = 0i64;
            for p in 0..=cx.n {
                let (r, _) = betti(&cx, p, Ring::Rational).unwrap();
                let term = r as i64 + if p == 0 { 1 } else { 0 }; // unreduced beta0
                chi += if p % 2 == 0 { term } else { -term };
            }
            assert_eq!(cx.euler_characteristic(), chi);
        }
    }

    #[test]
    fn square_boundary_bounds() {
        let spec = GridSpec::new(2, [3, 3, 1], 1.0, [0.0; 3]).unwrap();
        let mut d = VoxelDomain::empty(spec);
        d.set([1, 1, 0], true);
        let cx = build_complex(&d);
        let sq = ChainVector::from_terms(2, [(pack([3, 3, 0]), 1)]);
        let z = sq.boundary();
        for ring in [Ring::Mod2, Ring::Rational, Ring::Integer] {
            let g = bounds_in(&cx, &z, ring).unwrap().expect("square boundary bounds");
            assert_eq!(g, sq, "ring {ring:?}");
        }
    }

    #[test]
    fn bounds_in_rejects_non_cycle() {
        let spec = GridSpec::new(2, [3, 3, 1], 1.0, [0.0; 3]).unwrap();
        let mut d = VoxelDomain::empty(spec);
        d.set([1, 1, 0], true);
        let cx = build_complex(&d);
        let not_cycle = ChainVector::from_terms(1, [(pack([3, 2, 0]), 1)]);
        assert!(matches!(
            bounds_in(&cx, &not_cycle, Ring::Mod2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn fast_check_trivial_cases() {
        let ann = build_complex(&annulus_2d(16));
        let disk = build_complex(&disk_2d(16));
        // B = X: the second map is the identity, trivially fast
        let r = fast_sequence_check(&ann, &disk, &disk, 1).unwrap();
        assert!(r.fast);
        // X with trivial H1 still fast when B already fills the hole
        let spec = GridSpec::cube(2, 16, -1.0, 1.0).unwrap();
        let mut filled = VoxelDomain::empty(spec.clone());
        for c in spec.cells() {
            let p = spec.center(c);
            if (p[0] * p[0] + p[1] * p[1]).sqrt() < 0.92 {
                filled.set(c, true);
            }
        }
        let b = build_complex(&filled);
        let r = fast_sequence_check(&ann, &b, &disk, 1).unwrap();
        assert!(r.fast);
    }

    #[test]
    fn fast_check_detects_annulus_hole() {
        // A = B = annulus, X = disk: the hole cycle bounds in X but not in
        // B, so the sequence is not fast and the hole is the witness
        let ann = build_complex(&annulus_2d(16));
        let disk = build_complex(&disk_2d(16));
        let r = fast_sequence_check(&ann, &ann, &disk, 1).unwrap();
        assert!(!r.fast);
        let w = r.witness.expect("witness");
        assert!(w.boundary().is_zero());
        assert!(bounds_in(&disk, &w, Ring::Integer).unwrap().is_some());
        assert!(bounds_in(&ann, &w, Ring::Integer).unwrap().is_none());
    }

    #[test]
    fn fast_check_p0() {
        // A: two points, X: connected segment containing both, B narrow
        let spec = GridSpec::new(2, [9, 1, 1], 1.0, [0.0; 3]).unwrap();
        let mut xdom = VoxelDomain::empty(spec.clone());
        for x in 0..9 {
            xdom.set([x, 0, 0], true);
        }
        let mut adom = VoxelDomain::empty(spec.clone());
        adom.set([0, 0, 0], true);
        adom.set([8, 0, 0], true);
        let mut bdom = adom.clone();
        bdom.set([1, 0, 0], true);
        bdom.set([7, 0, 0], true);
        let a = build_complex(&adom);
        let b = build_complex(&bdom);
        let x = build_complex(&xdom);
        let r = fast_sequence_check(&a, &b, &x, 0).unwrap();
        assert!(!r.fast);
        assert!(r.witness.is_some());
        let r = fast_sequence_check(&a, &x, &x, 0).unwrap();
        assert!(r.fast);
    }

    #[test]
    fn restricted_subcomplex_inclusion() {
        let d = annulus_2d(20);
        let ball = BallSpec::euclidean([0.0, 0.6, 0.0], 0.5);
        let a = build_complex(&d.restrict(&ball, RestrictMode::KeepInside).unwrap());
        let full = build_complex(&d);
        assert!(a.subcomplex_of(&full));
    }
}
