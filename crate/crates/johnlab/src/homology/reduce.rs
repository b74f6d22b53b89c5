//! Column-echelon reducers for sparse boundary matrices.
//!
//! The mod-2 reducer is the fast path for ranks and bounding queries. The
//! integer reducer uses only unimodular two-column operations (subtract a
//! multiple, or a determinant-one Bezout combination), so its columns span
//! exactly the same lattice as the input; membership in that lattice is then
//! decided by a greedy divisibility sweep, giving exact integer answers
//! without a full Smith normal form. Torsion is read off the echelon pivots:
//! an all-unit pivot set certifies a torsion-free quotient (it exhibits a
//! determinant-one maximal minor), otherwise a dense Smith normal form runs
//! on the pivot block.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// xor-merge of two sorted index lists.
fn xor_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    out
}

/// Mod-2 column echelon keyed by the largest nonzero row ("low") of each
/// stored column. Optionally tracks which tagged input columns combine into
/// each stored column.
#[derive(Debug, Clone, Default)]
pub struct Mod2Reducer {
    by_low: HashMap<u32, usize>,
    cols: Vec<Vec<u32>>,
    combos: Vec<Vec<u32>>,
    track: bool,
}

impl Mod2Reducer {
    pub fn new(track: bool) -> Self {
        Mod2Reducer { track, ..Default::default() }
    }

    pub fn rank(&self) -> usize {
        self.cols.len()
    }

    /// Reduce and store a column. Returns Some(tags) when the column reduced
    /// to zero, i.e. it lies in the span of what was inserted before; the
    /// tags give the combination (including this column's own tag).
    pub fn insert(&mut self, mut rows: Vec<u32>, tag: Option<u32>) -> Option<Vec<u32>> {
        let mut combo: Vec<u32> = tag.into_iter().collect();
        while let Some(&low) = rows.last() {
            match self.by_low.get(&low) {
                Some(&slot) => {
                    rows = xor_sorted(&rows, &self.cols[slot]);
                    if self.track {
                        combo = xor_sorted(&combo, &self.combos[slot]);
                    }
                }
                None => {
                    self.by_low.insert(low, self.cols.len());
                    self.cols.push(rows);
                    self.combos.push(if self.track { combo } else { Vec::new() });
                    return None;
                }
            }
        }
        Some(combo)
    }

    /// Non-mutating membership probe; Some(tags) when `rows` lies in the
    /// span of the stored columns.
    pub fn probe(&self, mut rows: Vec<u32>) -> Option<Vec<u32>> {
        let mut combo: Vec<u32> = Vec::new();
        while let Some(&low) = rows.last() {
            let &slot = self.by_low.get(&low)?;
            rows = xor_sorted(&rows, &self.cols[slot]);
            if self.track {
                combo = xor_sorted(&combo, &self.combos[slot]);
            }
        }
        Some(combo)
    }
}

/// Sparse integer column: rows ascending, nonzero coefficients, low = last.
#[derive(Debug, Clone, Default)]
pub struct IntCol {
    pub rows: Vec<(u32, i64)>,
    pub combo: Vec<(u32, i64)>,
}

fn add_scaled(dst: &[(u32, i64)], src: &[(u32, i64)], k: i64) -> Result<Vec<(u32, i64)>> {
    let mut out = Vec::with_capacity(dst.len() + src.len());
    let (mut i, mut j) = (0, 0);
    let budget = |v: Option<i64>| v.ok_or(Error::CoefficientBudget);
    while i < dst.len() || j < src.len() {
        if j == src.len() || (i < dst.len() && dst[i].0 < src[j].0) {
            out.push(dst[i]);
            i += 1;
        } else if i == dst.len() || src[j].0 < dst[i].0 {
            out.push((src[j].0, budget(src[j].1.checked_mul(k))?));
            j += 1;
        } else {
            let v = budget(
                budget(src[j].1.checked_mul(k))?.checked_add(dst[i].1),
            )?;
            if v != 0 {
                out.push((dst[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    Ok(out)
}

fn scale(col: &[(u32, i64)], k: i64) -> Result<Vec<(u32, i64)>> {
    col.iter()
        .map(|&(r, c)| c.checked_mul(k).map(|v| (r, v)).ok_or(Error::CoefficientBudget))
        .collect()
}

fn combine(a: &[(u32, i64)], ka: i64, b: &[(u32, i64)], kb: i64) -> Result<Vec<(u32, i64)>> {
    add_scaled(&scale(a, ka)?, b, kb)
}

/// Extended gcd: returns (g, u, v) with u*a + v*b = g, g > 0.
fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a >= 0 {
            (a, 1, 0)
        } else {
            (-a, -1, 0)
        }
    } else {
        let (g, u, v) = egcd(b, a.rem_euclid(b));
        (g, v, u - a.div_euclid(b) * v)
    }
}

/// Integer column echelon built with unimodular column operations only, so
/// the stored columns generate the same lattice as everything inserted.
#[derive(Debug, Clone, Default)]
pub struct IntReducer {
    by_low: HashMap<u32, usize>,
    cols: Vec<IntCol>,
    track: bool,
}

impl IntReducer {
    pub fn new(track: bool) -> Self {
        IntReducer { track, ..Default::default() }
    }

    pub fn rank(&self) -> usize {
        self.cols.len()
    }

    pub fn pivots(&self) -> Vec<i64> {
        let mut lows: Vec<(u32, i64)> =
            self.cols.iter().map(|c| *c.rows.last().unwrap()).collect();
        lows.sort_unstable_by_key(|&(r, _)| r);
        lows.into_iter().map(|(_, p)| p).collect()
    }

    /// Reduce and store; Some(combo) when the column is rationally dependent
    /// on earlier insertions (the combo is an exact integer relation that
    /// includes this column's own tag with nonzero coefficient).
    pub fn insert(&mut self, mut col: IntCol) -> Result<Option<Vec<(u32, i64)>>> {
        if !self.track {
            col.combo.clear();
        }
        loop {
            let Some(&(low, a)) = col.rows.last() else {
                return Ok(Some(col.combo));
            };
            match self.by_low.get(&low).copied() {
                None => {
                    self.by_low.insert(low, self.cols.len());
                    self.cols.push(col);
                    return Ok(None);
                }
                Some(slot) => {
                    let b = self.cols[slot].rows.last().unwrap().1;
                    if a % b == 0 {
                        let k = -(a / b);
                        col.rows = add_scaled(&col.rows, &self.cols[slot].rows, k)?;
                        if self.track {
                            col.combo = add_scaled(&col.combo, &self.cols[slot].combo, k)?;
                        }
                    } else {
                        // det-one swap: stored gets pivot gcd, incoming loses the row
                        let (g, u, v) = egcd(b, a);
                        let e_rows = combine(&self.cols[slot].rows, u, &col.rows, v)?;
                        let c_rows =
                            combine(&col.rows, b / g, &self.cols[slot].rows, -(a / g))?;
                        if self.track {
                            let e_combo =
                                combine(&self.cols[slot].combo, u, &col.combo, v)?;
                            let c_combo =
                                combine(&col.combo, b / g, &self.cols[slot].combo, -(a / g))?;
                            self.cols[slot].combo = e_combo;
                            col.combo = c_combo;
                        }
                        self.cols[slot].rows = e_rows;
                        col.rows = c_rows;
                        debug_assert_eq!(self.cols[slot].rows.last().unwrap(), &(low, g));
                    }
                }
            }
        }
    }

    /// Exact lattice-membership probe (non-mutating): Some(combo over stored
    /// columns' tags) iff `rows` is an integer combination of the stored
    /// columns. Soundness rests on the distinct lows: the coefficient at the
    /// current largest row is forced, and must divide exactly.
    pub fn probe(&self, rows: &[(u32, i64)]) -> Result<Option<Vec<(u32, i64)>>> {
        let mut cur = rows.to_vec();
        let mut combo: HashMap<u32, i64> = HashMap::new();
        while let Some(&(low, a)) = cur.last() {
            let Some(&slot) = self.by_low.get(&low) else {
                return Ok(None);
            };
            let b = self.cols[slot].rows.last().unwrap().1;
            if a % b != 0 {
                return Ok(None);
            }
            let k = a / b;
            cur = add_scaled(&cur, &self.cols[slot].rows, -k)?;
            if self.track {
                for &(t, c) in &self.cols[slot].combo {
                    let e = combo.entry(t).or_insert(0);
                    *e = e
                        .checked_add(c.checked_mul(k).ok_or(Error::CoefficientBudget)?)
                        .ok_or(Error::CoefficientBudget)?;
                }
            }
        }
        let mut out: Vec<(u32, i64)> = combo.into_iter().filter(|&(_, c)| c != 0).collect();
        out.sort_unstable();
        Ok(Some(out))
    }

    /// Rational span membership, decided by inserting into a clone.
    pub fn probe_rational(&self, rows: &[(u32, i64)]) -> Result<bool> {
        let mut clone = self.clone();
        clone.track = false;
        let col = IntCol { rows: rows.to_vec(), combo: Vec::new() };
        Ok(clone.insert(col)?.is_some())
    }

    /// True when the cokernel lattice quotient is certified torsion-free:
    /// every pivot is a unit, exhibiting a determinant-one maximal minor.
    pub fn unit_pivots(&self) -> bool {
        self.cols.iter().all(|c| c.rows.last().unwrap().1.abs() == 1)
    }

    /// Dense matrix of the stored columns (rows remapped to a compact range),
    /// for the Smith normal form fallback.
    pub fn dense(&self) -> Vec<Vec<i128>> {
        let mut row_ids: Vec<u32> =
            self.cols.iter().flat_map(|c| c.rows.iter().map(|&(r, _)| r)).collect();
        row_ids.sort_unstable();
        row_ids.dedup();
        let pos: HashMap<u32, usize> =
            row_ids.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let mut m = vec![vec![0i128; self.cols.len()]; row_ids.len()];
        for (j, c) in self.cols.iter().enumerate() {
            for &(r, v) in &c.rows {
                m[pos[&r]][j] = v as i128;
            }
        }
        m
    }
}

const SNF_BUDGET: i128 = 1 << 100;
const SNF_SIZE_LIMIT: usize = 4_000_000;

/// Invariant factors of a dense integer matrix by Smith normal form with
/// smallest-nonzero-entry pivoting. Errors on coefficient blowup.
pub fn snf_invariant_factors(mut m: Vec<Vec<i128>>) -> Result<Vec<i128>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    if rows * cols > SNF_SIZE_LIMIT {
        return Err(Error::CoefficientBudget);
    }
    let mut factors = Vec::new();
    let mut top = 0usize;
    while top < rows && top < cols {
        // find smallest nonzero entry in the remaining block
        let mut pivot: Option<(usize, usize)> = None;
        for i in top..rows {
            for j in top..cols {
                if m[i][j] != 0
                    && pivot.map_or(true, |(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(top, pi);
        for row in m.iter_mut() {
            row.swap(top, pj);
        }
        loop {
            let p = m[top][top];
            let mut clean = true;
            for i in top + 1..rows {
                let q = m[i][top] / p;
                if q != 0 {
                    for j in top..cols {
                        let s = q.checked_mul(m[top][j]).ok_or(Error::CoefficientBudget)?;
                        m[i][j] = m[i][j].checked_sub(s).ok_or(Error::CoefficientBudget)?;
                        if m[i][j].abs() > SNF_BUDGET {
                            return Err(Error::CoefficientBudget);
                        }
                    }
                }
                if m[i][top] != 0 {
                    clean = false;
                }
            }
            for j in top + 1..cols {
                let q = m[top][j] / p;
                if q != 0 {
                    for row in m.iter_mut().skip(top) {
                        let s = q.checked_mul(row[top]).ok_or(Error::CoefficientBudget)?;
                        row[j] = row[j].checked_sub(s).ok_or(Error::CoefficientBudget)?;
                        if row[j].abs() > SNF_BUDGET {
                            return Err(Error::CoefficientBudget);
                        }
                    }
                }
                if m[top][j] != 0 {
                    clean = false;
                }
            }
            if clean {
                break;
            }
            // a nonzero remainder survives somewhere; pull the smallest
            // entry of the cross back into the pivot position
            let mut best = (top, top);
            for i in top..rows {
                if m[i][top] != 0 && m[i][top].abs() < m[best.0][best.1].abs() {
                    best = (i, top);
                }
            }
            for j in top..cols {
                if m[top][j] != 0 && m[top][j].abs() < m[best.0][best.1].abs() {
                    best = (top, j);
                }
            }
            m.swap(top, best.0);
            for row in m.iter_mut() {
                row.swap(top, best.1);
            }
        }
        factors.push(m[top][top].abs());
        top += 1;
    }
    // enforce the divisibility chain d1 | d2 | ...
    for i in 0..factors.len() {
        for j in i + 1..factors.len() {
            let a = factors[i];
            let b = factors[j];
            let g = gcd128(a, b);
            factors[i] = g;
            factors[j] = a / g * b;
        }
    }
    Ok(factors)
}

fn gcd128(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd128(b, a % b)
    }
}
