//! Quasi-cyclic lifting of a protograph with a circulant-based PEG search.
//!
//! Base cell `(i, j)` with multiplicity `b` becomes a `Z x Z` block that is the
//! sum of `b` distinct cyclically shifted identities. A shift `s` connects
//! check `i*Z + r` to variable `j*Z + (r + s) mod Z`. Variable `j*Z + z`
//! inherits the block and role of base column `j`.
//!
//! The search adds one circulant at a time. Because the graph under
//! construction stays invariant under the simultaneous cyclic shift of all
//! blocks, the shortest cycle through any edge of a new circulant equals the
//! shortest cycle through its edge at variable `j*Z`, so a single BFS per
//! candidate gives the exact local girth.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf2::SparseMatrix;
use crate::protograph::{CodeSpec, ColumnRole, ProtographError};
use crate::seeds::mix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error("lifting factor {z} is too small (need at least {min})")]
    InvalidZ { z: usize, min: usize },
    #[error("girth target must be 6 or 8, got {0}")]
    InvalidGirthTarget(usize),
    #[error("lifted girth {girth} is below the required {required}")]
    GirthInfeasible { girth: usize, required: usize },
    #[error("invalid circulant table: {0}")]
    InvalidShifts(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Spec(#[from] ProtographError),
}

type Result<T> = std::result::Result<T, LiftError>;

/// Shift values for every base cell, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CirculantSpec {
    pub z: usize,
    pub rows: usize,
    pub cols: usize,
    pub shifts: Vec<Vec<u32>>,
}

impl CirculantSpec {
    pub fn cell(&self, i: usize, j: usize) -> &[u32] {
        &self.shifts[i * self.cols + j]
    }
}

/// A lifted QC code with its parity-check matrix and bit layout.
#[derive(Clone, Debug)]
pub struct LiftedCode {
    spec: CodeSpec,
    circ: CirculantSpec,
    h: SparseMatrix,
    info_positions: Vec<usize>,
    block_map: Vec<usize>,
    girth: Option<usize>,
}

impl LiftedCode {
    /// Expands a circulant table into the parity-check matrix.
    pub fn from_circulants(spec: CodeSpec, circ: CirculantSpec) -> Result<Self> {
        let (m, n, z) = (spec.base.rows(), spec.base.cols(), circ.z);
        if circ.rows != m || circ.cols != n || circ.shifts.len() != m * n {
            return Err(LiftError::InvalidShifts("table does not match base".into()));
        }
        if z < spec.base.max_entry() as usize || z == 0 {
            return Err(LiftError::InvalidZ {
                z,
                min: (spec.base.max_entry() as usize).max(1),
            });
        }
        for i in 0..m {
            for j in 0..n {
                let cell = circ.cell(i, j);
                if cell.len() != spec.base.get(i, j) as usize {
                    return Err(LiftError::InvalidShifts(format!(
                        "cell ({i},{j}) has {} shifts, base says {}",
                        cell.len(),
                        spec.base.get(i, j)
                    )));
                }
                let mut sorted = cell.to_vec();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != cell.len() || sorted.last().is_some_and(|&s| s as usize >= z) {
                    return Err(LiftError::InvalidShifts(format!(
                        "cell ({i},{j}) shifts must be distinct and below {z}"
                    )));
                }
            }
        }
        let h = expand(&circ);
        let girth = qc_girth(&h, z, n);
        let info_positions = spec
            .layout
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == ColumnRole::Info)
            .flat_map(|(j, _)| j * z..(j + 1) * z)
            .collect();
        let block_map = (0..n * z).map(|b| spec.layout.block_of(b / z)).collect();
        Ok(Self {
            spec,
            circ,
            h,
            info_positions,
            block_map,
            girth,
        })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn circulants(&self) -> &CirculantSpec {
        &self.circ
    }

    pub fn h(&self) -> &SparseMatrix {
        &self.h
    }

    pub fn z(&self) -> usize {
        self.circ.z
    }

    /// Codeword length.
    pub fn n(&self) -> usize {
        self.h.cols()
    }

    /// Number of parity checks.
    pub fn m(&self) -> usize {
        self.h.rows()
    }

    /// Number of information bits.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Block (frame, for RCRP codes) of every bit.
    pub fn block_map(&self) -> &[usize] {
        &self.block_map
    }

    pub fn num_blocks(&self) -> usize {
        self.spec.num_blocks()
    }

    /// Bit positions of block `b`, increasing.
    pub fn block_positions(&self, b: usize) -> Vec<usize> {
        (0..self.n()).filter(|&p| self.block_map[p] == b).collect()
    }

    /// Shortest cycle length, `None` when the Tanner graph is a forest.
    pub fn girth(&self) -> Option<usize> {
        self.girth
    }

    /// Serializes to the `QCLDPC v1` text format with the code spec embedded.
    pub fn to_text(&self) -> String {
        let (m, n) = (self.circ.rows, self.circ.cols);
        let girth = self.girth.map_or_else(|| "inf".to_string(), |g| g.to_string());
        let mut out = format!("QCLDPC v1 {m} {n} {} {girth}\n", self.circ.z);
        for i in 0..m {
            for j in 0..n {
                let cell = self.circ.cell(i, j);
                if cell.is_empty() {
                    out.push_str(&format!("{i} {j} : -\n"));
                } else {
                    let s: Vec<String> = cell.iter().map(u32::to_string).collect();
                    out.push_str(&format!("{i} {j} : {}\n", s.join(" ")));
                }
            }
        }
        out.push_str(&self.spec.to_text());
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: String| LiftError::Parse { line: line + 1, msg };
        let mut lines = text.lines().enumerate();
        let (hn, header) = lines
            .next()
            .ok_or_else(|| perr(0, "empty QC file".into()))?;
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 6 || f[0] != "QCLDPC" || f[1] != "v1" {
            return Err(perr(hn, format!("bad QCLDPC header `{header}`")));
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| perr(hn, format!("bad number `{s}`")))
        };
        let (m, n, z) = (num(f[2])?, num(f[3])?, num(f[4])?);
        let girth = match f[5] {
            "inf" => None,
            g => Some(num(g)?),
        };
        let mut shifts = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                let (ln, line) = lines
                    .next()
                    .ok_or_else(|| perr(hn, "truncated circulant table".into()))?;
                let (pos, rest) = line
                    .split_once(':')
                    .ok_or_else(|| perr(ln, format!("bad cell line `{line}`")))?;
                let ij: Vec<&str> = pos.split_whitespace().collect();
                if ij != [i.to_string(), j.to_string()] {
                    return Err(perr(ln, format!("expected cell {i} {j}")));
                }
                let rest = rest.trim();
                let cell = if rest == "-" {
                    Vec::new()
                } else {
                    rest.split_whitespace()
                        .map(|t| t.parse::<u32>())
                        .collect::<std::result::Result<Vec<u32>, _>>()
                        .map_err(|_| perr(ln, format!("bad shifts `{rest}`")))?
                };
                shifts.push(cell);
            }
        }
        let spec = CodeSpec::parse_lines(&mut lines)?;
        if let Some((ln, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(perr(ln, format!("trailing content `{l}`")));
        }
        let code = Self::from_circulants(
            spec,
            CirculantSpec {
                z,
                rows: m,
                cols: n,
                shifts,
            },
        )?;
        if code.girth != girth {
            return Err(perr(hn, "recorded girth does not match the matrix".into()));
        }
        Ok(code)
    }
}

fn expand(circ: &CirculantSpec) -> SparseMatrix {
    let z = circ.z;
    let mut rows = vec![Vec::new(); circ.rows * z];
    for i in 0..circ.rows {
        for j in 0..circ.cols {
            for &s in circ.cell(i, j) {
                for r in 0..z {
                    rows[i * z + r].push(j * z + (r + s as usize) % z);
                }
            }
        }
    }
    SparseMatrix::from_rows(circ.cols * z, rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LiftOptions {
    pub z: usize,
    pub seed: u64,
    /// Cycles shorter than this are avoided whenever an alternative exists.
    pub girth_target: usize,
    /// Lifts whose girth ends up below this are rejected. Set to 4 for small
    /// structural test codes where girth 6 is combinatorially impossible.
    pub min_girth: usize,
}

impl LiftOptions {
    pub fn new(z: usize, seed: u64) -> Self {
        Self {
            z,
            seed,
            girth_target: 6,
            min_girth: 6,
        }
    }
}

/// Lifts `spec` by `z` and rejects results with girth below 6.
pub fn circulant_peg_lift(
    spec: &CodeSpec,
    z: usize,
    seed: u64,
    girth_target: usize,
) -> Result<LiftedCode> {
    circulant_peg_lift_with(
        spec,
        &LiftOptions {
            girth_target,
            ..LiftOptions::new(z, seed)
        },
    )
}

// Local girths at or above this count as "no cycle".
const GIRTH_CAP: usize = 16;

pub fn circulant_peg_lift_with(spec: &CodeSpec, opts: &LiftOptions) -> Result<LiftedCode> {
    let z = opts.z;
    let min_z = (spec.base.max_entry() as usize).max(3);
    if z < min_z {
        return Err(LiftError::InvalidZ { z, min: min_z });
    }
    if opts.girth_target != 6 && opts.girth_target != 8 {
        return Err(LiftError::InvalidGirthTarget(opts.girth_target));
    }
    let (m, n) = (spec.base.rows(), spec.base.cols());
    let mut graph = Graph::new(m * z, n * z);
    let mut shifts = vec![Vec::<u32>::new(); m * n];

    // PEG order: low-degree columns first.
    let mut columns: Vec<usize> = (0..n).collect();
    columns.sort_by_key(|&j| spec.base.col_sum(j));

    for &j in &columns {
        let v0 = j * z;
        for i in 0..m {
            for k in 0..spec.base.get(i, j) as usize {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(&[opts.seed, i as u64, j as u64, k as u64]));
                let mut order: Vec<u32> = (0..z as u32).collect();
                order.shuffle(&mut rng);
                let used = &shifts[i * n + j];
                let dist = graph.check_distances(v0, GIRTH_CAP);
                // Candidate s attaches v0 to check i*z + (z - s) % z.
                let check_of = |s: u32| i * z + (z - s as usize) % z;
                let mut cands: Vec<(usize, usize, u32)> = order
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| !used.contains(s))
                    .map(|(rank, &s)| {
                        let g = dist[check_of(s)].map_or(GIRTH_CAP, |d| (d + 1).min(GIRTH_CAP));
                        (g, rank, s)
                    })
                    .collect();
                cands.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

                let mut best: Option<(usize, u32)> = None;
                for &(estimate, _, s) in &cands {
                    if best.is_some_and(|(g, _)| estimate <= g) {
                        break;
                    }
                    graph.add_circulant(i, j, s, z);
                    let g = graph.local_girth(v0, check_of(s), GIRTH_CAP);
                    graph.remove_last_circulant(i, z);
                    if best.is_none_or(|(bg, _)| g > bg) {
                        best = Some((g, s));
                    }
                }
                let (_, s) = best.expect("z exceeds the cell multiplicity");
                graph.add_circulant(i, j, s, z);
                shifts[i * n + j].push(s);
            }
        }
    }
    for cell in &mut shifts {
        cell.sort_unstable();
    }
    let code = LiftedCode::from_circulants(
        spec.clone(),
        CirculantSpec {
            z,
            rows: m,
            cols: n,
            shifts,
        },
    )?;
    match code.girth() {
        Some(g) if g < opts.min_girth => Err(LiftError::GirthInfeasible {
            girth: g,
            required: opts.min_girth,
        }),
        _ => Ok(code),
    }
}

/// Adjacency of a partially built lifted Tanner graph.
struct Graph {
    var_adj: Vec<Vec<u32>>,
    chk_adj: Vec<Vec<u32>>,
    var_seen: Vec<u32>,
    var_dist: Vec<u32>,
    chk_dist: Vec<u32>,
    chk_seen: Vec<u32>,
    stamp: u32,
    queue: VecDeque<(bool, u32)>,
}

impl Graph {
    fn new(checks: usize, vars: usize) -> Self {
        Self {
            var_adj: vec![Vec::new(); vars],
            chk_adj: vec![Vec::new(); checks],
            var_seen: vec![0; vars],
            var_dist: vec![0; vars],
            chk_dist: vec![0; checks],
            chk_seen: vec![0; checks],
            stamp: 0,
            queue: VecDeque::new(),
        }
    }

    fn add_circulant(&mut self, i: usize, j: usize, s: u32, z: usize) {
        for r in 0..z {
            let c = i * z + r;
            let v = j * z + (r + s as usize) % z;
            self.chk_adj[c].push(v as u32);
            self.var_adj[v].push(c as u32);
        }
    }

    /// Undoes the most recent `add_circulant` in base row `i`.
    fn remove_last_circulant(&mut self, i: usize, z: usize) {
        for r in 0..z {
            let v = self.chk_adj[i * z + r].pop().expect("circulant present");
            self.var_adj[v as usize].pop();
        }
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp += 1;
        self.stamp
    }

    /// BFS distances (in edges) from variable `root` to every check, up to
    /// `cap` edges.
    fn check_distances(&mut self, root: usize, cap: usize) -> Vec<Option<usize>> {
        self.bfs(root, None, cap);
        let stamp = self.stamp;
        (0..self.chk_adj.len())
            .map(|c| (self.chk_seen[c] == stamp).then_some(self.chk_dist[c] as usize))
            .collect()
    }

    /// Length of the shortest cycle through edge `(root, check)`, capped.
    fn local_girth(&mut self, root: usize, check: usize, cap: usize) -> usize {
        match self.bfs(root, Some(check), cap) {
            Some(d) => (d + 1).min(cap),
            None => cap,
        }
    }

    /// Breadth-first search from a variable node. With `target`, the direct
    /// edge root-target is ignored and the distance to target is returned.
    fn bfs(&mut self, root: usize, target: Option<usize>, cap: usize) -> Option<usize> {
        let stamp = self.next_stamp();
        self.queue.clear();
        self.var_seen[root] = stamp;
        self.var_dist[root] = 0;
        self.queue.push_back((true, root as u32));
        while let Some((is_var, node)) = self.queue.pop_front() {
            let node = node as usize;
            if is_var {
                let d = self.var_dist[node];
                if d as usize + 1 >= cap {
                    continue;
                }
                for &c in &self.var_adj[node] {
                    let c = c as usize;
                    if node == root && Some(c) == target {
                        continue;
                    }
                    if self.chk_seen[c] != stamp {
                        self.chk_seen[c] = stamp;
                        self.chk_dist[c] = d + 1;
                        if Some(c) == target {
                            return Some(d as usize + 1);
                        }
                        self.queue.push_back((false, c as u32));
                    }
                }
            } else {
                let d = self.chk_dist[node];
                if d as usize + 1 >= cap {
                    continue;
                }
                for &v in &self.chk_adj[node] {
                    if self.var_seen[v as usize] != stamp {
                        self.var_seen[v as usize] = stamp;
                        self.var_dist[v as usize] = d + 1;
                        self.queue.push_back((true, v));
                    }
                }
            }
        }
        None
    }
}

/// Exact girth of the Tanner graph of `h` by BFS from every variable node.
pub fn girth_of(h: &SparseMatrix) -> Option<usize> {
    girth_from_roots(h, 0..h.cols())
}

/// Girth of a QC matrix: by cyclic symmetry one root per base column suffices.
fn qc_girth(h: &SparseMatrix, z: usize, base_cols: usize) -> Option<usize> {
    girth_from_roots(h, (0..base_cols).map(|j| j * z))
}

fn girth_from_roots(h: &SparseMatrix, roots: impl Iterator<Item = usize>) -> Option<usize> {
    let (n, m) = (h.cols(), h.rows());
    // Node ids: variables 0..n, checks n..n+m.
    let mut dist = vec![u32::MAX; n + m];
    let mut parent = vec![u32::MAX; n + m];
    let mut touched = Vec::new();
    let mut queue = VecDeque::new();
    let mut best: Option<usize> = None;
    for root in roots {
        for &t in &touched {
            dist[t as usize] = u32::MAX;
            parent[t as usize] = u32::MAX;
        }
        touched.clear();
        queue.clear();
        dist[root] = 0;
        touched.push(root as u32);
        queue.push_back(root as u32);
        'bfs: while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            // Any cycle found from here is at least 2*du + 1 long.
            if best.is_some_and(|b| 2 * du as usize + 1 >= b) {
                break;
            }
            let neighbours: Box<dyn Iterator<Item = u32>> = if (u as usize) < n {
                Box::new(h.col_rows(u as usize).map(|c| (c + n) as u32))
            } else {
                Box::new(h.row(u as usize - n).iter().copied())
            };
            for w in neighbours {
                if w == parent[u as usize] {
                    continue;
                }
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    parent[w as usize] = u;
                    touched.push(w);
                    queue.push_back(w);
                } else {
                    let len = (du + dist[w as usize] + 1) as usize;
                    if best.is_none_or(|b| len < b) {
                        best = Some(len);
                    }
                    if len <= 4 {
                        break 'bfs;
                    }
                }
            }
        }
    }
    best
}
