//! Protographs as labelled base matrices, and the rootcheck-based builders for
//! root-protograph (RP) and rate-compatible root-protograph (RCRP) codes.
//!
//! A base matrix entry `b[i][j]` is the number of parallel edges between check
//! node `i` and variable node `j`. Every column belongs to one fading block
//! (for RCRP codes: one frame) and carries a role; every row is either a
//! rootcheck, a frame check or an unlabelled check. Block and type indices are
//! zero-based in memory and one-based in the text format.
//!
//! Columns of the RP builder are ordered block-major with the information
//! column first in each block; the RCRP builder appends the extra-parity
//! columns after all RP columns, grouped by frame. The lifting and channel
//! layers rely on this order.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use thiserror::Error;

/// Exact code rate.
pub type Rate = Ratio<u64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtographError {
    #[error("3*{n_vn} edges cannot be spread evenly over {n_cn} check rows")]
    Divisibility { n_vn: usize, n_cn: usize },
    #[error("invalid rest-edge weights: {0}")]
    InvalidWeights(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown builtin code `{0}`")]
    UnknownName(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

type Result<T> = std::result::Result<T, ProtographError>;

/// Dense protograph base matrix with small non-negative multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BaseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u8>,
}

impl BaseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    /// Builds a matrix from row vectors. Only rectangularity is enforced here;
    /// structural problems such as empty columns are reported by [`validate`].
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(ProtographError::InvalidArgument("empty base matrix".into()));
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(ProtographError::InvalidArgument("ragged base matrix".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            entries: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_sum(&self, i: usize) -> usize {
        self.row(i).iter().map(|&b| b as usize).sum()
    }

    pub fn col_sum(&self, j: usize) -> usize {
        (0..self.rows).map(|i| self.get(i, j) as usize).sum()
    }

    pub fn max_entry(&self) -> u8 {
        self.entries.iter().copied().max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.entries.iter().map(|&b| b as usize).sum()
    }

    /// `(n - m) / n`, or `None` when the matrix has no redundancy to spare.
    pub fn design_rate(&self) -> Option<Rate> {
        (self.cols > self.rows)
            .then(|| Rate::new((self.cols - self.rows) as u64, self.cols as u64))
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColumnRole {
    Info,
    /// Parity bit of the RP part (or of a plain code).
    Parity,
    /// Extra parity appended to a frame by the RCRP construction.
    Extra,
}

impl ColumnRole {
    fn as_str(self) -> &'static str {
        match self {
            ColumnRole::Info => "info",
            ColumnRole::Parity => "parity",
            ColumnRole::Extra => "extra",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ColumnLabel {
    pub block: usize,
    pub role: ColumnRole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckLabel {
    /// Type-`kind` rootcheck: one edge to the information column of block
    /// `kind`, every other edge inside block `target`.
    Rootcheck { kind: usize, target: usize },
    /// Check of the per-frame CW-3 code tying frame `frame` to its extra parity.
    Frame { frame: usize },
    Plain,
}

impl fmt::Display for ColumnLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}:{}", self.block + 1, self.role.as_str())
    }
}

impl fmt::Display for CheckLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckLabel::Rootcheck { kind, target } => write!(f, "c{}:{}", kind + 1, target + 1),
            CheckLabel::Frame { frame } => write!(f, "f{}", frame + 1),
            CheckLabel::Plain => f.write_str("p"),
        }
    }
}

fn parse_one_based(s: &str) -> Option<usize> {
    s.parse::<usize>().ok().filter(|&v| v >= 1).map(|v| v - 1)
}

impl FromStr for ColumnLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let rest = s.strip_prefix('b').ok_or_else(|| format!("bad column label `{s}`"))?;
        let (block, role) = rest
            .split_once(':')
            .ok_or_else(|| format!("bad column label `{s}`"))?;
        let block = parse_one_based(block).ok_or_else(|| format!("bad block in `{s}`"))?;
        let role = match role {
            "info" => ColumnRole::Info,
            "parity" => ColumnRole::Parity,
            "extra" => ColumnRole::Extra,
            _ => return Err(format!("bad role in `{s}`")),
        };
        Ok(ColumnLabel { block, role })
    }
}

impl FromStr for CheckLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "p" {
            return Ok(CheckLabel::Plain);
        }
        if let Some(rest) = s.strip_prefix('f') {
            let frame = parse_one_based(rest).ok_or_else(|| format!("bad frame in `{s}`"))?;
            return Ok(CheckLabel::Frame { frame });
        }
        if let Some(rest) = s.strip_prefix('c') {
            if let Some((k, t)) = rest.split_once(':') {
                if let (Some(kind), Some(target)) = (parse_one_based(k), parse_one_based(t)) {
                    return Ok(CheckLabel::Rootcheck { kind, target });
                }
            }
        }
        Err(format!("bad check label `{s}`"))
    }
}

/// Column and row labelling of a base matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CodeLayout {
    pub num_blocks: usize,
    pub columns: Vec<ColumnLabel>,
    pub checks: Vec<CheckLabel>,
}

impl CodeLayout {
    pub fn block_of(&self, col: usize) -> usize {
        self.columns[col].block
    }

    pub fn columns_in_block(&self, block: usize) -> impl Iterator<Item = usize> + '_ {
        self.columns
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.block == block)
            .map(|(j, _)| j)
    }

    pub fn info_columns(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == ColumnRole::Info)
            .map(|(j, _)| j)
            .collect()
    }

    /// The unique information column of `block`, if there is exactly one.
    pub fn info_column_of_block(&self, block: usize) -> Option<usize> {
        let mut it = self
            .columns_in_block(block)
            .filter(|&j| self.columns[j].role == ColumnRole::Info);
        match (it.next(), it.next()) {
            (Some(j), None) => Some(j),
            _ => None,
        }
    }

    pub fn has_rootchecks(&self) -> bool {
        self.checks
            .iter()
            .any(|c| matches!(c, CheckLabel::Rootcheck { .. }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CodeFamily {
    Rp,
    Rcrp,
    RegularCw3,
    Plain,
}

impl CodeFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            CodeFamily::Rp => "rp",
            CodeFamily::Rcrp => "rcrp",
            CodeFamily::RegularCw3 => "regular_cw3",
            CodeFamily::Plain => "plain",
        }
    }
}

impl FromStr for CodeFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "rp" => CodeFamily::Rp,
            "rcrp" => CodeFamily::Rcrp,
            "regular_cw3" => CodeFamily::RegularCw3,
            "plain" => CodeFamily::Plain,
            _ => return Err(format!("unknown code family `{s}`")),
        })
    }
}

/// A base matrix together with its block layout and family tag.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CodeSpec {
    pub base: BaseMatrix,
    pub layout: CodeLayout,
    pub family: CodeFamily,
    /// Extra-parity columns per frame (RCRP only, zero otherwise).
    pub extra_per_frame: usize,
    pub rate: Rate,
}

impl CodeSpec {
    pub fn new(
        base: BaseMatrix,
        layout: CodeLayout,
        family: CodeFamily,
        extra_per_frame: usize,
    ) -> Result<Self> {
        if layout.columns.len() != base.cols() || layout.checks.len() != base.rows() {
            return Err(ProtographError::InvalidArgument(format!(
                "layout {}x{} does not match base {}x{}",
                layout.checks.len(),
                layout.columns.len(),
                base.rows(),
                base.cols()
            )));
        }
        if layout.num_blocks == 0 || layout.columns.iter().any(|c| c.block >= layout.num_blocks) {
            return Err(ProtographError::InvalidArgument("column block out of range".into()));
        }
        let rate = base.design_rate().ok_or_else(|| {
            ProtographError::InvalidArgument("base matrix needs more columns than rows".into())
        })?;
        Ok(Self {
            base,
            layout,
            family,
            extra_per_frame,
            rate,
        })
    }

    pub fn num_blocks(&self) -> usize {
        self.layout.num_blocks
    }

    /// Number of blocks minus one (the `L` of an `(L+1)`-layer code).
    pub fn layers_minus_one(&self) -> usize {
        self.layout.num_blocks - 1
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.base, &self.layout)
    }

    /// Serializes to the `RPCODE v1` text format.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "RPCODE v1 {} {} {} {} {}\n",
            self.base.rows(),
            self.base.cols(),
            self.layers_minus_one(),
            self.family.as_str(),
            self.extra_per_frame
        );
        for i in 0..self.base.rows() {
            let row: Vec<String> = self.base.row(i).iter().map(u8::to_string).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        let cols: Vec<String> = self.layout.columns.iter().map(ToString::to_string).collect();
        out.push_str(&cols.join(" "));
        out.push('\n');
        let rows: Vec<String> = self.layout.checks.iter().map(ToString::to_string).collect();
        out.push_str(&rows.join(" "));
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let spec = Self::parse_lines(&mut lines)?;
        if let Some((n, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(parse_err(n, format!("trailing content `{l}`")));
        }
        Ok(spec)
    }

    /// Parses one embedded `RPCODE` section, consuming exactly its lines.
    pub fn parse_lines<'a, I>(lines: &mut I) -> Result<Self>
    where
        I: Iterator<Item = (usize, &'a str)>,
    {
        let (hn, header) = lines
            .next()
            .ok_or_else(|| parse_err(0, "missing RPCODE header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 7 || fields[0] != "RPCODE" || fields[1] != "v1" {
            return Err(parse_err(hn, format!("bad RPCODE header `{header}`")));
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(hn, format!("bad number `{s}`")))
        };
        let (m, n, l) = (num(fields[2])?, num(fields[3])?, num(fields[4])?);
        let family: CodeFamily = fields[5].parse().map_err(|e| parse_err(hn, e))?;
        let e = num(fields[6])?;

        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| parse_err(hn, "truncated base matrix".into()))?;
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<u8>())
                .collect::<std::result::Result<Vec<u8>, _>>()
                .map_err(|_| parse_err(ln, format!("bad base row `{line}`")))?;
            if row.len() != n {
                return Err(parse_err(ln, format!("expected {n} entries")));
            }
            rows.push(row);
        }
        let (cn, col_line) = lines
            .next()
            .ok_or_else(|| parse_err(hn, "missing column labels".into()))?;
        let columns = col_line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<Vec<ColumnLabel>, _>>()
            .map_err(|e| parse_err(cn, e))?;
        let (rn, row_line) = lines
            .next()
            .ok_or_else(|| parse_err(hn, "missing row labels".into()))?;
        let checks = row_line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<Vec<CheckLabel>, _>>()
            .map_err(|e| parse_err(rn, e))?;

        let base = BaseMatrix::from_rows(&rows).map_err(|e| parse_err(hn, e.to_string()))?;
        let layout = CodeLayout {
            num_blocks: l + 1,
            columns,
            checks,
        };
        CodeSpec::new(base, layout, family, e).map_err(|e| parse_err(hn, e.to_string()))
    }
}

fn parse_err(line: usize, msg: String) -> ProtographError {
    ProtographError::Parse { line: line + 1, msg }
}

/// One structural rule broken by a base matrix / layout pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DimensionMismatch,
    ZeroRow(usize),
    ZeroColumn(usize),
    BlockOutOfRange { column: usize },
    InfoColumnCount { block: usize, count: usize },
    SelfTargetRootcheck { row: usize, kind: usize },
    RootcheckTargetEdges { row: usize, kind: usize, edges: u8 },
    RootcheckStrayEdge { row: usize, column: usize },
    ParityTypeCount { column: usize, types: usize, required: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionMismatch => f.write_str("layout dimensions do not match base"),
            Violation::ZeroRow(i) => write!(f, "zero row {i}"),
            Violation::ZeroColumn(j) => write!(f, "zero column {j}"),
            Violation::BlockOutOfRange { column } => {
                write!(f, "column {column} assigned to a nonexistent block")
            }
            Violation::InfoColumnCount { block, count } => {
                write!(f, "block {} has {count} info columns", block + 1)
            }
            Violation::SelfTargetRootcheck { row, kind } => {
                write!(f, "rootcheck type-{} (row {row}) targets its own block", kind + 1)
            }
            Violation::RootcheckTargetEdges { row, kind, edges } => write!(
                f,
                "rootcheck type-{k} has {edges} edges to info column i{k} (row {row})",
                k = kind + 1
            ),
            Violation::RootcheckStrayEdge { row, column } => {
                write!(f, "rootcheck row {row} has an edge to column {column} outside its target block")
            }
            Violation::ParityTypeCount {
                column,
                types,
                required,
            } => write!(
                f,
                "parity column {column} touches {types} rootcheck types, needs {required}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the structural rules of a labelled base matrix.
///
/// Rootcheck rules are only enforced on rows labelled as rootchecks, and the
/// one-info-column-per-block and parity-type rules only when the layout
/// carries rootchecks at all.
pub fn validate(base: &BaseMatrix, layout: &CodeLayout) -> ValidationReport {
    let mut v = Vec::new();
    if layout.columns.len() != base.cols() || layout.checks.len() != base.rows() {
        v.push(Violation::DimensionMismatch);
        return ValidationReport { violations: v };
    }
    for i in 0..base.rows() {
        if base.row_sum(i) == 0 {
            v.push(Violation::ZeroRow(i));
        }
    }
    for j in 0..base.cols() {
        if base.col_sum(j) == 0 {
            v.push(Violation::ZeroColumn(j));
        }
        if layout.columns[j].block >= layout.num_blocks {
            v.push(Violation::BlockOutOfRange { column: j });
        }
    }
    if !layout.has_rootchecks() {
        return ValidationReport { violations: v };
    }

    for block in 0..layout.num_blocks {
        let count = layout
            .columns_in_block(block)
            .filter(|&j| layout.columns[j].role == ColumnRole::Info)
            .count();
        if count != 1 {
            v.push(Violation::InfoColumnCount { block, count });
        }
    }
    for (row, label) in layout.checks.iter().enumerate() {
        let CheckLabel::Rootcheck { kind, target } = *label else {
            continue;
        };
        if kind == target {
            v.push(Violation::SelfTargetRootcheck { row, kind });
            continue;
        }
        let root = layout.info_column_of_block(kind);
        if let Some(root) = root {
            let edges = base.get(row, root);
            if edges != 1 {
                v.push(Violation::RootcheckTargetEdges { row, kind, edges });
            }
        }
        for column in 0..base.cols() {
            if base.get(row, column) > 0
                && Some(column) != root
                && layout.columns[column].block != target
            {
                v.push(Violation::RootcheckStrayEdge { row, column });
            }
        }
    }
    let required = layout.num_blocks - 1;
    for column in 0..base.cols() {
        if layout.columns[column].role != ColumnRole::Parity {
            continue;
        }
        let mut kinds: Vec<usize> = layout
            .checks
            .iter()
            .enumerate()
            .filter_map(|(i, c)| match c {
                CheckLabel::Rootcheck { kind, .. } if base.get(i, column) > 0 => Some(*kind),
                _ => None,
            })
            .collect();
        kinds.sort_unstable();
        kinds.dedup();
        if kinds.len() < required {
            v.push(Violation::ParityTypeCount {
                column,
                types: kinds.len(),
                required,
            });
        }
    }
    ValidationReport { violations: v }
}

/// Regular column-weight-3 protograph with edges dealt round-robin over the
/// check rows. Edge `t` (counting column-major, three per column) lands on
/// row `t mod n_cn`.
pub fn build_regular_cw3_base(n_vn: usize, n_cn: usize) -> Result<CodeSpec> {
    if n_cn == 0 || n_vn <= n_cn {
        return Err(ProtographError::InvalidArgument(format!(
            "need n_vn > n_cn >= 1, got {n_vn} and {n_cn}"
        )));
    }
    if (3 * n_vn) % n_cn != 0 {
        return Err(ProtographError::Divisibility { n_vn, n_cn });
    }
    let base = cw3_matrix(n_vn, n_cn);
    let info = n_vn - n_cn;
    let layout = CodeLayout {
        num_blocks: 1,
        columns: (0..n_vn)
            .map(|j| ColumnLabel {
                block: 0,
                role: if j < info {
                    ColumnRole::Info
                } else {
                    ColumnRole::Parity
                },
            })
            .collect(),
        checks: vec![CheckLabel::Plain; n_cn],
    };
    CodeSpec::new(base, layout, CodeFamily::RegularCw3, 0)
}

fn cw3_matrix(n_vn: usize, n_cn: usize) -> BaseMatrix {
    let mut base = BaseMatrix::zeros(n_cn, n_vn);
    for t in 0..3 * n_vn {
        let (i, j) = (t % n_cn, t / 3);
        base.set(i, j, base.get(i, j) + 1);
    }
    base
}

/// Rest-edge weights used by the builtin RP codes: `(2, 3)` for two blocks,
/// `(1, 2, ..., 2)` otherwise.
pub fn default_rest_weights(l: usize) -> Vec<u8> {
    if l == 1 {
        vec![2, 3]
    } else {
        std::iter::once(1).chain(std::iter::repeat_n(2, l)).collect()
    }
}

/// Builds the base matrix of an `(L+1)`-layer RP code.
///
/// Every block holds one information column followed by `L` parity columns.
/// Row `c_{l,l'}` has a single edge to the information column of block `l`
/// and `rest_weights` spread over the columns of block `l'` (information
/// column first). Rows are ordered by type, then by target block.
pub fn build_rp_base(l: usize, rest_weights: &[u8]) -> Result<CodeSpec> {
    if l == 0 {
        return Err(ProtographError::InvalidArgument("L must be at least 1".into()));
    }
    if rest_weights.len() != l + 1 {
        return Err(ProtographError::InvalidWeights(format!(
            "expected {} weights, got {}",
            l + 1,
            rest_weights.len()
        )));
    }
    let blocks = l + 1;
    let col = |block: usize, pos: usize| block * blocks + pos;
    let mut base = BaseMatrix::zeros(l * blocks, blocks * blocks);
    let mut checks = Vec::with_capacity(l * blocks);
    for kind in 0..blocks {
        for target in (0..blocks).filter(|&t| t != kind) {
            let row = checks.len();
            base.set(row, col(kind, 0), 1);
            for (pos, &w) in rest_weights.iter().enumerate() {
                base.set(row, col(target, pos), w);
            }
            checks.push(CheckLabel::Rootcheck { kind, target });
        }
    }
    let columns = (0..blocks)
        .flat_map(|block| {
            (0..blocks).map(move |pos| ColumnLabel {
                block,
                role: if pos == 0 {
                    ColumnRole::Info
                } else {
                    ColumnRole::Parity
                },
            })
        })
        .collect();
    let layout = CodeLayout {
        num_blocks: blocks,
        columns,
        checks,
    };
    let report = validate(&base, &layout);
    if !report.is_ok() {
        let msgs: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        return Err(ProtographError::InvalidWeights(msgs.join("; ")));
    }
    CodeSpec::new(base, layout, CodeFamily::Rp, 0)
}

/// Extends an RP code into an RCRP code by appending `extra_per_frame` extra
/// parity columns to every frame and tying each frame together with a
/// column-weight-3 protograph over (block columns, extra columns).
pub fn build_rcrp_base(rp: &CodeSpec, extra_per_frame: usize) -> Result<CodeSpec> {
    if rp.family != CodeFamily::Rp {
        return Err(ProtographError::InvalidArgument(
            "RCRP construction needs an RP code".into(),
        ));
    }
    if extra_per_frame == 0 {
        return Err(ProtographError::InvalidArgument(
            "at least one extra parity per frame".into(),
        ));
    }
    let e = extra_per_frame;
    let blocks = rp.num_blocks();
    let (m_rp, n_rp) = (rp.base.rows(), rp.base.cols());
    let frame_cols: Vec<Vec<usize>> = (0..blocks)
        .map(|f| rp.layout.columns_in_block(f).collect())
        .collect();
    let block_width = frame_cols[0].len();
    if frame_cols.iter().any(|c| c.len() != block_width) {
        return Err(ProtographError::InvalidArgument("RP blocks differ in width".into()));
    }
    let frame = build_regular_cw3_base(block_width + e, e)?;

    let (m, n) = (m_rp + e * blocks, n_rp + e * blocks);
    let mut base = BaseMatrix::zeros(m, n);
    for i in 0..m_rp {
        for j in 0..n_rp {
            base.set(i, j, rp.base.get(i, j));
        }
    }
    let mut columns = rp.layout.columns.clone();
    let mut checks = rp.layout.checks.clone();
    for f in 0..blocks {
        let extras: Vec<usize> = (0..e).map(|k| n_rp + f * e + k).collect();
        columns.extend(extras.iter().map(|_| ColumnLabel {
            block: f,
            role: ColumnRole::Extra,
        }));
        let targets: Vec<usize> = frame_cols[f].iter().chain(&extras).copied().collect();
        for r in 0..e {
            let row = m_rp + f * e + r;
            for (c, &j) in targets.iter().enumerate() {
                base.set(row, j, frame.base.get(r, c));
            }
            checks.push(CheckLabel::Frame { frame: f });
        }
    }
    let layout = CodeLayout {
        num_blocks: blocks,
        columns,
        checks,
    };
    CodeSpec::new(base, layout, CodeFamily::Rcrp, e)
}

/// The codes used throughout the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// Rate-1/2 two-block RP code, degrees 3 / 6.
    RpA,
    /// RP-A plus one extra parity per frame, rate 1/3.
    RcrpA,
    /// Rate-1/3 three-block RP code, check degree 6.
    RpB,
    /// RP-B plus one extra parity per frame, rate 1/4.
    RcrpB,
    /// RP-A plus two extra parities per frame, rate 1/4 (bilayer).
    RcrpC,
    /// (3,6)-regular baseline without rootchecks, two blocks.
    Reg36,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::RpA,
        Builtin::RcrpA,
        Builtin::RpB,
        Builtin::RcrpB,
        Builtin::RcrpC,
        Builtin::Reg36,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::RpA => "rp_a",
            Builtin::RcrpA => "rcrp_a",
            Builtin::RpB => "rp_b",
            Builtin::RcrpB => "rcrp_b",
            Builtin::RcrpC => "rcrp_c",
            Builtin::Reg36 => "reg36",
        }
    }

    pub fn spec(self) -> CodeSpec {
        let rp = |l| build_rp_base(l, &default_rest_weights(l));
        let spec = match self {
            Builtin::RpA => rp(1),
            Builtin::RcrpA => rp(1).and_then(|s| build_rcrp_base(&s, 1)),
            Builtin::RpB => rp(2),
            Builtin::RcrpB => rp(2).and_then(|s| build_rcrp_base(&s, 1)),
            Builtin::RcrpC => rp(1).and_then(|s| build_rcrp_base(&s, 2)),
            Builtin::Reg36 => reg36(),
        };
        spec.expect("builtin construction is infallible")
    }
}

impl FromStr for Builtin {
    type Err = ProtographError;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| ProtographError::UnknownName(s.to_string()))
    }
}

/// Looks up a builtin code by name.
pub fn builtin(name: &str) -> Result<CodeSpec> {
    name.parse::<Builtin>().map(Builtin::spec)
}

fn reg36() -> Result<CodeSpec> {
    // Two check rows of the CW-3 ensemble over four columns give row sums 6.
    // The last two columns are swapped so that the parity part [[1,2],[2,1]]
    // stays invertible after lifting; in [[1,1],[2,2]] both parity columns
    // collapse to the same vector modulo (x - 1).
    let cw3 = build_regular_cw3_base(4, 2)?.base.to_rows();
    let rows: Vec<Vec<u8>> = cw3.iter().map(|r| vec![r[0], r[1], r[3], r[2]]).collect();
    let base = BaseMatrix::from_rows(&rows)?;
    let columns = (0..4)
        .map(|j| ColumnLabel {
            block: j / 2,
            role: if j % 2 == 0 {
                ColumnRole::Info
            } else {
                ColumnRole::Parity
            },
        })
        .collect();
    let layout = CodeLayout {
        num_blocks: 2,
        columns,
        checks: vec![CheckLabel::Plain; 2],
    };
    CodeSpec::new(base, layout, CodeFamily::RegularCw3, 0)
}

/// Singleton-like bound on the block diversity of a rate-`rate` code over
/// `L+1` fading blocks: `1 + floor((L+1)(1 - rate))`.
pub fn singleton_bound(l: usize, rate: Rate) -> usize {
    let (num, den) = (*rate.numer(), *rate.denom());
    assert!(num <= den && den > 0, "rate must lie in (0, 1]");
    1 + ((l as u64 + 1) * (den - num) / den) as usize
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiversityReport {
    /// Entry `l` is true when keeping only block `l` resolves every
    /// information column.
    pub recovered_from_block: Vec<bool>,
    pub full_diversity: bool,
}

/// Erasure message passing on the protograph: a check resolves a column when
/// that column is its only unknown neighbour and is attached by a single edge.
/// A multi-edge attachment becomes several unknown bits in every lifted check,
/// so it never resolves anything.
pub fn peel_protograph(base: &BaseMatrix, known: &mut [bool]) {
    loop {
        let mut progress = false;
        for i in 0..base.rows() {
            let mut unknown = (0..base.cols()).filter(|&j| base.get(i, j) > 0 && !known[j]);
            if let (Some(j), None) = (unknown.next(), unknown.next()) {
                if base.get(i, j) == 1 {
                    known[j] = true;
                    progress = true;
                }
            }
        }
        if !progress {
            break;
        }
    }
}

/// For every block, keeps that block, erases all others and checks whether
/// erasure decoding on the protograph recovers all information columns.
pub fn protograph_diversity_check(spec: &CodeSpec) -> DiversityReport {
    let info = spec.layout.info_columns();
    let recovered_from_block: Vec<bool> = (0..spec.num_blocks())
        .map(|kept| {
            let mut known: Vec<bool> = spec
                .layout
                .columns
                .iter()
                .map(|c| c.block == kept)
                .collect();
            peel_protograph(&spec.base, &mut known);
            info.iter().all(|&j| known[j])
        })
        .collect();
    let full_diversity = spec.num_blocks() > 1 && recovered_from_block.iter().all(|&r| r);
    DiversityReport {
        recovered_from_block,
        full_diversity,
    }
}
