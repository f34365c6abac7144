//! Oriented square lattice on a torus.
//!
//! Vertices sit at integer points `(row, col)`; horizontal edges point east
//! and vertical edges point north everywhere. Faces are indexed by their
//! south-west corner, so face `(r, c)` is bounded below by the horizontal edge
//! based at `(r, c)` and on the left by the vertical edge based at `(r, c)`.
//!
//! Edge ids follow a row-major scan over base vertices, horizontal edge first:
//! the edges based at vertex `v` are `2v` (east) and `2v + 1` (north).

use std::fmt;

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type FaceId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Traversal sign of an edge: `Plus` follows the edge's arrow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    East,
    North,
    West,
    South,
}

impl Direction {
    fn step(self) -> (i64, i64) {
        match self {
            Direction::East => (0, 1),
            Direction::North => (1, 0),
            Direction::West => (0, -1),
            Direction::South => (-1, 0),
        }
    }
}

/// Which of the two faces beside an edge is listed first by [`TorusLattice::edge_faces`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum FaceOrder {
    /// `p1` is the face on the left of the edge's direction of travel.
    #[default]
    LeftFirst,
    /// `p1` is the face on the right.
    RightFirst,
}

/// Sense in which a face boundary is read when forming a holonomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Circulation {
    Clockwise,
    CounterClockwise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeRef {
    pub id: EdgeId,
    pub axis: Axis,
    pub row: usize,
    pub col: usize,
}

/// Role of an edge in a vertex star: `A` north, `B` east, `C` south, `D` west.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StarRole {
    A,
    B,
    C,
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StarEntry {
    pub role: StarRole,
    pub edge: EdgeId,
    /// `Plus` for edges leaving the vertex (roles `A`, `B`), `Minus` for incoming ones.
    pub sign: Sign,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StarIncidence {
    pub vertex: VertexId,
    pub entries: [StarEntry; 4],
}

impl StarIncidence {
    pub fn edges(&self) -> [EdgeId; 4] {
        self.entries.map(|e| e.edge)
    }

    pub fn get(&self, role: StarRole) -> StarEntry {
        self.entries[role as usize]
    }
}

/// Role of an edge on a face boundary: `R` top, `S` right, `T` bottom, `U` left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryRole {
    R,
    S,
    T,
    U,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryIncidence {
    pub face: FaceId,
    /// Edges in role order `R, S, T, U`.
    pub edges: [EdgeId; 4],
}

impl BoundaryIncidence {
    pub fn get(&self, role: BoundaryRole) -> EdgeId {
        self.edges[role as usize]
    }

    /// Signed boundary word in role order `R, S, T, U`.
    ///
    /// Clockwise from the top-left corner the top edge is traversed with its
    /// arrow, the right edge against, the bottom against and the left with it.
    pub fn word(&self, circulation: Circulation) -> [(EdgeId, Sign); 4] {
        let cw = [Sign::Plus, Sign::Minus, Sign::Minus, Sign::Plus];
        let mut out = [(0, Sign::Plus); 4];
        for (k, (&edge, sign)) in self.edges.iter().zip(cw).enumerate() {
            out[k] = match circulation {
                Circulation::Clockwise => (edge, sign),
                Circulation::CounterClockwise => (edge, sign.flip()),
            };
        }
        out
    }
}

/// A walk along lattice edges; consecutive edges share a vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub start: VertexId,
    pub end: VertexId,
    pub steps: Vec<(EdgeId, Sign)>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.start == self.end && !self.steps.is_empty()
    }
}

/// A walk on the dual lattice, recorded by the primal edges it crosses.
///
/// An edge carries `Plus` when the walk crosses it from its `p1` face to its
/// `p2` face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualPath {
    pub start: FaceId,
    pub end: FaceId,
    pub steps: Vec<(EdgeId, Sign)>,
}

impl DualPath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.start == self.end && !self.steps.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusLattice {
    rows: usize,
    cols: usize,
    face_order: FaceOrder,
}

impl fmt::Display for TorusLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} torus", self.rows, self.cols)
    }
}

impl TorusLattice {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        Self::with_face_order(rows, cols, FaceOrder::LeftFirst)
    }

    pub fn with_face_order(rows: usize, cols: usize, face_order: FaceOrder) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::DegenerateLattice { rows, cols });
        }
        Ok(Self {
            rows,
            cols,
            face_order,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn face_order(&self) -> FaceOrder {
        self.face_order
    }

    pub fn vertex_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn edge_count(&self) -> usize {
        2 * self.rows * self.cols
    }

    pub fn face_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    fn wrap(&self, row: i64, col: i64) -> (usize, usize) {
        (
            row.rem_euclid(self.rows as i64) as usize,
            col.rem_euclid(self.cols as i64) as usize,
        )
    }

    pub fn vertex_at(&self, row: i64, col: i64) -> VertexId {
        let (r, c) = self.wrap(row, col);
        r * self.cols + c
    }

    pub fn face_at(&self, row: i64, col: i64) -> FaceId {
        self.vertex_at(row, col)
    }

    pub fn horizontal_edge(&self, row: i64, col: i64) -> EdgeId {
        2 * self.vertex_at(row, col)
    }

    pub fn vertical_edge(&self, row: i64, col: i64) -> EdgeId {
        2 * self.vertex_at(row, col) + 1
    }

    pub fn coords(&self, vertex_or_face: usize) -> (usize, usize) {
        (vertex_or_face / self.cols, vertex_or_face % self.cols)
    }

    fn check(&self, kind: &'static str, id: usize, count: usize) -> Result<()> {
        if id < count {
            Ok(())
        } else {
            Err(Error::InvalidId { kind, id, count })
        }
    }

    pub fn edge(&self, j: EdgeId) -> Result<EdgeRef> {
        self.check("edge", j, self.edge_count())?;
        let (row, col) = self.coords(j / 2);
        let axis = if j.is_multiple_of(2) {
            Axis::Horizontal
        } else {
            Axis::Vertical
        };
        Ok(EdgeRef {
            id: j,
            axis,
            row,
            col,
        })
    }

    /// `(tail, head)` following the edge's arrow.
    pub fn edge_endpoints(&self, j: EdgeId) -> Result<(VertexId, VertexId)> {
        let e = self.edge(j)?;
        let (r, c) = (e.row as i64, e.col as i64);
        let head = match e.axis {
            Axis::Horizontal => self.vertex_at(r, c + 1),
            Axis::Vertical => self.vertex_at(r + 1, c),
        };
        Ok((self.vertex_at(r, c), head))
    }

    pub fn vertex_star(&self, v: VertexId) -> Result<StarIncidence> {
        self.check("vertex", v, self.vertex_count())?;
        let (r, c) = self.coords(v);
        let (r, c) = (r as i64, c as i64);
        let entry = |role, edge, sign| StarEntry { role, edge, sign };
        Ok(StarIncidence {
            vertex: v,
            entries: [
                entry(StarRole::A, self.vertical_edge(r, c), Sign::Plus),
                entry(StarRole::B, self.horizontal_edge(r, c), Sign::Plus),
                entry(StarRole::C, self.vertical_edge(r - 1, c), Sign::Minus),
                entry(StarRole::D, self.horizontal_edge(r, c - 1), Sign::Minus),
            ],
        })
    }

    pub fn face_boundary(&self, p: FaceId) -> Result<BoundaryIncidence> {
        self.check("face", p, self.face_count())?;
        let (r, c) = self.coords(p);
        let (r, c) = (r as i64, c as i64);
        Ok(BoundaryIncidence {
            face: p,
            edges: [
                self.horizontal_edge(r + 1, c),
                self.vertical_edge(r, c + 1),
                self.horizontal_edge(r, c),
                self.vertical_edge(r, c),
            ],
        })
    }

    /// `(left, right)` faces relative to the edge's arrow.
    pub fn edge_sides(&self, j: EdgeId) -> Result<(FaceId, FaceId)> {
        let e = self.edge(j)?;
        let (r, c) = (e.row as i64, e.col as i64);
        Ok(match e.axis {
            Axis::Horizontal => (self.face_at(r, c), self.face_at(r - 1, c)),
            Axis::Vertical => (self.face_at(r, c - 1), self.face_at(r, c)),
        })
    }

    /// `(p1, p2)` for the edge under this lattice's [`FaceOrder`].
    pub fn edge_faces(&self, j: EdgeId) -> Result<(FaceId, FaceId)> {
        let (left, right) = self.edge_sides(j)?;
        Ok(match self.face_order {
            FaceOrder::LeftFirst => (left, right),
            FaceOrder::RightFirst => (right, left),
        })
    }

    /// Boundary reading under which shifting `p1` by `+x`, `p2` by `-x` and the
    /// edge by `+f(x)` leaves `f(matter) + holonomy` invariant on both faces.
    pub fn matter_circulation(&self) -> Circulation {
        match self.face_order {
            FaceOrder::LeftFirst => Circulation::Clockwise,
            FaceOrder::RightFirst => Circulation::CounterClockwise,
        }
    }

    fn edge_step(&self, row: i64, col: i64, dir: Direction) -> (EdgeId, Sign) {
        match dir {
            Direction::East => (self.horizontal_edge(row, col), Sign::Plus),
            Direction::North => (self.vertical_edge(row, col), Sign::Plus),
            Direction::West => (self.horizontal_edge(row, col - 1), Sign::Minus),
            Direction::South => (self.vertical_edge(row - 1, col), Sign::Minus),
        }
    }

    /// Walk from `start` taking one edge per move.
    pub fn path_from_moves(&self, start: VertexId, moves: &[Direction]) -> Result<Path> {
        self.check("vertex", start, self.vertex_count())?;
        let (r, c) = self.coords(start);
        let (mut r, mut c) = (r as i64, c as i64);
        let mut steps = Vec::with_capacity(moves.len());
        for &dir in moves {
            steps.push(self.edge_step(r, c, dir));
            let (dr, dc) = dir.step();
            r += dr;
            c += dc;
        }
        Ok(Path {
            start,
            end: self.vertex_at(r, c),
            steps,
        })
    }

    pub fn straight_path(&self, start: VertexId, dir: Direction, length: usize) -> Result<Path> {
        self.path_from_moves(start, &vec![dir; length])
    }

    /// An open, self-avoiding path of the given length, sweeping rows
    /// boustrophedon-style from `start`. At most `V - 1` edges long.
    pub fn snake_path(&self, start: VertexId, length: usize) -> Result<Path> {
        if length >= self.vertex_count() {
            return Err(Error::InvalidPath(format!(
                "an open self-avoiding path on the {self} has at most {} edges, asked for {length}",
                self.vertex_count() - 1
            )));
        }
        self.path_from_moves(start, &snake_moves(self.cols, length))
    }

    /// Walk over faces, one crossing per move.
    pub fn dual_path_from_moves(&self, start: FaceId, moves: &[Direction]) -> Result<DualPath> {
        self.check("face", start, self.face_count())?;
        let (r, c) = self.coords(start);
        let (mut r, mut c) = (r as i64, c as i64);
        let mut steps = Vec::with_capacity(moves.len());
        for &dir in moves {
            let edge = match dir {
                Direction::East => self.vertical_edge(r, c + 1),
                Direction::West => self.vertical_edge(r, c),
                Direction::North => self.horizontal_edge(r + 1, c),
                Direction::South => self.horizontal_edge(r, c),
            };
            let (dr, dc) = dir.step();
            let from = self.face_at(r, c);
            r += dr;
            c += dc;
            let (p1, _) = self.edge_faces(edge)?;
            let sign = if from == p1 { Sign::Plus } else { Sign::Minus };
            steps.push((edge, sign));
        }
        Ok(DualPath {
            start,
            end: self.face_at(r, c),
            steps,
        })
    }

    pub fn straight_dual_path(
        &self,
        start: FaceId,
        dir: Direction,
        length: usize,
    ) -> Result<DualPath> {
        self.dual_path_from_moves(start, &vec![dir; length])
    }

    /// Dual analogue of [`TorusLattice::snake_path`].
    pub fn snake_dual_path(&self, start: FaceId, length: usize) -> Result<DualPath> {
        if length >= self.face_count() {
            return Err(Error::InvalidPath(format!(
                "an open self-avoiding dual path on the {self} has at most {} edges, asked for {length}",
                self.face_count() - 1
            )));
        }
        self.dual_path_from_moves(start, &snake_moves(self.cols, length))
    }

    /// Check that consecutive edges of `path` are joined head to tail.
    pub fn validate_path(&self, path: &Path) -> Result<()> {
        let mut at = path.start;
        self.check("vertex", at, self.vertex_count())?;
        for (k, &(edge, sign)) in path.steps.iter().enumerate() {
            let (tail, head) = self.edge_endpoints(edge)?;
            let (from, to) = match sign {
                Sign::Plus => (tail, head),
                Sign::Minus => (head, tail),
            };
            if from != at {
                return Err(Error::InvalidPath(format!(
                    "step {k} (edge {edge}) does not start at vertex {at}"
                )));
            }
            at = to;
        }
        if at != path.end {
            return Err(Error::InvalidPath(format!(
                "path ends at {at}, not at the recorded end {}",
                path.end
            )));
        }
        Ok(())
    }

    /// Check that consecutive crossings of `path` share a face.
    pub fn validate_dual_path(&self, path: &DualPath) -> Result<()> {
        let mut at = path.start;
        self.check("face", at, self.face_count())?;
        for (k, &(edge, sign)) in path.steps.iter().enumerate() {
            let (p1, p2) = self.edge_faces(edge)?;
            let (from, to) = match sign {
                Sign::Plus => (p1, p2),
                Sign::Minus => (p2, p1),
            };
            if from != at {
                return Err(Error::InvalidPath(format!(
                    "crossing {k} (edge {edge}) does not leave face {at}"
                )));
            }
            at = to;
        }
        if at != path.end {
            return Err(Error::InvalidPath(format!(
                "dual path ends at {at}, not at the recorded end {}",
                path.end
            )));
        }
        Ok(())
    }

    /// Net number of times a path wraps the torus, as `(vertical, horizontal)`.
    pub fn winding(&self, path: &Path) -> Result<(i64, i64)> {
        let (mut dr, mut dc) = (0i64, 0i64);
        for &(edge, sign) in &path.steps {
            let e = self.edge(edge)?;
            match e.axis {
                Axis::Horizontal => dc += sign.as_i64(),
                Axis::Vertical => dr += sign.as_i64(),
            }
        }
        let (r0, c0) = self.coords(path.start);
        let (r1, c1) = self.coords(path.end);
        let rows = self.rows as i64;
        let cols = self.cols as i64;
        let wr = (dr - (r1 as i64 - r0 as i64)) / rows;
        let wc = (dc - (c1 as i64 - c0 as i64)) / cols;
        Ok((wr, wc))
    }
}

fn snake_moves(cols: usize, length: usize) -> Vec<Direction> {
    let mut moves = Vec::with_capacity(length);
    let mut eastward = true;
    let mut along = 0;
    while moves.len() < length {
        if along + 1 < cols {
            moves.push(if eastward {
                Direction::East
            } else {
                Direction::West
            });
            along += 1;
        } else {
            moves.push(Direction::North);
            along = 0;
            eastward = !eastward;
        }
    }
    moves
}
