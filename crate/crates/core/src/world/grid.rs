use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::{self, Point2};
use crate::scene_graph::FloorPlanDoc;

/// Half thickness of the walls drawn along every room boundary, meters.
pub const WALL_HALF_M: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub col: i32,
    pub row: i32,
}

impl Cell {
    pub const fn new(col: i32, row: i32) -> Self {
        Self { col, row }
    }

    /// 8-connected adjacency (a cell is not adjacent to itself).
    pub fn is_adjacent(&self, other: &Cell) -> bool {
        let (dc, dr) = ((self.col - other.col).abs(), (self.row - other.row).abs());
        dc <= 1 && dr <= 1 && (dc + dr) > 0
    }

    pub fn is_diagonal_to(&self, other: &Cell) -> bool {
        self.col != other.col && self.row != other.row
    }
}

/// Free/occupied raster of the floor plan.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    origin: Point2,
    cell_m: f64,
    cols: usize,
    rows: usize,
    free: Vec<bool>,
}

const NEIGHBORS: [(i32, i32); 8] = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)];

#[derive(Debug, Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl OccupancyGrid {
    /// All-occupied grid covering `[lo, hi]`.
    pub fn new(lo: Point2, hi: Point2, cell_m: f64) -> Self {
        let cols = ((hi.x - lo.x) / cell_m).ceil().max(1.0) as usize;
        let rows = ((hi.y - lo.y) / cell_m).ceil().max(1.0) as usize;
        Self {
            origin: lo,
            cell_m,
            cols,
            rows,
            free: vec![false; cols * rows],
        }
    }

    /// Rasterizes room polygons: interiors are free except within
    /// [`WALL_HALF_M`] of a boundary; door openings are carved through walls.
    pub fn from_floor_plan(rooms: &[Vec<Point2>], doors: &[(Point2, f64, [usize; 2])], cell_m: f64) -> Self {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for poly in rooms {
            let (a, b) = geometry::bounds(poly);
            lo = Point2::new(lo.x.min(a.x), lo.y.min(a.y));
            hi = Point2::new(hi.x.max(b.x), hi.y.max(b.y));
        }
        lo = Point2::new(lo.x - cell_m, lo.y - cell_m);
        hi = Point2::new(hi.x + cell_m, hi.y + cell_m);
        let mut grid = Self::new(lo, hi, cell_m);
        for poly in rooms {
            let (a, b) = geometry::bounds(poly);
            grid.for_cells_in(a, b, |grid, cell, p| {
                if geometry::contains(poly, p) && geometry::boundary_distance(poly, p) > WALL_HALF_M {
                    grid.set_free(cell, true);
                }
            });
        }
        for &(pos, width, [ra, rb]) in doors {
            let r = width / 2.0;
            let near = |poly: &[Point2], p: Point2| {
                geometry::contains(poly, p) || geometry::boundary_distance(poly, p) <= WALL_HALF_M + 1e-9
            };
            grid.for_cells_in(
                Point2::new(pos.x - r, pos.y - r),
                Point2::new(pos.x + r, pos.y + r),
                |grid, cell, p| {
                    if p.distance(&pos) < r && (near(&rooms[ra], p) || near(&rooms[rb], p)) {
                        grid.set_free(cell, true);
                    }
                },
            );
        }
        grid
    }

    /// Convenience: rasterize a floor-plan document (rooms in declared order).
    pub fn from_floor_plan_doc(doc: &FloorPlanDoc, cell_m: f64) -> crate::Result<Self> {
        let mut polys = Vec::with_capacity(doc.rooms.len());
        for (i, r) in doc.rooms.iter().enumerate() {
            let poly = r
                .polygon
                .iter()
                .enumerate()
                .map(|(k, p)| p.to_point(&format!("rooms[{i}].polygon[{k}]")))
                .collect::<crate::Result<Vec<_>>>()?;
            polys.push(poly);
        }
        let mut doors = Vec::with_capacity(doc.doors.len());
        for (i, d) in doc.doors.iter().enumerate() {
            let idx = |rid: u32, k: usize| {
                doc.rooms.iter().position(|r| r.id == rid).ok_or_else(|| {
                    crate::Error::input(format!("doors[{i}].rooms[{k}]"), format!("unknown room id {rid}"))
                })
            };
            doors.push((
                d.position.to_point(&format!("doors[{i}].position"))?,
                d.width_m,
                [idx(d.rooms[0], 0)?, idx(d.rooms[1], 1)?],
            ));
        }
        Ok(Self::from_floor_plan(&polys, &doors, cell_m))
    }

    fn for_cells_in(&mut self, lo: Point2, hi: Point2, mut f: impl FnMut(&mut Self, Cell, Point2)) {
        let c0 = self.cell_of(lo);
        let c1 = self.cell_of(hi);
        for row in c0.row.max(0)..=c1.row.min(self.rows as i32 - 1) {
            for col in c0.col.max(0)..=c1.col.min(self.cols as i32 - 1) {
                let cell = Cell::new(col, row);
                let p = self.center(cell);
                f(self, cell, p);
            }
        }
    }

    pub fn cell_m(&self) -> f64 {
        self.cell_m
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cell_of(&self, p: Point2) -> Cell {
        Cell::new(
            ((p.x - self.origin.x) / self.cell_m).floor() as i32,
            ((p.y - self.origin.y) / self.cell_m).floor() as i32,
        )
    }

    pub fn center(&self, c: Cell) -> Point2 {
        Point2::new(
            self.origin.x + (c.col as f64 + 0.5) * self.cell_m,
            self.origin.y + (c.row as f64 + 0.5) * self.cell_m,
        )
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.col >= 0 && c.row >= 0 && (c.col as usize) < self.cols && (c.row as usize) < self.rows
    }

    fn index(&self, c: Cell) -> usize {
        c.row as usize * self.cols + c.col as usize
    }

    fn cell_at(&self, idx: usize) -> Cell {
        Cell::new((idx % self.cols) as i32, (idx / self.cols) as i32)
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.free[self.index(c)]
    }

    pub fn set_free(&mut self, c: Cell, free: bool) {
        if self.in_bounds(c) {
            let i = self.index(c);
            self.free[i] = free;
        }
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|f| **f).count()
    }

    pub fn step_cost(&self, a: Cell, b: Cell) -> f64 {
        if a.is_diagonal_to(&b) {
            self.cell_m * std::f64::consts::SQRT_2
        } else {
            self.cell_m
        }
    }

    /// Free 8-neighbors. Diagonals must not cut an occupied corner.
    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        NEIGHBORS.iter().filter_map(move |&(dc, dr)| {
            let n = Cell::new(c.col + dc, c.row + dr);
            if !self.is_free(n) {
                return None;
            }
            if dc != 0
                && dr != 0
                && (!self.is_free(Cell::new(c.col + dc, c.row)) || !self.is_free(Cell::new(c.col, c.row + dr)))
            {
                return None;
            }
            Some(n)
        })
    }

    /// Cells crossed by the segment between two cell centers (grid DDA);
    /// true when all of them are free.
    pub fn line_of_sight(&self, a: Cell, b: Cell) -> bool {
        let (mut col, mut row) = (a.col, a.row);
        let (dx, dy) = ((b.col - a.col) as f64, (b.row - a.row) as f64);
        let step_c = (b.col - a.col).signum();
        let step_r = (b.row - a.row).signum();
        let t_delta_x = if dx != 0.0 { 1.0 / dx.abs() } else { f64::INFINITY };
        let t_delta_y = if dy != 0.0 { 1.0 / dy.abs() } else { f64::INFINITY };
        let mut t_max_x = t_delta_x / 2.0;
        let mut t_max_y = t_delta_y / 2.0;
        if !self.is_free(a) {
            return false;
        }
        while (col, row) != (b.col, b.row) {
            if (t_max_x - t_max_y).abs() < 1e-12 {
                // Passing exactly through a corner: both side cells must be free.
                if !self.is_free(Cell::new(col + step_c, row)) || !self.is_free(Cell::new(col, row + step_r)) {
                    return false;
                }
                col += step_c;
                row += step_r;
                t_max_x += t_delta_x;
                t_max_y += t_delta_y;
            } else if t_max_x < t_max_y {
                col += step_c;
                t_max_x += t_delta_x;
            } else {
                row += step_r;
                t_max_y += t_delta_y;
            }
            if !self.is_free(Cell::new(col, row)) {
                return false;
            }
        }
        true
    }

    /// Single-source grid distances (meters), exploring up to `max_cost`.
    pub fn distances_from(&self, start: Cell, max_cost: f64) -> GridDistances {
        let mut dist = vec![f64::INFINITY; self.free.len()];
        if !self.is_free(start) {
            return GridDistances { dist, cols: self.cols };
        }
        let mut heap = BinaryHeap::new();
        let s = self.index(start);
        dist[s] = 0.0;
        heap.push(Open { f: 0.0, g: 0.0, idx: s });
        while let Some(Open { g, idx, .. }) = heap.pop() {
            if g > dist[idx] {
                continue;
            }
            let c = self.cell_at(idx);
            for n in self.neighbors(c) {
                let g2 = g + self.step_cost(c, n);
                let ni = self.index(n);
                if g2 < dist[ni] && g2 <= max_cost {
                    dist[ni] = g2;
                    heap.push(Open { f: g2, g: g2, idx: ni });
                }
            }
        }
        GridDistances { dist, cols: self.cols }
    }

    /// A* with the octile heuristic. Returns the cells after `from` up to and
    /// including `to`, or `None` when unreachable.
    pub fn find_path(&self, from: Cell, to: Cell) -> Option<Vec<Cell>> {
        if !self.is_free(from) || !self.is_free(to) {
            return None;
        }
        if from == to {
            return Some(Vec::new());
        }
        let h = |c: Cell| {
            let (dx, dy) = ((c.col - to.col).abs() as f64, (c.row - to.row).abs() as f64);
            self.cell_m * (dx.max(dy) + (std::f64::consts::SQRT_2 - 1.0) * dx.min(dy))
        };
        let mut best = vec![f64::INFINITY; self.free.len()];
        let mut came = vec![usize::MAX; self.free.len()];
        let mut heap = BinaryHeap::new();
        let (s, t) = (self.index(from), self.index(to));
        best[s] = 0.0;
        heap.push(Open {
            f: h(from),
            g: 0.0,
            idx: s,
        });
        while let Some(Open { g, idx, .. }) = heap.pop() {
            if g > best[idx] {
                continue;
            }
            if idx == t {
                let mut path = Vec::new();
                let mut cur = t;
                while cur != s {
                    path.push(self.cell_at(cur));
                    cur = came[cur];
                }
                path.reverse();
                return Some(path);
            }
            let c = self.cell_at(idx);
            for n in self.neighbors(c) {
                let g2 = g + self.step_cost(c, n);
                let ni = self.index(n);
                if g2 < best[ni] {
                    best[ni] = g2;
                    came[ni] = idx;
                    heap.push(Open {
                        f: g2 + h(n),
                        g: g2,
                        idx: ni,
                    });
                }
            }
        }
        None
    }

    /// Free cells whose centers lie strictly within `radius` of `p`.
    pub fn free_cells_within(&self, p: Point2, radius: f64) -> Vec<Cell> {
        let c0 = self.cell_of(Point2::new(p.x - radius, p.y - radius));
        let c1 = self.cell_of(Point2::new(p.x + radius, p.y + radius));
        let mut out = Vec::new();
        for row in c0.row..=c1.row {
            for col in c0.col..=c1.col {
                let c = Cell::new(col, row);
                if self.is_free(c) && self.center(c).distance(&p) < radius {
                    out.push(c);
                }
            }
        }
        out
    }
}

/// Result of [`OccupancyGrid::distances_from`].
#[derive(Debug, Clone)]
pub struct GridDistances {
    dist: Vec<f64>,
    cols: usize,
}

impl GridDistances {
    pub fn get(&self, c: Cell) -> f64 {
        if c.col < 0 || c.row < 0 || c.col as usize >= self.cols {
            return f64::INFINITY;
        }
        self.dist
            .get(c.row as usize * self.cols + c.col as usize)
            .copied()
            .unwrap_or(f64::INFINITY)
    }
}
