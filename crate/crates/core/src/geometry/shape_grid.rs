use crate::error::{Error, Result};
use crate::model::{Point, Region};

/// Anything that can be read as occupancy values on a square grid of side
/// `2 * halfwidth + 1` centered on the origin.
pub trait Occupancy {
    fn halfwidth(&self) -> usize;

    /// Sum of all cell values.
    fn mass(&self) -> f64;

    /// `(flat index, value)` for every nonzero cell, in increasing index order.
    fn nonzero_cells(&self) -> Vec<(usize, f64)>;

    fn side(&self) -> usize {
        2 * self.halfwidth() + 1
    }
}

#[inline]
fn flat_index(halfwidth: usize, (x, y): Point) -> usize {
    let side = 2 * halfwidth + 1;
    let h = halfwidth as i64;
    ((y as i64 + h) as usize) * side + (x as i64 + h) as usize
}

/// Dense real-valued accumulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeGrid {
    halfwidth: usize,
    values: Vec<f64>,
    mass: f64,
}

impl ShapeGrid {
    pub fn zeros(halfwidth: usize) -> Self {
        let side = 2 * halfwidth + 1;
        Self {
            halfwidth,
            values: vec![0.0; side * side],
            mass: 0.0,
        }
    }

    pub fn from_values(halfwidth: usize, values: Vec<f64>) -> Result<Self> {
        let side = 2 * halfwidth + 1;
        if values.len() != side * side {
            return Err(Error::LengthMismatch(values.len(), side * side));
        }
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "occupancy values must be non-negative".into(),
            ));
        }
        let mass = values.iter().sum();
        Ok(Self {
            halfwidth,
            values,
            mass,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at grid coordinate `(x, y)`, zero outside the grid.
    pub fn get(&self, (x, y): Point) -> f64 {
        let h = self.halfwidth as i32;
        if x.abs() > h || y.abs() > h {
            return 0.0;
        }
        self.values[flat_index(self.halfwidth, (x, y))]
    }

    /// Number of nonzero cells.
    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    /// Grid coordinate of a flat index.
    pub fn coordinate(&self, index: usize) -> Point {
        let side = self.side();
        let h = self.halfwidth as i32;
        ((index % side) as i32 - h, (index / side) as i32 - h)
    }
}

impl Occupancy for ShapeGrid {
    fn halfwidth(&self) -> usize {
        self.halfwidth
    }

    fn mass(&self) -> f64 {
        self.mass
    }

    fn nonzero_cells(&self) -> Vec<(usize, f64)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect()
    }
}

/// Binary registered shape, stored sparsely as the occupied cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisteredShape {
    halfwidth: usize,
    cells: Vec<Point>,
}

impl RegisteredShape {
    /// Cells must lie inside the grid; they are sorted and deduplicated.
    pub fn new(halfwidth: usize, mut cells: Vec<Point>) -> Result<Self> {
        let required = cells
            .iter()
            .map(|&(x, y)| x.unsigned_abs().max(y.unsigned_abs()) as usize)
            .max()
            .unwrap_or(0);
        if required > halfwidth {
            return Err(Error::RegionExceedsWindow {
                halfwidth,
                required,
            });
        }
        cells.sort_unstable_by_key(|&(x, y)| (y, x));
        cells.dedup();
        Ok(Self { halfwidth, cells })
    }

    pub fn cells(&self) -> &[Point] {
        &self.cells
    }

    pub fn area(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.cells
            .binary_search_by_key(&(p.1, p.0), |&(x, y)| (y, x))
            .is_ok()
    }

    pub fn to_grid(&self) -> ShapeGrid {
        let mut grid = ShapeGrid::zeros(self.halfwidth);
        for &c in &self.cells {
            grid.values[flat_index(self.halfwidth, c)] = 1.0;
        }
        grid.mass = self.cells.len() as f64;
        grid
    }
}

impl Occupancy for RegisteredShape {
    fn halfwidth(&self) -> usize {
        self.halfwidth
    }

    fn mass(&self) -> f64 {
        self.cells.len() as f64
    }

    fn nonzero_cells(&self) -> Vec<(usize, f64)> {
        // row-major sort order of cells matches flat index order
        self.cells
            .iter()
            .map(|&c| (flat_index(self.halfwidth, c), 1.0))
            .collect()
    }
}

/// Integer translation moving the barycenter next to the origin: each axis
/// shift is `-barycenter` rounded half up.
pub fn registration_offset(region: &Region) -> Point {
    let (bx, by) = region.barycenter();
    ((0.5 - bx).floor() as i32, (0.5 - by).floor() as i32)
}

/// Smallest halfwidth holding the registered region.
pub fn required_halfwidth(region: &Region) -> usize {
    let (ox, oy) = registration_offset(region);
    region
        .pixels()
        .iter()
        .map(|&(x, y)| ((x + ox).unsigned_abs()).max((y + oy).unsigned_abs()) as usize)
        .max()
        .unwrap_or(0)
}

/// Smallest halfwidth shared by every registered region.
pub fn common_halfwidth(regions: &[Region]) -> usize {
    regions.iter().map(required_halfwidth).max().unwrap_or(0)
}

/// Translates the region so its barycenter sits at the origin (rounded
/// half up per axis) and returns its binary occupancy.
pub fn register_shape(region: &Region, halfwidth: usize) -> Result<RegisteredShape> {
    let (ox, oy) = registration_offset(region);
    let cells = region
        .pixels()
        .iter()
        .map(|&(x, y)| (x + ox, y + oy))
        .collect();
    RegisteredShape::new(halfwidth, cells)
}

/// Cell-wise mean of the given shapes.
pub fn average_shape<S: Occupancy>(shapes: &[S]) -> Result<ShapeGrid> {
    let first = shapes
        .first()
        .ok_or(Error::EmptyInput("average of zero shapes"))?;
    let halfwidth = first.halfwidth();
    let mut grid = ShapeGrid::zeros(halfwidth);
    for s in shapes {
        if s.halfwidth() != halfwidth {
            return Err(Error::MixedHalfwidths(halfwidth, s.halfwidth()));
        }
        for (i, v) in s.nonzero_cells() {
            grid.values[i] += v;
        }
    }
    let n = shapes.len() as f64;
    for v in &mut grid.values {
        *v /= n;
    }
    grid.mass = grid.values.iter().sum();
    Ok(grid)
}
