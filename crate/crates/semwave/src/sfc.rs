//! Hilbert curve generators.
//!
//! `standard_hilbert` walks a 2^a x 2^a grid with the classic recursive
//! construction. `gilbert_curve` covers a rectangle of arbitrary integer
//! edge lengths with a Hilbert-like curve (generalized construction after
//! Cerveny's gilbert2d); the two produce the same cell sequence when the
//! edges are a power of two.

use crate::error::{Result, SemError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurvePath {
    pub cells: Vec<(u32, u32)>,
    pub width: u32,
    pub height: u32,
    /// Maximum recursion depth reached while generating the curve.
    pub depth: u32,
}

impl CurvePath {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Standard Hilbert curve of the given order over a 2^order x 2^order grid,
/// starting at (0, 0).
pub fn standard_hilbert(order: u32) -> Result<CurvePath> {
    if order == 0 || order > 16 {
        return Err(SemError::CurveRange(format!(
            "standard Hilbert order must be in 1..=16, got {order}"
        )));
    }
    let side = 1u32 << order;
    let mut walk = HilbertWalk {
        x0: -1,
        x1: 0,
        cells: Vec::with_capacity((side as usize) * (side as usize)),
    };
    walk.step(0);
    walk.hilbert(0, 1, order);
    Ok(CurvePath {
        cells: walk.cells,
        width: side,
        height: side,
        depth: order,
    })
}

struct HilbertWalk {
    x0: i64,
    x1: i64,
    cells: Vec<(u32, u32)>,
}

impl HilbertWalk {
    // direction modulo 4: 0 = right, 1 = up, 2 = left, 3 = down
    fn step(&mut self, direction: i32) {
        match direction.rem_euclid(4) {
            0 => self.x0 += 1,
            1 => self.x1 += 1,
            2 => self.x0 -= 1,
            _ => self.x1 -= 1,
        }
        self.cells.push((self.x0 as u32, self.x1 as u32));
    }

    // rotation: +1 clockwise, -1 counter-clockwise
    fn hilbert(&mut self, mut direction: i32, rotation: i32, order: u32) {
        if order == 0 {
            return;
        }
        direction += rotation;
        self.hilbert(direction, -rotation, order - 1);
        self.step(direction);
        direction -= rotation;
        self.hilbert(direction, rotation, order - 1);
        self.step(direction);
        self.hilbert(direction, rotation, order - 1);
        direction -= rotation;
        self.step(direction);
        self.hilbert(direction, -rotation, order - 1);
    }
}

/// Generalized Hilbert curve over a `width` x `height` grid.
pub fn gilbert_curve(width: u32, height: u32) -> Result<CurvePath> {
    if width == 0 || height == 0 {
        return Err(SemError::CurveRange(format!(
            "grid dimensions must be positive, got {width} x {height}"
        )));
    }
    let total = width as u64 * height as u64;
    if total > 1u64 << 32 {
        return Err(SemError::CurveRange(format!(
            "grid of {width} x {height} cells exceeds the 2^32 cell limit"
        )));
    }
    let mut gen = Gilbert {
        cells: Vec::with_capacity(total as usize),
        depth: 0,
        max_depth: 0,
    };
    // Major axis along the longer dimension; for squares this reproduces the
    // standard curve's up-first walk.
    // A corner-to-corner unit-step walk of a w x h block along a major axis of
    // length `major` exists only when `major` is even or the minor length is
    // odd (checkerboard parity). Walking the longer side first reproduces the
    // classic curve; fall back to the other axis when parity forbids it, which
    // avoids the diagonal step the naive split produces on odd-by-even grids.
    let horizontal_ok = width % 2 == 0 || height % 2 == 1;
    let horizontal = if width >= height { horizontal_ok } else { !(height % 2 == 0 || width % 2 == 1) };
    if horizontal {
        gen.generate(0, 0, width as i64, 0, 0, height as i64);
    } else {
        gen.generate(0, 0, 0, height as i64, width as i64, 0);
    }
    Ok(CurvePath {
        cells: gen.cells,
        width,
        height,
        depth: gen.max_depth,
    })
}

struct Gilbert {
    cells: Vec<(u32, u32)>,
    depth: u32,
    max_depth: u32,
}

fn sgn(x: i64) -> i64 {
    x.signum()
}

impl Gilbert {
    /// Fill the rectangle spanned by vectors (ax, ay) and (bx, by) from
    /// (x, y), walking along the major axis (ax, ay).
    fn generate(&mut self, x: i64, y: i64, ax: i64, ay: i64, bx: i64, by: i64) {
        self.depth += 1;
        self.max_depth = self.max_depth.max(self.depth);

        let w = (ax + ay).abs();
        let h = (bx + by).abs();
        let (dax, day) = (sgn(ax), sgn(ay)); // unit major direction
        let (dbx, dby) = (sgn(bx), sgn(by)); // unit orthogonal direction

        if h == 1 {
            // single row
            let (mut cx, mut cy) = (x, y);
            for _ in 0..w {
                self.cells.push((cx as u32, cy as u32));
                cx += dax;
                cy += day;
            }
            self.depth -= 1;
            return;
        }
        if w == 1 {
            let (mut cx, mut cy) = (x, y);
            for _ in 0..h {
                self.cells.push((cx as u32, cy as u32));
                cx += dbx;
                cy += dby;
            }
            self.depth -= 1;
            return;
        }

        // floor division: the recursion passes negated axis vectors
        let (mut ax2, mut ay2) = (ax.div_euclid(2), ay.div_euclid(2));
        let (mut bx2, mut by2) = (bx.div_euclid(2), by.div_euclid(2));
        let w2 = (ax2 + ay2).abs();
        let h2 = (bx2 + by2).abs();

        if 2 * w > 3 * h {
            if w2 % 2 != 0 && w > 2 {
                // prefer even steps
                ax2 += dax;
                ay2 += day;
            }
            // long case: split the rectangle in two along the major axis
            self.generate(x, y, ax2, ay2, bx, by);
            self.generate(x + ax2, y + ay2, ax - ax2, ay - ay2, bx, by);
        } else {
            if h2 % 2 != 0 && h > 2 {
                bx2 += dbx;
                by2 += dby;
            }
            // standard case: one step up, one long horizontal, one step down
            self.generate(x, y, bx2, by2, ax2, ay2);
            self.generate(x + bx2, y + by2, ax, ay, bx - bx2, by - by2);
            self.generate(
                x + (ax - dax) + (bx2 - dbx),
                y + (ay - day) + (by2 - dby),
                -bx2,
                -by2,
                -(ax - ax2),
                -(ay - ay2),
            );
        }
        self.depth -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn check_valid(path: &CurvePath) {
        assert_eq!(path.len(), (path.width as usize) * (path.height as usize));
        let mut seen = HashSet::new();
        for &(x, y) in &path.cells {
            assert!(x < path.width && y < path.height, "cell ({x},{y}) out of grid");
            assert!(seen.insert((x, y)), "cell ({x},{y}) visited twice");
        }
        for pair in path.cells.windows(2) {
            let (ax, ay) = pair[0];
            let (bx, by) = pair[1];
            let d = (ax as i64 - bx as i64).abs() + (ay as i64 - by as i64).abs();
            assert_eq!(d, 1, "non-unit step {:?} -> {:?}", pair[0], pair[1]);
        }
    }

    #[test]
    fn standard_order_one() {
        let p = standard_hilbert(1).unwrap();
        assert_eq!(p.cells, vec![(0, 0), (0, 1), (1, 1), (1, 0)]);
    }

    #[test]
    fn standard_lengths_and_validity() {
        for order in 1..=5 {
            let p = standard_hilbert(order).unwrap();
            assert_eq!(p.len(), 4usize.pow(order));
            check_valid(&p);
        }
    }

    #[test]
    fn standard_range_errors() {
        assert!(standard_hilbert(0).is_err());
        assert!(standard_hilbert(17).is_err());
    }

    #[test]
    fn gilbert_single_column() {
        let p = gilbert_curve(1, 5).unwrap();
        assert_eq!(p.cells, vec![(0, 0), (0, 1), (0, 2), (0, 3), (0, 4)]);
    }

    #[test]
    fn gilbert_zero_dimension_errors() {
        assert!(gilbert_curve(0, 3).is_err());
        assert!(gilbert_curve(3, 0).is_err());
    }

    #[test]
    fn gilbert_matches_standard_on_powers_of_two() {
        for k in 1..=6 {
            let std_path = standard_hilbert(k).unwrap();
            let gen_path = gilbert_curve(1 << k, 1 << k).unwrap();
            assert_eq!(std_path.cells, gen_path.cells, "mismatch at k={k}");
        }
    }

    #[test]
    fn gilbert_small_rectangles_valid() {
        for w in 1..=12 {
            for h in 1..=12 {
                check_valid(&gilbert_curve(w, h).unwrap());
            }
        }
    }

    #[test]
    fn gilbert_3x2() {
        let p = gilbert_curve(3, 2).unwrap();
        assert_eq!(p.len(), 6);
        check_valid(&p);
    }

    #[test]
    fn gilbert_large_grid_no_overflow() {
        let p = gilbert_curve(4096, 4096).unwrap();
        assert_eq!(p.len(), 4096 * 4096);
        assert!(p.depth < 64);
    }
}
