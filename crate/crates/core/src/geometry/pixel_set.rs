use std::collections::VecDeque;

use crate::model::Point;

/// Bitmap membership over the bounding box of a pixel list, padded by one
/// pixel so neighbor lookups never leave the buffer.
#[derive(Debug, Clone)]
pub struct PixelSet {
    x0: i32,
    y0: i32,
    w: usize,
    h: usize,
    bits: Vec<bool>,
    len: usize,
}

impl PixelSet {
    pub fn new(pixels: &[Point]) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for &(x, y) in pixels {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        if pixels.is_empty() {
            (x0, y0, x1, y1) = (0, 0, -1, -1);
        }
        let (x0, y0) = (x0 - 1, y0 - 1);
        let w = (x1 - x0 + 2) as usize;
        let h = (y1 - y0 + 2) as usize;
        let mut set = Self {
            x0,
            y0,
            w,
            h,
            bits: vec![false; w * h],
            len: 0,
        };
        for &p in pixels {
            let i = set.index(p).expect("point inside padded box");
            if !set.bits[i] {
                set.bits[i] = true;
                set.len += 1;
            }
        }
        set
    }

    #[inline]
    fn index(&self, (x, y): Point) -> Option<usize> {
        let (dx, dy) = (x - self.x0, y - self.y0);
        if dx < 0 || dy < 0 || dx as usize >= self.w || dy as usize >= self.h {
            return None;
        }
        Some(dy as usize * self.w + dx as usize)
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        self.index(p).is_some_and(|i| self.bits[i])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Members in row-major order.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.len);
        for yy in 0..self.h {
            for xx in 0..self.w {
                if self.bits[yy * self.w + xx] {
                    out.push((self.x0 + xx as i32, self.y0 + yy as i32));
                }
            }
        }
        out
    }

    pub fn is_boundary(&self, (x, y): Point) -> bool {
        self.contains((x, y))
            && !(self.contains((x - 1, y))
                && self.contains((x + 1, y))
                && self.contains((x, y - 1))
                && self.contains((x, y + 1)))
    }

    pub fn perimeter(&self) -> usize {
        self.points()
            .into_iter()
            .filter(|&p| self.is_boundary(p))
            .count()
    }

    /// Number of 4-connected components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.bits.len()];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.bits.len() {
            if !self.bits[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                // padding guarantees members are never on the buffer edge
                for j in [i - 1, i + 1, i - self.w, i + self.w] {
                    if self.bits[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        count
    }
}

/// True if the pixels form exactly one 4-connected component.
pub fn is_four_connected(pixels: &[Point]) -> bool {
    PixelSet::new(pixels).component_count() == 1
}
