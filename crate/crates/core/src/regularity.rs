//! Shape regularity of a decomposition.
//!
//! Local criteria (circularity C, shape regularity criteria SRC) score each
//! region on its own; consistency criteria (Jaccard consistency J, smooth
//! matching factor SMF) compare registered shapes to the decomposition's
//! average shape. The global regularity is `GR = SRC · SMF`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    average_shape, common_halfwidth, convex_hull_shape, perimeter, register_shape,
    spatial_variance_ratio, Occupancy, RegisteredShape, ShapeGrid,
};
use crate::model::{extract_regions, LabelMap, Region};

/// `min(1, 4π|S| / |P(S)|²)`
pub fn circularity(region: &Region) -> f64 {
    let p = perimeter(region.pixels()).expect("regions are non-empty") as f64;
    (4.0 * PI * region.area() as f64 / (p * p)).min(1.0)
}

/// Per-region breakdown of the local regularity terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionRegularity {
    pub label: u32,
    pub area: usize,
    pub perimeter: usize,
    pub hull_area: usize,
    pub hull_perimeter: usize,
    pub circularity: f64,
    /// `CC(H_S) / CC(S)`, clamped to at most 1.
    pub convexity_ratio: f64,
    /// `V_xy`
    pub variance_ratio: f64,
}

impl RegionRegularity {
    /// `CR · sqrt(V_xy)`
    pub fn src_term(&self) -> f64 {
        self.convexity_ratio * self.variance_ratio.sqrt()
    }
}

pub fn region_regularity(region: &Region) -> RegionRegularity {
    let area = region.area();
    let perim = perimeter(region.pixels()).expect("regions are non-empty");
    let hull = convex_hull_shape(region.pixels()).expect("regions are non-empty");
    let cc_shape = perim as f64 / area as f64;
    let cr = (hull.cheeger_ratio() / cc_shape).min(1.0);
    RegionRegularity {
        label: region.label(),
        area,
        perimeter: perim,
        hull_area: hull.area(),
        hull_perimeter: hull.perimeter(),
        circularity: (4.0 * PI * area as f64 / (perim as f64).powi(2)).min(1.0),
        convexity_ratio: cr,
        variance_ratio: spatial_variance_ratio(region.pixels()).expect("regions are non-empty"),
    }
}

fn total_area(regions: &[Region]) -> f64 {
    regions.iter().map(|r| r.area()).sum::<usize>() as f64
}

/// Area-weighted mean circularity `Σ_k (|S_k| / |I|) C(S_k)`.
pub fn decomposition_circularity(regions: &[Region]) -> Result<f64> {
    if regions.is_empty() {
        return Err(Error::EmptyInput("no regions"));
    }
    let total = total_area(regions);
    Ok(regions
        .iter()
        .map(|r| r.area() as f64 / total * circularity(r))
        .sum::<f64>()
        .min(1.0))
}

/// Shape regularity criteria `Σ_k (|S_k| / |I|) CR(S_k) sqrt(V_xy(S_k))`.
pub fn shape_regularity_criteria(regions: &[Region]) -> Result<f64> {
    if regions.is_empty() {
        return Err(Error::EmptyInput("no regions"));
    }
    let total = total_area(regions);
    let terms: Vec<f64> = regions
        .par_iter()
        .map(|r| r.area() as f64 / total * region_regularity(r).src_term())
        .collect();
    Ok(terms.iter().sum::<f64>().min(1.0))
}

/// Thresholded average shape `Ŝ*`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryAverageShape {
    pub shape: RegisteredShape,
    /// Occupancy threshold that produced the shape.
    pub threshold: f64,
    /// False when even the full support stays below the target area; the
    /// full support is returned in that case.
    pub reached: bool,
}

/// Scans the distinct positive occupancy values in decreasing order and
/// keeps the first (largest) threshold whose superlevel set reaches
/// `mean_area` cells.
pub fn binary_average_shape(avg: &ShapeGrid, mean_area: f64) -> Result<BinaryAverageShape> {
    let cells = avg.nonzero_cells();
    if cells.is_empty() {
        return Err(Error::EmptyInput("average shape has no support"));
    }
    let mut levels: Vec<f64> = cells.iter().map(|&(_, v)| v).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();

    let superlevel = |t: f64| -> Vec<_> {
        cells
            .iter()
            .filter(|&&(_, v)| v >= t)
            .map(|&(i, _)| avg.coordinate(i))
            .collect()
    };
    let mut count = 0usize;
    let mut sorted: Vec<f64> = cells.iter().map(|&(_, v)| v).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut idx = 0;
    for &t in &levels {
        while idx < sorted.len() && sorted[idx] >= t {
            count += 1;
            idx += 1;
        }
        if count as f64 >= mean_area {
            return Ok(BinaryAverageShape {
                shape: RegisteredShape::new(avg.halfwidth(), superlevel(t))?,
                threshold: t,
                reached: true,
            });
        }
    }
    let t = *levels.last().expect("non-empty");
    Ok(BinaryAverageShape {
        shape: RegisteredShape::new(avg.halfwidth(), superlevel(t))?,
        threshold: t,
        reached: false,
    })
}

/// Unweighted mean Jaccard index between each shape's support and `Ŝ*`.
pub fn jaccard_consistency<S: Occupancy>(shapes: &[S], binary: &RegisteredShape) -> Result<f64> {
    if shapes.is_empty() {
        return Err(Error::EmptyInput("no shapes"));
    }
    let side = binary.side();
    let mut in_binary = vec![false; side * side];
    for (i, _) in binary.nonzero_cells() {
        in_binary[i] = true;
    }
    let mut sum = 0.0;
    for s in shapes {
        if s.halfwidth() != binary.halfwidth() {
            return Err(Error::MixedHalfwidths(binary.halfwidth(), s.halfwidth()));
        }
        let cells = s.nonzero_cells();
        let inter = cells.iter().filter(|&&(i, _)| in_binary[i]).count();
        let union = cells.len() + binary.area() - inter;
        if union == 0 {
            return Err(Error::EmptyRegion);
        }
        sum += inter as f64 / union as f64;
    }
    Ok((sum / shapes.len() as f64).min(1.0))
}

/// Smooth matching factor
/// `1 − Σ_k (|S_k| / |I|) ‖S*/|S*| − S_k*/|S_k*|‖₁ / 2`,
/// where masses stand for the cardinalities and `|I| = Σ_k |S_k|`.
pub fn smooth_matching_factor<S: Occupancy>(shapes: &[S], avg: &ShapeGrid) -> Result<f64> {
    if shapes.is_empty() {
        return Err(Error::EmptyInput("no shapes"));
    }
    let avg_mass = avg.mass();
    if avg_mass.is_nan() || avg_mass <= 0.0 {
        return Err(Error::EmptyInput("average shape has zero mass"));
    }
    let total: f64 = shapes.iter().map(|s| s.mass()).sum();
    let values = avg.values();
    let mut sum = 0.0;
    for s in shapes {
        if s.halfwidth() != avg.halfwidth() {
            return Err(Error::MixedHalfwidths(avg.halfwidth(), s.halfwidth()));
        }
        let mass = s.mass();
        if mass.is_nan() || mass <= 0.0 {
            return Err(Error::EmptyRegion);
        }
        // cells outside the shape contribute their average mass; the
        // normalized average sums to one
        let mut l1 = 1.0;
        for (i, v) in s.nonzero_cells() {
            let a = values[i] / avg_mass;
            l1 += (a - v / mass).abs() - a;
        }
        sum += mass / total * l1 / 2.0;
    }
    Ok((1.0 - sum).clamp(0.0, 1.0))
}

/// Decomposition-level regularity summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    /// Area-weighted circularity.
    pub circularity: f64,
    pub src: f64,
    pub smf: f64,
    pub j_index: f64,
    pub gr: f64,
    /// Halfwidth of the common registration grid.
    pub halfwidth: usize,
    /// Threshold producing the binary average shape used by J.
    pub binary_threshold: f64,
    /// Whether the binary average shape reached the mean superpixel area.
    pub binary_reached: bool,
    /// Regions touching the canvas frame, when the canvas is known.
    pub border_regions: Option<usize>,
    pub regions: Vec<RegionRegularity>,
}

/// Runs registration, averaging, SRC, SMF and J over the regions. `|I|` is
/// the total region area.
pub fn global_regularity(regions: &[Region]) -> Result<RegularityReport> {
    if regions.is_empty() {
        return Err(Error::EmptyInput("no regions"));
    }
    let total = total_area(regions);
    let per_region: Vec<RegionRegularity> = regions.par_iter().map(region_regularity).collect();
    let src: f64 = per_region
        .iter()
        .map(|r| r.area as f64 / total * r.src_term())
        .sum();
    let circ: f64 = per_region
        .iter()
        .map(|r| r.area as f64 / total * r.circularity)
        .sum();

    let halfwidth = common_halfwidth(regions);
    let shapes = regions
        .iter()
        .map(|r| register_shape(r, halfwidth))
        .collect::<Result<Vec<_>>>()?;
    let avg = average_shape(&shapes)?;
    let smf = smooth_matching_factor(&shapes, &avg)?;
    let binary = binary_average_shape(&avg, total / regions.len() as f64)?;
    let j = jaccard_consistency(&shapes, &binary.shape)?;
    // weighted sums can overshoot by an ulp
    let (src, smf, circ) = (
        src.clamp(0.0, 1.0),
        smf.clamp(0.0, 1.0),
        circ.clamp(0.0, 1.0),
    );

    Ok(RegularityReport {
        circularity: circ,
        src,
        smf,
        j_index: j,
        gr: src * smf,
        halfwidth,
        binary_threshold: binary.threshold,
        binary_reached: binary.reached,
        border_regions: None,
        regions: per_region,
    })
}

/// [`global_regularity`] over the regions of a label map, also counting
/// regions truncated by the image frame.
pub fn global_regularity_of(labels: &LabelMap) -> Result<RegularityReport> {
    let regions = extract_regions(labels);
    let mut report = global_regularity(&regions)?;
    let (w, h) = labels.dimensions();
    report.border_regions = Some(regions.iter().filter(|r| r.touches_border(w, h)).count());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::register_shape;
    use crate::model::Point;

    fn rect(x0: i32, y0: i32, w: i32, h: i32) -> Region {
        let px = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x0 + x, y0 + y)))
            .collect();
        Region::new(0, px).unwrap()
    }

    #[test]
    fn circularity_examples() {
        assert_eq!(circularity(&rect(0, 0, 1, 1)), 1.0);
        let big = circularity(&rect(0, 0, 100, 100));
        assert!((big - 4.0 * PI * 1e4 / 396.0f64.powi(2)).abs() < 1e-12);
        assert!((big - 0.8014).abs() < 1e-4);
        // small-shape clamp: 0.4π > 1
        assert_eq!(circularity(&rect(0, 0, 10, 1)), 1.0);
    }

    #[test]
    fn decomposition_circularity_weights_by_area() {
        let a = rect(0, 0, 10, 10);
        let b = rect(10, 0, 4, 1);
        let expected = 100.0 / 104.0 * circularity(&a) + 4.0 / 104.0 * circularity(&b);
        let got = decomposition_circularity(&[a.clone(), b]).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert_eq!(
            decomposition_circularity(std::slice::from_ref(&a)).unwrap(),
            circularity(&a)
        );
    }

    #[test]
    fn src_examples() {
        assert_eq!(
            shape_regularity_criteria(&[rect(0, 0, 12, 12)]).unwrap(),
            1.0
        );
        let stripes: Vec<Region> = (0..6).map(|x| rect(x, 0, 1, 6)).collect();
        assert_eq!(shape_regularity_criteria(&stripes).unwrap(), 0.0);
    }

    fn ring_average() -> ShapeGrid {
        let a = register_shape(&rect(0, 0, 1, 1), 1).unwrap();
        let b = register_shape(&rect(0, 0, 3, 3), 1).unwrap();
        average_shape(&[a, b]).unwrap()
    }

    #[test]
    fn binary_average_scans_superlevels() {
        let avg = ring_average();
        let one = binary_average_shape(&avg, 1.0).unwrap();
        assert_eq!(one.shape.cells(), &[(0, 0)]);
        assert!(one.reached);
        let five = binary_average_shape(&avg, 5.0).unwrap();
        assert_eq!(five.shape.area(), 9);
        assert_eq!(five.threshold, 0.5);
        let too_big = binary_average_shape(&avg, 20.0).unwrap();
        assert!(!too_big.reached);
        assert_eq!(too_big.shape.area(), 9);
    }

    #[test]
    fn binary_average_of_identical_squares() {
        let s = register_shape(&rect(3, 3, 4, 4), 3).unwrap();
        let avg = average_shape(&[s.clone(), s.clone()]).unwrap();
        for mu in [1.0, 7.5, 16.0] {
            assert_eq!(binary_average_shape(&avg, mu).unwrap().shape, s);
        }
    }

    #[test]
    fn jaccard_examples() {
        let big = register_shape(&rect(0, 0, 3, 3), 2).unwrap();
        let small = register_shape(&rect(0, 0, 2, 2), 2).unwrap();
        assert_eq!(
            jaccard_consistency(&[big.clone(), big.clone()], &big).unwrap(),
            1.0
        );
        assert!((jaccard_consistency(&[small], &big).unwrap() - 4.0 / 9.0).abs() < 1e-15);
        let far = RegisteredShape::new(2, vec![(2, 2)]).unwrap();
        let center = RegisteredShape::new(2, vec![(0, 0)]).unwrap();
        assert_eq!(jaccard_consistency(&[far], &center).unwrap(), 0.0);
    }

    #[test]
    fn smf_examples() {
        let s = register_shape(&rect(0, 0, 4, 4), 2).unwrap();
        let avg = average_shape(&[s.clone(), s.clone(), s.clone()]).unwrap();
        assert!(
            (smooth_matching_factor(&[s.clone(), s.clone(), s.clone()], &avg).unwrap() - 1.0).abs()
                < 1e-15
        );

        let a: Vec<Point> = vec![(-2, -2), (-1, -2)];
        let b: Vec<Point> = vec![(1, 2), (2, 2)];
        let a = RegisteredShape::new(2, a).unwrap();
        let b = RegisteredShape::new(2, b).unwrap();
        let avg = average_shape(&[a.clone(), b.clone()]).unwrap();
        assert!((smooth_matching_factor(&[a.clone(), b], &avg).unwrap() - 0.5).abs() < 1e-15);

        let single = average_shape(std::slice::from_ref(&a)).unwrap();
        assert_eq!(smooth_matching_factor(&[a], &single).unwrap(), 1.0);
    }

    #[test]
    fn smf_matches_dense_l1() {
        let shapes = vec![
            register_shape(&rect(0, 0, 3, 2), 3).unwrap(),
            register_shape(&rect(0, 0, 1, 5), 3).unwrap(),
            register_shape(&rect(0, 0, 4, 4), 3).unwrap(),
        ];
        let avg = average_shape(&shapes).unwrap();
        let total: f64 = shapes.iter().map(|s| s.mass()).sum();
        let mut expected = 1.0;
        for s in &shapes {
            let g = s.to_grid();
            let l1: f64 = avg
                .values()
                .iter()
                .zip(g.values())
                .map(|(a, v)| (a / avg.mass() - v / s.mass()).abs())
                .sum();
            expected -= s.mass() / total * l1 / 2.0;
        }
        let got = smooth_matching_factor(&shapes, &avg).unwrap();
        assert!((got - expected).abs() < 1e-12);
        let dense: Vec<ShapeGrid> = shapes.iter().map(|s| s.to_grid()).collect();
        assert!((smooth_matching_factor(&dense, &avg).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn grid_of_squares_is_fully_regular() {
        let labels = LabelMap::from_fn(40, 40, |x, y| (y / 10 * 4 + x / 10) as u32).unwrap();
        let r = global_regularity_of(&labels).unwrap();
        assert!((r.gr - 1.0).abs() < 1e-12);
        assert_eq!(r.src, 1.0);
        assert!((r.smf - 1.0).abs() < 1e-12);
        assert_eq!(r.j_index, 1.0);
        assert_eq!(r.border_regions, Some(12));
    }

    #[test]
    fn stripes_have_zero_gr() {
        let labels = LabelMap::from_fn(8, 8, |x, _| x as u32).unwrap();
        let r = global_regularity_of(&labels).unwrap();
        assert_eq!(r.src, 0.0);
        assert_eq!(r.gr, 0.0);
    }
}
