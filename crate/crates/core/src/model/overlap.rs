use std::collections::BTreeMap;

use super::LabelMap;
use crate::error::{Error, Result};

/// Pixel counts `|S_k ∩ G_j|` for every superpixel label (row) and
/// ground-truth label (column). Rows and columns are sorted by label.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    sp_labels: Vec<u32>,
    gt_labels: Vec<u32>,
    counts: Vec<u64>,
    sp_areas: Vec<u64>,
    gt_areas: Vec<u64>,
    total: u64,
}

impl OverlapMatrix {
    /// Builds a matrix from explicit row-major counts.
    pub fn from_counts(sp_labels: Vec<u32>, gt_labels: Vec<u32>, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != sp_labels.len() * gt_labels.len() {
            return Err(Error::LengthMismatch(
                counts.len(),
                sp_labels.len() * gt_labels.len(),
            ));
        }
        let cols = gt_labels.len();
        let mut sp_areas = vec![0u64; sp_labels.len()];
        let mut gt_areas = vec![0u64; cols];
        for (i, &c) in counts.iter().enumerate() {
            sp_areas[i / cols] += c;
            gt_areas[i % cols] += c;
        }
        let total = sp_areas.iter().sum();
        Ok(Self {
            sp_labels,
            gt_labels,
            counts,
            sp_areas,
            gt_areas,
            total,
        })
    }

    pub fn sp_labels(&self) -> &[u32] {
        &self.sp_labels
    }

    pub fn gt_labels(&self) -> &[u32] {
        &self.gt_labels
    }

    pub fn rows(&self) -> usize {
        self.sp_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.gt_labels.len()
    }

    #[inline]
    pub fn get(&self, k: usize, j: usize) -> u64 {
        self.counts[k * self.gt_labels.len() + j]
    }

    pub fn row(&self, k: usize) -> &[u64] {
        let c = self.gt_labels.len();
        &self.counts[k * c..(k + 1) * c]
    }

    /// `|S_k|`
    pub fn sp_area(&self, k: usize) -> u64 {
        self.sp_areas[k]
    }

    /// `|G_j|`
    pub fn gt_area(&self, j: usize) -> u64 {
        self.gt_areas[j]
    }

    /// `|I|`
    pub fn total(&self) -> u64 {
        self.total
    }
}

fn index_of(labels: &LabelMap) -> (Vec<u32>, BTreeMap<u32, usize>) {
    let sorted: Vec<u32> = labels.distinct_labels().into_iter().collect();
    let index = sorted.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    (sorted, index)
}

pub fn overlap_matrix(sp: &LabelMap, gt: &LabelMap) -> Result<OverlapMatrix> {
    sp.ensure_same_dimensions(gt.dimensions())?;
    let (sp_labels, sp_index) = index_of(sp);
    let (gt_labels, gt_index) = index_of(gt);
    let cols = gt_labels.len();
    let mut counts = vec![0u64; sp_labels.len() * cols];
    // label -> dense index lookups are the hot path; resolve runs of equal labels once
    let mut last = (u32::MAX, u32::MAX, 0usize);
    for (&s, &g) in sp.as_slice().iter().zip(gt.as_slice()) {
        if (s, g) != (last.0, last.1) {
            last = (s, g, sp_index[&s] * cols + gt_index[&g]);
        }
        counts[last.2] += 1;
    }
    OverlapMatrix::from_counts(sp_labels, gt_labels, counts)
}
