//! Active gradient-support bookkeeping and the morphological refinement pass.
//!
//! A [`SupportSet`] records which pixels may carry nonzero gradient groups in
//! the constrained subproblem, plus the history of per-iteration activations.
//! Refinement rebuilds the active set from a binary map: an opening with a
//! radius-3 disk removes isolated speckle, and a Gaussian smoothing pass
//! expands what survives so nearby structure is co-activated.

use crate::error::{CoreError, Result};
use crate::grid::ImageGrid;

/// The set `S` of active pixel indices together with the activation
/// increments `C_1..C_t` that produced it.
#[derive(Debug, Clone)]
pub struct SupportSet {
    height: usize,
    width: usize,
    active: Vec<bool>,
    active_count: usize,
    /// Activation batches in order; pairwise disjoint.
    increments: Vec<Vec<usize>>,
    /// Union of all increments ever recorded (refinement may drop some from
    /// `active`; these stay barred from re-activation so increments remain
    /// disjoint).
    ever_activated: Vec<bool>,
    /// Smoothed mask from the last refinement, kept for inspection.
    soft_mask: Option<ImageGrid>,
}

impl SupportSet {
    /// The empty support on an `height x width` grid.
    pub fn empty(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(CoreError::InvalidParameter(format!(
                "support dimensions must be positive, got {height}x{width}"
            )));
        }
        let n = height * width;
        Ok(Self {
            height,
            width,
            active: vec![false; n],
            active_count: 0,
            increments: Vec::new(),
            ever_activated: vec![false; n],
            soft_mask: None,
        })
    }

    /// The full support: every pixel active, recorded as one increment.
    pub fn full(height: usize, width: usize) -> Result<Self> {
        let mut s = Self::empty(height, width)?;
        let all: Vec<usize> = (0..height * width).collect();
        s.record_increment(&all)?;
        Ok(s)
    }

    /// Builds a support from explicit indices (recorded as one increment).
    pub fn from_indices(height: usize, width: usize, indices: &[usize]) -> Result<Self> {
        let mut s = Self::empty(height, width)?;
        s.record_increment(indices)?;
        Ok(s)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Total pixel count of the grid (not the active count).
    pub fn pixel_count(&self) -> usize {
        self.active.len()
    }

    /// Number of active pixels.
    pub fn len(&self) -> usize {
        self.active_count
    }

    pub fn is_empty(&self) -> bool {
        self.active_count == 0
    }

    pub fn is_full(&self) -> bool {
        self.active_count == self.active.len()
    }

    #[inline]
    pub fn contains(&self, index: usize) -> bool {
        self.active[index]
    }

    /// True if `index` belongs to any recorded increment, active or not.
    pub fn ever_activated(&self, index: usize) -> bool {
        self.ever_activated[index]
    }

    /// The active mask, row-major.
    pub fn mask(&self) -> &[bool] {
        &self.active
    }

    /// Sorted active indices.
    pub fn indices(&self) -> Vec<usize> {
        self.active
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| if a { Some(i) } else { None })
            .collect()
    }

    pub fn increments(&self) -> &[Vec<usize>] {
        &self.increments
    }

    pub fn soft_mask(&self) -> Option<&ImageGrid> {
        self.soft_mask.as_ref()
    }

    /// Records a new activation batch `C_t` and unions it into the active
    /// set. Errors if the batch is out of bounds or overlaps a previous
    /// increment.
    pub fn record_increment(&mut self, batch: &[usize]) -> Result<()> {
        for &i in batch {
            if i >= self.active.len() {
                return Err(CoreError::InvalidParameter(format!(
                    "support index {i} out of bounds for {} pixels",
                    self.active.len()
                )));
            }
            if self.ever_activated[i] {
                return Err(CoreError::InvalidParameter(format!(
                    "support index {i} was already activated by an earlier increment"
                )));
            }
        }
        let mut sorted: Vec<usize> = batch.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != batch.len() {
            return Err(CoreError::InvalidParameter(
                "activation batch contains duplicate indices".to_string(),
            ));
        }
        for &i in &sorted {
            self.ever_activated[i] = true;
            if !self.active[i] {
                self.active[i] = true;
                self.active_count += 1;
            }
        }
        self.increments.push(sorted);
        Ok(())
    }

    /// Replaces the active set (used by refinement). Increment history and
    /// the ever-activated record are preserved.
    fn replace_active(&mut self, mask: Vec<bool>, soft: ImageGrid) {
        debug_assert_eq!(mask.len(), self.active.len());
        self.active_count = mask.iter().filter(|&&b| b).count();
        self.active = mask;
        self.soft_mask = Some(soft);
    }
}

/// Offsets of the disk structuring element `{(di,dj) : di^2 + dj^2 <= 9}`.
fn disk3_offsets() -> Vec<(isize, isize)> {
    let mut offs = Vec::new();
    for di in -3isize..=3 {
        for dj in -3isize..=3 {
            if di * di + dj * dj <= 9 {
                offs.push((di, dj));
            }
        }
    }
    offs
}

/// Binary erosion; out-of-bounds neighbors count as foreground so the image
/// border does not erode structure by itself.
fn erode(map: &[bool], h: usize, w: usize, offsets: &[(isize, isize)]) -> Vec<bool> {
    let mut out = vec![false; h * w];
    for i in 0..h as isize {
        'pix: for j in 0..w as isize {
            for &(di, dj) in offsets {
                let (ni, nj) = (i + di, j + dj);
                if ni >= 0 && ni < h as isize && nj >= 0 && nj < w as isize {
                    if !map[(ni as usize) * w + nj as usize] {
                        continue 'pix;
                    }
                }
            }
            out[(i as usize) * w + j as usize] = true;
        }
    }
    out
}

/// Binary dilation; out-of-bounds neighbors count as background.
fn dilate(map: &[bool], h: usize, w: usize, offsets: &[(isize, isize)]) -> Vec<bool> {
    let mut out = vec![false; h * w];
    for i in 0..h as isize {
        for j in 0..w as isize {
            if map[(i as usize) * w + j as usize] {
                for &(di, dj) in offsets {
                    let (ni, nj) = (i + di, j + dj);
                    if ni >= 0 && ni < h as isize && nj >= 0 && nj < w as isize {
                        out[(ni as usize) * w + nj as usize] = true;
                    }
                }
            }
        }
    }
    out
}

/// Normalized 1-D Gaussian taps for the separable mask smoother: sigma 3,
/// 19 taps (radius 9 = 3 sigma).
fn gaussian_taps_sigma3() -> Vec<f64> {
    let sigma = 3.0f64;
    let radius = 9isize;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|t| (-((t * t) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= s;
    }
    taps
}

/// Separable zero-padded Gaussian blur of a real map.
fn blur_map(map: &[f64], h: usize, w: usize, taps: &[f64]) -> Vec<f64> {
    let radius = (taps.len() / 2) as isize;
    let mut rows = vec![0.0; h * w];
    for i in 0..h {
        for j in 0..w as isize {
            let mut acc = 0.0;
            for (t, &tap) in taps.iter().enumerate() {
                let nj = j + t as isize - radius;
                if nj >= 0 && nj < w as isize {
                    acc += tap * map[i * w + nj as usize];
                }
            }
            rows[i * w + j as usize] = acc;
        }
    }
    let mut out = vec![0.0; h * w];
    for j in 0..w {
        for i in 0..h as isize {
            let mut acc = 0.0;
            for (t, &tap) in taps.iter().enumerate() {
                let ni = i + t as isize - radius;
                if ni >= 0 && ni < h as isize {
                    acc += tap * rows[(ni as usize) * w + j];
                }
            }
            out[(i as usize) * w + j] = acc;
        }
    }
    out
}

/// Refines a support set: binary map -> opening with a radius-3 disk ->
/// Gaussian smoothing (sigma 3, 19x19) -> keep strictly positive entries.
/// The smoothed map is stored as the new soft mask.
pub fn refine_support(s: &SupportSet, dims: (usize, usize)) -> Result<SupportSet> {
    let (h, w) = dims;
    if h != s.height() || w != s.width() {
        return Err(CoreError::DimensionMismatch {
            expected_h: s.height(),
            expected_w: s.width(),
            got_h: h,
            got_w: w,
        });
    }
    let offsets = disk3_offsets();
    let opened = dilate(&erode(s.mask(), h, w, &offsets), h, w, &offsets);
    let real_map: Vec<f64> = opened.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let smoothed = blur_map(&real_map, h, w, &gaussian_taps_sigma3());
    let mask: Vec<bool> = smoothed.iter().map(|&v| v > 0.0).collect();
    let soft = ImageGrid::from_vec(h, w, smoothed)?;
    let mut refined = s.clone();
    refined.replace_active(mask, soft);
    Ok(refined)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_full_constructors() {
        let e = SupportSet::empty(4, 5).unwrap();
        assert_eq!(e.len(), 0);
        assert!(!e.is_full());
        let f = SupportSet::full(4, 5).unwrap();
        assert_eq!(f.len(), 20);
        assert!(f.is_full());
        assert_eq!(f.increments().len(), 1);
    }

    #[test]
    fn increments_stay_disjoint() {
        let mut s = SupportSet::empty(3, 3).unwrap();
        s.record_increment(&[0, 4]).unwrap();
        s.record_increment(&[8]).unwrap();
        assert!(s.record_increment(&[4]).is_err());
        assert_eq!(s.len(), 3);
        assert!(s.contains(4));
        assert!(!s.contains(1));
        assert_eq!(s.indices(), vec![0, 4, 8]);
    }

    #[test]
    fn refine_empty_stays_empty() {
        let s = SupportSet::empty(30, 30).unwrap();
        let r = refine_support(&s, (30, 30)).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn refine_removes_isolated_pixel() {
        let mut s = SupportSet::empty(30, 30).unwrap();
        s.record_increment(&[15 * 30 + 15]).unwrap();
        let r = refine_support(&s, (30, 30)).unwrap();
        assert!(r.is_empty(), "a lone pixel cannot survive the opening");
    }

    #[test]
    fn refine_keeps_and_expands_solid_block() {
        // Solid 20x20 block in a 64x64 grid: the opening preserves its core,
        // and the smoothing pass expands the support outward by the filter
        // radius. The original block must remain fully active and the far
        // corner must stay inactive.
        let (h, w) = (64, 64);
        let mut idx = Vec::new();
        for i in 20..40 {
            for j in 20..40 {
                idx.push(i * w + j);
            }
        }
        let mut s = SupportSet::empty(h, w).unwrap();
        s.record_increment(&idx).unwrap();
        let r = refine_support(&s, (h, w)).unwrap();
        for &i in &idx {
            assert!(r.contains(i), "block pixel {i} lost by refinement");
        }
        assert!(r.len() > idx.len(), "support should expand");
        assert!(!r.contains(0), "far corner should stay inactive");
        assert!(r.soft_mask().is_some());
        // Increment history survives refinement.
        assert_eq!(r.increments().len(), 1);
    }

    #[test]
    fn refine_rejects_mismatched_dims() {
        let s = SupportSet::empty(8, 8).unwrap();
        assert!(refine_support(&s, (8, 9)).is_err());
    }
}
